//! Published values that sit outside the acceptance criteria proper.

use spdc_core::reference::{self, hom};
use spdc_core::*;

fn cta_jsa(t: f64) -> JointSpectralAmplitude {
    let db = CoefficientDatabase::bundled();
    let m = Medium::new(&db, CrystalId::Cta).unwrap();
    let d = DegenerateDesign::at_gvm1(&m, 20.0).unwrap();
    let pump = PumpSpec::new(d.lambda_p_nm, hom::PUMP_FWHM_NM).unwrap();
    let g = CrystalGeometry::new(hom::LENGTH_MM, d.poling_period_um, t).unwrap();
    compute_jsa_auto(&m, &g, &pump, 256).unwrap()
}

#[test]
fn ppcta_jsa_peaks_at_published_degeneracy() {
    let (s, i) = cta_jsa(20.0).peak_nm();
    let g1 = reference::table_row(CrystalId::Cta).gvm1.value;
    assert!(
        (s - g1).abs() <= 0.5 && (i - g1).abs() <= 0.5,
        "peak ({s}, {i}) nm vs {g1} nm"
    );
}

#[test]
fn ppcta_jsa_moves_to_shorter_signal_when_heated() {
    let (s20, i20) = cta_jsa(20.0).peak_nm();
    let (s30, i30) = cta_jsa(30.0).peak_nm();
    assert!(
        s30 < s20 && i30 > i20,
        "20 C ({s20}, {i20}) -> 30 C ({s30}, {i30})"
    );
}

#[test]
fn ktp_alternate_source_gvm1() {
    let db = CoefficientDatabase::bundled();
    let alternates: Vec<String> = db
        .source_tags(CrystalId::Ktp)
        .into_iter()
        .filter(|t| {
            *t != db
                .default_model(CrystalId::Ktp, OpticalAxis::Y)
                .unwrap()
                .source_tag()
        })
        .map(String::from)
        .collect();
    assert!(!alternates.is_empty());
    let hits: Vec<(String, f64, f64)> = alternates
        .iter()
        .map(|tag| {
            let m = Medium::resolve(&db, CrystalId::Ktp, TypeIIAssignment::default(), Some(tag))
                .unwrap();
            let d = DegenerateDesign::at_gvm1(&m, 20.0).unwrap();
            (tag.clone(), d.lambda_deg_nm, d.poling_period_um)
        })
        .collect();
    let ok = hits.iter().any(|(_, l, p)| {
        (l - reference::KTP_ALTERNATE_GVM1_NM).abs() <= 1.0
            && (p - reference::KTP_ALTERNATE_PERIOD_UM).abs() <= 0.5
    });
    assert!(
        ok,
        "alternate KTP sets give {hits:?}; expected {} nm / {} um",
        reference::KTP_ALTERNATE_GVM1_NM,
        reference::KTP_ALTERNATE_PERIOD_UM
    );
}

fn pm_shift_magnitude(c: CrystalId) -> f64 {
    let db = CoefficientDatabase::bundled();
    let sweep = TemperatureSweep::new(20.0, 120.0, 101).unwrap();
    let cond = ScanCondition::PhaseMatch {
        reference_temperature_c: 20.0,
    };
    let m = Medium::new(&db, c).unwrap();
    scan_over_temperature(&m, cond, sweep)
        .unwrap()
        .endpoint_shift(0)
        .abs()
}

#[test]
fn cta_phase_matched_shift_magnitude() {
    let d = pm_shift_magnitude(CrystalId::Cta);
    assert!((d - 59.5).abs() <= 2.0, "|shift| {d} nm, expected 59.5 ± 2");
}

#[test]
fn rtp_phase_matched_shift_magnitude() {
    let d = pm_shift_magnitude(CrystalId::Rtp);
    assert!((d - 0.4).abs() <= 0.2, "|shift| {d} nm, expected 0.4 ± 0.2");
}
