//! Purity and HOM visibility of a 30 mm CTA source designed for degeneracy at 20 degC,
//! run at a few temperatures.

use spdc_core::interference::{default_tau_max, DEFAULT_TAU_STEPS};
use spdc_core::*;

fn main() -> spdc_core::Result<()> {
    let db = CoefficientDatabase::bundled();
    let medium = Medium::new(&db, CrystalId::Cta)?;
    let design = DegenerateDesign::at_gvm1(&medium, 20.0)?;
    let pump = PumpSpec::new(design.lambda_p_nm, 0.87)?;
    println!(
        "pump {:.3} nm, period {:.3} um",
        design.lambda_p_nm, design.poling_period_um
    );
    for t in [20.0, 22.0, 25.0, 30.0] {
        let geometry = CrystalGeometry::new(30.0, design.poling_period_um, t)?;
        let jsa = compute_jsa_auto(&medium, &geometry, &pump, 256)?;
        let purity = schmidt_purity(&jsa)?;
        let trace = hom_trace(&jsa, default_tau_max(pump.sigma_p()), DEFAULT_TAU_STEPS)?;
        let (s, i) = jsa.peak_nm();
        println!(
            "{t:>5.1} degC  peak ({s:.2}, {i:.2}) nm  purity {purity:.4}  V {:.3}  dips {}",
            trace.visibility, trace.dip_count
        );
    }
    Ok(())
}
