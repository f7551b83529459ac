//! Group-velocity-matching and quasi-phase-matching solvers for collinear
//! type-II down-conversion along the crystal x axis.
//!
//! All solvers are deterministic: a fixed grid scan brackets sign changes and
//! bisection refines them. Wavelengths cross this module's API in nm.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersion::{CoefficientDatabase, CrystalId, DispersionModel, OpticalAxis};
use crate::error::{Error, Result};
use crate::roots::{self, Bracket};
use crate::units::{nm_to_um, um_to_nm};

/// Polarization of each field. Defaults to pump ∥ y, signal ∥ y, idler ∥ z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeIIAssignment {
    pub pump: OpticalAxis,
    pub signal: OpticalAxis,
    pub idler: OpticalAxis,
}

impl Default for TypeIIAssignment {
    fn default() -> Self {
        Self {
            pump: OpticalAxis::Y,
            signal: OpticalAxis::Y,
            idler: OpticalAxis::Z,
        }
    }
}

impl TypeIIAssignment {
    /// Signal and idler relabelled.
    pub fn swapped(self) -> Self {
        Self {
            pump: self.pump,
            signal: self.idler,
            idler: self.signal,
        }
    }

    pub fn is_type_ii(&self) -> bool {
        self.signal != self.idler && (self.pump == self.signal || self.pump == self.idler)
    }
}

/// The three dispersion models a down-conversion process sees.
#[derive(Debug, Clone, Copy)]
pub struct Medium<'a> {
    pub crystal: CrystalId,
    pub assignment: TypeIIAssignment,
    pub pump: &'a DispersionModel,
    pub signal: &'a DispersionModel,
    pub idler: &'a DispersionModel,
}

impl<'a> Medium<'a> {
    /// Default models, default polarization assignment.
    pub fn new(db: &'a CoefficientDatabase, crystal: CrystalId) -> Result<Self> {
        Self::resolve(db, crystal, TypeIIAssignment::default(), None)
    }

    pub fn resolve(
        db: &'a CoefficientDatabase,
        crystal: CrystalId,
        assignment: TypeIIAssignment,
        source_tag: Option<&str>,
    ) -> Result<Self> {
        Ok(Self {
            crystal,
            assignment,
            pump: db.model(crystal, assignment.pump, source_tag)?,
            signal: db.model(crystal, assignment.signal, source_tag)?,
            idler: db.model(crystal, assignment.idler, source_tag)?,
        })
    }

    pub fn from_models(
        pump: &'a DispersionModel,
        signal: &'a DispersionModel,
        idler: &'a DispersionModel,
    ) -> Self {
        Self {
            crystal: pump.crystal,
            assignment: TypeIIAssignment {
                pump: pump.axis,
                signal: signal.axis,
                idler: idler.axis,
            },
            pump,
            signal,
            idler,
        }
    }

    pub fn swapped(&self) -> Self {
        Self {
            assignment: self.assignment.swapped(),
            signal: self.idler,
            idler: self.signal,
            ..*self
        }
    }

    /// Source tags of the three models, deduplicated.
    pub fn sources(&self) -> Vec<&'a str> {
        let mut tags = Vec::new();
        for m in [self.pump, self.signal, self.idler] {
            if !tags.contains(&m.source_tag()) {
                tags.push(m.source_tag());
            }
        }
        tags
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GvmCondition {
    /// 2·V⁻¹p(λ/2) = V⁻¹s(λ) + V⁻¹i(λ)
    Gvm1,
    /// V⁻¹p(λ/2) = V⁻¹s(λ)
    Gvm2Signal,
    /// V⁻¹p(λ/2) = V⁻¹i(λ)
    Gvm2Idler,
}

impl GvmCondition {
    pub fn label(self) -> &'static str {
        match self {
            GvmCondition::Gvm1 => "gvm1",
            GvmCondition::Gvm2Signal => "gvm2-signal",
            GvmCondition::Gvm2Idler => "gvm2-idler",
        }
    }

    /// Scan window used when none is given.
    pub fn default_window(self) -> ScanWindow {
        match self {
            GvmCondition::Gvm1 => ScanWindow::new(1000.0, 2300.0, 0.5),
            GvmCondition::Gvm2Signal | GvmCondition::Gvm2Idler => {
                ScanWindow::new(900.0, 1800.0, 0.5)
            }
        }
    }
}

impl fmt::Display for GvmCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Wavelength search window, nm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanWindow {
    pub lo_nm: f64,
    pub hi_nm: f64,
    pub step_nm: f64,
}

impl ScanWindow {
    pub fn new(lo_nm: f64, hi_nm: f64, step_nm: f64) -> Self {
        Self {
            lo_nm,
            hi_nm,
            step_nm,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lo_nm > 0.0 && self.lo_nm < self.hi_nm && self.step_nm > 0.0) {
            return Err(Error::invalid(format!("bad scan window {self:?}")));
        }
        Ok(())
    }
}

/// Bisection stops once the bracket is narrower than this (nm).
pub const GVM_TOLERANCE_NM: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GvmResult {
    /// Degenerate signal/idler wavelength, nm.
    pub lambda_deg_nm: f64,
    /// Residual of the matching condition at the root, in units of 1/c.
    pub residual: f64,
    pub condition: GvmCondition,
}

/// Residual of a GVM condition at degenerate wavelength `lambda_nm`.
pub fn gvm_residual(
    medium: &Medium<'_>,
    condition: GvmCondition,
    lambda_nm: f64,
    temperature_c: f64,
) -> Result<f64> {
    let l = nm_to_um(lambda_nm);
    let pump = medium.pump.inverse_group_velocity(l / 2.0, temperature_c)?;
    Ok(match condition {
        GvmCondition::Gvm1 => {
            2.0 * pump
                - medium.signal.inverse_group_velocity(l, temperature_c)?
                - medium.idler.inverse_group_velocity(l, temperature_c)?
        }
        GvmCondition::Gvm2Signal => {
            pump - medium.signal.inverse_group_velocity(l, temperature_c)?
        }
        GvmCondition::Gvm2Idler => pump - medium.idler.inverse_group_velocity(l, temperature_c)?,
    })
}

pub fn solve_gvm(
    medium: &Medium<'_>,
    condition: GvmCondition,
    temperature_c: f64,
    window: ScanWindow,
) -> Result<GvmResult> {
    window.validate()?;
    let f = |x: f64| gvm_residual(medium, condition, x, temperature_c);
    let scan = roots::scan(f, window.lo_nm, window.hi_nm, window.step_nm)?;
    let bracket = single_bracket(&scan.brackets, condition.label(), &window)?;
    let lambda = roots::bisect(f, bracket, GVM_TOLERANCE_NM)?;
    Ok(GvmResult {
        lambda_deg_nm: lambda,
        residual: f(lambda)?,
        condition,
    })
}

fn single_bracket(brackets: &[Bracket], what: &'static str, w: &ScanWindow) -> Result<Bracket> {
    match brackets {
        [] => Err(Error::NoSignChange {
            what,
            lo_nm: w.lo_nm,
            hi_nm: w.hi_nm,
        }),
        [b] => Ok(*b),
        many => Err(Error::MultipleRoots {
            what,
            brackets: many.iter().map(|b| (b.lo, b.hi)).collect(),
        }),
    }
}

/// First-kind GVM wavelength over the default 1000–2300 nm window.
pub fn gvm1_wavelength(medium: &Medium<'_>, temperature_c: f64) -> Result<GvmResult> {
    let c = GvmCondition::Gvm1;
    solve_gvm(medium, c, temperature_c, c.default_window())
}

/// Which photon the pump's group velocity is matched to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Gvm2Branch {
    Signal,
    #[default]
    Idler,
}

pub fn gvm2_wavelength(
    medium: &Medium<'_>,
    temperature_c: f64,
    branch: Gvm2Branch,
) -> Result<GvmResult> {
    let c = match branch {
        Gvm2Branch::Signal => GvmCondition::Gvm2Signal,
        Gvm2Branch::Idler => GvmCondition::Gvm2Idler,
    };
    solve_gvm(medium, c, temperature_c, c.default_window())
}

/// V⁻¹s(λ) − V⁻¹i(λ). Diagnostic only: the third GVM condition.
pub fn gvm3_residual(medium: &Medium<'_>, lambda_nm: f64, temperature_c: f64) -> Result<f64> {
    let l = nm_to_um(lambda_nm);
    Ok(medium.signal.inverse_group_velocity(l, temperature_c)?
        - medium.idler.inverse_group_velocity(l, temperature_c)?)
}

/// Fixed pump wavelength, grating period and temperature of a QPM process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMatchSpec {
    pub lambda_p_nm: f64,
    pub poling_period_um: f64,
    pub temperature_c: f64,
}

impl PhaseMatchSpec {
    pub fn new(lambda_p_nm: f64, poling_period_um: f64, temperature_c: f64) -> Result<Self> {
        if !(poling_period_um.is_finite() && poling_period_um > 0.0) {
            return Err(Error::invalid(format!(
                "poling period must be finite and positive, got {poling_period_um} um"
            )));
        }
        if !(lambda_p_nm.is_finite() && lambda_p_nm > 0.0) {
            return Err(Error::invalid(format!("pump wavelength {lambda_p_nm} nm")));
        }
        Ok(Self {
            lambda_p_nm,
            poling_period_um,
            temperature_c,
        })
    }

    /// Degenerate signal/idler wavelength for this pump, nm.
    pub fn degenerate_nm(&self) -> f64 {
        2.0 * self.lambda_p_nm
    }
}

/// Δk = k_p − k_s − k_i + 2π/Λ in rad/µm, with k_p taken at the spec's pump.
pub fn phase_mismatch(
    medium: &Medium<'_>,
    spec: &PhaseMatchSpec,
    signal_nm: f64,
    idler_nm: f64,
) -> Result<f64> {
    let spec = PhaseMatchSpec::new(spec.lambda_p_nm, spec.poling_period_um, spec.temperature_c)?;
    let t = spec.temperature_c;
    let kp = medium.pump.wave_number(nm_to_um(spec.lambda_p_nm), t)?;
    let ks = medium.signal.wave_number(nm_to_um(signal_nm), t)?;
    let ki = medium.idler.wave_number(nm_to_um(idler_nm), t)?;
    Ok(kp - ks - ki + 2.0 * PI / spec.poling_period_um)
}

/// Poling period (µm) that phase-matches degenerate emission at `lambda_deg_nm`.
pub fn degenerate_poling_period(
    medium: &Medium<'_>,
    lambda_deg_nm: f64,
    temperature_c: f64,
) -> Result<f64> {
    let l = nm_to_um(lambda_deg_nm);
    let kp = medium.pump.wave_number(l / 2.0, temperature_c)?;
    let ks = medium.signal.wave_number(l, temperature_c)?;
    let ki = medium.idler.wave_number(l, temperature_c)?;
    let grating = ks + ki - kp;
    if grating <= 0.0 {
        return Err(Error::NonPositiveGrating(grating));
    }
    Ok(2.0 * PI / grating)
}

/// Source designed for degenerate GVM1 emission at a reference temperature:
/// pump at half the GVM1 wavelength and the matching poling period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegenerateDesign {
    pub reference_temperature_c: f64,
    pub lambda_deg_nm: f64,
    pub lambda_p_nm: f64,
    pub poling_period_um: f64,
}

impl DegenerateDesign {
    pub fn at_gvm1(medium: &Medium<'_>, reference_temperature_c: f64) -> Result<Self> {
        let gvm = gvm1_wavelength(medium, reference_temperature_c)?;
        let period = degenerate_poling_period(medium, gvm.lambda_deg_nm, reference_temperature_c)?;
        Ok(Self {
            reference_temperature_c,
            lambda_deg_nm: gvm.lambda_deg_nm,
            lambda_p_nm: gvm.lambda_deg_nm / 2.0,
            poling_period_um: period,
        })
    }

    pub fn spec_at(&self, temperature_c: f64) -> Result<PhaseMatchSpec> {
        PhaseMatchSpec::new(self.lambda_p_nm, self.poling_period_um, temperature_c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMatchedPair {
    /// Wavelength of the photon polarized along the signal axis, nm.
    pub signal_nm: f64,
    pub idler_nm: f64,
    /// Δk at the returned pair, rad/µm.
    pub residual: f64,
}

/// Search window for [`phase_matched_pair`], relative to degeneracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSearch {
    pub half_width_nm: f64,
    pub step_nm: f64,
}

impl Default for PairSearch {
    fn default() -> Self {
        Self {
            half_width_nm: 300.0,
            step_nm: 0.05,
        }
    }
}

pub const PHASE_MATCH_TOLERANCE: f64 = 1e-9;

/// Idler wavelength fixed by energy conservation, nm.
#[inline]
pub fn energy_partner_nm(lambda_p_nm: f64, signal_nm: f64) -> f64 {
    1.0 / (1.0 / lambda_p_nm - 1.0 / signal_nm)
}

pub fn phase_matched_pair(medium: &Medium<'_>, spec: &PhaseMatchSpec) -> Result<PhaseMatchedPair> {
    phase_matched_pair_in(medium, spec, PairSearch::default())
}

/// Solves Δk(λs, λi(λs)) = 0 for the signal wavelength, λi eliminated through
/// energy conservation. Returns the root closest to degeneracy.
pub fn phase_matched_pair_in(
    medium: &Medium<'_>,
    spec: &PhaseMatchSpec,
    search: PairSearch,
) -> Result<PhaseMatchedPair> {
    let spec = PhaseMatchSpec::new(spec.lambda_p_nm, spec.poling_period_um, spec.temperature_c)?;
    let lp = spec.lambda_p_nm;
    let deg = spec.degenerate_nm();
    let dk = |ls: f64| phase_mismatch(medium, &spec, ls, energy_partner_nm(lp, ls));

    let at_deg = dk(deg)?;
    if at_deg.abs() < PHASE_MATCH_TOLERANCE {
        return Ok(PhaseMatchedPair {
            signal_nm: deg,
            idler_nm: deg,
            residual: at_deg,
        });
    }

    let (lo, hi) = signal_window(medium, lp, deg, search.half_width_nm);
    let scan = roots::scan(dk, lo, hi, search.step_nm)?;
    let nearest = scan
        .brackets
        .iter()
        .min_by(|a, b| {
            let da = (0.5 * (a.lo + a.hi) - deg).abs();
            let db = (0.5 * (b.lo + b.hi) - deg).abs();
            da.total_cmp(&db)
        })
        .copied()
        .ok_or(Error::NoPhaseMatch {
            lo_nm: lo,
            hi_nm: hi,
            min_abs_mismatch: scan.min_abs.min(at_deg.abs()),
        })?;
    let signal = roots::bisect(dk, nearest, 0.0)?;
    Ok(PhaseMatchedPair {
        signal_nm: signal,
        idler_nm: energy_partner_nm(lp, signal),
        residual: dk(signal)?,
    })
}

/// Signal-wavelength window, clipped so both photons stay inside their models.
fn signal_window(medium: &Medium<'_>, lp: f64, deg: f64, half: f64) -> (f64, f64) {
    let (s_lo, s_hi) = medium.signal.lambda_range;
    let (i_lo, i_hi) = medium.idler.lambda_range;
    let mut lo = (deg - half).max(um_to_nm(s_lo));
    let mut hi = (deg + half).min(um_to_nm(s_hi));
    // λi decreases with λs: λi ≤ i_hi ⇔ λs ≥ partner(i_hi), λi ≥ i_lo ⇔ λs ≤ partner(i_lo).
    lo = lo.max(energy_partner_nm(lp, um_to_nm(i_hi)) + 1e-9);
    if um_to_nm(i_lo) > lp {
        hi = hi.min(energy_partner_nm(lp, um_to_nm(i_lo)) - 1e-9);
    }
    // Stay clear of λs → λp where λi diverges.
    lo = lo.max(lp * 1.0001);
    (lo, hi)
}

/// Quantity swept by [`scan_over_temperature`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ScanCondition {
    Gvm(GvmCondition),
    /// Phase-matched pair with pump and period fixed at the degenerate GVM1
    /// design of the reference temperature.
    PhaseMatch {
        reference_temperature_c: f64,
    },
}

impl ScanCondition {
    pub fn label(&self) -> &'static str {
        match self {
            ScanCondition::Gvm(c) => c.label(),
            ScanCondition::PhaseMatch { .. } => "phase-match",
        }
    }
}

/// Evenly spaced temperatures, inclusive of both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemperatureSweep {
    pub lo_c: f64,
    pub hi_c: f64,
    pub steps: usize,
}

impl TemperatureSweep {
    pub fn new(lo_c: f64, hi_c: f64, steps: usize) -> Result<Self> {
        if steps < 2 {
            return Err(Error::invalid(format!(
                "a sweep needs at least 2 steps, got {steps}"
            )));
        }
        if !(lo_c.is_finite() && hi_c.is_finite() && lo_c < hi_c) {
            return Err(Error::invalid(format!(
                "temperature sweep [{lo_c}, {hi_c}] must be increasing"
            )));
        }
        Ok(Self { lo_c, hi_c, steps })
    }

    pub fn temperatures(&self) -> Vec<f64> {
        let n = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| {
                if k + 1 == self.steps {
                    self.hi_c
                } else {
                    self.lo_c + (self.hi_c - self.lo_c) * k as f64 / n
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub temperature_c: f64,
    pub values_nm: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanTable {
    pub crystal: CrystalId,
    pub condition: ScanCondition,
    pub columns: Vec<String>,
    pub rows: Vec<ScanRow>,
    /// Set for phase-matching scans.
    pub design: Option<DegenerateDesign>,
}

impl ScanTable {
    /// Column `col` of every row.
    pub fn column(&self, col: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.values_nm[col]).collect()
    }

    /// First minus last value of a column (the λ(T_lo) − λ(T_hi) convention).
    pub fn endpoint_shift(&self, col: usize) -> f64 {
        let first = self.rows.first().map_or(f64::NAN, |r| r.values_nm[col]);
        let last = self.rows.last().map_or(f64::NAN, |r| r.values_nm[col]);
        first - last
    }

    /// CSV with `temperature_c` (3 decimals) then nm columns (4 decimals).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("temperature_c");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!("{:.3}", row.temperature_c));
            for v in &row.values_nm {
                out.push_str(&format!(",{v:.4}"));
            }
            out.push('\n');
        }
        out
    }
}

pub fn scan_over_temperature(
    medium: &Medium<'_>,
    condition: ScanCondition,
    sweep: TemperatureSweep,
) -> Result<ScanTable> {
    let sweep = TemperatureSweep::new(sweep.lo_c, sweep.hi_c, sweep.steps)?;
    let temps = sweep.temperatures();
    let (columns, design) = match condition {
        ScanCondition::Gvm(c) => (
            vec![format!("lambda_{}_nm", c.label().replace('-', "_"))],
            None,
        ),
        ScanCondition::PhaseMatch {
            reference_temperature_c,
        } => {
            let design = DegenerateDesign::at_gvm1(medium, reference_temperature_c)?;
            (
                vec!["lambda_signal_nm".to_owned(), "lambda_idler_nm".to_owned()],
                Some(design),
            )
        }
    };

    let solve = |t: f64| -> Result<ScanRow> {
        let values_nm = match (condition, design) {
            (ScanCondition::Gvm(c), _) => {
                vec![solve_gvm(medium, c, t, c.default_window())?.lambda_deg_nm]
            }
            (ScanCondition::PhaseMatch { .. }, Some(d)) => {
                let pair = phase_matched_pair(medium, &d.spec_at(t)?)?;
                vec![pair.signal_nm, pair.idler_nm]
            }
            (ScanCondition::PhaseMatch { .. }, None) => unreachable!("design computed above"),
        };
        Ok(ScanRow {
            temperature_c: t,
            values_nm,
        })
    };

    let rows = temps
        .par_iter()
        .map(|&t| {
            solve(t).map_err(|e| Error::ScanFailed {
                temperature_c: t,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ScanTable {
        crystal: medium.crystal,
        condition,
        columns,
        rows,
        design,
    })
}
