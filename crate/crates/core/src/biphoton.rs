//! Joint spectral amplitude on a discrete frequency grid and the spectral
//! purity of the heralded photon.

use std::f64::consts::{LN_2, PI};
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersion::CrystalId;
use crate::error::{Error, Result};
use crate::matching::{phase_mismatch, Medium, PhaseMatchSpec};
use crate::units::{nm_from_omega, omega_from_nm, SPEED_OF_LIGHT};

/// Pump central wavelength and intensity FWHM, both nm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpSpec {
    pub lambda_p_nm: f64,
    pub fwhm_nm: f64,
}

impl PumpSpec {
    pub fn new(lambda_p_nm: f64, fwhm_nm: f64) -> Result<Self> {
        if !(lambda_p_nm.is_finite() && lambda_p_nm > 0.0) {
            return Err(Error::invalid(format!("pump wavelength {lambda_p_nm} nm")));
        }
        sigma_from_fwhm(lambda_p_nm, fwhm_nm)?;
        Ok(Self {
            lambda_p_nm,
            fwhm_nm,
        })
    }

    pub fn omega_p(&self) -> f64 {
        omega_from_nm(self.lambda_p_nm)
    }

    /// Amplitude width of the Gaussian envelope, rad/s.
    pub fn sigma_p(&self) -> f64 {
        sigma_from_fwhm(self.lambda_p_nm, self.fwhm_nm).expect("validated on construction")
    }
}

/// Converts an intensity FWHM in nm to the amplitude width σ_p (rad/s) of
/// exp(−(Δω/σ_p)²).
pub fn sigma_from_fwhm(lambda_p_nm: f64, fwhm_nm: f64) -> Result<f64> {
    if !(fwhm_nm.is_finite() && fwhm_nm > 0.0) {
        return Err(Error::invalid(format!(
            "pump FWHM must be positive, got {fwhm_nm} nm"
        )));
    }
    if fwhm_nm >= 0.1 * lambda_p_nm {
        return Err(Error::invalid(format!(
            "pump FWHM {fwhm_nm} nm is not small against {lambda_p_nm} nm"
        )));
    }
    let lambda_m = lambda_p_nm * 1e-9;
    let d_omega = 2.0 * PI * SPEED_OF_LIGHT * fwhm_nm * 1e-9 / (lambda_m * lambda_m);
    Ok(d_omega / (2.0 * LN_2).sqrt())
}

pub fn pump_envelope(omega_s: f64, omega_i: f64, pump: &PumpSpec) -> f64 {
    let x = (omega_s + omega_i - pump.omega_p()) / pump.sigma_p();
    (-x * x).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrystalGeometry {
    pub length_mm: f64,
    pub poling_period_um: f64,
    pub temperature_c: f64,
}

impl CrystalGeometry {
    pub fn new(length_mm: f64, poling_period_um: f64, temperature_c: f64) -> Result<Self> {
        if !(length_mm.is_finite() && length_mm > 0.0) {
            return Err(Error::invalid(format!(
                "crystal length must be positive, got {length_mm} mm"
            )));
        }
        PhaseMatchSpec::new(1000.0, poling_period_um, temperature_c)?;
        Ok(Self {
            length_mm,
            poling_period_um,
            temperature_c,
        })
    }
}

#[inline]
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// sinc(ΔkL/2), with the pump wave number taken at ω_s + ω_i.
pub fn pm_amplitude(
    medium: &Medium<'_>,
    omega_s: f64,
    omega_i: f64,
    geometry: &CrystalGeometry,
) -> Result<f64> {
    let spec = PhaseMatchSpec::new(
        nm_from_omega(omega_s + omega_i),
        geometry.poling_period_um,
        geometry.temperature_c,
    )?;
    let dk = phase_mismatch(
        medium,
        &spec,
        nm_from_omega(omega_s),
        nm_from_omega(omega_i),
    )?;
    Ok(sinc(dk * geometry.length_mm * 1000.0 / 2.0))
}

/// Uniform angular-frequency axes (rad/s) for signal and idler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    pub omega_s: Vec<f64>,
    pub omega_i: Vec<f64>,
}

pub const MIN_GRID_POINTS: usize = 16;

fn uniform_axis(center: f64, half_span: f64, n: usize) -> Vec<f64> {
    let lo = center - half_span;
    let step = 2.0 * half_span / (n - 1) as f64;
    (0..n)
        .map(|k| {
            if k + 1 == n {
                center + half_span
            } else {
                lo + k as f64 * step
            }
        })
        .collect()
}

fn check_axis(axis: &[f64], name: &str) -> Result<()> {
    if axis.len() < MIN_GRID_POINTS {
        return Err(Error::invalid(format!(
            "{name} axis has {} points; at least {MIN_GRID_POINTS} required",
            axis.len()
        )));
    }
    if axis.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::invalid(format!(
            "{name} axis has non-positive frequencies"
        )));
    }
    let step = (axis[axis.len() - 1] - axis[0]) / (axis.len() - 1) as f64;
    if step.is_nan() || step <= 0.0 {
        return Err(Error::invalid(format!("{name} axis is not increasing")));
    }
    for w in axis.windows(2) {
        let d = w[1] - w[0];
        if d.is_nan() || d <= 0.0 || (d - step).abs() > 1e-6 * step {
            return Err(Error::invalid(format!(
                "{name} axis is not uniformly spaced"
            )));
        }
    }
    Ok(())
}

impl SpectralGrid {
    pub fn new(omega_s: Vec<f64>, omega_i: Vec<f64>) -> Result<Self> {
        check_axis(&omega_s, "signal")?;
        check_axis(&omega_i, "idler")?;
        Ok(Self { omega_s, omega_i })
    }

    /// Square grid with identical axes, `n` points spanning center ± half_span.
    pub fn symmetric(center: f64, half_span: f64, n: usize) -> Result<Self> {
        if n < MIN_GRID_POINTS {
            return Err(Error::invalid(format!(
                "grid of {n} points; at least {MIN_GRID_POINTS} required"
            )));
        }
        if !(half_span > 0.0 && half_span < center) {
            return Err(Error::invalid(format!("grid half-span {half_span} rad/s")));
        }
        let axis = uniform_axis(center, half_span, n);
        Self::new(axis.clone(), axis)
    }

    pub fn n_s(&self) -> usize {
        self.omega_s.len()
    }

    pub fn n_i(&self) -> usize {
        self.omega_i.len()
    }

    pub fn d_omega_s(&self) -> f64 {
        step(&self.omega_s)
    }

    pub fn d_omega_i(&self) -> f64 {
        step(&self.omega_i)
    }

    pub fn is_square_symmetric(&self) -> bool {
        self.omega_s == self.omega_i
    }

    pub fn transposed(&self) -> Self {
        Self {
            omega_s: self.omega_i.clone(),
            omega_i: self.omega_s.clone(),
        }
    }

    pub fn signal_nm(&self) -> Vec<f64> {
        self.omega_s.iter().map(|&w| nm_from_omega(w)).collect()
    }

    pub fn idler_nm(&self) -> Vec<f64> {
        self.omega_i.iter().map(|&w| nm_from_omega(w)).collect()
    }

    /// (shortest, longest) wavelength on each axis, nm.
    pub fn nm_ranges(&self) -> ((f64, f64), (f64, f64)) {
        let r = |a: &[f64]| (nm_from_omega(a[a.len() - 1]), nm_from_omega(a[0]));
        (r(&self.omega_s), r(&self.omega_i))
    }
}

fn step(axis: &[f64]) -> f64 {
    (axis[axis.len() - 1] - axis[0]) / (axis.len() - 1) as f64
}

/// Inputs a computed JSA was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsaProvenance {
    pub crystal: CrystalId,
    pub sources: Vec<String>,
    pub geometry: CrystalGeometry,
    pub pump: PumpSpec,
    pub sigma_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointSpectralAmplitude {
    pub grid: SpectralGrid,
    /// Row-major, `n_s` rows of `n_i` values.
    pub values: Vec<Complex64>,
    pub normalized: bool,
    pub provenance: Option<JsaProvenance>,
}

/// Boundary |f| above this fraction of the peak counts as clipping.
pub const CLIP_RATIO: f64 = 0.01;

impl JointSpectralAmplitude {
    pub fn from_values(grid: SpectralGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_s() * grid.n_i() {
            return Err(Error::invalid(format!(
                "{} values for a {}x{} grid",
                values.len(),
                grid.n_s(),
                grid.n_i()
            )));
        }
        Ok(Self {
            grid,
            values,
            normalized: false,
            provenance: None,
        })
    }

    /// Samples `f(ω_s, ω_i)` on the grid without normalizing.
    pub fn from_fn<F>(grid: SpectralGrid, f: F) -> Self
    where
        F: Fn(f64, f64) -> Complex64 + Sync,
    {
        let n_i = grid.n_i();
        let mut values = vec![Complex64::new(0.0, 0.0); grid.n_s() * n_i];
        values
            .par_chunks_mut(n_i)
            .zip(grid.omega_s.par_iter())
            .for_each(|(row, &ws)| {
                for (v, &wi) in row.iter_mut().zip(&grid.omega_i) {
                    *v = f(ws, wi);
                }
            });
        Self {
            grid,
            values,
            normalized: false,
            provenance: None,
        }
    }

    #[inline]
    pub fn at(&self, s: usize, i: usize) -> Complex64 {
        self.values[s * self.grid.n_i() + i]
    }

    /// Σ|f|²·Δω_s·Δω_i
    pub fn norm_squared(&self) -> f64 {
        let sum: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        sum * self.grid.d_omega_s() * self.grid.d_omega_i()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n2 = self.norm_squared();
        if !(n2.is_finite() && n2 > 0.0) {
            return Err(Error::invalid("cannot normalize a vanishing amplitude"));
        }
        let scale = 1.0 / n2.sqrt();
        self.values.iter_mut().for_each(|v| *v *= scale);
        self.normalized = true;
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// Signal and idler relabelled: f'(ω_s, ω_i) = f(ω_i, ω_s).
    pub fn transposed(&self) -> Self {
        let (ns, ni) = (self.grid.n_s(), self.grid.n_i());
        let mut values = Vec::with_capacity(ns * ni);
        for i in 0..ni {
            for s in 0..ns {
                values.push(self.at(s, i));
            }
        }
        Self {
            grid: self.grid.transposed(),
            values,
            normalized: self.normalized,
            provenance: self.provenance.clone(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest boundary |f| relative to the peak.
    pub fn boundary_ratio(&self) -> f64 {
        let (ns, ni) = (self.grid.n_s(), self.grid.n_i());
        let mut edge = 0.0f64;
        for s in 0..ns {
            edge = edge
                .max(self.at(s, 0).norm())
                .max(self.at(s, ni - 1).norm());
        }
        for i in 0..ni {
            edge = edge
                .max(self.at(0, i).norm())
                .max(self.at(ns - 1, i).norm());
        }
        let peak = self.max_abs();
        if peak > 0.0 {
            edge / peak
        } else {
            0.0
        }
    }

    /// Grid indices of the largest |f|; the first one in row-major order on ties.
    pub fn peak_index(&self) -> (usize, usize) {
        let mut best = (0, 0.0f64);
        for (k, v) in self.values.iter().enumerate() {
            let a = v.norm_sqr();
            if a > best.1 {
                best = (k, a);
            }
        }
        (best.0 / self.grid.n_i(), best.0 % self.grid.n_i())
    }

    /// (signal, idler) wavelengths of the peak, nm.
    pub fn peak_nm(&self) -> (f64, f64) {
        let (s, i) = self.peak_index();
        (
            nm_from_omega(self.grid.omega_s[s]),
            nm_from_omega(self.grid.omega_i[i]),
        )
    }

    fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    /// |f|² matrix preceded by `#` metadata lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if let Some(p) = &self.provenance {
            let _ = writeln!(out, "# crystal: {}", p.crystal);
            let _ = writeln!(out, "# sources: {}", p.sources.join(", "));
            let _ = writeln!(out, "# temperature_c: {}", p.geometry.temperature_c);
            let _ = writeln!(out, "# poling_period_um: {}", p.geometry.poling_period_um);
            let _ = writeln!(out, "# length_mm: {}", p.geometry.length_mm);
            let _ = writeln!(out, "# lambda_p_nm: {}", p.pump.lambda_p_nm);
            let _ = writeln!(out, "# fwhm_nm: {}", p.pump.fwhm_nm);
        }
        let ((s_lo, s_hi), (i_lo, i_hi)) = self.grid.nm_ranges();
        let _ = writeln!(
            out,
            "# rows: signal, {} points, {s_hi} nm to {s_lo} nm",
            self.grid.n_s()
        );
        let _ = writeln!(
            out,
            "# columns: idler, {} points, {i_hi} nm to {i_lo} nm",
            self.grid.n_i()
        );
        let _ = writeln!(out, "# values: |f|^2, normalized: {}", self.normalized);
        let ni = self.grid.n_i();
        for row in self.values.chunks(ni) {
            for (k, v) in row.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{:.9e}", v.norm_sqr());
            }
            out.push('\n');
        }
        out
    }

    /// Metadata and axes as JSON, for a sidecar next to the CSV.
    pub fn sidecar_json(&self) -> String {
        #[derive(Serialize)]
        struct Sidecar<'a> {
            provenance: &'a Option<JsaProvenance>,
            normalized: bool,
            n_s: usize,
            n_i: usize,
            omega_s: &'a [f64],
            omega_i: &'a [f64],
            signal_nm: Vec<f64>,
            idler_nm: Vec<f64>,
        }
        let s = Sidecar {
            provenance: &self.provenance,
            normalized: self.normalized,
            n_s: self.grid.n_s(),
            n_i: self.grid.n_i(),
            omega_s: &self.grid.omega_s,
            omega_i: &self.grid.omega_i,
            signal_nm: self.grid.signal_nm(),
            idler_nm: self.grid.idler_nm(),
        };
        serde_json::to_string_pretty(&s).expect("plain data serializes")
    }
}

/// Pump envelope times phase-matching amplitude on `grid`, normalized.
pub fn compute_jsa(
    medium: &Medium<'_>,
    geometry: &CrystalGeometry,
    pump: &PumpSpec,
    grid: SpectralGrid,
) -> Result<JointSpectralAmplitude> {
    let n_i = grid.n_i();
    let mut values = vec![Complex64::new(0.0, 0.0); grid.n_s() * n_i];
    values
        .par_chunks_mut(n_i)
        .zip(grid.omega_s.par_iter())
        .try_for_each(|(row, &ws)| -> Result<()> {
            for (v, &wi) in row.iter_mut().zip(&grid.omega_i) {
                let a = pump_envelope(ws, wi, pump) * pm_amplitude(medium, ws, wi, geometry)?;
                *v = Complex64::new(a, 0.0);
            }
            Ok(())
        })?;
    let mut jsa = JointSpectralAmplitude::from_values(grid, values)?;
    jsa.provenance = Some(JsaProvenance {
        crystal: medium.crystal,
        sources: medium.sources().into_iter().map(String::from).collect(),
        geometry: *geometry,
        pump: *pump,
        sigma_p: pump.sigma_p(),
    });
    let ratio = jsa.boundary_ratio();
    if ratio > CLIP_RATIO {
        return Err(Error::GridClipped { ratio });
    }
    jsa.normalize()?;
    Ok(jsa)
}

pub const DEFAULT_GRID_POINTS: usize = 512;
const MAX_DOUBLINGS: usize = 16;

/// Like [`compute_jsa`] on an `n`×`n` grid centred on degeneracy, with the
/// half-span doubled from 4σ_p until the boundary is below 1% of the peak.
pub fn compute_jsa_auto(
    medium: &Medium<'_>,
    geometry: &CrystalGeometry,
    pump: &PumpSpec,
    n: usize,
) -> Result<JointSpectralAmplitude> {
    let center = pump.omega_p() / 2.0;
    let mut half = 4.0 * pump.sigma_p();
    let mut last = Error::GridClipped { ratio: f64::NAN };
    for _ in 0..MAX_DOUBLINGS {
        if half >= center {
            break;
        }
        let grid = SpectralGrid::symmetric(center, half, n)?;
        match compute_jsa(medium, geometry, pump, grid) {
            Err(e @ Error::GridClipped { .. }) => last = e,
            other => return other,
        }
        half *= 2.0;
    }
    Err(last)
}

/// Σs⁴/(Σs²)² over the singular values of the amplitude matrix.
pub fn schmidt_purity(jsa: &JointSpectralAmplitude) -> Result<f64> {
    if !jsa.normalized {
        return Err(Error::NotNormalized);
    }
    let (ns, ni) = (jsa.grid.n_s(), jsa.grid.n_i());
    let sv: Vec<f64> = if jsa.is_real() {
        let m = DMatrix::from_row_iterator(ns, ni, jsa.values.iter().map(|v| v.re));
        m.singular_values().iter().copied().collect()
    } else {
        let m = DMatrix::from_row_iterator(ns, ni, jsa.values.iter().copied());
        m.singular_values().iter().copied().collect()
    };
    let s2: f64 = sv.iter().map(|s| s * s).sum();
    let s4: f64 = sv.iter().map(|s| s.powi(4)).sum();
    Ok(s4 / (s2 * s2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpOptimum {
    pub fwhm_nm: f64,
    pub purity: f64,
}

/// Search range and resolution for [`optimize_pump_bandwidth`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthSearch {
    pub fwhm_lo_nm: f64,
    pub fwhm_hi_nm: f64,
    /// Stop when the bracket spans less than this factor.
    pub rel_tol: f64,
    pub grid_points: usize,
}

impl Default for BandwidthSearch {
    fn default() -> Self {
        Self {
            fwhm_lo_nm: 0.05,
            fwhm_hi_nm: 5.0,
            rel_tol: 1e-3,
            grid_points: 128,
        }
    }
}

/// Golden-section search of purity over the pump FWHM (log scale).
pub fn optimize_pump_bandwidth(
    medium: &Medium<'_>,
    geometry: &CrystalGeometry,
    lambda_p_nm: f64,
    search: BandwidthSearch,
) -> Result<PumpOptimum> {
    let purity_at = |ln_fwhm: f64| -> Result<f64> {
        let pump = PumpSpec::new(lambda_p_nm, ln_fwhm.exp())?;
        schmidt_purity(&compute_jsa_auto(
            medium,
            geometry,
            &pump,
            search.grid_points,
        )?)
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (search.fwhm_lo_nm.ln(), search.fwhm_hi_nm.ln());
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (purity_at(c)?, purity_at(d)?);
    while (b - a) > search.rel_tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = purity_at(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = purity_at(d)?;
        }
    }
    let (x, p) = if fc >= fd { (c, fc) } else { (d, fd) };
    Ok(PumpOptimum {
        fwhm_nm: x.exp(),
        purity: p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::{CoefficientDatabase, CrystalId};
    use crate::matching::DegenerateDesign;

    fn gaussian_grid(n: usize) -> SpectralGrid {
        SpectralGrid::symmetric(1.2e15, 1e13, n).unwrap()
    }

    fn gauss(w: f64, c: f64, s: f64) -> f64 {
        (-((w - c) / s).powi(2)).exp()
    }

    #[test]
    fn doubling_fwhm_doubles_sigma() {
        let a = sigma_from_fwhm(986.25, 0.87).unwrap();
        let b = sigma_from_fwhm(986.25, 1.74).unwrap();
        assert!((b / a - 2.0).abs() < 1e-15);
        assert!(sigma_from_fwhm(986.25, 0.0).is_err());
        assert!(sigma_from_fwhm(986.25, -1.0).is_err());
    }

    #[test]
    fn envelope_half_intensity_at_half_fwhm() {
        let pump = PumpSpec::new(986.25, 0.87).unwrap();
        let lp = pump.lambda_p_nm * 1e-9;
        let fwhm = 2.0 * PI * SPEED_OF_LIGHT * pump.fwhm_nm * 1e-9 / (lp * lp);
        let ws = pump.omega_p() / 2.0 + fwhm / 2.0;
        let a = pump_envelope(ws, pump.omega_p() / 2.0, &pump);
        assert!((a * a - 0.5).abs() < 1e-11, "{}", a * a);
    }

    #[test]
    fn half_max_located_numerically() {
        // Bisection on |α|² = 1/2 as an independent check of the conversion.
        let pump = PumpSpec::new(986.25, 0.87).unwrap();
        let wp = pump.omega_p();
        let i = |d: f64| pump_envelope(wp / 2.0 + d, wp / 2.0, &pump).powi(2) - 0.5;
        let (mut a, mut b) = (0.0, 10.0 * pump.sigma_p());
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if i(m) > 0.0 {
                a = m
            } else {
                b = m
            }
        }
        let fwhm_omega = 2.0 * a;
        let lp = 986.25e-9;
        let fwhm_nm = fwhm_omega * lp * lp / (2.0 * PI * SPEED_OF_LIGHT) * 1e9;
        assert!((fwhm_nm - 0.87).abs() < 1e-9, "{fwhm_nm}");
    }

    #[test]
    fn envelope_values() {
        let pump = PumpSpec::new(800.0, 1.0).unwrap();
        let wp = pump.omega_p();
        assert_eq!(pump_envelope(0.4 * wp, 0.6 * wp, &pump), 1.0);
        let s = pump.sigma_p();
        let e = pump_envelope(wp / 2.0 + s, wp / 2.0, &pump);
        assert!((e - (-1f64).exp()).abs() < 1e-11);
        assert_eq!(
            pump_envelope(0.3 * wp, 0.71 * wp, &pump),
            pump_envelope(0.71 * wp, 0.3 * wp, &pump)
        );
    }

    #[test]
    fn sinc_values() {
        assert_eq!(sinc(0.0), 1.0);
        assert!(sinc(PI).abs() < 1e-15);
        assert!((sinc(1e-9) - 1.0).abs() < 1e-17);
    }

    #[test]
    fn pm_amplitude_bounded_and_unity_at_design_point() {
        let db = CoefficientDatabase::bundled();
        let m = Medium::new(&db, CrystalId::Ktp).unwrap();
        let d = DegenerateDesign::at_gvm1(&m, 20.0).unwrap();
        let g = CrystalGeometry::new(30.0, d.poling_period_um, 20.0).unwrap();
        let w = omega_from_nm(d.lambda_deg_nm);
        assert!((pm_amplitude(&m, w, w, &g).unwrap() - 1.0).abs() < 1e-12);
        let grid = SpectralGrid::symmetric(w, 2e12, 64).unwrap();
        for &a in &grid.omega_s {
            for &b in &grid.omega_i {
                assert!(pm_amplitude(&m, a, b, &g).unwrap().abs() <= 1.0);
            }
        }
    }

    #[test]
    fn grid_validation() {
        assert!(SpectralGrid::symmetric(1e15, 1e12, 8).is_err());
        assert!(SpectralGrid::new(vec![1.0; 20], (1..=20).map(f64::from).collect()).is_err());
        let mut uneven: Vec<f64> = (1..=20).map(f64::from).collect();
        uneven[5] += 0.3;
        assert!(SpectralGrid::new(uneven.clone(), uneven).is_err());
        let g = gaussian_grid(33);
        assert_eq!(g.omega_s[16], 1.2e15);
        assert_eq!(g.omega_s[32], 1.2e15 + 1e13);
    }

    #[test]
    fn separable_fixture_is_pure() {
        let g = gaussian_grid(64);
        let jsa = JointSpectralAmplitude::from_fn(g, |a, b| {
            Complex64::new(gauss(a, 1.2e15, 2e12) * gauss(b, 1.201e15, 3e12), 0.0)
        })
        .normalized()
        .unwrap();
        assert!((jsa.norm_squared() - 1.0).abs() < 1e-10);
        assert!((schmidt_purity(&jsa).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn two_equal_schmidt_terms_give_half() {
        let g = gaussian_grid(32);
        let mut v = vec![Complex64::new(0.0, 0.0); 32 * 32];
        v[3 * 32 + 7] = Complex64::new(1.0, 0.0);
        v[11 * 32 + 20] = Complex64::new(0.0, -1.0);
        let jsa = JointSpectralAmplitude::from_values(g, v)
            .unwrap()
            .normalized()
            .unwrap();
        assert_eq!(schmidt_purity(&jsa).unwrap(), 0.5);
    }

    #[test]
    fn purity_requires_normalization() {
        let g = gaussian_grid(16);
        let jsa = JointSpectralAmplitude::from_fn(g, |_, _| Complex64::new(1.0, 0.0));
        assert!(matches!(schmidt_purity(&jsa), Err(Error::NotNormalized)));
    }

    /// Tr(ρ²)/Tr(ρ)² with ρ = F·Fᴴ, computed without an SVD.
    fn trace_purity(jsa: &JointSpectralAmplitude) -> f64 {
        let (ns, ni) = (jsa.grid.n_s(), jsa.grid.n_i());
        let f = DMatrix::from_row_iterator(ns, ni, jsa.values.iter().copied());
        let rho = &f * f.adjoint();
        let tr = rho.trace().re;
        (&rho * &rho).trace().re / (tr * tr)
    }

    #[test]
    fn purity_agrees_with_trace_formula() {
        let g = gaussian_grid(48);
        let jsa = JointSpectralAmplitude::from_fn(g, |a, b| {
            let x = (a - 1.2e15) / 3e12;
            let y = (b - 1.2e15) / 3e12;
            Complex64::from_polar(
                (-(x + 0.6 * y).powi(2) - 0.3 * (x - y).powi(2)).exp(),
                0.4 * x,
            )
        })
        .normalized()
        .unwrap();
        let p = schmidt_purity(&jsa).unwrap();
        assert!((p - trace_purity(&jsa)).abs() < 1e-10, "{p}");
        assert!(p < 0.99);
    }

    #[test]
    fn clipped_grid_is_rejected() {
        let db = CoefficientDatabase::bundled();
        let m = Medium::new(&db, CrystalId::Cta).unwrap();
        let d = DegenerateDesign::at_gvm1(&m, 20.0).unwrap();
        let g = CrystalGeometry::new(30.0, d.poling_period_um, 20.0).unwrap();
        let pump = PumpSpec::new(d.lambda_p_nm, 0.87).unwrap();
        let grid = SpectralGrid::symmetric(pump.omega_p() / 2.0, pump.sigma_p(), 32).unwrap();
        let err = compute_jsa(&m, &g, &pump, grid).unwrap_err();
        assert!(matches!(err, Error::GridClipped { .. }));
        assert!(err.is_domain_error());
    }

    #[test]
    fn auto_grid_contains_the_amplitude() {
        let db = CoefficientDatabase::bundled();
        let m = Medium::new(&db, CrystalId::Ktp).unwrap();
        let d = DegenerateDesign::at_gvm1(&m, 20.0).unwrap();
        let g = CrystalGeometry::new(30.0, d.poling_period_um, 20.0).unwrap();
        let pump = PumpSpec::new(d.lambda_p_nm, 0.87).unwrap();
        let jsa = compute_jsa_auto(&m, &g, &pump, 128).unwrap();
        assert!(jsa.boundary_ratio() <= CLIP_RATIO);
        assert!((jsa.norm_squared() - 1.0).abs() < 1e-10);
        let (s, i) = jsa.peak_nm();
        assert!((s - d.lambda_deg_nm).abs() < 1.0 && (i - d.lambda_deg_nm).abs() < 1.0);
        let p = jsa.provenance.as_ref().unwrap();
        assert_eq!(p.crystal, CrystalId::Ktp);
        assert_eq!(p.sources, vec!["emanueli2003"]);
    }

    #[test]
    fn csv_and_sidecar() {
        let g = gaussian_grid(16);
        let jsa = JointSpectralAmplitude::from_fn(g, |a, b| {
            Complex64::new(gauss(a, 1.2e15, 3e12) * gauss(b, 1.2e15, 3e12), 0.0)
        })
        .normalized()
        .unwrap();
        let csv = jsa.to_csv();
        let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows.len(), 16);
        assert!(rows.iter().all(|r| r.split(',').count() == 16));
        let side: serde_json::Value = serde_json::from_str(&jsa.sidecar_json()).unwrap();
        let back: Vec<f64> = serde_json::from_value(side["omega_s"].clone()).unwrap();
        assert_eq!(back, jsa.grid.omega_s);
    }
}
