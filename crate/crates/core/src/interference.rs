//! Hong-Ou-Mandel coincidence probability p(τ) of a joint spectral amplitude
//! and the visibility / dip-count metrics of a delay trace.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::biphoton::{JointSpectralAmplitude, JsaProvenance};
use crate::error::{Error, Result};
use crate::units::FS_PER_S;

/// p(τ) = ½ − ½·Re Σ f(ω_s,ω_i)·f*(ω_i,ω_s)·e^{−i(ω_s−ω_i)τ}·Δω².
///
/// On a square grid ω_s − ω_i = (a − b)·Δω, so the double sum collapses to
/// one over the index difference d = a − b with weights G[d].
#[derive(Debug, Clone)]
pub struct HomKernel {
    n: usize,
    d_omega: f64,
    /// G[d + n − 1] = Σ_{a−b=d} f(a,b)·f*(b,a)·Δω²
    weights: Vec<Complex64>,
}

impl HomKernel {
    pub fn new(jsa: &JointSpectralAmplitude) -> Result<Self> {
        if !jsa.normalized {
            return Err(Error::NotNormalized);
        }
        if !jsa.grid.is_square_symmetric() {
            return Err(Error::GridMismatch);
        }
        let n = jsa.grid.n_s();
        let d_omega = jsa.grid.d_omega_s();
        let area = d_omega * d_omega;
        let weights = (0..2 * n - 1)
            .into_par_iter()
            .map(|k| {
                let d = k as isize - (n as isize - 1);
                let a0 = d.max(0) as usize;
                let mut acc = Complex64::new(0.0, 0.0);
                for a in a0..n.min((n as isize + d) as usize) {
                    let b = (a as isize - d) as usize;
                    acc += jsa.at(a, b) * jsa.at(b, a).conj();
                }
                acc * area
            })
            .collect();
        Ok(Self {
            n,
            d_omega,
            weights,
        })
    }

    /// Coincidence probability at delay `tau` (s).
    pub fn probability(&self, tau: f64) -> f64 {
        let phase_step = -self.d_omega * tau;
        let mut acc = 0.0;
        for (k, w) in self.weights.iter().enumerate() {
            let d = k as f64 - (self.n as f64 - 1.0);
            let (s, c) = (phase_step * d).sin_cos();
            acc += w.re * c - w.im * s;
        }
        clamp_unit(0.5 - 0.5 * acc)
    }

    /// Delay at which the discrete sum repeats itself, 2π/Δω (s).
    pub fn alias_period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.d_omega
    }
}

fn clamp_unit(p: f64) -> f64 {
    if (-1e-9..0.0).contains(&p) {
        0.0
    } else if p > 1.0 && p <= 1.0 + 1e-9 {
        1.0
    } else {
        p
    }
}

pub fn hom_probability(jsa: &JointSpectralAmplitude, tau: f64) -> Result<f64> {
    Ok(HomKernel::new(jsa)?.probability(tau))
}

/// Dip threshold below the baseline.
pub const DIP_EPSILON: f64 = 0.01;
pub const DEFAULT_TAU_STEPS: usize = 513;
pub const MIN_TAU_STEPS: usize = 64;

/// Default delay window: 20 pump coherence times, 20/σ_p (s).
pub fn default_tau_max(sigma_p: f64) -> f64 {
    20.0 / sigma_p
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomTrace {
    /// Delays, s.
    pub tau: Vec<f64>,
    pub p: Vec<f64>,
    pub visibility: f64,
    pub dip_count: usize,
    pub baseline: f64,
    pub provenance: Option<JsaProvenance>,
}

fn symmetric_delays(tau_max: f64, steps: usize) -> Vec<f64> {
    let mid = steps / 2;
    let mut tau = vec![0.0; steps];
    for k in 0..mid {
        let t = -tau_max + 2.0 * tau_max * k as f64 / (steps - 1) as f64;
        tau[k] = t;
        tau[steps - 1 - k] = -t;
    }
    tau
}

pub fn hom_trace(jsa: &JointSpectralAmplitude, tau_max: f64, steps: usize) -> Result<HomTrace> {
    if steps < MIN_TAU_STEPS || steps.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "delay steps must be odd and at least {MIN_TAU_STEPS}, got {steps}"
        )));
    }
    if !(tau_max.is_finite() && tau_max > 0.0) {
        return Err(Error::invalid(format!(
            "delay window must be positive, got {tau_max} s"
        )));
    }
    let kernel = HomKernel::new(jsa)?;
    let tau = symmetric_delays(tau_max, steps);
    let p: Vec<f64> = tau.par_iter().map(|&t| kernel.probability(t)).collect();
    let baseline = baseline(&tau, &p);
    Ok(HomTrace {
        visibility: visibility(&p),
        dip_count: count_dips(&p, baseline),
        baseline,
        tau,
        p,
        provenance: jsa.provenance.clone(),
    })
}

/// (P_max − P_min)/(P_max + P_min) over all samples.
pub fn visibility(p: &[f64]) -> f64 {
    let max = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = p.iter().copied().fold(f64::INFINITY, f64::min);
    if p.is_empty() || max + min <= 0.0 {
        return 0.0;
    }
    (max - min) / (max + min)
}

/// Mean of p over the outer 10% of the delay window, |τ| ≥ 0.9·τ_max.
pub fn baseline(tau: &[f64], p: &[f64]) -> f64 {
    let tau_max = tau.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let (sum, n) = tau
        .iter()
        .zip(p)
        .filter(|(t, _)| t.abs() >= 0.9 * tau_max)
        .fold((0.0, 0usize), |(s, n), (_, &v)| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// Interior local minima deeper than `baseline − DIP_EPSILON`; a flat run of
/// equal samples counts once.
pub fn count_dips(p: &[f64], baseline: f64) -> usize {
    let mut count = 0;
    let mut k = 1;
    while k + 1 < p.len() {
        let mut end = k;
        while end + 1 < p.len() && p[end + 1] == p[k] {
            end += 1;
        }
        if end + 1 < p.len()
            && p[k - 1] > p[k]
            && p[end + 1] > p[k]
            && p[k] < baseline - DIP_EPSILON
        {
            count += 1;
        }
        k = end + 1;
    }
    count
}

impl HomTrace {
    /// `tau_fs,p` rows after `#` metadata lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# visibility: {:.6}", self.visibility);
        let _ = writeln!(out, "# dip_count: {}", self.dip_count);
        let _ = writeln!(out, "# baseline: {:.9}", self.baseline);
        if let Some(p) = &self.provenance {
            let _ = writeln!(out, "# crystal: {}", p.crystal);
            let _ = writeln!(out, "# sources: {}", p.sources.join(", "));
            let _ = writeln!(out, "# temperature_c: {}", p.geometry.temperature_c);
            let _ = writeln!(out, "# poling_period_um: {}", p.geometry.poling_period_um);
            let _ = writeln!(out, "# length_mm: {}", p.geometry.length_mm);
            let _ = writeln!(out, "# lambda_p_nm: {}", p.pump.lambda_p_nm);
            let _ = writeln!(out, "# fwhm_nm: {}", p.pump.fwhm_nm);
        }
        out.push_str("tau_fs,p\n");
        for (t, p) in self.tau.iter().zip(&self.p) {
            let _ = writeln!(out, "{:.3},{:.9}", t * FS_PER_S, p);
        }
        out
    }
}
