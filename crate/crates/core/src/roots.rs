//! Grid scan + bisection. Grid points are computed as `lo + k·step` (no
//! running sums) so every call visits bit-identical abscissae.

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Scan {
    pub brackets: Vec<Bracket>,
    pub min_abs: f64,
}

pub(crate) fn scan<F>(mut f: F, lo: f64, hi: f64, step: f64) -> Result<Scan>
where
    F: FnMut(f64) -> Result<f64>,
{
    let n = ((hi - lo) / step).ceil().max(1.0) as usize;
    let x_at = |k: usize| if k == n { hi } else { lo + k as f64 * step };

    let mut brackets = Vec::new();
    let mut x_prev = lo;
    let mut f_prev = f(lo)?;
    let mut min_abs = f_prev.abs();
    for k in 1..=n {
        let x = x_at(k);
        let fx = f(x)?;
        min_abs = min_abs.min(fx.abs());
        // An exact zero on a grid point is attributed to the interval ending there.
        let crosses = (f_prev < 0.0 && fx >= 0.0) || (f_prev > 0.0 && fx <= 0.0);
        if crosses || (k == 1 && f_prev == 0.0) {
            brackets.push(Bracket {
                lo: x_prev,
                hi: x,
                f_lo: f_prev,
                f_hi: fx,
            });
        }
        x_prev = x;
        f_prev = fx;
    }
    Ok(Scan { brackets, min_abs })
}

/// Bisects a sign-change bracket until its width drops below `xtol` or the
/// midpoint is no longer representable.
pub(crate) fn bisect<F>(mut f: F, b: Bracket, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if b.f_lo == 0.0 {
        return Ok(b.lo);
    }
    if b.f_hi == 0.0 {
        return Ok(b.hi);
    }
    let (mut a, mut c, mut fa) = (b.lo, b.hi, b.f_lo);
    for _ in 0..200 {
        let m = 0.5 * (a + c);
        if m <= a || m >= c || (c - a) <= xtol {
            break;
        }
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            c = m;
        }
    }
    Ok(0.5 * (a + c))
}
