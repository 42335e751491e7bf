//! Adaptive Dormand-Prince 5(4) integration of autonomous matrix ODEs.

use crate::error::{Error, Result};
use crate::hilbert::{CMatrix, C64};

const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-13, max_steps: 2_000_000 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    /// Largest normalized local error among accepted steps.
    pub max_error: f64,
}

fn error_norm(err: &CMatrix, y0: &CMatrix, y1: &CMatrix, opts: &OdeOptions) -> f64 {
    let mut acc = 0.0;
    for ((e, a), b) in err.iter().zip(y0.iter()).zip(y1.iter()) {
        let scale = opts.atol + opts.rtol * a.norm().max(b.norm());
        acc += (e.norm() / scale).powi(2);
    }
    (acc / err.len().max(1) as f64).sqrt()
}

/// Integrate `y' = f(y)` from `y0` over a duration `t`.
pub fn integrate<F>(f: F, y0: &CMatrix, t: f64, opts: &OdeOptions) -> Result<(CMatrix, OdeStats)>
where
    F: Fn(&CMatrix) -> CMatrix,
{
    let mut stats = OdeStats::default();
    if t == 0.0 {
        return Ok((y0.clone(), stats));
    }
    let mut y = y0.clone();
    let mut k1 = f(&y);
    let scale = y.iter().map(|z| z.norm()).fold(0.0, f64::max).max(opts.atol);
    let rate = k1.iter().map(|z| z.norm()).fold(0.0, f64::max) / scale;
    let mut h = if rate > 0.0 { (0.01 / rate).min(t) } else { t };
    let mut done = 0.0;
    let mut last_err = 0.0;
    while done < t {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::Tolerance { time: done, achieved: last_err * opts.rtol });
        }
        let remaining = t - done;
        let last = h >= remaining;
        let step = if last { remaining } else { h };
        let mut k: Vec<CMatrix> = Vec::with_capacity(7);
        k.push(k1.clone());
        for (s, row) in A.iter().enumerate().skip(1) {
            let mut arg = y.clone();
            for (j, &a) in row.iter().enumerate().take(s) {
                if a != 0.0 {
                    arg += &k[j] * C64::new(step * a, 0.0);
                }
            }
            k.push(f(&arg));
        }
        let mut y_new = y.clone();
        for (j, &b) in A[6].iter().enumerate() {
            if b != 0.0 {
                y_new += &k[j] * C64::new(step * b, 0.0);
            }
        }
        let mut err = CMatrix::zeros(y.nrows(), y.ncols());
        for (j, &e) in E.iter().enumerate() {
            if e != 0.0 {
                err += &k[j] * C64::new(step * e, 0.0);
            }
        }
        let norm = error_norm(&err, &y, &y_new, opts);
        if !norm.is_finite() {
            return Err(Error::Tolerance { time: done, achieved: f64::INFINITY });
        }
        last_err = norm;
        if norm <= 1.0 {
            stats.accepted += 1;
            stats.max_error = stats.max_error.max(norm);
            done = if last { t } else { done + step };
            y = y_new;
            k1 = k.pop().expect("seven stages");
        } else {
            stats.rejected += 1;
        }
        let factor = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
        h = step * factor;
        if done < t && h < t * 1e-14 {
            return Err(Error::Tolerance { time: done, achieved: norm * opts.rtol });
        }
    }
    Ok((y, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_oscillator() {
        let w = 3.0;
        let y0 = CMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        let (y, stats) = integrate(|y| y * C64::new(0.0, -w), &y0, 2.0, &OdeOptions::default()).unwrap();
        let exact = C64::new(0.0, -w * 2.0).exp();
        assert!((y[(0, 0)] - exact).norm() < 1e-9);
        assert!(stats.accepted > 0);
    }

    #[test]
    fn damped_mode() {
        let y0 = CMatrix::from_element(2, 1, C64::new(1.0, 0.0));
        let (y, _) =
            integrate(|y| y * C64::new(-0.5, 10.0), &y0, 1.0, &OdeOptions::default()).unwrap();
        let exact = C64::new(-0.5, 10.0).exp();
        assert!((y[(1, 0)] - exact).norm() < 1e-9);
    }

    #[test]
    fn step_budget_is_reported() {
        let y0 = CMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        let opts = OdeOptions { max_steps: 3, ..Default::default() };
        let err = integrate(|y| y * C64::new(0.0, -1000.0), &y0, 10.0, &opts).unwrap_err();
        assert!(matches!(err, Error::Tolerance { .. }));
    }
}
