//! Two-dimensional spectra of scanned signals, peak picking, linewidths and
//! the dissipation-free stick-spectrum oracle.
//!
//! Transforms use the positive-exponent convention
//! `F(Ω_a, Ω_b) = ∫∫ dt_a dt_b e^{+i(Ω_a t_a + Ω_b t_b)} S(t_a, t_b)`, so a
//! term `e^{-iω t}` produces a peak at `+ω`. Axes are two-sided, centered,
//! and in angular kHz.

use std::f64::consts::PI;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::hilbert::{sorted_eigh, CMatrix, C64};
use crate::protocol::{Interval, ModelContext, SignalGrid};

/// Which pair of delays is transformed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transform {
    S13,
    S23,
}

impl Transform {
    pub fn intervals(self) -> (Interval, Interval) {
        match self {
            Transform::S13 => (Interval::T1, Interval::T3),
            Transform::S23 => (Interval::T2, Interval::T3),
        }
    }

    /// The delay held fixed.
    pub fn fixed(self) -> Interval {
        match self {
            Transform::S13 => Interval::T2,
            Transform::S23 => Interval::T1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Transform::S13 => "s13",
            Transform::S23 => "s23",
        }
    }
}

impl std::str::FromStr for Transform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s13" => Ok(Transform::S13),
            "s23" => Ok(Transform::S23),
            other => Err(Error::InvalidParameter(format!("unknown transform '{other}', expected s13 or s23"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierOptions {
    /// Zero-padding factor applied to each axis.
    pub pad: usize,
    /// Exponential window rate `κ` (1/ms) multiplying `e^{-κ(t_a + t_b)}`.
    pub window: Option<f64>,
}

impl Default for FourierOptions {
    fn default() -> Self {
        Self { pad: 4, window: None }
    }
}

/// One centered frequency axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyAxis {
    pub interval: Interval,
    /// Samples in the time domain before padding.
    pub samples: usize,
    pub dt: f64,
    pub t_start: f64,
    pub padded: usize,
    /// Padded grid spacing `2π / (padded·dt)`.
    pub spacing: f64,
    /// Resolution bin `2π / (samples·dt)`.
    pub resolution: f64,
    /// FWHM of an undamped line under the same window and padding.
    pub instrument_fwhm: f64,
}

impl FrequencyAxis {
    pub fn len(&self) -> usize {
        self.padded
    }

    pub fn is_empty(&self) -> bool {
        self.padded == 0
    }

    pub fn omega(&self, p: usize) -> f64 {
        (p as f64 - (self.padded / 2) as f64) * self.spacing
    }

    pub fn omegas(&self) -> Vec<f64> {
        (0..self.padded).map(|p| self.omega(p)).collect()
    }

    /// Width of the unaliased band, `2π / dt`.
    pub fn band(&self) -> f64 {
        2.0 * PI / self.dt
    }

    /// Map a frequency into the centered band.
    pub fn fold(&self, omega: f64) -> f64 {
        let band = self.band();
        let lo = self.omega(0);
        (omega - lo).rem_euclid(band) + lo
    }

    /// Signed distance in resolution bins, accounting for band wrap.
    pub fn distance_bins(&self, a: f64, b: f64) -> f64 {
        let band = self.band();
        let mut d = (a - b).rem_euclid(band);
        if d > band / 2.0 {
            d -= band;
        }
        d / self.resolution
    }
}

/// A two-sided 2D spectrum stored row-major with `Ω_a` along rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum2D {
    pub which: Transform,
    pub axis_a: FrequencyAxis,
    pub axis_b: FrequencyAxis,
    pub fixed: (Interval, f64),
    pub window: Option<f64>,
    pub values: Vec<C64>,
}

impl Spectrum2D {
    pub fn rows(&self) -> usize {
        self.axis_a.padded
    }

    pub fn cols(&self) -> usize {
        self.axis_b.padded
    }

    pub fn get(&self, pa: usize, pb: usize) -> C64 {
        self.values[pa * self.cols() + pb]
    }

    pub fn magnitude(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm()).collect()
    }

    /// `Σ|F|² dΩ_a dΩ_b / (2π)²`, equal to the windowed time-domain power.
    pub fn power(&self) -> f64 {
        let sum: f64 = self.values.iter().map(|z| z.norm_sqr()).sum();
        sum * self.axis_a.spacing * self.axis_b.spacing / (4.0 * PI * PI)
    }
}

fn window_weight(window: Option<f64>, t: f64) -> f64 {
    window.map_or(1.0, |k| (-k * t).exp())
}

/// `dt_a dt_b Σ |w S|²` of the signal as it enters the transform.
pub fn signal_power(grid: &SignalGrid, window: Option<f64>) -> f64 {
    let mut sum = 0.0;
    for k in 0..grid.rows() {
        let wa = window_weight(window, grid.axis_a.value(k));
        for l in 0..grid.cols() {
            let s = grid.get(k, l);
            if s.is_nan() {
                continue;
            }
            let w = wa * window_weight(window, grid.axis_b.value(l));
            sum += (s * w).norm_sqr();
        }
    }
    sum * grid.axis_a.step * grid.axis_b.step
}

/// Relative mismatch between spectral and time-domain power.
pub fn parseval_residual(grid: &SignalGrid, spec: &Spectrum2D) -> f64 {
    let t = signal_power(grid, spec.window);
    let f = spec.power();
    if t == 0.0 {
        f.abs()
    } else {
        (f - t).abs() / t
    }
}

fn unnormalized_inverse(planner: &mut FftPlanner<f64>, n: usize) -> std::sync::Arc<dyn rustfft::Fft<f64>> {
    planner.plan_fft_inverse(n)
}

/// `Σ_k x_k e^{+iΩ_m t_k}` for each centered `Ω_m`.
fn transform_1d(x: &[C64], dt: f64, t_start: f64, pad: usize) -> Vec<C64> {
    let np = x.len() * pad;
    let mut planner = FftPlanner::new();
    let fft = unnormalized_inverse(&mut planner, np);
    let mut buf = vec![C64::new(0.0, 0.0); np];
    buf[..x.len()].copy_from_slice(x);
    fft.process(&mut buf);
    let spacing = 2.0 * PI / (np as f64 * dt);
    (0..np)
        .map(|p| {
            let m = p as i64 - (np / 2) as i64;
            let q = m.rem_euclid(np as i64) as usize;
            let omega = m as f64 * spacing;
            buf[q] * C64::from_polar(1.0, omega * t_start)
        })
        .collect()
}

/// FWHM by linear interpolation of the half-maximum crossings along a
/// periodic line of magnitudes, in units of the line spacing.
fn fwhm_samples(line: &[f64], p: usize) -> f64 {
    let n = line.len();
    let peak = line[p];
    let half = 0.5 * peak;
    let reach = |dir: i64| -> f64 {
        let mut prev = peak;
        for s in 1..=(n / 2) {
            let idx = (p as i64 + dir * s as i64).rem_euclid(n as i64) as usize;
            let v = line[idx];
            if v < half {
                return (s - 1) as f64 + (prev - half) / (prev - v);
            }
            prev = v;
        }
        (n / 2) as f64
    };
    (reach(-1) + reach(1)).min(n as f64)
}

/// FWHM of the transformed window alone, i.e. of an undamped line.
pub fn instrument_fwhm(samples: usize, dt: f64, window: Option<f64>, pad: usize) -> f64 {
    if samples == 0 {
        return 0.0;
    }
    let x: Vec<C64> = (0..samples).map(|k| C64::new(window_weight(window, k as f64 * dt), 0.0)).collect();
    let f = transform_1d(&x, dt, 0.0, pad);
    let mag: Vec<f64> = f.iter().map(|z| z.norm()).collect();
    let np = samples * pad;
    fwhm_samples(&mag, np / 2) * 2.0 * PI / (np as f64 * dt)
}

fn frequency_axis(interval: Interval, samples: usize, dt: f64, t_start: f64, opts: &FourierOptions) -> FrequencyAxis {
    let padded = samples * opts.pad;
    FrequencyAxis {
        interval,
        samples,
        dt,
        t_start,
        padded,
        spacing: 2.0 * PI / (padded as f64 * dt),
        resolution: 2.0 * PI / (samples as f64 * dt),
        instrument_fwhm: instrument_fwhm(samples, dt, opts.window, opts.pad),
    }
}

/// Discrete two-sided transform of a scanned grid.
///
/// Samples lost to propagation failures (NaN) enter as zeros.
pub fn fourier_2d(grid: &SignalGrid, which: Transform, opts: &FourierOptions, exec: Execution) -> Result<Spectrum2D> {
    let (ia, ib) = which.intervals();
    if grid.axis_a.interval != ia || grid.axis_b.interval != ib {
        return Err(Error::InvalidSequence(format!(
            "{} needs grids over ({}, {}), got ({}, {})",
            which.label(),
            ia.label(),
            ib.label(),
            grid.axis_a.interval.label(),
            grid.axis_b.interval.label()
        )));
    }
    for ax in [&grid.axis_a, &grid.axis_b] {
        if !(ax.step > 0.0) || !ax.step.is_finite() || ax.count == 0 {
            return Err(Error::NonUniformGrid(format!(
                "{} axis has step {} and {} samples",
                ax.interval.label(),
                ax.step,
                ax.count
            )));
        }
    }
    if opts.pad == 0 {
        return Err(Error::InvalidParameter("padding factor must be at least 1".into()));
    }
    if let Some(k) = opts.window {
        if !(k >= 0.0) || !k.is_finite() {
            return Err(Error::InvalidParameter(format!("window rate must be non-negative, got {k}")));
        }
    }
    let (na, nb) = (grid.rows(), grid.cols());
    let axis_a = frequency_axis(ia, na, grid.axis_a.step, grid.axis_a.start, opts);
    let axis_b = frequency_axis(ib, nb, grid.axis_b.step, grid.axis_b.start, opts);
    let (pa, pb) = (axis_a.padded, axis_b.padded);

    // along Ω_b for every recorded row
    let rows: Vec<Vec<C64>> = exec.map(na, |k| {
        let wa = window_weight(opts.window, grid.axis_a.value(k));
        let x: Vec<C64> = (0..nb)
            .map(|l| {
                let s = grid.get(k, l);
                if s.is_nan() {
                    C64::new(0.0, 0.0)
                } else {
                    s * (wa * window_weight(opts.window, grid.axis_b.value(l)))
                }
            })
            .collect();
        transform_1d(&x, axis_b.dt, axis_b.t_start, opts.pad)
    });
    // along Ω_a for every output column
    let scale = axis_a.dt * axis_b.dt;
    let cols: Vec<Vec<C64>> = exec.map(pb, |q| {
        let x: Vec<C64> = rows.iter().map(|r| r[q]).collect();
        transform_1d(&x, axis_a.dt, axis_a.t_start, opts.pad)
    });
    let mut values = vec![C64::new(0.0, 0.0); pa * pb];
    for (q, col) in cols.iter().enumerate() {
        for (p, z) in col.iter().enumerate() {
            values[p * pb + q] = z * scale;
        }
    }
    Ok(Spectrum2D { which, axis_a, axis_b, fixed: grid.fixed, window: opts.window, values })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Padded-grid indices.
    pub index: (usize, usize),
    pub omega_a: f64,
    pub omega_b: f64,
    pub magnitude: f64,
    pub fwhm_a: f64,
    pub fwhm_b: f64,
    pub label: Option<String>,
}

/// Merge radius in resolution bins.
pub const MERGE_BINS: f64 = 3.0;

/// Local maxima of `|F|` above `threshold_rel` times the global maximum.
///
/// A sample is a candidate when no neighbor in its periodic 3×3
/// neighborhood exceeds it. Candidates closer than [`MERGE_BINS`] resolution
/// bins to a stronger accepted peak are dropped, which removes the
/// sidelobe ripple introduced by padding. Peaks are returned strongest first.
pub fn find_peaks(spec: &Spectrum2D, threshold_rel: f64) -> Result<Vec<Peak>> {
    if !(threshold_rel > 0.0 && threshold_rel <= 1.0) {
        return Err(Error::InvalidParameter(format!("peak threshold must lie in (0, 1], got {threshold_rel}")));
    }
    let (na, nb) = (spec.rows(), spec.cols());
    let mag = spec.magnitude();
    let max = mag.iter().copied().fold(0.0, f64::max);
    if max == 0.0 || !max.is_finite() {
        return Ok(Vec::new());
    }
    let cut = threshold_rel * max;
    let at = |i: i64, j: i64| mag[(i.rem_euclid(na as i64) as usize) * nb + j.rem_euclid(nb as i64) as usize];
    let mut candidates = Vec::new();
    for i in 0..na {
        for j in 0..nb {
            let v = mag[i * nb + j];
            if v <= cut {
                continue;
            }
            let mut is_max = true;
            'scan: for di in -1..=1i64 {
                for dj in -1..=1i64 {
                    if (di, dj) != (0, 0) && at(i as i64 + di, j as i64 + dj) > v {
                        is_max = false;
                        break 'scan;
                    }
                }
            }
            if is_max {
                candidates.push((i, j, v));
            }
        }
    }
    candidates.sort_by(|x, y| y.2.total_cmp(&x.2).then(x.0.cmp(&y.0)).then(x.1.cmp(&y.1)));
    let ra = MERGE_BINS * spec.axis_a.resolution / spec.axis_a.spacing;
    let rb = MERGE_BINS * spec.axis_b.resolution / spec.axis_b.spacing;
    let wrap = |d: usize, n: usize| d.min(n - d) as f64;
    let mut accepted: Vec<(usize, usize, f64)> = Vec::new();
    for c in candidates {
        let near = accepted.iter().any(|a| {
            wrap(c.0.abs_diff(a.0), na) <= ra && wrap(c.1.abs_diff(a.1), nb) <= rb
        });
        if !near {
            accepted.push(c);
        }
    }
    Ok(accepted
        .into_iter()
        .map(|(i, j, v)| {
            let col: Vec<f64> = (0..na).map(|r| mag[r * nb + j]).collect();
            let row = &mag[i * nb..(i + 1) * nb];
            Peak {
                index: (i, j),
                omega_a: spec.axis_a.omega(i),
                omega_b: spec.axis_b.omega(j),
                magnitude: v,
                fwhm_a: fwhm_samples(&col, i) * spec.axis_a.spacing,
                fwhm_b: fwhm_samples(row, j) * spec.axis_b.spacing,
                label: None,
            }
        })
        .collect())
}

/// One dissipation-free resonance `A e^{-iΩ_a t_a - iΩ_b t_b}`, with the
/// eigenstates (ket, bra) of the coherence evolving in each scanned delay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonancePrediction {
    pub omega_a: f64,
    pub omega_b: f64,
    pub amplitude: C64,
    pub pair_a: (usize, usize),
    pub pair_b: (usize, usize),
}

impl ResonancePrediction {
    pub fn label(&self) -> String {
        format!(
            "|{}><{}| then |{}><{}|",
            self.pair_a.0, self.pair_a.1, self.pair_b.0, self.pair_b.1
        )
    }
}

/// Relative amplitude below which stick terms are discarded.
pub const STICK_THRESHOLD: f64 = 1e-8;

/// Eigen-expansion of the signal with dissipation switched off.
///
/// Terms sharing a frequency pair (to 1e-6 rad/ms) are summed, keeping the
/// eigenstate labels of their largest contributor. Results are ordered by
/// decreasing `|A|`.
pub fn stick_spectrum(ctx: &ModelContext, which: Transform, fixed_delay: f64, readout_ion: usize) -> Result<Vec<ResonancePrediction>> {
    let (e, v) = sorted_eigh(ctx.hamiltonian.matrix());
    let d = e.len();
    let vh = v.adjoint();
    let to_eig = |m: &CMatrix| -> CMatrix { &vh * m * &v };
    let rho = to_eig(ctx.rho0.matrix());
    let k = to_eig(ctx.left.power());
    let r = to_eig(ctx.right.power());
    let n = to_eig(&ctx.readout(readout_ion)?);
    let phase = |x: usize, y: usize, t: f64| C64::from_polar(1.0, -(e[x] - e[y]) * t);

    // (omega_a, omega_b, amplitude, pair_a, pair_b, |amplitude|)
    type Term = (f64, f64, C64, (usize, usize), (usize, usize), f64);
    let mut terms: Vec<Term> = Vec::new();
    match which {
        Transform::S23 => {
            let y = &k * rho.component_mul(&CMatrix::from_fn(d, d, |a, b| phase(a, b, fixed_delay)));
            for a in 0..d {
                for b in 0..d {
                    for dd in 0..d {
                        let amp = y[(a, b)] * r[(b, dd)] * n[(dd, a)];
                        terms.push((e[a] - e[b], e[a] - e[dd], amp, (a, b), (a, dd), amp.norm()));
                    }
                }
            }
        }
        Transform::S13 => {
            for a in 0..d {
                for b in 0..d {
                    for c in 0..d {
                        let left = rho[(a, b)] * k[(c, a)] * phase(c, b, fixed_delay);
                        if left == C64::new(0.0, 0.0) {
                            continue;
                        }
                        for dd in 0..d {
                            let amp = left * r[(b, dd)] * n[(dd, c)];
                            terms.push((e[a] - e[b], e[c] - e[dd], amp, (a, b), (c, dd), amp.norm()));
                        }
                    }
                }
            }
        }
    }
    terms.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    let tol = 1e-6;
    let mut merged: Vec<(ResonancePrediction, f64)> = Vec::new();
    for (wa, wb, amp, pa, pb, size) in terms {
        if let Some((last, best)) = merged
            .iter_mut()
            .rev()
            .take_while(|(p, _)| wa - p.omega_a <= tol)
            .find(|(p, _)| (p.omega_b - wb).abs() <= tol)
        {
            last.amplitude += amp;
            if size > *best {
                *best = size;
                last.pair_a = pa;
                last.pair_b = pb;
            }
            continue;
        }
        merged.push((ResonancePrediction { omega_a: wa, omega_b: wb, amplitude: amp, pair_a: pa, pair_b: pb }, size));
    }
    let max = merged.iter().map(|(p, _)| p.amplitude.norm()).fold(0.0, f64::max);
    let mut out: Vec<ResonancePrediction> = merged
        .into_iter()
        .map(|(p, _)| p)
        .filter(|p| max > 0.0 && p.amplitude.norm() > STICK_THRESHOLD * max)
        .collect();
    out.sort_by(|x, y| y.amplitude.norm().total_cmp(&x.amplitude.norm()));
    Ok(out)
}

/// Assignment of one detected peak to the stick spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakAssignment {
    pub peak: Peak,
    /// Index into the prediction list.
    pub prediction: Option<usize>,
    /// Largest per-axis distance to the assigned stick, in resolution bins.
    pub distance_bins: Option<f64>,
    pub anisotropy: f64,
    /// `fwhm / instrument_fwhm` along each axis.
    pub excess_a: f64,
    pub excess_b: f64,
}

impl PeakAssignment {
    pub fn is_matched(&self) -> bool {
        self.prediction.is_some()
    }
}

/// Assignment radius in resolution bins.
pub const ASSIGN_BINS: f64 = 3.0;

/// Attach each peak to the nearest stick within [`ASSIGN_BINS`] resolution
/// bins on both axes (frequencies folded into the spectral band) and label
/// it with that stick's eigenstate pairs.
pub fn lineshape_report(spec: &Spectrum2D, peaks: &[Peak], predictions: &[ResonancePrediction]) -> Vec<PeakAssignment> {
    peaks
        .iter()
        .map(|peak| {
            let mut best: Option<(usize, f64, f64)> = None;
            for (i, p) in predictions.iter().enumerate() {
                let da = spec.axis_a.distance_bins(p.omega_a, peak.omega_a);
                let db = spec.axis_b.distance_bins(p.omega_b, peak.omega_b);
                let cheb = da.abs().max(db.abs());
                if cheb > ASSIGN_BINS {
                    continue;
                }
                let euclid = da.hypot(db);
                if best.is_none_or(|(_, e, _)| euclid < e) {
                    best = Some((i, euclid, cheb));
                }
            }
            let mut peak = peak.clone();
            if let Some((i, _, _)) = best {
                peak.label = Some(predictions[i].label());
            }
            PeakAssignment {
                anisotropy: peak.fwhm_a / peak.fwhm_b,
                excess_a: peak.fwhm_a / spec.axis_a.instrument_fwhm,
                excess_b: peak.fwhm_b / spec.axis_b.instrument_fwhm,
                prediction: best.map(|b| b.0),
                distance_bins: best.map(|b| b.2),
                peak,
            }
        })
        .collect()
}
