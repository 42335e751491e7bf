//! The three-pulse post-selected signal
//! `S(t1, t2, t3; j) = tr{σ_j⁺σ_j⁻ G(t3) R^N G(t2) K^N G(t1) ρ0}`
//! on single points and on two-dimensional delay grids.
//!
//! A grid over delays `(t_a, t_b)` with `a < b` factorizes as
//! `S = tr(W(t_b) X(t_a))`: `X` carries the state forward through `t_a` and
//! every stage before `t_b`, `W` carries the readout observable backward
//! through `t_b` and every later stage. Each row is then a batch of traces.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    build_liouvillian, collective_dephasing, excitation_operator, Backend, Health, Liouvillian,
    PathwayKick,
};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::hilbert::{build_basis, spin_population, Basis, BasisSpec, CMatrix, DensityMatrix, OperatorMatrix, C64};
use crate::model::{build_polariton_hamiltonian, equilibrium_positions, phonon_network, ModelParams, PhononNetwork};
use crate::states::phonon_superfluid;

/// Everything the signal needs, built once and shared read-only.
#[derive(Debug, Clone)]
pub struct ModelContext {
    pub params: ModelParams,
    pub basis: Arc<Basis>,
    pub network: PhononNetwork,
    pub hamiltonian: OperatorMatrix,
    pub liouvillian: Liouvillian,
    pub excitation: OperatorMatrix,
    pub rho0: DensityMatrix,
    pub left: PathwayKick,
    pub right: PathwayKick,
}

impl ModelContext {
    /// Build the context with `N` kicks per pulse, starting from the phonon
    /// superfluid.
    pub fn new(params: &ModelParams, spec: BasisSpec) -> Result<Self> {
        Self::with_kicks(params, spec, spec.n_ions)
    }

    pub fn with_kicks(params: &ModelParams, spec: BasisSpec, n_kicks: usize) -> Result<Self> {
        params.validate()?;
        if n_kicks == 0 {
            return Err(Error::InvalidSequence("at least one kick per pulse is required".into()));
        }
        let basis = build_basis(spec)?;
        let geometry = equilibrium_positions(spec.n_ions)?;
        let network = phonon_network(&geometry, params)?;
        let hamiltonian = build_polariton_hamiltonian(&network, params, &basis)?;
        let dephasing = collective_dephasing(&basis, params.gamma)?;
        let liouvillian = build_liouvillian(&hamiltonian, &[dephasing])?;
        let excitation = excitation_operator(&network, &basis)?;
        let rho0 = phonon_superfluid(&basis, &network)?.density();
        let left = PathwayKick::left(&excitation, n_kicks)?;
        let right = PathwayKick::right(&excitation, n_kicks)?;
        Ok(Self {
            params: params.clone(),
            basis,
            network,
            hamiltonian,
            liouvillian,
            excitation,
            rho0,
            left,
            right,
        })
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.liouvillian = self.liouvillian.with_backend(backend);
        self
    }

    /// Replace the initial state, e.g. to check linearity.
    pub fn with_initial_state(mut self, rho0: DensityMatrix) -> Result<Self> {
        if **rho0.basis() != *self.basis {
            return Err(Error::DimensionMismatch("initial state basis differs".into()));
        }
        self.rho0 = rho0;
        Ok(self)
    }

    pub fn n_kicks(&self) -> usize {
        self.left.count()
    }

    /// Excited-state population of ion `j` (1-based).
    pub fn readout(&self, j: usize) -> Result<CMatrix> {
        Ok(spin_population(j, &self.basis)?.into_matrix())
    }
}

/// `tr(a x)` without forming the product.
pub fn trace_with(a: &CMatrix, x: &CMatrix) -> C64 {
    let d = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            acc += a[(i, j)] * x[(j, i)];
        }
    }
    acc
}

/// Exact signal at one delay triple (ms).
pub fn signal_point(ctx: &ModelContext, t1: f64, t2: f64, t3: f64, j: usize) -> Result<C64> {
    let n = ctx.readout(j)?;
    let l = &ctx.liouvillian;
    let x = l.evolve(ctx.rho0.matrix(), t1)?;
    let x = l.evolve(&ctx.left.apply(&x), t2)?;
    let x = l.evolve(&ctx.right.apply(&x), t3)?;
    Ok(trace_with(&n, &x))
}

/// One delay interval of the sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum Interval {
    T1,
    T2,
    T3,
}

impl Interval {
    pub fn index(self) -> usize {
        match self {
            Interval::T1 => 1,
            Interval::T2 => 2,
            Interval::T3 => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Interval::T1 => "t1",
            Interval::T2 => "t2",
            Interval::T3 => "t3",
        }
    }

    const ALL: [Interval; 3] = [Interval::T1, Interval::T2, Interval::T3];
}

/// A delay that is either held fixed or scanned over a uniform grid (ms).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeAxis {
    Fixed(f64),
    Grid { start: f64, step: f64, count: usize },
}

impl TimeAxis {
    pub fn is_grid(&self) -> bool {
        matches!(self, TimeAxis::Grid { .. })
    }

    pub fn count(&self) -> usize {
        match self {
            TimeAxis::Fixed(_) => 1,
            TimeAxis::Grid { count, .. } => *count,
        }
    }

    pub fn start(&self) -> f64 {
        match self {
            TimeAxis::Fixed(t) => *t,
            TimeAxis::Grid { start, .. } => *start,
        }
    }

    pub fn step(&self) -> f64 {
        match self {
            TimeAxis::Fixed(_) => 0.0,
            TimeAxis::Grid { step, .. } => *step,
        }
    }

    pub fn value(&self, k: usize) -> f64 {
        self.start() + k as f64 * self.step()
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count()).map(|k| self.value(k)).collect()
    }

    fn validate(&self, name: &str) -> Result<()> {
        match *self {
            TimeAxis::Fixed(t) => {
                if !(t >= 0.0) || !t.is_finite() {
                    return Err(Error::InvalidSequence(format!("{name} must be a non-negative delay, got {t}")));
                }
            }
            TimeAxis::Grid { start, step, count } => {
                if !(start >= 0.0) || !start.is_finite() {
                    return Err(Error::InvalidSequence(format!("{name} grid start must be non-negative")));
                }
                if !(step > 0.0) || !step.is_finite() {
                    return Err(Error::InvalidSequence(format!("{name} grid step must be positive")));
                }
                if count == 0 {
                    return Err(Error::InvalidSequence(format!("{name} grid needs at least one sample")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceConfig {
    pub t1: TimeAxis,
    pub t2: TimeAxis,
    pub t3: TimeAxis,
    /// 1-based ion whose excited population is read out.
    pub readout_ion: usize,
}

impl SequenceConfig {
    pub fn axis(&self, which: Interval) -> &TimeAxis {
        match which {
            Interval::T1 => &self.t1,
            Interval::T2 => &self.t2,
            Interval::T3 => &self.t3,
        }
    }

    /// The scanned pair `(a, b)` with `a` earlier, and the fixed interval.
    pub fn layout(&self) -> Result<(Interval, Interval, Interval)> {
        self.t1.validate("t1")?;
        self.t2.validate("t2")?;
        self.t3.validate("t3")?;
        let grids: Vec<Interval> = Interval::ALL.into_iter().filter(|&i| self.axis(i).is_grid()).collect();
        if grids.len() != 2 {
            return Err(Error::InvalidSequence(format!(
                "exactly two delays must be grids, found {}",
                grids.len()
            )));
        }
        let fixed = Interval::ALL.into_iter().find(|i| !grids.contains(i)).expect("one fixed axis");
        Ok((grids[0], grids[1], fixed))
    }
}

/// Sampling of one scanned axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub interval: Interval,
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn value(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }
}

/// Samples `S(t_a, t_b)` stored row-major with `t_a` along rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalGrid {
    pub axis_a: GridAxis,
    pub axis_b: GridAxis,
    pub fixed: (Interval, f64),
    pub readout_ion: usize,
    pub values: Vec<C64>,
    /// Rows or columns whose propagation failed; their samples are NaN.
    pub failures: Vec<String>,
    pub health: Health,
}

impl SignalGrid {
    pub fn rows(&self) -> usize {
        self.axis_a.count
    }

    pub fn cols(&self) -> usize {
        self.axis_b.count
    }

    pub fn get(&self, k: usize, l: usize) -> C64 {
        self.values[k * self.cols() + l]
    }

    pub fn row(&self, k: usize) -> &[C64] {
        &self.values[k * self.cols()..(k + 1) * self.cols()]
    }

    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Scan controls.
#[derive(Debug, Clone, Default)]
pub struct ScanOptions {
    pub exec: Execution,
    /// JSON-lines file recording completed rows; an existing file with a
    /// matching fingerprint is resumed.
    pub checkpoint: Option<PathBuf>,
}

const ROW_BLOCK: usize = 32;

enum Stage<'a> {
    Evolve(Interval),
    Kick(&'a PathwayKick),
}

fn stages(ctx: &ModelContext) -> [Stage<'_>; 5] {
    [
        Stage::Evolve(Interval::T1),
        Stage::Kick(&ctx.left),
        Stage::Evolve(Interval::T2),
        Stage::Kick(&ctx.right),
        Stage::Evolve(Interval::T3),
    ]
}

fn stage_position(i: Interval) -> usize {
    (i.index() - 1) * 2
}

/// Forward action of the stages in `range` with every interval fixed.
fn forward_fixed(ctx: &ModelContext, cfg: &SequenceConfig, range: std::ops::Range<usize>, x: CMatrix) -> Result<CMatrix> {
    let all = stages(ctx);
    let mut x = x;
    for stage in &all[range] {
        x = match stage {
            Stage::Evolve(i) => ctx.liouvillian.evolve(&x, cfg.axis(*i).start())?,
            Stage::Kick(k) => k.apply(&x),
        };
    }
    Ok(x)
}

/// Dual action of the stages in `range`, applied last stage first.
fn dual_fixed(ctx: &ModelContext, cfg: &SequenceConfig, range: std::ops::Range<usize>, a: CMatrix) -> Result<CMatrix> {
    let all = stages(ctx);
    let mut a = a;
    for stage in all[range].iter().rev() {
        a = match stage {
            Stage::Evolve(i) => ctx.liouvillian.evolve_dual(&a, cfg.axis(*i).start())?,
            Stage::Kick(k) => k.apply_dual(&a),
        };
    }
    Ok(a)
}

/// Stable 64-bit FNV-1a digest.
fn fingerprint(text: &str) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointHeader {
    fingerprint: String,
    rows: usize,
    cols: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointRow {
    row: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

fn scan_fingerprint(ctx: &ModelContext, cfg: &SequenceConfig) -> Result<String> {
    let text = serde_json::to_string(&(&ctx.params, ctx.basis.spec(), cfg, ctx.n_kicks(), ctx.liouvillian.backend()))
        .map_err(|e| Error::Checkpoint(e.to_string()))?;
    Ok(fingerprint(&text))
}

fn load_checkpoint(path: &Path, fp: &str, rows: usize, cols: usize) -> Result<Vec<Option<Vec<C64>>>> {
    let mut done = vec![None; rows];
    if !path.exists() {
        let mut f = File::create(path)?;
        let header = CheckpointHeader { fingerprint: fp.to_string(), rows, cols };
        writeln!(f, "{}", serde_json::to_string(&header).map_err(|e| Error::Checkpoint(e.to_string()))?)?;
        return Ok(done);
    }
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let header: CheckpointHeader = match lines.next() {
        Some(line) => serde_json::from_str(&line?).map_err(|e| Error::Checkpoint(format!("bad header: {e}")))?,
        None => return Err(Error::Checkpoint(format!("{} is empty", path.display()))),
    };
    if header.fingerprint != fp || header.rows != rows || header.cols != cols {
        return Err(Error::Checkpoint(format!(
            "{} belongs to a different scan; remove it to start over",
            path.display()
        )));
    }
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        // a torn final line from an interrupted run is ignored
        let Ok(rec) = serde_json::from_str::<CheckpointRow>(&line) else { continue };
        if rec.row < rows && rec.re.len() == cols && rec.im.len() == cols {
            done[rec.row] = Some(rec.re.iter().zip(&rec.im).map(|(&r, &i)| C64::new(r, i)).collect());
        }
    }
    Ok(done)
}

/// Evaluate the signal on the Cartesian grid described by `cfg`.
///
/// Propagation failures are recorded per row or column and leave NaN
/// samples; only configuration and checkpoint problems are returned as
/// errors.
pub fn scan_signal(ctx: &ModelContext, cfg: &SequenceConfig, opts: &ScanOptions) -> Result<SignalGrid> {
    let (a, b, c) = cfg.layout()?;
    let ax = cfg.axis(a);
    let bx = cfg.axis(b);
    let axis_a = GridAxis { interval: a, start: ax.start(), step: ax.step(), count: ax.count() };
    let axis_b = GridAxis { interval: b, start: bx.start(), step: bx.step(), count: bx.count() };
    let (rows, cols) = (axis_a.count, axis_b.count);
    let exec = opts.exec;
    let l = &ctx.liouvillian;
    let readout = ctx.readout(cfg.readout_ion)?;
    let pa = stage_position(a);
    let pb = stage_position(b);

    let mut failures = Vec::new();
    let mut health = Health::default();

    // readout observable carried back through t_b and every later stage
    let w_start = dual_fixed(ctx, cfg, (pb + 1)..5, readout)?;
    let w = l.sample(&w_start, axis_b.start, axis_b.step, cols, true, exec)?;
    let d = ctx.basis.dim();
    let mut w_flat = CMatrix::from_element(cols, d * d, C64::new(f64::NAN, 0.0));
    for (col, res) in w.into_iter().enumerate() {
        match res {
            Ok(m) => {
                let mt = m.transpose();
                for (k, z) in mt.as_slice().iter().enumerate() {
                    w_flat[(col, k)] = *z;
                }
            }
            Err(e) => failures.push(format!("{} = {}: {e}", b.label(), axis_b.value(col))),
        }
    }

    let prefix = forward_fixed(ctx, cfg, 0..pa, ctx.rho0.matrix().clone())?;
    let fp = scan_fingerprint(ctx, cfg)?;
    let mut done = match &opts.checkpoint {
        Some(path) => load_checkpoint(path, &fp, rows, cols)?,
        None => vec![None; rows],
    };
    let mut writer = match &opts.checkpoint {
        Some(path) => Some(OpenOptions::new().append(true).open(path)?),
        None => None,
    };

    let mut values = vec![C64::new(f64::NAN, 0.0); rows * cols];
    for block_start in (0..rows).step_by(ROW_BLOCK) {
        let block_end = (block_start + ROW_BLOCK).min(rows);
        if (block_start..block_end).all(|k| done[k].is_some()) {
            continue;
        }
        let block_len = block_end - block_start;
        let z = l.sample(&prefix, axis_a.value(block_start), axis_a.step, block_len, false, exec)?;
        let computed = exec.map(block_len, |i| -> Result<Vec<C64>> {
            let zk = z[i].as_ref().map_err(|e| Error::Tolerance {
                time: axis_a.value(block_start + i),
                achieved: match e {
                    Error::Tolerance { achieved, .. } => *achieved,
                    _ => f64::NAN,
                },
            })?;
            let x = forward_fixed(ctx, cfg, (pa + 1)..pb, zk.clone())?;
            let v = nalgebra::DVector::from_column_slice(x.as_slice());
            let s = &w_flat * v;
            Ok(s.iter().copied().collect())
        });
        for (i, res) in computed.into_iter().enumerate() {
            let k = block_start + i;
            if done[k].is_some() {
                continue;
            }
            match res {
                Ok(row) => {
                    if let Some(f) = writer.as_mut() {
                        let rec = CheckpointRow {
                            row: k,
                            re: row.iter().map(|z| z.re).collect(),
                            im: row.iter().map(|z| z.im).collect(),
                        };
                        let line = serde_json::to_string(&rec).map_err(|e| Error::Checkpoint(e.to_string()))?;
                        writeln!(f, "{line}")?;
                    }
                    done[k] = Some(row);
                }
                Err(e) => failures.push(format!("{} = {}: {e}", a.label(), axis_a.value(k))),
            }
        }
        if let Some(f) = writer.as_mut() {
            f.flush()?;
        }
    }
    for (k, row) in done.into_iter().enumerate() {
        if let Some(row) = row {
            values[k * cols..(k + 1) * cols].copy_from_slice(&row);
        }
    }

    // physicality of the same propagations applied to the initial state,
    // plus unitality of the dual maps used for the readout
    let probe_a = l.sample(ctx.rho0.matrix(), axis_a.start, axis_a.step, rows, false, exec)?;
    let nominal = ctx.rho0.trace().re;
    for m in probe_a.iter().flatten() {
        health.record_state(m, nominal);
    }
    let id = CMatrix::identity(d, d);
    let probe_b = l.sample(&id, axis_b.start, axis_b.step, cols, true, exec)?;
    for m in probe_b.iter().flatten() {
        health.record_unitality(m);
    }

    Ok(SignalGrid {
        axis_a,
        axis_b,
        fixed: (c, cfg.axis(c).start()),
        readout_ion: cfg.readout_ion,
        values,
        failures,
        health,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::max_abs;

    fn ctx(params: ModelParams) -> ModelContext {
        ModelContext::new(&params, BasisSpec::filling_one(2)).unwrap()
    }

    fn grid(start: f64, step: f64, count: usize) -> TimeAxis {
        TimeAxis::Grid { start, step, count }
    }

    #[test]
    fn origin_signal_is_two() {
        let c = ctx(ModelParams::default());
        for j in [1, 2] {
            let s = signal_point(&c, 0.0, 0.0, 0.0, j).unwrap();
            assert!((s - C64::new(2.0, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn readout_ion_validated() {
        let c = ctx(ModelParams::default());
        assert!(matches!(signal_point(&c, 0.0, 0.0, 0.0, 3), Err(Error::InvalidSite { .. })));
    }

    #[test]
    fn single_point_grid_matches_signal_point() {
        let c = ctx(ModelParams::default());
        let cfg = SequenceConfig { t1: TimeAxis::Fixed(0.03), t2: grid(0.1, 0.01, 1), t3: grid(0.2, 0.01, 1), readout_ion: 1 };
        let g = scan_signal(&c, &cfg, &ScanOptions::default()).unwrap();
        let s = signal_point(&c, 0.03, 0.1, 0.2, 1).unwrap();
        assert!((g.get(0, 0) - s).norm() < 1e-11);
    }

    #[test]
    fn every_layout_matches_pointwise_evaluation() {
        let c = ctx(ModelParams::default());
        let layouts = [
            (grid(0.0, 0.013, 5), grid(0.01, 0.007, 4), TimeAxis::Fixed(0.02)),
            (grid(0.0, 0.013, 5), TimeAxis::Fixed(0.02), grid(0.01, 0.007, 4)),
            (TimeAxis::Fixed(0.02), grid(0.0, 0.013, 5), grid(0.01, 0.007, 4)),
        ];
        for (t1, t2, t3) in layouts {
            let cfg = SequenceConfig { t1, t2, t3, readout_ion: 2 };
            let g = scan_signal(&c, &cfg, &ScanOptions::default()).unwrap();
            assert!(g.is_complete());
            for k in 0..g.rows() {
                for l in 0..g.cols() {
                    let mut t = [t1.start(), t2.start(), t3.start()];
                    t[g.axis_a.interval.index() - 1] = g.axis_a.value(k);
                    t[g.axis_b.interval.index() - 1] = g.axis_b.value(l);
                    let s = signal_point(&c, t[0], t[1], t[2], 2).unwrap();
                    assert!((g.get(k, l) - s).norm() < 1e-10, "{k},{l}");
                }
            }
        }
    }

    #[test]
    fn layout_requires_two_grids() {
        let c = ctx(ModelParams::default());
        let cfg = SequenceConfig {
            t1: TimeAxis::Fixed(0.0),
            t2: TimeAxis::Fixed(0.0),
            t3: grid(0.0, 0.01, 3),
            readout_ion: 1,
        };
        assert!(matches!(scan_signal(&c, &cfg, &ScanOptions::default()), Err(Error::InvalidSequence(_))));
        let bad = SequenceConfig { t2: grid(0.0, 0.0, 3), ..cfg };
        assert!(scan_signal(&c, &bad, &ScanOptions::default()).is_err());
    }

    #[test]
    fn coherence_decays_at_four_gamma_without_coupling() {
        let p = ModelParams { g: 0.0, ..Default::default() };
        let c = ctx(p.clone());
        let cfg = SequenceConfig {
            t1: TimeAxis::Fixed(0.0),
            t2: grid(0.0, 0.05, 8),
            t3: grid(0.0, 0.1, 2),
            readout_ion: 1,
        };
        let g = scan_signal(&c, &cfg, &ScanOptions::default()).unwrap();
        for k in 0..8 {
            let t2 = 0.05 * k as f64;
            let expected = 2.0 * (-4.0 * p.gamma_ang() * t2).exp();
            assert!((g.get(k, 0).norm() - expected).abs() < 1e-10);
            // population during t3 is frozen
            assert!((g.get(k, 1) - g.get(k, 0)).norm() < 1e-6);
        }
    }

    #[test]
    fn signal_is_linear_in_initial_state() {
        let c = ctx(ModelParams::default());
        let scaled = c.rho0.scale(C64::new(2.5, 0.0));
        let c2 = c.clone().with_initial_state(scaled).unwrap();
        let s1 = signal_point(&c, 0.01, 0.02, 0.03, 1).unwrap();
        let s2 = signal_point(&c2, 0.01, 0.02, 0.03, 1).unwrap();
        assert!((s2 - s1 * 2.5).norm() < 1e-12);
    }

    #[test]
    fn semigroup_split_of_first_delay() {
        let c = ctx(ModelParams::default());
        let l = &c.liouvillian;
        let split = l.evolve(&l.evolve(c.rho0.matrix(), 0.013).unwrap(), 0.029).unwrap();
        let whole = l.evolve(c.rho0.matrix(), 0.042).unwrap();
        assert!(max_abs(&(split - whole)) < 1e-9);
    }

    #[test]
    fn sequential_and_parallel_scans_are_identical() {
        let c = ctx(ModelParams::default());
        let cfg = SequenceConfig { t1: TimeAxis::Fixed(0.0), t2: grid(0.0, 0.004, 40), t3: grid(0.0, 0.004, 37), readout_ion: 1 };
        let s = scan_signal(&c, &cfg, &ScanOptions { exec: Execution::Sequential, checkpoint: None }).unwrap();
        let p = scan_signal(&c, &cfg, &ScanOptions { exec: Execution::Parallel, checkpoint: None }).unwrap();
        assert_eq!(s, p);
        assert!(s.health.passes(), "{:?}", s.health);
    }

    #[test]
    fn checkpoint_resume_reproduces_scan() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.jsonl");
        let c = ctx(ModelParams::default());
        let cfg = SequenceConfig { t1: TimeAxis::Fixed(0.0), t2: grid(0.0, 0.004, 70), t3: grid(0.0, 0.004, 9), readout_ion: 1 };
        let opts = ScanOptions { exec: Execution::Parallel, checkpoint: Some(path.clone()) };
        let full = scan_signal(&c, &cfg, &opts).unwrap();
        // keep the header and the first 40 rows, then tear the last line
        let text = std::fs::read_to_string(&path).unwrap();
        let kept: Vec<&str> = text.lines().take(41).collect();
        std::fs::write(&path, format!("{}\n{{\"row\": 4", kept.join("\n"))).unwrap();
        let resumed = scan_signal(&c, &cfg, &opts).unwrap();
        assert_eq!(full.values, resumed.values);

        let other = SequenceConfig { readout_ion: 2, ..cfg };
        assert!(matches!(scan_signal(&c, &other, &opts), Err(Error::Checkpoint(_))));
    }
}
