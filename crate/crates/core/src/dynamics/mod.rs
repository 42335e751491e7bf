//! Lindblad dynamics: collective dephasing, the Liouvillian, propagation and
//! the one-sided pathway superoperators.
//!
//! Density matrices are vectorized column by column, so
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

pub mod ode;
mod pathway;

pub use pathway::{
    excitation_operator, pathway_kick, phase_cycle_extract, phase_order_component,
    pulse_unitary, PathwayKick, PhaseCycle, Side,
};

use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::hilbert::{
    collective_sigma_z, sorted_eigh, Basis, CMatrix, CVector, DensityMatrix, OperatorMatrix, C64,
};
use crate::model::angular;
use ode::{integrate, OdeOptions};

/// A Lindblad channel `rate · D[operator]`.
#[derive(Debug, Clone)]
pub struct JumpTerm {
    pub operator: OperatorMatrix,
    pub rate: f64,
}

/// Collective dephasing `Z = Σ_k σ_k^z` with prefactor `γ_ang / 2`, so a
/// coherence between states whose spin-excitation numbers differ by `n`
/// decays as `exp(-n² γ_ang t)`. `gamma` is linear kHz.
pub fn collective_dephasing(basis: &Arc<Basis>, gamma: f64) -> Result<JumpTerm> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!("dephasing rate must be non-negative, got {gamma}")));
    }
    Ok(JumpTerm { operator: collective_sigma_z(basis), rate: angular(gamma) / 2.0 })
}

/// Propagation strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Exponential of the dense superoperator.
    Dense,
    /// Adaptive Runge-Kutta integration in Hilbert-space form.
    Ode,
}

/// Largest superoperator dimension propagated by dense exponentials.
pub const DENSE_SUPEROP_MAX: usize = 128;

/// Anchor spacing for sampled propagation along a uniform grid: anchors are
/// propagated directly, samples in between by repeated single steps.
const ANCHOR_STRIDE: usize = 32;

#[derive(Debug, Clone)]
struct Channel {
    op: CMatrix,
    op_dag: CMatrix,
    op_dag_op: CMatrix,
    rate: f64,
}

/// Generator `L ρ = -i[H, ρ] + Σ_j γ_j D[A_j] ρ` with
/// `D[A] ρ = A ρ A† - ½{A†A, ρ}`.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    basis: Arc<Basis>,
    hamiltonian: CMatrix,
    channels: Vec<Channel>,
    superop: Option<CMatrix>,
    backend: Backend,
    ode: OdeOptions,
}

pub fn build_liouvillian(h: &OperatorMatrix, jumps: &[JumpTerm]) -> Result<Liouvillian> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch("Hamiltonian must be square".into()));
    }
    let mut channels = Vec::with_capacity(jumps.len());
    for j in jumps {
        if !j.operator.is_square() || **j.operator.rows() != **h.rows() {
            return Err(Error::DimensionMismatch("jump operator acts on a different basis".into()));
        }
        if !(j.rate >= 0.0) {
            return Err(Error::InvalidParameter(format!("negative jump rate {}", j.rate)));
        }
        if j.rate == 0.0 {
            continue;
        }
        let op = j.operator.matrix().clone();
        let op_dag = op.adjoint();
        let op_dag_op = &op_dag * &op;
        channels.push(Channel { op, op_dag, op_dag_op, rate: j.rate });
    }
    let d = h.dim();
    let backend = if d * d <= DENSE_SUPEROP_MAX { Backend::Dense } else { Backend::Ode };
    let mut l = Liouvillian {
        basis: Arc::clone(h.rows()),
        hamiltonian: h.matrix().clone(),
        channels,
        superop: None,
        backend,
        ode: OdeOptions::default(),
    };
    if backend == Backend::Dense {
        l.superop = Some(l.superoperator());
    }
    Ok(l)
}

pub(crate) fn vec_of(x: &CMatrix) -> DVector<C64> {
    DVector::from_column_slice(x.as_slice())
}

pub(crate) fn unvec(v: &DVector<C64>, d: usize) -> CMatrix {
    CMatrix::from_column_slice(d, d, v.as_slice())
}

impl Liouvillian {
    /// Force a propagation backend.
    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self.superop = match backend {
            Backend::Dense => Some(self.superoperator()),
            Backend::Ode => None,
        };
        self
    }

    pub fn with_ode_options(mut self, opts: OdeOptions) -> Self {
        self.ode = opts;
        self
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn hilbert_dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    /// Superoperator dimension `dim²`.
    pub fn dim(&self) -> usize {
        self.hilbert_dim().pow(2)
    }

    /// Dense superoperator in the column-stacking convention.
    pub fn superoperator(&self) -> CMatrix {
        if let Some(s) = &self.superop {
            return s.clone();
        }
        let d = self.hilbert_dim();
        let id = CMatrix::identity(d, d);
        let h = &self.hamiltonian;
        let minus_i = C64::new(0.0, -1.0);
        let mut s = (id.kronecker(h) - h.transpose().kronecker(&id)) * minus_i;
        for c in &self.channels {
            let g = C64::new(c.rate, 0.0);
            let half = C64::new(0.5 * c.rate, 0.0);
            s += c.op.conjugate().kronecker(&c.op) * g;
            s -= id.kronecker(&c.op_dag_op) * half;
            s -= c.op_dag_op.transpose().kronecker(&id) * half;
        }
        s
    }

    /// `L(x)` in Hilbert-space form.
    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let h = &self.hamiltonian;
        let mut out = (h * x - x * h) * C64::new(0.0, -1.0);
        for c in &self.channels {
            let jump = &c.op * x * &c.op_dag;
            let anti = &c.op_dag_op * x + x * &c.op_dag_op;
            out += (jump - anti * C64::new(0.5, 0.0)) * C64::new(c.rate, 0.0);
        }
        out
    }

    /// Dual generator `L'` defined by `tr(a L(x)) = tr(L'(a) x)`.
    pub fn apply_dual(&self, a: &CMatrix) -> CMatrix {
        let h = &self.hamiltonian;
        let mut out = (h * a - a * h) * C64::new(0.0, 1.0);
        for c in &self.channels {
            let jump = &c.op_dag * a * &c.op;
            let anti = &c.op_dag_op * a + a * &c.op_dag_op;
            out += (jump - anti * C64::new(0.5, 0.0)) * C64::new(c.rate, 0.0);
        }
        out
    }

    /// `exp(L t)` as a dense superoperator.
    pub fn propagator(&self, t: f64) -> Result<CMatrix> {
        check_time(t)?;
        let s = match &self.superop {
            Some(s) => s.clone(),
            None => self.superoperator(),
        };
        Ok((s * C64::new(t, 0.0)).exp())
    }

    fn dense_apply(g: &CMatrix, x: &CMatrix, dual: bool) -> CMatrix {
        let d = x.nrows();
        if dual {
            unvec(&(g.transpose() * vec_of(&x.transpose())), d).transpose()
        } else {
            unvec(&(g * vec_of(x)), d)
        }
    }

    fn ode_evolve(&self, x: &CMatrix, t: f64, dual: bool) -> Result<CMatrix> {
        let (y, _) = if dual {
            integrate(|a| self.apply_dual(a), x, t, &self.ode)?
        } else {
            integrate(|y| self.apply(y), x, t, &self.ode)?
        };
        Ok(y)
    }

    fn check_shape(&self, x: &CMatrix) -> Result<()> {
        let d = self.hilbert_dim();
        if x.nrows() != d || x.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} operand for a {d}-dimensional generator",
                x.nrows(),
                x.ncols()
            )));
        }
        Ok(())
    }

    /// `exp(L t) x` for any operand, physical or not.
    pub fn evolve(&self, x: &CMatrix, t: f64) -> Result<CMatrix> {
        self.evolve_any(x, t, false)
    }

    /// `exp(L' t) a`, the Heisenberg-picture evolution of an observable.
    pub fn evolve_dual(&self, a: &CMatrix, t: f64) -> Result<CMatrix> {
        self.evolve_any(a, t, true)
    }

    fn evolve_any(&self, x: &CMatrix, t: f64, dual: bool) -> Result<CMatrix> {
        check_time(t)?;
        self.check_shape(x)?;
        if t == 0.0 {
            return Ok(x.clone());
        }
        match self.backend {
            Backend::Dense => Ok(Self::dense_apply(&self.propagator(t)?, x, dual)),
            Backend::Ode => self.ode_evolve(x, t, dual),
        }
    }

    /// Evolve `x0` to every point `start + k·step`, `k < count`. Failures are
    /// returned per sample; a failed anchor fails the rest of its stride.
    pub fn sample(
        &self,
        x0: &CMatrix,
        start: f64,
        step: f64,
        count: usize,
        dual: bool,
        exec: Execution,
    ) -> Result<Vec<Result<CMatrix>>> {
        check_time(start)?;
        if count > 1 {
            check_time(step)?;
        }
        self.check_shape(x0)?;
        let g_step = match self.backend {
            Backend::Dense if count > 1 => Some(self.propagator(step)?),
            _ => None,
        };
        let n_chunks = count.div_ceil(ANCHOR_STRIDE);
        let chunks = exec.map(n_chunks, |c| {
            let k0 = c * ANCHOR_STRIDE;
            let k1 = (k0 + ANCHOR_STRIDE).min(count);
            let mut out: Vec<Result<CMatrix>> = Vec::with_capacity(k1 - k0);
            let mut current = self.evolve_any(x0, start + k0 as f64 * step, dual);
            for k in k0..k1 {
                if k > k0 {
                    current = match &current {
                        Ok(prev) => match &g_step {
                            Some(g) => Ok(Self::dense_apply(g, prev, dual)),
                            None => self.ode_evolve(prev, step, dual),
                        },
                        Err(e) => Err(Error::Tolerance {
                            time: start + k as f64 * step,
                            achieved: match e {
                                Error::Tolerance { achieved, .. } => *achieved,
                                _ => f64::NAN,
                            },
                        }),
                    };
                }
                out.push(match &current {
                    Ok(m) => Ok(m.clone()),
                    Err(e) => Err(match e {
                        Error::Tolerance { time, achieved } => {
                            Error::Tolerance { time: *time, achieved: *achieved }
                        }
                        other => Error::InvalidSequence(other.to_string()),
                    }),
                });
            }
            out
        });
        Ok(chunks.into_iter().flatten().collect())
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidSequence(format!("time must be finite and non-negative, got {t}")));
    }
    Ok(())
}

/// `ρ(t) = exp(L t) ρ`.
pub fn propagate(liouv: &Liouvillian, rho: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if **rho.basis() != **liouv.basis() {
        return Err(Error::DimensionMismatch("state and generator bases differ".into()));
    }
    Ok(rho.with_matrix(liouv.evolve(rho.matrix(), t)?))
}

/// Least-squares decay rate of the coherence `⟨ket|X(t)|bra⟩` started from
/// `X(0) = |ket⟩⟨bra|`, fitted to `ln|c(t)|` on `samples` points in
/// `[0, t_max]`.
pub fn coherence_decay_rate(
    liouv: &Liouvillian,
    ket: &CVector,
    bra: &CVector,
    t_max: f64,
    samples: usize,
) -> Result<f64> {
    if samples < 2 || !(t_max > 0.0) {
        return Err(Error::InvalidParameter("decay fit needs two or more samples over a positive span".into()));
    }
    let x0 = ket * bra.adjoint();
    let step = t_max / (samples - 1) as f64;
    let states = liouv.sample(&x0, 0.0, step, samples, false, Execution::Sequential)?;
    let mut pts = Vec::with_capacity(samples);
    for (k, x) in states.into_iter().enumerate() {
        let c = ket.dotc(&(x? * bra));
        pts.push((k as f64 * step, c.norm().ln()));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    Ok(-sxy / sxx)
}

/// Accumulated physicality diagnostics over propagated states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub max_trace_drift: f64,
    pub max_hermiticity_drift: f64,
    /// Most negative eigenvalue seen, clipped at zero.
    pub min_eigenvalue: f64,
    pub checks: usize,
}

impl Default for Health {
    fn default() -> Self {
        Self { max_trace_drift: 0.0, max_hermiticity_drift: 0.0, min_eigenvalue: 0.0, checks: 0 }
    }
}

pub const HEALTH_TOL: f64 = 1e-9;

impl Health {
    /// Record a state that should be a density matrix of trace `nominal`.
    pub fn record_state(&mut self, rho: &CMatrix, nominal: f64) {
        let drift = (rho.trace() - C64::new(nominal, 0.0)).norm();
        let herm = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let (vals, _) = sorted_eigh(rho);
        self.max_trace_drift = self.max_trace_drift.max(drift);
        self.max_hermiticity_drift = self.max_hermiticity_drift.max(herm);
        self.min_eigenvalue = self.min_eigenvalue.min(vals.first().copied().unwrap_or(0.0));
        self.checks += 1;
    }

    /// Record the unitality defect `|L'^t(I) - I|` of a dual-evolved
    /// identity, which bounds the trace drift of every propagated operand.
    pub fn record_unitality(&mut self, evolved_identity: &CMatrix) {
        let d = evolved_identity.nrows();
        let defect = (evolved_identity - CMatrix::identity(d, d)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        self.max_trace_drift = self.max_trace_drift.max(defect);
        self.checks += 1;
    }

    pub fn merge(&mut self, other: &Health) {
        self.max_trace_drift = self.max_trace_drift.max(other.max_trace_drift);
        self.max_hermiticity_drift = self.max_hermiticity_drift.max(other.max_hermiticity_drift);
        self.min_eigenvalue = self.min_eigenvalue.min(other.min_eigenvalue);
        self.checks += other.checks;
    }

    pub fn passes(&self) -> bool {
        self.max_trace_drift < HEALTH_TOL
            && self.max_hermiticity_drift < HEALTH_TOL
            && self.min_eigenvalue > -HEALTH_TOL
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::max_abs;
    use crate::hilbert::{build_basis, BasisSpec, BasisState};
    use crate::model::{build_polariton_hamiltonian, equilibrium_positions, phonon_network, ModelParams};
    use crate::states::{atomic_insulator, phonon_superfluid};

    fn setup(p: &ModelParams, spec: BasisSpec) -> (Liouvillian, Arc<Basis>) {
        let basis = build_basis(spec).unwrap();
        let net = phonon_network(&equilibrium_positions(spec.n_ions).unwrap(), p).unwrap();
        let h = build_polariton_hamiltonian(&net, p, &basis).unwrap();
        let z = collective_dephasing(&basis, p.gamma).unwrap();
        (build_liouvillian(&h, &[z]).unwrap(), basis)
    }

    fn coherence(basis: &Arc<Basis>, a: &BasisState, b: &BasisState) -> CMatrix {
        let mut m = CMatrix::zeros(basis.dim(), basis.dim());
        m[(basis.index_of(a).unwrap(), basis.index_of(b).unwrap())] = C64::new(1.0, 0.0);
        m
    }

    #[test]
    fn negative_rate_rejected() {
        let b = build_basis(BasisSpec::full(1, 1)).unwrap();
        assert!(collective_dephasing(&b, -0.1).is_err());
    }

    #[test]
    fn superoperator_matches_direct_application() {
        let (l, basis) = setup(&ModelParams::default(), BasisSpec::sector(2, 2, 2));
        let d = basis.dim();
        let x = CMatrix::from_fn(d, d, |i, j| C64::new((i * 3 + j) as f64 * 0.1, (i as f64 - j as f64) * 0.05));
        let via_super = unvec(&(l.superoperator() * vec_of(&x)), d);
        assert!(max_abs(&(via_super - l.apply(&x))) < 1e-10);
        let a = x.adjoint();
        let lhs = (&a * l.apply(&x)).trace();
        let rhs = (l.apply_dual(&a) * &x).trace();
        assert!((lhs - rhs).norm() < 1e-9);
    }

    #[test]
    fn zero_time_is_identity() {
        let (l, basis) = setup(&ModelParams::default(), BasisSpec::sector(2, 2, 2));
        let g = l.propagator(0.0).unwrap();
        assert!(max_abs(&(g - CMatrix::identity(64, 64))) < 1e-15);
        let rho = DensityMatrix::maximally_mixed(&basis);
        let out = propagate(&l, &rho, 0.0).unwrap();
        assert_eq!(out.matrix(), rho.matrix());
    }

    #[test]
    fn closed_system_coherence_rotates() {
        let p = ModelParams { g: 0.0, gamma: 0.0, ..Default::default() };
        let (l, _) = setup(&p, BasisSpec::sector(2, 2, 2));
        let (vals, vecs) = sorted_eigh(l.hamiltonian());
        let (i, j) = (7, 0);
        let x = vecs.column(i) * vecs.column(j).adjoint();
        let t = 0.37;
        let y = l.evolve(&x, t).unwrap();
        let expected = &x * C64::new(0.0, -(vals[i] - vals[j]) * t).exp();
        assert!(max_abs(&(y - expected)) < 1e-10);
    }

    #[test]
    fn dephasing_rates_follow_square_law() {
        let p = ModelParams { g: 0.0, gamma: 0.5, ..Default::default() };
        let (l, basis) = setup(&p, BasisSpec::sector(2, 2, 2));
        let g_ang = p.gamma_ang();
        let up_up = BasisState { spins: vec![true, true], phonons: vec![0, 0] };
        let down = BasisState { spins: vec![false, false], phonons: vec![2, 0] };
        let one = BasisState { spins: vec![true, false], phonons: vec![0, 1] };
        for (b, n) in [(&down, 2.0), (&one, 1.0)] {
            let x = coherence(&basis, &up_up, b);
            let t = 0.2;
            let y = l.evolve(&x, t).unwrap();
            let total: f64 = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let expected = (-n * n * g_ang * t).exp();
            assert!((total - expected).abs() < 1e-9, "n={n}: {total} vs {expected}");
        }
    }

    #[test]
    fn fitted_decay_rates_of_eigen_coherences() {
        let p = ModelParams { g: 0.0, gamma: 0.5, ..Default::default() };
        let (l, basis) = setup(&p, BasisSpec::sector(2, 2, 2));
        let net = phonon_network(&equilibrium_positions(2).unwrap(), &p).unwrap();
        let sf = phonon_superfluid(&basis, &net).unwrap().amplitudes().clone();
        let ati = atomic_insulator(&basis).unwrap().amplitudes().clone();
        let rate = coherence_decay_rate(&l, &ati, &sf, 0.2, 21).unwrap();
        assert!((rate / (4.0 * p.gamma_ang()) - 1.0).abs() < 1e-6);
        assert!(coherence_decay_rate(&l, &ati, &sf, 0.2, 1).is_err());
    }

    #[test]
    fn populations_survive_pure_dephasing() {
        let p = ModelParams { g: 0.0, ..Default::default() };
        let (l, basis) = setup(&p, BasisSpec::sector(2, 2, 2));
        let rho = atomic_insulator(&basis).unwrap().density();
        let out = propagate(&l, &rho, 3.0).unwrap();
        assert!(max_abs(&(out.matrix() - rho.matrix())) < 1e-10);
    }

    #[test]
    fn maximally_mixed_state_is_stationary() {
        let (l, basis) = setup(&ModelParams::default(), BasisSpec::sector(2, 2, 2));
        let rho = DensityMatrix::maximally_mixed(&basis);
        assert!(max_abs(&l.apply(rho.matrix())) < 1e-12);
    }

    #[test]
    fn decoupled_superfluid_is_stationary() {
        let p = ModelParams { g: 0.0, gamma: 0.0, ..Default::default() };
        let (l, basis) = setup(&p, BasisSpec::sector(2, 2, 2));
        let net = phonon_network(&equilibrium_positions(2).unwrap(), &p).unwrap();
        let rho = phonon_superfluid(&basis, &net).unwrap().density();
        let out = propagate(&l, &rho, 1.7).unwrap();
        assert!(max_abs(&(out.matrix() - rho.matrix())) < 1e-10);
    }

    #[test]
    fn ode_backend_agrees_with_dense() {
        let (l, basis) = setup(&ModelParams::default(), BasisSpec::sector(2, 2, 2));
        let net = phonon_network(&equilibrium_positions(2).unwrap(), &ModelParams::default()).unwrap();
        let rho = phonon_superfluid(&basis, &net).unwrap().density();
        let dense = propagate(&l, &rho, 0.5).unwrap();
        let ode = propagate(&l.clone().with_backend(Backend::Ode), &rho, 0.5).unwrap();
        assert!(max_abs(&(dense.matrix() - ode.matrix())) < 1e-8);
    }

    #[test]
    fn full_space_uses_ode_and_stays_in_sector() {
        let p = ModelParams::default();
        let (l, basis) = setup(&p, BasisSpec::full(2, 3));
        assert_eq!(l.backend(), Backend::Ode);
        let net = phonon_network(&equilibrium_positions(2).unwrap(), &p).unwrap();
        let rho = phonon_superfluid(&basis, &net).unwrap().density();
        let out = propagate(&l, &rho, 0.3).unwrap();
        assert_eq!(out.leakage_outside_sector(2), 0.0);
        let mut h = Health::default();
        h.record_state(out.matrix(), 1.0);
        assert!(h.passes(), "{h:?}");
    }

    #[test]
    fn sampled_grid_matches_direct_evolution() {
        let (l, basis) = setup(&ModelParams::default(), BasisSpec::sector(2, 2, 2));
        let rho = atomic_insulator(&basis).unwrap().density();
        for exec in [Execution::Sequential, Execution::Parallel] {
            let samples = l.sample(rho.matrix(), 0.1, 0.004, 70, false, exec).unwrap();
            let direct = l.evolve(rho.matrix(), 0.1 + 69.0 * 0.004).unwrap();
            assert!(max_abs(&(samples[69].as_ref().unwrap() - direct)) < 1e-11);
            let dual = l.sample(rho.matrix(), 0.0, 0.004, 40, true, exec).unwrap();
            let direct = l.evolve_dual(rho.matrix(), 39.0 * 0.004).unwrap();
            assert!(max_abs(&(dual[39].as_ref().unwrap() - direct)) < 1e-11);
        }
    }

    #[test]
    fn long_propagation_health() {
        let (l, basis) = setup(&ModelParams::default(), BasisSpec::sector(2, 2, 2));
        let net = phonon_network(&equilibrium_positions(2).unwrap(), &ModelParams::default()).unwrap();
        let rho = phonon_superfluid(&basis, &net).unwrap().density();
        let mut h = Health::default();
        for t in [0.5, 2.0, 5.0, 10.0] {
            h.record_state(propagate(&l, &rho, t).unwrap().matrix(), 1.0);
            h.record_unitality(&l.evolve_dual(&CMatrix::identity(8, 8), t).unwrap());
        }
        assert!(h.passes(), "{h:?}");
    }

    #[test]
    fn negative_time_rejected() {
        let (l, basis) = setup(&ModelParams::default(), BasisSpec::sector(2, 2, 2));
        let rho = DensityMatrix::maximally_mixed(&basis);
        assert!(propagate(&l, &rho, -1.0).is_err());
    }
}
