//! One-sided excitation superoperators and phase-cycled pathway extraction.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::Liouvillian;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::hilbert::{local_operator, Basis, CMatrix, DensityMatrix, LocalKind, OperatorMatrix, C64};
use crate::model::{mode_annihilation, PhononNetwork};

/// Which side of the density matrix a kick multiplies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// `J_+ b_1 = (Σ_k c_k1 σ_k⁺)(Σ_k c_k1 a_k)`, a square operator on `basis`.
pub fn excitation_operator(network: &PhononNetwork, basis: &Arc<Basis>) -> Result<OperatorMatrix> {
    let b1 = mode_annihilation(network, 1, basis)?;
    let c = network.lowest_mode();
    let raise = (1..=basis.n_ions())
        .map(|k| local_operator(LocalKind::SigmaPlus, k, b1.rows()))
        .collect::<Result<Vec<_>>>()?;
    let j_plus = OperatorMatrix::linear_combination(
        raise.iter().zip(&c).map(|(op, &ck)| (C64::new(ck, 0.0), op)),
    )?;
    j_plus.compose(&b1)
}

/// `count` applications of the excitation operator on the ket (left) or of
/// its adjoint on the bra (right).
#[derive(Debug, Clone)]
pub struct PathwayKick {
    side: Side,
    operator: OperatorMatrix,
    count: usize,
    power: CMatrix,
}

impl PathwayKick {
    /// `ρ ↦ A^count ρ`.
    pub fn left(excitation: &OperatorMatrix, count: usize) -> Result<Self> {
        let power = excitation.power(count)?.into_matrix();
        Ok(Self { side: Side::Left, operator: excitation.clone(), count, power })
    }

    /// `ρ ↦ ρ (A†)^count`.
    pub fn right(excitation: &OperatorMatrix, count: usize) -> Result<Self> {
        let adj = excitation.adjoint();
        let power = adj.power(count)?.into_matrix();
        Ok(Self { side: Side::Right, operator: adj, count, power })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// The operator multiplying on `side`.
    pub fn operator(&self) -> &OperatorMatrix {
        &self.operator
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// The operator raised to `count`.
    pub fn power(&self) -> &CMatrix {
        &self.power
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        match self.side {
            Side::Left => &self.power * x,
            Side::Right => x * &self.power,
        }
    }

    /// Dual action defined by `tr(a K(x)) = tr(K'(a) x)`.
    pub fn apply_dual(&self, a: &CMatrix) -> CMatrix {
        match self.side {
            Side::Left => a * &self.power,
            Side::Right => &self.power * a,
        }
    }
}

/// Apply a kick. The output represents one Liouville pathway and is in
/// general neither Hermitian nor trace-normalized.
pub fn pathway_kick(rho: &DensityMatrix, kick: &PathwayKick) -> Result<DensityMatrix> {
    if **rho.basis() != **kick.operator.rows() {
        return Err(Error::DimensionMismatch("kick and state bases differ".into()));
    }
    Ok(rho.with_matrix(kick.apply(rho.matrix())))
}

/// `exp(-i ε K(φ))` with `K(φ) = i(e^{iφ} A - e^{-iφ} A†)/2`, i.e.
/// `exp((ε/2)(e^{iφ} A - e^{-iφ} A†))`.
pub fn pulse_unitary(a: &CMatrix, epsilon: f64, phi: f64) -> CMatrix {
    let e = C64::new(0.0, phi).exp();
    let gen = (a * e - a.adjoint() * e.conj()) * C64::new(0.5 * epsilon, 0.0);
    gen.exp()
}

/// Phase-cycling protocol: `points × points` phase pairs on a uniform grid,
/// pulses of area `epsilon`, isolating phase order `excitations`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseCycle {
    pub excitations: usize,
    pub epsilon: f64,
    pub points: usize,
}

impl PhaseCycle {
    /// Smallest grid that keeps order `N` free of aliasing from orders
    /// `N ± M` up to the first correction.
    pub fn required_points(&self) -> usize {
        2 * self.excitations + 2
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < self.required_points() {
            return Err(Error::PhaseAliasing { points: self.points, required: self.required_points() });
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!("pulse area must be positive, got {}", self.epsilon)));
        }
        Ok(())
    }

    /// Leading coefficient `(ε/2)^N / N!` of the order-`N` term of one pulse.
    pub fn leading_coefficient(&self) -> f64 {
        let n = self.excitations as i32;
        let fact: f64 = (1..=self.excitations).map(|k| k as f64).product();
        (0.5 * self.epsilon).powi(n) / fact
    }
}

/// Phase-cycled component with signature `e^{i(o1 φ1 + o2 φ2)}` of the
/// two-pulse pathway `G(t2)(U(φ1) ρ0) U(φ2)†`, where the first pulse acts on
/// the ket and the second on the bra.
///
/// The `M × M` grid of runs is summed in factorized form, which is exact by
/// linearity of `G` and keeps the cancellation of low phase orders inside
/// each single-pulse sum, where it costs `ε^N` rather than `ε^{2N}` digits.
pub fn phase_order_component(
    liouv: &Liouvillian,
    rho0: &CMatrix,
    excitation: &OperatorMatrix,
    cycle: &PhaseCycle,
    t2: f64,
    orders: (i64, i64),
    exec: Execution,
) -> Result<CMatrix> {
    cycle.validate()?;
    let m = cycle.points;
    let phases: Vec<f64> = (0..m).map(|k| 2.0 * PI * k as f64 / m as f64).collect();
    let a = excitation.matrix();
    let pulses: Vec<CMatrix> = exec.map(m, |p| pulse_unitary(a, cycle.epsilon, phases[p]));
    let project = |order: i64, conj: bool| -> CMatrix {
        let d = a.nrows();
        let mut acc = CMatrix::zeros(d, d);
        for (p, u) in pulses.iter().enumerate() {
            let w = C64::new(0.0, -(order as f64) * phases[p]).exp();
            if conj {
                acc += u.adjoint() * w;
            } else {
                acc += u * w;
            }
        }
        acc / C64::new(m as f64, 0.0)
    };
    let first = project(orders.0, false);
    let second = project(orders.1, true);
    let mid = liouv.evolve(&(first * rho0), t2)?;
    Ok(mid * second)
}

/// Isolate the `N(φ1 - φ2)` component and rescale by the leading pulse
/// coefficients so it converges to `G(t2)(A^N ρ0)(A†)^N` as `ε → 0`.
pub fn phase_cycle_extract(
    liouv: &Liouvillian,
    rho0: &DensityMatrix,
    excitation: &OperatorMatrix,
    cycle: &PhaseCycle,
    t2: f64,
    exec: Execution,
) -> Result<DensityMatrix> {
    let n = cycle.excitations as i64;
    let raw = phase_order_component(liouv, rho0.matrix(), excitation, cycle, t2, (n, -n), exec)?;
    let scale = cycle.leading_coefficient().powi(2);
    Ok(rho0.with_matrix(raw / C64::new(scale, 0.0)))
}
