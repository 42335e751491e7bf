//! Ion-chain geometry, the Coulomb phonon network and the chain Hamiltonians.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::hilbert::{
    local_operator, Basis, CMatrix, LocalKind, OperatorMatrix, C64,
};

/// Linear kHz to angular kHz (rad/ms).
pub fn angular(khz: f64) -> f64 {
    2.0 * PI * khz
}

/// Physical parameters. Every frequency is linear kHz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParams {
    /// Radial trap frequency.
    pub nu_x: f64,
    /// Product of the radial trap frequency and the axial/radial stiffness ratio.
    pub hopping_scale: f64,
    pub delta: f64,
    pub g: f64,
    pub gamma: f64,
    /// Optical transition frequency; enters only the lab-frame Hamiltonian.
    pub omega_opt: f64,
    /// Lamb-Dicke parameters per mode; absorbed into the pulse normalization.
    pub eta: Vec<f64>,
    /// Effective Rabi frequency; absorbed into the pulse normalization.
    pub rabi: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            nu_x: 1000.0,
            hopping_scale: 5.0,
            delta: 50.0,
            g: 5.0,
            gamma: 0.5,
            omega_opt: 0.0,
            eta: Vec::new(),
            rabi: 1.0,
        }
    }
}

impl ModelParams {
    /// Positive-detuning parameter set.
    pub fn fig3() -> Self {
        Self::default()
    }

    /// Negative-detuning parameter set.
    pub fn fig4() -> Self {
        Self { delta: -50.0, ..Self::default() }
    }

    pub fn delta_ang(&self) -> f64 {
        angular(self.delta)
    }

    pub fn g_ang(&self) -> f64 {
        angular(self.g)
    }

    pub fn gamma_ang(&self) -> f64 {
        angular(self.gamma)
    }

    /// Reject unphysical values; return advisory warnings for parameters
    /// outside the regime where the rotating-frame model is trustworthy.
    pub fn validate(&self) -> Result<Vec<String>> {
        let named = [
            ("nu_x", self.nu_x),
            ("hopping_scale", self.hopping_scale),
            ("delta", self.delta),
            ("g", self.g),
            ("gamma", self.gamma),
            ("omega_opt", self.omega_opt),
            ("rabi", self.rabi),
        ];
        for (name, v) in named {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        if self.nu_x <= 0.0 {
            return Err(Error::InvalidParameter(format!("nu_x must be positive, got {}", self.nu_x)));
        }
        if self.gamma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gamma must be non-negative, got {}",
                self.gamma
            )));
        }
        if self.hopping_scale < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "hopping_scale must be non-negative, got {}",
                self.hopping_scale
            )));
        }
        if self.eta.iter().any(|e| !e.is_finite() || *e < 0.0) {
            return Err(Error::InvalidParameter("eta entries must be finite and non-negative".into()));
        }
        let mut warnings = Vec::new();
        for (name, v) in [("delta", self.delta), ("g", self.g), ("hopping_scale", self.hopping_scale)] {
            if v.abs() > 0.1 * self.nu_x {
                warnings.push(format!(
                    "|{name}| = {} kHz is not small against nu_x = {} kHz",
                    v.abs(),
                    self.nu_x
                ));
            }
        }
        Ok(warnings)
    }
}

/// Dimensionless equilibrium positions of a linear chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainGeometry {
    pub positions: Vec<f64>,
}

impl ChainGeometry {
    pub fn n_ions(&self) -> usize {
        self.positions.len()
    }
}

const NEWTON_MAX_ITER: usize = 200;
const NEWTON_TOL: f64 = 1e-12;

fn chain_residual(u: &DVector<f64>) -> DVector<f64> {
    let n = u.len();
    DVector::from_fn(n, |m, _| {
        let mut f = u[m];
        for j in 0..n {
            if j == m {
                continue;
            }
            let d = u[m] - u[j];
            f -= d.signum() / (d * d);
        }
        f
    })
}

fn chain_jacobian(u: &DVector<f64>) -> DMatrix<f64> {
    let n = u.len();
    let mut jac = DMatrix::zeros(n, n);
    for m in 0..n {
        jac[(m, m)] = 1.0;
        for j in 0..n {
            if j == m {
                continue;
            }
            let c = 2.0 / (u[m] - u[j]).abs().powi(3);
            jac[(m, m)] += c;
            jac[(m, j)] -= c;
        }
    }
    jac
}

/// Equilibrium of `N` ions balancing the harmonic restoring force against
/// Coulomb repulsion, in units of the axial length scale.
pub fn equilibrium_positions(n: usize) -> Result<ChainGeometry> {
    match n {
        0 => return Err(Error::InvalidParameter("chain needs at least one ion".into())),
        1 => return Ok(ChainGeometry { positions: vec![0.0] }),
        _ => {}
    }
    let half = n as f64 / 2.0;
    let mut u = DVector::from_fn(n, |i, _| 0.6 * (-half + 2.0 * half * i as f64 / (n - 1) as f64));
    let mut res = chain_residual(&u);
    let mut norm = res.amax();
    let mut iterations = 0;
    while norm >= NEWTON_TOL {
        if iterations == NEWTON_MAX_ITER {
            return Err(Error::NoConvergence { iterations, residual: norm });
        }
        iterations += 1;
        let step = chain_jacobian(&u)
            .lu()
            .solve(&res)
            .ok_or(Error::NoConvergence { iterations, residual: norm })?;
        let mut lambda = 1.0;
        loop {
            let trial = &u - &step * lambda;
            let ordered = trial.as_slice().windows(2).all(|w| w[0] < w[1]);
            if ordered {
                let trial_res = chain_residual(&trial);
                let trial_norm = trial_res.amax();
                if trial_norm < norm || lambda < 1e-6 {
                    u = trial;
                    res = trial_res;
                    norm = trial_norm;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-12 {
                return Err(Error::NoConvergence { iterations, residual: norm });
            }
        }
    }
    // the solution is reflection symmetric; remove round-off asymmetry
    let positions: Vec<f64> = (0..n).map(|i| 0.5 * (u[i] - u[n - 1 - i])).collect();
    Ok(ChainGeometry { positions })
}

/// Local frequencies, Coulomb hoppings and the resulting normal modes, all
/// in angular kHz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhononNetwork {
    pub local_freqs: Vec<f64>,
    pub hoppings: DMatrix<f64>,
    /// Ascending; mode 1 is the lowest.
    pub mode_freqs: Vec<f64>,
    /// Column `n` holds the local coefficients `c_kn` of mode `n + 1`.
    pub mode_vectors: DMatrix<f64>,
}

impl PhononNetwork {
    pub fn n_ions(&self) -> usize {
        self.local_freqs.len()
    }

    /// Coefficients `c_k1` of the lowest mode.
    pub fn lowest_mode(&self) -> Vec<f64> {
        self.mode_vectors.column(0).iter().copied().collect()
    }

    /// Single-phonon coupling matrix: `ω_k` on the diagonal, `t_kl` off it.
    pub fn coupling_matrix(&self) -> DMatrix<f64> {
        let mut m = self.hoppings.clone();
        for k in 0..self.n_ions() {
            m[(k, k)] = self.local_freqs[k];
        }
        m
    }
}

pub fn phonon_network(geometry: &ChainGeometry, params: &ModelParams) -> Result<PhononNetwork> {
    let u = &geometry.positions;
    let n = u.len();
    if n == 0 {
        return Err(Error::InvalidParameter("empty chain".into()));
    }
    let scale = angular(params.hopping_scale);
    let mut hoppings = DMatrix::zeros(n, n);
    for k in 0..n {
        for l in (k + 1)..n {
            let d = (u[k] - u[l]).abs();
            if d < 1e-12 {
                return Err(Error::CoincidentPositions(k + 1, l + 1));
            }
            let t = scale / (2.0 * d.powi(3));
            hoppings[(k, l)] = t;
            hoppings[(l, k)] = t;
        }
    }
    let local_freqs: Vec<f64> = (0..n).map(|k| -hoppings.row(k).sum()).collect();
    let mut coupling = hoppings.clone();
    for k in 0..n {
        coupling[(k, k)] = local_freqs[k];
    }
    let eig = SymmetricEigen::new(coupling);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let mut mode_vectors = DMatrix::zeros(n, n);
    let mut mode_freqs = Vec::with_capacity(n);
    for (col, &src) in order.iter().enumerate() {
        mode_freqs.push(eig.eigenvalues[src]);
        let v = eig.eigenvectors.column(src);
        let pivot = v.iter().find(|x| x.abs() > 1e-9).copied().unwrap_or(1.0);
        let sign = pivot.signum();
        for k in 0..n {
            mode_vectors[(k, col)] = sign * v[k];
        }
    }
    Ok(PhononNetwork { local_freqs, hoppings, mode_freqs, mode_vectors })
}

fn check_chain(network: &PhononNetwork, basis: &Arc<Basis>) -> Result<()> {
    if network.n_ions() != basis.n_ions() {
        return Err(Error::DimensionMismatch(format!(
            "network has {} ions but basis has {}",
            network.n_ions(),
            basis.n_ions()
        )));
    }
    Ok(())
}

/// `a_k† a_l` as a square operator on `basis`.
fn hop(k: usize, l: usize, basis: &Arc<Basis>) -> Result<OperatorMatrix> {
    let a = local_operator(LocalKind::Annihilate, l, basis)?;
    let ad = local_operator(LocalKind::Create, k, a.rows())?;
    ad.compose(&a)
}

/// Phonon part shared by both Hamiltonians, with `offset` added to every
/// local frequency.
fn phonon_part(network: &PhononNetwork, offset: f64, basis: &Arc<Basis>) -> Result<CMatrix> {
    let n = network.n_ions();
    let freqs: Vec<f64> = network.local_freqs.iter().map(|w| w + offset).collect();
    let mut h = OperatorMatrix::diagonal(basis, |s| {
        s.phonons.iter().zip(&freqs).map(|(&p, w)| p as f64 * w).sum()
    })
    .into_matrix();
    for k in 1..=n {
        for l in (k + 1)..=n {
            let t = network.hoppings[(k - 1, l - 1)];
            if t == 0.0 {
                continue;
            }
            let kl = hop(k, l, basis)?;
            h += (kl.matrix() + kl.matrix().adjoint()) * C64::new(t, 0.0);
        }
    }
    Ok(h)
}

/// Rotating-frame polariton Hamiltonian
/// `Σ ω_k a_k†a_k + Σ t_kl (a_k†a_l + h.c.) + Δ Σ σ_k⁺σ_k⁻ + g Σ (σ_k⁺a_k + h.c.)`.
pub fn build_polariton_hamiltonian(
    network: &PhononNetwork,
    params: &ModelParams,
    basis: &Arc<Basis>,
) -> Result<OperatorMatrix> {
    check_chain(network, basis)?;
    let mut h = phonon_part(network, 0.0, basis)?;
    let delta = params.delta_ang();
    for (i, s) in basis.states().iter().enumerate() {
        h[(i, i)] += C64::new(delta * s.spin_excitations() as f64, 0.0);
    }
    let g = params.g_ang();
    if g != 0.0 {
        for k in 1..=network.n_ions() {
            let a = local_operator(LocalKind::Annihilate, k, basis)?;
            let sp = local_operator(LocalKind::SigmaPlus, k, a.rows())?;
            let jc = sp.compose(&a)?;
            h += (jc.matrix() + jc.matrix().adjoint()) * C64::new(g, 0.0);
        }
    }
    OperatorMatrix::square(h, basis)
}

/// Lab-frame motional Hamiltonian with phonons at `ν_x + ω_k` and the bare
/// optical splitting on the spins.
pub fn build_motional_hamiltonian(
    network: &PhononNetwork,
    params: &ModelParams,
    basis: &Arc<Basis>,
) -> Result<OperatorMatrix> {
    check_chain(network, basis)?;
    let mut h = phonon_part(network, angular(params.nu_x), basis)?;
    let w = angular(params.omega_opt);
    for (i, s) in basis.states().iter().enumerate() {
        h[(i, i)] += C64::new(w * s.spin_excitations() as f64, 0.0);
    }
    OperatorMatrix::square(h, basis)
}

/// Collective mode annihilator `b_n = Σ_k c_kn a_k` (`mode` is 1-based).
pub fn mode_annihilation(
    network: &PhononNetwork,
    mode: usize,
    basis: &Arc<Basis>,
) -> Result<OperatorMatrix> {
    check_chain(network, basis)?;
    let n = network.n_ions();
    if mode == 0 || mode > n {
        return Err(Error::InvalidParameter(format!("mode {mode} out of range 1..={n}")));
    }
    let ops = (1..=n)
        .map(|k| local_operator(LocalKind::Annihilate, k, basis))
        .collect::<Result<Vec<_>>>()?;
    OperatorMatrix::linear_combination(
        ops.iter().enumerate().map(|(k, op)| (C64::new(network.mode_vectors[(k, mode - 1)], 0.0), op)),
    )
}

/// Whether a rounded spin label can be trusted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelConfidence {
    High,
    Low,
}

impl LabelConfidence {
    pub fn as_str(self) -> &'static str {
        match self {
            LabelConfidence::High => "high",
            LabelConfidence::Low => "low",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub delta_over_g: f64,
    pub eig_index: usize,
    pub energy_angular_khz: f64,
    pub spin_expectation: f64,
    pub spin_label: usize,
    pub label_confidence: LabelConfidence,
}

const DEGENERACY_TOL: f64 = 1e-9;

/// Diagonalize the Hamiltonian at each `Δ/g` (with `g` held fixed) and label
/// eigenstates by their rounded spin-excitation number.
pub fn eigensweep(
    params: &ModelParams,
    basis: &Arc<Basis>,
    delta_over_g: &[f64],
    exec: Execution,
) -> Result<Vec<SweepRow>> {
    if basis.sector().is_none() {
        return Err(Error::InvalidBasis("eigensweep needs a sector-restricted basis".into()));
    }
    if params.g == 0.0 {
        return Err(Error::InvalidParameter("eigensweep holds g fixed; g must be nonzero".into()));
    }
    let geometry = equilibrium_positions(basis.n_ions())?;
    let network = phonon_network(&geometry, params)?;
    let spin = crate::hilbert::spin_excitation_operator(basis);
    let per_point = exec.map(delta_over_g.len(), |i| -> Result<Vec<SweepRow>> {
        let ratio = delta_over_g[i];
        let p = ModelParams { delta: ratio * params.g, ..params.clone() };
        let h = build_polariton_hamiltonian(&network, &p, basis)?;
        let (vals, vecs) = h.eigh()?;
        let mut rows: Vec<SweepRow> = vals
            .iter()
            .enumerate()
            .map(|(c, &e)| {
                let v = vecs.column(c);
                let s: f64 = (0..v.len()).map(|r| v[r].norm_sqr() * spin.matrix()[(r, r)].re).sum();
                let frac = s - s.floor();
                let confidence = if frac > 0.25 && frac < 0.75 {
                    LabelConfidence::Low
                } else {
                    LabelConfidence::High
                };
                SweepRow {
                    delta_over_g: ratio,
                    eig_index: 0,
                    energy_angular_khz: e,
                    spin_expectation: s,
                    spin_label: s.round().max(0.0) as usize,
                    label_confidence: confidence,
                }
            })
            .collect();
        rows.sort_by(|a, b| {
            if (a.energy_angular_khz - b.energy_angular_khz).abs() <= DEGENERACY_TOL {
                a.spin_label.cmp(&b.spin_label)
            } else {
                a.energy_angular_khz.total_cmp(&b.energy_angular_khz)
            }
        });
        for (idx, r) in rows.iter_mut().enumerate() {
            r.eig_index = idx;
        }
        Ok(rows)
    });
    let mut out = Vec::new();
    for rows in per_point {
        out.extend(rows?);
    }
    Ok(out)
}
