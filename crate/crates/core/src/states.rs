//! The atomic-insulator and phonon-superfluid reference states.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hilbert::{
    spin_excitation_operator, Basis, BasisState, CVector, DensityMatrix, OperatorMatrix, C64,
};
use crate::model::{build_polariton_hamiltonian, ModelParams, PhononNetwork};

#[derive(Debug, Clone)]
pub struct StateVector {
    amplitudes: CVector,
    basis: Arc<Basis>,
}

impl StateVector {
    /// Wrap amplitudes, normalizing them.
    pub fn new(amplitudes: CVector, basis: &Arc<Basis>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for a {}-dimensional basis",
                amplitudes.len(),
                basis.dim()
            )));
        }
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::StatePreparation("state has zero or non-finite norm".into()));
        }
        Ok(Self { amplitudes: amplitudes / C64::new(norm, 0.0), basis: Arc::clone(basis) })
    }

    pub fn basis_state(state: &BasisState, basis: &Arc<Basis>) -> Result<Self> {
        let i = basis
            .index_of(state)
            .ok_or_else(|| Error::StatePreparation(format!("{state} is not in the basis")))?;
        let mut v = CVector::zeros(basis.dim());
        v[i] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes: v, basis: Arc::clone(basis) })
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if *self.basis != *other.basis {
            return Err(Error::DimensionMismatch("states live in different bases".into()));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::pure(&self.amplitudes, &self.basis).expect("dimensions match by construction")
    }

    /// `⟨ψ|op|ψ⟩` for a square operator on the same basis.
    pub fn expectation(&self, op: &OperatorMatrix) -> Result<C64> {
        if !op.is_square() || **op.cols() != *self.basis {
            return Err(Error::DimensionMismatch("operator and state bases differ".into()));
        }
        Ok(self.amplitudes.dotc(&(op.matrix() * &self.amplitudes)))
    }
}

fn check_filling_one(basis: &Basis) -> Result<()> {
    if let Some(s) = basis.sector() {
        if s != basis.n_ions() {
            return Err(Error::StatePreparation(format!(
                "reference states live in sector {}, basis is restricted to sector {s}",
                basis.n_ions()
            )));
        }
    }
    Ok(())
}

/// Every ion excited, phonon vacuum.
pub fn atomic_insulator(basis: &Arc<Basis>) -> Result<StateVector> {
    check_filling_one(basis)?;
    let n = basis.n_ions();
    StateVector::basis_state(&BasisState { spins: vec![true; n], phonons: vec![0; n] }, basis)
}

/// All spins down with `N` phonons condensed in the lowest collective mode:
/// `(b_1†)^N / √N! |0⟩`, expanded as `√N! Π_k c_k1^{n_k} / √(n_k!)` over
/// occupation tuples summing to `N`.
pub fn phonon_superfluid(basis: &Arc<Basis>, network: &PhononNetwork) -> Result<StateVector> {
    check_filling_one(basis)?;
    let n = basis.n_ions();
    if network.n_ions() != n {
        return Err(Error::DimensionMismatch(format!(
            "network has {} ions but basis has {n}",
            network.n_ions()
        )));
    }
    if basis.phonon_cutoff() < n {
        return Err(Error::StatePreparation(format!(
            "phonon cutoff {} cannot hold {n} phonons in one mode; raise phonon_cutoff to at least {n}",
            basis.phonon_cutoff()
        )));
    }
    let c = network.lowest_mode();
    let ln_fact = |m: usize| -> f64 { (1..=m).map(|x| (x as f64).ln()).sum() };
    let mut v = CVector::zeros(basis.dim());
    for (i, s) in basis.states().iter().enumerate() {
        if s.spin_excitations() != 0 || s.phonon_count() != n {
            continue;
        }
        let mut amp = (0.5 * ln_fact(n)).exp();
        for (k, &occ) in s.phonons.iter().enumerate() {
            amp *= c[k].powi(occ as i32) / (0.5 * ln_fact(occ)).exp();
        }
        v[i] = C64::new(amp, 0.0);
    }
    StateVector::new(v, basis)
}

/// Overlaps of the reference states with the eigenstates they approximate.
///
/// The atomic insulator is compared with the extreme eigenstate on the side
/// of the detuning (highest for `Δ ≥ 0`, lowest otherwise); the phonon
/// superfluid with the lowest eigenstate whose spin label rounds to zero,
/// which is the global ground state for `Δ > 0`.
pub fn phase_fidelities(
    params: &ModelParams,
    basis: &Arc<Basis>,
    network: &PhononNetwork,
) -> Result<(f64, f64)> {
    if basis.sector() != Some(basis.n_ions()) {
        return Err(Error::StatePreparation("fidelities need the filling-one sector".into()));
    }
    let h = build_polariton_hamiltonian(network, params, basis)?;
    let (_, vecs) = h.eigh()?;
    let d = basis.dim();
    let ati = atomic_insulator(basis)?;
    let phsf = phonon_superfluid(basis, network)?;
    let spin = spin_excitation_operator(basis);
    let overlap = |col: usize, psi: &StateVector| vecs.column(col).dotc(psi.amplitudes()).norm_sqr();
    let ati_col = if params.delta >= 0.0 { d - 1 } else { 0 };
    let phsf_col = (0..d)
        .find(|&c| {
            let s: f64 = (0..d).map(|r| vecs[(r, c)].norm_sqr() * spin.matrix()[(r, r)].re).sum();
            s.round() == 0.0
        })
        .unwrap_or(0);
    Ok((overlap(ati_col, &ati), overlap(phsf_col, &phsf)))
}
