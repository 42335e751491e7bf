//! Composite spin ⊗ phonon Hilbert spaces and dense operator algebra.
//!
//! A basis state is a spin configuration for `N` two-level ions together with
//! the occupation of each ion's local phonon mode. Bases are enumerated in
//! tensor-product order `spin_1 ⊗ … ⊗ spin_N ⊗ phonon_1 ⊗ … ⊗ phonon_N`
//! with the first factor varying slowest and `↓ < ↑`, so for one ion with
//! cutoff 1 the order is `(↓,0), (↓,1), (↑,0), (↑,1)`. Restricting to an
//! excitation sector keeps the states of that sector in the same relative
//! order.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Shape of a composite space: ion count, per-mode phonon cutoff and an
/// optional total-excitation sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisSpec {
    pub n_ions: usize,
    pub phonon_cutoff: usize,
    pub sector: Option<usize>,
}

impl BasisSpec {
    pub fn full(n_ions: usize, phonon_cutoff: usize) -> Self {
        Self { n_ions, phonon_cutoff, sector: None }
    }

    /// Full space with the default cutoff `N + 1`, one level above anything
    /// the filling-one dynamics can reach.
    pub fn default_full(n_ions: usize) -> Self {
        Self::full(n_ions, n_ions + 1)
    }

    pub fn sector(n_ions: usize, phonon_cutoff: usize, sector: usize) -> Self {
        Self { n_ions, phonon_cutoff, sector: Some(sector) }
    }

    /// The filling-one sector (`N` excitations on `N` ions).
    pub fn filling_one(n_ions: usize) -> Self {
        Self::sector(n_ions, n_ions, n_ions)
    }

    pub fn full_dimension(&self) -> usize {
        (1usize << self.n_ions) * (self.phonon_cutoff + 1).pow(self.n_ions as u32)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasisState {
    /// `true` is the excited (↑) level.
    pub spins: Vec<bool>,
    pub phonons: Vec<usize>,
}

impl BasisState {
    pub fn spin_excitations(&self) -> usize {
        self.spins.iter().filter(|&&s| s).count()
    }

    pub fn phonon_count(&self) -> usize {
        self.phonons.iter().sum()
    }

    pub fn excitations(&self) -> usize {
        self.spin_excitations() + self.phonon_count()
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for &s in &self.spins {
            write!(f, "{}", if s { '↑' } else { '↓' })?;
        }
        write!(f, ";")?;
        for (i, n) in self.phonons.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, "⟩")
    }
}

/// Ordered basis with a reverse index.
#[derive(Debug, Clone)]
pub struct Basis {
    n_ions: usize,
    cutoff: usize,
    sector: Option<usize>,
    states: Vec<BasisState>,
    index: HashMap<BasisState, usize>,
}

impl PartialEq for Basis {
    fn eq(&self, other: &Self) -> bool {
        self.n_ions == other.n_ions && self.cutoff == other.cutoff && self.sector == other.sector
    }
}

impl Basis {
    /// Enumerate without validating the cutoff against the sector. Used for
    /// the neighbouring sectors reached by ladder operators.
    pub(crate) fn enumerate(n_ions: usize, cutoff: usize, sector: Option<usize>) -> Self {
        let levels = cutoff + 1;
        let n_phonon_codes = levels.pow(n_ions as u32);
        let mut states = Vec::new();
        for spin_code in 0..(1usize << n_ions) {
            let spins: Vec<bool> =
                (0..n_ions).map(|k| (spin_code >> (n_ions - 1 - k)) & 1 == 1).collect();
            let n_up = spins.iter().filter(|&&s| s).count();
            if let Some(s) = sector {
                if n_up > s {
                    continue;
                }
            }
            for code in 0..n_phonon_codes {
                let mut phonons = vec![0usize; n_ions];
                let mut rest = code;
                for k in (0..n_ions).rev() {
                    phonons[k] = rest % levels;
                    rest /= levels;
                }
                if let Some(s) = sector {
                    if n_up + phonons.iter().sum::<usize>() != s {
                        continue;
                    }
                }
                states.push(BasisState { spins: spins.clone(), phonons });
            }
        }
        let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        Self { n_ions, cutoff, sector, states, index }
    }

    pub fn n_ions(&self) -> usize {
        self.n_ions
    }

    pub fn phonon_cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn sector(&self) -> Option<usize> {
        self.sector
    }

    pub fn spec(&self) -> BasisSpec {
        BasisSpec { n_ions: self.n_ions, phonon_cutoff: self.cutoff, sector: self.sector }
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &BasisState {
        &self.states[i]
    }

    pub fn index_of(&self, state: &BasisState) -> Option<usize> {
        self.index.get(state).copied()
    }

    /// Basis for a neighbouring sector with the same cutoff, or the same
    /// basis in full-space mode.
    fn shifted(self: &Arc<Self>, delta: isize) -> Result<Arc<Basis>> {
        match self.sector {
            None => Ok(Arc::clone(self)),
            Some(_) if delta == 0 => Ok(Arc::clone(self)),
            Some(n) => {
                let target = n as isize + delta;
                if target < 0 {
                    return Err(Error::InvalidBasis(format!(
                        "operator maps sector {n} below the vacuum"
                    )));
                }
                Ok(Arc::new(Basis::enumerate(self.n_ions, self.cutoff, Some(target as usize))))
            }
        }
    }
}

/// Enumerate the basis described by `spec`.
pub fn build_basis(spec: BasisSpec) -> Result<Arc<Basis>> {
    if spec.n_ions == 0 {
        return Err(Error::InvalidBasis("at least one ion is required".into()));
    }
    if spec.n_ions > 16 {
        return Err(Error::InvalidBasis(format!("{} ions exceed the dense-matrix limit", spec.n_ions)));
    }
    if let Some(sector) = spec.sector {
        let max = spec.n_ions * spec.phonon_cutoff + spec.n_ions;
        if sector > max {
            return Err(Error::EmptySector {
                sector,
                n_ions: spec.n_ions,
                cutoff: spec.phonon_cutoff,
                max,
            });
        }
        if spec.phonon_cutoff < sector {
            return Err(Error::TruncatedSector { cutoff: spec.phonon_cutoff, sector });
        }
    }
    Ok(Arc::new(Basis::enumerate(spec.n_ions, spec.phonon_cutoff, spec.sector)))
}

/// Single-site ladder and Pauli operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalKind {
    SigmaPlus,
    SigmaMinus,
    SigmaZ,
    Annihilate,
    Create,
}

impl LocalKind {
    pub fn excitation_change(self) -> isize {
        match self {
            LocalKind::SigmaPlus | LocalKind::Create => 1,
            LocalKind::SigmaMinus | LocalKind::Annihilate => -1,
            LocalKind::SigmaZ => 0,
        }
    }

    fn apply(self, k: usize, state: &BasisState, cutoff: usize) -> Option<(BasisState, f64)> {
        let mut out = state.clone();
        match self {
            LocalKind::SigmaPlus => {
                if state.spins[k] {
                    return None;
                }
                out.spins[k] = true;
                Some((out, 1.0))
            }
            LocalKind::SigmaMinus => {
                if !state.spins[k] {
                    return None;
                }
                out.spins[k] = false;
                Some((out, 1.0))
            }
            LocalKind::SigmaZ => Some((out, if state.spins[k] { 1.0 } else { -1.0 })),
            LocalKind::Annihilate => {
                let n = state.phonons[k];
                if n == 0 {
                    return None;
                }
                out.phonons[k] = n - 1;
                Some((out, (n as f64).sqrt()))
            }
            LocalKind::Create => {
                let n = state.phonons[k];
                if n >= cutoff {
                    return None;
                }
                out.phonons[k] = n + 1;
                Some((out, ((n + 1) as f64).sqrt()))
            }
        }
    }
}

/// A dense linear map from the `cols` basis into the `rows` basis.
///
/// Inside a sector-restricted space, ladder operators change the excitation
/// number, so their row and column bases differ; products are checked for
/// compatible bases.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    matrix: CMatrix,
    rows: Arc<Basis>,
    cols: Arc<Basis>,
}

impl OperatorMatrix {
    pub fn new(matrix: CMatrix, rows: Arc<Basis>, cols: Arc<Basis>) -> Result<Self> {
        if matrix.nrows() != rows.dim() || matrix.ncols() != cols.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for a {}x{} map",
                matrix.nrows(),
                matrix.ncols(),
                rows.dim(),
                cols.dim()
            )));
        }
        Ok(Self { matrix, rows, cols })
    }

    pub fn square(matrix: CMatrix, basis: &Arc<Basis>) -> Result<Self> {
        Self::new(matrix, Arc::clone(basis), Arc::clone(basis))
    }

    pub fn identity(basis: &Arc<Basis>) -> Self {
        let d = basis.dim();
        Self { matrix: CMatrix::identity(d, d), rows: Arc::clone(basis), cols: Arc::clone(basis) }
    }

    pub fn zeros(rows: &Arc<Basis>, cols: &Arc<Basis>) -> Self {
        Self {
            matrix: CMatrix::zeros(rows.dim(), cols.dim()),
            rows: Arc::clone(rows),
            cols: Arc::clone(cols),
        }
    }

    pub fn diagonal<F: Fn(&BasisState) -> f64>(basis: &Arc<Basis>, f: F) -> Self {
        let d = basis.dim();
        let mut m = CMatrix::zeros(d, d);
        for (i, s) in basis.states().iter().enumerate() {
            m[(i, i)] = C64::new(f(s), 0.0);
        }
        Self { matrix: m, rows: Arc::clone(basis), cols: Arc::clone(basis) }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn rows(&self) -> &Arc<Basis> {
        &self.rows
    }

    pub fn cols(&self) -> &Arc<Basis> {
        &self.cols
    }

    /// Dimension of a square operator (column dimension otherwise).
    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn is_square(&self) -> bool {
        *self.rows == *self.cols
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            rows: Arc::clone(&self.cols),
            cols: Arc::clone(&self.rows),
        }
    }

    /// `self · rhs`.
    pub fn compose(&self, rhs: &OperatorMatrix) -> Result<Self> {
        if *self.cols != *rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose maps over sectors {:?} and {:?}",
                self.cols.sector(),
                rhs.rows.sector()
            )));
        }
        Ok(Self {
            matrix: &self.matrix * &rhs.matrix,
            rows: Arc::clone(&self.rows),
            cols: Arc::clone(&rhs.cols),
        })
    }

    fn check_same_shape(&self, rhs: &OperatorMatrix) -> Result<()> {
        if *self.rows != *rhs.rows || *self.cols != *rhs.cols {
            return Err(Error::DimensionMismatch("operators act between different bases".into()));
        }
        Ok(())
    }

    pub fn add(&self, rhs: &OperatorMatrix) -> Result<Self> {
        self.check_same_shape(rhs)?;
        Ok(Self { matrix: &self.matrix + &rhs.matrix, ..self.clone() })
    }

    pub fn sub(&self, rhs: &OperatorMatrix) -> Result<Self> {
        self.check_same_shape(rhs)?;
        Ok(Self { matrix: &self.matrix - &rhs.matrix, ..self.clone() })
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { matrix: &self.matrix * c, ..self.clone() }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    /// `Σ c_i O_i` over operators sharing row and column bases.
    pub fn linear_combination<'a, I>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (C64, &'a OperatorMatrix)>,
    {
        let mut acc: Option<OperatorMatrix> = None;
        for (c, op) in terms {
            let scaled = op.scale(c);
            acc = Some(match acc {
                None => scaled,
                Some(a) => a.add(&scaled)?,
            });
        }
        acc.ok_or_else(|| Error::DimensionMismatch("empty linear combination".into()))
    }

    /// `[self, rhs]` for square operators on one basis.
    pub fn commutator(&self, rhs: &OperatorMatrix) -> Result<Self> {
        self.compose(rhs)?.sub(&rhs.compose(self)?)
    }

    pub fn power(&self, k: usize) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("power of a non-square map".into()));
        }
        let mut out = OperatorMatrix::identity(&self.rows);
        for _ in 0..k {
            out = out.compose(self)?;
        }
        Ok(out)
    }

    pub fn max_norm(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn hermiticity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    pub fn apply(&self, v: &CVector) -> Result<CVector> {
        if v.len() != self.matrix.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for a map on dimension {}",
                v.len(),
                self.matrix.ncols()
            )));
        }
        Ok(&self.matrix * v)
    }

    /// Eigen-decomposition of a Hermitian operator, eigenvalues ascending.
    pub fn eigh(&self) -> Result<(Vec<f64>, CMatrix)> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("eigen-decomposition of a non-square map".into()));
        }
        Ok(sorted_eigh(&self.matrix))
    }
}

/// Largest entry magnitude.
pub fn max_abs<R: nalgebra::Dim, C: nalgebra::Dim, S: nalgebra::RawStorage<C64, R, C>>(
    m: &nalgebra::Matrix<C64, R, C, S>,
) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Hermitian eigen-decomposition with eigenvalues ascending and each
/// eigenvector phase-fixed so its largest component is real positive.
pub fn sorted_eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let d = m.nrows();
    let mut vecs = CMatrix::zeros(d, d);
    let mut vals = Vec::with_capacity(d);
    for (col, &src) in order.iter().enumerate() {
        vals.push(eig.eigenvalues[src]);
        let v = eig.eigenvectors.column(src);
        let (imax, _) = v
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, z)| if z.norm() > acc.1 + 1e-12 { (i, z.norm()) } else { acc });
        let phase = if v[imax].norm() > 0.0 { v[imax].conj() / v[imax].norm() } else { ONE };
        for r in 0..d {
            vecs[(r, col)] = v[r] * phase;
        }
    }
    (vals, vecs)
}

/// Operator of `kind` on `site` (1-based), identity on every other factor.
///
/// In a sector-restricted basis the result maps the sector into the sector
/// reached by the operator (the same sector for `SigmaZ`).
pub fn local_operator(kind: LocalKind, site: usize, basis: &Arc<Basis>) -> Result<OperatorMatrix> {
    let n = basis.n_ions();
    if site == 0 || site > n {
        return Err(Error::InvalidSite { site, n_ions: n });
    }
    let k = site - 1;
    let target = basis.shifted(kind.excitation_change())?;
    let mut m = CMatrix::zeros(target.dim(), basis.dim());
    for (col, state) in basis.states().iter().enumerate() {
        if let Some((out, amp)) = kind.apply(k, state, basis.phonon_cutoff()) {
            if let Some(row) = target.index_of(&out) {
                m[(row, col)] += C64::new(amp, 0.0);
            }
        }
    }
    OperatorMatrix::new(m, target, Arc::clone(basis))
}

/// Total excitation number `Σ_k (a_k†a_k + σ_k⁺σ_k⁻)`.
pub fn number_operator(basis: &Arc<Basis>) -> OperatorMatrix {
    OperatorMatrix::diagonal(basis, |s| s.excitations() as f64)
}

/// Spin-excitation count `Σ_k σ_k⁺σ_k⁻`.
pub fn spin_excitation_operator(basis: &Arc<Basis>) -> OperatorMatrix {
    OperatorMatrix::diagonal(basis, |s| s.spin_excitations() as f64)
}

/// Excited-state projector `σ_j⁺σ_j⁻` of ion `site` (1-based).
pub fn spin_population(site: usize, basis: &Arc<Basis>) -> Result<OperatorMatrix> {
    if site == 0 || site > basis.n_ions() {
        return Err(Error::InvalidSite { site, n_ions: basis.n_ions() });
    }
    Ok(OperatorMatrix::diagonal(basis, |s| if s.spins[site - 1] { 1.0 } else { 0.0 }))
}

/// Collective `Σ_k σ_k^z`.
pub fn collective_sigma_z(basis: &Arc<Basis>) -> OperatorMatrix {
    OperatorMatrix::diagonal(basis, |s| {
        s.spins.iter().map(|&up| if up { 1.0 } else { -1.0 }).sum()
    })
}

/// Projector onto excitation sector `n` inside a full-space basis.
pub fn sector_projector(basis: &Arc<Basis>, n: usize) -> OperatorMatrix {
    OperatorMatrix::diagonal(basis, |s| if s.excitations() == n { 1.0 } else { 0.0 })
}

/// Density operator, or any density-matrix-shaped object such as a single
/// Liouville pathway term (which need not be Hermitian or unit-trace).
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: CMatrix,
    basis: Arc<Basis>,
}

/// Tolerances a propagated physical state must satisfy.
pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-9;
pub const POSITIVITY_TOL: f64 = 1e-9;

impl DensityMatrix {
    pub fn new(matrix: CMatrix, basis: &Arc<Basis>) -> Result<Self> {
        if matrix.nrows() != basis.dim() || matrix.ncols() != basis.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} density matrix on a {}-dimensional basis",
                matrix.nrows(),
                matrix.ncols(),
                basis.dim()
            )));
        }
        Ok(Self { matrix, basis: Arc::clone(basis) })
    }

    pub fn pure(amplitudes: &CVector, basis: &Arc<Basis>) -> Result<Self> {
        Self::new(amplitudes * amplitudes.adjoint(), basis)
    }

    /// `I / dim`.
    pub fn maximally_mixed(basis: &Arc<Basis>) -> Self {
        let d = basis.dim();
        Self { matrix: CMatrix::identity(d, d) / C64::new(d as f64, 0.0), basis: Arc::clone(basis) }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { matrix: &self.matrix * c, basis: Arc::clone(&self.basis) }
    }

    pub fn adjoint(&self) -> Self {
        Self { matrix: self.matrix.adjoint(), basis: Arc::clone(&self.basis) }
    }

    pub fn with_matrix(&self, matrix: CMatrix) -> Self {
        Self { matrix, basis: Arc::clone(&self.basis) }
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let (vals, _) = sorted_eigh(&self.matrix);
        vals.first().copied().unwrap_or(0.0)
    }

    /// Check the physical-state invariants against a nominal trace.
    pub fn check_physical(&self, nominal_trace: f64) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidParameter(format!("density matrix not Hermitian ({herm:e})")));
        }
        let drift = (self.trace() - C64::new(nominal_trace, 0.0)).norm();
        if drift > TRACE_TOL {
            return Err(Error::InvalidParameter(format!("trace drift {drift:e}")));
        }
        let min = self.min_eigenvalue();
        if min < -POSITIVITY_TOL {
            return Err(Error::InvalidParameter(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// Largest magnitude among entries whose row or column lies outside
    /// excitation sector `n`.
    pub fn leakage_outside_sector(&self, n: usize) -> f64 {
        let inside: Vec<bool> = self.basis.states().iter().map(|s| s.excitations() == n).collect();
        let mut worst: f64 = 0.0;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                if !(inside[i] && inside[j]) {
                    worst = worst.max(self.matrix[(i, j)].norm());
                }
            }
        }
        worst
    }
}

/// `tr(op · rho)`.
pub fn expectation(op: &OperatorMatrix, rho: &DensityMatrix) -> Result<C64> {
    if !op.is_square() || **op.cols() != **rho.basis() {
        return Err(Error::DimensionMismatch(format!(
            "operator on dimension {} and state on dimension {}",
            op.dim(),
            rho.dim()
        )));
    }
    let a = op.matrix();
    let r = rho.matrix();
    let d = rho.dim();
    let mut acc = ZERO;
    for i in 0..d {
        for j in 0..d {
            acc += a[(i, j)] * r[(j, i)];
        }
    }
    Ok(acc)
}
