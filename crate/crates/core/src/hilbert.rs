//! Truncated Fock spaces, states, operators, and exact-diagonalisation
//! evolution.
//!
//! Everything downstream works in a finite photon-number basis, so the one
//! invariant that matters globally lives here: a state constructor measures
//! how much probability the truncation discards and refuses to hand out
//! states that silently leak.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Leakage gate applied by the default state constructors.
pub const DEFAULT_LEAKAGE_TOL: f64 = 1e-10;

/// Max |H - H^dag| element tolerated before evolution refuses the generator.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Single bosonic mode truncated to `dim` Fock levels `|0..dim-1>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FockSpace {
    dim: usize,
}

impl FockSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Input(format!(
                "Fock space needs dim >= 2, got {dim}"
            )));
        }
        Ok(Self { dim })
    }

    /// Smallest truncation that keeps coherent-state leakage negligible for
    /// amplitudes up to `|alpha|`: dim = ceil(|a|^2 + 6|a| + 10).
    pub fn for_amplitude(alpha: C64) -> Self {
        let a = alpha.norm();
        let dim = (a * a + 6.0 * a + 10.0).ceil() as usize;
        Self { dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Ordered tensor product of finite-dimensional factors, flattened row-major:
/// the index of `(i_0, .., i_{m-1})` is `((i_0 * d_1 + i_1) * d_2 + ..)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompositeSpace {
    factors: Vec<usize>,
}

impl CompositeSpace {
    pub fn new(factors: Vec<usize>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Input("composite space needs >= 1 factor".into()));
        }
        if let Some(&d) = factors.iter().find(|&&d| d < 2) {
            return Err(Error::Input(format!("factor dim {d} < 2")));
        }
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().product()
    }

    pub fn tensor(&self, other: &CompositeSpace) -> CompositeSpace {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        CompositeSpace { factors }
    }

    /// Row-major flattening of a multi-index.
    pub fn flatten(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.factors.len());
        let mut flat = 0;
        for (i, d) in idx.iter().zip(&self.factors) {
            debug_assert!(i < d);
            flat = flat * d + i;
        }
        flat
    }

    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.factors.len()];
        for (slot, d) in idx.iter_mut().zip(&self.factors).rev() {
            *slot = flat % d;
            flat /= d;
        }
        idx
    }
}

impl From<FockSpace> for CompositeSpace {
    fn from(f: FockSpace) -> Self {
        CompositeSpace { factors: vec![f.dim] }
    }
}

impl fmt::Display for CompositeSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dims: Vec<String> = self.factors.iter().map(|d| d.to_string()).collect();
        write!(f, "[{}]", dims.join(" x "))
    }
}

/// Parity sector of a cat state; even maps to logical 0, odd to logical 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CatParity {
    Even,
    Odd,
}

impl CatParity {
    pub fn logical_index(&self) -> usize {
        match self {
            CatParity::Even => 0,
            CatParity::Odd => 1,
        }
    }

    pub fn matches(&self, n: usize) -> bool {
        n % 2 == self.logical_index()
    }
}

impl fmt::Display for CatParity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatParity::Even => write!(f, "even"),
            CatParity::Odd => write!(f, "odd"),
        }
    }
}

/// Pure state on a composite space.
///
/// `leakage` is a construction diagnostic: the probability mass the truncation
/// discarded relative to the untruncated target. States produced by operator
/// application carry 0 there.
#[derive(Clone, Debug)]
pub struct StateVector {
    space: CompositeSpace,
    amps: DVector<C64>,
    leakage: f64,
}

impl StateVector {
    pub fn new(space: CompositeSpace, amps: DVector<C64>) -> Result<Self> {
        if amps.len() != space.total_dim() {
            return Err(Error::Input(format!(
                "amplitude vector of length {} does not fit space {}",
                amps.len(),
                space
            )));
        }
        Ok(Self { space, amps, leakage: 0.0 })
    }

    pub fn basis_state(space: CompositeSpace, index: usize) -> Result<Self> {
        if index >= space.total_dim() {
            return Err(Error::Input(format!(
                "basis index {index} out of range for space {space}"
            )));
        }
        let mut amps = DVector::zeros(space.total_dim());
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { space, amps, leakage: 0.0 })
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn leakage(&self) -> f64 {
        self.leakage
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.amps /= C64::new(n, 0.0);
        }
        self
    }

    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        check_same_space(&self.space, &other.space)?;
        Ok(self.amps.dotc(&other.amps))
    }

    pub fn tensor(&self, other: &StateVector) -> StateVector {
        StateVector {
            space: self.space.tensor(&other.space),
            amps: self.amps.kronecker(&other.amps),
            // first-order combination; fine for diagnostics
            leakage: self.leakage + other.leakage,
        }
    }
}

/// Dense operator on a composite space.
///
/// `diagonal_hint` promises every off-diagonal element is exactly zero, which
/// unlocks O(dim) application and evolution paths.
#[derive(Clone, Debug)]
pub struct Operator {
    space: CompositeSpace,
    mat: DMatrix<C64>,
    diagonal_hint: bool,
}

impl Operator {
    pub fn new(space: CompositeSpace, mat: DMatrix<C64>) -> Result<Self> {
        let d = space.total_dim();
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::Input(format!(
                "{}x{} matrix does not fit space {}",
                mat.nrows(),
                mat.ncols(),
                space
            )));
        }
        Ok(Self { space, mat, diagonal_hint: false })
    }

    pub fn from_diagonal(space: CompositeSpace, diag: DVector<C64>) -> Result<Self> {
        if diag.len() != space.total_dim() {
            return Err(Error::Input(format!(
                "diagonal of length {} does not fit space {}",
                diag.len(),
                space
            )));
        }
        Ok(Self {
            mat: DMatrix::from_diagonal(&diag),
            space,
            diagonal_hint: true,
        })
    }

    pub fn identity(space: CompositeSpace) -> Self {
        let d = space.total_dim();
        Self {
            space,
            mat: DMatrix::identity(d, d),
            diagonal_hint: true,
        }
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn diagonal_hint(&self) -> bool {
        self.diagonal_hint
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        check_same_space(&self.space, &psi.space)?;
        let amps = if self.diagonal_hint {
            DVector::from_fn(psi.amps.len(), |i, _| self.mat[(i, i)] * psi.amps[i])
        } else {
            &self.mat * &psi.amps
        };
        Ok(StateVector { space: psi.space.clone(), amps, leakage: 0.0 })
    }

    /// `self * other` (other acts first).
    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        check_same_space(&self.space, &other.space)?;
        Ok(Operator {
            space: self.space.clone(),
            mat: &self.mat * &other.mat,
            diagonal_hint: self.diagonal_hint && other.diagonal_hint,
        })
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            space: self.space.clone(),
            mat: self.mat.adjoint(),
            diagonal_hint: self.diagonal_hint,
        }
    }

    pub fn tensor(&self, other: &Operator) -> Operator {
        Operator {
            space: self.space.tensor(&other.space),
            mat: self.mat.kronecker(&other.mat),
            diagonal_hint: self.diagonal_hint && other.diagonal_hint,
        }
    }

    pub fn expectation(&self, psi: &StateVector) -> Result<C64> {
        let phi = self.apply(psi)?;
        psi.inner(&phi)
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let mut max = 0.0f64;
        for i in 0..self.mat.nrows() {
            for j in i..self.mat.ncols() {
                let dev = (self.mat[(i, j)] - self.mat[(j, i)].conj()).norm();
                max = max.max(dev);
            }
        }
        max
    }

    pub fn unitarity_deviation(&self) -> f64 {
        let gram = self.mat.adjoint() * &self.mat;
        let mut max = 0.0f64;
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                max = max.max((gram[(i, j)] - target).norm());
            }
        }
        max
    }
}

/// Largest element magnitude of a complex matrix or vector; the max-norm all
/// the elementwise tolerance checks are phrased in.
pub fn max_abs<R, C, S>(m: &nalgebra::Matrix<C64, R, C, S>) -> f64
where
    R: nalgebra::Dim,
    C: nalgebra::Dim,
    S: nalgebra::storage::Storage<C64, R, C>,
{
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub(crate) fn check_same_space(a: &CompositeSpace, b: &CompositeSpace) -> Result<()> {
    if a != b {
        return Err(Error::SpaceMismatch {
            left: a.to_string(),
            right: b.to_string(),
        });
    }
    Ok(())
}

/// Lowering operator: `<n-1| a |n> = sqrt(n)`.
pub fn annihilation(space: FockSpace) -> Operator {
    let d = space.dim();
    let mut mat = DMatrix::zeros(d, d);
    for n in 1..d {
        mat[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Operator { space: space.into(), mat, diagonal_hint: false }
}

/// Photon-number operator (diagonal).
pub fn number(space: FockSpace) -> Operator {
    let d = space.dim();
    let diag = DVector::from_fn(d, |n, _| C64::new(n as f64, 0.0));
    Operator::from_diagonal(space.into(), diag).expect("dim matches by construction")
}

/// Photon-number parity `(-1)^n` (diagonal, self-inverse).
pub fn parity_operator(space: FockSpace) -> Operator {
    let d = space.dim();
    let diag = DVector::from_fn(d, |n, _| C64::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0));
    Operator::from_diagonal(space.into(), diag).expect("dim matches by construction")
}

/// Compensated summation; keeps truncation diagnostics accurate near 1e-14.
fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Unnormalised coherent amplitudes `e^{-|a|^2/2} a^n / sqrt(n!)` for
/// `n < dim`, via the stable ratio recurrence.
fn coherent_amplitudes(dim: usize, alpha: C64) -> DVector<C64> {
    let mut amps = DVector::zeros(dim);
    let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..dim {
        amps[n] = c;
        c *= alpha / C64::new(((n + 1) as f64).sqrt(), 0.0);
    }
    amps
}

pub fn coherent_state(space: FockSpace, alpha: C64) -> Result<StateVector> {
    coherent_state_with_tol(space, alpha, DEFAULT_LEAKAGE_TOL)
}

/// Coherent state with an explicit leakage gate, for callers that knowingly
/// work in a tight truncation.
pub fn coherent_state_with_tol(
    space: FockSpace,
    alpha: C64,
    max_leakage: f64,
) -> Result<StateVector> {
    let amps = coherent_amplitudes(space.dim(), alpha);
    let kept = kahan_sum(amps.iter().map(|c| c.norm_sqr()));
    // untruncated norm is exactly 1, so the tail mass is 1 - kept
    let leakage = (1.0 - kept).max(0.0);
    if leakage > max_leakage {
        return Err(Error::Truncation { dim: space.dim(), leakage, tol: max_leakage });
    }
    let scale = C64::new(1.0 / kept.sqrt(), 0.0);
    Ok(StateVector {
        space: space.into(),
        amps: amps * scale,
        leakage,
    })
}

pub fn cat_state(space: FockSpace, alpha: C64, parity: CatParity) -> Result<StateVector> {
    cat_state_with_tol(space, alpha, parity, DEFAULT_LEAKAGE_TOL)
}

/// Even/odd coherent superposition `N (|a> +/- |-a>)`, built directly in the
/// requested parity sector so the opposite-parity support is exactly zero.
pub fn cat_state_with_tol(
    space: FockSpace,
    alpha: C64,
    parity: CatParity,
    max_leakage: f64,
) -> Result<StateVector> {
    if parity == CatParity::Odd && alpha.norm() == 0.0 {
        return Err(Error::DegenerateCat);
    }
    let mut amps = coherent_amplitudes(space.dim(), alpha);
    for n in 0..space.dim() {
        if parity.matches(n) {
            amps[n] *= C64::new(2.0, 0.0);
        } else {
            amps[n] = C64::new(0.0, 0.0);
        }
    }
    let kept = kahan_sum(amps.iter().map(|c| c.norm_sqr()));
    // || |a> +/- |-a> ||^2 = 2 +/- 2 e^{-2|a|^2}, with the minus branch
    // computed via expm1 so small alpha keeps full precision
    let exact = match parity {
        CatParity::Even => 2.0 + 2.0 * (-2.0 * alpha.norm_sqr()).exp(),
        CatParity::Odd => -2.0 * f64::exp_m1(-2.0 * alpha.norm_sqr()),
    };
    let leakage = (1.0 - kept / exact).max(0.0);
    if leakage > max_leakage {
        return Err(Error::Truncation { dim: space.dim(), leakage, tol: max_leakage });
    }
    let scale = C64::new(1.0 / kept.sqrt(), 0.0);
    Ok(StateVector {
        space: space.into(),
        amps: amps * scale,
        leakage,
    })
}

/// `|<a|b>|^2`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

/// `<psi| (-1)^n |psi>` for a single-mode state.
pub fn parity_expectation(psi: &StateVector) -> f64 {
    assert_eq!(psi.space.factors().len(), 1, "parity_expectation is single-mode");
    psi.amps
        .iter()
        .enumerate()
        .map(|(n, c)| if n % 2 == 0 { c.norm_sqr() } else { -c.norm_sqr() })
        .sum()
}

enum Diagonalised {
    Diagonal(DVector<f64>),
    Full { eigvals: DVector<f64>, eigvecs: DMatrix<C64> },
}

/// Hermiticity check + eigendecomposition, shared by the evolution entry
/// points. Diagonal generators skip the O(d^3) step entirely.
fn diagonalise(h: &Operator) -> Result<Diagonalised> {
    if h.diagonal_hint {
        let d = h.mat.nrows();
        let mut diag = DVector::zeros(d);
        let mut max_im = 0.0f64;
        for i in 0..d {
            max_im = max_im.max(h.mat[(i, i)].im.abs());
            diag[i] = h.mat[(i, i)].re;
        }
        if max_im > HERMITICITY_TOL {
            return Err(Error::NonHermitian { max_dev: max_im });
        }
        return Ok(Diagonalised::Diagonal(diag));
    }
    let dev = h.hermiticity_deviation();
    if dev > HERMITICITY_TOL {
        return Err(Error::NonHermitian { max_dev: dev });
    }
    let eig = nalgebra::SymmetricEigen::new(h.mat.clone());
    Ok(Diagonalised::Full {
        eigvals: eig.eigenvalues,
        eigvecs: eig.eigenvectors,
    })
}

fn phase_vector(eigvals: &DVector<f64>, t: f64) -> DVector<C64> {
    DVector::from_fn(eigvals.len(), |i, _| {
        let ph = -eigvals[i] * t;
        C64::new(ph.cos(), ph.sin())
    })
}

/// Evolve `psi` under the time-independent Hermitian generator `h` for time
/// `t`: `psi -> exp(-i h t) psi`, exact up to the diagonalisation.
pub fn evolve_static(h: &Operator, t: f64, psi: &StateVector) -> Result<StateVector> {
    check_same_space(&h.space, &psi.space)?;
    let amps = match diagonalise(h)? {
        Diagonalised::Diagonal(d) => {
            let phases = phase_vector(&d, t);
            DVector::from_fn(psi.amps.len(), |i, _| phases[i] * psi.amps[i])
        }
        Diagonalised::Full { eigvals, eigvecs } => {
            let phases = phase_vector(&eigvals, t);
            let mut coeffs = eigvecs.adjoint() * &psi.amps;
            for i in 0..coeffs.len() {
                coeffs[i] *= phases[i];
            }
            eigvecs * coeffs
        }
    };
    Ok(StateVector { space: psi.space.clone(), amps, leakage: psi.leakage })
}

/// Dense propagator `exp(-i h t)` for a Hermitian generator.
pub fn propagator(h: &Operator, t: f64) -> Result<Operator> {
    let (mat, diagonal_hint) = match diagonalise(h)? {
        Diagonalised::Diagonal(d) => {
            (DMatrix::from_diagonal(&phase_vector(&d, t)), true)
        }
        Diagonalised::Full { eigvals, eigvecs } => {
            let phases = phase_vector(&eigvals, t);
            let mut scaled = eigvecs.clone();
            for j in 0..scaled.ncols() {
                let ph = phases[j];
                for i in 0..scaled.nrows() {
                    scaled[(i, j)] *= ph;
                }
            }
            (scaled * eigvecs.adjoint(), false)
        }
    };
    Ok(Operator { space: h.space.clone(), mat, diagonal_hint })
}
