//! Amplitude damping of a single mode, in two independent forms: the exact
//! Kraus decomposition indexed by the number of lost photons, and direct RK4
//! integration of the damping master equation. The two must agree, and the
//! test suite leans on that redundancy.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{
    check_same_space, max_abs, CompositeSpace, FockSpace, Operator, StateVector,
};

/// Tolerated trace deficit when a truncated Kraus set is applied.
pub const COMPLETENESS_TOL: f64 = 1e-8;

/// Tolerated trace drift over a full Lindblad integration.
pub const TRACE_DRIFT_TOL: f64 = 1e-6;

/// Branch probabilities below this are treated as identically zero.
pub const ZERO_PROB_FLOOR: f64 = 1e-300;

/// Amplitude damping for time `t` at rate `gamma`; `eta = exp(-gamma t)` is
/// the surviving energy fraction.
#[derive(Clone, Copy, Debug)]
pub struct DampingChannel {
    gamma: f64,
    t: f64,
    eta: f64,
    kmax: Option<usize>,
}

impl DampingChannel {
    pub fn new(gamma: f64, t: f64) -> Result<Self> {
        if !(gamma >= 0.0) || !(t >= 0.0) {
            return Err(Error::Input(format!(
                "damping needs gamma >= 0 and t >= 0, got gamma = {gamma}, t = {t}"
            )));
        }
        Ok(Self { gamma, t, eta: (-gamma * t).exp(), kmax: None })
    }

    /// Channel specified by the survival fraction directly (rate fixed at 1).
    pub fn from_eta(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::Input(format!("eta must lie in (0, 1], got {eta}")));
        }
        Ok(Self { gamma: 1.0, t: -eta.ln(), eta, kmax: None })
    }

    /// Restrict the Kraus set to `k <= kmax`. The full set (kmax = dim - 1)
    /// is exactly trace preserving; anything smaller loses the tail mass.
    pub fn with_kmax(mut self, kmax: usize) -> Self {
        self.kmax = Some(kmax);
        self
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn kmax(&self) -> Option<usize> {
        self.kmax
    }
}

/// Validated density operator: Hermitian, unit trace, no eigenvalue below
/// -1e-10.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    space: CompositeSpace,
    mat: DMatrix<C64>,
}

impl DensityMatrix {
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
        let herm_dev = max_abs(&(&mat - mat.adjoint()));
        if herm_dev > 1e-12 {
            return Err(Error::NonHermitian { max_dev: herm_dev });
        }
        let trace = mat.trace();
        if (trace - C64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(Error::Input(format!(
                "density matrix trace {trace} is not 1 within 1e-10"
            )));
        }
        let sym = (&mat + mat.adjoint()) * C64::new(0.5, 0.0);
        let min_eig = nalgebra::SymmetricEigen::new(sym)
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -1e-10 {
            return Err(Error::Input(format!(
                "density matrix has eigenvalue {min_eig:.3e} below -1e-10"
            )));
        }
        Ok(Self { space, mat })
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        let amps = psi.amplitudes();
        Self {
            space: psi.space().clone(),
            mat: amps * amps.adjoint(),
        }
    }

    /// Internal fast path for outputs whose structure already guarantees
    /// validity (completely positive maps of valid inputs).
    pub(crate) fn unchecked(space: CompositeSpace, mat: DMatrix<C64>) -> Self {
        Self { space, mat }
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }

    /// `<psi| rho |psi>`.
    pub fn fidelity_pure(&self, psi: &StateVector) -> Result<f64> {
        check_same_space(&self.space, psi.space())?;
        Ok((psi.amplitudes().adjoint() * &self.mat * psi.amplitudes())[(0, 0)].re)
    }

    pub fn expectation(&self, op: &Operator) -> Result<C64> {
        check_same_space(&self.space, op.space())?;
        Ok((op.matrix() * &self.mat).trace())
    }
}

fn mode_of(space: &CompositeSpace) -> FockSpace {
    assert_eq!(space.factors().len(), 1, "channel operations are single-mode");
    FockSpace::new(space.factors()[0]).expect("existing space has dim >= 2")
}

/// Kraus operator for losing exactly `k` photons:
/// `<n-k| Y_k |n> = sqrt(C(n,k)) eta^{(n-k)/2} (1-eta)^{k/2}`.
pub fn kraus_operator(space: FockSpace, k: usize, eta: f64) -> Result<Operator> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Input(format!("eta must lie in (0, 1], got {eta}")));
    }
    let d = space.dim();
    if k >= d {
        return Err(Error::Input(format!(
            "jump order k = {k} needs k < dim = {d}"
        )));
    }
    let mut mat = DMatrix::zeros(d, d);
    for n in k..d {
        // sqrt(C(n,k) (1-eta)^k) as a running product to stay in range
        let mut amp = 1.0f64;
        for j in 1..=k {
            amp *= ((n - j + 1) as f64 / j as f64) * (1.0 - eta);
        }
        let amp = amp.sqrt() * eta.powf((n - k) as f64 / 2.0);
        mat[(n - k, n)] = C64::new(amp, 0.0);
    }
    Operator::new(space.into(), mat)
}

/// `sum_k Y_k rho Y_k^dag` over the channel's Kraus set.
pub fn apply_channel(rho: &DensityMatrix, channel: &DampingChannel) -> Result<DensityMatrix> {
    let mode = mode_of(rho.space());
    let kmax = channel.kmax().unwrap_or(mode.dim() - 1).min(mode.dim() - 1);
    let d = mode.dim();
    let mut out = DMatrix::<C64>::zeros(d, d);
    for k in 0..=kmax {
        let y = kraus_operator(mode, k, channel.eta())?;
        out += y.matrix() * rho.matrix() * y.matrix().adjoint();
    }
    let deficit = rho.trace() - out.trace().re;
    if deficit > COMPLETENESS_TOL {
        return Err(Error::Completeness { kmax, deficit });
    }
    // CP map of a valid state; symmetrise away the rounding skew
    let out = (&out + out.adjoint()) * C64::new(0.5, 0.0);
    Ok(DensityMatrix::unchecked(rho.space().clone(), out))
}

/// Conditional post-jump state and its branch probability:
/// `(Y_k psi / ||..||, ||Y_k psi||^2)`.
pub fn jump_conditional(psi: &StateVector, eta: f64, k: usize) -> Result<(StateVector, f64)> {
    let mode = mode_of(psi.space());
    let y = kraus_operator(mode, k, eta)?;
    let branch = y.apply(psi)?;
    let p = branch.norm().powi(2);
    if p < ZERO_PROB_FLOOR {
        return Err(Error::ZeroProbability { k });
    }
    Ok((branch.normalized(), p))
}

/// Damping master-equation right-hand side,
/// `gamma (a rho a^dag - {n, rho}/2)`, written out elementwise: the lowering
/// operator only shifts indices, so no matrix product is needed.
fn damping_rhs(gamma: f64, rho: &DMatrix<C64>) -> DMatrix<C64> {
    let d = rho.nrows();
    DMatrix::from_fn(d, d, |i, j| {
        let feed = if i + 1 < d && j + 1 < d {
            let w = (((i + 1) * (j + 1)) as f64).sqrt();
            rho[(i + 1, j + 1)] * C64::new(w, 0.0)
        } else {
            C64::new(0.0, 0.0)
        };
        (feed - rho[(i, j)] * C64::new((i + j) as f64 / 2.0, 0.0)) * C64::new(gamma, 0.0)
    })
}

/// RK4 integration of the damping master equation from `rho0` over time `t`.
pub fn lindblad_evolve(
    rho0: &DensityMatrix,
    gamma: f64,
    t: f64,
    dt: f64,
) -> Result<DensityMatrix> {
    if !(gamma > 0.0) || !(t >= 0.0) || !(dt > 0.0) {
        return Err(Error::Input(format!(
            "lindblad_evolve needs gamma > 0, t >= 0, dt > 0; got gamma = {gamma}, t = {t}, dt = {dt}"
        )));
    }
    if dt > 0.01 / gamma {
        return Err(Error::StepSize {
            dt,
            why: format!("exceeds the stability bound 0.01/gamma = {:.3e}", 0.01 / gamma),
        });
    }
    let _ = mode_of(rho0.space());
    let trace0 = rho0.trace();
    let steps = (t / dt).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let mut rho = rho0.matrix().clone();
    let half = C64::new(0.5 * dt, 0.0);
    let full = C64::new(dt, 0.0);
    let sixth = C64::new(dt / 6.0, 0.0);
    let two = C64::new(2.0, 0.0);
    for step in 0..steps {
        let k1 = damping_rhs(gamma, &rho);
        let k2 = damping_rhs(gamma, &(&rho + &k1 * half));
        let k3 = damping_rhs(gamma, &(&rho + &k2 * half));
        let k4 = damping_rhs(gamma, &(&rho + &k3 * full));
        rho += (k1 + k2 * two + k3 * two + k4) * sixth;
        // the exact flow keeps rho Hermitian; discard the rounding skew
        rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
        let drift = (rho.trace().re - trace0).abs();
        if drift > TRACE_DRIFT_TOL {
            return Err(Error::StepSize {
                dt,
                why: format!(
                    "trace drifted by {drift:.3e} after step {} (tolerance {TRACE_DRIFT_TOL:.1e})",
                    step + 1
                ),
            });
        }
    }
    Ok(DensityMatrix::unchecked(rho0.space().clone(), rho))
}

/// `(1/2) ||a - b||_1`, the trace distance between two states.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    check_same_space(a.space(), b.space())?;
    let diff = a.matrix() - b.matrix();
    let diff = (&diff + diff.adjoint()) * C64::new(0.5, 0.0);
    let eigvals = nalgebra::SymmetricEigen::new(diff).eigenvalues;
    Ok(0.5 * eigvals.iter().map(|l| l.abs()).sum::<f64>())
}

/// Branch probabilities of every jump order on `psi`, mainly a diagnostic:
/// they sum to 1 up to the completeness tolerance.
pub fn jump_probabilities(psi: &StateVector, eta: f64) -> Result<DVector<f64>> {
    let mode = mode_of(psi.space());
    let mut probs = DVector::zeros(mode.dim());
    for k in 0..mode.dim() {
        let y = kraus_operator(mode, k, eta)?;
        probs[k] = y.apply(psi)?.norm().powi(2);
    }
    Ok(probs)
}
