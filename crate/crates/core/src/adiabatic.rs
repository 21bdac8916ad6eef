//! Adiabatic preparation of cat states by ramping a two-photon pump against
//! a fixed Kerr nonlinearity.
//!
//! The combined generator `chi n(n-1) - kappa (a^2 + a^dag^2)` has the two
//! parity cats at `alpha = sqrt(kappa/chi)` as degenerate eigenstates with
//! eigenvalue `-kappa^2/chi`, and parity is conserved exactly, so ramping
//! `kappa` from zero drags the vacuum (or single-photon) state onto the
//! matching cat. The integrator exploits the generator's pentadiagonal
//! structure; a step costs O(dim).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{cat_state, CatParity, FockSpace, Operator, StateVector};

/// Norm drift allowed at any sampled time.
pub const NORM_DRIFT_TOL: f64 = 1e-8;

/// Allowed total population in the top three Fock levels at any sample.
pub const EDGE_POPULATION_TOL: f64 = 1e-8;

/// Pump ramp profile `kappa(t)`; both start at exactly zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RampSchedule {
    /// `kappa(t) = rate t`
    Linear { rate: f64 },
    /// `kappa(t) = k0 tanh^2(lambda t)`: fast start, asymptotic flattening
    TanhSq { k0: f64, lambda: f64 },
}

impl RampSchedule {
    pub fn kappa_at(&self, t: f64) -> f64 {
        match *self {
            RampSchedule::Linear { rate } => rate * t,
            RampSchedule::TanhSq { k0, lambda } => {
                let th = (lambda * t).tanh();
                k0 * th * th
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            RampSchedule::Linear { rate } => rate >= 0.0,
            RampSchedule::TanhSq { k0, lambda } => k0 >= 0.0 && lambda >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Input(format!("ramp parameters must be nonnegative: {self:?}")))
        }
    }
}

/// One recorded point of an evolution.
#[derive(Clone, Debug)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub kappa: f64,
    pub state: StateVector,
    /// Overlap with the instantaneous target cat at `sqrt(kappa/chi)`.
    pub fidelity: f64,
    pub norm_error: f64,
    /// Population in the parity sector opposite the prepared one.
    pub parity_leakage: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    pub fn t_final(&self) -> f64 {
        self.points.last().map(|p| p.t).unwrap_or(0.0)
    }
}

/// Kerr term `chi n(n-1)`, diagonal.
pub fn kerr_hamiltonian(space: FockSpace, chi: f64) -> Operator {
    let diag = DVector::from_fn(space.dim(), |n, _| {
        let nf = n as f64;
        C64::new(chi * nf * (nf - 1.0), 0.0)
    });
    Operator::from_diagonal(space.into(), diag).expect("diagonal fits by construction")
}

/// Full preparation generator `chi n(n-1) - kappa (a^2 + a^dag^2)`.
pub fn cat_hamiltonian(space: FockSpace, chi: f64, kappa: f64) -> Operator {
    let d = space.dim();
    let mut mat = DMatrix::<C64>::zeros(d, d);
    for n in 0..d {
        let nf = n as f64;
        mat[(n, n)] = C64::new(chi * nf * (nf - 1.0), 0.0);
        if n + 2 < d {
            let w = C64::new(-kappa * (((n + 1) * (n + 2)) as f64).sqrt(), 0.0);
            mat[(n, n + 2)] = w;
            mat[(n + 2, n)] = w;
        }
    }
    Operator::new(space.into(), mat).expect("square by construction")
}

/// `-i H(t) psi` exploiting the pentadiagonal structure.
fn rhs(chi: f64, kappa: f64, psi: &DVector<C64>, out: &mut DVector<C64>) {
    let d = psi.len();
    for n in 0..d {
        let nf = n as f64;
        let mut v = psi[n] * C64::new(chi * nf * (nf - 1.0), 0.0);
        if n + 2 < d {
            v -= psi[n + 2] * C64::new(kappa * (((n + 1) * (n + 2)) as f64).sqrt(), 0.0);
        }
        if n >= 2 {
            v -= psi[n - 2] * C64::new(kappa * ((n * (n - 1)) as f64).sqrt(), 0.0);
        }
        out[n] = v * C64::new(0.0, -1.0);
    }
}

/// Classic RK4 step for the time-dependent generator; `kappa` is evaluated at
/// the half and full step as usual.
fn rk4_step(
    chi: f64,
    kappa_of: &dyn Fn(f64) -> f64,
    t: f64,
    dt: f64,
    psi: &mut DVector<C64>,
    scratch: &mut [DVector<C64>; 5],
) {
    let [k1, k2, k3, k4, tmp] = scratch;
    let k_mid = kappa_of(t + dt / 2.0);
    rhs(chi, kappa_of(t), psi, k1);
    tmp.copy_from(psi);
    tmp.axpy(C64::new(dt / 2.0, 0.0), k1, C64::new(1.0, 0.0));
    rhs(chi, k_mid, tmp, k2);
    tmp.copy_from(psi);
    tmp.axpy(C64::new(dt / 2.0, 0.0), k2, C64::new(1.0, 0.0));
    rhs(chi, k_mid, tmp, k3);
    tmp.copy_from(psi);
    tmp.axpy(C64::new(dt, 0.0), k3, C64::new(1.0, 0.0));
    rhs(chi, kappa_of(t + dt), tmp, k4);
    psi.axpy(C64::new(dt / 6.0, 0.0), k1, C64::new(1.0, 0.0));
    psi.axpy(C64::new(dt / 3.0, 0.0), k2, C64::new(1.0, 0.0));
    psi.axpy(C64::new(dt / 3.0, 0.0), k3, C64::new(1.0, 0.0));
    psi.axpy(C64::new(dt / 6.0, 0.0), k4, C64::new(1.0, 0.0));
}

/// The state the ramp is trying to track at pump strength `kappa`. At zero
/// pump the cat degenerates to the Fock state of the right parity.
fn instantaneous_target(
    space: FockSpace,
    chi: f64,
    kappa: f64,
    parity: CatParity,
) -> Result<StateVector> {
    if kappa <= 0.0 {
        return StateVector::basis_state(space.into(), parity.logical_index());
    }
    let alpha = (kappa / chi).sqrt();
    cat_state(space, C64::new(alpha, 0.0), parity)
}

fn wrong_parity_mass(psi: &DVector<C64>, parity: CatParity) -> f64 {
    psi.iter()
        .enumerate()
        .filter(|(n, _)| !parity.matches(*n))
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

/// Integrate the ramped preparation from the zero-pump eigenstate of the
/// requested parity, recording every `sample_every`-th step (plus start and
/// end). Aborts if the norm drifts past 1e-8 or probability piles up against
/// the truncation edge.
pub fn evolve_schedule(
    space: FockSpace,
    chi: f64,
    schedule: RampSchedule,
    parity: CatParity,
    t_final: f64,
    dt: f64,
    sample_every: usize,
) -> Result<Trajectory> {
    schedule.validate()?;
    if !(chi > 0.0) {
        return Err(Error::Input(format!("chi must be positive, got {chi}")));
    }
    if !(t_final > 0.0) || !(dt > 0.0) || dt > t_final {
        return Err(Error::Input(format!(
            "need 0 < dt <= t_final, got dt = {dt}, t_final = {t_final}"
        )));
    }
    if sample_every == 0 {
        return Err(Error::Input("sample_every must be >= 1".into()));
    }

    let d = space.dim();
    let steps = (t_final / dt).ceil().max(1.0) as usize;
    let dt = t_final / steps as f64;
    let kappa_of = |t: f64| schedule.kappa_at(t);

    let mut psi = instantaneous_target(space, chi, 0.0, parity)?
        .amplitudes()
        .clone();
    let mut scratch = std::array::from_fn(|_| DVector::<C64>::zeros(d));
    let mut points = Vec::with_capacity(steps / sample_every + 2);

    let mut record = |t: f64, psi: &DVector<C64>| -> Result<()> {
        let kappa = kappa_of(t);
        let norm = psi.norm();
        let norm_error = (norm - 1.0).abs();
        if norm_error > NORM_DRIFT_TOL {
            return Err(Error::NormDrift { t, drift: norm_error, tol: NORM_DRIFT_TOL });
        }
        let edge: f64 = (d - 3..d).map(|n| psi[n].norm_sqr()).sum();
        if edge > EDGE_POPULATION_TOL {
            return Err(Error::Truncation { dim: d, leakage: edge, tol: EDGE_POPULATION_TOL });
        }
        let state = StateVector::new(space.into(), psi.clone())?;
        let target = instantaneous_target(space, chi, kappa, parity)?;
        let fidelity = target.inner(&state)?.norm_sqr() / (norm * norm);
        let parity_leakage = wrong_parity_mass(psi, parity);
        points.push(TrajectoryPoint { t, kappa, state, fidelity, norm_error, parity_leakage });
        Ok(())
    };

    record(0.0, &psi)?;
    for step in 0..steps {
        let t = step as f64 * dt;
        rk4_step(chi, &kappa_of, t, dt, &mut psi, &mut scratch);
        if (step + 1) % sample_every == 0 || step + 1 == steps {
            record((step + 1) as f64 * dt, &psi)?;
        }
    }
    Ok(Trajectory { points })
}

/// Mean fidelity and oscillation half-amplitude `(max - min)/2` over the
/// trailing `tail_fraction` of the trajectory's time span.
pub fn steady_state_fidelity(traj: &Trajectory, tail_fraction: f64) -> Result<(f64, f64)> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::Input(format!(
            "tail_fraction must lie in (0, 1], got {tail_fraction}"
        )));
    }
    let t_final = traj.t_final();
    let cutoff = t_final * (1.0 - tail_fraction);
    let tail: Vec<f64> = traj
        .points
        .iter()
        .filter(|p| p.t >= cutoff)
        .map(|p| p.fidelity)
        .collect();
    if tail.len() < 20 {
        return Err(Error::InsufficientSamples { have: tail.len(), need: 20 });
    }
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let max = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = tail.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((mean, (max - min) / 2.0))
}
