//! Three-qubit bit-flip protection of a cat qubit against single photon loss.
//!
//! The mode carries `c0 |even cat> + c1 |odd cat>`; two ancilla qubits record
//! the mode parity through controlled-NOT gates controlled by photon number
//! parity. A lost photon flips the parity, the decode round re-maps parity
//! onto the ancillas, and syndrome (1,1) triggers a logical X built at the
//! decayed amplitude. Fidelity is always scored against code words at
//! `sqrt(eta) * alpha_ref`: the amplitude shrinkage is physical and is the
//! reset budget's problem, not this circuit's.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::channel::{jump_probabilities, kraus_operator, ZERO_PROB_FLOOR};
use crate::error::{Error, Result};
use crate::gates::{ion_hamiltonian, parity_cn};
use crate::hilbert::{
    cat_state, fidelity, propagator, CatParity, CompositeSpace, FockSpace, Operator, StateVector,
};

/// Lamb-Dicke parameter used when the ion gate set is requested without one.
pub const DEFAULT_ION_ETA_LD: f64 = 0.05;

/// Carrier Rabi frequency default for the ion gate set.
pub const DEFAULT_ION_OMEGA: f64 = 1.0;

/// Which physical realization of the parity CN the circuit uses. `Exact` is
/// the ideal permutation; `Ion` propagates the trapped-ion coupling for a
/// quarter period of its linear term, so the quartic correction leaks a
/// little probability into single-ancilla syndromes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GateMode {
    Exact,
    Ion { omega: f64, eta_ld: f64 },
}

impl GateMode {
    pub fn ion_default() -> Self {
        GateMode::Ion { omega: DEFAULT_ION_OMEGA, eta_ld: DEFAULT_ION_ETA_LD }
    }
}

impl Default for GateMode {
    fn default() -> Self {
        GateMode::Exact
    }
}

/// A qubit of information expressed in the cat basis at amplitude
/// `alpha_ref`: even cat is logical 0, odd cat is logical 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogicalQubitState {
    pub c0: C64,
    pub c1: C64,
    pub alpha_ref: f64,
}

impl LogicalQubitState {
    pub fn new(c0: C64, c1: C64, alpha_ref: f64) -> Result<Self> {
        let norm = c0.norm_sqr() + c1.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Input(format!(
                "|c0|^2 + |c1|^2 must be 1 to 1e-12, got {norm}"
            )));
        }
        if !(alpha_ref > 0.0) {
            return Err(Error::Input(format!(
                "alpha_ref must be positive, got {alpha_ref}"
            )));
        }
        Ok(LogicalQubitState { c0, c1, alpha_ref })
    }

    pub fn zero(alpha_ref: f64) -> Result<Self> {
        Self::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0), alpha_ref)
    }

    pub fn one(alpha_ref: f64) -> Result<Self> {
        Self::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0), alpha_ref)
    }

    pub fn plus(alpha_ref: f64) -> Result<Self> {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        Self::new(C64::new(r, 0.0), C64::new(r, 0.0), alpha_ref)
    }

    /// The bare mode state `c0 |even> + c1 |odd>` at `alpha_ref`, before any
    /// ancillas are attached. The parity sectors are orthogonal, so the
    /// result is normalized whenever the coefficients are.
    pub fn mode_state(&self, space: FockSpace) -> Result<StateVector> {
        self.mode_state_at(space, self.alpha_ref)
    }

    fn mode_state_at(&self, space: FockSpace, alpha: f64) -> Result<StateVector> {
        let a = C64::new(alpha, 0.0);
        let even = cat_state(space, a, CatParity::Even)?;
        let odd = cat_state(space, a, CatParity::Odd)?;
        let amps = even.amplitudes() * self.c0 + odd.amplitudes() * self.c1;
        StateVector::new(space.into(), amps)
    }
}

/// Result of one decode-measure-recover pass.
#[derive(Clone, Debug)]
pub struct CircuitOutcome {
    pub syndrome: (u8, u8),
    /// Post-measurement (and post-recovery) state on mode ⊗ qubit ⊗ qubit.
    pub corrected_state: StateVector,
    /// Overlap with the amplitude-matched logical target and the measured
    /// ancilla configuration.
    pub logical_fidelity: f64,
    pub jump_count_injected: u8,
    /// Probability of every branch sampled on the way to this outcome: the
    /// measurement branch, times the error branch when the caller sampled
    /// one.
    pub probability: f64,
}

/// Aggregate of a Monte Carlo protection run. Field values depend only on
/// the inputs, so serializing twice with the same seed gives identical bytes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtectionSummary {
    pub alpha: f64,
    pub dim: usize,
    pub gamma: f64,
    pub t: f64,
    pub eta: f64,
    pub trials: u64,
    pub seed: u64,
    pub mean_fidelity: f64,
    /// Indexed `[s1][s2]`.
    pub syndrome_counts: [[u64; 2]; 2],
    pub jump_trials: u64,
    pub invalid_syndrome_trials: u64,
    /// Probability of the zero-jump error branch of the encoded state.
    pub p_no_jump: f64,
    /// Probability of the single-jump branch.
    pub p_single_jump: f64,
    /// Everything beyond one jump; falls outside what the circuit corrects.
    pub p_residual: f64,
}

/// The parity CN on mode ⊗ one ancilla for the requested gate realization.
fn cn_operator(space: FockSpace, mode: &GateMode) -> Result<Operator> {
    match *mode {
        GateMode::Exact => Ok(parity_cn(space)),
        GateMode::Ion { omega, eta_ld } => {
            if !(omega > 0.0 && eta_ld > 0.0) {
                return Err(Error::Input(format!(
                    "ion gate needs omega > 0 and eta_ld > 0, got {omega}, {eta_ld}"
                )));
            }
            let h = ion_hamiltonian(space, omega, eta_ld)?;
            // quarter period of the linear term: one full ancilla flip per
            // odd photon number
            let t = PI / (2.0 * omega * eta_ld * eta_ld);
            propagator(&h, t)
        }
    }
}

/// Extend a gate on mode ⊗ qubit to mode ⊗ qubit ⊗ qubit, the other ancilla
/// untouched.
fn embed_cn(gate: &Operator, d: usize, ancilla: usize) -> Operator {
    let joint = CompositeSpace::new(vec![d, 2, 2]).expect("dims >= 2");
    let g = gate.matrix();
    let mut mat = DMatrix::<C64>::zeros(4 * d, 4 * d);
    for rn in 0..d {
        for rs in 0..2 {
            for cn in 0..d {
                for cs in 0..2 {
                    let v = g[(rn * 2 + rs, cn * 2 + cs)];
                    if v == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for spectator in 0..2 {
                        let (r, c) = if ancilla == 0 {
                            (
                                joint.flatten(&[rn, rs, spectator]),
                                joint.flatten(&[cn, cs, spectator]),
                            )
                        } else {
                            (
                                joint.flatten(&[rn, spectator, rs]),
                                joint.flatten(&[cn, spectator, cs]),
                            )
                        };
                        mat[(r, c)] = v;
                    }
                }
            }
        }
    }
    Operator::new(joint, mat).expect("square by construction")
}

fn ancilla_space() -> CompositeSpace {
    CompositeSpace::new(vec![2, 2]).expect("static dims")
}

/// Entangle the mode parity with two fresh ancillas: prepare the logical
/// state, ancillas in the ground state, then run the double CN.
pub fn encode(
    logical: &LogicalQubitState,
    space: FockSpace,
    mode: &GateMode,
) -> Result<StateVector> {
    let mode_state = logical.mode_state(space)?;
    let ancillas = StateVector::basis_state(ancilla_space(), 0)?;
    let full = mode_state.tensor(&ancillas);
    let cn = cn_operator(space, mode)?;
    let first = embed_cn(&cn, space.dim(), 0);
    let second = embed_cn(&cn, space.dim(), 1);
    second.apply(&first.apply(&full)?)
}

/// Apply the k-quantum damping branch to the mode of an encoded state and
/// renormalize; returns the branch probability.
pub fn inject_error(psi: &StateVector, eta: f64, k: usize) -> Result<(StateVector, f64)> {
    let factors = psi.space().factors();
    if factors.len() != 3 {
        return Err(Error::Input(format!(
            "expected a mode with two ancillas, got factors {factors:?}"
        )));
    }
    let mode_space = FockSpace::new(factors[0])?;
    let kraus = kraus_operator(mode_space, k, eta)?;
    let big = kraus.tensor(&Operator::identity(ancilla_space()));
    let damaged = big.apply(psi)?;
    let p = damaged.norm().powi(2);
    if p < ZERO_PROB_FLOOR {
        return Err(Error::ZeroProbability { k });
    }
    Ok((damaged.normalized(), p))
}

/// Unitary swapping the two cat code words at amplitude `alpha`, identity on
/// their orthogonal complement. The cats live in disjoint parity sectors, so
/// the construction is exactly unitary and an involution.
pub fn logical_x(space: FockSpace, alpha: f64) -> Result<Operator> {
    let a = C64::new(alpha, 0.0);
    let even = cat_state(space, a, CatParity::Even)?;
    let odd = cat_state(space, a, CatParity::Odd)?;
    let e = even.amplitudes();
    let o = odd.amplitudes();
    let d = space.dim();
    let mut mat = DMatrix::<C64>::identity(d, d);
    for i in 0..d {
        for j in 0..d {
            mat[(i, j)] += e[i] * o[j].conj() + o[i] * e[j].conj()
                - e[i] * e[j].conj()
                - o[i] * o[j].conj();
        }
    }
    Operator::new(space.into(), mat)
}

/// Everything the decode round needs, prebuilt so Monte Carlo trials only
/// pay for matrix-vector products.
struct DecodeCircuit {
    first: Operator,
    second: Operator,
    recovery: Operator,
    /// Logical target on the mode at the decayed amplitude.
    target_mode: StateVector,
    dim: usize,
}

impl DecodeCircuit {
    fn build(logical: &LogicalQubitState, space: FockSpace, eta: f64, mode: &GateMode) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::Input(format!("eta must lie in (0, 1], got {eta}")));
        }
        let cn = cn_operator(space, mode)?;
        let alpha_eff = eta.sqrt() * logical.alpha_ref;
        let x = logical_x(space, alpha_eff)?;
        Ok(DecodeCircuit {
            first: embed_cn(&cn, space.dim(), 0),
            second: embed_cn(&cn, space.dim(), 1),
            recovery: x.tensor(&Operator::identity(ancilla_space())),
            target_mode: logical.mode_state_at(space, alpha_eff)?,
            dim: space.dim(),
        })
    }

    /// Decode, measure both ancillas, recover on (1,1), score. Single-ancilla
    /// syndromes are scored without recovery; rejecting them is the caller's
    /// policy decision.
    fn run(
        &self,
        psi: &StateVector,
        jump_count_injected: u8,
        branch_probability: f64,
        rng: &mut impl Rng,
    ) -> Result<CircuitOutcome> {
        let decoded = self.second.apply(&self.first.apply(psi)?)?;
        let amps = decoded.amplitudes();

        let mut q = [0.0f64; 4];
        for n in 0..self.dim {
            for s in 0..4 {
                q[s] += amps[n * 4 + s].norm_sqr();
            }
        }
        let u: f64 = rng.gen();
        let mut pick = 3;
        let mut acc = 0.0;
        for (s, qs) in q.iter().enumerate() {
            acc += qs;
            if u < acc {
                pick = s;
                break;
            }
        }
        let q_pick = q[pick];
        if q_pick < ZERO_PROB_FLOOR {
            return Err(Error::ZeroProbability { k: pick });
        }
        let syndrome = ((pick >> 1) as u8, (pick & 1) as u8);

        let mut collapsed = DVector::<C64>::zeros(4 * self.dim);
        let scale = C64::new(1.0 / q_pick.sqrt(), 0.0);
        for n in 0..self.dim {
            collapsed[n * 4 + pick] = amps[n * 4 + pick] * scale;
        }
        let collapsed = StateVector::new(decoded.space().clone(), collapsed)?;

        let corrected = if syndrome == (1, 1) {
            self.recovery.apply(&collapsed)?
        } else {
            collapsed
        };

        let anc = StateVector::basis_state(ancilla_space(), pick)?;
        let target = self.target_mode.tensor(&anc);
        let logical_fidelity = fidelity(&target, &corrected)?;

        Ok(CircuitOutcome {
            syndrome,
            corrected_state: corrected,
            logical_fidelity,
            jump_count_injected,
            probability: branch_probability * q_pick,
        })
    }
}

/// Run the decode round on an encoded (and possibly damaged) state: decode
/// double CN, ancilla measurement, logical-X recovery on syndrome (1,1).
/// Syndromes (0,1) and (1,0) indicate a single-ancilla fault this circuit
/// never injects itself; they are reported as errors here.
pub fn syndrome_and_correct(
    psi: &StateVector,
    logical: &LogicalQubitState,
    eta: f64,
    jump_count_injected: u8,
    mode: &GateMode,
    rng: &mut impl Rng,
) -> Result<CircuitOutcome> {
    let factors = psi.space().factors();
    if factors.len() != 3 || factors[1] != 2 || factors[2] != 2 {
        return Err(Error::Input(format!(
            "expected a mode with two ancillas, got factors {factors:?}"
        )));
    }
    let space = FockSpace::new(factors[0])?;
    let circuit = DecodeCircuit::build(logical, space, eta, mode)?;
    let outcome = circuit.run(psi, jump_count_injected, 1.0, rng)?;
    match outcome.syndrome {
        (0, 0) | (1, 1) => Ok(outcome),
        (s1, s2) => Err(Error::InvalidSyndrome { s1, s2 }),
    }
}

/// Monte Carlo over damping branches: each trial samples the single-jump
/// branch with its raw probability and otherwise follows the no-jump branch,
/// then runs the full circuit. Trial `i` uses stream `i` of a ChaCha12
/// generator seeded with `seed`, so results are reproducible and trials can
/// be partitioned across workers without changing the outcome.
pub fn monte_carlo_protection(
    logical: &LogicalQubitState,
    space: FockSpace,
    gamma: f64,
    t: f64,
    trials: u64,
    seed: u64,
    mode: &GateMode,
) -> Result<ProtectionSummary> {
    if trials == 0 {
        return Err(Error::Input("trials must be >= 1".into()));
    }
    if gamma < 0.0 || t < 0.0 {
        return Err(Error::Input(format!(
            "gamma and t must be nonnegative, got {gamma}, {t}"
        )));
    }
    let eta = (-gamma * t).exp();
    let encoded = encode(logical, space, mode)?;

    let probs = jump_probabilities(&mode_marginal(&encoded), eta)?;
    let p0 = probs[0];
    let p1 = if probs.len() > 1 { probs[1] } else { 0.0 };
    let p_residual = (1.0 - p0 - p1).max(0.0);

    let (no_jump, _) = inject_error(&encoded, eta, 0)?;
    let jump = if p1 >= ZERO_PROB_FLOOR {
        Some(inject_error(&encoded, eta, 1)?.0)
    } else {
        None
    };

    let circuit = DecodeCircuit::build(logical, space, eta, mode)?;
    let mut fidelity_sum = 0.0;
    let mut syndrome_counts = [[0u64; 2]; 2];
    let mut jump_trials = 0u64;
    let mut invalid = 0u64;

    for trial in 0..trials {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        let (state, k, p_branch) = match &jump {
            Some(j) if rng.gen::<f64>() < p1 => (j, 1u8, p1),
            _ => (&no_jump, 0u8, p0),
        };
        let outcome = circuit.run(state, k, p_branch, &mut rng)?;
        fidelity_sum += outcome.logical_fidelity;
        syndrome_counts[outcome.syndrome.0 as usize][outcome.syndrome.1 as usize] += 1;
        jump_trials += k as u64;
        if outcome.syndrome.0 != outcome.syndrome.1 {
            invalid += 1;
        }
    }

    Ok(ProtectionSummary {
        alpha: logical.alpha_ref,
        dim: space.dim(),
        gamma,
        t,
        eta,
        trials,
        seed,
        mean_fidelity: fidelity_sum / trials as f64,
        syndrome_counts,
        jump_trials,
        invalid_syndrome_trials: invalid,
        p_no_jump: p0,
        p_single_jump: p1,
        p_residual,
    })
}

/// Mode state with the ancillas projected out, valid whenever the mode is in
/// a product with them (true right after encode, where every mode parity
/// sector pairs with one ancilla configuration; jump probabilities only read
/// photon-number weights, which that correlation does not disturb).
fn mode_marginal(psi: &StateVector) -> StateVector {
    let factors = psi.space().factors();
    let d = factors[0];
    let anc_total: usize = factors[1..].iter().product();
    let amps = psi.amplitudes();
    let mut mode = DVector::<C64>::zeros(d);
    for n in 0..d {
        let w: f64 = (0..anc_total).map(|s| amps[n * anc_total + s].norm_sqr()).sum();
        mode[n] = C64::new(w.sqrt(), 0.0);
    }
    let space = CompositeSpace::new(vec![d]).expect("dim >= 2");
    StateVector::new(space, mode).expect("norm preserved")
}
