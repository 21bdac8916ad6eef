//! Logical gate set for the parity-encoded qubit: drive-induced rotations,
//! the two-mode conditional phase, conditional-parity readout gates, and the
//! trapped-ion realisation of the latter.
//!
//! Conditional gates are assembled block-diagonally over control photon
//! number; nothing here ever multiplies matrices on the joint space.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{
    annihilation, parity_operator, propagator, CompositeSpace, FockSpace, Operator,
};

/// Logical rotation by a linear drive `beta (a + a^dag)` applied for unit
/// time: maps `|0>_L` to approximately `cos(theta)|0>_L - i sin(theta)|1>_L`,
/// with leakage shrinking as `alpha` grows.
///
/// The drive strength is `theta / (2 alpha)`: the displacement prefactor and
/// the coherent-state overlap phase each advance the codeword superposition
/// by `alpha beta t`, so a drive of `theta/alpha` would overshoot to `2
/// theta`.
pub fn hgate(space: FockSpace, alpha: f64, theta: f64) -> Result<Operator> {
    if !(alpha > 0.0) {
        return Err(Error::Input(format!(
            "drive rotation needs alpha > 0, got {alpha}"
        )));
    }
    let a = annihilation(space);
    let beta = C64::new(theta / (2.0 * alpha), 0.0);
    let h = Operator::new(space.into(), (a.matrix() + a.adjoint().matrix()) * beta)?;
    propagator(&h, 1.0)
}

/// Two-mode conditional phase `(-1)^{n_a n_b}`: diagonal, exactly unitary.
pub fn pgate(space_a: FockSpace, space_b: FockSpace) -> Operator {
    let joint = CompositeSpace::new(vec![space_a.dim(), space_b.dim()])
        .expect("mode dims are >= 2");
    let diag = nalgebra::DVector::from_fn(joint.total_dim(), |flat, _| {
        let idx = joint.unflatten(flat);
        C64::new(if idx[0] % 2 == 1 && idx[1] % 2 == 1 { -1.0 } else { 1.0 }, 0.0)
    });
    Operator::from_diagonal(joint, diag).expect("diagonal fits by construction")
}

/// Controlled logical flip built from the conditional phase conjugated by
/// half drive rotations on the target, `H_b(-pi/4) P H_b(pi/4)`.
///
/// Per control level the sandwich collapses to a 2-block structure: even
/// `n_a` cancels the two half rotations exactly, odd `n_a` conjugates the
/// target parity into a logical flip (a Y-like rotation, fidelity 1 on the
/// codewords in the large-alpha limit).
pub fn cn_gate(space_a: FockSpace, space_b: FockSpace, alpha: f64) -> Result<Operator> {
    let open = hgate(space_b, alpha, std::f64::consts::FRAC_PI_4)?;
    let close = hgate(space_b, alpha, -std::f64::consts::FRAC_PI_4)?;
    let odd_block = close.compose(&parity_operator(space_b))?.compose(&open)?;

    let da = space_a.dim();
    let db = space_b.dim();
    let joint = CompositeSpace::new(vec![da, db]).expect("mode dims are >= 2");
    let mut mat = DMatrix::<C64>::zeros(da * db, da * db);
    for na in 0..da {
        if na % 2 == 0 {
            // close . open = exp(+iG) exp(-iG) = I, no need to compute it
            for i in 0..db {
                mat[(na * db + i, na * db + i)] = C64::new(1.0, 0.0);
            }
        } else {
            let block = odd_block.matrix();
            for i in 0..db {
                for j in 0..db {
                    mat[(na * db + i, na * db + j)] = block[(i, j)];
                }
            }
        }
    }
    Operator::new(joint, mat)
}

/// Conditional flip of a two-level ancilla on odd photon number:
/// `|n, s> -> |n, s xor (n mod 2)>`. A 0/1 permutation, its own inverse.
pub fn parity_cn(space: FockSpace) -> Operator {
    let d = space.dim();
    let joint = CompositeSpace::new(vec![d, 2]).expect("mode dim >= 2");
    let mut mat = DMatrix::<C64>::zeros(2 * d, 2 * d);
    for n in 0..d {
        for s in 0..2 {
            let flipped = s ^ (n % 2);
            mat[(n * 2 + flipped, n * 2 + s)] = C64::new(1.0, 0.0);
        }
    }
    Operator::new(joint, mat).expect("square by construction")
}

/// Number-conditioned ancilla rotation `exp(-i c n sigma_x)`: per photon
/// level a 2x2 rotation by angle `c n` about x.
///
/// At `c = pi` every block is the scalar `(-1)^n` (a pure mode-parity
/// phase); at `c = pi/2` odd levels flip the ancilla and every level picks
/// up `(-i)^n`, which rotates a coherent amplitude to the imaginary axis.
pub fn ion_cn(space: FockSpace, coefficient: f64) -> Operator {
    let d = space.dim();
    let joint = CompositeSpace::new(vec![d, 2]).expect("mode dim >= 2");
    let mut mat = DMatrix::<C64>::zeros(2 * d, 2 * d);
    for n in 0..d {
        let phi = coefficient * n as f64;
        let (cos, sin) = (phi.cos(), phi.sin());
        mat[(n * 2, n * 2)] = C64::new(cos, 0.0);
        mat[(n * 2 + 1, n * 2 + 1)] = C64::new(cos, 0.0);
        mat[(n * 2, n * 2 + 1)] = C64::new(0.0, -sin);
        mat[(n * 2 + 1, n * 2)] = C64::new(0.0, -sin);
    }
    Operator::new(joint, mat).expect("square by construction")
}

/// Dispersive ion-trap coupling generating `ion_cn` under evolution:
/// `[-Omega eta^2 n + (Omega eta^4 / 4) n(n-1)] sigma_x`, the second term
/// being the quartic Lamb-Dicke correction that spoils the ideal gate.
pub fn ion_hamiltonian(space: FockSpace, omega: f64, eta_ld: f64) -> Result<Operator> {
    if !(eta_ld >= 0.0 && eta_ld < 1.0) {
        return Err(Error::Input(format!(
            "Lamb-Dicke parameter must lie in [0, 1), got {eta_ld}"
        )));
    }
    let d = space.dim();
    let joint = CompositeSpace::new(vec![d, 2]).expect("mode dim >= 2");
    let e2 = eta_ld * eta_ld;
    let mut mat = DMatrix::<C64>::zeros(2 * d, 2 * d);
    for n in 0..d {
        let nf = n as f64;
        let coeff = -omega * e2 * nf + (omega * e2 * e2 / 4.0) * nf * (nf - 1.0);
        let c = C64::new(coeff, 0.0);
        mat[(n * 2, n * 2 + 1)] = c;
        mat[(n * 2 + 1, n * 2)] = c;
    }
    Operator::new(joint, mat)
}

/// Declarative gate description, the form the circuit layer and config files
/// traffic in.
#[derive(Clone, Debug)]
pub enum GateSpec {
    HGate { space: FockSpace, alpha: f64, theta: f64 },
    PGate { space_a: FockSpace, space_b: FockSpace },
    ParityCN { space: FockSpace },
    IonCN { space: FockSpace, coefficient: f64 },
}

impl GateSpec {
    pub fn build(&self) -> Result<Operator> {
        match *self {
            GateSpec::HGate { space, alpha, theta } => hgate(space, alpha, theta),
            GateSpec::PGate { space_a, space_b } => Ok(pgate(space_a, space_b)),
            GateSpec::ParityCN { space } => Ok(parity_cn(space)),
            GateSpec::IonCN { space, coefficient } => Ok(ion_cn(space, coefficient)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{
        cat_state, coherent_state, fidelity, max_abs, number, CatParity, StateVector,
    };
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn logical_pair(space: FockSpace, alpha: f64) -> (StateVector, StateVector) {
        (
            cat_state(space, c(alpha), CatParity::Even).unwrap(),
            cat_state(space, c(alpha), CatParity::Odd).unwrap(),
        )
    }

    #[test]
    fn hgate_rotates_between_codewords() {
        let alpha = 4.0;
        let theta = PI / 8.0;
        let space = FockSpace::for_amplitude(c(alpha));
        let u = hgate(space, alpha, theta).unwrap();
        let (zero, one) = logical_pair(space, alpha);
        let out = u.apply(&zero).unwrap();
        let c0 = zero.inner(&out).unwrap();
        let c1 = one.inner(&out).unwrap();
        // cos(theta)|0>_L  - i sin(theta)|1>_L up to leakage
        assert_abs_diff_eq!(c0.norm_sqr(), theta.cos().powi(2), epsilon = 5e-3);
        assert_abs_diff_eq!(c1.norm_sqr(), theta.sin().powi(2), epsilon = 5e-3);
        let rel = c1 / c0;
        assert_abs_diff_eq!(rel.arg(), -FRAC_PI_2, epsilon = 0.05);
    }

    #[test]
    fn hgate_fidelity_grows_with_amplitude() {
        let theta = FRAC_PI_4;
        let mut last = 0.0;
        for alpha in [2.0, 4.0] {
            let space = FockSpace::for_amplitude(c(alpha));
            let u = hgate(space, alpha, theta).unwrap();
            let (zero, one) = logical_pair(space, alpha);
            let out = u.apply(&zero).unwrap();
            let target = StateVector::new(
                zero.space().clone(),
                zero.amplitudes() * c(theta.cos())
                    + one.amplitudes() * C64::new(0.0, -theta.sin()),
            )
            .unwrap();
            let f = fidelity(&target, &out).unwrap();
            assert!(f > last, "fidelity must grow with alpha: {f} after {last}");
            last = f;
        }
        assert!(last >= 0.99, "alpha = 4 rotation fidelity {last}");
    }

    #[test]
    fn hgate_is_unitary() {
        let space = FockSpace::for_amplitude(c(3.0));
        let u = hgate(space, 3.0, 0.7).unwrap();
        assert!(u.unitarity_deviation() < 1e-10);
    }

    #[test]
    fn pgate_signs_on_logical_and_fock_states() {
        let alpha = 2.0;
        let space = FockSpace::for_amplitude(c(alpha));
        let p = pgate(space, space);
        // exactly unitary: a diagonal of +/-1
        assert_eq!(p.unitarity_deviation(), 0.0);

        let (zero, one) = logical_pair(space, alpha);
        let in_01 = zero.tensor(&one);
        let out_01 = p.apply(&in_01).unwrap();
        assert_relative_eq!(fidelity(&in_01, &out_01).unwrap(), 1.0, max_relative = 1e-12);
        assert!(max_abs(&(out_01.amplitudes() - in_01.amplitudes())) < 1e-12);

        let in_11 = one.tensor(&one);
        let exp_11 = p.expectation(&in_11).unwrap();
        assert_abs_diff_eq!(exp_11.re, -1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(exp_11.im, 0.0, epsilon = 1e-14);

        let f2 = StateVector::basis_state(space.into(), 2).unwrap();
        let f3 = StateVector::basis_state(space.into(), 3).unwrap();
        let exp_23 = p.expectation(&f2.tensor(&f3)).unwrap();
        assert_abs_diff_eq!(exp_23.re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn cn_gate_branches_act_as_controlled_flip() {
        let alpha = 4.0;
        let space = FockSpace::for_amplitude(c(alpha));
        let u = cn_gate(space, space, alpha).unwrap();
        let (zero, one) = logical_pair(space, alpha);

        // even control: target untouched, and exactly so (identity blocks)
        for target in [&zero, &one] {
            let input = zero.tensor(target);
            let out = u.apply(&input).unwrap();
            let f = fidelity(&input, &out).unwrap();
            assert!(f >= 1.0 - 1e-12, "control-0 branch fidelity {f}");
        }
        // odd control: target flipped (up to phase). The flip branch carries
        // the whole pi/2 rotation in one displacement of length pi/(4 alpha),
        // so its fidelity is e^{-(pi/(4 alpha))^2}, about 0.9622 here.
        let predicted = (-(PI / (4.0 * alpha)).powi(2)).exp();
        let out = u.apply(&one.tensor(&zero)).unwrap();
        let f = fidelity(&one.tensor(&one), &out).unwrap();
        assert_relative_eq!(f, predicted, max_relative = 1e-3);
        let out = u.apply(&one.tensor(&one)).unwrap();
        let f = fidelity(&one.tensor(&zero), &out).unwrap();
        assert_relative_eq!(f, predicted, max_relative = 1e-3);
    }

    #[test]
    fn cn_gate_flip_error_shrinks_with_amplitude() {
        let mut last = 0.0;
        for alpha in [3.0, 6.0] {
            let space = FockSpace::for_amplitude(c(alpha));
            let u = cn_gate(space, space, alpha).unwrap();
            let (zero, one) = logical_pair(space, alpha);
            let out = u.apply(&one.tensor(&zero)).unwrap();
            let f = fidelity(&one.tensor(&one), &out).unwrap();
            assert!(f > last);
            last = f;
        }
        assert!(last >= 0.98, "alpha = 6 flip fidelity {last}");
    }

    #[test]
    fn cn_gate_is_unitary() {
        // small amplitude keeps the joint dimension cheap to verify densely
        let space = FockSpace::for_amplitude(c(2.0));
        let u = cn_gate(space, space, 2.0).unwrap();
        assert!(u.unitarity_deviation() < 1e-10);
    }

    #[test]
    fn parity_cn_is_an_exact_permutation() {
        let space = FockSpace::new(6).unwrap();
        let g = parity_cn(space);
        let joint = g.space().clone();
        for (n, s, expect_flip) in [(2usize, 0usize, false), (3, 0, true), (3, 1, true)] {
            let input = StateVector::basis_state(joint.clone(), joint.flatten(&[n, s])).unwrap();
            let out = g.apply(&input).unwrap();
            let target = joint.flatten(&[n, if expect_flip { 1 - s } else { s }]);
            assert_eq!(out.amplitudes()[target], c(1.0));
        }
        // involution with no rounding at all
        let square = g.compose(&g).unwrap();
        let dev = max_abs(&(square.matrix()
            - DMatrix::<C64>::identity(joint.total_dim(), joint.total_dim())));
        assert_eq!(dev, 0.0);
    }

    #[test]
    fn ion_cn_limiting_coefficients() {
        let alpha = c(1.5);
        let space = FockSpace::for_amplitude(alpha);
        let d = space.dim();

        // c = 0: identity
        let g0 = ion_cn(space, 0.0);
        let dev = max_abs(&(g0.matrix() - DMatrix::<C64>::identity(2 * d, 2 * d)));
        assert_eq!(dev, 0.0);

        // c = pi: pure (-1)^n phase, ancilla never flips
        let g_pi = ion_cn(space, PI);
        let psi = coherent_state(space, alpha).unwrap();
        let anc = StateVector::basis_state(CompositeSpace::new(vec![2]).unwrap(), 0).unwrap();
        let out = g_pi.apply(&psi.tensor(&anc)).unwrap();
        let target = coherent_state(space, -alpha).unwrap().tensor(&anc);
        assert_relative_eq!(fidelity(&target, &out).unwrap(), 1.0, max_relative = 1e-10);

        // c = pi/2: even cat keeps the ancilla and moves to the rotated
        // amplitude i alpha; odd cat flips the ancilla
        let g_half = ion_cn(space, FRAC_PI_2);
        let even = cat_state(space, alpha, CatParity::Even).unwrap();
        let out = g_half.apply(&even.tensor(&anc)).unwrap();
        let rotated = cat_state(space, alpha * C64::i(), CatParity::Even).unwrap();
        assert_relative_eq!(
            fidelity(&rotated.tensor(&anc), &out).unwrap(),
            1.0,
            max_relative = 1e-10
        );
        let odd = cat_state(space, alpha, CatParity::Odd).unwrap();
        let out = g_half.apply(&odd.tensor(&anc)).unwrap();
        let flipped_anc =
            StateVector::basis_state(CompositeSpace::new(vec![2]).unwrap(), 1).unwrap();
        let rotated_odd = cat_state(space, alpha * C64::i(), CatParity::Odd).unwrap();
        assert_relative_eq!(
            fidelity(&rotated_odd.tensor(&flipped_anc), &out).unwrap(),
            1.0,
            max_relative = 1e-10
        );
    }

    #[test]
    fn ion_hamiltonian_zero_coupling_vanishes() {
        let space = FockSpace::new(10).unwrap();
        let h = ion_hamiltonian(space, 1.0, 0.0).unwrap();
        assert_eq!(max_abs(h.matrix()), 0.0);
        assert!(ion_hamiltonian(space, 1.0, 1.0).is_err());
    }

    #[test]
    fn ion_hamiltonian_second_term_sets_gate_error() {
        // drive |n=2> for the pi pulse of the linear term; the quartic term
        // detunes the phase by delta = pi eta^2 n(n-1)/4
        let space = FockSpace::new(12).unwrap();
        let omega = 1.0;
        let eta_ld: f64 = 0.1;
        let t = PI / (omega * eta_ld * eta_ld);
        let h_full = ion_hamiltonian(space, omega, eta_ld).unwrap();

        let n = 2usize;
        let delta = PI * eta_ld * eta_ld * (n * (n - 1)) as f64 / 4.0;
        let joint = h_full.space().clone();
        let input = StateVector::basis_state(joint.clone(), joint.flatten(&[n, 0])).unwrap();
        let full = crate::hilbert::evolve_static(&h_full, t, &input).unwrap();

        // first term alone returns |n, s> to itself at this pulse length
        let infidelity = 1.0 - fidelity(&input, &full).unwrap();
        assert_relative_eq!(infidelity, delta.sin().powi(2), max_relative = 1e-8);
    }

    #[test]
    fn ion_hamiltonian_expectation_matches_moment_oracle() {
        let alpha = 2.0;
        let omega = 0.8;
        let eta_ld = 0.15;
        let space = FockSpace::new(40).unwrap();
        let h = ion_hamiltonian(space, omega, eta_ld).unwrap();

        let even = cat_state(space, c(alpha), CatParity::Even).unwrap();
        let plus = StateVector::new(
            CompositeSpace::new(vec![2]).unwrap(),
            nalgebra::DVector::from_vec(vec![
                c(std::f64::consts::FRAC_1_SQRT_2),
                c(std::f64::consts::FRAC_1_SQRT_2),
            ]),
        )
        .unwrap();
        let measured = h.expectation(&even.tensor(&plus)).unwrap();

        // moments measured independently of the coupling matrix:
        // <n> from the number operator, <n(n-1)> from it squared
        let n_op = number(space);
        let n_mean = n_op.expectation(&even).unwrap().re;
        let n2_mean = n_op.compose(&n_op).unwrap().expectation(&even).unwrap().re;
        let pair_mean = n2_mean - n_mean;
        let e2 = eta_ld * eta_ld;
        let oracle = -omega * e2 * n_mean + omega * e2 * e2 / 4.0 * pair_mean;
        assert_relative_eq!(measured.re, oracle, max_relative = 1e-12);
        assert_abs_diff_eq!(measured.im, 0.0, epsilon = 1e-14);
        // cats are a^2 eigenstates, so <n(n-1)> = |alpha|^4 on the nose
        assert_relative_eq!(pair_mean, alpha.powi(4), max_relative = 1e-10);
        assert_relative_eq!(n_mean, 3.9973171989562681752, max_relative = 1e-10);
    }

    #[test]
    fn gate_spec_builds_every_variant() {
        let space = FockSpace::new(14).unwrap();
        let specs = [
            GateSpec::HGate { space, alpha: 1.5, theta: 0.3 },
            GateSpec::PGate { space_a: space, space_b: space },
            GateSpec::ParityCN { space },
            GateSpec::IonCN { space, coefficient: FRAC_PI_2 },
        ];
        for spec in &specs {
            let u = spec.build().unwrap();
            assert!(
                u.unitarity_deviation() < 1e-10,
                "non-unitary build from {spec:?}"
            );
        }
    }
}
