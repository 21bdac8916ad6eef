//! Error-correction quality diagnostics for a two-codeword code under a
//! given Kraus set, plus the closed-form branch-probability ratios and the
//! reset-time budget specific to the cat code.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::channel::kraus_operator;
use crate::error::{Error, Result};
use crate::hilbert::{cat_state, CatParity, FockSpace, Operator, StateVector};

/// Orthonormality required of the codewords before a report is meaningful.
pub const CODEWORD_ORTHO_TOL: f64 = 1e-10;

/// Correctability report for codewords `{|c_i>}` under Kraus set `{Y_k}`.
///
/// `condition_matrix` holds `<c_i| Y_k^dag Y_l |c_j>` at row `k*n + i`,
/// column `l*n + j` (n = number of codewords). A perfectly correctable set
/// would make it `c_kl * delta_ij`; the report quantifies the two ways real
/// codes miss that: `off_diag_max` is the largest codeword-mixing element
/// (i != j), and `uniformity_gap_per_k` is the relative spread
/// (max - min)/mean of the same-branch diagonal `<c_i| Y_k^dag Y_k |c_i>`
/// across codewords.
///
/// `passed` gates on the uniformity gaps only: for photon-loss branches on
/// cat codewords the cross-branch elements are large by construction (every
/// branch lands in the same pair of damped-cat subspaces), so they are
/// reported raw rather than folded into the verdict.
#[derive(Clone, Debug)]
pub struct KLReport {
    pub condition_matrix: DMatrix<C64>,
    pub off_diag_max: f64,
    pub uniformity_gap_per_k: Vec<f64>,
    pub passed: bool,
}

pub fn kl_condition_matrix(
    codewords: &[StateVector],
    kraus: &[Operator],
    tolerance: f64,
) -> Result<KLReport> {
    let n = codewords.len();
    if n < 2 {
        return Err(Error::Input(format!("need >= 2 codewords, got {n}")));
    }
    if kraus.is_empty() {
        return Err(Error::Input("need >= 1 Kraus operator".into()));
    }
    for i in 0..n {
        for j in i..n {
            let overlap = codewords[i].inner(&codewords[j])?;
            let target = if i == j { 1.0 } else { 0.0 };
            let dev = (overlap - C64::new(target, 0.0)).norm();
            if dev > CODEWORD_ORTHO_TOL {
                return Err(Error::Input(format!(
                    "codewords {i},{j} not orthonormal: deviation {dev:.3e}"
                )));
            }
        }
    }

    let kn = kraus.len();
    let mut branches = Vec::with_capacity(kn * n);
    for y in kraus {
        for cw in codewords {
            branches.push(y.apply(cw)?);
        }
    }
    let mut cond = DMatrix::<C64>::zeros(kn * n, kn * n);
    for (row, left) in branches.iter().enumerate() {
        for (col, right) in branches.iter().enumerate() {
            cond[(row, col)] = left.inner(right)?;
        }
    }

    let mut off_diag_max = 0.0f64;
    for k in 0..kn {
        for l in 0..kn {
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        off_diag_max = off_diag_max.max(cond[(k * n + i, l * n + j)].norm());
                    }
                }
            }
        }
    }

    let mut gaps = Vec::with_capacity(kn);
    for k in 0..kn {
        let diag: Vec<f64> = (0..n).map(|i| cond[(k * n + i, k * n + i)].re).collect();
        let max = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        let mean = diag.iter().sum::<f64>() / n as f64;
        // a branch that annihilates every codeword constrains nothing
        gaps.push(if mean > 1e-300 { (max - min) / mean } else { 0.0 });
    }

    let passed = gaps.iter().all(|g| *g <= tolerance);
    Ok(KLReport { condition_matrix: cond, off_diag_max, uniformity_gap_per_k: gaps, passed })
}

/// Closed-form even/odd branch-probability ratio when no photon is lost:
/// `(1 + e^{-2 eta |a|^2}) / (1 - e^{-2 eta |a|^2})`.
///
/// Valid for the ideal (orthogonal-coherent-state) code; `alpha` is the
/// codeword amplitude magnitude and must be nonzero for a finite value.
pub fn kl_ratio_no_jump(alpha: f64, eta: f64) -> f64 {
    let x = (-2.0 * eta * alpha * alpha).exp();
    (1.0 + x) / (1.0 - x)
}

/// Closed-form ratio for the single-loss branch, the reciprocal of the
/// no-loss one: `(1 - e^{-2 eta |a|^2}) / (1 + e^{-2 eta |a|^2})`.
pub fn kl_ratio_jump(alpha: f64, eta: f64) -> f64 {
    let x = (-2.0 * eta * alpha * alpha).exp();
    (1.0 - x) / (1.0 + x)
}

/// Branch-probability ratio measured on the actual normalised codewords in a
/// truncated space: `<even| Y_k^dag Y_k |even> / <odd| Y_k^dag Y_k |odd>`.
///
/// Differs from the closed forms by the even/odd normalisation mismatch,
/// a factor `(1 - e^{-2|a|^2})/(1 + e^{-2|a|^2})` independent of k.
pub fn kl_ratio_exact(alpha: C64, eta: f64, k: usize, space: FockSpace) -> Result<f64> {
    let even = cat_state(space, alpha, CatParity::Even)?;
    let odd = cat_state(space, alpha, CatParity::Odd)?;
    let y = kraus_operator(space, k, eta)?;
    let p_even = y.apply(&even)?.norm().powi(2);
    let p_odd = y.apply(&odd)?.norm().powi(2);
    Ok(p_even / p_odd)
}

/// How long a codeword amplitude can decay before the code stops resolving
/// the two logical states at the requested tolerance.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ResetBudget {
    /// Surviving mean photon number `eta |a0|^2` at which the ratio gap
    /// reaches the tolerance: `L = ln(2/tolerance)/2`.
    pub l_threshold: f64,
    /// Latest reset time: `(1/gamma) ln(|a0|^2 / L)`, or 0 when the initial
    /// amplitude is already at or below the threshold.
    pub t_max: f64,
}

pub fn reset_budget(alpha0: f64, gamma: f64, tolerance: f64) -> Result<ResetBudget> {
    if !(tolerance > 0.0 && tolerance < 1.0) {
        return Err(Error::Input(format!(
            "tolerance must lie in (0, 1), got {tolerance}"
        )));
    }
    if !(gamma > 0.0) {
        return Err(Error::Input(format!("gamma must be positive, got {gamma}")));
    }
    let l = (2.0 / tolerance).ln() / 2.0;
    let a2 = alpha0 * alpha0;
    let t_max = if a2 > l { (a2 / l).ln() / gamma } else { 0.0 };
    Ok(ResetBudget { l_threshold: l, t_max })
}
