use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("truncated basis of dim {dim} leaks {leakage:.3e} probability (tolerance {tol:.1e}); enlarge the space")]
    Truncation { dim: usize, leakage: f64, tol: f64 },

    #[error("odd cat state is identically zero at alpha = 0")]
    DegenerateCat,

    #[error("operands live on different spaces: {left} vs {right}")]
    SpaceMismatch { left: String, right: String },

    #[error("operator is not Hermitian: max |H - H^dag| element = {max_dev:.3e}")]
    NonHermitian { max_dev: f64 },

    #[error("Kraus set with kmax = {kmax} loses {deficit:.3e} trace; raise kmax or the tolerance")]
    Completeness { kmax: usize, deficit: f64 },

    #[error("jump branch k = {k} has probability below 1e-300; conditional state undefined")]
    ZeroProbability { k: usize },

    #[error("integrator step dt = {dt:.3e} rejected: {why}")]
    StepSize { dt: f64, why: String },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("norm drifted by {drift:.3e} at t = {t:.6} (tolerance {tol:.1e}); reduce dt")]
    NormDrift { t: f64, drift: f64, tol: f64 },

    #[error("need at least {need} trajectory samples in the averaging window, have {have}")]
    InsufficientSamples { have: usize, need: usize },

    #[error("syndrome ({s1}, {s2}) does not correspond to a photon-loss branch")]
    InvalidSyndrome { s1: u8, s2: u8 },
}

pub type Result<T> = std::result::Result<T, Error>;
