//! Run configurations. Every command builds one of these, every output
//! echoes it back, and `--config <file>` accepts one directly, so any result
//! can be reproduced from its own header.

use catsim::adiabatic::RampSchedule;
use catsim::hilbert::CatParity;
use catsim::qec::GateMode;
use catsim::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case", deny_unknown_fields)]
pub enum RunConfig {
    Ratios {
        alpha: Vec<f64>,
        eta: Vec<f64>,
        /// Uniformity tolerance fed to the code-check report.
        #[serde(default = "defaults::kl_tol")]
        kl_tol: f64,
        #[serde(default)]
        dim: Option<usize>,
        #[serde(default)]
        out: Option<PathBuf>,
    },
    Adiabatic {
        schedule: String,
        #[serde(default = "defaults::chi")]
        chi: f64,
        #[serde(default = "defaults::parity")]
        parity: String,
        #[serde(default = "defaults::t_final")]
        t_final: f64,
        #[serde(default = "defaults::dt")]
        dt: f64,
        #[serde(default = "defaults::sample_every")]
        sample_every: usize,
        #[serde(default = "defaults::dim")]
        dim: usize,
        #[serde(default = "defaults::tail_fraction")]
        tail_fraction: f64,
        #[serde(default = "defaults::trajectory_out")]
        out: PathBuf,
    },
    Qec {
        alpha: f64,
        gamma: f64,
        t: f64,
        #[serde(default = "defaults::trials")]
        trials: u64,
        #[serde(default = "defaults::seed")]
        seed: u64,
        #[serde(default)]
        gate_mode: GateMode,
        #[serde(default)]
        dim: Option<usize>,
        #[serde(default)]
        out: Option<PathBuf>,
    },
    ResetBudget {
        alpha0: f64,
        gamma: f64,
        tolerance: f64,
    },
}

pub mod defaults {
    use std::path::PathBuf;

    pub fn kl_tol() -> f64 {
        1e-6
    }
    pub fn chi() -> f64 {
        1.0
    }
    pub fn parity() -> String {
        "even".into()
    }
    pub fn t_final() -> f64 {
        60.0
    }
    pub fn dt() -> f64 {
        5e-4
    }
    pub fn sample_every() -> usize {
        100
    }
    pub fn dim() -> usize {
        26
    }
    pub fn tail_fraction() -> f64 {
        0.2
    }
    pub fn trajectory_out() -> PathBuf {
        PathBuf::from("trajectory.csv")
    }
    pub fn trials() -> u64 {
        1000
    }
    pub fn seed() -> u64 {
        7
    }
}

/// `linear:rate=<float>` or `tanh:k0=<float>,lambda=<float>`.
pub fn parse_schedule(text: &str) -> Result<RampSchedule> {
    let (kind, rest) = text
        .split_once(':')
        .ok_or_else(|| Error::Input(format!("schedule `{text}` is missing `kind:`")))?;
    let mut fields = std::collections::BTreeMap::new();
    for pair in rest.split(',') {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::Input(format!("schedule field `{pair}` is not key=value")))?;
        let value: f64 = value
            .parse()
            .map_err(|_| Error::Input(format!("schedule value `{value}` is not a number")))?;
        if fields.insert(key.trim(), value).is_some() {
            return Err(Error::Input(format!("schedule repeats field `{key}`")));
        }
    }
    let expect = |keys: &[&str]| -> Result<Vec<f64>> {
        if fields.len() != keys.len() || !keys.iter().all(|k| fields.contains_key(k)) {
            return Err(Error::Input(format!(
                "schedule kind `{kind}` takes exactly the fields {keys:?}"
            )));
        }
        Ok(keys.iter().map(|k| fields[k]).collect())
    };
    match kind {
        "linear" => {
            let v = expect(&["rate"])?;
            Ok(RampSchedule::Linear { rate: v[0] })
        }
        "tanh" => {
            let v = expect(&["k0", "lambda"])?;
            Ok(RampSchedule::TanhSq { k0: v[0], lambda: v[1] })
        }
        other => Err(Error::Input(format!(
            "unknown schedule kind `{other}` (expected linear or tanh)"
        ))),
    }
}

pub fn parse_parity(text: &str) -> Result<CatParity> {
    match text {
        "even" => Ok(CatParity::Even),
        "odd" => Ok(CatParity::Odd),
        other => Err(Error::Input(format!(
            "parity must be even or odd, got `{other}`"
        ))),
    }
}
