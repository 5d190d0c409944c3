use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A fully resolved run: the model, the system size, the command with all of its
/// parameters, the seed and where outputs go. Persisted in every manifest, and
/// enough on its own to repeat the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: Command,
    pub model_path: PathBuf,
    #[serde(rename = "V")]
    pub v: f64,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Worker threads for replicas and scan points; `None` means all cores.
    #[serde(default)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    Stationary {
        n_max: Option<u64>,
    },
    Potential {
        x_range: Range,
    },
    Mfpt {
        from_basin: Basin,
        to: Target,
        methods: Vec<Method>,
        replicas: u64,
        x_max: f64,
        mc_budget_secs: Option<f64>,
    },
    Simulate {
        n0: u64,
        t_max: f64,
        /// With `replicas`, also estimate the passage time from `n0` to this state.
        absorb: Option<u64>,
        replicas: u64,
    },
    Scan {
        param: String,
        range: Range,
        x_min: f64,
        x_max: f64,
    },
    Decompose {
        x_range: Range,
    },
    DiffusionCompare {
        x_range: Range,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Stationary { .. } => "stationary",
            Command::Potential { .. } => "potential",
            Command::Mfpt { .. } => "mfpt",
            Command::Simulate { .. } => "simulate",
            Command::Scan { .. } => "scan",
            Command::Decompose { .. } => "decompose",
            Command::DiffusionCompare { .. } => "diffusion-compare",
        }
    }
}

/// `lo:hi:points`, an inclusive uniform grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Range {
    pub fn grid(&self) -> Vec<f64> {
        crate::analysis::linspace(self.lo, self.hi, self.points)
    }
}

impl FromStr for Range {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::Domain(format!("expected lo:hi:points, got '{s}'"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let points: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if !(hi > lo) || points < 2 {
            return Err(Error::Domain(format!("range '{s}' needs lo < hi and at least 2 points")));
        }
        Ok(Range { lo, hi, points })
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.points)
    }
}

/// Which stable fixed point a passage starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Basin {
    Lower,
    Upper,
}

/// Where a passage ends, relative to the starting basin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    /// The unstable fixed point next to the basin.
    Barrier,
    /// Halfway between that barrier and the basin beyond it.
    PastBarrier,
    UpperBasin,
    LowerBasin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    Asymptotic,
    Kramers,
    Mc,
}
