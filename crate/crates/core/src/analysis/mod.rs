//! Parameter scans and decompositions built on the model, exact and asymptotic layers.

mod bifurcation;
mod classify;
mod phase;
mod vanthoff;

use std::fmt;
use std::sync::Arc;

pub use bifurcation::{scan_bifurcations, scan_bifurcations_with, BifurcationEvent, BifurcationKind};
pub use classify::{classify_bistability, potential_extrema, BasinClassification, PotentialExtrema};
pub use phase::{phase_transition_scan, phase_transition_scan_with, BranchMinimum, MaxwellPoint, PhaseDiagram, PhasePoint, PhaseRow};
pub use vanthoff::{vanthoff_decompose, VanthoffCurves, VanthoffRow};

use crate::model::{build_expansion, BirthDeathModel, RateExpansion};
use crate::{Error, Result};

type Builder = Arc<dyn Fn(f64) -> Result<BirthDeathModel> + Send + Sync>;

/// A one-parameter family of models `mu -> model(mu)`.
#[derive(Clone)]
pub struct ModelFamily {
    name: String,
    build: Builder,
}

impl fmt::Debug for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelFamily").field("parameter", &self.name).finish_non_exhaustive()
    }
}

impl ModelFamily {
    /// The family obtained by varying the model's bound scan parameter.
    pub fn from_scan(model: &BirthDeathModel) -> Result<Self> {
        let name = model
            .scan()
            .ok_or_else(|| Error::Precondition("model declares no scan parameter".into()))?
            .name
            .clone();
        let base = model.clone();
        Ok(Self { name, build: Arc::new(move |mu| base.with_parameter(mu)) })
    }

    pub fn from_fn(name: impl Into<String>, f: impl Fn(f64) -> Result<BirthDeathModel> + Send + Sync + 'static) -> Self {
        Self { name: name.into(), build: Arc::new(f) }
    }

    pub fn parameter_name(&self) -> &str {
        &self.name
    }

    pub fn at(&self, mu: f64) -> Result<BirthDeathModel> {
        (self.build)(mu)
    }

    pub fn expansion_at(&self, mu: f64) -> Result<RateExpansion> {
        build_expansion(&self.at(mu)?)
    }
}

/// Uniform grid of `points` values over `[lo, hi]`, as used by `--range lo:hi:points`.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect(),
    }
}
