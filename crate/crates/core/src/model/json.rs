//! The model file format:
//!
//! ```json
//! { "birth": [{"c": 3.0, "order": 2}, {"c": 0.75, "order": 0}],
//!   "death": [{"c": 1.0, "order": 3}, {"c": 2.75, "order": 1}],
//!   "scan":  {"name": "mu", "targets": [["birth", 1]]} }
//! ```
//!
//! `vexp` may be given per term and defaults to `1 - order`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BirthDeathModel, RateTerm, ScanBinding, Side};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub c: f64,
    pub order: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vexp: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(default)]
    pub birth: Vec<TermSpec>,
    #[serde(default)]
    pub death: Vec<TermSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanBinding>,
}

impl From<&TermSpec> for RateTerm {
    fn from(t: &TermSpec) -> Self {
        match t.vexp {
            Some(a) => RateTerm::with_exponent(t.c, t.order, a),
            None => RateTerm::mass_action(t.c, t.order),
        }
    }
}

impl From<&RateTerm> for TermSpec {
    fn from(t: &RateTerm) -> Self {
        let vexp = (t.volume_exponent != t.leading_exponent()).then_some(t.volume_exponent);
        TermSpec { c: t.coefficient, order: t.order, vexp }
    }
}

impl ModelFile {
    pub fn into_model(self) -> Result<BirthDeathModel> {
        let model = BirthDeathModel::new(
            self.birth.iter().map(RateTerm::from).collect(),
            self.death.iter().map(RateTerm::from).collect(),
        )?;
        match self.scan {
            Some(binding) => model.with_scan(binding),
            None => Ok(model),
        }
    }
}

impl BirthDeathModel {
    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str::<ModelFile>(s)?.into_model()
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| Error::Read { path: path.to_path_buf(), source })?;
        Self::from_json_str(&text)
    }

    pub fn to_model_file(&self) -> ModelFile {
        ModelFile {
            birth: self.terms(Side::Birth).iter().map(TermSpec::from).collect(),
            death: self.terms(Side::Death).iter().map(TermSpec::from).collect(),
            scan: self.scan().cloned(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_model_file()).expect("model file is always serializable")
    }
}
