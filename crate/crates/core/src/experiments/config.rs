use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::exponents::{ExponentTuple, ExtExp, ProblemSpec};
use crate::opnorm::{AscentOptions, OpNormOptions, DEFAULT_ENUMERATION_BUDGET};
use crate::tensor::Field;
use crate::witness::FamilyDescriptor;

use super::probe::{probe_optimality, GrowthReport, ProbeOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecConfig {
    pub m: usize,
    pub p: Vec<ExtExp>,
    /// 1-based summation order, outermost first; identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<usize>>,
    #[serde(default = "default_field")]
    pub field: Field,
}

fn default_field() -> Field {
    Field::Real
}

impl SpecConfig {
    pub fn to_spec(&self) -> Result<ProblemSpec> {
        if self.p.len() != self.m {
            return domain(format!("m = {} but {} space exponents given", self.m, self.p.len()));
        }
        let sigma = match &self.sigma {
            None => (0..self.m).collect(),
            Some(s) => {
                if s.contains(&0) {
                    return domain("sigma is 1-based");
                }
                s.iter().map(|a| a - 1).collect()
            }
        };
        ProblemSpec::new(self.p.clone(), sigma, self.field)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// A growth-probe run, complete enough to reproduce its report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_id")]
    pub experiment_id: String,
    pub spec: SpecConfig,
    pub q: Vec<ExtExp>,
    pub family: FamilyDescriptor,
    pub n_range: Vec<usize>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default = "default_budget")]
    pub budget: u64,
    #[serde(default)]
    pub ascent: AscentOptions,
    #[serde(default = "default_threshold")]
    pub slope_threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default)]
    pub format: OutputFormat,
}

fn default_id() -> String {
    "probe".to_string()
}

fn default_budget() -> u64 {
    DEFAULT_ENUMERATION_BUDGET as u64
}

fn default_threshold() -> f64 {
    0.05
}

impl ExperimentConfig {
    pub fn probe_options(&self) -> ProbeOptions {
        ProbeOptions {
            opnorm: OpNormOptions {
                ascent: self.ascent,
                budget: self.budget as u128,
            },
            slope_threshold: self.slope_threshold,
        }
    }

    pub fn run_probe(&self) -> Result<GrowthReport> {
        let spec = self.spec.to_spec()?;
        let q = ExponentTuple::new(self.q.clone())?;
        probe_optimality(&spec, &q, &self.family, &self.n_range, &self.seeds, &self.probe_options())
    }
}
