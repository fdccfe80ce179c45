//! Derivative-free minimization of genotype objectives.

mod baseline;
mod cmaes;
mod experiment;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::{ObjectiveReport, SmoothProblem};

pub use baseline::{one_plus_one_es, random_search};
pub use cmaes::{cmaes_minimize, CmaesParameters};
pub use experiment::{run_experiment, write_artifacts, Experiment, GenotypeFile};

/// Something the optimizers can minimize.
///
/// `evaluation` is the zero-based global evaluation index, assigned by the
/// optimizer in sample order so that parallel evaluation stays deterministic.
pub trait Objective: Sync {
    fn evaluate(&self, x: &[f64], evaluation: u64) -> ObjectiveReport;

    /// Totals from different stages are not comparable (the penalty weights
    /// changed in between); the tracked best restarts at every new stage.
    fn stage(&self, _evaluation: u64) -> usize {
        0
    }
}

impl Objective for SmoothProblem {
    fn evaluate(&self, x: &[f64], evaluation: u64) -> ObjectiveReport {
        SmoothProblem::evaluate(self, x, evaluation)
    }

    fn stage(&self, evaluation: u64) -> usize {
        self.penalty().stage_at(evaluation)
    }
}

/// Adapts a plain `f(x) -> value` function.
pub struct Scalar<F>(pub F);

impl<F: Fn(&[f64]) -> f64 + Sync> Objective for Scalar<F> {
    fn evaluate(&self, x: &[f64], _evaluation: u64) -> ObjectiveReport {
        ObjectiveReport::scalar((self.0)(x))
    }
}

fn default_sigma0() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Search-space dimension; filled from the problem layout when omitted.
    #[serde(default)]
    pub dimension: Option<usize>,
    /// `λ`; defaults to `4 + ⌊3 ln N⌋`.
    #[serde(default)]
    pub population_size: Option<usize>,
    /// Defaults to the zero vector.
    #[serde(default)]
    pub initial_mean: Option<Vec<f64>>,
    #[serde(default = "default_sigma0")]
    pub sigma0: f64,
    pub max_evaluations: u64,
    /// Stop once the tracked best total is at or below this value.
    #[serde(default)]
    pub target: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    /// Keep the report of every single evaluation in the trace.
    #[serde(default)]
    pub record_evaluations: bool,
}

impl OptimizerConfig {
    pub fn new(dimension: usize, max_evaluations: u64, seed: u64) -> Self {
        Self {
            dimension: Some(dimension),
            population_size: None,
            initial_mean: None,
            sigma0: default_sigma0(),
            max_evaluations,
            target: None,
            seed,
            record_evaluations: false,
        }
    }

    pub fn with_initial_mean(mut self, mean: Vec<f64>) -> Self {
        self.initial_mean = Some(mean);
        self
    }

    pub fn with_sigma0(mut self, sigma0: f64) -> Self {
        self.sigma0 = sigma0;
        self
    }

    pub fn with_target(mut self, target: f64) -> Self {
        self.target = Some(target);
        self
    }

    pub fn with_population_size(mut self, lambda: usize) -> Self {
        self.population_size = Some(lambda);
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Checks the config and pins the dimension to `dimension`.
    pub fn resolved(&self, dimension: usize) -> Result<Self> {
        let mut cfg = self.clone();
        match cfg.dimension {
            Some(d) if d != dimension => {
                return Err(Error::Config(format!(
                    "optimizer dimension {d} does not match the problem dimension {dimension}"
                )))
            }
            _ => cfg.dimension = Some(dimension),
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn dim(&self) -> usize {
        self.dimension.or_else(|| self.initial_mean.as_ref().map(Vec::len)).unwrap_or(0)
    }

    pub fn lambda(&self) -> usize {
        self.population_size.unwrap_or_else(|| default_population_size(self.dim()))
    }

    pub fn mean0(&self) -> Vec<f64> {
        self.initial_mean.clone().unwrap_or_else(|| vec![0.0; self.dim()])
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if n < 1 {
            return Err(Error::Config("optimizer dimension must be at least 1".into()));
        }
        if let Some(mean) = &self.initial_mean {
            if mean.len() != n {
                return Err(Error::Config(format!("initial mean has {} entries, dimension is {n}", mean.len())));
            }
            if !mean.iter().all(|v| v.is_finite()) {
                return Err(Error::Config("initial mean must be finite".into()));
            }
        }
        if !(self.sigma0 > 0.0 && self.sigma0.is_finite()) {
            return Err(Error::Config(format!("sigma0 must be positive, got {}", self.sigma0)));
        }
        if self.lambda() < 2 {
            return Err(Error::Config("population size must be at least 2".into()));
        }
        Ok(())
    }
}

/// `4 + ⌊3 ln N⌋`.
pub fn default_population_size(n: usize) -> usize {
    4 + (3.0 * (n.max(1) as f64).ln()).floor() as usize
}

/// One row of the optimizer trace.
///
/// `best_*` describe the tracked best solution of the current penalty stage.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: u64,
    pub evaluations: u64,
    pub best_total: f64,
    pub best_r2: f64,
    pub op_penalty: f64,
    pub var_penalty: f64,
    pub sigma: f64,
    pub stage: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxEvaluations,
    TargetReached,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub records: Vec<GenerationRecord>,
    pub best_x: Vec<f64>,
    pub best_report: ObjectiveReport,
    pub evaluations: u64,
    pub stop: StopReason,
    /// Every evaluation in index order, when requested.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub evaluation_log: Vec<ObjectiveReport>,
}

impl RunTrace {
    pub const CSV_HEADER: &'static str = "generation,evaluations,best_total,best_r2,op_penalty,var_penalty,sigma";

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                r.generation, r.evaluations, r.best_total, r.best_r2, r.op_penalty, r.var_penalty, r.sigma
            )?;
        }
        Ok(())
    }

    pub fn write_evaluations_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", ObjectiveReport::CSV_HEADER)?;
        for (i, r) in self.evaluation_log.iter().enumerate() {
            writeln!(w, "{}", r.csv_row(i as u64))?;
        }
        Ok(())
    }
}

/// Ranking key: non-finite totals sort last.
pub(crate) fn rank_key(total: f64) -> f64 {
    if total.is_nan() {
        f64::INFINITY
    } else {
        total
    }
}

/// Running best of the current stage.
#[derive(Clone, Debug)]
pub(crate) struct BestTracker {
    pub x: Vec<f64>,
    pub report: ObjectiveReport,
    pub stage: usize,
}

impl BestTracker {
    pub fn new(x: Vec<f64>, report: ObjectiveReport, stage: usize) -> Self {
        Self { x, report, stage }
    }

    pub fn offer(&mut self, x: &[f64], report: &ObjectiveReport, stage: usize) {
        if stage > self.stage || rank_key(report.total) < rank_key(self.report.total) {
            self.x.clear();
            self.x.extend_from_slice(x);
            self.report = *report;
            self.stage = stage;
        }
    }

    pub fn record(&self, generation: u64, evaluations: u64, sigma: f64) -> GenerationRecord {
        GenerationRecord {
            generation,
            evaluations,
            best_total: self.report.total,
            best_r2: self.report.r_squared,
            op_penalty: self.report.op_penalty,
            var_penalty: self.report.var_penalty,
            sigma,
            stage: self.stage,
        }
    }
}
