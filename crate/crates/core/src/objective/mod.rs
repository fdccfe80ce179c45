//! Scalar objective over genotypes: `(1 - R²) + λ_op·p_op + λ_var·p_var`.
//!
//! `R²` is the squared Pearson correlation between the smooth tree's output
//! and the target, so the fitness term ignores scale and offset of the
//! prediction; a decoded formula needs a final linear fit to match the target
//! in absolute terms.

mod dataset;
mod penalty;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::encoding::{build_layout, eval_batch, Genotype, GenotypeLayout, TreeConfig};
use crate::error::{Error, Result};
use crate::stats::pearson;

pub use dataset::{gen_poly10, gen_uniform, poly10, Dataset};
pub use penalty::{leaf_var_penalty, node_op_penalty, op_penalty, var_penalty};

/// Squared Pearson correlation between smooth predictions and the target.
///
/// Constant or non-finite predictions score 0.
pub fn fitness_r2(genotype: &Genotype, layout: &GenotypeLayout, dataset: &Dataset) -> Result<f64> {
    let predictions = eval_batch(genotype, layout, dataset.batch())?;
    Ok(r_squared(&predictions, dataset.target()))
}

/// `pearson(predictions, target)²`, or 0 when undefined.
pub fn r_squared(predictions: &[f64], target: &[f64]) -> f64 {
    if predictions.iter().any(|p| !p.is_finite()) {
        return 0.0;
    }
    pearson(predictions, target).map_or(0.0, |r| r * r)
}

/// Penalty weights in effect for one evaluation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Lambdas {
    pub op: f64,
    pub var: f64,
}

impl Lambdas {
    pub fn new(op: f64, var: f64) -> Self {
        Self { op, var }
    }
}

/// From evaluation `start` onward use these weights.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleStage {
    pub start: u64,
    pub lambda_op: f64,
    pub lambda_var: f64,
}

impl ScheduleStage {
    pub fn new(start: u64, lambda_op: f64, lambda_var: f64) -> Self {
        Self { start, lambda_op, lambda_var }
    }
}

fn default_lambda() -> f64 {
    0.1
}

fn default_allowance() -> usize {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltyConfig {
    /// Used when `schedule` is empty.
    #[serde(default = "default_lambda")]
    pub lambda_op: f64,
    #[serde(default = "default_lambda")]
    pub lambda_var: f64,
    /// Number of leaf slots that may carry weight without penalty.
    #[serde(default = "default_allowance")]
    pub var_allowance: usize,
    /// Staged weights keyed by evaluation index; must start at 0 and increase strictly.
    #[serde(default)]
    pub schedule: Vec<ScheduleStage>,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self {
            lambda_op: default_lambda(),
            lambda_var: default_lambda(),
            var_allowance: default_allowance(),
            schedule: Vec::new(),
        }
    }
}

impl PenaltyConfig {
    /// Constant weights, no schedule.
    pub fn fixed(lambda_op: f64, lambda_var: f64) -> Self {
        Self { lambda_op, lambda_var, ..Self::default() }
    }

    pub fn with_schedule(mut self, schedule: Vec<ScheduleStage>) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let lambda_ok = |l: f64| l.is_finite() && l >= 0.0;
        if !lambda_ok(self.lambda_op) || !lambda_ok(self.lambda_var) {
            return Err(Error::Config("penalty weights must be finite and non-negative".into()));
        }
        if self.var_allowance < 1 {
            return Err(Error::Config("variable allowance must be at least 1".into()));
        }
        if let Some(first) = self.schedule.first() {
            if first.start != 0 {
                return Err(Error::Config("penalty schedule must start at evaluation 0".into()));
            }
        }
        for pair in self.schedule.windows(2) {
            if pair[1].start <= pair[0].start {
                return Err(Error::Config("penalty schedule starts must increase strictly".into()));
            }
        }
        if self.schedule.iter().any(|s| !lambda_ok(s.lambda_op) || !lambda_ok(s.lambda_var)) {
            return Err(Error::Config("scheduled penalty weights must be finite and non-negative".into()));
        }
        Ok(())
    }

    /// Index of the schedule stage active at `evaluation` (0 without a schedule).
    pub fn stage_at(&self, evaluation: u64) -> usize {
        self.schedule.partition_point(|s| s.start <= evaluation).saturating_sub(1)
    }

    pub fn lambdas_at(&self, evaluation: u64) -> Lambdas {
        if self.schedule.is_empty() {
            Lambdas::new(self.lambda_op, self.lambda_var)
        } else {
            let s = self.schedule[self.stage_at(evaluation)];
            Lambdas::new(s.lambda_op, s.lambda_var)
        }
    }
}

/// Breakdown of one objective evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveReport {
    /// `1 - R²`.
    pub fitness_term: f64,
    pub op_penalty: f64,
    pub var_penalty: f64,
    pub total: f64,
    pub r_squared: f64,
    /// The smooth tree produced a non-finite output on some row.
    #[serde(default)]
    pub non_finite: bool,
}

impl ObjectiveReport {
    pub fn compose(r_squared: f64, op_penalty: f64, var_penalty: f64, lambdas: Lambdas, non_finite: bool) -> Self {
        let fitness_term = 1.0 - r_squared;
        Self {
            fitness_term,
            op_penalty,
            var_penalty,
            total: fitness_term + lambdas.op * op_penalty + lambdas.var * var_penalty,
            r_squared,
            non_finite,
        }
    }

    /// Report for a plain scalar objective with no regression structure.
    pub fn scalar(value: f64) -> Self {
        Self {
            fitness_term: value,
            op_penalty: 0.0,
            var_penalty: 0.0,
            total: value,
            r_squared: f64::NAN,
            non_finite: !value.is_finite(),
        }
    }

    pub const CSV_HEADER: &'static str = "eval,total,fitness_term,r2,op_penalty,var_penalty";

    pub fn csv_row(&self, evaluation: u64) -> String {
        format!(
            "{evaluation},{},{},{},{},{}",
            self.total, self.fitness_term, self.r_squared, self.op_penalty, self.var_penalty
        )
    }
}

/// Evaluates the full objective with the weights the schedule assigns to `evaluation`.
pub fn objective(
    genotype: &Genotype,
    layout: &GenotypeLayout,
    dataset: &Dataset,
    penalty: &PenaltyConfig,
    evaluation: u64,
) -> Result<ObjectiveReport> {
    let predictions = eval_batch(genotype, layout, dataset.batch())?;
    let non_finite = predictions.iter().any(|p| !p.is_finite());
    let r2 = r_squared(&predictions, dataset.target());
    Ok(ObjectiveReport::compose(
        r2,
        op_penalty(genotype, layout)?,
        var_penalty(genotype, layout, penalty.var_allowance)?,
        penalty.lambdas_at(evaluation),
        non_finite,
    ))
}

/// A validated (layout, dataset, penalty) triple.
#[derive(Clone, Debug)]
pub struct SmoothProblem {
    layout: GenotypeLayout,
    dataset: Dataset,
    penalty: PenaltyConfig,
}

impl SmoothProblem {
    pub fn new(layout: GenotypeLayout, dataset: Dataset, penalty: PenaltyConfig) -> Result<Self> {
        if dataset.num_vars() != layout.num_vars() {
            return Err(Error::Shape(format!(
                "dataset has {} input columns, tree expects {} variables",
                dataset.num_vars(),
                layout.num_vars()
            )));
        }
        penalty.validate()?;
        if penalty.var_allowance > layout.var_block_len() {
            return Err(Error::Config(format!(
                "variable allowance {} exceeds the {} slots of a leaf",
                penalty.var_allowance,
                layout.var_block_len()
            )));
        }
        Ok(Self { layout, dataset, penalty })
    }

    pub fn layout(&self) -> &GenotypeLayout {
        &self.layout
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn penalty(&self) -> &PenaltyConfig {
        &self.penalty
    }

    pub fn dimension(&self) -> usize {
        self.layout.total_dim()
    }

    /// Objective at evaluation index `evaluation`. `x` must have the layout's length.
    pub fn evaluate(&self, x: &[f64], evaluation: u64) -> ObjectiveReport {
        self.evaluate_with(x, self.penalty.lambdas_at(evaluation))
    }

    /// Objective with explicitly given penalty weights.
    pub fn evaluate_with(&self, x: &[f64], lambdas: Lambdas) -> ObjectiveReport {
        let g = Genotype::from_slice(x);
        let predictions = eval_batch(&g, &self.layout, self.dataset.batch()).expect("genotype length matches layout");
        let non_finite = predictions.iter().any(|p| !p.is_finite());
        ObjectiveReport::compose(
            r_squared(&predictions, self.dataset.target()),
            op_penalty(&g, &self.layout).expect("checked"),
            var_penalty(&g, &self.layout, self.penalty.var_allowance).expect("checked"),
            lambdas,
            non_finite,
        )
    }
}

/// Where a problem's data comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DataSource {
    Poly10 {
        #[serde(default = "default_rows")]
        rows: usize,
        #[serde(default = "default_range")]
        range: (f64, f64),
        #[serde(default)]
        seed: u64,
    },
    Csv {
        path: PathBuf,
    },
}

fn default_rows() -> usize {
    500
}

fn default_range() -> (f64, f64) {
    (-1.0, 1.0)
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Poly10 { rows: default_rows(), range: default_range(), seed: 0 }
    }
}

impl DataSource {
    pub fn load(&self) -> Result<Dataset> {
        match self {
            DataSource::Poly10 { rows, range, seed } => gen_poly10(*rows, *seed, *range),
            DataSource::Csv { path } => Dataset::read_csv_path(path),
        }
    }
}

/// The problem description read from a JSON config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub tree: TreeConfig,
    #[serde(default)]
    pub penalty: PenaltyConfig,
    #[serde(default)]
    pub data: DataSource,
}

impl ProblemConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Builds the problem on the configured data source.
    pub fn build(&self) -> Result<SmoothProblem> {
        self.build_with(self.data.load()?)
    }

    /// Builds the problem on `dataset`, ignoring the configured data source.
    pub fn build_with(&self, dataset: Dataset) -> Result<SmoothProblem> {
        SmoothProblem::new(build_layout(self.tree.clone())?, dataset, self.penalty.clone())
    }
}
