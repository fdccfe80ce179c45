use std::fs;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::encoding::{build_layout, decode, CrispTree, Genotype, GenotypeLayout, TreeConfig};
use crate::error::Result;
use crate::objective::SmoothProblem;

use super::{cmaes_minimize, CmaesParameters, OptimizerConfig, RunTrace};

/// `genotype.json`: the flat vector with the tree configuration it belongs to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenotypeFile {
    pub layout: TreeConfig,
    pub values: Vec<f64>,
}

impl GenotypeFile {
    pub fn new(layout: &GenotypeLayout, genotype: &Genotype) -> Self {
        Self { layout: layout.config().clone(), values: genotype.0.clone() }
    }

    /// Parses and checks that the vector fits the echoed layout.
    pub fn from_json(text: &str) -> Result<(GenotypeLayout, Genotype)> {
        let file: GenotypeFile = serde_json::from_str(text)?;
        let layout = build_layout(file.layout)?;
        let genotype = Genotype(file.values);
        layout.check(&genotype)?;
        Ok((layout, genotype))
    }
}

/// Outcome of one optimizer run on a smooth problem.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: OptimizerConfig,
    pub parameters: CmaesParameters,
    pub trace: RunTrace,
    pub genotype: Genotype,
    pub formula: CrispTree,
}

/// Runs CMA-ES on `problem`, starting from the zero genotype unless the
/// config gives a mean, and decodes the best genotype of the final stage.
pub fn run_experiment(problem: &SmoothProblem, config: &OptimizerConfig, var_threshold: f64) -> Result<Experiment> {
    let config = config.resolved(problem.dimension())?;
    let parameters = CmaesParameters::new(config.dim(), config.lambda());
    let trace = cmaes_minimize(problem, &config)?;
    let genotype = Genotype(trace.best_x.clone());
    let formula = decode(&genotype, problem.layout(), var_threshold)?;
    Ok(Experiment { config, parameters, trace, genotype, formula })
}

/// Writes `trace.csv`, `genotype.json`, `formula.txt` and `manifest.json`
/// (plus `evaluations.csv` when the run logged every evaluation) into `dir`,
/// which must exist.
pub fn write_artifacts(
    dir: &Path,
    problem: &SmoothProblem,
    experiment: &Experiment,
    manifest: &serde_json::Value,
) -> Result<()> {
    experiment.trace.write_csv(BufWriter::new(fs::File::create(dir.join("trace.csv"))?))?;
    if !experiment.trace.evaluation_log.is_empty() {
        experiment.trace.write_evaluations_csv(BufWriter::new(fs::File::create(dir.join("evaluations.csv"))?))?;
    }
    let genotype = GenotypeFile::new(problem.layout(), &experiment.genotype);
    fs::write(dir.join("genotype.json"), serde_json::to_string_pretty(&genotype)? + "\n")?;
    fs::write(dir.join("formula.txt"), format!("{}\n", experiment.formula))?;
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(manifest)? + "\n")?;
    Ok(())
}
