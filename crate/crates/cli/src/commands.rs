use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use smoothsr::encoding::decode as decode_genotype;
use smoothsr::fla::{fla_battery, FlaOutcome, FlaReport, FlaSettings, Manipulator, SmoothLandscape};
use smoothsr::objective::{gen_poly10, DataSource, Dataset, Lambdas, ProblemConfig, SmoothProblem};
use smoothsr::optimize::{run_experiment, GenotypeFile, OptimizerConfig};

use crate::error::CliError;
use crate::output::{input_hashes, publish_dir, publish_files, Clock};
use crate::{DataProblem, DecodeArgs, FlaArgs, GenDataArgs, OptimizeArgs};

fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::input(path, e))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    String::from_utf8(read_input(path)?).map_err(|e| CliError::input(path, e))
}

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> smoothsr::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write(&mut buf).map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(buf)
}

fn json_bytes(value: &impl serde::Serialize) -> Result<Vec<u8>, CliError> {
    Ok((serde_json::to_string_pretty(value)? + "\n").into_bytes())
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

pub fn gen_data(args: &GenDataArgs) -> Result<(), CliError> {
    let clock = Clock::start();
    let (dataset, source, inputs) = match args.problem {
        DataProblem::Poly10 => {
            if args.input.is_some() {
                return Err(CliError::Validation("--input only applies to --problem csv".into()));
            }
            let rows = args.rows.unwrap_or(500);
            let source = DataSource::Poly10 { rows, range: args.range, seed: args.seed };
            (gen_poly10(rows, args.seed, args.range)?, source, json!({}))
        }
        DataProblem::Csv => {
            let input =
                args.input.as_deref().ok_or_else(|| CliError::Validation("--problem csv needs --input".into()))?;
            let full = Dataset::read_csv(&read_input(input)?[..])?;
            let dataset = match args.rows {
                Some(rows) if rows > full.rows() => {
                    return Err(CliError::Validation(format!(
                        "--rows {rows} exceeds the {} rows of {}",
                        full.rows(),
                        input.display()
                    )))
                }
                Some(rows) => {
                    let data = (0..rows).flat_map(|r| full.row(r).iter().copied()).collect();
                    Dataset::new(data, full.target()[..rows].to_vec(), full.variable_names().to_vec())?
                }
                None => full,
            };
            (dataset, DataSource::Csv { path: input.to_path_buf() }, input_hashes(&[("input", input)])?)
        }
    };
    let csv = csv_bytes(|buf| dataset.write_csv(buf))?;
    let manifest = clock.manifest(
        "gen-data",
        json!({
            "source": source,
            "rows": dataset.rows(),
            "num_vars": dataset.num_vars(),
            "inputs": inputs,
        }),
        &[("data", &csv)],
    );
    publish_files(args.force, &[(&args.out, csv), (&manifest_path(&args.out), json_bytes(&manifest)?)])
}

/// The problem from `config`, with its dataset from `data` when given, plus
/// hashes of every file read.
fn load_problem(config: &Path, data: Option<&Path>) -> Result<(ProblemConfig, SmoothProblem, Value), CliError> {
    let mut problem_config = ProblemConfig::from_json(&read_text(config)?)?;
    let mut inputs: Vec<(&str, &Path)> = vec![("config", config)];
    let data_path = match (data, &problem_config.data) {
        (Some(path), _) => Some(path.to_path_buf()),
        (None, DataSource::Csv { path }) => Some(path.clone()),
        (None, DataSource::Poly10 { .. }) => None,
    };
    let problem = match &data_path {
        Some(path) => {
            let dataset = Dataset::read_csv(&read_input(path)?[..])?;
            problem_config.data = DataSource::Csv { path: path.clone() };
            problem_config.build_with(dataset)?
        }
        None => problem_config.build()?,
    };
    if let Some(path) = &data_path {
        inputs.push(("data", path));
    }
    let hashes = input_hashes(&inputs)?;
    Ok((problem_config, problem, hashes))
}

pub fn optimize(args: &OptimizeArgs) -> Result<(), CliError> {
    let clock = Clock::start();
    crate::output::check_target(&args.out, args.force)?;
    let (problem_config, problem, mut inputs) = load_problem(&args.config, args.data.as_deref())?;
    let mut opt = match (&args.opt, args.max_evals) {
        (Some(path), _) => {
            if let Value::Object(m) = &mut inputs {
                m.extend(input_hashes(&[("optimizer", path)])?.as_object().cloned().unwrap_or_default());
            }
            OptimizerConfig::from_json(&read_text(path)?)?
        }
        (None, Some(evals)) => OptimizerConfig::from_json(&json!({ "max_evaluations": evals }).to_string())?,
        (None, None) => return Err(CliError::Validation("pass --opt or --max-evals".into())),
    };
    if let Some(evals) = args.max_evals {
        opt.max_evaluations = evals;
    }
    if let Some(seed) = args.seed {
        opt.seed = seed;
    }
    opt.record_evaluations |= args.record_evaluations;

    let experiment = run_experiment(&problem, &opt, args.threshold)?;
    let trace = &experiment.trace;
    let mut files = vec![("trace.csv", csv_bytes(|buf| trace.write_csv(buf))?)];
    if !trace.evaluation_log.is_empty() {
        files.push(("evaluations.csv", csv_bytes(|buf| trace.write_evaluations_csv(buf))?));
    }
    files.push(("genotype.json", json_bytes(&GenotypeFile::new(problem.layout(), &experiment.genotype))?));
    files.push(("formula.txt", format!("{}\n", experiment.formula).into_bytes()));

    let outputs: Vec<(&str, &[u8])> = files.iter().map(|(n, b)| (*n, b.as_slice())).collect();
    let best = &trace.best_report;
    let manifest = clock.manifest(
        "optimize",
        json!({
            "problem": problem_config,
            "optimizer": experiment.config,
            "cmaes_parameters": experiment.parameters,
            "decode_threshold": args.threshold,
            "seed": experiment.config.seed,
            "inputs": inputs,
            "dataset": { "rows": problem.dataset().rows(), "num_vars": problem.dataset().num_vars() },
            "dimension": problem.dimension(),
            "result": {
                "evaluations": trace.evaluations,
                "stop": trace.stop,
                "best_total": best.total,
                "best_r2": best.r_squared,
                "op_penalty": best.op_penalty,
                "var_penalty": best.var_penalty,
                "formula": experiment.formula.to_string(),
            },
        }),
        &outputs,
    );
    files.push(("manifest.json", json_bytes(&manifest)?));
    publish_dir(&args.out, args.force, &files)
}

fn parse_manipulators(list: &str) -> Result<Vec<Manipulator>, CliError> {
    let manipulators: Vec<Manipulator> =
        list.split(',').map(|s| s.trim().parse::<Manipulator>()).collect::<smoothsr::Result<_>>()?;
    for (i, m) in manipulators.iter().enumerate() {
        if manipulators[..i].contains(m) {
            return Err(CliError::Validation(format!("manipulator {m} is listed twice")));
        }
    }
    Ok(manipulators)
}

pub fn fla(args: &FlaArgs) -> Result<(), CliError> {
    let clock = Clock::start();
    crate::output::check_target(&args.out, args.force)?;
    let manipulators = parse_manipulators(&args.manipulators)?;
    let defaults = FlaSettings::default();
    let settings = FlaSettings {
        walk_length: args.walk_length.unwrap_or(defaults.walk_length),
        repetitions: args.reps.unwrap_or(defaults.repetitions),
        neighbors: args.neighbors.unwrap_or(defaults.neighbors),
        max_steps: args.max_steps.unwrap_or(defaults.max_steps),
        epsilon: args.epsilon.unwrap_or(defaults.epsilon),
        seed: args.seed.unwrap_or(defaults.seed),
    };
    settings.validate()?;
    let (problem_config, problem, inputs) = load_problem(&args.config, args.data.as_deref())?;
    let last = problem.penalty().lambdas_at(u64::MAX);
    let lambdas = Lambdas::new(args.lambda_op.unwrap_or(last.op), args.lambda_var.unwrap_or(last.var));
    if ![lambdas.op, lambdas.var].iter().all(|l| l.is_finite() && *l >= 0.0) {
        return Err(CliError::Validation("penalty weights must be finite and non-negative".into()));
    }

    let landscape = SmoothLandscape::new(&problem, lambdas);
    let outcomes = fla_battery(&landscape, &manipulators, &settings)?;
    let reports: Vec<FlaReport> = outcomes.iter().map(|o| o.report.clone()).collect();
    let mut files = vec![("report.csv", csv_bytes(|buf| FlaReport::write_csv(&reports, buf))?)];
    if args.keep_traces {
        files.push(("walks.csv", csv_bytes(|buf| FlaOutcome::write_walks_csv(&outcomes, buf))?));
    }
    let outputs: Vec<(&str, &[u8])> = files.iter().map(|(n, b)| (*n, b.as_slice())).collect();
    let walk_seeds: Vec<Value> = (0..manipulators.len())
        .map(|m| json!({ "manipulator": manipulators[m].name(), "random_walk_seed": settings.walk_seed(m, 0) }))
        .collect();
    let manifest = clock.manifest(
        "fla",
        json!({
            "problem": problem_config,
            "inputs": inputs,
            "dimension": problem.dimension(),
            "lambdas": { "op": lambdas.op, "var": lambdas.var },
            "settings": settings,
            "manipulators": manipulators,
            "walk_seeds": walk_seeds,
            "walk_seed_rule": "splitmix64(splitmix64(splitmix64(seed) ^ manipulator) ^ walk); walk 0 random, 1+2r up, 2+2r down",
            "reports": reports,
        }),
        &outputs,
    );
    files.push(("manifest.json", json_bytes(&manifest)?));
    publish_dir(&args.out, args.force, &files)
}

pub fn decode(args: &DecodeArgs) -> Result<(), CliError> {
    let (layout, genotype) = GenotypeFile::from_json(&read_text(&args.genotype)?)?;
    let tree = decode_genotype(&genotype, &layout, args.threshold)?;
    println!("{tree}");
    Ok(())
}
