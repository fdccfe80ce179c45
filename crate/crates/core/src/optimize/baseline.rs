//! Cheap reference optimizers.

use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

use super::{BestTracker, Objective, OptimizerConfig, RunTrace, StopReason};

/// `(1+1)`-ES with the 1/5th success rule.
///
/// Every generation is one evaluation. The step size grows by `exp(1/3)` on
/// success and shrinks by `exp(-1/12)` on failure, which is stationary at a
/// success rate of 1/5.
pub fn one_plus_one_es<O: Objective + ?Sized>(objective: &O, config: &OptimizerConfig) -> Result<RunTrace> {
    config.validate()?;
    let n = config.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut parent = config.mean0();
    let mut parent_report = objective.evaluate(&parent, 0);
    let mut parent_stage = objective.stage(0);
    let mut sigma = config.sigma0;
    let mut evaluations = 1u64;
    let mut best = BestTracker::new(parent.clone(), parent_report, objective.stage(0));
    let mut records = vec![best.record(0, evaluations, sigma)];
    let mut stop = StopReason::MaxEvaluations;
    let up = (1.0f64 / 3.0).exp();
    let down = (-1.0f64 / 12.0).exp();

    while evaluations < config.max_evaluations {
        if config.target.is_some_and(|t| best.report.total <= t) {
            stop = StopReason::TargetReached;
            break;
        }
        let child: Vec<f64> = parent
            .iter()
            .map(|&p| {
                let z: f64 = StandardNormal.sample(&mut rng);
                p + sigma * z
            })
            .collect();
        let stage = objective.stage(evaluations);
        let report = objective.evaluate(&child, evaluations);
        evaluations += 1;
        best.offer(&child, &report, stage);
        // A new stage re-bases the parent as well, its old total is stale.
        if report.total <= parent_report.total || stage > parent_stage {
            parent = child;
            parent_report = report;
            parent_stage = stage;
            sigma *= up;
        } else {
            sigma *= down;
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Numerical(format!("step size became {sigma}")));
        }
        records.push(best.record(evaluations - 1, evaluations, sigma));
    }
    debug_assert_eq!(parent.len(), n);
    if config.target.is_some_and(|t| best.report.total <= t) {
        stop = StopReason::TargetReached;
    }
    Ok(RunTrace { records, best_x: best.x, best_report: best.report, evaluations, stop, evaluation_log: Vec::new() })
}

/// Uniform random sampling in the box `[lo, hi]^N`, keeping the best sample.
/// The configured initial mean is ignored.
///
/// Serves as a control: anything worth calling an optimizer should beat it.
pub fn random_search<O: Objective + ?Sized>(
    objective: &O,
    config: &OptimizerConfig,
    bounds: (f64, f64),
) -> Result<RunTrace> {
    config.validate()?;
    let dist = Uniform::new_inclusive(bounds.0, bounds.1).map_err(|e| Error::Config(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut x: Vec<f64> = (0..config.dim()).map(|_| dist.sample(&mut rng)).collect();
    let first = objective.evaluate(&x, 0);
    let mut best = BestTracker::new(x.clone(), first, objective.stage(0));
    let mut evaluations = 1u64;
    while evaluations < config.max_evaluations {
        x.iter_mut().for_each(|v| *v = dist.sample(&mut rng));
        let report = objective.evaluate(&x, evaluations);
        best.offer(&x, &report, objective.stage(evaluations));
        evaluations += 1;
    }
    Ok(RunTrace {
        records: vec![best.record(0, evaluations, f64::NAN)],
        best_x: best.x,
        best_report: best.report,
        evaluations,
        stop: StopReason::MaxEvaluations,
        evaluation_log: Vec::new(),
    })
}
