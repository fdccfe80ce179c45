//! `(μ/μ_w, λ)`-CMA-ES with cumulative step-size adaptation and combined
//! rank-one / rank-μ covariance updates, using the standard default strategy
//! parameters (Hansen, "The CMA Evolution Strategy: A Tutorial").

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::ObjectiveReport;

use super::{rank_key, BestTracker, Objective, OptimizerConfig, RunTrace, StopReason};

/// Strategy parameters derived from `N` and `λ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CmaesParameters {
    pub dimension: usize,
    pub lambda: usize,
    pub mu: usize,
    pub weights: Vec<f64>,
    pub mu_eff: f64,
    pub c_sigma: f64,
    pub d_sigma: f64,
    pub c_c: f64,
    pub c_1: f64,
    pub c_mu: f64,
    /// `E‖N(0, I)‖`.
    pub chi_n: f64,
    /// Generations between eigendecompositions of `C`.
    pub eigen_interval: u64,
}

impl CmaesParameters {
    pub fn new(n: usize, lambda: usize) -> Self {
        let nf = n as f64;
        let mu = lambda / 2;
        let raw: Vec<f64> = (1..=mu).map(|i| ((lambda as f64 + 1.0) / 2.0).ln() - (i as f64).ln()).collect();
        let sum: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / sum).collect();
        let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();

        let c_sigma = (mu_eff + 2.0) / (nf + mu_eff + 5.0);
        let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (nf + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
        let c_c = (4.0 + mu_eff / nf) / (nf + 4.0 + 2.0 * mu_eff / nf);
        let c_1 = 2.0 / ((nf + 1.3).powi(2) + mu_eff);
        let c_mu = (1.0 - c_1).min(2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((nf + 2.0).powi(2) + mu_eff));
        let chi_n = nf.sqrt() * (1.0 - 1.0 / (4.0 * nf) + 1.0 / (21.0 * nf * nf));
        let eigen_interval = ((1.0 / ((c_1 + c_mu) * nf * 10.0)).floor() as u64).max(1);
        Self { dimension: n, lambda, mu, weights, mu_eff, c_sigma, d_sigma, c_c, c_1, c_mu, chi_n, eigen_interval }
    }
}

struct Decomposition {
    /// Eigenvectors of `C` as columns.
    b: DMatrix<f64>,
    /// Square roots of the eigenvalues.
    d: DVector<f64>,
    inv_sqrt_c: DMatrix<f64>,
}

/// Eigendecomposition of `c`, nudging tiny or slightly negative eigenvalues up.
fn decompose(c: &mut DMatrix<f64>, generation: u64) -> Result<Decomposition> {
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("covariance matrix not finite at generation {generation}")));
    }
    let sym = (&*c + c.transpose()) * 0.5;
    *c = sym;
    let mut eig = SymmetricEigen::new(c.clone());
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if !(max > 0.0 && max.is_finite()) {
        return Err(Error::Numerical(format!(
            "covariance matrix lost positive definiteness at generation {generation} (largest eigenvalue {max})"
        )));
    }
    let floor = max * 1e-14;
    if min < floor {
        let shift = floor - min;
        for i in 0..c.nrows() {
            c[(i, i)] += shift;
        }
        eig = SymmetricEigen::new(c.clone());
        if eig.eigenvalues.min() <= 0.0 {
            return Err(Error::Numerical(format!(
                "covariance repair failed at generation {generation} (smallest eigenvalue {})",
                eig.eigenvalues.min()
            )));
        }
    }
    let d = eig.eigenvalues.map(f64::sqrt);
    let b = eig.eigenvectors;
    let inv_d = DMatrix::from_diagonal(&d.map(|v| 1.0 / v));
    let inv_sqrt_c = &b * inv_d * b.transpose();
    Ok(Decomposition { b, d, inv_sqrt_c })
}

/// Minimizes `objective` with CMA-ES.
///
/// The initial mean is evaluated first (evaluation 0, generation 0). After
/// that, full generations of `λ` samples run while they fit in the budget.
/// Samples of a generation are evaluated in parallel and merged in sample
/// order, so the trace depends only on the seed.
pub fn cmaes_minimize<O: Objective + ?Sized>(objective: &O, config: &OptimizerConfig) -> Result<RunTrace> {
    config.validate()?;
    let n = config.dim();
    let lambda = config.lambda();
    let params = CmaesParameters::new(n, lambda);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut mean = DVector::from_vec(config.mean0());
    let mut sigma = config.sigma0;
    let mut c = DMatrix::<f64>::identity(n, n);
    let mut p_sigma = DVector::<f64>::zeros(n);
    let mut p_c = DVector::<f64>::zeros(n);
    let mut decomposition = decompose(&mut c, 0)?;

    let first = objective.evaluate(mean.as_slice(), 0);
    let mut evaluation_log = Vec::new();
    if config.record_evaluations {
        evaluation_log.push(first);
    }
    let mut evaluations: u64 = 1;
    let mut best = BestTracker::new(mean.as_slice().to_vec(), first, objective.stage(0));
    let mut records = vec![best.record(0, evaluations, sigma)];
    let reached = |best: &BestTracker| config.target.is_some_and(|t| rank_key(best.report.total) <= t);

    let mut generation: u64 = 0;
    let mut stop = StopReason::MaxEvaluations;
    while evaluations + lambda as u64 <= config.max_evaluations {
        if reached(&best) {
            stop = StopReason::TargetReached;
            break;
        }
        generation += 1;

        let mut ys: Vec<DVector<f64>> = Vec::with_capacity(lambda);
        let mut xs: Vec<Vec<f64>> = Vec::with_capacity(lambda);
        for _ in 0..lambda {
            let z = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
            let y = &decomposition.b * decomposition.d.component_mul(&z);
            let x = &mean + &y * sigma;
            xs.push(x.as_slice().to_vec());
            ys.push(y);
        }
        let base = evaluations;
        let reports: Vec<ObjectiveReport> =
            xs.par_iter().enumerate().map(|(k, x)| objective.evaluate(x, base + k as u64)).collect();
        evaluations += lambda as u64;

        for (k, (x, report)) in xs.iter().zip(&reports).enumerate() {
            best.offer(x, report, objective.stage(base + k as u64));
        }
        if config.record_evaluations {
            evaluation_log.extend_from_slice(&reports);
        }

        let mut order: Vec<usize> = (0..lambda).collect();
        order.sort_by(|&a, &b| rank_key(reports[a].total).total_cmp(&rank_key(reports[b].total)));

        let mut y_w = DVector::<f64>::zeros(n);
        for (w, &k) in params.weights.iter().zip(&order) {
            y_w.axpy(*w, &ys[k], 1.0);
        }
        mean.axpy(sigma, &y_w, 1.0);

        let cs = params.c_sigma;
        p_sigma *= 1.0 - cs;
        p_sigma.axpy((cs * (2.0 - cs) * params.mu_eff).sqrt(), &(&decomposition.inv_sqrt_c * &y_w), 1.0);
        let ps_norm = p_sigma.norm();
        let h_sigma = ps_norm / (1.0 - (1.0 - cs).powi(2 * generation as i32)).sqrt()
            < (1.4 + 2.0 / (n as f64 + 1.0)) * params.chi_n;
        let h_sigma = if h_sigma { 1.0 } else { 0.0 };

        let cc = params.c_c;
        p_c *= 1.0 - cc;
        p_c.axpy(h_sigma * (cc * (2.0 - cc) * params.mu_eff).sqrt(), &y_w, 1.0);

        let (c1, cmu) = (params.c_1, params.c_mu);
        let delta_h = (1.0 - h_sigma) * cc * (2.0 - cc);
        c *= 1.0 - c1 - cmu + c1 * delta_h;
        c.ger(c1, &p_c, &p_c, 1.0);
        for (w, &k) in params.weights.iter().zip(&order) {
            c.ger(cmu * w, &ys[k], &ys[k], 1.0);
        }

        sigma *= ((cs / params.d_sigma) * (ps_norm / params.chi_n - 1.0)).exp();
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Numerical(format!(
                "step size became {sigma} at generation {generation} after {evaluations} evaluations"
            )));
        }
        if generation % params.eigen_interval == 0 {
            decomposition = decompose(&mut c, generation)?;
        }
        records.push(best.record(generation, evaluations, sigma));
    }
    if reached(&best) {
        stop = StopReason::TargetReached;
    }

    Ok(RunTrace { records, best_x: best.x, best_report: best.report, evaluations, stop, evaluation_log })
}
