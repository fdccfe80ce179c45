use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::pearson;

/// Lag correlation of a fitness sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutoCorrelation {
    pub rho: f64,
    /// One of the lagged series had zero variance; `rho` is reported as 0.
    pub degenerate: bool,
}

/// Pearson correlation of `(f[t], f[t + lag])`.
pub fn auto_correlation(f: &[f64], lag: usize) -> Result<AutoCorrelation> {
    if f.len() <= lag + 1 {
        return Err(Error::Precondition(format!(
            "lag {lag} needs a sequence longer than {}, got {}",
            lag + 1,
            f.len()
        )));
    }
    let n = f.len() - lag;
    Ok(match pearson(&f[..n], &f[lag..]) {
        Some(rho) => AutoCorrelation { rho, degenerate: false },
        None => AutoCorrelation { rho: 0.0, degenerate: true },
    })
}

/// Last lag whose autocorrelation is still significant.
///
/// With `T = f.len() - 1` steps, scans `lag = 1..=T/2` for the first lag with
/// `|rho(lag)| < 2 / sqrt(T - lag)` and returns one less. If no lag loses
/// significance the scan bound `T/2` is returned.
pub fn correlation_length(f: &[f64]) -> Result<usize> {
    if f.len() < 10 {
        return Err(Error::Precondition(format!("correlation length needs at least 10 values, got {}", f.len())));
    }
    let steps = f.len() - 1;
    for lag in 1..=steps / 2 {
        let rho = auto_correlation(f, lag)?.rho;
        if rho.abs() < 2.0 / ((steps - lag) as f64).sqrt() {
            return Ok(lag - 1);
        }
    }
    Ok(steps / 2)
}

/// Entropy-style measures of the slope-symbol string of a walk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InformationAnalysis {
    /// Entropy of unequal consecutive symbol pairs, base 6.
    pub information_content: f64,
    /// Entropy of equal consecutive symbol pairs, base 3.
    pub density_basin_information: f64,
    /// Length of the alternating non-zero symbol string over the step count.
    pub partial_information_content: f64,
    /// Largest absolute difference between consecutive values.
    pub information_stability: f64,
}

/// Information analysis with dead zone `epsilon`: a step is `0` when its
/// absolute change is at most `epsilon`, otherwise its sign.
pub fn information_analysis(f: &[f64], epsilon: f64) -> Result<InformationAnalysis> {
    if f.len() < 3 {
        return Err(Error::Precondition(format!("information analysis needs at least 3 values, got {}", f.len())));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::Precondition(format!("sensitivity must be >= 0, got {epsilon}")));
    }
    let symbols: Vec<i8> = f
        .windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            if d > epsilon {
                1
            } else if d < -epsilon {
                -1
            } else {
                0
            }
        })
        .collect();

    let mut counts = [[0usize; 3]; 3];
    for pair in symbols.windows(2) {
        counts[(pair[0] + 1) as usize][(pair[1] + 1) as usize] += 1;
    }
    let pairs = (symbols.len() - 1) as f64;
    let (mut h_unequal, mut h_equal) = (0.0, 0.0);
    for (p, row) in counts.iter().enumerate() {
        for (q, &c) in row.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let prob = c as f64 / pairs;
            if p == q {
                h_equal -= prob * prob.log(3.0);
            } else {
                h_unequal -= prob * prob.log(6.0);
            }
        }
    }

    let mut alternating = 0usize;
    let mut last = 0i8;
    for &s in symbols.iter().filter(|&&s| s != 0) {
        if s != last {
            alternating += 1;
            last = s;
        }
    }

    let stability = f.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    Ok(InformationAnalysis {
        information_content: h_unequal,
        density_basin_information: h_equal,
        partial_information_content: alternating as f64 / symbols.len() as f64,
        information_stability: stability,
    })
}
