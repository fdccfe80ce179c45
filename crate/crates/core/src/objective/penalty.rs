//! Decisiveness penalties.
//!
//! Both penalties are normalized to `[0, 1]`: `0` for a crisp choice, `1` for
//! a uniform mixture.

use crate::encoding::{operator_mix_weights_into, Genotype, GenotypeLayout};
use crate::error::Result;

/// `(1 - max ŵ) / (1 - 1/k)` for the mixture encoded by `raw` (`k = raw.len() + 1`).
pub fn node_op_penalty(raw: &[f64], weights: &mut [f64]) -> f64 {
    operator_mix_weights_into(raw, weights);
    let k = weights.len() as f64;
    let max = weights.iter().copied().fold(0.0, f64::max);
    ((1.0 - max) / (1.0 - 1.0 / k)).clamp(0.0, 1.0)
}

/// Mean operator indecision over all nodes that carry operator weights.
pub fn op_penalty(genotype: &Genotype, layout: &GenotypeLayout) -> Result<f64> {
    layout.check(genotype)?;
    let nodes = layout.op_node_count();
    if nodes == 0 {
        return Ok(0.0);
    }
    let g = genotype.values();
    let mut weights = vec![0.0; layout.operators().len()];
    let sum: f64 =
        (0..nodes).map(|node| node_op_penalty(&g[layout.op_slots(node).expect("op node")], &mut weights)).sum();
    Ok(sum / nodes as f64)
}

/// Mass outside the `allowance` heaviest slots of one leaf, normalized so a
/// uniform leaf scores 1. An all-zero block scores 0.
pub fn leaf_var_penalty(beta: &[f64], allowance: usize) -> f64 {
    let slots = beta.len();
    if allowance >= slots {
        return 0.0;
    }
    let total: f64 = beta.iter().map(|b| b.abs()).sum();
    if total == 0.0 {
        return 0.0;
    }
    if !total.is_finite() {
        return 1.0;
    }
    let mut shares: Vec<f64> = beta.iter().map(|b| b.abs() / total).collect();
    shares.sort_unstable_by(|a, b| b.total_cmp(a));
    let top: f64 = shares[..allowance].iter().sum();
    ((1.0 - top) / (1.0 - allowance as f64 / slots as f64)).clamp(0.0, 1.0)
}

/// Mean over leaves of [`leaf_var_penalty`].
pub fn var_penalty(genotype: &Genotype, layout: &GenotypeLayout, allowance: usize) -> Result<f64> {
    layout.check(genotype)?;
    let g = genotype.values();
    let leaves = layout.leaf_count();
    let sum: f64 = (0..leaves).map(|leaf| leaf_var_penalty(&g[layout.var_slots(leaf)], allowance)).sum();
    Ok(sum / leaves as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{build_layout, TreeConfig};

    #[test]
    fn op_penalty_extremes() {
        let layout = build_layout(TreeConfig::new(3, 2)).unwrap();
        let mut g = Genotype::zeros(&layout);
        assert_eq!(op_penalty(&g, &layout).unwrap(), 1.0);
        for (i, v) in g.0[..layout.op_weight_count()].iter_mut().enumerate() {
            *v = if i % 2 == 0 { 800.0 } else { -800.0 };
        }
        assert_eq!(op_penalty(&g, &layout).unwrap(), 0.0);
    }

    #[test]
    fn op_penalty_three_quarters() {
        let layout = build_layout(TreeConfig::new(1, 1)).unwrap();
        // σ(ln 3) = 0.75
        let g = Genotype(vec![3f64.ln(), 0.0, 0.0]);
        assert!((op_penalty(&g, &layout).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn leaf_penalty_cases() {
        let mut one_hot = vec![0.0; 11];
        one_hot[3] = -2.0;
        assert_eq!(leaf_var_penalty(&one_hot, 2), 0.0);
        assert!((leaf_var_penalty(&[0.7; 11], 2) - 1.0).abs() < 1e-12);
        let mut two = vec![0.0; 11];
        two[0] = 0.5;
        two[5] = -0.5;
        assert_eq!(leaf_var_penalty(&two, 2), 0.0);
        assert_eq!(leaf_var_penalty(&[0.0; 11], 2), 0.0);
        assert_eq!(leaf_var_penalty(&[1.0, 2.0], 2), 0.0);
    }

    #[test]
    fn leaf_penalty_partial() {
        // shares (0.5, 0.25, 0.25), allowance 1: (1 - 0.5) / (1 - 1/3) = 0.75
        assert!((leaf_var_penalty(&[2.0, 1.0, -1.0], 1) - 0.75).abs() < 1e-12);
    }
}
