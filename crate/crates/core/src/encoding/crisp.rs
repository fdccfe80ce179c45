//! Discrete trees: decoding a genotype to a crisp formula and encoding a crisp
//! formula back into a saturated genotype.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{operator_mix_weights, Genotype, GenotypeLayout, LeafMode, Operator};

/// Raw weight magnitude used by [`encode_crisp`] when none is given.
///
/// Large enough that the logistic rounds to exactly `0` and `1`, so unchosen
/// operators contribute nothing. At moderate values such as 40 the leak of
/// about `4e-18` survives, and a protected division by a subtree that is
/// exactly zero in the crisp tree turns it into a huge quotient.
pub const DEFAULT_SATURATION: f64 = 800.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermSource {
    /// Zero-based input variable index (rendered as `x{index + 1}`).
    Var(usize),
    Const,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub source: TermSource,
    pub coef: f64,
}

impl Term {
    pub fn var(index: usize, coef: f64) -> Self {
        Self { source: TermSource::Var(index), coef }
    }

    pub fn constant(coef: f64) -> Self {
        Self { source: TermSource::Const, coef }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrispLeaf {
    /// Fold operator; `None` for linear leaves.
    pub op: Option<Operator>,
    pub terms: Vec<Term>,
}

/// A decoded expression tree with the same fixed shape as its layout.
///
/// Leaf semantics match the smooth evaluator: a leaf folds over all `n + 1`
/// weighted slots, and slots not listed in `terms` contribute `0`. With a
/// `mul` fold this makes the leaf vanish unless every slot is listed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrispTree {
    pub depth: usize,
    pub num_vars: usize,
    /// Operator of each internal node, breadth-first.
    pub internal_ops: Vec<Operator>,
    /// Leaves, left to right.
    pub leaves: Vec<CrispLeaf>,
    /// Leaves whose weight block was entirely zero when decoded.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub degenerate_leaves: Vec<usize>,
}

impl CrispTree {
    fn leaf_slots(&self, leaf: &CrispLeaf, row: &[f64]) -> Vec<f64> {
        let mut slots = vec![0.0; self.num_vars + 1];
        for term in &leaf.terms {
            match term.source {
                TermSource::Var(j) => slots[j] = term.coef * row[j],
                TermSource::Const => slots[self.num_vars] = term.coef,
            }
        }
        slots
    }

    fn eval_leaf(&self, leaf: &CrispLeaf, row: &[f64]) -> f64 {
        let slots = self.leaf_slots(leaf, row);
        match leaf.op {
            Some(op) => op.fold(slots),
            None => slots.iter().sum(),
        }
    }

    fn eval_node(&self, node: usize, row: &[f64]) -> f64 {
        let internal = self.internal_ops.len();
        if node >= internal {
            self.eval_leaf(&self.leaves[node - internal], row)
        } else {
            let a = self.eval_node(2 * node + 1, row);
            let b = self.eval_node(2 * node + 2, row);
            self.internal_ops[node].apply(a, b)
        }
    }

    /// Evaluates the crisp formula on one input row.
    pub fn evaluate(&self, row: &[f64]) -> f64 {
        self.eval_node(0, row)
    }

    /// Input variables (zero-based) used anywhere below `node`.
    pub fn variables_below(&self, node: usize) -> Vec<usize> {
        let internal = self.internal_ops.len();
        let mut vars = Vec::new();
        let mut stack = vec![node];
        while let Some(n) = stack.pop() {
            if n >= internal {
                vars.extend(self.leaves[n - internal].terms.iter().filter_map(|t| match t.source {
                    TermSource::Var(j) => Some(j),
                    TermSource::Const => None,
                }));
            } else {
                stack.extend([2 * n + 1, 2 * n + 2]);
            }
        }
        vars.sort_unstable();
        vars.dedup();
        vars
    }

    /// Variables the crisp value below `node` can depend on, or `None` when
    /// that subtree is identically zero.
    ///
    /// Unlike [`variables_below`](Self::variables_below) this drops leaves
    /// that vanish (a `mul` fold missing a slot, or all-zero coefficients)
    /// and products with a vanishing factor.
    pub fn effective_variables_below(&self, node: usize) -> Option<Vec<usize>> {
        let internal = self.internal_ops.len();
        if node >= internal {
            return self.leaf_variables(&self.leaves[node - internal]);
        }
        let a = self.effective_variables_below(2 * node + 1);
        let b = self.effective_variables_below(2 * node + 2);
        let union = |a: Vec<usize>, b: Vec<usize>| {
            let mut v = [a, b].concat();
            v.sort_unstable();
            v.dedup();
            v
        };
        match (self.internal_ops[node], a, b) {
            (Operator::Add | Operator::Sub, None, None) => None,
            (Operator::Add | Operator::Sub, a, b) => Some(union(a.unwrap_or_default(), b.unwrap_or_default())),
            (Operator::Mul, Some(a), Some(b)) => Some(union(a, b)),
            (Operator::Mul, _, _) => None,
            // Protected division by a vanishing subtree is the constant 1.
            (Operator::Div, _, None) => Some(Vec::new()),
            (Operator::Div, a, Some(b)) => Some(union(a.unwrap_or_default(), b)),
        }
    }

    fn leaf_variables(&self, leaf: &CrispLeaf) -> Option<Vec<usize>> {
        let live: Vec<&Term> = leaf.terms.iter().filter(|t| t.coef != 0.0).collect();
        let vanishes = match leaf.op {
            Some(Operator::Mul) => live.len() < self.num_vars + 1,
            _ => live.is_empty(),
        };
        if vanishes {
            return None;
        }
        let mut vars: Vec<usize> = live
            .iter()
            .filter_map(|t| match t.source {
                TermSource::Var(j) => Some(j),
                TermSource::Const => None,
            })
            .collect();
        vars.sort_unstable();
        Some(vars)
    }

    fn check_shape(&self, layout: &GenotypeLayout) -> Result<()> {
        let shape_err = |msg: String| Err(Error::Shape(msg));
        if self.depth != layout.depth() || self.num_vars != layout.num_vars() {
            return shape_err(format!(
                "tree has depth {} over {} variables, layout has depth {} over {}",
                self.depth,
                self.num_vars,
                layout.depth(),
                layout.num_vars()
            ));
        }
        if self.internal_ops.len() != layout.internal_count() || self.leaves.len() != layout.leaf_count() {
            return shape_err("node counts do not match the layout".into());
        }
        let known = |op: &Operator| layout.operators().contains(op);
        if let Some(op) = self.internal_ops.iter().find(|op| !known(op)) {
            return shape_err(format!("operator `{op}` is not in the layout's operator set"));
        }
        for (i, leaf) in self.leaves.iter().enumerate() {
            match (layout.leaf_mode(), leaf.op) {
                (LeafMode::OpFold, Some(op)) if !known(&op) => {
                    return shape_err(format!("leaf {i}: operator `{op}` is not in the operator set"))
                }
                (LeafMode::OpFold, None) => return shape_err(format!("leaf {i} needs a fold operator")),
                (LeafMode::Linear, Some(_)) => return shape_err(format!("leaf {i}: linear leaves have no operator")),
                _ => {}
            }
            if leaf.terms.is_empty() {
                return shape_err(format!("leaf {i} has no terms"));
            }
            let mut seen = vec![false; self.num_vars + 1];
            for term in &leaf.terms {
                let slot = match term.source {
                    TermSource::Var(j) if j < self.num_vars => j,
                    TermSource::Var(j) => return shape_err(format!("leaf {i}: variable x{} out of range", j + 1)),
                    TermSource::Const => self.num_vars,
                };
                if std::mem::replace(&mut seen[slot], true) {
                    return shape_err(format!("leaf {i} lists a slot twice"));
                }
            }
        }
        Ok(())
    }

    fn render_leaf(&self, leaf: &CrispLeaf, out: &mut String) {
        let sep = leaf.op.unwrap_or(Operator::Add).symbol();
        out.push('(');
        for (i, term) in leaf.terms.iter().enumerate() {
            if i > 0 {
                let _ = write!(out, " {sep} ");
            }
            out.push_str(&format_sig6(term.coef));
            if let TermSource::Var(j) = term.source {
                let _ = write!(out, "·x{}", j + 1);
            }
        }
        out.push(')');
    }

    fn render_node(&self, node: usize, root: bool, out: &mut String) {
        let internal = self.internal_ops.len();
        if node >= internal {
            self.render_leaf(&self.leaves[node - internal], out);
            return;
        }
        if !root {
            out.push('(');
        }
        self.render_node(2 * node + 1, false, out);
        let _ = write!(out, " {} ", self.internal_ops[node].symbol());
        self.render_node(2 * node + 2, false, out);
        if !root {
            out.push(')');
        }
    }
}

impl fmt::Display for CrispTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.render_node(0, true, &mut s);
        f.write_str(&s)
    }
}

/// Formats `x` with six significant digits, `%g` style.
pub(crate) fn format_sig6(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        format!("{mantissa}e{exp}")
    } else {
        let decimals = (5 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Index of the largest weight; ties go to the lowest index.
fn argmax(weights: &[f64]) -> usize {
    let mut best = 0;
    for (i, &w) in weights.iter().enumerate().skip(1) {
        if w > weights[best] {
            best = i;
        }
    }
    best
}

/// Reads off the crisp tree a genotype is closest to.
///
/// Every node takes its heaviest operator. Every leaf keeps the terms whose
/// share `|β_j| / Σ|β|` is at least `var_threshold`, with their raw `β` as
/// coefficients; if none reaches it the single heaviest term is kept.
pub fn decode(genotype: &Genotype, layout: &GenotypeLayout, var_threshold: f64) -> Result<CrispTree> {
    layout.check(genotype)?;
    if !(var_threshold > 0.0 && var_threshold < 1.0) {
        return Err(Error::Precondition(format!("variable threshold must lie in (0, 1), got {var_threshold}")));
    }
    let g = genotype.values();
    let ops = layout.operators();
    let pick = |node: usize| layout.op_slots(node).map(|s| ops[argmax(&operator_mix_weights(&g[s]))]);

    let internal_ops =
        (0..layout.internal_count()).map(|node| pick(node).expect("internal nodes carry operator weights")).collect();

    let n = layout.num_vars();
    let mut leaves = Vec::with_capacity(layout.leaf_count());
    let mut degenerate_leaves = Vec::new();
    for leaf in 0..layout.leaf_count() {
        let op = pick(layout.leaf_node(leaf));
        let beta = &g[layout.var_slots(leaf)];
        let source = |j: usize| if j == n { TermSource::Const } else { TermSource::Var(j) };
        let mass: f64 = beta.iter().map(|b| b.abs()).sum();
        let terms = if mass == 0.0 {
            degenerate_leaves.push(leaf);
            vec![Term::constant(0.0)]
        } else {
            let kept: Vec<Term> = beta
                .iter()
                .enumerate()
                .filter(|(_, b)| b.abs() / mass >= var_threshold)
                .map(|(j, &b)| Term { source: source(j), coef: b })
                .collect();
            if kept.is_empty() {
                let abs: Vec<f64> = beta.iter().map(|b| b.abs()).collect();
                let j = argmax(&abs);
                vec![Term { source: source(j), coef: beta[j] }]
            } else {
                kept
            }
        };
        leaves.push(CrispLeaf { op, terms });
    }
    Ok(CrispTree { depth: layout.depth(), num_vars: n, internal_ops, leaves, degenerate_leaves })
}

/// Raw weights that make stick-breaking select operator `choice` out of `k`.
fn saturated_block(choice: usize, k: usize, saturation: f64, out: &mut [f64]) {
    for (i, w) in out.iter_mut().enumerate().take(k - 1) {
        *w = if i == choice { saturation } else { -saturation };
    }
}

/// Builds a genotype whose smooth evaluation reproduces `tree`.
///
/// Operator blocks are saturated at `±saturation` (at least 10); leaf weights
/// are the tree's coefficients with zeros elsewhere.
pub fn encode_crisp(tree: &CrispTree, layout: &GenotypeLayout, saturation: f64) -> Result<Genotype> {
    if !(saturation >= 10.0 && saturation.is_finite()) {
        return Err(Error::Precondition(format!("saturation must be at least 10, got {saturation}")));
    }
    tree.check_shape(layout)?;
    let mut g = Genotype::zeros(layout);
    let ops = layout.operators();
    let k = ops.len();
    let index_of = |op: Operator| ops.iter().position(|&o| o == op).expect("checked by check_shape");
    for (node, &op) in tree.internal_ops.iter().enumerate() {
        let slots = layout.op_slots(node).expect("internal nodes carry operator weights");
        saturated_block(index_of(op), k, saturation, &mut g.0[slots]);
    }
    for (leaf, crisp) in tree.leaves.iter().enumerate() {
        if let (Some(op), Some(slots)) = (crisp.op, layout.op_slots(layout.leaf_node(leaf))) {
            saturated_block(index_of(op), k, saturation, &mut g.0[slots]);
        }
        let base = layout.var_slots(leaf).start;
        for term in &crisp.terms {
            let j = match term.source {
                TermSource::Var(j) => j,
                TermSource::Const => tree.num_vars,
            };
            g.0[base + j] = term.coef;
        }
    }
    Ok(g)
}
