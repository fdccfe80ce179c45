//! Fixed-structure smooth expression trees.
//!
//! A tree of depth `d` is a full binary tree with `2^d - 1` nodes stored in
//! breadth-first order: node `i` has children `2i + 1` and `2i + 2`, the first
//! `2^(d-1) - 1` nodes are internal and the remaining `2^(d-1)` are leaves,
//! read left to right. A [`Genotype`] is a flat real vector; the
//! [`GenotypeLayout`] says which slice of it belongs to which node.
//!
//! Every node that carries operator weights owns `k - 1` raw values that are
//! squashed onto the `k`-simplex by [`operator_mix_weights`]. Every leaf owns
//! `n + 1` variable weights: one per input variable plus a constant slot.

mod crisp;
mod eval;
mod mix;

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use crisp::{decode, encode_crisp, CrispLeaf, CrispTree, Term, TermSource, DEFAULT_SATURATION};
pub use eval::{eval_batch, eval_smooth, NodeValues, PathScratch, RowBatch};
pub use mix::{logistic, operator_mix_weights, operator_mix_weights_into};

/// Denominators with magnitude at or below this make protected division return 1.
pub const PROTECTED_DIV_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Operator {
    Add,
    Mul,
    Sub,
    /// Protected division: `a / b`, or `1` when `|b| <= 1e-12`.
    Div,
}

impl Operator {
    pub fn symbol(self) -> &'static str {
        match self {
            Operator::Add => "+",
            Operator::Mul => "*",
            Operator::Sub => "-",
            Operator::Div => "/",
        }
    }

    #[inline]
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            Operator::Add => a + b,
            Operator::Mul => a * b,
            Operator::Sub => a - b,
            Operator::Div => protected_div(a, b),
        }
    }

    /// Left fold of the binary operator over `terms`.
    ///
    /// `add` and `mul` are the usual n-ary sum and product. `terms` must not be
    /// empty.
    #[inline]
    pub fn fold(self, terms: impl IntoIterator<Item = f64>) -> f64 {
        let mut it = terms.into_iter();
        let first = it.next().expect("fold over an empty term list");
        it.fold(first, |acc, t| self.apply(acc, t))
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Operator::Add => "add",
            Operator::Mul => "mul",
            Operator::Sub => "sub",
            Operator::Div => "div",
        };
        f.write_str(name)
    }
}

#[inline]
pub fn protected_div(a: f64, b: f64) -> f64 {
    if b.abs() > PROTECTED_DIV_EPS {
        a / b
    } else {
        1.0
    }
}

/// How a leaf turns its weighted variables into a value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafMode {
    /// Leaves carry operator weights too and mix n-ary folds of the weighted terms.
    #[default]
    OpFold,
    /// Leaves are plain linear combinations; only internal nodes mix operators.
    Linear,
}

fn default_operators() -> Vec<Operator> {
    vec![Operator::Add, Operator::Mul]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub depth: usize,
    pub num_vars: usize,
    #[serde(default = "default_operators")]
    pub operators: Vec<Operator>,
    #[serde(default)]
    pub leaf_mode: LeafMode,
}

impl TreeConfig {
    /// Depth `depth`, `num_vars` inputs, `{add, mul}` and op-fold leaves.
    pub fn new(depth: usize, num_vars: usize) -> Self {
        Self { depth, num_vars, operators: default_operators(), leaf_mode: LeafMode::OpFold }
    }

    pub fn with_operators(mut self, operators: Vec<Operator>) -> Self {
        self.operators = operators;
        self
    }

    pub fn with_leaf_mode(mut self, leaf_mode: LeafMode) -> Self {
        self.leaf_mode = leaf_mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth < 1 {
            return Err(Error::Config("tree depth must be at least 1".into()));
        }
        // 2^depth nodes must stay addressable.
        if self.depth > 30 {
            return Err(Error::Config(format!("tree depth {} is too large", self.depth)));
        }
        if self.num_vars < 1 {
            return Err(Error::Config("at least one input variable is required".into()));
        }
        if self.operators.len() < 2 {
            return Err(Error::Config("at least two operators are required".into()));
        }
        for (i, op) in self.operators.iter().enumerate() {
            if self.operators[..i].contains(op) {
                return Err(Error::Config(format!("duplicate operator `{op}`")));
            }
        }
        Ok(())
    }

    pub fn num_ops(&self) -> usize {
        self.operators.len()
    }

    pub fn node_count(&self) -> usize {
        (1usize << self.depth) - 1
    }

    pub fn leaf_count(&self) -> usize {
        1usize << (self.depth - 1)
    }

    pub fn internal_count(&self) -> usize {
        self.leaf_count() - 1
    }
}

/// Which part of the tree a genotype slot belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlotOwner {
    /// Raw operator weight `index` of node `node` (breadth-first index).
    Operator { node: usize, index: usize },
    /// Variable weight `index` of leaf `leaf` (`index == num_vars` is the constant slot).
    Variable { leaf: usize, index: usize },
}

/// Index map from a flat genotype to per-node operator weights and per-leaf
/// variable weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TreeConfig", into = "TreeConfig")]
pub struct GenotypeLayout {
    config: TreeConfig,
    op_block: usize,
    var_block: usize,
    op_nodes: usize,
    var_offset: usize,
    total_dim: usize,
}

impl TryFrom<TreeConfig> for GenotypeLayout {
    type Error = Error;

    fn try_from(config: TreeConfig) -> Result<Self> {
        build_layout(config)
    }
}

impl From<GenotypeLayout> for TreeConfig {
    fn from(layout: GenotypeLayout) -> Self {
        layout.config
    }
}

/// Validates `config` and assigns genotype slots: operator blocks first in
/// breadth-first node order, then variable blocks in left-to-right leaf order.
pub fn build_layout(config: TreeConfig) -> Result<GenotypeLayout> {
    config.validate()?;
    let op_block = config.num_ops() - 1;
    let var_block = config.num_vars + 1;
    let op_nodes = match config.leaf_mode {
        LeafMode::OpFold => config.node_count(),
        LeafMode::Linear => config.internal_count(),
    };
    let var_offset = op_nodes * op_block;
    let total_dim = var_offset + config.leaf_count() * var_block;
    Ok(GenotypeLayout { config, op_block, var_block, op_nodes, var_offset, total_dim })
}

impl GenotypeLayout {
    pub fn config(&self) -> &TreeConfig {
        &self.config
    }

    pub fn depth(&self) -> usize {
        self.config.depth
    }

    pub fn num_vars(&self) -> usize {
        self.config.num_vars
    }

    pub fn operators(&self) -> &[Operator] {
        &self.config.operators
    }

    pub fn leaf_mode(&self) -> LeafMode {
        self.config.leaf_mode
    }

    pub fn node_count(&self) -> usize {
        self.config.node_count()
    }

    pub fn internal_count(&self) -> usize {
        self.config.internal_count()
    }

    pub fn leaf_count(&self) -> usize {
        self.config.leaf_count()
    }

    /// Raw operator weights per node (`k - 1`).
    pub fn op_block_len(&self) -> usize {
        self.op_block
    }

    /// Variable weights per leaf (`n + 1`).
    pub fn var_block_len(&self) -> usize {
        self.var_block
    }

    /// Number of nodes that carry operator weights.
    pub fn op_node_count(&self) -> usize {
        self.op_nodes
    }

    pub fn op_weight_count(&self) -> usize {
        self.var_offset
    }

    pub fn var_weight_count(&self) -> usize {
        self.total_dim - self.var_offset
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        node >= self.internal_count()
    }

    /// Breadth-first node index of leaf `leaf`.
    pub fn leaf_node(&self, leaf: usize) -> usize {
        self.internal_count() + leaf
    }

    pub fn op_slots(&self, node: usize) -> Option<Range<usize>> {
        (node < self.op_nodes).then(|| node * self.op_block..(node + 1) * self.op_block)
    }

    pub fn var_slots(&self, leaf: usize) -> Range<usize> {
        let start = self.var_offset + leaf * self.var_block;
        start..start + self.var_block
    }

    pub fn slot_owner(&self, slot: usize) -> Option<SlotOwner> {
        if slot >= self.total_dim {
            None
        } else if slot < self.var_offset {
            Some(SlotOwner::Operator { node: slot / self.op_block, index: slot % self.op_block })
        } else {
            let rel = slot - self.var_offset;
            Some(SlotOwner::Variable { leaf: rel / self.var_block, index: rel % self.var_block })
        }
    }

    /// Node whose value depends directly on `slot`.
    pub fn slot_node(&self, slot: usize) -> Option<usize> {
        self.slot_owner(slot).map(|owner| match owner {
            SlotOwner::Operator { node, .. } => node,
            SlotOwner::Variable { leaf, .. } => self.leaf_node(leaf),
        })
    }

    pub fn check(&self, genotype: &Genotype) -> Result<()> {
        if genotype.len() != self.total_dim {
            return Err(Error::Shape(format!(
                "genotype has {} values, layout expects {}",
                genotype.len(),
                self.total_dim
            )));
        }
        Ok(())
    }
}

/// The flat real vector searched by the optimizer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Genotype(pub Vec<f64>);

impl Genotype {
    pub fn zeros(layout: &GenotypeLayout) -> Self {
        Genotype(vec![0.0; layout.total_dim()])
    }

    pub fn from_slice(values: &[f64]) -> Self {
        Genotype(values.to_vec())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl AsRef<[f64]> for Genotype {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}
