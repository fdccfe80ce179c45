//! Smooth evaluation of a genotype on data rows.
//!
//! Internal node value: `Σ_i ŵ_i · op_i(left, right)`. Leaf value in op-fold
//! mode: `Σ_i ŵ_i · fold_i(β_1·x_1, …, β_n·x_n, β_{n+1})`; in linear mode
//! `Σ_j β_j·x_j + β_{n+1}`. Operators whose mix weight is exactly zero are
//! skipped. Non-finite intermediate values are not clamped: they reach the
//! root and the caller decides what to do with them.

use crate::error::{Error, Result};

use super::{operator_mix_weights_into, Genotype, GenotypeLayout, LeafMode, Operator};

/// Borrowed row-major input matrix.
#[derive(Clone, Copy, Debug)]
pub struct RowBatch<'a> {
    data: &'a [f64],
    num_vars: usize,
}

impl<'a> RowBatch<'a> {
    pub fn new(data: &'a [f64], num_vars: usize) -> Result<Self> {
        if num_vars == 0 || data.len() % num_vars != 0 {
            return Err(Error::Shape(format!("{} values do not form rows of {} variables", data.len(), num_vars)));
        }
        Ok(Self { data, num_vars })
    }

    pub fn rows(&self) -> usize {
        self.data.len() / self.num_vars
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    #[inline]
    pub fn row(&self, r: usize) -> &'a [f64] {
        &self.data[r * self.num_vars..(r + 1) * self.num_vars]
    }
}

/// Evaluates the smooth tree on a single input row.
pub fn eval_smooth(genotype: &Genotype, layout: &GenotypeLayout, row: &[f64]) -> Result<f64> {
    let batch = RowBatch::new(row, row.len().max(1))?;
    Ok(eval_batch(genotype, layout, batch)?[0])
}

/// Evaluates the smooth tree on every row of `batch`.
pub fn eval_batch(genotype: &Genotype, layout: &GenotypeLayout, batch: RowBatch<'_>) -> Result<Vec<f64>> {
    Ok(NodeValues::compute(genotype, layout, batch)?.root().to_vec())
}

fn check_inputs(genotype: &Genotype, layout: &GenotypeLayout, batch: RowBatch<'_>) -> Result<()> {
    layout.check(genotype)?;
    if batch.num_vars() != layout.num_vars() {
        return Err(Error::Shape(format!(
            "rows have {} variables, tree expects {}",
            batch.num_vars(),
            layout.num_vars()
        )));
    }
    Ok(())
}

/// Mix weights of `node`, written into `weights` (length `k`).
#[inline]
fn node_weights(genotype: &[f64], layout: &GenotypeLayout, node: usize, weights: &mut [f64]) -> bool {
    match layout.op_slots(node) {
        Some(slots) => {
            operator_mix_weights_into(&genotype[slots], weights);
            true
        }
        None => false,
    }
}

fn leaf_values(genotype: &[f64], layout: &GenotypeLayout, leaf: usize, batch: RowBatch<'_>, out: &mut [f64]) {
    let beta = &genotype[layout.var_slots(leaf)];
    let n = layout.num_vars();
    let constant = beta[n];
    match layout.leaf_mode() {
        LeafMode::Linear => {
            for (r, v) in out.iter_mut().enumerate() {
                let x = batch.row(r);
                *v = beta[..n].iter().zip(x).map(|(b, x)| b * x).sum::<f64>() + constant;
            }
        }
        LeafMode::OpFold => {
            let mut weights = vec![0.0; layout.operators().len()];
            node_weights(genotype, layout, layout.leaf_node(leaf), &mut weights);
            out.fill(0.0);
            for (&op, &w) in layout.operators().iter().zip(&weights) {
                if w == 0.0 {
                    continue;
                }
                // Same left-to-right order as `Operator::fold`, without the per-term dispatch.
                let rows = out.iter_mut().enumerate().map(|(r, v)| (v, batch.row(r)));
                match op {
                    Operator::Add => rows.for_each(|(v, x)| {
                        let mut acc = beta[0] * x[0];
                        for j in 1..n {
                            acc += beta[j] * x[j];
                        }
                        *v += w * (acc + constant);
                    }),
                    Operator::Mul => rows.for_each(|(v, x)| {
                        let mut acc = beta[0] * x[0];
                        for j in 1..n {
                            acc *= beta[j] * x[j];
                        }
                        *v += w * (acc * constant);
                    }),
                    _ => rows.for_each(|(v, x)| {
                        let terms = beta[..n].iter().zip(x).map(|(b, x)| b * x).chain(std::iter::once(constant));
                        *v += w * op.fold(terms);
                    }),
                }
            }
        }
    }
}

fn internal_values(
    genotype: &[f64],
    layout: &GenotypeLayout,
    node: usize,
    left: &[f64],
    right: &[f64],
    out: &mut [f64],
) {
    let mut weights = vec![0.0; layout.operators().len()];
    node_weights(genotype, layout, node, &mut weights);
    out.fill(0.0);
    for (&op, &w) in layout.operators().iter().zip(&weights) {
        if w == 0.0 {
            continue;
        }
        let rows = out.iter_mut().zip(left).zip(right);
        match op {
            Operator::Add => rows.for_each(|((v, &a), &b)| *v += w * (a + b)),
            Operator::Mul => rows.for_each(|((v, &a), &b)| *v += w * (a * b)),
            _ => rows.for_each(|((v, &a), &b)| *v += w * op.apply(a, b)),
        }
    }
}

/// Values of every tree node on every row, stored node-major.
///
/// Keeping the per-node values lets a single-slot change be re-evaluated by
/// walking only from the owning node up to the root.
#[derive(Clone, Debug)]
pub struct NodeValues {
    values: Vec<f64>,
    rows: usize,
}

impl NodeValues {
    pub fn compute(genotype: &Genotype, layout: &GenotypeLayout, batch: RowBatch<'_>) -> Result<Self> {
        check_inputs(genotype, layout, batch)?;
        let rows = batch.rows();
        let mut values = vec![0.0; layout.node_count() * rows];
        let g = genotype.values();
        let internal = layout.internal_count();
        for leaf in 0..layout.leaf_count() {
            let node = internal + leaf;
            leaf_values(g, layout, leaf, batch, &mut values[node * rows..(node + 1) * rows]);
        }
        for node in (0..internal).rev() {
            let (head, tail) = values.split_at_mut((node + 1) * rows);
            let out = &mut head[node * rows..];
            let left_start = (2 * node + 1 - (node + 1)) * rows;
            let left = &tail[left_start..left_start + rows];
            let right = &tail[left_start + rows..left_start + 2 * rows];
            internal_values(g, layout, node, left, right, out);
        }
        Ok(Self { values, rows })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn node(&self, node: usize) -> &[f64] {
        &self.values[node * self.rows..(node + 1) * self.rows]
    }

    pub fn root(&self) -> &[f64] {
        self.node(0)
    }

    fn eval_node(
        &self,
        genotype: &[f64],
        layout: &GenotypeLayout,
        batch: RowBatch<'_>,
        node: usize,
        changed_child: Option<(usize, &[f64])>,
        out: &mut [f64],
    ) {
        if layout.is_leaf(node) {
            leaf_values(genotype, layout, node - layout.internal_count(), batch, out);
        } else {
            let (l, r) = (2 * node + 1, 2 * node + 2);
            let pick = |child: usize| match changed_child {
                Some((c, vals)) if c == child => vals,
                _ => self.node(child),
            };
            internal_values(genotype, layout, node, pick(l), pick(r), out);
        }
    }

    /// Root values for `genotype`, which must differ from the genotype these
    /// node values were computed for only at `slot`. The cache is not modified.
    pub fn root_with_changed_slot<'s>(
        &self,
        genotype: &Genotype,
        layout: &GenotypeLayout,
        batch: RowBatch<'_>,
        slot: usize,
        scratch: &'s mut PathScratch,
    ) -> &'s [f64] {
        let g = genotype.values();
        let mut node = layout.slot_node(slot).expect("slot outside layout");
        scratch.resize(self.rows);
        let (cur, next) = (&mut scratch.a, &mut scratch.b);
        self.eval_node(g, layout, batch, node, None, cur);
        while node != 0 {
            let parent = (node - 1) / 2;
            self.eval_node(g, layout, batch, parent, Some((node, cur)), next);
            std::mem::swap(cur, next);
            node = parent;
        }
        &scratch.a
    }

    /// Brings the cache up to date after `genotype` changed at `slot` only.
    pub fn update_slot(&mut self, genotype: &Genotype, layout: &GenotypeLayout, batch: RowBatch<'_>, slot: usize) {
        let g = genotype.values();
        let mut node = layout.slot_node(slot).expect("slot outside layout");
        let mut buf = vec![0.0; self.rows];
        loop {
            self.eval_node(g, layout, batch, node, None, &mut buf);
            let rows = self.rows;
            self.values[node * rows..(node + 1) * rows].copy_from_slice(&buf);
            if node == 0 {
                break;
            }
            node = (node - 1) / 2;
        }
    }
}

/// Reusable buffers for [`NodeValues::root_with_changed_slot`].
#[derive(Clone, Debug, Default)]
pub struct PathScratch {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl PathScratch {
    fn resize(&mut self, rows: usize) {
        self.a.resize(rows, 0.0);
        self.b.resize(rows, 0.0);
    }
}
