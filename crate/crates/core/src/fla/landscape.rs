use crate::encoding::{Genotype, NodeValues, PathScratch, SlotOwner};
use crate::objective::{leaf_var_penalty, node_op_penalty, r_squared, Lambdas, ObjectiveReport, SmoothProblem};

use super::Move;

/// A real-valued function that walks can query cheaply around a current point.
///
/// A walk keeps one `State` in step with its current point. Candidate
/// neighbours are scored with [`peek`](Landscape::peek), and an accepted move
/// is committed with [`advance`](Landscape::advance).
pub trait Landscape: Sync {
    type State: Send;

    fn dimension(&self) -> usize;

    /// Value at `x` and a fresh state for it.
    fn start(&self, x: &[f64]) -> (f64, Self::State);

    /// Value at `x`, which differs from the state's point as described by
    /// `mv`. The state describes the same point afterwards.
    fn peek(&self, x: &[f64], state: &mut Self::State, mv: Move) -> f64;

    /// Moves the state to `x`, reached by `mv`, and returns the value there.
    fn advance(&self, x: &[f64], state: &mut Self::State, mv: Move) -> f64;
}

/// A plain function with no incremental shortcut.
#[derive(Clone, Copy, Debug)]
pub struct FnLandscape<F> {
    pub dimension: usize,
    pub f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> Landscape for FnLandscape<F> {
    type State = ();

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn start(&self, x: &[f64]) -> (f64, ()) {
        ((self.f)(x), ())
    }

    fn peek(&self, x: &[f64], _: &mut (), _: Move) -> f64 {
        (self.f)(x)
    }

    fn advance(&self, x: &[f64], _: &mut (), _: Move) -> f64 {
        (self.f)(x)
    }
}

/// The smooth regression objective at fixed penalty weights.
///
/// One-position moves only re-evaluate the path from the changed node to the
/// root and the penalty term of the node or leaf owning the slot.
#[derive(Clone, Copy, Debug)]
pub struct SmoothLandscape<'a> {
    problem: &'a SmoothProblem,
    lambdas: Lambdas,
}

pub struct SmoothState {
    genotype: Genotype,
    nodes: NodeValues,
    scratch: PathScratch,
    /// Operator penalty of each node carrying operator weights.
    op_terms: Vec<f64>,
    /// Variable penalty of each leaf.
    var_terms: Vec<f64>,
    weights: Vec<f64>,
}

/// Which penalty term a one-slot change replaces, and its new value.
#[derive(Clone, Copy)]
enum Replaced {
    Op(usize, f64),
    Var(usize, f64),
}

/// Mean of `terms` with entry `replace.0` read as `replace.1`.
fn mean_with(terms: &[f64], replace: Option<(usize, f64)>) -> f64 {
    if terms.is_empty() {
        return 0.0;
    }
    let sum: f64 = terms
        .iter()
        .enumerate()
        .map(|(i, &t)| match replace {
            Some((j, v)) if j == i => v,
            _ => t,
        })
        .sum();
    sum / terms.len() as f64
}

impl<'a> SmoothLandscape<'a> {
    pub fn new(problem: &'a SmoothProblem, lambdas: Lambdas) -> Self {
        Self { problem, lambdas }
    }

    pub fn lambdas(&self) -> Lambdas {
        self.lambdas
    }

    fn total(&self, state: &SmoothState, predictions: &[f64], replaced: Option<Replaced>) -> f64 {
        let (op, var) = match replaced {
            Some(Replaced::Op(i, v)) => (Some((i, v)), None),
            Some(Replaced::Var(i, v)) => (None, Some((i, v))),
            None => (None, None),
        };
        ObjectiveReport::compose(
            r_squared(predictions, self.problem.dataset().target()),
            mean_with(&state.op_terms, op),
            mean_with(&state.var_terms, var),
            self.lambdas,
            false,
        )
        .total
    }

    /// Penalty term owning `slot`, recomputed from the state's genotype.
    fn term_for(&self, state: &mut SmoothState, slot: usize) -> Replaced {
        let layout = self.problem.layout();
        let g = state.genotype.values();
        match layout.slot_owner(slot).expect("slot inside layout") {
            SlotOwner::Operator { node, .. } => {
                let raw = &g[layout.op_slots(node).expect("operator node")];
                Replaced::Op(node, node_op_penalty(raw, &mut state.weights))
            }
            SlotOwner::Variable { leaf, .. } => {
                Replaced::Var(leaf, leaf_var_penalty(&g[layout.var_slots(leaf)], self.problem.penalty().var_allowance))
            }
        }
    }

    fn state(&self, x: &[f64]) -> SmoothState {
        let layout = self.problem.layout();
        let genotype = Genotype::from_slice(x);
        let nodes =
            NodeValues::compute(&genotype, layout, self.problem.dataset().batch()).expect("genotype matches layout");
        let mut weights = vec![0.0; layout.operators().len()];
        let op_terms = (0..layout.op_node_count())
            .map(|node| node_op_penalty(&x[layout.op_slots(node).expect("operator node")], &mut weights))
            .collect();
        let allowance = self.problem.penalty().var_allowance;
        let var_terms =
            (0..layout.leaf_count()).map(|leaf| leaf_var_penalty(&x[layout.var_slots(leaf)], allowance)).collect();
        SmoothState { genotype, nodes, scratch: PathScratch::default(), op_terms, var_terms, weights }
    }
}

impl Landscape for SmoothLandscape<'_> {
    type State = SmoothState;

    fn dimension(&self) -> usize {
        self.problem.dimension()
    }

    fn start(&self, x: &[f64]) -> (f64, SmoothState) {
        let state = self.state(x);
        (self.total(&state, state.nodes.root(), None), state)
    }

    fn peek(&self, x: &[f64], state: &mut SmoothState, mv: Move) -> f64 {
        match mv {
            Move::One { index, .. } => {
                let kept = std::mem::replace(&mut state.genotype.0[index], x[index]);
                let replaced = self.term_for(state, index);
                let mut scratch = std::mem::take(&mut state.scratch);
                let root = state.nodes.root_with_changed_slot(
                    &state.genotype,
                    self.problem.layout(),
                    self.problem.dataset().batch(),
                    index,
                    &mut scratch,
                );
                let value = self.total(state, root, Some(replaced));
                state.scratch = scratch;
                state.genotype.0[index] = kept;
                value
            }
            Move::All => self.problem.evaluate_with(x, self.lambdas).total,
        }
    }

    fn advance(&self, x: &[f64], state: &mut SmoothState, mv: Move) -> f64 {
        match mv {
            Move::One { index, .. } => {
                state.genotype.0[index] = x[index];
                match self.term_for(state, index) {
                    Replaced::Op(i, v) => state.op_terms[i] = v,
                    Replaced::Var(i, v) => state.var_terms[i] = v,
                }
                state.nodes.update_slot(&state.genotype, self.problem.layout(), self.problem.dataset().batch(), index);
            }
            Move::All => *state = self.state(x),
        }
        self.total(state, state.nodes.root(), None)
    }
}
