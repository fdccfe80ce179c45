use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{Landscape, Manipulator, Move};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WalkKind {
    Random,
    /// Adaptive walk towards higher values.
    Up,
    /// Adaptive walk towards lower values.
    Down,
}

/// Values visited by one walk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkTrace {
    pub kind: WalkKind,
    /// `steps + 1` values, starting point first.
    pub fitness: Vec<f64>,
    /// Moves taken; for adaptive walks, accepted moves.
    pub steps: usize,
    pub seed: u64,
    pub manipulator: String,
    /// Positions whose value was non-finite and was replaced by the worst
    /// finite value of the walk.
    pub non_finite: Vec<usize>,
}

impl WalkTrace {
    fn new(kind: WalkKind, mut fitness: Vec<f64>, seed: u64, manipulator: &Manipulator) -> Self {
        let non_finite: Vec<usize> = (0..fitness.len()).filter(|&i| !fitness[i].is_finite()).collect();
        if !non_finite.is_empty() {
            let finite = fitness.iter().copied().filter(|v| v.is_finite());
            let worst = match kind {
                WalkKind::Up => finite.fold(f64::INFINITY, f64::min),
                _ => finite.fold(f64::NEG_INFINITY, f64::max),
            };
            let worst = if worst.is_finite() { worst } else { 0.0 };
            for &i in &non_finite {
                fitness[i] = worst;
            }
        }
        Self { kind, steps: fitness.len() - 1, fitness, seed, manipulator: manipulator.name(), non_finite }
    }
}

/// Random number generator of the walk with this seed.
pub fn walk_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal starting point, drawn from a stream separate from the
/// walk's own moves.
pub fn random_start(dimension: usize, seed: u64) -> Vec<f64> {
    let mut rng = walk_rng(seed);
    rng.set_stream(1);
    (0..dimension).map(|_| StandardNormal.sample(&mut rng)).collect()
}

fn check_start<L: Landscape + ?Sized>(landscape: &L, start: &[f64], manipulator: &Manipulator) -> Result<()> {
    manipulator.validate()?;
    if start.len() != landscape.dimension() || start.is_empty() {
        return Err(Error::Shape(format!(
            "walk start has {} values, landscape has dimension {}",
            start.len(),
            landscape.dimension()
        )));
    }
    if !start.iter().all(|v| v.is_finite()) {
        return Err(Error::Precondition("walk start must be finite".into()));
    }
    Ok(())
}

/// `steps` unconditional moves from `start`.
pub fn random_walk<L: Landscape + ?Sized>(
    landscape: &L,
    start: &[f64],
    steps: usize,
    manipulator: &Manipulator,
    seed: u64,
) -> Result<WalkTrace> {
    check_start(landscape, start, manipulator)?;
    if steps < 1 {
        return Err(Error::Precondition("a random walk needs at least one step".into()));
    }
    let mut rng = walk_rng(seed);
    let mut x = start.to_vec();
    let (f0, mut state) = landscape.start(&x);
    let mut fitness = Vec::with_capacity(steps + 1);
    fitness.push(f0);
    for _ in 0..steps {
        let mv = manipulator.mutate(&mut x, &mut rng);
        fitness.push(landscape.advance(&x, &mut state, mv));
    }
    Ok(WalkTrace::new(WalkKind::Random, fitness, seed, manipulator))
}

/// Best-of-`neighbors` hill climbing from `start` in the given direction.
///
/// Each step samples `neighbors` candidates and moves to the best strictly
/// improving one. The walk stops when no candidate improves or after
/// `max_steps` moves. Non-finite candidates never improve.
pub fn adaptive_walk<L: Landscape + ?Sized>(
    landscape: &L,
    start: &[f64],
    direction: WalkKind,
    neighbors: usize,
    max_steps: usize,
    manipulator: &Manipulator,
    seed: u64,
) -> Result<WalkTrace> {
    check_start(landscape, start, manipulator)?;
    if neighbors < 1 {
        return Err(Error::Precondition("an adaptive walk needs at least one neighbour per step".into()));
    }
    let better = match direction {
        WalkKind::Up => |a: f64, b: f64| a > b,
        WalkKind::Down => |a: f64, b: f64| a < b,
        WalkKind::Random => return Err(Error::Precondition("adaptive walks go up or down".into())),
    };
    let mut rng = walk_rng(seed);
    let mut x = start.to_vec();
    let mut current_x = x.clone();
    let mut best_all = x.clone();
    let (mut current, mut state) = landscape.start(&x);
    let mut fitness = vec![current];

    while fitness.len() <= max_steps {
        let mut best: Option<(f64, Move, f64)> = None;
        for _ in 0..neighbors {
            let (value, mv, new_value) = match manipulator.mutate(&mut x, &mut rng) {
                mv @ Move::One { index, old } => {
                    let value = landscape.peek(&x, &mut state, mv);
                    let new_value = std::mem::replace(&mut x[index], old);
                    (value, mv, new_value)
                }
                // `x` holds the candidate; the current point is kept in `current_x`.
                Move::All => (landscape.peek(&x, &mut state, Move::All), Move::All, f64::NAN),
            };
            let improves = better(value, current) && best.is_none_or(|(b, _, _)| better(value, b));
            if improves {
                if mv == Move::All {
                    best_all.copy_from_slice(&x);
                }
                best = Some((value, mv, new_value));
            }
            if mv == Move::All {
                x.copy_from_slice(&current_x);
            }
        }
        let Some((_, mv, new_value)) = best else { break };
        match mv {
            Move::One { index, .. } => x[index] = new_value,
            Move::All => x.copy_from_slice(&best_all),
        }
        current_x.copy_from_slice(&x);
        current = landscape.advance(&x, &mut state, mv);
        fitness.push(current);
    }
    Ok(WalkTrace::new(direction, fitness, seed, manipulator))
}
