use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{mean, sample_variance};

use super::walk::random_start;
use super::{
    adaptive_walk, auto_correlation, correlation_length, information_analysis, random_walk, Landscape, Manipulator,
    WalkKind, WalkTrace,
};

/// Row labels of the report, in order.
pub const MEASURE_LABELS: [&str; 10] = [
    "auto correlation",
    "corr. length",
    "density basin information",
    "information content",
    "information stability",
    "partial inf. content",
    "up walk length",
    "up walk len. variance",
    "down walk length",
    "down walk len. variance",
];

/// Walk budgets and seeds of one battery.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlaSettings {
    /// Steps of the random walk.
    pub walk_length: usize,
    /// Up walks and down walks per manipulator.
    pub repetitions: usize,
    /// Candidates sampled per adaptive step.
    pub neighbors: usize,
    /// Cap on accepted moves of an adaptive walk.
    pub max_steps: usize,
    /// Dead zone of the information analysis.
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for FlaSettings {
    fn default() -> Self {
        Self { walk_length: 10_000, repetitions: 100, neighbors: 100, max_steps: 2_000, epsilon: 0.0, seed: 0 }
    }
}

impl FlaSettings {
    pub fn validate(&self) -> Result<()> {
        if self.walk_length < 9 {
            return Err(Error::Config(format!("walk length must be at least 9 steps, got {}", self.walk_length)));
        }
        if self.neighbors < 1 {
            return Err(Error::Config("adaptive walks need at least one neighbour per step".into()));
        }
        if self.max_steps < 1 {
            return Err(Error::Config("adaptive walks need a step cap of at least 1".into()));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!("sensitivity must be >= 0, got {}", self.epsilon)));
        }
        Ok(())
    }

    /// Seed of walk `walk` of manipulator `manipulator`: the random walk is
    /// walk 0, up walk `r` is `1 + 2r` and down walk `r` is `2 + 2r`.
    pub fn walk_seed(&self, manipulator: usize, walk: usize) -> u64 {
        splitmix(splitmix(splitmix(self.seed) ^ manipulator as u64) ^ walk as u64)
    }
}

fn splitmix(z: u64) -> u64 {
    let z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    let z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Landscape measures for one manipulator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlaReport {
    pub manipulator: String,
    pub auto_correlation: f64,
    /// The random walk had constant fitness, so `auto_correlation` is 0 by convention.
    pub auto_correlation_degenerate: bool,
    pub correlation_length: usize,
    pub information_content: f64,
    pub density_basin_information: f64,
    pub partial_information_content: f64,
    pub information_stability: f64,
    pub up_walk_length: Option<f64>,
    pub up_walk_length_variance: Option<f64>,
    pub down_walk_length: Option<f64>,
    pub down_walk_length_variance: Option<f64>,
    /// Adaptive walks stopped by the step cap rather than a local optimum.
    pub capped_walks: usize,
    pub epsilon: f64,
}

impl FlaReport {
    /// Cell texts in [`MEASURE_LABELS`] order; walk cells are empty without adaptive walks.
    pub fn cells(&self) -> [String; 10] {
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        [
            self.auto_correlation.to_string(),
            self.correlation_length.to_string(),
            self.density_basin_information.to_string(),
            self.information_content.to_string(),
            self.information_stability.to_string(),
            self.partial_information_content.to_string(),
            opt(self.up_walk_length),
            opt(self.up_walk_length_variance),
            opt(self.down_walk_length),
            opt(self.down_walk_length_variance),
        ]
    }

    /// Writes the measures as rows and the manipulators as columns.
    pub fn write_csv<W: Write>(reports: &[FlaReport], writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["measure".to_owned()];
        header.extend(reports.iter().map(|r| r.manipulator.clone()));
        wtr.write_record(&header)?;
        let cells: Vec<[String; 10]> = reports.iter().map(FlaReport::cells).collect();
        for (row, label) in MEASURE_LABELS.iter().enumerate() {
            let mut record = vec![label.to_string()];
            record.extend(cells.iter().map(|c| c[row].clone()));
            wtr.write_record(&record)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// A report plus the walks it was computed from.
#[derive(Clone, Debug)]
pub struct FlaOutcome {
    pub report: FlaReport,
    pub random_walk: WalkTrace,
    /// Up walks then down walks, in repetition order.
    pub adaptive_walks: Vec<WalkTrace>,
}

impl FlaOutcome {
    /// Writes every walk of every outcome as `manipulator,kind,walk,step,fitness` lines.
    pub fn write_walks_csv<W: Write>(outcomes: &[FlaOutcome], writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["manipulator", "kind", "walk", "step", "fitness"])?;
        for outcome in outcomes {
            let walks = std::iter::once(&outcome.random_walk).chain(&outcome.adaptive_walks);
            let mut counters = [0usize; 3];
            for walk in walks {
                let kind = match walk.kind {
                    WalkKind::Random => 0,
                    WalkKind::Up => 1,
                    WalkKind::Down => 2,
                };
                let index = counters[kind];
                counters[kind] += 1;
                let kind = serde_json::to_value(walk.kind)?;
                let kind = kind.as_str().unwrap_or_default();
                for (step, f) in walk.fitness.iter().enumerate() {
                    wtr.write_record([
                        walk.manipulator.as_str(),
                        kind,
                        &index.to_string(),
                        &step.to_string(),
                        &f.to_string(),
                    ])?;
                }
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Runs one random walk and `repetitions` up and down walks per manipulator,
/// all from standard normal starting points, and derives the measures.
///
/// Walks run in parallel; each owns a seed derived from the battery seed and
/// its position, so results do not depend on scheduling.
pub fn fla_battery<L: Landscape + ?Sized>(
    landscape: &L,
    manipulators: &[Manipulator],
    settings: &FlaSettings,
) -> Result<Vec<FlaOutcome>> {
    settings.validate()?;
    for m in manipulators {
        m.validate()?;
    }
    let dim = landscape.dimension();
    let walks_per = 1 + 2 * settings.repetitions;
    let jobs: Vec<(usize, usize)> = (0..manipulators.len()).flat_map(|m| (0..walks_per).map(move |w| (m, w))).collect();
    let traces: Vec<WalkTrace> = jobs
        .par_iter()
        .map(|&(m, w)| {
            let seed = settings.walk_seed(m, w);
            let start = random_start(dim, seed);
            let manipulator = &manipulators[m];
            match w {
                0 => random_walk(landscape, &start, settings.walk_length, manipulator, seed),
                _ => {
                    let direction = if w % 2 == 1 { WalkKind::Up } else { WalkKind::Down };
                    adaptive_walk(
                        landscape,
                        &start,
                        direction,
                        settings.neighbors,
                        settings.max_steps,
                        manipulator,
                        seed,
                    )
                }
            }
        })
        .collect::<Result<_>>()?;

    let mut traces = traces.into_iter();
    let mut outcomes = Vec::with_capacity(manipulators.len());
    for manipulator in manipulators {
        let walk = traces.next().expect("one random walk per manipulator");
        let mut adaptive: Vec<WalkTrace> = traces.by_ref().take(walks_per - 1).collect();
        // Jobs interleave up and down walks; report ups first.
        adaptive.sort_by_key(|t| t.kind == WalkKind::Down);
        let report = measure(manipulator, &walk, &adaptive, settings)?;
        outcomes.push(FlaOutcome { report, random_walk: walk, adaptive_walks: adaptive });
    }
    Ok(outcomes)
}

fn measure(
    manipulator: &Manipulator,
    walk: &WalkTrace,
    adaptive: &[WalkTrace],
    settings: &FlaSettings,
) -> Result<FlaReport> {
    let ac = auto_correlation(&walk.fitness, 1)?;
    let info = information_analysis(&walk.fitness, settings.epsilon)?;
    let lengths =
        |kind: WalkKind| -> Vec<f64> { adaptive.iter().filter(|t| t.kind == kind).map(|t| t.steps as f64).collect() };
    let (up, down) = (lengths(WalkKind::Up), lengths(WalkKind::Down));
    let stat = |v: &[f64], f: fn(&[f64]) -> f64| if v.is_empty() { None } else { Some(f(v)) };
    Ok(FlaReport {
        manipulator: manipulator.name(),
        auto_correlation: ac.rho,
        auto_correlation_degenerate: ac.degenerate,
        correlation_length: correlation_length(&walk.fitness)?,
        information_content: info.information_content,
        density_basin_information: info.density_basin_information,
        partial_information_content: info.partial_information_content,
        information_stability: info.information_stability,
        up_walk_length: stat(&up, mean),
        up_walk_length_variance: stat(&up, sample_variance),
        down_walk_length: stat(&down, mean),
        down_walk_length_variance: stat(&down, sample_variance),
        capped_walks: adaptive.iter().filter(|t| t.steps >= settings.max_steps).count(),
        epsilon: settings.epsilon,
    })
}
