//! Pilot of the landscape battery on Poly-10 (depth 5, 500 rows, penalty
//! weights 0.1). Prints the report and the time each manipulator took.
//!
//! cargo run --release -p smoothsr-core --example pilot_fla -- [manipulators] [walk_length] [reps] [max_steps] [neighbors] [seed]

use std::time::Instant;

use smoothsr::encoding::{build_layout, TreeConfig};
use smoothsr::fla::{fla_battery, FlaReport, FlaSettings, Manipulator, SmoothLandscape};
use smoothsr::objective::{gen_poly10, Lambdas, PenaltyConfig, SmoothProblem};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let names = args.first().map_or("poly-1-15,poly-1-2,poly-all-2", String::as_str);
    let num = |i: usize, default: usize| args.get(i).map_or(default, |s| s.parse().unwrap());
    let settings = FlaSettings {
        walk_length: num(1, 10_000),
        repetitions: num(2, 10),
        max_steps: num(3, 2_000),
        neighbors: num(4, 100),
        seed: num(5, 0) as u64,
        ..FlaSettings::default()
    };
    let layout = build_layout(TreeConfig::new(5, 10)).unwrap();
    let problem =
        SmoothProblem::new(layout, gen_poly10(500, 0, (-1.0, 1.0)).unwrap(), PenaltyConfig::default()).unwrap();
    let landscape = SmoothLandscape::new(&problem, Lambdas::new(0.1, 0.1));
    let mut reports = Vec::new();
    for name in names.split(',') {
        let m: Manipulator = name.parse().unwrap();
        let t = Instant::now();
        let out = fla_battery(&landscape, &[m], &settings).unwrap().remove(0);
        let lens: Vec<usize> = out.adaptive_walks.iter().map(|w| w.steps).collect();
        println!("{name}: {:.1}s, capped {}, lengths {:?}", t.elapsed().as_secs_f64(), out.report.capped_walks, lens);
        reports.push(out.report);
    }
    FlaReport::write_csv(&reports, std::io::stdout()).unwrap();
}
