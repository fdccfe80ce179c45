//! Pilot runs for the small end-to-end instance `x1·x2 + x3` (depth 3, three
//! inputs, 200 rows). Prints one line per seed with the final R², penalties,
//! decoded formula and whether the root's subtrees split the variables into
//! `{x1, x2}` and `{x3}`.
//!
//! Defaults are the calibrated settings used by the acceptance suite.
//!
//! cargo run --release -p smoothsr-core --example pilot_small -- [seeds] [budget] [op_start] [var_start] [lambda_op] [lambda_var] [op_fold|linear] [tau] [allowance] [sigma0] [popsize]

use smoothsr::encoding::{build_layout, LeafMode, TreeConfig};
use smoothsr::objective::{gen_uniform, PenaltyConfig, ScheduleStage, SmoothProblem};
use smoothsr::optimize::{run_experiment, OptimizerConfig};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: f64| args.get(i).map_or(default, |s| s.parse().unwrap());
    let seeds = arg(0, 10.0) as u64;
    let budget = arg(1, 30_000.0) as u64;
    let op_start = arg(2, 10_000.0) as u64;
    let var_start = arg(3, 20_000.0) as u64;
    let (lambda_op, lambda_var) = (arg(4, 1.0), arg(5, 0.3));
    let tau = arg(7, 0.1);
    let allowance = arg(8, 1.0) as usize;
    let sigma0 = arg(9, 0.5);
    let popsize = arg(10, 0.0) as usize;
    let leaf_mode = if args.get(6).map(String::as_str) == Some("linear") { LeafMode::Linear } else { LeafMode::OpFold };

    let data = gen_uniform(200, 3, 0, (-1.0, 1.0), |x| x[0] * x[1] + x[2]).unwrap();
    let penalty = PenaltyConfig::fixed(0.0, 0.0).with_schedule(vec![
        ScheduleStage::new(0, 0.0, 0.0),
        ScheduleStage::new(op_start, lambda_op, 0.0),
        ScheduleStage::new(var_start, lambda_op, lambda_var),
    ]);
    let penalty = PenaltyConfig { var_allowance: allowance, ..penalty };
    let layout = build_layout(TreeConfig::new(3, 3).with_leaf_mode(leaf_mode)).unwrap();
    let problem = SmoothProblem::new(layout, data, penalty).unwrap();
    let mut hits = 0;
    for seed in 0..seeds {
        let mut cfg = OptimizerConfig::new(problem.dimension(), budget, seed);
        cfg.sigma0 = sigma0;
        if popsize > 0 {
            cfg = cfg.with_population_size(popsize);
        }
        let exp = run_experiment(&problem, &cfg, tau).unwrap();
        let best = exp.trace.best_report;
        let mut split = [exp.formula.variables_below(1), exp.formula.variables_below(2)];
        split.sort();
        let ok_split = split == [vec![0, 1], vec![2]];
        let mut eff = [exp.formula.effective_variables_below(1), exp.formula.effective_variables_below(2)];
        eff.sort();
        let ok_eff = eff == [Some(vec![0, 1]), Some(vec![2])];
        let preds: Vec<f64> =
            (0..problem.dataset().rows()).map(|r| exp.formula.evaluate(problem.dataset().row(r))).collect();
        let crisp_r2 = smoothsr::objective::r_squared(&preds, problem.dataset().target());
        let ok = best.r_squared >= 0.99 && best.op_penalty <= 0.01 && ok_split;
        hits += ok as u32;
        let pre = exp.trace.records.iter().filter(|r| r.stage == 0).last().unwrap();
        let op_end = exp.trace.records.iter().filter(|r| r.stage == 1).last().unwrap();
        println!(
            "seed {seed}: r2 {:.5} crisp {:.4} eff {} op {:.4} var {:.4} | pre r2 {:.4} op {:.4} | op-phase end r2 {:.4} op {:.5} | {} {}",
            best.r_squared, crisp_r2, ok_eff, best.op_penalty, best.var_penalty, pre.best_r2, pre.op_penalty, op_end.best_r2, op_end.op_penalty,
            if ok { "OK " } else { "-- " },
            exp.formula
        );
    }
    println!("{hits}/{seeds} successful");
}
