use std::path::Path;

use lpcc::bnb::{solve, SolveReport, SolveStatus};
use lpcc::model::{read_instance, Outcome};
use serde_json::json;

use crate::flags::SolveFlags;
use crate::CliError;

/// Exit status for a finished solve: 0 when certified, 2 when a budget ran out.
pub fn exit_code(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::Optimal | SolveStatus::Infeasible | SolveStatus::Unbounded => 0,
        SolveStatus::TimeLimit | SolveStatus::NodeLimit => 2,
    }
}

pub fn run(path: &Path, flags: &SolveFlags, json_line: bool) -> Result<u8, CliError> {
    let inst = read_instance(path)?;
    let report = solve(&inst, &flags.params())?;
    if json_line {
        println!("{}", summary_json(&report, flags.seed));
    } else {
        print!("{}", summary_text(&report, flags.seed));
    }
    Ok(exit_code(report.status))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".into(), |v| format!("{v}"))
}

pub fn summary_text(r: &SolveReport, seed: Option<u64>) -> String {
    let mut s = match &r.outcome {
        Some(Outcome::Optimal { point, .. }) => {
            format!("{} obj={}\n", r.status.label(), point.objective)
        }
        _ => format!("{}\n", r.status.label()),
    };
    s += &format!(
        "lb={} ub={} rel_gap={}\n",
        r.lower_bound,
        r.upper_bound,
        r.rel_gap()
    );
    s += &format!(
        "nodes={} lp_solves={} cuts_simple={} cuts_disj={} cuts_bound={}\n",
        r.nodes, r.lp_solves, r.cuts.simple, r.cuts.disjunctive, r.cuts.bound
    );
    s += &format!(
        "relaxation={} root_lb={} recovery={} recovery_lps={}\n",
        r.relaxation_value,
        r.root_lb,
        fmt_opt(r.recovery_value),
        r.recovery_evaluations
    );
    s += &format!(
        "t_preprocess={:.3}s t_search={:.3}s t_total={:.3}s\n",
        r.timings.preprocess.as_secs_f64(),
        r.timings.search.as_secs_f64(),
        r.timings.total.as_secs_f64()
    );
    if let Some(seed) = seed {
        s += &format!("seed={seed}\n");
    }
    s
}

/// Non-finite reals come out as JSON `null`.
pub fn summary_json(r: &SolveReport, seed: Option<u64>) -> String {
    json!({
        "status": r.status.label(),
        "obj": r.objective(),
        "lb": r.lower_bound,
        "ub": r.upper_bound,
        "rel_gap": r.rel_gap(),
        "nodes": r.nodes,
        "lp_solves": r.lp_solves,
        "cuts_simple": r.cuts.simple,
        "cuts_disj": r.cuts.disjunctive,
        "cuts_bound": r.cuts.bound,
        "relaxation": r.relaxation_value,
        "root_lb": r.root_lb,
        "recovery": r.recovery_value,
        "t_preprocess": r.timings.preprocess.as_secs_f64(),
        "t_search": r.timings.search.as_secs_f64(),
        "t_total": r.timings.total.as_secs_f64(),
        "seed": seed,
    })
    .to_string()
}
