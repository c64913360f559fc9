use std::time::Duration;

use clap::{Args, Parser};
use lpcc::bnb::{BranchWeights, SolveParams};
use lpcc::cuts::PreprocessParams;
use lpcc::par::Exec;
use lpcc::preprocess::RecoveryParams;

/// Solver flags shared by `solve` and the configs of a bench manifest.
#[derive(Debug, Clone, Args)]
pub struct SolveFlags {
    /// Relative optimality gap.
    #[arg(long, default_value_t = 1e-6)]
    pub gap: f64,
    /// Complementarity tolerance on `min(y_i, w_i)`.
    #[arg(long, default_value_t = 1e-6)]
    pub comp_tol: f64,
    /// Wall-clock budget in seconds.
    #[arg(long, default_value_t = 3600.0)]
    pub time_limit: f64,
    #[arg(long)]
    pub node_limit: Option<usize>,
    /// Strong branching at nodes up to this depth.
    #[arg(long, default_value_t = 7)]
    pub strong_depth: usize,
    #[arg(long)]
    pub no_strong: bool,
    /// Score weights `vl,ed,pc,sl`.
    #[arg(long, value_parser = parse_weights, default_value = "1,0.5,0.25,0.5")]
    pub weights: [f64; 4],
    #[arg(long, default_value_t = 5)]
    pub recovery_depth: usize,
    /// Defaults to m.
    #[arg(long)]
    pub recovery_breadth: Option<usize>,
    #[arg(long)]
    pub no_recovery: bool,
    /// Skip the objective-bisecting refinement after recovery.
    #[arg(long)]
    pub no_refine: bool,
    #[arg(long)]
    pub no_cuts: bool,
    /// Disjunctive rounds are `⌊factor·m/100⌋`.
    #[arg(long, default_value_t = 1.0)]
    pub disj_round_factor: f64,
    /// Simple-cut rounds are `⌊factor·m/10⌋`.
    #[arg(long, default_value_t = 1.0)]
    pub simple_round_factor: f64,
    /// Run strong branching, recovery and cut generation on one thread.
    #[arg(long)]
    pub sequential: bool,
    /// Echoed in the report; the solver itself is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
}

fn parse_weights(s: &str) -> Result<[f64; 4], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<Result<_, _>>()?;
    v.try_into()
        .map_err(|v: Vec<f64>| format!("expected 4 comma-separated weights, got {}", v.len()))
}

impl Default for SolveFlags {
    fn default() -> Self {
        #[derive(Parser)]
        struct Wrap {
            #[command(flatten)]
            f: SolveFlags,
        }
        Wrap::parse_from(["lpcc"]).f
    }
}

impl SolveFlags {
    /// Parses whitespace-separated flags, e.g. from a bench manifest line.
    pub fn from_words<'a>(words: impl IntoIterator<Item = &'a str>) -> Result<Self, clap::Error> {
        #[derive(Parser)]
        #[command(no_binary_name = true)]
        struct Wrap {
            #[command(flatten)]
            f: SolveFlags,
        }
        Ok(Wrap::try_parse_from(words)?.f)
    }

    pub fn params(&self) -> SolveParams {
        let exec = if self.sequential {
            Exec::Sequential
        } else {
            Exec::Parallel
        };
        let w = &self.weights;
        let weights = BranchWeights {
            vl: w[0],
            ed: w[1],
            pc: w[2],
            sl: w[3],
            strong_depth: (!self.no_strong).then_some(self.strong_depth),
            ..BranchWeights::default()
        };
        let recovery = (!self.no_recovery).then(|| RecoveryParams {
            depth: self.recovery_depth,
            breadth: self.recovery_breadth,
            exec,
            ..RecoveryParams::default()
        });
        SolveParams {
            gap: self.gap,
            comp_tol: self.comp_tol,
            time_limit: Some(Duration::from_secs_f64(self.time_limit.max(0.0))),
            node_limit: self.node_limit,
            weights,
            preprocess: PreprocessParams {
                recovery,
                refine: !self.no_refine,
                cuts: !self.no_cuts,
                disjunctive_round_factor: self.disj_round_factor,
                simple_round_factor: self.simple_round_factor,
                exec,
                ..PreprocessParams::default()
            },
            exec,
            trace: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_solver_defaults() {
        let p = SolveFlags::default().params();
        let d = SolveParams::default();
        assert_eq!((p.gap, p.comp_tol), (d.gap, d.comp_tol));
        assert_eq!(p.weights, d.weights);
        assert_eq!(p.time_limit, Some(Duration::from_secs(3600)));
        assert!(p.preprocess.recovery.is_some() && p.preprocess.cuts);
    }

    #[test]
    fn manifest_words_parse() {
        let f =
            SolveFlags::from_words("--weights 1,0,0,0 --no-strong --no-cuts".split_whitespace())
                .unwrap();
        let p = f.params();
        assert_eq!(p.weights, BranchWeights::violation_only());
        assert!(!p.preprocess.cuts);
        assert!(SolveFlags::from_words(["--bogus"]).is_err());
    }
}
