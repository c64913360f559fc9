use std::path::{Path, PathBuf};

use clap::Subcommand;
use lpcc::generators::{
    gen_bilevel, gen_inverse_qp, gen_random_lpcc, BilevelConfig, InverseQpConfig, RandomLpccConfig,
};
use lpcc::model::{write_instance, LpccInstance, LpccPoint};

use crate::CliError;

#[derive(Debug, Clone, Subcommand)]
pub enum Family {
    /// Random LPCC with a planted feasible point.
    Lpcc {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
        /// Rank of the symmetric part of M.
        #[arg(long)]
        rank: usize,
        /// Percentage of nonzeros.
        #[arg(long, default_value_t = 70.0)]
        dense: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// KKT reformulation of a bilevel program with a convex QP follower.
    Bilevel {
        #[arg(long)]
        dimv: usize,
        /// Defaults to `dimv`.
        #[arg(long)]
        dimx: Option<usize>,
        #[arg(long)]
        dimb: usize,
        #[arg(long)]
        dimg: usize,
        #[arg(long)]
        rankq: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Inverse convex QP.
    Invqp {
        #[arg(long)]
        mt: usize,
        #[arg(long)]
        nt: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// One generated instance: file stem, sidecar line, instance.
pub fn build(family: &Family, offset: u64) -> Result<(String, String, LpccInstance), CliError> {
    let witness = |w: Option<&LpccPoint>| {
        w.map_or_else(|| "none".to_string(), |p| format!("{}", p.objective))
    };
    Ok(match *family {
        Family::Lpcc {
            n,
            m,
            k,
            rank,
            dense,
            seed,
        } => {
            let seed = seed + offset;
            let (inst, w) = gen_random_lpcc(&RandomLpccConfig {
                n,
                m,
                k,
                rank_m: rank,
                dense,
                seed,
            })?;
            (
                format!("lpcc_n{n}_m{m}_k{k}_r{rank}_d{dense}_{seed}"),
                format!("family=lpcc n={n} m={m} k={k} rank={rank} dense={dense} seed={seed} witness_obj={}", witness(Some(&w))),
                inst,
            )
        }
        Family::Bilevel {
            dimv,
            dimx,
            dimb,
            dimg,
            rankq,
            seed,
        } => {
            let seed = seed + offset;
            let dimx = dimx.unwrap_or(dimv);
            let cfg = BilevelConfig {
                dim_v: dimv,
                dim_x: dimx,
                dim_b: dimb,
                dim_g: dimg,
                rank_q: rankq,
                seed,
            };
            let inst = gen_bilevel(&cfg)?;
            (
                format!("bilevel_v{dimv}_x{dimx}_b{dimb}_g{dimg}_r{rankq}_{seed}"),
                format!(
                    "family=bilevel dimv={dimv} dimx={dimx} dimb={dimb} dimg={dimg} rankq={rankq} seed={seed} m={} witness_obj=none",
                    inst.m
                ),
                inst,
            )
        }
        Family::Invqp { mt, nt, seed } => {
            let seed = seed + offset;
            let (inst, w) = gen_inverse_qp(&InverseQpConfig {
                m_tilde: mt,
                n_tilde: nt,
                seed,
            })?;
            (
                format!("invqp_m{mt}_n{nt}_{seed}"),
                format!(
                    "family=invqp mt={mt} nt={nt} seed={seed} witness_obj={}",
                    witness(Some(&w))
                ),
                inst,
            )
        }
    })
}

pub fn run(family: &Family, out: &Path, count: u64) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(out)?;
    let mut written = Vec::new();
    for offset in 0..count {
        let (stem, meta, inst) = build(family, offset)?;
        let path = out.join(format!("{stem}.lpcc"));
        write_instance(&inst, &path)?;
        std::fs::write(out.join(format!("{stem}.meta")), format!("{meta}\n"))?;
        println!("{}", path.display());
        written.push(path);
    }
    Ok(written)
}
