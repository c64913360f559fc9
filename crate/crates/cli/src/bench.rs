//! Benchmark sweeps over a manifest.
//!
//! A manifest is a text file with one entry per line:
//!
//! ```text
//! # comment
//! instance data/lpcc_n2_m100_k20_r30_d70_0.lpcc
//! config r4
//! config r1 --weights 1,0,0,0 --no-strong
//! ```
//!
//! Instance paths are relative to the manifest. Everything after a config's
//! name is parsed as `solve` flags.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use lpcc::bnb::solve;
use lpcc::model::{read_instance, relative_gap};

use crate::flags::SolveFlags;
use crate::CliError;

#[derive(Debug, Clone)]
pub struct Manifest {
    pub instances: Vec<PathBuf>,
    pub configs: Vec<(String, SolveFlags)>,
}

pub fn parse_manifest(path: &Path) -> Result<Manifest, CliError> {
    let text = std::fs::read_to_string(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let err = |line: usize, msg: String| CliError::Manifest {
        path: path.display().to_string(),
        line,
        msg,
    };
    let mut m = Manifest {
        instances: Vec::new(),
        configs: Vec::new(),
    };
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut words = line.split_whitespace();
        match words.next() {
            Some("instance") => {
                let p = words
                    .next()
                    .ok_or_else(|| err(no + 1, "instance needs a path".into()))?;
                m.instances.push(dir.join(p));
            }
            Some("config") => {
                let name = words
                    .next()
                    .ok_or_else(|| err(no + 1, "config needs a name".into()))?;
                let flags =
                    SolveFlags::from_words(words).map_err(|e| err(no + 1, e.to_string()))?;
                m.configs.push((name.to_string(), flags));
            }
            Some(other) => return Err(err(no + 1, format!("unknown entry `{other}`"))),
            None => unreachable!(),
        }
    }
    if m.instances.is_empty() || m.configs.is_empty() {
        return Err(err(
            0,
            "manifest needs at least one instance and one config".into(),
        ));
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub instance: String,
    pub config: String,
    /// A solver status label, or `ERROR`.
    pub status: String,
    pub obj: Option<f64>,
    pub lb: Option<f64>,
    pub ub: Option<f64>,
    pub nodes: usize,
    pub lp_solves: usize,
    pub cuts: [usize; 3],
    pub t_preprocess: f64,
    pub t_total: f64,
}

impl Run {
    fn solved(&self) -> bool {
        matches!(self.status.as_str(), "OPTIMAL" | "INFEASIBLE" | "UNBOUNDED")
    }

    fn rel_gap(&self) -> Option<f64> {
        match (self.ub, self.lb) {
            (Some(ub), Some(lb)) => Some(relative_gap(ub, lb.min(ub))),
            _ => None,
        }
    }
}

fn run_one(path: &Path, name: &str, flags: &SolveFlags) -> Run {
    let mut run = Run {
        instance: path.display().to_string(),
        config: name.to_string(),
        status: "ERROR".into(),
        obj: None,
        lb: None,
        ub: None,
        nodes: 0,
        lp_solves: 0,
        cuts: [0; 3],
        t_preprocess: 0.0,
        t_total: 0.0,
    };
    let inst = match read_instance(path) {
        Ok(i) => i,
        Err(e) => {
            log::warn!("{}: {e}", path.display());
            return run;
        }
    };
    match solve(&inst, &flags.params()) {
        Ok(r) => {
            run.status = r.status.label().into();
            run.obj = r.objective();
            run.lb = Some(r.lower_bound);
            run.ub = Some(r.upper_bound);
            run.nodes = r.nodes;
            run.lp_solves = r.lp_solves;
            run.cuts = [r.cuts.simple, r.cuts.disjunctive, r.cuts.bound];
            run.t_preprocess = r.timings.preprocess.as_secs_f64();
            run.t_total = r.timings.total.as_secs_f64();
        }
        Err(e) => log::warn!("{} / {name}: {e}", path.display()),
    }
    run
}

/// Runs every (instance, config) pair on `jobs` worker threads; the result is
/// in manifest order, instances outer.
pub fn run_all(m: &Manifest, jobs: usize) -> Vec<Run> {
    let tasks: Vec<(&PathBuf, &(String, SolveFlags))> = m
        .instances
        .iter()
        .flat_map(|p| m.configs.iter().map(move |c| (p, c)))
        .collect();
    let next = AtomicUsize::new(0);
    let out = Mutex::new(vec![None; tasks.len()]);
    std::thread::scope(|s| {
        for _ in 0..jobs.max(1).min(tasks.len()) {
            s.spawn(|| loop {
                let t = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(path, (name, flags))) = tasks.get(t) else {
                    break;
                };
                let r = run_one(path, name, flags);
                out.lock().unwrap()[t] = Some(r);
            });
        }
    });
    out.into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every task ran"))
        .collect()
}

fn real(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| format!("{v}"))
}

pub fn write_runs<W: std::io::Write>(runs: &[Run], w: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record([
        "instance",
        "config",
        "status",
        "obj",
        "lb",
        "ub",
        "rel_gap",
        "nodes",
        "lp_solves",
        "cuts_simple",
        "cuts_disj",
        "cuts_bound",
        "t_preprocess",
        "t_total",
    ])?;
    for r in runs {
        w.write_record([
            r.instance.clone(),
            r.config.clone(),
            r.status.clone(),
            real(r.obj),
            real(r.lb),
            real(r.ub),
            real(r.rel_gap()),
            r.nodes.to_string(),
            r.lp_solves.to_string(),
            r.cuts[0].to_string(),
            r.cuts[1].to_string(),
            r.cuts[2].to_string(),
            format!("{:.6}", r.t_preprocess),
            format!("{:.6}", r.t_total),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Performance-profile points: for each config, the ratio of its time to the
/// best config's time on each instance, sorted ascending. Unsolved runs get
/// ratio `+∞`. Times are floored at a microsecond so instant solves tie.
pub fn profile(runs: &[Run]) -> Vec<(String, String, f64)> {
    const FLOOR: f64 = 1e-6;
    let mut configs: Vec<&str> = Vec::new();
    let mut instances: Vec<&str> = Vec::new();
    for r in runs {
        if !configs.contains(&r.config.as_str()) {
            configs.push(&r.config);
        }
        if !instances.contains(&r.instance.as_str()) {
            instances.push(&r.instance);
        }
    }
    let time = |r: &Run| {
        if r.solved() {
            r.t_total.max(FLOOR)
        } else {
            f64::INFINITY
        }
    };
    let mut out = Vec::new();
    for c in &configs {
        let mut pts = Vec::new();
        for inst in &instances {
            let best = runs
                .iter()
                .filter(|r| r.instance == *inst)
                .map(time)
                .fold(f64::INFINITY, f64::min);
            let Some(mine) = runs.iter().find(|r| r.instance == *inst && r.config == *c) else {
                continue;
            };
            let t = time(mine);
            let ratio = if t.is_finite() {
                t / best
            } else {
                f64::INFINITY
            };
            pts.push((inst.to_string(), ratio));
        }
        pts.sort_by(|a, b| a.1.total_cmp(&b.1));
        out.extend(pts.into_iter().map(|(i, r)| (c.to_string(), i, r)));
    }
    out
}

pub fn write_profile<W: std::io::Write>(runs: &[Run], w: W) -> Result<(), CliError> {
    let pts = profile(runs);
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["config", "instance", "ratio", "fraction"])?;
    let mut rank = 0;
    let mut last = "";
    for (c, i, r) in &pts {
        if c != last {
            rank = 0;
        }
        rank += 1;
        last = c;
        let total = pts.iter().filter(|p| p.0 == *c).count();
        w.write_record([
            c.clone(),
            i.clone(),
            format!("{r}"),
            format!("{}", rank as f64 / total as f64),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn run(manifest: &Path, out: &Path, jobs: usize) -> Result<(), CliError> {
    let m = parse_manifest(manifest)?;
    let runs = run_all(&m, jobs);
    std::fs::create_dir_all(out)?;
    write_runs(&runs, std::fs::File::create(out.join("runs.csv"))?)?;
    write_profile(&runs, std::fs::File::create(out.join("profile.csv"))?)?;
    let failed = runs.iter().filter(|r| r.status == "ERROR").count();
    println!(
        "{} runs written to {} ({failed} errors)",
        runs.len(),
        out.join("runs.csv").display()
    );
    Ok(())
}
