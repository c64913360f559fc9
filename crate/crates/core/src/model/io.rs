//! The `LPCC1` text format.
//!
//! ```text
//! LPCC1 n m k
//! c <n>      followed by n reals
//! d <m>      followed by m reals
//! b <k>      followed by k reals
//! q <m>      followed by m reals
//! A <nnz>    followed by nnz lines `row col value` (0-based)
//! B <nnz> ...
//! N <nnz> ...
//! M <nnz> ...
//! ```
//!
//! Reals are written with 17 significant digits, which round-trips every f64.

use std::fmt::Write as _;
use std::path::Path;

use super::{LpccInstance, ModelError};
use crate::lp::SparseMatrix;

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn format_instance(inst: &LpccInstance) -> String {
    let mut s = String::new();
    writeln!(s, "LPCC1 {} {} {}", inst.n, inst.m, inst.k).unwrap();
    for (label, vals) in [
        ("c", &inst.c),
        ("d", &inst.d),
        ("b", &inst.b),
        ("q", &inst.q),
    ] {
        writeln!(s, "{label} {}", vals.len()).unwrap();
        for v in vals.iter() {
            writeln!(s, "{}", real(*v)).unwrap();
        }
    }
    for (label, mat) in [
        ("A", &inst.a),
        ("B", &inst.b_mat),
        ("N", &inst.n_mat),
        ("M", &inst.m_mat),
    ] {
        writeln!(s, "{label} {}", mat.nnz()).unwrap();
        let mut trips = mat.triplets().to_vec();
        trips.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        for (r, c, v) in trips {
            writeln!(s, "{r} {c} {}", real(v)).unwrap();
        }
    }
    s
}

pub fn write_instance(inst: &LpccInstance, path: impl AsRef<Path>) -> Result<(), ModelError> {
    std::fs::write(path, format_instance(inst))?;
    Ok(())
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<LpccInstance, ModelError> {
    parse_instance(&std::fs::read_to_string(path)?)
}

struct Tokens<'a> {
    toks: Vec<(usize, &'a str)>,
    pos: usize,
    last_line: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let toks: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .flat_map(|(i, l)| l.split_whitespace().map(move |t| (i + 1, t)))
            .collect();
        let last_line = text.lines().count().max(1);
        Self {
            toks,
            pos: 0,
            last_line,
        }
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str), ModelError> {
        let t = self
            .toks
            .get(self.pos)
            .copied()
            .ok_or_else(|| ModelError::Parse {
                line: self.last_line,
                msg: format!("unexpected end of file, expected {what}"),
            })?;
        self.pos += 1;
        Ok(t)
    }

    fn usize(&mut self, what: &str) -> Result<usize, ModelError> {
        let (line, t) = self.next(what)?;
        t.parse().map_err(|_| ModelError::Parse {
            line,
            msg: format!("expected {what}, got `{t}`"),
        })
    }

    fn real(&mut self, what: &str) -> Result<f64, ModelError> {
        let (line, t) = self.next(what)?;
        match t.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(ModelError::Parse {
                line,
                msg: format!("expected finite {what}, got `{t}`"),
            }),
        }
    }

    fn label(&mut self, want: &str) -> Result<(), ModelError> {
        let (line, t) = self.next(want)?;
        if t != want {
            return Err(ModelError::Parse {
                line,
                msg: format!("expected section `{want}`, got `{t}`"),
            });
        }
        Ok(())
    }
}

pub fn parse_instance(text: &str) -> Result<LpccInstance, ModelError> {
    let mut t = Tokens::new(text);
    t.label("LPCC1")?;
    let n = t.usize("n")?;
    let m = t.usize("m")?;
    let k = t.usize("k")?;
    let vector = |label: &str, want: usize, t: &mut Tokens| -> Result<Vec<f64>, ModelError> {
        t.label(label)?;
        let count = t.usize("count")?;
        if count != want {
            return Err(ModelError::DimensionMismatch(format!(
                "section {label} has {count} entries, expected {want}"
            )));
        }
        (0..count).map(|_| t.real("value")).collect()
    };
    let c = vector("c", n, &mut t)?;
    let d = vector("d", m, &mut t)?;
    let b = vector("b", k, &mut t)?;
    let q = vector("q", m, &mut t)?;
    let matrix = |label: &str, rows: usize, cols: usize, t: &mut Tokens| {
        t.label(label)?;
        let count = t.usize("triplet count")?;
        let mut seen = std::collections::HashSet::new();
        let mut trips = Vec::with_capacity(count);
        for _ in 0..count {
            let (line, _) = t.toks.get(t.pos).copied().unwrap_or((t.last_line, ""));
            let r = t.usize("row")?;
            let col = t.usize("col")?;
            let v = t.real("value")?;
            if r >= rows || col >= cols {
                return Err(ModelError::DimensionMismatch(format!(
                    "{label} entry ({r}, {col}) outside {rows}x{cols} (line {line})"
                )));
            }
            if !seen.insert((r, col)) {
                return Err(ModelError::Parse {
                    line,
                    msg: format!("duplicate {label} entry ({r}, {col})"),
                });
            }
            trips.push((r, col, v));
        }
        Ok::<_, ModelError>(SparseMatrix::from_triplets(rows, cols, trips)?)
    };
    let a = matrix("A", k, n, &mut t)?;
    let b_mat = matrix("B", k, m, &mut t)?;
    let n_mat = matrix("N", m, n, &mut t)?;
    let m_mat = matrix("M", m, m, &mut t)?;
    if let Some(&(line, tok)) = t.toks.get(t.pos) {
        return Err(ModelError::Parse {
            line,
            msg: format!("trailing token `{tok}`"),
        });
    }
    LpccInstance::new(c, d, b, q, a, b_mat, n_mat, m_mat)
}
