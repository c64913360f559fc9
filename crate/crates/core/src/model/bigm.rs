//! Big-M mixed-integer reformulation in CPLEX LP text format.
//!
//! Complementarity `i` becomes `y_i − θʸ_i z_i ≤ 0` and `w_i + θʷ_i z_i ≤ θʷ_i`
//! with binary `z_i`; `w` stays an explicit variable tied to `q + Nx + My`.

use std::fmt::Write as _;
use std::path::Path;

use super::{BoundBox, LpccInstance, ModelError};

fn term(s: &mut String, first: &mut bool, coeff: f64, name: &str) {
    if coeff == 0.0 {
        return;
    }
    if *first {
        if coeff < 0.0 {
            write!(s, " - {} {name}", -coeff).unwrap();
        } else {
            write!(s, " {coeff} {name}").unwrap();
        }
        *first = false;
    } else if coeff < 0.0 {
        write!(s, " - {} {name}", -coeff).unwrap();
    } else {
        write!(s, " + {coeff} {name}").unwrap();
    }
}

fn finish_lhs(s: &mut String, first: bool) {
    if first {
        s.push_str(" 0 x_dummy");
    }
}

/// Renders the big-M MIP as LP-format text.
pub fn export_bigm_mip(inst: &LpccInstance, bounds: &BoundBox) -> Result<String, ModelError> {
    let (n, m) = (inst.n, inst.m);
    let mut theta_y = Vec::with_capacity(m);
    let mut theta_w = Vec::with_capacity(m);
    for i in 0..m {
        match (
            bounds.u_y.get(i).copied().flatten(),
            bounds.u_w.get(i).copied().flatten(),
        ) {
            (Some(uy), Some(uw)) if uy.is_finite() && uw.is_finite() => {
                theta_y.push(uy);
                theta_w.push(uw);
            }
            _ => return Err(ModelError::MissingBounds(i)),
        }
    }
    let xn = |j: usize| format!("x{j}");
    let yn = |i: usize| format!("y{i}");
    let wn = |i: usize| format!("w{i}");
    let zn = |i: usize| format!("z{i}");

    let mut s = String::new();
    s.push_str("\\ LPCC big-M reformulation\nMinimize\n obj:");
    let mut first = true;
    for j in 0..n {
        term(&mut s, &mut first, inst.c[j], &xn(j));
    }
    for i in 0..m {
        term(&mut s, &mut first, inst.d[i], &yn(i));
    }
    finish_lhs(&mut s, first);
    s.push_str("\nSubject To\n");

    let a_rows = inst.a.rows();
    let b_rows = inst.b_mat.rows();
    for r in 0..inst.k {
        write!(s, " link{r}:").unwrap();
        let mut first = true;
        for &(j, v) in &a_rows[r] {
            term(&mut s, &mut first, v, &xn(j));
        }
        for &(i, v) in &b_rows[r] {
            term(&mut s, &mut first, v, &yn(i));
        }
        finish_lhs(&mut s, first);
        writeln!(s, " >= {}", inst.b[r]).unwrap();
    }
    let n_rows = inst.n_mat.rows();
    let m_rows = inst.m_mat.rows();
    for i in 0..m {
        write!(s, " wdef{i}:").unwrap();
        let mut first = true;
        term(&mut s, &mut first, 1.0, &wn(i));
        for &(j, v) in &n_rows[i] {
            term(&mut s, &mut first, -v, &xn(j));
        }
        for &(l, v) in &m_rows[i] {
            term(&mut s, &mut first, -v, &yn(l));
        }
        writeln!(s, " = {}", inst.q[i]).unwrap();
    }
    for i in 0..m {
        write!(s, " ybig{i}:").unwrap();
        let mut first = true;
        term(&mut s, &mut first, 1.0, &yn(i));
        term(&mut s, &mut first, -theta_y[i], &zn(i));
        writeln!(s, " <= 0").unwrap();
        write!(s, " wbig{i}:").unwrap();
        let mut first = true;
        term(&mut s, &mut first, 1.0, &wn(i));
        term(&mut s, &mut first, theta_w[i], &zn(i));
        writeln!(s, " <= {}", theta_w[i]).unwrap();
    }
    s.push_str("Bounds\n");
    for i in 0..m {
        writeln!(s, " 0 <= {} <= 1", zn(i)).unwrap();
    }
    s.push_str("Binary\n");
    for i in 0..m {
        writeln!(s, " {}", zn(i)).unwrap();
    }
    s.push_str("End\n");
    Ok(s)
}

pub fn write_bigm_mip(
    inst: &LpccInstance,
    bounds: &BoundBox,
    path: impl AsRef<Path>,
) -> Result<(), ModelError> {
    std::fs::write(path, export_bigm_mip(inst, bounds)?)?;
    Ok(())
}
