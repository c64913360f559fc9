//! Independent LP certificate checks shared by the property suite and the
//! acceptance run. All of them panic on failure.

#![allow(dead_code)]

use lpcc::generators::Rng;
use lpcc::lp::{LpModel, LpSolution, RowSense, SparseMatrix};

pub const TOL: f64 = 1e-7;

pub fn dense_solve(mut b: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Vec<f64> {
    let n = rhs.len();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| b[i][c].abs().total_cmp(&b[j][c].abs()))
            .unwrap();
        b.swap(c, p);
        rhs.swap(c, p);
        for r in c + 1..n {
            let f = b[r][c] / b[c][c];
            for k in c..n {
                b[r][k] -= f * b[c][k];
            }
            rhs[r] -= f * rhs[c];
        }
    }
    let mut y = vec![0.0; n];
    for c in (0..n).rev() {
        let s: f64 = (c + 1..n).map(|k| b[c][k] * y[k]).sum();
        y[c] = (rhs[c] - s) / b[c][c];
    }
    y
}

/// Checks optimality conditions from scratch; returns the duality residual.
pub fn check_optimal(model: &LpModel, s: &LpSolution) -> f64 {
    let (n, m) = (model.ncols(), model.nrows());
    let a = model.matrix().to_dense();
    let c = model.objective();
    assert!(
        model.max_violation(&s.x) <= TOL,
        "primal violation {}",
        model.max_violation(&s.x)
    );
    assert!((model.objective_value(&s.x) - s.objective).abs() <= TOL * (1.0 + s.objective.abs()));
    let act = model.matrix().mul_vec(&s.x);
    for r in 0..m {
        let pi = s.duals[r];
        let slack = act[r] - model.rhs()[r];
        match model.senses()[r] {
            RowSense::Ge => assert!(pi >= -TOL, "row {r}: π {pi} on ≥"),
            RowSense::Le => assert!(pi <= TOL, "row {r}: π {pi} on ≤"),
            RowSense::Eq => {}
        }
        assert!((pi * slack).abs() <= TOL, "row {r}: π {pi}, slack {slack}");
    }
    let mut resid: f64 = 0.0;
    for j in 0..n {
        let d = c[j] - (0..m).map(|r| a[r * n + j] * s.duals[r]).sum::<f64>();
        resid = resid.max((d - s.reduced_costs[j]).abs());
        let (lo, up, v) = (model.lower()[j], model.upper()[j], s.x[j]);
        let at_lo = lo.is_finite() && (v - lo).abs() <= TOL;
        let at_up = up.is_finite() && (v - up).abs() <= TOL;
        match (at_lo, at_up) {
            (true, true) => {}
            (true, false) => assert!(d >= -TOL, "col {j}: d {d} at lower"),
            (false, true) => assert!(d <= TOL, "col {j}: d {d} at upper"),
            (false, false) => assert!(d.abs() <= TOL, "col {j}: d {d} between bounds"),
        }
    }
    // cᵀx = Σ π_r a_rᵀx + Σ d_j x_j, and CS turns a_rᵀx into rhs_r
    let dual_value: f64 = (0..m).map(|r| s.duals[r] * model.rhs()[r]).sum::<f64>()
        + (0..n).map(|j| s.reduced_costs[j] * s.x[j]).sum::<f64>();
    resid.max((dual_value - s.objective).abs())
}

pub fn check_ray(model: &LpModel, s: &LpSolution) {
    let ray = s.ray.as_ref().expect("unbounded carries a ray");
    assert!(model.max_violation(&s.x) <= TOL, "ray base infeasible");
    let norm = ray.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    assert!((norm - 1.0).abs() <= 1e-12);
    assert!(model.objective_value(ray) < -TOL);
    for (r, act) in model.matrix().mul_vec(ray).into_iter().enumerate() {
        match model.senses()[r] {
            RowSense::Ge => assert!(act >= -TOL),
            RowSense::Le => assert!(act <= TOL),
            RowSense::Eq => assert!(act.abs() <= TOL),
        }
    }
    for (j, &d) in ray.iter().enumerate() {
        if model.lower()[j].is_finite() {
            assert!(d >= -TOL);
        }
        if model.upper()[j].is_finite() {
            assert!(d <= TOL);
        }
    }
}

/// Adds `e⁺ − e⁻` to every row and minimizes `Σ e`.
pub fn elastic(model: &LpModel) -> LpModel {
    let (n, m) = (model.ncols(), model.nrows());
    let mut trips: Vec<(usize, usize, f64)> = model.matrix().triplets().to_vec();
    for r in 0..m {
        trips.push((r, n + 2 * r, 1.0));
        trips.push((r, n + 2 * r + 1, -1.0));
    }
    let mut obj = vec![0.0; n + 2 * m];
    obj[n..].fill(1.0);
    let mut lower = model.lower().to_vec();
    lower.resize(n + 2 * m, 0.0);
    let mut upper = model.upper().to_vec();
    upper.resize(n + 2 * m, f64::INFINITY);
    LpModel::new(
        obj,
        SparseMatrix::from_triplets(m, n + 2 * m, trips).unwrap(),
        model.senses().to_vec(),
        model.rhs().to_vec(),
        lower,
        upper,
    )
    .unwrap()
}

/// Moves every nonbasic by a fixed offset, recomputes the basics from
/// `[A | −I] v = 0` with a dense solve, and compares with each tableau row.
pub fn check_tableau(model: &LpModel, s: &LpSolution) {
    let (n, m) = (model.ncols(), model.nrows());
    let a = model.matrix().to_dense();
    let column = |j: usize| -> Vec<f64> {
        if j < n {
            (0..m).map(|r| a[r * n + j]).collect()
        } else {
            (0..m)
                .map(|r| if r == j - n { -1.0 } else { 0.0 })
                .collect()
        }
    };
    let order = s.basis.basic_order().to_vec();
    let mut cur: Vec<f64> = s.x.clone();
    cur.extend_from_slice(&s.row_activity);
    let delta = |j: usize| ((j * 7 % 5) as f64 - 2.0) * 0.1;
    let mut rhs = vec![0.0; m];
    for j in 0..n + m {
        if s.basis.is_basic(j) {
            continue;
        }
        for (r, v) in column(j).into_iter().enumerate() {
            rhs[r] -= v * (cur[j] + delta(j));
        }
    }
    let bmat: Vec<Vec<f64>> = (0..m)
        .map(|r| order.iter().map(|&b| column(b)[r]).collect())
        .collect();
    let basics = dense_solve(bmat, rhs);
    for (pos, &b) in order.iter().enumerate() {
        let row = s.tableau_row(b).unwrap();
        assert!((row.constant - cur[b]).abs() <= 1e-9 * (1.0 + cur[b].abs()));
        let moved = row.constant
            - row
                .entries
                .iter()
                .map(|e| e.coeff * delta(e.var))
                .sum::<f64>();
        let tol = 1e-7 * (1.0 + basics[pos].abs());
        assert!(
            (moved - basics[pos]).abs() <= tol,
            "var {b}: tableau {moved} vs dense {}",
            basics[pos]
        );
    }
}

/// Same shape as the proptest strategy: up to 5 rows and 6 columns, integer
/// data, mixed senses and bound kinds.
pub fn random_lp(rng: &mut Rng) -> LpModel {
    let m = rng.int_in(1, 5) as usize;
    let n = rng.int_in(1, 6) as usize;
    let obj: Vec<f64> = (0..n).map(|_| rng.int_in(-5, 5) as f64).collect();
    let a: Vec<f64> = (0..m * n)
        .map(|_| {
            if rng.bernoulli(0.3) {
                0.0
            } else {
                rng.int_in(-5, 5) as f64
            }
        })
        .collect();
    let senses = (0..m)
        .map(|_| match rng.int_in(0, 2) {
            0 => RowSense::Ge,
            1 => RowSense::Le,
            _ => RowSense::Eq,
        })
        .collect();
    let rhs = (0..m).map(|_| rng.int_in(-10, 10) as f64).collect();
    let mut lower = vec![0.0; n];
    let mut upper = vec![f64::INFINITY; n];
    for j in 0..n {
        let u = rng.int_in(1, 10) as f64;
        match rng.int_in(0, 3) {
            0 => {}
            1 => upper[j] = u,
            2 => lower[j] = f64::NEG_INFINITY,
            _ => (lower[j], upper[j]) = (-u, u),
        }
    }
    LpModel::new(
        obj,
        SparseMatrix::from_dense(m, n, &a),
        senses,
        rhs,
        lower,
        upper,
    )
    .unwrap()
}
