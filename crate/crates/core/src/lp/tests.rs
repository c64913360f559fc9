use super::*;

fn one_var(obj: f64) -> LpModel {
    let mut m = LpModel::nonnegative(1);
    m.set_objective(vec![obj]);
    m
}

/// Solves `B y = rhs` by Gaussian elimination with partial pivoting.
fn dense_solve(mut b: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Vec<f64> {
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

#[test]
fn single_lower_row() {
    let mut m = one_var(1.0);
    m.add_row(&[(0, 1.0)], RowSense::Ge, 3.0);
    let s = solve_lp(&m, None).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!((s.x[0] - 3.0).abs() < 1e-12);
    assert!((s.objective - 3.0).abs() < 1e-12);
}

#[test]
fn unbounded_gives_positive_ray() {
    let m = one_var(-1.0);
    let s = solve_lp(&m, None).unwrap();
    assert_eq!(s.status, LpStatus::UnboundedBelow);
    let ray = s.ray.unwrap();
    assert!(ray[0] > 0.0);
    assert_eq!(ray[0], 1.0);
}

#[test]
fn contradictory_row_is_infeasible() {
    let mut m = one_var(0.0);
    m.add_row(&[(0, 0.0)], RowSense::Ge, 1.0);
    assert_eq!(solve_lp(&m, None).unwrap().status, LpStatus::Infeasible);
}

#[test]
fn bounds_only_model() {
    let mut m = LpModel::nonnegative(2);
    m.set_objective(vec![-1.0, 2.0]);
    m.set_bounds(0, 0.0, 4.0);
    m.set_bounds(1, -1.0, 5.0);
    let s = solve_lp(&m, None).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert_eq!(s.x, vec![4.0, -1.0]);
}

#[test]
fn tableau_row_of_capped_variable() {
    // min −x s.t. x ≤ 3: x basic at 3, the row's logical at its upper bound.
    let mut m = one_var(-1.0);
    m.add_row(&[(0, 1.0)], RowSense::Le, 3.0);
    let s = solve_lp(&m, None).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    let row = s.tableau_row(0).unwrap();
    assert!((row.constant - 3.0).abs() < 1e-12);
    let shifted = row.shifted().unwrap();
    assert_eq!(shifted.len(), 1);
    assert_eq!(shifted[0].0, 1);
    assert!((shifted[0].1 - 1.0).abs() < 1e-12);
    assert_eq!(s.tableau_row(1), Err(LpError::NotBasic(1)));
}

#[test]
fn degenerate_basic_at_zero() {
    // min x1 + x2 s.t. x1 − x2 ≥ 0, x1 + x2 ≥ 0: optimum at the origin, degenerate.
    let mut m = LpModel::nonnegative(2);
    m.set_objective(vec![1.0, 1.0]);
    m.add_row(&[(0, 1.0), (1, -1.0)], RowSense::Ge, 0.0);
    m.add_row(&[(0, 1.0), (1, 1.0)], RowSense::Ge, 0.0);
    let s = solve_lp(&m, None).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    for (r, &var) in s.basis.basic_order().iter().enumerate() {
        let row = s.tableau_row(var).unwrap();
        assert!((row.constant - s.value(var)).abs() < 1e-12, "row {r}");
    }
    assert!(s.objective.abs() < 1e-12);
}

#[test]
fn tableau_matches_dense_oracle() {
    // min −3a − 2b s.t. a + b ≤ 4, a + 3b ≤ 6, a ≤ 3.
    let mut m = LpModel::nonnegative(2);
    m.set_objective(vec![-3.0, -2.0]);
    m.add_row(&[(0, 1.0), (1, 1.0)], RowSense::Le, 4.0);
    m.add_row(&[(0, 1.0), (1, 3.0)], RowSense::Le, 6.0);
    m.add_row(&[(0, 1.0)], RowSense::Le, 3.0);
    let s = solve_lp(&m, None).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!((s.objective + 11.0).abs() < 1e-9);

    let dense = m.matrix().to_dense();
    let (nr, nc) = (m.nrows(), m.ncols());
    let column = |j: usize| -> Vec<f64> {
        if j < nc {
            (0..nr).map(|i| dense[i * nc + j]).collect()
        } else {
            (0..nr)
                .map(|i| if i == j - nc { -1.0 } else { 0.0 })
                .collect()
        }
    };
    let order = s.basis.basic_order().to_vec();
    let bmat: Vec<Vec<f64>> = (0..nr)
        .map(|i| order.iter().map(|&j| column(j)[i]).collect())
        .collect();
    for (pos, &var) in order.iter().enumerate() {
        let row = s.tableau_row(var).unwrap();
        for j in 0..nc + nr {
            if s.basis.is_basic(j) {
                continue;
            }
            let alpha = dense_solve(bmat.clone(), column(j));
            let got = row
                .entries
                .iter()
                .find(|e| e.var == j)
                .map_or(0.0, |e| e.coeff);
            assert!(
                (alpha[pos] - got).abs() < 1e-9,
                "var {var} col {j}: {} vs {got}",
                alpha[pos]
            );
        }
    }
}

#[test]
fn fixing_a_variable_forces_zero() {
    let mut m = LpModel::nonnegative(2);
    m.set_objective(vec![-1.0, -1.0]);
    m.add_row(&[(0, 1.0), (1, 1.0)], RowSense::Le, 2.0);
    let fixed = fix_to_zero(&m, 0);
    let s = solve_lp(&fixed, None).unwrap();
    assert_eq!(s.x[0], 0.0);
    assert!((s.objective + 2.0).abs() < 1e-12);
}

#[test]
fn fixing_both_sides_of_satisfied_pair_keeps_value() {
    // y, w with w = 1 − y; optimum y = 1, w = 0 is complementary, so fixing w
    // to zero (the side already at zero) leaves the LP value unchanged.
    let mut m = LpModel::nonnegative(2);
    m.set_objective(vec![-1.0, 0.0]);
    m.add_row(&[(0, 1.0), (1, 1.0)], RowSense::Eq, 1.0);
    let base = solve_lp(&m, None).unwrap();
    let fixed = solve_lp(&fix_to_zero(&m, 1), None).unwrap();
    assert!((base.objective - fixed.objective).abs() < 1e-12);
}

#[test]
fn warm_start_after_bound_tightening() {
    let mut m = LpModel::nonnegative(3);
    m.set_objective(vec![-1.0, -2.0, -3.0]);
    m.add_row(&[(0, 1.0), (1, 1.0), (2, 1.0)], RowSense::Le, 10.0);
    m.add_row(&[(1, 1.0), (2, 2.0)], RowSense::Le, 12.0);
    let s = solve_lp(&m, None).unwrap();
    let tightened = fix_to_zero(&m, 2);
    let warm = solve_lp(&tightened, Some(&s.basis)).unwrap();
    let cold = solve_lp(&tightened, None).unwrap();
    assert_eq!(warm.status, LpStatus::Optimal);
    assert!((warm.objective - cold.objective).abs() < 1e-9);
    // reusing an optimal basis on the same model takes no pivots
    let again = solve_lp(&m, Some(&s.basis)).unwrap();
    assert_eq!(again.iterations, 0);
    assert!((again.objective - s.objective).abs() < 1e-12);
}

#[test]
fn basis_row_extension_and_removal() {
    let mut m = LpModel::nonnegative(2);
    m.set_objective(vec![-1.0, -1.0]);
    m.add_row(&[(0, 1.0), (1, 2.0)], RowSense::Le, 4.0);
    let s = solve_lp(&m, None).unwrap();
    m.add_row(&[(0, 1.0)], RowSense::Le, 1.0);
    let b = s.basis.extend_rows(2);
    let s2 = solve_lp(&m, Some(&b)).unwrap();
    assert!((s2.objective + 2.5).abs() < 1e-9);
    let removed = Basis::slack(&m).remove_rows(&[1]).unwrap();
    assert_eq!(removed.nrows(), 1);
}
