//! Certificate checks on random small LPs: every optimal answer must come with
//! primal and dual feasibility plus complementary slackness, every unbounded
//! answer with a valid improving ray, and every infeasible answer must be
//! confirmed by an elastic LP with positive optimum.

#[path = "common/lp_check.rs"]
mod lp_check;

use lp_check::{check_optimal, check_ray, check_tableau, elastic, TOL};
use lpcc::lp::{solve_lp, LpModel, LpStatus, RowSense, SparseMatrix};
use proptest::collection::vec;
use proptest::prelude::*;

fn lp_strategy() -> impl Strategy<Value = LpModel> {
    (1usize..=5, 1usize..=6).prop_flat_map(|(m, n)| {
        (
            vec(-5i32..=5, n),
            vec(prop_oneof![3 => Just(0i32), 7 => -5i32..=5], m * n),
            vec(0u8..3, m),
            vec(-10i32..=10, m),
            vec(0u8..4, n),
            vec(1i32..=10, n),
        )
            .prop_map(move |(obj, a, senses, rhs, kinds, caps)| {
                let mut lower = vec![0.0; n];
                let mut upper = vec![f64::INFINITY; n];
                for j in 0..n {
                    let u = caps[j] as f64;
                    match kinds[j] {
                        0 => {}
                        1 => upper[j] = u,
                        2 => lower[j] = f64::NEG_INFINITY,
                        _ => (lower[j], upper[j]) = (-u, u),
                    }
                }
                let senses = senses
                    .into_iter()
                    .map(|s| match s {
                        0 => RowSense::Ge,
                        1 => RowSense::Le,
                        _ => RowSense::Eq,
                    })
                    .collect();
                LpModel::new(
                    obj.into_iter().map(f64::from).collect(),
                    SparseMatrix::from_dense(
                        m,
                        n,
                        &a.into_iter().map(f64::from).collect::<Vec<_>>(),
                    ),
                    senses,
                    rhs.into_iter().map(f64::from).collect(),
                    lower,
                    upper,
                )
                .unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn random_lps_carry_certificates(model in lp_strategy()) {
        let s = solve_lp(&model, None).unwrap();
        match s.status {
            LpStatus::Optimal => {
                let resid = check_optimal(&model, &s);
                prop_assert!(resid <= TOL, "duality residual {resid}");
                check_tableau(&model, &s);
            }
            LpStatus::UnboundedBelow => check_ray(&model, &s),
            LpStatus::Infeasible => {
                let el = elastic(&model);
                let e = solve_lp(&el, None).unwrap();
                prop_assert_eq!(e.status, LpStatus::Optimal);
                prop_assert!(check_optimal(&el, &e) <= TOL);
                prop_assert!(e.objective > TOL, "elastic optimum {} on an infeasible LP", e.objective);
            }
        }
    }

    #[test]
    fn warm_start_reaches_the_same_value(model in lp_strategy(), bump in 0usize..6) {
        let s = solve_lp(&model, None).unwrap();
        if s.status != LpStatus::Optimal {
            return Ok(());
        }
        let mut tight = model.clone();
        let j = bump % model.ncols();
        let up = (s.x[j] - 0.5).max(model.lower()[j]);
        tight.set_upper(j, up);
        let cold = solve_lp(&tight, None).unwrap();
        let warm = solve_lp(&tight, Some(&s.basis)).unwrap();
        prop_assert_eq!(cold.status, warm.status);
        if cold.status == LpStatus::Optimal {
            prop_assert!((cold.objective - warm.objective).abs() <= 1e-7 * (1.0 + cold.objective.abs()));
            prop_assert!(check_optimal(&tight, &warm) <= TOL);
        }
    }
}

/// Beale's cycling example: Dantzig pricing with a naive ratio test cycles.
#[test]
fn beale_cycling_example_terminates() {
    let model = LpModel::new(
        vec![-0.75, 20.0, -0.5, 6.0],
        SparseMatrix::from_dense(
            3,
            4,
            &[
                0.25, -8.0, -1.0, 9.0, 0.5, -12.0, -0.5, 3.0, 0.0, 0.0, 1.0, 0.0,
            ],
        ),
        vec![RowSense::Le; 3],
        vec![0.0, 0.0, 1.0],
        vec![0.0; 4],
        vec![f64::INFINITY; 4],
    )
    .unwrap();
    let s = solve_lp(&model, None).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!(check_optimal(&model, &s) <= TOL);
    assert!((s.objective + 1.25).abs() < 1e-9);
}

/// Many constraints through one vertex.
#[test]
fn highly_degenerate_vertex() {
    let k = 12;
    let mut trips = Vec::new();
    for r in 0..k {
        let t = r as f64 / k as f64;
        trips.push((r, 0, 1.0 - t));
        trips.push((r, 1, t));
        trips.push((r, 2, 1.0));
    }
    let model = LpModel::new(
        vec![1.0, 1.0, 1.0],
        SparseMatrix::from_triplets(k, 3, trips).unwrap(),
        vec![RowSense::Ge; k],
        vec![0.0; k],
        vec![0.0; 3],
        vec![f64::INFINITY; 3],
    )
    .unwrap();
    let s = solve_lp(&model, None).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!(check_optimal(&model, &s) <= TOL);
    assert!(s.objective.abs() < 1e-12);
}

#[test]
fn unbounded_fixture_ray() {
    // min −x₀ − x₁ s.t. x₀ − x₁ ≥ −1, x₁ − 2x₀ ≤ 4
    let model = LpModel::new(
        vec![-1.0, -1.0],
        SparseMatrix::from_dense(2, 2, &[1.0, -1.0, -2.0, 1.0]),
        vec![RowSense::Ge, RowSense::Le],
        vec![-1.0, 4.0],
        vec![0.0; 2],
        vec![f64::INFINITY; 2],
    )
    .unwrap();
    let s = solve_lp(&model, None).unwrap();
    assert_eq!(s.status, LpStatus::UnboundedBelow);
    check_ray(&model, &s);
}

#[test]
fn free_variable_unbounded_both_ways() {
    let model = LpModel::new(
        vec![1.0],
        SparseMatrix::zeros(0, 1),
        vec![],
        vec![],
        vec![f64::NEG_INFINITY],
        vec![f64::INFINITY],
    )
    .unwrap();
    let s = solve_lp(&model, None).unwrap();
    assert_eq!(s.status, LpStatus::UnboundedBelow);
    check_ray(&model, &s);
    assert_eq!(s.ray.unwrap()[0], -1.0);
}
