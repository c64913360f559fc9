use super::*;
use crate::generators::{gen_random_lpcc, RandomLpccConfig};
use crate::lp::{solve_lp, SparseMatrix};
use crate::oracle::{enumerate_pieces, DEFAULT_MAX_M};

/// min −y s.t. y ≤ 0.6, 0 ≤ y ⊥ 1 − y ≥ 0: the relaxation sits at y = 0.6,
/// rounds to w = 0 (infeasible), and the single flip y = 0 is feasible.
fn capped() -> LpccInstance {
    LpccInstance::new(
        vec![],
        vec![-1.0],
        vec![-0.6],
        vec![1.0],
        SparseMatrix::zeros(1, 0),
        SparseMatrix::from_dense(1, 1, &[-1.0]),
        SparseMatrix::zeros(1, 0),
        SparseMatrix::from_dense(1, 1, &[-1.0]),
    )
    .unwrap()
}

fn seq() -> RecoveryParams {
    RecoveryParams {
        exec: Exec::Sequential,
        ..Default::default()
    }
}

#[test]
fn rounding_rule() {
    assert_eq!(round_point(&[0.0, 2.0], &[3.0, 1.0]).0, vec![false, true]);
    assert_eq!(round_point(&[1.5], &[1.5]).0, vec![true]);
}

#[test]
fn complementary_relaxation_recovers_at_once() {
    // min y, w = 1 − y: relaxation optimum y = 0, w = 1 is complementary
    let inst = LpccInstance::new(
        vec![],
        vec![1.0],
        vec![],
        vec![1.0],
        SparseMatrix::zeros(0, 0),
        SparseMatrix::zeros(0, 1),
        SparseMatrix::zeros(1, 0),
        SparseMatrix::from_dense(1, 1, &[-1.0]),
    )
    .unwrap();
    let relax = solve_lp(&build_relaxation(&inst), None).unwrap();
    let r = local_search_recovery(&inst, &relax, &seq()).unwrap();
    assert_eq!(r.gap_evaluations, 1);
    assert_eq!(r.point().unwrap().objective, 0.0);
    let (g, _) = feasibility_gap(&inst, &round_assignment(&inst, &relax), None).unwrap();
    assert_eq!(g, 0.0);
}

#[test]
fn one_flip_reaches_a_feasible_piece() {
    let inst = capped();
    let relax = solve_lp(&build_relaxation(&inst), None).unwrap();
    assert!((relax.objective + 0.6).abs() < 1e-12);
    let z = round_assignment(&inst, &relax);
    assert_eq!(z.0, vec![true]);
    let (g, _) = feasibility_gap(&inst, &z, None).unwrap();
    assert!((g - 0.4).abs() < 1e-12);
    let r = local_search_recovery(&inst, &relax, &seq()).unwrap();
    match r.status {
        RecoveryStatus::Recovered { point, z } => {
            assert_eq!(z.0, vec![false]);
            assert_eq!(point.objective, 0.0);
        }
        RecoveryStatus::Failed => panic!("expected recovery"),
    }
    assert_eq!(r.gap_evaluations, 2);
}

#[test]
fn windowed_gap_is_infinite_when_window_is_empty() {
    let inst = capped();
    let (g, _) = feasibility_gap(&inst, &Assignment(vec![false]), Some((5.0, 6.0))).unwrap();
    assert_eq!(g, f64::INFINITY);
}

#[test]
fn empty_window_never_improves() {
    let inst = capped();
    let r = refined_recovery(&inst, -0.6, -0.6, &seq()).unwrap();
    assert_eq!(r.status, RecoveryStatus::Failed);
    assert_eq!(r.gap_evaluations, 0);
}

#[test]
fn refinement_is_sound_and_no_worse_than_local_search() {
    for seed in 0..12 {
        let cfg = RandomLpccConfig {
            n: 2,
            m: 7,
            k: 3,
            rank_m: 3,
            dense: 70.0,
            seed,
        };
        let (inst, _) = gen_random_lpcc(&cfg).unwrap();
        let relax = solve_lp(&build_relaxation(&inst), None).unwrap();
        if relax.status != LpStatus::Optimal {
            continue;
        }
        let opt = enumerate_pieces(&inst, DEFAULT_MAX_M, Exec::Sequential)
            .unwrap()
            .outcome
            .objective()
            .unwrap();
        let local = local_search_recovery(&inst, &relax, &seq()).unwrap();
        let Some(p) = local.point() else { continue };
        assert!(check_feasible(&inst, p, 1e-6));
        assert!(p.objective >= opt - 1e-7, "seed {seed}");
        let refined = refined_recovery(&inst, p.objective, relax.objective, &seq()).unwrap();
        if let Some(q) = refined.point() {
            assert!(check_feasible(&inst, q, 1e-6));
            assert!(q.objective < p.objective);
            assert!(q.objective >= opt - 1e-7);
        }
    }
}

#[test]
fn parallel_and_sequential_searches_agree() {
    let cfg = RandomLpccConfig {
        n: 2,
        m: 9,
        k: 3,
        rank_m: 4,
        dense: 70.0,
        seed: 4,
    };
    let (inst, _) = gen_random_lpcc(&cfg).unwrap();
    let relax = solve_lp(&build_relaxation(&inst), None).unwrap();
    let a = local_search_recovery(&inst, &relax, &seq()).unwrap();
    let b = local_search_recovery(&inst, &relax, &RecoveryParams::default()).unwrap();
    assert_eq!(a, b);
}
