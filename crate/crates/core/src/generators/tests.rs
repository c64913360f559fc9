use super::*;
use crate::model::{check_feasible, format_instance};

fn cfg(seed: u64) -> RandomLpccConfig {
    RandomLpccConfig {
        n: 2,
        m: 9,
        k: 4,
        rank_m: 3,
        dense: 70.0,
        seed,
    }
}

#[test]
fn same_seed_same_bytes() {
    let a = gen_random_lpcc(&cfg(5)).unwrap().0;
    let b = gen_random_lpcc(&cfg(5)).unwrap().0;
    assert_eq!(format_instance(&a), format_instance(&b));
    assert_ne!(
        format_instance(&a),
        format_instance(&gen_random_lpcc(&cfg(6)).unwrap().0)
    );
}

#[test]
fn planted_point_is_feasible() {
    for seed in 0..20 {
        let (inst, w) = gen_random_lpcc(&cfg(seed)).unwrap();
        assert!(check_feasible(&inst, &w, 1e-9), "seed {seed}");
        // linking rows hold with slack Δb ∈ [1, 11]
        let lhs: Vec<f64> = {
            let ax = inst.a.mul_vec(&w.x);
            let by = inst.b_mat.mul_vec(&w.y);
            (0..inst.k).map(|r| ax[r] + by[r] - inst.b[r]).collect()
        };
        assert!(lhs
            .iter()
            .all(|&s| (1.0..=11.0).contains(&s) && s.fract() == 0.0));
        // ȳ vanishes from ⌊m/3⌋ on, w vanishes below 2m/3
        assert!(w.y[3..].iter().all(|&v| v == 0.0));
        assert!(w.w[..6].iter().all(|&v| v == 0.0));
    }
}

#[test]
fn quadratic_form_of_m_is_nonnegative() {
    let (inst, _) = gen_random_lpcc(&cfg(11)).unwrap();
    let mut rng = Rng::new(99);
    for _ in 0..100 {
        let v: Vec<f64> = (0..inst.m).map(|_| rng.open(-1.0, 1.0)).collect();
        let mv = inst.m_mat.mul_vec(&v);
        let quad: f64 = v.iter().zip(&mv).map(|(a, b)| a * b).sum();
        assert!(quad >= -1e-9, "{quad}");
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let bad = RandomLpccConfig {
        rank_m: 20,
        ..cfg(0)
    };
    assert!(gen_random_lpcc(&bad).is_err());
    let bad = RandomLpccConfig {
        dense: 0.0,
        ..cfg(0)
    };
    assert!(gen_random_lpcc(&bad).is_err());
    let bad = BilevelConfig {
        dim_v: 3,
        dim_x: 2,
        dim_b: 1,
        dim_g: 1,
        rank_q: 1,
        seed: 0,
    };
    assert!(gen_bilevel(&bad).is_err());
    assert!(gen_inverse_qp(&InverseQpConfig {
        m_tilde: 0,
        n_tilde: 2,
        seed: 0
    })
    .is_err());
}

#[test]
fn bilevel_dimensions() {
    let inst = gen_bilevel(&BilevelConfig {
        dim_v: 50,
        dim_x: 50,
        dim_b: 25,
        dim_g: 50,
        rank_q: 25,
        seed: 1,
    })
    .unwrap();
    assert_eq!((inst.m, inst.n, inst.k), (100, 100, 175));
    let inst = gen_bilevel(&BilevelConfig {
        dim_v: 50,
        dim_x: 50,
        dim_b: 100,
        dim_g: 200,
        rank_q: 40,
        seed: 2,
    })
    .unwrap();
    assert_eq!(inst.m, 250);
}

#[test]
fn inverse_qp_witness_is_feasible() {
    for seed in 0..10 {
        let (inst, w) = gen_inverse_qp(&InverseQpConfig {
            m_tilde: 12,
            n_tilde: 4,
            seed,
        })
        .unwrap();
        assert_eq!(inst.m, 12);
        assert!(check_feasible(&inst, &w, 1e-7), "seed {seed}");
    }
    let (inst, _) = gen_inverse_qp(&InverseQpConfig {
        m_tilde: 150,
        n_tilde: 20,
        seed: 0,
    })
    .unwrap();
    assert_eq!(inst.m, 150);
}
