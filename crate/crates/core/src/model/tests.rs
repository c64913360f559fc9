use std::collections::BTreeMap;

use super::*;
use crate::lp::{solve_lp, LpStatus};

fn empty(r: usize, c: usize) -> SparseMatrix {
    SparseMatrix::zeros(r, c)
}

/// min −y s.t. 0 ≤ y ⊥ 1 − y ≥ 0.
fn one_minus_y() -> LpccInstance {
    LpccInstance::new(
        vec![],
        vec![-1.0],
        vec![],
        vec![1.0],
        empty(0, 0),
        empty(0, 1),
        empty(1, 0),
        SparseMatrix::from_dense(1, 1, &[-1.0]),
    )
    .unwrap()
}

fn small() -> LpccInstance {
    // n=1, m=2, k=1
    LpccInstance::new(
        vec![1.0],
        vec![-2.0, 1.0],
        vec![-4.0],
        vec![3.0, -1.0],
        SparseMatrix::from_dense(1, 1, &[-1.0]),
        SparseMatrix::from_dense(1, 2, &[-1.0, -1.0]),
        SparseMatrix::from_dense(2, 1, &[-1.0, 1.0]),
        SparseMatrix::from_dense(2, 2, &[-1.0, 0.0, 0.5, 1.0]),
    )
    .unwrap()
}

#[test]
fn relaxation_unbounded_when_y_is_free_of_w() {
    let inst = LpccInstance::new(
        vec![],
        vec![-1.0],
        vec![],
        vec![1.0],
        empty(0, 0),
        empty(0, 1),
        empty(1, 0),
        empty(1, 1),
    )
    .unwrap();
    let s = solve_lp(&build_relaxation(&inst), None).unwrap();
    assert_eq!(s.status, LpStatus::UnboundedBelow);
}

#[test]
fn relaxation_layout() {
    let inst = small();
    let lp = build_relaxation(&inst);
    assert_eq!(lp.ncols(), 5);
    assert_eq!(lp.nrows(), 3);
    assert_eq!(lp.objective(), &[1.0, -2.0, 1.0, 0.0, 0.0]);
    // w_0 − (−1)x − (−1)y_0 = 3
    let dense = lp.matrix().to_dense();
    assert_eq!(&dense[5..10], &[1.0, 1.0, 0.0, 1.0, 0.0]);
}

#[test]
fn piece_lp_caps_the_selected_side() {
    let inst = small();
    let lp = build_piece_lp(&inst, &Assignment(vec![false, true]));
    assert_eq!(lp.upper()[inst.y_var(0)], 0.0);
    assert_eq!(lp.upper()[inst.w_var(1)], 0.0);
    assert!(lp.upper()[inst.w_var(0)].is_infinite());
    let s = solve_lp(&build_piece_lp(&inst, &Assignment::zeros(2)), None).unwrap();
    if s.status == LpStatus::Optimal {
        assert!(s.x[inst.y_var(0)].abs() < 1e-12 && s.x[inst.y_var(1)].abs() < 1e-12);
    }
}

#[test]
fn piece_values_bound_relaxation() {
    let inst = small();
    let relax = solve_lp(&build_relaxation(&inst), None).unwrap();
    assert_eq!(relax.status, LpStatus::Optimal);
    for idx in 0..4 {
        let z = Assignment::from_index(2, idx);
        let s = solve_lp(&build_piece_lp(&inst, &z), None).unwrap();
        if s.status == LpStatus::Optimal {
            assert!(s.objective >= relax.objective - 1e-9);
        }
    }
}

#[test]
fn gap_lp_is_zero_on_complementary_piece() {
    let inst = one_minus_y();
    let z1 = Assignment(vec![true]);
    let s = solve_lp(&build_feasibility_gap_lp(&inst, &z1, None), None).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!(s.objective.abs() < 1e-12);
    // a window excluding every point makes the LP infeasible
    let s = solve_lp(
        &build_feasibility_gap_lp(&inst, &z1, Some((5.0, 6.0))),
        None,
    )
    .unwrap();
    assert_eq!(s.status, LpStatus::Infeasible);
    let lp = build_feasibility_gap_lp(&inst, &z1, Some((-2.0, 0.0)));
    assert_eq!(lp.nrows(), 3);
}

#[test]
fn feasibility_check() {
    let inst = one_minus_y();
    let good = LpccPoint::from_xy(&inst, vec![], vec![1.0]);
    assert!(check_feasible(&inst, &good, 1e-6));
    let bad = LpccPoint::from_xy(&inst, vec![], vec![0.5]);
    assert!(!check_feasible(&inst, &bad, 1e-6));
    // min(y, w) exactly at the tolerance still counts as complementary
    let edge = LpccPoint::from_xy(&inst, vec![], vec![1.0 - 0.25]);
    assert!(check_feasible(&inst, &edge, 0.25));
    assert!(!check_feasible(&inst, &edge, 0.2499));
}

#[test]
fn relative_gap_formula() {
    assert_eq!(relative_gap(5.0, 5.0), 0.0);
    assert_eq!(relative_gap(2.0, 0.5), 1.5);
    let g = relative_gap(770.287, 669.22439);
    assert!((g - 0.151_015).abs() < 1e-5, "{g}");
    assert!((g - (770.287 - 669.22439) / 669.22439).abs() < 1e-15);
    assert_eq!(relative_gap(f64::INFINITY, 3.0), f64::INFINITY);
}

#[test]
fn assignment_enumeration_order() {
    assert_eq!(Assignment::from_index(3, 0).as_bits(), "000");
    assert_eq!(Assignment::from_index(3, 1).as_bits(), "001");
    assert_eq!(Assignment::from_index(3, 6).as_bits(), "110");
    let z = Assignment::from_index(3, 5);
    let adj: Vec<String> = z.adjacent().map(|a| a.as_bits()).collect();
    assert_eq!(adj, vec!["001", "111", "100"]);
}

#[test]
fn instance_round_trip() {
    let inst = small();
    let text = format_instance(&inst);
    assert_eq!(parse_instance(&text).unwrap(), inst);
    let dir = std::env::temp_dir().join(format!("lpcc-io-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("small.lpcc");
    write_instance(&inst, &path).unwrap();
    assert_eq!(read_instance(&path).unwrap(), inst);
    let odd = LpccInstance {
        c: vec![0.1 + 0.2],
        ..inst
    };
    assert_eq!(parse_instance(&format_instance(&odd)).unwrap(), odd);
}

#[test]
fn truncated_file_is_a_parse_error() {
    let text = format_instance(&small());
    let cut = &text[..text.len() / 2];
    match parse_instance(cut) {
        Err(ModelError::Parse { line, .. }) => assert!(line > 1),
        other => panic!("expected parse error, got {other:?}"),
    }
}

#[test]
fn duplicate_triplet_is_a_parse_error() {
    let text = "LPCC1 0 1 0\nc 0\nd 1\n1\nb 0\nq 1\n0\nA 0\nB 0\nN 0\nM 2\n0 0 1\n0 0 2\n";
    match parse_instance(text) {
        Err(ModelError::Parse { line, msg }) => {
            assert_eq!(line, 13);
            assert!(msg.contains("duplicate"));
        }
        other => panic!("expected parse error, got {other:?}"),
    }
}

#[test]
fn wrong_count_is_a_dimension_mismatch() {
    let text = "LPCC1 1 0 0\nc 2\n1\n2\nd 0\nb 0\nq 0\nA 0\nB 0\nN 0\nM 0\n";
    assert!(matches!(
        parse_instance(text),
        Err(ModelError::DimensionMismatch(_))
    ));
}

/// Parses the rows of an LP-format export into `name -> (coeffs, sense, rhs)`.
fn parse_lp_rows(text: &str) -> BTreeMap<String, (BTreeMap<String, f64>, String, f64)> {
    let mut out = BTreeMap::new();
    let mut in_rows = false;
    for line in text.lines() {
        let t = line.trim();
        if t == "Subject To" {
            in_rows = true;
            continue;
        }
        if t == "Bounds" {
            break;
        }
        if !in_rows {
            continue;
        }
        let (name, rest) = t.split_once(':').unwrap();
        let toks: Vec<&str> = rest.split_whitespace().collect();
        let sense_at = toks
            .iter()
            .position(|t| ["<=", ">=", "="].contains(t))
            .unwrap();
        let mut coeffs = BTreeMap::new();
        let mut sign = 1.0;
        let mut i = 0;
        while i < sense_at {
            match toks[i] {
                "+" => sign = 1.0,
                "-" => sign = -1.0,
                num => {
                    let v: f64 = num.parse().unwrap();
                    coeffs.insert(toks[i + 1].to_string(), sign * v);
                    sign = 1.0;
                    i += 1;
                }
            }
            i += 1;
        }
        let rhs: f64 = toks[sense_at + 1].parse().unwrap();
        out.insert(name.to_string(), (coeffs, toks[sense_at].to_string(), rhs));
    }
    out
}

#[test]
fn bigm_rows_with_unit_bounds() {
    let inst = small();
    let text = export_bigm_mip(&inst, &BoundBox::uniform(2, 1.0, 1.0)).unwrap();
    assert!(text.contains(" ybig0: 1 y0 - 1 z0 <= 0"));
    assert!(text.contains(" wbig1: 1 w1 + 1 z1 <= 1"));
    assert!(text.contains("Binary\n z0\n z1\n"));
}

#[test]
fn bigm_export_reparses_to_same_coefficients() {
    let inst = small();
    let bounds = BoundBox::uniform(2, 7.5, 3.25);
    let rows = parse_lp_rows(&export_bigm_mip(&inst, &bounds).unwrap());
    assert_eq!(rows.len(), inst.k + 3 * inst.m);
    let (link, sense, rhs) = &rows["link0"];
    assert_eq!(sense, ">=");
    assert_eq!(*rhs, -4.0);
    assert_eq!(link["x0"], -1.0);
    assert_eq!(link["y1"], -1.0);
    let (wdef, _, q) = &rows["wdef1"];
    assert_eq!(*q, -1.0);
    assert_eq!(wdef["w1"], 1.0);
    assert_eq!(wdef["x0"], -1.0);
    assert_eq!(wdef["y0"], -0.5);
    assert_eq!(wdef["y1"], -1.0);
    let (wbig, _, rhs) = &rows["wbig0"];
    assert_eq!(wbig["z0"], 3.25);
    assert_eq!(*rhs, 3.25);
    assert_eq!(rows["ybig1"].0["z1"], -7.5);
}

#[test]
fn bigm_requires_all_bounds() {
    let inst = small();
    let mut bounds = BoundBox::uniform(2, 1.0, 1.0);
    bounds.u_w[1] = None;
    assert!(matches!(
        export_bigm_mip(&inst, &bounds),
        Err(ModelError::MissingBounds(1))
    ));
}
