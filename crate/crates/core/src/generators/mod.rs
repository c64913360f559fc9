//! Seeded instance families: random LPCCs with a planted complementary point,
//! bilevel programs with a convex quadratic lower level, and inverse QPs.
//!
//! Every generator is a pure function of its config. Sampling happens in a
//! fixed order (documented per generator), so a seed pins the output bytes.

mod rng;

pub use rng::Rng;

use crate::lp::SparseMatrix;
use crate::model::{LpccInstance, LpccPoint};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GenError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), GenError> {
    if ok {
        Ok(())
    } else {
        Err(GenError::InvalidConfig(msg()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomLpccConfig {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub rank_m: usize,
    /// Percentage of nonzeros in the sampled matrices, in `(0, 100]`.
    pub dense: f64,
    pub seed: u64,
}

impl RandomLpccConfig {
    pub fn validate(&self) -> Result<(), GenError> {
        check(self.m > 0, || "m must be positive".into())?;
        check(self.rank_m <= self.m, || {
            format!("rank {} exceeds m = {}", self.rank_m, self.m)
        })?;
        check(self.dense > 0.0 && self.dense <= 100.0, || {
            format!("density {} outside (0, 100]", self.dense)
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BilevelConfig {
    pub dim_v: usize,
    pub dim_x: usize,
    pub dim_b: usize,
    pub dim_g: usize,
    pub rank_q: usize,
    pub seed: u64,
}

impl BilevelConfig {
    pub fn validate(&self) -> Result<(), GenError> {
        check(self.dim_v > 0, || "dim_v must be positive".into())?;
        check(self.dim_x == self.dim_v, || {
            format!("dim_x = {} must equal dim_v = {}", self.dim_x, self.dim_v)
        })?;
        check(self.rank_q <= self.dim_x, || {
            format!("rank {} exceeds dim_x = {}", self.rank_q, self.dim_x)
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InverseQpConfig {
    pub m_tilde: usize,
    pub n_tilde: usize,
    pub seed: u64,
}

impl InverseQpConfig {
    pub fn validate(&self) -> Result<(), GenError> {
        check(self.m_tilde > 0 && self.n_tilde > 0, || {
            "dimensions must be positive".into()
        })
    }
}

/// Row-major `rows × cols` integer matrix; each entry is nonzero-sampled with
/// probability `dense/100`, its value uniform in `lo..=hi`.
fn sparse_ints(rng: &mut Rng, rows: usize, cols: usize, lo: i64, hi: i64, dense: f64) -> Vec<f64> {
    let p = dense / 100.0;
    let mut out = vec![0.0; rows * cols];
    for v in out.iter_mut() {
        if rng.bernoulli(p) {
            *v = rng.int_in(lo, hi) as f64;
        }
    }
    out
}

fn ints(rng: &mut Rng, len: usize, lo: i64, hi: i64) -> Vec<f64> {
    (0..len).map(|_| rng.int_in(lo, hi) as f64).collect()
}

fn dense_mul(a: &[f64], rows: usize, cols: usize, x: &[f64]) -> Vec<f64> {
    (0..rows)
        .map(|r| (0..cols).map(|c| a[r * cols + c] * x[c]).sum())
        .collect()
}

/// Random LPCC with a planted feasible point, returned as the witness.
///
/// Draw order: x̄, ȳ, c, d, A, B, N, L, ΔM (upper triangle incl. diagonal,
/// row-major), Δb, Δq. ȳ is integer on indices below ⌊m/3⌋ and zero after;
/// Δq is zero on indices below 2m/3. `M = LLᵀ + ΔM − ΔMᵀ`, so its symmetric
/// part is `LLᵀ` and has rank at most `rank_m`.
pub fn gen_random_lpcc(cfg: &RandomLpccConfig) -> Result<(LpccInstance, LpccPoint), GenError> {
    cfg.validate()?;
    let (n, m, k, r) = (cfg.n, cfg.m, cfg.k, cfg.rank_m);
    let mut rng = Rng::new(cfg.seed);
    let x_bar = ints(&mut rng, n, 0, 10);
    let y_cut = m / 3;
    let y_bar: Vec<f64> = (0..m)
        .map(|i| {
            if i < y_cut {
                rng.int_in(0, 10) as f64
            } else {
                0.0
            }
        })
        .collect();
    let c = ints(&mut rng, n, 0, 10);
    let d = ints(&mut rng, m, 0, 10);
    let a = sparse_ints(&mut rng, k, n, -5, 6, cfg.dense);
    let b_mat = sparse_ints(&mut rng, k, m, -5, 6, cfg.dense);
    let n_mat = sparse_ints(&mut rng, m, n, -5, 6, cfg.dense);
    let l = sparse_ints(&mut rng, m, r, -5, 6, cfg.dense);
    let mut delta = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            delta[i * m + j] = rng.int_in(-2, 2) as f64;
        }
    }
    let mut m_mat = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            let llt: f64 = (0..r).map(|t| l[i * r + t] * l[j * r + t]).sum();
            m_mat[i * m + j] = llt + delta[i * m + j] - delta[j * m + i];
        }
    }
    let delta_b = ints(&mut rng, k, 1, 11);
    let delta_q: Vec<f64> = (0..m)
        .map(|i| {
            if 3 * i < 2 * m {
                0.0
            } else {
                rng.int_in(1, 11) as f64
            }
        })
        .collect();

    let ax = dense_mul(&a, k, n, &x_bar);
    let by = dense_mul(&b_mat, k, m, &y_bar);
    let b: Vec<f64> = (0..k).map(|i| ax[i] + by[i] - delta_b[i]).collect();
    let nx = dense_mul(&n_mat, m, n, &x_bar);
    let my = dense_mul(&m_mat, m, m, &y_bar);
    let q: Vec<f64> = (0..m).map(|i| -nx[i] - my[i] + delta_q[i]).collect();

    let inst = LpccInstance::new(
        c,
        d,
        b,
        q,
        SparseMatrix::from_dense(k, n, &a),
        SparseMatrix::from_dense(k, m, &b_mat),
        SparseMatrix::from_dense(m, n, &n_mat),
        SparseMatrix::from_dense(m, m, &m_mat),
    )
    .expect("generated dimensions are consistent");
    let witness = LpccPoint::from_xy(&inst, x_bar, y_bar);
    Ok((inst, witness))
}

/// KKT reformulation of a bilevel program whose follower solves
/// `min ½xᵀQx + vᵀx s.t. Hx ≥ g, x ≥ 0`.
///
/// LPCC columns: `x_lpcc = [x | v]`, `y_lpcc = [λ | μ]` with `λ ⊥ x` and
/// `μ ⊥ Hx − g`. Rows: `Ax + Bv ≥ b`, stationarity `Qx + v − Hᵀμ − λ = 0` as
/// two opposite `≥` rows per index, then `−v ≥ −1`.
///
/// Draw order: b, c, d, g, A, B, H (row-major), then the `dim_x × rank_q`
/// factor L of `Q = LLᵀ`. All data uniform on `(0, 1)` except L on `(−1, 1)`.
pub fn gen_bilevel(cfg: &BilevelConfig) -> Result<LpccInstance, GenError> {
    cfg.validate()?;
    let (nv, nx, nb, ng, r) = (cfg.dim_v, cfg.dim_x, cfg.dim_b, cfg.dim_g, cfg.rank_q);
    let mut rng = Rng::new(cfg.seed);
    let unit_vec =
        |len: usize, rng: &mut Rng| -> Vec<f64> { (0..len).map(|_| rng.open(0.0, 1.0)).collect() };
    let b = unit_vec(nb, &mut rng);
    let c = unit_vec(nx, &mut rng);
    let d = unit_vec(nv, &mut rng);
    let g = unit_vec(ng, &mut rng);
    let a = unit_vec(nb * nx, &mut rng);
    let bm = unit_vec(nb * nv, &mut rng);
    let h = unit_vec(ng * nx, &mut rng);
    let l: Vec<f64> = (0..nx * r).map(|_| rng.open(-1.0, 1.0)).collect();
    let q_at = |i: usize, j: usize| -> f64 { (0..r).map(|t| l[i * r + t] * l[j * r + t]).sum() };

    let n = nx + nv;
    let m = nx + ng;
    let k = nb + 3 * nv;
    let mut ta = Vec::new();
    let mut tb = Vec::new();
    let mut rhs = Vec::with_capacity(k);
    for row in 0..nb {
        for j in 0..nx {
            ta.push((row, j, a[row * nx + j]));
        }
        for j in 0..nv {
            ta.push((row, nx + j, bm[row * nv + j]));
        }
        rhs.push(b[row]);
    }
    for i in 0..nx {
        for sign in [1.0, -1.0] {
            let row = rhs.len();
            for j in 0..nx {
                let qij = q_at(i, j);
                if qij != 0.0 {
                    ta.push((row, j, sign * qij));
                }
            }
            ta.push((row, nx + i, sign));
            tb.push((row, i, -sign));
            for l in 0..ng {
                tb.push((row, nx + l, -sign * h[l * nx + i]));
            }
            rhs.push(0.0);
        }
    }
    for j in 0..nv {
        let row = rhs.len();
        ta.push((row, nx + j, -1.0));
        rhs.push(-1.0);
    }
    let mut tn = Vec::new();
    let mut q = vec![0.0; m];
    for i in 0..nx {
        tn.push((i, i, 1.0));
    }
    for l in 0..ng {
        for j in 0..nx {
            tn.push((nx + l, j, h[l * nx + j]));
        }
        q[nx + l] = -g[l];
    }
    let mut obj_x = c;
    obj_x.extend(d);
    let inst = LpccInstance::new(
        obj_x,
        vec![0.0; m],
        rhs,
        q,
        SparseMatrix::from_triplets(k, n, ta).expect("bilevel A block"),
        SparseMatrix::from_triplets(k, m, tb).expect("bilevel B block"),
        SparseMatrix::from_triplets(m, n, tn).expect("bilevel N block"),
        SparseMatrix::zeros(m, m),
    )
    .expect("generated dimensions are consistent");
    Ok(inst)
}

/// LPCC form of an inverse convex QP with an ℓ1 objective, plus its planted
/// feasible point.
///
/// The free variables x, b, c live in boxes `[−u, u]`, so they are shifted by
/// `+u` to become nonnegative LPCC columns. Columns: `[x′ | b′ | c′ | zˣ | zᵇ |
/// zᶜ]`, complementary pair `λ ⊥ Ax − b`.
///
/// Draw order: the factor F of `Q = FFᵀ` row by row (diagonal on `(0.5, 1)`,
/// then up to two distinct off-diagonal columns with values on `(0, 1)`), A
/// row-major with density `min(1, 10/ñ)` and values on `(0, 1)`, x̃ ~ N(0,1),
/// λ̂ and ŵ on `(0, 10)`, the mask v ~ Bernoulli(½), then the N(0,1)
/// perturbations of x̃, b̃, c̃.
pub fn gen_inverse_qp(cfg: &InverseQpConfig) -> Result<(LpccInstance, LpccPoint), GenError> {
    cfg.validate()?;
    let (mt, nt) = (cfg.m_tilde, cfg.n_tilde);
    let mut rng = Rng::new(cfg.seed);

    let mut f = vec![0.0; nt * nt];
    for i in 0..nt {
        f[i * nt + i] = rng.open(0.5, 1.0);
        let mut picked = Vec::new();
        while picked.len() < 2.min(nt - 1) {
            let j = rng.index(nt);
            if j != i && !picked.contains(&j) {
                picked.push(j);
            }
        }
        for j in picked {
            f[i * nt + j] = rng.open(0.0, 1.0);
        }
    }
    let mut qm = vec![0.0; nt * nt];
    for i in 0..nt {
        for j in 0..nt {
            qm[i * nt + j] = (0..nt).map(|t| f[i * nt + t] * f[j * nt + t]).sum();
        }
    }
    let p = (10.0 / nt as f64).min(1.0);
    let mut am = vec![0.0; mt * nt];
    for v in am.iter_mut() {
        if rng.bernoulli(p) {
            *v = rng.open(0.0, 1.0);
        }
    }
    let x_t: Vec<f64> = (0..nt).map(|_| rng.normal()).collect();
    let lam_hat: Vec<f64> = (0..mt).map(|_| rng.open(0.0, 10.0)).collect();
    let w_hat: Vec<f64> = (0..mt).map(|_| rng.open(0.0, 10.0)).collect();
    let mask: Vec<bool> = (0..mt).map(|_| rng.bernoulli(0.5)).collect();
    let lam_t: Vec<f64> = (0..mt)
        .map(|i| if mask[i] { lam_hat[i] } else { 0.0 })
        .collect();
    let w_t: Vec<f64> = (0..mt)
        .map(|i| if mask[i] { 0.0 } else { w_hat[i] })
        .collect();
    let ax = dense_mul(&am, mt, nt, &x_t);
    let b_t: Vec<f64> = (0..mt).map(|i| ax[i] - w_t[i]).collect();
    let qx = dense_mul(&qm, nt, nt, &x_t);
    let c_t: Vec<f64> = (0..nt)
        .map(|j| (0..mt).map(|i| am[i * nt + j] * lam_t[i]).sum::<f64>() - qx[j])
        .collect();
    let x_bar: Vec<f64> = x_t.iter().map(|v| v + rng.normal()).collect();
    let b_bar: Vec<f64> = b_t.iter().map(|v| v + rng.normal()).collect();
    let c_bar: Vec<f64> = c_t.iter().map(|v| v + rng.normal()).collect();

    let max_abs = |v: &[f64]| 10.0 * v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let (ux, ub, uc, ul) = (max_abs(&x_t), max_abs(&b_t), max_abs(&c_t), max_abs(&lam_t));

    // column offsets
    let ox = 0;
    let ob = nt;
    let oc = nt + mt;
    let ozx = 2 * nt + mt;
    let ozb = 3 * nt + mt;
    let ozc = 3 * nt + 2 * mt;
    let n = 4 * nt + 2 * mt;
    let m = mt;

    let mut ta = Vec::new();
    let mut tb = Vec::new();
    let mut rhs = Vec::new();
    // Qx + c − Aᵀλ = 0 in shifted columns: Qx′ + c′ − Aᵀλ = Q·ux·1 + uc·1
    for j in 0..nt {
        let shift: f64 = (0..nt).map(|t| qm[j * nt + t]).sum::<f64>() * ux + uc;
        for sign in [1.0, -1.0] {
            let row = rhs.len();
            for t in 0..nt {
                if qm[j * nt + t] != 0.0 {
                    ta.push((row, ox + t, sign * qm[j * nt + t]));
                }
            }
            ta.push((row, oc + j, sign));
            for i in 0..mt {
                if am[i * nt + j] != 0.0 {
                    tb.push((row, i, -sign * am[i * nt + j]));
                }
            }
            rhs.push(sign * shift);
        }
    }
    // |v − v̄| ≤ z as two rows per component
    for (off, zoff, bar, u) in [
        (ox, ozx, &x_bar, ux),
        (ob, ozb, &b_bar, ub),
        (oc, ozc, &c_bar, uc),
    ] {
        for (j, &vb) in bar.iter().enumerate() {
            let row = rhs.len();
            ta.push((row, off + j, 1.0));
            ta.push((row, zoff + j, 1.0));
            rhs.push(vb + u);
            let row = rhs.len();
            ta.push((row, off + j, -1.0));
            ta.push((row, zoff + j, 1.0));
            rhs.push(-vb - u);
        }
    }
    // upper ends of the boxes on the shifted variables
    for (off, len, u) in [(ox, nt, ux), (ob, mt, ub), (oc, nt, uc)] {
        for j in 0..len {
            let row = rhs.len();
            ta.push((row, off + j, -1.0));
            rhs.push(-2.0 * u);
        }
    }
    for i in 0..mt {
        let row = rhs.len();
        tb.push((row, i, -1.0));
        rhs.push(-ul);
    }
    let k = rhs.len();

    // w = Ax − b = Ax′ − b′ + (ub − ux·Σ_j A_ij)
    let mut tn = Vec::new();
    let mut q = vec![0.0; m];
    for i in 0..mt {
        let mut rowsum = 0.0;
        for j in 0..nt {
            let v = am[i * nt + j];
            if v != 0.0 {
                tn.push((i, ox + j, v));
                rowsum += v;
            }
        }
        tn.push((i, ob + i, -1.0));
        q[i] = ub - ux * rowsum;
    }
    let mut obj = vec![0.0; n];
    for v in obj.iter_mut().skip(ozx) {
        *v = 1.0;
    }
    let inst = LpccInstance::new(
        obj,
        vec![0.0; m],
        rhs,
        q,
        SparseMatrix::from_triplets(k, n, ta).expect("inverse-QP A block"),
        SparseMatrix::from_triplets(k, m, tb).expect("inverse-QP B block"),
        SparseMatrix::from_triplets(m, n, tn).expect("inverse-QP N block"),
        SparseMatrix::zeros(m, m),
    )
    .expect("generated dimensions are consistent");

    let mut x = vec![0.0; n];
    for j in 0..nt {
        x[ox + j] = x_t[j] + ux;
        x[oc + j] = c_t[j] + uc;
        x[ozx + j] = (x_t[j] - x_bar[j]).abs();
        x[ozc + j] = (c_t[j] - c_bar[j]).abs();
    }
    for i in 0..mt {
        x[ob + i] = b_t[i] + ub;
        x[ozb + i] = (b_t[i] - b_bar[i]).abs();
    }
    let witness = LpccPoint::from_xy(&inst, x, lam_t);
    Ok((inst, witness))
}

#[cfg(test)]
mod tests;
