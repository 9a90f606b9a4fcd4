//! Small dense semidefinite programs over complex Hermitian blocks.
//!
//! Dual form: maximize `bᵀy` subject to `S = C − Σ_i y_i A_i ⪰ 0`.
//! Primal form: minimize `⟨C, X⟩` subject to `⟨A_i, X⟩ = b_i`, `X ⪰ 0`,
//! with `⟨A, X⟩ = Re tr(A X)`.
//!
//! The solver is an infeasible primal-dual path-following method using the
//! HKM search direction and a Mehrotra predictor-corrector step. Everything is
//! dense and sequential; iteration order is fixed, so results are
//! reproducible bit for bit.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::decomp::{cholesky, herm_eig_unchecked, hpd_inverse, lower_triangular_inverse};
use crate::linalg::{CMatrix, C64};

/// One coefficient of a sparse Hermitian constraint matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: C64,
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    block_dims: Vec<usize>,
    c: Vec<CMatrix>,
    constraints: Vec<Vec<Entry>>,
    b: Vec<f64>,
}

impl SdpProblem {
    /// Validates shapes and Hermiticity (within 1e-12) and merges duplicate
    /// entries of each constraint.
    pub fn new(
        block_dims: Vec<usize>,
        c: Vec<CMatrix>,
        constraints: Vec<Vec<Entry>>,
        b: Vec<f64>,
    ) -> Result<Self> {
        if c.len() != block_dims.len() {
            return Err(Error::Shape("one C block per block dimension".into()));
        }
        for (blk, (cm, &n)) in c.iter().zip(&block_dims).enumerate() {
            if cm.shape() != (n, n) {
                return Err(Error::Shape(format!("C block {blk} must be {n}x{n}")));
            }
            let scale = cm.frobenius_norm().max(1.0);
            if cm.hermitian_residual() > 1e-12 * scale {
                return Err(Error::NotHermitian {
                    residual: cm.hermitian_residual(),
                });
            }
        }
        if constraints.len() != b.len() {
            return Err(Error::Shape("one right-hand side per constraint".into()));
        }
        let mut merged = Vec::with_capacity(constraints.len());
        for entries in constraints {
            let mut acc: BTreeMap<(usize, usize, usize), C64> = BTreeMap::new();
            for e in entries {
                let n = *block_dims
                    .get(e.block)
                    .ok_or_else(|| Error::Shape(format!("block {} out of range", e.block)))?;
                if e.row >= n || e.col >= n {
                    return Err(Error::Shape("constraint entry outside its block".into()));
                }
                *acc.entry((e.block, e.row, e.col)).or_insert(C64::new(0.0, 0.0)) += e.value;
            }
            let scale = acc.values().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
            for (&(blk, r, c), &v) in &acc {
                let mirror = acc.get(&(blk, c, r)).copied().unwrap_or(C64::new(0.0, 0.0));
                let residual = (v - mirror.conj()).norm();
                if residual > 1e-12 * scale {
                    return Err(Error::NotHermitian { residual });
                }
            }
            merged.push(
                acc.into_iter()
                    .filter(|(_, v)| *v != C64::new(0.0, 0.0))
                    .map(|((block, row, col), value)| Entry {
                        block,
                        row,
                        col,
                        value,
                    })
                    .collect(),
            );
        }
        Ok(Self {
            block_dims,
            c,
            constraints: merged,
            b,
        })
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn num_constraints(&self) -> usize {
        self.b.len()
    }

    /// `Σ_i y_i A_i` as dense blocks.
    pub fn apply_adjoint(&self, y: &[f64]) -> Vec<CMatrix> {
        let mut out: Vec<CMatrix> = self.block_dims.iter().map(|&n| CMatrix::zeros(n, n)).collect();
        for (entries, &yi) in self.constraints.iter().zip(y) {
            if yi == 0.0 {
                continue;
            }
            for e in entries {
                out[e.block][(e.row, e.col)] += e.value * yi;
            }
        }
        out
    }

    /// `Re tr(A_i Z)` for a dense block-diagonal `Z`.
    fn constraint_inner(&self, i: usize, z: &[CMatrix]) -> f64 {
        self.constraints[i]
            .iter()
            .map(|e| {
                let t = e.value * z[e.block][(e.col, e.row)];
                t.re
            })
            .sum()
    }

    fn apply_forward(&self, z: &[CMatrix]) -> Vec<f64> {
        (0..self.num_constraints())
            .map(|i| self.constraint_inner(i, z))
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SdpSettings {
    /// Target for relative gap and relative infeasibilities.
    pub tol: f64,
    pub max_iterations: usize,
    /// Fraction of the distance to the boundary taken per step.
    pub step_fraction: f64,
}

impl Default for SdpSettings {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iterations: 100,
            step_fraction: 0.95,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub x: Vec<CMatrix>,
    pub y: Vec<f64>,
    pub s: Vec<CMatrix>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub iterations: usize,
    pub relative_gap: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
}

fn block_inner(a: &[CMatrix], b: &[CMatrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.re_inner(y)).sum()
}

fn frob(blocks: &[CMatrix]) -> f64 {
    blocks
        .iter()
        .map(|m| m.frobenius_norm().powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Largest `α` with `X + α ΔX ⪰ 0`, given `X ≻ 0`.
fn max_step(x: &CMatrix, dx: &CMatrix) -> f64 {
    let l = match cholesky(x) {
        Ok(l) => l,
        Err(_) => return 0.0,
    };
    let li = lower_triangular_inverse(&l);
    let w = (&(&li * dx) * &li.adjoint()).hermitian_part();
    let lmin = herm_eig_unchecked(&w, w.rows()).min();
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

fn real_cholesky(m: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = m[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let djj = d.sqrt();
        l[j * n + j] = djj;
        for i in j + 1..n {
            let mut s = m[i * n + j];
            let (ri, rj) = (&l[i * n..i * n + j], &l[j * n..j * n + j]);
            for k in 0..j {
                s -= ri[k] * rj[k];
            }
            l[i * n + j] = s / djj;
        }
    }
    Some(l)
}

fn real_cholesky_solve(l: &[f64], n: usize, rhs: &[f64]) -> Vec<f64> {
    let mut z = rhs.to_vec();
    for i in 0..n {
        let mut s = z[i];
        for k in 0..i {
            s -= l[i * n + k] * z[k];
        }
        z[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = z[i];
        for k in i + 1..n {
            s -= l[k * n + i] * z[k];
        }
        z[i] = s / l[i * n + i];
    }
    z
}

struct Direction {
    dx: Vec<CMatrix>,
    dy: Vec<f64>,
    ds: Vec<CMatrix>,
}

pub fn solve(problem: &SdpProblem, settings: &SdpSettings) -> Result<SdpSolution> {
    let m = problem.num_constraints();
    let nblocks = problem.block_dims.len();
    let total_dim: usize = problem.block_dims.iter().sum();
    let b_norm = problem.b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let c_norm = frob(&problem.c);

    let a_norms: Vec<f64> = problem
        .constraints
        .iter()
        .map(|es| es.iter().map(|e| e.value.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let sqrt_n = (total_dim as f64).sqrt();
    let mut xi = 10.0f64.max(sqrt_n);
    for (bi, an) in problem.b.iter().zip(&a_norms) {
        xi = xi.max(sqrt_n * (1.0 + bi.abs()) / (1.0 + an));
    }
    let mut eta = 10.0f64.max(sqrt_n).max(c_norm);
    for an in &a_norms {
        eta = eta.max(*an);
    }

    let mut x: Vec<CMatrix> = problem
        .block_dims
        .iter()
        .map(|&n| CMatrix::identity(n).scale_real(xi))
        .collect();
    let mut s: Vec<CMatrix> = problem
        .block_dims
        .iter()
        .map(|&n| CMatrix::identity(n).scale_real(eta))
        .collect();
    let mut y = vec![0.0; m];

    let mut last = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    for iter in 0..settings.max_iterations {
        // residuals
        let ax = problem.apply_forward(&x);
        let rp: Vec<f64> = problem.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let aty = problem.apply_adjoint(&y);
        let rd: Vec<CMatrix> = (0..nblocks)
            .map(|k| &(&problem.c[k] - &s[k]) - &aty[k])
            .collect();
        let pobj = block_inner(&problem.c, &x);
        let dobj: f64 = problem.b.iter().zip(&y).map(|(b, y)| b * y).sum();
        let pinf = rp.iter().map(|v| v * v).sum::<f64>().sqrt() / (1.0 + b_norm);
        let dinf = frob(&rd) / (1.0 + c_norm);
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let mu = block_inner(&x, &s) / total_dim as f64;
        let compl = mu * total_dim as f64 / (1.0 + pobj.abs() + dobj.abs());
        last = (gap.max(compl), pinf, dinf);
        if gap <= settings.tol && compl <= settings.tol && pinf <= settings.tol && dinf <= settings.tol {
            return Ok(SdpSolution {
                x,
                y,
                s,
                primal_objective: pobj,
                dual_objective: dobj,
                iterations: iter,
                relative_gap: gap,
                primal_infeasibility: pinf,
                dual_infeasibility: dinf,
            });
        }

        let s_inv: Vec<CMatrix> = match s.iter().map(hpd_inverse).collect::<Result<Vec<_>>>() {
            Ok(v) => v,
            Err(_) => break,
        };

        // Schur complement M_ij = Re tr(A_i X A_j S⁻¹), assembled row by row
        // from T_i = S⁻¹ A_i X.
        let mut schur = vec![0.0; m * m];
        let mut t_blocks: Vec<Option<CMatrix>> = vec![None; nblocks];
        for i in 0..m {
            for t in t_blocks.iter_mut() {
                *t = None;
            }
            for e in &problem.constraints[i] {
                let n = problem.block_dims[e.block];
                let t = t_blocks[e.block].get_or_insert_with(|| CMatrix::zeros(n, n));
                let sinv = &s_inv[e.block];
                let xb = &x[e.block];
                for p in 0..n {
                    let f = sinv[(p, e.row)] * e.value;
                    if f == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for q in 0..n {
                        t[(p, q)] += f * xb[(e.col, q)];
                    }
                }
            }
            for j in i..m {
                let mut acc = 0.0;
                for e in &problem.constraints[j] {
                    if let Some(t) = &t_blocks[e.block] {
                        acc += (e.value * t[(e.col, e.row)]).re;
                    }
                }
                schur[i * m + j] = acc;
                schur[j * m + i] = acc;
            }
        }
        let chol = match real_cholesky(&schur, m) {
            Some(l) => l,
            None => {
                // tiny diagonal regularization before giving up
                let reg = 1e-14 * (0..m).map(|k| schur[k * m + k]).fold(0.0, f64::max);
                for k in 0..m {
                    schur[k * m + k] += reg;
                }
                match real_cholesky(&schur, m) {
                    Some(l) => l,
                    None => break,
                }
            }
        };

        let x_rd_sinv: Vec<CMatrix> = (0..nblocks).map(|k| &(&x[k] * &rd[k]) * &s_inv[k]).collect();

        let direction = |sigma_mu: f64, corr: Option<&Vec<CMatrix>>| -> Direction {
            // G = σμ S⁻¹ − X Rd S⁻¹ − corr
            let g: Vec<CMatrix> = (0..nblocks)
                .map(|k| {
                    let mut gk = &s_inv[k].scale_real(sigma_mu) - &x_rd_sinv[k];
                    if let Some(c) = corr {
                        gk = &gk - &c[k];
                    }
                    gk
                })
                .collect();
            let h: Vec<f64> = (0..m)
                .map(|i| problem.b[i] - problem.constraint_inner(i, &g))
                .collect();
            let dy = real_cholesky_solve(&chol, m, &h);
            let ady = problem.apply_adjoint(&dy);
            let ds: Vec<CMatrix> = (0..nblocks).map(|k| &rd[k] - &ady[k]).collect();
            let dx: Vec<CMatrix> = (0..nblocks)
                .map(|k| {
                    // ΔX = σμS⁻¹ − X − X ΔS S⁻¹ − corr
                    let mut t = &g[k] + &x_rd_sinv[k];
                    t = &t - &x[k];
                    t = &t - &(&(&x[k] * &ds[k]) * &s_inv[k]);
                    t.hermitian_part()
                })
                .collect();
            Direction { dx, dy, ds }
        };

        let steps = |d: &Direction| -> (f64, f64) {
            let ap = (0..nblocks)
                .map(|k| max_step(&x[k], &d.dx[k]))
                .fold(f64::INFINITY, f64::min);
            let ad = (0..nblocks)
                .map(|k| max_step(&s[k], &d.ds[k]))
                .fold(f64::INFINITY, f64::min);
            (ap.min(1.0), ad.min(1.0))
        };

        // predictor
        let pred = direction(0.0, None);
        let (ap, ad) = steps(&pred);
        let mu_aff = (0..nblocks)
            .map(|k| {
                let xa = &x[k] + &pred.dx[k].scale_real(ap);
                let sa = &s[k] + &pred.ds[k].scale_real(ad);
                xa.re_inner(&sa)
            })
            .sum::<f64>()
            / total_dim as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector
        let corr: Vec<CMatrix> = (0..nblocks)
            .map(|k| &(&pred.dx[k] * &pred.ds[k]) * &s_inv[k])
            .collect();
        let dir = direction(sigma * mu, Some(&corr));
        let (ap, ad) = steps(&dir);
        let ap = (settings.step_fraction * ap).min(1.0);
        let ad = (settings.step_fraction * ad).min(1.0);
        for k in 0..nblocks {
            x[k] = (&x[k] + &dir.dx[k].scale_real(ap)).hermitian_part();
            s[k] = (&s[k] + &dir.ds[k].scale_real(ad)).hermitian_part();
        }
        for (yi, dyi) in y.iter_mut().zip(&dir.dy) {
            *yi += ad * dyi;
        }
    }
    Err(Error::SolverFailed {
        iterations: settings.max_iterations,
        gap: last.0,
        primal_infeasibility: last.1,
        dual_infeasibility: last.2,
    })
}
