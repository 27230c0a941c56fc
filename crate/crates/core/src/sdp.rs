//! Small dense complex semidefinite programs in standard form
//!
//! ```text
//! minimize ⟨C, X⟩  s.t.  ⟨A_i, X⟩ = b_i,  X ⪰ 0
//! maximize b·y     s.t.  S = C − Σ y_i A_i ⪰ 0
//! ```
//!
//! solved with the HKM primal-dual interior-point method and a
//! Mehrotra predictor-corrector step.

use nalgebra::{DMatrix, DVector};

use crate::operator::{c64, eigh_herm, herm, inner, CMat};

/// Real coordinates of a Hermitian matrix: diagonal, then `√2·Re` and
/// `√2·Im` of the strict upper triangle. Isometric for the trace inner product.
pub fn hvec(h: &CMat) -> Vec<f64> {
    let w = h.nrows();
    let mut out = Vec::with_capacity(w * w);
    out.extend((0..w).map(|i| h[(i, i)].re));
    let s2 = std::f64::consts::SQRT_2;
    let upper: Vec<_> = (0..w).flat_map(|i| (i + 1..w).map(move |j| (i, j))).collect();
    out.extend(upper.iter().map(|&(i, j)| s2 * h[(i, j)].re));
    out.extend(upper.iter().map(|&(i, j)| s2 * h[(i, j)].im));
    out
}

/// Inverse of [`hvec`] for a `w × w` matrix.
pub fn hmat(v: &[f64], w: usize) -> CMat {
    assert_eq!(v.len(), w * w, "hmat: expected {} coordinates", w * w);
    let mut h = CMat::zeros(w, w);
    for i in 0..w {
        h[(i, i)] = c64(v[i], 0.0);
    }
    let k = w * (w - 1) / 2;
    let s2 = std::f64::consts::SQRT_2;
    let mut idx = 0;
    for i in 0..w {
        for j in i + 1..w {
            let z = c64(v[w + idx], v[w + k + idx]) / s2;
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            idx += 1;
        }
    }
    h
}

#[derive(Clone, Debug)]
pub struct SdpProblem {
    pub c: CMat,
    pub a: Vec<CMat>,
    pub b: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct SdpConfig {
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for SdpConfig {
    fn default() -> Self {
        Self { tol: 1e-9, max_iterations: 100 }
    }
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub x: CMat,
    pub y: Vec<f64>,
    pub s: CMat,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub gap: f64,
    pub iterations: usize,
    /// All three measures fell below the tolerance.
    pub converged: bool,
}

impl SdpSolution {
    pub fn error(&self) -> f64 {
        self.primal_infeasibility.max(self.dual_infeasibility).max(self.gap)
    }
}

fn cholesky(m: &CMat) -> Option<CMat> {
    m.clone().cholesky().map(|c| c.l())
}

/// Largest `α ≤ 1` keeping `X + α dX` positive semidefinite.
fn max_step(l: &CMat, dx: &CMat) -> f64 {
    let li = match l.clone().try_inverse() {
        Some(v) => v,
        None => return 0.0,
    };
    let m = herm(&(&li * dx * li.adjoint()));
    let lmin = eigh_herm(&m).values[0];
    if lmin >= 0.0 {
        1.0
    } else {
        (-1.0 / lmin).min(1.0)
    }
}

fn solve_schur(m: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    if let Some(sol) = m.clone().lu().solve(rhs) {
        if sol.iter().all(|v| v.is_finite()) {
            return sol;
        }
    }
    let Some(svd) = m.clone().try_svd(true, true, f64::EPSILON, 10_000) else {
        return DVector::zeros(rhs.len());
    };
    let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    svd.solve(rhs, 1e-15 * top).unwrap_or_else(|_| DVector::zeros(rhs.len()))
}

pub fn solve(p: &SdpProblem, cfg: &SdpConfig) -> SdpSolution {
    let d = p.c.nrows();
    let m = p.a.len();
    let a_op = |x: &CMat| DVector::from_iterator(m, p.a.iter().map(|a| inner(a, x)));
    let a_adj = |y: &DVector<f64>| {
        let mut out = CMat::zeros(d, d);
        for (yi, a) in y.iter().zip(&p.a) {
            out += a.scale(*yi);
        }
        out
    };
    let b = DVector::from_column_slice(&p.b);
    let nb = b.norm();
    let nc = p.c.norm();

    let mut x = CMat::identity(d, d);
    let mut s = CMat::identity(d, d).scale(1.0 + nc);
    let mut y = DVector::<f64>::zeros(m);
    let mut best: Option<SdpSolution> = None;

    for it in 0..=cfg.max_iterations {
        let rp = &b - a_op(&x);
        let rd = &p.c - &s - a_adj(&y);
        let mu = inner(&x, &s) / d as f64;
        let pobj = inner(&p.c, &x);
        let dobj = b.dot(&y);
        let sol = SdpSolution {
            x: x.clone(),
            y: y.iter().copied().collect(),
            s: s.clone(),
            primal_objective: pobj,
            dual_objective: dobj,
            primal_infeasibility: rp.norm() / (1.0 + nb),
            dual_infeasibility: rd.norm() / (1.0 + nc),
            gap: (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs()),
            iterations: it,
            converged: false,
        };
        let err = sol.error();
        if best.as_ref().is_none_or(|bst| err < bst.error()) {
            best = Some(sol);
        }
        if err < cfg.tol || it == cfg.max_iterations {
            break;
        }
        let (lx, ls) = match (cholesky(&x), cholesky(&s)) {
            (Some(a), Some(b)) => (a, b),
            _ => break,
        };
        let si = match s.clone().try_inverse() {
            Some(v) => herm(&v),
            None => break,
        };
        // Schur complement M_ij = Re Tr(A_i X A_j S⁻¹).
        let xa: Vec<CMat> = p.a.iter().map(|a| &x * a * &si).collect();
        let mut schur = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = crate::operator::tr_prod(&p.a[i], &xa[j]).re;
                schur[(i, j)] = v;
                schur[(j, i)] = v;
            }
        }
        if schur.iter().any(|v| !v.is_finite()) {
            break;
        }
        let direction = |sigma: f64, corr: Option<&CMat>| {
            let mut r = CMat::identity(d, d).scale(sigma * mu) * &si - &x - &x * &rd * &si;
            if let Some(c) = corr {
                r -= c;
            }
            let rhs = &rp - a_op(&r);
            let dy = solve_schur(&schur, &rhs);
            let ds = &rd - a_adj(&dy);
            let dx = herm(&(&r - &x * &ds * &si));
            (dx, dy, ds)
        };
        let (dx, _, ds) = direction(0.0, None);
        let ap = max_step(&lx, &dx);
        let ad = max_step(&ls, &ds);
        let mu_aff = inner(&(&x + dx.scale(ap)), &(&s + ds.scale(ad))) / d as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
        let corr = &dx * &ds * &si;
        let (dx, dy, ds) = direction(sigma, Some(&corr));
        let ap = (0.95 * max_step(&lx, &dx)).min(1.0);
        let ad = (0.95 * max_step(&ls, &ds)).min(1.0);
        if !(ap > 0.0 && ad > 0.0) {
            break;
        }
        x = herm(&(&x + dx.scale(ap)));
        y += dy.scale(ad);
        s = herm(&(&s + ds.scale(ad)));
    }
    let mut out = best.expect("at least one iterate");
    out.converged = out.error() < cfg.tol;
    out
}
