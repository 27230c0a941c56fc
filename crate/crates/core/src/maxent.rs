//! Maximum-entropy reconstruction from marginals, the regularized path
//! `ρ(p) = p·I/D + (1−p)·ρ_V`, and the thermal Hamiltonian it exposes.
//!
//! The entropy maximizer with prescribed `K`-marginals has the form
//! `exp(Σ θ_k B_k)` over the local basis. We minimize the convex dual
//! `log Tr exp(A(θ)) − Σ θ_k t_k` with damped Newton steps; the Hessian is
//! the Kubo–Mori covariance, assembled in the eigenbasis of `A(θ)` from
//! divided differences of `exp`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operator::{eigh_herm, entropy_of_spectrum, inner, CMat, DensityMatrix, Eigh, Subspace};
use crate::pattern::{rdm_vector, rdm_vector_of, LocalBasis, LocalHamiltonian, MarginalVector, Pattern};

#[derive(Clone, Debug)]
pub struct MaxEntConfig {
    /// Largest per-subset trace-norm residual accepted.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for MaxEntConfig {
    fn default() -> Self {
        Self { tol: 1e-10, max_iterations: 200 }
    }
}

#[derive(Clone, Debug)]
pub struct MaxEntSolution {
    pub state: DensityMatrix,
    /// Coefficients over the local basis, identity first; `state = exp(Σ θ_k B_k)`.
    pub theta: Vec<f64>,
    /// `Ã = log state` as a local operator (traceless terms plus offset).
    pub dual: LocalHamiltonian,
    pub residual: f64,
    pub iterations: usize,
    pub entropy: f64,
}

impl MaxEntSolution {
    /// `−log state`, the thermal Hamiltonian at unit temperature.
    pub fn hamiltonian(&self) -> LocalHamiltonian {
        self.dual.scale(-1.0)
    }
}

struct DualPoint {
    value: f64,
    eig: Eigh,
    /// Gibbs weights in the eigenbasis.
    p: Vec<f64>,
    /// `log Tr exp(A)`.
    log_z: f64,
}

fn dual_point(basis: &LocalBasis, theta: &[f64], t: &[f64]) -> DualPoint {
    let mut a = basis.combine(&{
        let mut th = theta.to_vec();
        th[0] = 0.0;
        th
    });
    a = crate::operator::herm(&a);
    let eig = eigh_herm(&a);
    let wmax = eig.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ex: Vec<f64> = eig.values.iter().map(|w| (w - wmax).exp()).collect();
    let zs: f64 = ex.iter().sum();
    let log_z = wmax + zs.ln();
    let p = ex.iter().map(|e| e / zs).collect();
    let lin: f64 = theta.iter().zip(t).skip(1).map(|(a, b)| a * b).sum();
    DualPoint { value: log_z - lin, eig, p, log_z }
}

fn gibbs(pt: &DualPoint) -> CMat {
    let mut scaled = pt.eig.vectors.clone();
    for (k, p) in pt.p.iter().enumerate() {
        scaled.column_mut(k).scale_mut(*p);
    }
    crate::operator::herm(&(&scaled * pt.eig.vectors.adjoint()))
}

/// Divided differences of `exp` scaled by the partition function.
fn kubo_mori_weights(w: &[f64], p: &[f64]) -> DMatrix<f64> {
    let d = w.len();
    DMatrix::from_fn(d, d, |i, j| {
        let (hi, lo) = if w[i] >= w[j] { (i, j) } else { (j, i) };
        let delta = w[lo] - w[hi];
        if delta.abs() < 1e-12 {
            p[hi]
        } else {
            p[hi] * delta.exp_m1() / delta
        }
    })
}

/// Entropy maximizer among states with the given marginals, optionally
/// warm-started from a previous exponent.
pub fn maxent_solve(
    targets: &MarginalVector,
    cfg: &MaxEntConfig,
    warm: Option<&LocalHamiltonian>,
) -> Result<MaxEntSolution> {
    let basis = LocalBasis::new(targets.pattern());
    let theta = match warm {
        Some(h) => {
            if h.shape() != targets.pattern().shape() {
                return Err(Error::PatternMismatch("warm start acts on a different system".into()));
            }
            Some(basis.coefficients(&h.assemble_matrix()))
        }
        None => None,
    };
    maxent_solve_in(targets, &basis, theta.as_deref(), cfg)
}

/// As [`maxent_solve`] with a prebuilt basis; `warm` gives coefficients over
/// it (the identity coefficient is ignored).
pub fn maxent_solve_in(
    targets: &MarginalVector,
    basis: &LocalBasis,
    warm: Option<&[f64]>,
    cfg: &MaxEntConfig,
) -> Result<MaxEntSolution> {
    if targets.pattern() != basis.pattern() {
        return Err(Error::PatternMismatch("targets and basis use different patterns".into()));
    }
    let m = basis.len();
    let t = basis.expectations(targets);
    let mut theta = match warm {
        Some(w) if w.len() == m => w.to_vec(),
        Some(w) => return Err(Error::DimensionMismatch { expected: m, found: w.len() }),
        None => vec![0.0; m],
    };
    let shape = basis.pattern().shape().clone();
    let mut cur = dual_point(basis, &theta, &t);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for it in 0..=cfg.max_iterations {
        let sigma = gibbs(&cur);
        let marg = rdm_vector_of(&sigma, basis.pattern())?;
        let residual = marg.trace_norm_diff(targets);
        if best.as_ref().is_none_or(|(r, _)| residual < *r) {
            best = Some((residual, theta.clone()));
        }
        if residual <= cfg.tol || it == cfg.max_iterations {
            if residual > cfg.tol {
                break;
            }
            let mut th = theta.clone();
            th[0] = -cur.log_z;
            let entropy = entropy_of_spectrum(&cur.p);
            let state = DensityMatrix::new(shape.clone(), sigma)?;
            let dual = basis.hamiltonian(&th);
            return Ok(MaxEntSolution { state, theta: th, dual, residual, iterations: it, entropy });
        }
        // Gradient and Kubo–Mori Hessian over the non-identity coordinates.
        let mean: Vec<f64> = basis.elements()[1..].iter().map(|e| inner(&sigma, &e.full)).collect();
        let g: Vec<f64> = mean.iter().zip(&t[1..]).map(|(a, b)| a - b).collect();
        let u = &cur.eig.vectors;
        let ud = u.adjoint();
        let weights = kubo_mori_weights(&cur.eig.values, &cur.p);
        let sq = weights.map(f64::sqrt);
        let d = u.nrows();
        let n = m - 1;
        let mut f = DMatrix::<f64>::zeros(n, 2 * d * d);
        for (k, e) in basis.elements()[1..].iter().enumerate() {
            let bt = &ud * &e.full * u;
            for i in 0..d {
                for j in 0..d {
                    let z = bt[(i, j)] * sq[(i, j)];
                    f[(k, 2 * (i * d + j))] = z.re;
                    f[(k, 2 * (i * d + j) + 1)] = z.im;
                }
            }
        }
        let mut h = &f * f.transpose();
        for a in 0..n {
            for b in 0..n {
                h[(a, b)] -= mean[a] * mean[b];
            }
        }
        let gv = nalgebra::DVector::from_vec(g.clone());
        let step = newton_direction(&h, &gv);
        let slope = gv.dot(&step);
        let mut s = 1.0;
        let mut accepted = None;
        while s > 1e-12 {
            let mut trial = theta.clone();
            for k in 0..n {
                trial[k + 1] += s * step[k];
            }
            let pt = dual_point(basis, &trial, &t);
            // Near the optimum the decrease drops below rounding; take the
            // full Newton step there.
            let flat = s == 1.0 && (pt.value - cur.value).abs() <= 1e-13 * cur.value.abs().max(1.0);
            if pt.value <= cur.value + 1e-4 * s * slope || flat {
                accepted = Some((trial, pt));
                break;
            }
            s *= 0.5;
        }
        match accepted {
            Some((th, pt)) => {
                theta = th;
                cur = pt;
            }
            None => break,
        }
    }
    let (residual, _) = best.unwrap_or((f64::INFINITY, theta));
    Err(Error::NonConvergence { iterations: cfg.max_iterations, residual })
}

fn newton_direction(h: &DMatrix<f64>, g: &nalgebra::DVector<f64>) -> nalgebra::DVector<f64> {
    let n = h.nrows();
    let scale = (0..n).map(|i| h[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    let mut reg = 0.0;
    for _ in 0..30 {
        let mut hr = h.clone();
        for i in 0..n {
            hr[(i, i)] += reg;
        }
        if let Some(ch) = hr.cholesky() {
            return -ch.solve(g);
        }
        reg = if reg == 0.0 { 1e-14 * scale } else { reg * 10.0 };
    }
    -g.clone()
}

/// `ρ(p) = p·I/D + (1−p)·ρ_V`.
pub fn rho_p(v: &Subspace, p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1]")));
    }
    let d = v.shape().total();
    let m = CMat::identity(d, d).scale(p / d as f64) + v.mixed_state().matrix().scale(1.0 - p);
    DensityMatrix::new(v.shape().clone(), m)
}

#[derive(Clone, Debug)]
pub struct PathConfig {
    /// Strictly decreasing values in `(0, 1]`.
    pub p_values: Vec<f64>,
    pub maxent: MaxEntConfig,
    /// Relative spectral tolerance for the ground eigenspace.
    pub ground_tol: f64,
    pub overlap_threshold: f64,
    /// Project the final coefficients onto operators that annihilate `V`
    /// (up to a constant) when that yields `V` as the exact ground space.
    pub refine: bool,
}

impl PathConfig {
    /// Geometric p_values `1e-1, 1e-2, …` down to `p_min`.
    pub fn down_to(p_min: f64) -> Self {
        let mut p_values = Vec::new();
        let mut p: f64 = 0.1;
        while p >= p_min * (1.0 - 1e-9) {
            p_values.push(p);
            p /= 10.0;
        }
        if p_values.last().is_none_or(|&l| (l - p_min).abs() > 1e-15 * p_min.max(1e-300) && l > p_min) {
            p_values.push(p_min);
        }
        Self { p_values, ..Self::default() }
    }
}

impl Default for PathConfig {
    fn default() -> Self {
        Self {
            p_values: vec![1e-1, 1e-2, 1e-3, 1e-4],
            maxent: MaxEntConfig::default(),
            ground_tol: 1e-7,
            overlap_threshold: 1.0 - 1e-6,
            refine: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PathStep {
    pub p: f64,
    pub residual: f64,
    pub entropy: f64,
    /// Overlap of the ground eigenspace (relative tolerance) with `V`.
    pub ground_overlap: f64,
    /// Overlap of the `dim V` lowest eigenvectors with `V`.
    pub low_overlap: f64,
    pub ground_dim: usize,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct ThermalPath {
    /// Final Hamiltonian, ground energy shifted to 0.
    pub hamiltonian: LocalHamiltonian,
    /// `−log ρ̃(p_final)` before refinement, ground energy shifted to 0.
    pub raw_hamiltonian: LocalHamiltonian,
    pub ground_space: Subspace,
    pub steps: Vec<PathStep>,
    pub refined: bool,
    /// Ground space of the final Hamiltonian equals `V` and the low-lying
    /// overlap stayed above threshold for the last two values of `p`.
    pub converged: bool,
    /// First `p` at which the solver failed, if any.
    pub aborted_at: Option<f64>,
}

/// Ground eigenspace with spectral tolerance relative to the spread.
pub fn ground_space_of(h: &CMat, shape: &crate::operator::SystemShape, rel_tol: f64) -> (Subspace, Eigh) {
    let e = eigh_herm(h);
    let spread = (e.values.last().unwrap() - e.values[0]).max(1e-300);
    let idx = e.ground_indices(rel_tol * spread);
    let g = Subspace::new(shape.clone(), e.columns(&idx)).expect("eigenvectors are orthonormal");
    (g, e)
}

fn shift_to_zero(h: &LocalHamiltonian) -> LocalHamiltonian {
    let e0 = eigh_herm(&h.assemble_matrix()).values[0];
    h.shift(-e0)
}

/// Coefficients `a` projected onto `{a : (Σ a_k B_k) V = 0}`.
fn kernel_projection(basis: &LocalBasis, v: &Subspace, a: &[f64]) -> Vec<f64> {
    let n = basis.annihilators(v);
    let norms: Vec<f64> = basis.elements().iter().map(|e| e.norm_sq.sqrt()).collect();
    let hat = nalgebra::DVector::from_iterator(a.len(), a.iter().zip(&norms).map(|(x, s)| x * s));
    let proj = &n * (n.transpose() * hat);
    proj.iter().zip(&norms).map(|(x, s)| x / s).collect()
}

/// Follows the maximum-entropy reconstructions of `ρ(p)` down the p_values
/// and extracts `H̃ = −log ρ̃(p)` at the last point.
pub fn thermal_path(v: &Subspace, pattern: &Pattern, cfg: &PathConfig) -> Result<ThermalPath> {
    if v.shape() != pattern.shape() {
        return Err(Error::PatternMismatch("subspace and pattern shapes differ".into()));
    }
    if cfg.p_values.is_empty()
        || cfg.p_values.iter().any(|&p| !(p > 0.0 && p <= 1.0))
        || cfg.p_values.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::InvalidParameter("p values must be strictly descending in (0, 1]".into()));
    }
    let basis = LocalBasis::new(pattern);
    let shape = v.shape().clone();
    let r = v.dim();
    let mut warm: Option<Vec<f64>> = None;
    let mut steps = Vec::new();
    let mut last: Option<MaxEntSolution> = None;
    let mut aborted_at = None;
    for &p in &cfg.p_values {
        let rho = rho_p(v, p)?;
        let targets = rdm_vector(&rho, pattern)?;
        let sol = match maxent_solve_in(&targets, &basis, warm.as_deref(), &cfg.maxent) {
            Ok(s) => s,
            Err(Error::NonConvergence { iterations, residual }) => {
                if last.is_none() {
                    return Err(Error::NonConvergence { iterations, residual });
                }
                aborted_at = Some(p);
                break;
            }
            Err(e) => return Err(e),
        };
        let h = shift_to_zero(&sol.hamiltonian());
        let (g, e) = ground_space_of(&h.assemble_matrix(), &shape, cfg.ground_tol);
        let low =
            Subspace::new(shape.clone(), e.columns(&(0..r).collect::<Vec<_>>())).expect("eigenvectors are orthonormal");
        steps.push(PathStep {
            p,
            residual: sol.residual,
            entropy: sol.entropy,
            ground_overlap: g.overlap(v),
            low_overlap: low.overlap(v),
            ground_dim: g.dim(),
            iterations: sol.iterations,
        });
        warm = Some(sol.theta.clone());
        last = Some(sol);
    }
    let sol = last.expect("at least one solved point");
    let raw = shift_to_zero(&sol.hamiltonian());
    let mut hamiltonian = raw.clone();
    let mut refined = false;
    let (mut ground, _) = ground_space_of(&raw.assemble_matrix(), &shape, cfg.ground_tol);
    if cfg.refine && !ground.equals(v, 1e-8) {
        let a: Vec<f64> = sol.theta.iter().map(|t| -t).collect();
        let ak = kernel_projection(&basis, v, &a);
        let cand = shift_to_zero(&basis.hamiltonian(&ak));
        let (g2, _) = ground_space_of(&cand.assemble_matrix(), &shape, cfg.ground_tol);
        if g2.equals(v, 1e-8) {
            hamiltonian = cand;
            ground = g2;
            refined = true;
        }
    }
    let tail_ok = steps.len() >= 2 && steps[steps.len() - 2..].iter().all(|s| s.low_overlap >= cfg.overlap_threshold);
    let converged = aborted_at.is_none() && tail_ok && ground.overlap(v) >= cfg.overlap_threshold;
    Ok(ThermalPath { hamiltonian, raw_hamiltonian: raw, ground_space: ground, steps, refined, converged, aborted_at })
}
