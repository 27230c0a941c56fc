//! Certifying that every state with `ρ_V`'s marginals is supported on `V`.
//!
//! The leakage `max Tr(σ(I − P_V))` over states `σ` sharing the marginals of
//! `ρ_V` is a semidefinite program. Before solving it we restrict to the
//! intersection `W` of the lifted marginal ranges, which contains the support
//! of every feasible state, and remove dependent constraints. The dual
//! solution gives a rigorous upper bound; a rank-revealed, re-projected
//! primal solution gives an independently checked witness.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::maxent::{thermal_path, PathConfig};
use crate::operator::{
    eigh_herm, herm, inner, intersect_all, tensor_embed, trace_re, CMat, CVec, DensityMatrix, Subspace,
};
use crate::pattern::{rdm_vector, LocalBasis, MarginalVector, Pattern};
use crate::sdp::{self, hmat, hvec, SdpConfig, SdpProblem};

#[derive(Clone, Debug)]
pub struct LeakageConfig {
    pub tol: f64,
    pub sdp: SdpConfig,
}

impl Default for LeakageConfig {
    fn default() -> Self {
        Self { tol: 1e-7, sdp: SdpConfig::default() }
    }
}

impl LeakageConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Correlated,
    NotCorrelated,
    Indeterminate,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Correlated => "correlated",
            Verdict::NotCorrelated => "not correlated",
            Verdict::Indeterminate => "indeterminate",
        })
    }
}

#[derive(Clone, Debug)]
pub struct CorrelatednessCertificate {
    pub correlated: bool,
    pub verdict: Verdict,
    /// Witness value when a witness exists, otherwise the upper bound.
    pub leakage: f64,
    /// Rigorous bound from the dual solution (0 when facial reduction
    /// already pins the support to `V`).
    pub upper_bound: f64,
    /// Leakage of the validated witness, or 0.
    pub lower_bound: f64,
    pub witness: Option<DensityMatrix>,
    /// Largest per-subset trace-norm marginal mismatch of the witness.
    pub witness_residual: Option<f64>,
    pub tol: f64,
    /// Dimension of the face the final program runs on: the intersection
    /// of lifted marginal ranges, cut further by `face_reductions` steps.
    pub reduced_dim: usize,
    /// Exposing operators found beyond the marginal ranges.
    pub face_reductions: usize,
    pub iterations: usize,
    /// Ground-space overlap from the thermal path, when corroboration ran.
    pub path_overlap: Option<f64>,
}

/// Lifted range projectors of `ρ_V`'s marginals, intersected.
fn marginal_range_intersection(v: &Subspace, pattern: &Pattern) -> Result<Subspace> {
    let shape = v.shape();
    let rho = v.mixed_state();
    let mut spaces = Vec::with_capacity(pattern.len());
    for sub in pattern.subsets() {
        let m = rho.partial_trace(sub)?;
        let r = m.range(1e-10);
        let lifted = tensor_embed(r.projector(), sub, shape)?;
        spaces.push(Subspace::range_of(shape, &herm(&lifted), 0.5)?);
    }
    intersect_all(&spaces, 1e-8)
        .ok_or_else(|| Error::InvalidSubspace("marginal ranges have trivial intersection".into()))
}

/// Largest face on which the exposing-operator search runs (it diagonalizes
/// a `d² × d²` projector).
const MAX_REDUCTION_DIM: usize = 32;

/// Compressions `Q†B_kQ` of the local basis, reduced to an orthonormal set in
/// [`hvec`] coordinates.
fn compressed_constraints(q: &CMat, basis: &LocalBasis) -> Vec<CMat> {
    let wd = q.ncols();
    let rows: Vec<Vec<f64>> = basis.elements().iter().map(|el| hvec(&(q.adjoint() * &el.full * q))).collect();
    let am = DMatrix::from_fn(rows.len(), wd * wd, |i, j| rows[i][j]);
    let svd = am.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > 1e-10 * smax)
        .map(|i| hmat(vt.row(i).transpose().as_slice(), wd))
        .collect()
}

/// Looks for `Z ⪰ 0` in the span of `e` with `⟨ρ, Z⟩ = 0` and `Tr Z = 1`.
/// Every state with the marginals of `ρ` satisfies `⟨σ, Z⟩ = 0`, so its
/// support lies in `ker Z`. Returns an orthonormal basis of that kernel.
fn exposing_kernel(e: &[CMat], rho: &CMat, cfg: &SdpConfig) -> Option<CMat> {
    let d = rho.nrows();
    let er = eigh_herm(rho);
    let top = er.values[d - 1];
    let ker: Vec<usize> = (0..d).filter(|&i| er.values[i] <= 1e-10 * top).collect();
    if ker.is_empty() {
        return None;
    }
    let u = er.columns(&ker);
    let k = u.ncols();
    // Z = U Z_u U† must be orthogonal to the complement of span(e).
    let em = DMatrix::from_fn(e.len(), d * d, |i, j| hvec(&e[i])[j]);
    let comp = (DMatrix::<f64>::identity(d * d, d * d) - em.transpose() * &em).symmetric_eigen();
    let rows: Vec<Vec<f64>> = (0..d * d)
        .filter(|&i| comp.eigenvalues[i] > 0.5)
        .map(|i| hvec(&(u.adjoint() * hmat(comp.eigenvectors.column(i).as_slice(), d) * &u)))
        .collect();
    // Z_u lives in the null space of `rows`; a single direction needs no SDP.
    let mut null_proj = DMatrix::<f64>::identity(k * k, k * k);
    if !rows.is_empty() {
        let svd = DMatrix::from_fn(rows.len(), k * k, |i, j| rows[i][j]).svd(false, true);
        let vt = svd.v_t?;
        let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max).max(1.0);
        for i in (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > 1e-9 * smax) {
            let r = vt.row(i);
            null_proj -= r.transpose() * r;
        }
    }
    let ne = null_proj.symmetric_eigen();
    let null: Vec<usize> = (0..k * k).filter(|&i| ne.eigenvalues[i] > 0.5).collect();
    if null.is_empty() {
        return None;
    }
    let nb: Vec<CMat> = null.iter().map(|&i| hmat(ne.eigenvectors.column(i).as_slice(), k)).collect();
    let tau = DVector::from_iterator(nb.len(), nb.iter().map(trace_re));
    if tau.norm() < 1e-12 {
        return None;
    }
    let zu = if nb.len() == 1 {
        nb[0].scale(1.0 / tau[0])
    } else {
        // max λ_min(Z) over Tr Z = 1. Its dual, min ⟨C, X⟩ over states X
        // orthogonal to the traceless directions, is strictly feasible at
        // X = I/k, unlike a plain feasibility problem.
        let combo = |w: &[f64]| {
            let mut z = CMat::zeros(k, k);
            for (wi, ni) in w.iter().zip(&nb) {
                z += ni.scale(*wi);
            }
            z
        };
        let c = combo((&tau / tau.norm_squared()).as_slice());
        let perp = (DMatrix::<f64>::identity(nb.len(), nb.len()) - &tau * tau.transpose() / tau.norm_squared())
            .symmetric_eigen();
        let dirs: Vec<CMat> = (0..nb.len())
            .filter(|&j| perp.eigenvalues[j] > 0.5)
            .map(|j| combo(perp.eigenvectors.column(j).as_slice()))
            .collect();
        let mut a = vec![CMat::identity(k, k)];
        a.extend(dirs.iter().cloned());
        let mut b = vec![0.0; a.len()];
        b[0] = 1.0;
        let sol = sdp::solve(&SdpProblem { c: c.clone(), a, b }, cfg);
        let mut z = c;
        for (yi, di) in sol.y.iter().skip(1).zip(&dirs) {
            z -= di.scale(*yi);
        }
        z
    };
    // Snap Z back into span(e) and re-check it before trusting its range.
    let zf = &u * &zu * u.adjoint();
    let mut z = CMat::zeros(d, d);
    for ei in e {
        z += ei.scale(inner(ei, &zf));
    }
    let ez = eigh_herm(&herm(&z));
    let zmax = ez.values[d - 1];
    if zmax <= 0.0 || ez.values[0] < -1e-9 * zmax || inner(rho, &z) > 1e-9 * zmax {
        return None;
    }
    let range: Vec<usize> = (0..d).filter(|&i| ez.values[i] > 1e-7 * zmax).collect();
    Some(crate::operator::complement_basis(&ez.columns(&range)))
}

/// Hermitian `Y` on the range of `R` with `⟨E_i, R Y R†⟩ = b_i`, closest to
/// `R† X R`. Falls back to the best positive semidefinite fit; the caller
/// validates the result independently.
fn polish(x: &CMat, e: &[CMat], b: &[f64]) -> Option<CMat> {
    let eig = eigh_herm(x);
    let top = eig.values.last().copied()?;
    let mut best: Option<(f64, CMat)> = None;
    for thr in [1e-6, 1e-8, 1e-4, 1e-3] {
        let idx: Vec<usize> = (0..eig.values.len()).filter(|&i| eig.values[i] > thr * top).collect();
        let r = eig.columns(&idx);
        let k = r.ncols();
        let rows: Vec<Vec<f64>> = e.iter().map(|ei| hvec(&(r.adjoint() * ei * &r))).collect();
        let mx = DMatrix::from_fn(e.len(), k * k, |i, j| rows[i][j]);
        let y0 = DVector::from_vec(hvec(&(r.adjoint() * x * &r)));
        let res = DVector::from_column_slice(b) - &mx * &y0;
        let svd = mx.clone().svd(true, true);
        let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let dy = match svd.solve(&res, 1e-12 * smax) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let yv = &y0 + dy;
        let fit = (DVector::from_column_slice(b) - &mx * &yv).amax();
        let y = hmat(yv.as_slice(), k);
        if eigh_herm(&y).values[0] < -1e-14 {
            continue;
        }
        if fit < 1e-12 {
            return Some(&r * y * r.adjoint());
        }
        if best.as_ref().is_none_or(|(f, _)| fit < *f) {
            best = Some((fit, &r * y * r.adjoint()));
        }
    }
    best.map(|(_, m)| m)
}

fn witness_check(
    sigma: &CMat,
    v: &Subspace,
    pattern: &Pattern,
    targets: &MarginalVector,
) -> Option<(DensityMatrix, f64, f64)> {
    let lmin = eigh_herm(sigma).values[0];
    let mut m = herm(sigma);
    if lmin < 0.0 {
        if lmin < -1e-12 {
            return None;
        }
        let d = m.nrows();
        m += CMat::identity(d, d).scale(-lmin);
    }
    let tr: f64 = (0..m.nrows()).map(|i| m[(i, i)].re).sum();
    let m = m.unscale(tr);
    let dm = DensityMatrix::new(v.shape().clone(), m).ok()?;
    let residual = rdm_vector(&dm, pattern).ok()?.trace_norm_diff(targets);
    let leak = 1.0 - inner(v.projector(), dm.matrix());
    Some((dm, residual, leak.max(0.0)))
}

/// Maximal weight outside `V` over states matching `ρ_V`'s `K`-marginals.
pub fn leakage(v: &Subspace, pattern: &Pattern, cfg: &LeakageConfig) -> Result<CorrelatednessCertificate> {
    if v.shape() != pattern.shape() {
        return Err(Error::PatternMismatch("subspace and pattern shapes differ".into()));
    }
    let tol = cfg.tol;
    let w = marginal_range_intersection(v, pattern)?;
    let mut cert = CorrelatednessCertificate {
        correlated: true,
        verdict: Verdict::Correlated,
        leakage: 0.0,
        upper_bound: 0.0,
        lower_bound: 0.0,
        witness: None,
        witness_residual: None,
        tol,
        reduced_dim: w.dim(),
        face_reductions: 0,
        iterations: 0,
        path_overlap: None,
    };
    if w.dim() == v.dim() {
        return Ok(cert);
    }

    let basis = LocalBasis::new(pattern);
    let rho = v.mixed_state();
    let mut q = w.basis().clone();
    let mut e = compressed_constraints(&q, &basis);
    while q.ncols() > v.dim() && q.ncols() <= MAX_REDUCTION_DIM {
        let rho_w = q.adjoint() * rho.matrix() * &q;
        match exposing_kernel(&e, &rho_w, &cfg.sdp) {
            Some(n) if n.ncols() < q.ncols() => {
                q = &q * n;
                e = compressed_constraints(&q, &basis);
                cert.face_reductions += 1;
            }
            _ => break,
        }
    }
    cert.reduced_dim = q.ncols();
    if q.ncols() == v.dim() {
        return Ok(cert);
    }
    let q = &q;
    let rho_w = q.adjoint() * v.mixed_state().matrix() * q;
    let b: Vec<f64> = e.iter().map(|ei| inner(ei, &rho_w)).collect();
    let c = herm(&(q.adjoint() * v.projector() * q));
    let problem = SdpProblem { c: c.clone(), a: e.clone(), b: b.clone() };
    let sol = sdp::solve(&problem, &cfg.sdp);
    cert.iterations = sol.iterations;

    // Weak duality with Tr X = 1 on the feasible set.
    let mut slack = c;
    for (yi, ei) in sol.y.iter().zip(&e) {
        slack -= ei.scale(*yi);
    }
    let smin = eigh_herm(&herm(&slack)).values[0];
    let lower_obj: f64 = b.iter().zip(&sol.y).map(|(u, v)| u * v).sum::<f64>() + smin.min(0.0);
    let upper = (1.0 - lower_obj).clamp(0.0, 1.0);
    cert.upper_bound = upper;

    let targets = rdm_vector(&v.mixed_state(), pattern)?;
    let witness = polish(&sol.x, &e, &b)
        .and_then(|y| witness_check(&(q * y * q.adjoint()), v, pattern, &targets))
        .filter(|(_, res, _)| *res <= tol);

    if upper <= tol {
        cert.leakage = upper;
        return Ok(cert);
    }
    cert.correlated = false;
    match witness {
        Some((dm, res, leak)) if leak > tol => {
            cert.verdict = Verdict::NotCorrelated;
            cert.leakage = leak;
            cert.lower_bound = leak;
            cert.witness = Some(dm);
            cert.witness_residual = Some(res);
        }
        _ => {
            cert.verdict = Verdict::Indeterminate;
            cert.leakage = upper;
        }
    }
    Ok(cert)
}

/// Leakage test for `span{ψ}`.
pub fn is_udr_pure(psi: &CVec, pattern: &Pattern, cfg: &LeakageConfig) -> Result<CorrelatednessCertificate> {
    let v = Subspace::from_ket(pattern.shape().clone(), psi)?;
    leakage(&v, pattern, cfg)
}

/// [`leakage`], with correlated verdicts cross-checked against the thermal
/// path: the lowest `dim V` eigenvectors of the extracted Hamiltonian must
/// span `V`. Disagreement yields an indeterminate certificate.
pub fn certify(
    v: &Subspace,
    pattern: &Pattern,
    cfg: &LeakageConfig,
    path: &PathConfig,
) -> Result<CorrelatednessCertificate> {
    let mut cert = leakage(v, pattern, cfg)?;
    if cert.verdict != Verdict::Correlated {
        return Ok(cert);
    }
    let overlap = match thermal_path(v, pattern, path) {
        Ok(tp) => tp.steps.last().map(|s| s.low_overlap).unwrap_or(0.0),
        Err(_) => 0.0,
    };
    cert.path_overlap = Some(overlap);
    if overlap < path.overlap_threshold {
        cert.verdict = Verdict::Indeterminate;
        cert.correlated = false;
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{ket, SystemShape};
    use crate::states;

    fn chain3() -> Pattern {
        Pattern::parse(SystemShape::qubits(3), "1,2;2,3").unwrap()
    }

    #[test]
    fn rho_c_is_correlated_by_facial_reduction() {
        let c = leakage(&states::rho_c_space(), &chain3(), &LeakageConfig::default()).unwrap();
        assert!(c.correlated);
        assert_eq!(c.reduced_dim, 2);
    }

    #[test]
    fn ghz_leaks_everything() {
        let v = states::line(3, &states::ghz(3));
        let c = leakage(&v, &chain3(), &LeakageConfig::default()).unwrap();
        assert_eq!(c.verdict, Verdict::NotCorrelated);
        assert!((c.leakage - 1.0).abs() < 1e-6, "leakage {}", c.leakage);
        let wit = c.witness.unwrap();
        let minus = (ket("000") - ket("111")).unscale(2f64.sqrt());
        assert!((minus.dotc(&(wit.matrix() * &minus)).re - 1.0).abs() < 1e-6);
    }

    #[test]
    fn w3_is_correlated() {
        let c = is_udr_pure(&states::w(3), &chain3(), &LeakageConfig::default()).unwrap();
        assert!(c.correlated, "upper {}", c.upper_bound);
    }

    #[test]
    fn leakage_ignores_basis_choice() {
        let v = states::v134();
        let k = Pattern::all_pairs(SystemShape::qubits(3)).unwrap();
        let a = leakage(&v, &k, &LeakageConfig::default()).unwrap();
        let rotated = Subspace::span(
            v.shape().clone(),
            &CMat::from_columns(&[
                v.basis().column(0) + v.basis().column(1),
                v.basis().column(0) - v.basis().column(1).scale(2.0),
            ]),
        )
        .unwrap();
        let b = leakage(&rotated, &k, &LeakageConfig::default()).unwrap();
        assert_eq!(a.verdict, Verdict::NotCorrelated);
        assert!((a.leakage - 0.5).abs() < 1e-6);
        assert!((a.leakage - b.leakage).abs() < 1e-6);
    }
}
