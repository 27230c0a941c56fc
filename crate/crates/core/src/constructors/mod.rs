//! Parent-Hamiltonian constructions and ground-space verification.

mod chains;
mod subsystems;
mod three_qubit;

pub use chains::{w_chain_parent, xxz_scan, xxz_w_hamiltonian, ChainParent, WTypeSpec, XXZParams, XxzScan};
pub use subsystems::{subsystem_compose, ComposedParent, SubsystemReport};
pub use three_qubit::{
    acin_form, three_qubit_parent, three_qubit_parent_of_state, AcinForm, Branch, ParentRoute, ThreeQubitParent,
};

use crate::error::{Error, Result};
use crate::operator::{eigh_herm, herm, max_abs, op_norm, CMat, Subspace};
use crate::pattern::{LocalBasis, LocalHamiltonian, Pattern};

/// Default spectral tolerance for [`verify_ground_space`].
pub const VERIFY_TOL: f64 = 1e-8;
/// Largest component of a basis vector of one space outside the other.
const SUBSPACE_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct GroundReport {
    pub ground_energy: f64,
    /// `E_r − E_0` with `r = dim V`; infinite when `V` is the full space.
    pub gap: f64,
    /// `Tr(P_G P_V) / max(dim G, dim V)`.
    pub overlap: f64,
    pub ground_dim: usize,
    pub pass: bool,
}

/// Diagonalizes `H` and compares its ground eigenspace (spectral tolerance
/// relative to the spread of the spectrum) with `V`.
pub fn verify_ground_space(h: &LocalHamiltonian, v: &Subspace, tol: f64) -> GroundReport {
    let m = h.assemble_matrix();
    let e = eigh_herm(&m);
    let e0 = e.values[0];
    let spread = e.values.last().unwrap() - e0;
    let idx = e.ground_indices(tol * spread.max(1.0));
    let g = Subspace::new(v.shape().clone(), e.columns(&idx)).expect("eigenvectors are orthonormal");
    let r = v.dim();
    let gap = if r < e.values.len() { e.values[r] - e0 } else { f64::INFINITY };
    GroundReport {
        ground_energy: e0,
        gap,
        overlap: g.overlap(v),
        ground_dim: g.dim(),
        pass: h.shape() == v.shape() && g.dim() == r && g.equals(v, SUBSPACE_TOL),
    }
}

/// Kernel projectors of the marginals of `ρ_V` and the intersection `W` of
/// the lifted marginal ranges; `W ⊇ V` is the zero-energy ground space.
pub fn ff_hamiltonian(v: &Subspace, pattern: &Pattern) -> Result<(LocalHamiltonian, Subspace)> {
    if v.shape() != pattern.shape() {
        return Err(Error::PatternMismatch("subspace and pattern shapes differ".into()));
    }
    let shape = v.shape();
    let rho = v.mixed_state();
    let mut terms = Vec::with_capacity(pattern.len());
    let mut lifted = Vec::with_capacity(pattern.len());
    for sub in pattern.subsets() {
        let range = rho.partial_trace(sub)?.range(crate::operator::RANK_CUTOFF);
        let d = range.projector().nrows();
        terms.push((sub.clone(), CMat::identity(d, d) - range.projector()));
        let big = crate::operator::tensor_embed(range.projector(), sub, shape)?;
        lifted.push(Subspace::range_of(shape, &herm(&big), 0.5)?);
    }
    let w = crate::operator::intersect_all(&lifted, 1e-8)
        .ok_or_else(|| Error::InvalidSubspace("marginal ranges have trivial intersection".into()))?;
    Ok((LocalHamiltonian::new(pattern.clone(), terms, 0.0)?, w))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationBound {
    /// Smallest positive eigenvalue of `H_W`.
    pub lambda_min_pos_w: f64,
    /// Smallest eigenvalue of `H_U` compressed to `W ⊖ V`.
    pub mu: f64,
    /// `‖H_U‖`.
    pub omega: f64,
    pub t_star: f64,
}

pub const T_MARGIN: f64 = 1.1;

/// Bound for `t·H_W + H_U` to have ground space exactly `V`.
///
/// Requires `H_W ⪰ 0` with zero-energy space `W ⊇ V`, `H_U V = 0`, and
/// `H_U` positive definite on `W ⊖ V`.
pub fn perturbation_bound(h_w: &CMat, h_u: &CMat, v: &Subspace) -> Result<(PerturbationBound, Subspace)> {
    let ew = eigh_herm(h_w);
    let scale = ew.values.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1e-300);
    if ew.values[0] < -1e-10 * scale {
        return Err(Error::Precondition(format!("H_W is not positive semidefinite (λ_min = {:e})", ew.values[0])));
    }
    let zero: Vec<usize> = (0..ew.values.len()).filter(|&i| ew.values[i] <= 1e-10 * scale).collect();
    let lambda = ew
        .values
        .iter()
        .copied()
        .find(|&x| x > 1e-10 * scale)
        .ok_or_else(|| Error::Precondition("H_W has no positive eigenvalue".into()))?;
    if zero.is_empty() {
        return Err(Error::Precondition("H_W has no zero-energy space".into()));
    }
    let w = Subspace::new(v.shape().clone(), ew.columns(&zero)).expect("eigenvectors are orthonormal");
    if !w.contains(v, 1e-8) {
        return Err(Error::Precondition("V is not inside the zero-energy space of H_W".into()));
    }
    let omega = op_norm(h_u);
    if omega <= 1e-14 {
        return Err(Error::InvalidParameter("H_U = 0 cannot split W ⊖ V".into()));
    }
    if max_abs(&(h_u * v.basis())) > 1e-9 * omega.max(1.0) {
        return Err(Error::Precondition("H_U does not annihilate V".into()));
    }
    let rest = w.minus(v).ok_or_else(|| Error::Precondition("W equals V; H_W alone has ground space V".into()))?;
    let comp = rest.basis().adjoint() * h_u * rest.basis();
    let mu = eigh_herm(&comp).values[0];
    if mu <= 1e-12 * omega {
        return Err(Error::Precondition(format!(
            "H_U is not positive on W ⊖ V (smallest compressed eigenvalue {mu:e})"
        )));
    }
    let t_star = omega * (mu + omega) / (lambda * mu) * T_MARGIN;
    Ok((PerturbationBound { lambda_min_pos_w: lambda, mu, omega, t_star }, w))
}

/// `t*·H_W + H_U`, verified to have ground space `V`.
pub fn perturb_combine(
    h_w: &LocalHamiltonian,
    h_u: &LocalHamiltonian,
    v: &Subspace,
) -> Result<(PerturbationBound, LocalHamiltonian)> {
    let (bound, _) = perturbation_bound(&h_w.assemble_matrix(), &h_u.assemble_matrix(), v)?;
    let h = h_w.scale(bound.t_star).add(h_u)?;
    let rep = verify_ground_space(&h, v, VERIFY_TOL);
    if !rep.pass {
        return Err(Error::NoParentFound(format!(
            "t*·H_W + H_U failed verification (overlap {:.3e}, ground dimension {})",
            rep.overlap, rep.ground_dim
        )));
    }
    Ok((bound, h))
}

/// A `K`-local operator with `A·V = 0` chosen to maximize `Tr(P_{W⊖V} A)`,
/// normalized to unit operator norm.
pub fn splitting_operator(v: &Subspace, w: &Subspace, pattern: &Pattern) -> Result<LocalHamiltonian> {
    let rest = w.minus(v).ok_or_else(|| Error::Precondition("W equals V; nothing to split".into()))?;
    let basis = LocalBasis::new(pattern);
    let n = basis.annihilators(v);
    if n.ncols() == 0 {
        return Err(Error::NoParentFound("no K-local operator annihilates V".into()));
    }
    let norms: Vec<f64> = basis.elements().iter().map(|e| e.norm_sq.sqrt()).collect();
    let g = nalgebra::DVector::from_iterator(
        basis.len(),
        basis.elements().iter().zip(&norms).map(|(e, s)| crate::operator::inner(rest.projector(), &e.full) / s),
    );
    let hat = &n * (n.transpose() * g);
    if hat.norm() <= 1e-12 {
        return Err(Error::NoParentFound("annihilators of V vanish on W ⊖ V".into()));
    }
    let a: Vec<f64> = hat.iter().zip(&norms).map(|(x, s)| x / s).collect();
    let h = basis.hamiltonian(&a);
    let nrm = op_norm(&h.assemble_matrix());
    Ok(h.scale(1.0 / nrm))
}
