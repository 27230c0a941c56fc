//! W-type states on open chains and the XXZ ring in a field.

use super::{ff_hamiltonian, perturb_combine, verify_ground_space, GroundReport, PerturbationBound, VERIFY_TOL};
use crate::error::{Error, Result};
use crate::operator::{kron, pauli, CVec, Subspace, SystemShape, C64};
use crate::pattern::{LocalHamiltonian, Pattern};
use crate::states::w_type;

#[derive(Clone, Debug, PartialEq)]
pub struct WTypeSpec {
    amplitudes: Vec<C64>,
}

impl WTypeSpec {
    /// Normalizes; every amplitude must be nonzero and `n ≥ 3`.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() < 3 {
            return Err(Error::InvalidParameter(format!("need n ≥ 3 sites, got {}", amplitudes.len())));
        }
        if let Some(i) = amplitudes.iter().position(|a| a.norm() <= 1e-12) {
            return Err(Error::InvalidParameter(format!("amplitude a_{} vanishes", i + 1)));
        }
        let n = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        Ok(Self { amplitudes: amplitudes.iter().map(|a| a / n).collect() })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![C64::new(1.0, 0.0); n])
    }

    pub fn n(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn ket(&self) -> CVec {
        w_type(&self.amplitudes)
    }
}

#[derive(Clone, Debug)]
pub struct ChainParent {
    pub hamiltonian: LocalHamiltonian,
    pub bound: PerturbationBound,
    pub report: GroundReport,
}

/// `t*·Σ (kernel projectors) + Σ Z_i − (n−2)`.
///
/// The field term annihilates every single-excitation state and gives the
/// all-zero state energy 2, which splits the FF space `span{W, |0…0⟩}`.
pub fn w_chain_parent(spec: &WTypeSpec) -> Result<ChainParent> {
    let n = spec.n();
    let shape = SystemShape::qubits(n);
    let pattern = Pattern::chain(shape.clone())?;
    let v = Subspace::from_ket(shape, &spec.ket())?;
    let (h0, w) = ff_hamiltonian(&v, &pattern)?;
    if w.dim() != 2 {
        return Err(Error::Precondition(format!("FF space has dimension {}, expected 2", w.dim())));
    }
    let h1 = LocalHamiltonian::new(pattern, (0..n).map(|i| (vec![i], pauli::z())).collect(), -(n as f64 - 2.0))?;
    let (bound, h) = perturb_combine(&h0, &h1, &v)?;
    let report = verify_ground_space(&h, &v, VERIFY_TOL);
    Ok(ChainParent { hamiltonian: h, bound, report })
}

#[derive(Clone, Debug, PartialEq)]
pub struct XXZParams {
    pub p_alpha: f64,
    pub p_beta: f64,
    pub epsilon: f64,
    pub periodic: bool,
}

impl XXZParams {
    pub fn new(p_alpha: f64, p_beta: f64, epsilon: f64, periodic: bool) -> Result<Self> {
        if !(p_alpha > 0.0 && p_beta > 0.0) {
            return Err(Error::InvalidParameter("p_alpha and p_beta must be positive".into()));
        }
        if !epsilon.is_finite() {
            return Err(Error::InvalidParameter("epsilon must be finite".into()));
        }
        Ok(Self { p_alpha, p_beta, epsilon, periodic })
    }
}

/// `−Σ_bonds (p_α XX + p_α YY + (p_α − p_β) ZZ) − Σ_i (2p_β − ε) Z_i`.
pub fn xxz_w_hamiltonian(n: usize, params: &XXZParams) -> Result<LocalHamiltonian> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("need n ≥ 3 sites, got {n}")));
    }
    let shape = SystemShape::qubits(n);
    let pattern = if params.periodic { Pattern::ring(shape)? } else { Pattern::chain(shape)? };
    let (pa, pb) = (params.p_alpha, params.p_beta);
    let bond = -(kron(&pauli::x(), &pauli::x()).scale(pa)
        + kron(&pauli::y(), &pauli::y()).scale(pa)
        + kron(&pauli::z(), &pauli::z()).scale(pa - pb));
    let mut terms: Vec<(Vec<usize>, _)> = pattern.subsets().iter().map(|s| (s.clone(), bond.clone())).collect();
    let field = pauli::z().scale(-(2.0 * pb - params.epsilon));
    terms.extend((0..n).map(|i| (vec![i], field.clone())));
    LocalHamiltonian::new(pattern, terms, 0.0)
}

#[derive(Clone, Debug)]
pub struct XxzScan {
    pub hamiltonian: LocalHamiltonian,
    pub epsilon: f64,
    pub report: GroundReport,
    /// `(ε, passed)` for every value tried.
    pub tried: Vec<(f64, bool)>,
}

/// First `ε` in `0.5, 0.25, …` (down to `2⁻³⁰`) for which `W(n)` is the
/// verified unique ground state.
pub fn xxz_scan(n: usize, p_alpha: f64, p_beta: f64, periodic: bool) -> Result<XxzScan> {
    let v = Subspace::from_ket(SystemShape::qubits(n), &crate::states::w(n))?;
    let mut tried = Vec::new();
    let mut eps = 0.5;
    for _ in 0..30 {
        let params = XXZParams::new(p_alpha, p_beta, eps, periodic)?;
        let h = xxz_w_hamiltonian(n, &params)?;
        let report = verify_ground_space(&h, &v, VERIFY_TOL);
        tried.push((eps, report.pass));
        if report.pass {
            return Ok(XxzScan { hamiltonian: h, epsilon: eps, report, tried });
        }
        eps *= 0.5;
    }
    Err(Error::NoParentFound(format!("no ε in the scan makes W({n}) the unique ground state")))
}
