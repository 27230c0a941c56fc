//! Parents for three-qubit pure states on the chain `{1,2},{2,3}`.

use super::{
    ff_hamiltonian, perturb_combine, splitting_operator, verify_ground_space, GroundReport, PerturbationBound,
    VERIFY_TOL,
};
use crate::correlated::{leakage, LeakageConfig, Verdict};
use crate::error::{Error, Result};
use crate::maxent::{thermal_path, PathConfig};
use crate::operator::{c64, hermiticity_error, ket, kron, kron_all, pauli, CMat, CVec, Subspace, SystemShape, C64};
use crate::pattern::{LocalHamiltonian, Pattern};

/// `λ0|000⟩ + λ1|100⟩ + λ2|101⟩ + λ3|110⟩ + λ4|111⟩` with `λ1` complex and
/// the rest real and nonnegative.
#[derive(Clone, Debug, PartialEq)]
pub struct AcinForm {
    pub lambda0: f64,
    pub lambda1: C64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub lambda4: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// `λ1λ4 ≠ λ2λ3`.
    Generic,
    /// `λ1λ4 = λ2λ3`: `ψ = λ0|000⟩ + λ_xy|1xy⟩`.
    Degenerate,
}

const BRANCH_TOL: f64 = 1e-10;
const GHZ_TOL: f64 = 1e-8;

impl AcinForm {
    /// Normalizes the amplitudes; rejects negative real ones and the zero vector.
    pub fn new(lambda0: f64, lambda1: C64, lambda2: f64, lambda3: f64, lambda4: f64) -> Result<Self> {
        if [lambda0, lambda2, lambda3, lambda4].iter().any(|&x| x < 0.0 || !x.is_finite()) {
            return Err(Error::InvalidParameter("λ0, λ2, λ3, λ4 must be real and nonnegative".into()));
        }
        let n =
            (lambda0 * lambda0 + lambda1.norm_sqr() + lambda2 * lambda2 + lambda3 * lambda3 + lambda4 * lambda4).sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidParameter("all amplitudes vanish".into()));
        }
        Ok(Self {
            lambda0: lambda0 / n,
            lambda1: lambda1 / n,
            lambda2: lambda2 / n,
            lambda3: lambda3 / n,
            lambda4: lambda4 / n,
        })
    }

    pub fn ket(&self) -> CVec {
        let mut v = CVec::zeros(8);
        v[0] = c64(self.lambda0, 0.0);
        v[4] = self.lambda1;
        v[5] = c64(self.lambda2, 0.0);
        v[6] = c64(self.lambda3, 0.0);
        v[7] = c64(self.lambda4, 0.0);
        v
    }

    pub fn branch(&self) -> Branch {
        if (self.lambda1 * self.lambda4 - self.lambda2 * self.lambda3).norm() > BRANCH_TOL {
            Branch::Generic
        } else {
            Branch::Degenerate
        }
    }

    /// The product state `|1⟩(λ2|0⟩+λ4|1⟩)(λ3|0⟩+λ4|1⟩)` of the FF space.
    pub fn product_partner(&self) -> CVec {
        let one = ket("1");
        let u = CVec::from_vec(vec![c64(self.lambda2, 0.0), c64(self.lambda4, 0.0)]);
        let v = CVec::from_vec(vec![c64(self.lambda3, 0.0), c64(self.lambda4, 0.0)]);
        kron_vec(&kron_vec(&one, &u), &v)
    }

    /// `η = ⟨ψ'|φ⟩ = λ1λ2λ3 + λ2²λ4 + λ3²λ4 + λ4³`.
    pub fn eta(&self) -> C64 {
        let (l2, l3, l4) = (self.lambda2, self.lambda3, self.lambda4);
        self.lambda1 * l2 * l3 + c64(l2 * l2 * l4 + l3 * l3 * l4 + l4 * l4 * l4, 0.0)
    }

    /// `ξ = ψ' − η*ψ`, orthogonal to `ψ`.
    pub fn xi(&self) -> CVec {
        self.product_partner() - self.ket() * self.eta().conj()
    }

    /// `(λ_xy, x, y)` with `[[λ1,λ2],[λ3,λ4]] = λ_xy·x yᵀ` on the degenerate branch.
    pub fn degenerate_factors(&self) -> (f64, CVec, CVec) {
        let m = CMat::from_row_slice(
            2,
            2,
            &[self.lambda1, c64(self.lambda2, 0.0), c64(self.lambda3, 0.0), c64(self.lambda4, 0.0)],
        );
        let svd = m.clone().svd(true, true);
        let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
        let k = if svd.singular_values[0] >= svd.singular_values[1] { 0 } else { 1 };
        let mut x: CVec = u.column(k).into_owned();
        let mut y: CVec = vt.row(k).transpose();
        // Fix phases so the leading nonzero entries are real and positive.
        for w in [&mut x, &mut y] {
            let lead = if w[0].norm() > GHZ_TOL { w[0] } else { w[1] };
            let ph = lead / lead.norm();
            *w = w.map(|z| z / ph);
        }
        let mut lxy = (x.adjoint() * &m * y.conjugate())[0];
        if lxy.re < 0.0 {
            y = -y;
            lxy = -lxy;
        }
        let lxy = lxy.norm();
        (lxy, x, y)
    }

    /// GHZ-type up to local unitaries: degenerate branch with `⟨0|x⟩ = ⟨0|y⟩ = 0`.
    pub fn is_ghz_type(&self) -> bool {
        if self.branch() != Branch::Degenerate || self.lambda0 <= GHZ_TOL {
            return false;
        }
        let (lxy, x, y) = self.degenerate_factors();
        lxy > GHZ_TOL && x[0].norm() <= GHZ_TOL && y[0].norm() <= GHZ_TOL
    }
}

fn kron_vec(a: &CVec, b: &CVec) -> CVec {
    let m =
        kron(&CMat::from_column_slice(a.len(), 1, a.as_slice()), &CMat::from_column_slice(b.len(), 1, b.as_slice()));
    CVec::from_column_slice(m.as_slice())
}

/// Unitary whose first row is `a†`, so it maps `a` to `|0⟩`.
fn rotate_to_zero(a: &CVec) -> CMat {
    let a = a.unscale(a.norm());
    CMat::from_row_slice(2, 2, &[a[0].conj(), a[1].conj(), -a[1], a[0]])
}

/// Local unitaries `[U1, U2, U3]` and the Acin form `a` with
/// `(U1⊗U2⊗U3)ψ = a.ket()`.
pub fn acin_form(psi: &CVec) -> Result<(AcinForm, [CMat; 3])> {
    if psi.len() != 8 {
        return Err(Error::DimensionMismatch { expected: 8, found: psi.len() });
    }
    let nrm = psi.norm();
    if nrm == 0.0 {
        return Err(Error::InvalidParameter("zero vector".into()));
    }
    let psi = psi.unscale(nrm);
    let block = |i: usize| CMat::from_fn(2, 2, |j, k| psi[4 * i + 2 * j + k]);
    let (m0, m1) = (block(0), block(1));
    let det = |m: &CMat| m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    // det(M0 + z M1) = c + b z + a z².
    let a = det(&m1);
    let c = det(&m0);
    let b = m0[(0, 0)] * m1[(1, 1)] + m0[(1, 1)] * m1[(0, 0)] - m0[(0, 1)] * m1[(1, 0)] - m0[(1, 0)] * m1[(0, 1)];
    let scale = m0.norm().max(m1.norm()).powi(2);
    // First row of U1 as (r0, r1): M'_0 = r0 M0 + r1 M1.
    let row: [C64; 2] = if a.norm() <= 1e-14 * scale {
        if b.norm() <= 1e-14 * scale {
            [c64(0.0, 0.0), c64(1.0, 0.0)]
        } else {
            [c64(1.0, 0.0), -c / b]
        }
    } else {
        let disc = (b * b - a * c * 4.0).sqrt();
        let q = if (b.conj() * disc).re >= 0.0 { -(b + disc) * 0.5 } else { -(b - disc) * 0.5 };
        let z = if q.norm() > 0.0 { c / q } else { c64(0.0, 0.0) };
        [c64(1.0, 0.0), z]
    };
    let rn = (row[0].norm_sqr() + row[1].norm_sqr()).sqrt();
    let (r0, r1) = (row[0] / rn, row[1] / rn);
    let u1 = CMat::from_row_slice(2, 2, &[r0, r1, -r1.conj(), r0.conj()]);
    let mp0 = &m0 * r0 + &m1 * r1;
    let mp1 = &m0 * (-r1.conj()) + &m1 * r0.conj();

    let (u2, u3) = if mp0.norm() > 1e-12 {
        // M'_0 = s·a bᵀ; send a and b to |0⟩.
        let svd = mp0.svd(true, true);
        let (uu, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
        let k = if svd.singular_values[0] >= svd.singular_values[1] { 0 } else { 1 };
        let av: CVec = uu.column(k).into_owned();
        let bv: CVec = vt.row(k).transpose();
        (rotate_to_zero(&av), rotate_to_zero(&bv))
    } else {
        // Product across the first cut: Schmidt form of M'_1.
        let svd = mp1.svd(true, true);
        let (uu, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
        (uu.adjoint(), vt.map(|z| z.conj()))
    };
    let phi = kron_all(&[u1.clone(), u2.clone(), u3.clone()]) * &psi;
    let (c0, c2, c3, c4) = (phi[0], phi[5], phi[6], phi[7]);
    let arg = |z: C64| if z.norm() > 1e-14 { z.arg() } else { 0.0 };
    let gamma = -arg(c0);
    let s13 = -arg(c2) - gamma;
    let s12 = -arg(c3) - gamma;
    let s123 = -arg(c4) - gamma;
    let al1 = s13 + s12 - s123;
    let al2 = s12 - al1;
    let al3 = s13 - al1;
    let ph = |t: f64| CMat::from_diagonal(&CVec::from_vec(vec![c64(1.0, 0.0), C64::from_polar(1.0, t)]));
    let u1f = ph(al1) * &u1 * C64::from_polar(1.0, gamma);
    let u2f = ph(al2) * &u2;
    let u3f = ph(al3) * &u3;
    let out = kron_all(&[u1f.clone(), u2f.clone(), u3f.clone()]) * &psi;
    let form = AcinForm::new(out[0].re.max(0.0), out[4], out[5].re.max(0.0), out[6].re.max(0.0), out[7].re.max(0.0))?;
    let resid = (form.ket() - &out).norm();
    if resid > 1e-9 {
        return Err(Error::InvalidParameter(format!("Acin reduction failed (residual {resid:e})")));
    }
    Ok((form, [u1f, u2f, u3f]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParentRoute {
    /// The kernel projectors already single out the state.
    FrustrationFree,
    /// The printed splitting term of the branch.
    Analytic,
    /// A local operator annihilating the state, chosen to split the FF space.
    SplittingOperator,
    ThermalPath,
}

impl std::fmt::Display for ParentRoute {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ParentRoute::FrustrationFree => "frustration-free",
            ParentRoute::Analytic => "analytic",
            ParentRoute::SplittingOperator => "splitting-operator",
            ParentRoute::ThermalPath => "thermal-path",
        })
    }
}

#[derive(Clone, Debug)]
pub struct ThreeQubitParent {
    pub hamiltonian: LocalHamiltonian,
    pub route: ParentRoute,
    pub branch: Branch,
    pub bound: Option<PerturbationBound>,
    pub report: GroundReport,
    /// Routes tried before the successful one, with the reason they failed.
    pub attempts: Vec<(ParentRoute, String)>,
}

fn chain3() -> Pattern {
    Pattern::parse(SystemShape::qubits(3), "1,2;2,3").expect("static pattern")
}

/// The branch's printed splitting term, when it is Hermitian.
fn analytic_splitting(a: &AcinForm, pattern: &Pattern) -> Result<LocalHamiltonian> {
    match a.branch() {
        Branch::Generic => {
            // Kernel span{|00⟩, ψ̃} on particles 2,3.
            let tilde = CVec::from_vec(vec![a.lambda1, c64(a.lambda2, 0.0), c64(a.lambda3, 0.0), c64(a.lambda4, 0.0)]);
            let span = Subspace::span(SystemShape::qubits(2), &CMat::from_columns(&[ket("00"), tilde]))?;
            let hp = CMat::identity(4, 4) - span.projector();
            let xi = a.xi();
            let xt = CVec::from_fn(4, |i, _| xi[4 + i]);
            let r = xt.dotc(&(&hp * &xt)).re;
            let sign = if r < 0.0 { -1.0 } else { 1.0 };
            LocalHamiltonian::new(pattern.clone(), vec![(vec![1, 2], hp.scale(sign))], 0.0)
        }
        Branch::Degenerate => {
            let (lxy, x, y) = a.degenerate_factors();
            if a.lambda0 <= GHZ_TOL || lxy <= GHZ_TOL {
                return Err(Error::Precondition("D1 needs λ0 and λ_xy nonzero".into()));
            }
            let d1 = CMat::from_diagonal(&CVec::from_vec(vec![c64(lxy / a.lambda0, 0.0), c64(a.lambda0 / lxy, 0.0)]));
            let refl = |w: &CVec| CMat::from_row_slice(2, 2, &[w[0], w[1], w[1], -w[0]]);
            let t12 = kron(&(pauli::x() * d1), &refl(&x));
            let t3 = -refl(&y);
            let dev = hermiticity_error(&t12).max(hermiticity_error(&t3));
            if dev > 1e-12 {
                return Err(Error::NotHermitian(dev));
            }
            let h = LocalHamiltonian::new(pattern.clone(), vec![(vec![0, 1], t12), (vec![2], t3)], 0.0)?;
            let perp = ket("000").scale(lxy) - kron_vec(&kron_vec(&ket("1"), &x), &y).scale(a.lambda0);
            let r = perp.dotc(&(h.assemble_matrix() * &perp)).re;
            Ok(if r < 0.0 { h.scale(-1.0) } else { h })
        }
    }
}

/// Verified `{1,2},{2,3}`-local parent of an Acin-form state.
///
/// Tries the frustration-free projectors, the printed splitting term, a
/// local splitting operator and the thermal path, in that order. GHZ-type
/// states, and states whose certificate shows leakage, are rejected with
/// [`Error::NotKCorrelated`].
pub fn three_qubit_parent(a: &AcinForm) -> Result<ThreeQubitParent> {
    let pattern = chain3();
    let psi = a.ket();
    let v = Subspace::from_ket(SystemShape::qubits(3), &psi)?;
    let branch = a.branch();
    if a.is_ghz_type() {
        return Err(Error::NotKCorrelated("GHZ-type state: ⟨0|x⟩ = ⟨0|y⟩ = 0 on the degenerate branch".into()));
    }
    let mut attempts = Vec::new();
    let done = |h: LocalHamiltonian, route, bound, attempts| {
        let report = verify_ground_space(&h, &v, VERIFY_TOL);
        ThreeQubitParent { hamiltonian: h, route, branch, bound, report, attempts }
    };

    let (h0, w) = ff_hamiltonian(&v, &pattern)?;
    if w.dim() == 1 {
        let rep = verify_ground_space(&h0, &v, VERIFY_TOL);
        if rep.pass {
            return Ok(done(h0, ParentRoute::FrustrationFree, None, attempts));
        }
        attempts.push((ParentRoute::FrustrationFree, "verification failed".to_string()));
    } else {
        attempts.push((ParentRoute::FrustrationFree, format!("FF space has dimension {}", w.dim())));
    }

    match analytic_splitting(a, &pattern).and_then(|h1| perturb_combine(&h0, &h1, &v)) {
        Ok((bound, h)) => return Ok(done(h, ParentRoute::Analytic, Some(bound), attempts)),
        Err(e) => attempts.push((ParentRoute::Analytic, e.to_string())),
    }
    match splitting_operator(&v, &w, &pattern).and_then(|h1| perturb_combine(&h0, &h1, &v)) {
        Ok((bound, h)) => return Ok(done(h, ParentRoute::SplittingOperator, Some(bound), attempts)),
        Err(e) => attempts.push((ParentRoute::SplittingOperator, e.to_string())),
    }
    match thermal_path(&v, &pattern, &PathConfig::default()) {
        Ok(tp) => {
            let rep = verify_ground_space(&tp.hamiltonian, &v, VERIFY_TOL);
            if rep.pass {
                return Ok(done(tp.hamiltonian, ParentRoute::ThermalPath, None, attempts));
            }
            attempts.push((ParentRoute::ThermalPath, format!("ground-space overlap {:.6}", rep.overlap)));
        }
        Err(e) => attempts.push((ParentRoute::ThermalPath, e.to_string())),
    }
    let cert = leakage(&v, &pattern, &LeakageConfig::default())?;
    let summary = attempts.iter().map(|(r, m)| format!("{r}: {m}")).collect::<Vec<_>>().join("; ");
    if cert.verdict == Verdict::NotCorrelated {
        return Err(Error::NotKCorrelated(format!("leakage {:.6} ({summary})", cert.leakage)));
    }
    Err(Error::NoParentFound(summary))
}

/// Parent for an arbitrary three-qubit state, through its Acin form.
pub fn three_qubit_parent_of_state(psi: &CVec) -> Result<ThreeQubitParent> {
    let (form, u) = acin_form(psi)?;
    let mut out = three_qubit_parent(&form)?;
    let back: Vec<CMat> = u.iter().map(|x| x.adjoint()).collect();
    out.hamiltonian = out.hamiltonian.conjugate_local(&back)?;
    let v = Subspace::from_ket(SystemShape::qubits(3), psi)?;
    out.report = verify_ground_space(&out.hamiltonian, &v, VERIFY_TOL);
    if !out.report.pass {
        return Err(Error::NoParentFound("conjugated parent failed verification".into()));
    }
    Ok(out)
}
