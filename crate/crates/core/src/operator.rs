//! Dense Hermitian algebra on tensor-product spaces.
//!
//! Particle 0 is the most significant tensor factor, so `Z` on particle 0 of
//! two qubits is `diag(1, 1, -1, -1)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Relative eigenvalue cutoff used for every rank decision.
pub const RANK_CUTOFF: f64 = 1e-10;
/// Eigenvalues below this are treated as exact zeros in entropies and logarithms.
pub const SUPPORT_CUTOFF: f64 = 1e-14;
pub const MAX_DIM: usize = 4096;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SystemShape {
    dims: Vec<usize>,
}

impl SystemShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidShape("no particles".into()));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidShape(format!("local dimension {d} < 2")));
        }
        let mut total: usize = 1;
        for &d in &dims {
            total = total.saturating_mul(d);
        }
        if total > MAX_DIM {
            return Err(Error::InvalidShape(format!("total dimension {total} exceeds cap {MAX_DIM}")));
        }
        Ok(Self { dims })
    }

    pub fn qubits(n: usize) -> Self {
        Self::new(vec![2; n]).expect("qubit shape")
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n(&self) -> usize {
        self.dims.len()
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_qubits(&self) -> bool {
        self.dims.iter().all(|&d| d == 2)
    }

    pub fn check_subset(&self, subset: &[usize]) -> Result<()> {
        if subset.is_empty() {
            return Err(Error::EmptySubset);
        }
        for (i, &q) in subset.iter().enumerate() {
            if q >= self.n() {
                return Err(Error::IndexOutOfRange { index: q, n: self.n() });
            }
            if subset[..i].contains(&q) {
                return Err(Error::DuplicateIndex(q));
            }
        }
        Ok(())
    }

    /// Dimension of the tensor factor on `subset`.
    pub fn sub_dim(&self, subset: &[usize]) -> usize {
        subset.iter().map(|&q| self.dims[q]).product()
    }

    pub fn sub_shape(&self, subset: &[usize]) -> Result<SystemShape> {
        self.check_subset(subset)?;
        SystemShape::new(subset.iter().map(|&q| self.dims[q]).collect())
    }
}

/// Global index bookkeeping for a bipartition into `subset` (in the given
/// order) and its complement (ascending).
pub(crate) struct Split {
    pub sub: usize,
    pub rest: usize,
    /// `map[r * sub + a]` is the global index with complement index `r`
    /// and subset index `a`.
    pub map: Vec<usize>,
}

pub(crate) fn split(shape: &SystemShape, subset: &[usize]) -> Split {
    let dims = shape.dims();
    let n = dims.len();
    let comp: Vec<usize> = (0..n).filter(|q| !subset.contains(q)).collect();
    let sub: usize = subset.iter().map(|&q| dims[q]).product();
    let rest: usize = comp.iter().map(|&q| dims[q]).product();
    let total = shape.total();
    let mut map = vec![0usize; total];
    let mut digits = vec![0usize; n];
    for g in 0..total {
        let mut x = g;
        for q in (0..n).rev() {
            digits[q] = x % dims[q];
            x /= dims[q];
        }
        let mut a = 0;
        for &q in subset {
            a = a * dims[q] + digits[q];
        }
        let mut r = 0;
        for &q in &comp {
            r = r * dims[q] + digits[q];
        }
        map[r * sub + a] = g;
    }
    Split { sub, rest, map }
}

/// `op ⊗ I` with `op` acting on `subset` (tensor factors of `op` follow the
/// order of `subset`).
pub fn tensor_embed(op: &CMat, subset: &[usize], shape: &SystemShape) -> Result<CMat> {
    shape.check_subset(subset)?;
    let d = shape.sub_dim(subset);
    if op.nrows() != d || op.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, found: op.nrows() });
    }
    let sp = split(shape, subset);
    let total = shape.total();
    let mut out = CMat::zeros(total, total);
    for r in 0..sp.rest {
        let base = r * sp.sub;
        for a in 0..sp.sub {
            let ga = sp.map[base + a];
            for b in 0..sp.sub {
                let v = op[(a, b)];
                if v != C64::new(0.0, 0.0) {
                    out[(ga, sp.map[base + b])] = v;
                }
            }
        }
    }
    Ok(out)
}

/// Reduced operator on `keep` (any operator, not only states).
pub fn partial_trace(rho: &CMat, shape: &SystemShape, keep: &[usize]) -> Result<CMat> {
    shape.check_subset(keep)?;
    let total = shape.total();
    if rho.nrows() != total || rho.ncols() != total {
        return Err(Error::DimensionMismatch { expected: total, found: rho.nrows() });
    }
    let sp = split(shape, keep);
    let mut out = CMat::zeros(sp.sub, sp.sub);
    for r in 0..sp.rest {
        let base = r * sp.sub;
        for a in 0..sp.sub {
            let ga = sp.map[base + a];
            for b in 0..sp.sub {
                out[(a, b)] += rho[(ga, sp.map[base + b])];
            }
        }
    }
    Ok(out)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermiticity_error(m: &CMat) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut e: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            e = e.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    e
}

/// Hermitian part `(m + m†)/2`.
pub fn herm(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// `Tr(a b)`.
pub fn tr_prod(a: &CMat, b: &CMat) -> C64 {
    let n = a.nrows();
    let mut s = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            s += a[(i, j)] * b[(j, i)];
        }
    }
    s
}

/// `Re Tr(a b)` for Hermitian `a`, `b`, computed as `Σ a_ij conj(b_ij)`.
pub fn inner(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

pub fn trace_re(m: &CMat) -> f64 {
    (0..m.nrows()).map(|i| m[(i, i)].re).sum()
}

#[derive(Clone, Debug)]
pub struct Eigh {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `values`.
    pub vectors: CMat,
}

impl Eigh {
    pub fn columns(&self, idx: &[usize]) -> CMat {
        let d = self.vectors.nrows();
        let mut out = CMat::zeros(d, idx.len());
        for (k, &i) in idx.iter().enumerate() {
            out.set_column(k, &self.vectors.column(i));
        }
        out
    }

    /// Indices of eigenvalues within `tol` of the minimum.
    pub fn ground_indices(&self, tol: f64) -> Vec<usize> {
        let e0 = self.values[0];
        (0..self.values.len()).filter(|&i| self.values[i] - e0 <= tol).collect()
    }
}

/// Eigendecomposition of the Hermitian part of `m`; callers guarantee `m` is
/// Hermitian up to rounding.
pub fn eigh_herm(m: &CMat) -> Eigh {
    let n = m.nrows();
    if n == 0 {
        return Eigh { values: vec![], vectors: CMat::zeros(0, 0) };
    }
    let se = SymmetricEigen::new(herm(m));
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values = idx.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (k, &i) in idx.iter().enumerate() {
        vectors.set_column(k, &se.eigenvectors.column(i));
    }
    Eigh { values, vectors }
}

pub fn eigh(m: &CMat) -> Result<Eigh> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
    }
    let dev = hermiticity_error(m);
    if dev > 1e-10 * max_abs(m).max(1.0) {
        return Err(Error::NotHermitian(dev));
    }
    Ok(eigh_herm(m))
}

/// `f` applied to the spectrum of a Hermitian matrix.
pub fn apply_fn(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let e = eigh_herm(m);
    from_spectrum(&e, f)
}

pub fn from_spectrum(e: &Eigh, f: impl Fn(f64) -> f64) -> CMat {
    let mut scaled = e.vectors.clone();
    for (k, &w) in e.values.iter().enumerate() {
        let fw = f(w);
        scaled.column_mut(k).scale_mut(fw);
    }
    &scaled * e.vectors.adjoint()
}

pub fn exp_herm(m: &CMat) -> CMat {
    apply_fn(m, f64::exp)
}

/// Spectral norm of a Hermitian matrix.
pub fn op_norm(m: &CMat) -> f64 {
    let e = eigh_herm(m);
    e.values.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

/// `λ → log λ` on eigenvalues above `SUPPORT_CUTOFF`, zero on the kernel.
pub fn log_on_support(rho: &CMat) -> Result<CMat> {
    let e = eigh(rho)?;
    if e.values.last().copied().unwrap_or(0.0) <= SUPPORT_CUTOFF {
        return Err(Error::ZeroMatrix);
    }
    Ok(from_spectrum(&e, |w| if w > SUPPORT_CUTOFF { w.ln() } else { 0.0 }))
}

pub fn entropy_of_spectrum(values: &[f64]) -> f64 {
    values.iter().filter(|&&w| w > SUPPORT_CUTOFF).map(|&w| -w * w.ln()).sum::<f64>().max(0.0)
}

/// Von Neumann entropy in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of_spectrum(&eigh_herm(rho.matrix()).values)
}

/// Orthonormal basis of the span of the columns of `m`, using the relative
/// singular-value cutoff `rel`.
pub fn orthonormal_span(m: &CMat, rel: f64) -> CMat {
    let d = m.nrows();
    if m.ncols() == 0 {
        return CMat::zeros(d, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if top <= 0.0 {
        return CMat::zeros(d, 0);
    }
    let idx: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > rel * top).collect();
    let mut out = CMat::zeros(d, idx.len());
    for (k, &i) in idx.iter().enumerate() {
        out.set_column(k, &u.column(i));
    }
    out
}

/// Orthonormal basis of the orthogonal complement of the column span of an
/// orthonormal `q` (in a space of dimension `q.nrows()`).
pub fn complement_basis(q: &CMat) -> CMat {
    let d = q.nrows();
    let p = CMat::identity(d, d) - q * q.adjoint();
    let e = eigh_herm(&p);
    let idx: Vec<usize> = (0..d).filter(|&i| e.values[i] > 0.5).collect();
    e.columns(&idx)
}

#[derive(Clone, Debug)]
pub struct HermitianOperator {
    shape: SystemShape,
    matrix: CMat,
}

impl HermitianOperator {
    pub fn new(shape: SystemShape, matrix: CMat) -> Result<Self> {
        let d = shape.total();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: matrix.nrows() });
        }
        let dev = hermiticity_error(&matrix);
        if dev > 1e-12 * max_abs(&matrix).max(1.0) {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self { shape, matrix: herm(&matrix) })
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }
}

#[derive(Clone, Debug)]
pub struct DensityMatrix {
    shape: SystemShape,
    matrix: CMat,
}

impl DensityMatrix {
    pub fn new(shape: SystemShape, matrix: CMat) -> Result<Self> {
        let d = shape.total();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: matrix.nrows() });
        }
        let dev = hermiticity_error(&matrix);
        if dev > 1e-10 {
            return Err(Error::NotHermitian(dev));
        }
        let matrix = herm(&matrix);
        let tr = trace_re(&matrix);
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        let lo = eigh_herm(&matrix).values[0];
        if lo < -1e-10 {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {lo:.3e}")));
        }
        Ok(Self { shape, matrix })
    }

    pub fn from_ket(shape: SystemShape, psi: &CVec) -> Result<Self> {
        let nrm = psi.norm();
        if nrm == 0.0 {
            return Err(Error::InvalidDensity("zero vector".into()));
        }
        let v = psi.unscale(nrm);
        Self::new(shape, &v * v.adjoint())
    }

    pub fn maximally_mixed(shape: SystemShape) -> Self {
        let d = shape.total();
        let matrix = CMat::identity(d, d).unscale(d as f64);
        Self { shape, matrix }
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn entropy(&self) -> f64 {
        von_neumann_entropy(self)
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let m = partial_trace(&self.matrix, &self.shape, keep)?;
        Ok(DensityMatrix { shape: self.shape.sub_shape(keep)?, matrix: herm(&m) })
    }

    /// Support of the state with the relative cutoff `rel`.
    pub fn range(&self, rel: f64) -> Subspace {
        Subspace::range_of(&self.shape, &self.matrix, rel).expect("a density matrix has nonzero trace")
    }
}

/// Half of the trace norm of the difference.
pub fn trace_distance(a: &CMat, b: &CMat) -> f64 {
    0.5 * eigh_herm(&(a - b)).values.iter().map(|v| v.abs()).sum::<f64>()
}

pub fn trace_norm(m: &CMat) -> f64 {
    eigh_herm(m).values.iter().map(|v| v.abs()).sum()
}

#[derive(Clone, Debug)]
pub struct Subspace {
    shape: SystemShape,
    basis: CMat,
    projector: CMat,
}

impl Subspace {
    /// `basis` must have orthonormal columns.
    pub fn new(shape: SystemShape, basis: CMat) -> Result<Self> {
        let d = shape.total();
        if basis.nrows() != d {
            return Err(Error::DimensionMismatch { expected: d, found: basis.nrows() });
        }
        let r = basis.ncols();
        if r == 0 || r > d {
            return Err(Error::InvalidSubspace(format!("dimension {r} not in 1..={d}")));
        }
        let g = basis.adjoint() * &basis - CMat::identity(r, r);
        if max_abs(&g) > 1e-10 {
            return Err(Error::InvalidSubspace("basis columns are not orthonormal".into()));
        }
        let projector = herm(&(&basis * basis.adjoint()));
        Ok(Self { shape, basis, projector })
    }

    /// Span of arbitrary (nonzero, possibly dependent) columns.
    pub fn span(shape: SystemShape, vectors: &CMat) -> Result<Self> {
        let q = orthonormal_span(vectors, RANK_CUTOFF);
        if q.ncols() == 0 {
            return Err(Error::InvalidSubspace("vectors span the zero space".into()));
        }
        Self::new(shape, q)
    }

    pub fn from_ket(shape: SystemShape, psi: &CVec) -> Result<Self> {
        let nrm = psi.norm();
        if nrm == 0.0 {
            return Err(Error::InvalidSubspace("zero vector".into()));
        }
        let v = psi.unscale(nrm);
        Self::new(shape, CMat::from_column_slice(v.len(), 1, v.as_slice()))
    }

    /// Eigenvectors of a positive operator with eigenvalue above `rel · λ_max`.
    pub fn range_of(shape: &SystemShape, m: &CMat, rel: f64) -> Result<Self> {
        let e = eigh_herm(m);
        let top = e.values.last().copied().unwrap_or(0.0);
        if top <= 0.0 {
            return Err(Error::ZeroMatrix);
        }
        let idx: Vec<usize> = (0..e.values.len()).filter(|&i| e.values[i] > rel * top).collect();
        Self::new(shape.clone(), e.columns(&idx))
    }

    pub fn full(shape: SystemShape) -> Self {
        let d = shape.total();
        Self::new(shape, CMat::identity(d, d)).expect("identity basis")
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    pub fn projector(&self) -> &CMat {
        &self.projector
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// ρ_V, the maximally mixed state on the subspace.
    pub fn mixed_state(&self) -> DensityMatrix {
        DensityMatrix { shape: self.shape.clone(), matrix: self.projector.unscale(self.dim() as f64) }
    }

    pub fn complement(&self) -> Option<Subspace> {
        let q = complement_basis(&self.basis);
        if q.ncols() == 0 {
            None
        } else {
            Subspace::new(self.shape.clone(), q).ok()
        }
    }

    /// Part of `self` orthogonal to `inner` (which should be contained in `self`).
    pub fn minus(&self, inner: &Subspace) -> Option<Subspace> {
        let d = self.shape.total();
        let p = &self.projector * (CMat::identity(d, d) - &inner.projector) * &self.projector;
        Subspace::range_of(&self.shape, &herm(&p), 0.5).ok()
    }

    /// `None` when the intersection is trivial.
    pub fn intersect(&self, other: &Subspace, tol: f64) -> Option<Subspace> {
        intersect_all(&[self.clone(), other.clone()], tol)
    }

    /// True iff `other ⊆ self` within `tol`.
    pub fn contains(&self, other: &Subspace, tol: f64) -> bool {
        let d = self.shape.total();
        let rej = (CMat::identity(d, d) - &self.projector) * &other.basis;
        max_abs(&rej) <= tol
    }

    pub fn equals(&self, other: &Subspace, tol: f64) -> bool {
        self.contains(other, tol) && other.contains(self, tol)
    }

    /// `Tr(P_A P_B) / max(dim A, dim B)`; equal to 1 exactly when the spaces coincide.
    pub fn overlap(&self, other: &Subspace) -> f64 {
        let m = self.basis.adjoint() * &other.basis;
        let s: f64 = m.iter().map(|z| z.norm_sqr()).sum();
        s / self.dim().max(other.dim()) as f64
    }
}

/// Common part of several subspaces: eigenvectors of `Σ P_i` with eigenvalue
/// at least `k - tol`.
pub fn intersect_all(spaces: &[Subspace], tol: f64) -> Option<Subspace> {
    let first = spaces.first()?;
    let d = first.shape.total();
    let mut sum = CMat::zeros(d, d);
    for s in spaces {
        sum += &s.projector;
    }
    let k = spaces.len() as f64;
    let e = eigh_herm(&sum);
    let idx: Vec<usize> = (0..d).filter(|&i| e.values[i] >= k - tol).collect();
    if idx.is_empty() {
        return None;
    }
    Subspace::new(first.shape.clone(), e.columns(&idx)).ok()
}

/// Computational basis ket from a digit string over the local dimensions.
pub fn basis_ket(shape: &SystemShape, digits: &[usize]) -> CVec {
    let mut idx = 0;
    for (q, &dq) in shape.dims().iter().enumerate() {
        idx = idx * dq + digits[q];
    }
    let mut v = CVec::zeros(shape.total());
    v[idx] = C64::new(1.0, 0.0);
    v
}

/// Ket from a bit string such as `"0101"`.
pub fn ket(bits: &str) -> CVec {
    let n = bits.len();
    let digits: Vec<usize> = bits.bytes().map(|b| (b - b'0') as usize).collect();
    basis_ket(&SystemShape::qubits(n), &digits)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_all(ops: &[CMat]) -> CMat {
    let mut out = CMat::identity(1, 1);
    for o in ops {
        out = out.kronecker(o);
    }
    out
}

pub fn outer(v: &CVec) -> CMat {
    v * v.adjoint()
}

pub mod pauli {
    use super::{c64, CMat};

    pub fn i2() -> CMat {
        CMat::identity(2, 2)
    }
    pub fn x() -> CMat {
        CMat::from_row_slice(2, 2, &[c64(0., 0.), c64(1., 0.), c64(1., 0.), c64(0., 0.)])
    }
    pub fn y() -> CMat {
        CMat::from_row_slice(2, 2, &[c64(0., 0.), c64(0., -1.), c64(0., 1.), c64(0., 0.)])
    }
    pub fn z() -> CMat {
        CMat::from_row_slice(2, 2, &[c64(1., 0.), c64(0., 0.), c64(0., 0.), c64(-1., 0.)])
    }
    /// Index 0..4 ↦ I, X, Y, Z.
    pub fn by_index(k: usize) -> CMat {
        match k {
            0 => i2(),
            1 => x(),
            2 => y(),
            3 => z(),
            _ => panic!("Pauli index {k}"),
        }
    }
}
