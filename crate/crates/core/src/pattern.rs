//! Interaction patterns, marginal vectors, local operator bases and local
//! Hamiltonians.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::operator::{
    c64, herm, hermiticity_error, inner, kron_all, max_abs, partial_trace, tensor_embed, CMat, DensityMatrix,
    SystemShape,
};

/// Ordered list of particle subsets. Indices are 0-based internally and
/// 1-based in the text syntax (`"1,2;2,3"`). Each subset is stored sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    shape: SystemShape,
    subsets: Vec<Vec<usize>>,
}

impl Pattern {
    pub fn new(shape: SystemShape, subsets: Vec<Vec<usize>>) -> Result<Self> {
        if subsets.is_empty() {
            return Err(Error::InvalidParameter("pattern has no subsets".into()));
        }
        let mut out = Vec::with_capacity(subsets.len());
        for mut s in subsets {
            shape.check_subset(&s)?;
            s.sort_unstable();
            out.push(s);
        }
        Ok(Self { shape, subsets: out })
    }

    /// Parses `"1,2;2,3"`.
    pub fn parse(shape: SystemShape, text: &str) -> Result<Self> {
        let n = shape.n();
        let mut subsets = Vec::new();
        for part in text.split(';') {
            let part = part.trim();
            if part.is_empty() {
                return Err(Error::Parse(format!("empty subset in pattern `{text}`")));
            }
            let mut s = Vec::new();
            for tok in part.split(',') {
                let tok = tok.trim();
                let i: usize =
                    tok.parse().map_err(|_| Error::Parse(format!("bad particle index `{tok}` in `{text}`")))?;
                if i == 0 || i > n {
                    return Err(Error::Parse(format!("particle index {i} out of range 1..={n} in `{text}`")));
                }
                if s.contains(&(i - 1)) {
                    return Err(Error::Parse(format!("particle index {i} repeated in `{part}`")));
                }
                s.push(i - 1);
            }
            subsets.push(s);
        }
        Self::new(shape, subsets)
    }

    /// Nearest-neighbour chain `{1,2},…,{n−1,n}`.
    pub fn chain(shape: SystemShape) -> Result<Self> {
        let n = shape.n();
        Self::new(shape, (0..n.saturating_sub(1)).map(|i| vec![i, i + 1]).collect())
    }

    /// Chain closed by `{n,1}`.
    pub fn ring(shape: SystemShape) -> Result<Self> {
        let n = shape.n();
        let mut s: Vec<Vec<usize>> = (0..n - 1).map(|i| vec![i, i + 1]).collect();
        s.push(vec![n - 1, 0]);
        Self::new(shape, s)
    }

    pub fn all_pairs(shape: SystemShape) -> Result<Self> {
        let n = shape.n();
        let mut s = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                s.push(vec![i, j]);
            }
        }
        Self::new(shape, s)
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    /// First subset (in pattern order) containing every index of `support`.
    pub fn owner_of(&self, support: &[usize]) -> Option<usize> {
        self.subsets.iter().position(|s| support.iter().all(|q| s.contains(q)))
    }

    /// Subsets lying inside `region`, relabelled to positions within `region`
    /// (which is taken in ascending order).
    pub fn restrict(&self, region: &[usize]) -> Result<Pattern> {
        let mut reg = region.to_vec();
        reg.sort_unstable();
        let shape = self.shape.sub_shape(&reg)?;
        let subs: Vec<Vec<usize>> = self
            .subsets
            .iter()
            .filter(|s| s.iter().all(|q| reg.contains(q)))
            .map(|s| s.iter().map(|q| reg.iter().position(|r| r == q).unwrap()).collect())
            .collect();
        if subs.is_empty() {
            return Err(Error::PatternMismatch(format!(
                "no subset of {self} lies inside {:?}",
                region.iter().map(|q| q + 1).collect::<Vec<_>>()
            )));
        }
        Pattern::new(shape, subs)
    }

    /// Subsets of `self` followed by those of `other` not already present.
    pub fn union(&self, other: &Pattern) -> Result<Pattern> {
        if self.shape != other.shape {
            return Err(Error::PatternMismatch("different system shapes".into()));
        }
        let mut subs = self.subsets.clone();
        for s in &other.subsets {
            if !subs.contains(s) {
                subs.push(s.clone());
            }
        }
        Pattern::new(self.shape.clone(), subs)
    }

    pub fn to_text(&self) -> String {
        self.subsets
            .iter()
            .map(|s| s.iter().map(|q| (q + 1).to_string()).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
            .join(";")
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// `(γ_{K_1}, …, γ_{K_M})`.
#[derive(Clone, Debug)]
pub struct MarginalVector {
    pattern: Pattern,
    marginals: Vec<CMat>,
}

impl MarginalVector {
    pub fn new(pattern: Pattern, marginals: Vec<CMat>) -> Result<Self> {
        if marginals.len() != pattern.len() {
            return Err(Error::DimensionMismatch { expected: pattern.len(), found: marginals.len() });
        }
        for (s, m) in pattern.subsets().iter().zip(&marginals) {
            let d = pattern.shape().sub_dim(s);
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::DimensionMismatch { expected: d, found: m.nrows() });
            }
            DensityMatrix::new(pattern.shape().sub_shape(s)?, m.clone())?;
        }
        Ok(Self { pattern, marginals })
    }

    pub fn pattern(&self) -> &Pattern {
        &self.pattern
    }

    pub fn marginals(&self) -> &[CMat] {
        &self.marginals
    }

    /// Entrywise max-abs distance.
    pub fn max_diff(&self, other: &MarginalVector) -> f64 {
        self.marginals.iter().zip(&other.marginals).map(|(a, b)| max_abs(&(a - b))).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &MarginalVector, tol: f64) -> bool {
        self.pattern == other.pattern && self.max_diff(other) <= tol
    }

    /// Largest per-subset trace-norm distance.
    pub fn trace_norm_diff(&self, other: &MarginalVector) -> f64 {
        self.marginals
            .iter()
            .zip(&other.marginals)
            .map(|(a, b)| crate::operator::trace_norm(&(a - b)))
            .fold(0.0, f64::max)
    }

    /// Reduced state on `support`, taken from the first subset containing it.
    pub fn reduced(&self, support: &[usize]) -> Result<CMat> {
        let j = self
            .pattern
            .owner_of(support)
            .ok_or_else(|| Error::PatternMismatch(format!("support {support:?} not inside any subset")))?;
        let sub = &self.pattern.subsets()[j];
        let pos: Vec<usize> = support.iter().map(|q| sub.iter().position(|r| r == q).unwrap()).collect();
        let shape = self.pattern.shape().sub_shape(sub)?;
        partial_trace(&self.marginals[j], &shape, &pos)
    }
}

pub fn rdm_vector(rho: &DensityMatrix, pattern: &Pattern) -> Result<MarginalVector> {
    if rho.shape() != pattern.shape() {
        return Err(Error::PatternMismatch("state and pattern shapes differ".into()));
    }
    rdm_vector_of(rho.matrix(), pattern)
}

/// Marginals of an arbitrary operator; used where the argument need not be a state.
pub fn rdm_vector_of(rho: &CMat, pattern: &Pattern) -> Result<MarginalVector> {
    let marginals = pattern
        .subsets()
        .iter()
        .map(|s| partial_trace(rho, pattern.shape(), s).map(|m| herm(&m)))
        .collect::<Result<Vec<_>>>()?;
    Ok(MarginalVector { pattern: pattern.clone(), marginals })
}

/// Generalized Gell-Mann matrices for dimension `d`, identity first, each
/// non-identity element normalized to `Tr λ² = 2`. For `d = 2` this is
/// `I, X, Y, Z`.
pub fn gell_mann(d: usize) -> Vec<CMat> {
    let mut out = vec![CMat::identity(d, d)];
    let mut sym = Vec::new();
    let mut asym = Vec::new();
    for j in 0..d {
        for k in j + 1..d {
            let mut s = CMat::zeros(d, d);
            s[(j, k)] = c64(1.0, 0.0);
            s[(k, j)] = c64(1.0, 0.0);
            sym.push(s);
            let mut a = CMat::zeros(d, d);
            a[(j, k)] = c64(0.0, -1.0);
            a[(k, j)] = c64(0.0, 1.0);
            asym.push(a);
        }
    }
    out.extend(sym.into_iter().zip(asym).flat_map(|(s, a)| [s, a]));
    for l in 1..d {
        let f = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut m = CMat::zeros(d, d);
        for j in 0..l {
            m[(j, j)] = c64(f, 0.0);
        }
        m[(l, l)] = c64(-(l as f64) * f, 0.0);
        out.push(m);
    }
    out
}

#[derive(Clone, Debug)]
pub struct BasisElement {
    /// Gell-Mann label per particle (0 is the identity).
    pub labels: Vec<usize>,
    pub support: Vec<usize>,
    /// Owning subset; `None` for the identity.
    pub owner: Option<usize>,
    /// The element as an operator on its owning subset.
    pub local: CMat,
    /// The element on the full space.
    pub full: CMat,
    /// `Tr(B²)`.
    pub norm_sq: f64,
}

/// Trace-orthogonal basis of the `K`-local operators, identity first.
#[derive(Clone, Debug)]
pub struct LocalBasis {
    pattern: Pattern,
    elements: Vec<BasisElement>,
}

impl LocalBasis {
    pub fn new(pattern: &Pattern) -> Self {
        let shape = pattern.shape();
        let dims = shape.dims();
        let n = shape.n();
        let gm: Vec<Vec<CMat>> = dims.iter().map(|&d| gell_mann(d)).collect();
        let total = shape.total();
        let mut elements = vec![BasisElement {
            labels: vec![0; n],
            support: vec![],
            owner: None,
            local: CMat::identity(1, 1),
            full: CMat::identity(total, total),
            norm_sq: total as f64,
        }];
        let mut seen: BTreeMap<Vec<usize>, ()> = BTreeMap::new();
        seen.insert(vec![0; n], ());
        for (k, sub) in pattern.subsets().iter().enumerate() {
            let radices: Vec<usize> = sub.iter().map(|&q| dims[q] * dims[q]).collect();
            let count: usize = radices.iter().product();
            for code in 0..count {
                let mut x = code;
                let mut assign = vec![0usize; sub.len()];
                for i in (0..sub.len()).rev() {
                    assign[i] = x % radices[i];
                    x /= radices[i];
                }
                let mut labels = vec![0usize; n];
                for (i, &q) in sub.iter().enumerate() {
                    labels[q] = assign[i];
                }
                if seen.contains_key(&labels) {
                    continue;
                }
                seen.insert(labels.clone(), ());
                let support: Vec<usize> = sub.iter().copied().filter(|&q| labels[q] != 0).collect();
                let factors: Vec<CMat> = sub.iter().map(|&q| gm[q][labels[q]].clone()).collect();
                let local = kron_all(&factors);
                let full = tensor_embed(&local, sub, shape).expect("valid subset");
                let norm_sq = inner(&full, &full);
                elements.push(BasisElement { labels, support, owner: Some(k), local, full, norm_sq });
            }
        }
        Self { pattern: pattern.clone(), elements }
    }

    pub fn pattern(&self) -> &Pattern {
        &self.pattern
    }

    pub fn elements(&self) -> &[BasisElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `Tr(ρ B_k)` for every element, read off the marginals.
    pub fn expectations(&self, x: &MarginalVector) -> Vec<f64> {
        self.elements
            .iter()
            .map(|e| match e.owner {
                None => 1.0,
                Some(j) => inner(&x.marginals[j], &e.local),
            })
            .collect()
    }

    /// `Σ_k a_k B_k` on the full space (`a` indexed like the elements).
    pub fn combine(&self, a: &[f64]) -> CMat {
        let d = self.pattern.shape().total();
        let mut m = CMat::zeros(d, d);
        for (e, &c) in self.elements.iter().zip(a) {
            if c != 0.0 {
                m += e.full.scale(c);
            }
        }
        m
    }

    /// Orthonormal basis (as columns, in coordinates over the normalized
    /// elements `B_k/‖B_k‖`) of the operators `A` in the span with `A·V = 0`.
    pub fn annihilators(&self, v: &crate::operator::Subspace) -> nalgebra::DMatrix<f64> {
        let m = self.len();
        let q = v.basis();
        let rows = 2 * q.nrows() * q.ncols();
        let mut r = nalgebra::DMatrix::<f64>::zeros(rows.max(m), m);
        for (k, e) in self.elements.iter().enumerate() {
            let bv = (&e.full * q).unscale(e.norm_sq.sqrt());
            for (i, z) in bv.iter().enumerate() {
                r[(2 * i, k)] = z.re;
                r[(2 * i + 1, k)] = z.im;
            }
        }
        let svd = r.svd(false, true);
        let vt = svd.v_t.expect("right singular vectors requested");
        let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..m).filter(|&i| svd.singular_values[i] <= 1e-9 * top).collect();
        nalgebra::DMatrix::from_fn(m, keep.len(), |i, j| vt[(keep[j], i)])
    }

    /// Coefficients of the orthogonal projection of a Hermitian `h`.
    pub fn coefficients(&self, h: &CMat) -> Vec<f64> {
        self.elements.iter().map(|e| inner(&e.full, h) / e.norm_sq).collect()
    }

    /// Local Hamiltonian with one term per owning subset.
    pub fn hamiltonian(&self, a: &[f64]) -> LocalHamiltonian {
        let shape = self.pattern.shape();
        let mut ops: Vec<CMat> = self
            .pattern
            .subsets()
            .iter()
            .map(|s| {
                let d = shape.sub_dim(s);
                CMat::zeros(d, d)
            })
            .collect();
        let mut offset = 0.0;
        for (e, &c) in self.elements.iter().zip(a) {
            match e.owner {
                None => offset += c,
                Some(j) => ops[j] += e.local.scale(c),
            }
        }
        let terms =
            self.pattern.subsets().iter().zip(ops).map(|(s, op)| LocalTerm { support: s.clone(), op }).collect();
        LocalHamiltonian { pattern: self.pattern.clone(), terms, offset }
    }
}

pub fn local_basis(pattern: &Pattern) -> LocalBasis {
    LocalBasis::new(pattern)
}

#[derive(Clone, Debug)]
pub struct LocalTerm {
    /// Ascending particle indices.
    pub support: Vec<usize>,
    pub op: CMat,
}

/// `H = Σ_j H_j + offset·I`, each term supported inside a pattern subset.
#[derive(Clone, Debug)]
pub struct LocalHamiltonian {
    pattern: Pattern,
    terms: Vec<LocalTerm>,
    offset: f64,
}

impl LocalHamiltonian {
    /// Terms may be given on any ordering of their support; they are stored
    /// on the ascending ordering.
    pub fn new(pattern: Pattern, terms: Vec<(Vec<usize>, CMat)>, offset: f64) -> Result<Self> {
        let shape = pattern.shape().clone();
        let mut out = Vec::with_capacity(terms.len());
        for (support, op) in terms {
            shape.check_subset(&support)?;
            let d = shape.sub_dim(&support);
            if op.nrows() != d || op.ncols() != d {
                return Err(Error::DimensionMismatch { expected: d, found: op.nrows() });
            }
            let dev = hermiticity_error(&op);
            if dev > 1e-12 * max_abs(&op).max(1.0) {
                return Err(Error::NotHermitian(dev));
            }
            if pattern.owner_of(&support).is_none() {
                return Err(Error::PatternMismatch(format!(
                    "term on {:?} is not inside any subset of {pattern}",
                    support.iter().map(|q| q + 1).collect::<Vec<_>>()
                )));
            }
            let mut sorted = support.clone();
            sorted.sort_unstable();
            let op = if sorted == support {
                herm(&op)
            } else {
                let sub_shape = shape.sub_shape(&sorted)?;
                let pos: Vec<usize> = support.iter().map(|q| sorted.iter().position(|r| r == q).unwrap()).collect();
                herm(&tensor_embed(&op, &pos, &sub_shape)?)
            };
            out.push(LocalTerm { support: sorted, op });
        }
        Ok(Self { pattern, terms: out, offset })
    }

    pub fn zero(pattern: Pattern) -> Self {
        Self { pattern, terms: vec![], offset: 0.0 }
    }

    pub fn pattern(&self) -> &Pattern {
        &self.pattern
    }

    pub fn shape(&self) -> &SystemShape {
        self.pattern.shape()
    }

    pub fn terms(&self) -> &[LocalTerm] {
        &self.terms
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    pub fn assemble_matrix(&self) -> CMat {
        let shape = self.pattern.shape();
        let d = shape.total();
        let mut m = CMat::identity(d, d).scale(self.offset);
        for t in &self.terms {
            m += tensor_embed(&t.op, &t.support, shape).expect("validated term");
        }
        m
    }

    pub fn assemble(&self) -> crate::operator::HermitianOperator {
        crate::operator::HermitianOperator::new(self.shape().clone(), herm(&self.assemble_matrix()))
            .expect("sum of Hermitian terms")
    }

    pub fn scale(&self, t: f64) -> Self {
        Self {
            pattern: self.pattern.clone(),
            terms: self.terms.iter().map(|x| LocalTerm { support: x.support.clone(), op: x.op.scale(t) }).collect(),
            offset: self.offset * t,
        }
    }

    /// Sum of two Hamiltonians on the union of their patterns.
    pub fn add(&self, other: &LocalHamiltonian) -> Result<Self> {
        let pattern = self.pattern.union(&other.pattern)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self { pattern, terms, offset: self.offset + other.offset })
    }

    pub fn shift(&self, c: f64) -> Self {
        let mut h = self.clone();
        h.offset += c;
        h
    }

    /// Conjugation by a product unitary `U_1 ⊗ … ⊗ U_n`: `U H U†`.
    pub fn conjugate_local(&self, unitaries: &[CMat]) -> Result<Self> {
        if unitaries.len() != self.shape().n() {
            return Err(Error::DimensionMismatch { expected: self.shape().n(), found: unitaries.len() });
        }
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let u = kron_all(&t.support.iter().map(|&q| unitaries[q].clone()).collect::<Vec<_>>());
                LocalTerm { support: t.support.clone(), op: herm(&(&u * &t.op * u.adjoint())) }
            })
            .collect();
        Ok(Self { pattern: self.pattern.clone(), terms, offset: self.offset })
    }

    /// Canonical form: one traceless term per owning subset plus offset.
    pub fn canonical(&self) -> Self {
        project_local(&self.assemble_matrix(), &self.pattern).0
    }

    /// Pauli-string coefficients (qubit shapes only), strings over `IXYZ`
    /// with particle 1 first. Coefficients below `1e-14` are dropped.
    pub fn pauli_terms(&self) -> Option<Vec<(String, f64)>> {
        let shape = self.shape();
        if !shape.is_qubits() {
            return None;
        }
        let n = shape.n();
        let mut acc: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for t in &self.terms {
            let k = t.support.len();
            let scale = (1usize << k) as f64;
            for code in 0..(1usize << (2 * k)) {
                let labels: Vec<usize> = (0..k).map(|i| (code >> (2 * (k - 1 - i))) & 3).collect();
                let p = kron_all(&labels.iter().map(|&l| crate::operator::pauli::by_index(l)).collect::<Vec<_>>());
                let c = inner(&p, &t.op) / scale;
                if c.abs() < 1e-300 {
                    continue;
                }
                let mut full = vec![0usize; n];
                for (i, &q) in t.support.iter().enumerate() {
                    full[q] = labels[i];
                }
                *acc.entry(full).or_insert(0.0) += c;
            }
        }
        *acc.entry(vec![0; n]).or_insert(0.0) += self.offset;
        let mut out: Vec<(String, f64)> = acc
            .into_iter()
            .filter(|(_, c)| c.abs() >= 1e-14)
            .map(|(l, c)| (l.iter().map(|&x| ['I', 'X', 'Y', 'Z'][x]).collect(), c))
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        Some(out)
    }

    /// Builds a Hamiltonian from Pauli strings; the all-identity string goes
    /// into the offset.
    pub fn from_pauli(pattern: Pattern, entries: &[(String, f64)], offset: f64) -> Result<Self> {
        let shape = pattern.shape().clone();
        if !shape.is_qubits() {
            return Err(Error::InvalidParameter("Pauli strings need an all-qubit shape".into()));
        }
        let n = shape.n();
        let mut terms = Vec::new();
        let mut off = offset;
        for (s, c) in entries {
            if s.chars().count() != n {
                return Err(Error::Parse(format!("Pauli string `{s}` has length != {n}")));
            }
            let mut support = Vec::new();
            let mut factors = Vec::new();
            for (q, ch) in s.chars().enumerate() {
                let k = match ch.to_ascii_uppercase() {
                    'I' => 0,
                    'X' => 1,
                    'Y' => 2,
                    'Z' => 3,
                    _ => return Err(Error::Parse(format!("bad Pauli letter `{ch}` in `{s}`"))),
                };
                if k != 0 {
                    support.push(q);
                    factors.push(crate::operator::pauli::by_index(k));
                }
            }
            if support.is_empty() {
                off += c;
                continue;
            }
            terms.push((support, kron_all(&factors).scale(*c)));
        }
        Self::new(pattern, terms, off)
    }
}

/// Orthogonal projection onto the span of the local basis, with the Frobenius
/// norm of the rejected part.
pub fn project_local(h: &CMat, pattern: &Pattern) -> (LocalHamiltonian, f64) {
    let basis = LocalBasis::new(pattern);
    let a = basis.coefficients(&herm(h));
    let local = basis.hamiltonian(&a);
    let rest = herm(h) - basis.combine(&a);
    let residual = inner(&rest, &rest).sqrt();
    (local, residual)
}

/// `Σ_j Tr(H_j γ_j) + offset`.
pub fn pairing(x: &MarginalVector, h: &LocalHamiltonian) -> Result<f64> {
    if x.pattern.shape() != h.pattern.shape() {
        return Err(Error::PatternMismatch("different system shapes".into()));
    }
    let mut s = h.offset;
    for t in &h.terms {
        let g = x.reduced(&t.support)?;
        s += inner(&g, &t.op);
    }
    Ok(s)
}

/// Expectation `Tr(ρ H)` of an assembled Hamiltonian.
pub fn expectation(rho: &CMat, h: &CMat) -> f64 {
    inner(rho, h)
}
