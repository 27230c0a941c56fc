//! JSON file formats. Complex numbers are `[re, im]` pairs, particle and
//! subset indices are 1-based, and every top-level object carries
//! `schema_version`.

use std::fs;
use std::path::Path;

use localham::pattern::rdm_vector;
use localham::{c64, CMat, CVec, DensityMatrix, LocalHamiltonian, MarginalVector, Pattern, Subspace, SystemShape, C64};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    parse_json(&text).map_err(|e| e.context(&path.display().to_string()))
}

/// Field errors name the JSON path; syntax errors carry line and column.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> CliResult<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            CliError::input(e.into_inner().to_string())
        } else {
            CliError::input(format!("field `{path}`: {}", e.into_inner()))
        }
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::input(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn check_version(v: u32, what: &str) -> CliResult<()> {
    if v != SCHEMA_VERSION {
        return Err(CliError::input(format!("{what}: unsupported schema_version {v} (expected {SCHEMA_VERSION})")));
    }
    Ok(())
}

pub fn shape_of(dims: &[usize]) -> CliResult<SystemShape> {
    SystemShape::new(dims.to_vec()).map_err(|e| CliError::input(format!("field `shape`: {e}")))
}

pub fn parse_pattern(shape: &SystemShape, text: &str) -> CliResult<Pattern> {
    Pattern::parse(shape.clone(), text).map_err(|e| CliError::input(format!("pattern: {e}")))
}

fn complex_json(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn vector_json(v: &CVec) -> Value {
    Value::Array(v.iter().map(|&z| complex_json(z)).collect())
}

pub fn rows_json(m: &CMat) -> Value {
    Value::Array(
        (0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| complex_json(m[(i, j)])).collect())).collect(),
    )
}

fn columns_json(m: &CMat) -> Value {
    Value::Array((0..m.ncols()).map(|j| vector_json(&m.column(j).into_owned())).collect())
}

/// A bare number is read as a real entry.
fn complex_of(v: &Value, field: &str) -> CliResult<C64> {
    if let Some(x) = v.as_f64() {
        return Ok(c64(x, 0.0));
    }
    match v.as_array().map(|a| a.as_slice()) {
        Some([re, im]) => match (re.as_f64(), im.as_f64()) {
            (Some(re), Some(im)) => Ok(c64(re, im)),
            _ => Err(CliError::input(format!("field `{field}`: entries of [re, im] must be numbers"))),
        },
        _ => Err(CliError::input(format!("field `{field}`: expected a [re, im] pair, found {v}"))),
    }
}

fn vector_of(v: &Value, field: &str) -> CliResult<Vec<C64>> {
    let a = v.as_array().ok_or_else(|| CliError::input(format!("field `{field}`: expected an array")))?;
    a.iter().enumerate().map(|(i, z)| complex_of(z, &format!("{field}[{i}]"))).collect()
}

fn list_of_vectors(v: &Value, field: &str) -> CliResult<Vec<Vec<C64>>> {
    let a = v.as_array().ok_or_else(|| CliError::input(format!("field `{field}`: expected an array of arrays")))?;
    let out: Vec<Vec<C64>> =
        a.iter().enumerate().map(|(i, r)| vector_of(r, &format!("{field}[{i}]"))).collect::<CliResult<_>>()?;
    if let Some(first) = out.first() {
        if let Some(i) = out.iter().position(|r| r.len() != first.len()) {
            return Err(CliError::input(format!(
                "field `{field}[{i}]`: length {} differs from {}",
                out[i].len(),
                first.len()
            )));
        }
    }
    Ok(out)
}

/// Square matrix given as a list of rows.
pub fn matrix_of(v: &Value, field: &str, dim: usize) -> CliResult<CMat> {
    let rows = list_of_vectors(v, field)?;
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(CliError::input(format!("field `{field}`: expected a {dim}x{dim} matrix")));
    }
    Ok(CMat::from_fn(dim, dim, |i, j| rows[i][j]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Pure,
    Density,
    Subspace,
}

/// `data` is an amplitude vector (pure), a list of rows (density) or a list
/// of basis columns (subspace).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub schema_version: u32,
    pub kind: StateKind,
    pub shape: Vec<usize>,
    pub data: Value,
}

impl StateFile {
    pub fn from_ket(shape: &SystemShape, psi: &CVec) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind: StateKind::Pure,
            shape: shape.dims().to_vec(),
            data: vector_json(psi),
        }
    }

    pub fn from_density(rho: &DensityMatrix) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind: StateKind::Density,
            shape: rho.shape().dims().to_vec(),
            data: rows_json(rho.matrix()),
        }
    }

    pub fn from_subspace(v: &Subspace) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind: StateKind::Subspace,
            shape: v.shape().dims().to_vec(),
            data: columns_json(v.basis()),
        }
    }

    pub fn shape(&self) -> CliResult<SystemShape> {
        check_version(self.schema_version, "state file")?;
        shape_of(&self.shape)
    }

    fn ket(&self, shape: &SystemShape) -> CliResult<CVec> {
        let v = vector_of(&self.data, "data")?;
        if v.len() != shape.total() {
            return Err(CliError::input(format!(
                "field `data`: {} amplitudes for a space of dimension {}",
                v.len(),
                shape.total()
            )));
        }
        Ok(CVec::from_vec(v))
    }

    /// Pure states are normalized; subspace columns are orthonormalized.
    pub fn to_subspace(&self) -> CliResult<Subspace> {
        let shape = self.shape()?;
        match self.kind {
            StateKind::Pure => Ok(Subspace::from_ket(shape.clone(), &self.ket(&shape)?)?),
            StateKind::Subspace => {
                let cols = list_of_vectors(&self.data, "data")?;
                if cols.is_empty() {
                    return Err(CliError::input("field `data`: a subspace needs at least one basis column"));
                }
                let d = shape.total();
                if cols[0].len() != d {
                    return Err(CliError::input(format!(
                        "field `data[0]`: length {} for a space of dimension {d}",
                        cols[0].len()
                    )));
                }
                let m = CMat::from_fn(d, cols.len(), |i, j| cols[j][i]);
                Subspace::span(shape, &m).map_err(|e| CliError::input(format!("field `data`: {e}")))
            }
            StateKind::Density => Err(CliError::input("expected a pure state or a subspace, found a density matrix")),
        }
    }

    /// A subspace becomes its normalized projector.
    pub fn to_density(&self) -> CliResult<DensityMatrix> {
        let shape = self.shape()?;
        match self.kind {
            StateKind::Pure => Ok(DensityMatrix::from_ket(shape.clone(), &self.ket(&shape)?)?),
            StateKind::Density => {
                let m = matrix_of(&self.data, "data", shape.total())?;
                DensityMatrix::new(shape, m).map_err(|e| CliError::input(format!("field `data`: {e}")))
            }
            StateKind::Subspace => Ok(self.to_subspace()?.mixed_state()),
        }
    }
}

/// A Pauli entry (`string`, `coefficient`) or an explicit matrix on a
/// 1-based `support`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TermEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub string: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficient: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianFile {
    pub schema_version: u32,
    pub shape: Vec<usize>,
    pub pattern: String,
    #[serde(default)]
    pub offset: f64,
    pub terms: Vec<TermEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub route: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<Value>,
}

impl HamiltonianFile {
    /// Pauli strings for all-qubit shapes, explicit matrices otherwise.
    pub fn from_hamiltonian(h: &LocalHamiltonian) -> Self {
        let (terms, offset) = match h.pauli_terms() {
            Some(list) => {
                let mut offset = 0.0;
                let mut terms = Vec::new();
                for (s, c) in list {
                    if s.chars().all(|ch| ch == 'I') {
                        offset += c;
                    } else {
                        terms.push(TermEntry { string: Some(s), coefficient: Some(c), ..TermEntry::default() });
                    }
                }
                (terms, offset)
            }
            None => (
                h.terms()
                    .iter()
                    .map(|t| TermEntry {
                        support: Some(t.support.iter().map(|q| q + 1).collect()),
                        matrix: Some(rows_json(&t.op)),
                        ..TermEntry::default()
                    })
                    .collect(),
                h.offset(),
            ),
        };
        Self {
            schema_version: SCHEMA_VERSION,
            shape: h.shape().dims().to_vec(),
            pattern: h.pattern().to_text(),
            offset,
            terms,
            route: None,
            report: None,
        }
    }

    pub fn to_hamiltonian(&self) -> CliResult<LocalHamiltonian> {
        check_version(self.schema_version, "Hamiltonian file")?;
        let shape = shape_of(&self.shape)?;
        let pattern = parse_pattern(&shape, &self.pattern).map_err(|e| e.context("field `pattern`"))?;
        let mut paulis = Vec::new();
        let mut matrices = Vec::new();
        for (i, t) in self.terms.iter().enumerate() {
            let field = format!("terms[{i}]");
            match (&t.string, &t.support, &t.matrix) {
                (Some(s), None, None) => {
                    if !shape.is_qubits() {
                        return Err(CliError::input(format!("field `{field}`: Pauli strings need an all-qubit shape")));
                    }
                    let c = t.coefficient.ok_or_else(|| {
                        CliError::input(format!("field `{field}`: Pauli entry without `coefficient`"))
                    })?;
                    // Validate each entry here so the error names it.
                    LocalHamiltonian::from_pauli(pattern.clone(), &[(s.clone(), c)], 0.0)
                        .map_err(|e| CliError::input(format!("field `{field}`: {e}")))?;
                    paulis.push((s.clone(), c));
                }
                (None, Some(support), Some(m)) => {
                    let mut zero_based = Vec::with_capacity(support.len());
                    for &q in support {
                        if q == 0 || q > shape.n() {
                            return Err(CliError::input(format!(
                                "field `{field}.support`: particle index {q} out of range 1..={}",
                                shape.n()
                            )));
                        }
                        zero_based.push(q - 1);
                    }
                    shape
                        .check_subset(&zero_based)
                        .map_err(|e| CliError::input(format!("field `{field}.support`: {e}")))?;
                    let op = matrix_of(m, &format!("{field}.matrix"), shape.sub_dim(&zero_based))?;
                    let c = t.coefficient.unwrap_or(1.0);
                    LocalHamiltonian::new(pattern.clone(), vec![(zero_based.clone(), op.clone())], 0.0)
                        .map_err(|e| CliError::input(format!("field `{field}`: {e}")))?;
                    matrices.push((zero_based, op.scale(c)));
                }
                _ => {
                    return Err(CliError::input(format!(
                        "field `{field}`: give either `string` and `coefficient` or `support` and `matrix`"
                    )))
                }
            }
        }
        let from_strings = if paulis.is_empty() {
            LocalHamiltonian::zero(pattern.clone())
        } else {
            LocalHamiltonian::from_pauli(pattern.clone(), &paulis, 0.0)?
        };
        Ok(from_strings.add(&LocalHamiltonian::new(pattern, matrices, self.offset)?)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalEntry {
    pub subset: Vec<usize>,
    pub matrix: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalFile {
    pub schema_version: u32,
    pub shape: Vec<usize>,
    pub pattern: String,
    pub marginals: Vec<MarginalEntry>,
}

impl MarginalFile {
    pub fn from_marginals(x: &MarginalVector) -> Self {
        let p = x.pattern();
        Self {
            schema_version: SCHEMA_VERSION,
            shape: p.shape().dims().to_vec(),
            pattern: p.to_text(),
            marginals: p
                .subsets()
                .iter()
                .zip(x.marginals())
                .map(|(s, m)| MarginalEntry { subset: s.iter().map(|q| q + 1).collect(), matrix: rows_json(m) })
                .collect(),
        }
    }

    pub fn of_state(rho: &DensityMatrix, pattern: &Pattern) -> CliResult<Self> {
        Ok(Self::from_marginals(&rdm_vector(rho, pattern)?))
    }

    pub fn to_marginals(&self) -> CliResult<MarginalVector> {
        check_version(self.schema_version, "marginal file")?;
        let shape = shape_of(&self.shape)?;
        let pattern = parse_pattern(&shape, &self.pattern).map_err(|e| e.context("field `pattern`"))?;
        if self.marginals.len() != pattern.len() {
            return Err(CliError::input(format!(
                "field `marginals`: {} entries for {} subsets",
                self.marginals.len(),
                pattern.len()
            )));
        }
        let mut mats = Vec::with_capacity(pattern.len());
        for (i, (entry, s)) in self.marginals.iter().zip(pattern.subsets()).enumerate() {
            let want: Vec<usize> = s.iter().map(|q| q + 1).collect();
            let mut got = entry.subset.clone();
            got.sort_unstable();
            if got != want {
                return Err(CliError::input(format!(
                    "field `marginals[{i}].subset`: {:?} does not match pattern subset {want:?}",
                    entry.subset
                )));
            }
            mats.push(matrix_of(&entry.matrix, &format!("marginals[{i}].matrix"), shape.sub_dim(s))?);
        }
        MarginalVector::new(pattern, mats).map_err(|e| CliError::input(format!("field `marginals`: {e}")))
    }
}
