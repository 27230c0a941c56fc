use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use localham::constructors::{
    ff_hamiltonian, perturb_combine, splitting_operator, subsystem_compose, three_qubit_parent_of_state,
    verify_ground_space, w_chain_parent, GroundReport, PerturbationBound, WTypeSpec, VERIFY_TOL,
};
use localham::correlated::{leakage, LeakageConfig, Verdict};
use localham::geometry2d::{ObservablePair, ProbeConfig};
use localham::maxent::{thermal_path, PathConfig};
use localham::{CVec, LocalHamiltonian, Pattern, Subspace, SystemShape};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult, EXIT_NEGATIVE, EXIT_NONCONVERGENCE, EXIT_OK};
use crate::files::{parse_pattern, read_json, write_json, HamiltonianFile, MarginalFile, StateFile, SCHEMA_VERSION};

/// What a command reports: a human summary for stdout, the machine object
/// for `--out`, and the exit code.
#[derive(Debug)]
pub struct Outcome {
    pub summary: String,
    pub machine: Value,
    pub exit_code: i32,
}

fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

pub fn report_json(r: &GroundReport, tol: f64) -> Value {
    json!({
        "ground_energy": r.ground_energy,
        "gap": finite(r.gap),
        "overlap": r.overlap,
        "ground_dim": r.ground_dim,
        "pass": r.pass,
        "tol": tol,
    })
}

fn bound_json(b: &PerturbationBound) -> Value {
    json!({ "lambda_min_pos_w": b.lambda_min_pos_w, "mu": b.mu, "omega": b.omega, "t_star": b.t_star })
}

pub fn report_line(r: &GroundReport) -> String {
    if !r.pass {
        return format!(
            "verification failed: ground dimension {}, overlap {:.6}, gap {:.3e}",
            r.ground_dim, r.overlap, r.gap
        );
    }
    let what = if r.ground_dim == 1 {
        "unique ground state".to_string()
    } else {
        format!("ground space of dimension {} equals the target", r.ground_dim)
    };
    format!("{what}, fidelity >= 1-{}, gap {:.4}", decade_above(1.0 - r.overlap), r.gap)
}

/// Smallest power of ten at or above `x`, floored at `1e-15`, as text.
pub fn decade_above(x: f64) -> String {
    let e = x.max(1e-15).log10().ceil() as i32;
    format!("1e{e}")
}

fn load_subspace(path: &Path) -> CliResult<Subspace> {
    read_json::<StateFile>(path)?.to_subspace().map_err(|e| e.context(&path.display().to_string()))
}

fn load_hamiltonian(path: &Path) -> CliResult<LocalHamiltonian> {
    read_json::<HamiltonianFile>(path)?.to_hamiltonian().map_err(|e| e.context(&path.display().to_string()))
}

#[derive(Args, Debug, Clone)]
pub struct RdmArgs {
    /// State file (pure, density or subspace)
    pub state: PathBuf,
    /// Interaction pattern, e.g. "1,2;2,3"
    #[arg(long)]
    pub pattern: String,
}

pub fn rdm(a: &RdmArgs) -> CliResult<Outcome> {
    let file: StateFile = read_json(&a.state)?;
    let rho = file.to_density().map_err(|e| e.context(&a.state.display().to_string()))?;
    let pattern = parse_pattern(rho.shape(), &a.pattern)?;
    let out = MarginalFile::of_state(&rho, &pattern)?;
    let x = out.to_marginals()?;
    let mut lines = Vec::new();
    for (s, m) in pattern.subsets().iter().zip(x.marginals()) {
        let e = localham::eigh(m)?;
        let spec: Vec<String> = e.values.iter().rev().filter(|v| **v > 1e-12).map(|v| format!("{v:.6}")).collect();
        let label: Vec<String> = s.iter().map(|q| (q + 1).to_string()).collect();
        lines.push(format!(
            "{{{}}}: {}x{} marginal, spectrum [{}]",
            label.join(","),
            m.nrows(),
            m.ncols(),
            spec.join(", ")
        ));
    }
    Ok(Outcome {
        summary: lines.join("\n"),
        machine: serde_json::to_value(out).expect("serializable"),
        exit_code: EXIT_OK,
    })
}

#[derive(Args, Debug, Clone)]
pub struct CorrelatedArgs {
    /// Subspace file (a pure state is a one-dimensional subspace)
    pub subspace: PathBuf,
    #[arg(long)]
    pub pattern: String,
    /// Leakage tolerance [default: 1e-7]
    #[arg(long, env = "LOCALHAM_TOL")]
    pub tol: Option<f64>,
    /// Where to write the witness state when the answer is negative
    #[arg(long)]
    pub witness: Option<PathBuf>,
}

pub fn correlated(a: &CorrelatedArgs) -> CliResult<Outcome> {
    let v = load_subspace(&a.subspace)?;
    let pattern = parse_pattern(v.shape(), &a.pattern)?;
    let cfg = match a.tol {
        Some(t) if !(t > 0.0 && t < 1.0) => return Err(CliError::input(format!("--tol {t} not in (0, 1)"))),
        Some(t) => LeakageConfig::with_tol(t),
        None => LeakageConfig::default(),
    };
    let c = leakage(&v, &pattern, &cfg)?;
    let witness = c.witness.as_ref().map(StateFile::from_density);
    if let (Some(path), Some(w)) = (&a.witness, &witness) {
        write_json(path, w)?;
    }
    let (summary, code) = match c.verdict {
        Verdict::Correlated => (format!("correlated, leakage <= {:.0e}", c.tol), EXIT_OK),
        Verdict::NotCorrelated => {
            let mut s = format!("not correlated, leakage {:.6}", c.leakage);
            if let Some(r) = c.witness_residual {
                s += &format!(" (witness marginal residual {r:.1e})");
            }
            if let (Some(path), Some(_)) = (&a.witness, &witness) {
                s += &format!("\nwitness written to {}", path.display());
            }
            (s, EXIT_NEGATIVE)
        }
        Verdict::Indeterminate => (
            format!("indeterminate, leakage between {:.3e} and {:.3e}", c.lower_bound, c.upper_bound),
            EXIT_NONCONVERGENCE,
        ),
    };
    let machine = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "correlated",
        "pattern": pattern.to_text(),
        "dim": v.dim(),
        "verdict": c.verdict.to_string(),
        "correlated": c.correlated,
        "leakage": c.leakage,
        "upper_bound": c.upper_bound,
        "lower_bound": c.lower_bound,
        "tol": c.tol,
        "witness_residual": c.witness_residual,
        "reduced_dim": c.reduced_dim,
        "face_reductions": c.face_reductions,
        "iterations": c.iterations,
        "witness": witness,
    });
    Ok(Outcome { summary, machine, exit_code: code })
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    Ff,
    Perturb,
    Thermal,
    ThreeQubit,
    WChain,
    Compose,
}

#[derive(Args, Debug, Clone)]
pub struct ParentArgs {
    /// Target subspace file; optional for `--route w-chain` with `--n`
    pub subspace: Option<PathBuf>,
    /// Interaction pattern [default: nearest-neighbour chain]
    #[arg(long)]
    pub pattern: Option<String>,
    #[arg(long, value_enum)]
    pub route: Route,
    /// Final temperature parameter of the thermal route
    #[arg(long, default_value_t = 1e-4)]
    pub p: f64,
    /// Sub-pattern for one subsystem of the compose route (repeatable)
    #[arg(long)]
    pub subpattern: Vec<String>,
    /// Number of qubits for a uniform W chain
    #[arg(long)]
    pub n: Option<usize>,
    /// Hamiltonian file with a splitting operator for the perturb route
    #[arg(long)]
    pub splitting: Option<PathBuf>,
    /// Spectral tolerance of the verification [default: 1e-8]
    #[arg(long, env = "LOCALHAM_TOL")]
    pub tol: Option<f64>,
}

/// Amplitudes of a W-type ket, if it is one.
fn w_amplitudes(psi: &CVec, n: usize) -> CliResult<WTypeSpec> {
    let amps: Vec<_> = (0..n).map(|i| psi[1 << (n - 1 - i)]).collect();
    let inside: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if (psi.norm_squared() - inside).abs() > 1e-10 {
        return Err(CliError::input("the w-chain route needs a state in the one-excitation sector"));
    }
    Ok(WTypeSpec::new(amps)?)
}

fn single_ket(v: &Subspace, route: &str) -> CliResult<CVec> {
    if v.dim() != 1 {
        return Err(CliError::input(format!(
            "the {route} route needs a single state, got a {}-dimensional subspace",
            v.dim()
        )));
    }
    Ok(v.basis().column(0).into_owned())
}

pub fn parent(a: &ParentArgs) -> CliResult<Outcome> {
    let tol = a.tol.unwrap_or(VERIFY_TOL);
    let v = match (&a.subspace, a.route, a.n) {
        (Some(path), _, None) => load_subspace(path)?,
        (None, Route::WChain, Some(n)) => Subspace::from_ket(SystemShape::qubits(n), &WTypeSpec::uniform(n)?.ket())?,
        (Some(_), _, Some(_)) => return Err(CliError::input("give either a subspace file or --n, not both")),
        (None, Route::WChain, None) => return Err(CliError::input("the w-chain route needs a subspace file or --n")),
        (None, _, _) => return Err(CliError::input("a subspace file is required")),
    };
    let shape = v.shape().clone();
    let pattern = match &a.pattern {
        Some(t) => parse_pattern(&shape, t)?,
        None => Pattern::chain(shape.clone())?,
    };
    let mut extra = serde_json::Map::new();
    let h = match a.route {
        Route::Ff => ff_hamiltonian(&v, &pattern)?.0,
        Route::Perturb => {
            let (h_w, w) = ff_hamiltonian(&v, &pattern)?;
            if w.dim() == v.dim() {
                extra.insert("note".into(), json!("kernel projectors already single out the target"));
                h_w
            } else {
                let h_u = match &a.splitting {
                    Some(path) => load_hamiltonian(path)?,
                    None => splitting_operator(&v, &w, &pattern)?,
                };
                let (b, h) = perturb_combine(&h_w, &h_u, &v)?;
                extra.insert("ff_dim".into(), json!(w.dim()));
                extra.insert("bound".into(), bound_json(&b));
                h
            }
        }
        Route::Thermal => {
            if !(a.p > 0.0 && a.p <= 0.1) {
                return Err(CliError::input(format!("--p {} not in (0, 0.1]", a.p)));
            }
            let path = thermal_path(&v, &pattern, &PathConfig::down_to(a.p))?;
            let last = path.steps.last().map(|s| s.p);
            extra.insert("p_final".into(), json!(last));
            extra.insert("steps".into(), json!(path.steps.len()));
            extra.insert("refined".into(), json!(path.refined));
            extra.insert("converged".into(), json!(path.converged));
            path.hamiltonian
        }
        Route::ThreeQubit => {
            if shape != SystemShape::qubits(3) {
                return Err(CliError::input("the three-qubit route needs three qubits"));
            }
            let chain = Pattern::chain(shape.clone())?;
            if pattern.subsets() != chain.subsets() {
                return Err(CliError::input("the three-qubit route uses the pattern 1,2;2,3"));
            }
            let p = three_qubit_parent_of_state(&single_ket(&v, "three-qubit")?)?;
            extra.insert("construction".into(), json!(p.route.to_string()));
            extra.insert("branch".into(), json!(format!("{:?}", p.branch)));
            if let Some(b) = &p.bound {
                extra.insert("bound".into(), bound_json(b));
            }
            p.hamiltonian
        }
        Route::WChain => {
            let n = shape.n();
            if !shape.is_qubits() {
                return Err(CliError::input("the w-chain route needs qubits"));
            }
            if pattern.subsets() != Pattern::chain(shape.clone())?.subsets() {
                return Err(CliError::input("the w-chain route uses the nearest-neighbour chain"));
            }
            let spec = w_amplitudes(&single_ket(&v, "w-chain")?, n)?;
            let p = w_chain_parent(&spec)?;
            extra.insert("bound".into(), bound_json(&p.bound));
            p.hamiltonian
        }
        Route::Compose => {
            if a.subpattern.is_empty() {
                return Err(CliError::input("the compose route needs at least one --subpattern"));
            }
            let subs: Vec<Pattern> = a
                .subpattern
                .iter()
                .map(|t| parse_pattern(&shape, t).map_err(|e| e.context("--subpattern")))
                .collect::<CliResult<_>>()?;
            let c = subsystem_compose(&v, &pattern, &subs)?;
            let regions: Vec<Value> = c
                .subsystems
                .iter()
                .map(|s| {
                    json!({
                        "region": s.region.iter().map(|q| q + 1).collect::<Vec<_>>(),
                        "leakage": s.certificate.leakage,
                        "pass": s.report.pass,
                    })
                })
                .collect();
            extra.insert("subsystems".into(), Value::Array(regions));
            c.hamiltonian
        }
    };
    let r = verify_ground_space(&h, &v, tol);
    let mut report = report_json(&r, tol);
    report.as_object_mut().expect("object").extend(extra);
    let mut file = HamiltonianFile::from_hamiltonian(&h);
    file.route = Some(Route::to_possible_value(&a.route).expect("named").get_name().to_string());
    file.report = Some(report);
    let code = if r.pass { EXIT_OK } else { EXIT_NEGATIVE };
    let summary = format!("{} terms on pattern {}\n{}", file.terms.len(), file.pattern, report_line(&r));
    Ok(Outcome { summary, machine: serde_json::to_value(file).expect("serializable"), exit_code: code })
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    pub hamiltonian: PathBuf,
    pub subspace: PathBuf,
    /// Spectral tolerance relative to the spectral spread [default: 1e-8]
    #[arg(long, env = "LOCALHAM_TOL")]
    pub tol: Option<f64>,
}

pub fn verify(a: &VerifyArgs) -> CliResult<Outcome> {
    let h = load_hamiltonian(&a.hamiltonian)?;
    let v = load_subspace(&a.subspace)?;
    if h.shape() != v.shape() {
        return Err(CliError::input("Hamiltonian and subspace have different shapes"));
    }
    let tol = a.tol.unwrap_or(VERIFY_TOL);
    let r = verify_ground_space(&h, &v, tol);
    let mut machine = report_json(&r, tol);
    let obj = machine.as_object_mut().expect("object");
    obj.insert("schema_version".into(), json!(SCHEMA_VERSION));
    obj.insert("command".into(), json!("verify"));
    Ok(Outcome { summary: report_line(&r), machine, exit_code: if r.pass { EXIT_OK } else { EXIT_NEGATIVE } })
}

#[derive(Args, Debug, Clone)]
pub struct Body2dArgs {
    pub h1: PathBuf,
    pub h2: PathBuf,
    /// Number of uniform support directions (at least 8)
    #[arg(long, default_value_t = 360, value_parser = clap::value_parser!(u32).range(8..))]
    pub directions: u32,
    /// Write the sampled boundary as CSV (theta,x,y,face_dim)
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

pub fn body2d(a: &Body2dArgs) -> CliResult<Outcome> {
    let h1 = load_hamiltonian(&a.h1)?;
    let h2 = load_hamiltonian(&a.h2)?;
    if h1.shape() != h2.shape() {
        return Err(CliError::input("the two observables act on different shapes"));
    }
    let pair = ObservablePair::new(h1.assemble_matrix(), h2.assemble_matrix())?;
    let n = a.directions as usize;
    let sample = pair.sample_body(n)?;
    if let Some(path) = &a.csv {
        write_boundary_csv(path, &sample.directions, &sample.points)?;
    }
    let hull = sample.hull();
    let found = pair.non_exposed_extreme_points(n, &ProbeConfig::default())?;
    let points: Vec<Value> = found
        .iter()
        .map(|e| json!({ "point": [e.target.0, e.target.1], "boundary_gap": e.boundary_gap, "normal": e.normal }))
        .collect();
    let mut summary =
        format!("area {:.6}, {} hull vertices, {} non-exposed extreme points", sample.area(), hull.len(), found.len());
    for e in &found {
        summary += &format!("\n  ({:.6}, {:.6})", e.target.0, e.target.1);
    }
    let machine = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "body2d",
        "directions": n,
        "area": sample.area(),
        "hull": hull.iter().map(|p| [p.0, p.1]).collect::<Vec<_>>(),
        "non_exposed": points,
    });
    Ok(Outcome { summary, machine, exit_code: EXIT_OK })
}

fn write_boundary_csv(path: &Path, directions: &[f64], points: &[(f64, f64, usize)]) -> CliResult<()> {
    let io = |e: csv::Error| CliError::input(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(["theta", "x", "y", "face_dim"]).map_err(io)?;
    // Two endpoints per direction; they coincide unless the face is a segment.
    for (p, theta) in points.iter().zip(directions.iter().flat_map(|t| [t, t])) {
        w.serialize((theta, p.0, p.1, p.2)).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}
