//! End-to-end scenarios with expected outcomes.

use std::f64::consts::PI;

use clap::ValueEnum;
use localham::constructors::{
    ff_hamiltonian, subsystem_compose, three_qubit_parent_of_state, verify_ground_space, w_chain_parent, xxz_scan,
    WTypeSpec, VERIFY_TOL,
};
use localham::correlated::{leakage, LeakageConfig, Verdict};
use localham::geometry2d::{ObservablePair, ProbeConfig};
use localham::maxent::{maxent_solve, thermal_path, MaxEntConfig, PathConfig};
use localham::operator::{eigh, kron_all, trace_re, DensityMatrix};
use localham::pattern::{rdm_vector, rdm_vector_of};
use localham::random::{random_density, random_ket, random_unitary};
use localham::{c64, states, CMat, Error, Pattern, SystemShape};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::commands::decade_above;
use crate::error::CliResult;

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Demo {
    Ghz,
    RhoC,
    ThreeQubitRandom,
    WChain,
    Xxz,
    Psi1,
    Psi2,
    Subsystems,
    /// The two-disk body and its four non-exposed extreme points
    #[value(alias = "two-disks")]
    Fig1,
    Lemmas,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &str, pass: bool, detail: impl Into<String>) -> Check {
    Check { name: name.into(), pass, detail: detail.into() }
}

fn q(n: usize) -> SystemShape {
    SystemShape::qubits(n)
}

pub fn run(demo: Demo, seed: u64) -> CliResult<Vec<Check>> {
    Ok(match demo {
        Demo::Ghz => ghz()?,
        Demo::RhoC => rho_c()?,
        Demo::ThreeQubitRandom => three_qubit_random(seed)?,
        Demo::WChain => w_chain()?,
        Demo::Xxz => xxz()?,
        Demo::Psi1 => psi1()?,
        Demo::Psi2 => psi2()?,
        Demo::Subsystems => subsystems()?,
        Demo::Fig1 => two_disks()?,
        Demo::Lemmas => lemmas(seed)?,
    })
}

fn ghz() -> CliResult<Vec<Check>> {
    let k = Pattern::chain(q(3))?;
    let v = states::line(3, &states::ghz(3));
    let x = rdm_vector(&v.mixed_state(), &k)?;
    let mut classical = CMat::zeros(4, 4);
    classical[(0, 0)] = c64(0.5, 0.0);
    classical[(3, 3)] = c64(0.5, 0.0);
    let dev = x.marginals().iter().map(|m| (m - &classical).norm()).fold(0.0, f64::max);
    let c = leakage(&v, &k, &LeakageConfig::default())?;
    let witness_ok = c.witness.as_ref().is_some_and(|w| {
        let m = w.matrix();
        let same = rdm_vector_of(m, &k).map(|y| y.trace_norm_diff(&x) <= c.tol).unwrap_or(false);
        eigh(m).map(|e| e.values[0] >= -1e-12).unwrap_or(false) && (trace_re(m) - 1.0).abs() < 1e-10 && same
    });
    let three = three_qubit_parent_of_state(&states::ghz(3));
    Ok(vec![
        check("pair marginals are classical", dev < 1e-12, format!("max deviation {dev:.1e}")),
        check(
            "not correlated",
            c.verdict == Verdict::NotCorrelated && c.leakage >= 0.5 - c.tol,
            format!("leakage {:.6}", c.leakage),
        ),
        check("witness shares the marginals", witness_ok, format!("residual {:?}", c.witness_residual)),
        check(
            "three-qubit route rejects",
            matches!(three, Err(Error::NotKCorrelated(_))),
            three.err().map(|e| e.to_string()).unwrap_or_else(|| "a parent was returned".into()),
        ),
    ])
}

fn rho_c() -> CliResult<Vec<Check>> {
    let k = Pattern::chain(q(3))?;
    let v = states::rho_c_space();
    let c = leakage(&v, &k, &LeakageConfig::default())?;
    let (h, w) = ff_hamiltonian(&v, &k)?;
    let r = verify_ground_space(&h, &v, VERIFY_TOL);
    Ok(vec![
        check("correlated", c.correlated && c.leakage <= 1e-7, format!("leakage {:.1e}", c.leakage)),
        check("kernel projectors are a parent", w.dim() == 2 && r.pass, format!("gap {:.4}", r.gap)),
    ])
}

fn three_qubit_random(seed: u64) -> CliResult<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for i in 0..10 {
        let psi = random_ket(8, &mut rng);
        let name = format!("random state {i}");
        match three_qubit_parent_of_state(&psi) {
            Ok(p) => out.push(check(
                &name,
                p.report.pass && p.report.ground_dim == 1,
                format!(
                    "{} route, fidelity >= 1-{}, gap {:.4}",
                    p.route,
                    decade_above(1.0 - p.report.overlap),
                    p.report.gap
                ),
            )),
            Err(e) => out.push(check(&name, false, e.to_string())),
        }
    }
    let u: Vec<CMat> = (0..3).map(|_| random_unitary(2, &mut rng)).collect();
    let rotated = kron_all(&u) * states::ghz(3);
    let r = three_qubit_parent_of_state(&rotated);
    out.push(check("locally rotated GHZ rejected", matches!(r, Err(Error::NotKCorrelated(_))), ""));
    Ok(out)
}

fn w_chain() -> CliResult<Vec<Check>> {
    let mut out = Vec::new();
    for n in 3..=6 {
        let p = w_chain_parent(&WTypeSpec::uniform(n)?)?;
        out.push(check(
            &format!("W({n}) chain parent"),
            p.report.pass && p.report.gap > 0.0,
            format!("t* {:.4}, gap {:.4}", p.bound.t_star, p.report.gap),
        ));
    }
    let spec = WTypeSpec::new(vec![c64(1.0, 0.0), c64(0.0, 2.0), c64(-0.5, 0.0), c64(1.5, 0.5)])?;
    let p = w_chain_parent(&spec)?;
    out.push(check("non-uniform W-type chain parent", p.report.pass, format!("gap {:.4}", p.report.gap)));
    Ok(out)
}

fn xxz() -> CliResult<Vec<Check>> {
    let mut out = Vec::new();
    for n in 3..=5 {
        let s = xxz_scan(n, 1.0, 1.0, true)?;
        let v = states::line(n, &states::w(n));
        let r = verify_ground_space(&s.hamiltonian, &v, VERIFY_TOL);
        out.push(check(
            &format!("XXZ ring n={n}"),
            s.report.pass && r.pass,
            format!("epsilon {}, gap {:.4}", s.epsilon, r.gap),
        ));
    }
    Ok(out)
}

fn psi1() -> CliResult<Vec<Check>> {
    let v = states::line(4, &states::psi1());
    let k = Pattern::all_pairs(q(4))?;
    let path = thermal_path(&v, &k, &PathConfig::down_to(1e-4))?;
    let r = verify_ground_space(&path.hamiltonian, &v, VERIFY_TOL);
    let mut leading = path.hamiltonian.pauli_terms().unwrap_or_default();
    leading.retain(|(s, _)| s != "IIII");
    leading.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
    let shown: Vec<String> = leading.iter().take(4).map(|(s, c)| format!("{c:+.4} {s}")).collect();
    Ok(vec![
        check(
            "two-local parent from the thermal path",
            r.pass && r.ground_dim == 1 && r.overlap >= 1.0 - 1e-6,
            format!("fidelity >= 1-{}, gap {:.4}", decade_above(1.0 - r.overlap), r.gap),
        ),
        check("leading terms", true, shown.join(", ")),
    ])
}

fn psi2() -> CliResult<Vec<Check>> {
    let k = Pattern::all_pairs(q(4))?;
    let a = rdm_vector(&DensityMatrix::from_ket(q(4), &states::psi2())?, &k)?;
    let b = rdm_vector(&DensityMatrix::from_ket(q(4), &states::psi2_prime())?, &k)?;
    let diff = a.max_diff(&b);
    let overlap = states::psi2().dotc(&states::psi2_prime()).norm();
    let c = leakage(&states::line(4, &states::psi2()), &k, &LeakageConfig::default())?;
    Ok(vec![
        check(
            "partner state has equal pair marginals",
            diff <= 1e-12 && overlap < 1.0 - 1e-6,
            format!("max difference {diff:.1e}"),
        ),
        check(
            "not correlated on all pairs",
            c.verdict == Verdict::NotCorrelated && c.leakage >= 0.5 - c.tol,
            format!("leakage {:.6}", c.leakage),
        ),
    ])
}

fn subsystems() -> CliResult<Vec<Check>> {
    let cfg = LeakageConfig::default();
    let triangle = Pattern::all_pairs(q(3))?;
    let v123 = leakage(&states::v123_printed(), &triangle, &cfg)?;
    let v134 = leakage(&states::v134(), &triangle, &cfg)?;
    let s4 = q(4);
    let psi1 = states::line(4, &states::psi1());
    let k = Pattern::parse(s4.clone(), "1,2,3;2,3,4")?;
    let subs = [Pattern::parse(s4.clone(), "1,2;1,3;2,3")?, Pattern::parse(s4, "2,3;2,4;3,4")?];
    let composed = subsystem_compose(&psi1, &k, &subs);
    let (ok, detail) = match &composed {
        Ok(p) => (
            p.report.pass && p.hamiltonian.terms().iter().all(|t| t.support.len() <= 2),
            format!("{} two-body terms, gap {:.4}", p.hamiltonian.terms().len(), p.report.gap),
        ),
        Err(e) => (false, e.to_string()),
    };
    Ok(vec![
        check("V123 correlated on all pairs", v123.correlated, format!("leakage {:.1e}", v123.leakage)),
        check(
            "V134 not correlated on all pairs",
            v134.verdict == Verdict::NotCorrelated,
            format!("leakage {:.6}", v134.leakage),
        ),
        check("composed two-body parent of psi1", ok, detail),
    ])
}

fn two_disks() -> CliResult<Vec<Check>> {
    let pair = ObservablePair::two_disks();
    let area = pair.sample_body(4096)?.area();
    let cfg = ProbeConfig::default();
    let found = pair.non_exposed_extreme_points(64, &cfg)?;
    let expected = [(0.0, 1.0), (0.0, -1.0), (1.0, 1.0), (1.0, -1.0)];
    let matched = expected.iter().all(|e| found.iter().any(|f| (f.target.0 - e.0).hypot(f.target.1 - e.1) <= 1e-6));
    let left = pair.exposed_probe((-1.0, 0.0), &cfg)?;
    let pts: Vec<String> = found.iter().map(|f| format!("({:.4}, {:.4})", f.target.0, f.target.1)).collect();
    Ok(vec![
        check("area is pi + 2", (area - (PI + 2.0)).abs() <= 1e-3, format!("area {area:.6}")),
        check("four non-exposed extreme points", found.len() == 4 && matched, pts.join(" ")),
        check("(-1, 0) is exposed", left.is_exposed && left.is_extreme, ""),
    ])
}

fn lemmas(seed: u64) -> CliResult<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s3 = q(3);
    let (mut pairs, mut gains) = (0, 0);
    while pairs < 50 {
        let rank = 1 + pairs % 4;
        let rho0 = random_density(&s3, rank, &mut rng);
        let rho1 = random_density(&s3, 2, &mut rng);
        if rho0.range(1e-10).contains(&rho1.range(1e-10), 1e-6) {
            continue;
        }
        pairs += 1;
        let s0 = rho0.entropy();
        gains += [1e-3, 1e-2, 1e-1].iter().any(|&x| {
            let m = rho0.matrix().scale(1.0 - x) + rho1.matrix().scale(x);
            DensityMatrix::new(s3.clone(), m).map(|r| r.entropy() > s0).unwrap_or(false)
        }) as usize;
    }
    let mut inclusions = 0;
    for i in 0..50usize {
        let n = 2 + i % 2;
        let rank = if n == 2 { 1 + i / 2 % 4 } else { 8 };
        let tau = random_density(&q(n), rank, &mut rng);
        let isos: Vec<CMat> = (0..n).map(|_| random_unitary(3, &mut rng).columns(0, 2).into_owned()).collect();
        let iso = kron_all(&isos);
        let shape = SystemShape::new(vec![3; n])?;
        let k = if n == 2 { Pattern::parse(shape.clone(), "1;2")? } else { Pattern::chain(shape.clone())? };
        let rho = DensityMatrix::new(shape, &iso * tau.matrix() * iso.adjoint())?;
        let sol = maxent_solve(&rdm_vector(&rho, &k)?, &MaxEntConfig::default(), None)?;
        inclusions += sol.state.range(1e-10).contains(&rho.range(1e-10), 1e-6) as usize;
    }
    Ok(vec![
        check("mixing in outside support raises entropy", gains == 50, format!("{gains}/50 pairs")),
        check(
            "maximizer range contains every consistent state",
            inclusions == 50,
            format!("{inclusions}/50 instances"),
        ),
    ])
}
