//! Parents assembled from parents of subsystem marginal ranges.

use super::{ff_hamiltonian, verify_ground_space, GroundReport, VERIFY_TOL};
use crate::correlated::{leakage, CorrelatednessCertificate, LeakageConfig, Verdict};
use crate::error::{Error, Result};
use crate::maxent::{thermal_path, PathConfig};
use crate::operator::Subspace;
use crate::pattern::{LocalHamiltonian, Pattern};

#[derive(Clone, Debug)]
pub struct SubsystemReport {
    /// Particles of the subsystem (0-based, ascending).
    pub region: Vec<usize>,
    /// Subpattern relabelled to the subsystem.
    pub pattern: Pattern,
    pub certificate: CorrelatednessCertificate,
    pub report: GroundReport,
}

#[derive(Clone, Debug)]
pub struct ComposedParent {
    pub hamiltonian: LocalHamiltonian,
    pub subsystems: Vec<SubsystemReport>,
    pub report: GroundReport,
}

/// For each subset `K_i`, certifies that the range of `ρ_V`'s marginal on
/// `K_i` is correlated under `subpatterns[i]` (given in global labels, each
/// subset inside `K_i`), builds a parent for it along the thermal path, and
/// sums the lifted parents. Requires the frustration-free intersection of
/// `K` to be exactly `V`.
pub fn subsystem_compose(v: &Subspace, pattern: &Pattern, subpatterns: &[Pattern]) -> Result<ComposedParent> {
    if subpatterns.len() != pattern.len() {
        return Err(Error::DimensionMismatch { expected: pattern.len(), found: subpatterns.len() });
    }
    let (_, w) = ff_hamiltonian(v, pattern)?;
    if !w.equals(v, 1e-8) {
        return Err(Error::Precondition(format!(
            "frustration-free intersection has dimension {}, not dim V = {}",
            w.dim(),
            v.dim()
        )));
    }
    let rho = v.mixed_state();
    let mut total: Option<LocalHamiltonian> = None;
    let mut reports = Vec::with_capacity(pattern.len());
    for (region, sub) in pattern.subsets().iter().zip(subpatterns) {
        if sub.shape() != v.shape() {
            return Err(Error::PatternMismatch("subpattern acts on a different system".into()));
        }
        if let Some(s) = sub.subsets().iter().find(|s| !s.iter().all(|q| region.contains(q))) {
            return Err(Error::PatternMismatch(format!(
                "subset {:?} is not inside {:?}",
                s.iter().map(|q| q + 1).collect::<Vec<_>>(),
                region.iter().map(|q| q + 1).collect::<Vec<_>>()
            )));
        }
        let local = sub.restrict(region)?;
        let range = rho.partial_trace(region)?.range(crate::operator::RANK_CUTOFF);
        let label = region.iter().map(|q| (q + 1).to_string()).collect::<Vec<_>>().join(",");
        let cert = leakage(&range, &local, &LeakageConfig::default())?;
        if cert.verdict != Verdict::Correlated {
            return Err(Error::NotKCorrelated(format!(
                "range of the {{{label}}} marginal is {} under {} (leakage {:.3e})",
                cert.verdict, sub, cert.leakage
            )));
        }
        let path = thermal_path(&range, &local, &PathConfig::default())?;
        let report = verify_ground_space(&path.hamiltonian, &range, VERIFY_TOL);
        if !report.pass {
            return Err(Error::NoParentFound(format!(
                "thermal path on {{{label}}} did not isolate the marginal range (overlap {:.6})",
                report.overlap
            )));
        }
        let lifted = lift(&path.hamiltonian, region, sub)?;
        total = Some(match total {
            None => lifted,
            Some(t) => t.add(&lifted)?,
        });
        reports.push(SubsystemReport { region: region.clone(), pattern: local, certificate: cert, report });
    }
    let hamiltonian = total.expect("pattern is nonempty");
    let report = verify_ground_space(&hamiltonian, v, VERIFY_TOL);
    if !report.pass {
        return Err(Error::NoParentFound("sum of subsystem parents failed verification".into()));
    }
    Ok(ComposedParent { hamiltonian, subsystems: reports, report })
}

/// Maps a Hamiltonian on the relabelled subsystem back onto `region`.
fn lift(h: &LocalHamiltonian, region: &[usize], global: &Pattern) -> Result<LocalHamiltonian> {
    let terms = h.terms().iter().map(|t| (t.support.iter().map(|&q| region[q]).collect(), t.op.clone())).collect();
    LocalHamiltonian::new(global.clone(), terms, h.offset())
}
