//! Seeded problem instances shared by the benchmarks.

use localham::pattern::rdm_vector;
use localham::random::{ginibre, random_density, random_ket};
use localham::{MarginalVector, Pattern, Subspace, SystemShape};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random `r`-dimensional subspace of `n` qubits.
pub fn random_subspace(seed: u64, n: usize, r: usize) -> Subspace {
    let shape = SystemShape::qubits(n);
    Subspace::span(shape.clone(), &ginibre(shape.total(), r, &mut rng(seed))).expect("generic columns")
}

/// Marginals of a full-rank random state of `n` qubits on `pattern`.
pub fn full_rank_marginals(seed: u64, pattern: &Pattern) -> MarginalVector {
    let shape = pattern.shape();
    let rho = random_density(shape, shape.total(), &mut rng(seed));
    rdm_vector(&rho, pattern).expect("shapes agree")
}

pub fn random_state(seed: u64, n: usize) -> localham::CVec {
    random_ket(1 << n, &mut rng(seed))
}
