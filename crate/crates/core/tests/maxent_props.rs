use localham::maxent::{maxent_solve, thermal_path, MaxEntConfig, PathConfig};
use localham::operator::{kron_all, trace_distance, von_neumann_entropy, DensityMatrix};
use localham::pattern::{project_local, rdm_vector};
use localham::random::{ginibre, random_density, random_hermitian, random_unitary};
use localham::{CMat, Pattern, Subspace, SystemShape};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

/// Low-rank states: single sites at n = 2, the chain at n = 3. Low-rank
/// states under all pairs are generically fixed by their marginals, so
/// those use full rank.
fn instance(seed: u64, n: usize) -> (SystemShape, Pattern, DensityMatrix) {
    let mut rng = StdRng::seed_from_u64(seed);
    let shape = SystemShape::qubits(n);
    let (k, rank) = match (n, seed % 4) {
        (2, r) => (Pattern::parse(shape.clone(), "1;2").unwrap(), 1 + r as usize),
        (_, 3) => (Pattern::all_pairs(shape.clone()).unwrap(), 8),
        (_, r) => (Pattern::chain(shape.clone()).unwrap(), 2 + r as usize),
    };
    let rho = random_density(&shape, rank, &mut rng);
    (shape, k, rho)
}

/// A state on qutrits whose support is the product of random 2-dim local
/// subspaces (full rank there at n = 3). The maximizer lives on that product
/// and is well conditioned on it, so its numerical range is meaningful; a
/// low-rank chain state can have a maximizer with eigenvalues near 1e-9.
fn supported_instance(seed: u64, n: usize) -> (Pattern, DensityMatrix) {
    let mut rng = StdRng::seed_from_u64(seed);
    let rank = if n == 2 { 1 + (seed % 4) as usize } else { 8 };
    let tau = random_density(&SystemShape::qubits(n), rank, &mut rng);
    let isos: Vec<CMat> = (0..n).map(|_| random_unitary(3, &mut rng).columns(0, 2).into_owned()).collect();
    let iso = kron_all(&isos);
    let shape = SystemShape::new(vec![3; n]).unwrap();
    let k = if n == 2 { Pattern::parse(shape.clone(), "1;2").unwrap() } else { Pattern::chain(shape.clone()).unwrap() };
    let rho = DensityMatrix::new(shape, &iso * tau.matrix() * iso.adjoint()).unwrap();
    (k, rho)
}

proptest! {
    #![proptest_config(cfg(50))]

    /// Mixing in a state with support outside `range(ρ0)` raises entropy.
    #[test]
    fn mixing_entropy_gain(seed in any::<u64>(), r0 in 1usize..=4) {
        let mut rng = StdRng::seed_from_u64(seed);
        let shape = SystemShape::qubits(3);
        let rho0 = random_density(&shape, r0, &mut rng);
        let rho1 = random_density(&shape, 2, &mut rng);
        prop_assume!(!rho0.range(1e-10).contains(&rho1.range(1e-10), 1e-6));
        let s0 = rho0.entropy();
        let best = (1..100)
            .map(|i| {
                let x = i as f64 / 100.0;
                let m = rho0.matrix().scale(1.0 - x) + rho1.matrix().scale(x);
                von_neumann_entropy(&DensityMatrix::new(shape.clone(), m).unwrap())
            })
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(best > s0);
    }

    #[test]
    fn maxent_range_contains_state_range(seed in any::<u64>(), n in 2usize..=3) {
        let (k, rho) = supported_instance(seed, n);
        let sol = maxent_solve(&rdm_vector(&rho, &k).unwrap(), &MaxEntConfig::default(), None).unwrap();
        prop_assert!(sol.state.range(1e-10).contains(&rho.range(1e-10), 1e-6));
    }

    #[test]
    fn maxent_beats_every_consistent_state(seed in any::<u64>(), n in 2usize..=3) {
        let (_, k, rho) = instance(seed, n);
        let sol = maxent_solve(&rdm_vector(&rho, &k).unwrap(), &MaxEntConfig::default(), None).unwrap();
        prop_assert!(sol.entropy >= rho.entropy() - 1e-9);
    }

    #[test]
    fn warm_starts_agree(seed in any::<u64>()) {
        let (shape, k, rho) = instance(seed, 3);
        let targets = rdm_vector(&rho, &k).unwrap();
        let c = MaxEntConfig::default();
        let cold = maxent_solve(&targets, &c, None).unwrap();
        let mut rng = StdRng::seed_from_u64(seed ^ 0x5eed);
        let (warm, _) = project_local(&random_hermitian(shape.total(), &mut rng), &k);
        let hot = maxent_solve(&targets, &c, Some(&warm)).unwrap();
        prop_assert!(trace_distance(cold.state.matrix(), hot.state.matrix()) < 1e-6);
    }
}

proptest! {
    #![proptest_config(cfg(12))]

    #[test]
    fn path_entropy_decreases_with_p(seed in any::<u64>(), r in 1usize..=3) {
        let mut rng = StdRng::seed_from_u64(seed);
        let shape = SystemShape::qubits(3);
        let v = Subspace::span(shape.clone(), &ginibre(8, r, &mut rng)).unwrap();
        let k = Pattern::chain(shape).unwrap();
        let tp = thermal_path(&v, &k, &PathConfig::default()).unwrap();
        for w in tp.steps.windows(2) {
            prop_assert!(w[0].p > w[1].p);
            prop_assert!(w[0].entropy >= w[1].entropy - 1e-9);
        }
    }
}
