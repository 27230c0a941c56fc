use localham::correlated::{leakage, LeakageConfig, Verdict};
use localham::operator::{eigh, inner, kron_all, trace_re};
use localham::pattern::rdm_vector_of;
use localham::random::{ginibre, random_ket, random_unitary};
use localham::{states, CMat, Pattern, Subspace, SystemShape};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn shape3() -> SystemShape {
    SystemShape::qubits(3)
}

/// Zero-energy space of `P12 ⊗ I + I ⊗ P23` with rank-one projectors chosen
/// orthogonal to the pieces of the product vector `a⊗b⊗c`, so it contains it.
fn ff_space_through(a: &CMat, b: &CMat, c: &CMat, rng: &mut StdRng) -> Subspace {
    let s = shape3();
    let mut lifted = Vec::new();
    for (pair, first) in [((a, b), true), ((b, c), false)] {
        let keep = localham::operator::kron(pair.0, pair.1);
        let mut x = ginibre(4, 1, rng);
        x -= &keep * (keep.adjoint() * &x);
        let kernel = Subspace::span(SystemShape::qubits(2), &x).unwrap().complement().unwrap();
        let big = if first {
            localham::operator::kron(kernel.projector(), &CMat::identity(2, 2))
        } else {
            localham::operator::kron(&CMat::identity(2, 2), kernel.projector())
        };
        lifted.push(Subspace::range_of(&s, &big, 0.5).unwrap());
    }
    localham::intersect_all(&lifted, 1e-8).unwrap()
}

proptest! {
    #![proptest_config(cfg(16))]

    /// More (or larger) subsets can only lower the leakage.
    #[test]
    fn refinement_lowers_leakage(seed in any::<u64>(), r in 1usize..=3) {
        let mut rng = StdRng::seed_from_u64(seed);
        let v = Subspace::span(shape3(), &ginibre(8, r, &mut rng)).unwrap();
        let c = LeakageConfig::default();
        let coarse = leakage(&v, &Pattern::chain(shape3()).unwrap(), &c).unwrap();
        let fine = leakage(&v, &Pattern::all_pairs(shape3()).unwrap(), &c).unwrap();
        prop_assert!(fine.lower_bound <= coarse.upper_bound + 1e-6,
            "fine [{}, {}] coarse [{}, {}]", fine.lower_bound, fine.upper_bound, coarse.lower_bound, coarse.upper_bound);
    }

    /// Random subspaces under all pairs sit on hidden faces of the state
    /// space often enough that this exercises the exposing-operator search.
    #[test]
    fn random_subspaces_get_decisive_verdicts(seed in any::<u64>(), r in 1usize..=3) {
        let mut rng = StdRng::seed_from_u64(seed);
        let v = Subspace::span(shape3(), &ginibre(8, r, &mut rng)).unwrap();
        let cert = leakage(&v, &Pattern::all_pairs(shape3()).unwrap(), &LeakageConfig::default()).unwrap();
        prop_assert_ne!(cert.verdict, Verdict::Indeterminate);
        prop_assert!(cert.lower_bound <= cert.upper_bound + 1e-6);
    }

    #[test]
    fn leakage_is_basis_independent(seed in any::<u64>(), r in 1usize..=3) {
        let mut rng = StdRng::seed_from_u64(seed);
        let basis = Subspace::span(shape3(), &ginibre(8, r, &mut rng)).unwrap().basis().clone();
        let rotated = &basis * random_unitary(r, &mut rng);
        let k = Pattern::chain(shape3()).unwrap();
        let c = LeakageConfig::default();
        let a = leakage(&Subspace::new(shape3(), basis).unwrap(), &k, &c).unwrap();
        let b = leakage(&Subspace::new(shape3(), rotated).unwrap(), &k, &c).unwrap();
        prop_assert!((a.leakage - b.leakage).abs() < 1e-6);
        prop_assert_eq!(a.verdict, b.verdict);
    }

    /// Witnesses of locally rotated GHZ states are checked from scratch.
    #[test]
    fn witnesses_verify_independently(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let u: Vec<CMat> = (0..3).map(|_| random_unitary(2, &mut rng)).collect();
        let psi = kron_all(&u) * states::ghz(3);
        let v = Subspace::from_ket(shape3(), &psi).unwrap();
        let k = Pattern::chain(shape3()).unwrap();
        let cert = leakage(&v, &k, &LeakageConfig::default()).unwrap();
        prop_assert_eq!(cert.verdict, Verdict::NotCorrelated);
        let w = cert.witness.unwrap();
        let m = w.matrix();
        prop_assert!(eigh(m).unwrap().values[0] > -1e-12);
        prop_assert!((trace_re(m) - 1.0).abs() < 1e-10);
        let diff = rdm_vector_of(m, &k).unwrap().trace_norm_diff(&rdm_vector_of(v.mixed_state().matrix(), &k).unwrap());
        prop_assert!(diff < 1e-6);
        let out = 1.0 - inner(m, v.projector());
        prop_assert!((out - cert.leakage).abs() < 1e-9);
        prop_assert!(cert.leakage >= 0.5);
    }

    /// Two correlated spaces through a common product vector intersect in a
    /// correlated space.
    #[test]
    fn intersections_stay_correlated(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let pieces: Vec<CMat> = (0..3).map(|_| CMat::from_column_slice(2, 1, random_ket(2, &mut rng).as_slice())).collect();
        let v1 = ff_space_through(&pieces[0], &pieces[1], &pieces[2], &mut rng);
        let v2 = ff_space_through(&pieces[0], &pieces[1], &pieces[2], &mut rng);
        let k = Pattern::chain(shape3()).unwrap();
        let c = LeakageConfig::default();
        prop_assert!(leakage(&v1, &k, &c).unwrap().correlated);
        prop_assert!(leakage(&v2, &k, &c).unwrap().correlated);
        let both = v1.intersect(&v2, 1e-8).unwrap();
        prop_assert!(leakage(&both, &k, &c).unwrap().correlated);
    }
}
