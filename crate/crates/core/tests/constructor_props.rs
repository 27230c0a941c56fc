use localham::constructors::{
    ff_hamiltonian, perturbation_bound, splitting_operator, subsystem_compose, three_qubit_parent_of_state,
    verify_ground_space, w_chain_parent, xxz_scan, WTypeSpec, VERIFY_TOL,
};
use localham::correlated::{leakage, LeakageConfig};
use localham::operator::{eigh, kron, max_abs, tensor_embed};
use localham::random::{ginibre, random_hermitian, random_ket};
use localham::{states, CMat, LocalHamiltonian, Pattern, Subspace, SystemShape};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn chain3() -> Pattern {
    Pattern::chain(SystemShape::qubits(3)).unwrap()
}

fn ground_space_of(h: &CMat, shape: &SystemShape, r: usize) -> Subspace {
    let e = eigh(h).unwrap();
    Subspace::new(shape.clone(), e.vectors.columns(0, r).into_owned()).unwrap()
}

/// `(H_W, H_U, V)` on an unstructured space: `W ⊋ V`, `H_W ⪰ 0` with kernel
/// `W`, `H_U V = 0` and `H_U` positive definite on `W ⊖ V`.
fn abstract_triple(seed: u64, r: usize, extra: usize) -> (CMat, CMat, Subspace) {
    let mut rng = StdRng::seed_from_u64(seed);
    let shape = SystemShape::qubits(3);
    let w = Subspace::span(shape.clone(), &ginibre(8, r + extra, &mut rng)).unwrap();
    let v = Subspace::span(shape.clone(), &(w.basis() * ginibre(r + extra, r, &mut rng))).unwrap();
    let g = ginibre(8, 8, &mut rng);
    let off = CMat::identity(8, 8) - w.projector();
    let h_w = &off * &g * g.adjoint() * &off;
    let pv = CMat::identity(8, 8) - v.projector();
    let mut h_u = &pv * random_hermitian(8, &mut rng) * &pv;
    let rest = w.minus(&v).unwrap();
    let comp = rest.basis().adjoint() * &h_u * rest.basis();
    let shift = 0.1 - eigh(&comp).unwrap().values[0].min(0.0);
    h_u += rest.projector().scale(shift);
    (h_w, h_u, v)
}

/// FF projectors and a splitting operator for a Haar-random three-qubit state.
fn local_triple(seed: u64) -> (LocalHamiltonian, LocalHamiltonian, Subspace) {
    let mut rng = StdRng::seed_from_u64(seed);
    let s = SystemShape::qubits(3);
    let v = Subspace::from_ket(s, &random_ket(8, &mut rng)).unwrap();
    let (h_w, w) = ff_hamiltonian(&v, &chain3()).unwrap();
    let h_u = splitting_operator(&v, &w, &chain3()).unwrap();
    (h_w, h_u, v)
}

proptest! {
    #![proptest_config(cfg(40))]

    #[test]
    fn ff_terms_annihilate_w(seed in any::<u64>(), r in 1usize..=3, pairs in any::<bool>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let s = SystemShape::qubits(3);
        let v = Subspace::span(s.clone(), &ginibre(8, r, &mut rng)).unwrap();
        let k = if pairs { Pattern::all_pairs(s.clone()).unwrap() } else { chain3() };
        let (h, w) = ff_hamiltonian(&v, &k).unwrap();
        prop_assert!(w.contains(&v, 1e-8));
        for term in h.terms() {
            let big = tensor_embed(&term.op, &term.support, &s).unwrap();
            prop_assert!(max_abs(&(big * w.basis())) <= 1e-10);
        }
        prop_assert!(eigh(&h.assemble_matrix()).unwrap().values[0] > -1e-10);
    }

    /// Above the threshold the ground space stays `V`.
    #[test]
    fn perturbation_is_stable_above_threshold(seed in any::<u64>(), r in 1usize..=3, extra in 1usize..=3) {
        let (h_w, h_u, v) = abstract_triple(seed, r, extra);
        let (b, w) = perturbation_bound(&h_w, &h_u, &v).unwrap();
        prop_assert_eq!(w.dim(), r + extra);
        prop_assert!(b.lambda_min_pos_w > 0.0 && b.mu > 0.0 && b.omega > 0.0);
        let plain = b.omega * (b.mu + b.omega) / (b.lambda_min_pos_w * b.mu);
        prop_assert!((b.t_star - 1.1 * plain).abs() <= 1e-12 * b.t_star);
        for t in [b.t_star, 2.0 * b.t_star, 10.0 * b.t_star] {
            let h = h_w.scale(t) + &h_u;
            let e = eigh(&h).unwrap();
            prop_assert!(e.values[r] - e.values[0] > 1e-9);
            prop_assert!(ground_space_of(&h, v.shape(), r).equals(&v, 1e-6));
        }
    }
}

#[test]
fn t_star_suffices_on_local_triples_and_small_t_can_fail() {
    let mut failures_at_small_t = 0;
    for seed in 0..20 {
        let (h_w, h_u, v) = local_triple(seed);
        let (b, _) = perturbation_bound(&h_w.assemble_matrix(), &h_u.assemble_matrix(), &v).unwrap();
        for t in [b.t_star, 2.0 * b.t_star] {
            let h = h_w.scale(t).add(&h_u).unwrap();
            assert!(verify_ground_space(&h, &v, VERIFY_TOL).pass, "seed {seed} t {t}");
        }
        let small = h_w.scale(0.01 * b.t_star).add(&h_u).unwrap();
        if !verify_ground_space(&small, &v, VERIFY_TOL).pass {
            failures_at_small_t += 1;
        }
    }
    assert!(failures_at_small_t > 0, "the bound never mattered");
}

/// Kernel projectors of two frustration-free Hamiltonians; their sum has
/// the intersection of the ground spaces as its ground space.
#[test]
fn sum_of_parents_has_intersection_as_ground_space() {
    let s = SystemShape::qubits(3);
    for seed in 0..10u64 {
        let mut rng = StdRng::seed_from_u64(seed);
        let pieces: Vec<CMat> =
            (0..3).map(|_| CMat::from_column_slice(2, 1, random_ket(2, &mut rng).as_slice())).collect();
        let product = kron(&kron(&pieces[0], &pieces[1]), &pieces[2]);
        let mut parents = Vec::new();
        for _ in 0..2 {
            // Random rank-one terms on {1,2} and {2,3} that miss the product vector.
            let mut terms = Vec::new();
            for (support, keep) in
                [(vec![0, 1], kron(&pieces[0], &pieces[1])), (vec![1, 2], kron(&pieces[1], &pieces[2]))]
            {
                let mut x = ginibre(4, 1, &mut rng);
                x -= &keep * (keep.adjoint() * &x);
                let x = x.scale(1.0 / x.norm());
                terms.push((support, &x * x.adjoint()));
            }
            let h = LocalHamiltonian::new(chain3(), terms, 0.0).unwrap();
            let e = eigh(&h.assemble_matrix()).unwrap();
            let zero: Vec<usize> = (0..8).filter(|&i| e.values[i] < 1e-10).collect();
            let g = Subspace::new(s.clone(), e.columns(&zero)).unwrap();
            assert!(g.contains(&Subspace::span(s.clone(), &product).unwrap(), 1e-8));
            parents.push((h, g));
        }
        let both = parents[0].1.intersect(&parents[1].1, 1e-8).unwrap();
        let sum = parents[0].0.add(&parents[1].0).unwrap();
        assert!(verify_ground_space(&sum, &both, VERIFY_TOL).pass, "seed {seed}");
    }
}

/// Every verified parent's ground space is certified correlated on the
/// parent's pattern.
#[test]
fn route_outputs_are_correlated() {
    let c = LeakageConfig::default();
    let check = |h: &LocalHamiltonian, v: &Subspace, what: &str| {
        assert!(verify_ground_space(h, v, VERIFY_TOL).pass, "{what}");
        let cert = leakage(v, h.pattern(), &c).unwrap();
        assert!(cert.correlated, "{what}: leakage {:e}", cert.leakage);
    };

    let mut rng = StdRng::seed_from_u64(11);
    for i in 0..5 {
        let psi = random_ket(8, &mut rng);
        let p = three_qubit_parent_of_state(&psi).unwrap();
        check(
            &p.hamiltonian,
            &Subspace::from_ket(SystemShape::qubits(3), &psi).unwrap(),
            &format!("three-qubit {i} ({})", p.route),
        );
    }

    for n in [3, 4] {
        let spec = WTypeSpec::uniform(n).unwrap();
        let p = w_chain_parent(&spec).unwrap();
        check(
            &p.hamiltonian,
            &Subspace::from_ket(SystemShape::qubits(n), &spec.ket()).unwrap(),
            &format!("w chain {n}"),
        );
    }

    let scan = xxz_scan(3, 1.0, 1.0, true).unwrap();
    check(&scan.hamiltonian, &Subspace::from_ket(SystemShape::qubits(3), &states::w(3)).unwrap(), "xxz ring");

    let s4 = SystemShape::qubits(4);
    let psi1 = Subspace::from_ket(s4.clone(), &states::psi1()).unwrap();
    let k = Pattern::parse(s4.clone(), "1,2,3;2,3,4").unwrap();
    let subs = [Pattern::parse(s4.clone(), "1,2;1,3;2,3").unwrap(), Pattern::parse(s4.clone(), "2,3;2,4;3,4").unwrap()];
    let composed = subsystem_compose(&psi1, &k, &subs).unwrap();
    check(&composed.hamiltonian, &psi1, "psi1 composed");
}
