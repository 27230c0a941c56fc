use localham::operator::{eigh, exp_herm, herm, inner, log_on_support, max_abs, partial_trace, tensor_embed, trace_re};
use localham::pattern::{pairing, project_local, rdm_vector_of, LocalBasis};
use localham::random::{random_density, random_hermitian};
use localham::{CMat, Pattern, Subspace, SystemShape};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn random_subspace(shape: &SystemShape, r: usize, rng: &mut StdRng) -> Subspace {
    let g = localham::random::ginibre(shape.total(), r, rng);
    Subspace::span(shape.clone(), &g).unwrap()
}

proptest! {
    #![proptest_config(cfg(100))]

    #[test]
    fn partial_trace_keeps_trace_and_positivity(seed in any::<u64>(), n in 2usize..=4, rank in 1usize..=4) {
        let mut rng = StdRng::seed_from_u64(seed);
        let shape = SystemShape::qubits(n);
        let rho = random_density(&shape, rank, &mut rng);
        let keep: Vec<usize> = (0..n).filter(|i| (seed >> i) & 1 == 1).collect();
        let keep = if keep.is_empty() { vec![0] } else { keep };
        let r = partial_trace(rho.matrix(), &shape, &keep).unwrap();
        prop_assert!((trace_re(&r) - 1.0).abs() < 1e-12);
        prop_assert!(eigh(&r).unwrap().values[0] > -1e-12);
    }

    #[test]
    fn embedding_is_linear(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let shape = SystemShape::new(vec![2, 3, 2]).unwrap();
        let s = [2usize, 1];
        let a = random_hermitian(6, &mut rng);
        let b = random_hermitian(6, &mut rng);
        let lhs = tensor_embed(&a, &s, &shape).unwrap() + tensor_embed(&b, &s, &shape).unwrap();
        let rhs = tensor_embed(&(a + b), &s, &shape).unwrap();
        prop_assert!(max_abs(&(lhs - rhs)) < 1e-12);
    }

    #[test]
    fn eigh_reconstructs(seed in any::<u64>(), d in 1usize..=64) {
        let mut rng = StdRng::seed_from_u64(seed);
        let m = random_hermitian(d, &mut rng);
        let e = eigh(&m).unwrap();
        let lam = CMat::from_diagonal(&localham::CVec::from_iterator(d, e.values.iter().map(|&x| localham::c64(x, 0.0))));
        let rec = &e.vectors * lam * e.vectors.adjoint();
        let scale = localham::operator::op_norm(&m).max(1.0);
        prop_assert!(max_abs(&(rec - &m)) <= 1e-10 * scale);
        prop_assert!(e.values.as_slice().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn log_inverts_exp_on_support(seed in any::<u64>(), rank in 1usize..=8) {
        let mut rng = StdRng::seed_from_u64(seed);
        let rho = random_density(&SystemShape::qubits(3), rank, &mut rng);
        let p = rho.range(1e-10);
        let l = log_on_support(rho.matrix()).unwrap();
        let back = p.projector() * exp_herm(&l) * p.projector();
        prop_assert!(max_abs(&(back - rho.matrix())) < 1e-8);
    }

    #[test]
    fn intersection_is_symmetric_and_contained(seed in any::<u64>(), ra in 2usize..=7, rb in 2usize..=7) {
        let mut rng = StdRng::seed_from_u64(seed);
        let shape = SystemShape::qubits(3);
        let a = random_subspace(&shape, ra, &mut rng);
        let b = random_subspace(&shape, rb, &mut rng);
        let ab = a.intersect(&b, 1e-8);
        let ba = b.intersect(&a, 1e-8);
        prop_assert_eq!(ab.is_some(), ba.is_some());
        prop_assert_eq!(ab.is_some(), ra + rb > 8);
        if let (Some(ab), Some(ba)) = (ab, ba) {
            prop_assert!(ab.equals(&ba, 1e-6));
            prop_assert!(a.contains(&ab, 1e-6) && b.contains(&ab, 1e-6));
            prop_assert!(ab.intersect(&ab, 1e-8).unwrap().equals(&ab, 1e-8));
        }
    }

    #[test]
    fn rdm_vector_is_linear(seed in any::<u64>(), p in 0.0f64..=1.0) {
        let mut rng = StdRng::seed_from_u64(seed);
        let shape = SystemShape::qubits(3);
        let k = Pattern::all_pairs(shape.clone()).unwrap();
        let r0 = random_density(&shape, 8, &mut rng);
        let r1 = random_density(&shape, 2, &mut rng);
        let mix = r0.matrix().scale(p) + r1.matrix().scale(1.0 - p);
        let lhs = rdm_vector_of(&mix, &k).unwrap();
        let m0 = rdm_vector_of(r0.matrix(), &k).unwrap();
        let m1 = rdm_vector_of(r1.matrix(), &k).unwrap();
        for ((l, a), b) in lhs.marginals().iter().zip(m0.marginals()).zip(m1.marginals()) {
            prop_assert!(max_abs(&(l - (a.scale(p) + b.scale(1.0 - p)))) < 1e-12);
        }
    }

    #[test]
    fn pairing_matches_full_trace(seed in any::<u64>(), n in 3usize..=4) {
        let mut rng = StdRng::seed_from_u64(seed);
        let shape = SystemShape::qubits(n);
        let k = Pattern::chain(shape.clone()).unwrap();
        let rho = random_density(&shape, 3, &mut rng);
        let (h, _) = project_local(&random_hermitian(shape.total(), &mut rng), &k);
        let x = rdm_vector_of(rho.matrix(), &k).unwrap();
        let lhs = pairing(&x, &h).unwrap();
        prop_assert!((lhs - inner(rho.matrix(), &h.assemble_matrix())).abs() < 1e-10);
    }

    #[test]
    fn projection_is_idempotent_and_self_adjoint(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let shape = SystemShape::qubits(3);
        let k = Pattern::chain(shape.clone()).unwrap();
        let h = random_hermitian(8, &mut rng);
        let g = random_hermitian(8, &mut rng);
        let ph = project_local(&h, &k).0.assemble_matrix();
        let pph = project_local(&ph, &k).0.assemble_matrix();
        prop_assert!(max_abs(&(&pph - &ph)) < 1e-12);
        let pg = project_local(&g, &k).0.assemble_matrix();
        prop_assert!((inner(&h, &pg) - inner(&ph, &g)).abs() < 1e-10);
        prop_assert!(max_abs(&(herm(&ph) - &ph)) < 1e-14);
    }
}

#[test]
fn local_basis_is_trace_orthogonal() {
    for shape in [SystemShape::qubits(3), SystemShape::new(vec![3, 2, 3]).unwrap()] {
        let k = Pattern::chain(shape).unwrap();
        let b = LocalBasis::new(&k);
        let el = b.elements();
        for i in 0..el.len() {
            for j in 0..i {
                assert!(inner(&el[i].full, &el[j].full).abs() < 1e-10, "{i} {j}");
            }
        }
    }
}
