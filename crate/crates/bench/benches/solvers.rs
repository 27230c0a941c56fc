use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use localham::constructors::{three_qubit_parent_of_state, w_chain_parent, WTypeSpec};
use localham::correlated::{leakage, LeakageConfig};
use localham::geometry2d::ObservablePair;
use localham::maxent::{maxent_solve, thermal_path, MaxEntConfig, PathConfig};
use localham::random::random_hermitian;
use localham::{eigh, states, Pattern, SystemShape};
use localham_bench::{full_rank_marginals, random_state, random_subspace, rng};
use std::hint::black_box;

fn dense(c: &mut Criterion) {
    let mut g = c.benchmark_group("eigh");
    for d in [16, 64, 256] {
        let h = random_hermitian(d, &mut rng(d as u64));
        g.bench_with_input(BenchmarkId::from_parameter(d), &h, |b, h| b.iter(|| eigh(black_box(h)).unwrap()));
    }
    g.finish();
}

fn maxent(c: &mut Criterion) {
    let mut g = c.benchmark_group("maxent_solve");
    for n in [3, 4] {
        let k = Pattern::all_pairs(SystemShape::qubits(n)).unwrap();
        let x = full_rank_marginals(n as u64, &k);
        g.bench_with_input(BenchmarkId::new("all_pairs", n), &x, |b, x| {
            b.iter(|| maxent_solve(black_box(x), &MaxEntConfig::default(), None).unwrap())
        });
    }
    g.finish();
}

fn leakage_sdp(c: &mut Criterion) {
    let cfg = LeakageConfig::default();
    let mut g = c.benchmark_group("leakage");
    let chain = Pattern::chain(SystemShape::qubits(3)).unwrap();
    let ghz = states::line(3, &states::ghz(3));
    g.bench_function("ghz_chain", |b| b.iter(|| leakage(black_box(&ghz), &chain, &cfg).unwrap()));
    let pairs = Pattern::all_pairs(SystemShape::qubits(3)).unwrap();
    for r in [1, 2, 3] {
        let v = random_subspace(r as u64, 3, r);
        g.bench_with_input(BenchmarkId::new("random_all_pairs", r), &v, |b, v| {
            b.iter(|| leakage(black_box(v), &pairs, &cfg).unwrap())
        });
    }
    let psi2 = states::line(4, &states::psi2());
    let pairs4 = Pattern::all_pairs(SystemShape::qubits(4)).unwrap();
    g.bench_function("psi2_all_pairs", |b| b.iter(|| leakage(black_box(&psi2), &pairs4, &cfg).unwrap()));
    g.finish();
}

fn constructors(c: &mut Criterion) {
    let mut g = c.benchmark_group("parents");
    g.sample_size(10);
    let psi = random_state(7, 3);
    g.bench_function("three_qubit_random", |b| b.iter(|| three_qubit_parent_of_state(black_box(&psi)).unwrap()));
    let spec = WTypeSpec::uniform(5).unwrap();
    g.bench_function("w_chain_5", |b| b.iter(|| w_chain_parent(black_box(&spec)).unwrap()));
    let v = states::line(4, &states::psi1());
    let k = Pattern::all_pairs(SystemShape::qubits(4)).unwrap();
    let path = PathConfig::down_to(1e-4);
    g.bench_function("thermal_path_psi1", |b| b.iter(|| thermal_path(black_box(&v), &k, &path).unwrap()));
    g.finish();
}

fn geometry(c: &mut Criterion) {
    let pair = ObservablePair::two_disks();
    c.bench_function("sample_body_two_disks_720", |b| b.iter(|| pair.sample_body(black_box(720)).unwrap()));
}

criterion_group!(benches, dense, maxent, leakage_sdp, constructors, geometry);
criterion_main!(benches);
