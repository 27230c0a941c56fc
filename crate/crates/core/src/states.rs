//! Named states and subspaces used throughout the examples and tests.

use crate::operator::{c64, ket, CMat, CVec, Subspace, SystemShape, C64};

fn sum(kets: &[(&str, f64)]) -> CVec {
    let mut v = ket(kets[0].0).scale(kets[0].1);
    for (b, c) in &kets[1..] {
        v += ket(b).scale(*c);
    }
    let n = v.norm();
    v.unscale(n)
}

fn span(n: usize, vs: &[CVec]) -> Subspace {
    Subspace::span(SystemShape::qubits(n), &CMat::from_columns(vs)).expect("independent kets")
}

/// `(|0…0⟩ + |1…1⟩)/√2`.
pub fn ghz(n: usize) -> CVec {
    let z = "0".repeat(n);
    let o = "1".repeat(n);
    sum(&[(&z, 1.0), (&o, 1.0)])
}

/// W-type state `Σ_i a_i |r_i⟩`, where `r_i` has its single excitation on
/// particle `i` (the vector is normalized).
pub fn w_type(amps: &[C64]) -> CVec {
    let n = amps.len();
    let mut v = CVec::zeros(1 << n);
    for (i, a) in amps.iter().enumerate() {
        v[1 << (n - 1 - i)] = *a;
    }
    let nrm = v.norm();
    v.unscale(nrm)
}

pub fn w(n: usize) -> CVec {
    w_type(&vec![c64(1.0, 0.0); n])
}

pub fn psi1() -> CVec {
    sum(&[("0000", 1.0), ("0101", 1.0), ("1000", 1.0), ("1110", 1.0)])
}

pub fn psi2() -> CVec {
    sum(&[("0000", 1.0), ("1011", 1.0), ("1101", 1.0), ("1110", 1.0)])
}

pub fn psi2_prime() -> CVec {
    sum(&[("0000", -1.0), ("1011", 1.0), ("1101", 1.0), ("1110", 1.0)])
}

/// `span{|000⟩, |111⟩}`, the range of `ρ_c`.
pub fn rho_c_space() -> Subspace {
    span(3, &[ket("000"), ket("111")])
}

/// `span{|000⟩+|110⟩+|111⟩, |010⟩}` as printed for ψ1's {1,2,3} range.
pub fn v123_printed() -> Subspace {
    span(3, &[ket("000") + ket("110") + ket("111"), ket("010")])
}

/// Actual range of ψ1's {1,2,3} marginal.
pub fn v123() -> Subspace {
    span(3, &[ket("000") + ket("100") + ket("111"), ket("010")])
}

pub fn v234() -> Subspace {
    span(3, &[ket("000") + ket("101"), ket("000") + ket("110")])
}

pub fn v134() -> Subspace {
    span(3, &[ket("000") + ket("100"), ket("001") + ket("110")])
}

pub fn line(n: usize, psi: &CVec) -> Subspace {
    Subspace::from_ket(SystemShape::qubits(n), psi).expect("nonzero ket")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::DensityMatrix;
    use crate::pattern::{rdm_vector, Pattern};

    #[test]
    fn psi1_ranges_match_named_spaces() {
        let s = SystemShape::qubits(4);
        let rho = DensityMatrix::from_ket(s, &psi1()).unwrap();
        let r123 = rho.partial_trace(&[0, 1, 2]).unwrap().range(1e-10);
        let r234 = rho.partial_trace(&[1, 2, 3]).unwrap().range(1e-10);
        let r134 = rho.partial_trace(&[0, 2, 3]).unwrap().range(1e-10);
        assert!(r123.equals(&v123(), 1e-10));
        assert!(!r123.equals(&v123_printed(), 1e-3));
        assert!(r234.equals(&v234(), 1e-10));
        assert!(r134.equals(&v134(), 1e-10));
    }

    #[test]
    fn psi2_pair_marginals_coincide() {
        let s = SystemShape::qubits(4);
        let p = Pattern::all_pairs(s.clone()).unwrap();
        let a = rdm_vector(&DensityMatrix::from_ket(s.clone(), &psi2()).unwrap(), &p).unwrap();
        let b = rdm_vector(&DensityMatrix::from_ket(s, &psi2_prime()).unwrap(), &p).unwrap();
        assert!(a.max_diff(&b) <= 1e-12);
        let ov = psi2().dotc(&psi2_prime()).norm();
        assert!((ov - 0.5).abs() < 1e-15);
    }

    #[test]
    fn w_has_unit_norm_and_single_excitations() {
        let v = w(4);
        assert!((v.norm() - 1.0).abs() < 1e-15);
        assert!((v[8].re - 0.5).abs() < 1e-15 && (v[1].re - 0.5).abs() < 1e-15);
    }
}
