//! Seeded random states and operators.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::operator::{c64, herm, CMat, CVec, DensityMatrix, SystemShape};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| c64(gaussian(rng), gaussian(rng)))
}

/// Haar-random unit vector.
pub fn random_ket<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVec {
    let v = CVec::from_fn(d, |_, _| c64(gaussian(rng), gaussian(rng)));
    let n = v.norm();
    v.unscale(n)
}

/// GUE-distributed Hermitian matrix.
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    herm(&ginibre(d, d, rng))
}

/// Induced-measure random state of rank at most `rank` (full rank when
/// `rank >= D`).
pub fn random_density<R: Rng + ?Sized>(shape: &SystemShape, rank: usize, rng: &mut R) -> DensityMatrix {
    let d = shape.total();
    let g = ginibre(d, rank.max(1), rng);
    let m = &g * g.adjoint();
    let tr: f64 = (0..d).map(|i| m[(i, i)].re).sum();
    DensityMatrix::new(shape.clone(), herm(&m.unscale(tr))).expect("Ginibre state is valid")
}

/// Haar-random unitary (QR of a Ginibre matrix with phase correction).
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let g = ginibre(d, d, rng);
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for k in 0..d {
        let z = r[(k, k)];
        let ph = if z.norm() > 0.0 { z / z.norm() } else { c64(1.0, 0.0) };
        let col = q.column(k) * ph;
        q.set_column(k, &col);
    }
    q
}
