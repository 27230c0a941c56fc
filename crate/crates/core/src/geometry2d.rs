//! Planar shadows `{(Tr ρO1, Tr ρO2)}` of the state space for two observables.
//!
//! Directions follow the ground-state convention: the face for angle `θ`
//! is the image of the ground space of `A(θ) = cosθ·O1 + sinθ·O2`, so it
//! minimizes `cosθ·x + sinθ·y` and the support value is `λ_min(A(θ))`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::operator::{eigh_herm, hermiticity_error, CMat, CVec};

pub type Point = (f64, f64);

/// Relative spectral tolerance for the ground cluster of `A(θ)`.
const CLUSTER_TOL: f64 = 1e-9;
/// Faces shorter than this (relative to the observable scale) are points.
const FACE_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct ObservablePair {
    o1: CMat,
    o2: CMat,
    scale: f64,
}

#[derive(Clone, Debug)]
pub struct Face {
    pub theta: f64,
    /// `λ_min(A(θ))`.
    pub value: f64,
    pub endpoints: [Point; 2],
    /// States mapping to the two endpoints.
    pub states: [CVec; 2],
    /// 0 for a point, 1 for a segment.
    pub face_dim: usize,
    /// Multiplicity of `λ_min(A(θ))`.
    pub multiplicity: usize,
}

#[derive(Clone, Debug)]
pub struct BodySample2D {
    pub directions: Vec<f64>,
    /// `(x, y, face_dim)`, both endpoints of every face in direction order.
    pub points: Vec<(f64, f64, usize)>,
}

#[derive(Clone, Debug)]
pub struct ProbeConfig {
    pub tol: f64,
    /// Size of the uniform direction grid.
    pub directions: usize,
    /// Offset used to test whether the normal cone has nonzero width.
    pub cone_step: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self { tol: 1e-6, directions: 100_000, cone_step: 1e-3 }
    }
}

#[derive(Clone, Debug)]
pub struct Exposure {
    pub target: Point,
    pub is_extreme: bool,
    pub is_exposed: bool,
    /// A state mapping to `target` (within tol), when one was found.
    pub achieving_state: Option<CVec>,
    /// Best normal direction found.
    pub normal: f64,
    /// `⟨u(θ), target⟩ − λ_min(A(θ))` at `normal`; zero on the boundary.
    pub boundary_gap: f64,
    /// Direction exposing `target`, if any.
    pub exposing_direction: Option<f64>,
    pub tol: f64,
}

fn expect(o: &CMat, v: &CVec) -> f64 {
    v.dotc(&(o * v)).re
}

fn dist(a: Point, b: Point) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Distance from `p` to the segment `[a, b]`.
fn seg_dist(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let l2 = dx * dx + dy * dy;
    if l2 == 0.0 {
        return dist(p, a);
    }
    let t = (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / l2).clamp(0.0, 1.0);
    dist(p, (a.0 + t * dx, a.1 + t * dy))
}

impl ObservablePair {
    pub fn new(o1: CMat, o2: CMat) -> Result<Self> {
        if o1.shape() != o2.shape() || !o1.is_square() {
            return Err(Error::DimensionMismatch { expected: o1.nrows(), found: o2.nrows() });
        }
        for o in [&o1, &o2] {
            let e = hermiticity_error(o);
            if e > 1e-12 {
                return Err(Error::NotHermitian(e));
            }
        }
        let scale = crate::operator::op_norm(&o1).max(crate::operator::op_norm(&o2)).max(1.0);
        Ok(Self { o1, o2, scale })
    }

    /// `O1 = X_2 + (I + Z_1)/2`, `O2 = Y_2` on two qubits. The image is the
    /// convex hull of the unit disks centred at `(0, 0)` and `(1, 0)`.
    pub fn two_disks() -> Self {
        use crate::operator::{kron, pauli};
        let i2 = pauli::i2();
        let o1 = kron(&i2, &pauli::x()) + (kron(&i2, &i2) + kron(&pauli::z(), &i2)).scale(0.5);
        Self::new(o1, kron(&i2, &pauli::y())).expect("Pauli products are Hermitian")
    }

    pub fn o1(&self) -> &CMat {
        &self.o1
    }

    pub fn o2(&self) -> &CMat {
        &self.o2
    }

    /// `(Tr ρO1, Tr ρO2)` for the pure state `v`.
    pub fn image(&self, v: &CVec) -> Point {
        (expect(&self.o1, v), expect(&self.o2, v))
    }

    /// `λ_min(A(θ))`, the support value in direction `θ`.
    pub fn support_value(&self, theta: f64) -> f64 {
        let a = self.o1.scale(theta.cos()) + self.o2.scale(theta.sin());
        eigh_herm(&a).values[0]
    }

    /// Exposed face in direction `θ`: image of the ground space of `A(θ)`.
    pub fn support_face(&self, theta: f64) -> Face {
        self.face_within(theta, CLUSTER_TOL * self.scale)
    }

    /// Image of the eigenvectors of `A(θ)` within `spread` of `λ_min`.
    fn face_within(&self, theta: f64, spread: f64) -> Face {
        let (c, s) = (theta.cos(), theta.sin());
        let a = self.o1.scale(c) + self.o2.scale(s);
        let e = eigh_herm(&a);
        let idx = e.ground_indices(spread);
        let g = e.columns(&idx);
        let (lo, hi) = if idx.len() == 1 {
            let v: CVec = g.column(0).into_owned();
            (v.clone(), v)
        } else {
            // Along the face, x and y vary only in the direction (−sinθ, cosθ).
            let along = g.adjoint() * (self.o1.scale(-s) + self.o2.scale(c)) * &g;
            let f = eigh_herm(&along);
            let last = f.values.len() - 1;
            (&g * f.vectors.column(0), &g * f.vectors.column(last))
        };
        let endpoints = [self.image(&lo), self.image(&hi)];
        let face_dim = usize::from(dist(endpoints[0], endpoints[1]) > FACE_TOL * self.scale);
        Face { theta, value: e.values[0], endpoints, states: [lo, hi], face_dim, multiplicity: idx.len() }
    }

    /// Faces for `n` uniform directions `2πk/n`, in parallel.
    pub fn faces(&self, n: usize) -> Vec<Face> {
        (0..n).into_par_iter().map(|k| self.support_face(std::f64::consts::TAU * k as f64 / n as f64)).collect()
    }

    /// Sweeps `n ≥ 8` uniform directions and collects every face endpoint.
    pub fn sample_body(&self, n: usize) -> Result<BodySample2D> {
        if n < 8 {
            return Err(Error::InvalidParameter(format!("need at least 8 directions, got {n}")));
        }
        let faces = self.faces(n);
        let directions = faces.iter().map(|f| f.theta).collect();
        let points = faces.iter().flat_map(|f| f.endpoints.iter().map(move |p| (p.0, p.1, f.face_dim))).collect();
        Ok(BodySample2D { directions, points })
    }

    /// `⟨u(θ), p⟩ − λ_min(A(θ))`: nonnegative for points of the body, zero
    /// exactly when `θ` is in the normal cone of `p`.
    fn gap(&self, p: Point, theta: f64) -> f64 {
        theta.cos() * p.0 + theta.sin() * p.1 - self.support_value(theta)
    }

    /// Golden-section refinement of the gap around `theta` within `±h`.
    fn refine_normal(&self, p: Point, theta: f64, h: f64) -> (f64, f64) {
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (theta - h, theta + h);
        let mut c = b - phi * (b - a);
        let mut d = a + phi * (b - a);
        let (mut fc, mut fd) = (self.gap(p, c), self.gap(p, d));
        for _ in 0..80 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - phi * (b - a);
                fc = self.gap(p, c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + phi * (b - a);
                fd = self.gap(p, d);
            }
        }
        let t = 0.5 * (a + b);
        let g0 = self.gap(p, theta);
        let gt = self.gap(p, t);
        if g0 <= gt {
            (theta, g0)
        } else {
            (t, gt)
        }
    }

    /// Decides whether `target` is an extreme point of the body and whether
    /// some direction exposes it alone, at precision `cfg.tol`.
    ///
    /// The normal direction is located on a uniform grid and refined. Faces
    /// are taken at precision `tol`. A boundary point is extreme unless it
    /// lies inside a face segment. An
    /// extreme point is exposed when its face is a single point or when its
    /// normal cone has nonzero width (the gap stays at zero a step
    /// `cone_step` away on either side).
    pub fn exposed_probe(&self, target: Point, cfg: &ProbeConfig) -> Result<Exposure> {
        let n = cfg.directions.max(8);
        let gaps: Vec<f64> =
            (0..n).into_par_iter().map(|k| self.gap(target, std::f64::consts::TAU * k as f64 / n as f64)).collect();
        let (k0, g0) = gaps.iter().copied().enumerate().min_by(|a, b| a.1.total_cmp(&b.1)).expect("grid is nonempty");
        let step = std::f64::consts::TAU / n as f64;
        if g0 < -cfg.tol * self.scale {
            return Err(Error::InvalidParameter(format!(
                "target ({}, {}) lies outside the body (by {:.3e})",
                target.0, target.1, -g0
            )));
        }
        let (theta, gap) = self.refine_normal(target, k0 as f64 * step, step);
        let mut out = Exposure {
            target,
            is_extreme: false,
            is_exposed: false,
            achieving_state: None,
            normal: theta,
            boundary_gap: gap,
            exposing_direction: None,
            tol: cfg.tol,
        };
        if gap > cfg.tol * self.scale {
            return Ok(out);
        }
        // The refined normal is only known to about the square root of the
        // gap resolution, so near-degenerate levels count as ground.
        let face = self.face_within(theta, cfg.tol * self.scale);
        let [a, b] = face.endpoints;
        if face.face_dim == 0 {
            if dist(a, target) <= cfg.tol * self.scale {
                out.is_extreme = true;
                out.is_exposed = true;
                out.exposing_direction = Some(theta);
                out.achieving_state = Some(face.states[0].clone());
            }
            return Ok(out);
        }
        if seg_dist(target, a, b) > cfg.tol * self.scale {
            return Ok(out);
        }
        let end = [a, b].iter().position(|&e| dist(e, target) <= cfg.tol * self.scale);
        let Some(end) = end else {
            // Relative interior of a segment: achievable, not extreme.
            out.achieving_state = Some(self.segment_state(&face, target));
            return Ok(out);
        };
        out.is_extreme = true;
        out.achieving_state = Some(face.states[end].clone());
        let flat = 1e-12 * self.scale;
        for t in [theta - cfg.cone_step, theta + cfg.cone_step] {
            if self.gap(target, t) <= flat {
                let mid = 0.5 * (theta + t);
                let f = self.support_face(mid);
                if f.face_dim == 0 && dist(f.endpoints[0], target) <= cfg.tol * self.scale {
                    out.is_exposed = true;
                    out.exposing_direction = Some(mid);
                    break;
                }
            }
        }
        Ok(out)
    }

    /// Superposition of the two endpoint states landing on `target`.
    fn segment_state(&self, face: &Face, target: Point) -> CVec {
        let [a, b] = face.endpoints;
        let l = dist(a, b);
        let t = (dist(a, target) / l).clamp(0.0, 1.0);
        // Endpoint states are eigenvectors of the compressed "along" operator,
        // hence orthogonal with zero cross term in it.
        let v = face.states[0].scale((1.0 - t).sqrt()) + face.states[1].scale(t.sqrt());
        let n = v.norm();
        v / crate::operator::c64(n, 0.0)
    }

    /// Endpoints of face segments that are extreme but not exposed.
    pub fn non_exposed_extreme_points(&self, n: usize, cfg: &ProbeConfig) -> Result<Vec<Exposure>> {
        let mut cands: Vec<Point> = Vec::new();
        for f in self.faces(n).iter().filter(|f| f.face_dim == 1) {
            for p in f.endpoints {
                if cands.iter().all(|&q| dist(p, q) > cfg.tol * self.scale) {
                    cands.push(p);
                }
            }
        }
        let mut out = Vec::new();
        for p in cands {
            let e = self.exposed_probe(p, cfg)?;
            if e.is_extreme && !e.is_exposed {
                out.push(e);
            }
        }
        Ok(out)
    }
}

/// Convex hull, counter-clockwise from the lowest-leftmost point, without
/// collinear vertices.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut p: Vec<Point> = points.iter().copied().filter(|q| q.0.is_finite() && q.1.is_finite()).collect();
    p.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let cross = |o: Point, a: Point, b: Point| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut hull: Vec<Point> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> =
            if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    hull
}

/// Shoelace area of a simple polygon.
pub fn polygon_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a.0 * b.1 - a.1 * b.0
        })
        .sum::<f64>()
        .abs()
        / 2.0
}

impl BodySample2D {
    pub fn hull(&self) -> Vec<Point> {
        convex_hull(&self.points.iter().map(|p| (p.0, p.1)).collect::<Vec<_>>())
    }

    pub fn area(&self) -> f64 {
        polygon_area(&self.hull())
    }
}
