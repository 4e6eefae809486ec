//! Finite-matrix operator analysis: numerical range, Kreiss constants with
//! respect to planar regions, sectorial angles, the sectorial power calculus
//! and branch-rotated matrix logarithms.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, CMat};
use crate::C64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("eigenvalue {witness} lies outside the closed region")]
    SpectrumOutside { witness: C64 },
    #[error("not sectorial: {reason}")]
    NotSectorial { reason: String },
    #[error("quadrature did not settle (last change {change:e})")]
    QuadratureNotConverged { change: f64 },
    #[error("eigenvalue {witness} lies on the branch ray")]
    RayHitsSpectrum { witness: C64 },
    #[error("matrix is singular")]
    Singular,
    #[error("matrix must be square and nonempty")]
    BadShape,
}

fn check_square(t: &CMat) -> Result<(), SpectralError> {
    if t.nrows() == 0 || t.nrows() != t.ncols() {
        Err(SpectralError::BadShape)
    } else {
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Numerical range

/// Support value of `W(T)` in direction `θ` and the boundary point attaining it.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct SupportSample {
    pub angle: f64,
    pub support: f64,
    pub point: C64,
}

/// Boundary of the numerical range from its support function.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NumericalRangeBoundary {
    pub samples: Vec<SupportSample>,
}

/// Support function of `W(T)` at `num_angles` equally spaced directions.
pub fn numerical_range(t: &CMat, num_angles: usize) -> NumericalRangeBoundary {
    let k = num_angles.max(8);
    let samples = (0..k)
        .into_par_iter()
        .map(|i| {
            let angle = 2.0 * PI * i as f64 / k as f64;
            let rot = t * C64::from_polar(1.0, -angle);
            let h = (&rot + rot.adjoint()) * C64::new(0.5, 0.0);
            let (support, x) = linalg::hermitian_top(&h);
            let point = (x.adjoint() * t * &x)[(0, 0)];
            SupportSample { angle, support, point }
        })
        .collect();
    NumericalRangeBoundary { samples }
}

impl NumericalRangeBoundary {
    /// `max |z|` over `W(T)`: the largest support value over directions.
    pub fn numerical_radius(&self) -> f64 {
        self.samples.iter().map(|s| s.support).fold(f64::MIN, f64::max)
    }

    /// `z` satisfies every sampled support inequality with slack `margin`.
    pub fn contains(&self, z: C64, margin: f64) -> bool {
        self.samples.iter().all(|s| (z * C64::from_polar(1.0, -s.angle)).re <= s.support + margin)
    }

    /// Vertices of the circumscribed polygon `⋂ {Re(e^{−iθ}z) ≤ s}`.
    pub fn outer_polygon(&self) -> Vec<C64> {
        let k = self.samples.len();
        (0..k)
            .map(|i| {
                let a = self.samples[i];
                let b = self.samples[(i + 1) % k];
                let (ua, ub) = (C64::from_polar(1.0, a.angle), C64::from_polar(1.0, b.angle));
                // Solve Re(conj(u) z) = s for both lines.
                let det = ua.re * ub.im - ua.im * ub.re;
                if det.abs() < 1e-300 {
                    return a.point;
                }
                let x = (a.support * ub.im - b.support * ua.im) / det;
                let y = (ua.re * b.support - ub.re * a.support) / det;
                C64::new(x, y)
            })
            .collect()
    }

    /// Attained boundary points (an inscribed polygon).
    pub fn inner_polygon(&self) -> Vec<C64> {
        self.samples.iter().map(|s| s.point).collect()
    }

    /// Convexity test of the support function on consecutive triples:
    /// `s(θ₂) ≤ (s(θ₁) sin(θ₃−θ₂) + s(θ₃) sin(θ₂−θ₁)) / sin(θ₃−θ₁)`.
    pub fn support_is_convex(&self, tol: f64) -> bool {
        let k = self.samples.len();
        (0..k).all(|i| {
            let a = self.samples[i];
            let b = self.samples[(i + 1) % k];
            let c = self.samples[(i + 2) % k];
            let d21 = (b.angle - a.angle).rem_euclid(2.0 * PI);
            let d32 = (c.angle - b.angle).rem_euclid(2.0 * PI);
            let d31 = d21 + d32;
            if d31 >= PI {
                return true;
            }
            b.support <= (a.support * d32.sin() + c.support * d21.sin()) / d31.sin() + tol
        })
    }

    /// Region view of the hull.
    pub fn region(&self) -> Region {
        Region::NumericalRangeHull { support: self.samples.iter().map(|s| (s.angle, s.support)).collect() }
    }
}

/// `0` strictly inside the support hull: every support value exceeds `1e−9`.
pub fn zero_in_interior_numrange(b: &NumericalRangeBoundary) -> bool {
    b.samples.iter().all(|s| s.support > 1e-9)
}

// ---------------------------------------------------------------------------
// Regions

/// Closed planar regions used for Kreiss constants.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub enum Region {
    /// `{z ≠ 0 : |arg z| < ω}` (closure used for distances).
    Sector { omega: f64 },
    Disk { center: C64, radius: f64 },
    /// `{|z| ≤ clip} ∖ D(center, radius)`: outside a disk, clipped to a large disk about 0.
    DiskExteriorComplementClip { center: C64, radius: f64, clip: f64 },
    /// Convex polygon, vertices counterclockwise.
    ConvexPolygon { vertices: Vec<C64> },
    /// `⋂ {Re(e^{−iθ}z) ≤ s}` over `(θ, s)` pairs.
    NumericalRangeHull { support: Vec<(f64, f64)> },
}

fn polygon_distance(v: &[C64], z: C64) -> f64 {
    let k = v.len();
    if k == 0 {
        return f64::INFINITY;
    }
    if k == 1 {
        return (z - v[0]).norm();
    }
    let inside = (0..k).all(|i| {
        let a = v[i];
        let b = v[(i + 1) % k];
        let e = b - a;
        (e.re * (z - a).im - e.im * (z - a).re) >= -1e-14 * e.norm().max(1.0)
    });
    let area: f64 = (0..k).map(|i| v[i].re * v[(i + 1) % k].im - v[(i + 1) % k].re * v[i].im).sum();
    if inside && area.abs() > 0.0 {
        return 0.0;
    }
    (0..k).map(|i| crate::curve_topology::point_segment(z, v[i], v[(i + 1) % k]).0).fold(f64::MAX, f64::min)
}

fn hull_distance(support: &[(f64, f64)], vertices: &[C64], z: C64) -> f64 {
    let worst = support.iter().map(|&(t, s)| (z * C64::from_polar(1.0, -t)).re - s).fold(f64::MIN, f64::max);
    if worst <= 0.0 {
        0.0
    } else {
        polygon_distance(vertices, z).max(worst)
    }
}

fn hull_vertices(support: &[(f64, f64)]) -> Vec<C64> {
    let b = NumericalRangeBoundary {
        samples: support.iter().map(|&(angle, s)| SupportSample { angle, support: s, point: C64::new(0.0, 0.0) }).collect(),
    };
    b.outer_polygon()
}

impl Region {
    /// Distance from `z` to the closed region.
    pub fn distance(&self, z: C64) -> f64 {
        match self {
            Region::Sector { omega } => {
                let a = z.arg().abs();
                if z.norm() == 0.0 || a <= *omega {
                    0.0
                } else if a - omega >= PI / 2.0 {
                    z.norm()
                } else {
                    z.norm() * (a - omega).sin()
                }
            }
            Region::Disk { center, radius } => ((z - center).norm() - radius).max(0.0),
            Region::DiskExteriorComplementClip { center, radius, clip } => {
                let inner = (radius - (z - center).norm()).max(0.0);
                let outer = (z.norm() - clip).max(0.0);
                inner.max(outer)
            }
            Region::ConvexPolygon { vertices } => polygon_distance(vertices, z),
            Region::NumericalRangeHull { support } => hull_distance(support, &hull_vertices(support), z),
        }
    }

    /// `z` in the closed region (within `tol`).
    pub fn contains(&self, z: C64, tol: f64) -> bool {
        self.distance(z) <= tol
    }

    /// Characteristic size used to scale sample offsets.
    pub fn scale(&self) -> f64 {
        match self {
            Region::Sector { .. } => 1.0,
            Region::Disk { radius, .. } => radius.max(1e-12),
            Region::DiskExteriorComplementClip { radius, .. } => radius.max(1e-12),
            Region::ConvexPolygon { vertices } => diameter(vertices),
            Region::NumericalRangeHull { support } => diameter(&hull_vertices(support)),
        }
    }

    /// Points at distance `d` outside the region (approximately), `count`
    /// per boundary piece.
    pub fn offset_points(&self, d: f64, count: usize, span: f64) -> Vec<C64> {
        let mut out = Vec::new();
        match self {
            Region::Sector { omega } => {
                let omega = omega.clamp(0.0, PI);
                for k in 0..count {
                    let r = span * 1e-4 * (1e8f64).powf(k as f64 / (count.max(2) - 1) as f64);
                    for sgn in [1.0, -1.0] {
                        let edge = C64::from_polar(r, sgn * omega);
                        let normal = C64::from_polar(1.0, sgn * (omega + PI / 2.0));
                        out.push(edge + normal * d);
                    }
                }
                for k in 0..count {
                    let phi = omega + (PI - omega) * (k as f64 + 0.5) / count as f64;
                    for sgn in [1.0, -1.0] {
                        out.push(C64::from_polar(d, sgn * phi));
                    }
                }
            }
            Region::Disk { center, radius } => {
                for k in 0..count {
                    out.push(center + C64::from_polar(radius + d, 2.0 * PI * k as f64 / count as f64));
                }
            }
            Region::DiskExteriorComplementClip { center, radius, clip } => {
                for k in 0..count {
                    let a = 2.0 * PI * k as f64 / count as f64;
                    if d < *radius {
                        out.push(center + C64::from_polar(radius - d, a));
                    }
                    out.push(C64::from_polar(clip + d, a));
                }
            }
            Region::ConvexPolygon { vertices } => out.extend(polygon_offsets(vertices, d, count)),
            Region::NumericalRangeHull { support } => out.extend(polygon_offsets(&hull_vertices(support), d, count)),
        }
        out
    }
}

fn diameter(v: &[C64]) -> f64 {
    let mut d: f64 = 0.0;
    for a in v {
        for b in v {
            d = d.max((a - b).norm());
        }
    }
    d.max(1e-12)
}

fn polygon_offsets(v: &[C64], d: f64, count: usize) -> Vec<C64> {
    let k = v.len();
    let mut out = Vec::new();
    if k == 0 {
        return out;
    }
    let per = (count / k).max(2);
    for i in 0..k {
        let a = v[i];
        let b = v[(i + 1) % k];
        let e = b - a;
        if e.norm() > 0.0 {
            let n = C64::new(e.im, -e.re) / e.norm();
            for j in 0..per {
                out.push(a + e * ((j as f64 + 0.5) / per as f64) + n * d);
            }
        }
        // Round the corner at b.
        let c = v[(i + 2) % k];
        let n0 = if e.norm() > 0.0 { C64::new(e.im, -e.re) / e.norm() } else { C64::new(1.0, 0.0) };
        let f = c - b;
        let n1 = if f.norm() > 0.0 { C64::new(f.im, -f.re) / f.norm() } else { n0 };
        let (a0, mut a1) = (n0.arg(), n1.arg());
        while a1 < a0 {
            a1 += 2.0 * PI;
        }
        for j in 0..=2 {
            out.push(b + C64::from_polar(d, a0 + (a1 - a0) * j as f64 / 2.0));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Kreiss constants

/// Sampled lower bound for `sup_{z∉Ω̄} dist(z,Ω)·‖(z−T)^{-1}‖`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct KreissEstimate {
    pub region: Region,
    pub lower_bound: f64,
    /// Lower bound with doubled sampling budget.
    pub lower_bound_refined: f64,
    pub samples: Vec<(C64, f64)>,
    /// Bound valid on `|z| ≥ 2‖T‖`.
    pub far_field_bound: f64,
    /// Heuristic: the estimate grew by less than 5% when the budget doubled.
    pub finite: bool,
}

/// Largest ratio over the given sample points (those outside the region).
pub fn kreiss_on_samples(t: &CMat, region: &Region, points: &[C64]) -> f64 {
    kreiss_ratios(t, region, points).iter().map(|r| r.1).fold(0.0, f64::max)
}

fn kreiss_ratios(t: &CMat, region: &Region, points: &[C64]) -> Vec<(C64, f64)> {
    let (_, u) = linalg::schur(t);
    let n = u.nrows();
    // The hull polygon is built once rather than per point.
    let hull = match region {
        Region::NumericalRangeHull { support } => Some((support, hull_vertices(support))),
        _ => None,
    };
    points
        .par_iter()
        .filter_map(|&z| {
            let d = match &hull {
                Some((support, v)) => hull_distance(support, v, z),
                None => region.distance(z),
            };
            if d <= 0.0 {
                return None;
            }
            let m = CMat::identity(n, n) * z - &u;
            Some((z, d * linalg::inv_norm_upper(&m)))
        })
        .collect()
}

fn kreiss_points(region: &Region, scale: f64, norm: f64, budget: usize, min_exp: i32) -> Vec<C64> {
    let mut pts = Vec::new();
    for e in min_exp..=1 {
        for m in [1.0, 3.0] {
            let d = m * 10f64.powi(e) * scale;
            if d > 10.0 * scale {
                continue;
            }
            pts.extend(region.offset_points(d, budget, scale.max(norm)));
        }
    }
    let ring = 2.0 * norm.max(scale);
    for k in 0..budget {
        pts.push(C64::from_polar(ring, 2.0 * PI * k as f64 / budget as f64));
    }
    pts
}

/// Ratios above this are indistinguishable from a singular resolvent in
/// double precision and count as infinite.
pub const KREISS_CAP: f64 = 1e8;

/// Kreiss constant estimate of `T` with respect to `region`.
pub fn kreiss_constant(t: &CMat, region: &Region, budget: usize) -> Result<KreissEstimate, SpectralError> {
    check_square(t)?;
    let norm = linalg::norm2(t);
    let eig = linalg::eigenvalues(t);
    let scale = region.scale().max(1e-12);
    let etol = 1e-9 * norm.max(scale);
    if let Some(&w) = eig.iter().find(|&&l| region.distance(l) > etol) {
        return Err(SpectralError::SpectrumOutside { witness: w });
    }
    let budget = budget.max(16);
    let first = kreiss_ratios(t, region, &kreiss_points(region, scale, norm, budget, -3));
    let second = kreiss_ratios(t, region, &kreiss_points(region, scale, norm, 2 * budget, -4));
    let lb1 = first.iter().map(|r| r.1).fold(0.0, f64::max);
    let lb2 = second.iter().map(|r| r.1).fold(0.0, f64::max).max(lb1);
    let r0 = region.distance(C64::new(0.0, 0.0));
    let far = if norm > 0.0 { 1.0 + (r0 + norm) / norm } else { 1.0 };
    let mut samples = first;
    samples.extend(second);
    Ok(KreissEstimate {
        region: region.clone(),
        lower_bound: lb1,
        lower_bound_refined: lb2,
        samples,
        far_field_bound: far,
        finite: lb2 <= KREISS_CAP && lb2 <= 1.05 * lb1,
    })
}

// ---------------------------------------------------------------------------
// Sectorial operators

/// Result of [`sectorial_angle`].
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SectorialAngle {
    pub omega: f64,
    pub kreiss: f64,
    /// Whether the finiteness heuristic was met at `omega`.
    pub heuristic_finite: bool,
}

/// Smallest angle `ω < π` with a finite sectorial Kreiss estimate.
pub fn sectorial_angle(t: &CMat) -> Result<SectorialAngle, SpectralError> {
    check_square(t)?;
    let eig = linalg::eigenvalues(t);
    let norm = linalg::norm2(t);
    let mut omega0: f64 = 0.0;
    for l in &eig {
        if l.norm() <= 1e-14 * norm.max(1.0) {
            continue;
        }
        let a = l.arg().abs();
        if a >= PI - 1e-12 {
            return Err(SpectralError::NotSectorial { reason: format!("eigenvalue {l} on the negative axis") });
        }
        omega0 = omega0.max(a);
    }
    let try_at = |omega: f64, budget: usize| kreiss_constant(t, &Region::Sector { omega }, budget).ok();
    if let Some(k) = try_at(omega0, 48).filter(|k| k.finite) {
        return Ok(SectorialAngle { omega: omega0, kreiss: k.lower_bound_refined, heuristic_finite: true });
    }
    // W(T) inside S_ω gives ‖(z−T)^{-1}‖ ≤ 1/dist(z, W(T)), so its opening
    // angle bounds the search from above.
    let outer = numerical_range(t, 360).outer_polygon();
    let w_angle = outer.iter().map(|z| z.arg().abs()).fold(0.0, f64::max);
    let clear_of_zero = outer.iter().all(|z| z.re > 0.0);
    let mut best = None;
    let mut hi = PI;
    if clear_of_zero && w_angle < PI {
        hi = w_angle.max(omega0);
        if let Some(k) = try_at(hi, 16).filter(|k| k.finite) {
            best = Some((hi, k.lower_bound_refined));
        }
    }
    let mut lo = omega0;
    for _ in 0..6 {
        let mid = 0.5 * (lo + hi);
        match try_at(mid, 16).filter(|k| k.finite) {
            Some(k) => {
                best = Some((mid, k.lower_bound_refined));
                hi = mid;
            }
            None => lo = mid,
        }
    }
    match best {
        Some((omega, _)) => {
            let kreiss = try_at(omega, 48).map(|k| k.lower_bound_refined).unwrap_or(f64::INFINITY);
            Ok(SectorialAngle { omega, kreiss, heuristic_finite: true })
        }
        None => Err(SpectralError::NotSectorial { reason: "no sector angle below π gave a stable estimate".into() }),
    }
}

/// Contour data for [`sectorial_power`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct PowerContour {
    pub omega_prime: f64,
    pub radius: f64,
    pub nodes: usize,
}

/// Default contour: `ω′ = (ω + π)/2`, `R = 2‖T‖₂`, 200 nodes per piece.
pub fn default_contour(t: &CMat, omega: f64) -> PowerContour {
    PowerContour { omega_prime: 0.5 * (omega + PI), radius: 2.0 * linalg::norm2(t), nodes: 200 }
}

/// `z^t(T) = ∫_Γ z^t (z − T)^{-1} dz/2πi` over `Γ = ∂(S_{ω′} ∩ R𝔻)`.
pub fn sectorial_power(t: &CMat, power: f64, contour: PowerContour) -> Result<CMat, SpectralError> {
    check_square(t)?;
    let (q, u) = linalg::schur(t);
    let n = u.nrows();
    for i in 0..n {
        let l = u[(i, i)];
        if l.norm() == 0.0 {
            return Err(SpectralError::Singular);
        }
        if l.arg().abs() >= contour.omega_prime || l.norm() >= contour.radius {
            return Err(SpectralError::NotSectorial { reason: format!("eigenvalue {l} outside the contour") });
        }
    }
    let uinv = linalg::inv_upper(&u).ok_or(SpectralError::Singular)?;
    let mut nodes = contour.nodes.max(40);
    let mut prev = power_on_contour(&u, &uinv, power, contour, nodes);
    let mut change = f64::INFINITY;
    for _ in 0..6 {
        nodes *= 2;
        let next = power_on_contour(&u, &uinv, power, contour, nodes);
        let scale = linalg::norm2(&next).max(1.0);
        change = linalg::norm2(&(&next - &prev)) / scale;
        prev = next;
        if change <= 1e-8 {
            return Ok(&q * prev * q.adjoint());
        }
    }
    Err(SpectralError::QuadratureNotConverged { change })
}

fn power_on_contour(u: &CMat, uinv: &CMat, power: f64, c: PowerContour, nodes: usize) -> CMat {
    let n = u.nrows();
    let w = c.omega_prime;
    let big_r = c.radius;
    const PANELS: usize = 24;
    const RATIO: f64 = 4.0;
    let per_panel = (nodes / PANELS).max(8);
    let rho = big_r / RATIO.powi(PANELS as i32);

    // (z, weight · dz/dparam)
    let mut quad: Vec<(C64, C64)> = Vec::new();
    let up = C64::from_polar(1.0, w);
    let down = C64::from_polar(1.0, -w);
    for p in 0..PANELS {
        let b = big_r / RATIO.powi(p as i32);
        let a = b / RATIO;
        for (s, ws) in linalg::gauss_legendre_on(per_panel, a, b) {
            // Outgoing along arg = −ω′, incoming along arg = ω′.
            quad.push((down * s, down * ws));
            quad.push((up * s, -up * ws));
        }
    }
    let arc_panels = 8;
    let per_arc = (nodes / arc_panels).max(8);
    for p in 0..arc_panels {
        let a = -w + 2.0 * w * p as f64 / arc_panels as f64;
        let b = -w + 2.0 * w * (p + 1) as f64 / arc_panels as f64;
        for (phi, wp) in linalg::gauss_legendre_on(per_arc, a, b) {
            let z = C64::from_polar(big_r, phi);
            quad.push((z, z * C64::new(0.0, 1.0) * wp));
        }
    }
    let id = CMat::identity(n, n);
    let sum = quad
        .par_iter()
        .map(|&(z, dz)| {
            let res = (&id * z - u).solve_upper_triangular(&id).expect("z off the spectrum");
            res * (z.powf(power) * dz)
        })
        .reduce(|| CMat::zeros(n, n), |a, b| a + b);
    // Segment [0, ρ] of both rays with (z − U)^{-1} ≈ −U^{-1}.
    let tail = (C64::from_polar(1.0, -w * (power + 1.0)) - C64::from_polar(1.0, w * (power + 1.0)))
        * (rho.powf(power + 1.0) / (power + 1.0));
    let total = sum - uinv * tail;
    total / C64::new(0.0, 2.0 * PI)
}

/// `log_α(T) = log(e^{−i(α−π)}T) + i(α−π)`: logarithm with branch cut along
/// the ray `e^{iα}ℝ₊`.
pub fn matrix_log_off_ray(t: &CMat, alpha: f64) -> Result<CMat, SpectralError> {
    check_square(t)?;
    let (q, u) = linalg::schur(t);
    let n = u.nrows();
    let norm = linalg::norm2(t).max(f64::MIN_POSITIVE);
    let rot = C64::from_polar(1.0, -(alpha - PI));
    for i in 0..n {
        let l = u[(i, i)];
        if l.norm() <= 1e-14 * norm || ((l * rot).arg().abs() >= PI - 1e-10) {
            return Err(SpectralError::RayHitsSpectrum { witness: l });
        }
    }
    let ur = &u * rot;
    let l = linalg::log_upper(&ur).ok_or(SpectralError::RayHitsSpectrum { witness: C64::new(0.0, 0.0) })?;
    let l = l + CMat::identity(n, n) * C64::new(0.0, alpha - PI);
    Ok(&q * l * q.adjoint())
}
