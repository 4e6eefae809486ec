//! Planar topology of the curve `F(𝕋)`.
//!
//! Everything here works on the polyline of a [`CurveDiscretization`]:
//! winding numbers are exact for the polyline, self-intersections come from
//! segment-pair tests, and the decomposition of `ℂ∖F(𝕋)` is a grid flood fill
//! with a protective band around the curve. Point queries that fall inside the
//! band are resolved against the polyline directly.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::symbol::{CurveDiscretization, Symbol};
use crate::{C64, TAU};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error("point is within {distance:e} of the curve")]
    NearCurve { distance: f64 },
    #[error("arcs near parameters {theta_a} and {theta_b} overlap over positive length")]
    DegenerateOverlap { theta_a: f64, theta_b: f64 },
    #[error("grid {resolution} too coarse: component with {cells} cells")]
    ResolutionTooCoarse { resolution: usize, cells: usize },
    #[error("point lies on the boundary of the queried set")]
    OnBoundary,
    #[error("argument unwrapping failed near θ = {theta}")]
    UnwrapFailure { theta: f64 },
    #[error("curve is a single point")]
    DegenerateCurve,
}

/// Minimum cyclic index separation for a segment pair to count as a crossing.
pub const SEP_SEGMENTS: usize = 5;

/// Two arcs through a point are tangent when the sine of the angle between
/// their tangents is below this.
pub const TANGENCY_SIN: f64 = 0.05;

// ---------------------------------------------------------------------------
// Elementary geometry

#[inline]
fn cross(a: C64, b: C64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Distance from `p` to segment `[a, b]` and the segment parameter of the
/// closest point.
pub fn point_segment(p: C64, a: C64, b: C64) -> (f64, f64) {
    let d = b - a;
    let l2 = d.norm_sqr();
    if l2 == 0.0 {
        return ((p - a).norm(), 0.0);
    }
    let t = (((p - a) * d.conj()).re / l2).clamp(0.0, 1.0);
    ((a + d * t - p).norm(), t)
}

/// Distance between segments `[a0,a1]`, `[b0,b1]` with closest-point parameters.
pub fn segment_segment(a0: C64, a1: C64, b0: C64, b1: C64) -> (f64, f64, f64) {
    let da = a1 - a0;
    let db = b1 - b0;
    let den = cross(da, db);
    if den != 0.0 {
        let s = cross(b0 - a0, db) / den;
        let t = cross(b0 - a0, da) / den;
        if (0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&t) {
            return (0.0, s, t);
        }
    }
    let mut best = {
        let (d, t) = point_segment(a0, b0, b1);
        (d, 0.0, t)
    };
    let (d, t) = point_segment(a1, b0, b1);
    if d < best.0 {
        best = (d, 1.0, t);
    }
    let (d, s) = point_segment(b0, a0, a1);
    if d < best.0 {
        best = (d, s, 0.0);
    }
    let (d, s) = point_segment(b1, a0, a1);
    if d < best.0 {
        best = (d, s, 1.0);
    }
    best
}

fn segments_intersect(a0: C64, a1: C64, b0: C64, b1: C64) -> bool {
    segment_segment(a0, a1, b0, b1).0 == 0.0
}

#[inline]
fn cyclic_dist(i: usize, j: usize, n: usize) -> usize {
    let d = i.abs_diff(j);
    d.min(n - d)
}

/// Raw winding `(1/2π) Σ arg((p_{i+1}−λ)/(p_i−λ))` of a closed polyline.
pub fn raw_winding(points: &[C64], lambda: C64) -> f64 {
    let n = points.len();
    let mut s = 0.0;
    for i in 0..n {
        let a = points[i] - lambda;
        let b = points[(i + 1) % n] - lambda;
        s += (b / a).arg();
    }
    s / TAU
}

// ---------------------------------------------------------------------------
// Spatial index

/// Uniform bucket grid over the segments of a closed polyline, supporting
/// nearest-segment, crossing-parity winding and segment-crossing queries.
#[derive(Debug, Clone)]
pub struct SegmentIndex {
    points: Vec<C64>,
    x0: f64,
    y0: f64,
    size: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl SegmentIndex {
    pub fn new(points: &[C64]) -> Self {
        let n = points.len();
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in points {
            x0 = x0.min(p.re);
            x1 = x1.max(p.re);
            y0 = y0.min(p.im);
            y1 = y1.max(p.im);
        }
        let w = (x1 - x0).max(1e-300);
        let h = (y1 - y0).max(1e-300);
        let target = (n as f64).max(1.0);
        let mut size = (w * h / target).sqrt().max(w.max(h) / 1024.0);
        if !(size > 0.0) || !size.is_finite() {
            size = 1.0;
        }
        let nx = ((w / size).floor() as usize + 1).min(1024);
        let ny = ((h / size).floor() as usize + 1).min(1024);
        let size = (w / nx as f64).max(h / ny as f64) * (1.0 + 1e-9);
        let mut idx = SegmentIndex { points: points.to_vec(), x0, y0, size, nx, ny, buckets: vec![Vec::new(); nx * ny] };
        for i in 0..n {
            let (a, b) = idx.seg(i);
            let (cx0, cy0) = idx.cell_of(C64::new(a.re.min(b.re), a.im.min(b.im)));
            let (cx1, cy1) = idx.cell_of(C64::new(a.re.max(b.re), a.im.max(b.im)));
            for cy in cy0..=cy1 {
                for cx in cx0..=cx1 {
                    idx.buckets[cy * nx + cx].push(i as u32);
                }
            }
        }
        idx
    }

    #[inline]
    pub fn seg(&self, i: usize) -> (C64, C64) {
        (self.points[i], self.points[(i + 1) % self.points.len()])
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[inline]
    fn cell_of(&self, p: C64) -> (usize, usize) {
        let cx = ((p.re - self.x0) / self.size).floor().clamp(0.0, (self.nx - 1) as f64) as usize;
        let cy = ((p.im - self.y0) / self.size).floor().clamp(0.0, (self.ny - 1) as f64) as usize;
        (cx, cy)
    }

    /// Segments whose bucket range meets the box `[lo, hi]` (may repeat).
    fn for_box(&self, lo: C64, hi: C64, mut f: impl FnMut(usize)) {
        let (cx0, cy0) = self.cell_of(lo);
        let (cx1, cy1) = self.cell_of(hi);
        for cy in cy0..=cy1 {
            for cx in cx0..=cx1 {
                for &s in &self.buckets[cy * self.nx + cx] {
                    f(s as usize);
                }
            }
        }
    }

    /// Nearest segment within `radius`, as `(distance, segment)`.
    pub fn nearest_within(&self, p: C64, radius: f64) -> Option<(f64, usize)> {
        let r = C64::new(radius, radius);
        let mut best: Option<(f64, usize)> = None;
        self.for_box(p - r, p + r, |s| {
            let (a, b) = self.seg(s);
            let (d, _) = point_segment(p, a, b);
            if d <= radius && best.is_none_or(|(bd, bs)| d < bd || (d == bd && s < bs)) {
                best = Some((d, s));
            }
        });
        best
    }

    /// Nearest segment to `p`.
    pub fn nearest(&self, p: C64) -> (f64, usize) {
        let mut r = self.size;
        loop {
            if let Some(hit) = self.nearest_within(p, r) {
                return hit;
            }
            r *= 2.0;
            if r > 1e300 {
                let mut best = (f64::MAX, 0);
                for s in 0..self.len() {
                    let (a, b) = self.seg(s);
                    let d = point_segment(p, a, b).0;
                    if d < best.0 {
                        best = (d, s);
                    }
                }
                return best;
            }
        }
    }

    /// Winding number of the polyline around `p` by signed crossings of the
    /// horizontal ray towards `+∞`. Exact for points off the polyline.
    pub fn winding(&self, p: C64) -> i64 {
        let y = p.im;
        if y < self.y0 || y > self.y0 + self.size * self.ny as f64 {
            return 0;
        }
        let cy = ((y - self.y0) / self.size).floor().clamp(0.0, (self.ny - 1) as f64) as usize;
        let (cx0, _) = self.cell_of(p);
        let mut w = 0;
        for cx in cx0..self.nx {
            for &s in &self.buckets[cy * self.nx + cx] {
                let (a, b) = self.seg(s as usize);
                let up = a.im <= y && b.im > y;
                let down = b.im <= y && a.im > y;
                if !(up || down) {
                    continue;
                }
                let xc = a.re + (y - a.im) * (b.re - a.re) / (b.im - a.im);
                if xc <= p.re {
                    continue;
                }
                // Count each crossing once: in the bucket that contains it.
                let owner = ((xc - self.x0) / self.size).floor().clamp(0.0, (self.nx - 1) as f64) as usize;
                if owner != cx {
                    continue;
                }
                w += if up { 1 } else { -1 };
            }
        }
        w
    }

    /// Whether the open segment `[a, b]` meets the polyline.
    pub fn crosses(&self, a: C64, b: C64) -> bool {
        let lo = C64::new(a.re.min(b.re), a.im.min(b.im));
        let hi = C64::new(a.re.max(b.re), a.im.max(b.im));
        let mut hit = false;
        self.for_box(lo, hi, |s| {
            if !hit {
                let (p, q) = self.seg(s);
                hit = segments_intersect(a, b, p, q);
            }
        });
        hit
    }
}

// ---------------------------------------------------------------------------
// Winding numbers

/// Winding number of the curve around `λ`, with a per-segment proximity
/// tolerance equal to the chord sagitta bound.
pub fn winding_number(disc: &CurveDiscretization, lambda: C64) -> Result<i64, TopologyError> {
    let n = disc.len();
    let floor = 1e-12 * disc.scale();
    let mut dmin = f64::MAX;
    for i in 0..n {
        let (a, b) = disc.segment(i);
        let d = point_segment(lambda, a, b).0;
        dmin = dmin.min(d);
        if d <= disc.sag(i) + floor {
            return Err(TopologyError::NearCurve { distance: d });
        }
    }
    finish_winding(disc, lambda, dmin)
}

/// Winding number with an explicit proximity tolerance.
pub fn winding_number_tol(disc: &CurveDiscretization, lambda: C64, prox_tol: f64) -> Result<i64, TopologyError> {
    let d = (0..disc.len())
        .map(|i| {
            let (a, b) = disc.segment(i);
            point_segment(lambda, a, b).0
        })
        .fold(f64::MAX, f64::min);
    if d < prox_tol {
        return Err(TopologyError::NearCurve { distance: d });
    }
    finish_winding(disc, lambda, d)
}

fn finish_winding(disc: &CurveDiscretization, lambda: C64, dmin: f64) -> Result<i64, TopologyError> {
    if disc.degenerate {
        return Ok(0);
    }
    let raw = raw_winding(&disc.points, lambda);
    let r = raw.round();
    if (raw - r).abs() > 0.25 {
        return Err(TopologyError::NearCurve { distance: dmin });
    }
    Ok(r as i64)
}

// ---------------------------------------------------------------------------
// Self-intersections

/// Local classification of a simple intersection point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntersectionType {
    TypeI,
    TypeII,
    TypeIII,
    TypeIV,
    Unclassified,
}

/// One point of `𝒪`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct IntersectionPoint {
    pub location: C64,
    /// Parameters `θ` of the arcs through the point.
    pub params: Vec<f64>,
    /// Segment index of each incident arc at closest approach.
    pub segments: Vec<usize>,
    /// Winding numbers of the sectors in counterclockwise order.
    pub sector_windings: Vec<i64>,
    /// Probe point used for each sector.
    pub sector_probes: Vec<C64>,
    /// Indices (into `sector_windings`) of the narrow sectors between tangent arcs.
    pub cusp_sectors: Vec<usize>,
    pub probe_radius: f64,
    pub tangential: bool,
    pub classification: IntersectionType,
}

impl IntersectionPoint {
    pub fn is_simple(&self) -> bool {
        self.params.len() == 2
    }

    /// Largest sector winding.
    pub fn max_winding(&self) -> Option<i64> {
        self.sector_windings.iter().copied().max()
    }
}

/// The set `𝒪` of self-intersection points.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct IntersectionSet {
    pub points: Vec<IntersectionPoint>,
    pub overlap: bool,
    pub cluster_radius: f64,
}

impl IntersectionSet {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    i: usize,
    j: usize,
    dist: f64,
    loc: C64,
}

/// All crossings and near-touches between non-neighbouring segments, clustered
/// into intersection points with sector windings and a tangency flag.
pub fn self_intersections(disc: &CurveDiscretization) -> Result<IntersectionSet, TopologyError> {
    let index = SegmentIndex::new(&disc.points);
    self_intersections_with(disc, &index)
}

fn self_intersections_with(disc: &CurveDiscretization, index: &SegmentIndex) -> Result<IntersectionSet, TopologyError> {
    let n = disc.len();
    let cluster_radius = 3.0 * disc.step;
    if disc.degenerate || n <= 2 * SEP_SEGMENTS + 2 {
        return Ok(IntersectionSet { points: vec![], overlap: false, cluster_radius });
    }
    let scale = disc.scale();
    let sags: Vec<f64> = (0..n).map(|i| disc.sag(i)).collect();
    let max_sag = sags.iter().cloned().fold(0.0, f64::max);

    let per_seg: Vec<Vec<Candidate>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let (a0, a1) = disc.segment(i);
            let reach = 2.0 * (sags[i] + max_sag) + 1e-12 * scale;
            let r = C64::new(reach, reach);
            let lo = C64::new(a0.re.min(a1.re), a0.im.min(a1.im)) - r;
            let hi = C64::new(a0.re.max(a1.re), a0.im.max(a1.im)) + r;
            let mut seen = BTreeSet::new();
            let mut out = Vec::new();
            index.for_box(lo, hi, |j| {
                if j <= i || cyclic_dist(i, j, n) <= SEP_SEGMENTS || !seen.insert(j) {
                    return;
                }
                let (b0, b1) = disc.segment(j);
                let (d, s, t) = segment_segment(a0, a1, b0, b1);
                let tol = 2.0 * (sags[i] + sags[j]) + 1e-12 * scale;
                if d <= tol {
                    let pa = a0 + (a1 - a0) * s;
                    let pb = b0 + (b1 - b0) * t;
                    out.push(Candidate { i, j, dist: d, loc: (pa + pb) * 0.5 });
                }
            });
            out
        })
        .collect();
    let cands: Vec<Candidate> = per_seg.into_iter().flatten().collect();

    // Collinear overlap of positive length violates finiteness of 𝒪.
    for c in &cands {
        if c.dist > 1e-12 * scale {
            continue;
        }
        let (a0, a1) = disc.segment(c.i);
        let (b0, b1) = disc.segment(c.j);
        let da = a1 - a0;
        let db = b1 - b0;
        if cross(da, db).abs() <= 1e-9 * da.norm() * db.norm() && point_segment(b0, a0, a1).0 <= 1e-12 * scale {
            let u = da / da.norm();
            let proj = |p: C64| ((p - a0) * u.conj()).re;
            let (lo, hi) = (proj(b0).min(proj(b1)), proj(b0).max(proj(b1)));
            let overlap = hi.min(da.norm()) - lo.max(0.0);
            if overlap > 1e-9 * scale {
                return Err(TopologyError::DegenerateOverlap { theta_a: disc.theta[c.i], theta_b: disc.theta[c.j] });
            }
        }
    }

    // Cluster candidate locations.
    let m = cands.len();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let nx = p[y];
            p[y] = r;
            y = nx;
        }
        r
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| cands[a].loc.re.total_cmp(&cands[b].loc.re));
    for (k, &a) in order.iter().enumerate() {
        for &b in &order[k + 1..] {
            if cands[b].loc.re - cands[a].loc.re > cluster_radius {
                break;
            }
            if (cands[a].loc - cands[b].loc).norm() <= cluster_radius {
                let ra = find(&mut parent, a);
                let rb = find(&mut parent, b);
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let mut clusters: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for k in 0..m {
        let r = find(&mut parent, k);
        clusters.entry(r).or_default().push(k);
    }

    let mut points = Vec::new();
    for members in clusters.values() {
        if let Some(p) = build_point(disc, index, &cands, members) {
            points.push(p);
        }
    }
    points.sort_by(|a, b| a.params[0].total_cmp(&b.params[0]));
    Ok(IntersectionSet { points, overlap: false, cluster_radius })
}

fn build_point(
    disc: &CurveDiscretization,
    index: &SegmentIndex,
    cands: &[Candidate],
    members: &[usize],
) -> Option<IntersectionPoint> {
    let n = disc.len();
    let best = *members.iter().min_by(|&&a, &&b| cands[a].dist.total_cmp(&cands[b].dist).then(a.cmp(&b)))?;
    let x = cands[best].loc;

    // Group segment indices into arcs (runs with small cyclic gaps).
    let mut segs: Vec<usize> = members.iter().flat_map(|&k| [cands[k].i, cands[k].j]).collect();
    segs.sort_unstable();
    segs.dedup();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &s in &segs {
        match groups.last_mut() {
            Some(g) if s - *g.last().unwrap() <= SEP_SEGMENTS => g.push(s),
            _ => groups.push(vec![s]),
        }
    }
    if groups.len() > 1 {
        let first = groups[0][0];
        let last = *groups.last().unwrap().last().unwrap();
        if first + n - last <= SEP_SEGMENTS {
            let tail = groups.pop().unwrap();
            groups[0].splice(0..0, tail);
        }
    }
    if groups.len() < 2 {
        return None;
    }

    // For each arc, the closest approach to x.
    let mut arcs: Vec<(usize, f64)> = groups
        .iter()
        .map(|g| {
            let mut bestp = (f64::MAX, g[0], 0.0);
            for &s in g {
                let (a, b) = disc.segment(s);
                let (d, t) = point_segment(x, a, b);
                if d < bestp.0 {
                    bestp = (d, s, t);
                }
            }
            (bestp.1, bestp.2)
        })
        .collect();
    arcs.sort_by(|a, b| (disc.theta[a.0], a.1).partial_cmp(&(disc.theta[b.0], b.1)).unwrap());
    let params: Vec<f64> = arcs
        .iter()
        .map(|&(s, t)| {
            let (a, b) = disc.segment_params(s);
            crate::symbol::reduce_angle(a + (b - a) * t)
        })
        .collect();
    let segments: Vec<usize> = arcs.iter().map(|a| a.0).collect();

    let chord = segments
        .iter()
        .map(|&s| {
            let (a, b) = disc.segment(s);
            (b - a).norm()
        })
        .fold(0.0, f64::max);
    let r0 = (2.0 * chord).max(20.0 * cands[best].dist).min(3.0 * disc.step).max(1e-9 * disc.scale());

    // Tangency from the interpolated tangent directions of the first two arcs.
    let tangent_at = |&(s, t): &(usize, f64)| disc.tangents[s] * (1.0 - t) + disc.tangents[(s + 1) % n] * t;
    let tangential = arcs.len() == 2 && {
        let (ta, tb) = (tangent_at(&arcs[0]), tangent_at(&arcs[1]));
        ta.norm() > 0.0 && tb.norm() > 0.0 && cross(ta, tb).abs() / (ta.norm() * tb.norm()) < TANGENCY_SIN
    };

    // Transversal crossings read windings close in, where neighbouring arcs
    // cannot interfere; tangencies need the wider cusps at the full radius.
    let floor = (20.0 * cands[best].dist).max(1e-9 * disc.scale());
    let mut r = r0;
    let mut data = sectors_at(disc, index, &arcs, x, r)?;
    if !tangential {
        for _ in 0..3 {
            if r / 2.0 < floor {
                break;
            }
            match sectors_at(disc, index, &arcs, x, r / 2.0) {
                Some(d) => {
                    r /= 2.0;
                    data = d;
                }
                None => break,
            }
        }
    }
    let (gaps, probes, sector_windings) = data;
    let k = gaps.len();
    let cusp_sectors = if tangential && k == 4 {
        if gaps[0] + gaps[2] <= gaps[1] + gaps[3] {
            vec![0, 2]
        } else {
            vec![1, 3]
        }
    } else {
        vec![]
    };
    let mut p = IntersectionPoint {
        location: x,
        params,
        segments,
        sector_windings,
        sector_probes: probes,
        cusp_sectors,
        probe_radius: r,
        tangential,
        classification: IntersectionType::Unclassified,
    };
    p.classification = classify_point(&p);
    Some(p)
}

/// Sector gaps, probes and windings around `x` at probe radius `r`.
#[allow(clippy::type_complexity)]
fn sectors_at(
    disc: &CurveDiscretization,
    index: &SegmentIndex,
    arcs: &[(usize, f64)],
    x: C64,
    r: f64,
) -> Option<(Vec<f64>, Vec<C64>, Vec<i64>)> {
    let mut departures: Vec<C64> = Vec::new();
    for &(s, t) in arcs {
        let (a, b) = disc.segment(s);
        let q = a + (b - a) * t;
        departures.push(walk(disc, s, q, x, r, true)?);
        departures.push(walk(disc, s, q, x, r, false)?);
    }
    let mut ang: Vec<(f64, C64)> = departures.iter().map(|&d| ((d - x).arg(), d)).collect();
    ang.sort_by(|a, b| a.0.total_cmp(&b.0));
    let k = ang.len();
    let gaps: Vec<f64> = (0..k)
        .map(|i| {
            let g = ang[(i + 1) % k].0 - ang[i].0;
            if i + 1 == k {
                g + TAU
            } else {
                g
            }
        })
        .collect();
    let mut probes = Vec::with_capacity(k);
    let mut windings = Vec::with_capacity(k);
    for i in 0..k {
        let (a0, d0) = ang[i];
        let d1 = ang[(i + 1) % k].1;
        let probe = if gaps[i] < 0.5 { (d0 + d1) * 0.5 } else { x + C64::from_polar(r, a0 + gaps[i] / 2.0) };
        probes.push(probe);
        windings.push(index.winding(probe));
    }
    Some((gaps, probes, windings))
}

/// Walk along the polyline from `q` on segment `s` until distance `r` from `x`.
fn walk(disc: &CurveDiscretization, s: usize, q: C64, x: C64, r: f64, forward: bool) -> Option<C64> {
    let n = disc.len();
    let mut cur = q;
    let mut seg = s;
    for _ in 0..n / 2 {
        let (a, b) = disc.segment(seg);
        let end = if forward { b } else { a };
        if (end - x).norm() >= r {
            // Solve |cur + u(end−cur) − x| = r for the crossing u ∈ (0, 1].
            let d = end - cur;
            let f = cur - x;
            let aa = d.norm_sqr();
            let bb = 2.0 * (f * d.conj()).re;
            let cc = f.norm_sqr() - r * r;
            let disc2 = (bb * bb - 4.0 * aa * cc).max(0.0);
            let u = ((-bb + disc2.sqrt()) / (2.0 * aa)).clamp(0.0, 1.0);
            return Some(cur + d * u);
        }
        cur = end;
        seg = if forward { (seg + 1) % n } else { (seg + n - 1) % n };
    }
    None
}

/// Classify one intersection point from its sector windings.
///
/// Windings are normalized to the nonpositive side first (a positively wound
/// configuration is mirrored), and `L` is the largest sector winding.
pub fn classify_point(p: &IntersectionPoint) -> IntersectionType {
    classify_sectors(&p.sector_windings, p.tangential, &p.cusp_sectors)
}

/// Classification rule on a cyclic list of four sector windings.
pub fn classify_sectors(windings: &[i64], tangential: bool, cusp: &[usize]) -> IntersectionType {
    if windings.len() != 4 {
        return IntersectionType::Unclassified;
    }
    let flip = windings.iter().all(|&w| w >= 0) && windings.iter().any(|&w| w > 0);
    let w: Vec<i64> = windings.iter().map(|&v| if flip { -v } else { v }).collect();
    let l = *w.iter().max().unwrap();
    let mut sorted = w.clone();
    sorted.sort_unstable();
    let pattern_mixed = sorted == vec![l - 2, l - 1, l - 1, l];
    let pattern_pairs = sorted == vec![l - 1, l - 1, l, l];
    if !tangential {
        return if pattern_mixed { IntersectionType::TypeIII } else { IntersectionType::Unclassified };
    }
    if pattern_mixed {
        return IntersectionType::TypeIV;
    }
    if pattern_pairs && cusp.len() == 2 {
        let (a, b) = (w[cusp[0]], w[cusp[1]]);
        if a == l - 1 && b == l - 1 {
            return IntersectionType::TypeII;
        }
        if a == l && b == l {
            return IntersectionType::TypeI;
        }
    }
    IntersectionType::Unclassified
}

/// Fill in (or recompute) classifications and check sector windings against
/// the decomposition's components.
pub fn classify_intersections(decomposition: &RegionDecomposition, intersections: &IntersectionSet) -> IntersectionSet {
    let mut out = intersections.clone();
    for p in &mut out.points {
        p.classification = if !p.is_simple() { IntersectionType::Unclassified } else { classify_point(p) };
        let consistent = p
            .sector_windings
            .iter()
            .all(|w| decomposition.components.iter().any(|c| c.winding == *w));
        if !consistent {
            p.classification = IntersectionType::Unclassified;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Region decomposition

/// Settings for [`region_decomposition`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopologyOptions {
    pub resolution: usize,
    pub max_resolution: usize,
    /// Band half-width in units of the grid cell diagonal.
    pub prox_factor: f64,
    /// Points that must lie inside the grid box (the origin by default).
    pub include: Vec<C64>,
}

impl Default for TopologyOptions {
    fn default() -> Self {
        TopologyOptions { resolution: 512, max_resolution: 4096, prox_factor: 1.5, include: vec![C64::new(0.0, 0.0)] }
    }
}

/// Which complement a point-location query refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComplementMode {
    ComplementOfCurve,
    ComplementOfSpectrum,
    ComplementOfInteriorSpectrum,
}

/// A piece of curve separating two components.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BoundaryArc {
    pub theta_start: f64,
    pub theta_end: f64,
    pub neighbor: usize,
}

/// One connected component of `ℂ∖F(𝕋)`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Component {
    pub id: usize,
    pub winding: i64,
    pub unbounded: bool,
    pub cells: usize,
    pub area: f64,
    pub representative: C64,
    pub adjacency: Vec<usize>,
    pub boundary_arcs: Vec<BoundaryArc>,
}

/// Where a query point sits relative to the curve and the components.
#[derive(Debug, Clone, PartialEq)]
pub enum PointLocation {
    Component(usize),
    /// On an arc; windings on the left and right of the oriented curve.
    Curve { segment: usize, left: i64, right: i64 },
    /// At (or within tolerance of) the intersection point with this index.
    Intersection(usize),
    /// Off the polyline but not connected to any grid component.
    Unresolved { winding: i64 },
}

/// Grid decomposition of `ℂ∖F(𝕋)` with point-location queries.
#[derive(Debug, Clone)]
pub struct RegionDecomposition {
    pub bbox: [f64; 4],
    pub resolution: usize,
    pub cell: f64,
    pub prox_tol: f64,
    pub components: Vec<Component>,
    pub intersections: IntersectionSet,
    pub warnings: Vec<String>,
    /// Per-cell component id, `-1` in the band around the curve.
    labels: Vec<i32>,
    /// Per-cell winding (for band cells: winding of the cell centre).
    windings: Vec<i32>,
    /// Per-cell membership of `int σ(T_F)`.
    interior: Vec<bool>,
    /// Per segment: windings on the left and right side.
    seg_sides: Vec<(i64, i64)>,
    /// Union-find representative for zero-winding components touching at `𝒪`.
    zero_group: Vec<usize>,
    disc: CurveDiscretization,
    index: SegmentIndex,
}

/// Region decomposition with automatic refinement.
pub fn region_decomposition(
    disc: &CurveDiscretization,
    options: &TopologyOptions,
) -> Result<RegionDecomposition, TopologyError> {
    if disc.degenerate {
        return Err(TopologyError::DegenerateCurve);
    }
    let index = SegmentIndex::new(&disc.points);
    let (intersections, mut warnings) = match self_intersections_with(disc, &index) {
        Ok(s) => (s, vec![]),
        Err(e) => (IntersectionSet::default(), vec![format!("self-intersections unavailable: {e}")]),
    };
    let mut res = options.resolution.max(16);
    loop {
        match build_decomposition(disc, &index, options, res, intersections.clone()) {
            Ok(mut d) => {
                d.warnings.splice(0..0, warnings.drain(..));
                return Ok(d);
            }
            Err(TopologyError::ResolutionTooCoarse { .. }) if res * 2 <= options.max_resolution => res *= 2,
            Err(e) => return Err(e),
        }
    }
}

fn build_decomposition(
    disc: &CurveDiscretization,
    index: &SegmentIndex,
    options: &TopologyOptions,
    g: usize,
    intersections: IntersectionSet,
) -> Result<RegionDecomposition, TopologyError> {
    let n = disc.len();
    let (mut x0, mut x1, mut y0, mut y1) = disc.bbox();
    for p in &options.include {
        x0 = x0.min(p.re);
        x1 = x1.max(p.re);
        y0 = y0.min(p.im);
        y1 = y1.max(p.im);
    }
    let cx = 0.5 * (x0 + x1);
    let cy = 0.5 * (y0 + y1);
    let half = 0.5 * (x1 - x0).max(y1 - y0).max(1e-12) * 1.2;
    let (x0, y0) = (cx - half, cy - half);
    let cell = 2.0 * half / g as f64;
    let diag = cell * std::f64::consts::SQRT_2;
    let prox = options.prox_factor * diag;
    let center = |i: usize, j: usize| C64::new(x0 + (i as f64 + 0.5) * cell, y0 + (j as f64 + 0.5) * cell);

    // Rows crossed by each segment.
    let mut rows: Vec<Vec<u32>> = vec![Vec::new(); g];
    for s in 0..n {
        let (a, b) = disc.segment(s);
        let lo = a.im.min(b.im);
        let hi = a.im.max(b.im);
        let j0 = (((lo - y0) / cell) - 0.5).ceil().max(0.0) as usize;
        let j1 = (((hi - y0) / cell) - 0.5).floor().min(g as f64 - 1.0);
        if j1 < 0.0 {
            continue;
        }
        for row in rows.iter_mut().take(j1 as usize + 1).skip(j0) {
            row.push(s as u32);
        }
    }
    let windings: Vec<i32> = rows
        .par_iter()
        .enumerate()
        .flat_map_iter(|(j, segs)| {
            let y = y0 + (j as f64 + 0.5) * cell;
            let mut xs: Vec<(f64, i32)> = Vec::new();
            for &s in segs {
                let (a, b) = disc.segment(s as usize);
                let up = a.im <= y && b.im > y;
                let down = b.im <= y && a.im > y;
                if up || down {
                    let xc = a.re + (y - a.im) * (b.re - a.re) / (b.im - a.im);
                    xs.push((xc, if up { 1 } else { -1 }));
                }
            }
            xs.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut out = vec![0i32; g];
            let mut acc = 0;
            let mut k = xs.len();
            for i in (0..g).rev() {
                let x = x0 + (i as f64 + 0.5) * cell;
                while k > 0 && xs[k - 1].0 > x {
                    acc += xs[k - 1].1;
                    k -= 1;
                }
                out[i] = acc;
            }
            out
        })
        .collect();

    // Band around the curve.
    let mut band = vec![false; g * g];
    for s in 0..n {
        let (a, b) = disc.segment(s);
        let i0 = (((a.re.min(b.re) - prox - x0) / cell) - 0.5).floor().max(0.0) as usize;
        let i1 = ((((a.re.max(b.re) + prox - x0) / cell) - 0.5).ceil().max(0.0) as usize).min(g - 1);
        let j0 = (((a.im.min(b.im) - prox - y0) / cell) - 0.5).floor().max(0.0) as usize;
        let j1 = ((((a.im.max(b.im) + prox - y0) / cell) - 0.5).ceil().max(0.0) as usize).min(g - 1);
        for j in j0..=j1 {
            for i in i0..=i1 {
                if !band[j * g + i] && point_segment(center(i, j), a, b).0 <= prox {
                    band[j * g + i] = true;
                }
            }
        }
    }

    // Flood fill.
    let mut labels = vec![-1i32; g * g];
    let mut comp_cells: Vec<Vec<usize>> = Vec::new();
    let mut comp_w: Vec<i64> = Vec::new();
    let mut stack = Vec::new();
    for start in 0..g * g {
        if band[start] || labels[start] >= 0 {
            continue;
        }
        let id = comp_cells.len() as i32;
        let w = windings[start];
        let mut cells = Vec::new();
        labels[start] = id;
        stack.push(start);
        while let Some(c) = stack.pop() {
            cells.push(c);
            let (i, j) = (c % g, c / g);
            let mut push = |nb: usize| {
                if !band[nb] && labels[nb] < 0 && windings[nb] == w {
                    labels[nb] = id;
                    stack.push(nb);
                }
            };
            if i > 0 {
                push(c - 1);
            }
            if i + 1 < g {
                push(c + 1);
            }
            if j > 0 {
                push(c - g);
            }
            if j + 1 < g {
                push(c + g);
            }
        }
        comp_cells.push(cells);
        comp_w.push(w as i64);
    }

    // Absorb specks next to a larger component of the same winding.
    let reach = (prox / cell).ceil() as i64 * 2 + 2;
    let mut alias: Vec<usize> = (0..comp_cells.len()).collect();
    let mut warnings = Vec::new();
    for id in 0..comp_cells.len() {
        if comp_cells[id].len() >= 4 {
            continue;
        }
        let mut partner = None;
        'search: for &c in &comp_cells[id] {
            let (i, j) = ((c % g) as i64, (c / g) as i64);
            for dj in -reach..=reach {
                for di in -reach..=reach {
                    let (ii, jj) = (i + di, j + dj);
                    if ii < 0 || jj < 0 || ii >= g as i64 || jj >= g as i64 {
                        continue;
                    }
                    let l = labels[(jj as usize) * g + ii as usize];
                    if l >= 0 && l as usize != id && comp_w[l as usize] == comp_w[id] && comp_cells[l as usize].len() >= 4 {
                        partner = Some(l as usize);
                        break 'search;
                    }
                }
            }
        }
        match partner {
            Some(p) => alias[id] = p,
            None => return Err(TopologyError::ResolutionTooCoarse { resolution: g, cells: comp_cells[id].len() }),
        }
    }
    if alias.iter().enumerate().any(|(i, &a)| a != i) {
        warnings.push(format!(
            "{} small grid pieces merged into neighbouring components",
            alias.iter().enumerate().filter(|(i, a)| *i != **a).count()
        ));
    }
    // Renumber.
    let mut new_id = vec![usize::MAX; comp_cells.len()];
    let mut next = 0;
    for id in 0..comp_cells.len() {
        if alias[id] == id {
            new_id[id] = next;
            next += 1;
        }
    }
    for id in 0..comp_cells.len() {
        if alias[id] != id {
            new_id[id] = new_id[alias[id]];
        }
    }
    for l in labels.iter_mut() {
        if *l >= 0 {
            *l = new_id[*l as usize] as i32;
        }
    }
    let ncomp = next;
    let mut cells_of: Vec<Vec<usize>> = vec![Vec::new(); ncomp];
    let mut winding_of = vec![0i64; ncomp];
    for (id, cells) in comp_cells.into_iter().enumerate() {
        winding_of[new_id[id]] = comp_w[id];
        cells_of[new_id[id]].extend(cells);
    }

    // Chamfer distance to the band for representative points.
    let big = u32::MAX / 4;
    let mut dist: Vec<u32> = band.iter().map(|&b| if b { 0 } else { big }).collect();
    for j in 0..g {
        for i in 0..g {
            let c = j * g + i;
            if i > 0 {
                dist[c] = dist[c].min(dist[c - 1] + 1);
            }
            if j > 0 {
                dist[c] = dist[c].min(dist[c - g] + 1);
            }
        }
    }
    for j in (0..g).rev() {
        for i in (0..g).rev() {
            let c = j * g + i;
            if i + 1 < g {
                dist[c] = dist[c].min(dist[c + 1] + 1);
            }
            if j + 1 < g {
                dist[c] = dist[c].min(dist[c + g] + 1);
            }
        }
    }

    // Band cells count towards the area of the component they reach without
    // a change of centre winding; their area is split by 4×4 sub-samples so
    // that areas are accurate below the cell size.
    let mut owner = labels.clone();
    {
        let mut queue: std::collections::VecDeque<usize> = (0..g * g).filter(|&c| owner[c] >= 0).collect();
        while let Some(c) = queue.pop_front() {
            let o = owner[c];
            let (i, j) = (c % g, c / g);
            let nbs = [(i > 0).then(|| c - 1), (i + 1 < g).then(|| c + 1), (j > 0).then(|| c - g), (j + 1 < g).then(|| c + g)];
            for nb in nbs.into_iter().flatten() {
                if owner[nb] < 0 && windings[nb] as i64 == winding_of[o as usize] {
                    owner[nb] = o;
                    queue.push_back(nb);
                }
            }
        }
    }
    const SUB: usize = 4;
    let band_cells: Vec<usize> = (0..g * g).filter(|&c| band[c]).collect();
    let shares: Vec<Vec<(usize, u32)>> = band_cells
        .par_iter()
        .map(|&c| {
            let (i, j) = (c % g, c / g);
            let mut out: Vec<(usize, u32)> = Vec::new();
            for sj in 0..SUB {
                for si in 0..SUB {
                    let p = C64::new(
                        x0 + (i as f64 + (si as f64 + 0.5) / SUB as f64) * cell,
                        y0 + (j as f64 + (sj as f64 + 0.5) / SUB as f64) * cell,
                    );
                    let w = index.winding(p);
                    let mut pick = (owner[c] >= 0 && winding_of[owner[c] as usize] == w).then(|| owner[c] as usize);
                    'ring: for r in 1..=2i64 {
                        if pick.is_some() {
                            break;
                        }
                        for dj in -r..=r {
                            for di in -r..=r {
                                let (ii, jj) = (i as i64 + di, j as i64 + dj);
                                if ii < 0 || jj < 0 || ii >= g as i64 || jj >= g as i64 {
                                    continue;
                                }
                                let o = owner[jj as usize * g + ii as usize];
                                if o >= 0 && winding_of[o as usize] == w {
                                    pick = Some(o as usize);
                                    break 'ring;
                                }
                            }
                        }
                    }
                    if let Some(o) = pick {
                        match out.iter_mut().find(|e| e.0 == o) {
                            Some(e) => e.1 += 1,
                            None => out.push((o, 1)),
                        }
                    }
                }
            }
            out
        })
        .collect();
    let mut area_units = vec![0u64; ncomp];
    for c in 0..g * g {
        if !band[c] && labels[c] >= 0 {
            area_units[labels[c] as usize] += (SUB * SUB) as u64;
        }
    }
    for sh in &shares {
        for &(o, k) in sh {
            area_units[o] += k as u64;
        }
    }
    let unit_area = cell * cell / (SUB * SUB) as f64;

    let mut components: Vec<Component> = (0..ncomp)
        .map(|id| {
            let cells = &cells_of[id];
            let unbounded = cells.iter().any(|&c| {
                let (i, j) = (c % g, c / g);
                i == 0 || j == 0 || i == g - 1 || j == g - 1
            });
            let rep = *cells.iter().max_by_key(|&&c| (dist[c], std::cmp::Reverse(c))).unwrap();
            Component {
                id,
                winding: winding_of[id],
                unbounded,
                cells: cells.len(),
                area: area_units[id] as f64 * unit_area,
                representative: center(rep % g, rep / g),
                adjacency: vec![],
                boundary_arcs: vec![],
            }
        })
        .collect();

    let lookup = |p: C64| -> Option<usize> {
        let i = ((p.re - x0) / cell).floor();
        let j = ((p.im - y0) / cell).floor();
        if i < 0.0 || j < 0.0 || i >= g as f64 || j >= g as f64 {
            return None;
        }
        let l = labels[j as usize * g + i as usize];
        (l >= 0).then_some(l as usize)
    };

    // Side windings and adjacency along each segment.
    let near = 0.25 * diag;
    let far = prox + diag;
    let per_seg: Vec<((i64, i64), Option<(usize, usize)>)> = (0..n)
        .into_par_iter()
        .map(|s| {
            let (a, b) = disc.segment(s);
            let d = b - a;
            if d.norm() == 0.0 {
                return ((0, 0), None);
            }
            let nrm = C64::new(-d.im, d.re) / d.norm();
            let mid = (a + b) * 0.5;
            let mut delta = near.min(0.25 * d.norm()).max(1e-12 * disc.scale());
            // Shrink the probe until both probe points are closest to this
            // segment, so a nearby unrelated arc is never stepped over.
            let own = |p: C64, delta: f64| {
                index.nearest_within(p, 2.0 * delta).is_none_or(|(_, k)| {
                    let gap = (k as i64 - s as i64).rem_euclid(n as i64);
                    gap <= 1 || gap >= n as i64 - 1
                })
            };
            for _ in 0..40 {
                if own(mid + nrm * delta, delta) && own(mid - nrm * delta, delta) {
                    break;
                }
                delta *= 0.5;
            }
            let sides = (index.winding(mid + nrm * delta), index.winding(mid - nrm * delta));
            let adj = match (lookup(mid + nrm * far), lookup(mid - nrm * far)) {
                (Some(l), Some(r)) if l != r && (winding_of[l] - winding_of[r]).abs() == 1 => Some((l, r)),
                _ => None,
            };
            (sides, adj)
        })
        .collect();
    let seg_sides: Vec<(i64, i64)> = per_seg.iter().map(|p| p.0).collect();

    let mut adj_sets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); ncomp];
    let mut s = 0;
    while s < n {
        let Some(pair) = per_seg[s].1 else {
            s += 1;
            continue;
        };
        let mut e = s;
        while e + 1 < n && per_seg[e + 1].1 == Some(pair) {
            e += 1;
        }
        if e > s || n < 8 {
            let (t0, _) = disc.segment_params(s);
            let (_, t1) = disc.segment_params(e);
            let (l, r) = pair;
            adj_sets[l].insert(r);
            adj_sets[r].insert(l);
            components[l].boundary_arcs.push(BoundaryArc { theta_start: t0, theta_end: t1, neighbor: r });
            components[r].boundary_arcs.push(BoundaryArc { theta_start: t0, theta_end: t1, neighbor: l });
        }
        s = e + 1;
    }
    for (c, set) in components.iter_mut().zip(adj_sets) {
        c.adjacency = set.into_iter().collect();
    }

    // int σ(T_F): nonzero-winding cells plus band cells whose nearest arc has
    // nonzero winding on both sides.
    let mut interior: Vec<bool> = (0..g * g).map(|c| !band[c] && windings[c] != 0).collect();
    for c in 0..g * g {
        if band[c] {
            let p = center(c % g, c / g);
            if let Some((_, s)) = index.nearest_within(p, prox * 1.01) {
                let (l, r) = seg_sides[s];
                interior[c] = l != 0 && r != 0;
            }
        }
    }

    let mut d = RegionDecomposition {
        bbox: [x0, x0 + 2.0 * half, y0, y0 + 2.0 * half],
        resolution: g,
        cell,
        prox_tol: prox,
        components,
        intersections,
        warnings,
        labels,
        windings,
        interior,
        seg_sides,
        zero_group: (0..ncomp).collect(),
        disc: disc.clone(),
        index: index.clone(),
    };
    d.merge_zero_groups();
    d.intersections = classify_intersections(&d, &d.intersections);
    Ok(d)
}

impl RegionDecomposition {
    pub fn discretization(&self) -> &CurveDiscretization {
        &self.disc
    }

    pub fn index(&self) -> &SegmentIndex {
        &self.index
    }

    /// Component of the unbounded region.
    pub fn unbounded_component(&self) -> Option<&Component> {
        self.components.iter().find(|c| c.unbounded)
    }

    /// Components with `|w| = j`.
    pub fn omega(&self, j: i64) -> Vec<usize> {
        self.components.iter().filter(|c| c.winding.abs() == j).map(|c| c.id).collect()
    }

    /// Components with `|w| > j`.
    pub fn omega_plus(&self, j: i64) -> Vec<usize> {
        self.components.iter().filter(|c| c.winding.abs() > j).map(|c| c.id).collect()
    }

    /// Cell index containing `p`, if inside the box.
    pub fn cell_of(&self, p: C64) -> Option<usize> {
        let g = self.resolution;
        let i = ((p.re - self.bbox[0]) / self.cell).floor();
        let j = ((p.im - self.bbox[2]) / self.cell).floor();
        if i < 0.0 || j < 0.0 || i >= g as f64 || j >= g as f64 {
            None
        } else {
            Some(j as usize * g + i as usize)
        }
    }

    fn cell_center(&self, c: usize) -> C64 {
        let g = self.resolution;
        C64::new(
            self.bbox[0] + ((c % g) as f64 + 0.5) * self.cell,
            self.bbox[2] + ((c / g) as f64 + 0.5) * self.cell,
        )
    }

    /// Component label of a cell (`None` in the band).
    pub fn label(&self, c: usize) -> Option<usize> {
        let l = self.labels[c];
        (l >= 0).then_some(l as usize)
    }

    /// Grid winding of a cell centre.
    pub fn cell_winding(&self, c: usize) -> i64 {
        self.windings[c] as i64
    }

    /// Whether a cell belongs to `int σ(T_F)`.
    pub fn cell_interior(&self, c: usize) -> bool {
        self.interior[c]
    }

    /// Windings on the (left, right) side of segment `s`.
    pub fn segment_sides(&self, s: usize) -> (i64, i64) {
        self.seg_sides[s]
    }

    /// Component of a nearby non-band cell with winding `w`, found by moving
    /// from `p` in direction `dir` without crossing the curve.
    fn march(&self, p: C64, dir: C64, w: i64) -> Option<usize> {
        let u = dir / dir.norm();
        let mut prev = p;
        let mut step = self.cell * 0.25;
        for _ in 0..64 {
            let q = prev + u * step;
            if self.index.crosses(prev, q) {
                return None;
            }
            if let Some(c) = self.cell_of(q) {
                if let Some(l) = self.label(c) {
                    if self.components[l].winding == w {
                        return Some(l);
                    }
                    return None;
                }
            } else {
                return self.unbounded_component().filter(|_| w == 0).map(|c| c.id);
            }
            prev = q;
            step *= 1.25;
            if step > self.prox_tol * 8.0 {
                step = self.prox_tol * 8.0;
            }
        }
        None
    }

    fn merge_zero_groups(&mut self) {
        let points = self.intersections.points.clone();
        for p in &points {
            let mut zs = Vec::new();
            for (k, &w) in p.sector_windings.iter().enumerate() {
                if w != 0 {
                    continue;
                }
                let probe = p.sector_probes[k];
                if let Some(c) = self.march(probe, probe - p.location, 0) {
                    zs.push(c);
                }
            }
            for pair in zs.windows(2) {
                let a = self.group(pair[0]);
                let b = self.group(pair[1]);
                if a != b {
                    self.zero_group[a.max(b)] = a.min(b);
                }
            }
        }
    }

    fn group(&self, c: usize) -> usize {
        let mut r = c;
        while self.zero_group[r] != r {
            r = self.zero_group[r];
        }
        r
    }

    fn group_unbounded(&self, c: usize) -> bool {
        let g = self.group(c);
        self.components.iter().any(|k| k.winding == 0 && k.unbounded && self.group(k.id) == g)
    }

    /// `ℂ∖int σ(T_F)` is connected: all zero-winding components are joined
    /// through points of `𝒪`.
    pub fn complement_of_interior_connected(&self) -> bool {
        let groups: BTreeSet<usize> =
            self.components.iter().filter(|c| c.winding == 0).map(|c| self.group(c.id)).collect();
        groups.len() <= 1
    }

    /// Distance from `λ` to the polyline and the nearest segment.
    pub fn distance_to_curve(&self, lambda: C64) -> (f64, usize) {
        self.index.nearest(lambda)
    }

    /// Tolerance for treating a point as lying on the curve near segment `s`.
    fn on_curve_tol(&self, s: usize) -> f64 {
        self.disc.sag(s) + 1e-9 * self.disc.scale()
    }

    /// Index of the intersection point within tolerance of `λ`.
    pub fn intersection_near(&self, lambda: C64) -> Option<usize> {
        let (_, s) = self.index.nearest(lambda);
        let tol = (4.0 * self.disc.sag(s)).max(1e-9 * self.disc.scale());
        self.intersections
            .points
            .iter()
            .enumerate()
            .filter(|(_, p)| {
                // Tangential points are only located to within the cluster radius.
                let t = if p.tangential { tol.max(self.intersections.cluster_radius) } else { tol };
                (p.location - lambda).norm() <= t
            })
            .min_by(|a, b| (a.1.location - lambda).norm().total_cmp(&(b.1.location - lambda).norm()))
            .map(|(k, _)| k)
    }

    /// Locate `λ` relative to the curve and the components.
    pub fn locate(&self, lambda: C64) -> PointLocation {
        let (d, s) = self.index.nearest(lambda);
        if d <= self.on_curve_tol(s) {
            if let Some(k) = self.intersection_near(lambda) {
                return PointLocation::Intersection(k);
            }
            let (left, right) = self.seg_sides[s];
            return PointLocation::Curve { segment: s, left, right };
        }
        let w = self.index.winding(lambda);
        let Some(c0) = self.cell_of(lambda) else {
            return match self.unbounded_component() {
                Some(c) if w == 0 => PointLocation::Component(c.id),
                _ => PointLocation::Unresolved { winding: w },
            };
        };
        if let Some(l) = self.label(c0) {
            if self.components[l].winding == w && !self.index.crosses(lambda, self.cell_center(c0)) {
                return PointLocation::Component(l);
            }
        }
        // Breadth-first search through band cells along curve-free moves.
        let g = self.resolution as i64;
        let radius = (self.prox_tol / self.cell).ceil() as i64 + 3;
        let (ci, cj) = ((c0 % self.resolution) as i64, (c0 / self.resolution) as i64);
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::new();
        if !self.index.crosses(lambda, self.cell_center(c0)) {
            queue.push_back(c0);
            seen.insert(c0);
        }
        while let Some(c) = queue.pop_front() {
            if let Some(l) = self.label(c) {
                if self.components[l].winding == w {
                    return PointLocation::Component(l);
                }
                continue;
            }
            let (i, j) = ((c % self.resolution) as i64, (c / self.resolution) as i64);
            for (di, dj) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                let (ii, jj) = (i + di, j + dj);
                if ii < 0 || jj < 0 || ii >= g || jj >= g || (ii - ci).abs() > radius || (jj - cj).abs() > radius {
                    continue;
                }
                let nb = (jj * g + ii) as usize;
                if seen.contains(&nb) || self.index.crosses(self.cell_center(c), self.cell_center(nb)) {
                    continue;
                }
                seen.insert(nb);
                queue.push_back(nb);
            }
        }
        PointLocation::Unresolved { winding: w }
    }

    /// Some closed sub-loop of the curve (split at a point of `𝒪`) winds
    /// around `λ`; then `λ` lies in a bounded component of `ℂ∖F(𝕋)`.
    pub fn enclosed_by_subloop(&self, lambda: C64) -> bool {
        let n = self.disc.len();
        for p in &self.intersections.points {
            for a in 0..p.segments.len() {
                for b in a + 1..p.segments.len() {
                    let (i, j) = (p.segments[a].min(p.segments[b]), p.segments[a].max(p.segments[b]));
                    let mut loop_pts: Vec<C64> = vec![p.location];
                    loop_pts.extend_from_slice(&self.disc.points[i + 1..=j.min(n - 1)]);
                    if loop_pts.iter().any(|q| (q - lambda).norm() == 0.0) {
                        continue;
                    }
                    let w = raw_winding(&loop_pts, lambda).round() as i64;
                    if w != 0 {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Membership of `λ` in the unbounded component of the chosen complement.
    pub fn in_unbounded_complement(&self, lambda: C64, mode: ComplementMode) -> Result<bool, TopologyError> {
        let loc = self.locate(lambda);
        match mode {
            ComplementMode::ComplementOfCurve => match loc {
                PointLocation::Component(c) => Ok(self.components[c].unbounded),
                PointLocation::Unresolved { .. } if self.enclosed_by_subloop(lambda) => Ok(false),
                _ => Err(TopologyError::OnBoundary),
            },
            ComplementMode::ComplementOfSpectrum => match loc {
                PointLocation::Component(c) => {
                    let comp = &self.components[c];
                    Ok(comp.winding == 0 && comp.unbounded)
                }
                PointLocation::Unresolved { winding } if winding != 0 => Ok(false),
                PointLocation::Unresolved { .. } if self.enclosed_by_subloop(lambda) => Ok(false),
                _ => Err(TopologyError::OnBoundary),
            },
            ComplementMode::ComplementOfInteriorSpectrum => match loc {
                PointLocation::Component(c) => {
                    let comp = &self.components[c];
                    Ok(comp.winding == 0 && self.group_unbounded(c))
                }
                PointLocation::Curve { segment, left, right } => {
                    if left != 0 && right != 0 {
                        return Ok(false);
                    }
                    let (a, b) = self.disc.segment(segment);
                    let d = b - a;
                    let nrm = C64::new(-d.im, d.re);
                    let dir = if left == 0 { nrm } else { -nrm };
                    match self.march(lambda, dir, 0) {
                        Some(c) => Ok(self.group_unbounded(c)),
                        None => Err(TopologyError::OnBoundary),
                    }
                }
                PointLocation::Intersection(k) => {
                    let p = &self.intersections.points[k];
                    let mut any_zero = false;
                    for (s, &w) in p.sector_windings.iter().enumerate() {
                        if w == 0 {
                            any_zero = true;
                            let probe = p.sector_probes[s];
                            if let Some(c) = self.march(probe, probe - p.location, 0) {
                                return Ok(self.group_unbounded(c));
                            }
                        }
                    }
                    if any_zero {
                        Err(TopologyError::OnBoundary)
                    } else {
                        Ok(false)
                    }
                }
                PointLocation::Unresolved { winding } if winding != 0 => Ok(false),
                PointLocation::Unresolved { .. } => Err(TopologyError::OnBoundary),
            },
        }
    }

    /// `λ ∈ int σ(T_F)`; `None` if undecidable at this resolution.
    pub fn in_interior_spectrum(&self, lambda: C64) -> Option<bool> {
        match self.locate(lambda) {
            PointLocation::Component(c) => Some(self.components[c].winding != 0),
            PointLocation::Curve { left, right, .. } => Some(left != 0 && right != 0),
            PointLocation::Intersection(k) => Some(self.intersections.points[k].sector_windings.iter().all(|&w| w != 0)),
            PointLocation::Unresolved { winding } => (winding != 0).then_some(true),
        }
    }

    /// Serializable summary.
    pub fn report(&self) -> DecompositionReport {
        DecompositionReport {
            bbox: self.bbox,
            resolution: self.resolution,
            prox_tol: self.prox_tol,
            components: self.components.clone(),
            intersections: self.intersections.clone(),
            complement_of_interior_connected: self.complement_of_interior_connected(),
            warnings: self.warnings.clone(),
        }
    }
}

/// JSON export of a decomposition.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DecompositionReport {
    pub bbox: [f64; 4],
    pub resolution: usize,
    pub prox_tol: f64,
    pub components: Vec<Component>,
    pub intersections: IntersectionSet,
    pub complement_of_interior_connected: bool,
    pub warnings: Vec<String>,
}

// ---------------------------------------------------------------------------
// Ahern–Clark index

/// `w₊(F) = (Δarg F + mπ)/2π` with argument jumps at the zeros discarded.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AhernClarkIndex {
    /// Snapped value.
    pub value: f64,
    /// Unsnapped value.
    pub raw: f64,
    /// `(numerator, denominator)` when snapped to a multiple of 1/6.
    pub rational: Option<(i64, i64)>,
    pub zero_count: usize,
    pub zeros: Vec<f64>,
    pub arc_variations: Vec<f64>,
    pub min_abs_derivative: f64,
    /// `F` differentiable with `F′ ≠ 0` and an integer index.
    pub validity: bool,
    /// `max(0, −w₊)` when valid.
    pub kernel_dimension: Option<i64>,
}

const UNIFORM_SAMPLES: usize = 4096;

/// Locate the zeros of `F` on 𝕋.
pub fn zeros_on_circle(symbol: &Symbol) -> Vec<f64> {
    let m = UNIFORM_SAMPLES;
    let th: Vec<f64> = (0..m).map(|i| TAU * i as f64 / m as f64).collect();
    let vals: Vec<f64> = th.iter().map(|&t| symbol.evaluate(t).norm()).collect();
    let fmax = vals.iter().cloned().fold(0.0, f64::max);
    let tol = 1e-9 * fmax;
    let mut zeros: Vec<f64> = Vec::new();
    for i in 0..m {
        let prev = vals[(i + m - 1) % m];
        let next = vals[(i + 1) % m];
        if vals[i] > prev || vals[i] > next || vals[i] > 0.05 * fmax {
            continue;
        }
        // Damped Gauss–Newton on F(θ) = 0 along θ, falling back to golden search.
        let h = TAU / m as f64;
        let mut t = th[i];
        for _ in 0..60 {
            let f = symbol.evaluate(t);
            let d = symbol.derivative(t);
            if f.norm() <= tol || d.norm() == 0.0 {
                break;
            }
            let step = -(d.conj() * f).re / d.norm_sqr();
            let step = step.clamp(-h, h);
            let mut lam = 1.0;
            while lam > 1e-6 && symbol.evaluate(t + lam * step).norm() > f.norm() {
                lam *= 0.5;
            }
            if lam <= 1e-6 {
                break;
            }
            t += lam * step;
            if (lam * step).abs() < 1e-16 {
                break;
            }
        }
        if symbol.evaluate(t).norm() > tol {
            t = golden_min(|x| symbol.evaluate(x).norm(), t - h, t + h);
        }
        if symbol.evaluate(t).norm() <= tol {
            let t = crate::symbol::reduce_angle(t);
            if !zeros.iter().any(|&z| {
                let d = (z - t).abs();
                d.min(TAU - d) < 1e-7
            }) {
                zeros.push(t);
            }
        }
    }
    zeros.sort_by(f64::total_cmp);
    zeros
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..200 {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
        if (b - a).abs() < 1e-15 {
            break;
        }
    }
    0.5 * (a + b)
}

/// Continuous argument change of `F` over `[a, b]` (no zeros inside).
fn arg_variation(symbol: &Symbol, a: f64, b: f64, samples: usize) -> Result<f64, TopologyError> {
    let mut total = 0.0;
    let mut t0 = a;
    let mut f0 = symbol.evaluate(a);
    for k in 1..=samples {
        let t1 = a + (b - a) * k as f64 / samples as f64;
        let f1 = symbol.evaluate(t1);
        total += refine_arg(symbol, t0, f0, t1, f1, 0)?;
        t0 = t1;
        f0 = f1;
    }
    Ok(total)
}

fn refine_arg(symbol: &Symbol, t0: f64, f0: C64, t1: f64, f1: C64, depth: usize) -> Result<f64, TopologyError> {
    let jump = (f1 / f0).arg();
    if jump.abs() < PI / 2.0 && f0.norm() > 0.0 && f1.norm() > 0.0 {
        return Ok(jump);
    }
    if depth >= 12 {
        return Err(TopologyError::UnwrapFailure { theta: t0 });
    }
    let tm = 0.5 * (t0 + t1);
    let fm = symbol.evaluate(tm);
    Ok(refine_arg(symbol, t0, f0, tm, fm, depth + 1)? + refine_arg(symbol, tm, fm, t1, f1, depth + 1)?)
}

/// Ahern–Clark index of `F`.
pub fn w_plus(symbol: &Symbol, disc: &CurveDiscretization) -> Result<AhernClarkIndex, TopologyError> {
    let zeros = zeros_on_circle(symbol);
    let m = zeros.len();
    let dmin = disc.tangents.iter().map(|d| d.norm()).fold(f64::MAX, f64::min);
    let dmax = disc.tangents.iter().map(|d| d.norm()).fold(0.0, f64::max);
    let mut deriv_ok = dmin > 1e-6 * dmax;
    for &z in &zeros {
        let d = symbol.derivative(z).norm();
        if !(d > 1e-6 * dmax) {
            deriv_ok = false;
        }
    }
    let mut variations = Vec::new();
    if m == 0 {
        variations.push(arg_variation(symbol, 0.0, TAU, UNIFORM_SAMPLES)?);
    } else {
        let mut ends = Vec::with_capacity(m);
        for k in 0..m {
            let a = zeros[k];
            let b = if k + 1 < m { zeros[k + 1] } else { zeros[0] + TAU };
            let (ea, eb) = zero_margins(symbol, a, b);
            let samples = ((UNIFORM_SAMPLES as f64 * (b - a) / TAU).ceil() as usize).max(64);
            variations.push(arg_variation(symbol, a + ea, b - eb, samples)?);
            ends.push((a + ea, b - eb));
        }
        // Across a smooth simple zero the argument jumps by about ±π; the
        // remainder is the rotation inside the skipped margins.
        for k in 0..m {
            let before = ends[(k + m - 1) % m].1;
            let after = ends[k].0;
            let delta = (symbol.evaluate(after) / symbol.evaluate(before)).arg();
            if (delta.abs() - PI).abs() < 0.3 {
                variations[k] += delta - PI.copysign(delta);
            }
        }
    }
    let total: f64 = variations.iter().sum();
    let raw = (total + m as f64 * PI) / TAU;
    let sixths = (raw * 6.0).round();
    let (value, rational) = if (raw - sixths / 6.0).abs() <= 1e-3 {
        let (mut num, mut den) = (sixths as i64, 6i64);
        let g = gcd(num.unsigned_abs() as i64, den);
        if g > 0 {
            num /= g;
            den /= g;
        }
        // `+ 0.0` turns a snapped −0 into 0
        (sixths / 6.0 + 0.0, Some((num, den)))
    } else {
        (raw, None)
    };
    let integer = matches!(rational, Some((_, 1)));
    let mut validity = deriv_ok && integer;
    if m == 0 && integer {
        if let Ok(w) = winding_number(disc, C64::new(0.0, 0.0)) {
            if w as f64 != value {
                validity = false;
            }
        }
    }
    Ok(AhernClarkIndex {
        value,
        raw,
        rational,
        zero_count: m,
        zeros,
        arc_variations: variations,
        min_abs_derivative: dmin,
        validity,
        kernel_dimension: validity.then(|| (-(value as i64)).max(0)),
    })
}

/// Distance kept from the zeros `a < b` when unwrapping. A spline cannot
/// follow a cusp inside the sample intervals next to a zero, so sampled
/// symbols skip two intervals on each side.
fn zero_margins(symbol: &Symbol, a: f64, b: f64) -> (f64, f64) {
    let base = 1e-7 * (b - a);
    let Some(th) = symbol.sample_thetas() else {
        return (base, base);
    };
    let n = th.len();
    let cap = 0.25 * (b - a);
    let after = |z: f64| {
        let z = crate::symbol::reduce_angle(z);
        let k = th.partition_point(|&t| t <= z + 1e-12);
        let t2 = if k + 1 < n { th[k + 1] } else { th[(k + 1) % n] + TAU };
        (t2 - z).max(base)
    };
    let before = |z: f64| {
        let z = crate::symbol::reduce_angle(z);
        let k = th.partition_point(|&t| t < z - 1e-12);
        let t2 = if k >= 2 { th[k - 2] } else { th[(k + n - 2) % n] - TAU };
        (z - t2).max(base)
    };
    (after(a).min(cap), before(b).min(cap))
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{c64, fixtures};

    fn disc(s: &Symbol) -> CurveDiscretization {
        s.discretize(s.default_step()).unwrap()
    }

    #[test]
    fn winding_examples() {
        let z = Symbol::fourier(&[(1, c64(1.0, 0.0))]).unwrap();
        assert_eq!(winding_number(&disc(&z), c64(0.0, 0.0)), Ok(1));
        let z2 = Symbol::fourier(&[(-2, c64(1.0, 0.0))]).unwrap();
        assert_eq!(winding_number(&disc(&z2), c64(0.0, 0.0)), Ok(-2));
        assert_eq!(winding_number(&disc(&fixtures::z_plus_2()), c64(0.0, 0.0)), Ok(0));
        assert!(matches!(winding_number(&disc(&z), c64(1.0, 0.0)), Err(TopologyError::NearCurve { .. })));
    }

    #[test]
    fn index_winding_matches_angle_sum() {
        let s = fixtures::limacon(0.75);
        let d = disc(&s);
        let idx = SegmentIndex::new(&d.points);
        for k in 0..200 {
            let p = c64(-2.0 + 0.021 * k as f64, 0.013 * k as f64 - 1.3);
            if let Ok(w) = winding_number(&d, p) {
                assert_eq!(idx.winding(p), w, "at {p}");
            }
        }
    }

    #[test]
    fn circle_has_no_intersections() {
        let z = Symbol::fourier(&[(1, c64(1.0, 0.0))]).unwrap();
        assert!(self_intersections(&disc(&z)).unwrap().is_empty());
    }

    #[test]
    fn limacon_crossing_is_type_three() {
        let s = fixtures::limacon(0.75);
        let set = self_intersections(&disc(&s)).unwrap();
        assert_eq!(set.points.len(), 1);
        let p = &set.points[0];
        assert!(!p.tangential);
        let mut w = p.sector_windings.clone();
        w.sort_unstable();
        assert_eq!(w, vec![-2, -1, -1, 0]);
        assert_eq!(p.classification, IntersectionType::TypeIII);
    }

    #[test]
    fn sector_rules() {
        use IntersectionType::*;
        assert_eq!(classify_sectors(&[0, -1, -2, -1], false, &[]), TypeIII);
        assert_eq!(classify_sectors(&[0, -1, -2, -1], true, &[1, 3]), TypeIV);
        assert_eq!(classify_sectors(&[-1, -2, -1, -2], true, &[1, 3]), TypeII);
        assert_eq!(classify_sectors(&[-1, -2, -1, -2], true, &[0, 2]), TypeI);
        assert_eq!(classify_sectors(&[0, -1, -2, -1], false, &[]), TypeIII);
        assert_eq!(classify_sectors(&[0, 1, 2, 1], false, &[]), TypeIII);
        assert_eq!(classify_sectors(&[0, -2, 0, -2], false, &[]), Unclassified);
    }

    #[test]
    fn reciprocal_decomposition() {
        let d = region_decomposition(&disc(&fixtures::recip_z()), &TopologyOptions::default()).unwrap();
        assert_eq!(d.components.len(), 2);
        let inner = d.components.iter().find(|c| !c.unbounded).unwrap();
        assert_eq!(inner.winding, -1);
        assert_eq!(d.unbounded_component().unwrap().winding, 0);
        assert_eq!(inner.adjacency, vec![d.unbounded_component().unwrap().id]);
        assert_eq!(d.in_unbounded_complement(c64(0.0, 0.0), ComplementMode::ComplementOfSpectrum), Ok(false));
    }

    #[test]
    fn z_plus_two_origin_outside() {
        let d = region_decomposition(&disc(&fixtures::z_plus_2()), &TopologyOptions::default()).unwrap();
        assert_eq!(d.in_unbounded_complement(c64(0.0, 0.0), ComplementMode::ComplementOfCurve), Ok(true));
    }

    #[test]
    fn w_plus_closed_forms() {
        let zm1 = Symbol::fourier(&[(0, c64(-1.0, 0.0)), (1, c64(1.0, 0.0))]).unwrap();
        let w = w_plus(&zm1, &disc(&zm1)).unwrap();
        assert_eq!(w.zero_count, 1);
        assert!((w.arc_variations[0] - PI).abs() < 1e-5);
        assert_eq!(w.value, 1.0);
        assert_eq!(w.kernel_dimension, Some(0));
        let f = Symbol::fourier(&[(0, c64(1.0, 0.0)), (-1, c64(-1.0, 0.0))]).unwrap();
        let w = w_plus(&f, &disc(&f)).unwrap();
        assert!((w.arc_variations[0] + PI).abs() < 1e-5);
        assert_eq!(w.value, 0.0);
        let w = w_plus(&fixtures::z_plus_2(), &disc(&fixtures::z_plus_2())).unwrap();
        assert_eq!((w.zero_count, w.value, w.validity), (0, 0.0, true));
    }

    #[test]
    fn w_plus_cube_root_is_minus_one_third() {
        let s = fixtures::cube_root_symbol(4096);
        let w = w_plus(&s, &disc(&s)).unwrap();
        assert_eq!(w.rational, Some((-1, 3)));
        assert!(!w.validity);
    }
}
