//! The explicit 2×2 model semigroup on the winding −2 lens of a
//! figure-eight-in-a-loop curve.
//!
//! Given analytic extensions `ζ₁, ζ₂` on the lens `Ω₂` and a logarithm `log₁`
//! on `Ω₁ ∪ Ω₂` with `α_t = e^{t log₁ λ}`, the family is
//!
//! ```text
//! B_t(λ) = α_t/(ζ₂−ζ₁) · [ ζ₂ − e ζ₁      ζ₁ζ₂(e − 1) ]
//!                        [ 1 − e           e ζ₂ − ζ₁   ],   e = e^{2πit}.
//! ```

use std::f64::consts::PI;

use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::{C64, TAU};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("λ = {0} lies on a branch cut")]
    OnBranchCut(C64),
    #[error("ζ₁ and ζ₂ coincide or have positive ratio at {0}")]
    SeparationFailure(C64),
    #[error("invalid model parameters: {0}")]
    BadParameters(String),
    #[error("bad model configuration: {0}")]
    Json(String),
}

pub type B2 = Matrix2<C64>;

/// `exp((1/ν) log_{(a, a+2π)}((λ − c)/r))`.
pub fn zeta_circle_arc(lambda: C64, c: C64, r: f64, nu: f64, branch_start: f64) -> Result<C64, ModelError> {
    let w = (lambda - c) / r;
    if w.norm() == 0.0 {
        return Err(ModelError::OnBranchCut(lambda));
    }
    let mut a = w.arg();
    while a <= branch_start {
        a += TAU;
    }
    while a > branch_start + TAU {
        a -= TAU;
    }
    if (a - branch_start).abs() < 1e-12 || (branch_start + TAU - a).abs() < 1e-12 {
        return Err(ModelError::OnBranchCut(lambda));
    }
    Ok((C64::new(w.norm().ln(), a) / nu).exp())
}

/// Lower branch start for `ζ₁` (about `c₁`) and `ζ₂` (about `c₂`).
pub const BRANCH_ONE: f64 = -PI / 2.0;
pub const BRANCH_TWO: f64 = -3.0 * PI / 2.0;

/// Where `Ω₂` lives.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Domain {
    /// `D(c₁, r) ∩ D(c₂, r)`.
    Lens { c1: C64, c2: C64, r: f64 },
    Disk { center: C64, radius: f64 },
}

impl Domain {
    pub fn contains(&self, z: C64) -> bool {
        match self {
            Domain::Lens { c1, c2, r } => (z - c1).norm() < *r && (z - c2).norm() < *r,
            Domain::Disk { center, radius } => (z - center).norm() < *radius,
        }
    }

    /// Signed distance to the boundary (positive inside).
    fn depth(&self, z: C64) -> f64 {
        match self {
            Domain::Lens { c1, c2, r } => (r - (z - c1).norm()).min(r - (z - c2).norm()),
            Domain::Disk { center, radius } => radius - (z - center).norm(),
        }
    }

    fn bbox(&self) -> (C64, C64) {
        match self {
            Domain::Lens { c1, c2, r } => {
                let lo = C64::new((c1.re - r).max(c2.re - r), (c1.im - r).max(c2.im - r));
                let hi = C64::new((c1.re + r).min(c2.re + r), (c1.im + r).min(c2.im + r));
                (lo, hi)
            }
            Domain::Disk { center, radius } => {
                (center - C64::new(*radius, *radius), center + C64::new(*radius, *radius))
            }
        }
    }

    pub fn centroid(&self) -> C64 {
        match self {
            Domain::Lens { c1, c2, .. } => (c1 + c2) * 0.5,
            Domain::Disk { center, .. } => *center,
        }
    }

    /// Points at distance `offset` inside the boundary.
    fn boundary_points(&self, count: usize, offset: f64) -> Vec<C64> {
        let mut out = Vec::with_capacity(count);
        match self {
            Domain::Lens { c1, c2, r } => {
                for (c, other) in [(c1, c2), (c2, c1)] {
                    for k in 0..count {
                        let a = TAU * (k as f64 + 0.5) / count as f64;
                        let p = c + C64::from_polar(r - offset, a);
                        if (p - other).norm() < r - offset {
                            out.push(p);
                        }
                    }
                }
            }
            Domain::Disk { center, radius } => {
                for k in 0..count {
                    out.push(center + C64::from_polar(radius - offset, TAU * k as f64 / count as f64));
                }
            }
        }
        out
    }

    /// 2048 Halton points inside plus boundary points `1e−3` inside.
    pub fn samples(&self) -> Vec<C64> {
        self.samples_with(2048, 512, 1e-3)
    }

    pub fn samples_with(&self, interior: usize, boundary: usize, offset: f64) -> Vec<C64> {
        let (lo, hi) = self.bbox();
        let mut out = Vec::with_capacity(interior + boundary);
        let mut i = 1u64;
        while out.len() < interior && i < 1_000_000 {
            let p = C64::new(lo.re + (hi.re - lo.re) * halton(i, 2), lo.im + (hi.im - lo.im) * halton(i, 3));
            if self.depth(p) > 0.0 {
                out.push(p);
            }
            i += 1;
        }
        let mut b = self.boundary_points(boundary, offset);
        b.truncate(boundary);
        out.extend(b);
        out
    }
}

fn halton(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Source of the two extensions `ζ₁, ζ₂`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ZetaKind {
    /// Closed-form circle-arc extensions about conjugate centres.
    CircleArc { c1: C64, c2: C64, r: f64, nu: f64 },
    /// Constant functions (algebra checks).
    Constant { z1: C64, z2: C64 },
    /// `ζ_j = p_j/q_j`, polynomial coefficients in increasing degree.
    Rational { p1: Vec<C64>, q1: Vec<C64>, p2: Vec<C64>, q2: Vec<C64> },
}

fn horner(c: &[C64], z: C64) -> C64 {
    c.iter().rev().fold(C64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

/// The pair `(ζ₁, ζ₂)` together with the domain `Ω₂`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ZetaPair {
    pub kind: ZetaKind,
    pub domain: Domain,
}

impl ZetaPair {
    /// Circle-arc pair on the lens `D(c₁,r) ∩ D(c₂,r)`.
    pub fn circle_arc(c1: C64, c2: C64, r: f64, nu: f64) -> Result<Self, ModelError> {
        if !(r > 0.0) || !(nu > 1.0) {
            return Err(ModelError::BadParameters("need r > 0 and ν > 1".into()));
        }
        if (c1 - c2).norm() >= 2.0 * r {
            return Err(ModelError::BadParameters("the two disks do not overlap".into()));
        }
        Ok(ZetaPair { kind: ZetaKind::CircleArc { c1, c2, r, nu }, domain: Domain::Lens { c1, c2, r } })
    }

    /// Centres outside the closed lens: `|c₁ − c₂| > r`.
    pub fn centers_outside_lens(&self) -> bool {
        match (&self.kind, &self.domain) {
            (ZetaKind::CircleArc { c1, c2, r, .. }, _) => (c1 - c2).norm() > *r,
            _ => true,
        }
    }

    pub fn eval(&self, lambda: C64) -> Result<(C64, C64), ModelError> {
        match &self.kind {
            ZetaKind::CircleArc { c1, c2, r, nu } => Ok((
                zeta_circle_arc(lambda, *c1, *r, *nu, BRANCH_ONE)?,
                zeta_circle_arc(lambda, *c2, *r, *nu, BRANCH_TWO)?,
            )),
            ZetaKind::Constant { z1, z2 } => Ok((*z1, *z2)),
            ZetaKind::Rational { p1, q1, p2, q2 } => {
                let (d1, d2) = (horner(q1, lambda), horner(q2, lambda));
                if d1.norm() == 0.0 || d2.norm() == 0.0 {
                    return Err(ModelError::BadParameters(format!("pole at {lambda}")));
                }
                Ok((horner(p1, lambda) / d1, horner(p2, lambda) / d2))
            }
        }
    }
}

/// Outcome of [`separation_check`].
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SeparationReport {
    pub samples: usize,
    pub min_separation: f64,
    pub min_separation_at: Option<C64>,
    /// Samples where `ζ₁/ζ₂ ∈ ℝ₊` within angle `1e−6`.
    pub violations: Vec<C64>,
    pub errors: usize,
}

impl SeparationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.errors == 0 && self.min_separation > 0.0
    }
}

/// `min |ζ₁ − ζ₂|` and positive-ratio violations over the samples.
pub fn separation_check(pair: &ZetaPair, samples: &[C64]) -> SeparationReport {
    let evals: Vec<Result<(C64, C64), ModelError>> = samples.par_iter().map(|&l| pair.eval(l)).collect();
    let mut rep =
        SeparationReport { samples: samples.len(), min_separation: f64::INFINITY, min_separation_at: None, violations: vec![], errors: 0 };
    for (&l, e) in samples.iter().zip(evals) {
        match e {
            Ok((z1, z2)) => {
                let d = (z1 - z2).norm();
                if d < rep.min_separation {
                    rep.min_separation = d;
                    rep.min_separation_at = Some(l);
                }
                if d == 0.0 || (z2.norm() > 0.0 && (z1 / z2).arg().abs() < 1e-6) {
                    rep.violations.push(l);
                }
            }
            Err(_) => rep.errors += 1,
        }
    }
    rep
}

/// Model semigroup `B_t` on `Ω₂`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ModelSemigroup {
    pub pair: ZetaPair,
    /// Direction of the cut ray of `log₁` from 0.
    pub log_cut: f64,
}

impl ModelSemigroup {
    /// Model with the `log₁` cut pointing away from `Ω₂`, checked on the
    /// domain samples.
    pub fn new(pair: ZetaPair) -> Result<Self, ModelError> {
        let c = pair.domain.centroid();
        if pair.domain.contains(C64::new(0.0, 0.0)) || c.norm() == 0.0 {
            return Err(ModelError::BadParameters("0 must lie outside Ω₂".into()));
        }
        Self::with_cut(pair, (-c).arg())
    }

    pub fn with_cut(pair: ZetaPair, log_cut: f64) -> Result<Self, ModelError> {
        let m = ModelSemigroup { pair, log_cut };
        let dir = C64::from_polar(1.0, -log_cut);
        if let Some(&bad) = m.pair.domain.samples().iter().find(|&&l| (l * dir).arg().abs() < 1e-9) {
            return Err(ModelError::OnBranchCut(bad));
        }
        Ok(m)
    }

    /// `log₁ λ` with the cut along `e^{i·log_cut}ℝ₊`.
    pub fn log1(&self, lambda: C64) -> Result<C64, ModelError> {
        if lambda.norm() == 0.0 {
            return Err(ModelError::OnBranchCut(lambda));
        }
        let rot = C64::from_polar(1.0, -self.log_cut);
        let a = (lambda * rot).arg();
        if a.abs() < 1e-14 {
            return Err(ModelError::OnBranchCut(lambda));
        }
        // arg in (log_cut, log_cut + 2π)
        let a = if a > 0.0 { a } else { a + TAU };
        Ok(C64::new(lambda.norm().ln(), self.log_cut + a))
    }

    /// `α_{t,1}(λ) = e^{t log₁ λ}`.
    pub fn alpha1(&self, lambda: C64, t: f64) -> Result<C64, ModelError> {
        Ok((self.log1(lambda)? * t).exp())
    }

    /// `α_{t,2} = e^{2πit} α_{t,1}` (from `log₂ = log₁ + 2πi`).
    pub fn alpha2(&self, lambda: C64, t: f64) -> Result<C64, ModelError> {
        Ok(C64::from_polar(1.0, TAU * t) * self.alpha1(lambda, t)?)
    }

    /// Entries scaled by `(ζ₂ − ζ₁)/α_{t,1}`: `(ã, b̃, c̃, d̃)`.
    pub fn tilde(&self, lambda: C64, t: f64) -> Result<[C64; 4], ModelError> {
        let (z1, z2) = self.pair.eval(lambda)?;
        let e = C64::from_polar(1.0, TAU * t);
        let one = C64::new(1.0, 0.0);
        Ok([z2 - e * z1, z1 * z2 * (e - one), one - e, e * z2 - z1])
    }

    /// `B_t(λ)`.
    pub fn b_t(&self, lambda: C64, t: f64) -> Result<B2, ModelError> {
        let (z1, z2) = self.pair.eval(lambda)?;
        let den = z2 - z1;
        if den.norm() == 0.0 || (z2.norm() > 0.0 && (z1 / z2).arg().abs() < 1e-6) {
            return Err(ModelError::SeparationFailure(lambda));
        }
        let s = self.alpha1(lambda, t)? / den;
        let [a, b, c, d] = self.tilde(lambda, t)?;
        Ok(B2::new(a * s, b * s, c * s, d * s))
    }

    /// `max_λ ‖B_t(λ) − I‖ / t` at `t` over the samples.
    pub fn small_time_slope(&self, samples: &[C64], t: f64) -> Result<f64, ModelError> {
        let mut c: f64 = 0.0;
        for &l in samples {
            let d = self.b_t(l, t)? - B2::identity();
            c = c.max(d.iter().map(|z| z.norm()).fold(0.0, f64::max) / t);
        }
        Ok(c)
    }
}

/// Residuals from [`verify_identities`].
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct IdentityReport {
    pub trials: usize,
    pub seed: u64,
    /// `max ‖B_{t+s} − B_t B_s‖_max / ‖B_{t+s}‖_max`.
    pub group_residual: f64,
    /// Four scaled identities, e.g. `ã_t ã_s + b̃_t c̃_s = ã_{t+s}(ζ₂ − ζ₁)`.
    pub tilde_residual: f64,
    /// `|det B_t − e^{2πit} α_{t,1}²| / |α_{t,1}|²`.
    pub det_residual: f64,
    /// `max ‖B_1(λ) − λI‖ / |λ|`.
    pub unit_residual: f64,
    /// `max |b_t| + |c_t|` relative, at integer `t`.
    pub integer_offdiag: f64,
    pub worst: Option<(C64, f64, f64)>,
}

fn max_abs(m: &B2) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Check the group law and derived identities at random `(λ, s, t)`.
pub fn verify_identities(model: &ModelSemigroup, trials: usize, seed: u64) -> Result<IdentityReport, ModelError> {
    let samples = model.pair.domain.samples();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<(C64, f64, f64)> = (0..trials)
        .map(|_| (samples[rng.gen_range(0..samples.len())], rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)))
        .collect();
    let per: Vec<Result<(f64, f64, f64, f64, f64), ModelError>> = draws
        .par_iter()
        .map(|&(l, s, t)| {
            let bs = model.b_t(l, s)?;
            let bt = model.b_t(l, t)?;
            let bst = model.b_t(l, s + t)?;
            let group = max_abs(&(bst - bt * bs)) / max_abs(&bst);

            let (z1, z2) = model.pair.eval(l)?;
            let den = z2 - z1;
            let [at, btt, ct, dt] = model.tilde(l, t)?;
            let [as_, bs_, cs, ds] = model.tilde(l, s)?;
            let [a2, b2, c2, d2] = model.tilde(l, s + t)?;
            let scale = [at, btt, ct, dt, as_, bs_, cs, ds].iter().map(|z| z.norm()).fold(0.0, f64::max).powi(2);
            let tilde = [
                (at * as_ + btt * cs - a2 * den).norm(),
                (at * bs_ + btt * ds - b2 * den).norm(),
                (ct * as_ + dt * cs - c2 * den).norm(),
                (ct * bs_ + dt * ds - d2 * den).norm(),
            ]
            .into_iter()
            .fold(0.0, f64::max)
                / scale;

            let alpha = model.alpha1(l, t)?;
            let det = bt.determinant();
            let det_res = (det - C64::from_polar(1.0, TAU * t) * alpha * alpha).norm() / alpha.norm_sqr();

            let b1 = model.b_t(l, 1.0)?;
            let unit = max_abs(&(b1 - B2::identity() * l)) / l.norm();

            let k = 1.0 + (t * 3.0).floor();
            let bk = model.b_t(l, k)?;
            let off = (bk[(0, 1)].norm() + bk[(1, 0)].norm()) / max_abs(&bk);
            Ok((group, tilde, det_res, unit, off))
        })
        .collect();
    let mut rep = IdentityReport {
        trials,
        seed,
        group_residual: 0.0,
        tilde_residual: 0.0,
        det_residual: 0.0,
        unit_residual: 0.0,
        integer_offdiag: 0.0,
        worst: None,
    };
    for (r, &d) in per.into_iter().zip(&draws) {
        let (g, ti, de, u, o) = r?;
        if g > rep.group_residual {
            rep.group_residual = g;
            rep.worst = Some(d);
        }
        rep.tilde_residual = rep.tilde_residual.max(ti);
        rep.det_residual = rep.det_residual.max(de);
        rep.unit_residual = rep.unit_residual.max(u);
        rep.integer_offdiag = rep.integer_offdiag.max(o);
    }
    Ok(rep)
}

/// JSON configuration of the circle-arc model.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CircleArcConfig {
    pub c1: [f64; 2],
    pub c2: [f64; 2],
    pub r: f64,
    pub nu: f64,
    /// Optional direction of the `log₁` cut.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_cut: Option<f64>,
}

impl CircleArcConfig {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))
    }

    pub fn build(&self) -> Result<ModelSemigroup, ModelError> {
        let pair = ZetaPair::circle_arc(
            C64::new(self.c1[0], self.c1[1]),
            C64::new(self.c2[0], self.c2[1]),
            self.r,
            self.nu,
        )?;
        match self.log_cut {
            Some(a) => ModelSemigroup::with_cut(pair, a),
            None => ModelSemigroup::new(pair),
        }
    }
}
