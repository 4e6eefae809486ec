//! Candidate semigroups `(T_t)` with `T_1 = T` on truncations, and checks of
//! the embedding identity, the semigroup law and strong continuity.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, RwLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve_topology::{ComplementMode, RegionDecomposition, TopologyError};
use crate::linalg::{self, CMat};
use crate::model_fig8::{ModelError, ModelSemigroup};
use crate::spectral::{self, PowerContour, SectorialAngle, SpectralError};
use crate::symbol::TruncatedToeplitz;
use crate::{C64, TAU};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SemigroupError {
    #[error("precondition failed: {reason}")]
    Gate { reason: String },
    #[error("no ray from 0 avoids the {} truncation eigenvalues", eigenvalues.len())]
    NoAdmissibleRay { eigenvalues: Vec<C64> },
    #[error("negative time {0}")]
    NegativeTime(f64),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

/// A family `t ↦ T_t` of square matrices.
pub trait OperatorFamily: Send + Sync {
    fn dim(&self) -> usize;
    fn at(&self, t: f64) -> Result<Arc<CMat>, SemigroupError>;

    /// Evaluate several times, in parallel where possible.
    fn prefetch(&self, times: &[f64]) -> Result<(), SemigroupError> {
        times.par_iter().try_for_each(|&t| self.at(t).map(|_| ()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum FamilyVariant {
    /// `T_t = exp(tG)`; `ray` is the cut direction of the logarithm if any.
    GeneratorBased { generator: CMat, ray: Option<f64> },
    /// `T_t = z^t(T)` by the sectorial calculus.
    SectorialCalculus { source: CMat, angle: SectorialAngle, contour: PowerContour },
    /// Block diagonal `B_t(λ_i)` over the listed points.
    ModelFig8 { model: ModelSemigroup, points: Vec<C64> },
}

/// A semigroup candidate with memoized evaluations.
#[derive(Debug)]
pub struct SemigroupFamily {
    pub variant: FamilyVariant,
    cache: RwLock<HashMap<u64, Arc<CMat>>>,
}

impl Clone for SemigroupFamily {
    fn clone(&self) -> Self {
        SemigroupFamily::new(self.variant.clone())
    }
}

impl SemigroupFamily {
    pub fn new(variant: FamilyVariant) -> Self {
        SemigroupFamily { variant, cache: RwLock::new(HashMap::new()) }
    }

    pub fn generator(g: CMat) -> Self {
        Self::new(FamilyVariant::GeneratorBased { generator: g, ray: None })
    }

    pub fn name(&self) -> &'static str {
        match self.variant {
            FamilyVariant::GeneratorBased { .. } => "generator_based",
            FamilyVariant::SectorialCalculus { .. } => "sectorial_calculus",
            FamilyVariant::ModelFig8 { .. } => "model_fig8",
        }
    }

    /// `T_1` of a [`FamilyVariant::ModelFig8`] family is `diag(λ_i I₂)`.
    pub fn model_target(points: &[C64]) -> CMat {
        let mut m = CMat::zeros(2 * points.len(), 2 * points.len());
        for (i, &l) in points.iter().enumerate() {
            m[(2 * i, 2 * i)] = l;
            m[(2 * i + 1, 2 * i + 1)] = l;
        }
        m
    }

    fn compute(&self, t: f64) -> Result<CMat, SemigroupError> {
        let n = self.dim();
        if t == 0.0 {
            return Ok(CMat::identity(n, n));
        }
        match &self.variant {
            FamilyVariant::GeneratorBased { generator, .. } => Ok(linalg::expm(&(generator * C64::new(t, 0.0)))),
            FamilyVariant::SectorialCalculus { source, contour, .. } => {
                Ok(spectral::sectorial_power(source, t, *contour)?)
            }
            FamilyVariant::ModelFig8 { model, points } => {
                let mut m = CMat::zeros(n, n);
                for (i, &l) in points.iter().enumerate() {
                    let b = model.b_t(l, t)?;
                    for r in 0..2 {
                        for c in 0..2 {
                            m[(2 * i + r, 2 * i + c)] = b[(r, c)];
                        }
                    }
                }
                Ok(m)
            }
        }
    }
}

impl OperatorFamily for SemigroupFamily {
    fn dim(&self) -> usize {
        match &self.variant {
            FamilyVariant::GeneratorBased { generator, .. } => generator.nrows(),
            FamilyVariant::SectorialCalculus { source, .. } => source.nrows(),
            FamilyVariant::ModelFig8 { points, .. } => 2 * points.len(),
        }
    }

    fn at(&self, t: f64) -> Result<Arc<CMat>, SemigroupError> {
        if t < 0.0 || t.is_nan() {
            return Err(SemigroupError::NegativeTime(t));
        }
        let key = t.to_bits();
        if let Some(m) = self.cache.read().expect("cache lock").get(&key) {
            return Ok(m.clone());
        }
        let m = Arc::new(self.compute(t)?);
        Ok(self.cache.write().expect("cache lock").entry(key).or_insert(m).clone())
    }
}

/// Angular distance between two directions.
fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Candidate cut directions: bisectors of the angular gaps between the
/// eigenvalue arguments (widest first), then 360 uniform directions.
pub fn ray_candidates(eigenvalues: &[C64]) -> Vec<f64> {
    let mut args: Vec<f64> = eigenvalues.iter().filter(|l| l.norm() > 0.0).map(|l| l.arg()).collect();
    args.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    if args.is_empty() {
        out.push(PI);
    } else {
        let mut gaps: Vec<(f64, f64)> = (0..args.len())
            .map(|i| {
                let a = args[i];
                let b = if i + 1 < args.len() { args[i + 1] } else { args[0] + TAU };
                (b - a, a + 0.5 * (b - a))
            })
            .collect();
        gaps.sort_by(|x, y| y.0.total_cmp(&x.0));
        out.extend(gaps.into_iter().map(|(_, mid)| mid));
    }
    out.extend((0..360).map(|k| -PI + TAU * k as f64 / 360.0));
    out
}

/// `G = log_α(T)` for a cut ray `α` from 0 through the unbounded component of
/// `ℂ∖σ(T_F)` that avoids the truncation eigenvalues.
pub fn build_dunford(trunc: &TruncatedToeplitz, decomp: &RegionDecomposition) -> Result<SemigroupFamily, SemigroupError> {
    let zero = C64::new(0.0, 0.0);
    match decomp.in_unbounded_complement(zero, ComplementMode::ComplementOfSpectrum) {
        Ok(true) => {}
        Ok(false) => {
            return Err(SemigroupError::Gate { reason: "0 is not in the unbounded component of the resolvent set".into() })
        }
        Err(e) => return Err(SemigroupError::Gate { reason: e.to_string() }),
    }
    let t = &trunc.matrix;
    let eig = linalg::eigenvalues(t);
    let norm = linalg::norm2(t).max(f64::MIN_POSITIVE);
    let clear = |alpha: f64| {
        eig.iter().all(|l| {
            // distance from λ to the ray e^{iα}ℝ₊
            let d = if angle_gap(l.arg(), alpha) >= PI / 2.0 {
                l.norm()
            } else {
                l.norm() * angle_gap(l.arg(), alpha).sin()
            };
            d > 1e-6 * norm
        })
    };
    let far = 4.0 * decomp.discretization().scale().max(norm) + 1.0;
    let index = decomp.index();
    let candidates = ray_candidates(&eig);
    let pick = candidates
        .iter()
        .copied()
        .find(|&a| clear(a) && !index.crosses(zero, C64::from_polar(far, a)))
        .or_else(|| candidates.iter().copied().find(|&a| clear(a)));
    let alpha = pick.ok_or(SemigroupError::NoAdmissibleRay { eigenvalues: eig.clone() })?;
    let g = spectral::matrix_log_off_ray(t, alpha)?;
    Ok(SemigroupFamily::new(FamilyVariant::GeneratorBased { generator: g, ray: Some(alpha) }))
}

/// `T_t = z^t(T)` for a sectorial truncation.
pub fn build_sectorial(t: &CMat) -> Result<SemigroupFamily, SemigroupError> {
    let angle = spectral::sectorial_angle(t)?;
    if angle.omega >= PI {
        return Err(SpectralError::NotSectorial { reason: "angle ω ≥ π".into() }.into());
    }
    let contour = spectral::default_contour(t, angle.omega);
    Ok(SemigroupFamily::new(FamilyVariant::SectorialCalculus { source: t.clone(), angle, contour }))
}

/// Times and test vectors used by [`verify`].
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Schedule {
    pub times: Vec<f64>,
    pub continuity_times: Vec<f64>,
    pub basis_vectors: usize,
    pub tol: f64,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            times: vec![0.25, 1.0 / 3.0, 0.5, 2.0 / 3.0, 1.0],
            continuity_times: vec![1e-1, 1e-2, 1e-3],
            basis_vectors: 8,
            tol: 1e-7,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct VerificationReport {
    pub dimension: usize,
    /// `‖T_1 − T‖/‖T‖`.
    pub embed_residual: f64,
    /// `max ‖T_s T_t − T_{s+t}‖/‖T_{s+t}‖` over the schedule.
    pub law_residual: f64,
    pub worst_pair: Option<(f64, f64)>,
    /// `(t, max_k ‖T_t e_k − e_k‖)`.
    pub continuity: Vec<(f64, f64)>,
    /// Continuity proxy non-increasing as `t` decreases.
    pub monotone_decay: bool,
    pub embed_flagged: bool,
    pub accepted: bool,
    pub tol: f64,
}

/// Residuals of `family` against `target`.
pub fn verify(family: &dyn OperatorFamily, target: &CMat, schedule: &Schedule) -> Result<VerificationReport, SemigroupError> {
    let mut all: Vec<f64> = schedule.times.clone();
    for &s in &schedule.times {
        for &t in &schedule.times {
            all.push(s + t);
        }
    }
    all.extend(&schedule.continuity_times);
    all.push(1.0);
    family.prefetch(&all)?;

    let t1 = family.at(1.0)?;
    let embed = linalg::rel_diff(&t1, target);

    let mut law: f64 = 0.0;
    let mut worst = None;
    for &s in &schedule.times {
        for &t in &schedule.times {
            let (a, b, c) = (family.at(s)?, family.at(t)?, family.at(s + t)?);
            let r = linalg::rel_diff(&(&*a * &*b), &c);
            if r > law || worst.is_none() {
                law = law.max(r);
                worst = Some((s, t));
            }
        }
    }

    let n = family.dim();
    let k = schedule.basis_vectors.min(n);
    let mut continuity = Vec::new();
    for &t in &schedule.continuity_times {
        let m = family.at(t)?;
        let mut c: f64 = 0.0;
        for j in 0..k {
            let col = m.column(j);
            let d: f64 = col.iter().enumerate().map(|(i, z)| (z - if i == j { 1.0 } else { 0.0 }).norm_sqr()).sum();
            c = c.max(d.sqrt());
        }
        continuity.push((t, c));
    }
    let mut sorted = continuity.clone();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let monotone = sorted.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-9) + 1e-14);
    let ten_x = sorted.windows(2).all(|w| w[1].1 <= 10.0 * w[0].1 + 1e-14);
    let tol = schedule.tol;
    Ok(VerificationReport {
        dimension: n,
        embed_residual: embed,
        law_residual: law,
        worst_pair: worst,
        continuity,
        monotone_decay: monotone,
        embed_flagged: embed > tol,
        accepted: embed <= tol && law <= tol && monotone && ten_x,
        tol,
    })
}
