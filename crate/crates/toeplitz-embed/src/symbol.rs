//! Circle functions `F` on 𝕋: evaluation, derivatives, curve discretization,
//! Toeplitz truncation and the smoothness/derivative hypothesis checks.
//!
//! Two representations are supported. A *Fourier* symbol stores finitely many
//! coefficients `c_k` and is evaluated exactly. A *sampled* symbol stores values
//! `F(e^{iθ_i})` on a strictly increasing parameter grid and is interpolated by
//! a periodic cubic spline (non-uniform knots allowed); its Fourier
//! coefficients are obtained by resampling the spline uniformly and running an
//! FFT.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve_topology::{IntersectionSet, RegionDecomposition, TopologyError};
use crate::{C64, TAU};

/// Maximum number of points a discretization may contain.
pub const MAX_DISCRETIZATION_POINTS: usize = 1 << 20;

/// Exponent margin used by the coefficient-decay proxy for `F ∈ C^{1+ε}`.
pub const DECAY_EPSILON: f64 = 0.51;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolError {
    #[error("symbol has no nonzero Fourier coefficient")]
    AllZero,
    #[error("sampled symbol needs at least 16 samples, got {0}")]
    TooFewSamples(usize),
    #[error("sample parameters must be strictly increasing in [0, 2π): {0}")]
    BadParameters(String),
    #[error("sample arrays have mismatched lengths")]
    LengthMismatch,
    #[error("non-finite value in symbol data")]
    NonFinite,
    #[error("discretization needs more than {MAX_DISCRETIZATION_POINTS} points")]
    RefinementOverflow,
    #[error("target step must be positive and finite")]
    BadStep,
    #[error("truncation order must be at least 1")]
    BadOrder,
    #[error("sampled symbol has {samples} samples, below 4 x max frequency {max_frequency}")]
    AliasWarning { samples: usize, max_frequency: usize },
    #[error("invalid symbol JSON: {0}")]
    Json(String),
}

/// Reduce an angle into `[0, 2π)`.
#[inline]
pub fn reduce_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone)]
enum Repr {
    Fourier { kmin: i64, coeffs: Vec<C64> },
    Sampled(Spline),
}

/// Periodic cubic spline through `(θ_i, y_i)` with period `2π`.
#[derive(Debug, Clone)]
struct Spline {
    theta: Vec<f64>,
    values: Vec<C64>,
    /// Second derivatives at the knots.
    m: Vec<C64>,
}

impl Spline {
    fn new(theta: Vec<f64>, values: Vec<C64>) -> Self {
        let n = theta.len();
        let h: Vec<f64> = (0..n)
            .map(|i| {
                if i + 1 < n {
                    theta[i + 1] - theta[i]
                } else {
                    theta[0] + TAU - theta[n - 1]
                }
            })
            .collect();
        // Cyclic tridiagonal system h_{i-1} M_{i-1} + 2(h_{i-1}+h_i) M_i + h_i M_{i+1} = r_i.
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            let hp = h[(i + n - 1) % n];
            let hi = h[i];
            sub[i] = hp;
            diag[i] = 2.0 * (hp + hi);
            sup[i] = hi;
            let yn = values[(i + 1) % n];
            let yp = values[(i + n - 1) % n];
            rhs[i] = ((yn - values[i]) / hi - (values[i] - yp) / hp) * 6.0;
        }
        let m = solve_cyclic_tridiagonal(&sub, &diag, &sup, &rhs);
        Spline { theta, values, m }
    }

    fn locate(&self, theta: f64) -> (usize, f64, f64) {
        let n = self.theta.len();
        let t0 = self.theta[0];
        let mut t = reduce_angle(theta);
        if t < t0 {
            t += TAU;
        }
        // Index of last knot <= t.
        let idx = match self.theta.partition_point(|&x| x <= t) {
            0 => n - 1,
            k => k - 1,
        };
        let start = self.theta[idx];
        let h = if idx + 1 < n {
            self.theta[idx + 1] - start
        } else {
            t0 + TAU - start
        };
        (idx, t - start, h)
    }

    fn eval(&self, theta: f64) -> C64 {
        let n = self.theta.len();
        let (i, dt, h) = self.locate(theta);
        let j = (i + 1) % n;
        let b = dt / h;
        let a = 1.0 - b;
        self.values[i] * a
            + self.values[j] * b
            + (self.m[i] * (a * a * a - a) + self.m[j] * (b * b * b - b)) * (h * h / 6.0)
    }

    fn deriv(&self, theta: f64) -> C64 {
        let n = self.theta.len();
        let (i, dt, h) = self.locate(theta);
        let j = (i + 1) % n;
        let b = dt / h;
        let a = 1.0 - b;
        (self.values[j] - self.values[i]) / h - self.m[i] * ((3.0 * a * a - 1.0) * h / 6.0)
            + self.m[j] * ((3.0 * b * b - 1.0) * h / 6.0)
    }
}

/// Solve a cyclic tridiagonal system with real coefficients and complex
/// right-hand side (Sherman–Morrison on top of the Thomas algorithm).
fn solve_cyclic_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[C64]) -> Vec<C64> {
    let n = diag.len();
    let alpha = sup[n - 1]; // bottom-left corner
    let beta = sub[0]; // top-right corner
    let gamma = -diag[0];
    let mut b = diag.to_vec();
    b[0] -= gamma;
    b[n - 1] -= alpha * beta / gamma;
    let x = thomas(sub, &b, sup, rhs);
    let mut u = vec![C64::new(0.0, 0.0); n];
    u[0] = C64::new(gamma, 0.0);
    u[n - 1] = C64::new(alpha, 0.0);
    let z = thomas(sub, &b, sup, &u);
    let fact = (x[0] + x[n - 1] * (beta / gamma)) / (C64::new(1.0, 0.0) + z[0] + z[n - 1] * (beta / gamma));
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}

fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[C64]) -> Vec<C64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![C64::new(0.0, 0.0); n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let den = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / den;
        d[i] = (rhs[i] - d[i - 1] * sub[i]) / den;
    }
    let mut x = vec![C64::new(0.0, 0.0); n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - x[i + 1] * c[i];
    }
    x
}

/// Discrete Fourier coefficients of a sampled symbol, indexed `k = -(M/2-1) ..= M/2-1`.
#[derive(Debug, Clone)]
struct SampledCoefficients {
    m: usize,
    /// Raw FFT output divided by `M`.
    bins: Vec<C64>,
}

impl SampledCoefficients {
    fn get(&self, k: i64) -> C64 {
        let half = (self.m / 2) as i64;
        if k.abs() >= half {
            return C64::new(0.0, 0.0);
        }
        self.bins[k.rem_euclid(self.m as i64) as usize]
    }
}

/// A symbol `F` on the unit circle.
#[derive(Debug, Clone)]
pub struct Symbol {
    name: Option<String>,
    repr: Repr,
    sampled_coeffs: Arc<OnceLock<SampledCoefficients>>,
}

/// Which representation a symbol uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolKind {
    Fourier,
    Sampled,
}

impl Symbol {
    /// Fourier symbol from `(k, c_k)` pairs. Repeated frequencies are summed.
    pub fn fourier(pairs: &[(i64, C64)]) -> Result<Self, SymbolError> {
        if pairs.is_empty() {
            return Err(SymbolError::AllZero);
        }
        if pairs.iter().any(|(_, c)| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(SymbolError::NonFinite);
        }
        let kmin = pairs.iter().map(|p| p.0).min().unwrap();
        let kmax = pairs.iter().map(|p| p.0).max().unwrap();
        let mut coeffs = vec![C64::new(0.0, 0.0); (kmax - kmin + 1) as usize];
        for &(k, c) in pairs {
            coeffs[(k - kmin) as usize] += c;
        }
        Self::from_coefficients(kmin, coeffs)
    }

    /// Fourier symbol with `c_{kmin + j} = coeffs[j]`.
    pub fn from_coefficients(kmin: i64, coeffs: Vec<C64>) -> Result<Self, SymbolError> {
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(SymbolError::NonFinite);
        }
        let first = coeffs.iter().position(|c| c.norm() > 0.0).ok_or(SymbolError::AllZero)?;
        let last = coeffs.iter().rposition(|c| c.norm() > 0.0).unwrap();
        Ok(Symbol {
            name: None,
            repr: Repr::Fourier { kmin: kmin + first as i64, coeffs: coeffs[first..=last].to_vec() },
            sampled_coeffs: Arc::new(OnceLock::new()),
        })
    }

    /// Sampled symbol from parameters in `[0, 2π)` and values `F(e^{iθ_i})`.
    pub fn sampled(theta: Vec<f64>, values: Vec<C64>) -> Result<Self, SymbolError> {
        if theta.len() != values.len() {
            return Err(SymbolError::LengthMismatch);
        }
        if theta.len() < 16 {
            return Err(SymbolError::TooFewSamples(theta.len()));
        }
        if theta.iter().any(|t| !t.is_finite()) || values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(SymbolError::NonFinite);
        }
        if theta[0] < 0.0 || *theta.last().unwrap() >= TAU {
            return Err(SymbolError::BadParameters("values outside [0, 2π)".into()));
        }
        if let Some(i) = theta.windows(2).position(|w| w[1] <= w[0]) {
            return Err(SymbolError::BadParameters(format!("not increasing at index {}", i + 1)));
        }
        Ok(Symbol {
            name: None,
            repr: Repr::Sampled(Spline::new(theta, values)),
            sampled_coeffs: Arc::new(OnceLock::new()),
        })
    }

    /// Sampled symbol from a closure evaluated at `n` uniform parameters.
    pub fn sampled_from_fn(n: usize, f: impl Fn(f64) -> C64) -> Result<Self, SymbolError> {
        let theta: Vec<f64> = (0..n).map(|i| TAU * i as f64 / n as f64).collect();
        let values = theta.iter().map(|&t| f(t)).collect();
        Self::sampled(theta, values)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn kind(&self) -> SymbolKind {
        match self.repr {
            Repr::Fourier { .. } => SymbolKind::Fourier,
            Repr::Sampled(_) => SymbolKind::Sampled,
        }
    }

    /// Number of samples of a sampled symbol.
    /// Sample parameters of a sampled symbol.
    pub fn sample_thetas(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Sampled(s) => Some(&s.theta),
            Repr::Fourier { .. } => None,
        }
    }

    pub fn sample_count(&self) -> Option<usize> {
        match &self.repr {
            Repr::Sampled(s) => Some(s.theta.len()),
            Repr::Fourier { .. } => None,
        }
    }

    /// Largest `|k|` with a stored coefficient (Fourier), or the Nyquist
    /// frequency of the sample grid (sampled).
    pub fn max_frequency(&self) -> usize {
        match &self.repr {
            Repr::Fourier { kmin, coeffs } => {
                let kmax = kmin + coeffs.len() as i64 - 1;
                kmin.unsigned_abs().max(kmax.unsigned_abs()) as usize
            }
            Repr::Sampled(s) => s.theta.len() / 2,
        }
    }

    /// `F(e^{iθ})`.
    pub fn evaluate(&self, theta: f64) -> C64 {
        let t = reduce_angle(theta);
        match &self.repr {
            Repr::Fourier { kmin, coeffs } => {
                let z = C64::from_polar(1.0, t);
                let mut acc = C64::new(0.0, 0.0);
                for c in coeffs.iter().rev() {
                    acc = acc * z + c;
                }
                acc * C64::from_polar(1.0, *kmin as f64 * t)
            }
            Repr::Sampled(s) => s.eval(t),
        }
    }

    /// `dF(e^{iθ})/dθ`.
    pub fn derivative(&self, theta: f64) -> C64 {
        let t = reduce_angle(theta);
        match &self.repr {
            Repr::Fourier { kmin, coeffs } => {
                let z = C64::from_polar(1.0, t);
                let mut acc = C64::new(0.0, 0.0);
                for (j, c) in coeffs.iter().enumerate().rev() {
                    acc = acc * z + c * (*kmin + j as i64) as f64;
                }
                acc * C64::from_polar(1.0, *kmin as f64 * t) * C64::i()
            }
            Repr::Sampled(s) => s.deriv(t),
        }
    }

    fn sampled_coefficients(&self) -> &SampledCoefficients {
        self.sampled_coeffs.get_or_init(|| {
            let n = self.sample_count().unwrap_or(0);
            let m = (4 * n).max(1024).next_power_of_two();
            let mut buf: Vec<C64> = (0..m).map(|i| self.evaluate(TAU * i as f64 / m as f64)).collect();
            FftPlanner::new().plan_fft_forward(m).process(&mut buf);
            let bins = buf.into_iter().map(|c| c / m as f64).collect();
            SampledCoefficients { m, bins }
        })
    }

    /// Fourier coefficient `c_k`.
    pub fn coefficient(&self, k: i64) -> C64 {
        match &self.repr {
            Repr::Fourier { kmin, coeffs } => {
                let j = k - kmin;
                if j < 0 || j as usize >= coeffs.len() {
                    C64::new(0.0, 0.0)
                } else {
                    coeffs[j as usize]
                }
            }
            Repr::Sampled(_) => self.sampled_coefficients().get(k),
        }
    }

    /// Stored coefficients `(kmin, [c_kmin, ..., c_kmax])` of a Fourier symbol.
    pub fn fourier_coefficients(&self) -> Option<(i64, &[C64])> {
        match &self.repr {
            Repr::Fourier { kmin, coeffs } => Some((*kmin, coeffs)),
            Repr::Sampled(_) => None,
        }
    }

    /// `c_k = 0` for all `k < 0` (up to `1e-13 · max|c_k|` for sampled symbols).
    pub fn is_analytic(&self) -> bool {
        match &self.repr {
            Repr::Fourier { kmin, .. } => *kmin >= 0,
            Repr::Sampled(_) => {
                let sc = self.sampled_coefficients();
                let max = sc.bins.iter().map(|c| c.norm()).fold(0.0, f64::max);
                let half = (sc.m / 2) as i64;
                (1..half).all(|k| sc.get(-k).norm() <= 1e-13 * max)
            }
        }
    }

    /// The reflected symbol `f(z) = F(1/z)`, whose Toeplitz matrix is the
    /// transpose of that of `F`.
    pub fn reflect(&self) -> Symbol {
        let repr = match &self.repr {
            Repr::Fourier { kmin, coeffs } => {
                let kmax = kmin + coeffs.len() as i64 - 1;
                Repr::Fourier { kmin: -kmax, coeffs: coeffs.iter().rev().copied().collect() }
            }
            Repr::Sampled(s) => {
                let mut pairs: Vec<(f64, C64)> =
                    s.theta.iter().zip(&s.values).map(|(&t, &v)| (reduce_angle(TAU - t), v)).collect();
                pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                let (theta, values) = pairs.into_iter().unzip();
                Repr::Sampled(Spline::new(theta, values))
            }
        };
        Symbol {
            name: self.name.as_ref().map(|n| format!("reflect({n})")),
            repr,
            sampled_coeffs: Arc::new(OnceLock::new()),
        }
    }

    /// `F + a` for a constant `a`.
    pub fn shifted(&self, a: C64) -> Symbol {
        let repr = match &self.repr {
            Repr::Fourier { kmin, coeffs } => {
                let kmin2 = (*kmin).min(0);
                let kmax2 = (kmin + coeffs.len() as i64 - 1).max(0);
                let mut c = vec![C64::new(0.0, 0.0); (kmax2 - kmin2 + 1) as usize];
                for (j, v) in coeffs.iter().enumerate() {
                    c[(kmin + j as i64 - kmin2) as usize] += v;
                }
                c[(-kmin2) as usize] += a;
                Repr::Fourier { kmin: kmin2, coeffs: c }
            }
            Repr::Sampled(s) => Repr::Sampled(Spline::new(s.theta.clone(), s.values.iter().map(|v| v + a).collect())),
        };
        Symbol { name: self.name.clone(), repr, sampled_coeffs: Arc::new(OnceLock::new()) }
    }

    /// Pointwise product of two Fourier symbols (coefficient convolution).
    pub fn product(&self, other: &Symbol) -> Option<Symbol> {
        let (ka, ca) = self.fourier_coefficients()?;
        let (kb, cb) = other.fourier_coefficients()?;
        let mut c = vec![C64::new(0.0, 0.0); ca.len() + cb.len() - 1];
        for (i, x) in ca.iter().enumerate() {
            for (j, y) in cb.iter().enumerate() {
                c[i + j] += x * y;
            }
        }
        Symbol::from_coefficients(ka + kb, c).ok()
    }

    /// Bounding-box diameter of the curve estimated from 1024 uniform samples.
    pub fn curve_diameter(&self) -> f64 {
        let pts: Vec<C64> = (0..1024).map(|i| self.evaluate(TAU * i as f64 / 1024.0)).collect();
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in &pts {
            x0 = x0.min(p.re);
            x1 = x1.max(p.re);
            y0 = y0.min(p.im);
            y1 = y1.max(p.im);
        }
        ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt()
    }

    /// Default discretization step: curve diameter / 512.
    pub fn default_step(&self) -> f64 {
        let d = self.curve_diameter();
        if d > 0.0 {
            d / 512.0
        } else {
            1.0
        }
    }

    /// Adaptive polyline approximation of `F(𝕋)`.
    pub fn discretize(&self, target_step: f64) -> Result<CurveDiscretization, SymbolError> {
        if !(target_step > 0.0 && target_step.is_finite()) {
            return Err(SymbolError::BadStep);
        }
        let init: Vec<f64> = match &self.repr {
            Repr::Fourier { .. } => {
                let n = 16.max(8 * self.max_frequency());
                (0..n).map(|i| TAU * i as f64 / n as f64).collect()
            }
            Repr::Sampled(s) => s.theta.clone(),
        };
        let pts: Vec<C64> = init.iter().map(|&t| self.evaluate(t)).collect();
        let scale = pts.iter().map(|p| p.norm()).fold(1.0, f64::max);
        let spread = pts.iter().map(|p| (p - pts[0]).norm()).fold(0.0, f64::max);
        if spread <= 1e-13 * scale {
            let theta: Vec<f64> = (0..16).map(|i| TAU * i as f64 / 16.0).collect();
            let points = theta.iter().map(|&t| self.evaluate(t)).collect();
            let tangents = theta.iter().map(|&t| self.derivative(t)).collect();
            return Ok(CurveDiscretization {
                theta,
                points,
                tangents,
                refined: vec![false; 16],
                step: target_step,
                degenerate: true,
            });
        }

        let mut theta = Vec::with_capacity(init.len() * 2);
        let mut bisected = Vec::with_capacity(init.len() * 2);
        let n0 = init.len();
        for i in 0..n0 {
            let a = init[i];
            let b = if i + 1 < n0 { init[i + 1] } else { init[0] + TAU };
            self.refine_segment(a, b, target_step, 0, &mut theta, &mut bisected)?;
        }
        let points: Vec<C64> = theta.iter().map(|&t| self.evaluate(t)).collect();
        let tangents: Vec<C64> = theta.iter().map(|&t| self.derivative(t)).collect();
        let n = theta.len();
        let mut plen: Vec<f64> = (0..n)
            .map(|i| if i + 1 < n { theta[i + 1] - theta[i] } else { theta[0] + TAU - theta[i] })
            .collect();
        let lens = plen.clone();
        plen.sort_by(f64::total_cmp);
        let median = plen[n / 2];
        let refined = (0..n).map(|i| bisected[i] || lens[i] < median / 8.0).collect();
        Ok(CurveDiscretization { theta, points, tangents, refined, step: target_step, degenerate: false })
    }

    fn refine_segment(
        &self,
        a: f64,
        b: f64,
        step: f64,
        depth: usize,
        theta: &mut Vec<f64>,
        bisected: &mut Vec<bool>,
    ) -> Result<(), SymbolError> {
        if theta.len() >= MAX_DISCRETIZATION_POINTS {
            return Err(SymbolError::RefinementOverflow);
        }
        let pa = self.evaluate(a);
        let pb = self.evaluate(b);
        let da = self.derivative(a);
        let db = self.derivative(b);
        let chord_ok = (pb - pa).norm() <= step;
        let turn_ok = if da.norm() == 0.0 || db.norm() == 0.0 { true } else { (db / da).arg().abs() <= PI / 8.0 };
        if (chord_ok && turn_ok) || b - a < 1e-11 {
            theta.push(reduce_angle(a));
            bisected.push(depth > 0);
            return Ok(());
        }
        let mid = 0.5 * (a + b);
        self.refine_segment(a, mid, step, depth + 1, theta, bisected)?;
        self.refine_segment(mid, b, step, depth + 1, theta, bisected)
    }

    /// Dense `n × n` Toeplitz matrix `(c_{j−k})`.
    pub fn toeplitz_truncation(&self, n: usize) -> Result<TruncatedToeplitz, SymbolError> {
        if n == 0 {
            return Err(SymbolError::BadOrder);
        }
        if let Some(samples) = self.sample_count() {
            if samples < 4 * (n - 1) {
                return Err(SymbolError::AliasWarning { samples, max_frequency: n - 1 });
            }
        }
        let diag: Vec<C64> = (-(n as i64 - 1)..=(n as i64 - 1)).map(|k| self.coefficient(k)).collect();
        let off = n as i64 - 1;
        let matrix = DMatrix::from_fn(n, n, |j, k| diag[(j as i64 - k as i64 + off) as usize]);
        Ok(TruncatedToeplitz { n, matrix, symbol: self.clone() })
    }

    /// Estimated algebraic decay exponent `β` with `|c_k| ≈ |k|^{−β}`, from dyadic
    /// block maxima of the coefficients. `None` means no measurable decay tail
    /// (coefficients vanish below the noise floor, i.e. effectively smooth).
    pub fn decay_exponent(&self) -> Option<f64> {
        let (get, limit): (Box<dyn Fn(i64) -> C64 + '_>, usize) = match &self.repr {
            Repr::Fourier { .. } => return None,
            Repr::Sampled(s) => (Box::new(|k| self.coefficient(k)), s.theta.len() / 4),
        };
        let max = (0..limit as i64).map(|k| get(k).norm().max(get(-k).norm())).fold(0.0, f64::max);
        let floor = 1e-12 * max;
        let mut pts = Vec::new();
        let mut j = 2;
        while (1usize << (j + 1)) <= limit {
            let lo = 1i64 << j;
            let hi = 1i64 << (j + 1);
            let m = (lo..hi).map(|k| get(k).norm().max(get(-k).norm())).fold(0.0, f64::max);
            if m > floor {
                pts.push((j as f64, m.log2()));
            }
            j += 1;
        }
        if pts.len() < 3 {
            return None;
        }
        let tail = &pts[pts.len() / 2..];
        let tail = if tail.len() < 3 { &pts[pts.len() - 3..] } else { tail };
        let n = tail.len() as f64;
        let mx = tail.iter().map(|p| p.0).sum::<f64>() / n;
        let my = tail.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = tail.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = tail.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Some(-sxy / sxx)
    }

    /// Parse the JSON symbol schema.
    pub fn from_json(text: &str) -> Result<Symbol, SymbolError> {
        let spec: SymbolSpec = serde_json::from_str(text).map_err(|e| SymbolError::Json(e.to_string()))?;
        spec.build()
    }

    /// Serializable description of this symbol.
    pub fn to_spec(&self) -> SymbolSpec {
        match &self.repr {
            Repr::Fourier { kmin, coeffs } => SymbolSpec::Fourier {
                coeffs: coeffs
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.norm() > 0.0)
                    .map(|(j, c)| CoeffEntry { k: kmin + j as i64, re: c.re, im: c.im })
                    .collect(),
                name: self.name.clone(),
            },
            Repr::Sampled(s) => SymbolSpec::Sampled {
                theta: s.theta.clone(),
                re: s.values.iter().map(|v| v.re).collect(),
                im: s.values.iter().map(|v| v.im).collect(),
                name: self.name.clone(),
            },
        }
    }
}

/// One Fourier coefficient in the JSON schema.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CoeffEntry {
    pub k: i64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// JSON symbol schema.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SymbolSpec {
    Fourier {
        coeffs: Vec<CoeffEntry>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
    Sampled {
        theta: Vec<f64>,
        re: Vec<f64>,
        im: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
}

impl SymbolSpec {
    pub fn build(&self) -> Result<Symbol, SymbolError> {
        match self {
            SymbolSpec::Fourier { coeffs, name } => {
                let pairs: Vec<(i64, C64)> = coeffs.iter().map(|c| (c.k, C64::new(c.re, c.im))).collect();
                let s = Symbol::fourier(&pairs)?;
                Ok(match name {
                    Some(n) => s.with_name(n.clone()),
                    None => s,
                })
            }
            SymbolSpec::Sampled { theta, re, im, name } => {
                if re.len() != im.len() {
                    return Err(SymbolError::LengthMismatch);
                }
                let values = re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)).collect();
                let s = Symbol::sampled(theta.clone(), values)?;
                Ok(match name {
                    Some(n) => s.with_name(n.clone()),
                    None => s,
                })
            }
        }
    }
}

/// Polyline approximation of the closed curve `F(𝕋)`.
#[derive(Debug, Clone)]
pub struct CurveDiscretization {
    pub theta: Vec<f64>,
    pub points: Vec<C64>,
    pub tangents: Vec<C64>,
    /// Per segment `(p_i, p_{i+1})`: produced by bisection or much shorter in
    /// parameter than the median segment.
    pub refined: Vec<bool>,
    pub step: f64,
    /// Constant symbol: all points coincide.
    pub degenerate: bool,
}

impl CurveDiscretization {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Segment `i` as `(p_i, p_{i+1})`, wrapping at the end.
    #[inline]
    pub fn segment(&self, i: usize) -> (C64, C64) {
        let n = self.points.len();
        (self.points[i], self.points[(i + 1) % n])
    }

    /// Parameter interval of segment `i` (end may exceed `2π`).
    pub fn segment_params(&self, i: usize) -> (f64, f64) {
        let n = self.theta.len();
        let a = self.theta[i];
        let b = if i + 1 < n { self.theta[i + 1] } else { self.theta[0] + TAU };
        (a, b)
    }

    /// `(xmin, xmax, ymin, ymax)` of the points.
    pub fn bbox(&self) -> (f64, f64, f64, f64) {
        let mut b = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in &self.points {
            b.0 = b.0.min(p.re);
            b.1 = b.1.max(p.re);
            b.2 = b.2.min(p.im);
            b.3 = b.3.max(p.im);
        }
        b
    }

    /// Diagonal length of the bounding box (at least `f64::MIN_POSITIVE`).
    pub fn scale(&self) -> f64 {
        let b = self.bbox();
        ((b.1 - b.0).hypot(b.3 - b.2)).max(f64::MIN_POSITIVE)
    }

    /// Upper bound on the distance between segment `i` and the true arc it
    /// replaces (chord sagitta from the tangent turning angle).
    pub fn sag(&self, i: usize) -> f64 {
        let n = self.points.len();
        let (a, b) = self.segment(i);
        let da = self.tangents[i];
        let db = self.tangents[(i + 1) % n];
        let turn = if da.norm() == 0.0 || db.norm() == 0.0 { PI / 8.0 } else { (db / da).arg().abs() };
        (b - a).norm() * turn.max(1e-3) / 4.0
    }
}

/// Dense truncation `T^{(n)} = (c_{j−k})_{0≤j,k<n}`.
#[derive(Debug, Clone)]
pub struct TruncatedToeplitz {
    pub n: usize,
    pub matrix: DMatrix<C64>,
    pub symbol: Symbol,
}

/// Numerical checks of the standing hypotheses on `F`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct HypothesisReport {
    /// Smoothness proxy and nonvanishing derivative.
    pub h1: bool,
    /// Confidence in `h1` (1 for finite Fourier symbols).
    pub h1_confidence: f64,
    /// Finitely many self-intersections, no overlapping arcs.
    pub h2: bool,
    /// All winding numbers are `≤ 0`.
    pub h3: bool,
    /// All winding numbers share one sign.
    pub h3bis: bool,
    pub min_abs_derivative: f64,
    pub max_abs_derivative: f64,
    pub deriv_tol: f64,
    /// Estimated `β` in `|c_k| ≈ |k|^{−β}`; `None` when no tail is measurable.
    pub decay_exponent: Option<f64>,
    /// `β > 2 + ε₀`, i.e. `Σ|k|^{1+ε₀}|c_k|` finite at the measured rate.
    pub decay_ok: bool,
    pub intersection_count: usize,
    /// Sorted distinct winding numbers of the bounded components.
    pub winding_signs: Vec<i64>,
}

/// Hypothesis report using already computed topology.
pub fn check_hypotheses_with(
    symbol: &Symbol,
    disc: &CurveDiscretization,
    intersections: Option<&IntersectionSet>,
    decomposition: Option<&RegionDecomposition>,
) -> HypothesisReport {
    let dmin = disc.tangents.iter().map(|d| d.norm()).fold(f64::MAX, f64::min);
    let dmax = disc.tangents.iter().map(|d| d.norm()).fold(0.0, f64::max);
    let deriv_tol = 1e-6 * dmax;
    let beta = symbol.decay_exponent();
    let decay_ok = match beta {
        None => true,
        Some(b) => b > 2.0 + DECAY_EPSILON,
    };
    let deriv_ok = !disc.degenerate && dmin > deriv_tol;
    let h1 = deriv_ok && decay_ok;
    let h1_confidence = match (symbol.kind(), beta) {
        (SymbolKind::Fourier, _) | (_, None) => 1.0,
        (_, Some(b)) => ((b - 2.0 - DECAY_EPSILON).abs() / 0.5).min(1.0),
    };
    let (h2, count) = match intersections {
        Some(set) => (!set.overlap && set.points.len() < 10_000, set.points.len()),
        None => (false, 0),
    };
    let mut windings: Vec<i64> = decomposition
        .map(|d| d.components.iter().filter(|c| !c.unbounded).map(|c| c.winding).collect())
        .unwrap_or_default();
    windings.sort_unstable();
    windings.dedup();
    let h3 = decomposition.is_some() && windings.iter().all(|&w| w <= 0);
    let h3bis = h3 || (decomposition.is_some() && windings.iter().all(|&w| w >= 0));
    HypothesisReport {
        h1,
        h1_confidence,
        h2,
        h3,
        h3bis,
        min_abs_derivative: dmin,
        max_abs_derivative: dmax,
        deriv_tol,
        decay_exponent: beta,
        decay_ok,
        intersection_count: count,
        winding_signs: windings,
    }
}

/// Hypothesis report, computing intersections and the region decomposition
/// at default settings.
pub fn check_hypotheses(symbol: &Symbol, disc: &CurveDiscretization) -> HypothesisReport {
    let inter = crate::curve_topology::self_intersections(disc);
    let decomp: Result<RegionDecomposition, TopologyError> =
        crate::curve_topology::region_decomposition(disc, &Default::default());
    check_hypotheses_with(symbol, disc, inter.as_ref().ok(), decomp.as_ref().ok())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use approx::assert_abs_diff_eq;

    fn z() -> Symbol {
        Symbol::fourier(&[(1, c64(1.0, 0.0))]).unwrap()
    }

    #[test]
    fn evaluate_monomials() {
        assert_abs_diff_eq!((z().evaluate(PI / 2.0) - c64(0.0, 1.0)).norm(), 0.0, epsilon = 1e-15);
        let rz = Symbol::fourier(&[(-1, c64(1.0, 0.0))]).unwrap();
        assert_abs_diff_eq!((rz.evaluate(PI) - c64(-1.0, 0.0)).norm(), 0.0, epsilon = 1e-15);
        let zp2 = Symbol::fourier(&[(0, c64(2.0, 0.0)), (1, c64(1.0, 0.0))]).unwrap();
        assert_abs_diff_eq!((zp2.evaluate(0.0) - c64(3.0, 0.0)).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn derivative_examples() {
        assert_abs_diff_eq!((z().derivative(0.0) - c64(0.0, 1.0)).norm(), 0.0, epsilon = 1e-15);
        let z2 = Symbol::fourier(&[(2, c64(1.0, 0.0))]).unwrap();
        assert_abs_diff_eq!((z2.derivative(PI / 2.0) - c64(0.0, -2.0)).norm(), 0.0, epsilon = 1e-14);
        let zp2 = Symbol::fourier(&[(0, c64(2.0, 0.0)), (1, c64(1.0, 0.0))]).unwrap();
        for k in 0..10 {
            let t = 0.7 * k as f64;
            let expect = c64(0.0, 1.0) * C64::from_polar(1.0, t);
            assert_abs_diff_eq!((zp2.derivative(t) - expect).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn spline_reproduces_samples_and_trig() {
        let s = Symbol::sampled_from_fn(64, |t| C64::from_polar(1.0, t) + c64(0.5, 0.0)).unwrap();
        for i in 0..64 {
            let t = TAU * i as f64 / 64.0;
            assert_abs_diff_eq!((s.evaluate(t) - (C64::from_polar(1.0, t) + 0.5)).norm(), 0.0, epsilon = 1e-13);
        }
        let t = 0.123;
        assert!((s.evaluate(t) - (C64::from_polar(1.0, t) + 0.5)).norm() < 1e-6);
        assert!((s.derivative(t) - c64(0.0, 1.0) * C64::from_polar(1.0, t)).norm() < 1e-4);
        assert!((s.coefficient(1) - c64(1.0, 0.0)).norm() < 1e-6);
        assert!((s.coefficient(0) - c64(0.5, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn discretize_circle_and_constant() {
        let d = z().discretize(0.1).unwrap();
        assert!(d.len() >= 63);
        for i in 0..d.len() {
            let (a, b) = d.segment(i);
            assert!((b - a).norm() <= 0.1 + 1e-12);
        }
        let c = Symbol::fourier(&[(0, c64(2.0, 0.0))]).unwrap();
        let dc = c.discretize(0.1).unwrap();
        assert!(dc.degenerate);
        assert_eq!(dc.len(), 16);
    }

    #[test]
    fn truncation_examples() {
        let t = z().toeplitz_truncation(3).unwrap().matrix;
        let expect = DMatrix::from_row_slice(3, 3, &[0., 0., 0., 1., 0., 0., 0., 1., 0.]).map(|x| c64(x, 0.0));
        assert_eq!(t, expect);
        let rz = Symbol::fourier(&[(-1, c64(1.0, 0.0))]).unwrap();
        assert_eq!(rz.toeplitz_truncation(3).unwrap().matrix, expect.transpose());
        let zp2 = Symbol::fourier(&[(0, c64(2.0, 0.0)), (1, c64(1.0, 0.0))]).unwrap();
        let m = zp2.toeplitz_truncation(2).unwrap().matrix;
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[2., 0., 1., 2.]).map(|x| c64(x, 0.0)));
    }

    #[test]
    fn alias_guard() {
        let s = Symbol::sampled_from_fn(32, |t| C64::from_polar(1.0, t)).unwrap();
        assert!(s.toeplitz_truncation(9).is_ok());
        assert!(matches!(s.toeplitz_truncation(10), Err(SymbolError::AliasWarning { .. })));
    }

    #[test]
    fn json_roundtrip() {
        let s = Symbol::from_json(r#"{"type":"fourier","coeffs":[{"k":-1,"re":1.0,"im":0.0},{"k":2,"re":0.5,"im":-1}]}"#)
            .unwrap();
        assert_eq!(s.coefficient(-1), c64(1.0, 0.0));
        assert_eq!(s.coefficient(2), c64(0.5, -1.0));
        let text = serde_json::to_string(&s.to_spec()).unwrap();
        let back = Symbol::from_json(&text).unwrap();
        assert_eq!(back.to_spec(), s.to_spec());
        assert!(Symbol::from_json(r#"{"type":"sampled","theta":[0.0],"re":[1.0],"im":[0.0]}"#).is_err());
    }

    #[test]
    fn reflect_transposes_truncation() {
        let s = Symbol::fourier(&[(-2, c64(0.3, 0.1)), (0, c64(1.0, 0.0)), (1, c64(0.2, -0.4))]).unwrap();
        let a = s.toeplitz_truncation(5).unwrap().matrix;
        let b = s.reflect().toeplitz_truncation(5).unwrap().matrix;
        assert_eq!(a.transpose(), b);
    }

    #[test]
    fn rough_sample_decay_is_slow() {
        let s = crate::fixtures::cube_root_symbol(4096);
        let beta = s.decay_exponent().unwrap();
        assert!(beta < 2.0, "beta = {beta}");
        let smooth = Symbol::sampled_from_fn(1024, |t| C64::from_polar(1.0, -t) * 2.0 + C64::from_polar(0.3, 2.0 * t))
            .unwrap();
        assert!(smooth.decay_exponent().map_or(true, |b| b > 3.0));
    }
}
