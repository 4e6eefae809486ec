//! Hardy-space side: FFT Riesz projection, continuous logarithms on the
//! circle and the kernel eigenvectors `h_{λ,j} = z^j F_λ⁺(0)/F_λ⁺`.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve_topology::{winding_number, TopologyError};
use crate::symbol::{CurveDiscretization, Symbol, SymbolError};
use crate::{C64, TAU};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HardyError {
    #[error("continuous argument of φ_λ does not close up (variation {variation})")]
    BranchMismatch { variation: f64 },
    #[error("winding {winding} at λ is positive; use the reflected symbol")]
    PositiveWinding { winding: i64 },
    #[error("index j = {j} needs |w| > j but w = {winding}")]
    IndexOutOfRange { j: usize, winding: i64 },
    #[error("truncation order {0} outside [1, 4096]")]
    BadOrder(usize),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
}

/// Uniform samples `f(2πk/M)`, `M = 2^m`, of a function on 𝕋.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleFunction {
    samples: Vec<C64>,
}

impl CircleFunction {
    pub fn from_fn(m: u32, f: impl Fn(f64) -> C64 + Sync) -> Self {
        let len = 1usize << m;
        let samples = (0..len).into_par_iter().map(|k| f(TAU * k as f64 / len as f64)).collect();
        CircleFunction { samples }
    }

    /// Samples must have power-of-two length.
    pub fn from_samples(samples: Vec<C64>) -> Self {
        assert!(samples.len().is_power_of_two(), "sample count must be a power of two");
        CircleFunction { samples }
    }

    /// From Fourier coefficients in FFT order (index `k` holds frequency `k`
    /// for `k < M/2` and `k − M` above).
    pub fn from_coefficients(coeffs: Vec<C64>) -> Self {
        let mut buf = coeffs;
        let len = buf.len();
        assert!(len.is_power_of_two());
        FftPlanner::new().plan_fft_inverse(len).process(&mut buf);
        CircleFunction { samples: buf }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    /// Discrete Fourier coefficients in FFT order.
    pub fn coefficients(&self) -> Vec<C64> {
        let mut buf = self.samples.clone();
        let len = buf.len();
        FftPlanner::new().plan_fft_forward(len).process(&mut buf);
        let s = 1.0 / len as f64;
        buf.iter_mut().for_each(|c| *c *= s);
        buf
    }

    /// Coefficient of frequency `k` (`|k| < M/2`).
    pub fn coefficient(&self, k: i64) -> C64 {
        let len = self.len() as i64;
        self.coefficients()[k.rem_euclid(len) as usize]
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        CircleFunction { samples: self.samples.iter().map(|&z| f(z)).collect() }
    }

    pub fn mul(&self, other: &CircleFunction) -> Self {
        assert_eq!(self.len(), other.len());
        CircleFunction { samples: self.samples.iter().zip(&other.samples).map(|(a, b)| a * b).collect() }
    }

    pub fn exp(&self) -> Self {
        self.map(|z| z.exp())
    }

    /// Largest sample difference.
    pub fn max_diff(&self, other: &CircleFunction) -> f64 {
        self.samples.iter().zip(&other.samples).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// Keep frequencies `0 ≤ k < M/2`; negative frequencies and the Nyquist bin
/// are dropped.
pub fn riesz_project(f: &CircleFunction) -> CircleFunction {
    let mut c = f.coefficients();
    let half = c.len() / 2;
    for z in c.iter_mut().skip(half) {
        *z = C64::new(0.0, 0.0);
    }
    CircleFunction::from_coefficients(c)
}

/// Sample exponent `m = max(10, ⌈log₂(64K)⌉, ⌈log₂(4n)⌉)`.
pub fn sample_exponent(symbol: &Symbol, n: usize) -> u32 {
    let k = symbol.max_frequency().max(1) as f64;
    let a = (64.0 * k).log2().ceil() as u32;
    let b = (4.0 * n.max(1) as f64).log2().ceil() as u32;
    10.max(a).max(b).min(24)
}

/// `log φ_λ` with `φ_λ(τ) = τ^{−w}(F(τ) − λ)`, continuously unwrapped.
pub fn log_phi_lambda(symbol: &Symbol, lambda: C64, w: i64, m: u32) -> Result<CircleFunction, HardyError> {
    let phi = |t: f64| C64::from_polar(1.0, -(w as f64) * t) * (symbol.evaluate(t) - lambda);
    let len = 1usize << m;
    let vals: Vec<C64> = (0..len).into_par_iter().map(|k| phi(TAU * k as f64 / len as f64)).collect();
    let steps: Vec<f64> = (0..len)
        .into_par_iter()
        .map(|k| {
            let t0 = TAU * k as f64 / len as f64;
            let t1 = TAU * (k + 1) as f64 / len as f64;
            arg_step(&phi, t0, vals[k], t1, vals[(k + 1) % len], 0)
        })
        .collect();
    let variation: f64 = steps.iter().sum();
    if variation.abs() > 1e-6 {
        return Err(HardyError::BranchMismatch { variation });
    }
    let mut arg = vals[0].arg();
    let mut out = Vec::with_capacity(len);
    for k in 0..len {
        out.push(C64::new(vals[k].norm().ln(), arg));
        arg += steps[k];
    }
    Ok(CircleFunction { samples: out })
}

fn arg_step(phi: &impl Fn(f64) -> C64, t0: f64, f0: C64, t1: f64, f1: C64, depth: u32) -> f64 {
    let jump = (f1 / f0).arg();
    if jump.abs() < PI / 2.0 || depth >= 12 {
        return jump;
    }
    let tm = 0.5 * (t0 + t1);
    let fm = phi(tm);
    arg_step(phi, t0, f0, tm, fm, depth + 1) + arg_step(phi, tm, fm, t1, f1, depth + 1)
}

/// Samples of `F_λ⁺ = exp(P₊ log φ_λ)`.
pub fn outer_factor(symbol: &Symbol, lambda: C64, w: i64, m: u32) -> Result<CircleFunction, HardyError> {
    Ok(riesz_project(&log_phi_lambda(symbol, lambda, w, m)?).exp())
}

/// A kernel eigenvector of `T_F − λ`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Eigenvector {
    pub lambda: C64,
    pub j: usize,
    pub winding: i64,
    pub n: usize,
    /// Taylor coefficients `h_0, …, h_{n−1}`.
    pub coefficients: Vec<C64>,
    /// `‖(T^{(n)} − λ)h‖₂ / ‖h‖₂` on the truncated vector.
    pub residual: f64,
    /// First `n` rows of `(T_F − λ)` applied to `2n` coefficients of `h`, so
    /// the cut-off of the operator is not counted.
    pub row_residual: f64,
    /// `‖(h_n, …, h_{2n−1})‖ / ‖(h_0, …, h_{n−1})‖`.
    pub tail_mass: f64,
    pub sample_exponent: u32,
}

/// Eigenvector `h_{λ,j}` with the winding computed from the curve.
pub fn eigenvector(
    symbol: &Symbol,
    disc: &CurveDiscretization,
    lambda: C64,
    j: usize,
    n: usize,
) -> Result<Eigenvector, HardyError> {
    let w = winding_number(disc, lambda)?;
    eigenvector_with_winding(symbol, lambda, w, j, n)
}

/// Eigenvector `h_{λ,j}` given the winding number at `λ`.
pub fn eigenvector_with_winding(
    symbol: &Symbol,
    lambda: C64,
    w: i64,
    j: usize,
    n: usize,
) -> Result<Eigenvector, HardyError> {
    if n == 0 || n > 4096 {
        return Err(HardyError::BadOrder(n));
    }
    if w > 0 {
        return Err(HardyError::PositiveWinding { winding: w });
    }
    if (j as i64) >= -w {
        return Err(HardyError::IndexOutOfRange { j, winding: w });
    }
    let m = sample_exponent(symbol, 2 * n);
    let g = riesz_project(&log_phi_lambda(symbol, lambda, w, m)?).coefficients();
    // h₀ = exp(−(g − g₀)) as a power series: k u_k = Σ m (−g_m) u_{k−m}.
    let len = 2 * n;
    let mut u = vec![C64::new(0.0, 0.0); len];
    u[0] = C64::new(1.0, 0.0);
    for k in 1..len {
        let mut s = C64::new(0.0, 0.0);
        for mm in 1..=k {
            s -= g[mm] * (mm as f64) * u[k - mm];
        }
        u[k] = s / k as f64;
    }
    let mut h = vec![C64::new(0.0, 0.0); len];
    h[j..len].copy_from_slice(&u[..(len - j)]);
    let head = &h[..n];
    let norm = |v: &[C64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let hn = norm(head);
    let tail_mass = norm(&h[n..]) / hn;

    let coeffs = symbol.fourier_coefficients().map(|(kmin, c)| (kmin, c.to_vec()));
    let (kmin, c) = match coeffs {
        Some(x) => x,
        None => {
            let t = symbol.toeplitz_truncation(n)?;
            // Recover c_k from the first row and column of the truncation.
            let mut c = vec![C64::new(0.0, 0.0); 2 * n - 1];
            for i in 0..n {
                c[n - 1 + i] = t.matrix[(i, 0)];
                c[n - 1 - i] = t.matrix[(0, i)];
            }
            (-(n as i64 - 1), c)
        }
    };
    let kmax = kmin + c.len() as i64 - 1;
    let coef = |k: i64| if k < kmin || k > kmax { C64::new(0.0, 0.0) } else { c[(k - kmin) as usize] };
    // First n rows of (T − λ) applied to the truncated and to the extended vector.
    let mut r_trunc = 0.0;
    let mut r_rows = 0.0;
    for i in 0..n {
        let lo = (i as i64 - kmax).max(0);
        let row = |upto: i64| {
            let mut s = -lambda * h[i];
            for k in lo..=(i as i64 - kmin).min(upto) {
                s += coef(i as i64 - k) * h[k as usize];
            }
            s
        };
        r_trunc += row(n as i64 - 1).norm_sqr();
        r_rows += row(len as i64 - 1).norm_sqr();
    }
    Ok(Eigenvector {
        lambda,
        j,
        winding: w,
        n,
        coefficients: head.to_vec(),
        residual: r_trunc.sqrt() / hn,
        row_residual: r_rows.sqrt() / hn,
        tail_mass,
        sample_exponent: m,
    })
}

/// Eigenvectors for a batch of points, in parallel.
pub fn eigenvectors_batch(
    symbol: &Symbol,
    disc: &CurveDiscretization,
    lambdas: &[C64],
    j: usize,
    n: usize,
) -> Vec<Result<Eigenvector, HardyError>> {
    lambdas.par_iter().map(|&l| eigenvector(symbol, disc, l, j, n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{c64, fixtures};

    #[test]
    fn riesz_examples() {
        let z3 = CircleFunction::from_fn(10, |t| C64::from_polar(1.0, 3.0 * t));
        assert!(riesz_project(&z3).max_diff(&z3) < 1e-12);
        let zbar = CircleFunction::from_fn(10, |t| C64::from_polar(1.0, -t));
        assert!(riesz_project(&zbar).samples().iter().all(|z| z.norm() < 1e-12));
        let cos2 = CircleFunction::from_fn(10, |t| c64(2.0 * t.cos(), 0.0));
        let z = CircleFunction::from_fn(10, |t| C64::from_polar(1.0, t));
        assert!(riesz_project(&cos2).max_diff(&z) < 1e-12);
    }

    #[test]
    fn transform_round_trip() {
        let f = CircleFunction::from_fn(10, |t| c64(t.sin().exp(), (2.0 * t).cos()));
        let g = CircleFunction::from_coefficients(f.coefficients());
        assert!(f.max_diff(&g) < 1e-12);
    }

    #[test]
    fn log_phi_examples() {
        let recip = fixtures::recip_z();
        let l = log_phi_lambda(&recip, c64(0.5, 0.0), -1, 10).unwrap();
        assert!((l.samples()[0] - c64(0.5f64.ln(), 0.0)).norm() < 1e-12);
        let z = Symbol::fourier(&[(1, c64(1.0, 0.0))]).unwrap();
        let l = log_phi_lambda(&z, c64(0.0, 0.0), 1, 10).unwrap();
        assert!(l.samples().iter().all(|v| v.norm() < 1e-12));
        let l = log_phi_lambda(&fixtures::z_plus_2(), c64(0.0, 0.0), 0, 10).unwrap();
        assert!((l.samples()[0] - c64(3f64.ln(), 0.0)).norm() < 1e-12);
        assert!(matches!(
            log_phi_lambda(&recip, c64(0.5, 0.0), 0, 10),
            Err(HardyError::BranchMismatch { .. })
        ));
    }

    #[test]
    fn backward_shift_eigenvector() {
        let recip = fixtures::recip_z();
        let e = eigenvector_with_winding(&recip, c64(0.5, 0.0), -1, 0, 64).unwrap();
        for (k, h) in e.coefficients.iter().enumerate() {
            assert!((h - c64(0.5f64.powi(k as i32), 0.0)).norm() < 1e-12);
        }
        assert!(e.residual <= 1e-8);
        let e = eigenvector_with_winding(&recip, c64(0.0, 0.0), -1, 0, 16).unwrap();
        assert_eq!(e.coefficients[0], c64(1.0, 0.0));
        assert!(e.coefficients[1..].iter().all(|h| h.norm() < 1e-14));
    }

    #[test]
    fn double_shift_pair() {
        let s = Symbol::fourier(&[(-2, c64(1.0, 0.0))]).unwrap();
        for j in 0..2 {
            let e = eigenvector_with_winding(&s, c64(0.25, 0.0), -2, j, 128).unwrap();
            assert!(e.residual <= 1e-7, "j={j} residual {}", e.residual);
        }
        assert!(matches!(
            eigenvector_with_winding(&s, c64(0.25, 0.0), -2, 2, 16),
            Err(HardyError::IndexOutOfRange { .. })
        ));
    }
}
