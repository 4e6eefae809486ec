//! Decide whether a Toeplitz operator `T_F` on the Hardy space embeds into a
//! C₀-semigroup.
//!
//! The crate is layered bottom-up:
//!
//! * [`symbol`] holds the circle function `F`, its derivative, curve
//!   discretizations and Toeplitz truncations;
//! * [`curve_topology`] computes winding numbers, self-intersections, the
//!   region decomposition of `ℂ∖F(𝕋)` and the Ahern–Clark index `w₊(F)`;
//! * [`hardy`] builds kernel eigenvectors through FFT Riesz projection;
//! * [`spectral`] and [`semigroup`] work with dense truncations (numerical
//!   range, Kreiss constants, sectorial calculus, matrix logarithms);
//! * [`model_fig8`] evaluates the explicit 2×2 figure-eight semigroup model;
//! * [`verdict`] combines everything into a rule-based decision.

pub mod curve_topology;
pub mod fixtures;
pub mod hardy;
pub mod linalg;
pub mod model_fig8;
pub mod semigroup;
pub mod spectral;
pub mod svg;
pub mod symbol;
pub mod verdict;

pub use num_complex::Complex64;

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// `2π`.
pub const TAU: f64 = std::f64::consts::TAU;

/// Complex number from real and imaginary parts.
#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
