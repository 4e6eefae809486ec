//! Reference symbols shared by tests, the acceptance suite and the CLI.

use crate::symbol::Symbol;
use crate::{c64, C64, TAU};

/// `F(z) = z + 2`.
pub fn z_plus_2() -> Symbol {
    Symbol::fourier(&[(0, c64(2.0, 0.0)), (1, c64(1.0, 0.0))]).unwrap().with_name("z+2")
}

/// `F(z) = 1/z`.
pub fn recip_z() -> Symbol {
    Symbol::fourier(&[(-1, c64(1.0, 0.0))]).unwrap().with_name("1/z")
}

/// Binomial expansion of `(z + 2)^s` for a nonnegative integer `s`.
pub fn z_plus_2_pow(s: u32) -> Symbol {
    let mut coeffs = vec![c64(0.0, 0.0); s as usize + 1];
    let mut binom = 1.0_f64;
    for k in 0..=s {
        coeffs[k as usize] = c64(binom * 2f64.powi((s - k) as i32), 0.0);
        binom = binom * (s - k) as f64 / (k + 1) as f64;
    }
    Symbol::from_coefficients(0, coeffs).unwrap().with_name(format!("(z+2)^{s}"))
}

/// Limaçon `1/z + a/z²`: one transversal self-crossing, an inner loop of
/// winding −2 inside a region of winding −1 (needs `1/2 < a < 1`).
pub fn limacon(a: f64) -> Symbol {
    Symbol::fourier(&[(-2, c64(a, 0.0)), (-1, c64(1.0, 0.0))]).unwrap().with_name(format!("limacon({a})"))
}

/// `(1−z)^{1/3}/z` on a parameter grid that is graded towards `θ = 0`.
///
/// On the circle this is `(2 sin(θ/2))^{1/3} e^{−i(5θ+π)/6}`, a negatively
/// wound Jordan curve through 0 with an unbounded derivative at `θ = 0`.
pub fn cube_root_symbol(n: usize) -> Symbol {
    let theta: Vec<f64> = (0..n)
        .map(|i| {
            let s = TAU * i as f64 / n as f64;
            s - 0.9 * s.sin()
        })
        .collect();
    let values = theta.iter().map(|&t| cube_root_value(t)).collect();
    Symbol::sampled(theta, values).unwrap().with_name("(1-z)^(1/3)/z")
}

/// Closed form of `(1−z)^{1/3}/z` at `z = e^{iθ}` with the principal cube root.
pub fn cube_root_value(theta: f64) -> C64 {
    let m = (2.0 * (theta / 2.0).sin()).abs().cbrt();
    C64::from_polar(m, -(5.0 * theta + std::f64::consts::PI) / 6.0)
}

/// The two-circle curve: a circle of radius 2 about −1 followed by the unit
/// circle, both negatively oriented and internally tangent at 1.
///
/// `F(e^{iθ}) = −1 + 2e^{−3iθ/2}` for `θ < 4π/3`, `e^{−3iθ}` afterwards; the
/// pieces join with matching derivative at 1.
pub fn two_circles(n: usize) -> Symbol {
    Symbol::sampled_from_fn(n, two_circles_value).unwrap().with_name("two-circles")
}

pub fn two_circles_value(theta: f64) -> C64 {
    if theta < 2.0 * TAU / 3.0 {
        c64(-1.0, 0.0) + C64::from_polar(2.0, -1.5 * theta)
    } else {
        C64::from_polar(1.0, -3.0 * theta)
    }
}

/// Control polygon of the figure-eight-in-a-loop curve: a lens of winding −2
/// between two transversal crossings on the real axis, a bounded lobe of
/// winding 0 around the origin, and a surrounding region of winding −1.
const FIG8_LOOP_CONTROL: [(f64, f64); 20] = [
    (2.0, 0.0),
    (1.25, 0.4),
    (0.5, 0.0),
    (0.0, -0.65),
    (-0.8, -0.65),
    (-1.25, 0.0),
    (-0.8, 0.65),
    (0.0, 0.65),
    (0.5, 0.0),
    (1.25, -0.4),
    (2.0, 0.0),
    (2.35, 1.1),
    (1.2, 2.1),
    (-0.6, 2.3),
    (-2.2, 1.3),
    (-2.5, 0.0),
    (-2.2, -1.3),
    (-0.6, -2.3),
    (1.2, -2.1),
    (2.35, -1.1),
];

/// Figure-eight-in-a-loop curve, negatively oriented, resampled at `n` points
/// from the periodic spline through the control polygon.
pub fn figure_eight_in_loop(n: usize) -> Symbol {
    let m = FIG8_LOOP_CONTROL.len();
    let theta: Vec<f64> = (0..m).map(|i| TAU * i as f64 / m as f64).collect();
    // Reversing the list flips the orientation; keep the first point fixed.
    let mut values: Vec<C64> = FIG8_LOOP_CONTROL.iter().rev().map(|&(x, y)| c64(x, y)).collect();
    values.rotate_right(1);
    let coarse = Symbol::sampled(theta, values).unwrap();
    Symbol::sampled_from_fn(n, |t| coarse.evaluate(t)).unwrap().with_name("figure-eight-in-loop")
}

/// Trigonometric polynomial with coefficients drawn uniformly from the unit
/// square, frequencies in `[kmin, kmax]`.
pub fn random_trig_poly(rng: &mut impl rand::Rng, kmin: i64, kmax: i64) -> Symbol {
    let pairs: Vec<(i64, C64)> =
        (kmin..=kmax).map(|k| (k, c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))).collect();
    Symbol::fourier(&pairs).unwrap()
}
