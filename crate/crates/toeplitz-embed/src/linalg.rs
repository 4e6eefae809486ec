//! Dense complex matrix helpers on top of nalgebra: Schur forms, triangular
//! square roots, the principal logarithm and Gauss–Legendre rules.

use nalgebra::DMatrix;

use crate::C64;

pub type CMat = DMatrix<C64>;

/// Spectral norm.
pub fn norm2(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// Smallest singular value.
pub fn sigma_min(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().min()
}

/// `‖a − b‖₂ / ‖b‖₂` (absolute when `b = 0`).
pub fn rel_diff(a: &CMat, b: &CMat) -> f64 {
    let d = norm2(&(a - b));
    let nb = norm2(b);
    if nb > 0.0 {
        d / nb
    } else {
        d
    }
}

/// Complex Schur decomposition `m = Q U Q^H` with `U` upper triangular.
pub fn schur(m: &CMat) -> (CMat, CMat) {
    let (q, mut u) = m.clone().schur().unpack();
    // Clean the numerically zero strict lower part.
    for j in 0..u.ncols() {
        for i in j + 1..u.nrows() {
            u[(i, j)] = C64::new(0.0, 0.0);
        }
    }
    (q, u)
}

/// Eigenvalues (diagonal of the Schur form).
pub fn eigenvalues(m: &CMat) -> Vec<C64> {
    let (_, u) = schur(m);
    (0..u.nrows()).map(|i| u[(i, i)]).collect()
}

/// Principal square root of an upper-triangular matrix with no eigenvalue on
/// the closed negative real axis.
pub fn sqrt_upper(u: &CMat) -> CMat {
    let n = u.nrows();
    let mut r = CMat::zeros(n, n);
    for i in 0..n {
        r[(i, i)] = u[(i, i)].sqrt();
    }
    for d in 1..n {
        for i in 0..n - d {
            let j = i + d;
            let mut s = u[(i, j)];
            for k in i + 1..j {
                s -= r[(i, k)] * r[(k, j)];
            }
            r[(i, j)] = s / (r[(i, i)] + r[(j, j)]);
        }
    }
    r
}

/// Maximum absolute column sum.
pub fn norm1(m: &CMat) -> f64 {
    m.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Inverse of an upper-triangular matrix.
pub fn inv_upper(u: &CMat) -> Option<CMat> {
    let n = u.nrows();
    u.solve_upper_triangular(&CMat::identity(n, n))
}

/// Lower bound for `‖U^{-1}‖₂` of an upper-triangular `U` by power iteration
/// on `(U^H U)^{-1}`; infinite if `U` is singular.
pub fn inv_norm_upper(u: &CMat) -> f64 {
    let n = u.nrows();
    if n == 0 {
        return 0.0;
    }
    if (0..n).any(|i| u[(i, i)].norm() == 0.0) {
        return f64::INFINITY;
    }
    let uh = u.adjoint();
    let mut x = nalgebra::DVector::from_fn(n, |i, _| C64::from_polar(1.0 / (1.0 + i as f64).sqrt(), 0.7 * i as f64));
    x /= C64::new(x.norm(), 0.0);
    let mut est = 0.0;
    for _ in 0..60 {
        let y = match u.solve_upper_triangular(&x) {
            Some(y) => y,
            None => return f64::INFINITY,
        };
        let w = match uh.solve_lower_triangular(&y) {
            Some(w) => w,
            None => return f64::INFINITY,
        };
        let next = y.norm();
        let wn = w.norm();
        if !wn.is_finite() || wn == 0.0 {
            return if wn == 0.0 { next } else { f64::INFINITY };
        }
        x = w / C64::new(wn, 0.0);
        if (next - est).abs() <= 1e-8 * next {
            return next;
        }
        est = next;
    }
    est
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_m(z), p0 = P_{m−1}(z)
            dp = m as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[m - 1 - i] = w[i];
    }
    (x, w)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(m: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(m);
    let h = 0.5 * (b - a);
    x.iter().zip(&w).map(|(&xi, &wi)| (a + h * (xi + 1.0), h * wi)).collect()
}

/// Principal logarithm of an upper-triangular matrix by inverse scaling and
/// squaring; `None` if an eigenvalue is zero or on the negative axis.
pub fn log_upper(u: &CMat) -> Option<CMat> {
    let n = u.nrows();
    for i in 0..n {
        let d = u[(i, i)];
        if d.norm() == 0.0 || (d.im == 0.0 && d.re < 0.0) {
            return None;
        }
    }
    let id = CMat::identity(n, n);
    let mut r = u.clone();
    let mut s = 0;
    while norm1(&(&r - &id)) >= 0.25 {
        r = sqrt_upper(&r);
        s += 1;
        if s > 60 {
            return None;
        }
    }
    // log(I + X) = ∫₀¹ X (I + τX)^{-1} dτ, exact for polynomial degree 2m−1.
    let x = &r - &id;
    let mut acc = CMat::zeros(n, n);
    for (tau, w) in gauss_legendre_on(16, 0.0, 1.0) {
        let m = &id + &x * C64::new(tau, 0.0);
        let sol = m.solve_upper_triangular(&x)?;
        acc += sol * C64::new(w, 0.0);
    }
    Some(acc * C64::new(2f64.powi(s), 0.0))
}

/// Principal logarithm via the Schur form.
pub fn logm(m: &CMat) -> Option<CMat> {
    let (q, u) = schur(m);
    let l = log_upper(&u)?;
    Some(&q * l * q.adjoint())
}

/// Matrix exponential.
pub fn expm(m: &CMat) -> CMat {
    m.clone().exp()
}

/// Largest eigenvalue and unit eigenvector of a Hermitian matrix.
pub fn hermitian_top(h: &CMat) -> (f64, nalgebra::DVector<C64>) {
    let eig = h.clone().symmetric_eigen();
    let (k, &v) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty matrix");
    (v, eig.eigenvectors.column(k).into_owned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    fn m2(a: [[f64; 2]; 2]) -> CMat {
        CMat::from_fn(2, 2, |i, j| c64(a[i][j], 0.0))
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for m in [1, 2, 5, 16] {
            let q = gauss_legendre_on(m, 0.0, 2.0);
            for p in 0..2 * m {
                let s: f64 = q.iter().map(|(x, w)| w * x.powi(p as i32)).sum();
                let exact = 2f64.powi(p as i32 + 1) / (p as f64 + 1.0);
                assert!((s - exact).abs() < 1e-12 * exact.max(1.0), "m={m} p={p}");
            }
        }
    }

    #[test]
    fn triangular_sqrt() {
        let u = m2([[1.0, 1.0], [0.0, 4.0]]);
        let r = sqrt_upper(&u);
        assert!(rel_diff(&r, &m2([[1.0, 1.0 / 3.0], [0.0, 2.0]])) < 1e-14);
    }

    #[test]
    fn log_of_jordan_block() {
        let t = m2([[2.0, 1.0], [0.0, 2.0]]);
        let l = logm(&t).unwrap();
        let want = m2([[2f64.ln(), 0.5], [0.0, 2f64.ln()]]);
        assert!(rel_diff(&l, &want) < 1e-12);
        assert!(rel_diff(&expm(&l), &t) < 1e-12);
    }

    #[test]
    fn inverse_norm_matches_svd() {
        let u = CMat::from_fn(6, 6, |i, j| if j >= i { c64(1.0 + (i * j) as f64 * 0.3, (i + 2 * j) as f64 * 0.1) } else { c64(0.0, 0.0) });
        let want = 1.0 / sigma_min(&u);
        assert!((inv_norm_upper(&u) - want).abs() < 1e-6 * want);
    }

    #[test]
    fn log_rejects_negative_axis() {
        assert!(logm(&m2([[-1.0, 0.0], [0.0, 1.0]])).is_none());
    }
}
