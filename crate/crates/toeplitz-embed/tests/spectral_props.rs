use nalgebra::DMatrix;
use proptest::prelude::*;
use toeplitz_embed::linalg::{self, CMat};
use toeplitz_embed::semigroup::ray_candidates;
use toeplitz_embed::spectral::{
    default_contour, kreiss_constant, kreiss_on_samples, matrix_log_off_ray, numerical_range, sectorial_power, Region,
};
use toeplitz_embed::{c64, C64};

fn matrix(max_n: usize) -> impl Strategy<Value = CMat> {
    (2..=max_n).prop_flat_map(|n| {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n)
            .prop_map(move |v| DMatrix::from_iterator(n, n, v.into_iter().map(|(a, b)| c64(a, b))))
    })
}

fn unitary(seed: &CMat) -> CMat {
    seed.clone().qr().q()
}

/// `Q diag(λ) Q*` with the eigenvalues in the disk `D(center, radius)`.
fn normal_in_disk(center: C64, radius: f64) -> impl Strategy<Value = (CMat, Vec<C64>)> {
    (2usize..=5).prop_flat_map(move |n| {
        (prop::collection::vec((0.0f64..1.0, 0.0f64..6.3), n), prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n))
            .prop_map(move |(eig, q)| {
                let l: Vec<C64> = eig.iter().map(|&(r, a)| center + C64::from_polar(radius * r.sqrt(), a)).collect();
                let q = unitary(&DMatrix::from_iterator(n, n, q.into_iter().map(|(a, b)| c64(a, b))));
                let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(l.clone()));
                (&q * d * q.adjoint(), l)
            })
    })
}

/// Numerical radius from a dense Hermitian eigensolver over the same angles.
fn numerical_radius_oracle(t: &CMat, k: usize) -> f64 {
    (0..k)
        .map(|i| {
            let rot = t * C64::from_polar(1.0, -std::f64::consts::TAU * i as f64 / k as f64);
            let h = (&rot + rot.adjoint()) * c64(0.5, 0.0);
            h.symmetric_eigen().eigenvalues.iter().copied().fold(f64::MIN, f64::max)
        })
        .fold(f64::MIN, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn eigenvalues_lie_in_numerical_range(t in matrix(6)) {
        let w = numerical_range(&t, 720);
        for l in linalg::eigenvalues(&t) {
            prop_assert!(w.contains(l, 1e-9), "eigenvalue {} outside", l);
        }
        prop_assert!(w.support_is_convex(1e-9));
    }

    #[test]
    fn numerical_radius_matches_dense_oracle(t in matrix(5)) {
        let w = numerical_range(&t, 180);
        prop_assert!((w.numerical_radius() - numerical_radius_oracle(&t, 180)).abs() <= 1e-9 * (1.0 + linalg::norm2(&t)));
        prop_assert!(w.numerical_radius() <= linalg::norm2(&t) + 1e-12);
    }

    #[test]
    fn sectorial_power_law(
        n in 2usize..=4,
        eig in prop::collection::vec((0.5f64..3.0, -1.0f64..1.0), 4),
        upper in prop::collection::vec((-0.5f64..0.5, -0.5f64..0.5), 16),
        q in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16),
    ) {
        let mut u = CMat::zeros(n, n);
        for i in 0..n {
            u[(i, i)] = C64::from_polar(eig[i].0, eig[i].1);
            for j in i + 1..n {
                u[(i, j)] = c64(upper[i * 4 + j].0, upper[i * 4 + j].1);
            }
        }
        let q = unitary(&DMatrix::from_iterator(n, n, q.into_iter().take(n * n).map(|(a, b)| c64(a, b))));
        let t = &q * u * q.adjoint();
        let omega = eig.iter().take(n).map(|e| e.1.abs()).fold(0.0, f64::max) + 0.05;
        let c = default_contour(&t, omega);
        let times = [0.25, 0.5, 1.0];
        let pw: Vec<CMat> = times.iter().map(|&s| sectorial_power(&t, s, c).unwrap()).collect();
        prop_assert!(linalg::rel_diff(&pw[2], &t) <= 1e-8);
        prop_assert!(linalg::rel_diff(&(&pw[1] * &pw[1]), &t) <= 1e-7);
        for (i, &s) in times.iter().enumerate() {
            for (j, &r) in times.iter().enumerate() {
                let st = sectorial_power(&t, s + r, c).unwrap();
                let res = linalg::norm2(&(&pw[i] * &pw[j] - &st));
                prop_assert!(res <= 1e-7 * linalg::norm2(&st).max(1.0), "s={} t={} residual {:e}", s, r, res);
            }
        }
    }

    #[test]
    fn matrix_log_inverts_exp(t in matrix(6)) {
        let eig = linalg::eigenvalues(&t);
        let norm = linalg::norm2(&t);
        prop_assume!(eig.iter().all(|l| l.norm() > 1e-2 * norm));
        let alpha = ray_candidates(&eig)[0];
        let g = matrix_log_off_ray(&t, alpha).unwrap();
        prop_assert!(linalg::rel_diff(&linalg::expm(&g), &t) <= 1e-9);
    }

    #[test]
    fn kreiss_decreases_on_larger_regions(t in matrix(5), grow in 0.0f64..1.0, extra in 0.01f64..1.0) {
        let r1 = linalg::norm2(&t) * (1.0 + grow);
        let small = Region::Disk { center: c64(0.0, 0.0), radius: r1 };
        let large = Region::Disk { center: c64(0.0, 0.0), radius: r1 * (1.0 + extra) };
        let mut pts = Vec::new();
        for d in [1e-3, 1e-2, 1e-1, 1.0] {
            pts.extend(large.offset_points(d * r1, 32, r1));
        }
        prop_assert!(kreiss_on_samples(&t, &large, &pts) <= kreiss_on_samples(&t, &small, &pts) * (1.0 + 1e-12));
    }

    #[test]
    fn normal_kreiss_on_numerical_range_is_one((t, _) in normal_in_disk(c64(0.0, 0.0), 1.0)) {
        let hull = numerical_range(&t, 48).region();
        let k = kreiss_constant(&t, &hull, 16).unwrap();
        prop_assert!(k.lower_bound_refined >= 0.9 && k.lower_bound_refined <= 1.0 + 1e-6, "{}", k.lower_bound_refined);
    }

    #[test]
    fn mobius_image_keeps_kreiss_bounded(
        cx in -1.0f64..1.0, cy in -1.0f64..1.0, r in 0.2f64..1.5, far in 1.5f64..3.0, psi in 0.0f64..6.3,
        (t0, _) in normal_in_disk(c64(0.0, 0.0), 1.0),
    ) {
        let c = c64(cx, cy);
        let n = t0.nrows();
        let t = CMat::identity(n, n) * c + t0 * c64(r, 0.0);
        let a = c + C64::from_polar(r * far, psi);
        let k0 = kreiss_constant(&t, &Region::Disk { center: c, radius: r }, 16).unwrap();
        prop_assert!(k0.lower_bound_refined <= 1.0 + 1e-6);
        // φ(z) = z/(z − a) = 1 + a/(z − a) maps D(c, r) onto a disk
        let m = c - a;
        let den = m.norm_sqr() - r * r;
        let image = Region::Disk { center: c64(1.0, 0.0) + a * m.conj() / den, radius: a.norm() * r / den };
        let shifted = &t - CMat::identity(n, n) * a;
        let phi = &t * shifted.try_inverse().unwrap();
        let k1 = kreiss_constant(&phi, &image, 16).unwrap();
        prop_assert!(k1.lower_bound_refined <= 10.0, "{}", k1.lower_bound_refined);
    }
}

#[test]
fn shift_truncation_numerical_radius() {
    // n = 2: W of [[0, 0], [1, 0]] is the disk of radius 1/2
    let t = DMatrix::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)]);
    assert!((numerical_range(&t, 720).numerical_radius() - 0.5).abs() <= 1e-8);
}

#[test]
fn diag_sectorial_square_root() {
    let t = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c64(1.0, 0.0), c64(4.0, 0.0)]));
    let s = sectorial_power(&t, 0.5, default_contour(&t, 0.05)).unwrap();
    let want = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c64(1.0, 0.0), c64(2.0, 0.0)]));
    assert!((s - want).iter().map(|z| z.norm()).fold(0.0, f64::max) <= 1e-8);
}

#[test]
fn spectrum_outside_region_is_rejected() {
    let t = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c64(2.0, 0.0), c64(-1.0, 0.0)]));
    assert!(kreiss_constant(&t, &Region::Disk { center: c64(0.0, 0.0), radius: 1.5 }, 16).is_err());
}
