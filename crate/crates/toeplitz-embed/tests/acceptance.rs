//! One PASS/FAIL line per acceptance criterion.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toeplitz_embed::curve_topology::{region_decomposition, w_plus, winding_number, TopologyOptions};
use toeplitz_embed::hardy::eigenvector_with_winding;
use toeplitz_embed::linalg::{self, CMat};
use toeplitz_embed::model_fig8::{verify_identities, CircleArcConfig};
use toeplitz_embed::semigroup::{build_dunford, build_sectorial, verify, OperatorFamily, Schedule};
use toeplitz_embed::spectral::{kreiss_constant, numerical_range};
use toeplitz_embed::symbol::Symbol;
use toeplitz_embed::verdict::{analyze, decide, AnalysisConfig, Status, Verdict};
use toeplitz_embed::{c64, fixtures, C64, TAU};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn criterion_1() -> Outcome {
    let (d, dt) = timed(|| {
        let f = fixtures::two_circles(2048);
        let disc = f.discretize(f.default_step()).unwrap();
        region_decomposition(&disc, &TopologyOptions { resolution: 512, ..Default::default() })
    });
    let d = d.map_err(|e| e.to_string())?;
    let mut w: Vec<(i64, bool)> = d.components.iter().map(|c| (c.winding, c.unbounded)).collect();
    w.sort();
    let want = vec![(-2, false), (-1, false), (0, true)];
    check(w == want && dt < Duration::from_secs(5), format!("components {w:?}, {dt:.2?}"))
}

fn clearance(f: &Symbol) -> f64 {
    (0..8192).map(|i| f.evaluate(TAU * i as f64 / 8192.0).norm()).fold(f64::MAX, f64::min)
}

fn criterion_2() -> Outcome {
    let wp = |f: &Symbol| {
        let disc = f.discretize(f.default_step()).unwrap();
        w_plus(f, &disc).map(|w| w.value).map_err(|e| e.to_string())
    };
    let a = wp(&Symbol::fourier(&[(0, c64(-1.0, 0.0)), (1, c64(1.0, 0.0))]).unwrap())?;
    let b = wp(&Symbol::fourier(&[(-1, c64(-1.0, 0.0)), (0, c64(1.0, 0.0))]).unwrap())?;
    if (a - 1.0).abs() > 1e-3 || b.abs() > 1e-3 {
        return Err(format!("w+(z-1) = {a}, w+(1-1/z) = {b}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut done = 0;
    while done < 50 {
        let f = fixtures::random_trig_poly(&mut rng, -3, 3);
        if clearance(&f) < 1e-3 {
            continue;
        }
        let disc = f.discretize(f.default_step()).unwrap();
        let w = w_plus(&f, &disc).map_err(|e| e.to_string())?;
        let wind = winding_number(&disc, c64(0.0, 0.0)).map_err(|e| e.to_string())?;
        if w.value != wind as f64 {
            return Err(format!("w+ {} vs winding {wind} for {:?}", w.value, f.to_spec()));
        }
        done += 1;
    }
    Ok(format!("w+(z-1) = {a}, w+(1-1/z) = {b}, 50 random polynomials agree"))
}

fn criterion_3() -> Outcome {
    let f = fixtures::recip_z();
    let t = f.toeplitz_truncation(64).unwrap().matrix;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut coef_err, mut resid, mut worst) = (0.0f64, 0.0f64, c64(0.0, 0.0));
    let (_, dt) = timed(|| {
        for _ in 0..20 {
            // uniform on the disk of radius 0.8
            let lambda = C64::from_polar(0.8 * rng.gen_range(0.0f64..1.0).sqrt(), rng.gen_range(0.0..TAU));
            let h = eigenvector_with_winding(&f, lambda, -1, 0, 64).unwrap();
            let mut p = c64(1.0, 0.0);
            for c in &h.coefficients {
                coef_err = coef_err.max((c - p).norm());
                p *= lambda;
            }
            let v = DVector::from_vec(h.coefficients.clone());
            let r = (&t * &v - &v * lambda).norm() / v.norm();
            if r > resid {
                resid = r;
                worst = lambda;
            }
        }
    });
    check(
        coef_err <= 1e-8 && resid <= 1e-8 && dt < Duration::from_secs(2),
        // the exact eigenvector cut at degree 63 leaves |λ|^64 in the last row
        format!(
            "max coefficient error {coef_err:e}, max residual {resid:e} at |λ| = {:.4} (|λ|^64 (1-|λ|²)^½ = {:e}), {dt:.2?}",
            worst.norm(),
            worst.norm().powi(64) * (1.0 - worst.norm_sqr()).sqrt()
        ),
    )
}

fn criterion_4() -> Outcome {
    let f = fixtures::z_plus_2();
    let trunc = f.toeplitz_truncation(32).unwrap();
    let disc = f.discretize(f.default_step()).unwrap();
    let decomp = region_decomposition(&disc, &TopologyOptions::default()).map_err(|e| e.to_string())?;
    let fam = build_dunford(&trunc, &decomp).map_err(|e| e.to_string())?;
    let t = &trunc.matrix;
    let half = fam.at(0.5).map_err(|e| e.to_string())?;
    let third = fam.at(1.0 / 3.0).map_err(|e| e.to_string())?;
    let r2 = linalg::rel_diff(&(&*half * &*half), t);
    let r3 = linalg::rel_diff(&(&*third * &*third * &*third), t);
    let report = verify(&fam, t, &Schedule::default()).map_err(|e| e.to_string())?;
    let cont = report.continuity.iter().find(|c| c.0 == 1e-3).map(|c| c.1).unwrap_or(f64::INFINITY);
    check(r2 <= 1e-8 && r3 <= 1e-7 && cont <= 1e-2, format!("A½² {r2:e}, A⅓³ {r3:e}, continuity(1e-3) {cont:e}"))
}

fn criterion_5() -> Outcome {
    let diag = |v: &[f64]| CMat::from_diagonal(&DVector::from_iterator(v.len(), v.iter().map(|&x| c64(x, 0.0))));
    let t = diag(&[1.0, 4.0]);
    let fam = build_sectorial(&t).map_err(|e| e.to_string())?;
    let root = fam.at(0.5).map_err(|e| e.to_string())?;
    let err = (&*root - diag(&[1.0, 2.0])).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let report = verify(&fam, &t, &Schedule::default()).map_err(|e| e.to_string())?;
    check(err <= 1e-8 && report.law_residual <= 1e-7, format!("sqrt error {err:e}, law residual {:e}", report.law_residual))
}

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn criterion_6() -> Outcome {
    let text = std::fs::read_to_string(fixture_dir().join("circle_arcs.json")).map_err(|e| e.to_string())?;
    let model = CircleArcConfig::from_json(&text).and_then(|c| c.build()).map_err(|e| e.to_string())?;
    let (r, dt) = timed(|| verify_identities(&model, 1000, 6));
    let r = r.map_err(|e| e.to_string())?;
    check(
        r.group_residual <= 1e-10 && r.unit_residual <= 1e-12 && dt < Duration::from_secs(1),
        format!("group {:e}, unit {:e}, {dt:.2?}", r.group_residual, r.unit_residual),
    )
}

fn criterion_7() -> Outcome {
    let shift = |n: usize| fixtures::recip_z().reflect().toeplitz_truncation(n).unwrap().matrix;
    let r2 = numerical_range(&shift(2), 720).numerical_radius();
    let t31 = shift(31);
    let r31 = numerical_range(&t31, 720).numerical_radius();
    // dense oracle: the shift is rotation invariant, so the Hermitian part at angle 0 suffices
    let herm = (&t31 + t31.adjoint()) * c64(0.5, 0.0);
    let oracle = herm.symmetric_eigen().eigenvalues.iter().copied().fold(f64::MIN, f64::max);
    let want = (std::f64::consts::PI / 32.0).cos();
    if (r2 - 0.5).abs() > 1e-8 || (r31 - want).abs() > 1e-6 || (oracle - want).abs() > 1e-6 {
        return Err(format!("radius(2) {r2}, radius(31) {r31}, oracle {oracle}, cos(π/32) {want}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut lo, mut hi) = (f64::MAX, f64::MIN);
    for _ in 0..20 {
        let n = rng.gen_range(2..=6);
        let seed = DMatrix::from_fn(n, n, |_, _| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let q = seed.qr().q();
        let d = DVector::from_fn(n, |_, _| C64::from_polar(rng.gen_range(0.0f64..1.0).sqrt(), rng.gen_range(0.0..TAU)));
        let t = &q * CMat::from_diagonal(&d) * q.adjoint();
        let k = kreiss_constant(&t, &numerical_range(&t, 180).region(), 16).map_err(|e| e.to_string())?;
        lo = lo.min(k.lower_bound_refined);
        hi = hi.max(k.lower_bound_refined);
    }
    check(lo >= 0.9 && hi <= 1.0 + 1e-6, format!("radius(2) {r2}, radius(31) {r31}, normal Kreiss in [{lo}, {hi}]"))
}

fn corpus() -> Result<Vec<(&'static str, Verdict)>, String> {
    let config = AnalysisConfig { n: 32, ..Default::default() };
    let run = |f: &Symbol| analyze(f, &config).map(|a| decide(&a, 2.0, None, 0)).map_err(|e| e.to_string());
    let two = fixtures::two_circles(2048);
    let disc = two.discretize(two.default_step()).unwrap();
    let d = region_decomposition(&disc, &TopologyOptions::default()).map_err(|e| e.to_string())?;
    let omega0 = d.unbounded_component().ok_or("no unbounded component")?.representative;
    Ok(vec![
        ("z+2", run(&fixtures::z_plus_2())?),
        ("(z+2)^7", run(&fixtures::z_plus_2_pow(7))?),
        ("1/z", run(&fixtures::recip_z())?),
        ("figure-eight", run(&fixtures::figure_eight_in_loop(2048))?),
        ("two-circle in Ω₀", run(&two.shifted(-omega0))?),
    ])
}

fn criterion_8() -> Outcome {
    let first = corpus()?;
    let second = corpus()?;
    let same = first.iter().zip(&second).all(|(a, b)| serde_json::to_string(&a.1).unwrap() == serde_json::to_string(&b.1).unwrap());
    let want = [
        (Status::Embeddable, Some("R1")),
        (Status::Embeddable, Some("R3")),
        (Status::NotEmbeddable, Some("R2")),
        (Status::Unknown, Some("R12")),
    ];
    let mut notes = vec![];
    let mut ok = same;
    for ((name, v), w) in first.iter().zip(want) {
        let got = (v.status, v.fired_rule.as_deref());
        ok &= got == w;
        notes.push(format!("{name}: {:?} {}", v.status, v.fired_rule.as_deref().unwrap_or("none")));
    }
    // the two-circle verdict must agree with every decisive R8/R9 evaluation, and one must be decisive
    let (name, v) = &first[4];
    let r89: Vec<_> = v.evidence.iter().filter(|e| (e.rule == "R8" || e.rule == "R9") && e.decisive).collect();
    ok &= !r89.is_empty() && r89.iter().all(|e| e.status == Some(v.status));
    let rules: Vec<String> = r89.iter().map(|e| format!("{} {:?}", e.rule, e.status)).collect();
    notes.push(format!("{name}: {:?} {}; decisive R8/R9: [{}]", v.status, v.fired_rule.as_deref().unwrap_or("none"), rules.join(", ")));
    notes.push(format!("byte-identical reruns: {same}"));
    check(ok, notes.join("; "))
}

const PROPERTY_SUITES: [&str; 7] =
    ["symbol_props", "topology_props", "hardy_props", "spectral_props", "semigroup_props", "model_props", "verdict_props"];

/// Newest built test binary `name-<hash>` next to this one.
fn suite_binary(name: &str) -> Option<PathBuf> {
    let dir = std::env::current_exe().ok()?.parent()?.to_path_buf();
    let prefix = format!("{name}-");
    std::fs::read_dir(dir)
        .ok()?
        .filter_map(|e| e.ok())
        .filter(|e| {
            let f = e.file_name().to_string_lossy().into_owned();
            f.strip_prefix(&prefix).is_some_and(|h| h.len() == 16 && h.chars().all(|c| c.is_ascii_hexdigit()))
        })
        .max_by_key(|e| e.metadata().and_then(|m| m.modified()).ok())
        .map(|e| e.path())
}

fn criterion_9() -> Outcome {
    let mut notes = vec![];
    let mut ok = true;
    for name in PROPERTY_SUITES {
        let Some(bin) = suite_binary(name) else {
            ok = false;
            notes.push(format!("{name}: not built"));
            continue;
        };
        let out = Command::new(&bin).env_remove("PROPTEST_CASES").output().map_err(|e| e.to_string())?;
        let text = String::from_utf8_lossy(&out.stdout);
        let summary = text.lines().rev().find(|l| l.starts_with("test result")).unwrap_or("no summary").to_string();
        ok &= out.status.success();
        notes.push(format!("{name}: {summary}"));
    }
    check(ok, notes.join("; "))
}

#[test]
fn acceptance() {
    let criteria: [(u32, fn() -> Outcome); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let mut failed = vec![];
    for (k, f) in criteria {
        match f() {
            Ok(d) => println!("criterion {k}: PASS ({d})"),
            Err(d) => {
                println!("criterion {k}: FAIL ({d})");
                failed.push(k);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
