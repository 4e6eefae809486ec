use proptest::prelude::*;
use toeplitz_embed::symbol::Symbol;
use toeplitz_embed::verdict::{analyze, decide, AnalysisConfig, Status, Verdict};
use toeplitz_embed::curve_topology::{region_decomposition, TopologyOptions};
use toeplitz_embed::{c64, fixtures, TAU};

fn config(n: usize) -> AnalysisConfig {
    AnalysisConfig { n, resolution: 128, numrange_angles: 64, disk_directions: 90, ..Default::default() }
}

/// Degree ≤ 2 trigonometric polynomials with 0 placed generically (mode 0),
/// on the curve (mode 1) or at the representative of a bounded component
/// (mode 2).
fn symbol() -> impl Strategy<Value = Symbol> {
    (prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 5), 0usize..3, 0.0f64..TAU, 0usize..16).prop_filter_map(
        "nonconstant",
        |(v, mode, theta, pick)| {
            let pairs: Vec<(i64, _)> = v.into_iter().zip(-2..=2).map(|((a, b), k)| (k, c64(a, b))).collect();
            if !pairs.iter().any(|&(k, c)| k != 0 && c.norm() > 0.1) {
                return None;
            }
            let f = Symbol::fourier(&pairs).ok()?;
            let at = match mode {
                0 => return Some(f),
                1 => f.evaluate(theta),
                _ => {
                    let disc = f.discretize(f.default_step()).ok()?;
                    let d = region_decomposition(&disc, &TopologyOptions { resolution: 128, ..Default::default() }).ok()?;
                    let bounded: Vec<_> = d.components.iter().filter(|c| !c.unbounded).collect();
                    bounded.get(pick % bounded.len().max(1))?.representative
                }
            };
            Some(f.shifted(-at))
        },
    )
}

fn verdict(f: &Symbol, n: usize, p: f64) -> Option<Verdict> {
    analyze(f, &config(n)).ok().map(|a| decide(&a, p, None, 0))
}

fn decisive(v: &Verdict, rule: &str) -> bool {
    v.evidence.iter().any(|e| e.rule == rule && e.decisive)
}

fn both_hypothesis_sets(v: &Verdict) -> bool {
    v.hypotheses.h1 && v.hypotheses.h2 && v.hypotheses.h3bis
}

fn check_fired_rule(v: &Verdict) -> Result<(), TestCaseError> {
    prop_assert!(!(decisive(v, "R4") && decisive(v, "R5")), "R4 and R5 both decisive");
    match v.status {
        Status::Unknown => {
            prop_assert!(v.evidence.iter().all(|e| !e.decisive));
            prop_assert!(v.evidence.iter().any(|e| !e.applicable && !e.reason.is_empty()));
        }
        s => {
            let rule = v.fired_rule.clone().unwrap();
            let e = v.evidence.iter().find(|e| e.rule == rule).unwrap();
            prop_assert!(e.decisive && e.status == Some(s));
            // the fired rule is the first decisive one
            prop_assert_eq!(&v.evidence.iter().find(|e| e.decisive).unwrap().rule, &rule);
        }
    }
    Ok(())
}

// Analyses dominate the cost, so one pass shares them across the checks.
proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn verdict_invariants(f in symbol(), p in 1.1f64..5.0) {
        let Some(a) = verdict(&f, 8, p) else { return Ok(()) };
        check_fired_rule(&a)?;

        // determinism
        let again = verdict(&f, 8, p).unwrap();
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&again).unwrap());

        // monotone evidence under a larger truncation
        let b = verdict(&f, 16, p).unwrap();
        check_fired_rule(&b)?;
        let geometric = ["R1", "R2", "R3", "R4", "R5", "R6", "R7", "R8", "R9"];
        if let Some(rule) = a.fired_rule.as_deref().filter(|r| geometric.contains(r)) {
            prop_assert_eq!(b.fired_rule.as_deref(), Some(rule));
            prop_assert_eq!(a.status, b.status);
        }

        // reflection with the dual exponent
        let q = p / (p - 1.0);
        if let Some(r) = verdict(&f.reflect(), 8, q) {
            check_fired_rule(&r)?;
            if both_hypothesis_sets(&a) && both_hypothesis_sets(&r) {
                prop_assert_eq!(a.status, r.status, "{:?} vs {:?}", a.fired_rule, r.fired_rule);
            }
        }
    }
}

#[test]
fn corpus_statuses() {
    let cases = [
        (fixtures::z_plus_2(), Status::Embeddable, "R1"),
        (fixtures::recip_z(), Status::NotEmbeddable, "R2"),
    ];
    for (f, status, rule) in cases {
        let v = verdict(&f, 8, 2.0).unwrap();
        assert_eq!((v.status, v.fired_rule.as_deref()), (status, Some(rule)));
    }
}
