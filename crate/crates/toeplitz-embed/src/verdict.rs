//! Rule engine combining geometry, the Ahern–Clark index, intersection types,
//! numerical ranges and disk conditions into an embeddability verdict.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve_topology::{
    self, AhernClarkIndex, ComplementMode, DecompositionReport, IntersectionType, PointLocation, RegionDecomposition,
    TopologyError, TopologyOptions,
};
use crate::model_fig8::{self, IdentityReport, ModelSemigroup};
use crate::spectral;
use crate::symbol::{self, CurveDiscretization, HypothesisReport, Symbol, SymbolError, SymbolSpec};
use crate::C64;

pub const VERDICT_SCHEMA: u32 = 1;
pub const ANALYSIS_SCHEMA: u32 = 1;

#[derive(Debug, Error)]
pub enum VerdictError {
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Embeddable,
    NotEmbeddable,
    Unknown,
}

impl Status {
    /// CLI exit code.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Embeddable => 0,
            Status::NotEmbeddable => 1,
            Status::Unknown => 2,
        }
    }
}

/// Range of exponents `p` for which a rule is valid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PRange {
    AllP,
    P2Only,
}

impl PRange {
    pub fn describe(self) -> &'static str {
        match self {
            PRange::AllP => "valid for all p in (1, inf)",
            PRange::P2Only => "valid for p = 2 only",
        }
    }
}

/// Settings shared by [`analyze`] and the CLI.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AnalysisConfig {
    /// Truncation order for the `p = 2` matrix rules.
    pub n: usize,
    /// Grid resolution of the region decomposition.
    pub resolution: usize,
    pub p: f64,
    pub seed: u64,
    /// Directions used for numerical ranges.
    pub numrange_angles: usize,
    /// Directions of the disk search.
    pub disk_directions: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig { n: 64, resolution: 512, p: 2.0, seed: 0, numrange_angles: 180, disk_directions: 360 }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<(), VerdictError> {
        if !(2..=512).contains(&self.n) {
            return Err(VerdictError::Config(format!("n = {} outside [2, 512]", self.n)));
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(VerdictError::Config(format!("p = {} outside (1, inf)", self.p)));
        }
        if !self.resolution.is_power_of_two() || !(128..=4096).contains(&self.resolution) {
            return Err(VerdictError::Config(format!("grid {} not a power of two in [128, 4096]", self.resolution)));
        }
        Ok(())
    }
}

/// Facts about the point 0.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ZeroFacts {
    pub location: String,
    pub distance_to_curve: f64,
    pub on_curve: bool,
    pub in_intersection_set: bool,
    /// Exact polyline winding when off the curve.
    pub winding: Option<i64>,
    pub unbounded_of_curve: Option<bool>,
    pub unbounded_of_spectrum: Option<bool>,
    pub unbounded_of_interior: Option<bool>,
    pub interior_spectrum: Option<bool>,
    /// 0 in a bounded component of winding 0.
    pub bounded_zero_component: bool,
}

/// Separation of 0 from numerical ranges; positive means strictly outside.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NumRangeFacts {
    pub n: usize,
    pub separation_n: f64,
    pub separation_2n: f64,
    /// Same quantity for the convex hull of the curve.
    pub separation_curve: f64,
    pub margin: f64,
    pub numerical_radius_n: f64,
}

/// Largest disk `D(ρe^{iφ}, ρ)` in the unbounded component found.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DiskSearch {
    pub found: bool,
    pub radius: f64,
    pub center: C64,
    pub directions: usize,
}

/// Wiener and Dini membership proxies.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Regularity {
    pub wiener_sum: f64,
    /// Relative growth of the partial sums of `|c_k|` on the last doubling.
    pub wiener_increment: f64,
    pub dini_integral: f64,
    /// Relative contribution of the smallest scale to the Dini integral.
    pub dini_increment: f64,
    pub wiener_confident: bool,
    pub dini_confident: bool,
}

impl Regularity {
    pub fn high_confidence(&self) -> bool {
        self.wiener_confident || self.dini_confident
    }
}

/// Serializable output of [`analyze`]; feeding it back reproduces the
/// analysis from the embedded symbol and settings.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AnalysisSummary {
    pub analysis_schema: u32,
    pub symbol: SymbolSpec,
    pub config: AnalysisConfig,
    pub analytic: bool,
    pub decomposition: DecompositionReport,
    pub hypotheses: HypothesisReport,
    pub w_plus: Option<AhernClarkIndex>,
    pub w_plus_error: Option<String>,
    pub zero: ZeroFacts,
    pub numrange: NumRangeFacts,
    pub disk: DiskSearch,
    pub regularity: Regularity,
}

/// Everything the rules look at.
pub struct Analysis {
    pub symbol: Symbol,
    pub disc: CurveDiscretization,
    pub decomposition: RegionDecomposition,
    pub summary: AnalysisSummary,
}

fn support_separation(samples: &[spectral::SupportSample]) -> f64 {
    samples.iter().map(|s| -s.support).fold(f64::NEG_INFINITY, f64::max)
}

fn zero_facts(d: &RegionDecomposition, disc: &CurveDiscretization) -> ZeroFacts {
    let zero = C64::new(0.0, 0.0);
    let loc = d.locate(zero);
    let (dist, _) = d.distance_to_curve(zero);
    let in_o = matches!(loc, PointLocation::Intersection(_));
    let on_curve = matches!(loc, PointLocation::Curve { .. } | PointLocation::Intersection(_));
    let winding = if on_curve { None } else { curve_topology::winding_number(disc, zero).ok() };
    let bounded_zero_component = match loc {
        PointLocation::Component(c) => !d.components[c].unbounded && d.components[c].winding == 0,
        PointLocation::Unresolved { winding: 0 } => d.enclosed_by_subloop(zero),
        _ => false,
    };
    let location = match loc {
        PointLocation::Component(c) => {
            format!("component {} (winding {}, {})", c, d.components[c].winding, if d.components[c].unbounded { "unbounded" } else { "bounded" })
        }
        PointLocation::Curve { left, right, .. } => format!("on the curve (side windings {left}, {right})"),
        PointLocation::Intersection(k) => format!("at intersection point {k}"),
        PointLocation::Unresolved { winding } => format!("unresolved cell (winding {winding})"),
    };
    ZeroFacts {
        location,
        distance_to_curve: dist,
        on_curve,
        in_intersection_set: in_o,
        winding,
        unbounded_of_curve: d.in_unbounded_complement(zero, ComplementMode::ComplementOfCurve).ok(),
        unbounded_of_spectrum: d.in_unbounded_complement(zero, ComplementMode::ComplementOfSpectrum).ok(),
        unbounded_of_interior: d.in_unbounded_complement(zero, ComplementMode::ComplementOfInteriorSpectrum).ok(),
        interior_spectrum: d.in_interior_spectrum(zero),
        bounded_zero_component,
    }
}

fn disk_search(d: &RegionDecomposition, directions: usize) -> DiskSearch {
    let scale = d.discretization().scale().max(1e-12);
    let tol = d.prox_tol;
    let rho_min = (10.0 * tol).max(1e-9 * scale);
    let feasible = |c: C64, rho: f64| {
        let (dist, _) = d.distance_to_curve(c);
        dist >= rho - tol && matches!(d.in_unbounded_complement(c, ComplementMode::ComplementOfCurve), Ok(true))
    };
    let mut best = DiskSearch { found: false, radius: 0.0, center: C64::new(0.0, 0.0), directions };
    for k in 0..directions {
        let dir = C64::from_polar(1.0, 2.0 * PI * k as f64 / directions as f64);
        if !feasible(dir * rho_min, rho_min) {
            continue;
        }
        // Disks touching 0 along one direction are nested, so feasibility is
        // monotone in the radius.
        let (mut lo, mut hi) = (rho_min, rho_min);
        while hi < 10.0 * scale && feasible(dir * (2.0 * hi), 2.0 * hi) {
            hi *= 2.0;
            lo = hi;
        }
        if hi < 10.0 * scale {
            hi *= 2.0;
            for _ in 0..30 {
                let mid = 0.5 * (lo + hi);
                if feasible(dir * mid, mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
        if lo > best.radius {
            best = DiskSearch { found: true, radius: lo, center: dir * lo, directions };
        }
    }
    best
}

fn regularity(symbol: &Symbol) -> Regularity {
    let m = match symbol.sample_count() {
        Some(m) => m.next_power_of_two().max(256),
        None => {
            let sum = symbol.fourier_coefficients().map(|(_, c)| c.iter().map(|z| z.norm()).sum()).unwrap_or(0.0);
            return Regularity {
                wiener_sum: sum,
                wiener_increment: 0.0,
                dini_integral: 0.0,
                dini_increment: 0.0,
                wiener_confident: true,
                dini_confident: true,
            };
        }
    };
    let partial = |n: i64| (-n..=n).map(|k| symbol.coefficient(k).norm()).sum::<f64>();
    let (s1, s2) = (partial(m as i64 / 8), partial(m as i64 / 4));
    let wiener_increment = if s2 > 0.0 { (s2 - s1) / s2 } else { 0.0 };
    let values: Vec<C64> = (0..m).map(|i| symbol.evaluate(2.0 * PI * i as f64 / m as f64)).collect();
    let omega = |shift: usize| (0..m).map(|i| (values[(i + shift) % m] - values[i]).norm()).fold(0.0, f64::max);
    // ∫ ω(δ)/δ dδ on dyadic scales δ = 2πk/m.
    let mut integral = 0.0;
    let mut shift = 1;
    let mut first = 0.0;
    while shift <= m / 2 {
        let term = omega(shift) * std::f64::consts::LN_2;
        if shift == 1 {
            first = term;
        }
        integral += term;
        shift *= 2;
    }
    let dini_increment = if integral > 0.0 { first / integral } else { 0.0 };
    Regularity {
        wiener_sum: s2,
        wiener_increment,
        dini_integral: integral,
        dini_increment,
        wiener_confident: wiener_increment < 1e-3,
        dini_confident: dini_increment < 1e-2,
    }
}

/// Run every upstream analysis the rules need.
pub fn analyze(symbol: &Symbol, config: &AnalysisConfig) -> Result<Analysis, VerdictError> {
    config.validate()?;
    let disc = symbol.discretize(symbol.default_step())?;
    let opts = TopologyOptions { resolution: config.resolution, ..Default::default() };
    let decomposition = curve_topology::region_decomposition(&disc, &opts)?;
    let hypotheses = symbol::check_hypotheses_with(symbol, &disc, Some(&decomposition.intersections), Some(&decomposition));
    let (w_plus, w_plus_error) = match curve_topology::w_plus(symbol, &disc) {
        Ok(w) => (Some(w), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let zero = zero_facts(&decomposition, &disc);

    let t1 = symbol.toeplitz_truncation(config.n)?;
    let t2 = symbol.toeplitz_truncation(2 * config.n)?;
    let w1 = spectral::numerical_range(&t1.matrix, config.numrange_angles);
    let w2 = spectral::numerical_range(&t2.matrix, config.numrange_angles);
    let curve_sep = (0..config.numrange_angles.max(8))
        .map(|i| {
            let rot = C64::from_polar(1.0, -2.0 * PI * i as f64 / config.numrange_angles.max(8) as f64);
            -disc.points.iter().map(|p| (p * rot).re).fold(f64::NEG_INFINITY, f64::max)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let numrange = NumRangeFacts {
        n: config.n,
        separation_n: support_separation(&w1.samples),
        separation_2n: support_separation(&w2.samples),
        separation_curve: curve_sep,
        margin: 1e-6 * disc.scale().max(1e-12),
        numerical_radius_n: w1.numerical_radius(),
    };
    let disk = disk_search(&decomposition, config.disk_directions);
    let summary = AnalysisSummary {
        analysis_schema: ANALYSIS_SCHEMA,
        symbol: symbol.to_spec(),
        config: config.clone(),
        analytic: symbol.is_analytic(),
        decomposition: decomposition.report(),
        hypotheses,
        w_plus,
        w_plus_error,
        zero,
        numrange,
        disk,
        regularity: regularity(symbol),
    };
    Ok(Analysis { symbol: symbol.clone(), disc, decomposition, summary })
}

/// Re-run [`analyze`] from a summary.
pub fn analyze_summary(summary: &AnalysisSummary) -> Result<Analysis, VerdictError> {
    analyze(&summary.symbol.build()?, &summary.config)
}

/// One evaluated rule.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Evidence {
    pub rule: String,
    /// Preconditions hold.
    pub applicable: bool,
    /// Conclusion of the rule when applicable (`None` when it yields no status).
    pub status: Option<Status>,
    pub decisive: bool,
    pub citation: String,
    pub p_range: PRange,
    /// Failed precondition or the reason for the outcome.
    pub reason: String,
    pub witnesses: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl Evidence {
    fn new(rule: &str, citation: &str, p_range: PRange) -> Self {
        Evidence {
            rule: rule.into(),
            applicable: false,
            status: None,
            decisive: false,
            citation: citation.into(),
            p_range,
            reason: String::new(),
            witnesses: BTreeMap::new(),
            notes: vec![],
        }
    }

    fn fail(mut self, reason: impl Into<String>) -> Self {
        self.reason = reason.into();
        self
    }

    fn fire(mut self, status: Status, reason: impl Into<String>) -> Self {
        self.applicable = true;
        self.status = Some(status);
        self.decisive = status != Status::Unknown;
        self.reason = reason.into();
        self
    }

    fn w(mut self, key: &str, v: f64) -> Self {
        self.witnesses.insert(key.into(), v);
        self
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Verdict {
    pub verdict_schema: u32,
    pub status: Status,
    pub fired_rule: Option<String>,
    pub p: f64,
    pub p_qualifier: String,
    pub truncation_order: usize,
    pub evidence: Vec<Evidence>,
    pub hypotheses: HypothesisReport,
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_fig8: Option<IdentityReport>,
}

fn b(x: bool) -> f64 {
    if x {
        1.0
    } else {
        0.0
    }
}

fn opt(x: Option<bool>) -> f64 {
    x.map_or(-1.0, b)
}

fn h123bis(h: &HypothesisReport) -> bool {
    h.h1 && h.h2 && h.h3bis
}

fn hyp_reason(h: &HypothesisReport) -> String {
    let mut v = vec![];
    if !h.h1 {
        v.push("H1 fails");
    }
    if !h.h2 {
        v.push("H2 fails");
    }
    if !h.h3bis {
        v.push("H3bis fails");
    }
    v.join(", ")
}

fn intersection_notes(d: &DecompositionReport) -> Vec<String> {
    d.intersections
        .points
        .iter()
        .map(|p| {
            format!(
                "intersection at ({:.6}, {:.6}): {:?}, sectors {:?}, {}",
                p.location.re,
                p.location.im,
                p.classification,
                p.sector_windings,
                if p.tangential { "tangential" } else { "transversal" }
            )
        })
        .collect()
}

/// Type I points on `∂Ω₁ ∩ ∂Ω₂`.
fn type_one_between_one_and_two(d: &DecompositionReport) -> usize {
    d.intersections
        .points
        .iter()
        .filter(|p| {
            p.classification == IntersectionType::TypeI
                && p.sector_windings.iter().any(|w| w.abs() == 1)
                && p.sector_windings.iter().any(|w| w.abs() == 2)
        })
        .count()
}

fn rule_evidence(s: &AnalysisSummary, p: f64, model: Option<&IdentityReport>) -> Vec<Evidence> {
    let z = &s.zero;
    let h = &s.hypotheses;
    let d = &s.decomposition;
    let mut out = Vec::new();

    let e = Evidence::new("R1", "Fact 2.3 (ii): 0 in the unbounded component of C minus F(T)", PRange::AllP)
        .w("distance_to_curve", z.distance_to_curve)
        .w("unbounded_of_curve", opt(z.unbounded_of_curve));
    out.push(match z.unbounded_of_curve {
        Some(true) => e.fire(Status::Embeddable, "0 lies in the unbounded component"),
        Some(false) => e.fail("0 lies in a bounded component"),
        None => e.fail("0 is on the curve"),
    });

    let e = Evidence::new("R2", "Fact 2.3 (i) with Theorem 2.2: Fredholm with nonzero index", PRange::AllP)
        .w("winding_at_0", z.winding.map_or(f64::NAN, |w| w as f64));
    out.push(match z.winding {
        Some(w) if w != 0 => e.fire(Status::NotEmbeddable, format!("0 is off the curve with winding {w}")),
        Some(_) => e.fail("winding at 0 is zero, so 0 is not in the spectrum"),
        None => e.fail("0 is on the curve"),
    });

    let e = Evidence::new("R3", "Analytic symbol criterion: F has no zero in the disc", PRange::AllP)
        .w("analytic", b(s.analytic))
        .w("winding_at_0", z.winding.map_or(f64::NAN, |w| w as f64));
    out.push(match (s.analytic, z.winding) {
        (false, _) => e.fail("symbol has negative Fourier modes"),
        (true, None) => e.fail("0 is on the curve"),
        (true, Some(0)) => e.fire(Status::Embeddable, "analytic symbol with no zeros in the disc"),
        (true, Some(w)) => e.fail(format!("F has {w} zeros in the disc")),
    });

    let mut e = Evidence::new("R4", "Corollary 5.3: negative Ahern-Clark index", PRange::AllP);
    out.push(match &s.w_plus {
        Some(w) => {
            e = e.w("w_plus", w.value).w("w_plus_raw", w.raw).w("zero_count", w.zero_count as f64);
            if !w.validity {
                e.fail("F' vanishes or the index is not an integer")
            } else if w.value < 0.0 {
                e.fire(Status::NotEmbeddable, format!("w+ = {} < 0 gives a finite nonzero kernel", w.value))
            } else {
                e.fail(format!("w+ = {} >= 0", w.value))
            }
        }
        None => e.fail(format!("w+ unavailable: {}", s.w_plus_error.clone().unwrap_or_default())),
    });

    let e = Evidence::new("R5", "Theorem 1.2: 0 in the unbounded component of C minus int(sigma)", PRange::AllP)
        .w("unbounded_of_interior", opt(z.unbounded_of_interior));
    out.push(if !h123bis(h) {
        e.fail(hyp_reason(h))
    } else {
        match z.unbounded_of_interior {
            Some(true) => e.fire(Status::Embeddable, "0 is in the unbounded component of C minus int(sigma)"),
            Some(false) => e.fail("0 is not in the unbounded component of C minus int(sigma)"),
            None => e.fail("location of 0 undecided at this resolution"),
        }
    });

    let e = Evidence::new("R6", "Proposition 5.5: interior points of the spectrum outside the intersection set", PRange::AllP)
        .w("interior_spectrum", opt(z.interior_spectrum))
        .w("in_intersection_set", b(z.in_intersection_set));
    out.push(if !h123bis(h) {
        e.fail(hyp_reason(h))
    } else if z.in_intersection_set {
        e.fail("0 is an intersection point")
    } else {
        match z.interior_spectrum {
            Some(true) => e.fire(Status::NotEmbeddable, "0 lies in int(sigma) away from the intersection set"),
            _ => e.fail("0 is not in int(sigma)"),
        }
    });

    let jordan = d.intersections.points.is_empty() && !d.intersections.overlap;
    let e = Evidence::new("R7", "Theorem 4.5: Jordan curve", PRange::AllP)
        .w("intersections", d.intersections.points.len() as f64)
        .w("interior_spectrum", opt(z.interior_spectrum));
    out.push(if !jordan {
        e.fail("curve has self-intersections")
    } else if !h.h1 {
        e.fail("H1 fails")
    } else {
        match z.interior_spectrum {
            Some(false) => e.fire(Status::Embeddable, "0 is not in int(sigma)"),
            Some(true) => e.fire(Status::NotEmbeddable, "0 is in int(sigma)"),
            None => e.fail("location of 0 undecided at this resolution"),
        }
    });

    let connected = d.complement_of_interior_connected;
    let e = Evidence::new("R8", "Theorem 1.3: connected complement of int(sigma), 0 not an intersection point", PRange::AllP)
        .w("complement_connected", b(connected))
        .w("in_intersection_set", b(z.in_intersection_set))
        .w("interior_spectrum", opt(z.interior_spectrum));
    out.push(if !h123bis(h) {
        e.fail(hyp_reason(h))
    } else if !connected {
        e.fail("C minus int(sigma) is not connected")
    } else if z.in_intersection_set {
        e.fail("0 is an intersection point")
    } else {
        match z.interior_spectrum {
            Some(false) => e.fire(Status::Embeddable, "0 is in C minus int(sigma)"),
            Some(true) => e.fire(Status::NotEmbeddable, "0 is in int(sigma)"),
            None => e.fail("location of 0 undecided at this resolution"),
        }
    });

    let simple = d.intersections.points.iter().all(|p| p.is_simple()) && !d.intersections.overlap;
    let type_one = type_one_between_one_and_two(d);
    let mut e = Evidence::new("R9", "Corollary 5.7: simple intersections, no Type I between windings 1 and 2", PRange::AllP)
        .w("complement_connected", b(connected))
        .w("all_simple", b(simple))
        .w("type_one_on_omega1_omega2", type_one as f64)
        .w("interior_spectrum", opt(z.interior_spectrum));
    e.notes = intersection_notes(d);
    out.push(if !(h.h1 && h.h2 && h.h3) {
        e.fail(format!("H1, H2 and H3 required: h1={} h2={} h3={}", h.h1, h.h2, h.h3))
    } else if !connected {
        e.fail("C minus int(sigma) is not connected")
    } else if !simple {
        e.fail("not all intersections are simple")
    } else if type_one > 0 {
        e.fail("a Type I intersection lies on the common boundary of the winding 1 and 2 regions")
    } else {
        match z.interior_spectrum {
            Some(false) => e.fire(Status::Embeddable, "0 is in C minus int(sigma)"),
            Some(true) => e.fire(Status::NotEmbeddable, "0 is in int(sigma)"),
            None => e.fail("location of 0 undecided at this resolution"),
        }
    });

    let nr = &s.numrange;
    let e = Evidence::new("R10", "Theorem 1.6: 0 outside the numerical range", PRange::P2Only)
        .w("separation_n", nr.separation_n)
        .w("separation_2n", nr.separation_2n)
        .w("separation_curve_hull", nr.separation_curve)
        .w("margin", nr.margin)
        .w("n", nr.n as f64);
    out.push(if p != 2.0 {
        e.fail("requires p = 2")
    } else if nr.separation_n > nr.margin && nr.separation_2n > nr.margin && nr.separation_curve > nr.margin {
        e.fire(Status::Embeddable, "0 is strictly outside the numerical range at n and 2n and outside the curve hull")
    } else {
        e.fail("0 is not strictly outside the numerical range hulls")
    });

    let dk = &s.disk;
    let rg = &s.regularity;
    let e = Evidence::new("R11", "Theorem 8.14 / Corollary 8.16: disk in the resolvent set touching 0", PRange::P2Only)
        .w("disk_radius", dk.radius)
        .w("disk_center_re", dk.center.re)
        .w("disk_center_im", dk.center.im)
        .w("wiener_increment", rg.wiener_increment)
        .w("dini_increment", rg.dini_increment);
    out.push(if p != 2.0 {
        e.fail("requires p = 2")
    } else if !rg.high_confidence() {
        e.fail("Wiener or Dini membership not established with high confidence")
    } else if !dk.found {
        e.fail("no disk in the unbounded component has 0 on its boundary")
    } else {
        e.fire(Status::Embeddable, format!("disk of radius {:.6e} found", dk.radius))
    });

    let windings: Vec<i64> = d.components.iter().map(|c| c.winding.abs()).collect();
    let fig8 = windings.contains(&1) && windings.contains(&2) && z.bounded_zero_component;
    let mut e = Evidence::new(
        "R12",
        "Theorem 1.5 conditions (2)(i)-(iii): continuation of the inverse parametrization and boundedness",
        PRange::AllP,
    )
    .w("bounded_zero_component", b(z.bounded_zero_component));
    if let Some(m) = model {
        e = e.w("model_group_residual", m.group_residual).w("model_unit_residual", m.unit_residual);
        e.notes.push(format!("model semigroup checked on {} trials (seed {})", m.trials, m.seed));
    }
    out.push(if fig8 {
        e.fire(Status::Unknown, "figure-eight geometry with 0 in the bounded zero-winding component")
    } else {
        e.fail("no figure-eight geometry with 0 in a bounded zero-winding component")
    });
    out
}

/// Evaluate the rules in order; the first decisive one wins.
pub fn decide(analysis: &Analysis, p: f64, model: Option<&ModelSemigroup>, trials: usize) -> Verdict {
    let report = model.and_then(|m| model_fig8::verify_identities(m, trials, analysis.summary.config.seed).ok());
    decide_summary(&analysis.summary, p, report)
}

/// [`decide`] on a summary with optional model evidence.
pub fn decide_summary(s: &AnalysisSummary, p: f64, model: Option<IdentityReport>) -> Verdict {
    let evidence = rule_evidence(s, p, model.as_ref());
    let fired = evidence.iter().find(|e| e.decisive).or_else(|| evidence.iter().find(|e| e.rule == "R12" && e.applicable));
    let (status, fired_rule, p_range) = match fired {
        Some(e) => (e.status.unwrap_or(Status::Unknown), Some(e.rule.clone()), e.p_range),
        None => (Status::Unknown, None, PRange::AllP),
    };
    let mut notes = vec![format!("matrix rules use truncation order n = {}; no infinite-dimensional claim is made", s.config.n)];
    if !s.hypotheses.h1 {
        notes.push("H1 fails: the geometric criteria relying on smoothness do not apply".into());
    }
    Verdict {
        verdict_schema: VERDICT_SCHEMA,
        status,
        fired_rule,
        p,
        p_qualifier: p_range.describe().into(),
        truncation_order: s.config.n,
        evidence,
        hypotheses: s.hypotheses.clone(),
        notes,
        model_fig8: model,
    }
}

/// Deterministic text report: one line per rule, fired rule marked.
pub fn explain(v: &Verdict) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "verdict: {:?} (rule {}) for p = {}; {}",
        v.status,
        v.fired_rule.as_deref().unwrap_or("none"),
        v.p,
        v.p_qualifier
    );
    for e in &v.evidence {
        let mark = if v.fired_rule.as_deref() == Some(e.rule.as_str()) { ">>" } else { "  " };
        let state = match (e.applicable, e.status) {
            (true, Some(st)) => format!("{st:?}"),
            _ => "inapplicable".into(),
        };
        let w: Vec<String> = e.witnesses.iter().map(|(k, x)| format!("{k}={x:e}")).collect();
        let _ = writeln!(s, "{mark} {:<4} {:<14} [{}] {}: {} | {}", e.rule, state, e.citation, e.p_range.describe(), e.reason, w.join(" "));
        for n in &e.notes {
            let _ = writeln!(s, "          {n}");
        }
    }
    for n in &v.notes {
        let _ = writeln!(s, "note: {n}");
    }
    if let Some(m) = &v.model_fig8 {
        let _ = writeln!(s, "model semigroup: group residual {:e}, unit residual {:e}", m.group_residual, m.unit_residual);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn run(f: &Symbol, p: f64) -> Verdict {
        let a = analyze(f, &AnalysisConfig { n: 16, ..Default::default() }).unwrap();
        decide(&a, p, None, 0)
    }

    #[test]
    fn z_plus_two_is_r1() {
        let v = run(&fixtures::z_plus_2(), 2.0);
        assert_eq!((v.status, v.fired_rule.as_deref()), (Status::Embeddable, Some("R1")));
        assert!(explain(&v).contains("Fact 2.3"));
    }

    #[test]
    fn reciprocal_is_r2() {
        let v = run(&fixtures::recip_z(), 2.0);
        assert_eq!((v.status, v.fired_rule.as_deref()), (Status::NotEmbeddable, Some("R2")));
    }

    #[test]
    fn unknown_lists_reasons() {
        let v = run(&fixtures::cube_root_symbol(2048), 2.5);
        assert_eq!(v.status, Status::Unknown);
        assert!(v.evidence.iter().filter(|e| !e.applicable).all(|e| !e.reason.is_empty()));
        assert!(!v.hypotheses.h1);
    }
}
