//! Contours in the closed right half plane, phase-increment winding numbers,
//! `D` versus `D⁰` comparison, Rouché threshold search and the stability
//! verdict.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::eigensystem::wedge_bound;
use crate::error::{domain, Error, Result};
use crate::evans_core::{evans_on_contour, EvansConfig, EvansModel, EvansValue};
use crate::shock_model::{Model, ShockParams};

pub const DEFAULT_RADIUS: f64 = 10.0;
pub const DEFAULT_INDENTATION: f64 = 1e-4;
pub const MIN_POINTS: usize = 16;
/// Values closer than this to the origin cannot be wound around.
pub const ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContourShape {
    Semicircle,
    /// Arbitrary user-supplied ordered samples.
    Custom,
}

/// Indices describing how a conjugate-symmetric contour folds onto its upper half.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MirrorPlan {
    /// Contiguous run of samples with `Im λ ≥ 0`, starting at the real seed `λ = R`.
    pub path: Vec<usize>,
    /// `samples[mirror[i]] == conj(samples[i])`.
    pub mirror: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub shape: ContourShape,
    pub radius: f64,
    pub indentation: f64,
    samples: Vec<C64>,
    plan: Option<MirrorPlan>,
}

impl Contour {
    pub fn from_samples(samples: Vec<C64>) -> Self {
        let radius = samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
        Self { shape: ContourShape::Custom, radius, indentation: 0.0, samples, plan: None }
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    pub fn n_points(&self) -> usize {
        self.samples.len()
    }

    pub fn mirror_plan(&self) -> Option<&MirrorPlan> {
        self.plan.as_ref()
    }

    /// Whether sample `k` belongs to the small arc around the origin (endpoints included).
    pub fn on_indentation(&self, k: usize) -> bool {
        self.shape == ContourShape::Semicircle && self.samples[k].norm() <= self.indentation * (1.0 + 1e-9)
    }
}

/// Semicircle `∂({Re λ ≥ 0} ∩ {|λ| ≤ R})` with the default origin indentation.
pub fn build_contour(radius: f64, n_points: usize) -> Result<Contour> {
    build_contour_with(radius, n_points, DEFAULT_INDENTATION)
}

/// Counterclockwise samples starting at `−iR`: outer arc through `R`, down
/// the imaginary axis to `iρ`, around the indentation, and back down to the
/// last sample above `−iR`. Spacing follows arc length, twice as dense inside
/// the unit disc.
pub fn build_contour_with(radius: f64, n_points: usize, indentation: f64) -> Result<Contour> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(domain(format!("radius must be positive, got {radius}")));
    }
    if !(indentation > 0.0 && indentation < radius) {
        return Err(domain(format!("indentation {indentation} must lie in (0, radius)")));
    }
    if n_points < MIN_POINTS {
        return Err(domain(format!("n_points must be >= {MIN_POINTS}, got {n_points}")));
    }
    let (r, rho) = (radius, indentation);
    let density = |s: f64| if s < 1.0 { 2.0 } else { 1.0 };
    // Weighted lengths of the upper-half pieces.
    let w_arc = FRAC_PI_2 * r * density(r);
    let w_seg = 2.0 * (r.min(1.0) - rho) + (r - 1.0).max(0.0);
    let w_small = FRAC_PI_2 * rho * 2.0;
    // n = 4 corners + R + 2 (k + s + t) + [ρ if n even]
    let with_rho = n_points % 2 == 0;
    let interior = (n_points - 5 - usize::from(with_rho)) / 2;
    let total = w_arc + w_seg + w_small;
    let t = ((interior as f64) * w_small / total).round() as usize;
    let rest = interior - t;
    let s = (((rest as f64) * w_seg / (w_arc + w_seg)).round() as usize).clamp(1, rest - 1);
    let k = rest - s;

    let i = C64::new(0.0, 1.0);
    let arc: Vec<C64> = (1..=k).map(|j| C64::from_polar(r, j as f64 * PI / (2 * k + 2) as f64)).collect();
    let seg: Vec<C64> = (1..=s)
        .map(|j| {
            let tau = j as f64 * w_seg / (s + 1) as f64;
            let hi = (r - 1.0).max(0.0);
            let y = if tau <= hi { r - tau } else { r.min(1.0) - (tau - hi) / 2.0 };
            i * y
        })
        .collect();
    let small_den = if with_rho { 2 * t + 2 } else { 2 * t + 1 } as f64;
    let small: Vec<C64> = (1..=t).map(|j| C64::from_polar(rho, FRAC_PI_2 - j as f64 * PI / small_den)).collect();

    let mut samples = Vec::with_capacity(n_points);
    samples.push(-i * r);
    samples.extend(arc.iter().rev().map(|z| z.conj()));
    let seed = samples.len();
    samples.push(C64::new(r, 0.0));
    samples.extend(arc.iter().copied());
    samples.push(i * r);
    samples.extend(seg.iter().copied());
    samples.push(i * rho);
    samples.extend(small.iter().copied());
    if with_rho {
        samples.push(C64::new(rho, 0.0));
    }
    let path_end = samples.len();
    samples.extend(small.iter().rev().map(|z| z.conj()));
    samples.push(-i * rho);
    samples.extend(seg.iter().rev().map(|z| z.conj()));
    debug_assert_eq!(samples.len(), n_points);

    let path: Vec<usize> = (seed..path_end).collect();
    let mut mirror: Vec<usize> = (0..n_points).collect();
    for &p in &path {
        if samples[p].im != 0.0 {
            let q = samples.iter().position(|z| *z == samples[p].conj()).expect("conjugate sample present");
            mirror[p] = q;
            mirror[q] = p;
        }
    }
    Ok(Contour {
        shape: ContourShape::Semicircle,
        radius,
        indentation,
        samples,
        plan: Some(MirrorPlan { path, mirror }),
    })
}

/// Winding number with its phase-step certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Winding {
    pub winding_number: i64,
    /// Total phase change divided by 2π (non-integer for open curves).
    pub turns: f64,
    pub max_increment: f64,
    /// Every increment stayed below π/2.
    pub certified: bool,
}

fn phase_increments(values: &[C64], closed: bool) -> Result<Vec<f64>> {
    if let Some(k) = values.iter().position(|z| !(z.norm() > ZERO_TOL)) {
        return Err(Error::ZeroOnContour { index: k, tol: ZERO_TOL });
    }
    let n = values.len();
    let m = if closed { n } else { n.saturating_sub(1) };
    Ok((0..m)
        .map(|k| {
            let d = (values[(k + 1) % n] * values[k].conj()).arg();
            if d <= -PI {
                PI
            } else {
                d
            }
        })
        .collect())
}

/// Phase-increment winding number without failing on coarse sampling.
pub fn winding_certificate(values: &[C64], closed: bool) -> Result<Winding> {
    let inc = phase_increments(values, closed)?;
    let total: f64 = inc.iter().sum();
    let max_increment = inc.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let turns = total / (2.0 * PI);
    Ok(Winding { winding_number: turns.round() as i64, turns, max_increment, certified: max_increment < FRAC_PI_2 })
}

/// Winding number about the origin; fails unless every phase step is below π/2.
pub fn winding_number(values: &[C64], closed: bool) -> Result<Winding> {
    let w = winding_certificate(values, closed)?;
    if !w.certified {
        return Err(Error::InsufficientSampling { max_increment: w.max_increment });
    }
    Ok(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    pub argmax_rel: C64,
    pub argmax_abs: C64,
}

/// Pointwise statistics of `|D − D⁰|` over matched samples.
pub fn compare_values(d: &[EvansValue], d0: &[EvansValue]) -> Result<Comparison> {
    if d.len() != d0.len() || d.is_empty() {
        return Err(domain(format!("cannot compare {} samples with {}", d.len(), d0.len())));
    }
    let mut c = Comparison { max_rel_error: 0.0, max_abs_error: 0.0, argmax_rel: d[0].lambda, argmax_abs: d[0].lambda };
    for (a, b) in d.iter().zip(d0) {
        if a.lambda != b.lambda {
            return Err(domain("comparison samples are not aligned"));
        }
        let abs = (a.d - b.d).norm();
        let rel = abs / b.d.norm();
        if rel > c.max_rel_error {
            c.max_rel_error = rel;
            c.argmax_rel = a.lambda;
        }
        if abs > c.max_abs_error {
            c.max_abs_error = abs;
            c.argmax_abs = a.lambda;
        }
    }
    Ok(c)
}

pub fn limiting_values(contour: &Contour, cfg: &EvansConfig) -> Result<Vec<EvansValue>> {
    evans_on_contour(contour, &EvansModel::Limiting, cfg)
}

pub fn finite_values(params: ShockParams, contour: &Contour, cfg: &EvansConfig) -> Result<Vec<EvansValue>> {
    let model = EvansModel::build(Model::FiniteMach(params), cfg)?;
    evans_on_contour(contour, &model, cfg)
}

/// `max |D − D⁰|/|D⁰|` and `max |D − D⁰|` over the contour.
pub fn compare_to_limit(gamma: f64, v_plus: f64, contour: &Contour, cfg: &EvansConfig) -> Result<Comparison> {
    let params = ShockParams::new(gamma, v_plus)?;
    let d0 = limiting_values(contour, cfg)?;
    let d = finite_values(params, contour, cfg)?;
    compare_values(&d, &d0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoucheBound {
    pub gamma: f64,
    pub threshold: f64,
    pub v_plus: f64,
    pub mach: f64,
    /// `max |D − D⁰|/|D⁰|` at the returned `v_plus`.
    pub rel_error: f64,
    pub bracket: (f64, f64),
    /// Every `(v₊, max relative error)` pair evaluated, in evaluation order.
    pub evaluations: Vec<(f64, f64)>,
}

/// Search for the `v₊` at which `max |D − D⁰|/|D⁰|` equals `threshold`.
///
/// Bisection in `log v₊` on `interval`; every new evaluation is checked to
/// be consistent with a monotone increasing relation, and the final value is
/// placed by log-linear interpolation inside the last bracket.
pub fn rouche_bound_search(
    gamma: f64,
    threshold: f64,
    contour: &Contour,
    interval: (f64, f64),
    tol: f64,
    cfg: &EvansConfig,
) -> Result<RoucheBound> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(domain(format!("threshold must lie in (0, 1], got {threshold}")));
    }
    let (mut lo, mut hi) = interval;
    if !(lo > 0.0 && hi > lo && hi <= 1.0) {
        return Err(domain(format!("invalid search interval {interval:?}")));
    }
    if !(tol > 0.0) {
        return Err(domain(format!("tolerance must be positive, got {tol}")));
    }
    let d0 = limiting_values(contour, cfg)?;
    let mut evaluations: Vec<(f64, f64)> = Vec::new();
    let rel = |v: f64, evals: &mut Vec<(f64, f64)>| -> Result<f64> {
        let d = finite_values(ShockParams::new(gamma, v)?, contour, cfg)?;
        let r = compare_values(&d, &d0)?.max_rel_error;
        evals.push((v, r));
        // Monotone increasing in v₊ across everything seen so far.
        let mut seen = evals.clone();
        seen.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(w) = seen.windows(2).find(|w| w[1].1 < w[0].1) {
            return Err(Error::NonMonotone { v_plus: w[1].0 });
        }
        Ok(r)
    };
    let mut f_lo = rel(lo, &mut evaluations)?;
    let mut f_hi = rel(hi, &mut evaluations)?;
    if !(f_lo < threshold && f_hi > threshold) {
        return Err(Error::Bracket { threshold, lo, hi, f_lo, f_hi });
    }
    while hi - lo > tol * lo {
        let mid = (lo * hi).sqrt();
        let f = rel(mid, &mut evaluations)?;
        if f < threshold {
            lo = mid;
            f_lo = f;
        } else {
            hi = mid;
            f_hi = f;
        }
    }
    let t = (threshold - f_lo) / (f_hi - f_lo);
    let v_star = (lo.ln() + t * (hi.ln() - lo.ln())).exp();
    let rel_error = rel(v_star, &mut evaluations)?;
    let params = ShockParams::new(gamma, v_star)?;
    Ok(RoucheBound { gamma, threshold, v_plus: v_star, mach: params.mach, rel_error, bracket: (lo, hi), evaluations })
}

/// What is being certified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    Limiting,
    FiniteMach { gamma: f64, v_plus: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub radius: f64,
    pub n_points: usize,
    pub indentation: f64,
    /// Number of sample doublings allowed after the first attempt.
    pub refinement_budget: usize,
    pub compare_to_limit: bool,
    pub evans: EvansConfig,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            radius: DEFAULT_RADIUS,
            n_points: 256,
            indentation: DEFAULT_INDENTATION,
            refinement_budget: 3,
            compare_to_limit: true,
            evans: EvansConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    StableCertified,
    RoucheTransfer,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinementStep {
    pub n_points: usize,
    pub winding_number: i64,
    pub max_increment: f64,
    pub certified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourSample {
    pub lambda: C64,
    pub d: Option<C64>,
    pub d0: Option<C64>,
    pub conservation_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub target: Target,
    pub config: StudyConfig,
    pub winding_number: Option<i64>,
    pub min_modulus: f64,
    pub max_rel_error: Option<f64>,
    pub max_abs_error: Option<f64>,
    /// Winding number of `D⁰` on the same contour, when compared.
    pub reference_winding: Option<i64>,
    pub verdict: Verdict,
    pub diagnostic: Option<String>,
    pub warnings: Vec<String>,
    pub refinement: Vec<RefinementStep>,
    pub samples: Vec<ContourSample>,
}

/// Smallest `|D|` away from the origin indentation.
pub fn min_modulus(contour: &Contour, values: &[EvansValue]) -> f64 {
    values
        .iter()
        .enumerate()
        .filter(|(k, _)| !contour.on_indentation(*k))
        .map(|(_, v)| v.d.norm())
        .fold(f64::INFINITY, f64::min)
}

struct Attempt {
    contour: Contour,
    values: Vec<EvansValue>,
    winding: Winding,
}

/// Evaluate and wind, doubling the samples until the certificate holds or the budget is spent.
fn refine(model: &EvansModel, cfg: &StudyConfig, trace: &mut Vec<RefinementStep>) -> Result<std::result::Result<Attempt, String>> {
    let mut last = String::new();
    for r in 0..=cfg.refinement_budget {
        let n = cfg.n_points << r;
        let contour = build_contour_with(cfg.radius, n, cfg.indentation)?;
        let values = match evans_on_contour(&contour, model, &cfg.evans) {
            Ok(v) => v,
            Err(Error::BranchFlip { index, lambda }) => {
                last = format!("branch flip at sample {index} (lambda = {lambda}) with {n} samples");
                continue;
            }
            Err(e) => return Err(e),
        };
        let d: Vec<C64> = values.iter().map(|v| v.d).collect();
        let winding = match winding_certificate(&d, true) {
            Ok(w) => w,
            Err(e @ Error::ZeroOnContour { .. }) => return Ok(Err(e.to_string())),
            Err(e) => return Err(e),
        };
        trace.push(RefinementStep {
            n_points: n,
            winding_number: winding.winding_number,
            max_increment: winding.max_increment,
            certified: winding.certified,
        });
        if winding.certified {
            return Ok(Ok(Attempt { contour, values, winding }));
        }
        last = format!("phase increment {:.4} rad >= pi/2 with {n} samples", winding.max_increment);
    }
    Ok(Err(format!("refinement budget exhausted: {last}")))
}

/// Count enclosed zeros of `D` (or `D⁰`) and decide stability.
pub fn certify_stability(target: Target, cfg: &StudyConfig) -> Result<StabilityReport> {
    let mut warnings = Vec::new();
    let gamma = match target {
        Target::FiniteMach { gamma, .. } => Some(gamma),
        Target::Limiting => None,
    };
    let mut report = StabilityReport {
        target,
        config: *cfg,
        winding_number: None,
        min_modulus: f64::NAN,
        max_rel_error: None,
        max_abs_error: None,
        reference_winding: None,
        verdict: Verdict::Inconclusive,
        diagnostic: None,
        warnings: Vec::new(),
        refinement: Vec::new(),
        samples: Vec::new(),
    };
    if let Some(g) = gamma {
        let wb = wedge_bound(g)?;
        if cfg.radius < wb {
            warnings.push(format!("radius {} is below the wedge bound {wb:.4} for gamma = {g}", cfg.radius));
        }
    }
    let model = match target {
        Target::Limiting => EvansModel::Limiting,
        Target::FiniteMach { gamma, v_plus } => EvansModel::build(Model::FiniteMach(ShockParams::new(gamma, v_plus)?), &cfg.evans)?,
    };
    let mut trace = Vec::new();
    let attempt = refine(&model, cfg, &mut trace)?;
    report.refinement = trace;
    let attempt = match attempt {
        Ok(a) => a,
        Err(why) => {
            report.diagnostic = Some(why);
            report.warnings = warnings;
            return Ok(report);
        }
    };
    report.winding_number = Some(attempt.winding.winding_number);
    report.min_modulus = min_modulus(&attempt.contour, &attempt.values);
    report.samples = attempt
        .values
        .iter()
        .map(|v| ContourSample { lambda: v.lambda, d: Some(v.d), d0: None, conservation_defect: v.conservation_defect })
        .collect();

    let mut rouche_ok = false;
    if cfg.compare_to_limit && matches!(target, Target::FiniteMach { .. }) {
        let d0 = limiting_values(&attempt.contour, &cfg.evans)?;
        let c = compare_values(&attempt.values, &d0)?;
        report.max_rel_error = Some(c.max_rel_error);
        report.max_abs_error = Some(c.max_abs_error);
        for (s, v) in report.samples.iter_mut().zip(&d0) {
            s.d0 = Some(v.d);
        }
        let d0v: Vec<C64> = d0.iter().map(|v| v.d).collect();
        match winding_number(&d0v, true) {
            Ok(w) => {
                report.reference_winding = Some(w.winding_number);
                rouche_ok = w.winding_number == 0 && c.max_rel_error < 1.0;
            }
            Err(e) => warnings.push(format!("reference winding not certified: {e}")),
        }
        if c.max_rel_error >= 1.0 {
            warnings.push(format!("relative error {:.4} >= 1: Rouche transfer unavailable", c.max_rel_error));
        }
    }
    let radius_ok = gamma.map_or(true, |g| wedge_bound(g).map_or(false, |wb| cfg.radius >= wb));
    let (verdict, diagnostic) = if !radius_ok {
        (Verdict::Inconclusive, Some("contour does not enclose the eigenvalue wedge".to_string()))
    } else if rouche_ok {
        (Verdict::RoucheTransfer, None)
    } else if attempt.winding.winding_number == 0 {
        (Verdict::StableCertified, None)
    } else {
        (
            Verdict::Inconclusive,
            Some(format!("winding number {} != 0: zeros enclosed by the contour", attempt.winding.winding_number)),
        )
    };
    report.verdict = verdict;
    report.diagnostic = diagnostic;
    report.warnings = warnings;
    Ok(report)
}

/// One row of the `D` versus `D⁰` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferenceRow {
    pub v_plus: f64,
    pub mach: f64,
    pub result: std::result::Result<Comparison, String>,
}

/// Maximum differences for each `v₊`, reusing one `D⁰` evaluation. Failed rows are kept.
pub fn difference_table(gamma: f64, v_plus: &[f64], contour: &Contour, cfg: &EvansConfig) -> Result<Vec<DifferenceRow>> {
    if v_plus.is_empty() {
        return Ok(Vec::new());
    }
    let d0 = limiting_values(contour, cfg)?;
    Ok(v_plus
        .iter()
        .map(|&v| {
            let params = ShockParams::new(gamma, v);
            let mach = params.as_ref().map_or(f64::NAN, |p| p.mach);
            let result = params
                .and_then(|p| finite_values(p, contour, cfg))
                .and_then(|d| compare_values(&d, &d0))
                .map_err(|e| e.to_string());
            DifferenceRow { v_plus: v, mach, result }
        })
        .collect())
}
