//! Subcommand implementations. Each returns the run directory, the files
//! written, and the process exit code implied by the result.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use shock_evans::contour_stability::{
    build_contour_with, certify_stability, difference_table, limiting_values, rouche_bound_search, winding_certificate,
    Contour, StabilityReport, Target, Verdict,
};
use shock_evans::evans_core::{evans_on_contour, EvansModel, EvansValue};
use shock_evans::shock_model::{solve_profile, Model, ShockParams};
use shock_evans::Complex64 as C64;

use crate::config::RunConfig;
use crate::output::{fmt, RunDir};
use crate::svg::{self, Curve};

#[derive(Debug)]
pub struct Outcome {
    pub run_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub exit_code: i32,
    pub summary: String,
}

fn finish(dir: RunDir, exit_code: i32, summary: String) -> Outcome {
    Outcome { run_dir: dir.path, files: dir.files, exit_code, summary }
}

fn model(cfg: &RunConfig) -> Result<Model> {
    Ok(if cfg.limiting { Model::Limiting } else { Model::FiniteMach(ShockParams::new(cfg.gamma, cfg.v_plus)?) })
}

fn contour(cfg: &RunConfig) -> Result<Contour> {
    Ok(build_contour_with(cfg.radius, cfg.n_points, cfg.indentation)?)
}

/// Profile samples (`x, v̂`) and the serialized profile record.
pub fn cmd_profile(cfg: &RunConfig) -> Result<Outcome> {
    let m = model(cfg)?;
    let e = cfg.evans();
    let sol = solve_profile(m, cfg.centering, e.domain, cfg.profile_tol).context("profile solve failed")?;
    let record = sol.record(cfg.profile_samples);
    let mut dir = RunDir::create(cfg, "profile")?;
    let rows: Vec<Vec<String>> = record.samples.iter().map(|[x, v]| vec![fmt(*x), fmt(*v)]).collect();
    dir.write_csv("profile.csv", &["x", "v"], &rows)?;
    dir.write_json("profile.json", &record)?;
    let summary = format!("profile: {} samples, v(0) = {}", record.samples.len(), sol.eval(0.0)?);
    Ok(finish(dir, 0, summary))
}

fn evans_rows(values: &[EvansValue]) -> Vec<Vec<String>> {
    values
        .iter()
        .map(|v| vec![fmt(v.lambda.re), fmt(v.lambda.im), fmt(v.d.re), fmt(v.d.im), fmt(v.conservation_defect)])
        .collect()
}

const EVANS_HEADER: [&str; 5] = ["re_lambda", "im_lambda", "re_d", "im_d", "defect"];

#[derive(Serialize)]
struct ContourPayload<'a> {
    label: String,
    winding_number: Option<i64>,
    max_phase_increment: Option<f64>,
    values: &'a [EvansValue],
}

/// Evans image of the contour, with optional finite-`v₊` overlays.
pub fn cmd_contour(cfg: &RunConfig) -> Result<Outcome> {
    let c = contour(cfg)?;
    let e = cfg.evans();
    let m = model(cfg)?;
    let primary_label = if cfg.limiting { "D0 (limiting)".to_string() } else { format!("D, gamma={}, v+={:e}", cfg.gamma, cfg.v_plus) };
    let primary = evans_on_contour(&c, &EvansModel::build(m, &e)?, &e)?;
    let mut curves = vec![(primary_label, primary)];
    for &vp in &cfg.superimpose {
        let p = ShockParams::new(cfg.gamma, vp)?;
        let vals = evans_on_contour(&c, &EvansModel::build(Model::FiniteMach(p), &e)?, &e)?;
        curves.push((format!("D, v+={vp:e}"), vals));
    }
    if !cfg.superimpose.is_empty() && !cfg.limiting {
        curves.push(("D0 (limiting)".to_string(), limiting_values(&c, &e)?));
    }

    let mut dir = RunDir::create(cfg, "contour")?;
    let mut payload = Vec::new();
    let mut plot = Vec::new();
    for (k, (label, vals)) in curves.iter().enumerate() {
        let name = if k == 0 { "evans.csv".to_string() } else { format!("evans_{k}.csv") };
        dir.write_csv(&name, &EVANS_HEADER, &evans_rows(vals))?;
        let d: Vec<C64> = vals.iter().map(|v| v.d).collect();
        let w = winding_certificate(&d, true).ok();
        payload.push(ContourPayload {
            label: label.clone(),
            winding_number: w.map(|w| w.winding_number),
            max_phase_increment: w.map(|w| w.max_increment),
            values: vals,
        });
        plot.push(Curve { label: label.clone(), points: d, closed: true });
    }
    dir.write_json("evans.json", &payload)?;
    dir.write_svg("contour.svg", &svg::render(&format!("Evans image, radius {}", cfg.radius), &plot))?;
    let summary = match payload[0].winding_number {
        Some(w) => format!("{}: winding number {w} over {} samples", payload[0].label, c.n_points()),
        None => format!("{}: winding number not determined", payload[0].label),
    };
    Ok(finish(dir, 0, summary))
}

/// Stability report; exit 0 for a certified or transferred verdict, 2 when inconclusive.
pub fn cmd_certify(cfg: &RunConfig) -> Result<Outcome> {
    let target = if cfg.limiting { Target::Limiting } else { Target::FiniteMach { gamma: cfg.gamma, v_plus: cfg.v_plus } };
    let report: StabilityReport = certify_stability(target, &cfg.study())?;
    let mut dir = RunDir::create(cfg, "certify")?;
    dir.write_json("report.json", &report)?;
    let code = match report.verdict {
        Verdict::StableCertified | Verdict::RoucheTransfer => 0,
        Verdict::Inconclusive => 2,
    };
    let mut summary = format!(
        "verdict {:?}, winding {:?}, min |D| {:.4}",
        report.verdict, report.winding_number, report.min_modulus
    );
    if let Some(r) = report.max_rel_error {
        summary.push_str(&format!(", max rel error {r:.4}"));
    }
    if let Some(d) = &report.diagnostic {
        summary.push_str(&format!(" ({d})"));
    }
    Ok(finish(dir, code, summary))
}

/// Rouché bound for the configured gamma.
pub fn cmd_rouche(cfg: &RunConfig) -> Result<Outcome> {
    let c = contour(cfg)?;
    let r = rouche_bound_search(cfg.gamma, cfg.threshold, &c, (cfg.search_lo, cfg.search_hi), cfg.search_tol, &cfg.evans())?;
    let mut dir = RunDir::create(cfg, "rouche")?;
    dir.write_json("rouche.json", &r)?;
    let rows = vec![vec![fmt(r.gamma), fmt(r.v_plus), fmt(r.rel_error), fmt(r.mach)]];
    dir.write_csv("rouche.csv", &["gamma", "v_plus", "rel_error", "mach"], &rows)?;
    let summary = format!("gamma {}: v+* = {:.3e}, M = {:.4}, rel error {:.4}", r.gamma, r.v_plus, r.mach, r.rel_error);
    Ok(finish(dir, 0, summary))
}

/// Both tables; rows that fail are marked and the run continues.
pub fn cmd_tables(cfg: &RunConfig) -> Result<Outcome> {
    if !(cfg.gammas.iter().all(|g| g.is_finite()) && cfg.v_plus_list.iter().all(|v| v.is_finite())) {
        bail!("table lists must be finite numbers");
    }
    let c = contour(cfg)?;
    let e = cfg.evans();
    let mut dir = RunDir::create(cfg, "tables")?;

    let t2 = difference_table(cfg.gamma, &cfg.v_plus_list, &c, &e)?;
    let rows2: Vec<Vec<String>> = t2
        .iter()
        .map(|r| match &r.result {
            Ok(cmp) => vec![fmt(r.v_plus), fmt(r.mach), fmt(cmp.max_rel_error), fmt(cmp.max_abs_error), "ok".into()],
            Err(msg) => vec![fmt(r.v_plus), fmt(r.mach), String::new(), String::new(), format!("error: {}", msg.replace(',', ";"))],
        })
        .collect();
    dir.write_csv("table2.csv", &["v_plus", "mach", "rel_diff", "abs_diff", "status"], &rows2)?;

    let mut t1 = Vec::new();
    let mut rows1 = Vec::new();
    for &g in &cfg.gammas {
        match rouche_bound_search(g, cfg.threshold, &c, (cfg.search_lo, cfg.search_hi), cfg.search_tol, &e) {
            Ok(r) => {
                rows1.push(vec![fmt(g), fmt(r.v_plus), fmt(r.rel_error), fmt(r.mach), "ok".into()]);
                t1.push(Ok(r));
            }
            Err(err) => {
                rows1.push(vec![fmt(g), String::new(), String::new(), String::new(), format!("error: {}", err.to_string().replace(',', ";"))]);
                t1.push(Err(err.to_string()));
            }
        }
    }
    dir.write_csv("table1.csv", &["gamma", "v_plus", "rel_error", "mach", "status"], &rows1)?;
    #[derive(Serialize)]
    struct Tables<'a> {
        table1: &'a [std::result::Result<shock_evans::contour_stability::RoucheBound, String>],
        table2: &'a [shock_evans::contour_stability::DifferenceRow],
    }
    dir.write_json("tables.json", &Tables { table1: &t1, table2: &t2 })?;
    let failed = t1.iter().filter(|r| r.is_err()).count() + t2.iter().filter(|r| r.result.is_err()).count();
    let summary = format!("table1: {} rows, table2: {} rows, {failed} failed", t1.len(), t2.len());
    Ok(finish(dir, 0, summary))
}
