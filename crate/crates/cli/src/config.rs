//! Run configuration: defaults, `key = value` files, and content hashing.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use shock_evans::contour_stability::StudyConfig;
use shock_evans::evans_core::{EvansConfig, TrackScheme};
use shock_evans::shock_model::{Centering, Domain};

pub const SCHEMA_VERSION: u32 = 1;

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub schema_version: u32,
    pub gamma: f64,
    pub v_plus: f64,
    /// Use the `v₊ → 0` limiting system instead of `(gamma, v_plus)`.
    pub limiting: bool,
    pub radius: f64,
    pub n_points: usize,
    pub indentation: f64,
    pub rtol: f64,
    pub atol: f64,
    pub profile_tol: f64,
    pub l_minus: f64,
    pub l_plus: f64,
    pub centering: Centering,
    pub minus_scheme: TrackScheme,
    pub plus_scheme: TrackScheme,
    pub refinement_budget: usize,
    pub compare_to_limit: bool,
    pub threshold: f64,
    pub search_lo: f64,
    pub search_hi: f64,
    pub search_tol: f64,
    /// Rows of the Rouché-bound table.
    pub gammas: Vec<f64>,
    /// Rows of the `D` versus `D⁰` difference table.
    pub v_plus_list: Vec<f64>,
    /// Extra `v₊` curves drawn by `contour`.
    pub superimpose: Vec<f64>,
    pub profile_samples: usize,
    /// Root under which run directories are created; not part of the hash.
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let e = EvansConfig::default();
        Self {
            schema_version: SCHEMA_VERSION,
            gamma: 5.0 / 3.0,
            v_plus: 1e-3,
            limiting: false,
            radius: 10.0,
            n_points: 256,
            indentation: 1e-4,
            rtol: e.rtol,
            atol: e.atol,
            profile_tol: e.profile_tol,
            l_minus: e.domain.l_minus,
            l_plus: e.domain.l_plus,
            centering: e.centering,
            minus_scheme: e.minus_scheme,
            plus_scheme: e.plus_scheme,
            refinement_budget: 3,
            compare_to_limit: true,
            threshold: 0.5,
            search_lo: 1e-6,
            search_hi: 1e-1,
            search_tol: 1e-3,
            gammas: vec![1.0, 1.5, 2.0, 2.5, 3.0],
            v_plus_list: vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
            superimpose: Vec::new(),
            profile_samples: 401,
            output_dir: PathBuf::from("runs"),
        }
    }
}

fn parse_list(v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().with_context(|| format!("bad number '{s}'")))
        .collect()
}

fn parse_bool(v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => bail!("bad boolean '{v}'"),
    }
}

impl RunConfig {
    /// Set one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = |v: &str| v.parse::<f64>().with_context(|| format!("bad number '{v}' for {key}"));
        let int = |v: &str| v.parse::<usize>().with_context(|| format!("bad integer '{v}' for {key}"));
        match key {
            "gamma" => self.gamma = num(value)?,
            "v_plus" => self.v_plus = num(value)?,
            "limiting" => self.limiting = parse_bool(value)?,
            "radius" => self.radius = num(value)?,
            "n_points" => self.n_points = int(value)?,
            "indentation" => self.indentation = num(value)?,
            "rtol" => self.rtol = num(value)?,
            "atol" => self.atol = num(value)?,
            "profile_tol" => self.profile_tol = num(value)?,
            "l_minus" => self.l_minus = num(value)?,
            "l_plus" => self.l_plus = num(value)?,
            "centering" => self.centering = value.parse()?,
            "minus_scheme" => self.minus_scheme = value.parse()?,
            "plus_scheme" => self.plus_scheme = value.parse()?,
            "refinement_budget" => self.refinement_budget = int(value)?,
            "compare_to_limit" => self.compare_to_limit = parse_bool(value)?,
            "threshold" => self.threshold = num(value)?,
            "search_lo" => self.search_lo = num(value)?,
            "search_hi" => self.search_hi = num(value)?,
            "search_tol" => self.search_tol = num(value)?,
            "gammas" => self.gammas = parse_list(value)?,
            "v_plus_list" => self.v_plus_list = parse_list(value)?,
            "superimpose" => self.superimpose = parse_list(value)?,
            "profile_samples" => self.profile_samples = int(value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "schema_version" => {
                let v = int(value)? as u32;
                if v != SCHEMA_VERSION {
                    bail!("unsupported schema_version {v} (expected {SCHEMA_VERSION})");
                }
            }
            _ => bail!("unknown configuration key '{key}'"),
        }
        Ok(())
    }

    /// Parse `key = value` lines; `#` starts a comment.
    pub fn parse_kv(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!("line {}: expected 'key = value', got '{raw}'", no + 1);
            };
            cfg.set(k.trim(), v.trim()).with_context(|| format!("line {}", no + 1))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse_kv(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Serialize back to the `key = value` format.
    pub fn to_kv(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let json = serde_json::to_value(self).expect("config serializes");
        let mut out = String::new();
        for (k, v) in json.as_object().expect("object") {
            let s = match v {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Array(_) => {
                    let xs: Vec<f64> = serde_json::from_value(v.clone()).expect("numeric list");
                    list(&xs)
                }
                other => other.to_string(),
            };
            out.push_str(&format!("{k} = {s}\n"));
        }
        out
    }

    pub fn evans(&self) -> EvansConfig {
        EvansConfig {
            domain: Domain { l_minus: self.l_minus, l_plus: self.l_plus },
            rtol: self.rtol,
            atol: self.atol,
            profile_tol: self.profile_tol,
            centering: self.centering,
            minus_scheme: self.minus_scheme,
            plus_scheme: self.plus_scheme,
            ..EvansConfig::default()
        }
    }

    pub fn study(&self) -> StudyConfig {
        StudyConfig {
            radius: self.radius,
            n_points: self.n_points,
            indentation: self.indentation,
            refinement_budget: self.refinement_budget,
            compare_to_limit: self.compare_to_limit,
            evans: self.evans(),
        }
    }

    /// Hex SHA-256 of the canonical JSON form, excluding `output_dir`.
    pub fn content_hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        v.as_object_mut().expect("object").remove("output_dir");
        let bytes = serde_json::to_vec(&v).expect("json");
        hex::encode(Sha256::digest(&bytes))
    }

    /// `<output_dir>/<command>-<hash prefix>`.
    pub fn run_dir(&self, command: &str) -> PathBuf {
        self.output_dir.join(format!("{command}-{}", &self.content_hash()[..16]))
    }
}
