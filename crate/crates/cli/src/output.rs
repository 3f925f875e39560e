//! Run directories and file emission. Every file carries the artifact
//! version and the full configuration; wall-clock data lives only in the
//! JSON `metadata` block so payloads are byte-for-byte reproducible.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;

pub const ARTIFACT: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct RunDir {
    pub path: PathBuf,
    pub files: Vec<PathBuf>,
    config_json: String,
}

impl RunDir {
    pub fn create(cfg: &RunConfig, command: &str) -> Result<Self> {
        let path = cfg.run_dir(command);
        fs::create_dir_all(&path).with_context(|| format!("creating {}", path.display()))?;
        let config_json = serde_json::to_string(cfg)?;
        let mut dir = Self { path, files: Vec::new(), config_json };
        dir.write_raw("config.txt", &cfg.to_kv())?;
        Ok(dir)
    }

    fn write_raw(&mut self, name: &str, body: &str) -> Result<PathBuf> {
        let p = self.path.join(name);
        fs::write(&p, body).with_context(|| format!("writing {}", p.display()))?;
        self.files.push(p.clone());
        Ok(p)
    }

    /// CSV with `#` provenance lines ahead of the header.
    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
        let mut s = String::new();
        writeln!(s, "# {ARTIFACT} {VERSION}")?;
        writeln!(s, "# config: {}", self.config_json)?;
        writeln!(s, "{}", header.join(","))?;
        for r in rows {
            writeln!(s, "{}", r.join(","))?;
        }
        self.write_raw(name, &s)
    }

    /// JSON document `{artifact, config, payload, metadata}`.
    pub fn write_json<T: Serialize>(&mut self, name: &str, payload: &T) -> Result<PathBuf> {
        let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let config: serde_json::Value = serde_json::from_str(&self.config_json)?;
        let doc = json!({
            "artifact": { "name": ARTIFACT, "version": VERSION },
            "config": config,
            "payload": payload,
            "metadata": { "created_unix": created },
        });
        self.write_raw(name, &serde_json::to_string_pretty(&doc)?)
    }

    /// SVG with the configuration embedded in a comment.
    pub fn write_svg(&mut self, name: &str, svg: &str) -> Result<PathBuf> {
        let marker = format!("<!-- {ARTIFACT} {VERSION} config: {} -->\n", self.config_json.replace("--", "- -"));
        let body = match svg.find('\n') {
            Some(i) => format!("{}\n{marker}{}", &svg[..i], &svg[i + 1..]),
            None => format!("{svg}\n{marker}"),
        };
        self.write_raw(name, &body)
    }
}

/// Payload of a JSON file produced by [`RunDir::write_json`], with metadata stripped.
pub fn read_payload(path: &Path) -> Result<serde_json::Value> {
    let text = fs::read_to_string(path)?;
    let mut v: serde_json::Value = serde_json::from_str(&text)?;
    v.as_object_mut().map(|o| o.remove("metadata"));
    Ok(v)
}

pub fn fmt(x: f64) -> String {
    format!("{x:e}")
}
