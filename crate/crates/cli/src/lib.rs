//! Command-line front end: configuration handling, run persistence and
//! figure/table emission on top of `shock_evans`.

pub mod commands;
pub mod config;
pub mod output;
pub mod svg;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

pub use commands::Outcome;
pub use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "shock-evans", version, about = "Evans-function stability of high-Mach-number shock layers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve and sample the shock profile.
    Profile(Overrides),
    /// Map the contour through the Evans function (CSV + SVG).
    Contour(Overrides),
    /// Winding-number stability certificate (exit 0 stable, 2 inconclusive).
    Certify(Overrides),
    /// Reproduce the Rouché-bound and D versus D0 tables.
    Tables(Overrides),
    /// Rouché bound search for one gamma.
    Rouche(Overrides),
}

/// Flags mirroring the configuration keys; they override the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub v_plus: Option<f64>,
    /// Use the limiting (v+ -> 0) system.
    #[arg(long)]
    pub limiting: bool,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub n_points: Option<usize>,
    #[arg(long)]
    pub indentation: Option<f64>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
    #[arg(long)]
    pub profile_tol: Option<f64>,
    #[arg(long)]
    pub l_minus: Option<f64>,
    #[arg(long)]
    pub l_plus: Option<f64>,
    /// midpoint | decay
    #[arg(long)]
    pub centering: Option<String>,
    /// kato | pointwise
    #[arg(long)]
    pub minus_scheme: Option<String>,
    /// kato | pointwise
    #[arg(long)]
    pub plus_scheme: Option<String>,
    #[arg(long)]
    pub refinement_budget: Option<usize>,
    #[arg(long)]
    pub compare_to_limit: Option<bool>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub search_lo: Option<f64>,
    #[arg(long)]
    pub search_hi: Option<f64>,
    #[arg(long)]
    pub search_tol: Option<f64>,
    /// Comma-separated gamma list for the Rouché table.
    #[arg(long)]
    pub gammas: Option<String>,
    /// Comma-separated v+ list for the difference table.
    #[arg(long)]
    pub v_plus_list: Option<String>,
    /// Comma-separated v+ values drawn on top of the primary contour image.
    #[arg(long)]
    pub superimpose: Option<String>,
    #[arg(long)]
    pub profile_samples: Option<usize>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

impl Overrides {
    /// Config file (or defaults) with flags applied on top.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let mut set = |k: &str, v: Option<String>| -> Result<()> {
            if let Some(v) = v {
                cfg.set(k, &v)?;
            }
            Ok(())
        };
        let s = |x: Option<f64>| x.map(|v| v.to_string());
        let u = |x: Option<usize>| x.map(|v| v.to_string());
        set("gamma", s(self.gamma))?;
        set("v_plus", s(self.v_plus))?;
        set("limiting", self.limiting.then(|| "true".to_string()))?;
        set("radius", s(self.radius))?;
        set("n_points", u(self.n_points))?;
        set("indentation", s(self.indentation))?;
        set("rtol", s(self.rtol))?;
        set("atol", s(self.atol))?;
        set("profile_tol", s(self.profile_tol))?;
        set("l_minus", s(self.l_minus))?;
        set("l_plus", s(self.l_plus))?;
        set("centering", self.centering.clone())?;
        set("minus_scheme", self.minus_scheme.clone())?;
        set("plus_scheme", self.plus_scheme.clone())?;
        set("refinement_budget", u(self.refinement_budget))?;
        set("compare_to_limit", self.compare_to_limit.map(|b| b.to_string()))?;
        set("threshold", s(self.threshold))?;
        set("search_lo", s(self.search_lo))?;
        set("search_hi", s(self.search_hi))?;
        set("search_tol", s(self.search_tol))?;
        set("gammas", self.gammas.clone())?;
        set("v_plus_list", self.v_plus_list.clone())?;
        set("superimpose", self.superimpose.clone())?;
        set("profile_samples", u(self.profile_samples))?;
        if let Some(p) = &self.output_dir {
            cfg.output_dir = p.clone();
        }
        Ok(cfg)
    }
}

/// Resolve configuration and execute one subcommand.
pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Profile(o) => commands::cmd_profile(&o.resolve()?),
        Command::Contour(o) => commands::cmd_contour(&o.resolve()?),
        Command::Certify(o) => commands::cmd_certify(&o.resolve()?),
        Command::Tables(o) => commands::cmd_tables(&o.resolve()?),
        Command::Rouche(o) => commands::cmd_rouche(&o.resolve()?),
    }
}
