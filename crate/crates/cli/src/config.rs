//! Run configuration: command-line flags layered over an optional JSON file.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use ssmt_core::evaluation::exact_level;
use ssmt_core::{Family, Procedure, Rational64, ScenarioSpec};

use crate::error::{CliError, CliResult};
use crate::presets::FigureId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Apply,
    Simulate,
    Sweep,
    Boundary,
    Reproduce,
    Bench,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub x_file: Option<PathBuf>,
    pub y_file: Option<PathBuf>,
    pub out: PathBuf,
    pub m: Vec<usize>,
    pub n: Vec<usize>,
    pub m1: usize,
    pub mu: f64,
    pub family: Family,
    pub rho: Option<f64>,
    pub df: f64,
    pub pi0: Option<f64>,
    pub alpha: f64,
    pub alpha_frac: Option<String>,
    pub reps: Option<usize>,
    pub eta: f64,
    pub seed: u64,
    pub budget: f64,
    /// Worker threads, 0 = one per core. Not part of the manifest: outputs do
    /// not depend on it.
    #[serde(skip_serializing)]
    pub threads: usize,
    pub emit_svg: bool,
    /// Empty means the command's default: ss_bh for apply, ss_bh and
    /// oracle_bh otherwise.
    pub procedures: Vec<Procedure>,
    pub preset: Option<FigureId>,
    pub k: Vec<usize>,
    pub beta: Option<f64>,
    pub runs: usize,
    #[serde(skip_serializing)]
    pub force: bool,
    pub outcomes: bool,
    pub allow_equicorr_alternatives: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            x_file: None,
            y_file: None,
            out: PathBuf::from("ssmt-out"),
            m: Vec::new(),
            n: Vec::new(),
            m1: 0,
            mu: 0.0,
            family: Family::GaussianIid,
            rho: None,
            df: 3.0,
            pi0: None,
            alpha: 0.2,
            alpha_frac: None,
            reps: None,
            eta: 0.0,
            seed: 1,
            budget: 1.0,
            threads: 0,
            emit_svg: false,
            procedures: Vec::new(),
            preset: None,
            k: Vec::new(),
            beta: None,
            runs: 5,
            force: false,
            outcomes: false,
            allow_equicorr_alternatives: false,
        }
    }
}

impl RunConfig {
    /// Loads either a plain configuration or a manifest written by a run.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let config = match value.get("config") {
            Some(inner) if value.get("tool").is_some() => inner.clone(),
            _ => value,
        };
        serde_json::from_value(config).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
    }

    pub fn procedures(&self) -> Vec<Procedure> {
        match (self.procedures.is_empty(), self.command) {
            (false, _) => self.procedures.clone(),
            (true, Some(Command::Apply)) => vec![Procedure::SsBh],
            (true, _) => vec![Procedure::SsBh, Procedure::OracleBh],
        }
    }

    /// Level as `(f64, exact rational)`; `alpha_frac` wins over `alpha`.
    pub fn level(&self) -> CliResult<(f64, Rational64)> {
        if let Some(frac) = &self.alpha_frac {
            let (a, b) = frac
                .split_once('/')
                .ok_or_else(|| CliError::usage(format!("--alpha-frac expects a/b, got '{frac}'")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<i64>()
                    .map_err(|_| CliError::usage(format!("--alpha-frac expects integers, got '{frac}'")))
            };
            let (a, b) = (parse(a)?, parse(b)?);
            if a <= 0 || b <= 0 || a >= b {
                return Err(CliError::usage(format!("--alpha-frac must lie in (0, 1), got '{frac}'")));
            }
            return Ok((a as f64 / b as f64, Rational64::new(a, b)));
        }
        Ok((self.alpha, exact_level(self.alpha)?))
    }

    pub fn single(values: &[usize], name: &str) -> CliResult<usize> {
        match values {
            [v] => Ok(*v),
            [] => Err(CliError::usage(format!("--{name} is required"))),
            _ => Err(CliError::usage(format!("--{name} takes a single value for this command"))),
        }
    }

    pub fn scenario(&self, m: usize, n: usize) -> CliResult<ScenarioSpec> {
        let (alpha, _) = self.level()?;
        let spec = ScenarioSpec {
            m,
            n,
            m1: self.m1,
            family: self.family,
            effect: self.mu,
            df: self.df,
            pi0: self.pi0,
            alpha,
            seed: self.seed,
            allow_equicorr_alternatives: self.allow_equicorr_alternatives,
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: ssmt_core::Error| e.to_string())
}

fn parse_procedure(s: &str) -> Result<Procedure, String> {
    s.parse().map_err(|e: ssmt_core::Error| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "ssmt", version, about = "Multiple testing calibrated on a null training sample")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Apply a procedure to a test sample and a null training sample
    Apply,
    /// Monte-Carlo FDR/TDR for one scenario
    Simulate,
    /// Monte-Carlo FDR/TDR over a grid of null sample sizes
    Sweep,
    /// Phase diagram of the power boundaries
    Boundary,
    /// Reproduce a figure preset (fig1 .. fig6)
    Reproduce { preset: Option<FigureId> },
    /// Time p-value construction and the merge scan at scale
    Bench,
}

impl CliCommand {
    fn kind(&self) -> Command {
        match self {
            CliCommand::Apply => Command::Apply,
            CliCommand::Simulate => Command::Simulate,
            CliCommand::Sweep => Command::Sweep,
            CliCommand::Boundary => Command::Boundary,
            CliCommand::Reproduce { .. } => Command::Reproduce,
            CliCommand::Bench => Command::Bench,
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct Flags {
    /// JSON configuration or a manifest from an earlier run
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub x_file: Option<PathBuf>,
    #[arg(long, global = true)]
    pub y_file: Option<PathBuf>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub m: Option<Vec<usize>>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    #[arg(long, global = true)]
    pub m1: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    #[arg(long, global = true, value_parser = parse_family)]
    pub family: Option<Family>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub rho: Option<f64>,
    #[arg(long, global = true)]
    pub df: Option<f64>,
    #[arg(long, global = true)]
    pub pi0: Option<f64>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Exact level as a fraction, e.g. 1/5
    #[arg(long, global = true)]
    pub alpha_frac: Option<String>,
    #[arg(long, global = true)]
    pub reps: Option<usize>,
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Multiplier on the replicate counts of figure presets
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub budget: Option<f64>,
    /// Worker threads, 0 = one per core
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub emit_svg: bool,
    #[arg(long, global = true, value_delimiter = ',', value_parser = parse_procedure)]
    pub procedures: Option<Vec<Procedure>>,
    /// Detectable-alternative counts for `boundary`
    #[arg(long, global = true, value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
    /// Tolerated miss probability for the detectability estimate
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    /// Timed repetitions for `bench`
    #[arg(long, global = true)]
    pub runs: Option<usize>,
    /// Also write one CSV row per replicate and procedure
    #[arg(long, global = true)]
    pub outcomes: bool,
    #[arg(long, global = true)]
    pub allow_equicorr_alternatives: bool,
    /// Overwrite existing outputs
    #[arg(long, global = true)]
    pub force: bool,
}

impl Cli {
    /// Configuration file (if any) overridden by the flags given.
    pub fn into_config(self) -> CliResult<RunConfig> {
        let f = self.flags;
        let mut c = match &f.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        c.command = Some(self.command.kind());
        if let CliCommand::Reproduce { preset: Some(p) } = self.command {
            c.preset = Some(p);
        }
        macro_rules! set {
            ($($field:ident),*) => { $( if let Some(v) = f.$field { c.$field = v; } )* };
        }
        macro_rules! set_opt {
            ($($field:ident),*) => { $( if f.$field.is_some() { c.$field = f.$field; } )* };
        }
        if f.alpha.is_some() && f.alpha_frac.is_none() {
            c.alpha_frac = None;
        }
        set!(out, m, n, m1, mu, family, df, alpha, eta, seed, budget, threads, procedures, k, runs);
        set_opt!(x_file, y_file, rho, pi0, alpha_frac, reps, beta);
        c.emit_svg |= f.emit_svg;
        c.outcomes |= f.outcomes;
        c.allow_equicorr_alternatives |= f.allow_equicorr_alternatives;
        c.force = f.force;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> RunConfig {
        Cli::try_parse_from(args).unwrap().into_config().unwrap()
    }

    #[test]
    fn flags_after_the_subcommand() {
        let c = parse(&["ssmt", "simulate", "--m", "10", "--n", "5,7", "--alpha", "0.5", "--procedures", "ss_bh,by_bh"]);
        assert_eq!(c.command, Some(Command::Simulate));
        assert_eq!((c.m.clone(), c.n.clone()), (vec![10], vec![5, 7]));
        assert_eq!(c.procedures, vec![Procedure::SsBh, Procedure::ByBh]);
        assert_eq!(c.level().unwrap().1, Rational64::new(1, 2));
    }

    #[test]
    fn alpha_fraction_and_errors() {
        let c = parse(&["ssmt", "apply", "--alpha-frac", "1/5"]);
        assert_eq!(c.level().unwrap(), (0.2, Rational64::new(1, 5)));
        let bad = parse(&["ssmt", "apply", "--alpha-frac", "5/1"]);
        assert_eq!(bad.level().unwrap_err().exit_code(), 1);
        assert!(Cli::try_parse_from(["ssmt", "simulate", "--family", "cauchy"]).is_err());
    }

    #[test]
    fn config_round_trip_and_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"m":[4],"n":[9],"alpha":0.25,"seed":7,"family":"StudentIid"}"#).unwrap();
        let c = parse(&["ssmt", "simulate", "--config", path.to_str().unwrap(), "--seed", "8"]);
        assert_eq!((c.m.clone(), c.alpha, c.seed, c.family), (vec![4], 0.25, 8, Family::StudentIid));
        std::fs::write(&path, r#"{"bogus":1}"#).unwrap();
        assert!(RunConfig::load(&path).is_err());
    }
}
