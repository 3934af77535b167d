//! Sweep configuration: per-command defaults, an optional TOML file, then
//! command-line flags, each layer overriding the previous one.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use diqft::{threshold_from_epsilon, GammaDenominator, Protocol};
use serde::Deserialize;

use crate::error::CliError;

/// Inclusive integer range. Parses from `a`, `a-b` or `a..=b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IntRange {
    pub start: usize,
    pub end: usize,
}

impl IntRange {
    pub const fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn iter(&self) -> std::ops::RangeInclusive<usize> {
        self.start..=self.end
    }
}

impl FromStr for IntRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("`{s}` is not a range (use `a`, `a-b` or `a..=b`)"))
        };
        let (a, b) = match s.split_once("..=").or_else(|| s.split_once('-')) {
            Some((a, b)) => (parse(a)?, parse(b)?),
            None => (parse(s)?, parse(s)?),
        };
        Ok(Self::new(a, b))
    }
}

impl fmt::Display for IntRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start, self.end)
    }
}

impl<'de> Deserialize<'de> for IntRange {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            One(usize),
            Pair([usize; 2]),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::One(a) => Ok(Self::new(a, a)),
            Repr::Pair([a, b]) => Ok(Self::new(a, b)),
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// A pruning threshold, `None` meaning exact. Parses from `exact` or a
/// positive integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Threshold(pub Option<u32>);

impl Threshold {
    /// Column suffix used by the heatmaps: `unbounded` or `t<k>`.
    pub fn label(&self) -> String {
        match self.0 {
            None => "unbounded".into(),
            Some(t) => format!("t{t}"),
        }
    }
}

impl FromStr for Threshold {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "exact" | "unbounded" => Ok(Threshold(None)),
            t => match t.parse::<u32>() {
                Ok(0) | Err(_) => Err(format!(
                    "`{s}` is not a threshold (use a positive integer or `exact`)"
                )),
                Ok(t) => Ok(Threshold(Some(t))),
            },
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            None => f.write_str("exact"),
            Some(t) => write!(f, "{t}"),
        }
    }
}

impl<'de> Deserialize<'de> for Threshold {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(i64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Int(t) => t.to_string().parse().map_err(serde::de::Error::custom),
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Fidelity,
    Epr,
    Eta,
    Epsilon,
    Gamma,
    Verify,
}

impl Command {
    /// Counting commands never simulate.
    pub fn simulates(&self) -> bool {
        matches!(self, Command::Fidelity | Command::Verify)
    }
}

/// Fully resolved settings for one command.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    /// Node counts. For `epsilon` this is the horizon `d_max` range.
    pub p_range: IntRange,
    /// Qubits per node. For `fidelity` this is the register size.
    pub q_range: IntRange,
    pub thresholds: Vec<Threshold>,
    /// Tolerances converted to thresholds and appended to `thresholds`.
    pub epsilon: Vec<f64>,
    pub seed: u64,
    /// Measurement seeds per lowered program (`verify`).
    pub seeds: usize,
    /// Fourier-prepared inputs per register size (`fidelity`).
    pub fourier_inputs: usize,
    /// Haar-random inputs (`fidelity` and `verify`).
    pub haar_inputs: usize,
    pub max_qubits: usize,
    /// `None` runs the command's default: telegate for counting, both for
    /// `verify`.
    pub protocol: Option<Protocol>,
    pub gamma_denominator: GammaDenominator,
    pub out_dir: PathBuf,
}

fn all_thresholds(range: std::ops::RangeInclusive<u32>) -> Vec<Threshold> {
    range.map(|t| Threshold(Some(t))).collect()
}

impl SweepConfig {
    pub fn defaults(cmd: Command) -> Self {
        let heatmap = vec![Threshold(None), Threshold(Some(7)), Threshold(Some(3))];
        let base = Self {
            p_range: IntRange::new(2, 20),
            q_range: IntRange::new(2, 20),
            thresholds: heatmap,
            epsilon: Vec::new(),
            seed: 2024,
            seeds: 10,
            fourier_inputs: 64,
            haar_inputs: 16,
            max_qubits: diqft::sim::MAX_QUBITS,
            protocol: None,
            gamma_denominator: GammaDenominator::RemoteCp,
            out_dir: PathBuf::from("results"),
        };
        match cmd {
            Command::Fidelity => Self {
                p_range: IntRange::new(1, 1),
                q_range: IntRange::new(18, 18),
                thresholds: all_thresholds(2..=16),
                ..base
            },
            Command::Epsilon => Self {
                p_range: IntRange::new(1, 20),
                ..base
            },
            Command::Verify => Self {
                p_range: IntRange::new(1, 10),
                q_range: IntRange::new(1, 10),
                thresholds: Vec::new(),
                haar_inputs: 20,
                ..base
            },
            Command::Epr | Command::Eta | Command::Gamma => base,
        }
    }

    /// Defaults, then the file named by `--config`, then the flags.
    pub fn resolve(cmd: Command, flags: &Overrides) -> Result<Self, CliError> {
        let mut cfg = Self::defaults(cmd);
        if let Some(path) = &flags.config {
            cfg.apply(FileConfig::load(path)?.into_overrides()?);
        }
        cfg.apply(flags.clone());
        cfg.validate(cmd)?;
        Ok(cfg)
    }

    fn apply(&mut self, o: Overrides) {
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = o.$field {
                    self.$field = v;
                }
            )*};
        }
        set!(
            p_range,
            q_range,
            thresholds,
            epsilon,
            seed,
            seeds,
            fourier_inputs,
            haar_inputs,
            max_qubits,
            gamma_denominator,
            out_dir
        );
        if o.protocol.is_some() {
            self.protocol = o.protocol;
        }
    }

    fn validate(&self, cmd: Command) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        for (name, r) in [("p-range", self.p_range), ("q-range", self.q_range)] {
            if r.start == 0 || r.start > r.end {
                return bad(format!(
                    "{name} {r} must be a non-empty range of positive integers"
                ));
            }
        }
        if self.max_qubits == 0 || self.max_qubits > diqft::sim::MAX_QUBITS {
            return bad(format!(
                "max-qubits must lie in 1..={}, got {}",
                diqft::sim::MAX_QUBITS,
                self.max_qubits
            ));
        }
        if cmd == Command::Verify && self.seeds == 0 {
            return bad("verify needs at least one seed".into());
        }
        for &eps in &self.epsilon {
            threshold_from_epsilon(eps).map_err(|e| CliError::Config(e.to_string()))?;
        }
        if cmd.simulates() {
            self.check_capacity(cmd)?;
        }
        Ok(())
    }

    /// Every simulated point needs its register plus two communication
    /// qubits under the cap.
    fn check_capacity(&self, cmd: Command) -> Result<(), CliError> {
        let widest = match cmd {
            Command::Fidelity => self.q_range.end,
            _ => self
                .p_range
                .iter()
                .flat_map(|p| self.q_range.iter().map(move |q| p * q))
                .filter(|&n| n <= VERIFY_MAX_QUBITS)
                .max()
                .unwrap_or(0),
        };
        if widest + 2 > self.max_qubits {
            return Err(CliError::Config(format!(
                "a {widest}-qubit register needs {} simulated qubits but the cap is {}; \
                 lower --q-range/--p-range or raise --max-qubits (at most {})",
                widest + 2,
                self.max_qubits,
                diqft::sim::MAX_QUBITS
            )));
        }
        Ok(())
    }

    /// The threshold list with converted tolerances appended, duplicates
    /// removed, order kept.
    pub fn effective_thresholds(&self) -> Vec<Threshold> {
        let mut out: Vec<Threshold> = Vec::new();
        let extra = self
            .epsilon
            .iter()
            .map(|&e| Threshold(Some(threshold_from_epsilon(e).expect("validated"))));
        for t in self.thresholds.iter().copied().chain(extra) {
            if !out.contains(&t) {
                out.push(t);
            }
        }
        out
    }
}

/// Largest register `verify` checks, matching the brute-force oracle's reach.
pub const VERIFY_MAX_QUBITS: usize = 10;

/// Flags shared by every subcommand. Unset flags leave the lower layers
/// alone.
#[derive(Args, Clone, Debug, Default)]
pub struct Overrides {
    /// TOML file with any of the settings below (snake_case keys).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Node counts, e.g. `2-20`. For `epsilon`: the d_max range.
    #[arg(long)]
    pub p_range: Option<IntRange>,
    /// Qubits per node, e.g. `2-20`. For `fidelity`: register sizes.
    #[arg(long)]
    pub q_range: Option<IntRange>,
    /// Comma-separated thresholds, e.g. `exact,7,3`.
    #[arg(long, value_delimiter = ',')]
    pub thresholds: Option<Vec<Threshold>>,
    /// Comma-separated tolerances, converted to extra thresholds.
    #[arg(long, value_delimiter = ',')]
    pub epsilon: Option<Vec<f64>>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Measurement seeds per program (verify).
    #[arg(long)]
    pub seeds: Option<usize>,
    /// Fourier-basis inputs per register size (fidelity).
    #[arg(long)]
    pub fourier_inputs: Option<usize>,
    /// Haar-random inputs.
    #[arg(long)]
    pub haar_inputs: Option<usize>,
    /// Lowering protocol: telegate or teledata.
    #[arg(long)]
    pub protocol: Option<Protocol>,
    /// gamma denominator: all-cp or remote-cp.
    #[arg(long)]
    pub gamma_denominator: Option<GammaDenominator>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Simulator qubit cap, ancillas included.
    #[arg(long)]
    pub max_qubits: Option<usize>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    p_range: Option<IntRange>,
    q_range: Option<IntRange>,
    thresholds: Option<Vec<Threshold>>,
    epsilon: Option<Vec<f64>>,
    seed: Option<u64>,
    seeds: Option<usize>,
    fourier_inputs: Option<usize>,
    haar_inputs: Option<usize>,
    protocol: Option<String>,
    gamma_denominator: Option<String>,
    out_dir: Option<PathBuf>,
    max_qubits: Option<usize>,
}

impl FileConfig {
    fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    fn into_overrides(self) -> Result<Overrides, CliError> {
        let protocol = self
            .protocol
            .map(|p| p.parse())
            .transpose()
            .map_err(CliError::Config)?;
        let gamma_denominator = self
            .gamma_denominator
            .map(|g| g.parse())
            .transpose()
            .map_err(CliError::Config)?;
        Ok(Overrides {
            config: None,
            p_range: self.p_range,
            q_range: self.q_range,
            thresholds: self.thresholds,
            epsilon: self.epsilon,
            seed: self.seed,
            seeds: self.seeds,
            fourier_inputs: self.fourier_inputs,
            haar_inputs: self.haar_inputs,
            protocol,
            gamma_denominator,
            out_dir: self.out_dir,
            max_qubits: self.max_qubits,
        })
    }
}
