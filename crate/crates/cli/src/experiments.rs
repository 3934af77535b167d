//! The sweep commands. Each one computes its table in parallel, assembles
//! rows in grid order, and writes a single CSV.

use std::fs;
use std::path::{Path, PathBuf};

use diqft::{
    build_distributed_iqft, build_monolithic_iqft, communication_overhead, coupling_ratio,
    fidelity, infidelity, infidelity_bound, invert_horizon, lower, phase_deficit, LoweringConfig,
    NodeLayout, Protocol, PruneSpec, Simulator, StateVector,
};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{SweepConfig, Threshold, VERIFY_MAX_QUBITS};
use crate::error::CliError;

/// Fidelity floor for two outputs that should be identical.
pub const EQUIVALENCE_FLOOR: f64 = 1.0 - 1e-10;

/// Slack on the operator bound for rounding in the simulated infidelity.
pub const BOUND_SLACK: f64 = 1e-10;

/// An in-memory CSV table.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|source| CliError::Io {
                path: dir.display().to_string(),
                source,
            })?;
        }
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush().map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(())
    }

    /// Column `name` of every row.
    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }
}

/// Shortest representation that parses back to the same double.
fn real(x: f64) -> String {
    format!("{x}")
}

fn maybe(x: Option<f64>) -> String {
    x.map_or_else(|| "undefined".into(), real)
}

/// Seed for the sweep point `(p, q, t)`, stable across runs and thread
/// schedules.
pub fn point_seed(master: u64, p: usize, q: usize, t: Threshold) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    let t = t.0.map_or(0xF_FFFF, u64::from);
    rng.set_stream(((p as u64) << 40) | ((q as u64) << 20) | t);
    rng.next_u64()
}

fn prune(t: Threshold) -> PruneSpec {
    t.0.map_or(PruneSpec::Exact, PruneSpec::Threshold)
}

fn counting_protocol(cfg: &SweepConfig) -> Protocol {
    cfg.protocol.unwrap_or(Protocol::Telegate)
}

/// One row of the fidelity table.
#[derive(Clone, Debug, PartialEq)]
pub struct FidelityRow {
    pub threshold: Threshold,
    pub infidelity_max: f64,
    pub infidelity_mean: f64,
    pub phase_deficit: f64,
    pub operator_bound: f64,
}

enum Input {
    Fourier(u64),
    Haar(StateVector, StateVector),
}

/// Infidelity of the pruned single-node transform against the exact one on
/// `n` qubits, over the configured Fourier and Haar ensemble.
pub fn fidelity_rows(cfg: &SweepConfig, n: usize) -> Result<Vec<FidelityRow>, CliError> {
    let sim = Simulator::with_max_qubits(cfg.max_qubits);
    let exact = build_monolithic_iqft(n, PruneSpec::Exact)?;
    // Inputs depend on the register only, so every threshold sees the same
    // ensemble.
    let mut rng = ChaCha8Rng::seed_from_u64(point_seed(cfg.seed, 1, n, Threshold(None)));
    let mut inputs: Vec<Input> = (0..cfg.fourier_inputs)
        .map(|_| Input::Fourier(rng.random_range(0..1u64 << n)))
        .collect();
    let haar_seeds: Vec<u64> = (0..cfg.haar_inputs).map(|_| rng.next_u64()).collect();
    let haar: Vec<Input> = haar_seeds
        .into_par_iter()
        .map(|s| {
            let state = StateVector::haar_random(n, &mut ChaCha8Rng::seed_from_u64(s))?;
            let ideal = sim.run(&exact, &state, 0)?;
            Ok(Input::Haar(state, ideal))
        })
        .collect::<Result<_, diqft::Error>>()?;
    inputs.extend(haar);

    let thresholds = cfg.effective_thresholds();
    let circuits = thresholds
        .iter()
        .map(|&t| build_monolithic_iqft(n, prune(t)))
        .collect::<Result<Vec<_>, _>>()?;
    let jobs: Vec<(usize, usize)> = (0..thresholds.len())
        .flat_map(|i| (0..inputs.len()).map(move |j| (i, j)))
        .collect();
    let values = jobs
        .par_iter()
        .map(|&(i, j)| -> Result<f64, diqft::Error> {
            match &inputs[j] {
                Input::Fourier(x) => {
                    let out = sim.run(&circuits[i], &StateVector::fourier(n, *x)?, 0)?;
                    infidelity(&StateVector::basis(n, *x)?, &out)
                }
                Input::Haar(state, ideal) => infidelity(ideal, &sim.run(&circuits[i], state, 0)?),
            }
        })
        .collect::<Result<Vec<f64>, _>>()?;

    let per = inputs.len().max(1);
    thresholds
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let vals = &values[i * inputs.len()..(i + 1) * inputs.len()];
            let (deficit, bound) = match t.0 {
                Some(t) => (phase_deficit(n, t)?, infidelity_bound(n, t)?),
                None => (0.0, 0.0),
            };
            Ok(FidelityRow {
                threshold: t,
                infidelity_max: vals.iter().copied().fold(0.0, f64::max),
                infidelity_mean: vals.iter().sum::<f64>() / per as f64,
                phase_deficit: deficit,
                operator_bound: bound,
            })
        })
        .collect()
}

pub fn fidelity_table(rows: &[FidelityRow]) -> Table {
    let mut table = Table::new([
        "threshold",
        "simulated_infidelity_max",
        "simulated_infidelity_mean",
        "phase_deficit",
        "operator_bound",
    ]);
    for r in rows {
        table.rows.push(vec![
            r.threshold.to_string(),
            real(r.infidelity_max),
            real(r.infidelity_mean),
            real(r.phase_deficit),
            real(r.operator_bound),
        ]);
    }
    table
}

/// Writes `fidelity_q<n>.csv` for every register size in the Q range.
pub fn cmd_fidelity(cfg: &SweepConfig) -> Result<Vec<PathBuf>, CliError> {
    cfg.q_range
        .iter()
        .map(|n| {
            let path = cfg.out_dir.join(format!("fidelity_q{n}.csv"));
            fidelity_table(&fidelity_rows(cfg, n)?).write(&path)?;
            Ok(path)
        })
        .collect()
}

/// A `(Q, P)` grid with one value column per threshold.
fn heatmap<F>(cfg: &SweepConfig, metric: &str, value: F) -> Result<Table, CliError>
where
    F: Fn(NodeLayout, Threshold) -> Result<Option<f64>, CliError> + Sync,
{
    let thresholds = cfg.effective_thresholds();
    let mut table = Table::new(["qubits_per_node".to_string(), "nodes".to_string()]);
    table
        .header
        .extend(thresholds.iter().map(|t| format!("{metric}_{}", t.label())));
    let points: Vec<(usize, usize)> = cfg
        .q_range
        .iter()
        .flat_map(|q| cfg.p_range.iter().map(move |p| (q, p)))
        .collect();
    table.rows = points
        .par_iter()
        .map(|&(q, p)| {
            let layout = NodeLayout::new(p, q)?;
            let mut row = vec![q.to_string(), p.to_string()];
            for &t in &thresholds {
                row.push(maybe(value(layout, t)?));
            }
            Ok(row)
        })
        .collect::<Result<_, CliError>>()?;
    Ok(table)
}

/// Largest per-node EPR count, half of each pair attributed to each end.
pub fn epr_table(cfg: &SweepConfig) -> Result<Table, CliError> {
    let protocol = counting_protocol(cfg);
    heatmap(cfg, "epr", |layout, t| {
        let dc = build_distributed_iqft(layout, prune(t))?;
        let prog = lower(&dc, protocol, &LoweringConfig::default())?;
        Ok(Some(prog.ledger().epr_per_node_max()))
    })
}

pub fn cmd_epr_heatmap(cfg: &SweepConfig) -> Result<PathBuf, CliError> {
    let path = cfg.out_dir.join("epr_heatmap.csv");
    epr_table(cfg)?.write(&path)?;
    Ok(path)
}

/// Remote over local controlled-phase count; `undefined` when `Q = 1`.
pub fn eta_table(cfg: &SweepConfig) -> Result<Table, CliError> {
    heatmap(cfg, "eta", |layout, t| {
        let dc = build_distributed_iqft(layout, prune(t))?;
        Ok(coupling_ratio(&dc).ok())
    })
}

pub fn cmd_eta_heatmap(cfg: &SweepConfig) -> Result<PathBuf, CliError> {
    let path = cfg.out_dir.join("eta_heatmap.csv");
    eta_table(cfg)?.write(&path)?;
    Ok(path)
}

/// Communication operations per logical (or remote) controlled phase.
pub fn gamma_table(cfg: &SweepConfig) -> Result<Table, CliError> {
    let protocol = counting_protocol(cfg);
    let mode = cfg.gamma_denominator;
    let mut table = heatmap(cfg, "gamma", |layout, t| {
        let dc = build_distributed_iqft(layout, prune(t))?;
        let prog = lower(&dc, protocol, &LoweringConfig::default())?;
        Ok(communication_overhead(&prog, mode).ok())
    })?;
    table.header.push("denominator_mode".into());
    for row in &mut table.rows {
        row.push(mode.name().into());
    }
    Ok(table)
}

pub fn cmd_gamma_heatmap(cfg: &SweepConfig) -> Result<PathBuf, CliError> {
    let path = cfg.out_dir.join("gamma_heatmap.csv");
    gamma_table(cfg)?.write(&path)?;
    Ok(path)
}

/// Minimal threshold for each horizon `d_max` (the P range) and node size.
pub fn epsilon_table(cfg: &SweepConfig) -> Result<Table, CliError> {
    let mut table = Table::new(["d_max", "Q", "t_min"]);
    for d in cfg.p_range.iter() {
        for q in cfg.q_range.iter() {
            let (t, _) = invert_horizon(q, d as u32)?;
            table
                .rows
                .push(vec![d.to_string(), q.to_string(), t.to_string()]);
        }
    }
    Ok(table)
}

pub fn cmd_epsilon_heatmap(cfg: &SweepConfig) -> Result<PathBuf, CliError> {
    let path = cfg.out_dir.join("epsilon_heatmap.csv");
    epsilon_table(cfg)?.write(&path)?;
    Ok(path)
}

/// Which equivalence a verification check asserts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Check {
    /// Exact lowered output against the exact single-node output.
    Exact,
    /// Pruned lowered output against the pruned single-node output.
    Pruned,
    /// Pruned lowered output against the exact output, within the bound.
    Bound,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub check: Check,
    pub nodes: usize,
    pub qubits_per_node: usize,
    pub threshold: Threshold,
    pub protocol: Protocol,
    pub seed: u64,
    pub input: usize,
    /// Fidelity for the equivalence checks, infidelity for the bound check.
    pub value: f64,
    pub limit: f64,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let what = match self.check {
            Check::Exact => "exact output differs: fidelity",
            Check::Pruned => "pruned output differs: fidelity",
            Check::Bound => "pruning error exceeds bound: infidelity",
        };
        write!(
            f,
            "P={} Q={} t={} {} seed={} input={}: {what} {:e} (limit {:e})",
            self.nodes,
            self.qubits_per_node,
            self.threshold,
            self.protocol.name(),
            self.seed,
            self.input,
            self.value,
            self.limit
        )
    }
}

/// Summary of one `(layout, threshold, protocol)` point.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyPoint {
    pub nodes: usize,
    pub qubits_per_node: usize,
    pub threshold: Threshold,
    pub protocol: Protocol,
    pub runs: usize,
    pub min_fidelity: f64,
    pub max_infidelity_vs_exact: f64,
    pub operator_bound: f64,
    pub violations: Vec<Violation>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub points: Vec<VerifyPoint>,
}

impl VerifyReport {
    pub fn runs(&self) -> usize {
        self.points.iter().map(|p| p.runs).sum()
    }

    pub fn min_fidelity(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.min_fidelity)
            .fold(1.0, f64::min)
    }

    pub fn violations(&self) -> impl Iterator<Item = &Violation> {
        self.points.iter().flat_map(|p| &p.violations)
    }

    pub fn passed(&self) -> bool {
        self.violations().next().is_none()
    }

    pub fn table(&self) -> Table {
        let mut table = Table::new([
            "nodes",
            "qubits_per_node",
            "threshold",
            "protocol",
            "runs",
            "min_fidelity",
            "max_infidelity_vs_exact",
            "operator_bound",
            "violations",
        ]);
        for p in &self.points {
            table.rows.push(vec![
                p.nodes.to_string(),
                p.qubits_per_node.to_string(),
                p.threshold.to_string(),
                p.protocol.name().into(),
                p.runs.to_string(),
                real(p.min_fidelity),
                real(p.max_infidelity_vs_exact),
                real(p.operator_bound),
                p.violations.len().to_string(),
            ]);
        }
        table
    }
}

/// Layouts the verifier visits: the configured grid restricted to
/// `P * Q <= 10`.
pub fn verify_layouts(cfg: &SweepConfig) -> Vec<(usize, usize)> {
    cfg.p_range
        .iter()
        .flat_map(|p| cfg.q_range.iter().map(move |q| (p, q)))
        .filter(|&(p, q)| p * q <= VERIFY_MAX_QUBITS)
        .collect()
}

/// Lowers every layout, threshold and protocol and checks the simulated
/// output against the single-node transform. With `inject_fault` one
/// rotation of the distributed circuit is deliberately wrong.
pub fn cmd_verify(cfg: &SweepConfig, inject_fault: bool) -> Result<VerifyReport, CliError> {
    let protocols = match cfg.protocol {
        Some(p) => vec![p],
        None => vec![Protocol::Telegate, Protocol::Teledata],
    };
    let mut jobs = Vec::new();
    for (p, q) in verify_layouts(cfg) {
        let n = p * q;
        let thresholds = if cfg.thresholds.is_empty() && cfg.epsilon.is_empty() {
            (1..=n as u32)
                .map(|t| Threshold(Some(t)))
                .chain([Threshold(None)])
                .collect()
        } else {
            cfg.effective_thresholds()
        };
        jobs.extend(thresholds.into_iter().map(|t| (p, q, t)));
    }
    let points = jobs
        .par_iter()
        .map(|&(p, q, t)| verify_point(cfg, p, q, t, &protocols, inject_fault))
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(VerifyReport {
        points: points.into_iter().flatten().collect(),
    })
}

fn verify_point(
    cfg: &SweepConfig,
    p: usize,
    q: usize,
    t: Threshold,
    protocols: &[Protocol],
    inject_fault: bool,
) -> Result<Vec<VerifyPoint>, CliError> {
    let n = p * q;
    let sim = Simulator::with_max_qubits(cfg.max_qubits);
    let exact = build_monolithic_iqft(n, PruneSpec::Exact)?;
    let pruned = build_monolithic_iqft(n, prune(t))?;
    let mut dc = build_distributed_iqft(NodeLayout::new(p, q)?, prune(t))?;
    if inject_fault {
        dc = dc.with_corrupted_rotation();
    }
    let bound = match t.0 {
        Some(t) => infidelity_bound(n, t)?,
        None => 0.0,
    };

    let base = point_seed(cfg.seed, p, q, t);
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    let inputs = (0..cfg.haar_inputs)
        .map(|_| {
            let input = StateVector::haar_random(n, &mut rng)?;
            let want = sim.run(&pruned, &input, 0)?;
            let ideal = sim.run(&exact, &input, 0)?;
            Ok((input, want, ideal))
        })
        .collect::<Result<Vec<_>, diqft::Error>>()?;
    let seeds: Vec<u64> = (0..cfg.seeds).map(|_| rng.next_u64()).collect();

    let mut out = Vec::with_capacity(protocols.len());
    for &protocol in protocols {
        let prog = lower(&dc, protocol, &LoweringConfig::default())?;
        let mut point = VerifyPoint {
            nodes: p,
            qubits_per_node: q,
            threshold: t,
            protocol,
            runs: 0,
            min_fidelity: 1.0,
            max_infidelity_vs_exact: 0.0,
            operator_bound: bound,
            violations: Vec::new(),
        };
        for &seed in &seeds {
            for (i, (input, want, ideal)) in inputs.iter().enumerate() {
                let got = sim.run(&prog, input, seed)?;
                point.runs += 1;
                let violation = |check, value, limit| Violation {
                    check,
                    nodes: p,
                    qubits_per_node: q,
                    threshold: t,
                    protocol,
                    seed,
                    input: i,
                    value,
                    limit,
                };
                let f = fidelity(want, &got)?;
                point.min_fidelity = point.min_fidelity.min(f);
                if f < EQUIVALENCE_FLOOR {
                    let check = if t.0.is_none() {
                        Check::Exact
                    } else {
                        Check::Pruned
                    };
                    point
                        .violations
                        .push(violation(check, f, EQUIVALENCE_FLOOR));
                }
                let err = infidelity(ideal, &got)?;
                point.max_infidelity_vs_exact = point.max_infidelity_vs_exact.max(err);
                if t.0.is_some() && err > bound + BOUND_SLACK {
                    point.violations.push(violation(Check::Bound, err, bound));
                }
            }
        }
        out.push(point);
    }
    Ok(out)
}
