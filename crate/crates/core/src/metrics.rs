//! Fidelity, truncation bounds and resource ratios.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::layout::angle_of;
use crate::lower::LoweredProgram;
use crate::sim::StateVector;
use crate::synth::DistributedCircuit;

/// `|<ideal|approx>|^2`.
pub fn fidelity(ideal: &StateVector, approx: &StateVector) -> Result<f64> {
    Ok(ideal.inner(approx)?.norm_sqr())
}

/// `1 - fidelity`, computed as the squared residual of `approx` after
/// projecting out `ideal` so that tiny values keep their precision.
/// Both states are assumed normalised.
pub fn infidelity(ideal: &StateVector, approx: &StateVector) -> Result<f64> {
    let c = ideal.inner(approx)?;
    Ok(ideal
        .amplitudes()
        .iter()
        .zip(approx.amplitudes())
        .map(|(a, b)| (b - c * a).norm_sqr())
        .sum())
}

/// Phase missing on the last qubit when rotations beyond `k = t` are
/// dropped: `pi (2^-t - 2^-(n-1))`, or 0 when nothing is dropped.
pub fn phase_deficit(n: usize, t: u32) -> Result<f64> {
    if t == 0 {
        return Err(Error::NonPositive("threshold"));
    }
    if t as usize + 1 >= n {
        return Ok(0.0);
    }
    Ok(PI * (0.5f64.powi(t as i32) - 0.5f64.powi(n as i32 - 1)))
}

/// `(k, count)` for every rotation class removed from an `n`-qubit
/// transform at threshold `t`: `n - k` gates at each `k` in `t+1..n`.
pub fn pruned_inventory(n: usize, t: u32) -> impl Iterator<Item = (u32, usize)> {
    (t as usize + 1..n).map(move |k| (k as u32, n - k))
}

/// Operator-norm bound on the infidelity of the `t`-pruned transform:
/// `1 - max(0, 1 - E)^2` where `E` sums `2 |sin(theta / 2)|` over every
/// dropped gate.
pub fn infidelity_bound(n: usize, t: u32) -> Result<f64> {
    if t == 0 {
        return Err(Error::NonPositive("threshold"));
    }
    Ok(bound_from_inventory(pruned_inventory(n, t)))
}

/// [`infidelity_bound`] for an arbitrary list of dropped rotation classes.
pub fn bound_from_inventory(inventory: impl IntoIterator<Item = (u32, usize)>) -> f64 {
    let e: f64 = inventory
        .into_iter()
        .map(|(k, count)| count as f64 * 2.0 * (angle_of(k) / 2.0).sin().abs())
        .sum();
    let keep = (1.0 - e).max(0.0);
    1.0 - keep * keep
}

/// `eta = remote CPs / local CPs` of a built circuit.
pub fn coupling_ratio(circuit: &DistributedCircuit) -> Result<f64> {
    ratio(
        circuit.remote_cp_count(),
        circuit.local_cp_count(),
        "coupling ratio with no local controlled phases",
    )
}

/// What `gamma` divides the communication operation count by.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GammaDenominator {
    /// Every logical controlled phase, local and remote.
    AllCp,
    /// Remote logical controlled phases only.
    RemoteCp,
}

impl GammaDenominator {
    pub fn name(&self) -> &'static str {
        match self {
            GammaDenominator::AllCp => "all-cp",
            GammaDenominator::RemoteCp => "remote-cp",
        }
    }
}

impl std::str::FromStr for GammaDenominator {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "all-cp" => Ok(GammaDenominator::AllCp),
            "remote-cp" => Ok(GammaDenominator::RemoteCp),
            other => Err(format!(
                "unknown gamma denominator `{other}` (expected all-cp or remote-cp)"
            )),
        }
    }
}

/// `gamma = comm_ops / denominator` from the program's ledger.
pub fn communication_overhead(program: &LoweredProgram, mode: GammaDenominator) -> Result<f64> {
    let l = program.ledger();
    match mode {
        GammaDenominator::AllCp => ratio(
            l.comm_ops,
            l.logical_cp(),
            "overhead with no controlled phases",
        ),
        GammaDenominator::RemoteCp => ratio(
            l.comm_ops,
            l.remote_cp,
            "overhead with no remote controlled phases",
        ),
    }
}

fn ratio(num: usize, den: usize, what: &'static str) -> Result<f64> {
    if den == 0 {
        return Err(Error::UndefinedRatio(what));
    }
    Ok(num as f64 / den as f64)
}

/// Every metric for one lowered run. Undefined ratios are `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub fidelity: f64,
    pub infidelity: f64,
    pub infidelity_bound_operator: f64,
    pub phase_deficit_lastqubit: f64,
    pub epr_per_node_max: f64,
    pub eta: Option<f64>,
    pub gamma: Option<f64>,
    pub n_cp_local: usize,
    pub n_cp_remote: usize,
}

impl MetricsReport {
    /// `ideal` is the exact transform's output and `approx` the output of
    /// `program`, which must have been lowered from `circuit`.
    pub fn collect(
        circuit: &DistributedCircuit,
        program: &LoweredProgram,
        ideal: &StateVector,
        approx: &StateVector,
        mode: GammaDenominator,
    ) -> Result<Self> {
        let n = circuit.layout().num_qubits();
        let infidelity = infidelity(ideal, approx)?;
        let (bound, deficit) = match circuit.threshold() {
            Some(t) => (infidelity_bound(n, t)?, phase_deficit(n, t)?),
            None => (0.0, 0.0),
        };
        Ok(Self {
            fidelity: 1.0 - infidelity,
            infidelity,
            infidelity_bound_operator: bound,
            phase_deficit_lastqubit: deficit,
            epr_per_node_max: program.ledger().epr_per_node_max(),
            eta: coupling_ratio(circuit).ok(),
            gamma: communication_overhead(program, mode).ok(),
            n_cp_local: circuit.local_cp_count(),
            n_cp_remote: circuit.remote_cp_count(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::NodeLayout;
    use crate::lower::{lower_telegate, LoweringConfig};
    use crate::synth::{build_distributed_iqft, PruneSpec};
    use num_complex::Complex64;

    #[test]
    fn fidelity_of_basis_states() {
        let a = StateVector::basis(3, 2).unwrap();
        let b = StateVector::basis(3, 5).unwrap();
        assert_eq!(fidelity(&a, &a).unwrap(), 1.0);
        assert_eq!(fidelity(&a, &b).unwrap(), 0.0);
        assert_eq!(infidelity(&a, &b).unwrap(), 1.0);
        let c = StateVector::basis(2, 0).unwrap();
        assert!(matches!(
            fidelity(&a, &c),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn infidelity_keeps_precision() {
        let d = 1e-9f64;
        let a =
            StateVector::from_amplitudes(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)])
                .unwrap();
        let b = StateVector::from_amplitudes(vec![
            Complex64::new(d.cos(), 0.0),
            Complex64::new(d.sin(), 0.0),
        ])
        .unwrap();
        let got = infidelity(&a, &b).unwrap();
        assert!((got - d.sin().powi(2)).abs() < 1e-30, "{got}");
    }

    #[test]
    fn phase_deficit_examples() {
        assert_eq!(phase_deficit(18, 17).unwrap(), 0.0);
        assert_eq!(phase_deficit(18, 40).unwrap(), 0.0);
        let direct: f64 = (5..=17).map(|k| PI / 2f64.powi(k)).sum();
        assert!((phase_deficit(18, 4).unwrap() - direct).abs() < 1e-15);
        assert!(phase_deficit(5, 0).is_err());
    }

    #[test]
    fn bound_examples() {
        assert_eq!(infidelity_bound(6, 5).unwrap(), 0.0);
        let e: f64 = (3..=5)
            .map(|k| (6 - k) as f64 * 2.0 * (PI / 2f64.powi(k + 1)).sin())
            .sum();
        let want = 1.0 - (1.0 - e).max(0.0).powi(2);
        assert!((infidelity_bound(6, 2).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn coupling_ratio_examples() {
        let dc = build_distributed_iqft(NodeLayout::new(19, 2).unwrap(), PruneSpec::Exact).unwrap();
        assert_eq!(coupling_ratio(&dc).unwrap(), 36.0);
        let dc = build_distributed_iqft(NodeLayout::new(1, 5).unwrap(), PruneSpec::Exact).unwrap();
        assert_eq!(coupling_ratio(&dc).unwrap(), 0.0);
        let dc = build_distributed_iqft(NodeLayout::new(4, 1).unwrap(), PruneSpec::Exact).unwrap();
        assert!(matches!(coupling_ratio(&dc), Err(Error::UndefinedRatio(_))));
    }

    #[test]
    fn overhead_examples() {
        let cfg = LoweringConfig::default();
        let one = build_distributed_iqft(NodeLayout::new(2, 1).unwrap(), PruneSpec::Exact).unwrap();
        let prog = lower_telegate(&one, &cfg).unwrap();
        assert_eq!(
            communication_overhead(&prog, GammaDenominator::RemoteCp).unwrap(),
            7.0
        );

        let mono =
            build_distributed_iqft(NodeLayout::new(1, 4).unwrap(), PruneSpec::Exact).unwrap();
        let prog = lower_telegate(&mono, &cfg).unwrap();
        assert_eq!(
            communication_overhead(&prog, GammaDenominator::AllCp).unwrap(),
            0.0
        );
        assert!(communication_overhead(&prog, GammaDenominator::RemoteCp).is_err());

        let big =
            build_distributed_iqft(NodeLayout::new(19, 2).unwrap(), PruneSpec::Exact).unwrap();
        let prog = lower_telegate(&big, &cfg).unwrap();
        assert_eq!(
            communication_overhead(&prog, GammaDenominator::RemoteCp).unwrap(),
            3.5
        );
    }

    #[test]
    fn report_is_consistent() {
        let dc = build_distributed_iqft(NodeLayout::new(2, 2).unwrap(), PruneSpec::Threshold(2))
            .unwrap();
        let prog = lower_telegate(&dc, &LoweringConfig::default()).unwrap();
        let a = StateVector::basis(4, 0).unwrap();
        let r = MetricsReport::collect(&dc, &prog, &a, &a, GammaDenominator::AllCp).unwrap();
        assert!((r.fidelity + r.infidelity - 1.0).abs() < 1e-12);
        assert_eq!(r.n_cp_local + r.n_cp_remote, prog.ledger().logical_cp());
        assert_eq!(r.n_cp_remote, prog.ledger().remote_cp);
    }
}
