//! Inverse-QFT synthesis: monolithic and distributed builds, the pruning
//! threshold, and the communication horizon.
//!
//! A controlled phase between global indices `c < t` has index difference
//! `k = t - c` and angle `-pi / 2^k`. Pruning with threshold `t` keeps exactly
//! the gates with `k <= t`.

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::layout::{NodeLayout, QubitRef};

/// Which controlled phases survive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PruneSpec {
    Exact,
    /// Fractional phase tolerance in `(0, 1)`.
    Epsilon(f64),
    /// Explicit threshold `t >= 1`.
    Threshold(u32),
    /// Communication horizon `d_max >= 1`; the minimal consistent threshold
    /// `Q * (d_max - 1) + 1` is used.
    Horizon(u32),
}

impl PruneSpec {
    /// Resolves to a threshold for the given node capacity. `None` means no
    /// pruning.
    pub fn threshold(&self, qubits_per_node: usize) -> Result<Option<u32>> {
        match *self {
            PruneSpec::Exact => Ok(None),
            PruneSpec::Epsilon(eps) => threshold_from_epsilon(eps).map(Some),
            PruneSpec::Threshold(0) => Err(Error::NonPositive("threshold")),
            PruneSpec::Threshold(t) => Ok(Some(t)),
            PruneSpec::Horizon(d) => invert_horizon(qubits_per_node, d).map(|(t, _)| Some(t)),
        }
    }
}

/// `ceil(-log2(eps))`.
pub fn threshold_from_epsilon(eps: f64) -> Result<u32> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidTolerance(eps));
    }
    let x = -eps.log2();
    // Powers of two must land on their integer exponent.
    let nearest = x.round();
    let t = if (x - nearest).abs() < 1e-9 {
        nearest
    } else {
        x.ceil()
    };
    Ok((t as u32).max(1))
}

/// Largest node distance with any surviving gate for tolerance `eps`.
pub fn communication_horizon(eps: f64, qubits_per_node: usize) -> Result<u32> {
    let t = threshold_from_epsilon(eps)?;
    horizon_for_threshold(t, qubits_per_node)
}

/// `floor((t - 1) / Q) + 1`.
pub fn horizon_for_threshold(t: u32, qubits_per_node: usize) -> Result<u32> {
    if t == 0 {
        return Err(Error::NonPositive("threshold"));
    }
    if qubits_per_node == 0 {
        return Err(Error::NonPositive("qubits per node"));
    }
    Ok(((t as usize - 1) / qubits_per_node + 1) as u32)
}

/// Smallest threshold whose horizon is `d_max`, and the tolerance `2^-t`
/// it guarantees.
pub fn invert_horizon(qubits_per_node: usize, d_max: u32) -> Result<(u32, f64)> {
    if qubits_per_node == 0 {
        return Err(Error::NonPositive("qubits per node"));
    }
    if d_max == 0 {
        return Err(Error::NonPositive("communication horizon"));
    }
    let t = qubits_per_node as u32 * (d_max - 1) + 1;
    Ok((t, 0.5f64.powi(t as i32)))
}

/// Smallest index difference present in a block at node distance `d`:
/// `Q * (d - 1) + 1`.
pub fn k_min(qubits_per_node: usize, distance: usize) -> u32 {
    (qubits_per_node * (distance - 1) + 1) as u32
}

#[inline]
pub(crate) fn keeps(k: u32, threshold: Option<u32>) -> bool {
    threshold.is_none_or(|t| k <= t)
}

/// H and CP gates of an `n`-qubit inverse QFT, offset by `base`.
fn iqft_gates(n: usize, threshold: Option<u32>, base: usize, out: &mut Vec<Gate>) {
    for j in 0..n {
        out.push(Gate::H(base + j));
        for i in j + 1..n {
            let k = (i - j) as u32;
            if keeps(k, threshold) {
                out.push(Gate::CPhase {
                    control: base + j,
                    target: base + i,
                    k,
                });
            }
        }
    }
}

/// Single-node inverse QFT on `n` qubits.
///
/// For `j = 0..n` the schedule is `H(j)` followed by `CP(theta_{i-j})` onto
/// every later qubit `i` that survives pruning. The output bit reversal is
/// recorded on the circuit rather than emitted as swaps.
pub fn build_monolithic_iqft(n: usize, prune: PruneSpec) -> Result<Circuit> {
    let layout = NodeLayout::monolithic(n)?;
    let threshold = prune.threshold(n)?;
    let mut gates = Vec::with_capacity(n + n * (n - 1) / 2);
    iqft_gates(n, threshold, 0, &mut gates);
    Circuit::new(layout, gates, true)
}

/// One remote controlled phase inside a communication block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RemoteCp {
    pub ctrl: QubitRef,
    pub tgt: QubitRef,
    pub k: u32,
}

/// All remote rotations between a control node and a later target node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommBlock {
    pub ctrl_node: usize,
    pub tgt_node: usize,
    /// Ordered by control local index, then target local index.
    pub gates: Vec<RemoteCp>,
}

impl CommBlock {
    /// The unpruned block: `Q^2` gates.
    pub fn full(layout: &NodeLayout, ctrl_node: usize, tgt_node: usize) -> Self {
        assert!(ctrl_node < tgt_node && tgt_node < layout.nodes());
        let q = layout.qubits_per_node();
        let d = tgt_node - ctrl_node;
        let mut gates = Vec::with_capacity(q * q);
        for qc in 0..q {
            for qt in 0..q {
                gates.push(RemoteCp {
                    ctrl: QubitRef::new(ctrl_node, qc),
                    tgt: QubitRef::new(tgt_node, qt),
                    k: (q * d + qt - qc) as u32,
                });
            }
        }
        Self {
            ctrl_node,
            tgt_node,
            gates,
        }
    }

    pub fn distance(&self) -> usize {
        self.tgt_node - self.ctrl_node
    }

    /// Gates grouped by control qubit, in schedule order.
    pub fn by_control(&self) -> impl Iterator<Item = &[RemoteCp]> {
        self.gates.chunk_by(|a, b| a.ctrl == b.ctrl)
    }
}

/// Drops gates with `k > t`. Returns `None` when the whole block falls
/// beyond the horizon.
pub fn prune_block(block: CommBlock, threshold: Option<u32>) -> Option<CommBlock> {
    let Some(t) = threshold else {
        return Some(block);
    };
    let CommBlock {
        ctrl_node,
        tgt_node,
        gates,
    } = block;
    let gates: Vec<_> = gates.into_iter().filter(|g| g.k <= t).collect();
    if gates.is_empty() {
        return None;
    }
    Some(CommBlock {
        ctrl_node,
        tgt_node,
        gates,
    })
}

/// One entry of the distributed execution order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    /// Index into [`DistributedCircuit::comm_blocks`].
    Comm(usize),
    /// The local inverse QFT of a node.
    Local(usize),
}

/// The inverse QFT split into per-node local blocks and inter-node
/// communication blocks.
///
/// Node `p` executes its incoming blocks from distance `p` down to 1 and then
/// its local block.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributedCircuit {
    layout: NodeLayout,
    threshold: Option<u32>,
    local_blocks: Vec<Circuit>,
    comm_blocks: Vec<CommBlock>,
    schedule: Vec<Step>,
}

impl DistributedCircuit {
    pub fn layout(&self) -> &NodeLayout {
        &self.layout
    }

    pub fn threshold(&self) -> Option<u32> {
        self.threshold
    }

    /// Per-node `Q`-qubit circuits in local indices.
    pub fn local_blocks(&self) -> &[Circuit] {
        &self.local_blocks
    }

    pub fn comm_blocks(&self) -> &[CommBlock] {
        &self.comm_blocks
    }

    pub fn schedule(&self) -> &[Step] {
        &self.schedule
    }

    /// The bit reversal applies to the whole register on entry.
    pub fn input_reversal(&self) -> bool {
        true
    }

    pub fn local_cp_count(&self) -> usize {
        self.local_blocks.iter().map(Circuit::cp_count).sum()
    }

    pub fn remote_cp_count(&self) -> usize {
        self.comm_blocks.iter().map(|b| b.gates.len()).sum()
    }

    pub fn max_distance(&self) -> Option<usize> {
        self.comm_blocks.iter().map(CommBlock::distance).max()
    }

    /// Gates of the local block of `node`, translated to global indices.
    pub fn local_gates_global(&self, node: usize) -> impl Iterator<Item = Gate> + '_ {
        let off = node * self.layout.qubits_per_node();
        self.local_blocks[node]
            .gates()
            .iter()
            .map(move |g| match *g {
                Gate::H(q) => Gate::H(q + off),
                Gate::CPhase { control, target, k } => Gate::CPhase {
                    control: control + off,
                    target: target + off,
                    k,
                },
                other => unreachable!("local blocks hold only H and CP, got {other:?}"),
            })
    }

    /// The whole schedule as one logical circuit over the global register.
    pub fn flatten(&self) -> Circuit {
        let l = &self.layout;
        let mut gates = Vec::new();
        for step in &self.schedule {
            match *step {
                Step::Local(p) => gates.extend(self.local_gates_global(p)),
                Step::Comm(i) => {
                    for g in &self.comm_blocks[i].gates {
                        gates.push(Gate::CPhase {
                            control: l.global(g.ctrl).expect("valid ref"),
                            target: l.global(g.tgt).expect("valid ref"),
                            k: g.k,
                        });
                    }
                }
            }
        }
        Circuit::new(*l, gates, true).expect("distributed schedule is well formed")
    }

    /// Test hook: the same circuit with one rotation exponent changed.
    #[doc(hidden)]
    pub fn with_corrupted_rotation(&self) -> Self {
        let mut out = self.clone();
        if let Some(g) = out
            .comm_blocks
            .iter_mut()
            .flat_map(|b| b.gates.iter_mut())
            .next()
        {
            g.k += 1;
            return out;
        }
        for block in &mut out.local_blocks {
            let mut gates = block.gates().to_vec();
            if let Some(Gate::CPhase { k, .. }) = gates.iter_mut().find(|g| g.is_cphase()) {
                *k += 1;
                *block = Circuit::new(*block.layout(), gates, false).expect("same shape");
                return out;
            }
        }
        out
    }
}

/// Splits the inverse QFT over `layout`, pruning with `prune`.
///
/// The flattened schedule holds the same controlled-phase multiset as
/// [`build_monolithic_iqft`] on `P * Q` qubits, in a dependency-respecting
/// order.
pub fn build_distributed_iqft(layout: NodeLayout, prune: PruneSpec) -> Result<DistributedCircuit> {
    let q = layout.qubits_per_node();
    let threshold = prune.threshold(q)?;
    let local_layout = NodeLayout::monolithic(q)?;
    let mut local_blocks = Vec::with_capacity(layout.nodes());
    let mut comm_blocks = Vec::new();
    let mut schedule = Vec::new();
    for p in 0..layout.nodes() {
        for d in (1..=p).rev() {
            if threshold.is_some_and(|t| k_min(q, d) > t) {
                continue;
            }
            let block = CommBlock::full(&layout, p - d, p);
            if let Some(block) = prune_block(block, threshold) {
                schedule.push(Step::Comm(comm_blocks.len()));
                comm_blocks.push(block);
            }
        }
        let mut gates = Vec::new();
        iqft_gates(q, threshold, 0, &mut gates);
        local_blocks.push(Circuit::new(local_layout, gates, false)?);
        schedule.push(Step::Local(p));
    }
    Ok(DistributedCircuit {
        layout,
        threshold,
        local_blocks,
        comm_blocks,
        schedule,
    })
}
