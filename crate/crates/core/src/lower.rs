//! Lowering of remote controlled phases onto entanglement-based protocols.
//!
//! Both protocols serialise their sessions and reuse a pool of
//! communication qubits appended after the logical register, so a lowered
//! program is `n + 2` wires wide whenever it talks to another node.
//!
//! * Telegate: one cat session (one EPR pair) per control qubit and
//!   communication block. The remote EPR half stands in as the control for
//!   every surviving rotation of that control in the block.
//! * Teledata: the control is teleported to the target's node and stays
//!   there until a later gate needs it elsewhere. It returns home only when a
//!   single-qubit gate touches it.

use std::fmt::Write as _;

use crate::circuit::{Circuit, ClassicalBit, Gate, Pauli};
use crate::error::{Error, Result};
use crate::layout::NodeLayout;
use crate::synth::{DistributedCircuit, Step};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Protocol {
    Telegate,
    Teledata,
}

impl Protocol {
    pub fn name(&self) -> &'static str {
        match self {
            Protocol::Telegate => "telegate",
            Protocol::Teledata => "teledata",
        }
    }
}

impl std::str::FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "telegate" => Ok(Protocol::Telegate),
            "teledata" => Ok(Protocol::Teledata),
            other => Err(format!(
                "unknown protocol `{other}` (expected telegate or teledata)"
            )),
        }
    }
}

/// Which auxiliary operations count towards `comm_ops`.
///
/// The default counts everything, which gives 7 operations per telegate
/// session: EPR generation, the cat CNOT, two measurements, the X and Z
/// corrections and the disentangling Hadamard. A teleport counts the same 7.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CommOpsPolicy {
    pub epr_generation: bool,
    pub cnot: bool,
    pub hadamard: bool,
    pub measurement: bool,
    pub correction: bool,
}

impl Default for CommOpsPolicy {
    fn default() -> Self {
        Self {
            epr_generation: true,
            cnot: true,
            hadamard: true,
            measurement: true,
            correction: true,
        }
    }
}

impl CommOpsPolicy {
    fn counts(&self, op: &Gate) -> bool {
        match op {
            Gate::Epr { .. } => self.epr_generation,
            Gate::Cnot { .. } => self.cnot,
            Gate::H(_) => self.hadamard,
            Gate::Measure { .. } => self.measurement,
            Gate::IfBit { .. } => self.correction,
            Gate::X(_) | Gate::Z(_) | Gate::CPhase { .. } => false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LoweringConfig {
    /// Communication qubits available to the lowering pass.
    pub ancilla_budget: usize,
    pub policy: CommOpsPolicy,
}

impl Default for LoweringConfig {
    fn default() -> Self {
        Self {
            ancilla_budget: 2,
            policy: CommOpsPolicy::default(),
        }
    }
}

/// Entanglement and operation counts of a lowered program.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ResourceLedger {
    pub epr_total: usize,
    /// EPR halves held by each node; every pair adds one to each endpoint.
    pub epr_halves: Vec<usize>,
    pub classical_messages: usize,
    /// Protocol-auxiliary operations only. Logical rotations never count.
    pub comm_ops: usize,
    pub local_cp: usize,
    pub remote_cp: usize,
    /// Telegate cat sessions, or teleports for teledata.
    pub sessions: usize,
}

impl ResourceLedger {
    fn new(nodes: usize) -> Self {
        Self {
            epr_halves: vec![0; nodes],
            ..Self::default()
        }
    }

    /// Half of every pair attributed to each endpoint node.
    pub fn epr_by_node(&self) -> Vec<f64> {
        self.epr_halves.iter().map(|&h| h as f64 / 2.0).collect()
    }

    pub fn epr_per_node_max(&self) -> f64 {
        self.epr_halves.iter().copied().max().unwrap_or(0) as f64 / 2.0
    }

    pub fn logical_cp(&self) -> usize {
        self.local_cp + self.remote_cp
    }
}

/// A primitive operation sequence together with its resource ledger.
#[derive(Clone, Debug, PartialEq)]
pub struct LoweredProgram {
    layout: NodeLayout,
    protocol: Protocol,
    width: usize,
    ops: Vec<Gate>,
    classical_bits: usize,
    final_wires: Vec<usize>,
    input_reversal: bool,
    ledger: ResourceLedger,
}

impl LoweredProgram {
    pub fn layout(&self) -> &NodeLayout {
        &self.layout
    }

    pub fn protocol(&self) -> Protocol {
        self.protocol
    }

    /// Logical qubits plus communication qubits.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn ops(&self) -> &[Gate] {
        &self.ops
    }

    pub fn classical_bits(&self) -> usize {
        self.classical_bits
    }

    /// Wire holding logical qubit `i` once the program has finished.
    pub fn final_wires(&self) -> &[usize] {
        &self.final_wires
    }

    pub fn input_reversal(&self) -> bool {
        self.input_reversal
    }

    pub fn ledger(&self) -> &ResourceLedger {
        &self.ledger
    }
}

/// Per-node EPR attribution and its maximum.
pub fn epr_per_node(program: &LoweredProgram) -> (Vec<f64>, f64) {
    let l = program.ledger();
    (l.epr_by_node(), l.epr_per_node_max())
}

struct Emitter {
    ops: Vec<Gate>,
    next_bit: ClassicalBit,
    ledger: ResourceLedger,
    policy: CommOpsPolicy,
}

impl Emitter {
    fn new(nodes: usize, policy: CommOpsPolicy) -> Self {
        Self {
            ops: Vec::new(),
            next_bit: 0,
            ledger: ResourceLedger::new(nodes),
            policy,
        }
    }

    fn bit(&mut self) -> ClassicalBit {
        self.next_bit += 1;
        self.next_bit - 1
    }

    fn aux(&mut self, op: Gate) {
        if self.policy.counts(&op) {
            self.ledger.comm_ops += 1;
        }
        self.ops.push(op);
    }

    fn logical(&mut self, op: Gate) {
        self.ops.push(op);
    }

    fn epr(&mut self, a: usize, b: usize, node_a: usize, node_b: usize) {
        self.aux(Gate::Epr { a, b });
        self.ledger.epr_total += 1;
        self.ledger.epr_halves[node_a] += 1;
        self.ledger.epr_halves[node_b] += 1;
    }

    fn finish(
        self,
        layout: NodeLayout,
        protocol: Protocol,
        width: usize,
        final_wires: Vec<usize>,
        input_reversal: bool,
    ) -> LoweredProgram {
        LoweredProgram {
            layout,
            protocol,
            width,
            ops: self.ops,
            classical_bits: self.next_bit,
            final_wires,
            input_reversal,
            ledger: self.ledger,
        }
    }
}

fn check_budget(cfg: &LoweringConfig) -> Result<()> {
    if cfg.ancilla_budget < 2 {
        return Err(Error::AncillaBudget {
            budget: cfg.ancilla_budget,
        });
    }
    Ok(())
}

/// Lowers every communication block with cat-entanglement sessions.
pub fn lower_telegate(dc: &DistributedCircuit, cfg: &LoweringConfig) -> Result<LoweredProgram> {
    let layout = *dc.layout();
    let n = layout.num_qubits();
    let remote = !dc.comm_blocks().is_empty();
    if remote {
        check_budget(cfg)?;
    }
    let width = if remote { n + 2 } else { n };
    let (near, far) = (n, n + 1);
    let mut em = Emitter::new(layout.nodes(), cfg.policy);

    for step in dc.schedule() {
        match *step {
            Step::Local(p) => {
                for g in dc.local_gates_global(p) {
                    if g.is_cphase() {
                        em.ledger.local_cp += 1;
                    }
                    em.logical(g);
                }
            }
            Step::Comm(i) => {
                let block = &dc.comm_blocks()[i];
                for group in block.by_control() {
                    let ctrl = layout.global(group[0].ctrl)?;
                    // cat-entangle
                    em.epr(near, far, block.ctrl_node, block.tgt_node);
                    em.aux(Gate::Cnot {
                        control: ctrl,
                        target: near,
                    });
                    let m_a = em.bit();
                    em.aux(Gate::Measure {
                        qubit: near,
                        bit: m_a,
                    });
                    em.ledger.classical_messages += 1;
                    em.aux(Gate::IfBit {
                        bit: m_a,
                        pauli: Pauli::X,
                        qubit: far,
                    });
                    // local interaction at the target node
                    for g in group {
                        em.logical(Gate::CPhase {
                            control: far,
                            target: layout.global(g.tgt)?,
                            k: g.k,
                        });
                        em.ledger.remote_cp += 1;
                    }
                    // cat-disentangle
                    em.aux(Gate::H(far));
                    let m_b = em.bit();
                    em.aux(Gate::Measure {
                        qubit: far,
                        bit: m_b,
                    });
                    em.ledger.classical_messages += 1;
                    em.aux(Gate::IfBit {
                        bit: m_b,
                        pauli: Pauli::Z,
                        qubit: ctrl,
                    });
                    em.ledger.sessions += 1;
                }
            }
        }
    }
    Ok(em.finish(
        layout,
        Protocol::Telegate,
        width,
        (0..n).collect(),
        dc.input_reversal(),
    ))
}

/// Lowers the distributed schedule by teleporting controls.
pub fn lower_teledata(dc: &DistributedCircuit, cfg: &LoweringConfig) -> Result<LoweredProgram> {
    lower_teledata_circuit(&dc.flatten(), cfg)
}

/// Teledata lowering of an arbitrary logical circuit whose layout assigns
/// every qubit a home node.
///
/// Two-qubit gates across nodes move the control to wherever the target
/// currently lives. Single-qubit gates bring the qubit home first. A qubit
/// never used again stays where it is, so a lone remote gate costs one pair
/// and a remote gate followed by a home gate costs two.
pub fn lower_teledata_circuit(circuit: &Circuit, cfg: &LoweringConfig) -> Result<LoweredProgram> {
    let layout = *circuit.layout();
    let n = layout.num_qubits();
    let crosses = circuit.gates().iter().any(|g| match *g {
        Gate::Cnot { control, target }
        | Gate::CPhase {
            control, target, ..
        } => layout.node_of(control) != layout.node_of(target),
        _ => false,
    });
    if crosses {
        check_budget(cfg)?;
    }
    let width = if crosses { n + 2 } else { n };

    let home: Vec<usize> = (0..n).map(|q| layout.node_of(q)).collect();
    let mut loc = home.clone();
    let mut wire: Vec<usize> = (0..n).collect();
    // Popped from the back: the first free wire is n.
    let mut free: Vec<usize> = if crosses { vec![n + 1, n] } else { Vec::new() };
    let mut em = Emitter::new(layout.nodes(), cfg.policy);

    let mut teleport = |em: &mut Emitter,
                        q: usize,
                        dest: usize,
                        wire: &mut Vec<usize>,
                        loc: &mut Vec<usize>|
     -> Result<()> {
        let budget = Error::AncillaBudget {
            budget: cfg.ancilla_budget,
        };
        let send = free.pop().ok_or_else(|| budget.clone())?;
        let recv = free.pop().ok_or(budget)?;
        let data = wire[q];
        em.epr(send, recv, loc[q], dest);
        em.aux(Gate::Cnot {
            control: data,
            target: send,
        });
        em.aux(Gate::H(data));
        let m1 = em.bit();
        em.aux(Gate::Measure {
            qubit: data,
            bit: m1,
        });
        let m2 = em.bit();
        em.aux(Gate::Measure {
            qubit: send,
            bit: m2,
        });
        em.ledger.classical_messages += 1;
        em.aux(Gate::IfBit {
            bit: m2,
            pauli: Pauli::X,
            qubit: recv,
        });
        em.aux(Gate::IfBit {
            bit: m1,
            pauli: Pauli::Z,
            qubit: recv,
        });
        em.ledger.sessions += 1;
        free.push(send);
        free.push(data);
        wire[q] = recv;
        loc[q] = dest;
        Ok(())
    };

    for g in circuit.gates() {
        match *g {
            Gate::Cnot { control, target }
            | Gate::CPhase {
                control, target, ..
            } => {
                if loc[control] != loc[target] {
                    teleport(&mut em, control, loc[target], &mut wire, &mut loc)?;
                }
                if g.is_cphase() {
                    if home[control] == home[target] {
                        em.ledger.local_cp += 1;
                    } else {
                        em.ledger.remote_cp += 1;
                    }
                }
                em.logical(match *g {
                    Gate::CPhase { k, .. } => Gate::CPhase {
                        control: wire[control],
                        target: wire[target],
                        k,
                    },
                    _ => Gate::Cnot {
                        control: wire[control],
                        target: wire[target],
                    },
                });
            }
            Gate::H(q) | Gate::X(q) | Gate::Z(q) => {
                if loc[q] != home[q] {
                    teleport(&mut em, q, home[q], &mut wire, &mut loc)?;
                }
                em.logical(match *g {
                    Gate::H(_) => Gate::H(wire[q]),
                    Gate::X(_) => Gate::X(wire[q]),
                    _ => Gate::Z(wire[q]),
                });
            }
            Gate::Measure { .. } | Gate::IfBit { .. } | Gate::Epr { .. } => {
                return Err(Error::Parse {
                    line: 0,
                    message: format!(
                        "teledata lowering expects a unitary logical circuit, got {g:?}"
                    ),
                });
            }
        }
    }
    Ok(em.finish(
        layout,
        Protocol::Teledata,
        width,
        wire,
        circuit.input_reversal(),
    ))
}

/// Lowers with the requested protocol.
pub fn lower(
    dc: &DistributedCircuit,
    protocol: Protocol,
    cfg: &LoweringConfig,
) -> Result<LoweredProgram> {
    match protocol {
        Protocol::Telegate => lower_telegate(dc, cfg),
        Protocol::Teledata => lower_teledata(dc, cfg),
    }
}

const MAGIC: &str = "diqft-program v1";

impl LoweredProgram {
    /// Line-oriented text form. See the book chapter on protocols for the
    /// grammar.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let l = &self.ledger;
        let join =
            |v: &[usize], sep: &str| v.iter().map(usize::to_string).collect::<Vec<_>>().join(sep);
        writeln!(s, "{MAGIC}").unwrap();
        writeln!(s, "protocol {}", self.protocol.name()).unwrap();
        writeln!(
            s,
            "layout {} {}",
            self.layout.nodes(),
            self.layout.qubits_per_node()
        )
        .unwrap();
        writeln!(s, "width {}", self.width).unwrap();
        writeln!(s, "bits {}", self.classical_bits).unwrap();
        writeln!(s, "reversal {}", u8::from(self.input_reversal)).unwrap();
        writeln!(s, "final {}", join(&self.final_wires, " ")).unwrap();
        writeln!(
            s,
            "ledger epr_total={} classical_messages={} comm_ops={} local_cp={} remote_cp={} sessions={} epr_halves={}",
            l.epr_total,
            l.classical_messages,
            l.comm_ops,
            l.local_cp,
            l.remote_cp,
            l.sessions,
            join(&l.epr_halves, ",")
        )
        .unwrap();
        for op in &self.ops {
            match *op {
                Gate::H(q) => writeln!(s, "h {q}"),
                Gate::X(q) => writeln!(s, "x {q}"),
                Gate::Z(q) => writeln!(s, "z {q}"),
                Gate::Cnot { control, target } => writeln!(s, "cx {control} {target}"),
                Gate::CPhase { control, target, k } => writeln!(s, "cp {control} {target} {k}"),
                Gate::Measure { qubit, bit } => writeln!(s, "measure {qubit} {bit}"),
                Gate::IfBit { bit, pauli, qubit } => {
                    let p = if pauli == Pauli::X { "x" } else { "z" };
                    writeln!(s, "if {bit} {p} {qubit}")
                }
                Gate::Epr { a, b } => writeln!(s, "epr {a} {b}"),
            }
            .unwrap();
        }
        s
    }

    /// Parses the output of [`to_text`](Self::to_text).
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let err = |line: usize, message: String| Error::Parse { line, message };
        let num = |line: usize, tok: Option<&str>| -> Result<usize> {
            let tok = tok.ok_or_else(|| err(line, "missing operand".into()))?;
            tok.parse()
                .map_err(|_| err(line, format!("expected an integer, got `{tok}`")))
        };
        let mut header = |key: &str| -> Result<(usize, Vec<String>)> {
            let (line, l) = lines
                .next()
                .ok_or_else(|| err(0, format!("missing `{key}` line")))?;
            let mut toks = l.split_whitespace();
            if toks.next() != Some(key) {
                return Err(err(line, format!("expected `{key}`")));
            }
            Ok((line, toks.map(str::to_owned).collect()))
        };

        match header("diqft-program")? {
            (_, v) if v == ["v1"] => {}
            (line, _) => return Err(err(line, "unsupported format version".into())),
        }
        let (line, v) = header("protocol")?;
        let protocol: Protocol = v
            .first()
            .map(String::as_str)
            .unwrap_or("")
            .parse()
            .map_err(|e| err(line, e))?;
        let (line, v) = header("layout")?;
        let layout = NodeLayout::new(
            num(line, v.first().map(String::as_str))?,
            num(line, v.get(1).map(String::as_str))?,
        )?;
        let (line, v) = header("width")?;
        let width = num(line, v.first().map(String::as_str))?;
        let (line, v) = header("bits")?;
        let classical_bits = num(line, v.first().map(String::as_str))?;
        let (line, v) = header("reversal")?;
        let input_reversal = num(line, v.first().map(String::as_str))? == 1;
        let (line, v) = header("final")?;
        let final_wires = v
            .iter()
            .map(|t| num(line, Some(t)))
            .collect::<Result<Vec<_>>>()?;
        let (line, v) = header("ledger")?;
        let mut ledger = ResourceLedger::new(layout.nodes());
        for kv in &v {
            let (key, val) = kv
                .split_once('=')
                .ok_or_else(|| err(line, format!("malformed ledger entry `{kv}`")))?;
            match key {
                "epr_halves" => {
                    ledger.epr_halves = val
                        .split(',')
                        .filter(|t| !t.is_empty())
                        .map(|t| num(line, Some(t)))
                        .collect::<Result<_>>()?
                }
                _ => {
                    let x = num(line, Some(val))?;
                    match key {
                        "epr_total" => ledger.epr_total = x,
                        "classical_messages" => ledger.classical_messages = x,
                        "comm_ops" => ledger.comm_ops = x,
                        "local_cp" => ledger.local_cp = x,
                        "remote_cp" => ledger.remote_cp = x,
                        "sessions" => ledger.sessions = x,
                        _ => return Err(err(line, format!("unknown ledger key `{key}`"))),
                    }
                }
            }
        }

        let mut ops = Vec::new();
        for (line, l) in lines {
            let mut t = l.split_whitespace();
            let op = t.next().unwrap_or_default();
            let op = match op {
                "h" => Gate::H(num(line, t.next())?),
                "x" => Gate::X(num(line, t.next())?),
                "z" => Gate::Z(num(line, t.next())?),
                "cx" => Gate::Cnot {
                    control: num(line, t.next())?,
                    target: num(line, t.next())?,
                },
                "cp" => Gate::CPhase {
                    control: num(line, t.next())?,
                    target: num(line, t.next())?,
                    k: num(line, t.next())? as u32,
                },
                "measure" => Gate::Measure {
                    qubit: num(line, t.next())?,
                    bit: num(line, t.next())?,
                },
                "if" => {
                    let bit = num(line, t.next())?;
                    let pauli = match t.next() {
                        Some("x") => Pauli::X,
                        Some("z") => Pauli::Z,
                        other => {
                            return Err(err(line, format!("bad correction {other:?}")));
                        }
                    };
                    Gate::IfBit {
                        bit,
                        pauli,
                        qubit: num(line, t.next())?,
                    }
                }
                "epr" => Gate::Epr {
                    a: num(line, t.next())?,
                    b: num(line, t.next())?,
                },
                other => return Err(err(line, format!("unknown opcode `{other}`"))),
            };
            if let Some(extra) = t.next() {
                return Err(err(line, format!("unexpected operand `{extra}`")));
            }
            op.validate(width).map_err(|e| err(line, e.to_string()))?;
            ops.push(op);
        }
        if final_wires.len() != layout.num_qubits() {
            return Err(err(0, "final wire map does not cover the register".into()));
        }
        Ok(Self {
            layout,
            protocol,
            width,
            ops,
            classical_bits,
            final_wires,
            input_reversal,
            ledger,
        })
    }
}
