//! Gate-level IR.
//!
//! Operands are wire indices. For logical circuits a wire is a global qubit
//! index under the circuit's [`NodeLayout`]; lowered programs append
//! communication qubits after the logical register.

use crate::error::{Error, Result};
use crate::layout::{angle_of, NodeLayout};

/// Dense id of a classical bit, allocated by the lowering pass.
pub type ClassicalBit = usize;

/// Single-qubit Pauli used as a measurement-conditioned correction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    X,
    Z,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    H(usize),
    X(usize),
    Z(usize),
    Cnot {
        control: usize,
        target: usize,
    },
    /// `diag(1, 1, 1, exp(-i pi / 2^k))`. The angle is kept as the exact
    /// dyadic exponent `k >= 1`.
    CPhase {
        control: usize,
        target: usize,
        k: u32,
    },
    Measure {
        qubit: usize,
        bit: ClassicalBit,
    },
    /// Applies `pauli` to `qubit` iff `bit` reads 1.
    IfBit {
        bit: ClassicalBit,
        pauli: Pauli,
        qubit: usize,
    },
    /// Pseudo-op: resets both (already measured) wires and prepares
    /// `(|00> + |11>) / sqrt(2)` on them.
    Epr {
        a: usize,
        b: usize,
    },
}

impl Gate {
    /// Wires touched by this gate.
    pub fn wires(&self) -> ([usize; 2], usize) {
        match *self {
            Gate::H(q) | Gate::X(q) | Gate::Z(q) => ([q, q], 1),
            Gate::Measure { qubit, .. } | Gate::IfBit { qubit, .. } => ([qubit, qubit], 1),
            Gate::Cnot { control, target }
            | Gate::CPhase {
                control, target, ..
            } => ([control, target], 2),
            Gate::Epr { a, b } => ([a, b], 2),
        }
    }

    /// Rotation angle in radians for a controlled phase.
    pub fn angle(&self) -> Option<f64> {
        match *self {
            Gate::CPhase { k, .. } => Some(angle_of(k)),
            _ => None,
        }
    }

    pub fn is_cphase(&self) -> bool {
        matches!(self, Gate::CPhase { .. })
    }

    pub(crate) fn validate(&self, width: usize) -> Result<()> {
        let (ws, count) = self.wires();
        for &w in &ws[..count] {
            if w >= width {
                return Err(Error::WireOutOfRange { wire: w, width });
            }
        }
        match *self {
            Gate::Cnot { control, target }
            | Gate::CPhase {
                control, target, ..
            } if control == target => Err(Error::InvalidPair { control, target }),
            Gate::Epr { a, b } if a == b => Err(Error::InvalidPair {
                control: a,
                target: b,
            }),
            Gate::CPhase { k: 0, .. } => Err(Error::InvalidDistance(0)),
            _ => Ok(()),
        }
    }
}

/// An ordered gate list over a laid-out logical register.
///
/// `input_reversal` marks that the register is read bit-reversed on entry:
/// the H/CP cascade emitted by the synthesis module computes the inverse
/// transform only after this relabelling, which costs no gates.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    layout: NodeLayout,
    gates: Vec<Gate>,
    classical_bits: usize,
    input_reversal: bool,
}

impl Circuit {
    pub fn new(layout: NodeLayout, gates: Vec<Gate>, input_reversal: bool) -> Result<Self> {
        let width = layout.num_qubits();
        let mut classical_bits = 0;
        for g in &gates {
            g.validate(width)?;
            if let Gate::Measure { bit, .. } | Gate::IfBit { bit, .. } = *g {
                classical_bits = classical_bits.max(bit + 1);
            }
        }
        Ok(Self {
            layout,
            gates,
            classical_bits,
            input_reversal,
        })
    }

    pub fn layout(&self) -> &NodeLayout {
        &self.layout
    }

    pub fn num_qubits(&self) -> usize {
        self.layout.num_qubits()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn classical_bits(&self) -> usize {
        self.classical_bits
    }

    pub fn input_reversal(&self) -> bool {
        self.input_reversal
    }

    pub fn cp_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_cphase()).count()
    }

    pub fn h_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::H(_)))
            .count()
    }

    /// `(control, target, k)` of every controlled phase, in order.
    pub fn cphases(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        self.gates.iter().filter_map(|g| match *g {
            Gate::CPhase { control, target, k } => Some((control, target, k)),
            _ => None,
        })
    }

    /// Consumes the circuit, returning its gate list.
    pub fn into_gates(self) -> Vec<Gate> {
        self.gates
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_operands() {
        let l = NodeLayout::new(1, 2).unwrap();
        assert!(Circuit::new(l, vec![Gate::H(2)], false).is_err());
        assert!(Circuit::new(
            l,
            vec![Gate::CPhase {
                control: 1,
                target: 1,
                k: 1
            }],
            false
        )
        .is_err());
        assert!(Circuit::new(
            l,
            vec![Gate::CPhase {
                control: 0,
                target: 1,
                k: 0
            }],
            false
        )
        .is_err());
    }

    #[test]
    fn counts_classical_bits() {
        let l = NodeLayout::new(1, 2).unwrap();
        let c = Circuit::new(
            l,
            vec![
                Gate::Measure { qubit: 0, bit: 3 },
                Gate::IfBit {
                    bit: 3,
                    pauli: Pauli::X,
                    qubit: 1,
                },
            ],
            false,
        )
        .unwrap();
        assert_eq!(c.classical_bits(), 4);
    }
}
