//! Qubit addressing over a `P`-node by `Q`-qubit grid and the rotation-angle
//! algebra shared by synthesis, lowering and simulation.
//!
//! Global index `I = node * Q + local`. Global index 0 is the least
//! significant bit of basis-state labels everywhere in this crate.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

/// The `(P, Q)` grid: `P` nodes each holding `Q` qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NodeLayout {
    nodes: usize,
    qubits_per_node: usize,
}

/// A qubit addressed by its host node and its index inside that node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QubitRef {
    pub node: usize,
    pub local: usize,
}

impl QubitRef {
    pub const fn new(node: usize, local: usize) -> Self {
        Self { node, local }
    }
}

impl fmt::Display for QubitRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}@n{}", self.local, self.node)
    }
}

impl NodeLayout {
    pub fn new(nodes: usize, qubits_per_node: usize) -> Result<Self> {
        if nodes == 0 || qubits_per_node == 0 {
            return Err(Error::InvalidLayout {
                nodes,
                qubits_per_node,
            });
        }
        Ok(Self {
            nodes,
            qubits_per_node,
        })
    }

    /// A single node holding the whole register.
    pub fn monolithic(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::EmptyRegister);
        }
        Self::new(1, num_qubits)
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn qubits_per_node(&self) -> usize {
        self.qubits_per_node
    }

    /// Register size `n = P * Q`.
    pub fn num_qubits(&self) -> usize {
        self.nodes * self.qubits_per_node
    }

    /// `I(q, p) = p * Q + q`.
    pub fn global_index(&self, local: usize, node: usize) -> Result<usize> {
        self.check(QubitRef { node, local })?;
        Ok(node * self.qubits_per_node + local)
    }

    pub fn global(&self, qubit: QubitRef) -> Result<usize> {
        self.global_index(qubit.local, qubit.node)
    }

    /// Inverse of [`global_index`](Self::global_index).
    pub fn qubit(&self, global: usize) -> Result<QubitRef> {
        if global >= self.num_qubits() {
            return Err(Error::WireOutOfRange {
                wire: global,
                width: self.num_qubits(),
            });
        }
        Ok(QubitRef {
            node: global / self.qubits_per_node,
            local: global % self.qubits_per_node,
        })
    }

    /// Host node of a global index. Panics when out of range.
    pub fn node_of(&self, global: usize) -> usize {
        assert!(
            global < self.num_qubits(),
            "global index {global} out of range"
        );
        global / self.qubits_per_node
    }

    fn check(&self, qubit: QubitRef) -> Result<()> {
        if qubit.node >= self.nodes || qubit.local >= self.qubits_per_node {
            return Err(Error::Addressing {
                local: qubit.local,
                node: qubit.node,
                nodes: self.nodes,
                qubits_per_node: self.qubits_per_node,
            });
        }
        Ok(())
    }
}

impl fmt::Display for NodeLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P={} Q={}", self.nodes, self.qubits_per_node)
    }
}

/// Radians of the controlled-phase rotation for an index difference `k`:
/// `-pi / 2^k`.
///
/// Successive values halve exactly until the result underflows.
pub fn rotation_angle(k: i64) -> Result<f64> {
    if k < 1 {
        return Err(Error::InvalidDistance(k));
    }
    Ok(angle_of(k.min(i64::from(u32::MAX)) as u32))
}

/// Infallible form of [`rotation_angle`] for an already validated `k`.
pub(crate) fn angle_of(k: u32) -> f64 {
    // 0.5^k is an exact power of two, so the product with pi is exact.
    -PI * 0.5f64.powi(k.min(2000) as i32)
}

/// Index difference `k = Q * (p_t - p_c) + (q_t - q_c)` between a control and
/// a later target.
pub fn index_distance(ctrl: QubitRef, tgt: QubitRef, layout: &NodeLayout) -> Result<u32> {
    let c = layout.global(ctrl)?;
    let t = layout.global(tgt)?;
    if t <= c {
        return Err(Error::InvalidPair {
            control: c,
            target: t,
        });
    }
    Ok((t - c) as u32)
}

/// Rotation applied by `ctrl` onto `tgt` in the distributed layout. Reduces to
/// the single-node angle when both qubits share a node.
pub fn cross_node_angle(ctrl: QubitRef, tgt: QubitRef, layout: &NodeLayout) -> Result<f64> {
    index_distance(ctrl, tgt, layout).map(angle_of)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn global_index_examples() {
        let l = NodeLayout::new(3, 2).unwrap();
        assert_eq!(l.global_index(0, 0).unwrap(), 0);
        assert_eq!(l.global_index(1, 2).unwrap(), 5);
        assert_eq!(l.global_index(1, 2).unwrap(), l.num_qubits() - 1);
        assert!(matches!(
            l.global_index(2, 0),
            Err(Error::Addressing { .. })
        ));
        assert!(l.global_index(0, 3).is_err());
    }

    #[test]
    fn layout_rejects_empty_dimensions() {
        assert!(NodeLayout::new(0, 3).is_err());
        assert!(NodeLayout::new(3, 0).is_err());
        assert_eq!(NodeLayout::monolithic(0), Err(Error::EmptyRegister));
    }

    #[test]
    fn rotation_angles() {
        assert_eq!(rotation_angle(1).unwrap(), -PI / 2.0);
        assert_eq!(rotation_angle(2).unwrap(), -PI / 4.0);
        let tiny = rotation_angle(30).unwrap();
        assert!(tiny < 0.0 && tiny.abs() < 3e-9);
        assert_eq!(rotation_angle(0), Err(Error::InvalidDistance(0)));
        assert_eq!(rotation_angle(-3), Err(Error::InvalidDistance(-3)));
    }

    #[test]
    fn cross_node_examples() {
        let l = NodeLayout::new(3, 2).unwrap();
        let a = cross_node_angle(QubitRef::new(0, 1), QubitRef::new(1, 0), &l).unwrap();
        assert_eq!(a, -PI / 2.0);
        let b = cross_node_angle(QubitRef::new(0, 0), QubitRef::new(2, 1), &l).unwrap();
        assert_eq!(b, -PI / 32.0);
        let c = cross_node_angle(QubitRef::new(1, 0), QubitRef::new(1, 1), &l).unwrap();
        assert_eq!(c, -PI / 2.0);
        assert!(matches!(
            cross_node_angle(QubitRef::new(1, 0), QubitRef::new(0, 1), &l),
            Err(Error::InvalidPair { .. })
        ));
    }

    proptest! {
        #[test]
        fn halving_is_exact(k in 1i64..1000) {
            prop_assert_eq!(rotation_angle(k + 1).unwrap(), rotation_angle(k).unwrap() / 2.0);
        }

        #[test]
        fn global_index_round_trips(p in 1usize..30, q in 1usize..30, seed in any::<usize>()) {
            let l = NodeLayout::new(p, q).unwrap();
            let i = seed % l.num_qubits();
            let r = l.qubit(i).unwrap();
            prop_assert_eq!((r.local, r.node), (i % q, i / q));
            prop_assert_eq!(l.global(r).unwrap(), i);
        }

        #[test]
        fn same_node_reduces_to_local_angle((q, a, b) in (2usize..20).prop_flat_map(|q| (Just(q), 0..q - 1)).prop_flat_map(|(q, a)| (Just(q), Just(a), a + 1..q)), node in 0usize..5) {
            let l = NodeLayout::new(5, q).unwrap();
            let cross = cross_node_angle(QubitRef::new(node, a), QubitRef::new(node, b), &l).unwrap();
            prop_assert_eq!(cross.to_bits(), rotation_angle((b - a) as i64).unwrap().to_bits());
        }
    }
}
