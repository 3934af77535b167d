//! Distributed inverse quantum Fourier transform: synthesis, threshold
//! pruning, lowering onto EPR-based remote-gate protocols, and a seeded
//! statevector simulator to check it all.
//!
//! ```
//! use diqft::{build_distributed_iqft, lower_telegate, LoweringConfig, NodeLayout, PruneSpec};
//!
//! let layout = NodeLayout::new(4, 3)?;
//! let circuit = build_distributed_iqft(layout, PruneSpec::Threshold(4))?;
//! let program = lower_telegate(&circuit, &LoweringConfig::default())?;
//! assert_eq!(program.ledger().epr_total, program.ledger().sessions);
//! # Ok::<(), diqft::Error>(())
//! ```

pub mod circuit;
pub mod error;
pub mod layout;
pub mod lower;
pub mod metrics;
pub mod sim;
pub mod synth;

pub use circuit::{Circuit, ClassicalBit, Gate, Pauli};
pub use error::{Error, Result};
pub use layout::{cross_node_angle, index_distance, rotation_angle, NodeLayout, QubitRef};
pub use lower::{
    epr_per_node, lower, lower_teledata, lower_teledata_circuit, lower_telegate, CommOpsPolicy,
    LoweredProgram, LoweringConfig, Protocol, ResourceLedger,
};
pub use metrics::{
    communication_overhead, coupling_ratio, fidelity, infidelity, infidelity_bound, phase_deficit,
    GammaDenominator, MetricsReport,
};
pub use sim::{statevector_allocations, Runnable, Simulator, StateVector};
pub use synth::{
    build_distributed_iqft, build_monolithic_iqft, communication_horizon, horizon_for_threshold,
    invert_horizon, k_min, prune_block, threshold_from_epsilon, CommBlock, DistributedCircuit,
    PruneSpec, RemoteCp, Step,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/layout.md")]
    mod layout {}
    #[doc = include_str!("../../../book/src/synthesis.md")]
    mod synthesis {}
    #[doc = include_str!("../../../book/src/pruning.md")]
    mod pruning {}
    #[doc = include_str!("../../../book/src/protocols.md")]
    mod protocols {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
