mod common;

use common::{haar, inverse_dft, max_abs_diff};
use diqft::{
    build_distributed_iqft, build_monolithic_iqft, lower, LoweringConfig, NodeLayout, Protocol,
    PruneSpec, Simulator, StateVector,
};

#[test]
fn monolithic_matches_dense_inverse_dft() {
    let sim = Simulator::default();
    for n in 1..=8 {
        let circ = build_monolithic_iqft(n, PruneSpec::Exact).unwrap();
        for seed in 0..5 {
            let input = haar(n, seed);
            let out = sim.run(&circ, &input, seed).unwrap();
            let want = inverse_dft(input.amplitudes());
            let diff = max_abs_diff(out.amplitudes(), &want);
            assert!(diff < 1e-12, "n={n} seed={seed} diff={diff}");
        }
    }
}

#[test]
fn fourier_states_decode_to_basis_states() {
    let sim = Simulator::default();
    let n = 10;
    let circ = build_monolithic_iqft(n, PruneSpec::Exact).unwrap();
    for x in [0u64, 1, 2, 511, 512, 777, 1023] {
        let out = sim
            .run(&circ, &StateVector::fourier(n, x).unwrap(), 0)
            .unwrap();
        let p = out.amplitudes()[x as usize].norm_sqr();
        assert!((p - 1.0).abs() < 1e-12, "x={x} p={p}");
    }
}

#[test]
fn distributed_schedule_matches_dense_inverse_dft() {
    let sim = Simulator::default();
    for (p, q) in [(2, 1), (2, 3), (3, 2), (4, 2), (2, 4), (3, 3)] {
        let n = p * q;
        let dc = build_distributed_iqft(NodeLayout::new(p, q).unwrap(), PruneSpec::Exact).unwrap();
        let input = haar(n, 99);
        let out = sim.run(&dc.flatten(), &input, 0).unwrap();
        let diff = max_abs_diff(out.amplitudes(), &inverse_dft(input.amplitudes()));
        assert!(diff < 1e-12, "P={p} Q={q} diff={diff}");
    }
}

#[test]
fn lowered_two_by_three_matches_monolithic() {
    let sim = Simulator::default();
    let dc = build_distributed_iqft(NodeLayout::new(2, 3).unwrap(), PruneSpec::Exact).unwrap();
    let mono = build_monolithic_iqft(6, PruneSpec::Exact).unwrap();
    for protocol in [Protocol::Telegate, Protocol::Teledata] {
        let prog = lower(&dc, protocol, &LoweringConfig::default()).unwrap();
        for seed in 0..10 {
            let input = haar(6, 1000 + seed);
            let want = sim.run(&mono, &input, 0).unwrap();
            let got = sim.run(&prog, &input, seed).unwrap();
            let f = diqft::fidelity(&want, &got).unwrap();
            assert!(f >= 1.0 - 1e-12, "{protocol:?} seed={seed} fidelity={f}");
        }
    }
}
