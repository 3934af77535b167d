mod common;

use common::rng;
use diqft::{
    build_monolithic_iqft, infidelity, infidelity_bound, PruneSpec, Simulator, StateVector,
};
use rand::Rng;

/// Largest infidelity of the `t`-pruned transform over Fourier-prepared
/// inputs. The exact transform maps the Fourier state of `x` to `|x>`.
fn worst_infidelity(n: usize, t: u32, xs: &[u64]) -> f64 {
    let sim = Simulator::default();
    let circ = build_monolithic_iqft(n, PruneSpec::Threshold(t)).unwrap();
    xs.iter()
        .map(|&x| {
            let out = sim
                .run(&circ, &StateVector::fourier(n, x).unwrap(), 0)
                .unwrap();
            infidelity(&StateVector::basis(n, x).unwrap(), &out).unwrap()
        })
        .fold(0.0, f64::max)
}

#[test]
fn simulated_infidelity_stays_under_operator_bound() {
    // 200 inputs up to n = 10, 20 above that to keep the suite quick.
    for n in 2..=14 {
        let count = if n <= 10 { 200 } else { 20 };
        let mut r = rng(n as u64);
        let xs: Vec<u64> = (0..count).map(|_| r.random_range(0..1u64 << n)).collect();
        for t in 1..n as u32 {
            let worst = worst_infidelity(n, t, &xs);
            let bound = infidelity_bound(n, t).unwrap();
            assert!(
                worst <= bound + 1e-12,
                "n={n} t={t} worst={worst} bound={bound}"
            );
        }
    }
}

#[test]
fn unpruned_threshold_is_exact() {
    let xs: Vec<u64> = (0..64).collect();
    for n in 2..=6usize {
        assert!(worst_infidelity(n, n as u32 - 1, &xs[..1 << n]) < 1e-24);
        assert_eq!(infidelity_bound(n, n as u32 - 1).unwrap(), 0.0);
    }
}

#[test]
fn norm_survives_long_random_circuits() {
    let n = 16;
    let mut r = rng(5);
    let mut s = StateVector::haar_random(n, &mut r).unwrap();
    for _ in 0..10_000 {
        let a = r.random_range(0..n);
        let b = (a + r.random_range(1..n)) % n;
        match r.random_range(0..5) {
            0 => s.apply_h(a).unwrap(),
            1 => s.apply_x(a).unwrap(),
            2 => s.apply_z(a).unwrap(),
            3 => s.apply_cnot(a, b).unwrap(),
            _ => s
                .apply_cphase_angle(a, b, diqft::rotation_angle(r.random_range(1..40)).unwrap())
                .unwrap(),
        }
    }
    assert!((s.norm() - 1.0).abs() < 1e-10, "{}", s.norm());
}
