//! Dense statevector simulation of logical circuits and lowered programs.
//!
//! Measurements draw from a ChaCha stream keyed by `(seed, op_index)`, so a
//! run is a pure function of the program, the input and the seed.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::circuit::{Circuit, ClassicalBit, Gate, Pauli};
use crate::error::{Error, Result};
use crate::layout::angle_of;
use crate::lower::LoweredProgram;

/// Largest register the simulator accepts, ancillas included.
pub const MAX_QUBITS: usize = 24;

/// Outcome probabilities below this are treated as impossible branches.
const DEGENERATE: f64 = 1e-30;

/// Residual weight tolerated on a communication wire that should be in a
/// definite basis state.
const DISENTANGLED: f64 = 1e-9;

static ALLOCATIONS: AtomicUsize = AtomicUsize::new(0);

/// Number of statevectors allocated by this process so far.
pub fn statevector_allocations() -> usize {
    ALLOCATIONS.load(Ordering::Relaxed)
}

#[derive(Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl Clone for StateVector {
    fn clone(&self) -> Self {
        ALLOCATIONS.fetch_add(1, Ordering::Relaxed);
        Self {
            num_qubits: self.num_qubits,
            amps: self.amps.clone(),
        }
    }
}

fn check_capacity(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        return Err(Error::Capacity {
            needed: n,
            cap: MAX_QUBITS,
        });
    }
    Ok(())
}

/// `index` with a zero inserted at bit position `pos`.
#[inline]
fn insert_zero(index: usize, pos: usize) -> usize {
    let low = index & ((1 << pos) - 1);
    ((index >> pos) << (pos + 1)) | low
}

impl StateVector {
    fn from_vec(num_qubits: usize, amps: Vec<Complex64>) -> Self {
        ALLOCATIONS.fetch_add(1, Ordering::Relaxed);
        Self { num_qubits, amps }
    }

    /// `|0...0>` on `n` qubits.
    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyRegister);
        }
        check_capacity(n)?;
        if index >> n != 0 {
            return Err(Error::BasisIndex { index, qubits: n });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[index as usize] = Complex64::new(1.0, 0.0);
        Ok(Self::from_vec(n, amps))
    }

    /// Wraps raw amplitudes. The length must be a power of two; the vector is
    /// not renormalised.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                left: len,
                right: len.next_power_of_two().max(2),
            });
        }
        let n = len.trailing_zeros() as usize;
        check_capacity(n)?;
        Ok(Self::from_vec(n, amps))
    }

    /// The Fourier state of `|x>`: amplitude `exp(2 pi i x y / 2^n) / sqrt(2^n)`
    /// at `|y>`.
    pub fn fourier(n: usize, x: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyRegister);
        }
        check_capacity(n)?;
        if x >> n != 0 {
            return Err(Error::BasisIndex {
                index: x,
                qubits: n,
            });
        }
        let dim = 1u64 << n;
        let scale = 1.0 / (dim as f64).sqrt();
        let amps = (0..dim)
            .map(|y| {
                // Reduce modulo 2^n first so the phase stays accurate.
                let phase = 2.0 * PI * ((x * y) & (dim - 1)) as f64 / dim as f64;
                Complex64::from_polar(scale, phase)
            })
            .collect();
        Ok(Self::from_vec(n, amps))
    }

    /// Haar-random pure state from normalised complex Gaussians.
    pub fn haar_random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyRegister);
        }
        check_capacity(n)?;
        let mut amps: Vec<Complex64> = (0..1usize << n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amps {
            *a /= norm;
        }
        Ok(Self::from_vec(n, amps))
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.amps.len() != other.amps.len() {
            return Err(Error::DimensionMismatch {
                left: self.num_qubits,
                right: other.num_qubits,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Relabels qubit `j` as qubit `n - 1 - j`.
    pub fn reverse_qubits(&mut self) {
        let n = self.num_qubits as u32;
        for i in 0..self.amps.len() {
            let j = i.reverse_bits() >> (usize::BITS - n);
            if i < j {
                self.amps.swap(i, j);
            }
        }
    }

    fn check_wire(&self, q: usize) -> Result<()> {
        if q >= self.num_qubits {
            return Err(Error::WireOutOfRange {
                wire: q,
                width: self.num_qubits,
            });
        }
        Ok(())
    }

    pub fn apply_h(&mut self, q: usize) -> Result<()> {
        self.check_wire(q)?;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bit = 1 << q;
        for i in 0..self.amps.len() >> 1 {
            let i0 = insert_zero(i, q);
            let (a, b) = (self.amps[i0], self.amps[i0 | bit]);
            self.amps[i0] = (a + b) * s;
            self.amps[i0 | bit] = (a - b) * s;
        }
        Ok(())
    }

    pub fn apply_x(&mut self, q: usize) -> Result<()> {
        self.check_wire(q)?;
        let bit = 1 << q;
        for i in 0..self.amps.len() >> 1 {
            let i0 = insert_zero(i, q);
            self.amps.swap(i0, i0 | bit);
        }
        Ok(())
    }

    pub fn apply_z(&mut self, q: usize) -> Result<()> {
        self.check_wire(q)?;
        let bit = 1 << q;
        for i in 0..self.amps.len() >> 1 {
            let i1 = insert_zero(i, q) | bit;
            self.amps[i1] = -self.amps[i1];
        }
        Ok(())
    }

    fn pair(&self, a: usize, b: usize) -> Result<(usize, usize)> {
        self.check_wire(a)?;
        self.check_wire(b)?;
        if a == b {
            return Err(Error::InvalidPair {
                control: a,
                target: b,
            });
        }
        Ok((a.min(b), a.max(b)))
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        let (lo, hi) = self.pair(control, target)?;
        let (c, t) = (1 << control, 1 << target);
        for i in 0..self.amps.len() >> 2 {
            let i0 = insert_zero(insert_zero(i, lo), hi) | c;
            self.amps.swap(i0, i0 | t);
        }
        Ok(())
    }

    /// Controlled phase `exp(i angle)` on `|11>`.
    pub fn apply_cphase_angle(&mut self, control: usize, target: usize, angle: f64) -> Result<()> {
        let (lo, hi) = self.pair(control, target)?;
        let both = (1 << control) | (1 << target);
        let phase = Complex64::from_polar(1.0, angle);
        // Only the quarter of the amplitudes with both bits set move.
        for i in 0..self.amps.len() >> 2 {
            let i11 = insert_zero(insert_zero(i, lo), hi) | both;
            self.amps[i11] *= phase;
        }
        Ok(())
    }

    /// Probability that `q` reads 1.
    pub fn prob_one(&self, q: usize) -> Result<f64> {
        self.check_wire(q)?;
        let bit = 1 << q;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Projects `q` onto `outcome` and renormalises.
    fn collapse(&mut self, q: usize, outcome: bool, prob: f64) {
        let bit = 1 << q;
        let scale = 1.0 / prob.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i & bit != 0) == outcome {
                *a *= scale;
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Computational-basis measurement of `q` driven by `rng`.
    pub fn measure<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<bool> {
        let total = self.norm_sqr();
        let p1 = self.prob_one(q)? / total;
        let r: f64 = rng.random();
        let outcome = r < p1;
        let p = if outcome { p1 } else { 1.0 - p1 };
        if p < DEGENERATE {
            return Err(Error::NumericalDegeneracy(p));
        }
        self.collapse(q, outcome, p * total);
        Ok(outcome)
    }

    /// The definite basis value of `q`, or an error if it carries weight on
    /// both branches.
    fn definite(&self, q: usize) -> Result<bool> {
        let p1 = self.prob_one(q)? / self.norm_sqr();
        let weight = p1.min(1.0 - p1);
        if weight > DISENTANGLED {
            return Err(Error::AncillaNotDisentangled { wire: q, weight });
        }
        Ok(p1 > 0.5)
    }

    /// Resets two wires in definite basis states and prepares a Bell pair.
    fn prepare_epr(&mut self, a: usize, b: usize) -> Result<()> {
        self.pair(a, b)?;
        for w in [a, b] {
            if self.definite(w)? {
                self.apply_x(w)?;
            }
        }
        self.apply_h(a)?;
        self.apply_cnot(a, b)
    }

    /// Little-endian `(re, im)` f64 pairs.
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for a in &self.amps {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyRegister);
        }
        check_capacity(n)?;
        let mut buf = vec![0u8; 16 << n];
        r.read_exact(&mut buf).map_err(|e| Error::Parse {
            line: 0,
            message: e.to_string(),
        })?;
        let amps = buf
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect();
        Ok(Self::from_vec(n, amps))
    }

    /// Zero-padded copy on `width >= n` wires; the new wires start in `|0>`.
    fn embed(&self, width: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << width];
        amps[..self.amps.len()].copy_from_slice(&self.amps);
        Self::from_vec(width, amps)
    }
}

/// Anything the simulator can execute.
pub trait Runnable {
    /// Size of the logical register the input and output live on.
    fn logical_qubits(&self) -> usize;
    fn width(&self) -> usize;
    fn ops(&self) -> &[Gate];
    fn classical_bits(&self) -> usize;
    fn input_reversal(&self) -> bool;
    /// Wire holding logical qubit `q` at the end of the run.
    fn final_wire(&self, q: usize) -> usize;
}

impl Runnable for Circuit {
    fn logical_qubits(&self) -> usize {
        self.num_qubits()
    }
    fn width(&self) -> usize {
        self.num_qubits()
    }
    fn ops(&self) -> &[Gate] {
        self.gates()
    }
    fn classical_bits(&self) -> usize {
        Circuit::classical_bits(self)
    }
    fn input_reversal(&self) -> bool {
        Circuit::input_reversal(self)
    }
    fn final_wire(&self, q: usize) -> usize {
        q
    }
}

impl Runnable for LoweredProgram {
    fn logical_qubits(&self) -> usize {
        self.layout().num_qubits()
    }
    fn width(&self) -> usize {
        LoweredProgram::width(self)
    }
    fn ops(&self) -> &[Gate] {
        LoweredProgram::ops(self)
    }
    fn classical_bits(&self) -> usize {
        LoweredProgram::classical_bits(self)
    }
    fn input_reversal(&self) -> bool {
        LoweredProgram::input_reversal(self)
    }
    fn final_wire(&self, q: usize) -> usize {
        self.final_wires()[q]
    }
}

/// Full-width state and classical record of a run.
#[derive(Clone, Debug)]
pub struct Execution {
    pub state: StateVector,
    pub bits: Vec<Option<bool>>,
}

#[derive(Clone, Copy, Debug)]
pub struct Simulator {
    max_qubits: usize,
}

impl Default for Simulator {
    fn default() -> Self {
        Self {
            max_qubits: MAX_QUBITS,
        }
    }
}

impl Simulator {
    /// A simulator refusing registers wider than `max_qubits` (at most
    /// [`MAX_QUBITS`]).
    pub fn with_max_qubits(max_qubits: usize) -> Self {
        Self {
            max_qubits: max_qubits.min(MAX_QUBITS),
        }
    }

    pub fn max_qubits(&self) -> usize {
        self.max_qubits
    }

    /// Runs `prog` on `input` and returns the state of the logical register.
    ///
    /// Communication wires must end in definite basis states; anything else
    /// is reported as [`Error::AncillaNotDisentangled`].
    pub fn run<P: Runnable + ?Sized>(
        &self,
        prog: &P,
        input: &StateVector,
        seed: u64,
    ) -> Result<StateVector> {
        let exec = self.execute(prog, input, seed)?;
        extract(prog, &exec.state)
    }

    /// Runs `prog` and returns the full-width state without extraction.
    pub fn execute<P: Runnable + ?Sized>(
        &self,
        prog: &P,
        input: &StateVector,
        seed: u64,
    ) -> Result<Execution> {
        let n = prog.logical_qubits();
        let width = prog.width();
        if width > self.max_qubits {
            return Err(Error::Capacity {
                needed: width,
                cap: self.max_qubits,
            });
        }
        if input.num_qubits() != n {
            return Err(Error::DimensionMismatch {
                left: input.num_qubits(),
                right: n,
            });
        }
        let mut state = if width == n {
            input.clone()
        } else {
            input.embed(width)
        };
        if prog.input_reversal() {
            // Only the logical register is relabelled; ancillas are |0>.
            let mut logical = StateVector {
                num_qubits: n,
                amps: state.amps[..1 << n].to_vec(),
            };
            logical.reverse_qubits();
            state.amps[..1 << n].copy_from_slice(&logical.amps);
        }
        let mut bits = vec![None; prog.classical_bits()];
        for (i, op) in prog.ops().iter().enumerate() {
            apply(&mut state, &mut bits, op, i as u64, seed)?;
        }
        Ok(Execution { state, bits })
    }
}

fn apply(
    state: &mut StateVector,
    bits: &mut Vec<Option<bool>>,
    op: &Gate,
    op_index: u64,
    seed: u64,
) -> Result<()> {
    match *op {
        Gate::H(q) => state.apply_h(q),
        Gate::X(q) => state.apply_x(q),
        Gate::Z(q) => state.apply_z(q),
        Gate::Cnot { control, target } => state.apply_cnot(control, target),
        Gate::CPhase { control, target, k } => {
            state.apply_cphase_angle(control, target, angle_of(k))
        }
        Gate::Measure { qubit, bit } => {
            if bit >= bits.len() {
                bits.resize(bit + 1, None);
            }
            if bits[bit].is_some() {
                return Err(Error::BitRewritten(bit));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(op_index);
            bits[bit] = Some(state.measure(qubit, &mut rng)?);
            Ok(())
        }
        Gate::IfBit { bit, pauli, qubit } => match read_bit(bits, bit)? {
            false => Ok(()),
            true if pauli == Pauli::X => state.apply_x(qubit),
            true => state.apply_z(qubit),
        },
        Gate::Epr { a, b } => state.prepare_epr(a, b),
    }
}

fn read_bit(bits: &[Option<bool>], bit: ClassicalBit) -> Result<bool> {
    bits.get(bit)
        .copied()
        .flatten()
        .ok_or(Error::UnwrittenBit(bit))
}

/// Projects the full-width state onto the logical register through the
/// program's final wire map.
fn extract<P: Runnable + ?Sized>(prog: &P, state: &StateVector) -> Result<StateVector> {
    let n = prog.logical_qubits();
    let width = state.num_qubits();
    let wires: Vec<usize> = (0..n).map(|q| prog.final_wire(q)).collect();
    if width == n && wires.iter().enumerate().all(|(q, &w)| q == w) {
        return Ok(state.clone());
    }
    let mut used = vec![false; width];
    for &w in &wires {
        used[w] = true;
    }
    let mut rest = 0usize;
    for w in (0..width).filter(|&w| !used[w]) {
        if state.definite(w)? {
            rest |= 1 << w;
        }
    }
    let amps = (0..1usize << n)
        .map(|i| {
            let mut idx = rest;
            for (q, &w) in wires.iter().enumerate() {
                if i >> q & 1 == 1 {
                    idx |= 1 << w;
                }
            }
            state.amps[idx]
        })
        .collect();
    Ok(StateVector::from_vec(n, amps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::NodeLayout;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn hadamard_on_zero() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_h(0).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0] - c(h, 0.0)).norm() < 1e-15);
        assert!((s.amplitudes()[1] - c(h, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn cphase_only_touches_both_set() {
        let amps = vec![c(0.5, 0.0); 4];
        let mut s = StateVector::from_amplitudes(amps).unwrap();
        s.apply_cphase_angle(0, 1, -PI / 2.0).unwrap();
        let a = s.amplitudes();
        assert_eq!(&a[..3], &[c(0.5, 0.0); 3]);
        assert!((a[3] - c(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn reversal_swaps_ends() {
        // |001> on 3 qubits becomes |100>
        let mut s = StateVector::basis(3, 1).unwrap();
        s.reverse_qubits();
        assert_eq!(s.amplitudes()[4], c(1.0, 0.0));
    }

    #[test]
    fn capacity_is_enforced() {
        assert_eq!(
            StateVector::zero(25),
            Err(Error::Capacity {
                needed: 25,
                cap: 24
            })
        );
        let layout = NodeLayout::new(1, 4).unwrap();
        let circ = Circuit::new(layout, vec![Gate::H(0)], false).unwrap();
        let sim = Simulator::with_max_qubits(3);
        let input = StateVector::zero(4).unwrap();
        assert!(matches!(
            sim.run(&circ, &input, 0),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn measuring_impossible_branch_is_degenerate() {
        // force r < p1 with p1 = 1e-40
        let amps = vec![c(1.0, 0.0), c(1e-20, 0.0)];
        let mut s = StateVector::from_amplitudes(amps).unwrap();
        struct One;
        impl rand::RngCore for One {
            fn next_u32(&mut self) -> u32 {
                0
            }
            fn next_u64(&mut self) -> u64 {
                0
            }
            fn fill_bytes(&mut self, dst: &mut [u8]) {
                dst.fill(0)
            }
        }
        assert!(matches!(
            s.measure(0, &mut One),
            Err(Error::NumericalDegeneracy(_))
        ));
    }

    #[test]
    fn unwritten_bit_is_reported() {
        let layout = NodeLayout::new(1, 1).unwrap();
        let circ = Circuit::new(
            layout,
            vec![Gate::IfBit {
                bit: 0,
                pauli: Pauli::X,
                qubit: 0,
            }],
            false,
        )
        .unwrap();
        let input = StateVector::zero(1).unwrap();
        assert_eq!(
            Simulator::default().run(&circ, &input, 0),
            Err(Error::UnwrittenBit(0))
        );
    }

    #[test]
    fn fourier_state_is_normalised() {
        let s = StateVector::fourier(10, 777).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-12);
        assert!(StateVector::fourier(3, 8).is_err());
    }

    #[test]
    fn binary_dump_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = StateVector::haar_random(5, &mut rng).unwrap();
        let mut buf = Vec::new();
        s.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 16 * 32);
        assert_eq!(StateVector::read_binary(&buf[..], 5).unwrap(), s);
        assert!(StateVector::read_binary(&buf[..100], 5).is_err());
    }

    #[test]
    fn bell_pair_from_measured_wires() {
        let mut s = StateVector::basis(2, 3).unwrap();
        s.prepare_epr(0, 1).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let a = s.amplitudes();
        assert!((a[0] - c(h, 0.0)).norm() < 1e-15 && (a[3] - c(h, 0.0)).norm() < 1e-15);
        // a superposed wire cannot be reset
        assert!(matches!(
            s.prepare_epr(0, 1),
            Err(Error::AncillaNotDisentangled { .. })
        ));
    }

    proptest! {
        #[test]
        fn unitary_gates_preserve_norm(seed in any::<u64>(), ops in prop::collection::vec((0u8..5, 0usize..6, 0usize..6, 1u32..12), 0..200)) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = StateVector::haar_random(6, &mut rng).unwrap();
            for (kind, a, b, k) in ops {
                match kind {
                    0 => s.apply_h(a).unwrap(),
                    1 => s.apply_x(a).unwrap(),
                    2 => s.apply_z(a).unwrap(),
                    3 if a != b => s.apply_cnot(a, b).unwrap(),
                    4 if a != b => s.apply_cphase_angle(a, b, angle_of(k)).unwrap(),
                    _ => {}
                }
            }
            prop_assert!((s.norm() - 1.0).abs() < 1e-12);
        }
    }
}
