//! Gate-by-gate simulation over [`StateVector`].
//!
//! Consecutive gates touching at most four qubits are fused into one local
//! unitary. A fused block whose columns each hold a single nonzero entry (a
//! phased permutation, which covers every CNOT/diagonal run and every
//! compute-AND started from a clean ancilla) is applied in place. Anything
//! else expands amplitudes, sorts, and merges.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::kernel::{
    apply_dense, gate_matrix, hadamard, mat2_apply, mat2_mul, single_qubit_matrix, Mat2,
    IDENTITY2,
};
use super::state::StateVector;
use crate::circuit::{Circuit, GateKind, Tag};
use crate::error::{Error, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const MAX_BLOCK: usize = 4;
/// Amplitudes below this magnitude squared are dropped after merging.
const PRUNE_SQR: f64 = 1e-26;
/// Squared residual allowed when splitting off a product qubit.
const DETACH_TOL_SQR: f64 = 1e-22;
/// Outcomes with lower probability are treated as impossible.
pub const MIN_OUTCOME_PROBABILITY: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MeasurementPolicy {
    SeededRandom(u64),
    /// Outcomes consumed in execution order.
    Forced(Vec<u8>),
}

impl MeasurementPolicy {
    /// Forces every one of `count` measurements to `outcome`.
    pub fn forced_all(outcome: u8, count: usize) -> Self {
        MeasurementPolicy::Forced(vec![outcome; count])
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct SimConfig {
    /// Cap on stored amplitudes in the entangled part.
    pub support_cap: usize,
    /// Cap on the data width for matrix extraction.
    pub matrix_cap: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            support_cap: 1 << 24,
            matrix_cap: 12,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcomes {
    /// `(gate index, bit, outcome)` for each measurement in execution order.
    pub record: Vec<(usize, usize, u8)>,
    /// Final classical register.
    pub bits: Vec<u8>,
}

enum Chooser<'a> {
    Random(ChaCha8Rng),
    Forced(&'a [u8], usize),
}

struct Block {
    qubits: Vec<usize>,
    /// Row-major `2^k × 2^k` matrix; local bit `i` is `qubits[i]`.
    matrix: Vec<C64>,
}

impl Block {
    fn empty() -> Self {
        Block {
            qubits: Vec::new(),
            matrix: vec![ONE],
        }
    }

    fn dim(&self) -> usize {
        1 << self.qubits.len()
    }

    fn contains(&self, q: usize) -> bool {
        self.qubits.contains(&q)
    }

    /// Widens the block with identity on `q`.
    fn add_qubit(&mut self, q: usize) {
        let d = self.dim();
        let nd = 2 * d;
        let mut m = vec![ZERO; nd * nd];
        for r in 0..d {
            for c in 0..d {
                let v = self.matrix[r * d + c];
                m[r * nd + c] = v;
                m[(r + d) * nd + (c + d)] = v;
            }
        }
        self.qubits.push(q);
        self.matrix = m;
    }

    /// Left-multiplies a gate acting on `qubits` (all inside the block).
    fn apply(&mut self, qubits: &[usize], u: &[C64]) {
        let d = self.dim();
        let positions: Vec<usize> = qubits
            .iter()
            .map(|q| self.qubits.iter().position(|x| x == q).expect("qubit in block"))
            .collect();
        // apply to each column
        let mut col = vec![ZERO; d];
        for c in 0..d {
            for r in 0..d {
                col[r] = self.matrix[r * d + c];
            }
            apply_dense(&mut col, &positions, u);
            for r in 0..d {
                self.matrix[r * d + c] = col[r];
            }
        }
    }
}

struct Engine<'a> {
    st: StateVector,
    pending: Vec<Mat2>,
    has_pending: Vec<bool>,
    block: Block,
    bits: Vec<u8>,
    chooser: Chooser<'a>,
    cfg: SimConfig,
    record: Vec<(usize, usize, u8)>,
    sweep_at: usize,
}

/// Runs `c` on `input`. Returns the final state and the measurement record.
pub fn simulate(c: &Circuit, input: &StateVector, policy: &MeasurementPolicy) -> Result<(StateVector, Outcomes)> {
    simulate_with(c, input, policy, &SimConfig::default())
}

pub fn simulate_with(
    c: &Circuit,
    input: &StateVector,
    policy: &MeasurementPolicy,
    cfg: &SimConfig,
) -> Result<(StateVector, Outcomes)> {
    if input.num_qubits != c.num_qubits {
        return Err(Error::StateWidth {
            expected: c.num_qubits,
            got: input.num_qubits,
        });
    }
    if c.num_qubits > 64 {
        return Err(Error::WidthCap {
            width: c.num_qubits,
            cap: 64,
        });
    }
    c.validate()?;
    let chooser = match policy {
        MeasurementPolicy::SeededRandom(seed) => Chooser::Random(ChaCha8Rng::seed_from_u64(*seed)),
        MeasurementPolicy::Forced(list) => Chooser::Forced(list, 0),
    };
    let mut e = Engine {
        st: input.clone(),
        pending: vec![IDENTITY2; c.num_qubits],
        has_pending: vec![false; c.num_qubits],
        block: Block::empty(),
        bits: vec![0; c.num_bits],
        chooser,
        cfg: *cfg,
        record: Vec::new(),
        sweep_at: 256,
    };
    let mut prev_adder = None;
    for (gi, g) in c.gates.iter().enumerate() {
        // sweep for product qubits once an adder has finished
        let adder = match g.tag {
            Some(Tag::Adder { id, .. }) => Some(id),
            _ => None,
        };
        if prev_adder.is_some() && adder != prev_adder {
            e.flush()?;
            e.sweep();
        }
        prev_adder = adder;

        if let Some(b) = g.condition {
            if e.bits[b] == 0 {
                continue;
            }
        }
        match g.kind {
            GateKind::MeasureZ(bit) | GateKind::MeasureX(bit) => {
                let x_basis = matches!(g.kind, GateKind::MeasureX(_));
                let m = e.measure(g.qubits[0], x_basis)?;
                e.bits[bit] = m;
                e.record.push((gi, bit, m));
            }
            kind if kind.arity() == 1 => e.single(g.qubits[0], kind)?,
            kind => e.multi(&g.qubits, kind)?,
        }
    }
    e.flush()?;
    e.sweep();
    for q in 0..c.num_qubits {
        e.materialize(q);
    }
    Ok((
        e.st,
        Outcomes {
            record: e.record,
            bits: e.bits,
        },
    ))
}

impl Engine<'_> {
    fn single(&mut self, q: usize, kind: GateKind) -> Result<()> {
        let m = single_qubit_matrix(kind).expect("single-qubit kind");
        if self.block.contains(q) {
            self.block.apply(&[q], &flatten(&m));
        } else if !self.st.is_attached(q) {
            self.pending[q] = mat2_mul(&m, &self.pending[q]);
            self.has_pending[q] = true;
        } else {
            if self.block.qubits.len() >= MAX_BLOCK {
                self.flush()?;
            }
            self.join(q);
            self.block.apply(&[q], &flatten(&m));
        }
        Ok(())
    }

    fn multi(&mut self, qubits: &[usize], kind: GateKind) -> Result<()> {
        let extra = qubits.iter().filter(|q| !self.block.contains(**q)).count();
        if self.block.qubits.len() + extra > MAX_BLOCK {
            self.flush()?;
        }
        for &q in qubits {
            if !self.block.contains(q) {
                self.join(q);
            }
        }
        self.block.apply(qubits, &gate_matrix(kind));
        Ok(())
    }

    /// Adds `q` to the block, folding in any deferred single-qubit gates.
    fn join(&mut self, q: usize) {
        self.block.add_qubit(q);
        if self.has_pending[q] {
            let p = self.pending[q];
            self.block.apply(&[q], &flatten(&p));
            self.pending[q] = IDENTITY2;
            self.has_pending[q] = false;
        }
    }

    /// Applies deferred gates to a detached qubit's local state.
    fn materialize(&mut self, q: usize) {
        if self.has_pending[q] {
            debug_assert!(!self.st.is_attached(q));
            self.st.local[q] = mat2_apply(&self.pending[q], self.st.local[q]);
            self.pending[q] = IDENTITY2;
            self.has_pending[q] = false;
        }
    }

    fn flush(&mut self) -> Result<()> {
        if self.block.qubits.is_empty() {
            return Ok(());
        }
        let block = std::mem::replace(&mut self.block, Block::empty());
        for &q in &block.qubits {
            if !self.st.is_attached(q) {
                self.st.attach(q);
            }
        }
        self.apply_block(&block);
        self.check_support()?;
        if self.st.entries.len() > self.sweep_at {
            self.sweep();
            self.sweep_at = (2 * self.st.entries.len()).max(256);
        }
        Ok(())
    }

    fn check_support(&self) -> Result<()> {
        if self.st.entries.len() > self.cfg.support_cap {
            return Err(Error::SupportCap {
                size: self.st.entries.len(),
                cap: self.cfg.support_cap,
            });
        }
        Ok(())
    }

    fn apply_block(&mut self, block: &Block) {
        let k = block.qubits.len();
        let d = 1usize << k;
        let deposit: Vec<u64> = (0..d)
            .map(|l| {
                (0..k)
                    .filter(|&i| l >> i & 1 == 1)
                    .map(|i| 1u64 << block.qubits[i])
                    .sum()
            })
            .collect();
        let mask = deposit[d - 1];
        // column l → rows with nonzero entries
        let mut cols: Vec<Vec<(usize, C64)>> = vec![Vec::new(); d];
        for l in 0..d {
            for o in 0..d {
                let v = block.matrix[o * d + l];
                if v.norm_sqr() > 1e-28 {
                    cols[l].push((o, v));
                }
            }
        }
        if cols.iter().enumerate().all(|(l, c)| c.len() == 1 && c[0].0 == l && c[0].1 == ONE) {
            return;
        }
        let extract = |idx: u64| -> usize {
            let mut l = 0;
            for (i, &q) in block.qubits.iter().enumerate() {
                l |= ((idx >> q & 1) as usize) << i;
            }
            l
        };
        let entries = &mut self.st.entries;
        let mut all_permuted_in_place = true;
        let mut stop = entries.len();
        let mut identity_rows = true;
        for (pos, e) in entries.iter_mut().enumerate() {
            let l = extract(e.0);
            if cols[l].len() != 1 {
                all_permuted_in_place = false;
                stop = pos;
                break;
            }
            let (o, v) = cols[l][0];
            if o != l {
                identity_rows = false;
                e.0 = (e.0 & !mask) | deposit[o];
            }
            e.1 *= v;
        }
        if all_permuted_in_place {
            if !identity_rows {
                self.st.sorted = false;
            }
            return;
        }
        let mut out: Vec<(u64, C64)> = Vec::with_capacity(entries.len() * 2);
        out.extend_from_slice(&entries[..stop]);
        for &(idx, a) in &entries[stop..] {
            let base = idx & !mask;
            for &(o, v) in &cols[extract(idx)] {
                out.push((base | deposit[o], a * v));
            }
        }
        out.sort_unstable_by_key(|e| e.0);
        let mut merged: Vec<(u64, C64)> = Vec::with_capacity(out.len());
        for (idx, a) in out {
            match merged.last_mut() {
                Some(last) if last.0 == idx => last.1 += a,
                _ => merged.push((idx, a)),
            }
        }
        merged.retain(|e| e.1.norm_sqr() > PRUNE_SQR);
        self.st.entries = merged;
        self.st.sorted = true;
    }

    /// Splits off every attached qubit that is in a product state.
    fn sweep(&mut self) {
        for q in 0..self.st.num_qubits {
            if self.st.is_attached(q) && !self.block.contains(q) {
                self.st.try_detach(q, DETACH_TOL_SQR);
            }
        }
    }

    fn choose(&mut self, q: usize, p1: f64) -> Result<u8> {
        let m = match &mut self.chooser {
            Chooser::Random(rng) => {
                if rng.gen::<f64>() < p1 {
                    1
                } else {
                    0
                }
            }
            Chooser::Forced(list, used) => {
                let m = *list.get(*used).ok_or(Error::ForcedOutcomesExhausted(*used))?;
                *used += 1;
                m
            }
        };
        let p = if m == 1 { p1 } else { 1.0 - p1 };
        if p < MIN_OUTCOME_PROBABILITY {
            return Err(Error::ImpossibleOutcome {
                qubit: q,
                outcome: m,
                probability: p,
            });
        }
        Ok(m)
    }

    fn measure(&mut self, q: usize, x_basis: bool) -> Result<u8> {
        if self.block.contains(q) {
            self.flush()?;
        }
        if !self.st.is_attached(q) {
            self.materialize(q);
            let mut v = self.st.local[q];
            if x_basis {
                v = mat2_apply(&hadamard(), v);
            }
            let norm = v[0].norm_sqr() + v[1].norm_sqr();
            let m = self.choose(q, v[1].norm_sqr() / norm)?;
            // keep the projection phase; it is relative to other input columns
            let kept = v[m as usize] / v[m as usize].norm() * norm.sqrt();
            let e = if m == 0 { [kept, ZERO] } else { [ZERO, kept] };
            self.st.local[q] = if x_basis { mat2_apply(&hadamard(), e) } else { e };
            return Ok(m);
        }
        if x_basis {
            let mut b = Block::empty();
            b.add_qubit(q);
            b.apply(&[q], &flatten(&hadamard()));
            self.apply_block(&b);
        }
        let bit = 1u64 << q;
        let total: f64 = self.st.entries.iter().map(|e| e.1.norm_sqr()).sum();
        let ones: f64 = self
            .st
            .entries
            .iter()
            .filter(|e| e.0 & bit != 0)
            .map(|e| e.1.norm_sqr())
            .sum();
        let m = self.choose(q, ones / total)?;
        let keep = if m == 1 { ones } else { total - ones };
        let scale = (total / keep).sqrt();
        self.st.entries.retain(|e| (e.0 & bit != 0) == (m == 1));
        for e in self.st.entries.iter_mut() {
            e.0 &= !bit;
            e.1 *= scale;
        }
        self.st.attached &= !bit;
        let e = if m == 0 { [ONE, ZERO] } else { [ZERO, ONE] };
        self.st.local[q] = if x_basis { mat2_apply(&hadamard(), e) } else { e };
        Ok(m)
    }
}

fn flatten(m: &Mat2) -> [C64; 4] {
    [m[0][0], m[0][1], m[1][0], m[1][1]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::DyadicAngle;
    use crate::circuit::Gate;

    fn run(c: &Circuit, input: &StateVector) -> StateVector {
        simulate(c, input, &MeasurementPolicy::SeededRandom(7)).unwrap().0
    }

    #[test]
    fn hadamard_on_zero() {
        let mut c = Circuit::new(1);
        c.add(GateKind::H, &[0]);
        let d = run(&c, &StateVector::zero(1)).to_dense().unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((d[0] - C64::new(s, 0.0)).norm() < 1e-12);
        assert!((d[1] - C64::new(s, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn phase_kickback_into_minus() {
        // qubit 0 = |1⟩ control, qubit 1 = |−⟩ target
        let mut c = Circuit::new(2);
        c.add(GateKind::Cnot, &[0, 1]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let input = StateVector::product(&[[ZERO, ONE], [C64::new(s, 0.0), C64::new(-s, 0.0)]]);
        let out = run(&c, &input);
        let ip = input.inner(&out).unwrap();
        assert!((ip + ONE).norm() < 1e-12);
    }

    #[test]
    fn crk2_on_11_gives_i() {
        let mut c = Circuit::new(2);
        c.add(GateKind::CRk(2), &[0, 1]);
        let out = run(&c, &StateVector::basis(2, 3));
        assert!((out.amplitude(3) - C64::i()).norm() < 1e-12);
    }

    #[test]
    fn rz_carries_half_angle_phase() {
        let mut c = Circuit::new(1);
        c.add(GateKind::Rz(DyadicAngle::new(1, 1)), &[0]);
        let out = run(&c, &StateVector::basis(1, 0));
        let want = C64::from_polar(1.0, -std::f64::consts::FRAC_PI_4);
        assert!((out.amplitude(0) - want).norm() < 1e-12);
    }

    #[test]
    fn ghz_then_measure_collapses_all() {
        let mut c = Circuit::new(3);
        c.num_bits = 1;
        c.add(GateKind::H, &[0]);
        c.add(GateKind::Cnot, &[0, 1]);
        c.add(GateKind::Cnot, &[1, 2]);
        c.push(Gate::new(GateKind::MeasureZ(0), &[2]));
        for forced in [0u8, 1] {
            let (out, rec) = simulate(&c, &StateVector::zero(3), &MeasurementPolicy::Forced(vec![forced])).unwrap();
            let idx = if forced == 1 { 7 } else { 0 };
            assert!((out.amplitude(idx).norm() - 1.0).abs() < 1e-12);
            assert_eq!(rec.bits, vec![forced]);
        }
    }

    #[test]
    fn measurement_keeps_projection_phase() {
        // ⟨−|1⟩ = −1/√2, so |1⟩ measured as |−⟩ becomes −|−⟩
        let mut c = Circuit::new(1);
        c.num_bits = 1;
        c.push(Gate::new(GateKind::MeasureX(0), &[0]));
        let (out, _) = simulate(&c, &StateVector::basis(1, 1), &MeasurementPolicy::Forced(vec![1])).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let minus = StateVector::product(&[[C64::new(s, 0.0), C64::new(-s, 0.0)]]);
        assert!((minus.inner(&out).unwrap() + ONE).norm() < 1e-12);
    }

    #[test]
    fn forced_impossible_outcome_is_an_error() {
        let mut c = Circuit::new(1);
        c.num_bits = 1;
        c.push(Gate::new(GateKind::MeasureZ(0), &[0]));
        let err = simulate(&c, &StateVector::zero(1), &MeasurementPolicy::Forced(vec![1])).unwrap_err();
        assert!(matches!(err, Error::ImpossibleOutcome { .. }));
        let err = simulate(&c, &StateVector::zero(1), &MeasurementPolicy::Forced(vec![])).unwrap_err();
        assert!(matches!(err, Error::ForcedOutcomesExhausted(0)));
    }

    #[test]
    fn conditioned_gate_follows_bit() {
        // measure |+⟩ in X: outcome 0 always, so the X never fires
        let mut c = Circuit::new(2);
        c.num_bits = 1;
        c.add(GateKind::H, &[0]);
        c.push(Gate::new(GateKind::MeasureX(0), &[0]));
        c.push(Gate::new(GateKind::X, &[1]).conditioned_on(0));
        let (out, _) = simulate(&c, &StateVector::zero(2), &MeasurementPolicy::SeededRandom(3)).unwrap();
        assert!(out.amplitude(0b10).norm() < 1e-12);

        // measure |1⟩ in Z then flip the other qubit
        let mut c = Circuit::new(2);
        c.num_bits = 1;
        c.add(GateKind::X, &[0]);
        c.add(GateKind::H, &[1]);
        c.add(GateKind::Cnot, &[1, 0]);
        c.add(GateKind::H, &[1]);
        c.push(Gate::new(GateKind::MeasureZ(0), &[0]));
        c.push(Gate::new(GateKind::X, &[1]).conditioned_on(0));
        let (out, rec) = simulate(&c, &StateVector::zero(2), &MeasurementPolicy::SeededRandom(11)).unwrap();
        let m = rec.bits[0] as u64;
        assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
        assert!(out.amplitude(m | (m << 1)).norm() > 0.0 || out.amplitude(m).norm() > 0.0);
    }

    #[test]
    fn fusion_matches_dense_reference() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let n = 5;
            let mut c = Circuit::new(n);
            for _ in 0..40 {
                let a = rng.gen_range(0..n);
                let mut b = rng.gen_range(0..n);
                while b == a {
                    b = rng.gen_range(0..n);
                }
                let kind = match rng.gen_range(0..7) {
                    0 => GateKind::H,
                    1 => GateKind::T,
                    2 => GateKind::Cnot,
                    3 => GateKind::CRk(rng.gen_range(2..5)),
                    4 => GateKind::Rz(DyadicAngle::new(rng.gen_range(-7..8), 3)),
                    5 => GateKind::Swap,
                    _ => GateKind::Sdg,
                };
                let qs: Vec<usize> = if kind.arity() == 1 { vec![a] } else { vec![a, b] };
                c.add(kind, &qs);
            }
            let start = rng.gen_range(0..32u64);
            let out = run(&c, &StateVector::basis(n, start)).to_dense().unwrap();
            let mut dense = vec![ZERO; 32];
            dense[start as usize] = ONE;
            for g in &c.gates {
                apply_dense(&mut dense, &g.qubits, &gate_matrix(g.kind));
            }
            for (x, y) in out.iter().zip(&dense) {
                assert!((x - y).norm() < 1e-10);
            }
        }
    }
}
