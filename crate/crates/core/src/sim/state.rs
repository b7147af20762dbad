//! Quantum state with a sparse entangled part and unentangled qubits kept aside.
//!
//! Most qubits in the circuits simulated here are either idle, in a known
//! basis state, or in a single-qubit product state (catalyst qubits between
//! uses). Such qubits are kept "detached" as a 2-vector each, and only the
//! remaining qubits carry a sparse amplitude list. The represented state is
//! `entries ⊗ (⊗_q local[q])`.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Largest width accepted by [`StateVector::to_dense`].
pub const DENSE_CAP: usize = 26;

#[derive(Clone, Debug)]
pub struct StateVector {
    pub(crate) num_qubits: usize,
    /// Amplitudes over attached qubits; detached bits are always 0.
    pub(crate) entries: Vec<(u64, C64)>,
    pub(crate) attached: u64,
    /// State of each detached qubit; meaningless while attached.
    pub(crate) local: Vec<[C64; 2]>,
    pub(crate) sorted: bool,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(num_qubits: usize) -> Self {
        Self::basis(num_qubits, 0)
    }

    /// Computational basis state `|index⟩`, little-endian over qubit indices.
    pub fn basis(num_qubits: usize, index: u64) -> Self {
        assert!(num_qubits <= 64, "at most 64 qubits are supported");
        let local = (0..num_qubits)
            .map(|q| if (index >> q) & 1 == 1 { [ZERO, ONE] } else { [ONE, ZERO] })
            .collect();
        StateVector {
            num_qubits,
            entries: vec![(0, ONE)],
            attached: 0,
            local,
            sorted: true,
        }
    }

    /// Product state from one 2-vector per qubit.
    pub fn product(qubits: &[[C64; 2]]) -> Self {
        let mut s = Self::zero(qubits.len());
        s.local.copy_from_slice(qubits);
        s
    }

    /// Dense amplitude array of length `2^num_qubits`.
    pub fn from_amplitudes(num_qubits: usize, amps: &[C64]) -> Result<Self> {
        if num_qubits > DENSE_CAP {
            return Err(Error::WidthCap {
                width: num_qubits,
                cap: DENSE_CAP,
            });
        }
        if amps.len() != 1usize << num_qubits {
            return Err(Error::DimensionMismatch(amps.len(), 1usize << num_qubits));
        }
        let entries = amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(i, &a)| (i as u64, a))
            .collect();
        Ok(StateVector {
            num_qubits,
            entries,
            attached: mask_of(0..num_qubits),
            local: vec![[ONE, ZERO]; num_qubits],
            sorted: true,
        })
    }

    /// Places each `(qubits, state)` part on the given qubits of a wider state.
    /// Parts must cover every qubit exactly once.
    pub fn tensor(num_qubits: usize, parts: &[(&[usize], &StateVector)]) -> Result<Self> {
        let mut out = Self::zero(num_qubits);
        let mut covered = 0u64;
        for (qubits, part) in parts {
            if qubits.len() != part.num_qubits {
                return Err(Error::DimensionMismatch(qubits.len(), part.num_qubits));
            }
            for &q in qubits.iter() {
                if q >= num_qubits || covered >> q & 1 == 1 {
                    return Err(Error::InvalidRegisters(format!(
                        "qubit {q} placed twice or out of range"
                    )));
                }
                covered |= 1 << q;
            }
            for (i, &q) in qubits.iter().enumerate() {
                if part.attached >> i & 1 == 0 {
                    out.local[q] = part.local[i];
                }
            }
            if part.attached != 0 {
                let place = |idx: u64| -> u64 {
                    qubits
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| idx >> i & 1 == 1)
                        .map(|(_, &q)| 1u64 << q)
                        .sum()
                };
                let mut next = Vec::with_capacity(out.entries.len() * part.entries.len());
                for &(a, x) in &out.entries {
                    for &(b, y) in &part.entries {
                        next.push((a | place(b), x * y));
                    }
                }
                out.entries = next;
                out.attached |= place(part.attached);
                out.sorted = false;
            }
        }
        if covered != mask_of(0..num_qubits) {
            return Err(Error::InvalidRegisters("tensor parts do not cover all qubits".into()));
        }
        Ok(out)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Number of stored amplitudes in the entangled part.
    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_attached(&self, q: usize) -> bool {
        self.attached >> q & 1 == 1
    }

    pub fn amplitude(&self, index: u64) -> C64 {
        let mut amp = ONE;
        for q in 0..self.num_qubits {
            if !self.is_attached(q) {
                amp *= self.local[q][(index >> q & 1) as usize];
            }
        }
        if amp == ZERO {
            return ZERO;
        }
        let key = index & self.attached;
        let found = if self.sorted {
            self.entries
                .binary_search_by_key(&key, |e| e.0)
                .ok()
                .map(|i| self.entries[i].1)
        } else {
            self.entries.iter().find(|e| e.0 == key).map(|e| e.1)
        };
        found.map_or(ZERO, |a| a * amp)
    }

    pub fn norm_sqr(&self) -> f64 {
        let attached: f64 = self.entries.iter().map(|e| e.1.norm_sqr()).sum();
        (0..self.num_qubits)
            .filter(|&q| !self.is_attached(q))
            .map(|q| self.local[q][0].norm_sqr() + self.local[q][1].norm_sqr())
            .product::<f64>()
            * attached
    }

    pub fn to_dense(&self) -> Result<Vec<C64>> {
        if self.num_qubits > DENSE_CAP {
            return Err(Error::WidthCap {
                width: self.num_qubits,
                cap: DENSE_CAP,
            });
        }
        let mut out = vec![ZERO; 1usize << self.num_qubits];
        for &(i, a) in &self.entries {
            out[i as usize] = a;
        }
        for q in 0..self.num_qubits {
            if self.is_attached(q) {
                continue;
            }
            let [v0, v1] = self.local[q];
            let bit = 1usize << q;
            for i in 0..out.len() {
                if i & bit == 0 {
                    let a = out[i];
                    out[i] = a * v0;
                    out[i | bit] = a * v1;
                }
            }
        }
        Ok(out)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch(self.num_qubits, other.num_qubits));
        }
        let mut a = self.clone();
        let mut b = other.clone();
        let both = a.attached | b.attached;
        a.attach_mask(both);
        b.attach_mask(both);
        a.sort();
        b.sort();
        let mut acc = ZERO;
        let (mut i, mut j) = (0, 0);
        while i < a.entries.len() && j < b.entries.len() {
            let (ka, va) = a.entries[i];
            let (kb, vb) = b.entries[j];
            match ka.cmp(&kb) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += va.conj() * vb;
                    i += 1;
                    j += 1;
                }
            }
        }
        for q in 0..self.num_qubits {
            if both >> q & 1 == 0 {
                acc *= a.local[q][0].conj() * b.local[q][0] + a.local[q][1].conj() * b.local[q][1];
            }
        }
        Ok(acc)
    }

    /// `|⟨self|other⟩|²`, which ignores global phase.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Dense dump as `(index, re, im)` triples for debugging small states.
    pub fn dump_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Amp {
            index: usize,
            re: f64,
            im: f64,
        }
        let dense = self.to_dense()?;
        let amps: Vec<Amp> = dense
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 1e-24)
            .map(|(index, a)| Amp {
                index,
                re: a.re,
                im: a.im,
            })
            .collect();
        serde_json::to_string(&amps).map_err(|e| Error::Json(e.to_string()))
    }

    pub(crate) fn sort(&mut self) {
        if !self.sorted {
            self.entries.sort_unstable_by_key(|e| e.0);
            self.sorted = true;
        }
    }

    /// Moves a detached qubit into the entangled part.
    pub(crate) fn attach(&mut self, q: usize) {
        debug_assert!(!self.is_attached(q));
        let [v0, v1] = self.local[q];
        let bit = 1u64 << q;
        self.attached |= bit;
        if v1 == ZERO {
            if v0 != ONE {
                self.entries.iter_mut().for_each(|e| e.1 *= v0);
            }
        } else if v0 == ZERO {
            // every index gains the same bit, so the order is unchanged
            self.entries.iter_mut().for_each(|e| {
                e.0 |= bit;
                e.1 *= v1;
            });
        } else {
            let mut next = Vec::with_capacity(self.entries.len() * 2);
            for &(i, a) in &self.entries {
                next.push((i, a * v0));
                next.push((i | bit, a * v1));
            }
            self.entries = next;
            self.sorted = false;
        }
        self.local[q] = [ONE, ZERO];
    }

    pub(crate) fn attach_mask(&mut self, mask: u64) {
        for q in 0..self.num_qubits {
            if mask >> q & 1 == 1 && !self.is_attached(q) {
                self.attach(q);
            }
        }
    }

    /// Detaches `q` if the state factors across it. Returns whether it did.
    pub(crate) fn try_detach(&mut self, q: usize, tol_sqr: f64) -> bool {
        debug_assert!(self.is_attached(q));
        let bit = 1u64 << q;
        let ones = self.entries.iter().filter(|e| e.0 & bit != 0).count();
        if ones == 0 || ones == self.entries.len() {
            let v = if ones == 0 { [ONE, ZERO] } else { [ZERO, ONE] };
            if ones != 0 {
                self.entries.iter_mut().for_each(|e| e.0 &= !bit);
            }
            self.local[q] = v;
            self.attached &= !bit;
            return true;
        }
        self.sort();
        // pairs (a0, a1) sharing all other bits, in key order
        let pairs = PairIter::new(&self.entries, bit);
        let mut best = (0.0, ZERO, ZERO);
        for (_, a0, a1) in pairs.clone() {
            let w = a0.norm_sqr() + a1.norm_sqr();
            if w > best.0 {
                best = (w, a0, a1);
            }
        }
        let scale = best.0.sqrt();
        let (v0, v1) = (best.1 / scale, best.2 / scale);
        let residual: f64 = pairs.clone().map(|(_, a0, a1)| (a0 * v1 - a1 * v0).norm_sqr()).sum();
        if residual > tol_sqr {
            return false;
        }
        let next: Vec<(u64, C64)> = pairs
            .map(|(k, a0, a1)| (k, v0.conj() * a0 + v1.conj() * a1))
            .collect();
        self.entries = next;
        self.local[q] = [v0, v1];
        self.attached &= !bit;
        true
    }
}

/// Walks a sorted entry list, pairing each index that has `bit` clear with
/// its partner that has `bit` set. Missing partners read as zero.
#[derive(Clone)]
pub(crate) struct PairIter<'a> {
    entries: &'a [(u64, C64)],
    bit: u64,
    i: usize,
    j: usize,
}

impl<'a> PairIter<'a> {
    pub(crate) fn new(entries: &'a [(u64, C64)], bit: u64) -> Self {
        let mut it = PairIter { entries, bit, i: 0, j: 0 };
        it.skip_i();
        it.skip_j();
        it
    }

    fn skip_i(&mut self) {
        while self.i < self.entries.len() && self.entries[self.i].0 & self.bit != 0 {
            self.i += 1;
        }
    }

    fn skip_j(&mut self) {
        while self.j < self.entries.len() && self.entries[self.j].0 & self.bit == 0 {
            self.j += 1;
        }
    }
}

impl Iterator for PairIter<'_> {
    type Item = (u64, C64, C64);

    fn next(&mut self) -> Option<Self::Item> {
        let ki = self.entries.get(self.i).map(|e| e.0);
        let kj = self.entries.get(self.j).map(|e| e.0 & !self.bit);
        let out = match (ki, kj) {
            (None, None) => return None,
            (Some(a), Some(b)) if a == b => {
                let r = (a, self.entries[self.i].1, self.entries[self.j].1);
                self.i += 1;
                self.j += 1;
                r
            }
            (Some(a), Some(b)) if a < b => {
                self.i += 1;
                (a, self.entries[self.i - 1].1, ZERO)
            }
            (Some(_), Some(b)) | (None, Some(b)) => {
                self.j += 1;
                (b, ZERO, self.entries[self.j - 1].1)
            }
            (Some(a), None) => {
                self.i += 1;
                (a, self.entries[self.i - 1].1, ZERO)
            }
        };
        self.skip_i();
        self.skip_j();
        Some(out)
    }
}

pub(crate) fn mask_of(qubits: impl IntoIterator<Item = usize>) -> u64 {
    qubits.into_iter().fold(0, |m, q| m | 1u64 << q)
}
