//! Reference circuits: the textbook QFT, the controlled-Rk decomposition,
//! Rz-based phase-gradient layers, and the phase-gradient catalyst state.

use num_complex::Complex64 as C64;

use crate::angle::{DyadicAngle, RzClass};
use crate::circuit::{Circuit, Gate, GateKind, Tag};
use crate::sim::OperatorMatrix;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct QftSpec {
    pub n: usize,
    pub include_final_swaps: bool,
}

impl QftSpec {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "QFT needs at least one qubit");
        QftSpec {
            n,
            include_final_swaps: true,
        }
    }

    pub fn without_swaps(mut self) -> Self {
        self.include_final_swaps = false;
        self
    }
}

/// Textbook QFT on a little-endian register: qubit `t` from the top down gets
/// an `H` and then one `CRk(t−c+1)` from each lower qubit `c`. The final SWAP
/// layer restores natural output order.
pub fn build_standard_qft(spec: QftSpec) -> Circuit {
    let n = spec.n;
    let mut c = Circuit::new(n);
    for t in (0..n).rev() {
        c.add(GateKind::H, &[t]);
        for ctrl in (0..t).rev() {
            c.add(GateKind::CRk((t - ctrl + 1) as u32), &[ctrl, t]);
        }
    }
    if spec.include_final_swaps {
        append_reversal_swaps(&mut c, &(0..n).collect::<Vec<_>>());
    }
    c
}

/// `SWAP(q_i, q_{n−1−i})` for `i < n/2`.
pub fn append_reversal_swaps(c: &mut Circuit, qubits: &[usize]) {
    let n = qubits.len();
    for i in 0..n / 2 {
        c.add(GateKind::Swap, &[qubits[i], qubits[n - 1 - i]]);
    }
}

/// The `Rz`/`CNOT` pattern replacing `CRk(k)` on `(c, t)`:
/// `Rz(π/2^k)` on both, then `CNOT(c→t)`, `Rz(−π/2^k)` on `t`, `CNOT(c→t)`.
pub fn crk_pattern(k: u32, c: usize, t: usize) -> [Gate; 5] {
    let a = DyadicAngle::pi_over_pow2(k);
    [
        Gate::new(GateKind::Rz(a), &[c]),
        Gate::new(GateKind::Rz(a), &[t]),
        Gate::new(GateKind::Cnot, &[c, t]),
        Gate::new(GateKind::Rz(-a), &[t]),
        Gate::new(GateKind::Cnot, &[c, t]),
    ]
}

/// Replaces every `CRk` with [`crk_pattern`]; other gates are kept.
pub fn decompose_crk(c: &Circuit) -> Circuit {
    let mut out = c.clone();
    out.gates.clear();
    for g in &c.gates {
        match g.kind {
            GateKind::CRk(k) => {
                for mut p in crk_pattern(k, g.qubits[0], g.qubits[1]) {
                    p.tag = g.tag.clone();
                    p.condition = g.condition;
                    out.push(p);
                }
            }
            _ => out.push(g.clone()),
        }
    }
    out
}

/// Angle applied to significance `j` of a width-`b` inverse phase gradient.
pub fn inverse_pgt_angle(b: usize, j: usize) -> DyadicAngle {
    DyadicAngle::neg_pi_over_pow2((b - 1 - j) as u32)
}

/// `b` parallel `Rz` gates realizing `|k⟩ ↦ e^{−2πik/2^b}|k⟩` (or the forward
/// gradient when `invert` is set), up to global phase.
pub fn build_inverse_pgt_layer(b: usize, invert: bool) -> Circuit {
    assert!(b >= 1);
    let mut c = Circuit::new(b);
    for j in 0..b {
        let a = inverse_pgt_angle(b, j);
        let a = if invert { -a } else { a };
        c.add_tagged(GateKind::Rz(a), &[j], Some(Tag::PgtLayer));
    }
    c
}

/// Gate kind for `Rz(a)` in Clifford+T form when it is one; otherwise a
/// synthesis leaf.
pub fn rz_as_clifford_t(a: DyadicAngle) -> Option<GateKind> {
    match a.classify() {
        RzClass::Identity => None,
        RzClass::Z => Some(GateKind::Z),
        RzClass::S => Some(GateKind::S),
        RzClass::Sdg => Some(GateKind::Sdg),
        RzClass::T => Some(GateKind::T),
        RzClass::Tdg => Some(GateKind::Tdg),
        RzClass::NonClifford => Some(GateKind::SynthRz(a)),
    }
}

/// Prepares `|ψ_b⟩ = 2^{−b/2} Σ_l e^{2πil/2^b}|l⟩` from `|0…0⟩`: `H` on every
/// qubit, then the forward gradient angles, emitted as `Z`/`S`/`T` where
/// possible and as synthesis leaves otherwise.
pub fn build_psi_prep(b: usize) -> Circuit {
    assert!(b >= 1);
    let mut c = Circuit::new(b);
    for j in 0..b {
        c.add_tagged(GateKind::H, &[j], Some(Tag::PsiPrep));
    }
    for j in 0..b {
        if let Some(kind) = rz_as_clifford_t(-inverse_pgt_angle(b, j)) {
            c.add_tagged(kind, &[j], Some(Tag::PsiPrep));
        }
    }
    c
}

/// Single-qubit factor of `|ψ_b⟩` on significance `j`: `(|0⟩ + e^{iπ/2^{b−1−j}}|1⟩)/√2`.
pub fn psi_qubit(b: usize, j: usize) -> [C64; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let phase = std::f64::consts::PI / (1u64 << (b - 1 - j)) as f64;
    [C64::new(s, 0.0), C64::from_polar(s, phase)]
}

/// `|ψ_b⟩` as a product state.
pub fn psi_state(b: usize) -> crate::sim::StateVector {
    let qs: Vec<[C64; 2]> = (0..b).map(|j| psi_qubit(b, j)).collect();
    crate::sim::StateVector::product(&qs)
}

/// `F[k][j] = e^{2πijk/2^n}/√2^n`, built directly from the definition.
pub fn dft_matrix(n: usize) -> OperatorMatrix {
    let dim = 1usize << n;
    let norm = 1.0 / (dim as f64).sqrt();
    OperatorMatrix::from_fn(dim, dim, |k, j| {
        let e = ((j * k) % dim) as f64 / dim as f64;
        C64::from_polar(norm, 2.0 * std::f64::consts::PI * e)
    })
}
