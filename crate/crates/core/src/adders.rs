//! Modular ripple-carry adders built from temporary logical-AND gates.
//!
//! A carry is computed into a clean ancilla with 4 T gates (T-depth 2) and
//! later uncomputed with an X-basis measurement plus a classically controlled
//! CZ, which costs no T gates. A width-`w` adder therefore has T-count
//! `4(w−1)` and T-depth `2(w−1)`.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind, Role, Tag};
use crate::error::{Error, Result};
use crate::qft::build_psi_prep;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UncomputeStyle {
    /// X-basis measurement and a conditioned CZ; no T gates.
    MeasureBased,
    /// `H · CCZ · H` on the ancilla; unitary, used as a reference.
    CoherentReference,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdderSpec {
    pub width: usize,
    pub source: String,
    pub target: String,
    pub uncompute_style: UncomputeStyle,
}

impl AdderSpec {
    pub fn new(width: usize) -> Self {
        AdderSpec {
            width,
            source: "x".to_string(),
            target: "y".to_string(),
            uncompute_style: UncomputeStyle::MeasureBased,
        }
    }

    pub fn with_style(mut self, style: UncomputeStyle) -> Self {
        self.uncompute_style = style;
        self
    }
}

fn push(c: &mut Circuit, kind: GateKind, qubits: &[usize], tag: &Option<Tag>) {
    c.add_tagged(kind, qubits, tag.clone());
}

/// `anc ← a ∧ b` for a clean `anc`, with 4 T gates in two parallel layers.
pub fn append_and_compute(c: &mut Circuit, a: usize, b: usize, anc: usize, tag: &Option<Tag>) {
    use GateKind::*;
    push(c, H, &[anc], tag);
    push(c, Cnot, &[anc, a], tag);
    push(c, Cnot, &[anc, b], tag);
    push(c, T, &[anc], tag);
    push(c, Tdg, &[a], tag);
    push(c, Tdg, &[b], tag);
    push(c, Cnot, &[a, anc], tag);
    push(c, Cnot, &[b, anc], tag);
    push(c, T, &[anc], tag);
    push(c, Cnot, &[b, anc], tag);
    push(c, Cnot, &[a, anc], tag);
    push(c, Cnot, &[anc, a], tag);
    push(c, Cnot, &[anc, b], tag);
    push(c, H, &[anc], tag);
    push(c, S, &[anc], tag);
}

/// Returns `anc = a ∧ b` to `|0⟩`.
pub fn append_and_uncompute(
    c: &mut Circuit,
    a: usize,
    b: usize,
    anc: usize,
    style: UncomputeStyle,
    tag: &Option<Tag>,
) {
    match style {
        UncomputeStyle::MeasureBased => {
            let bit = c.alloc_bit();
            let with_tag = |g: Gate| match tag {
                Some(t) => g.tagged(t.clone()),
                None => g,
            };
            c.push(with_tag(Gate::new(GateKind::MeasureX(bit), &[anc])));
            c.push(with_tag(Gate::new(GateKind::Cz, &[a, b]).conditioned_on(bit)));
            // the ancilla is left in |±⟩; rotate back and clear it
            c.push(with_tag(Gate::new(GateKind::H, &[anc])));
            c.push(with_tag(Gate::new(GateKind::X, &[anc]).conditioned_on(bit)));
        }
        UncomputeStyle::CoherentReference => {
            push(c, GateKind::H, &[anc], tag);
            push(c, GateKind::Ccz, &[a, b, anc], tag);
            push(c, GateKind::H, &[anc], tag);
        }
    }
}

/// Three-qubit fragment on `(a, b, anc) = (0, 1, 2)`.
pub fn build_and_gadget(compute: bool, style: UncomputeStyle) -> Circuit {
    let mut c = Circuit::new(3);
    if compute {
        append_and_compute(&mut c, 0, 1, 2, &None);
    } else {
        append_and_uncompute(&mut c, 0, 1, 2, style, &None);
    }
    c
}

/// `y ← (x + y) mod 2^w` with `w = x.len()`, using `w − 1` clean carries.
pub fn append_adder(
    c: &mut Circuit,
    x: &[usize],
    y: &[usize],
    carries: &[usize],
    style: UncomputeStyle,
    tag: Option<Tag>,
) {
    let w = x.len();
    assert_eq!(y.len(), w, "adder operands must have equal width");
    assert!(w >= 1);
    assert!(carries.len() + 1 >= w, "adder of width {w} needs {} carries", w - 1);
    let tag = &tag;
    if w == 1 {
        push(c, GateKind::Cnot, &[x[0], y[0]], tag);
        return;
    }
    // carry i+1 lives in carries[i]
    let carry = |i: usize| carries[i - 1];
    append_and_compute(c, x[0], y[0], carry(1), tag);
    for i in 1..w - 1 {
        push(c, GateKind::Cnot, &[carry(i), x[i]], tag);
        push(c, GateKind::Cnot, &[carry(i), y[i]], tag);
        append_and_compute(c, x[i], y[i], carry(i + 1), tag);
        push(c, GateKind::Cnot, &[carry(i), carry(i + 1)], tag);
    }
    push(c, GateKind::Cnot, &[x[w - 1], y[w - 1]], tag);
    push(c, GateKind::Cnot, &[carry(w - 1), y[w - 1]], tag);
    for i in (1..w - 1).rev() {
        push(c, GateKind::Cnot, &[carry(i), carry(i + 1)], tag);
        append_and_uncompute(c, x[i], y[i], carry(i + 1), style, tag);
        push(c, GateKind::Cnot, &[carry(i), x[i]], tag);
        push(c, GateKind::Cnot, &[x[i], y[i]], tag);
    }
    append_and_uncompute(c, x[0], y[0], carry(1), style, tag);
    push(c, GateKind::Cnot, &[x[0], y[0]], tag);
}

/// Stand-alone adder with registers `source`, `target` (data role) and `carry`.
pub fn build_adder(spec: &AdderSpec) -> Result<Circuit> {
    if spec.width < 2 {
        return Err(Error::InvalidParams(format!("adder width {} < 2", spec.width)));
    }
    if spec.source == spec.target {
        return Err(Error::InvalidParams("adder registers must differ".into()));
    }
    let mut c = Circuit::empty();
    let x = c.add_register(&spec.source, Role::Data, spec.width);
    let y = c.add_register(&spec.target, Role::Data, spec.width);
    let carries = c.add_register("carry", Role::ZeroAncilla, spec.width - 1);
    append_adder(
        &mut c,
        &x,
        &y,
        &carries,
        spec.uncompute_style,
        Some(Tag::Adder {
            id: 0,
            width: spec.width,
        }),
    );
    Ok(c)
}

/// `(x, y) ↦ (x, (x + y) mod 2^b)` over indices `x + 2^b·y`.
pub fn classical_adder_oracle(b: usize) -> Result<Vec<usize>> {
    if b == 0 || b > 10 {
        return Err(Error::InvalidParams(format!("oracle width {b} outside 1..=10")));
    }
    let m = 1usize << b;
    Ok((0..m * m)
        .map(|idx| {
            let (x, y) = (idx % m, idx / m);
            x + m * ((x + y) % m)
        })
        .collect())
}

/// `|k⟩ ↦ e^{−2πik/2^b}|k⟩` by preparing `|ψ_b⟩` in `catalyst` and adding
/// `data` into it. Registers: `data`, `catalyst`, `carry`.
pub fn pgt_via_addition(b: usize) -> Circuit {
    assert!(b >= 1);
    let mut c = Circuit::empty();
    let data = c.add_register("data", Role::Data, b);
    let cat = c.add_register("catalyst", Role::Catalyst, b);
    let carries = c.add_register("carry", Role::ZeroAncilla, b.saturating_sub(1));
    c.append_mapped(&build_psi_prep(b), &cat);
    append_adder(
        &mut c,
        &data,
        &cat,
        &carries,
        UncomputeStyle::MeasureBased,
        Some(Tag::Adder { id: 0, width: b }),
    );
    c
}
