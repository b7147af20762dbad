//! Seven-step rewrite of the textbook QFT into the adder-based approximate QFT.
//!
//! The intermediate form is a [`Program`]: gate segments on data qubits plus
//! blocks of phase layers. A layer is a list of slots indexed by significance
//! `j`; a complete layer of width `w` applies `Rz(−π/2^{w−1−j})` to slot `j`,
//! which is an inverse phase-gradient transformation on the slot values. Slot
//! angles are stored as exponents so that very small rotations stay exact
//! until pruning removes them.
//!
//! Layer inventory for a pair of targets `(t, t−1)`:
//! * lane B holds the parities `x_c ⊕ x_t` (`c < t−1`) on fresh copy ancillas,
//!   with `x_t` itself as the `−π/4` slot;
//! * lane A fans `x_{t−1}` onto the data qubits `c < t−1`, with `x_{t−1}` as the
//!   `−π/2` slot.
//!
//! The parity `x_{t−1} ⊕ x_t` gets its own `T†` before `H(t−1)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::adders::{append_adder, UncomputeStyle};
use crate::angle::{DyadicAngle, MAX_DENOM_POW};
use crate::circuit::{Circuit, GateKind, Role, Tag};
use crate::error::{Error, Result};
use crate::qft::{append_reversal_swaps, build_psi_prep, build_standard_qft, psi_state, rz_as_clifford_t, QftSpec};
use crate::sim::{AncillaSpec, StateVector};

/// `⌈log2(n/ε)⌉`, with values within 1e-9 of an integer taken as that integer.
pub fn precision_bits(n: usize, epsilon: f64) -> usize {
    let x = (n as f64 / epsilon).log2();
    let r = x.round();
    let b = if (x - r).abs() < 1e-9 { r } else { x.ceil() };
    b.max(0.0) as usize
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AqftParams {
    pub n: usize,
    pub epsilon: f64,
    pub b: usize,
    /// When false no rotation is removed and the construction is exact.
    pub prune: bool,
    /// Admits `b = 3`, for reproducing the small worked example only.
    pub figure_compat: bool,
    pub include_final_swaps: bool,
    pub uncompute_style: UncomputeStyle,
    pub snapshots: bool,
}

impl AqftParams {
    pub fn new(n: usize, epsilon: f64) -> Result<Self> {
        Self::build(n, epsilon, false)
    }

    pub fn figure_compat(n: usize, epsilon: f64) -> Result<Self> {
        Self::build(n, epsilon, true)
    }

    fn build(n: usize, epsilon: f64, figure_compat: bool) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams(format!("n = {n}; need n ≥ 2")));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParams(format!("epsilon = {epsilon}; need 0 < ε < 1")));
        }
        let b = precision_bits(n, epsilon);
        let floor = if figure_compat { 3 } else { 4 };
        if b < floor {
            return Err(Error::InvalidParams(format!(
                "b = ⌈log2(n/ε)⌉ = {b} < {floor}; the error bound needs b ≥ 4"
            )));
        }
        if b + 2 > MAX_DENOM_POW as usize {
            return Err(Error::InvalidParams(format!("b = {b} exceeds the angle precision")));
        }
        Ok(AqftParams {
            n,
            epsilon,
            b,
            prune: true,
            figure_compat,
            include_final_swaps: true,
            uncompute_style: UncomputeStyle::MeasureBased,
            snapshots: false,
        })
    }

    pub fn unpruned(mut self) -> Self {
        self.prune = false;
        self
    }

    pub fn with_snapshots(mut self) -> Self {
        self.snapshots = true;
        self
    }

    pub fn with_style(mut self, style: UncomputeStyle) -> Self {
        self.uncompute_style = style;
        self
    }

    /// Forces the precision to `b` regardless of ε, for cost studies at
    /// widths where `n/2^b ≥ 1`. Error bounds stated in terms of ε do not
    /// apply to such parameters.
    pub fn with_precision_bits(mut self, b: usize) -> Result<Self> {
        if b < 3 || b + 2 > MAX_DENOM_POW as usize {
            return Err(Error::InvalidParams(format!("b = {b} is out of range")));
        }
        self.b = b;
        Ok(self)
    }

    pub fn without_final_swaps(mut self) -> Self {
        self.include_final_swaps = false;
        self
    }

    /// Width of each catalyst register: `b+1`, or `n+1` when nothing is pruned
    /// and the layers are wider.
    pub fn catalyst_width(&self) -> usize {
        if self.prune {
            self.b + 1
        } else {
            (self.b + 1).max(self.n + 1)
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lane {
    A,
    B,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerRole {
    First,
    Interior,
    Last,
}

/// Qubit reference that is resolved to an index when a program is rendered.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Sym {
    Data(usize),
    Pad(Lane, usize),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Source {
    /// The qubit holds its own value.
    Direct(Sym),
    /// Data qubit `onto` temporarily holds `x_onto ⊕ x_from`.
    Fanout { onto: usize, from: usize },
    /// A fresh ancilla holds `x_a ⊕ x_b`.
    Copy { a: usize, b: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slot {
    pub source: Source,
    /// `Some(m)` applies `Rz(−π/2^m)`.
    pub pow: Option<u32>,
    pub inserted: bool,
}

impl Slot {
    fn new(source: Source, pow: Option<u32>) -> Self {
        Slot {
            source,
            pow,
            inserted: false,
        }
    }

    /// Data qubit whose value (or parity) the slot carries.
    pub fn data_qubit(&self) -> Option<usize> {
        match self.source {
            Source::Direct(Sym::Data(q)) => Some(q),
            Source::Direct(Sym::Pad(..)) => None,
            Source::Fanout { onto, .. } => Some(onto),
            Source::Copy { a, .. } => Some(a),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layer {
    pub id: usize,
    pub role: LayerRole,
    pub lane: Lane,
    /// Index of the parallel duo this layer belongs to.
    pub duo: Option<usize>,
    pub width: usize,
    /// Significance of `slots[0]`; nothing sits below it.
    pub offset: usize,
    pub slots: Vec<Slot>,
}

impl Layer {
    fn new(role: LayerRole, lane: Lane, duo: Option<usize>, slots: Vec<Slot>) -> Self {
        Layer {
            id: 0,
            role,
            lane,
            duo,
            width: slots.len(),
            offset: 0,
            slots,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// `(significance, slot)` pairs.
    pub fn indexed(&self) -> impl Iterator<Item = (usize, &Slot)> {
        self.slots.iter().enumerate().map(move |(i, s)| (self.offset + i, s))
    }

    pub fn slot(&self, j: usize) -> Option<&Slot> {
        j.checked_sub(self.offset).and_then(|i| self.slots.get(i))
    }

    /// Lowest significance holding a rotation.
    pub fn lowest_present(&self) -> Option<usize> {
        self.slots.iter().position(|s| s.pow.is_some()).map(|i| i + self.offset)
    }

    /// Drops empty slots below the lowest rotation.
    fn trim(&mut self) {
        let k = self.slots.iter().position(|s| s.pow.is_some()).unwrap_or(self.slots.len());
        self.slots.drain(..k);
        self.slots.shrink_to_fit();
        self.offset += k;
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymGate {
    pub kind: GateKind,
    pub qubits: Vec<Sym>,
    pub tag: Option<Tag>,
}

impl SymGate {
    fn new(kind: GateKind, qubits: &[Sym], tag: Option<Tag>) -> Self {
        SymGate {
            kind,
            qubits: qubits.to_vec(),
            tag,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Segment {
    Gates(Vec<SymGate>),
    /// Layers applied side by side between shared encode/decode CNOTs.
    Block(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub n: usize,
    /// `(qubit, m)`: `Rz(π/2^m)` ahead of everything else.
    pub lead: Vec<(usize, u32)>,
    pub segments: Vec<Segment>,
    /// `(qubit, m)`: `Rz(π/2^m)` after everything else.
    pub trail: Vec<(usize, u32)>,
    pub layers: Vec<Layer>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum RenderMode {
    /// Layers as `Rz` gates.
    Rotations,
    /// Layers as adders into two catalysts of width `catalyst_width`.
    Adders {
        catalyst_width: usize,
        style: UncomputeStyle,
        swaps: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdderRecord {
    pub id: usize,
    pub layer: usize,
    pub lane: Lane,
    pub role: LayerRole,
    pub duo: Option<usize>,
    pub width: usize,
}

#[derive(Clone, Debug)]
pub struct Rendered {
    pub circuit: Circuit,
    pub adders: Vec<AdderRecord>,
}

fn rotation(sign_negative: bool, m: u32) -> Result<DyadicAngle> {
    if m > MAX_DENOM_POW {
        return Err(Error::Pipeline(format!(
            "rotation π/2^{m} is below the representable precision; prune before rendering"
        )));
    }
    Ok(if sign_negative {
        DyadicAngle::neg_pi_over_pow2(m)
    } else {
        DyadicAngle::pi_over_pow2(m)
    })
}

struct Frame {
    data: Vec<usize>,
    copies: Vec<usize>,
    pads: BTreeMap<Lane, Vec<usize>>,
}

impl Frame {
    fn sym(&self, s: Sym) -> usize {
        match s {
            Sym::Data(q) => self.data[q],
            Sym::Pad(lane, i) => self.pads[&lane][i],
        }
    }
}

impl Program {
    fn block_copy_count(&self, ids: &[usize]) -> usize {
        ids.iter()
            .flat_map(|&id| &self.layers[id].slots)
            .filter(|s| s.pow.is_some() && matches!(s.source, Source::Copy { .. }))
            .count()
    }

    fn pad_widths(&self) -> BTreeMap<Lane, usize> {
        let mut w = BTreeMap::new();
        let mut note = |s: Sym| {
            if let Sym::Pad(lane, i) = s {
                let e = w.entry(lane).or_insert(0);
                *e = (*e).max(i + 1);
            }
        };
        for l in &self.layers {
            for s in l.slots.iter().filter(|s| s.pow.is_some()) {
                if let Source::Direct(sym) = s.source {
                    note(sym);
                }
            }
        }
        for seg in &self.segments {
            if let Segment::Gates(gs) = seg {
                gs.iter().flat_map(|g| &g.qubits).for_each(|&q| note(q));
            }
        }
        w
    }

    /// Lowers the program to a circuit. Registers, in order: `data`, `copy`,
    /// `pad_a`, `pad_b` (each only when used), then in adder mode
    /// `catalyst_a`, `catalyst_b`, `carry_a`, `carry_b`.
    pub fn render(&self, mode: RenderMode) -> Result<Rendered> {
        let mut c = Circuit::empty();
        let data = c.add_register("data", Role::Data, self.n);
        let copy_width = self
            .segments
            .iter()
            .filter_map(|s| match s {
                Segment::Block(ids) => Some(self.block_copy_count(ids)),
                Segment::Gates(_) => None,
            })
            .max()
            .unwrap_or(0);
        let copies = if copy_width > 0 {
            c.add_register("copy", Role::ZeroAncilla, copy_width)
        } else {
            Vec::new()
        };
        let mut pads = BTreeMap::new();
        for (lane, w) in self.pad_widths() {
            let name = if lane == Lane::A { "pad_a" } else { "pad_b" };
            pads.insert(lane, c.add_register(name, Role::ZeroAncilla, w));
        }
        let frame = Frame { data, copies, pads };

        let mut catalysts = BTreeMap::new();
        let mut carries = BTreeMap::new();
        if let RenderMode::Adders { catalyst_width, .. } = mode {
            for (lane, name) in [(Lane::A, "catalyst_a"), (Lane::B, "catalyst_b")] {
                catalysts.insert(lane, c.add_register(name, Role::Catalyst, catalyst_width));
            }
            for (lane, name) in [(Lane::A, "carry_a"), (Lane::B, "carry_b")] {
                carries.insert(lane, c.add_register(name, Role::ZeroAncilla, catalyst_width - 1));
            }
            let prep = build_psi_prep(catalyst_width);
            for lane in [Lane::A, Lane::B] {
                c.append_mapped(&prep, &catalysts[&lane]);
            }
        }

        self.render_loose(&mut c, &frame, &self.lead)?;
        let mut adders = Vec::new();
        for seg in &self.segments {
            match seg {
                Segment::Gates(gs) => {
                    for g in gs {
                        let qs: Vec<usize> = g.qubits.iter().map(|&s| frame.sym(s)).collect();
                        c.add_tagged(g.kind, &qs, g.tag.clone());
                    }
                }
                Segment::Block(ids) => {
                    let holders = self.render_prep(&mut c, &frame, ids);
                    for &id in ids {
                        let layer = &self.layers[id];
                        match mode {
                            RenderMode::Rotations => {
                                for (j, s) in layer.indexed() {
                                    if let Some(m) = s.pow {
                                        let tag = if s.inserted { Tag::PgtCompletion } else { Tag::PgtLayer };
                                        c.add_tagged(GateKind::Rz(rotation(true, m)?), &[holders[&(id, j)]], Some(tag));
                                    }
                                }
                            }
                            RenderMode::Adders {
                                catalyst_width, style, ..
                            } => {
                                let lo = layer
                                    .lowest_present()
                                    .ok_or_else(|| Error::Pipeline(format!("layer {id} is empty")))?;
                                let w = layer.width();
                                for (j, s) in layer.indexed().filter(|&(j, _)| j >= lo) {
                                    if s.pow != Some((w - 1 - j) as u32) {
                                        return Err(Error::Pipeline(format!(
                                            "layer {id} is not a complete phase gradient at significance {j}"
                                        )));
                                    }
                                }
                                let width = w - lo;
                                if width > catalyst_width {
                                    return Err(Error::Pipeline(format!(
                                        "layer {id} needs width {width} > catalyst width {catalyst_width}"
                                    )));
                                }
                                let source: Vec<usize> = (lo..w).map(|j| holders[&(id, j)]).collect();
                                let cat = &catalysts[&layer.lane][catalyst_width - width..];
                                let record = AdderRecord {
                                    id: adders.len(),
                                    layer: id,
                                    lane: layer.lane,
                                    role: layer.role,
                                    duo: layer.duo,
                                    width,
                                };
                                append_adder(
                                    &mut c,
                                    &source,
                                    cat,
                                    &carries[&layer.lane],
                                    style,
                                    Some(Tag::Adder { id: record.id, width }),
                                );
                                adders.push(record);
                            }
                        }
                    }
                    self.render_unprep(&mut c, &frame, ids);
                }
            }
        }
        self.render_loose(&mut c, &frame, &self.trail)?;
        if let RenderMode::Adders { swaps: true, .. } = mode {
            append_reversal_swaps(&mut c, &frame.data);
        }
        Ok(Rendered { circuit: c, adders })
    }

    fn render_loose(&self, c: &mut Circuit, frame: &Frame, terms: &[(usize, u32)]) -> Result<()> {
        let mut merged: BTreeMap<usize, DyadicAngle> = BTreeMap::new();
        for &(q, m) in terms {
            let e = merged.entry(q).or_insert(DyadicAngle::ZERO);
            *e = *e + rotation(false, m)?;
        }
        for (q, a) in merged {
            if !a.is_zero() {
                c.add(GateKind::Rz(a), &[frame.data[q]]);
            }
        }
        Ok(())
    }

    /// Encodes every present slot of the block and returns the qubit holding
    /// each `(layer, significance)`.
    fn render_prep(&self, c: &mut Circuit, frame: &Frame, ids: &[usize]) -> BTreeMap<(usize, usize), usize> {
        let mut holders = BTreeMap::new();
        let mut next_copy = 0;
        let frame_tag = Some(Tag::Frame);
        for &id in ids {
            for (j, s) in self.layers[id].indexed() {
                if s.pow.is_none() {
                    continue;
                }
                if let Source::Copy { a, b } = s.source {
                    let k = frame.copies[next_copy];
                    next_copy += 1;
                    c.add_tagged(GateKind::Cnot, &[frame.data[a], k], frame_tag.clone());
                    c.add_tagged(GateKind::Cnot, &[frame.data[b], k], frame_tag.clone());
                    holders.insert((id, j), k);
                }
            }
        }
        for &id in ids {
            for (j, s) in self.layers[id].indexed() {
                if s.pow.is_none() {
                    continue;
                }
                match s.source {
                    Source::Fanout { onto, from } => {
                        c.add_tagged(GateKind::Cnot, &[frame.data[from], frame.data[onto]], frame_tag.clone());
                        holders.insert((id, j), frame.data[onto]);
                    }
                    Source::Direct(sym) => {
                        holders.insert((id, j), frame.sym(sym));
                    }
                    Source::Copy { .. } => {}
                }
            }
        }
        holders
    }

    fn render_unprep(&self, c: &mut Circuit, frame: &Frame, ids: &[usize]) {
        let present = |id: usize| self.layers[id].slots.iter().filter(|s| s.pow.is_some());
        let frame_tag = Some(Tag::Frame);
        let fanouts: Vec<(usize, usize)> = ids
            .iter()
            .flat_map(|&id| present(id))
            .filter_map(|s| match s.source {
                Source::Fanout { onto, from } => Some((onto, from)),
                _ => None,
            })
            .collect();
        for &(onto, from) in fanouts.iter().rev() {
            c.add_tagged(GateKind::Cnot, &[frame.data[from], frame.data[onto]], frame_tag.clone());
        }
        let copied: Vec<(usize, usize)> = ids
            .iter()
            .flat_map(|&id| present(id))
            .filter_map(|s| match s.source {
                Source::Copy { a, b } => Some((a, b)),
                _ => None,
            })
            .collect();
        for (k, &(a, b)) in copied.iter().enumerate().rev() {
            let anc = frame.copies[k];
            c.add_tagged(GateKind::Cnot, &[frame.data[b], anc], frame_tag.clone());
            c.add_tagged(GateKind::Cnot, &[frame.data[a], anc], frame_tag.clone());
        }
    }
}

/// One group of the reordered textbook circuit: a pair of targets `[t, t−1]`
/// or the lone `[0]` left over when `n` is odd.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subcircuit {
    pub targets: Vec<usize>,
    pub circuit: Circuit,
}

fn subcircuit_gates(n: usize, targets: &[usize]) -> Circuit {
    let mut c = Circuit::new(n);
    match *targets {
        [t, u] => {
            debug_assert_eq!(u + 1, t);
            c.add(GateKind::H, &[t]);
            c.add(GateKind::CRk(2), &[u, t]);
            c.add(GateKind::H, &[u]);
            for ctrl in (0..u).rev() {
                c.add(GateKind::CRk((t - ctrl + 1) as u32), &[ctrl, t]);
            }
            for ctrl in (0..u).rev() {
                c.add(GateKind::CRk((u - ctrl + 1) as u32), &[ctrl, u]);
            }
        }
        [q] => c.add(GateKind::H, &[q]),
        _ => unreachable!("subcircuits have one or two targets"),
    }
    c
}

/// Moves every second `H` left to just after its first controlled rotation,
/// then cuts the circuit into target pairs `(n−1, n−2), (n−3, n−4), …`.
pub fn step1_reorder_and_partition(c: &Circuit) -> Result<Vec<Subcircuit>> {
    let n = c.num_qubits;
    if n == 0 {
        return Err(Error::NotStandardQft("no qubits".into()));
    }
    let bare = build_standard_qft(QftSpec::new(n).without_swaps());
    let full = build_standard_qft(QftSpec::new(n));
    if c.gates != bare.gates && c.gates != full.gates {
        return Err(Error::NotStandardQft(format!("gate list differs from the {n}-qubit textbook QFT")));
    }
    let mut subs = Vec::new();
    for t in (1..n).rev().step_by(2) {
        let targets = vec![t, t - 1];
        subs.push(Subcircuit {
            circuit: subcircuit_gates(n, &targets),
            targets,
        });
    }
    if n % 2 == 1 {
        subs.push(Subcircuit {
            targets: vec![0],
            circuit: subcircuit_gates(n, &[0]),
        });
    }
    Ok(subs)
}

fn data(q: usize) -> Sym {
    Sym::Data(q)
}

/// Decomposes the controlled rotations of a subcircuit into parity layers.
///
/// Control-side rotations go to `lead` and target-side ones to `trail`; both
/// commute to the ends of the full circuit. For `t ≥ 2` the two parity layers
/// run side by side, lane B on copy ancillas.
pub fn step2_transform_subcircuit(sub: &Subcircuit) -> Result<Program> {
    let n = sub.circuit.num_qubits;
    let shape_ok = match *sub.targets {
        [q] => q < n,
        [t, u] => t < n && u + 1 == t,
        _ => false,
    };
    if !shape_ok || sub.circuit.gates != subcircuit_gates(n, &sub.targets).gates {
        return Err(Error::NotStandardQft(format!("unexpected subcircuit for targets {:?}", sub.targets)));
    }
    Ok(transform_targets(n, &sub.targets))
}

fn transform_targets(n: usize, targets: &[usize]) -> Program {
    let mut p = Program {
        n,
        lead: Vec::new(),
        segments: Vec::new(),
        trail: Vec::new(),
        layers: Vec::new(),
    };
    let h = |q: usize| SymGate::new(GateKind::H, &[data(q)], None);
    let (t, u) = match *targets {
        [q] => {
            p.segments.push(Segment::Gates(vec![h(q)]));
            return p;
        }
        [t, u] => (t, u),
        _ => unreachable!("subcircuits have one or two targets"),
    };
    for c in 0..t {
        p.lead.push((c, (t - c + 1) as u32));
        p.trail.push((t, (t - c + 1) as u32));
    }
    for c in 0..u {
        p.lead.push((c, (u - c + 1) as u32));
        p.trail.push((u, (u - c + 1) as u32));
    }
    p.segments.push(Segment::Gates(vec![h(t)]));
    if t == 1 {
        // lone parity x0 ⊕ x1, kept as a width-3 layer
        p.layers.push(Layer::new(
            LayerRole::Interior,
            Lane::A,
            None,
            vec![
                Slot::new(Source::Fanout { onto: 0, from: 1 }, Some(2)),
                Slot::new(Source::Direct(data(1)), None),
                Slot::new(Source::Direct(Sym::Pad(Lane::A, 0)), None),
            ],
        ));
        p.segments.push(Segment::Block(vec![0]));
        p.segments.push(Segment::Gates(vec![h(0)]));
        return p;
    }
    p.segments.push(Segment::Gates(vec![
        SymGate::new(GateKind::Cnot, &[data(t), data(u)], Some(Tag::Frame)),
        SymGate::new(GateKind::Tdg, &[data(u)], Some(Tag::NonPgtT)),
        SymGate::new(GateKind::Cnot, &[data(t), data(u)], Some(Tag::Frame)),
    ]));
    p.segments.push(Segment::Gates(vec![h(u)]));
    let mut lane_b: Vec<Slot> = (0..u)
        .map(|c| Slot::new(Source::Copy { a: c, b: t }, Some((t - c + 1) as u32)))
        .collect();
    lane_b.push(Slot::new(Source::Direct(data(t)), None));
    lane_b.push(Slot::new(Source::Direct(Sym::Pad(Lane::B, 0)), None));
    lane_b.push(Slot::new(Source::Direct(Sym::Pad(Lane::B, 1)), None));
    let mut lane_a: Vec<Slot> = (0..u)
        .map(|c| Slot::new(Source::Fanout { onto: c, from: u }, Some((u - c + 1) as u32)))
        .collect();
    lane_a.push(Slot::new(Source::Direct(data(u)), None));
    lane_a.push(Slot::new(Source::Direct(Sym::Pad(Lane::A, 0)), None));
    p.layers.push(Layer::new(LayerRole::Interior, Lane::B, Some(t), lane_b));
    let mut a = Layer::new(LayerRole::Interior, Lane::A, Some(t), lane_a);
    a.id = 1;
    p.layers.push(a);
    p.segments.push(Segment::Block(vec![0, 1]));
    p
}

/// Groups loose `Rz(π/2^m)` terms per qubit; each group must be `{2, …, k}`,
/// which sums to `(2^{k−1} − 1)π/2^k`. Returns `qubit → k`.
fn split_forms(terms: &[(usize, u32)], what: &str) -> Result<BTreeMap<usize, u32>> {
    let mut groups: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    for &(q, m) in terms {
        groups.entry(q).or_default().push(m);
    }
    let mut out = BTreeMap::new();
    for (q, mut ms) in groups {
        ms.sort_unstable();
        let k = ms.len() as u32 + 1;
        if ms.iter().enumerate().any(|(i, &m)| m != i as u32 + 2) {
            return Err(Error::Pipeline(format!(
                "{what}-layer angle on qubit {q} is not of the form (2^(k−1) − 1)π/2^k"
            )));
        }
        out.insert(q, k);
    }
    Ok(out)
}

/// Builds the `(n+1)`-slot first or last layer from split forms. `spare` fills
/// significance `n−1` and `pad` fills significance `n`.
fn edge_layer(
    n: usize,
    forms: &BTreeMap<usize, u32>,
    role: LayerRole,
    lane: Lane,
    spare: usize,
    pad: Sym,
) -> Result<(Layer, Vec<SymGate>)> {
    let mut slots: Vec<Option<Slot>> = vec![None; n + 1];
    let mut splits = Vec::new();
    for (&q, &k) in forms {
        let k = k as usize;
        if k < 2 || k > n || slots[n - k].is_some() {
            return Err(Error::Pipeline(format!("{role:?} layer: slot collision on qubit {q}")));
        }
        slots[n - k] = Some(Slot::new(Source::Direct(data(q)), Some(k as u32)));
        splits.push(SymGate::new(GateKind::S, &[data(q)], Some(Tag::Split)));
    }
    if slots[n - 1].is_some() || forms.contains_key(&spare) {
        return Err(Error::Pipeline(format!("{role:?} layer: unexpected rotation at significance n−1")));
    }
    slots[n - 1] = Some(Slot::new(Source::Direct(data(spare)), None));
    slots[n] = Some(Slot::new(Source::Direct(pad), None));
    let slots = slots
        .into_iter()
        .enumerate()
        .map(|(j, s)| s.ok_or_else(|| Error::Pipeline(format!("{role:?} layer: hole at significance {j}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok((Layer::new(role, lane, None, slots), splits))
}

/// Concatenates fragments, renumbering layer ids after the reserved id 0 and
/// duo keys by first appearance.
struct Assembler {
    n: usize,
    layers: Vec<Layer>,
    body: Vec<Segment>,
    duos: BTreeMap<usize, usize>,
    next_id: usize,
}

impl Assembler {
    fn new(n: usize) -> Self {
        Assembler {
            n,
            layers: Vec::new(),
            body: Vec::new(),
            duos: BTreeMap::new(),
            next_id: 1,
        }
    }

    /// Appends a fragment and returns its loose lead and trail terms.
    fn absorb(&mut self, f: Program, mut each: impl FnMut(&mut Layer)) -> Result<LooseTerms> {
        if f.n != self.n {
            return Err(Error::Pipeline("subcircuits disagree on width".into()));
        }
        let base = self.next_id;
        for mut l in f.layers {
            l.id += base;
            if let Some(key) = l.duo {
                let fresh = self.duos.len();
                l.duo = Some(*self.duos.entry(key).or_insert(fresh));
            }
            self.next_id = self.next_id.max(l.id + 1);
            each(&mut l);
            self.layers.push(l);
        }
        for seg in f.segments {
            self.body.push(match seg {
                Segment::Block(ids) => Segment::Block(ids.into_iter().map(|i| i + base).collect()),
                g => g,
            });
        }
        Ok((f.lead, f.trail))
    }

    fn finish(self, first: (Layer, Vec<SymGate>), last: (Layer, Vec<SymGate>)) -> Program {
        let last_id = self.next_id;
        let (mut first, first_splits) = first;
        let (mut last, last_splits) = last;
        first.id = 0;
        last.id = last_id;
        let mut all = vec![first];
        all.extend(self.layers);
        all.push(last);
        all.sort_by_key(|l| l.id);
        let mut segments = vec![Segment::Gates(first_splits), Segment::Block(vec![0])];
        segments.extend(self.body);
        segments.push(Segment::Block(vec![last_id]));
        segments.push(Segment::Gates(last_splits));
        Program {
            n: self.n,
            lead: Vec::new(),
            segments,
            trail: Vec::new(),
            layers: all,
        }
    }
}

type LooseTerms = (Vec<(usize, u32)>, Vec<(usize, u32)>);

fn first_layer(n: usize, forms: &BTreeMap<usize, u32>) -> Result<(Layer, Vec<SymGate>)> {
    edge_layer(n, forms, LayerRole::First, Lane::A, n - 1, Sym::Pad(Lane::A, 0))
}

fn last_layer(n: usize, forms: &BTreeMap<usize, u32>) -> Result<(Layer, Vec<SymGate>)> {
    edge_layer(n, forms, LayerRole::Last, Lane::B, 0, Sym::Pad(Lane::B, 1))
}

/// Concatenates transformed subcircuits, collects the loose rotations into a
/// first and a last layer and splits each into `S · Rz(−π/2^k)`.
pub fn step34_assemble_and_split(frags: Vec<Program>) -> Result<Program> {
    let n = frags.first().ok_or_else(|| Error::Pipeline("no subcircuits".into()))?.n;
    let mut asm = Assembler::new(n);
    let mut lead = Vec::new();
    let mut trail = Vec::new();
    for f in frags {
        let (l, t) = asm.absorb(f, |_| {})?;
        lead.extend(l);
        trail.extend(t);
    }
    let first = first_layer(n, &split_forms(&lead, "first")?)?;
    let last = last_layer(n, &split_forms(&trail, "last")?)?;
    Ok(asm.finish(first, last))
}

/// One pruned rotation `Rz(−π/2^pow)` on the slot carrying data qubit `qubit`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovedGate {
    pub layer: usize,
    pub qubit: usize,
    pub pow: u32,
}

impl RemovedGate {
    /// The exact angle, when it is representable.
    pub fn angle(&self) -> Option<DyadicAngle> {
        (self.pow <= MAX_DENOM_POW).then(|| DyadicAngle::neg_pi_over_pow2(self.pow))
    }

    /// `|1 − e^{iπ/2^pow}|`, the operator-norm change from dropping the gate.
    pub fn error(&self) -> f64 {
        2.0 * (std::f64::consts::PI / 2f64.powi(self.pow as i32 + 1)).sin()
    }
}

/// Removed gates in one layer whose qubit and power both move by a fixed step.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovedRun {
    pub layer: usize,
    pub qubit: usize,
    pub pow: u32,
    pub count: usize,
    pub qubit_step: i64,
    pub pow_step: i64,
}

impl RemovedRun {
    fn at(&self, k: usize) -> RemovedGate {
        RemovedGate {
            layer: self.layer,
            qubit: (self.qubit as i64 + self.qubit_step * k as i64) as usize,
            pow: (self.pow as i64 + self.pow_step * k as i64) as u32,
        }
    }

    fn accepts(&self, g: &RemovedGate) -> bool {
        if g.layer != self.layer {
            return false;
        }
        let last = self.at(self.count - 1);
        let (dq, dp) = (g.qubit as i64 - last.qubit as i64, g.pow as i64 - last.pow as i64);
        if self.count == 1 {
            dp.abs() == 1
        } else {
            dq == self.qubit_step && dp == self.pow_step
        }
    }

    // terms past this power are below f64 resolution
    const NEGLIGIBLE_POW: i64 = 1100;

    /// Indices `k` whose term can be nonzero in f64.
    fn significant(&self) -> std::ops::Range<usize> {
        let cut = Self::NEGLIGIBLE_POW;
        let p0 = self.pow as i64;
        let n = self.count as i64;
        let (lo, hi) = match self.pow_step.signum() {
            0 if p0 > cut => (0, 0),
            0 => (0, n),
            1 => (0, ((cut - p0) / self.pow_step + 1).clamp(0, n)),
            _ => (((p0 - cut + (-self.pow_step) - 1) / -self.pow_step).clamp(0, n), n),
        };
        lo as usize..hi as usize
    }
}

/// Every pruned rotation, stored as runs so that huge widths stay small.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovedGateLedger {
    pub runs: Vec<RemovedRun>,
}

impl RemovedGateLedger {
    pub fn push(&mut self, g: RemovedGate) {
        if let Some(r) = self.runs.last_mut() {
            if r.accepts(&g) {
                if r.count == 1 {
                    r.qubit_step = g.qubit as i64 - r.qubit as i64;
                    r.pow_step = g.pow as i64 - r.pow as i64;
                }
                r.count += 1;
                return;
            }
        }
        self.runs.push(RemovedRun {
            layer: g.layer,
            qubit: g.qubit,
            pow: g.pow,
            count: 1,
            qubit_step: 0,
            pow_step: 0,
        });
    }

    pub fn iter(&self) -> impl Iterator<Item = RemovedGate> + '_ {
        self.runs.iter().flat_map(|r| (0..r.count).map(move |k| r.at(k)))
    }

    fn sum_terms(&self, term: impl Fn(&RemovedGate) -> f64) -> f64 {
        self.runs
            .iter()
            .flat_map(|r| r.significant().map(move |k| r.at(k)))
            .fold(0.0, |acc, g| acc + term(&g))
    }

    /// Triangle-inequality bound: sum of per-gate errors.
    pub fn bound(&self) -> f64 {
        self.sum_terms(RemovedGate::error)
    }

    /// Sum of removed `|θ|`; dominates [`Self::bound`].
    pub fn angle_sum(&self) -> f64 {
        self.sum_terms(|g| std::f64::consts::PI / 2f64.powi(g.pow as i32))
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.runs.iter().map(|r| r.count).sum()
    }
}

/// Removes every layer rotation with `|θ| < π/2^b` (strict).
pub fn step5_prune(mut p: Program, params: &AqftParams) -> (Program, RemovedGateLedger) {
    let mut ledger = RemovedGateLedger::default();
    if params.prune {
        for layer in &mut p.layers {
            prune_layer(layer, params.b, &mut ledger);
        }
    }
    (p, ledger)
}

fn prune_layer(layer: &mut Layer, b: usize, ledger: &mut RemovedGateLedger) {
    for s in &mut layer.slots {
        if let Some(m) = s.pow {
            if m as usize > b {
                ledger.push(RemovedGate {
                    layer: layer.id,
                    qubit: s.data_qubit().expect("pads carry no original rotation"),
                    pow: m,
                });
                s.pow = None;
            }
        }
    }
    layer.trim();
}

/// Fills each layer's missing `−π`, `−π/2` and `−π/4` slots and cancels each
/// insertion right after its block with `Z`, `S` or `T` on the same qubit.
pub fn step6_complete_pgt(mut p: Program, _params: &AqftParams) -> Result<Program> {
    let mut nullifiers: BTreeMap<usize, Vec<SymGate>> = BTreeMap::new();
    for layer in &mut p.layers {
        let w = layer.width();
        let lo = layer
            .lowest_present()
            .ok_or_else(|| Error::Pipeline(format!("layer {} is empty", layer.id)))?;
        for j in lo..w {
            let offset = layer.offset;
            let s = &mut layer.slots[j - offset];
            if s.pow.is_some() {
                continue;
            }
            let m = (w - 1 - j) as u32;
            let sym = match s.source {
                Source::Direct(sym) if m <= 2 => sym,
                _ => {
                    return Err(Error::Pipeline(format!(
                        "layer {} cannot be completed at significance {j}",
                        layer.id
                    )))
                }
            };
            s.pow = Some(m);
            s.inserted = true;
            let kind = rz_as_clifford_t(DyadicAngle::pi_over_pow2(m)).expect("π/2^m for m ≤ 2 is Clifford+T");
            nullifiers
                .entry(layer.id)
                .or_default()
                .push(SymGate::new(kind, &[sym], Some(Tag::Nullifier)));
        }
    }
    let mut segments = Vec::with_capacity(p.segments.len() * 2);
    for seg in p.segments {
        let after: Vec<SymGate> = match &seg {
            Segment::Block(ids) => ids.iter().flat_map(|id| nullifiers.remove(id).unwrap_or_default()).collect(),
            Segment::Gates(_) => Vec::new(),
        };
        segments.push(seg);
        if !after.is_empty() {
            segments.push(Segment::Gates(after));
        }
    }
    p.segments = segments;
    Ok(p)
}

/// Adder widths required by the construction: `n−b+3` of width `b+1` and one
/// each of widths `b, b−1, …, 3`.
pub fn expected_inventory(n: usize, b: usize) -> BTreeMap<usize, usize> {
    let mut m = BTreeMap::new();
    m.insert(b + 1, n + 3 - b);
    for w in 3..=b {
        m.insert(w, 1);
    }
    m
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub stage: String,
    pub circuit: Circuit,
}

#[derive(Clone, Debug)]
pub struct AqftArtifact {
    pub circuit: Circuit,
    pub params: AqftParams,
    pub ledger: RemovedGateLedger,
    pub catalyst_width: usize,
    pub adders: Vec<AdderRecord>,
    /// The completed program that the adders were substituted into.
    pub program: Program,
    pub snapshots: Vec<Snapshot>,
}

impl AqftArtifact {
    /// Adder count per width.
    pub fn inventory(&self) -> BTreeMap<usize, usize> {
        let mut m = BTreeMap::new();
        for a in &self.adders {
            *m.entry(a.width).or_insert(0) += 1;
        }
        m
    }

    /// Adders of each duo as `(lane A, lane B)`.
    pub fn duos(&self) -> Vec<(AdderRecord, AdderRecord)> {
        let mut by: BTreeMap<usize, (Option<AdderRecord>, Option<AdderRecord>)> = BTreeMap::new();
        for a in &self.adders {
            if let Some(d) = a.duo {
                let e = by.entry(d).or_default();
                match a.lane {
                    Lane::A => e.0 = Some(a.clone()),
                    Lane::B => e.1 = Some(a.clone()),
                }
            }
        }
        by.into_values()
            .filter_map(|(a, b)| Some((a?, b?)))
            .collect()
    }

    /// Inputs and expected outputs of every non-data register: catalysts
    /// start in `|0⟩` and end in `|ψ⟩`, everything else is a clean ancilla.
    pub fn ancilla_specs(&self) -> BTreeMap<String, AncillaSpec> {
        self.circuit
            .registers
            .iter()
            .filter(|r| r.role != Role::Data)
            .map(|r| {
                let spec = if r.role == Role::Catalyst {
                    AncillaSpec {
                        input: StateVector::zero(r.qubits.len()),
                        output: Some(psi_state(r.qubits.len())),
                    }
                } else {
                    AncillaSpec::zero(r.qubits.len())
                };
                (r.name.clone(), spec)
            })
            .collect()
    }

    /// Parameters, ledger, register map and adder inventory.
    pub fn sidecar(&self) -> serde_json::Value {
        let registers: Vec<serde_json::Value> = self
            .circuit
            .registers
            .iter()
            .map(|r| serde_json::json!({"name": r.name, "role": r.role.as_str(), "qubits": r.qubits}))
            .collect();
        let inventory: BTreeMap<String, usize> = self.inventory().into_iter().map(|(w, c)| (w.to_string(), c)).collect();
        serde_json::json!({
            "params": self.params,
            "catalyst_width": self.catalyst_width,
            "ledger": self.ledger,
            "ledger_bound": self.ledger.bound(),
            "registers": registers,
            "inventory": inventory,
            "adders": self.adders,
        })
    }
}

/// Replaces every layer with an adder into its lane's catalyst, prepends the
/// two catalyst preparations and appends the output SWAPs.
pub fn step7_substitute_adders(p: Program, params: &AqftParams, ledger: RemovedGateLedger) -> Result<AqftArtifact> {
    let catalyst_width = params.catalyst_width();
    let rendered = p.render(RenderMode::Adders {
        catalyst_width,
        style: params.uncompute_style,
        swaps: params.include_final_swaps,
    })?;
    let artifact = AqftArtifact {
        circuit: rendered.circuit,
        params: params.clone(),
        ledger,
        catalyst_width,
        adders: rendered.adders,
        program: p,
        snapshots: Vec::new(),
    };
    if params.prune && params.n >= params.b {
        let want = expected_inventory(params.n, params.b);
        let got = artifact.inventory();
        if got != want {
            return Err(Error::Pipeline(format!("adder inventory {got:?} differs from {want:?}")));
        }
    }
    Ok(artifact)
}

/// Runs steps 1–7 on the textbook `n`-qubit QFT.
pub fn build_aqft(params: &AqftParams) -> Result<AqftArtifact> {
    let mut snapshots = Vec::new();
    let mut snap = |stage: &str, p: &Program| -> Result<()> {
        if params.snapshots {
            snapshots.push(Snapshot {
                stage: stage.to_string(),
                circuit: p.render(RenderMode::Rotations)?.circuit,
            });
        }
        Ok(())
    };
    let qft = build_standard_qft(QftSpec::new(params.n).without_swaps());
    let subs = step1_reorder_and_partition(&qft)?;
    let frags = subs.iter().map(step2_transform_subcircuit).collect::<Result<Vec<_>>>()?;
    let p = step34_assemble_and_split(frags)?;
    snap("assembled", &p)?;
    let (p, ledger) = step5_prune(p, params);
    snap("pruned", &p)?;
    let p = step6_complete_pgt(p, params)?;
    snap("completed", &p)?;
    let mut artifact = step7_substitute_adders(p, params, ledger)?;
    artifact.snapshots = snapshots;
    Ok(artifact)
}

/// Same artifact as [`build_aqft`], but each layer is pruned as soon as it is
/// made. Memory stays near-linear in `n`, so widths in the thousands are cheap.
/// Snapshots are not available on this path.
pub fn build_aqft_fused(params: &AqftParams) -> Result<AqftArtifact> {
    let n = params.n;
    let mut ledger = RemovedGateLedger::default();
    let prune = |l: &mut Layer, ledger: &mut RemovedGateLedger| {
        if params.prune {
            prune_layer(l, params.b, ledger);
        }
    };
    // loose terms on qubit q sum to the split form with k = n−q (lead) and q+1 (trail)
    let lead: BTreeMap<usize, u32> = (0..n - 1).map(|q| (q, (n - q) as u32)).collect();
    let trail: BTreeMap<usize, u32> = (1..n).map(|q| (q, (q + 1) as u32)).collect();
    let mut first = first_layer(n, &lead)?;
    prune(&mut first.0, &mut ledger);
    let mut asm = Assembler::new(n);
    let mut pairs: Vec<Vec<usize>> = (1..n).rev().step_by(2).map(|t| vec![t, t - 1]).collect();
    if n % 2 == 1 {
        pairs.push(vec![0]);
    }
    for targets in pairs {
        asm.absorb(transform_targets(n, &targets), |l| prune(l, &mut ledger))?;
    }
    let mut last = last_layer(n, &trail)?;
    last.0.id = asm.next_id;
    prune(&mut last.0, &mut ledger);
    let p = asm.finish(first, last);
    let p = step6_complete_pgt(p, params)?;
    step7_substitute_adders(p, params, ledger)
}

/// Every gate of `c` that belongs to adder `id`.
pub fn adder_gates(c: &Circuit, id: usize) -> Vec<usize> {
    c.gates
        .iter()
        .enumerate()
        .filter(|(_, g)| matches!(g.tag, Some(Tag::Adder { id: i, .. }) if i == id))
        .map(|(i, _)| i)
        .collect()
}
