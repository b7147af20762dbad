//! Gate-level circuit representation.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::angle::DyadicAngle;
use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    H,
    X,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    Rz(DyadicAngle),
    /// An `Rz` left for an external synthesizer; simulated exactly, priced by model.
    SynthRz(DyadicAngle),
    Cnot,
    Cz,
    Ccz,
    Swap,
    /// Controlled `diag(1, e^{iπ/2^(k−1)})`.
    CRk(u32),
    MeasureX(usize),
    MeasureZ(usize),
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Cz | GateKind::Swap | GateKind::CRk(_) => 2,
            GateKind::Ccz => 3,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Z => "z",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::T => "t",
            GateKind::Tdg => "tdg",
            GateKind::Rz(_) => "rz",
            GateKind::SynthRz(_) => "synth_rz",
            GateKind::Cnot => "cnot",
            GateKind::Cz => "cz",
            GateKind::Ccz => "ccz",
            GateKind::Swap => "swap",
            GateKind::CRk(_) => "crk",
            GateKind::MeasureX(_) => "measure_x",
            GateKind::MeasureZ(_) => "measure_z",
        }
    }

    pub fn is_t_like(self) -> bool {
        matches!(self, GateKind::T | GateKind::Tdg)
    }

    pub fn is_measurement(self) -> bool {
        matches!(self, GateKind::MeasureX(_) | GateKind::MeasureZ(_))
    }

    pub fn measured_bit(self) -> Option<usize> {
        match self {
            GateKind::MeasureX(b) | GateKind::MeasureZ(b) => Some(b),
            _ => None,
        }
    }

    /// Diagonal in the computational basis.
    pub fn is_diagonal(self) -> bool {
        matches!(
            self,
            GateKind::Z
                | GateKind::S
                | GateKind::Sdg
                | GateKind::T
                | GateKind::Tdg
                | GateKind::Rz(_)
                | GateKind::SynthRz(_)
                | GateKind::Cz
                | GateKind::Ccz
                | GateKind::CRk(_)
        )
    }
}

/// Provenance label attached to gates by the builders.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    /// Part of adder number `id`, which adds modulo `2^width`.
    Adder { id: usize, width: usize },
    PsiPrep,
    /// Rz of an inverse phase-gradient layer before adder substitution.
    PgtLayer,
    /// Rz inserted to complete a layer to a full phase-gradient pattern.
    PgtCompletion,
    Nullifier,
    NonPgtT,
    /// S half of a split first/last-layer rotation.
    Split,
    /// CNOT that encodes or decodes a parity for a phase layer.
    Frame,
    Other(String),
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tag::Adder { id, width } => write!(f, "adder:{id}:{width}"),
            Tag::PsiPrep => f.write_str("psi-prep"),
            Tag::PgtLayer => f.write_str("pgt-layer"),
            Tag::PgtCompletion => f.write_str("pgt-completion"),
            Tag::Nullifier => f.write_str("nullifier"),
            Tag::NonPgtT => f.write_str("non-pgt-T"),
            Tag::Split => f.write_str("split"),
            Tag::Frame => f.write_str("frame"),
            Tag::Other(s) => f.write_str(s),
        }
    }
}

impl FromStr for Tag {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "psi-prep" => Tag::PsiPrep,
            "pgt-layer" => Tag::PgtLayer,
            "pgt-completion" => Tag::PgtCompletion,
            "nullifier" => Tag::Nullifier,
            "non-pgt-T" => Tag::NonPgtT,
            "split" => Tag::Split,
            "frame" => Tag::Frame,
            other => {
                let mut parts = other.split(':');
                match (parts.next(), parts.next(), parts.next(), parts.next()) {
                    (Some("adder"), Some(id), Some(w), None) => {
                        match (id.parse(), w.parse()) {
                            (Ok(id), Ok(width)) => Tag::Adder { id, width },
                            _ => Tag::Other(other.to_string()),
                        }
                    }
                    _ => Tag::Other(other.to_string()),
                }
            }
        })
    }
}

impl Tag {
    /// Tag family without parameters, used for census keys.
    pub fn family(&self) -> String {
        match self {
            Tag::Adder { .. } => "adder".to_string(),
            other => other.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub condition: Option<usize>,
    pub tag: Option<Tag>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: &[usize]) -> Self {
        Gate {
            kind,
            qubits: qubits.to_vec(),
            condition: None,
            tag: None,
        }
    }

    pub fn tagged(mut self, tag: Tag) -> Self {
        self.tag = Some(tag);
        self
    }

    pub fn conditioned_on(mut self, bit: usize) -> Self {
        self.condition = Some(bit);
        self
    }

    /// Classical bits read or written by this gate.
    pub fn bits(&self) -> impl Iterator<Item = usize> + '_ {
        self.kind.measured_bit().into_iter().chain(self.condition)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Data,
    ZeroAncilla,
    Catalyst,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Data => "data",
            Role::ZeroAncilla => "zero-ancilla",
            Role::Catalyst => "catalyst",
        }
    }

    pub fn parse(s: &str) -> Option<Role> {
        match s {
            "data" => Some(Role::Data),
            "zero-ancilla" => Some(Role::ZeroAncilla),
            "catalyst" => Some(Role::Catalyst),
            _ => None,
        }
    }
}

/// Named group of qubits; `qubits[0]` is the least-significant bit.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Register {
    pub name: String,
    pub role: Role,
    pub qubits: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Circuit {
    pub num_qubits: usize,
    pub num_bits: usize,
    pub gates: Vec<Gate>,
    pub registers: Vec<Register>,
}

impl Circuit {
    /// Circuit with a single data register `data` spanning all qubits.
    pub fn new(num_qubits: usize) -> Self {
        Circuit {
            num_qubits,
            num_bits: 0,
            gates: Vec::new(),
            registers: vec![Register {
                name: "data".to_string(),
                role: Role::Data,
                qubits: (0..num_qubits).collect(),
            }],
        }
    }

    /// Circuit with no qubits and no registers; grow it with [`Circuit::add_register`].
    pub fn empty() -> Self {
        Circuit::default()
    }

    /// Appends a fresh register of `width` qubits and returns its indices.
    pub fn add_register(&mut self, name: &str, role: Role, width: usize) -> Vec<usize> {
        let qubits: Vec<usize> = (self.num_qubits..self.num_qubits + width).collect();
        self.num_qubits += width;
        self.registers.push(Register {
            name: name.to_string(),
            role,
            qubits: qubits.clone(),
        });
        qubits
    }

    pub fn alloc_bit(&mut self) -> usize {
        self.num_bits += 1;
        self.num_bits - 1
    }

    pub fn register(&self, name: &str) -> Result<&Register> {
        self.registers
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| Error::UnknownRegister(name.to_string()))
    }

    pub fn push(&mut self, gate: Gate) {
        self.gates.push(gate);
    }

    pub fn add(&mut self, kind: GateKind, qubits: &[usize]) {
        self.gates.push(Gate::new(kind, qubits));
    }

    pub fn add_tagged(&mut self, kind: GateKind, qubits: &[usize], tag: Option<Tag>) {
        self.gates.push(Gate {
            kind,
            qubits: qubits.to_vec(),
            condition: None,
            tag,
        });
    }

    /// Appends `other`'s gates with qubits and bits remapped; bits are shifted
    /// past this circuit's existing ones.
    pub fn append_mapped(&mut self, other: &Circuit, qubit_map: &[usize]) {
        let bit_offset = self.num_bits;
        for g in &other.gates {
            let kind = match g.kind {
                GateKind::MeasureX(b) => GateKind::MeasureX(b + bit_offset),
                GateKind::MeasureZ(b) => GateKind::MeasureZ(b + bit_offset),
                k => k,
            };
            self.gates.push(Gate {
                kind,
                qubits: g.qubits.iter().map(|&q| qubit_map[q]).collect(),
                condition: g.condition.map(|b| b + bit_offset),
                tag: g.tag.clone(),
            });
        }
        self.num_bits += other.num_bits;
    }

    /// Appends `other`, which must act on the same qubit numbering.
    pub fn extend(&mut self, other: &Circuit) {
        let id: Vec<usize> = (0..other.num_qubits).collect();
        self.append_mapped(other, &id);
    }

    pub fn is_coherent(&self) -> bool {
        self.gates
            .iter()
            .all(|g| !g.kind.is_measurement() && g.condition.is_none())
    }

    pub fn count_kind(&self, pred: impl Fn(GateKind) -> bool) -> usize {
        self.gates.iter().filter(|g| pred(g.kind)).count()
    }

    pub fn t_count(&self) -> usize {
        self.count_kind(GateKind::is_t_like)
    }

    /// Gate counts keyed by kind name.
    pub fn kind_census(&self) -> BTreeMap<&'static str, usize> {
        let mut m = BTreeMap::new();
        for g in &self.gates {
            *m.entry(g.kind.name()).or_insert(0) += 1;
        }
        m
    }

    /// Checks arities, index ranges, and the register partition.
    pub fn validate(&self) -> Result<()> {
        for (index, g) in self.gates.iter().enumerate() {
            let bad = |reason: String| Error::InvalidGate { index, reason };
            if g.qubits.len() != g.kind.arity() {
                return Err(bad(format!(
                    "{} expects {} qubits, got {}",
                    g.kind.name(),
                    g.kind.arity(),
                    g.qubits.len()
                )));
            }
            for (i, &q) in g.qubits.iter().enumerate() {
                if q >= self.num_qubits {
                    return Err(bad(format!("qubit {q} out of range")));
                }
                if g.qubits[..i].contains(&q) {
                    return Err(bad(format!("repeated qubit {q}")));
                }
            }
            for b in g.bits() {
                if b >= self.num_bits {
                    return Err(bad(format!("bit {b} out of range")));
                }
            }
            if let GateKind::CRk(k) = g.kind {
                if !(2..=crate::angle::MAX_DENOM_POW + 1).contains(&k) {
                    return Err(bad(format!("CRk order {k} unsupported")));
                }
            }
        }
        let mut owner = vec![None; self.num_qubits];
        for (ri, r) in self.registers.iter().enumerate() {
            if self.registers[..ri].iter().any(|o| o.name == r.name) {
                return Err(Error::InvalidRegisters(format!("duplicate name {}", r.name)));
            }
            for &q in &r.qubits {
                match owner.get_mut(q) {
                    None => {
                        return Err(Error::InvalidRegisters(format!(
                            "register {} names qubit {q} out of range",
                            r.name
                        )))
                    }
                    Some(Some(_)) => {
                        return Err(Error::InvalidRegisters(format!(
                            "qubit {q} belongs to two registers"
                        )))
                    }
                    Some(slot) => *slot = Some(ri),
                }
            }
        }
        if let Some(q) = owner.iter().position(Option::is_none) {
            return Err(Error::InvalidRegisters(format!("qubit {q} has no register")));
        }
        Ok(())
    }
}
