//! Circuit JSON, schema version 1.
//!
//! ```json
//! {"version": 1, "num_qubits": 3, "num_bits": 1,
//!  "registers": [{"name": "data", "role": "data", "qubits": [0, 1, 2]}],
//!  "gates": [{"kind": "rz", "qubits": [0], "angle": {"num": -1, "den_pow2": 3}},
//!            {"kind": "measure_x", "qubits": [1], "bit": 0},
//!            {"kind": "cz", "qubits": [0, 2], "if_bit": 0, "tag": "adder:0:3"}]}
//! ```

use serde::{Deserialize, Serialize};

use crate::angle::DyadicAngle;
use crate::circuit::{Circuit, Gate, GateKind, Register, Role, Tag};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct WireCircuit {
    version: u32,
    num_qubits: usize,
    num_bits: usize,
    registers: Vec<WireRegister>,
    gates: Vec<WireGate>,
}

#[derive(Serialize, Deserialize)]
struct WireRegister {
    name: String,
    role: String,
    qubits: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct WireGate {
    kind: String,
    qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    angle: Option<WireAngle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bit: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    if_bit: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tag: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct WireAngle {
    num: i64,
    den_pow2: u32,
}

fn wire_gate(g: &Gate) -> WireGate {
    let angle = match g.kind {
        GateKind::Rz(a) | GateKind::SynthRz(a) => Some(WireAngle {
            num: a.numerator(),
            den_pow2: a.denom_pow(),
        }),
        _ => None,
    };
    WireGate {
        kind: g.kind.name().to_string(),
        qubits: g.qubits.clone(),
        angle,
        k: match g.kind {
            GateKind::CRk(k) => Some(k),
            _ => None,
        },
        bit: g.kind.measured_bit(),
        if_bit: g.condition,
        tag: g.tag.as_ref().map(Tag::to_string),
    }
}

fn parse_kind(w: &WireGate, index: usize) -> Result<GateKind> {
    let bad = |reason: &str| Error::Json(format!("gate #{index}: {reason}"));
    let angle = || -> Result<DyadicAngle> {
        let a = w.angle.as_ref().ok_or_else(|| bad("missing angle"))?;
        if a.den_pow2 > crate::angle::MAX_DENOM_POW {
            return Err(bad("angle denominator too large"));
        }
        let parsed = DyadicAngle::new(a.num, a.den_pow2);
        if parsed.numerator() != a.num || parsed.denom_pow() != a.den_pow2 {
            return Err(bad("angle is not normalized"));
        }
        Ok(parsed)
    };
    let bit = || w.bit.ok_or_else(|| bad("missing measured bit"));
    Ok(match w.kind.as_str() {
        "h" => GateKind::H,
        "x" => GateKind::X,
        "z" => GateKind::Z,
        "s" => GateKind::S,
        "sdg" => GateKind::Sdg,
        "t" => GateKind::T,
        "tdg" => GateKind::Tdg,
        "rz" => GateKind::Rz(angle()?),
        "synth_rz" => GateKind::SynthRz(angle()?),
        "cnot" => GateKind::Cnot,
        "cz" => GateKind::Cz,
        "ccz" => GateKind::Ccz,
        "swap" => GateKind::Swap,
        "crk" => GateKind::CRk(w.k.ok_or_else(|| bad("missing k"))?),
        "measure_x" => GateKind::MeasureX(bit()?),
        "measure_z" => GateKind::MeasureZ(bit()?),
        other => return Err(bad(&format!("unknown kind `{other}`"))),
    })
}

pub fn to_value(c: &Circuit) -> serde_json::Value {
    let wire = WireCircuit {
        version: SCHEMA_VERSION,
        num_qubits: c.num_qubits,
        num_bits: c.num_bits,
        registers: c
            .registers
            .iter()
            .map(|r| WireRegister {
                name: r.name.clone(),
                role: r.role.as_str().to_string(),
                qubits: r.qubits.clone(),
            })
            .collect(),
        gates: c.gates.iter().map(wire_gate).collect(),
    };
    serde_json::to_value(wire).expect("circuit JSON is always serializable")
}

pub fn to_json(c: &Circuit) -> String {
    serde_json::to_string_pretty(&to_value(c)).expect("circuit JSON is always serializable")
}

/// Parses and validates a version-1 circuit.
pub fn from_json(s: &str) -> Result<Circuit> {
    let w: WireCircuit = serde_json::from_str(s).map_err(|e| Error::Json(e.to_string()))?;
    if w.version != SCHEMA_VERSION {
        return Err(Error::Json(format!("unsupported schema version {}", w.version)));
    }
    let registers = w
        .registers
        .into_iter()
        .map(|r| {
            let role = Role::parse(&r.role).ok_or_else(|| Error::Json(format!("unknown role `{}`", r.role)))?;
            Ok(Register {
                name: r.name,
                role,
                qubits: r.qubits,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let gates = w
        .gates
        .iter()
        .enumerate()
        .map(|(i, g)| {
            Ok(Gate {
                kind: parse_kind(g, i)?,
                qubits: g.qubits.clone(),
                condition: g.if_bit,
                tag: g.tag.as_deref().map(|t| t.parse().expect("tag parsing is infallible")),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let c = Circuit {
        num_qubits: w.num_qubits,
        num_bits: w.num_bits,
        gates,
        registers,
    };
    c.validate()?;
    Ok(c)
}
