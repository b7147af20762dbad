//! OpenQASM 2.0 export of coherent circuits.

use std::fmt::Write;

use crate::circuit::{Circuit, GateKind};
use crate::error::{Error, Result};

/// Writes `c` over `qelib1.inc` with one `qreg` per register. Measurements and
/// conditioned gates are rejected; build with the coherent uncompute style
/// for export.
pub fn to_qasm(c: &Circuit) -> Result<String> {
    if !c.is_coherent() {
        return Err(Error::NotCoherent);
    }
    c.validate()?;
    let mut names = vec![String::new(); c.num_qubits];
    let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    for r in &c.registers {
        if r.qubits.is_empty() {
            continue;
        }
        writeln!(out, "qreg {}[{}];", r.name, r.qubits.len()).unwrap();
        for (i, &q) in r.qubits.iter().enumerate() {
            names[q] = format!("{}[{i}]", r.name);
        }
    }
    let pi = |num: i64, pow: u32| {
        if pow == 0 {
            format!("{num}*pi")
        } else {
            format!("{num}*pi/{}", 1u64 << pow)
        }
    };
    for g in &c.gates {
        let q: Vec<&str> = g.qubits.iter().map(|&i| names[i].as_str()).collect();
        let line = match g.kind {
            GateKind::H => format!("h {};", q[0]),
            GateKind::X => format!("x {};", q[0]),
            GateKind::Z => format!("z {};", q[0]),
            GateKind::S => format!("s {};", q[0]),
            GateKind::Sdg => format!("sdg {};", q[0]),
            GateKind::T => format!("t {};", q[0]),
            GateKind::Tdg => format!("tdg {};", q[0]),
            GateKind::Rz(a) | GateKind::SynthRz(a) => format!("rz({}) {};", pi(a.numerator(), a.denom_pow()), q[0]),
            GateKind::Cnot => format!("cx {},{};", q[0], q[1]),
            GateKind::Cz => format!("cz {},{};", q[0], q[1]),
            GateKind::Ccz => format!("h {2};\nccx {0},{1},{2};\nh {2};", q[0], q[1], q[2]),
            GateKind::Swap => format!("swap {},{};", q[0], q[1]),
            GateKind::CRk(k) => format!("cu1({}) {},{};", pi(1, k - 1), q[0], q[1]),
            GateKind::MeasureX(_) | GateKind::MeasureZ(_) => unreachable!("coherent circuits have no measurements"),
        };
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adders::{build_adder, AdderSpec, UncomputeStyle};
    use crate::qft::{build_standard_qft, QftSpec};

    #[test]
    fn qft_export() {
        let q = to_qasm(&build_standard_qft(QftSpec::new(3))).unwrap();
        assert!(q.starts_with("OPENQASM 2.0;"));
        assert!(q.contains("qreg data[3];"));
        assert!(q.contains("cu1(1*pi/2) data[1],data[2];"));
        assert_eq!(q.matches("swap").count(), 1);
    }

    #[test]
    fn measurement_circuits_are_refused() {
        let measured = build_adder(&AdderSpec::new(3)).unwrap();
        assert_eq!(to_qasm(&measured), Err(Error::NotCoherent));
        let coherent = build_adder(&AdderSpec::new(3).with_style(UncomputeStyle::CoherentReference)).unwrap();
        let q = to_qasm(&coherent).unwrap();
        assert!(q.contains("ccx"));
        assert!(q.contains("qreg carry[2];"));
    }
}
