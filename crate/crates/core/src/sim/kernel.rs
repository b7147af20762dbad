//! Small dense matrices for individual gates and a kernel that applies them.

use num_complex::Complex64 as C64;

use crate::circuit::GateKind;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub(crate) type Mat2 = [[C64; 2]; 2];

pub(crate) const IDENTITY2: Mat2 = [[ONE, ZERO], [ZERO, ONE]];

pub(crate) fn cis(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

pub(crate) fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut r = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

pub(crate) fn mat2_apply(m: &Mat2, v: [C64; 2]) -> [C64; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

pub(crate) fn hadamard() -> Mat2 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [[C64::new(s, 0.0), C64::new(s, 0.0)], [C64::new(s, 0.0), C64::new(-s, 0.0)]]
}

fn diag2(a: C64, b: C64) -> Mat2 {
    [[a, ZERO], [ZERO, b]]
}

/// Matrix of a single-qubit kind; `None` for multi-qubit kinds and measurements.
pub(crate) fn single_qubit_matrix(kind: GateKind) -> Option<Mat2> {
    use std::f64::consts::FRAC_PI_4;
    Some(match kind {
        GateKind::H => hadamard(),
        GateKind::X => [[ZERO, ONE], [ONE, ZERO]],
        GateKind::Z => diag2(ONE, -ONE),
        GateKind::S => diag2(ONE, C64::i()),
        GateKind::Sdg => diag2(ONE, -C64::i()),
        GateKind::T => diag2(ONE, cis(FRAC_PI_4)),
        GateKind::Tdg => diag2(ONE, cis(-FRAC_PI_4)),
        GateKind::Rz(a) | GateKind::SynthRz(a) => {
            let t = a.to_radians();
            diag2(cis(-t / 2.0), cis(t / 2.0))
        }
        _ => return None,
    })
}

/// Full local unitary of a gate, row-major, over its own operand order
/// (operand `i` is bit `i` of the local index).
pub(crate) fn gate_matrix(kind: GateKind) -> Vec<C64> {
    if let Some(m) = single_qubit_matrix(kind) {
        return vec![m[0][0], m[0][1], m[1][0], m[1][1]];
    }
    let dim = 1usize << kind.arity();
    let mut u = vec![ZERO; dim * dim];
    let mut set = |row: usize, col: usize, v: C64| u[row * dim + col] = v;
    match kind {
        GateKind::Cnot => {
            // operand 0 controls operand 1
            for col in 0..4 {
                let row = if col & 1 == 1 { col ^ 2 } else { col };
                set(row, col, ONE);
            }
        }
        GateKind::Cz => {
            for col in 0..4 {
                set(col, col, if col == 3 { -ONE } else { ONE });
            }
        }
        GateKind::CRk(k) => {
            let phase = cis(std::f64::consts::PI / (1u64 << (k - 1)) as f64);
            for col in 0..4 {
                set(col, col, if col == 3 { phase } else { ONE });
            }
        }
        GateKind::Swap => {
            for col in 0..4 {
                let row = ((col & 1) << 1) | (col >> 1);
                set(row, col, ONE);
            }
        }
        GateKind::Ccz => {
            for col in 0..8 {
                set(col, col, if col == 7 { -ONE } else { ONE });
            }
        }
        other => panic!("no unitary for {}", other.name()),
    }
    u
}

/// Applies the `2^k × 2^k` row-major matrix `m` to `state`, whose index bits
/// `positions[i]` play the role of local bit `i`.
pub(crate) fn apply_dense(state: &mut [C64], positions: &[usize], m: &[C64]) {
    let k = positions.len();
    let d = 1usize << k;
    debug_assert_eq!(m.len(), d * d);
    let mask: usize = positions.iter().map(|&p| 1usize << p).sum();
    let offsets: Vec<usize> = (0..d)
        .map(|l| {
            (0..k)
                .filter(|&i| (l >> i) & 1 == 1)
                .map(|i| 1usize << positions[i])
                .sum()
        })
        .collect();
    let mut buf = vec![ZERO; d];
    for base in 0..state.len() {
        if base & mask != 0 {
            continue;
        }
        for l in 0..d {
            buf[l] = state[base + offsets[l]];
        }
        for r in 0..d {
            let mut acc = ZERO;
            for (l, &b) in buf.iter().enumerate() {
                acc += m[r * d + l] * b;
            }
            state[base + offsets[r]] = acc;
        }
    }
}
