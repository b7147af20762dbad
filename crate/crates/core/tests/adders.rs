use std::collections::BTreeMap;

use aqft::adders::{append_adder, build_adder, classical_adder_oracle, pgt_via_addition, AdderSpec, UncomputeStyle};
use aqft::qft::{build_inverse_pgt_layer, build_psi_prep, psi_state};
use aqft::sim::{effective_operator, simulate, spectral_distance, unitary_of, AncillaSpec, MeasurementPolicy, OperatorMatrix, StateVector};
use aqft::{Circuit, GateKind, Role, Tag};
use num_complex::Complex64 as C64;

fn policies(c: &Circuit) -> Vec<MeasurementPolicy> {
    let count = c.count_kind(GateKind::is_measurement);
    vec![
        MeasurementPolicy::forced_all(0, count),
        MeasurementPolicy::forced_all(1, count),
        MeasurementPolicy::SeededRandom(11),
        MeasurementPolicy::SeededRandom(12),
    ]
}

#[test]
fn adder_matches_classical_oracle_exhaustively() {
    for w in 2..=5usize {
        let oracle = classical_adder_oracle(w).unwrap();
        for style in [UncomputeStyle::MeasureBased, UncomputeStyle::CoherentReference] {
            let c = build_adder(&AdderSpec::new(w).with_style(style)).unwrap();
            for policy in policies(&c) {
                for idx in 0..1usize << (2 * w) {
                    let (out, _) = simulate(&c, &StateVector::basis(c.num_qubits, idx as u64), &policy).unwrap();
                    let amp = out.amplitude(oracle[idx] as u64);
                    assert!((amp - 1.0).norm() < 1e-10, "w={w} {style:?} idx={idx} amp={amp}");
                }
            }
        }
    }
}

#[test]
fn coherent_adder_is_a_permutation() {
    let c = build_adder(&AdderSpec::new(3).with_style(UncomputeStyle::CoherentReference)).unwrap();
    let u = unitary_of(&c).unwrap();
    let oracle = classical_adder_oracle(3).unwrap();
    for (j, &i) in oracle.iter().enumerate() {
        assert!((u[(i, j)] - 1.0).norm() < 1e-10);
    }
}

fn diag_phases(b: usize, copies: usize) -> OperatorMatrix {
    let dim = 1usize << (b * copies);
    let mask = (1usize << b) - 1;
    OperatorMatrix::from_fn(dim, dim, |r, c| {
        if r != c {
            return C64::new(0.0, 0.0);
        }
        let k: usize = (0..copies).map(|i| (r >> (i * b)) & mask).sum();
        C64::from_polar(1.0, -2.0 * std::f64::consts::PI * k as f64 / (1u64 << b) as f64)
    })
}

#[test]
fn addition_into_psi_is_the_inverse_gradient() {
    for b in 1..=5usize {
        let c = pgt_via_addition(b);
        let mut anc = BTreeMap::new();
        anc.insert(
            "catalyst".to_string(),
            AncillaSpec {
                input: StateVector::zero(b),
                output: Some(psi_state(b)),
            },
        );
        anc.insert("carry".to_string(), AncillaSpec::zero(b - 1));
        let reference = unitary_of(&build_inverse_pgt_layer(b, false)).unwrap();
        for policy in policies(&c) {
            let eff = effective_operator(&c, "data", &anc, &policy).unwrap();
            assert!(eff.min_fidelity() >= 1.0 - 1e-10, "b={b}");
            let d = spectral_distance(&eff.matrix, &reference, true).unwrap();
            assert!(d <= 1e-9, "b={b} distance {d}");
            assert!(spectral_distance(&eff.matrix, &diag_phases(b, 1), true).unwrap() <= 1e-9);
        }
    }
}

#[test]
fn catalyst_is_restored_when_supplied() {
    for b in 2..=5usize {
        let mut c = Circuit::empty();
        let data = c.add_register("data", Role::Data, b);
        let cat = c.add_register("catalyst", Role::Catalyst, b);
        let carries = c.add_register("carry", Role::ZeroAncilla, b - 1);
        append_adder(&mut c, &data, &cat, &carries, UncomputeStyle::MeasureBased, Some(Tag::Adder { id: 0, width: b }));
        let mut anc = BTreeMap::new();
        anc.insert("catalyst".to_string(), AncillaSpec::restored(psi_state(b)));
        anc.insert("carry".to_string(), AncillaSpec::zero(b - 1));
        let eff = effective_operator(&c, "data", &anc, &MeasurementPolicy::SeededRandom(5)).unwrap();
        assert!(eff.min_fidelity() >= 1.0 - 1e-10);
        // exact phases, no global-phase freedom
        assert!(spectral_distance(&eff.matrix, &diag_phases(b, 1), false).unwrap() <= 1e-9);
    }
}

#[test]
fn one_catalyst_serves_two_registers() {
    let b = 3;
    let mut c = Circuit::empty();
    let data = c.add_register("data", Role::Data, 2 * b);
    let cat = c.add_register("catalyst", Role::Catalyst, b);
    let carries = c.add_register("carry", Role::ZeroAncilla, b - 1);
    c.append_mapped(&build_psi_prep(b), &cat);
    for (id, half) in data.chunks(b).enumerate() {
        append_adder(&mut c, half, &cat, &carries, UncomputeStyle::MeasureBased, Some(Tag::Adder { id, width: b }));
    }
    let mut anc = BTreeMap::new();
    anc.insert(
        "catalyst".to_string(),
        AncillaSpec {
            input: StateVector::zero(b),
            output: Some(psi_state(b)),
        },
    );
    anc.insert("carry".to_string(), AncillaSpec::zero(b - 1));
    let eff = effective_operator(&c, "data", &anc, &MeasurementPolicy::SeededRandom(9)).unwrap();
    assert!(eff.min_fidelity() >= 1.0 - 1e-10);
    assert!(spectral_distance(&eff.matrix, &diag_phases(b, 2), true).unwrap() <= 1e-9);
}

#[test]
fn effective_operator_ignores_outcomes() {
    let b = 4;
    let c = pgt_via_addition(b);
    let mut anc = BTreeMap::new();
    anc.insert(
        "catalyst".to_string(),
        AncillaSpec {
            input: StateVector::zero(b),
            output: Some(psi_state(b)),
        },
    );
    anc.insert("carry".to_string(), AncillaSpec::zero(b - 1));
    let first = effective_operator(&c, "data", &anc, &MeasurementPolicy::SeededRandom(0)).unwrap();
    for seed in 1..6 {
        let other = effective_operator(&c, "data", &anc, &MeasurementPolicy::SeededRandom(seed)).unwrap();
        assert!(spectral_distance(&first.matrix, &other.matrix, false).unwrap() <= 1e-9);
    }
}
