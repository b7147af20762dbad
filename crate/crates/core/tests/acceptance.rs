//! One PASS/FAIL line per acceptance criterion. Run with `--nocapture` to see them.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use aqft::adders::{build_adder, classical_adder_oracle, pgt_via_addition, AdderSpec, UncomputeStyle};
use aqft::analysis::{artifact_report, baseline, census, closed_form_tdepth, error_budget, tagged_count};
use aqft::pipeline::{adder_gates, build_aqft, build_aqft_fused, expected_inventory, AqftParams};
use aqft::qft::{build_inverse_pgt_layer, build_standard_qft, dft_matrix, psi_state, QftSpec};
use aqft::sim::{effective_operator, simulate, spectral_distance, unitary_of, AncillaSpec, MeasurementPolicy, StateVector};
use aqft::{t_stages, Circuit, GateKind, Tag};

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome {
        ok: true,
        detail: detail.into(),
    }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome {
        ok: false,
        detail: detail.into(),
    }
}

fn run(id: u32, title: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    if let Some(l) = limit {
        if took > l {
            o.ok = false;
            o.detail = format!("{}; over the {:?} limit", o.detail, l);
        }
    }
    println!(
        "criterion {id:>2} {}: {title} [{:.2}s] {}",
        if o.ok { "PASS" } else { "FAIL" },
        took.as_secs_f64(),
        o.detail
    );
    o.ok
}

fn policies(c: &Circuit) -> [MeasurementPolicy; 3] {
    let count = c.count_kind(GateKind::is_measurement);
    [
        MeasurementPolicy::forced_all(0, count),
        MeasurementPolicy::forced_all(1, count),
        MeasurementPolicy::SeededRandom(7),
    ]
}

/// ε = n/2^b picks exactly b.
fn params(n: usize, b: usize) -> AqftParams {
    let eps = n as f64 / (1u64 << b) as f64;
    if eps < 1.0 {
        AqftParams::new(n, eps).unwrap()
    } else {
        AqftParams::new(n, 0.5).unwrap().with_precision_bits(b).unwrap()
    }
}

fn exact_qft() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 1..=8 {
        let u = unitary_of(&build_standard_qft(QftSpec::new(n))).unwrap();
        worst = worst.max(spectral_distance(&u, &dft_matrix(n), true).unwrap());
    }
    let d = format!("max distance {worst:.1e}");
    if worst <= 1e-9 {
        pass(d)
    } else {
        fail(d)
    }
}

fn pgt_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut min_fid: f64 = 1.0;
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
        anc.insert("carry".to_string(), AncillaSpec::zero(b.saturating_sub(1)));
        let reference = unitary_of(&build_inverse_pgt_layer(b, false)).unwrap();
        for policy in policies(&c) {
            let eff = effective_operator(&c, "data", &anc, &policy).unwrap();
            min_fid = min_fid.min(eff.min_fidelity());
            worst = worst.max(spectral_distance(&eff.matrix, &reference, true).unwrap());
        }
    }
    let d = format!("max distance {worst:.1e}, min catalyst fidelity {min_fid:.12}");
    if worst <= 1e-9 && min_fid >= 1.0 - 1e-10 {
        pass(d)
    } else {
        fail(d)
    }
}

fn adder_oracle() -> Outcome {
    let mut checked = 0usize;
    for w in 2..=5usize {
        let oracle = classical_adder_oracle(w).unwrap();
        for style in [UncomputeStyle::MeasureBased, UncomputeStyle::CoherentReference] {
            let c = build_adder(&AdderSpec::new(w).with_style(style)).unwrap();
            let count = c.count_kind(GateKind::is_measurement);
            for forced in [0, 1] {
                let policy = MeasurementPolicy::forced_all(forced, count);
                for idx in 0..1usize << (2 * w) {
                    let (out, _) = simulate(&c, &StateVector::basis(c.num_qubits, idx as u64), &policy).unwrap();
                    // all weight on the oracle index means the carries are back at zero
                    let amp = out.amplitude(oracle[idx] as u64);
                    if (amp - 1.0).norm() >= 1e-10 {
                        return fail(format!("w={w} {style:?} forced {forced} input {idx}: amplitude {amp}"));
                    }
                    checked += 1;
                }
            }
        }
    }
    pass(format!("{checked} basis runs"))
}

fn adder_costs() -> Outcome {
    for b in 2..=8usize {
        let r = census(&build_adder(&AdderSpec::new(b)).unwrap(), 1e-3);
        if r.t_count_exact != 4 * (b - 1) || r.t_depth_exact != (2 * (b - 1)) as f64 {
            return fail(format!("b={b}: T-count {} T-depth {}", r.t_count_exact, r.t_depth_exact));
        }
    }
    pass("4(b−1) and 2(b−1) for b = 2..8")
}

fn unpruned_exactness() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 3..=6 {
        let a = build_aqft(&AqftParams::figure_compat(n, 0.5).unwrap().unpruned()).unwrap();
        let budget = error_budget(&a, true, &MeasurementPolicy::SeededRandom(3)).unwrap();
        worst = worst.max(budget.exact_error.unwrap());
    }
    let d = format!("max exact error {worst:.1e}");
    if worst <= 1e-8 {
        pass(d)
    } else {
        fail(d)
    }
}

fn bound_certification() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (n, b) in [(4, 4), (5, 4), (6, 4), (6, 5)] {
        let p = params(n, b);
        let a = build_aqft(&p).unwrap();
        let budget = error_budget(&a, true, &MeasurementPolicy::SeededRandom(1)).unwrap();
        let exact = budget.exact_error.unwrap();
        let chain = exact <= budget.ledger_bound + 1e-9 && budget.ledger_bound <= budget.pruning_bound;
        let total = budget.total_bound <= p.epsilon * (std::f64::consts::PI + 1.0);
        ok &= chain && total;
        lines.push(format!(
            "({n},{b}) {exact:.3}≤{:.3}≤{:.3} total {:.3}",
            budget.ledger_bound, budget.pruning_bound, budget.total_bound
        ));
    }
    let d = lines.join("; ");
    if ok {
        pass(d)
    } else {
        fail(d)
    }
}

fn no_toffoli_and_delta() -> Outcome {
    let mut misses = Vec::new();
    for n in 3..=12usize {
        let a = build_aqft(&params(n, 4)).unwrap();
        let c = &a.circuit;
        if c.count_kind(|k| matches!(k, GateKind::Ccz | GateKind::CRk(_))) != 0 {
            return fail(format!("n={n} contains CCZ or CRk"));
        }
        let added = tagged_count(c, &Tag::Nullifier, GateKind::is_t_like);
        if added != n.div_ceil(2) {
            misses.push(format!("n={n}: {added} vs {}", n.div_ceil(2)));
        }
    }
    if misses.is_empty() {
        pass("no CCZ/CRk; ⌈n/2⌉ T gates added")
    } else {
        fail(format!("no CCZ/CRk; step-6 T gates {}", misses.join(", ")))
    }
}

fn inventory_law() -> Outcome {
    for b in [4, 5] {
        for n in 8..=16usize {
            let got = build_aqft(&params(n, b)).unwrap().inventory();
            if got != expected_inventory(n, b) {
                return fail(format!("n={n} b={b}: {got:?}"));
            }
        }
    }
    pass("n = 8..16, b ∈ {4, 5}")
}

fn leading_order() -> Outcome {
    let eps = 1e-3;
    let mut lines = Vec::new();
    let mut ok = true;
    for n in [32, 64, 128, 256] {
        let a = build_aqft_fused(&AqftParams::new(n, eps).unwrap()).unwrap();
        let r = artifact_report(&a);
        let l = n as f64 * (n as f64 / eps).log2();
        let tc = r.t_count / (4.0 * l);
        let td = closed_form_tdepth(n, eps, a.params.b).deterministic() / l;
        let base = baseline(n, eps);
        let (bc, bd) = (base.t_count / (4.0 * l), base.t_depth / l);
        ok &= (0.85..=1.35).contains(&tc) && (0.85..=1.6).contains(&td) && bc == 2.0 && bd == 2.0;
        lines.push(format!("n={n} T-count {tc:.3} T-depth {td:.3}"));
    }
    let d = lines.join("; ");
    if ok {
        pass(d)
    } else {
        fail(d)
    }
}

fn span(stages: &BTreeSet<usize>) -> usize {
    match (stages.first(), stages.last()) {
        (Some(lo), Some(hi)) => hi - lo + 1,
        _ => 0,
    }
}

fn parallel_pairs() -> Outcome {
    let a = build_aqft(&params(8, 4)).unwrap();
    let stages = t_stages(&a.circuit);
    let of = |id: usize| -> BTreeSet<usize> { adder_gates(&a.circuit, id).into_iter().filter_map(|g| stages[g]).collect() };
    let duos = a.duos();
    if duos.is_empty() {
        return fail("no adder duos");
    }
    let mut lines = Vec::new();
    for (x, y) in &duos {
        let (sx, sy) = (of(x.id), of(y.id));
        let single = span(&sx).max(span(&sy));
        let both: BTreeSet<usize> = sx.union(&sy).copied().collect();
        if span(&both) != single {
            return fail(format!("adders {} and {}: pair span {} vs single {single}", x.id, y.id, span(&both)));
        }
        lines.push(format!("{}+{}:{single}", x.id, y.id));
    }
    pass(format!("{} duos, spans {}", duos.len(), lines.join(" ")))
}

#[test]
fn acceptance() {
    let s = Duration::from_secs;
    let results = [
        run(1, "textbook QFT equals the DFT, n = 1..8", Some(s(10)), exact_qft),
        run(2, "addition into the catalyst is the inverse gradient, b = 1..5", Some(s(30)), pgt_identity),
        run(3, "adder equals the classical oracle, b = 2..5", Some(s(60)), adder_oracle),
        run(4, "adder T-count and T-depth", None, adder_costs),
        run(5, "unpruned pipeline is exact, n = 3..6", None, unpruned_exactness),
        run(6, "error bound chain", Some(s(300)), bound_certification),
        run(7, "no Toffoli, step-6 T delta, n = 3..12", None, no_toffoli_and_delta),
        run(8, "adder inventory law", None, inventory_law),
        run(9, "leading-order cost ratios", Some(s(30)), leading_order),
        run(10, "paired adders share T stages, n = 8, b = 4", None, parallel_pairs),
    ];
    let failed: Vec<usize> = (1..=10).filter(|&i| !results[i - 1]).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
