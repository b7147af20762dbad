use aqft::analysis::{
    artifact_report, census, closed_form_tcount, closed_form_tdepth, error_budget, synthesis_epsilon,
    tagged_count, CostRow,
};
use aqft::pipeline::{build_aqft, expected_inventory, AqftParams};
use aqft::sim::{effective_operator, spectral_distance, MeasurementPolicy};
use aqft::{GateKind, Tag};

fn params(n: usize, b: usize) -> AqftParams {
    let p = AqftParams::new(n, n as f64 / (1u64 << b) as f64).unwrap();
    assert_eq!(p.b, b);
    p
}

fn grid() -> impl Iterator<Item = (usize, usize)> {
    (4..=6usize).flat_map(|b| (8..=24usize).filter(move |&n| n < 1 << b).map(move |n| (n, b)))
}

#[test]
fn census_tracks_closed_form() {
    for (n, b) in grid() {
        let a = build_aqft(&params(n, b)).unwrap();
        let r = artifact_report(&a);
        let cf = r.closed_form.as_ref().unwrap();
        // the adder addend is exact
        let adder_t: usize = r.inventory.iter().map(|(w, c)| 4 * (w - 1) * c).sum();
        assert_eq!(adder_t as f64, cf.t_count.adders(), "n={n} b={b}");
        let dt = r.t_count - cf.t_count.deterministic();
        assert!(dt.abs() <= cf.t_count.slack, "n={n} b={b} Δ={dt}");
        let dd = r.t_depth - cf.t_depth.deterministic();
        assert!(dd.abs() <= cf.t_depth.slack, "n={n} b={b} Δ={dd}");
    }
}

#[test]
fn inventory_law() {
    for b in [4, 5] {
        for n in 8..=16usize {
            let eps = n as f64 / (1u64 << b) as f64;
            let p = if eps < 1.0 {
                params(n, b)
            } else {
                AqftParams::new(n, 0.5).unwrap().with_precision_bits(b).unwrap()
            };
            let a = build_aqft(&p).unwrap();
            assert_eq!(a.inventory(), expected_inventory(n, b), "n={n} b={b}");
        }
    }
}

#[test]
fn tagged_t_gates_are_about_half_n() {
    for n in 8..=16usize {
        let a = build_aqft(&params(n, 5)).unwrap();
        let c = &a.circuit;
        let nullifiers = tagged_count(c, &Tag::Nullifier, GateKind::is_t_like);
        let loose = tagged_count(c, &Tag::NonPgtT, GateKind::is_t_like);
        assert!((nullifiers as f64 - n as f64 / 2.0).abs() <= 2.0, "n={n}");
        assert!((loose as f64 - n as f64 / 2.0).abs() <= 2.0, "n={n}");
        assert_eq!(c.count_kind(|k| matches!(k, GateKind::Ccz | GateKind::CRk(_))), 0);
    }
}

#[test]
fn ledger_bounds_pruned_vs_unpruned_distance() {
    for (n, eps) in [(4, 0.25), (5, 5.0 / 16.0)] {
        let p = AqftParams::new(n, eps).unwrap();
        let pruned = build_aqft(&p).unwrap();
        let exact = build_aqft(&p.clone().unpruned()).unwrap();
        let policy = MeasurementPolicy::SeededRandom(4);
        let u = effective_operator(&pruned.circuit, "data", &pruned.ancilla_specs(), &policy).unwrap();
        let v = effective_operator(&exact.circuit, "data", &exact.ancilla_specs(), &policy).unwrap();
        let d = spectral_distance(&u.matrix, &v.matrix, true).unwrap();
        assert!(d <= pruned.ledger.bound() + 1e-9, "n={n} d={d}");
        assert!(pruned.ledger.bound() <= pruned.ledger.angle_sum());
    }
}

#[test]
fn error_budget_at_n4_b4() {
    let a = build_aqft(&params(4, 4)).unwrap();
    let e = error_budget(&a, true, &MeasurementPolicy::SeededRandom(1)).unwrap();
    let exact = e.exact_error.unwrap();
    assert!(exact <= e.ledger_bound + 1e-9);
    assert!(e.ledger_bound <= e.pruning_bound);
    assert!(e.dominance_holds(0.25));
    assert!(exact < 0.25 * (std::f64::consts::PI + 1.0));
}

#[test]
fn forced_outcomes_give_the_same_operator() {
    let a = build_aqft(&params(4, 4)).unwrap();
    let count = a.circuit.count_kind(GateKind::is_measurement);
    let run = |p| effective_operator(&a.circuit, "data", &a.ancilla_specs(), &p).unwrap().matrix;
    let zero = run(MeasurementPolicy::forced_all(0, count));
    let one = run(MeasurementPolicy::forced_all(1, count));
    assert!(spectral_distance(&zero, &one, false).unwrap() <= 1e-9);
}

#[test]
fn cost_row_without_simulation() {
    let p = AqftParams::figure_compat(5, 0.625).unwrap();
    let a = build_aqft(&p).unwrap();
    let r = artifact_report(&a);
    let e = error_budget(&a, false, &MeasurementPolicy::SeededRandom(0)).unwrap();
    let row = CostRow::new(&r, &p, &e);
    assert_eq!(row.cf_tcount_adders_large + row.cf_tcount_adders_small, 68.0);
    assert_eq!(row.inventory, "4x5 3x1");
    assert!(row.exact_error.is_none());
    assert!((row.baseline_tcount_ratio - 2.0).abs() < 1e-12);
    assert_eq!(closed_form_tcount(5, 0.625, 3).adders(), 68.0);
    assert_eq!(closed_form_tdepth(5, 0.625, 3).adders(), 17.0);
    let plain = census(&a.circuit, synthesis_epsilon(p.epsilon, p.b));
    assert_eq!(plain.t_count_exact, r.t_count_exact);
}
