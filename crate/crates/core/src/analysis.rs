//! Clifford+T cost census of built circuits, the closed-form cost model, the
//! baseline leading-order figures and the approximation error budget.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, GateKind, Role, Tag};
use crate::dag::{t_depth, SynthModel};
use crate::error::{Error, Result};
use crate::pipeline::AqftArtifact;
use crate::qft::dft_matrix;
use crate::sim::{effective_operator_with, spectral_distance, MeasurementPolicy, SimConfig};

/// Per-gate synthesis error `ε/(2b)`.
pub fn synthesis_epsilon(epsilon: f64, b: usize) -> f64 {
    epsilon / (2.0 * b as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub kinds: BTreeMap<String, usize>,
    pub tags: BTreeMap<String, usize>,
    /// T and T† gates.
    pub t_count_exact: usize,
    pub synth_leaves: usize,
    /// `t_count_exact` plus the model price of every synthesis leaf.
    pub t_count: f64,
    /// Critical-path T-depth without synthesis leaves.
    pub t_depth_exact: f64,
    pub t_depth: f64,
    pub inventory: BTreeMap<usize, usize>,
    pub ancilla_widths: BTreeMap<String, usize>,
    pub closed_form: Option<ClosedForm>,
    pub baseline: Option<Baseline>,
}

/// Counts taken from the circuit alone. `synth_eps` prices synthesis leaves.
pub fn census(c: &Circuit, synth_eps: f64) -> CostReport {
    let model = SynthModel::new(synth_eps);
    let mut kinds = BTreeMap::new();
    let mut tags = BTreeMap::new();
    let mut inventory: BTreeMap<usize, usize> = BTreeMap::new();
    let mut seen_adders = std::collections::BTreeSet::new();
    for g in &c.gates {
        *kinds.entry(g.kind.name().to_string()).or_insert(0) += 1;
        if let Some(tag) = &g.tag {
            *tags.entry(tag.family()).or_insert(0) += 1;
            if let Tag::Adder { id, width } = *tag {
                if seen_adders.insert(id) {
                    *inventory.entry(width).or_insert(0) += 1;
                }
            }
        }
    }
    let t_count_exact = c.t_count();
    let synth_leaves = c.count_kind(|k| matches!(k, GateKind::SynthRz(_)));
    CostReport {
        kinds,
        tags,
        t_count_exact,
        synth_leaves,
        t_count: t_count_exact as f64 + synth_leaves as f64 * model.leaf_cost(),
        t_depth_exact: t_depth(c, None),
        t_depth: t_depth(c, Some(&model)),
        inventory,
        ancilla_widths: c
            .registers
            .iter()
            .filter(|r| r.role != Role::Data)
            .map(|r| (r.name.clone(), r.qubits.len()))
            .collect(),
        closed_form: None,
        baseline: None,
    }
}

/// Number of gates carrying `tag` whose kind satisfies `pred`.
pub fn tagged_count(c: &Circuit, tag: &Tag, pred: impl Fn(GateKind) -> bool) -> usize {
    c.gates
        .iter()
        .filter(|g| g.tag.as_ref() == Some(tag) && pred(g.kind))
        .count()
}

/// Census of an artifact with the closed form and baseline attached.
pub fn artifact_report(a: &AqftArtifact) -> CostReport {
    let p = &a.params;
    let mut r = census(&a.circuit, synthesis_epsilon(p.epsilon, p.b));
    r.closed_form = Some(ClosedForm {
        t_count: closed_form_tcount(p.n, p.epsilon, p.b),
        t_depth: closed_form_tdepth(p.n, p.epsilon, p.b),
    });
    r.baseline = Some(baseline(p.n, p.epsilon));
    r
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub t_count: TCountBreakdown,
    pub t_depth: TDepthBreakdown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TCountBreakdown {
    /// `4b(n−b+3)`: the `(b+1)`-qubit adders.
    pub adders_large: f64,
    /// `2(b+1)(b−2)`: one adder of each width `3..=b`.
    pub adders_small: f64,
    /// `2.3(b−2)·log2(2b/ε)`: synthesis of the catalyst preparations.
    pub psi_synthesis: f64,
    /// `n`: nullifier and stand-alone T gates.
    pub remainder: f64,
    /// Unspecified lower-order part, `±3b`.
    pub slack: f64,
    /// `4n·log2(n/ε)`.
    pub leading: f64,
}

impl TCountBreakdown {
    pub fn adders(&self) -> f64 {
        self.adders_large + self.adders_small
    }

    pub fn deterministic(&self) -> f64 {
        self.adders() + self.psi_synthesis + self.remainder
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TDepthBreakdown {
    /// `b(n−b+1)`: paired `(b+1)`-qubit adders.
    pub adders_large: f64,
    /// `2b`.
    pub adders_edge: f64,
    /// `(b+1)(b−2)/2`: paired smaller adders.
    pub adders_small: f64,
    /// `1.15·log2(2b/ε)`: all preparation leaves in parallel.
    pub psi_synthesis: f64,
    pub remainder: f64,
    pub slack: f64,
    /// `n·log2(n/ε)`.
    pub leading: f64,
}

impl TDepthBreakdown {
    pub fn adders(&self) -> f64 {
        self.adders_large + self.adders_edge + self.adders_small
    }

    pub fn deterministic(&self) -> f64 {
        self.adders() + self.psi_synthesis + self.remainder
    }
}

pub fn closed_form_tcount(n: usize, epsilon: f64, b: usize) -> TCountBreakdown {
    let (n, b) = (n as f64, b as f64);
    TCountBreakdown {
        adders_large: 4.0 * b * (n - b + 3.0),
        adders_small: 2.0 * (b + 1.0) * (b - 2.0),
        psi_synthesis: 2.3 * (b - 2.0) * (2.0 * b / epsilon).log2(),
        remainder: n,
        slack: 3.0 * b,
        leading: 4.0 * n * (n / epsilon).log2(),
    }
}

/// The slack is `2b + 2`: the unspecified constant is taken as the depth of
/// one `(b+1)`-qubit adder, plus the stated 2.
pub fn closed_form_tdepth(n: usize, epsilon: f64, b: usize) -> TDepthBreakdown {
    let (n, b) = (n as f64, b as f64);
    TDepthBreakdown {
        adders_large: b * (n - b + 1.0),
        adders_edge: 2.0 * b,
        adders_small: (b + 1.0) * (b - 2.0) / 2.0,
        psi_synthesis: SynthModel::COEFF * (2.0 * b / epsilon).log2(),
        remainder: n,
        slack: 2.0 * b + 2.0,
        leading: n * (n / epsilon).log2(),
    }
}

/// Leading-order figures of the earlier smallest-known approximate QFT.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub t_count: f64,
    pub t_depth: f64,
}

pub fn baseline(n: usize, epsilon: f64) -> Baseline {
    let l = n as f64 * (n as f64 / epsilon).log2();
    Baseline {
        t_count: 8.0 * l,
        t_depth: 2.0 * l,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    /// `π(n−b+3)/2^b`.
    pub pruning_bound: f64,
    /// `Σ |1 − e^{iθ}|` over the removed rotations.
    pub ledger_bound: f64,
    /// `Σ |θ|` over the removed rotations.
    pub ledger_angle_sum: f64,
    /// `ε(b−2)/b`; the simulator applies leaves exactly, so this never shows
    /// up in `exact_error`.
    pub synthesis_bound: f64,
    pub total_bound: f64,
    pub exact_error: Option<f64>,
}

impl ErrorBudget {
    /// `exact ≤ ledger ≤ pruning` and `total ≤ ε(π+1)`.
    pub fn dominance_holds(&self, epsilon: f64) -> bool {
        let exact_ok = self.exact_error.map_or(true, |e| e <= self.ledger_bound + 1e-9);
        exact_ok
            && self.ledger_bound <= self.pruning_bound
            && self.total_bound <= epsilon * (std::f64::consts::PI + 1.0)
    }
}

pub fn pruning_bound(n: usize, b: usize) -> f64 {
    std::f64::consts::PI * (n as f64 - b as f64 + 3.0) / 2f64.powi(b as i32)
}

/// Error budget of an artifact; with `simulate` set, also the phase-minimised
/// spectral distance between its effective operator and the DFT matrix.
pub fn error_budget(a: &AqftArtifact, simulate: bool, policy: &MeasurementPolicy) -> Result<ErrorBudget> {
    error_budget_with(a, simulate, policy, &SimConfig::default())
}

pub fn error_budget_with(
    a: &AqftArtifact,
    simulate: bool,
    policy: &MeasurementPolicy,
    cfg: &SimConfig,
) -> Result<ErrorBudget> {
    let p = &a.params;
    let pruning = pruning_bound(p.n, p.b);
    let synthesis = p.epsilon * (p.b as f64 - 2.0) / p.b as f64;
    let exact_error = if simulate {
        if !p.include_final_swaps {
            return Err(Error::InvalidParams("exact error needs the output SWAPs".into()));
        }
        let eff = effective_operator_with(&a.circuit, "data", &a.ancilla_specs(), policy, cfg)?;
        Some(spectral_distance(&eff.matrix, &dft_matrix(p.n), true)?)
    } else {
        None
    };
    Ok(ErrorBudget {
        pruning_bound: pruning,
        ledger_bound: a.ledger.bound(),
        ledger_angle_sum: a.ledger.angle_sum(),
        synthesis_bound: synthesis,
        total_bound: pruning + synthesis,
        exact_error,
    })
}

/// One CSV row per `(n, ε)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostRow {
    pub n: usize,
    pub epsilon: f64,
    pub b: usize,
    pub t_count_exact: usize,
    pub synth_leaves: usize,
    pub t_count: f64,
    pub t_depth: f64,
    pub inventory: String,
    pub cf_tcount_adders_large: f64,
    pub cf_tcount_adders_small: f64,
    pub cf_tcount_psi: f64,
    pub cf_tcount_remainder: f64,
    pub cf_tcount: f64,
    pub cf_tdepth_adders: f64,
    pub cf_tdepth_psi: f64,
    pub cf_tdepth_remainder: f64,
    pub cf_tdepth: f64,
    pub leading_tcount: f64,
    pub leading_tdepth: f64,
    pub tcount_leading_ratio: f64,
    pub tdepth_leading_ratio: f64,
    pub baseline_tcount: f64,
    pub baseline_tdepth: f64,
    pub baseline_tcount_ratio: f64,
    pub baseline_tdepth_ratio: f64,
    pub pruning_bound: f64,
    pub ledger_bound: f64,
    pub synthesis_bound: f64,
    pub total_bound: f64,
    pub exact_error: Option<f64>,
}

impl CostRow {
    pub fn new(report: &CostReport, params: &crate::pipeline::AqftParams, budget: &ErrorBudget) -> Self {
        let tc = closed_form_tcount(params.n, params.epsilon, params.b);
        let td = closed_form_tdepth(params.n, params.epsilon, params.b);
        let base = baseline(params.n, params.epsilon);
        let inventory = report
            .inventory
            .iter()
            .rev()
            .map(|(w, c)| format!("{w}x{c}"))
            .collect::<Vec<_>>()
            .join(" ");
        CostRow {
            n: params.n,
            epsilon: params.epsilon,
            b: params.b,
            t_count_exact: report.t_count_exact,
            synth_leaves: report.synth_leaves,
            t_count: report.t_count,
            t_depth: report.t_depth,
            inventory,
            cf_tcount_adders_large: tc.adders_large,
            cf_tcount_adders_small: tc.adders_small,
            cf_tcount_psi: tc.psi_synthesis,
            cf_tcount_remainder: tc.remainder,
            cf_tcount: tc.deterministic(),
            cf_tdepth_adders: td.adders(),
            cf_tdepth_psi: td.psi_synthesis,
            cf_tdepth_remainder: td.remainder,
            cf_tdepth: td.deterministic(),
            leading_tcount: tc.leading,
            leading_tdepth: td.leading,
            tcount_leading_ratio: report.t_count / tc.leading,
            tdepth_leading_ratio: td.deterministic() / td.leading,
            baseline_tcount: base.t_count,
            baseline_tdepth: base.t_depth,
            baseline_tcount_ratio: base.t_count / tc.leading,
            baseline_tdepth_ratio: base.t_depth / td.leading,
            pruning_bound: budget.pruning_bound,
            ledger_bound: budget.ledger_bound,
            synthesis_bound: budget.synthesis_bound,
            total_bound: budget.total_bound,
            exact_error: budget.exact_error,
        }
    }
}
