//! ASAP layering and T-depth.

use crate::circuit::{Circuit, GateKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayeredDag {
    pub layers: Vec<Vec<usize>>,
    pub layer_of: Vec<usize>,
}

impl LayeredDag {
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Gate indices in layer order.
    pub fn topological_order(&self) -> impl Iterator<Item = usize> + '_ {
        self.layers.iter().flatten().copied()
    }
}

/// Assigns each gate to the earliest layer after every earlier gate that
/// shares a qubit or a classical bit with it.
pub fn layer_dag(c: &Circuit) -> LayeredDag {
    let mut qubit_next = vec![0usize; c.num_qubits];
    let mut bit_next = vec![0usize; c.num_bits];
    let mut layers: Vec<Vec<usize>> = Vec::new();
    let mut layer_of = Vec::with_capacity(c.gates.len());
    for (i, g) in c.gates.iter().enumerate() {
        let l = g
            .qubits
            .iter()
            .map(|&q| qubit_next[q])
            .chain(g.bits().map(|b| bit_next[b]))
            .max()
            .unwrap_or(0);
        for &q in &g.qubits {
            qubit_next[q] = l + 1;
        }
        for b in g.bits() {
            bit_next[b] = l + 1;
        }
        if layers.len() <= l {
            layers.resize_with(l + 1, Vec::new);
        }
        layers[l].push(i);
        layer_of.push(l);
    }
    LayeredDag { layers, layer_of }
}

/// Cost model for `SynthRz` leaves: `1.15·log2(1/synth_eps)` T gates each, in
/// both count and depth.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SynthModel {
    pub synth_eps: f64,
}

impl SynthModel {
    pub const COEFF: f64 = 1.15;

    pub fn new(synth_eps: f64) -> Self {
        assert!(synth_eps > 0.0 && synth_eps < 1.0, "synth_eps must lie in (0, 1)");
        SynthModel { synth_eps }
    }

    pub fn leaf_cost(&self) -> f64 {
        Self::COEFF * (1.0 / self.synth_eps).log2()
    }
}

/// T-depth: the largest number of T/Tdg gates on any dependency path, where
/// dependencies are shared qubits or bits. With a model, a `SynthRz` leaf
/// weighs [`SynthModel::leaf_cost`], so parallel leaves overlap.
///
/// Counting ASAP layers that hold a T is not used because it can drop when a
/// T is inserted (a later T may slide into an existing T layer); the critical
/// path never exceeds that count and never decreases.
pub fn t_depth(c: &Circuit, model: Option<&SynthModel>) -> f64 {
    let mut qubit_done = vec![0.0f64; c.num_qubits];
    let mut bit_done = vec![0.0f64; c.num_bits];
    let mut depth: f64 = 0.0;
    for g in &c.gates {
        let start = g
            .qubits
            .iter()
            .map(|&q| qubit_done[q])
            .chain(g.bits().map(|b| bit_done[b]))
            .fold(0.0, f64::max);
        let end = start + gate_weight(g.kind, model);
        for &q in &g.qubits {
            qubit_done[q] = end;
        }
        for b in g.bits() {
            bit_done[b] = end;
        }
        depth = depth.max(end);
    }
    depth
}

fn gate_weight(kind: GateKind, model: Option<&SynthModel>) -> f64 {
    match kind {
        GateKind::T | GateKind::Tdg => 1.0,
        GateKind::SynthRz(_) => model.map_or(0.0, SynthModel::leaf_cost),
        _ => 0.0,
    }
}

/// Number of ASAP layers of `dag` holding a T/Tdg gate (or, with a model, the
/// leaf cost when a layer holds a `SynthRz` leaf and that is larger).
pub fn asap_t_layer_count(c: &Circuit, dag: &LayeredDag, model: Option<&SynthModel>) -> f64 {
    dag.layers
        .iter()
        .map(|layer| {
            layer
                .iter()
                .map(|&i| gate_weight(c.gates[i].kind, model))
                .fold(0.0, f64::max)
        })
        .sum()
}

/// T stage of every T/Tdg gate: the number of T/Tdg gates on the longest
/// dependency path ending at it. Clifford gates take no time, so two adders
/// whose T gates land on the same stages run fully in parallel.
pub fn t_stages(c: &Circuit) -> Vec<Option<usize>> {
    let mut qubit_done = vec![0usize; c.num_qubits];
    let mut bit_done = vec![0usize; c.num_bits];
    c.gates
        .iter()
        .map(|g| {
            let start = g
                .qubits
                .iter()
                .map(|&q| qubit_done[q])
                .chain(g.bits().map(|b| bit_done[b]))
                .max()
                .unwrap_or(0);
            let t = g.kind.is_t_like();
            let end = start + t as usize;
            for &q in &g.qubits {
                qubit_done[q] = end;
            }
            for b in g.bits() {
                bit_done[b] = end;
            }
            t.then_some(end)
        })
        .collect()
}

/// Layer indices that contain at least one T/Tdg among `gates`.
pub fn t_layers(c: &Circuit, dag: &LayeredDag, gates: impl IntoIterator<Item = usize>) -> Vec<usize> {
    let mut ls: Vec<usize> = gates
        .into_iter()
        .filter(|&i| c.gates[i].kind.is_t_like())
        .map(|i| dag.layer_of[i])
        .collect();
    ls.sort_unstable();
    ls.dedup();
    ls
}
