//! Operator extraction and the spectral-norm distance between unitaries.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::engine::{simulate_with, MeasurementPolicy, SimConfig};
use super::state::StateVector;
use crate::circuit::Circuit;
use crate::error::{Error, Result};

pub type OperatorMatrix = DMatrix<C64>;

/// Tolerance on `‖U†U − I‖_max` accepted by [`spectral_distance`].
pub const UNITARITY_TOL: f64 = 1e-8;
/// Columns whose ancilla projection falls below `1 − RESTORATION_TOL` are rejected.
pub const RESTORATION_TOL: f64 = 1e-9;

/// Largest ancilla register that is projected out amplitude by amplitude.
const PROJECT_CAP: usize = 20;

/// Input state of a non-data register, and the state it must be left in
/// (the input itself unless given).
#[derive(Clone, Debug)]
pub struct AncillaSpec {
    pub input: StateVector,
    pub output: Option<StateVector>,
}

impl AncillaSpec {
    pub fn zero(width: usize) -> Self {
        AncillaSpec {
            input: StateVector::zero(width),
            output: None,
        }
    }

    pub fn restored(input: StateVector) -> Self {
        AncillaSpec { input, output: None }
    }

    pub fn target(&self) -> &StateVector {
        self.output.as_ref().unwrap_or(&self.input)
    }
}

#[derive(Clone, Debug)]
pub struct EffectiveOperator {
    pub matrix: OperatorMatrix,
    /// Squared norm of each projected column.
    pub fidelities: Vec<f64>,
}

impl EffectiveOperator {
    pub fn min_fidelity(&self) -> f64 {
        self.fidelities.iter().copied().fold(1.0, f64::min)
    }
}

/// Column `j` is the output of `c` on `|j⟩`.
pub fn unitary_of(c: &Circuit) -> Result<OperatorMatrix> {
    unitary_of_with(c, &SimConfig::default())
}

pub fn unitary_of_with(c: &Circuit, cfg: &SimConfig) -> Result<OperatorMatrix> {
    if !c.is_coherent() {
        return Err(Error::NotCoherent);
    }
    if c.num_qubits > cfg.matrix_cap {
        return Err(Error::WidthCap {
            width: c.num_qubits,
            cap: cfg.matrix_cap,
        });
    }
    let dim = 1usize << c.num_qubits;
    let mut m = OperatorMatrix::zeros(dim, dim);
    let policy = MeasurementPolicy::Forced(Vec::new());
    for j in 0..dim {
        let (out, _) = simulate_with(c, &StateVector::basis(c.num_qubits, j as u64), &policy, cfg)?;
        for (i, a) in out.to_dense()?.into_iter().enumerate() {
            m[(i, j)] = a;
        }
    }
    Ok(m)
}

/// The operator `c` induces on register `data` once every other register is
/// prepared per `ancillas` and projected onto its target state.
pub fn effective_operator(
    c: &Circuit,
    data: &str,
    ancillas: &BTreeMap<String, AncillaSpec>,
    policy: &MeasurementPolicy,
) -> Result<EffectiveOperator> {
    effective_operator_with(c, data, ancillas, policy, &SimConfig::default())
}

pub fn effective_operator_with(
    c: &Circuit,
    data: &str,
    ancillas: &BTreeMap<String, AncillaSpec>,
    policy: &MeasurementPolicy,
    cfg: &SimConfig,
) -> Result<EffectiveOperator> {
    c.validate()?;
    let data_reg = c.register(data)?;
    let width = data_reg.qubits.len();
    if width > cfg.matrix_cap {
        return Err(Error::WidthCap {
            width,
            cap: cfg.matrix_cap,
        });
    }
    let mut others = Vec::new();
    for r in &c.registers {
        if r.name == data {
            continue;
        }
        let spec = ancillas
            .get(&r.name)
            .ok_or_else(|| Error::InvalidParams(format!("no input state for register `{}`", r.name)))?;
        for s in [&spec.input, spec.target()] {
            if s.num_qubits() != r.qubits.len() {
                return Err(Error::DimensionMismatch(s.num_qubits(), r.qubits.len()));
            }
        }
        others.push((r.qubits.as_slice(), spec));
    }
    let dim = 1usize << width;
    let mut matrix = OperatorMatrix::zeros(dim, dim);
    let mut fidelities = Vec::with_capacity(dim);
    for j in 0..dim {
        let basis = StateVector::basis(width, j as u64);
        let mut parts: Vec<(&[usize], &StateVector)> = vec![(data_reg.qubits.as_slice(), &basis)];
        parts.extend(others.iter().map(|(q, s)| (*q, &s.input)));
        let input = StateVector::tensor(c.num_qubits, &parts)?;
        let (out, _) = simulate_with(c, &input, policy, cfg)?;
        let col = project(out, &data_reg.qubits, &others)?;
        let fid: f64 = col.iter().map(|a| a.norm_sqr()).sum();
        if fid < 1.0 - RESTORATION_TOL {
            return Err(Error::RestorationFailure {
                column: j,
                fidelity: fid,
            });
        }
        for (i, a) in col.into_iter().enumerate() {
            matrix[(i, j)] = a;
        }
        fidelities.push(fid);
    }
    Ok(EffectiveOperator { matrix, fidelities })
}

fn extract(idx: u64, qubits: &[usize]) -> usize {
    qubits
        .iter()
        .enumerate()
        .fold(0, |l, (i, &q)| l | ((idx >> q & 1) as usize) << i)
}

/// `(⟨targets| ⊗ I_data) |out⟩` as a dense vector over the data register.
fn project(mut out: StateVector, data: &[usize], others: &[(&[usize], &AncillaSpec)]) -> Result<Vec<C64>> {
    // make each ancilla register all-attached or all-detached
    for (qubits, _) in others {
        if qubits.iter().any(|&q| out.is_attached(q)) {
            for &q in qubits.iter() {
                if !out.is_attached(q) {
                    out.attach(q);
                }
            }
        }
    }
    let mut scalar = C64::new(1.0, 0.0);
    let mut attached_regs: Vec<(&[usize], Vec<C64>)> = Vec::new();
    for (qubits, spec) in others {
        let target = spec.target();
        if qubits.is_empty() {
            continue;
        }
        if out.is_attached(qubits[0]) {
            if qubits.len() > PROJECT_CAP {
                return Err(Error::WidthCap {
                    width: qubits.len(),
                    cap: PROJECT_CAP,
                });
            }
            let conj: Vec<C64> = target.to_dense()?.into_iter().map(|a| a.conj()).collect();
            attached_regs.push((qubits, conj));
        } else {
            let here: Vec<[C64; 2]> = qubits.iter().map(|&q| out.local[q]).collect();
            scalar *= target.inner(&StateVector::product(&here))?;
        }
    }
    let mut col = vec![C64::new(0.0, 0.0); 1usize << data.len()];
    for &(idx, a) in &out.entries {
        let mut amp = a;
        for (qubits, conj) in &attached_regs {
            amp *= conj[extract(idx, qubits)];
        }
        col[extract(idx, data)] += amp;
    }
    for (p, &q) in data.iter().enumerate() {
        if out.is_attached(q) {
            continue;
        }
        let [v0, v1] = out.local[q];
        let bit = 1usize << p;
        for i in 0..col.len() {
            if i & bit == 0 {
                let a = col[i];
                col[i] = a * v0;
                col[i | bit] = a * v1;
            }
        }
    }
    col.iter_mut().for_each(|a| *a *= scalar);
    Ok(col)
}

/// `max |(U†U − I)_ij|`.
pub fn unitarity_deviation(u: &OperatorMatrix) -> f64 {
    let p = u.adjoint() * u;
    let mut worst: f64 = 0.0;
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((p[(i, j)] - C64::new(want, 0.0)).norm());
        }
    }
    worst
}

/// Largest singular value of `U − V`, or of `U − e^{iφ}V` minimized over φ
/// when `up_to_global_phase` is set.
pub fn spectral_distance(u: &OperatorMatrix, v: &OperatorMatrix, up_to_global_phase: bool) -> Result<f64> {
    if u.shape() != v.shape() || u.nrows() != u.ncols() {
        return Err(Error::DimensionMismatch(u.nrows(), v.nrows()));
    }
    for m in [u, v] {
        let dev = unitarity_deviation(m);
        if dev > UNITARITY_TOL {
            return Err(Error::NonUnitary(dev));
        }
    }
    // U − V = U(I − U†V) and U†V is normal, so the singular values of U − V
    // are |1 − λ| over the eigenvalues λ of U†V.
    let w = u.adjoint() * v;
    // near-identity products with tight eigenvalue clusters can stall at the
    // strictest threshold; each step looser still leaves errors far below 1e-9
    let t = [1e-14, 1e-13, 1e-12, 1e-11]
        .into_iter()
        .find_map(|tol| nalgebra::Schur::try_new(w.clone(), tol, 100_000))
        .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?
        .unpack()
        .1;
    let eig: Vec<C64> = (0..t.nrows()).map(|i| t[(i, i)]).collect();
    if !up_to_global_phase {
        return Ok(eig.iter().map(|l| (C64::new(1.0, 0.0) - l).norm()).fold(0.0, f64::max));
    }
    // the best common phase centers the shortest arc holding all eigenvalues
    let mut angles: Vec<f64> = eig.iter().map(|l| l.arg()).collect();
    angles.sort_by(f64::total_cmp);
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut largest_gap = angles[0] + two_pi - angles[angles.len() - 1];
    for w in angles.windows(2) {
        largest_gap = largest_gap.max(w[1] - w[0]);
    }
    let arc = (two_pi - largest_gap).max(0.0);
    Ok(2.0 * (arc / 4.0).sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::DyadicAngle;
    use crate::circuit::GateKind;
    use proptest::prelude::*;

    fn diag(entries: &[C64]) -> OperatorMatrix {
        OperatorMatrix::from_diagonal(&nalgebra::DVector::from_vec(entries.to_vec()))
    }

    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }

    #[test]
    fn distance_examples() {
        let i2 = OperatorMatrix::identity(2, 2);
        assert!(spectral_distance(&i2, &i2, false).unwrap() < 1e-15);
        let t = diag(&[one(), C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)]);
        let d = spectral_distance(&i2, &t, false).unwrap();
        assert!((d - 2.0 * (std::f64::consts::PI / 8.0).sin()).abs() < 1e-12);
        assert!((d - 0.76537).abs() < 1e-4);
        let r = diag(&[one(), C64::from_polar(1.0, std::f64::consts::PI / 8.0)]);
        let d = spectral_distance(&i2, &r, true).unwrap();
        assert!(d < std::f64::consts::PI / 8.0);
        // a pure global phase is invisible with phase freedom
        let g = i2.map(|x| x * C64::from_polar(1.0, 0.3));
        assert!(spectral_distance(&i2, &g, true).unwrap() < 1e-12);
        assert!(spectral_distance(&i2, &g, false).unwrap() > 0.29);
    }

    #[test]
    fn rejects_non_unitary() {
        let i2 = OperatorMatrix::identity(2, 2);
        let bad = i2.map(|x| x * 2.0);
        assert!(matches!(spectral_distance(&i2, &bad, true), Err(Error::NonUnitary(_))));
    }

    #[test]
    fn unitary_of_small_circuits() {
        let mut c = Circuit::new(1);
        c.add(GateKind::H, &[0]);
        let u = unitary_of(&c).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((u[(1, 1)].re + s).abs() < 1e-12);
        assert!((u[(0, 1)].re - s).abs() < 1e-12);
        let u = unitary_of(&Circuit::new(2)).unwrap();
        assert_eq!(u, OperatorMatrix::identity(4, 4));
        let mut m = Circuit::new(1);
        m.num_bits = 1;
        m.add(GateKind::MeasureZ(0), &[0]);
        assert!(matches!(unitary_of(&m), Err(Error::NotCoherent)));
    }

    #[test]
    fn idle_ancilla_matches_unitary_of() {
        use crate::circuit::Role;
        let mut c = Circuit::empty();
        let d = c.add_register("data", Role::Data, 2);
        let a = c.add_register("anc", Role::ZeroAncilla, 1);
        c.add(GateKind::H, &[d[0]]);
        c.add(GateKind::Cnot, &[d[0], d[1]]);
        c.add(GateKind::Cnot, &[d[1], a[0]]);
        c.add(GateKind::Cnot, &[d[1], a[0]]);
        c.add(GateKind::Rz(DyadicAngle::new(1, 3)), &[d[1]]);
        let mut anc = BTreeMap::new();
        anc.insert("anc".to_string(), AncillaSpec::zero(1));
        let eff = effective_operator(&c, "data", &anc, &MeasurementPolicy::SeededRandom(0)).unwrap();
        let mut plain = Circuit::new(2);
        plain.gates = c.gates[..2].to_vec();
        plain.add(GateKind::Rz(DyadicAngle::new(1, 3)), &[1]);
        let u = unitary_of(&plain).unwrap();
        assert!(spectral_distance(&u, &eff.matrix, false).unwrap() < 1e-12);
        assert!((eff.min_fidelity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unrestored_ancilla_is_reported() {
        use crate::circuit::Role;
        let mut c = Circuit::empty();
        let d = c.add_register("data", Role::Data, 1);
        let a = c.add_register("anc", Role::ZeroAncilla, 1);
        c.add(GateKind::Cnot, &[d[0], a[0]]);
        let mut anc = BTreeMap::new();
        anc.insert("anc".to_string(), AncillaSpec::zero(1));
        let err = effective_operator(&c, "data", &anc, &MeasurementPolicy::SeededRandom(0)).unwrap_err();
        assert!(matches!(err, Error::RestorationFailure { column: 1, .. }));
    }

    /// Independent check: largest singular value of U − e^{iφ}V, minimized by a
    /// φ grid followed by ternary refinement around the best grid point.
    fn svd_oracle(u: &OperatorMatrix, v: &OperatorMatrix) -> f64 {
        let f = |phi: f64| (u - v.map(|x| x * C64::from_polar(1.0, phi))).singular_values().max();
        let steps = 4000;
        let h = 2.0 * std::f64::consts::PI / steps as f64;
        let best = (0..steps).map(|s| s as f64 * h).min_by(|a, b| f(*a).total_cmp(&f(*b))).unwrap();
        let (mut lo, mut hi) = (best - 2.0 * h, best + 2.0 * h);
        for _ in 0..200 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if f(m1) < f(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        f((lo + hi) / 2.0)
    }

    fn random_unitary(seed: u64, dim: usize) -> OperatorMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m = OperatorMatrix::from_fn(dim, dim, |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        m.qr().q()
    }

    #[test]
    fn phase_minimized_distance_matches_svd_oracle() {
        for seed in 0..4 {
            let u = random_unitary(seed, 4);
            let v = random_unitary(seed + 100, 4);
            let d = spectral_distance(&u, &v, true).unwrap();
            assert!((d - svd_oracle(&u, &v)).abs() < 1e-8, "seed {seed}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn distance_is_a_metric_up_to_phase(a in 0u64..1000, b in 0u64..1000, c in 0u64..1000) {
            let (u, v, w) = (random_unitary(a, 4), random_unitary(b + 2000, 4), random_unitary(c + 4000, 4));
            let uv = spectral_distance(&u, &v, true).unwrap();
            let vu = spectral_distance(&v, &u, true).unwrap();
            let vw = spectral_distance(&v, &w, true).unwrap();
            let uw = spectral_distance(&u, &w, true).unwrap();
            prop_assert!((uv - vu).abs() < 1e-9);
            prop_assert!(uw <= uv + vw + 1e-9);
            prop_assert!(spectral_distance(&u, &u, true).unwrap() < 1e-9);
            prop_assert!(uv > 1e-6);
        }
    }
}
