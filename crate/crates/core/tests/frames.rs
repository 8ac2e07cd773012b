use nalgebra::Complex;
use nebit::decomp::{minimal_negativity, NegativityMode, QuasiStochasticMatrix};
use nebit::frames::{
    circuit_negativity, embed, prob_to_state, state_to_prob, unitary_to_quasi, unitary_to_so3, Circuit, CircuitFile,
    CircuitGate, CMatrix, Gate, QubitState, TetrahedronFrame, C64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const INV_SQRT3: f64 = 0.577_350_269_189_625_8;

fn cx(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Tetrahedron directions, written out independently of the library.
fn directions() -> [[f64; 3]; 4] {
    let s = INV_SQRT3;
    [[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]]
}

/// `(I + n·σ)/4` from explicit Pauli entries.
fn effect(k: usize) -> CMatrix {
    let [x, y, z] = directions()[k];
    CMatrix::from_row_slice(2, 2, &[cx(1.0 + z, 0.0), cx(x, -y), cx(x, y), cx(1.0 - z, 0.0)]) * cx(0.25, 0.0)
}

/// Effect for a multi-qubit index, qubit 0 in the most significant pair of bits.
fn effect_n(index: usize, n: usize) -> CMatrix {
    (0..n).fold(CMatrix::identity(1, 1), |acc, q| acc.kronecker(&effect(index >> (2 * (n - 1 - q)) & 3)))
}

fn probs_oracle(rho: &CMatrix, n: usize) -> Vec<f64> {
    (0..1usize << (2 * n)).map(|a| (rho * effect_n(a, n)).trace().re).collect()
}

fn gaussian(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| cx(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    gaussian(rng, d).qr().q()
}

fn random_state(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    let g = gaussian(rng, d);
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    rho / tr
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn apply(r: &QuasiStochasticMatrix, p: &[f64]) -> Vec<f64> {
    (0..r.dim()).map(|row| (0..r.dim()).map(|col| r.get(row, col) * p[col]).sum()).collect()
}

fn frame() -> TetrahedronFrame {
    TetrahedronFrame::canonical()
}

#[test]
fn single_qubit_probabilities_follow_bloch_vector() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let r: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-0.577..0.577));
        let p = state_to_prob(&QubitState::from_bloch(r).unwrap(), &frame());
        for (k, n) in directions().iter().enumerate() {
            let expected = (1.0 + r[0] * n[0] + r[1] * n[1] + r[2] * n[2]) / 4.0;
            assert!((p[k] - expected).abs() < 1e-14);
        }
    }
}

#[test]
fn evolution_contract_for_random_unitaries() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in 1..=2usize {
        let d = 1usize << n;
        for _ in 0..100 {
            let rho = random_state(&mut rng, d);
            let u = random_unitary(&mut rng, d);
            let r = unitary_to_quasi(&u, &frame()).unwrap().r;
            let p = state_to_prob(&QubitState::new(rho.clone()).unwrap(), &frame());
            assert!(p.iter().zip(probs_oracle(&rho, n)).all(|(a, b)| (a - b).abs() < 1e-12));
            let evolved = probs_oracle(&(&u * &rho * u.adjoint()), n);
            let predicted = apply(&r, &p);
            let err = evolved.iter().zip(&predicted).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-10, "n = {n}: {err}");
        }
    }
}

#[test]
fn evolution_contract_for_entangling_gates() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for gate in [Gate::Cnot, Gate::Cz] {
        for targets in [[0usize, 1], [1, 0]] {
            let u = embed(&gate.unitary().unwrap(), &targets, 2);
            let r = unitary_to_quasi(&u, &frame()).unwrap().r;
            for _ in 0..100 {
                let rho = random_state(&mut rng, 4);
                let evolved = probs_oracle(&(&u * &rho * u.adjoint()), 2);
                let predicted = apply(&r, &probs_oracle(&rho, 2));
                assert!(evolved.iter().zip(&predicted).all(|(a, b)| (a - b).abs() < 1e-10));
            }
        }
    }
}

#[test]
fn cnot_embedding_follows_register_order() {
    // control on qubit 1, target qubit 0: |01⟩ ↔ |11⟩
    let u = embed(&Gate::Cnot.unitary().unwrap(), &[1, 0], 2);
    let image = [0usize, 3, 2, 1];
    for (col, &row) in image.iter().enumerate() {
        for r in 0..4 {
            let expected = if r == row { 1.0 } else { 0.0 };
            assert_eq!(u[(r, col)], cx(expected, 0.0));
        }
    }
}

#[test]
fn frame_matrices_compose_and_are_bistochastic() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for d in [2usize, 4] {
        for _ in 0..20 {
            let (u, v) = (random_unitary(&mut rng, d), random_unitary(&mut rng, d));
            let ru = unitary_to_quasi(&u, &frame()).unwrap().r;
            let rv = unitary_to_quasi(&v, &frame()).unwrap().r;
            let ruv = unitary_to_quasi(&(&u * &v), &frame()).unwrap().r;
            assert!(ruv.max_abs_diff(&ru.matmul(&rv).unwrap()) < 1e-10);
            assert!(ru.is_bistochastic(1e-10));
        }
    }
}

#[test]
fn identity_and_paulis_are_permutations() {
    for gate in [Gate::I, Gate::X, Gate::Y, Gate::Z] {
        let m = unitary_to_quasi(&gate.unitary().unwrap(), &frame()).unwrap();
        assert!(m.r.is_nonnegative(0.0), "{}", gate.name());
        assert!(m.r.entries().iter().all(|&x| x == 0.0 || x == 1.0), "{}", gate.name());
    }
    let id = unitary_to_quasi(&CMatrix::identity(2, 2), &frame()).unwrap();
    assert_eq!(id.r, QuasiStochasticMatrix::identity(4));
}

#[test]
fn rotation_matches_axis_formula() {
    // a rotation by θ about n takes v to v cos θ + (n × v) sin θ + n (n·v)(1 − cos θ)
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let raw: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        let n = raw.map(|x| x / norm);
        let theta = rng.gen_range(-3.0..3.0);
        let o = unitary_to_so3(&Gate::Rotation { axis: raw, angle: theta }.unitary().unwrap()).unwrap();
        for j in 0..3 {
            let mut v = [0.0; 3];
            v[j] = 1.0;
            let cross = [n[1] * v[2] - n[2] * v[1], n[2] * v[0] - n[0] * v[2], n[0] * v[1] - n[1] * v[0]];
            for i in 0..3 {
                let expected = v[i] * theta.cos() + cross[i] * theta.sin() + n[i] * n[j] * (1.0 - theta.cos());
                assert!((o[(i, j)] - expected).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn reconstruction_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for n in 1..=3usize {
        let d = 1usize << n;
        let psi: Vec<C64> = (0..d).map(|_| cx(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let psi: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        let state = QubitState::pure(&psi).unwrap();
        let p = state_to_prob(&state, &frame());
        assert!(p.iter().all(|&x| x >= 0.0));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let rec = prob_to_state(&p, &frame()).unwrap();
        assert!(rec.is_state);
        assert!(max_abs(&(&rec.matrix - state.matrix())) < 1e-12);
    }
}

#[test]
fn frame_vectors_outside_quantum_set_are_flagged() {
    // all weight on one frame element reconstructs to (I + 3n·σ)/2, eigenvalues 2 and −1
    let rec = prob_to_state(&[1.0, 0.0, 0.0, 0.0], &frame()).unwrap();
    assert!(!rec.is_state);
    assert!((rec.min_eigenvalue + 1.0).abs() < 1e-12);
    assert!(rec.into_state().is_err());
    assert!(prob_to_state(&[0.5, 0.5, 0.5], &frame()).is_err());
    assert!(prob_to_state(&[0.5, 0.5, 0.5, 0.5], &frame()).is_err());
}

#[test]
fn non_unitary_input_rejected() {
    let m = CMatrix::from_row_slice(2, 2, &[cx(1.0, 0.0), cx(0.1, 0.0), cx(0.0, 0.0), cx(1.0, 0.0)]);
    assert!(unitary_to_quasi(&m, &frame()).is_err());
    assert!(Gate::Custom(m).unitary().is_err());
}

#[test]
fn hadamard_cost_matches_standalone_decomposition() {
    let circuit = Circuit::new(
        2,
        vec![
            CircuitGate { gate: Gate::H, targets: vec![0] },
            CircuitGate { gate: Gate::Cnot, targets: vec![0, 1] },
        ],
    )
    .unwrap();
    let report = circuit_negativity(&circuit, &frame(), NegativityMode::Exact, 6).unwrap();
    let h = unitary_to_quasi(&Gate::H.unitary().unwrap(), &frame()).unwrap();
    let exact = minimal_negativity(&h.r, NegativityMode::Exact).unwrap();
    assert!(report.gates[0].delta > 0.0);
    assert!((report.gates[0].delta - exact.delta).abs() < 1e-12);
    // the 16×16 CNOT matrix is above the cap, so it falls back
    assert_eq!(report.gates[1].mode, NegativityMode::Heuristic);
    assert!((report.total - report.gates.iter().map(|g| g.delta).sum::<f64>()).abs() < 1e-15);
    assert!(report.total_lower_bound <= report.total + 1e-12);
}

#[test]
fn circuit_file_errors_name_the_field() {
    let parse = |text: &str| Circuit::from_file(serde_json::from_str::<CircuitFile>(text).unwrap());
    let err = parse(r#"{"n_qubits":1,"gates":[{"name":"H","targets":[0]},{"name":"rx","targets":[0]}]}"#)
        .unwrap_err()
        .to_string();
    assert!(err.contains("gates[1].angle"), "{err}");
    let err = parse(r#"{"n_qubits":2,"gates":[{"name":"cx","targets":[0]}]}"#).unwrap_err().to_string();
    assert!(err.contains("gates[0]: targets"), "{err}");
    let err = parse(r#"{"n_qubits":1,"gates":[{"name":"foo","targets":[0]}]}"#).unwrap_err().to_string();
    assert!(err.contains("gates[0].name"), "{err}");
    let ok = parse(
        r#"{"n_qubits":1,"gates":[{"name":"custom","targets":[0],"matrix":[[0,0],[1,0],[1,0],[0,0]]}]}"#,
    )
    .unwrap();
    assert!(max_abs(&(ok.unitary().unwrap() - Gate::X.unitary().unwrap())) < 1e-15);
}
