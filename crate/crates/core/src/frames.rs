//! SIC-POVM frame representation of qubits.
//!
//! A qubit state becomes the probability vector `p(a) = tr(ρ Π_a)` over the
//! four effects `Π_a = (I + n_a·σ)/4` of a tetrahedron frame, and a unitary
//! becomes the quasi-bistochastic matrix `R(α|a) = tr(U Γ_a U† Π_α)` with
//! the dual elements `Γ_a = (I + 3 n_a·σ)/2`, so that
//! `Σ_a R(α|a) p(a)` is the frame vector of `U ρ U†`. Several qubits use
//! tensor-product frames; qubit 0 is the most significant factor both in
//! Hilbert space and in the frame index.

use nalgebra::{Complex, DMatrix, DVector, Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::decomp::{minimal_negativity_capped, NegativityMode, QuasiStochasticMatrix};
use crate::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Largest register handled by the state maps (frame dimension `4^5`).
pub const MAX_QUBITS: usize = 5;

/// Largest gate width (frame dimension `4^3 = 64`).
pub const MAX_GATE_QUBITS: usize = 3;

/// Tolerance of the Hermiticity, trace and unitarity checks.
pub const MATRIX_TOL: f64 = 1e-10;

/// Eigenvalues down to `−PSD_TOL` count as non-negative.
pub const PSD_TOL: f64 = 1e-10;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Pauli matrices `σ_x, σ_y, σ_z`.
pub fn pauli() -> [CMatrix; 3] {
    [
        CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    ]
}

/// `(s I + t n·σ)` as a 2×2 matrix.
fn bloch_operator(s: f64, t: f64, n: &Vector3<f64>) -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[
            c(s + t * n.z),
            C64::new(t * n.x, -t * n.y),
            C64::new(t * n.x, t * n.y),
            c(s - t * n.z),
        ],
    )
}

fn kron_all(factors: &[CMatrix]) -> CMatrix {
    factors
        .iter()
        .fold(CMatrix::identity(1, 1), |acc, f| acc.kronecker(f))
}

/// `Re tr(A B)` without forming the product.
fn trace_product_re(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            total += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    total
}

fn qubit_count(dim: usize, base: usize, what: &str) -> Result<usize> {
    let mut n = 0;
    let mut d = 1;
    while d < dim {
        d *= base;
        n += 1;
    }
    if d != dim || dim == 0 {
        return Err(Error::domain(format!("{what} of dimension {dim} is not a power of {base}")));
    }
    Ok(n)
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Four unit vectors forming a regular tetrahedron.
#[derive(Debug, Clone, PartialEq)]
pub struct TetrahedronFrame {
    vectors: [Vector3<f64>; 4],
    /// `√3 n_k`; exactly `±1` componentwise for the canonical frame.
    scaled: [Vector3<f64>; 4],
}

impl TetrahedronFrame {
    /// `(1,1,1)/√3, (1,−1,−1)/√3, (−1,1,−1)/√3, (−1,−1,1)/√3`.
    pub fn canonical() -> Self {
        let scaled = [
            Vector3::new(1.0, 1.0, 1.0),
            Vector3::new(1.0, -1.0, -1.0),
            Vector3::new(-1.0, 1.0, -1.0),
            Vector3::new(-1.0, -1.0, 1.0),
        ];
        TetrahedronFrame { vectors: scaled.map(|v| v / 3f64.sqrt()), scaled }
    }

    pub fn new(vectors: [[f64; 3]; 4]) -> Result<Self> {
        let vectors = vectors.map(Vector3::from);
        for (j, n) in vectors.iter().enumerate() {
            if (n.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::domain(format!("frame vector {j} is not a unit vector")));
            }
            for (k, m) in vectors.iter().enumerate().skip(j + 1) {
                if (n.dot(m) + 1.0 / 3.0).abs() > 1e-12 {
                    return Err(Error::domain(format!("frame vectors {j} and {k} are not at the tetrahedral angle")));
                }
            }
        }
        if vectors.iter().sum::<Vector3<f64>>().norm() > 1e-12 {
            return Err(Error::domain("frame vectors do not sum to zero"));
        }
        Ok(TetrahedronFrame { vectors, scaled: vectors.map(|v| v * 3f64.sqrt()) })
    }

    pub fn vectors(&self) -> &[Vector3<f64>; 4] {
        &self.vectors
    }

    /// `Π_k = (I + n_k·σ)/4`.
    pub fn effect(&self, k: usize) -> CMatrix {
        bloch_operator(0.25, 0.25, &self.vectors[k])
    }

    /// `Γ_k = (I + 3 n_k·σ)/2`.
    pub fn dual(&self, k: usize) -> CMatrix {
        bloch_operator(0.5, 1.5, &self.vectors[k])
    }

    fn product(&self, index: usize, n: usize, single: impl Fn(usize) -> CMatrix) -> CMatrix {
        let factors: Vec<CMatrix> = (0..n).map(|q| single((index >> (2 * (n - 1 - q))) & 3)).collect();
        kron_all(&factors)
    }

    /// Tensor-product effect for frame index `index` over `n` qubits.
    pub fn effect_n(&self, index: usize, n: usize) -> CMatrix {
        self.product(index, n, |k| self.effect(k))
    }

    /// Tensor-product dual element for frame index `index` over `n` qubits.
    pub fn dual_n(&self, index: usize, n: usize) -> CMatrix {
        self.product(index, n, |k| self.dual(k))
    }
}

impl Default for TetrahedronFrame {
    fn default() -> Self {
        Self::canonical()
    }
}

/// Density matrix of one or more qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitState {
    rho: CMatrix,
    n_qubits: usize,
}

impl QubitState {
    /// Checks Hermiticity, unit trace and positivity.
    pub fn new(rho: CMatrix) -> Result<Self> {
        if rho.nrows() != rho.ncols() {
            return Err(Error::domain("density matrix must be square"));
        }
        let n_qubits = qubit_count(rho.nrows(), 2, "density matrix")?;
        if n_qubits > MAX_QUBITS {
            return Err(Error::size(format!("{n_qubits} qubits exceed the limit of {MAX_QUBITS}")));
        }
        if max_abs(&(&rho - rho.adjoint())) > MATRIX_TOL {
            return Err(Error::domain("density matrix is not Hermitian"));
        }
        let trace = rho.trace();
        if (trace.re - 1.0).abs() > MATRIX_TOL || trace.im.abs() > MATRIX_TOL {
            return Err(Error::domain(format!("density matrix has trace {trace}")));
        }
        let min = min_eigenvalue(&rho);
        if min < -PSD_TOL {
            return Err(Error::domain(format!("density matrix has negative eigenvalue {min:e}")));
        }
        Ok(QubitState { rho, n_qubits })
    }

    /// `|ψ⟩⟨ψ|` for a normalised amplitude vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let v = DVector::from_column_slice(psi);
        let norm = v.norm();
        if (norm - 1.0).abs() > MATRIX_TOL {
            return Err(Error::domain(format!("state vector has norm {norm}")));
        }
        Self::new(&v * v.adjoint())
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        let d = 1usize << n_qubits;
        Self::new(CMatrix::identity(d, d) * c(1.0 / d as f64))
    }

    /// `(I + r·σ)/2` for a Bloch vector with `|r| ≤ 1`.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        Self::new(bloch_operator(0.5, 0.5, &Vector3::from(r)))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// `U ρ U†`.
    pub fn evolve(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.rho.nrows() {
            return Err(Error::domain("unitary and state dimensions differ"));
        }
        Ok(QubitState { rho: u * &self.rho * u.adjoint(), n_qubits: self.n_qubits })
    }
}

fn min_eigenvalue(m: &CMatrix) -> f64 {
    let hermitian = (m + m.adjoint()) * c(0.5);
    SymmetricEigen::new(hermitian).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Frame probabilities `p(a) = tr(ρ Π_a)`, length `4^n`.
pub fn state_to_prob(rho: &QubitState, frame: &TetrahedronFrame) -> Vec<f64> {
    let n = rho.n_qubits;
    (0..1usize << (2 * n)).map(|a| trace_product_re(&rho.rho, &frame.effect_n(a, n))).collect()
}

/// Result of inverting the frame map.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    /// `Σ_a p(a) Γ_a`; Hermitian with unit trace, not necessarily positive.
    pub matrix: CMatrix,
    pub min_eigenvalue: f64,
    /// Whether `matrix` is a valid density matrix.
    pub is_state: bool,
}

impl Reconstruction {
    pub fn into_state(self) -> Result<QubitState> {
        QubitState::new(self.matrix)
    }
}

/// `ρ = Σ_a p(a) Γ_a`. Vectors outside the quantum set reconstruct to
/// non-positive matrices, reported through [`Reconstruction::is_state`].
pub fn prob_to_state(p: &[f64], frame: &TetrahedronFrame) -> Result<Reconstruction> {
    let n = qubit_count(p.len(), 4, "probability vector")?;
    if n == 0 {
        return Err(Error::domain("probability vector must have length 4^n with n >= 1"));
    }
    if n > MAX_QUBITS {
        return Err(Error::size(format!("{n} qubits exceed the limit of {MAX_QUBITS}")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::domain(format!("probabilities sum to {total}, not 1")));
    }
    let d = 1usize << n;
    let mut matrix = CMatrix::zeros(d, d);
    for (a, &w) in p.iter().enumerate() {
        if w != 0.0 {
            matrix += frame.dual_n(a, n) * c(w);
        }
    }
    let min_eigenvalue = min_eigenvalue(&matrix);
    Ok(Reconstruction { matrix, min_eigenvalue, is_state: min_eigenvalue >= -PSD_TOL })
}

fn check_unitary(u: &CMatrix) -> Result<()> {
    if u.nrows() != u.ncols() {
        return Err(Error::domain("unitary must be square"));
    }
    let d = u.nrows();
    let err = max_abs(&(u.adjoint() * u - CMatrix::identity(d, d)));
    if err > MATRIX_TOL {
        return Err(Error::domain(format!("matrix is not unitary (|U†U − I| = {err:e})")));
    }
    Ok(())
}

/// Rotation `O_ij = tr(σ_i U σ_j U†)/2` with `U (n·σ) U† = (O n)·σ`.
pub fn unitary_to_so3(u: &CMatrix) -> Result<Matrix3<f64>> {
    if u.nrows() != 2 {
        return Err(Error::domain(format!("expected a 2x2 unitary, got {0}x{0}", u.nrows())));
    }
    check_unitary(u)?;
    let s = pauli();
    Ok(Matrix3::from_fn(|i, j| 0.5 * trace_product_re(&s[i], &(u * &s[j] * u.adjoint()))))
}

/// A unitary together with its frame matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GateMatrix {
    pub unitary: CMatrix,
    /// `R(α|a)`, rows indexed by output frame element.
    pub r: QuasiStochasticMatrix,
    /// `max{0, −min R}`.
    pub lower_bound: f64,
}

/// Frame matrix of a `k`-qubit unitary, `4^k × 4^k`.
///
/// For one qubit `R(α|a) = 1/4 + (3/4) n_α·(O n_a)`: the rotation acts on
/// the input direction `n_a`. Wider gates use `Re tr(U Γ_a U† Π_α)`.
pub fn unitary_to_quasi(u: &CMatrix, frame: &TetrahedronFrame) -> Result<GateMatrix> {
    check_unitary(u)?;
    let k = qubit_count(u.nrows(), 2, "unitary")?;
    if k == 0 {
        return Err(Error::domain("unitary must act on at least one qubit"));
    }
    if k > MAX_GATE_QUBITS {
        return Err(Error::size(format!("{k}-qubit gate exceeds the limit of {MAX_GATE_QUBITS}")));
    }
    let r = if k == 1 {
        let o = unitary_to_so3(u)?;
        // (1 + 3 n_α·O n_a)/4 written with √3 n so the canonical frame is exact
        let v = &frame.scaled;
        QuasiStochasticMatrix::from_fn(4, |alpha, a| (1.0 + v[alpha].dot(&(o * v[a]))) / 4.0)
    } else {
        let d = 1usize << (2 * k);
        let evolved: Vec<CMatrix> = (0..d).map(|a| u * frame.dual_n(a, k) * u.adjoint()).collect();
        let effects: Vec<CMatrix> = (0..d).map(|alpha| frame.effect_n(alpha, k)).collect();
        QuasiStochasticMatrix::from_fn(d, |alpha, a| trace_product_re(&evolved[a], &effects[alpha]))
    };
    let lower_bound = r.negativity_lower_bound();
    Ok(GateMatrix { unitary: u.clone(), r, lower_bound })
}

/// Named gates and rotations.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    I,
    X,
    Y,
    Z,
    H,
    S,
    T,
    Rx(f64),
    Ry(f64),
    Rz(f64),
    /// `exp(−i θ n·σ / 2)` about a unit axis.
    Rotation { axis: [f64; 3], angle: f64 },
    /// Control is the first target.
    Cnot,
    Cz,
    Custom(CMatrix),
}

impl Gate {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::I => "I",
            Gate::X => "X",
            Gate::Y => "Y",
            Gate::Z => "Z",
            Gate::H => "H",
            Gate::S => "S",
            Gate::T => "T",
            Gate::Rx(_) => "RX",
            Gate::Ry(_) => "RY",
            Gate::Rz(_) => "RZ",
            Gate::Rotation { .. } => "R",
            Gate::Cnot => "CNOT",
            Gate::Cz => "CZ",
            Gate::Custom(_) => "custom",
        }
    }

    pub fn n_qubits(&self) -> usize {
        match self {
            Gate::Cnot | Gate::Cz => 2,
            Gate::Custom(m) => qubit_count(m.nrows(), 2, "unitary").unwrap_or(0),
            _ => 1,
        }
    }

    pub fn unitary(&self) -> Result<CMatrix> {
        let h = 1.0 / 2f64.sqrt();
        let m2 = |e: [C64; 4]| CMatrix::from_row_slice(2, 2, &e);
        let axis_rotation = |axis: [f64; 3], angle: f64| -> Result<CMatrix> {
            let n = Vector3::from(axis);
            let norm = n.norm();
            if !(norm > 0.0 && norm.is_finite() && angle.is_finite()) {
                return Err(Error::domain("rotation needs a finite non-zero axis and a finite angle"));
            }
            let n = n / norm;
            let (s, co) = (angle / 2.0).sin_cos();
            Ok(m2([
                C64::new(co, -s * n.z),
                C64::new(-s * n.y, -s * n.x),
                C64::new(s * n.y, -s * n.x),
                C64::new(co, s * n.z),
            ]))
        };
        Ok(match self {
            Gate::I => CMatrix::identity(2, 2),
            Gate::X => pauli()[0].clone(),
            Gate::Y => pauli()[1].clone(),
            Gate::Z => pauli()[2].clone(),
            Gate::H => m2([c(h), c(h), c(h), c(-h)]),
            Gate::S => m2([ONE, ZERO, ZERO, I]),
            Gate::T => m2([ONE, ZERO, ZERO, C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)]),
            Gate::Rx(t) => axis_rotation([1.0, 0.0, 0.0], *t)?,
            Gate::Ry(t) => axis_rotation([0.0, 1.0, 0.0], *t)?,
            Gate::Rz(t) => axis_rotation([0.0, 0.0, 1.0], *t)?,
            Gate::Rotation { axis, angle } => axis_rotation(*axis, *angle)?,
            Gate::Cnot => {
                let mut m = CMatrix::zeros(4, 4);
                for (r, col) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
                    m[(r, col)] = ONE;
                }
                m
            }
            Gate::Cz => {
                let mut m = CMatrix::identity(4, 4);
                m[(3, 3)] = -ONE;
                m
            }
            Gate::Custom(m) => {
                check_unitary(m)?;
                m.clone()
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitGate {
    pub gate: Gate,
    /// Qubits the gate acts on; the first is the most significant.
    pub targets: Vec<usize>,
}

/// Gate list over a fixed register.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<CircuitGate>,
}

impl Circuit {
    pub fn new(n_qubits: usize, gates: Vec<CircuitGate>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::domain("circuit needs at least one qubit"));
        }
        for (i, g) in gates.iter().enumerate() {
            check_targets(n_qubits, &g.gate, &g.targets).map_err(|m| Error::domain(format!("gates[{i}]: {m}")))?;
        }
        Ok(Circuit { n_qubits, gates })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[CircuitGate] {
        &self.gates
    }

    /// Unitary of the whole circuit on `n_qubits` (gates applied in order).
    pub fn unitary(&self) -> Result<CMatrix> {
        if self.n_qubits > MAX_QUBITS {
            return Err(Error::size(format!("{} qubits exceed the limit of {MAX_QUBITS}", self.n_qubits)));
        }
        let d = 1usize << self.n_qubits;
        self.gates.iter().try_fold(CMatrix::identity(d, d), |acc, g| {
            Ok(embed(&g.gate.unitary()?, &g.targets, self.n_qubits) * acc)
        })
    }

    pub fn from_file(file: CircuitFile) -> Result<Self> {
        let gates = file
            .gates
            .into_iter()
            .enumerate()
            .map(|(i, g)| {
                let gate = g.to_gate().map_err(|e| Error::domain(format!("gates[{i}].{e}")))?;
                Ok(CircuitGate { gate, targets: g.targets })
            })
            .collect::<Result<Vec<_>>>()?;
        Circuit::new(file.n_qubits, gates)
    }
}

fn check_targets(n_qubits: usize, gate: &Gate, targets: &[usize]) -> std::result::Result<(), String> {
    let k = gate.n_qubits();
    if k == 0 {
        return Err("matrix: dimension is not a power of two".into());
    }
    if targets.len() != k {
        return Err(format!("targets: {} needs {k} target(s), got {}", gate.name(), targets.len()));
    }
    if let Some(&q) = targets.iter().find(|&&q| q >= n_qubits) {
        return Err(format!("targets: qubit {q} out of range for {n_qubits} qubit(s)"));
    }
    let mut sorted = targets.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err("targets: repeated qubit".into());
    }
    Ok(())
}

/// `u` acting on `targets` of an `n`-qubit register, identity elsewhere.
pub fn embed(u: &CMatrix, targets: &[usize], n: usize) -> CMatrix {
    let d = 1usize << n;
    let k = targets.len();
    let bit = |q: usize| n - 1 - q;
    let target_mask: usize = targets.iter().map(|&q| 1 << bit(q)).sum();
    let sub = |i: usize| targets.iter().enumerate().fold(0, |acc, (j, &q)| acc | ((i >> bit(q) & 1) << (k - 1 - j)));
    CMatrix::from_fn(d, d, |i, j| {
        if i & !target_mask != j & !target_mask {
            ZERO
        } else {
            u[(sub(i), sub(j))]
        }
    })
}

/// JSON circuit: `{"n_qubits":…, "gates":[{"name":"H","targets":[0]},…]}`.
///
/// Rotations carry `angle` (and `axis` for `R`); `custom` gates carry
/// `matrix`, the row-major list of entries as `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitFile {
    pub n_qubits: usize,
    pub gates: Vec<GateFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateFile {
    pub name: String,
    pub targets: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<[f64; 2]>>,
}

impl GateFile {
    fn to_gate(&self) -> std::result::Result<Gate, String> {
        let angle = || self.angle.ok_or_else(|| "angle: missing".to_string());
        let name = self.name.to_ascii_uppercase();
        let gate = match name.as_str() {
            "I" => Gate::I,
            "X" => Gate::X,
            "Y" => Gate::Y,
            "Z" => Gate::Z,
            "H" => Gate::H,
            "S" => Gate::S,
            "T" => Gate::T,
            "RX" => Gate::Rx(angle()?),
            "RY" => Gate::Ry(angle()?),
            "RZ" => Gate::Rz(angle()?),
            "R" => Gate::Rotation {
                axis: self.axis.ok_or("axis: missing")?,
                angle: angle()?,
            },
            "CNOT" | "CX" => Gate::Cnot,
            "CZ" => Gate::Cz,
            "CUSTOM" => {
                let entries = self.matrix.as_ref().ok_or("matrix: missing")?;
                let d = (entries.len() as f64).sqrt().round() as usize;
                if d * d != entries.len() || d == 0 {
                    return Err(format!("matrix: {} entries do not form a square matrix", entries.len()));
                }
                let values: Vec<C64> = entries.iter().map(|[re, im]| C64::new(*re, *im)).collect();
                let m = CMatrix::from_row_slice(d, d, &values);
                check_unitary(&m).map_err(|e| format!("matrix: {e}"))?;
                Gate::Custom(m)
            }
            _ => return Err(format!("name: unknown gate `{}`", self.name)),
        };
        let uses_angle = matches!(name.as_str(), "RX" | "RY" | "RZ" | "R");
        if self.angle.is_some() && !uses_angle {
            return Err(format!("angle: not used by gate {}", self.name));
        }
        if self.axis.is_some() && name != "R" {
            return Err(format!("axis: not used by gate {}", self.name));
        }
        if self.matrix.is_some() && name != "CUSTOM" {
            return Err(format!("matrix: not used by gate {}", self.name));
        }
        Ok(gate)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateNegativity {
    pub name: String,
    pub targets: Vec<usize>,
    /// Frame dimension `4^k`.
    pub dim: usize,
    pub lower_bound: f64,
    pub delta: f64,
    /// Mode actually used; exact requests on gates above the cap fall back
    /// to the heuristic.
    pub mode: NegativityMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitNegativity {
    pub gates: Vec<GateNegativity>,
    pub total_lower_bound: f64,
    pub total: f64,
}

/// Per-gate nebit negativity of each gate's frame matrix and the sums.
pub fn circuit_negativity(
    circuit: &Circuit,
    frame: &TetrahedronFrame,
    mode: NegativityMode,
    exact_cap: usize,
) -> Result<CircuitNegativity> {
    let mut gates = Vec::with_capacity(circuit.gates.len());
    for g in &circuit.gates {
        let m = unitary_to_quasi(&g.gate.unitary()?, frame)?;
        let dim = m.r.dim();
        let used = if mode == NegativityMode::Exact && dim > exact_cap {
            NegativityMode::Heuristic
        } else {
            mode
        };
        let neg = minimal_negativity_capped(&m.r, used, exact_cap)?;
        gates.push(GateNegativity {
            name: g.gate.name().to_string(),
            targets: g.targets.clone(),
            dim,
            lower_bound: m.lower_bound,
            delta: neg.delta,
            mode: used,
        });
    }
    Ok(CircuitNegativity {
        total_lower_bound: gates.iter().map(|g| g.lower_bound).sum(),
        total: gates.iter().map(|g| g.delta).sum(),
        gates,
    })
}
