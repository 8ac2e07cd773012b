//! Upgrading the CHSH statistics of a two-qubit pure state towards the
//! no-signalling boundary.
//!
//! The state is `α|01⟩ − β|10⟩` with real `α, β ≥ 0`. Alice measures along
//! `−z` and `−x`, Bob along `(±sin θ, 0, cos θ)` with `θ = arctan(2αβ)`,
//! which maximises CHSH at `Q₂ = 2√(1 + 4α²β²)`. Alice then applies the
//! one-input process `S(α|a) = (1 + η α a)/2` to each pair distribution,
//! rescaling her single and the pair correlation by `η`.

use crate::format::sig12;
use crate::upgrade::{build_s_eta, AnsatzCoefficients};
use crate::{Error, Result};

/// Tolerance on `α² + β² = 1`.
pub const NORM_TOL: f64 = 1e-12;

/// Real amplitudes of `α|01⟩ − β|10⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureStateAB {
    alpha: f64,
    beta: f64,
}

impl PureStateAB {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha >= 0.0 && beta >= 0.0) {
            return Err(Error::domain(format!("amplitudes must be >= 0, got ({alpha}, {beta})")));
        }
        if (alpha * alpha + beta * beta - 1.0).abs() > NORM_TOL {
            return Err(Error::domain(format!("amplitudes ({alpha}, {beta}) are not normalised")));
        }
        Ok(PureStateAB { alpha, beta })
    }

    /// `β = √(1 − α²)` for `α ∈ [0, 1]`.
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::domain(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        Self::new(alpha, (1.0 - alpha * alpha).max(0.0).sqrt())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `4α²β²`.
    fn concurrence_sq(&self) -> f64 {
        4.0 * self.alpha * self.alpha * self.beta * self.beta
    }
}

/// Unit measurement directions, `alice[k − 1]` and `bob[l − 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSettings {
    pub alice: [[f64; 3]; 2],
    pub bob: [[f64; 3]; 2],
    pub theta: f64,
}

pub fn optimal_settings(state: &PureStateAB) -> MeasurementSettings {
    let theta = (2.0 * state.alpha * state.beta).atan();
    let (s, c) = theta.sin_cos();
    MeasurementSettings {
        alice: [[0.0, 0.0, -1.0], [-1.0, 0.0, 0.0]],
        bob: [[s, 0.0, c], [-s, 0.0, c]],
        theta,
    }
}

/// Single-party averages and two-point correlations under the optimal
/// settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlations {
    /// `⟨A¹_1⟩, ⟨A¹_2⟩`.
    pub alice: [f64; 2],
    /// `⟨A²_1⟩, ⟨A²_2⟩`.
    pub bob: [f64; 2],
    /// `pairs[k − 1][l − 1] = ⟨A¹_k A²_l⟩`.
    pub pairs: [[f64; 2]; 2],
}

impl Correlations {
    /// `⟨A¹_1A²_1⟩ + ⟨A¹_1A²_2⟩ + ⟨A¹_2A²_1⟩ − ⟨A¹_2A²_2⟩`.
    pub fn chsh(&self) -> f64 {
        self.pairs[0][0] + self.pairs[0][1] + self.pairs[1][0] - self.pairs[1][1]
    }
}

pub fn correlations(state: &PureStateAB) -> Correlations {
    let c2 = state.concurrence_sq();
    let root = (1.0 + c2).sqrt();
    let bias = state.beta * state.beta - state.alpha * state.alpha;
    Correlations {
        alice: [bias, 0.0],
        bob: [bias / root, bias / root],
        pairs: [[1.0 / root, 1.0 / root], [c2 / root, -c2 / root]],
    }
}

/// `Q₂ = 2√(1 + 4α²β²)`.
pub fn quantum_bound(state: &PureStateAB) -> f64 {
    2.0 * (1.0 + state.concurrence_sq()).sqrt()
}

fn check_settings(k: usize, l: usize) -> Result<()> {
    if !(1..=2).contains(&k) || !(1..=2).contains(&l) {
        return Err(Error::domain(format!("settings must be 1 or 2, got ({k}, {l})")));
    }
    Ok(())
}

/// `p(a¹_k, a²_l)`, ordered `(+,+), (−,+), (+,−), (−,−)`: Alice's outcome
/// is the low bit, bit value 1 meaning −1.
pub fn quantum_pair_probs(state: &PureStateAB, k: usize, l: usize) -> Result<[f64; 4]> {
    check_settings(k, l)?;
    let c = correlations(state);
    let (a, b, ab) = (c.alice[k - 1], c.bob[l - 1], c.pairs[k - 1][l - 1]);
    Ok(std::array::from_fn(|idx| {
        let x = if idx & 1 == 0 { 1.0 } else { -1.0 };
        let y = if idx & 2 == 0 { 1.0 } else { -1.0 };
        0.25 * (1.0 + x * a + y * b + x * y * ab)
    }))
}

/// Alice's one-input process with rescaling `eta` applied to
/// [`quantum_pair_probs`]; same ordering.
pub fn pr_upgrade(state: &PureStateAB, eta: f64, k: usize, l: usize) -> Result<[f64; 4]> {
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(Error::domain(format!("rescaling factor must be >= 0, got {eta}")));
    }
    let p = quantum_pair_probs(state, k, l)?;
    let s = build_s_eta(&AnsatzCoefficients::standard(1, eta)?)?;
    Ok(std::array::from_fn(|idx| {
        let (out, bob) = (idx & 1, idx & 2);
        (0..2).map(|a| s.get(out, a) * p[a | bob]).sum()
    }))
}

/// Largest `η` keeping all four upgraded pair distributions non-negative:
/// `2 / (|1 − 2α²| + √(1 + 4α²β²))`, equal to `√2` at `α = 1/√2`.
pub fn max_eta(state: &PureStateAB) -> f64 {
    let a2 = state.alpha * state.alpha;
    2.0 / ((1.0 - 2.0 * a2).abs() + (1.0 + state.concurrence_sq()).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    /// `Q₂(α)`.
    pub quantum: f64,
    /// `η(α) Q₂(α)`.
    pub pr: f64,
}

/// Quantum and upgraded CHSH bounds on `steps` equally spaced `α ∈ [0, 1]`.
pub fn sweep(steps: usize) -> Result<Vec<SweepRow>> {
    if steps < 2 {
        return Err(Error::domain(format!("sweep needs at least 2 steps, got {steps}")));
    }
    (0..steps)
        .map(|i| {
            let alpha = i as f64 / (steps - 1) as f64;
            let state = PureStateAB::from_alpha(alpha)?;
            let quantum = quantum_bound(&state);
            Ok(SweepRow { alpha, quantum, pr: max_eta(&state) * quantum })
        })
        .collect()
}

/// CSV with header `alpha,quantum_bound,pr_bound`, 12 significant digits.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("alpha,quantum_bound,pr_bound\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", sig12(r.alpha), sig12(r.quantum), sig12(r.pr)));
    }
    out
}
