//! Local quasi-bistochastic processes that rescale correlations by `η`.
//!
//! An observer with `M` binary inputs applies
//!
//! ```text
//! S(α|a) = 2^{-M} [1 + Σ_i η_i α_i a_i + Σ_k t_k α_{U_k} a_{V_k}]
//! ```
//!
//! where `α_U` is the product of the output signs over the input set `U`.
//! Every correction monomial has non-empty `U` and `V`, so rows and columns
//! of `S` sum to one for any `t`; the pairs `|U| = |V| = 1` are excluded
//! because they would mix different inputs' correlations.
//!
//! Matrix indices follow [`crate::dist`]: input `i` (1-based) is bit `i − 1`
//! of the local index, bit value 1 meaning outcome −1.

use crate::bell::{self, mermin_classical_bound, mermin_quantum_bound};
use crate::decomp::{
    self, add_permutation_columns, decomposition_from_lp, entry_row, minimal_negativity_capped, NegativityMode,
    PermutationMatrix, QuasiStochasticMatrix, SignedBvnDecomposition,
};
use crate::dist::{self, QuasiDistribution};
use crate::lp::{self, LinearProgram, LpStatus};
use crate::numeric::parity_sign;
use crate::{Error, Result};

/// Largest number of inputs for which processes are built (`64×64`).
pub const MAX_SETTINGS: usize = 6;

/// Largest number of inputs accepted by [`optimize_ansatz`].
pub const MAX_OPTIMIZE_SETTINGS: usize = 3;

/// Largest party count for [`mermin_upgrade`].
pub const MAX_MERMIN_UPGRADE_PARTIES: usize = 8;

/// Correction monomial `α_U a_V`, stored as bit masks over the inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Monomial {
    pub alpha_mask: usize,
    pub outcome_mask: usize,
}

fn mask_settings(mask: usize) -> Vec<usize> {
    (0..usize::BITS as usize).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect()
}

impl Monomial {
    /// 1-based inputs appearing as outputs `α`.
    pub fn alpha_settings(&self) -> Vec<usize> {
        mask_settings(self.alpha_mask)
    }

    /// 1-based inputs appearing as inputs `a`.
    pub fn outcome_settings(&self) -> Vec<usize> {
        mask_settings(self.outcome_mask)
    }

    /// `α_U a_V` at output index `alpha` and input index `a`.
    pub fn value(&self, alpha: usize, a: usize) -> f64 {
        parity_sign(alpha, self.alpha_mask) * parity_sign(a, self.outcome_mask)
    }

    /// Human-readable form such as `α1 α2 a1`.
    pub fn label(&self) -> String {
        let alphas = self.alpha_settings().into_iter().map(|i| format!("α{i}"));
        let outcomes = self.outcome_settings().into_iter().map(|i| format!("a{i}"));
        alphas.chain(outcomes).collect::<Vec<_>>().join(" ")
    }
}

/// Correction monomials for `m` inputs, ordered by output degree, then
/// input degree, then the input lists lexicographically.
///
/// For `m = 2` this is `α1 a1 a2, α2 a1 a2, α1 α2 a1, α1 α2 a2, α1 α2 a1 a2`.
pub fn ansatz_monomials(m: usize) -> Vec<Monomial> {
    let full = 1usize << m;
    let mut out: Vec<Monomial> = (1..full)
        .flat_map(|u| (1..full).map(move |v| Monomial { alpha_mask: u, outcome_mask: v }))
        .filter(|mono| !(mono.alpha_mask.count_ones() == 1 && mono.outcome_mask.count_ones() == 1))
        .collect();
    out.sort_by_key(|mono| {
        (
            mono.alpha_mask.count_ones(),
            mono.outcome_mask.count_ones(),
            mono.alpha_settings(),
            mono.outcome_settings(),
        )
    });
    out
}

/// Rescaling factors and correction coefficients of an `m`-input process.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzCoefficients {
    m: usize,
    etas: Vec<f64>,
    t: Vec<f64>,
}

impl AnsatzCoefficients {
    /// Same `eta` for every input; `t` in [`ansatz_monomials`] order.
    pub fn new(m: usize, eta: f64, t: Vec<f64>) -> Result<Self> {
        Self::per_input(vec![eta; m], t)
    }

    /// One rescaling factor per input.
    pub fn per_input(etas: Vec<f64>, t: Vec<f64>) -> Result<Self> {
        let m = etas.len();
        if m == 0 {
            return Err(Error::domain("a local process needs at least one input"));
        }
        if m > MAX_SETTINGS {
            return Err(Error::size(format!("{m} inputs exceed the limit of {MAX_SETTINGS}")));
        }
        let expected = ansatz_monomials(m).len();
        if t.len() != expected {
            return Err(Error::domain(format!(
                "{m} inputs need {expected} correction coefficients, got {}",
                t.len()
            )));
        }
        if etas.iter().chain(&t).any(|v| !v.is_finite()) {
            return Err(Error::domain("coefficients must be finite"));
        }
        Ok(AnsatzCoefficients { m, etas, t })
    }

    /// `t = 1` on the monomials `α_U a_U` with `|U| ≥ 2`, zero elsewhere.
    /// For two inputs this is `t = (0, 0, 0, 0, 1)`.
    pub fn standard(m: usize, eta: f64) -> Result<Self> {
        let t = ansatz_monomials(m)
            .iter()
            .map(|mono| if mono.alpha_mask == mono.outcome_mask { 1.0 } else { 0.0 })
            .collect();
        Self::new(m, eta, t)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn etas(&self) -> &[f64] {
        &self.etas
    }

    /// The common rescaling factor, if all inputs share one.
    pub fn eta(&self) -> Option<f64> {
        let first = self.etas[0];
        self.etas.iter().all(|&e| e == first).then_some(first)
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }
}

/// The `2^M × 2^M` process for `coeffs`, rows indexed by outputs `α`.
pub fn build_s_eta(coeffs: &AnsatzCoefficients) -> Result<QuasiStochasticMatrix> {
    let m = coeffs.m;
    let d = 1usize << m;
    let monomials = ansatz_monomials(m);
    let scale = 1.0 / d as f64;
    Ok(QuasiStochasticMatrix::from_fn(d, |alpha, a| {
        let linear: f64 = coeffs
            .etas
            .iter()
            .enumerate()
            .map(|(i, eta)| eta * parity_sign(alpha, 1 << i) * parity_sign(a, 1 << i))
            .sum();
        let correction: f64 = monomials.iter().zip(&coeffs.t).map(|(mono, t)| t * mono.value(alpha, a)).sum();
        scale * (1.0 + linear + correction)
    }))
}

/// [`build_s_eta`] with one rescaling factor per input.
pub fn build_s_eta_per_input(etas: &[f64], t: &[f64]) -> Result<QuasiStochasticMatrix> {
    build_s_eta(&AnsatzCoefficients::per_input(etas.to_vec(), t.to_vec())?)
}

/// Which entrywise positivity constraints the optimised process satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PositivityConstraint {
    /// Positive at `η = 0` and `η = 1`, hence for all `η ∈ [0, 1]`.
    EtaZeroAndOne,
    /// Positive at `η = 1` only; used when the two endpoints cannot both hold.
    EtaOneOnly,
}

impl PositivityConstraint {
    fn endpoints(self) -> &'static [f64] {
        match self {
            PositivityConstraint::EtaZeroAndOne => &[0.0, 1.0],
            PositivityConstraint::EtaOneOnly => &[1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizedAnsatz {
    pub coeffs: AnsatzCoefficients,
    /// Exact minimal negativity of the process built from `coeffs`.
    pub delta: f64,
    pub positivity: PositivityConstraint,
    pub decomposition: SignedBvnDecomposition,
}

/// Correction coefficients minimising the nebit negativity of the `m`-input
/// process at rescaling `eta`, subject to the process being positive for
/// `η ≤ 1`.
///
/// The coefficients and the signed decomposition are found together by one
/// linear program: `Σ q_i Π_i − Σ_k t_k B_k = S(t = 0)` with free `t`,
/// `Σ q_i = 1`, entrywise positivity of `S` at the endpoints of the
/// constraint set, minimising the total negative weight. Positivity at
/// `η = 0` and `η = 1` is infeasible for three inputs; the program then
/// falls back to `η = 1` and says so in the result.
pub fn optimize_ansatz(m: usize, eta: f64) -> Result<OptimizedAnsatz> {
    if m == 0 {
        return Err(Error::domain("a local process needs at least one input"));
    }
    if m > MAX_OPTIMIZE_SETTINGS {
        return Err(Error::size(format!(
            "optimisation over {m} inputs is out of reach (limit {MAX_OPTIMIZE_SETTINGS})"
        )));
    }
    if !(eta.is_finite() && eta >= 1.0) {
        return Err(Error::domain(format!("rescaling factor must be >= 1, got {eta}")));
    }
    for positivity in [PositivityConstraint::EtaZeroAndOne, PositivityConstraint::EtaOneOnly] {
        if let Some(found) = solve_joint(m, eta, positivity)? {
            return Ok(found);
        }
    }
    Err(Error::numerical("no process satisfies positivity at eta = 1"))
}

fn solve_joint(m: usize, eta: f64, positivity: PositivityConstraint) -> Result<Option<OptimizedAnsatz>> {
    let d = 1usize << m;
    let monomials = ansatz_monomials(m);
    let zero_t = vec![0.0; monomials.len()];
    let base = |e: f64| build_s_eta(&AnsatzCoefficients::new(m, e, zero_t.clone())?);
    let endpoints = positivity.endpoints();
    let scale = 1.0 / d as f64;

    let mut rhs = base(eta)?.entries().to_vec();
    rhs.push(1.0);
    for &e in endpoints {
        rhs.extend(base(e)?.entries().iter().map(|v| -v));
    }
    let positivity_row = |k: usize, r: usize, c: usize| d * d + 1 + k * d * d + entry_row(d, r, c);

    let perms = PermutationMatrix::all(d);
    let mut lp = LinearProgram::new(rhs);
    let first = add_permutation_columns(&mut lp, &perms)?;
    let t_first = lp.n_cols();
    for mono in &monomials {
        for sign in [1.0, -1.0] {
            let mut entries = Vec::with_capacity(d * d * (1 + endpoints.len()));
            for r in 0..d {
                for c in 0..d {
                    let b = sign * scale * mono.value(r, c);
                    entries.push((entry_row(d, r, c), -b));
                    entries.extend((0..endpoints.len()).map(|k| (positivity_row(k, r, c), b)));
                }
            }
            lp.add_column(0.0, &entries)?;
        }
    }
    for k in 0..endpoints.len() {
        for r in 0..d {
            for c in 0..d {
                lp.add_column(0.0, &[(positivity_row(k, r, c), -1.0)])?;
            }
        }
    }

    let sol = lp::solve(&lp, lp::DEFAULT_TOL)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Ok(None),
        LpStatus::Unbounded => return Err(Error::numerical("ansatz LP reported unbounded")),
    }
    let t: Vec<f64> = (0..monomials.len())
        .map(|k| {
            let v = sol.x[t_first + 2 * k] - sol.x[t_first + 2 * k + 1];
            if v.abs() < 1e-12 {
                0.0
            } else {
                v
            }
        })
        .collect();
    let coeffs = AnsatzCoefficients::new(m, eta, t)?;

    // certify at the chosen t with the stand-alone minimal-negativity LP
    let s = build_s_eta(&coeffs)?;
    let exact = minimal_negativity_capped(&s, NegativityMode::Exact, decomp::MAX_EXACT_DIM)?;
    let joint = decomposition_from_lp(d, &perms, &sol.x, first)?;
    let decomposition = if exact.decomposition.reconstruction_error(&s) <= joint.reconstruction_error(&s) {
        exact.decomposition
    } else {
        joint
    };
    Ok(Some(OptimizedAnsatz { coeffs, delta: exact.delta, positivity, decomposition }))
}

/// Upgrade of a CHSH box with a single local process.
#[derive(Debug, Clone, PartialEq)]
pub struct ChshUpgrade {
    pub eta: f64,
    /// CHSH value of the upgraded distribution, `2η`.
    pub value: f64,
    /// Exact minimal nebit negativity of the two-input process.
    pub delta: f64,
    /// `max{0, −min entry}` of the process.
    pub lower_bound: f64,
    pub dist: QuasiDistribution,
}

/// Applies the two-input process with rescaling `eta` at party 1 of the
/// local-realistic CHSH distribution.
pub fn chsh_upgrade(eta: f64) -> Result<ChshUpgrade> {
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(Error::domain(format!("rescaling factor must be >= 0, got {eta}")));
    }
    let s = build_s_eta(&AnsatzCoefficients::standard(2, eta)?)?;
    let dist = dist::chsh_lhv_jpd().apply_local_process(1, &s)?;
    let value = bell::chsh().evaluate(&dist)?;
    let neg = minimal_negativity_capped(&s, NegativityMode::Exact, decomp::DEFAULT_EXACT_DIM)?;
    Ok(ChshUpgrade { eta, value, delta: neg.delta, lower_bound: neg.lower_bound, dist })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MerminUpgrade {
    pub n: usize,
    pub party: usize,
    /// Local-realistic bound `C_N`.
    pub classical: f64,
    /// Quantum bound `Q_N = 2^{N−1}`.
    pub quantum: f64,
    /// `η_N = Q_N / C_N`.
    pub eta: f64,
    /// `Δ_N = (η_N − 1)/2`.
    pub delta: f64,
    /// Mermin value of the upgraded distribution.
    pub value: f64,
    pub dist: QuasiDistribution,
}

/// Upgrades the `N`-party distribution saturating the Mermin bound to the
/// quantum value with the default two-input process at `party`.
pub fn mermin_upgrade(n: usize, party: usize) -> Result<MerminUpgrade> {
    if !(2..=MAX_MERMIN_UPGRADE_PARTIES).contains(&n) {
        return Err(Error::domain(format!(
            "Mermin upgrade needs 2 <= N <= {MAX_MERMIN_UPGRADE_PARTIES}, got {n}"
        )));
    }
    if !(1..=n).contains(&party) {
        return Err(Error::domain(format!("party must be in 1..={n}, got {party}")));
    }
    let classical = mermin_classical_bound(n);
    let quantum = mermin_quantum_bound(n);
    let eta = quantum / classical;
    let s = build_s_eta(&AnsatzCoefficients::standard(2, eta)?)?;
    let dist = dist::mermin_jpd(n)?.apply_local_process(party, &s)?;
    let value = bell::mermin(n)?.evaluate(&dist)?;
    Ok(MerminUpgrade { n, party, classical, quantum, eta, delta: (eta - 1.0) / 2.0, value, dist })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharedCost {
    pub observers: usize,
    /// `η_total^{1/N}`.
    pub per_observer_eta: f64,
    /// `(η_total^{1/N} − 1)/2`.
    pub per_observer_delta: f64,
    /// `N` times the per-observer negativity.
    pub total: f64,
}

/// Cost when `observers` parties each rescale by `eta_total^{1/N}`.
pub fn shared_cost(observers: usize, eta_total: f64) -> Result<SharedCost> {
    if observers == 0 {
        return Err(Error::domain("at least one observer is needed"));
    }
    if !(eta_total.is_finite() && eta_total >= 1.0) {
        return Err(Error::domain(format!("total rescaling must be >= 1, got {eta_total}")));
    }
    shared_from_log(observers, eta_total.ln())
}

/// Same as [`shared_cost`] with `ln η_total` given, for factors too large
/// for `f64`.
fn shared_from_log(observers: usize, ln_eta: f64) -> Result<SharedCost> {
    let n = observers as f64;
    let per_observer_eta = (ln_eta / n).exp();
    // exp_m1 keeps precision when the per-observer factor is close to 1
    let per_observer_delta = (ln_eta / n).exp_m1() / 2.0;
    Ok(SharedCost { observers, per_observer_eta, per_observer_delta, total: n * per_observer_delta })
}

/// The two candidate totals for sharing a Mermin upgrade among all `N`
/// parties.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MerminSharedCosts {
    pub n: usize,
    /// `η_N = Q_N / C_N`.
    pub eta: f64,
    /// Each party rescales by `η_N^{1/N}`; the product of factors is
    /// `η_N`, which is what the upgrade needs. Grows linearly in `N`.
    pub required: SharedCost,
    /// Each party rescales by `√2^{1/N}`. The total tends to `ln 2 / 4`, but
    /// the product of factors is only `√2`, short of `η_N` for `N ≥ 4`.
    pub sqrt2: SharedCost,
}

/// Both shared-cost totals for `N` parties. Valid for any `N ≥ 2`; `η_N` is
/// evaluated in log space.
pub fn mermin_shared_costs(n: usize) -> Result<MerminSharedCosts> {
    if n < 2 {
        return Err(Error::domain(format!("Mermin scenario needs N >= 2, got {n}")));
    }
    // η_N = 2^{N−1−⌊N/2⌋}
    let log2_eta = (n - 1 - n / 2) as f64;
    Ok(MerminSharedCosts {
        n,
        eta: 2f64.powf(log2_eta),
        required: shared_from_log(n, log2_eta * std::f64::consts::LN_2)?,
        sqrt2: shared_from_log(n, 0.5 * std::f64::consts::LN_2)?,
    })
}
