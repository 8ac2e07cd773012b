//! Correlation scenarios and (quasi-)probability joint distributions.
//!
//! A scenario has `N` parties; party `k` owns `M_k` binary observables with
//! outcomes `±1`. A joint distribution assigns a real weight to every
//! combination of outcomes of *all* observables at once. Weights may be
//! negative (quasi-probabilities) but always sum to one.
//!
//! Layout: outcome `a` is stored as bit `b = (1 - a) / 2`; variables are
//! ordered party-major, setting-minor, and the assignment index is
//! `Σ b_i 2^i`. Parties and settings are 1-based in the public API.

use serde::{Deserialize, Serialize};

use crate::bell;
use crate::decomp::QuasiStochasticMatrix;
use crate::numeric::{self, outcome, parity_sign};
use crate::{Error, Result};

/// Enumeration guard on the number of variables of a scenario.
pub const MAX_VARIABLES: usize = 24;

/// Default tolerance for normalisation and positivity checks.
pub const TOL: f64 = 1e-12;

/// Largest Mermin scenario that is still enumerated densely.
pub const MAX_MERMIN_PARTIES: usize = 10;

/// Setting `setting` of party `party`, both counted from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Var {
    pub party: usize,
    pub setting: usize,
}

impl Var {
    pub const fn new(party: usize, setting: usize) -> Self {
        Var { party, setting }
    }
}

impl From<[usize; 2]> for Var {
    fn from([party, setting]: [usize; 2]) -> Self {
        Var { party, setting }
    }
}

impl From<Var> for [usize; 2] {
    fn from(v: Var) -> Self {
        [v.party, v.setting]
    }
}

impl std::fmt::Display for Var {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.party, self.setting)
    }
}

/// Number of parties and settings per party.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    settings: Vec<usize>,
    offsets: Vec<usize>,
}

impl Scenario {
    pub fn new(settings: Vec<usize>) -> Result<Self> {
        if settings.is_empty() {
            return Err(Error::domain("a scenario needs at least one party"));
        }
        if let Some(k) = settings.iter().position(|&m| m == 0) {
            return Err(Error::domain(format!("party {} has no settings", k + 1)));
        }
        let total: usize = settings.iter().sum();
        if total > MAX_VARIABLES {
            return Err(Error::size(format!(
                "{total} variables exceed the enumeration guard of {MAX_VARIABLES}"
            )));
        }
        let offsets = settings
            .iter()
            .scan(0, |acc, &m| {
                let off = *acc;
                *acc += m;
                Some(off)
            })
            .collect();
        Ok(Scenario { settings, offsets })
    }

    /// `n` parties with `m` settings each.
    pub fn uniform(n: usize, m: usize) -> Result<Self> {
        Self::new(vec![m; n])
    }

    pub fn n_parties(&self) -> usize {
        self.settings.len()
    }

    pub fn settings(&self) -> &[usize] {
        &self.settings
    }

    pub fn n_variables(&self) -> usize {
        self.settings.iter().sum()
    }

    pub fn contains(&self, v: Var) -> bool {
        v.party >= 1
            && v.party <= self.n_parties()
            && v.setting >= 1
            && v.setting <= self.settings[v.party - 1]
    }

    /// Canonical position of `v` among all variables.
    pub fn position(&self, v: Var) -> Result<usize> {
        if !self.contains(v) {
            return Err(Error::domain(format!("unknown variable {v} in scenario {:?}", self.settings)));
        }
        Ok(self.offsets[v.party - 1] + v.setting - 1)
    }

    /// All variables in canonical order.
    pub fn variables(&self) -> Vec<Var> {
        self.settings
            .iter()
            .enumerate()
            .flat_map(|(k, &m)| (1..=m).map(move |s| Var::new(k + 1, s)))
            .collect()
    }
}

/// One `±1` outcome per variable, canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    values: Vec<i8>,
}

impl Assignment {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if let Some(i) = values.iter().position(|&a| a != 1 && a != -1) {
            return Err(Error::domain(format!("outcome {} at position {i} is not ±1", values[i])));
        }
        Ok(Assignment { values })
    }

    pub fn from_index(n_variables: usize, index: usize) -> Self {
        Assignment {
            values: (0..n_variables).map(|bit| outcome(index, bit)).collect(),
        }
    }

    pub fn index(&self) -> usize {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &a)| (((1 - a) / 2) as usize) << i)
            .sum()
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Real-valued joint distribution over a set of variables of a scenario.
///
/// A full joint distribution ranges over every variable; marginals keep the
/// original variable labels so correlations can be evaluated on either.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiDistribution {
    scenario: Scenario,
    vars: Vec<Var>,
    weights: Vec<f64>,
}

impl QuasiDistribution {
    /// Full joint distribution, normalised within [`TOL`].
    pub fn new(scenario: Scenario, weights: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(scenario, weights, TOL)
    }

    pub fn with_tolerance(scenario: Scenario, weights: Vec<f64>, tol: f64) -> Result<Self> {
        let vars = scenario.variables();
        Self::over(scenario, vars, weights, tol)
    }

    /// Distribution over a subset `vars` of the scenario's variables.
    pub fn over(scenario: Scenario, mut vars: Vec<Var>, weights: Vec<f64>, tol: f64) -> Result<Self> {
        if vars.is_empty() {
            return Err(Error::domain("a distribution needs at least one variable"));
        }
        if let Some(v) = vars.iter().find(|v| !scenario.contains(**v)) {
            return Err(Error::domain(format!("unknown variable {v}")));
        }
        vars.sort();
        let before = vars.len();
        vars.dedup();
        if vars.len() != before {
            return Err(Error::domain("duplicate variables"));
        }
        if weights.len() != 1usize << vars.len() {
            return Err(Error::domain(format!(
                "expected {} weights for {} variables, got {}",
                1usize << vars.len(),
                vars.len(),
                weights.len()
            )));
        }
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::domain(format!("weight {i} is not finite")));
        }
        let total = numeric::sum(weights.iter().copied());
        if (total - 1.0).abs() > tol {
            return Err(Error::domain(format!("weights sum to {total}, not 1")));
        }
        Ok(QuasiDistribution { scenario, vars, weights })
    }

    /// Full joint distribution with weights given by `f` on each assignment.
    pub fn from_fn(scenario: Scenario, f: impl Fn(&Assignment) -> f64) -> Result<Self> {
        let n = scenario.n_variables();
        let weights = (0..1usize << n).map(|i| f(&Assignment::from_index(n, i))).collect();
        Self::new(scenario, weights)
    }

    pub fn uniform(scenario: Scenario) -> Self {
        let n = scenario.n_variables();
        let w = 1.0 / (1usize << n) as f64;
        QuasiDistribution {
            vars: scenario.variables(),
            weights: vec![w; 1usize << n],
            scenario,
        }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    /// Variables the distribution ranges over, canonical order; bit `i` of an
    /// index is the outcome of `vars()[i]`.
    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, assignment: &Assignment) -> Result<f64> {
        if assignment.len() != self.vars.len() {
            return Err(Error::domain("assignment length does not match the distribution"));
        }
        Ok(self.weights[assignment.index()])
    }

    pub fn is_full(&self) -> bool {
        self.vars.len() == self.scenario.n_variables()
    }

    pub fn total(&self) -> f64 {
        numeric::sum(self.weights.iter().copied())
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_positive(&self, tol: f64) -> bool {
        self.min_weight() >= -tol
    }

    fn bit_of(&self, v: Var) -> Result<usize> {
        self.vars
            .binary_search(&v)
            .map_err(|_| Error::domain(format!("variable {v} is not part of this distribution")))
    }

    /// Sums out every variable not in `keep`.
    pub fn marginal(&self, keep: &[Var]) -> Result<QuasiDistribution> {
        if keep.is_empty() {
            return Err(Error::domain("marginal needs at least one variable to keep"));
        }
        let mut kept: Vec<Var> = keep.to_vec();
        kept.sort();
        kept.dedup();
        let bits = kept.iter().map(|&v| self.bit_of(v)).collect::<Result<Vec<_>>>()?;

        let mut out = vec![0.0; 1usize << kept.len()];
        for (idx, &w) in self.weights.iter().enumerate() {
            let target = bits
                .iter()
                .enumerate()
                .fold(0usize, |acc, (j, &b)| acc | (((idx >> b) & 1) << j));
            out[target] += w;
        }
        Ok(QuasiDistribution {
            scenario: self.scenario.clone(),
            vars: kept,
            weights: out,
        })
    }

    /// Expectation of the product of the chosen outcomes; at most one setting
    /// per party.
    pub fn correlation(&self, choice: &[Var]) -> Result<f64> {
        let mask = self.choice_mask(choice)?;
        Ok(numeric::sum(
            self.weights.iter().enumerate().map(|(i, &w)| parity_sign(i, mask) * w),
        ))
    }

    fn choice_mask(&self, choice: &[Var]) -> Result<usize> {
        if choice.is_empty() {
            return Err(Error::domain("correlation needs a non-empty choice"));
        }
        let mut parties: Vec<usize> = choice.iter().map(|v| v.party).collect();
        parties.sort_unstable();
        if parties.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::domain("at most one setting per party may be chosen"));
        }
        choice.iter().try_fold(0usize, |mask, &v| Ok(mask | (1 << self.bit_of(v)?)))
    }

    /// Processes the outcomes of `party` (1-based) with the column-stochastic
    /// matrix `w`: `q(α, rest) = Σ_a w(α|a) p(a, rest)`.
    ///
    /// The party's local index uses the same bit layout as the global one,
    /// setting 1 in the lowest bit.
    pub fn apply_local_process(&self, party: usize, w: &QuasiStochasticMatrix) -> Result<QuasiDistribution> {
        if party == 0 || party > self.scenario.n_parties() {
            return Err(Error::domain(format!("party {party} is not in the scenario")));
        }
        let m = self.scenario.settings()[party - 1];
        let first = self.bit_of(Var::new(party, 1))?;
        for s in 2..=m {
            if self.bit_of(Var::new(party, s))? != first + s - 1 {
                return Err(Error::domain("party settings are not contiguous"));
            }
        }
        let dim = 1usize << m;
        if w.dim() != dim {
            return Err(Error::domain(format!(
                "party {party} needs a {dim}x{dim} process, got {0}x{0}",
                w.dim()
            )));
        }
        if !w.is_column_stochastic(TOL) {
            return Err(Error::domain("local process columns must sum to one"));
        }

        let local_mask = (dim - 1) << first;
        let mut out = vec![0.0; self.weights.len()];
        for (idx, &p) in self.weights.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let a = (idx & local_mask) >> first;
            let rest = idx & !local_mask;
            for alpha in 0..dim {
                out[rest | (alpha << first)] += w.get(alpha, a) * p;
            }
        }
        Ok(QuasiDistribution {
            scenario: self.scenario.clone(),
            vars: self.vars.clone(),
            weights: out,
        })
    }

    /// Largest entrywise difference; `None` when the variable sets differ.
    pub fn max_abs_diff(&self, other: &QuasiDistribution) -> Option<f64> {
        (self.vars == other.vars).then(|| {
            self.weights
                .iter()
                .zip(&other.weights)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
    }

    pub fn to_file(&self) -> DistributionFile {
        DistributionFile {
            parties: self.scenario.settings().to_vec(),
            vars: (!self.is_full()).then(|| self.vars.clone()),
            weights: self.weights.clone(),
        }
    }

    pub fn from_file(file: DistributionFile, tol: f64) -> Result<Self> {
        let scenario = Scenario::new(file.parties)?;
        match file.vars {
            Some(vars) => Self::over(scenario, vars, file.weights, tol),
            None => Self::with_tolerance(scenario, file.weights, tol),
        }
    }
}

/// JSON form: `{"parties":[M_1,…], "weights":[…]}`; marginals also carry
/// `"vars":[[party,setting],…]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionFile {
    pub parties: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vars: Option<Vec<Var>>,
    pub weights: Vec<f64>,
}

/// Local-realistic CHSH distribution saturating the classical bound.
pub fn chsh_lhv_jpd() -> QuasiDistribution {
    chsh_quasi_jpd(1.0).expect("eta = 1 is valid")
}

/// `(1/16)[1 + (η/2)(a¹₁a²₁ + a¹₁a²₂ + a¹₂a²₁ − a¹₂a²₂)]`; CHSH value `2η`.
pub fn chsh_quasi_jpd(eta: f64) -> Result<QuasiDistribution> {
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(Error::domain(format!("eta must be finite and non-negative, got {eta}")));
    }
    let scenario = Scenario::uniform(2, 2)?;
    QuasiDistribution::from_fn(scenario, |a| {
        let v = a.values();
        let (a11, a12, a21, a22) = (v[0] as f64, v[1] as f64, v[2] as f64, v[3] as f64);
        (1.0 + 0.5 * eta * (a11 * a21 + a11 * a22 + a12 * a21 - a12 * a22)) / 16.0
    })
}

/// Mermin polynomial `M_N = Im Π_k (a^k_1 + i a^k_2)`, evaluated exactly.
///
/// `values` holds `a^1_1, a^1_2, a^2_1, …`.
pub fn mermin_polynomial(values: &[i8]) -> i64 {
    let (mut re, mut im) = (1i64, 0i64);
    for pair in values.chunks_exact(2) {
        let (x, y) = (pair[0] as i64, pair[1] as i64);
        (re, im) = (re * x - im * y, re * y + im * x);
    }
    im
}

/// Mermin observable of an assignment with two settings per party.
pub fn mermin_observable(assignment: &Assignment, n: usize) -> Result<f64> {
    if assignment.len() != 2 * n {
        return Err(Error::domain(format!(
            "a {n}-party Mermin assignment has {} outcomes, got {}",
            2 * n,
            assignment.len()
        )));
    }
    Ok(mermin_polynomial(assignment.values()) as f64)
}

fn mermin_guard(n: usize) -> Result<Scenario> {
    if !(2..=MAX_MERMIN_PARTIES).contains(&n) {
        return Err(Error::size(format!("Mermin JPD needs 2 <= N <= {MAX_MERMIN_PARTIES}, got {n}")));
    }
    Scenario::uniform(n, 2)
}

/// `(1/2^{2N})(1 + M_N/C_N)` for every `N`.
///
/// Positive, but for even `N` its Mermin value is only `C_N / 2` because
/// `M_N` vanishes on half of the assignments.
pub fn mermin_jpd_linear(n: usize) -> Result<QuasiDistribution> {
    let scenario = mermin_guard(n)?;
    let c = bell::mermin_classical_bound(n);
    let norm = (1usize << (2 * n)) as f64;
    QuasiDistribution::from_fn(scenario, |a| (1.0 + mermin_polynomial(a.values()) as f64 / c) / norm)
}

/// Positive joint distribution whose Mermin value equals the classical
/// bound `C_N`.
///
/// Odd `N`: the linear form `(1/2^{2N})(1 + M_N/C_N)`. Even `N`: `M_N` only
/// takes the values `0, ±C_N` and the linear form reaches `C_N / 2`, so the
/// weight is spread uniformly over the assignments with `M_N = C_N`
/// (`(1/2^{2N})(1 + M_N/C_N)·2(M_N/C_N)^2`).
pub fn mermin_jpd(n: usize) -> Result<QuasiDistribution> {
    if n % 2 == 1 {
        return mermin_jpd_linear(n);
    }
    let scenario = mermin_guard(n)?;
    let c = bell::mermin_classical_bound(n);
    let norm = (1usize << (2 * n)) as f64;
    QuasiDistribution::from_fn(scenario, |a| {
        let r = mermin_polynomial(a.values()) as f64 / c;
        (1.0 + r) * 2.0 * r * r / norm
    })
}
