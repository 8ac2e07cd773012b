//! Bell functionals built from full-body correlations.

use serde::{Deserialize, Serialize};

use crate::dist::{QuasiDistribution, Var};
use crate::{Error, Result};

/// `coef · ⟨Π outcomes of choice⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub coef: f64,
    pub choice: Vec<Var>,
}

/// Linear combination of correlations together with its classical,
/// quantum and (optionally) no-signalling bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BellFunctional {
    pub terms: Vec<Term>,
    pub classical: f64,
    pub quantum: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ns: Option<f64>,
}

/// Local-realistic Mermin bound: `2^{N/2}` for even `N`, `2^{(N-1)/2}` for odd.
pub fn mermin_classical_bound(n: usize) -> f64 {
    2f64.powi((n / 2) as i32)
}

/// Quantum Mermin bound `2^{N-1}`, reached by the GHZ state.
pub fn mermin_quantum_bound(n: usize) -> f64 {
    2f64.powi(n as i32 - 1)
}

impl BellFunctional {
    pub fn new(terms: Vec<Term>, classical: f64, quantum: f64, ns: Option<f64>) -> Result<Self> {
        let f = BellFunctional { terms, classical, quantum, ns };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if self.terms.is_empty() {
            return Err(Error::domain("a Bell functional needs at least one term"));
        }
        for (i, t) in self.terms.iter().enumerate() {
            if !t.coef.is_finite() {
                return Err(Error::domain(format!("term {i}: coefficient is not finite")));
            }
            if t.choice.is_empty() {
                return Err(Error::domain(format!("term {i}: empty choice")));
            }
            let mut parties: Vec<usize> = t.choice.iter().map(|v| v.party).collect();
            parties.sort_unstable();
            if parties.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::domain(format!("term {i}: two settings of one party")));
            }
        }
        if self.classical > self.quantum {
            return Err(Error::domain("classical bound exceeds quantum bound"));
        }
        if let Some(ns) = self.ns {
            if self.quantum > ns {
                return Err(Error::domain("quantum bound exceeds no-signalling bound"));
            }
        }
        Ok(())
    }

    /// `Σ coef · correlation(choice)`.
    pub fn evaluate(&self, dist: &QuasiDistribution) -> Result<f64> {
        self.terms
            .iter()
            .map(|t| Ok(t.coef * dist.correlation(&t.choice)?))
            .sum()
    }

    /// Value on the deterministic assignment `values` (canonical order over
    /// the variables of `vars`).
    pub fn value_on(&self, vars: &[Var], values: &[i8]) -> Result<f64> {
        self.terms
            .iter()
            .map(|t| {
                t.choice.iter().try_fold(t.coef, |acc, v| {
                    let i = vars
                        .iter()
                        .position(|w| w == v)
                        .ok_or_else(|| Error::domain(format!("unknown variable {v}")))?;
                    Ok(acc * values[i] as f64)
                })
            })
            .sum()
    }

    /// Whether every term involves `party` exactly once.
    pub fn uses_party_in_every_term(&self, party: usize) -> bool {
        self.terms.iter().all(|t| t.choice.iter().filter(|v| v.party == party).count() == 1)
    }
}

/// `T₁₁ + T₁₂ + T₂₁ − T₂₂` with bounds 2, 2√2 and 4.
pub fn chsh() -> BellFunctional {
    let term = |coef, s1, s2| Term {
        coef,
        choice: vec![Var::new(1, s1), Var::new(2, s2)],
    };
    BellFunctional {
        terms: vec![term(1.0, 1, 1), term(1.0, 1, 2), term(1.0, 2, 1), term(-1.0, 2, 2)],
        classical: 2.0,
        quantum: 2.0 * 2f64.sqrt(),
        ns: Some(4.0),
    }
}

/// Expansion of `M_N = Im Π_k (a^k_1 + i a^k_2)` into `2^{N-1}` full-body
/// correlations with coefficients `±1`.
///
/// Terms are listed by setting tuple in lexicographic order (party 1 slowest).
/// The no-signalling bound is the algebraic maximum, the number of terms.
pub fn mermin(n: usize) -> Result<BellFunctional> {
    if n < 2 {
        return Err(Error::domain(format!("Mermin functional needs N >= 2, got {n}")));
    }
    if n > crate::dist::MAX_VARIABLES / 2 {
        return Err(Error::size(format!("Mermin functional with N = {n} exceeds the variable guard")));
    }
    let mut terms = Vec::with_capacity(1 << (n - 1));
    for code in 0..1usize << n {
        // bit (n-1-k) of code selects setting 2 for party k+1
        let seconds = code.count_ones();
        if seconds % 2 == 0 {
            continue;
        }
        // Im(i^m) = +1 for m ≡ 1, -1 for m ≡ 3 (mod 4)
        let coef: i32 = if seconds % 4 == 1 { 1 } else { -1 };
        let choice = (0..n)
            .map(|k| Var::new(k + 1, 1 + ((code >> (n - 1 - k)) & 1)))
            .collect();
        terms.push(Term { coef: coef as f64, choice });
    }
    let algebraic = terms.len() as f64;
    Ok(BellFunctional {
        terms,
        classical: mermin_classical_bound(n),
        quantum: mermin_quantum_bound(n),
        ns: Some(algebraic),
    })
}
