//! Birkhoff-von Neumann decompositions and nebit negativity.
//!
//! A quasi-bistochastic matrix `W` (rows and columns sum to one, entries of
//! any sign) is a signed combination of permutation matrices
//! `W = Σ q_i Π_i` with `Σ q_i = 1`. Splitting the weights by sign gives
//! `W = (1 + Δ) W⁺ − Δ W⁻` with `W±` positive bistochastic: apply `W⁺`
//! when a nebit reads 0 (probability `1 + Δ`), `W⁻` when it reads 1
//! (probability `−Δ`). `Δ` is the nebit's negativity.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::lp::{self, LinearProgram, LpStatus};
use crate::{Error, Result};

/// Tolerance on row and column sums of matrices fed to the decompositions.
pub const BISTOCHASTIC_TOL: f64 = 1e-9;

/// Default dimension cap of the exact (all-permutations) LP.
pub const DEFAULT_EXACT_DIM: usize = 6;

/// Hard cap of the exact LP: `8! = 40320` permutations.
pub const MAX_EXACT_DIM: usize = 8;

/// Largest dimension accepted by the matching-based decompositions.
pub const MAX_DIM: usize = 256;

/// Square real matrix `W(row|col)`; column-stochastic when columns sum to
/// one, bistochastic when rows do too. Entries may be negative.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiStochasticMatrix {
    d: usize,
    entries: Vec<f64>,
}

impl QuasiStochasticMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let d = rows.len();
        if d == 0 {
            return Err(Error::domain("matrix must have at least one row"));
        }
        if let Some(i) = rows.iter().position(|r| r.len() != d) {
            return Err(Error::domain(format!("row {i} has {} entries, expected {d}", rows[i].len())));
        }
        let entries: Vec<f64> = rows.into_iter().flatten().collect();
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("matrix entries must be finite"));
        }
        Ok(QuasiStochasticMatrix { d, entries })
    }

    pub fn from_fn(d: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let entries = (0..d * d).map(|k| f(k / d, k % d)).collect();
        QuasiStochasticMatrix { d, entries }
    }

    pub fn identity(d: usize) -> Self {
        Self::from_fn(d, |r, c| if r == c { 1.0 } else { 0.0 })
    }

    /// Every entry `1/d`.
    pub fn uniform(d: usize) -> Self {
        Self::from_fn(d, |_, _| 1.0 / d as f64)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.d + col]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.d).map(|r| r.to_vec()).collect()
    }

    pub fn min_entry(&self) -> f64 {
        self.entries.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `δ = max{0, −min entry}`, a lower bound on any decomposition's
    /// negativity.
    pub fn negativity_lower_bound(&self) -> f64 {
        (-self.min_entry()).max(0.0)
    }

    pub fn is_nonnegative(&self, tol: f64) -> bool {
        self.min_entry() >= -tol
    }

    pub fn is_column_stochastic(&self, tol: f64) -> bool {
        (0..self.d).all(|c| ((0..self.d).map(|r| self.get(r, c)).sum::<f64>() - 1.0).abs() <= tol)
    }

    pub fn is_row_stochastic(&self, tol: f64) -> bool {
        self.entries.chunks(self.d).all(|r| (r.iter().sum::<f64>() - 1.0).abs() <= tol)
    }

    pub fn is_bistochastic(&self, tol: f64) -> bool {
        self.is_column_stochastic(tol) && self.is_row_stochastic(tol)
    }

    /// Largest deviation of a row or column sum from one.
    pub fn stochasticity_error(&self) -> f64 {
        let d = self.d;
        let rows = self.entries.chunks(d).map(|r| (r.iter().sum::<f64>() - 1.0).abs());
        let cols = (0..d).map(|c| ((0..d).map(|r| self.get(r, c)).sum::<f64>() - 1.0).abs());
        rows.chain(cols).fold(0.0, f64::max)
    }

    pub fn matmul(&self, other: &QuasiStochasticMatrix) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::domain(format!("cannot multiply {0}x{0} by {1}x{1}", self.d, other.d)));
        }
        let d = self.d;
        Ok(Self::from_fn(d, |r, c| (0..d).map(|k| self.get(r, k) * other.get(k, c)).sum()))
    }

    /// Kronecker product; `self` indexes the most significant block.
    pub fn kron(&self, other: &QuasiStochasticMatrix) -> Self {
        let e = other.d;
        Self::from_fn(self.d * e, |r, c| self.get(r / e, c / e) * other.get(r % e, c % e))
    }

    /// `Σ_col W(row|col) p(col)`.
    pub fn apply(&self, p: &[f64]) -> Result<Vec<f64>> {
        if p.len() != self.d {
            return Err(Error::domain(format!("vector of length {} for a {1}x{1} matrix", p.len(), self.d)));
        }
        Ok(self.entries.chunks(self.d).map(|r| r.iter().zip(p).map(|(w, x)| w * x).sum()).collect())
    }

    pub fn max_abs_diff(&self, other: &QuasiStochasticMatrix) -> f64 {
        if self.d != other.d {
            return f64::INFINITY;
        }
        self.entries.iter().zip(&other.entries).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    fn require_bistochastic(&self) -> Result<()> {
        let err = self.stochasticity_error();
        if err > BISTOCHASTIC_TOL {
            return Err(Error::domain(format!(
                "matrix is not bistochastic (row/column sum off by {err:e})"
            )));
        }
        Ok(())
    }

    pub fn to_file(&self) -> MatrixFile {
        MatrixFile { d: self.d, rows: self.rows() }
    }

    pub fn from_file(file: MatrixFile) -> Result<Self> {
        if file.rows.len() != file.d {
            return Err(Error::domain(format!(
                "field `rows`: {} rows but `d` is {}",
                file.rows.len(),
                file.d
            )));
        }
        Self::from_rows(file.rows).map_err(|e| match e {
            Error::Domain(m) => Error::domain(format!("field `rows`: {m}")),
            other => other,
        })
    }
}

/// JSON form `{"d":…, "rows":[[…],…]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub d: usize,
    pub rows: Vec<Vec<f64>>,
}

/// Permutation matrix stored as the row index of the single one in each
/// column.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PermutationMatrix {
    image: Vec<usize>,
}

impl PermutationMatrix {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let d = image.len();
        let mut seen = vec![false; d];
        for &r in &image {
            if r >= d || seen[r] {
                return Err(Error::domain(format!("{image:?} is not a permutation of 0..{d}")));
            }
            seen[r] = true;
        }
        Ok(PermutationMatrix { image })
    }

    pub fn identity(d: usize) -> Self {
        PermutationMatrix { image: (0..d).collect() }
    }

    /// `k ↦ k + shift mod d`.
    pub fn cyclic_shift(d: usize, shift: usize) -> Self {
        PermutationMatrix { image: (0..d).map(|k| (k + shift) % d).collect() }
    }

    /// `k ↦ k ⊕ mask`; `d` must be a power of two and `mask < d`.
    pub fn xor_shift(d: usize, mask: usize) -> Self {
        debug_assert!(d.is_power_of_two() && mask < d);
        PermutationMatrix { image: (0..d).map(|k| k ^ mask).collect() }
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn dim(&self) -> usize {
        self.image.len()
    }

    pub fn to_matrix(&self) -> QuasiStochasticMatrix {
        QuasiStochasticMatrix::from_fn(self.dim(), |r, c| if self.image[c] == r { 1.0 } else { 0.0 })
    }

    /// All `d!` permutations in lexicographic order of their images.
    pub fn all(d: usize) -> Vec<PermutationMatrix> {
        let mut current: Vec<usize> = (0..d).collect();
        let mut out = vec![PermutationMatrix { image: current.clone() }];
        loop {
            // next lexicographic permutation
            let Some(i) = (1..d).rev().find(|&i| current[i - 1] < current[i]) else {
                return out;
            };
            let j = (i..d).rev().find(|&j| current[j] > current[i - 1]).expect("successor exists");
            current.swap(i - 1, j);
            current[i..].reverse();
            out.push(PermutationMatrix { image: current.clone() });
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BvnTerm {
    pub weight: f64,
    pub perm: PermutationMatrix,
}

/// `Σ q_i Π_i` with real weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedBvnDecomposition {
    d: usize,
    terms: Vec<BvnTerm>,
    n_plus: f64,
    n_minus: f64,
}

impl SignedBvnDecomposition {
    /// Collects `terms`, summing weights of repeated permutations (first
    /// occurrence keeps its position) and dropping zero weights.
    pub fn from_terms(d: usize, terms: impl IntoIterator<Item = BvnTerm>) -> Result<Self> {
        let mut merged: Vec<BvnTerm> = Vec::new();
        for t in terms {
            if t.perm.dim() != d {
                return Err(Error::domain(format!("permutation of size {} in a {d}x{d} decomposition", t.perm.dim())));
            }
            if !t.weight.is_finite() {
                return Err(Error::domain("decomposition weights must be finite"));
            }
            match merged.iter_mut().find(|m| m.perm == t.perm) {
                Some(m) => m.weight += t.weight,
                None => merged.push(t),
            }
        }
        merged.retain(|t| t.weight.abs() > 1e-15);
        let n_plus = merged.iter().map(|t| t.weight).filter(|&w| w > 0.0).sum();
        let n_minus = merged.iter().map(|t| t.weight).filter(|&w| w < 0.0).sum();
        Ok(SignedBvnDecomposition { d, terms: merged, n_plus, n_minus })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> &[BvnTerm] {
        &self.terms
    }

    /// Sum of positive weights, `1 + Δ`.
    pub fn n_plus(&self) -> f64 {
        self.n_plus
    }

    /// Sum of negative weights, `−Δ`.
    pub fn n_minus(&self) -> f64 {
        self.n_minus
    }

    /// Nebit negativity `Δ = |n⁻|`.
    pub fn delta(&self) -> f64 {
        -self.n_minus
    }

    pub fn weight_sum(&self) -> f64 {
        self.n_plus + self.n_minus
    }

    pub fn reconstruct(&self) -> QuasiStochasticMatrix {
        let d = self.d;
        let mut entries = vec![0.0; d * d];
        for t in &self.terms {
            for (c, &r) in t.perm.image().iter().enumerate() {
                entries[r * d + c] += t.weight;
            }
        }
        QuasiStochasticMatrix { d, entries }
    }

    /// `‖Σ q_i Π_i − W‖∞`.
    pub fn reconstruction_error(&self, w: &QuasiStochasticMatrix) -> f64 {
        self.reconstruct().max_abs_diff(w)
    }

    pub fn to_file(&self) -> DecompositionFile {
        DecompositionFile {
            delta: self.delta(),
            terms: self
                .terms
                .iter()
                .map(|t| DecompositionTermFile { weight: t.weight, perm: t.perm.image().to_vec() })
                .collect(),
        }
    }

    pub fn from_file(file: DecompositionFile) -> Result<Self> {
        let d = file
            .terms
            .first()
            .map(|t| t.perm.len())
            .ok_or_else(|| Error::domain("field `terms`: empty decomposition"))?;
        let terms = file
            .terms
            .into_iter()
            .enumerate()
            .map(|(i, t)| {
                let perm = PermutationMatrix::new(t.perm)
                    .map_err(|e| Error::domain(format!("field `terms[{i}].perm`: {e}")))?;
                Ok(BvnTerm { weight: t.weight, perm })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(d, terms)
    }
}

/// JSON form `{"delta":…, "terms":[{"weight":…, "perm":[…]},…]}`; `perm`
/// lists the row of the one in each column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionFile {
    pub delta: f64,
    pub terms: Vec<DecompositionTermFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionTermFile {
    pub weight: f64,
    pub perm: Vec<usize>,
}

/// A quasi-probabilistic bit: 0 with probability `1 + Δ`, 1 with `−Δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nebit {
    pub delta: f64,
}

impl Nebit {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::domain(format!("nebit negativity must be >= 0, got {delta}")));
        }
        Ok(Nebit { delta })
    }

    pub fn p0(&self) -> f64 {
        1.0 + self.delta
    }

    pub fn p1(&self) -> f64 {
        -self.delta
    }
}

/// "Apply `w_plus` with probability `1 + Δ`, `w_minus` with `−Δ`."
#[derive(Debug, Clone, PartialEq)]
pub struct ControlledProcess {
    pub delta: f64,
    pub w_plus: QuasiStochasticMatrix,
    pub w_minus: QuasiStochasticMatrix,
}

impl ControlledProcess {
    pub fn nebit(&self) -> Nebit {
        Nebit { delta: self.delta }
    }

    /// `(1 + Δ) W⁺ − Δ W⁻`.
    pub fn reconstruct(&self) -> QuasiStochasticMatrix {
        let d = self.w_plus.dim();
        QuasiStochasticMatrix::from_fn(d, |r, c| {
            (1.0 + self.delta) * self.w_plus.get(r, c) - self.delta * self.w_minus.get(r, c)
        })
    }
}

/// Splits a decomposition by weight sign into `W⁺` and `W⁻`; `W⁻` is the
/// identity when there are no negative weights.
pub fn to_controlled_process(dec: &SignedBvnDecomposition) -> ControlledProcess {
    let d = dec.dim();
    let average = |positive: bool, total: f64| {
        if total == 0.0 {
            return QuasiStochasticMatrix::identity(d);
        }
        let part = SignedBvnDecomposition {
            d,
            terms: dec
                .terms
                .iter()
                .filter(|t| (t.weight > 0.0) == positive)
                .map(|t| BvnTerm { weight: t.weight / total, perm: t.perm.clone() })
                .collect(),
            n_plus: 1.0,
            n_minus: 0.0,
        };
        part.reconstruct()
    };
    ControlledProcess {
        delta: dec.delta(),
        w_plus: average(true, dec.n_plus()),
        w_minus: average(false, dec.n_minus()),
    }
}

/// Perfect matching of columns to rows using only `allowed(row, col)`
/// edges; returns the row matched to each column. Kuhn's augmenting paths,
/// rows and candidate columns visited in increasing order.
fn perfect_matching(d: usize, allowed: impl Fn(usize, usize) -> bool) -> Option<Vec<usize>> {
    fn augment(
        row: usize,
        d: usize,
        allowed: &dyn Fn(usize, usize) -> bool,
        seen: &mut [bool],
        row_of_col: &mut [Option<usize>],
    ) -> bool {
        for col in 0..d {
            if !allowed(row, col) || seen[col] {
                continue;
            }
            seen[col] = true;
            let free = match row_of_col[col] {
                None => true,
                Some(other) => augment(other, d, allowed, seen, row_of_col),
            };
            if free {
                row_of_col[col] = Some(row);
                return true;
            }
        }
        false
    }

    let mut row_of_col = vec![None; d];
    for row in 0..d {
        let mut seen = vec![false; d];
        if !augment(row, d, &allowed, &mut seen, &mut row_of_col) {
            return None;
        }
    }
    row_of_col.into_iter().collect()
}

/// Birkhoff-von Neumann decomposition of a non-negative bistochastic matrix.
///
/// Each round picks, among perfect matchings on the support `{entries >
/// tol}` (`tol` raised to the size of the input's row and column sum
/// errors), one whose smallest entry is largest (bottleneck matching), and
/// subtracts that entry along the matching. At least one entry is zeroed
/// per round, so fewer than `d²` terms are produced.
pub fn bvn_positive(b: &QuasiStochasticMatrix, tol: f64) -> Result<SignedBvnDecomposition> {
    let d = b.dim();
    if d > MAX_DIM {
        return Err(Error::size(format!("dimension {d} exceeds {MAX_DIM}")));
    }
    if !b.is_nonnegative(tol) {
        return Err(Error::domain(format!("entry {} is below -tol", b.min_entry())));
    }
    b.require_bistochastic()?;
    // row/column sums off by ε leave residuals of order dε; treat them as zero
    let tol = tol.max(4.0 * d as f64 * b.stochasticity_error());

    let mut residual: Vec<f64> = b.entries.iter().map(|&v| v.max(0.0)).collect();
    let mut terms = Vec::new();
    for _ in 0..d * d {
        if residual.iter().all(|&v| v <= tol) {
            break;
        }
        let mut levels: Vec<f64> = residual.iter().copied().filter(|&v| v > tol).collect();
        levels.sort_by(|a, b| b.total_cmp(a));
        levels.dedup();
        let matches_at = |k: usize| perfect_matching(d, |r, c| residual[r * d + c] >= levels[k]);

        // smallest k (largest threshold) admitting a perfect matching
        if matches_at(levels.len() - 1).is_none() {
            return Err(Error::numerical(
                "no perfect matching on the residual support; entries below tolerance broke bistochasticity",
            ));
        }
        let (mut lo, mut hi) = (0usize, levels.len() - 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if matches_at(mid).is_some() {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let image = matches_at(lo).expect("checked above");
        let weight = image.iter().enumerate().map(|(c, &r)| residual[r * d + c]).fold(f64::INFINITY, f64::min);
        for (c, &r) in image.iter().enumerate() {
            let e = &mut residual[r * d + c];
            *e -= weight;
            if *e <= tol {
                *e = 0.0;
            }
        }
        terms.push(BvnTerm { weight, perm: PermutationMatrix { image } });
    }
    if residual.iter().any(|&v| v > tol) {
        return Err(Error::numerical("decomposition did not terminate within d^2 rounds"));
    }
    SignedBvnDecomposition::from_terms(d, terms)
}

/// Permutations covering the all-ones matrix exactly once: `k ↦ k ⊕ j`
/// when `d` is a power of two (the outcome sign-flip group), otherwise the
/// cyclic shifts `k ↦ k + j`.
pub fn ones_cover(d: usize) -> Vec<PermutationMatrix> {
    if d.is_power_of_two() {
        (0..d).map(|j| PermutationMatrix::xor_shift(d, j)).collect()
    } else {
        (0..d).map(|j| PermutationMatrix::cyclic_shift(d, j)).collect()
    }
}

/// Signed decomposition of a quasi-bistochastic matrix through the positive
/// matrix `B = (W + δ𝟙)/(1 + dδ)`: `W = (1 + dδ) B − δ 𝟙` with both `B`
/// and `𝟙` expanded into permutations and duplicates merged. The result's
/// negativity lies between `δ` and `dδ`.
pub fn generalized_bvn(w: &QuasiStochasticMatrix) -> Result<SignedBvnDecomposition> {
    w.require_bistochastic()?;
    let d = w.dim();
    let delta = w.negativity_lower_bound();
    if delta == 0.0 {
        return bvn_positive(w, 1e-12);
    }
    let scale = 1.0 + d as f64 * delta;
    let b = QuasiStochasticMatrix::from_fn(d, |r, c| (w.get(r, c) + delta) / scale);
    let positive = bvn_positive(&b, 1e-12)?;
    let terms = positive
        .terms
        .into_iter()
        .map(|t| BvnTerm { weight: scale * t.weight, perm: t.perm })
        .chain(ones_cover(d).into_iter().map(|perm| BvnTerm { weight: -delta, perm }));
    SignedBvnDecomposition::from_terms(d, terms)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NegativityMode {
    /// LP over all `d!` permutations.
    Exact,
    /// [`generalized_bvn`].
    Heuristic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimalNegativity {
    pub delta: f64,
    /// `max{0, −min entry}`.
    pub lower_bound: f64,
    pub decomposition: SignedBvnDecomposition,
    pub mode: NegativityMode,
}

/// Smallest nebit negativity over signed decompositions of `w`, with the
/// default exact-mode cap of [`DEFAULT_EXACT_DIM`].
pub fn minimal_negativity(w: &QuasiStochasticMatrix, mode: NegativityMode) -> Result<MinimalNegativity> {
    minimal_negativity_capped(w, mode, DEFAULT_EXACT_DIM)
}

/// As [`minimal_negativity`] with an explicit exact-mode dimension cap
/// (at most [`MAX_EXACT_DIM`]).
pub fn minimal_negativity_capped(
    w: &QuasiStochasticMatrix,
    mode: NegativityMode,
    cap: usize,
) -> Result<MinimalNegativity> {
    w.require_bistochastic()?;
    let lower_bound = w.negativity_lower_bound();
    match mode {
        NegativityMode::Heuristic => {
            let decomposition = generalized_bvn(w)?;
            Ok(MinimalNegativity { delta: decomposition.delta(), lower_bound, decomposition, mode })
        }
        NegativityMode::Exact => {
            if cap > MAX_EXACT_DIM {
                return Err(Error::size(format!("exact cap {cap} exceeds {MAX_EXACT_DIM}")));
            }
            if w.dim() > cap {
                return Err(Error::size(format!(
                    "exact minimal negativity needs d <= {cap}, got d = {}",
                    w.dim()
                )));
            }
            let (delta, decomposition) = exact_min_negativity(w)?;
            Ok(MinimalNegativity { delta, lower_bound, decomposition, mode })
        }
    }
}

/// Row of entry `(r, c)` in the decomposition LPs; row `d²` is the weight
/// normalisation.
pub(crate) fn entry_row(d: usize, r: usize, c: usize) -> usize {
    r * d + c
}

/// Adds the `q⁺`/`q⁻` column pair of every permutation to `lp`: cost 0 and 1,
/// `±1` on the permutation's entries and on the normalisation row.
pub(crate) fn add_permutation_columns(lp: &mut LinearProgram, perms: &[PermutationMatrix]) -> Result<usize> {
    let first = lp.n_cols();
    let d = perms.first().map_or(0, |p| p.dim());
    let mut entries = Vec::with_capacity(d + 1);
    for p in perms {
        for sign in [1.0, -1.0] {
            entries.clear();
            entries.extend(p.image().iter().enumerate().map(|(c, &r)| (entry_row(d, r, c), sign)));
            entries.push((d * d, sign));
            lp.add_column(if sign > 0.0 { 0.0 } else { 1.0 }, &entries)?;
        }
    }
    Ok(first)
}

pub(crate) fn decomposition_from_lp(
    d: usize,
    perms: &[PermutationMatrix],
    x: &[f64],
    first: usize,
) -> Result<SignedBvnDecomposition> {
    let terms = perms.iter().enumerate().filter_map(|(i, p)| {
        let q = x[first + 2 * i] - x[first + 2 * i + 1];
        (q.abs() > 1e-14).then(|| BvnTerm { weight: q, perm: p.clone() })
    });
    SignedBvnDecomposition::from_terms(d, terms)
}

fn exact_min_negativity(w: &QuasiStochasticMatrix) -> Result<(f64, SignedBvnDecomposition)> {
    let d = w.dim();
    let perms = PermutationMatrix::all(d);
    let mut rhs = w.entries.clone();
    rhs.push(1.0);
    let mut lp = LinearProgram::new(rhs);
    let first = add_permutation_columns(&mut lp, &perms)?;
    let sol = lp::solve(&lp, lp::DEFAULT_TOL)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::numerical(format!("minimal-negativity LP ended {:?}", sol.status)));
    }
    let dec = decomposition_from_lp(d, &perms, &sol.x, first)?;
    Ok((sol.objective, dec))
}

/// Random quasi-bistochastic matrix: a random convex mixture of
/// permutations plus a random signed combination of differences
/// `Π_a − Π_b`, which leave every row and column sum unchanged.
pub fn random_quasi_bistochastic<R: Rng + ?Sized>(d: usize, rng: &mut R) -> QuasiStochasticMatrix {
    let random_perm = |rng: &mut R| {
        let mut image: Vec<usize> = (0..d).collect();
        image.shuffle(rng);
        PermutationMatrix { image }
    };
    let n_mix = rng.gen_range(1..=d + 2);
    let raw: Vec<f64> = (0..n_mix).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut terms: Vec<BvnTerm> = raw
        .iter()
        .map(|w| BvnTerm { weight: w / total, perm: random_perm(rng) })
        .collect();
    for _ in 0..rng.gen_range(1..=3) {
        let c = rng.gen_range(-0.6..0.6);
        terms.push(BvnTerm { weight: c, perm: random_perm(rng) });
        terms.push(BvnTerm { weight: -c, perm: random_perm(rng) });
    }
    let mut entries = vec![0.0; d * d];
    for t in &terms {
        for (c, &r) in t.perm.image().iter().enumerate() {
            entries[r * d + c] += t.weight;
        }
    }
    QuasiStochasticMatrix { d, entries }
}
