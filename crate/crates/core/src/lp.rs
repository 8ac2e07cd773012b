//! Dense revised simplex for `min cᵀx  s.t.  A x = b, x ≥ 0`.
//!
//! Columns are stored sparsely (the decomposition LPs have one column per
//! permutation with `d + 1` non-zeros); the basis inverse is a dense
//! `m × m` matrix updated by elementary row operations and rebuilt by
//! Gauss-Jordan elimination every [`REFACTOR_EVERY`] pivots.
//!
//! Phase one starts from an all-artificial basis. Pricing is Dantzig's
//! most-negative reduced cost; after [`STALL_LIMIT`] consecutive degenerate
//! pivots the solver switches to Bland's rule until the objective moves
//! again. Every tie is broken by the lowest variable index, so a fixed
//! input always yields bitwise-identical output.

use crate::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-9;

const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 50;
const STALL_LIMIT: usize = 50;
const TIE_EPS: f64 = 1e-12;

/// Standard-form linear program with column-major sparse constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    rhs: Vec<f64>,
    costs: Vec<f64>,
    col_start: Vec<usize>,
    rows: Vec<usize>,
    values: Vec<f64>,
}

impl LinearProgram {
    /// Empty program with right-hand side `rhs` and no columns.
    pub fn new(rhs: Vec<f64>) -> Self {
        LinearProgram {
            rhs,
            costs: Vec::new(),
            col_start: vec![0],
            rows: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Appends a variable with objective coefficient `cost` and constraint
    /// entries `(row, value)`; returns its index.
    pub fn add_column(&mut self, cost: f64, entries: &[(usize, f64)]) -> Result<usize> {
        if let Some(&(r, _)) = entries.iter().find(|(r, _)| *r >= self.rhs.len()) {
            return Err(Error::domain(format!("row {r} out of range for {} constraints", self.rhs.len())));
        }
        for &(r, v) in entries {
            if v != 0.0 {
                self.rows.push(r);
                self.values.push(v);
            }
        }
        self.costs.push(cost);
        self.col_start.push(self.rows.len());
        Ok(self.costs.len() - 1)
    }

    /// Builds a program from a dense row-major constraint matrix.
    pub fn from_dense(costs: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::domain(format!("{} constraint rows but {} right-hand sides", a.len(), b.len())));
        }
        if let Some(i) = a.iter().position(|row| row.len() != costs.len()) {
            return Err(Error::domain(format!("row {i} has {} columns, expected {}", a[i].len(), costs.len())));
        }
        let mut lp = LinearProgram::new(b.to_vec());
        for (j, &c) in costs.iter().enumerate() {
            let entries: Vec<(usize, f64)> = a.iter().enumerate().map(|(i, row)| (i, row[j])).collect();
            lp.add_column(c, &entries)?;
        }
        Ok(lp)
    }

    pub fn n_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn n_cols(&self) -> usize {
        self.costs.len()
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn column(&self, j: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.col_start[j], self.col_start[j + 1]);
        (&self.rows[s..e], &self.values[s..e])
    }

    /// `‖A x − b‖∞`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        let mut ax = vec![0.0; self.n_rows()];
        for (j, &xj) in x.iter().enumerate() {
            let (rows, vals) = self.column(j);
            for (&r, &v) in rows.iter().zip(vals) {
                ax[r] += v * xj;
            }
        }
        ax.iter().zip(&self.rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    fn validate(&self) -> Result<()> {
        if self.rhs.iter().chain(&self.costs).chain(&self.values).any(|v| !v.is_finite()) {
            return Err(Error::domain("linear program data must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal point; meaningful only when `status` is optimal.
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

/// Solves `lp`. `tol` bounds the reduced-cost optimality test and the
/// returned point's feasibility: `‖Ax − b‖∞ ≤ tol·(1 + ‖b‖∞)`.
pub fn solve(lp: &LinearProgram, tol: f64) -> Result<LpSolution> {
    if !(tol > 0.0) {
        return Err(Error::domain("solver tolerance must be positive"));
    }
    lp.validate()?;
    let mut s = Simplex::new(lp, tol);
    s.run()
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

struct Simplex<'a> {
    lp: &'a LinearProgram,
    m: usize,
    n: usize,
    sign: Vec<f64>,
    b: Vec<f64>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    phase_one: bool,
    tol: f64,
    iterations: usize,
    cap: usize,
    since_refactor: usize,
}

impl<'a> Simplex<'a> {
    fn new(lp: &'a LinearProgram, tol: f64) -> Self {
        let m = lp.n_rows();
        let n = lp.n_cols();
        let sign: Vec<f64> = lp.rhs.iter().map(|&b| if b < 0.0 { -1.0 } else { 1.0 }).collect();
        let b: Vec<f64> = lp.rhs.iter().zip(&sign).map(|(b, s)| b * s).collect();
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = 1.0;
        }
        let mut in_basis = vec![false; n + m];
        in_basis[n..].iter_mut().for_each(|x| *x = true);
        Simplex {
            lp,
            m,
            n,
            sign,
            xb: b.clone(),
            b,
            basis: (n..n + m).collect(),
            in_basis,
            binv,
            phase_one: true,
            tol,
            iterations: 0,
            cap: 100 * (m + n).max(1),
            since_refactor: 0,
        }
    }

    fn cost(&self, j: usize) -> f64 {
        match (self.phase_one, j < self.n) {
            (true, true) => 0.0,
            (true, false) => 1.0,
            (false, true) => self.lp.costs[j],
            (false, false) => 0.0,
        }
    }

    /// Dense column `j` of the row-sign-adjusted constraint matrix.
    fn column_dense(&self, j: usize) -> Vec<f64> {
        let mut col = vec![0.0; self.m];
        if j < self.n {
            let (rows, vals) = self.lp.column(j);
            for (&r, &v) in rows.iter().zip(vals) {
                col[r] = v * self.sign[r];
            }
        } else {
            col[j - self.n] = 1.0;
        }
        col
    }

    /// `B⁻¹ a_j`.
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut u = vec![0.0; m];
        if j < self.n {
            let (rows, vals) = self.lp.column(j);
            for i in 0..m {
                let row = &self.binv[i * m..(i + 1) * m];
                u[i] = rows.iter().zip(vals).map(|(&r, &v)| row[r] * v * self.sign[r]).sum();
            }
        } else {
            let r = j - self.n;
            for (i, ui) in u.iter_mut().enumerate() {
                *ui = self.binv[i * m + r];
            }
        }
        u
    }

    /// Simplex multipliers `c_Bᵀ B⁻¹`.
    fn duals(&self) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (i, &bv) in self.basis.iter().enumerate() {
            let c = self.cost(bv);
            if c != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                y.iter_mut().zip(row).for_each(|(yr, &bir)| *yr += c * bir);
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, y: &[f64]) -> f64 {
        let (rows, vals) = self.lp.column(j);
        self.cost(j) - rows.iter().zip(vals).map(|(&r, &v)| y[r] * v * self.sign[r]).sum::<f64>()
    }

    fn choose_entering(&self, bland: bool) -> Option<usize> {
        let y = self.duals();
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.n {
            if self.in_basis[j] {
                continue;
            }
            let d = self.reduced_cost(j, &y);
            if d < -self.tol {
                if bland {
                    return Some(j);
                }
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((j, d));
                }
            }
        }
        best.map(|(j, _)| j)
    }

    fn choose_leaving(&self, u: &[f64]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &ui) in u.iter().enumerate() {
            if ui <= PIVOT_TOL {
                continue;
            }
            let ratio = self.xb[i].max(0.0) / ui;
            best = match best {
                None => Some((i, ratio)),
                Some((bi, br)) => {
                    if ratio < br - TIE_EPS || (ratio <= br + TIE_EPS && self.basis[i] < self.basis[bi]) {
                        Some((i, ratio))
                    } else {
                        Some((bi, br))
                    }
                }
            };
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, p: usize, q: usize, u: &[f64]) {
        let m = self.m;
        let up = u[p];
        let theta = self.xb[p].max(0.0) / up;
        for i in 0..m {
            if i != p {
                self.xb[i] -= theta * u[i];
            }
        }
        self.xb[p] = theta;

        let pivot_row: Vec<f64> = self.binv[p * m..(p + 1) * m].iter().map(|v| v / up).collect();
        for i in 0..m {
            if i == p || u[i] == 0.0 {
                continue;
            }
            let f = u[i];
            let row = &mut self.binv[i * m..(i + 1) * m];
            row.iter_mut().zip(&pivot_row).for_each(|(a, &b)| *a -= f * b);
        }
        self.binv[p * m..(p + 1) * m].copy_from_slice(&pivot_row);

        self.in_basis[self.basis[p]] = false;
        self.in_basis[q] = true;
        self.basis[p] = q;
        self.since_refactor += 1;
    }

    /// Rebuilds `B⁻¹` from scratch and recomputes the basic solution.
    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for (i, &bv) in self.basis.iter().enumerate() {
            let col = self.column_dense(bv);
            for r in 0..m {
                a[r * m + i] = col[r];
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let piv = (c..m)
                .max_by(|&x, &y| a[x * m + c].abs().total_cmp(&a[y * m + c].abs()).then(y.cmp(&x)))
                .expect("non-empty range");
            if a[piv * m + c].abs() < 1e-13 {
                return Err(Error::numerical("basis matrix became singular"));
            }
            if piv != c {
                for k in 0..m {
                    a.swap(piv * m + k, c * m + k);
                    inv.swap(piv * m + k, c * m + k);
                }
            }
            let d = a[c * m + c];
            for k in 0..m {
                a[c * m + k] /= d;
                inv[c * m + k] /= d;
            }
            for r in 0..m {
                let f = a[r * m + c];
                if r != c && f != 0.0 {
                    for k in 0..m {
                        a[r * m + k] -= f * a[c * m + k];
                        inv[r * m + k] -= f * inv[c * m + k];
                    }
                }
            }
        }
        self.binv = inv;
        for i in 0..m {
            self.xb[i] = (0..m).map(|k| self.binv[i * m + k] * self.b[k]).sum();
        }
        self.since_refactor = 0;
        Ok(())
    }

    fn run_phase(&mut self) -> Result<PhaseEnd> {
        let mut bland = false;
        let mut degenerate = 0usize;
        loop {
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            let q = match self.choose_entering(bland) {
                Some(q) => q,
                None if self.since_refactor > 0 => {
                    self.refactor()?;
                    match self.choose_entering(bland) {
                        Some(q) => q,
                        None => return Ok(PhaseEnd::Optimal),
                    }
                }
                None => return Ok(PhaseEnd::Optimal),
            };
            let u = self.ftran(q);
            let Some(p) = self.choose_leaving(&u) else {
                return Ok(PhaseEnd::Unbounded);
            };
            let step = self.xb[p].max(0.0) / u[p];
            self.pivot(p, q, &u);
            self.iterations += 1;
            if self.iterations > self.cap {
                return Err(Error::numerical(format!("simplex exceeded {} iterations", self.cap)));
            }
            if step <= TIE_EPS {
                degenerate += 1;
                if degenerate > STALL_LIMIT {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }
        }
    }

    /// Pivots basic artificials out wherever a structural column can
    /// replace them; rows where none can are redundant and keep their
    /// artificial at zero.
    fn drive_out_artificials(&mut self) {
        let m = self.m;
        for p in 0..m {
            if self.basis[p] < self.n {
                continue;
            }
            let row = self.binv[p * m..(p + 1) * m].to_vec();
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.n {
                if self.in_basis[j] {
                    continue;
                }
                let (rows, vals) = self.lp.column(j);
                let rho: f64 = rows.iter().zip(vals).map(|(&r, &v)| row[r] * v * self.sign[r]).sum();
                if rho.abs() > PIVOT_TOL && best.is_none_or(|(_, b)| rho.abs() > b) {
                    best = Some((j, rho.abs()));
                }
            }
            if let Some((q, _)) = best {
                let u = self.ftran(q);
                let up = u[p];
                // degenerate pivot: the artificial sits at (numerically) zero
                let theta = self.xb[p] / up;
                for i in 0..m {
                    if i != p {
                        self.xb[i] -= theta * u[i];
                    }
                }
                self.xb[p] = theta;
                let pivot_row: Vec<f64> = row.iter().map(|v| v / up).collect();
                for i in 0..m {
                    if i == p || u[i] == 0.0 {
                        continue;
                    }
                    let f = u[i];
                    let r = &mut self.binv[i * m..(i + 1) * m];
                    r.iter_mut().zip(&pivot_row).for_each(|(a, &b)| *a -= f * b);
                }
                self.binv[p * m..(p + 1) * m].copy_from_slice(&pivot_row);
                self.in_basis[self.basis[p]] = false;
                self.in_basis[q] = true;
                self.basis[p] = q;
                self.since_refactor += 1;
            }
        }
    }

    fn primal(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for (i, &bv) in self.basis.iter().enumerate() {
            if bv < self.n {
                x[bv] = self.xb[i];
            }
        }
        x
    }

    fn run(&mut self) -> Result<LpSolution> {
        let b_norm = self.b.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        let feas_tol = self.tol * (1.0 + b_norm);

        self.run_phase()?;
        self.refactor()?;
        let infeasibility: f64 = self
            .basis
            .iter()
            .zip(&self.xb)
            .filter(|(&bv, _)| bv >= self.n)
            .map(|(_, &v)| v.abs())
            .sum();
        if infeasibility > feas_tol {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: vec![0.0; self.n],
                objective: f64::NAN,
                iterations: self.iterations,
            });
        }

        self.drive_out_artificials();
        self.refactor()?;
        self.phase_one = false;
        let end = self.run_phase()?;
        if let PhaseEnd::Unbounded = end {
            return Ok(LpSolution {
                status: LpStatus::Unbounded,
                x: self.primal(),
                objective: f64::NEG_INFINITY,
                iterations: self.iterations,
            });
        }
        self.refactor()?;
        let x = self.primal();
        let residual = self.lp.residual(&x);
        let min_x = x.iter().copied().fold(0.0f64, f64::min);
        if residual > feas_tol || min_x < -self.tol {
            return Err(Error::numerical(format!(
                "optimal basis lost feasibility (residual {residual:e}, min x {min_x:e})"
            )));
        }
        let objective = x.iter().zip(&self.lp.costs).map(|(x, c)| x * c).sum();
        Ok(LpSolution {
            status: LpStatus::Optimal,
            x,
            objective,
            iterations: self.iterations,
        })
    }
}
