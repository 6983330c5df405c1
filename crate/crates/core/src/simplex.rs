//! Dense bounded-variable primal simplex.
//!
//! Every solve returns a basic solution: nonbasic variables sit at one of
//! their bounds and basic ones are determined by the tight rows, so the
//! result is a vertex of the feasible polytope. Callers rely on that for
//! integrality of totally unimodular programs and for the single-fraction
//! structure of the budgeted relaxation.
//!
//! Two phases with artificial variables. Dantzig pricing switches to
//! Bland's rule for good once the objective stalls; ratio-test ties go to
//! the lowest variable index.

use std::fmt;

use thiserror::Error;

/// Feasibility tolerance on inputs scaled to unit magnitude.
pub const TOL_FEAS: f64 = 1e-9;
/// Threshold below which reduced costs and pivots count as zero.
pub const TOL_ZERO: f64 = 1e-9;
/// Distance from an integer still accepted as integral.
pub const TOL_INTEGRAL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("iteration limit {0} exceeded")]
    IterationLimit(usize),
    #[error("variable {index} out of range for {vars} variables")]
    BadIndex { index: usize, vars: usize },
    #[error("variable {0} has bounds that are empty or not finite below")]
    BadBounds(usize),
    #[error("non-finite coefficient in {0}")]
    NotFinite(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    /// Sparse `(variable, coefficient)` entries.
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// How far `x` is from satisfying the row; 0 when it holds.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// `max c·x` subject to linear rows and per-variable bounds (default `[0, 1]`).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    rows: Vec<Constraint>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            objective: vec![0.0; num_vars],
            rows: Vec::new(),
            lower: vec![0.0; num_vars],
            upper: vec![1.0; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn set_objective(&mut self, var: usize, coeff: f64) {
        self.objective[var] = coeff;
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    pub fn bounds(&self, var: usize) -> (f64, f64) {
        (self.lower[var], self.upper[var])
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> usize {
        self.rows.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        self.rows.len() - 1
    }

    pub fn rows(&self) -> &[Constraint] {
        &self.rows
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest row or bound violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.rows.iter().map(|r| r.violation(x));
        let bounds = x
            .iter()
            .enumerate()
            .map(|(j, &v)| (self.lower[j] - v).max(v - self.upper[j]).max(0.0));
        rows.chain(bounds).fold(0.0, f64::max)
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::NotFinite("objective"));
        }
        for j in 0..n {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if !lo.is_finite() || hi.is_nan() || lo > hi {
                return Err(LpError::BadBounds(j));
            }
        }
        for row in &self.rows {
            if !row.rhs.is_finite() || row.coeffs.iter().any(|(_, a)| !a.is_finite()) {
                return Err(LpError::NotFinite("constraint"));
            }
            if let Some(&(index, _)) = row.coeffs.iter().find(|(j, _)| *j >= n) {
                return Err(LpError::BadIndex { index, vars: n });
            }
        }
        Ok(())
    }
}

impl fmt::Display for LinearProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let term = |f: &mut fmt::Formatter<'_>, first: bool, j: usize, a: f64| {
            let sign = if a < 0.0 {
                "-"
            } else if first {
                ""
            } else {
                "+"
            };
            if first {
                write!(f, "{sign}{} x{j}", a.abs())
            } else {
                write!(f, " {sign} {} x{j}", a.abs())
            }
        };
        write!(f, "maximize")?;
        let mut first = true;
        for (j, &c) in self.objective.iter().enumerate() {
            if c != 0.0 {
                f.write_str(if first { " " } else { "" })?;
                term(f, first, j, c)?;
                first = false;
            }
        }
        if first {
            write!(f, " 0")?;
        }
        writeln!(f)?;
        writeln!(f, "subject to")?;
        for (i, row) in self.rows.iter().enumerate() {
            write!(f, "  r{i}: ")?;
            for (k, &(j, a)) in row.coeffs.iter().enumerate() {
                term(f, k == 0, j, a)?;
            }
            if row.coeffs.is_empty() {
                write!(f, "0")?;
            }
            writeln!(f, " {} {}", row.relation, row.rhs)?;
        }
        writeln!(f, "bounds")?;
        for j in 0..self.num_vars() {
            writeln!(f, "  {} <= x{j} <= {}", self.lower[j], self.upper[j])?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

/// A basic solution. `basis` lists the basic columns: `j < n` is a
/// structural variable, `n + i` the slack of row `i`, larger indices
/// artificial variables left basic at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexSolution {
    pub status: Status,
    pub values: Vec<f64>,
    pub objective_value: f64,
    pub basis: Vec<usize>,
    pub iterations: usize,
}

impl VertexSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    /// Largest distance of any value from the nearest integer.
    pub fn max_fractionality(&self) -> f64 {
        self.values
            .iter()
            .map(|v| (v - v.round()).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Defaults to `10_000 + 20 * (rows + vars)`.
    pub max_iterations: Option<usize>,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub stall_threshold: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iterations: None,
            stall_threshold: 50,
        }
    }
}

pub fn solve(lp: &LinearProgram) -> Result<VertexSolution, LpError> {
    solve_with(lp, SolverOptions::default())
}

pub fn solve_with(lp: &LinearProgram, options: SolverOptions) -> Result<VertexSolution, LpError> {
    lp.validate()?;
    let mut t = Tableau::build(lp);
    let limit = options
        .max_iterations
        .unwrap_or(10_000 + 20 * (t.m + lp.num_vars()));
    let mut iterations = 0;

    if t.first_artificial < t.cols {
        let mut phase1 = vec![0.0; t.cols];
        phase1[t.first_artificial..]
            .iter_mut()
            .for_each(|c| *c = -1.0);
        t.price(&phase1);
        let outcome = t.run(limit, options.stall_threshold, &mut iterations)?;
        debug_assert!(outcome != Outcome::Unbounded);
        let infeasibility: f64 = t.x[t.first_artificial..].iter().sum();
        let scale = lp.rows.iter().map(|r| r.rhs.abs()).fold(1.0, f64::max);
        if infeasibility > TOL_FEAS * scale {
            return Ok(VertexSolution {
                status: Status::Infeasible,
                values: t.x[..lp.num_vars()].to_vec(),
                objective_value: f64::NAN,
                basis: t.basis.clone(),
                iterations,
            });
        }
        for j in t.first_artificial..t.cols {
            t.upper[j] = 0.0;
            t.lower[j] = 0.0;
            t.x[j] = 0.0;
        }
    }

    let mut phase2 = vec![0.0; t.cols];
    phase2[..lp.num_vars()].copy_from_slice(&lp.objective);
    t.price(&phase2);
    let outcome = t.run(limit, options.stall_threshold, &mut iterations)?;
    let mut values = t.x[..lp.num_vars()].to_vec();
    for (j, v) in values.iter_mut().enumerate() {
        *v = v.clamp(lp.lower[j], lp.upper[j]);
    }
    let status = match outcome {
        Outcome::Optimal => Status::Optimal,
        Outcome::Unbounded => Status::Unbounded,
    };
    Ok(VertexSolution {
        status,
        objective_value: lp.objective_value(&values),
        values,
        basis: t.basis.clone(),
        iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Optimal,
    Unbounded,
}

struct Tableau {
    m: usize,
    cols: usize,
    first_artificial: usize,
    // B⁻¹A, row-major m × cols
    a: Vec<f64>,
    reduced: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    // column -> row when basic
    row_of: Vec<Option<usize>>,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let m = lp.num_rows();
        let mut x: Vec<f64> = lp.lower.clone();
        let mut lower = lp.lower.clone();
        let mut upper = lp.upper.clone();

        // slack for row i: +s (<=, =) or -s (>=), s >= 0; fixed at 0 for =
        let mut slack_sign = vec![1.0; m];
        for (i, row) in lp.rows.iter().enumerate() {
            lower.push(0.0);
            match row.relation {
                Relation::Le => upper.push(f64::INFINITY),
                Relation::Ge => {
                    upper.push(f64::INFINITY);
                    slack_sign[i] = -1.0;
                }
                Relation::Eq => upper.push(0.0),
            }
            x.push(0.0);
        }

        let residual: Vec<f64> = lp.rows.iter().map(|r| r.rhs - r.activity(&x)).collect();
        let mut basis = vec![0; m];
        let mut pivot_sign = vec![1.0; m];
        let mut artificial_rows = Vec::new();
        for i in 0..m {
            let s = residual[i] / slack_sign[i];
            if s >= -TOL_FEAS && s <= upper[n + i] + TOL_FEAS {
                basis[i] = n + i;
                pivot_sign[i] = slack_sign[i];
                x[n + i] = s.max(0.0).min(upper[n + i]);
            } else {
                artificial_rows.push(i);
            }
        }
        let first_artificial = n + m;
        let cols = first_artificial + artificial_rows.len();
        for (k, &i) in artificial_rows.iter().enumerate() {
            let col = first_artificial + k;
            basis[i] = col;
            pivot_sign[i] = if residual[i] < 0.0 { -1.0 } else { 1.0 };
            lower.push(0.0);
            upper.push(f64::INFINITY);
            x.push(residual[i].abs());
        }

        let mut a = vec![0.0; m * cols];
        for (i, row) in lp.rows.iter().enumerate() {
            let r = &mut a[i * cols..(i + 1) * cols];
            for &(j, coeff) in &row.coeffs {
                r[j] += coeff;
            }
            r[n + i] = slack_sign[i];
            if basis[i] >= first_artificial {
                r[basis[i]] = pivot_sign[i];
            }
            if pivot_sign[i] < 0.0 {
                r.iter_mut().for_each(|v| *v = -*v);
            }
        }
        let mut row_of = vec![None; cols];
        for (i, &b) in basis.iter().enumerate() {
            row_of[b] = Some(i);
        }
        Tableau {
            m,
            cols,
            first_artificial,
            a,
            reduced: vec![0.0; cols],
            lower,
            upper,
            x,
            basis,
            row_of,
        }
    }

    fn price(&mut self, costs: &[f64]) {
        self.reduced.copy_from_slice(costs);
        for i in 0..self.m {
            let cb = costs[self.basis[i]];
            if cb != 0.0 {
                let row = &self.a[i * self.cols..(i + 1) * self.cols];
                for (d, &v) in self.reduced.iter_mut().zip(row) {
                    *d -= cb * v;
                }
            }
        }
        for &b in &self.basis {
            self.reduced[b] = 0.0;
        }
    }

    fn entering(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.cols {
            if self.row_of[j].is_some() || self.upper[j] - self.lower[j] <= 0.0 {
                continue;
            }
            let d = self.reduced[j];
            let dir = if d > TOL_ZERO && self.x[j] < self.upper[j] {
                1.0
            } else if d < -TOL_ZERO && self.x[j] > self.lower[j] {
                -1.0
            } else {
                continue;
            };
            if bland {
                return Some((j, dir));
            }
            if best.is_none_or(|(b, _)| d.abs() > self.reduced[b].abs()) {
                best = Some((j, dir));
            }
        }
        best
    }

    fn run(
        &mut self,
        limit: usize,
        stall_threshold: usize,
        iterations: &mut usize,
    ) -> Result<Outcome, LpError> {
        let mut bland = false;
        let mut stalled = 0;
        loop {
            let Some((j, dir)) = self.entering(bland) else {
                return Ok(Outcome::Optimal);
            };
            if *iterations >= limit {
                return Err(LpError::IterationLimit(limit));
            }
            *iterations += 1;

            // ratio test: (step, leaving row or None for a bound flip)
            let mut step = self.upper[j] - self.lower[j];
            let mut leave: Option<usize> = None;
            for i in 0..self.m {
                let alpha = self.a[i * self.cols + j] * dir;
                let b = self.basis[i];
                let limit_i = if alpha > TOL_ZERO {
                    (self.x[b] - self.lower[b]).max(0.0) / alpha
                } else if alpha < -TOL_ZERO && self.upper[b].is_finite() {
                    (self.upper[b] - self.x[b]).max(0.0) / -alpha
                } else {
                    continue;
                };
                let better = match leave {
                    _ if limit_i < step - 1e-12 => true,
                    Some(r) if limit_i <= step + 1e-12 => b < self.basis[r],
                    None if limit_i <= step + 1e-12 => true,
                    _ => false,
                };
                if better {
                    step = limit_i.min(step);
                    leave = Some(i);
                }
            }
            if step.is_infinite() {
                return Ok(Outcome::Unbounded);
            }

            let gain = step * self.reduced[j].abs();
            if gain > 1e-12 {
                stalled = 0;
            } else {
                stalled += 1;
                if stalled >= stall_threshold {
                    bland = true;
                }
            }

            let delta = dir * step;
            self.x[j] += delta;
            for i in 0..self.m {
                let coeff = self.a[i * self.cols + j];
                if coeff != 0.0 {
                    let b = self.basis[i];
                    self.x[b] -= coeff * delta;
                }
            }
            match leave {
                None => {
                    // bound flip
                    self.x[j] = if dir > 0.0 {
                        self.upper[j]
                    } else {
                        self.lower[j]
                    };
                }
                Some(r) => {
                    let out = self.basis[r];
                    let alpha = self.a[r * self.cols + j] * dir;
                    self.x[out] = if alpha > 0.0 {
                        self.lower[out]
                    } else {
                        self.upper[out]
                    };
                    self.pivot(r, j);
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let cols = self.cols;
        let p = self.a[r * cols + j];
        {
            let row = &mut self.a[r * cols..(r + 1) * cols];
            row.iter_mut().for_each(|v| *v /= p);
            row[j] = 1.0;
        }
        let pivot_row: Vec<f64> = self.a[r * cols..(r + 1) * cols].to_vec();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.a[i * cols + j];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.a[i * cols..(i + 1) * cols];
            for (v, &pr) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pr;
            }
            row[j] = 0.0;
        }
        let d = self.reduced[j];
        for (v, &pr) in self.reduced.iter_mut().zip(&pivot_row) {
            *v -= d * pr;
        }
        self.reduced[j] = 0.0;

        let out = self.basis[r];
        self.row_of[out] = None;
        self.row_of[j] = Some(r);
        self.basis[r] = j;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64) {
        assert!((a - b).abs() < 1e-9, "{a} != {b}");
    }

    #[test]
    fn no_rows_goes_to_upper_bound() {
        let mut lp = LinearProgram::new(1);
        lp.set_objective(0, 1.0);
        let sol = solve(&lp).unwrap();
        assert!(sol.is_optimal());
        assert_close(sol.values[0], 1.0);
        assert_close(sol.objective_value, 1.0);
    }

    #[test]
    fn degenerate_optimum_is_a_vertex() {
        let mut lp = LinearProgram::new(2);
        lp.set_objective(0, 1.0);
        lp.set_objective(1, 1.0);
        lp.add_row(vec![(0, 1.0), (1, 1.0)], Relation::Le, 1.0);
        let sol = solve(&lp).unwrap();
        assert_close(sol.objective_value, 1.0);
        let v = (sol.values[0].round(), sol.values[1].round());
        assert!(v == (1.0, 0.0) || v == (0.0, 1.0), "{:?}", sol.values);
        assert!(sol.max_fractionality() < TOL_INTEGRAL);
    }

    #[test]
    fn tu_relaxation_is_integral() {
        // X_a weight +1, X_ab weight -0.1, X_ab - X_a >= 0
        let mut lp = LinearProgram::new(2);
        lp.set_objective(0, 1.0);
        lp.set_objective(1, -0.1);
        lp.add_row(vec![(1, 1.0), (0, -1.0)], Relation::Ge, 0.0);
        let sol = solve(&lp).unwrap();
        // the four integer points: (0,0)=0, (0,1)=-0.1, (1,1)=0.9, (1,0) infeasible
        assert_close(sol.objective_value, 0.9);
        assert_eq!(sol.values, vec![1.0, 1.0]);
    }

    #[test]
    fn equality_rows_need_phase_one() {
        // max x + 2y  s.t.  x + y = 1.5, x - y >= -0.5, bounds [0, 1]
        let mut lp = LinearProgram::new(2);
        lp.set_objective(0, 1.0);
        lp.set_objective(1, 2.0);
        lp.add_row(vec![(0, 1.0), (1, 1.0)], Relation::Eq, 1.5);
        lp.add_row(vec![(0, 1.0), (1, -1.0)], Relation::Ge, -0.5);
        let sol = solve(&lp).unwrap();
        assert!(sol.is_optimal());
        assert_close(sol.values[0], 0.5);
        assert_close(sol.values[1], 1.0);
        assert_close(sol.objective_value, 2.5);
        assert!(lp.max_violation(&sol.values) < TOL_FEAS);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.add_row(vec![(0, 1.0)], Relation::Ge, 2.0);
        assert_eq!(solve(&lp).unwrap().status, Status::Infeasible);

        let mut lp = LinearProgram::new(2);
        lp.set_bounds(0, 0.0, f64::INFINITY);
        lp.set_objective(0, 1.0);
        lp.add_row(vec![(0, 1.0), (1, -1.0)], Relation::Ge, 0.0);
        assert_eq!(solve(&lp).unwrap().status, Status::Unbounded);
    }

    #[test]
    fn iteration_limit_is_distinct() {
        let mut lp = LinearProgram::new(3);
        for j in 0..3 {
            lp.set_objective(j, 1.0);
        }
        lp.add_row(vec![(0, 1.0), (1, 1.0), (2, 1.0)], Relation::Le, 1.5);
        let opts = SolverOptions {
            max_iterations: Some(1),
            ..Default::default()
        };
        assert_eq!(solve_with(&lp, opts), Err(LpError::IterationLimit(1)));
    }

    #[test]
    fn rejects_malformed_programs() {
        let mut lp = LinearProgram::new(1);
        lp.add_row(vec![(3, 1.0)], Relation::Le, 1.0);
        assert!(matches!(solve(&lp), Err(LpError::BadIndex { .. })));
        let mut lp = LinearProgram::new(1);
        lp.set_bounds(0, 2.0, 1.0);
        assert_eq!(solve(&lp), Err(LpError::BadBounds(0)));
    }

    #[test]
    fn fractional_knapsack_vertex() {
        // max 3a + 2b + c  s.t. 2a + 2b + 2c <= 3
        let mut lp = LinearProgram::new(3);
        for (j, c) in [3.0, 2.0, 1.0].into_iter().enumerate() {
            lp.set_objective(j, c);
        }
        lp.add_row(vec![(0, 2.0), (1, 2.0), (2, 2.0)], Relation::Le, 3.0);
        let sol = solve(&lp).unwrap();
        assert_close(sol.objective_value, 4.0);
        let interior = sol
            .values
            .iter()
            .filter(|v| **v > 1e-9 && **v < 1.0 - 1e-9)
            .count();
        assert!(interior <= lp.num_rows());
    }

    #[test]
    fn text_dump() {
        let mut lp = LinearProgram::new(2);
        lp.set_objective(0, 1.0);
        lp.set_objective(1, -0.5);
        lp.add_row(vec![(1, 1.0), (0, -1.0)], Relation::Ge, 0.0);
        let text = lp.to_string();
        assert!(text.starts_with("maximize 1 x0 - 0.5 x1\n"), "{text}");
        assert!(text.contains("r0: 1 x1 - 1 x0 >= 0"), "{text}");
    }
}
