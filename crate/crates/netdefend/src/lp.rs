//! A small dense linear-program solver: two-phase simplex.
//!
//! Pricing is Dantzig's rule (most negative reduced cost, smallest index on
//! ties) while the objective improves, falling back to Bland's rule after a
//! run of degenerate pivots. Bland's rule guarantees escape from any
//! degenerate vertex, so the hybrid terminates; both rules break ties by
//! index, so every solve is deterministic. Feasibility verdicts drive binary
//! searches and must be reproducible.
//!
//! Programs are stated over variables with a default lower bound of 0 and no
//! upper bound; bounds are handled by shifting and by extra rows, so the
//! tableau itself is the textbook equality form.

use std::fmt;

/// Feasibility tolerance: a point is accepted when no constraint is violated
/// by more than this.
pub const FEASIBILITY_TOL: f64 = 1e-7;

/// Relative optimality tolerance promised for minimization on well-scaled
/// inputs.
pub const OPTIMALITY_TOL: f64 = 1e-6;

const REDUCED_COST_EPS: f64 = 1e-9;
const PIVOT_EPS: f64 = 1e-9;
const DEGENERATE_PIVOT: f64 = 1e-12;
/// Degenerate pivots in a row before switching from Dantzig to Bland pricing.
const STALL_LIMIT: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relation::Le => f.write_str("<="),
            Relation::Ge => f.write_str(">="),
            Relation::Eq => f.write_str("="),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Constraint {
    /// `(variable index, coefficient)` pairs; duplicates are summed.
    pub terms: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// A linear program in constraint form. An empty objective means a pure
/// feasibility problem.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<(usize, f64)>,
    pub constraints: Vec<Constraint>,
    /// Per-variable lower bounds, default 0.
    pub lower_bounds: Vec<f64>,
    /// Per-variable upper bounds; `None` means unbounded above.
    pub upper_bounds: Vec<Option<f64>>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: Vec::new(),
            constraints: Vec::new(),
            lower_bounds: vec![0.0; num_vars],
            upper_bounds: vec![None; num_vars],
        }
    }

    pub fn add_constraint(&mut self, terms: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint { terms, relation, rhs });
    }

    pub fn set_objective(&mut self, terms: Vec<(usize, f64)>) {
        self.objective = terms;
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: Option<f64>) {
        self.lower_bounds[var] = lower;
        self.upper_bounds[var] = upper;
    }

    fn assert_well_formed(&self) {
        assert_eq!(self.lower_bounds.len(), self.num_vars);
        assert_eq!(self.upper_bounds.len(), self.num_vars);
        for (var, coeff) in self
            .objective
            .iter()
            .chain(self.constraints.iter().flat_map(|c| c.terms.iter()))
        {
            assert!(*var < self.num_vars, "variable index {var} out of range");
            assert!(coeff.is_finite(), "non-finite coefficient on variable {var}");
        }
        for c in &self.constraints {
            assert!(c.rhs.is_finite(), "non-finite constraint rhs");
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpSolution {
    Feasible {
        /// One value per variable, in the original (unshifted) coordinates.
        values: Vec<f64>,
        /// Objective at `values`; 0 for pure feasibility problems.
        objective_value: f64,
    },
    Infeasible,
    Unbounded,
}

impl LpSolution {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LpSolution::Feasible { .. })
    }

    pub fn values(&self) -> Option<&[f64]> {
        match self {
            LpSolution::Feasible { values, .. } => Some(values),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpError {
    /// Pivot selection degraded below 1e-12: the instance is too
    /// ill-conditioned for this dense tableau. Rescale and retry.
    NumericalFailure(String),
}

impl fmt::Display for LpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpError::NumericalFailure(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

impl std::error::Error for LpError {}

/// Largest signed violation of `values` across constraints and bounds,
/// floored at zero. At most [`FEASIBILITY_TOL`] certifies feasibility
/// independently of how `values` was produced.
pub fn check_solution(lp: &LinearProgram, values: &[f64]) -> f64 {
    assert_eq!(values.len(), lp.num_vars);
    let mut worst = 0.0f64;
    for c in &lp.constraints {
        let lhs: f64 = c.terms.iter().map(|&(j, a)| a * values[j]).sum();
        let violation = match c.relation {
            Relation::Le => lhs - c.rhs,
            Relation::Ge => c.rhs - lhs,
            Relation::Eq => (lhs - c.rhs).abs(),
        };
        worst = worst.max(violation);
    }
    for (j, &x) in values.iter().enumerate() {
        worst = worst.max(lp.lower_bounds[j] - x);
        if let Some(ub) = lp.upper_bounds[j] {
            worst = worst.max(x - ub);
        }
    }
    worst
}

/// Objective value of `values` under `lp`'s objective.
pub fn objective_at(lp: &LinearProgram, values: &[f64]) -> f64 {
    lp.objective.iter().map(|&(j, c)| c * values[j]).sum()
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    ncols: usize,
    obj: Vec<f64>,
    obj_val: f64,
}

enum PivotOutcome {
    Optimal,
    NoRatio { entering: usize, near_degenerate: bool },
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let pivot = self.rows[row][col];
        let inv = 1.0 / pivot;
        for x in self.rows[row].iter_mut() {
            *x *= inv;
        }
        self.rhs[row] *= inv;
        // Snap the pivot column exactly; elimination below relies on it.
        self.rows[row][col] = 1.0;

        let pivot_row = std::mem::take(&mut self.rows[row]);
        let pivot_rhs = self.rhs[row];
        for i in 0..self.rows.len() {
            if i == row {
                continue;
            }
            let factor = self.rows[i][col];
            if factor == 0.0 {
                continue;
            }
            let target = &mut self.rows[i];
            for (t, p) in target.iter_mut().zip(&pivot_row) {
                *t -= factor * p;
            }
            target[col] = 0.0;
            self.rhs[i] -= factor * pivot_rhs;
        }
        let factor = self.obj[col];
        if factor != 0.0 {
            for (t, p) in self.obj.iter_mut().zip(&pivot_row) {
                *t -= factor * p;
            }
            self.obj[col] = 0.0;
            self.obj_val += factor * pivot_rhs;
        }
        self.rows[row] = pivot_row;
        self.basis[row] = col;
    }

    /// One pivot. Entering column by Bland (smallest eligible index) or
    /// Dantzig (most negative reduced cost, smallest index on ties); leaving
    /// row by min ratio with smallest basic variable breaking ties.
    fn step(&mut self, allowed_cols: usize, bland: bool) -> Option<PivotOutcome> {
        let entering = if bland {
            (0..allowed_cols).find(|&j| self.obj[j] < -REDUCED_COST_EPS)
        } else {
            let mut best: Option<(usize, f64)> = None;
            for j in 0..allowed_cols {
                let rc = self.obj[j];
                if rc < -REDUCED_COST_EPS && best.is_none_or(|(_, b)| rc < b) {
                    best = Some((j, rc));
                }
            }
            best.map(|(j, _)| j)
        };
        let entering = match entering {
            Some(j) => j,
            None => return Some(PivotOutcome::Optimal),
        };
        let mut leaving: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        let mut near_degenerate = false;
        for i in 0..self.rows.len() {
            let a = self.rows[i][entering];
            if a > PIVOT_EPS {
                let ratio = self.rhs[i] / a;
                let better = match leaving {
                    None => true,
                    Some(l) => {
                        ratio < best_ratio - 1e-12
                            || (ratio <= best_ratio + 1e-12 && self.basis[i] < self.basis[l])
                    }
                };
                if better {
                    leaving = Some(i);
                    best_ratio = ratio;
                }
            } else if a > DEGENERATE_PIVOT {
                near_degenerate = true;
            }
        }
        match leaving {
            Some(row) => {
                self.pivot(row, entering);
                None
            }
            None => Some(PivotOutcome::NoRatio { entering, near_degenerate }),
        }
    }
}

/// Solves `lp` by two-phase simplex. Feasible answers satisfy every
/// constraint within [`FEASIBILITY_TOL`]; minimization is exact up to
/// [`OPTIMALITY_TOL`] relative on well-scaled inputs; identical inputs give
/// identical outputs.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.assert_well_formed();
    let n = lp.num_vars;

    // Shift every variable to z_j = x_j - lb_j >= 0.
    for j in 0..n {
        if let Some(ub) = lp.upper_bounds[j] {
            if ub < lp.lower_bounds[j] {
                return Ok(LpSolution::Infeasible);
            }
        }
    }

    struct Row {
        coeffs: Vec<f64>,
        relation: Relation,
        rhs: f64,
    }

    let mut rows: Vec<Row> = Vec::with_capacity(lp.constraints.len() + n);
    for c in &lp.constraints {
        let mut coeffs = vec![0.0; n];
        for &(j, a) in &c.terms {
            coeffs[j] += a;
        }
        let shift: f64 = (0..n).map(|j| coeffs[j] * lp.lower_bounds[j]).sum();
        rows.push(Row { coeffs, relation: c.relation, rhs: c.rhs - shift });
    }
    for j in 0..n {
        if let Some(ub) = lp.upper_bounds[j] {
            let mut coeffs = vec![0.0; n];
            coeffs[j] = 1.0;
            rows.push(Row { coeffs, relation: Relation::Le, rhs: ub - lp.lower_bounds[j] });
        }
    }

    for row in rows.iter_mut() {
        if row.rhs < 0.0 {
            for a in row.coeffs.iter_mut() {
                *a = -*a;
            }
            row.rhs = -row.rhs;
            row.relation = match row.relation {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let m = rows.len();
    let num_slack: usize = rows
        .iter()
        .filter(|r| matches!(r.relation, Relation::Le | Relation::Ge))
        .count();
    let num_artificial: usize = rows
        .iter()
        .filter(|r| matches!(r.relation, Relation::Ge | Relation::Eq))
        .count();
    let artificial_start = n + num_slack;
    let ncols = artificial_start + num_artificial;

    let mut t = Tableau {
        rows: Vec::with_capacity(m),
        rhs: Vec::with_capacity(m),
        basis: Vec::with_capacity(m),
        ncols,
        obj: vec![0.0; ncols],
        obj_val: 0.0,
    };

    let mut next_slack = n;
    let mut next_artificial = artificial_start;
    for row in &rows {
        let mut full = vec![0.0; ncols];
        full[..n].copy_from_slice(&row.coeffs);
        let basic = match row.relation {
            Relation::Le => {
                full[next_slack] = 1.0;
                next_slack += 1;
                next_slack - 1
            }
            Relation::Ge => {
                full[next_slack] = -1.0;
                next_slack += 1;
                full[next_artificial] = 1.0;
                next_artificial += 1;
                next_artificial - 1
            }
            Relation::Eq => {
                full[next_artificial] = 1.0;
                next_artificial += 1;
                next_artificial - 1
            }
        };
        t.rows.push(full);
        t.rhs.push(row.rhs);
        t.basis.push(basic);
    }

    let max_pivots = 1000 + 50 * (m + ncols);

    // Phase 1: minimize the sum of artificial variables.
    if num_artificial > 0 {
        for i in 0..m {
            if t.basis[i] >= artificial_start {
                for j in 0..ncols {
                    t.obj[j] -= t.rows[i][j];
                }
                t.obj_val += t.rhs[i];
            }
        }
        for j in artificial_start..ncols {
            t.obj[j] += 1.0;
        }

        let mut pivots = 0;
        let mut stall = 0usize;
        let mut last_obj = t.obj_val;
        loop {
            match t.step(ncols, stall >= STALL_LIMIT) {
                Some(PivotOutcome::Optimal) => break,
                Some(PivotOutcome::NoRatio { entering, .. }) => {
                    // Phase 1 is bounded below by 0, so a missing ratio is a
                    // numerical artifact, not unboundedness.
                    return Err(LpError::NumericalFailure(format!(
                        "phase 1: no usable pivot in column {entering}"
                    )));
                }
                None => {
                    pivots += 1;
                    if t.obj_val < last_obj - 1e-12 * (1.0 + last_obj.abs()) {
                        stall = 0;
                        last_obj = t.obj_val;
                    } else {
                        stall += 1;
                    }
                    if pivots > max_pivots {
                        return Err(LpError::NumericalFailure(
                            "phase 1: pivot limit exceeded".to_string(),
                        ));
                    }
                }
            }
        }
        if t.obj_val > FEASIBILITY_TOL {
            return Ok(LpSolution::Infeasible);
        }

        // Drive leftover artificials out of the basis; drop redundant rows.
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= artificial_start {
                let col = (0..artificial_start).find(|&j| t.rows[i][j].abs() > PIVOT_EPS);
                match col {
                    Some(j) => t.pivot(i, j),
                    None => {
                        t.rows.swap_remove(i);
                        t.rhs.swap_remove(i);
                        t.basis.swap_remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        for row in t.rows.iter_mut() {
            row.truncate(artificial_start);
        }
        t.obj.truncate(artificial_start);
        t.ncols = artificial_start;
    }

    // Phase 2: minimize the real objective over the feasible basis.
    if !lp.objective.is_empty() {
        let mut cost = vec![0.0; t.ncols];
        for &(j, c) in &lp.objective {
            cost[j] += c;
        }
        t.obj.copy_from_slice(&cost);
        t.obj_val = 0.0;
        for i in 0..t.rows.len() {
            let cb = cost[t.basis[i]];
            if cb != 0.0 {
                for j in 0..t.ncols {
                    t.obj[j] -= cb * t.rows[i][j];
                }
                t.obj_val += cb * t.rhs[i];
            }
        }

        let mut pivots = 0;
        let mut stall = 0usize;
        let mut last_obj = t.obj_val;
        loop {
            match t.step(t.ncols, stall >= STALL_LIMIT) {
                Some(PivotOutcome::Optimal) => break,
                Some(PivotOutcome::NoRatio { entering, near_degenerate }) => {
                    if near_degenerate {
                        return Err(LpError::NumericalFailure(format!(
                            "phase 2: pivots below {DEGENERATE_PIVOT:e} in column {entering}"
                        )));
                    }
                    return Ok(LpSolution::Unbounded);
                }
                None => {
                    pivots += 1;
                    if t.obj_val < last_obj - 1e-12 * (1.0 + last_obj.abs()) {
                        stall = 0;
                        last_obj = t.obj_val;
                    } else {
                        stall += 1;
                    }
                    if pivots > max_pivots {
                        return Err(LpError::NumericalFailure(
                            "phase 2: pivot limit exceeded".to_string(),
                        ));
                    }
                }
            }
        }
    }

    let mut values = lp.lower_bounds.clone();
    for i in 0..t.rows.len() {
        if t.basis[i] < n {
            values[t.basis[i]] += t.rhs[i].max(0.0);
        }
    }
    let objective_value = objective_at(lp, &values);
    Ok(LpSolution::Feasible { values, objective_value })
}
