//! Exact rational linear programming.
//!
//! A dense two-phase primal simplex over [`Rational`] with Bland's rule for
//! both the entering and the leaving variable, so the pivot sequence is fully
//! deterministic and cannot cycle. Every outcome is certified before it is
//! returned: optimal solutions by primal feasibility plus a dual solution with
//! matching objective, infeasibility by a Farkas vector, unboundedness by an
//! improving ray. A certificate that fails to verify is reported as
//! [`LpError::Verification`].
//!
//! Variables default to `x >= 0`. Arbitrary lower/upper bounds and free
//! variables are rewritten into standard form internally.

use std::fmt;

use thiserror::Error;

use crate::rational::Rational;

pub const DEFAULT_MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    fn flipped(self) -> Relation {
        match self {
            Relation::Le => Relation::Ge,
            Relation::Ge => Relation::Le,
            Relation::Eq => Relation::Eq,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpError {
    #[error("malformed linear program: {0}")]
    Malformed(String),
    #[error("pivot limit of {0} reached")]
    PivotLimit(usize),
    #[error("solution failed exact verification: {0}")]
    Verification(String),
}

#[derive(Debug, Clone)]
struct Constraint {
    terms: Vec<(usize, Rational)>,
    relation: Relation,
    rhs: Rational,
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    num_vars: usize,
    sense: Sense,
    objective: Vec<Rational>,
    constraints: Vec<Constraint>,
    lower: Vec<Option<Rational>>,
    upper: Vec<Option<Rational>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

impl fmt::Display for LpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Optimal objective value; `None` unless `status == Optimal`.
    pub value: Option<Rational>,
    /// Optimal vertex in the original variables; `None` unless optimal.
    pub point: Option<Vec<Rational>>,
    /// Marginal value of each constraint's right-hand side (`∂ value / ∂ rhs`),
    /// in insertion order; `None` unless optimal.
    pub duals: Option<Vec<Rational>>,
    pub pivots: usize,
}

impl LpOutcome {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub max_pivots: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_pivots: DEFAULT_MAX_PIVOTS,
        }
    }
}

impl LinearProgram {
    /// A program over `num_vars` variables, all `>= 0`, with zero objective.
    pub fn new(num_vars: usize, sense: Sense) -> Self {
        LinearProgram {
            num_vars,
            sense,
            objective: vec![Rational::zero(); num_vars],
            constraints: Vec::new(),
            lower: vec![Some(Rational::zero()); num_vars],
            upper: vec![None; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn objective(&self) -> &[Rational] {
        &self.objective
    }

    pub fn set_objective(&mut self, c: Vec<Rational>) -> Result<(), LpError> {
        if c.len() != self.num_vars {
            return Err(LpError::Malformed(format!(
                "objective has {} entries for {} variables",
                c.len(),
                self.num_vars
            )));
        }
        self.objective = c;
        Ok(())
    }

    pub fn set_objective_coeff(&mut self, j: usize, c: Rational) {
        self.objective[j] = c;
    }

    /// Adds `Σ coeffs[j] x_j (rel) rhs` from a dense coefficient vector.
    pub fn add_constraint(
        &mut self,
        coeffs: Vec<Rational>,
        relation: Relation,
        rhs: Rational,
    ) -> Result<(), LpError> {
        if coeffs.len() != self.num_vars {
            return Err(LpError::Malformed(format!(
                "constraint has {} coefficients for {} variables",
                coeffs.len(),
                self.num_vars
            )));
        }
        let terms = coeffs
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .collect();
        self.constraints.push(Constraint { terms, relation, rhs });
        Ok(())
    }

    /// Adds a constraint given as `(variable, coefficient)` pairs. Repeated
    /// variables are summed.
    pub fn add_sparse(
        &mut self,
        terms: impl IntoIterator<Item = (usize, Rational)>,
        relation: Relation,
        rhs: Rational,
    ) -> Result<(), LpError> {
        let mut merged: Vec<(usize, Rational)> = Vec::new();
        for (j, c) in terms {
            if j >= self.num_vars {
                return Err(LpError::Malformed(format!("variable index {j} out of range")));
            }
            match merged.iter_mut().find(|(i, _)| *i == j) {
                Some((_, v)) => *v += c,
                None => merged.push((j, c)),
            }
        }
        merged.retain(|(_, c)| !c.is_zero());
        merged.sort_by_key(|(j, _)| *j);
        self.constraints.push(Constraint {
            terms: merged,
            relation,
            rhs,
        });
        Ok(())
    }

    pub fn set_bounds(&mut self, j: usize, lower: Option<Rational>, upper: Option<Rational>) {
        self.lower[j] = lower;
        self.upper[j] = upper;
    }

    pub fn set_free(&mut self, j: usize) {
        self.set_bounds(j, None, None);
    }

    fn validate(&self) -> Result<(), LpError> {
        if self.objective.len() != self.num_vars
            || self.lower.len() != self.num_vars
            || self.upper.len() != self.num_vars
        {
            return Err(LpError::Malformed("vector lengths disagree with num_vars".into()));
        }
        for c in &self.constraints {
            if c.terms.iter().any(|(j, _)| *j >= self.num_vars) {
                return Err(LpError::Malformed("constraint references unknown variable".into()));
            }
        }
        let has_bound = self.lower.iter().any(Option::is_some) || self.upper.iter().any(Option::is_some);
        if self.constraints.is_empty() && !has_bound && self.num_vars > 0 {
            return Err(LpError::Malformed("no constraints and no bounds".into()));
        }
        Ok(())
    }

    /// `true` when `x` satisfies every constraint and bound exactly.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        if x.len() != self.num_vars {
            return false;
        }
        for j in 0..self.num_vars {
            if let Some(l) = &self.lower[j] {
                if &x[j] < l {
                    return false;
                }
            }
            if let Some(u) = &self.upper[j] {
                if &x[j] > u {
                    return false;
                }
            }
        }
        self.constraints.iter().all(|c| {
            let lhs: Rational = c.terms.iter().map(|(j, a)| a * &x[*j]).sum();
            match c.relation {
                Relation::Le => lhs <= c.rhs,
                Relation::Eq => lhs == c.rhs,
                Relation::Ge => lhs >= c.rhs,
            }
        })
    }

    pub fn evaluate(&self, x: &[Rational]) -> Rational {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn solve(&self) -> Result<LpOutcome, LpError> {
        self.solve_with(&SolverOptions::default())
    }

    pub fn solve_with(&self, opts: &SolverOptions) -> Result<LpOutcome, LpError> {
        self.validate()?;
        let std = StandardForm::build(self);
        let mut tab = Tableau::new(&std);
        let outcome = tab.run(&std, opts.max_pivots)?;
        match outcome {
            Phase::Optimal => {
                let xs = tab.primal();
                let y = tab.duals(&std);
                std.verify_optimal(&xs, &y)?;
                let point = std.recover(&xs);
                if !self.is_feasible(&point) {
                    return Err(LpError::Verification("recovered point violates a constraint".into()));
                }
                let value = self.evaluate(&point);
                let min_value = &std.objective_offset + std.cost_of(&xs);
                let expected = match self.sense {
                    Sense::Minimize => min_value,
                    Sense::Maximize => -min_value,
                };
                if value != expected {
                    return Err(LpError::Verification("objective value mismatch".into()));
                }
                let duals = std.original_duals(&y, self.sense);
                Ok(LpOutcome {
                    status: LpStatus::Optimal,
                    value: Some(value),
                    point: Some(point),
                    duals: Some(duals),
                    pivots: tab.pivots,
                })
            }
            Phase::Infeasible => {
                let y = tab.duals_phase1(&std);
                std.verify_farkas(&y)?;
                Ok(LpOutcome {
                    status: LpStatus::Infeasible,
                    value: None,
                    point: None,
                    duals: None,
                    pivots: tab.pivots,
                })
            }
            Phase::Unbounded(col) => {
                let ray = tab.ray(col, std.num_cols);
                std.verify_ray(&ray)?;
                Ok(LpOutcome {
                    status: LpStatus::Unbounded,
                    value: None,
                    point: None,
                    duals: None,
                    pivots: tab.pivots,
                })
            }
        }
    }
}

/// How an original variable is expressed in standard-form columns:
/// `x = offset + Σ sign * col`.
#[derive(Debug, Clone)]
struct VarMap {
    offset: Rational,
    cols: Vec<(usize, i8)>,
}

/// `min c·x  s.t.  A x = b,  x >= 0` with `b >= 0`, plus the bookkeeping needed
/// to translate back to the original program.
struct StandardForm {
    // sparse rows over structural + slack columns
    rows: Vec<Vec<(usize, Rational)>>,
    rhs: Vec<Rational>,
    cost: Vec<Rational>,
    objective_offset: Rational,
    num_cols: usize,
    // for each row: the column that starts basic (a slack or an artificial index)
    initial_basic: Vec<Basic>,
    num_artificial: usize,
    var_maps: Vec<VarMap>,
    // row i of the standard form came from original constraint origin[i] (None
    // for bound rows), multiplied by row_sign[i]
    origin: Vec<Option<usize>>,
    row_sign: Vec<i8>,
    num_original_constraints: usize,
}

#[derive(Debug, Clone, Copy)]
enum Basic {
    Slack(usize),
    Artificial(usize),
}

impl StandardForm {
    fn build(lp: &LinearProgram) -> StandardForm {
        let mut var_maps = Vec::with_capacity(lp.num_vars);
        let mut num_cols = 0usize;
        // (column, upper bound on the shifted variable)
        let mut bound_rows: Vec<(usize, Rational)> = Vec::new();
        for j in 0..lp.num_vars {
            match (&lp.lower[j], &lp.upper[j]) {
                (Some(l), u) => {
                    let col = num_cols;
                    num_cols += 1;
                    if let Some(u) = u {
                        bound_rows.push((col, u - l));
                    }
                    var_maps.push(VarMap {
                        offset: l.clone(),
                        cols: vec![(col, 1)],
                    });
                }
                (None, Some(u)) => {
                    let col = num_cols;
                    num_cols += 1;
                    var_maps.push(VarMap {
                        offset: u.clone(),
                        cols: vec![(col, -1)],
                    });
                }
                (None, None) => {
                    let col = num_cols;
                    num_cols += 2;
                    var_maps.push(VarMap {
                        offset: Rational::zero(),
                        cols: vec![(col, 1), (col + 1, -1)],
                    });
                }
            }
        }

        let min_sign = match lp.sense {
            Sense::Minimize => Rational::one(),
            Sense::Maximize => -Rational::one(),
        };
        let mut cost = vec![Rational::zero(); num_cols];
        let mut objective_offset = Rational::zero();
        for (j, c) in lp.objective.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let c = c * &min_sign;
            objective_offset += &c * &var_maps[j].offset;
            for &(col, s) in &var_maps[j].cols {
                if s > 0 {
                    cost[col] += &c;
                } else {
                    cost[col] -= &c;
                }
            }
        }

        let mut raw: Vec<(Vec<(usize, Rational)>, Relation, Rational, Option<usize>)> = Vec::new();
        for (i, c) in lp.constraints.iter().enumerate() {
            let mut terms: Vec<(usize, Rational)> = Vec::new();
            let mut rhs = c.rhs.clone();
            for (j, a) in &c.terms {
                rhs -= a * &var_maps[*j].offset;
                for &(col, s) in &var_maps[*j].cols {
                    let v = if s > 0 { a.clone() } else { -a };
                    terms.push((col, v));
                }
            }
            raw.push((terms, c.relation, rhs, Some(i)));
        }
        for (col, ub) in bound_rows {
            raw.push((vec![(col, Rational::one())], Relation::Le, ub, None));
        }

        let mut rows = Vec::with_capacity(raw.len());
        let mut rhs_vec = Vec::with_capacity(raw.len());
        let mut relations = Vec::with_capacity(raw.len());
        let mut origin = Vec::with_capacity(raw.len());
        let mut row_sign = Vec::with_capacity(raw.len());
        for (mut terms, mut rel, mut rhs, org) in raw {
            let mut sign = 1i8;
            // a zero right-hand side `>=` row becomes `<=` so its slack can start basic
            if rhs.is_negative() || (rhs.is_zero() && rel == Relation::Ge) {
                for t in terms.iter_mut() {
                    t.1 = -&t.1;
                }
                rhs = -rhs;
                rel = rel.flipped();
                sign = -1;
            }
            rows.push(terms);
            rhs_vec.push(rhs);
            relations.push(rel);
            origin.push(org);
            row_sign.push(sign);
        }

        // slack / surplus columns
        let mut initial_basic = Vec::with_capacity(rows.len());
        let mut num_artificial = 0;
        for (i, rel) in relations.iter().enumerate() {
            match rel {
                Relation::Le => {
                    let col = num_cols;
                    num_cols += 1;
                    rows[i].push((col, Rational::one()));
                    initial_basic.push(Basic::Slack(col));
                }
                Relation::Ge => {
                    let col = num_cols;
                    num_cols += 1;
                    rows[i].push((col, -Rational::one()));
                    initial_basic.push(Basic::Artificial(num_artificial));
                    num_artificial += 1;
                }
                Relation::Eq => {
                    initial_basic.push(Basic::Artificial(num_artificial));
                    num_artificial += 1;
                }
            }
        }
        cost.resize(num_cols, Rational::zero());

        StandardForm {
            rows,
            rhs: rhs_vec,
            cost,
            objective_offset,
            num_cols,
            initial_basic,
            num_artificial,
            var_maps,
            origin,
            row_sign,
            num_original_constraints: lp.constraints.len(),
        }
    }

    fn cost_of(&self, xs: &[Rational]) -> Rational {
        self.cost.iter().zip(xs).map(|(c, v)| c * v).sum()
    }

    fn recover(&self, xs: &[Rational]) -> Vec<Rational> {
        self.var_maps
            .iter()
            .map(|m| {
                let mut v = m.offset.clone();
                for &(col, s) in &m.cols {
                    if s > 0 {
                        v += &xs[col];
                    } else {
                        v -= &xs[col];
                    }
                }
                v
            })
            .collect()
    }

    /// `y^T A_j` for every column.
    fn dual_products(&self, y: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.num_cols];
        for (row, yi) in self.rows.iter().zip(y) {
            if yi.is_zero() {
                continue;
            }
            for (j, a) in row {
                out[*j] += a * yi;
            }
        }
        out
    }

    fn verify_optimal(&self, xs: &[Rational], y: &[Rational]) -> Result<(), LpError> {
        for (i, row) in self.rows.iter().enumerate() {
            let lhs: Rational = row.iter().map(|(j, a)| a * &xs[*j]).sum();
            if lhs != self.rhs[i] {
                return Err(LpError::Verification(format!("row {i} not satisfied")));
            }
        }
        if xs.iter().any(Rational::is_negative) {
            return Err(LpError::Verification("negative primal value".into()));
        }
        let ya = self.dual_products(y);
        for j in 0..self.num_cols {
            if (&self.cost[j] - &ya[j]).is_negative() {
                return Err(LpError::Verification(format!("dual infeasible at column {j}")));
            }
        }
        let dual_obj: Rational = y.iter().zip(&self.rhs).map(|(a, b)| a * b).sum();
        if dual_obj != self.cost_of(xs) {
            return Err(LpError::Verification("duality gap is nonzero".into()));
        }
        Ok(())
    }

    fn verify_farkas(&self, y: &[Rational]) -> Result<(), LpError> {
        // y^T A <= 0 on every column and y^T b > 0 rules out A x = b, x >= 0
        let ya = self.dual_products(y);
        if ya.iter().any(Rational::is_positive) {
            return Err(LpError::Verification("Farkas vector has a positive column product".into()));
        }
        let yb: Rational = y.iter().zip(&self.rhs).map(|(a, b)| a * b).sum();
        if !yb.is_positive() {
            return Err(LpError::Verification("Farkas vector does not separate".into()));
        }
        Ok(())
    }

    fn verify_ray(&self, d: &[Rational]) -> Result<(), LpError> {
        if d.iter().any(Rational::is_negative) {
            return Err(LpError::Verification("ray has a negative component".into()));
        }
        for row in &self.rows {
            let lhs: Rational = row.iter().map(|(j, a)| a * &d[*j]).sum();
            if !lhs.is_zero() {
                return Err(LpError::Verification("ray leaves the feasible region".into()));
            }
        }
        if !self.cost_of(d).is_negative() {
            return Err(LpError::Verification("ray does not improve the objective".into()));
        }
        Ok(())
    }

    fn original_duals(&self, y: &[Rational], sense: Sense) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.num_original_constraints];
        for (i, yi) in y.iter().enumerate() {
            if let Some(orig) = self.origin[i] {
                let mut v = yi.clone();
                if self.row_sign[i] < 0 {
                    v = -v;
                }
                if sense == Sense::Maximize {
                    v = -v;
                }
                out[orig] = v;
            }
        }
        out
    }
}

enum Phase {
    Optimal,
    Infeasible,
    Unbounded(usize),
}

/// Dense simplex tableau. Columns are the standard-form columns followed by
/// one artificial column per artificial row.
struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    reduced: Vec<Rational>,
    num_real: usize,
    pivots: usize,
    phase1_reduced: Option<Vec<Rational>>,
}

impl Tableau {
    fn new(std: &StandardForm) -> Tableau {
        let width = std.num_cols + std.num_artificial;
        let m = std.rows.len();
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        for (i, sparse) in std.rows.iter().enumerate() {
            let mut row = vec![Rational::zero(); width];
            for (j, a) in sparse {
                row[*j] = a.clone();
            }
            match std.initial_basic[i] {
                Basic::Slack(col) => basis.push(col),
                Basic::Artificial(k) => {
                    let col = std.num_cols + k;
                    row[col] = Rational::one();
                    basis.push(col);
                }
            }
            rows.push(row);
        }
        Tableau {
            rows,
            rhs: std.rhs.clone(),
            basis,
            reduced: vec![Rational::zero(); width],
            num_real: std.num_cols,
            pivots: 0,
            phase1_reduced: None,
        }
    }

    fn width(&self) -> usize {
        self.reduced.len()
    }

    fn set_costs(&mut self, cost: &[Rational]) {
        // reduced_j = c_j - Σ_i c_{basis[i]} T_ij
        let mut d = cost.to_vec();
        for (i, row) in self.rows.iter().enumerate() {
            let cb = &cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (j, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    d[j] -= cb * v;
                }
            }
        }
        self.reduced = d;
    }

    fn pivot(&mut self, r: usize, c: usize) {
        self.pivots += 1;
        let inv = self.rows[r][c].recip();
        if !inv.is_one() {
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
            self.rhs[r] *= &inv;
        }
        let nz: Vec<usize> = (0..self.width()).filter(|&j| !self.rows[r][j].is_zero()).collect();
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let pivot_rhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][c].clone();
            if f.is_zero() {
                continue;
            }
            let row = &mut self.rows[i];
            for &j in &nz {
                let delta = &f * &pivot_row[j];
                row[j] -= delta;
            }
            if !pivot_rhs.is_zero() {
                self.rhs[i] -= &f * &pivot_rhs;
            }
        }
        let f = self.reduced[c].clone();
        if !f.is_zero() {
            for &j in &nz {
                let delta = &f * &pivot_row[j];
                self.reduced[j] -= delta;
            }
        }
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }

    /// Runs simplex iterations with Bland's rule over columns `< limit`.
    fn iterate(&mut self, limit: usize, max_pivots: usize) -> Result<Option<usize>, LpError> {
        loop {
            let entering = (0..limit).find(|&j| self.reduced[j].is_negative());
            let Some(c) = entering else {
                return Ok(None);
            };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, _)) = leave else {
                return Ok(Some(c));
            };
            if self.pivots >= max_pivots {
                return Err(LpError::PivotLimit(max_pivots));
            }
            self.pivot(r, c);
        }
    }

    fn run(&mut self, std: &StandardForm, max_pivots: usize) -> Result<Phase, LpError> {
        let width = self.width();
        if std.num_artificial > 0 {
            let mut c1 = vec![Rational::zero(); width];
            for c in c1.iter_mut().skip(self.num_real) {
                *c = Rational::one();
            }
            self.set_costs(&c1);
            // phase one is bounded below by zero
            let unb = self.iterate(width, max_pivots)?;
            debug_assert!(unb.is_none());
            self.phase1_reduced = Some(self.reduced.clone());
            let infeasibility: Rational = (0..self.rows.len())
                .filter(|&i| self.basis[i] >= self.num_real)
                .map(|i| self.rhs[i].clone())
                .sum();
            if infeasibility.is_positive() {
                return Ok(Phase::Infeasible);
            }
            // drive remaining (zero-level) artificials out where possible; rows
            // where that fails are redundant and stay inert
            for r in 0..self.rows.len() {
                if self.basis[r] < self.num_real {
                    continue;
                }
                if let Some(c) = (0..self.num_real).find(|&j| !self.rows[r][j].is_zero()) {
                    if self.pivots >= max_pivots {
                        return Err(LpError::PivotLimit(max_pivots));
                    }
                    self.pivot(r, c);
                }
            }
        }
        let mut c2 = std.cost.clone();
        c2.resize(width, Rational::zero());
        self.set_costs(&c2);
        match self.iterate(self.num_real, max_pivots)? {
            None => Ok(Phase::Optimal),
            Some(c) => Ok(Phase::Unbounded(c)),
        }
    }

    fn primal(&self) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); self.num_real];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.num_real {
                x[b] = self.rhs[i].clone();
            }
        }
        x
    }

    /// Row duals read off the columns of the initial identity basis:
    /// `y_i = c_{init_i} - reduced_{init_i}`.
    fn duals_from(&self, std: &StandardForm, reduced: &[Rational], phase1: bool) -> Vec<Rational> {
        std.initial_basic
            .iter()
            .map(|b| match *b {
                Basic::Slack(col) => {
                    let c = if phase1 { Rational::zero() } else { std.cost[col].clone() };
                    c - &reduced[col]
                }
                Basic::Artificial(k) => {
                    let c = if phase1 { Rational::one() } else { Rational::zero() };
                    c - &reduced[std.num_cols + k]
                }
            })
            .collect()
    }

    fn duals(&self, std: &StandardForm) -> Vec<Rational> {
        self.duals_from(std, &self.reduced, false)
    }

    fn duals_phase1(&self, std: &StandardForm) -> Vec<Rational> {
        let reduced = self.phase1_reduced.as_ref().expect("phase one ran");
        self.duals_from(std, reduced, true)
    }

    fn ray(&self, c: usize, num_cols: usize) -> Vec<Rational> {
        let mut d = vec![Rational::zero(); num_cols];
        d[c] = Rational::one();
        for (i, &b) in self.basis.iter().enumerate() {
            if b < num_cols {
                d[b] = -&self.rows[i][c];
            }
        }
        d
    }
}

/// Is `point` a convex combination of `vertices`? Solves the feasibility LP
/// `λ >= 0, Σ λ = 1, Σ λ_i v_i = point`.
pub fn membership_in_hull(point: &[Rational], vertices: &[Vec<Rational>]) -> Result<bool, LpError> {
    Ok(hull_weights(point, vertices)?.is_some())
}

/// Convex weights expressing `point` over `vertices`, if they exist. The
/// returned weights are verified exactly.
pub fn hull_weights(point: &[Rational], vertices: &[Vec<Rational>]) -> Result<Option<Vec<Rational>>, LpError> {
    if vertices.is_empty() {
        return Err(LpError::Malformed("empty vertex list".into()));
    }
    let dim = point.len();
    if vertices.iter().any(|v| v.len() != dim) {
        return Err(LpError::Malformed("vertex dimension differs from point".into()));
    }
    let n = vertices.len();
    let mut lp = LinearProgram::new(n, Sense::Minimize);
    lp.add_sparse((0..n).map(|i| (i, Rational::one())), Relation::Eq, Rational::one())?;
    for k in 0..dim {
        lp.add_sparse(
            (0..n).filter(|&i| !vertices[i][k].is_zero()).map(|i| (i, vertices[i][k].clone())),
            Relation::Eq,
            point[k].clone(),
        )?;
    }
    let out = lp.solve()?;
    match out.status {
        LpStatus::Optimal => {
            let w = out.point.expect("optimal point");
            for k in 0..dim {
                let s: Rational = (0..n).map(|i| &w[i] * &vertices[i][k]).sum();
                if s != point[k] {
                    return Err(LpError::Verification("hull weights do not reproduce the point".into()));
                }
            }
            Ok(Some(w))
        }
        LpStatus::Infeasible => Ok(None),
        LpStatus::Unbounded => Err(LpError::Verification("feasibility LP reported unbounded".into())),
    }
}

/// The gauge of the symmetric hull `co(V ∪ -V)` at `point`: the least `t >= 0`
/// with `point ∈ t · co(V ∪ -V)`, or `None` when `point` is outside the span.
pub fn symmetric_hull_gauge(point: &[Rational], vertices: &[Vec<Rational>]) -> Result<Option<Rational>, LpError> {
    if vertices.is_empty() {
        return Err(LpError::Malformed("empty vertex list".into()));
    }
    let dim = point.len();
    if vertices.iter().any(|v| v.len() != dim) {
        return Err(LpError::Malformed("vertex dimension differs from point".into()));
    }
    let n = vertices.len();
    // variables: μ⁺_i, μ⁻_i >= 0; minimize Σ (μ⁺ + μ⁻) s.t. Σ (μ⁺_i - μ⁻_i) v_i = point
    let mut lp = LinearProgram::new(2 * n, Sense::Minimize);
    lp.set_objective(vec![Rational::one(); 2 * n])?;
    for k in 0..dim {
        let terms = (0..n).filter(|&i| !vertices[i][k].is_zero()).flat_map(|i| {
            [(i, vertices[i][k].clone()), (n + i, -&vertices[i][k])]
        });
        lp.add_sparse(terms, Relation::Eq, point[k].clone())?;
    }
    let out = lp.solve()?;
    match out.status {
        LpStatus::Optimal => Ok(out.value),
        LpStatus::Infeasible => Ok(None),
        LpStatus::Unbounded => Err(LpError::Verification("gauge LP reported unbounded".into())),
    }
}
