//! Self-contained dense linear-program solver.
//!
//! Two-phase tableau simplex, generic over the scalar: `f64` with
//! tolerances and max-norm equilibration, or `BigRational` with exact
//! pivoting. Instances here are small (a few hundred variables), so
//! determinism and exactness outrank speed: entering variables follow
//! Dantzig's rule with fixed tie-breaking and fall back to Bland's rule
//! after a run of degenerate pivots, which guarantees termination.
//!
//! Norm objectives (`l1`/`linf`) are reduced to standard LP form by the
//! caller; the solver itself is norm-agnostic.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// Optimization direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Constraint relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rel::Le => write!(f, "<="),
            Rel::Eq => write!(f, "="),
            Rel::Ge => write!(f, ">="),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Constraint<S> {
    pub coeffs: Vec<S>,
    pub rel: Rel,
    pub rhs: S,
}

/// A dense linear program over scalar `S`.
#[derive(Debug, Clone)]
pub struct LinearProgram<S = f64> {
    pub sense: Sense,
    pub objective: Vec<S>,
    pub constraints: Vec<Constraint<S>>,
    /// Per-variable `(lower, upper)`; `None` means unbounded on that side.
    pub bounds: Vec<(Option<S>, Option<S>)>,
}

impl<S: Clone> LinearProgram<S> {
    pub fn new(sense: Sense, objective: Vec<S>) -> Self {
        let n = objective.len();
        LinearProgram {
            sense,
            objective,
            constraints: Vec::new(),
            bounds: vec![(None, None); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_constraint(&mut self, coeffs: Vec<S>, rel: Rel, rhs: S) {
        self.constraints.push(Constraint { coeffs, rel, rhs });
    }

    pub fn set_bounds(&mut self, var: usize, lo: Option<S>, hi: Option<S>) {
        self.bounds[var] = (lo, hi);
    }
}

impl fmt::Display for LinearProgram<f64> {
    /// Debug dump: `min/max c.x` then one constraint per line. Not a
    /// stability-guaranteed interface.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sense = match self.sense {
            Sense::Minimize => "min",
            Sense::Maximize => "max",
        };
        writeln!(f, "{sense} {:?}", self.objective)?;
        for c in &self.constraints {
            writeln!(f, "  {:?} {} {}", c.coeffs, c.rel, c.rhs)?;
        }
        for (j, (lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_some() || hi.is_some() {
                writeln!(f, "  x{j} in [{lo:?}, {hi:?}]")?;
            }
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

#[derive(Debug, Clone)]
pub struct LpSolution<S = f64> {
    pub status: LpStatus,
    /// Objective value in the user's sense; zero unless `Optimal`.
    pub value: S,
    /// Assignment per user variable; empty unless `Optimal`.
    pub primal: Vec<S>,
    /// Multipliers for the user constraints (in the user's sense).
    pub dual_certificate: Option<Vec<S>>,
    /// Dual objective value; agrees with `value` at `Optimal`.
    pub dual_value: Option<S>,
    pub pivots: usize,
}

/// Arithmetic backend for [`solve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arithmetic {
    Float,
    Rational,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub max_pivots: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub bland_after: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_pivots: 0, // 0 = auto: scaled with problem size at solve time
            bland_after: 40,
        }
    }
}

/// Scalar abstraction: `f64` (with tolerances) or `BigRational` (exact).
pub trait LpNum:
    Clone
    + fmt::Debug
    + PartialOrd
    + Zero
    + One
    + Neg<Output = Self>
    + Signed
    + for<'a> std::ops::AddAssign<&'a Self>
    + for<'a> std::ops::SubAssign<&'a Self>
{
    /// Exact arithmetic never drifts and skips refactorization passes.
    const EXACT: bool;
    /// Feasibility / reduced-cost tolerance (zero for exact arithmetic).
    fn tol() -> Self;
    /// Smallest acceptable pivot magnitude.
    fn pivot_tol() -> Self;
    /// Pivot floor relative to the largest entry of the pivot column/row;
    /// entries below it are treated as zero when choosing pivots (they are
    /// drift noise in float mode). Zero for exact arithmetic.
    fn rel_pivot_floor() -> Self;
    fn to_f64_lossy(&self) -> f64;
}

impl LpNum for f64 {
    const EXACT: bool = false;
    fn tol() -> f64 {
        1e-9
    }
    fn pivot_tol() -> f64 {
        1e-11
    }
    fn rel_pivot_floor() -> f64 {
        1e-9
    }
    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

impl LpNum for BigRational {
    const EXACT: bool = true;
    fn tol() -> BigRational {
        BigRational::zero()
    }
    fn pivot_tol() -> BigRational {
        BigRational::zero()
    }
    fn rel_pivot_floor() -> BigRational {
        BigRational::zero()
    }
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// Solve in the requested arithmetic. In `Rational` mode the `f64` data is
/// snapped to the exact rationals it represents, the optimum is computed
/// exactly and rounded once at the boundary.
pub fn solve(lp: &LinearProgram<f64>, arithmetic: Arithmetic) -> Result<LpSolution<f64>> {
    solve_with(lp, arithmetic, SolverOptions::default())
}

pub fn solve_with(
    lp: &LinearProgram<f64>,
    arithmetic: Arithmetic,
    opts: SolverOptions,
) -> Result<LpSolution<f64>> {
    match arithmetic {
        Arithmetic::Float => solve_generic(lp, true, opts),
        Arithmetic::Rational => {
            let exact = to_rational_program(lp)?;
            let sol = solve_generic(&exact, false, opts)?;
            Ok(LpSolution {
                status: sol.status,
                value: sol.value.to_f64_lossy(),
                primal: sol.primal.iter().map(LpNum::to_f64_lossy).collect(),
                dual_certificate: sol
                    .dual_certificate
                    .map(|d| d.iter().map(LpNum::to_f64_lossy).collect()),
                dual_value: sol.dual_value.map(|d| d.to_f64_lossy()),
                pivots: sol.pivots,
            })
        }
    }
}

/// Solve an exact-rational program directly.
pub fn solve_exact(lp: &LinearProgram<BigRational>) -> Result<LpSolution<BigRational>> {
    solve_generic(lp, false, SolverOptions::default())
}

fn to_rational_program(lp: &LinearProgram<f64>) -> Result<LinearProgram<BigRational>> {
    let conv = |x: &f64| -> Result<BigRational> {
        BigRational::from_float(*x).ok_or(Error::InvalidInput(format!("non-finite LP datum {x}")))
    };
    let objective = lp.objective.iter().map(conv).collect::<Result<Vec<_>>>()?;
    let mut out = LinearProgram::new(lp.sense, objective);
    for c in &lp.constraints {
        out.add_constraint(
            c.coeffs.iter().map(conv).collect::<Result<Vec<_>>>()?,
            c.rel,
            conv(&c.rhs)?,
        );
    }
    for (j, (lo, hi)) in lp.bounds.iter().enumerate() {
        let lo = lo.as_ref().map(conv).transpose()?;
        let hi = hi.as_ref().map(conv).transpose()?;
        out.set_bounds(j, lo, hi);
    }
    Ok(out)
}

/// How a user variable maps onto standard-form variables.
#[derive(Debug, Clone)]
enum VarMap<S> {
    /// `x = shift + sign * y[col]` with `y >= 0`.
    Shifted { col: usize, shift: S, negated: bool },
    /// Free variable `x = y[pos] - y[neg]`.
    Split { pos: usize, neg: usize },
}

pub fn solve_generic<S>(
    lp: &LinearProgram<S>,
    scale: bool,
    opts: SolverOptions,
) -> Result<LpSolution<S>>
where
    S: LpNum,
    for<'a> &'a S: Mul<&'a S, Output = S>
        + Div<&'a S, Output = S>
        + Add<&'a S, Output = S>
        + Sub<&'a S, Output = S>
        + Neg<Output = S>,
{
    let n_user = lp.objective.len();
    if lp.bounds.len() != n_user {
        return Err(Error::InvalidInput(format!(
            "bounds length {} != objective length {n_user}",
            lp.bounds.len()
        )));
    }
    for (k, c) in lp.constraints.iter().enumerate() {
        if c.coeffs.len() != n_user {
            return Err(Error::InvalidInput(format!(
                "constraint {k} has {} coefficients, expected {n_user}",
                c.coeffs.len()
            )));
        }
    }

    // Work in minimization form.
    let minimize: Vec<S> = match lp.sense {
        Sense::Minimize => lp.objective.clone(),
        Sense::Maximize => lp.objective.iter().map(|c| -c.clone()).collect(),
    };

    // ---- Variable transformation to y >= 0 -------------------------------
    let mut var_map: Vec<VarMap<S>> = Vec::with_capacity(n_user);
    let mut n_std = 0usize;
    // Bound rows (coeff col, rhs) appended after the user rows: y[col] <= rhs.
    let mut bound_rows: Vec<(usize, S)> = Vec::new();
    for (lo, hi) in &lp.bounds {
        match (lo, hi) {
            (Some(l), None) => {
                var_map.push(VarMap::Shifted {
                    col: n_std,
                    shift: l.clone(),
                    negated: false,
                });
                n_std += 1;
            }
            (Some(l), Some(u)) => {
                if u < l {
                    return Ok(infeasible(opts));
                }
                var_map.push(VarMap::Shifted {
                    col: n_std,
                    shift: l.clone(),
                    negated: false,
                });
                bound_rows.push((n_std, u - l));
                n_std += 1;
            }
            (None, Some(u)) => {
                // x = u - y.
                var_map.push(VarMap::Shifted {
                    col: n_std,
                    shift: u.clone(),
                    negated: true,
                });
                n_std += 1;
            }
            (None, None) => {
                var_map.push(VarMap::Split {
                    pos: n_std,
                    neg: n_std + 1,
                });
                n_std += 2;
            }
        }
    }

    // Structural rows: user constraints then bound rows.
    let n_user_rows = lp.constraints.len();
    let m = n_user_rows + bound_rows.len();
    let mut rows: Vec<Vec<S>> = vec![vec![S::zero(); n_std]; m];
    let mut rels: Vec<Rel> = Vec::with_capacity(m);
    let mut rhs: Vec<S> = Vec::with_capacity(m);
    for (k, c) in lp.constraints.iter().enumerate() {
        let mut b = c.rhs.clone();
        for (j, a) in c.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            match &var_map[j] {
                VarMap::Shifted { col, shift, negated } => {
                    b -= &(a * shift);
                    if *negated {
                        rows[k][*col] -= a;
                    } else {
                        rows[k][*col] += a;
                    }
                }
                VarMap::Split { pos, neg } => {
                    rows[k][*pos] += a;
                    rows[k][*neg] -= a;
                }
            }
        }
        rels.push(c.rel);
        rhs.push(b);
    }
    for (i, (col, ub)) in bound_rows.iter().enumerate() {
        rows[n_user_rows + i][*col] = S::one();
        rels.push(Rel::Le);
        rhs.push(ub.clone());
    }

    // Objective on standard vars plus constant from shifts.
    let mut cost = vec![S::zero(); n_std];
    let mut obj_const = S::zero();
    for (j, c) in minimize.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        match &var_map[j] {
            VarMap::Shifted { col, shift, negated } => {
                obj_const += &(c * shift);
                if *negated {
                    cost[*col] -= c;
                } else {
                    cost[*col] += c;
                }
            }
            VarMap::Split { pos, neg } => {
                cost[*pos] += c;
                cost[*neg] -= c;
            }
        }
    }

    // ---- Equilibration (float only) --------------------------------------
    // Max-norm row scaling then column scaling; undone at exit.
    let mut row_scale = vec![S::one(); m];
    let mut col_scale = vec![S::one(); n_std];
    if scale {
        for i in 0..m {
            let mx = rows[i]
                .iter()
                .map(|a| a.abs())
                .fold(S::zero(), |acc, v| if v > acc { v } else { acc });
            if !mx.is_zero() && !mx.is_one() {
                let r = &S::one() / &mx;
                for a in rows[i].iter_mut() {
                    *a = &*a * &r;
                }
                rhs[i] = &rhs[i] * &r;
                row_scale[i] = r;
            }
        }
        for j in 0..n_std {
            let mx = (0..m)
                .map(|i| rows[i][j].abs())
                .fold(S::zero(), |acc, v| if v > acc { v } else { acc });
            if !mx.is_zero() && !mx.is_one() {
                let cmul = &S::one() / &mx;
                for row in rows.iter_mut() {
                    row[j] = &row[j] * &cmul;
                }
                cost[j] = &cost[j] * &cmul;
                col_scale[j] = cmul;
            }
        }
    }

    // ---- Sign-normalize rhs, add slacks and artificials -------------------
    let mut row_sign = vec![false; m]; // true if the row was negated
    for i in 0..m {
        if rhs[i] < S::zero() {
            for a in rows[i].iter_mut() {
                *a = -a.clone();
            }
            rhs[i] = -rhs[i].clone();
            rels[i] = match rels[i] {
                Rel::Le => Rel::Ge,
                Rel::Ge => Rel::Le,
                Rel::Eq => Rel::Eq,
            };
            row_sign[i] = true;
        }
    }
    // Slack for every inequality row. A `<=` slack enters the initial basis
    // directly; `>=` and `=` rows get an artificial (a `<=` row must NOT
    // also get one, or the slack and artificial would be identical columns
    // and a degenerate basis could pick both, going singular).
    let n_slack = rels.iter().filter(|r| **r != Rel::Eq).count();
    let n_art = rels.iter().filter(|r| **r != Rel::Le).count();
    let art0 = n_std + n_slack;
    let n_total = art0 + n_art;
    let width = n_total + 1; // rhs column appended

    let mut t: Vec<Vec<S>> = Vec::with_capacity(m);
    let mut basis: Vec<usize> = Vec::with_capacity(m);
    {
        let mut slack_idx = n_std;
        let mut art_idx = art0;
        for i in 0..m {
            let mut row = vec![S::zero(); width];
            row[..n_std].clone_from_slice(&rows[i]);
            match rels[i] {
                Rel::Le => {
                    row[slack_idx] = S::one();
                    basis.push(slack_idx);
                    slack_idx += 1;
                }
                Rel::Ge => {
                    row[slack_idx] = -S::one();
                    slack_idx += 1;
                    row[art_idx] = S::one();
                    basis.push(art_idx);
                    art_idx += 1;
                }
                Rel::Eq => {
                    row[art_idx] = S::one();
                    basis.push(art_idx);
                    art_idx += 1;
                }
            }
            row[n_total] = rhs[i].clone();
            t.push(row);
        }
    }
    let mut dead_row = vec![false; m];
    // Pristine copy for refactorization: accumulated pivot rounding is
    // flushed by rebuilding the tableau from this data.
    let orig: Vec<Vec<S>> = t.clone();

    let max_pivots = if opts.max_pivots == 0 {
        200 * (m + n_total) + 5000
    } else {
        opts.max_pivots
    };
    let mut pivots_used = 0usize;

    // ---- Phase 1 ----------------------------------------------------------
    {
        let phase1_cost = |j: usize| -> S {
            if j >= art0 {
                S::one()
            } else {
                S::zero()
            }
        };
        let status = run_phase(
            &mut t,
            &mut basis,
            &dead_row,
            &orig,
            &phase1_cost,
            n_total,
            &|_j| true,
            max_pivots,
            opts.bland_after,
            &mut pivots_used,
        )?;
        if status == LpStatus::Unbounded {
            // Phase 1 objective is bounded below by zero.
            return Err(Error::InvalidInput(
                "phase 1 reported unbounded; data is inconsistent".into(),
            ));
        }
        let mut p1: S = S::zero();
        for (i, &b) in basis.iter().enumerate() {
            if b >= art0 && !dead_row[i] {
                p1 += &t[i][n_total];
            }
        }
        let b_norm = rhs.iter().fold(S::zero(), |acc, v| &acc + &v.abs());
        let mut feas_budget = S::tol();
        feas_budget = &feas_budget * &(&S::one() + &b_norm);
        if p1 > feas_budget {
            return Ok(infeasible_with(pivots_used, opts));
        }
        // Drive remaining artificials out of the basis, pivoting on the
        // largest available entry; rows with none are redundant.
        for i in 0..m {
            if basis[i] < art0 {
                continue;
            }
            let mut best: Option<usize> = None;
            for j in 0..art0 {
                let a = t[i][j].abs();
                if a > S::pivot_tol() && best.is_none_or(|b| a > t[i][b].abs()) {
                    best = Some(j);
                }
            }
            match best {
                Some(j) => {
                    pivot(&mut t, &mut basis, i, j);
                    pivots_used += 1;
                }
                None => {
                    dead_row[i] = true; // redundant constraint
                }
            }
        }
    }

    // ---- Phase 2 ----------------------------------------------------------
    let phase2_cost = |j: usize| -> S {
        if j < n_std {
            cost[j].clone()
        } else {
            S::zero()
        }
    };
    let status = run_phase(
        &mut t,
        &mut basis,
        &dead_row,
        &orig,
        &phase2_cost,
        n_total,
        &|j| j < art0, // artificials may not re-enter
        max_pivots,
        opts.bland_after,
        &mut pivots_used,
    )?;
    if status == LpStatus::Unbounded {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            value: S::zero(),
            primal: Vec::new(),
            dual_certificate: None,
            dual_value: None,
            pivots: pivots_used,
        });
    }

    // ---- Extract primal ----------------------------------------------------
    let mut y = vec![S::zero(); n_std];
    for (i, &b) in basis.iter().enumerate() {
        if b < n_std && !dead_row[i] {
            y[b] = t[i][n_total].clone();
        }
    }
    // Undo column scaling.
    for j in 0..n_std {
        y[j] = &y[j] * &col_scale[j];
    }
    let mut primal = Vec::with_capacity(n_user);
    for vm in &var_map {
        let x = match vm {
            VarMap::Shifted { col, shift, negated } => {
                if *negated {
                    shift - &y[*col]
                } else {
                    shift + &y[*col]
                }
            }
            VarMap::Split { pos, neg } => &y[*pos] - &y[*neg],
        };
        primal.push(x);
    }
    // Objective evaluated on the original data.
    let mut value = S::zero();
    for (c, x) in lp.objective.iter().zip(&primal) {
        value += &(c * x);
    }

    // ---- Extract duals -----------------------------------------------------
    // y = B^{-T} c_B from a fresh factorization of the final basis.
    let mut dual = vec![S::zero(); m];
    if m > 0 {
        let b_mat: Vec<Vec<S>> = (0..m)
            .map(|r| (0..m).map(|c| orig[r][basis[c]].clone()).collect())
            .collect();
        let lu = LuFactors::factor(b_mat)?;
        let mut y: Vec<S> = basis.iter().map(|&b| phase2_cost(b)).collect();
        lu.solve_transpose_in_place(&mut y);
        for k in 0..m {
            let mut acc = y[k].clone();
            // Undo the rhs sign flip and the row scaling.
            if row_sign[k] {
                acc = -acc;
            }
            acc = &acc * &row_scale[k];
            dual[k] = acc;
        }
    }
    // Dual objective: y.b over all structural rows plus the shift constant.
    let mut dual_value = obj_const.clone();
    for (k, c) in lp.constraints.iter().enumerate() {
        // Undo the variable-shift adjustment: the shifted rhs was used in
        // the standard form, and the objective constant compensates.
        let mut b = c.rhs.clone();
        for (j, a) in c.coeffs.iter().enumerate() {
            if let VarMap::Shifted { shift, .. } = &var_map[j] {
                if !a.is_zero() {
                    b -= &(a * shift);
                }
            }
        }
        dual_value += &(&dual[k] * &b);
    }
    for (i, (_col, ub)) in bound_rows.iter().enumerate() {
        dual_value += &(&dual[n_user_rows + i] * ub);
    }
    // obj_const already includes the shift contributions of the objective;
    // the per-row adjustments above put the constraint side on the same
    // footing, so dual_value now matches the standard-form identity.

    let (value, dual_value, dual_user) = match lp.sense {
        Sense::Minimize => (value, dual_value, dual[..n_user_rows].to_vec()),
        Sense::Maximize => (
            value,
            -dual_value,
            dual[..n_user_rows].iter().map(|d| -d.clone()).collect(),
        ),
    };

    Ok(LpSolution {
        status: LpStatus::Optimal,
        value,
        primal,
        dual_certificate: Some(dual_user),
        dual_value: Some(dual_value),
        pivots: pivots_used,
    })
}

fn infeasible<S: LpNum>(_opts: SolverOptions) -> LpSolution<S> {
    LpSolution {
        status: LpStatus::Infeasible,
        value: S::zero(),
        primal: Vec::new(),
        dual_certificate: None,
        dual_value: None,
        pivots: 0,
    }
}

fn infeasible_with<S: LpNum>(pivots: usize, opts: SolverOptions) -> LpSolution<S> {
    let mut s = infeasible(opts);
    s.pivots = pivots;
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PhaseOutcome {
    Optimal,
    Unbounded,
    /// Hit the chunk budget; caller refreshes and resumes.
    Paused,
}

/// Drive a phase to confirmed optimality. Float arithmetic runs in chunks:
/// after each chunk the tableau is rebuilt from the original data for the
/// current basis, any negative right-hand sides introduced by drift are
/// repaired with dual-simplex steps, and optimality is only declared once a
/// freshly refactorized pass makes no further pivots.
#[allow(clippy::too_many_arguments)]
fn run_phase<S>(
    t: &mut Vec<Vec<S>>,
    basis: &mut Vec<usize>,
    dead_row: &[bool],
    orig: &[Vec<S>],
    cost: &dyn Fn(usize) -> S,
    n_total: usize,
    may_enter: &dyn Fn(usize) -> bool,
    max_pivots: usize,
    bland_after: usize,
    pivots_used: &mut usize,
) -> Result<LpStatus>
where
    S: LpNum,
    for<'a> &'a S: Mul<&'a S, Output = S>
        + Div<&'a S, Output = S>
        + Sub<&'a S, Output = S>
        + Add<&'a S, Output = S>,
{
    if S::EXACT || t.is_empty() {
        let outcome = run_simplex(
            t, basis, dead_row, cost, n_total, may_enter, max_pivots, bland_after, pivots_used, 0,
        )?;
        return Ok(match outcome {
            PhaseOutcome::Unbounded => LpStatus::Unbounded,
            _ => LpStatus::Optimal,
        });
    }
    let chunk = 256usize;
    let feas_tol = {
        let b_max = t
            .iter()
            .map(|row| row[n_total].abs())
            .fold(S::zero(), |acc, v| if v > acc { v } else { acc });
        let mut tol = S::tol();
        tol = &tol * &(&S::one() + &b_max);
        tol
    };
    // `clean` means "the tableau was refactorized and no pivot has run
    // since": only verdicts reached in that state are trusted.
    let mut clean = false;
    loop {
        let before = *pivots_used;
        let outcome = run_simplex(
            t,
            basis,
            dead_row,
            cost,
            n_total,
            may_enter,
            max_pivots,
            bland_after,
            pivots_used,
            chunk,
        )?;
        let untouched = *pivots_used == before;
        match outcome {
            PhaseOutcome::Unbounded if clean && untouched => return Ok(LpStatus::Unbounded),
            PhaseOutcome::Optimal if clean && untouched => return Ok(LpStatus::Optimal),
            _ => {}
        }
        refresh(t, basis, orig)?;
        dual_repair(
            t,
            basis,
            dead_row,
            cost,
            n_total,
            may_enter,
            &feas_tol,
            max_pivots,
            pivots_used,
        )?;
        clean = true;
    }
}

/// Dual-simplex steps restoring `rhs >= 0` after refactorization. Requires
/// near-nonnegative reduced costs, which hold at claimed optimality and
/// approximately mid-run; small violations only delay convergence.
#[allow(clippy::too_many_arguments)]
fn dual_repair<S>(
    t: &mut [Vec<S>],
    basis: &mut [usize],
    dead_row: &[bool],
    cost: &dyn Fn(usize) -> S,
    n_total: usize,
    may_enter: &dyn Fn(usize) -> bool,
    feas_tol: &S,
    max_pivots: usize,
    pivots_used: &mut usize,
) -> Result<()>
where
    S: LpNum,
    for<'a> &'a S: Mul<&'a S, Output = S> + Div<&'a S, Output = S> + Sub<&'a S, Output = S>,
{
    let m = t.len();
    let rhs_col = n_total;
    let mut z: Vec<S> = compute_reduced_costs(t, basis, cost, n_total);
    let mut in_basis = vec![false; n_total];
    for &b in basis.iter() {
        in_basis[b] = true;
    }
    loop {
        // Most negative rhs row, ties to the lowest basis index.
        let mut row: Option<usize> = None;
        for i in 0..m {
            if dead_row[i] {
                continue;
            }
            if t[i][rhs_col] < -feas_tol.clone() {
                match row {
                    None => row = Some(i),
                    Some(r) => {
                        if t[i][rhs_col] < t[r][rhs_col]
                            || (t[i][rhs_col] == t[r][rhs_col] && basis[i] < basis[r])
                        {
                            row = Some(i);
                        }
                    }
                }
            }
        }
        let Some(r) = row else {
            return Ok(());
        };
        // Dual ratio test over negative row entries above a row-relative
        // floor: find the minimum ratio z_j / -t[r][j], then prefer the
        // largest pivot within a tolerance band of it.
        let row_max = (0..n_total)
            .filter(|&j| !in_basis[j] && may_enter(j))
            .map(|j| t[r][j].abs())
            .fold(S::zero(), |acc, v| if v > acc { v } else { acc });
        let mut floor = &S::rel_pivot_floor() * &row_max;
        if floor < S::pivot_tol() {
            floor = S::pivot_tol();
        }
        let neg_floor = -floor.clone();
        let mut theta: Option<S> = None;
        for j in 0..n_total {
            if in_basis[j] || !may_enter(j) || t[r][j] >= neg_floor {
                continue;
            }
            let ratio = &z[j] / &(-t[r][j].clone());
            if theta.as_ref().is_none_or(|th| ratio < *th) {
                theta = Some(ratio);
            }
        }
        let Some(theta) = theta else {
            // No repair direction: the refreshed basis row is unsatisfiable
            // within tolerance, which only happens when drift has walked far
            // outside the polytope.
            return Err(Error::SolverStalled(*pivots_used));
        };
        let band = {
            let mut b = S::tol();
            let one_plus = S::one() + theta.abs();
            b = &b * &one_plus;
            theta + b
        };
        let mut col_best: Option<usize> = None;
        for j in 0..n_total {
            if in_basis[j] || !may_enter(j) || t[r][j] >= neg_floor {
                continue;
            }
            let ratio = &z[j] / &(-t[r][j].clone());
            if ratio > band {
                continue;
            }
            match col_best {
                None => col_best = Some(j),
                Some(bj) => {
                    if t[r][j].abs() > t[r][bj].abs() {
                        col_best = Some(j);
                    }
                }
            }
        }
        let col = col_best.expect("band contains the argmin column");
        *pivots_used += 1;
        if *pivots_used > max_pivots {
            return Err(Error::SolverStalled(*pivots_used));
        }
        let piv = t[r][col].clone();
        let zc = z[col].clone();
        for j in 0..n_total {
            let delta = &(&zc * &t[r][j]) / &piv;
            z[j] -= &delta;
        }
        in_basis[basis[r]] = false;
        in_basis[col] = true;
        pivot(t, basis, r, col);
        z[col] = S::zero();
    }
}

fn compute_reduced_costs<S>(
    t: &[Vec<S>],
    basis: &[usize],
    cost: &dyn Fn(usize) -> S,
    n_total: usize,
) -> Vec<S>
where
    S: LpNum,
    for<'a> &'a S: Mul<&'a S, Output = S>,
{
    let mut z: Vec<S> = (0..n_total)
        .map(|j| {
            let mut r = cost(j);
            for (i, &b) in basis.iter().enumerate() {
                let cb = cost(b);
                if !cb.is_zero() {
                    r -= &(&cb * &t[i][j]);
                }
            }
            r
        })
        .collect();
    for &b in basis.iter() {
        z[b] = S::zero();
    }
    z
}

/// Rebuild `t = B^{-1} orig` for the current basis via a fresh LU
/// factorization of the basis matrix, flushing accumulated pivot error.
fn refresh<S>(t: &mut [Vec<S>], basis: &[usize], orig: &[Vec<S>]) -> Result<()>
where
    S: LpNum,
    for<'a> &'a S: Mul<&'a S, Output = S> + Div<&'a S, Output = S> + Sub<&'a S, Output = S>,
{
    let m = t.len();
    if m == 0 {
        return Ok(());
    }
    let width = t[0].len();
    let b_mat: Vec<Vec<S>> = (0..m)
        .map(|r| (0..m).map(|c| orig[r][basis[c]].clone()).collect())
        .collect();
    let lu = LuFactors::factor(b_mat)?;
    let mut col = vec![S::zero(); m];
    for j in 0..width {
        for (r, c) in col.iter_mut().enumerate() {
            *c = orig[r][j].clone();
        }
        lu.solve_in_place(&mut col);
        for (r, v) in col.iter().enumerate() {
            t[r][j] = v.clone();
        }
    }
    // Basic columns are unit vectors by definition; snap away LU noise so
    // that downstream pivoting keeps them exact.
    for (i, &b) in basis.iter().enumerate() {
        for (r, row) in t.iter_mut().enumerate() {
            row[b] = if r == i { S::one() } else { S::zero() };
        }
    }
    Ok(())
}

/// Dense LU with partial pivoting, generic over the scalar.
struct LuFactors<S> {
    lu: Vec<Vec<S>>,
    perm: Vec<usize>,
}

impl<S> LuFactors<S>
where
    S: LpNum,
    for<'a> &'a S: Mul<&'a S, Output = S> + Div<&'a S, Output = S> + Sub<&'a S, Output = S>,
{
    fn factor(mut a: Vec<Vec<S>>) -> Result<Self> {
        let m = a.len();
        let mut perm: Vec<usize> = (0..m).collect();
        for k in 0..m {
            let mut piv = k;
            for r in (k + 1)..m {
                if a[r][k].abs() > a[piv][k].abs() {
                    piv = r;
                }
            }
            if a[piv][k].is_zero() {
                return Err(Error::InvalidInput(format!(
                    "singular basis matrix during refactorization (pivot column {k} of {m})"
                )));
            }
            if piv != k {
                a.swap(piv, k);
                perm.swap(piv, k);
            }
            let diag = a[k][k].clone();
            for r in (k + 1)..m {
                if a[r][k].is_zero() {
                    continue;
                }
                let factor = &a[r][k] / &diag;
                for c in (k + 1)..m {
                    let delta = &factor * &a[k][c];
                    a[r][c] -= &delta;
                }
                a[r][k] = factor;
            }
        }
        Ok(LuFactors { lu: a, perm })
    }

    fn solve_in_place(&self, b: &mut [S]) {
        let m = b.len();
        // Apply the row permutation.
        let mut x: Vec<S> = (0..m).map(|i| b[self.perm[i]].clone()).collect();
        // Forward substitution (unit lower triangle).
        for i in 0..m {
            for k in 0..i {
                let delta = &self.lu[i][k] * &x[k];
                x[i] -= &delta;
            }
        }
        // Back substitution.
        for i in (0..m).rev() {
            for k in (i + 1)..m {
                let delta = &self.lu[i][k] * &x[k];
                x[i] -= &delta;
            }
            x[i] = &x[i] / &self.lu[i][i];
        }
        b.clone_from_slice(&x);
    }

    /// Solve `A^T y = c` given `PA = LU`: first `U^T z = c`, then
    /// `L^T w = z`, finally undo the permutation.
    fn solve_transpose_in_place(&self, c: &mut [S]) {
        let m = c.len();
        let mut z = vec![S::zero(); m];
        for i in 0..m {
            let mut acc = c[i].clone();
            for k in 0..i {
                let delta = &self.lu[k][i] * &z[k];
                acc -= &delta;
            }
            z[i] = &acc / &self.lu[i][i];
        }
        let mut w = z;
        for i in (0..m).rev() {
            let mut acc = w[i].clone();
            for k in (i + 1)..m {
                let delta = &self.lu[k][i] * &w[k];
                acc -= &delta;
            }
            w[i] = acc;
        }
        for (i, v) in w.into_iter().enumerate() {
            c[self.perm[i]] = v;
        }
    }
}

/// Gauss-Jordan pivot on (row, col), updating the basis.
fn pivot<S>(t: &mut [Vec<S>], basis: &mut [usize], row: usize, col: usize)
where
    S: LpNum,
    for<'a> &'a S: Mul<&'a S, Output = S> + Div<&'a S, Output = S>,
{
    let width = t[row].len();
    let piv = t[row][col].clone();
    for a in t[row].iter_mut() {
        *a = &*a / &piv;
    }
    for i in 0..t.len() {
        if i == row || t[i][col].is_zero() {
            continue;
        }
        let factor = t[i][col].clone();
        for j in 0..width {
            let delta = &factor * &t[row][j];
            t[i][j] -= &delta;
        }
        t[i][col] = S::zero(); // exact zero regardless of rounding
    }
    basis[row] = col;
}

/// Run the primal simplex loop for the given cost function, stopping at
/// optimality, unboundedness, or after `pause_after` pivots (0 = no pause).
#[allow(clippy::too_many_arguments)]
fn run_simplex<S>(
    t: &mut Vec<Vec<S>>,
    basis: &mut Vec<usize>,
    dead_row: &[bool],
    cost: &dyn Fn(usize) -> S,
    n_total: usize,
    may_enter: &dyn Fn(usize) -> bool,
    max_pivots: usize,
    bland_after: usize,
    pivots_used: &mut usize,
    pause_after: usize,
) -> Result<PhaseOutcome>
where
    S: LpNum,
    for<'a> &'a S: Mul<&'a S, Output = S>
        + Div<&'a S, Output = S>
        + Sub<&'a S, Output = S>
        + Add<&'a S, Output = S>,
{
    let m = t.len();
    let rhs_col = n_total;
    let mut z = compute_reduced_costs(t, basis, cost, n_total);
    let mut in_basis = vec![false; n_total];
    for &b in basis.iter() {
        in_basis[b] = true;
    }

    let mut bland = false;
    let mut degenerate_run = 0usize;
    let mut pivots_here = 0usize;
    loop {
        if pause_after > 0 && pivots_here >= pause_after {
            return Ok(PhaseOutcome::Paused);
        }
        // Entering variable.
        let tol = S::tol();
        let entering = if bland {
            (0..n_total).find(|&j| !in_basis[j] && may_enter(j) && z[j] < -tol.clone())
        } else {
            let mut best: Option<(usize, S)> = None;
            for j in 0..n_total {
                if in_basis[j] || !may_enter(j) || z[j] >= -tol.clone() {
                    continue;
                }
                match &best {
                    Some((_, bz)) if &z[j] >= bz => {}
                    _ => best = Some((j, z[j].clone())),
                }
            }
            best.map(|(j, _)| j)
        };
        let Some(col) = entering else {
            return Ok(PhaseOutcome::Optimal);
        };

        // Ratio test over positive entries above a column-relative floor
        // (sub-floor entries are drift noise; pivoting on them manufactures
        // an exactly-singular basis). Among ratios within a small relative
        // band of the minimum, prefer the largest pivot for stability;
        // Bland mode prefers the lowest basis index instead. Small rhs dips
        // caused by floored-out rows are repaired at the next refresh.
        let col_max = (0..m)
            .filter(|&i| !dead_row[i])
            .map(|i| t[i][col].abs())
            .fold(S::zero(), |acc, v| if v > acc { v } else { acc });
        let mut floor = &S::rel_pivot_floor() * &col_max;
        if floor < S::pivot_tol() {
            floor = S::pivot_tol();
        }
        let mut theta: Option<S> = None;
        for i in 0..m {
            if dead_row[i] || t[i][col] <= floor {
                continue;
            }
            let ratio = &t[i][rhs_col] / &t[i][col];
            if theta.as_ref().is_none_or(|th| ratio < *th) {
                theta = Some(ratio);
            }
        }
        if theta.is_none() {
            // Only sub-floor positive entries remain: take the largest one
            // rather than misdeclaring the direction unbounded.
            let mut best: Option<usize> = None;
            for i in 0..m {
                if dead_row[i] || t[i][col] <= S::zero() {
                    continue;
                }
                if best.is_none_or(|b| t[i][col] > t[b][col]) {
                    best = Some(i);
                }
            }
            if let Some(i) = best {
                theta = Some(&t[i][rhs_col] / &t[i][col]);
                floor = S::zero();
            }
        }
        let Some(theta) = theta else {
            return Ok(PhaseOutcome::Unbounded);
        };
        let band = {
            // zero for exact arithmetic, ~1e-9 (1 + theta) for floats
            let mut b = S::tol();
            let one_plus = S::one() + theta.abs();
            b = &b * &one_plus;
            &theta + &b
        };
        let mut row_best: Option<usize> = None;
        for i in 0..m {
            if dead_row[i] || t[i][col] <= floor {
                continue;
            }
            let ratio = &t[i][rhs_col] / &t[i][col];
            if ratio > band {
                continue;
            }
            match row_best {
                None => row_best = Some(i),
                Some(bi) => {
                    let better = if bland {
                        basis[i] < basis[bi]
                    } else {
                        t[i][col] > t[bi][col]
                            || (t[i][col] == t[bi][col] && basis[i] < basis[bi])
                    };
                    if better {
                        row_best = Some(i);
                    }
                }
            }
        }
        let row = row_best.expect("band contains the argmin row");
        let ratio = theta;

        if ratio.is_zero() || ratio.abs() <= S::tol() {
            degenerate_run += 1;
            if degenerate_run > bland_after {
                bland = true;
            }
        } else {
            degenerate_run = 0;
        }

        *pivots_used += 1;
        pivots_here += 1;
        if *pivots_used > max_pivots {
            return Err(Error::SolverStalled(*pivots_used));
        }

        // Update reduced costs before the tableau changes: z' = z - z_col * T_row / piv.
        let piv = t[row][col].clone();
        let zc = z[col].clone();
        for j in 0..n_total {
            let delta = &(&zc * &t[row][j]) / &piv;
            z[j] -= &delta;
        }
        in_basis[basis[row]] = false;
        in_basis[col] = true;
        pivot(t, basis, row, col);
        z[col] = S::zero();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn min_x_subject_to_x_ge_3() {
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0]);
        lp.add_constraint(vec![1.0], Rel::Ge, 3.0);
        let sol = solve(&lp, Arithmetic::Float).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        close(sol.value, 3.0, 1e-12);
        close(sol.primal[0], 3.0, 1e-12);
        close(sol.dual_value.unwrap(), 3.0, 1e-12);
    }

    #[test]
    fn scalar_dual_lp_instance() {
        // max D0 with |D0| <= 1 and |D0| <= 0.2 pre-expanded.
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0]);
        lp.add_constraint(vec![1.0], Rel::Le, 1.0);
        lp.add_constraint(vec![-1.0], Rel::Le, 1.0);
        lp.add_constraint(vec![1.0], Rel::Le, 0.2);
        lp.add_constraint(vec![-1.0], Rel::Le, 0.2);
        let sol = solve(&lp, Arithmetic::Float).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        close(sol.value, 0.2, 1e-12);
        close(sol.dual_value.unwrap(), 0.2, 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded_are_statuses() {
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0]);
        lp.add_constraint(vec![1.0], Rel::Ge, 3.0);
        lp.add_constraint(vec![1.0], Rel::Le, 2.0);
        assert_eq!(
            solve(&lp, Arithmetic::Float).unwrap().status,
            LpStatus::Infeasible
        );

        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0]);
        lp.set_bounds(0, Some(0.0), None);
        lp.add_constraint(vec![-1.0], Rel::Le, 0.0);
        assert_eq!(
            solve(&lp, Arithmetic::Float).unwrap().status,
            LpStatus::Unbounded
        );
    }

    #[test]
    fn bounded_variables_without_rows() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![2.0, -1.0]);
        lp.set_bounds(0, Some(0.0), Some(1.5));
        lp.set_bounds(1, Some(-1.0), Some(4.0));
        let sol = solve(&lp, Arithmetic::Float).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        close(sol.value, 2.0 * 1.5 + 1.0, 1e-12);
        close(sol.primal[0], 1.5, 1e-12);
        close(sol.primal[1], -1.0, 1e-12);
        close(sol.dual_value.unwrap(), 4.0, 1e-12);
    }

    #[test]
    fn degenerate_equalities() {
        // x + y = 1 stated twice; redundant row must not break anything.
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0, 2.0]);
        lp.set_bounds(0, Some(0.0), None);
        lp.set_bounds(1, Some(0.0), None);
        lp.add_constraint(vec![1.0, 1.0], Rel::Eq, 1.0);
        lp.add_constraint(vec![1.0, 1.0], Rel::Eq, 1.0);
        let sol = solve(&lp, Arithmetic::Float).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        close(sol.value, 1.0, 1e-12);
    }

    #[test]
    fn rational_mode_is_exact() {
        // min x st 3x = 1 -> exactly 1/3.
        let third = BigRational::new(BigInt::from(1), BigInt::from(3));
        let mut lp = LinearProgram::new(
            Sense::Minimize,
            vec![BigRational::one()],
        );
        lp.add_constraint(vec![BigRational::from(BigInt::from(3))], Rel::Eq, BigRational::one());
        let sol = solve_exact(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.value, third);
        assert_eq!(sol.dual_value.unwrap(), third);
    }

    #[test]
    fn deterministic_bit_identical() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0, 1.3, -0.2]);
        for v in 0..3 {
            lp.set_bounds(v, Some(0.0), None);
        }
        lp.add_constraint(vec![1.0, 2.0, 1.0], Rel::Le, 4.0);
        lp.add_constraint(vec![3.0, 0.5, 0.0], Rel::Le, 2.0);
        lp.add_constraint(vec![0.0, 1.0, 1.0], Rel::Le, 3.0);
        let a = solve(&lp, Arithmetic::Float).unwrap();
        let b = solve(&lp, Arithmetic::Float).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        for (x, y) in a.primal.iter().zip(&b.primal) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn primal_dual_agreement_float() {
        let mut lp = LinearProgram::new(Sense::Minimize, vec![3.0, 1.0, 2.5]);
        for v in 0..3 {
            lp.set_bounds(v, Some(0.0), Some(10.0));
        }
        lp.add_constraint(vec![1.0, 1.0, 1.0], Rel::Ge, 4.0);
        lp.add_constraint(vec![2.0, -1.0, 0.5], Rel::Ge, 1.0);
        lp.add_constraint(vec![0.2, 0.4, 1.0], Rel::Le, 6.0);
        let sol = solve(&lp, Arithmetic::Float).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        close(sol.dual_value.unwrap(), sol.value, 1e-8 * sol.value.abs().max(1.0));
        // Rational agrees with float here.
        let er = solve(&lp, Arithmetic::Rational).unwrap();
        close(er.value, sol.value, 1e-9);
    }
}
