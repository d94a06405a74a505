//! Estimator synthesis and Le Cam dual LPs; matched minimax risk brackets.
//!
//! For a functional `F(pi) = <pi, h>` observed through the channel `Phi`,
//! the primal synthesis problem
//!
//! ```text
//!   min_g ||Phi^T g - h||_inf + (1/sqrt(n)) ||g||_inf
//! ```
//!
//! and the dual
//!
//! ```text
//!   delta(t) = max_Delta { <Delta, h> : ||Delta||_1 <= 1, ||Phi Delta||_1 <= t }
//! ```
//!
//! share their value at `t = 1/sqrt(n)`, and the minimax quadratic risk is
//! bracketed by `(1/64) delta(1/n)^2 <= R_n <= delta(1/sqrt(n))^2`. The
//! min-TV inverse `t(delta)` and the centered variant `delta~(t)` (which
//! adds `<Delta, 1> = 0`) complete the family.
//!
//! `l1`/`linf` objectives are reduced to plain LP form here: `Delta` splits
//! into a difference of non-negative vectors, `||Phi Delta||_1` goes through
//! per-row auxiliary variables `s_i >= |(Phi Delta)_i|`, and the two sup
//! norms of the primal become scalar auxiliaries.

use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::estimators::{EstimatorCoefficients, Provenance};
use crate::lpsolve::{
    self, Arithmetic, LinearProgram, LpNum, LpStatus, Rel, Sense, SolverOptions,
};
use crate::model::{rational_from_f64, SignedWeightVector, TransitionMatrix};
use crate::{Error, Result};

/// Below this `t` the float tolerances swamp the constraint `||Phi
/// Delta||_1 <= t` and computation switches to rational mode.
const FLOAT_T_FLOOR: f64 = 1e-9;

/// The linear functional `F(pi) = <pi, h>` on weight distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalVector {
    d: usize,
    h: Vec<f64>,
}

impl FunctionalVector {
    pub fn new(h: Vec<f64>) -> Result<Self> {
        if h.is_empty() || h.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(
                "functional vector must be non-empty and finite".into(),
            ));
        }
        Ok(FunctionalVector { d: h.len() - 1, h })
    }

    /// `h = e_0`: the population-recovery functional `pi(0)`.
    pub fn e0(d: usize) -> Self {
        let mut h = vec![0.0; d + 1];
        h[0] = 1.0;
        FunctionalVector { d, h }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    /// Whether `h` takes both a non-negative and a non-positive value,
    /// the standing assumption of the risk bracket.
    pub fn has_both_signs(&self) -> bool {
        let min = self.h.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = self.h.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        min <= 0.0 && max >= 0.0
    }

    fn sign_warning(&self) -> Option<String> {
        if self.has_both_signs() {
            None
        } else {
            Some(
                "functional h does not take both signs; the risk bracket of the dual \
                 LP value does not apply without recentering h"
                    .into(),
            )
        }
    }
}

/// Result of the primal synthesis LP.
#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub g: EstimatorCoefficients,
    /// Optimal objective `||Phi^T g - h||_inf + (1/sqrt(n)) ||g||_inf`.
    pub value: f64,
    pub bias_bound: f64,
    pub sup_norm: f64,
    pub warning: Option<String>,
}

/// Result of a dual LP solve.
#[derive(Debug, Clone)]
pub struct DualResult {
    pub delta: SignedWeightVector,
    pub value: f64,
    pub warning: Option<String>,
}

fn check_dims(phi: &TransitionMatrix, h: &FunctionalVector) -> Result<()> {
    if phi.d() != h.d() {
        return Err(Error::DimensionMismatch(format!(
            "phi has d = {} but h has d = {}",
            phi.d(),
            h.d()
        )));
    }
    Ok(())
}

/// Float view of `Phi` cleaned for LP assembly: entries below 1e-16 are
/// zeroed and rows whose largest entry falls below 1e-14 are dropped from
/// the `||Phi Delta||_1` expansion. Both perturb the LP value by less than
/// 2e-12 while removing dozens of orders of magnitude of entry spread that
/// otherwise poison float pivoting. Exact mode never cleans.
fn cleaned_phi(phi: &TransitionMatrix) -> (Vec<f64>, Vec<bool>) {
    const ENTRY_FLOOR: f64 = 1e-16;
    const ROW_FLOOR: f64 = 1e-14;
    let k = phi.d() + 1;
    let mut entries = vec![0.0; k * k];
    let mut row_active = vec![false; k];
    for i in 0..k {
        let mut row_max = 0.0f64;
        for j in 0..k {
            let e = phi.entry(i, j);
            let e = if e.abs() < ENTRY_FLOOR { 0.0 } else { e };
            entries[i * k + j] = e;
            row_max = row_max.max(e.abs());
        }
        row_active[i] = row_max >= ROW_FLOOR;
        if !row_active[i] {
            for j in 0..k {
                entries[i * k + j] = 0.0;
            }
        }
    }
    (entries, row_active)
}

/// Variable layout shared by the dual LPs: `Delta = p - m`, then `s`.
/// Columns: `p_0..p_d, m_0..m_d, s_0..s_d`. Rows flagged inactive are
/// omitted from the `s_i >= |(Phi Delta)_i|` pairs (their `s_i` stays 0).
fn dual_lp<S, F>(
    k: usize,
    entry: F,
    row_active: &[bool],
    h: &[S],
    t: S,
    sense_obj: DualObjective,
    centered: bool,
) -> LinearProgram<S>
where
    S: LpNum,
    F: Fn(usize, usize) -> S,
{
    let nvars = 3 * k;
    let (sense, objective) = match sense_obj {
        DualObjective::MaximizeFunctional => {
            let mut obj = vec![S::zero(); nvars];
            for j in 0..k {
                obj[j] = h[j].clone();
                obj[k + j] = -h[j].clone();
            }
            (Sense::Maximize, obj)
        }
        DualObjective::MinimizeChannelL1 => {
            let mut obj = vec![S::zero(); nvars];
            for i in 0..k {
                obj[2 * k + i] = S::one();
            }
            (Sense::Minimize, obj)
        }
    };
    let mut lp = LinearProgram::new(sense, objective);
    for v in 0..nvars {
        lp.set_bounds(v, Some(S::zero()), None);
    }
    // ||Delta||_1 <= 1 via sum(p) + sum(m) <= 1.
    let mut row = vec![S::zero(); nvars];
    for j in 0..2 * k {
        row[j] = S::one();
    }
    lp.add_constraint(row, Rel::Le, S::one());
    // s_i >= +-(Phi Delta)_i.
    for i in 0..k {
        if !row_active[i] {
            continue;
        }
        let mut pos = vec![S::zero(); nvars];
        let mut neg = vec![S::zero(); nvars];
        for j in 0..k {
            let a = entry(i, j);
            if a.is_zero() {
                continue;
            }
            pos[j] = a.clone();
            pos[k + j] = -a.clone();
            neg[j] = -a.clone();
            neg[k + j] = a;
        }
        pos[2 * k + i] = -S::one();
        neg[2 * k + i] = -S::one();
        lp.add_constraint(pos, Rel::Le, S::zero());
        lp.add_constraint(neg, Rel::Le, S::zero());
    }
    match sense_obj {
        DualObjective::MaximizeFunctional => {
            // sum(s) <= t.
            let mut row = vec![S::zero(); nvars];
            for i in 0..k {
                row[2 * k + i] = S::one();
            }
            lp.add_constraint(row, Rel::Le, t);
        }
        DualObjective::MinimizeChannelL1 => {
            // Delta_0 >= t (here `t` carries the separation target).
            let mut row = vec![S::zero(); nvars];
            row[0] = S::one();
            row[k] = -S::one();
            lp.add_constraint(row, Rel::Ge, t);
        }
    }
    if centered {
        let mut row = vec![S::zero(); nvars];
        for j in 0..k {
            row[j] = S::one();
            row[k + j] = -S::one();
        }
        lp.add_constraint(row, Rel::Eq, S::zero());
    }
    lp
}

#[derive(Clone, Copy)]
enum DualObjective {
    MaximizeFunctional,
    MinimizeChannelL1,
}

fn exact_entries(phi: &TransitionMatrix) -> Result<TransitionMatrix> {
    if phi.exact_entry(0, 0).is_some() {
        Ok(phi.clone())
    } else {
        phi.channel().build_phi_exact(phi.d())
    }
}

fn extract_delta(primal: &[f64], k: usize) -> Result<SignedWeightVector> {
    let values: Vec<f64> = (0..k).map(|j| primal[j] - primal[k + j]).collect();
    SignedWeightVector::new(values)
}

fn solve_dual(
    phi: &TransitionMatrix,
    h: &FunctionalVector,
    t: f64,
    arithmetic: Arithmetic,
    objective: DualObjective,
    centered: bool,
) -> Result<DualResult> {
    check_dims(phi, h)?;
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidInput(format!("t = {t} must be >= 0")));
    }
    let k = phi.d() + 1;
    let warning = h.sign_warning();
    match arithmetic {
        Arithmetic::Float => {
            let (entries, row_active) = cleaned_phi(phi);
            let lp = dual_lp(
                k,
                |i, j| entries[i * k + j],
                &row_active,
                h.h(),
                t,
                objective,
                centered,
            );
            let sol = lpsolve::solve_with(&lp, Arithmetic::Float, SolverOptions::default())?;
            match sol.status {
                LpStatus::Optimal => Ok(DualResult {
                    delta: extract_delta(&sol.primal, k)?,
                    value: sol.value,
                    warning,
                }),
                LpStatus::Infeasible => Err(Error::Infeasible(
                    "dual LP infeasible (separation target above 1?)".into(),
                )),
                LpStatus::Unbounded => Err(Error::Unbounded),
            }
        }
        Arithmetic::Rational => {
            let exact = exact_entries(phi)?;
            let h_exact: Vec<BigRational> = h
                .h()
                .iter()
                .map(|x| rational_from_f64(*x))
                .collect::<Result<_>>()?;
            let t_exact = rational_from_f64(t)?;
            let all_rows = vec![true; k];
            let lp = dual_lp(
                k,
                |i, j| exact.exact_entry(i, j).unwrap().clone(),
                &all_rows,
                &h_exact,
                t_exact,
                objective,
                centered,
            );
            let sol = lpsolve::solve_exact(&lp)?;
            match sol.status {
                LpStatus::Optimal => {
                    let primal: Vec<f64> = sol
                        .primal
                        .iter()
                        .map(|x| x.to_f64().unwrap_or(f64::NAN))
                        .collect();
                    Ok(DualResult {
                        delta: extract_delta(&primal, k)?,
                        value: sol.value.to_f64().unwrap_or(f64::NAN),
                        warning,
                    })
                }
                LpStatus::Infeasible => Err(Error::Infeasible(
                    "dual LP infeasible (separation target above 1?)".into(),
                )),
                LpStatus::Unbounded => Err(Error::Unbounded),
            }
        }
    }
}

/// `delta(t) = max { <Delta,h> : ||Delta||_1 <= 1, ||Phi Delta||_1 <= t }`.
pub fn delta_of_t(phi: &TransitionMatrix, h: &FunctionalVector, t: f64) -> Result<DualResult> {
    let arith = if t > 0.0 && t < FLOAT_T_FLOOR {
        Arithmetic::Rational
    } else {
        Arithmetic::Float
    };
    delta_of_t_in(phi, h, t, arith)
}

pub fn delta_of_t_in(
    phi: &TransitionMatrix,
    h: &FunctionalVector,
    t: f64,
    arithmetic: Arithmetic,
) -> Result<DualResult> {
    solve_dual(phi, h, t, arithmetic, DualObjective::MaximizeFunctional, false)
}

/// The centered variant: adds `<Delta, 1> = 0`.
pub fn delta_tilde_of_t(phi: &TransitionMatrix, h: &FunctionalVector, t: f64) -> Result<DualResult> {
    let arith = if t > 0.0 && t < FLOAT_T_FLOOR {
        Arithmetic::Rational
    } else {
        Arithmetic::Float
    };
    delta_tilde_of_t_in(phi, h, t, arith)
}

pub fn delta_tilde_of_t_in(
    phi: &TransitionMatrix,
    h: &FunctionalVector,
    t: f64,
    arithmetic: Arithmetic,
) -> Result<DualResult> {
    solve_dual(phi, h, t, arithmetic, DualObjective::MaximizeFunctional, true)
}

/// Min-TV LP: `t(delta) = min { ||Phi Delta||_1 : Delta_0 >= delta,
/// ||Delta||_1 <= 1 }`, the inverse of `delta(t)`.
pub fn t_of_delta(phi: &TransitionMatrix, delta_target: f64) -> Result<DualResult> {
    t_of_delta_in(phi, delta_target, Arithmetic::Float)
}

pub fn t_of_delta_in(
    phi: &TransitionMatrix,
    delta_target: f64,
    arithmetic: Arithmetic,
) -> Result<DualResult> {
    if !delta_target.is_finite() || delta_target <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "delta target {delta_target} must be in (0, 1]"
        )));
    }
    let h = FunctionalVector::e0(phi.d());
    solve_dual(
        phi,
        &h,
        delta_target,
        arithmetic,
        DualObjective::MinimizeChannelL1,
        false,
    )
}

/// Primal synthesis: `min_g ||Phi^T g - h||_inf + (1/sqrt(n)) ||g||_inf`.
///
/// Columns: `a_0..a_d (g+), b_0..b_d (g-), u (bias), v (sup)`.
pub fn synthesize_estimator(
    phi: &TransitionMatrix,
    h: &FunctionalVector,
    n: u64,
) -> Result<SynthesisResult> {
    let t = 1.0 / (n as f64).sqrt();
    let arith = if t < FLOAT_T_FLOOR {
        Arithmetic::Rational
    } else {
        Arithmetic::Float
    };
    synthesize_estimator_in(phi, h, n, arith)
}

fn synthesis_lp<S, F>(k: usize, entry: F, h: &[S], t: S) -> LinearProgram<S>
where
    S: LpNum,
    F: Fn(usize, usize) -> S,
{
    let nvars = 2 * k + 2;
    let u_col = 2 * k;
    let v_col = 2 * k + 1;
    let mut obj = vec![S::zero(); nvars];
    obj[u_col] = S::one();
    obj[v_col] = t;
    let mut lp = LinearProgram::new(Sense::Minimize, obj);
    for v in 0..nvars {
        lp.set_bounds(v, Some(S::zero()), None);
    }
    // |(Phi^T g)_j - h_j| <= u.
    for j in 0..k {
        let mut pos = vec![S::zero(); nvars];
        let mut neg = vec![S::zero(); nvars];
        for i in 0..k {
            let a = entry(i, j);
            if a.is_zero() {
                continue;
            }
            pos[i] = a.clone();
            pos[k + i] = -a.clone();
            neg[i] = -a.clone();
            neg[k + i] = a;
        }
        pos[u_col] = -S::one();
        neg[u_col] = -S::one();
        lp.add_constraint(pos, Rel::Le, h[j].clone());
        lp.add_constraint(neg, Rel::Le, -h[j].clone());
    }
    // |g_i| <= v.
    for i in 0..k {
        let mut pos = vec![S::zero(); nvars];
        let mut neg = vec![S::zero(); nvars];
        pos[i] = S::one();
        pos[k + i] = -S::one();
        pos[v_col] = -S::one();
        neg[i] = -S::one();
        neg[k + i] = S::one();
        neg[v_col] = -S::one();
        lp.add_constraint(pos, Rel::Le, S::zero());
        lp.add_constraint(neg, Rel::Le, S::zero());
    }
    lp
}

pub fn synthesize_estimator_in(
    phi: &TransitionMatrix,
    h: &FunctionalVector,
    n: u64,
    arithmetic: Arithmetic,
) -> Result<SynthesisResult> {
    check_dims(phi, h)?;
    if n == 0 {
        return Err(Error::InvalidInput("sample count n must be >= 1".into()));
    }
    let k = phi.d() + 1;
    let t = 1.0 / (n as f64).sqrt();
    let warning = h.sign_warning();
    let (g, value) = match arithmetic {
        Arithmetic::Float => {
            let (entries, _) = cleaned_phi(phi);
            let lp = synthesis_lp(k, |i, j| entries[i * k + j], h.h(), t);
            let sol = lpsolve::solve_with(&lp, Arithmetic::Float, SolverOptions::default())?;
            if sol.status != LpStatus::Optimal {
                return Err(Error::InvalidInput(format!(
                    "synthesis LP ended {:?}; it should always be feasible and bounded",
                    sol.status
                )));
            }
            let g: Vec<f64> = (0..k).map(|i| sol.primal[i] - sol.primal[k + i]).collect();
            (g, sol.value)
        }
        Arithmetic::Rational => {
            let exact = exact_entries(phi)?;
            let h_exact: Vec<BigRational> = h
                .h()
                .iter()
                .map(|x| rational_from_f64(*x))
                .collect::<Result<_>>()?;
            let t_exact = rational_from_f64(t)?;
            let lp = synthesis_lp(
                k,
                |i, j| exact.exact_entry(i, j).unwrap().clone(),
                &h_exact,
                t_exact,
            );
            let sol = lpsolve::solve_exact(&lp)?;
            if sol.status != LpStatus::Optimal {
                return Err(Error::InvalidInput(format!(
                    "synthesis LP ended {:?}; it should always be feasible and bounded",
                    sol.status
                )));
            }
            let g: Vec<f64> = (0..k)
                .map(|i| (&sol.primal[i] - &sol.primal[k + i]).to_f64().unwrap_or(f64::NAN))
                .collect();
            (g, sol.value.to_f64().unwrap_or(f64::NAN))
        }
    };
    let resid = phi.transpose_apply(&g)?;
    let bias_bound = resid
        .iter()
        .zip(h.h())
        .map(|(r, hj)| (r - hj).abs())
        .fold(0.0, f64::max);
    let sup_norm = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(SynthesisResult {
        g: EstimatorCoefficients::new(g, Provenance::LpSynthesized { n })?,
        value,
        bias_bound,
        sup_norm,
        warning,
    })
}

/// Risk bracket `((1/64) delta(1/n)^2, delta(1/sqrt(n))^2)`.
pub fn risk_bounds(phi: &TransitionMatrix, h: &FunctionalVector, n: u64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::InvalidInput("sample count n must be >= 1".into()));
    }
    let lower = delta_of_t(phi, h, 1.0 / n as f64)?.value;
    let upper = delta_of_t(phi, h, 1.0 / (n as f64).sqrt())?.value;
    Ok((lower * lower / 64.0, upper * upper))
}

/// Line-oriented record for CLI and harness output:
/// `kind value t_or_n d epsilon` followed by the vector, comma-separated.
pub fn record_line(kind: &str, value: f64, t_or_n: f64, d: usize, epsilon: f64, vec: &[f64]) -> String {
    let joined = vec
        .iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",");
    format!("{kind} {value} {t_or_n} {d} {epsilon} {joined}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_phi_lossy, build_phi_noisy};

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn phi_d0() -> TransitionMatrix {
        build_phi_lossy(0, 0.0).unwrap()
    }

    #[test]
    fn delta_d0_is_min_one_t() {
        let phi = phi_d0();
        let h = FunctionalVector::new(vec![1.0]).unwrap();
        close(delta_of_t(&phi, &h, 0.2).unwrap().value, 0.2, 1e-12);
        close(delta_of_t(&phi, &h, 5.0).unwrap().value, 1.0, 1e-12);
    }

    #[test]
    fn delta_at_t_zero_is_zero_for_triangular_phi() {
        let phi = build_phi_lossy(1, 0.3).unwrap();
        let h = FunctionalVector::e0(1);
        close(delta_of_t(&phi, &h, 0.0).unwrap().value, 0.0, 1e-12);
    }

    #[test]
    fn tilde_d0_is_zero_and_floor_holds() {
        let phi = phi_d0();
        let h = FunctionalVector::new(vec![1.0]).unwrap();
        close(delta_tilde_of_t(&phi, &h, 0.7).unwrap().value, 0.0, 1e-12);

        let phi = build_phi_lossy(5, 0.7).unwrap();
        let h = FunctionalVector::e0(5);
        let t = 0.01;
        let tilde = delta_tilde_of_t(&phi, &h, t).unwrap().value;
        let delta = delta_of_t(&phi, &h, t).unwrap().value;
        assert!(tilde >= 0.5 * t - 1e-9, "floor violated: {tilde}");
        assert!(tilde <= delta + 1e-9);
        assert!(delta <= 2.0 * tilde + 1e-9);
    }

    #[test]
    fn synthesize_d0() {
        let phi = phi_d0();
        let h = FunctionalVector::new(vec![1.0]).unwrap();
        let s = synthesize_estimator(&phi, &h, 4).unwrap();
        close(s.value, 0.5, 1e-12);
        close(s.g.g[0], 1.0, 1e-9);
        close(s.bias_bound + s.sup_norm / 2.0, s.value, 1e-8);
    }

    #[test]
    fn synthesize_identity_channel() {
        let phi = build_phi_lossy(3, 0.0).unwrap();
        let h = FunctionalVector::e0(3);
        let s = synthesize_estimator(&phi, &h, 100).unwrap();
        close(s.value, 0.1, 1e-10);
        close(s.g.g[0], 1.0, 1e-9);
        for j in 1..=3 {
            close(s.g.g[j], 0.0, 1e-9);
        }
    }

    #[test]
    fn strong_duality_spot_check() {
        let phi = build_phi_lossy(10, 0.75).unwrap();
        let h = FunctionalVector::e0(10);
        let n = 1_000_000u64;
        let s = synthesize_estimator(&phi, &h, n).unwrap();
        let d = delta_of_t(&phi, &h, 1e-3).unwrap();
        close(s.value, d.value, 1e-7 * s.value.max(1.0));
    }

    #[test]
    fn t_of_delta_examples() {
        // Lossy, eps <= 1/2: t(delta) = delta exactly.
        for d in [1usize, 6, 12] {
            for eps in [0.1, 0.5] {
                let phi = build_phi_lossy(d, eps).unwrap();
                close(t_of_delta(&phi, 0.1).unwrap().value, 0.1, 1e-9);
            }
        }
        // Noisy: trivial bound t <= delta.
        for eps in [0.2, 0.5, 0.8] {
            let phi = build_phi_noisy(8, eps).unwrap();
            assert!(t_of_delta(&phi, 0.1).unwrap().value <= 0.1 + 1e-9);
        }
        // delta above one is infeasible.
        let phi = build_phi_lossy(3, 0.4).unwrap();
        assert!(matches!(
            t_of_delta(&phi, 1.5),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn round_trip_delta_t_delta() {
        let phi = build_phi_lossy(10, 0.6).unwrap();
        let h = FunctionalVector::e0(10);
        let delta = 0.1;
        let t = t_of_delta(&phi, delta).unwrap().value;
        assert!(t > 0.0);
        let back = delta_of_t(&phi, &h, t).unwrap().value;
        close(back, delta, 1e-6);
    }

    #[test]
    fn risk_bounds_examples() {
        let phi = phi_d0();
        let h = FunctionalVector::new(vec![1.0]).unwrap();
        let (lo, hi) = risk_bounds(&phi, &h, 4).unwrap();
        close(lo, 0.0009765625, 1e-12);
        close(hi, 0.25, 1e-12);
        assert!(lo <= hi);

        // Remark 3.1 shape: upper <= n^{-min((1-eps)/eps, 1)}.
        let phi = build_phi_lossy(10, 0.3).unwrap();
        let h = FunctionalVector::e0(10);
        let (lo, hi) = risk_bounds(&phi, &h, 100).unwrap();
        assert!(lo <= hi);
        assert!(hi <= 0.01 + 1e-9, "upper = {hi}");
    }

    #[test]
    fn dual_delta_is_feasible() {
        let phi = build_phi_noisy(6, 0.3).unwrap();
        let h = FunctionalVector::e0(6);
        let t = 0.05;
        let r = delta_of_t(&phi, &h, t).unwrap();
        assert!(r.delta.l1_norm() <= 1.0 + 1e-9);
        let image = phi.apply(r.delta.values()).unwrap();
        let channel_l1: f64 = image.iter().map(|x| x.abs()).sum();
        assert!(channel_l1 <= t + 1e-9);
    }

    #[test]
    fn sign_warning_attached() {
        let phi = build_phi_lossy(2, 0.4).unwrap();
        let all_positive = FunctionalVector::new(vec![1.0, 2.0, 1.0]).unwrap();
        assert!(delta_of_t(&phi, &all_positive, 0.1).unwrap().warning.is_some());
        assert!(delta_of_t(&phi, &FunctionalVector::e0(2), 0.1)
            .unwrap()
            .warning
            .is_none());
    }

    #[test]
    fn rational_mode_agrees_with_float() {
        let phi = build_phi_lossy(6, 0.75).unwrap();
        let h = FunctionalVector::e0(6);
        let f = delta_of_t_in(&phi, &h, 0.01, Arithmetic::Float).unwrap();
        let r = delta_of_t_in(&phi, &h, 0.01, Arithmetic::Rational).unwrap();
        close(f.value, r.value, 1e-10);

        let tf = t_of_delta_in(&phi, 0.05, Arithmetic::Float).unwrap();
        let tr = t_of_delta_in(&phi, 0.05, Arithmetic::Rational).unwrap();
        close(tf.value, tr.value, 1e-10);
    }

    #[test]
    fn record_line_format() {
        let line = record_line("delta", 0.25, 0.1, 2, 0.5, &[0.1, -0.2]);
        assert_eq!(line, "delta 0.25 0.1 2 0.5 0.1,-0.2");
    }
}
