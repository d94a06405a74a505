//! Prefix-tree conversion of an individual-probability estimator into full
//! distribution recovery, with split-sample median boosting.
//!
//! The algorithm walks prefix lengths `2..=d`, extending every surviving
//! prefix by one bit, estimating each candidate's marginal via the XOR
//! trick, and pruning candidates whose estimate is at most `2 delta`. When
//! every estimate errs by at most `delta`, prefixes of true mass above
//! `4 delta` always survive and the final sup-norm error is at most
//! `4 delta`; survivor sets stay below `1/delta` plus failures.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::estimators::{estimate_p_prefix, EstimatorCoefficients, SampleBatch};
use crate::model::{code_to_string, HypercubeDistribution};
use crate::{Error, Result};

/// Parameters of a recovery run.
#[derive(Debug, Clone)]
pub struct RecoveryConfig {
    /// Target per-string accuracy; survivors are pruned at `2 delta`.
    pub delta: f64,
    /// Overall failure budget. The per-call failure target becomes
    /// `alpha = 4 delta tau / (9 d)` and each estimate is median-boosted
    /// over `ceil(log2(1/alpha))` contiguous batch slices.
    pub tau: f64,
    /// Prune threshold override (default `2 delta`).
    pub prune_threshold: Option<f64>,
    /// Fixed median-boost slice count; `None` derives it from `tau`.
    pub boost_batches_override: Option<usize>,
}

impl RecoveryConfig {
    pub fn new(delta: f64, tau: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidInput(format!(
                "delta {delta} must lie in (0, 1)"
            )));
        }
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::InvalidInput(format!("tau {tau} must lie in (0, 1)")));
        }
        Ok(RecoveryConfig {
            delta,
            tau,
            prune_threshold: None,
            boost_batches_override: None,
        })
    }

    fn threshold(&self) -> f64 {
        self.prune_threshold.unwrap_or(2.0 * self.delta)
    }
}

/// Per-level bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelStats {
    pub level: usize,
    pub candidates: usize,
    pub survivors: usize,
}

#[derive(Debug, Clone, Default)]
pub struct RecoveryStats {
    pub per_level: Vec<LevelStats>,
    /// Total boosted estimator invocations (one per candidate prefix).
    pub estimator_calls: usize,
    /// Levels whose survivor count exceeded `1/delta`; recovery continues,
    /// this is a low-probability diagnostic, not an abort.
    pub overflow_levels: Vec<usize>,
    /// Median-boost slice count used for every call.
    pub boost_batches: usize,
}

impl RecoveryStats {
    /// Sidecar CSV: one row per level.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,candidates,survivors\n");
        for l in &self.per_level {
            s.push_str(&format!("{},{},{}\n", l.level, l.candidates, l.survivors));
        }
        s
    }
}

/// Result of a recovery run.
#[derive(Debug, Clone)]
pub struct RecoveryResult {
    /// `P_hat`: estimates on the surviving strings, zero elsewhere.
    pub estimate: HypercubeDistribution,
    /// The final prefix set `S_d`, as text strings.
    pub survivors: Vec<String>,
    pub stats: RecoveryStats,
}

/// Provider of estimator coefficients per prefix length. Implemented by
/// closures; [`SynthesisFactory`] caches LP syntheses keyed by dimension.
pub trait EstimatorFactory {
    fn coefficients(&self, dim: usize) -> Result<EstimatorCoefficients>;
}

impl<F> EstimatorFactory for F
where
    F: Fn(usize) -> Result<EstimatorCoefficients>,
{
    fn coefficients(&self, dim: usize) -> Result<EstimatorCoefficients> {
        self(dim)
    }
}

/// LP-synthesis factory with a per-dimension cache; coefficients depend
/// only on (dim, channel, n).
pub struct SynthesisFactory {
    channel: crate::model::ChannelModel,
    n: u64,
    cache: std::sync::Mutex<BTreeMap<usize, EstimatorCoefficients>>,
}

impl SynthesisFactory {
    pub fn new(channel: crate::model::ChannelModel, n: u64) -> Self {
        SynthesisFactory {
            channel,
            n,
            cache: std::sync::Mutex::new(BTreeMap::new()),
        }
    }
}

impl EstimatorFactory for SynthesisFactory {
    fn coefficients(&self, dim: usize) -> Result<EstimatorCoefficients> {
        if let Some(g) = self.cache.lock().unwrap().get(&dim) {
            return Ok(g.clone());
        }
        let phi = self.channel.build_phi(dim)?;
        let h = crate::minimax::FunctionalVector::e0(dim);
        let synth = crate::minimax::synthesize_estimator(&phi, &h, self.n)?;
        self.cache.lock().unwrap().insert(dim, synth.g.clone());
        Ok(synth.g)
    }
}

/// Lower median (for even counts) of a non-empty list.
pub fn median_boost(estimates: &[f64]) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::InvalidInput("median of an empty list".into()));
    }
    let mut v = estimates.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v[(v.len() - 1) / 2])
}

/// Split the batch into `B = ceil(log2(1/tau))` contiguous equal slices
/// (remainder to the last), estimate `P_x` on each, return the median.
pub fn boosted_estimate_p_x(
    x: &str,
    batch: &SampleBatch,
    g: &EstimatorCoefficients,
    tau: f64,
) -> Result<f64> {
    let (code, len) = crate::model::string_to_code(x)?;
    boosted_estimate_prefix(code, len, batch, g, boost_batches(tau)?)
}

/// `ceil(log2(1/tau))`, at least 1.
pub fn boost_batches(tau: f64) -> Result<usize> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidInput(format!("tau {tau} must lie in (0, 1]")));
    }
    Ok(((1.0 / tau).log2().ceil() as usize).max(1))
}

fn boosted_estimate_prefix(
    code: u64,
    len: usize,
    batch: &SampleBatch,
    g: &EstimatorCoefficients,
    batches: usize,
) -> Result<f64> {
    let n = batch.n();
    if n < batches {
        return Err(Error::InvalidInput(format!(
            "batch of {n} records cannot be split into {batches} slices; need at least {batches}"
        )));
    }
    if batches == 1 {
        return estimate_p_prefix(code, len, batch, g);
    }
    let slice_len = n / batches;
    let mut estimates = Vec::with_capacity(batches);
    for b in 0..batches {
        let lo = b * slice_len;
        let hi = if b + 1 == batches { n } else { lo + slice_len };
        estimates.push(estimate_p_prefix(code, len, &batch.slice(lo, hi), g)?);
    }
    median_boost(&estimates)
}

/// Run the prefix-tree recovery algorithm.
pub fn recover_population<F: EstimatorFactory + Sync>(
    batch: &SampleBatch,
    config: &RecoveryConfig,
    factory: &F,
) -> Result<RecoveryResult> {
    let d = batch.d();
    if batch.n() == 0 {
        return Err(Error::EmptyBatch);
    }
    let threshold = config.threshold();
    let alpha = (4.0 * config.delta * config.tau / (9.0 * d as f64)).min(0.5);
    let batches = match config.boost_batches_override {
        Some(b) if b >= 1 => b,
        _ => boost_batches(alpha)?,
    }
    .min(batch.n());
    let overflow_cap = (1.0 / config.delta).ceil() as usize;

    let mut stats = RecoveryStats {
        boost_batches: batches,
        ..Default::default()
    };
    // S_1 = {0, 1}, unpruned; pruning starts at level 2 (for d = 1 the
    // final assignment below estimates and prunes directly).
    let mut survivors: Vec<u64> = vec![0, 1];
    let mut estimates: Vec<f64> = Vec::new();
    let levels: Box<dyn Iterator<Item = usize>> = if d == 1 {
        Box::new(std::iter::once(1))
    } else {
        Box::new(2..=d)
    };
    for level in levels {
        let candidates: Vec<u64> = if level == 1 {
            survivors.clone()
        } else {
            survivors
                .iter()
                .flat_map(|&x| [x << 1, (x << 1) | 1])
                .collect()
        };
        let g = factory.coefficients(level)?;
        let scored: Vec<(u64, f64)> = candidates
            .par_iter()
            .map(|&code| {
                boosted_estimate_prefix(code, level, batch, &g, batches).map(|e| (code, e))
            })
            .collect::<Result<_>>()?;
        stats.estimator_calls += scored.len();
        let kept: Vec<(u64, f64)> = scored
            .into_iter()
            .filter(|&(_, est)| est > threshold)
            .collect();
        stats.per_level.push(LevelStats {
            level,
            candidates: candidates.len(),
            survivors: kept.len(),
        });
        if kept.len() > overflow_cap {
            stats.overflow_levels.push(level);
        }
        survivors = kept.iter().map(|&(c, _)| c).collect();
        estimates = kept.iter().map(|&(_, e)| e).collect();
        if survivors.is_empty() {
            break;
        }
    }

    let mut support = BTreeMap::new();
    for (&code, &est) in survivors.iter().zip(&estimates) {
        support.insert(code, est);
    }
    Ok(RecoveryResult {
        estimate: HypercubeDistribution::from_estimates(d, support)?,
        survivors: survivors.iter().map(|&c| code_to_string(c, d)).collect(),
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{unbiased_coefficients, Provenance};
    use crate::model::{string_to_code, ChannelModel};

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    fn noiseless_factory(dim: usize) -> Result<EstimatorCoefficients> {
        unbiased_coefficients(dim, 0.0)
    }

    #[test]
    fn median_examples() {
        close(median_boost(&[0.1, 0.9, 0.12]).unwrap(), 0.12, 0.0);
        close(median_boost(&[0.7]).unwrap(), 0.7, 0.0);
        // Lower median on even counts.
        close(median_boost(&[4.0, 1.0, 3.0, 2.0]).unwrap(), 2.0, 0.0);
        assert!(median_boost(&[]).is_err());
        // If at least 8 of 15 draws lie in a window, so does the median.
        let mut v = vec![0.5; 8];
        v.extend([0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0]);
        close(median_boost(&v).unwrap(), 0.5, 0.0);
    }

    #[test]
    fn boost_batch_counts() {
        assert_eq!(boost_batches(0.5).unwrap(), 1);
        assert_eq!(boost_batches(1.0 / 16.0).unwrap(), 4);
        assert_eq!(boost_batches(0.3).unwrap(), 2);
    }

    #[test]
    fn boosted_estimate_degenerates_to_plain() {
        let batch = SampleBatch::from_strings(&["10", "00", "11", "00"]).unwrap();
        let g = unbiased_coefficients(2, 0.0).unwrap();
        let plain = crate::estimators::estimate_p_x("00", &batch, &g).unwrap();
        let boosted = boosted_estimate_p_x("00", &batch, &g, 0.5).unwrap();
        close(plain, boosted, 0.0);

        // Too-small batches are refused with the required minimum named.
        let tiny = SampleBatch::from_strings(&["10", "00"]).unwrap();
        match boosted_estimate_p_x("00", &tiny, &g, 1.0 / 16.0) {
            Err(Error::InvalidInput(msg)) => assert!(msg.contains("4"), "{msg}"),
            other => panic!("expected error, got {other:?}"),
        }
    }

    #[test]
    fn point_mass_recovery() {
        // P = point mass at 0^d, noiseless channel, exact estimator.
        let d = 5;
        let batch = SampleBatch::from_strings(&vec!["00000"; 64]).unwrap();
        let config = RecoveryConfig::new(0.05, 0.5).unwrap();
        let res = recover_population(&batch, &config, &noiseless_factory).unwrap();
        assert_eq!(res.survivors, vec!["00000".to_string()]);
        close(res.estimate.prob("00000").unwrap(), 1.0, 1e-12);
        let _ = d;
    }

    #[test]
    fn two_string_recovery() {
        // Uniform on {000, 111}, noiseless.
        let mut lines = Vec::new();
        for i in 0..200 {
            lines.push(if i % 2 == 0 { "000" } else { "111" });
        }
        let batch = SampleBatch::from_strings(&lines).unwrap();
        let mut config = RecoveryConfig::new(0.1, 0.5).unwrap();
        config.boost_batches_override = Some(1);
        let res = recover_population(&batch, &config, &noiseless_factory).unwrap();
        assert_eq!(res.survivors.len(), 2);
        close(res.estimate.prob("000").unwrap(), 0.5, 1e-12);
        close(res.estimate.prob("111").unwrap(), 0.5, 1e-12);
        // Budget: one call per candidate, at most 2 * |S_{i-1}| per level.
        assert!(res.stats.estimator_calls <= 2 * 2 * 2);
    }

    #[test]
    fn d_equals_one_estimates_and_prunes() {
        let batch = SampleBatch::from_strings(&["0", "0", "0", "1"]).unwrap();
        let mut config = RecoveryConfig::new(0.3, 0.5).unwrap();
        config.boost_batches_override = Some(1);
        let res = recover_population(&batch, &config, &noiseless_factory).unwrap();
        // P(1) = 0.25 <= 2 delta = 0.6 is pruned; P(0) = 0.75 survives.
        assert_eq!(res.survivors, vec!["0".to_string()]);
        close(res.estimate.prob("0").unwrap(), 0.75, 1e-12);
    }

    #[test]
    fn survivor_soundness_with_exact_estimates() {
        // Noiseless oracle: every prefix above 4 delta survives, every
        // survivor has true marginal above the prune threshold.
        let strings = ["0000", "0011", "1100", "1111", "0101"];
        let mut lines = Vec::new();
        for (i, s) in strings.iter().enumerate() {
            let copies = 20 * (i + 1);
            for _ in 0..copies {
                lines.push(*s);
            }
        }
        let n = lines.len() as f64;
        let batch = SampleBatch::from_strings(&lines).unwrap();
        let delta = 0.04;
        let mut config = RecoveryConfig::new(delta, 0.5).unwrap();
        config.boost_batches_override = Some(1);
        let res = recover_population(&batch, &config, &noiseless_factory).unwrap();
        for (i, s) in strings.iter().enumerate() {
            let mass = 20.0 * (i + 1) as f64 / n;
            if mass > 4.0 * delta {
                assert!(
                    res.survivors.contains(&s.to_string()),
                    "{s} with mass {mass} was pruned"
                );
            }
        }
        for s in &res.survivors {
            let mass = strings
                .iter()
                .position(|t| t == s)
                .map(|i| 20.0 * (i + 1) as f64 / n)
                .unwrap_or(0.0);
            assert!(mass > delta, "survivor {s} has true mass {mass}");
        }
        // Reported strings all sit above the prune threshold.
        for (_, &est) in res.estimate.support() {
            assert!(est > 2.0 * delta);
        }
    }

    #[test]
    fn xor_consistency() {
        let lines = ["0000", "0011", "1100", "1111", "0101", "0000", "0011"];
        let batch = SampleBatch::from_strings(&lines).unwrap();
        let (shift, _) = string_to_code("1010").unwrap();
        let shifted = batch.xor_shift(shift);
        let mut config = RecoveryConfig::new(0.1, 0.5).unwrap();
        config.boost_batches_override = Some(2);
        let a = recover_population(&batch, &config, &noiseless_factory).unwrap();
        let b = recover_population(&shifted, &config, &noiseless_factory).unwrap();
        let mut mapped: Vec<String> = a
            .survivors
            .iter()
            .map(|s| {
                let (c, d) = string_to_code(s).unwrap();
                code_to_string(c ^ shift, d)
            })
            .collect();
        mapped.sort();
        let mut bs = b.survivors.clone();
        bs.sort();
        assert_eq!(mapped, bs);
        for s in &a.survivors {
            let (c, d) = string_to_code(s).unwrap();
            let t = code_to_string(c ^ shift, d);
            close(
                a.estimate.prob(s).unwrap(),
                b.estimate.prob(&t).unwrap(),
                0.0,
            );
        }
    }

    #[test]
    fn synthesis_factory_caches() {
        let factory = SynthesisFactory::new(ChannelModel::lossy(0.3).unwrap(), 1000);
        let a = factory.coefficients(3).unwrap();
        let b = factory.coefficients(3).unwrap();
        assert_eq!(a, b);
        assert!(matches!(a.provenance, Provenance::LpSynthesized { n: 1000 }));
    }

    #[test]
    fn empty_batch_refused() {
        let batch = SampleBatch::new(3, vec![]).unwrap();
        let config = RecoveryConfig::new(0.1, 0.5).unwrap();
        assert!(matches!(
            recover_population(&batch, &config, &noiseless_factory),
            Err(Error::EmptyBatch)
        ));
    }
}
