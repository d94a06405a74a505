//! Seeded sampling, channel corruption and Monte Carlo rate experiments.
//!
//! Everything here is reproducible: a counter scheme derives an independent
//! sub-seed per (grid index, trial) with SplitMix64, so trials are
//! order-independent and safe to run in a parallel pool, and identical
//! configs produce bit-identical results.
//!
//! `run_experiment` measures the squared error of a weight-based linear
//! estimator of `P_0` at a fixed input distribution over a grid of sample
//! sizes. Since the estimators read only the output-weight histogram, the
//! harness samples that histogram directly from the exact per-weight output
//! law (the columns of `Phi`), which is distributionally identical to
//! sampling strings and corrupting them bit by bit but runs two orders of
//! magnitude faster. The bit-level channel (`apply_channel`) stays the
//! contract for everything that needs real records, and the chi-square
//! check below ties the two paths together statistically.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::estimators::{Certificate, EstimatorCoefficients, Record, SampleBatch};
use crate::minimax::{synthesize_estimator, FunctionalVector};
use crate::model::{
    code_to_string, weight_distribution_of, ChannelKind, ChannelModel, HypercubeDistribution,
    TransitionMatrix,
};
use crate::{Error, Result};

/// Desk-scale caps; override with [`ExperimentConfig::allow_large`].
pub const MAX_DIMENSION: usize = 60;
pub const MAX_SAMPLES: u64 = 10_000_000;
pub const MAX_TRIALS: u32 = 10_000;

/// Which estimator the experiment drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimatorKind {
    /// LP-synthesized minimax coefficients, re-solved per sample size.
    #[serde(rename = "LP", alias = "lp")]
    Lp,
    Unbiased,
    Smoothed,
    /// `g = e_0`: the empirical frequency of observed weight zero.
    Empirical,
}

/// Experiment description; the JSON config mirrors these field names.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ChannelModel,
    pub d: usize,
    /// Input distribution, serialized as a `bitstring -> probability` map.
    #[serde(with = "hypercube_serde")]
    pub distribution: HypercubeDistribution,
    pub n_grid: Vec<u64>,
    pub trials: u32,
    pub estimator: EstimatorKind,
    pub seed: u64,
    /// Lift the desk-scale caps on `d`, `n` and `trials`.
    #[serde(default)]
    pub allow_large: bool,
}

mod hypercube_serde {
    use super::*;
    use serde::de::Error as _;
    use std::collections::BTreeMap;

    pub fn serialize<S: serde::Serializer>(
        dist: &HypercubeDistribution,
        ser: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let map: BTreeMap<String, f64> = dist
            .support()
            .iter()
            .map(|(&code, &p)| (code_to_string(code, dist.d()), p))
            .collect();
        serde::Serialize::serialize(&map, ser)
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(
        de: D,
    ) -> std::result::Result<HypercubeDistribution, D::Error> {
        let map: BTreeMap<String, f64> = serde::Deserialize::deserialize(de)?;
        let pairs: Vec<(&str, f64)> = map.iter().map(|(k, &v)| (k.as_str(), v)).collect();
        HypercubeDistribution::from_pairs(&pairs).map_err(D::Error::custom)
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "n_grid must be non-empty and strictly increasing".into(),
            ));
        }
        if self.trials == 0 {
            return Err(Error::InvalidInput("trials must be >= 1".into()));
        }
        if self.distribution.d() != self.d {
            return Err(Error::DimensionMismatch(format!(
                "config d = {} but distribution has d = {}",
                self.d,
                self.distribution.d()
            )));
        }
        if !self.allow_large {
            if self.d > MAX_DIMENSION {
                return Err(Error::DimensionTooLarge {
                    got: self.d,
                    max: MAX_DIMENSION,
                });
            }
            if self.n_grid.last().copied().unwrap_or(0) > MAX_SAMPLES {
                return Err(Error::InvalidInput(format!(
                    "n above desk-scale cap {MAX_SAMPLES}; set allow_large"
                )));
            }
            if self.trials > MAX_TRIALS {
                return Err(Error::InvalidInput(format!(
                    "trials above desk-scale cap {MAX_TRIALS}; set allow_large"
                )));
            }
        }
        Ok(())
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(json)
            .map_err(|e| Error::InvalidInput(format!("bad experiment config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// One (n, trial) measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub n: u64,
    pub trial: u32,
    pub estimate: f64,
    pub sq_error: f64,
}

/// Per-n aggregate.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub n: u64,
    pub mse: f64,
    pub stderr: f64,
    /// `(bias_bound + sup_norm/sqrt(n))^2` for the estimator used at this n.
    pub certificate_upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub rows: Vec<ExperimentRow>,
    pub summary: Vec<SummaryRow>,
}

impl ExperimentResult {
    pub fn rows_csv(&self) -> String {
        let mut s = String::from("n,trial,estimate,sq_error\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{},{}\n", r.n, r.trial, r.estimate, r.sq_error));
        }
        s
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::from("n,mse,stderr,certificate_upper\n");
        for r in &self.summary {
            s.push_str(&format!(
                "{},{},{},{}\n",
                r.n, r.mse, r.stderr, r.certificate_upper
            ));
        }
        s
    }
}

/// SplitMix64 step.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derive the sub-seed for (n-index, trial) from the master seed.
pub fn subseed(seed: u64, n_index: u64, trial: u64) -> u64 {
    let mut state = seed;
    let a = splitmix64(&mut state);
    let mut state = a ^ n_index.wrapping_mul(0xd1342543de82ef95).wrapping_add(1);
    let b = splitmix64(&mut state);
    let mut state = b ^ trial.wrapping_mul(0xaf251af3b0f025b5).wrapping_add(1);
    splitmix64(&mut state)
}

/// Cumulative-inversion sampler over arbitrary finite supports.
struct CdfSampler<T: Copy> {
    items: Vec<T>,
    cdf: Vec<f64>,
}

impl<T: Copy> CdfSampler<T> {
    fn new(items: Vec<T>, weights: &[f64]) -> Self {
        let mut cdf = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for w in weights {
            acc += w;
            cdf.push(acc);
        }
        // Guard the last bucket against rounding shortfall.
        if let Some(last) = cdf.last_mut() {
            *last = f64::INFINITY;
        }
        CdfSampler { items, cdf }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> T {
        let u: f64 = rng.random();
        let idx = self.cdf.partition_point(|&c| c <= u);
        self.items[idx.min(self.items.len() - 1)]
    }
}

/// Draw `n` iid strings from `P`; deterministic in `seed`.
pub fn sample_hypercube(p: &HypercubeDistribution, n: usize, seed: u64) -> Vec<String> {
    sample_hypercube_codes(p, n, seed)
        .into_iter()
        .map(|c| code_to_string(c, p.d()))
        .collect()
}

/// Mask-level variant of [`sample_hypercube`].
pub fn sample_hypercube_codes(p: &HypercubeDistribution, n: usize, seed: u64) -> Vec<u64> {
    let items: Vec<u64> = p.support().keys().copied().collect();
    let weights: Vec<f64> = p.support().values().copied().collect();
    let sampler = CdfSampler::new(items, &weights);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| sampler.sample(&mut rng)).collect()
}

/// Corrupt each bit independently: erased to `?` (lossy) or flipped
/// (noisy) with probability `eps`. Deterministic in `seed`.
pub fn apply_channel(samples: &[String], channel: ChannelModel, seed: u64) -> Result<SampleBatch> {
    let first = samples.first().ok_or(Error::EmptyBatch)?;
    let d = first.len();
    let mut codes = Vec::with_capacity(samples.len());
    for (i, s) in samples.iter().enumerate() {
        let (code, len) = crate::model::string_to_code(s).map_err(|e| Error::Parse {
            line: i + 1,
            msg: e.to_string(),
        })?;
        if len != d {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("record length {len} != {d}"),
            });
        }
        codes.push(code);
    }
    Ok(apply_channel_codes(&codes, d, channel, seed))
}

/// Mask-level channel: used by the recovery harness and tests.
pub fn apply_channel_codes(
    codes: &[u64],
    d: usize,
    channel: ChannelModel,
    seed: u64,
) -> SampleBatch {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps = channel.epsilon;
    let full = if d == 64 { u64::MAX } else { (1u64 << d) - 1 };
    let records: Vec<Record> = codes
        .iter()
        .map(|&code| {
            let mut hit = 0u64;
            for b in 0..d {
                if rng.random::<f64>() < eps {
                    hit |= 1 << b;
                }
            }
            match channel.kind {
                ChannelKind::Lossy => Record {
                    ones: code & !hit,
                    known: full & !hit,
                },
                ChannelKind::Noisy => Record {
                    ones: (code ^ hit) & full,
                    known: full,
                },
            }
        })
        .collect();
    SampleBatch::new(d, records).expect("codes fit the dimension")
}

/// Output-weight histogram of `n` samples drawn at the weight level:
/// input weight from `pi`, output weight from the matching column of `Phi`.
fn sample_weight_counts<R: Rng>(
    pi_sampler: &CdfSampler<usize>,
    column_samplers: &[CdfSampler<usize>],
    n: u64,
    rng: &mut R,
) -> Vec<u64> {
    let k = column_samplers.len();
    let mut counts = vec![0u64; k];
    for _ in 0..n {
        let w_in = pi_sampler.sample(rng);
        let w_out = column_samplers[w_in].sample(rng);
        counts[w_out] += 1;
    }
    counts
}

struct PreparedEstimator {
    g: EstimatorCoefficients,
    certificate: Certificate,
}

fn prepare_estimator(
    kind: EstimatorKind,
    phi: &TransitionMatrix,
    n: u64,
) -> Result<PreparedEstimator> {
    let d = phi.d();
    let channel = phi.channel();
    match kind {
        EstimatorKind::Lp => {
            let h = FunctionalVector::e0(d);
            let s = synthesize_estimator(phi, &h, n)?;
            Ok(PreparedEstimator {
                certificate: Certificate {
                    bias_bound: s.bias_bound,
                    sup_norm: s.sup_norm,
                },
                g: s.g,
            })
        }
        EstimatorKind::Unbiased => {
            let g = crate::estimators::unbiased_coefficients(d, channel.epsilon)?;
            let sup = g.sup_norm();
            Ok(PreparedEstimator {
                g,
                certificate: Certificate {
                    bias_bound: 0.0,
                    sup_norm: sup,
                },
            })
        }
        EstimatorKind::Smoothed => {
            let s = crate::estimators::smoothed_coefficients(d, channel.epsilon, n.max(2))?;
            Ok(PreparedEstimator {
                g: s.coefficients,
                certificate: s.certificate,
            })
        }
        EstimatorKind::Empirical => {
            let mut g = vec![0.0; d + 1];
            g[0] = 1.0;
            let g = EstimatorCoefficients::new(g, crate::estimators::Provenance::Unbiased)?;
            // Bias of e_0 is the sup of row 0 of Phi off the (0,0) entry.
            let bias = (1..=d).map(|j| phi.entry(0, j)).fold(0.0f64, f64::max);
            Ok(PreparedEstimator {
                g,
                certificate: Certificate {
                    bias_bound: bias,
                    sup_norm: 1.0,
                },
            })
        }
    }
}

/// Run the Monte Carlo experiment described by `config`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let pi = weight_distribution_of(&config.distribution);
    run_weight_experiment(
        config.model,
        &pi,
        &config.n_grid,
        config.trials,
        config.estimator,
        config.seed,
    )
}

/// Weight-level experiment core. The input is a weight distribution; the
/// estimated functional is `pi(0)`, which equals `P_0` for any hypercube
/// distribution with this weight marginal (the zero string is the only
/// weight-zero string). Works for any `d` the transition matrices accept.
pub fn run_weight_experiment(
    model: ChannelModel,
    pi: &WeightDistribution,
    n_grid: &[u64],
    trials: u32,
    estimator: EstimatorKind,
    seed: u64,
) -> Result<ExperimentResult> {
    if n_grid.is_empty() || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(
            "n_grid must be non-empty and strictly increasing".into(),
        ));
    }
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be >= 1".into()));
    }
    let d = pi.d();
    let phi = model.build_phi(d)?;
    let p0 = pi.prob(0);

    let pi_sampler = CdfSampler::new((0..=d).collect(), pi.probs());
    let column_samplers: Vec<CdfSampler<usize>> = (0..=d)
        .map(|j| CdfSampler::new((0..=d).collect(), &phi.column(j)))
        .collect();

    let estimators: Vec<PreparedEstimator> = n_grid
        .iter()
        .map(|&n| prepare_estimator(estimator, &phi, n))
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, u32)> = (0..n_grid.len())
        .flat_map(|ni| (0..trials).map(move |t| (ni, t)))
        .collect();
    let rows: Vec<ExperimentRow> = jobs
        .par_iter()
        .map(|&(ni, trial)| {
            let n = n_grid[ni];
            let mut rng = ChaCha8Rng::seed_from_u64(subseed(seed, ni as u64, trial as u64));
            let counts = sample_weight_counts(&pi_sampler, &column_samplers, n, &mut rng);
            let est: f64 = estimators[ni]
                .g
                .g
                .iter()
                .zip(&counts)
                .map(|(g, &c)| g * c as f64)
                .sum::<f64>()
                / n as f64;
            let err = est - p0;
            ExperimentRow {
                n,
                trial,
                estimate: est,
                sq_error: err * err,
            }
        })
        .collect();

    let mut summary = Vec::with_capacity(n_grid.len());
    for (ni, &n) in n_grid.iter().enumerate() {
        let errs: Vec<f64> = rows
            .iter()
            .filter(|r| r.n == n)
            .map(|r| r.sq_error)
            .collect();
        let trials = errs.len() as f64;
        let mse = errs.iter().sum::<f64>() / trials;
        let var = errs.iter().map(|e| (e - mse) * (e - mse)).sum::<f64>() / trials.max(1.0);
        let rmse_bound = estimators[ni].certificate.rmse_bound(n);
        summary.push(SummaryRow {
            n,
            mse,
            stderr: (var / trials).sqrt(),
            certificate_upper: rmse_bound * rmse_bound,
        });
    }
    Ok(ExperimentResult { rows, summary })
}

/// Least-squares slope of `log(mse)` against `log(n)`.
pub fn fit_rate_slope(summary: &[SummaryRow]) -> Result<f64> {
    if summary.len() < 3 {
        return Err(Error::InvalidInput(
            "rate fit needs at least 3 grid points".into(),
        ));
    }
    if summary.iter().any(|r| r.mse <= 0.0) {
        return Err(Error::InvalidInput("degenerate MSE".into()));
    }
    let xs: Vec<f64> = summary.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = summary.iter().map(|r| r.mse.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// Pearson chi-square statistic of observed counts against expected
/// probabilities, pooling cells with expectation below 5.
pub fn chi_square_stat(observed: &[u64], expected_probs: &[f64]) -> (f64, usize) {
    let n: u64 = observed.iter().sum();
    let nf = n as f64;
    let mut stat = 0.0;
    let mut dof: isize = -1;
    let mut pool_obs = 0.0;
    let mut pool_exp = 0.0;
    for (o, p) in observed.iter().zip(expected_probs) {
        let e = p * nf;
        pool_obs += *o as f64;
        pool_exp += e;
        if pool_exp >= 5.0 {
            let diff = pool_obs - pool_exp;
            stat += diff * diff / pool_exp;
            dof += 1;
            pool_obs = 0.0;
            pool_exp = 0.0;
        }
    }
    if pool_exp > 0.0 {
        let diff = pool_obs - pool_exp;
        stat += diff * diff / pool_exp;
        dof += 1;
    }
    (stat, dof.max(1) as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::weight_counts;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    fn uniform_two() -> HypercubeDistribution {
        HypercubeDistribution::from_pairs(&[("00", 0.5), ("11", 0.5)]).unwrap()
    }

    #[test]
    fn sampling_is_deterministic_and_correct() {
        let p = HypercubeDistribution::from_pairs(&[("101", 1.0)]).unwrap();
        let s = sample_hypercube(&p, 5, 42);
        assert_eq!(s, vec!["101"; 5]);

        let p = uniform_two();
        let a = sample_hypercube(&p, 10_000, 7);
        let b = sample_hypercube(&p, 10_000, 7);
        assert_eq!(a, b);
        let frac = a.iter().filter(|s| s.as_str() == "00").count() as f64 / 10_000.0;
        assert!((frac - 0.5).abs() <= 0.015, "frac = {frac}");
    }

    #[test]
    fn channel_edge_cases() {
        let inputs = vec!["1010".to_string(), "0110".to_string()];
        let clean = apply_channel(&inputs, ChannelModel::lossy(0.0).unwrap(), 3).unwrap();
        assert_eq!(clean.record_string(0), "1010");
        assert_eq!(clean.record_string(1), "0110");

        let erased = apply_channel(&inputs, ChannelModel::lossy(1.0).unwrap(), 3).unwrap();
        assert_eq!(erased.record_string(0), "????");

        let flipped = apply_channel(&inputs, ChannelModel::noisy(1.0).unwrap(), 3).unwrap();
        assert_eq!(flipped.record_string(0), "0101");
    }

    #[test]
    fn erasure_fraction_matches_rate() {
        let inputs = vec!["1".to_string(); 10_000];
        let batch = apply_channel(&inputs, ChannelModel::lossy(0.3).unwrap(), 11).unwrap();
        let q = batch
            .records()
            .iter()
            .filter(|r| r.known == 0)
            .count() as f64
            / 10_000.0;
        assert!((q - 0.3).abs() <= 0.014, "erasure fraction {q}");
    }

    #[test]
    fn empirical_weight_law_passes_chi_square() {
        // >= 1e5 corrupted samples of a fixed input weight against the
        // corresponding Phi column at significance 1e-3.
        let d = 8;
        for channel in [ChannelModel::lossy(0.35).unwrap(), ChannelModel::noisy(0.2).unwrap()] {
            let phi = channel.build_phi(d).unwrap();
            let input = vec!["11100000".to_string(); 100_000];
            let batch = apply_channel(&input, channel, 1234).unwrap();
            let wc = weight_counts(&batch);
            let (stat, dof) = chi_square_stat(&wc.counts, &phi.column(3));
            let crit = ChiSquared::new(dof as f64).unwrap().inverse_cdf(1.0 - 1e-3);
            assert!(
                stat <= crit,
                "{channel:?}: chi2 = {stat:.2} > {crit:.2} (dof {dof})"
            );
        }
    }

    #[test]
    fn experiment_reproducible_and_sized() {
        let config = ExperimentConfig {
            model: ChannelModel::lossy(0.25).unwrap(),
            d: 2,
            distribution: uniform_two(),
            n_grid: vec![10],
            trials: 1,
            estimator: EstimatorKind::Empirical,
            seed: 5,
            allow_large: false,
        };
        let a = run_experiment(&config).unwrap();
        let b = run_experiment(&config).unwrap();
        assert_eq!(a.rows.len(), 1);
        assert_eq!(a.rows, b.rows);
    }

    #[test]
    fn empirical_estimator_hits_binomial_variance() {
        // eps = 0: MSE of the empirical estimator is P0 (1-P0)/n.
        let config = ExperimentConfig {
            model: ChannelModel::lossy(0.0).unwrap(),
            d: 2,
            distribution: uniform_two(),
            n_grid: vec![100, 1000],
            trials: 3000,
            estimator: EstimatorKind::Empirical,
            seed: 99,
            allow_large: false,
        };
        let res = run_experiment(&config).unwrap();
        for row in &res.summary {
            let expect = 0.25 / row.n as f64;
            assert!(
                (row.mse - expect).abs() <= 3.0 * row.stderr + 1e-12,
                "n = {}: mse {} vs {expect} (3 se = {})",
                row.n,
                row.mse,
                3.0 * row.stderr
            );
        }
    }

    #[test]
    fn mse_respects_certificates() {
        let config = ExperimentConfig {
            model: ChannelModel::lossy(0.25).unwrap(),
            d: 10,
            distribution: HypercubeDistribution::from_pairs(&[
                ("0000000000", 0.4),
                ("1111100000", 0.35),
                ("0000011111", 0.25),
            ])
            .unwrap(),
            n_grid: vec![100, 1000],
            trials: 10_000,
            estimator: EstimatorKind::Lp,
            seed: 21,
            allow_large: false,
        };
        let res = run_experiment(&config).unwrap();
        let slack = 1.0 + 3.0 / (config.trials as f64).sqrt();
        for row in &res.summary {
            assert!(
                row.mse <= row.certificate_upper * slack,
                "n = {}: {} > {}",
                row.n,
                row.mse,
                row.certificate_upper * slack
            );
        }
    }

    #[test]
    fn slope_fit_examples() {
        let synth = |f: &dyn Fn(f64) -> f64| -> Vec<SummaryRow> {
            [1000u64, 10_000, 100_000, 1_000_000]
                .iter()
                .map(|&n| SummaryRow {
                    n,
                    mse: f(n as f64),
                    stderr: 0.0,
                    certificate_upper: 0.0,
                })
                .collect()
        };
        close(fit_rate_slope(&synth(&|n| 3.0 / n)).unwrap(), -1.0, 1e-12);
        close(
            fit_rate_slope(&synth(&|n| 0.7 * n.powf(-1.0 / 3.0))).unwrap(),
            -1.0 / 3.0,
            1e-12,
        );
        assert!(fit_rate_slope(&synth(&|_| 0.0)).is_err());
        assert!(fit_rate_slope(&synth(&|n| 1.0 / n)[..2]).is_err());
    }

    #[test]
    fn config_json_round_trip() {
        let config = ExperimentConfig {
            model: ChannelModel::noisy(0.1).unwrap(),
            d: 2,
            distribution: uniform_two(),
            n_grid: vec![10, 100],
            trials: 2,
            estimator: EstimatorKind::Smoothed,
            seed: 1,
            allow_large: false,
        };
        let json = config.to_json();
        let back = ExperimentConfig::from_json(&json).unwrap();
        assert_eq!(back.d, 2);
        assert_eq!(back.n_grid, vec![10, 100]);
        assert_eq!(back.estimator, EstimatorKind::Smoothed);
        assert_eq!(back.distribution, config.distribution);

        // Validation failures.
        let bad = json.replace("[\n    10,\n    100\n  ]", "[100, 10]");
        assert!(ExperimentConfig::from_json(&bad).is_err());
    }

    #[test]
    fn subseeds_differ() {
        let a = subseed(1, 0, 0);
        let b = subseed(1, 0, 1);
        let c = subseed(1, 1, 0);
        let d = subseed(2, 0, 0);
        assert!(a != b && a != c && a != d && b != c);
    }
}
