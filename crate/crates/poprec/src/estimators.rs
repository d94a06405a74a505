//! Concrete linear estimators applied to corrupted sample batches.
//!
//! A linear estimator with coefficients `g` reports `(1/n) sum_j g_j N_j`
//! where `N_j` counts samples of observed Hamming weight `j` (ones only;
//! `?` and `0` are ignored, the ones-count being the statistic the whole
//! LP pipeline is built on). Three families live here:
//!
//! - LP-synthesized coefficients (produced by [`crate::minimax`]),
//! - the exact unbiased estimator `g^u_j = (-eps/(1-eps))^j`,
//! - its Poisson-smoothed variant `g^s_i = g^u_i P(L >= i)`,
//!   `L ~ Poisson(lambda)`, which trades a certified `exp(-lambda/2)` bias
//!   for a certified `exp(lambda (2 eps - 1)/(1 - eps))` sup norm.

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use statrs::function::gamma::ln_gamma;

use crate::model::{
    self, rational_from_f64, string_to_code, ChannelKind, MAX_STRING_DIMENSION,
};
use crate::{Error, Result};

/// Where a coefficient vector came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance {
    LpSynthesized { n: u64 },
    Unbiased,
    Smoothed { lambda: f64 },
}

/// Coefficients of a linear estimator on weights `0..=d`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorCoefficients {
    pub d: usize,
    pub g: Vec<f64>,
    pub provenance: Provenance,
}

impl EstimatorCoefficients {
    pub fn new(g: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if g.is_empty() || g.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(
                "estimator coefficients must be non-empty and finite".into(),
            ));
        }
        Ok(EstimatorCoefficients {
            d: g.len() - 1,
            g,
            provenance,
        })
    }

    pub fn sup_norm(&self) -> f64 {
        self.g.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Certified bias / sup-norm pair attached to an estimator; the mean squared
/// error is at most `(bias_bound + sup_norm/sqrt(n))^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub bias_bound: f64,
    pub sup_norm: f64,
}

impl Certificate {
    pub fn rmse_bound(&self, n: u64) -> f64 {
        self.bias_bound + self.sup_norm / (n as f64).sqrt()
    }
}

/// One observed record, packed into masks (text position `p` is bit
/// `d-1-p`). `ones` holds the `1` symbols, `known` the non-`?` symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Record {
    pub ones: u64,
    pub known: u64,
}

/// A batch of observed strings over `{0,1,?}` (lossy) or `{0,1}` (noisy).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    d: usize,
    records: Vec<Record>,
}

/// Optional batch-file header, verified against the records when present.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchHeader {
    pub d: usize,
    pub model: ChannelKind,
    pub eps: f64,
    pub seed: u64,
}

impl SampleBatch {
    pub fn new(d: usize, records: Vec<Record>) -> Result<Self> {
        if d == 0 || d > MAX_STRING_DIMENSION {
            return Err(Error::InvalidInput(format!(
                "batch dimension {d} outside 1..={MAX_STRING_DIMENSION}"
            )));
        }
        let mask = if d == 64 { u64::MAX } else { (1u64 << d) - 1 };
        for r in &records {
            if r.ones & !r.known != 0 || (r.ones | r.known) & !mask != 0 {
                return Err(Error::InvalidInput("record masks out of range".into()));
            }
        }
        Ok(SampleBatch { d, records })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.records.len()
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    fn full_mask(d: usize) -> u64 {
        if d == 64 {
            u64::MAX
        } else {
            (1u64 << d) - 1
        }
    }

    /// Parse one record line; `lineno` is used for error reporting.
    fn parse_record(line: &str, d: usize, lineno: usize) -> Result<Record> {
        if line.len() != d {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("record has length {}, expected {d}", line.len()),
            });
        }
        let mut ones = 0u64;
        let mut known = 0u64;
        for c in line.chars() {
            ones <<= 1;
            known <<= 1;
            match c {
                '0' => known |= 1,
                '1' => {
                    ones |= 1;
                    known |= 1;
                }
                '?' => {}
                other => {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("invalid symbol {other:?} (want 0, 1 or ?)"),
                    })
                }
            }
        }
        Ok(Record { ones, known })
    }

    pub fn from_strings<S: AsRef<str>>(lines: &[S]) -> Result<Self> {
        let first = lines.first().ok_or(Error::EmptyBatch)?;
        let d = first.as_ref().len();
        if d == 0 || d > MAX_STRING_DIMENSION {
            return Err(Error::InvalidInput(format!(
                "record length {d} outside 1..={MAX_STRING_DIMENSION}"
            )));
        }
        let records = lines
            .iter()
            .enumerate()
            .map(|(i, l)| Self::parse_record(l.as_ref(), d, i + 1))
            .collect::<Result<Vec<_>>>()?;
        Self::new(d, records)
    }

    /// Parse the batch text format; returns the header when present.
    pub fn from_text(text: &str) -> Result<(Self, Option<BatchHeader>)> {
        let mut header: Option<BatchHeader> = None;
        let mut d: Option<usize> = None;
        let mut records = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim_end();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if header.is_none() && records.is_empty() && rest.trim_start().starts_with("d=") {
                    let h = Self::parse_header(rest, lineno)?;
                    d = Some(h.d);
                    header = Some(h);
                }
                continue;
            }
            let dd = *d.get_or_insert(line.len());
            records.push(Self::parse_record(line, dd, lineno)?);
        }
        let d = d.ok_or(Error::EmptyBatch)?;
        let batch = Self::new(d, records)?;
        if let Some(h) = &header {
            if h.model == ChannelKind::Noisy {
                let full = Self::full_mask(d);
                if batch.records.iter().any(|r| r.known != full) {
                    return Err(Error::InvalidInput(
                        "header declares a noisy batch but records contain '?'".into(),
                    ));
                }
            }
        }
        Ok((batch, header))
    }

    fn parse_header(rest: &str, lineno: usize) -> Result<BatchHeader> {
        let mut d = None;
        let mut model = None;
        let mut eps = None;
        let mut seed = None;
        for field in rest.split_whitespace() {
            let (key, val) = field.split_once('=').ok_or(Error::Parse {
                line: lineno,
                msg: format!("bad header field {field:?}"),
            })?;
            let bad = |e: String| Error::Parse {
                line: lineno,
                msg: format!("bad header value {val:?} for {key}: {e}"),
            };
            match key {
                "d" => d = Some(val.parse::<usize>().map_err(|e| bad(e.to_string()))?),
                "model" => {
                    model = Some(match val {
                        "lossy" => ChannelKind::Lossy,
                        "noisy" => ChannelKind::Noisy,
                        _ => return Err(bad("want lossy or noisy".into())),
                    })
                }
                "eps" => eps = Some(val.parse::<f64>().map_err(|e| bad(e.to_string()))?),
                "seed" => seed = Some(val.parse::<u64>().map_err(|e| bad(e.to_string()))?),
                _ => {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("unknown header key {key:?}"),
                    })
                }
            }
        }
        match (d, model, eps, seed) {
            (Some(d), Some(model), Some(eps), Some(seed)) => {
                Ok(BatchHeader { d, model, eps, seed })
            }
            _ => Err(Error::Parse {
                line: lineno,
                msg: "header must provide d, model, eps and seed".into(),
            }),
        }
    }

    pub fn record_string(&self, i: usize) -> String {
        let r = self.records[i];
        (0..self.d)
            .map(|p| {
                let bit = 1u64 << (self.d - 1 - p);
                if r.known & bit == 0 {
                    '?'
                } else if r.ones & bit != 0 {
                    '1'
                } else {
                    '0'
                }
            })
            .collect()
    }

    pub fn to_text(&self, header: Option<&BatchHeader>) -> String {
        let mut s = String::new();
        if let Some(h) = header {
            s.push_str(&format!(
                "#d={} model={} eps={} seed={}\n",
                h.d, h.model, h.eps, h.seed
            ));
        }
        for i in 0..self.n() {
            s.push_str(&self.record_string(i));
            s.push('\n');
        }
        s
    }

    /// XOR every record with the fixed string `code`; `?` stays `?`.
    pub fn xor_shift(&self, code: u64) -> SampleBatch {
        let records = self
            .records
            .iter()
            .map(|r| Record {
                ones: (r.ones ^ code) & r.known,
                known: r.known,
            })
            .collect();
        SampleBatch {
            d: self.d,
            records,
        }
    }

    /// Contiguous slice `lo..hi` of the batch (for median boosting).
    pub fn slice(&self, lo: usize, hi: usize) -> SampleBatch {
        SampleBatch {
            d: self.d,
            records: self.records[lo..hi].to_vec(),
        }
    }
}

/// Per-weight sample counts `N_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightCounts {
    pub d: usize,
    pub counts: Vec<u64>,
    pub n: u64,
}

/// Count samples by observed Hamming weight (`1` symbols only).
pub fn weight_counts(batch: &SampleBatch) -> WeightCounts {
    let mut counts = vec![0u64; batch.d() + 1];
    for r in batch.records() {
        counts[r.ones.count_ones() as usize] += 1;
    }
    WeightCounts {
        d: batch.d(),
        counts,
        n: batch.n() as u64,
    }
}

/// `(1/n) sum_j g_j N_j`.
pub fn apply_linear_estimator(g: &EstimatorCoefficients, counts: &WeightCounts) -> Result<f64> {
    if counts.n == 0 {
        return Err(Error::EmptyBatch);
    }
    if g.d != counts.d {
        return Err(Error::DimensionMismatch(format!(
            "coefficients for d = {} applied to counts for d = {}",
            g.d, counts.d
        )));
    }
    let total: f64 = g
        .g
        .iter()
        .zip(&counts.counts)
        .map(|(gj, &nj)| gj * nj as f64)
        .sum();
    Ok(total / counts.n as f64)
}

/// The unique unbiased coefficients for the lossy channel:
/// `g_j = (-eps/(1-eps))^j`, i.e. `(Phi^T)^{-1} e_0`.
pub fn unbiased_coefficients(d: usize, epsilon: f64) -> Result<EstimatorCoefficients> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidProbability(epsilon));
    }
    if epsilon == 1.0 {
        return Err(Error::ChannelUninvertible);
    }
    let ratio = -epsilon / (1.0 - epsilon);
    let mut g = Vec::with_capacity(d + 1);
    let mut cur = 1.0;
    for _ in 0..=d {
        g.push(cur);
        cur *= ratio;
    }
    EstimatorCoefficients::new(g, Provenance::Unbiased)
}

/// Exact-rational unbiased coefficients, for certification.
pub fn unbiased_coefficients_exact(d: usize, epsilon: &BigRational) -> Result<Vec<BigRational>> {
    if epsilon >= &BigRational::one() || epsilon.is_negative() {
        return Err(Error::ChannelUninvertible);
    }
    let ratio = -epsilon / (BigRational::one() - epsilon);
    let mut g = Vec::with_capacity(d + 1);
    let mut cur = BigRational::one();
    for _ in 0..=d {
        g.push(cur.clone());
        cur *= &ratio;
    }
    Ok(g)
}

/// Poisson upper tail `P(L >= i)`, `L ~ Poisson(lambda)`.
///
/// When the tail is large the complementary lower sum is small and safe to
/// subtract; otherwise pmf terms are summed upward from `i` (descending
/// magnitude there) until they drop below 1e-18, avoiding `1 - cdf`
/// cancellation.
pub fn poisson_tail(lambda: f64, i: usize) -> f64 {
    assert!(lambda >= 0.0, "lambda must be non-negative");
    if i == 0 {
        return 1.0;
    }
    if lambda == 0.0 {
        return 0.0;
    }
    if (i as f64) <= lambda {
        let mut acc = 0.0;
        let mut term = (-lambda).exp();
        for k in 0..i {
            if k > 0 {
                term *= lambda / k as f64;
            }
            acc += term;
        }
        return (1.0 - acc).max(0.0);
    }
    let ln_first = -lambda + (i as f64) * lambda.ln() - ln_gamma((i + 1) as f64);
    let mut term = ln_first.exp();
    let mut acc = 0.0;
    let mut k = i;
    while term >= 1e-18 {
        acc += term;
        k += 1;
        term *= lambda / k as f64;
    }
    acc + term
}

/// Product of a Poisson-smoothed synthesis: coefficients plus certificates.
#[derive(Debug, Clone)]
pub struct SmoothedSynthesis {
    pub coefficients: EstimatorCoefficients,
    pub certificate: Certificate,
    /// Poisson mean `lambda = ((1-eps)/(3 eps - 1)) ln n`; zero in the
    /// degraded regime.
    pub lambda: f64,
    /// Set when `eps <= 1/2`, where the plain unbiased estimator already has
    /// unit sup norm and smoothing is pointless.
    pub degraded_to_unbiased: bool,
}

/// Poisson-smoothed coefficients `g_i = (-eps/(1-eps))^i P(L >= i)`.
pub fn smoothed_coefficients(d: usize, epsilon: f64, n: u64) -> Result<SmoothedSynthesis> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidProbability(epsilon));
    }
    if epsilon == 1.0 {
        return Err(Error::ChannelUninvertible);
    }
    if n < 2 {
        return Err(Error::InvalidInput(
            "log n nonpositive: smoothing needs n >= 2".into(),
        ));
    }
    if epsilon <= 0.5 {
        let coefficients = unbiased_coefficients(d, epsilon)?;
        let sup = coefficients.sup_norm();
        return Ok(SmoothedSynthesis {
            coefficients,
            certificate: Certificate {
                bias_bound: 0.0,
                sup_norm: sup,
            },
            lambda: 0.0,
            degraded_to_unbiased: true,
        });
    }
    let ebar = 1.0 - epsilon;
    let lambda = ebar / (3.0 * epsilon - 1.0) * (n as f64).ln();
    let ratio = -epsilon / ebar;
    let mut g = Vec::with_capacity(d + 1);
    let mut cur = 1.0;
    for i in 0..=d {
        g.push(cur * poisson_tail(lambda, i));
        cur *= ratio;
    }
    let coefficients = EstimatorCoefficients::new(g, Provenance::Smoothed { lambda })?;
    Ok(SmoothedSynthesis {
        coefficients,
        certificate: Certificate {
            bias_bound: (-lambda / 2.0).exp(),
            sup_norm: (lambda * (2.0 * epsilon - 1.0) / ebar).exp(),
        },
        lambda,
        degraded_to_unbiased: false,
    })
}

/// Laguerre polynomial `L_k(lambda)` by the three-term recurrence.
pub fn laguerre(k: usize, lambda: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => 1.0 - lambda,
        _ => {
            let mut prev = 1.0;
            let mut cur = 1.0 - lambda;
            for m in 1..k {
                let next = (((2 * m + 1) as f64 - lambda) * cur - (m as f64) * prev)
                    / (m as f64 + 1.0);
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// `L_k(lambda)` by the explicit sum, for cross-checks at small degree.
/// Also returns the sum of term magnitudes, which bounds the cancellation
/// error of this reference path.
pub fn laguerre_explicit(k: usize, lambda: f64) -> (f64, f64) {
    let mut acc = 0.0;
    let mut scale = 0.0;
    let mut coeff = 1.0; // (-lambda)^i / i!
    for i in 0..=k {
        if i > 0 {
            coeff *= -lambda / i as f64;
        }
        let mut binom = 1.0;
        for t in 0..i {
            binom = binom * (k - t) as f64 / (t + 1) as f64;
        }
        acc += coeff * binom;
        scale += (coeff * binom).abs();
    }
    (acc, scale)
}

/// The smoothed-estimator bias vector `Phi^T g^s - e_0`, computed two ways.
#[derive(Debug, Clone)]
pub struct SmoothedBias {
    /// Direct matrix product, carried out in exact rational arithmetic
    /// (the alternating sum cancels catastrophically in doubles).
    pub matrix_path: Vec<f64>,
    /// Closed form: entry_0 = 0, entry_j = eps^j e^{-lambda} L_{j-1}(lambda).
    pub laguerre_path: Vec<f64>,
}

impl SmoothedBias {
    pub fn max_disagreement(&self) -> f64 {
        self.matrix_path
            .iter()
            .zip(&self.laguerre_path)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Poisson tail probabilities `P(L >= i)` for `i = 0..count` as rationals,
/// accurate far beyond double precision (absolute error < 1e-50).
fn poisson_tails_exact(lambda: &BigRational, count: usize) -> Vec<BigRational> {
    let tiny = BigRational::new(1.into(), num_bigint::BigInt::from(10u8).pow(60));
    let lam_f = lambda.to_f64().unwrap_or(0.0);
    // e^{-lambda} by the alternating series, truncated once terms are tiny.
    let mut exp_neg = BigRational::zero();
    let mut term = BigRational::one();
    let mut m = 0usize;
    loop {
        exp_neg += &term;
        m += 1;
        term = &term * &(-lambda.clone()) / BigRational::from_integer(m.into());
        if m as f64 > 2.0 * lam_f + 4.0 && term.abs() < tiny {
            break;
        }
    }
    // pmf(k) = e^{-lambda} lambda^k / k!, summed into suffix tails.
    let mut pmfs = Vec::new();
    let mut p = exp_neg.clone();
    let mut k = 0usize;
    loop {
        pmfs.push(p.clone());
        k += 1;
        p = &p * lambda / BigRational::from_integer(k.into());
        if k >= count && (k as f64) > lam_f && p < tiny {
            break;
        }
    }
    let mut tails = vec![BigRational::zero(); count];
    let mut acc = BigRational::zero();
    for k in (0..pmfs.len()).rev() {
        acc += &pmfs[k];
        if k < count {
            tails[k] = acc.clone();
        }
    }
    if count > 0 {
        tails[0] = BigRational::one(); // P(L >= 0) exactly
    }
    tails
}

/// `Phi^T g^s - e_0` for the lossy channel, via (a) an exact-rational direct
/// matrix product and (b) the Laguerre closed form.
pub fn smoothed_bias_exact(d: usize, epsilon: f64, lambda: f64) -> Result<SmoothedBias> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::InvalidProbability(epsilon));
    }
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidInput(format!("lambda {lambda} must be >= 0")));
    }
    let eps_r = rational_from_f64(epsilon)?;
    let lam_r = rational_from_f64(lambda)?;
    let phi = model::build_phi_lossy_exact(d, &eps_r)?;
    let tails = poisson_tails_exact(&lam_r, d + 1);
    let ratio = -&eps_r / (BigRational::one() - &eps_r);
    let mut g = Vec::with_capacity(d + 1);
    let mut cur = BigRational::one();
    for tail in tails.iter().take(d + 1) {
        g.push(&cur * tail);
        cur *= &ratio;
    }
    let mut matrix_path: Vec<f64> = phi
        .transpose_apply_exact(&g)?
        .iter()
        .map(|x| x.to_f64().unwrap_or(f64::NAN))
        .collect();
    matrix_path[0] -= 1.0;

    let exp_neg = (-lambda).exp();
    let mut laguerre_path = vec![0.0; d + 1];
    for (j, entry) in laguerre_path.iter_mut().enumerate().skip(1) {
        *entry = epsilon.powi(j as i32) * exp_neg * laguerre(j - 1, lambda);
    }
    Ok(SmoothedBias {
        matrix_path,
        laguerre_path,
    })
}

/// Estimate `P_x` for a prefix `x` by XOR-shifting the batch and applying
/// the all-zero-string estimator on the first `|x|` coordinates.
pub fn estimate_p_x(x: &str, batch: &SampleBatch, g: &EstimatorCoefficients) -> Result<f64> {
    let (code, len) = string_to_code(x)?;
    estimate_p_prefix(code, len, batch, g)
}

/// Mask-level variant of [`estimate_p_x`]: `code` is the prefix value on the
/// first `len` text positions.
pub fn estimate_p_prefix(
    code: u64,
    len: usize,
    batch: &SampleBatch,
    g: &EstimatorCoefficients,
) -> Result<f64> {
    let d = batch.d();
    if len == 0 || len > d {
        return Err(Error::DimensionMismatch(format!(
            "prefix length {len} outside 1..={d}"
        )));
    }
    if g.d != len {
        return Err(Error::DimensionMismatch(format!(
            "estimator built for d = {}, prefix has length {len}",
            g.d
        )));
    }
    if batch.n() == 0 {
        return Err(Error::EmptyBatch);
    }
    let shift = d - len;
    let mut counts = vec![0u64; len + 1];
    for r in batch.records() {
        let ones = r.ones >> shift;
        let known = r.known >> shift;
        let w = ((ones ^ code) & known).count_ones() as usize;
        counts[w] += 1;
    }
    apply_linear_estimator(
        g,
        &WeightCounts {
            d: len,
            counts,
            n: batch.n() as u64,
        },
    )
}

/// True iff `Phi^T g^u = e_0` holds exactly for the lossy channel at the
/// given rational erasure probability.
pub fn unbiased_is_exact(d: usize, epsilon: &BigRational) -> Result<bool> {
    let phi = model::build_phi_lossy_exact(d, epsilon)?;
    let g = unbiased_coefficients_exact(d, epsilon)?;
    let prod = phi.transpose_apply_exact(&g)?;
    Ok(prod
        .iter()
        .enumerate()
        .all(|(j, v)| if j == 0 { v.is_one() } else { v.is_zero() }))
}
