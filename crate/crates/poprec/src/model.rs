//! Channel models, weight-transition matrices and distribution containers.
//!
//! Both observation models act independently per bit, so a permutation
//! invariant input is summarized by its Hamming weight. The central object
//! is the `(d+1) x (d+1)` column-stochastic matrix `Phi` mapping the input
//! weight distribution to the output weight distribution. Column `j` holds
//! the output-weight law given input weight `j`:
//!
//! - lossy (erasure):  `Phi[i][j] = C(j,i) (1-eps)^i eps^(j-i)` for `i <= j`,
//! - noisy (bit flip): column `j` is `Bin(j, 1-eps) * Bin(d-j, eps)`
//!   (discrete convolution).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::{Error, Result};

/// Largest dimension accepted by the float matrix builders. Beyond this the
/// extreme entries underflow doubles and exact mode is mandatory.
pub const DEFAULT_MAX_DIMENSION: usize = 200;

/// Largest dimension for bit-string level containers, which pack strings
/// into `u64` masks.
pub const MAX_STRING_DIMENSION: usize = 64;

/// Kind of per-bit corruption.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    /// Binary erasure channel: a bit becomes `?` with probability `eps`.
    Lossy,
    /// Binary symmetric channel: a bit is flipped with probability `eps`.
    Noisy,
}

impl std::fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ChannelKind::Lossy => write!(f, "lossy"),
            ChannelKind::Noisy => write!(f, "noisy"),
        }
    }
}

/// A per-bit corruption model: kind plus the corruption probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub kind: ChannelKind,
    pub epsilon: f64,
}

impl ChannelModel {
    pub fn new(kind: ChannelKind, epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) || !epsilon.is_finite() {
            return Err(Error::InvalidProbability(epsilon));
        }
        Ok(ChannelModel { kind, epsilon })
    }

    pub fn lossy(epsilon: f64) -> Result<Self> {
        Self::new(ChannelKind::Lossy, epsilon)
    }

    pub fn noisy(epsilon: f64) -> Result<Self> {
        Self::new(ChannelKind::Noisy, epsilon)
    }

    /// `1 - eps`.
    pub fn epsilon_bar(&self) -> f64 {
        1.0 - self.epsilon
    }

    /// A noisy channel at `eps = 1/2` outputs pure noise; analysis
    /// operations that divide by `1 - 2 eps` must refuse it.
    pub fn is_degenerate_noisy(&self) -> bool {
        self.kind == ChannelKind::Noisy && self.epsilon == 0.5
    }

    pub fn build_phi(&self, d: usize) -> Result<TransitionMatrix> {
        match self.kind {
            ChannelKind::Lossy => build_phi_lossy(d, self.epsilon),
            ChannelKind::Noisy => build_phi_noisy(d, self.epsilon),
        }
    }

    pub fn build_phi_exact(&self, d: usize) -> Result<TransitionMatrix> {
        let eps = rational_from_f64(self.epsilon)?;
        match self.kind {
            ChannelKind::Lossy => build_phi_lossy_exact(d, &eps),
            ChannelKind::Noisy => build_phi_noisy_exact(d, &eps),
        }
    }
}

/// Arithmetic mode a transition matrix was built in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithMode {
    /// Entries computed in log space via `ln_gamma`, then exponentiated.
    FloatLog,
    /// Entries are exact big rationals (`eps` snapped to an exact rational).
    ExactRational,
}

/// Column-stochastic weight-transition matrix.
///
/// Row index `i` is the output weight, column index `j` the input weight.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    d: usize,
    channel: ChannelModel,
    mode: ArithMode,
    /// Row-major `(d+1) x (d+1)`; present in both modes (rounded in exact mode).
    entries: Vec<f64>,
    /// Exact entries, row-major; present only in `ExactRational` mode.
    exact: Option<Vec<BigRational>>,
}

impl TransitionMatrix {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn size(&self) -> usize {
        self.d + 1
    }

    pub fn channel(&self) -> ChannelModel {
        self.channel
    }

    pub fn mode(&self) -> ArithMode {
        self.mode
    }

    /// Entry `Phi[i][j]` (output weight `i`, input weight `j`).
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * (self.d + 1) + j]
    }

    pub fn exact_entry(&self, i: usize, j: usize) -> Option<&BigRational> {
        self.exact.as_ref().map(|e| &e[i * (self.d + 1) + j])
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..=self.d).map(|i| self.entry(i, j)).collect()
    }

    /// `Phi v` for an arbitrary signed vector of length `d+1`.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.d + 1 {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{} but vector has length {}",
                self.d + 1,
                self.d + 1,
                v.len()
            )));
        }
        let k = self.d + 1;
        let mut out = vec![0.0; k];
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.entries[i * k..(i + 1) * k];
            *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        Ok(out)
    }

    /// `Phi^T g` for an arbitrary vector of length `d+1`.
    pub fn transpose_apply(&self, g: &[f64]) -> Result<Vec<f64>> {
        if g.len() != self.d + 1 {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{} but vector has length {}",
                self.d + 1,
                self.d + 1,
                g.len()
            )));
        }
        let k = self.d + 1;
        let mut out = vec![0.0; k];
        for (j, o) in out.iter_mut().enumerate() {
            *o = (0..k).map(|i| self.entry(i, j) * g[i]).sum();
        }
        Ok(out)
    }

    /// Exact `Phi^T g` in rational arithmetic. Errors unless built exact.
    pub fn transpose_apply_exact(&self, g: &[BigRational]) -> Result<Vec<BigRational>> {
        let exact = self.exact.as_ref().ok_or_else(|| {
            Error::InvalidInput("transition matrix was not built in exact mode".into())
        })?;
        if g.len() != self.d + 1 {
            return Err(Error::DimensionMismatch("exact transpose apply".into()));
        }
        let k = self.d + 1;
        let mut out = vec![BigRational::zero(); k];
        for (j, o) in out.iter_mut().enumerate() {
            for i in 0..k {
                *o += &exact[i * k + j] * &g[i];
            }
        }
        Ok(out)
    }

    /// CSV rendering, one row per line.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for i in 0..=self.d {
            for j in 0..=self.d {
                if j > 0 {
                    s.push(',');
                }
                let _ = write!(s, "{}", self.entry(i, j));
            }
            s.push('\n');
        }
        s
    }
}

fn check_dimension(d: usize) -> Result<()> {
    if d > DEFAULT_MAX_DIMENSION {
        return Err(Error::DimensionTooLarge {
            got: d,
            max: DEFAULT_MAX_DIMENSION,
        });
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&epsilon) || !epsilon.is_finite() {
        return Err(Error::InvalidProbability(epsilon));
    }
    Ok(())
}

/// Binomial pmf `P(Bin(n,p) = k)` in log space. Coefficients small enough
/// to be exact integers in `f64` are snapped, so dyadic `p` gives exact
/// entries on small matrices.
pub(crate) fn binom_pmf(n: usize, k: usize, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    if p == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    let ln_c = ln_gamma((n + 1) as f64) - ln_gamma((k + 1) as f64) - ln_gamma((n - k + 1) as f64);
    if ln_c < 30.0 {
        // C(n,k) <= ~1e13: exp error is far below 1/2, snap to the integer.
        let c = ln_c.exp().round();
        c * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
    } else {
        (ln_c + (k as f64) * p.ln() + ((n - k) as f64) * (1.0 - p).ln()).exp()
    }
}

/// Binomial pmf vector `[P(Bin(n,p) = 0), ..., P(Bin(n,p) = n)]`.
pub(crate) fn binom_pmf_vec(n: usize, p: f64) -> Vec<f64> {
    (0..=n).map(|k| binom_pmf(n, k, p)).collect()
}

fn big_binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut r = BigInt::one();
    for i in 0..k.min(n - k) {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// Exact binomial pmf vector with rational `p`.
fn binom_pmf_vec_exact(n: usize, p: &BigRational) -> Vec<BigRational> {
    let q = BigRational::one() - p;
    let mut pow_p = vec![BigRational::one(); n + 1];
    let mut pow_q = vec![BigRational::one(); n + 1];
    for i in 1..=n {
        pow_p[i] = &pow_p[i - 1] * p;
        pow_q[i] = &pow_q[i - 1] * &q;
    }
    (0..=n)
        .map(|k| BigRational::from(big_binomial(n, k)) * &pow_p[k] * &pow_q[n - k])
        .collect()
}

/// Snap an `f64` to the exact rational it represents.
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or(Error::InvalidProbability(x))
}

/// Parse a decimal string such as `0.75` to an exact rational (3/4),
/// avoiding the binary rounding a detour through `f64` would introduce.
pub fn rational_from_decimal_str(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, s),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((a, b)) => (a, b),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::InvalidInput(format!("not a decimal number: {s:?}")));
    }
    let digits: String = format!("{int_part}{frac_part}");
    if digits.chars().any(|c| !c.is_ascii_digit()) {
        return Err(Error::InvalidInput(format!("not a decimal number: {s:?}")));
    }
    let num = BigInt::from_str(&digits)
        .map_err(|e| Error::InvalidInput(format!("bad decimal {s:?}: {e}")))?;
    let den = BigInt::from(10u32).pow(frac_part.len() as u32);
    Ok(BigRational::new(num * sign, den))
}

/// Erasure-channel transition matrix: `Phi[i][j] = C(j,i) ebar^i eps^(j-i)`
/// for `i <= j`, zero above the diagonal is impossible (erasures only lose
/// ones), so the matrix is upper triangular with `Phi[j][j] = ebar^j`.
pub fn build_phi_lossy(d: usize, epsilon: f64) -> Result<TransitionMatrix> {
    check_dimension(d)?;
    check_epsilon(epsilon)?;
    let k = d + 1;
    let mut entries = vec![0.0; k * k];
    for j in 0..=d {
        // Column j is Bin(j, 1-eps).
        for (i, p) in binom_pmf_vec(j, 1.0 - epsilon).into_iter().enumerate() {
            entries[i * k + j] = p;
        }
    }
    Ok(TransitionMatrix {
        d,
        channel: ChannelModel::lossy(epsilon)?,
        mode: ArithMode::FloatLog,
        entries,
        exact: None,
    })
}

/// Bit-flip-channel transition matrix: column `j` is the pmf of
/// `Bin(j, 1-eps) * Bin(d-j, eps)` computed by exact discrete convolution.
pub fn build_phi_noisy(d: usize, epsilon: f64) -> Result<TransitionMatrix> {
    check_dimension(d)?;
    check_epsilon(epsilon)?;
    let k = d + 1;
    let mut entries = vec![0.0; k * k];
    for j in 0..=d {
        let kept = binom_pmf_vec(j, 1.0 - epsilon);
        let flipped = binom_pmf_vec(d - j, epsilon);
        for (a, pa) in kept.iter().enumerate() {
            for (b, pb) in flipped.iter().enumerate() {
                entries[(a + b) * k + j] += pa * pb;
            }
        }
    }
    Ok(TransitionMatrix {
        d,
        channel: ChannelModel::noisy(epsilon)?,
        mode: ArithMode::FloatLog,
        entries,
        exact: None,
    })
}

fn exact_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(0.0)
}

/// Exact-rational variant of [`build_phi_lossy`].
pub fn build_phi_lossy_exact(d: usize, epsilon: &BigRational) -> Result<TransitionMatrix> {
    check_dimension(d)?;
    let eps_f = exact_to_f64(epsilon);
    if epsilon.is_negative() || epsilon > &BigRational::one() {
        return Err(Error::InvalidProbability(eps_f));
    }
    let k = d + 1;
    let ebar = BigRational::one() - epsilon;
    let mut exact = vec![BigRational::zero(); k * k];
    for j in 0..=d {
        for (i, p) in binom_pmf_vec_exact(j, &ebar).into_iter().enumerate() {
            exact[i * k + j] = p;
        }
    }
    let entries = exact.iter().map(exact_to_f64).collect();
    Ok(TransitionMatrix {
        d,
        channel: ChannelModel::lossy(eps_f)?,
        mode: ArithMode::ExactRational,
        entries,
        exact: Some(exact),
    })
}

/// Exact-rational variant of [`build_phi_noisy`].
pub fn build_phi_noisy_exact(d: usize, epsilon: &BigRational) -> Result<TransitionMatrix> {
    check_dimension(d)?;
    let eps_f = exact_to_f64(epsilon);
    if epsilon.is_negative() || epsilon > &BigRational::one() {
        return Err(Error::InvalidProbability(eps_f));
    }
    let k = d + 1;
    let ebar = BigRational::one() - epsilon;
    let mut exact = vec![BigRational::zero(); k * k];
    for j in 0..=d {
        let kept = binom_pmf_vec_exact(j, &ebar);
        let flipped = binom_pmf_vec_exact(d - j, epsilon);
        for (a, pa) in kept.iter().enumerate() {
            for (b, pb) in flipped.iter().enumerate() {
                exact[(a + b) * k + j] += pa * pb;
            }
        }
    }
    let entries = exact.iter().map(exact_to_f64).collect();
    Ok(TransitionMatrix {
        d,
        channel: ChannelModel::noisy(eps_f)?,
        mode: ArithMode::ExactRational,
        entries,
        exact: Some(exact),
    })
}

/// Probability vector over Hamming weights `0..=d`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightDistribution {
    d: usize,
    probs: Vec<f64>,
}

impl WeightDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidInput("empty weight distribution".into()));
        }
        if let Some(&p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidProbability(p));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "weight distribution mass {total} is not 1 within 1e-12"
            )));
        }
        Ok(WeightDistribution {
            d: probs.len() - 1,
            probs,
        })
    }

    /// Point mass at weight `w`.
    pub fn point_mass(d: usize, w: usize) -> Result<Self> {
        if w > d {
            return Err(Error::DimensionMismatch(format!("weight {w} > d = {d}")));
        }
        let mut probs = vec![0.0; d + 1];
        probs[w] = 1.0;
        Self::new(probs)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, w: usize) -> f64 {
        self.probs[w]
    }
}

/// Signed vector indexed by weight; the variable `Delta` of the dual LPs.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedWeightVector {
    d: usize,
    values: Vec<f64>,
}

impl SignedWeightVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("empty signed weight vector".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "signed weight vector has non-finite entries".into(),
            ));
        }
        Ok(SignedWeightVector {
            d: values.len() - 1,
            values,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }
}

/// Sparse distribution over length-`d` bit strings.
///
/// Strings are stored as the low `d` bits of a `u64`, most significant bit
/// first: text position `p` (from the left) is bit `d-1-p`, so the integer
/// value equals the string read as binary.
#[derive(Debug, Clone, PartialEq)]
pub struct HypercubeDistribution {
    d: usize,
    support: BTreeMap<u64, f64>,
}

/// Render a string code back to `0`/`1` text, MSB first.
pub fn code_to_string(code: u64, d: usize) -> String {
    (0..d)
        .map(|p| {
            if code >> (d - 1 - p) & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

/// Parse `0`/`1` text (MSB first) into a string code.
pub fn string_to_code(s: &str) -> Result<(u64, usize)> {
    let d = s.len();
    if d == 0 || d > MAX_STRING_DIMENSION {
        return Err(Error::InvalidInput(format!(
            "bit string length {d} outside 1..={MAX_STRING_DIMENSION}"
        )));
    }
    let mut code = 0u64;
    for c in s.chars() {
        code <<= 1;
        match c {
            '0' => {}
            '1' => code |= 1,
            other => {
                return Err(Error::InvalidInput(format!(
                    "invalid character {other:?} in bit string {s:?}"
                )))
            }
        }
    }
    Ok((code, d))
}

impl HypercubeDistribution {
    /// Validating constructor: probabilities non-negative, total mass within
    /// `1e-9` of 1.
    pub fn new(d: usize, support: BTreeMap<u64, f64>) -> Result<Self> {
        let dist = Self::from_estimates(d, support)?;
        let total = dist.total_mass();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "hypercube distribution mass {total} is not 1 within 1e-9"
            )));
        }
        Ok(dist)
    }

    /// Non-validating-mass constructor for estimator outputs, which carry
    /// statistical error and need not sum to one. Entries must still be
    /// finite and non-negative.
    pub fn from_estimates(d: usize, support: BTreeMap<u64, f64>) -> Result<Self> {
        if d == 0 || d > MAX_STRING_DIMENSION {
            return Err(Error::InvalidInput(format!(
                "hypercube dimension {d} outside 1..={MAX_STRING_DIMENSION}"
            )));
        }
        let limit = if d == 64 { u64::MAX } else { (1u64 << d) - 1 };
        for (&code, &p) in &support {
            if code > limit {
                return Err(Error::InvalidInput(format!(
                    "string code {code} does not fit in {d} bits"
                )));
            }
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidProbability(p));
            }
        }
        Ok(HypercubeDistribution { d, support })
    }

    pub fn from_pairs(pairs: &[(&str, f64)]) -> Result<Self> {
        let mut d = None;
        let mut support = BTreeMap::new();
        for (s, p) in pairs {
            let (code, len) = string_to_code(s)?;
            match d {
                None => d = Some(len),
                Some(dd) if dd == len => {}
                Some(dd) => {
                    return Err(Error::DimensionMismatch(format!(
                        "string {s:?} has length {len}, expected {dd}"
                    )))
                }
            }
            *support.entry(code).or_insert(0.0) += p;
        }
        Self::new(d.ok_or(Error::EmptyBatch)?, support)
    }

    /// Uniform distribution on the given string codes.
    pub fn uniform_on(d: usize, codes: &[u64]) -> Result<Self> {
        if codes.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let p = 1.0 / codes.len() as f64;
        let mut support = BTreeMap::new();
        for &c in codes {
            *support.entry(c).or_insert(0.0) += p;
        }
        Self::new(d, support)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn support(&self) -> &BTreeMap<u64, f64> {
        &self.support
    }

    pub fn prob_code(&self, code: u64) -> f64 {
        self.support.get(&code).copied().unwrap_or(0.0)
    }

    pub fn prob(&self, s: &str) -> Result<f64> {
        let (code, len) = string_to_code(s)?;
        if len != self.d {
            return Err(Error::DimensionMismatch(format!(
                "string length {len} != dimension {}",
                self.d
            )));
        }
        Ok(self.prob_code(code))
    }

    pub fn total_mass(&self) -> f64 {
        self.support.values().sum()
    }

    /// Serialize in the record-per-line text format:
    /// `<bitstring> <probability>`, `#` lines are comments.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (&code, &p) in &self.support {
            let _ = writeln!(s, "{} {}", code_to_string(code, self.d), p);
        }
        s
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    /// Parse the text format. Lines starting with `#` are ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut d = None;
        let mut support: BTreeMap<u64, f64> = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split(' ');
            let (bits, prob) = match (parts.next(), parts.next(), parts.next()) {
                (Some(b), Some(p), None) => (b, p),
                _ => {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("expected `<bitstring> <probability>`, got {line:?}"),
                    })
                }
            };
            let (code, len) = string_to_code(bits).map_err(|e| Error::Parse {
                line: lineno,
                msg: e.to_string(),
            })?;
            match d {
                None => d = Some(len),
                Some(dd) if dd == len => {}
                Some(dd) => {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("string length {len} differs from earlier length {dd}"),
                    })
                }
            }
            let p: f64 = prob.parse().map_err(|e| Error::Parse {
                line: lineno,
                msg: format!("bad probability {prob:?}: {e}"),
            })?;
            *support.entry(code).or_insert(0.0) += p;
        }
        let d = d.ok_or(Error::EmptyBatch)?;
        Self::new(d, support)
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

/// Marginalize a hypercube distribution onto Hamming weight.
pub fn weight_distribution_of(p: &HypercubeDistribution) -> WeightDistribution {
    let mut probs = vec![0.0; p.d() + 1];
    for (&code, &mass) in p.support() {
        probs[code.count_ones() as usize] += mass;
    }
    // Mass was validated at construction; tolerate estimator outputs too.
    let total: f64 = probs.iter().sum();
    WeightDistribution {
        d: p.d(),
        probs: if total > 0.0 {
            probs
        } else {
            vec![0.0; p.d() + 1]
        },
    }
}

/// `Phi pi`: the output weight distribution of input weight law `pi`.
pub fn push_forward(phi: &TransitionMatrix, pi: &WeightDistribution) -> Result<WeightDistribution> {
    if phi.d() != pi.d() {
        return Err(Error::DimensionMismatch(format!(
            "phi has d = {} but pi has d = {}",
            phi.d(),
            pi.d()
        )));
    }
    let out = phi.apply(pi.probs())?;
    WeightDistribution::new(out)
}
