//! Probability and code types shared by every other module, plus the
//! information-theoretic primitives (entropy, relative entropy, Kraft sums).
//!
//! All logarithms are natural. Quantities reported "in D-ary symbols" are the
//! nat value divided by `ln D` at the very end.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|sum(probs) - 1|` accepted at ingestion.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Slack allowed on a Kraft sum before it counts as a violation.
pub const KRAFT_TOL: f64 = 1e-12;

/// Code alphabet size `D >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Arity(u32);

impl Arity {
    pub const BINARY: Arity = Arity(2);
    pub const TERNARY: Arity = Arity(3);

    pub fn new(d: u32) -> Result<Self> {
        if d < 2 {
            return Err(Error::ArityTooSmall(d));
        }
        Ok(Arity(d))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn as_f64(self) -> f64 {
        f64::from(self.0)
    }

    /// `ln D`, the divisor that turns nats into D-ary symbols.
    #[inline]
    pub fn ln(self) -> f64 {
        self.as_f64().ln()
    }

    /// `D^(-len)`; exact for integer lengths in the normal range.
    #[inline]
    pub fn weight_of_length(self, len: f64) -> f64 {
        if len.fract() == 0.0 && len.abs() < f64::from(i32::MAX) {
            self.as_f64().powi(-(len as i32))
        } else {
            (-len * self.ln()).exp()
        }
    }
}

impl TryFrom<u32> for Arity {
    type Error = Error;
    fn try_from(d: u32) -> Result<Self> {
        Arity::new(d)
    }
}

impl From<Arity> for u32 {
    fn from(a: Arity) -> u32 {
        a.0
    }
}

impl fmt::Display for Arity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A probability mass function over `M >= 2` symbols.
///
/// Construction normalizes the input exactly once; afterwards the vector is
/// treated as exact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution {
    probs: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl Distribution {
    /// Strict constructor: every entry must be positive.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        validate_distribution(&probs, false)
    }

    /// Like [`Distribution::new`] but zero entries are kept.
    pub fn with_zeros(probs: Vec<f64>) -> Result<Self> {
        validate_distribution(&probs, true)
    }

    pub fn uniform(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::TooFewSymbols(m));
        }
        Ok(Distribution {
            probs: vec![1.0 / m as f64; m],
            labels: None,
        })
    }

    /// Normalizes an internally computed non-negative weight vector.
    ///
    /// Used for derived distributions (tilted points, NML) whose sum is only
    /// one up to rounding; skips the ingestion tolerance check.
    pub(crate) fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::TooFewSymbols(weights.len()));
        }
        for (index, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::NonFiniteProbability { index });
            }
            if w < 0.0 {
                return Err(Error::NegativeProbability { index, value: w });
            }
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Distribution {
            probs: weights.into_iter().map(|w| w / sum).collect(),
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.probs.len() {
            return Err(Error::LabelMismatch {
                labels: labels.len(),
                probs: self.probs.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    #[inline]
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn min_prob(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn has_zero(&self) -> bool {
        self.probs.contains(&0.0)
    }

    /// Total variation distance `(1/2) * sum |p_i - q_i|`.
    pub fn total_variation(&self, other: &Distribution) -> Result<f64> {
        check_same_len(self.len(), other.len())?;
        Ok(0.5
            * self
                .probs
                .iter()
                .zip(&other.probs)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>())
    }
}

impl AsRef<[f64]> for Distribution {
    fn as_ref(&self) -> &[f64] {
        &self.probs
    }
}

/// Checks a raw probability vector and normalizes it.
///
/// With `allow_zero == false` any zero entry is rejected, since a zero nominal
/// probability makes its ideal codeword length infinite.
pub fn validate_distribution(probs: &[f64], allow_zero: bool) -> Result<Distribution> {
    if probs.len() < 2 {
        return Err(Error::TooFewSymbols(probs.len()));
    }
    for (index, &p) in probs.iter().enumerate() {
        if !p.is_finite() {
            return Err(Error::NonFiniteProbability { index });
        }
        if p < 0.0 {
            return Err(Error::NegativeProbability { index, value: p });
        }
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized { sum });
    }
    if !allow_zero {
        if let Some(index) = probs.iter().position(|&p| p == 0.0) {
            return Err(Error::ZeroProbability { index });
        }
    }
    // input that already sums to one up to rounding is kept verbatim
    let scale = if (sum - 1.0).abs() <= 4.0 * f64::EPSILON { 1.0 } else { sum };
    Ok(Distribution {
        probs: probs.iter().map(|p| p / scale).collect(),
        labels: None,
    })
}

/// Ingestion mode for nominal distributions that contain zeros: the zero
/// symbols are dropped (with a warning) and the rest renormalized.
///
/// Returns the distribution together with the original indices it kept.
pub fn drop_zero_symbols(
    probs: &[f64],
    labels: Option<&[String]>,
) -> Result<(Distribution, Vec<usize>)> {
    // validate first so that negative / unnormalized input still errors
    validate_distribution(probs, true)?;
    if let Some(l) = labels {
        if l.len() != probs.len() {
            return Err(Error::LabelMismatch {
                labels: l.len(),
                probs: probs.len(),
            });
        }
    }
    let kept: Vec<usize> = (0..probs.len()).filter(|&i| probs[i] > 0.0).collect();
    if kept.len() < probs.len() {
        log::warn!(
            "dropping {} zero-probability symbol(s) from the nominal distribution",
            probs.len() - kept.len()
        );
    }
    let dist = validate_distribution(&kept.iter().map(|&i| probs[i]).collect::<Vec<_>>(), false)?;
    let dist = match labels {
        Some(l) => dist.with_labels(kept.iter().map(|&i| l[i].clone()).collect())?,
        None => dist,
    };
    Ok((dist, kept))
}

/// The uncertainty set `{nu : D(nu || center) <= radius}` (radius in nats).
///
/// The center must be strictly positive; a zero nominal probability has no
/// finite ideal codeword length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceBall {
    center: Distribution,
    radius: f64,
}

impl DivergenceBall {
    pub fn new(center: Distribution, radius: f64) -> Result<Self> {
        if !radius.is_finite() || radius < 0.0 {
            return Err(Error::DomainError(format!(
                "radius must be finite and non-negative, got {radius}"
            )));
        }
        if let Some(index) = center.probs().iter().position(|&p| p == 0.0) {
            return Err(Error::ZeroProbability { index });
        }
        Ok(DivergenceBall { center, radius })
    }

    #[inline]
    pub fn center(&self) -> &Distribution {
        &self.center
    }

    #[inline]
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Whether `nu` lies in the ball, allowing `slack` nats.
    pub fn contains(&self, nu: &Distribution, slack: f64) -> bool {
        kl_divergence(nu, &self.center).is_ok_and(|d| d <= self.radius + slack)
    }
}

/// A vector of codeword lengths for a D-ary code.
///
/// Integer lengths describe real codes; real-valued lengths describe ideal
/// (self-information) codes. Either way the Kraft inequality holds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodeLengths {
    lengths: Vec<f64>,
    arity: Arity,
    integer: bool,
}

impl CodeLengths {
    pub fn integer(lengths: Vec<u32>, arity: Arity) -> Result<Self> {
        if let Some(index) = lengths.iter().position(|&l| l == 0) {
            return Err(Error::InvalidLength { index, value: 0.0 });
        }
        let code = CodeLengths {
            lengths: lengths.into_iter().map(f64::from).collect(),
            arity,
            integer: true,
        };
        code.check_kraft()?;
        Ok(code)
    }

    pub fn ideal(lengths: Vec<f64>, arity: Arity) -> Result<Self> {
        for (index, &l) in lengths.iter().enumerate() {
            if !l.is_finite() || l <= 0.0 {
                return Err(Error::InvalidLength { index, value: l });
            }
        }
        let code = CodeLengths {
            lengths,
            arity,
            integer: false,
        };
        code.check_kraft()?;
        Ok(code)
    }

    /// Ideal lengths `-log_D p_i` of a strictly positive distribution.
    pub fn ideal_for(dist: &Distribution, arity: Arity) -> Result<Self> {
        if let Some(index) = dist.probs().iter().position(|&p| p == 0.0) {
            return Err(Error::ZeroProbability { index });
        }
        let ln_d = arity.ln();
        CodeLengths::ideal(dist.probs().iter().map(|p| -p.ln() / ln_d).collect(), arity)
    }

    fn check_kraft(&self) -> Result<()> {
        let k = kraft_sum(self);
        if k > 1.0 + KRAFT_TOL {
            return Err(Error::KraftViolation(k));
        }
        Ok(())
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.lengths
    }

    /// Integer view; `None` for ideal (real-valued) lengths.
    pub fn as_integers(&self) -> Option<Vec<u32>> {
        self.integer
            .then(|| self.lengths.iter().map(|&l| l as u32).collect())
    }

    #[inline]
    pub fn arity(&self) -> Arity {
        self.arity
    }

    #[inline]
    pub fn is_integer(&self) -> bool {
        self.integer
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    /// `theta_i = D^(-l_i)`.
    pub fn thetas(&self) -> Vec<f64> {
        self.lengths
            .iter()
            .map(|&l| self.arity.weight_of_length(l))
            .collect()
    }

    /// Sorted length multiset (integer codes only).
    pub fn multiset(&self) -> Option<Vec<u32>> {
        self.as_integers().map(|mut v| {
            v.sort_unstable();
            v
        })
    }

    /// Expected length under `dist`.
    pub fn expected_length(&self, dist: &Distribution) -> Result<f64> {
        check_same_len(self.len(), dist.len())?;
        Ok(self.lengths.iter().zip(dist.probs()).map(|(l, p)| l * p).sum())
    }
}

/// Codewords over the digit alphabet `{0, ..., D-1}` together with their lengths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrefixCode {
    codewords: Vec<String>,
    lengths: CodeLengths,
}

impl PrefixCode {
    /// Validates that every codeword has its stated length and that the set
    /// is prefix-free.
    pub fn new(codewords: Vec<String>, lengths: CodeLengths) -> Result<Self> {
        check_same_len(codewords.len(), lengths.len())?;
        for (i, (w, &l)) in codewords.iter().zip(lengths.values()).enumerate() {
            if w.chars().count() as f64 != l {
                return Err(Error::InvalidLength { index: i, value: l });
            }
        }
        if let Some((a, b)) = find_prefix_pair(&codewords) {
            return Err(Error::DomainError(format!(
                "codeword {a} is a prefix of codeword {b}"
            )));
        }
        Ok(PrefixCode { codewords, lengths })
    }

    pub fn codewords(&self) -> &[String] {
        &self.codewords
    }

    pub fn lengths(&self) -> &CodeLengths {
        &self.lengths
    }
}

/// Returns the first pair `(i, j)` where codeword `i` is a prefix of codeword `j`.
pub fn find_prefix_pair(codewords: &[String]) -> Option<(usize, usize)> {
    let mut order: Vec<usize> = (0..codewords.len()).collect();
    order.sort_by(|&a, &b| codewords[a].cmp(&codewords[b]));
    // after lexicographic sort a prefix sits immediately before some extension
    order
        .windows(2)
        .find(|w| codewords[w[1]].starts_with(codewords[w[0]].as_str()))
        .map(|w| (w[0], w[1]))
}

pub(crate) fn check_same_len(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::DimensionMismatch { left, right });
    }
    Ok(())
}

/// `H_D(nu) = -sum nu_i log_D nu_i`, with `0 log 0 = 0`.
pub fn entropy(nu: &Distribution, arity: Arity) -> f64 {
    entropy_nats(nu.probs()) / arity.ln()
}

pub(crate) fn entropy_nats(p: &[f64]) -> f64 {
    -p.iter()
        .map(|&x| if x > 0.0 { x * x.ln() } else { 0.0 })
        .sum::<f64>()
}

/// Relative entropy `D(nu || mu)` in nats.
pub fn kl_divergence(nu: &Distribution, mu: &Distribution) -> Result<f64> {
    kl_slices(nu.probs(), mu.probs())
}

pub(crate) fn kl_slices(nu: &[f64], mu: &[f64]) -> Result<f64> {
    check_same_len(nu.len(), mu.len())?;
    let mut acc = 0.0;
    for (index, (&p, &q)) in nu.iter().zip(mu).enumerate() {
        if p == 0.0 {
            continue;
        }
        if q == 0.0 {
            return Err(Error::AbsoluteContinuityViolation { index });
        }
        acc += p * (p / q).ln();
    }
    // rounding can push an exact zero slightly negative
    Ok(acc.max(0.0))
}

/// Binary relative entropy `d(p || m)` in nats.
pub fn binary_divergence(p: f64, m: f64) -> Result<f64> {
    if !(m > 0.0 && m < 1.0) {
        return Err(Error::DomainError(format!("m = {m} is not in (0, 1)")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::DomainError(format!("p = {p} is not in [0, 1]")));
    }
    Ok(binary_divergence_unchecked(p, m))
}

#[inline]
pub(crate) fn binary_divergence_unchecked(p: f64, m: f64) -> f64 {
    // written in terms of p - m so that nearby arguments keep their precision
    let delta = p - m;
    let head = if p > 0.0 { p * (delta / m).ln_1p() } else { 0.0 };
    let tail = if p < 1.0 {
        (1.0 - p) * (-delta / (1.0 - m)).ln_1p()
    } else {
        0.0
    };
    head + tail
}

/// `sum D^(-l_i)`.
pub fn kraft_sum(lengths: &CodeLengths) -> f64 {
    lengths
        .values()
        .iter()
        .map(|&l| lengths.arity().weight_of_length(l))
        .sum()
}

/// Upper end of the interval holding the larger root of `d(p || m) = R`,
/// from Pinsker's inequality: `min(1, m + sqrt(R / 2))`.
pub fn pinsker_upper(m: f64, radius: f64) -> f64 {
    (m + (radius / 2.0).sqrt()).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn dist(p: &[f64]) -> Distribution {
        Distribution::with_zeros(p.to_vec()).unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(validate_distribution(&[0.5, 0.5], false).is_ok());
        assert!(matches!(
            validate_distribution(&[0.5, 0.4], false),
            Err(Error::NotNormalized { .. })
        ));
        assert_eq!(
            validate_distribution(&[0.6, 0.3, 0.1, 0.0], false),
            Err(Error::ZeroProbability { index: 3 })
        );
        assert!(validate_distribution(&[0.6, 0.3, 0.1, 0.0], true).is_ok());
        assert_eq!(
            validate_distribution(&[1.0], false),
            Err(Error::TooFewSymbols(1))
        );
        assert!(matches!(
            validate_distribution(&[1.2, -0.2], false),
            Err(Error::NegativeProbability { index: 1, .. })
        ));
    }

    #[test]
    fn normalization_is_applied_once() {
        let d = validate_distribution(&[0.5 + 4e-10, 0.5], false).unwrap();
        assert_abs_diff_eq!(d.probs().iter().sum::<f64>(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn drop_zero_keeps_labels_aligned() {
        let labels: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let (d, kept) = drop_zero_symbols(&[0.7, 0.0, 0.3], Some(&labels)).unwrap();
        assert_eq!(kept, vec![0, 2]);
        assert_eq!(d.labels().unwrap(), &["a".to_string(), "c".to_string()]);
        assert!(drop_zero_symbols(&[1.0, 0.0], None).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert_abs_diff_eq!(entropy(&dist(&[0.5, 0.5]), Arity::BINARY), 1.0, epsilon = 1e-15);
        assert_eq!(entropy(&dist(&[1.0, 0.0]), Arity::BINARY), 0.0);
        // mpmath at 40 digits
        assert_abs_diff_eq!(
            entropy(&dist(&[0.4, 0.3, 0.2, 0.1]), Arity::BINARY),
            1.846_439_344_671_015_5,
            epsilon = 1e-13
        );
    }

    #[test]
    fn kl_examples() {
        let mu = dist(&[0.6, 0.3, 0.1]);
        assert_eq!(kl_divergence(&mu, &mu).unwrap(), 0.0);
        assert_abs_diff_eq!(
            kl_divergence(&dist(&[1.0, 0.0]), &dist(&[0.5, 0.5])).unwrap(),
            std::f64::consts::LN_2,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            kl_divergence(&dist(&[2.0 / 3.0, 1.0 / 3.0, 0.0]), &mu).unwrap(),
            -(0.9f64.ln()),
            epsilon = 1e-14
        );
        assert_eq!(
            kl_divergence(&dist(&[0.5, 0.5]), &dist(&[1.0, 0.0])),
            Err(Error::AbsoluteContinuityViolation { index: 1 })
        );
        assert!(matches!(
            kl_divergence(&dist(&[0.5, 0.5]), &mu),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn binary_divergence_examples() {
        assert_eq!(binary_divergence(0.3, 0.3).unwrap(), 0.0);
        assert_abs_diff_eq!(
            binary_divergence(1.0, 0.5).unwrap(),
            std::f64::consts::LN_2,
            epsilon = 1e-15
        );
        // mpmath: d(0.658 || 0.5) = 0.0507940184652779...
        assert_abs_diff_eq!(
            binary_divergence(0.658, 0.5).unwrap(),
            0.050_794_018_465_277_94,
            epsilon = 1e-14
        );
        assert!(binary_divergence(0.5, 0.0).is_err());
        assert!(binary_divergence(0.5, 1.0).is_err());
    }

    #[test]
    fn kraft_examples() {
        let k = |l: &[u32], d: u32| kraft_sum(&CodeLengths::integer(l.to_vec(), Arity::new(d).unwrap()).unwrap());
        assert_eq!(k(&[1, 2, 2], 2), 1.0);
        assert_eq!(k(&[1, 2, 3], 2), 0.875);
        assert_abs_diff_eq!(k(&[1, 1, 1], 3), 1.0, epsilon = 1e-15);
        assert!(matches!(
            CodeLengths::integer(vec![1, 1, 2], Arity::BINARY),
            Err(Error::KraftViolation(_))
        ));
        assert!(CodeLengths::integer(vec![0, 1], Arity::BINARY).is_err());
    }

    #[test]
    fn pinsker_examples() {
        assert_eq!(pinsker_upper(0.5, 0.0), 0.5);
        assert_abs_diff_eq!(pinsker_upper(0.25, 0.02), 0.35, epsilon = 1e-15);
        assert_eq!(pinsker_upper(0.9, 2.0), 1.0);
    }

    #[test]
    fn prefix_code_validation() {
        let lens = CodeLengths::integer(vec![1, 2, 2], Arity::BINARY).unwrap();
        let ok = PrefixCode::new(vec!["0".into(), "10".into(), "11".into()], lens.clone());
        assert!(ok.is_ok());
        let bad = PrefixCode::new(vec!["1".into(), "10".into(), "11".into()], lens);
        assert!(bad.is_err());
    }

    #[test]
    fn arity_rejects_unary() {
        assert_eq!(Arity::new(1), Err(Error::ArityTooSmall(1)));
    }

    fn simplex(m: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.01f64..1.0, m).prop_map(|v| {
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect()
        })
    }

    proptest! {
        #[test]
        fn kl_nonnegative_and_zero_on_diagonal((nu, mu) in (2usize..7).prop_flat_map(|m| (simplex(m), simplex(m)))) {
            let nu = Distribution::new(nu).unwrap();
            let mu = Distribution::new(mu).unwrap();
            prop_assert!(kl_divergence(&nu, &mu).unwrap() >= 0.0);
            prop_assert!(kl_divergence(&mu, &mu).unwrap().abs() <= 1e-12);
        }

        #[test]
        fn entropy_within_bounds(p in (2usize..9).prop_flat_map(simplex), d in 2u32..5) {
            let a = Arity::new(d).unwrap();
            let m = p.len() as f64;
            let h = entropy(&Distribution::new(p).unwrap(), a);
            prop_assert!(h >= 0.0);
            prop_assert!(h <= m.ln() / a.ln() + 1e-12);
        }

        #[test]
        fn binary_divergence_increasing_right_of_m(m in 0.01f64..0.99) {
            let mut prev = 0.0;
            for i in 1..50 {
                let p = m + (1.0 - m) * i as f64 / 50.0;
                let v = binary_divergence(p, m).unwrap();
                prop_assert!(v > prev);
                prev = v;
            }
        }

        #[test]
        fn larger_root_is_inside_pinsker_range(m in 0.01f64..0.99, t in 0.001f64..0.999) {
            // pick p > m, read off R, then check the range
            let p = m + (1.0 - m) * t;
            let r = binary_divergence(p, m).unwrap();
            prop_assert!(p <= pinsker_upper(m, r) + 1e-15);
        }
    }
}
