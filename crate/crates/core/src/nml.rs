//! Normalized maximum-likelihood distribution over a divergence ball and the
//! robust codes for maximal pointwise redundancy.
//!
//! The coordinatewise supremum `pi_k = max { nu_k : D(nu || mu) <= R }` is
//! attained by putting `pi_k` on symbol `k` and spreading the rest in
//! proportion to `mu`, which reduces the problem to the larger root of the
//! binary divergence equation `d(p || mu_k) = R`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::huffman::{canonical_codewords, ceil_self_information, max_huffman, pointwise_cost};
use crate::primitives::{
    binary_divergence_unchecked, check_same_len, pinsker_upper, Arity, CodeLengths, Distribution,
    DivergenceBall,
};
use crate::solver::{Regime, RobustCodeResult, Utility};

pub const DEFAULT_TOL: f64 = 1e-12;
/// Safeguarded steps allowed before giving up; a healthy solve needs a handful.
pub const MAX_ROOT_STEPS: usize = 100;

const ENDPOINT_GAP: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RootMethod {
    #[default]
    Newton,
    Halley,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOptions {
    pub method: RootMethod,
    /// Residual target `|d(p || m) - R|`.
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            method: RootMethod::Newton,
            tol: DEFAULT_TOL,
            max_steps: MAX_ROOT_STEPS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootSolve {
    pub root: f64,
    /// Newton (or Halley) and bisection steps taken.
    pub steps: usize,
    pub residual: f64,
}

/// Second-order approximation of the larger root, `m + sqrt(2 R m (1 - m))`.
pub fn closed_form_guess(m: f64, radius: f64) -> f64 {
    m + (2.0 * radius * m * (1.0 - m)).sqrt()
}

/// Larger root `p` of `d(p || m) = R`.
pub fn solve_pi_k(m: f64, radius: f64, tol: f64) -> Result<f64> {
    solve_pi_k_with(
        m,
        radius,
        RootOptions {
            tol,
            ..Default::default()
        },
    )
    .map(|s| s.root)
}

pub fn solve_pi_k_with(m: f64, radius: f64, opts: RootOptions) -> Result<RootSolve> {
    if !(m > 0.0 && m < 1.0) {
        return Err(Error::DomainError(format!("m = {m} is not in (0, 1)")));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::DomainError(format!("radius must be positive, got {radius}")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::DomainError(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if m >= (-radius).exp() {
        return Err(Error::SaturatedInput { m, radius });
    }

    let h = |p: f64| binary_divergence_unchecked(p, m) - radius;
    let mut lo = m;
    let mut hi = pinsker_upper(m, radius).min(1.0 - ENDPOINT_GAP);
    if h(hi) < 0.0 {
        // only when the root is squeezed against 1
        hi = 1.0;
    }
    let mut x = closed_form_guess(m, radius).clamp(m + ENDPOINT_GAP, hi);

    let mut steps = 0;
    let mut last_h = f64::INFINITY;
    let mut last_was_newton = false;
    loop {
        let hx = h(x);
        if hx == 0.0 {
            break;
        }
        if hx < 0.0 {
            lo = lo.max(x);
        } else {
            hi = hi.min(x);
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        if steps >= opts.max_steps {
            return Err(Error::NoConvergence(steps));
        }
        steps += 1;

        let d1 = ((x - m) / m).ln_1p() - ((m - x) / (1.0 - m)).ln_1p();
        let step = match opts.method {
            RootMethod::Newton => -hx / d1,
            RootMethod::Halley => {
                let d2 = 1.0 / x + 1.0 / (1.0 - x);
                -2.0 * hx * d1 / (2.0 * d1 * d1 - hx * d2)
            }
        };
        let next = x + step;
        if hx.abs() <= opts.tol && step.abs() <= 1e-13 * x {
            if next > lo && next < hi {
                x = next;
            }
            break;
        }
        // bisect when the step leaves the bracket or the last one made poor progress
        let poor = last_was_newton && hx.abs() > 0.5 * last_h;
        last_was_newton = next.is_finite() && next > lo && next < hi && !poor;
        last_h = hx.abs();
        x = if last_was_newton { next } else { 0.5 * (lo + hi) };
    }

    let residual = h(x).abs();
    if residual > opts.tol {
        return Err(Error::NoConvergence(steps));
    }
    Ok(RootSolve { root: x, steps, residual })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NmlResult {
    /// Coordinatewise suprema `pi_k`.
    pub raw: Vec<f64>,
    pub normalized: Distribution,
    pub saturated: Vec<usize>,
    /// `(k, |d(pi_k || mu_k) - R|)` for each non-saturated `k`.
    pub roots_residual: Vec<(usize, f64)>,
}

impl NmlResult {
    fn from_raw(raw: Vec<f64>, saturated: Vec<usize>, roots_residual: Vec<(usize, f64)>) -> Result<Self> {
        Ok(NmlResult {
            normalized: Distribution::from_weights(raw.clone())?,
            raw,
            saturated,
            roots_residual,
        })
    }

    /// Normalizing constant `sum_k pi_k`.
    pub fn total(&self) -> f64 {
        self.raw.iter().sum()
    }
}

/// NML distribution over `{nu : D(nu || mu) <= R}`.
pub fn nml_distribution(ball: &DivergenceBall, tol: f64) -> Result<NmlResult> {
    let mu = ball.center();
    let radius = ball.radius();
    if radius == 0.0 {
        return Ok(NmlResult {
            raw: mu.probs().to_vec(),
            normalized: mu.clone(),
            saturated: Vec::new(),
            roots_residual: Vec::new(),
        });
    }
    let threshold = (-radius).exp();
    let mut raw = Vec::with_capacity(mu.len());
    let mut saturated = Vec::new();
    let mut residuals = Vec::new();
    for (k, &m) in mu.probs().iter().enumerate() {
        if m >= threshold {
            raw.push(1.0);
            saturated.push(k);
        } else {
            let s = solve_pi_k_with(m, radius, RootOptions { tol, ..Default::default() })?;
            raw.push(s.root);
            residuals.push((k, s.residual));
        }
    }
    NmlResult::from_raw(raw, saturated, residuals)
}

/// NML distribution over the total-variation ball `{nu : ||nu - mu||_1 <= T}`.
pub fn nml_tv(mu: &Distribution, tv: f64) -> Result<NmlResult> {
    if !(tv >= 0.0 && tv.is_finite()) {
        return Err(Error::DomainError(format!("total-variation radius must be non-negative, got {tv}")));
    }
    let mut saturated = Vec::new();
    let raw: Vec<f64> = mu
        .probs()
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let p = m + tv / 2.0;
            if p >= 1.0 {
                saturated.push(k);
                1.0
            } else {
                p
            }
        })
        .collect();
    NmlResult::from_raw(raw, saturated, Vec::new())
}

/// The ball member maximizing coordinate `k`: `pi_k` at `k`, the remaining
/// mass in proportion to `mu` elsewhere.
pub fn nml_adversary(mu: &Distribution, k: usize, pi_k: f64) -> Result<Distribution> {
    if k >= mu.len() {
        return Err(Error::DimensionMismatch { left: k + 1, right: mu.len() });
    }
    if !(0.0..=1.0).contains(&pi_k) {
        return Err(Error::DomainError(format!("pi_k = {pi_k} is not in [0, 1]")));
    }
    let rest = 1.0 - mu.probs()[k];
    let rho = if rest > 0.0 { (1.0 - pi_k) / rest } else { 0.0 };
    let probs = mu
        .probs()
        .iter()
        .enumerate()
        .map(|(i, &m)| if i == k { pi_k } else { rho * m })
        .collect();
    Distribution::with_zeros(probs).or_else(|_| {
        let mut w: Vec<f64> = mu.probs().iter().map(|&m| rho * m).collect();
        w[k] = pi_k;
        Distribution::from_weights(w)
    })
}

/// `max_k (l_k + log_D pi_k)`.
pub fn pointwise_utility(lengths: &CodeLengths, pi: &Distribution) -> Result<f64> {
    check_same_len(lengths.len(), pi.len())?;
    Ok(pointwise_cost(pi.probs(), lengths))
}

/// Base of the logarithm in the robust Shannon lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShannonBase {
    /// The code arity `D`.
    #[default]
    Arity,
    /// The alphabet size `M`; rejected when the result breaks Kraft for `D`.
    AlphabetSize,
}

/// Robust Shannon lengths `ceil(-log_D pi_k)` on the normalized NML distribution.
pub fn robust_shannon_pointwise(ball: &DivergenceBall, arity: Arity) -> Result<CodeLengths> {
    robust_shannon_pointwise_in_base(ball, arity, ShannonBase::Arity)
}

pub fn robust_shannon_pointwise_in_base(
    ball: &DivergenceBall,
    arity: Arity,
    base: ShannonBase,
) -> Result<CodeLengths> {
    let nml = nml_distribution(ball, DEFAULT_TOL)?;
    match base {
        ShannonBase::Arity => ceil_self_information(nml.normalized.probs(), arity),
        ShannonBase::AlphabetSize => {
            let ln_m = (nml.normalized.len() as f64).ln();
            let lengths = nml
                .normalized
                .probs()
                .iter()
                .map(|p| ((-p.ln() / ln_m - 1e-12).ceil() as u32).max(1))
                .collect();
            CodeLengths::integer(lengths, arity)
        }
    }
}

/// Minimax pointwise-redundancy code over the ball: the max-combining Huffman
/// code on the NML weights.
pub fn robust_huffman_pointwise(ball: &DivergenceBall, arity: Arity) -> Result<RobustCodeResult> {
    let nml = nml_distribution(ball, DEFAULT_TOL)?;
    let lengths = max_huffman(nml.normalized.probs(), arity)?;
    let achieved_utility = pointwise_utility(&lengths, &nml.normalized)?;
    Ok(RobustCodeResult {
        utility: Utility::Pointwise,
        codewords: canonical_codewords(&lengths)?,
        lengths,
        beta: None,
        worst_case: nml.normalized,
        achieved_utility,
        regime: if ball.radius() == 0.0 {
            Regime::ZeroRadius
        } else {
            Regime::Interior
        },
        trace: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::huffman::shannon_lengths;
    use crate::oracle::brute_binary_root;
    use crate::primitives::{binary_divergence, kl_divergence};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn d(p: &[f64]) -> Distribution {
        Distribution::new(p.to_vec()).unwrap()
    }

    fn ball(p: &[f64], r: f64) -> DivergenceBall {
        DivergenceBall::new(d(p), r).unwrap()
    }

    #[test]
    fn root_examples() {
        assert_abs_diff_eq!(closed_form_guess(0.25, 0.02), 0.336602540378, epsilon = 1e-11);
        let s = solve_pi_k_with(0.25, 0.02, RootOptions::default()).unwrap();
        assert!((binary_divergence(s.root, 0.25).unwrap() - 0.02).abs() <= 1e-12);
        assert_abs_diff_eq!(s.root, 0.3395976885944522, epsilon = 1e-12);
        assert!(s.steps <= 25);

        let p = solve_pi_k(0.5, 1e-12, 1e-18).unwrap_or_else(|_| solve_pi_k(0.5, 1e-12, 1e-15).unwrap());
        assert!(p > 0.5 && p - 0.5 <= (0.5e-12f64).sqrt() + 1e-15);
    }

    #[test]
    fn halley_agrees_with_newton() {
        for &(m, r) in &[(0.25, 0.02), (0.01, 3.0), (0.9, 0.05), (0.4, 0.9)] {
            let a = solve_pi_k_with(m, r, RootOptions::default()).unwrap();
            let b = solve_pi_k_with(m, r, RootOptions { method: RootMethod::Halley, ..Default::default() }).unwrap();
            assert_abs_diff_eq!(a.root, b.root, epsilon = 1e-12);
            assert!(b.steps <= a.steps + 1);
        }
    }

    #[test]
    fn root_errors() {
        assert!(matches!(solve_pi_k(0.5, 2f64.ln(), 1e-12), Err(Error::SaturatedInput { .. })));
        assert!(matches!(solve_pi_k(0.0, 0.1, 1e-12), Err(Error::DomainError(_))));
        assert!(matches!(solve_pi_k(0.3, 0.0, 1e-12), Err(Error::DomainError(_))));
    }

    #[test]
    fn root_near_saturation() {
        let r: f64 = 0.7;
        let m = (-r).exp() * (1.0 - 1e-6);
        let s = solve_pi_k_with(m, r, RootOptions { tol: 1e-10, ..Default::default() }).unwrap();
        assert!(s.root > m && s.root <= 1.0);
        assert!(s.residual <= 1e-10);
    }

    #[test]
    fn nml_examples() {
        let n = nml_distribution(&ball(&[0.5, 0.5], 2f64.ln()), 1e-12).unwrap();
        assert_eq!(n.raw, vec![1.0, 1.0]);
        assert_eq!(n.saturated, vec![0, 1]);
        assert_eq!(n.normalized.probs(), &[0.5, 0.5]);

        let mu = [0.5, 0.3, 0.2];
        let n = nml_distribution(&ball(&mu, 0.05), 1e-12).unwrap();
        assert!(n.saturated.is_empty());
        for (k, &m) in mu.iter().enumerate() {
            assert_abs_diff_eq!(n.raw[k], brute_binary_root(m, 0.05).unwrap(), epsilon = 1e-12);
        }
        assert_abs_diff_eq!(n.raw[0], 0.65678159836, epsilon = 1e-10);
        assert_abs_diff_eq!(n.raw[1], 0.45027786743, epsilon = 1e-10);
        assert_abs_diff_eq!(n.raw[2], 0.33515835601, epsilon = 1e-10);

        let n = nml_distribution(&ball(&mu, 0.0), 1e-12).unwrap();
        assert_eq!(n.raw, mu.to_vec());
        assert_eq!(n.normalized.probs(), &mu);
    }

    #[test]
    fn tv_examples() {
        let n = nml_tv(&d(&[0.6, 0.4]), 0.0).unwrap();
        assert_eq!(n.raw, vec![0.6, 0.4]);
        let n = nml_tv(&d(&[0.6, 0.4]), 1.0).unwrap();
        assert_eq!(n.raw, vec![1.0, 0.9]);
        assert_abs_diff_eq!(n.normalized.probs()[0], 10.0 / 19.0, epsilon = 1e-15);
        assert_abs_diff_eq!(n.normalized.probs()[1], 9.0 / 19.0, epsilon = 1e-15);
        let n = nml_tv(&d(&[0.5, 0.3, 0.2]), 0.2).unwrap();
        for (a, b) in n.raw.iter().zip([0.6, 0.4, 0.3]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        assert!(n.roots_residual.is_empty());
        assert!(nml_tv(&d(&[0.6, 0.4]), -1.0).is_err());
    }

    #[test]
    fn shannon_examples() {
        let l = robust_shannon_pointwise(&ball(&[0.5, 0.25, 0.25], 0.0), Arity::BINARY).unwrap();
        assert_eq!(l.as_integers().unwrap(), vec![1, 2, 2]);
        let b = ball(&[0.5, 0.3, 0.2], 0.05);
        let l = robust_shannon_pointwise(&b, Arity::BINARY).unwrap();
        let pi = nml_distribution(&b, 1e-12).unwrap().normalized;
        let expect: Vec<u32> = pi.probs().iter().map(|p| (-p.log2()).ceil() as u32).collect();
        assert_eq!(l.as_integers().unwrap(), expect);
        let mu = d(&[0.45, 0.35, 0.2]);
        assert_eq!(
            robust_shannon_pointwise(&DivergenceBall::new(mu.clone(), 0.0).unwrap(), Arity::TERNARY).unwrap(),
            shannon_lengths(&mu, Arity::TERNARY).unwrap()
        );
    }

    #[test]
    fn alphabet_base_shannon() {
        let b = ball(&[0.5, 0.3, 0.2], 0.05);
        let l = robust_shannon_pointwise_in_base(&b, Arity::TERNARY, ShannonBase::AlphabetSize).unwrap();
        assert_eq!(l, robust_shannon_pointwise(&b, Arity::TERNARY).unwrap());
        // base 4 lengths are too short for a binary code
        let b = ball(&[0.25, 0.25, 0.25, 0.25], 0.0);
        assert!(matches!(
            robust_shannon_pointwise_in_base(&b, Arity::BINARY, ShannonBase::AlphabetSize),
            Err(Error::KraftViolation(_))
        ));
    }

    #[test]
    fn huffman_pointwise_examples() {
        let r = robust_huffman_pointwise(&ball(&[0.5, 0.25, 0.25], 0.0), Arity::BINARY).unwrap();
        assert_eq!(r.lengths.as_integers().unwrap(), vec![1, 2, 2]);
        assert_eq!(r.achieved_utility, 0.0);
        assert_eq!(r.regime, Regime::ZeroRadius);
        assert!(r.beta.is_none());

        let r = robust_huffman_pointwise(&ball(&[0.6, 0.3, 0.1], 0.0), Arity::BINARY).unwrap();
        assert_abs_diff_eq!(r.achieved_utility, 1.2f64.log2(), epsilon = 1e-12);
    }

    #[test]
    fn pointwise_utility_examples() {
        let l = CodeLengths::integer(vec![1, 2, 2], Arity::BINARY).unwrap();
        assert_eq!(pointwise_utility(&l, &d(&[0.5, 0.25, 0.25])).unwrap(), 0.0);
        assert_abs_diff_eq!(pointwise_utility(&l, &d(&[0.6, 0.3, 0.1])).unwrap(), 1.2f64.log2(), epsilon = 1e-12);
        let l = CodeLengths::integer(vec![2, 3, 3], Arity::BINARY).unwrap();
        assert_abs_diff_eq!(pointwise_utility(&l, &d(&[0.5, 0.25, 0.25])).unwrap(), 1.0, epsilon = 1e-15);
        assert!(pointwise_utility(&l, &d(&[0.5, 0.5])).is_err());
    }

    #[test]
    fn adversary_is_feasible_and_attains_pi() {
        let b = ball(&[0.5, 0.3, 0.15, 0.05], 0.2);
        let n = nml_distribution(&b, 1e-12).unwrap();
        for k in 0..4 {
            let nu = nml_adversary(b.center(), k, n.raw[k]).unwrap();
            assert!(kl_divergence(&nu, b.center()).unwrap() <= 0.2 + 1e-10);
            assert_abs_diff_eq!(nu.probs()[k], n.raw[k], epsilon = 1e-15);
        }
    }

    proptest! {
        #[test]
        fn root_certificates(m in 1e-4f64..0.999, r in 1e-6f64..4.0) {
            prop_assume!(m < (-r).exp() * (1.0 - 1e-9));
            let s = solve_pi_k_with(m, r, RootOptions { tol: 1e-11, ..Default::default() }).unwrap();
            prop_assert!(s.residual <= 1e-10);
            prop_assert!(s.root > m && s.root <= pinsker_upper(m, r));
            prop_assert!(s.steps <= 25);
        }

        #[test]
        fn saturation_boundary(r in 0.01f64..3.0) {
            let t = (-r).exp();
            for (m, sat) in [(t * (1.0 + 1e-6), true), (t * (1.0 - 1e-6), false)] {
                if m >= 1.0 { continue; }
                let mu = Distribution::new(vec![m, 1.0 - m]).unwrap();
                let n = nml_distribution(&DivergenceBall::new(mu, r).unwrap(), 1e-12).unwrap();
                prop_assert_eq!(n.raw[0] == 1.0, sat);
            }
        }

        #[test]
        fn raw_nondecreasing_in_radius(w in proptest::collection::vec(0.05f64..1.0, 2..6)) {
            let s: f64 = w.iter().sum();
            let mu = Distribution::new(w.iter().map(|x| x / s).collect()).unwrap();
            let mut prev = mu.probs().to_vec();
            for i in 1..=15 {
                let r = 0.2 * i as f64;
                let n = nml_distribution(&DivergenceBall::new(mu.clone(), r).unwrap(), 1e-12).unwrap();
                for (a, b) in n.raw.iter().zip(&prev) {
                    prop_assert!(*a >= *b - 1e-12);
                }
                prev = n.raw;
            }
        }

        #[test]
        fn huffman_not_worse_than_shannon(w in proptest::collection::vec(0.01f64..1.0, 2..8), r in 0.0f64..2.0) {
            let s: f64 = w.iter().sum();
            let b = DivergenceBall::new(Distribution::new(w.iter().map(|x| x / s).collect()).unwrap(), r).unwrap();
            let hu = robust_huffman_pointwise(&b, Arity::BINARY).unwrap();
            let sh = robust_shannon_pointwise(&b, Arity::BINARY).unwrap();
            let su = pointwise_utility(&sh, &hu.worst_case).unwrap();
            prop_assert!(su < 1.0);
            prop_assert!(hu.achieved_utility <= su + 1e-12);
            for (a, b) in hu.lengths.values().iter().zip(sh.values()) {
                prop_assert!(a <= b);
            }
        }
    }
}
