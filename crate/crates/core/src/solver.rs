//! Minimax codes for the average-redundancy and Gawrychowski–Gagie utilities
//! over a relative-entropy ball.
//!
//! For a fixed tilt `beta` the code minimizing the worst case is the
//! exponential Huffman code on `xi(mu, beta)`; the right `beta` puts the
//! tilted worst case on the ball's surface, `g(beta) = D(nu°(beta) || mu) = R`.
//! Because the inner problem is discrete, `g` jumps wherever the code
//! changes, so the solver keeps every code it probes (bracketing, bisection
//! and a fixed log-spaced grid of tilts) and returns the one whose exactly
//! evaluated worst case over the ball is smallest.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::huffman::{canonical_codewords, exponential_huffman_log, huffman, limit_huffman};
use crate::primitives::{Arity, CodeLengths, Distribution, DivergenceBall, PrefixCode};
use crate::tilted::{
    avg_redundancy, divergence_at_beta, gg_utility, nu_infinity, sup_avg_redundancy,
    sup_gg_utility, BallSupremum, LimitPoint,
};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const MAX_ITERATIONS: usize = 200;

const BETA_START: f64 = 1.0;
const BRACKET_SOFT_LIMIT: f64 = 1e4;
const MIN_BRACKET_WIDTH: f64 = 1e-12;
/// Log-spaced tilts probed on every interior solve, `1e-3 ..= 1e4`.
const GRID_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// A tilt with `D(nu°(beta) || mu) = R` exists.
    Interior,
    /// The radius is at or past the objective's threshold.
    Boundary,
    ZeroRadius,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Interior => "interior",
            Regime::Boundary => "boundary",
            Regime::ZeroRadius => "zero_radius",
        }
    }
}

/// Which utility a [`RobustCodeResult`] was optimized for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Utility {
    AvgRedundancy,
    Gg,
    Pointwise,
}

/// One probe of `g(beta)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaProbe {
    pub beta: f64,
    pub divergence: f64,
    /// Worst case over the ball of the code produced at this tilt.
    pub utility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct BetaSolveTrace {
    pub probes: Vec<BetaProbe>,
    /// `(lo, hi)` with `g(lo) <= R <= g(hi)`; absent if no root search ran.
    pub bracket: Option<(f64, f64)>,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobustCodeResult {
    pub utility: Utility,
    pub lengths: CodeLengths,
    pub codewords: PrefixCode,
    /// Tilt at which the worst case sits on the ball's surface, when there is one.
    pub beta: Option<f64>,
    pub worst_case: Distribution,
    /// In D-ary symbols.
    pub achieved_utility: f64,
    pub regime: Regime,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<BetaSolveTrace>,
}

impl RobustCodeResult {
    /// Re-evaluates the utility at `(lengths, worst_case)`.
    pub fn recompute_utility(&self, mu: &Distribution) -> Result<f64> {
        match self.utility {
            Utility::AvgRedundancy => avg_redundancy(&self.lengths, &self.worst_case),
            Utility::Gg => gg_utility(&self.lengths, &self.worst_case, mu),
            Utility::Pointwise => {
                crate::nml::pointwise_utility(&self.lengths, &self.worst_case)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Target accuracy of `D(nu* || mu) = R`, in nats.
    pub tol: f64,
    /// Error out instead of returning a boundary-regime code.
    pub strict_boundary: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: DEFAULT_TOL,
            strict_boundary: false,
        }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolveOptions { tol, ..Default::default() }
    }
}

/// The `beta -> inf` end of the curve: the limit of the exponential Huffman
/// codes (a minimax pointwise code for `mu`), its limit point, and the radius
/// `R_max` below which a tight tilt exists.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Threshold {
    pub r_max: f64,
    pub limit: LimitPoint,
    pub limit_code: CodeLengths,
}

pub fn existence_threshold(mu: &Distribution, arity: Arity) -> Result<Threshold> {
    if let Some(index) = mu.probs().iter().position(|&p| p == 0.0) {
        return Err(Error::ZeroProbability { index });
    }
    let limit_code = limit_huffman(mu.probs(), arity)?;
    let limit = nu_infinity(mu, &limit_code)?;
    Ok(Threshold {
        r_max: limit.divergence_from_center,
        limit,
        limit_code,
    })
}

/// Radius from which the minimax pointwise code is optimal for the GG utility:
/// `-ln min_i mu_i`.
pub fn gg_threshold(mu: &Distribution) -> f64 {
    -mu.min_prob().ln()
}

/// `g(beta)`: the exponential Huffman code at tilt `beta` and the divergence
/// of its tilted point from `mu`.
pub fn g_of_beta(mu: &Distribution, arity: Arity, beta: f64) -> Result<(f64, CodeLengths)> {
    // xi(mu, beta) in log scale; normalizing is unnecessary for the merge order
    let log_xi: Vec<f64> = mu.probs().iter().map(|p| (beta + 1.0) * p.ln()).collect();
    let lengths = exponential_huffman_log(&log_xi, beta, arity)?;
    let divergence = divergence_at_beta(mu, &lengths, beta)?;
    Ok((divergence, lengths))
}

/// Minimax average redundancy `inf_l sup_{D(nu||mu) <= R} E_nu(l) - H_D(nu)`.
pub fn solve_avg_redundancy(
    ball: &DivergenceBall,
    arity: Arity,
    opts: SolveOptions,
) -> Result<RobustCodeResult> {
    solve(ball, arity, opts, Utility::AvgRedundancy)
}

/// Minimax of the GG utility `E_nu(l) - H_D(nu) - D_D(nu || mu)`.
///
/// From `R >= -ln min mu_i` on, the minimax pointwise code is optimal.
pub fn solve_gg(ball: &DivergenceBall, arity: Arity, opts: SolveOptions) -> Result<RobustCodeResult> {
    solve(ball, arity, opts, Utility::Gg)
}

fn worst_case(
    utility: Utility,
    lengths: &CodeLengths,
    ball: &DivergenceBall,
    tol: f64,
) -> Result<BallSupremum> {
    match utility {
        Utility::AvgRedundancy => sup_avg_redundancy(lengths, ball, tol),
        Utility::Gg => sup_gg_utility(lengths, ball, tol),
        Utility::Pointwise => unreachable!("pointwise codes are built by the nml module"),
    }
}

fn finish(
    utility: Utility,
    lengths: CodeLengths,
    sup: BallSupremum,
    regime: Regime,
    trace: Option<BetaSolveTrace>,
) -> Result<RobustCodeResult> {
    Ok(RobustCodeResult {
        utility,
        codewords: canonical_codewords(&lengths)?,
        lengths,
        beta: sup.beta,
        worst_case: sup.maximizer,
        achieved_utility: sup.value,
        regime,
        trace,
    })
}

fn solve(
    ball: &DivergenceBall,
    arity: Arity,
    opts: SolveOptions,
    utility: Utility,
) -> Result<RobustCodeResult> {
    if !(opts.tol > 0.0) {
        return Err(Error::DomainError(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let mu = ball.center();
    let radius = ball.radius();
    let sup_tol = opts.tol.min(1e-12);

    if radius == 0.0 {
        let lengths = huffman(mu.probs(), arity)?;
        let sup = worst_case(utility, &lengths, ball, sup_tol)?;
        return finish(utility, lengths, sup, Regime::ZeroRadius, None);
    }

    let threshold = existence_threshold(mu, arity)?;
    let boundary_at = match utility {
        Utility::Gg => gg_threshold(mu),
        _ => threshold.r_max,
    };
    if radius >= boundary_at {
        if opts.strict_boundary {
            return Err(Error::BoundaryRegime {
                radius,
                threshold: boundary_at,
            });
        }
        let lengths = threshold.limit_code;
        let sup = worst_case(utility, &lengths, ball, sup_tol)?;
        return finish(utility, lengths, sup, Regime::Boundary, None);
    }

    let mut probes: Vec<(f64, f64, CodeLengths)> = Vec::new();
    let mut probe = |beta: f64| -> Result<f64> {
        let (g, code) = g_of_beta(mu, arity, beta)?;
        probes.push((beta, g, code));
        Ok(g)
    };

    let mut trace = BetaSolveTrace::default();
    // GG radii in [R_max, -ln min mu) have no tilted root; candidates alone decide
    if radius < threshold.r_max {
        let mut hi = BETA_START;
        let mut iterations = 0;
        while probe(hi)? < radius {
            iterations += 1;
            if iterations >= MAX_ITERATIONS {
                return Err(Error::NoConvergence(iterations));
            }
            hi *= 2.0;
        }
        let mut lo = if hi > BETA_START { hi / 2.0 } else { 0.0 };
        if hi > BRACKET_SOFT_LIMIT {
            log::debug!("bracket for R = {radius} needed beta = {hi}");
        }
        for _ in 0..MAX_ITERATIONS {
            if hi - lo <= MIN_BRACKET_WIDTH {
                break;
            }
            iterations += 1;
            let mid = 0.5 * (lo + hi);
            let g = probe(mid)?;
            if (g - radius).abs() <= opts.tol {
                lo = mid;
                hi = mid;
                break;
            }
            if g < radius {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        trace.bracket = Some((lo, hi));
        trace.iterations = iterations;
    }

    for i in 0..GRID_POINTS {
        let beta = 10f64.powf(-3.0 + 7.0 * i as f64 / (GRID_POINTS - 1) as f64);
        probe(beta)?;
    }

    // unique codes, each remembered with the smallest tilt that produced it
    let mut candidates: Vec<(f64, CodeLengths)> = vec![
        (0.0, huffman(mu.probs(), arity)?),
        (f64::INFINITY, threshold.limit_code.clone()),
    ];
    for (beta, _, code) in &probes {
        match candidates.iter_mut().find(|(_, c)| c == code) {
            Some(entry) => entry.0 = entry.0.min(*beta),
            None => candidates.push((*beta, code.clone())),
        }
    }
    let mut sups: Vec<BallSupremum> = Vec::with_capacity(candidates.len());
    for (_, code) in &candidates {
        sups.push(worst_case(utility, code, ball, sup_tol)?);
    }
    let best = (0..candidates.len())
        .min_by(|&a, &b| {
            sups[a]
                .value
                .total_cmp(&sups[b].value)
                .then(candidates[a].0.total_cmp(&candidates[b].0))
        })
        .expect("candidate list is never empty");

    let utility_of: HashMap<Vec<u32>, f64> = candidates
        .iter()
        .zip(&sups)
        .map(|((_, c), s)| (c.as_integers().expect("integer code"), s.value))
        .collect();
    trace.probes = probes
        .iter()
        .map(|(beta, g, code)| BetaProbe {
            beta: *beta,
            divergence: *g,
            utility: utility_of[&code.as_integers().expect("integer code")],
        })
        .collect();

    let lengths = candidates.swap_remove(best).1;
    let sup = sups.swap_remove(best);
    finish(utility, lengths, sup, Regime::Interior, Some(trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::huffman::linear_cost;
    use crate::primitives::kl_divergence;
    use approx::assert_abs_diff_eq;

    fn d(p: &[f64]) -> Distribution {
        Distribution::new(p.to_vec()).unwrap()
    }

    fn ball(p: &[f64], r: f64) -> DivergenceBall {
        DivergenceBall::new(d(p), r).unwrap()
    }

    #[test]
    fn threshold_examples() {
        let t = existence_threshold(&d(&[0.5, 0.25, 0.25]), Arity::BINARY).unwrap();
        assert_eq!(t.limit_code.as_integers().unwrap(), vec![1, 2, 2]);
        assert_eq!(t.r_max, 0.0);
        let t = existence_threshold(&d(&[0.6, 0.3, 0.1]), Arity::BINARY).unwrap();
        assert_eq!(t.limit_code.as_integers().unwrap(), vec![1, 2, 2]);
        assert_abs_diff_eq!(t.r_max, -(0.9f64.ln()), epsilon = 1e-12);
        let t = existence_threshold(&Distribution::uniform(4).unwrap(), Arity::BINARY).unwrap();
        assert_eq!(t.r_max, 0.0);
    }

    #[test]
    fn g_examples() {
        let mu = d(&[0.6, 0.3, 0.1]);
        assert!(g_of_beta(&mu, Arity::BINARY, 1e-9).unwrap().0 < 1e-12);
        let (g, _) = g_of_beta(&mu, Arity::BINARY, 1e3).unwrap();
        assert!((g + 0.9f64.ln()).abs() < 1e-4);
        let dy = d(&[0.5, 0.25, 0.25]);
        for b in [0.01, 1.0, 100.0] {
            assert_eq!(g_of_beta(&dy, Arity::BINARY, b).unwrap().0, 0.0);
        }
    }

    #[test]
    fn zero_radius_is_plain_huffman() {
        let b = ball(&[0.4, 0.3, 0.2, 0.1], 0.0);
        let r = solve_avg_redundancy(&b, Arity::BINARY, SolveOptions::default()).unwrap();
        assert_eq!(r.regime, Regime::ZeroRadius);
        assert_abs_diff_eq!(linear_cost(b.center().probs(), &r.lengths), 1.9, epsilon = 1e-12);
        assert_abs_diff_eq!(
            r.achieved_utility,
            avg_redundancy(&r.lengths, b.center()).unwrap(),
            epsilon = 1e-15
        );
        let g = solve_gg(&b, Arity::BINARY, SolveOptions::default()).unwrap();
        assert_eq!(g.regime, Regime::ZeroRadius);
        assert_abs_diff_eq!(g.achieved_utility, r.achieved_utility, epsilon = 1e-15);
    }

    #[test]
    fn dyadic_nominal_goes_straight_to_boundary() {
        let b = ball(&[0.5, 0.25, 0.25], 0.1);
        let r = solve_avg_redundancy(&b, Arity::BINARY, SolveOptions::default()).unwrap();
        assert_eq!(r.regime, Regime::Boundary);
        assert_eq!(r.lengths.as_integers().unwrap(), vec![1, 2, 2]);
        assert!(r.achieved_utility > 0.0);
        let strict = SolveOptions { strict_boundary: true, ..Default::default() };
        assert!(matches!(
            solve_avg_redundancy(&b, Arity::BINARY, strict),
            Err(Error::BoundaryRegime { .. })
        ));
        // GG utility of the exact code is zero for every nu
        let g = solve_gg(&b, Arity::BINARY, SolveOptions::default()).unwrap();
        assert_eq!(g.regime, Regime::Interior);
        assert_abs_diff_eq!(g.achieved_utility, 0.0, epsilon = 1e-14);
        let g = solve_gg(&ball(&[0.5, 0.25, 0.25], 5.0), Arity::BINARY, SolveOptions::default()).unwrap();
        assert_eq!(g.regime, Regime::Boundary);
        assert_abs_diff_eq!(g.achieved_utility, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn interior_solution_sits_on_the_surface() {
        let b = ball(&[0.6, 0.3, 0.1], 0.05);
        let r = solve_avg_redundancy(&b, Arity::BINARY, SolveOptions::default()).unwrap();
        assert_eq!(r.regime, Regime::Interior);
        assert!(r.beta.is_some());
        let div = kl_divergence(&r.worst_case, b.center()).unwrap();
        assert!((div - 0.05).abs() <= 1e-9);
        assert_abs_diff_eq!(
            r.recompute_utility(b.center()).unwrap(),
            r.achieved_utility,
            epsilon = 1e-9
        );
        let trace = r.trace.unwrap();
        let (lo, hi) = trace.bracket.unwrap();
        assert!(lo <= hi);
        assert!(!trace.probes.is_empty());
    }

    #[test]
    fn gg_shortcut_returns_minimax_pointwise_code() {
        let b = ball(&[0.6, 0.3, 0.1], 3.0);
        let r = solve_gg(&b, Arity::BINARY, SolveOptions::default()).unwrap();
        assert_eq!(r.regime, Regime::Boundary);
        assert_eq!(r.lengths.as_integers().unwrap(), vec![1, 2, 2]);
        assert_abs_diff_eq!(r.achieved_utility, 1.2f64.log2(), epsilon = 1e-12);
    }

    #[test]
    fn utility_nondecreasing_in_radius() {
        let mu = [0.45, 0.3, 0.15, 0.1];
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=20 {
            let r = 0.5 * i as f64 / 20.0;
            let res = solve_avg_redundancy(&ball(&mu, r), Arity::BINARY, SolveOptions::default()).unwrap();
            assert!(res.achieved_utility >= prev - 1e-9, "R = {r}");
            prev = res.achieved_utility;
        }
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(solve_avg_redundancy(&ball(&[0.6, 0.4], 0.1), Arity::BINARY, SolveOptions::with_tol(0.0)).is_err());
    }
}
