//! Brute-force ground truth for small instances.
//!
//! Codes are enumerated exhaustively (sorted length vectors, assigned
//! shortest-to-heaviest), divergence balls are sampled with seeded RNG, and
//! nested min-over-codes / max-over-samples values are computed literally.
//! Nothing in here calls the Huffman kernels or the solvers; the only shared
//! path is the tilted-curve point used as an extra sample.
//!
//! A sampled supremum is a lower bound on the true supremum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::primitives::{kl_divergence, Arity, CodeLengths, Distribution, DivergenceBall};
use crate::tilted::{self, avg_redundancy, gg_utility};

pub const MAX_SYMBOLS: usize = 10;
pub const MAX_LENGTH: u32 = 10;

/// Default longest codeword considered: `M` for binary codes,
/// `ceil(log_D M) + 2` otherwise.
pub fn default_lmax(m: usize, arity: Arity) -> u32 {
    if arity.get() == 2 {
        m as u32
    } else {
        let mut levels = 0u32;
        let mut reach = 1usize;
        while reach < m {
            reach = reach.saturating_mul(arity.get() as usize);
            levels += 1;
        }
        levels + 2
    }
}

/// Streams every non-decreasing length vector in `[1, lmax]^M` whose Kraft
/// sum is at most one. Kraft sums are checked in exact integer arithmetic.
#[derive(Debug, Clone)]
pub struct KraftLengths {
    current: Vec<u32>,
    lmax: u32,
    /// `D^(lmax - l)` for `l = 0..=lmax`
    scaled: Vec<u128>,
    budget: u128,
    started: bool,
    done: bool,
}

pub fn enumerate_kraft_lengths(m: usize, arity: Arity, lmax: u32) -> Result<KraftLengths> {
    if m < 2 {
        return Err(Error::TooFewSymbols(m));
    }
    if m > MAX_SYMBOLS {
        return Err(Error::LimitExceeded(format!("{m} symbols (max {MAX_SYMBOLS})")));
    }
    if lmax == 0 || lmax > MAX_LENGTH {
        return Err(Error::LimitExceeded(format!(
            "lmax {lmax} (must be in 1..={MAX_LENGTH})"
        )));
    }
    let d = u128::from(arity.get());
    let budget = d
        .checked_pow(lmax)
        .ok_or_else(|| Error::LimitExceeded(format!("arity {arity} with lmax {lmax}")))?;
    let scaled = (0..=lmax).map(|l| d.pow(lmax - l)).collect();
    Ok(KraftLengths {
        current: vec![1; m],
        lmax,
        scaled,
        budget,
        started: false,
        done: false,
    })
}

impl KraftLengths {
    fn feasible(&self) -> bool {
        let mut acc: u128 = 0;
        for &l in &self.current {
            acc += self.scaled[l as usize];
            if acc > self.budget {
                return false;
            }
        }
        true
    }

    fn advance(&mut self) -> bool {
        let m = self.current.len();
        let Some(i) = (0..m).rev().find(|&i| self.current[i] < self.lmax) else {
            return false;
        };
        let v = self.current[i] + 1;
        for x in &mut self.current[i..] {
            *x = v;
        }
        true
    }
}

impl Iterator for KraftLengths {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        if self.done {
            return None;
        }
        loop {
            if self.started && !self.advance() {
                self.done = true;
                return None;
            }
            self.started = true;
            if self.feasible() {
                return Some(self.current.clone());
            }
        }
    }
}

/// Places sorted lengths on symbols sorted by decreasing weight.
pub fn assign_sorted(sorted_lengths: &[u32], weights: &[f64]) -> Vec<u32> {
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    let mut out = vec![0; weights.len()];
    for (&sym, &l) in order.iter().zip(sorted_lengths) {
        out[sym] = l;
    }
    out
}

fn segment(mu: &[f64], target: &[f64], t: f64) -> Vec<f64> {
    mu.iter()
        .zip(target)
        .map(|(&a, &b)| (1.0 - t) * a + t * b)
        .collect()
}

fn divergence(nu: &[f64], mu: &[f64]) -> f64 {
    nu.iter()
        .zip(mu)
        .filter(|(&p, _)| p > 0.0)
        .map(|(&p, &q)| p * (p / q).ln())
        .sum::<f64>()
        .max(0.0)
}

/// Largest `t in [0, 1]` with `D(mu + t (target - mu) || mu) <= radius`.
fn segment_reach(mu: &[f64], target: &[f64], radius: f64) -> f64 {
    if divergence(target, mu) <= radius {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if divergence(&segment(mu, target, mid), mu) <= radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn dirichlet_uniform(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// Seeded sample of the ball `{nu : D(nu || mu) <= R}`:
///
/// * `mu` itself;
/// * `n_interior` points drawn uniformly along rays from `mu` toward uniform
///   Dirichlet draws, cut at the ball;
/// * `n_boundary` points where such rays leave the ball;
/// * for every vertex, the point where the segment from `mu` toward it
///   leaves the ball (or the vertex itself when it is inside);
/// * for every enumerated small `arity`-ary code, the tilted point at
///   divergence `R`.
///
/// Every returned point satisfies `D(nu || mu) <= R + 1e-10`.
pub fn ball_sample(
    ball: &DivergenceBall,
    arity: Arity,
    n_interior: usize,
    n_boundary: usize,
    seed: u64,
) -> Result<Vec<Distribution>> {
    let mu = ball.center();
    let radius = ball.radius();
    let m = mu.len();
    let p = mu.probs();
    let mut out = vec![mu.clone()];
    if radius == 0.0 {
        return Ok(out);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n_interior {
        let w = dirichlet_uniform(&mut rng, m);
        let t = segment_reach(p, &w, radius) * rng.gen::<f64>();
        out.push(Distribution::from_weights(segment(p, &w, t))?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    for _ in 0..n_boundary {
        let w = dirichlet_uniform(&mut rng, m);
        let t = segment_reach(p, &w, radius);
        out.push(Distribution::from_weights(segment(p, &w, t))?);
    }

    for k in 0..m {
        let mut vertex = vec![0.0; m];
        vertex[k] = 1.0;
        let t = segment_reach(p, &vertex, radius);
        out.push(Distribution::from_weights(segment(p, &vertex, t))?);
    }

    if m <= MAX_SYMBOLS {
        for sorted in enumerate_kraft_lengths(m, arity, default_lmax(m, arity))? {
            let code = CodeLengths::integer(assign_sorted(&sorted, p), arity)?;
            if let Some(tp) = tilted::tight_beta(mu, &code, radius, 1e-12)? {
                out.push(tp.distribution);
            }
        }
    }

    out.retain(|nu| divergence(nu.probs(), p) <= radius + 1e-10);
    Ok(out)
}

/// What `brute_min_over_codes` minimizes.
#[derive(Debug, Clone, Copy)]
pub enum Objective<'a> {
    /// `sum w_k l_k`
    LinearCost(&'a [f64]),
    /// `ln sum w_k D^(beta l_k)`
    ExpCost { weights: &'a [f64], beta: f64 },
    /// `max_k (l_k + log_D w_k)`
    Pointwise(&'a [f64]),
    /// `sup_nu E_nu(l) - H_D(nu)` over the samples (plus the tight tilted point)
    AvgRedundancy {
        ball: &'a DivergenceBall,
        samples: &'a [Distribution],
    },
    /// `sup_nu E_nu(l) - H_D(nu) - D_D(nu || mu)` over the samples (plus the tight tilted point)
    Gg {
        ball: &'a DivergenceBall,
        samples: &'a [Distribution],
    },
    /// `sup_nu max_k (l_k + log_D nu_k)` over the samples
    PointwiseOverBall {
        ball: &'a DivergenceBall,
        samples: &'a [Distribution],
    },
}

impl Objective<'_> {
    fn reference_weights(&self) -> &[f64] {
        match self {
            Objective::LinearCost(w) | Objective::Pointwise(w) => w,
            Objective::ExpCost { weights, .. } => weights,
            Objective::AvgRedundancy { ball, .. }
            | Objective::Gg { ball, .. }
            | Objective::PointwiseOverBall { ball, .. } => ball.center().probs(),
        }
    }

    fn samples(&self) -> usize {
        match self {
            Objective::AvgRedundancy { samples, .. }
            | Objective::Gg { samples, .. }
            | Objective::PointwiseOverBall { samples, .. } => samples.len(),
            _ => 0,
        }
    }

    fn evaluate(&self, lengths: &CodeLengths) -> Result<f64> {
        let ln_d = lengths.arity().ln();
        let l = lengths.values();
        Ok(match *self {
            Objective::LinearCost(w) => w.iter().zip(l).map(|(w, l)| w * l).sum(),
            Objective::ExpCost { weights, beta } => {
                let terms: Vec<f64> = weights
                    .iter()
                    .zip(l)
                    .filter(|(&w, _)| w > 0.0)
                    .map(|(&w, &l)| w.ln() + beta * l * ln_d)
                    .collect();
                let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
            }
            Objective::Pointwise(w) => pointwise(w, l, ln_d),
            Objective::AvgRedundancy { ball, samples } => {
                let mut best = brute_sup_over_ball(lengths, ball, Utility::AvgRedundancy, samples)?;
                if let Some(tp) = tilted::tight_beta(ball.center(), lengths, ball.radius(), 1e-12)? {
                    best = best.max(avg_redundancy(lengths, &tp.distribution)?);
                }
                best
            }
            Objective::Gg { ball, samples } => {
                let mut best = brute_sup_over_ball(lengths, ball, Utility::Gg, samples)?;
                if let Some(tp) = tilted::tight_beta(ball.center(), lengths, ball.radius(), 1e-12)? {
                    best = best.max(gg_utility(lengths, &tp.distribution, ball.center())?);
                }
                best
            }
            Objective::PointwiseOverBall { ball, samples } => {
                brute_sup_over_ball(lengths, ball, Utility::Pointwise, samples)?
            }
        })
    }
}

fn pointwise(w: &[f64], l: &[f64], ln_d: f64) -> f64 {
    w.iter()
        .zip(l)
        .filter(|(&w, _)| w > 0.0)
        .map(|(&w, &l)| l + w.ln() / ln_d)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Per-distribution utilities for [`brute_sup_over_ball`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Utility {
    AvgRedundancy,
    Gg,
    Pointwise,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleParameters {
    pub symbols: usize,
    pub arity: u32,
    pub lmax: u32,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub optimum_value: f64,
    /// Every optimal length vector, in the original symbol order.
    pub optimal_length_vectors: Vec<Vec<u32>>,
    pub evaluations: usize,
    pub parameters: OracleParameters,
}

/// Tolerance for membership in the optimal set.
const TIE_TOL: f64 = 1e-12;

/// Exact minimum of `objective` over every Kraft-feasible code with words no
/// longer than `lmax`.
pub fn brute_min_over_codes(
    objective: Objective<'_>,
    arity: Arity,
    lmax: u32,
) -> Result<OracleReport> {
    let weights = objective.reference_weights();
    let m = weights.len();
    let mut values: Vec<(Vec<u32>, f64)> = Vec::new();
    for sorted in enumerate_kraft_lengths(m, arity, lmax)? {
        let assigned = assign_sorted(&sorted, weights);
        let code = CodeLengths::integer(assigned.clone(), arity)?;
        values.push((assigned, objective.evaluate(&code)?));
    }
    let evaluations = values.len();
    let best = values.iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
    let tie = TIE_TOL * best.abs().max(1.0);
    let argmin = values
        .into_iter()
        .filter(|(_, v)| *v <= best + tie)
        .map(|(l, _)| l)
        .collect();
    Ok(OracleReport {
        optimum_value: best,
        optimal_length_vectors: argmin,
        evaluations,
        parameters: OracleParameters {
            symbols: m,
            arity: arity.get(),
            lmax,
            samples: objective.samples(),
        },
    })
}

/// Max of `utility` over `samples`; a lower bound on the supremum over the ball.
pub fn brute_sup_over_ball(
    lengths: &CodeLengths,
    ball: &DivergenceBall,
    utility: Utility,
    samples: &[Distribution],
) -> Result<f64> {
    let ln_d = lengths.arity().ln();
    let mu = ball.center();
    let mut best = f64::NEG_INFINITY;
    for nu in samples {
        let v = match utility {
            Utility::AvgRedundancy => avg_redundancy(lengths, nu)?,
            Utility::Gg => {
                avg_redundancy(lengths, nu)? - kl_divergence(nu, mu)? / ln_d
            }
            Utility::Pointwise => pointwise(nu.probs(), lengths.values(), ln_d),
        };
        best = best.max(v);
    }
    Ok(best)
}

/// Larger root of `d(p || m) = R` by plain bisection on `(m, 1)` to width 1e-14.
pub fn brute_binary_root(m: f64, radius: f64) -> Result<f64> {
    if !(m > 0.0 && m < 1.0) || !(radius >= 0.0) {
        return Err(Error::DomainError(format!("m = {m}, R = {radius}")));
    }
    if m >= (-radius).exp() {
        return Err(Error::DomainError(format!(
            "m = {m} >= exp(-R): the root is at p = 1"
        )));
    }
    let d = |p: f64| {
        let a = p * ((p - m) / m).ln_1p();
        let b = if p < 1.0 { (1.0 - p) * ((m - p) / (1.0 - m)).ln_1p() } else { 0.0 };
        a + b
    };
    let (mut lo, mut hi) = (m, 1.0);
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if d(mid) < radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
