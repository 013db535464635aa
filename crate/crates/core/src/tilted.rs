//! Tilted distributions around a nominal `mu` and the redundancy identities
//! built on them.
//!
//! For a code with lengths `l` let `theta_i = D^(-l_i)` and
//! `r_i = ln(mu_i / theta_i)`. The tilted family is
//! `nu°_i(beta) ∝ mu_i * exp(beta * r_i)`; its divergence from `mu` grows with
//! `beta` and tends to `-ln mu(argmax r)` as `beta -> inf`. When the ball
//! radius sits below that limit, the worst case of the average redundancy over
//! the ball is the tilted point whose divergence equals the radius.
//!
//! Everything is computed with log-weights and max subtraction, because `beta`
//! routinely reaches the thousands.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::math::{bisect_level, log_sum_exp, softmax};
use crate::primitives::{
    check_same_len, entropy_nats, kl_slices, CodeLengths, Distribution, DivergenceBall,
};

/// Absolute tolerance (in log-ratio) for two symbols to tie for the maximum
/// of `mu_i / theta_i`.
pub const ARGMAX_TIE_TOL: f64 = 1e-12;

/// Largest tilt probed when bracketing a divergence level.
const BETA_CEILING: f64 = 1e15;

/// Exhaustive face search is used up to this many symbols.
pub const EXACT_FACE_LIMIT: usize = 12;

/// A point `nu°(beta)` on the tilted curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TiltedPoint {
    pub beta: f64,
    pub distribution: Distribution,
    pub divergence_from_center: f64,
}

/// The `beta -> inf` limit of the tilted curve: `mu` restricted to the
/// symbols maximizing `mu_i / theta_i`, renormalized.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitPoint {
    pub distribution: Distribution,
    pub divergence_from_center: f64,
    pub argmax_set: Vec<usize>,
}

/// `r_i = ln(mu_i / theta_i) = ln mu_i + l_i ln D`.
pub fn log_ratios(mu: &Distribution, lengths: &CodeLengths) -> Result<Vec<f64>> {
    check_same_len(mu.len(), lengths.len())?;
    if let Some(index) = mu.probs().iter().position(|&p| p == 0.0) {
        return Err(Error::ZeroProbability { index });
    }
    let ln_d = lengths.arity().ln();
    Ok(mu
        .probs()
        .iter()
        .zip(lengths.values())
        .map(|(&p, &l)| p.ln() + l * ln_d)
        .collect())
}

/// Tilt restricted to `support` (all symbols when `None`); zero elsewhere.
fn tilt_probs(mu: &[f64], r: &[f64], beta: f64, support: Option<&[usize]>) -> Vec<f64> {
    match support {
        None => {
            let lw: Vec<f64> = mu
                .iter()
                .zip(r)
                .map(|(&p, &ri)| beta * ri + p.ln())
                .collect();
            softmax(&lw)
        }
        Some(face) => {
            let lw: Vec<f64> = face.iter().map(|&i| beta * r[i] + mu[i].ln()).collect();
            let p = softmax(&lw);
            let mut out = vec![0.0; mu.len()];
            for (&i, pi) in face.iter().zip(p) {
                out[i] = pi;
            }
            out
        }
    }
}

/// `nu°(beta)` for the code `lengths`, with its divergence from `mu`.
pub fn nu_circ(mu: &Distribution, lengths: &CodeLengths, beta: f64) -> Result<TiltedPoint> {
    check_beta(beta)?;
    let r = log_ratios(mu, lengths)?;
    let probs = tilt_probs(mu.probs(), &r, beta, None);
    let divergence_from_center = kl_slices(&probs, mu.probs())?;
    Ok(TiltedPoint {
        beta,
        distribution: Distribution::from_weights(probs)?,
        divergence_from_center,
    })
}

/// `D(nu°(beta) || mu)` in nats.
pub fn divergence_at_beta(mu: &Distribution, lengths: &CodeLengths, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let r = log_ratios(mu, lengths)?;
    kl_slices(&tilt_probs(mu.probs(), &r, beta, None), mu.probs())
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::DomainError(format!("beta must be positive, got {beta}")));
    }
    Ok(())
}

/// `xi_k = mu_k^(beta+1) / sum_i mu_i^(beta+1)`: the weights handed to the
/// exponential Huffman subproblem.
pub fn xi(mu: &Distribution, beta: f64) -> Result<Distribution> {
    check_beta(beta)?;
    let lw: Vec<f64> = mu
        .probs()
        .iter()
        .map(|&p| if p > 0.0 { (beta + 1.0) * p.ln() } else { f64::NEG_INFINITY })
        .collect();
    Distribution::from_weights(softmax(&lw))
}

/// Average redundancy `E_nu(l) - H_D(nu)` in D-ary symbols.
pub fn avg_redundancy(lengths: &CodeLengths, nu: &Distribution) -> Result<f64> {
    let expected = lengths.expected_length(nu)?;
    Ok(expected - entropy_nats(nu.probs()) / lengths.arity().ln())
}

/// The same quantity written as `D(nu || theta) / ln D`.
pub fn avg_redundancy_theta_form(lengths: &CodeLengths, nu: &Distribution) -> Result<f64> {
    check_same_len(lengths.len(), nu.len())?;
    let ln_d = lengths.arity().ln();
    let nats: f64 = nu
        .probs()
        .iter()
        .zip(lengths.values())
        .filter(|(&p, _)| p > 0.0)
        .map(|(&p, &l)| p * (p.ln() + l * ln_d))
        .sum();
    Ok(nats / ln_d)
}

/// Excess of the expected length over the ideal length without knowledge of
/// `nu`: `E_nu(l) - H_D(nu) - D(nu || mu) / ln D`.
pub fn gg_utility(lengths: &CodeLengths, nu: &Distribution, mu: &Distribution) -> Result<f64> {
    check_same_len(nu.len(), mu.len())?;
    let div = kl_slices(nu.probs(), mu.probs())?;
    Ok(avg_redundancy(lengths, nu)? - div / lengths.arity().ln())
}

/// `sum_k nu_k (l_k + log_D mu_k)`, the linear form of [`gg_utility`].
pub fn gg_utility_pointwise_form(
    lengths: &CodeLengths,
    nu: &Distribution,
    mu: &Distribution,
) -> Result<f64> {
    check_same_len(nu.len(), mu.len())?;
    check_same_len(lengths.len(), mu.len())?;
    let ln_d = lengths.arity().ln();
    let mut acc = 0.0;
    for (index, ((&v, &m), &l)) in nu
        .probs()
        .iter()
        .zip(mu.probs())
        .zip(lengths.values())
        .enumerate()
    {
        if v == 0.0 {
            continue;
        }
        if m == 0.0 {
            return Err(Error::AbsoluteContinuityViolation { index });
        }
        acc += v * (l + m.ln() / ln_d);
    }
    Ok(acc)
}

/// The three terms of the average redundancy written around `nu°(beta)`, in nats:
///
/// `(beta+1)/beta * D(nu||mu) - D(nu||nu°(beta))/beta + ln(sum_k (mu_k/theta_k)^beta mu_k)/beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecompositionTerms {
    pub divergence_term: f64,
    pub tilt_gap_term: f64,
    pub log_partition_term: f64,
}

impl DecompositionTerms {
    pub fn sum_nats(&self) -> f64 {
        self.divergence_term + self.tilt_gap_term + self.log_partition_term
    }
}

pub fn decomposition_terms(
    lengths: &CodeLengths,
    nu: &Distribution,
    mu: &Distribution,
    beta: f64,
) -> Result<DecompositionTerms> {
    check_beta(beta)?;
    check_same_len(nu.len(), mu.len())?;
    let r = log_ratios(mu, lengths)?;
    let log_weights: Vec<f64> = mu
        .probs()
        .iter()
        .zip(&r)
        .map(|(&p, &ri)| beta * ri + p.ln())
        .collect();
    let log_z = log_sum_exp(&log_weights);
    let div_mu = kl_slices(nu.probs(), mu.probs())?;
    // D(nu || nu°) from log-weights so underflowed tilt entries stay exact
    let div_tilt: f64 = nu
        .probs()
        .iter()
        .zip(&log_weights)
        .filter(|(&p, _)| p > 0.0)
        .map(|(&p, &lw)| p * (p.ln() - (lw - log_z)))
        .sum();
    Ok(DecompositionTerms {
        divergence_term: (beta + 1.0) / beta * div_mu,
        tilt_gap_term: -div_tilt / beta,
        log_partition_term: log_z / beta,
    })
}

/// The limit point `nu∞` and its divergence `-ln sum_{argmax} mu_k`.
pub fn nu_infinity(mu: &Distribution, lengths: &CodeLengths) -> Result<LimitPoint> {
    let r = log_ratios(mu, lengths)?;
    let argmax_set = extreme_set(&r, None, true);
    limit_point(mu, argmax_set)
}

fn limit_point(mu: &Distribution, set: Vec<usize>) -> Result<LimitPoint> {
    let mut weights = vec![0.0; mu.len()];
    let mut mass = 0.0;
    for &i in &set {
        weights[i] = mu.probs()[i];
        mass += mu.probs()[i];
    }
    Ok(LimitPoint {
        distribution: Distribution::from_weights(weights)?,
        divergence_from_center: if set.len() == mu.len() || mass >= 1.0 {
            0.0
        } else {
            -mass.ln()
        },
        argmax_set: set,
    })
}

/// Indices of `face` (or all) whose value is within [`ARGMAX_TIE_TOL`] of
/// the max (or min).
fn extreme_set(r: &[f64], face: Option<&[usize]>, max: bool) -> Vec<usize> {
    let idx: Vec<usize> = face.map_or_else(|| (0..r.len()).collect(), <[usize]>::to_vec);
    let ext = idx
        .iter()
        .map(|&i| r[i])
        .fold(if max { f64::NEG_INFINITY } else { f64::INFINITY }, |a, b| {
            if max {
                a.max(b)
            } else {
                a.min(b)
            }
        });
    idx.into_iter()
        .filter(|&i| (r[i] - ext).abs() <= ARGMAX_TIE_TOL)
        .collect()
}

/// The tilted point whose divergence from `mu` equals `radius`, if one
/// exists for this code (`0 < radius < D(nu∞ || mu)`).
pub fn tight_beta(
    mu: &Distribution,
    lengths: &CodeLengths,
    radius: f64,
    tol: f64,
) -> Result<Option<TiltedPoint>> {
    if radius <= 0.0 {
        return Ok(None);
    }
    let r = log_ratios(mu, lengths)?;
    let limit = -extreme_set(&r, None, true)
        .iter()
        .map(|&i| mu.probs()[i])
        .sum::<f64>()
        .ln();
    if radius >= limit {
        return Ok(None);
    }
    let Some(beta) = level_beta(mu.probs(), &r, None, 1.0, radius, tol)? else {
        return Ok(None);
    };
    nu_circ(mu, lengths, beta).map(Some)
}

/// Solves `D(tilt(sign * t) || mu) = radius` for `t > 0`; `None` when the level
/// is numerically out of reach.
fn level_beta(
    mu: &[f64],
    r: &[f64],
    face: Option<&[usize]>,
    sign: f64,
    radius: f64,
    tol: f64,
) -> Result<Option<f64>> {
    let div = |t: f64| {
        kl_slices(&tilt_probs(mu, r, sign * t, face), mu).unwrap_or(f64::INFINITY)
    };
    let mut hi = 1.0;
    while div(hi) < radius {
        if hi > BETA_CEILING {
            return Ok(None);
        }
        hi *= 2.0;
    }
    let c = bisect_level(div, 0.0, hi, radius, tol, 400);
    if c.lo == 0.0 {
        // the level sits below the first bisection step; use the upper end
        return Ok(Some(sign * c.hi));
    }
    Ok(Some(sign * c.lo))
}

/// Worst case of a utility over a divergence ball for a fixed code.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallSupremum {
    pub value: f64,
    pub maximizer: Distribution,
    /// Tilt of the maximizer when it lies on the tilted curve with `beta > 0`.
    pub beta: Option<f64>,
    /// `false` when the face search was truncated (large alphabets).
    pub exact: bool,
}

/// `sup_{nu in ball} avg_redundancy(lengths, nu)`.
///
/// When the code has a tight `beta` the supremum is the tilted point.
/// Otherwise the maximizer touches the simplex boundary; the search then
/// visits every face of the simplex, where stationary points of the
/// constrained problem are restricted tilts with `beta` of either sign, plus
/// the vertices inside the ball.
pub fn sup_avg_redundancy(
    lengths: &CodeLengths,
    ball: &DivergenceBall,
    tol: f64,
) -> Result<BallSupremum> {
    let mu = ball.center();
    let radius = ball.radius();
    if radius == 0.0 {
        return Ok(BallSupremum {
            value: avg_redundancy(lengths, mu)?,
            maximizer: mu.clone(),
            beta: None,
            exact: true,
        });
    }
    if let Some(tp) = tight_beta(mu, lengths, radius, tol)? {
        return Ok(BallSupremum {
            value: avg_redundancy(lengths, &tp.distribution)?,
            maximizer: tp.distribution,
            beta: Some(tp.beta),
            exact: true,
        });
    }
    let (candidates, exact) = boundary_candidates(mu, lengths, radius, tol)?;
    let mut best: Option<(f64, Distribution)> = None;
    for c in candidates {
        let v = avg_redundancy(lengths, &c)?;
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, c));
        }
    }
    // mu itself is always a candidate, so `best` is set
    let (value, maximizer) = best.expect("candidate set is never empty");
    Ok(BallSupremum {
        value,
        maximizer,
        beta: None,
        exact,
    })
}

fn boundary_candidates(
    mu: &Distribution,
    lengths: &CodeLengths,
    radius: f64,
    tol: f64,
) -> Result<(Vec<Distribution>, bool)> {
    let m = mu.len();
    let p = mu.probs();
    let r = log_ratios(mu, lengths)?;
    let mut out = vec![mu.clone()];

    for k in 0..m {
        if -p[k].ln() <= radius {
            let mut v = vec![0.0; m];
            v[k] = 1.0;
            out.push(Distribution::from_weights(v)?);
        }
    }

    let exact = m <= EXACT_FACE_LIMIT;
    let faces: Vec<Vec<usize>> = if exact {
        (1u32..(1 << m))
            .filter(|mask| mask.count_ones() >= 2)
            .map(|mask| (0..m).filter(|&i| mask & (1 << i) != 0).collect())
            .collect()
    } else {
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| r[b].total_cmp(&r[a]));
        let mut faces = Vec::new();
        for len in 2..=m {
            faces.push(order[..len].to_vec());
            faces.push(order[m - len..].to_vec());
        }
        faces
    };

    for face in &faces {
        let mass: f64 = face.iter().map(|&i| p[i]).sum();
        if -mass.ln() > radius {
            continue;
        }
        out.push(Distribution::from_weights(tilt_probs(p, &r, 0.0, Some(face)))?);

        let spread = face.iter().map(|&i| r[i]).fold(f64::NEG_INFINITY, f64::max)
            - face.iter().map(|&i| r[i]).fold(f64::INFINITY, f64::min);
        if spread <= ARGMAX_TIE_TOL {
            // flat ratios: utility is divergence plus a constant on this face
            if let Some(v) = flat_face_point(p, face, radius, tol)? {
                out.push(v);
            }
            continue;
        }
        for (sign, max) in [(1.0, true), (-1.0, false)] {
            let lim_mass: f64 = extreme_set(&r, Some(face), max).iter().map(|&i| p[i]).sum();
            if radius >= -lim_mass.ln() {
                continue;
            }
            if let Some(beta) = level_beta(p, &r, Some(face), sign, radius, tol)? {
                out.push(Distribution::from_weights(tilt_probs(p, &r, beta, Some(face)))?);
            }
        }
    }
    Ok((out, exact))
}

/// A point of the face at divergence `radius`, on the segment from the
/// restricted nominal to the lightest vertex of the face.
fn flat_face_point(p: &[f64], face: &[usize], radius: f64, tol: f64) -> Result<Option<Distribution>> {
    let base = tilt_probs(p, &vec![0.0; p.len()], 0.0, Some(face));
    let k = *face
        .iter()
        .min_by(|&&a, &&b| p[a].total_cmp(&p[b]))
        .expect("face is non-empty");
    if -p[k].ln() < radius {
        return Ok(None);
    }
    let point = |t: f64| -> Vec<f64> {
        base.iter()
            .enumerate()
            .map(|(i, &b)| (1.0 - t) * b + if i == k { t } else { 0.0 })
            .collect()
    };
    let c = bisect_level(
        |t| kl_slices(&point(t), p).unwrap_or(f64::INFINITY),
        0.0,
        1.0,
        radius,
        tol,
        200,
    );
    Distribution::from_weights(point(c.lo)).map(Some)
}

/// `sup_{nu in ball} gg_utility(lengths, nu, mu)`.
///
/// The utility is linear in `nu`, so past the tilted curve's reach the
/// supremum is `max_k (l_k + log_D mu_k)`, attained at `nu∞` (which is then
/// inside the ball).
pub fn sup_gg_utility(
    lengths: &CodeLengths,
    ball: &DivergenceBall,
    tol: f64,
) -> Result<BallSupremum> {
    let mu = ball.center();
    let radius = ball.radius();
    if radius == 0.0 {
        return Ok(BallSupremum {
            value: gg_utility(lengths, mu, mu)?,
            maximizer: mu.clone(),
            beta: None,
            exact: true,
        });
    }
    if let Some(tp) = tight_beta(mu, lengths, radius, tol)? {
        return Ok(BallSupremum {
            value: gg_utility(lengths, &tp.distribution, mu)?,
            maximizer: tp.distribution,
            beta: Some(tp.beta),
            exact: true,
        });
    }
    let limit = nu_infinity(mu, lengths)?;
    Ok(BallSupremum {
        value: gg_utility(lengths, &limit.distribution, mu)?,
        maximizer: limit.distribution,
        beta: None,
        exact: true,
    })
}
