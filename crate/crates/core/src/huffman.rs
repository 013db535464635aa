//! Code construction kernels.
//!
//! All three Huffman variants share one D-ary merge loop and differ only in
//! how a merged node's weight is formed from its children:
//!
//! | kernel | merged weight | minimizes |
//! |--------|---------------|-----------|
//! | [`huffman`] | `a_1 + ... + a_D` | `sum w_k l_k` |
//! | [`exponential_huffman`] | `D^beta (a_1 + ... + a_D)` | `sum w_k D^(beta l_k)` |
//! | [`max_huffman`] | `D max(a_1, ..., a_D)` | `max_k w_k D^(l_k)` |
//! | [`limit_huffman`] | as above, ties by attaining mass | same, then that mass |
//!
//! Inputs with `(M - 1) mod (D - 1) != 0` are padded with zero-weight dummy
//! leaves, which are dropped from the output. Ties are broken by creation
//! order: dummies, then the inputs in index order, then merged nodes.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::math::log_sum_exp;
use crate::primitives::{kraft_sum, Arity, CodeLengths, Distribution, PrefixCode, KRAFT_TOL};

/// A node weight in the merge loop.
trait MergeKey: Copy {
    fn key_cmp(&self, other: &Self) -> Ordering;
}

#[derive(Clone, Copy)]
struct Linear(f64);

impl MergeKey for Linear {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Natural log of the weight; used where weights grow like `D^(beta * depth)`.
#[derive(Clone, Copy)]
struct LogWeight(f64);

impl MergeKey for LogWeight {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// `mantissa * D^exp` with an integer exponent, so that `D * max(...)` is an
/// exact operation and ties such as `2 * 0.3` vs `0.6` survive.
#[derive(Clone, Copy)]
struct Scaled {
    mantissa: f64,
    exp: i32,
    base: f64,
}

impl MergeKey for Scaled {
    fn key_cmp(&self, other: &Self) -> Ordering {
        if self.mantissa == 0.0 || other.mantissa == 0.0 {
            return self.mantissa.total_cmp(&other.mantissa);
        }
        let diff = self.exp - other.exp;
        match diff.cmp(&0) {
            Ordering::Equal => self.mantissa.total_cmp(&other.mantissa),
            Ordering::Greater => {
                let s = self.mantissa * self.base.powi(diff);
                if s.is_infinite() {
                    Ordering::Greater
                } else {
                    s.total_cmp(&other.mantissa)
                }
            }
            Ordering::Less => {
                let o = other.mantissa * self.base.powi(-diff);
                if o.is_infinite() {
                    Ordering::Less
                } else {
                    self.mantissa.total_cmp(&o)
                }
            }
        }
    }
}

/// Large-`beta` ordering of exponential Huffman on `mu^(beta + 1)`: a subtree
/// is ranked by `top = max_i mu_i D^(d_i)` and then by the mass `sum mu_i`
/// of the leaves attaining it.
#[derive(Clone, Copy)]
struct Limit {
    top: Scaled,
    mass: f64,
}

impl MergeKey for Limit {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.top
            .key_cmp(&other.top)
            .then_with(|| self.mass.total_cmp(&other.mass))
    }
}

struct Entry<K> {
    key: K,
    order: usize,
    node: usize,
}

impl<K: MergeKey> PartialEq for Entry<K> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<K: MergeKey> Eq for Entry<K> {}

impl<K: MergeKey> PartialOrd for Entry<K> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<K: MergeKey> Ord for Entry<K> {
    // reversed: BinaryHeap is a max-heap and we pop the smallest
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .key
            .key_cmp(&self.key)
            .then_with(|| other.order.cmp(&self.order))
    }
}

/// Number of zero-weight leaves needed so that `(M' - 1) mod (D - 1) == 0`.
pub fn dummy_count(m: usize, arity: Arity) -> usize {
    let d1 = arity.get() as usize - 1;
    (d1 - (m - 1) % d1) % d1
}

/// Runs the D-ary merge loop and returns the depth of each input leaf.
fn merge_depths<K: MergeKey>(
    leaves: Vec<K>,
    dummy: K,
    arity: Arity,
    merge: impl Fn(&[K]) -> K,
) -> Vec<u32> {
    let m = leaves.len();
    let d = arity.get() as usize;
    let pad = dummy_count(m, arity);
    // node ids: inputs 0..m, dummies m..m+pad, merged nodes after that
    let mut parent: Vec<usize> = vec![usize::MAX; m + pad];
    let mut heap = BinaryHeap::with_capacity(m + pad);
    for i in 0..pad {
        heap.push(Entry { key: dummy, order: i, node: m + i });
    }
    for (i, k) in leaves.into_iter().enumerate() {
        heap.push(Entry { key: k, order: pad + i, node: i });
    }
    let mut next_order = m + pad;
    let mut children = Vec::with_capacity(d);
    let mut keys = Vec::with_capacity(d);
    while heap.len() > 1 {
        children.clear();
        keys.clear();
        for _ in 0..d {
            let e = heap.pop().expect("padding keeps the heap size aligned");
            children.push(e.node);
            keys.push(e.key);
        }
        let id = parent.len();
        parent.push(usize::MAX);
        for &c in &children {
            parent[c] = id;
        }
        heap.push(Entry { key: merge(&keys), order: next_order, node: id });
        next_order += 1;
    }
    // parents are created after their children, so walk ids downwards
    let mut depth = vec![0u32; parent.len()];
    for id in (0..parent.len()).rev() {
        if parent[id] != usize::MAX {
            depth[id] = depth[parent[id]] + 1;
        }
    }
    depth.truncate(m);
    depth
}

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.len() < 2 {
        return Err(Error::TooFewSymbols(weights.len()));
    }
    if let Some(index) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::NonFiniteWeight { index });
    }
    Ok(())
}

/// Standard D-ary Huffman code lengths.
pub fn huffman(weights: &[f64], arity: Arity) -> Result<CodeLengths> {
    check_weights(weights)?;
    let depths = merge_depths(
        weights.iter().map(|&w| Linear(w)).collect(),
        Linear(0.0),
        arity,
        |ks| Linear(ks.iter().map(|k| k.0).sum()),
    );
    CodeLengths::integer(depths, arity)
}

/// Lengths minimizing `sum_k w_k D^(beta l_k)` for `beta > 0`.
pub fn exponential_huffman(weights: &[f64], beta: f64, arity: Arity) -> Result<CodeLengths> {
    check_weights(weights)?;
    let logs: Vec<f64> = weights
        .iter()
        .map(|&w| if w > 0.0 { w.ln() } else { f64::NEG_INFINITY })
        .collect();
    exponential_huffman_log(&logs, beta, arity)
}

/// [`exponential_huffman`] on natural-log weights, for weights such as
/// `mu^(beta + 1)` that underflow in linear scale. `-inf` marks a zero weight.
pub fn exponential_huffman_log(log_weights: &[f64], beta: f64, arity: Arity) -> Result<CodeLengths> {
    if log_weights.len() < 2 {
        return Err(Error::TooFewSymbols(log_weights.len()));
    }
    if let Some(index) = log_weights.iter().position(|w| w.is_nan() || *w == f64::INFINITY) {
        return Err(Error::NonFiniteWeight { index });
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::DomainError(format!("beta must be positive, got {beta}")));
    }
    let lift = beta * arity.ln();
    let depths = merge_depths(
        log_weights.iter().map(|&w| LogWeight(w)).collect(),
        LogWeight(f64::NEG_INFINITY),
        arity,
        |ks| {
            let logs: Vec<f64> = ks.iter().map(|k| k.0).collect();
            LogWeight(log_sum_exp(&logs) + lift)
        },
    );
    CodeLengths::integer(depths, arity)
}

/// Lengths minimizing `max_k w_k D^(l_k)`, i.e. the maximal pointwise
/// redundancy `max_k (l_k + log_D w_k)` when `w` is a distribution.
pub fn max_huffman(weights: &[f64], arity: Arity) -> Result<CodeLengths> {
    check_weights(weights)?;
    if weights.iter().all(|&w| w == 0.0) {
        return Err(Error::AllZeroWeights);
    }
    let base = arity.as_f64();
    let depths = merge_depths(
        weights
            .iter()
            .map(|&w| Scaled { mantissa: w, exp: 0, base })
            .collect(),
        Scaled { mantissa: 0.0, exp: 0, base },
        arity,
        |ks| {
            let top = ks
                .iter()
                .copied()
                .max_by(|a, b| a.key_cmp(b))
                .expect("merge sees D >= 2 children");
            Scaled { exp: top.exp + 1, ..top }
        },
    );
    CodeLengths::integer(depths, arity)
}

/// The `beta -> inf` limit of `exponential_huffman(xi(mu, beta), beta)`.
///
/// A minimax pointwise code for `mu`; among those, it leaves the least mass
/// on the symbols attaining `max_k mu_k D^(l_k)`.
pub fn limit_huffman(mu: &[f64], arity: Arity) -> Result<CodeLengths> {
    check_weights(mu)?;
    if mu.iter().all(|&w| w == 0.0) {
        return Err(Error::AllZeroWeights);
    }
    let base = arity.as_f64();
    let leaf = |w: f64| Limit {
        top: Scaled { mantissa: w, exp: 0, base },
        mass: w,
    };
    let depths = merge_depths(mu.iter().map(|&w| leaf(w)).collect(), leaf(0.0), arity, |ks| {
        let best = ks
            .iter()
            .map(|k| k.top)
            .max_by(|a, b| a.key_cmp(b))
            .expect("merge sees D >= 2 children");
        let mass = ks
            .iter()
            .filter(|k| k.top.key_cmp(&best) == Ordering::Equal)
            .map(|k| k.mass)
            .sum();
        Limit {
            top: Scaled { exp: best.exp + 1, ..best },
            mass,
        }
    });
    CodeLengths::integer(depths, arity)
}

/// `sum_k w_k l_k`.
pub fn linear_cost(weights: &[f64], lengths: &CodeLengths) -> f64 {
    weights.iter().zip(lengths.values()).map(|(w, l)| w * l).sum()
}

/// `ln sum_k w_k D^(beta l_k)`, evaluated in the log domain.
pub fn exp_cost_log(weights: &[f64], lengths: &CodeLengths, beta: f64) -> f64 {
    let lift = beta * lengths.arity().ln();
    let terms: Vec<f64> = weights
        .iter()
        .zip(lengths.values())
        .map(|(&w, &l)| if w > 0.0 { w.ln() + lift * l } else { f64::NEG_INFINITY })
        .collect();
    log_sum_exp(&terms)
}

/// `max_k (l_k + log_D w_k)` over the positive weights.
pub fn pointwise_cost(weights: &[f64], lengths: &CodeLengths) -> f64 {
    let ln_d = lengths.arity().ln();
    weights
        .iter()
        .zip(lengths.values())
        .filter(|(&w, _)| w > 0.0)
        .map(|(&w, &l)| l + w.ln() / ln_d)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `ceil(-log_D p_i)` with a little slack so exact powers of `D` are not
/// bumped up by rounding in the logarithm.
pub(crate) fn ceil_self_information(probs: &[f64], arity: Arity) -> Result<CodeLengths> {
    if let Some(index) = probs.iter().position(|&p| p <= 0.0) {
        return Err(Error::ZeroProbability { index });
    }
    let ln_d = arity.ln();
    let info: Vec<f64> = probs.iter().map(|p| -p.ln() / ln_d).collect();
    let snapped: Vec<u32> = info
        .iter()
        .map(|x| ((x - 1e-12).ceil() as u32).max(1))
        .collect();
    match CodeLengths::integer(snapped, arity) {
        Ok(c) => Ok(c),
        Err(Error::KraftViolation(_)) => {
            CodeLengths::integer(info.iter().map(|x| (x.ceil() as u32).max(1)).collect(), arity)
        }
        Err(e) => Err(e),
    }
}

/// Shannon code lengths `ceil(-log_D mu_i)`.
pub fn shannon_lengths(mu: &Distribution, arity: Arity) -> Result<CodeLengths> {
    ceil_self_information(mu.probs(), arity)
}

fn digit_char(d: u8) -> char {
    char::from_digit(u32::from(d), 36).expect("digit below 36")
}

/// Canonical codewords for integer lengths: symbols are ordered by
/// `(length, index)` and receive consecutive base-D values, left-aligned.
pub fn canonical_codewords(lengths: &CodeLengths) -> Result<PrefixCode> {
    let ints = lengths.as_integers().ok_or(Error::NotInteger)?;
    let k = kraft_sum(lengths);
    if k > 1.0 + KRAFT_TOL {
        return Err(Error::KraftViolation(k));
    }
    let d = lengths.arity().get();
    if d > 36 {
        return Err(Error::DomainError(format!(
            "codewords are written with digits 0-9a-z; arity {d} is too large"
        )));
    }
    let d = d as u8;
    let mut order: Vec<usize> = (0..ints.len()).collect();
    order.sort_by_key(|&i| (ints[i], i));

    let mut words = vec![String::new(); ints.len()];
    let mut current: Vec<u8> = Vec::new();
    let mut first = true;
    for &i in &order {
        if !first {
            // increment in base D; a carry out of the top digit means Kraft > 1
            let mut pos = current.len();
            loop {
                if pos == 0 {
                    return Err(Error::KraftViolation(k));
                }
                pos -= 1;
                current[pos] += 1;
                if current[pos] < d {
                    break;
                }
                current[pos] = 0;
            }
        }
        first = false;
        current.resize(ints[i] as usize, 0);
        words[i] = current.iter().map(|&x| digit_char(x)).collect();
    }
    PrefixCode::new(words, lengths.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn ms(c: &CodeLengths) -> Vec<u32> {
        c.multiset().unwrap()
    }

    /// Minimum of `cost` over all length vectors in `[1, lmax]^M` that satisfy Kraft.
    fn brute(m: usize, arity: Arity, lmax: u32, cost: impl Fn(&CodeLengths) -> f64) -> f64 {
        let mut best = f64::INFINITY;
        let mut v = vec![1u32; m];
        loop {
            if let Ok(c) = CodeLengths::integer(v.clone(), arity) {
                best = best.min(cost(&c));
            }
            let mut i = 0;
            loop {
                if i == m {
                    return best;
                }
                v[i] += 1;
                if v[i] <= lmax {
                    break;
                }
                v[i] = 1;
                i += 1;
            }
        }
    }

    #[test]
    fn huffman_examples() {
        assert_eq!(ms(&huffman(&[0.25; 4], Arity::BINARY).unwrap()), vec![2, 2, 2, 2]);
        let w = [0.4, 0.3, 0.2, 0.1];
        let c = huffman(&w, Arity::BINARY).unwrap();
        assert_abs_diff_eq!(linear_cost(&w, &c), 1.9, epsilon = 1e-12);
        let b = brute(4, Arity::BINARY, 4, |c| linear_cost(&w, c));
        assert_abs_diff_eq!(b, 1.9, epsilon = 1e-12);
        let c = huffman(&[0.5, 0.3, 0.2], Arity::TERNARY).unwrap();
        assert_eq!(c.as_integers().unwrap(), vec![1, 1, 1]);
        assert_eq!(huffman(&[0.5, 0.5], Arity::BINARY).unwrap().as_integers().unwrap(), vec![1, 1]);
    }

    #[test]
    fn ternary_padding() {
        assert_eq!(dummy_count(4, Arity::TERNARY), 1);
        assert_eq!(dummy_count(5, Arity::TERNARY), 0);
        assert_eq!(dummy_count(2, Arity::new(4).unwrap()), 2);
        let c = huffman(&[0.3, 0.3, 0.2, 0.2], Arity::TERNARY).unwrap();
        assert_eq!(ms(&c), vec![1, 1, 2, 2]);
        let c = huffman(&[0.6, 0.4], Arity::new(5).unwrap()).unwrap();
        assert_eq!(c.as_integers().unwrap(), vec![1, 1]);
    }

    #[test]
    fn exponential_reduces_to_huffman_as_beta_vanishes() {
        for w in [vec![0.4, 0.3, 0.2, 0.1], vec![0.05, 0.5, 0.2, 0.15, 0.1]] {
            assert_eq!(
                ms(&exponential_huffman(&w, 1e-9, Arity::BINARY).unwrap()),
                ms(&huffman(&w, Arity::BINARY).unwrap())
            );
        }
    }

    #[test]
    fn exponential_on_tilted_weights_matches_brute_force() {
        let xi = [0.16 / 0.3, 0.09 / 0.3, 0.04 / 0.3, 0.01 / 0.3];
        let c = exponential_huffman(&xi, 1.0, Arity::BINARY).unwrap();
        let b = brute(4, Arity::BINARY, 5, |c| exp_cost_log(&xi, c, 1.0));
        assert!((exp_cost_log(&xi, &c, 1.0) - b).abs() <= 1e-12);
    }

    #[test]
    fn uniform_weights_give_balanced_trees() {
        for beta in [0.1, 1.0, 30.0] {
            assert_eq!(ms(&exponential_huffman(&[1.0; 4], beta, Arity::BINARY).unwrap()), vec![2; 4]);
            assert_eq!(
                ms(&exponential_huffman(&[1.0; 5], beta, Arity::BINARY).unwrap()),
                vec![2, 2, 2, 3, 3]
            );
        }
    }

    #[test]
    fn exponential_survives_huge_beta() {
        let c = exponential_huffman(&[0.6, 0.3, 0.1], 1e3, Arity::BINARY).unwrap();
        assert_eq!(c.as_integers().unwrap(), vec![1, 2, 2]);
    }

    #[test]
    fn max_huffman_examples() {
        let c = max_huffman(&[0.25; 4], Arity::BINARY).unwrap();
        assert_eq!(ms(&c), vec![2; 4]);
        assert_abs_diff_eq!(pointwise_cost(&[0.25; 4], &c), 0.0, epsilon = 1e-15);

        let w = [0.6, 0.3, 0.1];
        let c = max_huffman(&w, Arity::BINARY).unwrap();
        assert_abs_diff_eq!(pointwise_cost(&w, &c), 1.2f64.log2(), epsilon = 1e-14);
        let b = brute(3, Arity::BINARY, 4, |c| pointwise_cost(&w, c));
        assert_abs_diff_eq!(b, 1.2f64.log2(), epsilon = 1e-14);

        let w = [0.4, 0.3, 0.2, 0.1];
        let c = max_huffman(&w, Arity::BINARY).unwrap();
        assert_abs_diff_eq!(pointwise_cost(&w, &c), 1.6f64.log2(), epsilon = 1e-14);
        let b = brute(4, Arity::BINARY, 5, |c| pointwise_cost(&w, c));
        assert_abs_diff_eq!(b, 1.6f64.log2(), epsilon = 1e-14);
    }

    #[test]
    fn kernel_errors() {
        assert_eq!(max_huffman(&[0.0, 0.0], Arity::BINARY), Err(Error::AllZeroWeights));
        assert_eq!(huffman(&[1.0], Arity::BINARY), Err(Error::TooFewSymbols(1)));
        assert_eq!(
            exponential_huffman(&[0.5, f64::NAN], 1.0, Arity::BINARY),
            Err(Error::NonFiniteWeight { index: 1 })
        );
        assert!(exponential_huffman(&[0.5, 0.5], 0.0, Arity::BINARY).is_err());
    }

    #[test]
    fn shannon_examples() {
        let s = |p: &[f64]| {
            shannon_lengths(&Distribution::new(p.to_vec()).unwrap(), Arity::BINARY)
                .unwrap()
                .as_integers()
                .unwrap()
        };
        assert_eq!(s(&[0.5, 0.25, 0.25]), vec![1, 2, 2]);
        assert_eq!(s(&[0.9, 0.1]), vec![1, 4]);
        assert_eq!(s(&[1.0 / 3.0; 3]), vec![2, 2, 2]);
        let t = shannon_lengths(&Distribution::new(vec![1.0 / 9.0; 9]).unwrap(), Arity::TERNARY).unwrap();
        assert_eq!(t.as_integers().unwrap(), vec![2; 9]);
        assert!(shannon_lengths(&Distribution::with_zeros(vec![1.0, 0.0]).unwrap(), Arity::BINARY).is_err());
    }

    #[test]
    fn canonical_examples() {
        let cw = |l: &[u32], d: u32| {
            canonical_codewords(&CodeLengths::integer(l.to_vec(), Arity::new(d).unwrap()).unwrap())
                .unwrap()
                .codewords()
                .to_vec()
        };
        assert_eq!(cw(&[1, 2, 2], 2), ["0", "10", "11"]);
        assert_eq!(cw(&[2, 2, 2, 2], 2), ["00", "01", "10", "11"]);
        assert_eq!(cw(&[1, 2, 3], 2), ["0", "10", "110"]);
        assert_eq!(cw(&[2, 1, 2], 2), ["10", "0", "11"]);
        assert_eq!(cw(&[1, 1, 2, 2, 2], 3), ["0", "1", "20", "21", "22"]);
        let ideal = CodeLengths::ideal(vec![1.5, 1.5], Arity::BINARY).unwrap();
        assert_eq!(canonical_codewords(&ideal), Err(Error::NotInteger));
    }

    #[test]
    fn long_codewords_do_not_overflow() {
        let mut l: Vec<u32> = (1..=150).collect();
        l.push(150);
        let code = canonical_codewords(&CodeLengths::integer(l, Arity::BINARY).unwrap()).unwrap();
        assert_eq!(code.codewords()[149].len(), 150);
    }

    fn weights() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.001f64..1.0, 2..9)
    }

    #[test]
    fn limit_huffman_breaks_pointwise_ties_by_mass() {
        let mu = [0.6, 0.3, 0.1];
        assert_eq!(ms(&limit_huffman(&mu, Arity::BINARY).unwrap()), vec![1, 2, 2]);
        // both (1,2,3,3) and (2,2,2,2) are minimax pointwise here
        let mu = [0.3, 0.3, 0.2, 0.2];
        let a = max_huffman(&mu, Arity::BINARY).unwrap();
        let b = limit_huffman(&mu, Arity::BINARY).unwrap();
        assert_abs_diff_eq!(pointwise_cost(&mu, &a), pointwise_cost(&mu, &b), epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn limit_huffman_is_the_large_beta_code(
            w in proptest::collection::vec(0.05f64..1.0, 2..8),
            d in 2u32..4,
        ) {
            let s: f64 = w.iter().sum();
            let mu = Distribution::new(w.iter().map(|x| x / s).collect()).unwrap();
            let arity = Arity::new(d).unwrap();
            let lim = limit_huffman(mu.probs(), arity).unwrap();
            let mx = max_huffman(mu.probs(), arity).unwrap();
            prop_assert!((pointwise_cost(mu.probs(), &lim) - pointwise_cost(mu.probs(), &mx)).abs() <= 1e-12);
            let beta = 1e4;
            let log_xi: Vec<f64> = mu.probs().iter().map(|p| (beta + 1.0) * p.ln()).collect();
            let big = exponential_huffman_log(&log_xi, beta, arity).unwrap();
            let lift = beta * arity.ln();
            let ln = |c: &CodeLengths| {
                let t: Vec<f64> = log_xi.iter().zip(c.values()).map(|(w, l)| w + lift * l).collect();
                log_sum_exp(&t)
            };
            // same code, or an exact tie in the exponential cost
            prop_assert!(big == lim || (ln(&big) - ln(&lim)).abs() <= 1e-9 * ln(&big).abs().max(1.0));
        }

        #[test]
        fn scale_invariance(w in weights(), c in prop::sample::select(vec![0.5, 2.0, 8.0, 1024.0]), beta in 0.3f64..4.0) {
            let scaled: Vec<f64> = w.iter().map(|x| x * c).collect();
            for a in [Arity::BINARY, Arity::TERNARY] {
                prop_assert_eq!(ms(&huffman(&w, a).unwrap()), ms(&huffman(&scaled, a).unwrap()));
                prop_assert_eq!(
                    ms(&exponential_huffman(&w, beta, a).unwrap()),
                    ms(&exponential_huffman(&scaled, beta, a).unwrap())
                );
                prop_assert_eq!(ms(&max_huffman(&w, a).unwrap()), ms(&max_huffman(&scaled, a).unwrap()));
            }
        }

        #[test]
        fn heavier_symbols_get_no_longer_words(w in weights(), beta in 0.3f64..6.0) {
            for a in [Arity::BINARY, Arity::TERNARY] {
                for c in [huffman(&w, a).unwrap(), exponential_huffman(&w, beta, a).unwrap(), max_huffman(&w, a).unwrap()] {
                    let l = c.values();
                    for i in 0..w.len() {
                        for j in 0..w.len() {
                            if w[i] > w[j] {
                                prop_assert!(l[i] <= l[j], "w={:?} l={:?}", w, l);
                            }
                        }
                    }
                    prop_assert!(canonical_codewords(&c).is_ok());
                    prop_assert!((kraft_sum(&c) - 1.0).abs() <= 1e-12 || a != Arity::BINARY);
                }
            }
        }
    }
}
