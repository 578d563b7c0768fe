//! Brute-force oracles for the acceptance suite. Each one recomputes a
//! quantity through a path independent of the library implementation:
//! full history-tree policy enumeration instead of lattice DP, closed-form
//! incomplete-beta identities instead of adaptive quadrature, and direct
//! order-statistic sampling instead of the auction mechanism.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;

/// Optimal value of the charged Bernoulli tossing game, walked over the full
/// binary outcome tree of the given depth with a max over retire/continue at
/// every history node. No lattice, no memoization; ties prefer continuing.
fn tree_value(
    clicks: f64,
    tosses: f64,
    alpha: f64,
    beta: f64,
    gamma: f64,
    charge: f64,
    remaining: u32,
) -> f64 {
    if remaining == 0 {
        return 0.0;
    }
    let mu = (alpha + clicks) / (alpha + beta + tosses);
    let continue_value = mu - charge
        + gamma
            * (mu * tree_value(clicks + 1.0, tosses + 1.0, alpha, beta, gamma, charge, remaining - 1)
                + (1.0 - mu)
                    * tree_value(clicks, tosses + 1.0, alpha, beta, gamma, charge, remaining - 1));
    if continue_value >= 0.0 {
        continue_value
    } else {
        0.0
    }
}

/// Game value with the first toss forced; the boundary charge where this
/// crosses zero is the (depth-truncated) index.
fn tree_first_toss_value(alpha: f64, beta: f64, gamma: f64, charge: f64, depth: u32) -> f64 {
    let mu = alpha / (alpha + beta);
    mu - charge
        + gamma
            * (mu * tree_value(1.0, 1.0, alpha, beta, gamma, charge, depth - 1)
                + (1.0 - mu) * tree_value(0.0, 1.0, alpha, beta, gamma, charge, depth - 1))
}

/// Depth-truncated index by exhaustive stopping-policy enumeration plus an
/// independent bisection loop.
pub fn tree_gittins_index(alpha: f64, beta: f64, gamma: f64, depth: u32, tol: f64) -> f64 {
    let mut lo = alpha / (alpha + beta);
    let mut hi = 1.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if tree_first_toss_value(alpha, beta, gamma, mid, depth) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// E[min(mu, w)]/mu for w ~ Beta(a, b) via the regularized incomplete beta
/// identity I_mu(a+1, b) + 1 - I_mu(a, b).
pub fn min_mean_ratio_closed_form(alpha: f64, beta: f64) -> f64 {
    let mu = alpha / (alpha + beta);
    statrs::function::beta::beta_reg(alpha + 1.0, beta, mu) + 1.0
        - statrs::function::beta::beta_reg(alpha, beta, mu)
}

/// Gain statistics by direct order-statistic sampling: draws n CTRs from
/// Beta(1, k) per trial and reports (E[p_(2)] / mu, Pr[p_(2) >= 1/2])
/// without going through the auction mechanism.
pub fn order_statistic_gain(k: u32, trials: usize, seed: u64) -> (f64, f64) {
    let n = 4usize.pow(k);
    let dist = rand_distr::Beta::new(1.0, k as f64).expect("valid parameters");
    let mu = 1.0 / (1.0 + k as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut second_sum = 0.0;
    let mut hits = 0usize;
    for _ in 0..trials {
        let mut top = f64::MIN;
        let mut second = f64::MIN;
        for _ in 0..n {
            let p: f64 = dist.sample(&mut rng);
            if p > top {
                second = top;
                top = p;
            } else if p > second {
                second = p;
            }
        }
        second_sum += second;
        if second >= 0.5 {
            hits += 1;
        }
    }
    let mean_second = second_sum / trials as f64;
    (mean_second / mu, hits as f64 / trials as f64)
}

/// Seeded uniform grid helper: `count` evenly spaced points on [lo, hi].
pub fn grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

/// Random Beta parameter pairs in [low, high], seeded.
pub fn random_beta_pairs(count: usize, low: f64, high: f64, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (rng.random_range(low..high), rng.random_range(low..high)))
        .collect()
}
