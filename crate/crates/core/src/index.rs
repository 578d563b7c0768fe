//! Index computations: the Gittins index of a Beta belief and the bidding
//! index (W, B) of the advertiser's stopping game against a published
//! auctioneer index.
//!
//! Both indices are boundary values of a monotone family of optimal-stopping
//! games: charge the player G (resp. W) per step, truncate the discounted
//! game at a horizon where the tail is below tolerance, evaluate the optimal
//! value by backward induction over the (clicks, impressions) lattice, and
//! bisect on the charge. The first step is forced, which makes the bisected
//! value strictly decreasing in the charge and the root unique.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::bisect_nonneg_boundary;
use crate::prior::{BetaParams, Prior};

/// Hard cap on the dynamic-programming truncation depth.
pub const MAX_HORIZON: usize = 400;

/// A per-step discount factor, strictly below 1 so infinite-horizon sums
/// converge.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct DiscountFactor(f64);

impl DiscountFactor {
    pub const ZERO: DiscountFactor = DiscountFactor(0.0);

    pub fn new(gamma: f64) -> Result<Self> {
        if (0.0..1.0).contains(&gamma) {
            Ok(Self(gamma))
        } else {
            Err(Error::InvalidDiscount(gamma))
        }
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for DiscountFactor {
    type Error = Error;
    fn try_from(gamma: f64) -> Result<Self> {
        Self::new(gamma)
    }
}

impl From<DiscountFactor> for f64 {
    fn from(g: DiscountFactor) -> f64 {
        g.0
    }
}

/// Numerical controls for the index computations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexOptions {
    /// Truncation depth of the value recursion. `None` derives the smallest
    /// depth whose discounted tail is below `tolerance`, capped at
    /// [`MAX_HORIZON`].
    pub horizon: Option<usize>,
    /// Bisection stop width on the charge.
    pub tolerance: f64,
    /// Multiplier used when expanding the upper bisection bracket.
    pub bracket_growth: f64,
}

impl Default for IndexOptions {
    fn default() -> Self {
        Self {
            horizon: None,
            tolerance: 1e-6,
            bracket_growth: 2.0,
        }
    }
}

impl IndexOptions {
    pub fn with_tolerance(tolerance: f64) -> Self {
        Self {
            tolerance,
            ..Self::default()
        }
    }

    /// Truncation depth H such that gamma^H * scale / (1 - gamma) < tolerance
    /// when auto-chosen; `scale` bounds the per-step payoff.
    pub fn effective_horizon(&self, gamma: DiscountFactor, payoff_scale: f64) -> usize {
        if let Some(h) = self.horizon {
            return h.max(1);
        }
        let g = gamma.value();
        if g <= 0.0 {
            return 1;
        }
        let target = self.tolerance * (1.0 - g) / payoff_scale.max(1.0);
        let h = (target.ln() / g.ln()).ceil();
        if h.is_finite() && h > 0.0 {
            (h as usize).clamp(1, MAX_HORIZON)
        } else {
            1
        }
    }
}

/// Gittins index of a Beta belief: the largest per-toss charge at which an
/// optimal retire-anytime tossing policy (reward 1 per click, discount
/// `gamma`) still breaks even. Equals the mean when `gamma` is 0 and is
/// never below it.
pub fn gittins_index(prior: &BetaParams, gamma: DiscountFactor, opts: &IndexOptions) -> f64 {
    let mean = prior.mean();
    if gamma.value() == 0.0 {
        // myopic: only the first toss matters, so the index collapses to the mean
        return mean;
    }
    let horizon = opts.effective_horizon(gamma, 1.0);
    bisect_nonneg_boundary(mean, 1.0, opts.tolerance, |charge| {
        gittins_first_toss_value(prior, gamma, charge, horizon)
    })
}

/// Value of the charged tossing game when the first toss is forced and play
/// is optimal afterwards. Strictly decreasing in `charge`, which makes it
/// the bisection target for [`gittins_index`].
///
/// States live on the (clicks, tosses) lattice; the value is zero at the
/// truncation horizon.
pub fn gittins_first_toss_value(
    prior: &BetaParams,
    gamma: DiscountFactor,
    charge: f64,
    horizon: usize,
) -> f64 {
    let (a0, b0) = (prior.alpha(), prior.beta());
    let g = gamma.value();
    // next[n] holds V at (tosses = t + 1, clicks = n)
    let mut next = vec![0.0; horizon + 1];
    for t in (1..horizon).rev() {
        let mut cur = vec![0.0; t + 1];
        for (n, slot) in cur.iter_mut().enumerate() {
            let mu = (a0 + n as f64) / (a0 + b0 + t as f64);
            let continue_value = mu - charge + g * (mu * next[n + 1] + (1.0 - mu) * next[n]);
            *slot = continue_value.max(0.0);
        }
        next = cur;
    }
    let mu0 = a0 / (a0 + b0);
    mu0 - charge + g * (mu0 * next[1] + (1.0 - mu0) * next[0])
}

/// The advertiser/auctioneer belief pair of the bidding game. Both priors
/// update on the same observed click history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiddingGameState {
    /// The advertiser's own belief (trusted: it drives the game's
    /// click dynamics).
    pub advertiser_prior: Prior,
    /// The advertiser's mirror of the auctioneer's belief, from which the
    /// published index q is recomputed at every state.
    pub auctioneer_prior: Prior,
}

/// Output of the bidding-game computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiddingIndexResult {
    /// Largest per-step charge W at which the stop-anytime game still breaks
    /// even; the threshold against the opposing effective bid.
    pub game_charge: f64,
    /// The bidding index B = W * min(1, p0/q0): the largest per-impression
    /// price worth paying right now.
    pub bid_index: f64,
}

/// Compute the bidding index of the stopping game in which continuing earns
/// `valuation * p_t` and costs `W * min(1, p_t / q_t)` per impression, with
/// both beliefs updating on the advertiser's own click law.
///
/// `auctioneer_index` recomputes the published index q from the auctioneer's
/// posterior; it must be positive on every reachable state.
pub fn bidding_index(
    valuation: f64,
    state: &BiddingGameState,
    gamma_b: DiscountFactor,
    auctioneer_index: impl Fn(&Prior) -> f64,
    opts: &IndexOptions,
) -> Result<BiddingIndexResult> {
    let p0 = state.advertiser_prior.mean();
    if p0 <= 0.0 {
        return Err(Error::ZeroMeanPrior);
    }
    let horizon = opts.effective_horizon(gamma_b, valuation.max(1.0));
    let tables = GameTables::build(state, &auctioneer_index, horizon)?;
    let pay_ratio0 = tables.pay_ratio[0][0];

    if valuation <= 0.0 {
        return Ok(BiddingIndexResult {
            game_charge: 0.0,
            bid_index: 0.0,
        });
    }

    // Expand the upper bracket from the valuation until the forced-first-step
    // value goes negative; it always does because the per-step payment ratio
    // is positive on reachable states.
    let mut lo = 0.0;
    let mut hi = valuation.max(opts.tolerance);
    for _ in 0..4096 {
        let value = tables.first_step_value(valuation, gamma_b, hi);
        if value < 0.0 {
            break;
        }
        lo = hi;
        hi *= opts.bracket_growth.max(1.5);
        if !hi.is_finite() {
            break;
        }
    }
    let game_charge = bisect_nonneg_boundary(lo, hi, opts.tolerance, |w| {
        tables.first_step_value(valuation, gamma_b, w)
    });
    Ok(BiddingIndexResult {
        game_charge,
        bid_index: game_charge * pay_ratio0,
    })
}

/// Per-state data of the bidding game, precomputed once so that each
/// bisection step is a plain backward induction.
struct GameTables {
    /// mean of the advertiser's posterior, rows indexed by impressions t,
    /// entries by clicks n
    ctr: Vec<Vec<f64>>,
    /// min(1, p/q) per state
    pay_ratio: Vec<Vec<f64>>,
    /// whether the state is reachable under the advertiser's click law
    reachable: Vec<Vec<bool>>,
}

impl GameTables {
    fn build(
        state: &BiddingGameState,
        auctioneer_index: &impl Fn(&Prior) -> f64,
        horizon: usize,
    ) -> Result<Self> {
        let mut ctr = Vec::with_capacity(horizon);
        let mut pay_ratio = Vec::with_capacity(horizon);
        let mut reachable = vec![vec![false; 1]; 1];
        reachable[0][0] = true;

        for t in 0..horizon {
            let mut ctr_row = vec![0.0; t + 1];
            let mut ratio_row = vec![0.0; t + 1];
            let mut next_reach = vec![false; t + 2];
            for n in 0..=t {
                if !reachable[t][n] {
                    continue;
                }
                let advertiser = state.advertiser_prior.update(n as u64, t as u64)?;
                let auctioneer = state.auctioneer_prior.update(n as u64, t as u64)?;
                let p = advertiser.mean();
                let q = auctioneer_index(&auctioneer);
                if q <= 0.0 {
                    return Err(Error::ZeroIndexInGame {
                        clicks: n as u64,
                        impressions: t as u64,
                    });
                }
                ctr_row[n] = p;
                ratio_row[n] = (p / q).min(1.0);
                if p > 0.0 {
                    next_reach[n + 1] = true;
                }
                if p < 1.0 {
                    next_reach[n] = true;
                }
            }
            ctr.push(ctr_row);
            pay_ratio.push(ratio_row);
            reachable.push(next_reach);
        }
        reachable.truncate(horizon.max(1));
        Ok(Self {
            ctr,
            pay_ratio,
            reachable,
        })
    }

    /// Game value with the first step forced and optimal stopping afterwards;
    /// strictly decreasing in the charge `w`.
    fn first_step_value(&self, valuation: f64, gamma_b: DiscountFactor, w: f64) -> f64 {
        let horizon = self.ctr.len();
        let g = gamma_b.value();
        let mut next = vec![0.0; horizon + 1];
        for t in (1..horizon).rev() {
            let mut cur = vec![0.0; t + 1];
            for (n, slot) in cur.iter_mut().enumerate() {
                if !self.reachable[t][n] {
                    continue;
                }
                let p = self.ctr[t][n];
                let k = self.pay_ratio[t][n];
                let continue_value =
                    valuation * p - w * k + g * (p * next[n + 1] + (1.0 - p) * next[n]);
                *slot = continue_value.max(0.0);
            }
            next = cur;
        }
        let p0 = self.ctr[0][0];
        let k0 = self.pay_ratio[0][0];
        valuation * p0 - w * k0 + g * (p0 * next[1] + (1.0 - p0) * next[0])
    }
}

/// The published auctioneer index rule: how a posterior is condensed into
/// the scalar q used to rank and price bids.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AuctioneerRule {
    /// Posterior mean (a myopic auctioneer).
    Mean,
    /// Gittins index at the auctioneer's discount factor.
    Gittins(DiscountFactor),
}

impl AuctioneerRule {
    pub fn index(&self, prior: &Prior, opts: &IndexOptions) -> f64 {
        match (self, prior) {
            // zero variance: the index equals the mean for any discount
            (_, Prior::Point(p)) => *p,
            (Self::Mean, _) => prior.mean(),
            (Self::Gittins(gamma), Prior::Beta(b)) => gittins_index(b, *gamma, opts),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniform() -> BetaParams {
        BetaParams::uniform()
    }

    #[test]
    fn myopic_index_is_the_mean_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let a = rng.random_range(0.5..40.0);
            let b = rng.random_range(0.5..40.0);
            let prior = BetaParams::new(a, b).unwrap();
            let idx = gittins_index(&prior, DiscountFactor::ZERO, &IndexOptions::default());
            assert_eq!(idx, prior.mean());
        }
    }

    #[test]
    fn uniform_index_at_half_discount() {
        // Frozen from the depth-20 exhaustive stopping-policy oracle in the
        // acceptance suite.
        let opts = IndexOptions {
            horizon: Some(20),
            tolerance: 1e-7,
            ..IndexOptions::default()
        };
        let idx = gittins_index(&uniform(), DiscountFactor::new(0.5).unwrap(), &opts);
        assert!(idx > 0.5, "discounting must lift the index above the mean");
        assert!(
            (idx - 0.559_018_8).abs() < 5e-6,
            "index drifted from the frozen oracle value: {idx}"
        );
    }

    #[test]
    fn index_dominates_mean_and_grows_with_gamma() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let opts = IndexOptions::default();
        for _ in 0..20 {
            let prior =
                BetaParams::new(rng.random_range(0.5..20.0), rng.random_range(0.5..20.0)).unwrap();
            let mut prev = prior.mean();
            for step in 0..=9 {
                let gamma = DiscountFactor::new(0.1 * step as f64).unwrap();
                let idx = gittins_index(&prior, gamma, &opts);
                assert!(idx >= prior.mean() - 1e-12);
                assert!(
                    idx >= prev - 2.0 * opts.tolerance,
                    "index fell from {prev} to {idx} at gamma {gamma:?}"
                );
                prev = idx;
            }
        }
    }

    #[test]
    fn sharpening_the_prior_lowers_the_index() {
        let gamma = DiscountFactor::new(0.5).unwrap();
        let opts = IndexOptions::default();
        let mut prev = f64::INFINITY;
        for k in [1.0, 2.0, 4.0, 8.0] {
            let prior = BetaParams::new(2.0 * k, 3.0 * k).unwrap();
            let idx = gittins_index(&prior, gamma, &opts);
            assert!(
                idx <= prev + 2.0 * opts.tolerance,
                "index rose under sharpening: {idx} > {prev}"
            );
            prev = idx;
        }
    }

    #[test]
    fn horizon_extension_is_below_tolerance() {
        let gamma = DiscountFactor::new(0.6).unwrap();
        let opts = IndexOptions::default();
        let auto = opts.effective_horizon(gamma, 1.0);
        for prior in [uniform(), BetaParams::new(2.0, 3.0).unwrap()] {
            let base = gittins_index(
                &prior,
                gamma,
                &IndexOptions {
                    horizon: Some(auto),
                    ..opts
                },
            );
            let extended = gittins_index(
                &prior,
                gamma,
                &IndexOptions {
                    horizon: Some(auto + 10),
                    ..opts
                },
            );
            assert!((base - extended).abs() < opts.tolerance);
        }
    }

    #[test]
    fn game_value_decreases_in_the_charge() {
        let gamma = DiscountFactor::new(0.7).unwrap();
        let mut prev = f64::INFINITY;
        for step in 0..40 {
            let charge = step as f64 / 40.0;
            let v = gittins_first_toss_value(&uniform(), gamma, charge, 60);
            assert!(v < prev, "value not strictly decreasing at charge {charge}");
            prev = v;
        }
    }

    #[test]
    fn myopic_bidding_index_is_the_truthful_value() {
        // gamma_b = 0 collapses the game to one step: W = v p / min(1, p/q)
        // and B = v p.
        let state = BiddingGameState {
            advertiser_prior: Prior::beta(2.0, 3.0).unwrap(),
            auctioneer_prior: Prior::beta(1.0, 4.0).unwrap(),
        };
        let opts = IndexOptions::with_tolerance(1e-9);
        let r = bidding_index(1.5, &state, DiscountFactor::ZERO, |q| q.mean(), &opts).unwrap();
        let p0 = 0.4;
        assert!((r.bid_index - 1.5 * p0).abs() < 1e-8);
    }

    #[test]
    fn shared_prior_reduces_to_gittins() {
        let prior = Prior::beta(2.0, 5.0).unwrap();
        let state = BiddingGameState {
            advertiser_prior: prior,
            auctioneer_prior: prior,
        };
        let gamma = DiscountFactor::new(0.6).unwrap();
        let opts = IndexOptions::with_tolerance(1e-7);
        let r = bidding_index(1.0, &state, gamma, |q| q.mean(), &opts).unwrap();
        let g = gittins_index(&BetaParams::new(2.0, 5.0).unwrap(), gamma, &opts);
        assert!(
            (r.game_charge - g).abs() < 2.0 * opts.tolerance,
            "W {} vs Gittins {g}",
            r.game_charge
        );
    }

    #[test]
    fn certain_advertiser_with_low_auctioneer_index() {
        // q_t <= p everywhere: the payment ratio is 1 and B = v p.
        let p = 0.6;
        let state = BiddingGameState {
            advertiser_prior: Prior::point(p).unwrap(),
            auctioneer_prior: Prior::beta(1.0, 9.0).unwrap(),
        };
        let opts = IndexOptions::with_tolerance(1e-8);
        let r = bidding_index(
            2.0,
            &state,
            DiscountFactor::new(0.5).unwrap(),
            |q| q.mean().min(p),
            &opts,
        )
        .unwrap();
        assert!((r.bid_index - 2.0 * p).abs() < 1e-6);
    }

    #[test]
    fn certain_advertiser_with_decreasing_overestimate() {
        // q_t >= p and nonincreasing: W = v q_0 and B = v p.
        let p = 0.4;
        let state = BiddingGameState {
            advertiser_prior: Prior::point(p).unwrap(),
            auctioneer_prior: Prior::beta(1.0, 1.0).unwrap(),
        };
        let schedule = move |prior: &Prior| match prior {
            Prior::Beta(b) => {
                let t = b.alpha() + b.beta() - 2.0;
                p * (1.0 + 0.5f64.powf(t + 1.0))
            }
            Prior::Point(q) => *q,
        };
        let opts = IndexOptions::with_tolerance(1e-8);
        let r = bidding_index(
            1.0,
            &state,
            DiscountFactor::new(0.5).unwrap(),
            schedule,
            &opts,
        )
        .unwrap();
        assert!((r.game_charge - 1.5 * p).abs() < 1e-6, "W {}", r.game_charge);
        assert!((r.bid_index - p).abs() < 1e-6, "B {}", r.bid_index);
    }

    #[test]
    fn zero_auctioneer_index_is_rejected() {
        let state = BiddingGameState {
            advertiser_prior: Prior::beta(1.0, 1.0).unwrap(),
            auctioneer_prior: Prior::beta(1.0, 1.0).unwrap(),
        };
        let err = bidding_index(
            1.0,
            &state,
            DiscountFactor::new(0.3).unwrap(),
            |_| 0.0,
            &IndexOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::ZeroIndexInGame { .. }));
    }

    #[test]
    fn zero_mean_prior_is_rejected() {
        let state = BiddingGameState {
            advertiser_prior: Prior::point(0.0).unwrap(),
            auctioneer_prior: Prior::beta(1.0, 1.0).unwrap(),
        };
        let err = bidding_index(
            1.0,
            &state,
            DiscountFactor::ZERO,
            |q| q.mean(),
            &IndexOptions::default(),
        )
        .unwrap_err();
        assert_eq!(err, Error::ZeroMeanPrior);
    }

    #[test]
    fn bid_index_identity() {
        let state = BiddingGameState {
            advertiser_prior: Prior::beta(3.0, 2.0).unwrap(),
            auctioneer_prior: Prior::beta(1.0, 2.0).unwrap(),
        };
        let opts = IndexOptions::default();
        let r = bidding_index(
            1.2,
            &state,
            DiscountFactor::new(0.4).unwrap(),
            |q| q.mean(),
            &opts,
        )
        .unwrap();
        let p0 = state.advertiser_prior.mean();
        let q0 = state.auctioneer_prior.mean();
        assert_eq!(r.bid_index, r.game_charge * (p0 / q0).min(1.0));
        assert!(r.bid_index >= 0.0);
    }
}
