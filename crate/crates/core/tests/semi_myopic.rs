//! Dominance of the bidding-index strategy among semi-myopic strategies,
//! checked by exhaustive enumeration: on a short horizon with a fixed
//! opposing effective bid, no bid policy drawn from a dense grid earns more
//! discounted profit than the strategy that bids (B, B/p) each step.

use hybrid_auction_core::{
    bidding_index, BiddingGameState, DiscountFactor, IndexOptions, Prior,
};

struct Game {
    valuation: f64,
    advertiser_prior: Prior,
    auctioneer_prior: Prior,
    gamma: f64,
    r_star: f64,
    horizon: usize,
}

impl Game {
    fn state_at(&self, clicks: u64, steps: u64) -> (f64, f64) {
        let p = self.advertiser_prior.update(clicks, steps).unwrap().mean();
        let q = self.auctioneer_prior.update(clicks, steps).unwrap().mean();
        (p, q)
    }

    /// Expected discounted profit of the bidding-index strategy: recompute
    /// (W, B) at every state with the remaining horizon, win while
    /// W >= R*, pay R* per impression or R*/q per click.
    fn index_strategy_value(&self, clicks: u64, steps: u64) -> f64 {
        if steps as usize >= self.horizon {
            return 0.0;
        }
        let state = BiddingGameState {
            advertiser_prior: self.advertiser_prior.update(clicks, steps).unwrap(),
            auctioneer_prior: self.auctioneer_prior.update(clicks, steps).unwrap(),
        };
        let opts = IndexOptions {
            horizon: Some(self.horizon - steps as usize),
            tolerance: 1e-9,
            bracket_growth: 2.0,
        };
        let result = bidding_index(
            self.valuation,
            &state,
            DiscountFactor::new(self.gamma).unwrap(),
            |prior| prior.mean(),
            &opts,
        )
        .unwrap();
        if result.game_charge < self.r_star {
            return 0.0; // the phase is no longer worth winning
        }
        let (p, q) = self.state_at(clicks, steps);
        let step_profit = self.valuation * p - self.r_star * (p / q).min(1.0);
        step_profit
            + self.gamma
                * (p * self.index_strategy_value(clicks + 1, steps + 1)
                    + (1.0 - p) * self.index_strategy_value(clicks, steps + 1))
    }

    /// Best achievable expected discounted profit over all bid policies on
    /// the (m, c) grid, enumerated over the full history tree.
    fn enumerated_best(&self, clicks: u64, steps: u64, grid: &[f64]) -> f64 {
        if steps as usize >= self.horizon {
            return 0.0;
        }
        let (p, q) = self.state_at(clicks, steps);
        let mut best_step = f64::NEG_INFINITY;
        for &m in grid {
            for &c in grid {
                let r = m.max(c * q);
                if r < self.r_star {
                    continue; // losing ends the phase
                }
                let profit = if m > c * q {
                    self.valuation * p - self.r_star
                } else {
                    self.valuation * p - self.r_star * p / q
                };
                if profit > best_step {
                    best_step = profit;
                }
            }
        }
        if best_step == f64::NEG_INFINITY {
            return 0.0; // no grid bid can win
        }
        let continuation = self.gamma
            * (p * self.enumerated_best(clicks + 1, steps + 1, grid)
                + (1.0 - p) * self.enumerated_best(clicks, steps + 1, grid));
        (best_step + continuation).max(0.0)
    }
}

#[test]
fn no_grid_policy_beats_the_bidding_index_strategy() {
    let grid: Vec<f64> = (0..=40).map(|i| i as f64 * 2.0 / 40.0).collect();
    let priors = [
        (Prior::beta(2.0, 3.0).unwrap(), Prior::beta(2.0, 3.0).unwrap()),
        (Prior::beta(3.0, 2.0).unwrap(), Prior::beta(1.0, 1.0).unwrap()),
        (Prior::beta(1.0, 4.0).unwrap(), Prior::beta(2.0, 2.0).unwrap()),
    ];
    for (advertiser_prior, auctioneer_prior) in priors {
        for r_star in [0.05, 0.15, 0.25, 0.35] {
            let game = Game {
                valuation: 1.0,
                advertiser_prior,
                auctioneer_prior,
                gamma: 0.5,
                r_star,
                horizon: 4,
            };
            let strategy = game.index_strategy_value(0, 0);
            let enumerated = game.enumerated_best(0, 0, &grid);
            assert!(
                enumerated <= strategy + 1e-5,
                "grid policy beats the bidding index at R*={r_star}: \
                 {enumerated} > {strategy}"
            );
            assert!(strategy >= 0.0);
        }
    }
}
