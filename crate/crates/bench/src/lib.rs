//! Shared fixtures for the criterion benchmarks.

use hybrid_auction_core::{
    AdvertiserSpec, AuctioneerRule, Bid, DiscountFactor, Prior, Scenario, SlotLayout, StrategySpec,
};

/// A field of `n` hybrid bids with spread-out effective bids.
pub fn bid_field(n: usize) -> (Vec<Bid>, Vec<f64>) {
    let bids = (0..n)
        .map(|i| {
            let x = (i as f64 + 1.0) / n as f64;
            Bid {
                per_impression: 0.8 * x,
                per_click: 2.0 * (1.0 - 0.5 * x),
            }
        })
        .collect();
    let qs = (0..n).map(|i| 0.1 + 0.8 * (i as f64) / n as f64).collect();
    (bids, qs)
}

/// A small mixed-strategy scenario for end-to-end engine benchmarks.
pub fn demo_scenario(rounds: usize, trials: usize) -> Scenario {
    Scenario {
        name: "bench".into(),
        advertisers: vec![
            AdvertiserSpec {
                valuation: 1.0,
                strategy: StrategySpec::Truthful,
                auctioneer_prior: Prior::beta(1.0, 4.0).unwrap(),
                advertiser_prior: None,
                true_ctr: None,
            },
            AdvertiserSpec {
                valuation: 0.9,
                strategy: StrategySpec::Explore { epsilon: 0.1 },
                auctioneer_prior: Prior::beta(1.0, 20.0).unwrap(),
                advertiser_prior: None,
                true_ctr: Some(0.5),
            },
            AdvertiserSpec {
                valuation: 1.2,
                strategy: StrategySpec::BiddingIndex,
                auctioneer_prior: Prior::beta(2.0, 5.0).unwrap(),
                advertiser_prior: None,
                true_ctr: None,
            },
        ],
        auctioneer: AuctioneerRule::Mean,
        global_gamma: DiscountFactor::new(0.9).unwrap(),
        gamma_b: DiscountFactor::new(0.5).unwrap(),
        layout: SlotLayout::single(),
        rounds,
        trials,
        seed: 7,
    }
}
