//! Hybrid keyword auctions: advertisers submit a per-impression and a
//! per-click bid, the auctioneer publishes an index q summarizing its CTR
//! belief, ranks advertisers by the effective bid max(m, c q), and charges
//! the runner-up's effective bid per impression or per click depending on
//! which component of the winner's bid carried the max.
//!
//! The crate provides:
//! - [`prior`]: point and Beta CTR beliefs with conjugate updates;
//! - [`index`]: the Gittins index of a Beta belief and the semi-myopic
//!   bidding index (W, B) of the advertiser's stopping game;
//! - [`auction`]: the single-slot hybrid mechanism, the per-click baseline,
//!   and the laddered multi-slot generalization;
//! - [`strategy`]: truthful, risk-adjusted, bidding-index, and explore
//!   bidding;
//! - [`sim`]: a seeded Monte Carlo engine for repeated auctions plus the
//!   packaged revenue/exploration experiments.

pub mod auction;
pub mod error;
pub mod index;
pub mod numeric;
pub mod prior;
pub mod sim;
pub mod strategy;

pub use auction::{
    effective_bid, run_multi_slot, run_per_click_baseline, run_single_slot, AuctionOutcome, Bid,
    PricingMode, SlotAward, SlotLayout,
};
pub use error::{Error, Result};
pub use index::{
    bidding_index, gittins_index, AuctioneerRule, BiddingGameState, BiddingIndexResult,
    DiscountFactor, IndexOptions, MAX_HORIZON,
};
pub use prior::{BetaParams, Prior};
pub use sim::{
    experiment_explore, experiment_theorem2, experiment_typical_case, lemma3_ratio,
    run_simulation, AdvertiserSpec, ExploreStats, Mechanism, Metrics, RevenueComparison, RoundLog,
    Scenario, StrategySpec, SummaryStat, TrialState, TypicalCaseStats,
};
pub use strategy::{
    bidding_index_bid, explore_bid, risk_bid, risk_dominance_sweep, truthful_bid, ExplorePhase,
    RiskSweepRow, UtilitySpec,
};
