use thiserror::Error;

/// Errors surfaced by prior updates, index computations, auctions, and the
/// simulation engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Beta parameters must be positive and finite: got alpha={alpha}, beta={beta}")]
    InvalidBetaParams { alpha: f64, beta: f64 },

    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("invalid observation: {clicks} clicks exceed {impressions} impressions")]
    InvalidObservation { clicks: u64, impressions: u64 },

    #[error("discount factor {0} outside [0, 1)")]
    InvalidDiscount(f64),

    #[error("bid components must be non-negative and finite: got ({per_impression}, {per_click})")]
    InvalidBid { per_impression: f64, per_click: f64 },

    #[error("auctioneer index must be non-negative and finite: got {0}")]
    InvalidIndexValue(f64),

    #[error("per-click price undefined: winner's auctioneer index is zero")]
    ZeroIndexPrice,

    #[error(
        "auctioneer index is zero at a reachable game state \
         ({clicks} clicks after {impressions} impressions)"
    )]
    ZeroIndexInGame { clicks: u64, impressions: u64 },

    #[error("advertiser prior has zero mean: per-click bid component undefined")]
    ZeroMeanPrior,

    #[error("auction requires at least one bid")]
    NoBidders,

    #[error("bids and auctioneer indices must have equal length ({bids} vs {indices})")]
    MismatchedInputs { bids: usize, indices: usize },

    #[error("invalid slot layout: {0}")]
    InvalidLayout(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

pub type Result<T> = std::result::Result<T, Error>;
