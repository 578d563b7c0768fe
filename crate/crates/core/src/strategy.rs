//! Bid construction for the advertiser archetypes: truthful myopic,
//! risk-utility myopic, semi-myopic bidding-index, and the certain
//! advertiser's two-phase explore strategy.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::auction::Bid;
use crate::error::{Error, Result};
use crate::index::{bidding_index, BiddingGameState, DiscountFactor, IndexOptions};
use crate::numeric::{bisect_nonneg_boundary, GaussLegendre};
use crate::prior::{BetaParams, Prior};

/// Number of Gauss-Legendre nodes used for expected-utility integrals.
pub const UTILITY_QUADRATURE_NODES: usize = 128;

/// Utility of single-step profit; fixes the advertiser's risk posture.
/// All variants are strictly increasing with U(0) = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtilitySpec {
    /// U(x) = x.
    RiskNeutral,
    /// U(x) = 1 - exp(-lambda x): concave, risk-averse.
    ExponentialAverse { lambda: f64 },
    /// U(x) = exp(lambda x) - 1: convex, risk-seeking.
    ExponentialSeeking { lambda: f64 },
}

impl UtilitySpec {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::RiskNeutral => x,
            Self::ExponentialAverse { lambda } => 1.0 - (-lambda * x).exp(),
            Self::ExponentialSeeking { lambda } => (lambda * x).exp() - 1.0,
        }
    }
}

/// The truthful myopic bid (v p, v): expected impression value per
/// impression, click value per click.
pub fn truthful_bid(valuation: f64, ctr: f64) -> Bid {
    Bid {
        per_impression: valuation * ctr,
        per_click: valuation,
    }
}

/// Expected utility of winning per impression at price `y`:
/// E[U(v P - y)] under the advertiser's prior, by fixed Gauss-Legendre
/// quadrature against the Beta density.
pub fn expected_bid_utility(
    valuation: f64,
    prior: &Prior,
    utility: &UtilitySpec,
    y: f64,
    rule: &GaussLegendre,
) -> f64 {
    match prior {
        Prior::Point(p) => utility.eval(valuation * p - y),
        Prior::Beta(b) => rule.integrate(0.0, 1.0, |x| b.density(x) * utility.eval(valuation * x - y)),
    }
}

/// The risk-adjusted per-impression component m*: the largest y at which
/// E[U(v P - y)] is still non-negative, found by bisection on [0, v].
/// Returns the bid (m*, v).
pub fn risk_bid(valuation: f64, prior: &Prior, utility: &UtilitySpec, tol: f64) -> Bid {
    let m_star = match prior {
        // no uncertainty: U(v p - y) >= 0 exactly when y <= v p
        Prior::Point(p) => valuation * p,
        Prior::Beta(_) => {
            let rule = GaussLegendre::new(UTILITY_QUADRATURE_NODES);
            bisect_nonneg_boundary(0.0, valuation, tol, |y| {
                expected_bid_utility(valuation, prior, utility, y, &rule)
            })
        }
    };
    Bid {
        per_impression: m_star,
        per_click: valuation,
    }
}

/// Phase of the explore strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExplorePhase {
    /// Overbidding per impression at v p (1 - epsilon) to feed the
    /// auctioneer impressions.
    Explore,
    /// The auctioneer's posterior mean has reached p (1 - epsilon); bid
    /// (0, v) from here on.
    Exploit,
}

/// The certain advertiser's explore-phase bid given the auctioneer's current
/// posterior. The returned phase is what the posterior alone dictates;
/// callers that re-enter each round must keep the transition one-way.
pub fn explore_bid(
    valuation: f64,
    true_ctr: f64,
    epsilon: f64,
    auctioneer_posterior: &Prior,
) -> (Bid, ExplorePhase) {
    let target = true_ctr * (1.0 - epsilon);
    if auctioneer_posterior.mean() < target {
        (
            Bid {
                per_impression: valuation * target,
                per_click: valuation,
            },
            ExplorePhase::Explore,
        )
    } else {
        (
            Bid {
                per_impression: 0.0,
                per_click: valuation,
            },
            ExplorePhase::Exploit,
        )
    }
}

/// The semi-myopic bidding-index bid (B, B / p).
pub fn bidding_index_bid(
    valuation: f64,
    state: &BiddingGameState,
    gamma_b: DiscountFactor,
    auctioneer_index: impl Fn(&Prior) -> f64,
    opts: &IndexOptions,
) -> Result<Bid> {
    let p = state.advertiser_prior.mean();
    if p <= 0.0 {
        return Err(Error::ZeroMeanPrior);
    }
    let result = bidding_index(valuation, state, gamma_b, auctioneer_index, opts)?;
    Ok(Bid {
        per_impression: result.bid_index,
        per_click: result.bid_index / p,
    })
}

/// One row of the risk-posture sweep: expected utilities of the per-click
/// and per-impression ways of winning at the opposing bid, plus the
/// break-even per-impression bid m*.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskSweepRow {
    pub instance: usize,
    pub utility: UtilitySpec,
    pub alpha: f64,
    pub beta: f64,
    pub valuation: f64,
    /// Opposing effective bid R, at most v E[P].
    pub opposing_bid: f64,
    /// E[U(v P - R P / p)]: winning on the per-click bid.
    pub eu_per_click: f64,
    /// E[U(v P - R)]: winning on the per-impression bid.
    pub eu_per_impression: f64,
    pub m_star: f64,
    /// v E[P], the risk-neutral break-even price.
    pub mean_value: f64,
}

/// Sweep the per-click vs per-impression utility comparison and the m*
/// computation over seeded random instances, for each utility in `utilities`.
///
/// Instances use integer Beta parameters so the 128-node quadrature is exact
/// and comparisons are limited only by bisection tolerance.
pub fn risk_dominance_sweep(
    count: usize,
    utilities: &[UtilitySpec],
    seed: u64,
) -> Vec<RiskSweepRow> {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rule = GaussLegendre::new(UTILITY_QUADRATURE_NODES);
    let mut rows = Vec::with_capacity(count * utilities.len());
    for instance in 0..count {
        let alpha = rng.random_range(1..=10) as f64;
        let beta = rng.random_range(1..=10) as f64;
        let valuation = rng.random_range(0.5..2.0);
        let prior = BetaParams::new(alpha, beta).unwrap();
        let p = prior.mean();
        let opposing_bid = rng.random_range(0.05..1.0) * valuation * p;
        for utility in utilities {
            let eu_per_impression = rule.integrate(0.0, 1.0, |x| {
                prior.density(x) * utility.eval(valuation * x - opposing_bid)
            });
            let eu_per_click = rule.integrate(0.0, 1.0, |x| {
                prior.density(x) * utility.eval(valuation * x - opposing_bid * x / p)
            });
            let bid = risk_bid(valuation, &Prior::Beta(prior), utility, 1e-9);
            rows.push(RiskSweepRow {
                instance,
                utility: *utility,
                alpha,
                beta,
                valuation,
                opposing_bid,
                eu_per_click,
                eu_per_impression,
                m_star: bid.per_impression,
                mean_value: valuation * p,
            });
        }
    }
    rows
}
