//! Scenario files: a JSON document describing advertisers, the auctioneer's
//! index rule, discounts, slots, and the run parameters.
//!
//! ```json
//! {
//!   "name": "two-bidders",
//!   "advertisers": [
//!     {"valuation": 1.0, "strategy": "truthful", "prior": "beta:1,5", "true_ctr": 0.4},
//!     {"valuation": 0.8, "strategy": "explore", "prior": "beta:1,20", "true_ctr": 0.5, "epsilon": 0.1}
//!   ],
//!   "auctioneer": {"index": "gittins", "gamma_a": 0.5},
//!   "discounts": {"global_gamma": 0.9, "gamma_b": 0.5},
//!   "slots": {"theta": [1.0]},
//!   "run": {"rounds": 200, "trials": 100, "seed": 42}
//! }
//! ```
//!
//! Unknown keys are rejected. The per-advertiser `prior` is the auctioneer's
//! initial belief; the advertiser's own belief defaults to a point mass at
//! `true_ctr` when given (the well-informed case), otherwise to a mirror of
//! the auctioneer's prior (the uninformed case), and can be overridden with
//! `advertiser_prior`.

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use hybrid_auction_core::{
    AdvertiserSpec, AuctioneerRule, DiscountFactor, Prior, Scenario, SlotLayout, StrategySpec,
    UtilitySpec,
};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    name: String,
    advertisers: Vec<AdvertiserEntry>,
    auctioneer: AuctioneerEntry,
    discounts: DiscountsEntry,
    #[serde(default)]
    slots: Option<SlotsEntry>,
    run: RunEntry,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AdvertiserEntry {
    valuation: f64,
    strategy: String,
    /// The auctioneer's initial prior, as "point:p" or "beta:a,b".
    prior: String,
    #[serde(default)]
    advertiser_prior: Option<String>,
    #[serde(default)]
    true_ctr: Option<f64>,
    #[serde(default)]
    epsilon: Option<f64>,
    #[serde(default)]
    utility: Option<String>,
    #[serde(default)]
    lambda: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AuctioneerEntry {
    index: String,
    #[serde(default)]
    gamma_a: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DiscountsEntry {
    #[serde(default)]
    global_gamma: f64,
    #[serde(default)]
    gamma_b: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SlotsEntry {
    theta: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunEntry {
    rounds: usize,
    trials: usize,
    seed: u64,
}

/// Parse "point:p" or "beta:a,b" into a prior.
pub fn parse_prior(text: &str) -> Result<Prior> {
    let (kind, args) = text
        .split_once(':')
        .ok_or_else(|| anyhow!("expected \"point:p\" or \"beta:a,b\", got {text:?}"))?;
    match kind.trim() {
        "point" => {
            let p: f64 = args.trim().parse().context("point prior value")?;
            Ok(Prior::point(p)?)
        }
        "beta" => {
            let (a, b) = args
                .split_once(',')
                .ok_or_else(|| anyhow!("beta prior needs two parameters, got {args:?}"))?;
            let alpha: f64 = a.trim().parse().context("beta prior alpha")?;
            let beta: f64 = b.trim().parse().context("beta prior beta")?;
            Ok(Prior::beta(alpha, beta)?)
        }
        other => bail!("unknown prior kind {other:?}; expected \"point\" or \"beta\""),
    }
}

fn parse_strategy(entry: &AdvertiserEntry) -> Result<StrategySpec> {
    match entry.strategy.as_str() {
        "truthful" => Ok(StrategySpec::Truthful),
        "risk" => {
            let utility = match entry.utility.as_deref() {
                Some("neutral") | None => UtilitySpec::RiskNeutral,
                Some("averse") => UtilitySpec::ExponentialAverse {
                    lambda: entry
                        .lambda
                        .ok_or_else(|| anyhow!("risk strategy with utility \"averse\" needs lambda"))?,
                },
                Some("seeking") => UtilitySpec::ExponentialSeeking {
                    lambda: entry
                        .lambda
                        .ok_or_else(|| anyhow!("risk strategy with utility \"seeking\" needs lambda"))?,
                },
                Some(other) => bail!(
                    "unknown utility {other:?}; expected \"neutral\", \"averse\", or \"seeking\""
                ),
            };
            Ok(StrategySpec::Risk { utility })
        }
        "bidding_index" => Ok(StrategySpec::BiddingIndex),
        "explore" => Ok(StrategySpec::Explore {
            epsilon: entry
                .epsilon
                .ok_or_else(|| anyhow!("explore strategy needs epsilon"))?,
        }),
        other => bail!(
            "unknown strategy {other:?}; expected \"truthful\", \"risk\", \
             \"bidding_index\", or \"explore\""
        ),
    }
}

impl ScenarioFile {
    /// Parse a scenario document. Errors carry the line/column from the JSON
    /// parser or the field that failed validation.
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| anyhow!("scenario parse error: {e}"))
    }

    pub fn into_scenario(self) -> Result<Scenario> {
        let mut advertisers = Vec::with_capacity(self.advertisers.len());
        for (j, entry) in self.advertisers.iter().enumerate() {
            let build = || -> Result<AdvertiserSpec> {
                Ok(AdvertiserSpec {
                    valuation: entry.valuation,
                    strategy: parse_strategy(entry)?,
                    auctioneer_prior: parse_prior(&entry.prior)?,
                    advertiser_prior: entry
                        .advertiser_prior
                        .as_deref()
                        .map(parse_prior)
                        .transpose()?,
                    true_ctr: entry.true_ctr,
                })
            };
            advertisers.push(build().with_context(|| format!("advertiser {j}"))?);
        }

        let auctioneer = match self.auctioneer.index.as_str() {
            "mean" => AuctioneerRule::Mean,
            "gittins" => AuctioneerRule::Gittins(DiscountFactor::new(self.auctioneer.gamma_a)?),
            other => bail!("unknown auctioneer index {other:?}; expected \"mean\" or \"gittins\""),
        };

        let layout = match self.slots {
            Some(s) => SlotLayout::new(s.theta)?,
            None => SlotLayout::single(),
        };

        let scenario = Scenario {
            name: self.name,
            advertisers,
            auctioneer,
            global_gamma: DiscountFactor::new(self.discounts.global_gamma)
                .context("discounts.global_gamma")?,
            gamma_b: DiscountFactor::new(self.discounts.gamma_b).context("discounts.gamma_b")?,
            layout,
            rounds: self.run.rounds,
            trials: self.run.trials,
            seed: self.run.seed,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}
