//! Repeated-auction Monte Carlo engine: runs rounds, samples clicks from the
//! per-trial true CTRs, updates beliefs, and accounts discounted revenue and
//! profit across independently seeded trials.

mod experiments;

pub use experiments::{
    experiment_explore, experiment_theorem2, experiment_typical_case, lemma3_ratio,
    typical_case_with_prior, ExploreStats, RevenueComparison, TypicalCaseStats,
};

use std::cell::RefCell;
use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::auction::{
    run_multi_slot, run_per_click_baseline, run_single_slot, AuctionOutcome, Bid, PricingMode,
    SlotLayout,
};
use crate::error::{Error, Result};
use crate::index::{
    gittins_index, AuctioneerRule, BiddingGameState, DiscountFactor, IndexOptions,
};
use crate::numeric::derive_seed;
use crate::prior::Prior;
use crate::strategy::{bidding_index_bid, explore_bid, risk_bid, truthful_bid, ExplorePhase, UtilitySpec};

/// Bisection tolerance used for strategy-internal computations (risk m*,
/// bidding index) inside the engine.
const STRATEGY_TOLERANCE: f64 = 1e-9;

/// Which advertiser archetype produces the bids.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategySpec {
    /// Bid (v p, v) with p the mean of the advertiser's own belief.
    Truthful,
    /// Bid (m*, v) with m* the break-even per-impression price under the
    /// given utility.
    Risk { utility: UtilitySpec },
    /// Bid (B, B/p) from the semi-myopic stopping game.
    BiddingIndex,
    /// Two-phase overbid at v p (1 - epsilon), then (0, v).
    Explore { epsilon: f64 },
}

/// One advertiser's configuration within a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvertiserSpec {
    pub valuation: f64,
    pub strategy: StrategySpec,
    /// The auctioneer's initial belief about this advertiser's CTR.
    pub auctioneer_prior: Prior,
    /// The advertiser's own initial belief. Defaults to a point mass at
    /// `true_ctr` when that is given, otherwise to a mirror of the
    /// auctioneer's prior (the uninformed advertiser).
    pub advertiser_prior: Option<Prior>,
    /// The advertisement's actual CTR. When absent, each trial draws one
    /// from the advertiser's effective prior.
    pub true_ctr: Option<f64>,
}

impl AdvertiserSpec {
    /// The advertiser's effective initial belief.
    pub fn effective_prior(&self) -> Prior {
        if let Some(p) = self.advertiser_prior {
            p
        } else if let Some(ctr) = self.true_ctr {
            Prior::Point(ctr)
        } else {
            self.auctioneer_prior
        }
    }
}

/// Full description of a repeated-auction experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub advertisers: Vec<AdvertiserSpec>,
    pub auctioneer: AuctioneerRule,
    /// Discount applied to the recorded revenue/profit streams.
    pub global_gamma: DiscountFactor,
    /// Discount used inside semi-myopic strategy computations.
    pub gamma_b: DiscountFactor,
    pub layout: SlotLayout,
    pub rounds: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidScenario(msg));
        if self.rounds == 0 {
            return fail("rounds must be at least 1".into());
        }
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.advertisers.is_empty() {
            return fail("at least one advertiser required".into());
        }
        for (j, ad) in self.advertisers.iter().enumerate() {
            if !(ad.valuation.is_finite() && ad.valuation >= 0.0) {
                return fail(format!("advertiser {j}: valuation must be non-negative"));
            }
            if let Some(ctr) = ad.true_ctr {
                if !(0.0..=1.0).contains(&ctr) {
                    return fail(format!("advertiser {j}: true_ctr must lie in [0, 1]"));
                }
            }
            match ad.strategy {
                StrategySpec::Explore { epsilon } => {
                    if !(epsilon > 0.0 && epsilon < 1.0) {
                        return fail(format!(
                            "advertiser {j}: explore requires epsilon in (0, 1)"
                        ));
                    }
                    let Some(ctr) = ad.true_ctr else {
                        return fail(format!("advertiser {j}: explore requires true_ctr"));
                    };
                    if ad.effective_prior() != Prior::Point(ctr) {
                        return fail(format!(
                            "advertiser {j}: explore requires a point belief at true_ctr"
                        ));
                    }
                }
                StrategySpec::BiddingIndex => {
                    if ad.effective_prior().mean() <= 0.0 {
                        return fail(format!(
                            "advertiser {j}: bidding_index requires a prior with positive mean"
                        ));
                    }
                }
                StrategySpec::Risk { utility } => {
                    let lambda = match utility {
                        UtilitySpec::RiskNeutral => None,
                        UtilitySpec::ExponentialAverse { lambda }
                        | UtilitySpec::ExponentialSeeking { lambda } => Some(lambda),
                    };
                    if let Some(l) = lambda {
                        if !(l.is_finite() && l > 0.0) {
                            return fail(format!("advertiser {j}: lambda must be positive"));
                        }
                    }
                }
                StrategySpec::Truthful => {}
            }
        }
        Ok(())
    }

    fn is_single_slot(&self) -> bool {
        self.layout.slots() == 1
    }
}

/// Which pricing mechanism a trial runs under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mechanism {
    /// The hybrid auction.
    Hybrid,
    /// The pure per-click auction the hybrid is compared against.
    PerClickOnly,
}

/// Full record of one auction round.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundLog {
    pub round: usize,
    pub indices: Vec<f64>,
    pub bids: Vec<Bid>,
    pub effective_bids: Vec<f64>,
    pub outcome: AuctionOutcome,
    /// Click realization per advertiser; None when not shown.
    pub clicks: Vec<Option<bool>>,
    /// Money owed by each advertiser for this round.
    pub payments: Vec<f64>,
    /// (advertiser belief, auctioneer belief) after the round's updates.
    pub posteriors: Vec<(Prior, Prior)>,
}

#[derive(Debug, Clone)]
enum StrategyState {
    Truthful,
    Risk(UtilitySpec),
    BiddingIndex,
    Explore { epsilon: f64, exploring: bool },
}

/// Explore-phase accounting for one advertiser in one trial.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ExploreTracker {
    /// Round at which the strategy switched to exploitation, if it did.
    pub switch_round: Option<usize>,
    /// Impressions won while exploring.
    pub impressions: u64,
    /// Clicks received while exploring.
    pub clicks: u64,
    /// Money paid while exploring.
    pub paid: f64,
}

#[derive(Debug, Clone)]
struct AdvertiserTrialState {
    valuation: f64,
    true_ctr: f64,
    own_prior: Prior,
    auctioneer_prior: Prior,
    strategy: StrategyState,
    explore: ExploreTracker,
}

/// Mutable state of one simulation trial. Rounds advance with
/// [`TrialState::run_round`]; all randomness comes from a stream derived
/// from (scenario seed, trial index).
pub struct TrialState {
    auctioneer: AuctioneerRule,
    layout: SlotLayout,
    gamma_b: DiscountFactor,
    index_opts: IndexOptions,
    mechanism: Mechanism,
    round: usize,
    click_rng: ChaCha8Rng,
    advertisers: Vec<AdvertiserTrialState>,
    gittins_cache: RefCell<HashMap<(u64, u64), f64>>,
}

impl TrialState {
    pub fn new(scenario: &Scenario, mechanism: Mechanism, trial: usize) -> Result<Self> {
        scenario.validate()?;
        // The CTR stream is shared by both mechanisms so paired trials face
        // identical advertisers; click streams stay separate.
        let mut ctr_rng = ChaCha8Rng::seed_from_u64(derive_seed(scenario.seed, trial as u64 * 3));
        let click_stream = match mechanism {
            Mechanism::Hybrid => 1,
            Mechanism::PerClickOnly => 2,
        };
        let click_rng =
            ChaCha8Rng::seed_from_u64(derive_seed(scenario.seed, trial as u64 * 3 + click_stream));

        let advertisers = scenario
            .advertisers
            .iter()
            .map(|spec| {
                let own_prior = spec.effective_prior();
                let true_ctr = spec
                    .true_ctr
                    .unwrap_or_else(|| own_prior.sample(&mut ctr_rng));
                AdvertiserTrialState {
                    valuation: spec.valuation,
                    true_ctr,
                    own_prior,
                    auctioneer_prior: spec.auctioneer_prior,
                    strategy: match spec.strategy {
                        StrategySpec::Truthful => StrategyState::Truthful,
                        StrategySpec::Risk { utility } => StrategyState::Risk(utility),
                        StrategySpec::BiddingIndex => StrategyState::BiddingIndex,
                        StrategySpec::Explore { epsilon } => StrategyState::Explore {
                            epsilon,
                            exploring: true,
                        },
                    },
                    explore: ExploreTracker::default(),
                }
            })
            .collect();

        Ok(Self {
            auctioneer: scenario.auctioneer,
            layout: scenario.layout.clone(),
            gamma_b: scenario.gamma_b,
            index_opts: IndexOptions::default(),
            mechanism,
            round: 0,
            click_rng,
            advertisers,
            gittins_cache: RefCell::new(HashMap::new()),
        })
    }

    /// The (advertiser belief, auctioneer belief) pair of advertiser `j`.
    pub fn priors(&self, j: usize) -> (Prior, Prior) {
        let ad = &self.advertisers[j];
        (ad.own_prior, ad.auctioneer_prior)
    }

    pub fn true_ctr(&self, j: usize) -> f64 {
        self.advertisers[j].true_ctr
    }

    pub fn explore_tracker(&self, j: usize) -> ExploreTracker {
        self.advertisers[j].explore
    }

    fn published_index(&self, prior: &Prior) -> f64 {
        eval_index(
            self.auctioneer,
            &self.index_opts,
            &self.gittins_cache,
            prior,
        )
    }

    /// Play one auction round: publish indices, collect bids, run the
    /// mechanism, sample clicks, charge, and update the displayed
    /// advertisers' beliefs.
    pub fn run_round(&mut self) -> Result<RoundLog> {
        let round = self.round;
        let n = self.advertisers.len();
        let indices: Vec<f64> = self
            .advertisers
            .iter()
            .map(|ad| self.published_index(&ad.auctioneer_prior))
            .collect();
        let (bids, explore_flags) = self.collect_bids(round)?;

        let outcome = match self.mechanism {
            Mechanism::Hybrid => {
                if self.layout.slots() == 1 {
                    run_single_slot(&bids, &indices)?
                } else {
                    run_multi_slot(&bids, &indices, &self.layout)?
                }
            }
            Mechanism::PerClickOnly => run_per_click_baseline(&bids, &indices)?,
        };

        let mut clicks: Vec<Option<bool>> = vec![None; n];
        let mut payments = vec![0.0; n];
        for award in &outcome.awards {
            let j = award.advertiser;
            let slot_ctr = (self.layout.theta(award.slot) * self.advertisers[j].true_ctr)
                .clamp(0.0, 1.0);
            let clicked = self.click_rng.random_bool(slot_ctr);
            clicks[j] = Some(clicked);
            payments[j] = match award.mode {
                PricingMode::PerImpression => award.price,
                PricingMode::PerClick => {
                    if clicked {
                        award.price
                    } else {
                        0.0
                    }
                }
            };
            let ad = &mut self.advertisers[j];
            let observed = u64::from(clicked);
            ad.own_prior = ad.own_prior.update(observed, 1)?;
            ad.auctioneer_prior = ad.auctioneer_prior.update(observed, 1)?;
            if explore_flags[j] {
                ad.explore.impressions += 1;
                ad.explore.clicks += observed;
                ad.explore.paid += payments[j];
            }
        }

        self.round += 1;
        let effective_bids = bids
            .iter()
            .zip(&indices)
            .map(|(b, &q)| crate::auction::effective_bid(b, q))
            .collect();
        Ok(RoundLog {
            round,
            indices,
            bids,
            effective_bids,
            outcome,
            clicks,
            payments,
            posteriors: self
                .advertisers
                .iter()
                .map(|ad| (ad.own_prior, ad.auctioneer_prior))
                .collect(),
        })
    }

    /// Returns each advertiser's bid plus whether it was produced by an
    /// active explore phase.
    fn collect_bids(&mut self, round: usize) -> Result<(Vec<Bid>, Vec<bool>)> {
        let n = self.advertisers.len();
        let mut bids = Vec::with_capacity(n);
        let mut explore_flags = vec![false; n];
        let auctioneer = self.auctioneer;
        let index_opts = self.index_opts;
        let gamma_b = self.gamma_b;
        for (j, ad) in self.advertisers.iter_mut().enumerate() {
            let bid = match &mut ad.strategy {
                StrategyState::Truthful => truthful_bid(ad.valuation, ad.own_prior.mean()),
                StrategyState::Risk(utility) => {
                    risk_bid(ad.valuation, &ad.own_prior, utility, STRATEGY_TOLERANCE)
                }
                StrategyState::BiddingIndex => {
                    let state = BiddingGameState {
                        advertiser_prior: ad.own_prior,
                        auctioneer_prior: ad.auctioneer_prior,
                    };
                    let cache = &self.gittins_cache;
                    bidding_index_bid(
                        ad.valuation,
                        &state,
                        gamma_b,
                        |prior| eval_index(auctioneer, &index_opts, cache, prior),
                        &index_opts,
                    )?
                }
                StrategyState::Explore { epsilon, exploring } => {
                    if *exploring {
                        let (bid, phase) =
                            explore_bid(ad.valuation, ad.true_ctr, *epsilon, &ad.auctioneer_prior);
                        if phase == ExplorePhase::Exploit {
                            // one-way transition
                            *exploring = false;
                            ad.explore.switch_round = Some(round);
                        } else {
                            explore_flags[j] = true;
                        }
                        bid
                    } else {
                        Bid {
                            per_impression: 0.0,
                            per_click: ad.valuation,
                        }
                    }
                }
            };
            bids.push(bid);
        }
        Ok((bids, explore_flags))
    }
}

fn eval_index(
    rule: AuctioneerRule,
    opts: &IndexOptions,
    cache: &RefCell<HashMap<(u64, u64), f64>>,
    prior: &Prior,
) -> f64 {
    match (rule, prior) {
        (_, Prior::Point(p)) => *p,
        (AuctioneerRule::Mean, _) => prior.mean(),
        (AuctioneerRule::Gittins(gamma), Prior::Beta(b)) => {
            let key = (b.alpha().to_bits(), b.beta().to_bits());
            if let Some(&v) = cache.borrow().get(&key) {
                return v;
            }
            let v = gittins_index(b, gamma, opts);
            cache.borrow_mut().insert(key, v);
            v
        }
    }
}

/// Across-trial mean and standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryStat {
    pub mean: f64,
    pub stderr: f64,
}

/// Summarize a sample by mean and standard error of the mean.
pub fn summarize(values: &[f64]) -> SummaryStat {
    let n = values.len();
    if n == 0 {
        return SummaryStat {
            mean: 0.0,
            stderr: 0.0,
        };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return SummaryStat { mean, stderr: 0.0 };
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    SummaryStat {
        mean,
        stderr: (var / n as f64).sqrt(),
    }
}

/// Ratio of sample means with a delta-method standard error. None when the
/// denominator mean is zero.
pub fn ratio_of_means(numer: &[f64], denom: &[f64]) -> Option<SummaryStat> {
    let n = numer.len();
    if n == 0 || n != denom.len() {
        return None;
    }
    let mh = numer.iter().sum::<f64>() / n as f64;
    let mc = denom.iter().sum::<f64>() / n as f64;
    if mc == 0.0 {
        return None;
    }
    let ratio = mh / mc;
    if n == 1 {
        return Some(SummaryStat {
            mean: ratio,
            stderr: 0.0,
        });
    }
    let mut var_h = 0.0;
    let mut var_c = 0.0;
    let mut cov = 0.0;
    for (&h, &c) in numer.iter().zip(denom) {
        var_h += (h - mh) * (h - mh);
        var_c += (c - mc) * (c - mc);
        cov += (h - mh) * (c - mc);
    }
    let scale = 1.0 / (n - 1) as f64;
    var_h *= scale;
    var_c *= scale;
    cov *= scale;
    let var_ratio = (var_h + ratio * ratio * var_c - 2.0 * ratio * cov) / (mc * mc * n as f64);
    Some(SummaryStat {
        mean: ratio,
        stderr: var_ratio.max(0.0).sqrt(),
    })
}

/// Explore-phase accounting aggregated across trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExploreSummary {
    /// Share of trials whose explore phase ended within the run.
    pub terminated_share: f64,
    /// Rounds until the switch to exploitation.
    pub phase_rounds: SummaryStat,
    /// Impressions won while exploring.
    pub impressions: SummaryStat,
    /// v (T p(1-eps) - N): the worst-case revenue loss of the phase.
    pub worst_case_loss: SummaryStat,
    /// Money paid minus click value earned during the phase.
    pub realized_loss: SummaryStat,
}

/// Aggregated output of a simulation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub trials: usize,
    pub rounds: usize,
    /// Discounted revenue of the hybrid mechanism.
    pub auctioneer_revenue: SummaryStat,
    /// Discounted revenue of the paired pure per-click run (single-slot
    /// scenarios only).
    pub per_click_revenue: Option<SummaryStat>,
    /// Hybrid / per-click revenue, as a ratio of means.
    pub revenue_ratio: Option<SummaryStat>,
    /// Discounted profit per advertiser under the hybrid mechanism.
    pub advertiser_profit: Vec<SummaryStat>,
    /// Explore accounting per advertiser; None for non-explore strategies.
    pub explore: Vec<Option<ExploreSummary>>,
}

struct TrialResult {
    revenue: f64,
    baseline_revenue: Option<f64>,
    profits: Vec<f64>,
    explore: Vec<Option<ExploreTrialStats>>,
}

#[derive(Clone, Copy)]
struct ExploreTrialStats {
    terminated: bool,
    phase_rounds: f64,
    impressions: f64,
    worst_case_loss: f64,
    realized_loss: f64,
}

/// Run every trial of the scenario and aggregate. Trials execute in
/// parallel; each owns an RNG stream derived from (seed, trial index), so
/// the result is deterministic regardless of thread scheduling.
pub fn run_simulation(scenario: &Scenario) -> Result<Metrics> {
    scenario.validate()?;
    let results: Result<Vec<TrialResult>> = (0..scenario.trials)
        .into_par_iter()
        .map(|trial| run_trial(scenario, trial))
        .collect();
    let results = results?;

    let n = scenario.advertisers.len();
    let revenues: Vec<f64> = results.iter().map(|r| r.revenue).collect();
    let baseline: Option<Vec<f64>> = results
        .iter()
        .map(|r| r.baseline_revenue)
        .collect::<Option<Vec<f64>>>();

    let advertiser_profit = (0..n)
        .map(|j| summarize(&results.iter().map(|r| r.profits[j]).collect::<Vec<_>>()))
        .collect();

    let explore = (0..n)
        .map(|j| {
            let stats: Vec<ExploreTrialStats> =
                results.iter().filter_map(|r| r.explore[j]).collect();
            if stats.is_empty() {
                return None;
            }
            let terminated = stats.iter().filter(|s| s.terminated).count();
            Some(ExploreSummary {
                terminated_share: terminated as f64 / stats.len() as f64,
                phase_rounds: summarize(&stats.iter().map(|s| s.phase_rounds).collect::<Vec<_>>()),
                impressions: summarize(&stats.iter().map(|s| s.impressions).collect::<Vec<_>>()),
                worst_case_loss: summarize(
                    &stats.iter().map(|s| s.worst_case_loss).collect::<Vec<_>>(),
                ),
                realized_loss: summarize(
                    &stats.iter().map(|s| s.realized_loss).collect::<Vec<_>>(),
                ),
            })
        })
        .collect();

    Ok(Metrics {
        trials: scenario.trials,
        rounds: scenario.rounds,
        auctioneer_revenue: summarize(&revenues),
        per_click_revenue: baseline.as_deref().map(summarize),
        revenue_ratio: baseline
            .as_deref()
            .and_then(|b| ratio_of_means(&revenues, b)),
        advertiser_profit,
        explore,
    })
}

fn run_trial(scenario: &Scenario, trial: usize) -> Result<TrialResult> {
    let (revenue, profits, explore) =
        run_trial_mechanism(scenario, Mechanism::Hybrid, trial)?;
    let baseline_revenue = if scenario.is_single_slot() {
        let (rev, _, _) = run_trial_mechanism(scenario, Mechanism::PerClickOnly, trial)?;
        Some(rev)
    } else {
        None
    };
    Ok(TrialResult {
        revenue,
        baseline_revenue,
        profits,
        explore,
    })
}

type TrialOutputs = (f64, Vec<f64>, Vec<Option<ExploreTrialStats>>);

fn run_trial_mechanism(
    scenario: &Scenario,
    mechanism: Mechanism,
    trial: usize,
) -> Result<TrialOutputs> {
    let mut state = TrialState::new(scenario, mechanism, trial)?;
    let gamma = scenario.global_gamma.value();
    let n = scenario.advertisers.len();
    let mut revenue = 0.0;
    let mut profits = vec![0.0; n];
    let mut discount = 1.0;
    for _ in 0..scenario.rounds {
        let log = state.run_round()?;
        revenue += discount * log.payments.iter().sum::<f64>();
        for (j, profit) in profits.iter_mut().enumerate() {
            let click_value = match log.clicks[j] {
                Some(true) => state.advertisers[j].valuation,
                _ => 0.0,
            };
            *profit += discount * (click_value - log.payments[j]);
        }
        discount *= gamma;
    }

    let explore = scenario
        .advertisers
        .iter()
        .enumerate()
        .map(|(j, spec)| match spec.strategy {
            StrategySpec::Explore { epsilon } => {
                let tracker = state.explore_tracker(j);
                let target = state.true_ctr(j) * (1.0 - epsilon);
                let v = spec.valuation;
                let t = tracker.impressions as f64;
                let clicks = tracker.clicks as f64;
                Some(ExploreTrialStats {
                    terminated: tracker.switch_round.is_some(),
                    phase_rounds: tracker
                        .switch_round
                        .map_or(scenario.rounds as f64, |r| r as f64),
                    impressions: t,
                    worst_case_loss: v * (t * target - clicks),
                    realized_loss: tracker.paid - v * clicks,
                })
            }
            _ => None,
        })
        .collect();

    Ok((revenue, profits, explore))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn certain_truthful(valuation: f64, ctr: f64) -> AdvertiserSpec {
        AdvertiserSpec {
            valuation,
            strategy: StrategySpec::Truthful,
            auctioneer_prior: Prior::Point(ctr),
            advertiser_prior: None,
            true_ctr: Some(ctr),
        }
    }

    fn two_bidder_scenario() -> Scenario {
        Scenario {
            name: "two-truthful".into(),
            advertisers: vec![certain_truthful(1.0, 0.4), certain_truthful(0.8, 0.3)],
            auctioneer: AuctioneerRule::Mean,
            global_gamma: DiscountFactor::new(0.9).unwrap(),
            gamma_b: DiscountFactor::ZERO,
            layout: SlotLayout::single(),
            rounds: 20,
            trials: 8,
            seed: 1234,
        }
    }

    #[test]
    fn hybrid_with_perfect_point_priors_matches_the_baseline() {
        let scenario = two_bidder_scenario();
        let mut hybrid = TrialState::new(&scenario, Mechanism::Hybrid, 0).unwrap();
        let mut baseline = TrialState::new(&scenario, Mechanism::PerClickOnly, 0).unwrap();
        for _ in 0..scenario.rounds {
            let h = hybrid.run_round().unwrap();
            let b = baseline.run_round().unwrap();
            assert_eq!(h.outcome, b.outcome);
        }
    }

    #[test]
    fn losers_keep_their_beliefs() {
        let scenario = Scenario {
            advertisers: vec![
                certain_truthful(1.0, 0.5),
                AdvertiserSpec {
                    valuation: 0.2,
                    strategy: StrategySpec::Truthful,
                    auctioneer_prior: Prior::beta(1.0, 3.0).unwrap(),
                    advertiser_prior: None,
                    true_ctr: None,
                },
            ],
            ..two_bidder_scenario()
        };
        let mut state = TrialState::new(&scenario, Mechanism::Hybrid, 0).unwrap();
        let before = state.priors(1);
        for _ in 0..scenario.rounds {
            let log = state.run_round().unwrap();
            assert_eq!(log.outcome.awards[0].advertiser, 0, "loser must stay losing");
        }
        assert_eq!(state.priors(1), before);
    }

    #[test]
    fn explorer_wins_every_explore_round() {
        // static competitor below the explore bid
        let scenario = Scenario {
            name: "explore".into(),
            advertisers: vec![
                AdvertiserSpec {
                    valuation: 1.0,
                    strategy: StrategySpec::Explore { epsilon: 0.1 },
                    auctioneer_prior: Prior::beta(1.0, 20.0).unwrap(),
                    advertiser_prior: None,
                    true_ctr: Some(0.5),
                },
                certain_truthful(0.8, 0.5), // effective bid 0.40 < 0.45
            ],
            auctioneer: AuctioneerRule::Mean,
            global_gamma: DiscountFactor::ZERO,
            gamma_b: DiscountFactor::ZERO,
            layout: SlotLayout::single(),
            rounds: 400,
            trials: 1,
            seed: 7,
        };
        let mut state = TrialState::new(&scenario, Mechanism::Hybrid, 0).unwrap();
        for _ in 0..scenario.rounds {
            let exploring = matches!(
                state.advertisers[0].strategy,
                StrategyState::Explore { exploring: true, .. }
            );
            let log = state.run_round().unwrap();
            if exploring && state.explore_tracker(0).switch_round.is_none() {
                let award = &log.outcome.awards[0];
                assert_eq!(award.advertiser, 0);
                assert_eq!(award.mode, PricingMode::PerImpression);
                assert_eq!(award.price, 0.4);
            }
        }
        let tracker = state.explore_tracker(0);
        assert!(tracker.switch_round.is_some(), "phase should terminate");
        assert!((tracker.paid - 0.4 * tracker.impressions as f64).abs() < 1e-9);
    }

    #[test]
    fn payments_reconcile_with_the_outcome() {
        let scenario = two_bidder_scenario();
        let mut state = TrialState::new(&scenario, Mechanism::Hybrid, 3).unwrap();
        for _ in 0..scenario.rounds {
            let log = state.run_round().unwrap();
            for award in &log.outcome.awards {
                let expected = match award.mode {
                    PricingMode::PerImpression => award.price,
                    PricingMode::PerClick => {
                        if log.clicks[award.advertiser] == Some(true) {
                            award.price
                        } else {
                            0.0
                        }
                    }
                };
                assert_eq!(log.payments[award.advertiser], expected);
            }
            let total: f64 = log.payments.iter().sum();
            let from_awards: f64 = log
                .outcome
                .awards
                .iter()
                .map(|a| log.payments[a.advertiser])
                .sum();
            assert_eq!(total, from_awards);
        }
    }

    #[test]
    fn simulation_is_deterministic() {
        let scenario = Scenario {
            advertisers: vec![
                AdvertiserSpec {
                    valuation: 1.0,
                    strategy: StrategySpec::Truthful,
                    auctioneer_prior: Prior::beta(2.0, 5.0).unwrap(),
                    advertiser_prior: None,
                    true_ctr: None,
                },
                certain_truthful(0.6, 0.4),
            ],
            ..two_bidder_scenario()
        };
        let a = run_simulation(&scenario).unwrap();
        let b = run_simulation(&scenario).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn myopic_discounting_counts_only_the_first_round() {
        let mut scenario = two_bidder_scenario();
        scenario.global_gamma = DiscountFactor::ZERO;
        scenario.rounds = 5;
        let five = run_simulation(&scenario).unwrap();
        scenario.rounds = 1;
        let one = run_simulation(&scenario).unwrap();
        assert_eq!(five.auctioneer_revenue.mean, one.auctioneer_revenue.mean);
    }

    #[test]
    fn doubling_trials_shrinks_stderr_like_root_n() {
        let base = Scenario {
            advertisers: vec![
                AdvertiserSpec {
                    valuation: 1.0,
                    strategy: StrategySpec::Truthful,
                    auctioneer_prior: Prior::beta(2.0, 5.0).unwrap(),
                    advertiser_prior: None,
                    true_ctr: None,
                },
                AdvertiserSpec {
                    valuation: 1.0,
                    strategy: StrategySpec::Truthful,
                    auctioneer_prior: Prior::beta(2.0, 5.0).unwrap(),
                    advertiser_prior: None,
                    true_ctr: None,
                },
            ],
            rounds: 1,
            trials: 4000,
            ..two_bidder_scenario()
        };
        let small = run_simulation(&base).unwrap();
        let big = run_simulation(&Scenario {
            trials: 8000,
            ..base
        })
        .unwrap();
        let shrink = big.auctioneer_revenue.stderr / small.auctioneer_revenue.stderr;
        let ideal = std::f64::consts::FRAC_1_SQRT_2;
        assert!(
            (shrink / ideal - 1.0).abs() < 0.2,
            "stderr shrink factor {shrink} too far from {ideal}"
        );
    }

    #[test]
    fn validation_names_the_broken_invariant() {
        let mut scenario = two_bidder_scenario();
        scenario.rounds = 0;
        let err = scenario.validate().unwrap_err();
        assert!(err.to_string().contains("rounds"));

        let mut scenario = two_bidder_scenario();
        scenario.advertisers[0].strategy = StrategySpec::Explore { epsilon: 0.1 };
        scenario.advertisers[0].true_ctr = None;
        scenario.advertisers[0].auctioneer_prior = Prior::beta(1.0, 5.0).unwrap();
        let err = scenario.validate().unwrap_err();
        assert!(err.to_string().contains("true_ctr"));
    }
}
