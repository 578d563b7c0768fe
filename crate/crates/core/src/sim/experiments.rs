//! Packaged experiments: single-round revenue comparisons between the hybrid
//! and per-click mechanisms, the diffuse-prior revenue-gain study, the
//! explore-phase loss accounting, and the min-vs-mean quadrature ratio that
//! lower-bounds the hybrid's revenue.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::auction::{run_per_click_baseline, run_single_slot, Bid, PricingMode};
use crate::error::{Error, Result};
use crate::index::{gittins_index, DiscountFactor, IndexOptions};
use crate::numeric::{adaptive_simpson, derive_seed};
use crate::prior::{BetaParams, Prior};
use crate::sim::{ratio_of_means, summarize, SummaryStat};
use crate::strategy::{explore_bid, ExplorePhase};

/// Hard cap on explore-phase length; reached only if the stopping condition
/// is unattainable.
const MAX_EXPLORE_ROUNDS: u64 = 10_000_000;

/// Revenue of an award when clicks arrive at rate `ctr`: the price itself
/// per impression, the price times the CTR per click.
fn expected_revenue(mode: PricingMode, price: f64, ctr: f64) -> f64 {
    match mode {
        PricingMode::PerImpression => price,
        PricingMode::PerClick => price * ctr,
    }
}

/// Output of a paired hybrid/per-click revenue comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevenueComparison {
    pub trials: usize,
    pub hybrid: SummaryStat,
    pub per_click: SummaryStat,
    /// Hybrid / per-click, as a ratio of means with a delta-method stderr.
    pub ratio: SummaryStat,
}

/// Single-round revenue comparison with `n_advertisers` certain truthful
/// advertisers whose CTRs are drawn from the auctioneer's Beta(alpha, beta)
/// prior; the auctioneer publishes the Gittins index at `gamma_a` (the mean
/// when `gamma_a` is 0). Common unit valuation.
pub fn experiment_theorem2(
    alpha: f64,
    beta: f64,
    gamma_a: DiscountFactor,
    n_advertisers: usize,
    trials: usize,
    seed: u64,
) -> Result<RevenueComparison> {
    if n_advertisers < 2 {
        return Err(Error::InvalidScenario(
            "revenue comparison needs at least two advertisers".into(),
        ));
    }
    let prior = BetaParams::new(alpha, beta)?;
    let q = gittins_index(&prior, gamma_a, &IndexOptions::default());
    let valuation = 1.0;

    let rows: Result<Vec<(f64, f64)>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, trial as u64));
            let ctrs: Vec<f64> = (0..n_advertisers).map(|_| prior.sample(&mut rng)).collect();
            let bids: Vec<Bid> = ctrs
                .iter()
                .map(|&p| Bid {
                    per_impression: valuation * p,
                    per_click: valuation,
                })
                .collect();
            let qs = vec![q; n_advertisers];

            let hybrid = run_single_slot(&bids, &qs)?;
            let award = &hybrid.awards[0];
            let hybrid_rev = expected_revenue(award.mode, award.price, ctrs[award.advertiser]);

            let baseline = run_per_click_baseline(&bids, &qs)?;
            let award = &baseline.awards[0];
            let click_rev = expected_revenue(award.mode, award.price, ctrs[award.advertiser]);
            Ok((hybrid_rev, click_rev))
        })
        .collect();
    let rows = rows?;

    let hybrid: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let per_click: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let ratio = ratio_of_means(&hybrid, &per_click).ok_or_else(|| {
        Error::InvalidScenario("per-click revenue is identically zero".into())
    })?;
    Ok(RevenueComparison {
        trials,
        hybrid: summarize(&hybrid),
        per_click: summarize(&per_click),
        ratio,
    })
}

/// Output of the diffuse-prior revenue-gain experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypicalCaseStats {
    pub n_advertisers: usize,
    pub trials: usize,
    pub hybrid: SummaryStat,
    pub per_click: SummaryStat,
    /// Hybrid / per-click revenue (ratio of means).
    pub gain_factor: SummaryStat,
    /// Empirical Pr[p_(2) >= 1/2] for the second-highest drawn CTR.
    pub prob_second_ctr_at_least_half: f64,
}

/// Diffuse-prior study: n = 4^k certain truthful advertisers with CTRs drawn
/// i.i.d. from Beta(1, k), myopic auctioneer, common unit valuation. The
/// hybrid mechanism sells near the second-highest CTR while the per-click
/// auction earns near the prior mean.
pub fn experiment_typical_case(k: u32, trials: usize, seed: u64) -> Result<TypicalCaseStats> {
    let n = 4usize.pow(k);
    let prior = Prior::beta(1.0, k as f64)?;
    typical_case_with_prior(&prior, n, trials, seed)
}

/// The same comparison under an arbitrary common prior.
pub fn typical_case_with_prior(
    prior: &Prior,
    n_advertisers: usize,
    trials: usize,
    seed: u64,
) -> Result<TypicalCaseStats> {
    if n_advertisers < 2 {
        return Err(Error::InvalidScenario(
            "revenue comparison needs at least two advertisers".into(),
        ));
    }
    let q = prior.mean();
    let valuation = 1.0;

    let rows: Result<Vec<(f64, f64, bool)>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, trial as u64));
            let ctrs: Vec<f64> = (0..n_advertisers).map(|_| prior.sample(&mut rng)).collect();
            let bids: Vec<Bid> = ctrs
                .iter()
                .map(|&p| Bid {
                    per_impression: valuation * p,
                    per_click: valuation,
                })
                .collect();
            let qs = vec![q; n_advertisers];

            let hybrid = run_single_slot(&bids, &qs)?;
            let award = &hybrid.awards[0];
            let hybrid_rev = expected_revenue(award.mode, award.price, ctrs[award.advertiser]);

            let baseline = run_per_click_baseline(&bids, &qs)?;
            let award = &baseline.awards[0];
            let click_rev = expected_revenue(award.mode, award.price, ctrs[award.advertiser]);

            let mut top = f64::MIN;
            let mut second = f64::MIN;
            for &p in &ctrs {
                if p > top {
                    second = top;
                    top = p;
                } else if p > second {
                    second = p;
                }
            }
            Ok((hybrid_rev, click_rev, second >= 0.5))
        })
        .collect();
    let rows = rows?;

    let hybrid: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let per_click: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let gain_factor = ratio_of_means(&hybrid, &per_click).ok_or_else(|| {
        Error::InvalidScenario("per-click revenue is identically zero".into())
    })?;
    let hits = rows.iter().filter(|r| r.2).count();
    Ok(TypicalCaseStats {
        n_advertisers,
        trials,
        hybrid: summarize(&hybrid),
        per_click: summarize(&per_click),
        gain_factor,
        prob_second_ctr_at_least_half: hits as f64 / trials.max(1) as f64,
    })
}

/// Output of the explore-phase loss experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExploreStats {
    pub trials: usize,
    /// Trials whose explore phase reached the posterior-mean target.
    pub terminated_trials: usize,
    /// Rounds spent exploring.
    pub phase_rounds: SummaryStat,
    /// v (T p(1-eps) - N) at termination; negative whenever the phase ran.
    pub worst_case_loss: SummaryStat,
    /// Money paid minus click value earned during the phase.
    pub realized_loss: SummaryStat,
    /// Largest worst-case loss across trials.
    pub max_worst_case_loss: f64,
    /// Largest realized loss across trials.
    pub max_realized_loss: f64,
    /// Mean loss of the per-click overbidder that drives the same posterior
    /// convergence by bidding v (1-eps) p / q_t.
    pub overbid_loss: SummaryStat,
}

/// Explore-phase study: a CTR-certain advertiser (unit valuation) overbids
/// per impression at v p (1 - epsilon) against a static competitor with
/// effective bid `r_star` until the auctioneer's Beta(alpha, beta) posterior
/// mean reaches p (1 - epsilon). The per-click overbidder arm pays its way
/// to the same posterior through inflated per-click bids.
pub fn experiment_explore(
    true_ctr: f64,
    epsilon: f64,
    alpha: f64,
    beta: f64,
    r_star: f64,
    trials: usize,
    seed: u64,
) -> Result<ExploreStats> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidScenario("epsilon must lie in (0, 1)".into()));
    }
    if !(true_ctr > 0.0 && true_ctr <= 1.0) {
        return Err(Error::InvalidScenario("true_ctr must lie in (0, 1]".into()));
    }
    let valuation = 1.0;
    let target = true_ctr * (1.0 - epsilon);
    let initial = Prior::beta(alpha, beta)?;
    if r_star > valuation * target {
        return Err(Error::InvalidScenario(
            "competitor bid must not exceed the explore bid".into(),
        ));
    }

    struct Trial {
        terminated: bool,
        rounds: f64,
        worst_case: f64,
        realized: f64,
        overbid_loss: f64,
    }

    let rows: Result<Vec<Trial>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, trial as u64 * 2));

            // hybrid explorer: wins per impression at the competitor's bid
            let mut posterior = initial;
            let mut impressions = 0u64;
            let mut clicks = 0u64;
            let mut paid = 0.0;
            let mut terminated = false;
            while impressions < MAX_EXPLORE_ROUNDS {
                let (bid, phase) = explore_bid(valuation, true_ctr, epsilon, &posterior);
                if phase == ExplorePhase::Exploit {
                    terminated = true;
                    break;
                }
                let competitor = Bid {
                    per_impression: r_star,
                    per_click: 0.0,
                };
                let outcome = run_single_slot(
                    &[bid, competitor],
                    &[posterior.mean(), 1.0],
                )?;
                let award = &outcome.awards[0];
                debug_assert_eq!(award.advertiser, 0);
                debug_assert_eq!(award.mode, PricingMode::PerImpression);
                let clicked = rng.random_bool(true_ctr);
                paid += award.price;
                impressions += 1;
                clicks += u64::from(clicked);
                posterior = posterior.update(u64::from(clicked), 1)?;
            }
            let worst_case = valuation * (impressions as f64 * target - clicks as f64);
            let realized = paid - valuation * clicks as f64;

            // per-click overbidder: same stopping rule, inflated bid v p'/q_t
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_seed(seed, trial as u64 * 2 + 1));
            let mut posterior = initial;
            let mut overbid_loss = 0.0;
            let mut rounds = 0u64;
            while rounds < MAX_EXPLORE_ROUNDS {
                let q = posterior.mean();
                if q >= target {
                    break;
                }
                let clicked = rng.random_bool(true_ctr);
                if clicked {
                    // next-price per click: the competitor's effective bid over q
                    overbid_loss += r_star / q - valuation;
                }
                rounds += 1;
                posterior = posterior.update(u64::from(clicked), 1)?;
            }

            Ok(Trial {
                terminated,
                rounds: impressions as f64,
                worst_case,
                realized,
                overbid_loss,
            })
        })
        .collect();
    let rows = rows?;

    let worst: Vec<f64> = rows.iter().map(|t| t.worst_case).collect();
    let realized: Vec<f64> = rows.iter().map(|t| t.realized).collect();
    Ok(ExploreStats {
        trials,
        terminated_trials: rows.iter().filter(|t| t.terminated).count(),
        phase_rounds: summarize(&rows.iter().map(|t| t.rounds).collect::<Vec<_>>()),
        worst_case_loss: summarize(&worst),
        realized_loss: summarize(&realized),
        max_worst_case_loss: worst.iter().copied().fold(f64::MIN, f64::max),
        max_realized_loss: realized.iter().copied().fold(f64::MIN, f64::max),
        overbid_loss: summarize(&rows.iter().map(|t| t.overbid_loss).collect::<Vec<_>>()),
    })
}

/// E[min(mu, w)] / mu for w ~ Beta(alpha, beta) with mean mu, by adaptive
/// quadrature split at the kink. This is the factor by which the hybrid
/// auction's expected single-round revenue can fall below the per-click
/// auction's, and it never drops below 1 - 1/e for alpha, beta >= 1.
pub fn lemma3_ratio(alpha: f64, beta: f64) -> Result<f64> {
    let prior = BetaParams::new(alpha, beta)?;
    let mu = prior.mean();
    let below = adaptive_simpson(&|x| x * prior.density(x), 0.0, mu, mu * 1e-11);
    let above = adaptive_simpson(&|x| prior.density(x), mu, 1.0, 1e-11);
    Ok((below + mu * above) / mu)
}
