//! The hybrid auction: rank advertisers by the effective bid
//! R = max(m, c q), charge the winner the runner-up's effective bid either
//! per impression (when its own per-impression component won the max) or per
//! click (otherwise, scaled by 1/q). Includes the pure per-click baseline it
//! is measured against and the laddered multi-slot generalization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A hybrid bid: the most the advertiser will pay per impression and per
/// click.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bid {
    pub per_impression: f64,
    pub per_click: f64,
}

impl Bid {
    pub const ZERO: Bid = Bid {
        per_impression: 0.0,
        per_click: 0.0,
    };

    pub fn new(per_impression: f64, per_click: f64) -> Result<Self> {
        if per_impression >= 0.0
            && per_click >= 0.0
            && per_impression.is_finite()
            && per_click.is_finite()
        {
            Ok(Self {
                per_impression,
                per_click,
            })
        } else {
            Err(Error::InvalidBid {
                per_impression,
                per_click,
            })
        }
    }
}

/// Which of the two prices the winner pays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PricingMode {
    PerImpression,
    PerClick,
}

/// Position CTR multipliers, topmost slot first: 1 = theta_1 >= theta_2 >=
/// ... >= theta_K >= 0, with a virtual theta_{K+1} = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SlotLayout {
    thetas: Vec<f64>,
}

impl SlotLayout {
    pub fn new(thetas: Vec<f64>) -> Result<Self> {
        if thetas.is_empty() {
            return Err(Error::InvalidLayout("at least one slot required".into()));
        }
        if thetas[0] != 1.0 {
            return Err(Error::InvalidLayout(format!(
                "top slot multiplier must be 1, got {}",
                thetas[0]
            )));
        }
        for pair in thetas.windows(2) {
            if !(pair[1] <= pair[0] && pair[1] >= 0.0) {
                return Err(Error::InvalidLayout(format!(
                    "multipliers must be nonincreasing and non-negative, got {pair:?}"
                )));
            }
        }
        Ok(Self { thetas })
    }

    /// The single-slot layout [1.0].
    pub fn single() -> Self {
        Self { thetas: vec![1.0] }
    }

    pub fn slots(&self) -> usize {
        self.thetas.len()
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    /// Multiplier of 0-based slot `i`; 0 beyond the last slot.
    pub fn theta(&self, i: usize) -> f64 {
        self.thetas.get(i).copied().unwrap_or(0.0)
    }
}

impl TryFrom<Vec<f64>> for SlotLayout {
    type Error = Error;
    fn try_from(thetas: Vec<f64>) -> Result<Self> {
        Self::new(thetas)
    }
}

impl From<SlotLayout> for Vec<f64> {
    fn from(layout: SlotLayout) -> Vec<f64> {
        layout.thetas
    }
}

/// One slot's assignment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotAward {
    /// 0-based slot rank (0 is the top slot).
    pub slot: usize,
    /// Index of the advertiser placed in the slot.
    pub advertiser: usize,
    pub mode: PricingMode,
    /// The charged price, per impression or per click according to `mode`.
    pub price: f64,
    /// The winner's own effective bid R.
    pub effective_bid: f64,
    /// The effective (per-impression-equivalent) charge e for this slot.
    pub effective_charge: f64,
}

/// Result of an auction: awards ordered by slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuctionOutcome {
    pub awards: Vec<SlotAward>,
}

impl AuctionOutcome {
    /// The award granted to `advertiser`, if any.
    pub fn award_for(&self, advertiser: usize) -> Option<&SlotAward> {
        self.awards.iter().find(|a| a.advertiser == advertiser)
    }
}

/// Effective bid R = max(m, c q): the quantity the mechanism ranks and
/// prices on.
pub fn effective_bid(bid: &Bid, q: f64) -> f64 {
    bid.per_impression.max(bid.per_click * q)
}

fn check_inputs(bids: &[Bid], qs: &[f64]) -> Result<()> {
    if bids.is_empty() {
        return Err(Error::NoBidders);
    }
    if bids.len() != qs.len() {
        return Err(Error::MismatchedInputs {
            bids: bids.len(),
            indices: qs.len(),
        });
    }
    for &q in qs {
        if !(q.is_finite() && q >= 0.0) {
            return Err(Error::InvalidIndexValue(q));
        }
    }
    Ok(())
}

/// Run the single-slot hybrid auction.
///
/// The winner maximizes R (ties to the lowest advertiser id) and pays the
/// runner-up effective bid: per impression when m > c q, else per click at
/// that value divided by q. A single bidder faces a zero reserve.
pub fn run_single_slot(bids: &[Bid], qs: &[f64]) -> Result<AuctionOutcome> {
    check_inputs(bids, qs)?;
    let r: Vec<f64> = bids
        .iter()
        .zip(qs)
        .map(|(bid, &q)| effective_bid(bid, q))
        .collect();
    let winner = argmax_lowest_id(&r);
    let runner_up = r
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != winner)
        .map(|(_, &v)| v)
        .fold(0.0f64, f64::max);

    let bid = &bids[winner];
    let q = qs[winner];
    let (mode, price) = if bid.per_impression > bid.per_click * q {
        (PricingMode::PerImpression, runner_up)
    } else {
        if q == 0.0 {
            return Err(Error::ZeroIndexPrice);
        }
        (PricingMode::PerClick, runner_up / q)
    };
    Ok(AuctionOutcome {
        awards: vec![SlotAward {
            slot: 0,
            advertiser: winner,
            mode,
            price,
            effective_bid: r[winner],
            effective_charge: runner_up,
        }],
    })
}

/// Run the pure per-click baseline: per-impression bids are ignored, the
/// winner maximizes c q and pays the runner-up score divided by its own q.
pub fn run_per_click_baseline(bids: &[Bid], qs: &[f64]) -> Result<AuctionOutcome> {
    check_inputs(bids, qs)?;
    let score: Vec<f64> = bids
        .iter()
        .zip(qs)
        .map(|(bid, &q)| bid.per_click * q)
        .collect();
    let winner = argmax_lowest_id(&score);
    let runner_up = score
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != winner)
        .map(|(_, &v)| v)
        .fold(0.0f64, f64::max);
    let q = qs[winner];
    if q == 0.0 {
        return Err(Error::ZeroIndexPrice);
    }
    Ok(AuctionOutcome {
        awards: vec![SlotAward {
            slot: 0,
            advertiser: winner,
            mode: PricingMode::PerClick,
            price: runner_up / q,
            effective_bid: score[winner],
            effective_charge: runner_up,
        }],
    })
}

/// Run the laddered multi-slot hybrid auction.
///
/// Advertisers are ranked by effective bid (ties to the lowest id) and the
/// advertiser at rank j takes slot j. Its effective charge is
/// e_j = sum_{i=j..K} (theta_i - theta_{i+1}) / theta_j * R_{i+1}, with
/// missing ranks padded by zero effective bids. The charge is collected per
/// impression when m > c q, else per click at e_j / q.
pub fn run_multi_slot(bids: &[Bid], qs: &[f64], layout: &SlotLayout) -> Result<AuctionOutcome> {
    check_inputs(bids, qs)?;
    let n = bids.len();
    let k = layout.slots();
    let r: Vec<f64> = bids
        .iter()
        .zip(qs)
        .map(|(bid, &q)| effective_bid(bid, q))
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| r[j].partial_cmp(&r[i]).expect("finite bids").then(i.cmp(&j)));
    // effective bid at a rank, zero-padded past the real bidders
    let rank_bid = |rank: usize| order.get(rank).map_or(0.0, |&adv| r[adv]);

    // e_j * theta_j accumulated bottom-up over the ladder
    let mut charges = vec![0.0; k];
    let mut acc = 0.0;
    for j in (0..k).rev() {
        acc += (layout.theta(j) - layout.theta(j + 1)) * rank_bid(j + 1);
        charges[j] = if layout.theta(j) > 0.0 {
            acc / layout.theta(j)
        } else {
            0.0
        };
    }

    let mut awards = Vec::with_capacity(k.min(n));
    for (rank, &adv) in order.iter().take(k).enumerate() {
        let bid = &bids[adv];
        let q = qs[adv];
        let e = charges[rank];
        let (mode, price) = if bid.per_impression > bid.per_click * q {
            (PricingMode::PerImpression, e)
        } else {
            if q == 0.0 {
                return Err(Error::ZeroIndexPrice);
            }
            (PricingMode::PerClick, e / q)
        };
        awards.push(SlotAward {
            slot: rank,
            advertiser: adv,
            mode,
            price,
            effective_bid: r[adv],
            effective_charge: e,
        });
    }
    Ok(AuctionOutcome { awards })
}

fn argmax_lowest_id(values: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = j;
        }
    }
    best
}
