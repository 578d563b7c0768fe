//! CTR beliefs: point masses and Beta distributions with conjugate updates.
//!
//! A prior is either certain (a point mass at the true click-through rate) or
//! a Beta(alpha, beta) belief updated in closed form from observed clicks and
//! impressions: after n clicks in T impressions, Beta(alpha, beta) becomes
//! Beta(alpha + n, beta + T - n).

use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Shape parameters of a Beta belief over a click-through rate.
///
/// Fractional parameters are allowed; observation counts stay integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    alpha: f64,
    beta: f64,
}

impl BetaParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite() {
            Ok(Self { alpha, beta })
        } else {
            Err(Error::InvalidBetaParams { alpha, beta })
        }
    }

    /// The uniform belief Beta(1, 1).
    pub fn uniform() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// E[p] = alpha / (alpha + beta).
    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    /// Posterior after observing `clicks` in `impressions`.
    pub fn observe(&self, clicks: u64, impressions: u64) -> Result<Self> {
        if clicks > impressions {
            return Err(Error::InvalidObservation {
                clicks,
                impressions,
            });
        }
        Ok(Self {
            alpha: self.alpha + clicks as f64,
            beta: self.beta + (impressions - clicks) as f64,
        })
    }

    /// Normalized density at x. Computed through log-gamma so that large
    /// parameters (beta up to 10^4 and beyond) do not overflow. Endpoint
    /// values are the one-sided limits; 0 outside [0, 1].
    pub fn density(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        let ln_norm = ln_gamma(self.alpha + self.beta) - ln_gamma(self.alpha) - ln_gamma(self.beta);
        let from_x = if self.alpha == 1.0 {
            0.0
        } else {
            (self.alpha - 1.0) * x.ln()
        };
        let from_1mx = if self.beta == 1.0 {
            0.0
        } else {
            (self.beta - 1.0) * (1.0 - x).ln()
        };
        (ln_norm + from_x + from_1mx).exp()
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        rand_distr::Beta::new(self.alpha, self.beta)
            .expect("parameters validated at construction")
            .sample(rng)
    }
}

/// A belief over an advertisement's CTR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Prior {
    /// Certainty: all mass at one click-through rate.
    Point(f64),
    /// A Beta distribution over the click-through rate.
    Beta(BetaParams),
}

impl Prior {
    pub fn point(p: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&p) {
            Ok(Self::Point(p))
        } else {
            Err(Error::InvalidProbability(p))
        }
    }

    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        Ok(Self::Beta(BetaParams::new(alpha, beta)?))
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Point(p) => *p,
            Self::Beta(b) => b.mean(),
        }
    }

    /// Bayesian update on `clicks` observed in `impressions`. Point beliefs
    /// are fixed points; Beta beliefs update conjugately.
    pub fn update(&self, clicks: u64, impressions: u64) -> Result<Self> {
        if clicks > impressions {
            return Err(Error::InvalidObservation {
                clicks,
                impressions,
            });
        }
        match self {
            Self::Point(p) => Ok(Self::Point(*p)),
            Self::Beta(b) => Ok(Self::Beta(b.observe(clicks, impressions)?)),
        }
    }

    /// Draw a CTR from the belief. Point beliefs return their value without
    /// consuming randomness.
    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        match self {
            Self::Point(p) => *p,
            Self::Beta(b) => b.sample(rng),
        }
    }
}
