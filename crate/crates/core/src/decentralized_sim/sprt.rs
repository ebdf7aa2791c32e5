use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PMF_SUM_TOL: f64 = 1e-12;

/// Observation model and stopping targets for one sequential observer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObserverSpec {
    pub pmf_h0: Vec<f64>,
    pub pmf_h1: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub max_samples: u32,
}

impl ObserverSpec {
    pub fn new(pmf_h0: Vec<f64>, pmf_h1: Vec<f64>, alpha: f64, beta: f64, max_samples: u32) -> Result<Self> {
        let spec = Self {
            pmf_h0,
            pmf_h1,
            alpha,
            beta,
            max_samples,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.pmf_h0.len() != self.pmf_h1.len() {
            return Err(Error::DimensionMismatch {
                expected: self.pmf_h0.len(),
                found: self.pmf_h1.len(),
            });
        }
        for pmf in [&self.pmf_h0, &self.pmf_h1] {
            if pmf.is_empty() || pmf.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::invalid("observer pmf", format!("{pmf:?} is not a probability vector")));
            }
            let total: f64 = pmf.iter().sum();
            if (total - 1.0).abs() > PMF_SUM_TOL {
                return Err(Error::invalid("observer pmf", format!("sums to {total}")));
            }
        }
        if let Some(i) = self
            .pmf_h0
            .iter()
            .zip(&self.pmf_h1)
            .position(|(&a, &b)| a == 0.0 && b == 0.0)
        {
            return Err(Error::DegenerateSpec(format!(
                "outcome {} has zero probability under both hypotheses",
                i + 1
            )));
        }
        for (name, x) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(x > 0.0 && x < 1.0) {
                return Err(Error::invalid("error target", format!("{name} = {x} outside (0, 1)")));
            }
        }
        if self.max_samples == 0 {
            return Err(Error::invalid("observer", "max_samples must be positive"));
        }
        Ok(())
    }

    /// `(lower, upper)` log-likelihood-ratio thresholds:
    /// `ln(beta / (1 - alpha))` and `ln((1 - beta) / alpha)`.
    pub fn thresholds(&self) -> (f64, f64) {
        (
            (self.beta / (1.0 - self.alpha)).ln(),
            ((1.0 - self.beta) / self.alpha).ln(),
        )
    }

    /// Per-outcome increments `ln(p1(x) / p0(x))`, infinite where one side vanishes.
    pub fn llr_increments(&self) -> Vec<f64> {
        self.pmf_h0
            .iter()
            .zip(&self.pmf_h1)
            .map(|(&p0, &p1)| (p1 / p0).ln())
            .collect()
    }

    pub fn pmf(&self, h: u8) -> &[f64] {
        if h == 0 {
            &self.pmf_h0
        } else {
            &self.pmf_h1
        }
    }

    /// Table of validated quantities used by the sampling loop.
    pub fn sampler(&self) -> Result<ObserverSampler> {
        self.validate()?;
        let (lower, upper) = self.thresholds();
        let weights = |pmf: &[f64]| {
            WeightedIndex::new(pmf.to_vec())
                .map_err(|e| Error::invalid("observer pmf", e.to_string()))
        };
        Ok(ObserverSampler {
            draws: [weights(&self.pmf_h0)?, weights(&self.pmf_h1)?],
            increments: self.llr_increments(),
            lower,
            upper,
            max_samples: self.max_samples,
        })
    }
}

/// Outcome of one sequential test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SprtOutcome {
    pub decision: u8,
    pub stop_time: u32,
    /// The sample cap was reached before either threshold.
    pub truncated: bool,
}

#[derive(Debug, Clone)]
pub struct ObserverSampler {
    draws: [WeightedIndex<f64>; 2],
    increments: Vec<f64>,
    lower: f64,
    upper: f64,
    max_samples: u32,
}

impl ObserverSampler {
    pub fn run<R: Rng + ?Sized>(&self, h: u8, rng: &mut R) -> SprtOutcome {
        let draw = &self.draws[usize::from(h != 0)];
        let mut llr = 0.0;
        for n in 1..=self.max_samples {
            llr += self.increments[draw.sample(rng)];
            if llr >= self.upper {
                return SprtOutcome {
                    decision: 1,
                    stop_time: n,
                    truncated: false,
                };
            }
            if llr <= self.lower {
                return SprtOutcome {
                    decision: 0,
                    stop_time: n,
                    truncated: false,
                };
            }
        }
        SprtOutcome {
            decision: u8::from(llr > 0.0),
            stop_time: self.max_samples,
            truncated: true,
        }
    }
}

/// One sequential probability ratio test on observations drawn under `h`.
pub fn sprt_run<R: Rng + ?Sized>(spec: &ObserverSpec, h: u8, rng: &mut R) -> Result<SprtOutcome> {
    Ok(spec.sampler()?.run(h, rng))
}
