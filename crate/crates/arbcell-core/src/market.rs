//! Hourly day-ahead price series and a seeded synthetic generator.
//!
//! The generator stands in for a real market dataset: double-peaked
//! weekday shape, flatter weekends, seasonal amplitude drift, AR(1) noise
//! and occasional spikes (both directions; negative prices are legal).
//! For a fixed seed the output is bit-identical everywhere: splitmix64 for
//! randomness and `libm` for the float paths.

use alloc::vec::Vec;

use crate::error::MarketError;
use crate::num;
use crate::rng::SplitMix64;
use crate::HOUR_S;

/// Piecewise-constant price curve on a fixed hourly grid. Timestamps are
/// seconds from the start of the simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    start_s: u64,
    period_s: u64,
    prices: Vec<f64>,
}

impl PriceSeries {
    pub fn from_hourly(start_s: u64, prices: Vec<f64>) -> Result<Self, MarketError> {
        if prices.is_empty() {
            return Err(MarketError::Empty);
        }
        if let Some(index) = prices.iter().position(|p| !p.is_finite()) {
            return Err(MarketError::NonFinitePrice { index });
        }
        Ok(Self {
            start_s,
            period_s: HOUR_S,
            prices,
        })
    }

    pub fn start_s(&self) -> u64 {
        self.start_s
    }

    pub fn period_s(&self) -> u64 {
        self.period_s
    }

    /// End of the covered range (exclusive).
    pub fn end_s(&self) -> u64 {
        self.start_s + self.period_s * self.prices.len() as u64
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    /// Price at timestamp `t_s`, €/MWh. Periods are half-open: the series
    /// end itself is out of range.
    pub fn price_at(&self, t_s: u64) -> Result<f64, MarketError> {
        if t_s < self.start_s {
            return Err(MarketError::OutOfRange { t_s });
        }
        let index = ((t_s - self.start_s) / self.period_s) as usize;
        if index >= self.prices.len() {
            return Err(MarketError::OutOfRange { t_s });
        }
        Ok(self.prices[index])
    }

    /// Hourly slice starting at `t_s` (must lie on the grid), length `n`.
    pub fn hour_slice(&self, t_s: u64, n: usize) -> Result<&[f64], MarketError> {
        if t_s < self.start_s || (t_s - self.start_s) % self.period_s != 0 {
            return Err(MarketError::OutOfRange { t_s });
        }
        let first = ((t_s - self.start_s) / self.period_s) as usize;
        if first + n > self.prices.len() {
            return Err(MarketError::OutOfRange {
                t_s: t_s + n as u64 * self.period_s,
            });
        }
        Ok(&self.prices[first..first + n])
    }
}

/// Standard normal via Box-Muller (libm paths only).
fn gauss(rng: &mut SplitMix64) -> f64 {
    let u1 = num::fmax(rng.next_f64(), 1e-300);
    let u2 = rng.next_f64();
    num::sqrt(-2.0 * num::ln(u1)) * num::cos(2.0 * core::f64::consts::PI * u2)
}

/// Deterministic synthetic day-ahead prices, €/MWh, hourly, starting at
/// t = 0 on a Monday, day 0 in mid-winter. Mean is ~40 €/MWh with typical
/// daily spreads of 20-60 €/MWh.
pub fn synthesize_prices(seed: u64, days: u32) -> PriceSeries {
    assert!(days >= 1, "need at least one day");
    let mut rng = SplitMix64::new(seed);
    let mut prices = Vec::with_capacity(days as usize * 24);
    let mut noise = 0.0_f64;
    for day in 0..days as u64 {
        let weekday = day % 7; // day 0 is a Monday
        let weekend = weekday >= 5;
        // Winter-high seasonal swing, +/-22%.
        let season = 1.0 + 0.22 * num::cos(2.0 * core::f64::consts::PI * (day as f64 - 15.0) / 365.25);
        let amp = if weekend { 0.5 } else { 1.0 };
        for hour in 0..24u64 {
            let h = hour as f64;
            let morning = 9.0 * num::exp(-((h - 8.0) / 2.6) * ((h - 8.0) / 2.6));
            let evening = 13.0 * num::exp(-((h - 19.5) / 3.0) * ((h - 19.5) / 3.0));
            let night = -9.0 * num::exp(-((h - 3.5) / 3.2) * ((h - 3.5) / 3.2));
            noise = 0.85 * noise + 2.2 * gauss(&mut rng);
            let mut price = season * (38.0 + amp * (morning + evening + night)) + noise;
            // Scarcity spikes and oversupply dips.
            let roll = rng.next_f64();
            if roll < 0.006 {
                price += rng.uniform(25.0, 140.0);
            } else if roll < 0.009 {
                price -= rng.uniform(20.0, 60.0);
            }
            prices.push(price);
        }
    }
    PriceSeries::from_hourly(0, prices).expect("generator always yields finite prices")
}
