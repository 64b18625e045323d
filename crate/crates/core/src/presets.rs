//! Named parameter sets.
//!
//! `rates-*` are the two calibrations of the rate factor, `mr-1`..`mr-7`
//! vary the premium volatility at α = 0.06, `mr-A`..`mr-G` vary α at
//! σ_x = 0.007, and `equity-*` are the two sets used for optimal equity
//! strategies. The equity sets use σ_S = 0.15: with x̄ = 0.045 that is the
//! only value giving the quoted price of risk of 0.30.

use crate::market_model::{EquityParams, RateParams};

pub const RATE_NAMES: [&str; 2] = ["rates-moderate", "rates-low"];

pub const EQUITY_NAMES: [&str; 16] = [
    "mr-1",
    "mr-2",
    "mr-3",
    "mr-4",
    "mr-5",
    "mr-6",
    "mr-7",
    "mr-A",
    "mr-B",
    "mr-C",
    "mr-D",
    "mr-E",
    "mr-F",
    "mr-G",
    "equity-moderate",
    "equity-high",
];

const SIGMA_S: f64 = 0.15;
const X_BAR: f64 = 0.045;

pub fn rates_moderate() -> RateParams {
    RateParams {
        kappa: 0.08,
        r_bar: 0.02,
        sigma_r: 0.007,
        a: 0.08,
        b: 0.04,
    }
}

pub fn rates_low() -> RateParams {
    RateParams {
        b: 0.03,
        ..rates_moderate()
    }
}

pub fn equity_moderate() -> EquityParams {
    equity(0.007, 0.06)
}

pub fn equity_high() -> EquityParams {
    equity(0.015, 0.06)
}

fn equity(sigma_x: f64, alpha: f64) -> EquityParams {
    EquityParams {
        x_bar: X_BAR,
        sigma_s: SIGMA_S,
        sigma_x,
        alpha,
        rho: 0.0,
    }
}

pub fn rates_by_name(name: &str) -> Option<RateParams> {
    match name {
        "rates-moderate" => Some(rates_moderate()),
        "rates-low" => Some(rates_low()),
        _ => None,
    }
}

pub fn equity_by_name(name: &str) -> Option<EquityParams> {
    let (sigma_x, alpha) = match name {
        "mr-1" => (0.0, 0.06),
        "mr-2" => (0.003, 0.06),
        "mr-3" => (0.007, 0.06),
        "mr-4" => (0.009, 0.06),
        "mr-5" => (0.015, 0.06),
        "mr-6" => (0.020, 0.06),
        "mr-7" => (0.030, 0.06),
        "mr-A" => (0.007, 0.90),
        "mr-B" => (0.007, 0.14),
        "mr-C" => (0.007, 0.06),
        "mr-D" => (0.007, 0.047),
        "mr-E" => (0.007, 0.020),
        "mr-F" => (0.007, 0.010),
        "mr-G" => (0.007, 0.0),
        "equity-moderate" => return Some(equity_moderate()),
        "equity-high" => return Some(equity_high()),
        _ => return None,
    };
    Some(equity(sigma_x, alpha))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_listed_name_resolves() {
        for n in RATE_NAMES {
            assert!(rates_by_name(n).unwrap().validate().is_ok());
        }
        for n in EQUITY_NAMES {
            assert!(equity_by_name(n).unwrap().validate().is_ok());
        }
        assert!(rates_by_name("rates-high").is_none());
        assert!(equity_by_name("mr-8").is_none());
    }

    #[test]
    fn equity_sets_quote_a_price_of_risk_of_030() {
        for p in [equity_moderate(), equity_high()] {
            assert!((p.x_bar / p.sigma_s - 0.30).abs() < 1e-12);
        }
    }
}
