//! Fixtures shared by the benchmarks.

use mvglide::presets;
use mvglide::{MarketState, Strategy};

/// Initial state at the long-run premium of the equity presets.
pub fn stationary_state() -> MarketState {
    MarketState {
        r0: 0.0,
        x0: presets::equity_moderate().x_bar,
    }
}

/// A smooth declining glidepath sampled on the default grid.
pub fn sampled_glidepath(horizon: f64) -> Strategy {
    Strategy::sample_fn(horizon, mvglide::strategy::DEFAULT_INTERVALS, |s| {
        0.45 - 0.3 * s / horizon
    })
    .expect("valid horizon")
}
