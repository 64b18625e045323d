//! Deterministic (time-only) investment strategies in a market with Vasicek
//! short rates and a mean-reverting equity risk premium.
//!
//! Exposures are measured in units of volatility. For any deterministic
//! strategy the log return over the horizon is Gaussian, so everything of
//! interest follows from the pair (μ_T, σ_T²) in [`LogNormalSummary`].
//! The mean-variance extremal strategies are available in closed form,
//! parameterised by a Lagrange multiplier [`Nu`].

mod error;
pub mod extremal_strategies;
mod kernel;
pub mod market_model;
pub mod monte_carlo;
pub mod numerics;
pub mod portfolio_distribution;
pub mod presets;
pub mod risk_stats;
pub mod strategy;

pub use error::{Error, Result};
pub use extremal_strategies::{
    BondExtremalSolution, EquityExtremalSolution, FactorModel, Nu, SolutionType,
};
pub use market_model::{EquityParams, MarketState, RateParams};
pub use monte_carlo::{SimConfig, SimResult};
pub use portfolio_distribution::{JointExposure, LogNormalSummary};
pub use risk_stats::RiskStats;
pub use strategy::{ClosedForm, Strategy, StrategyKind};
