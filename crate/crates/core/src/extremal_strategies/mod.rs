//! Mean-variance extremal strategies.
//!
//! Maximising `μ_T - ν σ_T²`-type Lagrangians over deterministic exposures
//! gives a one-parameter family indexed by the multiplier ν. For bonds the
//! family is explicit; for equities it solves a second-order ODE whose
//! solutions are exponential (type I), trigonometric (type II) or quadratic
//! (type III). ν < 1/2 gives maximising strategies, ν > 1/2 minimising or
//! locally extremal ones, and ν → ±∞ the zero-variance limit.

mod bond;
mod equity;
mod sweep;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use bond::{
    bond_base_variance, bond_closed_form_moments, bond_extremal, bond_extremal_given_equity,
    bond_nu_for_variance, BondExtremalSolution,
};
pub use equity::{
    classify_solution_type, constant_equity_moments, equity_extremal, integral_equation_residual,
    CoefficientRecord, EquityExtremalSolution, SolutionType, RESIDUAL_POINTS,
};
pub use sweep::{
    compact_grid, equity_nu_for_variance, interior_wedge, joint_pair, log_grid, profile_sweep,
    FactorModel, ProfilePoint, WEDGE_TOL,
};

/// Lagrange multiplier on the extended real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nu {
    Finite(f64),
    NegativeInfinity,
    PositiveInfinity,
}

impl Nu {
    pub fn finite(self) -> Option<f64> {
        match self {
            Nu::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        !matches!(self, Nu::Finite(_))
    }

    /// The multiplier as an `f64`, with the limits mapped to ±∞.
    pub fn value(self) -> f64 {
        match self {
            Nu::Finite(v) => v,
            Nu::NegativeInfinity => f64::NEG_INFINITY,
            Nu::PositiveInfinity => f64::INFINITY,
        }
    }

    pub fn from_f64(v: f64) -> Self {
        if v == f64::NEG_INFINITY {
            Nu::NegativeInfinity
        } else if v == f64::INFINITY {
            Nu::PositiveInfinity
        } else {
            Nu::Finite(v)
        }
    }

    /// Compact coordinate u = 1/(1 - 2ν): ν ∈ (-∞, 1/2) maps onto (0, ∞),
    /// with ν = -∞ at u = 0 and ν = 0 at u = 1.
    pub fn to_compact(self) -> f64 {
        match self {
            Nu::NegativeInfinity | Nu::PositiveInfinity => 0.0,
            Nu::Finite(v) => 1.0 / (1.0 - 2.0 * v),
        }
    }

    /// Inverse of [`Nu::to_compact`] on u ≥ 0.
    pub fn from_compact(u: f64) -> Self {
        if u == 0.0 {
            Nu::NegativeInfinity
        } else {
            Nu::Finite(0.5 * (1.0 - 1.0 / u))
        }
    }

    pub(crate) fn reject_half(self) -> Result<()> {
        if self == Nu::Finite(0.5) {
            Err(Error::HalfNu)
        } else if let Nu::Finite(v) = self {
            if v.is_nan() {
                return Err(Error::param("nu", "must not be NaN"));
            }
            Ok(())
        } else {
            Ok(())
        }
    }
}

impl fmt::Display for Nu {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Nu::Finite(v) => write!(f, "{v}"),
            Nu::NegativeInfinity => f.write_str("-inf"),
            Nu::PositiveInfinity => f.write_str("inf"),
        }
    }
}

impl FromStr for Nu {
    type Err = Error;

    /// Accepts decimals, simple fractions such as `-1/16`, and `-inf`/`inf`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let bad = || Error::param("nu", format!("cannot parse `{s}`"));
        match t.to_ascii_lowercase().as_str() {
            "-inf" | "-infinity" => return Ok(Nu::NegativeInfinity),
            "inf" | "+inf" | "infinity" => return Ok(Nu::PositiveInfinity),
            _ => {}
        }
        let v = match t.split_once('/') {
            Some((n, d)) => {
                let n: f64 = n.trim().parse().map_err(|_| bad())?;
                let d: f64 = d.trim().parse().map_err(|_| bad())?;
                n / d
            }
            None => t.parse().map_err(|_| bad())?,
        };
        if !v.is_finite() {
            return Err(bad());
        }
        Ok(Nu::Finite(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        assert_eq!("-inf".parse::<Nu>().unwrap(), Nu::NegativeInfinity);
        assert_eq!("inf".parse::<Nu>().unwrap(), Nu::PositiveInfinity);
        assert_eq!("-1/16".parse::<Nu>().unwrap(), Nu::Finite(-0.0625));
        assert_eq!(" 0.25 ".parse::<Nu>().unwrap(), Nu::Finite(0.25));
        assert!("abc".parse::<Nu>().is_err());
        assert!("1/0".parse::<Nu>().is_err());
        assert_eq!(Nu::NegativeInfinity.to_string(), "-inf");
        assert_eq!(Nu::Finite(-2.0).to_string(), "-2");
    }

    #[test]
    fn compact_coordinate() {
        assert_eq!(Nu::NegativeInfinity.to_compact(), 0.0);
        assert_eq!(Nu::Finite(0.0).to_compact(), 1.0);
        assert_eq!(Nu::from_compact(0.0), Nu::NegativeInfinity);
        for v in [-30.0, -1.0, -0.0625, 0.2, 0.49] {
            let back = Nu::from_compact(Nu::Finite(v).to_compact())
                .finite()
                .unwrap();
            assert!((back - v).abs() < 1e-12 * v.abs().max(1.0));
        }
    }

    #[test]
    fn half_rejected() {
        assert_eq!(Nu::Finite(0.5).reject_half(), Err(Error::HalfNu));
        assert!(Nu::Finite(0.4999).reject_half().is_ok());
        assert!(Nu::PositiveInfinity.reject_half().is_ok());
    }
}
