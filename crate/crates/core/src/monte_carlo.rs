//! Monte Carlo oracle for the horizon distribution.
//!
//! Each path advances (r, x, log V) on a uniform grid. The factors use their
//! exact Ornstein–Uhlenbeck transitions, the drift of log V is accumulated by
//! the trapezoidal rule, and the stochastic integrals use the mid-step
//! exposure times the step's Brownian increment. The equity shock and the
//! premium shock come from the same normal, as in the model.
//!
//! Path `i` (or antithetic pair `i`) draws from ChaCha8 stream `i` of the
//! seed, so results do not depend on how paths are spread over threads.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel;
use crate::market_model::{EquityParams, MarketState, RateParams};
use crate::portfolio_distribution::{JointExposure, LogNormalSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub n_paths: usize,
    /// Time steps per year.
    pub n_steps: usize,
    pub seed: u64,
    /// Pair each path with its mirror image (all normals negated).
    pub antithetic: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_paths: 100_000,
            n_steps: 100,
            seed: 0,
            antithetic: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 2 {
            return Err(Error::param("n_paths", "need at least two paths"));
        }
        if self.antithetic && !self.n_paths.is_multiple_of(2) {
            return Err(Error::param(
                "n_paths",
                "antithetic sampling needs an even path count",
            ));
        }
        if self.n_steps < 1 {
            return Err(Error::param("n_steps", "need at least one step per year"));
        }
        Ok(())
    }
}

/// Sample moments of log(V_T/V_0) with their standard errors.
///
/// With antithetic pairs the errors are computed from pair averages. Since
/// log V_T is linear in the normals here, the pair average of log V_T is
/// the same for every pair and `se_mu` collapses to round-off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimResult {
    pub sample_mu: f64,
    pub sample_sigma2: f64,
    pub se_mu: f64,
    pub se_sigma2: f64,
    pub n_paths: usize,
}

/// Pairwise summation, which keeps the reduction error at O(log n) ulps.
fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

fn mean(v: &[f64]) -> f64 {
    pairwise_sum(v) / v.len() as f64
}

/// Unbiased sample variance.
fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    let d: Vec<f64> = v.iter().map(|x| (x - m) * (x - m)).collect();
    pairwise_sum(&d) / (v.len() - 1) as f64
}

/// Sample skewness of `v`.
pub fn skewness(v: &[f64]) -> f64 {
    let m = mean(v);
    let m2 = mean(&v.iter().map(|x| (x - m).powi(2)).collect::<Vec<_>>());
    let m3 = mean(&v.iter().map(|x| (x - m).powi(3)).collect::<Vec<_>>());
    if m2 == 0.0 {
        0.0
    } else {
        m3 / m2.powf(1.5)
    }
}

/// Everything a path needs that does not depend on the draws.
struct Plan {
    steps: usize,
    dt: f64,
    sqrt_dt: f64,
    rate_decay: f64,
    rate_sd: f64,
    prem_decay: f64,
    prem_sd: f64,
    rho_c: f64,
    /// Exposures on the grid, t_k = k·dt.
    fr: Vec<f64>,
    fs: Vec<f64>,
    rp: RateParams,
    ep: EquityParams,
    st: MarketState,
}

impl Plan {
    fn new(
        rp: &RateParams,
        ep: &EquityParams,
        st: &MarketState,
        j: &JointExposure,
        cfg: &SimConfig,
    ) -> Result<Self> {
        let t = j.horizon();
        let steps = ((t * cfg.n_steps as f64).ceil() as usize).max(1);
        let dt = t / steps as f64;
        let grid = |f: &crate::strategy::Strategy| {
            (0..=steps)
                .map(|k| f.eval((k as f64 * dt).min(t)))
                .collect::<Vec<_>>()
        };
        let fr = grid(j.rate());
        if rp.sigma_r == 0.0 && fr.iter().any(|&v| v != 0.0) {
            return Err(Error::param(
                "sigma_r",
                "a rate exposure needs positive rate volatility",
            ));
        }
        // Conditional variances σ²(1 - e^{-2κΔ})/(2κ) = σ²Ψ(2κ, Δ).
        Ok(Plan {
            steps,
            dt,
            sqrt_dt: dt.sqrt(),
            rate_decay: (-rp.kappa * dt).exp(),
            rate_sd: rp.sigma_r * kernel::psi(2.0 * rp.kappa, dt).sqrt(),
            prem_decay: (-ep.alpha * dt).exp(),
            prem_sd: ep.sigma_x * kernel::psi(2.0 * ep.alpha, dt).sqrt(),
            rho_c: (1.0 - ep.rho * ep.rho).max(0.0).sqrt(),
            fr,
            fs: grid(j.equity()),
            rp: *rp,
            ep: *ep,
            st: *st,
        })
    }

    /// λ^r as a function of the short rate; zero without rate risk.
    fn lambda_r(&self, r: f64) -> f64 {
        let rp = &self.rp;
        if rp.sigma_r == 0.0 {
            0.0
        } else {
            (rp.kappa * rp.r_bar - rp.a * rp.b + (rp.a - rp.kappa) * r) / rp.sigma_r
        }
    }

    /// Local drift of log V at step node k.
    fn drift(&self, k: usize, r: f64, x: f64) -> f64 {
        let (a, b) = (self.fr[k], self.fs[k]);
        r + a * self.lambda_r(r) + b * x / self.ep.sigma_s
            - 0.5 * (a * a + b * b)
            - self.ep.rho * a * b
    }

    /// Terminal log V; `normals` is filled from `rng` on first use and
    /// reused (times `sign`) by the antithetic partner.
    fn run(
        &self,
        rng: &mut ChaCha8Rng,
        sign: f64,
        path: usize,
        normals: &mut Vec<[f64; 2]>,
    ) -> Result<f64> {
        if normals.is_empty() {
            normals.extend((0..self.steps).map(|_| {
                let z1: f64 = StandardNormal.sample(rng);
                let z2: f64 = StandardNormal.sample(rng);
                [z1, z2]
            }));
        }
        let (rp, ep) = (&self.rp, &self.ep);
        let (mut r, mut x) = (self.st.r0, self.st.x0);
        let mut logv = 0.0;
        let mut d0 = self.drift(0, r, x);
        for k in 0..self.steps {
            let [z1, z2] = normals[k];
            let zr = sign * z1;
            let zs = self.rho_c * sign * z2 + ep.rho * zr;
            let r1 = rp.r_bar + (r - rp.r_bar) * self.rate_decay + self.rate_sd * zr;
            let x1 = ep.x_bar + (x - ep.x_bar) * self.prem_decay - self.prem_sd * zs;
            let d1 = self.drift(k + 1, r1, x1);
            let fr_mid = 0.5 * (self.fr[k] + self.fr[k + 1]);
            let fs_mid = 0.5 * (self.fs[k] + self.fs[k + 1]);
            logv += 0.5 * (d0 + d1) * self.dt + (fr_mid * zr + fs_mid * zs) * self.sqrt_dt;
            if !logv.is_finite() {
                return Err(Error::NonFinitePath { path, step: k + 1 });
            }
            (r, x, d0) = (r1, x1, d1);
        }
        Ok(logv)
    }
}

/// Terminal log(V_T/V_0) for every path, in path order.
///
/// σ_r = 0 is accepted here (deterministic short rate) as long as the rate
/// exposure is zero.
pub fn simulate_samples(
    rp: &RateParams,
    ep: &EquityParams,
    st: &MarketState,
    j: &JointExposure,
    cfg: &SimConfig,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    ep.validate()?;
    st.validate()?;
    if rp.sigma_r != 0.0 {
        rp.validate()?;
    } else if !(rp.kappa >= 0.0 && rp.r_bar.is_finite() && rp.a >= 0.0 && rp.b.is_finite()) {
        return Err(Error::param("rates", "invalid rate parameters"));
    }
    let plan = Plan::new(rp, ep, st, j, cfg)?;
    let streams = if cfg.antithetic {
        cfg.n_paths / 2
    } else {
        cfg.n_paths
    };
    let per: Vec<Result<Vec<f64>>> = (0..streams)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(plan.steps),
            |normals, i| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(i as u64);
                normals.clear();
                if cfg.antithetic {
                    let a = plan.run(&mut rng, 1.0, 2 * i, normals)?;
                    let b = plan.run(&mut rng, -1.0, 2 * i + 1, normals)?;
                    Ok(vec![a, b])
                } else {
                    Ok(vec![plan.run(&mut rng, 1.0, i, normals)?])
                }
            },
        )
        .collect();
    let mut out = Vec::with_capacity(cfg.n_paths);
    for p in per {
        out.extend(p?);
    }
    Ok(out)
}

/// Sample moments of log(V_T/V_0) under the given exposures.
pub fn simulate_terminal(
    rp: &RateParams,
    ep: &EquityParams,
    st: &MarketState,
    j: &JointExposure,
    cfg: &SimConfig,
) -> Result<SimResult> {
    let samples = simulate_samples(rp, ep, st, j, cfg)?;
    Ok(summarize(&samples, cfg.antithetic))
}

/// Moments and standard errors of a sample; `paired` treats consecutive
/// entries as antithetic pairs.
pub fn summarize(samples: &[f64], paired: bool) -> SimResult {
    let n = samples.len();
    let mu = mean(samples);
    let sigma2 = variance(samples);
    let sq: Vec<f64> = samples.iter().map(|x| (x - mu) * (x - mu)).collect();
    let (se_mu, se_sigma2) = if paired {
        let half = |v: &[f64]| v.chunks(2).map(|c| 0.5 * (c[0] + c[1])).collect::<Vec<_>>();
        let m = n as f64 / 2.0;
        (
            (variance(&half(samples)) / m).sqrt(),
            (variance(&half(&sq)) / m).sqrt(),
        )
    } else {
        (
            (sigma2 / n as f64).sqrt(),
            (variance(&sq) / n as f64).sqrt(),
        )
    };
    SimResult {
        sample_mu: mu,
        sample_sigma2: sigma2,
        se_mu,
        se_sigma2,
        n_paths: n,
    }
}

/// z-scores (sample - analytic)/se for the mean and the variance.
pub fn compare_to_analytic(result: &SimResult, summary: &LogNormalSummary) -> (f64, f64) {
    let z = |est: f64, exact: f64, se: f64| {
        if est == exact {
            0.0
        } else {
            (est - exact) / se
        }
    };
    (
        z(result.sample_mu, summary.mu, result.se_mu),
        z(result.sample_sigma2, summary.sigma2, result.se_sigma2),
    )
}

/// Raw samples as CSV `path_id,log_VT`.
pub fn samples_csv(samples: &[f64]) -> String {
    let mut out = String::from("path_id,log_VT\n");
    for (i, v) in samples.iter().enumerate() {
        let _ = writeln!(out, "{i},{v}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market_model::log_zcb;
    use crate::portfolio_distribution::horizon_moments_equity_only;
    use crate::presets;
    use crate::strategy::Strategy;

    fn exposure(t: f64, fr: Strategy, fs: Strategy) -> JointExposure {
        assert_eq!(fr.horizon(), t);
        JointExposure::new(fr, fs).unwrap()
    }

    fn small(seed: u64) -> SimConfig {
        SimConfig {
            n_paths: 2000,
            n_steps: 20,
            seed,
            antithetic: false,
        }
    }

    #[test]
    fn deterministic_cash() {
        let rp = RateParams {
            kappa: 0.1,
            r_bar: 0.03,
            sigma_r: 0.0,
            a: 0.1,
            b: 0.03,
        };
        let ep = presets::equity_moderate();
        let st = MarketState {
            r0: 0.03,
            x0: 0.045,
        };
        let zero = Strategy::constant(10.0, 0.0).unwrap();
        let j = exposure(10.0, zero.clone(), zero);
        let r = simulate_terminal(&rp, &ep, &st, &j, &small(1)).unwrap();
        assert!((r.sample_mu - 0.3).abs() < 1e-12);
        assert!(r.sample_sigma2 < 1e-24);
    }

    #[test]
    fn bond_hedge_is_riskless() {
        let rp = presets::rates_moderate();
        let ep = presets::equity_moderate();
        let st = MarketState {
            r0: 0.01,
            x0: 0.045,
        };
        let t = 10.0;
        let hedge =
            Strategy::sample_fn(t, 1000, |s| -rp.sigma_r * kernel::psi(rp.kappa, t - s)).unwrap();
        let j = exposure(t, hedge, Strategy::constant(t, 0.0).unwrap());
        let cfg = SimConfig {
            n_steps: 100,
            ..small(3)
        };
        let r = simulate_terminal(&rp, &ep, &st, &j, &cfg).unwrap();
        assert!(r.sample_sigma2 < 1e-4, "{}", r.sample_sigma2);
        assert!((r.sample_mu + log_zcb(&rp, st.r0, t)).abs() < 3.0 * r.se_mu.max(1e-4));
    }

    #[test]
    fn reproducible_and_antithetic() {
        let rp = presets::rates_moderate();
        let ep = presets::equity_moderate();
        let st = MarketState { r0: 0.0, x0: 0.045 };
        let c = Strategy::constant(5.0, 0.3).unwrap();
        let j = exposure(5.0, Strategy::constant(5.0, 0.0).unwrap(), c);
        let a = simulate_terminal(&rp, &ep, &st, &j, &small(11)).unwrap();
        let b = simulate_terminal(&rp, &ep, &st, &j, &small(11)).unwrap();
        assert_eq!(a, b);
        let c = simulate_terminal(&rp, &ep, &st, &j, &small(12)).unwrap();
        assert_ne!(a, c);
        let anti = simulate_terminal(
            &rp,
            &ep,
            &st,
            &j,
            &SimConfig {
                antithetic: true,
                ..small(11)
            },
        )
        .unwrap();
        assert!(anti.se_mu < 0.1 * a.se_mu);
    }

    #[test]
    fn constant_equity_moments() {
        let rp = presets::rates_moderate();
        let ep = presets::equity_moderate();
        let st = MarketState { r0: 0.0, x0: 0.045 };
        let t = 5.0;
        let fs = Strategy::constant(t, 0.3).unwrap();
        let exact = horizon_moments_equity_only(&ep, &st, &fs).unwrap();
        // Zero rate exposure leaves the money-market account in log V.
        let rp0 = RateParams { sigma_r: 0.0, ..rp };
        let st0 = MarketState { r0: rp.r_bar, ..st };
        let j = exposure(t, Strategy::constant(t, 0.0).unwrap(), fs);
        let cfg = SimConfig {
            n_paths: 20_000,
            n_steps: 50,
            seed: 5,
            antithetic: false,
        };
        let r = simulate_terminal(&rp0, &ep, &st0, &j, &cfg).unwrap();
        let shifted = LogNormalSummary {
            mu: exact.mu + rp.r_bar * t,
            sigma2: exact.sigma2,
        };
        let (zm, zv) = compare_to_analytic(&r, &shifted);
        assert!(zm.abs() < 4.0 && zv.abs() < 4.0, "{zm} {zv}");
    }

    #[test]
    fn z_scores_and_config() {
        let r = SimResult {
            sample_mu: 1.2,
            sample_sigma2: 0.5,
            se_mu: 0.1,
            se_sigma2: 0.05,
            n_paths: 10,
        };
        assert_eq!(
            compare_to_analytic(
                &r,
                &LogNormalSummary {
                    mu: 1.2,
                    sigma2: 0.5
                }
            ),
            (0.0, 0.0)
        );
        let (zm, _) = compare_to_analytic(
            &r,
            &LogNormalSummary {
                mu: 1.0,
                sigma2: 0.5,
            },
        );
        assert!((zm - 2.0).abs() < 1e-12);
        assert!(SimConfig {
            n_paths: 1,
            ..SimConfig::default()
        }
        .validate()
        .is_err());
        assert!(SimConfig {
            n_steps: 0,
            ..SimConfig::default()
        }
        .validate()
        .is_err());
        assert!(SimConfig {
            n_paths: 3,
            antithetic: true,
            ..SimConfig::default()
        }
        .validate()
        .is_err());
        assert_eq!(samples_csv(&[0.5]), "path_id,log_VT\n0,0.5\n");
    }

    #[test]
    fn summation_and_skew() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64 * 0.1).collect();
        assert!((pairwise_sum(&v) - 49950.0).abs() < 1e-9);
        assert!(skewness(&v).abs() < 1e-12);
        assert!(skewness(&[0.0, 0.0, 0.0, 1.0]) > 0.5);
    }
}
