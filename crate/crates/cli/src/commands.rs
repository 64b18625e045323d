use std::fmt::Write as _;
use std::fs;

use anyhow::{bail, Context, Result};
use mvglide::extremal_strategies::{
    bond_extremal, classify_solution_type, compact_grid, equity_extremal, interior_wedge, log_grid,
    profile_sweep, CoefficientRecord,
};
use mvglide::market_model::{asymptotic_vol, excess_vol_profile, zero_yield};
use mvglide::monte_carlo::{compare_to_analytic, samples_csv, simulate_samples, summarize};
use mvglide::portfolio_distribution::horizon_moments_general;
use mvglide::risk_stats::{profile_csv, stats_csv, stats_table};
use mvglide::{presets, FactorModel, JointExposure, MarketState, Nu, SimConfig, Strategy};

use crate::config::Market;
use crate::{Command, Factor, Source};

fn market(src: &Source) -> Result<Option<Market>> {
    match (&src.config, src.preset.is_empty()) {
        (Some(path), _) => Ok(Some(Market::from_file(path)?)),
        (None, false) => Ok(Some(Market::from_presets(&src.preset)?)),
        (None, true) => Ok(None),
    }
}

fn require_market(src: &Source) -> Result<Market> {
    market(src)?.context("give parameters with --preset or --config")
}

fn state(src: &Source, m: &Market) -> MarketState {
    MarketState {
        r0: src.r0.or(m.r0).unwrap_or(0.0),
        x0: src.x0.or(m.x0).or(m.equity.map(|e| e.x_bar)).unwrap_or(0.0),
    }
}

fn factor_model(m: &Market, pick: Option<Factor>) -> Result<FactorModel> {
    match (pick, m.rates, m.equity) {
        (Some(Factor::Rates), Some(rp), _) | (None, Some(rp), None) => Ok(FactorModel::Rates(rp)),
        (Some(Factor::Equity), _, Some(ep)) | (None, None, Some(ep)) => Ok(FactorModel::Equity(ep)),
        (None, Some(_), Some(_)) => bail!("both factors are defined; choose one with --factor"),
        (Some(f), _, _) => bail!("no {f:?} parameters given"),
        (None, None, None) => bail!("no parameters given"),
    }
}

fn emit(src: &Source, text: &str) -> Result<()> {
    match &src.out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn check_horizon(t: f64) -> Result<()> {
    if !(t.is_finite() && t > 0.0) {
        bail!("--T must be a positive number of years, got {t}");
    }
    Ok(())
}

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::YieldCurve {
            source,
            maturities,
            r0s,
        } => {
            let m = require_market(&source)?;
            let rp = m.rates.context("yield-curve needs rate parameters")?;
            let r0s = match source.r0.or(m.r0) {
                Some(r) => vec![r],
                None => r0s,
            };
            let mut out = String::from("maturity_years");
            for r in &r0s {
                let _ = write!(out, ",yield_r0={r}");
            }
            out.push('\n');
            for &d in &maturities {
                if !(d.is_finite() && d >= 0.0) {
                    bail!("maturities must be non-negative, got {d}");
                }
                let _ = write!(out, "{d}");
                for &r in &r0s {
                    let _ = write!(out, ",{}", zero_yield(&rp, r, d)?);
                }
                out.push('\n');
            }
            emit(&source, &out)
        }
        Command::VolProfile { source, t } => {
            let sets: Vec<(String, mvglide::EquityParams)> = match market(&source)? {
                Some(m) => {
                    let ep = m.equity.context("vol-profile needs equity parameters")?;
                    let name = if source.config.is_some() {
                        "config".to_string()
                    } else {
                        source
                            .preset
                            .iter()
                            .find(|p| presets::equity_by_name(p).is_some())
                            .cloned()
                            .unwrap_or_default()
                    };
                    vec![(name, ep)]
                }
                None => presets::EQUITY_NAMES[..14]
                    .iter()
                    .map(|n| {
                        (
                            n.to_string(),
                            presets::equity_by_name(n).expect("known preset"),
                        )
                    })
                    .collect(),
            };
            let mut out = String::from("t_years");
            for (n, _) in &sets {
                let _ = write!(out, ",vol_{n}");
            }
            out.push('\n');
            for &h in &t {
                let _ = write!(out, "{h}");
                for (_, ep) in &sets {
                    let _ = write!(out, ",{}", excess_vol_profile(ep, h)?);
                }
                out.push('\n');
            }
            out.push_str("inf");
            for (_, ep) in &sets {
                let _ = write!(out, ",{}", asymptotic_vol(ep));
            }
            out.push('\n');
            emit(&source, &out)
        }
        Command::Profile {
            source,
            horizon,
            factor,
            nus,
            points,
            minimizing,
            wedge,
        } => {
            check_horizon(horizon)?;
            let m = require_market(&source)?;
            let model = factor_model(&m, factor)?;
            let st = state(&source, &m);
            let mut grid = if nus.is_empty() {
                if points < 2 {
                    bail!("--points must be at least 2");
                }
                compact_grid(points, 4.0)
            } else {
                nus
            };
            if minimizing {
                grid.extend(log_grid(0.5 + 1e-4, 15.0, points.max(2)));
                grid.extend(log_grid(15.0, 1e4, points.max(2)).into_iter().skip(1));
                grid.push(Nu::PositiveInfinity);
            }
            let pts = profile_sweep(&model, &st, horizon, &grid)?;
            for p in pts.iter().filter(|p| p.summary.is_none()) {
                eprintln!(
                    "skipped nu = {}: {}",
                    p.nu,
                    p.failure.as_deref().unwrap_or("failed")
                );
            }
            if wedge {
                eprintln!("interior wedge points: {}", interior_wedge(&pts).len());
            }
            emit(&source, &profile_csv(&pts))
        }
        Command::Strategy {
            source,
            horizon,
            nu,
            factor,
            points,
            coefficients,
        } => {
            check_horizon(horizon)?;
            let m = require_market(&source)?;
            let st = state(&source, &m);
            let text = match factor_model(&m, factor)? {
                FactorModel::Rates(rp) => {
                    if coefficients {
                        bail!("coefficient records exist for equity strategies only");
                    }
                    bond_extremal(&rp, horizon, nu)?.strategy().to_csv(points)
                }
                FactorModel::Equity(ep) => {
                    let sol = equity_extremal(&ep, &st, horizon, nu)?;
                    if coefficients {
                        format!(
                            "{}\n{}\n",
                            CoefficientRecord::CSV_HEADER,
                            sol.coefficients().csv_row()
                        )
                    } else {
                        sol.glidepath_csv(points)
                    }
                }
            };
            emit(&source, &text)
        }
        Command::Stats {
            source,
            horizons,
            nu,
            factor,
        } => {
            let m = require_market(&source)?;
            let model = factor_model(&m, factor)?;
            let cells = stats_table(&model, &state(&source, &m), &horizons, &nu)?;
            for c in cells.iter().filter(|c| c.stats.is_none()) {
                eprintln!("no statistics for T = {}, nu = {}", c.horizon, c.nu);
            }
            emit(&source, &stats_csv(&cells))
        }
        Command::Simulate {
            source,
            horizon,
            nu,
            paths,
            steps,
            seed,
            antithetic,
            dump,
        } => {
            check_horizon(horizon)?;
            let m = require_market(&source)?;
            let st = state(&source, &m);
            let rp = m.rates.unwrap_or_else(presets::rates_moderate);
            let ep = m.equity.unwrap_or_else(presets::equity_moderate);
            let zero = Strategy::constant(horizon, 0.0)?;
            let fr = match m.rates {
                Some(rp) => bond_extremal(&rp, horizon, nu)?.strategy().clone(),
                None => zero.clone(),
            };
            let fs = match m.equity {
                Some(ep) => equity_extremal(&ep, &st, horizon, nu)?.strategy().clone(),
                None => zero,
            };
            let j = JointExposure::new(fr, fs)?;
            let cfg = SimConfig {
                n_paths: paths,
                n_steps: steps,
                seed,
                antithetic,
            };
            let samples = simulate_samples(&rp, &ep, &st, &j, &cfg)?;
            if let Some(p) = &dump {
                fs::write(p, samples_csv(&samples))
                    .with_context(|| format!("cannot write {}", p.display()))?;
            }
            let sim = summarize(&samples, antithetic);
            let exact = horizon_moments_general(&rp, &ep, &st, &j)?;
            let (zm, zv) = compare_to_analytic(&sim, &exact);
            let out = format!(
                "quantity,analytic,sample,std_error,z\nmu,{},{},{},{zm}\nsigma2,{},{},{},{zv}\n",
                exact.mu, sim.sample_mu, sim.se_mu, exact.sigma2, sim.sample_sigma2, sim.se_sigma2
            );
            emit(&source, &out)
        }
        Command::Classify { source, nu } => {
            let m = require_market(&source)?;
            let ep = m.equity.context("classify needs equity parameters")?;
            let mut out = String::from("nu,type\n");
            for v in nu {
                let _ = writeln!(out, "{v},{}", classify_solution_type(&ep, v)?);
            }
            emit(&source, &out)
        }
    }
}
