//! Market parameters from presets or a flat `key = value` file.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use mvglide::{presets, EquityParams, RateParams};

const RATE_KEYS: [&str; 5] = ["kappa", "r_bar", "sigma_r", "a", "b"];
const EQUITY_KEYS: [&str; 5] = ["x_bar", "sigma_s", "sigma_x", "alpha", "rho"];
const STATE_KEYS: [&str; 2] = ["r0", "x0"];

/// Parameters of whichever factors the source defines, plus any initial
/// state the file sets.
#[derive(Debug, Clone, Default)]
pub struct Market {
    pub rates: Option<RateParams>,
    pub equity: Option<EquityParams>,
    pub r0: Option<f64>,
    pub x0: Option<f64>,
}

impl Market {
    pub fn from_presets(names: &[String]) -> Result<Self> {
        let mut m = Market::default();
        for name in names {
            if let Some(rp) = presets::rates_by_name(name) {
                if m.rates.replace(rp).is_some() {
                    bail!("more than one rate preset given");
                }
            } else if let Some(ep) = presets::equity_by_name(name) {
                if m.equity.replace(ep).is_some() {
                    bail!("more than one equity preset given");
                }
            } else {
                bail!(
                    "unknown preset `{name}` (known: {}, {})",
                    presets::RATE_NAMES.join(", "),
                    presets::EQUITY_NAMES.join(", ")
                );
            }
        }
        Ok(m)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key = value", i + 1))?;
            let k = k.trim();
            if !RATE_KEYS.contains(&k) && !EQUITY_KEYS.contains(&k) && !STATE_KEYS.contains(&k) {
                bail!("line {}: unknown key `{k}`", i + 1);
            }
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| anyhow!("line {}: `{}` is not a number", i + 1, v.trim()))?;
            if kv.insert(k.to_string(), v).is_some() {
                bail!("line {}: duplicate key `{k}`", i + 1);
            }
        }
        let group = |keys: &[&str], optional: &[&str]| -> Result<Option<Vec<f64>>> {
            let present: Vec<_> = keys.iter().filter(|k| kv.contains_key(**k)).collect();
            if present.is_empty() {
                return Ok(None);
            }
            keys.iter()
                .map(|k| match kv.get(*k) {
                    Some(v) => Ok(*v),
                    None if optional.contains(k) => Ok(0.0),
                    None => Err(anyhow!("missing key `{k}` (needed with {})", present[0])),
                })
                .collect::<Result<Vec<_>>>()
                .map(Some)
        };
        let rates = group(&RATE_KEYS, &[])?
            .map(|v| RateParams::new(v[0], v[1], v[2], v[3], v[4]))
            .transpose()?;
        let equity = group(&EQUITY_KEYS, &["rho"])?
            .map(|v| EquityParams::new(v[0], v[1], v[2], v[3], v[4]))
            .transpose()?;
        if rates.is_none() && equity.is_none() {
            bail!("config defines neither rate nor equity parameters");
        }
        Ok(Market {
            rates,
            equity,
            r0: kv.get("r0").copied(),
            x0: kv.get("x0").copied(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_groups() {
        let m = Market::parse(
            "# moderate\nkappa=0.08\nr_bar = 0.02\nsigma_r=0.007\na=0.08\nb=0.04\n\
             x_bar=0.045\nsigma_s=0.15\nsigma_x=0.007\nalpha=0.06\nx0=0.03\n",
        )
        .unwrap();
        assert_eq!(m.rates.unwrap(), presets::rates_moderate());
        assert_eq!(m.equity.unwrap(), presets::equity_moderate());
        assert_eq!(m.x0, Some(0.03));
        assert_eq!(m.r0, None);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(Market::parse("kappa=0.08\n").is_err());
        assert!(Market::parse("speed=1\n").is_err());
        assert!(Market::parse("x_bar=abc\n").is_err());
        assert!(Market::parse("r0=0.01\n").is_err());
        assert!(Market::parse("kappa=1\nkappa=2\n").is_err());
    }

    #[test]
    fn presets_by_name() {
        let m = Market::from_presets(&["rates-low".into(), "mr-3".into()]).unwrap();
        assert!(m.rates.is_some() && m.equity.is_some());
        let e = Market::from_presets(&["nope".into()]).unwrap_err();
        assert!(e.to_string().contains("nope"));
    }
}
