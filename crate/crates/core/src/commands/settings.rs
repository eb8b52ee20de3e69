//! Flat `key = value` configuration files and command-line overrides.

use std::path::Path;

use crate::error::{Error, Result};
use crate::hbnbp::{SamplerConfig, SamplerMode, ShapeRule};

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_settings(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Usage(format!(
                "config line {}: expected key = value, got {raw:?}",
                i + 1
            ))
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn read_settings(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_settings(&text)
}

/// Parses a `key=value` command-line override.
pub fn parse_override(s: &str) -> std::result::Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected key=value, got {s:?}"))
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Usage(format!("{key}: cannot parse {value:?}")))
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Usage(format!(
            "{key}: expected true or false, got {value:?}"
        ))),
    }
}

/// Applies one setting to a sampler configuration.
pub fn apply_sampler_setting(config: &mut SamplerConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "gamma0" => config.gamma0 = number(key, value)?,
        "theta0" => config.theta0 = number(key, value)?,
        "gamma_d" => config.gamma_d = number(key, value)?,
        "theta_d" => config.theta_d = number(key, value)?,
        "eta" => config.eta = number(key, value)?,
        "r" => {
            config.shape = if value == "heuristic" {
                ShapeRule::Heuristic
            } else {
                ShapeRule::Fixed(number(key, value)?)
            }
        }
        "mode" => {
            config.mode = match value {
                "exact-slice" | "exact" => SamplerMode::ExactSlice,
                "finite-k" | "finite" => SamplerMode::FiniteK,
                _ => {
                    return Err(Error::Usage(format!(
                        "mode: expected exact-slice or finite-k, got {value:?}"
                    )))
                }
            }
        }
        "K" | "finite_k" => config.finite_k = number(key, value)?,
        "zeta_base" => config.zeta_base = number(key, value)?,
        "zeta0_base" => config.zeta0_base = number(key, value)?,
        "mh_step" => config.mh_step = number(key, value)?,
        "collapsed_b0" => config.collapsed_b0 = flag(key, value)?,
        "initial_components" => config.initial_components = number(key, value)?,
        "max_components" => config.max_components = number(key, value)?,
        "iterations" => config.iterations = number(key, value)?,
        "burn_in" => config.burn_in = Some(number(key, value)?),
        "thin" => config.thin = number(key, value)?,
        "seed" => config.seed = number(key, value)?,
        "used_threshold" => config.used_threshold = number(key, value)?,
        _ => return Err(Error::Usage(format!("unknown sampler setting {key:?}"))),
    }
    Ok(())
}

/// Builds a sampler configuration from defaults, then a config file, then
/// overrides, and validates it. Invalid values are reported as usage
/// errors naming the constraint.
pub fn sampler_config(settings: &[(String, String)]) -> Result<SamplerConfig> {
    let mut config = SamplerConfig::default();
    for (k, v) in settings {
        apply_sampler_setting(&mut config, k, v)?;
    }
    config.validate().map_err(|e| Error::Usage(e.to_string()))?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_overrides() {
        let mut s =
            parse_settings("# defaults\ngamma0 = 2\nmode = finite-k # trailing\n\nK=50\n").unwrap();
        s.push(parse_override("gamma0=4").unwrap());
        let c = sampler_config(&s).unwrap();
        assert_eq!(c.gamma0, 4.0);
        assert_eq!(c.mode, SamplerMode::FiniteK);
        assert_eq!(c.finite_k, 50);
    }

    #[test]
    fn bad_settings_are_usage_errors() {
        assert!(matches!(parse_settings("gamma0"), Err(Error::Usage(_))));
        assert!(matches!(
            sampler_config(&[("nope".into(), "1".into())]),
            Err(Error::Usage(_))
        ));
        assert!(matches!(
            sampler_config(&[("gamma_d".into(), "2".into())]),
            Err(Error::Usage(_))
        ));
        assert!(matches!(
            sampler_config(&[("r".into(), "x".into())]),
            Err(Error::Usage(_))
        ));
    }
}
