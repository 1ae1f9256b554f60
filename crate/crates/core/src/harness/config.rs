//! Scenario configuration files.
//!
//! Flat `key = value` lines with `#` comments. Values carry explicit unit
//! suffixes (`m`, `MHz`, `dBm`, `Mbps`, ...); powers given in dBm are
//! converted to watts exactly once here, and all downstream math stays in
//! linear scale. Unknown keys and out-of-range values are rejected with a
//! line diagnostic.

use crate::model::Scenario;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

fn split_unit(raw: &str) -> (&str, &str) {
    let trimmed = raw.trim();
    let boundary = trimmed
        .rfind(|c: char| !c.is_ascii_alphabetic())
        .map(|i| i + 1)
        .unwrap_or(0);
    (trimmed[..boundary].trim(), trimmed[boundary..].trim())
}

fn number(raw: &str) -> Result<f64, String> {
    let (num, unit) = split_unit(raw);
    if !unit.is_empty() {
        return Err(format!("unexpected unit `{unit}` for a plain number"));
    }
    num.parse::<f64>()
        .map_err(|_| format!("`{raw}` is not a number"))
}

fn count(raw: &str) -> Result<usize, String> {
    raw.trim()
        .parse::<usize>()
        .map_err(|_| format!("`{raw}` is not a count"))
}

fn length_m(raw: &str) -> Result<f64, String> {
    let (num, unit) = split_unit(raw);
    let value: f64 = num.parse().map_err(|_| format!("`{raw}` is not a length"))?;
    let scale = match unit.to_ascii_lowercase().as_str() {
        "" | "m" => 1.0,
        "cm" => 1e-2,
        "mm" => 1e-3,
        other => return Err(format!("unknown length unit `{other}`")),
    };
    Ok(value * scale)
}

fn frequency_hz(raw: &str) -> Result<f64, String> {
    let (num, unit) = split_unit(raw);
    let value: f64 = num
        .parse()
        .map_err(|_| format!("`{raw}` is not a frequency"))?;
    let scale = match unit.to_ascii_lowercase().as_str() {
        "" | "hz" => 1.0,
        "khz" => 1e3,
        "mhz" => 1e6,
        "ghz" => 1e9,
        other => return Err(format!("unknown frequency unit `{other}`")),
    };
    Ok(value * scale)
}

fn power_w(raw: &str) -> Result<f64, String> {
    let (num, unit) = split_unit(raw);
    let value: f64 = num.parse().map_err(|_| format!("`{raw}` is not a power"))?;
    match unit.to_ascii_lowercase().as_str() {
        "" | "w" => Ok(value),
        "mw" => Ok(value * 1e-3),
        "dbm" => Ok(dbm_to_watts(value)),
        other => Err(format!("unknown power unit `{other}`")),
    }
}

fn rate_bps(raw: &str) -> Result<f64, String> {
    let (num, unit) = split_unit(raw);
    let value: f64 = num.parse().map_err(|_| format!("`{raw}` is not a rate"))?;
    let scale = match unit.to_ascii_lowercase().as_str() {
        "" | "bps" => 1.0,
        "kbps" => 1e3,
        "mbps" => 1e6,
        "gbps" => 1e9,
        other => return Err(format!("unknown rate unit `{other}`")),
    };
    Ok(value * scale)
}

/// Apply one `key = value` assignment to a scenario. Shared by the config
/// parser and the C API setter.
pub fn apply_key(scenario: &mut Scenario, key: &str, value: &str) -> Result<(), String> {
    match key {
        "lambda" => scenario.lambda = length_m(value)?,
        "bandwidth" => scenario.bandwidth = frequency_hz(value)?,
        "noise_power" => scenario.noise_power = power_w(value)?,
        "n_ref" => scenario.n_ref = number(value)?,
        "waveguide_length" => scenario.waveguide_length = length_m(value)?,
        "region_depth" => scenario.region_depth = length_m(value)?,
        "height" => scenario.height = length_m(value)?,
        "n_antennas" => scenario.n_antennas = count(value)?,
        "k_aircomp" => scenario.k_aircomp = count(value)?,
        "k_noma" => scenario.k_noma = count(value)?,
        "alpha" => scenario.alpha = number(value)?,
        "p_max" => scenario.p_max = power_w(value)?,
        "r_min" => scenario.r_min = rate_bps(value)?,
        "mse_threshold" => scenario.mse_threshold = number(value)?,
        "realizations" => scenario.realizations = count(value)?,
        "seed" => {
            scenario.seed = value
                .trim()
                .parse::<u64>()
                .map_err(|_| format!("`{value}` is not a seed"))?
        }
        other => return Err(format!("unknown key `{other}`")),
    }
    Ok(())
}

/// Parse config text into a scenario, starting from the defaults.
pub fn parse_scenario_str(text: &str) -> Result<Scenario, ConfigError> {
    let mut scenario = Scenario::default();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Parse {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            });
        };
        apply_key(&mut scenario, key.trim(), value.trim())
            .map_err(|message| ConfigError::Parse { line, message })?;
    }
    scenario.validate().map_err(|e| ConfigError::Parse {
        line: 0,
        message: e.to_string(),
    })?;
    Ok(scenario)
}

/// Load a scenario file; absent keys keep their defaults.
pub fn load_scenario(path: &Path) -> Result<Scenario, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario_str(&text)
}
