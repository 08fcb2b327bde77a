//! Line-oriented `key = value` experiment configuration.
//!
//! ```text
//! # broadcast sweep over a few budgets
//! mode = broadcast
//! gammas = 1..=5, 10, 15
//! scene.vehicle_count = 4
//! relevance.delta_L = 0.7
//! ```
//!
//! Keys are dotted (`section.name`); `#` starts a comment. Unknown keys are
//! errors and every key left out takes its default, which is logged.

use std::collections::BTreeSet;
use std::path::PathBuf;

use crate::engine::Mode;
use crate::error::{Error, Result};
use crate::metrics::SvAggregation;
use crate::scenario::MobilityMode;
use crate::schemes::{IntervalClipping, SchemeKind};

use super::ExperimentSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfigKey {
    pub name: &'static str,
    pub help: &'static str,
}

const fn key(name: &'static str, help: &'static str) -> ConfigKey {
    ConfigKey { name, help }
}

pub const CONFIG_KEYS: &[ConfigKey] = &[
    key("mode", "unicast | broadcast (inferred from scene.vehicle_count when absent)"),
    key("schemes", "comma list of Baseline, IRC, RM, Semantic, IdealSemantic"),
    key("gammas", "comma list of budgets and inclusive ranges, e.g. 1..=25"),
    key("replications", "episodes per (scheme, gamma)"),
    key("slots_per_episode", "slots per episode, at least two cycles"),
    key("master_seed", "64-bit master seed"),
    key("output_path", "CSV destination (optional)"),
    key("scene.width", "meters"),
    key("scene.height", "meters"),
    key("scene.object_count", "objects in the scene"),
    key("scene.vehicle_count", "vehicles in the scene"),
    key("scene.mobility", "static | constant_velocity"),
    key("scene.vehicle_speed", "meters per second"),
    key("scene.slot_duration", "seconds"),
    key("scene.a1", "detection logistic scale"),
    key("scene.a2", "detection logistic rate, 1/m"),
    key("scene.a3", "detection logistic midpoint, m"),
    key("relevance.delta_L", "fraction of low-relevance objects"),
    key("relevance.high_min", "lower end of high-relevance values"),
    key("relevance.high_max", "upper end of high-relevance values"),
    key("relevance.randomization_p", "probability of an independent relevance function"),
    key("relevance.rho_near", "class-copy probability for close vehicles"),
    key("relevance.d_near", "meters"),
    key("relevance.d_far", "meters"),
    key("relevance.s_min", "relevance threshold"),
    key("estimation.a4", "estimation-error logistic scale"),
    key("estimation.a5", "estimation-error logistic rate"),
    key("estimation.a6", "estimation-error logistic midpoint"),
    key("estimation.value_range_width", "max(w) - min(w)"),
    key("estimation.clipping", "clamp | truncate"),
    key("metrics.sv_aggregation", "max | mean over intended receivers"),
];

enum KeyError {
    Unknown,
    Syntax(String),
    Range(String),
}

fn number<T: std::str::FromStr>(value: &str) -> Result<T, KeyError> {
    value
        .parse()
        .map_err(|_| KeyError::Syntax(format!("cannot parse `{value}` as a number")))
}

fn finite(value: &str) -> Result<f64, KeyError> {
    let v: f64 = number(value)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(KeyError::Range(format!("{v} is not finite")))
    }
}

fn positive(value: &str) -> Result<f64, KeyError> {
    let v = finite(value)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(KeyError::Range(format!("{v} must be positive")))
    }
}

fn non_negative(value: &str) -> Result<f64, KeyError> {
    let v = finite(value)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(KeyError::Range(format!("{v} must not be negative")))
    }
}

fn unit(value: &str) -> Result<f64, KeyError> {
    let v = finite(value)?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(KeyError::Range(format!("{v} must lie in [0, 1]")))
    }
}

fn gammas(value: &str) -> Result<Vec<usize>, KeyError> {
    let mut out = BTreeSet::new();
    for part in value.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..=") {
            let (lo, hi): (usize, usize) = (number(lo.trim())?, number(hi.trim())?);
            if lo > hi {
                return Err(KeyError::Syntax(format!("empty range `{part}`")));
            }
            out.extend(lo..=hi);
        } else {
            out.insert(number(part)?);
        }
    }
    if out.is_empty() {
        return Err(KeyError::Range("at least one gamma is required".into()));
    }
    if out.contains(&0) {
        return Err(KeyError::Range("gamma must be at least 1".into()));
    }
    Ok(out.into_iter().collect())
}

fn schemes(value: &str) -> Result<Vec<SchemeKind>, KeyError> {
    let mut out = Vec::new();
    for part in value.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let s = SchemeKind::parse(part)
            .ok_or_else(|| KeyError::Syntax(format!("unknown scheme `{part}`")))?;
        if !out.contains(&s) {
            out.push(s);
        }
    }
    if out.is_empty() {
        return Err(KeyError::Range("at least one scheme is required".into()));
    }
    out.sort();
    Ok(out)
}

fn choice<T>(value: &str, parsed: Option<T>, options: &str) -> Result<T, KeyError> {
    parsed.ok_or_else(|| KeyError::Syntax(format!("`{value}` is not one of {options}")))
}

fn set_key(spec: &mut ExperimentSpec, key: &str, value: &str) -> Result<(), KeyError> {
    match key {
        "mode" => spec.mode = choice(value, Mode::parse(value), "unicast, broadcast")?,
        "schemes" => spec.schemes = schemes(value)?,
        "gammas" => spec.gammas = gammas(value)?,
        "replications" => {
            spec.replications = number(value)?;
            if spec.replications == 0 {
                return Err(KeyError::Range("must be at least 1".into()));
            }
        }
        "slots_per_episode" => spec.slots_per_episode = number(value)?,
        "master_seed" => spec.master_seed = number(value)?,
        "output_path" => spec.output_path = Some(PathBuf::from(value)),
        "scene.width" => spec.scene.width = positive(value)?,
        "scene.height" => spec.scene.height = positive(value)?,
        "scene.object_count" => spec.scene.object_count = number(value)?,
        "scene.vehicle_count" => {
            spec.scene.vehicle_count = number(value)?;
            if spec.scene.vehicle_count < 2 {
                return Err(KeyError::Range("at least 2 vehicles are required".into()));
            }
        }
        "scene.mobility" => {
            spec.scene.mobility = choice(value, MobilityMode::parse(value), "static, constant_velocity")?
        }
        "scene.vehicle_speed" => spec.scene.vehicle_speed = non_negative(value)?,
        "scene.slot_duration" => spec.scene.slot_duration = positive(value)?,
        "scene.a1" => spec.scene.detection.scale = non_negative(value)?,
        "scene.a2" => spec.scene.detection.rate = finite(value)?,
        "scene.a3" => spec.scene.detection.midpoint = finite(value)?,
        "relevance.delta_L" => spec.relevance.delta_l = unit(value)?,
        "relevance.high_min" => spec.relevance.high_min = unit(value)?,
        "relevance.high_max" => spec.relevance.high_max = unit(value)?,
        "relevance.randomization_p" => spec.relevance.randomization_p = unit(value)?,
        "relevance.rho_near" => spec.relevance.rho_near = unit(value)?,
        "relevance.d_near" => spec.relevance.d_near = positive(value)?,
        "relevance.d_far" => spec.relevance.d_far = positive(value)?,
        "relevance.s_min" => spec.relevance.s_min = unit(value)?,
        "estimation.a4" => spec.estimation.error_curve.scale = non_negative(value)?,
        "estimation.a5" => spec.estimation.error_curve.rate = finite(value)?,
        "estimation.a6" => spec.estimation.error_curve.midpoint = finite(value)?,
        "estimation.value_range_width" => spec.estimation.value_range_width = positive(value)?,
        "estimation.clipping" => {
            spec.estimation.clipping = choice(value, IntervalClipping::parse(value), "clamp, truncate")?
        }
        "metrics.sv_aggregation" => {
            spec.sv_aggregation = choice(value, SvAggregation::parse(value), "max, mean")?
        }
        _ => return Err(KeyError::Unknown),
    }
    Ok(())
}

fn get_key(spec: &ExperimentSpec, key: &str) -> String {
    let join = |v: Vec<String>| v.join(", ");
    match key {
        "mode" => spec.mode.as_str().into(),
        "schemes" => join(spec.schemes.iter().map(|s| s.name().to_string()).collect()),
        "gammas" => join(spec.gammas.iter().map(|g| g.to_string()).collect()),
        "replications" => spec.replications.to_string(),
        "slots_per_episode" => spec.slots_per_episode.to_string(),
        "master_seed" => spec.master_seed.to_string(),
        "output_path" => spec
            .output_path
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_default(),
        "scene.width" => spec.scene.width.to_string(),
        "scene.height" => spec.scene.height.to_string(),
        "scene.object_count" => spec.scene.object_count.to_string(),
        "scene.vehicle_count" => spec.scene.vehicle_count.to_string(),
        "scene.mobility" => spec.scene.mobility.as_str().into(),
        "scene.vehicle_speed" => spec.scene.vehicle_speed.to_string(),
        "scene.slot_duration" => spec.scene.slot_duration.to_string(),
        "scene.a1" => spec.scene.detection.scale.to_string(),
        "scene.a2" => spec.scene.detection.rate.to_string(),
        "scene.a3" => spec.scene.detection.midpoint.to_string(),
        "relevance.delta_L" => spec.relevance.delta_l.to_string(),
        "relevance.high_min" => spec.relevance.high_min.to_string(),
        "relevance.high_max" => spec.relevance.high_max.to_string(),
        "relevance.randomization_p" => spec.relevance.randomization_p.to_string(),
        "relevance.rho_near" => spec.relevance.rho_near.to_string(),
        "relevance.d_near" => spec.relevance.d_near.to_string(),
        "relevance.d_far" => spec.relevance.d_far.to_string(),
        "relevance.s_min" => spec.relevance.s_min.to_string(),
        "estimation.a4" => spec.estimation.error_curve.scale.to_string(),
        "estimation.a5" => spec.estimation.error_curve.rate.to_string(),
        "estimation.a6" => spec.estimation.error_curve.midpoint.to_string(),
        "estimation.value_range_width" => spec.estimation.value_range_width.to_string(),
        "estimation.clipping" => spec.estimation.clipping.as_str().into(),
        "metrics.sv_aggregation" => spec.sv_aggregation.as_str().into(),
        _ => unreachable!("unlisted config key {key}"),
    }
}

/// Every key with its current value, one `key = value` line each.
pub fn render_config(spec: &ExperimentSpec) -> String {
    CONFIG_KEYS
        .iter()
        .filter(|k| k.name != "output_path" || spec.output_path.is_some())
        .map(|k| format!("{} = {}\n", k.name, get_key(spec, k.name)))
        .collect()
}

pub fn parse_config(text: &str) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::default();
    let mut seen: BTreeSet<&'static str> = BTreeSet::new();

    for (index, raw) in text.lines().enumerate() {
        let line_no = index + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::ConfigSyntax {
            line: line_no,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let Some(known) = CONFIG_KEYS.iter().find(|k| k.name == key) else {
            return Err(Error::UnknownKey {
                line: line_no,
                key: key.to_string(),
            });
        };
        if !seen.insert(known.name) {
            return Err(Error::ConfigSyntax {
                line: line_no,
                message: format!("`{key}` set twice"),
            });
        }
        set_key(&mut spec, key, value).map_err(|e| match e {
            KeyError::Unknown => Error::UnknownKey {
                line: line_no,
                key: key.to_string(),
            },
            KeyError::Syntax(message) => Error::ConfigSyntax {
                line: line_no,
                message: format!("{key}: {message}"),
            },
            KeyError::Range(message) => Error::OutOfRange {
                key: key.to_string(),
                message,
            },
        })?;
    }

    match (seen.contains("mode"), seen.contains("scene.vehicle_count")) {
        (false, _) => spec.mode = Mode::for_vehicle_count(spec.scene.vehicle_count),
        (true, false) if spec.mode == Mode::Broadcast => spec.scene.vehicle_count = 4,
        _ => {}
    }

    for k in CONFIG_KEYS.iter().filter(|k| !seen.contains(k.name)) {
        log::info!("default {} = {}", k.name, get_key(&spec, k.name));
    }

    spec.validate()?;
    Ok(spec)
}
