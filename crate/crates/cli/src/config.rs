//! TOML configuration for the CLI: a [system] section (explicit blocks, a
//! builtin template, or second-order coefficients), optional [envelopes],
//! [run] controls, and [output] destinations.

use std::collections::BTreeMap;

use serde::Deserialize;

use qstab_core::classical::RivalMethod;
use qstab_core::error::Error;
use qstab_core::expr::TimeFunction;
use qstab_core::scalar::ScalarFn;
use qstab_core::system::{BlockSystem, Envelopes};
use qstab_core::{builtin, Error as CoreError};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    pub system: SystemSection,
    pub envelopes: Option<EnvelopesSection>,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub name: Option<String>,
    pub builtin: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, toml::Value>,
    pub t0: Option<f64>,
    #[serde(rename = "A")]
    pub a: Option<Vec<Vec<String>>>,
    #[serde(rename = "B")]
    pub b: Option<Vec<Vec<String>>>,
    #[serde(rename = "C")]
    pub c: Option<Vec<Vec<String>>>,
    #[serde(rename = "D")]
    pub d: Option<Vec<Vec<String>>>,
    pub p: Option<String>,
    pub q: Option<String>,
    pub r: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopesSection {
    pub a_star: String,
    pub d_star: String,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub horizon: Option<f64>,
    pub tol: Option<f64>,
    pub rivals: Option<Vec<String>>,
    pub verify: Option<bool>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub report: Option<String>,
    pub csv_dir: Option<String>,
    pub format: Option<String>,
}

pub fn load(path: &str) -> Result<ConfigDoc, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {path}: {e}")))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("invalid config {path}: {e}")))
}

pub fn toml_value_to_string(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn parse_rival(name: &str) -> Result<RivalMethod, Error> {
    match name.to_ascii_lowercase().as_str() {
        "lozinskii-i" | "lozinskii-1" => Ok(RivalMethod::LozinskiiI),
        "lozinskii-ii" | "lozinskii-2" => Ok(RivalMethod::LozinskiiII),
        "lozinskii-iii" | "lozinskii-3" => Ok(RivalMethod::LozinskiiIII),
        "freezing" => Ok(RivalMethod::Freezing),
        "lyapunov-bogdanov" | "integral-norm" => Ok(RivalMethod::LyapunovBogdanov),
        other => Err(Error::Config(format!(
            "unknown rival method '{other}' (expected lozinskii-i/ii/iii, freezing, \
             lyapunov-bogdanov)"
        ))),
    }
}

pub fn rival_list(run: &RunSection) -> Result<Vec<RivalMethod>, Error> {
    match &run.rivals {
        None => Ok(RivalMethod::all().to_vec()),
        Some(names) => names.iter().map(|n| parse_rival(n)).collect(),
    }
}

/// What the [system] section describes.
pub enum ConfiguredSystem {
    Blocks {
        name: String,
        system: BlockSystem,
        notes: Vec<String>,
        default_horizon: Option<f64>,
    },
    SecondOrder {
        name: String,
        p: TimeFunction,
        q: TimeFunction,
        r: TimeFunction,
        t0: f64,
    },
}

pub fn build_system(section: &SystemSection) -> Result<ConfiguredSystem, CoreError> {
    let is_second_order = section.p.is_some() || section.q.is_some() || section.r.is_some();
    if is_second_order {
        let t0 = section.t0.unwrap_or(0.0);
        let get = |field: &Option<String>, name: &str| -> Result<TimeFunction, CoreError> {
            let src = field
                .as_ref()
                .ok_or_else(|| CoreError::Config(format!("second-order system needs '{name}'")))?;
            TimeFunction::parse(src, t0)
        };
        return Ok(ConfiguredSystem::SecondOrder {
            name: section
                .name
                .clone()
                .unwrap_or_else(|| "second-order equation".to_string()),
            p: get(&section.p, "p")?,
            q: get(&section.q, "q")?,
            r: get(&section.r, "r")?,
            t0,
        });
    }
    if let Some(builtin_name) = &section.builtin {
        let params: BTreeMap<String, String> = section
            .params
            .iter()
            .map(|(k, v)| (k.clone(), toml_value_to_string(v)))
            .collect();
        let built = builtin::build(builtin_name, &params)?;
        return Ok(ConfiguredSystem::Blocks {
            name: section.name.clone().unwrap_or_else(|| builtin_name.clone()),
            system: built.system,
            notes: built.notes,
            default_horizon: Some(built.default_horizon),
        });
    }
    let t0 = section
        .t0
        .ok_or_else(|| CoreError::Config("explicit systems need t0".into()))?;
    let block = |b: &Option<Vec<Vec<String>>>, name: &str| -> Result<Vec<Vec<String>>, CoreError> {
        b.clone()
            .ok_or_else(|| CoreError::Config(format!("missing block {name}")))
    };
    let system = BlockSystem::from_strings(
        &block(&section.a, "A")?,
        &block(&section.b, "B")?,
        &block(&section.c, "C")?,
        &block(&section.d, "D")?,
        t0,
    )?;
    Ok(ConfiguredSystem::Blocks {
        name: section
            .name
            .clone()
            .unwrap_or_else(|| "configured system".to_string()),
        system,
        notes: Vec::new(),
        default_horizon: None,
    })
}

pub fn build_envelopes(section: &Option<EnvelopesSection>, t0: f64) -> Result<Option<Envelopes>, CoreError> {
    match section {
        None => Ok(None),
        Some(e) => {
            let a = ScalarFn::from_expr(TimeFunction::parse(&e.a_star, t0)?);
            let d = ScalarFn::from_expr(TimeFunction::parse(&e.d_star, t0)?);
            Ok(Some(Envelopes::user_supplied(a, d)))
        }
    }
}
