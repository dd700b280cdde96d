//! Built-in example systems, shipped as parameterized templates. Catalog
//! names are stable identifiers used by the CLI and the acceptance suite.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::expr;
use crate::system::BlockSystem;

/// A constructed builtin: the system plus notes worth carrying into its
/// report and a horizon that shows the behaviour well.
pub struct BuiltinSystem {
    pub system: BlockSystem,
    pub notes: Vec<String>,
    pub default_horizon: f64,
}

pub const SINE_FORCED: &str = "example-3.15";
pub const LOG_DAMPED: &str = "example-3.14";

pub fn names() -> Vec<&'static str> {
    vec![SINE_FORCED, LOG_DAMPED]
}

pub fn describe(name: &str) -> Option<&'static str> {
    match canonical(name)? {
        SINE_FORCED => Some(
            "two scalar blocks with a sinusoidally forced slow block: \
             A = lambda1 - c*sin(t), B = mu1, C = mu2, D = lambda2, from t0 = 0 \
             (parameters lambda1, lambda2, mu1, mu2, c)",
        ),
        LOG_DAMPED => Some(
            "two scalar blocks with logarithmically decaying coupling: \
             A = nu, B = mu/(t*ln(t)^2), C = mu, D = nu - 1, from t0 = e \
             (parameters nu, mu as expressions of t)",
        ),
        _ => None,
    }
}

fn canonical(name: &str) -> Option<&'static str> {
    match name {
        SINE_FORCED | "sine-forced" => Some(SINE_FORCED),
        LOG_DAMPED | "log-damped" => Some(LOG_DAMPED),
        _ => None,
    }
}

/// Instantiates a builtin by name with `key=value` parameter overrides.
pub fn build(name: &str, params: &BTreeMap<String, String>) -> Result<BuiltinSystem> {
    match canonical(name) {
        Some(SINE_FORCED) => sine_forced(params),
        Some(LOG_DAMPED) => log_damped(params),
        _ => Err(Error::Config(format!(
            "unknown builtin '{name}' (available: {})",
            names().join(", ")
        ))),
    }
}

fn numeric_param(params: &BTreeMap<String, String>, key: &str, default: f64) -> Result<f64> {
    match params.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("parameter {key} must be numeric, got '{v}'"))),
    }
}

fn expr_param(params: &BTreeMap<String, String>, key: &str, default: &str) -> Result<String> {
    let src = params
        .get(key)
        .map(|s| s.as_str())
        .unwrap_or(default)
        .to_string();
    expr::parse(&src)?;
    Ok(src)
}

fn reject_unknown(params: &BTreeMap<String, String>, allowed: &[&str]) -> Result<()> {
    for k in params.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(Error::Config(format!(
                "unknown parameter '{k}' (allowed: {})",
                allowed.join(", ")
            )));
        }
    }
    Ok(())
}

fn sine_forced(params: &BTreeMap<String, String>) -> Result<BuiltinSystem> {
    reject_unknown(params, &["lambda1", "lambda2", "mu1", "mu2", "c"])?;
    let l1 = numeric_param(params, "lambda1", -1.0)?;
    let l2 = numeric_param(params, "lambda2", -1.5)?;
    let m1 = numeric_param(params, "mu1", 2.0)?;
    let m2 = numeric_param(params, "mu2", 0.2)?;
    let c = numeric_param(params, "c", 1.0)?;
    if m1 <= 0.0 || m2 <= 0.0 || c <= 0.0 {
        return Err(Error::Config(
            "mu1, mu2 and c must be positive for this template".into(),
        ));
    }
    let system = BlockSystem::from_strings(
        &[vec![format!("{l1} - {c}*sin(t)")]],
        &[vec![format!("{m1}")]],
        &[vec![format!("{m2}")]],
        &[vec![format!("{l2}")]],
        0.0,
    )?;
    let margin = l1 + m1 * m2 / (l1 - l2);
    let mut notes = vec![format!(
        "coupling margin lambda1 + mu1*mu2/(lambda1 - lambda2) = {margin:.6} \
         ({}; a nonpositive margin is what the certification needs in the \
         slowly forced regime)",
        if margin < 0.0 {
            "negative"
        } else if margin == 0.0 {
            "zero"
        } else {
            "positive"
        }
    )];
    if c >= (l1 + l2).abs() {
        notes.push(format!(
            "forcing amplitude c = {c} is at least |lambda1 + lambda2| = {}; frozen \
             spectra reach the right half plane",
            (l1 + l2).abs()
        ));
    }
    Ok(BuiltinSystem {
        system,
        notes,
        default_horizon: 100.0,
    })
}

fn log_damped(params: &BTreeMap<String, String>) -> Result<BuiltinSystem> {
    reject_unknown(params, &["nu", "mu"])?;
    let nu = expr_param(params, "nu", "0")?;
    let mu = expr_param(params, "mu", "2")?;
    let t0 = std::f64::consts::E;
    let system = BlockSystem::from_strings(
        &[vec![nu.clone()]],
        &[vec![format!("({mu})/(t*ln(t)^2)")]],
        &[vec![mu.clone()]],
        &[vec![format!("({nu}) - 1")]],
        t0,
    )?;
    let notes = vec![
        format!("slow-block rate nu = {nu}, coupling strength mu = {mu}"),
        "the asymptotic variant is decided directly from the gap and growth \
         integrals, not from a sign condition on nu alone"
            .to_string(),
    ];
    Ok(BuiltinSystem {
        system,
        notes,
        default_horizon: 120.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn default_templates_build() {
        for name in names() {
            let b = build(name, &BTreeMap::new()).unwrap();
            assert!(b.system.validate(b.default_horizon).is_ok());
            assert!(!b.notes.is_empty());
            assert!(describe(name).is_some());
        }
    }

    #[test]
    fn aliases_resolve() {
        assert!(build("sine-forced", &BTreeMap::new()).is_ok());
        assert!(build("log-damped", &BTreeMap::new()).is_ok());
        assert!(build("no-such", &BTreeMap::new()).is_err());
    }

    #[test]
    fn sine_forced_margin_note() {
        let b = build(SINE_FORCED, &params(&[("c", "0.5")])).unwrap();
        assert!(b.notes[0].contains("-0.200000"), "{}", b.notes[0]);
        let entry = b.system.eval_a(std::f64::consts::FRAC_PI_2).unwrap().get(0, 0);
        assert!((entry.re() + 1.5).abs() < 1e-12);
    }

    #[test]
    fn parameter_validation() {
        assert!(build(SINE_FORCED, &params(&[("mu1", "-1")])).is_err());
        assert!(build(SINE_FORCED, &params(&[("bogus", "1")])).is_err());
        assert!(build(LOG_DAMPED, &params(&[("nu", "1 +")])).is_err());
        assert!(build(LOG_DAMPED, &params(&[("nu", "-1"), ("mu", "1")])).is_ok());
    }

    #[test]
    fn log_damped_entries() {
        let b = build(LOG_DAMPED, &params(&[("mu", "2")])).unwrap();
        let t = std::f64::consts::E;
        let bv = b.system.eval_b(t).unwrap().get(0, 0);
        assert!((bv.re() - 2.0 / t).abs() < 1e-12);
        let dv = b.system.eval_d(t).unwrap().get(0, 0);
        assert!((dv.re() + 1.0).abs() < 1e-12);
    }
}
