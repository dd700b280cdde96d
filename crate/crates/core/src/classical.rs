//! Classical stability tests run alongside the Riccati-based criterion for
//! comparison: the three Lozinskii logarithmic norms, the spectral
//! precondition of the freezing method, and Lyapunov/Bogdanov-style integral
//! norm estimates.
//!
//! Each test reports Stable only when its own sufficient condition is met on
//! the horizon; otherwise it reports Inconclusive (these are one-sided
//! tests, never instability certificates).

use serde::{Deserialize, Serialize};

use crate::criteria::{ConditionCurve, CURVE_POINTS};
use crate::error::Result;
use crate::ode::{self, OdeOptions};
use crate::quat::QMatrix;
use crate::system::BlockSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogNormKind {
    /// γ_I: row sums, max_i [Re m_ii + Σ_{j≠i} |m_ij|].
    I,
    /// γ_II: column sums, max_j [Re m_jj + Σ_{i≠j} |m_ij|].
    II,
    /// γ_III: largest eigenvalue of the Hermitian part (M + M*)/2.
    III,
}

/// Logarithmic norm (matrix measure) of a square quaternion matrix.
pub fn log_norm(m: &QMatrix, kind: LogNormKind) -> f64 {
    assert!(m.is_square());
    let n = m.rows();
    match kind {
        LogNormKind::I => (0..n)
            .map(|i| {
                let mut s = m.get(i, i).re();
                for j in 0..n {
                    if j != i {
                        s += m.get(i, j).norm();
                    }
                }
                s
            })
            .fold(f64::NEG_INFINITY, f64::max),
        LogNormKind::II => (0..n)
            .map(|j| {
                let mut s = m.get(j, j).re();
                for i in 0..n {
                    if i != j {
                        s += m.get(i, j).norm();
                    }
                }
                s
            })
            .fold(f64::NEG_INFINITY, f64::max),
        LogNormKind::III => m.hermitian_part_max_eigenvalue(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RivalMethod {
    LozinskiiI,
    LozinskiiII,
    LozinskiiIII,
    Freezing,
    LyapunovBogdanov,
}

impl RivalMethod {
    pub fn label(&self) -> &'static str {
        match self {
            RivalMethod::LozinskiiI => "lozinskii-i",
            RivalMethod::LozinskiiII => "lozinskii-ii",
            RivalMethod::LozinskiiIII => "lozinskii-iii",
            RivalMethod::Freezing => "freezing",
            RivalMethod::LyapunovBogdanov => "lyapunov-bogdanov",
        }
    }

    pub fn all() -> [RivalMethod; 5] {
        [
            RivalMethod::LozinskiiI,
            RivalMethod::LozinskiiII,
            RivalMethod::LozinskiiIII,
            RivalMethod::Freezing,
            RivalMethod::LyapunovBogdanov,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RivalVerdict {
    Stable,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RivalReport {
    pub method: RivalMethod,
    pub applicable: bool,
    pub verdict: RivalVerdict,
    pub curve: ConditionCurve,
    pub note: Option<String>,
}

fn ode_opts(tol: f64) -> OdeOptions {
    OdeOptions::with_tol(tol, tol * 1e-3)
}

/// Integrates the chosen logarithmic norm of the assembled coefficient
/// matrix; an upper-bounded integral certifies Lyapunov stability.
pub fn lozinskii_verdict(
    sys: &BlockSystem,
    kind: LogNormKind,
    horizon: f64,
    tol: f64,
) -> Result<RivalReport> {
    let out = ode::integrate(
        |t, _, ds| {
            ds[0] = sys
                .full_matrix(t)
                .map(|m| log_norm(&m, kind))
                .unwrap_or(f64::NAN);
        },
        sys.t0,
        &[0.0],
        horizon,
        &ode_opts(tol.max(1e-8)),
    )?;
    let series = out
        .trajectory
        .resample(CURVE_POINTS)
        .into_iter()
        .map(|(t, s)| (t, s[0]))
        .collect();
    let curve = ConditionCurve::from_series(series);
    let stable = curve.upper_bounded();
    let method = match kind {
        LogNormKind::I => RivalMethod::LozinskiiI,
        LogNormKind::II => RivalMethod::LozinskiiII,
        LogNormKind::III => RivalMethod::LozinskiiIII,
    };
    Ok(RivalReport {
        method,
        applicable: true,
        verdict: if stable {
            RivalVerdict::Stable
        } else {
            RivalVerdict::Inconclusive
        },
        note: (!stable).then(|| "the log-norm integral is not bounded above".to_string()),
        curve,
    })
}

/// Freezing-method precondition: every frozen coefficient matrix must have
/// its spectrum strictly in the left half plane, uniformly in t. Only the
/// necessary spectral part is tested (the quantitative Lipschitz-smallness
/// side is not implemented); a failed precondition already rules the method
/// out.
pub fn freezing_check(sys: &BlockSystem, horizon: f64) -> Result<RivalReport> {
    let mut series = Vec::with_capacity(CURVE_POINTS + 1);
    for k in 0..=CURVE_POINTS {
        let t = sys.t0 + (horizon - sys.t0) * k as f64 / CURVE_POINTS as f64;
        let m = sys.full_matrix(t)?;
        series.push((t, m.max_re_eigenvalue()?));
    }
    let curve = ConditionCurve::from_series(series);
    let passed = curve.sup < 0.0;
    Ok(RivalReport {
        method: RivalMethod::Freezing,
        applicable: passed,
        verdict: if passed {
            RivalVerdict::Stable
        } else {
            RivalVerdict::Inconclusive
        },
        note: Some(if passed {
            format!(
                "precondition passed: frozen spectra stay below {:.4}; the quantitative \
                 slow-variation side of the test is not implemented",
                curve.sup
            )
        } else {
            format!(
                "precondition failed: a frozen matrix reaches spectral abscissa {:.4} ≥ 0",
                curve.sup
            )
        }),
        curve,
    })
}

/// Integral norm estimate: ∫ ‖M(τ)‖ dτ must stay bounded for the estimate
/// family to certify stability; the per-entry absolute integrals are
/// reported as diagnostics.
pub fn integral_norm_check(sys: &BlockSystem, horizon: f64, tol: f64) -> Result<RivalReport> {
    let (m, n) = sys.dims();
    let dim = m + n;
    // State 0: ∫ ‖M‖; states 1..: ∫ |entry| for each of the dim² entries.
    let out = ode::integrate(
        |t, _, ds| match sys.full_matrix(t) {
            Ok(full) => {
                ds[0] = full.op_norm();
                for r in 0..dim {
                    for c in 0..dim {
                        ds[1 + r * dim + c] = full.get(r, c).norm();
                    }
                }
            }
            Err(_) => ds.iter_mut().for_each(|v| *v = f64::NAN),
        },
        sys.t0,
        &vec![0.0; 1 + dim * dim],
        horizon,
        &ode_opts(tol.max(1e-8)),
    )?;
    let series: Vec<(f64, f64)> = out
        .trajectory
        .resample(CURVE_POINTS)
        .into_iter()
        .map(|(t, s)| (t, s[0]))
        .collect();
    let curve = ConditionCurve::from_series(series);
    let stable = curve.upper_bounded();
    let mut note = None;
    if !stable {
        let end = out.trajectory.end_state();
        let mut worst = (0usize, 0usize, 0.0_f64);
        for r in 0..dim {
            for c in 0..dim {
                let v = end[1 + r * dim + c];
                if v > worst.2 {
                    worst = (r, c, v);
                }
            }
        }
        note = Some(format!(
            "norm integral diverges; the largest entry integral is ∫|m_{}{}| ≈ {:.3}",
            worst.0 + 1,
            worst.1 + 1,
            worst.2
        ));
    }
    Ok(RivalReport {
        method: RivalMethod::LyapunovBogdanov,
        applicable: true,
        verdict: if stable {
            RivalVerdict::Stable
        } else {
            RivalVerdict::Inconclusive
        },
        note,
        curve,
    })
}

/// Runs the selected classical tests.
pub fn run_rivals(
    sys: &BlockSystem,
    methods: &[RivalMethod],
    horizon: f64,
    tol: f64,
) -> Result<Vec<RivalReport>> {
    methods
        .iter()
        .map(|m| match m {
            RivalMethod::LozinskiiI => lozinskii_verdict(sys, LogNormKind::I, horizon, tol),
            RivalMethod::LozinskiiII => lozinskii_verdict(sys, LogNormKind::II, horizon, tol),
            RivalMethod::LozinskiiIII => lozinskii_verdict(sys, LogNormKind::III, horizon, tol),
            RivalMethod::Freezing => freezing_check(sys, horizon),
            RivalMethod::LyapunovBogdanov => integral_norm_check(sys, horizon, tol),
        })
        .collect()
}
