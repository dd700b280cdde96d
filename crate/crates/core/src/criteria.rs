//! The stability criterion on a scalar comparison system, and the
//! second-order-equation front end.
//!
//! For the comparison system φ' = a★φ + ‖B‖ψ, ψ' = ‖C‖φ + d★ψ with gap
//! E = a★ − d★, the criterion evaluates:
//!
//! 1. the coupling response I₁(t) = ∫ exp{∫_τ^t d★}‖C(τ)‖dτ, which must stay
//!    bounded;
//! 2. the log-growth envelope J(t) = ∫ [a★(τ) + ‖B(τ)‖·K(τ)]dτ with
//!    K' = −E·K + ‖C‖, which must stay bounded above (Lyapunov stability);
//! 2′. the asymptotic variant: ∫E diverges to +∞ while J diverges to −∞
//!    (asymptotic stability).
//!
//! Boundedness on an infinite interval is undecidable from finite data; the
//! trend classifier fits the slope of the last fifth of the horizon and only
//! certifies when the evidence is unambiguous, otherwise the verdict is
//! Inconclusive.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::TimeFunction;
use crate::ode::{self, OdeOptions, Trajectory};
use crate::riccati::{self, SolutionPair};
use crate::scalar::ScalarFn;
use crate::system::{
    self, BlockSystem, CommutationMode, ConditionCheck, EnvelopeProvenance, Envelopes,
    ScalarComparisonSystem,
};

/// Number of points every reported curve is resampled to (fixed so that
/// identical inputs produce identical reports).
pub const CURVE_POINTS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Trend {
    Bounded,
    DivergesUp,
    DivergesDown,
    Unresolved,
}

/// A monitored integral curve with its sup and late-window trend.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionCurve {
    pub sup: f64,
    pub final_value: f64,
    pub trend: Trend,
    /// (t, value) pairs on a fixed uniform grid.
    pub series: Vec<(f64, f64)>,
}

impl ConditionCurve {
    /// Bounded above on the horizon: either settled or drifting downward.
    pub fn upper_bounded(&self) -> bool {
        matches!(self.trend, Trend::Bounded | Trend::DivergesDown)
    }

    /// Builds a curve from explicit samples (sup and trend over the series).
    pub fn from_series(series: Vec<(f64, f64)>) -> ConditionCurve {
        let sup = series
            .iter()
            .map(|(_, v)| *v)
            .fold(f64::NEG_INFINITY, f64::max);
        ConditionCurve {
            sup,
            final_value: series.last().map(|(_, v)| *v).unwrap_or(f64::NAN),
            trend: classify_trend(&series),
            series,
        }
    }

    fn from_trajectory(traj: &Trajectory, component: usize) -> ConditionCurve {
        let sup = traj
            .states
            .iter()
            .map(|s| s[component])
            .fold(f64::NEG_INFINITY, f64::max);
        let series: Vec<(f64, f64)> = traj
            .resample(CURVE_POINTS)
            .into_iter()
            .map(|(t, s)| (t, s[component]))
            .collect();
        let trend = classify_trend(&series);
        ConditionCurve {
            sup,
            final_value: traj.end_state()[component],
            trend,
            series,
        }
    }
}

struct WindowFit {
    slope: f64,
    resid_std: f64,
    span: f64,
}

fn fit_window(window: &[(f64, f64)]) -> Option<WindowFit> {
    let n = window.len() as f64;
    let mean_t = window.iter().map(|(t, _)| t).sum::<f64>() / n;
    let mean_v = window.iter().map(|(_, v)| v).sum::<f64>() / n;
    let mut stt = 0.0;
    let mut stv = 0.0;
    let mut svv = 0.0;
    for (t, v) in window {
        stt += (t - mean_t) * (t - mean_t);
        stv += (t - mean_t) * (v - mean_v);
        svv += (v - mean_v) * (v - mean_v);
    }
    if stt == 0.0 {
        return None;
    }
    let slope = stv / stt;
    Some(WindowFit {
        slope,
        resid_std: ((svv - slope * slope * stt).max(0.0) / n).sqrt(),
        span: window.last().unwrap().0 - window[0].0,
    })
}

/// Trend rule: the net drift of a linear fit over the trailing half of the
/// horizon is weighed against the window's own oscillation plus a
/// scale-relative floor (1e−3 × curve scale per unit time). Drift buried in
/// oscillation is Bounded; drift clearly above it, with the short-window
/// slope agreeing in sign, diverges; the gray zone stays Unresolved so that
/// no verdict is ever certified from noise.
pub fn classify_trend(series: &[(f64, f64)]) -> Trend {
    if series.len() < 16 {
        return Trend::Unresolved;
    }
    let scale = series
        .iter()
        .map(|(_, v)| v.abs())
        .fold(0.0, f64::max)
        .max(1.0);
    let long = match fit_window(&series[series.len() / 2..]) {
        Some(f) => f,
        None => return Trend::Unresolved,
    };
    let short = match fit_window(&series[series.len() - series.len() / 5..]) {
        Some(f) => f,
        None => return Trend::Unresolved,
    };
    if !long.slope.is_finite() || !short.slope.is_finite() {
        return Trend::Unresolved;
    }
    let net = long.slope.abs() * long.span;
    let noise = 2.0 * long.resid_std + 1e-3 * scale * long.span;
    if net <= noise {
        return Trend::Bounded;
    }
    if net >= 2.0 * noise && long.slope * short.slope > 0.0 {
        if long.slope > 0.0 {
            Trend::DivergesUp
        } else {
            Trend::DivergesDown
        }
    } else {
        Trend::Unresolved
    }
}

fn ode_opts(tol: f64) -> OdeOptions {
    OdeOptions::with_tol(tol, tol * 1e-3)
}

/// Condition 1: the coupling response I₁' = d★·I₁ + ‖C‖, I₁(t0) = 0.
pub fn eval_condition1(
    scalar: &ScalarComparisonSystem,
    horizon: f64,
    tol: f64,
) -> Result<ConditionCurve> {
    let out = ode::integrate(
        |t, s, ds| {
            ds[0] = scalar.d_star.eval(t) * s[0] + scalar.norm_c.eval(t);
        },
        scalar.t0,
        &[0.0],
        horizon,
        &ode_opts(tol),
    )?;
    Ok(ConditionCurve::from_trajectory(&out.trajectory, 0))
}

/// Condition 2: the log-growth envelope J' = a★ + ‖B‖·K with
/// K' = −E·K + ‖C‖, both started at zero.
pub fn eval_condition2(
    scalar: &ScalarComparisonSystem,
    horizon: f64,
    tol: f64,
) -> Result<ConditionCurve> {
    let gap = scalar.gap();
    let out = ode::integrate(
        |t, s, ds| {
            ds[0] = -gap.eval(t) * s[0] + scalar.norm_c.eval(t);
            ds[1] = scalar.a_star.eval(t) + scalar.norm_b.eval(t) * s[0];
        },
        scalar.t0,
        &[0.0, 0.0],
        horizon,
        &ode_opts(tol),
    )?;
    Ok(ConditionCurve::from_trajectory(&out.trajectory, 1))
}

/// The asymptotic variant of condition 2.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AsymptoticConditions {
    /// Running integral of the gap E = a★ − d★; must diverge to +∞.
    pub e_integral: ConditionCurve,
    /// The same J as condition 2; must diverge to −∞.
    pub j_integral: ConditionCurve,
    pub satisfied: bool,
}

/// Condition 2′: ∫E → +∞ together with J → −∞.
pub fn eval_condition2_prime(
    scalar: &ScalarComparisonSystem,
    horizon: f64,
    tol: f64,
) -> Result<AsymptoticConditions> {
    let gap = scalar.gap();
    let out = ode::integrate(
        |t, s, ds| {
            let e = gap.eval(t);
            ds[0] = -e * s[0] + scalar.norm_c.eval(t);
            ds[1] = scalar.a_star.eval(t) + scalar.norm_b.eval(t) * s[0];
            ds[2] = e;
        },
        scalar.t0,
        &[0.0, 0.0, 0.0],
        horizon,
        &ode_opts(tol),
    )?;
    let e_integral = ConditionCurve::from_trajectory(&out.trajectory, 2);
    let j_integral = ConditionCurve::from_trajectory(&out.trajectory, 1);
    let satisfied =
        e_integral.trend == Trend::DivergesUp && j_integral.trend == Trend::DivergesDown;
    Ok(AsymptoticConditions {
        e_integral,
        j_integral,
        satisfied,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    LyapunovStable,
    AsymptoticallyStable,
    Inconclusive,
}

/// Diagnostics of the driven Riccati solution and the pair (φ, ψ) it
/// generates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RiccatiDiagnostics {
    pub min_y0: f64,
    pub representation_residual: f64,
    pub bound_margin: f64,
    pub y0_series: Vec<(f64, f64)>,
    pub phi_series: Vec<(f64, f64)>,
    pub psi_series: Vec<(f64, f64)>,
}

/// Everything the criterion concluded about one block system.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Assessment {
    pub verdict: Verdict,
    pub condition_a: ConditionCheck,
    pub condition_b: ConditionCheck,
    pub envelope_provenance: EnvelopeProvenance,
    pub cond1: ConditionCurve,
    pub cond2: ConditionCurve,
    pub cond2prime: AsymptoticConditions,
    pub riccati: Option<RiccatiDiagnostics>,
    pub notes: Vec<String>,
}

/// Tunables for one assessment run.
#[derive(Debug, Clone)]
pub struct CriterionParams {
    pub horizon: f64,
    pub tol: f64,
    pub structure_grid: usize,
    pub structure_tol: f64,
    pub mode: CommutationMode,
}

impl CriterionParams {
    pub fn new(horizon: f64) -> Self {
        CriterionParams {
            horizon,
            tol: 1e-9,
            structure_grid: 16,
            structure_tol: 1e-7,
            mode: CommutationMode::AllPairs,
        }
    }
}

/// Runs the full pipeline on a block system: structural checks, envelopes
/// (derived unless supplied), the comparison system, all conditions, and the
/// verdict. Structural failure never aborts the run — it caps the verdict at
/// Inconclusive with diagnostics.
pub fn assess(
    sys: &BlockSystem,
    user_envelopes: Option<Envelopes>,
    params: &CriterionParams,
) -> Result<Assessment> {
    let grid = system::uniform_grid(sys.t0, params.horizon, params.structure_grid);
    let condition_a = system::check_commutation(sys, &grid, params.structure_tol, params.mode)?;
    let condition_b = system::check_diagonalizability(sys, &grid, params.structure_tol)?;

    let mut notes = Vec::new();
    let envelopes = match user_envelopes {
        Some(env) => env,
        None => system::derive_envelopes(sys, &grid)?,
    };
    let scalar = system::build_scalar_system(sys, &envelopes);

    let cond1 = eval_condition1(&scalar, params.horizon, params.tol)?;
    let cond2 = eval_condition2(&scalar, params.horizon, params.tol)?;
    let cond2prime = eval_condition2_prime(&scalar, params.horizon, params.tol)?;

    let riccati_diag = match riccati::construct_solution_pair(&scalar, params.horizon, params.tol)
    {
        Ok(pair) => Some(diagnostics_from_pair(&pair)),
        Err(Error::RiccatiEscape { t }) => {
            notes.push(format!(
                "the driven Riccati solution escaped at t = {t:.4}; the comparison \
                 machinery is inapplicable on this horizon"
            ));
            None
        }
        Err(e) => return Err(e),
    };

    let structural_ok = condition_a.passed && condition_b.passed;
    if !structural_ok {
        notes.push(
            "structural checks failed: the scalar comparison does not dominate this \
             system, so no stability conclusion is drawn"
                .to_string(),
        );
    }
    if riccati_diag.is_none() {
        notes.push("verdict capped at Inconclusive: no regular driven solution".into());
    }

    let cond1_ok = cond1.upper_bounded();
    let verdict = if !structural_ok || riccati_diag.is_none() {
        Verdict::Inconclusive
    } else if cond1_ok && cond2prime.satisfied {
        Verdict::AsymptoticallyStable
    } else if cond1_ok && cond2.upper_bounded() {
        Verdict::LyapunovStable
    } else {
        Verdict::Inconclusive
    };

    Ok(Assessment {
        verdict,
        condition_a,
        condition_b,
        envelope_provenance: envelopes.provenance,
        cond1,
        cond2,
        cond2prime,
        riccati: riccati_diag,
        notes,
    })
}

fn diagnostics_from_pair(pair: &SolutionPair) -> RiccatiDiagnostics {
    let resampled = pair.trajectory.resample(CURVE_POINTS);
    RiccatiDiagnostics {
        min_y0: pair.min_y0,
        representation_residual: pair.representation_residual,
        bound_margin: pair.bound_margin,
        y0_series: resampled.iter().map(|(t, s)| (*t, s[0])).collect(),
        phi_series: resampled.iter().map(|(t, s)| (*t, s[2])).collect(),
        psi_series: resampled.iter().map(|(t, s)| (*t, s[0] * s[2])).collect(),
    }
}

/// Report for the scalar second-order equation (p·φ')' + q·φ' + r·φ = 0,
/// reduced to the first-order pair φ' = ψ/p, ψ' = −r·φ − (q/p)·ψ.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SecondOrderAssessment {
    pub verdict: Verdict,
    /// I₁: the coupling response with d★ = −Re(q/p) and ‖C‖ = |r|.
    pub i1: ConditionCurve,
    /// I₂: the double integral ∫ (1/|p|)·K with the same kernel.
    pub i2: ConditionCurve,
    /// Set when p > 0, r ≤ 0 and q is real on the grid: the equation then
    /// has a positive nondecreasing solution, so asymptotic stability is
    /// impossible regardless of the boundedness verdict.
    pub asymptotic_excluded: Option<bool>,
    pub notes: Vec<String>,
}

/// Builds the comparison data for the second-order equation. The reduced
/// system has a★ ≡ 0, d★ = −Re(q/p), ‖B‖ = 1/|p|, ‖C‖ = |r|.
pub fn second_order_comparison(
    p: &TimeFunction,
    q: &TimeFunction,
    r: &TimeFunction,
    t0: f64,
    horizon: f64,
) -> Result<ScalarComparisonSystem> {
    // p must stay away from zero on the working interval.
    let pmod = {
        let p = p.clone();
        move |t: f64| p.eval(t).map(|v| v.norm()).unwrap_or(f64::NAN)
    };
    let n = 512;
    for k in 0..=n {
        let t = t0 + (horizon - t0) * k as f64 / n as f64;
        let v = pmod(t);
        if !(v > 1e-12) {
            return Err(Error::Precondition(format!(
                "p(t) must be nonvanishing; |p({t:.4})| = {v:.3e}"
            )));
        }
    }
    let (pc, qc) = (p.clone(), q.clone());
    let d_star = ScalarFn::computed(move |t| {
        match (qc.eval(t), pc.eval(t)) {
            (Ok(qv), Ok(pv)) => match pv.inverse() {
                // Re(q/p) with quaternion division q·p⁻¹.
                Some(pinv) => -(qv * pinv).re(),
                None => f64::NAN,
            },
            _ => f64::NAN,
        }
    });
    let pb = p.clone();
    let norm_b = ScalarFn::computed(move |t| {
        pb.eval(t).map(|v| 1.0 / v.norm()).unwrap_or(f64::NAN)
    });
    let rc = r.clone();
    let norm_c = ScalarFn::computed(move |t| rc.eval(t).map(|v| v.norm()).unwrap_or(f64::NAN));
    Ok(ScalarComparisonSystem {
        a_star: ScalarFn::constant(0.0),
        d_star,
        norm_b,
        norm_c,
        t0,
    })
}

/// Boundedness test for the second-order equation: Lyapunov stable when
/// both I₁ and I₂ stay bounded. Issues no asymptotic claims; when the
/// sign conditions for the growing-solution obstruction hold, that is
/// reported alongside.
pub fn assess_second_order(
    p: &TimeFunction,
    q: &TimeFunction,
    r: &TimeFunction,
    t0: f64,
    horizon: f64,
    tol: f64,
) -> Result<SecondOrderAssessment> {
    let scalar = second_order_comparison(p, q, r, t0, horizon)?;
    let i1 = eval_condition1(&scalar, horizon, tol)?;
    let i2 = eval_condition2(&scalar, horizon, tol)?;
    let mut notes = Vec::new();
    let asymptotic_excluded = match asymptotic_exclusion(p, q, r, t0, horizon) {
        Ok(v) => Some(v),
        Err(Error::Precondition(msg)) => {
            notes.push(format!("growing-solution check skipped: {msg}"));
            None
        }
        Err(e) => return Err(e),
    };
    let verdict = if i1.upper_bounded() && i2.upper_bounded() {
        Verdict::LyapunovStable
    } else {
        Verdict::Inconclusive
    };
    if verdict == Verdict::Inconclusive {
        notes.push("boundedness test is silent on this equation".into());
    }
    if asymptotic_excluded == Some(true) {
        notes.push(
            "p > 0, r ≤ 0, q real: the equation has a positive nondecreasing solution, \
             so it cannot be asymptotically stable"
                .to_string(),
        );
    }
    Ok(SecondOrderAssessment {
        verdict,
        i1,
        i2,
        asymptotic_excluded,
        notes,
    })
}

/// When p > 0, r ≤ 0 and q is real-valued on the grid, the second-order
/// equation carries a positive nondecreasing solution and asymptotic
/// stability is excluded. Outside those sign conditions the check does not
/// apply and reports a precondition error.
pub fn asymptotic_exclusion(
    p: &TimeFunction,
    q: &TimeFunction,
    r: &TimeFunction,
    t0: f64,
    horizon: f64,
) -> Result<bool> {
    let n = 512;
    for k in 0..=n {
        let t = t0 + (horizon - t0) * k as f64 / n as f64;
        let pv = p.eval(t)?;
        let qv = q.eval(t)?;
        let rv = r.eval(t)?;
        if !(pv.is_real(1e-12) && pv.re() > 0.0) {
            return Err(Error::Precondition(format!(
                "p({t:.4}) is not a positive real"
            )));
        }
        if !qv.is_real(1e-12) {
            return Err(Error::Precondition(format!("q({t:.4}) is not real")));
        }
        if !(rv.is_real(1e-12) && rv.re() <= 1e-14) {
            return Err(Error::Precondition(format!(
                "r({t:.4}) is not a nonpositive real"
            )));
        }
    }
    Ok(true)
}
