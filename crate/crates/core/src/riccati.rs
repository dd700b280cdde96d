//! Scalar Riccati equations y' + f(t)y² + g(t)y + h(t) = 0: integration with
//! blow-up detection, neighbourhood classification of solutions, the Cauchy
//! integral identity, comparison bounds, and the solution pair of the
//! comparison system driven by the distinguished Riccati solution.
//!
//! Every nested integral in the identities is carried as an extra state of
//! the same integration (one ODE state per inner integral), never as a
//! quadrature over stored trajectories; cost stays linear in the number of
//! steps and the error control is uniform across all states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{self, OdeOptions, Trajectory};
use crate::scalar::ScalarFn;
use crate::system::ScalarComparisonSystem;

/// |y| beyond this, together with the step collapse that accompanies a
/// Riccati pole, is treated as finite-time escape.
pub const ESCAPE_THRESHOLD: f64 = 1e8;

/// Coefficients and initial data for y' + f y² + g y + h = 0 on [t1, ∞).
#[derive(Clone, Debug)]
pub struct RiccatiProblem {
    pub f: ScalarFn,
    pub g: ScalarFn,
    pub h: ScalarFn,
    pub t1: f64,
    pub y1: f64,
}

impl RiccatiProblem {
    pub fn new(f: ScalarFn, g: ScalarFn, h: ScalarFn, t1: f64, y1: f64) -> Self {
        RiccatiProblem { f, g, h, t1, y1 }
    }

    pub fn constant(f: f64, g: f64, h: f64, t1: f64, y1: f64) -> Self {
        RiccatiProblem::new(
            ScalarFn::constant(f),
            ScalarFn::constant(g),
            ScalarFn::constant(h),
            t1,
            y1,
        )
    }

    fn rhs(&self, t: f64, y: f64) -> f64 {
        -(self.f.eval(t) * y * y + self.g.eval(t) * y + self.h.eval(t))
    }

    fn with_initial(&self, y1: f64) -> RiccatiProblem {
        RiccatiProblem {
            y1,
            ..self.clone()
        }
    }
}

/// How a solution behaves on the working horizon.
///
/// Regular means it reached the horizon; Normal / Extremal refine a regular
/// solution by the behaviour of an initial-value neighbourhood (all nearby
/// solutions regular vs. some nearby escape). Both refinements are
/// finite-horizon surrogates for the limit notions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolutionClass {
    Regular,
    Normal,
    Extremal,
    Escaped,
    Unresolved,
}

/// A computed Riccati trajectory.
#[derive(Debug, Clone)]
pub struct RiccatiSolution {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub escaped: bool,
    pub escape_time: Option<f64>,
    pub classification: SolutionClass,
}

impl RiccatiSolution {
    pub fn final_value(&self) -> f64 {
        *self.values.last().expect("solution has at least one node")
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn is_regular(&self) -> bool {
        !self.escaped && self.classification != SolutionClass::Unresolved
    }
}

fn ode_opts(tol: f64) -> OdeOptions {
    OdeOptions::with_tol(tol, tol * 1e-3)
}

/// Integrates the Riccati equation to the horizon with escape detection.
pub fn integrate_riccati(p: &RiccatiProblem, horizon: f64, tol: f64) -> Result<RiccatiSolution> {
    assert!(horizon > p.t1, "horizon must exceed the initial time");
    let out = ode::integrate_with_event(
        |t, y, dy| dy[0] = p.rhs(t, y[0]),
        p.t1,
        &[p.y1],
        horizon,
        &ode_opts(tol),
        |_, y| y[0].abs() > ESCAPE_THRESHOLD,
    );
    match out {
        Ok(o) => {
            let grid = o.trajectory.times.clone();
            let values: Vec<f64> = o.trajectory.states.iter().map(|s| s[0]).collect();
            let escaped = o.event_time.is_some();
            Ok(RiccatiSolution {
                grid,
                values,
                escaped,
                escape_time: o.event_time,
                classification: if escaped {
                    SolutionClass::Escaped
                } else {
                    SolutionClass::Regular
                },
            })
        }
        // Step collapse without having crossed the escape threshold: the
        // trajectory cannot be continued and cannot be called regular.
        Err(Error::StepUnderflow { t, .. }) | Err(Error::NonFinite { t }) => Ok(RiccatiSolution {
            grid: vec![p.t1, t],
            values: vec![p.y1, f64::NAN],
            escaped: false,
            escape_time: None,
            classification: SolutionClass::Unresolved,
        }),
        Err(e) => Err(e),
    }
}

/// Refines a regular base solution by probing an initial-value
/// neighbourhood of radius delta with the given number of probes: Normal if
/// every probe is regular to the horizon, Extremal if any escapes.
pub fn classify_solution(
    p: &RiccatiProblem,
    horizon: f64,
    delta: f64,
    probes: usize,
    tol: f64,
) -> Result<SolutionClass> {
    let base = integrate_riccati(p, horizon, tol)?;
    match base.classification {
        SolutionClass::Escaped => return Ok(SolutionClass::Escaped),
        SolutionClass::Unresolved => return Ok(SolutionClass::Unresolved),
        _ => {}
    }
    let half = (probes / 2).max(1);
    let mut any_escape = false;
    for side in [-1.0, 1.0] {
        for k in 1..=half {
            let offset = side * delta * k as f64 / (half as f64 + 1.0);
            let probe = integrate_riccati(&p.with_initial(p.y1 + offset), horizon, tol)?;
            match probe.classification {
                SolutionClass::Escaped => any_escape = true,
                SolutionClass::Unresolved => return Ok(SolutionClass::Unresolved),
                _ => {}
            }
        }
    }
    Ok(if any_escape {
        SolutionClass::Extremal
    } else {
        SolutionClass::Normal
    })
}

/// Largest relative residual of the Cauchy integral identity
///
/// ```text
/// y(t)·φ0(t) = y(t1)·exp{−∫ g} − ∫ exp{−∫_τ^t g} h(τ) φ0(τ) dτ,
/// φ0(t) = exp{∫ f·y}
/// ```
///
/// along the solution, with every integral carried as an ODE state.
pub fn cauchy_identity_residual(p: &RiccatiProblem, horizon: f64, tol: f64) -> Result<f64> {
    // States: y, L = ∫ f·y, Q = y(t1)·exp{−∫ g}, W = ∫ e^{−∫ g} h φ0.
    let out = ode::integrate_with_event(
        |t, s, ds| {
            let y = s[0];
            let f = p.f.eval(t);
            let g = p.g.eval(t);
            let h = p.h.eval(t);
            ds[0] = -(f * y * y + g * y + h);
            ds[1] = f * y;
            ds[2] = -g * s[2];
            ds[3] = -g * s[3] + h * s[1].exp();
        },
        p.t1,
        &[p.y1, 0.0, p.y1, 0.0],
        horizon,
        &ode_opts(tol),
        |_, s| s[0].abs() > ESCAPE_THRESHOLD,
    )?;
    if let Some(t) = out.event_time {
        return Err(Error::RiccatiEscape { t });
    }
    let mut worst = 0.0_f64;
    for s in &out.trajectory.states {
        let lhs = s[0] * s[1].exp();
        let rhs = s[2] - s[3];
        let scale = lhs.abs().max(rhs.abs()).max(1.0);
        worst = worst.max((lhs - rhs).abs() / scale);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonOutcome {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Evaluates both sides of the running-integral bound
///
/// ```text
/// ∫ f·y ≤ y(t1)·∫ f·exp{−∫ g} − ∫ f(τ)·[∫_t1^τ exp{−∫_ξ^τ g} h(ξ) dξ] dτ
/// ```
///
/// at the horizon for a regular solution with f ≥ 0.
pub fn lemma21_check(p: &RiccatiProblem, horizon: f64, tol: f64) -> Result<ComparisonOutcome> {
    ensure_nonnegative(&p.f, p.t1, horizon, "f")?;
    // States: y, L = ∫ f·y, G = ∫ g, R1 = ∫ f·e^{−G}, V = ∫ e^{−∫ g} h, R2 = ∫ f·V.
    let out = ode::integrate_with_event(
        |t, s, ds| {
            let y = s[0];
            let f = p.f.eval(t);
            let g = p.g.eval(t);
            let h = p.h.eval(t);
            ds[0] = -(f * y * y + g * y + h);
            ds[1] = f * y;
            ds[2] = g;
            ds[3] = f * (-s[2]).exp();
            ds[4] = -g * s[4] + h;
            ds[5] = f * s[4];
        },
        p.t1,
        &[p.y1, 0.0, 0.0, 0.0, 0.0, 0.0],
        horizon,
        &ode_opts(tol),
        |_, s| s[0].abs() > ESCAPE_THRESHOLD,
    )?;
    if let Some(t) = out.event_time {
        return Err(Error::RiccatiEscape { t });
    }
    let end = out.trajectory.end_state();
    let lhs = end[1];
    let rhs = p.y1 * end[3] - end[5];
    let slack = 1e-9 * (1.0 + lhs.abs().max(rhs.abs()));
    Ok(ComparisonOutcome {
        lhs,
        rhs,
        holds: lhs <= rhs + slack,
    })
}

fn ensure_nonnegative(f: &ScalarFn, a: f64, b: f64, name: &str) -> Result<()> {
    let min = f.min_on(a, b, 257);
    if min < -1e-12 {
        return Err(Error::Precondition(format!(
            "{name}(t) must be nonnegative on the interval (found {min:.3e})"
        )));
    }
    Ok(())
}

/// Value at the horizon of ∫ exp{−∫_τ^t g} |h(τ)| φ(τ) dτ for a weight φ
/// vanishing at infinity, after verifying the two hypotheses: ∫ g diverges
/// and the kernel integral ∫ exp{−∫ g}|h| stays bounded.
pub fn lemma22_check(
    g: &ScalarFn,
    h: &ScalarFn,
    phi: &ScalarFn,
    t0: f64,
    horizon: f64,
    tol: f64,
) -> Result<f64> {
    // States: G = ∫ g, B = ∫ e^{−∫ g}|h|, V = ∫ e^{−∫ g}|h|φ.
    let out = ode::integrate(
        |t, s, ds| {
            let gv = g.eval(t);
            let hv = h.eval(t).abs();
            ds[0] = gv;
            ds[1] = -gv * s[1] + hv;
            ds[2] = -gv * s[2] + hv * phi.eval(t);
        },
        t0,
        &[0.0, 0.0, 0.0],
        horizon,
        &ode_opts(tol),
    )?;
    let traj = &out.trajectory;
    let g_end = traj.end_state()[0];
    let g_late = traj.sample_component(t0 + 0.8 * (horizon - t0), 0);
    if g_end < 3.0 || g_end <= g_late {
        return Err(Error::Hypothesis(format!(
            "∫ g must diverge to +∞ (reached {g_end:.3} at the horizon)"
        )));
    }
    let kernel_peak = traj.max_abs_component(1);
    let kernel_late = traj.sample_component(t0 + 0.8 * (horizon - t0), 1);
    let kernel_end = traj.end_state()[1];
    if kernel_end > kernel_peak * 1.05 && kernel_end > kernel_late * 1.2 {
        return Err(Error::Hypothesis(
            "the kernel integral ∫ exp{−∫ g}|h| does not stay bounded".into(),
        ));
    }
    Ok(traj.end_state()[2])
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderingOutcome {
    pub hypothesis_holds: bool,
    pub ordering_holds: bool,
    /// Minimum over the grid of the hypothesis expression (≥ 0 when it holds).
    pub min_expression: f64,
    /// Minimum over the grid of y0 − y1 (≥ 0 when the ordering holds).
    pub min_gap: f64,
}

/// Compares two Riccati equations: verifies the integral hypothesis that
/// transfers regularity from eq2's solution to eq1, then integrates both and
/// confirms the ordering y0 ≥ y1. The majorants eta0 / eta1 must satisfy the
/// corresponding differential inequalities and dominate the initial value;
/// lambda is the initial value for eq1, taken in [y1(t1), eta0(t1)].
pub fn ordering_check(
    eq1: &RiccatiProblem,
    eq2: &RiccatiProblem,
    eta0: &ScalarFn,
    eta1: &ScalarFn,
    lambda: f64,
    horizon: f64,
    tol: f64,
) -> Result<OrderingOutcome> {
    if (eq1.t1 - eq2.t1).abs() > 1e-12 {
        return Err(Error::Precondition(
            "both equations must share the initial time".into(),
        ));
    }
    let t1 = eq1.t1;
    let mut violations = Vec::new();
    if let Err(e) = ensure_nonnegative(&eq1.f, t1, horizon, "f") {
        violations.push(e.to_string());
    }
    for (name, eta, p) in [("eta0", eta0, eq1), ("eta1", eta1, eq2)] {
        if let Some(t) = inequality_violation(eta, p, t1, horizon) {
            violations.push(format!(
                "{name} fails its differential inequality near t = {t:.4}"
            ));
        }
    }
    let slack = 1e-9 * (1.0 + lambda.abs());
    if lambda < eq2.y1 - slack || lambda > eta0.eval(t1) + slack {
        violations.push(format!(
            "lambda = {lambda} is outside [y1(t1), eta0(t1)] = [{}, {}]",
            eq2.y1,
            eta0.eval(t1)
        ));
    }
    if !violations.is_empty() {
        return Err(Error::Precondition(violations.join("; ")));
    }

    // States: y0 (eq1, from lambda), y1 (eq2), S = ∫ [f(η0+η1) + g],
    // Z = ∫ e^S·Δ with Δ the coefficient-difference quadratic in y1.
    let out = ode::integrate_with_event(
        |t, s, ds| {
            let (y0, y1) = (s[0], s[1]);
            let f = eq1.f.eval(t);
            let g = eq1.g.eval(t);
            let h = eq1.h.eval(t);
            let f1 = eq2.f.eval(t);
            let g1 = eq2.g.eval(t);
            let h1 = eq2.h.eval(t);
            ds[0] = -(f * y0 * y0 + g * y0 + h);
            ds[1] = -(f1 * y1 * y1 + g1 * y1 + h1);
            ds[2] = f * (eta0.eval(t) + eta1.eval(t)) + g;
            let delta = (f1 - f) * y1 * y1 + (g1 - g) * y1 + (h1 - h);
            ds[3] = s[2].exp() * delta;
        },
        t1,
        &[lambda, eq2.y1, 0.0, 0.0],
        horizon,
        &ode_opts(tol),
        |_, s| s[0].abs().max(s[1].abs()) > ESCAPE_THRESHOLD,
    )?;
    if let Some(t) = out.event_time {
        return Err(Error::RiccatiEscape { t });
    }
    let mut min_expression = f64::INFINITY;
    let mut min_gap = f64::INFINITY;
    for s in &out.trajectory.states {
        min_expression = min_expression.min(lambda - s[1] + s[3]);
        min_gap = min_gap.min(s[0] - s[1]);
    }
    let eps = 1e-8 * (1.0 + lambda.abs());
    Ok(OrderingOutcome {
        hypothesis_holds: min_expression >= -eps,
        ordering_holds: min_gap >= -eps,
        min_expression,
        min_gap,
    })
}

/// Central-difference check of η' + fη² + gη + h ≥ 0 on a probe grid;
/// returns the first violating time.
fn inequality_violation(eta: &ScalarFn, p: &RiccatiProblem, a: f64, b: f64) -> Option<f64> {
    let n = 257;
    let step = (b - a) / n as f64;
    let de = step * 1e-3;
    for k in 0..=n {
        let t = (a + step * k as f64).clamp(a + de, b - de);
        let v = eta.eval(t);
        let deriv = (eta.eval(t + de) - eta.eval(t - de)) / (2.0 * de);
        let expr = deriv + p.f.eval(t) * v * v + p.g.eval(t) * v + p.h.eval(t);
        if expr < -1e-5 * (1.0 + v.abs() * v.abs()) {
            return Some(t);
        }
    }
    None
}

/// The distinguished solution pair of the comparison system, driven by the
/// Riccati solution started at zero, together with its diagnostics.
#[derive(Debug, Clone)]
pub struct SolutionPair {
    /// States: [y0, log φ, φ, ψ-representation, K, log-bound Q].
    pub trajectory: Trajectory,
    pub y0: RiccatiSolution,
    /// Largest relative mismatch between ψ = y0·φ and its integral
    /// representation through the d★-kernel.
    pub representation_residual: f64,
    /// max over the grid of log φ − Q; the integral bound on φ holds when
    /// this is ≤ 0 (up to tolerance).
    pub bound_margin: f64,
    pub min_y0: f64,
}

impl SolutionPair {
    pub fn phi_at(&self, t: f64) -> f64 {
        self.trajectory.sample_component(t, 2)
    }

    pub fn psi_at(&self, t: f64) -> f64 {
        let s = self.trajectory.sample(t);
        s[0] * s[2]
    }
}

/// Integrates the Riccati solution y0 with y0(t0) = 0 for the comparison
/// system, reconstructs φ = exp{∫(‖B‖y0 + a★)} and ψ = y0·φ, verifies the
/// integral representation of ψ and the running-integral bound on φ.
/// Escape of y0 means the criterion machinery is inapplicable.
pub fn construct_solution_pair(
    scalar: &ScalarComparisonSystem,
    horizon: f64,
    tol: f64,
) -> Result<SolutionPair> {
    let gap = scalar.gap();
    let out = ode::integrate_with_event(
        |t, s, ds| {
            let y0 = s[0];
            let nb = scalar.norm_b.eval(t);
            let nc = scalar.norm_c.eval(t);
            let astar = scalar.a_star.eval(t);
            let dstar = scalar.d_star.eval(t);
            let e = gap.eval(t);
            ds[0] = -(nb * y0 * y0 + e * y0 - nc);
            ds[1] = nb * y0 + astar;
            ds[2] = (nb * y0 + astar) * s[2];
            ds[3] = dstar * s[3] + nc * s[2];
            ds[4] = -e * s[4] + nc;
            ds[5] = astar + nb * s[4];
        },
        scalar.t0,
        &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
        horizon,
        &ode_opts(tol),
        |_, s| s[0].abs() > ESCAPE_THRESHOLD,
    )?;
    if let Some(t) = out.event_time {
        return Err(Error::RiccatiEscape { t });
    }
    let traj = out.trajectory;
    let mut representation_residual = 0.0_f64;
    let mut bound_margin = f64::NEG_INFINITY;
    let mut min_y0 = f64::INFINITY;
    for s in &traj.states {
        let psi = s[0] * s[2];
        let rep = s[3];
        let scale = psi.abs().max(rep.abs()).max(1e-100);
        representation_residual = representation_residual.max((psi - rep).abs() / scale);
        bound_margin = bound_margin.max(s[1] - s[5]);
        min_y0 = min_y0.min(s[0]);
    }
    let y0 = RiccatiSolution {
        grid: traj.times.clone(),
        values: traj.states.iter().map(|s| s[0]).collect(),
        escaped: false,
        escape_time: None,
        classification: SolutionClass::Regular,
    };
    Ok(SolutionPair {
        trajectory: traj,
        y0,
        representation_residual,
        bound_margin,
        min_y0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::TimeFunction;

    fn expr_fn(src: &str) -> ScalarFn {
        ScalarFn::from_expr(TimeFunction::parse(src, 0.0).unwrap())
    }

    /// The sine-free Riccati instance of the sinusoidally forced example:
    /// y' = −2y² − 0.5y + 0.2, whose positive equilibrium is
    /// (−0.5 + √(0.25 + 1.6))/4.
    fn benchmark_problem() -> RiccatiProblem {
        RiccatiProblem::constant(2.0, 0.5, -0.2, 0.0, 0.0)
    }

    #[test]
    fn pure_integration_case() {
        // f = g = 0, h = −1: y' = 1, y(t) = t.
        let p = RiccatiProblem::constant(0.0, 0.0, -1.0, 0.0, 0.0);
        let sol = integrate_riccati(&p, 5.0, 1e-10).unwrap();
        assert!(!sol.escaped);
        assert!((sol.final_value() - 5.0).abs() < 1e-9);
    }

    #[test]
    fn benchmark_approaches_positive_equilibrium() {
        let expected = (-0.5 + (0.25_f64 + 1.6).sqrt()) / 4.0;
        let sol = integrate_riccati(&benchmark_problem(), 40.0, 1e-10).unwrap();
        assert!(!sol.escaped);
        assert!((sol.final_value() - expected).abs() < 1e-8);
        // Monotone approach from below (up to integration jitter).
        for w in sol.values.windows(2) {
            assert!(w[1] >= w[0] - 1e-9);
        }
        assert!(sol.min_value() >= -1e-12);
    }

    #[test]
    fn blow_up_detected_at_the_pole() {
        // y' = y² (f = −1), y(0) = 1: pole at t = 1.
        let p = RiccatiProblem::constant(-1.0, 0.0, 0.0, 0.0, 1.0);
        let sol = integrate_riccati(&p, 2.0, 1e-9).unwrap();
        assert!(sol.escaped);
        let te = sol.escape_time.unwrap();
        assert!((te - 1.0).abs() < 0.01, "escape at {te}");
        assert!(sol.escape_time.unwrap() < 2.0);
        assert_eq!(sol.classification, SolutionClass::Escaped);
    }

    #[test]
    fn classification_normal_case() {
        // y' = 1 − y², y(0) = 1: the equilibrium 1 attracts the whole
        // neighbourhood.
        let p = RiccatiProblem::constant(1.0, 0.0, -1.0, 0.0, 1.0);
        let class = classify_solution(&p, 50.0, 1e-3, 8, 1e-9).unwrap();
        assert_eq!(class, SolutionClass::Normal);
    }

    #[test]
    fn classification_extremal_case() {
        // y' + y² = 0, y(0) = 0: initial values below zero blow down at
        // t = 1/|y(0)|, so the widest probe (0.8·δ) escapes before 1300.
        let p = RiccatiProblem::constant(1.0, 0.0, 0.0, 0.0, 0.0);
        let class = classify_solution(&p, 1500.0, 1e-3, 8, 1e-9).unwrap();
        assert_eq!(class, SolutionClass::Extremal);
    }

    #[test]
    fn classification_escaped_base() {
        // y' = 1 − y², y(0) = −2 blows down in finite time.
        let p = RiccatiProblem::constant(1.0, 0.0, -1.0, 0.0, -2.0);
        let class = classify_solution(&p, 2.0, 1e-3, 8, 1e-9).unwrap();
        assert_eq!(class, SolutionClass::Escaped);
    }

    #[test]
    fn cauchy_identity_constant_solution() {
        // f = g = h = 0: both sides stay equal to y(0).
        let p = RiccatiProblem::constant(0.0, 0.0, 0.0, 0.0, 0.7);
        let r = cauchy_identity_residual(&p, 10.0, 1e-10).unwrap();
        assert!(r < 1e-12, "residual {r}");
    }

    #[test]
    fn cauchy_identity_on_benchmark() {
        let r = cauchy_identity_residual(&benchmark_problem(), 30.0, 1e-10).unwrap();
        assert!(r < 1e-6, "residual {r}");
    }

    #[test]
    fn cauchy_identity_generic_coefficients() {
        let p = RiccatiProblem::constant(1.0, 1.0, -1.0, 0.0, 0.0);
        let r = cauchy_identity_residual(&p, 5.0, 1e-10).unwrap();
        assert!(r < 1e-6, "residual {r}");
    }

    #[test]
    fn running_integral_bound_trivial_zero_solution() {
        // h ≡ 0 and y(t1) = 0 keep y ≡ 0: both sides vanish.
        let p = RiccatiProblem::constant(1.0, 0.5, 0.0, 0.0, 0.0);
        let out = lemma21_check(&p, 10.0, 1e-10).unwrap();
        assert!(out.lhs.abs() < 1e-12 && out.rhs.abs() < 1e-12);
        assert!(out.holds);
    }

    #[test]
    fn running_integral_bound_on_benchmark() {
        let out = lemma21_check(&benchmark_problem(), 10.0, 1e-10).unwrap();
        assert!(out.holds, "lhs {} rhs {}", out.lhs, out.rhs);
    }

    #[test]
    fn running_integral_bound_generic() {
        let p = RiccatiProblem::constant(1.0, 1.0, -1.0, 0.0, 1.0);
        let out = lemma21_check(&p, 5.0, 1e-10).unwrap();
        assert!(out.holds, "lhs {} rhs {}", out.lhs, out.rhs);
    }

    #[test]
    fn running_integral_bound_requires_nonnegative_f() {
        let p = RiccatiProblem::constant(-1.0, 0.0, 0.0, 0.0, 0.0);
        assert!(matches!(
            lemma21_check(&p, 5.0, 1e-10),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn vanishing_weight_lemma_zero_weight() {
        let g = ScalarFn::constant(1.0);
        let h = ScalarFn::constant(1.0);
        let phi = ScalarFn::constant(0.0);
        let v = lemma22_check(&g, &h, &phi, 0.0, 50.0, 1e-10).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn vanishing_weight_lemma_exponential_weight() {
        // g ≡ 1, h ≡ 1, φ = e^{−t}: the integral is t·e^{−t}.
        let g = ScalarFn::constant(1.0);
        let h = ScalarFn::constant(1.0);
        let phi = expr_fn("exp(-t)");
        let v = lemma22_check(&g, &h, &phi, 0.0, 30.0, 1e-11).unwrap();
        let expect = 30.0 * (-30.0_f64).exp();
        assert!((v - expect).abs() < 1e-12 + 1e-6 * expect, "v = {v}");
    }

    #[test]
    fn vanishing_weight_lemma_slow_weight() {
        let g = ScalarFn::constant(1.0);
        let h = ScalarFn::constant(1.0);
        let phi = expr_fn("1/(1+t)");
        let v100 = lemma22_check(&g, &h, &phi, 0.0, 100.0, 1e-10).unwrap();
        let v50 = lemma22_check(&g, &h, &phi, 0.0, 50.0, 1e-10).unwrap();
        assert!(v100 < 0.05, "value {v100}");
        assert!(v100 < v50, "should decrease: {v50} → {v100}");
    }

    #[test]
    fn vanishing_weight_lemma_rejects_non_divergent_g() {
        let g = ScalarFn::constant(0.0);
        let h = ScalarFn::constant(1.0);
        let phi = expr_fn("exp(-t)");
        assert!(matches!(
            lemma22_check(&g, &h, &phi, 0.0, 30.0, 1e-10),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn ordering_self_comparison_at_equilibrium() {
        // y' = −(y² − 1) from y(0) = 1 stays at the equilibrium; comparing
        // the equation against itself gives equality everywhere.
        let p = RiccatiProblem::constant(1.0, 0.0, -1.0, 0.0, 1.0);
        let eta = ScalarFn::constant(1.0);
        let out = ordering_check(&p, &p, &eta, &eta, 1.0, 20.0, 1e-10).unwrap();
        assert!(out.hypothesis_holds && out.ordering_holds);
        assert!(out.min_expression.abs() < 1e-7);
        assert!(out.min_gap.abs() < 1e-9);
    }

    #[test]
    fn ordering_reproduces_nonnegativity_of_the_driven_solution() {
        // Dropping a nonpositive free term can only lower solutions: the
        // driven solution stays above the zero solution of the reduced
        // equation, which is the nonnegativity of y0.
        let nb = 2.0;
        let e = 0.5;
        let nc = 0.2;
        let eq1 = RiccatiProblem::constant(nb, e, -nc, 0.0, 0.0);
        let eq2 = RiccatiProblem::constant(nb, e, 0.0, 0.0, 0.0);
        // Majorant: the bounded positive equilibrium-bound of eq1.
        let eta = ScalarFn::constant(0.3);
        let out = ordering_check(&eq1, &eq2, &eta, &eta, 0.0, 40.0, 1e-10).unwrap();
        assert!(out.hypothesis_holds, "min expr {}", out.min_expression);
        assert!(out.ordering_holds, "min gap {}", out.min_gap);
    }

    #[test]
    fn ordering_with_distinct_equations() {
        // f = f1 = 1, g = g1 = 0, h = −1, h1 = 0: y0 grows above y1 ≡ 0.
        let eq1 = RiccatiProblem::constant(1.0, 0.0, -1.0, 0.0, 0.0);
        let eq2 = RiccatiProblem::constant(1.0, 0.0, 0.0, 0.0, 0.0);
        let eta = ScalarFn::constant(1.0);
        let out = ordering_check(&eq1, &eq2, &eta, &eta, 0.0, 20.0, 1e-10).unwrap();
        assert!(out.hypothesis_holds && out.ordering_holds);
        assert!(out.min_gap >= -1e-9);
    }

    #[test]
    fn ordering_rejects_lambda_outside_bracket() {
        let p = RiccatiProblem::constant(1.0, 0.0, -1.0, 0.0, 1.0);
        let eta = ScalarFn::constant(1.0);
        assert!(matches!(
            ordering_check(&p, &p, &eta, &eta, 5.0, 10.0, 1e-10),
            Err(Error::Precondition(_))
        ));
    }

    fn comparison_system(
        a_star: f64,
        norm_b: f64,
        norm_c: f64,
        d_star: f64,
    ) -> ScalarComparisonSystem {
        ScalarComparisonSystem {
            a_star: ScalarFn::constant(a_star),
            d_star: ScalarFn::constant(d_star),
            norm_b: ScalarFn::constant(norm_b),
            norm_c: ScalarFn::constant(norm_c),
            t0: 0.0,
        }
    }

    #[test]
    fn solution_pair_with_zero_coupling() {
        // ‖C‖ ≡ 0 keeps y0 ≡ 0 and ψ ≡ 0.
        let scalar = comparison_system(-1.0, 1.0, 0.0, -1.5);
        let pair = construct_solution_pair(&scalar, 30.0, 1e-10).unwrap();
        assert!(pair.y0.values.iter().all(|v| v.abs() < 1e-12));
        assert!(pair.psi_at(10.0).abs() < 1e-12);
        assert!(pair.representation_residual < 1e-10);
    }

    #[test]
    fn solution_pair_on_sine_forced_parameters() {
        // a★ = −1 − sin t, d★ = −1.5, ‖B‖ = 2, ‖C‖ = 0.2.
        let scalar = ScalarComparisonSystem {
            a_star: expr_fn("-1 - sin(t)"),
            d_star: ScalarFn::constant(-1.5),
            norm_b: ScalarFn::constant(2.0),
            norm_c: ScalarFn::constant(0.2),
            t0: 0.0,
        };
        let pair = construct_solution_pair(&scalar, 60.0, 1e-10).unwrap();
        assert!(pair.min_y0 >= -1e-10, "min y0 {}", pair.min_y0);
        assert!(
            pair.representation_residual < 1e-6,
            "residual {}",
            pair.representation_residual
        );
        assert!(pair.bound_margin <= 1e-6, "margin {}", pair.bound_margin);
        // φ decays and ψ follows it down.
        assert!(pair.phi_at(60.0) < 1e-3);
        assert!(pair.psi_at(60.0).abs() < 1e-3);
    }

    #[test]
    fn solution_pair_bound_with_integrable_coupling() {
        // a★ = 0, ‖B‖ integrable, ‖C‖ constant: φ stays bounded by the
        // exponential of the ‖B‖·K integral.
        let scalar = ScalarComparisonSystem {
            a_star: ScalarFn::constant(0.0),
            d_star: ScalarFn::constant(-1.0),
            norm_b: ScalarFn::from_expr(
                TimeFunction::parse("2/(t*ln(t)^2)", std::f64::consts::E).unwrap(),
            ),
            norm_c: ScalarFn::constant(2.0),
            t0: std::f64::consts::E,
        };
        let pair = construct_solution_pair(&scalar, 100.0, 1e-10).unwrap();
        assert!(pair.bound_margin <= 1e-6, "margin {}", pair.bound_margin);
        assert!(pair.min_y0 >= -1e-10);
        // The log-bound state stays finite, so φ is bounded.
        let q_end = pair.trajectory.end_state()[5];
        assert!(q_end.is_finite());
        assert!(pair.phi_at(100.0) <= q_end.exp() * (1.0 + 1e-6));
    }

    #[test]
    fn escape_of_the_driven_solution_is_an_error() {
        // A large gap with the wrong sign drives y0 over the threshold.
        let scalar = comparison_system(5.0, 3.0, 4.0, -5.0);
        // y0' = −3y0² − 10y0 + 4 stays bounded; make it escape instead by
        // flipping the quadratic sign via a negative ‖B‖ is not allowed, so
        // use a strongly negative gap: y0' = −3y0² + 10y0 + 4 grows past the
        // positive equilibrium? It has equilibria; instead drive with huge C
        // and negative E so y0 keeps climbing.
        let scalar2 = ScalarComparisonSystem {
            a_star: ScalarFn::constant(0.0),
            d_star: ScalarFn::constant(0.0),
            norm_b: ScalarFn::constant(0.0),
            norm_c: expr_fn("exp(t)"),
            t0: 0.0,
        };
        // With ‖B‖ = 0 and E = 0, y0' = ‖C‖ = e^t: y0 = e^t − 1 crosses the
        // escape threshold before t = 20.
        let r2 = construct_solution_pair(&scalar2, 25.0, 1e-9);
        assert!(matches!(r2, Err(Error::RiccatiEscape { .. })), "{r2:?}");
        // The bounded case completes fine.
        assert!(construct_solution_pair(&scalar, 10.0, 1e-9).is_ok());
    }
}
