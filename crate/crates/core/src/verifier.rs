//! Empirical validation: integrates the full quaternionic system through its
//! real embedding, checks the scalar majorant actually dominates the block
//! norms, and classifies observed boundedness/decay over a basis of initial
//! conditions (linearity makes the embedded unit vectors a complete probe).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{self, OdeOptions, Trajectory};
use crate::quat::{self, Quaternion};
use crate::system::{BlockSystem, Envelopes};

/// One integrated trajectory of the block system in embedded real form,
/// with the block split remembered for norm bookkeeping.
#[derive(Debug, Clone)]
pub struct TrajectorySet {
    pub trajectory: Trajectory,
    pub initial_basis: String,
    m: usize,
    n: usize,
}

impl TrajectorySet {
    /// ‖Φ(t)‖ and ‖Ψ(t)‖ at a node state.
    pub fn block_norms(&self, state: &[f64]) -> (f64, f64) {
        debug_assert_eq!(state.len(), 4 * (self.m + self.n));
        let split = 4 * self.m;
        let phi = state[..split].iter().map(|v| v * v).sum::<f64>().sqrt();
        let psi = state[split..].iter().map(|v| v * v).sum::<f64>().sqrt();
        (phi, psi)
    }

    pub fn total_norm(&self, state: &[f64]) -> f64 {
        state.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// (t, ‖x(t)‖) along the accepted nodes.
    pub fn norm_series(&self) -> Vec<(f64, f64)> {
        self.trajectory
            .times
            .iter()
            .zip(self.trajectory.states.iter())
            .map(|(t, s)| (*t, self.total_norm(s)))
            .collect()
    }
}

fn ode_opts(tol: f64) -> OdeOptions {
    OdeOptions::with_tol(tol, tol * 1e-3)
}

/// Integrates Φ' = AΦ + BΨ, Ψ' = CΦ + DΨ from quaternionic initial vectors.
pub fn integrate_block_system(
    sys: &BlockSystem,
    phi0: &[Quaternion],
    psi0: &[Quaternion],
    horizon: f64,
    tol: f64,
) -> Result<TrajectorySet> {
    let (m, n) = sys.dims();
    if phi0.len() != m || psi0.len() != n {
        return Err(Error::Dimension(format!(
            "initial vectors must have lengths {m} and {n}"
        )));
    }
    let mut x0 = quat::embed_vector(phi0);
    x0.extend(quat::embed_vector(psi0));
    let traj = integrate_embedded(sys, &x0, horizon, tol)?;
    Ok(TrajectorySet {
        trajectory: traj,
        initial_basis: "explicit initial condition".to_string(),
        m,
        n,
    })
}

fn integrate_embedded(
    sys: &BlockSystem,
    x0: &[f64],
    horizon: f64,
    tol: f64,
) -> Result<Trajectory> {
    let out = ode::integrate(
        |t, x, dx| match sys.full_matrix(t) {
            Ok(full) => {
                let state = quat::unembed_vector(x);
                let deriv = full.mul_vec(&state);
                dx.copy_from_slice(&quat::embed_vector(&deriv));
            }
            Err(_) => dx.iter_mut().for_each(|v| *v = f64::NAN),
        },
        sys.t0,
        x0,
        horizon,
        &ode_opts(tol),
    )?;
    Ok(out.trajectory)
}

/// Outcome of the majorant domination check: the scalar pair started at the
/// matched initial norms must stay above ‖Φ(t)‖ and ‖Ψ(t)‖.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DominationOutcome {
    pub max_violation: f64,
    pub holds: bool,
}

/// Integrates the block system and the scalar comparison system as one
/// augmented ODE (same accepted grid, no interpolation between the two) and
/// measures the worst relative excursion of the block norms above the
/// scalar pair.
pub fn domination_check(
    sys: &BlockSystem,
    env: &Envelopes,
    phi0: &[Quaternion],
    psi0: &[Quaternion],
    horizon: f64,
    rel_tol: f64,
) -> Result<DominationOutcome> {
    let (m, n) = sys.dims();
    if phi0.len() != m || psi0.len() != n {
        return Err(Error::Dimension(format!(
            "initial vectors must have lengths {m} and {n}"
        )));
    }
    let scalar = crate::system::build_scalar_system(sys, env);
    let dim = 4 * (m + n);
    let mut x0 = quat::embed_vector(phi0);
    x0.extend(quat::embed_vector(psi0));
    x0.push(quat::vector_norm(phi0));
    x0.push(quat::vector_norm(psi0));

    let out = ode::integrate(
        |t, x, dx| {
            match sys.full_matrix(t) {
                Ok(full) => {
                    let state = quat::unembed_vector(&x[..dim]);
                    let deriv = full.mul_vec(&state);
                    dx[..dim].copy_from_slice(&quat::embed_vector(&deriv));
                }
                Err(_) => dx.iter_mut().for_each(|v| *v = f64::NAN),
            }
            let (p0, q0) = (x[dim], x[dim + 1]);
            dx[dim] = scalar.a_star.eval(t) * p0 + scalar.norm_b.eval(t) * q0;
            dx[dim + 1] = scalar.norm_c.eval(t) * p0 + scalar.d_star.eval(t) * q0;
        },
        sys.t0,
        &x0,
        horizon,
        &ode_opts(1e-11),
    )?;

    let split = 4 * m;
    let floor = 1e-12 * (x0[dim] + x0[dim + 1]) + 1e-300;
    let mut max_violation = f64::NEG_INFINITY;
    for s in &out.trajectory.states {
        let phi_norm = s[..split].iter().map(|v| v * v).sum::<f64>().sqrt();
        let psi_norm = s[split..dim].iter().map(|v| v * v).sum::<f64>().sqrt();
        let v1 = (phi_norm - s[dim]) / s[dim].max(floor);
        let v2 = (psi_norm - s[dim + 1]) / s[dim + 1].max(floor);
        max_violation = max_violation.max(v1).max(v2);
    }
    Ok(DominationOutcome {
        max_violation,
        holds: max_violation <= rel_tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum EmpiricalClass {
    Decaying,
    Bounded,
    Growing,
    Unresolved,
}

/// Finite-horizon reading of one trajectory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmpiricalVerdict {
    pub classification: EmpiricalClass,
    pub peak_norm: f64,
    /// ‖x(T)‖ / ‖x(t0)‖.
    pub end_ratio: f64,
}

pub const DECAY_THRESHOLD: f64 = 1e-3;
pub const GROWTH_THRESHOLD: f64 = 1e3;
pub const PEAK_GROWTH_FACTOR: f64 = 1e6;
pub const BOUNDED_PEAK_FACTOR: f64 = 10.0;

/// Classifies a trajectory: decaying when the end ratio fell below 1e−3,
/// growing when it exceeded 1e3 (or the peak exploded), bounded when the
/// peak stayed within 10× the initial norm and the tail is flat.
pub fn classify_empirical(traj: &TrajectorySet) -> EmpiricalVerdict {
    let norms = traj.norm_series();
    let initial = norms.first().map(|(_, v)| *v).unwrap_or(0.0).max(1e-300);
    let peak_norm = norms.iter().map(|(_, v)| *v).fold(0.0, f64::max);
    let end_ratio = norms.last().map(|(_, v)| *v).unwrap_or(0.0) / initial;
    let classification = if end_ratio > GROWTH_THRESHOLD || peak_norm / initial > PEAK_GROWTH_FACTOR
    {
        EmpiricalClass::Growing
    } else if end_ratio < DECAY_THRESHOLD {
        EmpiricalClass::Decaying
    } else if peak_norm / initial <= BOUNDED_PEAK_FACTOR
        && crate::criteria::classify_trend(&resample_series(&norms, 400))
            == crate::criteria::Trend::Bounded
    {
        EmpiricalClass::Bounded
    } else {
        EmpiricalClass::Unresolved
    };
    EmpiricalVerdict {
        classification,
        peak_norm,
        end_ratio,
    }
}

fn resample_series(series: &[(f64, f64)], points: usize) -> Vec<(f64, f64)> {
    if series.len() < 2 {
        return series.to_vec();
    }
    let (a, b) = (series[0].0, series[series.len() - 1].0);
    let mut out = Vec::with_capacity(points + 1);
    let mut idx = 0;
    for k in 0..=points {
        let t = a + (b - a) * k as f64 / points as f64;
        while idx + 1 < series.len() && series[idx + 1].0 < t {
            idx += 1;
        }
        let (t0, v0) = series[idx];
        let (t1, v1) = series[(idx + 1).min(series.len() - 1)];
        let v = if t1 > t0 {
            v0 + (v1 - v0) * (t - t0) / (t1 - t0)
        } else {
            v0
        };
        out.push((t, v));
    }
    out
}

/// Empirical sweep over the complete embedded basis of initial conditions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisSweep {
    pub overall: EmpiricalClass,
    pub runs: Vec<EmpiricalVerdict>,
    /// Norm series of the slowest-decaying basis trajectory, for plots.
    pub worst_norm_series: Vec<(f64, f64)>,
}

/// Integrates every embedded unit initial condition (4(m+n) of them) and
/// aggregates: any growing trajectory makes the sweep growing; otherwise
/// any unresolved makes it unresolved; otherwise it is decaying only if
/// every run decayed.
pub fn basis_sweep(sys: &BlockSystem, horizon: f64, tol: f64) -> Result<BasisSweep> {
    let (m, n) = sys.dims();
    let dim = 4 * (m + n);
    let mut runs = Vec::with_capacity(dim);
    let mut worst: Option<(f64, Vec<(f64, f64)>)> = None;
    for k in 0..dim {
        let mut x0 = vec![0.0; dim];
        x0[k] = 1.0;
        let traj = integrate_embedded(sys, &x0, horizon, tol)?;
        let set = TrajectorySet {
            trajectory: traj,
            initial_basis: format!("embedded unit vector {k}"),
            m,
            n,
        };
        let verdict = classify_empirical(&set);
        let series = set.norm_series();
        if worst.as_ref().map_or(true, |(r, _)| verdict.end_ratio > *r) {
            worst = Some((verdict.end_ratio, resample_series(&series, 400)));
        }
        runs.push(verdict);
    }
    let overall = if runs
        .iter()
        .any(|r| r.classification == EmpiricalClass::Growing)
    {
        EmpiricalClass::Growing
    } else if runs
        .iter()
        .any(|r| r.classification == EmpiricalClass::Unresolved)
    {
        EmpiricalClass::Unresolved
    } else if runs
        .iter()
        .all(|r| r.classification == EmpiricalClass::Decaying)
    {
        EmpiricalClass::Decaying
    } else {
        EmpiricalClass::Bounded
    };
    Ok(BasisSweep {
        overall,
        runs,
        worst_norm_series: worst.map(|(_, s)| s).unwrap_or_default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::Quaternion;
    use crate::system::{derive_envelopes, uniform_grid};

    fn strings(rows: &[&[&str]]) -> Vec<Vec<String>> {
        rows.iter()
            .map(|r| r.iter().map(|s| s.to_string()).collect())
            .collect()
    }

    fn scalar_system(a: &str, b: &str, c: &str, d: &str, t0: f64) -> BlockSystem {
        BlockSystem::from_strings(
            &strings(&[&[a]]),
            &strings(&[&[b]]),
            &strings(&[&[c]]),
            &strings(&[&[d]]),
            t0,
        )
        .unwrap()
    }

    #[test]
    fn zero_system_has_constant_trajectories() {
        let sys = scalar_system("0", "0", "0", "0", 0.0);
        let t = integrate_block_system(
            &sys,
            &[Quaternion::real(1.0)],
            &[Quaternion::real(-0.5)],
            20.0,
            1e-10,
        )
        .unwrap();
        for s in &t.trajectory.states {
            let (p, q) = t.block_norms(s);
            assert!((p - 1.0).abs() < 1e-12 && (q - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn decoupled_exponentials_match_closed_forms() {
        let sys = scalar_system("-1", "0", "0", "-2", 0.0);
        let t = integrate_block_system(
            &sys,
            &[Quaternion::real(1.0)],
            &[Quaternion::real(1.0)],
            5.0,
            1e-11,
        )
        .unwrap();
        let end = t.trajectory.end_state();
        let (p, q) = t.block_norms(end);
        assert!((p - (-5.0_f64).exp()).abs() < 1e-9);
        assert!((q - (-10.0_f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn quaternionic_rotation_preserves_norm() {
        // Φ' = (qi·ω)Φ rotates without changing |Φ|.
        let sys = scalar_system("qi*2", "0", "0", "qj*3", 0.0);
        let t = integrate_block_system(
            &sys,
            &[Quaternion::real(1.0)],
            &[Quaternion::new(0.0, 0.5, 0.5, 0.0)],
            15.0,
            1e-11,
        )
        .unwrap();
        for s in &t.trajectory.states {
            let (p, q) = t.block_norms(s);
            assert!((p - 1.0).abs() < 1e-8);
            assert!((q - (0.5_f64 * 0.5 + 0.25).sqrt()).abs() < 1e-8);
        }
    }

    #[test]
    fn domination_zero_system_is_equality() {
        let sys = scalar_system("0", "0", "0", "0", 0.0);
        let env = derive_envelopes(&sys, &uniform_grid(0.0, 10.0, 8)).unwrap();
        let out = domination_check(
            &sys,
            &env,
            &[Quaternion::real(1.0)],
            &[Quaternion::real(1.0)],
            10.0,
            1e-6,
        )
        .unwrap();
        assert!(out.holds);
        assert!(out.max_violation.abs() < 1e-9);
    }

    #[test]
    fn domination_on_the_sine_forced_benchmark() {
        let sys = scalar_system("-1 - sin(t)", "2", "0.2", "-1.5", 0.0);
        let env = derive_envelopes(&sys, &uniform_grid(0.0, 50.0, 12)).unwrap();
        let out = domination_check(
            &sys,
            &env,
            &[Quaternion::real(1.0)],
            &[Quaternion::real(1.0)],
            50.0,
            1e-6,
        )
        .unwrap();
        assert!(out.holds, "violation {}", out.max_violation);
    }

    #[test]
    fn domination_with_rotating_quaternionic_block() {
        // A = ν(t) + i·ω(t): the envelope is ν and the rotation is free.
        let sys = scalar_system("-0.2 + qi*(1 + cos(t))", "1", "0.5", "-0.4 + qk*2", 0.0);
        let env = derive_envelopes(&sys, &uniform_grid(0.0, 40.0, 10)).unwrap();
        let out = domination_check(
            &sys,
            &env,
            &[Quaternion::new(0.6, 0.8, 0.0, 0.0)],
            &[Quaternion::real(1.0)],
            40.0,
            1e-6,
        )
        .unwrap();
        assert!(out.holds, "violation {}", out.max_violation);
    }

    fn synthetic_set(values: Vec<(f64, f64)>) -> TrajectorySet {
        // Scalar 1×1 placeholder geometry; states carry the norm directly.
        let states: Vec<Vec<f64>> = values.iter().map(|(_, v)| vec![*v, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).collect();
        let times: Vec<f64> = values.iter().map(|(t, _)| *t).collect();
        let derivs = vec![vec![0.0; 8]; values.len()];
        TrajectorySet {
            trajectory: Trajectory {
                times,
                states,
                derivs,
            },
            initial_basis: "synthetic".to_string(),
            m: 1,
            n: 1,
        }
    }

    #[test]
    fn classification_thresholds() {
        let grid = |f: fn(f64) -> f64, t_end: f64| -> Vec<(f64, f64)> {
            (0..=600)
                .map(|k| {
                    let t = t_end * k as f64 / 600.0;
                    (t, f(t))
                })
                .collect()
        };
        let decay = classify_empirical(&synthetic_set(grid(|t| (-t).exp(), 20.0)));
        assert_eq!(decay.classification, EmpiricalClass::Decaying);
        assert!((decay.end_ratio - (-20.0_f64).exp()).abs() < 1e-12);

        let constant = classify_empirical(&synthetic_set(grid(|_| 1.0, 20.0)));
        assert_eq!(constant.classification, EmpiricalClass::Bounded);

        let grow = classify_empirical(&synthetic_set(grid(|t| (t / 10.0).exp(), 100.0)));
        assert_eq!(grow.classification, EmpiricalClass::Growing);
        assert!(grow.end_ratio > 2e4);
    }

    #[test]
    fn basis_sweep_on_decaying_system() {
        let sys = scalar_system("-1", "0.1", "0.1", "-2", 0.0);
        let sweep = basis_sweep(&sys, 30.0, 1e-9).unwrap();
        assert_eq!(sweep.overall, EmpiricalClass::Decaying);
        assert_eq!(sweep.runs.len(), 8);
        assert!(!sweep.worst_norm_series.is_empty());
    }

    #[test]
    fn basis_sweep_flags_growth() {
        let sys = scalar_system("0.2", "0", "0", "-1", 0.0);
        let sweep = basis_sweep(&sys, 60.0, 1e-9).unwrap();
        assert_eq!(sweep.overall, EmpiricalClass::Growing);
    }

    #[test]
    fn trajectories_scale_linearly() {
        let sys = scalar_system("-0.3 + qi*1", "0.4", "0.2", "-0.8", 0.0);
        let one = integrate_block_system(
            &sys,
            &[Quaternion::real(1.0)],
            &[Quaternion::real(0.5)],
            25.0,
            1e-10,
        )
        .unwrap();
        let alpha = 3.7;
        let scaled = integrate_block_system(
            &sys,
            &[Quaternion::real(alpha)],
            &[Quaternion::real(0.5 * alpha)],
            25.0,
            1e-10,
        )
        .unwrap();
        for k in 0..=20 {
            let t = 25.0 * k as f64 / 20.0;
            let a = one.trajectory.sample(t);
            let b = scaled.trajectory.sample(t);
            for (x, y) in a.iter().zip(b.iter()) {
                assert!(
                    (alpha * x - y).abs() <= 1e-7 * (1.0 + y.abs()),
                    "t={t}: {x} vs {y}"
                );
            }
        }
    }
}
