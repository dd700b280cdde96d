//! Adaptive embedded Runge–Kutta integration (Dormand–Prince 5(4)).
//!
//! One integrator serves the whole toolkit: scalar Riccati equations with
//! augmented integral states, the linear condition integrals, and the
//! embedded real form of the block systems. Dense output is cubic Hermite on
//! accepted steps. A fixed-step mode (same tableau, no controller) exists for
//! convergence-order measurements.

use crate::error::{Error, Result};

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// 5th-order weights (the solution is advanced with these; FSAL).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
// Embedded 4th-order weights for the error estimate.
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Debug, Clone)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
    pub h_max: Option<f64>,
    pub max_steps: usize,
    /// When set, disables the controller and marches with this step.
    pub fixed_step: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-9,
            atol: 1e-12,
            h_init: None,
            h_max: None,
            max_steps: 4_000_000,
            fixed_step: None,
        }
    }
}

impl OdeOptions {
    pub fn with_tol(rtol: f64, atol: f64) -> Self {
        OdeOptions {
            rtol,
            atol,
            ..Default::default()
        }
    }
}

/// Accepted integration points with derivatives, supporting cubic Hermite
/// dense evaluation between nodes.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub derivs: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.states.first().map(|s| s.len()).unwrap_or(0)
    }

    pub fn start_time(&self) -> f64 {
        *self.times.first().expect("trajectory is nonempty")
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().expect("trajectory is nonempty")
    }

    pub fn end_state(&self) -> &[f64] {
        self.states.last().expect("trajectory is nonempty")
    }

    /// Cubic Hermite interpolation at t (clamped to the covered interval).
    pub fn sample(&self, t: f64) -> Vec<f64> {
        let n = self.times.len();
        if t <= self.times[0] {
            return self.states[0].clone();
        }
        if t >= self.times[n - 1] {
            return self.states[n - 1].clone();
        }
        let i = match self
            .times
            .binary_search_by(|probe| probe.partial_cmp(&t).unwrap())
        {
            Ok(k) => return self.states[k].clone(),
            Err(k) => k - 1,
        };
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let h = t1 - t0;
        let th = (t - t0) / h;
        let (h00, h10, h01, h11) = hermite_basis(th);
        let mut out = vec![0.0; self.dim()];
        for d in 0..out.len() {
            out[d] = h00 * self.states[i][d]
                + h10 * h * self.derivs[i][d]
                + h01 * self.states[i + 1][d]
                + h11 * h * self.derivs[i + 1][d];
        }
        out
    }

    pub fn sample_component(&self, t: f64, idx: usize) -> f64 {
        self.sample(t)[idx]
    }

    /// n+1 uniformly spaced samples over the covered interval.
    pub fn resample(&self, n: usize) -> Vec<(f64, Vec<f64>)> {
        let (a, b) = (self.start_time(), self.end_time());
        (0..=n)
            .map(|k| {
                let t = a + (b - a) * k as f64 / n as f64;
                (t, self.sample(t))
            })
            .collect()
    }

    /// Maximum of |component| over the accepted nodes.
    pub fn max_abs_component(&self, idx: usize) -> f64 {
        self.states.iter().map(|s| s[idx].abs()).fold(0.0, f64::max)
    }
}

fn hermite_basis(th: f64) -> (f64, f64, f64, f64) {
    let th2 = th * th;
    let th3 = th2 * th;
    (
        2.0 * th3 - 3.0 * th2 + 1.0,
        th3 - 2.0 * th2 + th,
        -2.0 * th3 + 3.0 * th2,
        th3 - th2,
    )
}

#[derive(Debug, Clone)]
pub struct OdeOutcome {
    pub trajectory: Trajectory,
    /// Set when the stop event fired; integration ends at that node.
    pub event_time: Option<f64>,
}

/// Integrates y' = rhs(t, y) from t0 to t_end.
pub fn integrate<F>(rhs: F, t0: f64, y0: &[f64], t_end: f64, opts: &OdeOptions) -> Result<OdeOutcome>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    integrate_with_event(rhs, t0, y0, t_end, opts, |_, _| false)
}

/// Integrates until t_end or until `event` returns true at an accepted node.
pub fn integrate_with_event<F, E>(
    mut rhs: F,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    opts: &OdeOptions,
    event: E,
) -> Result<OdeOutcome>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    E: Fn(f64, &[f64]) -> bool,
{
    assert!(t_end > t0, "integration interval must be nonempty");
    let n = y0.len();
    let span = t_end - t0;

    let mut k: Vec<Vec<f64>> = (0..7).map(|_| vec![0.0; n]).collect();
    let mut y = y0.to_vec();
    let mut t = t0;

    rhs(t, &y, &mut k[0]);
    if !k[0].iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite { t });
    }

    let h_max = opts.h_max.unwrap_or(span);
    let mut h = match opts.fixed_step {
        Some(h) => h,
        None => opts.h_init.unwrap_or_else(|| {
            let f0 = k[0].iter().map(|v| v * v).sum::<f64>().sqrt();
            let y0n = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            (0.01 * (1.0 + y0n) / (1.0 + f0)).min(h_max).min(span / 10.0)
        }),
    };

    let mut times = vec![t];
    let mut states = vec![y.clone()];
    let mut derivs = vec![k[0].clone()];
    let mut event_time = None;

    let mut y_stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut steps = 0usize;

    while t < t_end {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::StepBudget { t });
        }
        h = h.min(t_end - t).min(h_max);
        let h_floor = 1e-14 * t.abs().max(1.0);
        if h < h_floor {
            return Err(Error::StepUnderflow { t, h });
        }

        // Stages 2..7 (stage 1 derivative is already in k[0] via FSAL).
        let mut finite = true;
        for s in 1..7 {
            for d in 0..n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        acc += a * kj[d];
                    }
                }
                y_stage[d] = y[d] + h * acc;
            }
            let (before, rest) = k.split_at_mut(s);
            let _ = before;
            rhs(t + C[s] * h, &y_stage, &mut rest[0]);
            if !rest[0].iter().all(|v| v.is_finite()) {
                finite = false;
                break;
            }
        }

        let mut err = f64::INFINITY;
        if finite {
            for d in 0..n {
                let mut acc5 = 0.0;
                let mut acc4 = 0.0;
                for s in 0..7 {
                    acc5 += B5[s] * k[s][d];
                    acc4 += B4[s] * k[s][d];
                }
                y_new[d] = y[d] + h * acc5;
                // Reuse y_stage to hold the embedded-difference scaled error.
                let sc = opts.atol + opts.rtol * y[d].abs().max(y_new[d].abs());
                y_stage[d] = h * (acc5 - acc4) / sc;
            }
            if y_new.iter().all(|v| v.is_finite()) {
                err = (y_stage.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
            }
        }

        let accept = opts.fixed_step.is_some() || err <= 1.0;
        if accept && err.is_infinite() {
            return Err(Error::NonFinite { t });
        }

        if accept {
            t += h;
            y.copy_from_slice(&y_new);
            // FSAL: the 7th stage is the derivative at the new point.
            let k6 = k[6].clone();
            k[0].copy_from_slice(&k6);
            times.push(t);
            states.push(y.clone());
            derivs.push(k[0].clone());
            if event(t, &y) {
                event_time = Some(t);
                break;
            }
        }

        if opts.fixed_step.is_none() {
            let scale = if err.is_finite() && err > 0.0 {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            } else if err == 0.0 {
                5.0
            } else {
                0.2
            };
            h *= scale;
        }
    }

    Ok(OdeOutcome {
        trajectory: Trajectory {
            times,
            states,
            derivs,
        },
        event_time,
    })
}
