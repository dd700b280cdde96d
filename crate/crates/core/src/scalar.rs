//! Real-valued functions of time, either expression-backed or computed
//! (spectral envelopes, operator norms of coefficient blocks).
//!
//! Computed functions are evaluated directly at every request rather than
//! tabulated and interpolated; at the matrix sizes this toolkit targets a
//! direct evaluation costs microseconds and introduces no interpolation
//! error into the downstream integrals.

use std::fmt;
use std::sync::Arc;

use crate::error::Result;
use crate::expr::TimeFunction;

/// A real scalar function of time.
#[derive(Clone)]
pub enum ScalarFn {
    Const(f64),
    Expr(Arc<TimeFunction>),
    Computed(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl ScalarFn {
    pub fn constant(v: f64) -> Self {
        ScalarFn::Const(v)
    }

    pub fn from_expr(f: TimeFunction) -> Self {
        ScalarFn::Expr(Arc::new(f))
    }

    pub fn computed(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        ScalarFn::Computed(Arc::new(f))
    }

    /// Evaluates at t. Expression domain errors surface as NaN so that the
    /// integrators, which monitor finiteness, can report the failure with
    /// its time; use [`ScalarFn::try_eval`] for a checked evaluation.
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ScalarFn::Const(v) => *v,
            ScalarFn::Expr(f) => f.eval_real(t).unwrap_or(f64::NAN),
            ScalarFn::Computed(f) => f(t),
        }
    }

    pub fn try_eval(&self, t: f64) -> Result<f64> {
        match self {
            ScalarFn::Const(v) => Ok(*v),
            ScalarFn::Expr(f) => f.eval_real(t),
            ScalarFn::Computed(f) => Ok(f(t)),
        }
    }

    /// Pointwise difference self − other.
    pub fn minus(&self, other: &ScalarFn) -> ScalarFn {
        let a = self.clone();
        let b = other.clone();
        ScalarFn::computed(move |t| a.eval(t) - b.eval(t))
    }

    /// Maximum over n+1 uniform samples of [a, b].
    pub fn max_on(&self, a: f64, b: f64, n: usize) -> f64 {
        let mut m = f64::NEG_INFINITY;
        for k in 0..=n {
            let t = a + (b - a) * k as f64 / n as f64;
            m = m.max(self.eval(t));
        }
        m
    }

    /// Minimum over n+1 uniform samples of [a, b].
    pub fn min_on(&self, a: f64, b: f64, n: usize) -> f64 {
        let mut m = f64::INFINITY;
        for k in 0..=n {
            let t = a + (b - a) * k as f64 / n as f64;
            m = m.min(self.eval(t));
        }
        m
    }
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarFn::Const(v) => write!(f, "ScalarFn::Const({v})"),
            ScalarFn::Expr(e) => write!(f, "ScalarFn::Expr({})", e.expr.render()),
            ScalarFn::Computed(_) => write!(f, "ScalarFn::Computed(..)"),
        }
    }
}
