//! Nonnegative increasing scalar functions `P`, `Q`, the composite
//! `F = Q∘P⁻¹`, and the builders used to produce them.
//!
//! Every function exposes its value and derivatives up to order three on
//! `(0, ∞)`. Builders with closed-form derivatives report
//! [`DerivativeKind::Analytic`]; [`NumericFn`] differentiates a bare closure
//! by central differences. Ratios such as `t f''(t)/f'(t)` have their own
//! trait methods so that builders can supply them without forming `f'` and
//! `f''` separately, which overflow long before their ratio does
//! (e.g. `e^{t/r²}`).

mod builders;
mod generator;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

pub use builders::{
    compose_f, make_chain, make_exp, make_hariya_companion, make_linear, make_log1p, make_plog,
    make_power, make_sum,
};
pub use generator::{make_generator, Generator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DerivativeKind {
    Analytic,
    Numeric,
}

pub trait ScalarFn: fmt::Debug + Send + Sync {
    fn value(&self, t: f64) -> f64;
    fn d1(&self, t: f64) -> f64;
    fn d2(&self, t: f64) -> f64;
    fn d3(&self, t: f64) -> f64;

    /// Fourth derivative, by default a central difference of [`Self::d3`].
    fn d4(&self, t: f64) -> f64 {
        central_diff(&|s| self.d3(s), t, D4_STEP)
    }

    /// `f''(t) / f'(t)`.
    fn curvature_ratio(&self, t: f64) -> f64 {
        self.d2(t) / self.d1(t)
    }

    /// `t f''(t) / f'(t)`.
    fn elasticity(&self, t: f64) -> f64 {
        t * self.curvature_ratio(t)
    }

    /// Solves `f(t) = y` for `t ≥ 0`.
    fn inverse(&self, y: f64) -> Result<f64> {
        invert(self, y)
    }

    fn kind(&self) -> DerivativeKind {
        DerivativeKind::Analytic
    }

    /// The growth condition is an asymptotic hypothesis; it is recorded,
    /// never checked.
    fn growth_declared(&self) -> bool {
        true
    }

    /// Mini-language form of the function, e.g. `power(2)`.
    fn describe(&self) -> String;
}

/// Shared handle to a scalar function.
pub type Func = Arc<dyn ScalarFn>;

const D1_STEP: f64 = 1e-5;
const D2_STEP: f64 = 1e-4;
const D3_STEP: f64 = 1e-3;
const D4_STEP: f64 = 1e-4;

fn step(t: f64, rel: f64) -> f64 {
    rel * t.abs().max(1.0)
}

/// First derivative by central differences with step `rel·max(|t|, 1)`;
/// falls back to a second-order forward stencil when `t - h < 0`.
pub fn central_diff(f: &dyn Fn(f64) -> f64, t: f64, rel: f64) -> f64 {
    let h = step(t, rel);
    if t - h >= 0.0 {
        (f(t + h) - f(t - h)) / (2.0 * h)
    } else {
        (-3.0 * f(t) + 4.0 * f(t + h) - f(t + 2.0 * h)) / (2.0 * h)
    }
}

/// Second derivative by central differences (forward stencil near 0).
pub fn second_diff(f: &dyn Fn(f64) -> f64, t: f64, rel: f64) -> f64 {
    let h = step(t, rel);
    if t - h >= 0.0 {
        (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h)
    } else {
        (2.0 * f(t) - 5.0 * f(t + h) + 4.0 * f(t + 2.0 * h) - f(t + 3.0 * h)) / (h * h)
    }
}

/// Fourth derivative of `f` together with an instability flag: a
/// non-finite value, or difference estimates of `d3'` at steps `h` and
/// `2h` disagreeing by more than `1e-3` relative.
pub fn d4_checked(f: &dyn ScalarFn, t: f64) -> (f64, bool) {
    let v = f.d4(t);
    let a = central_diff(&|s| f.d3(s), t, D4_STEP);
    let b = central_diff(&|s| f.d3(s), t, 2.0 * D4_STEP);
    let scale = a.abs().max(b.abs()).max(1e-300);
    let unstable = !v.is_finite() || (a - b).abs() > 1e-3 * scale;
    (v, unstable)
}

/// Solves `f(t) = y` for an increasing `f` on `[0, ∞)`: bracket by
/// doubling (or halving), then safeguarded Newton with bisection fallback.
/// The bracket is shrunk to relative width `~4ε`, which is tighter than
/// `|f(t) - y| ≤ 1e-12·max(1, |y|)` for well-conditioned `f`.
pub fn invert<F: ScalarFn + ?Sized>(f: &F, y: f64) -> Result<f64> {
    let f0 = f.value(0.0);
    if y.is_nan() || y < f0 {
        return Err(Error::Domain(format!(
            "cannot invert {} at y = {y}: below f(0) = {f0}",
            f.describe()
        )));
    }
    if y == f0 {
        return Ok(0.0);
    }
    if y.is_infinite() {
        return Err(Error::Divergence { y });
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    if f.value(hi) < y {
        let limit = 2f64.powi(200);
        while f.value(hi) < y {
            lo = hi;
            hi *= 2.0;
            if hi > limit {
                return Err(Error::Divergence { y });
            }
        }
    } else {
        while hi > 1e-300 && f.value(0.5 * hi) >= y {
            hi *= 0.5;
        }
        lo = if hi > 1e-300 { 0.5 * hi } else { 0.0 };
    }

    let mut t = 0.5 * (lo + hi);
    let mut last_step = hi - lo;
    for _ in 0..400 {
        let r = f.value(t) - y;
        if r == 0.0 {
            return Ok(t);
        }
        if r < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        let d = f.d1(t);
        let newton = t - r / d;
        let step = (newton - t).abs();
        t = if newton.is_finite() && newton > lo && newton < hi && step <= 0.5 * last_step {
            last_step = step;
            newton
        } else {
            last_step = hi - lo;
            0.5 * (lo + hi)
        };
    }
    // best of the bracket ends and the last iterate
    let best = [t, lo, hi]
        .into_iter()
        .min_by(|a, b| (f.value(*a) - y).abs().total_cmp(&(f.value(*b) - y).abs()))
        .unwrap_or(t);
    Ok(best)
}

/// A value-only function whose derivatives are taken by finite differences.
pub struct NumericFn {
    name: String,
    f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl NumericFn {
    #[allow(clippy::new_ret_no_self)]
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Func {
        Arc::new(NumericFn {
            name: name.into(),
            f: Box::new(f),
        })
    }
}

impl fmt::Debug for NumericFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NumericFn").field("name", &self.name).finish()
    }
}

impl ScalarFn for NumericFn {
    fn value(&self, t: f64) -> f64 {
        (self.f)(t)
    }
    fn d1(&self, t: f64) -> f64 {
        central_diff(&self.f, t, D1_STEP)
    }
    fn d2(&self, t: f64) -> f64 {
        second_diff(&self.f, t, D2_STEP)
    }
    fn d3(&self, t: f64) -> f64 {
        // nested: central difference of the numeric second derivative
        central_diff(&|s| second_diff(&self.f, s, D2_STEP), t, D3_STEP)
    }
    fn kind(&self) -> DerivativeKind {
        DerivativeKind::Numeric
    }
    fn describe(&self) -> String {
        self.name.clone()
    }
}

/// The pair `(P, Q)` together with `F = Q∘P⁻¹`.
#[derive(Clone, Debug)]
pub struct FnPair {
    pub p: Func,
    pub q: Func,
    pub f: Func,
}

impl FnPair {
    pub fn new(p: Func, q: Func) -> Self {
        let f = compose_f(p.clone(), q.clone());
        FnPair { p, q, f }
    }

    /// Uses a known `F` instead of composing through `P⁻¹`. The caller
    /// guarantees `F(P(t)) = Q(t)`.
    pub fn with_composite(p: Func, q: Func, f: Func) -> Self {
        FnPair { p, q, f }
    }

    /// `F⁻¹(y) = P(Q⁻¹(y))`.
    pub fn f_inverse(&self, y: f64) -> Result<f64> {
        Ok(self.p.value(self.q.inverse(y)?))
    }

    pub fn describe(&self) -> PairDescription {
        PairDescription {
            p: self.p.describe(),
            q: self.q.describe(),
            f: self.f.describe(),
            growth_condition: if self.p.growth_declared() && self.f.growth_declared() {
                "declared"
            } else {
                "not declared"
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairDescription {
    pub p: String,
    pub q: String,
    pub f: String,
    pub growth_condition: &'static str,
}

/// `n` log-spaced points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}
