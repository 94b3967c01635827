//! Pairs generated from a concave `h ≥ 0` and an increasing `φ` on ℝ:
//! `F' = exp(∫_1^s dθ/h)`, `P(t) = ∫_{-∞}^{log t} e^{φ(s)+s} ds`, `Q = F∘P`.

use std::fmt;
use std::sync::Arc;

use super::{log_grid, make_chain, DerivativeKind, FnPair, Func, ScalarFn};
use crate::error::{Error, Result};
use crate::integrate::{integrate, integrate_left_tail, ABS_TOL, REL_TOL};

/// The generated pair together with its ingredients.
#[derive(Clone, Debug)]
pub struct Generator {
    pub pair: FnPair,
    pub h: Func,
    pub phi: Func,
}

/// Spot-checks the hypotheses on `h` (positive and concave on a log grid
/// over `[1e-6, 1e6]`) and `φ` (`φ' > 0` on `[-50, 50]`), then builds the
/// pair.
pub fn make_generator(h: Func, phi: Func) -> Result<Generator> {
    for t in log_grid(1e-6, 1e6, 241) {
        let v = h.value(t);
        if !(v > 0.0) {
            return Err(Error::Precondition(format!("h = {} is not positive at t = {t}: {v}", h.describe())));
        }
        let c = h.d2(t);
        if c > 1e-8 * (1.0 + h.d1(t).abs() / t) {
            return Err(Error::Precondition(format!("h = {} is not concave at t = {t}: h'' = {c}", h.describe())));
        }
    }
    for i in 0..=200 {
        let s = -50.0 + 0.5 * i as f64;
        let d = phi.d1(s);
        if !(d > 0.0) {
            return Err(Error::Precondition(format!("phi' = {d} ≤ 0 at s = {s} for phi = {}", phi.describe())));
        }
    }
    let p: Func = Arc::new(GenP { phi: phi.clone() });
    let f: Func = Arc::new(GenF { h: h.clone() });
    let q = make_chain(f.clone(), p.clone());
    Ok(Generator {
        pair: FnPair::with_composite(p, q, f),
        h,
        phi,
    })
}

struct GenF {
    h: Func,
}

impl fmt::Debug for GenF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

impl GenF {
    /// `∫_1^s dθ/h(θ)`, integrated in `τ = log θ`.
    fn g(&self, s: f64) -> f64 {
        if s <= 0.0 {
            if self.h.value(0.0) > 0.0 {
                let inner = integrate(|th| 1.0 / self.h.value(th), 0.0, 1.0, ABS_TOL, REL_TOL);
                return inner.map(|v| -v).unwrap_or(f64::NAN);
            }
            return f64::NEG_INFINITY;
        }
        integrate(|tau: f64| tau.exp() / self.h.value(tau.exp()), 0.0, s.ln(), ABS_TOL, REL_TOL)
            .unwrap_or(f64::NAN)
    }
}

impl ScalarFn for GenF {
    fn value(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        integrate(|s| self.g(s).exp(), 0.0, t, ABS_TOL, 1e-12).unwrap_or(f64::NAN)
    }
    fn d1(&self, t: f64) -> f64 {
        self.g(t).exp()
    }
    fn d2(&self, t: f64) -> f64 {
        self.d1(t) / self.h.value(t)
    }
    fn d3(&self, t: f64) -> f64 {
        let hv = self.h.value(t);
        self.d1(t) * (1.0 - self.h.d1(t)) / (hv * hv)
    }
    fn curvature_ratio(&self, t: f64) -> f64 {
        1.0 / self.h.value(t)
    }
    fn kind(&self) -> DerivativeKind {
        self.h.kind()
    }
    fn describe(&self) -> String {
        format!("genF(h={})", self.h.describe())
    }
}

struct GenP {
    phi: Func,
}

impl fmt::Debug for GenP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

impl ScalarFn for GenP {
    fn value(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        integrate_left_tail(|s: f64| (self.phi.value(s) + s).exp(), t.ln(), ABS_TOL * 1e-6, REL_TOL)
            .unwrap_or(f64::NAN)
    }
    fn d1(&self, t: f64) -> f64 {
        self.phi.value(t.ln()).exp()
    }
    fn d2(&self, t: f64) -> f64 {
        let s = t.ln();
        self.phi.value(s).exp() * self.phi.d1(s) / t
    }
    fn d3(&self, t: f64) -> f64 {
        let s = t.ln();
        let (a, b) = (self.phi.d1(s), self.phi.d2(s));
        self.phi.value(s).exp() * (a * a + b - a) / (t * t)
    }
    fn curvature_ratio(&self, t: f64) -> f64 {
        self.phi.d1(t.ln()) / t
    }
    fn elasticity(&self, t: f64) -> f64 {
        self.phi.d1(t.ln())
    }
    fn kind(&self) -> DerivativeKind {
        self.phi.kind()
    }
    fn describe(&self) -> String {
        format!("genP(phi={})", self.phi.describe())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalarfn::{make_linear, make_log1p, make_power, make_sum};

    #[test]
    fn example_one_recovers_powers() {
        let (p, q) = (1.5, 3.0);
        let g = make_generator(make_linear(p / (q - p), 0.0), make_linear(p - 1.0, 0.0)).unwrap();
        for t in log_grid(1e-2, 1e2, 50) {
            let pv = g.pair.p.value(t);
            assert!((pv - t.powf(p) / p).abs() < 1e-10 * (t.powf(p) / p), "t={t}");
            let f = &g.pair.f;
            assert!(f.d2(t) > 0.0);
            assert!((f.d1(t) / f.d2(t) - g.h.value(t)).abs() < 1e-6 * g.h.value(t).max(1.0));
        }
    }

    #[test]
    fn identity_h_gives_quadratic_f() {
        let g = make_generator(make_linear(1.0, 0.0), make_linear(1.0, 0.0)).unwrap();
        let f = &g.pair.f;
        for t in [0.01, 0.5, 1.0, 7.0] {
            assert!((f.d1(t) - t).abs() < 1e-12 * t.max(1.0));
            assert!((f.d1(t) / f.d2(t) - t).abs() < 1e-12 * t.max(1.0));
            assert!((f.value(t) - 0.5 * t * t).abs() < 1e-10 * t.max(1.0).powi(2));
        }
    }

    #[test]
    fn example_two_elasticity() {
        let h = make_sum(make_linear(2.0, 0.0), make_log1p());
        let g = make_generator(h, make_linear(1.0, 0.0)).unwrap();
        let q = &g.pair.q;
        for t in [1.0f64, 10.0, 1e3, 1e6] {
            let pt = t * t / 2.0;
            let closed = 2.0 / (2.0 + 2.0 * pt.ln_1p() / (t * t)) + 1.0;
            assert!((q.elasticity(t) - closed).abs() < 1e-9, "t={t}: {} vs {closed}", q.elasticity(t));
        }
        assert!((q.elasticity(1e8) - 2.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_ingredients() {
        let convex = make_power(2.0).unwrap();
        assert!(matches!(
            make_generator(convex, make_linear(1.0, 0.0)),
            Err(Error::Precondition(_))
        ));
        assert!(make_generator(make_linear(1.0, 0.0), make_linear(-1.0, 0.0)).is_err());
        assert!(make_generator(make_linear(-1.0, 0.0), make_linear(1.0, 0.0)).is_err());
    }
}
