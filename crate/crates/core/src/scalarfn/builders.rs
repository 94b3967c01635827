use std::fmt;
use std::sync::Arc;

use super::{invert, Func, ScalarFn};
use crate::error::{Error, Result};
use crate::integrate::{integrate, ABS_TOL, REL_TOL};

// c·t^e with the convention 0·∞ = 0 at t = 0.
fn mono(c: f64, t: f64, e: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        c * t.powf(e)
    }
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

#[derive(Debug)]
struct Power(f64);

/// `t ↦ t^p`.
pub fn make_power(p: f64) -> Result<Func> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::Domain(format!("power exponent must be positive, got {p}")));
    }
    Ok(Arc::new(Power(p)))
}

impl ScalarFn for Power {
    fn value(&self, t: f64) -> f64 {
        t.powf(self.0)
    }
    fn d1(&self, t: f64) -> f64 {
        mono(self.0, t, self.0 - 1.0)
    }
    fn d2(&self, t: f64) -> f64 {
        let p = self.0;
        mono(p * (p - 1.0), t, p - 2.0)
    }
    fn d3(&self, t: f64) -> f64 {
        let p = self.0;
        mono(p * (p - 1.0) * (p - 2.0), t, p - 3.0)
    }
    fn d4(&self, t: f64) -> f64 {
        let p = self.0;
        mono(p * (p - 1.0) * (p - 2.0) * (p - 3.0), t, p - 4.0)
    }
    fn curvature_ratio(&self, t: f64) -> f64 {
        (self.0 - 1.0) / t
    }
    fn elasticity(&self, _t: f64) -> f64 {
        self.0 - 1.0
    }
    fn inverse(&self, y: f64) -> Result<f64> {
        if y.is_nan() || y < 0.0 {
            return Err(Error::Domain(format!("cannot invert {} at y = {y}", self.describe())));
        }
        Ok(y.powf(1.0 / self.0))
    }
    fn describe(&self) -> String {
        format!("power({})", fmt_num(self.0))
    }
}

#[derive(Debug)]
struct Exp;

/// `t ↦ e^t`.
pub fn make_exp() -> Func {
    Arc::new(Exp)
}

impl ScalarFn for Exp {
    fn value(&self, t: f64) -> f64 {
        t.exp()
    }
    fn d1(&self, t: f64) -> f64 {
        t.exp()
    }
    fn d2(&self, t: f64) -> f64 {
        t.exp()
    }
    fn d3(&self, t: f64) -> f64 {
        t.exp()
    }
    fn d4(&self, t: f64) -> f64 {
        t.exp()
    }
    fn curvature_ratio(&self, _t: f64) -> f64 {
        1.0
    }
    fn elasticity(&self, t: f64) -> f64 {
        t
    }
    fn inverse(&self, y: f64) -> Result<f64> {
        if y.is_nan() || y < 1.0 {
            return Err(Error::Domain(format!("cannot invert exp at y = {y}: below exp(0) = 1")));
        }
        Ok(y.ln())
    }
    fn describe(&self) -> String {
        "exp".into()
    }
}

#[derive(Debug)]
struct PLog(f64);

/// `t ↦ ∫_0^t s^p log(1+s) ds`.
pub fn make_plog(p: f64) -> Result<Func> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::Domain(format!("plog exponent must be positive, got {p}")));
    }
    Ok(Arc::new(PLog(p)))
}

impl ScalarFn for PLog {
    fn value(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let p = self.0;
        integrate(|s: f64| s.powf(p) * s.ln_1p(), 0.0, t, ABS_TOL, REL_TOL).unwrap_or(f64::NAN)
    }
    fn d1(&self, t: f64) -> f64 {
        t.powf(self.0) * t.ln_1p()
    }
    fn d2(&self, t: f64) -> f64 {
        let p = self.0;
        mono(p, t, p - 1.0) * t.ln_1p() + t.powf(p) / (1.0 + t)
    }
    fn d3(&self, t: f64) -> f64 {
        let p = self.0;
        let u = 1.0 + t;
        mono(p * (p - 1.0), t, p - 2.0) * t.ln_1p() + 2.0 * mono(p, t, p - 1.0) / u - t.powf(p) / (u * u)
    }
    fn curvature_ratio(&self, t: f64) -> f64 {
        self.elasticity(t) / t
    }
    fn elasticity(&self, t: f64) -> f64 {
        let l = t.ln_1p();
        // t/((1+t)log(1+t)) → 1 as t → 0
        let tail = if t < 1e-8 { 1.0 - 0.5 * t } else { t / ((1.0 + t) * l) };
        self.0 + tail
    }
    fn describe(&self) -> String {
        format!("plog({})", fmt_num(self.0))
    }
}

#[derive(Debug)]
struct Linear(f64, f64);

/// `t ↦ a t + b` (generator atom, typically for `φ`).
pub fn make_linear(a: f64, b: f64) -> Func {
    Arc::new(Linear(a, b))
}

impl ScalarFn for Linear {
    fn value(&self, t: f64) -> f64 {
        self.0 * t + self.1
    }
    fn d1(&self, _t: f64) -> f64 {
        self.0
    }
    fn d2(&self, _t: f64) -> f64 {
        0.0
    }
    fn d3(&self, _t: f64) -> f64 {
        0.0
    }
    fn d4(&self, _t: f64) -> f64 {
        0.0
    }
    fn inverse(&self, y: f64) -> Result<f64> {
        if self.0 > 0.0 && y >= self.1 {
            Ok((y - self.1) / self.0)
        } else {
            invert(self, y)
        }
    }
    fn describe(&self) -> String {
        format!("linear({},{})", fmt_num(self.0), fmt_num(self.1))
    }
}

#[derive(Debug)]
struct Log1p;

/// `t ↦ log(1+t)`.
pub fn make_log1p() -> Func {
    Arc::new(Log1p)
}

impl ScalarFn for Log1p {
    fn value(&self, t: f64) -> f64 {
        t.ln_1p()
    }
    fn d1(&self, t: f64) -> f64 {
        1.0 / (1.0 + t)
    }
    fn d2(&self, t: f64) -> f64 {
        -1.0 / ((1.0 + t) * (1.0 + t))
    }
    fn d3(&self, t: f64) -> f64 {
        2.0 / (1.0 + t).powi(3)
    }
    fn d4(&self, t: f64) -> f64 {
        -6.0 / (1.0 + t).powi(4)
    }
    fn inverse(&self, y: f64) -> Result<f64> {
        if y.is_nan() || y < 0.0 {
            return Err(Error::Domain(format!("cannot invert log1p at y = {y}")));
        }
        Ok(y.exp_m1())
    }
    fn describe(&self) -> String {
        "log1p".into()
    }
}

#[derive(Debug)]
struct Sum(Func, Func);

/// `t ↦ f(t) + g(t)`.
pub fn make_sum(f: Func, g: Func) -> Func {
    Arc::new(Sum(f, g))
}

impl ScalarFn for Sum {
    fn value(&self, t: f64) -> f64 {
        self.0.value(t) + self.1.value(t)
    }
    fn d1(&self, t: f64) -> f64 {
        self.0.d1(t) + self.1.d1(t)
    }
    fn d2(&self, t: f64) -> f64 {
        self.0.d2(t) + self.1.d2(t)
    }
    fn d3(&self, t: f64) -> f64 {
        self.0.d3(t) + self.1.d3(t)
    }
    fn d4(&self, t: f64) -> f64 {
        self.0.d4(t) + self.1.d4(t)
    }
    fn kind(&self) -> super::DerivativeKind {
        weakest(&[&self.0, &self.1])
    }
    fn growth_declared(&self) -> bool {
        self.0.growth_declared() && self.1.growth_declared()
    }
    fn describe(&self) -> String {
        format!("sum({},{})", self.0.describe(), self.1.describe())
    }
}

fn weakest(fs: &[&Func]) -> super::DerivativeKind {
    if fs.iter().any(|f| f.kind() == super::DerivativeKind::Numeric) {
        super::DerivativeKind::Numeric
    } else {
        super::DerivativeKind::Analytic
    }
}

/// `Q(t) = ∫_0^t P'(s)^{1/r²} ds`.
struct Hariya {
    p: Func,
    r: f64,
}

impl fmt::Debug for Hariya {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Hariya").field("p", &self.p.describe()).field("r", &self.r).finish()
    }
}

pub fn make_hariya_companion(p: Func, r: f64) -> Result<Func> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::Domain(format!("hariya companion needs r in (0, 1], got {r}")));
    }
    Ok(Arc::new(Hariya { p, r }))
}

impl Hariya {
    fn e(&self) -> f64 {
        1.0 / (self.r * self.r)
    }
}

impl ScalarFn for Hariya {
    fn value(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let e = self.e();
        integrate(|s| self.p.d1(s).powf(e), 0.0, t, ABS_TOL, REL_TOL).unwrap_or(f64::NAN)
    }
    fn d1(&self, t: f64) -> f64 {
        self.p.d1(t).powf(self.e())
    }
    fn d2(&self, t: f64) -> f64 {
        let e = self.e();
        e * self.p.d1(t).powf(e - 1.0) * self.p.d2(t)
    }
    fn d3(&self, t: f64) -> f64 {
        let e = self.e();
        let (p1, p2, p3) = (self.p.d1(t), self.p.d2(t), self.p.d3(t));
        let first = if e == 1.0 { 0.0 } else { (e - 1.0) * p1.powf(e - 2.0) * p2 * p2 };
        e * (first + p1.powf(e - 1.0) * p3)
    }
    fn curvature_ratio(&self, t: f64) -> f64 {
        self.e() * self.p.curvature_ratio(t)
    }
    fn elasticity(&self, t: f64) -> f64 {
        self.e() * self.p.elasticity(t)
    }
    fn kind(&self) -> super::DerivativeKind {
        self.p.kind()
    }
    fn growth_declared(&self) -> bool {
        self.p.growth_declared()
    }
    fn describe(&self) -> String {
        format!("hariya({},{})", self.p.describe(), fmt_num(self.r))
    }
}

/// `outer ∘ inner`.
struct Chain {
    outer: Func,
    inner: Func,
}

impl fmt::Debug for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

pub fn make_chain(outer: Func, inner: Func) -> Func {
    Arc::new(Chain { outer, inner })
}

impl ScalarFn for Chain {
    fn value(&self, t: f64) -> f64 {
        self.outer.value(self.inner.value(t))
    }
    fn d1(&self, t: f64) -> f64 {
        self.outer.d1(self.inner.value(t)) * self.inner.d1(t)
    }
    fn d2(&self, t: f64) -> f64 {
        let x = self.inner.value(t);
        let (i1, i2) = (self.inner.d1(t), self.inner.d2(t));
        self.outer.d2(x) * i1 * i1 + self.outer.d1(x) * i2
    }
    fn d3(&self, t: f64) -> f64 {
        let x = self.inner.value(t);
        let (i1, i2, i3) = (self.inner.d1(t), self.inner.d2(t), self.inner.d3(t));
        self.outer.d3(x) * i1 * i1 * i1 + 3.0 * self.outer.d2(x) * i1 * i2 + self.outer.d1(x) * i3
    }
    fn curvature_ratio(&self, t: f64) -> f64 {
        let x = self.inner.value(t);
        self.outer.curvature_ratio(x) * self.inner.d1(t) + self.inner.curvature_ratio(t)
    }
    fn inverse(&self, y: f64) -> Result<f64> {
        self.inner.inverse(self.outer.inverse(y)?)
    }
    fn kind(&self) -> super::DerivativeKind {
        weakest(&[&self.outer, &self.inner])
    }
    fn growth_declared(&self) -> bool {
        self.outer.growth_declared() && self.inner.growth_declared()
    }
    fn describe(&self) -> String {
        format!("{}∘{}", self.outer.describe(), self.inner.describe())
    }
}

/// `F = Q ∘ P⁻¹`. Evaluation outside the range of `P` yields NaN.
struct Composite {
    p: Func,
    q: Func,
}

impl fmt::Debug for Composite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

/// Builds `F = Q∘P⁻¹` with chain-rule derivatives at `T = P⁻¹(x)`.
pub fn compose_f(p: Func, q: Func) -> Func {
    Arc::new(Composite { p, q })
}

impl Composite {
    fn pre(&self, x: f64) -> f64 {
        self.p.inverse(x).unwrap_or(f64::NAN)
    }
}

impl ScalarFn for Composite {
    fn value(&self, x: f64) -> f64 {
        self.q.value(self.pre(x))
    }
    fn d1(&self, x: f64) -> f64 {
        let t = self.pre(x);
        self.q.d1(t) / self.p.d1(t)
    }
    fn d2(&self, x: f64) -> f64 {
        let t = self.pre(x);
        let (p1, p2) = (self.p.d1(t), self.p.d2(t));
        let (q1, q2) = (self.q.d1(t), self.q.d2(t));
        q2 / (p1 * p1) - q1 * p2 / (p1 * p1 * p1)
    }
    fn d3(&self, x: f64) -> f64 {
        let t = self.pre(x);
        let (p1, p2, p3) = (self.p.d1(t), self.p.d2(t), self.p.d3(t));
        let (q1, q2, q3) = (self.q.d1(t), self.q.d2(t), self.q.d3(t));
        let p1_2 = p1 * p1;
        let p1_3 = p1_2 * p1;
        let p1_4 = p1_3 * p1;
        q3 / p1_3 - 3.0 * q2 * p2 / p1_4 - q1 * p3 / p1_4 + 3.0 * q1 * p2 * p2 / (p1_4 * p1)
    }
    fn curvature_ratio(&self, x: f64) -> f64 {
        let t = self.pre(x);
        (self.q.curvature_ratio(t) - self.p.curvature_ratio(t)) / self.p.d1(t)
    }
    fn inverse(&self, y: f64) -> Result<f64> {
        Ok(self.p.value(self.q.inverse(y)?))
    }
    fn kind(&self) -> super::DerivativeKind {
        weakest(&[&self.p, &self.q])
    }
    fn growth_declared(&self) -> bool {
        self.p.growth_declared() && self.q.growth_declared()
    }
    fn describe(&self) -> String {
        format!("{}∘({})⁻¹", self.q.describe(), self.p.describe())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalarfn::{central_diff, log_grid, NumericFn};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    fn check_d1_against_fd(f: &Func, lo: f64, hi: f64) {
        for t in log_grid(lo, hi, 50) {
            let fd = central_diff(&|s| f.value(s), t, 1e-6);
            assert!(rel(fd, f.d1(t)) < 1e-5, "{}: t={t} fd={fd} d1={}", f.describe(), f.d1(t));
        }
    }

    fn check_d2_d3(f: &Func, lo: f64, hi: f64) {
        for t in log_grid(lo, hi, 20) {
            let fd2 = central_diff(&|s| f.d1(s), t, 1e-6);
            let fd3 = central_diff(&|s| f.d2(s), t, 1e-6);
            assert!(rel(fd2, f.d2(t)) < 1e-5 || (fd2 - f.d2(t)).abs() < 1e-8, "{} d2 at {t}", f.describe());
            assert!(rel(fd3, f.d3(t)) < 1e-5 || (fd3 - f.d3(t)).abs() < 1e-8, "{} d3 at {t}", f.describe());
        }
    }

    #[test]
    fn power_examples() {
        let f = make_power(2.0).unwrap();
        assert_eq!(f.value(3.0), 9.0);
        assert_eq!(f.d2(0.3), 2.0);
        assert_eq!(f.d2(7.0), 2.0);
        assert!((make_power(1.5).unwrap().d1(4.0) - 3.0).abs() < 1e-15);
        assert!(make_power(0.0).is_err());
        assert_eq!(make_power(1.0).unwrap().d2(0.0), 0.0);
    }

    #[test]
    fn exp_examples() {
        let f = make_exp();
        assert_eq!(f.value(0.0), 1.0);
        assert_eq!(f.d3(0.0), 1.0);
        assert!((f.value(1.0) - std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn plog_examples() {
        let f = make_plog(1.0).unwrap();
        assert_eq!(f.d1(0.0), 0.0);
        // oracle: ∫_0^1 s log(1+s) ds by composite Simpson on 20000 panels
        let n = 20000;
        let h = 1.0 / n as f64;
        let g = |s: f64| s * s.ln_1p();
        let mut simpson = g(0.0) + g(1.0);
        for i in 1..n {
            simpson += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * h);
        }
        simpson *= h / 3.0;
        assert!((f.value(1.0) - simpson).abs() < 1e-12);
        assert!((f.value(1.0) - 0.25).abs() < 1e-14);
        for p in [0.5, 1.0, 2.5] {
            let f = make_plog(p).unwrap();
            for t in [1.0f64, 10.0] {
                let closed = p + t / ((t + 1.0) * t.ln_1p());
                let generic = t * f.d2(t) / f.d1(t);
                assert!((f.elasticity(t) - closed).abs() < 1e-14);
                assert!((generic - closed).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let fs: Vec<Func> = vec![
            make_power(2.0).unwrap(),
            make_power(1.5).unwrap(),
            make_power(4.0 / 3.0).unwrap(),
            make_exp(),
            make_plog(1.0).unwrap(),
            make_log1p(),
            make_sum(make_power(3.0).unwrap(), make_linear(1.0, 0.0)),
            make_hariya_companion(make_power(2.0).unwrap(), 0.7).unwrap(),
            make_hariya_companion(make_exp(), 0.8).unwrap(),
            compose_f(make_power(2.0).unwrap(), make_power(4.0).unwrap()),
            compose_f(make_power(1.5).unwrap(), make_exp()),
            make_chain(make_exp(), make_power(2.0).unwrap()),
        ];
        for f in &fs {
            check_d1_against_fd(f, 1e-2, 3.0);
            check_d2_d3(f, 0.05, 3.0);
        }
    }

    #[test]
    fn hariya_examples() {
        let p = make_power(2.0).unwrap();
        let q = make_hariya_companion(p.clone(), 1.0).unwrap();
        for t in [0.1, 1.0, 5.0] {
            assert!(rel(q.value(t), t * t) < 1e-12);
            assert_eq!(q.d1(t), p.d1(t));
        }
        // P = t^p: Q' = p^{1/r²} t^{(p-1)/r²}
        let (pp, r) = (2.5, 0.6);
        let q = make_hariya_companion(make_power(pp).unwrap(), r).unwrap();
        let e = (pp - 1.0) / (r * r);
        for t in [0.3, 2.0] {
            assert!(rel(q.d1(t), pp.powf(1.0 / (r * r)) * t.powf(e)) < 1e-13);
            assert!(rel(q.value(t), pp.powf(1.0 / (r * r)) * t.powf(e + 1.0) / (e + 1.0)) < 1e-10);
        }
        // P = exp: Q' = e^{t/r²}
        let q = make_hariya_companion(make_exp(), 0.5).unwrap();
        assert!(rel(q.d1(1.3), (1.3f64 / 0.25).exp()) < 1e-13);
        assert!(rel(q.d2(1.3), 4.0 * (1.3f64 / 0.25).exp()) < 1e-13);
        // equality r² tQ''/Q' = tP''/P'
        for (pfn, r) in [(make_plog(1.0).unwrap(), 0.5), (make_exp(), 0.3)] {
            let q = make_hariya_companion(pfn.clone(), r).unwrap();
            for t in log_grid(1e-3, 1e3, 50) {
                let lhs = r * r * t * q.d2(t) / q.d1(t);
                if lhs.is_finite() {
                    assert!((lhs - pfn.elasticity(t)).abs() < 1e-8 * pfn.elasticity(t).abs().max(1.0));
                }
                assert!((r * r * q.elasticity(t) - pfn.elasticity(t)).abs() < 1e-8 * pfn.elasticity(t).abs().max(1.0));
            }
        }
    }

    #[test]
    fn compose_examples() {
        let f = compose_f(make_power(3.0).unwrap(), make_power(6.0).unwrap());
        assert!(rel(f.value(8.0), 64.0) < 1e-12);
        let p = make_plog(1.0).unwrap();
        let id = compose_f(p.clone(), p.clone());
        for x in [0.1, 1.0, 10.0] {
            assert!(rel(id.value(x), x) < 1e-10);
            assert!(id.d2(x).abs() < 1e-10);
        }
        let f = compose_f(make_power(2.0).unwrap(), make_power(4.0).unwrap());
        let fd = central_diff(&|s| f.value(s), 4.0, 1e-6);
        assert!(rel(f.d1(4.0), fd) < 1e-6);
        assert!(rel(f.d1(4.0), 8.0) < 1e-12);
    }

    #[test]
    fn composite_round_trip_on_log_grid() {
        let pairs: Vec<(Func, Func)> = vec![
            (make_power(2.0).unwrap(), make_power(4.0).unwrap()),
            (make_plog(1.0).unwrap(), make_hariya_companion(make_plog(1.0).unwrap(), 0.9).unwrap()),
            (make_power(1.5).unwrap(), make_exp()),
        ];
        for (p, q) in pairs {
            let f = compose_f(p.clone(), q.clone());
            for t in log_grid(1e-4, 1e4, 50) {
                let qt = q.value(t);
                if !qt.is_finite() {
                    continue;
                }
                assert!(rel(f.value(p.value(t)), qt) < 1e-9, "{} at {t}", f.describe());
            }
        }
    }

    #[test]
    fn numeric_matches_analytic() {
        let a = make_exp();
        let n = NumericFn::new("exp", f64::exp);
        for t in log_grid(1e-2, 5.0, 50) {
            assert!(rel(n.d1(t), a.d1(t)) < 1e-5);
        }
    }
}
