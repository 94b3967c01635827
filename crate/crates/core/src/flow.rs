//! The interpolation flow `C(s)` between the two sides of the global
//! inequality, the direct global margin, and the second-order necessity
//! probe at `f = a + bεx`.
//!
//! For `f = Σ c_α H_α` let `ℓ(w) = Σ c_α w^α`. The flow integrand is
//! `g(x, u, s) = E ℓ(√s(u + iv) + z√(1-s)(x + iy))` with `v, y` independent
//! standard Gaussians. The `v, y` expectations are taken exactly by
//! smoothing `ℓ` along the complex directions `√s` and `z√(1-s)`, after
//! which `w = √s·u + z√(1-s)·x` is substituted. Only the `(u, x)`
//! integrals use quadrature.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermite::{binomial, Basis, CPoly, ComplexParam, MultiIndex};
use crate::quad::QuadRule;
use crate::scalarfn::FnPair;

/// Default number of uniformly spaced `s` values, endpoints included.
pub const DEFAULT_S_POINTS: usize = 21;
/// Relative flow tolerance: increments above `-FLOW_TOL·max(1, |C(1)|)` pass.
pub const FLOW_TOL: f64 = 1e-6;
/// Per-coordinate order for two-dimensional flows: `24⁴ ≈ 3.3e5` nodes,
/// about the `64³` budget of the three-dimensional global check.
pub const FLOW_ORDER_2D: usize = 24;

/// Uniform grid on `[0, 1]` with `n ≥ 2` points.
pub fn uniform_s_grid(n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// The `2k`-variable monomial polynomial `g(·, ·, s)` with variables
/// ordered `(u_1..u_k, x_1..x_k)`.
pub fn build_g(f: &CPoly, z: ComplexParam, s: f64) -> Result<CPoly> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!("flow parameter s = {s} outside [0, 1]")));
    }
    let k = f.dim();
    let a = Complex64::new(s.sqrt(), 0.0);
    let b = z.to_complex() * (1.0 - s).sqrt();
    let mut ell = f.to_hermite().retag(Basis::Monomial);
    for j in 0..k {
        ell = ell.smooth_along(j, a)?.smooth_along(j, b)?;
    }
    Ok(substitute(&ell, a.re, b))
}

/// `ℓ(w)` with `w_j = a·u_j + b·x_j`.
fn substitute(ell: &CPoly, a: f64, b: Complex64) -> CPoly {
    let k = ell.dim();
    let mut out = CPoly::zero(2 * k, Basis::Monomial);
    for (idx, &c) in ell.terms() {
        // per coordinate: (power of u, power of x, coefficient)
        let factors: Vec<Vec<(u32, u32, Complex64)>> = idx
            .entries()
            .iter()
            .map(|&d| {
                (0..=d)
                    .map(|e| (e, d - e, b.powu(d - e) * (a.powi(e as i32) * binomial(d, e))))
                    .collect()
            })
            .collect();
        let mut stack: Vec<(Vec<u32>, Complex64)> = vec![(vec![0; 2 * k], c)];
        for (j, choices) in factors.iter().enumerate() {
            let mut next = Vec::with_capacity(stack.len() * choices.len());
            for (e, coef) in &stack {
                for &(eu, ex, w) in choices {
                    let mut e = e.clone();
                    e[j] = eu;
                    e[k + j] = ex;
                    next.push((e, coef * w));
                }
            }
            stack = next;
        }
        for (e, coef) in stack {
            out.add_term(MultiIndex::new(e), coef);
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct FlowConfig {
    /// Input polynomial (any basis; used through its Hermite coefficients).
    pub f: CPoly,
    pub pair: FnPair,
    pub z: ComplexParam,
    pub s_grid: Vec<f64>,
    pub order_u: usize,
    pub order_x: usize,
}

impl FlowConfig {
    /// Default orders: 64 per coordinate for `k = 1`, [`FLOW_ORDER_2D`] for
    /// `k = 2`, where the nested rule has `2k = 4` tensor dimensions.
    pub fn new(f: CPoly, pair: FnPair, z: ComplexParam) -> Self {
        let order = if f.dim() >= 2 { FLOW_ORDER_2D } else { QuadRule::DEFAULT_ORDER };
        FlowConfig {
            f,
            pair,
            z,
            s_grid: uniform_s_grid(DEFAULT_S_POINTS),
            order_u: order,
            order_x: order,
        }
    }

    fn validate(&self) -> Result<()> {
        let k = self.f.dim();
        if !(1..=2).contains(&k) {
            return Err(Error::Domain(format!("flows support dimension 1 or 2, got {k}")));
        }
        let g = &self.s_grid;
        if g.first() != Some(&0.0) || g.last() != Some(&1.0) || g.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Domain("s grid must be increasing from 0 to 1".into()));
        }
        Ok(())
    }
}

fn with_context(e: Error, ctx: &str) -> Error {
    match e {
        Error::NonFinite { context, value } => Error::NonFinite {
            context: format!("{ctx}: {context}"),
            value,
        },
        other => other,
    }
}

/// `C(s) = ∫ F(∫ P(|g(x, u, s)|) dγ(u)) dγ(x)`.
pub fn c_of_s(cfg: &FlowConfig, s: f64) -> Result<f64> {
    let rule_u = QuadRule::gauss(cfg.order_u)?;
    let rule_x = QuadRule::gauss(cfg.order_x)?;
    c_with_rules(cfg, s, &rule_u, &rule_x)
}

fn c_with_rules(cfg: &FlowConfig, s: f64, rule_u: &QuadRule, rule_x: &QuadRule) -> Result<f64> {
    let k = cfg.f.dim();
    let ev = build_g(&cfg.f, cfg.z, s)?.evaluator();
    let (p, f) = (&cfg.pair.p, &cfg.pair.f);
    rule_x
        .expect(k, |x| {
            let inner = rule_u.expect(k, |u| {
                let mut pt = [0.0; 4];
                pt[..k].copy_from_slice(u);
                pt[k..2 * k].copy_from_slice(x);
                p.value(ev.eval_real(&pt[..2 * k]).norm())
            });
            match inner {
                Ok(v) => f.value(v),
                Err(_) => f64::NAN,
            }
        })
        .map_err(|e| with_context(e, &format!("C(s) at s = {s}, outer")))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowReport {
    pub s: Vec<f64>,
    pub values: Vec<f64>,
    pub increments: Vec<f64>,
    pub min_increment: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// `E Q(|T_z f|)`, computed directly.
    pub c0_direct: f64,
    /// `F(E P(|f|))`, computed directly.
    pub c1_direct: f64,
    pub order_u: usize,
    pub order_x: usize,
    pub flags: Vec<String>,
}

/// Evaluates `C` on the `s` grid and checks that it is nondecreasing.
pub fn flow_monotonicity(cfg: &FlowConfig) -> Result<FlowReport> {
    cfg.validate()?;
    let rule_u = QuadRule::gauss(cfg.order_u)?;
    let rule_x = QuadRule::gauss(cfg.order_x)?;
    let values: Vec<f64> = cfg
        .s_grid
        .par_iter()
        .map(|&s| c_with_rules(cfg, s, &rule_u, &rule_x))
        .collect::<Result<_>>()?;
    let increments: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let min_increment = increments.iter().copied().fold(f64::INFINITY, f64::min);
    let c1 = *values.last().expect("grid has at least two points");
    let tolerance = FLOW_TOL * c1.abs().max(1.0);

    let k = cfg.f.dim();
    let tz = cfg.f.mahler(cfg.z).evaluator();
    let fe = cfg.f.evaluator();
    let q = &cfg.pair.q;
    let p = &cfg.pair.p;
    let c0_direct = rule_x.expect(k, |x| q.value(tz.eval_real(x).norm()))?;
    let c1_direct = cfg.pair.f.value(rule_x.expect(k, |x| p.value(fe.eval_real(x).norm()))?);

    let mut flags = Vec::new();
    let tiny = 1e-12;
    if !p.d2(tiny).is_finite() || p.d2(tiny).abs() > 1e12 {
        flags.push("P'' is unbounded near 0; quadrature near zeros of g may be inaccurate".into());
    }
    Ok(FlowReport {
        s: cfg.s_grid.clone(),
        pass: min_increment >= -tolerance,
        values,
        increments,
        min_increment,
        tolerance,
        c0_direct,
        c1_direct,
        order_u: cfg.order_u,
        order_x: cfg.order_x,
        flags,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GlobalMargin {
    /// `P⁻¹(E P(|f|))`
    pub rhs: f64,
    /// `Q⁻¹(E Q(|T_z f|))`
    pub lhs: f64,
    /// `rhs − lhs`
    pub margin: f64,
}

/// `P⁻¹(E P(|f|)) − Q⁻¹(E Q(|T_z f|))` by tensor quadrature.
pub fn global_check(f: &CPoly, pair: &FnPair, z: ComplexParam, rule: &QuadRule) -> Result<GlobalMargin> {
    let k = f.dim();
    if !(1..=3).contains(&k) {
        return Err(Error::Domain(format!("global check supports dimension 1..=3, got {k}")));
    }
    let fe = f.evaluator();
    let te = f.mahler(z).evaluator();
    let ep = rule.expect(k, |x| pair.p.value(fe.eval_real(x).norm()))?;
    let eq = rule.expect(k, |x| pair.q.value(te.eval_real(x).norm()))?;
    let rhs = pair.p.inverse(ep)?;
    let lhs = pair.q.inverse(eq)?;
    Ok(GlobalMargin {
        rhs,
        lhs,
        margin: rhs - lhs,
    })
}

/// Second-order coefficient of the global inequality at `f = a + bεx`
/// (up to the positive factor `Q'(|a|)`):
/// `F'(M)(2M''(Re āb)² + M'|b|²) − 2J''(Re ābz)² − J'|bz|²`, all at
/// `x = |a|²`, with `M(x) = P(√x)` and `J = F∘M`.
pub fn necessity_probe(pair: &FnPair, z: ComplexParam, a: Complex64, b: Complex64) -> Result<f64> {
    if a == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("necessity probe needs a ≠ 0".into()));
    }
    let r = a.norm();
    let x = r * r;
    let (p1, p2) = (pair.p.d1(r), pair.p.d2(r));
    let m = pair.p.value(r);
    let m1 = p1 / (2.0 * r);
    let m2 = (p2 - p1 / r) / (4.0 * x);
    let (f1, f2) = (pair.f.d1(m), pair.f.d2(m));
    let j1 = f1 * m1;
    let j2 = f2 * m1 * m1 + f1 * m2;
    let ab = a.conj() * b;
    let abz = ab * z.to_complex();
    let bz = b * z.to_complex();
    let v = f1 * (2.0 * m2 * ab.re * ab.re + m1 * b.norm_sqr()) - 2.0 * j2 * abz.re * abz.re - j1 * bz.norm_sqr();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::non_finite(format!("necessity probe at |a| = {r}"), v))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsilonSweep {
    pub eps: Vec<f64>,
    pub margins: Vec<f64>,
    /// Richardson estimate of `lim margin/ε²` from the two smallest nonzero `ε`.
    pub second_order: Option<f64>,
    /// [`necessity_probe`] divided by `Q'(|a|)`, the predicted limit.
    pub predicted: f64,
}

/// Global margins for `f = a + bε·H_1` over `eps` (dimension 1).
pub fn epsilon_sweep(
    pair: &FnPair,
    z: ComplexParam,
    a: Complex64,
    b: Complex64,
    eps: &[f64],
    rule: &QuadRule,
) -> Result<EpsilonSweep> {
    let margins = eps
        .iter()
        .map(|&e| {
            let f = CPoly::univariate(Basis::Hermite, &[a, b * e]);
            global_check(&f, pair, z, rule).map(|g| g.margin)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut nonzero: Vec<(f64, f64)> = eps
        .iter()
        .zip(&margins)
        .filter(|(e, _)| **e != 0.0)
        .map(|(&e, &m)| (e.abs(), m))
        .collect();
    nonzero.sort_by(|x, y| x.0.total_cmp(&y.0));
    let second_order = match nonzero.as_slice() {
        [(e1, m1), (e2, m2), ..] if e1 < e2 => {
            let (r1, r2) = (m1 / (e1 * e1), m2 / (e2 * e2));
            Some((e2 * e2 * r1 - e1 * e1 * r2) / (e2 * e2 - e1 * e1))
        }
        _ => None,
    };
    let predicted = necessity_probe(pair, z, a, b)? / pair.q.d1(a.norm());
    Ok(EpsilonSweep {
        eps: eps.to_vec(),
        margins,
        second_order,
        predicted,
    })
}
