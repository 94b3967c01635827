//! Pointwise and regional admissibility conditions: the local margin,
//! convexity hypotheses on `F`, the closed forms for power pairs, the lens
//! domain, `r*` on the imaginary axis and the disk scanner.
//!
//! Every condition of the form "for all `t > 0`" is approximated on a
//! log-spaced [`TGrid`] followed by golden-section refinement in `log t`
//! around the grid extremum.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermite::ComplexParam;
use crate::report::sig17;
use crate::scalarfn::{d4_checked, log_grid, FnPair, Generator, ScalarFn};

/// Margins at or above `-ADMISSIBLE_TOL` count as satisfied, so that
/// equality cases survive roundoff.
pub const ADMISSIBLE_TOL: f64 = 1e-9;
/// Lens membership tolerance.
pub const LENS_TOL: f64 = 1e-12;
/// Convexity checks accept scale-free quantities up to this size.
pub const CONVEXITY_TOL: f64 = 1e-8;
/// `sup |F''|` below this marks the degenerate `F'' ≡ 0` branch.
pub const DEGENERATE_TOL: f64 = 1e-10;

const GOLDEN_ITERS: usize = 80;

/// Log-spaced sample of `(0, ∞)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TGrid {
    pub tmin: f64,
    pub tmax: f64,
    pub points: usize,
}

impl Default for TGrid {
    fn default() -> Self {
        TGrid {
            tmin: 1e-6,
            tmax: 1e6,
            points: 2000,
        }
    }
}

impl TGrid {
    pub fn new(tmin: f64, tmax: f64, points: usize) -> Result<Self> {
        if !(tmin > 0.0 && tmax >= tmin && tmax.is_finite()) || points == 0 {
            return Err(Error::Domain(format!(
                "t-grid needs 0 < tmin ≤ tmax < ∞ and points ≥ 1, got [{tmin}, {tmax}] × {points}"
            )));
        }
        Ok(TGrid { tmin, tmax, points })
    }

    pub fn values(&self) -> Vec<f64> {
        log_grid(self.tmin, self.tmax, self.points)
    }
}

/// `(K+2) − (L+2)|z|² − |Lz² − K|` for `K = tP''/P' − 1`, `L = tQ''/Q' − 1`.
pub fn margin_from_kl(k: f64, l: f64, z: Complex64) -> f64 {
    (k + 2.0) - (l + 2.0) * z.norm_sqr() - (l * (z * z) - k).norm()
}

fn elasticities(pair: &FnPair, t: f64) -> Result<(f64, f64)> {
    let (p1, q1) = (pair.p.d1(t), pair.q.d1(t));
    if !(p1 > 0.0) {
        return Err(Error::Monotonicity { what: "P'".into(), t, value: p1 });
    }
    if !(q1 > 0.0) {
        return Err(Error::Monotonicity { what: "Q'".into(), t, value: q1 });
    }
    let (ep, eq) = (pair.p.elasticity(t), pair.q.elasticity(t));
    if !ep.is_finite() {
        return Err(Error::non_finite(format!("tP''/P' at t = {t}"), ep));
    }
    if !eq.is_finite() {
        return Err(Error::non_finite(format!("tQ''/Q' at t = {t}"), eq));
    }
    Ok((ep, eq))
}

/// The local condition at `t` with `w` optimized out; nonnegative iff the
/// condition holds at `t`.
pub fn local_margin(pair: &FnPair, z: ComplexParam, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("local margin needs t > 0, got {t}")));
    }
    let (ep, eq) = elasticities(pair, t)?;
    Ok(margin_from_kl(ep - 1.0, eq - 1.0, z.to_complex()))
}

/// RHS − LHS of the local condition in its explicit-`w` form at `x > 0`:
/// `|w|² − (Re w)² + (xP''/P')(Re w)² − |wz|² + (Re wz)² − (xQ''/Q')(Re wz)²`.
/// Its minimum over `|w| = 1` is half of [`local_margin`].
pub fn local_form(pair: &FnPair, z: ComplexParam, x: f64, w: Complex64) -> Result<f64> {
    let (ep, eq) = elasticities(pair, x)?;
    let wz = w * z.to_complex();
    Ok(w.norm_sqr() - w.re * w.re + ep * w.re * w.re - wz.norm_sqr() + wz.re * wz.re - eq * wz.re * wz.re)
}

/// Golden-section minimization of `f` over `[a, b]`.
fn golden_min(f: &mut dyn FnMut(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..GOLDEN_ITERS {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}

/// Refines a grid minimum at index `i` by golden section in `log t`
/// between the neighbours; returns the better of grid and refined values.
fn refine_min(
    f: &mut dyn FnMut(f64) -> Result<f64>,
    ts: &[f64],
    i: usize,
    grid_value: f64,
) -> Result<(f64, f64)> {
    if ts.len() < 2 {
        return Ok((ts[i], grid_value));
    }
    let lo = ts[i.saturating_sub(1)].ln();
    let hi = ts[(i + 1).min(ts.len() - 1)].ln();
    let (s, v) = golden_min(&mut |s| f(s.exp()), lo, hi)?;
    if v < grid_value {
        Ok((s.exp(), v))
    } else {
        Ok((ts[i], grid_value))
    }
}

fn argmin(values: &[f64]) -> (usize, f64) {
    values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, v)| if v < best.1 { (i, v) } else { best })
}

/// Tabulated elasticities `tP''/P'` and `tQ''/Q'` on a grid, shared by
/// every `z` of a scan.
#[derive(Clone, Debug)]
pub struct Profile {
    pub t: Vec<f64>,
    pub ep: Vec<f64>,
    pub eq: Vec<f64>,
}

impl Profile {
    pub fn new(pair: &FnPair, grid: &TGrid) -> Result<Self> {
        let t = grid.values();
        let both: Vec<(f64, f64)> = t
            .par_iter()
            .map(|&t| elasticities(pair, t))
            .collect::<Result<_>>()?;
        let (ep, eq) = both.into_iter().unzip();
        Ok(Profile { t, ep, eq })
    }

    fn margins(&self, z: Complex64) -> Vec<f64> {
        self.ep
            .iter()
            .zip(&self.eq)
            .map(|(&p, &q)| margin_from_kl(p - 1.0, q - 1.0, z))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalReport {
    pub z: ComplexParam,
    pub min_margin: f64,
    pub argmin_t: f64,
    pub t_grid: TGrid,
    pub holds: bool,
}

fn check_with_profile(pair: &FnPair, profile: &Profile, grid: &TGrid, z: ComplexParam) -> Result<LocalReport> {
    let m = profile.margins(z.to_complex());
    let (i, v) = argmin(&m);
    if !v.is_finite() {
        return Err(Error::non_finite(format!("local margin at t = {}", profile.t[i]), v));
    }
    let (argmin_t, min_margin) = refine_min(&mut |t| local_margin(pair, z, t), &profile.t, i, v)?;
    Ok(LocalReport {
        z,
        min_margin,
        argmin_t,
        t_grid: *grid,
        holds: min_margin >= -ADMISSIBLE_TOL,
    })
}

/// Minimum of [`local_margin`] over the grid, refined near the argmin.
pub fn check_local(pair: &FnPair, z: ComplexParam, grid: &TGrid) -> Result<LocalReport> {
    let profile = Profile::new(pair, grid)?;
    check_with_profile(pair, &profile, grid, z)
}

/// `p − |z|²q − |p − 2 − z²(q − 2)|`: the local margin of `(t^p, t^q)`.
pub fn weissler_margin(p: f64, q: f64, z: ComplexParam) -> f64 {
    let z = z.to_complex();
    p - z.norm_sqr() * q - (Complex64::from(p - 2.0) - z * z * (q - 2.0)).norm()
}

/// Sign comparison between the determinant criterion and `−(F'/F'')''`
/// at points where both scale-free magnitudes exceed the tolerance.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SignAgreement {
    pub compared: usize,
    pub agreed: usize,
    pub disagreements_at: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub t_grid: TGrid,
    /// `F'' > 0` at every finite grid point.
    pub fpp_positive: bool,
    /// `(F'/F'')''` nonpositive (scale-free, within tolerance).
    pub ratio_concave: bool,
    /// The Hessian determinant of `(t, y) ↦ y²F''/F'` nonnegative
    /// (scale-free, within tolerance); equivalently the map is convex.
    pub hessian_psd: bool,
    /// `sup |F''| < 1e-10` on the grid.
    pub degenerate: bool,
    pub sign_agreement: SignAgreement,
    /// Largest scale-free `(F'/F'')''` seen.
    pub max_ratio_curvature: f64,
    /// Smallest scale-free determinant numerator seen.
    pub min_determinant: f64,
    pub d4_unstable_points: usize,
    pub skipped_points: usize,
    pub note: &'static str,
}

const WCONVEXITY_NOTE: &str = "the weak hypothesis is stated in one place as concavity of (t,y) -> y^2 F''/F' and used \
     as convexity in the Jensen step; convexity is checked, matching the determinant criterion";

/// `N = F1F2F4 + F2²F3 − 2F1F3²` divided by the sum of the magnitudes of
/// its terms. `det Hess(y²F''/F') = 2y²N/F1³` and `(F'/F'')'' = −N/F2³`.
pub fn determinant_numerator(f: &dyn ScalarFn, t: f64) -> (f64, f64, bool) {
    let (f1, f2, f3) = (f.d1(t), f.d2(t), f.d3(t));
    let (f4, unstable) = d4_checked(f, t);
    let terms = [f1 * f2 * f4, f2 * f2 * f3, -2.0 * f1 * f3 * f3];
    let n: f64 = terms.iter().sum();
    let scale: f64 = terms.iter().map(|v| v.abs()).sum();
    let normalized = if scale > 0.0 { n / scale } else { 0.0 };
    (n, normalized, unstable)
}

/// `t²S''(t) / (|S| + t|S'|)` for `S = F'/F''`, by a Richardson-extrapolated
/// central second difference with step `2e-3·t`.
pub fn ratio_curvature(f: &dyn ScalarFn, t: f64) -> f64 {
    let s = |x: f64| 1.0 / f.curvature_ratio(x);
    let h = 2e-3 * t;
    let s0 = s(t);
    let second = |h: f64| (s(t + h) - 2.0 * s0 + s(t - h)) / (h * h);
    let d2 = (4.0 * second(0.5 * h) - second(h)) / 3.0;
    let d1 = (s(t + 0.5 * h) - s(t - 0.5 * h)) / h;
    let scale = s0.abs() + t * d1.abs();
    if scale > 0.0 {
        t * t * d2 / scale
    } else {
        0.0
    }
}

/// Checks the convexity hypotheses on `F` over the grid.
pub fn convexity_report(f: &dyn ScalarFn, grid: &TGrid) -> ConvexityReport {
    let ts = grid.values();
    let mut rep = ConvexityReport {
        t_grid: *grid,
        fpp_positive: true,
        ratio_concave: true,
        hessian_psd: true,
        degenerate: false,
        sign_agreement: SignAgreement::default(),
        max_ratio_curvature: f64::NEG_INFINITY,
        min_determinant: f64::INFINITY,
        d4_unstable_points: 0,
        skipped_points: 0,
        note: WCONVEXITY_NOTE,
    };
    let mut sup_fpp: f64 = 0.0;
    for &t in &ts {
        let f2 = f.d2(t);
        if !f2.is_finite() {
            rep.skipped_points += 1;
            continue;
        }
        sup_fpp = sup_fpp.max(f2.abs());
        if f2 <= 0.0 {
            rep.fpp_positive = false;
        }
    }
    rep.degenerate = sup_fpp < DEGENERATE_TOL;
    if rep.degenerate {
        // F'/F'' is undefined; only the weak hypothesis (trivially) applies
        rep.ratio_concave = false;
        rep.max_ratio_curvature = f64::NAN;
        rep.min_determinant = 0.0;
        return rep;
    }
    for &t in &ts {
        let rc = ratio_curvature(f, t);
        let (_, det, unstable) = determinant_numerator(f, t);
        if !rc.is_finite() || !det.is_finite() {
            rep.skipped_points += 1;
            continue;
        }
        if unstable {
            rep.d4_unstable_points += 1;
        }
        rep.max_ratio_curvature = rep.max_ratio_curvature.max(rc);
        rep.min_determinant = rep.min_determinant.min(det);
        if rc > CONVEXITY_TOL {
            rep.ratio_concave = false;
        }
        if det < -CONVEXITY_TOL {
            rep.hessian_psd = false;
        }
        if rc.abs() > CONVEXITY_TOL && det.abs() > CONVEXITY_TOL {
            rep.sign_agreement.compared += 1;
            if (det > 0.0) == (rc < 0.0) {
                rep.sign_agreement.agreed += 1;
            } else {
                rep.sign_agreement.disagreements_at.push(t);
            }
        }
    }
    rep
}

/// Refined supremum of `g` over the grid.
fn sup_over(g: &dyn Fn(f64) -> Result<f64>, grid: &TGrid) -> Result<(f64, f64)> {
    let ts = grid.values();
    let neg: Vec<f64> = ts.iter().map(|&t| g(t).map(|v| -v)).collect::<Result<_>>()?;
    let (i, v) = argmin(&neg);
    let (t, v) = refine_min(&mut |t| g(t).map(|v| -v), &ts, i, v)?;
    Ok((t, -v))
}

fn inf_over(g: &dyn Fn(f64) -> Result<f64>, grid: &TGrid) -> Result<(f64, f64)> {
    let ts = grid.values();
    let vals: Vec<f64> = ts.iter().map(|&t| g(t)).collect::<Result<_>>()?;
    let (i, v) = argmin(&vals);
    refine_min(&mut |t| g(t), &ts, i, v)
}

fn positive_elasticity(f: &dyn ScalarFn, name: &str, t: f64) -> Result<f64> {
    let (d1, d2) = (f.d1(t), f.d2(t));
    if !(d1 > 0.0) {
        return Err(Error::Monotonicity { what: format!("{name}'"), t, value: d1 });
    }
    if !(d2 > 0.0) {
        return Err(Error::Precondition(format!("{name}'' = {d2} ≤ 0 at t = {t}")));
    }
    let e = f.elasticity(t);
    if !(e > 0.0 && e.is_finite()) {
        return Err(Error::non_finite(format!("t{name}''/{name}' at t = {t}"), e));
    }
    Ok(e)
}

/// `c_P = sup (K + 1/K)` with `K = tP''/P'`.
pub fn lens_cp(p: &dyn ScalarFn, grid: &TGrid) -> Result<f64> {
    let g = |t: f64| positive_elasticity(p, "P", t).map(|k| k + 1.0 / k);
    Ok(sup_over(&g, grid)?.1)
}

/// `√(c+2) − max_± |2z ± i√(c−2)|`, and whether `z` lies in the lens.
pub fn lens_contains(c_p: f64, z: ComplexParam) -> Result<(bool, f64)> {
    if !(c_p >= 2.0 - 1e-12) {
        return Err(Error::Domain(format!("c_P must be at least 2, got {c_p}")));
    }
    let s = Complex64::new(0.0, (c_p - 2.0).max(0.0).sqrt());
    let z2 = 2.0 * z.to_complex();
    let m = (c_p + 2.0).sqrt() - (z2 + s).norm().max((z2 - s).norm());
    Ok((m >= -LENS_TOL, m))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RStar {
    pub r_star: f64,
    /// `√inf tP''/P'`
    pub p_bound: f64,
    /// `√inf Q'/(tQ'')`
    pub q_bound: f64,
    pub p_argmin_t: f64,
    pub q_argmin_t: f64,
}

/// The largest `r` such that every `z = is`, `|s| ≤ r`, is admissible:
/// `min{1, √inf tP''/P', √inf Q'/(tQ'')}`.
pub fn r_star(pair: &FnPair, grid: &TGrid) -> Result<RStar> {
    let gp = |t: f64| positive_elasticity(pair.p.as_ref(), "P", t);
    let gq = |t: f64| positive_elasticity(pair.q.as_ref(), "Q", t).map(|e| 1.0 / e);
    let (tp, ip) = inf_over(&gp, grid)?;
    let (tq, iq) = inf_over(&gq, grid)?;
    let (p_bound, q_bound) = (ip.sqrt(), iq.sqrt());
    Ok(RStar {
        r_star: 1f64.min(p_bound).min(q_bound),
        p_bound,
        q_bound,
        p_argmin_t: tp,
        q_argmin_t: tq,
    })
}

/// Polar grid over the closed disk: `r_i = (i+1)/n_r`, `θ_j = 2πj/n_θ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RegionSpec {
    pub n_r: usize,
    pub n_theta: usize,
}

impl RegionSpec {
    pub fn square(n: usize) -> Self {
        RegionSpec { n_r: n, n_theta: n }
    }

    /// Cell centres in row-major order (radius outer, angle inner).
    pub fn points(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.n_r * self.n_theta);
        for i in 0..self.n_r {
            let r = (i + 1) as f64 / self.n_r as f64;
            for j in 0..self.n_theta {
                let th = std::f64::consts::TAU * j as f64 / self.n_theta as f64;
                out.push(Complex64::from_polar(r, th));
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionCell {
    pub re: f64,
    pub im: f64,
    pub min_margin: f64,
    pub admissible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionGrid {
    pub spec: RegionSpec,
    pub t_grid: TGrid,
    pub cells: Vec<RegionCell>,
}

impl RegionGrid {
    pub fn admissible_count(&self) -> usize {
        self.cells.iter().filter(|c| c.admissible).count()
    }

    pub fn error_count(&self) -> usize {
        self.cells.iter().filter(|c| c.error.is_some()).count()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("re,im,min_margin,admissible\n");
        for c in &self.cells {
            s.push_str(&format!("{},{},{},{}\n", sig17(c.re), sig17(c.im), sig17(c.min_margin), c.admissible));
        }
        s
    }
}

/// Runs [`check_local`] on every cell. The elasticity profile is computed
/// once; per-cell failures are recorded in the cell, not propagated.
pub fn scan_region(pair: &FnPair, spec: RegionSpec, grid: &TGrid) -> Result<RegionGrid> {
    if spec.n_r == 0 || spec.n_theta == 0 {
        return Err(Error::Domain("region grid must have at least one cell".into()));
    }
    let profile = Profile::new(pair, grid)?;
    let cells = spec
        .points()
        .into_par_iter()
        .map(|z| {
            let cell = |min_margin: f64, error: Option<String>| RegionCell {
                re: z.re,
                im: z.im,
                min_margin,
                admissible: error.is_none() && min_margin >= -ADMISSIBLE_TOL,
                error,
            };
            match ComplexParam::from_complex(z).and_then(|zp| check_with_profile(pair, &profile, grid, zp)) {
                Ok(r) => cell(r.min_margin, None),
                Err(e) => cell(f64::NAN, Some(e.to_string())),
            }
        })
        .collect();
    Ok(RegionGrid {
        spec,
        t_grid: *grid,
        cells,
    })
}

/// RHS − LHS of the generator form of the local condition at `s ∈ ℝ`:
/// `(1−|z|²)(φ'+1) − |z|²B − |(1−z²)(φ'−1) − z²B|`,
/// `B = e^{φ(s)+s} / h(P(e^s))`. Equals [`local_margin`] at `t = e^s`.
pub fn generator_margin(gen: &Generator, z: ComplexParam, s: f64) -> Result<f64> {
    let a = gen.phi.d1(s);
    let pe = gen.pair.p.value(s.exp());
    let hp = gen.h.value(pe);
    let b = (gen.phi.value(s) + s).exp() / hp;
    if !b.is_finite() {
        return Err(Error::non_finite(format!("e^(phi+s)/h(P(e^s)) at s = {s}"), b));
    }
    let z = z.to_complex();
    let z2 = z * z;
    let n = z.norm_sqr();
    let lhs = ((Complex64::from(1.0) - z2) * (a - 1.0) - z2 * b).norm();
    Ok((1.0 - n) * (a + 1.0) - n * b - lhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalarfn::{
        make_exp, make_generator, make_hariya_companion, make_linear, make_log1p, make_plog, make_power, make_sum,
    };

    fn power_pair(p: f64, q: f64) -> FnPair {
        FnPair::new(make_power(p).unwrap(), make_power(q).unwrap())
    }

    fn z(re: f64, im: f64) -> ComplexParam {
        ComplexParam::new(re, im).unwrap()
    }

    #[test]
    fn local_margin_examples() {
        let l2 = power_pair(2.0, 2.0);
        for t in [0.01, 1.0, 30.0] {
            assert!((local_margin(&l2, z(0.3, 0.4), t).unwrap() - 2.0 * (1.0 - 0.25)).abs() < 1e-15);
            assert!(local_margin(&l2, z(0.0, 1.0), t).unwrap().abs() < 1e-15);
        }
        let nelson = power_pair(2.0, 4.0);
        let r = 1.0 / 3f64.sqrt();
        assert!(local_margin(&nelson, z(r, 0.0), 2.0).unwrap().abs() < 1e-14);
        let beckner = power_pair(4.0 / 3.0, 4.0);
        assert!(local_margin(&beckner, z(0.0, r), 0.7).unwrap().abs() < 1e-14);
    }

    #[test]
    fn check_local_examples() {
        let pair = power_pair(2.0, 4.0);
        let grid = TGrid::default();
        let rep = check_local(&pair, z(0.8, 0.0), &grid).unwrap();
        assert!((rep.min_margin + 1.84).abs() < 1e-12);
        assert!(!rep.holds);
        let rep = check_local(&pair, z(0.5, 0.0), &grid).unwrap();
        assert!((rep.min_margin - 0.5).abs() < 1e-12);
        assert!(rep.holds);
        let exp_pair = FnPair::new(make_exp(), make_hariya_companion(make_exp(), 0.5).unwrap());
        let rep = check_local(&exp_pair, z(0.5, 0.0), &grid).unwrap();
        assert!(rep.holds && rep.min_margin.abs() < 1e-9, "{rep:?}");
    }

    #[test]
    fn monotonicity_violation() {
        let pair = FnPair::new(make_linear(-1.0, 0.0), make_power(2.0).unwrap());
        assert!(matches!(local_margin(&pair, z(0.1, 0.0), 1.0), Err(Error::Monotonicity { .. })));
    }

    #[test]
    fn weissler_examples() {
        assert!(weissler_margin(2.0, 2.0, z(0.0, 1.0)).abs() < 1e-15);
        let r = 1.0 / 3f64.sqrt();
        assert!(weissler_margin(4.0 / 3.0, 4.0, z(0.0, r)).abs() < 1e-14);
        assert!((weissler_margin(2.0, 4.0, z(0.8, 0.0)) + 1.84).abs() < 1e-14);
    }

    #[test]
    fn explicit_w_form_minimum_is_half_margin() {
        let pair = FnPair::new(make_plog(1.0).unwrap(), make_power(3.0).unwrap());
        let zz = z(0.3, 0.5);
        for x in [0.1, 1.0, 10.0] {
            let m = local_margin(&pair, zz, x).unwrap();
            let min = (0..20000)
                .map(|j| {
                    let w = Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / 20000.0);
                    local_form(&pair, zz, x, w).unwrap()
                })
                .fold(f64::INFINITY, f64::min);
            assert!((min - 0.5 * m).abs() < 1e-6, "x={x}: {min} vs {}", 0.5 * m);
        }
    }

    #[test]
    fn lens_examples() {
        let g = TGrid::default();
        assert!((lens_cp(make_power(2.0).unwrap().as_ref(), &g).unwrap() - 2.0).abs() < 1e-12);
        assert!((lens_cp(make_power(3.0).unwrap().as_ref(), &g).unwrap() - 2.5).abs() < 1e-12);
        let c = lens_cp(make_plog(1.0).unwrap().as_ref(), &g).unwrap();
        assert!((c - 2.5).abs() < 1e-6, "{c}");
        assert!(lens_cp(make_log1p().as_ref(), &g).is_err());

        for c in [2.0, 2.5, 3.7] {
            for zz in [z(1.0, 0.0), z(-1.0, 0.0)] {
                let (inside, m) = lens_contains(c, zz).unwrap();
                assert!(inside && m.abs() < 1e-12);
            }
        }
        let (inside, m) = lens_contains(2.0, z(0.3, 0.4)).unwrap();
        assert!(inside && (m - 2.0 * (1.0 - 0.5)).abs() < 1e-15);
        let (inside, m) = lens_contains(2.5, z(0.0, 0.9)).unwrap();
        assert!(!inside);
        assert!((m - (4.5f64.sqrt() - (1.8 + 0.5f64.sqrt()))).abs() < 1e-15);
    }

    #[test]
    fn r_star_examples() {
        let g = TGrid::default();
        let r = r_star(&power_pair(2.0, 4.0), &g).unwrap();
        assert!((r.r_star - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        assert!((r_star(&power_pair(2.0, 2.0), &g).unwrap().r_star - 1.0).abs() < 1e-15);
        let h = make_sum(make_linear(2.0, 0.0), make_log1p());
        let gen = make_generator(h, make_linear(1.0, 0.0)).unwrap();
        let r = r_star(&gen.pair, &g).unwrap();
        assert!((r.r_star - 0.5f64.sqrt()).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn convexity_examples() {
        let g = TGrid::new(1e-2, 1e2, 100).unwrap();
        for m in [1.5, 2.0, 3.0] {
            let rep = convexity_report(make_power(m).unwrap().as_ref(), &g);
            assert!(rep.fpp_positive && rep.ratio_concave && rep.hessian_psd && !rep.degenerate, "{rep:?}");
            assert_eq!(rep.sign_agreement.compared, 0);
        }
        let id = convexity_report(make_linear(1.0, 0.0).as_ref(), &g);
        assert!(id.degenerate);
        // t + t³: F'/F'' = t/2 + 1/(6t) is convex, N = −72
        let f = make_sum(make_linear(1.0, 0.0), make_power(3.0).unwrap());
        let rep = convexity_report(f.as_ref(), &g);
        assert!(!rep.ratio_concave && !rep.hessian_psd);
        assert!(rep.sign_agreement.compared > 50 && rep.sign_agreement.disagreements_at.is_empty());
        let (n, _, _) = determinant_numerator(f.as_ref(), 0.7);
        assert!((n + 72.0).abs() < 1e-6);
    }

    #[test]
    fn scan_matches_weissler() {
        let pair = power_pair(2.0, 4.0);
        let grid = TGrid::new(1e-3, 1e3, 50).unwrap();
        let scan = scan_region(&pair, RegionSpec::square(20), &grid).unwrap();
        assert_eq!(scan.cells.len(), 400);
        for c in &scan.cells {
            let w = weissler_margin(2.0, 4.0, ComplexParam::new(c.re, c.im).unwrap());
            if w.abs() > 1e-6 {
                assert_eq!(c.admissible, w > 0.0);
            }
        }
        let csv = scan.to_csv();
        assert!(csv.starts_with("re,im,min_margin,admissible\n"));
        assert_eq!(csv.lines().count(), 401);
    }

    #[test]
    fn generator_margin_matches_local_margin() {
        let h = make_sum(make_linear(2.0, 0.0), make_log1p());
        let gen = make_generator(h, make_linear(1.0, 0.0)).unwrap();
        for (zz, s) in [(z(0.3, 0.2), -1.0), (z(0.0, 0.7), 0.5), (z(0.6, 0.0), 3.0)] {
            let a = generator_margin(&gen, zz, s).unwrap();
            let b = local_margin(&gen.pair, zz, s.exp()).unwrap();
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        let m = generator_margin(&gen, z(0.0, 0.0), 0.3).unwrap();
        assert!((m - 2.0).abs() < 1e-12);
    }
}
