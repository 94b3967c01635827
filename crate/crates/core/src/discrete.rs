//! The Hamming-cube analogue: Walsh expansions on `{−1, 1}^m`, the
//! two-point inequality, the monotone map `φ(k)` interpolating between the
//! two sides of the discrete inequality, and midpoint convexity of the
//! quasi-mean `𝔐_F(h) = F⁻¹(Σ w_i F(h_i))`.
//!
//! Points are indexed by `m`-bit integers; bit `j` set means
//! `ε_{j+1} = −1`. Subsets `S` use the same encoding, so
//! `W_S(ε) = (−1)^{popcount(S & idx)}`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermite::{Basis, CPoly, ComplexParam};
use crate::scalarfn::{FnPair, ScalarFn};

/// Exhaustive enumeration is capped at `2^12` points.
pub const MAX_DIM: usize = 12;

fn check_dim(m: usize) -> Result<()> {
    if m > MAX_DIM {
        return Err(Error::Domain(format!("cube dimension {m} exceeds {MAX_DIM}")));
    }
    Ok(())
}

fn dim_of(len: usize) -> Result<usize> {
    if !len.is_power_of_two() {
        return Err(Error::Domain(format!("{len} values do not form a cube")));
    }
    let m = len.trailing_zeros() as usize;
    check_dim(m)?;
    Ok(m)
}

/// In-place unnormalized Walsh–Hadamard transform.
fn fwht(v: &mut [Complex64]) {
    let mut h = 1;
    while h < v.len() {
        for block in v.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

/// A complex function on `{−1, 1}^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct CubeFn {
    m: usize,
    values: Vec<Complex64>,
}

impl CubeFn {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        let m = dim_of(values.len())?;
        Ok(CubeFn { m, values })
    }

    /// Tabulates `g(ε)` with `ε` given as a slice of ±1.
    pub fn from_fn(m: usize, g: impl Fn(&[f64]) -> Complex64) -> Result<Self> {
        check_dim(m)?;
        let values = (0..1usize << m)
            .map(|idx| {
                let eps: Vec<f64> = (0..m).map(|j| if idx >> j & 1 == 1 { -1.0 } else { 1.0 }).collect();
                g(&eps)
            })
            .collect();
        Ok(CubeFn { m, values })
    }

    /// `Σ_S â(S) W_S`.
    pub fn from_walsh(coeffs: &[Complex64]) -> Result<Self> {
        let m = dim_of(coeffs.len())?;
        let mut values = coeffs.to_vec();
        fwht(&mut values);
        Ok(CubeFn { m, values })
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `â(S) = E g(ε) W_S(ε)`, by the fast transform normalized by `2^{−m}`.
    pub fn walsh_expand(&self) -> Vec<Complex64> {
        let mut c = self.values.clone();
        fwht(&mut c);
        let scale = 1.0 / c.len() as f64;
        c.iter_mut().for_each(|v| *v *= scale);
        c
    }
}

/// `ε ↦ Σ_S â(S) z^{|S|} W_S(ε)`.
pub fn cube_substitute(coeffs: &[Complex64], z: ComplexParam) -> Result<CubeFn> {
    substitute_tail(coeffs, z, 0)
}

/// Substitutes `zε_j` for coordinates `j ≥ k` only.
fn substitute_tail(coeffs: &[Complex64], z: ComplexParam, k: usize) -> Result<CubeFn> {
    let z = z.to_complex();
    let scaled: Vec<Complex64> = coeffs
        .iter()
        .enumerate()
        .map(|(s, &a)| a * z.powu((s >> k).count_ones()))
        .collect();
    CubeFn::from_walsh(&scaled)
}

/// `F((P(|a+b|) + P(|a−b|))/2) − (F(P(|a+bz|)) + F(P(|a−bz|)))/2`.
pub fn two_point_margin(f: &dyn ScalarFn, p: &dyn ScalarFn, z: ComplexParam, a: Complex64, b: Complex64) -> Result<f64> {
    let bz = b * z.to_complex();
    let rhs = f.value(0.5 * (p.value((a + b).norm()) + p.value((a - b).norm())));
    let lhs = 0.5 * (f.value(p.value((a + bz).norm())) + f.value(p.value((a - bz).norm())));
    let v = rhs - lhs;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::non_finite("two-point margin", v))
    }
}

/// `φ(k) = E_{ε_1..ε_k} F⁻¹(E_{ε_{k+1}..ε_m} Q(|g̃(ε_1, …, ε_k, zε_{k+1}, …, zε_m)|))`
/// by exhaustive enumeration.
pub fn discrete_map(coeffs: &[Complex64], pair: &FnPair, z: ComplexParam, k: usize) -> Result<f64> {
    let m = dim_of(coeffs.len())?;
    if k > m {
        return Err(Error::Domain(format!("k = {k} exceeds cube dimension {m}")));
    }
    let g = substitute_tail(coeffs, z, k)?;
    let (n_lo, n_hi) = (1usize << k, 1usize << (m - k));
    let outer: Vec<f64> = (0..n_lo)
        .into_par_iter()
        .map(|lo| {
            let inner: f64 = (0..n_hi).map(|hi| pair.q.value(g.values[lo | hi << k].norm())).sum::<f64>() / n_hi as f64;
            pair.f_inverse(inner)
        })
        .collect::<Result<_>>()?;
    Ok(outer.iter().sum::<f64>() / n_lo as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscreteProfile {
    pub m: usize,
    pub values: Vec<f64>,
    pub min_increment: f64,
    pub monotone: bool,
    pub tolerance: f64,
}

/// `φ(0), …, φ(m)` and whether they are nondecreasing within `tol`.
pub fn discrete_profile(coeffs: &[Complex64], pair: &FnPair, z: ComplexParam, tol: f64) -> Result<DiscreteProfile> {
    let m = dim_of(coeffs.len())?;
    let values = (0..=m)
        .map(|k| discrete_map(coeffs, pair, z, k))
        .collect::<Result<Vec<_>>>()?;
    let min_increment = values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    Ok(DiscreteProfile {
        m,
        monotone: m == 0 || min_increment >= -tol,
        values,
        min_increment,
        tolerance: tol,
    })
}

/// Walsh coefficients of `Σ_n c_n (n!/m^{n/2}) e_n(ε)`, where `e_n` is the
/// elementary symmetric polynomial; this is the cube counterpart of the
/// one-dimensional `f = Σ c_n H_n` under `x ≈ (ε_1 + … + ε_m)/√m`.
pub fn symmetric_coefficients(f: &CPoly, m: usize) -> Result<Vec<Complex64>> {
    check_dim(m)?;
    if f.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: f.dim() });
    }
    let h = f.in_basis(Basis::Hermite);
    let mut factor = vec![1.0f64; m + 1];
    for n in 1..=m {
        factor[n] = factor[n - 1] * n as f64 / (m as f64).sqrt();
    }
    Ok((0..1usize << m)
        .map(|s| {
            let n = s.count_ones() as usize;
            h.coeff(&[n as u32]) * factor[n]
        })
        .collect())
}

/// `(𝔐(h0) + 𝔐(h1))/2 − 𝔐((h0 + h1)/2)` with `𝔐(h) = F⁻¹(Σ w_i F(h_i))`.
pub fn mfunctional_midpoint(f: &dyn ScalarFn, h0: &[f64], h1: &[f64], weights: &[f64]) -> Result<f64> {
    if h0.len() != weights.len() || h1.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: weights.len(),
            got: if h0.len() != weights.len() { h0.len() } else { h1.len() },
        });
    }
    if h0.iter().chain(h1).any(|v| !(*v >= 0.0)) || weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::Domain("quasi-mean needs nonnegative h and weights".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("weights sum to {total}, not 1")));
    }
    let mean = |h: &[f64]| -> Result<f64> {
        let y: f64 = h.iter().zip(weights).map(|(v, w)| w * f.value(*v)).sum();
        f.inverse(y)
    };
    let mid: Vec<f64> = h0.iter().zip(h1).map(|(a, b)| 0.5 * (a + b)).collect();
    Ok(0.5 * (mean(h0)? + mean(h1)?) - mean(&mid)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalarfn::{make_exp, make_linear, make_power};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn walsh_examples() {
        let g = CubeFn::from_fn(3, |e| c(e[0], 0.0)).unwrap();
        let w = g.walsh_expand();
        for (s, v) in w.iter().enumerate() {
            let expect = if s == 0b001 { 1.0 } else { 0.0 };
            assert!((v - c(expect, 0.0)).norm() < 1e-15);
        }
        let g = CubeFn::from_fn(2, |_| c(3.0, -1.0)).unwrap();
        assert_eq!(g.walsh_expand()[0], c(3.0, -1.0));
        let g = CubeFn::from_fn(2, |e| c(e[0] * e[1] + 2.0, 0.0)).unwrap();
        let w = g.walsh_expand();
        // oracle: averages of g·W_S over the four points
        for (s, ws) in w.iter().enumerate() {
            let avg: Complex64 = (0..4usize)
                .map(|idx| g.values()[idx] * if (s & idx).count_ones() % 2 == 1 { -1.0 } else { 1.0 })
                .sum::<Complex64>()
                / 4.0;
            assert!((ws - avg).norm() < 1e-15);
        }
        assert_eq!(w[0b11], c(1.0, 0.0));
        assert_eq!(w[0], c(2.0, 0.0));
    }

    #[test]
    fn substitute_examples() {
        let g = CubeFn::from_fn(2, |e| c(e[0] * e[1], 0.0)).unwrap();
        let w = g.walsh_expand();
        assert_eq!(cube_substitute(&w, ComplexParam::real(1.0).unwrap()).unwrap(), g);
        let zero = cube_substitute(&w, ComplexParam::real(0.0).unwrap()).unwrap();
        assert!(zero.values().iter().all(|v| v.norm() < 1e-15));
        let i = cube_substitute(&w, ComplexParam::new(0.0, 1.0).unwrap()).unwrap();
        for (a, b) in i.values().iter().zip(g.values()) {
            assert!((a + b).norm() < 1e-15);
        }
    }

    #[test]
    fn two_point_examples() {
        let id = make_linear(1.0, 0.0);
        let sq = make_power(2.0).unwrap();
        let z = ComplexParam::new(0.3, 0.5).unwrap();
        let m = two_point_margin(id.as_ref(), sq.as_ref(), z, c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        assert!((m - (1.0 - z.norm_sqr())).abs() < 1e-15);
        assert_eq!(two_point_margin(sq.as_ref(), sq.as_ref(), z, c(0.4, 1.0), c(0.0, 0.0)).unwrap(), 0.0);
        let t = make_power(1.0).unwrap();
        let m = two_point_margin(sq.as_ref(), t.as_ref(), ComplexParam::real(0.9).unwrap(), c(1.0, 0.0), c(1.0, 0.0))
            .unwrap();
        assert!(m < 0.0);
    }

    #[test]
    fn discrete_map_endpoints_and_monotone() {
        let pair = FnPair::new(make_power(2.0).unwrap(), make_power(4.0).unwrap());
        let z = ComplexParam::real(1.0 / 3f64.sqrt()).unwrap();
        let coeffs = vec![c(1.0, 0.2), c(0.3, -0.4), c(-0.2, 0.1), c(0.15, 0.05), c(0.4, 0.0), c(0.0, 0.3), c(-0.1, 0.1), c(0.2, 0.2)];
        let g = CubeFn::from_walsh(&coeffs).unwrap();
        let top = discrete_map(&coeffs, &pair, z, 3).unwrap();
        let direct: f64 = g.values().iter().map(|v| v.norm_sqr()).sum::<f64>() / 8.0;
        assert!((top - direct).abs() < 1e-13);
        let gz = cube_substitute(&coeffs, z).unwrap();
        let eq: f64 = gz.values().iter().map(|v| v.norm().powi(4)).sum::<f64>() / 8.0;
        assert!((discrete_map(&coeffs, &pair, z, 0).unwrap() - eq.sqrt()).abs() < 1e-13);
        let prof = discrete_profile(&coeffs, &pair, z, 1e-10).unwrap();
        assert!(prof.monotone, "{prof:?}");
    }

    #[test]
    fn symmetric_coefficients_match_hermite_sums() {
        // m large: e_2 · 2/m ≈ ξ² − 1 = H_2(ξ) exactly when ε_j² = 1
        let f = CPoly::univariate(Basis::Hermite, &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let m = 6;
        let g = CubeFn::from_walsh(&symmetric_coefficients(&f, m).unwrap()).unwrap();
        for (idx, v) in g.values().iter().enumerate() {
            let sum: f64 = (0..m).map(|j| if idx >> j & 1 == 1 { -1.0 } else { 1.0 }).sum();
            let xi = sum / (m as f64).sqrt();
            assert!((v.re - (xi * xi - 1.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn midpoint_examples() {
        let e = make_exp();
        let w = [0.25, 0.25, 0.5];
        let h = [0.3, 1.2, 0.0];
        assert_eq!(mfunctional_midpoint(e.as_ref(), &h, &h, &w).unwrap(), 0.0);
        let m = mfunctional_midpoint(e.as_ref(), &[0.0, 2.0, 1.0], &[1.5, 0.1, 0.3], &w).unwrap();
        assert!(m >= 0.0);
        assert!(mfunctional_midpoint(e.as_ref(), &h, &h, &[0.5, 0.5, 0.5]).is_err());
    }
}
