//! Complex-coefficient multivariate polynomials in the monomial and the
//! probabilists' Hermite basis.
//!
//! Hermite polynomials are generated by the recurrence
//! `H_0 = 1`, `H_1 = x`, `H_{n+1} = x H_n - n H_{n-1}` and tensorized across
//! coordinates. In the Hermite basis the Mahler transform `T_z` is diagonal:
//! the coefficient of `H_α` is multiplied by `z^{|α|}`.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::QuadRule;

/// Coefficients with both parts below this magnitude are dropped.
pub const PRUNE_THRESHOLD: f64 = 1e-300;

/// A multi-index `α = (α_1, …, α_k)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    /// `x_var^power` in `dim` variables.
    pub fn unit(dim: usize, var: usize, power: u32) -> Self {
        let mut e = vec![0; dim];
        e[var] = power;
        MultiIndex(e)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|α|`, the sum of the entries.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Monomial,
    Hermite,
}

/// The complex parameter `z` of the Mahler transform, restricted to the
/// closed unit disk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComplexParam {
    re: f64,
    im: f64,
}

impl ComplexParam {
    /// Slack allowed on `|z|² ≤ 1`.
    pub const DISK_TOL: f64 = 1e-12;

    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !re.is_finite() || !im.is_finite() {
            return Err(Error::Domain(format!("z = ({re}, {im}) is not finite")));
        }
        if re * re + im * im > 1.0 + Self::DISK_TOL {
            return Err(Error::Domain(format!(
                "z = ({re}, {im}) lies outside the closed unit disk"
            )));
        }
        Ok(ComplexParam { re, im })
    }

    pub fn real(r: f64) -> Result<Self> {
        Self::new(r, 0.0)
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    pub fn re(&self) -> f64 {
        self.re
    }

    pub fn im(&self) -> f64 {
        self.im
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn conj(&self) -> Self {
        ComplexParam {
            re: self.re,
            im: -self.im,
        }
    }
}

impl From<ComplexParam> for Complex64 {
    fn from(z: ComplexParam) -> Self {
        z.to_complex()
    }
}

/// A sparse polynomial `Σ c_α B_α` where `B_α` is `x^α` or `H_α`
/// depending on [`Basis`].
#[derive(Clone, Debug, PartialEq)]
pub struct CPoly {
    dim: usize,
    basis: Basis,
    terms: BTreeMap<MultiIndex, Complex64>,
}

fn negligible(c: Complex64) -> bool {
    c.re.abs() < PRUNE_THRESHOLD && c.im.abs() < PRUNE_THRESHOLD
}

impl CPoly {
    pub fn zero(dim: usize, basis: Basis) -> Self {
        assert!(dim >= 1, "polynomial dimension must be positive");
        CPoly {
            dim,
            basis,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, basis: Basis, c: Complex64) -> Self {
        let mut p = Self::zero(dim, basis);
        p.add_term(MultiIndex::zero(dim), c);
        p
    }

    /// Builds a polynomial from `(α, c_α)` pairs; repeated indices are summed.
    pub fn from_terms<I, M>(dim: usize, basis: Basis, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (M, Complex64)>,
        M: Into<MultiIndex>,
    {
        if dim == 0 {
            return Err(Error::Domain("polynomial dimension must be positive".into()));
        }
        let mut p = Self::zero(dim, basis);
        for (idx, c) in terms {
            let idx = idx.into();
            if idx.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: idx.dim(),
                });
            }
            p.add_term(idx, c);
        }
        Ok(p)
    }

    /// Single-variable polynomial from a dense coefficient list `c_0, c_1, …`.
    pub fn univariate(basis: Basis, coeffs: &[Complex64]) -> Self {
        let mut p = Self::zero(1, basis);
        for (n, &c) in coeffs.iter().enumerate() {
            p.add_term(MultiIndex::new(vec![n as u32]), c);
        }
        p
    }

    pub(crate) fn add_term(&mut self, idx: MultiIndex, c: Complex64) {
        debug_assert_eq!(idx.dim(), self.dim);
        match self.terms.entry(idx) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if negligible(*o.get()) {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                if !negligible(c) {
                    v.insert(c);
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    /// Maximum order of the stored terms; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(MultiIndex::order).max().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, idx: &[u32]) -> Complex64 {
        self.terms
            .get(&MultiIndex::new(idx.to_vec()))
            .copied()
            .unwrap_or_default()
    }

    /// Same coefficients reinterpreted in another basis. This is how the
    /// polynomial `ℓ(x) = Σ c_α x^α` is obtained from `f = Σ c_α H_α`.
    pub fn retag(&self, basis: Basis) -> CPoly {
        CPoly {
            basis,
            ..self.clone()
        }
    }

    pub fn scale(&self, c: Complex64) -> CPoly {
        let mut out = Self::zero(self.dim, self.basis);
        for (idx, v) in &self.terms {
            out.add_term(idx.clone(), v * c);
        }
        out
    }

    pub fn add(&self, other: &CPoly) -> Result<CPoly> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let other = other.in_basis(self.basis);
        let mut out = self.clone();
        for (idx, v) in other.terms {
            out.add_term(idx, v);
        }
        Ok(out)
    }

    pub fn in_basis(&self, basis: Basis) -> CPoly {
        match basis {
            Basis::Monomial => self.to_monomial(),
            Basis::Hermite => self.to_hermite(),
        }
    }

    /// Rewrites the polynomial in the Hermite basis.
    pub fn to_hermite(&self) -> CPoly {
        if self.basis == Basis::Hermite {
            return self.clone();
        }
        let table = monomials_in_hermite(self.max_var_degree());
        self.convert(&table, Basis::Hermite)
    }

    /// Rewrites the polynomial in the monomial basis.
    pub fn to_monomial(&self) -> CPoly {
        if self.basis == Basis::Monomial {
            return self.clone();
        }
        let table = hermite_in_monomials(self.max_var_degree());
        self.convert(&table, Basis::Monomial)
    }

    fn max_var_degree(&self) -> usize {
        self.terms
            .keys()
            .flat_map(|k| k.entries().iter().copied())
            .max()
            .unwrap_or(0) as usize
    }

    fn convert(&self, table: &[Vec<f64>], target: Basis) -> CPoly {
        let mut out = Self::zero(self.dim, target);
        let mut acc: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (idx, &c) in &self.terms {
            tensor_expand(idx.entries(), c, table, &mut acc);
        }
        for (idx, c) in acc {
            if !negligible(c) {
                out.terms.insert(idx, c);
            }
        }
        out
    }

    /// The Gaussian mean `∫ p dγ`, i.e. the `H_0` coefficient.
    pub fn mean(&self) -> Complex64 {
        self.to_hermite().coeff(&vec![0; self.dim])
    }

    /// Mahler transform `T_z`: multiplies the `H_α` coefficient by `z^{|α|}`.
    /// The result is in the Hermite basis.
    pub fn mahler(&self, z: ComplexParam) -> CPoly {
        self.mahler_complex(z.to_complex())
    }

    pub(crate) fn mahler_complex(&self, z: Complex64) -> CPoly {
        let h = self.to_hermite();
        let mut out = Self::zero(self.dim, Basis::Hermite);
        for (idx, c) in h.terms {
            let factor = z.powu(idx.order());
            out.add_term(idx, c * factor);
        }
        out
    }

    /// Evaluates at a complex point.
    pub fn eval(&self, point: &[Complex64]) -> Result<Complex64> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: point.len(),
            });
        }
        Ok(self.evaluator().eval(point))
    }

    pub fn eval_real(&self, point: &[f64]) -> Result<Complex64> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: point.len(),
            });
        }
        Ok(self.evaluator().eval_real(point))
    }

    /// Precomputes the monomial form for repeated evaluation.
    pub fn evaluator(&self) -> Evaluator {
        let m = self.to_monomial();
        let mut max_deg = vec![0usize; m.dim];
        let terms: Vec<(Vec<u32>, Complex64)> = m
            .terms
            .iter()
            .map(|(k, &c)| {
                for (d, &e) in max_deg.iter_mut().zip(k.entries()) {
                    *d = (*d).max(e as usize);
                }
                (k.entries().to_vec(), c)
            })
            .collect();
        Evaluator {
            dim: m.dim,
            max_deg,
            terms,
        }
    }

    /// `q(…, w, …) = E_v p(…, w + iσv, …)` with `v` standard Gaussian, taken
    /// along coordinate `var`. With `σ = 1` this maps `x^n` to `H_n`.
    pub fn smooth_imaginary(&self, var: usize, sigma: f64) -> Result<CPoly> {
        if sigma < 0.0 || !sigma.is_finite() {
            return Err(Error::Domain(format!("sigma = {sigma} must be finite and >= 0")));
        }
        self.smooth_along(var, Complex64::new(sigma, 0.0))
    }

    /// `E_v p(…, w + i·c·v, …)` for a complex direction `c`. Uses
    /// `E (w + icv)^n = Σ_m C(n,2m) (2m-1)!! (-c²)^m w^{n-2m}`.
    pub fn smooth_along(&self, var: usize, c: Complex64) -> Result<CPoly> {
        if var >= self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: var + 1,
            });
        }
        let p = self.to_monomial();
        let minus_c2 = -(c * c);
        let mut out = Self::zero(self.dim, Basis::Monomial);
        for (idx, &coef) in &p.terms {
            let n = idx.entries()[var];
            let mut moment = Complex64::new(1.0, 0.0); // (2m-1)!! (-c²)^m
            for m in 0..=n / 2 {
                if m > 0 {
                    moment *= minus_c2 * (2 * m - 1) as f64;
                }
                let mut e = idx.entries().to_vec();
                e[var] = n - 2 * m;
                out.add_term(MultiIndex(e), coef * moment * binomial(n, 2 * m));
            }
        }
        Ok(out)
    }

    /// Noise operator through its integral form,
    /// `T_r p(x) = ∫ p(r x + √(1-r²) y) dγ(y)`, discretized by `rule`.
    pub fn noise_eval(&self, r: f64, x: &[f64], rule: &QuadRule) -> Result<Complex64> {
        if !(-1.0..=1.0).contains(&r) {
            return Err(Error::Domain(format!("noise parameter r = {r} outside [-1, 1]")));
        }
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let ev = self.evaluator();
        let s = (1.0 - r * r).sqrt();
        rule.expect_complex(self.dim, |y| {
            let pt: Vec<f64> = x.iter().zip(y).map(|(xi, yi)| r * xi + s * yi).collect();
            ev.eval_real(&pt)
        })
    }
}

impl fmt::Display for CPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (idx, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({},{})", c.re, c.im)?;
            match self.basis {
                Basis::Hermite => {
                    let e: Vec<String> = idx.entries().iter().map(u32::to_string).collect();
                    write!(f, "*H{{{}}}", e.join(","))?;
                }
                Basis::Monomial => {
                    for (j, &e) in idx.entries().iter().enumerate() {
                        if e > 0 {
                            write!(f, " x{}^{}", j + 1, e)?;
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Monomial-form evaluator built by [`CPoly::evaluator`].
#[derive(Clone, Debug)]
pub struct Evaluator {
    dim: usize,
    max_deg: Vec<usize>,
    terms: Vec<(Vec<u32>, Complex64)>,
}

impl Evaluator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, point: &[Complex64]) -> Complex64 {
        let powers: Vec<Vec<Complex64>> = point
            .iter()
            .zip(&self.max_deg)
            .map(|(&x, &d)| {
                let mut v = Vec::with_capacity(d + 1);
                let mut acc = Complex64::new(1.0, 0.0);
                v.push(acc);
                for _ in 0..d {
                    acc *= x;
                    v.push(acc);
                }
                v
            })
            .collect();
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .enumerate()
                    .fold(*c, |acc, (j, &k)| acc * powers[j][k as usize])
            })
            .sum()
    }

    pub fn eval_real(&self, point: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let m: f64 = e.iter().zip(point).map(|(&k, &x)| x.powi(k as i32)).product();
                c * m
            })
            .sum()
    }
}

/// Multi-indices in `dim` variables of total order at most `degree`,
/// ordered by total order and then lexicographically.
pub fn multi_indices(dim: usize, degree: u32) -> Vec<MultiIndex> {
    fn rec(dim: usize, budget: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == dim {
            out.push(prefix.clone());
            return;
        }
        for a in 0..=budget {
            prefix.push(a);
            rec(dim, budget - a, prefix, out);
            prefix.pop();
        }
    }
    let mut all = Vec::new();
    rec(dim, degree, &mut Vec::with_capacity(dim), &mut all);
    let mut idx: Vec<MultiIndex> = all.into_iter().map(MultiIndex).collect();
    idx.sort_by(|a, b| a.order().cmp(&b.order()).then_with(|| a.0.cmp(&b.0)));
    idx
}

/// Random polynomial in the Hermite basis: each `H_α` with `|α| ≤ degree`
/// gets an independent complex standard normal coefficient (`E|c|² = 1`)
/// scaled by `1/(1 + |α|)`.
pub fn random_hermite<R: Rng + ?Sized>(dim: usize, degree: u32, rng: &mut R) -> CPoly {
    let mut p = CPoly::zero(dim, Basis::Hermite);
    for idx in multi_indices(dim, degree) {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        let c = Complex64::new(re, im) * (0.5f64.sqrt() / (1.0 + idx.order() as f64));
        p.add_term(idx, c);
    }
    p
}

pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Row `n` holds the monomial coefficients of `H_n`, built from
/// `H_{n+1} = x H_n - n H_{n-1}`.
pub fn hermite_in_monomials(max_deg: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = vec![vec![1.0]];
    if max_deg >= 1 {
        rows.push(vec![0.0, 1.0]);
    }
    for n in 1..max_deg {
        let mut next = vec![0.0; n + 2];
        for (j, &a) in rows[n].iter().enumerate() {
            next[j + 1] += a;
        }
        for (j, &a) in rows[n - 1].iter().enumerate() {
            next[j] -= n as f64 * a;
        }
        rows.push(next);
    }
    rows
}

/// Row `n` holds the Hermite coefficients of `x^n`, built from
/// `x H_j = H_{j+1} + j H_{j-1}`.
pub fn monomials_in_hermite(max_deg: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = vec![vec![1.0]];
    for n in 0..max_deg {
        let mut next = vec![0.0; n + 2];
        for (j, &a) in rows[n].iter().enumerate() {
            next[j + 1] += a;
            if j >= 1 {
                next[j - 1] += j as f64 * a;
            }
        }
        rows.push(next);
    }
    rows
}

fn tensor_expand(
    alpha: &[u32],
    c: Complex64,
    table: &[Vec<f64>],
    acc: &mut BTreeMap<MultiIndex, Complex64>,
) {
    fn rec(
        alpha: &[u32],
        pos: usize,
        cur: &mut Vec<u32>,
        coef: Complex64,
        table: &[Vec<f64>],
        acc: &mut BTreeMap<MultiIndex, Complex64>,
    ) {
        if pos == alpha.len() {
            *acc.entry(MultiIndex(cur.clone())).or_default() += coef;
            return;
        }
        for (j, &a) in table[alpha[pos] as usize].iter().enumerate() {
            if a != 0.0 {
                cur.push(j as u32);
                rec(alpha, pos + 1, cur, coef * a, table, acc);
                cur.pop();
            }
        }
    }
    let mut cur = Vec::with_capacity(alpha.len());
    rec(alpha, 0, &mut cur, c, table, acc);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn x_squared_to_hermite() {
        let p = CPoly::univariate(Basis::Monomial, &[c(0.0), c(0.0), c(1.0)]);
        let h = p.to_hermite();
        assert_eq!(h.len(), 2);
        assert!(close(h.coeff(&[2]), c(1.0), 1e-15));
        assert!(close(h.coeff(&[0]), c(1.0), 1e-15));
    }

    #[test]
    fn constant_to_hermite() {
        let p = CPoly::constant(2, Basis::Monomial, Complex64::new(3.0, -1.0));
        let h = p.to_hermite();
        assert_eq!(h.len(), 1);
        assert_eq!(h.coeff(&[0, 0]), Complex64::new(3.0, -1.0));
    }

    #[test]
    fn product_x1_x2_is_h11() {
        let p = CPoly::from_terms(2, Basis::Monomial, [(vec![1, 1], c(1.0))]).unwrap();
        let h = p.to_hermite();
        assert_eq!(h.len(), 1);
        assert_eq!(h.coeff(&[1, 1]), c(1.0));
        // H_{(1,1)} = H_1(x1) H_1(x2) expands back to x1 x2
        assert_eq!(h.to_monomial(), p);
    }

    #[test]
    fn h3_to_monomial() {
        let h = CPoly::from_terms(1, Basis::Hermite, [(vec![3], c(1.0))]).unwrap();
        let m = h.to_monomial();
        assert_eq!(m.len(), 2);
        assert_eq!(m.coeff(&[3]), c(1.0));
        assert_eq!(m.coeff(&[1]), c(-3.0));
        let h0 = CPoly::constant(1, Basis::Hermite, c(1.0)).to_monomial();
        assert_eq!(h0.coeff(&[0]), c(1.0));
        let h2h0 = CPoly::univariate(Basis::Hermite, &[c(1.0), c(0.0), c(1.0)]).to_monomial();
        assert_eq!(h2h0.len(), 1);
        assert_eq!(h2h0.coeff(&[2]), c(1.0));
    }

    #[test]
    fn recurrence_matches_explicit_formula() {
        // H_n = Σ_m (-1)^m n! / (m! 2^m (n-2m)!) x^{n-2m}
        let rows = hermite_in_monomials(10);
        for (n, row) in rows.iter().enumerate() {
            for m in 0..=n / 2 {
                let mut v = 1.0;
                for i in 1..=n {
                    v *= i as f64;
                }
                for i in 1..=m {
                    v /= i as f64 * 2.0;
                }
                for i in 1..=(n - 2 * m) {
                    v /= i as f64;
                }
                if m % 2 == 1 {
                    v = -v;
                }
                assert_eq!(row[n - 2 * m], v, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn mahler_on_x_squared() {
        let p = CPoly::univariate(Basis::Hermite, &[c(1.0), c(0.0), c(1.0)]);
        let z = ComplexParam::new(0.3, 0.4).unwrap();
        let t = p.mahler(z);
        let zc = z.to_complex();
        assert!(close(t.coeff(&[2]), zc * zc, 1e-15));
        assert!(close(t.coeff(&[0]), c(1.0), 1e-15));
        // z²x² + 1 - z²
        let m = t.to_monomial();
        assert!(close(m.coeff(&[2]), zc * zc, 1e-15));
        assert!(close(m.coeff(&[0]), c(1.0) - zc * zc, 1e-15));
    }

    #[test]
    fn mahler_endpoints() {
        let p = CPoly::univariate(
            Basis::Monomial,
            &[c(0.5), Complex64::new(1.0, 2.0), c(-1.0), c(3.0)],
        );
        let one = p.mahler(ComplexParam::real(1.0).unwrap());
        assert_eq!(one.to_monomial().len(), p.len());
        for (idx, v) in p.terms() {
            assert!(close(one.to_monomial().coeff(idx.entries()), *v, 1e-13));
        }
        let zero = p.mahler(ComplexParam::real(0.0).unwrap());
        assert_eq!(zero.len(), 1);
        // E x² = 1 so the mean is 0.5 - 1 = -0.5
        assert!(close(zero.coeff(&[0]), c(-0.5), 1e-15));
        assert!(close(p.mean(), c(-0.5), 1e-15));
    }

    #[test]
    fn evaluation_examples() {
        let x2 = CPoly::univariate(Basis::Monomial, &[c(0.0), c(0.0), c(1.0)]);
        let v = x2.eval(&[Complex64::new(1.0, 1.0)]).unwrap();
        assert!(close(v, Complex64::new(0.0, 2.0), 1e-15));
        let h2 = CPoly::from_terms(1, Basis::Hermite, [(vec![2], c(1.0))]).unwrap();
        assert!(close(h2.eval_real(&[2.0]).unwrap(), c(3.0), 1e-15));
        let five = CPoly::constant(3, Basis::Hermite, c(5.0));
        assert_eq!(five.eval_real(&[1.0, -2.0, 7.0]).unwrap(), c(5.0));
        assert!(matches!(
            five.eval_real(&[1.0]),
            Err(Error::DimensionMismatch { expected: 3, got: 1 })
        ));
    }

    #[test]
    fn smoothing_examples() {
        let u2 = CPoly::univariate(Basis::Monomial, &[c(0.0), c(0.0), c(1.0)]);
        let s = u2.smooth_imaginary(0, 1.0).unwrap();
        assert_eq!(s.coeff(&[2]), c(1.0));
        assert_eq!(s.coeff(&[0]), c(-1.0));
        assert_eq!(u2.smooth_imaginary(0, 0.0).unwrap(), u2);
        let u3 = CPoly::univariate(Basis::Monomial, &[c(0.0), c(0.0), c(0.0), c(1.0)]);
        // E (u + iv)^3 = u^3 + 3u (iv)^2 ... = u^3 - 3u
        let s3 = u3.smooth_imaginary(0, 1.0).unwrap();
        assert_eq!(s3.len(), 2);
        assert_eq!(s3.coeff(&[3]), c(1.0));
        assert_eq!(s3.coeff(&[1]), c(-3.0));
        assert!(u2.smooth_imaginary(0, -1.0).is_err());
    }

    #[test]
    fn smoothing_only_touches_one_coordinate() {
        let p = CPoly::from_terms(2, Basis::Monomial, [(vec![2, 2], c(1.0))]).unwrap();
        let s = p.smooth_imaginary(1, 2.0).unwrap();
        // x1² (x2² - 4)
        assert_eq!(s.coeff(&[2, 2]), c(1.0));
        assert_eq!(s.coeff(&[2, 0]), c(-4.0));
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn complex_param_disk() {
        assert!(ComplexParam::new(0.6, 0.8).is_ok());
        assert!(ComplexParam::new(1.0 + 1e-13, 0.0).is_ok());
        assert!(ComplexParam::new(1.01, 0.0).is_err());
        assert!(ComplexParam::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn zero_coefficients_are_pruned() {
        let p = CPoly::from_terms(
            1,
            Basis::Monomial,
            [(vec![1], c(1.0)), (vec![1], c(-1.0)), (vec![0], c(2.0))],
        )
        .unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.degree(), 0);
    }

    #[test]
    fn noise_eval_examples() {
        let rule = QuadRule::gauss(16).unwrap();
        let x = CPoly::univariate(Basis::Monomial, &[c(0.0), c(1.0)]);
        let v = x.noise_eval(0.5, &[2.0], &rule).unwrap();
        assert!(close(v, c(1.0), 1e-12));
        let x2 = CPoly::univariate(Basis::Monomial, &[c(0.0), c(0.0), c(1.0)]);
        for &(r, pt) in &[(0.3, 1.7), (-0.8, -0.4), (1.0, 2.5)] {
            let v = x2.noise_eval(r, &[pt], &rule).unwrap();
            let expected = r * r * pt * pt + 1.0 - r * r;
            assert!(close(v, c(expected), 1e-12), "r={r} x={pt}");
        }
        let v0 = x2.noise_eval(0.0, &[9.0], &rule).unwrap();
        assert!(close(v0, x2.mean(), 1e-12));
        assert!(x2.noise_eval(1.5, &[0.0], &rule).is_err());
    }

    #[test]
    fn random_polynomials() {
        use rand::SeedableRng;
        assert_eq!(multi_indices(2, 2).len(), 6);
        assert_eq!(multi_indices(3, 8).len(), 165);
        assert_eq!(multi_indices(2, 1)[1].entries(), &[0, 1]);
        let mut r1 = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let mut r2 = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let a = random_hermite(2, 3, &mut r1);
        assert_eq!(a, random_hermite(2, 3, &mut r2));
        assert_eq!(a.len(), 10);
        assert_eq!(a.basis(), Basis::Hermite);
    }
}
