//! Expectations under the standard Gaussian measure.
//!
//! [`QuadRule::gauss`] builds the `n`-point Gauss–Hermite rule for the
//! probability weight `e^{-x²/2}/√(2π)`. Nodes come from the eigenvalues of
//! the Jacobi matrix of the recurrence `x H_j = H_{j+1} + j H_{j-1}`
//! (Golub–Welsch), polished by Newton steps on `H_n`; weights are
//! `1 / (n h_{n-1}(x_i)²)` with `h_j = H_j/√(j!)`, which keeps tail weights
//! accurate in relative terms. Tensor rules over `ℝ^k` reuse one
//! 1-D rule per coordinate.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest supported rule; above this `h_{n-1}` overflows at the outer nodes.
pub const MAX_ORDER: usize = 512;

#[derive(Clone, Debug, PartialEq)]
pub struct QuadRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadRule {
    pub const DEFAULT_ORDER: usize = 64;

    /// The `n`-point probabilists' Gauss–Hermite rule, exact for polynomials
    /// of degree `≤ 2n - 1`.
    pub fn gauss(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_ORDER {
            return Err(Error::Domain(format!(
                "quadrature order {n} outside 1..={MAX_ORDER}"
            )));
        }
        if n == 1 {
            return Ok(QuadRule {
                nodes: vec![0.0],
                weights: vec![1.0],
            });
        }
        let jacobi = DMatrix::from_fn(n, n, |i, j| {
            if j == i + 1 {
                ((i + 1) as f64).sqrt()
            } else if i == j + 1 {
                ((j + 1) as f64).sqrt()
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::try_new(jacobi, 1e-15, 10_000).ok_or(Error::EigenSolver(n))?;
        let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        nodes.sort_by(f64::total_cmp);

        for x in nodes.iter_mut() {
            for _ in 0..4 {
                let (hn, hn1) = normalized_hermite_pair(n, *x);
                let step = hn / ((n as f64).sqrt() * hn1);
                *x -= step;
                if step.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
        }
        // exact symmetry about 0
        for i in 0..n / 2 {
            let a = 0.5 * (nodes[n - 1 - i] - nodes[i]);
            nodes[i] = -a;
            nodes[n - 1 - i] = a;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        let weights = nodes
            .iter()
            .map(|&x| {
                let (_, hn1) = normalized_hermite_pair(n, x);
                1.0 / (n as f64 * hn1 * hn1)
            })
            .collect();
        Ok(QuadRule { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Tensor-product approximation of `∫_{ℝ^k} f dγ`. The sum is assembled
    /// in a fixed order, so the result does not depend on the thread count.
    pub fn expect<F>(&self, k: usize, f: F) -> Result<f64>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        self.tensor_sum(k, 0.0, |x| {
            let v = f(x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::non_finite(format!("node {x:?}"), v))
            }
        })
    }

    pub fn expect_complex<F>(&self, k: usize, f: F) -> Result<Complex64>
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        self.tensor_sum(k, Complex64::new(0.0, 0.0), |x| {
            let v = f(x);
            if v.is_finite() {
                Ok(v)
            } else {
                let bad = if v.re.is_finite() { v.im } else { v.re };
                Err(Error::non_finite(format!("node {x:?}"), bad))
            }
        })
    }

    /// Expectation under the variance-`s` Gaussian `dγ^{(s)}`, realized by
    /// scaling the nodes by `√s`.
    pub fn expect_scaled<F>(&self, k: usize, s: f64, f: F) -> Result<f64>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        if s < 0.0 {
            return Err(Error::Domain(format!("variance {s} is negative")));
        }
        let root = s.sqrt();
        self.expect(k, |x| {
            let y: Vec<f64> = x.iter().map(|v| root * v).collect();
            f(&y)
        })
    }

    fn tensor_sum<T, F>(&self, k: usize, zero: T, f: F) -> Result<T>
    where
        T: Copy + Send + Sync + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
        F: Fn(&[f64]) -> Result<T> + Sync,
    {
        if k == 0 {
            return Err(Error::Domain("dimension must be positive".into()));
        }
        let n = self.order();
        let partials: Vec<Result<T>> = (0..n)
            .into_par_iter()
            .map(|first| {
                let mut idx = vec![0usize; k];
                idx[0] = first;
                let mut x = vec![0.0; k];
                let mut acc = zero;
                loop {
                    let mut w = 1.0;
                    for (j, &i) in idx.iter().enumerate() {
                        x[j] = self.nodes[i];
                        w *= self.weights[i];
                    }
                    acc = acc + f(&x)? * w;
                    // odometer over coordinates 1..k
                    let mut j = k;
                    loop {
                        if j == 1 {
                            return Ok(acc);
                        }
                        j -= 1;
                        idx[j] += 1;
                        if idx[j] < n {
                            break;
                        }
                        idx[j] = 0;
                    }
                }
            })
            .collect();
        let mut total = zero;
        for p in partials {
            total = total + p?;
        }
        Ok(total)
    }
}

/// `(h_n(x), h_{n-1}(x))` for the orthonormal Hermite polynomials
/// `h_j = H_j / √(j!)`.
fn normalized_hermite_pair(n: usize, x: f64) -> (f64, f64) {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for j in 0..n {
        let next = (x * cur - (j as f64).sqrt() * prev) / ((j + 1) as f64).sqrt();
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
}

const MC_CHUNK: usize = 8192;

/// Seeded Monte Carlo estimate of `∫_{ℝ^k} f dγ`. Samples are drawn in
/// fixed-size chunks, chunk `c` from a ChaCha stream `(seed, c)`, so the
/// estimate is identical for any number of worker threads.
pub fn mc_expect<F>(k: usize, samples: usize, seed: u64, f: F) -> Result<McEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if samples == 0 {
        return Err(Error::Domain("at least one sample is required".into()));
    }
    if k == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    let chunks = samples.div_ceil(MC_CHUNK);
    let parts: Vec<Result<(usize, f64, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = MC_CHUNK.min(samples - c * MC_CHUNK);
            let mut x = vec![0.0; k];
            let (mut mean, mut m2) = (0.0, 0.0);
            for i in 0..count {
                for v in x.iter_mut() {
                    *v = StandardNormal.sample(&mut rng);
                }
                let y = f(&x);
                if !y.is_finite() {
                    return Err(Error::non_finite(format!("sample {x:?}"), y));
                }
                let delta = y - mean;
                mean += delta / (i + 1) as f64;
                m2 += delta * (y - mean);
            }
            Ok((count, mean, m2))
        })
        .collect();

    let (mut n, mut mean, mut m2) = (0usize, 0.0, 0.0);
    for p in parts {
        let (nb, mb, m2b) = p?;
        let total = n + nb;
        let delta = mb - mean;
        mean += delta * nb as f64 / total as f64;
        m2 += m2b + delta * delta * (n as f64) * (nb as f64) / total as f64;
        n = total;
    }
    let stderr = if n > 1 {
        (m2 / (n - 1) as f64 / n as f64).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(McEstimate { mean, stderr })
}

/// `(2m - 1)!!`, the `2m`-th Gaussian moment.
pub fn gaussian_even_moment(m: u32) -> f64 {
    (1..=m).fold(1.0, |acc, j| acc * (2 * j - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_rules() {
        let r1 = QuadRule::gauss(1).unwrap();
        assert_eq!(r1.nodes(), &[0.0]);
        assert_eq!(r1.weights(), &[1.0]);

        let r2 = QuadRule::gauss(2).unwrap();
        assert!((r2.nodes()[0] + 1.0).abs() < 1e-15);
        assert!((r2.nodes()[1] - 1.0).abs() < 1e-15);
        assert!((r2.weights()[0] - 0.5).abs() < 1e-15);
        assert!((r2.weights()[1] - 0.5).abs() < 1e-15);

        let r3 = QuadRule::gauss(3).unwrap();
        let m4 = r3.expect(1, |x| x[0].powi(4)).unwrap();
        assert!((m4 - 3.0).abs() < 1e-13);
        assert!(QuadRule::gauss(0).is_err());
    }

    #[test]
    fn weights_sum_to_one_and_nodes_symmetric() {
        for n in [1, 2, 5, 17, 64, 128, 200] {
            let r = QuadRule::gauss(n).unwrap();
            let s: f64 = r.weights().iter().sum();
            assert!((s - 1.0).abs() < 1e-13, "n={n} sum={s}");
            for i in 0..n {
                assert_eq!(r.nodes()[i], -r.nodes()[n - 1 - i]);
                assert!(r.weights()[i] > 0.0);
            }
        }
    }

    #[test]
    fn expectation_examples() {
        let r = QuadRule::gauss(QuadRule::DEFAULT_ORDER).unwrap();
        assert!((r.expect(1, |_| 2.5).unwrap() - 2.5).abs() < 1e-13);
        assert!((r.expect(3, |_| 2.5).unwrap() - 2.5).abs() < 1e-12);
        let abs = r.expect(1, |x| x[0].abs()).unwrap();
        // the kink at 0 limits an even-order rule to O(1/n): 5.156e-3 at n = 64
        let err = abs - (2.0 / std::f64::consts::PI).sqrt();
        assert!(err > 0.0 && err < 6e-3, "{err}");
        let fine = QuadRule::gauss(128).unwrap().expect(1, |x| x[0].abs()).unwrap();
        assert!((fine - (2.0 / std::f64::consts::PI).sqrt()).abs() < 0.6 * err);
        // E[x1² x2⁴] = 3
        let mixed = r.expect(2, |x| x[0] * x[0] * x[1].powi(4)).unwrap();
        assert!((mixed - 3.0).abs() < 1e-12);
    }

    #[test]
    fn non_finite_integrand_reports_node() {
        let r = QuadRule::gauss(3).unwrap();
        let err = r
            .expect(1, |x| if x[0] == 0.0 { f64::NAN } else { 1.0 })
            .unwrap_err();
        match err {
            Error::NonFinite { context, .. } => assert!(context.contains("0.0")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn scaled_expectation_matches_variance() {
        let r = QuadRule::gauss(8).unwrap();
        let v = r.expect_scaled(1, 2.5, |x| x[0] * x[0]).unwrap();
        assert!((v - 2.5).abs() < 1e-13);
        let direct = r.expect(2, |x| (0.7f64.sqrt() * x[0]).cos() * x[1].powi(2)).unwrap();
        let scaled = r.expect_scaled(2, 0.7, |x| x[0].cos() * x[1].powi(2) / 0.7).unwrap();
        assert!((direct - scaled).abs() < 1e-13);
    }

    #[test]
    fn mc_examples() {
        let est = mc_expect(1, 1_000_000, 7, |x| x[0] * x[0]).unwrap();
        assert!((est.mean - 1.0).abs() < 0.002 + 1e-12, "{est:?}");
        let zero = mc_expect(2, 1000, 1, |_| 0.0).unwrap();
        assert_eq!(zero.mean, 0.0);
        assert_eq!(zero.stderr, 0.0);
        let abs = mc_expect(1, 200_000, 3, |x| x[0].abs()).unwrap();
        let truth = (2.0 / std::f64::consts::PI).sqrt();
        assert!((abs.mean - truth).abs() < 3.0 * abs.stderr);
        assert!(mc_expect(1, 0, 1, |_| 0.0).is_err());
        assert!(mc_expect(1, 10, 1, |_| f64::INFINITY).is_err());
    }

    #[test]
    fn mc_is_independent_of_thread_count() {
        let f = |x: &[f64]| (x[0] + 0.3 * x[1]).sin();
        let a = mc_expect(2, 50_000, 42, f).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| mc_expect(2, 50_000, 42, f).unwrap());
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    }
}
