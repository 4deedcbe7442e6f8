//! Kraskov–Stögbauer–Grassberger estimator, first variant, under the max norm.
//!
//! `I = ψ(k) + ψ(n) - <ψ(n_x + 1) + ψ(n_y + 1)>`, where `n_x` and `n_y` count
//! marginal neighbours strictly closer than the distance to the k-th joint
//! neighbour. The marginal counts are pooled into one histogram before the
//! digamma sum, so the result does not depend on which block comes first or on
//! the order rows are visited in.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::block::{jitter_relative, SampleBlock};
use super::digamma::digamma_real;
use crate::{Error, Result};

/// Jitter amplitude relative to each column's standard deviation.
pub const DEFAULT_JITTER: f64 = 1e-10;

const PARALLEL_THRESHOLD: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MiEstimate {
    /// Estimate in nats. May be slightly negative.
    pub nats: f64,
    pub k: usize,
    pub n: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KsgEstimator {
    pub k: usize,
    pub jitter: f64,
    pub seed: u64,
}

impl KsgEstimator {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            jitter: DEFAULT_JITTER,
            seed,
        }
    }

    pub fn with_jitter(mut self, jitter: f64) -> Self {
        self.jitter = jitter;
        self
    }

    pub fn estimate(&self, xs: &SampleBlock, ys: &SampleBlock) -> Result<MiEstimate> {
        let n = self.check(xs.rows(), ys.rows())?;
        let xs = jitter_relative(xs, self.jitter, self.seed);
        let ys = jitter_relative(ys, self.jitter, self.seed);
        let nats = ksg_from_distances(
            n,
            self.k,
            |i, j| xs.chebyshev(i, j),
            |i, j| ys.chebyshev(i, j),
        );
        Ok(MiEstimate { nats, k: self.k, n })
    }

    /// Prepares repeated estimation against a fixed first block. Every later
    /// [`FixedBlockKsg::estimate`] returns exactly what [`Self::estimate`]
    /// would for the same pair.
    pub fn fix_block(&self, xs: &SampleBlock) -> Result<FixedBlockKsg> {
        let n = xs.rows();
        if n <= self.k {
            return Err(Error::SampleTooSmall { n, k: self.k });
        }
        let xs = jitter_relative(xs, self.jitter, self.seed);
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                dist[i * n + j] = xs.chebyshev(i, j);
            }
        }
        Ok(FixedBlockKsg {
            estimator: *self,
            n,
            dist,
        })
    }

    fn check(&self, nx: usize, ny: usize) -> Result<usize> {
        if self.k == 0 {
            return Err(Error::Domain("k must be >= 1".into()));
        }
        if nx != ny {
            return Err(Error::DimensionMismatch {
                expected: nx,
                got: ny,
            });
        }
        if nx <= self.k {
            return Err(Error::SampleTooSmall { n: nx, k: self.k });
        }
        Ok(nx)
    }
}

/// A first block whose pairwise distances have been computed once.
#[derive(Clone, Debug)]
pub struct FixedBlockKsg {
    estimator: KsgEstimator,
    n: usize,
    dist: Vec<f64>,
}

impl FixedBlockKsg {
    pub fn estimate(&self, ys: &SampleBlock) -> Result<MiEstimate> {
        let n = self.estimator.check(self.n, ys.rows())?;
        let ys = jitter_relative(ys, self.estimator.jitter, self.estimator.seed);
        let nats = ksg_from_distances(
            n,
            self.estimator.k,
            |i, j| self.dist[i * n + j],
            |i, j| ys.chebyshev(i, j),
        );
        Ok(MiEstimate {
            nats,
            k: self.estimator.k,
            n,
        })
    }
}

/// KSG estimate with the default jitter.
pub fn estimate_mi(xs: &SampleBlock, ys: &SampleBlock, k: usize, seed: u64) -> Result<MiEstimate> {
    KsgEstimator::new(k, seed).estimate(xs, ys)
}

fn ksg_from_distances<FX, FY>(n: usize, k: usize, dx: FX, dy: FY) -> f64
where
    FX: Fn(usize, usize) -> f64 + Sync,
    FY: Fn(usize, usize) -> f64 + Sync,
{
    let counts = |i: usize| -> (usize, usize) {
        let mut mx = Vec::with_capacity(n - 1);
        let mut my = Vec::with_capacity(n - 1);
        let mut joint = Vec::with_capacity(n - 1);
        for j in (0..n).filter(|&j| j != i) {
            let a = dx(i, j);
            let b = dy(i, j);
            mx.push(a);
            my.push(b);
            joint.push(a.max(b));
        }
        let (_, eps, _) = joint.select_nth_unstable_by(k - 1, f64::total_cmp);
        let eps = *eps;
        (
            mx.iter().filter(|&&d| d < eps).count(),
            my.iter().filter(|&&d| d < eps).count(),
        )
    };

    let pairs: Vec<(usize, usize)> = if n >= PARALLEL_THRESHOLD {
        (0..n).into_par_iter().map(counts).collect()
    } else {
        (0..n).map(counts).collect()
    };

    // hist[c] = number of marginal counts equal to c, over both blocks
    let mut hist = vec![0u64; n];
    for (a, b) in pairs {
        hist[a] += 1;
        hist[b] += 1;
    }
    let marginal: f64 = hist
        .iter()
        .enumerate()
        .filter(|(_, &h)| h > 0)
        .map(|(c, &h)| h as f64 * digamma_real(c as f64 + 1.0))
        .sum();

    digamma_real(k as f64) + digamma_real(n as f64) - marginal / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal, Uniform};

    fn gaussian_pair(n: usize, rho: f64, seed: u64) -> (SampleBlock, SampleBlock) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            x.push(a);
            y.push(rho * a + (1.0 - rho * rho).sqrt() * b);
        }
        (
            SampleBlock::from_column(&x).unwrap(),
            SampleBlock::from_column(&y).unwrap(),
        )
    }

    #[test]
    fn gaussian_closed_form() {
        let (x, y) = gaussian_pair(2000, 0.9, 1);
        let mi = estimate_mi(&x, &y, 3, 0).unwrap();
        let truth = -0.5 * (1.0f64 - 0.81).ln();
        assert!((mi.nats - truth).abs() < 0.10, "{} vs {truth}", mi.nats);
        assert_eq!((mi.k, mi.n), (3, 2000));
    }

    #[test]
    fn independent_uniform_near_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = Uniform::new(0.0, 1.0).unwrap();
        let x: Vec<f64> = (0..1000).map(|_| u.sample(&mut rng)).collect();
        let y: Vec<f64> = (0..1000).map(|_| u.sample(&mut rng)).collect();
        let mi = estimate_mi(
            &SampleBlock::from_column(&x).unwrap(),
            &SampleBlock::from_column(&y).unwrap(),
            3,
            0,
        )
        .unwrap();
        assert!(mi.nats.abs() < 0.05, "{}", mi.nats);
    }

    #[test]
    fn affine_rescaling_of_one_block() {
        let (x, y) = gaussian_pair(2000, 0.6, 9);
        let y2: Vec<f64> = y.values().iter().map(|v| 2.0 * v + 1.0).collect();
        let a = estimate_mi(&x, &y, 3, 1).unwrap().nats;
        let b = estimate_mi(&x, &SampleBlock::from_column(&y2).unwrap(), 3, 1)
            .unwrap()
            .nats;
        assert!((a - b).abs() < 0.05, "{a} vs {b}");
    }

    #[test]
    fn symmetric_bit_exact() {
        let (x, y) = gaussian_pair(300, 0.5, 2);
        let y2 = SampleBlock::from_rows(
            &(0..300)
                .map(|i| [y.get(i, 0), x.get(i, 0) * 0.3])
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let a = estimate_mi(&x, &y2, 3, 4).unwrap();
        let b = estimate_mi(&y2, &x, 3, 4).unwrap();
        assert_eq!(a.nats.to_bits(), b.nats.to_bits());
    }

    #[test]
    fn fixed_block_matches_direct() {
        let (x, y) = gaussian_pair(60, 0.7, 3);
        let est = KsgEstimator::new(3, 8);
        let fixed = est.fix_block(&x).unwrap();
        assert_eq!(
            fixed.estimate(&y).unwrap().nats.to_bits(),
            est.estimate(&x, &y).unwrap().nats.to_bits()
        );
    }

    #[test]
    fn error_paths() {
        let (x, y) = gaussian_pair(3, 0.0, 0);
        assert!(matches!(
            estimate_mi(&x, &y, 3, 0),
            Err(Error::SampleTooSmall { n: 3, k: 3 })
        ));
        let (x4, _) = gaussian_pair(4, 0.0, 0);
        assert!(matches!(
            estimate_mi(&x4, &y, 1, 0),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(estimate_mi(&x, &y, 0, 0), Err(Error::Domain(_))));
    }
}
