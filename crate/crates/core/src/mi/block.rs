use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Row-major `n x d` matrix of samples, one row per observation.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBlock {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl SampleBlock {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Domain(format!(
                "sample block must be non-empty, got {rows} x {cols}"
            )));
        }
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut values = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            values.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, values)
    }

    pub fn from_column(column: &[f64]) -> Result<Self> {
        Self::new(column.len(), 1, column.to_vec())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    /// Population standard deviation of each column.
    pub fn column_std(&self) -> Vec<f64> {
        let n = self.rows as f64;
        (0..self.cols)
            .map(|j| {
                let mean = (0..self.rows).map(|i| self.get(i, j)).sum::<f64>() / n;
                let var = (0..self.rows)
                    .map(|i| (self.get(i, j) - mean).powi(2))
                    .sum::<f64>()
                    / n;
                var.sqrt()
            })
            .collect()
    }

    /// Chebyshev (max-norm) distance between rows `i` and `j`.
    #[inline]
    pub(crate) fn chebyshev(&self, i: usize, j: usize) -> f64 {
        self.row(i)
            .iter()
            .zip(self.row(j))
            .fold(0.0, |acc, (a, b)| f64::max(acc, (a - b).abs()))
    }
}

/// Adds i.i.d. uniform noise in `[-amplitude, amplitude]` to every entry.
pub fn jitter(block: &SampleBlock, amplitude: f64, seed: u64) -> SampleBlock {
    jitter_columns(block, &vec![amplitude; block.cols], seed)
}

/// Per-column variant of [`jitter`]; noise for column `j` is bounded by `amplitudes[j]`.
pub fn jitter_columns(block: &SampleBlock, amplitudes: &[f64], seed: u64) -> SampleBlock {
    assert_eq!(amplitudes.len(), block.cols, "one amplitude per column");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = block.values.clone();
    for (idx, v) in values.iter_mut().enumerate() {
        let u: f64 = rng.random_range(-1.0..=1.0);
        *v += u * amplitudes[idx % block.cols];
    }
    SampleBlock {
        rows: block.rows,
        cols: block.cols,
        values,
    }
}

/// Jitter scaled by each column's standard deviation (1.0 for constant columns).
pub(crate) fn jitter_relative(block: &SampleBlock, relative: f64, seed: u64) -> SampleBlock {
    if relative == 0.0 {
        return block.clone();
    }
    let amplitudes: Vec<f64> = block
        .column_std()
        .into_iter()
        .map(|s| if s > 0.0 { relative * s } else { relative })
        .collect();
    jitter_columns(block, &amplitudes, seed)
}
