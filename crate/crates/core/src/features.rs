//! Feature columns, standardization, and MI-based saliency ranking.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::layout::Layout;
use crate::mi::{KsgEstimator, SampleBlock};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

/// Where a column came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Innate,
    Committed { session_id: String, axis: Axis },
}

/// `N x D` real features, stored by column.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    names: Vec<String>,
    provenance: Vec<Provenance>,
    columns: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    /// Builds a matrix of innate columns.
    pub fn innate(rows: usize, names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        let provenance = vec![Provenance::Innate; names.len()];
        Self::new(rows, names, provenance, columns)
    }

    pub fn new(
        rows: usize,
        names: Vec<String>,
        provenance: Vec<Provenance>,
        columns: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if names.len() != columns.len() || provenance.len() != columns.len() {
            return Err(Error::DimensionMismatch {
                expected: columns.len(),
                got: names.len().min(provenance.len()),
            });
        }
        let mut seen = HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateColumn(name.clone()));
            }
        }
        for (j, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::RowCountMismatch {
                    expected: rows,
                    got: col.len(),
                });
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
        Ok(Self {
            rows,
            names,
            provenance,
            columns,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    pub fn rows_of(&self, rows: &[usize]) -> Vec<Vec<f64>> {
        rows.iter().map(|&i| self.row(i)).collect()
    }

    /// Selected rows as a sample block (all columns).
    pub fn block(&self, rows: &[usize]) -> Result<SampleBlock> {
        let values = rows
            .iter()
            .flat_map(|&i| self.columns.iter().map(move |c| c[i]))
            .collect();
        SampleBlock::new(rows.len(), self.cols(), values)
    }

    pub fn select_columns(&self, cols: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            rows: self.rows,
            names: cols.iter().map(|&j| self.names[j].clone()).collect(),
            provenance: cols.iter().map(|&j| self.provenance[j].clone()).collect(),
            columns: cols.iter().map(|&j| self.columns[j].clone()).collect(),
        }
    }

    pub(crate) fn set_provenance(&mut self, j: usize, provenance: Provenance) {
        self.provenance[j] = provenance;
    }

    pub fn push_column(&mut self, name: String, provenance: Provenance, values: Vec<f64>) -> Result<usize> {
        if values.len() != self.rows {
            return Err(Error::RowCountMismatch {
                expected: self.rows,
                got: values.len(),
            });
        }
        if self.names.contains(&name) {
            return Err(Error::DuplicateColumn(name));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: i,
                col: self.cols(),
            });
        }
        self.names.push(name);
        self.provenance.push(provenance);
        self.columns.push(values);
        Ok(self.columns.len() - 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub mean: f64,
    pub std: f64,
    pub zero_variance: bool,
}

/// Population mean/stddev of one column.
pub fn column_stats(values: &[f64]) -> ColumnStats {
    if values.is_empty() {
        return ColumnStats {
            mean: 0.0,
            std: 0.0,
            zero_variance: true,
        };
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    ColumnStats {
        mean,
        std,
        zero_variance: std <= 1e-12 * mean.abs().max(1.0),
    }
}

pub fn standardize_column(values: &[f64], stats: &ColumnStats) -> Vec<f64> {
    if stats.zero_variance {
        vec![0.0; values.len()]
    } else {
        values.iter().map(|v| (v - stats.mean) / stats.std).collect()
    }
}

/// Zero mean, unit population stddev per column. Constant columns become all zeros.
pub fn standardize(matrix: &FeatureMatrix) -> (FeatureMatrix, Vec<ColumnStats>) {
    let stats: Vec<ColumnStats> = matrix.columns.iter().map(|c| column_stats(c)).collect();
    let columns = matrix
        .columns
        .iter()
        .zip(&stats)
        .map(|(c, s)| standardize_column(c, s))
        .collect();
    (
        FeatureMatrix {
            rows: matrix.rows,
            names: matrix.names.clone(),
            provenance: matrix.provenance.clone(),
            columns,
        },
        stats,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedFeature {
    pub column: usize,
    pub mi_nats: f64,
}

/// Every column once, by descending MI (clamped at 0), ties by column index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanking {
    entries: Vec<RankedFeature>,
}

impl FeatureRanking {
    /// Orders raw per-column estimates. `raw[j]` belongs to column `j`.
    pub fn from_estimates(raw: &[f64]) -> Self {
        let mut entries: Vec<RankedFeature> = raw
            .iter()
            .enumerate()
            .map(|(column, &mi)| RankedFeature {
                column,
                mi_nats: mi.max(0.0),
            })
            .collect();
        entries.sort_by(|a, b| {
            b.mi_nats
                .total_cmp(&a.mi_nats)
                .then(a.column.cmp(&b.column))
        });
        Self { entries }
    }

    pub fn entries(&self) -> &[RankedFeature] {
        &self.entries
    }

    pub fn columns(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.column).collect()
    }

    pub fn head(&self, n: usize) -> &[RankedFeature] {
        &self.entries[..n.min(self.entries.len())]
    }
}

/// Scores every column by MI between its touched rows and the touched positions.
/// Untouched rows take no part.
pub fn rank_features(
    matrix: &FeatureMatrix,
    layout: &Layout,
    estimator: &KsgEstimator,
) -> Result<FeatureRanking> {
    if layout.len() != matrix.rows() {
        return Err(Error::DimensionMismatch {
            expected: matrix.rows(),
            got: layout.len(),
        });
    }
    let touched = layout.touched_rows();
    let need = estimator.k + 2;
    if touched.len() < need {
        return Err(Error::TooFewTouched {
            need,
            got: touched.len(),
        });
    }
    if matrix.cols() == 0 {
        return Err(Error::NoFeatures);
    }
    let positions = layout.block(&touched)?;
    let raw = (0..matrix.cols())
        .into_par_iter()
        .map(|j| {
            let col: Vec<f64> = touched.iter().map(|&i| matrix.column(j)[i]).collect();
            let xs = SampleBlock::from_column(&col)?;
            Ok(estimator.estimate(&xs, &positions)?.nats)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(FeatureRanking::from_estimates(&raw))
}

/// Keeps the `min(top_k, D)` best-ranked columns, in rank order.
pub fn reduce(matrix: &FeatureMatrix, ranking: &FeatureRanking, top_k: usize) -> FeatureMatrix {
    let keep: Vec<usize> = ranking.head(top_k).iter().map(|e| e.column).collect();
    matrix.select_columns(&keep)
}
