//! Dataset state for one canvas: features, layout, and the commit log.

mod io;
mod store;

use std::collections::HashMap;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::EngineConfig;
use crate::extrapolator::{self, SvrParams};
use crate::features::{
    column_stats, rank_features, reduce, standardize, standardize_column, Axis, ColumnStats,
    FeatureMatrix, Provenance,
};
use crate::layout::{ItemPosition, Layout};
use crate::refiner::refine_positions;
use crate::{Error, Result};

pub use io::{read_features_csv, read_manifest, write_features_csv, write_manifest};
pub use store::{WorkspaceStore, CHECKSUMS_FILE, COMMITS_FILE, FEATURES_FILE, LAYOUT_FILE, MANIFEST_FILE};

/// One manifest entry. `label` is ground truth for simulations and is never
/// read by the engine.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Item {
    pub id: String,
    pub thumb: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitRecord {
    pub session_id: String,
    pub timestamp_ms: u64,
    #[serde(default)]
    pub annotation: Option<String>,
    /// Column indices of the appended x and y features.
    pub columns: [usize; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Move {
    pub id: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedColumn {
    pub column: usize,
    pub name: String,
    pub mi_nats: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub rank_ms: f64,
    pub refine_ms: f64,
    pub extrapolate_ms: f64,
    pub total_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefineReport {
    pub touched: usize,
    pub mi_before: f64,
    pub mi_after: f64,
    pub evaluations: usize,
    pub reduced_dims: usize,
    pub ranked_head: Vec<RankedColumn>,
    pub timing: Timing,
}

const RANKED_HEAD: usize = 10;

#[derive(Clone, Debug)]
pub struct Workspace {
    dataset_id: String,
    items: Vec<Item>,
    index: HashMap<String, usize>,
    raw: FeatureMatrix,
    standardized: FeatureMatrix,
    stats: Vec<ColumnStats>,
    layout: Layout,
    commits: Vec<CommitRecord>,
}

/// Reads a manifest and feature file and starts a fresh session.
pub fn load_workspace(manifest: &Path, features: &Path, seed: u64) -> Result<Workspace> {
    let dataset_id = manifest
        .parent()
        .and_then(|p| p.file_name())
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    let items = read_manifest(manifest)?;
    let raw = read_features_csv(features, items.len())?;
    Workspace::new(dataset_id, items, raw, seed)
}

fn random_layout(items: &[Item], seed: u64) -> Result<Layout> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Layout::new(
        items
            .iter()
            .map(|it| ItemPosition {
                id: it.id.clone(),
                x: rng.random_range(0.05..=0.95),
                y: rng.random_range(0.05..=0.95),
                touched: false,
            })
            .collect(),
    )
}

impl Workspace {
    /// Builds a workspace with a seeded random layout in `[0.05, 0.95]^2`.
    pub fn new(dataset_id: impl Into<String>, items: Vec<Item>, raw: FeatureMatrix, seed: u64) -> Result<Self> {
        if raw.rows() != items.len() {
            return Err(Error::RowCountMismatch {
                expected: items.len(),
                got: raw.rows(),
            });
        }
        let mut index = HashMap::with_capacity(items.len());
        for (i, it) in items.iter().enumerate() {
            if index.insert(it.id.clone(), i).is_some() {
                return Err(Error::DuplicateId(it.id.clone()));
            }
        }
        let layout = random_layout(&items, seed)?;
        let (standardized, stats) = standardize(&raw);
        Ok(Self {
            dataset_id: dataset_id.into(),
            items,
            index,
            raw,
            standardized,
            stats,
            layout,
            commits: Vec::new(),
        })
    }

    pub fn dataset_id(&self) -> &str {
        &self.dataset_id
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.raw.cols()
    }

    /// Features as stored: committed columns hold raw `[0, 1]` positions.
    pub fn raw_features(&self) -> &FeatureMatrix {
        &self.raw
    }

    pub fn features(&self) -> &FeatureMatrix {
        &self.standardized
    }

    pub fn column_stats(&self) -> &[ColumnStats] {
        &self.stats
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn commits(&self) -> &[CommitRecord] {
        &self.commits
    }

    pub fn row_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    fn resolve(&self, moves: &[Move]) -> Result<Vec<usize>> {
        moves
            .iter()
            .map(|m| {
                let row = self.row_of(&m.id).ok_or_else(|| Error::UnknownId(m.id.clone()))?;
                if !m.x.is_finite() || !m.y.is_finite() {
                    return Err(Error::InvalidCoordinate {
                        id: m.id.clone(),
                        x: m.x,
                        y: m.y,
                    });
                }
                Ok(row)
            })
            .collect()
    }

    /// Places items and marks them touched. Validates the whole batch first.
    pub fn apply_layout(&mut self, moves: &[Move]) -> Result<()> {
        let rows = self.resolve(moves)?;
        for (m, row) in moves.iter().zip(rows) {
            self.layout.set_position(row, m.x, m.y);
            self.layout.mark_touched(row);
        }
        Ok(())
    }

    /// Overwrites positions without marking items touched.
    pub fn set_positions(&mut self, moves: &[Move]) -> Result<()> {
        let rows = self.resolve(moves)?;
        for (m, row) in moves.iter().zip(rows) {
            self.layout.set_position(row, m.x, m.y);
        }
        Ok(())
    }

    /// Sets position and touched flag of each listed item exactly as given.
    pub fn apply_positions(&mut self, positions: &[ItemPosition]) -> Result<()> {
        let moves: Vec<Move> = positions
            .iter()
            .map(|p| Move {
                id: p.id.clone(),
                x: p.x,
                y: p.y,
            })
            .collect();
        let rows = self.resolve(&moves)?;
        for (p, row) in positions.iter().zip(rows) {
            self.layout.set_position(row, p.x, p.y);
            self.layout.set_touched(row, p.touched);
        }
        Ok(())
    }

    /// Rank, reduce, refine touched items, then extrapolate untouched ones.
    pub fn run_refinement(&mut self, config: &EngineConfig) -> Result<RefineReport> {
        config.validate()?;
        let t0 = Instant::now();
        let touched = self.layout.touched_rows();
        if touched.len() < config.min_touched() {
            return Err(Error::TooFewTouched {
                need: config.min_touched(),
                got: touched.len(),
            });
        }

        let ranking = rank_features(&self.standardized, &self.layout, &config.estimator())?;
        let reduced = reduce(&self.standardized, &ranking, config.top_k);
        let t_rank = t0.elapsed();

        let refined = refine_positions(&reduced, &self.layout, config)?;
        let t_refine = t0.elapsed();

        let train_rows = reduced.rows_of(&touched);
        let targets: Vec<[f64; 2]> = touched.iter().map(|&r| refined.refined.position(r)).collect();
        let model = extrapolator::train(&train_rows, &targets, &SvrParams::from(config))?;
        let untouched = refined.refined.untouched_rows();
        let predicted = model.predict_untouched(&reduced.rows_of(&untouched))?;

        let mut layout = refined.refined;
        for (&row, p) in untouched.iter().zip(&predicted) {
            layout.set_position(row, p[0], p[1]);
        }
        self.layout = layout;
        let t_total = t0.elapsed();

        let ms = |d: std::time::Duration| d.as_secs_f64() * 1e3;
        Ok(RefineReport {
            touched: touched.len(),
            mi_before: refined.mi_before,
            mi_after: refined.mi_after,
            evaluations: refined.evaluations,
            reduced_dims: reduced.cols(),
            ranked_head: ranking
                .head(RANKED_HEAD)
                .iter()
                .map(|e| RankedColumn {
                    column: e.column,
                    name: self.standardized.names()[e.column].clone(),
                    mi_nats: e.mi_nats,
                })
                .collect(),
            timing: Timing {
                rank_ms: ms(t_rank),
                refine_ms: ms(t_refine - t_rank),
                extrapolate_ms: ms(t_total - t_refine),
                total_ms: ms(t_total),
            },
        })
    }

    /// Appends the current x and y of every item as two committed feature columns.
    pub fn commit(&mut self, session_id: &str, annotation: Option<String>) -> Result<&CommitRecord> {
        let ordinal = self.commits.len() + 1;
        let xs: Vec<f64> = self.layout.items().iter().map(|p| p.x).collect();
        let ys: Vec<f64> = self.layout.items().iter().map(|p| p.y).collect();
        let mut columns = [0usize; 2];
        for (slot, (axis, values)) in [(Axis::X, xs), (Axis::Y, ys)].into_iter().enumerate() {
            let suffix = match axis {
                Axis::X => "x",
                Axis::Y => "y",
            };
            let name = self.unused_name(&format!("semantic_{ordinal}_{suffix}"));
            let provenance = Provenance::Committed {
                session_id: session_id.to_string(),
                axis,
            };
            let stats = column_stats(&values);
            let scaled = standardize_column(&values, &stats);
            columns[slot] = self.raw.push_column(name.clone(), provenance.clone(), values)?;
            self.standardized.push_column(name, provenance, scaled)?;
            self.stats.push(stats);
        }
        let timestamp_ms = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0);
        self.commits.push(CommitRecord {
            session_id: session_id.to_string(),
            timestamp_ms,
            annotation,
            columns,
        });
        Ok(self.commits.last().expect("just pushed"))
    }

    /// Starts a fresh session: random untouched layout, features and commits kept.
    pub fn new_session(&mut self, seed: u64) -> Result<()> {
        self.layout = random_layout(&self.items, seed)?;
        Ok(())
    }

    fn unused_name(&self, base: &str) -> String {
        let mut name = base.to_string();
        let mut n = 1;
        while self.raw.names().iter().any(|c| c == &name) {
            n += 1;
            name = format!("{base}_{n}");
        }
        name
    }

    pub(crate) fn restore(
        dataset_id: String,
        items: Vec<Item>,
        raw: FeatureMatrix,
        commits: Vec<CommitRecord>,
        layout: Option<Layout>,
        seed: u64,
    ) -> Result<Self> {
        let mut ws = Self::new(dataset_id, items, raw, seed)?;
        if let Some(layout) = layout {
            let matches = layout.len() == ws.len()
                && layout.items().iter().zip(&ws.items).all(|(p, it)| p.id == it.id);
            if !matches {
                return Err(Error::Domain("saved layout does not match manifest".into()));
            }
            ws.layout = layout;
        }
        ws.commits = commits;
        Ok(ws)
    }
}
