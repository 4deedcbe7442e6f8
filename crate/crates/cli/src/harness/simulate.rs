use std::collections::BTreeMap;
use std::time::Instant;

use activecanvas_core::{EngineConfig, Move, Workspace};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{adjusted_rand_index, kmeans};
use super::user::SimulatedUser;
use super::HarnessError;

const KMEANS_RESTARTS: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementRecord {
    pub touched: usize,
    pub mi_before: f64,
    pub mi_after: f64,
    pub ari: f64,
    pub engine_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub dataset: String,
    pub user: SimulatedUser,
    pub config: EngineConfig,
    pub seed: u64,
    pub records: Vec<RefinementRecord>,
    pub final_ari: f64,
}

/// Ground-truth class indices from manifest labels (sorted label order).
pub fn class_indices(ws: &Workspace) -> Result<Vec<usize>, HarnessError> {
    let mut names = BTreeMap::new();
    for item in ws.items() {
        let label = item.label.as_ref().ok_or_else(|| HarnessError::MissingLabel(item.id.clone()))?;
        names.entry(label.clone()).or_insert(0usize);
    }
    for (i, v) in names.values_mut().enumerate() {
        *v = i;
    }
    Ok(ws
        .items()
        .iter()
        .map(|it| names[it.label.as_ref().expect("checked above")])
        .collect())
}

/// ARI of k-means (k = class count) on the current layout against the labels.
pub fn layout_ari(ws: &Workspace, labels: &[usize], seed: u64) -> f64 {
    let classes = labels.iter().max().map_or(1, |m| m + 1);
    let points: Vec<[f64; 2]> = ws.layout().items().iter().map(|p| [p.x, p.y]).collect();
    let clusters = kmeans(&points, classes, KMEANS_RESTARTS, seed);
    adjusted_rand_index(labels, &clusters)
}

/// Plays the user's touch schedule against the workspace, refining after each step.
pub fn simulate(ws: &mut Workspace, user: &SimulatedUser, config: &EngineConfig) -> Result<RunReport, HarnessError> {
    user.validate().map_err(HarnessError::InvalidUser)?;
    let labels = class_indices(ws)?;
    let classes = labels.iter().max().map_or(1, |m| m + 1);
    let order = user.touch_order(&labels);
    let mut rng = ChaCha8Rng::seed_from_u64(user.seed);

    let mut records = Vec::with_capacity(user.schedule.len());
    let mut placed = 0;
    for &upto in &user.schedule {
        let upto = upto.min(order.len());
        let moves: Vec<Move> = order[placed..upto]
            .iter()
            .map(|&row| {
                let [x, y] = user.place(labels[row], classes, &mut rng);
                Move {
                    id: ws.items()[row].id.clone(),
                    x,
                    y,
                }
            })
            .collect();
        placed = upto;
        ws.apply_layout(&moves)?;
        let started = Instant::now();
        let report = ws.run_refinement(config)?;
        let engine_ms = started.elapsed().as_secs_f64() * 1e3;
        records.push(RefinementRecord {
            touched: report.touched,
            mi_before: report.mi_before,
            mi_after: report.mi_after,
            ari: layout_ari(ws, &labels, user.seed),
            engine_ms,
        });
    }
    let final_ari = records.last().map_or(0.0, |r| r.ari);
    Ok(RunReport {
        dataset: ws.dataset_id().to_string(),
        user: user.clone(),
        config: config.clone(),
        seed: user.seed,
        records,
        final_ari,
    })
}

/// A diligent session: every item placed at its class target, then committed.
pub fn diligent_commit(
    ws: &mut Workspace,
    user: &SimulatedUser,
    session_id: &str,
) -> Result<(), HarnessError> {
    let labels = class_indices(ws)?;
    let classes = labels.iter().max().map_or(1, |m| m + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(user.seed);
    let moves: Vec<Move> = ws
        .items()
        .iter()
        .zip(&labels)
        .map(|(it, &c)| {
            let [x, y] = user.place(c, classes, &mut rng);
            Move {
                id: it.id.clone(),
                x,
                y,
            }
        })
        .collect();
    ws.apply_layout(&moves)?;
    ws.commit(session_id, Some(format!("{} arrangement", user.strategy)))?;
    Ok(())
}
