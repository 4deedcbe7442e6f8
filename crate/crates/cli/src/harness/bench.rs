use std::time::Instant;

use activecanvas_core::{EngineConfig, Move, Workspace};
use serde::{Deserialize, Serialize};

use super::HarnessError;

pub const BENCH_TOUCHED: [usize; 3] = [8, 20, 50];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub touched: usize,
    pub reps: usize,
    pub p50_ms: f64,
    pub p95_ms: f64,
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Wall-clock of `run_refinement` at each touched count, on fresh copies of `base`.
pub fn bench(
    base: &Workspace,
    config: &EngineConfig,
    reps: usize,
    touched_counts: &[usize],
) -> Result<Vec<BenchRow>, HarnessError> {
    if base.is_empty() {
        return Err(HarnessError::EmptyDataset);
    }
    let reps = reps.max(1);
    let mut rows = Vec::with_capacity(touched_counts.len());
    for &t in touched_counts {
        let t = t.min(base.len());
        let mut times = Vec::with_capacity(reps);
        for rep in 0..reps {
            let mut ws = base.clone();
            // deterministic spread of touched items on a coarse grid
            let moves: Vec<Move> = (0..t)
                .map(|i| {
                    let row = (i * 7919 + rep) % base.len();
                    Move {
                        id: base.items()[row].id.clone(),
                        x: ((i * 37) % 101) as f64 / 100.0,
                        y: ((i * 61) % 103) as f64 / 102.0,
                    }
                })
                .collect();
            ws.apply_layout(&moves)?;
            let started = Instant::now();
            ws.run_refinement(config)?;
            times.push(started.elapsed().as_secs_f64() * 1e3);
        }
        times.sort_by(f64::total_cmp);
        rows.push(BenchRow {
            touched: t,
            reps,
            p50_ms: percentile(&times, 0.5),
            p95_ms: percentile(&times, 0.95),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank_percentiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(percentile(&v, 0.5), 2.0);
        assert_eq!(percentile(&v, 0.95), 4.0);
        assert_eq!(percentile(&[7.0], 0.95), 7.0);
    }
}
