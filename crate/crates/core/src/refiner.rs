//! Trust-region refinement of touched positions toward higher MI with the
//! reduced feature block.
//!
//! Each sweep visits touched items in ascending id order and runs a 2-D
//! Nelder–Mead on that item's position with everything else held fixed. A move
//! is kept only when it strictly raises the objective, so the current layout is
//! always the best configuration evaluated so far.

use serde::{Deserialize, Serialize};

use crate::config::EngineConfig;
use crate::features::FeatureMatrix;
use crate::layout::Layout;
use crate::mi::SampleBlock;
use crate::simplex::NelderMead;
use crate::{Error, Result};

/// Edge length of each item's starting simplex.
pub const SIMPLEX_STEP: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefineResult {
    pub refined: Layout,
    pub mi_before: f64,
    pub mi_after: f64,
    pub evaluations: usize,
}

fn check(reduced: &FeatureMatrix, layout: &Layout, config: &EngineConfig) -> Result<Vec<usize>> {
    if reduced.rows() != layout.len() {
        return Err(Error::DimensionMismatch {
            expected: reduced.rows(),
            got: layout.len(),
        });
    }
    let touched = layout.touched_rows();
    if touched.len() < config.min_touched() {
        return Err(Error::TooFewTouched {
            need: config.min_touched(),
            got: touched.len(),
        });
    }
    if reduced.cols() == 0 {
        return Err(Error::NoFeatures);
    }
    Ok(touched)
}

/// MI between the reduced features and the positions, over touched rows only.
pub fn objective(reduced: &FeatureMatrix, layout: &Layout, config: &EngineConfig) -> Result<f64> {
    let touched = check(reduced, layout, config)?;
    let xs = reduced.block(&touched)?;
    let ys = layout.block(&touched)?;
    Ok(config.estimator().estimate(&xs, &ys)?.nats)
}

pub fn refine_positions(
    reduced: &FeatureMatrix,
    layout: &Layout,
    config: &EngineConfig,
) -> Result<RefineResult> {
    config.validate()?;
    let touched = check(reduced, layout, config)?;
    let plan = config.estimator().fix_block(&reduced.block(&touched)?)?;

    let start: Vec<[f64; 2]> = touched.iter().map(|&r| layout.position(r)).collect();
    let mut current = start.clone();
    let score = |pos: &[[f64; 2]]| -> f64 {
        let values = pos.iter().flat_map(|p| [p[0], p[1]]).collect();
        let block = SampleBlock::new(pos.len(), 2, values).expect("positions are finite");
        plan.estimate(&block).expect("validated sizes").nats
    };

    let mut best = score(&current);
    let mi_before = best;
    let mut evaluations = 1;

    let mut order: Vec<usize> = (0..touched.len()).collect();
    order.sort_by(|&a, &b| layout.get(touched[a]).id.cmp(&layout.get(touched[b]).id));

    let nm = NelderMead {
        max_evals: config.per_item_evals,
        initial_step: SIMPLEX_STEP,
        ..Default::default()
    };
    for _ in 0..config.sweeps {
        for &t in &order {
            let lower = [
                (start[t][0] - config.delta).max(0.0),
                (start[t][1] - config.delta).max(0.0),
            ];
            let upper = [
                (start[t][0] + config.delta).min(1.0),
                (start[t][1] + config.delta).min(1.0),
            ];
            let mut trial = current.clone();
            let m = nm.minimize(
                |p| {
                    trial[t] = [p[0], p[1]];
                    -score(&trial)
                },
                &current[t],
                Some(-best),
                &lower,
                &upper,
            );
            evaluations += m.evals;
            if -m.value > best {
                best = -m.value;
                current[t] = [m.x[0], m.x[1]];
            }
        }
    }

    let mut refined = layout.clone();
    for (&row, p) in touched.iter().zip(&current) {
        refined.set_position(row, p[0], p[1]);
    }
    Ok(RefineResult {
        refined,
        mi_before,
        mi_after: best,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::ItemPosition;

    fn setup() -> (FeatureMatrix, Layout) {
        let n = 12;
        let f0: Vec<f64> = (0..n).map(|i| (i % 3) as f64).collect();
        let f1: Vec<f64> = (0..n).map(|i| ((i * 7) % 5) as f64 * 0.3).collect();
        let m = FeatureMatrix::innate(n, vec!["a".into(), "b".into()], vec![f0, f1]).unwrap();
        let items = (0..n)
            .map(|i| ItemPosition {
                id: format!("img_{i:03}"),
                x: 0.1 + 0.07 * i as f64,
                y: 0.9 - 0.05 * ((i * 5) % 7) as f64,
                touched: i < 9,
            })
            .collect();
        (m, Layout::new(items).unwrap())
    }

    #[test]
    fn improves_within_trust_region() {
        let (m, layout) = setup();
        let cfg = EngineConfig::default();
        let r = refine_positions(&m, &layout, &cfg).unwrap();
        assert!(r.mi_after >= r.mi_before);
        for (a, b) in layout.items().iter().zip(r.refined.items()) {
            let d = (a.x - b.x).abs().max((a.y - b.y).abs());
            assert!(d <= cfg.delta + 1e-12);
            if !a.touched {
                assert_eq!(a, b);
            }
        }
        assert_eq!(objective(&m, &layout, &cfg).unwrap(), r.mi_before);
        assert_eq!(objective(&m, &r.refined, &cfg).unwrap(), r.mi_after);
    }

    #[test]
    fn error_paths() {
        let (m, layout) = setup();
        let mut few = layout.clone();
        for i in 4..12 {
            few = Layout::new(
                few.items()
                    .iter()
                    .enumerate()
                    .map(|(j, it)| ItemPosition {
                        touched: it.touched && j != i,
                        ..it.clone()
                    })
                    .collect(),
            )
            .unwrap();
        }
        assert!(matches!(
            refine_positions(&m, &few, &EngineConfig::default()),
            Err(Error::TooFewTouched { need: 5, got: 4 })
        ));
        let empty = m.select_columns(&[]);
        assert!(matches!(
            refine_positions(&empty, &layout, &EngineConfig::default()),
            Err(Error::NoFeatures)
        ));
    }
}
