use serde::{Deserialize, Serialize};

use crate::mi::SampleBlock;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemPosition {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub touched: bool,
}

/// Canvas positions for every item, in manifest order. Coordinates live in `[0, 1]^2`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Layout {
    items: Vec<ItemPosition>,
}

impl Layout {
    pub fn new(items: Vec<ItemPosition>) -> Result<Self> {
        for it in &items {
            if !it.x.is_finite() || !it.y.is_finite() {
                return Err(Error::InvalidCoordinate {
                    id: it.id.clone(),
                    x: it.x,
                    y: it.y,
                });
            }
        }
        let items = items
            .into_iter()
            .map(|it| ItemPosition {
                x: clamp_unit(it.x),
                y: clamp_unit(it.y),
                ..it
            })
            .collect();
        Ok(Self { items })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[ItemPosition] {
        &self.items
    }

    pub fn get(&self, row: usize) -> &ItemPosition {
        &self.items[row]
    }

    pub fn position(&self, row: usize) -> [f64; 2] {
        [self.items[row].x, self.items[row].y]
    }

    /// Row indices of touched items, ascending.
    pub fn touched_rows(&self) -> Vec<usize> {
        self.items
            .iter()
            .enumerate()
            .filter_map(|(i, it)| it.touched.then_some(i))
            .collect()
    }

    pub fn untouched_rows(&self) -> Vec<usize> {
        self.items
            .iter()
            .enumerate()
            .filter_map(|(i, it)| (!it.touched).then_some(i))
            .collect()
    }

    pub fn touched_count(&self) -> usize {
        self.items.iter().filter(|it| it.touched).count()
    }

    /// Positions of `rows` as a `len x 2` block.
    pub fn block(&self, rows: &[usize]) -> Result<SampleBlock> {
        let values = rows
            .iter()
            .flat_map(|&r| [self.items[r].x, self.items[r].y])
            .collect();
        SampleBlock::new(rows.len(), 2, values)
    }

    /// Moves `row` to `(x, y)` after clamping, leaving its touched flag alone.
    pub fn set_position(&mut self, row: usize, x: f64, y: f64) {
        let it = &mut self.items[row];
        it.x = clamp_unit(x);
        it.y = clamp_unit(y);
    }

    pub fn mark_touched(&mut self, row: usize) {
        self.items[row].touched = true;
    }

    pub fn set_touched(&mut self, row: usize, touched: bool) {
        self.items[row].touched = touched;
    }
}

pub(crate) fn clamp_unit(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}
