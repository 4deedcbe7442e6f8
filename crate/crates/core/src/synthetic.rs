//! Class-structured synthetic datasets standing in for image features.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::features::FeatureMatrix;
use crate::workspace::{write_features_csv, write_manifest, Item, FEATURES_FILE, MANIFEST_FILE};
use crate::{Error, Result};

/// Spacing of adjacent class means on an informative column, in within-class stddevs.
pub const CLASS_SEPARATION: f64 = 4.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub classes: usize,
    pub items: usize,
    pub dims: usize,
    pub informative: usize,
    /// Within-class standard deviation.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            classes: 5,
            items: 250,
            dims: 500,
            informative: 20,
            noise: 1.0,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub items: Vec<Item>,
    pub labels: Vec<usize>,
    pub features: FeatureMatrix,
}

/// Gaussian classes on the first `informative` columns, pure noise elsewhere.
///
/// Each informative column places the class means on an evenly spaced grid
/// (`CLASS_SEPARATION * noise` apart) in a column-specific random order.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    if spec.classes < 2 {
        return Err(Error::InvalidConfig("classes must be >= 2".into()));
    }
    if spec.items == 0 || spec.dims == 0 {
        return Err(Error::InvalidConfig("items and dims must be >= 1".into()));
    }
    if spec.informative > spec.dims {
        return Err(Error::InvalidConfig("informative must not exceed dims".into()));
    }
    if !(spec.noise > 0.0 && spec.noise.is_finite()) {
        return Err(Error::InvalidConfig("noise must be > 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut labels: Vec<usize> = (0..spec.items).map(|i| i % spec.classes).collect();
    labels.shuffle(&mut rng);

    let unit = Normal::new(0.0, spec.noise).expect("positive stddev");
    let centre = (spec.classes - 1) as f64 / 2.0;
    let mut columns = Vec::with_capacity(spec.dims);
    for j in 0..spec.dims {
        let means: Vec<f64> = if j < spec.informative {
            let mut order: Vec<usize> = (0..spec.classes).collect();
            order.shuffle(&mut rng);
            order
                .iter()
                .map(|&slot| CLASS_SEPARATION * spec.noise * (slot as f64 - centre))
                .collect()
        } else {
            vec![0.0; spec.classes]
        };
        columns.push(
            labels
                .iter()
                .map(|&c| means[c] + unit.sample(&mut rng))
                .collect(),
        );
    }
    let width = ((spec.items.max(2) - 1) as f64).log10().floor() as usize + 1;
    let width = width.max(3);
    let items = (0..spec.items)
        .map(|i| {
            let id = format!("img_{i:0width$}");
            Item {
                thumb: format!("thumbs/{id}.svg"),
                id,
                label: Some(format!("class_{}", labels[i])),
            }
        })
        .collect();
    let names = (0..spec.dims).map(|j| format!("f{j:03}")).collect();
    Ok(Dataset {
        items,
        labels,
        features: FeatureMatrix::innate(spec.items, names, columns)?,
    })
}

impl Dataset {
    pub fn classes(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    /// Writes `manifest.json`, `features.csv`, and placeholder SVG tiles.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir.join("thumbs"))?;
        write_manifest(&dir.join(MANIFEST_FILE), &self.items)?;
        write_features_csv(&dir.join(FEATURES_FILE), &self.features)?;
        let classes = self.classes().max(1);
        for (item, &label) in self.items.iter().zip(&self.labels) {
            let hue = 360 * label / classes;
            let svg = format!(
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"64\" height=\"64\">\
                 <rect width=\"64\" height=\"64\" fill=\"hsl({hue},70%,55%)\"/>\
                 <text x=\"32\" y=\"38\" font-size=\"10\" text-anchor=\"middle\">{}</text></svg>\n",
                item.id
            );
            fs::write(dir.join(&item.thumb), svg)?;
        }
        Ok(())
    }
}
