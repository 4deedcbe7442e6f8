//! Headless stand-ins for people arranging items on the canvas.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// One pile per class, piles spaced evenly on a circle.
    ClassAnchors,
    /// Concentric rings, one radius per class.
    Bullseye,
    /// Classes ordered left to right; vertical position carries nothing.
    AxisGradient,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::ClassAnchors => "class-anchors",
            Strategy::Bullseye => "bullseye",
            Strategy::AxisGradient => "axis-gradient",
        })
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "class-anchors" => Ok(Strategy::ClassAnchors),
            "bullseye" => Ok(Strategy::Bullseye),
            "axis-gradient" => Ok(Strategy::AxisGradient),
            other => Err(format!(
                "unknown strategy `{other}` (expected class-anchors, bullseye, axis-gradient)"
            )),
        }
    }
}

const ANCHOR_RADIUS: f64 = 0.3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulatedUser {
    pub strategy: Strategy,
    /// Placement noise (stddev, canvas units) around the strategy target.
    pub sigma: f64,
    /// Cumulative touched counts at which a refinement is requested.
    pub schedule: Vec<usize>,
    pub seed: u64,
}

impl SimulatedUser {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err("sigma must be >= 0".into());
        }
        if self.schedule.is_empty() {
            return Err("schedule must not be empty".into());
        }
        if self.schedule.windows(2).any(|w| w[1] <= w[0]) || self.schedule[0] == 0 {
            return Err("schedule must be strictly increasing and positive".into());
        }
        Ok(())
    }

    /// Noise-free target for an item of class `class`.
    pub fn target(&self, class: usize, classes: usize, rng: &mut impl Rng) -> [f64; 2] {
        let frac = if classes > 1 {
            class as f64 / (classes - 1) as f64
        } else {
            0.5
        };
        match self.strategy {
            Strategy::ClassAnchors => {
                let angle = TAU * class as f64 / classes as f64;
                [0.5 + ANCHOR_RADIUS * angle.cos(), 0.5 + ANCHOR_RADIUS * angle.sin()]
            }
            Strategy::Bullseye => {
                let radius = 0.05 + 0.37 * frac;
                let angle = rng.random_range(0.0..TAU);
                [0.5 + radius * angle.cos(), 0.5 + radius * angle.sin()]
            }
            Strategy::AxisGradient => [0.1 + 0.8 * frac, rng.random_range(0.1..0.9)],
        }
    }

    /// Target plus Gaussian placement noise, clamped to the canvas.
    pub fn place(&self, class: usize, classes: usize, rng: &mut impl Rng) -> [f64; 2] {
        let [x, y] = self.target(class, classes, rng);
        let (dx, dy) = if self.sigma > 0.0 {
            let n = Normal::new(0.0, self.sigma).expect("sigma validated");
            (n.sample(rng), n.sample(rng))
        } else {
            (0.0, 0.0)
        };
        [(x + dx).clamp(0.0, 1.0), (y + dy).clamp(0.0, 1.0)]
    }

    /// Order in which items get touched: classes take turns, and items within
    /// a class come in random order.
    pub fn touch_order(&self, labels: &[usize]) -> Vec<usize> {
        let classes = labels.iter().max().map_or(0, |m| m + 1);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x5eed_0f70_u64);
        let mut per_class: Vec<Vec<usize>> = vec![Vec::new(); classes];
        for (i, &c) in labels.iter().enumerate() {
            per_class[c].push(i);
        }
        for members in &mut per_class {
            members.shuffle(&mut rng);
        }
        let mut order = Vec::with_capacity(labels.len());
        let longest = per_class.iter().map(Vec::len).max().unwrap_or(0);
        for round in 0..longest {
            for members in &per_class {
                if let Some(&i) = members.get(round) {
                    order.push(i);
                }
            }
        }
        order
    }
}
