//! Clustering quality: seeded k-means on 2-D positions and the adjusted Rand index.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Lloyd's k-means with k-means++ seeding; returns the labelling with the lowest
/// inertia over `restarts` runs.
pub fn kmeans(points: &[[f64; 2]], k: usize, restarts: usize, seed: u64) -> Vec<usize> {
    assert!(k >= 1);
    if points.len() <= k {
        return (0..points.len()).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..restarts.max(1) {
        let mut centres = vec![points[rng.random_range(0..points.len())]];
        while centres.len() < k {
            let d: Vec<f64> = points
                .iter()
                .map(|&p| centres.iter().map(|&c| dist2(p, c)).fold(f64::INFINITY, f64::min))
                .collect();
            let total: f64 = d.iter().sum();
            let next = if total > 0.0 {
                let mut r = rng.random_range(0.0..total);
                d.iter()
                    .position(|&w| {
                        r -= w;
                        r < 0.0
                    })
                    .unwrap_or(points.len() - 1)
            } else {
                rng.random_range(0..points.len())
            };
            centres.push(points[next]);
        }

        let mut assign = vec![0usize; points.len()];
        for _ in 0..300 {
            let mut changed = false;
            for (i, &p) in points.iter().enumerate() {
                let c = (0..k)
                    .min_by(|&a, &b| dist2(p, centres[a]).total_cmp(&dist2(p, centres[b])))
                    .unwrap();
                if assign[i] != c {
                    assign[i] = c;
                    changed = true;
                }
            }
            for (c, centre) in centres.iter_mut().enumerate() {
                let members: Vec<[f64; 2]> =
                    points.iter().zip(&assign).filter(|(_, &a)| a == c).map(|(p, _)| *p).collect();
                if !members.is_empty() {
                    let n = members.len() as f64;
                    *centre = [
                        members.iter().map(|p| p[0]).sum::<f64>() / n,
                        members.iter().map(|p| p[1]).sum::<f64>() / n,
                    ];
                }
            }
            if !changed {
                break;
            }
        }
        let inertia: f64 = points.iter().zip(&assign).map(|(&p, &a)| dist2(p, centres[a])).sum();
        if best.as_ref().is_none_or(|(b, _)| inertia < *b) {
            best = Some((inertia, assign));
        }
    }
    best.expect("at least one restart").1
}

fn choose2(n: u64) -> f64 {
    (n * n.saturating_sub(1)) as f64 / 2.0
}

/// Adjusted Rand index between two labellings of the same items.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as u64;
    if n < 2 {
        return 1.0;
    }
    let ka = a.iter().max().map_or(0, |m| m + 1);
    let kb = b.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![vec![0u64; kb]; ka];
    for (&x, &y) in a.iter().zip(b) {
        table[x][y] += 1;
    }
    let index: f64 = table.iter().flatten().map(|&c| choose2(c)).sum();
    let rows: f64 = table.iter().map(|r| choose2(r.iter().sum())).sum();
    let cols: f64 = (0..kb).map(|j| choose2(table.iter().map(|r| r[j]).sum())).sum();
    let expected = rows * cols / choose2(n);
    let max = 0.5 * (rows + cols);
    if (max - expected).abs() < f64::EPSILON {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ari_identical_and_relabelled() {
        let a = [0, 0, 1, 1, 2, 2];
        assert_eq!(adjusted_rand_index(&a, &a), 1.0);
        assert!((adjusted_rand_index(&a, &[2, 2, 0, 0, 1, 1]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ari_known_value() {
        // sklearn.metrics.adjusted_rand_score([0,0,1,1],[0,0,1,2]) = 0.5714285714
        let v = adjusted_rand_index(&[0, 0, 1, 1], &[0, 0, 1, 2]);
        assert!((v - 4.0 / 7.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn ari_of_single_clusters() {
        assert_eq!(adjusted_rand_index(&[0, 0, 0], &[0, 0, 0]), 1.0);
    }

    #[test]
    fn kmeans_separates_blobs() {
        let mut pts = Vec::new();
        let mut truth = Vec::new();
        for (c, centre) in [[0.1, 0.1], [0.9, 0.1], [0.5, 0.9]].iter().enumerate() {
            for i in 0..20 {
                let t = i as f64 * 0.3;
                pts.push([centre[0] + 0.02 * t.sin(), centre[1] + 0.02 * t.cos()]);
                truth.push(c);
            }
        }
        let labels = kmeans(&pts, 3, 10, 1);
        assert_eq!(adjusted_rand_index(&truth, &labels), 1.0);
    }
}
