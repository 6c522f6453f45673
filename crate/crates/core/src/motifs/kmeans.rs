//! Lloyd's k-means with k-means++ seeding, and elbow selection of k.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::MotifError;

const MAX_ITER: usize = 300;
const TOLERANCE: f64 = 1e-6;
/// Independent seeded restarts per k; the lowest-inertia run is kept.
const RESTARTS: u64 = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansFit {
    pub k: usize,
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    pub inertia: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub chosen_k: usize,
    pub fit: KMeansFit,
    /// `(k, inertia)` for every k in the requested range.
    pub inertia_curve: Vec<(usize, f64)>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = sq_dist(point, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn seed_centroids(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut chosen = vec![rng.random_range(0..points.len())];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &points[chosen[0]])).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = points.len() - 1;
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 {
                    if target < d {
                        pick = i;
                        break;
                    }
                    target -= d;
                }
            }
            if d2[pick] == 0.0 {
                // rounding left the target past the end; take the last positive mass
                pick = d2.iter().rposition(|&d| d > 0.0).unwrap_or(pick);
            }
            pick
        } else {
            // every point coincides with a chosen centroid
            (0..points.len())
                .find(|i| !chosen.contains(i))
                .unwrap_or(0)
        };
        chosen.push(next);
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, &points[next]));
        }
    }
    chosen.into_iter().map(|i| points[i].clone()).collect()
}

fn lloyd(points: &[Vec<f64>], mut centroids: Vec<Vec<f64>>) -> KMeansFit {
    let k = centroids.len();
    let dim = points[0].len();
    let mut assignments = vec![0; points.len()];
    let mut iterations = 0;
    loop {
        iterations += 1;
        for (a, p) in assignments.iter_mut().zip(points) {
            *a = nearest(p, &centroids).0;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (&a, p) in assignments.iter().zip(points) {
            counts[a] += 1;
            for (s, x) in sums[a].iter_mut().zip(p) {
                *s += x;
            }
        }
        let mut shift: f64 = 0.0;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            let mean: Vec<f64> = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            shift = shift.max(sq_dist(&mean, &centroids[c]).sqrt());
            centroids[c] = mean;
        }
        if shift <= TOLERANCE || iterations >= MAX_ITER {
            break;
        }
    }
    for (a, p) in assignments.iter_mut().zip(points) {
        *a = nearest(p, &centroids).0;
    }
    let inertia = assignments
        .iter()
        .zip(points)
        .map(|(&a, p)| sq_dist(p, &centroids[a]))
        .sum();
    KMeansFit {
        k,
        centroids,
        assignments,
        inertia,
        iterations,
    }
}

/// Best of several seeded k-means++ restarts for a fixed `k`.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> KMeansFit {
    assert!(k >= 1 && k <= points.len());
    let mut best: Option<KMeansFit> = None;
    for restart in 0..RESTARTS {
        let mut rng = ChaCha8Rng::seed_from_u64(
            seed ^ (k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ restart.wrapping_mul(0xd6e8_feb8_6659_fd93),
        );
        let fit = lloyd(points, seed_centroids(points, k, &mut rng));
        if best.as_ref().is_none_or(|b| fit.inertia < b.inertia) {
            best = Some(fit);
        }
    }
    best.expect("at least one restart")
}

/// Index of the curve point farthest from the chord joining its endpoints;
/// ties go to the smaller k.
pub fn elbow(curve: &[(usize, f64)]) -> usize {
    let (first, last) = (curve[0], curve[curve.len() - 1]);
    let (dx, dy) = (last.0 as f64 - first.0 as f64, last.1 - first.1);
    let norm = (dx * dx + dy * dy).sqrt();
    if norm == 0.0 {
        return first.0;
    }
    let mut best = (first.0, f64::NEG_INFINITY);
    for &(k, inertia) in curve {
        let cross = (dx * (inertia - first.1) - dy * (k as f64 - first.0 as f64)).abs() / norm;
        if cross > best.1 {
            best = (k, cross);
        }
    }
    best.0
}

pub fn cluster_screens(
    embeddings: &[Vec<f64>],
    k_range: (usize, usize),
    seed: u64,
) -> Result<Clustering, MotifError> {
    let (kmin, kmax) = k_range;
    if kmin < 1 || kmin > kmax {
        return Err(MotifError::InvalidInput(format!(
            "k range ({kmin}, {kmax}) must satisfy 1 <= kmin <= kmax"
        )));
    }
    if kmax > embeddings.len() {
        return Err(MotifError::InvalidInput(format!(
            "kmax {kmax} exceeds point count {}",
            embeddings.len()
        )));
    }
    let dim = embeddings[0].len();
    if embeddings.iter().any(|e| e.len() != dim) {
        return Err(MotifError::InvalidInput("mixed embedding dimensions".into()));
    }
    let mut distinct: Vec<&Vec<f64>> = Vec::new();
    for e in embeddings {
        if !distinct.contains(&e) {
            distinct.push(e);
            if distinct.len() >= kmin {
                break;
            }
        }
    }
    if distinct.len() < kmin {
        return Err(MotifError::DegenerateInput {
            distinct: distinct.len(),
            kmin,
        });
    }
    let fits: Vec<KMeansFit> = (kmin..=kmax).map(|k| kmeans(embeddings, k, seed)).collect();
    let curve: Vec<(usize, f64)> = fits.iter().map(|f| (f.k, f.inertia)).collect();
    let chosen_k = elbow(&curve);
    let fit = fits
        .into_iter()
        .find(|f| f.k == chosen_k)
        .expect("chosen k comes from the curve");
    Ok(Clustering {
        chosen_k,
        fit,
        inertia_curve: curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triples() -> Vec<Vec<f64>> {
        vec![
            vec![0.0, 0.0],
            vec![0.5, 0.1],
            vec![0.1, 0.6],
            vec![10.0, 10.0],
            vec![10.4, 9.8],
            vec![9.7, 10.3],
            vec![-10.0, 8.0],
            vec![-9.6, 8.5],
            vec![-10.2, 7.7],
        ]
    }

    /// Exhaustive minimum-inertia partition into `k` non-empty groups.
    fn brute_force_partition(points: &[Vec<f64>], k: usize) -> (Vec<usize>, f64) {
        let n = points.len();
        let mut best = (vec![], f64::INFINITY);
        let total = k.pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let labels: Vec<usize> = (0..n)
                .map(|_| {
                    let l = c % k;
                    c /= k;
                    l
                })
                .collect();
            if (0..k).any(|g| !labels.contains(&g)) {
                continue;
            }
            let mut inertia = 0.0;
            for g in 0..k {
                let members: Vec<&Vec<f64>> =
                    points.iter().zip(&labels).filter(|(_, &l)| l == g).map(|(p, _)| p).collect();
                let dim = members[0].len();
                let mean: Vec<f64> = (0..dim)
                    .map(|d| members.iter().map(|m| m[d]).sum::<f64>() / members.len() as f64)
                    .collect();
                inertia += members.iter().map(|m| sq_dist(m, &mean)).sum::<f64>();
            }
            if inertia < best.1 {
                best = (labels, inertia);
            }
        }
        best
    }

    fn same_partition(a: &[usize], b: &[usize]) -> bool {
        (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
    }

    #[test]
    fn separated_triples_choose_three() {
        let pts = triples();
        let c = cluster_screens(&pts, (1, 6), 7).unwrap();
        assert_eq!(c.chosen_k, 3);
        let (oracle, oracle_inertia) = brute_force_partition(&pts, 3);
        assert!(same_partition(&c.fit.assignments, &oracle));
        assert!((c.fit.inertia - oracle_inertia).abs() < 1e-9);
        assert!(same_partition(&c.fit.assignments, &[0, 0, 0, 1, 1, 1, 2, 2, 2]));
    }

    #[test]
    fn identical_points() {
        let pts = vec![vec![1.0, 2.0]; 5];
        let c = cluster_screens(&pts, (1, 4), 3).unwrap();
        assert_eq!(c.chosen_k, 1);
        assert_eq!(c.fit.inertia, 0.0);
        assert!(matches!(
            cluster_screens(&pts, (2, 4), 3),
            Err(MotifError::DegenerateInput { distinct: 1, kmin: 2 })
        ));
    }

    #[test]
    fn deterministic_for_seed() {
        let pts: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![(i * 37 % 11) as f64, (i * 13 % 7) as f64, (i % 5) as f64])
            .collect();
        assert_eq!(
            cluster_screens(&pts, (2, 8), 99).unwrap(),
            cluster_screens(&pts, (2, 8), 99).unwrap()
        );
    }

    #[test]
    fn range_validation() {
        let pts = triples();
        assert!(matches!(cluster_screens(&pts, (0, 3), 1), Err(MotifError::InvalidInput(_))));
        assert!(matches!(cluster_screens(&pts, (4, 3), 1), Err(MotifError::InvalidInput(_))));
        assert!(matches!(cluster_screens(&pts, (1, 10), 1), Err(MotifError::InvalidInput(_))));
        let mixed = vec![vec![0.0], vec![1.0, 2.0]];
        assert!(matches!(cluster_screens(&mixed, (1, 2), 1), Err(MotifError::InvalidInput(_))));
    }

    #[test]
    fn elbow_is_scale_invariant() {
        let curve = vec![(1, 100.0), (2, 40.0), (3, 5.0), (4, 4.0), (5, 3.5)];
        let scaled: Vec<(usize, f64)> = curve.iter().map(|&(k, i)| (k, i * 1000.0)).collect();
        assert_eq!(elbow(&curve), 3);
        assert_eq!(elbow(&scaled), 3);
    }
}
