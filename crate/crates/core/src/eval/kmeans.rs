use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Result of [`spherical_kmeans`]. Cluster ids are `0..k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClusterAssignment {
    pub assignment: Vec<usize>,
    /// Unit-norm centroids.
    pub centroids: Vec<Vec<f64>>,
    /// Sum of member-to-centroid cosines after each update step.
    pub objective_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl ClusterAssignment {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn objective(&self) -> f64 {
        self.objective_history.last().copied().unwrap_or(f64::NEG_INFINITY)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalized(v: &[f64]) -> Option<Vec<f64>> {
    let n = dot(v, v).sqrt();
    (n > 0.0 && n.is_finite()).then(|| v.iter().map(|x| x / n).collect())
}

/// k-means under cosine similarity with unit-normalized centroids.
///
/// Seeding is k-means++ with `1 - cos` as the distance. Iterates
/// assignment and update until no assignment changes or `max_iters` update
/// steps have run. A cluster left empty takes the point with the lowest
/// cosine to its own centroid among clusters with more than one member.
pub fn spherical_kmeans(vectors: &[Vec<f64>], k: usize, seed: u64, max_iters: usize) -> Result<ClusterAssignment> {
    let n = vectors.len();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("k = {k} must be in 1..={n}")));
    }
    let dim = vectors[0].len();
    let mut points = Vec::with_capacity(n);
    for (i, v) in vectors.iter().enumerate() {
        if v.len() != dim {
            return Err(Error::InvalidInput(format!("vector {i} has dimension {}, expected {dim}", v.len())));
        }
        points.push(normalized(v).ok_or(Error::ZeroVector)?);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_centroids(&points, k, &mut rng);
    let mut assignment = vec![usize::MAX; n];
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    loop {
        if !assign(&points, &centroids, &mut assignment) {
            converged = true;
            break;
        }
        if iterations == max_iters {
            break;
        }
        reseed_empty(&points, &centroids, &mut assignment, k);
        update(&points, &assignment, &mut centroids);
        history.push(objective(&points, &centroids, &assignment));
        iterations += 1;
    }
    if !converged {
        // Leave the assignment consistent with the reported centroids.
        reseed_empty(&points, &centroids, &mut assignment, k);
        update(&points, &assignment, &mut centroids);
        let last = objective(&points, &centroids, &assignment);
        if history.last() != Some(&last) {
            history.push(last);
        }
    }
    Ok(ClusterAssignment {
        assignment,
        centroids,
        objective_history: history,
        iterations,
        converged,
    })
}

fn seed_centroids(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centroids = vec![points[first].clone()];
    let mut dist: Vec<f64> = points.iter().map(|p| (1.0 - dot(p, &centroids[0])).max(0.0)).collect();
    while centroids.len() < k {
        let weights: Vec<f64> = dist
            .iter()
            .zip(&chosen)
            .map(|(&d, &c)| if c { 0.0 } else { d * d })
            .collect();
        let total: f64 = weights.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &w) in weights.iter().enumerate() {
                if w > 0.0 {
                    pick = Some(i);
                    if target < w {
                        break;
                    }
                    target -= w;
                }
            }
            pick.unwrap()
        } else {
            // Every remaining point coincides with a centroid.
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen[next] = true;
        let c = points[next].clone();
        for (d, p) in dist.iter_mut().zip(points) {
            *d = d.min((1.0 - dot(p, &c)).max(0.0));
        }
        centroids.push(c);
    }
    centroids
}

/// Moves every point to its most similar centroid, keeping the current one
/// on ties. Returns whether anything changed.
fn assign(points: &[Vec<f64>], centroids: &[Vec<f64>], assignment: &mut [usize]) -> bool {
    let mut changed = false;
    for (p, a) in points.iter().zip(assignment.iter_mut()) {
        let mut best = *a;
        let mut best_cos = if best < centroids.len() {
            dot(p, &centroids[best])
        } else {
            f64::NEG_INFINITY
        };
        for (j, c) in centroids.iter().enumerate() {
            let cos = dot(p, c);
            if cos > best_cos {
                best = j;
                best_cos = cos;
            }
        }
        if best != *a {
            *a = best;
            changed = true;
        }
    }
    changed
}

fn reseed_empty(points: &[Vec<f64>], centroids: &[Vec<f64>], assignment: &mut [usize], k: usize) {
    let mut sizes = vec![0usize; k];
    for &a in assignment.iter() {
        sizes[a] += 1;
    }
    for j in 0..k {
        if sizes[j] > 0 {
            continue;
        }
        let far = (0..points.len())
            .filter(|&i| sizes[assignment[i]] > 1)
            .min_by(|&x, &y| {
                dot(&points[x], &centroids[assignment[x]]).total_cmp(&dot(&points[y], &centroids[assignment[y]]))
            })
            .expect("k <= n leaves a cluster with two members");
        sizes[assignment[far]] -= 1;
        assignment[far] = j;
        sizes[j] = 1;
    }
}

fn update(points: &[Vec<f64>], assignment: &[usize], centroids: &mut [Vec<f64>]) {
    let dim = points[0].len();
    let mut sums = vec![vec![0.0; dim]; centroids.len()];
    for (p, &a) in points.iter().zip(assignment) {
        for (s, x) in sums[a].iter_mut().zip(p) {
            *s += x;
        }
    }
    for (j, sum) in sums.iter().enumerate() {
        if let Some(c) = normalized(sum) {
            centroids[j] = c;
        } else if let Some(i) = assignment.iter().position(|&a| a == j) {
            // Members cancel out exactly; any member direction is optimal.
            centroids[j] = points[i].clone();
        }
    }
}

fn objective(points: &[Vec<f64>], centroids: &[Vec<f64>], assignment: &[usize]) -> f64 {
    points.iter().zip(assignment).map(|(p, &a)| dot(p, &centroids[a])).sum()
}
