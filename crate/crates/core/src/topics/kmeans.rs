//! Seeded k-means: k-means++ initialization followed by Lloyd iterations.
//!
//! Everything is reproducible bit-for-bit for a given `(data, k, params)`:
//! the RNG is ChaCha8 seeded from `params.seed`, sums run in row order and
//! every tie resolves to the lowest index.

use nalgebra::DMatrix;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::TopicError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansParams {
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
    /// Independent k-means++ restarts; the lowest final inertia wins
    /// (earliest restart on ties).
    pub n_init: usize,
}

impl Default for KMeansParams {
    fn default() -> Self {
        KMeansParams {
            seed: 0,
            max_iter: 300,
            tol: 1e-6,
            n_init: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    /// k rows of length d.
    pub centroids: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub inertia: f64,
    /// Inertia after the initial assignment and after every accepted Lloyd step.
    pub trace: Vec<f64>,
    pub iterations: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid per point (ties to the lowest index) and the summed
/// squared distance.
pub fn assign(points: &[Vec<f64>], centroids: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let mut inertia = 0.0;
    let labels = points
        .iter()
        .map(|p| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (c, centroid) in centroids.iter().enumerate() {
                let d = sq_dist(p, centroid);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            inertia += best_d;
            best
        })
        .collect();
    (labels, inertia)
}

/// D²-weighted draw; zero-weight points are never picked unless all are zero.
fn d2_sample(dist: &[f64], total: f64, rng: &mut ChaCha8Rng) -> usize {
    if total <= 0.0 {
        return rng.random_range(0..dist.len());
    }
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, &d) in dist.iter().enumerate() {
        acc += d;
        if d > 0.0 && acc > target {
            return i;
        }
    }
    // rounding can leave `acc` just short of `target`
    dist.iter().rposition(|&d| d > 0.0).unwrap()
}

/// Greedy k-means++: each step draws `2 + ln k` D²-weighted candidates and
/// keeps the one that lowers the potential most (first candidate on ties).
fn plus_plus_init(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let trials = 2 + (k as f64).ln() as usize;
    let mut centroids = Vec::with_capacity(k);
    centroids.push(points[rng.random_range(0..n)].clone());
    let mut dist: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = dist.iter().sum();
        let mut best: Option<(f64, usize, Vec<f64>)> = None;
        for _ in 0..trials {
            let c = d2_sample(&dist, total, rng);
            let next: Vec<f64> = dist
                .iter()
                .zip(points)
                .map(|(&d, p)| d.min(sq_dist(p, &points[c])))
                .collect();
            let potential: f64 = next.iter().sum();
            if best.as_ref().is_none_or(|b| potential < b.0) {
                best = Some((potential, c, next));
            }
        }
        let (_, c, next) = best.expect("at least one trial");
        centroids.push(points[c].clone());
        dist = next;
    }
    centroids
}

fn update_centroids(
    points: &[Vec<f64>],
    labels: &[usize],
    old: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    let k = old.len();
    let d = old[0].len();
    let mut sums = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    for (p, &l) in points.iter().zip(labels) {
        counts[l] += 1;
        for (s, x) in sums[l].iter_mut().zip(p) {
            *s += x;
        }
    }
    let mut taken = vec![false; points.len()];
    for c in 0..k {
        if counts[c] > 0 {
            let n = counts[c] as f64;
            sums[c].iter_mut().for_each(|s| *s /= n);
        } else {
            // empty cluster: move it onto the point farthest from its centroid
            let mut far = None;
            let mut far_d = -1.0;
            for (i, (p, &l)) in points.iter().zip(labels).enumerate() {
                if taken[i] {
                    continue;
                }
                let dd = sq_dist(p, &old[l]);
                if dd > far_d {
                    far_d = dd;
                    far = Some(i);
                }
            }
            match far {
                Some(i) => {
                    taken[i] = true;
                    sums[c] = points[i].clone();
                }
                None => sums[c] = old[c].clone(),
            }
        }
    }
    sums
}

fn lloyd(points: &[Vec<f64>], mut centroids: Vec<Vec<f64>>, params: &KMeansParams) -> KMeansResult {
    let (mut labels, mut inertia) = assign(points, &centroids);
    let mut trace = vec![inertia];
    let mut iterations = 0;
    for _ in 0..params.max_iter {
        let next = update_centroids(points, &labels, &centroids);
        let shift = centroids
            .iter()
            .zip(&next)
            .map(|(a, b)| sq_dist(a, b).sqrt())
            .fold(0.0, f64::max);
        let (next_labels, next_inertia) = assign(points, &next);
        // Lloyd steps never raise inertia in exact arithmetic; a rise here is
        // rounding at convergence, so keep the previous state.
        if next_inertia > inertia {
            break;
        }
        iterations += 1;
        centroids = next;
        labels = next_labels;
        inertia = next_inertia;
        trace.push(inertia);
        if shift < params.tol {
            break;
        }
    }
    KMeansResult {
        centroids,
        labels,
        inertia,
        trace,
        iterations,
    }
}

/// Clusters the rows of `data` into `k` groups.
pub fn kmeans_fit(data: &DMatrix<f64>, k: usize, params: &KMeansParams) -> Result<KMeansResult, TopicError> {
    let n = data.nrows();
    if k == 0 || k > n {
        return Err(TopicError::BadK { k, n });
    }
    let points: Vec<Vec<f64>> = data
        .row_iter()
        .map(|r| r.iter().copied().collect())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best: Option<KMeansResult> = None;
    for _ in 0..params.n_init.max(1) {
        let init = plus_plus_init(&points, k, &mut rng);
        let run = lloyd(&points, init, params);
        log::trace!("k-means restart: inertia {} after {} iterations", run.inertia, run.iterations);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}
