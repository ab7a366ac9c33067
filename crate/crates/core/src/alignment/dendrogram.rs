//! Average-linkage clustering of subjects for heatmap ordering.
//!
//! The directed matrix is symmetrized into `d(A,B) = 1 - (cell(A,B) + cell(B,A)) / 200`.
//! Among equally close pairs the lexicographically smallest (by each
//! cluster's first leaf label) merges first.

use serde::Serialize;

use super::{AlignError, AlignmentMatrix};

/// One agglomeration step. Ids `0..n` are leaves in label order; merge `i`
/// creates cluster `n + i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dendrogram {
    pub labels: Vec<String>,
    pub merges: Vec<Merge>,
    pub leaf_order: Vec<String>,
}

pub fn subject_distance(m: &AlignmentMatrix, a: usize, b: usize) -> f64 {
    let v = |r: usize, c: usize| m.cells[r][c].map_or(0.0, |p| p.value());
    1.0 - (v(a, b) + v(b, a)) / 200.0
}

pub fn hclust_subjects(matrix: &AlignmentMatrix) -> Result<Dendrogram, AlignError> {
    let n = matrix.row_labels.len();
    if n < 2 {
        return Err(AlignError::TooFewSubjects(n));
    }
    // leaves sorted by label; `perm[leaf]` is the matrix index
    let mut perm: Vec<usize> = (0..n).collect();
    perm.sort_by(|&a, &b| matrix.row_labels[a].cmp(&matrix.row_labels[b]));
    let labels: Vec<String> = perm.iter().map(|&i| matrix.row_labels[i].clone()).collect();

    // active clusters: (id, first leaf, size); distances between active slots
    let mut active: Vec<(usize, usize, usize)> = (0..n).map(|i| (i, i, 1)).collect();
    let mut dist: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| subject_distance(matrix, perm[i], perm[j])).collect())
        .collect();
    let mut merges = Vec::with_capacity(n - 1);
    let mut last_height = f64::NEG_INFINITY;

    while active.len() > 1 {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for a in 0..active.len() {
            for b in a + 1..active.len() {
                let (ka, kb) = (active[a].1.min(active[b].1), active[a].1.max(active[b].1));
                let cand = (dist[a][b], ka, kb, a, b);
                let better = match best {
                    None => true,
                    Some((d, x, y, _, _)) => cand.0 < d || (cand.0 == d && (ka, kb) < (x, y)),
                };
                if better {
                    best = Some(cand);
                }
            }
        }
        let (d, _, _, a, b) = best.expect("two active clusters");
        // left is the cluster whose first leaf sorts first
        let (l, r) = if active[a].1 <= active[b].1 { (a, b) } else { (b, a) };
        let (na, nb) = (active[a].2 as f64, active[b].2 as f64);
        // average linkage is monotone; clamp away rounding in the updates
        let height = d.max(last_height);
        last_height = height;
        let size = active[a].2 + active[b].2;
        merges.push(Merge {
            left: active[l].0,
            right: active[r].0,
            height,
            size,
        });

        let merged: Vec<f64> = (0..active.len())
            .map(|k| (na * dist[a][k] + nb * dist[b][k]) / (na + nb))
            .collect();
        let first = active[a].1.min(active[b].1);
        // slot `a` (a < b) becomes the new cluster, slot `b` is removed
        active[a] = (n + merges.len() - 1, first, size);
        for k in 0..active.len() {
            dist[a][k] = merged[k];
            dist[k][a] = merged[k];
        }
        dist[a][a] = 0.0;
        active.remove(b);
        dist.remove(b);
        for row in &mut dist {
            row.remove(b);
        }
    }

    let leaf_order = leaf_order(n, &merges)
        .into_iter()
        .map(|leaf| labels[leaf].clone())
        .collect();
    Ok(Dendrogram {
        labels,
        merges,
        leaf_order,
    })
}

/// Depth-first leaves, smaller subtree first (left first on equal size).
fn leaf_order(n: usize, merges: &[Merge]) -> Vec<usize> {
    let size = |id: usize| if id < n { 1 } else { merges[id - n].size };
    let mut out = Vec::with_capacity(n);
    let mut stack = vec![n + merges.len() - 1];
    while let Some(id) = stack.pop() {
        if id < n {
            out.push(id);
            continue;
        }
        let m = &merges[id - n];
        let (first, second) = if size(m.right) < size(m.left) {
            (m.right, m.left)
        } else {
            (m.left, m.right)
        };
        stack.push(second);
        stack.push(first);
    }
    out
}
