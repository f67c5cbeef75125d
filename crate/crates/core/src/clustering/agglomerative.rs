//! Bottom-up Ward-linkage clustering via the Lance-Williams update.
//!
//! Initial dissimilarities are squared Euclidean distances, so each merge
//! cost is twice the increase in total within-cluster sum of squares and
//! the merge sequence is monotone.

use crate::error::{Error, Result};

use super::kmeans::sq_dist;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    /// Node ids: leaves are `0..n`, the i-th merge creates node `n + i`.
    pub a: usize,
    pub b: usize,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgglomerativeModel {
    pub merges: Vec<Merge>,
    pub cut_k: usize,
    /// Flat clusters after cutting the tree at `cut_k`, labeled 0..cut_k
    /// in order of first member appearance.
    pub assignment: Vec<usize>,
}

pub fn agglomerative_fit(x: &[Vec<f64>], k: usize) -> Result<AgglomerativeModel> {
    let n = x.len();
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    if k > n {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds n = {n} points")));
    }

    // slot-indexed active clusters; dist[i][j] only read for i != j active
    let mut dist: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| sq_dist(&x[i], &x[j])).collect())
        .collect();
    let mut active: Vec<bool> = vec![true; n];
    let mut sizes: Vec<f64> = vec![1.0; n];
    let mut node_id: Vec<usize> = (0..n).collect();

    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for step in 0..n.saturating_sub(1) {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..n {
            if !active[i] {
                continue;
            }
            for j in (i + 1)..n {
                if !active[j] {
                    continue;
                }
                if best.map_or(true, |(_, _, d)| dist[i][j] < d) {
                    best = Some((i, j, dist[i][j]));
                }
            }
        }
        let (i, j, cost) = best.expect("at least two active clusters");
        debug_assert!(
            merges.last().map_or(true, |m: &Merge| cost >= m.cost - 1e-9),
            "Ward merge cost decreased"
        );
        merges.push(Merge {
            a: node_id[i],
            b: node_id[j],
            cost,
        });

        // Lance-Williams update for Ward linkage, merged cluster kept in slot i
        let (ni, nj) = (sizes[i], sizes[j]);
        for m in 0..n {
            if !active[m] || m == i || m == j {
                continue;
            }
            let nm = sizes[m];
            let updated = ((ni + nm) * dist[i][m] + (nj + nm) * dist[j][m] - nm * cost)
                / (ni + nj + nm);
            dist[i][m] = updated;
            dist[m][i] = updated;
        }
        active[j] = false;
        sizes[i] = ni + nj;
        node_id[i] = n + step;
    }

    Ok(AgglomerativeModel {
        assignment: cut_assignment(n, &merges, k),
        merges,
        cut_k: k,
    })
}

/// Flat clusters from the first `n - k` merges, via union-find over leaves.
fn cut_assignment(n: usize, merges: &[Merge], k: usize) -> Vec<usize> {
    let total_nodes = n + merges.len();
    let mut parent: Vec<usize> = (0..total_nodes).collect();
    fn find(parent: &mut Vec<usize>, mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    for (step, m) in merges.iter().take(n - k).enumerate() {
        let node = n + step;
        let ra = find(&mut parent, m.a);
        let rb = find(&mut parent, m.b);
        parent[ra] = node;
        parent[rb] = node;
    }
    let mut label_of_root = std::collections::HashMap::new();
    let mut assignment = Vec::with_capacity(n);
    for leaf in 0..n {
        let root = find(&mut parent, leaf);
        let next = label_of_root.len();
        let label = *label_of_root.entry(root).or_insert(next);
        assignment.push(label);
    }
    assignment
}
