//! Weighted Gini decision trees over sparse feature columns.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::FeatureVector;

/// Column-major view of a labeled sparse dataset. Absent entries are zero.
#[derive(Debug, Clone)]
pub struct SparseDataset {
    n_rows: usize,
    /// Per feature: (row, value) for nonzero values, sorted by value then row.
    columns: Vec<Vec<(u32, f64)>>,
    labels: Vec<f64>,
}

impl SparseDataset {
    /// `labels` are +1 (machine) or -1 (human).
    pub fn new(rows: &[FeatureVector], labels: Vec<f64>) -> Self {
        assert_eq!(rows.len(), labels.len());
        let n_features = rows
            .iter()
            .flat_map(|r| r.entries.last().map(|e| e.0 as usize + 1))
            .max()
            .unwrap_or(0);
        let mut columns: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n_features];
        for (i, r) in rows.iter().enumerate() {
            for &(f, v) in &r.entries {
                if v != 0.0 {
                    columns[f as usize].push((i as u32, v));
                }
            }
        }
        columns.par_iter_mut().for_each(|c| {
            c.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        });
        SparseDataset {
            n_rows: rows.len(),
            columns,
            labels,
        }
    }

    pub fn len(&self) -> usize {
        self.n_rows
    }

    pub fn is_empty(&self) -> bool {
        self.n_rows == 0
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// Value of `feature` for every row, dense.
    fn column_dense(&self, feature: u32) -> Vec<f64> {
        let mut out = vec![0.0; self.n_rows];
        for &(r, v) in &self.columns[feature as usize] {
            out[r as usize] = v;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Tree {
    Leaf(f64),
    Split {
        feature: u32,
        threshold: f64,
        /// Taken when the value is `<= threshold`.
        left: Box<Tree>,
        right: Box<Tree>,
    },
}

impl Tree {
    pub fn predict(&self, x: &FeatureVector) -> f64 {
        match self {
            Tree::Leaf(v) => *v,
            Tree::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if x.get(*feature) <= *threshold {
                    left.predict(x)
                } else {
                    right.predict(x)
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Tree::Leaf(_) => 0,
            Tree::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    fn predict_rows(&self, data: &SparseDataset) -> Vec<f64> {
        match self {
            Tree::Leaf(v) => vec![*v; data.n_rows],
            Tree::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                let col = data.column_dense(*feature);
                let l = left.predict_rows(data);
                let r = right.predict_rows(data);
                (0..data.n_rows)
                    .map(|i| if col[i] <= *threshold { l[i] } else { r[i] })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    impurity: f64,
    feature: u32,
    threshold: f64,
}

/// `W * gini` for a node holding positive weight `p` and negative weight `n`.
fn weighted_gini(p: f64, n: f64) -> f64 {
    let w = p + n;
    if w <= 0.0 {
        0.0
    } else {
        w - (p * p + n * n) / w
    }
}

fn better(a: f64, b: f64) -> bool {
    a < b - 1e-12 * b.abs().max(1e-300)
}

fn leaf_value(p: f64, n: f64) -> f64 {
    // ties go to the negative (human) class
    if p > n {
        1.0
    } else {
        -1.0
    }
}

/// Fits a tree of depth at most `max_depth` by exhaustive weighted-Gini
/// search. Splits with zero gain are still taken, so that XOR-like data can
/// be separated at the second level. Ties prefer the lowest feature index,
/// then the smaller threshold.
pub fn fit_tree(data: &SparseDataset, weights: &[f64], max_depth: usize) -> Tree {
    let members = vec![true; data.n_rows];
    grow(data, weights, &members, max_depth)
}

fn grow(data: &SparseDataset, weights: &[f64], members: &[bool], depth: usize) -> Tree {
    let (mut p, mut n, mut count) = (0.0, 0.0, 0usize);
    for i in 0..data.n_rows {
        if members[i] {
            count += 1;
            if data.labels[i] > 0.0 {
                p += weights[i];
            } else {
                n += weights[i];
            }
        }
    }
    if depth == 0 || count < 2 || p <= 0.0 || n <= 0.0 {
        return Tree::Leaf(leaf_value(p, n));
    }
    let best = (0..data.columns.len() as u32)
        .into_par_iter()
        .filter_map(|f| best_split_for(data, weights, members, f, p, n, count))
        .reduce_with(|a, b| {
            if better(b.impurity, a.impurity) || (!better(a.impurity, b.impurity) && b.feature < a.feature) {
                b
            } else {
                a
            }
        });
    let Some(c) = best else {
        return Tree::Leaf(leaf_value(p, n));
    };
    let col = data.column_dense(c.feature);
    let left_members: Vec<bool> = (0..data.n_rows)
        .map(|i| members[i] && col[i] <= c.threshold)
        .collect();
    let right_members: Vec<bool> = (0..data.n_rows)
        .map(|i| members[i] && col[i] > c.threshold)
        .collect();
    Tree::Split {
        feature: c.feature,
        threshold: c.threshold,
        left: Box::new(grow(data, weights, &left_members, depth - 1)),
        right: Box::new(grow(data, weights, &right_members, depth - 1)),
    }
}

/// Walks one column in value order, with the implicit zero rows inserted as
/// a single group at their sorted position.
fn best_split_for(
    data: &SparseDataset,
    weights: &[f64],
    members: &[bool],
    feature: u32,
    total_p: f64,
    total_n: f64,
    total_count: usize,
) -> Option<Candidate> {
    let col = &data.columns[feature as usize];
    let mut groups: Vec<(f64, f64, f64)> = Vec::new(); // (value, p, n)
    let (mut nz_p, mut nz_n, mut nz_count) = (0.0, 0.0, 0usize);
    for &(r, v) in col {
        let r = r as usize;
        if !members[r] {
            continue;
        }
        nz_count += 1;
        let (dp, dn) = if data.labels[r] > 0.0 {
            (weights[r], 0.0)
        } else {
            (0.0, weights[r])
        };
        nz_p += dp;
        nz_n += dn;
        match groups.last_mut() {
            Some(g) if g.0 == v => {
                g.1 += dp;
                g.2 += dn;
            }
            _ => groups.push((v, dp, dn)),
        }
    }
    if nz_count < total_count {
        let zp = (total_p - nz_p).max(0.0);
        let zn = (total_n - nz_n).max(0.0);
        let at = groups.partition_point(|g| g.0 < 0.0);
        groups.insert(at, (0.0, zp, zn));
    }
    if groups.len() < 2 {
        return None;
    }
    let mut best: Option<Candidate> = None;
    let (mut lp, mut ln) = (0.0, 0.0);
    for k in 0..groups.len() - 1 {
        lp += groups[k].1;
        ln += groups[k].2;
        let rp = (total_p - lp).max(0.0);
        let rn = (total_n - ln).max(0.0);
        let imp = weighted_gini(lp, ln) + weighted_gini(rp, rn);
        if best.map_or(true, |b| better(imp, b.impurity)) {
            best = Some(Candidate {
                impurity: imp,
                feature,
                threshold: 0.5 * (groups[k].0 + groups[k + 1].0),
            });
        }
    }
    best
}

/// Weighted error of `tree` and its per-row predictions.
pub(crate) fn weighted_error(tree: &Tree, data: &SparseDataset, weights: &[f64]) -> (f64, Vec<f64>) {
    let preds = tree.predict_rows(data);
    let err = preds
        .iter()
        .zip(&data.labels)
        .zip(weights)
        .filter(|((h, y), _)| h != y)
        .map(|(_, w)| w)
        .sum();
    (err, preds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(xs: &[&[f64]]) -> Vec<FeatureVector> {
        xs.iter()
            .map(|x| FeatureVector {
                space_hash: 0,
                entries: x
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(i, v)| (i as u32, *v))
                    .collect(),
                label: None,
            })
            .collect()
    }

    #[test]
    fn stump_on_separable_line() {
        let x = rows(&[&[1.0], &[2.0], &[3.0], &[4.0]]);
        let d = SparseDataset::new(&x, vec![-1.0, -1.0, 1.0, 1.0]);
        let t = fit_tree(&d, &[0.25; 4], 1);
        assert_eq!(
            t,
            Tree::Split {
                feature: 0,
                threshold: 2.5,
                left: Box::new(Tree::Leaf(-1.0)),
                right: Box::new(Tree::Leaf(1.0)),
            }
        );
    }

    #[test]
    fn zero_group_between_signs() {
        // values -1, 0 (implicit), 1 with labels -, +, +
        let x = rows(&[&[-1.0], &[0.0], &[1.0]]);
        let d = SparseDataset::new(&x, vec![-1.0, 1.0, 1.0]);
        let t = fit_tree(&d, &[1.0 / 3.0; 3], 1);
        match t {
            Tree::Split { threshold, .. } => assert_eq!(threshold, -0.5),
            _ => panic!("expected a split"),
        }
    }

    #[test]
    fn xor_needs_two_levels() {
        let x = rows(&[&[0.0, 0.0], &[1.0, 1.0], &[0.0, 1.0], &[1.0, 0.0]]);
        let y = vec![-1.0, -1.0, 1.0, 1.0];
        let d = SparseDataset::new(&x, y.clone());
        let w = [0.25; 4];
        let t2 = fit_tree(&d, &w, 2);
        assert_eq!(weighted_error(&t2, &d, &w).0, 0.0);
        assert_eq!(t2.depth(), 2);
        let t1 = fit_tree(&d, &w, 1);
        assert_eq!(weighted_error(&t1, &d, &w).0, 0.5);
    }

    #[test]
    fn pure_node_is_leaf() {
        let x = rows(&[&[1.0], &[2.0]]);
        let d = SparseDataset::new(&x, vec![1.0, 1.0]);
        assert_eq!(fit_tree(&d, &[0.5, 0.5], 2), Tree::Leaf(1.0));
    }
}
