// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ClusterAssignment;
use crate::error::{Error, Result};
use crate::matrices::{LabeledSquareMatrix, MatrixKind};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    Single,
    #[default]
    Average,
    Complete,
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Linkage::Single => "single",
            Linkage::Average => "average",
            Linkage::Complete => "complete",
        })
    }
}

impl FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "single" => Ok(Linkage::Single),
            "average" => Ok(Linkage::Average),
            "complete" => Ok(Linkage::Complete),
            other => Err(Error::Config(format!("unknown linkage `{other}`"))),
        }
    }
}

/// One agglomeration step. Nodes `0..n` are leaves; merge `i` creates node
/// `n + i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Dendrogram {
    labels: Vec<String>,
    merges: Vec<Merge>,
}

/// Naive agglomerative clustering with Lance-Williams updates.
///
/// Among pairs at the minimum linkage distance the pair with the smallest
/// `(i, j)` is merged, where a cluster is identified by its smallest leaf.
pub fn hierarchical_cluster(d: &LabeledSquareMatrix, linkage: Linkage) -> Result<Dendrogram> {
    if d.kind() != MatrixKind::Distance {
        return Err(Error::InvalidMatrix(format!("hierarchical clustering needs a distance matrix, got {}", d.kind())));
    }
    let n = d.n();
    let mut dist: Vec<Vec<f64>> = (0..n).map(|i| d.row(i).to_vec()).collect();
    // slot s holds the cluster whose smallest leaf is s
    let mut node: Vec<Option<usize>> = (0..n).map(Some).collect();
    let mut size = vec![1usize; n];
    let mut merges = Vec::with_capacity(n.saturating_sub(1));

    for step in 0..n.saturating_sub(1) {
        let mut best: Option<(usize, usize, f64)> = None;
        for a in 0..n {
            if node[a].is_none() {
                continue;
            }
            for b in a + 1..n {
                if node[b].is_none() {
                    continue;
                }
                if best.is_none_or(|(_, _, h)| dist[a][b] < h) {
                    best = Some((a, b, dist[a][b]));
                }
            }
        }
        let (a, b, height) = best.expect("at least two active clusters");
        let (na, nb) = (size[a] as f64, size[b] as f64);
        for c in 0..n {
            if c == a || c == b || node[c].is_none() {
                continue;
            }
            let updated = match linkage {
                Linkage::Single => dist[a][c].min(dist[b][c]),
                Linkage::Complete => dist[a][c].max(dist[b][c]),
                Linkage::Average => (na * dist[a][c] + nb * dist[b][c]) / (na + nb),
            };
            dist[a][c] = updated;
            dist[c][a] = updated;
        }
        merges.push(Merge { left: node[a].unwrap(), right: node[b].unwrap(), height, size: size[a] + size[b] });
        node[a] = Some(n + step);
        node[b] = None;
        size[a] += size[b];
    }
    Ok(Dendrogram { labels: d.labels().to_vec(), merges })
}

impl Dendrogram {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    fn height_of(&self, node: usize) -> f64 {
        if node < self.n() {
            0.0
        } else {
            self.merges[node - self.n()].height
        }
    }

    /// Leaf indices under `node`, ascending.
    pub fn leaves(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(x) = stack.pop() {
            if x < self.n() {
                out.push(x);
            } else {
                let m = self.merges[x - self.n()];
                stack.push(m.left);
                stack.push(m.right);
            }
        }
        out.sort_unstable();
        out
    }

    /// Leaf set created by merge `i`.
    pub fn merge_members(&self, i: usize) -> Vec<usize> {
        self.leaves(self.n() + i)
    }

    /// A leaf that stays alone until the final merge, if exactly one side of
    /// the final merge is a single leaf.
    pub fn last_merged_leaf(&self) -> Option<usize> {
        let last = self.merges.last()?;
        let n = self.n();
        match (last.left < n, last.right < n) {
            (true, false) => Some(last.left),
            (false, true) => Some(last.right),
            _ => None,
        }
    }

    /// Flat clusters obtained by undoing the `k - 1` highest merges.
    pub fn cut(&self, k: usize) -> Result<ClusterAssignment> {
        let n = self.n();
        if k == 0 || k > n {
            return Err(Error::BadK { k, n });
        }
        let mut parent: Vec<usize> = (0..2 * n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (i, m) in self.merges.iter().take(n - k).enumerate() {
            let new = n + i;
            let l = find(&mut parent, m.left);
            let r = find(&mut parent, m.right);
            parent[l] = new;
            parent[r] = new;
        }
        let raw: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
        ClusterAssignment::from_raw(self.labels.clone(), &raw)
    }

    /// Newick text; branch lengths are height differences between a node and
    /// its parent, leaves sitting at height 0.
    pub fn to_newick(&self) -> String {
        let n = self.n();
        if n == 0 {
            return ";".into();
        }
        if n == 1 {
            return format!("{};", newick_label(&self.labels[0]));
        }
        let root = 2 * n - 2;
        let mut out = String::new();
        self.write_node(root, &mut out);
        out.push(';');
        out
    }

    fn write_node(&self, node: usize, out: &mut String) {
        let n = self.n();
        if node < n {
            out.push_str(&newick_label(&self.labels[node]));
            return;
        }
        let m = self.merges[node - n];
        out.push('(');
        for (i, child) in [m.left, m.right].into_iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            self.write_node(child, out);
            let len = (m.height - self.height_of(child)).max(0.0);
            out.push_str(&format!(":{len:?}"));
        }
        out.push(')');
    }
}

fn newick_label(label: &str) -> String {
    let needs_quotes = label.is_empty() || label.chars().any(|c| c.is_whitespace() || "()[]':;,".contains(c));
    if needs_quotes {
        format!("'{}'", label.replace('\'', "''"))
    } else {
        label.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(n: usize, f: impl Fn(usize, usize) -> f64) -> LabeledSquareMatrix {
        let labels = (0..n).map(|i| format!("L{i}")).collect();
        let mut e = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    e[i * n + j] = f(i.min(j), i.max(j));
                }
            }
        }
        LabeledSquareMatrix::new(labels, e, MatrixKind::Distance).unwrap()
    }

    fn blocks() -> LabeledSquareMatrix {
        // {0,1,2} and {3,4}
        dist(5, |i, j| if (i < 3) == (j < 3) { 0.1 } else { 10.0 })
    }

    #[test]
    fn two_leaves() {
        let d = dist(2, |_, _| 2.5);
        let t = hierarchical_cluster(&d, Linkage::Average).unwrap();
        assert_eq!(t.merges(), &[Merge { left: 0, right: 1, height: 2.5, size: 2 }]);
        assert_eq!(t.to_newick(), "(L0:2.5,L1:2.5);");
    }

    #[test]
    fn separated_blocks() {
        for linkage in [Linkage::Single, Linkage::Average, Linkage::Complete] {
            let t = hierarchical_cluster(&blocks(), linkage).unwrap();
            let last = t.merges().last().unwrap();
            assert_eq!(last.height, 10.0);
            let mut sides = vec![t.leaves(last.left), t.leaves(last.right)];
            sides.sort();
            assert_eq!(sides, vec![vec![0, 1, 2], vec![3, 4]]);
            let cut = t.cut(2).unwrap();
            assert_eq!(cut.groups(), vec![vec![0, 1, 2], vec![3, 4]]);
        }
    }

    #[test]
    fn cut_extremes() {
        let t = hierarchical_cluster(&blocks(), Linkage::Average).unwrap();
        assert_eq!(t.cut(1).unwrap().k(), 1);
        assert_eq!(t.cut(5).unwrap().clusters(), &[0, 1, 2, 3, 4]);
        assert!(matches!(t.cut(0), Err(Error::BadK { .. })));
        assert!(matches!(t.cut(6), Err(Error::BadK { .. })));
    }

    #[test]
    fn ties_break_on_smallest_pair() {
        let t = hierarchical_cluster(&dist(4, |_, _| 1.0), Linkage::Single).unwrap();
        assert_eq!((t.merges()[0].left, t.merges()[0].right), (0, 1));
        assert_eq!((t.merges()[1].left, t.merges()[1].right), (4, 2));
    }

    #[test]
    fn average_linkage_by_hand() {
        // d01 = 1, d02 = 4, d12 = 6 -> merge {0,1} at 1, then 2 at (4+6)/2
        let d = dist(3, |i, j| match (i, j) {
            (0, 1) => 1.0,
            (0, 2) => 4.0,
            _ => 6.0,
        });
        let t = hierarchical_cluster(&d, Linkage::Average).unwrap();
        assert_eq!(t.merges()[1].height, 5.0);
        assert_eq!(t.last_merged_leaf(), Some(2));
        assert_eq!(t.to_newick(), "((L0:1.0,L1:1.0):4.0,L2:5.0);");
        let t = hierarchical_cluster(&d, Linkage::Complete).unwrap();
        assert_eq!(t.merges()[1].height, 6.0);
        let t = hierarchical_cluster(&d, Linkage::Single).unwrap();
        assert_eq!(t.merges()[1].height, 4.0);
    }

    #[test]
    fn relabeling_preserves_heights() {
        let d = dist(6, |i, j| ((i * 7 + j * 3) % 11) as f64 + 0.5 * (i + j) as f64);
        let t = hierarchical_cluster(&d, Linkage::Average).unwrap();
        let p = d.permuted(&[3, 5, 0, 1, 4, 2]).unwrap();
        let tp = hierarchical_cluster(&p, Linkage::Average).unwrap();
        let hs: Vec<f64> = t.merges().iter().map(|m| m.height).collect();
        let hp: Vec<f64> = tp.merges().iter().map(|m| m.height).collect();
        assert_eq!(hs, hp);
    }

    #[test]
    fn newick_quotes_labels() {
        assert_eq!(newick_label("Wagga Wagga"), "'Wagga Wagga'");
        assert_eq!(newick_label("O'Hare"), "'O''Hare'");
        assert_eq!(newick_label("Albury"), "Albury");
    }

    #[test]
    fn rejects_non_distance() {
        let a = crate::matrices::to_affinity(&blocks()).unwrap();
        assert!(hierarchical_cluster(&a, Linkage::Average).is_err());
    }
}
