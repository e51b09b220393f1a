// SPDX-License-Identifier: MIT OR Apache-2.0

//! Hierarchical and spectral clustering of labelled matrices.

mod hierarchical;
mod spectral;

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

pub use hierarchical::{hierarchical_cluster, Dendrogram, Linkage, Merge};
pub use spectral::{eigengap_k, laplacian_spectrum, spectral_cluster, KMEANS_RESTARTS};

/// Flat clustering: every label belongs to exactly one of `k` nonempty
/// clusters. Cluster ids are numbered by first appearance in label order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClusterAssignment {
    labels: Vec<String>,
    clusters: Vec<usize>,
    k: usize,
}

impl ClusterAssignment {
    /// Relabels `raw` ids canonically and checks that `k` clusters are used.
    pub(crate) fn from_raw(labels: Vec<String>, raw: &[usize]) -> Result<Self> {
        let mut map: Vec<(usize, usize)> = Vec::new();
        let clusters: Vec<usize> = raw
            .iter()
            .map(|&r| match map.iter().find(|(from, _)| *from == r) {
                Some(&(_, to)) => to,
                None => {
                    let to = map.len();
                    map.push((r, to));
                    to
                }
            })
            .collect();
        if labels.len() != clusters.len() {
            return Err(Error::LabelMismatch(format!("{} labels, {} assignments", labels.len(), clusters.len())));
        }
        Ok(Self { labels, clusters, k: map.len() })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn clusters(&self) -> &[usize] {
        &self.clusters
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn cluster_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label).map(|i| self.clusters[i])
    }

    /// Members of each cluster as label indices.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &c) in self.clusters.iter().enumerate() {
            out[c].push(i);
        }
        out
    }

    /// `label,cluster` CSV with a header row.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["label", "cluster"])?;
        for (l, c) in self.labels.iter().zip(&self.clusters) {
            w.write_record([l.as_str(), &c.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<assignment csv>", e))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_relabel() {
        let labels: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let a = ClusterAssignment::from_raw(labels, &[7, 3, 7, 1]).unwrap();
        assert_eq!(a.clusters(), &[0, 1, 0, 2]);
        assert_eq!(a.k(), 3);
        assert_eq!(a.groups(), vec![vec![0, 2], vec![1], vec![3]]);
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "label,cluster\na,0\nb,1\nc,0\nd,2\n");
    }
}
