// SPDX-License-Identifier: MIT OR Apache-2.0

//! Pairwise matrices over a labelled collection of step functions.

use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stepfn::{inner_product, lp_distance, lp_norm, normalize, PNorm, StepFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    /// Symmetric, zero diagonal, nonnegative.
    Distance,
    /// Symmetric, unit diagonal, entries in `[0, 1]`.
    Affinity,
    /// Symmetric, unit diagonal, entries in `[-1, 1]`.
    Alignment,
    /// Symmetric difference of two similarity matrices, entries in `[-2, 1]`.
    Consistency,
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatrixKind::Distance => "distance",
            MatrixKind::Affinity => "affinity",
            MatrixKind::Alignment => "alignment",
            MatrixKind::Consistency => "consistency",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSquareMatrix {
    labels: Vec<String>,
    entries: Vec<f64>,
    kind: MatrixKind,
}

impl LabeledSquareMatrix {
    /// Builds a matrix from row-major `entries` and checks the invariants of
    /// `kind`.
    pub fn new(labels: Vec<String>, entries: Vec<f64>, kind: MatrixKind) -> Result<Self> {
        let n = labels.len();
        if entries.len() != n * n {
            return Err(Error::InvalidMatrix(format!("{n} labels need {} entries, got {}", n * n, entries.len())));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
            return Err(Error::InvalidMatrix(format!("duplicate label `{dup}`")));
        }
        let m = Self { labels, entries, kind };
        m.check_invariants()?;
        Ok(m)
    }

    /// Symmetric matrix from `f(i, j)` evaluated once per unordered pair
    /// `i < j`, with `diagonal` on the diagonal. Pairs are evaluated in
    /// parallel; each entry is computed independently.
    pub fn from_pairs<F>(labels: Vec<String>, kind: MatrixKind, diagonal: f64, f: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> Result<f64> + Sync,
    {
        let n = labels.len();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let values = pairs.par_iter().map(|&(i, j)| f(i, j)).collect::<Result<Vec<f64>>>()?;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = diagonal;
        }
        for (&(i, j), v) in pairs.iter().zip(values) {
            entries[i * n + j] = v;
            entries[j * n + i] = v;
        }
        Self::new(labels, entries, kind)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n();
        &self.entries[i * n..(i + 1) * n]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn max_entry(&self) -> f64 {
        self.entries.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Same entries, rows and columns reordered by `order` (new index -> old).
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let n = self.n();
        let labels = order.iter().map(|&i| self.labels[i].clone()).collect();
        let mut entries = Vec::with_capacity(n * n);
        for &i in order {
            for &j in order {
                entries.push(self.get(i, j));
            }
        }
        Self::new(labels, entries, self.kind)
    }

    pub fn check_invariants(&self) -> Result<()> {
        let n = self.n();
        let fail = |what: String| Err(Error::InvalidMatrix(format!("{} matrix: {what}", self.kind)));
        if self.entries.iter().any(|v| !v.is_finite()) {
            return fail("non-finite entry".into());
        }
        for i in 0..n {
            for j in 0..i {
                if self.get(i, j) != self.get(j, i) {
                    return fail(format!("asymmetric at ({i}, {j})"));
                }
            }
        }
        let (diag, lo, hi) = match self.kind {
            MatrixKind::Distance => (Some(0.0), 0.0, f64::INFINITY),
            MatrixKind::Affinity => (Some(1.0), 0.0, 1.0),
            MatrixKind::Alignment => (Some(1.0), -1.0, 1.0),
            MatrixKind::Consistency => (None, -2.0, 1.0),
        };
        if let Some(d) = diag {
            if let Some(i) = (0..n).find(|&i| self.get(i, i) != d) {
                return fail(format!("diagonal entry ({i}, {i}) = {} != {d}", self.get(i, i)));
            }
        }
        if let Some(v) = self.entries.iter().find(|&&v| v < lo || v > hi) {
            return fail(format!("entry {v} outside [{lo}, {hi}]"));
        }
        Ok(())
    }

    /// Dissimilarity view used by hierarchical clustering: distances as-is,
    /// `1 - A` for affinities and alignments, `|C|` for consistency matrices.
    pub fn to_dissimilarity(&self) -> Result<Self> {
        let map: fn(f64) -> f64 = match self.kind {
            MatrixKind::Distance => return Ok(self.clone()),
            MatrixKind::Affinity | MatrixKind::Alignment => |v| 1.0 - v,
            MatrixKind::Consistency => f64::abs,
        };
        let n = self.n();
        let mut entries: Vec<f64> = self.entries.iter().map(|&v| map(v)).collect();
        for i in 0..n {
            entries[i * n + i] = 0.0;
        }
        Self::new(self.labels.clone(), entries, MatrixKind::Distance)
    }

    /// Affinity view used by spectral clustering: affinities as-is,
    /// `(x + 1) / 2` for alignments, and the affine affinity transform of
    /// the dissimilarity view otherwise.
    pub fn to_similarity(&self) -> Result<Self> {
        match self.kind {
            MatrixKind::Affinity => Ok(self.clone()),
            MatrixKind::Alignment => {
                let n = self.n();
                let mut entries: Vec<f64> = self.entries.iter().map(|v| (v + 1.0) / 2.0).collect();
                for i in 0..n {
                    entries[i * n + i] = 1.0;
                }
                Self::new(self.labels.clone(), entries, MatrixKind::Affinity)
            }
            MatrixKind::Distance | MatrixKind::Consistency => to_affinity(&self.to_dissimilarity()?),
        }
    }

    /// CSV: a header of labels (first cell empty), then one row per label.
    /// Values use Rust's shortest round-trip float rendering.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec![String::new()];
        header.extend(self.labels.iter().cloned());
        w.write_record(&header)?;
        for (i, label) in self.labels.iter().enumerate() {
            let mut rec = vec![label.clone()];
            rec.extend(self.row(i).iter().map(|v| format!("{v:?}")));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<matrix csv>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R, kind: MatrixKind) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let labels: Vec<String> = r.headers()?.iter().skip(1).map(str::to_string).collect();
        let n = labels.len();
        let mut entries = Vec::with_capacity(n * n);
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let row_label = rec.get(0).unwrap_or_default();
            if labels.get(i).map(String::as_str) != Some(row_label) {
                return Err(Error::LabelMismatch(format!("row {i} labelled `{row_label}` does not match header")));
            }
            for (j, cell) in rec.iter().skip(1).enumerate() {
                let v = cell.trim().parse::<f64>().map_err(|_| Error::UnparseableCell {
                    row: i + 1,
                    column: labels.get(j).cloned().unwrap_or_default(),
                    value: cell.to_string(),
                })?;
                entries.push(v);
            }
        }
        Self::new(labels, entries, kind)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn load(path: impl AsRef<Path>, kind: MatrixKind) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file, kind)
    }
}

fn check_collection(labels: &[String], fs: &[StepFunction]) -> Result<()> {
    if labels.len() != fs.len() {
        return Err(Error::LabelMismatch(format!("{} labels for {} functions", labels.len(), fs.len())));
    }
    if fs.len() < 2 {
        return Err(Error::InvalidMatrix(format!("pairwise analysis needs at least 2 series, got {}", fs.len())));
    }
    let h = fs[0].horizon();
    if let Some(f) = fs.iter().find(|f| f.horizon() != h) {
        return Err(Error::DomainMismatch { left: h, right: f.horizon() });
    }
    Ok(())
}

/// `D^us_ij = ||f_i - f_j||_p`.
pub fn unscaled_distance_matrix(labels: &[String], fs: &[StepFunction], p: PNorm) -> Result<LabeledSquareMatrix> {
    check_collection(labels, fs)?;
    LabeledSquareMatrix::from_pairs(labels.to_vec(), MatrixKind::Distance, 0.0, |i, j| lp_distance(&fs[i], &fs[j], p))
}

/// `D^norm_ij = ||f_i/||f_i||_p - f_j/||f_j||_p||_p`.
pub fn normalized_distance_matrix(labels: &[String], fs: &[StepFunction], p: PNorm) -> Result<LabeledSquareMatrix> {
    check_collection(labels, fs)?;
    let normalized = fs
        .iter()
        .zip(labels)
        .map(|(f, label)| {
            normalize(f, p).map_err(|e| match e {
                Error::ZeroFunction { .. } => Error::ZeroFunction { label: label.clone() },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    unscaled_distance_matrix(labels, &normalized, p)
}

/// `Omega_ij = <f_i, f_j> / (||f_i||_2 ||f_j||_2)`, always an `L^2` notion.
pub fn alignment_matrix(labels: &[String], fs: &[StepFunction]) -> Result<LabeledSquareMatrix> {
    check_collection(labels, fs)?;
    let norms: Vec<f64> = fs.iter().map(|f| lp_norm(f, PNorm::TWO)).collect();
    if let Some(i) = norms.iter().position(|&n| n == 0.0) {
        return Err(Error::ZeroFunction { label: labels[i].clone() });
    }
    LabeledSquareMatrix::from_pairs(labels.to_vec(), MatrixKind::Alignment, 1.0, |i, j| {
        let cos = inner_product(&fs[i], &fs[j])? / (norms[i] * norms[j]);
        Ok(cos.clamp(-1.0, 1.0))
    })
}

/// `A_ij = 1 - D_ij / max D`; all ones when every distance is zero.
pub fn to_affinity(d: &LabeledSquareMatrix) -> Result<LabeledSquareMatrix> {
    if d.kind() != MatrixKind::Distance {
        return Err(Error::InvalidMatrix(format!("affinity transform needs a distance matrix, got {}", d.kind())));
    }
    let max = d.max_entry();
    let entries =
        if max > 0.0 { d.entries().iter().map(|v| 1.0 - v / max).collect() } else { vec![1.0; d.entries().len()] };
    LabeledSquareMatrix::new(d.labels().to_vec(), entries, MatrixKind::Affinity)
}

/// `Con = A - A_G`, the agreement between a signal similarity and a
/// contextual affinity.
pub fn consistency_matrix(a: &LabeledSquareMatrix, context: &LabeledSquareMatrix) -> Result<LabeledSquareMatrix> {
    if !matches!(a.kind(), MatrixKind::Affinity | MatrixKind::Alignment) {
        return Err(Error::InvalidMatrix(format!("consistency needs an affinity or alignment, got {}", a.kind())));
    }
    if context.kind() != MatrixKind::Affinity {
        return Err(Error::InvalidMatrix(format!("contextual matrix must be an affinity, got {}", context.kind())));
    }
    if a.labels() != context.labels() {
        return Err(Error::LabelMismatch(format!(
            "signal labels {:?} vs contextual labels {:?}",
            a.labels(),
            context.labels()
        )));
    }
    let entries = a.entries().iter().zip(context.entries()).map(|(x, y)| x - y).collect();
    LabeledSquareMatrix::new(a.labels().to_vec(), entries, MatrixKind::Consistency)
}

/// `(1/n^2) sum_ij |c_ij|`, diagonal included.
pub fn matrix_norm(c: &LabeledSquareMatrix) -> f64 {
    let n = c.n() as f64;
    c.entries().iter().map(|v| v.abs()).sum::<f64>() / (n * n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("s{i}")).collect()
    }

    fn m(n: usize, e: &[f64], kind: MatrixKind) -> LabeledSquareMatrix {
        LabeledSquareMatrix::new(labels(n), e.to_vec(), kind).unwrap()
    }

    #[test]
    fn kind_invariants_enforced() {
        assert!(LabeledSquareMatrix::new(labels(2), vec![0.0, 1.0, 2.0, 0.0], MatrixKind::Distance).is_err());
        assert!(LabeledSquareMatrix::new(labels(2), vec![1.0, 0.5, 0.5, 0.0], MatrixKind::Affinity).is_err());
        assert!(LabeledSquareMatrix::new(labels(2), vec![1.0, -0.5, -0.5, 1.0], MatrixKind::Affinity).is_err());
        assert!(LabeledSquareMatrix::new(labels(2), vec![1.0, -0.5, -0.5, 1.0], MatrixKind::Alignment).is_ok());
        assert!(LabeledSquareMatrix::new(labels(2), vec![0.0, -1.5, -1.5, 0.0], MatrixKind::Consistency).is_ok());
        assert!(LabeledSquareMatrix::new(vec!["a".into(), "a".into()], vec![0.0; 4], MatrixKind::Distance).is_err());
        assert!(LabeledSquareMatrix::new(labels(2), vec![0.0; 3], MatrixKind::Distance).is_err());
    }

    #[test]
    fn constants_distance() {
        let fs = vec![StepFunction::constant(2.0, 1.0).unwrap(), StepFunction::constant(-1.5, 1.0).unwrap()];
        let d = unscaled_distance_matrix(&labels(2), &fs, PNorm::ONE).unwrap();
        assert_eq!(d.entries(), &[0.0, 3.5, 3.5, 0.0]);
        let same = vec![fs[0].clone(), fs[0].clone(), fs[0].clone()];
        let z = unscaled_distance_matrix(&labels(3), &same, PNorm::TWO).unwrap();
        assert!(z.entries().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn singleton_collection_rejected() {
        let fs = vec![StepFunction::constant(2.0, 1.0).unwrap()];
        assert!(unscaled_distance_matrix(&labels(1), &fs, PNorm::ONE).is_err());
    }

    #[test]
    fn normalized_examples() {
        let f = StepFunction::new(vec![0.0, 1.0, 3.0], vec![1.0, -2.0]).unwrap();
        let fs = vec![f.clone(), f.scale(2.0).unwrap()];
        let d = normalized_distance_matrix(&labels(2), &fs, PNorm::Finite(3.0)).unwrap();
        assert_eq!(d.get(0, 1), 0.0);

        let consts: Vec<_> = [1.0, 4.0, 0.5].iter().map(|&c| StepFunction::constant(c, 2.0).unwrap()).collect();
        let d = normalized_distance_matrix(&labels(3), &consts, PNorm::ONE).unwrap();
        assert!(d.entries().iter().all(|&v| v == 0.0));

        let with_zero = vec![f.clone(), StepFunction::constant(0.0, 3.0).unwrap()];
        match normalized_distance_matrix(&labels(2), &with_zero, PNorm::ONE) {
            Err(Error::ZeroFunction { label }) => assert_eq!(label, "s1"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn alignment_examples() {
        let f = StepFunction::new(vec![0.0, 0.5, 1.0], vec![1.0, 0.0]).unwrap();
        let g = StepFunction::new(vec![0.0, 0.5, 1.0], vec![0.0, 3.0]).unwrap();
        let h = StepFunction::new(vec![0.0, 0.5, 1.0], vec![-1.0, 0.0]).unwrap();
        let om = alignment_matrix(&labels(3), &[f, g, h]).unwrap();
        assert_eq!(om.get(0, 0), 1.0);
        assert_eq!(om.get(0, 1), 0.0);
        assert!((om.get(0, 2) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn affinity_examples() {
        let z = m(3, &[0.0; 9], MatrixKind::Distance);
        assert!(to_affinity(&z).unwrap().entries().iter().all(|&v| v == 1.0));
        let d = m(2, &[0.0, 3.0, 3.0, 0.0], MatrixKind::Distance);
        assert_eq!(to_affinity(&d).unwrap().entries(), &[1.0, 0.0, 0.0, 1.0]);
        let d = m(3, &[0.0, 2.0, 4.0, 2.0, 0.0, 2.0, 4.0, 2.0, 0.0], MatrixKind::Distance);
        assert_eq!(to_affinity(&d).unwrap().entries(), &[1.0, 0.5, 0.0, 0.5, 1.0, 0.5, 0.0, 0.5, 1.0]);
        assert!(to_affinity(&to_affinity(&d).unwrap()).is_err());
    }

    #[test]
    fn consistency_and_norm() {
        let a = m(2, &[1.0, 0.75, 0.75, 1.0], MatrixKind::Affinity);
        let g = m(2, &[1.0, 0.25, 0.25, 1.0], MatrixKind::Affinity);
        let c = consistency_matrix(&a, &g).unwrap();
        assert_eq!(c.entries(), &[0.0, 0.5, 0.5, 0.0]);
        assert_eq!(matrix_norm(&c), 0.25);
        assert_eq!(matrix_norm(&consistency_matrix(&a, &a).unwrap()), 0.0);
        let ones = m(3, &[1.0; 9], MatrixKind::Affinity);
        assert_eq!(matrix_norm(&ones), 1.0);

        let other =
            LabeledSquareMatrix::new(vec!["x".into(), "y".into()], g.entries().to_vec(), MatrixKind::Affinity).unwrap();
        assert!(matches!(consistency_matrix(&a, &other), Err(Error::LabelMismatch(_))));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let d = m(3, &[0.0, 0.1, 1.0 / 3.0, 0.1, 0.0, 2e-300, 1.0 / 3.0, 2e-300, 0.0], MatrixKind::Distance);
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(",s0,s1,s2\ns0,0.0,0.1,"));
        let back = LabeledSquareMatrix::read_csv(buf.as_slice(), MatrixKind::Distance).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn views() {
        let om = m(2, &[1.0, -0.5, -0.5, 1.0], MatrixKind::Alignment);
        assert_eq!(om.to_similarity().unwrap().entries(), &[1.0, 0.25, 0.25, 1.0]);
        assert_eq!(om.to_dissimilarity().unwrap().entries(), &[0.0, 1.5, 1.5, 0.0]);
        let c = m(2, &[0.0, -0.5, -0.5, 0.0], MatrixKind::Consistency);
        assert_eq!(c.to_dissimilarity().unwrap().entries(), &[0.0, 0.5, 0.5, 0.0]);
    }
}
