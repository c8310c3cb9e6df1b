use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::ProbVector;

/// One observation: a probability vector and its zero-based class label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub probs: ProbVector,
    pub label: usize,
}

/// Probability vectors paired with true labels, all over the same class count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    classes: usize,
    rows: Vec<Sample>,
}

impl LabeledDataset {
    pub fn new(classes: usize) -> Result<Self> {
        if classes < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 classes, got {classes}"
            )));
        }
        Ok(Self {
            classes,
            rows: Vec::new(),
        })
    }

    pub fn from_rows(classes: usize, rows: impl IntoIterator<Item = (ProbVector, usize)>) -> Result<Self> {
        let mut ds = Self::new(classes)?;
        for (p, y) in rows {
            ds.push(p, y)?;
        }
        Ok(ds)
    }

    pub fn push(&mut self, probs: ProbVector, label: usize) -> Result<()> {
        if probs.classes() != self.classes {
            return Err(Error::DimensionMismatch {
                expected: self.classes,
                actual: probs.classes(),
            });
        }
        if label >= self.classes {
            return Err(Error::IndexOutOfRange {
                index: label,
                classes: self.classes,
            });
        }
        self.rows.push(Sample { probs, label });
        Ok(())
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Sample] {
        &self.rows
    }

    pub fn probs(&self) -> Vec<ProbVector> {
        self.rows.iter().map(|s| s.probs.clone()).collect()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.rows.iter().map(|s| s.label).collect()
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            classes: self.classes,
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    /// Per-class label counts.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes];
        for s in &self.rows {
            counts[s.label] += 1;
        }
        counts
    }

    pub(crate) fn require_nonempty(&self) -> Result<()> {
        if self.rows.is_empty() {
            Err(Error::EmptyDataset)
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_validates_shape_and_label() {
        let mut ds = LabeledDataset::new(3).unwrap();
        let p = ProbVector::uniform(3).unwrap();
        ds.push(p.clone(), 2).unwrap();
        assert!(matches!(
            ds.push(p.clone(), 3),
            Err(Error::IndexOutOfRange { index: 3, classes: 3 })
        ));
        assert!(matches!(
            ds.push(ProbVector::uniform(2).unwrap(), 0),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.class_counts(), vec![0, 0, 1]);
        assert!(LabeledDataset::new(1).is_err());
    }

    #[test]
    fn subset_keeps_order() {
        let rows = (0..4).map(|i| (ProbVector::vertex(2, i % 2).unwrap(), i % 2));
        let ds = LabeledDataset::from_rows(2, rows).unwrap();
        let sub = ds.subset(&[3, 0]);
        assert_eq!(sub.labels(), vec![1, 0]);
    }
}
