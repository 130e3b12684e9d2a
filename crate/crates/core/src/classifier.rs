//! Frobenius-distance k-nearest-neighbor classification in the learned subspace.

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::tensor::DenseTensor;
use crate::trainer::{transform, ProjectionStack};

#[derive(Debug, Clone)]
pub struct KnnModel {
    embeddings: Vec<DenseTensor>,
    labels: Vec<u32>,
    k: usize,
}

impl KnnModel {
    pub fn new(embeddings: Vec<DenseTensor>, labels: Vec<u32>, k: usize) -> Result<Self> {
        if embeddings.is_empty() || embeddings.len() != labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} embeddings, {} labels",
                embeddings.len(),
                labels.len()
            )));
        }
        if k == 0 || k > embeddings.len() {
            return Err(Error::InvalidParameter(format!("k must be in 1..={}, got {k}", embeddings.len())));
        }
        let dims = embeddings[0].dims();
        if embeddings.iter().any(|e| e.dims() != dims) {
            return Err(Error::ShapeMismatch("embeddings differ in dims".into()));
        }
        Ok(Self { embeddings, labels, k })
    }

    pub fn from_dataset(ds: &LabeledDataset, k: usize) -> Result<Self> {
        Self::new(ds.tensors().to_vec(), ds.labels().to_vec(), k)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Majority label among the `k` nearest training embeddings. Distance
    /// ties admit the smaller training index; vote ties go to the smallest label.
    pub fn predict(&self, query: &DenseTensor) -> Result<u32> {
        if query.dims() != self.embeddings[0].dims() {
            return Err(Error::ShapeMismatch(format!(
                "query dims {:?}, model dims {:?}",
                query.dims(),
                self.embeddings[0].dims()
            )));
        }
        let mut dist: Vec<(f64, usize)> = self
            .embeddings
            .iter()
            .enumerate()
            .map(|(i, e)| Ok((e.distance_sq(query)?, i)))
            .collect::<Result<_>>()?;
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut votes: Vec<(u32, usize)> = Vec::new();
        for &(_, i) in dist.iter().take(self.k) {
            let y = self.labels[i];
            match votes.iter_mut().find(|(l, _)| *l == y) {
                Some(v) => v.1 += 1,
                None => votes.push((y, 1)),
            }
        }
        let best = votes.iter().map(|v| v.1).max().unwrap_or(0);
        Ok(votes.iter().filter(|v| v.1 == best).map(|v| v.0).min().unwrap())
    }

    pub fn predict_all(&self, queries: &[DenseTensor]) -> Result<Vec<u32>> {
        queries.iter().map(|q| self.predict(q)).collect()
    }
}

/// Fraction of correct predictions.
pub fn accuracy(predicted: &[u32], truth: &[u32]) -> f64 {
    let hits = predicted.iter().zip(truth).filter(|(a, b)| a == b).count();
    hits as f64 / truth.len().max(1) as f64
}

/// Embeds both sets with `stack`, fits k-NN on the training embeddings and
/// returns test accuracy.
pub fn evaluate(
    stack: &ProjectionStack,
    train: &LabeledDataset,
    test: &LabeledDataset,
    k: usize,
) -> Result<f64> {
    let model = KnnModel::from_dataset(&transform(stack, train)?, k)?;
    let test_emb = transform(stack, test)?;
    let pred = model.predict_all(test_emb.tensors())?;
    Ok(accuracy(&pred, test.labels()))
}
