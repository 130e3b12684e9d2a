//! Labeled tensor datasets: the TDS1 container, a synthetic generator and
//! stratified fold assignment.
//!
//! TDS1 layout (little-endian, no padding):
//!
//! ```text
//! "TDS1" | u32 order L | L x u32 dims | u32 N | u32 C | N x u32 labels (1-based)
//!        | N payloads of prod(dims) f64, last index fastest
//! ```

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{Error, Result};
use crate::tensor::{DenseTensor, Matrix};

pub const TDS_MAGIC: [u8; 4] = *b"TDS1";

/// Tensors sharing one shape, each with a class id in `1..=class_count`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    tensors: Vec<DenseTensor>,
    labels: Vec<u32>,
    class_count: u32,
}

impl LabeledDataset {
    pub fn new(tensors: Vec<DenseTensor>, labels: Vec<u32>, class_count: u32) -> Result<Self> {
        if tensors.is_empty() {
            return Err(Error::BadDims("dataset has no samples".into()));
        }
        if tensors.len() != labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} tensors but {} labels",
                tensors.len(),
                labels.len()
            )));
        }
        let dims = tensors[0].dims();
        if let Some(t) = tensors.iter().find(|t| t.dims() != dims) {
            return Err(Error::DimsMismatch(format!("{:?} vs {:?}", t.dims(), dims)));
        }
        if let Some(&label) = labels.iter().find(|&&y| y == 0 || y > class_count) {
            return Err(Error::LabelOutOfRange { label, class_count });
        }
        let mut seen = vec![false; class_count as usize];
        for &y in &labels {
            seen[y as usize - 1] = true;
        }
        if let Some(c) = seen.iter().position(|s| !s) {
            return Err(Error::EmptyClass(c as u32 + 1));
        }
        Ok(Self { tensors, labels, class_count })
    }

    pub fn tensors(&self) -> &[DenseTensor] {
        &self.tensors
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn class_count(&self) -> u32 {
        self.class_count
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn dims(&self) -> &[usize] {
        self.tensors[0].dims()
    }

    pub fn order(&self) -> usize {
        self.dims().len()
    }

    /// Per-class sample counts, indexed by `class - 1`.
    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.class_count as usize];
        for &y in &self.labels {
            sizes[y as usize - 1] += 1;
        }
        sizes
    }

    /// Samples at `indices`, keeping the class count. Fails with
    /// `EmptyClass` if some class is absent from the subset.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let tensors = indices.iter().map(|&i| self.tensors[i].clone()).collect();
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Self::new(tensors, labels, self.class_count)
    }

    /// Same labels, new tensors (e.g. embeddings or feature maps).
    pub fn with_tensors(&self, tensors: Vec<DenseTensor>) -> Result<Self> {
        Self::new(tensors, self.labels.clone(), self.class_count)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let dims = self.dims();
        let payload: usize = dims.iter().product();
        let mut out = Vec::with_capacity(16 + 4 * dims.len() + 4 * self.len() + 8 * payload * self.len());
        out.extend_from_slice(&TDS_MAGIC);
        out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
        for &d in dims {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        out.extend_from_slice(&(self.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.class_count.to_le_bytes());
        for &y in &self.labels {
            out.extend_from_slice(&y.to_le_bytes());
        }
        for t in &self.tensors {
            for v in t.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let magic = r.magic()?;
        if magic != TDS_MAGIC {
            return Err(Error::BadMagic { expected: TDS_MAGIC, found: magic });
        }
        let order = r.u32("order")? as usize;
        if order == 0 {
            return Err(Error::BadDims("order 0".into()));
        }
        let dims = (0..order).map(|_| r.u32("dims").map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
        if dims.contains(&0) {
            return Err(Error::BadDims(format!("{dims:?}")));
        }
        let n = r.u32("sample count")? as usize;
        let class_count = r.u32("class count")?;
        let labels = (0..n).map(|_| r.u32("labels")).collect::<Result<Vec<_>>>()?;
        let payload: usize = dims.iter().product();
        let mut tensors = Vec::with_capacity(n);
        for i in 0..n {
            let data = r.f64s(payload).map_err(|_| {
                Error::TruncatedFile(format!("header declares {n} samples, payload {i} is incomplete"))
            })?;
            tensors.push(DenseTensor::new(dims.clone(), data)?);
        }
        if r.remaining() != 0 {
            return Err(Error::DimsMismatch(format!(
                "{} trailing bytes after {n} payloads of dims {dims:?}",
                r.remaining()
            )));
        }
        Self::new(tensors, labels, class_count)
    }
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    LabeledDataset::from_bytes(&fs::read(path)?)
}

pub fn save_dataset(ds: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, ds.to_bytes())?;
    Ok(())
}

/// Little-endian cursor over a byte slice; shared with the model format.
pub(crate) struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    pub(crate) fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    pub(crate) fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.remaining() < n {
            return Err(Error::TruncatedFile(format!("unexpected end of data reading {what}")));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub(crate) fn magic(&mut self) -> Result<[u8; 4]> {
        let s = self.take(4, "magic")?;
        Ok([s[0], s[1], s[2], s[3]])
    }

    pub(crate) fn u32(&mut self, what: &str) -> Result<u32> {
        let s = self.take(4, what)?;
        Ok(u32::from_le_bytes(s.try_into().unwrap()))
    }

    pub(crate) fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let s = self.take(8 * n, "payload")?;
        Ok(s.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

/// Random `rows x cols` matrix with orthonormal columns.
pub(crate) fn random_orthonormal(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    let g = Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng));
    g.qr().q()
}

/// Synthetic classes whose means share a low multilinear-rank subspace.
///
/// Each class mean is a standard-normal core of shape `subspace_dims` mapped
/// through per-mode orthonormal factors shared by all classes; samples add
/// i.i.d. Gaussian noise of standard deviation `noise_sigma`.
pub fn synth_clusters(
    class_count: usize,
    per_class: usize,
    dims: &[usize],
    subspace_dims: &[usize],
    noise_sigma: f64,
    seed: u64,
) -> Result<LabeledDataset> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::BadDims(format!("dims {dims:?}")));
    }
    if subspace_dims.len() != dims.len() || subspace_dims.iter().zip(dims).any(|(&r, &d)| r == 0 || r > d) {
        return Err(Error::BadDims(format!("subspace dims {subspace_dims:?} must fit inside {dims:?}")));
    }
    if class_count == 0 || per_class == 0 {
        return Err(Error::InvalidParameter("need at least one class and one sample per class".into()));
    }
    if !(noise_sigma >= 0.0) || !noise_sigma.is_finite() {
        return Err(Error::InvalidParameter(format!("noise sigma {noise_sigma}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factors: Vec<Matrix> =
        dims.iter().zip(subspace_dims).map(|(&d, &r)| random_orthonormal(&mut rng, d, r)).collect();
    let means = (0..class_count)
        .map(|_| {
            let core = DenseTensor::from_fn(subspace_dims.to_vec(), |_| StandardNormal.sample(&mut rng))?;
            core.multi_mode_product(&factors, None)
        })
        .collect::<Result<Vec<_>>>()?;
    let noise = Normal::new(0.0, noise_sigma).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut tensors = Vec::with_capacity(class_count * per_class);
    let mut labels = Vec::with_capacity(class_count * per_class);
    for (c, mean) in means.iter().enumerate() {
        for _ in 0..per_class {
            let mut t = mean.clone();
            if noise_sigma > 0.0 {
                for v in t.data_mut() {
                    *v += noise.sample(&mut rng);
                }
            }
            tensors.push(t);
            labels.push(c as u32 + 1);
        }
    }
    LabeledDataset::new(tensors, labels, class_count as u32)
}

/// Stratified assignment of samples to folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub fold_count: usize,
    pub assignments: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    /// `(train, test)` sample indices for `fold`.
    pub fn split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        (0..self.assignments.len()).partition(|&i| self.assignments[i] != fold)
    }
}

pub fn make_folds(ds: &LabeledDataset, fold_count: usize, seed: u64) -> Result<FoldPlan> {
    if fold_count < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 folds, got {fold_count}")));
    }
    let sizes = ds.class_sizes();
    if let Some((c, &count)) = sizes.iter().enumerate().find(|(_, &s)| s < fold_count) {
        return Err(Error::TooFewSamples { class: c as u32 + 1, count, folds: fold_count });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = vec![0; ds.len()];
    // Rotating the starting fold per class spreads the remainders evenly.
    let mut start = 0;
    for class in 1..=ds.class_count() {
        let mut members: Vec<usize> = (0..ds.len()).filter(|&i| ds.labels()[i] == class).collect();
        members.shuffle(&mut rng);
        for (pos, &i) in members.iter().enumerate() {
            assignments[i] = (start + pos) % fold_count;
        }
        start = (start + members.len()) % fold_count;
    }
    Ok(FoldPlan { fold_count, assignments, seed })
}
