//! Dense real tensors of arbitrary order and the multilinear operations on them.
//!
//! Storage is row-major: the last index varies fastest. Modes are 0-based in
//! this API, so an order-`L` tensor has modes `0..L`.
//!
//! Unfolding at mode `l` produces an `I_l x prod(I_k, k != l)` matrix whose
//! column index enumerates the remaining modes in the cyclic order
//! `l+1, ..., L-1, 0, ..., l-1`, with the first of those varying fastest.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Dense real matrix used for projections, Gram matrices and unfoldings.
pub type Matrix = DMatrix<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::BadDims("tensor must have at least one mode".into()));
    }
    if let Some(k) = dims.iter().position(|&d| d == 0) {
        return Err(Error::BadDims(format!("mode {k} has size 0")));
    }
    Ok(dims.iter().product())
}

impl DenseTensor {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let len = check_dims(&dims)?;
        if data.len() != len {
            return Err(Error::DimensionMismatch(format!(
                "dims {dims:?} need {len} entries, got {}",
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let len = check_dims(&dims)?;
        Ok(Self { dims, data: vec![0.0; len] })
    }

    /// Builds a tensor by evaluating `f` at every multi-index, in storage order.
    pub fn from_fn(dims: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let len = check_dims(&dims)?;
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![0usize; dims.len()];
        for _ in 0..len {
            data.push(f(&idx));
            increment(&mut idx, &dims);
        }
        Ok(Self { dims, data })
    }

    /// A column vector as an order-1 tensor.
    pub fn from_vec(data: Vec<f64>) -> Result<Self> {
        Self::new(vec![data.len()], data)
    }

    /// Row-major matrix as an order-2 tensor.
    pub fn from_matrix(m: &Matrix) -> Self {
        let (r, c) = m.shape();
        let mut data = Vec::with_capacity(r * c);
        for i in 0..r {
            for j in 0..c {
                data.push(m[(i, j)]);
            }
        }
        Self { dims: vec![r, c], data }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    fn offset(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.dims.len());
        index.iter().zip(&self.dims).fold(0, |acc, (&i, &d)| {
            debug_assert!(i < d);
            acc * d + i
        })
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.data[self.offset(index)]
    }

    pub fn set(&mut self, index: &[usize], value: f64) {
        let o = self.offset(index);
        self.data[o] = value;
    }

    fn same_dims(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", self.dims, other.dims)));
        }
        Ok(())
    }

    /// Sum of elementwise products.
    pub fn scalar_product(&self, other: &Self) -> Result<f64> {
        self.same_dims(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Squared Frobenius distance `||self - other||_F^2`.
    pub fn distance_sq(&self, other: &Self) -> Result<f64> {
        self.same_dims(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| (a - b) * (a - b)).sum())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_dims(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self { dims: self.dims.clone(), data })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_dims(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self { dims: self.dims.clone(), data })
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self { dims: self.dims.clone(), data: self.data.iter().map(|v| v * factor).collect() }
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.order() {
            return Err(Error::ModeOutOfRange { mode, order: self.order() });
        }
        Ok(())
    }

    /// Mode product `self x_mode u`: contracts index `mode` against the
    /// columns of `u`, replacing `I_mode` by `u.nrows()`.
    pub fn mode_product(&self, u: &Matrix, mode: usize) -> Result<Self> {
        self.check_mode(mode)?;
        let size = self.dims[mode];
        if u.ncols() != size {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} columns, mode {mode} has size {size}",
                u.ncols()
            )));
        }
        let outer: usize = self.dims[..mode].iter().product();
        let inner: usize = self.dims[mode + 1..].iter().product();
        let rows = u.nrows();
        let mut dims = self.dims.clone();
        dims[mode] = rows;
        let mut data = vec![0.0; outer * rows * inner];
        for o in 0..outer {
            let src = &self.data[o * size * inner..(o + 1) * size * inner];
            let dst = &mut data[o * rows * inner..(o + 1) * rows * inner];
            for j in 0..rows {
                let out = &mut dst[j * inner..(j + 1) * inner];
                for i in 0..size {
                    let w = u[(j, i)];
                    if w == 0.0 {
                        continue;
                    }
                    let row = &src[i * inner..(i + 1) * inner];
                    for (d, s) in out.iter_mut().zip(row) {
                        *d += w * s;
                    }
                }
            }
        }
        Ok(Self { dims, data })
    }

    /// Applies `mats[k]` along every mode `k` except `skip` (if given).
    pub fn multi_mode_product(&self, mats: &[Matrix], skip: Option<usize>) -> Result<Self> {
        if mats.len() != self.order() {
            return Err(Error::ShapeMismatch(format!(
                "{} projection matrices for an order-{} tensor",
                mats.len(),
                self.order()
            )));
        }
        let mut out = self.clone();
        for (k, u) in mats.iter().enumerate() {
            if Some(k) == skip {
                continue;
            }
            out = out.mode_product(u, k)?;
        }
        Ok(out)
    }

    /// Mode-`mode` unfolding under the cyclic column ordering.
    pub fn unfold(&self, mode: usize) -> Result<Matrix> {
        self.check_mode(mode)?;
        let rows = self.dims[mode];
        let cols = self.len() / rows;
        let perm = column_modes(self.order(), mode);
        let weights = column_weights(&self.dims, &perm);
        let mut m = Matrix::zeros(rows, cols);
        let mut idx = vec![0usize; self.order()];
        for &v in &self.data {
            let j: usize = perm.iter().zip(&weights).map(|(&k, &w)| idx[k] * w).sum();
            m[(idx[mode], j)] = v;
            increment(&mut idx, &self.dims);
        }
        Ok(m)
    }

    /// Numerical multilinear rank: for each mode, the number of singular
    /// values of the unfolding exceeding `tol * sigma_max`.
    pub fn multilinear_rank(&self, tol: f64) -> Result<Vec<usize>> {
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!("rank tolerance must be > 0, got {tol}")));
        }
        (0..self.order())
            .map(|mode| {
                let m = self.unfold(mode)?;
                let sv = m.singular_values();
                let smax = sv.iter().cloned().fold(0.0, f64::max);
                if smax == 0.0 {
                    return Ok(0);
                }
                Ok(sv.iter().filter(|&&s| s > tol * smax).count())
            })
            .collect()
    }
}

/// Inverse of [`DenseTensor::unfold`].
pub fn fold(m: &Matrix, mode: usize, dims: &[usize]) -> Result<DenseTensor> {
    let len = check_dims(dims)?;
    if mode >= dims.len() {
        return Err(Error::ModeOutOfRange { mode, order: dims.len() });
    }
    if m.nrows() != dims[mode] || m.nrows() * m.ncols() != len {
        return Err(Error::ShapeInconsistent(format!(
            "{}x{} matrix cannot fold into {dims:?} at mode {mode}",
            m.nrows(),
            m.ncols()
        )));
    }
    let perm = column_modes(dims.len(), mode);
    let weights = column_weights(dims, &perm);
    let mut data = Vec::with_capacity(len);
    let mut idx = vec![0usize; dims.len()];
    for _ in 0..len {
        let j: usize = perm.iter().zip(&weights).map(|(&k, &w)| idx[k] * w).sum();
        data.push(m[(idx[mode], j)]);
        increment(&mut idx, dims);
    }
    Ok(DenseTensor { dims: dims.to_vec(), data })
}

/// Remaining modes in column-enumeration order, fastest first.
pub(crate) fn column_modes(order: usize, mode: usize) -> Vec<usize> {
    (1..order).map(|s| (mode + s) % order).collect()
}

fn column_weights(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let mut w = Vec::with_capacity(perm.len());
    let mut acc = 1;
    for &k in perm {
        w.push(acc);
        acc *= dims[k];
    }
    w
}

/// Row-major odometer step.
fn increment(idx: &mut [usize], dims: &[usize]) {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < dims[k] {
            return;
        }
        idx[k] = 0;
    }
}
