//! LMM1 model files.
//!
//! Layout (little-endian): `"LMM1" | u32 L | per mode: u32 J, u32 I,
//! J*I f64 (U row-major), I*I f64 (W row-major) | u32 len | len bytes of
//! UTF-8 JSON metadata`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::Reader;
use crate::error::{Error, Result};
use crate::tensor::Matrix;
use crate::trainer::ProjectionStack;

pub const MODEL_MAGIC: [u8; 4] = *b"LMM1";

/// Provenance stored alongside the projections. Contains nothing
/// run-dependent so identical fits produce identical files.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub k1: usize,
    pub k2: usize,
    pub lambda: f64,
    pub mu_bar: f64,
    pub mu_decay: f64,
    pub mu_init_scale: f64,
    pub t_max: usize,
    pub rel_tol: f64,
    pub tau: Option<f64>,
    pub outer_max: usize,
    pub outer_tol: f64,
    pub seed: u64,
    pub ranks: Vec<usize>,
    pub objective_history: Vec<f64>,
    /// Training set path, used as the default neighbor pool at prediction time.
    pub train_data: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub stack: ProjectionStack,
    pub metadata: ModelMetadata,
}

fn push_row_major(out: &mut Vec<u8>, m: &Matrix) {
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            out.extend_from_slice(&m[(r, c)].to_le_bytes());
        }
    }
}

impl Model {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        out.extend_from_slice(&MODEL_MAGIC);
        out.extend_from_slice(&(self.stack.order() as u32).to_le_bytes());
        for (u, w) in self.stack.matrices().iter().zip(self.stack.grams()) {
            out.extend_from_slice(&(u.nrows() as u32).to_le_bytes());
            out.extend_from_slice(&(u.ncols() as u32).to_le_bytes());
            push_row_major(&mut out, u);
            push_row_major(&mut out, w);
        }
        let meta = serde_json::to_vec(&self.metadata)
            .map_err(|e| Error::BadModel(format!("metadata encoding: {e}")))?;
        out.extend_from_slice(&(meta.len() as u32).to_le_bytes());
        out.extend_from_slice(&meta);
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let magic = r.magic()?;
        if magic != MODEL_MAGIC {
            return Err(Error::BadMagic { expected: MODEL_MAGIC, found: magic });
        }
        let order = r.u32("order")? as usize;
        if order == 0 {
            return Err(Error::BadModel("order 0".into()));
        }
        let mut us = Vec::with_capacity(order);
        let mut ws = Vec::with_capacity(order);
        for _ in 0..order {
            let j = r.u32("rank")? as usize;
            let i = r.u32("mode size")? as usize;
            if j == 0 || i == 0 {
                return Err(Error::BadModel(format!("empty projection {j}x{i}")));
            }
            us.push(Matrix::from_row_slice(j, i, &r.f64s(j * i)?));
            ws.push(Matrix::from_row_slice(i, i, &r.f64s(i * i)?));
        }
        let len = r.u32("metadata length")? as usize;
        let meta = r.take(len, "metadata")?;
        let metadata =
            serde_json::from_slice(meta).map_err(|e| Error::BadModel(format!("metadata decoding: {e}")))?;
        if r.remaining() != 0 {
            return Err(Error::BadModel(format!("{} trailing bytes", r.remaining())));
        }
        Ok(Self { stack: ProjectionStack::from_parts(us, ws)?, metadata })
    }
}

pub fn save_model(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, model.to_bytes()?)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    Model::from_bytes(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let u0 = Matrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, -1.0, 0.5, 0.25]);
        let u1 = Matrix::from_row_slice(1, 2, &[0.5, -2.0]);
        let model = Model {
            stack: ProjectionStack::from_projections(vec![u0, u1]),
            metadata: ModelMetadata { k1: 3, ranks: vec![2, 1], lambda: 0.1, ..Default::default() },
        };
        let bytes = model.to_bytes().unwrap();
        assert_eq!(&bytes[..4], b"LMM1");
        // J then I for mode 0
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 3);
        assert_eq!(f64::from_le_bytes(bytes[16..24].try_into().unwrap()), 1.0);
        assert_eq!(f64::from_le_bytes(bytes[24..32].try_into().unwrap()), 2.0);
        assert_eq!(Model::from_bytes(&bytes).unwrap(), model);
    }

    #[test]
    fn metadata_floats_survive_exactly() {
        let history: Vec<f64> = (1..50).map(|k| 1.0 / (k as f64 * 3.7).powi(3)).collect();
        let model = Model {
            stack: ProjectionStack::from_projections(vec![Matrix::identity(2, 2)]),
            metadata: ModelMetadata { objective_history: history, lambda: 0.1 / 3.0, ..Default::default() },
        };
        assert_eq!(Model::from_bytes(&model.to_bytes().unwrap()).unwrap(), model);
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(Model::from_bytes(b"TDS1\0\0\0\0"), Err(Error::BadMagic { .. })));
        assert!(matches!(Model::from_bytes(b"LMM1\x01\0\0\0"), Err(Error::TruncatedFile(_))));
    }
}
