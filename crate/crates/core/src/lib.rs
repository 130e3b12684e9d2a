//! Supervised dimensionality reduction for tensor data.
//!
//! Labeled tensors are projected mode by mode, `B = A x_1 U_1 ... x_L U_L`,
//! with each `U_l` learned through its Gram matrix `W_l = U_l^T U_l`. The
//! per-mode problem combines a nuclear-norm penalty on `W_l`, a pull term on
//! same-class neighbors and a unit-margin hinge against different-class
//! neighbors. It is convex in each `W_l` and solved by fixed-point
//! continuation with eigenvalue shrinkage, so the embedding dimensionality
//! `J_l` falls out of the solve rather than being chosen up front.
//! Classification uses k-nearest neighbors under the Frobenius distance in
//! the learned subspace.
//!
//! Runnable walkthroughs live in `examples/`; `margin-tensor` is a thin
//! command-line wrapper over [`cli`].

pub mod classifier;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod gabor;
pub mod graph;
pub mod linalg;
pub mod mfpc;
pub mod model;
pub mod objective;
pub mod tensor;
pub mod trainer;

pub use classifier::{evaluate, KnnModel};
pub use dataset::{load_dataset, make_folds, save_dataset, synth_clusters, FoldPlan, LabeledDataset};
pub use error::{Error, Result};
pub use gabor::{default_bank, gabor_lift, GaborBank};
pub use graph::{build_graph, pairwise_distances, NeighborGraph};
pub use mfpc::{mfpc_solve, shrink, SolverConfig, SolverState, StepSize};
pub use model::{load_model, save_model, Model, ModelMetadata};
pub use objective::{make_context, ModeContext, TripletSet};
pub use tensor::{fold, DenseTensor, Matrix};
pub use trainer::{fit, recover_projection, transform, FitConfig, Init, ProjectionStack, TrainReport};
