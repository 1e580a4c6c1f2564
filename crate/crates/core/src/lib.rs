//! A GraphBLAS vector subset with lazy, fused execution.
//!
//! Methods on an [`Engine`] build trees of pending operations. Waiting on a
//! handle compiles the whole tree into a single-pass kernel, caches it by
//! structural signature, and runs it. See the crate README for an overview.

mod error;
mod types;

pub mod algorithms;
pub mod containers;
pub mod engine;
pub mod estimator;
pub mod expr;
pub mod ops;

pub use containers::{
    BitSetVector, CsrMatrix, DupPolicy, FullVector, MaterializedScalar, MaterializedVector,
    Representation, SparseVector,
};
pub use engine::{Engine, EngineSettings, EngineStats, Mode, MxvBarrier, Signature};
pub use error::{Error, Result};
pub use estimator::{EstimatorMode, FillEstimate, Thresholds};
pub use expr::{MatrixHandle, ScalarHandle, VectorHandle};
pub use ops::{BinaryOp, UnaryOp};
pub use types::{Elem, Idx, IndexKind, Scalar, ValueKind};
