//! Execution engine: modes, signatures, the kernel cache, and fused
//! materialization.
//!
//! In nonblocking mode every method returns a lazy handle and work happens
//! only at [`Engine::wait`] or [`Engine::scalar_value`]. A wait snapshots the
//! pending tree, annotates it with estimates and loop choices, looks its
//! signature up in the kernel cache, and runs the kernel once over the output
//! positions. In blocking mode every method waits on its own result before
//! returning.

mod analyze;
mod cache;
mod kernel;
mod mxv;
mod plan;
mod signature;

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use rayon::{ThreadPool, ThreadPoolBuilder};

pub use analyze::random_access_capability;
pub use kernel::Kernel;
pub use signature::Signature;

use crate::containers::{MaterializedVector, Representation, SparseVector};
use crate::error::{Error, Result};
use crate::estimator::{EstimatorMode, EstimatorState, Thresholds};
use crate::expr::{
    self, MatrixHandle, ScalarHandle, ScalarState, ScalarTree, Tree, VectorHandle, VectorNode,
    VectorState,
};
use crate::ops::{BinaryOp, UnaryOp};
use crate::types::{IndexKind, Scalar, ValueKind};
use analyze::{annotate, capable, output_representation};
use cache::KernelCache;
use kernel::ExecCtx;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    /// Each method materializes its result before returning.
    Blocking,
    /// Methods build a lazy tree; waits materialize it.
    #[default]
    Nonblocking,
}

/// When the vector operand of a matrix-vector product is materialized
/// before the product's own kernel runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MxvBarrier {
    /// Only when the operand lacks random-access capability.
    Capability,
    /// Whenever the operand is not already a leaf or a constant. Avoids
    /// recomputing the operand once per stored matrix entry.
    #[default]
    Interior,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EngineSettings {
    pub mode: Mode,
    pub worker_count: usize,
    pub thresholds: Thresholds,
    pub estimator: EstimatorMode,
    pub mxv_barrier: MxvBarrier,
}

impl Default for EngineSettings {
    fn default() -> Self {
        EngineSettings {
            mode: Mode::Nonblocking,
            worker_count: 1,
            thresholds: Thresholds::default(),
            estimator: EstimatorMode::Naive,
            mxv_barrier: MxvBarrier::default(),
        }
    }
}

impl EngineSettings {
    pub fn new(mode: Mode, worker_count: usize) -> Self {
        EngineSettings {
            mode,
            worker_count,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.worker_count == 0 {
            return Err(Error::InvalidSettings(
                "worker_count must be at least 1".into(),
            ));
        }
        self.thresholds.validate()
    }
}

/// Snapshot of engine counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EngineStats {
    pub kernel_hits: u64,
    pub kernel_misses: u64,
    pub kernel_constructions: u64,
    pub construction_time: Duration,
    pub cached_kernels: usize,
    /// Waits that ran a kernel (vector or scalar).
    pub materializations: u64,
    /// Materialized vector containers produced by kernels.
    pub containers_allocated: u64,
    /// Vector operands materialized ahead of a matrix-vector product.
    pub barrier_materializations: u64,
}

pub struct Engine {
    settings: EngineSettings,
    cache: KernelCache,
    estimator: EstimatorState,
    pool: Option<ThreadPool>,
    materializations: AtomicU64,
    containers: AtomicU64,
    barriers: AtomicU64,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine")
            .field("settings", &self.settings)
            .field("stats", &self.stats())
            .finish()
    }
}

impl Engine {
    pub fn new(settings: EngineSettings) -> Result<Engine> {
        settings.validate()?;
        let pool = if settings.worker_count > 1 {
            let pool = ThreadPoolBuilder::new()
                .num_threads(settings.worker_count)
                .thread_name(|i| format!("fusegrb-worker-{i}"))
                .build()
                .map_err(|e| Error::InvalidSettings(format!("thread pool: {e}")))?;
            Some(pool)
        } else {
            None
        };
        Ok(Engine {
            estimator: EstimatorState::new(settings.estimator),
            settings,
            cache: KernelCache::default(),
            pool,
            materializations: AtomicU64::new(0),
            containers: AtomicU64::new(0),
            barriers: AtomicU64::new(0),
        })
    }

    pub fn blocking() -> Engine {
        Engine::new(EngineSettings::new(Mode::Blocking, 1)).expect("default settings are valid")
    }

    pub fn nonblocking() -> Engine {
        Engine::new(EngineSettings::new(Mode::Nonblocking, 1)).expect("default settings are valid")
    }

    pub fn settings(&self) -> &EngineSettings {
        &self.settings
    }

    pub fn mode(&self) -> Mode {
        self.settings.mode
    }

    pub fn stats(&self) -> EngineStats {
        EngineStats {
            kernel_hits: self.cache.hits.load(Ordering::Relaxed),
            kernel_misses: self.cache.misses.load(Ordering::Relaxed),
            kernel_constructions: self.cache.constructions.load(Ordering::Relaxed),
            construction_time: self.cache.construction_time(),
            cached_kernels: self.cache.len(),
            materializations: self.materializations.load(Ordering::Relaxed),
            containers_allocated: self.containers.load(Ordering::Relaxed),
            barrier_materializations: self.barriers.load(Ordering::Relaxed),
        }
    }

    /// Signatures of every kernel built so far, sorted.
    pub fn cached_signatures(&self) -> Vec<Signature> {
        self.cache.signatures()
    }

    fn default_parallel(&self) -> bool {
        self.settings.worker_count > 1
    }

    fn finish(&self, h: VectorHandle) -> Result<VectorHandle> {
        if self.settings.mode == Mode::Blocking {
            self.wait(&h, self.default_parallel())?;
        }
        Ok(h)
    }

    // -- methods ----------------------------------------------------------

    /// Empty sparse vector.
    pub fn new_vector(
        &self,
        len: usize,
        kind: ValueKind,
        index_kind: IndexKind,
    ) -> Result<VectorHandle> {
        Ok(VectorHandle::from_materialized(SparseVector::empty(
            len, kind, index_kind,
        )?))
    }

    /// Vector with every position holding `value`.
    pub fn new_constant_vector(
        &self,
        len: usize,
        value: impl Into<Scalar>,
        index_kind: IndexKind,
    ) -> Result<VectorHandle> {
        self.finish(expr::constant(len, value.into(), index_kind)?)
    }

    pub fn apply(&self, op: &UnaryOp, v: &VectorHandle) -> Result<VectorHandle> {
        self.finish(expr::apply(op, v)?)
    }

    pub fn ewise_mult(
        &self,
        op: &BinaryOp,
        u: &VectorHandle,
        v: &VectorHandle,
    ) -> Result<VectorHandle> {
        self.finish(expr::ewise_mult(op, u, v)?)
    }

    pub fn ewise_add(
        &self,
        op: &BinaryOp,
        u: &VectorHandle,
        v: &VectorHandle,
    ) -> Result<VectorHandle> {
        self.finish(expr::ewise_add(op, u, v)?)
    }

    pub fn mxv(
        &self,
        identity: impl Into<Scalar>,
        add: &BinaryOp,
        mul: &BinaryOp,
        a: &MatrixHandle,
        x: &VectorHandle,
    ) -> Result<VectorHandle> {
        self.finish(expr::mxv(identity.into(), add, mul, a, x)?)
    }

    pub fn convert_values(&self, target: ValueKind, v: &VectorHandle) -> Result<VectorHandle> {
        self.finish(expr::convert(target, v)?)
    }

    pub fn reduce(
        &self,
        add: &BinaryOp,
        identity: impl Into<Scalar>,
        v: &VectorHandle,
    ) -> Result<ScalarHandle> {
        let s = expr::reduce(add, identity.into(), v)?;
        if self.settings.mode == Mode::Blocking {
            self.wait_scalar(&s, self.default_parallel())?;
        }
        Ok(s)
    }

    // -- materialization --------------------------------------------------

    /// Materializes `h` in place and returns it. A no-op on materialized
    /// handles.
    pub fn wait(&self, h: &VectorHandle, parallel: bool) -> Result<VectorHandle> {
        self.materialize(h, parallel)?;
        Ok(h.clone())
    }

    /// Materializes `h` and returns its container.
    pub fn materialize(&self, h: &VectorHandle, parallel: bool) -> Result<Arc<MaterializedVector>> {
        if let Some(v) = h.materialized() {
            return Ok(v);
        }
        self.barrier(h, parallel)?;
        let mut tree = Tree::capture(h);
        if let crate::expr::TreeNode::Leaf(v) = &tree.node {
            return Ok(v.clone());
        }
        annotate(&mut tree, &self.estimator, &self.settings.thresholds);
        let repr = output_representation(&tree, &self.settings.thresholds);
        let sig = Signature::of_vector(&tree, repr);
        let kernel = self
            .cache
            .get_or_construct(&sig, || Kernel::for_vector(sig.clone(), &tree, repr))?;
        let out = kernel.run_vector(&sig, &tree, &self.ctx(parallel))?;
        self.materializations.fetch_add(1, Ordering::Relaxed);
        self.containers.fetch_add(1, Ordering::Relaxed);
        Ok(h.memoize(Arc::new(out)))
    }

    /// Reads a scalar, materializing it if needed.
    pub fn scalar_value(&self, s: &ScalarHandle) -> Result<Scalar> {
        self.wait_scalar(s, self.default_parallel())
    }

    pub fn wait_scalar(&self, s: &ScalarHandle, parallel: bool) -> Result<Scalar> {
        let node = match s.state() {
            ScalarState::Ready(v) => return Ok(v),
            ScalarState::Pending(node) => node,
        };
        self.barrier(&node.base, parallel)?;
        let mut tree = ScalarTree::capture(&node);
        annotate(&mut tree.base, &self.estimator, &self.settings.thresholds);
        let sig = Signature::of_scalar(&tree);
        let kernel = self
            .cache
            .get_or_construct(&sig, || Kernel::for_scalar(sig.clone(), &tree))?;
        let value = kernel.run_scalar(&sig, &tree, &self.ctx(parallel))?;
        self.materializations.fetch_add(1, Ordering::Relaxed);
        Ok(s.memoize(value))
    }

    fn ctx(&self, parallel: bool) -> ExecCtx<'_> {
        match (&self.pool, parallel) {
            (Some(pool), true) => ExecCtx {
                pool: Some(pool),
                chunks: self.settings.worker_count,
            },
            _ => ExecCtx {
                pool: None,
                chunks: 1,
            },
        }
    }

    /// Signature the engine would use to materialize `h` now. Materialized
    /// handles report the trivial leaf signature.
    pub fn signature_of(&self, h: &VectorHandle) -> Signature {
        let mut tree = Tree::capture(h);
        annotate(&mut tree, &self.estimator, &self.settings.thresholds);
        let repr = output_representation(&tree, &self.settings.thresholds);
        Signature::of_vector(&tree, repr)
    }

    /// Materializes the vector operands of every matrix-vector product in
    /// `h`'s tree that the barrier policy requires. Idempotent.
    pub fn force_inner_materialization(&self, h: &VectorHandle) -> Result<()> {
        self.barrier(h, self.default_parallel())
    }

    fn barrier(&self, h: &VectorHandle, parallel: bool) -> Result<()> {
        let Some(node) = h.node() else { return Ok(()) };
        match &*node {
            VectorNode::ConstantFull { .. } => Ok(()),
            VectorNode::Apply { base, .. } | VectorNode::Convert { base, .. } => {
                self.barrier(base, parallel)
            }
            VectorNode::EWiseMult { left, right, .. }
            | VectorNode::EWiseAdd { left, right, .. } => {
                self.barrier(left, parallel)?;
                self.barrier(right, parallel)
            }
            VectorNode::MxV { x, .. } => {
                self.barrier(x, parallel)?;
                if self.needs_barrier(x) {
                    self.materialize(x, parallel)?;
                    self.barriers.fetch_add(1, Ordering::Relaxed);
                }
                Ok(())
            }
        }
    }

    fn needs_barrier(&self, x: &VectorHandle) -> bool {
        match x.state() {
            VectorState::Ready(_) => false,
            VectorState::Pending(n) => match self.settings.mxv_barrier {
                MxvBarrier::Interior => !matches!(&*n, VectorNode::ConstantFull { .. }),
                MxvBarrier::Capability => !capable(&Tree::capture(x)),
            },
        }
    }
}

/// Representation a materialized result would get, for diagnostics.
pub fn planned_representation(engine: &Engine, h: &VectorHandle) -> Representation {
    let mut tree = Tree::capture(h);
    annotate(&mut tree, &engine.estimator, &engine.settings.thresholds);
    output_representation(&tree, &engine.settings.thresholds)
}

#[cfg(test)]
mod tests;
