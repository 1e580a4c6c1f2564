//! User-facing handles and the lazy method nodes they wrap.
//!
//! A [`VectorHandle`] holds either a materialized vector or a pending
//! [`VectorNode`]. Nodes are immutable and reference child handles, so trees
//! form a DAG. Once a handle is materialized its node is dropped and
//! downstream consumers see a leaf.

use std::fmt;
use std::sync::{Arc, RwLock};

use crate::containers::{check_extent, CsrMatrix, MaterializedVector};
use crate::error::{Error, Result};
use crate::ops::{BinaryOp, UnaryOp};
use crate::types::{IndexKind, Scalar, ValueKind};

/// One pending GraphBLAS method producing a vector.
#[derive(Debug)]
pub enum VectorNode {
    Apply {
        op: UnaryOp,
        base: VectorHandle,
    },
    EWiseMult {
        op: BinaryOp,
        left: VectorHandle,
        right: VectorHandle,
    },
    EWiseAdd {
        op: BinaryOp,
        left: VectorHandle,
        right: VectorHandle,
    },
    MxV {
        identity: Scalar,
        add: BinaryOp,
        mul: BinaryOp,
        matrix: MatrixHandle,
        x: VectorHandle,
    },
    Convert {
        target: ValueKind,
        base: VectorHandle,
    },
    ConstantFull {
        value: Scalar,
    },
}

impl VectorNode {
    pub fn name(&self) -> &'static str {
        match self {
            VectorNode::Apply { .. } => "Apply",
            VectorNode::EWiseMult { .. } => "EWiseMult",
            VectorNode::EWiseAdd { .. } => "EWiseAdd",
            VectorNode::MxV { .. } => "MxV",
            VectorNode::Convert { .. } => "Convert",
            VectorNode::ConstantFull { .. } => "ConstantFull",
        }
    }
}

/// Pending reduction to a scalar.
#[derive(Debug)]
pub struct ReduceNode {
    pub add: BinaryOp,
    pub identity: Scalar,
    pub base: VectorHandle,
}

#[derive(Clone, Debug)]
pub(crate) enum VectorState {
    Pending(Arc<VectorNode>),
    Ready(Arc<MaterializedVector>),
}

struct VectorInner {
    len: usize,
    kind: ValueKind,
    index_kind: IndexKind,
    state: RwLock<VectorState>,
}

/// A vector that is either materialized or a lazy method tree.
///
/// Cloning is cheap and yields the same logical vector.
#[derive(Clone)]
pub struct VectorHandle(Arc<VectorInner>);

impl VectorHandle {
    pub fn from_materialized(v: impl Into<MaterializedVector>) -> VectorHandle {
        let v = v.into();
        VectorHandle(Arc::new(VectorInner {
            len: v.len(),
            kind: v.value_kind(),
            index_kind: v.index_kind(),
            state: RwLock::new(VectorState::Ready(Arc::new(v))),
        }))
    }

    pub(crate) fn pending(
        len: usize,
        kind: ValueKind,
        index_kind: IndexKind,
        node: VectorNode,
    ) -> VectorHandle {
        VectorHandle(Arc::new(VectorInner {
            len,
            kind,
            index_kind,
            state: RwLock::new(VectorState::Pending(Arc::new(node))),
        }))
    }

    pub fn len(&self) -> usize {
        self.0.len
    }

    pub fn is_empty(&self) -> bool {
        self.0.len == 0
    }

    pub fn value_kind(&self) -> ValueKind {
        self.0.kind
    }

    pub fn index_kind(&self) -> IndexKind {
        self.0.index_kind
    }

    pub(crate) fn state(&self) -> VectorState {
        self.0.state.read().expect("handle lock poisoned").clone()
    }

    pub fn is_materialized(&self) -> bool {
        matches!(self.state(), VectorState::Ready(_))
    }

    /// The materialized container, if this handle has been waited on.
    pub fn materialized(&self) -> Option<Arc<MaterializedVector>> {
        match self.state() {
            VectorState::Ready(v) => Some(v),
            VectorState::Pending(_) => None,
        }
    }

    /// The pending method node, if not yet materialized.
    pub fn node(&self) -> Option<Arc<VectorNode>> {
        match self.state() {
            VectorState::Pending(n) => Some(n),
            VectorState::Ready(_) => None,
        }
    }

    /// Publishes a materialized result. The first result wins; later calls
    /// for the same handle are ignored.
    pub(crate) fn memoize(&self, v: Arc<MaterializedVector>) -> Arc<MaterializedVector> {
        let mut guard = self.0.state.write().expect("handle lock poisoned");
        match &*guard {
            VectorState::Ready(existing) => existing.clone(),
            VectorState::Pending(_) => {
                *guard = VectorState::Ready(v.clone());
                v
            }
        }
    }

    pub fn ptr_eq(&self, other: &VectorHandle) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl fmt::Debug for VectorHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let state = match self.state() {
            VectorState::Pending(n) => n.name(),
            VectorState::Ready(v) => v.representation().name(),
        };
        write!(
            f,
            "VectorHandle<{}, {}>(len={}, {state})",
            self.0.kind, self.0.index_kind, self.0.len
        )
    }
}

#[derive(Clone, Debug)]
pub(crate) enum ScalarState {
    Pending(Arc<ReduceNode>),
    Ready(Scalar),
}

struct ScalarInner {
    kind: ValueKind,
    state: RwLock<ScalarState>,
}

/// A scalar that is either a value or a pending reduction.
#[derive(Clone)]
pub struct ScalarHandle(Arc<ScalarInner>);

impl ScalarHandle {
    pub fn from_value(value: impl Into<Scalar>) -> ScalarHandle {
        let value = value.into();
        ScalarHandle(Arc::new(ScalarInner {
            kind: value.kind(),
            state: RwLock::new(ScalarState::Ready(value)),
        }))
    }

    pub(crate) fn pending(kind: ValueKind, node: ReduceNode) -> ScalarHandle {
        ScalarHandle(Arc::new(ScalarInner {
            kind,
            state: RwLock::new(ScalarState::Pending(Arc::new(node))),
        }))
    }

    pub fn value_kind(&self) -> ValueKind {
        self.0.kind
    }

    pub(crate) fn state(&self) -> ScalarState {
        self.0.state.read().expect("handle lock poisoned").clone()
    }

    pub fn is_materialized(&self) -> bool {
        matches!(self.state(), ScalarState::Ready(_))
    }

    pub(crate) fn memoize(&self, value: Scalar) -> Scalar {
        let mut guard = self.0.state.write().expect("handle lock poisoned");
        match &*guard {
            ScalarState::Ready(existing) => *existing,
            ScalarState::Pending(_) => {
                *guard = ScalarState::Ready(value);
                value
            }
        }
    }
}

impl fmt::Debug for ScalarHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.state() {
            ScalarState::Ready(v) => write!(f, "ScalarHandle({v})"),
            ScalarState::Pending(_) => write!(f, "ScalarHandle<{}>(Reduce)", self.0.kind),
        }
    }
}

/// An always-materialized CSR matrix.
#[derive(Clone, Debug)]
pub struct MatrixHandle(Arc<CsrMatrix>);

impl MatrixHandle {
    pub fn new(m: CsrMatrix) -> MatrixHandle {
        MatrixHandle(Arc::new(m))
    }

    pub fn matrix(&self) -> &Arc<CsrMatrix> {
        &self.0
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }

    pub fn value_kind(&self) -> ValueKind {
        self.0.value_kind()
    }

    pub fn index_kind(&self) -> IndexKind {
        self.0.index_kind()
    }
}

// ---------------------------------------------------------------------------
// Validated lazy constructors. The engine wraps these and adds the implicit
// wait of blocking mode.
// ---------------------------------------------------------------------------

fn same_shape(what: &str, u: &VectorHandle, v: &VectorHandle) -> Result<()> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(format!(
            "{what}: lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    if u.value_kind() != v.value_kind() {
        return Err(Error::KindMismatch {
            expected: u.value_kind(),
            found: v.value_kind(),
        });
    }
    if u.index_kind() != v.index_kind() {
        return Err(Error::IndexKindMismatch {
            expected: u.index_kind(),
            found: v.index_kind(),
        });
    }
    Ok(())
}

pub(crate) fn constant(len: usize, value: Scalar, index_kind: IndexKind) -> Result<VectorHandle> {
    check_extent(len, index_kind)?;
    Ok(VectorHandle::pending(
        len,
        value.kind(),
        index_kind,
        VectorNode::ConstantFull { value },
    ))
}

pub(crate) fn apply(op: &UnaryOp, v: &VectorHandle) -> Result<VectorHandle> {
    if op.arity() != 1 {
        return Err(Error::Arity {
            expected: 1,
            found: op.arity(),
        });
    }
    Ok(VectorHandle::pending(
        v.len(),
        v.value_kind(),
        v.index_kind(),
        VectorNode::Apply {
            op: op.clone(),
            base: v.clone(),
        },
    ))
}

pub(crate) fn ewise_mult(
    op: &BinaryOp,
    u: &VectorHandle,
    v: &VectorHandle,
) -> Result<VectorHandle> {
    same_shape("ewise_mult", u, v)?;
    Ok(VectorHandle::pending(
        u.len(),
        u.value_kind(),
        u.index_kind(),
        VectorNode::EWiseMult {
            op: op.clone(),
            left: u.clone(),
            right: v.clone(),
        },
    ))
}

pub(crate) fn ewise_add(op: &BinaryOp, u: &VectorHandle, v: &VectorHandle) -> Result<VectorHandle> {
    same_shape("ewise_add", u, v)?;
    Ok(VectorHandle::pending(
        u.len(),
        u.value_kind(),
        u.index_kind(),
        VectorNode::EWiseAdd {
            op: op.clone(),
            left: u.clone(),
            right: v.clone(),
        },
    ))
}

pub(crate) fn mxv(
    identity: Scalar,
    add: &BinaryOp,
    mul: &BinaryOp,
    a: &MatrixHandle,
    x: &VectorHandle,
) -> Result<VectorHandle> {
    if a.ncols() != x.len() {
        return Err(Error::DimensionMismatch(format!(
            "mxv: matrix has {} columns, vector has length {}",
            a.ncols(),
            x.len()
        )));
    }
    if a.value_kind() != x.value_kind() {
        return Err(Error::KindMismatch {
            expected: a.value_kind(),
            found: x.value_kind(),
        });
    }
    if a.index_kind() != x.index_kind() {
        return Err(Error::IndexKindMismatch {
            expected: a.index_kind(),
            found: x.index_kind(),
        });
    }
    Ok(VectorHandle::pending(
        a.nrows(),
        a.value_kind(),
        a.index_kind(),
        VectorNode::MxV {
            identity: identity.cast(a.value_kind()),
            add: add.clone(),
            mul: mul.clone(),
            matrix: a.clone(),
            x: x.clone(),
        },
    ))
}

pub(crate) fn convert(target: ValueKind, v: &VectorHandle) -> Result<VectorHandle> {
    Ok(VectorHandle::pending(
        v.len(),
        target,
        v.index_kind(),
        VectorNode::Convert {
            target,
            base: v.clone(),
        },
    ))
}

pub(crate) fn reduce(add: &BinaryOp, identity: Scalar, v: &VectorHandle) -> Result<ScalarHandle> {
    Ok(ScalarHandle::pending(
        v.value_kind(),
        ReduceNode {
            add: add.clone(),
            identity: identity.cast(v.value_kind()),
            base: v.clone(),
        },
    ))
}

// ---------------------------------------------------------------------------
// Snapshots
// ---------------------------------------------------------------------------

/// Which child drives an element-wise multiplication.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// How an element-wise addition walks its inputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AddStrategy {
    /// One outer loop over every position, probing both sides.
    DenseRange,
    /// Two-cursor ordered merge of the stored indices.
    IndexMerge,
}

/// How the non-driving side of an element-wise multiplication is read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MultAccess {
    Probe,
    Merge,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Meta {
    pub len: usize,
    pub kind: ValueKind,
    pub index_kind: IndexKind,
}

/// Immutable copy of a handle tree taken at materialization time, with the
/// algorithm choices the engine made for it.
#[derive(Clone, Debug)]
pub(crate) struct Tree {
    pub meta: Meta,
    pub node: TreeNode,
    /// Fill estimate of this node.
    pub fill: f64,
}

#[derive(Clone, Debug)]
pub(crate) enum TreeNode {
    Leaf(Arc<MaterializedVector>),
    Constant(Scalar),
    Apply {
        op: UnaryOp,
        base: Box<Tree>,
    },
    Convert {
        base: Box<Tree>,
    },
    EWiseMult {
        op: BinaryOp,
        left: Box<Tree>,
        right: Box<Tree>,
        driver: Side,
        access: MultAccess,
    },
    EWiseAdd {
        op: BinaryOp,
        left: Box<Tree>,
        right: Box<Tree>,
        strategy: AddStrategy,
    },
    MxV {
        identity: Scalar,
        add: BinaryOp,
        mul: BinaryOp,
        matrix: Arc<CsrMatrix>,
        x: Box<Tree>,
    },
}

impl Tree {
    /// Snapshot of `h`; decisions start at their defaults until annotated.
    pub fn capture(h: &VectorHandle) -> Tree {
        let meta = Meta {
            len: h.len(),
            kind: h.value_kind(),
            index_kind: h.index_kind(),
        };
        let node = match h.state() {
            VectorState::Ready(v) => TreeNode::Leaf(v),
            VectorState::Pending(n) => match &*n {
                VectorNode::ConstantFull { value } => TreeNode::Constant(*value),
                VectorNode::Apply { op, base } => TreeNode::Apply {
                    op: op.clone(),
                    base: Box::new(Tree::capture(base)),
                },
                VectorNode::Convert { base, .. } => TreeNode::Convert {
                    base: Box::new(Tree::capture(base)),
                },
                VectorNode::EWiseMult { op, left, right } => TreeNode::EWiseMult {
                    op: op.clone(),
                    left: Box::new(Tree::capture(left)),
                    right: Box::new(Tree::capture(right)),
                    driver: Side::Left,
                    access: MultAccess::Merge,
                },
                VectorNode::EWiseAdd { op, left, right } => TreeNode::EWiseAdd {
                    op: op.clone(),
                    left: Box::new(Tree::capture(left)),
                    right: Box::new(Tree::capture(right)),
                    strategy: AddStrategy::IndexMerge,
                },
                VectorNode::MxV {
                    identity,
                    add,
                    mul,
                    matrix,
                    x,
                } => TreeNode::MxV {
                    identity: *identity,
                    add: add.clone(),
                    mul: mul.clone(),
                    matrix: matrix.matrix().clone(),
                    x: Box::new(Tree::capture(x)),
                },
            },
        };
        Tree {
            meta,
            node,
            fill: 0.0,
        }
    }

    /// Every position is guaranteed stored, whatever the data.
    pub fn structurally_full(&self) -> bool {
        match &self.node {
            TreeNode::Leaf(v) => v.representation() == crate::Representation::Full,
            TreeNode::Constant(_) | TreeNode::MxV { .. } => true,
            TreeNode::Apply { base, .. } | TreeNode::Convert { base } => base.structurally_full(),
            TreeNode::EWiseMult { left, right, .. } => {
                left.structurally_full() && right.structurally_full()
            }
            TreeNode::EWiseAdd { left, right, .. } => {
                left.structurally_full() || right.structurally_full()
            }
        }
    }

    /// Every stored entry is guaranteed to hold the same value.
    pub fn structurally_iso(&self) -> bool {
        match &self.node {
            TreeNode::Leaf(v) => v.is_iso(),
            TreeNode::Constant(_) => true,
            TreeNode::Apply { base, .. } | TreeNode::Convert { base } => base.structurally_iso(),
            TreeNode::EWiseMult { left, right, .. } => {
                left.structurally_iso() && right.structurally_iso()
            }
            TreeNode::EWiseAdd { left, right, .. } => {
                left.structurally_iso()
                    && right.structurally_iso()
                    && left.structurally_full()
                    && right.structurally_full()
            }
            TreeNode::MxV { .. } => false,
        }
    }
}

/// Snapshot of a pending reduction.
#[derive(Clone, Debug)]
pub(crate) struct ScalarTree {
    pub add: BinaryOp,
    pub identity: Scalar,
    pub base: Tree,
}

impl ScalarTree {
    pub fn capture(node: &ReduceNode) -> ScalarTree {
        ScalarTree {
            add: node.add.clone(),
            identity: node.identity,
            base: Tree::capture(&node.base),
        }
    }
}
