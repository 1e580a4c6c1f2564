//! Kernel building blocks.
//!
//! A *plan* is built once per signature and holds only structural
//! information: operators, storage formats, the chosen loop variants. At run
//! time a plan is *bound* to a concrete tree of the same signature, yielding
//! a [`BoundVec`] that enumerates `(position, value)` pairs for any position
//! range. Interior bound nodes wrap the enumeration of their children, so a
//! whole fusible tree becomes one pass over the output positions.

use std::iter::Peekable;
use std::marker::PhantomData;
use std::sync::Arc;

use crate::containers::{BitSet, MaterializedVector, Payload, Representation};
use crate::engine::mxv::build_mxv_plan;
use crate::error::{Error, Result};
use crate::expr::{AddStrategy, MultAccess, Side, Tree, TreeNode};
use crate::ops::{BinaryFn, ZipDyn, ZipFn};
use crate::types::{Elem, Idx};
use crate::{with_index_kind, with_value_kind};

pub(crate) type Entries<'a, T> = Box<dyn Iterator<Item = (usize, T)> + 'a>;

/// A plan bound to data.
pub(crate) trait BoundVec<T: Elem>: Sync {
    /// Stored entries with position in `[lo, hi)`, ascending.
    fn iter(&self, lo: usize, hi: usize) -> Entries<'_, T>;
    /// Value at `pos`, if stored.
    fn probe(&self, pos: usize) -> Option<T>;
    /// The shared value, for nodes whose entries are all equal by construction.
    fn iso(&self) -> Option<T> {
        None
    }
    /// True when every position is stored, which makes `fill` available.
    fn dense(&self) -> bool {
        false
    }
    /// Writes the values at positions `[lo, lo + out.len())`. Only called
    /// when `dense()` holds; batches avoid the per-entry iterator.
    fn fill(&self, lo: usize, out: &mut [T]) {
        for (i, v) in self.iter(lo, lo + out.len()) {
            out[i - lo] = v;
        }
    }
    /// The stored values of `[lo, hi)` when they already sit in one slice.
    fn slice(&self, _lo: usize, _hi: usize) -> Option<&[T]> {
        None
    }
}

/// Scratch block length for combining filled operands.
pub(crate) const BLOCK: usize = 512;

/// Values of `[lo, lo + n)` of a dense operand, borrowed when possible and
/// otherwise filled into `buf`.
pub(crate) fn dense_values<'s, T: Elem>(
    v: &'s dyn BoundVec<T>,
    lo: usize,
    n: usize,
    buf: &'s mut [T],
) -> &'s [T] {
    match v.slice(lo, lo + n) {
        Some(s) => s,
        None => {
            v.fill(lo, &mut buf[..n]);
            &buf[..n]
        }
    }
}

/// Fills `out` from two dense operands combined by `zip`, one block at a time.
fn fill_zip<T: Elem>(
    left: &dyn BoundVec<T>,
    right: &dyn BoundVec<T>,
    lo: usize,
    out: &mut [T],
    zip: &ZipDyn<T>,
) {
    let mut a = vec![T::default(); BLOCK.min(out.len())];
    let mut b = vec![T::default(); BLOCK.min(out.len())];
    for (k, block) in out.chunks_mut(BLOCK).enumerate() {
        let start = lo + k * BLOCK;
        let n = block.len();
        let x = dense_values(left, start, n, &mut a);
        let y = dense_values(right, start, n, &mut b);
        zip(x, y, block);
    }
}

pub(crate) trait VecPlan<T: Elem>: Send + Sync {
    fn bind<'a>(&'a self, tree: &'a Tree) -> Result<Box<dyn BoundVec<T> + 'a>>;
}

pub(crate) fn mismatch(expected: &str, tree: &Tree) -> Error {
    let found = match &tree.node {
        TreeNode::Leaf(v) => format!("leaf({}, iso={})", v.representation(), v.is_iso()),
        TreeNode::Constant(_) => "const".into(),
        TreeNode::Apply { .. } => "apply".into(),
        TreeNode::Convert { .. } => "conv".into(),
        TreeNode::EWiseMult { .. } => "mult".into(),
        TreeNode::EWiseAdd { .. } => "add".into(),
        TreeNode::MxV { .. } => "mxv".into(),
    };
    Error::SignatureMismatch {
        expected: expected.into(),
        found,
    }
}

/// Builds the plan for `tree`, whose value kind must be `T`.
pub(crate) fn build_plan<T: Elem>(tree: &Tree) -> Result<Box<dyn VecPlan<T>>> {
    debug_assert_eq!(tree.meta.kind, T::KIND);
    Ok(match &tree.node {
        TreeNode::Leaf(v) => {
            with_index_kind!(tree.meta.index_kind, I => Box::new(LeafPlan::<T, I> {
                repr: v.representation(),
                iso: v.is_iso(),
                _marker: PhantomData,
            }))
        }
        TreeNode::Constant(_) => Box::new(ConstantPlan::<T>(PhantomData)),
        TreeNode::Apply { op, base } => Box::new(MapPlan::<T, T> {
            base: build_plan::<T>(base)?,
            f: op.typed::<T>(),
            convert: false,
        }),
        TreeNode::Convert { base } => {
            with_value_kind!(base.meta.kind, U => Box::new(MapPlan::<T, U> {
                base: build_plan::<U>(base)?,
                f: Arc::new(|u: U| T::from_scalar(u.to_scalar())),
                convert: true,
            }))
        }
        TreeNode::EWiseMult {
            op,
            left,
            right,
            driver,
            access,
        } => Box::new(MultPlan::<T> {
            left: build_plan::<T>(left)?,
            right: build_plan::<T>(right)?,
            op: op.typed::<T>(),
            zip: op.typed_zip::<T>(),
            driver: *driver,
            access: *access,
        }),
        TreeNode::EWiseAdd {
            op,
            left,
            right,
            strategy,
        } => Box::new(AddPlan::<T> {
            left: build_plan::<T>(left)?,
            right: build_plan::<T>(right)?,
            op: op.typed::<T>(),
            zip: op.typed_zip::<T>(),
            strategy: *strategy,
            iso: tree.structurally_iso(),
        }),
        TreeNode::MxV {
            add,
            mul,
            matrix,
            x,
            ..
        } => build_mxv_plan::<T>(add, mul, matrix, x)?,
    })
}

// ---------------------------------------------------------------------------
// Leaves
// ---------------------------------------------------------------------------

struct LeafPlan<T, I> {
    repr: Representation,
    iso: bool,
    _marker: PhantomData<fn() -> (T, I)>,
}

impl<T: Elem, I: Idx> VecPlan<T> for LeafPlan<T, I> {
    fn bind<'a>(&'a self, tree: &'a Tree) -> Result<Box<dyn BoundVec<T> + 'a>> {
        let TreeNode::Leaf(v) = &tree.node else {
            return Err(mismatch("leaf", tree));
        };
        if v.representation() != self.repr || v.is_iso() != self.iso {
            return Err(mismatch(
                &format!("leaf({}, iso={})", self.repr, self.iso),
                tree,
            ));
        }
        bind_leaf::<T, I>(v).ok_or_else(|| mismatch("leaf of the planned kinds", tree))
    }
}

/// Binds a materialized vector directly, choosing the bound type by format.
pub(crate) fn bind_leaf<T: Elem, I: Idx>(
    v: &MaterializedVector,
) -> Option<Box<dyn BoundVec<T> + '_>> {
    let len = v.len();
    let vals = match v.payload() {
        Payload::Iso(s) => Err(T::from_scalar(*s)),
        Payload::Values(values) => Ok(T::slice(values)?),
    };
    Some(match (v, vals) {
        (MaterializedVector::Full(_), Ok(values)) => Box::new(FullBound { values }),
        (MaterializedVector::Full(_), Err(value)) => Box::new(IsoFullBound { value, len }),
        (MaterializedVector::Sparse(s), vals) => {
            let idx = I::slice(s.indices())?;
            match vals {
                Ok(values) => Box::new(SparseBound { idx, values }),
                Err(value) => Box::new(SparseIsoBound { idx, value }),
            }
        }
        (MaterializedVector::BitSet(b), vals) => match vals {
            Ok(values) => Box::new(BitSetBound {
                bits: b.present(),
                values,
            }),
            Err(value) => Box::new(BitSetIsoBound {
                bits: b.present(),
                value,
            }),
        },
    })
}

pub(crate) struct FullBound<'a, T> {
    pub values: &'a [T],
}

impl<T: Elem> BoundVec<T> for FullBound<'_, T> {
    fn iter(&self, lo: usize, hi: usize) -> Entries<'_, T> {
        Box::new(
            self.values[lo..hi]
                .iter()
                .enumerate()
                .map(move |(k, &v)| (lo + k, v)),
        )
    }

    #[inline]
    fn probe(&self, pos: usize) -> Option<T> {
        Some(self.values[pos])
    }

    fn dense(&self) -> bool {
        true
    }

    fn fill(&self, lo: usize, out: &mut [T]) {
        out.copy_from_slice(&self.values[lo..lo + out.len()]);
    }

    fn slice(&self, lo: usize, hi: usize) -> Option<&[T]> {
        Some(&self.values[lo..hi])
    }
}

pub(crate) struct IsoFullBound<T> {
    pub value: T,
    pub len: usize,
}

impl<T: Elem> BoundVec<T> for IsoFullBound<T> {
    fn iter(&self, lo: usize, hi: usize) -> Entries<'_, T> {
        let value = self.value;
        Box::new((lo..hi.min(self.len)).map(move |i| (i, value)))
    }

    #[inline]
    fn probe(&self, _pos: usize) -> Option<T> {
        Some(self.value)
    }

    fn iso(&self) -> Option<T> {
        Some(self.value)
    }

    fn dense(&self) -> bool {
        true
    }

    fn fill(&self, _lo: usize, out: &mut [T]) {
        out.fill(self.value);
    }
}

fn sparse_range<I: Idx>(idx: &[I], lo: usize, hi: usize) -> (usize, usize) {
    let start = idx.partition_point(|&i| i.to_usize() < lo);
    let end = start + idx[start..].partition_point(|&i| i.to_usize() < hi);
    (start, end)
}

struct SparseBound<'a, T, I> {
    idx: &'a [I],
    values: &'a [T],
}

impl<T: Elem, I: Idx> BoundVec<T> for SparseBound<'_, T, I> {
    fn iter(&self, lo: usize, hi: usize) -> Entries<'_, T> {
        let (s, e) = sparse_range(self.idx, lo, hi);
        Box::new(
            self.idx[s..e]
                .iter()
                .zip(&self.values[s..e])
                .map(|(&i, &v)| (i.to_usize(), v)),
        )
    }

    fn probe(&self, pos: usize) -> Option<T> {
        self.idx
            .binary_search(&I::from_usize(pos))
            .ok()
            .map(|k| self.values[k])
    }
}

struct SparseIsoBound<'a, T, I> {
    idx: &'a [I],
    value: T,
}

impl<T: Elem, I: Idx> BoundVec<T> for SparseIsoBound<'_, T, I> {
    fn iter(&self, lo: usize, hi: usize) -> Entries<'_, T> {
        let (s, e) = sparse_range(self.idx, lo, hi);
        let value = self.value;
        Box::new(self.idx[s..e].iter().map(move |&i| (i.to_usize(), value)))
    }

    fn probe(&self, pos: usize) -> Option<T> {
        self.idx
            .binary_search(&I::from_usize(pos))
            .ok()
            .map(|_| self.value)
    }

    fn iso(&self) -> Option<T> {
        Some(self.value)
    }
}

struct BitSetBound<'a, T> {
    bits: &'a BitSet,
    values: &'a [T],
}

impl<T: Elem> BoundVec<T> for BitSetBound<'_, T> {
    fn iter(&self, lo: usize, hi: usize) -> Entries<'_, T> {
        Box::new(self.bits.ones_in(lo, hi).map(|p| (p, self.values[p])))
    }

    #[inline]
    fn probe(&self, pos: usize) -> Option<T> {
        self.bits.get(pos).then(|| self.values[pos])
    }
}

struct BitSetIsoBound<'a, T> {
    bits: &'a BitSet,
    value: T,
}

impl<T: Elem> BoundVec<T> for BitSetIsoBound<'_, T> {
    fn iter(&self, lo: usize, hi: usize) -> Entries<'_, T> {
        let value = self.value;
        Box::new(self.bits.ones_in(lo, hi).map(move |p| (p, value)))
    }

    #[inline]
    fn probe(&self, pos: usize) -> Option<T> {
        self.bits.get(pos).then_some(self.value)
    }

    fn iso(&self) -> Option<T> {
        Some(self.value)
    }
}

struct ConstantPlan<T>(PhantomData<fn() -> T>);

impl<T: Elem> VecPlan<T> for ConstantPlan<T> {
    fn bind<'a>(&'a self, tree: &'a Tree) -> Result<Box<dyn BoundVec<T> + 'a>> {
        let TreeNode::Constant(value) = &tree.node else {
            return Err(mismatch("const", tree));
        };
        Ok(Box::new(IsoFullBound {
            value: T::from_scalar(*value),
            len: tree.meta.len,
        }))
    }
}

// ---------------------------------------------------------------------------
// Apply / Convert
// ---------------------------------------------------------------------------

struct MapPlan<T, U> {
    base: Box<dyn VecPlan<U>>,
    f: Arc<dyn Fn(U) -> T + Send + Sync>,
    convert: bool,
}

impl<T: Elem, U: Elem> VecPlan<T> for MapPlan<T, U> {
    fn bind<'a>(&'a self, tree: &'a Tree) -> Result<Box<dyn BoundVec<T> + 'a>> {
        let base = match (&tree.node, self.convert) {
            (TreeNode::Apply { base, .. }, false) | (TreeNode::Convert { base }, true) => base,
            _ => return Err(mismatch(if self.convert { "conv" } else { "apply" }, tree)),
        };
        Ok(Box::new(MapBound {
            base: self.base.bind(base)?,
            f: &*self.f,
        }))
    }
}

struct MapBound<'a, T, U> {
    base: Box<dyn BoundVec<U> + 'a>,
    f: &'a (dyn Fn(U) -> T + Send + Sync),
}

impl<T: Elem, U: Elem> BoundVec<T> for MapBound<'_, T, U> {
    fn iter(&self, lo: usize, hi: usize) -> Entries<'_, T> {
        let f = self.f;
        Box::new(self.base.iter(lo, hi).map(move |(i, v)| (i, f(v))))
    }

    fn probe(&self, pos: usize) -> Option<T> {
        self.base.probe(pos).map(self.f)
    }

    fn iso(&self) -> Option<T> {
        self.base.iso().map(self.f)
    }

    fn dense(&self) -> bool {
        self.base.dense()
    }

    fn fill(&self, lo: usize, out: &mut [T]) {
        let mut u = vec![U::default(); BLOCK.min(out.len())];
        for (k, block) in out.chunks_mut(BLOCK).enumerate() {
            let xs = dense_values(&*self.base, lo + k * BLOCK, block.len(), &mut u);
            for (o, &x) in block.iter_mut().zip(xs) {
                *o = (self.f)(x);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Element-wise multiplication (intersection)
// ---------------------------------------------------------------------------

struct MultPlan<T> {
    left: Box<dyn VecPlan<T>>,
    right: Box<dyn VecPlan<T>>,
    op: BinaryFn<T>,
    zip: ZipFn<T>,
    driver: Side,
    access: MultAccess,
}

impl<T: Elem> VecPlan<T> for MultPlan<T> {
    fn bind<'a>(&'a self, tree: &'a Tree) -> Result<Box<dyn BoundVec<T> + 'a>> {
        let TreeNode::EWiseMult { left, right, .. } = &tree.node else {
            return Err(mismatch("mult", tree));
        };
        Ok(Box::new(MultBound {
            left: self.left.bind(left)?,
            right: self.right.bind(right)?,
            op: &*self.op,
            zip: &*self.zip,
            driver: self.driver,
            access: self.access,
        }))
    }
}

struct MultBound<'a, T> {
    left: Box<dyn BoundVec<T> + 'a>,
    right: Box<dyn BoundVec<T> + 'a>,
    op: &'a (dyn Fn(T, T) -> T + Send + Sync),
    zip: &'a ZipDyn<T>,
    driver: Side,
    access: MultAccess,
}

impl<T: Elem> BoundVec<T> for MultBound<'_, T> {
    fn iter(&self, lo: usize, hi: usize) -> Entries<'_, T> {
        let op = self.op;
        match (self.access, self.driver) {
            (MultAccess::Probe, Side::Left) => Box::new(
                self.left
                    .iter(lo, hi)
                    .filter_map(move |(i, a)| self.right.probe(i).map(|b| (i, op(a, b)))),
            ),
            (MultAccess::Probe, Side::Right) => Box::new(
                self.right
                    .iter(lo, hi)
                    .filter_map(move |(i, b)| self.left.probe(i).map(|a| (i, op(a, b)))),
            ),
            (MultAccess::Merge, _) => Box::new(Intersect {
                a: self.left.iter(lo, hi),
                b: self.right.iter(lo, hi),
                op,
            }),
        }
    }

    fn probe(&self, pos: usize) -> Option<T> {
        let a = self.left.probe(pos)?;
        let b = self.right.probe(pos)?;
        Some((self.op)(a, b))
    }

    fn iso(&self) -> Option<T> {
        Some((self.op)(self.left.iso()?, self.right.iso()?))
    }

    fn dense(&self) -> bool {
        self.left.dense() && self.right.dense()
    }

    fn fill(&self, lo: usize, out: &mut [T]) {
        fill_zip(&*self.left, &*self.right, lo, out, self.zip);
    }
}

/// Two-cursor intersection of ascending entry streams.
struct Intersect<'a, T> {
    a: Entries<'a, T>,
    b: Entries<'a, T>,
    op: &'a (dyn Fn(T, T) -> T + Send + Sync),
}

impl<T: Elem> Iterator for Intersect<'_, T> {
    type Item = (usize, T);

    fn next(&mut self) -> Option<(usize, T)> {
        let mut x = self.a.next()?;
        let mut y = self.b.next()?;
        loop {
            if x.0 == y.0 {
                return Some((x.0, (self.op)(x.1, y.1)));
            }
            if x.0 < y.0 {
                x = self.a.next()?;
            } else {
                y = self.b.next()?;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Element-wise addition (union)
// ---------------------------------------------------------------------------

struct AddPlan<T> {
    left: Box<dyn VecPlan<T>>,
    right: Box<dyn VecPlan<T>>,
    op: BinaryFn<T>,
    zip: ZipFn<T>,
    strategy: AddStrategy,
    iso: bool,
}

impl<T: Elem> VecPlan<T> for AddPlan<T> {
    fn bind<'a>(&'a self, tree: &'a Tree) -> Result<Box<dyn BoundVec<T> + 'a>> {
        let TreeNode::EWiseAdd { left, right, .. } = &tree.node else {
            return Err(mismatch("add", tree));
        };
        Ok(Box::new(AddBound {
            left: self.left.bind(left)?,
            right: self.right.bind(right)?,
            op: &*self.op,
            zip: &*self.zip,
            strategy: self.strategy,
            iso: self.iso,
        }))
    }
}

struct AddBound<'a, T> {
    left: Box<dyn BoundVec<T> + 'a>,
    right: Box<dyn BoundVec<T> + 'a>,
    op: &'a (dyn Fn(T, T) -> T + Send + Sync),
    zip: &'a ZipDyn<T>,
    strategy: AddStrategy,
    iso: bool,
}

#[inline]
fn union_value<T: Elem>(
    op: &(dyn Fn(T, T) -> T + Send + Sync),
    a: Option<T>,
    b: Option<T>,
) -> Option<T> {
    match (a, b) {
        (Some(a), Some(b)) => Some(op(a, b)),
        (Some(a), None) => Some(a),
        (None, b) => b,
    }
}

impl<T: Elem> BoundVec<T> for AddBound<'_, T> {
    fn iter(&self, lo: usize, hi: usize) -> Entries<'_, T> {
        let op = self.op;
        match self.strategy {
            AddStrategy::DenseRange => Box::new((lo..hi).filter_map(move |i| {
                union_value(op, self.left.probe(i), self.right.probe(i)).map(|v| (i, v))
            })),
            AddStrategy::IndexMerge => Box::new(Union {
                a: self.left.iter(lo, hi).peekable(),
                b: self.right.iter(lo, hi).peekable(),
                op,
            }),
        }
    }

    fn probe(&self, pos: usize) -> Option<T> {
        union_value(self.op, self.left.probe(pos), self.right.probe(pos))
    }

    fn iso(&self) -> Option<T> {
        if !self.iso {
            return None;
        }
        Some((self.op)(self.left.iso()?, self.right.iso()?))
    }

    fn dense(&self) -> bool {
        self.left.dense() || self.right.dense()
    }

    fn fill(&self, lo: usize, out: &mut [T]) {
        let hi = lo + out.len();
        let op = self.op;
        match (self.left.dense(), self.right.dense()) {
            (true, true) => fill_zip(&*self.left, &*self.right, lo, out, self.zip),
            (true, false) => {
                self.left.fill(lo, out);
                for (i, b) in self.right.iter(lo, hi) {
                    out[i - lo] = op(out[i - lo], b);
                }
            }
            (false, true) => {
                self.right.fill(lo, out);
                for (i, a) in self.left.iter(lo, hi) {
                    out[i - lo] = op(a, out[i - lo]);
                }
            }
            (false, false) => {
                for (i, v) in self.iter(lo, hi) {
                    out[i - lo] = v;
                }
            }
        }
    }
}

/// Two-cursor ordered merge of ascending entry streams.
struct Union<'a, T> {
    a: Peekable<Entries<'a, T>>,
    b: Peekable<Entries<'a, T>>,
    op: &'a (dyn Fn(T, T) -> T + Send + Sync),
}

impl<T: Elem> Iterator for Union<'_, T> {
    type Item = (usize, T);

    fn next(&mut self) -> Option<(usize, T)> {
        match (self.a.peek(), self.b.peek()) {
            (None, None) => None,
            (Some(_), None) => self.a.next(),
            (None, Some(_)) => self.b.next(),
            (Some(x), Some(y)) => {
                if x.0 < y.0 {
                    self.a.next()
                } else if y.0 < x.0 {
                    self.b.next()
                } else {
                    let (i, a) = self.a.next()?;
                    let (_, b) = self.b.next()?;
                    Some((i, (self.op)(a, b)))
                }
            }
        }
    }
}
