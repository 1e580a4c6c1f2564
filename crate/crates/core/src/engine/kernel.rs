//! Compiled kernels: a typed plan plus the output-assembly routine for the
//! root of the tree.

use std::marker::PhantomData;

use rayon::prelude::*;
use rayon::ThreadPool;

use crate::containers::{
    BitSet, BitSetVector, FullVector, MaterializedVector, Payload, Representation, SparseVector,
};
use crate::engine::plan::{build_plan, dense_values, BoundVec, VecPlan, BLOCK};
use crate::engine::signature::Signature;
use crate::error::{Error, Result};
use crate::estimator::{preallocation_hint, FillEstimate};
use crate::expr::{ScalarTree, Tree};
use crate::ops::{BinaryFn, FoldFn};
use crate::types::{Elem, Idx, Scalar};
use crate::{with_index_kind, with_value_kind};

/// Where and how wide a kernel runs.
pub(crate) struct ExecCtx<'p> {
    pub pool: Option<&'p ThreadPool>,
    pub chunks: usize,
}

impl ExecCtx<'_> {
    fn parallel(&self) -> bool {
        self.pool.is_some() && self.chunks > 1
    }

    /// Runs `f` over the ranges, in parallel when allowed; results keep
    /// range order.
    fn map_ranges<R: Send>(
        &self,
        ranges: &[(usize, usize)],
        f: impl Fn(usize, usize, usize) -> R + Sync,
    ) -> Vec<R> {
        match self.pool {
            Some(pool) if ranges.len() > 1 => pool.install(|| {
                ranges
                    .par_iter()
                    .enumerate()
                    .map(|(c, &(lo, hi))| f(c, lo, hi))
                    .collect()
            }),
            _ => ranges
                .iter()
                .enumerate()
                .map(|(c, &(lo, hi))| f(c, lo, hi))
                .collect(),
        }
    }
}

/// Splits `[0, len)` into at most `chunks` contiguous ranges whose
/// boundaries are multiples of `align`.
pub(crate) fn chunk_ranges(len: usize, chunks: usize, align: usize) -> Vec<(usize, usize)> {
    if len == 0 {
        return Vec::new();
    }
    let size = chunk_size(len, chunks, align);
    (0..len)
        .step_by(size)
        .map(|lo| (lo, (lo + size).min(len)))
        .collect()
}

fn chunk_size(len: usize, chunks: usize, align: usize) -> usize {
    let per = len.div_ceil(chunks.max(1));
    per.div_ceil(align).max(1) * align
}

pub struct Kernel {
    signature: Signature,
    body: Body,
}

enum Body {
    Vector(Box<dyn VectorRoot>),
    Scalar(Box<dyn ScalarRoot>),
}

impl std::fmt::Debug for Kernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Kernel")
            .field("signature", &self.signature)
            .finish()
    }
}

impl Kernel {
    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    /// Compiles the kernel for an annotated vector tree.
    pub(crate) fn for_vector(
        signature: Signature,
        tree: &Tree,
        repr: Representation,
    ) -> Result<Kernel> {
        let root: Box<dyn VectorRoot> = with_value_kind!(tree.meta.kind, T => {
            with_index_kind!(tree.meta.index_kind, I => Box::new(VecRoot::<T, I> {
                plan: build_plan::<T>(tree)?,
                repr,
                iso: tree.structurally_iso(),
                full: tree.structurally_full(),
                _marker: PhantomData,
            }))
        });
        Ok(Kernel {
            signature,
            body: Body::Vector(root),
        })
    }

    pub(crate) fn for_scalar(signature: Signature, tree: &ScalarTree) -> Result<Kernel> {
        let root: Box<dyn ScalarRoot> = with_value_kind!(tree.base.meta.kind, T => Box::new(ReduceRoot::<T> {
            plan: build_plan::<T>(&tree.base)?,
            add: tree.add.typed::<T>(),
            fold: tree.add.typed_fold::<T>(),
        }));
        Ok(Kernel {
            signature,
            body: Body::Scalar(root),
        })
    }

    pub(crate) fn run_vector(
        &self,
        sig: &Signature,
        tree: &Tree,
        ctx: &ExecCtx,
    ) -> Result<MaterializedVector> {
        self.check(sig)?;
        match &self.body {
            Body::Vector(root) => root.run(tree, ctx),
            Body::Scalar(_) => Err(Error::SignatureMismatch {
                expected: "vector kernel".into(),
                found: "scalar kernel".into(),
            }),
        }
    }

    pub(crate) fn run_scalar(
        &self,
        sig: &Signature,
        tree: &ScalarTree,
        ctx: &ExecCtx,
    ) -> Result<Scalar> {
        self.check(sig)?;
        match &self.body {
            Body::Scalar(root) => root.run(tree, ctx),
            Body::Vector(_) => Err(Error::SignatureMismatch {
                expected: "scalar kernel".into(),
                found: "vector kernel".into(),
            }),
        }
    }

    fn check(&self, sig: &Signature) -> Result<()> {
        if &self.signature != sig {
            return Err(Error::SignatureMismatch {
                expected: self.signature.as_str().into(),
                found: sig.as_str().into(),
            });
        }
        Ok(())
    }
}

trait VectorRoot: Send + Sync {
    fn run(&self, tree: &Tree, ctx: &ExecCtx) -> Result<MaterializedVector>;
}

trait ScalarRoot: Send + Sync {
    fn run(&self, tree: &ScalarTree, ctx: &ExecCtx) -> Result<Scalar>;
}

struct VecRoot<T, I> {
    plan: Box<dyn VecPlan<T>>,
    repr: Representation,
    iso: bool,
    full: bool,
    _marker: PhantomData<fn() -> I>,
}

impl<T: Elem, I: Idx> VectorRoot for VecRoot<T, I> {
    fn run(&self, tree: &Tree, ctx: &ExecCtx) -> Result<MaterializedVector> {
        let bound = self.plan.bind(tree)?;
        let len = tree.meta.len;
        let ik = tree.meta.index_kind;
        let fill = FillEstimate::clamped(tree.fill);

        if self.iso {
            if let Some(value) = bound.iso() {
                let value = value.to_scalar();
                if self.full {
                    return Ok(FullVector::iso(len, ik, value)?.into());
                }
                return Ok(match self.repr {
                    Representation::Sparse => {
                        let idx = sparse_positions::<T, I>(&*bound, len, fill, ctx);
                        SparseVector::from_parts_unchecked(len, I::wrap(idx), Payload::Iso(value))
                            .into()
                    }
                    _ => {
                        let (bits, nnz) = dense_positions(&*bound, len, ctx);
                        bitset_or_full(ik, bits, nnz, Payload::Iso(value))
                    }
                });
            }
        }

        if self.full {
            let values = dense_full(&*bound, len, ctx);
            return Ok(
                FullVector::from_parts_unchecked(len, ik, Payload::Values(T::wrap(values))).into(),
            );
        }
        Ok(match self.repr {
            Representation::Sparse => {
                let (idx, vals) = sparse_entries::<T, I>(&*bound, len, fill, ctx);
                SparseVector::from_parts_unchecked(
                    len,
                    I::wrap(idx),
                    Payload::Values(T::wrap(vals)),
                )
                .into()
            }
            Representation::BitSet | Representation::Full => {
                let (values, bits, nnz) = dense_entries(&*bound, len, ctx);
                bitset_or_full(ik, bits, nnz, Payload::Values(T::wrap(values)))
            }
        })
    }
}

fn bitset_or_full(
    ik: crate::IndexKind,
    bits: BitSet,
    nnz: usize,
    payload: Payload,
) -> MaterializedVector {
    if nnz == bits.len() {
        FullVector::from_parts_unchecked(bits.len(), ik, payload).into()
    } else {
        BitSetVector::from_parts_unchecked(ik, bits, nnz, payload).into()
    }
}

/// Every position is stored: write values straight into a dense array.
fn dense_full<T: Elem>(bound: &dyn BoundVec<T>, len: usize, ctx: &ExecCtx) -> Vec<T> {
    let mut values = vec![T::default(); len];
    if len == 0 {
        return values;
    }
    let size = chunk_size(len, ctx.chunks, 64);
    let dense = bound.dense();
    let work = |(c, out): (usize, &mut [T])| {
        let lo = c * size;
        if dense {
            bound.fill(lo, out);
            return;
        }
        for (i, v) in bound.iter(lo, lo + out.len()) {
            out[i - lo] = v;
        }
    };
    match ctx.pool {
        Some(pool) if ctx.parallel() => {
            pool.install(|| values.par_chunks_mut(size).enumerate().for_each(work))
        }
        _ => values.chunks_mut(size).enumerate().for_each(work),
    }
    values
}

/// Dense values plus presence bits; chunks are word aligned so each worker
/// owns whole bitset words.
fn dense_entries<T: Elem>(
    bound: &dyn BoundVec<T>,
    len: usize,
    ctx: &ExecCtx,
) -> (Vec<T>, BitSet, usize) {
    let mut values = vec![T::default(); len];
    let mut words = vec![0u64; len.div_ceil(64)];
    if len == 0 {
        return (values, BitSet::new(0), 0);
    }
    let size = chunk_size(len, ctx.chunks, 64);
    let work = |(c, (out, w)): (usize, (&mut [T], &mut [u64]))| -> usize {
        let lo = c * size;
        let mut n = 0;
        for (i, v) in bound.iter(lo, lo + out.len()) {
            let k = i - lo;
            out[k] = v;
            w[k / 64] |= 1 << (k % 64);
            n += 1;
        }
        n
    };
    let nnz = match ctx.pool {
        Some(pool) if ctx.parallel() => pool.install(|| {
            values
                .par_chunks_mut(size)
                .zip(words.par_chunks_mut(size / 64))
                .enumerate()
                .map(work)
                .sum()
        }),
        _ => values
            .chunks_mut(size)
            .zip(words.chunks_mut(size / 64))
            .enumerate()
            .map(work)
            .sum(),
    };
    let bits = BitSet::from_words(words, len).expect("bits only set below len");
    (values, bits, nnz)
}

fn dense_positions<T: Elem>(bound: &dyn BoundVec<T>, len: usize, ctx: &ExecCtx) -> (BitSet, usize) {
    let mut words = vec![0u64; len.div_ceil(64)];
    if len == 0 {
        return (BitSet::new(0), 0);
    }
    let size = chunk_size(len, ctx.chunks, 64);
    let work = |(c, w): (usize, &mut [u64])| -> usize {
        let lo = c * size;
        let hi = (lo + size).min(len);
        let mut n = 0;
        for (i, _) in bound.iter(lo, hi) {
            let k = i - lo;
            w[k / 64] |= 1 << (k % 64);
            n += 1;
        }
        n
    };
    let nnz = match ctx.pool {
        Some(pool) if ctx.parallel() => {
            pool.install(|| words.par_chunks_mut(size / 64).enumerate().map(work).sum())
        }
        _ => words.chunks_mut(size / 64).enumerate().map(work).sum(),
    };
    (
        BitSet::from_words(words, len).expect("bits only set below len"),
        nnz,
    )
}

fn sparse_entries<T: Elem, I: Idx>(
    bound: &dyn BoundVec<T>,
    len: usize,
    fill: FillEstimate,
    ctx: &ExecCtx,
) -> (Vec<I>, Vec<T>) {
    let ranges = chunk_ranges(len, ctx.chunks, 1);
    let parts = ctx.map_ranges(&ranges, |_, lo, hi| {
        let cap = preallocation_hint(fill, hi - lo);
        let mut idx = Vec::with_capacity(cap);
        let mut vals = Vec::with_capacity(cap);
        for (i, v) in bound.iter(lo, hi) {
            idx.push(I::from_usize(i));
            vals.push(v);
        }
        (idx, vals)
    });
    if parts.len() == 1 {
        return parts.into_iter().next().expect("one part");
    }
    let total = parts.iter().map(|p| p.0.len()).sum();
    let mut idx = Vec::with_capacity(total);
    let mut vals = Vec::with_capacity(total);
    for (i, v) in parts {
        idx.extend(i);
        vals.extend(v);
    }
    (idx, vals)
}

fn sparse_positions<T: Elem, I: Idx>(
    bound: &dyn BoundVec<T>,
    len: usize,
    fill: FillEstimate,
    ctx: &ExecCtx,
) -> Vec<I> {
    let ranges = chunk_ranges(len, ctx.chunks, 1);
    let parts = ctx.map_ranges(&ranges, |_, lo, hi| {
        let mut idx = Vec::with_capacity(preallocation_hint(fill, hi - lo));
        idx.extend(bound.iter(lo, hi).map(|(i, _)| I::from_usize(i)));
        idx
    });
    parts.concat()
}

struct ReduceRoot<T> {
    plan: Box<dyn VecPlan<T>>,
    add: BinaryFn<T>,
    fold: FoldFn<T>,
}

impl<T: Elem> ScalarRoot for ReduceRoot<T> {
    fn run(&self, tree: &ScalarTree, ctx: &ExecCtx) -> Result<Scalar> {
        let bound = self.plan.bind(&tree.base)?;
        let identity = T::from_scalar(tree.identity);
        let add = &*self.add;
        let ranges = chunk_ranges(tree.base.meta.len, ctx.chunks, 1);
        // The first chunk folds from the identity; later chunks fold from
        // their own first entry so the identity enters exactly once.
        let dense = bound.dense();
        let partials = ctx.map_ranges(&ranges, |c, lo, hi| {
            if dense {
                return Some(fold_dense(&*bound, lo, hi, c == 0, identity, &*self.fold));
            }
            let mut it = bound.iter(lo, hi);
            let start = if c == 0 { identity } else { it.next()?.1 };
            Some(it.fold(start, |acc, (_, v)| add(acc, v)))
        });
        let mut acc = identity;
        for (c, p) in partials.into_iter().enumerate() {
            match (c, p) {
                (0, Some(p)) => acc = p,
                (_, Some(p)) => acc = add(acc, p),
                _ => {}
            }
        }
        Ok(acc.to_scalar())
    }
}

/// Folds a dense range block by block, in position order, so the result
/// matches folding the entry iterator.
fn fold_dense<T: Elem>(
    bound: &dyn BoundVec<T>,
    lo: usize,
    hi: usize,
    from_identity: bool,
    identity: T,
    fold: &(dyn Fn(T, &[T]) -> T + Send + Sync),
) -> T {
    if let Some(xs) = bound.slice(lo, hi) {
        return match from_identity {
            true => fold(identity, xs),
            false => fold(xs[0], &xs[1..]),
        };
    }
    let mut buf = vec![T::default(); BLOCK.min(hi - lo)];
    let mut acc = from_identity.then_some(identity);
    let mut start = lo;
    while start < hi {
        let n = BLOCK.min(hi - start);
        let xs = dense_values(bound, start, n, &mut buf);
        acc = Some(match acc {
            Some(a) => fold(a, xs),
            None => fold(xs[0], &xs[1..]),
        });
        start += n;
    }
    acc.unwrap_or(identity)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_cover_and_align() {
        assert!(chunk_ranges(0, 4, 64).is_empty());
        assert_eq!(chunk_ranges(10, 1, 1), vec![(0, 10)]);
        assert_eq!(chunk_ranges(10, 3, 1), vec![(0, 4), (4, 8), (8, 10)]);
        let r = chunk_ranges(1000, 4, 64);
        assert_eq!(r, vec![(0, 256), (256, 512), (512, 768), (768, 1000)]);
        assert_eq!(chunk_ranges(5, 8, 64), vec![(0, 5)]);
    }
}
