//! Row-wise matrix-vector product, `w(i) = add_k mul(A(i,k), x(k))`.
//!
//! Built-in semiring operators are compiled into the row loop; user lambdas
//! go through a shared closure. The `x` operand is read densely when it is a
//! full leaf, as a single value when it is iso, and through `probe`
//! otherwise.

use std::marker::PhantomData;

use crate::containers::{CsrMatrix, Payload, Representation};
use crate::engine::plan::{build_plan, mismatch, BoundVec, Entries, VecPlan};
use crate::error::Result;
use crate::expr::{Tree, TreeNode};
use crate::ops::{BinaryFn, BinaryOp, BuiltinBinary};
use crate::types::{Elem, Idx};
use crate::with_index_kind;

pub(crate) trait Op2<T>: Send + Sync + 'static {
    fn call(&self, a: T, b: T) -> T;
}

macro_rules! builtin_op2 {
    ($name:ident, |$a:ident, $b:ident| $body:expr) => {
        struct $name;
        impl<T: Elem> Op2<T> for $name {
            #[inline(always)]
            fn call(&self, $a: T, $b: T) -> T {
                $body
            }
        }
    };
}

builtin_op2!(PlusOp, |a, b| a.add(b));
builtin_op2!(MinOp, |a, b| a.min_of(b));
builtin_op2!(MaxOp, |a, b| a.max_of(b));
builtin_op2!(TimesOp, |a, b| a.mul(b));
builtin_op2!(FirstOp, |a, _b| a);
builtin_op2!(SecondOp, |_a, b| b);

struct DynOp<T>(BinaryFn<T>);

impl<T: Elem> Op2<T> for DynOp<T> {
    #[inline]
    fn call(&self, a: T, b: T) -> T {
        (self.0)(a, b)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum XMode {
    Dense,
    Iso,
    Probe,
}

fn x_mode(x: &Tree) -> XMode {
    match &x.node {
        TreeNode::Leaf(v) if v.representation() == Representation::Full && !v.is_iso() => {
            XMode::Dense
        }
        _ if x.structurally_iso() && x.structurally_full() => XMode::Iso,
        _ => XMode::Probe,
    }
}

pub(crate) fn build_mxv_plan<T: Elem>(
    add: &BinaryOp,
    mul: &BinaryOp,
    matrix: &CsrMatrix,
    x: &Tree,
) -> Result<Box<dyn VecPlan<T>>> {
    let shape = Shape {
        a_iso: matrix.is_iso(),
        x_mode: x_mode(x),
    };
    let x_plan = build_plan::<T>(x)?;
    Ok(
        with_index_kind!(matrix.index_kind(), I => match add.builtin() {
            Some(BuiltinBinary::Plus) => pick_mul::<T, I, _>(PlusOp, mul, shape, x_plan),
            Some(BuiltinBinary::Min) => pick_mul::<T, I, _>(MinOp, mul, shape, x_plan),
            Some(BuiltinBinary::Max) => pick_mul::<T, I, _>(MaxOp, mul, shape, x_plan),
            _ => pick_mul::<T, I, _>(DynOp(add.typed::<T>()), mul, shape, x_plan),
        }),
    )
}

#[derive(Clone, Copy)]
struct Shape {
    a_iso: bool,
    x_mode: XMode,
}

fn pick_mul<T: Elem, I: Idx, A: Op2<T>>(
    add: A,
    mul: &BinaryOp,
    shape: Shape,
    x_plan: Box<dyn VecPlan<T>>,
) -> Box<dyn VecPlan<T>> {
    fn make<T: Elem, I: Idx, A: Op2<T>, M: Op2<T>>(
        add: A,
        mul: M,
        shape: Shape,
        x_plan: Box<dyn VecPlan<T>>,
    ) -> Box<dyn VecPlan<T>> {
        Box::new(MxvPlan::<T, I, A, M> {
            add,
            mul,
            shape,
            x_plan,
            _marker: PhantomData,
        })
    }
    match mul.builtin() {
        Some(BuiltinBinary::Times) => make::<T, I, A, _>(add, TimesOp, shape, x_plan),
        Some(BuiltinBinary::Second) => make::<T, I, A, _>(add, SecondOp, shape, x_plan),
        Some(BuiltinBinary::First) => make::<T, I, A, _>(add, FirstOp, shape, x_plan),
        Some(BuiltinBinary::Plus) => make::<T, I, A, _>(add, PlusOp, shape, x_plan),
        _ => make::<T, I, A, _>(add, DynOp(mul.typed::<T>()), shape, x_plan),
    }
}

struct MxvPlan<T, I, A, M> {
    add: A,
    mul: M,
    shape: Shape,
    x_plan: Box<dyn VecPlan<T>>,
    _marker: PhantomData<fn() -> I>,
}

impl<T: Elem, I: Idx, A: Op2<T>, M: Op2<T>> VecPlan<T> for MxvPlan<T, I, A, M> {
    fn bind<'a>(&'a self, tree: &'a Tree) -> Result<Box<dyn BoundVec<T> + 'a>> {
        let TreeNode::MxV {
            identity,
            matrix,
            x,
            ..
        } = &tree.node
        else {
            return Err(mismatch("mxv", tree));
        };
        if x_mode(x) != self.shape.x_mode || matrix.is_iso() != self.shape.a_iso {
            return Err(mismatch("mxv operands of the planned formats", tree));
        }
        let (Some(row_ptr), Some(col_idx)) =
            (I::slice(matrix.row_ptr()), I::slice(matrix.col_idx()))
        else {
            return Err(mismatch("mxv index width", tree));
        };
        let a = match matrix.payload() {
            Payload::Iso(s) => AVals::Iso(T::from_scalar(*s)),
            Payload::Values(v) => {
                AVals::Arr(T::slice(v).ok_or_else(|| mismatch("mxv value kind", tree))?)
            }
        };
        let x_bound = self.x_plan.bind(x)?;
        let xs = match self.shape.x_mode {
            XMode::Dense => match &x.node {
                TreeNode::Leaf(v) => match v.payload() {
                    Payload::Values(vals) => {
                        XAcc::Dense(T::slice(vals).ok_or_else(|| mismatch("dense x", tree))?)
                    }
                    Payload::Iso(_) => return Err(mismatch("dense x", tree)),
                },
                _ => return Err(mismatch("dense x", tree)),
            },
            XMode::Iso => XAcc::Iso(x_bound.iso().ok_or_else(|| mismatch("iso x", tree))?),
            XMode::Probe => XAcc::Probe,
        };
        Ok(Box::new(MxvBound {
            plan: self,
            identity: T::from_scalar(*identity),
            row_ptr,
            col_idx,
            a,
            xs,
            x: x_bound,
        }))
    }
}

enum AVals<'a, T> {
    Iso(T),
    Arr(&'a [T]),
}

enum XAcc<'a, T> {
    Dense(&'a [T]),
    Iso(T),
    Probe,
}

struct MxvBound<'a, T, I, A, M> {
    plan: &'a MxvPlan<T, I, A, M>,
    identity: T,
    row_ptr: &'a [I],
    col_idx: &'a [I],
    a: AVals<'a, T>,
    xs: XAcc<'a, T>,
    x: Box<dyn BoundVec<T> + 'a>,
}

impl<T: Elem, I: Idx, A: Op2<T>, M: Op2<T>> MxvBound<'_, T, I, A, M> {
    #[inline]
    fn row(&self, i: usize) -> T {
        let (s, e) = (self.row_ptr[i].to_usize(), self.row_ptr[i + 1].to_usize());
        let cols = &self.col_idx[s..e];
        let (add, mul) = (&self.plan.add, &self.plan.mul);
        let mut acc = self.identity;
        match (&self.a, &self.xs) {
            (AVals::Arr(av), XAcc::Dense(xv)) => {
                for (&c, &a) in cols.iter().zip(&av[s..e]) {
                    acc = add.call(acc, mul.call(a, xv[c.to_usize()]));
                }
            }
            (AVals::Iso(a), XAcc::Dense(xv)) => {
                for &c in cols {
                    acc = add.call(acc, mul.call(*a, xv[c.to_usize()]));
                }
            }
            (AVals::Arr(av), XAcc::Iso(x)) => {
                for &a in &av[s..e] {
                    acc = add.call(acc, mul.call(a, *x));
                }
            }
            (AVals::Iso(a), XAcc::Iso(x)) => {
                let term = mul.call(*a, *x);
                for _ in s..e {
                    acc = add.call(acc, term);
                }
            }
            (a, XAcc::Probe) => {
                for (k, &c) in cols.iter().enumerate() {
                    if let Some(xv) = self.x.probe(c.to_usize()) {
                        let av = match a {
                            AVals::Iso(v) => *v,
                            AVals::Arr(av) => av[s + k],
                        };
                        acc = add.call(acc, mul.call(av, xv));
                    }
                }
            }
        }
        acc
    }
}

impl<T: Elem, I: Idx, A: Op2<T>, M: Op2<T>> BoundVec<T> for MxvBound<'_, T, I, A, M> {
    fn iter(&self, lo: usize, hi: usize) -> Entries<'_, T> {
        Box::new((lo..hi).map(move |i| (i, self.row(i))))
    }

    fn probe(&self, pos: usize) -> Option<T> {
        Some(self.row(pos))
    }

    fn dense(&self) -> bool {
        true
    }

    fn fill(&self, lo: usize, out: &mut [T]) {
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.row(lo + k);
        }
    }
}
