//! Materialized storage: sparse, bitset and full vectors, CSR matrices and
//! scalars. Every container is immutable once built.

mod bitset;
mod build;
mod matrix;
mod vector;

pub use bitset::{BitSet, Ones};
pub use build::{build_matrix_from_triples, build_vector_from_pairs, DupPolicy};
pub use matrix::CsrMatrix;
pub use vector::{BitSetVector, FullVector, MaterializedVector, Representation, SparseVector};

use crate::error::{Error, Result};
use crate::types::{Elem, IndexKind, Scalar, ValueKind};
use crate::{with_index_kind, with_value_kind};

/// Typed value storage.
#[derive(Clone, Debug, PartialEq)]
pub enum ValueArray {
    F32(Vec<f32>),
    F64(Vec<f64>),
    I32(Vec<i32>),
    I64(Vec<i64>),
    Bool(Vec<bool>),
}

impl ValueArray {
    pub fn kind(&self) -> ValueKind {
        match self {
            ValueArray::F32(_) => ValueKind::Float32,
            ValueArray::F64(_) => ValueKind::Float64,
            ValueArray::I32(_) => ValueKind::Int32,
            ValueArray::I64(_) => ValueKind::Int64,
            ValueArray::Bool(_) => ValueKind::Boolean,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ValueArray::F32(v) => v.len(),
            ValueArray::F64(v) => v.len(),
            ValueArray::I32(v) => v.len(),
            ValueArray::I64(v) => v.len(),
            ValueArray::Bool(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, i: usize) -> Scalar {
        match self {
            ValueArray::F32(v) => Scalar::F32(v[i]),
            ValueArray::F64(v) => Scalar::F64(v[i]),
            ValueArray::I32(v) => Scalar::I32(v[i]),
            ValueArray::I64(v) => Scalar::I64(v[i]),
            ValueArray::Bool(v) => Scalar::Bool(v[i]),
        }
    }

    pub fn filled(kind: ValueKind, len: usize, value: Scalar) -> Self {
        with_value_kind!(kind, T => T::wrap(vec![T::from_scalar(value); len]))
    }

    /// Values from scalars, cast to `kind`.
    pub fn from_scalars(kind: ValueKind, values: &[Scalar]) -> Self {
        with_value_kind!(kind, T => T::wrap(values.iter().map(|s| T::from_scalar(*s)).collect()))
    }

    pub fn as_slice<T: Elem>(&self) -> Option<&[T]> {
        T::slice(self)
    }

    pub(crate) fn gather(&self, positions: &[usize]) -> ValueArray {
        with_value_kind!(self.kind(), T => {
            let src = T::slice(self).expect("kind checked");
            T::wrap(positions.iter().map(|&p| src[p]).collect())
        })
    }

    /// Dense array of `len` with `self[k]` placed at `positions[k]`.
    pub(crate) fn scatter(&self, len: usize, positions: &[usize], fill: Scalar) -> ValueArray {
        with_value_kind!(self.kind(), T => {
            let src = T::slice(self).expect("kind checked");
            let mut out = vec![T::from_scalar(fill); len];
            for (&p, &v) in positions.iter().zip(src) {
                out[p] = v;
            }
            T::wrap(out)
        })
    }
}

/// Typed position storage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IndexArray {
    I32(Vec<u32>),
    I64(Vec<u64>),
}

impl IndexArray {
    pub fn kind(&self) -> IndexKind {
        match self {
            IndexArray::I32(_) => IndexKind::Index32,
            IndexArray::I64(_) => IndexKind::Index64,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            IndexArray::I32(v) => v.len(),
            IndexArray::I64(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> usize {
        match self {
            IndexArray::I32(v) => v[i] as usize,
            IndexArray::I64(v) => v[i] as usize,
        }
    }

    /// Binary search for `position` in an ascending array.
    pub fn search(&self, position: usize) -> std::result::Result<usize, usize> {
        match self {
            IndexArray::I32(v) => match u32::try_from(position) {
                Ok(p) => v.binary_search(&p),
                Err(_) => Err(v.len()),
            },
            IndexArray::I64(v) => v.binary_search(&(position as u64)),
        }
    }

    pub fn to_usize_vec(&self) -> Vec<usize> {
        match self {
            IndexArray::I32(v) => v.iter().map(|&x| x as usize).collect(),
            IndexArray::I64(v) => v.iter().map(|&x| x as usize).collect(),
        }
    }

    /// Narrows or widens `positions`; caller has checked the extent.
    pub fn from_usize(kind: IndexKind, positions: &[usize]) -> Self {
        with_index_kind!(kind, I => <I as crate::types::Idx>::wrap(
            positions.iter().map(|&p| <I as crate::types::Idx>::from_usize(p)).collect()
        ))
    }
}

/// Either one value per stored entry or a single shared (iso) value.
#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    Values(ValueArray),
    Iso(Scalar),
}

impl Payload {
    pub fn kind(&self) -> ValueKind {
        match self {
            Payload::Values(v) => v.kind(),
            Payload::Iso(s) => s.kind(),
        }
    }

    pub fn iso_value(&self) -> Option<Scalar> {
        match self {
            Payload::Iso(s) => Some(*s),
            Payload::Values(_) => None,
        }
    }
}

/// The only scalar state in this subset: a present value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterializedScalar {
    pub value: Scalar,
}

pub(crate) fn check_extent(extent: usize, kind: IndexKind) -> Result<()> {
    if extent > kind.max_extent() {
        Err(Error::IndexOverflow { extent, kind })
    } else {
        Ok(())
    }
}
