//! Value and index kinds, the dynamically typed [`Scalar`], and the
//! [`Elem`] / [`Idx`] traits kernels are monomorphized over.

use std::fmt;

use crate::containers::{IndexArray, ValueArray};

/// Element type of a container.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ValueKind {
    Float32,
    Float64,
    Int32,
    Int64,
    Boolean,
}

impl ValueKind {
    pub const ALL: [ValueKind; 5] = [
        ValueKind::Float32,
        ValueKind::Float64,
        ValueKind::Int32,
        ValueKind::Int64,
        ValueKind::Boolean,
    ];

    pub fn is_float(self) -> bool {
        matches!(self, ValueKind::Float32 | ValueKind::Float64)
    }

    pub fn name(self) -> &'static str {
        match self {
            ValueKind::Float32 => "f32",
            ValueKind::Float64 => "f64",
            ValueKind::Int32 => "i32",
            ValueKind::Int64 => "i64",
            ValueKind::Boolean => "bool",
        }
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Integer width used for stored positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum IndexKind {
    #[default]
    Index32,
    Index64,
}

impl IndexKind {
    /// Largest dimension or entry count a container of this kind may hold.
    pub fn max_extent(self) -> usize {
        match self {
            IndexKind::Index32 => i32::MAX as usize,
            IndexKind::Index64 => i64::MAX as usize,
        }
    }

    pub fn bits(self) -> u32 {
        match self {
            IndexKind::Index32 => 32,
            IndexKind::Index64 => 64,
        }
    }

    pub fn from_bits(bits: u32) -> Option<Self> {
        match bits {
            32 => Some(IndexKind::Index32),
            64 => Some(IndexKind::Index64),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            IndexKind::Index32 => "i32",
            IndexKind::Index64 => "i64",
        }
    }
}

impl fmt::Display for IndexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A single value tagged with its kind.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Scalar {
    F32(f32),
    F64(f64),
    I32(i32),
    I64(i64),
    Bool(bool),
}

impl Scalar {
    pub fn kind(self) -> ValueKind {
        match self {
            Scalar::F32(_) => ValueKind::Float32,
            Scalar::F64(_) => ValueKind::Float64,
            Scalar::I32(_) => ValueKind::Int32,
            Scalar::I64(_) => ValueKind::Int64,
            Scalar::Bool(_) => ValueKind::Boolean,
        }
    }

    /// Casts to `kind` with the same rules as a Convert node.
    pub fn cast(self, kind: ValueKind) -> Scalar {
        match kind {
            ValueKind::Float32 => Scalar::F32(f32::from_scalar(self)),
            ValueKind::Float64 => Scalar::F64(f64::from_scalar(self)),
            ValueKind::Int32 => Scalar::I32(i32::from_scalar(self)),
            ValueKind::Int64 => Scalar::I64(i64::from_scalar(self)),
            ValueKind::Boolean => Scalar::Bool(bool::from_scalar(self)),
        }
    }

    pub fn to_f64(self) -> f64 {
        f64::from_scalar(self)
    }

    pub fn zero(kind: ValueKind) -> Scalar {
        Scalar::I64(0).cast(kind)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::F32(v) => write!(f, "{v}"),
            Scalar::F64(v) => write!(f, "{v}"),
            Scalar::I32(v) => write!(f, "{v}"),
            Scalar::I64(v) => write!(f, "{v}"),
            Scalar::Bool(v) => write!(f, "{v}"),
        }
    }
}

impl From<f32> for Scalar {
    fn from(v: f32) -> Self {
        Scalar::F32(v)
    }
}
impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar::F64(v)
    }
}
impl From<i32> for Scalar {
    fn from(v: i32) -> Self {
        Scalar::I32(v)
    }
}
impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Scalar::I64(v)
    }
}
impl From<bool> for Scalar {
    fn from(v: bool) -> Self {
        Scalar::Bool(v)
    }
}

/// Element types a kernel can be specialized for.
///
/// The arithmetic here defines the semantics of the builtin operators for
/// every kind. Integer arithmetic wraps; integer division by zero follows the
/// GraphBLAS convention (`x/0` is the kind's max for positive `x`, min for
/// negative `x`, zero for zero). Booleans use `or` for addition, `and` for
/// multiplication and `xor` for subtraction.
pub trait Elem:
    Copy + Send + Sync + PartialEq + PartialOrd + fmt::Debug + Default + 'static
{
    const KIND: ValueKind;

    fn from_scalar(s: Scalar) -> Self;
    fn to_scalar(self) -> Scalar;
    fn from_f64(v: f64) -> Self;

    fn slice(values: &ValueArray) -> Option<&[Self]>;
    fn wrap(values: Vec<Self>) -> ValueArray;

    fn add(self, other: Self) -> Self;
    fn sub(self, other: Self) -> Self;
    fn mul(self, other: Self) -> Self;
    fn div(self, other: Self) -> Self;
    fn min_of(self, other: Self) -> Self;
    fn max_of(self, other: Self) -> Self;
    fn abs_of(self) -> Self;
    fn neg_of(self) -> Self;
}

macro_rules! float_elem {
    ($t:ty, $kind:ident, $variant:ident) => {
        impl Elem for $t {
            const KIND: ValueKind = ValueKind::$kind;

            fn from_scalar(s: Scalar) -> Self {
                match s {
                    Scalar::F32(v) => v as $t,
                    Scalar::F64(v) => v as $t,
                    Scalar::I32(v) => v as $t,
                    Scalar::I64(v) => v as $t,
                    Scalar::Bool(v) => u8::from(v) as $t,
                }
            }
            fn to_scalar(self) -> Scalar {
                Scalar::$variant(self)
            }
            fn from_f64(v: f64) -> Self {
                v as $t
            }
            fn slice(values: &ValueArray) -> Option<&[Self]> {
                match values {
                    ValueArray::$variant(v) => Some(v),
                    _ => None,
                }
            }
            fn wrap(values: Vec<Self>) -> ValueArray {
                ValueArray::$variant(values)
            }
            #[inline]
            fn add(self, other: Self) -> Self {
                self + other
            }
            #[inline]
            fn sub(self, other: Self) -> Self {
                self - other
            }
            #[inline]
            fn mul(self, other: Self) -> Self {
                self * other
            }
            #[inline]
            fn div(self, other: Self) -> Self {
                self / other
            }
            #[inline]
            fn min_of(self, other: Self) -> Self {
                self.min(other)
            }
            #[inline]
            fn max_of(self, other: Self) -> Self {
                self.max(other)
            }
            #[inline]
            fn abs_of(self) -> Self {
                self.abs()
            }
            #[inline]
            fn neg_of(self) -> Self {
                -self
            }
        }
    };
}

macro_rules! int_elem {
    ($t:ty, $kind:ident, $variant:ident) => {
        impl Elem for $t {
            const KIND: ValueKind = ValueKind::$kind;

            fn from_scalar(s: Scalar) -> Self {
                match s {
                    Scalar::F32(v) => v as $t,
                    Scalar::F64(v) => v as $t,
                    Scalar::I32(v) => v as $t,
                    Scalar::I64(v) => v as $t,
                    Scalar::Bool(v) => <$t>::from(v),
                }
            }
            fn to_scalar(self) -> Scalar {
                Scalar::$variant(self)
            }
            fn from_f64(v: f64) -> Self {
                v as $t
            }
            fn slice(values: &ValueArray) -> Option<&[Self]> {
                match values {
                    ValueArray::$variant(v) => Some(v),
                    _ => None,
                }
            }
            fn wrap(values: Vec<Self>) -> ValueArray {
                ValueArray::$variant(values)
            }
            #[inline]
            fn add(self, other: Self) -> Self {
                self.wrapping_add(other)
            }
            #[inline]
            fn sub(self, other: Self) -> Self {
                self.wrapping_sub(other)
            }
            #[inline]
            fn mul(self, other: Self) -> Self {
                self.wrapping_mul(other)
            }
            #[inline]
            fn div(self, other: Self) -> Self {
                if other == 0 {
                    match self {
                        0 => 0,
                        x if x > 0 => <$t>::MAX,
                        _ => <$t>::MIN,
                    }
                } else {
                    self.wrapping_div(other)
                }
            }
            #[inline]
            fn min_of(self, other: Self) -> Self {
                Ord::min(self, other)
            }
            #[inline]
            fn max_of(self, other: Self) -> Self {
                Ord::max(self, other)
            }
            #[inline]
            fn abs_of(self) -> Self {
                self.wrapping_abs()
            }
            #[inline]
            fn neg_of(self) -> Self {
                self.wrapping_neg()
            }
        }
    };
}

float_elem!(f32, Float32, F32);
float_elem!(f64, Float64, F64);
int_elem!(i32, Int32, I32);
int_elem!(i64, Int64, I64);

impl Elem for bool {
    const KIND: ValueKind = ValueKind::Boolean;

    fn from_scalar(s: Scalar) -> Self {
        match s {
            Scalar::F32(v) => v != 0.0,
            Scalar::F64(v) => v != 0.0,
            Scalar::I32(v) => v != 0,
            Scalar::I64(v) => v != 0,
            Scalar::Bool(v) => v,
        }
    }
    fn to_scalar(self) -> Scalar {
        Scalar::Bool(self)
    }
    fn from_f64(v: f64) -> Self {
        v != 0.0
    }
    fn slice(values: &ValueArray) -> Option<&[Self]> {
        match values {
            ValueArray::Bool(v) => Some(v),
            _ => None,
        }
    }
    fn wrap(values: Vec<Self>) -> ValueArray {
        ValueArray::Bool(values)
    }
    fn add(self, other: Self) -> Self {
        self | other
    }
    fn sub(self, other: Self) -> Self {
        self ^ other
    }
    fn mul(self, other: Self) -> Self {
        self & other
    }
    // bool division is FIRST, as in GraphBLAS.
    fn div(self, _other: Self) -> Self {
        self
    }
    fn min_of(self, other: Self) -> Self {
        self & other
    }
    fn max_of(self, other: Self) -> Self {
        self | other
    }
    fn abs_of(self) -> Self {
        self
    }
    fn neg_of(self) -> Self {
        self
    }
}

/// Stored index type.
pub trait Idx: Copy + Send + Sync + Ord + fmt::Debug + 'static {
    const KIND: IndexKind;

    fn to_usize(self) -> usize;
    /// Callers guarantee `v` fits (containers validate extents up front).
    fn from_usize(v: usize) -> Self;
    fn slice(indices: &IndexArray) -> Option<&[Self]>;
    fn wrap(indices: Vec<Self>) -> IndexArray;
}

impl Idx for u32 {
    const KIND: IndexKind = IndexKind::Index32;

    #[inline]
    fn to_usize(self) -> usize {
        self as usize
    }
    #[inline]
    fn from_usize(v: usize) -> Self {
        debug_assert!(v <= u32::MAX as usize);
        v as u32
    }
    fn slice(indices: &IndexArray) -> Option<&[Self]> {
        match indices {
            IndexArray::I32(v) => Some(v),
            IndexArray::I64(_) => None,
        }
    }
    fn wrap(indices: Vec<Self>) -> IndexArray {
        IndexArray::I32(indices)
    }
}

impl Idx for u64 {
    const KIND: IndexKind = IndexKind::Index64;

    #[inline]
    fn to_usize(self) -> usize {
        self as usize
    }
    #[inline]
    fn from_usize(v: usize) -> Self {
        v as u64
    }
    fn slice(indices: &IndexArray) -> Option<&[Self]> {
        match indices {
            IndexArray::I64(v) => Some(v),
            IndexArray::I32(_) => None,
        }
    }
    fn wrap(indices: Vec<Self>) -> IndexArray {
        IndexArray::I64(indices)
    }
}

/// Calls `$body` with the type alias `$t` bound to the Rust type of `$kind`.
#[macro_export]
#[doc(hidden)]
macro_rules! with_value_kind {
    ($kind:expr, $t:ident => $body:expr) => {
        match $kind {
            $crate::ValueKind::Float32 => {
                type $t = f32;
                $body
            }
            $crate::ValueKind::Float64 => {
                type $t = f64;
                $body
            }
            $crate::ValueKind::Int32 => {
                type $t = i32;
                $body
            }
            $crate::ValueKind::Int64 => {
                type $t = i64;
                $body
            }
            $crate::ValueKind::Boolean => {
                type $t = bool;
                $body
            }
        }
    };
}

/// Same as [`with_value_kind!`] for index kinds.
#[macro_export]
#[doc(hidden)]
macro_rules! with_index_kind {
    ($kind:expr, $t:ident => $body:expr) => {
        match $kind {
            $crate::IndexKind::Index32 => {
                type $t = u32;
                $body
            }
            $crate::IndexKind::Index64 => {
                type $t = u64;
                $body
            }
        }
    };
}
