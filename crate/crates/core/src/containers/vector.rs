use std::fmt;

use super::{check_extent, BitSet, IndexArray, Payload, ValueArray};
use crate::error::{Error, Result};
use crate::types::{IndexKind, Scalar, ValueKind};

/// Storage format of a materialized vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Representation {
    Sparse,
    BitSet,
    Full,
}

impl Representation {
    pub fn name(self) -> &'static str {
        match self {
            Representation::Sparse => "sparse",
            Representation::BitSet => "bitset",
            Representation::Full => "full",
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Ascending positions with one value each (or one iso value).
#[derive(Clone, Debug, PartialEq)]
pub struct SparseVector {
    len: usize,
    indices: IndexArray,
    payload: Payload,
}

impl SparseVector {
    pub fn new(len: usize, indices: IndexArray, payload: Payload) -> Result<Self> {
        check_extent(len, indices.kind())?;
        if let Payload::Values(v) = &payload {
            if v.len() != indices.len() {
                return Err(Error::InvalidContainer(format!(
                    "{} values for {} indices",
                    v.len(),
                    indices.len()
                )));
            }
        }
        let mut prev: Option<usize> = None;
        for k in 0..indices.len() {
            let p = indices.get(k);
            if p >= len {
                return Err(Error::OutOfBounds {
                    position: p,
                    length: len,
                });
            }
            if prev.is_some_and(|q| q >= p) {
                return Err(Error::InvalidContainer(
                    "indices not strictly ascending".into(),
                ));
            }
            prev = Some(p);
        }
        Ok(Self {
            len,
            indices,
            payload,
        })
    }

    pub(crate) fn from_parts_unchecked(len: usize, indices: IndexArray, payload: Payload) -> Self {
        Self {
            len,
            indices,
            payload,
        }
    }

    pub fn empty(len: usize, kind: ValueKind, index_kind: IndexKind) -> Result<Self> {
        check_extent(len, index_kind)?;
        Ok(Self {
            len,
            indices: IndexArray::from_usize(index_kind, &[]),
            payload: Payload::Values(ValueArray::from_scalars(kind, &[])),
        })
    }

    pub fn indices(&self) -> &IndexArray {
        &self.indices
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }
}

/// Presence bitmap plus a dense value array.
#[derive(Clone, Debug, PartialEq)]
pub struct BitSetVector {
    index_kind: IndexKind,
    present: BitSet,
    nnz: usize,
    payload: Payload,
}

impl BitSetVector {
    pub fn new(index_kind: IndexKind, present: BitSet, payload: Payload) -> Result<Self> {
        check_extent(present.len(), index_kind)?;
        if let Payload::Values(v) = &payload {
            if v.len() != present.len() {
                return Err(Error::InvalidContainer(format!(
                    "bitset of length {} with {} dense values",
                    present.len(),
                    v.len()
                )));
            }
        }
        let nnz = present.count_ones();
        Ok(Self {
            index_kind,
            present,
            nnz,
            payload,
        })
    }

    pub(crate) fn from_parts_unchecked(
        index_kind: IndexKind,
        present: BitSet,
        nnz: usize,
        payload: Payload,
    ) -> Self {
        debug_assert_eq!(nnz, present.count_ones());
        Self {
            index_kind,
            present,
            nnz,
            payload,
        }
    }

    pub fn present(&self) -> &BitSet {
        &self.present
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }
}

/// Every position stored.
#[derive(Clone, Debug, PartialEq)]
pub struct FullVector {
    len: usize,
    index_kind: IndexKind,
    payload: Payload,
}

impl FullVector {
    pub fn new(len: usize, index_kind: IndexKind, payload: Payload) -> Result<Self> {
        check_extent(len, index_kind)?;
        if let Payload::Values(v) = &payload {
            if v.len() != len {
                return Err(Error::InvalidContainer(format!(
                    "full vector of length {len} with {} values",
                    v.len()
                )));
            }
        }
        Ok(Self {
            len,
            index_kind,
            payload,
        })
    }

    pub fn iso(len: usize, index_kind: IndexKind, value: Scalar) -> Result<Self> {
        Self::new(len, index_kind, Payload::Iso(value))
    }

    pub(crate) fn from_parts_unchecked(
        len: usize,
        index_kind: IndexKind,
        payload: Payload,
    ) -> Self {
        Self {
            len,
            index_kind,
            payload,
        }
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }
}

/// A vector in one of the three storage formats.
#[derive(Clone, Debug, PartialEq)]
pub enum MaterializedVector {
    Sparse(SparseVector),
    BitSet(BitSetVector),
    Full(FullVector),
}

impl From<SparseVector> for MaterializedVector {
    fn from(v: SparseVector) -> Self {
        MaterializedVector::Sparse(v)
    }
}

impl From<BitSetVector> for MaterializedVector {
    fn from(v: BitSetVector) -> Self {
        MaterializedVector::BitSet(v)
    }
}

impl From<FullVector> for MaterializedVector {
    fn from(v: FullVector) -> Self {
        MaterializedVector::Full(v)
    }
}

impl MaterializedVector {
    pub fn len(&self) -> usize {
        match self {
            MaterializedVector::Sparse(v) => v.len,
            MaterializedVector::BitSet(v) => v.present.len(),
            MaterializedVector::Full(v) => v.len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn nnz(&self) -> usize {
        match self {
            MaterializedVector::Sparse(v) => v.indices.len(),
            MaterializedVector::BitSet(v) => v.nnz,
            MaterializedVector::Full(v) => v.len,
        }
    }

    pub fn payload(&self) -> &Payload {
        match self {
            MaterializedVector::Sparse(v) => &v.payload,
            MaterializedVector::BitSet(v) => &v.payload,
            MaterializedVector::Full(v) => &v.payload,
        }
    }

    pub fn value_kind(&self) -> ValueKind {
        self.payload().kind()
    }

    pub fn index_kind(&self) -> IndexKind {
        match self {
            MaterializedVector::Sparse(v) => v.indices.kind(),
            MaterializedVector::BitSet(v) => v.index_kind,
            MaterializedVector::Full(v) => v.index_kind,
        }
    }

    pub fn representation(&self) -> Representation {
        match self {
            MaterializedVector::Sparse(_) => Representation::Sparse,
            MaterializedVector::BitSet(_) => Representation::BitSet,
            MaterializedVector::Full(_) => Representation::Full,
        }
    }

    pub fn is_iso(&self) -> bool {
        matches!(self.payload(), Payload::Iso(_))
    }

    pub fn iso_value(&self) -> Option<Scalar> {
        self.payload().iso_value()
    }

    /// Stored entry count over length; an empty-dimension vector counts as empty.
    pub fn fill_ratio(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.nnz() as f64 / self.len() as f64
        }
    }

    pub fn get_entry(&self, position: usize) -> Result<Option<Scalar>> {
        if position >= self.len() {
            return Err(Error::OutOfBounds {
                position,
                length: self.len(),
            });
        }
        let slot = match self {
            MaterializedVector::Sparse(v) => v.indices.search(position).ok(),
            MaterializedVector::BitSet(v) => v.present.get(position).then_some(position),
            MaterializedVector::Full(_) => Some(position),
        };
        Ok(slot.map(|k| match self.payload() {
            Payload::Iso(s) => *s,
            Payload::Values(values) => values.get(k),
        }))
    }

    /// Stored positions, ascending.
    pub fn positions(&self) -> Vec<usize> {
        match self {
            MaterializedVector::Sparse(v) => v.indices.to_usize_vec(),
            MaterializedVector::BitSet(v) => v.present.ones().collect(),
            MaterializedVector::Full(v) => (0..v.len).collect(),
        }
    }

    /// All stored `(position, value)` pairs, ascending.
    pub fn entries(&self) -> Vec<(usize, Scalar)> {
        let positions = self.positions();
        match self.payload() {
            Payload::Iso(s) => positions.into_iter().map(|p| (p, *s)).collect(),
            Payload::Values(values) => match self {
                MaterializedVector::Sparse(_) => positions
                    .into_iter()
                    .enumerate()
                    .map(|(k, p)| (p, values.get(k)))
                    .collect(),
                _ => positions.into_iter().map(|p| (p, values.get(p))).collect(),
            },
        }
    }

    /// Non-iso twin: same entries, one stored value per entry.
    pub fn expand_iso(&self) -> MaterializedVector {
        let Payload::Iso(s) = self.payload() else {
            return self.clone();
        };
        match self {
            MaterializedVector::Sparse(v) => SparseVector::from_parts_unchecked(
                v.len,
                v.indices.clone(),
                Payload::Values(ValueArray::filled(s.kind(), v.indices.len(), *s)),
            )
            .into(),
            MaterializedVector::BitSet(v) => BitSetVector::from_parts_unchecked(
                v.index_kind,
                v.present.clone(),
                v.nnz,
                Payload::Values(ValueArray::filled(s.kind(), v.present.len(), *s)),
            )
            .into(),
            MaterializedVector::Full(v) => FullVector::from_parts_unchecked(
                v.len,
                v.index_kind,
                Payload::Values(ValueArray::filled(s.kind(), v.len, *s)),
            )
            .into(),
        }
    }

    /// Re-encodes into `target`. Converting to full needs either every
    /// position present or a `fill` value for the missing ones.
    pub fn convert_representation(
        &self,
        target: Representation,
        fill: Option<Scalar>,
    ) -> Result<MaterializedVector> {
        let len = self.len();
        let kind = self.value_kind();
        let index_kind = self.index_kind();
        let positions = self.positions();
        // values aligned with `positions`
        let compact = |values: &ValueArray| match self {
            MaterializedVector::Sparse(_) => values.clone(),
            _ => values.gather(&positions),
        };
        let out: MaterializedVector = match target {
            Representation::Sparse => {
                let payload = match self.payload() {
                    Payload::Iso(s) => Payload::Iso(*s),
                    Payload::Values(v) => Payload::Values(compact(v)),
                };
                SparseVector::from_parts_unchecked(
                    len,
                    IndexArray::from_usize(index_kind, &positions),
                    payload,
                )
                .into()
            }
            Representation::BitSet => {
                let mut present = BitSet::new(len);
                for &p in &positions {
                    present.set(p);
                }
                let payload = match self.payload() {
                    Payload::Iso(s) => Payload::Iso(*s),
                    Payload::Values(v) => {
                        Payload::Values(compact(v).scatter(len, &positions, Scalar::zero(kind)))
                    }
                };
                BitSetVector::from_parts_unchecked(index_kind, present, positions.len(), payload)
                    .into()
            }
            Representation::Full => {
                let missing = len - positions.len();
                let payload = match (self.payload(), missing, fill) {
                    (Payload::Iso(s), 0, _) => Payload::Iso(*s),
                    (_, m, None) if m > 0 => return Err(Error::NotFull { missing: m }),
                    (Payload::Iso(s), _, None) => Payload::Iso(*s),
                    (Payload::Iso(s), _, Some(f)) if f.cast(kind) == *s => Payload::Iso(*s),
                    (Payload::Iso(s), _, Some(f)) => {
                        Payload::Values(ValueArray::filled(kind, positions.len(), *s).scatter(
                            len,
                            &positions,
                            f.cast(kind),
                        ))
                    }
                    (Payload::Values(v), _, f) => Payload::Values(compact(v).scatter(
                        len,
                        &positions,
                        f.unwrap_or(Scalar::zero(kind)).cast(kind),
                    )),
                };
                FullVector::from_parts_unchecked(len, index_kind, payload).into()
            }
        };
        Ok(out)
    }

    /// Checks the structural invariants of the stored format.
    pub fn validate(&self) -> Result<()> {
        match self {
            MaterializedVector::Sparse(v) => {
                SparseVector::new(v.len, v.indices.clone(), v.payload.clone()).map(|_| ())
            }
            MaterializedVector::BitSet(v) => {
                let check = BitSetVector::new(v.index_kind, v.present.clone(), v.payload.clone())?;
                if check.nnz != v.nnz {
                    return Err(Error::InvalidContainer("bitset nnz out of date".into()));
                }
                Ok(())
            }
            MaterializedVector::Full(v) => {
                FullVector::new(v.len, v.index_kind, v.payload.clone()).map(|_| ())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::containers::{build_vector_from_pairs, DupPolicy};

    fn sparse(len: usize, pairs: &[(usize, f64)]) -> MaterializedVector {
        let pairs: Vec<(usize, Scalar)> = pairs.iter().map(|&(p, v)| (p, Scalar::F64(v))).collect();
        build_vector_from_pairs(
            len,
            ValueKind::Float64,
            IndexKind::Index32,
            &pairs,
            DupPolicy::Last,
        )
        .unwrap()
        .into()
    }

    #[test]
    fn nnz_by_format() {
        assert_eq!(
            sparse(10, &[(1, 1.0), (3, 1.0), (7, 1.0), (8, 1.0)]).nnz(),
            4
        );
        let full = FullVector::new(
            5,
            IndexKind::Index32,
            Payload::Values(ValueArray::F64(vec![0.0; 5])),
        )
        .unwrap();
        assert_eq!(MaterializedVector::from(full).nnz(), 5);
        let empty = BitSetVector::new(
            IndexKind::Index32,
            BitSet::new(8),
            Payload::Values(ValueArray::F64(vec![0.0; 8])),
        )
        .unwrap();
        assert_eq!(MaterializedVector::from(empty).nnz(), 0);
    }

    #[test]
    fn get_entry_cases() {
        let v = sparse(4, &[(1, 5.0)]);
        assert_eq!(v.get_entry(1).unwrap(), Some(Scalar::F64(5.0)));
        assert_eq!(v.get_entry(0).unwrap(), None);
        assert!(matches!(v.get_entry(4), Err(Error::OutOfBounds { .. })));
        let iso: MaterializedVector = FullVector::iso(3, IndexKind::Index32, Scalar::F64(2.0))
            .unwrap()
            .into();
        assert_eq!(iso.get_entry(2).unwrap(), Some(Scalar::F64(2.0)));
    }

    #[test]
    fn convert_examples() {
        let v = sparse(2, &[(0, 1.0), (1, 2.0)]);
        let full = v
            .convert_representation(Representation::Full, None)
            .unwrap();
        assert_eq!(full.representation(), Representation::Full);
        assert_eq!(
            full.payload(),
            &Payload::Values(ValueArray::F64(vec![1.0, 2.0]))
        );
        let back = full
            .convert_representation(Representation::Sparse, None)
            .unwrap();
        assert_eq!(back, v);

        let partial = sparse(3, &[(1, 4.0)]);
        assert_eq!(
            partial.convert_representation(Representation::Full, None),
            Err(Error::NotFull { missing: 2 })
        );
        let filled = partial
            .convert_representation(Representation::Full, Some(Scalar::F64(-1.0)))
            .unwrap();
        assert_eq!(filled.entries().len(), 3);
        assert_eq!(filled.get_entry(0).unwrap(), Some(Scalar::F64(-1.0)));
    }

    #[test]
    fn iso_survives_conversion() {
        let iso: MaterializedVector =
            SparseVector::new(6, IndexArray::I32(vec![1, 4]), Payload::Iso(Scalar::I32(9)))
                .unwrap()
                .into();
        let b = iso
            .convert_representation(Representation::BitSet, None)
            .unwrap();
        assert!(b.is_iso());
        assert_eq!(b.entries(), iso.entries());
        assert_eq!(iso.expand_iso().entries(), iso.entries());
        assert!(!iso.expand_iso().is_iso());
    }

    #[test]
    fn rejects_bad_sparse() {
        assert!(SparseVector::new(
            3,
            IndexArray::I32(vec![2, 1]),
            Payload::Iso(Scalar::F32(1.0))
        )
        .is_err());
        assert!(
            SparseVector::new(3, IndexArray::I32(vec![3]), Payload::Iso(Scalar::F32(1.0))).is_err()
        );
        assert!(matches!(
            FullVector::iso(1usize << 31, IndexKind::Index32, Scalar::F32(0.0)),
            Err(Error::IndexOverflow { .. })
        ));
    }
}
