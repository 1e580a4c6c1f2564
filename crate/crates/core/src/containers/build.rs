use super::{check_extent, CsrMatrix, IndexArray, Payload, SparseVector};
use crate::error::{Error, Result};
use crate::types::{Elem, IndexKind, Scalar, ValueKind};
use crate::with_value_kind;

/// How builders resolve repeated positions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DupPolicy {
    First,
    #[default]
    Last,
    Sum,
}

fn combine<T: Elem>(policy: DupPolicy, kept: T, incoming: T) -> T {
    match policy {
        DupPolicy::First => kept,
        DupPolicy::Last => incoming,
        DupPolicy::Sum => kept.add(incoming),
    }
}

/// Sorted, deduplicated sparse vector from `(position, value)` pairs.
pub fn build_vector_from_pairs(
    len: usize,
    kind: ValueKind,
    index_kind: IndexKind,
    pairs: &[(usize, Scalar)],
    dup: DupPolicy,
) -> Result<SparseVector> {
    with_value_kind!(kind, T => {
        let typed = pairs.iter().map(|&(p, s)| (p, T::from_scalar(s))).collect();
        SparseVector::from_pairs::<T>(len, index_kind, typed, dup)
    })
}

impl SparseVector {
    pub fn from_pairs<T: Elem>(
        len: usize,
        index_kind: IndexKind,
        mut pairs: Vec<(usize, T)>,
        dup: DupPolicy,
    ) -> Result<SparseVector> {
        check_extent(len, index_kind)?;
        if let Some(&(p, _)) = pairs.iter().find(|(p, _)| *p >= len) {
            return Err(Error::OutOfBounds {
                position: p,
                length: len,
            });
        }
        // stable, so First/Last refer to input order
        pairs.sort_by_key(|&(p, _)| p);
        let mut indices: Vec<usize> = Vec::with_capacity(pairs.len());
        let mut values: Vec<T> = Vec::with_capacity(pairs.len());
        for (p, v) in pairs {
            if indices.last() == Some(&p) {
                let last = values.last_mut().expect("parallel arrays");
                *last = combine(dup, *last, v);
            } else {
                indices.push(p);
                values.push(v);
            }
        }
        Ok(SparseVector::from_parts_unchecked(
            len,
            IndexArray::from_usize(index_kind, &indices),
            Payload::Values(T::wrap(values)),
        ))
    }
}

/// Row-major CSR from `(row, col, value)` triples.
pub fn build_matrix_from_triples(
    nrows: usize,
    ncols: usize,
    kind: ValueKind,
    index_kind: IndexKind,
    triples: &[(usize, usize, Scalar)],
    dup: DupPolicy,
) -> Result<CsrMatrix> {
    with_value_kind!(kind, T => {
        let typed = triples.iter().map(|&(r, c, s)| (r, c, T::from_scalar(s))).collect();
        CsrMatrix::from_triples::<T>(nrows, ncols, index_kind, typed, dup)
    })
}

impl CsrMatrix {
    pub fn from_triples<T: Elem>(
        nrows: usize,
        ncols: usize,
        index_kind: IndexKind,
        mut triples: Vec<(usize, usize, T)>,
        dup: DupPolicy,
    ) -> Result<CsrMatrix> {
        check_extent(nrows.max(ncols), index_kind)?;
        for &(r, c, _) in &triples {
            if r >= nrows {
                return Err(Error::OutOfBounds {
                    position: r,
                    length: nrows,
                });
            }
            if c >= ncols {
                return Err(Error::OutOfBounds {
                    position: c,
                    length: ncols,
                });
            }
        }
        triples.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut cols: Vec<usize> = Vec::with_capacity(triples.len());
        let mut values: Vec<T> = Vec::with_capacity(triples.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triples {
            if last == Some((r, c)) {
                let slot = values.last_mut().expect("parallel arrays");
                *slot = combine(dup, *slot, v);
                continue;
            }
            last = Some((r, c));
            row_ptr[r + 1] += 1;
            cols.push(c);
            values.push(v);
        }
        check_extent(cols.len(), index_kind)?;
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(CsrMatrix::from_parts_unchecked(
            nrows,
            ncols,
            IndexArray::from_usize(index_kind, &row_ptr),
            IndexArray::from_usize(index_kind, &cols),
            Payload::Values(T::wrap(values)),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::containers::{MaterializedVector, ValueArray};

    fn f(v: f64) -> Scalar {
        Scalar::F64(v)
    }

    #[test]
    fn vector_builder_examples() {
        let v = build_vector_from_pairs(
            4,
            ValueKind::Float64,
            IndexKind::Index32,
            &[(2, f(1.0)), (0, f(3.0))],
            DupPolicy::Last,
        )
        .unwrap();
        assert_eq!(v.indices(), &IndexArray::I32(vec![0, 2]));
        assert_eq!(
            v.payload(),
            &Payload::Values(ValueArray::F64(vec![3.0, 1.0]))
        );

        let summed = build_vector_from_pairs(
            4,
            ValueKind::Float64,
            IndexKind::Index32,
            &[(1, f(1.0)), (1, f(2.0))],
            DupPolicy::Sum,
        )
        .unwrap();
        assert_eq!(
            MaterializedVector::from(summed).entries(),
            vec![(1, f(3.0))]
        );

        let empty = build_vector_from_pairs(
            4,
            ValueKind::Float64,
            IndexKind::Index32,
            &[],
            DupPolicy::First,
        )
        .unwrap();
        assert_eq!(MaterializedVector::from(empty).nnz(), 0);
    }

    #[test]
    fn dup_first_and_last_follow_input_order() {
        let pairs = [(1, f(1.0)), (0, f(0.5)), (1, f(2.0))];
        let first = build_vector_from_pairs(
            2,
            ValueKind::Float64,
            IndexKind::Index64,
            &pairs,
            DupPolicy::First,
        )
        .unwrap();
        let last = build_vector_from_pairs(
            2,
            ValueKind::Float64,
            IndexKind::Index64,
            &pairs,
            DupPolicy::Last,
        )
        .unwrap();
        assert_eq!(
            MaterializedVector::from(first).get_entry(1).unwrap(),
            Some(f(1.0))
        );
        assert_eq!(
            MaterializedVector::from(last).get_entry(1).unwrap(),
            Some(f(2.0))
        );
    }

    #[test]
    fn vector_builder_errors() {
        assert!(matches!(
            build_vector_from_pairs(
                3,
                ValueKind::Float64,
                IndexKind::Index32,
                &[(3, f(1.0))],
                DupPolicy::Last
            ),
            Err(Error::OutOfBounds {
                position: 3,
                length: 3
            })
        ));
        assert!(matches!(
            build_vector_from_pairs(
                1 << 31,
                ValueKind::Float64,
                IndexKind::Index32,
                &[],
                DupPolicy::Last
            ),
            Err(Error::IndexOverflow { .. })
        ));
    }

    #[test]
    fn matrix_builder_examples() {
        let m = build_matrix_from_triples(
            2,
            2,
            ValueKind::Float64,
            IndexKind::Index32,
            &[(1, 0, f(1.0)), (0, 1, f(2.0))],
            DupPolicy::Last,
        )
        .unwrap();
        assert_eq!(m.row_ptr(), &IndexArray::I32(vec![0, 1, 2]));
        assert_eq!(m.col_idx(), &IndexArray::I32(vec![1, 0]));

        let empty = build_matrix_from_triples(
            2,
            2,
            ValueKind::Float64,
            IndexKind::Index32,
            &[],
            DupPolicy::Last,
        )
        .unwrap();
        assert_eq!(empty.row_ptr(), &IndexArray::I32(vec![0, 0, 0]));

        let summed = build_matrix_from_triples(
            2,
            2,
            ValueKind::Float64,
            IndexKind::Index32,
            &[(0, 0, f(1.0)), (0, 0, f(1.0))],
            DupPolicy::Sum,
        )
        .unwrap();
        assert_eq!(summed.triples(), vec![(0, 0, f(2.0))]);
    }
}
