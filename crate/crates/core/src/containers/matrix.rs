use super::{check_extent, IndexArray, Payload, ValueArray};
use crate::error::{Error, Result};
use crate::types::{IndexKind, Scalar, ValueKind};

/// Compressed sparse row matrix.
///
/// `row_ptr` and `col_idx` share the matrix's index width, so an `Index32`
/// matrix holds at most `i32::MAX` entries.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: IndexArray,
    col_idx: IndexArray,
    payload: Payload,
}

impl CsrMatrix {
    pub fn new(
        nrows: usize,
        ncols: usize,
        row_ptr: IndexArray,
        col_idx: IndexArray,
        payload: Payload,
    ) -> Result<Self> {
        let m = Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            payload,
        };
        m.validate()?;
        Ok(m)
    }

    pub(crate) fn from_parts_unchecked(
        nrows: usize,
        ncols: usize,
        row_ptr: IndexArray,
        col_idx: IndexArray,
        payload: Payload,
    ) -> Self {
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            payload,
        }
    }

    pub fn empty(
        nrows: usize,
        ncols: usize,
        kind: ValueKind,
        index_kind: IndexKind,
    ) -> Result<Self> {
        check_extent(nrows.max(ncols), index_kind)?;
        Ok(Self {
            nrows,
            ncols,
            row_ptr: IndexArray::from_usize(index_kind, &vec![0; nrows + 1]),
            col_idx: IndexArray::from_usize(index_kind, &[]),
            payload: Payload::Values(ValueArray::from_scalars(kind, &[])),
        })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &IndexArray {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &IndexArray {
        &self.col_idx
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    pub fn value_kind(&self) -> ValueKind {
        self.payload.kind()
    }

    pub fn index_kind(&self) -> IndexKind {
        self.col_idx.kind()
    }

    pub fn is_iso(&self) -> bool {
        matches!(self.payload, Payload::Iso(_))
    }

    pub fn fill_ratio(&self) -> f64 {
        let size = self.nrows as f64 * self.ncols as f64;
        if size == 0.0 {
            0.0
        } else {
            self.nnz() as f64 / size
        }
    }

    pub fn row_nnz(&self, row: usize) -> usize {
        self.row_ptr.get(row + 1) - self.row_ptr.get(row)
    }

    fn value_at(&self, k: usize) -> Scalar {
        match &self.payload {
            Payload::Iso(s) => *s,
            Payload::Values(v) => v.get(k),
        }
    }

    /// Stored `(col, value)` pairs of `row`.
    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, Scalar)> + '_ {
        (self.row_ptr.get(row)..self.row_ptr.get(row + 1))
            .map(move |k| (self.col_idx.get(k), self.value_at(k)))
    }

    pub fn get(&self, row: usize, col: usize) -> Result<Option<Scalar>> {
        if row >= self.nrows || col >= self.ncols {
            return Err(Error::OutOfBounds {
                position: if row >= self.nrows { row } else { col },
                length: if row >= self.nrows {
                    self.nrows
                } else {
                    self.ncols
                },
            });
        }
        Ok(self.row(row).find(|&(c, _)| c == col).map(|(_, v)| v))
    }

    /// All `(row, col, value)` triples in row-major order.
    pub fn triples(&self) -> Vec<(usize, usize, Scalar)> {
        (0..self.nrows)
            .flat_map(|r| self.row(r).map(move |(c, v)| (r, c, v)))
            .collect()
    }

    /// Transposed copy (counting sort over columns).
    pub fn transpose(&self) -> CsrMatrix {
        let nnz = self.nnz();
        let mut counts = vec![0usize; self.ncols + 1];
        for k in 0..nnz {
            counts[self.col_idx.get(k) + 1] += 1;
        }
        for c in 0..self.ncols {
            counts[c + 1] += counts[c];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut cols = vec![0usize; nnz];
        let mut perm = vec![0usize; nnz];
        for r in 0..self.nrows {
            for k in self.row_ptr.get(r)..self.row_ptr.get(r + 1) {
                let c = self.col_idx.get(k);
                let dst = next[c];
                next[c] += 1;
                cols[dst] = r;
                perm[dst] = k;
            }
        }
        let payload = match &self.payload {
            Payload::Iso(s) => Payload::Iso(*s),
            Payload::Values(v) => Payload::Values(v.gather(&perm)),
        };
        let kind = self.index_kind();
        CsrMatrix::from_parts_unchecked(
            self.ncols,
            self.nrows,
            IndexArray::from_usize(kind, &row_ptr),
            IndexArray::from_usize(kind, &cols),
            payload,
        )
    }

    /// Checks row_ptr monotonicity, bounds and in-row column order.
    pub fn validate(&self) -> Result<()> {
        let kind = self.index_kind();
        if self.row_ptr.kind() != kind {
            return Err(Error::InvalidContainer(
                "row_ptr and col_idx widths differ".into(),
            ));
        }
        check_extent(self.nrows.max(self.ncols), kind)?;
        check_extent(self.col_idx.len(), kind)?;
        if self.row_ptr.len() != self.nrows + 1 {
            return Err(Error::InvalidContainer(format!(
                "row_ptr has {} entries for {} rows",
                self.row_ptr.len(),
                self.nrows
            )));
        }
        if self.row_ptr.get(0) != 0 || self.row_ptr.get(self.nrows) != self.col_idx.len() {
            return Err(Error::InvalidContainer(
                "row_ptr does not span col_idx".into(),
            ));
        }
        if let Payload::Values(v) = &self.payload {
            if v.len() != self.col_idx.len() {
                return Err(Error::InvalidContainer(
                    "value count differs from nnz".into(),
                ));
            }
        }
        for r in 0..self.nrows {
            if self.row_ptr.get(r) > self.row_ptr.get(r + 1) {
                return Err(Error::InvalidContainer(format!(
                    "row_ptr decreases at row {r}"
                )));
            }
        }
        for r in 0..self.nrows {
            let (lo, hi) = (self.row_ptr.get(r), self.row_ptr.get(r + 1));
            let mut prev: Option<usize> = None;
            for k in lo..hi {
                let c = self.col_idx.get(k);
                if c >= self.ncols {
                    return Err(Error::OutOfBounds {
                        position: c,
                        length: self.ncols,
                    });
                }
                if prev.is_some_and(|p| p >= c) {
                    return Err(Error::InvalidContainer(format!(
                        "columns not strictly ascending in row {r}"
                    )));
                }
                prev = Some(c);
            }
        }
        Ok(())
    }
}
