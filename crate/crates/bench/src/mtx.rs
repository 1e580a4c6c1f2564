//! Matrix Market coordinate files.
//!
//! Reading produces the transposed adjacency matrix `AT` (an edge `u -> v`
//! is stored at `AT[v, u]`) together with the out-degree vector of the
//! original matrix, which is what PageRank consumes.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use fusegrb::containers::IndexArray;
use fusegrb::{CsrMatrix, DupPolicy, IndexKind, MatrixHandle, VectorHandle};

use crate::error::BenchError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    Real,
    Integer,
    Pattern,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    General,
    Symmetric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Header {
    pub field: Field,
    pub symmetry: Symmetry,
}

/// A loaded graph, ready for PageRank.
#[derive(Clone, Debug)]
pub struct Graph {
    pub at: MatrixHandle,
    pub out_degree: VectorHandle,
}

impl Graph {
    pub fn n(&self) -> usize {
        self.at.nrows()
    }

    pub fn nnz(&self) -> usize {
        self.at.matrix().nnz()
    }

    /// Builds the graph from `u -> v` edge triples. Repeated edges are summed.
    pub fn from_edges(
        nrows: usize,
        ncols: usize,
        index_kind: IndexKind,
        edges: impl IntoIterator<Item = (usize, usize, f32)>,
    ) -> Result<Graph, BenchError> {
        let transposed: Vec<_> = edges.into_iter().map(|(u, v, w)| (v, u, w)).collect();
        let at =
            CsrMatrix::from_triples::<f32>(ncols, nrows, index_kind, transposed, DupPolicy::Sum)?;
        // out-degree of u in A is the stored count of column u in AT
        let mut degree = vec![0i64; nrows];
        for c in at.col_idx().to_usize_vec() {
            degree[c] += 1;
        }
        let (idx, deg): (Vec<usize>, Vec<i64>) = degree
            .into_iter()
            .enumerate()
            .filter(|&(_, d)| d > 0)
            .unzip();
        let out_degree = fusegrb::SparseVector::new(
            nrows,
            IndexArray::from_usize(index_kind, &idx),
            fusegrb::containers::Payload::Values(fusegrb::containers::ValueArray::I64(deg)),
        )?;
        Ok(Graph {
            at: MatrixHandle::new(at),
            out_degree: VectorHandle::from_materialized(out_degree),
        })
    }
}

fn parse_header(line: &str) -> Result<Header, BenchError> {
    let bad = |msg: &str| BenchError::Parse {
        line: 1,
        message: msg.to_string(),
    };
    let words: Vec<String> = line
        .split_whitespace()
        .map(|w| w.to_ascii_lowercase())
        .collect();
    if words.len() != 5
        || words[0] != "%%matrixmarket"
        || words[1] != "matrix"
        || words[2] != "coordinate"
    {
        return Err(bad(
            "expected '%%MatrixMarket matrix coordinate <field> <symmetry>'",
        ));
    }
    let field = match words[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        other => return Err(bad(&format!("unsupported field '{other}'"))),
    };
    let symmetry = match words[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(bad(&format!("unsupported symmetry '{other}'"))),
    };
    Ok(Header { field, symmetry })
}

pub fn read_matrix_market_file(
    path: impl AsRef<Path>,
    index_kind: IndexKind,
) -> Result<Graph, BenchError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| BenchError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    read_matrix_market(BufReader::new(file), index_kind)
}

pub fn read_matrix_market(reader: impl Read, index_kind: IndexKind) -> Result<Graph, BenchError> {
    let reader = BufReader::new(reader);
    let mut lines = reader.lines().enumerate();
    let io = |e| BenchError::Io {
        path: "<input>".into(),
        source: e,
    };

    let header = match lines.next() {
        Some((_, l)) => parse_header(&l.map_err(io)?)?,
        None => {
            return Err(BenchError::Parse {
                line: 1,
                message: "empty file".into(),
            })
        }
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut edges: Vec<(usize, usize, f32)> = Vec::new();
    for (k, line) in lines {
        let lineno = k + 1;
        let line = line.map_err(io)?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let perr = |m: String| BenchError::Parse {
            line: lineno,
            message: m,
        };
        let mut it = t.split_whitespace();
        let mut num = |what: &str| -> Result<usize, BenchError> {
            let w = it.next().ok_or_else(|| perr(format!("missing {what}")))?;
            w.parse::<usize>()
                .map_err(|_| perr(format!("bad {what} '{w}'")))
        };
        match size {
            None => {
                let (r, c, nnz) = (num("row count")?, num("column count")?, num("entry count")?);
                let max = index_kind.max_extent();
                if r > max || c > max {
                    return Err(fusegrb::Error::IndexOverflow {
                        extent: r.max(c),
                        kind: index_kind,
                    }
                    .into());
                }
                size = Some((r, c, nnz));
                let expect = if header.symmetry == Symmetry::Symmetric {
                    2 * nnz
                } else {
                    nnz
                };
                edges.reserve(expect.min(1 << 28));
            }
            Some((nr, nc, _)) => {
                let (i, j) = (num("row index")?, num("column index")?);
                if i == 0 || j == 0 || i > nr || j > nc {
                    return Err(perr(format!(
                        "entry ({i}, {j}) outside the declared {nr}x{nc}"
                    )));
                }
                let w = match header.field {
                    Field::Pattern => 1.0,
                    Field::Real | Field::Integer => {
                        let w = it.next().ok_or_else(|| perr("missing value".into()))?;
                        w.parse::<f64>()
                            .map_err(|_| perr(format!("bad value '{w}'")))?
                            as f32
                    }
                };
                let (u, v) = (i - 1, j - 1);
                edges.push((u, v, w));
                if header.symmetry == Symmetry::Symmetric && u != v {
                    edges.push((v, u, w));
                }
            }
        }
    }
    let (nr, nc, _) = size.ok_or_else(|| BenchError::Parse {
        line: 0,
        message: "missing size line".into(),
    })?;
    let max = index_kind.max_extent();
    if edges.len() > max {
        return Err(fusegrb::Error::IndexOverflow {
            extent: edges.len(),
            kind: index_kind,
        }
        .into());
    }
    Graph::from_edges(nr, nc, index_kind, edges)
}

/// Writes `m` as a general real coordinate file, one entry per stored value.
pub fn write_matrix_market(m: &CsrMatrix, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", m.nrows(), m.ncols(), m.nnz())?;
    for (r, c, v) in m.triples() {
        writeln!(out, "{} {} {}", r + 1, c + 1, v.to_f64())?;
    }
    Ok(())
}

/// Writes a `u -> v` edge list as a general pattern file.
pub fn write_edges(n: usize, edges: &[(usize, usize)], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate pattern general")?;
    writeln!(out, "{n} {n} {}", edges.len())?;
    for &(u, v) in edges {
        writeln!(out, "{} {}", u + 1, v + 1)?;
    }
    Ok(())
}
