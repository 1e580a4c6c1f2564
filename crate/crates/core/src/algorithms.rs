//! Graph algorithms written against the engine's method API.

use crate::containers::{IndexArray, Payload, SparseVector, ValueArray};
use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::expr::{MatrixHandle, ScalarHandle, VectorHandle};
use crate::ops::BinaryOp;
use crate::types::{Scalar, ValueKind};

/// Stored-entry count of every row of `a`, as an `Int64` vector. Rows with
/// no entries are left unstored.
pub fn out_degrees(a: &MatrixHandle) -> VectorHandle {
    let m = a.matrix();
    let mut idx = Vec::new();
    let mut deg = Vec::new();
    for r in 0..m.nrows() {
        let n = m.row_nnz(r);
        if n > 0 {
            idx.push(r);
            deg.push(n as i64);
        }
    }
    let v = SparseVector::from_parts_unchecked(
        m.nrows(),
        IndexArray::from_usize(m.index_kind(), &idx),
        Payload::Values(ValueArray::I64(deg)),
    );
    VectorHandle::from_materialized(v)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PageRankParams {
    /// Strictly inside (0, 1).
    pub damping: f32,
    pub tolerance: f32,
    pub itermax: usize,
    /// Passed to every explicit wait.
    pub parallel: bool,
}

impl Default for PageRankParams {
    fn default() -> Self {
        PageRankParams {
            damping: 0.85,
            tolerance: 1e-4,
            itermax: 100,
            parallel: true,
        }
    }
}

impl PageRankParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "damping {} is not inside (0, 1)",
                self.damping
            )));
        }
        // negated so NaN is rejected too
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(self.tolerance >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance {} is negative",
                self.tolerance
            )));
        }
        if self.itermax == 0 {
            return Err(Error::InvalidArgument("itermax must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct PageRankResult {
    /// Materialized `Float32` full vector.
    pub ranks: VectorHandle,
    /// Final loop counter: sweeps performed plus one.
    pub iterations: usize,
}

/// Operators used by one PageRank call.
struct Ops {
    scale: BinaryOp,
    div: BinaryOp,
    plus: BinaryOp,
    second: BinaryOp,
    abs_diff: BinaryOp,
}

impl Ops {
    fn new(damping: f32) -> Result<Ops> {
        Ok(Ops {
            scale: BinaryOp::parse(&format!("(x, y) -> max(x / {damping}, y)"))?,
            div: BinaryOp::div(),
            plus: BinaryOp::plus(),
            second: BinaryOp::parse("(_, x) -> x")?,
            abs_diff: BinaryOp::abs_diff(),
        })
    }
}

/// PageRank over the transposed adjacency matrix `at`.
///
/// Each sweep computes `r = teleport + AT * (t ./ d)` with `d` the out-degree
/// scaled by `1/damping` and floored at `1/damping`, then the L1 change
/// between sweeps. Dangling vertices are not redistributed, so ranks need
/// not sum to one.
pub fn pagerank(
    engine: &Engine,
    at: &MatrixHandle,
    out_degree: &VectorHandle,
    params: &PageRankParams,
) -> Result<PageRankResult> {
    params.validate()?;
    let n = at.nrows();
    if at.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "AT is {}x{}, not square",
            n,
            at.ncols()
        )));
    }
    if out_degree.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "out_degree has length {}, AT has {} rows",
            out_degree.len(),
            n
        )));
    }
    if at.value_kind() != ValueKind::Float32 {
        return Err(Error::KindMismatch {
            expected: ValueKind::Float32,
            found: at.value_kind(),
        });
    }
    let ik = at.index_kind();
    let ops = Ops::new(params.damping)?;
    let damping = params.damping;
    let teleport = (1.0 - damping) / n as f32;
    let par = params.parallel;

    let deg = engine.convert_values(ValueKind::Float32, out_degree)?;
    let floor = engine.new_constant_vector(n, 1.0f32 / damping, ik)?;
    let d = engine.ewise_add(&ops.scale, &deg, &floor)?;
    engine.wait(&d, par)?;

    let mut r = engine.new_constant_vector(n, 1.0f32 / n as f32, ik)?;
    let rt = engine.new_constant_vector(n, teleport, ik)?;
    let mut iter = 1usize;
    let mut rdiff = ScalarHandle::from_value(1.0f32);
    while iter <= params.itermax && residual(engine, &rdiff, par)? > params.tolerance {
        let t = r;
        r = engine.ewise_mult(&ops.div, &t, &d)?;
        r = engine.mxv(0.0f32, &ops.plus, &ops.second, at, &r)?;
        r = engine.ewise_add(&ops.plus, &rt, &r)?;
        engine.wait(&r, par)?;
        let t = engine.ewise_add(&ops.abs_diff, &t, &r)?;
        rdiff = engine.reduce(&ops.plus, 0.0f32, &t)?;
        iter += 1;
    }
    Ok(PageRankResult {
        ranks: r,
        iterations: iter,
    })
}

fn residual(engine: &Engine, s: &ScalarHandle, parallel: bool) -> Result<f32> {
    match engine.wait_scalar(s, parallel)? {
        Scalar::F32(v) => Ok(v),
        other => Ok(other.to_f64() as f32),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::containers::{CsrMatrix, DupPolicy};
    use crate::engine::{EngineSettings, Mode};
    use crate::types::IndexKind;

    fn adjacency(n: usize, edges: &[(usize, usize)]) -> CsrMatrix {
        let t = edges.iter().map(|&(u, v)| (u, v, 1.0f32)).collect();
        CsrMatrix::from_triples::<f32>(n, n, IndexKind::Index32, t, DupPolicy::Sum).unwrap()
    }

    fn ranks(r: &PageRankResult) -> Vec<f32> {
        let m = r.ranks.materialized().unwrap();
        m.entries()
            .into_iter()
            .map(|(_, s)| s.to_f64() as f32)
            .collect()
    }

    #[test]
    fn degrees() {
        let cycle = MatrixHandle::new(adjacency(3, &[(0, 1), (1, 2), (2, 0)]));
        let d = out_degrees(&cycle).materialized().unwrap();
        assert_eq!(
            d.entries(),
            vec![
                (0, Scalar::I64(1)),
                (1, Scalar::I64(1)),
                (2, Scalar::I64(1))
            ]
        );

        let empty = MatrixHandle::new(adjacency(0, &[]));
        assert_eq!(out_degrees(&empty).len(), 0);

        let star = MatrixHandle::new(adjacency(4, &[(0, 1), (0, 2), (0, 3)]));
        let d = out_degrees(&star).materialized().unwrap();
        assert_eq!(d.entries(), vec![(0, Scalar::I64(3))]);
    }

    #[test]
    fn cycle_is_uniform_in_both_modes() {
        let a = MatrixHandle::new(adjacency(3, &[(0, 1), (1, 2), (2, 0)]));
        let at = MatrixHandle::new(a.matrix().transpose());
        let deg = out_degrees(&a);
        let params = PageRankParams {
            tolerance: 1e-9,
            ..Default::default()
        };
        for mode in [Mode::Blocking, Mode::Nonblocking] {
            let e = Engine::new(EngineSettings::new(mode, 1)).unwrap();
            let r = pagerank(&e, &at, &deg, &params).unwrap();
            for x in ranks(&r) {
                assert!((x - 1.0 / 3.0).abs() < 1e-6, "{x}");
            }
        }
    }

    #[test]
    fn itermax_one_runs_one_sweep() {
        let a = MatrixHandle::new(adjacency(4, &[(0, 1), (1, 2), (2, 0), (3, 0)]));
        let at = MatrixHandle::new(a.matrix().transpose());
        let params = PageRankParams {
            itermax: 1,
            ..Default::default()
        };
        let r = pagerank(&Engine::nonblocking(), &at, &out_degrees(&a), &params).unwrap();
        assert_eq!(r.iterations, 2);
        assert!(r.ranks.is_materialized());
    }

    #[test]
    fn rejects_bad_input() {
        let a = MatrixHandle::new(adjacency(3, &[(0, 1)]));
        let e = Engine::nonblocking();
        for damping in [0.0, 1.0, -0.5] {
            let p = PageRankParams {
                damping,
                ..Default::default()
            };
            assert!(pagerank(&e, &a, &out_degrees(&a), &p).is_err());
        }
        let rect = MatrixHandle::new(
            CsrMatrix::from_triples::<f32>(2, 3, IndexKind::Index32, vec![], DupPolicy::Sum)
                .unwrap(),
        );
        assert!(matches!(
            pagerank(&e, &rect, &out_degrees(&rect), &PageRankParams::default()),
            Err(Error::DimensionMismatch(_))
        ));
        let short = out_degrees(&MatrixHandle::new(adjacency(2, &[])));
        assert!(pagerank(&e, &a, &short, &PageRankParams::default()).is_err());
    }
}
