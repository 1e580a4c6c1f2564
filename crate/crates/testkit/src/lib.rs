//! Test support for fusegrb: random method trees, a dense eager reference
//! evaluator, and a dense PageRank oracle.
//!
//! The reference evaluator works on `Vec<Option<Scalar>>` and shares only
//! operator evaluation with the library under test. Container formats,
//! loop strategies, fusion and caching are all bypassed.

use std::sync::Arc;

use fusegrb::containers::{BitSet, Payload, ValueArray};
use fusegrb::{
    BinaryOp, BitSetVector, CsrMatrix, DupPolicy, Engine, FullVector, IndexKind,
    MaterializedVector, MatrixHandle, Representation, Result, Scalar, ScalarHandle, SparseVector,
    UnaryOp, ValueKind, VectorHandle,
};
use rand::seq::SliceRandom;
use rand::Rng;

pub type Dense = Vec<Option<Scalar>>;

/// Fill ratios leaves are drawn from.
pub const FILLS: [f64; 4] = [0.0, 0.1, 0.5, 1.0];

#[derive(Clone, Debug)]
pub enum Node {
    Leaf {
        dense: Dense,
        container: Arc<MaterializedVector>,
    },
    Constant {
        len: usize,
        value: Scalar,
    },
    Apply {
        op: UnaryOp,
        base: Box<Node>,
    },
    Convert {
        target: ValueKind,
        base: Box<Node>,
    },
    Mult {
        op: BinaryOp,
        left: Box<Node>,
        right: Box<Node>,
    },
    Add {
        op: BinaryOp,
        left: Box<Node>,
        right: Box<Node>,
    },
    MxV {
        identity: Scalar,
        add: BinaryOp,
        mul: BinaryOp,
        matrix: Arc<CsrMatrix>,
        x: Box<Node>,
    },
}

/// A vector tree or a reduction over one.
#[derive(Clone, Debug)]
pub enum Case {
    Vector(Node),
    Reduce {
        add: BinaryOp,
        identity: Scalar,
        base: Node,
    },
}

impl Node {
    pub fn len(&self) -> usize {
        match self {
            Node::Leaf { dense, .. } => dense.len(),
            Node::Constant { len, .. } => *len,
            Node::Apply { base, .. } | Node::Convert { base, .. } => base.len(),
            Node::Mult { left, .. } | Node::Add { left, .. } => left.len(),
            Node::MxV { matrix, .. } => matrix.nrows(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kinds(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        self.visit(&mut |n| {
            out.push(match n {
                Node::Leaf { container, .. } => {
                    match (container.representation(), container.is_iso()) {
                        (_, true) => "leaf-iso",
                        (Representation::Sparse, _) => "leaf-sparse",
                        (Representation::BitSet, _) => "leaf-bitset",
                        (Representation::Full, _) => "leaf-full",
                    }
                }
                Node::Constant { .. } => "constant",
                Node::Apply { .. } => "apply",
                Node::Convert { .. } => "convert",
                Node::Mult { .. } => "ewise-mult",
                Node::Add { .. } => "ewise-add",
                Node::MxV { .. } => "mxv",
            })
        });
        out
    }

    fn visit(&self, f: &mut dyn FnMut(&Node)) {
        f(self);
        match self {
            Node::Leaf { .. } | Node::Constant { .. } => {}
            Node::Apply { base, .. } | Node::Convert { base, .. } => base.visit(f),
            Node::Mult { left, right, .. } | Node::Add { left, right, .. } => {
                left.visit(f);
                right.visit(f);
            }
            Node::MxV { x, .. } => x.visit(f),
        }
    }

    /// Builds the lazy handle tree through `engine`.
    pub fn build(&self, engine: &Engine, index_kind: IndexKind) -> Result<VectorHandle> {
        Ok(match self {
            Node::Leaf { container, .. } => VectorHandle::from_materialized((**container).clone()),
            Node::Constant { len, value } => {
                engine.new_constant_vector(*len, *value, index_kind)?
            }
            Node::Apply { op, base } => engine.apply(op, &base.build(engine, index_kind)?)?,
            Node::Convert { target, base } => {
                engine.convert_values(*target, &base.build(engine, index_kind)?)?
            }
            Node::Mult { op, left, right } => engine.ewise_mult(
                op,
                &left.build(engine, index_kind)?,
                &right.build(engine, index_kind)?,
            )?,
            Node::Add { op, left, right } => engine.ewise_add(
                op,
                &left.build(engine, index_kind)?,
                &right.build(engine, index_kind)?,
            )?,
            Node::MxV {
                identity,
                add,
                mul,
                matrix,
                x,
            } => engine.mxv(
                *identity,
                add,
                mul,
                &MatrixHandle::new((**matrix).clone()),
                &x.build(engine, index_kind)?,
            )?,
        })
    }

    /// Eager dense evaluation.
    pub fn reference(&self) -> Dense {
        match self {
            Node::Leaf { dense, .. } => dense.clone(),
            Node::Constant { len, value } => vec![Some(*value); *len],
            Node::Apply { op, base } => base
                .reference()
                .into_iter()
                .map(|v| v.map(|v| op.call_scalar(v)))
                .collect(),
            Node::Convert { target, base } => base
                .reference()
                .into_iter()
                .map(|v| v.map(|v| v.cast(*target)))
                .collect(),
            Node::Mult { op, left, right } => left
                .reference()
                .into_iter()
                .zip(right.reference())
                .map(|(a, b)| match (a, b) {
                    (Some(a), Some(b)) => Some(op.call_scalar(a, b)),
                    _ => None,
                })
                .collect(),
            Node::Add { op, left, right } => left
                .reference()
                .into_iter()
                .zip(right.reference())
                .map(|(a, b)| match (a, b) {
                    (Some(a), Some(b)) => Some(op.call_scalar(a, b)),
                    (a, None) => a,
                    (None, b) => b,
                })
                .collect(),
            Node::MxV {
                identity,
                add,
                mul,
                matrix,
                x,
            } => {
                let xs = x.reference();
                (0..matrix.nrows())
                    .map(|i| {
                        let mut acc = *identity;
                        for (c, a) in matrix.row(i) {
                            if let Some(xv) = xs[c] {
                                acc = add.call_scalar(acc, mul.call_scalar(a, xv));
                            }
                        }
                        Some(acc)
                    })
                    .collect()
            }
        }
    }
}

impl Case {
    pub fn root(&self) -> &Node {
        match self {
            Case::Vector(n) => n,
            Case::Reduce { base, .. } => base,
        }
    }

    pub fn reference(&self) -> Dense {
        match self {
            Case::Vector(n) => n.reference(),
            Case::Reduce {
                add,
                identity,
                base,
            } => {
                let folded = base
                    .reference()
                    .into_iter()
                    .flatten()
                    .fold(*identity, |acc, v| add.call_scalar(acc, v));
                vec![Some(folded)]
            }
        }
    }

    /// Materializes through `engine` and returns the dense result.
    pub fn evaluate(
        &self,
        engine: &Engine,
        index_kind: IndexKind,
        parallel: bool,
    ) -> Result<Dense> {
        match self {
            Case::Vector(n) => {
                let h = n.build(engine, index_kind)?;
                let m = engine.materialize(&h, parallel)?;
                m.validate()?;
                Ok(to_dense(&m))
            }
            Case::Reduce {
                add,
                identity,
                base,
            } => {
                let h = base.build(engine, index_kind)?;
                let s: ScalarHandle = engine.reduce(add, *identity, &h)?;
                Ok(vec![Some(engine.wait_scalar(&s, parallel)?)])
            }
        }
    }
}

pub fn to_dense(m: &MaterializedVector) -> Dense {
    let mut out = vec![None; m.len()];
    for (p, v) in m.entries() {
        out[p] = Some(v);
    }
    out
}

/// Exact for integers and booleans; floats within `rel` relative error,
/// with NaNs equal to each other and infinities compared exactly.
pub fn scalars_match(a: Scalar, b: Scalar, rel: f64) -> bool {
    if a.kind() != b.kind() {
        return false;
    }
    if !a.kind().is_float() {
        return a == b;
    }
    let (x, y) = (a.to_f64(), b.to_f64());
    if x.is_nan() || y.is_nan() {
        return x.is_nan() && y.is_nan();
    }
    if x == y {
        return true;
    }
    if x.is_infinite() || y.is_infinite() {
        return false;
    }
    (x - y).abs() <= rel * x.abs().max(y.abs()).max(1.0)
}

/// Describes the first difference between two dense results, if any.
pub fn compare(expected: &Dense, got: &Dense, rel: f64) -> std::result::Result<(), String> {
    if expected.len() != got.len() {
        return Err(format!("length {} != {}", got.len(), expected.len()));
    }
    for (i, (e, g)) in expected.iter().zip(got).enumerate() {
        match (e, g) {
            (None, None) => {}
            (Some(e), Some(g)) if scalars_match(*e, *g, rel) => {}
            _ => return Err(format!("position {i}: expected {e:?}, got {g:?}")),
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Random generation
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct GenConfig {
    pub max_depth: usize,
    pub max_len: usize,
    pub index_kind: IndexKind,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_depth: 4,
            max_len: 64,
            index_kind: IndexKind::Index32,
        }
    }
}

pub fn random_scalar<R: Rng>(kind: ValueKind, rng: &mut R) -> Scalar {
    match kind {
        ValueKind::Float32 => Scalar::F32((rng.gen_range(-64..=64) as f32) / 8.0),
        ValueKind::Float64 => Scalar::F64(rng.gen_range(-4.0..4.0)),
        ValueKind::Int32 => Scalar::I32(rng.gen_range(-9..=9)),
        ValueKind::Int64 => Scalar::I64(rng.gen_range(-9..=9)),
        ValueKind::Boolean => Scalar::Bool(rng.gen()),
    }
}

fn unary_ops() -> Vec<UnaryOp> {
    vec![
        UnaryOp::identity(),
        UnaryOp::abs(),
        UnaryOp::neg(),
        UnaryOp::parse("(x) -> x + 1").unwrap(),
        UnaryOp::parse("(v) -> 2 * v - 3").unwrap(),
    ]
}

fn binary_ops() -> Vec<BinaryOp> {
    vec![
        BinaryOp::plus(),
        BinaryOp::minus(),
        BinaryOp::times(),
        BinaryOp::div(),
        BinaryOp::min(),
        BinaryOp::max(),
        BinaryOp::first(),
        BinaryOp::second(),
        BinaryOp::abs_diff(),
        BinaryOp::parse("(x, y) -> max(x / 0.85, y)").unwrap(),
        BinaryOp::parse("(a, b) -> a * b + 1").unwrap(),
    ]
}

/// Monoid-like operators for mxv and reduce, with an identity per kind.
fn fold_op<R: Rng>(kind: ValueKind, rng: &mut R) -> (BinaryOp, Scalar) {
    match rng.gen_range(0..4) {
        0 => (BinaryOp::plus(), Scalar::zero(kind)),
        1 => (BinaryOp::min(), big(kind, false)),
        2 => (BinaryOp::max(), big(kind, true)),
        _ => (
            BinaryOp::parse("(x, y) -> x + y + 1").unwrap(),
            random_scalar(kind, rng),
        ),
    }
}

fn big(kind: ValueKind, negative: bool) -> Scalar {
    let s = match kind {
        ValueKind::Float32 => Scalar::F32(f32::INFINITY),
        ValueKind::Float64 => Scalar::F64(f64::INFINITY),
        ValueKind::Int32 => Scalar::I32(i32::MAX),
        ValueKind::Int64 => Scalar::I64(i64::MAX),
        ValueKind::Boolean => return Scalar::Bool(!negative),
    };
    if negative {
        match s {
            Scalar::F32(v) => Scalar::F32(-v),
            Scalar::F64(v) => Scalar::F64(-v),
            Scalar::I32(_) => Scalar::I32(i32::MIN),
            Scalar::I64(_) => Scalar::I64(i64::MIN),
            b => b,
        }
    } else {
        s
    }
}

/// Random leaf of the given format. `repr` is `None` for an iso leaf.
pub fn random_leaf<R: Rng>(
    len: usize,
    kind: ValueKind,
    index_kind: IndexKind,
    repr: Option<Representation>,
    fill: f64,
    rng: &mut R,
) -> Node {
    let iso = repr.is_none();
    let repr = repr.unwrap_or_else(|| {
        *[
            Representation::Sparse,
            Representation::BitSet,
            Representation::Full,
        ]
        .choose(rng)
        .unwrap()
    });
    let iso_value = random_scalar(kind, rng);
    let present: Vec<bool> = if repr == Representation::Full {
        vec![true; len]
    } else {
        (0..len).map(|_| rng.gen_bool(fill)).collect()
    };
    let dense: Dense = present
        .iter()
        .map(|&p| {
            p.then(|| {
                if iso {
                    iso_value
                } else {
                    random_scalar(kind, rng)
                }
            })
        })
        .collect();
    let positions: Vec<usize> = (0..len).filter(|&i| present[i]).collect();
    let container: MaterializedVector = match repr {
        Representation::Full if iso => FullVector::iso(len, index_kind, iso_value).unwrap().into(),
        Representation::Full => {
            let vals: Vec<Scalar> = dense.iter().map(|v| v.unwrap()).collect();
            FullVector::new(
                len,
                index_kind,
                Payload::Values(ValueArray::from_scalars(kind, &vals)),
            )
            .unwrap()
            .into()
        }
        Representation::Sparse => {
            let pairs: Vec<(usize, Scalar)> =
                positions.iter().map(|&p| (p, dense[p].unwrap())).collect();
            let v = fusegrb::containers::build_vector_from_pairs(
                len,
                kind,
                index_kind,
                &pairs,
                DupPolicy::Last,
            )
            .unwrap();
            if iso {
                SparseVector::new(len, v.indices().clone(), Payload::Iso(iso_value))
                    .unwrap()
                    .into()
            } else {
                v.into()
            }
        }
        Representation::BitSet => {
            let mut bits = BitSet::new(len);
            for &p in &positions {
                bits.set(p);
            }
            let payload = if iso {
                Payload::Iso(iso_value)
            } else {
                let vals: Vec<Scalar> = dense
                    .iter()
                    .map(|v| v.unwrap_or(Scalar::zero(kind)))
                    .collect();
                Payload::Values(ValueArray::from_scalars(kind, &vals))
            };
            BitSetVector::new(index_kind, bits, payload).unwrap().into()
        }
    };
    Node::Leaf {
        dense,
        container: Arc::new(container),
    }
}

fn random_any_leaf<R: Rng>(len: usize, kind: ValueKind, cfg: &GenConfig, rng: &mut R) -> Node {
    let repr = *[
        Some(Representation::Sparse),
        Some(Representation::BitSet),
        Some(Representation::Full),
        None,
    ]
    .choose(rng)
    .unwrap();
    let fill = *FILLS.choose(rng).unwrap();
    random_leaf(len, kind, cfg.index_kind, repr, fill, rng)
}

/// Random sparse matrix with about `fill * nrows * ncols` stored entries.
pub fn random_matrix<R: Rng>(
    nrows: usize,
    ncols: usize,
    kind: ValueKind,
    index_kind: IndexKind,
    fill: f64,
    iso: bool,
    rng: &mut R,
) -> CsrMatrix {
    let mut triples = Vec::new();
    for r in 0..nrows {
        for c in 0..ncols {
            if rng.gen_bool(fill) {
                triples.push((r, c, random_scalar(kind, rng)));
            }
        }
    }
    let m = fusegrb::containers::build_matrix_from_triples(
        nrows,
        ncols,
        kind,
        index_kind,
        &triples,
        DupPolicy::Last,
    )
    .unwrap();
    if iso {
        CsrMatrix::new(
            nrows,
            ncols,
            m.row_ptr().clone(),
            m.col_idx().clone(),
            Payload::Iso(random_scalar(kind, rng)),
        )
        .unwrap()
    } else {
        m
    }
}

/// Random vector tree of the given length and kind with at most `depth`
/// levels of interior nodes.
pub fn random_node<R: Rng>(
    len: usize,
    kind: ValueKind,
    depth: usize,
    cfg: &GenConfig,
    rng: &mut R,
) -> Node {
    if depth == 0 || rng.gen_bool(0.2) {
        return if rng.gen_bool(0.1) {
            Node::Constant {
                len,
                value: random_scalar(kind, rng),
            }
        } else {
            random_any_leaf(len, kind, cfg, rng)
        };
    }
    let sub =
        |rng: &mut R, len: usize, kind: ValueKind| random_node(len, kind, depth - 1, cfg, rng);
    match rng.gen_range(0..6) {
        0 => Node::Apply {
            op: unary_ops().choose(rng).unwrap().clone(),
            base: Box::new(sub(rng, len, kind)),
        },
        1 => {
            let from = *ValueKind::ALL.choose(rng).unwrap();
            Node::Convert {
                target: kind,
                base: Box::new(sub(rng, len, from)),
            }
        }
        2 => Node::Mult {
            op: binary_ops().choose(rng).unwrap().clone(),
            left: Box::new(sub(rng, len, kind)),
            right: Box::new(sub(rng, len, kind)),
        },
        3 | 4 => Node::Add {
            op: binary_ops().choose(rng).unwrap().clone(),
            left: Box::new(sub(rng, len, kind)),
            right: Box::new(sub(rng, len, kind)),
        },
        _ => {
            let ncols = rng.gen_range(0..=cfg.max_len);
            let (add, identity) = fold_op(kind, rng);
            let mul = binary_ops().choose(rng).unwrap().clone();
            let fill = *[0.05, 0.2, 0.6].choose(rng).unwrap();
            let matrix = random_matrix(
                len,
                ncols,
                kind,
                cfg.index_kind,
                fill,
                rng.gen_bool(0.2),
                rng,
            );
            Node::MxV {
                identity,
                add,
                mul,
                matrix: Arc::new(matrix),
                x: Box::new(sub(rng, ncols, kind)),
            }
        }
    }
}

pub fn random_case<R: Rng>(cfg: &GenConfig, rng: &mut R) -> Case {
    let len = rng.gen_range(0..=cfg.max_len);
    let kind = *ValueKind::ALL.choose(rng).unwrap();
    let node = random_node(len, kind, cfg.max_depth, cfg, rng);
    if rng.gen_bool(0.2) {
        let (add, identity) = fold_op(kind, rng);
        Case::Reduce {
            add,
            identity,
            base: node,
        }
    } else {
        Case::Vector(node)
    }
}

// ---------------------------------------------------------------------------
// PageRank oracle
// ---------------------------------------------------------------------------

/// Dense power iteration with the exact update and stopping rule of the
/// library's PageRank, in `f32`. `edges` are `u -> v`; repeated edges count
/// once. Returns the ranks and the final loop counter.
pub fn dense_pagerank(
    n: usize,
    edges: &[(usize, usize)],
    damping: f32,
    tolerance: f32,
    itermax: usize,
) -> (Vec<f32>, usize) {
    let mut unique = edges.to_vec();
    unique.sort_unstable();
    unique.dedup();
    let mut deg = vec![0usize; n];
    // incoming[v] lists sources in ascending order
    let mut incoming = vec![Vec::new(); n];
    for &(u, v) in &unique {
        deg[u] += 1;
        incoming[v].push(u);
    }
    let scale = |x: f32, y: f32| (x / damping).max(y);
    let d: Vec<f32> = deg
        .iter()
        .map(|&k| {
            if k > 0 {
                scale(k as f32, 1.0 / damping)
            } else {
                1.0 / damping
            }
        })
        .collect();
    let teleport = (1.0 - damping) / n as f32;
    let mut r = vec![1.0f32 / n as f32; n];
    let mut iter = 1;
    let mut rdiff = 1.0f32;
    while iter <= itermax && rdiff > tolerance {
        let t = r.clone();
        let w: Vec<f32> = t.iter().zip(&d).map(|(a, b)| a / b).collect();
        r = (0..n)
            .map(|v| teleport + incoming[v].iter().fold(0.0f32, |acc, &u| acc + w[u]))
            .collect();
        rdiff = t
            .iter()
            .zip(&r)
            .fold(0.0f32, |acc, (a, b)| acc + (a - b).abs());
        iter += 1;
    }
    (r, iter)
}

/// Random directed graph without self loops; each ordered pair is an edge
/// with probability `p`.
pub fn random_digraph<R: Rng>(n: usize, p: f64, rng: &mut R) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    edges
}

/// `A` and its transpose for an edge list, `Float32` with unit weights.
pub fn graph_matrices(
    n: usize,
    edges: &[(usize, usize)],
    index_kind: IndexKind,
) -> (MatrixHandle, MatrixHandle) {
    let triples = edges.iter().map(|&(u, v)| (u, v, 1.0f32)).collect();
    let a = CsrMatrix::from_triples::<f32>(n, n, index_kind, triples, DupPolicy::Sum).unwrap();
    let at = a.transpose();
    (MatrixHandle::new(a), MatrixHandle::new(at))
}
