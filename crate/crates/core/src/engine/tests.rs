use super::*;
use crate::containers::{build_matrix_from_triples, BitSetVector, DupPolicy, FullVector};
use crate::expr::VectorNode;
use crate::ops::{BinaryOp, UnaryOp};

const IK: IndexKind = IndexKind::Index32;

fn sparse_f64(len: usize, pairs: &[(usize, f64)]) -> VectorHandle {
    let pairs: Vec<_> = pairs.iter().map(|&(p, v)| (p, Scalar::F64(v))).collect();
    VectorHandle::from_materialized(
        crate::containers::build_vector_from_pairs(
            len,
            ValueKind::Float64,
            IK,
            &pairs,
            DupPolicy::Last,
        )
        .unwrap(),
    )
}

fn full_f64(values: &[f64]) -> VectorHandle {
    VectorHandle::from_materialized(
        FullVector::new(
            values.len(),
            IK,
            Payload::Values(ValueArray::F64(values.to_vec())),
        )
        .unwrap(),
    )
}

fn entries(e: &Engine, h: &VectorHandle) -> Vec<(usize, f64)> {
    e.materialize(h, false)
        .unwrap()
        .entries()
        .into_iter()
        .map(|(p, s)| (p, s.to_f64()))
        .collect()
}

fn matrix(nrows: usize, ncols: usize, t: &[(usize, usize, f64)]) -> MatrixHandle {
    let t: Vec<_> = t.iter().map(|&(r, c, v)| (r, c, Scalar::F64(v))).collect();
    MatrixHandle::new(
        build_matrix_from_triples(nrows, ncols, ValueKind::Float64, IK, &t, DupPolicy::Sum)
            .unwrap(),
    )
}

fn plus_one() -> UnaryOp {
    UnaryOp::parse("(x) -> x + 1").unwrap()
}

use crate::containers::{Payload, ValueArray};

#[test]
fn new_vector_and_constants() {
    let e = Engine::nonblocking();
    let v = e.new_vector(5, ValueKind::Float64, IK).unwrap();
    assert_eq!(e.materialize(&v, false).unwrap().nnz(), 0);
    assert_eq!(e.new_vector(0, ValueKind::Float64, IK).unwrap().len(), 0);
    assert!(e.new_vector(1 << 31, ValueKind::Float64, IK).is_err());

    let c = e.new_constant_vector(4, 0.25, IK).unwrap();
    assert_eq!(
        entries(&e, &c),
        vec![(0, 0.25), (1, 0.25), (2, 0.25), (3, 0.25)]
    );
    let c = e.new_constant_vector(3, 7.0, IK).unwrap();
    let m = e.materialize(&c, false).unwrap();
    assert_eq!(m.nnz(), 3);
    assert!(m.is_iso());
    assert_eq!(m.representation(), Representation::Full);
    assert_eq!(
        entries(&e, &e.new_constant_vector(1, 0.0, IK).unwrap()),
        vec![(0, 0.0)]
    );
}

#[test]
fn apply_examples() {
    let e = Engine::nonblocking();
    let v = sparse_f64(3, &[(0, 1.0), (2, 3.0)]);
    assert_eq!(
        entries(&e, &e.apply(&plus_one(), &v).unwrap()),
        vec![(0, 2.0), (2, 4.0)]
    );
    assert_eq!(
        entries(&e, &e.apply(&UnaryOp::identity(), &v).unwrap()),
        vec![(0, 1.0), (2, 3.0)]
    );

    let iso = VectorHandle::from_materialized(FullVector::iso(3, IK, Scalar::F64(1.0)).unwrap());
    let out = e
        .materialize(&e.apply(&plus_one(), &iso).unwrap(), false)
        .unwrap();
    assert_eq!(out.iso_value(), Some(Scalar::F64(2.0)));
    let twin = full_f64(&[1.0, 1.0, 1.0]);
    assert_eq!(
        entries(&e, &e.apply(&plus_one(), &twin).unwrap()),
        vec![(0, 2.0), (1, 2.0), (2, 2.0)]
    );
}

#[test]
fn ewise_examples() {
    let e = Engine::nonblocking();
    let u = sparse_f64(3, &[(0, 1.0), (2, 3.0)]);
    let v = sparse_f64(3, &[(0, 2.0), (1, 2.0)]);
    assert_eq!(
        entries(&e, &e.ewise_mult(&BinaryOp::times(), &u, &v).unwrap()),
        vec![(0, 2.0)]
    );
    let a = full_f64(&[1.0, 2.0]);
    let b = full_f64(&[3.0, 4.0]);
    assert_eq!(
        entries(&e, &e.ewise_mult(&BinaryOp::times(), &a, &b).unwrap()),
        vec![(0, 3.0), (1, 8.0)]
    );
    let empty = sparse_f64(3, &[]);
    assert!(entries(&e, &e.ewise_mult(&BinaryOp::times(), &u, &empty).unwrap()).is_empty());

    let u = sparse_f64(2, &[(0, 1.0)]);
    let v = sparse_f64(2, &[(0, 2.0), (1, 5.0)]);
    assert_eq!(
        entries(&e, &e.ewise_add(&BinaryOp::plus(), &u, &v).unwrap()),
        vec![(0, 3.0), (1, 5.0)]
    );
    let empty = sparse_f64(2, &[]);
    assert_eq!(
        entries(&e, &e.ewise_add(&BinaryOp::plus(), &u, &empty).unwrap()),
        vec![(0, 1.0)]
    );

    let r = e
        .ewise_add(
            &BinaryOp::abs_diff(),
            &full_f64(&[0.2, 0.4]),
            &full_f64(&[0.3, 0.1]),
        )
        .unwrap();
    let got = entries(&e, &r);
    assert!((got[0].1 - 0.1).abs() < 1e-12 && (got[1].1 - 0.3).abs() < 1e-12);

    assert!(matches!(
        e.ewise_add(&BinaryOp::plus(), &u, &sparse_f64(3, &[])),
        Err(Error::DimensionMismatch(_))
    ));
}

#[test]
fn merge_visits_union_once() {
    let e = Engine::nonblocking();
    let u = sparse_f64(3, &[(0, 1.0), (2, 1.0)]);
    let v = sparse_f64(3, &[(1, 1.0), (2, 1.0)]);
    let r = e.ewise_add(&BinaryOp::plus(), &u, &v).unwrap();
    assert_eq!(entries(&e, &r), vec![(0, 1.0), (1, 1.0), (2, 2.0)]);
}

#[test]
fn mxv_examples() {
    let e = Engine::nonblocking();
    let a = matrix(2, 2, &[(0, 1, 2.0), (1, 0, 1.0)]);
    let x = full_f64(&[3.0, 4.0]);
    let w = e
        .mxv(0.0, &BinaryOp::plus(), &BinaryOp::times(), &a, &x)
        .unwrap();
    assert_eq!(entries(&e, &w), vec![(0, 8.0), (1, 3.0)]);

    let a = matrix(1, 2, &[(0, 0, 9.0), (0, 1, 9.0)]);
    let second = BinaryOp::parse("(_, x) -> x").unwrap();
    let w = e
        .mxv(0.0, &BinaryOp::plus(), &second, &a, &full_f64(&[5.0, 7.0]))
        .unwrap();
    assert_eq!(entries(&e, &w), vec![(0, 12.0)]);

    let a = matrix(2, 2, &[(0, 0, 1.0)]);
    let w = e
        .mxv(
            -1.0,
            &BinaryOp::plus(),
            &BinaryOp::times(),
            &a,
            &full_f64(&[2.0, 2.0]),
        )
        .unwrap();
    assert_eq!(entries(&e, &w), vec![(0, 1.0), (1, -1.0)]);

    assert!(e
        .mxv(
            0.0,
            &BinaryOp::plus(),
            &BinaryOp::times(),
            &a,
            &full_f64(&[1.0])
        )
        .is_err());
}

#[test]
fn reduce_and_scalar_examples() {
    let e = Engine::nonblocking();
    let v = sparse_f64(4, &[(0, 1.0), (2, 2.0), (3, 3.0)]);
    assert_eq!(
        e.scalar_value(&e.reduce(&BinaryOp::plus(), 0.0, &v).unwrap())
            .unwrap(),
        Scalar::F64(6.0)
    );
    let empty = sparse_f64(4, &[]);
    assert_eq!(
        e.scalar_value(&e.reduce(&BinaryOp::plus(), 0.0, &empty).unwrap())
            .unwrap(),
        Scalar::F64(0.0)
    );
    let s = e
        .reduce(
            &BinaryOp::max(),
            f64::NEG_INFINITY,
            &full_f64(&[3.0, 9.0, 1.0]),
        )
        .unwrap();
    assert_eq!(e.scalar_value(&s).unwrap(), Scalar::F64(9.0));

    assert_eq!(
        e.scalar_value(&ScalarHandle::from_value(1.0f32)).unwrap(),
        Scalar::F32(1.0)
    );
    let before = e.stats();
    assert_eq!(e.scalar_value(&s).unwrap(), Scalar::F64(9.0));
    assert_eq!(e.stats().materializations, before.materializations);
}

#[test]
fn convert_examples() {
    let e = Engine::nonblocking();
    let ints = VectorHandle::from_materialized(
        crate::containers::build_vector_from_pairs(
            3,
            ValueKind::Int64,
            IK,
            &[(1, Scalar::I64(3))],
            DupPolicy::Last,
        )
        .unwrap(),
    );
    let f = e.convert_values(ValueKind::Float32, &ints).unwrap();
    let m = e.materialize(&f, false).unwrap();
    assert_eq!(m.entries(), vec![(1, Scalar::F32(3.0))]);
    assert_eq!(m.positions(), vec![1]);

    let same = e
        .convert_values(ValueKind::Float64, &full_f64(&[1.5]))
        .unwrap();
    assert!(!same.is_materialized());
    assert_eq!(entries(&e, &same), vec![(0, 1.5)]);
}

#[test]
fn wait_is_idempotent_and_memoizes() {
    let e = Engine::nonblocking();
    let h = e.apply(&plus_one(), &full_f64(&[1.0, 2.0])).unwrap();
    assert!(!h.is_materialized());
    e.wait(&h, false).unwrap();
    assert!(h.is_materialized());
    let s = e.stats();
    e.wait(&h, true).unwrap();
    let s2 = e.stats();
    assert_eq!(
        (s.kernel_hits, s.kernel_misses),
        (s2.kernel_hits, s2.kernel_misses)
    );
}

#[test]
fn materializing_a_leaf_returns_the_same_container() {
    let e = Engine::nonblocking();
    let h = full_f64(&[1.0]);
    let a = h.materialized().unwrap();
    let b = e.materialize(&h, false).unwrap();
    assert!(Arc::ptr_eq(&a, &b));
    assert_eq!(e.stats().kernel_constructions, 0);
}

#[test]
fn purity_of_shared_subtrees() {
    let e = Engine::nonblocking();
    let u = e.apply(&plus_one(), &full_f64(&[1.0, 2.0])).unwrap();
    let w = e.ewise_mult(&BinaryOp::times(), &u, &u).unwrap();
    e.wait(&u, false).unwrap();
    assert_eq!(entries(&e, &w), vec![(0, 4.0), (1, 9.0)]);
}

#[test]
fn fused_chain_allocates_one_container() {
    let e = Engine::nonblocking();
    let x = full_f64(&[1.0, 2.0, 3.0]);
    let y = full_f64(&[4.0, 5.0, 6.0]);
    let z = e
        .ewise_mult(&BinaryOp::times(), &x, &e.apply(&plus_one(), &y).unwrap())
        .unwrap();
    e.wait(&z, false).unwrap();
    let s = e.stats();
    assert_eq!(s.containers_allocated, 1);
    assert_eq!(s.kernel_constructions, 1);
    assert_eq!(entries(&e, &z), vec![(0, 5.0), (1, 12.0), (2, 21.0)]);
}

#[test]
fn cache_hits_on_same_structure() {
    let e = Engine::nonblocking();
    for k in 0..5 {
        let x = full_f64(&vec![k as f64; 3 + k]);
        let z = e.apply(&plus_one(), &x).unwrap();
        e.wait(&z, false).unwrap();
    }
    let s = e.stats();
    assert_eq!((s.kernel_constructions, s.kernel_hits), (1, 4));
}

#[test]
fn signature_facets() {
    let e = Engine::nonblocking();
    let full = e.apply(&plus_one(), &full_f64(&[1.0, 2.0])).unwrap();
    let full2 = e.apply(&plus_one(), &full_f64(&[7.0, 8.0, 9.0])).unwrap();
    let sparse = e.apply(&plus_one(), &sparse_f64(2, &[(0, 1.0)])).unwrap();
    let iso = e
        .apply(
            &plus_one(),
            &VectorHandle::from_materialized(FullVector::iso(2, IK, Scalar::F64(1.0)).unwrap()),
        )
        .unwrap();
    let other_op = e.apply(&UnaryOp::abs(), &full_f64(&[1.0, 2.0])).unwrap();
    let s = e.signature_of(&full);
    assert_eq!(s, e.signature_of(&full2));
    assert_ne!(s, e.signature_of(&sparse));
    assert_ne!(s, e.signature_of(&iso));
    assert_ne!(s, e.signature_of(&other_op));
}

#[test]
fn capability_rule() {
    let e = Engine::nonblocking();
    let full = full_f64(&[1.0, 2.0]);
    assert!(random_access_capability(&full));
    assert!(random_access_capability(
        &e.apply(&plus_one(), &full).unwrap()
    ));
    let s1 = sparse_f64(2, &[(0, 1.0)]);
    let s2 = sparse_f64(2, &[(1, 1.0)]);
    assert!(random_access_capability(&s1));
    assert!(!random_access_capability(
        &e.ewise_add(&BinaryOp::plus(), &s1, &s2).unwrap()
    ));
    let a = matrix(2, 2, &[(0, 0, 1.0)]);
    assert!(!random_access_capability(
        &e.mxv(0.0, &BinaryOp::plus(), &BinaryOp::times(), &a, &full)
            .unwrap()
    ));
}

#[test]
fn barrier_materializes_non_capable_mxv_operand() {
    for policy in [MxvBarrier::Capability, MxvBarrier::Interior] {
        let e = Engine::new(EngineSettings {
            mxv_barrier: policy,
            ..Default::default()
        })
        .unwrap();
        let a = matrix(2, 2, &[(0, 0, 1.0), (1, 1, 1.0)]);

        let x = full_f64(&[1.0, 2.0]);
        let w = e
            .mxv(0.0, &BinaryOp::plus(), &BinaryOp::times(), &a, &x)
            .unwrap();
        e.force_inner_materialization(&w).unwrap();
        assert_eq!(e.stats().barrier_materializations, 0);

        let sum = e
            .ewise_add(
                &BinaryOp::plus(),
                &sparse_f64(2, &[(0, 1.0)]),
                &sparse_f64(2, &[(1, 2.0)]),
            )
            .unwrap();
        let w = e
            .mxv(0.0, &BinaryOp::plus(), &BinaryOp::times(), &a, &sum)
            .unwrap();
        e.force_inner_materialization(&w).unwrap();
        assert!(sum.is_materialized());
        e.force_inner_materialization(&w).unwrap();
        assert_eq!(e.stats().barrier_materializations, 1);
        assert_eq!(entries(&e, &w), vec![(0, 1.0), (1, 2.0)]);

        let capable = e.apply(&plus_one(), &full_f64(&[1.0, 2.0])).unwrap();
        let w = e
            .mxv(0.0, &BinaryOp::plus(), &BinaryOp::times(), &a, &capable)
            .unwrap();
        e.force_inner_materialization(&w).unwrap();
        assert_eq!(capable.is_materialized(), policy == MxvBarrier::Interior);
        assert_eq!(entries(&e, &w), vec![(0, 2.0), (1, 3.0)]);
    }
}

#[test]
fn blocking_mode_materializes_every_result() {
    let b = Engine::blocking();
    let n = Engine::nonblocking();
    let x = full_f64(&[1.0, 2.0]);
    assert!(b
        .ewise_mult(&BinaryOp::times(), &x, &x)
        .unwrap()
        .is_materialized());
    let lazy = n.ewise_mult(&BinaryOp::times(), &x, &x).unwrap();
    assert!(matches!(
        lazy.node().as_deref(),
        Some(VectorNode::EWiseMult { .. })
    ));
    assert!(b
        .reduce(&BinaryOp::plus(), 0.0, &x)
        .unwrap()
        .is_materialized());
}

#[test]
fn invalid_settings_rejected() {
    assert!(Engine::new(EngineSettings::new(Mode::Blocking, 0)).is_err());
    let mut s = EngineSettings::default();
    s.thresholds.full = 2.0;
    assert!(Engine::new(s).is_err());
}

#[test]
fn output_representation_follows_estimate() {
    let e = Engine::nonblocking();
    let dense = sparse_f64(100, &(0..90).map(|i| (i, 1.0)).collect::<Vec<_>>());
    let mid = sparse_f64(100, &(0..30).map(|i| (i, 1.0)).collect::<Vec<_>>());
    let thin = sparse_f64(100, &[(3, 1.0)]);
    let f = |h: &VectorHandle| {
        e.materialize(&e.apply(&plus_one(), h).unwrap(), false)
            .unwrap()
            .representation()
    };
    assert_eq!(f(&dense), Representation::BitSet);
    assert_eq!(f(&mid), Representation::BitSet);
    assert_eq!(f(&thin), Representation::Sparse);
    // a full-estimate result that turns out complete is stored as Full
    let all = sparse_f64(4, &[(0, 1.0), (1, 1.0), (2, 1.0), (3, 1.0)]);
    assert_eq!(f(&all), Representation::Full);
}

#[test]
fn bitset_leaves_enumerate() {
    let e = Engine::nonblocking();
    let mut bits = crate::containers::BitSet::new(130);
    for p in [0, 64, 129] {
        bits.set(p);
    }
    let values = ValueArray::F64((0..130).map(|i| i as f64).collect());
    let v = VectorHandle::from_materialized(
        BitSetVector::new(IK, bits, Payload::Values(values)).unwrap(),
    );
    let r = e.apply(&plus_one(), &v).unwrap();
    assert_eq!(entries(&e, &r), vec![(0, 1.0), (64, 65.0), (129, 130.0)]);
    let e4 = Engine::new(EngineSettings::new(Mode::Nonblocking, 4)).unwrap();
    let r = e4.apply(&plus_one(), &v).unwrap();
    assert_eq!(e4.materialize(&r, true).unwrap().nnz(), 3);
}

#[test]
fn kernel_rejects_foreign_signature() {
    let e = Engine::nonblocking();
    let a = e.apply(&plus_one(), &full_f64(&[1.0])).unwrap();
    let b = e.apply(&plus_one(), &sparse_f64(1, &[(0, 1.0)])).unwrap();
    let mut ta = Tree::capture(&a);
    let mut tb = Tree::capture(&b);
    annotate(&mut ta, &e.estimator, &e.settings.thresholds);
    annotate(&mut tb, &e.estimator, &e.settings.thresholds);
    let sa = Signature::of_vector(&ta, Representation::Full);
    let sb = Signature::of_vector(&tb, Representation::Sparse);
    let k = Kernel::for_vector(sa, &ta, Representation::Full).unwrap();
    let ctx = ExecCtx {
        pool: None,
        chunks: 1,
    };
    assert!(matches!(
        k.run_vector(&sb, &tb, &ctx),
        Err(Error::SignatureMismatch { .. })
    ));
}
