use fusegrb::containers::{Payload, ValueArray};
use fusegrb::{
    BinaryOp, Engine, FullVector, IndexKind, Representation, Scalar, SparseVector, UnaryOp,
    ValueKind, VectorHandle,
};

const IK: IndexKind = IndexKind::Index32;

fn full(values: Vec<f32>) -> VectorHandle {
    VectorHandle::from_materialized(
        FullVector::new(values.len(), IK, Payload::Values(ValueArray::F32(values))).unwrap(),
    )
}

fn sparse(len: usize, pairs: Vec<(usize, f32)>) -> VectorHandle {
    VectorHandle::from_materialized(
        SparseVector::from_pairs::<f32>(len, IK, pairs, Default::default()).unwrap(),
    )
}

fn iso(len: usize, v: f32) -> VectorHandle {
    VectorHandle::from_materialized(FullVector::iso(len, IK, Scalar::F32(v)).unwrap())
}

fn inc() -> UnaryOp {
    UnaryOp::parse("(x) -> x + 1").unwrap()
}

/// Materializes `h` and returns the number of containers it allocated.
fn containers_for(e: &Engine, h: &VectorHandle) -> u64 {
    let before = e.stats().containers_allocated;
    e.wait(h, false).unwrap();
    e.stats().containers_allocated - before
}

#[test]
fn fusible_chains_allocate_one_container() {
    let e = Engine::nonblocking();
    let n = 1000;
    let x = full((0..n).map(|i| i as f32).collect());
    let y = full((0..n).map(|i| (n - i) as f32).collect());
    let s = sparse(n, (0..n).step_by(7).map(|i| (i, 1.0)).collect());
    let times = BinaryOp::times();
    let plus = BinaryOp::plus();

    let chains: Vec<VectorHandle> = vec![
        e.ewise_mult(&times, &x, &e.apply(&inc(), &y).unwrap())
            .unwrap(),
        e.apply(
            &UnaryOp::abs(),
            &e.ewise_add(
                &plus,
                &e.apply(&inc(), &x).unwrap(),
                &e.apply(&UnaryOp::neg(), &y).unwrap(),
            )
            .unwrap(),
        )
        .unwrap(),
        e.ewise_add(
            &BinaryOp::max(),
            &e.ewise_mult(&times, &x, &s).unwrap(),
            &e.convert_values(
                ValueKind::Float32,
                &e.convert_values(ValueKind::Int32, &y).unwrap(),
            )
            .unwrap(),
        )
        .unwrap(),
        e.ewise_mult(
            &BinaryOp::div(),
            &e.ewise_add(&plus, &x, &e.new_constant_vector(n, 2.0f32, IK).unwrap())
                .unwrap(),
            &e.ewise_add(&plus, &iso(n, 3.0), &s).unwrap(),
        )
        .unwrap(),
        e.apply(
            &inc(),
            &e.apply(
                &inc(),
                &e.apply(
                    &inc(),
                    &e.ewise_mult(&BinaryOp::minus(), &s, &e.apply(&inc(), &s).unwrap())
                        .unwrap(),
                )
                .unwrap(),
            )
            .unwrap(),
        )
        .unwrap(),
        e.ewise_add(
            &BinaryOp::abs_diff(),
            &e.ewise_mult(
                &times,
                &e.apply(&inc(), &x).unwrap(),
                &e.apply(&inc(), &y).unwrap(),
            )
            .unwrap(),
            &e.ewise_add(&BinaryOp::min(), &s, &e.ewise_mult(&times, &y, &s).unwrap())
                .unwrap(),
        )
        .unwrap(),
    ];
    for (i, h) in chains.iter().enumerate() {
        assert_eq!(containers_for(&e, h), 1, "chain {i}");
    }
    assert_eq!(e.stats().barrier_materializations, 0);
}

#[test]
fn values_of_the_canonical_chain() {
    let e = Engine::nonblocking();
    let x = full(vec![1.0, 2.0, 3.0]);
    let y = full(vec![1.0, 1.0, 2.0]);
    let z = e
        .ewise_mult(&BinaryOp::times(), &x, &e.apply(&inc(), &y).unwrap())
        .unwrap();
    let m = e.materialize(&z, false).unwrap();
    assert_eq!(m.representation(), Representation::Full);
    assert_eq!(
        m.entries(),
        vec![
            (0, Scalar::F32(2.0)),
            (1, Scalar::F32(4.0)),
            (2, Scalar::F32(9.0))
        ]
    );
}

#[test]
fn mxv_barrier_counts_towards_allocations() {
    let e = Engine::nonblocking();
    let a = fusegrb::MatrixHandle::new(
        fusegrb::CsrMatrix::from_triples::<f32>(
            3,
            3,
            IK,
            vec![(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)],
            Default::default(),
        )
        .unwrap(),
    );
    let x = full(vec![1.0, 2.0, 4.0]);
    let inner = e.ewise_mult(&BinaryOp::div(), &x, &iso(3, 2.0)).unwrap();
    let r = e
        .mxv(0.0f32, &BinaryOp::plus(), &BinaryOp::second(), &a, &inner)
        .unwrap();
    let r = e
        .ewise_add(
            &BinaryOp::plus(),
            &e.new_constant_vector(3, 0.5f32, IK).unwrap(),
            &r,
        )
        .unwrap();
    let allocated = containers_for(&e, &r);
    let barriers = e.stats().barrier_materializations;
    assert_eq!(allocated, 1 + barriers);
    assert_eq!(
        e.materialize(&r, false).unwrap().entries(),
        vec![
            (0, Scalar::F32(1.5)),
            (1, Scalar::F32(2.5)),
            (2, Scalar::F32(1.0))
        ]
    );
}

fn tree(e: &Engine, seed: usize, len: usize) -> VectorHandle {
    let x = full((0..len).map(|i| (i * seed) as f32).collect());
    let s = sparse(
        len,
        (0..len)
            .step_by(1 + seed % 5)
            .map(|i| (i, seed as f32))
            .collect(),
    );
    e.ewise_add(
        &BinaryOp::plus(),
        &e.apply(&inc(), &x).unwrap(),
        &e.ewise_mult(&BinaryOp::times(), &x, &s).unwrap(),
    )
    .unwrap()
}

#[test]
fn hundred_identical_structures_build_one_kernel() {
    let e = Engine::nonblocking();
    for k in 0..100 {
        // data and lengths vary; structure and estimates stay in the same bands
        let h = tree(&e, 1, 100 + k);
        e.wait(&h, false).unwrap();
    }
    let s = e.stats();
    assert_eq!(s.kernel_constructions, 1);
    assert_eq!(s.kernel_hits, 99);
    assert_eq!(s.kernel_misses, 1);
}

#[test]
fn each_facet_change_builds_a_new_kernel() {
    let e = Engine::nonblocking();
    let base = |e: &Engine, v: &VectorHandle, op: &UnaryOp| {
        e.wait(&e.apply(op, v).unwrap(), false).unwrap()
    };
    let x = full(vec![1.0, 2.0, 3.0]);
    base(&e, &x, &inc());
    assert_eq!(e.stats().kernel_constructions, 1);
    base(&e, &full(vec![5.0, 6.0, 7.0, 8.0]), &inc());
    assert_eq!(e.stats().kernel_constructions, 1);
    // operator
    base(&e, &x, &UnaryOp::parse("(x) -> x + 2").unwrap());
    assert_eq!(e.stats().kernel_constructions, 2);
    // leaf representation
    base(&e, &sparse(3, vec![(0, 1.0), (1, 1.0), (2, 1.0)]), &inc());
    assert_eq!(e.stats().kernel_constructions, 3);
    // iso flag
    base(&e, &iso(3, 1.0), &inc());
    assert_eq!(e.stats().kernel_constructions, 4);
    // value kind
    let xi = e.convert_values(ValueKind::Int64, &x).unwrap();
    e.wait(&xi, false).unwrap();
    let before = e.stats().kernel_constructions;
    base(&e, &xi, &inc());
    assert_eq!(e.stats().kernel_constructions, before + 1);
}

#[test]
fn equal_canonical_forms_share_kernels() {
    let e = Engine::nonblocking();
    let x = full(vec![1.0, 2.0]);
    let a = e
        .apply(&UnaryOp::parse("(x) -> x + 1").unwrap(), &x)
        .unwrap();
    let b = e
        .apply(&UnaryOp::parse("(value) -> (value + 1)").unwrap(), &x)
        .unwrap();
    assert_eq!(e.signature_of(&a), e.signature_of(&b));
    e.wait(&a, false).unwrap();
    e.wait(&b, false).unwrap();
    assert_eq!(e.stats().kernel_constructions, 1);
}

#[test]
fn concurrent_waits_construct_once() {
    let e = Engine::nonblocking();
    std::thread::scope(|scope| {
        for k in 0..8 {
            let e = &e;
            scope.spawn(move || {
                for j in 0..20 {
                    let h = tree(e, 1, 64 + k * 20 + j);
                    e.wait(&h, false).unwrap();
                }
            });
        }
    });
    let s = e.stats();
    assert_eq!(s.kernel_constructions, 1);
    assert_eq!(s.kernel_hits + s.kernel_misses, 160);
}
