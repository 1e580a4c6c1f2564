use fusegrb::estimator::estimate;
use fusegrb::{BinaryOp, Engine, IndexKind, MatrixHandle, Representation, UnaryOp, ValueKind};
use fusegrb_testkit::{random_leaf, random_matrix, FILLS};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const IK: IndexKind = IndexKind::Index32;

fn leaf(
    len: usize,
    repr: Option<Representation>,
    fill: f64,
    rng: &mut ChaCha8Rng,
) -> fusegrb::VectorHandle {
    let fusegrb_testkit::Node::Leaf { container, .. } =
        random_leaf(len, ValueKind::Float64, IK, repr, fill, rng)
    else {
        unreachable!()
    };
    fusegrb::VectorHandle::from_materialized((*container).clone())
}

#[test]
fn leaf_estimate_is_exact_fill() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for len in [0usize, 1, 7, 64, 1000] {
        for repr in [
            Some(Representation::Sparse),
            Some(Representation::BitSet),
            Some(Representation::Full),
            None,
        ] {
            for fill in FILLS {
                let v = leaf(len, repr, fill, &mut rng);
                let m = v.materialized().unwrap();
                let exact = if len == 0 {
                    0.0
                } else {
                    m.nnz() as f64 / len as f64
                };
                assert_eq!(estimate(&v).ratio(), exact);
            }
        }
    }
}

#[test]
fn node_rules() {
    let e = Engine::nonblocking();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let u = leaf(200, Some(Representation::Sparse), 0.5, &mut rng);
        let v = leaf(200, Some(Representation::BitSet), 0.1, &mut rng);
        let (eu, ev) = (estimate(&u).ratio(), estimate(&v).ratio());
        let mult = e.ewise_mult(&BinaryOp::times(), &u, &v).unwrap();
        assert_eq!(estimate(&mult).ratio(), eu * ev);
        let add = e.ewise_add(&BinaryOp::plus(), &u, &v).unwrap();
        assert_eq!(estimate(&add).ratio(), (eu + ev).min(1.0));
        let add2 = e.ewise_add(&BinaryOp::plus(), &add, &add).unwrap();
        assert_eq!(estimate(&add2).ratio(), (2.0 * (eu + ev).min(1.0)).min(1.0));
        assert_eq!(
            estimate(&e.apply(&UnaryOp::abs(), &mult).unwrap()).ratio(),
            eu * ev
        );
        assert_eq!(
            estimate(&e.convert_values(ValueKind::Int32, &u).unwrap()).ratio(),
            eu
        );
    }
    assert_eq!(
        estimate(&e.new_constant_vector(5, 1.0, IK).unwrap()).ratio(),
        1.0
    );
    let a = MatrixHandle::new(random_matrix(
        10,
        200,
        ValueKind::Float64,
        IK,
        0.01,
        false,
        &mut rng,
    ));
    let x = leaf(200, Some(Representation::Sparse), 0.0, &mut rng);
    let w = e
        .mxv(0.0, &BinaryOp::plus(), &BinaryOp::times(), &a, &x)
        .unwrap();
    assert_eq!(estimate(&w).ratio(), 1.0);
}

#[test]
fn estimating_never_materializes() {
    let e = Engine::nonblocking();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u = leaf(50, Some(Representation::Sparse), 0.5, &mut rng);
    let t = e
        .apply(
            &UnaryOp::neg(),
            &e.ewise_add(&BinaryOp::plus(), &u, &u).unwrap(),
        )
        .unwrap();
    let _ = estimate(&t);
    assert!(!t.is_materialized());
    assert_eq!(e.stats().materializations, 0);
}
