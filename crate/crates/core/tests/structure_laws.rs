use std::collections::BTreeMap;

use fusegrb::{BinaryOp, Engine, IndexKind, SparseVector, UnaryOp, VectorHandle};
use proptest::prelude::*;

fn vector(len: usize, entries: &BTreeMap<usize, i64>) -> VectorHandle {
    let pairs = entries.iter().map(|(&p, &v)| (p % len, v)).collect();
    VectorHandle::from_materialized(
        SparseVector::from_pairs::<i64>(len, IndexKind::Index32, pairs, Default::default())
            .unwrap(),
    )
}

fn positions(e: &Engine, h: &VectorHandle) -> Vec<usize> {
    e.materialize(h, false).unwrap().positions()
}

proptest! {
    #[test]
    fn structure_follows_set_algebra(
        len in 1usize..80,
        a in prop::collection::btree_map(0usize..80, -50i64..50, 0..80),
        b in prop::collection::btree_map(0usize..80, -50i64..50, 0..80),
    ) {
        let e = Engine::nonblocking();
        let (u, v) = (vector(len, &a), vector(len, &b));
        let pu: std::collections::BTreeSet<_> = positions(&e, &u).into_iter().collect();
        let pv: std::collections::BTreeSet<_> = positions(&e, &v).into_iter().collect();

        let applied = e.apply(&UnaryOp::neg(), &u).unwrap();
        prop_assert_eq!(positions(&e, &applied), pu.iter().copied().collect::<Vec<_>>());

        let m = e.ewise_mult(&BinaryOp::times(), &u, &v).unwrap();
        prop_assert_eq!(positions(&e, &m), pu.intersection(&pv).copied().collect::<Vec<_>>());

        let s = e.ewise_add(&BinaryOp::minus(), &u, &v).unwrap();
        prop_assert_eq!(positions(&e, &s), pu.union(&pv).copied().collect::<Vec<_>>());
    }
}
