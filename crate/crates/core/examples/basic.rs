use fusegrb::{BinaryOp, Engine, IndexKind, SparseVector, UnaryOp, VectorHandle};

fn main() -> fusegrb::Result<()> {
    let engine = Engine::nonblocking();
    let ik = IndexKind::Index32;
    let x = VectorHandle::from_materialized(SparseVector::from_pairs::<f64>(
        8,
        ik,
        vec![(1, 2.0), (4, -3.0), (6, 5.0)],
        Default::default(),
    )?);
    let y = engine.new_constant_vector(8, 10.0f64, ik)?;

    // builds a pending tree; nothing is computed yet
    let sum = engine.ewise_add(&BinaryOp::plus(), &x, &y)?;
    let out = engine.apply(&UnaryOp::abs(), &sum)?;
    let total = engine.reduce(&BinaryOp::plus(), 0.0f64, &out)?;

    // one fused kernel, built once and cached by tree signature
    println!("sum = {:?}", engine.scalar_value(&total)?);
    println!("{:?}", engine.stats());
    Ok(())
}
