//! Structural signatures: the kernel cache key.
//!
//! A signature spells out node kinds, operator canonical forms, operand
//! storage formats and iso flags, value and index kinds, and every
//! algorithm choice the engine made. It never includes data values or
//! dimensions, so trees that differ only in those share a kernel.

use std::fmt::{self, Write};
use std::sync::Arc;

use crate::containers::Representation;
use crate::expr::{AddStrategy, MultAccess, ScalarTree, Side, Tree, TreeNode};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature(Arc<str>);

impl Signature {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub(crate) fn of_vector(tree: &Tree, repr: Representation) -> Signature {
        let mut s = String::with_capacity(128);
        let _ = write!(s, "vector[{}](", repr.name());
        encode(tree, &mut s);
        s.push(')');
        Signature(s.into())
    }

    pub(crate) fn of_scalar(tree: &ScalarTree) -> Signature {
        let mut s = String::with_capacity(128);
        let _ = write!(s, "reduce{{{}}}(", tree.add.canonical_form());
        encode(&tree.base, &mut s);
        s.push(')');
        Signature(s.into())
    }
}

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Signature({})", self.0)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn side(s: Side) -> &'static str {
    match s {
        Side::Left => "left",
        Side::Right => "right",
    }
}

fn encode(t: &Tree, out: &mut String) {
    let _ = write!(out, "{}/{}:", t.meta.kind.name(), t.meta.index_kind.name());
    match &t.node {
        TreeNode::Leaf(v) => {
            let _ = write!(
                out,
                "leaf[{},{}]",
                v.representation().name(),
                if v.is_iso() { "iso" } else { "val" }
            );
        }
        TreeNode::Constant(_) => out.push_str("const"),
        TreeNode::Apply { op, base } => {
            let _ = write!(out, "apply{{{}}}(", op.canonical_form());
            encode(base, out);
            out.push(')');
        }
        TreeNode::Convert { base } => {
            out.push_str("conv(");
            encode(base, out);
            out.push(')');
        }
        TreeNode::EWiseMult {
            op,
            left,
            right,
            driver,
            access,
        } => {
            let access = match access {
                MultAccess::Probe => "probe",
                MultAccess::Merge => "merge",
            };
            let _ = write!(
                out,
                "mult{{{}}}[{},{}](",
                op.canonical_form(),
                side(*driver),
                access
            );
            encode(left, out);
            out.push(',');
            encode(right, out);
            out.push(')');
        }
        TreeNode::EWiseAdd {
            op,
            left,
            right,
            strategy,
        } => {
            let strategy = match strategy {
                AddStrategy::DenseRange => "dense",
                AddStrategy::IndexMerge => "merge",
            };
            let _ = write!(out, "add{{{}}}[{}](", op.canonical_form(), strategy);
            encode(left, out);
            out.push(',');
            encode(right, out);
            out.push(')');
        }
        TreeNode::MxV {
            add,
            mul,
            matrix,
            x,
            ..
        } => {
            let _ = write!(
                out,
                "mxv{{{}}}{{{}}}[A:{}/{},{}](",
                add.canonical_form(),
                mul.canonical_form(),
                matrix.value_kind().name(),
                matrix.index_kind().name(),
                if matrix.is_iso() { "iso" } else { "val" },
            );
            encode(x, out);
            out.push(')');
        }
    }
}
