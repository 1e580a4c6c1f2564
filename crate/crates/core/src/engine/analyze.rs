//! Annotation pass: fill estimates and the algorithm choices derived from
//! them, plus the random-access capability rule.

use crate::containers::Representation;
use crate::estimator::{
    choose_add_strategy, choose_mult_driver, choose_output_representation, EstimatorState,
    FillEstimate, Thresholds,
};
use crate::expr::{AddStrategy, MultAccess, Side, Tree, TreeNode, VectorHandle};

/// Whether every entry of `v` can be located in O(1) by position.
///
/// Leaves, constants and element-wise maps of such are capable. Element-wise
/// combinations are capable only if both operands are O(1) without a search;
/// matrix-vector products never are.
pub fn random_access_capability(v: &VectorHandle) -> bool {
    capable(&Tree::capture(v))
}

pub(crate) fn capable(t: &Tree) -> bool {
    match &t.node {
        TreeNode::Leaf(_) | TreeNode::Constant(_) => true,
        TreeNode::Apply { base, .. } | TreeNode::Convert { base } => capable(base),
        TreeNode::EWiseMult { left, right, .. } | TreeNode::EWiseAdd { left, right, .. } => {
            direct(left) && direct(right)
        }
        TreeNode::MxV { .. } => false,
    }
}

/// O(1) lookup with no search at all: dense leaves and constants.
fn direct(t: &Tree) -> bool {
    match &t.node {
        TreeNode::Leaf(v) => v.representation() != Representation::Sparse,
        TreeNode::Constant(_) => true,
        TreeNode::Apply { base, .. } | TreeNode::Convert { base } => direct(base),
        TreeNode::EWiseMult { left, right, .. } | TreeNode::EWiseAdd { left, right, .. } => {
            direct(left) && direct(right)
        }
        TreeNode::MxV { .. } => false,
    }
}

/// Fills in `fill` and the per-node choices bottom-up.
pub(crate) fn annotate(t: &mut Tree, est: &EstimatorState, th: &Thresholds) {
    match &mut t.node {
        TreeNode::Leaf(_) | TreeNode::Constant(_) => {}
        TreeNode::Apply { base, .. } | TreeNode::Convert { base } => annotate(base, est, th),
        TreeNode::MxV { x, .. } => annotate(x, est, th),
        TreeNode::EWiseMult {
            left,
            right,
            driver,
            access,
            ..
        } => {
            annotate(left, est, th);
            annotate(right, est, th);
            *driver = choose_mult_driver(
                FillEstimate::clamped(left.fill),
                FillEstimate::clamped(right.fill),
            );
            let other = match driver {
                Side::Left => &**right,
                Side::Right => &**left,
            };
            *access = if capable(other) {
                MultAccess::Probe
            } else {
                MultAccess::Merge
            };
        }
        TreeNode::EWiseAdd {
            left,
            right,
            strategy,
            ..
        } => {
            annotate(left, est, th);
            annotate(right, est, th);
            let wanted = choose_add_strategy(
                FillEstimate::clamped(left.fill),
                FillEstimate::clamped(right.fill),
                th,
            );
            *strategy = if wanted == AddStrategy::DenseRange && capable(left) && capable(right) {
                AddStrategy::DenseRange
            } else {
                AddStrategy::IndexMerge
            };
        }
    }
    t.fill = FillEstimate::clamped(est.node_estimate(t)).ratio();
}

/// Output format for an annotated root.
pub(crate) fn output_representation(t: &Tree, th: &Thresholds) -> Representation {
    if t.structurally_full() {
        Representation::Full
    } else {
        choose_output_representation(FillEstimate::clamped(t.fill), th)
    }
}
