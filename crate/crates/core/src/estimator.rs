//! Naive metadata fill-ratio estimators and the three choices they drive:
//! output representation, multiplication driver, and addition strategy.
//!
//! Estimates only steer performance. Any estimate in `[0, 1]` produces the
//! same materialized values.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::containers::Representation;
use crate::error::{Error, Result};
use crate::expr::{AddStrategy, Side, Tree, TreeNode, VectorHandle};

/// Estimated stored-entry fraction, always in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default)]
pub struct FillEstimate(f64);

impl FillEstimate {
    pub const EMPTY: FillEstimate = FillEstimate(0.0);
    pub const FULL: FillEstimate = FillEstimate(1.0);

    /// Clamps into `[0, 1]`; NaN is rejected.
    pub fn new(ratio: f64) -> Result<FillEstimate> {
        if ratio.is_nan() {
            return Err(Error::InvalidArgument("fill estimate is NaN".into()));
        }
        Ok(FillEstimate(ratio.clamp(0.0, 1.0)))
    }

    pub(crate) fn clamped(ratio: f64) -> FillEstimate {
        FillEstimate(if ratio.is_nan() {
            0.0
        } else {
            ratio.clamp(0.0, 1.0)
        })
    }

    pub fn ratio(self) -> f64 {
        self.0
    }
}

/// Cut-offs for the estimator-driven choices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds {
    /// Results estimated above this fill are assembled as full vectors.
    pub full: f64,
    /// Above this (and not full) they use a bitset.
    pub bitset: f64,
    /// Additions whose union estimate exceeds this loop over every position.
    pub add_dense: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            full: 0.75,
            bitset: 1.0 / 16.0,
            add_dense: 0.5,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        let in_range = |x: f64| (0.0..=1.0).contains(&x);
        if !(in_range(self.full) && in_range(self.bitset) && in_range(self.add_dense)) {
            return Err(Error::InvalidSettings(
                "thresholds must lie in [0, 1]".into(),
            ));
        }
        if self.bitset > self.full {
            return Err(Error::InvalidSettings(format!(
                "bitset threshold {} exceeds full threshold {}",
                self.bitset, self.full
            )));
        }
        Ok(())
    }
}

pub fn choose_output_representation(est: FillEstimate, t: &Thresholds) -> Representation {
    if est.0 > t.full {
        Representation::Full
    } else if est.0 > t.bitset {
        Representation::BitSet
    } else {
        Representation::Sparse
    }
}

/// The side with the strictly smaller estimate drives; ties go left.
pub fn choose_mult_driver(left: FillEstimate, right: FillEstimate) -> Side {
    if right.0 < left.0 {
        Side::Right
    } else {
        Side::Left
    }
}

pub fn choose_add_strategy(left: FillEstimate, right: FillEstimate, t: &Thresholds) -> AddStrategy {
    if (left.0 + right.0).min(1.0) > t.add_dense {
        AddStrategy::DenseRange
    } else {
        AddStrategy::IndexMerge
    }
}

/// Output slots to reserve for `len` positions at the estimated fill.
pub fn preallocation_hint(est: FillEstimate, len: usize) -> usize {
    ((est.0 * len as f64).ceil() as usize).min(len)
}

/// Naive estimate of a handle's fill. Never materializes anything.
pub fn estimate(v: &VectorHandle) -> FillEstimate {
    FillEstimate(naive(&Tree::capture(v), &mut |t| naive_children(t)))
}

fn naive_children(t: &Tree) -> f64 {
    naive(t, &mut naive_children)
}

/// Naive rule for `t`'s own node, asking `child` for child estimates.
pub(crate) fn naive(t: &Tree, child: &mut dyn FnMut(&Tree) -> f64) -> f64 {
    match &t.node {
        TreeNode::Leaf(v) => v.fill_ratio(),
        TreeNode::Constant(_) => 1.0,
        TreeNode::Apply { base, .. } | TreeNode::Convert { base } => child(base),
        TreeNode::EWiseMult { left, right, .. } => child(left) * child(right),
        TreeNode::EWiseAdd { left, right, .. } => (child(left) + child(right)).min(1.0),
        TreeNode::MxV { .. } => 1.0,
    }
}

/// How the engine estimates fill during annotation.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum EstimatorMode {
    #[default]
    Naive,
    /// Every node reports the same estimate.
    Constant(FillEstimate),
    /// Every node reports a pseudo-random estimate. For fault injection.
    Randomized { seed: u64 },
}

pub(crate) struct EstimatorState {
    mode: EstimatorMode,
    draws: AtomicU64,
}

impl EstimatorState {
    pub fn new(mode: EstimatorMode) -> Self {
        Self {
            mode,
            draws: AtomicU64::new(0),
        }
    }

    /// Estimate for `t`, whose children already carry their `fill`.
    pub fn node_estimate(&self, t: &Tree) -> f64 {
        match self.mode {
            EstimatorMode::Naive => naive(t, &mut |c| c.fill),
            EstimatorMode::Constant(e) => e.0,
            EstimatorMode::Randomized { seed } => {
                let n = self.draws.fetch_add(1, Ordering::Relaxed);
                (splitmix64(seed ^ n.wrapping_mul(0x9E37_79B9_7F4A_7C15)) >> 11) as f64
                    / (1u64 << 53) as f64
            }
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
