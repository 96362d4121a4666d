//! The binary exposure lattice `{0,1}^d` under the coordinate-wise order,
//! hypothesis DAGs over subsets of it, polyforest sparsification, and
//! upward closure of rejection sets.

mod dag;
mod profile;
mod subgroup;

pub use dag::{leaf_shares, HypothesisDag, LeafShare, ParentStrategy};
pub(crate) use dag::root_leaf_counts;
pub(crate) use profile::check_dimension;
pub use profile::{BinaryProfile, MAX_DIMENSION};

pub(crate) fn check_same_dimension(a: &BinaryProfile, b: &BinaryProfile) -> crate::Result<()> {
    a.check_same_dim(b)
}
pub use subgroup::{upward_closure, Subgroup};

/// Coordinate-wise `x ⪯ y`; errors on a dimension mismatch.
pub fn leq(x: &BinaryProfile, y: &BinaryProfile) -> crate::Result<bool> {
    x.leq(y)
}
