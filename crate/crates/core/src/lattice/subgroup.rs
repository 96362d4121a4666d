use serde::{Deserialize, Serialize};

use super::dag::HypothesisDag;
use super::profile::{check_dimension, BinaryProfile};
use crate::error::{Error, Result};
use crate::testing::RejectionSet;

/// An up-set of `{0,1}^d`, stored as its antichain of minimal elements.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SubgroupRepr", into = "SubgroupRepr")]
pub struct Subgroup {
    dimension: usize,
    minimal_elements: Vec<BinaryProfile>,
}

#[derive(Serialize, Deserialize)]
struct SubgroupRepr {
    dimension: usize,
    minimal_elements: Vec<BinaryProfile>,
}

impl TryFrom<SubgroupRepr> for Subgroup {
    type Error = Error;

    fn try_from(repr: SubgroupRepr) -> Result<Self> {
        Subgroup::from_generators(repr.dimension, repr.minimal_elements)
    }
}

impl From<Subgroup> for SubgroupRepr {
    fn from(s: Subgroup) -> Self {
        SubgroupRepr {
            dimension: s.dimension,
            minimal_elements: s.minimal_elements,
        }
    }
}

impl Subgroup {
    pub fn empty(dimension: usize) -> Result<Self> {
        check_dimension(dimension)?;
        Ok(Self {
            dimension,
            minimal_elements: Vec::new(),
        })
    }

    /// Upward closure of `generators`; dominated generators are absorbed.
    pub fn from_generators(
        dimension: usize,
        generators: impl IntoIterator<Item = BinaryProfile>,
    ) -> Result<Self> {
        check_dimension(dimension)?;
        let mut gens: Vec<BinaryProfile> = generators.into_iter().collect();
        for g in &gens {
            if g.dimension() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    found: g.dimension(),
                });
            }
        }
        // A generator can only be dominated by one of no greater weight.
        gens.sort_by_key(|g| (g.weight(), *g));
        gens.dedup();
        let mut minimal: Vec<BinaryProfile> = Vec::new();
        for g in gens {
            if !minimal.iter().any(|m| m.precedes(&g)) {
                minimal.push(g);
            }
        }
        minimal.sort();
        Ok(Self {
            dimension,
            minimal_elements: minimal,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn minimal_elements(&self) -> &[BinaryProfile] {
        &self.minimal_elements
    }

    pub fn is_empty(&self) -> bool {
        self.minimal_elements.is_empty()
    }

    /// `true` iff `x` dominates some minimal element.
    pub fn contains(&self, x: &BinaryProfile) -> bool {
        x.dimension() == self.dimension && self.minimal_elements.iter().any(|m| m.precedes(x))
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Self::from_generators(
            self.dimension,
            self.minimal_elements
                .iter()
                .chain(&other.minimal_elements)
                .copied(),
        )
    }

    /// Intersection of two up-sets: generated by pairwise joins.
    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        let joins = self
            .minimal_elements
            .iter()
            .flat_map(|a| other.minimal_elements.iter().map(move |b| (*a, *b)))
            .map(|(a, b)| a.join(&b))
            .collect::<Result<Vec<_>>>()?;
        Self::from_generators(self.dimension, joins)
    }

    /// Number of lattice points in the subgroup (explicit enumeration; small `d` only).
    pub fn count_members(&self) -> Result<usize> {
        Ok(BinaryProfile::all(self.dimension)?
            .iter()
            .filter(|x| self.contains(x))
            .count())
    }

    fn same_dim(&self, other: &Self) -> Result<()> {
        if self.dimension != other.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: other.dimension,
            });
        }
        Ok(())
    }
}

/// Upward closure of the rejected nodes over the whole lattice.
pub fn upward_closure(rejections: &RejectionSet, dag: &HypothesisDag) -> Result<Subgroup> {
    let Some(dim) = dag.dimension() else {
        return Err(Error::InvalidConfig(
            "cannot infer the dimension of an empty DAG".into(),
        ));
    };
    Subgroup::from_generators(dim, rejections.rejected().iter().map(|&i| dag.profile(i)))
}
