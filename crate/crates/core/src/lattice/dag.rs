use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::profile::BinaryProfile;
use crate::error::{Error, Result};
use crate::evidence::EvidenceTable;

/// How a node's single polyforest parent is picked from its cover set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParentStrategy {
    /// Uniform over the cover set.
    Random,
    /// Closest cover element in the ℓ∞ metric; ties uniform.
    #[serde(rename = "linf-nearest")]
    LInfNearest,
    /// Closest cover element in the ℓ2 metric; ties uniform.
    L2Nearest,
    /// Cover element with the smallest screening p-value; ties uniform.
    PGuided,
}

impl ParentStrategy {
    pub const ALL: [ParentStrategy; 4] = [
        ParentStrategy::Random,
        ParentStrategy::LInfNearest,
        ParentStrategy::L2Nearest,
        ParentStrategy::PGuided,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ParentStrategy::Random => "random",
            ParentStrategy::LInfNearest => "linf-nearest",
            ParentStrategy::L2Nearest => "l2-nearest",
            ParentStrategy::PGuided => "p-guided",
        }
    }
}

impl fmt::Display for ParentStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ParentStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown parent strategy {s:?}")))
    }
}

/// Hypotheses indexed by distinct profiles, the full order relation between
/// them, and optionally a polyforest (at most one parent per node).
///
/// Edge `i -> j` exists iff `nodes[j] ⪯ nodes[i]` and `i != j`, so edges run
/// from stronger to weaker profiles and the edge set is transitively closed.
#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisDag {
    nodes: Vec<BinaryProfile>,
    index: HashMap<BinaryProfile, usize>,
    /// `ancestors[j]`: every `i` with an edge `i -> j`, ascending.
    ancestors: Vec<Vec<usize>>,
    /// `descendants[i]`: every `j` with an edge `i -> j`, ascending.
    descendants: Vec<Vec<usize>>,
    forest: Option<Polyforest>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Polyforest {
    parent: Vec<Option<usize>>,
    strategy: Option<ParentStrategy>,
}

impl HypothesisDag {
    /// Builds the full order DAG over `profiles`. Node `i` is `profiles[i]`.
    pub fn build(profiles: &[BinaryProfile]) -> Result<Self> {
        let mut index = HashMap::with_capacity(profiles.len());
        for (i, p) in profiles.iter().enumerate() {
            if let Some(first) = profiles.first() {
                first.check_same_dim(p)?;
            }
            if index.insert(*p, i).is_some() {
                return Err(Error::DuplicateProfile(p.to_string()));
            }
        }
        let m = profiles.len();
        let mut ancestors = vec![Vec::new(); m];
        let mut descendants = vec![Vec::new(); m];
        for (i, upper) in profiles.iter().enumerate() {
            for (j, lower) in profiles.iter().enumerate() {
                if i != j && lower.precedes(upper) {
                    descendants[i].push(j);
                    ancestors[j].push(i);
                }
            }
        }
        Ok(Self {
            nodes: profiles.to_vec(),
            index,
            ancestors,
            descendants,
            forest: None,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[BinaryProfile] {
        &self.nodes
    }

    pub fn profile(&self, node: usize) -> BinaryProfile {
        self.nodes[node]
    }

    pub fn dimension(&self) -> Option<usize> {
        self.nodes.first().map(BinaryProfile::dimension)
    }

    pub fn index_of(&self, profile: &BinaryProfile) -> Option<usize> {
        self.index.get(profile).copied()
    }

    /// Nodes that strictly dominate `node`, i.e. its ancestors in the full DAG.
    pub fn ancestors(&self, node: usize) -> &[usize] {
        &self.ancestors[node]
    }

    /// Nodes strictly dominated by `node`.
    pub fn descendants(&self, node: usize) -> &[usize] {
        &self.descendants[node]
    }

    /// All edges `(from, to)` with `profile(to) ⪯ profile(from)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.descendants
            .iter()
            .enumerate()
            .flat_map(|(i, ds)| ds.iter().map(move |&j| (i, j)))
    }

    pub fn edge_count(&self) -> usize {
        self.descendants.iter().map(Vec::len).sum()
    }

    /// Immediate dominators of `node` among the DAG's nodes: strictly larger
    /// profiles with no node strictly in between.
    pub fn cover(&self, node: usize) -> Vec<usize> {
        let ups = &self.ancestors[node];
        ups.iter()
            .copied()
            .filter(|&j| {
                let pj = self.nodes[j];
                !ups.iter()
                    .any(|&k| k != j && self.nodes[k].strictly_precedes(&pj))
            })
            .collect()
    }

    pub fn has_polyforest(&self) -> bool {
        self.forest.is_some()
    }

    pub fn strategy(&self) -> Option<ParentStrategy> {
        self.forest.as_ref().and_then(|f| f.strategy)
    }

    /// Polyforest parent of `node`, if a polyforest exists and `node` is not a root.
    pub fn parent(&self, node: usize) -> Option<usize> {
        self.forest.as_ref().and_then(|f| f.parent[node])
    }

    pub fn parents(&self) -> Option<&[Option<usize>]> {
        self.forest.as_ref().map(|f| f.parent.as_slice())
    }

    pub fn roots(&self) -> Vec<usize> {
        match &self.forest {
            Some(f) => (0..self.len()).filter(|&i| f.parent[i].is_none()).collect(),
            None => Vec::new(),
        }
    }

    /// Returns a copy with an explicit parent map. Each parent must strictly
    /// dominate its child.
    pub fn with_parents(&self, parent: Vec<Option<usize>>) -> Result<Self> {
        if parent.len() != self.len() {
            return Err(Error::InvalidConfig(format!(
                "parent map has {} entries for {} nodes",
                parent.len(),
                self.len()
            )));
        }
        for (child, par) in parent.iter().enumerate() {
            if let Some(par) = *par {
                if par >= self.len() || !self.nodes[child].strictly_precedes(&self.nodes[par]) {
                    return Err(Error::InvalidConfig(format!(
                        "node {} cannot be the parent of {}",
                        par, self.nodes[child]
                    )));
                }
            }
        }
        Ok(Self {
            forest: Some(Polyforest {
                parent,
                strategy: None,
            }),
            ..self.clone()
        })
    }

    /// Chooses at most one parent per node from its cover set.
    ///
    /// `screening` supplies the p-values `PGuided` ranks covers by; it is
    /// ignored by the other strategies. Ties are broken uniformly with a
    /// generator seeded from `seed`, visiting nodes in index order.
    pub fn derive_polyforest(
        &self,
        strategy: ParentStrategy,
        screening: Option<&EvidenceTable>,
        seed: u64,
    ) -> Result<Self> {
        let scores: Option<Vec<f64>> = match (strategy, screening) {
            (ParentStrategy::PGuided, None) => {
                return Err(Error::InvalidConfig(
                    "p-guided parent selection needs screening p-values".into(),
                ))
            }
            (ParentStrategy::PGuided, Some(table)) => Some(
                self.nodes
                    .iter()
                    .map(|p| {
                        table
                            .p_value(p)
                            .ok_or_else(|| Error::MissingPValue(p.to_string()))
                    })
                    .collect::<Result<_>>()?,
            ),
            _ => None,
        };

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut parent = vec![None; self.len()];
        for (node, slot) in parent.iter_mut().enumerate() {
            let cover = self.cover(node);
            if cover.is_empty() {
                continue;
            }
            let me = self.nodes[node];
            let key = |j: usize| -> f64 {
                match strategy {
                    ParentStrategy::Random => 0.0,
                    ParentStrategy::LInfNearest => me.linf_distance(&self.nodes[j]),
                    ParentStrategy::L2Nearest => me.l2_distance(&self.nodes[j]),
                    ParentStrategy::PGuided => scores.as_ref().expect("scores")[j],
                }
            };
            let best = cover.iter().map(|&j| key(j)).fold(f64::INFINITY, f64::min);
            let tied: Vec<usize> = cover.into_iter().filter(|&j| key(j) == best).collect();
            let pick = if tied.len() == 1 {
                tied[0]
            } else {
                tied[rng.random_range(0..tied.len())]
            };
            *slot = Some(pick);
        }
        Ok(Self {
            forest: Some(Polyforest {
                parent,
                strategy: Some(strategy),
            }),
            ..self.clone()
        })
    }
}

/// A root's share of the α budget: `leaves / total` as an exact ratio.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LeafShare {
    pub leaves: usize,
    pub total: usize,
}

impl LeafShare {
    pub fn fraction(&self) -> f64 {
        self.leaves as f64 / self.total as f64
    }

    /// `alpha * (leaves / total)`; a root holding every leaf gets exactly `alpha`.
    pub fn budget(&self, alpha: f64) -> f64 {
        alpha * self.fraction()
    }
}

/// Share of the polyforest's leaves lying under each root. A childless root
/// counts as its own leaf.
pub fn leaf_shares(dag: &HypothesisDag) -> Result<BTreeMap<usize, LeafShare>> {
    let parent = dag.parents().ok_or(Error::MissingPolyforest)?;
    let alive = vec![true; dag.len()];
    let (counts, total) = root_leaf_counts(parent, &alive);
    Ok(counts
        .into_iter()
        .map(|(root, leaves)| (root, LeafShare { leaves, total }))
        .collect())
}

/// Leaf counts per root of the forest restricted to `alive` nodes. A node is
/// a root when it has no parent or its parent is not alive.
pub(crate) fn root_leaf_counts(parent: &[Option<usize>], alive: &[bool]) -> (Vec<(usize, usize)>, usize) {
    let n = parent.len();
    let mut has_child = vec![false; n];
    for (child, par) in parent.iter().enumerate() {
        if let Some(p) = *par {
            if alive[child] && alive[p] {
                has_child[p] = true;
            }
        }
    }
    let mut leaves_under = vec![0usize; n];
    let mut total = 0;
    for node in 0..n {
        if !alive[node] || has_child[node] {
            continue;
        }
        total += 1;
        let mut cur = node;
        while let Some(p) = parent[cur].filter(|&p| alive[p]) {
            cur = p;
        }
        leaves_under[cur] += 1;
    }
    let roots = (0..n)
        .filter(|&i| alive[i] && parent[i].filter(|&p| alive[p]).is_none())
        .map(|r| (r, leaves_under[r]))
        .collect();
    (roots, total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profiles(list: &[&str]) -> Vec<BinaryProfile> {
        list.iter().map(|s| s.parse().unwrap()).collect()
    }

    fn edge_set(dag: &HypothesisDag) -> Vec<(String, String)> {
        let mut e: Vec<_> = dag
            .edges()
            .map(|(i, j)| (dag.profile(i).to_string(), dag.profile(j).to_string()))
            .collect();
        e.sort();
        e
    }

    #[test]
    fn single_node_has_no_edges() {
        let dag = HypothesisDag::build(&profiles(&["0110"])).unwrap();
        assert_eq!(dag.edge_count(), 0);
    }

    #[test]
    fn chain_edges() {
        let dag = HypothesisDag::build(&profiles(&["00", "01", "11"])).unwrap();
        let expected: Vec<(String, String)> = [("01", "00"), ("11", "00"), ("11", "01")]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        assert_eq!(edge_set(&dag), expected);
    }

    #[test]
    fn full_square_has_five_edges() {
        let dag = HypothesisDag::build(&BinaryProfile::all(2).unwrap()).unwrap();
        assert_eq!(dag.edge_count(), 5);
    }

    #[test]
    fn duplicates_rejected() {
        let err = HypothesisDag::build(&profiles(&["01", "10", "01"])).unwrap_err();
        assert!(matches!(err, Error::DuplicateProfile(p) if p == "01"));
    }

    #[test]
    fn mixed_dimensions_rejected() {
        assert!(HypothesisDag::build(&profiles(&["01", "101"])).is_err());
    }

    #[test]
    fn antichain_is_all_roots() {
        let dag = HypothesisDag::build(&profiles(&["100", "010", "001"])).unwrap();
        for st in [ParentStrategy::Random, ParentStrategy::L2Nearest] {
            let f = dag.derive_polyforest(st, None, 7).unwrap();
            assert_eq!(f.roots(), vec![0, 1, 2]);
        }
    }

    #[test]
    fn chain_parents_are_forced() {
        let dag = HypothesisDag::build(&profiles(&["00", "01", "11"])).unwrap();
        assert_eq!(dag.cover(1), vec![2]);
        assert_eq!(dag.cover(0), vec![1]);
        for seed in 0..5 {
            for st in [
                ParentStrategy::Random,
                ParentStrategy::LInfNearest,
                ParentStrategy::L2Nearest,
            ] {
                let f = dag.derive_polyforest(st, None, seed).unwrap();
                assert_eq!(f.parents().unwrap(), &[Some(1), Some(2), None]);
            }
        }
    }

    #[test]
    fn p_guided_requires_p_values() {
        let dag = HypothesisDag::build(&profiles(&["00", "01"])).unwrap();
        assert!(dag
            .derive_polyforest(ParentStrategy::PGuided, None, 0)
            .is_err());
    }

    #[test]
    fn l2_prefers_closer_cover() {
        // 0000 is covered by 1100 (distance √2) and 0001 (distance 1).
        let dag = HypothesisDag::build(&profiles(&["0000", "1100", "0001"])).unwrap();
        let mut cover = dag.cover(0);
        cover.sort();
        assert_eq!(cover, vec![1, 2]);
        let f = dag
            .derive_polyforest(ParentStrategy::L2Nearest, None, 3)
            .unwrap();
        assert_eq!(f.parent(0), Some(2));
    }

    #[test]
    fn leaf_shares_requires_forest() {
        let dag = HypothesisDag::build(&profiles(&["00"])).unwrap();
        assert!(matches!(leaf_shares(&dag), Err(Error::MissingPolyforest)));
    }

    #[test]
    fn single_tree_gets_everything() {
        let dag = HypothesisDag::build(&BinaryProfile::all(3).unwrap()).unwrap();
        let f = dag.derive_polyforest(ParentStrategy::Random, None, 11).unwrap();
        let shares = leaf_shares(&f).unwrap();
        assert_eq!(shares.len(), 1);
        let share = shares.values().next().unwrap();
        assert_eq!(share.leaves, share.total);
        assert_eq!(share.budget(0.05), 0.05);
    }

    #[test]
    fn with_parents_validates_dominance() {
        let dag = HypothesisDag::build(&profiles(&["01", "10"])).unwrap();
        assert!(dag.with_parents(vec![Some(1), None]).is_err());
        assert!(dag.with_parents(vec![None]).is_err());
    }
}
