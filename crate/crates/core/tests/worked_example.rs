mod common;
mod shared;

use common::{example_parents, EXAMPLE_NODES, EXAMPLE_P};
use shared::{example_dag, REPARENTED_TRACE};
use isoturn_core::lattice::LeafShare;
use isoturn_core::testing::dag_test_values;
use isoturn_core::{leaf_shares, BinaryProfile, HypothesisDag};

#[test]
fn covers_of_the_example() {
    let dag = example_dag(true);
    let cover = |i: usize| dag.cover(i);
    assert_eq!(cover(4), vec![5, 6]);
    assert_eq!(cover(2), vec![4]);
    assert_eq!(cover(1), vec![6]);
    assert_eq!(cover(3), vec![5]);
    assert!(cover(0).is_empty() && cover(5).is_empty() && cover(6).is_empty());
}

#[test]
fn reparented_trace_is_exact() {
    let r = dag_test_values(&example_dag(true), &EXAMPLE_P, 0.05).unwrap();
    assert_eq!(r.trace_jsonl(), REPARENTED_TRACE);
    assert_eq!(r.iterations(), 4);
}

#[test]
fn fixed_parent_variant_rejects_only_node_one() {
    let r = dag_test_values(&example_dag(false), &EXAMPLE_P, 0.05).unwrap();
    assert_eq!(r.rejected().iter().copied().collect::<Vec<_>>(), vec![0]);
    assert_eq!(r.iterations(), 2);
}

#[test]
fn initial_leaf_shares() {
    let first = leaf_shares(&example_dag(false)).unwrap();
    assert_eq!(first[&0], LeafShare { leaves: 1, total: 4 });
    assert_eq!(first[&5], LeafShare { leaves: 2, total: 4 });
    assert_eq!(first[&6], LeafShare { leaves: 1, total: 4 });
    let second = leaf_shares(&example_dag(true)).unwrap();
    assert_eq!(second[&6], LeafShare { leaves: 2, total: 4 });
    assert_eq!(second[&0].budget(0.05), 0.0125);
    assert_eq!(second[&6].budget(0.05), 0.025);
}

#[test]
fn second_round_share_after_pruning_node_one() {
    let nodes: Vec<BinaryProfile> = EXAMPLE_NODES[1..].iter().map(|s| s.parse().unwrap()).collect();
    let parents = example_parents(true)[1..]
        .iter()
        .map(|p| p.map(|q| q - 1))
        .collect();
    let dag = HypothesisDag::build(&nodes).unwrap().with_parents(parents).unwrap();
    let shares = leaf_shares(&dag).unwrap();
    assert_eq!(shares[&5], LeafShare { leaves: 2, total: 3 });
    assert_eq!(shares[&4], LeafShare { leaves: 1, total: 3 });
}
