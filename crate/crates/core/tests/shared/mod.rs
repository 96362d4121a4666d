//! Library-facing checks shared by the integration tests and the acceptance
//! harness. Each returns the number of instances checked, or a description
//! of the first disagreement.

#![allow(dead_code)]

use crate::common::{self, bits_string, example_parents, forest_shapes, naive_dag_test, subtree_bits, NaiveCause, NaiveEvent, EXAMPLE_NODES};
use isoturn_core::testing::{dag_test_values, RejectionSet};
use isoturn_core::{BinaryProfile, HypothesisDag, ParentStrategy, RejectionCause};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// p-value grid and α as integers over `DENOM`.
pub const GRID: [u64; 5] = [1, 20, 40, 200, 1000];
pub const DENOM: f64 = 1000.0;
pub const ALPHA_NUM: u64 = 50;

pub const REPARENTED_TRACE: &str = concat!(
    r#"{"iter":1,"node":"00001","budget":0.0125,"p":0.01,"cause":"budget-test"}"#,
    "\n",
    r#"{"iter":2,"node":"01110","budget":0.03333333333333333,"p":0.03,"cause":"budget-test"}"#,
    "\n",
    r#"{"iter":3,"node":"01100","budget":0.016666666666666666,"p":0.01,"cause":"budget-test"}"#,
    "\n",
    r#"{"iter":3,"node":"11100","budget":0.016666666666666666,"p":0.1,"cause":"logical-ancestor"}"#,
    "\n",
);

pub fn example_dag(node5_under_7: bool) -> HypothesisDag {
    let nodes: Vec<BinaryProfile> = EXAMPLE_NODES.iter().map(|s| s.parse().unwrap()).collect();
    HypothesisDag::build(&nodes)
        .unwrap()
        .with_parents(example_parents(node5_under_7))
        .unwrap()
}

pub fn agrees(lib: &RejectionSet, naive: &[NaiveEvent]) -> bool {
    let alpha = ALPHA_NUM as f64 / DENOM;
    lib.trace().len() == naive.len()
        && lib.trace().iter().zip(naive).all(|(t, e)| {
            let cause = match e.cause {
                NaiveCause::Budget => RejectionCause::BudgetTest,
                NaiveCause::Ancestor => RejectionCause::LogicalAncestor,
            };
            t.iter == e.iter
                && t.node == e.node
                && t.cause == cause
                && t.budget == alpha * (e.share.0 as f64 / e.share.1 as f64)
        })
}

/// Every assignment of grid values to `m` nodes.
pub fn grid_vectors(m: usize) -> impl Iterator<Item = Vec<u64>> {
    (0..GRID.len().pow(m as u32)).map(move |mut code| {
        (0..m)
            .map(|_| {
                let v = GRID[code % GRID.len()];
                code /= GRID.len();
                v
            })
            .collect()
    })
}

fn to_f64(p_num: &[u64]) -> Vec<f64> {
    p_num.iter().map(|&x| x as f64 / DENOM).collect()
}

/// Every forest shape on up to `max_nodes` nodes times every grid p-vector.
pub fn check_all_shapes(max_nodes: usize) -> Result<usize, String> {
    let mut instances = 0;
    for m in 1..=max_nodes {
        for parent in forest_shapes(m) {
            let sub: Vec<Vec<bool>> = (0..m).map(|v| subtree_bits(&parent, v)).collect();
            let nodes: Vec<BinaryProfile> = sub.iter().map(|b| bits_string(b).parse().unwrap()).collect();
            let dag = HypothesisDag::build(&nodes).unwrap().with_parents(parent.clone()).unwrap();
            let above = |a: usize, b: usize| a != b && common::below(&sub[b], &sub[a]);
            for p_num in grid_vectors(m) {
                let p = to_f64(&p_num);
                let lib = dag_test_values(&dag, &p, ALPHA_NUM as f64 / DENOM).map_err(|e| e.to_string())?;
                let naive = naive_dag_test(&parent, &above, &p_num, ALPHA_NUM);
                if !agrees(&lib, &naive) {
                    return Err(format!("parent={parent:?} p={p:?}"));
                }
                instances += 1;
            }
        }
    }
    Ok(instances)
}

/// Every non-empty subset of the 3-cube, several random forests each, random
/// grid p-vectors.
pub fn check_cube_subsets(forests: u64, vectors: usize, seed: u64) -> Result<usize, String> {
    let cube = BinaryProfile::all(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut instances = 0;
    for mask in 1u32..256 {
        let nodes: Vec<BinaryProfile> = (0..8).filter(|i| mask >> i & 1 == 1).map(|i| cube[i]).collect();
        let bits: Vec<u32> = nodes.iter().map(|x| x.bits()).collect();
        let above = |a: usize, b: usize| bits[a] != bits[b] && bits[b] & !bits[a] == 0;
        for forest_seed in 0..forests {
            let forest = HypothesisDag::build(&nodes)
                .unwrap()
                .derive_polyforest(ParentStrategy::Random, None, forest_seed)
                .unwrap();
            let parent = forest.parents().unwrap().to_vec();
            for _ in 0..vectors {
                let p_num: Vec<u64> = (0..nodes.len()).map(|_| GRID[rng.random_range(0..GRID.len())]).collect();
                let p = to_f64(&p_num);
                let lib = dag_test_values(&forest, &p, ALPHA_NUM as f64 / DENOM).map_err(|e| e.to_string())?;
                let naive = naive_dag_test(&parent, &above, &p_num, ALPHA_NUM);
                if !agrees(&lib, &naive) {
                    return Err(format!("nodes={nodes:?} parent={parent:?} p={p:?}"));
                }
                instances += 1;
            }
        }
    }
    Ok(instances)
}
