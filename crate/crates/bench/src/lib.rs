//! Shared fixtures for the benchmarks.

use isoturn_core::simulation::{EtaLevel, EtaSpec, Exposure};
use isoturn_core::{generate, BinaryProfile, Dataset, HypothesisDag, ModelSpec, ParentStrategy, SyntheticModel};

/// Model with a single planted up-set at `10…0` over a 0.09 baseline.
pub fn planted_model(dimension: usize) -> SyntheticModel {
    let mut generator = vec![false; dimension];
    generator[0] = true;
    SyntheticModel::new(ModelSpec {
        dimension,
        eta: EtaSpec::UpSet {
            base: 0.09,
            levels: vec![EtaLevel {
                generator: BinaryProfile::from_coords(&generator).expect("dimension in range"),
                eta: 0.35,
            }],
        },
        exposure: Exposure::Bernoulli(vec![0.3; dimension]),
        red_fraction: 0.5,
    })
    .expect("valid model")
}

pub fn planted_data(dimension: usize, n: usize, seed: u64) -> Dataset {
    generate(&planted_model(dimension), n, seed)
}

/// Full lattice with a random polyforest.
pub fn lattice_forest(dimension: usize, seed: u64) -> HypothesisDag {
    let nodes = BinaryProfile::all(dimension).expect("dimension in range");
    HypothesisDag::build(&nodes)
        .expect("distinct profiles")
        .derive_polyforest(ParentStrategy::Random, None, seed)
        .expect("random strategy needs no p-values")
}

/// Deterministic spread of p-values in `(0, 1)`, small for heavy profiles.
pub fn descending_p_values(dag: &HypothesisDag) -> Vec<f64> {
    dag.nodes()
        .iter()
        .map(|x| {
            let d = x.dimension() as f64;
            let w = x.weight() as f64;
            (1e-4f64).powf(w / d) * (0.5 + 0.5 * ((x.bits() % 97) as f64 / 97.0))
        })
        .collect()
}

/// Outcome sequence with roughly `rate` successes, evenly spread.
pub fn outcome_sequence(len: usize, rate: f64) -> Vec<bool> {
    (0..len)
        .map(|i| ((i + 1) as f64 * rate).floor() > (i as f64 * rate).floor())
        .collect()
}
