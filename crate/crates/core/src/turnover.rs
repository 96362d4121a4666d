//! Two-sample "data turnover": each half screens candidate profiles, a
//! polyforest is built over the survivors, and the other half validates them
//! by DAG testing at `α/2`.
//!
//! Screening reads only the screening half; the validation half contributes
//! p-values for screened nodes only. A profile is a replicable finding when it
//! lies in the upward-closed rejection region of both directions, and a
//! global-null finding when it is rejected in at least one.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Group};
use crate::error::{Error, Result};
use crate::evidence::{evidence_table_with, EvidenceTable, NeighborOrder, PValueKernel, ThresholdConfig};
use crate::lattice::{upward_closure, BinaryProfile, HypothesisDag, ParentStrategy, Subgroup};
use crate::testing::{dag_test, RejectionSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    RedScreensBlueValidates,
    BlueScreensRedValidates,
}

impl Direction {
    pub fn name(&self) -> &'static str {
        match self {
            Direction::RedScreensBlueValidates => "red-screens-blue-validates",
            Direction::BlueScreensRedValidates => "blue-screens-red-validates",
        }
    }

    pub fn screening_group(&self) -> Group {
        match self {
            Direction::RedScreensBlueValidates => Group::Red,
            Direction::BlueScreensRedValidates => Group::Blue,
        }
    }

    pub fn validation_group(&self) -> Group {
        match self {
            Direction::RedScreensBlueValidates => Group::Blue,
            Direction::BlueScreensRedValidates => Group::Red,
        }
    }

    fn seed_offset(&self) -> u64 {
        match self {
            Direction::RedScreensBlueValidates => 0,
            Direction::BlueScreensRedValidates => 0x9E37_79B9_7F4A_7C15,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Directions {
    RedScreensBlueValidates,
    BlueScreensRedValidates,
    #[default]
    Both,
}

impl Directions {
    pub fn list(&self) -> Vec<Direction> {
        match self {
            Directions::RedScreensBlueValidates => vec![Direction::RedScreensBlueValidates],
            Directions::BlueScreensRedValidates => vec![Direction::BlueScreensRedValidates],
            Directions::Both => vec![
                Direction::RedScreensBlueValidates,
                Direction::BlueScreensRedValidates,
            ],
        }
    }
}

/// Where the blue half's hypotheses for validation on red come from.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HypothesisSource {
    /// κ-screening on blue, same as the red side.
    #[default]
    Screen,
    /// A fixed list produced by exploratory analysis of the blue half; validated as is.
    External(Vec<BinaryProfile>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TurnoverConfig {
    pub thresholds: ThresholdConfig,
    pub strategy: ParentStrategy,
    pub seed: u64,
    pub directions: Directions,
    pub blue_hypotheses: HypothesisSource,
    pub order: NeighborOrder,
}

impl TurnoverConfig {
    pub fn new(thresholds: ThresholdConfig, seed: u64) -> Self {
        Self {
            thresholds,
            strategy: ParentStrategy::PGuided,
            seed,
            directions: Directions::Both,
            blue_hypotheses: HypothesisSource::Screen,
            order: NeighborOrder::default(),
        }
    }

    /// Level each validation runs at.
    pub fn alpha_per_direction(&self) -> f64 {
        self.thresholds.alpha / 2.0
    }

    pub fn validate(&self) -> Result<()> {
        self.thresholds.validate()
    }
}

/// Result of screening one half.
#[derive(Clone, Debug, PartialEq)]
pub struct Screening {
    /// p-values of every candidate on the screening half.
    pub all: EvidenceTable,
    /// Candidates with `p ≤ κ`, in candidate order.
    pub screened: EvidenceTable,
}

/// Evidence table over `candidates` on `data`, keeping nodes with `p ≤ κ`.
pub fn screen(
    kernel: &PValueKernel,
    order: NeighborOrder,
    data: &Dataset,
    candidates: &[BinaryProfile],
    kappa: f64,
) -> Result<Screening> {
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(Error::OutOfRange {
            name: "kappa",
            value: kappa,
            expected: "0 < kappa <= 1",
        });
    }
    let all = evidence_table_with(kernel, candidates, data, order)?;
    let screened = all.filter(|e| e.p <= kappa);
    Ok(Screening { all, screened })
}

/// Polyforest over the screened nodes; covers are computed within the
/// screened set only.
pub fn screened_polyforest(
    screened: &[BinaryProfile],
    screening: &EvidenceTable,
    strategy: ParentStrategy,
    seed: u64,
) -> Result<HypothesisDag> {
    HypothesisDag::build(screened)?.derive_polyforest(strategy, Some(screening), seed)
}

#[derive(Clone, Debug)]
pub struct DirectionReport {
    pub direction: Direction,
    pub alpha: f64,
    /// Whether the validated nodes came from an external hypothesis list.
    pub external: bool,
    /// Screening-half p-values of all candidates (empty for external hypotheses).
    pub screening: EvidenceTable,
    /// Nodes sent to validation with the p-values that guided the forest.
    pub screened: EvidenceTable,
    pub forest: HypothesisDag,
    /// Validation-half p-values, screened nodes only.
    pub validation: EvidenceTable,
    pub rejections: RejectionSet,
    pub subgroup: Subgroup,
}

impl DirectionReport {
    pub fn rejected_profiles(&self) -> Vec<BinaryProfile> {
        self.rejections.rejected_profiles(&self.forest)
    }
}

#[derive(Clone, Debug)]
pub struct TurnoverReport {
    pub config: TurnoverConfig,
    pub dimension: usize,
    pub candidate_count: usize,
    pub directions: Vec<DirectionReport>,
    /// Rejected profiles lying in every direction's subgroup (both directions required).
    pub replicable: Vec<BinaryProfile>,
    /// Profiles rejected in at least one direction.
    pub global_null: Vec<BinaryProfile>,
    pub replicable_region: Subgroup,
    pub global_null_region: Subgroup,
}

impl TurnoverReport {
    pub fn direction(&self, d: Direction) -> Option<&DirectionReport> {
        self.directions.iter().find(|r| r.direction == d)
    }

    pub fn trace_file_name(d: Direction) -> String {
        format!("{}.trace.jsonl", d.name())
    }

    /// The report document: sections `screened`, `validated`, `replicable`,
    /// `global_null`, `subgroups`, `config`, `trace_refs`.
    pub fn to_json(&self) -> serde_json::Value {
        let mut screened = serde_json::Map::new();
        let mut validated = serde_json::Map::new();
        let mut subgroups = serde_json::Map::new();
        let mut trace_refs = serde_json::Map::new();
        for r in &self.directions {
            let name = r.direction.name().to_string();
            screened.insert(
                name.clone(),
                serde_json::json!({
                    "screening_group": r.direction.screening_group(),
                    "source": if r.external { "external" } else { "screen" },
                    "nodes": r.screened,
                }),
            );
            let forest: Vec<_> = (0..r.forest.len())
                .map(|i| {
                    serde_json::json!({
                        "profile": r.forest.profile(i),
                        "parent": r.forest.parent(i).map(|p| r.forest.profile(p)),
                    })
                })
                .collect();
            validated.insert(
                name.clone(),
                serde_json::json!({
                    "validation_group": r.direction.validation_group(),
                    "alpha": r.alpha,
                    "forest": forest,
                    "p_values": r.validation,
                    "rejected": r.rejected_profiles(),
                    "iterations": r.rejections.iterations(),
                }),
            );
            subgroups.insert(name.clone(), serde_json::to_value(&r.subgroup).expect("subgroup"));
            trace_refs.insert(name, Self::trace_file_name(r.direction).into());
        }
        subgroups.insert(
            "replicable".into(),
            serde_json::to_value(&self.replicable_region).expect("subgroup"),
        );
        subgroups.insert(
            "global_null".into(),
            serde_json::to_value(&self.global_null_region).expect("subgroup"),
        );
        let cfg = &self.config;
        serde_json::json!({
            "config": {
                "c": cfg.thresholds.c,
                "p0": cfg.thresholds.p0,
                "tau": cfg.thresholds.tau,
                "alpha": cfg.thresholds.alpha,
                "alpha_per_direction": cfg.alpha_per_direction(),
                "kappa": cfg.thresholds.kappa,
                "strategy": cfg.strategy,
                "seed": cfg.seed,
                "directions": cfg.directions,
                "blue_hypotheses": cfg.blue_hypotheses,
                "neighbor_order": cfg.order,
                "dimension": self.dimension,
                "candidates": self.candidate_count,
            },
            "screened": screened,
            "validated": validated,
            "replicable": self.replicable,
            "global_null": self.global_null,
            "subgroups": subgroups,
            "trace_refs": trace_refs,
        })
    }
}

/// Runs the configured directions with a kernel built from `config.thresholds.tau`.
pub fn run_turnover(
    data: &Dataset,
    candidates: &[BinaryProfile],
    config: &TurnoverConfig,
) -> Result<TurnoverReport> {
    let kernel = PValueKernel::new(config.thresholds.tau)?;
    run_turnover_with(&kernel, data, candidates, config)
}

pub fn run_turnover_with(
    kernel: &PValueKernel,
    data: &Dataset,
    candidates: &[BinaryProfile],
    config: &TurnoverConfig,
) -> Result<TurnoverReport> {
    config.validate()?;
    if (kernel.tau() - config.thresholds.tau).abs() > 0.0 {
        return Err(Error::InvalidConfig(format!(
            "kernel tau {} differs from configured tau {}",
            kernel.tau(),
            config.thresholds.tau
        )));
    }
    let (red, blue) = data.split_by_group()?;
    let dirs = config.directions.list();
    let run = |d: Direction| -> Result<DirectionReport> {
        let (screen_half, validate_half) = match d {
            Direction::RedScreensBlueValidates => (&red, &blue),
            Direction::BlueScreensRedValidates => (&blue, &red),
        };
        let external = match (d, &config.blue_hypotheses) {
            (Direction::BlueScreensRedValidates, HypothesisSource::External(list)) => Some(list.as_slice()),
            _ => None,
        };
        run_direction(kernel, d, screen_half, validate_half, candidates, external, config)
    };
    let directions = match dirs.as_slice() {
        [a, b] => {
            let (ra, rb) = rayon::join(|| run(*a), || run(*b));
            vec![ra?, rb?]
        }
        _ => dirs.iter().map(|&d| run(d)).collect::<Result<Vec<_>>>()?,
    };

    let dim = data.dimension();
    let mut global_null_region = Subgroup::empty(dim)?;
    let mut replicable_region: Option<Subgroup> = None;
    let mut global_null: Vec<BinaryProfile> = Vec::new();
    for r in &directions {
        global_null_region = global_null_region.union(&r.subgroup)?;
        replicable_region = Some(match replicable_region {
            None => r.subgroup.clone(),
            Some(acc) => acc.intersection(&r.subgroup)?,
        });
        global_null.extend(r.rejected_profiles());
    }
    global_null.sort();
    global_null.dedup();
    let replicable_region = if directions.len() == 2 {
        replicable_region.expect("two directions")
    } else {
        Subgroup::empty(dim)?
    };
    let replicable = global_null
        .iter()
        .copied()
        .filter(|x| replicable_region.contains(x))
        .collect();

    Ok(TurnoverReport {
        config: config.clone(),
        dimension: dim,
        candidate_count: candidates.len(),
        directions,
        replicable,
        global_null,
        replicable_region,
        global_null_region,
    })
}

fn run_direction(
    kernel: &PValueKernel,
    direction: Direction,
    screen_half: &Dataset,
    validate_half: &Dataset,
    candidates: &[BinaryProfile],
    external: Option<&[BinaryProfile]>,
    config: &TurnoverConfig,
) -> Result<DirectionReport> {
    let order = config.order;
    let (screening, screened) = match external {
        Some(list) => {
            // Exploratory hypotheses: ranked by the half that produced them, no κ cut.
            let guide = evidence_table_with(kernel, list, screen_half, order)?;
            (EvidenceTable::default(), guide)
        }
        None => {
            let s = screen(kernel, order, screen_half, candidates, config.thresholds.kappa)?;
            (s.all, s.screened)
        }
    };
    let nodes: Vec<BinaryProfile> = screened.profiles().collect();
    let forest = screened_polyforest(
        &nodes,
        &screened,
        config.strategy,
        config.seed ^ direction.seed_offset(),
    )?;
    let validation = evidence_table_with(kernel, &nodes, validate_half, order)?;
    let alpha = config.alpha_per_direction();
    let rejections = dag_test(&forest, &validation, alpha)?;
    let subgroup = if forest.is_empty() {
        Subgroup::empty(screen_half.dimension())?
    } else {
        upward_closure(&rejections, &forest)?
    };
    Ok(DirectionReport {
        direction,
        alpha,
        external: external.is_some(),
        screening,
        screened,
        forest,
        validation,
        rejections,
        subgroup,
    })
}

/// Count of each direction's rejections, keyed by direction name.
pub fn rejection_counts(report: &TurnoverReport) -> BTreeMap<&'static str, usize> {
    report
        .directions
        .iter()
        .map(|r| (r.direction.name(), r.rejections.len()))
        .collect()
}
