//! Isotonic subgroup selection over binary exposure profiles.
//!
//! The pipeline tests `H₀: η(x) < τ` for exposure profiles `x ∈ {0,1}^d`,
//! where `η(x)` is the probability of a binary outcome and is assumed
//! non-decreasing in every coordinate:
//!
//! * [`evidence`] builds anytime-valid p-values from the observations
//!   dominated by each profile;
//! * [`lattice`] holds the profile order, the hypothesis DAG, polyforest
//!   derivation and upward closure;
//! * [`testing`] runs the α-budget DAG testing procedure and the end-to-end
//!   [`testing::iss`] routine;
//! * [`turnover`] embeds it in a split-sample screen/validate design;
//! * [`ingest`] turns survey extracts into datasets;
//! * [`simulation`] generates monotone synthetic data and estimates error
//!   rates and power.

pub mod dataset;
pub mod error;
pub mod evidence;
pub mod ingest;
pub mod lattice;
pub mod simulation;
pub mod special;
pub mod testing;
pub mod turnover;

pub use dataset::{split_by_group, Dataset, Group, Observation};
pub use error::{Error, Result};
pub use evidence::{
    anytime_valid_pvalue, evidence_table, odds_threshold, EvidenceEntry, EvidenceTable, NeighborOrder,
    PValueKernel, ThresholdConfig,
};
pub use ingest::{
    complete_cases, encode_record, encode_records, EncodedRecord, EncodingRules, ExclusionSummary, ItemRule,
    SurveyRecord,
};
pub use lattice::{leaf_shares, leq, upward_closure, BinaryProfile, HypothesisDag, ParentStrategy, Subgroup};
pub use simulation::{
    compare_strategies, estimate_fwer, estimate_power, generate, Finding, ModelSpec, Pipeline, RateEstimate,
    SimulationConfig, SimulationSpec, SyntheticModel,
};
pub use testing::{dag_test, iss, RejectionCause, RejectionSet};
pub use turnover::{run_turnover, TurnoverConfig, TurnoverReport};
