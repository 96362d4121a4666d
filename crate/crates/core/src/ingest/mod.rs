//! Survey ingestion: raw BRFSS-style answers to binary ACE profiles, a binary
//! depression outcome and a red/blue group.
//!
//! Raw codes are classified per item as positive, negative or missing. Codes
//! listed in no category are missing, so encoding is total. Complete-case
//! filtering then drops records with any missing item, a missing outcome or a
//! state outside both lists.

mod fixture;
mod io;
mod rules;

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Group, Observation};
use crate::error::Result;
use crate::lattice::BinaryProfile;

pub use fixture::{generate_fixture, Fixture, FixtureConfig};
pub use io::{
    read_canonical_csv, read_delimited, read_fixed_width, write_canonical_csv, write_raw_csv, FixedWidthField,
    FixedWidthLayout,
};
pub use rules::{EncodingRules, ItemRule, ItemSpec, OutcomeSpec, SourceSpec, ACE_ITEM_COUNT};

/// One respondent's raw answers. `None` is a blank field.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyRecord {
    /// 1-based line in the source file, 0 when synthetic.
    pub line: usize,
    pub state: Option<String>,
    pub items: BTreeMap<String, Option<i64>>,
    pub depression: Option<i64>,
}

impl SurveyRecord {
    pub fn code(&self, variable: &str) -> Option<i64> {
        self.items.get(variable).copied().flatten()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedRecord {
    pub line: usize,
    pub state: Option<String>,
    /// One entry per rules item; `None` is missing.
    pub items: Vec<Option<bool>>,
    pub outcome: Option<bool>,
    /// `None` when the state is on neither list.
    pub group: Option<Group>,
}

impl EncodedRecord {
    /// The profile when every item is present.
    pub fn profile(&self) -> Option<BinaryProfile> {
        let coords: Option<Vec<bool>> = self.items.iter().copied().collect();
        coords.and_then(|c| BinaryProfile::from_coords(&c).ok())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum CodeClass {
    Positive,
    Negative,
    Missing,
}

fn classify(code: Option<i64>, positive: &[i64], negative: &[i64]) -> CodeClass {
    match code {
        Some(c) if positive.contains(&c) => CodeClass::Positive,
        Some(c) if negative.contains(&c) => CodeClass::Negative,
        _ => CodeClass::Missing,
    }
}

fn encode_item(item: &ItemSpec, record: &SurveyRecord) -> Option<bool> {
    let classes: Vec<CodeClass> = (0..item.sources.len())
        .map(|i| {
            let (pos, neg) = item.codes(i);
            classify(record.code(&item.sources[i].variable), &pos, &neg)
        })
        .collect();
    if classes.contains(&CodeClass::Positive) {
        Some(true)
    } else if classes.iter().all(|&c| c == CodeClass::Negative) {
        Some(false)
    } else {
        None
    }
}

pub fn assign_group(state: Option<&str>, rules: &EncodingRules) -> Option<Group> {
    let s = state?;
    if rules.blue_states.iter().any(|b| b == s) {
        Some(Group::Blue)
    } else if rules.red_states.iter().any(|r| r == s) {
        Some(Group::Red)
    } else {
        None
    }
}

pub fn encode_record(record: &SurveyRecord, rules: &EncodingRules) -> EncodedRecord {
    let outcome = match classify(record.depression, &rules.outcome.positive, &rules.outcome.negative) {
        CodeClass::Positive => Some(true),
        CodeClass::Negative => Some(false),
        CodeClass::Missing => None,
    };
    EncodedRecord {
        line: record.line,
        state: record.state.clone(),
        items: rules.items.iter().map(|item| encode_item(item, record)).collect(),
        outcome,
        group: assign_group(record.state.as_deref(), rules),
    }
}

/// Encodes records in parallel, preserving input order.
pub fn encode_records(records: &[SurveyRecord], rules: &EncodingRules) -> Vec<EncodedRecord> {
    records.par_iter().map(|r| encode_record(r, rules)).collect()
}

/// Exclusion counts. Each dropped record is charged to the first failing
/// check, in the order state, ACE items, outcome.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionSummary {
    pub input: usize,
    pub retained: usize,
    pub excluded_state: usize,
    pub incomplete_ace: usize,
    pub missing_outcome: usize,
}

impl fmt::Display for ExclusionSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "input={}", self.input)?;
        writeln!(f, "retained={}", self.retained)?;
        writeln!(f, "excluded_state={}", self.excluded_state)?;
        writeln!(f, "incomplete_ace={}", self.incomplete_ace)?;
        write!(f, "missing_outcome={}", self.missing_outcome)
    }
}

/// Complete-case dataset over `dimension` items.
pub fn complete_cases(records: &[EncodedRecord], dimension: usize) -> Result<(Dataset, ExclusionSummary)> {
    let mut summary = ExclusionSummary {
        input: records.len(),
        ..Default::default()
    };
    let mut dataset = Dataset::empty(dimension)?;
    for r in records {
        let Some(group) = r.group else {
            summary.excluded_state += 1;
            continue;
        };
        let Some(profile) = r.profile() else {
            summary.incomplete_ace += 1;
            continue;
        };
        let Some(outcome) = r.outcome else {
            summary.missing_outcome += 1;
            continue;
        };
        let mut obs = Observation::new(profile, outcome).in_group(group);
        obs.state = r.state.clone();
        dataset.push(obs)?;
        summary.retained += 1;
    }
    Ok((dataset, summary))
}

/// Zero-ACE respondents per group, read straight from raw codes: every source
/// of every item carries a negative code. Only records that also pass the
/// state and outcome checks are counted.
pub fn raw_zero_ace_audit(records: &[SurveyRecord], rules: &EncodingRules) -> BTreeMap<Group, usize> {
    let mut counts = BTreeMap::from([(Group::Red, 0), (Group::Blue, 0)]);
    for r in records {
        let Some(group) = assign_group(r.state.as_deref(), rules) else {
            continue;
        };
        let outcome_known = r
            .depression
            .is_some_and(|c| rules.outcome.positive.contains(&c) || rules.outcome.negative.contains(&c));
        let all_negative = rules.items.iter().all(|item| {
            (0..item.sources.len()).all(|i| {
                let (_, neg) = item.codes(i);
                r.code(&item.sources[i].variable).is_some_and(|c| neg.contains(&c))
            })
        });
        if outcome_known && all_negative {
            *counts.entry(group).or_default() += 1;
        }
    }
    counts
}

/// Zero-ACE respondents per group in an encoded dataset.
pub fn zero_ace_counts(data: &Dataset) -> BTreeMap<Group, usize> {
    let mut counts = BTreeMap::from([(Group::Red, 0), (Group::Blue, 0)]);
    for obs in data.observations() {
        if let (Some(g), 0) = (obs.group, obs.profile.weight()) {
            *counts.entry(g).or_default() += 1;
        }
    }
    counts
}
