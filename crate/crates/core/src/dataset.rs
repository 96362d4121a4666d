use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{check_same_dimension, BinaryProfile};

/// Which half of the turnover split an observation belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Red,
    Blue,
}

impl Group {
    pub fn name(&self) -> &'static str {
        match self {
            Group::Red => "red",
            Group::Blue => "blue",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "red" => Ok(Group::Red),
            "blue" => Ok(Group::Blue),
            other => Err(Error::Data(format!("unknown group {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observation {
    pub profile: BinaryProfile,
    pub outcome: bool,
    pub group: Option<Group>,
    /// Source state code, when the observation came from survey data.
    pub state: Option<String>,
}

impl Observation {
    pub fn new(profile: BinaryProfile, outcome: bool) -> Self {
        Self {
            profile,
            outcome,
            group: None,
            state: None,
        }
    }

    pub fn in_group(mut self, group: Group) -> Self {
        self.group = Some(group);
        self
    }
}

/// Observations `(X_i, Y_i)` sharing one lattice dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    dimension: usize,
    observations: Vec<Observation>,
}

impl Dataset {
    pub fn new(dimension: usize, observations: Vec<Observation>) -> Result<Self> {
        crate::lattice::check_dimension(dimension)?;
        for obs in &observations {
            if obs.profile.dimension() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    found: obs.profile.dimension(),
                });
            }
        }
        Ok(Self {
            dimension,
            observations,
        })
    }

    pub fn empty(dimension: usize) -> Result<Self> {
        Self::new(dimension, Vec::new())
    }

    /// Ungrouped observations from parallel profile and outcome slices.
    pub fn from_pairs(profiles: &[BinaryProfile], outcomes: &[bool]) -> Result<Self> {
        if profiles.len() != outcomes.len() {
            return Err(Error::Data(format!(
                "{} profiles but {} outcomes",
                profiles.len(),
                outcomes.len()
            )));
        }
        let Some(first) = profiles.first() else {
            return Err(Error::Data("cannot infer dimension from no observations".into()));
        };
        for p in profiles {
            check_same_dimension(first, p)?;
        }
        Self::new(
            first.dimension(),
            profiles
                .iter()
                .zip(outcomes)
                .map(|(&p, &y)| Observation::new(p, y))
                .collect(),
        )
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn push(&mut self, obs: Observation) -> Result<()> {
        if obs.profile.dimension() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: obs.profile.dimension(),
            });
        }
        self.observations.push(obs);
        Ok(())
    }

    pub fn outcome_count(&self) -> usize {
        self.observations.iter().filter(|o| o.outcome).count()
    }

    /// Partitions by group label; every observation must carry one.
    pub fn split_by_group(&self) -> Result<(Dataset, Dataset)> {
        let mut red = Vec::new();
        let mut blue = Vec::new();
        for (i, obs) in self.observations.iter().enumerate() {
            match obs.group {
                Some(Group::Red) => red.push(obs.clone()),
                Some(Group::Blue) => blue.push(obs.clone()),
                None => {
                    return Err(Error::Data(format!("observation {i} has no group label")))
                }
            }
        }
        Ok((
            Dataset::new(self.dimension, red)?,
            Dataset::new(self.dimension, blue)?,
        ))
    }
}

/// Free-function form of [`Dataset::split_by_group`].
pub fn split_by_group(data: &Dataset) -> Result<(Dataset, Dataset)> {
    data.split_by_group()
}
