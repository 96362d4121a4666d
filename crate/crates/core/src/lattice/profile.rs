use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported lattice dimension; a profile fits in one `u32`.
pub const MAX_DIMENSION: usize = 32;

/// A point of the binary lattice `{0,1}^d`.
///
/// Coordinate 1 is the leftmost character of the string form and the most
/// significant stored bit, so the derived `Ord` is lexicographic by
/// coordinate index among profiles of equal dimension.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinaryProfile {
    dim: u8,
    bits: u32,
}

impl BinaryProfile {
    /// Builds a profile from its packed representation. Bits above `dim` must be zero.
    pub fn new(dim: usize, bits: u32) -> Result<Self> {
        check_dimension(dim)?;
        if dim < MAX_DIMENSION && bits >> dim != 0 {
            return Err(Error::InvalidProfile(format!("{bits:#x} does not fit in {dim} bits")));
        }
        Ok(Self { dim: dim as u8, bits })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(dim, 0)
    }

    pub fn ones(dim: usize) -> Result<Self> {
        check_dimension(dim)?;
        Ok(Self {
            dim: dim as u8,
            bits: full_mask(dim),
        })
    }

    pub fn from_coords(coords: &[bool]) -> Result<Self> {
        check_dimension(coords.len())?;
        let bits = coords.iter().fold(0u32, |acc, &c| (acc << 1) | c as u32);
        Ok(Self {
            dim: coords.len() as u8,
            bits,
        })
    }

    /// Every profile of dimension `dim`, in ascending order.
    pub fn all(dim: usize) -> Result<Vec<Self>> {
        check_dimension(dim)?;
        if dim > 24 {
            return Err(Error::InvalidConfig(format!(
                "refusing to enumerate 2^{dim} profiles"
            )));
        }
        Ok((0..1u32 << dim)
            .map(|bits| Self {
                dim: dim as u8,
                bits,
            })
            .collect())
    }

    #[inline]
    pub fn dimension(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Value of coordinate `index` (0-based, coordinate 1 is index 0).
    pub fn get(&self, index: usize) -> bool {
        assert!(index < self.dimension(), "coordinate {index} out of range");
        self.bits >> (self.dimension() - 1 - index) & 1 == 1
    }

    pub fn with(&self, index: usize, value: bool) -> Self {
        assert!(index < self.dimension(), "coordinate {index} out of range");
        let mask = 1u32 << (self.dimension() - 1 - index);
        let bits = if value {
            self.bits | mask
        } else {
            self.bits & !mask
        };
        Self { bits, ..*self }
    }

    pub fn coords(&self) -> Vec<bool> {
        (0..self.dimension()).map(|i| self.get(i)).collect()
    }

    /// Number of coordinates set to 1.
    #[inline]
    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    /// Coordinate-wise `self ⪯ other`.
    pub fn leq(&self, other: &Self) -> Result<bool> {
        self.check_same_dim(other)?;
        Ok(self.precedes(other))
    }

    /// `self ⪯ other` without the dimension check.
    #[inline]
    pub fn precedes(&self, other: &Self) -> bool {
        self.bits & !other.bits == 0
    }

    #[inline]
    pub fn strictly_precedes(&self, other: &Self) -> bool {
        self.bits != other.bits && self.precedes(other)
    }

    #[inline]
    pub fn hamming(&self, other: &Self) -> u32 {
        (self.bits ^ other.bits).count_ones()
    }

    /// Coordinate-wise maximum.
    pub fn join(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            bits: self.bits | other.bits,
            ..*self
        })
    }

    pub fn l2_distance(&self, other: &Self) -> f64 {
        (self.hamming(other) as f64).sqrt()
    }

    pub fn linf_distance(&self, other: &Self) -> f64 {
        if self.bits == other.bits {
            0.0
        } else {
            1.0
        }
    }

    pub(crate) fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: other.dimension(),
            });
        }
        Ok(())
    }
}

pub(crate) fn check_dimension(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIMENSION {
        Err(Error::UnsupportedDimension(dim))
    } else {
        Ok(())
    }
}

fn full_mask(dim: usize) -> u32 {
    if dim == MAX_DIMENSION {
        u32::MAX
    } else {
        (1u32 << dim) - 1
    }
}

impl fmt::Display for BinaryProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dimension() {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BinaryProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinaryProfile({self})")
    }
}

impl FromStr for BinaryProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let coords = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::InvalidProfile(s.to_string())),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_coords(&coords).map_err(|_| Error::InvalidProfile(s.to_string()))
    }
}

impl Serialize for BinaryProfile {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BinaryProfile {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
