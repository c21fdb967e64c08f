use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coarse crowd-size category, 0 through 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct MagnitudeLabel(u8);

impl MagnitudeLabel {
    pub const MAX: u8 = 3;

    pub fn new(label: u8) -> Result<Self> {
        if label <= Self::MAX {
            Ok(MagnitudeLabel(label))
        } else {
            Err(Error::Domain(format!("magnitude label {label} outside 0..=3")))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl TryFrom<u8> for MagnitudeLabel {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        MagnitudeLabel::new(v)
    }
}

impl From<MagnitudeLabel> for u8 {
    fn from(l: MagnitudeLabel) -> u8 {
        l.0
    }
}

impl fmt::Display for MagnitudeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Inclusive lower bound of each label, ascending. The default is
/// 1 / 100 / 1000 / 10000.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct BucketTable {
    lower_bounds: [u64; 4],
}

impl Default for BucketTable {
    fn default() -> Self {
        BucketTable {
            lower_bounds: [1, 100, 1_000, 10_000],
        }
    }
}

impl BucketTable {
    pub fn new(lower_bounds: [u64; 4]) -> Result<Self> {
        if lower_bounds[0] != 1 {
            return Err(Error::config("bucket table must start at 1"));
        }
        if lower_bounds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("bucket bounds must be strictly increasing"));
        }
        Ok(BucketTable { lower_bounds })
    }

    pub fn lower_bounds(&self) -> &[u64; 4] {
        &self.lower_bounds
    }

    pub fn bucket(&self, value: u64) -> Result<MagnitudeLabel> {
        if value < 1 {
            return Err(Error::Domain("magnitude of a non-positive value".into()));
        }
        let above = self.lower_bounds.iter().filter(|&&b| b <= value).count();
        Ok(MagnitudeLabel((above - 1) as u8))
    }
}

impl TryFrom<Vec<u64>> for BucketTable {
    type Error = Error;

    fn try_from(v: Vec<u64>) -> Result<Self> {
        let arr: [u64; 4] = v
            .try_into()
            .map_err(|_| Error::config("bucket table needs exactly 4 bounds"))?;
        BucketTable::new(arr)
    }
}

impl From<BucketTable> for Vec<u64> {
    fn from(t: BucketTable) -> Self {
        t.lower_bounds.to_vec()
    }
}

/// `clamp(floor(log10(value)) - 1, 0, 3)` under the default table.
pub fn magnitude_bucket(value: u64) -> Result<MagnitudeLabel> {
    BucketTable::default().bucket(value)
}
