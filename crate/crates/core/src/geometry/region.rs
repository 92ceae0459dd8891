use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::io::LabelMask;

/// Row-major boolean grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                data.push(f(col, row));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<bool>) -> Self {
        assert_eq!(data.len(), width * height, "grid size mismatch");
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.data
    }

    pub fn get(&self, col: usize, row: usize) -> bool {
        self.data[row * self.width + col]
    }

    /// Out-of-grid coordinates read as background.
    pub fn get_signed(&self, col: i64, row: i64) -> bool {
        col >= 0
            && row >= 0
            && (col as usize) < self.width
            && (row as usize) < self.height
            && self.data[row as usize * self.width + col as usize]
    }

    pub fn set(&mut self, col: usize, row: usize, value: bool) {
        self.data[row * self.width + col] = value;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&v| v)
    }

    pub fn same_shape(&self, other: &BinaryMask) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Scored cardiac structures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StructureId {
    #[serde(rename = "LV_endo")]
    LvEndo,
    #[serde(rename = "LV_epi")]
    LvEpi,
    #[serde(rename = "LA")]
    La,
}

impl StructureId {
    pub const ALL: [StructureId; 3] = [StructureId::LvEndo, StructureId::LvEpi, StructureId::La];

    /// Labels making up the structure's region. The epicardial region is the
    /// cavity plus the myocardium.
    pub fn labels(self) -> &'static [u8] {
        match self {
            StructureId::LvEndo => &[1],
            StructureId::LvEpi => &[1, 2],
            StructureId::La => &[3],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StructureId::LvEndo => "LV_endo",
            StructureId::LvEpi => "LV_epi",
            StructureId::La => "LA",
        }
    }
}

impl fmt::Display for StructureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StructureId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lv_endo" | "endo" => Ok(StructureId::LvEndo),
            "lv_epi" | "epi" => Ok(StructureId::LvEpi),
            "la" => Ok(StructureId::La),
            _ => Err(format!("unknown structure `{s}`")),
        }
    }
}

pub fn region_of(mask: &LabelMask, structure: StructureId) -> BinaryMask {
    let labels = structure.labels();
    BinaryMask::from_vec(
        mask.width(),
        mask.height(),
        mask.labels().iter().map(|v| labels.contains(v)).collect(),
    )
}
