//! Classic function point counting.
//!
//! Components are classified into Low/Average/High complexity with a 3×3
//! matrix over (record band, DET band), and the unadjusted function point
//! count is the weighted sum of the 15 (kind, level) cell counts.

use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The five counted component types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ComponentKind {
    #[serde(rename = "EI")]
    ExternalInput,
    #[serde(rename = "EO")]
    ExternalOutput,
    #[serde(rename = "EQ")]
    ExternalInquiry,
    #[serde(rename = "ILF")]
    InternalLogicalFile,
    #[serde(rename = "EIF")]
    ExternalInterfaceFile,
}

impl ComponentKind {
    pub const ALL: [ComponentKind; 5] = [
        ComponentKind::ExternalInput,
        ComponentKind::ExternalOutput,
        ComponentKind::ExternalInquiry,
        ComponentKind::InternalLogicalFile,
        ComponentKind::ExternalInterfaceFile,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Short IFPUG abbreviation, also used as the CSV column prefix (lowercased).
    pub fn code(self) -> &'static str {
        match self {
            ComponentKind::ExternalInput => "EI",
            ComponentKind::ExternalOutput => "EO",
            ComponentKind::ExternalInquiry => "EQ",
            ComponentKind::InternalLogicalFile => "ILF",
            ComponentKind::ExternalInterfaceFile => "EIF",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ComponentKind::ExternalInput => "External Inputs",
            ComponentKind::ExternalOutput => "External Outputs",
            ComponentKind::ExternalInquiry => "External Inquiries",
            ComponentKind::InternalLogicalFile => "Internal Logical Files",
            ComponentKind::ExternalInterfaceFile => "External Interface Files",
        }
    }

    /// Data functions count RETs; transactions count FTRs.
    pub fn is_data_function(self) -> bool {
        matches!(
            self,
            ComponentKind::InternalLogicalFile | ComponentKind::ExternalInterfaceFile
        )
    }
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for ComponentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        let kind = match norm.as_str() {
            "ei" | "externalinput" | "externalinputs" => ComponentKind::ExternalInput,
            "eo" | "externaloutput" | "externaloutputs" => ComponentKind::ExternalOutput,
            "eq" | "externalinquiry" | "externalinquiries" => ComponentKind::ExternalInquiry,
            "ilf" | "internallogicalfile" | "internallogicalfiles" => {
                ComponentKind::InternalLogicalFile
            }
            "eif" | "externalinterfacefile" | "externalinterfacefiles" => {
                ComponentKind::ExternalInterfaceFile
            }
            _ => return Err(Error::Config(format!("unknown component kind '{s}'"))),
        };
        Ok(kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComplexityLevel {
    Low,
    Average,
    High,
}

impl ComplexityLevel {
    pub const ALL: [ComplexityLevel; 3] = [
        ComplexityLevel::Low,
        ComplexityLevel::Average,
        ComplexityLevel::High,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Column suffix used in the project CSV (`low`, `avg`, `high`).
    pub fn column_suffix(self) -> &'static str {
        match self {
            ComplexityLevel::Low => "low",
            ComplexityLevel::Average => "avg",
            ComplexityLevel::High => "high",
        }
    }
}

impl fmt::Display for ComplexityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ComplexityLevel::Low => "Low",
            ComplexityLevel::Average => "Average",
            ComplexityLevel::High => "High",
        })
    }
}

impl FromStr for ComplexityLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "low" | "l" => Ok(ComplexityLevel::Low),
            "average" | "avg" | "a" => Ok(ComplexityLevel::Average),
            "high" | "h" => Ok(ComplexityLevel::High),
            _ => Err(Error::Config(format!("unknown complexity level '{s}'"))),
        }
    }
}

/// One counted component. `records` is RET for ILF/EIF and FTR for EI/EO/EQ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentInstance {
    pub kind: ComponentKind,
    pub det: u32,
    pub records: u32,
}

impl ComponentInstance {
    pub fn new(kind: ComponentKind, det: u32, records: u32) -> Self {
        Self { kind, det, records }
    }

    pub fn validate(&self) -> Result<()> {
        if self.det == 0 || self.records == 0 {
            return Err(Error::InvalidComponent {
                kind: self.kind,
                det: f64::from(self.det),
                records: f64::from(self.records),
            });
        }
        Ok(())
    }
}

/// A 3×3 complexity matrix.
///
/// Cuts are the first value of the second and third band, so with
/// `det_cuts = [20, 51]` the DET bands are 1–19, 20–50 and 51+.
/// `grid[record_band][det_band]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityMatrix {
    det_cuts: [u32; 2],
    record_cuts: [u32; 2],
    grid: [[ComplexityLevel; 3]; 3],
}

const STANDARD_GRID: [[ComplexityLevel; 3]; 3] = {
    use ComplexityLevel::*;
    [
        [Low, Low, Average],
        [Low, Average, High],
        [Average, High, High],
    ]
};

impl ComplexityMatrix {
    pub fn new(
        det_cuts: [u32; 2],
        record_cuts: [u32; 2],
        grid: [[ComplexityLevel; 3]; 3],
    ) -> Result<Self> {
        for (name, cuts) in [("det", det_cuts), ("record", record_cuts)] {
            if cuts[0] < 2 || cuts[0] >= cuts[1] {
                return Err(Error::Config(format!(
                    "{name} cuts must satisfy 2 <= c1 < c2, got {cuts:?}"
                )));
            }
        }
        for r in 0..3 {
            for d in 0..3 {
                if d + 1 < 3 && grid[r][d] > grid[r][d + 1] {
                    return Err(Error::Config(format!(
                        "grid decreases along DET in record band {}",
                        r + 1
                    )));
                }
                if r + 1 < 3 && grid[r][d] > grid[r + 1][d] {
                    return Err(Error::Config(format!(
                        "grid decreases along records in DET band {}",
                        d + 1
                    )));
                }
            }
        }
        Ok(Self {
            det_cuts,
            record_cuts,
            grid,
        })
    }

    /// IFPUG default matrix for a kind. The ILF/EIF matrix is DET 1–19/20–50/51+
    /// by RET 1/2–5/6+.
    pub fn default_for(kind: ComponentKind) -> Self {
        let (det_cuts, record_cuts) = match kind {
            ComponentKind::ExternalInput => ([5, 16], [2, 3]),
            ComponentKind::ExternalOutput | ComponentKind::ExternalInquiry => ([6, 20], [2, 4]),
            ComponentKind::InternalLogicalFile | ComponentKind::ExternalInterfaceFile => {
                ([20, 51], [2, 6])
            }
        };
        Self::new(det_cuts, record_cuts, STANDARD_GRID).expect("default matrix is valid")
    }

    pub fn det_cuts(&self) -> [u32; 2] {
        self.det_cuts
    }

    pub fn record_cuts(&self) -> [u32; 2] {
        self.record_cuts
    }

    pub fn grid(&self) -> &[[ComplexityLevel; 3]; 3] {
        &self.grid
    }

    pub fn level(&self, record_band: usize, det_band: usize) -> ComplexityLevel {
        self.grid[record_band][det_band]
    }

    pub fn det_band(&self, det: u32) -> usize {
        band_of(det, self.det_cuts)
    }

    pub fn record_band(&self, records: u32) -> usize {
        band_of(records, self.record_cuts)
    }
}

fn band_of(x: u32, cuts: [u32; 2]) -> usize {
    if x < cuts[0] {
        0
    } else if x < cuts[1] {
        1
    } else {
        2
    }
}

/// Matrices for all five kinds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixSet {
    matrices: [ComplexityMatrix; 5],
}

impl MatrixSet {
    pub fn new(matrices: [ComplexityMatrix; 5]) -> Self {
        Self { matrices }
    }

    pub fn get(&self, kind: ComponentKind) -> &ComplexityMatrix {
        &self.matrices[kind.index()]
    }

    pub fn set(&mut self, kind: ComponentKind, matrix: ComplexityMatrix) {
        self.matrices[kind.index()] = matrix;
    }
}

impl Default for MatrixSet {
    fn default() -> Self {
        Self {
            matrices: ComponentKind::ALL.map(ComplexityMatrix::default_for),
        }
    }
}

/// The 15 UFP weight values, indexed by (kind, level).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightTable {
    weights: [[f64; 3]; 5],
}

impl WeightTable {
    /// Albrecht's original weights.
    pub const ORIGINAL: WeightTable = WeightTable {
        weights: [
            [3.0, 4.0, 6.0],
            [4.0, 5.0, 7.0],
            [3.0, 4.0, 6.0],
            [7.0, 10.0, 15.0],
            [5.0, 7.0, 10.0],
        ],
    };

    /// Validates positivity and per-kind ordering Low <= Average <= High.
    pub fn new(weights: [[f64; 3]; 5]) -> Result<Self> {
        for kind in ComponentKind::ALL {
            let row = weights[kind.index()];
            if row.iter().any(|w| !w.is_finite() || *w <= 0.0) {
                return Err(Error::Config(format!(
                    "weights for {kind} must be finite and positive, got {row:?}"
                )));
            }
            if row[0] > row[1] || row[1] > row[2] {
                return Err(Error::Config(format!(
                    "weights for {kind} must satisfy Low <= Average <= High, got {row:?}"
                )));
            }
        }
        Ok(Self { weights })
    }

    /// Builds a table from the 15-vector layout used by calibration
    /// (`index = kind * 3 + level`).
    pub fn from_vector(v: &[f64; 15]) -> Result<Self> {
        let mut weights = [[0.0; 3]; 5];
        for (i, w) in v.iter().enumerate() {
            weights[i / 3][i % 3] = *w;
        }
        Self::new(weights)
    }

    pub fn to_vector(&self) -> [f64; 15] {
        let mut v = [0.0; 15];
        for (i, w) in self.weights.iter().flatten().enumerate() {
            v[i] = *w;
        }
        v
    }

    pub fn get(&self, kind: ComponentKind, level: ComplexityLevel) -> f64 {
        self.weights[kind.index()][level.index()]
    }

    pub fn row(&self, kind: ComponentKind) -> [f64; 3] {
        self.weights[kind.index()]
    }

    pub fn as_array(&self) -> &[[f64; 3]; 5] {
        &self.weights
    }
}

impl Default for WeightTable {
    fn default() -> Self {
        Self::ORIGINAL
    }
}

/// Flat index of a (kind, level) cell in the 15-vector layout.
pub fn cell_index(kind: ComponentKind, level: ComplexityLevel) -> usize {
    kind.index() * 3 + level.index()
}

/// Component counts per (kind, level) cell.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UfpBreakdown {
    counts: [[u32; 3]; 5],
}

impl UfpBreakdown {
    pub fn new(counts: [[u32; 3]; 5]) -> Self {
        Self { counts }
    }

    pub fn get(&self, kind: ComponentKind, level: ComplexityLevel) -> u32 {
        self.counts[kind.index()][level.index()]
    }

    pub fn set(&mut self, kind: ComponentKind, level: ComplexityLevel, n: u32) {
        self.counts[kind.index()][level.index()] = n;
    }

    pub fn increment(&mut self, kind: ComponentKind, level: ComplexityLevel) {
        self.counts[kind.index()][level.index()] += 1;
    }

    pub fn to_vector(&self) -> [f64; 15] {
        let mut v = [0.0; 15];
        for (i, n) in self.counts.iter().flatten().enumerate() {
            v[i] = f64::from(*n);
        }
        v
    }

    pub fn as_array(&self) -> &[[u32; 3]; 5] {
        &self.counts
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().flatten().sum()
    }
}

impl Add for UfpBreakdown {
    type Output = UfpBreakdown;

    fn add(mut self, rhs: UfpBreakdown) -> UfpBreakdown {
        for (a, b) in self
            .counts
            .iter_mut()
            .flatten()
            .zip(rhs.counts.iter().flatten())
        {
            *a += *b;
        }
        self
    }
}

pub fn classify(
    instance: &ComponentInstance,
    matrix: &ComplexityMatrix,
) -> Result<ComplexityLevel> {
    instance.validate()?;
    Ok(matrix.level(
        matrix.record_band(instance.records),
        matrix.det_band(instance.det),
    ))
}

/// Unadjusted function points: sum of count × weight over the 15 cells.
pub fn ufp(breakdown: &UfpBreakdown, weights: &WeightTable) -> f64 {
    breakdown
        .counts
        .iter()
        .flatten()
        .zip(weights.weights.iter().flatten())
        .map(|(n, w)| f64::from(*n) * w)
        .sum()
}

pub fn count_project(
    components: &[ComponentInstance],
    matrices: &MatrixSet,
) -> Result<UfpBreakdown> {
    let mut breakdown = UfpBreakdown::default();
    for c in components {
        let level = classify(c, matrices.get(c.kind))?;
        breakdown.increment(c.kind, level);
    }
    Ok(breakdown)
}
