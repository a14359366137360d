//! Project-record CSV ingestion and the benchmark-repository filter.

use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fp::{ComplexityLevel, ComponentKind, UfpBreakdown};

pub const GSC_COUNT: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QualityRating {
    A,
    B,
    C,
    D,
}

impl FromStr for QualityRating {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(QualityRating::A),
            "B" => Ok(QualityRating::B),
            "C" => Ok(QualityRating::C),
            "D" => Ok(QualityRating::D),
            other => Err(format!("quality rating must be A-D, got '{other}'")),
        }
    }
}

impl fmt::Display for QualityRating {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectRecord {
    pub id: String,
    pub quality_rating: QualityRating,
    pub counting_method: String,
    pub resource_level: u32,
    pub development_type: String,
    /// `None` when all 15 breakdown cells are blank.
    pub breakdown: Option<UfpBreakdown>,
    /// Normalized work effort in hours; `None` when blank.
    pub normalized_effort: Option<f64>,
    /// General system characteristics, carried through but never used.
    pub gsc: Option<[u8; GSC_COUNT]>,
}

impl ProjectRecord {
    pub fn breakdown(&self) -> Result<&UfpBreakdown> {
        self.breakdown
            .as_ref()
            .ok_or_else(|| Error::Domain(format!("project {} has no UFP breakdown", self.id)))
    }

    pub fn effort(&self) -> Result<f64> {
        self.normalized_effort.ok_or_else(|| Error::MissingEffort {
            id: self.id.clone(),
        })
    }
}

/// A row that could not be turned into a record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RejectedRow {
    /// 1-based line number in the file (the header is line 1).
    pub line: u64,
    pub id: Option<String>,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LoadOutcome {
    pub records: Vec<ProjectRecord>,
    pub rejects: Vec<RejectedRow>,
}

fn breakdown_columns() -> impl Iterator<Item = (ComponentKind, ComplexityLevel, String)> {
    ComponentKind::ALL.into_iter().flat_map(|k| {
        ComplexityLevel::ALL.into_iter().map(move |l| {
            (
                k,
                l,
                format!("{}_{}", k.code().to_ascii_lowercase(), l.column_suffix()),
            )
        })
    })
}

/// Header in the documented column order, GSC columns included.
pub fn csv_header() -> Vec<String> {
    let mut cols: Vec<String> = [
        "id",
        "quality_rating",
        "counting_method",
        "resource_level",
        "development_type",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    cols.extend(breakdown_columns().map(|(_, _, c)| c));
    cols.push("normalized_effort".into());
    cols.extend((1..=GSC_COUNT).map(|i| format!("gsc_{i}")));
    cols
}

struct Columns {
    id: usize,
    quality: usize,
    method: usize,
    level: usize,
    dev_type: usize,
    cells: Vec<(ComponentKind, ComplexityLevel, usize)>,
    effort: usize,
    gsc: Option<Vec<usize>>,
}

impl Columns {
    fn resolve(headers: &csv::StringRecord, path: &Path) -> Result<Self> {
        let find = |name: &str| headers.iter().position(|h| h.trim() == name);
        let require = |name: &str| {
            find(name).ok_or_else(|| Error::Schema {
                path: path.to_path_buf(),
                message: format!("missing required column '{name}'"),
            })
        };
        let cells = breakdown_columns()
            .map(|(k, l, name)| Ok((k, l, require(&name)?)))
            .collect::<Result<Vec<_>>>()?;
        let gsc_found: Vec<Option<usize>> =
            (1..=GSC_COUNT).map(|i| find(&format!("gsc_{i}"))).collect();
        let gsc = if gsc_found.iter().all(Option::is_none) {
            None
        } else if gsc_found.iter().all(Option::is_some) {
            Some(gsc_found.into_iter().flatten().collect())
        } else {
            return Err(Error::Schema {
                path: path.to_path_buf(),
                message: "GSC columns must be all present (gsc_1..gsc_14) or all absent".into(),
            });
        };
        Ok(Self {
            id: require("id")?,
            quality: require("quality_rating")?,
            method: require("counting_method")?,
            level: require("resource_level")?,
            dev_type: require("development_type")?,
            cells,
            effort: require("normalized_effort")?,
            gsc,
        })
    }

    fn parse(&self, row: &csv::StringRecord) -> std::result::Result<ProjectRecord, String> {
        let field = |i: usize| row.get(i).map(str::trim).unwrap_or("");

        let id = field(self.id);
        if id.is_empty() {
            return Err("empty id".into());
        }
        let quality_rating = field(self.quality).parse::<QualityRating>()?;
        let resource_level = field(self.level).parse::<u32>().map_err(|_| {
            format!(
                "resource_level '{}' is not a nonnegative integer",
                field(self.level)
            )
        })?;

        let raw: Vec<&str> = self.cells.iter().map(|(_, _, i)| field(*i)).collect();
        let breakdown = if raw.iter().all(|s| s.is_empty()) {
            None
        } else {
            let mut b = UfpBreakdown::default();
            for ((k, l, _), s) in self.cells.iter().zip(&raw) {
                let n = s.parse::<u32>().map_err(|_| {
                    format!(
                        "{}_{} '{s}' is not a nonnegative integer",
                        k.code().to_ascii_lowercase(),
                        l.column_suffix()
                    )
                })?;
                b.set(*k, *l, n);
            }
            Some(b)
        };

        let normalized_effort = match field(self.effort) {
            "" => None,
            s => {
                let e = s
                    .parse::<f64>()
                    .map_err(|_| format!("normalized_effort '{s}' is not a number"))?;
                if !(e > 0.0 && e.is_finite()) {
                    return Err(format!("normalized_effort must be positive, got {s}"));
                }
                Some(e)
            }
        };

        let gsc = match &self.gsc {
            None => None,
            Some(cols) => {
                let raw: Vec<&str> = cols.iter().map(|i| field(*i)).collect();
                if raw.iter().all(|s| s.is_empty()) {
                    None
                } else {
                    let mut out = [0u8; GSC_COUNT];
                    for (j, s) in raw.iter().enumerate() {
                        out[j] =
                            s.parse::<u8>().ok().filter(|v| *v <= 5).ok_or_else(|| {
                                format!("gsc_{} '{s}' must be an integer 0-5", j + 1)
                            })?;
                    }
                    Some(out)
                }
            }
        };

        Ok(ProjectRecord {
            id: id.to_string(),
            quality_rating,
            counting_method: field(self.method).to_string(),
            resource_level,
            development_type: field(self.dev_type).to_string(),
            breakdown,
            normalized_effort,
            gsc,
        })
    }
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<LoadOutcome> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, path)
}

/// Reads records from any reader; `origin` is used in error messages.
pub fn read_csv<R: Read>(reader: R, origin: &Path) -> Result<LoadOutcome> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Schema {
        path: origin.to_path_buf(),
        message: format!("cannot read header: {e}"),
    })?;
    let columns = Columns::resolve(headers, origin)?;
    let width = headers.len();

    let mut out = LoadOutcome::default();
    for result in rdr.records() {
        let row = match result {
            Ok(row) => row,
            Err(e) => {
                if let csv::ErrorKind::Io(_) = e.kind() {
                    return Err(e.into());
                }
                out.rejects.push(RejectedRow {
                    line: e.position().map_or(0, |p| p.line()),
                    id: None,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != width {
            out.rejects.push(RejectedRow {
                line,
                id: row.get(columns.id).map(|s| s.trim().to_string()),
                reason: format!("expected {width} fields, found {}", row.len()),
            });
            continue;
        }
        match columns.parse(&row) {
            Ok(rec) => out.records.push(rec),
            Err(reason) => out.rejects.push(RejectedRow {
                line,
                id: row
                    .get(columns.id)
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty()),
                reason,
            }),
        }
    }
    Ok(out)
}

pub fn write_csv<W: Write>(writer: W, records: &[ProjectRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(csv_header())?;
    for r in records {
        let mut row: Vec<String> = vec![
            r.id.clone(),
            r.quality_rating.to_string(),
            r.counting_method.clone(),
            r.resource_level.to_string(),
            r.development_type.clone(),
        ];
        for (k, l, _) in breakdown_columns() {
            row.push(
                r.breakdown
                    .map(|b| b.get(k, l).to_string())
                    .unwrap_or_default(),
            );
        }
        row.push(
            r.normalized_effort
                .map(|e| e.to_string())
                .unwrap_or_default(),
        );
        for j in 0..GSC_COUNT {
            row.push(r.gsc.map(|g| g[j].to_string()).unwrap_or_default());
        }
        wtr.write_record(&row)?;
    }
    wtr.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn save_csv(path: impl AsRef<Path>, records: &[ProjectRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(file, records)
}

fn normalized(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .collect::<String>()
        .to_ascii_lowercase()
}

/// The five repository selection criteria: quality rating A or B, IFPUG
/// counting, effort recorded at resource level 1, new development or
/// re-development, and both the UFP breakdown and all 14 GSC ratings present.
pub fn passes_isbsg_filter(r: &ProjectRecord) -> bool {
    let quality = matches!(r.quality_rating, QualityRating::A | QualityRating::B);
    let method = normalized(&r.counting_method) == "ifpug";
    let level = r.resource_level == 1;
    let dev = matches!(
        normalized(&r.development_type).as_str(),
        "newdevelopment" | "redevelopment"
    );
    let complete = r.breakdown.is_some() && r.gsc.is_some();
    quality && method && level && dev && complete
}

pub fn filter_isbsg(records: &[ProjectRecord]) -> Vec<ProjectRecord> {
    records
        .iter()
        .filter(|r| passes_isbsg_filter(r))
        .cloned()
        .collect()
}
