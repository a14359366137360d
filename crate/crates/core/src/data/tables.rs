//! Human-editable CSV files for weight tables and complexity matrices.
//!
//! Weight file, one row per cell:
//!
//! ```text
//! kind,level,weight
//! ILF,average,10
//! ```
//!
//! Matrix file, one row per record band (three rows per kind). Cuts are the
//! first value of the second and third band and must repeat identically on
//! each of a kind's rows. Kinds without rows keep their default matrix.
//!
//! ```text
//! kind,record_band,det_cut_1,det_cut_2,record_cut_1,record_cut_2,det_band_1,det_band_2,det_band_3
//! ILF,1,20,51,2,6,low,low,average
//! ```
//!
//! Component inventory, one row per counted component:
//!
//! ```text
//! kind,det,records
//! ILF,50,3
//! ```

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fp::{
    ComplexityLevel, ComplexityMatrix, ComponentInstance, ComponentKind, MatrixSet, WeightTable,
};

#[derive(Debug, Serialize, Deserialize)]
struct WeightRow {
    kind: String,
    level: String,
    weight: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct MatrixRow {
    kind: String,
    record_band: usize,
    det_cut_1: u32,
    det_cut_2: u32,
    record_cut_1: u32,
    record_cut_2: u32,
    det_band_1: String,
    det_band_2: String,
    det_band_3: String,
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_weights<R: Read>(reader: R) -> Result<WeightTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut cells: [[Option<f64>; 3]; 5] = [[None; 3]; 5];
    for row in rdr.deserialize::<WeightRow>() {
        let row = row?;
        let kind: ComponentKind = row.kind.parse()?;
        let level: ComplexityLevel = row.level.parse()?;
        let slot = &mut cells[kind.index()][level.index()];
        if slot.is_some() {
            return Err(Error::Config(format!(
                "duplicate weight for {kind} {level}"
            )));
        }
        *slot = Some(row.weight);
    }
    let mut weights = [[0.0; 3]; 5];
    for kind in ComponentKind::ALL {
        for level in ComplexityLevel::ALL {
            weights[kind.index()][level.index()] = cells[kind.index()][level.index()]
                .ok_or_else(|| Error::Config(format!("missing weight for {kind} {level}")))?;
        }
    }
    WeightTable::new(weights)
}

pub fn load_weights(path: impl AsRef<Path>) -> Result<WeightTable> {
    read_weights(open(path.as_ref())?)
}

pub fn write_weights<W: Write>(writer: W, weights: &WeightTable) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for kind in ComponentKind::ALL {
        for level in ComplexityLevel::ALL {
            wtr.serialize(WeightRow {
                kind: kind.code().into(),
                level: level.to_string().to_ascii_lowercase(),
                weight: weights.get(kind, level),
            })?;
        }
    }
    wtr.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn save_weights(path: impl AsRef<Path>, weights: &WeightTable) -> Result<()> {
    write_weights(create(path.as_ref())?, weights)
}

pub fn read_matrices<R: Read>(reader: R) -> Result<MatrixSet> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut by_kind: BTreeMap<ComponentKind, Vec<MatrixRow>> = BTreeMap::new();
    for row in rdr.deserialize::<MatrixRow>() {
        let row = row?;
        let kind: ComponentKind = row.kind.parse()?;
        by_kind.entry(kind).or_default().push(row);
    }

    let mut set = MatrixSet::default();
    for (kind, rows) in by_kind {
        let cuts = |r: &MatrixRow| ([r.det_cut_1, r.det_cut_2], [r.record_cut_1, r.record_cut_2]);
        let (det_cuts, record_cuts) = cuts(&rows[0]);
        let mut grid: [[Option<ComplexityLevel>; 3]; 3] = [[None; 3]; 3];
        for r in &rows {
            if cuts(r) != (det_cuts, record_cuts) {
                return Err(Error::Config(format!(
                    "{kind}: cuts differ between matrix rows"
                )));
            }
            if !(1..=3).contains(&r.record_band) {
                return Err(Error::Config(format!(
                    "{kind}: record_band must be 1-3, got {}",
                    r.record_band
                )));
            }
            let slot = &mut grid[r.record_band - 1];
            if slot[0].is_some() {
                return Err(Error::Config(format!(
                    "{kind}: duplicate row for record band {}",
                    r.record_band
                )));
            }
            *slot = [
                Some(r.det_band_1.parse()?),
                Some(r.det_band_2.parse()?),
                Some(r.det_band_3.parse()?),
            ];
        }
        let mut levels = [[ComplexityLevel::Low; 3]; 3];
        for (rb, row) in grid.iter().enumerate() {
            for (db, cell) in row.iter().enumerate() {
                levels[rb][db] = cell.ok_or_else(|| {
                    Error::Config(format!("{kind}: missing row for record band {}", rb + 1))
                })?;
            }
        }
        set.set(kind, ComplexityMatrix::new(det_cuts, record_cuts, levels)?);
    }
    Ok(set)
}

pub fn load_matrices(path: impl AsRef<Path>) -> Result<MatrixSet> {
    read_matrices(open(path.as_ref())?)
}

pub fn write_matrices<W: Write>(writer: W, matrices: &MatrixSet) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let name = |l: ComplexityLevel| l.to_string().to_ascii_lowercase();
    for kind in ComponentKind::ALL {
        let m = matrices.get(kind);
        for (rb, row) in m.grid().iter().enumerate() {
            wtr.serialize(MatrixRow {
                kind: kind.code().into(),
                record_band: rb + 1,
                det_cut_1: m.det_cuts()[0],
                det_cut_2: m.det_cuts()[1],
                record_cut_1: m.record_cuts()[0],
                record_cut_2: m.record_cuts()[1],
                det_band_1: name(row[0]),
                det_band_2: name(row[1]),
                det_band_3: name(row[2]),
            })?;
        }
    }
    wtr.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn save_matrices(path: impl AsRef<Path>, matrices: &MatrixSet) -> Result<()> {
    write_matrices(create(path.as_ref())?, matrices)
}

#[derive(Debug, Deserialize)]
struct ComponentRow {
    kind: String,
    det: u32,
    records: u32,
}

pub fn read_components<R: Read>(reader: R) -> Result<Vec<ComponentInstance>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    rdr.deserialize::<ComponentRow>()
        .map(|row| {
            let row = row?;
            let c = ComponentInstance::new(row.kind.parse()?, row.det, row.records);
            c.validate()?;
            Ok(c)
        })
        .collect()
}

pub fn load_components(path: impl AsRef<Path>) -> Result<Vec<ComponentInstance>> {
    read_components(open(path.as_ref())?)
}
