//! On-disk formats: binary state snapshots and fixed-schema CSV tables.
//!
//! Snapshot layout, all little-endian: magic `CKDV`, `u32` version, `u32` n, `f64` period,
//! `f64` time, then `n` samples of `u` and `n` samples of `v` as `f64`.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{inverse, GridSpec};
use crate::systems::State;

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"CKDV";
pub const SNAPSHOT_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 8 + 8;

/// Physical samples of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub period: f64,
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl Snapshot {
    pub fn from_state(state: &State) -> Self {
        Self {
            period: state.grid().period(),
            t: state.t,
            u: inverse(&state.u),
            v: inverse(&state.v),
        }
    }

    pub fn to_state(&self) -> Result<State> {
        let grid = GridSpec::new(self.u.len(), self.period)?;
        State::from_samples(&grid, &self.u, &self.v, self.t)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        if self.u.len() != self.v.len() {
            return Err(Error::LengthMismatch {
                expected: self.u.len(),
                got: self.v.len(),
            });
        }
        let n = u32::try_from(self.u.len()).map_err(|_| Error::Format("too many samples".into()))?;
        let mut out = Vec::with_capacity(HEADER_LEN + 16 * self.u.len());
        out.extend_from_slice(SNAPSHOT_MAGIC);
        out.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
        out.extend_from_slice(&n.to_le_bytes());
        out.extend_from_slice(&self.period.to_le_bytes());
        out.extend_from_slice(&self.t.to_le_bytes());
        for x in self.u.iter().chain(&self.v) {
            out.extend_from_slice(&x.to_le_bytes());
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Format(format!("snapshot too short: {} bytes", bytes.len())));
        }
        if &bytes[0..4] != SNAPSHOT_MAGIC {
            return Err(Error::Format("bad snapshot magic".into()));
        }
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
        let f64_at = |i: usize| f64::from_le_bytes(bytes[i..i + 8].try_into().expect("8 bytes"));
        let version = u32_at(4);
        if version != SNAPSHOT_VERSION {
            return Err(Error::Format(format!("unsupported snapshot version {version}")));
        }
        let n = u32_at(8) as usize;
        let expected = HEADER_LEN + 16 * n;
        if bytes.len() != expected {
            return Err(Error::Format(format!(
                "snapshot length {} does not match header ({expected})",
                bytes.len()
            )));
        }
        let values: Vec<f64> = (0..2 * n).map(|k| f64_at(HEADER_LEN + 8 * k)).collect();
        Ok(Self {
            period: f64_at(12),
            t: f64_at(20),
            u: values[..n].to_vec(),
            v: values[n..].to_vec(),
        })
    }
}

pub fn write_snapshot(path: &Path, state: &State) -> Result<()> {
    fs::write(path, Snapshot::from_state(state).to_bytes()?)?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    Snapshot::from_bytes(&fs::read(path)?)
}

/// One CSV field.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // 17 significant digits round-trip every f64
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Float)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

/// A header plus rows of equal width.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(Error::LengthMismatch {
                expected: self.header.len(),
                got: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }
}

pub fn write_csv(path: &Path, table: &Table) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::render))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    fs::File::create(path)?.write_all(&bytes)?;
    Ok(())
}

/// Header and raw string rows.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
        .collect::<std::result::Result<_, _>>()?;
    Ok((header, rows))
}
