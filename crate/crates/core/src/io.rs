//! File formats: CSV tables with `# key: value` comment headers for grids
//! and d-function tabulations, JSON for state summaries. Floats are written
//! with 17 significant digits so every file parses back to the same bits.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::half_integer::HalfInteger;
use crate::state::{DecomposedState, Sector, StateMetadata};
use crate::wigner::WignerField;

pub const GRID_COLUMNS: [&str; 7] = ["xi_re", "xi_im", "tau", "chi", "w_re", "w_im", "w_abs"];
pub const DFUNC_COLUMNS: [&str; 5] = ["twice_k", "twice_mu", "twice_mu_prime", "tau", "d_value"];

/// `x` with 17 significant digits in scientific notation.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub xi_re: f64,
    pub xi_im: f64,
    pub tau: f64,
    pub chi: f64,
    pub w_re: f64,
    pub w_im: f64,
    pub w_abs: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DfuncRow {
    pub twice_k: i64,
    pub twice_mu: i64,
    pub twice_mu_prime: i64,
    pub tau: f64,
    pub d_value: f64,
}

/// Ordered `key: value` pairs written as leading comment lines.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Header(pub Vec<(String, String)>);

impl Header {
    pub fn push(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.0.push((key.into(), value.into()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Header lines describing the truncation of the source state.
    pub fn with_metadata(mut self, m: &StateMetadata) -> Self {
        self.push("cutoff_a", m.cutoff_a.to_string());
        self.push("cutoff_b", m.cutoff_b.to_string());
        self.push("boundary_mass", format_float(m.boundary_mass));
        self.push("truncated_mass", format_float(m.truncated_mass));
        self.push("tail_warning", m.tail_warning.to_string());
        self
    }

    fn write(&self, w: &mut impl Write) -> Result<()> {
        for (k, v) in &self.0 {
            if k.contains(':') || k.contains('\n') || v.contains('\n') {
                return Err(Error::InvalidArgument(format!("header entry '{k}' cannot be written")));
            }
            writeln!(w, "# {k}: {v}")?;
        }
        Ok(())
    }
}

/// A parsed or to-be-written table.
#[derive(Clone, Debug, PartialEq)]
pub struct Table<R> {
    pub header: Header,
    pub rows: Vec<R>,
}

pub type GridTable = Table<GridRow>;
pub type DfuncTable = Table<DfuncRow>;

trait Columns: Sized {
    const COLUMNS: &'static [&'static str];
    fn cells(&self) -> Vec<String>;
    fn parse(record: &csv::StringRecord) -> Result<Self>;
}

fn float_cell(record: &csv::StringRecord, i: usize) -> Result<f64> {
    let s = record.get(i).ok_or_else(|| Error::Schema(format!("missing column {i}")))?;
    s.trim().parse().map_err(|_| Error::Schema(format!("bad number '{s}' in column {i}")))
}

fn int_cell(record: &csv::StringRecord, i: usize) -> Result<i64> {
    let s = record.get(i).ok_or_else(|| Error::Schema(format!("missing column {i}")))?;
    s.trim().parse().map_err(|_| Error::Schema(format!("bad integer '{s}' in column {i}")))
}

impl Columns for GridRow {
    const COLUMNS: &'static [&'static str] = &GRID_COLUMNS;

    fn cells(&self) -> Vec<String> {
        [self.xi_re, self.xi_im, self.tau, self.chi, self.w_re, self.w_im, self.w_abs]
            .iter()
            .map(|&x| format_float(x))
            .collect()
    }

    fn parse(r: &csv::StringRecord) -> Result<Self> {
        Ok(Self {
            xi_re: float_cell(r, 0)?,
            xi_im: float_cell(r, 1)?,
            tau: float_cell(r, 2)?,
            chi: float_cell(r, 3)?,
            w_re: float_cell(r, 4)?,
            w_im: float_cell(r, 5)?,
            w_abs: float_cell(r, 6)?,
        })
    }
}

impl Columns for DfuncRow {
    const COLUMNS: &'static [&'static str] = &DFUNC_COLUMNS;

    fn cells(&self) -> Vec<String> {
        vec![
            self.twice_k.to_string(),
            self.twice_mu.to_string(),
            self.twice_mu_prime.to_string(),
            format_float(self.tau),
            format_float(self.d_value),
        ]
    }

    fn parse(r: &csv::StringRecord) -> Result<Self> {
        Ok(Self {
            twice_k: int_cell(r, 0)?,
            twice_mu: int_cell(r, 1)?,
            twice_mu_prime: int_cell(r, 2)?,
            tau: float_cell(r, 3)?,
            d_value: float_cell(r, 4)?,
        })
    }
}

#[allow(private_bounds)]
impl<R: Columns> Table<R> {
    pub fn write(&self, mut w: impl Write) -> Result<()> {
        self.header.write(&mut w)?;
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        out.write_record(R::COLUMNS).map_err(csv_err)?;
        for row in &self.rows {
            out.write_record(row.cells()).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn read(r: impl BufRead) -> Result<Self> {
        let mut header = Header::default();
        let mut body = String::new();
        let mut in_header = true;
        for line in r.lines() {
            let line = line?;
            if in_header {
                if let Some(rest) = line.strip_prefix("# ") {
                    let (k, v) = rest
                        .split_once(": ")
                        .ok_or_else(|| Error::Schema(format!("malformed header line '{line}'")))?;
                    header.push(k, v);
                    continue;
                }
                in_header = false;
            }
            body.push_str(&line);
            body.push('\n');
        }
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
        let names = reader.headers().map_err(csv_err)?;
        if names.iter().ne(R::COLUMNS.iter().copied()) {
            return Err(Error::Schema(format!(
                "expected columns {}, found {}",
                R::COLUMNS.join(","),
                names.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let rows = reader
            .records()
            .map(|rec| R::parse(&rec.map_err(csv_err)?))
            .collect::<Result<_>>()?;
        Ok(Self { header, rows })
    }

    pub fn parse_str(s: &str) -> Result<Self> {
        Self::read(s.as_bytes())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Schema(format!("csv: {e}"))
}

impl GridTable {
    /// Rows of a field with the convention, grid and truncation metadata in
    /// the header, followed by `extra`.
    pub fn from_field(field: &WignerField<f64>, extra: Header) -> Result<Self> {
        let mut header = Header::default();
        header.push("convention", field.convention.name());
        header.push("grid", serde_json::to_string(&field.grid)?);
        let mut header = header.with_metadata(&field.metadata);
        header.0.extend(extra.0);
        let rows = field
            .points
            .iter()
            .zip(&field.values)
            .map(|(p, w)| GridRow {
                xi_re: p.xi.re,
                xi_im: p.xi.im,
                tau: p.point.tau(),
                chi: p.point.chi(),
                w_re: w.re,
                w_im: w.im,
                w_abs: w.norm(),
            })
            .collect();
        Ok(Self { header, rows })
    }
}

/// JSON summary of a decomposed state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSummary {
    pub metadata: StateMetadata,
    pub norm_sqr: f64,
    pub blocks: Vec<BlockSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockSummary {
    pub k: HalfInteger,
    pub sector: Sector,
    pub norm_sqr: f64,
    /// `Psi_{k, k+j}` as `[re, im]`.
    pub psi: Vec<[f64; 2]>,
}

impl StateSummary {
    pub fn new(state: &DecomposedState<f64>) -> Self {
        Self {
            metadata: *state.metadata(),
            norm_sqr: state.norm_sqr(),
            blocks: state
                .blocks()
                .iter()
                .map(|b| BlockSummary {
                    k: b.k(),
                    sector: b.sector(),
                    norm_sqr: b.norm_sqr(),
                    psi: b.psi().iter().map(|z| [z.re, z.im]).collect(),
                })
                .collect(),
        }
    }
}
