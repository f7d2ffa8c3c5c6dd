//! Text formats: matrices, basis manifests, energy tables and output tables.
//!
//! Sparse matrix files start with `dim nnz` followed by `row col value`
//! lines (zero-based, upper triangle). Dense files start with `dense d`
//! followed by `d` rows of `d` numbers. `#` starts a comment line.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::linalg::HermitianOperator;
use crate::potential::EnergyTable;
use crate::schwinger::{ChargeConfig, LocalProfile, PhysicalBasisState, SparseHamiltonian};
use crate::vqe::EnergyRecord;
use crate::{Error, Result};

/// Relative asymmetry accepted silently.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Relative asymmetry repaired with a warning; anything larger is rejected.
pub const SYMMETRIZE_LIMIT: f64 = 1e-6;

pub fn write_sparse<W: Write>(h: &HermitianOperator, mut w: W) -> Result<()> {
    let t = h.triplets();
    writeln!(w, "{} {}", h.dim(), t.len())?;
    for (i, j, v) in t {
        writeln!(w, "{i} {j} {v:e}")?;
    }
    Ok(())
}

pub fn write_sparse_hamiltonian<W: Write>(h: &SparseHamiltonian, mut w: W) -> Result<()> {
    writeln!(w, "{} {}", h.dim, h.entries.len())?;
    for (i, j, v) in &h.entries {
        writeln!(w, "{i} {j} {v:e}")?;
    }
    Ok(())
}

pub fn write_dense<W: Write>(h: &HermitianOperator, mut w: W) -> Result<()> {
    writeln!(w, "dense {}", h.dim())?;
    for i in 0..h.dim() {
        let row: Vec<String> = h.row(i).iter().map(|v| format!("{v:e}")).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    Ok(())
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::Parse(format!("line {line}: missing {what}")))?;
    tok.parse().map_err(|_| Error::Parse(format!("line {line}: bad {what} {tok:?}")))
}

/// Reads either format and applies the symmetry policy of
/// [`enforce_symmetry`].
pub fn read_matrix<R: BufRead>(r: R) -> Result<HermitianOperator> {
    let mut lines = r
        .lines()
        .enumerate()
        .map(|(i, l)| l.map(|s| (i + 1, s)))
        .filter(|l| l.as_ref().map_or(true, |(_, s)| !s.trim().is_empty() && !s.trim_start().starts_with('#')));
    let (ln, header) = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))??;
    let mut tok = header.split_whitespace();
    let first = tok.next().unwrap_or_default();
    if first == "dense" {
        let d: usize = parse_num(tok.next(), ln, "dimension")?;
        if d == 0 {
            return Err(Error::Parse("dimension must be ≥ 1".into()));
        }
        let mut data = Vec::with_capacity(d * d);
        for row in 0..d {
            let (ln, s) = lines.next().ok_or_else(|| Error::Parse(format!("expected {d} rows, found {row}")))??;
            let vals = s.split_whitespace().map(|t| parse_num::<f64>(Some(t), ln, "entry")).collect::<Result<Vec<_>>>()?;
            if vals.len() != d {
                return Err(Error::Parse(format!("line {ln}: expected {d} entries, found {}", vals.len())));
            }
            data.extend(vals);
        }
        if let Some(extra) = lines.next() {
            return Err(Error::Parse(format!("line {}: trailing data", extra?.0)));
        }
        return enforce_symmetry(d, data);
    }
    let d: usize = parse_num(Some(first), ln, "dimension")?;
    let nnz: usize = parse_num(tok.next(), ln, "entry count")?;
    if d == 0 {
        return Err(Error::Parse("dimension must be ≥ 1".into()));
    }
    let mut data = vec![0.0; d * d];
    let mut seen = vec![false; d * d];
    for k in 0..nnz {
        let (ln, s) = lines.next().ok_or_else(|| Error::Parse(format!("expected {nnz} entries, found {k}")))??;
        let mut t = s.split_whitespace();
        let i: usize = parse_num(t.next(), ln, "row")?;
        let j: usize = parse_num(t.next(), ln, "column")?;
        let v: f64 = parse_num(t.next(), ln, "value")?;
        if i >= d || j >= d {
            return Err(Error::Parse(format!("line {ln}: index ({i}, {j}) outside dimension {d}")));
        }
        if seen[i * d + j] {
            return Err(Error::Parse(format!("line {ln}: duplicate entry ({i}, {j})")));
        }
        seen[i * d + j] = true;
        data[i * d + j] = v;
    }
    if let Some(extra) = lines.next() {
        return Err(Error::Parse(format!("line {}: trailing data", extra?.0)));
    }
    // a triangle-only file is mirrored
    for i in 0..d {
        for j in 0..d {
            if seen[i * d + j] && !seen[j * d + i] {
                data[j * d + i] = data[i * d + j];
            }
        }
    }
    enforce_symmetry(d, data)
}

/// Accepts asymmetry up to [`SYMMETRY_TOL`] times the largest entry,
/// symmetrizes with a warning up to [`SYMMETRIZE_LIMIT`], and rejects the
/// rest.
pub fn enforce_symmetry(dim: usize, data: Vec<f64>) -> Result<HermitianOperator> {
    if data.len() != dim * dim {
        return Err(Error::Dimension { expected: dim * dim, found: data.len() });
    }
    let scale = data.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut asym = 0.0_f64;
    for i in 0..dim {
        for j in i + 1..dim {
            asym = asym.max((data[i * dim + j] - data[j * dim + i]).abs());
        }
    }
    let rel = asym / scale;
    if rel > SYMMETRIZE_LIMIT {
        return Err(Error::Asymmetric(rel));
    }
    if rel > SYMMETRY_TOL {
        log::warn!("matrix asymmetric by {rel:e} relative; symmetrizing");
    }
    HermitianOperator::symmetrized(dim, data)
}

/// One line per basis state: index, occupation bits, link fields.
pub fn write_basis_manifest<W: Write>(basis: &[PhysicalBasisState], mut w: W) -> Result<()> {
    writeln!(w, "# index occupations links")?;
    for (i, s) in basis.iter().enumerate() {
        let links: Vec<String> = s.links.iter().map(|l| l.to_string()).collect();
        writeln!(w, "{i} {} {}", s.bit_string(), links.join(","))?;
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct EnergyRow {
    config: String,
    value: f64,
    stat_sigma: f64,
    sys_sigma: f64,
}

pub fn write_energy_table<W: Write>(table: &EnergyTable, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for (c, e) in &table.entries {
        out.serialize(EnergyRow { config: c.to_string(), value: e.value, stat_sigma: e.stat_sigma, sys_sigma: e.sys_sigma })?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_energy_table<R: std::io::Read>(r: R, n_sites: usize) -> Result<EnergyTable> {
    let mut table = EnergyTable::new(n_sites);
    for row in csv::Reader::from_reader(r).deserialize() {
        let row: EnergyRow = row?;
        let config: ChargeConfig = row.config.parse()?;
        if table.entries.contains_key(&config) {
            return Err(Error::Parse(format!("duplicate row for {config}")));
        }
        table.insert(config, EnergyRecord::new(row.value, row.stat_sigma, row.sys_sigma));
    }
    Ok(table)
}

/// Output flavours shared by every table the CLI prints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutputFormat {
    Csv,
    JsonLines,
    GnuplotData,
}

impl OutputFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::JsonLines => "jsonl",
            OutputFormat::GnuplotData => "dat",
        }
    }
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json-lines" | "jsonl" => Ok(OutputFormat::JsonLines),
            "gnuplot-data" | "gnuplot" => Ok(OutputFormat::GnuplotData),
            _ => Err(Error::Parse(format!("unknown output format {s:?}"))),
        }
    }
}

/// Named columns of numbers or strings.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Dimension { expected: self.columns.len(), found: row.len() });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write<W: Write>(&self, format: OutputFormat, mut w: W) -> Result<()> {
        let text = |v: &Value| match v {
            Value::String(s) => s.clone(),
            Value::Null => String::new(),
            other => other.to_string(),
        };
        match format {
            OutputFormat::Csv => {
                let mut out = csv::Writer::from_writer(w);
                out.write_record(&self.columns)?;
                for r in &self.rows {
                    out.write_record(r.iter().map(text))?;
                }
                out.flush()?;
            }
            OutputFormat::JsonLines => {
                for r in &self.rows {
                    let obj: Map<String, Value> = self.columns.iter().cloned().zip(r.iter().cloned()).collect();
                    writeln!(w, "{}", Value::Object(obj))?;
                }
            }
            OutputFormat::GnuplotData => {
                writeln!(w, "# {}", self.columns.join(" "))?;
                for r in &self.rows {
                    let cells: Vec<String> = r
                        .iter()
                        .map(|v| match v {
                            Value::String(s) => format!("\"{s}\""),
                            Value::Null => "NaN".into(),
                            other => other.to_string(),
                        })
                        .collect();
                    writeln!(w, "{}", cells.join(" "))?;
                }
            }
        }
        Ok(())
    }
}

/// `site, rho, link, e2` rows; link `n` joins sites `n` and `n + 1`.
pub fn profile_table(profile: &LocalProfile) -> Table {
    let mut t = Table::new(&["site", "rho", "link", "e2"]);
    for n in 0..profile.len() {
        t.rows.push(vec![n.into(), profile.rho[n].into(), n.into(), profile.e2[n].into()]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op() -> HermitianOperator {
        HermitianOperator::from_rows(&[vec![1.5, -0.25, 0.0], vec![-0.25, 2.0, 1e-3], vec![0.0, 1e-3, -7.125]]).unwrap()
    }

    #[test]
    fn sparse_round_trip() {
        let mut buf = Vec::new();
        write_sparse(&op(), &mut buf).unwrap();
        assert_eq!(read_matrix(&buf[..]).unwrap(), op());
    }

    #[test]
    fn dense_round_trip() {
        let mut buf = Vec::new();
        write_dense(&op(), &mut buf).unwrap();
        assert_eq!(read_matrix(&buf[..]).unwrap(), op());
    }

    #[test]
    fn symmetry_policy() {
        let near = "dense 2\n1 0.5\n0.50000001 2\n";
        let h = read_matrix(near.as_bytes()).unwrap();
        assert_eq!(h.get(0, 1), h.get(1, 0));
        let far = "dense 2\n1 0.5\n0.6 2\n";
        assert!(matches!(read_matrix(far.as_bytes()), Err(Error::Asymmetric(_))));
    }

    #[test]
    fn malformed_files() {
        for bad in ["", "dense 2\n1 2\n", "3 1\n0 5 1.0\n", "2 2\n0 0 1\n0 0 2\n", "dense x\n", "1 1\n0 0 abc\n"] {
            assert!(matches!(read_matrix(bad.as_bytes()), Err(Error::Parse(_))), "{bad:?}");
        }
    }

    #[test]
    fn energy_table_round_trip() {
        let mut t = EnergyTable::new(8);
        t.insert(ChargeConfig::vacuum(), EnergyRecord::new(-2.0, 0.01, 0.02));
        t.insert(ChargeConfig::new(&[0, 2, 1]), EnergyRecord::exact(0.25));
        let mut buf = Vec::new();
        write_energy_table(&t, &mut buf).unwrap();
        assert_eq!(read_energy_table(&buf[..], 8).unwrap(), t);
    }

    #[test]
    fn table_formats() {
        let mut t = Table::new(&["name", "x"]);
        t.push(vec!["a".into(), 1.5.into()]).unwrap();
        let mut out = Vec::new();
        t.write(OutputFormat::JsonLines, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "{\"name\":\"a\",\"x\":1.5}\n");
        let mut out = Vec::new();
        t.write(OutputFormat::GnuplotData, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "# name x\n\"a\" 1.5\n");
        assert!(t.push(vec![1.into()]).is_err());
    }
}
