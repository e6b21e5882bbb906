//! Text formats.
//!
//! A coefficient file is one JSON header line followed by CSV:
//!
//! ```text
//! {"schema_version":1,"d":1,"L":[4],"N":[2],"kind":"real"}
//! i1,j1,re,im
//! 1,0,1.0000000000000000e0,0.0000000000000000e0
//! ...
//! ```
//!
//! Depth indices are 1-based, shift indices 0-based, and values carry 17
//! significant digits so that doubles round-trip exactly. Rows are written
//! in flat index order; the reader accepts any order but every index must
//! appear exactly once.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::sopw::SopwBasis1D;
use crate::{CoeffTensor, Error, LatticeDomain, MultiIndex, Result, C64};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    Real,
    Complex,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoeffHeader {
    pub schema_version: u32,
    pub d: usize,
    #[serde(rename = "L")]
    pub shifts: Vec<usize>,
    #[serde(rename = "N")]
    pub depths: Vec<usize>,
    pub kind: ValueKind,
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_columns(d: usize) -> String {
    let mut cols: Vec<String> = (1..=d).map(|k| format!("i{k}")).collect();
    cols.extend((1..=d).map(|k| format!("j{k}")));
    cols.push("re".into());
    cols.push("im".into());
    cols.join(",")
}

/// Writes `t`; the kind is `real` when every imaginary part is exactly 0.
pub fn write_coeff<W: Write>(mut w: W, t: &CoeffTensor) -> Result<()> {
    let domain = t.domain();
    let kind = if t.data().iter().all(|z| z.im == 0.0) {
        ValueKind::Real
    } else {
        ValueKind::Complex
    };
    let header = CoeffHeader {
        schema_version: SCHEMA_VERSION,
        d: domain.dim(),
        shifts: domain.shifts().to_vec(),
        depths: domain.depths().to_vec(),
        kind,
    };
    let json = serde_json::to_string(&header).map_err(|e| Error::Config(e.to_string()))?;
    writeln!(w, "{json}")?;
    writeln!(w, "{}", csv_columns(domain.dim()))?;
    for (flat, z) in t.data().iter().enumerate() {
        let idx = domain.unflatten(flat)?;
        let mut fields: Vec<String> = idx.depth.iter().map(|i| i.to_string()).collect();
        fields.extend(idx.shift.iter().map(|j| j.to_string()));
        fields.push(fmt_f64(z.re));
        fields.push(fmt_f64(z.im));
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn coeff_to_string(t: &CoeffTensor) -> String {
    let mut buf = Vec::new();
    write_coeff(&mut buf, t).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("output is ASCII")
}

pub fn write_coeff_file(path: impl AsRef<Path>, t: &CoeffTensor) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    write_coeff(&mut f, t)?;
    f.flush()?;
    Ok(())
}

fn parse_field<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::parse(line, format!("cannot parse {what} from {s:?}")))
}

pub fn read_coeff<R: BufRead>(r: R) -> Result<CoeffTensor> {
    let mut lines = r.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, first) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty file"))?;
    let header: CoeffHeader = serde_json::from_str(&first?)
        .map_err(|e| Error::parse(1, format!("bad header: {e}")))?;
    if header.schema_version != SCHEMA_VERSION {
        return Err(Error::parse(
            1,
            format!("unsupported schema version {}", header.schema_version),
        ));
    }
    if header.d != header.shifts.len() || header.d != header.depths.len() {
        return Err(Error::parse(1, "header dimension disagrees with L and N"));
    }
    let domain = LatticeDomain::new(header.shifts.clone(), header.depths.clone())
        .map_err(|e| Error::parse(1, e.to_string()))?;
    let d = header.d;
    let (_, cols) = lines
        .next()
        .ok_or_else(|| Error::parse(2, "missing column header"))?;
    if cols?.trim() != csv_columns(d) {
        return Err(Error::parse(2, format!("expected columns {}", csv_columns(d))));
    }

    let mut data = vec![C64::new(0.0, 0.0); domain.len()];
    let mut seen = vec![false; domain.len()];
    let mut rows = 0;
    for (line_no, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 * d + 2 {
            return Err(Error::parse(
                line_no,
                format!("expected {} fields, found {}", 2 * d + 2, fields.len()),
            ));
        }
        let depth = fields[..d]
            .iter()
            .map(|s| parse_field::<usize>(s, line_no, "depth index"))
            .collect::<Result<Vec<_>>>()?;
        let shift = fields[d..2 * d]
            .iter()
            .map(|s| parse_field::<usize>(s, line_no, "shift index"))
            .collect::<Result<Vec<_>>>()?;
        let re: f64 = parse_field(fields[2 * d], line_no, "real part")?;
        let im: f64 = parse_field(fields[2 * d + 1], line_no, "imaginary part")?;
        if !re.is_finite() || !im.is_finite() {
            return Err(Error::parse(line_no, "non-finite value"));
        }
        if header.kind == ValueKind::Real && im != 0.0 {
            return Err(Error::parse(line_no, "nonzero imaginary part in a real file"));
        }
        let flat = domain
            .flatten(&MultiIndex::new(depth, shift))
            .map_err(|e| Error::parse(line_no, e.to_string()))?;
        if seen[flat] {
            return Err(Error::parse(line_no, "duplicate index"));
        }
        seen[flat] = true;
        data[flat] = C64::new(re, im);
        rows += 1;
    }
    if rows != domain.len() {
        return Err(Error::parse(
            0,
            format!("expected {} rows, found {rows}", domain.len()),
        ));
    }
    CoeffTensor::new(domain, data)
}

pub fn parse_coeff(s: &str) -> Result<CoeffTensor> {
    read_coeff(s.as_bytes())
}

pub fn read_coeff_file(path: impl AsRef<Path>) -> Result<CoeffTensor> {
    read_coeff(BufReader::new(fs::File::open(path)?))
}

/// Header of a SOPW Fourier table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableHeader {
    pub schema_version: u32,
    pub kind: String,
    #[serde(rename = "L")]
    pub shifts: usize,
    #[serde(rename = "N")]
    pub depth: usize,
}

/// One row `(k, j, n, a)` of a SOPW table: `θ^k_j` has coefficient `a` on `φ_n`.
pub type TableRow = (usize, usize, i64, C64);

/// Writes the Fourier coefficients of every `θ^k_j`, `k ≤ N`, `j < L`.
pub fn write_sopw_table<W: Write>(mut w: W, basis: &SopwBasis1D) -> Result<()> {
    let header = TableHeader {
        schema_version: SCHEMA_VERSION,
        kind: "sopw_table".into(),
        shifts: basis.shifts(),
        depth: basis.depth(),
    };
    let json = serde_json::to_string(&header).map_err(|e| Error::Config(e.to_string()))?;
    writeln!(w, "{json}")?;
    writeln!(w, "k,j,n,re,im")?;
    for k in 1..=basis.depth() {
        for j in 0..basis.shifts() {
            for (n, a) in basis.fourier_coeffs(k, j)? {
                writeln!(w, "{k},{j},{n},{},{}", fmt_f64(a.re), fmt_f64(a.im))?;
            }
        }
    }
    Ok(())
}

pub fn read_sopw_table<R: BufRead>(r: R) -> Result<(TableHeader, Vec<TableRow>)> {
    let mut lines = r.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, first) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty file"))?;
    let header: TableHeader = serde_json::from_str(&first?)
        .map_err(|e| Error::parse(1, format!("bad header: {e}")))?;
    if header.kind != "sopw_table" {
        return Err(Error::parse(1, format!("unexpected kind {:?}", header.kind)));
    }
    let (_, cols) = lines
        .next()
        .ok_or_else(|| Error::parse(2, "missing column header"))?;
    if cols?.trim() != "k,j,n,re,im" {
        return Err(Error::parse(2, "expected columns k,j,n,re,im"));
    }
    let mut rows = Vec::new();
    for (line_no, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(Error::parse(line_no, format!("expected 5 fields, found {}", f.len())));
        }
        rows.push((
            parse_field(f[0], line_no, "depth")?,
            parse_field(f[1], line_no, "shift")?,
            parse_field(f[2], line_no, "frequency")?,
            C64::new(
                parse_field(f[3], line_no, "real part")?,
                parse_field(f[4], line_no, "imaginary part")?,
            ),
        ));
    }
    Ok((header, rows))
}

/// Writes named columns of equal length as CSV.
pub fn write_columns<W: Write>(mut w: W, columns: &[(&str, &[f64])]) -> Result<()> {
    let names: Vec<&str> = columns.iter().map(|(n, _)| *n).collect();
    writeln!(w, "{}", names.join(","))?;
    let rows = columns.first().map_or(0, |(_, c)| c.len());
    if let Some((name, _)) = columns.iter().find(|(_, c)| c.len() != rows) {
        return Err(Error::Config(format!("column {name} has a different length")));
    }
    for i in 0..rows {
        let fields: Vec<String> = columns.iter().map(|(_, c)| fmt_f64(c[i])).collect();
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let d = LatticeDomain::new([2, 3], [2, 1]).unwrap();
        let data: Vec<C64> = (0..d.len())
            .map(|i| C64::new((i as f64).sqrt() / 3.0, -1.0 / (i as f64 + 7.0)))
            .collect();
        let t = CoeffTensor::new(d, data).unwrap();
        let s = coeff_to_string(&t);
        let back = parse_coeff(&s).unwrap();
        assert_eq!(back, t);
        assert_eq!(coeff_to_string(&back), s);
    }

    #[test]
    fn real_kind_detected() {
        let d = LatticeDomain::one_d(2, 1).unwrap();
        let t = CoeffTensor::from_real(d, &[1.0, -0.5]).unwrap();
        let s = coeff_to_string(&t);
        assert!(s.starts_with(r#"{"schema_version":1,"d":1,"L":[2],"N":[1],"kind":"real"}"#));
        assert!(s.contains("\ni1,j1,re,im\n1,0,1.0000000000000000e0,0.0000000000000000e0\n"));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let head = r#"{"schema_version":1,"d":1,"L":[2],"N":[1],"kind":"real"}"#;
        let bad = format!("{head}\ni1,j1,re,im\n1,0,1.0,0.0\n1,x,0.0,0.0\n");
        match parse_coeff(&bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        let out_of_range = format!("{head}\ni1,j1,re,im\n1,0,1.0,0.0\n1,2,0.0,0.0\n");
        assert!(matches!(
            parse_coeff(&out_of_range),
            Err(Error::Parse { line: 4, .. })
        ));
        let dup = format!("{head}\ni1,j1,re,im\n1,0,1.0,0.0\n1,0,0.0,0.0\n");
        assert!(matches!(parse_coeff(&dup), Err(Error::Parse { line: 4, .. })));
        let short = format!("{head}\ni1,j1,re,im\n1,0,1.0,0.0\n");
        assert!(parse_coeff(&short).is_err());
        let imag = format!("{head}\ni1,j1,re,im\n1,0,1.0,0.5\n1,1,0.0,0.0\n");
        assert!(matches!(parse_coeff(&imag), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn table_round_trip() {
        let b = SopwBasis1D::new(4, 2).unwrap();
        let mut buf = Vec::new();
        write_sopw_table(&mut buf, &b).unwrap();
        let (h, rows) = read_sopw_table(buf.as_slice()).unwrap();
        assert_eq!((h.shifts, h.depth), (4, 2));
        let mut expected = Vec::new();
        for k in 1..=2 {
            for j in 0..4 {
                for (n, a) in b.fourier_coeffs(k, j).unwrap() {
                    expected.push((k, j, n, a));
                }
            }
        }
        assert_eq!(rows, expected);
    }
}
