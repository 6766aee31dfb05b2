//! Exact text formats and file writers.
//!
//! Dyadic values are written as `a/2^e` (or `0`), never as decimals, so
//! every export reads back to the identical value.
//!
//! Matrix CSV layout: one header record
//! `n=<n>,s0=<0|1|general>,dim=<2ⁿ>,kind=<channel|inverse|general>`
//! followed by `dim` records of `dim` cells each.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::channel::{invert_channel_matrix, ChannelMatrix, State};
use crate::dyadic::Dyadic;
use crate::entropy::{BoundResult, SumMethod};
use crate::enumerate::OutputDistribution;
use crate::error::{Error, Result};
use crate::fractal::{render_pixels, RenderMode, ShapeGrid};
use crate::matrix::Matrix;
use crate::optimize::OptimizationReport;

pub fn format_dyadic(d: &Dyadic) -> String {
    d.to_canonical()
}

pub fn parse_dyadic(s: &str) -> Result<Dyadic> {
    Dyadic::parse_canonical(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixKind {
    Channel,
    Inverse,
    General,
}

impl MatrixKind {
    fn as_str(self) -> &'static str {
        match self {
            MatrixKind::Channel => "channel",
            MatrixKind::Inverse => "inverse",
            MatrixKind::General => "general",
        }
    }
}

/// What a matrix file says about its contents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixHeader {
    pub kind: MatrixKind,
    pub n: usize,
    /// `None` for matrices not tied to an initial state.
    pub state: Option<State>,
    pub dim: usize,
}

impl MatrixHeader {
    pub fn channel(p: &ChannelMatrix<Dyadic>) -> Self {
        MatrixHeader {
            kind: MatrixKind::Channel,
            n: p.n(),
            state: Some(p.initial_state()),
            dim: p.dim(),
        }
    }

    pub fn inverse(p: &ChannelMatrix<Dyadic>) -> Self {
        MatrixHeader {
            kind: MatrixKind::Inverse,
            ..Self::channel(p)
        }
    }

    fn fields(&self) -> [String; 4] {
        let s0 = match self.state {
            Some(s) => s.to_string(),
            None => "general".to_string(),
        };
        [
            format!("n={}", self.n),
            format!("s0={s0}"),
            format!("dim={}", self.dim),
            format!("kind={}", self.kind.as_str()),
        ]
    }

    fn parse(record: &csv::StringRecord) -> Result<Self> {
        let bad = |msg: String| Error::MalformedMatrix(msg);
        let mut n = None;
        let mut state = None;
        let mut dim = None;
        let mut kind = MatrixKind::General;
        for field in record {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| bad(format!("header field {field:?} is not key=value")))?;
            match key.trim() {
                "n" => n = Some(value.parse().map_err(|_| bad(format!("bad n {value:?}")))?),
                "s0" => {
                    state = match value {
                        "general" => None,
                        v => Some(v.parse::<State>()?),
                    }
                }
                "dim" => {
                    dim = Some(
                        value
                            .parse()
                            .map_err(|_| bad(format!("bad dim {value:?}")))?,
                    )
                }
                "kind" => {
                    kind = match value {
                        "channel" => MatrixKind::Channel,
                        "inverse" => MatrixKind::Inverse,
                        "general" => MatrixKind::General,
                        v => return Err(bad(format!("unknown kind {v:?}"))),
                    }
                }
                other => return Err(bad(format!("unknown header key {other:?}"))),
            }
        }
        let n: usize = n.ok_or_else(|| bad("header lacks n".into()))?;
        let dim: usize = dim.ok_or_else(|| bad("header lacks dim".into()))?;
        if n >= usize::BITS as usize || dim != 1 << n {
            return Err(bad(format!("dim {dim} does not equal 2^{n}")));
        }
        Ok(MatrixHeader {
            kind,
            n,
            state,
            dim,
        })
    }
}

pub fn write_matrix_csv<W: Write>(out: W, header: &MatrixHeader, m: &Matrix<Dyadic>) -> Result<()> {
    if m.dim() != header.dim {
        return Err(Error::LengthMismatch {
            expected: header.dim,
            actual: m.dim(),
        });
    }
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    w.write_record(header.fields())?;
    for row in m.rows() {
        w.write_record(row.iter().map(format_dyadic))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_matrix_csv<R: Read>(input: R) -> Result<(MatrixHeader, Matrix<Dyadic>)> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut records = r.records();
    let header = match records.next() {
        Some(rec) => MatrixHeader::parse(&rec?)?,
        None => return Err(Error::MalformedMatrix("file is empty".into())),
    };
    let mut rows = Vec::with_capacity(header.dim);
    for (i, rec) in records.enumerate() {
        let rec = rec?;
        if rec.len() != header.dim {
            return Err(Error::MalformedMatrix(format!(
                "row {i} has {} cells, expected {}",
                rec.len(),
                header.dim
            )));
        }
        rows.push(rec.iter().map(parse_dyadic).collect::<Result<Vec<_>>>()?);
    }
    if rows.len() != header.dim {
        return Err(Error::MalformedMatrix(format!(
            "found {} rows, expected {}",
            rows.len(),
            header.dim
        )));
    }
    Ok((header, Matrix::from_rows(rows)?))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_matrix_csv_file(path: &Path, header: &MatrixHeader, m: &Matrix<Dyadic>) -> Result<()> {
    let mut w = create(path)?;
    write_matrix_csv(&mut w, header, m)?;
    finish(w, path)
}

pub fn read_matrix_csv_file(path: &Path) -> Result<(MatrixHeader, Matrix<Dyadic>)> {
    let f = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_matrix_csv(std::io::BufReader::new(f))
}

/// `P_{n|s0}` itself.
pub fn write_channel_csv(path: &Path, p: &ChannelMatrix<Dyadic>) -> Result<()> {
    write_matrix_csv_file(path, &MatrixHeader::channel(p), p.matrix())
}

/// `P⁻¹_{n|s0}`.
pub fn write_inverse_csv(path: &Path, p: &ChannelMatrix<Dyadic>) -> Result<()> {
    write_matrix_csv_file(path, &MatrixHeader::inverse(p), &invert_channel_matrix(p))
}

/// Writes raw bytes, e.g. a PGM from [`crate::fractal::render_pgm`].
pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    finish(w, path)
}

pub fn write_pgm(path: &Path, pgm: &[u8]) -> Result<()> {
    write_bytes(path, pgm)
}

/// 8-bit grayscale PNG of the same pixels the PGM renderer produces.
pub fn write_png(path: &Path, grid: &ShapeGrid, mode: RenderMode, gamma: f64) -> Result<()> {
    let side = grid.side() as u32;
    let pixels = render_pixels(grid, mode, gamma)?;
    let img = image::GrayImage::from_raw(side, side, pixels)
        .ok_or_else(|| Error::Invariant("pixel buffer does not match the grid".into()))?;
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| match e {
            image::ImageError::IoError(source) => Error::Io {
                path: path.to_path_buf(),
                source,
            },
            other => Error::Image(other),
        })
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(report: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, report: &T) -> Result<()> {
    write_bytes(path, to_json(report)?.as_bytes())
}

/// JSON form of [`BoundResult`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub s0: State,
    #[serde(rename = "S")]
    pub sum: String,
    pub c_upper_bits_per_use: f64,
    pub method: SumMethod,
    /// 0-based; absent when `d` was not computed.
    pub d_negative_indices: Option<Vec<usize>>,
    pub d: Option<Vec<String>>,
}

impl From<&BoundResult> for BoundReport {
    fn from(b: &BoundResult) -> Self {
        BoundReport {
            n: b.n,
            s0: b.state,
            sum: format_dyadic(&b.sum),
            c_upper_bits_per_use: b.c_upper,
            method: b.method,
            d_negative_indices: b.negative_indices(),
            d: b.d.as_ref().map(|d| d.iter().map(format_dyadic).collect()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OutputRecord {
    pub y: String,
    pub p: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EnumerationReport {
    pub input: String,
    pub state: State,
    pub outputs: Vec<OutputRecord>,
}

impl From<&OutputDistribution> for EnumerationReport {
    fn from(d: &OutputDistribution) -> Self {
        EnumerationReport {
            input: d.input().to_string(),
            state: d.initial_state(),
            outputs: d
                .outputs()
                .iter()
                .map(|(y, p)| OutputRecord {
                    y: y.to_string(),
                    p: format_dyadic(p),
                })
                .collect(),
        }
    }
}

/// A Blahut–Arimoto run next to the closed-form bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BaReport {
    #[serde(flatten)]
    pub report: OptimizationReport<f64>,
    pub c_upper: f64,
    pub gap_to_bound: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::build_channel_matrix;
    use crate::enumerate::generate_outputs;

    #[test]
    fn dyadic_text() {
        assert_eq!(format_dyadic(&Dyadic::new(1, 1)), "1/2^1");
        assert_eq!(format_dyadic(&Dyadic::from_integer(0)), "0");
        assert_eq!(format_dyadic(&Dyadic::new(-3, 1)), "-3/2^1");
        for s in ["1/2^1", "0", "-3/2^1", "7/2^10"] {
            assert_eq!(format_dyadic(&parse_dyadic(s).unwrap()), s);
        }
        assert!(parse_dyadic("1/3").is_err());
    }

    #[test]
    fn channel_csv() {
        let p = build_channel_matrix(1, State::Zero).unwrap();
        let mut buf = Vec::new();
        write_matrix_csv(&mut buf, &MatrixHeader::channel(&p), p.matrix()).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "n=1,s0=0,dim=2,kind=channel\n1/2^0,0\n1/2^1,1/2^1\n"
        );
        let (h, m) = read_matrix_csv(&buf[..]).unwrap();
        assert_eq!(h, MatrixHeader::channel(&p));
        assert_eq!(&m, p.matrix());
    }

    #[test]
    fn inverse_round_trip() {
        let p = build_channel_matrix(3, State::Zero).unwrap();
        let q = invert_channel_matrix(&p);
        let mut buf = Vec::new();
        write_matrix_csv(&mut buf, &MatrixHeader::inverse(&p), &q).unwrap();
        let (h, m) = read_matrix_csv(&buf[..]).unwrap();
        assert_eq!(h.kind, MatrixKind::Inverse);
        assert_eq!(m, q);
    }

    #[test]
    fn malformed_csv() {
        assert!(matches!(
            read_matrix_csv(&b""[..]),
            Err(Error::MalformedMatrix(_))
        ));
        let short = b"n=1,s0=0,dim=2\n1,0\n";
        assert!(matches!(
            read_matrix_csv(&short[..]),
            Err(Error::MalformedMatrix(_))
        ));
        let ragged = b"n=1,s0=0,dim=2\n1,0\n1\n";
        assert!(read_matrix_csv(&ragged[..]).is_err());
        let bad_cell = b"n=1,s0=general,dim=2\n1,0\nx,1\n";
        assert!(matches!(
            read_matrix_csv(&bad_cell[..]),
            Err(Error::ParseDyadic(_))
        ));
        let bad_dim = b"n=1,s0=0,dim=3\n";
        assert!(read_matrix_csv(&bad_dim[..]).is_err());
    }

    #[test]
    fn reports() {
        let b = crate::entropy::upper_bound(2, State::Zero).unwrap();
        let json = to_json(&BoundReport::from(&b)).unwrap();
        assert!(json.contains("\"S\": \"5/2^1\""), "{json}");
        assert_eq!(BoundReport::from(&b).d_negative_indices, Some(vec![1, 2]));

        let d = generate_outputs(&"101".parse().unwrap(), State::Zero).unwrap();
        let r = EnumerationReport::from(&d);
        assert_eq!(r.outputs.len(), 5);
        assert_eq!(
            r.outputs[0],
            OutputRecord {
                y: "001".into(),
                p: "1/2^2".into()
            }
        );
    }

    #[test]
    fn io_errors_carry_the_path() {
        let err = write_bytes(Path::new("/nonexistent-dir/x.pgm"), b"").unwrap_err();
        match err {
            Error::Io { path, .. } => assert!(path.ends_with("x.pgm")),
            other => panic!("unexpected {other:?}"),
        }
    }
}
