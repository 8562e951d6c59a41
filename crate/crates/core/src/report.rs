//! Report records and outward decimal rendering.

use std::io::Write;
use std::path::Path;

use rug::float::Round;
use rug::{Float, Integer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{Dir, Endpoint, Interval};

pub const PRESENTATION_DECIMALS: usize = 18;

/// `x` with exactly `decimals` fractional digits, rounded in `dir`.
pub fn fixed_decimal<S: Endpoint>(x: &S, decimals: usize, dir: Dir) -> String {
    let f = x.to_mpfr();
    if !f.is_finite() {
        return if f.is_sign_negative() { "-inf".into() } else { "inf".into() };
    }
    let scale = Integer::from(Integer::u_pow_u(10, decimals as u32));
    // exact: the product needs at most prec + log2(10^decimals) bits
    let prec = f.prec() + 4 * decimals as u32 + 8;
    let scaled = Float::with_val(prec, &f * &scale);
    let round = match dir {
        Dir::Down => Round::Down,
        Dir::Up => Round::Up,
    };
    let (n, _) = scaled.to_integer_round(round).expect("finite");
    let neg = n < 0;
    let digits = n.abs().to_string();
    let digits = format!("{:0>width$}", digits, width = decimals + 1);
    let (int, frac) = digits.split_at(digits.len() - decimals);
    format!("{}{}.{}", if neg { "-" } else { "" }, int, frac)
}

/// Every significant digit of `x`, rounded in `dir`, in scientific notation.
pub fn decimal_string<S: Endpoint>(x: &S, dir: Dir) -> String {
    let f = x.to_mpfr();
    if !f.is_finite() {
        return if f.is_sign_negative() { "-inf".into() } else { "inf".into() };
    }
    let digits = (f.prec() as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2;
    let round = match dir {
        Dir::Down => Round::Down,
        Dir::Up => Round::Up,
    };
    f.to_string_radix_round(10, Some(digits), round)
}

/// Interval endpoints for reports: 18-decimal outward and full-precision outward.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Endpoints {
    pub lo: String,
    pub hi: String,
    pub lo_exact: String,
    pub hi_exact: String,
}

impl Endpoints {
    pub fn from_interval<S: Endpoint>(x: &Interval<S>) -> Self {
        Self {
            lo: fixed_decimal(x.lo(), PRESENTATION_DECIMALS, Dir::Down),
            hi: fixed_decimal(x.hi(), PRESENTATION_DECIMALS, Dir::Up),
            lo_exact: decimal_string(x.lo(), Dir::Down),
            hi_exact: decimal_string(x.hi(), Dir::Up),
        }
    }

    /// Parses the full-precision strings back into an enclosing interval.
    pub fn to_interval<S: Endpoint>(&self, ctx: S::Ctx) -> Result<Interval<S>> {
        let lo = Interval::<S>::from_decimal(&self.lo_exact, ctx)?;
        let hi = Interval::<S>::from_decimal(&self.hi_exact, ctx)?;
        Ok(lo.hull(&hi))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaRow {
    pub n: u32,
    pub m: usize,
    pub dps: u32,
    pub sigma: Endpoints,
    pub width: String,
    pub argmax_block: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub n: u32,
    /// Lower bound for `σ_lo(N+1) - σ_hi(N)`.
    pub gap_lo: String,
    pub gap_lo_exact: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantRow {
    pub name: String,
    pub formula: String,
    pub lo: String,
    pub hi: String,
    pub bound: Option<String>,
    pub status: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionRow {
    pub n: u32,
    pub center: Endpoints,
    pub band: Endpoints,
    pub enclosure: Option<Endpoints>,
    pub inside_band: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockRow {
    pub n: u32,
    pub residue: u32,
    pub lambda: Endpoints,
    pub e_norm: f64,
    pub c_norm: f64,
    pub cutoff: usize,
    pub is_argmax: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReportRecord {
    SigmaRow(SigmaRow),
    GapRow(GapRow),
    ConstantRow(ConstantRow),
    ExpansionRow(ExpansionRow),
    BlockRow(BlockRow),
}

impl ReportRecord {
    pub fn kind(&self) -> &'static str {
        match self {
            ReportRecord::SigmaRow(_) => "sigma_row",
            ReportRecord::GapRow(_) => "gap_row",
            ReportRecord::ConstantRow(_) => "constant_row",
            ReportRecord::ExpansionRow(_) => "expansion_row",
            ReportRecord::BlockRow(_) => "block_row",
        }
    }
}

pub const PLOT_HEADER: [&str; 6] = ["N", "sigma_lo", "sigma_hi", "expansion_center", "band_lo", "band_hi"];

fn csv_err(e: impl std::fmt::Display, path: &Path) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

/// Writes plot-ready CSV. Sigma and expansion rows share one header; others use their own.
pub fn write_plot_data<W: Write>(rows: &[ReportRecord], out: W, path: &Path) -> Result<()> {
    if let Some(first) = rows.first() {
        if rows.iter().any(|r| r.kind() != first.kind()) {
            return Err(Error::InvalidInput("plot rows must all be of one kind".into()));
        }
    }
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<&str> = match rows.first() {
        None | Some(ReportRecord::SigmaRow(_)) | Some(ReportRecord::ExpansionRow(_)) => PLOT_HEADER.to_vec(),
        Some(ReportRecord::GapRow(_)) => vec!["N", "gap_lo"],
        Some(ReportRecord::ConstantRow(_)) => vec!["name", "lo", "hi", "bound", "status"],
        Some(ReportRecord::BlockRow(_)) => vec!["N", "residue", "lambda_lo", "lambda_hi", "e_norm", "c_norm"],
    };
    w.write_record(&header).map_err(|e| csv_err(e, path))?;
    for r in rows {
        let rec: Vec<String> = match r {
            ReportRecord::SigmaRow(s) => {
                vec![s.n.to_string(), s.sigma.lo.clone(), s.sigma.hi.clone(), String::new(), String::new(), String::new()]
            }
            ReportRecord::ExpansionRow(e) => {
                let (lo, hi) = e.enclosure.as_ref().map(|x| (x.lo.clone(), x.hi.clone())).unwrap_or_default();
                vec![e.n.to_string(), lo, hi, e.center.lo.clone(), e.band.lo.clone(), e.band.hi.clone()]
            }
            ReportRecord::GapRow(g) => vec![g.n.to_string(), g.gap_lo.clone()],
            ReportRecord::ConstantRow(c) => vec![
                c.name.clone(),
                c.lo.clone(),
                c.hi.clone(),
                c.bound.clone().unwrap_or_default(),
                c.status.clone(),
            ],
            ReportRecord::BlockRow(b) => vec![
                b.n.to_string(),
                b.residue.to_string(),
                b.lambda.lo.clone(),
                b.lambda.hi.clone(),
                format!("{:e}", b.e_norm),
                format!("{:e}", b.c_norm),
            ],
        };
        w.write_record(&rec).map_err(|e| csv_err(e, path))?;
    }
    w.flush().map_err(|e| csv_err(e, path))?;
    Ok(())
}

/// [`write_plot_data`] into a file.
pub fn emit_plot_data(rows: &[ReportRecord], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| csv_err(e, path))?;
    write_plot_data(rows, file, path)
}
