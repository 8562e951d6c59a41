//! Command-line driver: run configuration, pipelines and report rendering.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use steklov_core::certify::{sigma_enclosure, SigmaEnclosure, DEFAULT_HALF_WIDTH};
use steklov_core::constants::{
    constant_closure, expansion_with, gap_table, margin_positive_part, margin_with, Check, RemainderConstants,
};
use steklov_core::report::{
    decimal_string, fixed_decimal, write_plot_data, BlockRow, ConstantRow, Endpoints, ExpansionRow, GapRow,
    ReportRecord, SigmaRow, PRESENTATION_DECIMALS,
};
use steklov_core::schur::{schur_eigenvector_section, schur_root, schur_state};
use steklov_core::{Dir, Endpoint, Error, Interval, Mp, Precision};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

/// Overrides the default `--dps` when set.
pub const DPS_ENV: &str = "STEKLOV_DPS";

/// Largest `N` for which `expand` also certifies an enclosure.
pub const EXPAND_ENCLOSURE_CAP: u32 = 40;

#[derive(Parser, Debug)]
#[command(name = "steklov", version, about = "Certified enclosures of the first Steklov eigenvalue of regular polygons")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Section half-width M.
    #[arg(long = "m", global = true, default_value_t = DEFAULT_HALF_WIDTH)]
    pub half_width: usize,
    /// Working precision in decimal digits.
    #[arg(long, global = true)]
    pub dps: Option<u32>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Add one row per block.
    #[arg(long, global = true)]
    pub per_block: bool,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Enclose σ₁ for one N.
    Enclose {
        #[arg(long)]
        n: u32,
    },
    /// Enclosures for a range of N.
    Table(Range),
    /// Gap lower bounds σ_lo(N+1) - σ_hi(N).
    Gaps(Range),
    /// The remainder-constant audit ledger.
    Constants,
    /// Expansion center and band, with enclosures for small N.
    Expand {
        #[arg(long)]
        n: Option<u32>,
        #[arg(long, default_value_t = 20)]
        from: u32,
        #[arg(long, default_value_t = 100)]
        to: u32,
        #[arg(long, default_value_t = 10)]
        step: u32,
        /// Use the published component bounds for E_σ instead of the recomputed ones.
        #[arg(long)]
        recorded_constants: bool,
    },
    /// Gaps on 3..=20 together with the large-N margin.
    VerifyMonotonicity,
    /// Compare the scalar Schur root with the block enclosure for r = 1.
    SchurCheck {
        #[arg(long)]
        n: u32,
    },
}

#[derive(Args, Debug, Clone)]
pub struct Range {
    #[arg(long, default_value_t = 3)]
    pub from: u32,
    #[arg(long, default_value_t = 20)]
    pub to: u32,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// Validated run parameters.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub half_width: usize,
    pub precision: Precision,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub per_block: bool,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidInput(_) | Error::PrecisionTooLow(_) => EXIT_CONFIG,
            Error::Io(_) => EXIT_IO,
            _ => EXIT_VIOLATION,
        };
        Self { code, message: e.to_string() }
    }
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let dps = match cli.common.dps {
            Some(d) => d,
            None => match std::env::var(DPS_ENV) {
                Ok(v) => v.parse().map_err(|_| CliError::config(format!("{DPS_ENV}={v} is not an integer")))?,
                Err(_) => Precision::DEFAULT_DIGITS,
            },
        };
        let precision = Precision::new(dps).map_err(|_| CliError::config(format!("--dps {dps}: need at least 30 digits")))?;
        if cli.common.half_width < 1 {
            return Err(CliError::config("--m must be at least 1"));
        }
        let check_n = |flag: &str, n: u32| {
            if n < 3 {
                Err(CliError::config(format!("{flag} {n}: N must be at least 3")))
            } else {
                Ok(())
            }
        };
        match &cli.command {
            Command::Enclose { n } | Command::SchurCheck { n } => check_n("--n", *n)?,
            Command::Table(r) | Command::Gaps(r) => {
                check_n("--from", r.from)?;
                if r.to < r.from {
                    return Err(CliError::config(format!("--to {} is below --from {}", r.to, r.from)));
                }
                if matches!(cli.command, Command::Gaps(_)) && r.to == r.from {
                    return Err(CliError::config("--to must exceed --from for gaps"));
                }
            }
            Command::Expand { n, from, to, step, .. } => {
                if let Some(n) = n {
                    check_n("--n", *n)?;
                } else {
                    check_n("--from", *from)?;
                    if to < from {
                        return Err(CliError::config(format!("--to {to} is below --from {from}")));
                    }
                    if *step == 0 {
                        return Err(CliError::config("--step must be positive"));
                    }
                }
            }
            Command::Constants | Command::VerifyMonotonicity => {}
        }
        Ok(Self {
            command: cli.command,
            half_width: cli.common.half_width,
            precision,
            format: cli.common.format,
            out: cli.common.out,
            per_block: cli.common.per_block,
        })
    }

    fn bits(&self) -> u32 {
        self.precision.bits()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub status: &'static str,
    pub detail: String,
}

impl Verdict {
    fn pass(detail: impl Into<String>) -> Self {
        Self { status: "PASS", detail: detail.into() }
    }

    fn fail(detail: impl Into<String>) -> Self {
        Self { status: "FAIL", detail: detail.into() }
    }

    pub fn ok(&self) -> bool {
        self.status == "PASS"
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Parameters {
    pub m: usize,
    pub dps: u32,
}

/// Everything a run produces; serialised as the JSON report.
#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub command: &'static str,
    pub parameters: Parameters,
    pub records: Vec<ReportRecord>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evidence: Option<serde_json::Value>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.verdict.ok() {
            EXIT_OK
        } else {
            EXIT_VIOLATION
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Enclose { .. } => "enclose",
        Command::Table(_) => "table",
        Command::Gaps(_) => "gaps",
        Command::Constants => "constants",
        Command::Expand { .. } => "expand",
        Command::VerifyMonotonicity => "verify-monotonicity",
        Command::SchurCheck { .. } => "schur-check",
    }
}

fn sigma_row(e: &SigmaEnclosure<Mp>, cfg: &RunConfig) -> SigmaRow {
    SigmaRow {
        n: e.n_sides,
        m: e.half_width,
        dps: cfg.precision.decimal_digits(),
        sigma: Endpoints::from_interval(&e.interval()),
        width: decimal_string(&e.interval().width(), Dir::Up),
        argmax_block: e.argmax_block,
    }
}

fn block_rows(e: &SigmaEnclosure<Mp>) -> Vec<ReportRecord> {
    e.per_block
        .iter()
        .map(|b| {
            let r = b.block.residue;
            ReportRecord::BlockRow(BlockRow {
                n: e.n_sides,
                residue: r,
                lambda: Endpoints::from_interval(&b.interval()),
                e_norm: b.tail.e_norm.hi_f64(),
                c_norm: b.tail.c_norm.hi_f64(),
                cutoff: b.tail.cutoff,
                is_argmax: r.min((e.n_sides - r) % e.n_sides) == e.argmax_block,
            })
        })
        .collect()
}

/// Enclosures keyed by N, computed in increasing order.
fn enclosures(ns: impl IntoIterator<Item = u32>, cfg: &RunConfig) -> Result<BTreeMap<u32, SigmaEnclosure<Mp>>, CliError> {
    let mut out = BTreeMap::new();
    for n in ns {
        out.insert(n, sigma_enclosure(n, cfg.half_width, cfg.precision)?);
    }
    Ok(out)
}

fn push_sigma(records: &mut Vec<ReportRecord>, e: &SigmaEnclosure<Mp>, cfg: &RunConfig) {
    records.push(ReportRecord::SigmaRow(sigma_row(e, cfg)));
    if cfg.per_block {
        records.extend(block_rows(e));
    }
}

fn gap_rows(table: &BTreeMap<u32, SigmaEnclosure<Mp>>, from: u32, to: u32) -> Result<(Vec<ReportRecord>, Verdict), CliError> {
    let encl: Vec<SigmaEnclosure<Mp>> = table.values().cloned().collect();
    let gaps = gap_table(from, to, &encl)?;
    let rows = gaps
        .iter()
        .map(|g| {
            ReportRecord::GapRow(GapRow {
                n: g.n_sides,
                gap_lo: fixed_decimal(&g.gap_lo, PRESENTATION_DECIMALS, Dir::Down),
                gap_lo_exact: decimal_string(&g.gap_lo, Dir::Down),
            })
        })
        .collect();
    let bad: Vec<u32> = gaps.iter().filter(|g| !g.is_positive()).map(|g| g.n_sides).collect();
    let min = gaps
        .iter()
        .min_by(|a, b| a.gap_lo.partial_cmp(&b.gap_lo).expect("finite gaps"))
        .map(|g| format!("smallest gap {} at N = {}", fixed_decimal(&g.gap_lo, PRESENTATION_DECIMALS, Dir::Down), g.n_sides))
        .unwrap_or_default();
    let verdict = if bad.is_empty() {
        Verdict::pass(format!("{} positive gaps; {min}", gaps.len()))
    } else {
        Verdict::fail(format!("nonpositive gap at N = {bad:?}; {min}"))
    };
    Ok((rows, verdict))
}

fn constant_rows(k: &RemainderConstants<Mp>) -> Vec<ReportRecord> {
    k.ledger
        .iter()
        .map(|r| {
            let bound = match r.check {
                Check::AtMost(b) => Some(format!("<= {b}")),
                Check::Near { value, tol } => Some(format!("{value} +- {tol}")),
                Check::Info => None,
            };
            ReportRecord::ConstantRow(ConstantRow {
                name: r.name.into(),
                formula: r.formula.into(),
                lo: decimal_string(r.value.lo(), Dir::Down),
                hi: decimal_string(r.value.hi(), Dir::Up),
                bound,
                status: r.status.as_str().into(),
            })
        })
        .collect()
}

fn endpoints_json<S: Endpoint>(x: &Interval<S>) -> serde_json::Value {
    serde_json::to_value(Endpoints::from_interval(x)).expect("plain strings")
}

/// Runs one configured command.
pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let parameters = Parameters { m: cfg.half_width, dps: cfg.precision.decimal_digits() };
    let mut records = Vec::new();
    let mut evidence = None;
    let verdict = match &cfg.command {
        Command::Enclose { n } => {
            let e = sigma_enclosure(*n, cfg.half_width, cfg.precision)?;
            push_sigma(&mut records, &e, cfg);
            Verdict::pass(format!("width {:e}", e.width_f64()))
        }
        Command::Table(r) => {
            for e in enclosures(r.from..=r.to, cfg)?.values() {
                push_sigma(&mut records, e, cfg);
            }
            Verdict::pass(format!("{} enclosures", r.to - r.from + 1))
        }
        Command::Gaps(r) => {
            let table = enclosures(r.from..=r.to, cfg)?;
            let (rows, v) = gap_rows(&table, r.from, r.to)?;
            records = rows;
            v
        }
        Command::Constants => {
            let k = constant_closure::<Mp>(cfg.bits())?;
            records = constant_rows(&k);
            let failed = k.failures();
            if failed.is_empty() {
                Verdict::pass("every recorded bound holds")
            } else {
                Verdict::fail(format!("recorded bounds exceeded: {}", failed.join(", ")))
            }
        }
        Command::Expand { n, from, to, step, recorded_constants } => {
            let k = constant_closure::<Mp>(cfg.bits())?;
            let e_sigma = if *recorded_constants { &k.c6_recorded } else { &k.e_sigma };
            let ns: Vec<u32> = match n {
                Some(n) => vec![*n],
                None => (*from..=*to).step_by(*step as usize).collect(),
            };
            let mut outside = Vec::new();
            for n in ns {
                let x = expansion_with(n, &k.coeffs, e_sigma)?;
                let (enclosure, inside) = if n <= EXPAND_ENCLOSURE_CAP {
                    let s = sigma_enclosure(n, cfg.half_width, cfg.precision)?.interval();
                    let inside = x.band.contains_interval(&s);
                    if !inside {
                        outside.push(n);
                    }
                    (Some(Endpoints::from_interval(&s)), Some(inside))
                } else {
                    (None, None)
                };
                records.push(ReportRecord::ExpansionRow(ExpansionRow {
                    n,
                    center: Endpoints::from_interval(&x.center),
                    band: Endpoints::from_interval(&x.band),
                    enclosure,
                    inside_band: inside,
                }));
            }
            if outside.is_empty() {
                Verdict::pass("every certified enclosure lies in its band")
            } else {
                Verdict::fail(format!("enclosure outside the band at N = {outside:?}"))
            }
        }
        Command::VerifyMonotonicity => {
            let table = enclosures(3..=20, cfg)?;
            let (rows, gaps) = gap_rows(&table, 3, 20)?;
            records = rows;
            let k = constant_closure::<Mp>(cfg.bits())?;
            let pos = margin_positive_part(&k.coeffs)?;
            let margin = margin_with(&k.coeffs, &k.e_sigma)?;
            let margin_recorded = margin_with(&k.coeffs, &k.c6_recorded)?;
            let margin_ok = margin.is_positive();
            evidence = Some(json!({
                "gaps": gaps,
                "margin_positive_part": endpoints_json(&pos),
                "e_sigma": endpoints_json(&k.e_sigma),
                "margin": endpoints_json(&margin),
                "margin_positive": margin_ok,
                "margin_with_recorded_constants": endpoints_json(&margin_recorded),
                "failed_ledger_rows": k.failures(),
            }));
            if gaps.ok() && margin_ok {
                Verdict::pass("gaps on 3..=20 are positive and the large-N margin is positive")
            } else {
                let mut why = Vec::new();
                if !gaps.ok() {
                    why.push(gaps.detail.clone());
                }
                if !margin_ok {
                    why.push(format!("margin {} is not positive", margin));
                }
                Verdict::fail(why.join("; "))
            }
        }
        Command::SchurCheck { n } => {
            let state = schur_state(*n, cfg.half_width, cfg.precision)?;
            let root = schur_root(&state)?;
            let ev = schur_eigenvector_section(&root, &state)?;
            let e = sigma_enclosure(*n, cfg.half_width, cfg.precision)?;
            let block = e.per_block.iter().find(|b| b.block.residue == 1).expect("block 1 exists");
            let agree = block.interval().intersects(&root.lambda_star);
            records.extend(block_rows(&e).into_iter().filter(|r| matches!(r, ReportRecord::BlockRow(b) if b.residue == 1)));
            evidence = Some(json!({
                "lambda_star": endpoints_json(&root.lambda_star),
                "theta": endpoints_json(&root.theta),
                "window": endpoints_json(&root.window),
                "sign_change_certified": root.sign_change_certified,
                "beta": endpoints_json(&state.beta),
                "kappa_hi": decimal_string(state.kappa.hi(), Dir::Up),
                "eigenvector_residual": decimal_string(&ev.residual_inf, Dir::Up),
                "block_enclosure": endpoints_json(&block.interval()),
                "intersects": agree,
            }));
            if agree && root.sign_change_certified {
                Verdict::pass("Schur root and block enclosure intersect")
            } else {
                Verdict::fail(format!("intersects = {agree}, sign change certified = {}", root.sign_change_certified))
            }
        }
    };
    Ok(Outcome { command: command_name(&cfg.command), parameters, records, verdict, evidence })
}

fn render_text(o: &Outcome) -> String {
    let mut s = String::new();
    for r in &o.records {
        let _ = match r {
            ReportRecord::SigmaRow(x) => writeln!(
                s,
                "N={:<3} sigma in [{}, {}]  width {}  argmax r={}",
                x.n,
                x.sigma.lo,
                x.sigma.hi,
                x.width.parse::<f64>().map(|w| format!("{w:.3e}")).unwrap_or_else(|_| x.width.clone()),
                x.argmax_block
            ),
            ReportRecord::BlockRow(b) => writeln!(
                s,
                "  r={:<3} lambda in [{}, {}]  |E| <= {:.3e}  |C| <= {:.3e}{}",
                b.residue,
                b.lambda.lo,
                b.lambda.hi,
                b.e_norm,
                b.c_norm,
                if b.is_argmax { "  *" } else { "" }
            ),
            ReportRecord::GapRow(g) => writeln!(s, "N={:<3} gap >= {}", g.n, g.gap_lo),
            ReportRecord::ConstantRow(c) => writeln!(
                s,
                "{:<16} [{}, {}]  {}  {}",
                c.name,
                short(&c.lo),
                short(&c.hi),
                c.bound.as_deref().unwrap_or("-"),
                c.status
            ),
            ReportRecord::ExpansionRow(e) => writeln!(
                s,
                "N={:<4} center {}  band [{}, {}]{}",
                e.n,
                e.center.lo,
                e.band.lo,
                e.band.hi,
                match (&e.enclosure, e.inside_band) {
                    (Some(x), Some(i)) => format!("  sigma [{}, {}] inside={i}", x.lo, x.hi),
                    _ => String::new(),
                }
            ),
        };
    }
    if let Some(ev) = &o.evidence {
        let _ = writeln!(s, "{}", serde_json::to_string_pretty(ev).expect("json value"));
    }
    let _ = writeln!(s, "{}: {}", o.verdict.status, o.verdict.detail);
    s
}

fn short(x: &str) -> String {
    x.parse::<f64>().map(|v| format!("{v:.10e}")).unwrap_or_else(|_| x.to_string())
}

/// Renders the report; CSV keeps only the main record kind.
pub fn render(o: &Outcome, format: Format, path: &Path) -> Result<String, CliError> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(o).expect("serialisable") + "\n"),
        Format::Text => Ok(render_text(o)),
        Format::Csv => {
            let main: Vec<ReportRecord> = o
                .records
                .iter()
                .filter(|r| !matches!(r, ReportRecord::BlockRow(_)) || o.command == "schur-check")
                .cloned()
                .collect();
            let mut buf = Vec::new();
            write_plot_data(&main, &mut buf, path)?;
            Ok(String::from_utf8(buf).expect("csv is utf-8"))
        }
    }
}

fn blocks_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    out.with_file_name(format!("{stem}_blocks.csv"))
}

fn emit(o: &Outcome, cfg: &RunConfig) -> Result<(), CliError> {
    let target = cfg.out.clone().unwrap_or_else(|| PathBuf::from("<stdout>"));
    let body = render(o, cfg.format, &target)?;
    match &cfg.out {
        Some(p) => std::fs::write(p, body).map_err(|e| CliError { code: EXIT_IO, message: format!("{}: {e}", p.display()) })?,
        None => print!("{body}"),
    }
    if cfg.format == Format::Csv && cfg.per_block && o.command != "schur-check" {
        let blocks: Vec<ReportRecord> = o.records.iter().filter(|r| matches!(r, ReportRecord::BlockRow(_))).cloned().collect();
        if !blocks.is_empty() {
            let out = cfg.out.as_ref().ok_or_else(|| CliError::config("--per-block with --format csv needs --out"))?;
            steklov_core::report::emit_plot_data(&blocks, &blocks_path(out))?;
        }
    }
    Ok(())
}

/// Parses arguments, runs, emits and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = RunConfig::from_cli(cli).and_then(|cfg| {
        let o = run(&cfg)?;
        emit(&o, &cfg)?;
        Ok(o.exit_code())
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
