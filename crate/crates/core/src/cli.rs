//! Command-line front end: `pmf`, `sample`, `moments`, `figure` and `check`.
//!
//! Every command renders into memory first and then writes either to the
//! `--out` path or to the supplied output stream, so the same entry point
//! serves the binary and the tests.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analytic::{family_laplace, family_pgf, family_pmf_table, tdl_pmf, PmfTable, DEFAULT_KMAX};
use crate::coeffs::{build_table, coeff_c, coeff_half, coeff_half_step, coeff_neg1, coeff_neg1_step};
use crate::error::{Error, Result};
use crate::moments::{moments_from_pmf, skew_kurt_trace, tdl_moments, SkewKurtTrace};
use crate::oracle::{chi_square_gof, empirical_laplace, series_pmf};
use crate::params::{
    AuxParams, Family, LinnikParams, StableParams, TdlParams, TdsParams, TemperedLinnikParams,
    TemperedStableParams,
};
use crate::sampler::{sample_batch, Route};

#[derive(Parser, Debug)]
#[command(name = "tdl", version, about = "Tempered discrete Linnik laws: pmf tables, sampling, moments and checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the pmf table of an integer-valued law.
    Pmf(PmfArgs),
    /// Draw random variates.
    Sample(SampleArgs),
    /// Print the closed-form moments of a tempered discrete Linnik law.
    Moments(MomentsArgs),
    /// Emit a skewness/kurtosis trace over a (c, d) grid.
    Figure(FigureArgs),
    /// Run the built-in self-check suite.
    Check(CheckArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum LawTag {
    Tdl,
    Tds,
    Dl,
    Ds,
    Ps,
    Tps,
    Pl,
    Tpl,
    Nb,
    Sibuya,
    Gds,
    Poisson,
    Gamma,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridSize {
    Small,
    Full,
}

/// Law selection and parameters.
///
/// `tdl` takes `-a -b -c -d`, `tds` takes `-a -b -c`; the other laws take the
/// named flags. The Gamma law reads its scale from `--lambda` and its shape
/// from `--delta`.
#[derive(Args, Debug, Clone)]
pub struct LawArgs {
    #[arg(long, value_enum, default_value = "tdl")]
    pub law: LawTag,
    #[arg(short = 'a', allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(short = 'b', allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(short = 'c', allow_hyphen_values = true)]
    pub c: Option<f64>,
    #[arg(short = 'd', allow_hyphen_values = true)]
    pub d: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub pi: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<f64>,
}

#[derive(Args, Debug)]
pub struct PmfArgs {
    #[command(flatten)]
    pub law: LawArgs,
    #[arg(long, default_value_t = DEFAULT_KMAX)]
    pub kmax: usize,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[command(flatten)]
    pub law: LawArgs,
    #[arg(short = 'n', default_value_t = 1)]
    pub n: usize,
    /// 64-bit seed; a time-based seed is used and echoed when absent.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "a")]
    pub route: String,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub law: LawArgs,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FigureArgs {
    /// Caption preset 1-4.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    pub preset: Option<u8>,
    #[arg(short = 'a', allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(short = 'b', allow_hyphen_values = true)]
    pub b: Option<f64>,
    /// `lo,hi`
    #[arg(long, allow_hyphen_values = true)]
    pub c_range: Option<String>,
    /// `lo,hi`
    #[arg(long, allow_hyphen_values = true)]
    pub d_range: Option<String>,
    /// `NCxND` grid size.
    #[arg(long, default_value = "50x50")]
    pub grid: String,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(long, value_enum, default_value = "small")]
    pub grid: GridSize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Perturbs one coefficient-table entry to prove the suite can fail.
    #[arg(long, hide = true)]
    pub inject_coeff_fault: bool,
}

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_)
        | Error::UnknownLaw(_)
        | Error::UnsupportedOuterFunction(_)
        | Error::IncompatibleRoute { .. }
        | Error::EmptyGrid
        | Error::InsufficientSample { .. } => 2,
        Error::NumericalInstability { .. }
        | Error::TailTooHeavy(_)
        | Error::SingularComposition(_)
        | Error::VariateOverflow(_) => 3,
        Error::RejectionBudgetExceeded { .. } => 4,
        Error::DegenerateDistribution(_) => 5,
    }
}

fn need(v: Option<f64>, flag: &str, law: &str) -> Result<f64> {
    v.ok_or_else(|| Error::Domain(format!("law `{law}` needs {flag}")))
}

impl LawArgs {
    pub fn family(&self) -> Result<Family> {
        let tag = format!("{:?}", self.law).to_ascii_lowercase();
        let n = |v: Option<f64>, flag: &str| need(v, flag, &tag);
        Ok(match self.law {
            LawTag::Tdl => Family::Tdl(TdlParams::new(
                n(self.a, "-a")?,
                n(self.b, "-b")?,
                n(self.c, "-c")?,
                n(self.d, "-d")?,
            )?),
            LawTag::Tds => Family::Tds(TdsParams::new(n(self.a, "-a")?, n(self.b, "-b")?, n(self.c, "-c")?)?),
            LawTag::Ds => Family::DiscreteStable(StableParams::new(
                n(self.gamma, "--gamma")?,
                n(self.lambda, "--lambda")?,
            )?),
            LawTag::Dl => Family::DiscreteLinnik(LinnikParams::new(
                n(self.gamma, "--gamma")?,
                n(self.lambda, "--lambda")?,
                n(self.delta, "--delta")?,
            )?),
            LawTag::Ps => Family::PositiveStable(StableParams::new(
                n(self.gamma, "--gamma")?,
                n(self.lambda, "--lambda")?,
            )?),
            LawTag::Tps => Family::TemperedPositiveStable(TemperedStableParams::new(
                n(self.gamma, "--gamma")?,
                n(self.lambda, "--lambda")?,
                n(self.theta, "--theta")?,
            )?),
            LawTag::Pl => Family::PositiveLinnik(LinnikParams::new(
                n(self.gamma, "--gamma")?,
                n(self.lambda, "--lambda")?,
                n(self.delta, "--delta")?,
            )?),
            LawTag::Tpl => Family::TemperedPositiveLinnik(TemperedLinnikParams::new(
                n(self.gamma, "--gamma")?,
                n(self.lambda, "--lambda")?,
                n(self.theta, "--theta")?,
                n(self.delta, "--delta")?,
            )?),
            LawTag::Nb => Family::Aux(AuxParams::negative_binomial(n(self.pi, "--pi")?, n(self.delta, "--delta")?)?),
            LawTag::Sibuya => Family::Aux(AuxParams::sibuya(n(self.gamma, "--gamma")?)?),
            LawTag::Gds => Family::Aux(AuxParams::gds_sibuya(n(self.gamma, "--gamma")?, n(self.tau, "--tau")?)?),
            LawTag::Poisson => Family::Aux(AuxParams::poisson(n(self.lambda, "--lambda")?)?),
            LawTag::Gamma => Family::Aux(AuxParams::gamma(n(self.lambda, "--lambda")?, n(self.delta, "--delta")?)?),
        })
    }
}

/// Shortest round-trip decimal, switching to exponent form for very small
/// or very large magnitudes.
pub fn fmt_num(x: f64) -> String {
    let m = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&m) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn unsupported_format(cmd: &str, f: Format) -> Error {
    Error::Domain(format!("format {f:?} is not available for `{cmd}`").to_ascii_lowercase())
}

pub fn render_pmf(args: &PmfArgs) -> Result<String> {
    let law = args.law.family()?;
    let degenerate = match law {
        Family::Tdl(p) => p.a == 0.0 || p.c == 0.0,
        Family::Tds(p) => p.is_degenerate(),
        _ => false,
    };
    // the point mass at zero is printed as its single row
    let kmax = if degenerate { 0 } else { args.kmax };
    let table = family_pmf_table(&law, kmax)?;
    match args.format {
        Format::Csv => Ok(pmf_csv(&table)),
        Format::Json => Ok(to_json(&table)),
        Format::Svg => Err(unsupported_format("pmf", Format::Svg)),
    }
}

/// `k,p,cumulative` rows followed by a `tail_mass,<value>` footer.
pub fn pmf_csv(t: &PmfTable) -> String {
    let mut s = String::from("k,p,cumulative\n");
    for (k, (p, cum)) in t.p.iter().zip(t.cumulative()).enumerate() {
        let _ = writeln!(s, "{k},{},{}", fmt_num(*p), fmt_num(cum));
    }
    let _ = writeln!(s, "tail_mass,{}", fmt_num(t.tail_mass));
    s
}

/// Draws plus the seed actually used.
pub fn render_sample(args: &SampleArgs) -> Result<(String, u64)> {
    let law = args.law.family()?;
    let route: Route = args.route.parse()?;
    let seed = args.seed.unwrap_or_else(|| {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or(0)
    });
    let batch = sample_batch(&law, route, args.n, seed)?;
    let out = match args.format {
        Format::Csv => {
            let mut s = String::new();
            for x in batch.values.as_f64() {
                let _ = writeln!(s, "{}", fmt_num(x));
            }
            s
        }
        Format::Json => to_json(&batch),
        Format::Svg => return Err(unsupported_format("sample", Format::Svg)),
    };
    Ok((out, seed))
}

pub fn render_moments(args: &MomentsArgs) -> Result<String> {
    let p = match args.law.family()? {
        Family::Tdl(p) => p,
        other => return Err(Error::UnknownLaw(other.tag().to_string())),
    };
    let m = tdl_moments(&p)?;
    match args.format {
        Format::Json => Ok(to_json(&m)),
        Format::Csv => Ok(format!(
            "mu,sigma2,D,m3,m4,alpha3,alpha4\n{},{},{},{},{},{},{}\n",
            fmt_num(m.mu),
            fmt_num(m.sigma2),
            fmt_num(m.D),
            fmt_num(m.m3),
            fmt_num(m.m4),
            fmt_num(m.alpha3),
            fmt_num(m.alpha4)
        )),
        Format::Svg => Err(unsupported_format("moments", Format::Svg)),
    }
}

/// Figure preset: `(a, b, c range, d range as captioned)`.
pub fn figure_preset(id: u8) -> Result<(f64, f64, (f64, f64), (f64, f64))> {
    match id {
        1 => Ok((0.25, 1.0, (0.3, 0.7), (-1.0, 3.0))),
        2 => Ok((0.5, 1.0, (0.3, 0.7), (-1.0, 3.0))),
        3 => Ok((0.75, 1.0, (0.3, 0.7), (-1.0, 3.0))),
        4 => Ok((-1.0, 1.0, (0.1, 0.9), (0.0, 3.0))),
        _ => Err(Error::Domain(format!("unknown figure preset {id}"))),
    }
}

fn parse_range(s: &str) -> Result<(f64, f64)> {
    let bad = || Error::Domain(format!("range `{s}` must look like lo,hi"));
    let (lo, hi) = s.split_once(',').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Domain(format!("grid `{s}` must look like NCxND"));
    let (a, b) = s.split_once('x').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

/// Trace plus a header line describing the ranges (and any clipping).
pub fn figure_trace(args: &FigureArgs) -> Result<(SkewKurtTrace, String)> {
    let (a, b, c_range, d_asked) = match args.preset {
        Some(id) => {
            let (a, b, c, d) = figure_preset(id)?;
            (
                args.a.unwrap_or(a),
                args.b.unwrap_or(b),
                args.c_range.as_deref().map(parse_range).transpose()?.unwrap_or(c),
                args.d_range.as_deref().map(parse_range).transpose()?.unwrap_or(d),
            )
        }
        None => (
            need(args.a, "-a", "figure")?,
            need(args.b, "-b", "figure")?,
            parse_range(args.c_range.as_deref().ok_or_else(|| Error::domain("figure needs --c-range or --preset"))?)?,
            parse_range(args.d_range.as_deref().ok_or_else(|| Error::domain("figure needs --d-range or --preset"))?)?,
        ),
    };
    let grid = parse_grid(&args.grid)?;
    let d_range = (d_asked.0.max(0.0), d_asked.1.max(0.0));
    let mut header = format!(
        "a={}, b={}, c in [{},{}], d in [{},{}]",
        fmt_num(a),
        fmt_num(b),
        fmt_num(c_range.0),
        fmt_num(c_range.1),
        fmt_num(d_asked.0),
        fmt_num(d_asked.1)
    );
    if d_range != d_asked {
        let _ = write!(
            header,
            " clipped to d in [{},{}]",
            fmt_num(d_range.0),
            fmt_num(d_range.1)
        );
    }
    if d_asked.1 < 0.0 {
        return Err(Error::EmptyGrid);
    }
    let mut trace = skew_kurt_trace(a, b, c_range, d_range, grid)?;
    if d_range != d_asked {
        trace.warnings.push(format!(
            "d range [{},{}] clipped to [{},{}]; the law is only defined here for d >= 0",
            fmt_num(d_asked.0),
            fmt_num(d_asked.1),
            fmt_num(d_range.0),
            fmt_num(d_range.1)
        ));
    }
    Ok((trace, header))
}

pub fn render_figure(args: &FigureArgs) -> Result<String> {
    let (trace, header) = figure_trace(args)?;
    render_trace(&trace, &header, args.format)
}

fn render_trace(trace: &SkewKurtTrace, header: &str, format: Format) -> Result<String> {
    match format {
        Format::Csv => {
            let mut s = format!("# {header}\nc,d,alpha3,alpha4,D\n");
            for r in &trace.rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    fmt_num(r.c),
                    fmt_num(r.d),
                    fmt_num(r.alpha3),
                    fmt_num(r.alpha4),
                    fmt_num(r.D)
                );
            }
            Ok(s)
        }
        Format::Json => Ok(to_json(trace)),
        Format::Svg => Ok(trace_svg(trace, header)),
    }
}

/// Minimal SVG: every constant-`c` curve as a thin polyline and the image of
/// the grid boundary as a thick closed polyline, in `(alpha3, alpha4)` axes.
pub fn trace_svg(trace: &SkewKurtTrace, title: &str) -> String {
    let (w, h, m) = (640.0, 480.0, 50.0);
    let rows = &trace.rows;
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for r in rows {
        x0 = x0.min(r.alpha3);
        x1 = x1.max(r.alpha3);
        y0 = y0.min(r.alpha4);
        y1 = y1.max(r.alpha4);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let py = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let pt = |i: usize| format!("{:.2},{:.2}", px(rows[i].alpha3), py(rows[i].alpha4));

    let mut cs: Vec<f64> = rows.iter().map(|r| r.c).collect();
    cs.dedup();
    let nd = rows.len() / cs.len().max(1);
    let nc = cs.len();
    let idx = |ic: usize, id: usize| ic * nd + id;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * m,
        h - 2.0 * m
    );
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="12">{title}</text>"#, w / 2.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">alpha3 [{}, {}]</text>"#, w / 2.0, h - 15.0, fmt_num(x0), fmt_num(x1));
    let _ = writeln!(s, r#"<text x="15" y="{}" font-size="12" transform="rotate(-90 15 {})">alpha4 [{}, {}]</text>"#, h / 2.0, h / 2.0, fmt_num(y0), fmt_num(y1));
    for ic in 0..nc {
        let pts: Vec<String> = (0..nd).map(|id| pt(idx(ic, id))).collect();
        let _ = writeln!(s, r##"<polyline fill="none" stroke="#bbbbbb" stroke-width="0.5" points="{}"/>"##, pts.join(" "));
    }
    if nc > 0 && nd > 0 {
        let mut edge: Vec<usize> = (0..nd).map(|id| idx(0, id)).collect();
        edge.extend((1..nc).map(|ic| idx(ic, nd - 1)));
        edge.extend((0..nd.saturating_sub(1)).rev().map(|id| idx(nc - 1, id)));
        edge.extend((1..nc.saturating_sub(1)).rev().map(|ic| idx(ic, 0)));
        let pts: Vec<String> = edge.into_iter().map(pt).collect();
        let _ = writeln!(s, r#"<polygon fill="none" stroke="black" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
    }
    s.push_str("</svg>\n");
    s
}

/// One line of the self-check report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    /// Largest observed deviation, in the check's own measure.
    pub deviation: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn rel_dev(x: f64, exact: f64, floor: f64) -> f64 {
    (x - exact).abs() / exact.abs().max(floor)
}

fn outcome(name: &str, r: Result<f64>, tolerance: f64) -> CheckOutcome {
    match r {
        Ok(dev) => CheckOutcome {
            name: name.into(),
            pass: dev <= tolerance,
            deviation: dev,
            tolerance,
        },
        Err(_) => CheckOutcome {
            name: name.into(),
            pass: false,
            deviation: f64::INFINITY,
            tolerance,
        },
    }
}

fn check_points(grid: GridSize) -> Vec<TdlParams> {
    let raw: &[(f64, f64, f64, f64)] = match grid {
        GridSize::Small => &[
            (0.5, 1.0, 0.5, 1.0),
            (-1.0, 1.0, 0.5, 1.0),
            (0.25, 2.0, 0.9, 4.0),
            (-2.0, 0.5, 0.1, 0.25),
            (0.75, 1.0, 1.0, 1.0),
        ],
        GridSize::Full => &[],
    };
    if !raw.is_empty() {
        return raw.iter().map(|&(a, b, c, d)| TdlParams::new(a, b, c, d).unwrap()).collect();
    }
    let mut v = Vec::new();
    for a in [-2.0, -1.0, -0.5, 0.25, 0.5, 0.75, 1.0] {
        for b in [0.5, 1.0, 2.0] {
            for c in [0.1, 0.5, 0.9, 1.0] {
                for d in [0.25, 1.0, 4.0] {
                    if let Ok(p) = TdlParams::new(a, b, c, d) {
                        v.push(p);
                    }
                }
            }
        }
    }
    v
}

fn max_table_dev(law: &Family, kmax: usize) -> Result<f64> {
    let prod = family_pmf_table(law, kmax)?;
    let oracle = series_pmf(law, kmax)?;
    Ok(prod
        .p
        .iter()
        .zip(&oracle.p)
        .map(|(x, y)| rel_dev(*x, *y, 1e-13))
        .fold(0.0, f64::max))
}

/// Runs the self-check suite.
pub fn run_checks(grid: GridSize, seed: u64, coeff_fault: bool) -> CheckReport {
    let points = check_points(grid);
    let kmax = match grid {
        GridSize::Small => 30,
        GridSize::Full => 50,
    };
    let n_draws = match grid {
        GridSize::Small => 20_000,
        GridSize::Full => 100_000,
    };
    let mut checks = Vec::new();

    let dev = points.iter().try_fold(0.0f64, |acc, p| {
        let laws = [Family::Tdl(*p), Family::Tds(p.tds())];
        laws.iter().try_fold(acc, |acc, law| Ok(acc.max(max_table_dev(law, kmax)?)))
    });
    checks.push(outcome("oracle-equivalence", dev, 1e-10));

    let dev = (|| -> Result<f64> {
        let mut worst = 0.0f64;
        for p in [TdlParams::new(0.5, 1.0, 0.5, 1.0)?, TdlParams::new(-1.0, 1.0, 0.3, 2.0)?] {
            let mut table = build_table(p.a, 12);
            if coeff_fault {
                table.set(1, 1, table.get(1, 1) * 1.001);
            }
            let oracle = series_pmf(&Family::Tdl(p), 12)?;
            for k in 0..=12 {
                worst = worst.max(rel_dev(tdl_pmf(&p, k, &table)?, oracle.p[k], 1e-13));
            }
        }
        Ok(worst)
    })();
    checks.push(outcome("finite-sum-vs-oracle", dev, 1e-9));

    let dev = (|| -> Result<f64> {
        let mut worst = 0.0f64;
        for k in 0..=30usize {
            for m in 0..=k {
                let g = coeff_c(0.5, m, k);
                worst = worst.max(rel_dev(coeff_half(m, k), g, 1e-300));
                let g = coeff_c(-1.0, m, k);
                worst = worst.max(rel_dev(coeff_neg1(m, k), g, 1e-300));
                if k < 30 {
                    let next = coeff_c(0.5, m, k + 1);
                    let prev = coeff_c(0.5, m, k);
                    if prev != 0.0 {
                        worst = worst.max(rel_dev(coeff_half_step(m, k, prev), next, 1e-300));
                    }
                    let next = coeff_c(-1.0, m, k + 1);
                    let prev = coeff_c(-1.0, m, k);
                    if prev != 0.0 {
                        worst = worst.max(rel_dev(coeff_neg1_step(m, k, prev), next, 1e-300));
                    }
                }
            }
        }
        Ok(worst)
    })();
    checks.push(outcome("single-sum-reductions", dev, 1e-12));

    let dev = (|| -> Result<f64> {
        let mut worst = 0.0f64;
        for (b, c, d) in [(1.0, 0.5, 1.0), (2.0, 0.3, 0.5), (0.5, 0.9, 4.0)] {
            let tdl = family_pmf_table(&Family::Tdl(TdlParams::new(1.0, b, c, d)?), 40)?;
            let bcd = b * c * d;
            let nb = family_pmf_table(&Family::Aux(AuxParams::negative_binomial(bcd / (1.0 + bcd), 1.0 / d)?), 40)?;
            for (x, y) in tdl.p.iter().zip(&nb.p) {
                worst = worst.max(rel_dev(*x, *y, 1e-300));
            }
        }
        let pm = family_pmf_table(&Family::Tdl(TdlParams::new(0.0, 1.0, 0.5, 1.0)?), 10)?;
        worst = worst.max((pm.p[0] - 1.0).abs() + pm.p[1..].iter().map(|v| v.abs()).sum::<f64>());
        for (a, b, d) in [(0.5, 1.0, 1.0), (0.25, 2.0, 0.5)] {
            let tdl = Family::Tdl(TdlParams::new(a, b, 1.0, d)?);
            let dl = Family::DiscreteLinnik(LinnikParams::new(a, b, 1.0 / d)?);
            for i in 0..=20 {
                let s = i as f64 / 20.0;
                worst = worst.max((family_pgf(&tdl, s)? - family_pgf(&dl, s)?).abs());
            }
        }
        Ok(worst)
    })();
    checks.push(outcome("special-cases", dev, 1e-12));

    let dev = (|| -> Result<f64> {
        let mut worst = 0.0f64;
        for (a, b, c) in [(0.5, 1.0, 0.5), (-1.0, 2.0, 0.3), (0.9, 0.5, 0.9)] {
            let small = Family::Tdl(TdlParams::new(a, b, c, 1e-8)?);
            let zero = Family::Tdl(TdlParams::new(a, b, c, 0.0)?);
            for i in 0..=100 {
                let s = i as f64 / 100.0;
                worst = worst.max((family_pgf(&small, s)? - family_pgf(&zero, s)?).abs());
            }
        }
        Ok(worst)
    })();
    checks.push(outcome("small-d-continuity", dev, 1e-6));

    let moment_points = [(0.5, 1.0, 0.5, 1.0), (-1.0, 1.0, 0.3, 0.5)];
    let moment_dev = |higher: bool| -> Result<f64> {
        let mut worst = 0.0f64;
        for (a, b, c, d) in moment_points {
            let p = TdlParams::new(a, b, c, d)?;
            let f = tdl_moments(&p)?;
            let t = moments_from_pmf(&family_pmf_table(&Family::Tdl(p), 300)?)?;
            worst = if higher {
                worst.max(rel_dev(t.m3, f.m3, 1e-300)).max(rel_dev(t.m4, f.m4, 1e-300))
            } else {
                worst.max(rel_dev(t.mu, f.mu, 1e-300)).max(rel_dev(t.sigma2, f.sigma2, 1e-300))
            };
        }
        Ok(worst)
    };
    checks.push(outcome("moments-mean-variance", moment_dev(false), 1e-7));
    checks.push(outcome("moments-third-fourth", moment_dev(true), 1e-5));

    let dev = (|| -> Result<f64> {
        let mut worst = 0.0f64;
        for p in &points {
            if p.c >= 1.0 || p.a == 0.0 {
                continue;
            }
            let m = tdl_moments(p)?;
            let m0 = tdl_moments(&TdlParams::new(p.a, p.b, p.c, 0.0)?)?;
            worst = worst.max(rel_dev(m.D - m0.D, p.d * m.mu, 1e-300));
        }
        Ok(worst)
    })();
    checks.push(outcome("dispersion", dev, 1e-12));

    let gof_cases = [
        ((1.0, 1.0, 0.5, 1.0), Route::A),
        ((0.5, 1.0, 0.5, 1.0), Route::A),
        ((0.5, 1.0, 0.5, 1.0), Route::D),
        ((-1.0, 1.0, 0.5, 1.0), Route::A),
        ((-1.0, 1.0, 0.5, 1.0), Route::B),
        ((-1.0, 1.0, 0.5, 1.0), Route::C),
    ];
    // the deviation column holds the smallest p-value, which must stay above the level
    let smallest = (|| -> Result<f64> {
        let mut smallest = 1.0f64;
        for (i, &((a, b, c, d), route)) in gof_cases.iter().enumerate() {
            let law = Family::Tdl(TdlParams::new(a, b, c, d)?);
            let batch = sample_batch(&law, route, n_draws, seed.wrapping_add(i as u64))?;
            let report = chi_square_gof(&batch, &series_pmf(&law, 200)?)?;
            smallest = smallest.min(report.p_value);
        }
        Ok(smallest)
    })()
    .unwrap_or(0.0);
    checks.push(CheckOutcome {
        name: "sampler-gof".into(),
        pass: smallest >= 0.001,
        deviation: smallest,
        tolerance: 0.001,
    });

    let dev = (|| -> Result<f64> {
        let mut worst = 0.0f64;
        let laws = [
            Family::PositiveStable(StableParams::new(0.5, 1.0)?),
            Family::TemperedPositiveStable(TemperedStableParams::new(0.5, 1.0, 1.0)?),
            Family::TemperedPositiveStable(TemperedStableParams::new(-1.0, 1.0, 1.0)?),
        ];
        for (i, law) in laws.iter().enumerate() {
            let batch = sample_batch(law, Route::A, n_draws, seed.wrapping_add(100 + i as u64))?;
            for t in [0.25, 0.5, 1.0, 2.0] {
                let (est, se) = empirical_laplace(&batch, t)?;
                worst = worst.max((est - family_laplace(law, t)?).abs() / se);
            }
        }
        Ok(worst)
    })();
    checks.push(outcome("laplace-transforms", dev, 4.0));

    CheckReport { seed, checks }
}

pub fn render_check(args: &CheckArgs) -> Result<(String, bool)> {
    let report = run_checks(args.grid, args.seed, args.inject_coeff_fault);
    let text = match args.format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut s = String::from("check,status,deviation,tolerance\n");
            for c in &report.checks {
                let _ = writeln!(
                    s,
                    "{},{},{},{}",
                    c.name,
                    if c.pass { "PASS" } else { "FAIL" },
                    fmt_num(c.deviation),
                    fmt_num(c.tolerance)
                );
            }
            s
        }
        Format::Svg => return Err(unsupported_format("check", Format::Svg)),
    };
    Ok((text, report.passed()))
}

fn emit(text: &str, path: Option<&PathBuf>, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Error::Domain(format!("cannot write {}: {e}", p.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Error::Domain(format!("cannot write output: {e}"))),
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Pmf(a) => render_pmf(a).and_then(|t| emit(&t, a.out.as_ref(), out)).map(|_| 0),
        Command::Sample(a) => render_sample(a).and_then(|(t, seed)| {
            if a.seed.is_none() {
                let _ = writeln!(err, "seed: {seed}");
            }
            emit(&t, a.out.as_ref(), out).map(|_| 0)
        }),
        Command::Moments(a) => render_moments(a).and_then(|t| emit(&t, a.out.as_ref(), out)).map(|_| 0),
        Command::Figure(a) => figure_trace(a).and_then(|(trace, header)| {
            for w in &trace.warnings {
                let _ = writeln!(err, "warning: {w}");
            }
            let t = render_trace(&trace, &header, a.format)?;
            emit(&t, a.out.as_ref(), out).map(|_| 0)
        }),
        Command::Check(a) => render_check(a)
            .and_then(|(t, ok)| emit(&t, a.out.as_ref(), out).map(|_| if ok { 0 } else { 1 })),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
