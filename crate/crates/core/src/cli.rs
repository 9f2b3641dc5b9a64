//! Command-line front end: figure-style sweeps and single-state queries.
//!
//! Every sweep produces a [`Table`] which is written either as CSV with a
//! `#`-prefixed comment header (and footer) or as a JSON document carrying
//! the same comments, columns and rows. Rows are always emitted in sweep
//! order, whatever order the parallel workers finish in.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::discord::{classical_from_discord, mutual_information, super_discord};
use crate::error::{Error, Result};
use crate::families::{
    bell_diagonal, cd_qd_transition_time, ghz_state, phase_damping_at, psi_pe_state, w_state, BellDiagonalParams,
    PhaseDampingTrajectory,
};
use crate::measurement::{Side, Strength};
use crate::monogamy::{monogamy_score, Arrow, MonogamyReport};
use crate::optimizer::OptimizerOptions;
use crate::qstate::{validate, ComplexMatrix, DensityMatrix, C64};

/// Environment variable capping worker threads (0 = automatic).
pub const THREADS_ENV: &str = "WEAKCORR_THREADS";

/// Inclusive range `start:stop:steps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Range {
    pub fn new(start: f64, stop: f64, steps: usize) -> Result<Self> {
        if !start.is_finite() || !stop.is_finite() {
            return Err(Error::Config(format!("range bounds must be finite, got {start}:{stop}")));
        }
        if steps < 2 {
            return Err(Error::Config(format!("range needs at least 2 steps, got {steps}")));
        }
        Ok(Range { start, stop, steps })
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.steps - 1;
        (0..self.steps)
            .map(|i| {
                if i == n {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * i as f64 / n as f64
                }
            })
            .collect()
    }
}

impl FromStr for Range {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(Error::Config(format!("range {s:?} is not of the form start:stop:steps")));
        };
        let num = |t: &str| -> Result<f64> {
            t.trim().parse().map_err(|_| Error::Config(format!("cannot parse {t:?} in range {s:?}")))
        };
        let steps = n
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("cannot parse step count {n:?} in range {s:?}")))?;
        Range::new(num(a)?, num(b)?, steps)
    }
}

/// Parses a comma-separated strength list; `inf` selects the projective path.
pub fn parse_strengths(s: &str) -> Result<Vec<Strength>> {
    let list = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(Strength::from_str)
        .collect::<Result<Vec<_>>>()?;
    if list.is_empty() {
        return Err(Error::Config("strength list is empty".into()));
    }
    Ok(list)
}

fn parse_reals(s: &str, what: &str) -> Result<Vec<f64>> {
    let list = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("cannot parse {t:?} in {what}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if list.is_empty() {
        return Err(Error::Config(format!("{what} is empty")));
    }
    Ok(list)
}

fn parse_arrows(s: &str) -> Result<Vec<Arrow>> {
    let list = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(Arrow::from_str)
        .collect::<Result<Vec<_>>>()?;
    if list.is_empty() {
        return Err(Error::Config("direction list is empty".into()));
    }
    Ok(list)
}

/// One output cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Strength> for Cell {
    fn from(s: Strength) -> Self {
        match s {
            Strength::Weak(x) => Cell::Num(x),
            Strength::Projective => Cell::Text("inf".into()),
        }
    }
}

impl From<Arrow> for Cell {
    fn from(a: Arrow) -> Self {
        Cell::Text(a.to_string())
    }
}

fn format_num(v: f64) -> String {
    // -0 prints as "-0"; normalize so reruns and sign tests are unaffected.
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v}")
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header_comments: Vec<String>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub footer_comments: Vec<String>,
}

impl Table {
    fn check_finite(&self) -> Result<()> {
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.columns.len() {
                return Err(Error::Consistency(format!("row {i} has {} cells, expected {}", row.len(), self.columns.len())));
            }
            for (c, cell) in row.iter().enumerate() {
                if let Cell::Num(v) = cell {
                    if !v.is_finite() {
                        return Err(Error::Consistency(format!(
                            "non-finite value in row {i}, column {}",
                            self.columns[c]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        self.check_finite()?;
        let mut out = String::new();
        for c in &self.header_comments {
            writeln!(out, "# {c}").expect("write to string");
        }
        let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
        writer.write_record(&self.columns)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(|cell| match cell {
                Cell::Num(v) => format_num(*v),
                Cell::Text(t) => t.clone(),
            }))?;
        }
        let body = writer.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        out.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
        for c in &self.footer_comments {
            writeln!(out, "# {c}").expect("write to string");
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        self.check_finite()?;
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(k, cell)| {
                        let v = match cell {
                            Cell::Num(v) if *v == 0.0 => json!(0.0),
                            Cell::Num(v) => json!(v),
                            Cell::Text(t) => json!(t),
                        };
                        (k.to_string(), v)
                    })
                    .collect::<serde_json::Map<_, _>>();
                Value::Object(obj)
            })
            .collect();
        let doc = json!({
            "comments": self.header_comments.iter().chain(&self.footer_comments).collect::<Vec<_>>(),
            "columns": self.columns,
            "rows": rows,
        });
        Ok(serde_json::to_string_pretty(&doc)? + "\n")
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }

    /// Values of a numeric column, in row order.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| *c == name)?;
        self.rows
            .iter()
            .map(|r| match &r[idx] {
                Cell::Num(v) => Some(*v),
                Cell::Text(_) => None,
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Super discord (measured on B) and the matching classical correlation.
fn discord_and_classical(rho: &DensityMatrix, strength: Strength, opts: &OptimizerOptions) -> Result<(f64, f64)> {
    let d = super_discord(rho, Side::B, strength, opts)?;
    let c = classical_from_discord(rho, &d)?;
    Ok((d.value, c.value))
}

fn describe_strengths(strengths: &[Strength]) -> String {
    strengths.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
}

fn describe_opts(opts: &OptimizerOptions) -> String {
    format!(
        "optimizer grid_theta={} grid_phi={} refine_starts={} tol={:e} max_iters={}",
        opts.grid_theta, opts.grid_phi, opts.refine_starts, opts.tol, opts.max_iters
    )
}

/// Super discord and classical correlation along `c₃` for fixed `c₁`, `c₂`.
pub fn bd_sweep(c1: f64, c2: f64, c3: Range, strengths: &[Strength], opts: &OptimizerOptions) -> Result<Table> {
    if strengths.is_empty() {
        return Err(Error::Config("strength list is empty".into()));
    }
    opts.validate()?;
    let valid: Vec<BellDiagonalParams> = c3
        .values()
        .into_iter()
        .filter_map(|c3| BellDiagonalParams::new(c1, c2, c3).ok())
        .collect();
    let skipped = c3.steps - valid.len();
    if valid.is_empty() {
        return Err(Error::Config(format!(
            "no c3 value in {}:{}:{} gives a valid state with c1={c1}, c2={c2}",
            c3.start, c3.stop, c3.steps
        )));
    }
    let points: Vec<(BellDiagonalParams, Strength)> =
        valid.iter().flat_map(|p| strengths.iter().map(move |s| (*p, *s))).collect();
    let rows = points
        .par_iter()
        .map(|(p, s)| {
            let rho = bell_diagonal(p)?;
            let (d, c) = discord_and_classical(&rho, *s, opts)?;
            Ok(vec![p.c1.into(), p.c2.into(), p.c3.into(), (*s).into(), d.into(), c.into()])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table {
        header_comments: vec![
            "bd-sweep: super discord and super classical correlation of Bell-diagonal states (measurement on B)".into(),
            format!("c1={c1} c2={c2} c3={}:{}:{} x={}", c3.start, c3.stop, c3.steps, describe_strengths(strengths)),
            describe_opts(opts),
        ],
        columns: vec!["c1", "c2", "c3", "x", "super_discord", "classical_correlation"],
        rows,
        footer_comments: vec![format!("skipped_invalid={skipped}")],
    })
}

/// Correlations of a phase-damped Bell-diagonal state along time.
pub fn dynamics(
    initial: BellDiagonalParams,
    gamma: f64,
    t: Range,
    x: f64,
    opts: &OptimizerOptions,
) -> Result<Table> {
    let traj = PhaseDampingTrajectory::new(initial, gamma)?;
    let weak = Strength::weak(x).map_err(|e| Error::Config(e.to_string()))?;
    opts.validate()?;
    if t.start < 0.0 || t.stop < 0.0 {
        return Err(Error::Config("time range must be non-negative".into()));
    }
    let t_star = if gamma > 0.0 { cd_qd_transition_time(&traj)? } else { None };
    let rows = t
        .values()
        .par_iter()
        .map(|&t| {
            let rho = bell_diagonal(&phase_damping_at(&traj, t)?)?;
            let (nd, nc) = discord_and_classical(&rho, Strength::Projective, opts)?;
            let (sd, sc) = discord_and_classical(&rho, weak, opts)?;
            Ok(vec![(gamma * t).into(), nd.into(), nc.into(), sd.into(), sc.into()])
        })
        .collect::<Result<Vec<_>>>()?;
    let t_star_line = match t_star {
        Some(ts) => format!("t_star={ts} gamma_t_star={}", gamma * ts),
        None => "t_star=none".into(),
    };
    Ok(Table {
        header_comments: vec![
            "dynamics: Bell-diagonal state under identical local phase damping".into(),
            format!(
                "c1={} c2={} c3={} gamma={gamma} t={}:{}:{} x={x}",
                initial.c1, initial.c2, initial.c3, t.start, t.stop, t.steps
            ),
            describe_opts(opts),
            t_star_line,
        ],
        columns: vec!["gamma_t", "normal_discord", "normal_classical", "super_discord_x", "super_classical_x"],
        rows,
        footer_comments: vec![],
    })
}

fn report_cells(r: &MonogamyReport) -> Vec<Cell> {
    vec![
        r.arrow.into(),
        r.strength.into(),
        r.d_bipartition.into(),
        r.d_ab.into(),
        r.d_ac.into(),
        r.score.into(),
    ]
}

const REPORT_COLUMNS: [&str; 6] = ["direction", "x", "d_bipartition", "d_ab", "d_ac", "score"];

fn monogamy_table<P, F>(
    title: String,
    params: Vec<P>,
    param_columns: &[&'static str],
    arrows: &[Arrow],
    strengths: &[Strength],
    opts: &OptimizerOptions,
    state: F,
) -> Result<Table>
where
    P: Sync + Copy + Into<Vec<f64>>,
    F: Fn(P) -> Result<DensityMatrix> + Sync,
{
    if strengths.is_empty() || arrows.is_empty() {
        return Err(Error::Config("strength and direction lists must be nonempty".into()));
    }
    opts.validate()?;
    let points: Vec<(P, Arrow, Strength)> = params
        .iter()
        .flat_map(|p| arrows.iter().flat_map(move |a| strengths.iter().map(move |s| (*p, *a, *s))))
        .collect();
    let rows = points
        .par_iter()
        .map(|&(p, arrow, strength)| {
            let rho = state(p)?;
            let report = monogamy_score(&rho, arrow, strength, opts)?;
            let mut row: Vec<Cell> = p.into().into_iter().map(Cell::Num).collect();
            row.extend(report_cells(&report));
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut columns = param_columns.to_vec();
    columns.extend(REPORT_COLUMNS);
    Ok(Table {
        header_comments: vec![
            title,
            format!(
                "direction={} x={}",
                arrows.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(","),
                describe_strengths(strengths)
            ),
            describe_opts(opts),
        ],
        columns,
        rows,
        footer_comments: vec![],
    })
}

#[derive(Clone, Copy)]
struct P1(f64);
impl From<P1> for Vec<f64> {
    fn from(p: P1) -> Self {
        vec![p.0]
    }
}

#[derive(Clone, Copy)]
struct P2(f64, f64);
impl From<P2> for Vec<f64> {
    fn from(p: P2) -> Self {
        vec![p.0, p.1]
    }
}

/// Monogamy score of the generalized GHZ family; `theta` is given in units of π.
pub fn ghz_monogamy(theta: Range, arrows: &[Arrow], strengths: &[Strength], opts: &OptimizerOptions) -> Result<Table> {
    let params = theta.values().into_iter().map(P1).collect();
    monogamy_table(
        format!("ghz-monogamy: theta/pi={}:{}:{}", theta.start, theta.stop, theta.steps),
        params,
        &["theta_over_pi"],
        arrows,
        strengths,
        opts,
        |P1(t)| ghz_state(t * PI),
    )
}

/// Monogamy score over a `(θ/π, φ/π)` grid of the generalized W family.
pub fn w_monogamy(
    theta: Range,
    phi: Range,
    arrows: &[Arrow],
    strengths: &[Strength],
    opts: &OptimizerOptions,
) -> Result<Table> {
    let phis = phi.values();
    let params = theta
        .values()
        .into_iter()
        .flat_map(|t| phis.iter().map(move |&p| P2(t, p)))
        .collect();
    monogamy_table(
        format!(
            "w-monogamy: theta/pi={}:{}:{} phi/pi={}:{}:{}",
            theta.start, theta.stop, theta.steps, phi.start, phi.stop, phi.steps
        ),
        params,
        &["theta_over_pi", "phi_over_pi"],
        arrows,
        strengths,
        opts,
        |P2(t, p)| w_state(t * PI, p * PI),
    )
}

/// Monogamy score of `|ψ(p, ε)>` along `p` for each `ε`.
pub fn psi_monogamy(
    p: Range,
    epsilons: &[f64],
    arrows: &[Arrow],
    strengths: &[Strength],
    opts: &OptimizerOptions,
) -> Result<Table> {
    if epsilons.is_empty() {
        return Err(Error::Config("epsilon list is empty".into()));
    }
    let ps = p.values();
    let params = epsilons
        .iter()
        .flat_map(|&e| ps.iter().map(move |&p| P2(p, e)))
        .collect();
    monogamy_table(
        format!("psi-monogamy: p={}:{}:{} epsilon={epsilons:?}", p.start, p.stop, p.steps),
        params,
        &["p", "epsilon"],
        arrows,
        strengths,
        opts,
        |P2(p, e)| psi_pe_state(p, e),
    )
}

/// Raw density-matrix file: subsystem dimensions plus row-major real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dims: Vec<usize>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl MatrixFile {
    pub fn from_state(rho: &DensityMatrix) -> Self {
        let data = rho.matrix().as_slice();
        MatrixFile {
            dims: rho.dims().to_vec(),
            re: data.iter().map(|z| z.re).collect(),
            im: data.iter().map(|z| z.im).collect(),
        }
    }

    /// Parses and validates; validation failures carry the full diagnostic report.
    pub fn to_state(&self) -> Result<DensityMatrix> {
        let dim: usize = self.dims.iter().product();
        if self.re.len() != dim * dim || self.im.len() != dim * dim {
            return Err(Error::Config(format!(
                "matrix file needs {} real and imaginary entries for dims {:?}",
                dim * dim,
                self.dims
            )));
        }
        let data = self.re.iter().zip(&self.im).map(|(&r, &i)| C64::new(r, i)).collect();
        let m = ComplexMatrix::from_row_major(dim, data)?;
        DensityMatrix::new(m, self.dims.clone())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// State selection for the `state` command.
#[derive(Clone, Debug, PartialEq)]
pub enum StateSpec {
    BellDiagonal(f64, f64, f64),
    /// θ/π.
    Ghz(f64),
    /// (θ/π, φ/π).
    W(f64, f64),
    Psi(f64, f64),
    Matrix(MatrixFile),
}

impl StateSpec {
    pub fn build(&self) -> Result<DensityMatrix> {
        match self {
            StateSpec::BellDiagonal(c1, c2, c3) => bell_diagonal(&BellDiagonalParams::new(*c1, *c2, *c3)?),
            StateSpec::Ghz(t) => ghz_state(t * PI),
            StateSpec::W(t, p) => w_state(t * PI, p * PI),
            StateSpec::Psi(p, e) => psi_pe_state(*p, *e),
            StateSpec::Matrix(file) => file.to_state(),
        }
    }
}

/// Correlations of a single state as a JSON document.
pub fn state_report(spec: &StateSpec, strengths: &[Strength], opts: &OptimizerOptions) -> Result<Value> {
    if strengths.is_empty() {
        return Err(Error::Config("strength list is empty".into()));
    }
    opts.validate()?;
    let rho = spec.build()?;
    if rho.dims().iter().any(|&d| d != 2) || !(2..=3).contains(&rho.num_subsystems()) {
        return Err(Error::Config(format!(
            "state must be two or three qubits, got dims {:?}",
            rho.dims()
        )));
    }
    let mut doc = json!({
        "state": MatrixFile::from_state(&rho),
        "validation": validate(rho.matrix()),
    });
    if rho.num_subsystems() == 2 {
        let info = mutual_information(&rho)?;
        let cases: Vec<(Strength, Side)> =
            strengths.iter().flat_map(|&s| [Side::B, Side::A].map(|side| (s, side))).collect();
        let results = cases
            .par_iter()
            .map(|&(s, side)| {
                let d = super_discord(&rho, side, s, opts)?;
                Ok(json!({
                    "x": s,
                    "measured_side": side,
                    "super_discord": d.value,
                    "classical_correlation": info - d.value,
                    "mutual_information": info,
                    "optimal_theta": d.optimal_direction.theta,
                    "optimal_phi": d.optimal_direction.phi,
                    "evaluations": d.evaluations,
                    "converged": d.converged,
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        doc["results"] = Value::Array(results);
    } else {
        let cases: Vec<(Strength, Arrow)> =
            strengths.iter().flat_map(|&s| [Arrow::From, Arrow::To].map(|a| (s, a))).collect();
        let reports = cases
            .par_iter()
            .map(|&(s, a)| monogamy_score(&rho, a, s, opts))
            .collect::<Result<Vec<_>>>()?;
        doc["monogamy"] = serde_json::to_value(reports)?;
    }
    Ok(doc)
}

#[derive(Debug, Parser)]
#[command(name = "weakcorr", version, about = "Weak-measurement quantum discord and monogamy sweeps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Polar grid size of the measurement-direction search.
    #[arg(long, default_value_t = 24)]
    pub grid_theta: usize,
    /// Azimuthal grid size of the measurement-direction search.
    #[arg(long, default_value_t = 48)]
    pub grid_phi: usize,
    /// Number of grid minima refined by Nelder-Mead.
    #[arg(long, default_value_t = 3)]
    pub refine_starts: usize,
    /// Convergence tolerance on the objective.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 400)]
    pub max_iters: usize,
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

impl CommonArgs {
    pub fn optimizer(&self) -> OptimizerOptions {
        OptimizerOptions {
            grid_theta: self.grid_theta,
            grid_phi: self.grid_phi,
            refine_starts: self.refine_starts,
            tol: self.tol,
            max_iters: self.max_iters,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bell-diagonal states along c3 at fixed c1, c2 for several strengths.
    BdSweep {
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        c1: f64,
        #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
        c2: f64,
        /// start:stop:steps
        #[arg(long, default_value = "0:1:101", allow_hyphen_values = true)]
        c3_range: String,
        /// Comma-separated strengths; "inf" is the projective limit.
        #[arg(long, default_value = "1.5,2,2.5,inf")]
        x: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Phase-damping dynamics of a Bell-diagonal state.
    Dynamics {
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        c1: f64,
        #[arg(long, default_value_t = -0.6, allow_hyphen_values = true)]
        c2: f64,
        #[arg(long, default_value_t = 0.6, allow_hyphen_values = true)]
        c3: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        /// Time range start:stop:steps.
        #[arg(long, default_value = "0:1:201")]
        t_range: String,
        /// A single finite strength.
        #[arg(long, default_value = "1.0")]
        x: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Monogamy score of the generalized GHZ states along theta/pi.
    GhzMonogamy {
        #[arg(long, default_value = "0:0.5:101")]
        theta_range: String,
        #[arg(long, default_value = "0.5,inf")]
        x: String,
        /// Comma-separated list of "to" and/or "from".
        #[arg(long, default_value = "to")]
        direction: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Monogamy score of the generalized W states on a (theta/pi, phi/pi) grid.
    WMonogamy {
        #[arg(long, default_value = "0:0.5:41")]
        theta_range: String,
        #[arg(long, default_value = "0:0.5:41")]
        phi_range: String,
        #[arg(long, default_value = "0.5,inf")]
        x: String,
        #[arg(long, default_value = "to")]
        direction: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Monogamy score of psi(p, epsilon) along p.
    PsiMonogamy {
        #[arg(long, default_value = "0:1:51")]
        p_range: String,
        #[arg(long, default_value = "1,0.5")]
        epsilon: String,
        #[arg(long, default_value = "1.5,inf")]
        x: String,
        #[arg(long, default_value = "from,to")]
        direction: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Correlations of one state, printed as JSON.
    State {
        /// c1,c2,c3
        #[arg(long, allow_hyphen_values = true, group = "state_spec")]
        bell_diagonal: Option<String>,
        /// theta/pi of the generalized GHZ state.
        #[arg(long, group = "state_spec")]
        ghz: Option<f64>,
        /// theta/pi,phi/pi of the generalized W state.
        #[arg(long, group = "state_spec")]
        w: Option<String>,
        /// p,epsilon of psi(p, epsilon).
        #[arg(long, group = "state_spec")]
        psi: Option<String>,
        /// JSON file with dims and row-major re/im arrays.
        #[arg(long, group = "state_spec")]
        matrix_file: Option<PathBuf>,
        #[arg(long, default_value = "inf")]
        x: String,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn pair(s: &str, what: &str) -> Result<(f64, f64)> {
    match parse_reals(s, what)?[..] {
        [a, b] => Ok((a, b)),
        _ => Err(Error::Config(format!("{what} needs exactly two values, got {s:?}"))),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

/// Executes a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::BdSweep { c1, c2, c3_range, x, common } => {
            let table = bd_sweep(c1, c2, c3_range.parse()?, &parse_strengths(&x)?, &common.optimizer())?;
            emit(&table.render(common.format)?, common.out.as_deref())
        }
        Command::Dynamics { c1, c2, c3, gamma, t_range, x, common } => {
            let initial = BellDiagonalParams::new(c1, c2, c3).map_err(|e| Error::Config(e.to_string()))?;
            let x = match parse_strengths(&x)?[..] {
                [Strength::Weak(x)] => x,
                _ => return Err(Error::Config("dynamics takes exactly one finite strength".into())),
            };
            let table = dynamics(initial, gamma, t_range.parse()?, x, &common.optimizer())?;
            emit(&table.render(common.format)?, common.out.as_deref())
        }
        Command::GhzMonogamy { theta_range, x, direction, common } => {
            let table = ghz_monogamy(
                theta_range.parse()?,
                &parse_arrows(&direction)?,
                &parse_strengths(&x)?,
                &common.optimizer(),
            )?;
            emit(&table.render(common.format)?, common.out.as_deref())
        }
        Command::WMonogamy { theta_range, phi_range, x, direction, common } => {
            let table = w_monogamy(
                theta_range.parse()?,
                phi_range.parse()?,
                &parse_arrows(&direction)?,
                &parse_strengths(&x)?,
                &common.optimizer(),
            )?;
            emit(&table.render(common.format)?, common.out.as_deref())
        }
        Command::PsiMonogamy { p_range, epsilon, x, direction, common } => {
            let table = psi_monogamy(
                p_range.parse()?,
                &parse_reals(&epsilon, "epsilon list")?,
                &parse_arrows(&direction)?,
                &parse_strengths(&x)?,
                &common.optimizer(),
            )?;
            emit(&table.render(common.format)?, common.out.as_deref())
        }
        Command::State { bell_diagonal, ghz, w, psi, matrix_file, x, common } => {
            let spec = if let Some(s) = bell_diagonal {
                match parse_reals(&s, "--bell-diagonal")?[..] {
                    [c1, c2, c3] => StateSpec::BellDiagonal(c1, c2, c3),
                    _ => return Err(Error::Config("--bell-diagonal needs c1,c2,c3".into())),
                }
            } else if let Some(t) = ghz {
                StateSpec::Ghz(t)
            } else if let Some(s) = w {
                let (t, p) = pair(&s, "--w")?;
                StateSpec::W(t, p)
            } else if let Some(s) = psi {
                let (p, e) = pair(&s, "--psi")?;
                StateSpec::Psi(p, e)
            } else if let Some(path) = matrix_file {
                StateSpec::Matrix(MatrixFile::read(&path)?)
            } else {
                return Err(Error::Config(
                    "state needs one of --bell-diagonal, --ghz, --w, --psi, --matrix-file".into(),
                ));
            };
            let doc = state_report(&spec, &parse_strengths(&x)?, &common.optimizer())?;
            emit(&(serde_json::to_string_pretty(&doc)? + "\n"), common.out.as_deref())
        }
    }
}

/// Applies the thread cap from the environment to the global worker pool.
pub fn configure_threads() -> Result<()> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a non-negative integer, got {v:?}")))?,
        Err(_) => 0,
    };
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot configure worker pool: {e}")))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_parsing() {
        let r: Range = "0:1:5".parse().unwrap();
        assert_eq!(r.values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let r: Range = "-0.5:0.5:3".parse().unwrap();
        assert_eq!(r.values(), vec![-0.5, 0.0, 0.5]);
        assert!("0:1:1".parse::<Range>().is_err());
        assert!("0:1".parse::<Range>().is_err());
        assert!("a:1:3".parse::<Range>().is_err());
    }

    #[test]
    fn strength_lists() {
        assert_eq!(
            parse_strengths("1.5, 2,inf").unwrap(),
            vec![Strength::Weak(1.5), Strength::Weak(2.0), Strength::Projective]
        );
        assert!(matches!(parse_strengths(""), Err(Error::Config(_))));
        assert!(parse_strengths("1,-2").is_err());
    }

    #[test]
    fn table_rejects_non_finite() {
        let t = Table {
            columns: vec!["a"],
            rows: vec![vec![Cell::Num(f64::NAN)]],
            ..Default::default()
        };
        assert!(matches!(t.to_csv(), Err(Error::Consistency(_))));
        assert!(t.to_json().is_err());
    }

    #[test]
    fn table_csv_layout() {
        let t = Table {
            header_comments: vec!["hello".into()],
            columns: vec!["a", "x"],
            rows: vec![vec![Cell::Num(-0.0), Strength::Projective.into()], vec![Cell::Num(0.125), Strength::Weak(2.0).into()]],
            footer_comments: vec!["skipped_invalid=0".into()],
        };
        assert_eq!(t.to_csv().unwrap(), "# hello\na,x\n0,inf\n0.125,2\n# skipped_invalid=0\n");
    }

    #[test]
    fn bd_sweep_skips_invalid_points() {
        let t = bd_sweep(0.5, -0.5, "-0.5:0.5:5".parse().unwrap(), &[Strength::Projective], &OptimizerOptions::default())
            .unwrap();
        assert_eq!(t.rows.len(), 3);
        assert_eq!(t.footer_comments, vec!["skipped_invalid=2".to_string()]);
        let err = bd_sweep(0.5, -0.5, "-0.9:-0.1:3".parse().unwrap(), &[Strength::Projective], &OptimizerOptions::default());
        assert!(matches!(err, Err(Error::Config(_))));
        assert!(bd_sweep(0.0, 0.0, "0:1:3".parse().unwrap(), &[], &OptimizerOptions::default()).is_err());
    }

    #[test]
    fn matrix_file_round_trip() {
        let rho = bell_diagonal(&BellDiagonalParams::new(0.3, -0.1, 0.2).unwrap()).unwrap();
        let file = MatrixFile::from_state(&rho);
        let text = serde_json::to_string(&file).unwrap();
        let back: MatrixFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_state().unwrap(), rho);
    }

    #[test]
    fn matrix_file_with_bad_trace_is_a_validation_error() {
        let file = MatrixFile {
            dims: vec![2, 2],
            re: vec![0.3, 0.0, 0.0, 0.0, 0.0, 0.2, 0.0, 0.0, 0.0, 0.0, 0.2, 0.0, 0.0, 0.0, 0.0, 0.2],
            im: vec![0.0; 16],
        };
        let err = file.to_state().unwrap_err();
        assert!(matches!(err, Error::InvalidState(ref r) if (r.trace_defect - 0.1).abs() < 1e-12));
        assert_eq!(err.exit_code(), 2);
    }
}
