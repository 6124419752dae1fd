//! Command-line front end: canonical file formats and the `uml` subcommands.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use uml_core::acceptance;
use uml_core::fourier::{invert, theta, DualGrid, ThetaTable};
use uml_core::measures::{CellMeasure, StepFunction};
use uml_core::padic::{Ball, ClopenSet, PrimePair, Shell};
use uml_core::pdiff::{pd_evaluate, pd_measure_shift, Convergence, Domain, PDResult};
use uml_core::quasi::{
    beta_factor, kakutani_classify, rho_shift, shell_coefficient, transform_density, Factor, FactorFamily,
    KakutaniTail, OrdReading, ShellDensityMeasure,
};
use uml_core::rational::{fmt_q, parse_q};
use uml_core::scalar::{s_norm, BParam, Cyclo, SNorm};
use uml_core::weakdist::{consistency_check, default_samples, s_xi_functional, tightness_check, Level, WeakDistribution};
use uml_core::Q;

pub const MEASURE_FORMAT: &str = "uml-measure/1";
pub const THETA_FORMAT: &str = "uml-theta/1";
pub const TOWER_FORMAT: &str = "uml-tower/1";
pub const PAIRS_FORMAT: &str = "uml-pairs/1";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] uml_core::Error),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Format(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(_) => "precondition",
            CliError::Io(_) => "io",
            CliError::Format(_) => "parse",
            CliError::Usage(_) => "usage",
            CliError::Failed(_) => "assertion",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Format(_) | CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Limits read from the environment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Config {
    pub max_dim: usize,
    pub default_grid_level: i64,
}

impl Config {
    pub fn from_env() -> CliResult<Self> {
        fn var<T: std::str::FromStr>(name: &str, default: T) -> CliResult<T> {
            match std::env::var(name) {
                Ok(v) => v.trim().parse().map_err(|_| CliError::Usage(format!("{name}={v} is not a valid value"))),
                Err(_) => Ok(default),
            }
        }
        Ok(Self { max_dim: var("UML_MAX_DIM", 8)?, default_grid_level: var("UML_DEFAULT_GRID_LEVEL", 3)? })
    }

    fn check_dim(&self, dim: usize) -> CliResult<()> {
        if dim > self.max_dim {
            return Err(CliError::Usage(format!("dimension {dim} exceeds UML_MAX_DIM={}", self.max_dim)));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------- file formats

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellRecord {
    pub center: Vec<String>,
    pub radius_exp: Vec<i64>,
    pub density: String,
}

/// Canonical text form of a cell measure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureFile {
    pub format: String,
    pub p: u32,
    pub s: u32,
    pub dim: usize,
    pub cells: Vec<CellRecord>,
}

impl MeasureFile {
    pub fn from_measure(mu: &CellMeasure) -> Self {
        let cells = mu
            .cells()
            .iter()
            .map(|(b, d)| CellRecord {
                center: b.center().iter().map(fmt_q).collect(),
                radius_exp: b.radius_exp().to_vec(),
                density: fmt_q(d),
            })
            .collect();
        Self { format: MEASURE_FORMAT.into(), p: mu.p(), s: mu.s(), dim: mu.dim(), cells }
    }

    pub fn pp(&self) -> CliResult<PrimePair> {
        Ok(PrimePair::new(self.p, self.s)?)
    }

    fn pieces(&self) -> CliResult<Vec<(Ball, Q)>> {
        if self.format != MEASURE_FORMAT {
            return Err(CliError::Format(format!("expected format {MEASURE_FORMAT}, got {}", self.format)));
        }
        self.cells
            .iter()
            .map(|c| {
                if c.center.len() != self.dim || c.radius_exp.len() != self.dim {
                    return Err(CliError::Format(format!("cell with wrong dimension, expected {}", self.dim)));
                }
                let center = c.center.iter().map(|v| parse_q(v)).collect::<Result<Vec<_>, _>>()?;
                Ok((Ball::new(self.p, center, c.radius_exp.clone()), parse_q(&c.density)?))
            })
            .collect()
    }

    pub fn to_measure(&self) -> CliResult<CellMeasure> {
        Ok(CellMeasure::new(self.pp()?, self.dim, self.pieces()?)?)
    }

    /// The densities read as a step function.
    pub fn to_step(&self) -> CliResult<StepFunction<Q>> {
        Ok(StepFunction::from_disjoint(self.p, self.dim, self.pieces()?)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = serde_json::to_string(self).expect("measure file serializes");
        out.push('\n');
        out
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Format(format!("measure file: {e}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaRecord {
    pub z: Vec<String>,
    pub level: u32,
    pub coeffs: Vec<String>,
}

/// Samples of a characteristic functional on a full dual grid.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaFile {
    pub format: String,
    pub p: u32,
    pub s: u32,
    pub dim: usize,
    pub level: i64,
    pub support_exp: i64,
    pub samples: Vec<ThetaRecord>,
}

impl ThetaFile {
    pub fn from_table(table: &ThetaTable, s: u32) -> Self {
        let g = table.grid;
        let samples = table
            .samples
            .iter()
            .map(|(z, v)| ThetaRecord {
                z: z.iter().map(fmt_q).collect(),
                level: v.level(),
                coeffs: v.coeffs().iter().map(fmt_q).collect(),
            })
            .collect();
        Self { format: THETA_FORMAT.into(), p: g.p, s, dim: g.dim, level: g.level, support_exp: g.support_exp, samples }
    }

    pub fn to_table(&self) -> CliResult<ThetaTable> {
        if self.format != THETA_FORMAT {
            return Err(CliError::Format(format!("expected format {THETA_FORMAT}, got {}", self.format)));
        }
        let grid = DualGrid::new(self.p, self.dim, self.level, self.support_exp)?;
        let mut samples = std::collections::BTreeMap::new();
        for r in &self.samples {
            let z = r.z.iter().map(|v| parse_q(v)).collect::<Result<Vec<_>, _>>()?;
            let coeffs = r.coeffs.iter().map(|v| parse_q(v)).collect::<Result<Vec<_>, _>>()?;
            samples.insert(z, Cyclo::from_power_basis(self.p, r.level, coeffs)?);
        }
        Ok(ThetaTable { grid, samples })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LevelRecord {
    Cells(MeasureFile),
    Product(Vec<MeasureFile>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerFile {
    pub format: String,
    pub levels: Vec<LevelRecord>,
}

impl TowerFile {
    pub fn to_tower(&self) -> CliResult<WeakDistribution> {
        if self.format != TOWER_FORMAT {
            return Err(CliError::Format(format!("expected format {TOWER_FORMAT}, got {}", self.format)));
        }
        let levels = self
            .levels
            .iter()
            .map(|l| {
                Ok(match l {
                    LevelRecord::Cells(m) => Level::Cells(m.to_measure()?),
                    LevelRecord::Product(fs) => Level::Product(fs.iter().map(MeasureFile::to_measure).collect::<CliResult<_>>()?),
                })
            })
            .collect::<CliResult<Vec<_>>>()?;
        Ok(WeakDistribution::new(levels)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    pub mu: MeasureFile,
    pub nu: MeasureFile,
}

/// Factor pairs `(μ_j, ν_j)` for the product dichotomy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairsFile {
    pub format: String,
    pub pairs: Vec<PairRecord>,
}

// ---------------------------------------------------------------- argument syntax

fn parse_vec(text: &str) -> CliResult<Vec<Q>> {
    text.split(',').map(|v| Ok(parse_q(v.trim())?)).collect()
}

/// `c:k` per coordinate, comma separated.
pub fn parse_ball(p: u32, text: &str) -> CliResult<Ball> {
    let mut center = Vec::new();
    let mut radius = Vec::new();
    for part in text.split(',') {
        let (c, k) = part
            .split_once(':')
            .ok_or_else(|| CliError::Format(format!("ball coordinate '{part}' is not c:k")))?;
        center.push(parse_q(c.trim())?);
        radius.push(k.trim().parse().map_err(|_| CliError::Format(format!("bad radius exponent '{k}'")))?);
    }
    Ok(Ball::new(p, center, radius))
}

/// Balls separated by `;`.
pub fn parse_set(p: u32, text: &str) -> CliResult<ClopenSet> {
    let balls = text.split(';').map(|b| parse_ball(p, b)).collect::<CliResult<Vec<_>>>()?;
    let dim = balls.first().map_or(0, Ball::dim);
    if balls.iter().any(|b| b.dim() != dim) {
        return Err(CliError::Format("balls of different dimensions".into()));
    }
    Ok(ClopenSet::canonicalize(p, dim, balls))
}

/// Rows separated by `;`, entries by `,`.
pub fn parse_matrix(text: &str) -> CliResult<Vec<Vec<Q>>> {
    text.split(';').map(parse_vec).collect()
}

/// `lo..hi` (inclusive) or a comma list.
fn parse_grid(text: &str) -> CliResult<Vec<i64>> {
    let bad = || CliError::Format(format!("bad grid '{text}'"));
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: i64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: i64 = hi.trim().parse().map_err(|_| bad())?;
        return Ok((lo..=hi).collect());
    }
    text.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect()
}

fn parse_levels(text: &str) -> CliResult<Vec<i64>> {
    text.split(',')
        .map(|v| v.trim().parse().map_err(|_| CliError::Format(format!("bad level '{v}'"))))
        .collect()
}

// ---------------------------------------------------------------- commands

#[derive(Debug, Parser)]
#[command(name = "uml", version, about = "Exact s-adic valued measures on Q_p^n")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Primes {
    #[arg(long, default_value_t = 2)]
    pub p: u32,
    #[arg(long, default_value_t = 3)]
    pub s: u32,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write the result here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum DomainArg {
    Full,
    Unit,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ReadingArg {
    Quotient,
    Product,
}

#[derive(Debug, Args)]
pub struct TParam {
    /// `log_s |T|_s`, a rational.
    #[arg(long, allow_hyphen_values = true)]
    pub tnorm: Option<String>,
    /// An exact rational value of `T`.
    #[arg(long = "T", alias = "t", allow_hyphen_values = true)]
    pub t: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Haar measure restricted to a ball.
    Haar {
        #[command(flatten)]
        primes: Primes,
        /// `c:k` per coordinate, comma separated.
        #[arg(long)]
        ball: String,
        #[command(flatten)]
        output: Output,
    },
    /// The shell-density measure on the window `[jmin, n]`.
    Shellmeasure {
        #[command(flatten)]
        primes: Primes,
        #[arg(long)]
        n: i64,
        #[arg(long, allow_hyphen_values = true)]
        jmin: i64,
        /// Rescale to total mass one, folding the shells below the window into `S(jmin, n)`.
        #[arg(long)]
        normalize: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Characteristic functional at one frequency or on a full dual grid.
    Theta {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, allow_hyphen_values = true, conflicts_with = "grid")]
        z: Option<String>,
        /// Grid level; `UML_DEFAULT_GRID_LEVEL` when given without a value.
        #[arg(long, num_args = 0..=1, default_missing_value = "default")]
        grid: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Recover a cell measure from a theta table.
    Invert {
        #[arg(long)]
        table: PathBuf,
        /// Required level of the table's grid.
        #[arg(long, allow_hyphen_values = true)]
        level: Option<i64>,
        #[command(flatten)]
        output: Output,
    },
    Convolve {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    Product {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Classify an infinite product from factor pairs.
    Kakutani {
        #[arg(long)]
        factors: PathBuf,
        #[arg(long)]
        tol: String,
        /// `one`, `unknown` or `geometric:Q@J`.
        #[arg(long, default_value = "unknown")]
        tail: String,
    },
    /// Truncated shift density over a shell-measure family.
    Rho {
        #[command(flatten)]
        primes: Primes,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long)]
        trunc: usize,
        /// Shell levels per coordinate; `1..=trunc` by default.
        #[arg(long, allow_hyphen_values = true)]
        levels: Option<String>,
    },
    /// Density of the image of a product measure under a linear map.
    Transform {
        #[command(flatten)]
        primes: Primes,
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
        /// One-dimensional factor files, one per coordinate.
        #[arg(long)]
        measure: Vec<PathBuf>,
        /// Shell levels per coordinate, instead of factor files.
        #[arg(long, allow_hyphen_values = true)]
        shell: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
    /// Pseudo-differential operator of a step function at a point.
    Pd {
        /// Step function as a measure file whose densities are the values.
        #[arg(long)]
        f: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, value_enum, default_value = "full")]
        domain: DomainArg,
        #[command(flatten)]
        t: TParam,
    },
    /// Derivative of a measure along a direction, evaluated on a clopen set.
    Pdshift {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        set: String,
        #[command(flatten)]
        t: TParam,
    },
    /// Weak-distribution towers.
    Weakdist {
        #[command(subcommand)]
        action: WeakdistAction,
    },
    /// Run the acceptance suite.
    Selftest {
        /// Only this criterion.
        #[arg(long)]
        only: Option<u32>,
    },
}

#[derive(Debug, Subcommand)]
pub enum WeakdistAction {
    /// Projector consistency on the default sample sets.
    Check {
        #[arg(long)]
        tower: PathBuf,
    },
    /// Tightness against `s^c` on a grid of radius exponents.
    Tight {
        #[arg(long)]
        tower: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        c: i64,
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        /// Exponent bounding `sup_n ‖L_n‖`.
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        bound: i64,
    },
    /// The concentration functional at one frequency and level.
    Sxi {
        #[arg(long)]
        tower: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        xi: String,
        #[arg(long)]
        level: usize,
        #[arg(long, value_enum, default_value = "quotient")]
        reading: ReadingArg,
    },
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_measure(path: &Path, cfg: &Config) -> CliResult<CellMeasure> {
    let file = MeasureFile::parse(&read(path)?)?;
    cfg.check_dim(file.dim)?;
    file.to_measure()
}

fn load_json<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> CliResult<T> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Format(format!("{what} {}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, target: &Output, text: &str, summary: &str) -> CliResult<()> {
    match &target.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            writeln!(out, "wrote {}: {summary}", path.display()).map_err(io)
        }
        None => out.write_all(text.as_bytes()).map_err(io),
    }
}

fn io(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

fn emit_measure(out: &mut dyn Write, target: &Output, mu: &CellMeasure) -> CliResult<()> {
    let mass = mu.total_mass();
    let summary = format!("mass {} (norm {})", fmt_q(&mass), s_norm(&mass, mu.s()).render(mu.s()));
    emit(out, target, &MeasureFile::from_measure(mu).to_text(), &summary)
}

fn bparam(t: &TParam, s: u32) -> CliResult<BParam> {
    match (&t.t, &t.tnorm) {
        (Some(v), norm) => {
            let at = BParam::at(parse_q(v)?, s)?;
            if let Some(n) = norm {
                if parse_q(n)? != at.t_exp {
                    return Err(CliError::Usage(format!("--tnorm {n} disagrees with |T|_s of T = {v}")));
                }
            }
            Ok(at)
        }
        (None, Some(n)) => Ok(BParam::norm_only(parse_q(n)?)),
        (None, None) => Err(CliError::Usage("give --T or --tnorm".into())),
    }
}

fn report_pd(out: &mut dyn Write, r: &PDResult, s: u32) -> CliResult<()> {
    writeln!(out, "value: {}", r.value).map_err(io)?;
    writeln!(out, "t_norm: {}^{}", s, r.at.t_exp).map_err(io)?;
    match &r.verdict {
        Convergence::Convergent(Some(v)) => {
            writeln!(out, "convergent: {} (norm {})", fmt_q(v), s_norm(v, s).render(s)).map_err(io)
        }
        Convergence::Convergent(None) => writeln!(out, "convergent").map_err(io),
        Convergence::Divergent(tails) => {
            for t in tails {
                writeln!(out, "divergent tail: c={} u={} k0={} dir={:?}", fmt_q(&t.c), fmt_q(&t.u), t.k0, t.dir).map_err(io)?;
            }
            Ok(())
        }
    }
}

fn parse_tail(text: &str) -> CliResult<KakutaniTail> {
    match text {
        "one" => Ok(KakutaniTail::EventuallyOne),
        "unknown" => Ok(KakutaniTail::Unknown),
        _ => {
            let bad = || CliError::Format(format!("tail '{text}' is not one, unknown or geometric:Q@J"));
            let rest = text.strip_prefix("geometric:").ok_or_else(bad)?;
            let (qv, from) = rest.split_once('@').unwrap_or((rest, "0"));
            Ok(KakutaniTail::Geometric { q: parse_q(qv)?, from: from.parse().map_err(|_| bad())? })
        }
    }
}

fn shell_family(pp: PrimePair, levels: &[i64]) -> CliResult<FactorFamily> {
    let fs = levels
        .iter()
        .map(|n| ShellDensityMeasure::new(pp, *n).map(Factor::Shell))
        .collect::<Result<_, _>>()?;
    Ok(FactorFamily::new(fs)?)
}

/// Run one parsed command, writing its report to `out`.
pub fn run(cli: Cli, cfg: &Config, out: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::Haar { primes, ball, output } => {
            let pp = PrimePair::new(primes.p, primes.s)?;
            let ball = parse_ball(pp.p, &ball)?;
            cfg.check_dim(ball.dim())?;
            emit_measure(out, &output, &CellMeasure::haar(pp, ball))
        }
        Command::Shellmeasure { primes, n, jmin, normalize, output } => {
            let pp = PrimePair::new(primes.p, primes.s)?;
            if jmin > n {
                return Err(CliError::Usage(format!("--jmin {jmin} above --n {n}")));
            }
            let mu = if normalize {
                ShellDensityMeasure::new(pp, n)?.truncated(jmin)?
            } else {
                let cells = (jmin..=n)
                    .flat_map(|j| {
                        let d = shell_coefficient(pp, n, j);
                        Shell::new(pp.p, j, n).set.balls().iter().map(move |b| (b.clone(), d.clone())).collect::<Vec<_>>()
                    })
                    .collect();
                CellMeasure::new(pp, 1, cells)?
            };
            emit_measure(out, &output, &mu)
        }
        Command::Theta { measure, z, grid, output } => {
            let mu = load_measure(&measure, cfg)?;
            match (z, grid) {
                (Some(z), _) => {
                    let z = parse_vec(&z)?;
                    if z.len() != mu.dim() {
                        return Err(uml_core::Error::DimensionMismatch { expected: mu.dim(), got: z.len() }.into());
                    }
                    let v = theta(&mu, &z);
                    writeln!(out, "{v}\tnorm<= {}", v.norm_bound(mu.s()).render(mu.s())).map_err(io)
                }
                (None, Some(level)) => {
                    let level = if level == "default" {
                        cfg.default_grid_level
                    } else {
                        level.parse().map_err(|_| CliError::Format(format!("bad grid level '{level}'")))?
                    };
                    let table = ThetaTable::sample(&mu, DualGrid::for_measure(&mu, level));
                    let file = ThetaFile::from_table(&table, mu.s());
                    let mut text = serde_json::to_string(&file).expect("theta file serializes");
                    text.push('\n');
                    emit(out, &output, &text, &format!("{} frequencies at level {}", file.samples.len(), file.level))
                }
                (None, None) => Err(CliError::Usage("give --z or --grid".into())),
            }
        }
        Command::Invert { table, level, output } => {
            let file: ThetaFile = load_json(&table, "theta table")?;
            cfg.check_dim(file.dim)?;
            if let Some(l) = level {
                if l != file.level {
                    return Err(CliError::Usage(format!("table is at level {}, not {l}", file.level)));
                }
            }
            let pp = PrimePair::new(file.p, file.s)?;
            emit_measure(out, &output, &invert(&file.to_table()?, pp)?)
        }
        Command::Convolve { a, b, output } => {
            let (a, b) = (load_measure(&a, cfg)?, load_measure(&b, cfg)?);
            emit_measure(out, &output, &a.convolve(&b)?)
        }
        Command::Product { a, b, output } => {
            let (a, b) = (load_measure(&a, cfg)?, load_measure(&b, cfg)?);
            cfg.check_dim(a.dim() + b.dim())?;
            emit_measure(out, &output, &a.product(&b)?)
        }
        Command::Kakutani { factors, tol, tail } => {
            let file: PairsFile = load_json(&factors, "factor pairs")?;
            if file.format != PAIRS_FORMAT {
                return Err(CliError::Format(format!("expected format {PAIRS_FORMAT}, got {}", file.format)));
            }
            let mut betas = Vec::new();
            for (j, pair) in file.pairs.iter().enumerate() {
                let (mu, nu) = (pair.mu.to_measure()?, pair.nu.to_measure()?);
                let beta = beta_factor(&mu, &nu)?;
                writeln!(out, "beta[{j}] = {}", beta.render(mu.s())).map_err(io)?;
                betas.push(beta.to_q(mu.s()));
            }
            let verdict = kakutani_classify(&betas, &parse_tail(&tail)?, &parse_q(&tol)?)?;
            let line = match verdict {
                uml_core::quasi::KakutaniVerdict::Equivalent { product } => format!("Equivalent product={}", fmt_q(&product)),
                uml_core::quasi::KakutaniVerdict::Singular { partial, envelope } => {
                    format!("Singular partial={} envelope={}", fmt_q(&partial), fmt_q(&envelope))
                }
                uml_core::quasi::KakutaniVerdict::Inconclusive { partial } => format!("Inconclusive partial={}", fmt_q(&partial)),
            };
            writeln!(out, "{line}").map_err(io)
        }
        Command::Rho { primes, a, x, trunc, levels } => {
            let pp = PrimePair::new(primes.p, primes.s)?;
            let levels = match levels {
                Some(l) => parse_levels(&l)?,
                None => (1..=trunc as i64).collect(),
            };
            cfg.check_dim(levels.len())?;
            let fam = shell_family(pp, &levels)?;
            let r = rho_shift(&fam, &parse_vec(&a)?, &parse_vec(&x)?, trunc)?;
            writeln!(out, "{}\tnorm {}", fmt_q(&r), s_norm(&r, pp.s).render(pp.s)).map_err(io)
        }
        Command::Transform { primes, matrix, measure, shell, x } => {
            let u = parse_matrix(&matrix)?;
            cfg.check_dim(u.len())?;
            let (fam, s) = match shell {
                Some(levels) => {
                    let pp = PrimePair::new(primes.p, primes.s)?;
                    (shell_family(pp, &parse_levels(&levels)?)?, pp.s)
                }
                None => {
                    let ms = measure.iter().map(|m| load_measure(m, cfg)).collect::<CliResult<Vec<_>>>()?;
                    if ms.iter().any(|m| m.dim() != 1) {
                        return Err(CliError::Usage("factor files must be one-dimensional".into()));
                    }
                    let s = ms.first().map(CellMeasure::s).ok_or_else(|| CliError::Usage("give --measure or --shell".into()))?;
                    (FactorFamily::new(ms.into_iter().map(Factor::Cells).collect())?, s)
                }
            };
            let d = transform_density(&u, &fam, &parse_vec(&x)?)?;
            writeln!(out, "{}\tnorm {}", fmt_q(&d), s_norm(&d, s).render(s)).map_err(io)
        }
        Command::Pd { f, x, domain, t } => {
            let file = MeasureFile::parse(&read(&f)?)?;
            let pp = file.pp()?;
            let f = file.to_step()?;
            let domain = match domain {
                DomainArg::Full => Domain::FullK,
                DomainArg::Unit => Domain::UnitBall,
            };
            let r = pd_evaluate(pp, &f, &parse_q(&x)?, domain, &bparam(&t, pp.s)?)?;
            report_pd(out, &r, pp.s)
        }
        Command::Pdshift { measure, a, set, t } => {
            let mu = load_measure(&measure, cfg)?;
            let set = parse_set(mu.p(), &set)?;
            let r = pd_measure_shift(&mu, &parse_vec(&a)?, &set, &bparam(&t, mu.s())?)?;
            report_pd(out, &r, mu.s())
        }
        Command::Weakdist { action } => run_weakdist(action, cfg, out),
        Command::Selftest { only } => {
            let results = match only {
                Some(id) => vec![acceptance::run_one(id).ok_or_else(|| CliError::Usage(format!("no criterion {id}")))?],
                None => acceptance::run_all(),
            };
            for r in &results {
                writeln!(out, "{r}").map_err(io)?;
            }
            let failed: Vec<String> = results.iter().filter(|r| !r.passed).map(|r| r.id.to_string()).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Failed(format!("criteria failed: {}", failed.join(","))))
            }
        }
    }
}

fn run_weakdist(action: WeakdistAction, cfg: &Config, out: &mut dyn Write) -> CliResult<()> {
    let load = |path: &Path| -> CliResult<WeakDistribution> {
        let file: TowerFile = load_json(path, "tower")?;
        let wd = file.to_tower()?;
        if let Some(d) = wd.dims().last() {
            cfg.check_dim(*d)?;
        }
        Ok(wd)
    };
    match action {
        WeakdistAction::Check { tower } => {
            let wd = load(&tower)?;
            let v = consistency_check(&wd, &default_samples(&wd));
            match v.witness {
                None => writeln!(out, "consistent ({} comparisons)", v.checked).map_err(io),
                Some(w) => {
                    writeln!(
                        out,
                        "inconsistent: levels {} and {} on {}: {} vs {}",
                        w.lower,
                        w.upper,
                        w.set,
                        fmt_q(&w.lower_value),
                        fmt_q(&w.upper_value)
                    )
                    .map_err(io)?;
                    Err(CliError::Failed("tower is not consistent".into()))
                }
            }
        }
        WeakdistAction::Tight { tower, c, grid, bound } => {
            let wd = load(&tower)?;
            let s = wd.pp().s;
            let r = tightness_check(&wd, SNorm::Pow(c), &parse_grid(&grid)?, SNorm::Pow(bound));
            for (i, e) in r.least_radius.iter().enumerate() {
                let e = e.map_or("none".to_string(), |e| format!("p^{e}"));
                writeln!(out, "level {i}: least radius {e}").map_err(io)?;
            }
            let uniform = r.uniform.map_or("none".to_string(), |e| format!("p^{e}"));
            writeln!(out, "uniform radius: {uniform}; sup norm {}", r.sup_norm.render(s)).map_err(io)?;
            if r.passed() {
                Ok(())
            } else {
                Err(CliError::Failed("tower is not tight on the grid".into()))
            }
        }
        WeakdistAction::Sxi { tower, xi, level, reading } => {
            let wd = load(&tower)?;
            let reading = match reading {
                ReadingArg::Quotient => OrdReading::Quotient,
                ReadingArg::Product => OrdReading::Product,
            };
            let xi = parse_q(&xi)?;
            if xi.is_zero() {
                return Err(CliError::Usage("--xi must be nonzero".into()));
            }
            let v = s_xi_functional(&wd, &xi, level, reading)?;
            let s = wd.pp().s;
            writeln!(
                out,
                "S_xi = {}\t|S_xi - 1|_s = {}\treading {}",
                fmt_q(&v.value),
                v.defect.render(s),
                reading.label()
            )
            .map_err(io)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use uml_core::rational::{q, qf};

    #[test]
    fn argument_syntax() {
        let b = parse_ball(2, "1/2:-1,3:2").unwrap();
        assert_eq!(b.radius_exp(), [-1, 2]);
        assert_eq!(parse_set(2, "0:1;1:1").unwrap(), parse_set(2, "0:0").unwrap());
        assert_eq!(parse_matrix("1,0;2,1/3").unwrap(), vec![vec![q(1), q(0)], vec![q(2), qf(1, 3)]]);
        assert_eq!(parse_grid("-2..1").unwrap(), [-2, -1, 0, 1]);
        assert_eq!(parse_grid("4,7").unwrap(), [4, 7]);
        assert!(parse_ball(2, "1/2").is_err());
    }

    #[test]
    fn tails() {
        assert!(matches!(parse_tail("one").unwrap(), KakutaniTail::EventuallyOne));
        match parse_tail("geometric:1/3@5").unwrap() {
            KakutaniTail::Geometric { q: v, from } => assert_eq!((v, from), (qf(1, 3), 5)),
            t => panic!("{t:?}"),
        }
        assert!(parse_tail("sometimes").is_err());
    }

    #[test]
    fn measure_file_round_trip() {
        let pp = PrimePair::new(3, 2).unwrap();
        let mu = CellMeasure::new(pp, 1, vec![(Ball::new1(3, qf(1, 3), 0), qf(-2, 7)), (Ball::new1(3, q(0), 2), q(5))]).unwrap();
        let text = MeasureFile::from_measure(&mu).to_text();
        assert!(text.ends_with('\n'));
        let back = MeasureFile::parse(&text).unwrap();
        assert_eq!(back.to_measure().unwrap(), mu);
        assert_eq!(back.to_text(), text);
    }
}
