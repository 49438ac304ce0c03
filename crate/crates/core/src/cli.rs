//! Command-line front end. Every command renders one CSV dataset.

use std::f64::consts::PI;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::config::{parse_number, ConfigError, Num, Overrides, RunConfig};
use crate::csv::{Cell, CsvTable};
use crate::eigenfunction::{region_masses, synthesize_eigenfunction};
use crate::error::SebaError;
use crate::localization::{constants_at, epsilon, rate_fit, root_near, LocalizationReport};
use crate::model1d::{limit_value, Side};
use crate::scatterer::{
    alpha_n, eigenvalues_for_alpha, Geometry, SpectralFunction, DEFAULT_Z_FLOOR,
};
use crate::transverse::TransverseBasis;

#[derive(Debug, Parser)]
#[command(
    name = "seba",
    version,
    about = "Point scatterer on a thin rectangle: spectra, eigenfunctions and localization"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Transverse boundary condition: dirichlet, neumann, periodic or floquet
    #[arg(long, global = true)]
    pub bc: Option<String>,
    /// Floquet angle in (-pi, pi), e.g. `pi/2`
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta: Option<String>,
    /// Eccentricity a/b of the unit-area rectangle; repeat for a list
    #[arg(long = "E", global = true, value_name = "E")]
    pub e: Vec<String>,
    /// Scatterer abscissa as a fraction of a
    #[arg(long, global = true)]
    pub x0_frac: Option<String>,
    /// Scatterer ordinate as a fraction of b
    #[arg(long, global = true)]
    pub y0_frac: Option<String>,
    /// Absolute truncation tolerance of every series
    #[arg(long, global = true)]
    pub tail_tol: Option<String>,
    /// Cap on transverse rows per series
    #[arg(long, global = true)]
    pub max_terms: Option<usize>,
    /// Output file (default: standard output)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// TOML config file; flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Eigenvalues for one coupling
    Spectrum {
        /// Coupling constant, e.g. `-0.1` or `1/pi`
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
        /// Use the coupling that places an eigenvalue at level n
        #[arg(long)]
        alpha_n: Option<usize>,
        /// Number of eigenvalues, counted with multiplicity (default 10)
        #[arg(long)]
        count: Option<usize>,
    },
    /// The coupling F(z) for which z is an eigenvalue
    AlphaForZ {
        /// Spectral parameter
        #[arg(long, allow_hyphen_values = true)]
        z: Option<String>,
    },
    /// Grid samples of a normalized eigenfunction
    Eigenfunction {
        /// Eigenvalue to sample
        #[arg(long, allow_hyphen_values = true)]
        z: Option<String>,
        /// Sample the eigenvalue placed at level n by its coupling instead
        #[arg(long)]
        alpha_n: Option<usize>,
        /// Grid columns along the long side (default 256)
        #[arg(long)]
        nx: Option<usize>,
        /// Grid rows along the short side (default 16)
        #[arg(long)]
        ny: Option<usize>,
    },
    /// Localization error per level and eccentricity
    LocalizationSweep {
        /// Lowest level (default: smallest admissible)
        #[arg(long)]
        n_min: Option<usize>,
        /// Highest level (default: N_E)
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Fitted decay rate of the localization error in E
    RateFit {
        /// Lowest level (default: smallest admissible)
        #[arg(long)]
        n_min: Option<usize>,
        /// Highest level (default: N_E)
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Datasets behind the figures
    Reproduce {
        /// Dataset to write
        #[arg(value_enum)]
        figure: Figure,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// Couplings α_n against n
    Fig3,
    /// Mass on Ω₁ against z with limit markers
    Fig4,
    /// Eigenfunction grid at the third level
    Fig5,
    /// Localization rates for four scatterer positions
    Fig6,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(SebaError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<SebaError> for CliError {
    fn from(e: SebaError) -> Self {
        match e {
            SebaError::Parameter { .. } | SebaError::LevelRange { .. } => {
                CliError::Config(e.to_string())
            }
            other => CliError::Numerical(other),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let cfg = match resolve(&cli.common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("seba: {e}");
            return e.exit_code();
        }
    };
    match execute(&cli.command, &cfg).and_then(|csv| emit(&cfg, &csv)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("seba: {e}");
            e.exit_code()
        }
    }
}

pub fn resolve(common: &CommonArgs) -> CliResult<RunConfig> {
    let overrides = Overrides {
        bc: common.bc.clone(),
        theta: common.theta.clone(),
        e: common.e.clone(),
        x0_frac: common.x0_frac.clone(),
        y0_frac: common.y0_frac.clone(),
        tail_tol: common.tail_tol.clone(),
        max_terms: common.max_terms,
        out: common.out.clone(),
    };
    Ok(RunConfig::resolve(common.config.as_deref(), &overrides)?)
}

fn emit(cfg: &RunConfig, csv: &str) -> CliResult<()> {
    match &cfg.out {
        Some(path) => std::fs::write(path, csv)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(csv.as_bytes())
            .map_err(|e| CliError::Config(format!("cannot write to standard output: {e}"))),
    }
}

fn number(flag: &Option<String>, file: &Option<Num>) -> CliResult<Option<f64>> {
    Ok(match (flag, file) {
        (Some(s), _) => Some(parse_number(s)?),
        (None, Some(n)) => Some(n.value()?),
        (None, None) => None,
    })
}

/// Runs one command against a resolved configuration and returns the CSV text.
pub fn execute(command: &Command, cfg: &RunConfig) -> CliResult<String> {
    match command {
        Command::Spectrum {
            alpha,
            alpha_n: level,
            count,
        } => {
            let count = count.or(cfg.spectrum.count).unwrap_or(10);
            let alpha = match (
                number(alpha, &cfg.spectrum.alpha)?,
                level.or(cfg.spectrum.alpha_n),
            ) {
                (Some(a), _) => a,
                (None, Some(n)) => alpha_n(n, &spectral_function(cfg, cfg.e[0])?)?.alpha,
                (None, None) => {
                    return Err(CliError::Config(
                        "spectrum needs --alpha or --alpha-n".into(),
                    ))
                }
            };
            cmd_spectrum(cfg, alpha, count)
        }
        Command::AlphaForZ { z } => {
            let z = number(z, &cfg.alpha_for_z.z)?
                .ok_or_else(|| CliError::Config("alpha-for-z needs --z".into()))?;
            cmd_alpha_for_z(cfg, z)
        }
        Command::Eigenfunction {
            z,
            alpha_n: level,
            nx,
            ny,
        } => {
            let sec = &cfg.eigenfunction;
            let target = match (number(z, &sec.z)?, level.or(sec.alpha_n)) {
                (Some(z), _) => Target::Z(z),
                (None, Some(n)) => Target::Level(n),
                (None, None) => {
                    return Err(CliError::Config(
                        "eigenfunction needs --z or --alpha-n".into(),
                    ))
                }
            };
            cmd_eigenfunction(
                cfg,
                "eigenfunction",
                target,
                nx.or(sec.nx).unwrap_or(256),
                ny.or(sec.ny).unwrap_or(16),
            )
        }
        Command::LocalizationSweep { n_min, n_max } => cmd_localization_sweep(
            cfg,
            n_min.or(cfg.localization_sweep.n_min),
            n_max.or(cfg.localization_sweep.n_max),
        ),
        Command::RateFit { n_min, n_max } => {
            let es = if cfg.e_given {
                cfg.e.clone()
            } else {
                default_rate_es()
            };
            let range = (n_min.or(cfg.rate_fit.n_min), n_max.or(cfg.rate_fit.n_max));
            rate_table(cfg, "rate-fit", &[cfg.x0_frac], &es, range)
        }
        Command::Reproduce { figure } => cmd_reproduce(*figure, cfg),
    }
}

fn spectral_function(cfg: &RunConfig, e: f64) -> CliResult<SpectralFunction> {
    let geom = Geometry::from_eccentricity(e, cfg.x0_frac, cfg.y0_frac)?;
    let basis = TransverseBasis::new(cfg.bc)?;
    Ok(SpectralFunction::new(geom, basis, cfg.series)?)
}

fn par_map_progress<T, R, F>(label: &str, jobs: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    let done = AtomicUsize::new(0);
    let total = jobs.len();
    let step = (total / 10).max(1);
    jobs.par_iter()
        .map(|job| {
            let r = f(job);
            let k = done.fetch_add(1, Ordering::Relaxed) + 1;
            if k.is_multiple_of(step) || k == total {
                eprintln!("{label}: {k}/{total}");
            }
            r
        })
        .collect()
}

/// The first `count` eigenvalues, counted with multiplicity.
pub fn cmd_spectrum(cfg: &RunConfig, alpha: f64, count: usize) -> CliResult<String> {
    let mut table = CsvTable::new("spectrum", &["index", "z", "kind", "multiplicity", "F"]);
    if count == 0 {
        return Ok(table.finish());
    }
    let f = spectral_function(cfg, cfg.e[0])?;
    let first = f.geometry().lambda(1, f.basis().mode(1).nu);
    let mut hi = first.max(0.0) + 4.0 * PI * (count as f64 + 10.0);
    let pairs = loop {
        let pairs = eigenvalues_for_alpha(alpha, &f, (DEFAULT_Z_FLOOR, hi))?;
        if pairs.iter().map(|p| p.multiplicity).sum::<usize>() >= count {
            break pairs;
        }
        hi *= 2.0;
    };
    let mut index = 1;
    for p in pairs {
        if index > count {
            break;
        }
        let value = match p.alpha {
            Some(_) => Some(f.eval_unguarded(p.z)?.value),
            None => None,
        };
        table.row(vec![
            index.into(),
            p.z.into(),
            p.kind.name().into(),
            p.multiplicity.into(),
            value.into(),
        ]);
        index += p.multiplicity;
    }
    Ok(table.finish())
}

pub fn cmd_alpha_for_z(cfg: &RunConfig, z: f64) -> CliResult<String> {
    let f = spectral_function(cfg, cfg.e[0])?;
    let v = f.eval(z)?;
    let mut table = CsvTable::new(
        "alpha-for-z",
        &["z", "alpha", "derivative", "rows", "tail_bound"],
    );
    table.row(vec![
        z.into(),
        v.value.into(),
        v.derivative.into(),
        v.rows.into(),
        v.tail_bound.into(),
    ]);
    Ok(table.finish())
}

/// Which eigenfunction to sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    Z(f64),
    /// The eigenvalue near level `n` at coupling `α_n`.
    Level(usize),
}

/// Cell-centred samples `(x, y, Re ψ, Im ψ)` on an `nx × ny` grid.
pub fn cmd_eigenfunction(
    cfg: &RunConfig,
    dataset: &str,
    target: Target,
    nx: usize,
    ny: usize,
) -> CliResult<String> {
    if nx == 0 || ny == 0 {
        return Err(CliError::Config(format!(
            "grid must be nonempty, got {nx} x {ny}"
        )));
    }
    let f = spectral_function(cfg, cfg.e[0])?;
    let z = match target {
        Target::Z(z) => z,
        Target::Level(n) => {
            let an = alpha_n(n, &f)?;
            root_near(an.alpha, an.z_target, &f)?
        }
    };
    let psi = synthesize_eigenfunction(z, &f)?;
    let (a, b) = (f.geometry().a(), f.geometry().b());
    let points: Vec<(f64, f64)> = (0..ny)
        .flat_map(|j| {
            (0..nx).map(move |i| {
                (
                    (i as f64 + 0.5) * a / nx as f64,
                    (j as f64 + 0.5) * b / ny as f64,
                )
            })
        })
        .collect();
    let values = par_map_progress(dataset, &points, |&(x, y)| psi.value(x, y));
    let mut table = CsvTable::new(dataset, &["x", "y", "re", "im", "z"]);
    for ((x, y), v) in points.into_iter().zip(values) {
        table.row(vec![x.into(), y.into(), v.re.into(), v.im.into(), z.into()]);
    }
    Ok(table.finish())
}

fn level_range(
    basis: &TransverseBasis,
    es: &[f64],
    (n_min, n_max): (Option<usize>, Option<usize>),
) -> CliResult<(usize, usize)> {
    let consts: Vec<_> = es.iter().map(|&e| constants_at(e, basis)).collect();
    let lo = n_min.unwrap_or(consts[0].n_tilde);
    let hi = n_max.unwrap_or_else(|| consts.iter().map(|c| c.n_e).min().expect("nonempty"));
    if lo > hi {
        return Err(CliError::Config(format!("empty level range {lo}..={hi}")));
    }
    Ok((lo, hi))
}

fn row_status(result: &Result<LocalizationReport, SebaError>, x0_frac: f64) -> &'static str {
    let symmetric = (x0_frac - 0.5).abs() < 1e-12;
    match result {
        _ if symmetric => "symmetric",
        Ok(_) => "ok",
        Err(SebaError::LevelRange { .. }) => "out_of_range",
        Err(_) => "failed",
    }
}

/// One row per `(E, n)`, sorted by `E` then `n`.
pub fn cmd_localization_sweep(
    cfg: &RunConfig,
    n_min: Option<usize>,
    n_max: Option<usize>,
) -> CliResult<String> {
    let basis = TransverseBasis::new(cfg.bc)?;
    let mut es = cfg.e.clone();
    es.sort_by(f64::total_cmp);
    es.dedup();
    let (lo, hi) = level_range(&basis, &es, (n_min, n_max))?;
    let jobs: Vec<(f64, usize)> = es
        .iter()
        .flat_map(|&e| (lo..=hi).map(move |n| (e, n)))
        .collect();
    let results = par_map_progress("localization-sweep", &jobs, |&(e, n)| {
        epsilon(n, e, cfg.x0_frac, cfg.y0_frac, &basis, &cfg.series)
    });
    let mut table = CsvTable::new(
        "localization-sweep",
        &[
            "E",
            "n",
            "x0_frac",
            "side",
            "alpha",
            "z",
            "epsilon",
            "bound",
            "omega1_fraction",
            "complement_fraction",
            "index",
            "correspondence_gap",
            "status",
        ],
    );
    let mut flagged = 0;
    let mut failures = Vec::new();
    for (&(e, n), result) in jobs.iter().zip(&results) {
        let status = row_status(result, cfg.x0_frac);
        if status != "ok" {
            flagged += 1;
        }
        match result {
            Ok(r) => table.row(vec![
                e.into(),
                n.into(),
                cfg.x0_frac.into(),
                r.side.name().into(),
                r.alpha.into(),
                r.z.into(),
                r.epsilon.into(),
                r.bound.into(),
                r.omega1_fraction.into(),
                r.complement_fraction.into(),
                r.index.into(),
                r.correspondence_gap.into(),
                status.into(),
            ]),
            Err(err) => {
                if status == "failed" {
                    failures.push(err.clone());
                }
                let mut cells = vec![e.into(), n.into(), cfg.x0_frac.into()];
                cells.extend(std::iter::repeat_n(Cell::Empty, 9));
                cells.push(status.into());
                table.row(cells);
            }
        }
    }
    if flagged > 0 {
        eprintln!("seba: warning: {flagged} of {} rows flagged", jobs.len());
    }
    if !jobs.is_empty() && failures.len() == jobs.len() {
        return Err(CliError::Numerical(failures.swap_remove(0)));
    }
    Ok(table.finish())
}

pub fn default_rate_es() -> Vec<f64> {
    (1..=5).map(|k| 2.0 * k as f64 * PI).collect()
}

/// The four scatterer positions of the rate experiment.
pub fn rate_positions() -> [f64; 4] {
    [0.3 / PI, 0.7 / PI, 1.1 / PI, 1.5 / PI]
}

/// Fitted slope of `ln ε` against `ln E` per `(x0_frac, n)`.
pub fn rate_table(
    cfg: &RunConfig,
    dataset: &str,
    x0s: &[f64],
    es: &[f64],
    range: (Option<usize>, Option<usize>),
) -> CliResult<String> {
    let basis = TransverseBasis::new(cfg.bc)?;
    let (lo, hi) = level_range(&basis, es, range)?;
    let jobs: Vec<(f64, usize, f64)> = x0s
        .iter()
        .flat_map(|&x| (lo..=hi).flat_map(move |n| es.iter().map(move |&e| (x, n, e))))
        .collect();
    let results = par_map_progress(dataset, &jobs, |&(x, n, e)| {
        epsilon(n, e, x, cfg.y0_frac, &basis, &cfg.series)
    });
    let mut table = CsvTable::new(
        dataset,
        &[
            "x0_frac",
            "n",
            "side",
            "slope",
            "intercept",
            "residual",
            "samples",
            "status",
        ],
    );
    let per_fit = es.len();
    for (chunk_jobs, chunk) in jobs.chunks(per_fit).zip(results.chunks(per_fit)) {
        let (x, n, _) = chunk_jobs[0];
        let side: Option<Side> = chunk.iter().find_map(|r| r.as_ref().ok().map(|r| r.side));
        let samples: Vec<(f64, f64)> = chunk
            .iter()
            .filter_map(|r| r.as_ref().ok().map(|r| (r.e, r.epsilon)))
            .collect();
        let status = chunk
            .iter()
            .map(|r| row_status(r, x))
            .find(|s| *s != "ok")
            .unwrap_or("ok");
        match rate_fit(&samples) {
            Ok(fit) => table.row(vec![
                x.into(),
                n.into(),
                side.map(|s| s.name()).into(),
                fit.slope.into(),
                fit.intercept.into(),
                fit.residual.into(),
                fit.samples.len().into(),
                status.into(),
            ]),
            Err(_) => table.row(vec![
                x.into(),
                n.into(),
                side.map(|s| s.name()).into(),
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                samples.len().into(),
                if status == "ok" {
                    "insufficient"
                } else {
                    status
                }
                .into(),
            ]),
        }
    }
    Ok(table.finish())
}

pub fn cmd_reproduce(figure: Figure, cfg: &RunConfig) -> CliResult<String> {
    match figure {
        Figure::Fig3 => {
            let f = spectral_function(cfg, cfg.e[0])?;
            let consts = constants_at(cfg.e[0], f.basis());
            let mut table = CsvTable::new("fig3", &["n", "alpha", "z_target", "limit", "side"]);
            for n in consts.n_tilde..=consts.n_e {
                let an = alpha_n(n, &f)?;
                table.row(vec![
                    n.into(),
                    an.alpha.into(),
                    an.z_target.into(),
                    an.limit.into(),
                    an.side.name().into(),
                ]);
            }
            Ok(table.finish())
        }
        Figure::Fig4 => fig4(cfg, cfg.reproduce.samples.unwrap_or(400)),
        Figure::Fig5 => cmd_eigenfunction(
            cfg,
            "fig5",
            Target::Level(3),
            cfg.reproduce.nx.unwrap_or(256),
            cfg.reproduce.ny.unwrap_or(16),
        ),
        Figure::Fig6 => {
            let es = if cfg.e_given {
                cfg.e.clone()
            } else {
                default_rate_es()
            };
            rate_table(cfg, "fig6", &rate_positions(), &es, (None, None))
        }
    }
}

/// Number of limit markers in the mass curve; they cover levels `2..=10`.
pub const FIG4_MARKERS: usize = 9;

/// `‖ψ_z‖` on `Ω₁` and its complement along `z`, with the shifted limit values as markers.
fn fig4(cfg: &RunConfig, samples: usize) -> CliResult<String> {
    let f = spectral_function(cfg, cfg.e[0])?;
    let geom = *f.geometry();
    let basis = *f.basis();
    let shift = basis.mode(1).nu / (geom.b() * geom.b());
    let interval = geom.interval();
    let mut points: Vec<(f64, Option<(Side, usize)>)> = Vec::new();
    for k in 1..=FIG4_MARKERS {
        let entry = limit_value(&interval, k)?;
        points.push((shift + entry.z, Some((entry.side, k + 1))));
    }
    let top = shift + limit_value(&interval, FIG4_MARKERS + 1)?.z;
    for i in 0..samples {
        let z = shift + (top - shift) * (i as f64 + 0.5) / samples as f64;
        if f.pole_near(z).is_none() {
            points.push((z, None));
        }
    }
    points.sort_by(|p, q| p.0.total_cmp(&q.0));
    let masses = par_map_progress("fig4", &points, |&(z, _)| {
        region_masses(z, &geom, &basis, &cfg.series)
    });
    let mut table = CsvTable::new(
        "fig4",
        &["z", "omega1_norm", "complement_norm", "marker", "n"],
    );
    for ((z, marker), m) in points.into_iter().zip(masses) {
        let m = m?;
        table.row(vec![
            z.into(),
            m.omega1_fraction().sqrt().into(),
            m.complement_fraction().sqrt().into(),
            marker.map(|(s, _)| s.name()).into(),
            marker.map(|(_, n)| n).into(),
        ]);
    }
    Ok(table.finish())
}
