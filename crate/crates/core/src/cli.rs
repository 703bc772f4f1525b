//! Batch front-end behind the `prodfade` binary.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::asym::{match_kappa, Shadowing};
use crate::error::Error;
use crate::fit::{fit_cdf, fit_pdf_mse, EmpiricalDistribution, EmpiricalKind, FitResult, ObjectiveKind, SearchConfig};
use crate::gammagamma::{gg_cdf, gg_pdf, GammaGammaParams};
use crate::mixture::{ShadowedDistribution, ShadowedParams};
use crate::pdist::ProductModel;
use crate::sysmodels::{backscatter_power_cdf, wpc_outage_nakagami, wpc_sweep, BackscatterConfig, SdModel, WpcConfig};

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_INGESTION: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "prodfade", version, about = "Products of κ-μ shadowed fading channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate pdf and cdf on a grid
    Eval(EvalArgs),
    /// Draw samples
    Sample(SampleArgs),
    /// Fit a product model to samples or a tabulated CDF
    FitCdf(FitArgs),
    /// Fit an envelope model to a tabulated PDF or envelope samples
    FitPdf(FitArgs),
    /// Outage and throughput of the harvest-then-transmit link over P/N₀ in dB
    Wpc(WpcArgs),
    /// CDF of the backscatter received power over a dB grid
    Backscatter(BackscatterArgs),
    /// κ of the Rician-shadowed law whose asymptote matches a Rician channel
    MatchKappa(MatchKappaArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Dist {
    /// single squared κ-μ shadowed link
    Kms,
    /// Gamma-Gamma product
    Gg,
    /// product of two squared κ-μ shadowed links
    Prod,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, value_enum)]
    pub dist: Dist,
    /// JSON parameter file
    #[arg(long)]
    pub params: PathBuf,
    /// start:stop:points[:log|:lin], log-spaced by default
    #[arg(long)]
    pub grid: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, value_enum)]
    pub dist: Dist,
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV with header `sample`, `x,cdf` or `x,pdf`
    #[arg(long)]
    pub data: PathBuf,
    /// JSON search configuration; the flags below override it
    #[arg(long)]
    pub search: Option<PathBuf>,
    #[arg(long)]
    pub max_m: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WpcArgs {
    /// JSON link configuration; its P/N₀ is replaced by the grid
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// antennas for the built-in reference setup
    #[arg(long, default_value_t = 1)]
    pub antennas: u32,
    /// S–D hop of the reference setup
    #[arg(long, value_enum, default_value_t = SdKind::Rayleigh)]
    pub s_d: SdKind,
    /// P/N₀ grid in dB, start:stop:points
    #[arg(long, default_value = "30:87:20", allow_hyphen_values = true)]
    pub grid: String,
    /// add the Nakagami-approximation outage column
    #[arg(long)]
    pub nakagami: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SdKind {
    Rayleigh,
    Rician,
}

#[derive(Debug, Args)]
pub struct BackscatterArgs {
    #[arg(long)]
    pub params: PathBuf,
    /// received power grid in dB, start:stop:points
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MatchKappaArgs {
    #[arg(long = "K")]
    pub k: f64,
    #[arg(long, default_value_t = 1)]
    pub mu: u32,
    /// LOS shadowing shape; omitted means unshadowed
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failed command with its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Domain(_) | Error::InvalidParameter(_) | Error::Degenerate(_) => EXIT_VALIDATION,
            Error::Ingest { .. } | Error::Io(_) | Error::NoAdmissiblePoints(_) => EXIT_INGESTION,
            Error::Overflow(_) | Error::Underflow(_) | Error::NoRoot(_) | Error::Numerical(_) => EXIT_NUMERICAL,
        };
        CliError { code, message: e.to_string() }
    }
}

fn validation(msg: impl Into<String>) -> CliError {
    CliError { code: EXIT_VALIDATION, message: msg.into() }
}

fn ingestion(msg: impl Into<String>) -> CliError {
    CliError { code: EXIT_INGESTION, message: msg.into() }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Evaluation grid parsed from `start:stop:points[:log|:lin]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub log: bool,
}

impl Grid {
    /// Linear spacing unless `:log` is given.
    pub fn parse(s: &str) -> CliResult<Self> {
        Self::parse_or(s, false)
    }

    /// As [`Grid::parse`], with `log_default` deciding the spacing when the
    /// suffix is omitted.
    pub fn parse_or(s: &str, log_default: bool) -> CliResult<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(validation(format!("grid {s:?} must look like start:stop:points[:log|:lin]")));
        }
        let num = |t: &str, what: &str| -> CliResult<f64> {
            t.trim().parse::<f64>().map_err(|_| validation(format!("grid {what} {t:?} is not a number")))
        };
        let start = num(parts[0], "start")?;
        let stop = num(parts[1], "stop")?;
        let points: usize =
            parts[2].trim().parse().map_err(|_| validation(format!("grid points {:?} is not an integer", parts[2])))?;
        let log = match parts.get(3).map(|t| t.trim()) {
            None => log_default,
            Some("lin") => false,
            Some("log") => true,
            Some(other) => return Err(validation(format!("grid spacing {other:?} must be log or lin"))),
        };
        if !(start.is_finite() && stop.is_finite()) || points < 1 || (points > 1 && stop <= start) {
            return Err(validation(format!("grid {s:?} needs finite start < stop and points >= 1")));
        }
        if log && start <= 0.0 {
            return Err(validation("log grid needs start > 0"));
        }
        Ok(Grid { start, stop, points, log })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let t = i as f64 / last;
                if i + 1 == self.points {
                    self.stop
                } else if self.log {
                    10f64.powf(self.start.log10() + t * (self.stop.log10() - self.start.log10()))
                } else {
                    self.start + t * (self.stop - self.start)
                }
            })
            .collect()
    }
}

/// Sidecar written next to every output file as `<out>.manifest.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Value,
    pub seed: Option<u64>,
    pub version: String,
    /// seconds since the Unix epoch; `SOURCE_DATE_EPOCH` when set
    pub timestamp: u64,
    pub metadata: BTreeMap<String, String>,
}

impl RunManifest {
    fn new(command: &str, config: Value, seed: Option<u64>) -> Self {
        RunManifest {
            command: command.into(),
            config,
            seed,
            version: env!("CARGO_PKG_VERSION").into(),
            timestamp: timestamp(),
            metadata: BTreeMap::new(),
        }
    }
}

fn timestamp() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.trim().parse().ok()) {
        return t;
    }
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| ingestion(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        let code = if e.is_data() { EXIT_VALIDATION } else { EXIT_INGESTION };
        let message = if e.line() == 0 {
            format!("{}: {e}", path.display())
        } else {
            format!("{}: line {} column {}: {e}", path.display(), e.line(), e.column())
        };
        CliError { code, message }
    })
}

fn emit(out: Option<&Path>, body: &str, manifest: RunManifest) -> CliResult<()> {
    match out {
        Some(path) => {
            fs::write(path, body).map_err(|e| ingestion(format!("{}: {e}", path.display())))?;
            let m = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
            let mp = manifest_path(path);
            fs::write(&mp, m + "\n").map_err(|e| ingestion(format!("{}: {e}", mp.display())))?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes()).map_err(|e| ingestion(e.to_string()))?;
        }
    }
    Ok(())
}

enum Loaded {
    Kms(ShadowedDistribution),
    Gg(GammaGammaParams),
    Prod(ProductModel),
}

impl Loaded {
    fn read(dist: Dist, path: &Path) -> CliResult<(Self, Value)> {
        Ok(match dist {
            Dist::Kms => {
                let p: ShadowedParams = read_json(path)?;
                (Loaded::Kms(ShadowedDistribution::new(p)), json!(p))
            }
            Dist::Gg => {
                let p: GammaGammaParams = read_json(path)?;
                (Loaded::Gg(p), json!(p))
            }
            Dist::Prod => {
                let p: ProductModel = read_json(path)?;
                let cfg = json!(p);
                (Loaded::Prod(p), cfg)
            }
        })
    }

    fn pdf_cdf(&self, x: f64) -> crate::Result<(f64, f64)> {
        match self {
            Loaded::Kms(d) => Ok((d.pdf(x)?, d.cdf(x)?)),
            Loaded::Gg(p) => Ok((gg_pdf(p, x)?, gg_cdf(p, x)?)),
            Loaded::Prod(m) => Ok((m.pdf(x)?, m.cdf(x)?)),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng, n: usize) -> crate::Result<Vec<f64>> {
        match self {
            Loaded::Kms(d) => d.sample(rng, n),
            Loaded::Gg(p) => {
                let a = Gamma::new(p.m() as f64, p.omega()).map_err(|e| Error::InvalidParameter(e.to_string()))?;
                let b = Gamma::new(p.m_hat() as f64, p.omega_hat())
                    .map_err(|e| Error::InvalidParameter(e.to_string()))?;
                Ok((0..n).map(|_| a.sample(rng) * b.sample(rng)).collect())
            }
            Loaded::Prod(m) => m.sample(rng, n),
        }
    }
}

fn cmd_eval(a: &EvalArgs) -> CliResult<()> {
    let grid = Grid::parse_or(&a.grid, true)?;
    let (dist, params) = Loaded::read(a.dist, &a.params)?;
    let mut body = String::from("x,pdf,cdf\n");
    for x in grid.values() {
        let (p, c) = dist.pdf_cdf(x)?;
        body.push_str(&format!("{},{},{}\n", num(x), num(p), num(c)));
    }
    let manifest = RunManifest::new("eval", json!({ "dist": a.dist, "params": params, "grid": grid }), None);
    emit(a.out.as_deref(), &body, manifest)
}

fn cmd_sample(a: &SampleArgs) -> CliResult<()> {
    if a.n == 0 {
        return Err(validation("n must be >= 1"));
    }
    let (dist, params) = Loaded::read(a.dist, &a.params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let draws = dist.sample(&mut rng, a.n)?;
    let mut body = String::with_capacity(24 * (a.n + 1));
    body.push_str("sample\n");
    for v in draws {
        body.push_str(&num(v));
        body.push('\n');
    }
    let mut manifest = RunManifest::new("sample", json!({ "dist": a.dist, "params": params, "n": a.n }), Some(a.seed));
    manifest.metadata.insert("rng".into(), "chacha8".into());
    emit(a.out.as_deref(), &body, manifest)
}

fn search_config(a: &FitArgs) -> CliResult<SearchConfig> {
    let mut cfg: SearchConfig = match &a.search {
        Some(p) => read_json(p)?,
        None => SearchConfig::default(),
    };
    if let Some(m) = a.max_m {
        cfg.max_m = m;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn read_data(path: &Path) -> CliResult<EmpiricalDistribution> {
    let file = fs::File::open(path).map_err(|e| ingestion(format!("{}: {e}", path.display())))?;
    EmpiricalDistribution::read_csv(std::io::BufReader::new(file)).map_err(|e| {
        let mut err = CliError::from(e);
        err.message = format!("{}: {}", path.display(), err.message);
        err
    })
}

fn fit_summary(r: &FitResult) -> String {
    let label = match r.objective {
        ObjectiveKind::KsError => "epsilon",
        ObjectiveKind::MsePercent => "mse_percent",
    };
    let c = r.cell;
    format!(
        "{label} = {}\nmu = {}, m = {}, mu_hat = {}, m_hat = {}\nkappa = {}, kappa_hat = {}, scale = {}\n",
        num(r.objective_value),
        c.mu,
        c.m,
        c.mu_hat,
        c.m_hat,
        num(r.params.kappa),
        num(r.params.kappa_hat),
        num(r.params.scale)
    )
}

fn cmd_fit(a: &FitArgs, pdf: bool) -> CliResult<()> {
    let cfg = search_config(a)?;
    let data = read_data(&a.data)?;
    let total = data.points().len();
    let (result, name, data_meta) = if pdf {
        let table = match data.kind() {
            EmpiricalKind::PdfPoints => data,
            EmpiricalKind::Samples => data.histogram_pdf()?,
            EmpiricalKind::CdfPoints => return Err(validation("fit-pdf needs `x,pdf` points or envelope samples")),
        };
        let meta = table.metadata().clone();
        (fit_pdf_mse(&table, &cfg)?, "fit-pdf", meta)
    } else {
        if data.kind() == EmpiricalKind::PdfPoints {
            return Err(validation("fit-cdf needs `sample` or `x,cdf` data"));
        }
        let admissible = data.admissible_points()?.len();
        let mut meta = data.metadata().clone();
        meta.insert("admissible_points".into(), format!("{admissible} of {total}"));
        if admissible < total {
            eprintln!(
                "fit-cdf: {} of {total} points have F below the admissible floor {} and were excluded",
                total - admissible,
                num(data.admissible_floor()?)
            );
        }
        (fit_cdf(&data, &cfg)?, "fit-cdf", meta)
    };
    eprint!("{}", fit_summary(&result));
    let body = serde_json::to_string_pretty(&result).expect("fit result serialises") + "\n";
    let mut manifest = RunManifest::new(name, json!({ "data": a.data, "search": cfg }), Some(cfg.seed));
    manifest.metadata = data_meta;
    emit(a.out.as_deref(), &body, manifest)
}

fn cmd_wpc(a: &WpcArgs) -> CliResult<()> {
    let grid = Grid::parse(&a.grid)?;
    let cfg = match &a.params {
        Some(p) => read_json::<WpcConfig>(p)?,
        None => {
            let base = WpcConfig::reference(1.0, a.antennas)?;
            match a.s_d {
                SdKind::Rayleigh => base,
                SdKind::Rician => {
                    let k = base.rician_k();
                    base.with_s_d(SdModel::Rician { k })?
                }
            }
        }
    };
    let db = grid.values();
    let points = wpc_sweep(&cfg, &db)?;
    let mut body = String::from(if a.nakagami {
        "p_over_n0_db,outage,throughput,outage_nakagami\n"
    } else {
        "p_over_n0_db,outage,throughput\n"
    });
    for p in &points {
        body.push_str(&format!("{},{},{}", num(p.p_over_n0_db), num(p.outage), num(p.throughput)));
        if a.nakagami {
            let c = cfg.with_p_over_n0(10f64.powf(p.p_over_n0_db / 10.0))?;
            body.push_str(&format!(",{}", num(wpc_outage_nakagami(&c)?)));
        }
        body.push('\n');
    }
    let mut manifest = RunManifest::new("wpc", json!({ "link": cfg, "grid_db": grid }), None);
    manifest.metadata.insert("x_axis".into(), "transmit power over noise P/N0 in dB".into());
    if a.nakagami {
        manifest
            .metadata
            .insert("comparator".into(), "nakagami-m, real shapes, gauss-kronrod quadrature".into());
    }
    emit(a.out.as_deref(), &body, manifest)
}

fn cmd_backscatter(a: &BackscatterArgs) -> CliResult<()> {
    let grid = Grid::parse(&a.grid)?;
    let cfg: BackscatterConfig = read_json(&a.params)?;
    let mut body = String::from("power_db,cdf\n");
    for db in grid.values() {
        let c = backscatter_power_cdf(&cfg, 10f64.powf(db / 10.0))?;
        body.push_str(&format!("{},{}\n", num(db), num(c)));
    }
    let manifest = RunManifest::new("backscatter", json!({ "link": cfg, "grid_db": grid }), None);
    emit(a.out.as_deref(), &body, manifest)
}

fn cmd_match_kappa(a: &MatchKappaArgs) -> CliResult<()> {
    let shadowing = match a.m {
        Some(m) => Shadowing::Finite(m),
        None => Shadowing::Infinite,
    };
    let kappa = match_kappa(a.k, a.mu, shadowing)?;
    let body = format!("kappa\n{}\n", num(kappa));
    let manifest = RunManifest::new("match-kappa", json!({ "K": a.k, "mu": a.mu, "m": a.m }), None);
    emit(a.out.as_deref(), &body, manifest)
}

fn configure_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var("PRODFADE_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| validation(format!("PRODFADE_THREADS={v:?} is not an integer")))?;
        // a pool that is already built keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

pub fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match &cli.command {
        Command::Eval(a) => cmd_eval(a),
        Command::Sample(a) => cmd_sample(a),
        Command::FitCdf(a) => cmd_fit(a, false),
        Command::FitPdf(a) => cmd_fit(a, true),
        Command::Wpc(a) => cmd_wpc(a),
        Command::Backscatter(a) => cmd_backscatter(a),
        Command::MatchKappa(a) => cmd_match_kappa(a),
    }
}
