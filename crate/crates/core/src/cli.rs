//! Command-line front end. Exit codes: 0 success, 1 usage error, 2 numerical
//! failure or non-convergence.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::analysis::{diagnostics, fit_decay, DecayFits};
use crate::dynamics::{initial_profile, relax_with_progress, RelaxationConfig, RelaxationResult};
use crate::energy::{renormalized_energy, Cutoff, CutoffShape};
use crate::error::Error;
use crate::grid::{Grid, GridSpec};
use crate::io::{self, ArtifactPaths, ResultSummary, RunRecord, SweepEntry, SweepRecord};
use crate::params::{derive_scales, parse_angle, MaterialParams, ModelParams, RunConfig};
use crate::validation::{self, ValidationOptions};

/// Environment variable holding the number of sweep workers.
pub const WORKERS_ENV: &str = "EDGEWALL_WORKERS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "edgewall", version, about = "Relax and analyze edge domain wall profiles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Relax the initial profile 2β/(1 + e^{x/2}) to a steady state.
    Relax(RelaxArgs),
    /// Evaluate the renormalized energy of a profile CSV.
    Energy(EnergyArgs),
    /// Relax every (β, ν) pair of two lists.
    Sweep(SweepArgs),
    /// Fit the tail decay of a profile CSV and report shape diagnostics.
    Decay(DecayArgs),
    /// Run the acceptance suite.
    Validate(ValidateArgs),
    /// Derive dimensionless parameters from material constants.
    Scales(ScalesArgs),
}

#[derive(Debug, Args, Clone)]
struct RunFlags {
    /// key=value file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dx0: Option<f64>,
    /// Stretch factor b: spacing grows by 1 + 1/b per cell ("inf" for uniform).
    #[arg(long)]
    stretch: Option<f64>,
    #[arg(long)]
    xmax: Option<f64>,
    #[arg(long)]
    hmax: Option<f64>,
    /// Time step; defaults to min(0.05, h_min/(1 + ν)).
    #[arg(long)]
    dt: Option<f64>,
    /// Residual sup-norm at which a run counts as converged.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long = "max-steps")]
    max_steps: Option<usize>,
    /// Output prefix.
    #[arg(long)]
    out: Option<String>,
    /// Tail-fit window "lo,hi"; the fit is skipped when it does not fit the grid.
    #[arg(long = "fit-window", default_value = "50,500")]
    fit_window: String,
}

#[derive(Debug, Args)]
struct RelaxArgs {
    /// Edge angle: radians or a multiple of pi such as 3*pi/4.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    #[arg(long)]
    nu: Option<f64>,
    #[command(flatten)]
    run: RunFlags,
    /// Steps between progress lines; 0 disables them.
    #[arg(long = "report-every", default_value_t = 1000)]
    report_every: usize,
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Comma-separated edge angles.
    #[arg(long = "beta-list", allow_hyphen_values = true)]
    beta_list: String,
    /// Comma-separated thin-film parameters.
    #[arg(long = "nu-list")]
    nu_list: String,
    #[command(flatten)]
    run: RunFlags,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CutoffArg {
    Quintic,
    Cubic,
}

#[derive(Debug, Args)]
struct EnergyArgs {
    #[arg(long)]
    profile: PathBuf,
    #[arg(long)]
    nu: f64,
    #[arg(long, value_enum, default_value = "quintic")]
    cutoff: CutoffArg,
}

#[derive(Debug, Args)]
struct DecayArgs {
    #[arg(long)]
    profile: PathBuf,
    /// Fit window "lo,hi".
    #[arg(long, default_value = "50,500")]
    window: String,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    /// Module names or criterion numbers, comma-separated.
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    #[arg(long)]
    quick: bool,
}

#[derive(Debug, Args)]
struct ScalesArgs {
    /// Saturation magnetization Ms, A/m.
    #[arg(long, default_value_t = 8.0e5)]
    ms: f64,
    /// Exchange constant A, J/m.
    #[arg(long, default_value_t = 1.3e-11)]
    exchange: f64,
    /// Anisotropy constant K, J/m³.
    #[arg(long, default_value_t = 5.0e2)]
    anisotropy: f64,
    /// Film thickness d, m.
    #[arg(long, default_value_t = 4.0e-9)]
    thickness: f64,
}

/// Failure of a command, mapped to an exit code.
enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Divergence { .. } | Error::Stability { .. } | Error::Window(_) | Error::SingularEndpoint { .. } => {
                Failure::Numerical(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = std::result::Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Relax(a) => cmd_relax(a),
        Command::Energy(a) => cmd_energy(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Decay(a) => cmd_decay(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Scales(a) => cmd_scales(a),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            EXIT_NUMERICAL
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn parse_window(text: &str) -> std::result::Result<[f64; 2], Failure> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| usage(format!("window must be \"lo,hi\", got {text:?}")))?;
    match nums.as_slice() {
        [lo, hi] => Ok([*lo, *hi]),
        _ => Err(usage(format!("window must be \"lo,hi\", got {text:?}"))),
    }
}

/// Config file first, then command-line overrides.
fn resolve_config(flags: &RunFlags, beta: Option<&str>, nu: Option<f64>) -> std::result::Result<RunConfig, Failure> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &flags.config {
        cfg.apply_file(path)?;
    }
    if let Some(b) = beta {
        cfg.beta = parse_angle(b)?;
    }
    macro_rules! set {
        ($field:ident, $value:expr) => {
            if let Some(v) = $value {
                cfg.$field = v;
            }
        };
    }
    set!(nu, nu);
    set!(dx0, flags.dx0);
    set!(stretch_b, flags.stretch);
    set!(x_max, flags.xmax);
    set!(h_max, flags.hmax);
    set!(tol, flags.tol);
    set!(max_steps, flags.max_steps);
    set!(out_prefix, flags.out.clone());
    if flags.dt.is_some() {
        cfg.dt = flags.dt;
    }
    Ok(cfg)
}

struct Prepared {
    params: ModelParams,
    spec: GridSpec,
    grid: Grid,
    relax: RelaxationConfig,
}

fn prepare(cfg: &RunConfig, beta: f64, nu: f64) -> std::result::Result<Prepared, Failure> {
    let params = ModelParams::new(beta, nu)?;
    let spec = GridSpec::Stretched {
        dx0: cfg.dx0,
        stretch_b: cfg.stretch_b,
        x_max: cfg.x_max,
        h_max: cfg.h_max,
    };
    let grid = spec.build()?;
    let dt = cfg.dt.unwrap_or_else(|| RelaxationConfig::default_dt(&grid, nu));
    let relax = RelaxationConfig::new(dt, cfg.tol, cfg.max_steps)?;
    Ok(Prepared {
        params,
        spec,
        grid,
        relax,
    })
}

fn try_fit(result: &RelaxationResult, window: [f64; 2]) -> (Option<DecayFits>, Option<String>) {
    match fit_decay(&result.profile, window) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    }
}

fn ensure_parent(path: &Path) -> std::result::Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))?;
    }
    Ok(())
}

/// Writes the CSV, grid and JSON artifacts; also returns the fit error, if any.
fn write_run(
    prep: &Prepared,
    result: &RelaxationResult,
    prefix: &str,
    window: [f64; 2],
) -> std::result::Result<(RunRecord, Option<String>), Failure> {
    let csv = PathBuf::from(format!("{prefix}.csv"));
    let grid_csv = PathBuf::from(format!("{prefix}.grid.csv"));
    let json = PathBuf::from(format!("{prefix}.json"));
    ensure_parent(&csv)?;
    io::write_profile_csv(&result.profile, &csv)?;
    prep.grid.write_csv(&grid_csv)?;
    let (decay, decay_error) = try_fit(result, window);
    let record = RunRecord {
        params: prep.params,
        grid: prep.spec,
        relaxation: prep.relax,
        result: ResultSummary::from(result),
        diagnostics: diagnostics(&result.profile),
        energy: result.energy,
        decay,
        artifacts: ArtifactPaths {
            profile_csv: Some(csv),
            grid_csv: Some(grid_csv),
            run_json: Some(json.clone()),
        },
    };
    io::write_run_json(&record, &json)?;
    Ok((record, decay_error))
}

fn cmd_relax(a: RelaxArgs) -> Outcome {
    let cfg = resolve_config(&a.run, a.beta.as_deref(), a.nu)?;
    let window = parse_window(&a.run.fit_window)?;
    let prep = prepare(&cfg, cfg.beta, cfg.nu)?;
    let init = initial_profile(cfg.beta, &prep.grid)?;
    let mut relax_cfg = prep.relax;
    relax_cfg.report_every = if a.quiet { 0 } else { a.report_every };
    let result = relax_with_progress(&prep.params, &prep.grid, &init, &relax_cfg, |p| {
        println!("step {:>8}  residual {:.6e}  energy {:.12e}", p.step, p.residual, p.energy);
    })?;
    let (record, _) = write_run(&prep, &result, &cfg.out_prefix, window)?;
    if !a.quiet {
        println!(
            "{} after {} steps: residual {:.3e}, energy {:.12e}, slope {:.6}, theta_inf {}",
            if result.converged { "converged" } else { "not converged" },
            result.steps_taken,
            result.final_residual,
            result.energy.total_renormalized,
            record.diagnostics.boundary_slope,
            record.diagnostics.theta_infinity
        );
        println!("wrote {prefix}.csv, {prefix}.grid.csv, {prefix}.json", prefix = cfg.out_prefix);
    }
    Ok(if result.converged { EXIT_OK } else { EXIT_NUMERICAL })
}

fn parse_list<T>(text: &str, what: &str, parse: impl Fn(&str) -> std::result::Result<T, Failure>) -> std::result::Result<Vec<T>, Failure> {
    let items: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(usage(format!("{what} is empty")));
    }
    items.into_iter().map(parse).collect()
}

fn workers() -> std::result::Result<Option<usize>, Failure> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(usage(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

fn cmd_sweep(a: SweepArgs) -> Outcome {
    let betas = parse_list(&a.beta_list, "--beta-list", |s| parse_angle(s).map_err(Failure::from))?;
    let nus = parse_list(&a.nu_list, "--nu-list", |s| {
        s.parse::<f64>().map_err(|_| usage(format!("bad nu value {s:?}")))
    })?;
    let mut cfg = resolve_config(&a.run, None, None)?;
    if a.run.out.is_none() && a.run.config.is_none() {
        cfg.out_prefix = "sweep".into();
    }
    let window = parse_window(&a.run.fit_window)?;
    // Validate the shared settings once so that usage errors exit early.
    prepare(&cfg, betas[0], nus[0])?;

    let pairs: Vec<(usize, usize)> = (0..betas.len()).flat_map(|i| (0..nus.len()).map(move |j| (i, j))).collect();
    let one = |&(i, j): &(usize, usize)| -> SweepEntry {
        let (beta, nu) = (betas[i], nus[j]);
        let prefix = format!("{}/b{i}_n{j}", cfg.out_prefix);
        let mut entry = SweepEntry {
            beta,
            nu,
            ok: false,
            error: None,
            converged: false,
            steps_taken: 0,
            energy_total: None,
            boundary_slope: None,
            diagnostics: None,
            decay: None,
            decay_error: None,
            profile_csv: None,
        };
        let attempt = || -> std::result::Result<(RunRecord, Option<String>), Failure> {
            let prep = prepare(&cfg, beta, nu)?;
            let init = initial_profile(beta, &prep.grid)?;
            let result = relax_with_progress(&prep.params, &prep.grid, &init, &prep.relax, |_| {})?;
            write_run(&prep, &result, &prefix, window)
        };
        match attempt() {
            Ok((rec, decay_error)) => {
                entry.ok = rec.result.converged;
                entry.converged = rec.result.converged;
                if !rec.result.converged {
                    entry.error = Some("not converged".into());
                }
                entry.steps_taken = rec.result.steps_taken;
                entry.energy_total = Some(rec.energy.total_renormalized);
                entry.boundary_slope = Some(rec.diagnostics.boundary_slope);
                entry.diagnostics = Some(rec.diagnostics);
                entry.decay = rec.decay;
                entry.decay_error = decay_error;
                entry.profile_csv = rec.artifacts.profile_csv;
            }
            Err(Failure::Usage(m)) | Err(Failure::Numerical(m)) => entry.error = Some(m),
        }
        entry
    };
    let results: Vec<SweepEntry> = match workers()? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| usage(e.to_string()))?
            .install(|| pairs.par_iter().map(one).collect()),
        None => pairs.par_iter().map(one).collect(),
    };
    let table = PathBuf::from(format!("{}/sweep.json", cfg.out_prefix));
    ensure_parent(&table)?;
    let failed = results.iter().filter(|e| !e.ok).count();
    for e in &results {
        match &e.error {
            None => println!(
                "beta {:.6} nu {}: converged, energy {:.10e}, slope {:.6}",
                e.beta,
                e.nu,
                e.energy_total.unwrap_or(f64::NAN),
                e.boundary_slope.unwrap_or(f64::NAN)
            ),
            Some(m) => println!("beta {:.6} nu {}: FAILED: {m}", e.beta, e.nu),
        }
    }
    io::write_sweep_json(&SweepRecord { results }, &table)?;
    println!("wrote {}", table.display());
    Ok(if failed == 0 { EXIT_OK } else { EXIT_NUMERICAL })
}

fn cmd_energy(a: EnergyArgs) -> Outcome {
    let p = io::read_profile_csv(&a.profile)?;
    let shape = match a.cutoff {
        CutoffArg::Quintic => CutoffShape::Quintic,
        CutoffArg::Cubic => CutoffShape::Cubic,
    };
    let e = renormalized_energy(&p, &Cutoff::with_shape(p.beta, shape), a.nu)?;
    println!("{}", serde_json::to_string_pretty(&e).map_err(|e| usage(e.to_string()))?);
    Ok(EXIT_OK)
}

fn cmd_decay(a: DecayArgs) -> Outcome {
    let p = io::read_profile_csv(&a.profile)?;
    let window = parse_window(&a.window)?;
    let fits = fit_decay(&p, window)?;
    let out = serde_json::json!({ "fits": fits, "diagnostics": diagnostics(&p) });
    println!("{}", serde_json::to_string_pretty(&out).map_err(|e| usage(e.to_string()))?);
    Ok(EXIT_OK)
}

fn cmd_validate(a: ValidateArgs) -> Outcome {
    let known = validation::modules();
    for s in &a.only {
        if s != "all" && !known.contains(&s.as_str()) && !matches!(s.parse::<u32>(), Ok(1..=11)) {
            return Err(usage(format!("unknown criterion or module {s:?}; modules: {}", known.join(", "))));
        }
    }
    let opts = ValidationOptions {
        quick: a.quick,
        only: a.only,
    };
    if opts.quick {
        println!("quick mode: coarser grids and looser tolerances where stated");
    }
    let reports = validation::run_with(&opts, |r| println!("{r}"));
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!("{} of {} criteria passed", reports.len() - failed, reports.len());
    Ok(if failed == 0 { EXIT_OK } else { EXIT_NUMERICAL })
}

fn cmd_scales(a: ScalesArgs) -> Outcome {
    let s = derive_scales(&MaterialParams {
        saturation_magnetization: a.ms,
        exchange_constant: a.exchange,
        anisotropy_constant: a.anisotropy,
        thickness: a.thickness,
    })?;
    println!("{}", serde_json::to_string_pretty(&s).map_err(|e| usage(e.to_string()))?);
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows_parse() {
        assert_eq!(parse_window("5, 20").ok(), Some([5.0, 20.0]));
        assert!(parse_window("5").is_err());
        assert!(parse_window("a,b").is_err());
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "beta = pi/2\nnu = 3\ndx0 = 0.25\n").unwrap();
        let flags = RunFlags {
            config: Some(path),
            dx0: Some(0.5),
            stretch: None,
            xmax: None,
            hmax: None,
            dt: None,
            tol: None,
            max_steps: None,
            out: None,
            fit_window: "50,500".into(),
        };
        let cfg = resolve_config(&flags, None, Some(7.0)).ok().unwrap();
        assert_eq!(cfg.beta, std::f64::consts::PI / 2.0);
        assert_eq!(cfg.nu, 7.0);
        assert_eq!(cfg.dx0, 0.5);
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["edgewall", "relax", "--beta", "nonsense"]), EXIT_USAGE);
        assert_eq!(run(["edgewall", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["edgewall", "sweep", "--beta-list", "", "--nu-list", "1"]), EXIT_USAGE);
        assert_eq!(run(["edgewall", "validate", "--only", "nope"]), EXIT_USAGE);
        assert_eq!(run(["edgewall", "scales", "--thickness", "-1"]), EXIT_USAGE);
    }
}
