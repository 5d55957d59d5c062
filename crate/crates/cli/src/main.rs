//! `vortex-scatter`: fringe maps, the Coulomb asymmetry, parameter scans,
//! event generation and reconstruction for two colliding Bessel electrons.
//!
//! Exit status: 0 success, 1 configuration or usage error, 2 numerical
//! failure (including a failed `validate`), 3 I/O error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use vortex_scatter::config::{Resolved, RunConfig, MAX_SEED};
use vortex_scatter::montecarlo::{rate_estimate, rate_with_crossings, reconstruct, sample_events};
use vortex_scatter::observables::{asymmetry_aperp, fringe_map, AperpRegion, Asymmetry};
use vortex_scatter::output::{
    fringe_facts, map_csv, radial_csv, read_events, scan_csv, write_events, write_fringe_csv,
    write_meta, write_text, Facts, ScanRow,
};
use vortex_scatter::validate::{run as run_validation, ValidateOptions};
use vortex_scatter::vortex::TestHook;
use vortex_scatter::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "vortex-scatter",
    version,
    about = "Two-path interference in vortex-electron scattering"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// TOML run configuration (a `.meta` sidecar also works).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// RNG seed, 0 to 2^63-1.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(..=MAX_SEED))]
    seed: Option<u64>,
    /// Worker threads; changes speed only, never results.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    model: Option<ModelArg>,
    /// Coulomb-phase coupling.
    #[arg(long, global = true)]
    alpha: Option<f64>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum ModelArg {
    BornUr,
    CoulombUr,
    BornExact,
    CoulombExact,
}

impl ModelArg {
    fn tag(self) -> &'static str {
        match self {
            ModelArg::BornUr => "born-ur",
            ModelArg::CoulombUr => "coulomb-ur",
            ModelArg::BornExact => "born-exact",
            ModelArg::CoulombExact => "coulomb-exact",
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cross-section density on a Kx, Ky grid (CSV plus .meta).
    FringeMap,
    /// A_perp by quadrature, as key=value lines.
    Asymmetry,
    /// A_perp over the [scan] parameter range (CSV).
    Scan,
    /// Coincidence events as newline-delimited JSON.
    Generate {
        /// Number of events (overrides mc.events).
        #[arg(long)]
        n_events: Option<usize>,
    },
    /// Histograms and A_perp from an event file.
    Reconstruct {
        /// Event file (overrides reconstruct.input).
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Run the self-check suite.
    Validate {
        /// Points for the brute-force integral check.
        #[arg(long, default_value_t = 3)]
        oracle_points: usize,
        #[arg(long, hide = true, value_enum)]
        inject_fault: Option<Fault>,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Fault {
    CorruptPhase,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: Cli) -> Result<u8> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.common.threads {
        if n == 0 {
            return Err(Error::config("threads", "must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::config("threads", e.to_string()))?;
    pool.install(|| dispatch(&cli))
}

fn load_config(common: &Common) -> Result<RunConfig> {
    let mut config = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(m) = common.model {
        config.set_model(m.tag(), None);
    }
    if let Some(a) = common.alpha {
        config.model.alpha = Some(a);
    }
    if let Some(seed) = common.seed {
        config.mc.seed = seed;
    }
    if let Some(out) = &common.out {
        config.output.path = Some(out.clone());
    }
    Ok(config)
}

fn out_path(config: &RunConfig, default: &str) -> PathBuf {
    config
        .output
        .path
        .clone()
        .unwrap_or_else(|| PathBuf::from(default))
}

fn dispatch(cli: &Cli) -> Result<u8> {
    if let Command::Validate {
        oracle_points,
        inject_fault,
    } = cli.command
    {
        return validate(oracle_points, inject_fault);
    }
    let mut config = load_config(&cli.common)?;
    match &cli.command {
        Command::FringeMap => cmd_fringe_map(&config),
        Command::Asymmetry => cmd_asymmetry(&config),
        Command::Scan => cmd_scan(&config),
        Command::Generate { n_events } => {
            if let Some(n) = n_events {
                config.mc.events = *n;
            }
            cmd_generate(&config)
        }
        Command::Reconstruct { input } => {
            if let Some(p) = input {
                config.reconstruct.input = Some(p.clone());
            }
            cmd_reconstruct(&config)
        }
        Command::Validate { .. } => unreachable!("handled above"),
    }
}

fn cmd_fringe_map(config: &RunConfig) -> Result<u8> {
    let r = config.resolve()?;
    let map = fringe_map(&r.beams, r.k1p, r.grid, r.model, &r.smearing)?;
    let path = out_path(config, "fringe_map.csv");
    write_fringe_csv(&path, &map)?;
    let facts = fringe_facts(&map);
    write_meta(&path, "fringe-map", &facts, config)?;
    let summary = facts
        .with("output", path.display().to_string())
        .with("max_dsigma", map.max())
        .with("sin_weighted_sum", map.sin_weighted_sum());
    print!("{}", summary.render());
    if let Some(w) = &map.coverage_warning {
        eprintln!("warning: {w}");
    }
    Ok(0)
}

fn parameter_facts(r: &Resolved) -> Facts {
    let (s1, s2) = r.smearing.sigma;
    Facts::new()
        .with("model", r.model.tag())
        .with("alpha", r.model.phase_alpha().unwrap_or(0.0))
        .with("energy1_kev", r.beams.first.energy())
        .with("kz1_kev", r.beams.first.kz())
        .with("kappa1_kev", r.beams.first.kappa())
        .with("kappa2_kev", r.beams.second.kappa())
        .with("sigma1_kev", s1)
        .with("sigma2_kev", s2)
        .with("two_m1", i64::from(r.beams.first.two_m()))
        .with("two_m2", i64::from(r.beams.second.two_m()))
        .with("k1p_kev", r.k1p.modulus())
        .with("k1p_phi_rad", r.k1p.signed_azimuth())
        .with("smearing_nodes", r.smearing.nodes.len() as i64)
        .with("edge_softening", r.smearing.edge_softening)
}

fn asymmetry_of(r: &Resolved) -> Result<Asymmetry> {
    asymmetry_aperp(&r.beams, r.region, r.model, &r.smearing, r.quadrature)
}

fn cmd_asymmetry(config: &RunConfig) -> Result<u8> {
    let r = config.resolve()?;
    let a = asymmetry_of(&r)?;
    let region = match r.region {
        AperpRegion::Fixed(_) => "fixed".to_string(),
        AperpRegion::Ring { n_phi, .. } => format!("ring:{n_phi}"),
    };
    let facts = Facts::new()
        .with("A_perp", a.value)
        .with("error", a.error)
        .with("numerator", a.numerator)
        .with("denominator", a.denominator)
        .with("region", region)
        .with("n_radial", r.quadrature.n_radial as i64)
        .with("n_azimuthal", r.quadrature.n_azimuthal as i64)
        .with("refine", r.quadrature.refine)
        .with("evaluations", a.evaluations as i64);
    let mut all = facts;
    for (k, v) in parameter_facts(&r).entries() {
        all.push(k, v.clone());
    }
    let text = all.render();
    print!("{text}");
    if let Some(path) = &config.output.path {
        write_text(path, &text)?;
        write_meta(path, "asymmetry", &all, config)?;
    }
    Ok(0)
}

fn cmd_scan(config: &RunConfig) -> Result<u8> {
    let scan = config
        .scan
        .clone()
        .ok_or_else(|| Error::config("scan", "a [scan] table is required"))?;
    let values = scan.values()?;
    config.resolve()?;
    let mut rows = Vec::with_capacity(values.len());
    for v in values {
        let point = config.with_parameter(&scan.parameter, v)?;
        let r = point.resolve()?;
        let a = asymmetry_of(&r)?;
        eprintln!(
            "{}={v} A_perp={:e} error={:e}",
            scan.parameter, a.value, a.error
        );
        rows.push(ScanRow {
            value: v,
            aperp: a.value,
            error: a.error,
        });
    }
    let path = out_path(config, "scan.csv");
    write_text(&path, &scan_csv(&scan.parameter, &rows))?;
    let facts = Facts::new()
        .with("parameter", scan.parameter.clone())
        .with("points", rows.len() as i64);
    write_meta(&path, "scan", &facts, config)?;
    print!(
        "{}",
        facts.with("output", path.display().to_string()).render()
    );
    Ok(0)
}

fn cmd_generate(config: &RunConfig) -> Result<u8> {
    let r = config.resolve()?;
    let sample = sample_events(&r.beams, r.k1p_spec, r.model, &r.smearing, r.events, r.seed)?;
    let path = out_path(config, "events.ndjson");
    write_events(&path, &sample.events)?;
    let rate = match config.rate.crossings_per_second {
        Some(c) => rate_with_crossings(config.rate.probability, c)?,
        None => rate_estimate(config.rate.probability, config.rate.current_na)?,
    };
    let facts = Facts::new()
        .with("events", sample.report.events as i64)
        .with("proposals", sample.report.proposals as i64)
        .with("acceptance_rate", sample.report.acceptance_rate)
        .with("max_envelope_ratio", sample.report.max_envelope_ratio)
        .with("seed", r.seed as i64)
        .with("model", r.model.to_string())
        .with("rate_events_per_second", rate.events_per_second)
        .with("rate_crossings_per_second", rate.crossings_per_second)
        .with(
            "seconds_for_sample",
            sample.report.events as f64 / rate.events_per_second,
        );
    write_meta(&path, "generate", &facts, config)?;
    print!(
        "{}",
        facts.with("output", path.display().to_string()).render()
    );
    Ok(0)
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn cmd_reconstruct(config: &RunConfig) -> Result<u8> {
    let r = config.resolve()?;
    let input =
        config.reconstruct.input.clone().ok_or_else(|| {
            Error::config("reconstruct.input", "an event file is required (--input)")
        })?;
    let events = read_events(&input)?;
    let rec = reconstruct(&events, &r.binning)?;
    let path = out_path(config, "reconstruct_radial.csv");
    let map_path = sibling(&path, "_map.csv");
    write_text(
        &path,
        &radial_csv(&rec, r.binning.radial_range.0, r.binning.radial_width()),
    )?;
    write_text(&map_path, &map_csv(&rec, &r.binning.map))?;
    let mut facts = Facts::new()
        .with("input", input.display().to_string())
        .with("events", rec.events as i64)
        .with("unassigned", rec.unassigned as i64)
        .with("A_perp", rec.aperp)
        .with("error", rec.aperp_error);
    for (i, s) in rec.slices.iter().enumerate() {
        facts.push(
            &format!("slice{i}_range_kev"),
            format!("{}..{}", s.range.0, s.range.1),
        );
        facts.push(&format!("slice{i}_events"), s.events as i64);
        facts.push(&format!("slice{i}_empty"), s.empty);
        facts.push(&format!("slice{i}_A_perp"), s.aperp);
        facts.push(&format!("slice{i}_error"), s.aperp_error);
        let minima: Vec<String> = s.minima.iter().map(|m| format!("{m}")).collect();
        facts.push(&format!("slice{i}_minima_kev"), minima.join(";"));
    }
    write_meta(&path, "reconstruct", &facts, config)?;
    print!(
        "{}",
        facts
            .with("radial_output", path.display().to_string())
            .with("map_output", map_path.display().to_string())
            .render()
    );
    Ok(0)
}

fn validate(oracle_points: usize, fault: Option<Fault>) -> Result<u8> {
    let opts = ValidateOptions {
        oracle_points: oracle_points.max(1),
        hook: fault.map(|Fault::CorruptPhase| TestHook::CorruptPathPhase),
        ..ValidateOptions::default()
    };
    let report = run_validation(&opts)?;
    print!("{}", report.render());
    Ok(if report.passed() { 0 } else { 2 })
}
