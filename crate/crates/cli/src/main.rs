//! Command-line driver: detector spectra, detailed-balance fits, commutator
//! checks, wavefront scans, translation channels and short-distance
//! diagnostics, with reproducible config and plot-ready output.

mod config;
mod output;

use clap::{Parser, Subcommand};
use config::{ConfigError, RunConfig};
use nalgebra::DVector;
use output::{fmt, OutputDir};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::path::PathBuf;
use std::sync::Arc;
use wqft_core::ccr::{
    build_shift_lattice, gns_gram_check, translation_map_build, CcrError, QuasifreeState, WeylWord,
};
use wqft_core::jet::JetDistribution;
use wqft_core::kernel::{build_kernel, detector_response, kms_fit, short_distance_check, KernelError};
use wqft_core::modes::{commutator, detector_norm, k_map_auto};
use wqft_core::pauli_jordan::commutator_oracle;
use wqft_core::recursion::hadamard_recursion;
use wqft_core::wavefront::{direction_grid, scan_report_csv, wavefront_scan, ScanError};
use wqft_core::worldline::{InertialLine, Worldline};
use wqft_core::FourVector;

#[derive(Parser)]
#[command(name = "wqft", about = "worldline quantum field diagnostics", version)]
struct Cli {
    /// Path to a TOML (or JSON) run configuration
    #[arg(long, global = true)]
    config: Option<String>,
    /// Output directory for CSV/JSON artifacts
    #[arg(long, global = true, default_value = "wqft-out")]
    out: PathBuf,
    /// Override the config RNG seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Rayon worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print the fully resolved config that reproduces this run
    #[arg(long, global = true)]
    dump_config: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Detector response spectrum F(omega)
    Detector,
    /// Detailed-balance fit of ln(F(w)/F(-w))
    Kms,
    /// Field commutator: mode route against the spacetime kernel oracle
    Commutator,
    /// Directional growth scan of the distribution transform
    Wavefront,
    /// Build the translation channel over a shift lattice
    Translate,
    /// Short-distance kernel diagnostics and tail coefficients
    Hadamard,
    /// Angular spectrum of the one-particle vector
    Angular,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("validation failure: {0}")]
    Validation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 3,
            CliError::Validation(_) => 4,
        }
    }
}

impl From<KernelError> for CliError {
    fn from(e: KernelError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<wqft_core::modes::ModeError> for CliError {
    fn from(e: wqft_core::modes::ModeError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<ScanError> for CliError {
    fn from(e: ScanError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<CcrError> for CliError {
    fn from(e: CcrError) -> Self {
        match e {
            CcrError::NoiseValidationFailed { .. } => CliError::Validation(e.to_string()),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().ok();
    }
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| ConfigError::Invalid("--config PATH is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.dump_config {
        print!("{}", cfg.resolved_toml());
    }
    let mut out = OutputDir::new(&cli.out)?;
    match cli.command {
        Command::Detector => cmd_detector(&cfg, &mut out)?,
        Command::Kms => cmd_kms(&cfg, &mut out)?,
        Command::Commutator => cmd_commutator(&cfg, &mut out)?,
        Command::Wavefront => cmd_wavefront(&cfg, &mut out)?,
        Command::Translate => cmd_translate(&cfg, &mut out)?,
        Command::Hadamard => cmd_hadamard(&cfg, &mut out)?,
        Command::Angular => cmd_angular(&cfg, &mut out)?,
    }
    out.finish()?;
    Ok(())
}

#[derive(Serialize)]
struct DetectorSummary {
    backend: String,
    omega_count: usize,
    f_max: f64,
    f_min: f64,
    max_positive_over_negative: Option<f64>,
}

fn cmd_detector(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    if cfg.omega.values.is_empty() {
        return Err(ConfigError::Invalid("empty omega grid".into()).into());
    }
    let w = cfg.build_worldline()?;
    let window = cfg.build_window()?;
    let backend = build_kernel(&cfg.kernel.backend, cfg.mass)?;
    let sched = cfg.epsilon.schedule();
    let mut csv = String::from("omega,F\n");
    let mut values = Vec::new();
    for &om in &cfg.omega.values {
        let f = detector_response(&w, &window, om, backend.as_ref(), &sched)?;
        csv.push_str(&format!("{},{}\n", fmt(om), fmt(f)));
        values.push((om, f));
    }
    out.write("spectrum.csv", &csv)?;
    let ratio = {
        let pos = values.iter().filter(|(o, _)| *o > 0.0).map(|&(_, f)| f).fold(f64::NAN, f64::max);
        let neg = values.iter().filter(|(o, _)| *o < 0.0).map(|&(_, f)| f).fold(f64::NAN, f64::max);
        if pos.is_finite() && neg.is_finite() && neg > 0.0 {
            Some(pos / neg)
        } else {
            None
        }
    };
    out.write_json(
        "summary.json",
        &DetectorSummary {
            backend: cfg.kernel.backend.clone(),
            omega_count: values.len(),
            f_max: values.iter().map(|&(_, f)| f).fold(f64::NEG_INFINITY, f64::max),
            f_min: values.iter().map(|&(_, f)| f).fold(f64::INFINITY, f64::min),
            max_positive_over_negative: ratio,
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct KmsSummary {
    backend: String,
    beta: f64,
    stderr: f64,
    residual: f64,
    points_used: usize,
    dropped: Vec<f64>,
}

fn cmd_kms(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    if cfg.omega.values.is_empty() {
        return Err(ConfigError::Invalid("empty omega grid".into()).into());
    }
    let w = cfg.build_worldline()?;
    let window = cfg.build_window()?;
    let backend = build_kernel(&cfg.kernel.backend, cfg.mass)?;
    let sched = cfg.epsilon.schedule();
    let fit = kms_fit(&w, &window, &cfg.omega.values, backend.as_ref(), &sched)?;
    let mut csv = String::from("omega,F,F_ratio,ln_ratio\n");
    for &om in cfg.omega.values.iter().filter(|&&o| o > 0.0) {
        let fp = detector_response(&w, &window, om, backend.as_ref(), &sched)?;
        let fm = detector_response(&w, &window, -om, backend.as_ref(), &sched)?;
        let ratio = fp / fm;
        csv.push_str(&format!(
            "{},{},{},{}\n",
            fmt(om),
            fmt(fp),
            fmt(ratio),
            fmt(ratio.ln())
        ));
    }
    out.write("spectrum.csv", &csv)?;
    out.write_json(
        "summary.json",
        &KmsSummary {
            backend: cfg.kernel.backend.clone(),
            beta: fit.beta,
            stderr: fit.stderr,
            residual: fit.residual,
            points_used: fit.points_used,
            dropped: fit.dropped,
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct CommutatorSummary {
    mode_route: f64,
    oracle_route: f64,
    relative_error: Option<f64>,
    norms: f64,
    causally_connected: bool,
}

fn cmd_commutator(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let dists = cfg.build_distributions()?;
    if dists.len() < 2 {
        return Err(ConfigError::Invalid("commutator needs two [[distributions]]".into()).into());
    }
    // the second distribution rides a parallel static curve at the configured
    // spatial separation and time offset
    let offset = FourVector::new(cfg.commutator.time_offset, cfg.commutator.separation, 0.0, 0.0);
    let shifted_line = Worldline::new(Arc::new(InertialLine::at_rest_offset(offset)));
    let s_spec = &cfg.distributions[1];
    let s = JetDistribution::from_spec(s_spec, shifted_line)
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let t = dists[0].clone();
    let grid = cfg.build_grid()?;
    let mode_route = commutator(&t, &s, &grid)?;
    let oracle_route =
        commutator_oracle(&t, &s, cfg.mass).map_err(|e| CliError::Numeric(e.to_string()))?;
    let nt = detector_norm(&t, &grid)?.sqrt();
    let ns = detector_norm(&s, &grid)?.sqrt();
    let norms = nt * ns;
    let causally_connected = oracle_route.abs() > 1e-9 * norms;
    let relative_error = if causally_connected {
        Some((mode_route - oracle_route).abs() / oracle_route.abs())
    } else {
        None
    };
    out.write_json(
        "summary.json",
        &CommutatorSummary { mode_route, oracle_route, relative_error, norms, causally_connected },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct WavefrontSummary {
    directions: usize,
    singular: usize,
    regular: usize,
    noise_flagged: usize,
}

fn cmd_wavefront(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let dists = cfg.build_distributions()?;
    let target = dists
        .first()
        .ok_or_else(|| ConfigError::Invalid("wavefront needs one [[distributions]]".into()))?;
    let dirs = direction_grid(cfg.wavefront.spatial_directions, cfg.wavefront.mixed_directions);
    let samples = wavefront_scan(target, &dirs, &cfg.wavefront.scan())?;
    out.write("directions.csv", &scan_report_csv(&samples))?;
    let singular = samples
        .iter()
        .filter(|s| s.class == wqft_core::wavefront::Classification::Singular)
        .count();
    let noise = samples.iter().filter(|s| s.below_noise_floor).count();
    out.write_json(
        "summary.json",
        &WavefrontSummary {
            directions: samples.len(),
            singular,
            regular: samples.len() - singular,
            noise_flagged: noise,
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct TranslateSummary {
    rule: String,
    lattice_count: usize,
    step: f64,
    steps: i64,
    automorphism: bool,
    s_defect_norm: f64,
    mu: f64,
    dropped_generators: Vec<usize>,
    noise_min_eig: f64,
    composed_state_min_eig: f64,
    l_matrix: Vec<Vec<f64>>,
}

fn cmd_translate(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let dists = cfg.build_distributions()?;
    let template = dists
        .first()
        .ok_or_else(|| ConfigError::Invalid("translate needs a template distribution".into()))?;
    let grid = cfg.build_grid()?;
    let lat = build_shift_lattice(
        template,
        cfg.translate.count,
        cfg.translate.step,
        cfg.translate.rule,
        &grid,
    )?;
    let map = translation_map_build(&lat, cfg.translate.steps)?;
    let n = lat.family.rank();
    // seeded random word sets for the composed-state positivity report
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let state = QuasifreeState::vacuum(&lat.family);
    let composed = map.compose_state(&state);
    let mut min_eig = f64::INFINITY;
    for _ in 0..20 {
        let words: Vec<WeylWord> = (0..5)
            .map(|_| WeylWord::from_coeff(DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))))
            .collect();
        min_eig = min_eig.min(gns_gram_check(&composed, &lat.family.symplectic, &words)?);
    }
    let s_norm = map.s_defect.clone().svd(false, false).singular_values.max();
    out.write_json(
        "summary.json",
        &TranslateSummary {
            rule: format!("{:?}", cfg.translate.rule),
            lattice_count: cfg.translate.count,
            step: cfg.translate.step,
            steps: cfg.translate.steps,
            automorphism: map.automorphism,
            s_defect_norm: s_norm,
            mu: map.mu,
            dropped_generators: map.dropped.clone(),
            noise_min_eig: map.noise_min_eig,
            composed_state_min_eig: min_eig,
            l_matrix: (0..n).map(|i| (0..n).map(|j| map.l[(i, j)]).collect()).collect(),
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct HadamardSummary {
    backend: String,
    eps_drift: f64,
    leading_modulus_mean: f64,
    expected_leading: f64,
    log_fit: Option<wqft_core::kernel::LogFit>,
    tail_coefficients: Vec<f64>,
}

fn cmd_hadamard(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let w = cfg.build_worldline()?;
    let backend = build_kernel(&cfg.kernel.backend, cfg.mass)?;
    let grid: Vec<f64> = (0..10).map(|i| 0.05 + 0.015 * i as f64).collect();
    let sched = cfg.epsilon.schedule();
    let rep = short_distance_check(&w, cfg.mass, &grid, backend.as_ref(), &sched)?;
    let rec = hadamard_recursion(cfg.mass, 8).map_err(|e| CliError::Numeric(e.to_string()))?;
    let mut csv = String::from("dtau,modulus,re,im\n");
    for (i, &dt) in rep.dtau.iter().enumerate() {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            fmt(dt),
            fmt(rep.leading_modulus[i]),
            fmt(rep.leading[i].0),
            fmt(rep.leading[i].1)
        ));
    }
    out.write("short_distance.csv", &csv)?;
    let mean = rep.leading_modulus.iter().sum::<f64>() / rep.leading_modulus.len().max(1) as f64;
    out.write_json(
        "summary.json",
        &HadamardSummary {
            backend: cfg.kernel.backend.clone(),
            eps_drift: rep.eps_drift,
            leading_modulus_mean: mean,
            expected_leading: 1.0 / (4.0 * std::f64::consts::PI.powi(2)),
            log_fit: rep.log_fit,
            tail_coefficients: rec.v,
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct AngularSummary {
    order: usize,
    norm_squared: f64,
    per_degree: Vec<f64>,
}

fn cmd_angular(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let dists = cfg.build_distributions()?;
    let target = dists
        .first()
        .ok_or_else(|| ConfigError::Invalid("angular needs one [[distributions]]".into()))?;
    let grid = cfg.build_grid()?;
    let v = k_map_auto(target, &grid)?;
    let spectrum = v.angular_spectrum();
    let mut csv = String::from("l,norm2\n");
    for (l, s) in spectrum.iter().enumerate() {
        csv.push_str(&format!("{l},{}\n", fmt(*s)));
    }
    out.write("angular.csv", &csv)?;
    out.write("vector.csv", &v.to_csv())?;
    out.write_json(
        "summary.json",
        &AngularSummary {
            order: target.order(),
            norm_squared: v.norm_squared(),
            per_degree: spectrum,
        },
    )?;
    Ok(())
}
