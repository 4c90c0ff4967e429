//! Command-line front end: evaluates harvester models, runs the allocation
//! solvers, traces R-E regions, and reproduces the built-in experiment
//! recipes. Results land in CSV/JSON files plus self-contained SVG plots,
//! each embedding the resolved run configuration and the library version.

mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use wipt::allocate::{
    mimo_eigen_allocate, modified_waterfill, saturation_allocate, superposed_waveform_allocate,
    waterfill, SuperposedOptions,
};
use wipt::channel::{ChannelJson, ChannelRealization, FrequencyGrid};
use wipt::harvester::{
    fit_sigmoid, linear_dc_power, parse_measurements_csv, sigmoid_dc_power, zdc_from_rf_moments,
    DiodeNonlinearParams, HarvesterModel, LinearParams, SaturationParams,
};
use wipt::multiuser::{
    evaluate_grid_beam, gridsearch_frontier, GridResolution, MultiuserScenario, ScenarioJson,
};
use wipt::region::{
    pareto_hull, region_diode_nonlinear_multisubband, region_diode_nonlinear_single,
    region_linear_multisubband, region_linear_single, region_mimo_linear, region_saturation,
    EnergyUnits, ModelTag, REPoint, ReceiverArch, RERegion, Strategy,
};
use wipt::signal::{
    evaluate_zdc_timedomain, rf_moments_single_subband, InputDistribution,
    SuperposedWaveform, WaveformSpec,
};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(
    name = "wipt",
    version,
    about = "Rate-energy regions and transmit strategies for wireless information and power transfer"
)]
struct Cli {
    /// JSON config file; command-line flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Cap on worker threads for internal parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// RNG seed (falls back to the WIPT_SEED environment variable, then 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit saturation-model parameters to a measurement CSV.
    FitSigmoid(FitSigmoidArgs),
    /// Evaluate one harvester model at a given operating point.
    EvalHarvester(EvalHarvesterArgs),
    /// Trace a rate-energy region.
    ReRegion(ReRegionArgs),
    /// Run a power-allocation solver.
    Allocate(AllocateArgs),
    /// Time-domain z_dc of a waveform through a channel.
    WaveformZdc(WaveformZdcArgs),
    /// Exhaustive beam frontier for a multi-user scenario file.
    MultiuserFrontier(MultiuserFrontierArgs),
    /// Built-in reproduction recipes.
    Repro(ReproArgs),
}

/// Accepts watts (`0.5`, `0.5w`), milli/microwatts (`10mw`, `250uw`), or
/// dBm (`-20dbm`); everything is converted to watts on the spot.
fn parse_power(text: &str) -> Result<f64, String> {
    let t = text.trim().to_ascii_lowercase();
    let (num, scale) = if let Some(v) = t.strip_suffix("dbm") {
        let dbm: f64 = v.trim().parse().map_err(|e| format!("{e}"))?;
        return Ok(10f64.powf(dbm / 10.0) * 1e-3);
    } else if let Some(v) = t.strip_suffix("mw") {
        (v, 1e-3)
    } else if let Some(v) = t.strip_suffix("uw") {
        (v, 1e-6)
    } else if let Some(v) = t.strip_suffix('w') {
        (v, 1.0)
    } else {
        (t.as_str(), 1.0)
    };
    let value: f64 = num.trim().parse().map_err(|e| format!("{e}"))?;
    if !value.is_finite() || value < 0.0 {
        return Err("power must be a nonnegative finite number".into());
    }
    Ok(value * scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ModelArg {
    Linear,
    Diode,
    Saturation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ArchArg {
    Ideal,
    Ts,
    Ps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum SolverArg {
    Waterfill,
    ModifiedWf,
    Saturation,
    Mimo,
    Superposed,
}

#[derive(Args, Debug, Serialize, Deserialize, Default, Clone)]
#[serde(deny_unknown_fields, default)]
struct FitSigmoidArgs {
    /// Measurement CSV with header `p_rf_watt,p_dc_watt`.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output JSON path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize, Deserialize, Default, Clone)]
#[serde(deny_unknown_fields, default)]
struct HarvesterParamsArgs {
    /// RF-to-DC efficiency of the linear model.
    #[arg(long)]
    e3: Option<f64>,
    /// Second-order diode coefficient (also the linear z_dc slope).
    #[arg(long)]
    k2: Option<f64>,
    /// Fourth-order diode coefficient.
    #[arg(long)]
    k4: Option<f64>,
    /// Saturation-model steepness (1/W).
    #[arg(long)]
    sat_a: Option<f64>,
    /// Saturation-model turn-on point (W).
    #[arg(long, value_parser = parse_power, allow_hyphen_values = true)]
    sat_b: Option<f64>,
    /// Saturation-model ceiling (W).
    #[arg(long, value_parser = parse_power, allow_hyphen_values = true)]
    sat_p: Option<f64>,
}

impl HarvesterParamsArgs {
    fn merge(&mut self, file: &Self) {
        merge_opt(&mut self.e3, &file.e3);
        merge_opt(&mut self.k2, &file.k2);
        merge_opt(&mut self.k4, &file.k4);
        merge_opt(&mut self.sat_a, &file.sat_a);
        merge_opt(&mut self.sat_b, &file.sat_b);
        merge_opt(&mut self.sat_p, &file.sat_p);
    }

    fn saturation(&self) -> Result<SaturationParams, wipt::Error> {
        SaturationParams::new(
            self.sat_a.unwrap_or(5365.0),
            self.sat_b.unwrap_or(0.2308e-3),
            self.sat_p.unwrap_or(10.73e-3),
        )
    }

    fn diode(&self) -> Result<DiodeNonlinearParams, wipt::Error> {
        DiodeNonlinearParams::new(self.k2.unwrap_or(0.17), self.k4.unwrap_or(19.145))
    }
}

#[derive(Args, Debug, Serialize, Deserialize, Default, Clone)]
#[serde(deny_unknown_fields, default)]
struct EvalHarvesterArgs {
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    #[command(flatten)]
    #[serde(flatten)]
    params: HarvesterParamsArgs,
    /// Received RF power (W, mW, uW, or dBm).
    #[arg(long, value_parser = parse_power, allow_hyphen_values = true)]
    p_rf: Option<f64>,
    /// Second RF moment (diode model input).
    #[arg(long)]
    m2: Option<f64>,
    /// Fourth RF moment (diode model input).
    #[arg(long)]
    m4: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize, Deserialize, Default, Clone)]
#[serde(deny_unknown_fields, default)]
struct ChannelArgs {
    /// Single-subband channel power gain |h|^2.
    #[arg(long)]
    h2: Option<f64>,
    /// Comma-separated per-subband gains |h_n|^2 (flat phases).
    #[arg(long)]
    gains_sq: Option<String>,
    /// Channel realization JSON file (may be MIMO).
    #[arg(long)]
    channel: Option<PathBuf>,
}

impl ChannelArgs {
    fn merge(&mut self, file: &Self) {
        merge_opt(&mut self.h2, &file.h2);
        merge_opt(&mut self.gains_sq, &file.gains_sq);
        merge_opt(&mut self.channel, &file.channel);
    }

    /// Build a channel realization. Gains-only sources get a synthetic grid
    /// with 1 MHz spacing and the base carrier placed so waveform
    /// intermodulation terms stay clean.
    fn load(&self) -> Result<ChannelRealization, CliError> {
        if let Some(path) = &self.channel {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            let parsed: ChannelJson = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("malformed channel JSON: {e}")))?;
            return Ok(parsed.into_realization()?);
        }
        let gains: Vec<f64> = if let Some(text) = &self.gains_sq {
            text.split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::Usage(format!("bad --gains-sq: {e}")))?
        } else if let Some(h2) = self.h2 {
            vec![h2]
        } else {
            return Err(CliError::Usage(
                "provide a channel via --h2, --gains-sq, or --channel".into(),
            ));
        };
        let n = gains.len();
        let delta_f = 1e6;
        let grid = FrequencyGrid::new((2 * n.max(4)) as f64 * delta_f, delta_f, n, delta_f)?;
        let cplx: Vec<Complex64> = gains
            .iter()
            .map(|&g| Complex64::new(g.max(0.0).sqrt(), 0.0))
            .collect();
        Ok(ChannelRealization::from_siso_gains(&cplx, grid)?)
    }
}

#[derive(Args, Debug, Serialize, Deserialize, Default, Clone)]
#[serde(deny_unknown_fields, default)]
struct ReRegionArgs {
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    #[arg(long, value_enum)]
    arch: Option<ArchArg>,
    #[command(flatten)]
    #[serde(flatten)]
    channel: ChannelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    params: HarvesterParamsArgs,
    /// Transmit power budget (W, mW, uW, or dBm).
    #[arg(long, value_parser = parse_power, allow_hyphen_values = true)]
    power: Option<f64>,
    /// Total noise power (W, mW, uW, or dBm).
    #[arg(long, value_parser = parse_power, allow_hyphen_values = true)]
    noise: Option<f64>,
    /// Antenna-stage share of the PS noise split (defaults to the worst
    /// case of zero).
    #[arg(long)]
    ps_sigma_a_sq: Option<f64>,
    /// Flash amplitude-scale ceiling for the diode single-subband region.
    #[arg(long)]
    flash_l_max: Option<f64>,
    /// Boundary points per sweep.
    #[arg(long)]
    n_points: Option<usize>,
    /// Output prefix; writes <prefix>.json, <prefix>.csv, <prefix>.svg.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize, Deserialize, Default, Clone)]
#[serde(deny_unknown_fields, default)]
struct AllocateArgs {
    #[arg(long, value_enum)]
    solver: Option<SolverArg>,
    #[command(flatten)]
    #[serde(flatten)]
    channel: ChannelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    params: HarvesterParamsArgs,
    #[arg(long, value_parser = parse_power, allow_hyphen_values = true)]
    power: Option<f64>,
    #[arg(long, value_parser = parse_power, allow_hyphen_values = true)]
    noise: Option<f64>,
    /// Energy floor for the constrained solvers (z_dc units for
    /// modified-wf/mimo, DC watts for saturation).
    #[arg(long)]
    e_target: Option<f64>,
    /// Rate floor for the superposed-waveform solver (bits/s/Hz).
    #[arg(long)]
    rate_floor: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize, Deserialize, Default, Clone)]
#[serde(deny_unknown_fields, default)]
struct WaveformZdcArgs {
    /// Superposed waveform JSON (`{subbands: [...], budget}`).
    #[arg(long)]
    waveform: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    channel: ChannelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    params: HarvesterParamsArgs,
    /// Monte Carlo symbol draws.
    #[arg(long)]
    mc_runs: Option<usize>,
    /// Samples per waveform period (0 = automatic).
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize, Deserialize, Default, Clone)]
#[serde(deny_unknown_fields, default)]
struct MultiuserFrontierArgs {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    n_theta: Option<usize>,
    #[arg(long)]
    n_phi: Option<usize>,
    #[arg(long)]
    n_power: Option<usize>,
    /// Output prefix; writes <prefix>.json, <prefix>.csv, <prefix>.svg.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Recipe {
    Fig7,
    Fig9Shape,
    Fig13Ordering,
    SatMismatch,
}

#[derive(Args, Debug, Serialize, Deserialize, Default, Clone)]
#[serde(deny_unknown_fields, default)]
struct ReproArgs {
    #[arg(value_enum)]
    recipe: Option<Recipe>,
    /// Directory for the recipe outputs.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

/// Runtime failures map to exit code 1, usage problems (bad flags, malformed
/// config files) to exit code 2.
#[derive(Debug)]
enum CliError {
    Runtime(String),
    Usage(String),
}

impl From<wipt::Error> for CliError {
    fn from(e: wipt::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn merge_opt<T: Clone>(cli: &mut Option<T>, file: &Option<T>) {
    if cli.is_none() {
        *cli = file.clone();
    }
}

/// Overlay file config under CLI flags (flags win) by round-tripping the
/// args struct through JSON.
fn overlay_config<T: Serialize + for<'de> Deserialize<'de> + Clone>(
    args: &T,
    config_path: Option<&Path>,
    merge: impl Fn(&mut T, &T),
) -> Result<T, CliError> {
    let mut resolved = args.clone();
    if let Some(path) = config_path {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let file: T = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("malformed config: {e}")))?;
        merge(&mut resolved, &file);
    }
    Ok(resolved)
}

fn resolved_json<T: Serialize>(command: &str, cfg: &T) -> serde_json::Value {
    json!({ "command": command, "params": cfg })
}

fn write_json(
    out: Option<&Path>,
    command: &str,
    config: &serde_json::Value,
    result: serde_json::Value,
) -> Result<(), CliError> {
    let doc = json!({
        "version": VERSION,
        "command": command,
        "config": config,
        "result": result,
    });
    let text = serde_json::to_string_pretty(&doc).expect("serializable") + "\n";
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn csv_with_meta(config: &serde_json::Value, body: &str) -> String {
    format!("# version: {VERSION}\n# config: {config}\n{body}")
}

fn region_files(
    prefix: &Path,
    command: &str,
    config: &serde_json::Value,
    labeled: &[(&str, &RERegion)],
    title: &str,
) -> Result<(), CliError> {
    let json_path = prefix.with_extension("json");
    let csv_path = prefix.with_extension("csv");
    let svg_path = prefix.with_extension("svg");
    let result = json!({
        "regions": labeled
            .iter()
            .map(|(label, r)| json!({ "label": label, "region": r }))
            .collect::<Vec<_>>(),
    });
    write_json(Some(&json_path), command, config, result)?;
    // Single regions use the plain `rate,energy,param` layout; overlays
    // need a label column to stay unambiguous.
    let body = if labeled.len() == 1 {
        labeled[0].1.to_csv()
    } else {
        let mut body = String::from("label,rate,energy,param\n");
        for (label, region) in labeled {
            for p in &region.boundary {
                body.push_str(&format!(
                    "{label},{:.12e},{:.12e},{:.12e}\n",
                    p.rate, p.energy, p.param
                ));
            }
        }
        body
    };
    write_text(&csv_path, &csv_with_meta(config, &body))?;
    let svg = svg::plot_regions(labeled, title, false, &format!("wipt {VERSION} config {config}"))?;
    write_text(&svg_path, &svg)?;
    Ok(())
}

fn arch_from(arch: ArchArg, noise: f64, sigma_a_sq: Option<f64>) -> ReceiverArch {
    match arch {
        ArchArg::Ideal => ReceiverArch::Ideal,
        ArchArg::Ts => ReceiverArch::TimeSwitching,
        ArchArg::Ps => {
            let a = sigma_a_sq.unwrap_or(0.0);
            ReceiverArch::PowerSplitting {
                sigma_a_sq: a,
                sigma_p_sq: noise - a,
            }
        }
    }
}

fn run_fit_sigmoid(args: FitSigmoidArgs, config_path: Option<&Path>) -> Result<(), CliError> {
    let cfg = overlay_config(&args, config_path, |c, f| {
        merge_opt(&mut c.input, &f.input);
        merge_opt(&mut c.out, &f.out);
    })?;
    let input = cfg
        .input
        .clone()
        .ok_or_else(|| CliError::Usage("--input is required".into()))?;
    let text = fs::read_to_string(&input)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", input.display())))?;
    let points = parse_measurements_csv(&text)?;
    let fit = fit_sigmoid(&points)?;
    let config = resolved_json("fit-sigmoid", &cfg);
    write_json(
        cfg.out.as_deref(),
        "fit-sigmoid",
        &config,
        json!({
            "a": fit.params.a,
            "b": fit.params.b,
            "p_sat": fit.params.p_sat,
            "residual": fit.residual,
        }),
    )
}

fn run_eval_harvester(args: EvalHarvesterArgs, config_path: Option<&Path>) -> Result<(), CliError> {
    let cfg = overlay_config(&args, config_path, |c, f| {
        merge_opt(&mut c.model, &f.model);
        c.params.merge(&f.params);
        merge_opt(&mut c.p_rf, &f.p_rf);
        merge_opt(&mut c.m2, &f.m2);
        merge_opt(&mut c.m4, &f.m4);
        merge_opt(&mut c.out, &f.out);
    })?;
    let model = cfg
        .model
        .ok_or_else(|| CliError::Usage("--model is required".into()))?;
    let result = match model {
        ModelArg::Linear => {
            let p = LinearParams::new(cfg.params.k2.unwrap_or(1.0), cfg.params.e3.unwrap_or(0.5))?;
            let p_rf = cfg
                .p_rf
                .ok_or_else(|| CliError::Usage("--p-rf is required".into()))?;
            json!({ "p_dc": linear_dc_power(p_rf, &p)? })
        }
        ModelArg::Diode => {
            let p = cfg.params.diode()?;
            let (m2, m4) = match (cfg.m2, cfg.m4, cfg.p_rf) {
                (Some(m2), Some(m4), _) => (m2, m4),
                // CSCG convention for a bare received power.
                (None, None, Some(p_rf)) => (p_rf, 3.0 * p_rf * p_rf),
                _ => {
                    return Err(CliError::Usage(
                        "diode model needs --m2 and --m4, or --p-rf alone".into(),
                    ))
                }
            };
            json!({ "z_dc": zdc_from_rf_moments(m2, m4, &p)?, "m2": m2, "m4": m4 })
        }
        ModelArg::Saturation => {
            let p = cfg.params.saturation()?;
            let p_rf = cfg
                .p_rf
                .ok_or_else(|| CliError::Usage("--p-rf is required".into()))?;
            json!({ "p_dc": sigmoid_dc_power(p_rf, &p)? })
        }
    };
    let config = resolved_json("eval-harvester", &cfg);
    write_json(cfg.out.as_deref(), "eval-harvester", &config, result)
}

fn run_re_region(args: ReRegionArgs, config_path: Option<&Path>) -> Result<(), CliError> {
    let cfg = overlay_config(&args, config_path, |c, f| {
        merge_opt(&mut c.model, &f.model);
        merge_opt(&mut c.arch, &f.arch);
        c.channel.merge(&f.channel);
        c.params.merge(&f.params);
        merge_opt(&mut c.power, &f.power);
        merge_opt(&mut c.noise, &f.noise);
        merge_opt(&mut c.ps_sigma_a_sq, &f.ps_sigma_a_sq);
        merge_opt(&mut c.flash_l_max, &f.flash_l_max);
        merge_opt(&mut c.n_points, &f.n_points);
        merge_opt(&mut c.out, &f.out);
    })?;
    let model = cfg
        .model
        .ok_or_else(|| CliError::Usage("--model is required".into()))?;
    let arch_arg = cfg.arch.unwrap_or(ArchArg::Ideal);
    let power = cfg.power.unwrap_or(1.0);
    let noise = cfg.noise.unwrap_or(1.0);
    let n_points = cfg.n_points.unwrap_or(64);
    let arch = arch_from(arch_arg, noise, cfg.ps_sigma_a_sq);
    let channel = cfg.channel.load()?;
    let k2 = cfg.params.k2.unwrap_or(0.5);

    if (channel.m_t() > 1 || channel.m_r() > 1) && channel.n_subbands() > 1 {
        return Err(CliError::Usage(
            "multi-subband MIMO channels are not supported; use a single subband or SISO".into(),
        ));
    }
    let region = match model {
        ModelArg::Linear => {
            if channel.m_t() > 1 || channel.m_r() > 1 {
                region_mimo_linear(&channel.subbands[0], power, noise, k2, arch, n_points)?
            } else if channel.n_subbands() == 1 {
                let g = channel.siso_gains_sq()?[0];
                region_linear_single(g, power, noise, k2, arch, n_points)?
            } else {
                region_linear_multisubband(&channel, power, noise, k2, arch, n_points)?
            }
        }
        ModelArg::Diode => {
            let harvester = cfg.params.diode()?;
            if channel.n_subbands() == 1 && channel.m_t() == 1 && channel.m_r() == 1 {
                let g = channel.siso_gains_sq()?[0];
                region_diode_nonlinear_single(
                    g,
                    power,
                    noise,
                    &harvester,
                    cfg.flash_l_max.unwrap_or(10.0),
                    n_points,
                )?
            } else {
                region_diode_nonlinear_multisubband(
                    &channel,
                    power,
                    noise,
                    &harvester,
                    arch,
                    n_points,
                    &SuperposedOptions::default(),
                )?
            }
        }
        ModelArg::Saturation => {
            let params = cfg.params.saturation()?;
            region_saturation(&channel, power, noise, &params, arch, n_points)?
        }
    };

    let config = resolved_json("re-region", &cfg);
    match &cfg.out {
        Some(prefix) => region_files(
            prefix,
            "re-region",
            &config,
            &[("region", &region)],
            "R-E region",
        ),
        None => write_json(None, "re-region", &config, json!({ "region": region })),
    }
}

fn run_allocate(args: AllocateArgs, config_path: Option<&Path>) -> Result<(), CliError> {
    let cfg = overlay_config(&args, config_path, |c, f| {
        merge_opt(&mut c.solver, &f.solver);
        c.channel.merge(&f.channel);
        c.params.merge(&f.params);
        merge_opt(&mut c.power, &f.power);
        merge_opt(&mut c.noise, &f.noise);
        merge_opt(&mut c.e_target, &f.e_target);
        merge_opt(&mut c.rate_floor, &f.rate_floor);
        merge_opt(&mut c.out, &f.out);
    })?;
    let solver = cfg
        .solver
        .ok_or_else(|| CliError::Usage("--solver is required".into()))?;
    let power = cfg.power.unwrap_or(1.0);
    let noise = cfg.noise.unwrap_or(1.0);
    let channel = cfg.channel.load()?;
    let result = match solver {
        SolverArg::Waterfill => {
            let gains = channel.siso_gains_sq()?;
            let alloc = waterfill(&gains, noise, power)?;
            json!({ "allocation": alloc, "rate": alloc.rate(&gains, noise) })
        }
        SolverArg::ModifiedWf => {
            let gains = channel.siso_gains_sq()?;
            let k2 = cfg.params.k2.unwrap_or(1.0);
            let alloc =
                modified_waterfill(&gains, noise, power, cfg.e_target.unwrap_or(0.0), k2)?;
            json!({
                "allocation": alloc,
                "rate": alloc.rate(&gains, noise),
                "energy": k2 * alloc.received_power(&gains),
            })
        }
        SolverArg::Saturation => {
            let gains = channel.siso_gains_sq()?;
            let params = cfg.params.saturation()?;
            let alloc =
                saturation_allocate(&gains, noise, power, cfg.e_target.unwrap_or(0.0), &params)?;
            json!({
                "allocation": alloc,
                "rate": alloc.rate(&gains, noise),
                "dc_power": sigmoid_dc_power(alloc.received_power(&gains), &params)?,
            })
        }
        SolverArg::Mimo => {
            let design = mimo_eigen_allocate(
                &channel.subbands[0],
                noise,
                power,
                cfg.e_target.unwrap_or(0.0),
                cfg.params.k2.unwrap_or(1.0),
            )?;
            json!({
                "eigen_gains": design.eigen_gains,
                "allocation": design.allocation,
                "rate": design.rate,
            })
        }
        SolverArg::Superposed => {
            let harvester = cfg.params.diode()?;
            let sol = superposed_waveform_allocate(
                &channel,
                power,
                cfg.rate_floor.unwrap_or(0.0),
                &harvester,
                noise,
                &SuperposedOptions::default(),
            )?;
            json!({ "waveform": sol.waveform, "rate": sol.rate, "z_dc": sol.z_dc })
        }
    };
    let config = resolved_json("allocate", &cfg);
    write_json(cfg.out.as_deref(), "allocate", &config, result)
}

fn run_waveform_zdc(
    args: WaveformZdcArgs,
    config_path: Option<&Path>,
    seed: u64,
) -> Result<(), CliError> {
    let cfg = overlay_config(&args, config_path, |c, f| {
        merge_opt(&mut c.waveform, &f.waveform);
        c.channel.merge(&f.channel);
        c.params.merge(&f.params);
        merge_opt(&mut c.mc_runs, &f.mc_runs);
        merge_opt(&mut c.samples, &f.samples);
        merge_opt(&mut c.out, &f.out);
    })?;
    let path = cfg
        .waveform
        .clone()
        .ok_or_else(|| CliError::Usage("--waveform is required".into()))?;
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let waveform: SuperposedWaveform = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("malformed waveform JSON: {e}")))?;
    let channel = cfg.channel.load()?;
    let harvester = cfg.params.diode()?;
    let estimate = evaluate_zdc_timedomain(
        &WaveformSpec::Superposed(waveform),
        &channel,
        &harvester,
        cfg.mc_runs.unwrap_or(1024),
        cfg.samples.unwrap_or(0),
        seed,
    )?;
    let config = resolved_json("waveform-zdc", &cfg);
    write_json(
        cfg.out.as_deref(),
        "waveform-zdc",
        &config,
        json!({ "estimate": estimate, "seed": seed }),
    )
}

fn run_multiuser_frontier(
    args: MultiuserFrontierArgs,
    config_path: Option<&Path>,
) -> Result<(), CliError> {
    let cfg = overlay_config(&args, config_path, |c, f| {
        merge_opt(&mut c.scenario, &f.scenario);
        merge_opt(&mut c.n_theta, &f.n_theta);
        merge_opt(&mut c.n_phi, &f.n_phi);
        merge_opt(&mut c.n_power, &f.n_power);
        merge_opt(&mut c.out, &f.out);
    })?;
    let path = cfg
        .scenario
        .clone()
        .ok_or_else(|| CliError::Usage("--scenario is required".into()))?;
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let parsed: ScenarioJson = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("malformed scenario JSON: {e}")))?;
    let scenario = parsed.into_scenario()?;
    let default = GridResolution::default();
    let resolution = GridResolution {
        n_theta: cfg.n_theta.unwrap_or(default.n_theta),
        n_phi: cfg.n_phi.unwrap_or(default.n_phi),
        n_power: cfg.n_power.unwrap_or(default.n_power),
    };
    let region = gridsearch_frontier(&scenario, &resolution)?;
    let config = resolved_json("multiuser-frontier", &cfg);
    match &cfg.out {
        Some(prefix) => region_files(
            prefix,
            "multiuser-frontier",
            &config,
            &[("frontier", &region)],
            "Multi-user beam frontier",
        ),
        None => write_json(None, "multiuser-frontier", &config, json!({ "region": region })),
    }
}

// --- reproduction recipes ---

fn repro_fig7(dir: &Path, config: &serde_json::Value) -> Result<(), CliError> {
    let (g, p, s, k2, n) = (12.0, 10.0, 3.0, 0.5, 64);
    let ideal = region_linear_single(g, p, s, k2, ReceiverArch::Ideal, n)?;
    let ts = region_linear_single(g, p, s, k2, ReceiverArch::TimeSwitching, n)?;
    let ps = region_linear_single(g, p, s, k2, ReceiverArch::worst_case_ps(s), n)?;
    region_files(
        &dir.join("fig7"),
        "repro",
        config,
        &[("ideal", &ideal), ("PS", &ps), ("TS", &ts)],
        "Linear model: receiver architectures",
    )
}

fn repro_fig9_shape(dir: &Path, config: &serde_json::Value) -> Result<(), CliError> {
    let harvester = DiodeNonlinearParams::new(0.17, 19.145)?;
    let region = region_diode_nonlinear_single(1.0, 1.0, 1e-4, &harvester, 10.0, 64)?;
    let linear_strategy = region_linear_single(1.0, 1.0, 1e-4, harvester.k2, ReceiverArch::Ideal, 4)?;
    // The linear-model strategy (CSCG) evaluated under the diode model is
    // the fixed corner the nonlinear families must dominate.
    let cscg_corner = REPoint {
        rate: linear_strategy.hull[0].rate,
        energy: harvester.k2 + harvester.k4 * 1.5 * 2.0,
        param: 0.0,
        strategy: Strategy::IdealCorner,
    };
    let corner_region = RERegion {
        model: ModelTag::DiodeNonlinear,
        arch: ReceiverArch::Ideal,
        energy_units: EnergyUnits::ZdcProxy,
        boundary: vec![cscg_corner.clone()],
        hull: vec![cscg_corner],
    };
    region_files(
        &dir.join("fig9-shape"),
        "repro",
        config,
        &[("optimal inputs", &region), ("CSCG corner", &corner_region)],
        "Diode nonlinear model: single-subband inputs",
    )
}

fn repro_fig13_ordering(dir: &Path, config: &serde_json::Value, seed: u64) -> Result<(), CliError> {
    let harvester = DiodeNonlinearParams::new(0.17, 19.145)?;
    let grid = FrequencyGrid::new(8e6, 1e6, 1, 1e6)?;
    let channel =
        ChannelRealization::from_siso_gains(&[Complex64::new(1.0, 0.0)], grid)?;
    let dists = [
        ("cw", InputDistribution::Cw { power: 1.0 }),
        ("cscg", InputDistribution::Cscg { power: 1.0 }),
        ("real_gaussian", InputDistribution::RealGaussian { power: 1.0 }),
    ];
    let mut rows = String::from("dist,zdc_analytic,zdc_mc,zdc_mc_stderr\n");
    let mut results = Vec::new();
    for (name, dist) in &dists {
        let (m2, m4) = rf_moments_single_subband(dist, 1.0)?;
        let analytic = zdc_from_rf_moments(m2, m4, &harvester)?;
        let est = evaluate_zdc_timedomain(
            &WaveformSpec::PerSubband(vec![dist.clone()]),
            &channel,
            &harvester,
            20_000,
            0,
            seed,
        )?;
        rows.push_str(&format!(
            "{name},{analytic:.12e},{:.12e},{:.12e}\n",
            est.z_dc, est.z_dc_stderr
        ));
        results.push(json!({
            "dist": name,
            "zdc_analytic": analytic,
            "zdc_mc": est.z_dc,
            "zdc_mc_stderr": est.z_dc_stderr,
        }));
    }
    write_text(&dir.join("fig13-ordering.csv"), &csv_with_meta(config, &rows))?;
    write_json(
        Some(&dir.join("fig13-ordering.json")),
        "repro",
        config,
        json!({ "ordering": results }),
    )
}

/// Deterministic five-ER, one-IR scenario with a spread of channel
/// strengths and saturation ceilings, so a linear-model design saturates
/// the strong receivers while under-serving the rest.
fn mismatch_scenario() -> Result<MultiuserScenario, wipt::Error> {
    let c = Complex64::new;
    let sat = |a, b, p| Ok::<_, wipt::Error>(HarvesterModel::Saturation(SaturationParams::new(a, b, p)?));
    let scenario = MultiuserScenario {
        ir_channels: vec![vec![c(1.0, 0.0), c(0.3, 0.4)]],
        er_channels: vec![
            vec![c(1.3, 0.0), c(0.2, -0.1)],
            vec![c(0.1, 0.2), c(0.9, 0.0)],
            vec![c(0.5, -0.4), c(0.3, 0.3)],
            vec![c(-0.2, 0.6), c(0.4, -0.5)],
            vec![c(0.7, 0.1), c(-0.6, 0.2)],
        ],
        budget: 1.0,
        noise_sq: 0.1,
        sinr_targets: vec![0.0],
        er_harvesters: vec![
            sat(120.0, 0.03, 0.04)?, // strong channel, low ceiling
            sat(12.0, 0.25, 0.5)?,
            sat(20.0, 0.15, 0.3)?,
            sat(15.0, 0.2, 0.35)?,
            sat(25.0, 0.1, 0.25)?,
        ],
    };
    scenario.validate()?;
    Ok(scenario)
}

fn repro_sat_mismatch(dir: &Path, config: &serde_json::Value) -> Result<(), CliError> {
    let sigmoid_sc = mismatch_scenario()?;
    let mut linear_sc = sigmoid_sc.clone();
    linear_sc.er_harvesters =
        vec![HarvesterModel::Linear(LinearParams::new(1.0, 1.0)?); linear_sc.er_channels.len()];

    let resolution = GridResolution::default();
    let aware = gridsearch_frontier(&sigmoid_sc, &resolution)?;
    let linear_frontier = gridsearch_frontier(&linear_sc, &resolution)?;

    // Re-evaluate the linear-optimal beams under the true sigmoids.
    let mismatch_points: Vec<REPoint> = linear_frontier
        .hull
        .iter()
        .filter_map(|p| {
            if let Strategy::Beamformer { theta, phi, power } = p.strategy {
                evaluate_grid_beam(&sigmoid_sc, theta, phi, power)
                    .ok()
                    .map(|(rate, dc)| REPoint {
                        rate,
                        energy: dc,
                        param: theta,
                        strategy: p.strategy.clone(),
                    })
            } else {
                None
            }
        })
        .collect();
    let mismatch = RERegion {
        model: ModelTag::Saturation,
        arch: ReceiverArch::Ideal,
        energy_units: EnergyUnits::Watts,
        hull: pareto_hull(&mismatch_points),
        boundary: mismatch_points,
    };
    region_files(
        &dir.join("sat-mismatch"),
        "repro",
        config,
        &[("saturation-aware", &aware), ("linear design", &mismatch)],
        "Saturation-model mismatch",
    )
}

fn run_repro(args: ReproArgs, config_path: Option<&Path>, seed: u64) -> Result<(), CliError> {
    let cfg = overlay_config(&args, config_path, |c, f| {
        merge_opt(&mut c.recipe, &f.recipe);
        merge_opt(&mut c.out_dir, &f.out_dir);
    })?;
    let recipe = cfg
        .recipe
        .ok_or_else(|| CliError::Usage("a recipe name is required".into()))?;
    let dir = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    let config = resolved_json("repro", &cfg);
    match recipe {
        Recipe::Fig7 => repro_fig7(&dir, &config),
        Recipe::Fig9Shape => repro_fig9_shape(&dir, &config),
        Recipe::Fig13Ordering => repro_fig13_ordering(&dir, &config, seed),
        Recipe::SatMismatch => repro_sat_mismatch(&dir, &config),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot configure {n} threads: {e}")))?;
    }
    let seed = cli
        .seed
        .or_else(|| std::env::var("WIPT_SEED").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(0);
    let config_path = cli.config.as_deref();
    match cli.command {
        Command::FitSigmoid(args) => run_fit_sigmoid(args, config_path),
        Command::EvalHarvester(args) => run_eval_harvester(args, config_path),
        Command::ReRegion(args) => run_re_region(args, config_path),
        Command::Allocate(args) => run_allocate(args, config_path),
        Command::WaveformZdc(args) => run_waveform_zdc(args, config_path, seed),
        Command::MultiuserFrontier(args) => run_multiuser_frontier(args, config_path),
        Command::Repro(args) => run_repro(args, config_path, seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_parser_units() {
        assert_eq!(parse_power("0.5").unwrap(), 0.5);
        assert_eq!(parse_power("2w").unwrap(), 2.0);
        assert!((parse_power("10mW").unwrap() - 0.01).abs() < 1e-15);
        assert!((parse_power("250uw").unwrap() - 250e-6).abs() < 1e-18);
        assert!((parse_power("-20dBm").unwrap() - 1e-5).abs() < 1e-12);
        assert!((parse_power("0dbm").unwrap() - 1e-3).abs() < 1e-15);
        assert!(parse_power("-1").is_err());
        assert!(parse_power("watts").is_err());
    }
}
