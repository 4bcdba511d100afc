//! Front end of the `qfs` binary: argument parsing, experiment runners and
//! output emission.
//!
//! Every run writes its CSVs, optional SVG plots and a `run.json` manifest
//! holding the fully resolved configuration. Feeding that manifest back via
//! `--config run.json` reproduces the CSVs byte for byte.

pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field_model::{cep_averaged_trace, heterodyne_trace, peak_amplitude};
use crate::gabor_analysis::{default_windows, intrapulse_sweep};
use crate::ghost_mc::scaling_sweep;
use crate::photon_stats::DistributionKind;
use crate::rng::{child_stream, Stage};
use crate::trace_sim::{
    detection_comparison, simulate_scan, spectrum, spectrum_of, TestLaw, TraceKind,
};

pub use config::{Command, Overrides, RunConfig};
use output::{csv_table, line_plot, num, scaling_rows, xy_rows, Artifact, Series};

/// Spectral peaks are searched above this frequency (PHz) to skip the DC term.
pub const PEAK_SEARCH_MIN_PHZ: f64 = 0.1;

#[derive(Debug, Parser)]
#[command(
    name = "qfs",
    version,
    about = "Photon-statistics simulator for field-resolved weak-light detection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Mean/σ scaling curves versus test mean photon number.
    Scaling(CommandArgs),
    /// Stochastic delay scan plus spectra of its mean and σ traces.
    Trace(CommandArgs),
    /// Spectrum of a previously written scan.csv.
    Spectrum(CommandArgs),
    /// Windowed intrapulse analysis over a pulse-energy sweep.
    Intrapulse(CommandArgs),
    /// Field detection versus direct intensity detection.
    Compare(CommandArgs),
    /// CEP-locked versus CEP-averaged noiseless traces.
    CepCheck(CommandArgs),
}

#[derive(Debug, clap::Args)]
pub struct CommandArgs {
    /// TOML config file, or a run.json manifest from an earlier run.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub flags: Overrides,
}

impl CliCommand {
    pub fn split(&self) -> (Command, &CommandArgs) {
        match self {
            CliCommand::Scaling(a) => (Command::Scaling, a),
            CliCommand::Trace(a) => (Command::Trace, a),
            CliCommand::Spectrum(a) => (Command::Spectrum, a),
            CliCommand::Intrapulse(a) => (Command::Intrapulse, a),
            CliCommand::Compare(a) => (Command::Compare, a),
            CliCommand::CepCheck(a) => (Command::CepCheck, a),
        }
    }
}

/// Output of one experiment, not yet written.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub artifacts: Vec<Artifact>,
    /// Human-readable result lines printed to stdout.
    pub summary: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: Command,
    seed: u64,
    config: &'a RunConfig,
    files: Vec<&'a str>,
}

/// Process exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } => 2,
        Error::Numeric(_) | Error::Estimation(_) => 3,
        Error::Io { .. } => 1,
    }
}

/// Sizes rayon's global pool from `QFS_THREADS` (unset or 0 = automatic).
pub fn configure_threads(value: Option<&str>) -> Result<()> {
    let threads = match value.map(str::trim) {
        None | Some("") => 0,
        Some(v) => v.parse::<usize>().map_err(|_| {
            Error::config("QFS_THREADS", format!("expected a thread count, got `{v}`"))
        })?,
    };
    if threads > 0 {
        // Fails only if a pool was already built, in which case it is kept.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    Ok(())
}

/// Resolves configuration for a parsed command line.
pub fn resolve_args(command: Command, args: &CommandArgs) -> Result<RunConfig> {
    let file = args
        .config
        .as_deref()
        .map(Overrides::from_file)
        .transpose()?;
    config::resolve(command, file.as_ref(), &args.flags)
}

/// Runs an experiment and writes its outputs plus `run.json`. Returns the summary lines.
pub fn run(command: Command, config: &RunConfig) -> Result<Vec<String>> {
    let mut out = execute(command, config)?;
    let manifest = Manifest {
        tool: "qfs",
        version: env!("CARGO_PKG_VERSION"),
        command,
        seed: config.seed,
        config,
        files: out.artifacts.iter().map(|a| a.name.as_str()).collect(),
    };
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    out.artifacts.push(Artifact {
        name: "run.json".into(),
        contents: json,
    });
    let dir = Path::new(&config.output_dir);
    output::write_all(dir, &out.artifacts)?;
    let mut summary = out.summary;
    summary.push(format!(
        "wrote {} files to {}",
        out.artifacts.len(),
        dir.display()
    ));
    Ok(summary)
}

/// Runs an experiment in memory.
pub fn execute(command: Command, config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let mut out = match command {
        Command::Scaling => run_scaling(config),
        Command::Trace => run_trace(config),
        Command::Spectrum => run_spectrum(config),
        Command::Intrapulse => run_intrapulse(config),
        Command::Compare => run_compare(config),
        Command::CepCheck => run_cep_check(config),
    }?;
    if !config.emit_plots {
        out.artifacts.retain(|a| !a.name.ends_with(".svg"));
    }
    Ok(out)
}

fn effective_fraction(kind: DistributionKind, coherent_fraction: f64) -> f64 {
    match kind {
        DistributionKind::Poisson => 1.0,
        DistributionKind::BoseEinstein => 0.0,
        DistributionKind::Mixture => coherent_fraction,
    }
}

fn run_scaling(c: &RunConfig) -> Result<RunOutput> {
    let grid = c.grid.resolve()?;
    let mut rows = Vec::new();
    let mut curves = Vec::new();
    let mut summary = Vec::new();
    for kind in c.kinds()? {
        let curve = scaling_sweep(&c.mc_config(kind)?, &grid)?;
        let a = effective_fraction(kind, c.coherent_fraction);
        rows.extend(scaling_rows(&curve, kind.as_str(), a, c.shots, c.seed));
        summary.push(format!(
            "{kind}: norm_std maximum at <n> = {}, norm_mean at <n> = {} is {:.4}",
            curve.norm_std_argmax(),
            curve.nearest(1.0).mean_photons,
            curve.nearest(1.0).norm_mean
        ));
        curves.push((kind, curve));
    }
    let mut artifacts = vec![csv_table("scaling.csv", &output::SCALING_HEADER, &rows)?];
    let xs: Vec<Vec<f64>> = curves.iter().map(|(_, cv)| cv.mean_photons()).collect();
    let means: Vec<Vec<f64>> = curves
        .iter()
        .map(|(_, cv)| cv.points.iter().map(|p| p.norm_mean).collect())
        .collect();
    let stds: Vec<Vec<f64>> = curves.iter().map(|(_, cv)| cv.norm_std()).collect();
    let labels: Vec<&str> = curves.iter().map(|(k, _)| k.as_str()).collect();
    let series = |ys| output::series(&labels, &xs, ys);
    artifacts.push(line_plot(
        "scaling_norm_mean.svg",
        "Normalized mean signal",
        "<n>",
        "norm_mean",
        &series(&means),
        true,
    ));
    artifacts.push(line_plot(
        "scaling_norm_std.svg",
        "Normalized standard deviation",
        "<n>",
        "norm_std",
        &series(&stds),
        true,
    ));
    Ok(RunOutput { artifacts, summary })
}

fn spectrum_artifacts(name: &str, spec: &crate::trace_sim::Spectrum) -> Result<Artifact> {
    csv_table(
        name,
        &output::SPECTRUM_HEADER,
        &xy_rows(&spec.freqs, &[&spec.magnitude]),
    )
}

fn peak_line(label: &str, spec: &crate::trace_sim::Spectrum) -> String {
    match spec.peak_frequency(PEAK_SEARCH_MIN_PHZ) {
        Some(f) => format!("{label} spectrum peak at {f:.4} PHz"),
        None => format!("{label} spectrum has no bins above {PEAK_SEARCH_MIN_PHZ} PHz"),
    }
}

fn run_trace(c: &RunConfig) -> Result<RunOutput> {
    c.single_kind()?;
    let scenario = c.scenario()?;
    let delays = c.delays()?;
    let scan = simulate_scan(&scenario, &delays)?;
    let sm = spectrum(&scan, TraceKind::Mean, c.smoothing)?;
    let ss = spectrum(&scan, TraceKind::Std, c.smoothing)?;
    let artifacts = vec![
        csv_table(
            "scan.csv",
            &output::SCAN_HEADER,
            &xy_rows(&scan.delays, &[&scan.mean_signal, &scan.std_signal]),
        )?,
        spectrum_artifacts("spectrum_mean.csv", &sm)?,
        spectrum_artifacts("spectrum_std.csv", &ss)?,
        line_plot(
            "scan.svg",
            "Delay scan",
            "delay (fs)",
            "signal",
            &[
                Series {
                    label: "mean",
                    x: &scan.delays,
                    y: &scan.mean_signal,
                },
                Series {
                    label: "std",
                    x: &scan.delays,
                    y: &scan.std_signal,
                },
            ],
            false,
        ),
        line_plot(
            "spectrum.svg",
            "Spectra",
            "frequency (PHz)",
            "magnitude",
            &[
                Series {
                    label: "mean",
                    x: &sm.freqs,
                    y: &sm.magnitude,
                },
                Series {
                    label: "std",
                    x: &ss.freqs,
                    y: &ss.magnitude,
                },
            ],
            false,
        ),
    ];
    let summary = vec![
        format!("scan digest {}", scan.config_digest),
        peak_line("mean", &sm),
        peak_line("std", &ss),
    ];
    Ok(RunOutput { artifacts, summary })
}

fn run_spectrum(c: &RunConfig) -> Result<RunOutput> {
    let input = c
        .input
        .as_deref()
        .ok_or_else(|| Error::config("input", "the spectrum command needs an input scan.csv"))?;
    let (delays, mean, std) = output::read_scan(Path::new(input))?;
    let values = match c.which {
        TraceKind::Mean => &mean,
        TraceKind::Std => &std,
    };
    let spec = spectrum_of(&delays, values, c.smoothing)?;
    let label = match c.which {
        TraceKind::Mean => "mean",
        TraceKind::Std => "std",
    };
    Ok(RunOutput {
        artifacts: vec![
            spectrum_artifacts("spectrum.csv", &spec)?,
            line_plot(
                "spectrum.svg",
                "Spectrum",
                "frequency (PHz)",
                "magnitude",
                &[Series {
                    label,
                    x: &spec.freqs,
                    y: &spec.magnitude,
                }],
                false,
            ),
        ],
        summary: vec![peak_line(label, &spec)],
    })
}

fn run_intrapulse(c: &RunConfig) -> Result<RunOutput> {
    let mut scenario = c.scenario()?;
    scenario.test_law = TestLaw::Profile(c.profile());
    let delays = c.delays()?;
    let energies: Vec<f64> = c.energies_zj.iter().map(|e| e * 1e-21).collect();
    let windows = default_windows(c.fwhm_fs);
    let curves = intrapulse_sweep(&scenario, &energies, &windows, &delays)?;
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for wc in &curves {
        for p in &wc.curve.points {
            rows.push(vec![
                wc.window.label.clone(),
                num(wc.window.center),
                num(p.mean_photons),
                num(p.norm_mean),
                num(p.norm_std),
                wc.a_hat.map(num).unwrap_or_default(),
            ]);
        }
        let a = wc.a_hat.map_or("n/a".to_string(), |a| format!("{a:.2}"));
        let p = wc
            .curve
            .peak_to_anchor()
            .map_or("n/a".to_string(), |r| format!("{r:.4}"));
        summary.push(format!(
            "{} window: A_hat {a}, peak-to-anchor {p}",
            wc.window.label
        ));
    }
    let xs: Vec<Vec<f64>> = curves.iter().map(|w| w.curve.mean_photons()).collect();
    let ys: Vec<Vec<f64>> = curves.iter().map(|w| w.curve.norm_std()).collect();
    let labels: Vec<&str> = curves.iter().map(|w| w.window.label.as_str()).collect();
    let series = output::series(&labels, &xs, &ys);
    Ok(RunOutput {
        artifacts: vec![
            csv_table("gabor.csv", &output::GABOR_HEADER, &rows)?,
            line_plot(
                "gabor_norm_std.svg",
                "Windowed normalized standard deviation",
                "<n>",
                "norm_std",
                &series,
                true,
            ),
        ],
        summary,
    })
}

fn run_compare(c: &RunConfig) -> Result<RunOutput> {
    let kind = c.single_kind()?;
    let cmp = detection_comparison(
        &c.test_template(kind)?,
        &c.sampling()?,
        &c.grid.resolve()?,
        c.shots,
        c.seed,
    )?;
    let a = effective_fraction(kind, c.coherent_fraction);
    let field_rows = scaling_rows(&cmp.field, kind.as_str(), a, c.shots, c.seed);
    let intensity_rows = scaling_rows(&cmp.intensity, kind.as_str(), a, c.shots, c.seed);
    let x = cmp.field.mean_photons();
    let fm: Vec<f64> = cmp.field.points.iter().map(|p| p.norm_mean).collect();
    let im: Vec<f64> = cmp.intensity.points.iter().map(|p| p.norm_mean).collect();
    let summary = vec![format!(
        "norm_mean at <n> = {}: field {:.4}, intensity {:.4}",
        cmp.field.nearest(1.0).mean_photons,
        cmp.field.nearest(1.0).norm_mean,
        cmp.intensity.nearest(1.0).norm_mean
    )];
    Ok(RunOutput {
        artifacts: vec![
            csv_table("scaling_field.csv", &output::SCALING_HEADER, &field_rows)?,
            csv_table(
                "scaling_intensity.csv",
                &output::SCALING_HEADER,
                &intensity_rows,
            )?,
            line_plot(
                "compare_norm_mean.svg",
                "Field versus intensity detection",
                "<n>",
                "norm_mean",
                &[
                    Series {
                        label: "field",
                        x: &x,
                        y: &fm,
                    },
                    Series {
                        label: "intensity",
                        x: &x,
                        y: &im,
                    },
                ],
                true,
            ),
        ],
        summary,
    })
}

fn run_cep_check(c: &RunConfig) -> Result<RunOutput> {
    let (test, sampling, det) = (c.test_pulse(), c.sampling_pulse(), c.detection());
    let delays = c.delays()?;
    let locked = heterodyne_trace(&test, &sampling, &det, &delays);
    let mut rng = child_stream(c.seed, 0, Stage::CepDraws);
    let averaged = cep_averaged_trace(&test, &sampling, &det, &delays, c.cep_draws, &mut rng)?;
    let ratio = peak_amplitude(&averaged) / peak_amplitude(&locked);
    let summary = vec![format!(
        "m = {}, n = {}: CEP-averaged peak / locked peak = {}",
        c.lo_order,
        c.mix_order,
        num(ratio)
    )];
    Ok(RunOutput {
        artifacts: vec![
            csv_table(
                "cep.csv",
                &output::CEP_HEADER,
                &xy_rows(&delays, &[&locked, &averaged]),
            )?,
            line_plot(
                "cep.svg",
                "CEP-locked versus CEP-averaged trace",
                "delay (fs)",
                "signal",
                &[
                    Series {
                        label: "locked",
                        x: &delays,
                        y: &locked,
                    },
                    Series {
                        label: "averaged",
                        x: &delays,
                        y: &averaged,
                    },
                ],
                false,
            ),
        ],
        summary,
    })
}
