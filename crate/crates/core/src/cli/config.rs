//! Run configuration: flat typed keys resolved from defaults, a preset, an
//! optional config file and command-line flags (later layers win).

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::field_model::{delay_grid, DetectionSpec, PulseSpec};
use crate::gabor_analysis::{CoherenceProfile, ProfileMode};
use crate::ghost_mc::{McConfig, DEFAULT_SAMPLING_MEAN, DEFAULT_SHOTS};
use crate::photon_stats::{
    DistributionKind, PhotonDistribution, REFERENCE_MEAN_PHOTONS, SPEED_OF_LIGHT,
};
use crate::trace_sim::{ScanScenario, TestLaw, TraceKind, DEFAULT_CLASSICAL_NOISE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Scaling,
    Trace,
    Spectrum,
    Intrapulse,
    Compare,
    CepCheck,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Scaling => "scaling",
            Command::Trace => "trace",
            Command::Spectrum => "spectrum",
            Command::Intrapulse => "intrapulse",
            Command::Compare => "compare",
            Command::CepCheck => "cep-check",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Mean-photon grid: the reference energy table or explicit values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Named(String),
    Values(Vec<f64>),
}

pub const REFERENCE_GRID: &str = "paper-table";

impl GridSpec {
    pub fn resolve(&self) -> Result<Vec<f64>> {
        match self {
            GridSpec::Named(name) if name == REFERENCE_GRID => Ok(REFERENCE_MEAN_PHOTONS.to_vec()),
            GridSpec::Named(name) => Err(Error::config(
                "grid",
                format!("unknown grid `{name}` (expected {REFERENCE_GRID} or a list of values)"),
            )),
            GridSpec::Values(v) if v.is_empty() => Err(Error::config("grid", "grid is empty")),
            GridSpec::Values(v) => Ok(v.clone()),
        }
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
            return Ok(GridSpec::Named(s.to_string()));
        }
        s.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(GridSpec::Values)
    }
}

/// Fully resolved configuration, echoed into `run.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub seed: u64,
    pub output_dir: String,
    pub emit_plots: bool,
    /// One distribution kind, or a comma-separated list for `scaling`.
    pub kind: String,
    pub coherent_fraction: f64,
    pub grid: GridSpec,
    pub shots: u64,
    pub sampling_mean: f64,
    pub wavelength_nm: f64,
    pub fwhm_fs: f64,
    pub test_field: f64,
    pub sampling_field: f64,
    pub test_cep: f64,
    pub sampling_cep: f64,
    pub cep_stable: bool,
    pub lo_order: u32,
    pub mix_order: u32,
    /// Defaults to the test carrier frequency.
    pub detection_freq_phz: Option<f64>,
    pub classical_noise: f64,
    pub noise_floor: f64,
    pub shots_per_point: u64,
    pub peak_mean_photons: f64,
    pub delay_min_fs: f64,
    pub delay_max_fs: f64,
    pub delay_step_fs: f64,
    pub smoothing: usize,
    pub profile_mode: ProfileMode,
    pub profile_a0: f64,
    pub profile_c: f64,
    pub energies_zj: Vec<f64>,
    pub cep_draws: u64,
    /// Scan CSV read by `spectrum`.
    pub input: Option<String>,
    pub which: TraceKind,
}

/// 4·2^k zJ, k = 0..12.
fn default_energies() -> Vec<f64> {
    (0..13).map(|k| 4.0 * 2f64.powi(k)).collect()
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            preset: None,
            seed: 42,
            output_dir: "qfs-out".into(),
            emit_plots: true,
            kind: "poisson".into(),
            coherent_fraction: 0.5,
            grid: GridSpec::Named(REFERENCE_GRID.into()),
            shots: DEFAULT_SHOTS,
            sampling_mean: DEFAULT_SAMPLING_MEAN,
            wavelength_nm: 1030.0,
            fwhm_fs: 150.0,
            test_field: 1.0,
            sampling_field: 1.0,
            test_cep: 0.0,
            sampling_cep: 0.0,
            cep_stable: false,
            lo_order: 2,
            mix_order: 2,
            detection_freq_phz: None,
            classical_noise: DEFAULT_CLASSICAL_NOISE,
            noise_floor: 0.0,
            shots_per_point: DEFAULT_SHOTS,
            peak_mean_photons: 1.0,
            delay_min_fs: -300.0,
            delay_max_fs: 300.0,
            delay_step_fs: 0.5,
            smoothing: 0,
            profile_mode: ProfileMode::Constant,
            profile_a0: 1.0,
            profile_c: 0.0,
            energies_zj: default_energies(),
            cep_draws: 1000,
            input: None,
            which: TraceKind::Mean,
        }
    }
}

/// One configuration layer: every key optional. Used for config files and
/// (through clap) for command-line flags, so both accept the same keys.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, clap::Args)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// Figure preset: fig3, fig4, figS3, figS4 (alias yoctojoule), fig1-cep.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub emit_plots: Option<bool>,
    /// poisson, bose-einstein or mixture; `scaling` accepts a comma-separated list.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coherent_fraction: Option<f64>,
    /// `paper-table` or comma-separated mean photon numbers.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampling_mean: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wavelength_nm: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fwhm_fs: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_field: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampling_field: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_cep: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampling_cep: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cep_stable: Option<bool>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lo_order: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mix_order: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detection_freq_phz: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classical_noise: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_floor: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots_per_point: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub peak_mean_photons: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delay_min_fs: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delay_max_fs: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delay_step_fs: Option<f64>,
    /// Moving-average width (points) applied to spectra; 0 disables.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smoothing: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile_mode: Option<ProfileMode>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile_a0: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile_c: Option<f64>,
    /// Comma-separated pulse energies in zJ.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energies_zj: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cep_draws: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub which: Option<TraceKind>,
}

impl Overrides {
    /// Reads a TOML config file, or the `config` object of a `run.json` manifest.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        if path.extension().is_some_and(|e| e == "json") {
            let mut manifest: Value = serde_json::from_str(&text)
                .map_err(|e| Error::config("config", format!("{}: {e}", path.display())))?;
            let config = manifest
                .get_mut("config")
                .map(Value::take)
                .ok_or_else(|| Error::config("config", "manifest has no `config` object"))?;
            return serde_json::from_value(config)
                .map_err(|e| Error::config(key_of(&e.to_string()), e.to_string()));
        }
        toml::from_str(&text).map_err(|e| {
            let msg = e.message().trim().to_string();
            let key = match e.span() {
                Some(span) if key_of(&msg) == "config" => line_key(&text, span.start),
                _ => key_of(&msg),
            };
            Error::config(key, format!("{}: {msg}", path.display()))
        })
    }

    fn to_map(&self) -> Map<String, Value> {
        match serde_json::to_value(self).expect("overrides serialize") {
            Value::Object(m) => m,
            _ => unreachable!(),
        }
    }
}

/// Key on the TOML line containing byte offset `at`.
fn line_key(text: &str, at: usize) -> String {
    let start = text[..at.min(text.len())].rfind('\n').map_or(0, |i| i + 1);
    text[start..]
        .lines()
        .next()
        .and_then(|l| l.split_once('='))
        .map(|(k, _)| k.trim().to_string())
        .filter(|k| !k.is_empty())
        .unwrap_or_else(|| "config".into())
}

/// Best-effort extraction of the offending key from a serde message.
fn key_of(message: &str) -> String {
    let quoted = |s: &str| s.split('`').nth(1).map(str::to_string);
    if let Some(rest) = message.split("unknown field").nth(1) {
        if let Some(k) = quoted(rest) {
            return k;
        }
    }
    if let Some(rest) = message.split("for key").nth(1) {
        if let Some(k) = quoted(rest) {
            return k;
        }
    }
    "config".into()
}

/// Preset layer for a figure, checked against the running command.
pub fn preset(name: &str, command: Command) -> Result<Overrides> {
    let (target, layer) = match name {
        "fig3" => (
            Command::Scaling,
            Overrides {
                kind: Some("poisson,bose-einstein,mixture".into()),
                coherent_fraction: Some(0.5),
                grid: Some(GridSpec::Named(REFERENCE_GRID.into())),
                shots: Some(DEFAULT_SHOTS),
                ..Default::default()
            },
        ),
        "fig4" => (
            Command::Intrapulse,
            Overrides {
                profile_mode: Some(ProfileMode::IntensityLinked),
                profile_a0: Some(1.0),
                profile_c: Some(0.5),
                classical_noise: Some(0.0),
                shots_per_point: Some(2000),
                delay_step_fs: Some(1.0),
                energies_zj: Some(default_energies()),
                ..Default::default()
            },
        ),
        "figS3" | "figs3" => {
            let mut grid = REFERENCE_MEAN_PHOTONS.to_vec();
            grid.extend([5000.0, 10000.0]);
            (
                Command::Compare,
                Overrides {
                    kind: Some("poisson".into()),
                    grid: Some(GridSpec::Values(grid)),
                    shots: Some(DEFAULT_SHOTS),
                    ..Default::default()
                },
            )
        }
        "figS4" | "figs4" | "yoctojoule" => (
            Command::Trace,
            Overrides {
                kind: Some("poisson".into()),
                peak_mean_photons: Some(0.0045),
                classical_noise: Some(DEFAULT_CLASSICAL_NOISE),
                noise_floor: Some(0.0),
                shots_per_point: Some(DEFAULT_SHOTS),
                delay_min_fs: Some(-300.0),
                delay_max_fs: Some(300.0),
                delay_step_fs: Some(0.5),
                ..Default::default()
            },
        ),
        "fig1-cep" => (
            Command::CepCheck,
            Overrides {
                lo_order: Some(3),
                mix_order: Some(2),
                cep_draws: Some(10_000),
                cep_stable: Some(false),
                ..Default::default()
            },
        ),
        other => {
            return Err(Error::config(
                "preset",
                format!(
                    "unknown preset `{other}` (fig3, fig4, figS3, figS4, yoctojoule, fig1-cep)"
                ),
            ))
        }
    };
    if target != command {
        return Err(Error::config(
            "preset",
            format!("preset `{name}` belongs to the `{target}` command, not `{command}`"),
        ));
    }
    Ok(layer)
}

/// Resolves defaults < preset < file < flags. The preset is taken from the
/// flags if given there, else from the file.
pub fn resolve(command: Command, file: Option<&Overrides>, flags: &Overrides) -> Result<RunConfig> {
    let preset_name = flags
        .preset
        .clone()
        .or_else(|| file.and_then(|f| f.preset.clone()));
    let mut merged = match serde_json::to_value(RunConfig::default()).expect("defaults serialize") {
        Value::Object(m) => m,
        _ => unreachable!(),
    };
    let mut layers = Vec::new();
    if let Some(name) = &preset_name {
        layers.push(preset(name, command)?);
    }
    layers.extend(file.cloned());
    layers.push(flags.clone());
    for layer in &layers {
        merged.extend(layer.to_map());
    }
    merged.insert(
        "preset".into(),
        preset_name.map(Value::String).unwrap_or(Value::Null),
    );
    let config: RunConfig = serde_json::from_value(Value::Object(merged))
        .map_err(|e| Error::config(key_of(&e.to_string()), e.to_string()))?;
    config.validate()?;
    Ok(config)
}

impl RunConfig {
    /// Checks every key against its owning type's invariants.
    pub fn validate(&self) -> Result<()> {
        for kind in self.kinds()? {
            PhotonDistribution::new(kind, 1.0, self.coherent_fraction)?;
        }
        self.grid.resolve()?;
        if self.shots < 2 {
            return Err(Error::config(
                "shots",
                "at least 2 shots are needed for a standard deviation",
            ));
        }
        if !(self.sampling_mean.is_finite() && self.sampling_mean > 0.0) {
            return Err(Error::config("sampling_mean", "must be > 0"));
        }
        if !(self.wavelength_nm.is_finite() && self.wavelength_nm > 0.0) {
            return Err(Error::config("wavelength_nm", "must be > 0"));
        }
        self.scenario()?.validate()?;
        if !(self.delay_step_fs.is_finite() && self.delay_step_fs > 0.0) {
            return Err(Error::config("delay_step_fs", "must be > 0"));
        }
        self.delays()?;
        self.profile().validate()?;
        if self.energies_zj.is_empty()
            || self
                .energies_zj
                .iter()
                .any(|e| !(e.is_finite() && *e > 0.0))
        {
            return Err(Error::config(
                "energies_zj",
                "needs at least one energy, all > 0",
            ));
        }
        if self.cep_draws == 0 {
            return Err(Error::config("cep_draws", "must be >= 1"));
        }
        Ok(())
    }

    pub fn kinds(&self) -> Result<Vec<DistributionKind>> {
        let kinds = self
            .kind
            .split(',')
            .map(|k| k.trim().parse::<DistributionKind>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::config("kind", e))?;
        if kinds.is_empty() {
            return Err(Error::config("kind", "no distribution given"));
        }
        Ok(kinds)
    }

    /// The single kind used by scan-based commands.
    pub fn single_kind(&self) -> Result<DistributionKind> {
        match self.kinds()?.as_slice() {
            [k] => Ok(*k),
            _ => Err(Error::config(
                "kind",
                "this command takes exactly one distribution kind",
            )),
        }
    }

    pub fn test_template(&self, kind: DistributionKind) -> Result<PhotonDistribution> {
        PhotonDistribution::new(kind, 1.0, self.coherent_fraction)
    }

    pub fn sampling(&self) -> Result<PhotonDistribution> {
        PhotonDistribution::poisson(self.sampling_mean).map_err(|e| match e {
            Error::Config { message, .. } => Error::config("sampling_mean", message),
            e => e,
        })
    }

    pub fn mc_config(&self, kind: DistributionKind) -> Result<McConfig> {
        Ok(McConfig {
            sampling: self.sampling()?,
            test: self.test_template(kind)?,
            shots: self.shots,
            seed: self.seed,
        })
    }

    pub fn carrier_phz(&self) -> f64 {
        SPEED_OF_LIGHT / (self.wavelength_nm * 1e-9) / 1e15
    }

    pub fn profile(&self) -> CoherenceProfile {
        CoherenceProfile {
            mode: self.profile_mode,
            a0: self.profile_a0,
            c: self.profile_c,
        }
    }

    fn pulse(&self, field: f64, cep: f64) -> PulseSpec {
        PulseSpec {
            carrier_freq: self.carrier_phz(),
            fwhm: self.fwhm_fs,
            field_amplitude: field,
            cep,
            cep_stable: self.cep_stable,
        }
    }

    pub fn test_pulse(&self) -> PulseSpec {
        self.pulse(self.test_field, self.test_cep)
    }

    pub fn sampling_pulse(&self) -> PulseSpec {
        self.pulse(self.sampling_field, self.sampling_cep)
    }

    pub fn detection(&self) -> DetectionSpec {
        DetectionSpec {
            lo_order: self.lo_order,
            mix_order: self.mix_order,
            detection_freq: self
                .detection_freq_phz
                .unwrap_or_else(|| self.carrier_phz()),
            classical_noise: self.classical_noise,
            noise_floor: self.noise_floor,
            shots_per_point: self.shots_per_point,
            seed: self.seed,
        }
    }

    /// Scan scenario; the test law is the intensity-linked profile when one
    /// is configured, otherwise the first configured kind.
    pub fn scenario(&self) -> Result<ScanScenario> {
        let test_law = match self.profile_mode {
            ProfileMode::IntensityLinked => TestLaw::Profile(self.profile()),
            ProfileMode::Constant => TestLaw::Fixed {
                kind: self.kinds()?[0],
                coherent_fraction: self.coherent_fraction,
            },
        };
        Ok(ScanScenario {
            test_pulse: self.test_pulse(),
            test_law,
            peak_mean_photons: self.peak_mean_photons,
            sampling_pulse: self.sampling_pulse(),
            sampling: self.sampling()?,
            detection: self.detection(),
        })
    }

    pub fn delays(&self) -> Result<Vec<f64>> {
        delay_grid(self.delay_min_fs, self.delay_max_fs, self.delay_step_fs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags() -> Overrides {
        Overrides::default()
    }

    #[test]
    fn empty_layers_give_documented_defaults() {
        let c = resolve(
            Command::Scaling,
            Some(&toml::from_str("").unwrap()),
            &flags(),
        )
        .unwrap();
        assert_eq!(c.wavelength_nm, 1030.0);
        assert_eq!(c.fwhm_fs, 150.0);
        assert_eq!(c.kinds().unwrap(), vec![DistributionKind::Poisson]);
        assert_eq!(c.sampling_mean, 1e6);
        assert_eq!(c.shots, 10_000);
        assert_eq!(c.grid.resolve().unwrap(), REFERENCE_MEAN_PHOTONS.to_vec());
    }

    #[test]
    fn flags_override_file() {
        let file: Overrides = toml::from_str("seed = 9\nshots = 500").unwrap();
        let mut f = flags();
        f.seed = Some(7);
        let c = resolve(Command::Scaling, Some(&file), &f).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.shots, 500);
    }

    #[test]
    fn file_overrides_preset() {
        let file: Overrides =
            toml::from_str("preset = \"yoctojoule\"\nclassical_noise = 0.1").unwrap();
        let c = resolve(Command::Trace, Some(&file), &flags()).unwrap();
        assert_eq!(c.peak_mean_photons, 0.0045);
        assert_eq!(c.classical_noise, 0.1);
        assert_eq!(c.preset.as_deref(), Some("yoctojoule"));
    }

    #[test]
    fn unknown_key_is_rejected_by_name() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "seed = 1\nbogus_key = 3\n").unwrap();
        match Overrides::from_file(&path) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "bogus_key"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn type_mismatch_names_the_key() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "seed = 1\nshots = \"many\"\n").unwrap();
        match Overrides::from_file(&path) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "shots"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn out_of_range_values_name_their_key() {
        let file: Overrides = toml::from_str("coherent_fraction = 1.2").unwrap();
        match resolve(Command::Scaling, Some(&file), &flags()) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "coherent_fraction"),
            other => panic!("{other:?}"),
        }
        let mut f = flags();
        f.shots = Some(1);
        match resolve(Command::Scaling, None, &f) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "shots"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn preset_must_match_command() {
        let mut f = flags();
        f.preset = Some("fig3".into());
        assert!(resolve(Command::Trace, None, &f).is_err());
        assert!(resolve(Command::Scaling, None, &f).is_ok());
        f.preset = Some("nope".into());
        assert!(resolve(Command::Scaling, None, &f).is_err());
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(
            "paper-table".parse::<GridSpec>().unwrap(),
            GridSpec::Named(REFERENCE_GRID.into())
        );
        assert_eq!(
            "1, 2.5".parse::<GridSpec>().unwrap(),
            GridSpec::Values(vec![1.0, 2.5])
        );
        assert!("1,x".parse::<GridSpec>().is_err());
        let file: Overrides = toml::from_str("grid = [0.5, 1]").unwrap();
        assert_eq!(file.grid, Some(GridSpec::Values(vec![0.5, 1.0])));
        assert!(GridSpec::Named("other".into()).resolve().is_err());
    }

    #[test]
    fn resolved_config_round_trips_through_json() {
        let c = resolve(
            Command::Intrapulse,
            None,
            &Overrides {
                preset: Some("fig4".into()),
                ..Default::default()
            },
        )
        .unwrap();
        let v = serde_json::to_value(&c).unwrap();
        let layer: Overrides = serde_json::from_value(v).unwrap();
        assert_eq!(
            resolve(Command::Intrapulse, Some(&layer), &flags()).unwrap(),
            c
        );
    }
}
