//! Pipeline commands behind the `paramstate` binary.
//!
//! Each command computes all of its artifacts in memory and returns them as a
//! [`CommandOutput`]; nothing touches the disk until [`CommandOutput::commit`],
//! so a failing command never leaves partial files behind.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{analysis_report, build_transition};
use crate::behavior::{build_hankel, check_excitation, extract_basis, ExcitationReport, Trajectory};
use crate::error::{Error, Result};
use crate::io::{read_json, to_json_string, write_text};
use crate::plant::{
    generate_excitation, realize, simulate_closed, simulate_open, PlantRealization, RunMetadata, TransferMatrix,
};
use crate::plot::trajectory_svg;
use crate::synthesis::{synthesize_with, ControllerJson, SynthesisOptions, TrajectoryFeedback, Weighting};

pub const DATA_CSV: &str = "data.csv";
pub const DATA_META: &str = "data.json";
pub const ANALYSIS_JSON: &str = "analysis.json";
pub const CONTROLLER_JSON: &str = "controller.json";
pub const RUN_CSV: &str = "closed_loop.csv";
pub const RUN_META: &str = "closed_loop.json";
pub const RUN_SVG: &str = "closed_loop.svg";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesisSettings {
    pub weighting: Weighting,
    /// `null` selects the plain Riccati gain.
    pub decay_bound: Option<f64>,
}

impl Default for SynthesisSettings {
    fn default() -> Self {
        let d = SynthesisOptions::default();
        SynthesisSettings {
            weighting: d.weighting,
            decay_bound: d.decay_bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Transfer-matrix JSON; the built-in 2×2 benchmark when absent.
    pub plant_file: Option<PathBuf>,
    /// Defaults to `<output_dir>/data.csv`.
    pub data_file: Option<PathBuf>,
    /// Defaults to `<output_dir>/controller.json`.
    pub controller_file: Option<PathBuf>,
    #[serde(rename = "L")]
    pub lag: usize,
    #[serde(rename = "T")]
    pub samples: usize,
    pub seed: u64,
    pub amplitude: f64,
    pub tol_rel: f64,
    pub eps: f64,
    pub horizon: usize,
    pub output_dir: PathBuf,
    pub n_hint: Option<usize>,
    pub synthesis: SynthesisSettings,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            plant_file: None,
            data_file: None,
            controller_file: None,
            lag: 8,
            samples: 400,
            seed: 42,
            amplitude: 1.0,
            tol_rel: 1e-8,
            eps: 1e-6,
            horizon: 60,
            output_dir: PathBuf::from("."),
            n_hint: None,
            synthesis: SynthesisSettings::default(),
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct ConfigOverrides {
    pub plant_file: Option<PathBuf>,
    pub data_file: Option<PathBuf>,
    pub controller_file: Option<PathBuf>,
    pub lag: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub amplitude: Option<f64>,
    pub tol_rel: Option<f64>,
    pub eps: Option<f64>,
    pub horizon: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn load(config_file: Option<&Path>, overrides: &ConfigOverrides) -> Result<Self> {
        let mut cfg = match config_file {
            Some(path) => read_json(path)?,
            None => PipelineConfig::default(),
        };
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &ConfigOverrides) {
        macro_rules! take {
            ($field:ident) => {
                if let Some(v) = &o.$field {
                    self.$field = v.clone().into();
                }
            };
        }
        take!(plant_file);
        take!(data_file);
        take!(controller_file);
        take!(lag);
        take!(samples);
        take!(seed);
        take!(amplitude);
        take!(tol_rel);
        take!(eps);
        take!(horizon);
        take!(output_dir);
    }

    pub fn validate(&self) -> Result<()> {
        if self.lag == 0 || self.samples == 0 || self.horizon == 0 {
            return Err(Error::invalid(format!(
                "L, T and horizon must be positive (L = {}, T = {}, horizon = {})",
                self.lag, self.samples, self.horizon
            )));
        }
        if !(self.tol_rel > 0.0 && self.tol_rel < 1.0) {
            return Err(Error::invalid(format!("tol must lie in (0, 1), got {}", self.tol_rel)));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::invalid(format!("eps must lie in (0, 1), got {}", self.eps)));
        }
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(Error::invalid(format!(
                "amplitude must be finite and non-negative, got {}",
                self.amplitude
            )));
        }
        if let Some(alpha) = self.synthesis.decay_bound {
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(Error::invalid(format!("decay_bound must lie in (0, 1], got {alpha}")));
            }
        }
        Ok(())
    }

    pub fn synthesis_options(&self) -> SynthesisOptions {
        SynthesisOptions {
            weighting: self.synthesis.weighting,
            decay_bound: self.synthesis.decay_bound,
            tol_rel: self.tol_rel,
        }
    }

    pub fn data_path(&self) -> PathBuf {
        self.data_file.clone().unwrap_or_else(|| self.output_dir.join(DATA_CSV))
    }

    pub fn controller_path(&self) -> PathBuf {
        self.controller_file
            .clone()
            .unwrap_or_else(|| self.output_dir.join(CONTROLLER_JSON))
    }

    pub fn transfer_matrix(&self) -> Result<TransferMatrix> {
        match &self.plant_file {
            Some(path) => TransferMatrix::load(path),
            None => Ok(TransferMatrix::benchmark_2x2()),
        }
    }

    pub fn plant(&self) -> Result<PlantRealization> {
        realize(&self.transfer_matrix()?)
    }
}

/// Files to write plus lines for stdout and stderr.
#[derive(Debug, Clone, Default)]
pub struct CommandOutput {
    pub files: Vec<(PathBuf, String)>,
    pub report: Vec<String>,
    pub warnings: Vec<String>,
}

impl CommandOutput {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files
            .iter()
            .find(|(p, _)| p.file_name().is_some_and(|f| f == name))
            .map(|(_, text)| text.as_str())
    }

    pub fn commit(&self) -> Result<()> {
        for (path, _) in &self.files {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|source| Error::Io {
                    path: dir.display().to_string(),
                    source,
                })?;
            }
        }
        for (path, text) in &self.files {
            write_text(path, text)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CollectMetadata {
    #[serde(flatten)]
    pub run: RunMetadata,
    pub amplitude: f64,
    #[serde(rename = "L")]
    pub lag: usize,
    #[serde(rename = "T")]
    pub samples: usize,
    pub excitation: ExcitationReport,
}

/// Open-loop data collection: `T + 1` samples from rest.
pub fn cmd_collect(cfg: &PipelineConfig) -> Result<CommandOutput> {
    cfg.validate()?;
    if cfg.samples < cfg.lag + 1 {
        return Err(Error::invalid(format!(
            "T = {} is shorter than the window length L+1 = {}",
            cfg.samples,
            cfg.lag + 1
        )));
    }
    let pr = cfg.plant()?;
    let u = generate_excitation(pr.inputs(), cfg.samples + 1, cfg.seed, cfg.amplitude);
    let mut run = simulate_open(&pr, &u, None)?;
    run.seed = Some(cfg.seed);
    let h = build_hankel(&run.trajectory, cfg.lag)?;
    let excitation = check_excitation(&h, cfg.n_hint.or(Some(pr.order())), cfg.tol_rel)?;

    let mut out = CommandOutput::default();
    if cfg.amplitude == 0.0 {
        out.warnings
            .push("warning: amplitude is 0; rank condition cannot hold".to_string());
    }
    out.report.push(format!(
        "rank {} (target {}), inferred n = {}, excitation {}",
        excitation.rank,
        (cfg.lag + 1) * pr.inputs() + cfg.n_hint.unwrap_or(pr.order()),
        excitation.inferred_n,
        if excitation.satisfied { "satisfied" } else { "NOT satisfied" }
    ));
    let meta = CollectMetadata {
        run: run.metadata(),
        amplitude: cfg.amplitude,
        lag: cfg.lag,
        samples: cfg.samples,
        excitation,
    };
    let data = cfg.data_path();
    let meta_path = data.with_extension("json");
    out.files.push((data, run.trajectory.to_csv_string()));
    out.files.push((meta_path, to_json_string(&meta)? + "\n"));
    Ok(out)
}

fn load_data(cfg: &PipelineConfig) -> Result<Trajectory> {
    let path = cfg.data_path();
    let file = std::fs::File::open(&path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let traj = Trajectory::read_csv(file).map_err(|e| match e {
        Error::Parse { context, message } => Error::Parse {
            context: format!("{}: {context}", path.display()),
            message,
        },
        other => other,
    })?;
    if cfg.plant_file.is_some() {
        let pr = cfg.plant()?;
        if (traj.inputs(), traj.outputs()) != (pr.inputs(), pr.outputs()) {
            return Err(Error::invalid(format!(
                "data has {} inputs and {} outputs, plant has {} and {}",
                traj.inputs(),
                traj.outputs(),
                pr.inputs(),
                pr.outputs()
            )));
        }
    }
    if traj.len() < cfg.lag + 2 {
        return Err(Error::invalid(format!(
            "data has {} samples, at least L+2 = {} are needed",
            traj.len(),
            cfg.lag + 2
        )));
    }
    Ok(traj)
}

pub fn cmd_analyze(cfg: &PipelineConfig) -> Result<CommandOutput> {
    cfg.validate()?;
    let traj = load_data(cfg)?;
    let h = build_hankel(&traj, cfg.lag)?;
    let excitation = check_excitation(&h, cfg.n_hint, cfg.tol_rel)?;
    let basis = extract_basis(&h, cfg.tol_rel)?;
    let tm = build_transition(&basis, cfg.tol_rel)?;
    let report = analysis_report(&excitation, &tm, cfg.tol_rel)?;

    let mut out = CommandOutput::default();
    out.report.push(format!(
        "rank {}, inferred n = {}, spectral radius of A = {:.6}",
        report.rank, report.inferred_n, report.spectral_radius
    ));
    if let Some(stable) = report.stable {
        out.report.push(format!("autonomous behavior, stable: {stable}"));
    }
    out.report.push(format!("stabilizable: {}", report.stabilizable));
    if !report.uncontrollable_eigenvalues.is_empty() {
        out.report.push(format!(
            "uncontrollable eigenvalues: {}",
            format_pairs(&report.uncontrollable_eigenvalues)
        ));
    }
    out.files
        .push((cfg.output_dir.join(ANALYSIS_JSON), to_json_string(&report)? + "\n"));
    Ok(out)
}

pub fn cmd_synthesize(cfg: &PipelineConfig) -> Result<CommandOutput> {
    cfg.validate()?;
    let traj = load_data(cfg)?;
    let h = build_hankel(&traj, cfg.lag)?;
    let basis = extract_basis(&h, cfg.tol_rel)?;
    let tm = build_transition(&basis, cfg.tol_rel)?;
    let ctrl = synthesize_with(&tm, &cfg.synthesis_options())?;

    let mut out = CommandOutput::default();
    out.report.push(format!(
        "LMI min eigenvalue {:.6e}, closed-loop spectral radius {:.6}",
        ctrl.verify_lmi()?,
        ctrl.closed_loop_radius()?
    ));
    out.files
        .push((cfg.controller_path(), to_json_string(&ctrl.to_json())? + "\n"));
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceSummary {
    pub initial_max_abs: f64,
    pub last10_max_norm: f64,
    pub ratio: f64,
    pub final_state_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateMetadata {
    #[serde(flatten)]
    pub run: RunMetadata,
    #[serde(rename = "L")]
    pub lag: usize,
    pub horizon: usize,
    pub summary: ConvergenceSummary,
}

/// Closed loop from an initial window of `L+1` open-loop samples driven by
/// the configured excitation (zero amplitude gives a zero window).
pub fn cmd_simulate(cfg: &PipelineConfig) -> Result<CommandOutput> {
    cfg.validate()?;
    let pr = cfg.plant()?;
    let stored: ControllerJson = read_json(&cfg.controller_path())?;
    if (stored.m, stored.p) != (pr.inputs(), pr.outputs()) {
        return Err(Error::invalid(format!(
            "controller is for {} inputs x {} outputs, plant has {} inputs x {} outputs",
            stored.m,
            stored.p,
            pr.inputs(),
            pr.outputs()
        )));
    }
    let law = stored.deploy()?;
    let lag = law.lag();
    let u = generate_excitation(pr.inputs(), lag + 1, cfg.seed, cfg.amplitude);
    let init = simulate_open(&pr, &u, None)?.trajectory;
    let mut run = simulate_closed(&pr, &law, &init, cfg.horizon)?;
    run.seed = Some(cfg.seed);

    let traj = &run.trajectory;
    let initial = init.max_abs();
    let tail = traj.len().min(10);
    let last10 = (traj.len() - tail..traj.len())
        .map(|i| traj.sample(i).norm())
        .fold(0.0, f64::max);
    let summary = ConvergenceSummary {
        initial_max_abs: initial,
        last10_max_norm: last10,
        ratio: if initial > 0.0 { last10 / initial } else { 0.0 },
        final_state_norm: run.final_state.norm(),
    };
    let mut out = CommandOutput::default();
    out.report.push(format!(
        "initial window max |w| {:.6e}, last-10-step max ‖w‖ {:.6e} (ratio {:.3e}), final plant state norm {:.6e}",
        summary.initial_max_abs, summary.last10_max_norm, summary.ratio, summary.final_state_norm
    ));
    let meta = SimulateMetadata {
        run: run.metadata(),
        lag,
        horizon: cfg.horizon,
        summary,
    };
    let dir = &cfg.output_dir;
    out.files.push((dir.join(RUN_CSV), traj.to_csv_string()));
    out.files.push((dir.join(RUN_META), to_json_string(&meta)? + "\n"));
    out.files
        .push((dir.join(RUN_SVG), trajectory_svg(traj, "closed-loop trajectory")));
    Ok(out)
}

fn format_pairs(pairs: &[[f64; 2]]) -> String {
    let items: Vec<String> = pairs
        .iter()
        .map(|[re, im]| format!("{re:.6}{im:+.6}i"))
        .collect();
    format!("[{}]", items.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_overrides() {
        let cfg: PipelineConfig = serde_json::from_str(r#"{"L": 4, "synthesis": {"decay_bound": null}}"#).unwrap();
        assert_eq!(cfg.lag, 4);
        assert_eq!(cfg.samples, 400);
        assert_eq!(cfg.synthesis.decay_bound, None);
        let mut cfg = cfg;
        cfg.apply(&ConfigOverrides {
            lag: Some(6),
            eps: Some(1e-3),
            ..Default::default()
        });
        assert_eq!(cfg.lag, 6);
        assert_eq!(cfg.eps, 1e-3);
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"lag": 4}"#).is_err());
    }

    #[test]
    fn invalid_config_rejected() {
        let bad = PipelineConfig {
            eps: 1.5,
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(Error::InvalidInput(_))));
        let bad = PipelineConfig {
            horizon: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn collect_rejects_short_data_before_simulating() {
        let cfg = PipelineConfig {
            lag: 8,
            samples: 8,
            ..Default::default()
        };
        assert!(matches!(cmd_collect(&cfg), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn collect_zero_amplitude_warns() {
        let cfg = PipelineConfig {
            amplitude: 0.0,
            samples: 40,
            ..Default::default()
        };
        let out = cmd_collect(&cfg).unwrap();
        assert!(out.warnings.iter().any(|w| w.contains("rank condition cannot hold")));
        assert!(out.report[0].starts_with("rank 0"));
    }
}
