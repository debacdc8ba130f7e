//! Monte-Carlo benchmark campaigns: paired-seed trials across parameter
//! sweeps, NMSE aggregation with bootstrap confidence intervals, and
//! resumable CSV output.

use std::collections::HashSet;
use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::array_channel::{
    near_steering, sample_random_paths, synthesize_channel, ArrayGeometry, FrequencyGrid, PathSpec,
};
use crate::error::{Error, Result};
use crate::estimators::{
    genie_ls, ls_baseline, p_somp, p_sigw, ss_sigw_baseline, sw_omp_baseline, EstimationContext,
};
use crate::observation::{build_whitener, generate_combiner, observe};
use crate::polar_dictionary::{
    angular_as_polar, build_angular_dictionary, build_polar_dictionary, uniform_dictionary,
    DictionaryConfig, PolarDictionary,
};
use crate::rng::{derive_rng, stream};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Estimation methods a campaign can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    PSomp,
    PSigw,
    SwOmp,
    SsSigw,
    Ls,
    GenieLs,
    /// P-SOMP on a uniformly (instead of inverse-distance) sampled polar
    /// dictionary; the sampling ablation.
    PSompUniform,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::PSomp,
        Method::PSigw,
        Method::SwOmp,
        Method::SsSigw,
        Method::Ls,
        Method::GenieLs,
        Method::PSompUniform,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Method::PSomp => "p-somp",
            Method::PSigw => "p-sigw",
            Method::SwOmp => "sw-omp",
            Method::SsSigw => "ss-sigw",
            Method::Ls => "ls",
            Method::GenieLs => "genie-ls",
            Method::PSompUniform => "p-somp-uniform",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        Method::ALL
            .into_iter()
            .find(|m| m.tag() == s)
            .ok_or_else(|| Error::Config(format!("unknown method '{s}'")))
    }
}

/// What parameter a campaign sweeps over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "values")]
pub enum Sweep {
    /// All paths placed at a fixed distance; values in meters.
    Distance(Vec<f64>),
    /// SNR in dB.
    Snr(Vec<f64>),
    /// Pilot length P.
    PilotLength(Vec<f64>),
    /// Dictionary oversampling control beta_delta.
    Beta(Vec<f64>),
    /// Single point; the objective trace of the iterative methods is the
    /// deliverable. Values are iteration budgets.
    IterationTrace(Vec<f64>),
    /// Distance sweep comparing the inverse-distance polar dictionary
    /// against a uniform-distance one of equal size.
    SamplingAblation(Vec<f64>),
}

impl Sweep {
    pub fn name(&self) -> &'static str {
        match self {
            Sweep::Distance(_) => "distance",
            Sweep::Snr(_) => "snr",
            Sweep::PilotLength(_) => "pilot-length",
            Sweep::Beta(_) => "beta",
            Sweep::IterationTrace(_) => "iteration-trace",
            Sweep::SamplingAblation(_) => "sampling-ablation",
        }
    }

    pub fn values(&self) -> &[f64] {
        match self {
            Sweep::Distance(v)
            | Sweep::Snr(v)
            | Sweep::PilotLength(v)
            | Sweep::Beta(v)
            | Sweep::IterationTrace(v)
            | Sweep::SamplingAblation(v) => v,
        }
    }
}

/// Full experiment configuration. Defaults are desk-scale (a couple of
/// minutes on a laptop); [`ExperimentConfig::paper_scale`] switches to the
/// published simulation setup.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub num_antennas: usize,
    pub num_subcarriers: usize,
    pub num_rf_chains: usize,
    pub pilot_length: usize,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub num_paths: usize,
    pub assumed_paths: usize,
    pub snr_db: f64,
    pub beta_delta: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub angle_bound: f64,
    pub num_iterations: usize,
    pub trials: usize,
    pub master_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            num_antennas: 64,
            num_subcarriers: 32,
            num_rf_chains: 4,
            pilot_length: 8,
            carrier_hz: 100e9,
            bandwidth_hz: 100e6,
            num_paths: 6,
            assumed_paths: 12,
            snr_db: 10.0,
            beta_delta: 1.2,
            // The 64-antenna array at 100 GHz has a Rayleigh distance of
            // ~6.1 m and a Fresnel coherence distance of ~1.07 m, so desk
            // defaults must reach well below a metre for the distance rings
            // to exist at all.
            rho_min: 0.3,
            rho_max: 6.0,
            angle_bound: 3f64.sqrt() / 2.0,
            num_iterations: 10,
            trials: 50,
            master_seed: 20260826,
        }
    }
}

impl ExperimentConfig {
    /// The published simulation setup: 256 antennas, 256 subcarriers,
    /// 200 trials, pilot length 32.
    pub fn paper_scale() -> Self {
        Self {
            num_antennas: 256,
            num_subcarriers: 256,
            pilot_length: 32,
            trials: 200,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_antennas == 0 || self.num_subcarriers == 0 {
            return Err(Error::Config("array and subcarrier counts must be positive".into()));
        }
        if self.num_rf_chains == 0 || self.pilot_length == 0 {
            return Err(Error::Config("pilot dimensions must be positive".into()));
        }
        if self.num_paths == 0 || self.assumed_paths == 0 {
            return Err(Error::Config("path counts must be positive".into()));
        }
        if !(self.carrier_hz > 0.0) || !(self.bandwidth_hz >= 0.0) {
            return Err(Error::Config("invalid carrier or bandwidth".into()));
        }
        if !(self.rho_min > 0.0) || self.rho_max < self.rho_min {
            return Err(Error::Config("need 0 < rho_min <= rho_max".into()));
        }
        if !(self.beta_delta > 0.0) {
            return Err(Error::Config("beta_delta must be positive".into()));
        }
        if !(self.angle_bound > 0.0 && self.angle_bound <= 1.0) {
            return Err(Error::Config("angle_bound must lie in (0, 1]".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be positive".into()));
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<ArrayGeometry> {
        ArrayGeometry::half_wavelength(self.num_antennas, self.carrier_hz)
    }

    pub fn grid(&self) -> Result<FrequencyGrid> {
        FrequencyGrid::new(self.num_subcarriers, self.bandwidth_hz, self.carrier_hz)
    }

    pub fn noise_power(&self) -> f64 {
        10f64.powf(-self.snr_db / 10.0)
    }
}

/// One CSV record; the schema is part of the tool's interface.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrialRecord {
    pub method: String,
    pub sweep_name: String,
    pub sweep_value: f64,
    pub trial: u64,
    pub seed: u64,
    pub nmse_linear: f64,
    pub nmse_db: f64,
    pub wall_ms: f64,
}

/// Normalized mean squared error `||H - H_hat||_F^2 / ||H||_F^2`.
pub fn nmse(truth: &DMatrix<Complex64>, estimate: &DMatrix<Complex64>) -> f64 {
    let denom = crate::linalg::fro_norm_sq(truth);
    if denom == 0.0 {
        return if crate::linalg::fro_norm_sq(estimate) == 0.0 { 0.0 } else { f64::INFINITY };
    }
    crate::linalg::fro_norm_sq(&(truth - estimate)) / denom
}

/// A sweep point after the sweep value has been folded into the base config.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub config: ExperimentConfig,
    pub sweep_name: &'static str,
    pub sweep_value: f64,
    /// Overrides random path distances with a fixed value (distance sweeps).
    pub fixed_distance: Option<f64>,
}

/// Expand a sweep into concrete per-point configurations.
pub fn expand_sweep(base: &ExperimentConfig, sweep: &Sweep) -> Result<Vec<SweepPoint>> {
    let name = sweep.name();
    sweep
        .values()
        .iter()
        .map(|&v| {
            let mut config = base.clone();
            let mut fixed_distance = None;
            match sweep {
                Sweep::Distance(_) | Sweep::SamplingAblation(_) => {
                    if !(v > 0.0) {
                        return Err(Error::Config(format!("distance {v} must be positive")));
                    }
                    fixed_distance = Some(v);
                }
                Sweep::Snr(_) => config.snr_db = v,
                Sweep::PilotLength(_) => {
                    if v < 1.0 || v.fract() != 0.0 {
                        return Err(Error::Config(format!("pilot length {v} must be a positive integer")));
                    }
                    config.pilot_length = v as usize;
                }
                Sweep::Beta(_) => {
                    if !(v > 0.0) {
                        return Err(Error::Config(format!("beta_delta {v} must be positive")));
                    }
                    config.beta_delta = v;
                }
                Sweep::IterationTrace(_) => {
                    if v < 0.0 || v.fract() != 0.0 {
                        return Err(Error::Config(format!("iteration budget {v} must be a non-negative integer")));
                    }
                    config.num_iterations = v as usize;
                }
            }
            config.validate()?;
            Ok(SweepPoint { config, sweep_name: name, sweep_value: v, fixed_distance })
        })
        .collect()
}

/// Default distance grid: 13 log-spaced points from the configured minimum
/// distance to 20% past the array's Rayleigh distance, spanning the reactive
/// near field through the far-field transition.
pub fn default_distance_grid(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    let rayleigh = cfg.geometry()?.rayleigh_distance();
    Ok(log_space(cfg.rho_min, (1.2 * rayleigh).max(2.0 * cfg.rho_min), 13))
}

pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Everything built once per sweep point and shared by all its trials.
struct PointSetup {
    geometry: ArrayGeometry,
    grid: FrequencyGrid,
    polar: Option<PolarDictionary>,
    angular: Option<PolarDictionary>,
    uniform: Option<PolarDictionary>,
}

fn build_point_setup(point: &SweepPoint, methods: &[Method]) -> Result<PointSetup> {
    let cfg = &point.config;
    let geometry = cfg.geometry()?;
    let grid = cfg.grid()?;
    let needs_polar = methods
        .iter()
        .any(|m| matches!(m, Method::PSomp | Method::PSigw | Method::PSompUniform));
    let needs_angular = methods.iter().any(|m| matches!(m, Method::SwOmp | Method::SsSigw));
    let polar = if needs_polar {
        Some(build_polar_dictionary(&DictionaryConfig {
            geometry: geometry.clone(),
            beta_delta: cfg.beta_delta,
            rho_min: cfg.rho_min,
        })?)
    } else {
        None
    };
    let uniform = if methods.contains(&Method::PSompUniform) {
        let rings = polar.as_ref().map(|d| d.num_rings).unwrap_or(1);
        Some(uniform_dictionary(&geometry, rings, cfg.rho_min, geometry.rayleigh_distance())?)
    } else {
        None
    };
    let angular = if needs_angular {
        Some(angular_as_polar(&geometry)?)
    } else {
        None
    };
    Ok(PointSetup { geometry, grid, polar, angular, uniform })
}

/// Run one paired trial: every method sees the identical channel, combiner,
/// and noise. Estimator failures are reported on stderr and recorded as
/// NMSE = 1 (the all-zeros estimate) instead of aborting the campaign.
fn run_trial(
    point: &SweepPoint,
    setup: &PointSetup,
    methods: &[Method],
    trial: u64,
    point_index: u64,
) -> Result<Vec<TrialRecord>> {
    let cfg = &point.config;
    let seed = cfg.master_seed;
    let mut path_rng = derive_rng(seed, point_index, trial, stream::PATHS);
    let spec = PathSpec {
        num_paths: cfg.num_paths,
        angle_range: (-cfg.angle_bound, cfg.angle_bound),
        distance_range: (cfg.rho_min, cfg.rho_max),
    };
    let mut paths = sample_random_paths(&mut path_rng, &spec)?;
    if let Some(r) = point.fixed_distance {
        for p in &mut paths {
            p.distance = r;
        }
    }
    let channel = synthesize_channel(&setup.geometry, &setup.grid, &paths)?;

    let mut combiner_rng = derive_rng(seed, point_index, trial, stream::COMBINER);
    let combiner = generate_combiner(
        &mut combiner_rng,
        cfg.pilot_length,
        cfg.num_rf_chains,
        cfg.num_antennas,
    );
    let mut noise_rng = derive_rng(seed, point_index, trial, stream::NOISE);
    let obs = observe(&channel.matrix, &combiner, cfg.noise_power(), &mut noise_rng)?;
    let whitener = build_whitener(&combiner);
    let ctx = EstimationContext::new(&setup.geometry, &obs, &whitener);

    let psi_polar = setup.polar.as_ref().map(|d| ctx.whiten_dictionary(d));
    let psi_angular = setup.angular.as_ref().map(|d| ctx.whiten_dictionary(d));
    let psi_uniform = setup.uniform.as_ref().map(|d| ctx.whiten_dictionary(d));

    let mut records = Vec::with_capacity(methods.len());
    for &method in methods {
        let start = Instant::now();
        let estimate = match method {
            Method::PSomp => p_somp(&ctx, setup.polar.as_ref().unwrap(), psi_polar.as_ref().unwrap(), cfg.assumed_paths)
                .map(|r| r.h_hat),
            Method::PSigw => p_sigw(
                &ctx,
                setup.polar.as_ref().unwrap(),
                psi_polar.as_ref().unwrap(),
                cfg.assumed_paths,
                cfg.num_iterations,
            )
            .map(|r| r.h_hat),
            Method::SwOmp => sw_omp_baseline(
                &ctx,
                setup.angular.as_ref().unwrap(),
                psi_angular.as_ref().unwrap(),
                cfg.assumed_paths,
            )
            .map(|r| r.h_hat),
            Method::SsSigw => ss_sigw_baseline(
                &ctx,
                setup.angular.as_ref().unwrap(),
                psi_angular.as_ref().unwrap(),
                cfg.assumed_paths,
                cfg.num_iterations,
            )
            .map(|r| r.h_hat),
            Method::Ls => Ok(ls_baseline(&ctx).h_hat),
            Method::GenieLs => genie_ls(&ctx, &paths).map(|r| r.h_hat),
            Method::PSompUniform => p_somp(
                &ctx,
                setup.uniform.as_ref().unwrap(),
                psi_uniform.as_ref().unwrap(),
                cfg.assumed_paths,
            )
            .map(|r| r.h_hat),
        };
        let wall_ms = start.elapsed().as_secs_f64() * 1e3;
        let nmse_linear = match estimate {
            Ok(h_hat) => nmse(&channel.matrix, &h_hat),
            Err(e) => {
                eprintln!(
                    "warning: {} failed at {}={} trial {trial}: {e}; recording NMSE = 1",
                    method.tag(),
                    point.sweep_name,
                    point.sweep_value
                );
                1.0
            }
        };
        records.push(TrialRecord {
            method: method.tag().to_string(),
            sweep_name: point.sweep_name.to_string(),
            sweep_value: point.sweep_value,
            trial,
            seed,
            nmse_linear,
            nmse_db: 10.0 * nmse_linear.log10(),
            wall_ms,
        });
    }
    Ok(records)
}

/// Run all trials of one sweep point, in parallel when the `parallel`
/// feature is enabled. Trial results are deterministic either way because
/// every trial derives its own RNG streams.
pub fn run_point(
    point: &SweepPoint,
    methods: &[Method],
    point_index: u64,
    skip: &HashSet<(String, u64)>,
) -> Result<Vec<TrialRecord>> {
    let setup = build_point_setup(point, methods)?;
    // Resume support: per trial, run only the methods that have no row yet.
    // Pairing is unaffected because every trial derives its channel, combiner,
    // and noise from its own streams regardless of which methods run.
    let trials: Vec<(u64, Vec<Method>)> = (0..point.config.trials as u64)
        .map(|t| {
            let missing: Vec<Method> = methods
                .iter()
                .copied()
                .filter(|m| !skip.contains(&(m.tag().to_string(), t)))
                .collect();
            (t, missing)
        })
        .filter(|(_, missing)| !missing.is_empty())
        .collect();

    #[cfg(feature = "parallel")]
    let results: Vec<Result<Vec<TrialRecord>>> = trials
        .par_iter()
        .map(|(t, ms)| run_trial(point, &setup, ms, *t, point_index))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<Vec<TrialRecord>>> = trials
        .iter()
        .map(|(t, ms)| run_trial(point, &setup, ms, *t, point_index))
        .collect();

    let mut out = Vec::new();
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

/// Per-(method, sweep value) aggregate with a bootstrap confidence interval
/// on the mean linear NMSE, reported in dB.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub method: String,
    pub sweep_name: String,
    pub sweep_value: f64,
    pub trials: usize,
    pub mean_nmse_linear: f64,
    pub mean_nmse_db: f64,
    pub ci_lo_db: f64,
    pub ci_hi_db: f64,
}

/// 95% bootstrap CI (percentile, 1000 resamples) on the mean of `xs`.
pub fn bootstrap_ci_mean(xs: &[f64], seed: u64) -> (f64, f64) {
    use rand::Rng;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    if xs.len() == 1 {
        return (xs[0], xs[0]);
    }
    let mut rng = derive_rng(seed, 0, 0, stream::BOOTSTRAP);
    let n = xs.len();
    let mut means: Vec<f64> = (0..1000)
        .map(|_| (0..n).map(|_| xs[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(|a, b| a.total_cmp(b));
    (means[24], means[974])
}

/// Aggregate trial records into per-point summaries (mean linear NMSE in dB
/// plus bootstrap CI), ordered by method then sweep value.
pub fn summarize(records: &[TrialRecord], seed: u64) -> Vec<SummaryRow> {
    let mut keys: Vec<(String, f64)> = Vec::new();
    for r in records {
        let key = (r.method.clone(), r.sweep_value);
        if !keys.iter().any(|k| k.0 == key.0 && k.1 == key.1) {
            keys.push(key);
        }
    }
    keys.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    keys.into_iter()
        .map(|(method, value)| {
            let xs: Vec<f64> = records
                .iter()
                .filter(|r| r.method == method && r.sweep_value == value)
                .map(|r| r.nmse_linear)
                .collect();
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            let (lo, hi) = bootstrap_ci_mean(&xs, seed);
            let sweep_name = records
                .iter()
                .find(|r| r.method == method)
                .map(|r| r.sweep_name.clone())
                .unwrap_or_default();
            SummaryRow {
                method,
                sweep_name,
                sweep_value: value,
                trials: xs.len(),
                mean_nmse_linear: mean,
                mean_nmse_db: 10.0 * mean.log10(),
                ci_lo_db: 10.0 * lo.log10(),
                ci_hi_db: 10.0 * hi.log10(),
            }
        })
        .collect()
}

/// Load existing records from a CSV so a campaign can resume. Returns the
/// rows and, per sweep value, the set of already-complete (method, trial)
/// keys. A missing file is an empty start, not an error.
pub fn load_existing(path: &Path) -> Result<Vec<TrialRecord>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    let mut rows = Vec::new();
    for rec in reader.deserialize() {
        let rec: TrialRecord = rec.map_err(|e| Error::Config(format!("corrupt results file: {e}")))?;
        rows.push(rec);
    }
    Ok(rows)
}

/// Outcome of a campaign, for exit-code decisions and summaries.
pub struct CampaignOutcome {
    pub records: Vec<TrialRecord>,
    pub any_method_failed: bool,
}

/// Run a full sweep campaign, streaming rows to `out_csv` as each point
/// finishes. If the file already holds rows for some (method, sweep value,
/// trial) keys those trials are skipped, so an interrupted run can resume.
pub fn run_campaign(
    base: &ExperimentConfig,
    sweep: &Sweep,
    methods: &[Method],
    out_csv: &Path,
) -> Result<CampaignOutcome> {
    base.validate()?;
    if methods.is_empty() {
        return Err(Error::Config("no methods requested".into()));
    }
    let points = expand_sweep(base, sweep)?;
    let existing = load_existing(out_csv)?;
    let mut all_records = existing.clone();

    let file_exists = out_csv.exists() && !existing.is_empty();
    let file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(out_csv)?;
    let mut writer = csv::WriterBuilder::new()
        .has_headers(!file_exists)
        .from_writer(file);

    let mut any_failed = false;
    for (idx, point) in points.iter().enumerate() {
        let skip: HashSet<(String, u64)> = existing
            .iter()
            .filter(|r| r.sweep_name == point.sweep_name && r.sweep_value == point.sweep_value)
            .map(|r| (r.method.clone(), r.trial))
            .collect();
        let records = run_point(point, methods, idx as u64, &skip)?;
        for r in &records {
            if r.nmse_linear == 1.0 {
                any_failed = true;
            }
            writer.serialize(r).map_err(|e| Error::Io(std::io::Error::other(e)))?;
        }
        writer.flush()?;
        all_records.extend(records);
        eprintln!(
            "point {}/{} ({} = {}) done",
            idx + 1,
            points.len(),
            point.sweep_name,
            point.sweep_value
        );
    }
    Ok(CampaignOutcome { records: all_records, any_method_failed: any_failed })
}

/// Write per-method summary series as JSON next to the CSV.
pub fn write_summary(records: &[TrialRecord], seed: u64, out_path: &Path) -> Result<()> {
    let summary = summarize(records, seed);
    let mut f = std::fs::File::create(out_path)?;
    serde_json::to_writer_pretty(&mut f, &summary)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    writeln!(f)?;
    Ok(())
}

/// Genie objective traces for the iterative methods at a single
/// configuration, averaged across trials; used by `trace-iterations`.
#[derive(Debug, Clone, Serialize)]
pub struct IterationTrace {
    pub method: String,
    pub mean_objective: Vec<f64>,
}

pub fn trace_iterations(config: &ExperimentConfig) -> Result<Vec<IterationTrace>> {
    config.validate()?;
    let geometry = config.geometry()?;
    let grid = config.grid()?;
    let polar = build_polar_dictionary(&DictionaryConfig::new(
        geometry.clone(),
        config.beta_delta,
        config.rho_min,
    )?)?;
    let angular = angular_as_polar(&geometry)?;
    let len = config.num_iterations + 1;
    let mut sum_polar = vec![0.0; len];
    let mut sum_angular = vec![0.0; len];
    for trial in 0..config.trials as u64 {
        let mut path_rng = derive_rng(config.master_seed, 0, trial, stream::PATHS);
        let spec = PathSpec {
            num_paths: config.num_paths,
            angle_range: (-config.angle_bound, config.angle_bound),
            distance_range: (config.rho_min, config.rho_max),
        };
        let paths = sample_random_paths(&mut path_rng, &spec)?;
        let channel = synthesize_channel(&geometry, &grid, &paths)?;
        let mut combiner_rng = derive_rng(config.master_seed, 0, trial, stream::COMBINER);
        let combiner = generate_combiner(
            &mut combiner_rng,
            config.pilot_length,
            config.num_rf_chains,
            config.num_antennas,
        );
        let mut noise_rng = derive_rng(config.master_seed, 0, trial, stream::NOISE);
        let obs = observe(&channel.matrix, &combiner, config.noise_power(), &mut noise_rng)?;
        let whitener = build_whitener(&combiner);
        let ctx = EstimationContext::new(&geometry, &obs, &whitener);
        let psi_p = ctx.whiten_dictionary(&polar);
        let psi_a = ctx.whiten_dictionary(&angular);
        let rp = p_sigw(&ctx, &polar, &psi_p, config.assumed_paths, config.num_iterations)?;
        let ra = ss_sigw_baseline(&ctx, &angular, &psi_a, config.assumed_paths, config.num_iterations)?;
        for (acc, v) in sum_polar.iter_mut().zip(&rp.objective_trace) {
            *acc += v;
        }
        for (acc, v) in sum_angular.iter_mut().zip(&ra.objective_trace) {
            *acc += v;
        }
    }
    let n = config.trials as f64;
    Ok(vec![
        IterationTrace {
            method: "p-sigw".into(),
            mean_objective: sum_polar.into_iter().map(|v| v / n).collect(),
        },
        IterationTrace {
            method: "ss-sigw".into(),
            mean_objective: sum_angular.into_iter().map(|v| v / n).collect(),
        },
    ])
}

/// Column-coherence curves of the far-field dictionary against near-field
/// steering vectors at a grid of distances; the classic motivation plot for
/// the polar dictionary (energy-spread / power-leakage view).
#[derive(Debug, Clone, Serialize)]
pub struct CoherenceCurve {
    pub distance: f64,
    /// Peak correlation of the near-field vector with the best angular atom.
    pub peak: f64,
    /// Fraction of steering-vector energy captured by the best 4 atoms.
    pub top4_energy: f64,
}

pub fn coherence_plot(geometry: &ArrayGeometry, theta: f64, distances: &[f64]) -> Result<Vec<CoherenceCurve>> {
    let angular = build_angular_dictionary(geometry)?;
    distances
        .iter()
        .map(|&r| {
            let b = near_steering(geometry, theta, r)?;
            let mut mags: Vec<f64> = (0..angular.ncols())
                .map(|q| angular.column(q).dotc(&b).norm_sqr())
                .collect();
            mags.sort_by(|a, b| b.total_cmp(a));
            Ok(CoherenceCurve {
                distance: r,
                peak: mags[0].sqrt(),
                top4_energy: mags.iter().take(4).sum(),
            })
        })
        .collect()
}
