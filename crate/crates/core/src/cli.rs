//! Experiment configuration and the drivers behind each command-line verb.
//!
//! A configuration is a TOML document with four sections, every key optional:
//!
//! ```toml
//! [scenario]            # see ScenarioConfig
//! cells = 4
//! antennas = 8
//!
//! [algorithm]
//! theta = 0.9           # CVaR confidence level, [0, 1)
//! rho = 1.0             # ADMM penalty
//! zeta_mode = "inv-sqrt"  # ζ(m) = zeta / √m, or "constant"
//! zeta = 0.1
//! max_iters = 500
//! residual_tol = 1e-3
//! objective_tol = 1e-4
//! window = 50
//! oracle_samples = 500  # archive prefix used by the centralized solve
//! trials = 100          # randomization trials for beamformer extraction
//! trainer = "oracle"    # or "admm": how sweeps obtain their beamformers
//! parallel = true
//!
//! [run]
//! seed = 1
//! out = "out"
//! experiments = ["convergence"]
//! eval_samples = 10000  # held-out evaluation set
//! timing = true         # false writes wall_ms = 0 for byte-stable traces
//! # database = "archive.csv"  # train on a saved archive instead of sampling
//!
//! [sweep]
//! res_means = [0.0, 3.75, 7.5]
//! thetas = [0.0, 0.3, 0.6, 0.9]
//! antennas = [8, 12, 16]
//! sinr_targets = [0.25, 0.5, 0.75]
//! ```
//!
//! Unknown keys are rejected. Every random quantity comes from its own ChaCha stream
//! derived from `run.seed`, so channels, training archive, held-out set and each sweep
//! point are reproducible independently of one another and of the thread count.
//! Channels and archives are shared across sweep points (common random numbers).

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::central::{self, DEFAULT_ORACLE_SAMPLES};
use crate::conic::{self, SolverOptions, DEFAULT_TRIALS};
use crate::cvar::{empirical_var, CvarParams};
use crate::error::{Error, Result};
use crate::model::{transaction_cost, BeamformingSolution, SystemModel, QOS_TOL};
use crate::sadmm::{self, AdmmParams, IterationTrace, StepSchedule};
use crate::scenario::{load_database, make_channels, sample_states, save_database, SampleDatabase, ScenarioConfig};

/// Half-width of the band around the oracle used for the convergence summary.
pub const BAND: f64 = 0.10;

/// Default size of the held-out evaluation set.
pub const DEFAULT_EVAL_SAMPLES: usize = 10_000;

const STREAM_CHANNELS: u64 = 1;
const STREAM_TRAIN: u64 = 2;
const STREAM_EVAL: u64 = 3;
const STREAM_ADMM: u64 = 4;

/// Step-size family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZetaMode {
    Constant,
    InvSqrt,
}

/// How sweeps obtain the beamformers they evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Trainer {
    /// Centralized sample-average solve.
    Oracle,
    /// Stochastic ADMM.
    Admm,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgorithmConfig {
    pub theta: f64,
    pub rho: f64,
    pub zeta_mode: ZetaMode,
    pub zeta: f64,
    pub max_iters: usize,
    pub residual_tol: f64,
    pub objective_tol: f64,
    pub window: usize,
    pub oracle_samples: usize,
    pub trials: usize,
    pub trainer: Trainer,
    pub parallel: bool,
}

impl Default for AlgorithmConfig {
    fn default() -> Self {
        Self {
            theta: 0.9,
            rho: 1.0,
            zeta_mode: ZetaMode::InvSqrt,
            zeta: 0.1,
            max_iters: 500,
            residual_tol: 1e-3,
            objective_tol: 1e-4,
            window: 50,
            oracle_samples: DEFAULT_ORACLE_SAMPLES,
            trials: DEFAULT_TRIALS,
            trainer: Trainer::Oracle,
            parallel: true,
        }
    }
}

/// Experiments runnable from a configuration file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Convergence,
    ResSweep,
    ThetaCdf,
    NtSweep,
    SinrSweep,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub experiments: Vec<ExperimentKind>,
    pub eval_samples: usize,
    pub timing: bool,
    pub database: Option<PathBuf>,
    /// Write every assembled conic problem under `out/conic`.
    pub dump_conic: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            out: PathBuf::from("out"),
            experiments: vec![ExperimentKind::Convergence],
            eval_samples: DEFAULT_EVAL_SAMPLES,
            timing: true,
            database: None,
            dump_conic: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub res_means: Vec<f64>,
    pub thetas: Vec<f64>,
    pub antennas: Vec<usize>,
    pub sinr_targets: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            res_means: vec![0.0, 3.75, 7.5],
            thetas: vec![0.0, 0.3, 0.6, 0.9],
            antennas: vec![8, 12, 16],
            sinr_targets: vec![0.25, 0.5, 0.75],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub algorithm: AlgorithmConfig,
    pub run: RunConfig,
    pub sweep: SweepConfig,
}

fn check_theta(theta: f64) -> Result<()> {
    if (0.0..1.0).contains(&theta) {
        Ok(())
    } else {
        Err(Error::Config(format!("confidence level θ = {theta} outside [0, 1)")))
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        check_theta(self.algorithm.theta)?;
        self.admm_params(self.algorithm.theta)?;
        if self.algorithm.oracle_samples == 0 {
            return Err(Error::Config("oracle_samples must be at least 1".into()));
        }
        if self.run.eval_samples == 0 {
            return Err(Error::Config("eval_samples must be at least 1".into()));
        }
        Ok(())
    }

    /// Solver settings, with the dump directory resolved against `run.out`.
    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            dump_dir: self.run.dump_conic.then(|| self.run.out.join("conic")),
            ..SolverOptions::default()
        }
    }

    pub fn admm_params(&self, theta: f64) -> Result<AdmmParams> {
        let a = &self.algorithm;
        let schedule = match a.zeta_mode {
            ZetaMode::Constant => StepSchedule::Constant(a.zeta),
            ZetaMode::InvSqrt => StepSchedule::InvSqrt(a.zeta),
        };
        let params = AdmmParams {
            rho: a.rho,
            schedule,
            max_iters: a.max_iters,
            residual_tol: a.residual_tol,
            objective_tol: a.objective_tol,
            window: a.window,
            trials: a.trials,
            parallel: a.parallel,
            solver: self.solver_options(),
            ..AdmmParams::new(CvarParams::new(theta)?)
        };
        params.validate()?;
        Ok(params)
    }
}

/// Independent random stream `stream` for sweep point `point`.
pub fn derived_rng(seed: u64, stream: u64, point: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((stream << 32) | point);
    rng
}

/// Channels for `scenario`, drawn from the shared channel stream.
pub fn build_model(cfg: &ExperimentConfig, scenario: &ScenarioConfig) -> Result<SystemModel> {
    make_channels(scenario, &mut derived_rng(cfg.run.seed, STREAM_CHANNELS, 0))
}

/// Training archive: `run.database` when set, otherwise sampled from the shared stream.
pub fn training_database(cfg: &ExperimentConfig, scenario: &ScenarioConfig) -> Result<SampleDatabase> {
    match &cfg.run.database {
        Some(path) => load_database(path),
        None => sample_states(scenario, &mut derived_rng(cfg.run.seed, STREAM_TRAIN, 0), scenario.samples),
    }
}

/// Held-out evaluation set, disjoint in stream from the training archive.
pub fn evaluation_database(cfg: &ExperimentConfig, scenario: &ScenarioConfig) -> Result<SampleDatabase> {
    sample_states(scenario, &mut derived_rng(cfg.run.seed, STREAM_EVAL, 0), cfg.run.eval_samples)
}

/// Beamformers produced by a trainer.
#[derive(Debug, Clone)]
pub struct Trained {
    pub solution: BeamformingSolution,
    /// Training objective: SAA optimum, or final running average for ADMM.
    pub objective: f64,
}

/// Attaches beamformers to a relaxed solution, randomizing when it is not rank one.
pub fn finalize<R: rand::Rng + ?Sized>(
    model: &SystemModel,
    solution: BeamformingSolution,
    trials: usize,
    rng: &mut R,
) -> Result<BeamformingSolution> {
    if solution.beamformers().is_some() {
        return Ok(solution);
    }
    let eta = solution.eta().to_vec();
    Ok(conic::randomize_and_scale(model, solution.covariances(), trials, rng)?.with_eta(eta))
}

/// Centralized SAA solve on the first `oracle_samples` archive entries.
pub fn oracle(cfg: &ExperimentConfig, model: &SystemModel, db: &SampleDatabase, theta: f64, point: u64) -> Result<Trained> {
    let sol = central::solve_saa(
        model,
        &db.truncated(cfg.algorithm.oracle_samples),
        CvarParams::new(theta)?,
        &cfg.solver_options(),
    )?;
    let mut rng = derived_rng(cfg.run.seed, STREAM_ADMM, point);
    Ok(Trained {
        solution: finalize(model, sol.solution, cfg.algorithm.trials, &mut rng)?,
        objective: sol.objective,
    })
}

/// Stochastic ADMM run; returns the trace alongside the trained beamformers.
pub fn admm(
    cfg: &ExperimentConfig,
    model: &SystemModel,
    db: &SampleDatabase,
    theta: f64,
    point: u64,
) -> Result<(Trained, IterationTrace, bool)> {
    let params = cfg.admm_params(theta)?;
    let mut rng = derived_rng(cfg.run.seed, STREAM_ADMM, point);
    let out = sadmm::run(model, db, &params, &mut rng)?;
    let mut trace = out.trace;
    if !cfg.run.timing {
        trace.records.iter_mut().for_each(|r| r.wall_ms = 0.0);
    }
    let objective = trace.last().map_or(f64::NAN, |r| r.avg_objective);
    Ok((
        Trained {
            solution: out.solution,
            objective,
        },
        trace,
        out.converged,
    ))
}

/// Trains with the configured trainer.
pub fn train(cfg: &ExperimentConfig, model: &SystemModel, db: &SampleDatabase, theta: f64, point: u64) -> Result<Trained> {
    let trained = match cfg.algorithm.trainer {
        Trainer::Oracle => oracle(cfg, model, db, theta, point)?,
        Trainer::Admm => admm(cfg, model, db, theta, point)?.0,
    };
    let report = model.check_qos(&trained.solution, QOS_TOL)?;
    if !report.all_pass() {
        return Err(Error::Numerical(format!(
            "trained beamformers miss QoS at {:?}",
            report.failures()
        )));
    }
    Ok(trained)
}

/// Total grid cost `Σ_i C(P_i, s_i)` of fixed powers on every sample.
pub fn evaluate_costs(powers: &[f64], db: &SampleDatabase) -> Vec<f64> {
    db.samples()
        .iter()
        .map(|s| s.per_bs().iter().zip(powers).map(|(s, &p)| transaction_cost(p, s)).sum())
        .collect()
}

/// Summary statistics of a cost sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostStats {
    pub average: f64,
    pub max: f64,
    /// Empirical 99th percentile (lower quantile).
    pub p99: f64,
}

impl CostStats {
    pub fn of(costs: &[f64]) -> Result<Self> {
        if costs.is_empty() {
            return Err(Error::EmptyDatabase);
        }
        Ok(Self {
            average: costs.iter().sum::<f64>() / costs.len() as f64,
            max: costs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            p99: empirical_var(costs, 0.99)?,
        })
    }
}

fn write_costs(path: &Path, costs: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["sample_index", "cost"])?;
    for (n, c) in costs.iter().enumerate() {
        w.write_record([n.to_string(), c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

fn prepare_out(cfg: &ExperimentConfig) -> Result<&Path> {
    let out = cfg.run.out.as_path();
    fs::create_dir_all(out)
        .map_err(|e| Error::Config(format!("output directory {} not writable: {e}", out.display())))?;
    Ok(out)
}

/// Evaluates sweep points in order, concurrently when `algorithm.parallel` is set.
fn map_points<T: Send, U: Sync, F>(cfg: &ExperimentConfig, items: &[U], f: F) -> Result<Vec<T>>
where
    F: Fn(usize, &U) -> Result<T> + Sync + Send,
{
    if cfg.algorithm.parallel {
        items.par_iter().enumerate().map(|(n, u)| f(n, u)).collect()
    } else {
        items.iter().enumerate().map(|(n, u)| f(n, u)).collect()
    }
}

/// `θ = 0` is the risk-neutral Min-Cost scheme.
pub fn scheme_label(theta: f64) -> String {
    if theta == 0.0 {
        "Min-Cost".into()
    } else {
        format!("Min-CVaR({theta})")
    }
}

/// Writes the archive and channels of the configured scenario.
#[derive(Debug, Clone)]
pub struct GenReport {
    pub samples: usize,
    pub eval_samples: usize,
    pub out: PathBuf,
}

impl fmt::Display for GenReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "wrote {} training and {} held-out samples to {}",
            self.samples,
            self.eval_samples,
            self.out.display()
        )
    }
}

pub fn run_gen(cfg: &ExperimentConfig) -> Result<GenReport> {
    let out = prepare_out(cfg)?;
    let model = build_model(cfg, &cfg.scenario)?;
    let train = training_database(cfg, &cfg.scenario)?;
    let eval = evaluation_database(cfg, &cfg.scenario)?;
    fs::write(out.join("config.toml"), cfg.to_toml()?)?;
    save_database(&train, &out.join("database.csv"))?;
    save_database(&eval, &out.join("eval.csv"))?;
    let mut w = csv::Writer::from_path(out.join("channels.csv"))?;
    w.write_record(["from_bs", "to_bs", "user", "row", "col", "re", "im"])?;
    for j in 0..model.cells() {
        for i in 0..model.cells() {
            for k in 0..model.users() {
                let r = model.channel(j, i, k);
                for row in 0..r.nrows() {
                    for col in 0..r.ncols() {
                        let v = r[(row, col)];
                        w.write_record([
                            j.to_string(),
                            i.to_string(),
                            k.to_string(),
                            row.to_string(),
                            col.to_string(),
                            v.re.to_string(),
                            v.im.to_string(),
                        ])?;
                    }
                }
            }
        }
    }
    w.flush()?;
    Ok(GenReport {
        samples: train.len(),
        eval_samples: eval.len(),
        out: out.to_path_buf(),
    })
}

/// Centralized solve of the configured scenario.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub objective: f64,
    pub powers: Vec<f64>,
    pub eta: Vec<f64>,
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SAA objective {:.6}; powers", self.objective)?;
        for p in &self.powers {
            write!(f, " {p:.4}")?;
        }
        Ok(())
    }
}

pub fn run_oracle(cfg: &ExperimentConfig) -> Result<OracleReport> {
    let out = prepare_out(cfg)?;
    let model = build_model(cfg, &cfg.scenario)?;
    let db = training_database(cfg, &cfg.scenario)?;
    let trained = oracle(cfg, &model, &db, cfg.algorithm.theta, 0)?;
    let sol = &trained.solution;
    let rows: Vec<Vec<String>> = (0..model.cells())
        .map(|i| vec![i.to_string(), sol.power(i).to_string(), sol.eta()[i].to_string()])
        .collect();
    write_table(&out.join("oracle.csv"), &["bs_index", "power", "eta"], &rows)?;
    if let Some(ws) = sol.beamformers() {
        let mut w = csv::Writer::from_path(out.join("beamformers.csv"))?;
        w.write_record(["bs_index", "user", "antenna", "re", "im"])?;
        for i in 0..model.cells() {
            for k in 0..model.users() {
                for (n, v) in ws[model.link(i, k)].iter().enumerate() {
                    w.write_record([i.to_string(), k.to_string(), n.to_string(), v.re.to_string(), v.im.to_string()])?;
                }
            }
        }
        w.flush()?;
    }
    Ok(OracleReport {
        objective: trained.objective,
        powers: sol.powers().to_vec(),
        eta: sol.eta().to_vec(),
    })
}

/// First round from which the running average stays within `band` of `target`.
pub fn band_entry(trace: &IterationTrace, target: f64, band: f64) -> Option<usize> {
    let inside = |v: f64| (v - target).abs() <= band * target.abs();
    let mut entry = None;
    for r in &trace.records {
        match (inside(r.avg_objective), entry) {
            (true, None) => entry = Some(r.iter),
            (false, _) => entry = None,
            _ => {}
        }
    }
    entry
}

/// ADMM trace against the SAA oracle on one instance.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub oracle_objective: f64,
    pub final_avg: f64,
    pub band_entry: Option<usize>,
    pub iterations: usize,
    pub converged: bool,
    pub final_residual: f64,
    /// Mean instantaneous objective over the last `window` rounds.
    pub tail_mean: f64,
    pub trace: IterationTrace,
}

impl ConvergenceReport {
    pub fn gap(&self) -> f64 {
        (self.final_avg - self.oracle_objective) / self.oracle_objective
    }
}

impl fmt::Display for ConvergenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let entry = self.band_entry.map_or("never".into(), |m| format!("round {m}"));
        write!(
            f,
            "oracle {:.4}, running average {:.4} ({:+.2}%) after {} rounds, ±{}% band entered {}, residual {:.3e}, converged {}",
            self.oracle_objective,
            self.final_avg,
            100.0 * self.gap(),
            self.iterations,
            100.0 * BAND,
            entry,
            self.final_residual,
            self.converged
        )
    }
}

pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    let out = prepare_out(cfg)?;
    let model = build_model(cfg, &cfg.scenario)?;
    let db = training_database(cfg, &cfg.scenario)?;
    let theta = cfg.algorithm.theta;
    let reference = oracle(cfg, &model, &db, theta, 0)?;
    let (trained, trace, converged) = admm(cfg, &model, &db, theta, 0)?;
    trace.save(&out.join("convergence_trace.csv"))?;
    let last = trace.last().ok_or_else(|| Error::Numerical("empty trace".into()))?;
    let tail = trace.records.iter().rev().take(cfg.algorithm.window).collect::<Vec<_>>();
    let report = ConvergenceReport {
        oracle_objective: reference.objective,
        final_avg: trained.objective,
        band_entry: band_entry(&trace, reference.objective, BAND),
        iterations: last.iter,
        converged,
        final_residual: last.residual,
        tail_mean: tail.iter().map(|r| r.inst_objective).sum::<f64>() / tail.len() as f64,
        trace: trace.clone(),
    };
    write_table(
        &out.join("convergence_summary.csv"),
        &[
            "oracle_objective",
            "final_avg_objective",
            "relative_gap",
            "band_entry",
            "iterations",
            "converged",
            "final_residual",
            "tail_mean",
        ],
        &[vec![
            report.oracle_objective.to_string(),
            report.final_avg.to_string(),
            report.gap().to_string(),
            report.band_entry.map_or(String::new(), |m| m.to_string()),
            report.iterations.to_string(),
            report.converged.to_string(),
            report.final_residual.to_string(),
            report.tail_mean.to_string(),
        ]],
    )?;
    info!("{report}");
    Ok(report)
}

/// One row of a sweep table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub label: String,
    /// Swept value (RES mean, θ, Nt or γ); `None` for the No-RES baseline.
    pub value: Option<f64>,
    pub stats: CostStats,
    /// Raw held-out costs backing `stats`.
    pub costs: Vec<f64>,
}

impl SweepRow {
    fn new(label: String, value: Option<f64>, costs: Vec<f64>) -> Result<Self> {
        Ok(Self {
            label,
            value,
            stats: CostStats::of(&costs)?,
            costs,
        })
    }

    fn cells(&self) -> Vec<String> {
        vec![
            self.label.clone(),
            self.value.map_or(String::new(), |v| v.to_string()),
            self.stats.average.to_string(),
            self.stats.max.to_string(),
            self.stats.p99.to_string(),
        ]
    }
}

/// Held-out cost table for one sweep.
#[derive(Debug, Clone)]
pub struct SweepReport {
    pub name: &'static str,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    /// Rows with the given label, in sweep order.
    pub fn series(&self, label: &str) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.label == label).collect()
    }

    fn save(&self, out: &Path) -> Result<()> {
        let mut table = Vec::with_capacity(self.rows.len());
        for (n, row) in self.rows.iter().enumerate() {
            let file = format!("{}_costs_{n}.csv", self.name);
            write_costs(&out.join(&file), &row.costs)?;
            let mut cells = row.cells();
            cells.push(file);
            table.push(cells);
        }
        write_table(
            &out.join(format!("{}.csv", self.name)),
            &["label", "value", "average", "max", "p99", "costs_file"],
            &table,
        )
    }
}

impl fmt::Display for SweepReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {:<20} {:>10} {:>12} {:>12} {:>12}", self.name, "label", "value", "average", "max", "p99")?;
        for r in &self.rows {
            writeln!(
                f,
                "{}: {:<20} {:>10} {:>12.4} {:>12.4} {:>12.4}",
                self.name,
                r.label,
                r.value.map_or("-".into(), |v| v.to_string()),
                r.stats.average,
                r.stats.max,
                r.stats.p99
            )?;
        }
        Ok(())
    }
}

fn require_nonempty<T>(values: &[T], what: &str) -> Result<()> {
    if values.is_empty() {
        Err(Error::Config(format!("{what} list is empty")))
    } else {
        Ok(())
    }
}

/// Average held-out cost per RES mean, plus the No-RES baseline as the last row.
pub fn run_res_sweep(cfg: &ExperimentConfig, res_means: &[f64]) -> Result<SweepReport> {
    require_nonempty(res_means, "RES mean")?;
    if let Some(bad) = res_means.iter().find(|m| !(**m >= 0.0 && m.is_finite())) {
        return Err(Error::Config(format!("RES mean {bad} must be >= 0")));
    }
    let out = prepare_out(cfg)?;
    let model = build_model(cfg, &cfg.scenario)?;
    let mut rows = map_points(cfg, res_means, |n, &mean| {
        let scenario = ScenarioConfig {
            res_mean: mean,
            ..cfg.scenario.clone()
        };
        let db = training_database(cfg, &scenario)?;
        let trained = train(cfg, &model, &db, cfg.algorithm.theta, n as u64)?;
        let eval = evaluation_database(cfg, &scenario)?;
        SweepRow::new(
            scheme_label(cfg.algorithm.theta),
            Some(mean),
            evaluate_costs(trained.solution.powers(), &eval),
        )
    })?;
    let base = central::solve_min_power(&model, &cfg.solver_options())?;
    let eval = evaluation_database(cfg, &cfg.scenario)?.with_harvested(0.0)?;
    rows.push(SweepRow::new("No-RES".into(), None, evaluate_costs(base.powers(), &eval))?);
    let report = SweepReport { name: "res_sweep", rows };
    report.save(out)?;
    Ok(report)
}

/// Held-out cost distribution per confidence level.
pub fn run_theta_cdf(cfg: &ExperimentConfig, thetas: &[f64]) -> Result<SweepReport> {
    require_nonempty(thetas, "θ")?;
    thetas.iter().try_for_each(|&t| check_theta(t))?;
    let out = prepare_out(cfg)?;
    let model = build_model(cfg, &cfg.scenario)?;
    let db = training_database(cfg, &cfg.scenario)?;
    let eval = evaluation_database(cfg, &cfg.scenario)?;
    let rows = map_points(cfg, thetas, |n, &theta| {
        let trained = train(cfg, &model, &db, theta, n as u64)?;
        SweepRow::new(scheme_label(theta), Some(theta), evaluate_costs(trained.solution.powers(), &eval))
    })?;
    let report = SweepReport { name: "theta_cdf", rows };
    report.save(out)?;
    Ok(report)
}

/// Min-CVaR (configured θ) and Min-Cost rows for each scenario variant.
fn two_scheme_sweep<U: Sync>(
    cfg: &ExperimentConfig,
    name: &'static str,
    values: &[U],
    scenario_of: impl Fn(&U) -> ScenarioConfig + Sync + Send,
    value_of: impl Fn(&U) -> f64 + Sync + Send,
) -> Result<SweepReport> {
    let out = prepare_out(cfg)?;
    let schemes = [cfg.algorithm.theta, 0.0];
    let pairs = map_points(cfg, values, |n, v| {
        let scenario = scenario_of(v);
        let model = build_model(cfg, &scenario)?;
        let db = training_database(cfg, &scenario)?;
        let eval = evaluation_database(cfg, &scenario)?;
        schemes
            .iter()
            .enumerate()
            .map(|(s, &theta)| {
                let trained = train(cfg, &model, &db, theta, (2 * n + s) as u64)?;
                let label = if s == 0 { "Min-CVaR".to_string() } else { "Min-Cost".to_string() };
                SweepRow::new(label, Some(value_of(v)), evaluate_costs(trained.solution.powers(), &eval))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let report = SweepReport {
        name,
        rows: pairs.into_iter().flatten().collect(),
    };
    report.save(out)?;
    Ok(report)
}

pub fn run_nt_sweep(cfg: &ExperimentConfig, antennas: &[usize]) -> Result<SweepReport> {
    require_nonempty(antennas, "antenna")?;
    if antennas.contains(&0) {
        return Err(Error::Config("antenna count must be at least 1".into()));
    }
    two_scheme_sweep(
        cfg,
        "nt_sweep",
        antennas,
        |&nt| ScenarioConfig {
            antennas: nt,
            ..cfg.scenario.clone()
        },
        |&nt| nt as f64,
    )
}

pub fn run_sinr_sweep(cfg: &ExperimentConfig, targets: &[f64]) -> Result<SweepReport> {
    require_nonempty(targets, "SINR target")?;
    if let Some(bad) = targets.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
        return Err(Error::Config(format!("SINR target {bad} must be > 0")));
    }
    two_scheme_sweep(
        cfg,
        "sinr_sweep",
        targets,
        |&gamma| ScenarioConfig {
            sinr_target: gamma,
            ..cfg.scenario.clone()
        },
        |&gamma| gamma,
    )
}

/// Runs every experiment listed under `run.experiments`, writing a report per line.
pub fn run_listed<W: Write>(cfg: &ExperimentConfig, mut log: W) -> Result<()> {
    for kind in &cfg.run.experiments {
        match kind {
            ExperimentKind::Convergence => writeln!(log, "{}", run_convergence(cfg)?)?,
            ExperimentKind::ResSweep => write!(log, "{}", run_res_sweep(cfg, &cfg.sweep.res_means)?)?,
            ExperimentKind::ThetaCdf => write!(log, "{}", run_theta_cdf(cfg, &cfg.sweep.thetas)?)?,
            ExperimentKind::NtSweep => write!(log, "{}", run_nt_sweep(cfg, &cfg.sweep.antennas)?)?,
            ExperimentKind::SinrSweep => write!(log, "{}", run_sinr_sweep(cfg, &cfg.sweep.sinr_targets)?)?,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sadmm::IterationRecord;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = ExperimentConfig::parse("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.algorithm.zeta_mode, ZetaMode::InvSqrt);
    }

    #[test]
    fn round_trips_through_toml() {
        let mut cfg = ExperimentConfig::default();
        cfg.algorithm.zeta_mode = ZetaMode::Constant;
        cfg.run.experiments = vec![ExperimentKind::ThetaCdf, ExperimentKind::NtSweep];
        cfg.run.database = Some(PathBuf::from("db.csv"));
        assert_eq!(ExperimentConfig::parse(&cfg.to_toml().unwrap()).unwrap(), cfg);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        for text in [
            "[algorithm]\nthetaa = 0.5",
            "[bogus]\nx = 1",
            "[algorithm]\ntheta = 1.0",
            "[algorithm]\nrho = 0.0",
            "[algorithm]\nzeta_mode = \"linear\"",
            "[scenario]\nantennas = 0",
            "[run]\nexperiments = [\"plot\"]",
            "[run]\neval_samples = 0",
        ] {
            let err = ExperimentConfig::parse(text).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{text}: {err}");
        }
    }

    #[test]
    fn missing_file_is_a_config_error() {
        let err = ExperimentConfig::load(Path::new("/nonexistent/cfg.toml")).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn derived_streams_are_distinct_and_reproducible() {
        use rand::RngCore;
        let a = derived_rng(5, STREAM_TRAIN, 0).next_u64();
        assert_eq!(a, derived_rng(5, STREAM_TRAIN, 0).next_u64());
        assert_ne!(a, derived_rng(5, STREAM_EVAL, 0).next_u64());
        assert_ne!(a, derived_rng(5, STREAM_TRAIN, 1).next_u64());
        assert_ne!(a, derived_rng(6, STREAM_TRAIN, 0).next_u64());
    }

    #[test]
    fn cost_stats_by_hand() {
        let costs: Vec<f64> = (1..=100).map(f64::from).collect();
        let s = CostStats::of(&costs).unwrap();
        assert_eq!(s.average, 50.5);
        assert_eq!(s.max, 100.0);
        assert_eq!(s.p99, 99.0);
        assert!(CostStats::of(&[]).is_err());
    }

    #[test]
    fn band_entry_requires_staying_inside() {
        let trace = IterationTrace {
            records: [20.0, 10.5, 12.0, 10.9, 9.5, 10.2]
                .iter()
                .enumerate()
                .map(|(n, &avg)| IterationRecord {
                    iter: n + 1,
                    sample_index: 0,
                    inst_objective: avg,
                    avg_objective: avg,
                    residual: 0.0,
                    wall_ms: 0.0,
                    max_subgradient_sq: 0.0,
                })
                .collect(),
        };
        assert_eq!(band_entry(&trace, 10.0, 0.1), Some(4));
        assert_eq!(band_entry(&trace, 10.0, 0.01), None);
        assert_eq!(band_entry(&trace, 10.0, 1.0), Some(1));
    }

    #[test]
    fn labels() {
        assert_eq!(scheme_label(0.0), "Min-Cost");
        assert_eq!(scheme_label(0.9), "Min-CVaR(0.9)");
    }

    #[test]
    fn sweep_inputs_are_validated() {
        let cfg = ExperimentConfig::default();
        assert!(matches!(run_res_sweep(&cfg, &[]), Err(Error::Config(_))));
        assert!(matches!(run_res_sweep(&cfg, &[-1.0]), Err(Error::Config(_))));
        assert!(matches!(run_theta_cdf(&cfg, &[0.0, 1.0]), Err(Error::Config(_))));
        assert!(matches!(run_nt_sweep(&cfg, &[8, 0]), Err(Error::Config(_))));
        assert!(matches!(run_sinr_sweep(&cfg, &[0.0]), Err(Error::Config(_))));
    }

    #[test]
    fn evaluate_costs_sums_over_bss() {
        use crate::model::BsState;
        use crate::scenario::RandomState;
        let state = RandomState::new(vec![
            BsState::new(2.0, 1.0, 1.0).unwrap(),
            BsState::new(2.0, 1.0, 5.0).unwrap(),
        ])
        .unwrap();
        let db = SampleDatabase::single(state);
        assert_eq!(evaluate_costs(&[3.0, 3.0], &db), vec![2.0 * 2.0 - 2.0]);
    }
}
