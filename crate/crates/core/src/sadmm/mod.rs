//! Distributed stochastic ADMM over the BS network.
//!
//! Each round of [`run`] is synchronous:
//!
//! 1. one archive sample is drawn (uniformly, with replacement) and shared by all BSs;
//! 2. every BS linearizes its CVaR integrand at its current `(P_i, η_i)` on that sample,
//!    solves its local beamforming subproblem, and steps `η_i`;
//! 3. every BS broadcasts `(q_i, λ_i)`;
//! 4. every BS recomputes the public vector `q̄` from the broadcasts;
//! 5. every BS updates its duals.
//!
//! Step 2 runs agents in parallel; everything else is deterministic given the
//! broadcasts, so the run is reproducible for a seed regardless of thread count.

mod agent;
mod layout;

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use log::{debug, info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::conic::{randomize_and_scale, SolverOptions, DEFAULT_TRIALS};
use crate::cvar::{f_value, subgradient, CvarParams};
use crate::error::{Error, Result};
use crate::model::{BeamformingSolution, CMatrix, SystemModel};
use crate::scenario::SampleDatabase;

pub use agent::{dual_update, local_eta_update, local_primal_update, AgentState, PrimalUpdate};
pub use layout::ConsensusLayout;

/// Step size `ζ(m)` for round `m ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    Constant(f64),
    /// `ζ₀ / √m`.
    InvSqrt(f64),
}

impl StepSchedule {
    pub fn at(&self, m: usize) -> f64 {
        match *self {
            StepSchedule::Constant(z) => z,
            StepSchedule::InvSqrt(z) => z / (m.max(1) as f64).sqrt(),
        }
    }

    fn validate(&self) -> Result<()> {
        let (StepSchedule::Constant(z) | StepSchedule::InvSqrt(z)) = *self;
        if z > 0.0 && z.is_finite() {
            Ok(())
        } else {
            Err(Error::Config(format!("step size {z} must be positive")))
        }
    }
}

impl Default for StepSchedule {
    fn default() -> Self {
        StepSchedule::InvSqrt(0.1)
    }
}

/// Algorithm settings.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmParams {
    pub cvar: CvarParams,
    pub rho: f64,
    pub schedule: StepSchedule,
    pub max_iters: usize,
    /// Stop once the consensus residual is at most this (W)…
    pub residual_tol: f64,
    /// …and the running average moved by at most this fraction over `window` rounds.
    pub objective_tol: f64,
    pub window: usize,
    /// Randomization trials for the final beamformer extraction.
    pub trials: usize,
    /// Solve the per-BS subproblems on the rayon pool.
    pub parallel: bool,
    pub solver: SolverOptions,
}

impl AdmmParams {
    pub fn new(cvar: CvarParams) -> Self {
        Self {
            cvar,
            rho: 1.0,
            schedule: StepSchedule::default(),
            max_iters: 500,
            residual_tol: 1e-3,
            objective_tol: 1e-4,
            window: 50,
            trials: DEFAULT_TRIALS,
            parallel: true,
            solver: SolverOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::Config(format!("penalty ρ = {} must be positive", self.rho)));
        }
        if self.max_iters == 0 || self.window == 0 {
            return Err(Error::Config("max_iters and window must be positive".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("randomization trials must be positive".into()));
        }
        Ok(())
    }
}

/// One round of the trace.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub sample_index: usize,
    /// `Σ_i f_i(P_i, η_i, s)` at the iterate entering the round, on the round's sample.
    pub inst_objective: f64,
    /// Mean of `inst_objective` over rounds `1..=iter`.
    pub avg_objective: f64,
    /// `Σ_i ‖B_i q̄ − q_i‖₂` after the round.
    pub residual: f64,
    pub wall_ms: f64,
    /// Largest `(∂f/∂P)² + (∂f/∂η)²` over the BSs in this round.
    pub max_subgradient_sq: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    /// CSV with columns `iter,sample_index,inst_objective,avg_objective,residual,wall_ms`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iter", "sample_index", "inst_objective", "avg_objective", "residual", "wall_ms"])?;
        for r in &self.records {
            w.write_record([
                r.iter.to_string(),
                r.sample_index.to_string(),
                r.inst_objective.to_string(),
                r.avg_objective.to_string(),
                r.residual.to_string(),
                format!("{:.3}", r.wall_ms),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Result of [`run`].
#[derive(Debug, Clone)]
pub struct AdmmOutcome {
    /// QoS-feasible beamformers from the reported iterate.
    pub solution: BeamformingSolution,
    pub trace: IterationTrace,
    pub converged: bool,
    /// Round whose covariances were reported: the last one when converged, else the
    /// one with the smallest consensus residual.
    pub reported_iteration: usize,
    /// Agent states after the final round.
    pub agents: Vec<AgentState>,
}

/// What each BS broadcasts after its local step.
#[derive(Debug, Clone)]
struct Message {
    q: Vec<f64>,
    lambda: Vec<f64>,
}

struct Snapshot {
    iteration: usize,
    residual: f64,
    blocks: Vec<CMatrix>,
    eta: Vec<f64>,
}

impl Snapshot {
    fn of(agents: &[AgentState], iteration: usize, residual: f64) -> Self {
        Self {
            iteration,
            residual,
            blocks: agents.iter().flat_map(|a| a.blocks.iter().cloned()).collect(),
            eta: agents.iter().map(|a| a.eta).collect(),
        }
    }
}

/// Runs stochastic ADMM until the stop rule fires or `params.max_iters` rounds pass.
///
/// The random stream drives the per-round sample draws; the final randomization uses
/// a stream derived from it so that the draws do not depend on the round count.
pub fn run<R: Rng + ?Sized>(
    model: &SystemModel,
    db: &SampleDatabase,
    params: &AdmmParams,
    rng: &mut R,
) -> Result<AdmmOutcome> {
    params.validate()?;
    if db.is_empty() {
        return Err(Error::EmptyDatabase);
    }
    if db.cells() != model.cells() {
        return Err(Error::Instance(format!(
            "database has {} BSs, model has {}",
            db.cells(),
            model.cells()
        )));
    }
    let layout = ConsensusLayout::new(model.cells(), model.users())?;
    let mut extract_rng = ChaCha8Rng::seed_from_u64(rng.next_u64());
    let mut agents: Vec<AgentState> = (0..model.cells()).map(|i| AgentState::new(i, &layout)).collect();
    let mut trace = IterationTrace::default();
    let mut best: Option<Snapshot> = None;
    let mut converged = false;
    let mut sum = 0.0;

    for m in 1..=params.max_iters {
        let started = Instant::now();
        let sample_index = rng.random_range(0..db.len());
        let sample = db.get(sample_index);
        let zeta = params.schedule.at(m);

        let mut inst = 0.0;
        let mut max_sq = 0.0_f64;
        let grads: Vec<(f64, f64)> = agents
            .iter()
            .map(|a| {
                let s = sample.bs(a.index);
                inst += f_value(a.power, a.eta, s, params.cvar);
                let g = subgradient(a.power, a.eta, s, params.cvar);
                max_sq = max_sq.max(g.0 * g.0 + g.1 * g.1);
                g
            })
            .collect();

        let step = |a: &AgentState| {
            local_primal_update(a, &layout, model, grads[a.index].0, params.rho, zeta, &params.solver)
        };
        let updates: Vec<PrimalUpdate> = if params.parallel {
            agents.par_iter().map(step).collect::<Result<_>>()?
        } else {
            agents.iter().map(step).collect::<Result<_>>()?
        };

        let mut messages = Vec::with_capacity(agents.len());
        for (a, up) in agents.iter_mut().zip(updates) {
            a.power = up.power;
            a.q = up.q;
            a.blocks = up.blocks;
            a.eta = local_eta_update(a.eta, grads[a.index].1, zeta);
            messages.push(Message {
                q: a.q.clone(),
                lambda: a.lambda.clone(),
            });
        }

        let qs: Vec<Vec<f64>> = messages.iter().map(|msg| msg.q.clone()).collect();
        let lambdas: Vec<Vec<f64>> = messages.iter().map(|msg| msg.lambda.clone()).collect();
        for a in agents.iter_mut() {
            a.qbar = layout.public_update(&qs, &lambdas, params.rho)?;
            let bq = layout.apply(a.index, &a.qbar);
            a.lambda = dual_update(&a.lambda, &a.q, &bq, params.rho);
            a.iteration = m;
        }
        debug_assert!(agents.windows(2).all(|w| w[0].qbar == w[1].qbar));

        let residual = layout.residual(&agents[0].qbar, &qs);
        sum += inst;
        let avg = sum / m as f64;
        trace.records.push(IterationRecord {
            iter: m,
            sample_index,
            inst_objective: inst,
            avg_objective: avg,
            residual,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
            max_subgradient_sq: max_sq,
        });
        debug!("round {m}: sample {sample_index}, f {inst:.4}, avg {avg:.4}, residual {residual:.3e}");

        if best.as_ref().is_none_or(|b| residual < b.residual) {
            best = Some(Snapshot::of(&agents, m, residual));
        }
        if m > params.window && residual <= params.residual_tol {
            let before = trace.records[m - 1 - params.window].avg_objective;
            if (avg - before).abs() <= params.objective_tol * avg.abs().max(f64::MIN_POSITIVE) {
                converged = true;
                break;
            }
        }
    }

    let last_iter = trace.len();
    let report = if converged {
        info!("stochastic ADMM converged after {last_iter} rounds");
        Snapshot::of(&agents, last_iter, trace.records[last_iter - 1].residual)
    } else {
        let b = best.expect("at least one round ran");
        warn!(
            "stochastic ADMM did not meet the stop rule in {last_iter} rounds; reporting round {} (residual {:.3e})",
            b.iteration, b.residual
        );
        b
    };
    let solution = randomize_and_scale(model, &report.blocks, params.trials, &mut extract_rng)?.with_eta(report.eta);
    Ok(AdmmOutcome {
        solution,
        trace,
        converged,
        reported_iteration: report.iteration,
        agents,
    })
}
