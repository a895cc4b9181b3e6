//! Centralized reference solvers.
//!
//! [`solve_saa`] replaces the expectation in the CVaR objective by the empirical
//! mean over a sample archive and solves the resulting relaxation in one conic
//! program. The hinge `[f̂ − η]^+` is written with one epigraph variable per BS and
//! sample:
//!
//! ```text
//! t_is ≥ 0,   t_is ≥ a_s (P_i − e_is) − η_i,   t_is ≥ b_s (P_i − e_is) − η_i
//! ```
//!
//! which is exact because `f̂` is the maximum of its buy and sell pieces.
//! [`solve_socp_fastpath`] solves the same objective directly over beamforming
//! vectors when every channel covariance has rank one, and
//! [`solve_no_res_baseline`] minimizes plain sum power.

use log::{debug, info};

use crate::conic::{
    self, extract_rank_one, AffineExpr, ConicProblem, ConicSolution, PsdBlock, Relation, Scalar, SolverOptions,
    RANK_ONE_TOL,
};
use crate::cvar::{empirical_f, CvarParams};
use crate::error::{Error, Result};
use crate::model::{hermitian_eigenvalues, transaction_cost, BeamformingSolution, CVector, SystemModel, C64};
use crate::scenario::SampleDatabase;

/// Samples used by oracle solves unless told otherwise.
pub const DEFAULT_ORACLE_SAMPLES: usize = 500;

/// Eigenvalue ratio below which a channel covariance counts as rank one.
pub const CHANNEL_RANK_ONE_TOL: f64 = 1e-8;

/// Optimal solution of a centralized solve.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub solution: BeamformingSolution,
    /// Optimal value reported by the solver.
    pub objective: f64,
}

/// Min-sum-power beamformers and the buy-everything cost they incur on each sample.
#[derive(Debug, Clone)]
pub struct Baseline {
    pub solution: BeamformingSolution,
    /// `Σ_i a_is P_i` per sample.
    pub costs: Vec<f64>,
}

fn check_database(model: &SystemModel, db: &SampleDatabase) -> Result<()> {
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
    Ok(())
}

/// Covariance blocks with per-user QoS constraints and per-BS power variables.
struct Relaxation {
    blocks: Vec<PsdBlock>,
    power: Vec<Scalar>,
}

impl Relaxation {
    fn build(problem: &mut ConicProblem, model: &SystemModel) -> Self {
        let (cells, users, n) = (model.cells(), model.users(), model.antennas());
        let blocks: Vec<PsdBlock> = (0..cells * users).map(|_| problem.psd(n)).collect();
        for i in 0..cells {
            for k in 0..users {
                let mut lhs = AffineExpr::new();
                for j in 0..cells {
                    let r = model.channel(j, i, k);
                    for l in 0..users {
                        let coef = if (j, l) == (i, k) { 1.0 / model.target(i, k) } else { -1.0 };
                        lhs = lhs.plus_trace(blocks[model.link(j, l)], r.scale(coef));
                    }
                }
                problem.constrain(lhs, Relation::Ge, model.noise(i, k));
            }
        }
        let id = crate::model::CMatrix::identity(n, n);
        let power = (0..cells)
            .map(|i| {
                let p = problem.free();
                let mut e = AffineExpr::var(p);
                for k in 0..users {
                    e = e.plus_trace(blocks[model.link(i, k)], id.scale(-1.0));
                }
                problem.constrain(e, Relation::Eq, 0.0);
                p
            })
            .collect();
        Self { blocks, power }
    }

    fn solution(&self, sol: &ConicSolution, cells: usize, users: usize, eta: Vec<f64>) -> Result<BeamformingSolution> {
        let covs = self.blocks.iter().map(|&b| sol.block(b).clone()).collect::<Vec<_>>();
        let extracted: Vec<_> = covs.iter().map(|w| extract_rank_one(w, RANK_ONE_TOL)).collect();
        let ratio = extracted.iter().map(|r| r.ratio).fold(0.0, f64::max);
        let out = BeamformingSolution::from_covariances(cells, users, covs, eta)?;
        if extracted.iter().all(|r| r.ok) {
            Ok(out.with_beamformers(extracted.into_iter().map(|r| r.vector).collect(), ratio))
        } else {
            debug!("relaxed solution not rank one (worst ratio {ratio:.3e})");
            Ok(out)
        }
    }
}

/// Adds `Σ_i [η_i + Σ_s t_is / ((1 − θ) n)]` with the hinge epigraph; returns the `η_i`.
fn add_saa_objective(problem: &mut ConicProblem, power: &[Scalar], db: &SampleDatabase, params: CvarParams) -> Vec<Scalar> {
    let weight = params.tail_weight() / db.len() as f64;
    power
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let eta = problem.free();
            problem.minimize(AffineExpr::var(eta));
            for sample in db.samples() {
                let s = sample.bs(i);
                let t = problem.nonneg();
                problem.minimize(AffineExpr::new().plus(t, weight));
                for price in [s.buy(), s.sell()] {
                    // t + η − price·P ≥ −price·e
                    let e = AffineExpr::var(t).plus(eta, 1.0).plus(p, -price);
                    problem.constrain(e, Relation::Ge, -price * s.harvested());
                }
            }
            eta
        })
        .collect()
}

/// Centralized sample-average solve of the relaxed CVaR problem.
///
/// Beamformers are attached when every optimal block passes the rank-one test;
/// otherwise only covariances are returned (see [`conic::randomize_and_scale`]).
pub fn solve_saa(
    model: &SystemModel,
    db: &SampleDatabase,
    params: CvarParams,
    opts: &SolverOptions,
) -> Result<OracleSolution> {
    check_database(model, db)?;
    let mut problem = ConicProblem::new();
    let relax = Relaxation::build(&mut problem, model);
    let eta = add_saa_objective(&mut problem, &relax.power, db, params);
    let sol = conic::solve(&problem, opts)?.into_result()?;
    info!(
        "SAA oracle: {} samples, objective {:.6}, {} iterations",
        db.len(),
        sol.objective,
        sol.iterations
    );
    let eta = eta.iter().map(|&e| sol.value(e)).collect();
    Ok(OracleSolution {
        solution: relax.solution(&sol, model.cells(), model.users(), eta)?,
        objective: sol.objective,
    })
}

/// Minimum total transmit power meeting every QoS target.
pub fn solve_min_power(model: &SystemModel, opts: &SolverOptions) -> Result<BeamformingSolution> {
    let mut problem = ConicProblem::new();
    let relax = Relaxation::build(&mut problem, model);
    for &p in &relax.power {
        problem.minimize(AffineExpr::var(p));
    }
    let sol = conic::solve(&problem, opts)?.into_result()?;
    relax.solution(&sol, model.cells(), model.users(), vec![0.0; model.cells()])
}

/// Sum-power beamformers priced on every sample as if nothing were harvested.
pub fn solve_no_res_baseline(model: &SystemModel, db: &SampleDatabase, opts: &SolverOptions) -> Result<Baseline> {
    check_database(model, db)?;
    let solution = solve_min_power(model, opts)?;
    let costs = db
        .samples()
        .iter()
        .map(|sample| {
            sample
                .per_bs()
                .iter()
                .zip(solution.powers())
                .map(|(s, &p)| Ok(transaction_cost(p, &s.with_harvested(0.0)?)))
                .sum::<Result<f64>>()
        })
        .collect::<Result<_>>()?;
    Ok(Baseline { solution, costs })
}

/// `h` with `R = h h^H`, or `None` when `R` is not rank one.
pub fn rank_one_factor(r: &crate::model::CMatrix) -> Option<CVector> {
    let eig = hermitian_eigenvalues(r);
    let top = eig.last().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return Some(CVector::zeros(r.nrows()));
    }
    let second = if eig.len() > 1 { eig[eig.len() - 2].max(0.0) } else { 0.0 };
    (second / top <= CHANNEL_RANK_ONE_TOL).then(|| extract_rank_one(r, 1.0).vector)
}

/// Real and imaginary parts of `h^H w` as affine expressions in `(Re w, Im w)`.
fn inner(h: &CVector, re: &[Scalar], im: &[Scalar]) -> (AffineExpr, AffineExpr) {
    let mut real = AffineExpr::new();
    let mut imag = AffineExpr::new();
    for (n, hn) in h.iter().enumerate() {
        // conj(h) w = (hr − i hi)(wr + i wi)
        real = real.plus(re[n], hn.re).plus(im[n], hn.im);
        imag = imag.plus(im[n], hn.re).plus(re[n], -hn.im);
    }
    (real, imag)
}

/// Sample-average solve over beamforming vectors for rank-one channels.
///
/// With `R_jik = h_jik h_jik^H` each QoS constraint becomes the cone
/// `Re(h_iik^H w_ik) / √γ_ik ≥ ‖(h_jik^H w_jl for (j,l) ≠ (i,k), σ_ik)‖`, the common
/// phase of `w_ik` being fixed so that the desired term is real. Powers enter through
/// the rotated cone `Σ_k ‖w_ik‖² ≤ P_i`.
pub fn solve_socp_fastpath(
    model: &SystemModel,
    db: &SampleDatabase,
    params: CvarParams,
    opts: &SolverOptions,
) -> Result<OracleSolution> {
    check_database(model, db)?;
    let (cells, users, n) = (model.cells(), model.users(), model.antennas());
    let mut h = Vec::with_capacity(cells * cells * users);
    for j in 0..cells {
        for i in 0..cells {
            for k in 0..users {
                h.push(rank_one_factor(model.channel(j, i, k)).ok_or_else(|| {
                    Error::Input(format!("channel from BS {j} to user ({i}, {k}) is not rank one"))
                })?);
            }
        }
    }
    let factor = |j: usize, i: usize, k: usize| &h[(j * cells + i) * users + k];

    let mut problem = ConicProblem::new();
    let vars: Vec<(Vec<Scalar>, Vec<Scalar>)> = (0..cells * users)
        .map(|_| {
            let re = (0..n).map(|_| problem.free()).collect();
            let im = (0..n).map(|_| problem.free()).collect();
            (re, im)
        })
        .collect();

    for i in 0..cells {
        for k in 0..users {
            let own = model.link(i, k);
            let (signal, signal_im) = inner(factor(i, i, k), &vars[own].0, &vars[own].1);
            problem.constrain(signal_im, Relation::Eq, 0.0);
            let head = signal.scaled(1.0 / model.target(i, k).sqrt());
            let mut tail = Vec::new();
            for j in 0..cells {
                for l in 0..users {
                    if (j, l) == (i, k) {
                        continue;
                    }
                    let link = model.link(j, l);
                    let (re, im) = inner(factor(j, i, k), &vars[link].0, &vars[link].1);
                    tail.push(re);
                    tail.push(im);
                }
            }
            tail.push(AffineExpr::constant(model.noise(i, k).sqrt()));
            problem.second_order_cone(head, tail);
        }
    }

    let power: Vec<Scalar> = (0..cells)
        .map(|i| {
            let p = problem.nonneg();
            // ‖(w, (1 − P)/2)‖ ≤ (1 + P)/2  ⇔  ‖w‖² ≤ P
            let mut tail: Vec<AffineExpr> = Vec::new();
            for k in 0..users {
                let (re, im) = &vars[model.link(i, k)];
                tail.extend(re.iter().chain(im).map(|&s| AffineExpr::var(s)));
            }
            tail.push(AffineExpr::constant(0.5).plus(p, -0.5));
            problem.second_order_cone(AffineExpr::constant(0.5).plus(p, 0.5), tail);
            p
        })
        .collect();
    let eta = add_saa_objective(&mut problem, &power, db, params);
    let sol = conic::solve(&problem, opts)?.into_result()?;

    let beamformers = vars
        .iter()
        .map(|(re, im)| CVector::from_iterator(n, re.iter().zip(im).map(|(&r, &m)| C64::new(sol.value(r), sol.value(m)))))
        .collect();
    let eta = eta.iter().map(|&e| sol.value(e)).collect();
    Ok(OracleSolution {
        solution: BeamformingSolution::from_beamformers(cells, users, beamformers, eta)?,
        objective: sol.objective,
    })
}

/// `Σ_i` empirical mean of the CVaR integrand at fixed powers and thresholds.
pub fn saa_objective(powers: &[f64], eta: &[f64], db: &SampleDatabase, params: CvarParams) -> f64 {
    (0..powers.len())
        .map(|i| empirical_f(powers[i], eta[i], &db.column(i), params))
        .sum()
}
