//! Recovering beamforming vectors from relaxed covariance blocks.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Uniform};

use crate::error::{Error, Result};
use crate::model::{BeamformingSolution, CMatrix, CVector, SystemModel, C64};

/// Random candidates drawn by [`randomize_and_scale`] unless told otherwise.
pub const DEFAULT_TRIALS: usize = 100;

/// Principal component of a PSD block.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOne {
    /// `sqrt(λ1) · u1`, phase-normalized.
    pub vector: CVector,
    /// `ratio ≤ rel_tol`.
    pub ok: bool,
    /// `λ2 / λ1` (0 for a zero or 1×1 block).
    pub ratio: f64,
}

/// Rotates `v` so that its largest-magnitude entry is real and non-negative.
fn normalize_phase(v: &mut CVector) {
    let Some(pivot) = v.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())) else {
        return;
    };
    if pivot.norm() > 0.0 {
        let rot = pivot.conj() / pivot.norm();
        v.iter_mut().for_each(|z| *z *= rot);
    }
}

/// Eigen-decomposition with eigenvalues sorted in descending order, negatives clamped to 0.
fn descending_eigen(w: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = w.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let vectors = CMatrix::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i)).collect::<Vec<_>>());
    (values, vectors)
}

/// `w = sqrt(λ1) u1`, with `ok` iff `λ2/λ1 ≤ rel_tol`.
pub fn extract_rank_one(w: &CMatrix, rel_tol: f64) -> RankOne {
    let n = w.nrows();
    let (values, vectors) = descending_eigen(w);
    let top = values.first().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return RankOne {
            vector: CVector::zeros(n),
            ok: true,
            ratio: 0.0,
        };
    }
    let ratio = values.get(1).map_or(0.0, |l2| l2 / top);
    let mut vector: CVector = vectors.column(0).into_owned().scale(top.sqrt());
    normalize_phase(&mut vector);
    RankOne {
        vector,
        ok: ratio <= rel_tol,
        ratio,
    }
}

/// Minimum-power allocation for fixed unit beam directions, with every SINR met with equality.
///
/// Solves `p_ik g_ik,ik / γ_ik − Σ_{(j,l)≠(i,k)} p_jl g_jl,ik = σ²_ik` where
/// `g_jl,ik = d_jl^H R_jik d_jl`. Returns `None` when the system is singular or the
/// solution is not strictly positive, i.e. the directions cannot meet the targets.
pub fn min_power_allocation(model: &SystemModel, directions: &[CVector]) -> Option<Vec<f64>> {
    let (cells, users) = (model.cells(), model.users());
    let links = cells * users;
    let gain = |j: usize, l: usize, i: usize, k: usize| -> f64 {
        let d = &directions[model.link(j, l)];
        (d.adjoint() * model.channel(j, i, k) * d)[(0, 0)].re
    };
    let mut m = DMatrix::<f64>::zeros(links, links);
    let mut rhs = DVector::<f64>::zeros(links);
    for i in 0..cells {
        for k in 0..users {
            let row = model.link(i, k);
            rhs[row] = model.noise(i, k);
            for j in 0..cells {
                for l in 0..users {
                    let col = model.link(j, l);
                    m[(row, col)] = if col == row {
                        gain(i, k, i, k) / model.target(i, k)
                    } else {
                        -gain(j, l, i, k)
                    };
                }
            }
        }
    }
    let p = m.lu().solve(&rhs)?;
    p.iter().all(|v| v.is_finite() && *v > 0.0).then(|| p.iter().copied().collect())
}

fn unit(v: &CVector) -> Option<CVector> {
    let n = v.norm();
    (n > 0.0 && n.is_finite()).then(|| v.unscale(n))
}

/// Beamformers for a possibly higher-rank relaxed solution.
///
/// The principal eigenvectors are tried first and returned untouched when they
/// already meet every target. Otherwise `trials` random candidates
/// `w = U Σ^{1/2} v` are drawn, with `v` of independent unit-modulus entries with
/// uniform phases (so `E[w w^H] = W`); every candidate, the principal one included,
/// is rescaled to the minimum-power allocation meeting all targets, and the one
/// needing the least total power relative to `Σ tr(W)` wins.
pub fn randomize_and_scale<R: Rng + ?Sized>(
    model: &SystemModel,
    blocks: &[CMatrix],
    trials: usize,
    rng: &mut R,
) -> Result<BeamformingSolution> {
    if trials == 0 {
        return Err(Error::Input("randomization needs at least one trial".into()));
    }
    let (cells, users) = (model.cells(), model.users());
    if blocks.len() != model.num_links() || blocks.iter().any(|b| b.nrows() != model.antennas()) {
        return Err(Error::Instance("covariance blocks do not match the model".into()));
    }
    let eta = vec![0.0; cells];

    let principal: Vec<RankOne> = blocks.iter().map(|w| extract_rank_one(w, super::RANK_ONE_TOL)).collect();
    let worst_ratio = principal.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let vectors: Vec<CVector> = principal.iter().map(|r| r.vector.clone()).collect();
    let direct = BeamformingSolution::from_beamformers(cells, users, vectors.clone(), eta.clone())?
        .with_beamformers(vectors.clone(), worst_ratio);
    if model.check_qos(&direct, crate::model::QOS_TOL)?.all_pass() {
        return Ok(direct);
    }

    let reference: f64 = blocks.iter().map(crate::model::real_trace).sum();
    let factors: Vec<CMatrix> = blocks
        .iter()
        .map(|w| {
            let (values, vectors) = descending_eigen(w);
            let root = DVector::from_iterator(values.len(), values.iter().map(|v| C64::new(v.sqrt(), 0.0)));
            vectors * CMatrix::from_diagonal(&root)
        })
        .collect();
    let phase = Uniform::new(0.0, std::f64::consts::TAU).expect("valid range");

    let mut best: Option<(f64, Vec<CVector>)> = None;
    let mut consider = |candidate: Vec<CVector>| {
        let Some(dirs) = candidate.iter().map(unit).collect::<Option<Vec<_>>>() else {
            return;
        };
        let Some(power) = min_power_allocation(model, &dirs) else {
            return;
        };
        let total: f64 = power.iter().sum();
        if best.as_ref().is_some_and(|(t, _)| *t <= total) {
            return;
        }
        let scaled = dirs.iter().zip(&power).map(|(d, p)| d.scale(p.sqrt())).collect();
        best = Some((total, scaled));
    };
    consider(vectors);
    for _ in 0..trials {
        let draw = factors
            .iter()
            .map(|f| {
                let v = CVector::from_fn(f.ncols(), |_, _| C64::from_polar(1.0, phase.sample(rng)));
                f * v
            })
            .collect();
        consider(draw);
    }

    let Some((total, mut beams)) = best else {
        return Err(Error::Infeasible(format!(
            "randomization: no candidate meets the SINR targets after {trials} trials"
        )));
    };
    beams.iter_mut().for_each(normalize_phase);
    let sol = BeamformingSolution::from_beamformers(cells, users, beams.clone(), eta)?.with_beamformers(beams, worst_ratio);
    if !model.check_qos(&sol, crate::model::QOS_TOL)?.all_pass() {
        return Err(Error::Numerical(format!(
            "randomization: scaled candidate (power {total:.6e}, reference {reference:.6e}) misses targets"
        )));
    }
    Ok(sol)
}
