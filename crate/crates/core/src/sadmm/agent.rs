//! Per-BS state and the local primal, threshold, and dual updates.

use crate::conic::{self, AffineExpr, ConicProblem, PsdBlock, Relation, Scalar, SolverOptions};
use crate::error::{Error, Result};
use crate::model::{CMatrix, SystemModel};

use super::layout::ConsensusLayout;

/// Everything BS `i` keeps between rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub index: usize,
    /// `P_i` (W).
    pub power: f64,
    /// `η_i` ($).
    pub eta: f64,
    /// Private interference vector `q_i` (W).
    pub q: Vec<f64>,
    /// Duals `λ_i` ($/W).
    pub lambda: Vec<f64>,
    /// Local copy of `q̄`.
    pub qbar: Vec<f64>,
    /// `W_ik` for `k = 0..K`; empty until the first solve.
    pub blocks: Vec<CMatrix>,
    /// Number of completed rounds.
    pub iteration: usize,
}

impl AgentState {
    /// All-zero start.
    pub fn new(index: usize, layout: &ConsensusLayout) -> Self {
        Self {
            index,
            power: 0.0,
            eta: 0.0,
            q: vec![0.0; layout.local_len()],
            lambda: vec![0.0; layout.local_len()],
            qbar: vec![0.0; layout.public_len()],
            blocks: Vec::new(),
            iteration: 0,
        }
    }
}

/// Output of the local beamforming subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalUpdate {
    pub power: f64,
    pub q: Vec<f64>,
    pub blocks: Vec<CMatrix>,
}

/// Minimizes over `(P_i, q_i) ∈ C_i`
///
/// ```text
/// g_P · P + λᵀq + (ρ/2)‖B_i q̄ − q‖² + (P − P(m))²/2ζ + ‖q − q(m)‖²/2ζ
/// ```
///
/// where `C_i` ties `P` and `q` to the local covariance blocks and enforces each own
/// user's SINR given the received inter-cell interference `Q_ik ≥ 0`.
pub fn local_primal_update(
    agent: &AgentState,
    layout: &ConsensusLayout,
    model: &SystemModel,
    grad_power: f64,
    rho: f64,
    zeta: f64,
    opts: &SolverOptions,
) -> Result<PrimalUpdate> {
    if !(zeta > 0.0 && zeta.is_finite()) {
        return Err(Error::Input(format!("step size ζ = {zeta} must be positive")));
    }
    let i = agent.index;
    let (users, n) = (model.users(), model.antennas());
    let mut problem = ConicProblem::new();
    let blocks: Vec<PsdBlock> = (0..users).map(|_| problem.psd(n)).collect();
    let power = problem.free();
    let q: Vec<Scalar> = (0..layout.local_len())
        .map(|s| if s < users { problem.nonneg() } else { problem.free() })
        .collect();

    let id = CMatrix::identity(n, n);
    let mut total = AffineExpr::var(power);
    for &b in &blocks {
        total = total.plus_trace(b, -&id);
    }
    problem.constrain(total, Relation::Eq, 0.0);

    for (j, k) in layout.cross_targets(i) {
        let r = model.channel(i, j, k);
        let mut e = AffineExpr::var(q[layout.cross_slot(i, j, k)]);
        for &b in &blocks {
            e = e.plus_trace(b, -r);
        }
        problem.constrain(e, Relation::Eq, 0.0);
    }

    for k in 0..users {
        let r = model.channel(i, i, k);
        let mut e = AffineExpr::new().plus(q[layout.total_slot(k)], -1.0);
        for (l, &b) in blocks.iter().enumerate() {
            let coef = if l == k { 1.0 / model.target(i, k) } else { -1.0 };
            e = e.plus_trace(b, r.scale(coef));
        }
        problem.constrain(e, Relation::Ge, model.noise(i, k));
    }

    // Expanded quadratics: weight·x² − 2·weight·center·x + weight·center².
    let prox = 0.5 / zeta;
    problem.minimize_square(power, prox);
    problem.minimize(
        AffineExpr::new()
            .plus(power, grad_power - 2.0 * prox * agent.power)
            .plus_constant(prox * agent.power * agent.power),
    );
    let target = layout.apply(i, &agent.qbar);
    let weight = 0.5 * rho + prox;
    for (s, &var) in q.iter().enumerate() {
        let (c, prev) = (target[s], agent.q[s]);
        problem.minimize_square(var, weight);
        problem.minimize(
            AffineExpr::new()
                .plus(var, agent.lambda[s] - rho * c - 2.0 * prox * prev)
                .plus_constant(0.5 * rho * c * c + prox * prev * prev),
        );
    }

    let sol = conic::solve(&problem, opts)?;
    let sol = sol.into_result().map_err(|e| match e {
        Error::Infeasible(d) => Error::Infeasible(format!(
            "local subproblem of BS {i} at round {}: {d}",
            agent.iteration + 1
        )),
        Error::Numerical(d) => Error::Numerical(format!(
            "local subproblem of BS {i} at round {}: {d}",
            agent.iteration + 1
        )),
        other => other,
    })?;
    Ok(PrimalUpdate {
        power: sol.value(power),
        q: q.iter().map(|&s| sol.value(s)).collect(),
        blocks: blocks.iter().map(|&b| sol.block(b).clone()).collect(),
    })
}

/// `η(m+1) = η(m) − ζ ∂f/∂η`, the closed-form minimizer of the linearized threshold step.
pub fn local_eta_update(eta: f64, grad_eta: f64, zeta: f64) -> f64 {
    eta - zeta * grad_eta
}

/// `λ_i − ρ (B_i q̄ − q_i)`.
pub fn dual_update(lambda: &[f64], q: &[f64], bq: &[f64], rho: f64) -> Vec<f64> {
    lambda
        .iter()
        .zip(q)
        .zip(bq)
        .map(|((l, q), b)| l - rho * (b - q))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::C64;
    use approx::assert_relative_eq;

    fn scalar(v: f64) -> CMatrix {
        CMatrix::from_element(1, 1, C64::new(v, 0.0))
    }

    /// I = 2, K = 1, Nt = 1 with own gain `g`, gain `c` towards the other cell's user.
    fn scalar_model(g: f64, c: f64, gamma: f64, noise: f64) -> SystemModel {
        SystemModel::new(
            1,
            vec![
                vec![vec![scalar(g)], vec![scalar(c)]],
                vec![vec![scalar(c)], vec![scalar(g)]],
            ],
            vec![vec![gamma], vec![gamma]],
            vec![vec![noise], vec![noise]],
        )
        .unwrap()
    }

    /// Brute-force minimizer over the two free unknowns `(w, Q)` of the scalar subproblem.
    ///
    /// Objective `h(w, Q)` is a convex quadratic; the feasible set is
    /// `w ≥ 0, Q ≥ 0, (g/γ) w − Q ≥ σ²`. Candidates: the unconstrained stationary point,
    /// the minimizer along each constraint line, and the vertices.
    #[allow(clippy::too_many_arguments)]
    fn scalar_oracle(
        g: f64,
        c: f64,
        gamma: f64,
        noise: f64,
        gp: f64,
        lam: [f64; 2],
        target: [f64; 2],
        prev: [f64; 3],
        rho: f64,
        zeta: f64,
    ) -> (f64, f64) {
        // h = gp w + λ0 Q + λ1 c w + ρ/2 ((t0 − Q)² + (t1 − c w)²)
        //     + ((w − P0)² + (Q − Q0)² + (c w − q0)²) / 2ζ
        let h = |w: f64, q: f64| {
            gp * w + lam[0] * q + lam[1] * c * w
                + 0.5 * rho * ((target[0] - q).powi(2) + (target[1] - c * w).powi(2))
                + ((w - prev[0]).powi(2) + (q - prev[1]).powi(2) + (c * w - prev[2]).powi(2)) / (2.0 * zeta)
        };
        let p = 1.0 / zeta;
        // ∂h/∂w = aw w + bw, ∂h/∂Q = aq Q + bq
        let aw = rho * c * c + p * (1.0 + c * c);
        let bw = gp + lam[1] * c - rho * target[1] * c - p * (prev[0] + c * prev[2]);
        let aq = rho + p;
        let bq = lam[0] - rho * target[0] - p * prev[1];
        let feasible = |w: f64, q: f64| w >= -1e-12 && q >= -1e-12 && (g / gamma) * w - q >= noise - 1e-12;
        let mut cands = vec![(-bw / aw, -bq / aq)];
        // Q = 0 line.
        cands.push((-bw / aw, 0.0));
        // SINR line Q = s w − σ² with s = g/γ: minimize h(w, s w − σ²).
        let s = g / gamma;
        let w = -(bw + s * (bq - aq * noise)) / (aw + aq * s * s);
        cands.push((w, s * w - noise));
        // Vertex Q = 0 on the SINR line.
        cands.push((noise / s, 0.0));
        cands
            .into_iter()
            .filter(|&(w, q)| feasible(w, q))
            .min_by(|a, b| h(a.0, a.1).total_cmp(&h(b.0, b.1)))
            .unwrap()
    }

    #[test]
    fn scalar_subproblem_matches_kkt_oracle() {
        let (g, c, gamma, noise) = (2.0, 0.5, 3.0, 1.0);
        let model = scalar_model(g, c, gamma, noise);
        let layout = ConsensusLayout::new(2, 1).unwrap();
        let cases = [
            (1.0, [0.0, 0.0], vec![0.0, 0.0], [0.0, 0.0, 0.0], 1.0, 0.1),
            (10.0, [0.3, -0.2], vec![0.4, 1.1], [1.5, 0.2, 0.8], 1.0, 0.1),
            (0.0, [-2.0, 0.5], vec![3.0, 0.1], [2.0, 1.0, 1.0], 5.0, 0.5),
            (9.0, [1.0, 1.0], vec![0.0, 0.0], [4.0, 0.0, 2.0], 0.2, 2.0),
        ];
        for (gp, lam, qbar, prev, rho, zeta) in cases {
            let agent = AgentState {
                index: 0,
                power: prev[0],
                eta: 0.0,
                q: vec![prev[1], prev[2]],
                lambda: lam.to_vec(),
                qbar: qbar.clone(),
                blocks: vec![],
                iteration: 0,
            };
            let target = layout.apply(0, &qbar);
            let (w, q) = scalar_oracle(g, c, gamma, noise, gp, lam, [target[0], target[1]], prev, rho, zeta);
            let up = local_primal_update(&agent, &layout, &model, gp, rho, zeta, &SolverOptions::default()).unwrap();
            assert_relative_eq!(up.power, w, epsilon = 1e-6);
            assert_relative_eq!(up.q[0], q, epsilon = 1e-6);
            assert_relative_eq!(up.q[1], c * w, epsilon = 1e-6);
        }
    }

    #[test]
    fn consistency_of_returned_quantities() {
        let model = scalar_model(2.0, 0.5, 3.0, 1.0);
        let layout = ConsensusLayout::new(2, 1).unwrap();
        let agent = AgentState::new(1, &layout);
        let up = local_primal_update(&agent, &layout, &model, 10.0, 1.0, 0.1, &SolverOptions::default()).unwrap();
        assert_relative_eq!(up.power, up.blocks[0][(0, 0)].re, epsilon = 1e-7);
        assert!(up.q.iter().all(|&v| v >= -1e-8));
    }

    #[test]
    fn tiny_step_keeps_a_feasible_incumbent() {
        let model = scalar_model(2.0, 0.5, 3.0, 1.0);
        let layout = ConsensusLayout::new(2, 1).unwrap();
        // w = 3 gives (2/3)·3 − Q ≥ 1 for Q ≤ 1.
        let agent = AgentState {
            power: 3.0,
            q: vec![0.5, 1.5],
            ..AgentState::new(0, &layout)
        };
        let up = local_primal_update(&agent, &layout, &model, 10.0, 1.0, 1e-6, &SolverOptions::default()).unwrap();
        assert_relative_eq!(up.power, 3.0, epsilon = 1e-4);
        assert_relative_eq!(up.q[0], 0.5, epsilon = 1e-4);
        assert_relative_eq!(up.q[1], 1.5, epsilon = 1e-4);
    }

    #[test]
    fn large_penalty_projects_onto_achievable_set() {
        let model = scalar_model(2.0, 0.5, 3.0, 1.0);
        let layout = ConsensusLayout::new(2, 1).unwrap();
        // B_0 q̄ = (0.4, 1.0). Achievable pairs (Q, q) = (Q, 0.5 w) satisfy
        // (4/3) q − Q ≥ 1; the target misses by 1/15, so the Euclidean projection moves
        // it along (−1, 4/3) by (1/15)·(9/25): (0.376, 1.032).
        let agent = AgentState {
            qbar: vec![1.0, 0.4],
            ..AgentState::new(0, &layout)
        };
        let up = local_primal_update(&agent, &layout, &model, 0.0, 1e6, 1.0, &SolverOptions::default()).unwrap();
        assert_relative_eq!(up.q[0], 0.376, epsilon = 1e-4);
        assert_relative_eq!(up.q[1], 1.032, epsilon = 1e-4);
    }

    #[test]
    fn eta_examples() {
        assert_relative_eq!(local_eta_update(2.0, 1.0, 0.1), 1.9);
        assert_relative_eq!(local_eta_update(0.0, -9.0, 0.1), 0.9, epsilon = 1e-12);
        assert_eq!(local_eta_update(2.0, 1.0, 0.0), 2.0);
    }

    #[test]
    fn dual_examples() {
        assert_eq!(dual_update(&[1.0, 2.0], &[3.0, 4.0], &[3.0, 4.0], 1.0), vec![1.0, 2.0]);
        assert_eq!(dual_update(&[0.0, 0.0], &[0.0, 0.0], &[0.5, -0.5], 1.0), vec![-0.5, 0.5]);
        let once = dual_update(&[0.0], &[1.0], &[1.25], 2.0);
        let twice = dual_update(&once, &[1.0], &[1.25], 2.0);
        assert_relative_eq!(twice[0], -2.0 * 2.0 * 0.25);
    }
}
