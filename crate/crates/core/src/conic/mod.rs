//! Convex conic programs over complex Hermitian PSD blocks and real scalars.
//!
//! Every optimization in the pipeline (centralized relaxation, rank-one SOCP,
//! per-BS stochastic-ADMM subproblem) is assembled through [`ConicProblem`] and
//! solved by the Clarabel interior-point solver. Complex blocks `W = X + iY` are
//! realified into the `2n × 2n` symmetric variable
//!
//! ```text
//! Z = [ Z11  Z12 ]        X = (Z11 + Z22) / 2
//!     [ Z21  Z22 ]        Y = (Z21 − Z12) / 2
//! ```
//!
//! with `Re tr(C W) = tr(C̃ Z) / 2` for `C̃ = [[Re C, −Im C], [Im C, Re C]]`. Any PSD
//! `Z` maps to a PSD `W` with the same trace values, so `Z` is left unstructured.

mod dump;
mod extract;

use std::path::PathBuf;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use log::debug;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{hermitian_eigenvalues, CMatrix, C64};

pub use extract::{extract_rank_one, min_power_allocation, randomize_and_scale, RankOne, DEFAULT_TRIALS};

/// Default interior-point tolerance.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Default eigenvalue-ratio threshold for accepting a block as rank one.
pub const RANK_ONE_TOL: f64 = 1e-6;

/// Handle to a real scalar variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Scalar(usize);

/// Handle to a complex Hermitian PSD block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PsdBlock(usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ScalarKind {
    Free,
    Nonneg,
}

/// `Σ c_s x_s + Σ Re tr(C_b W_b) + constant`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AffineExpr {
    scalars: Vec<(Scalar, f64)>,
    traces: Vec<(PsdBlock, CMatrix)>,
    constant: f64,
}

impl AffineExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(value: f64) -> Self {
        Self {
            constant: value,
            ..Self::default()
        }
    }

    pub fn var(s: Scalar) -> Self {
        Self::new().plus(s, 1.0)
    }

    /// Adds `coef · s`.
    pub fn plus(mut self, s: Scalar, coef: f64) -> Self {
        self.scalars.push((s, coef));
        self
    }

    /// Adds `Re tr(C W)`; `C` is taken Hermitian.
    pub fn plus_trace(mut self, block: PsdBlock, c: CMatrix) -> Self {
        self.traces.push((block, c));
        self
    }

    pub fn plus_constant(mut self, value: f64) -> Self {
        self.constant += value;
        self
    }

    /// Multiplies every coefficient and the constant by `factor`.
    pub fn scaled(mut self, factor: f64) -> Self {
        self.scalars.iter_mut().for_each(|(_, c)| *c *= factor);
        self.traces.iter_mut().for_each(|(_, c)| *c *= C64::new(factor, 0.0));
        self.constant *= factor;
        self
    }

    fn evaluate(&self, sol: &ConicSolution) -> f64 {
        let mut v = self.constant;
        for &(s, c) in &self.scalars {
            v += c * sol.scalars[s.0];
        }
        for (b, c) in &self.traces {
            v += crate::model::trace_product(c, &sol.blocks[b.0]);
        }
        v
    }
}

/// Sense of a linear constraint `expr (rel) rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Ge,
    Le,
}

/// A convex conic program assembled block by block.
#[derive(Debug, Clone, Default)]
pub struct ConicProblem {
    scalars: Vec<ScalarKind>,
    blocks: Vec<usize>,
    objective: AffineExpr,
    squares: Vec<(Scalar, f64)>,
    linear: Vec<(AffineExpr, Relation)>,
    cones: Vec<(AffineExpr, Vec<AffineExpr>)>,
}

impl ConicProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn free(&mut self) -> Scalar {
        self.scalars.push(ScalarKind::Free);
        Scalar(self.scalars.len() - 1)
    }

    pub fn nonneg(&mut self) -> Scalar {
        self.scalars.push(ScalarKind::Nonneg);
        Scalar(self.scalars.len() - 1)
    }

    /// Complex Hermitian PSD block of side `n`.
    pub fn psd(&mut self, n: usize) -> PsdBlock {
        assert!(n > 0, "PSD block must be non-empty");
        self.blocks.push(n);
        PsdBlock(self.blocks.len() - 1)
    }

    /// Adds `expr` to the (minimized) objective.
    pub fn minimize(&mut self, expr: AffineExpr) {
        self.objective.scalars.extend(expr.scalars);
        self.objective.traces.extend(expr.traces);
        self.objective.constant += expr.constant;
    }

    /// Adds `weight · s²` to the objective; `weight ≥ 0`.
    pub fn minimize_square(&mut self, s: Scalar, weight: f64) {
        assert!(weight >= 0.0, "quadratic weight must be non-negative");
        self.squares.push((s, weight));
    }

    /// `lhs (rel) rhs`.
    pub fn constrain(&mut self, lhs: AffineExpr, rel: Relation, rhs: f64) {
        self.linear.push((lhs.plus_constant(-rhs), rel));
    }

    /// `‖(tail_1, …, tail_m)‖₂ ≤ head`.
    pub fn second_order_cone(&mut self, head: AffineExpr, tail: Vec<AffineExpr>) {
        self.cones.push((head, tail));
    }

    pub fn num_scalars(&self) -> usize {
        self.scalars.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    fn check(&self) -> Result<()> {
        let exprs = std::iter::once(&self.objective)
            .chain(self.linear.iter().map(|(e, _)| e))
            .chain(self.cones.iter().flat_map(|(h, t)| std::iter::once(h).chain(t.iter())));
        for e in exprs {
            if e.scalars.iter().any(|(s, c)| s.0 >= self.scalars.len() || !c.is_finite())
                || !e.constant.is_finite()
            {
                return Err(Error::Input("expression references an undeclared or non-finite scalar".into()));
            }
            for (b, c) in &e.traces {
                let n = *self
                    .blocks
                    .get(b.0)
                    .ok_or_else(|| Error::Input("expression references an undeclared block".into()))?;
                if c.nrows() != n || c.ncols() != n {
                    return Err(Error::Input(format!(
                        "trace coefficient is {}x{}, block is {n}x{n}",
                        c.nrows(),
                        c.ncols()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Largest violation of any constraint at `sol`, each measured relative to `1 + |constant|`.
    pub fn max_violation(&self, sol: &ConicSolution) -> f64 {
        let mut worst = 0.0_f64;
        let scale = |e: &AffineExpr| 1.0 + e.constant.abs();
        for (e, rel) in &self.linear {
            let v = e.evaluate(sol);
            let gap = match rel {
                Relation::Eq => v.abs(),
                Relation::Ge => (-v).max(0.0),
                Relation::Le => v.max(0.0),
            };
            worst = worst.max(gap / scale(e));
        }
        for (head, tail) in &self.cones {
            let norm = tail.iter().map(|t| t.evaluate(sol).powi(2)).sum::<f64>().sqrt();
            let s = tail.iter().map(scale).fold(scale(head), f64::max);
            worst = worst.max((norm - head.evaluate(sol)).max(0.0) / s);
        }
        for (i, &kind) in self.scalars.iter().enumerate() {
            if kind == ScalarKind::Nonneg {
                worst = worst.max(-sol.scalars[i]);
            }
        }
        for w in &sol.blocks {
            let min = hermitian_eigenvalues(w)[0];
            let top = hermitian_eigenvalues(w).last().copied().unwrap_or(0.0);
            worst = worst.max(-min / (1.0 + top.abs()));
        }
        worst
    }
}

/// Outcome class of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
}

/// Primal values and diagnostics returned by [`solve`].
#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub status: SolveStatus,
    /// Objective including constant terms.
    pub objective: f64,
    scalars: Vec<f64>,
    blocks: Vec<CMatrix>,
    /// Recomputed worst constraint violation, see [`ConicProblem::max_violation`].
    pub residual: f64,
    pub iterations: u32,
    pub diagnostic: String,
}

impl ConicSolution {
    pub fn value(&self, s: Scalar) -> f64 {
        self.scalars[s.0]
    }

    pub fn block(&self, b: PsdBlock) -> &CMatrix {
        &self.blocks[b.0]
    }

    pub fn into_blocks(self) -> Vec<CMatrix> {
        self.blocks
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Converts a non-optimal status into the matching error.
    pub fn into_result(self) -> Result<Self> {
        match self.status {
            SolveStatus::Optimal => Ok(self),
            SolveStatus::Infeasible => Err(Error::Infeasible(self.diagnostic)),
            SolveStatus::NumericalFailure => Err(Error::Numerical(self.diagnostic)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: u32,
    /// When set, every assembled problem is written here before solving.
    pub dump_dir: Option<PathBuf>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: 200,
            dump_dir: None,
        }
    }
}

fn svec_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Position of `(r, c)`, `r ≤ c`, in the column-wise upper-triangular packing.
fn svec_index(r: usize, c: usize) -> usize {
    debug_assert!(r <= c);
    c * (c + 1) / 2 + r
}

/// Standard-form data `min ½xᵀPx + qᵀx  s.t.  Ax + s = b, s ∈ K`.
pub(crate) struct StandardForm {
    pub p: CscMatrix<f64>,
    pub q: Vec<f64>,
    pub a: CscMatrix<f64>,
    pub b: Vec<f64>,
    pub cones: Vec<SupportedConeT<f64>>,
    pub constant: f64,
}

struct Lowering<'a> {
    problem: &'a ConicProblem,
    offsets: Vec<usize>,
    n: usize,
}

impl<'a> Lowering<'a> {
    fn new(problem: &'a ConicProblem) -> Self {
        let mut offsets = Vec::with_capacity(problem.blocks.len());
        let mut n = problem.scalars.len();
        for &size in &problem.blocks {
            offsets.push(n);
            n += svec_len(2 * size);
        }
        Self { problem, offsets, n }
    }

    /// Sparse coefficients of `expr` over the stacked variable vector.
    fn row(&self, expr: &AffineExpr) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = expr.scalars.iter().map(|&(s, c)| (s.0, c)).collect();
        for (block, c) in &expr.traces {
            let size = self.problem.blocks[block.0];
            let base = self.offsets[block.0];
            let m = realify(c);
            let dim = 2 * size;
            for col in 0..dim {
                for r in 0..=col {
                    // tr(M Z)/2 with off-diagonal svec entries carrying a √2 factor.
                    let coef = if r == col {
                        0.5 * m[(r, r)]
                    } else {
                        0.5 * std::f64::consts::SQRT_2 * 0.5 * (m[(r, col)] + m[(col, r)])
                    };
                    if coef != 0.0 {
                        out.push((base + svec_index(r, col), coef));
                    }
                }
            }
        }
        out
    }

    fn standard_form(&self) -> StandardForm {
        let problem = self.problem;
        let mut q = vec![0.0; self.n];
        for (col, c) in self.row(&problem.objective) {
            q[col] += c;
        }
        let (mut pi, mut pj, mut pv) = (Vec::new(), Vec::new(), Vec::new());
        for &(s, w) in &problem.squares {
            pi.push(s.0);
            pj.push(s.0);
            pv.push(2.0 * w);
        }
        let p = CscMatrix::new_from_triplets(self.n, self.n, pi, pj, pv);

        let (mut ai, mut aj, mut av) = (Vec::new(), Vec::new(), Vec::new());
        let mut b = Vec::new();
        let mut cones = Vec::new();
        let mut push_row = |coefs: Vec<(usize, f64)>, sign: f64, rhs: f64, b: &mut Vec<f64>| {
            let r = b.len();
            for (col, c) in coefs {
                ai.push(r);
                aj.push(col);
                av.push(sign * c);
            }
            b.push(rhs);
        };

        let eqs: Vec<_> = problem.linear.iter().filter(|(_, r)| *r == Relation::Eq).collect();
        for (e, _) in &eqs {
            push_row(self.row(e), 1.0, -e.constant, &mut b);
        }
        if !eqs.is_empty() {
            cones.push(SupportedConeT::ZeroConeT(eqs.len()));
        }

        let mut nonneg = 0;
        for (e, rel) in &problem.linear {
            match rel {
                Relation::Ge => push_row(self.row(e), -1.0, e.constant, &mut b),
                Relation::Le => push_row(self.row(e), 1.0, -e.constant, &mut b),
                Relation::Eq => continue,
            }
            nonneg += 1;
        }
        for (i, &kind) in problem.scalars.iter().enumerate() {
            if kind == ScalarKind::Nonneg {
                push_row(vec![(i, 1.0)], -1.0, 0.0, &mut b);
                nonneg += 1;
            }
        }
        if nonneg > 0 {
            cones.push(SupportedConeT::NonnegativeConeT(nonneg));
        }

        for (head, tail) in &problem.cones {
            for e in std::iter::once(head).chain(tail.iter()) {
                push_row(self.row(e), -1.0, e.constant, &mut b);
            }
            cones.push(SupportedConeT::SecondOrderConeT(tail.len() + 1));
        }

        for (blk, &size) in problem.blocks.iter().enumerate() {
            let base = self.offsets[blk];
            for idx in 0..svec_len(2 * size) {
                push_row(vec![(base + idx, 1.0)], -1.0, 0.0, &mut b);
            }
            cones.push(SupportedConeT::PSDTriangleConeT(2 * size));
        }

        let a = CscMatrix::new_from_triplets(b.len(), self.n, ai, aj, av);
        StandardForm {
            p,
            q,
            a,
            b,
            cones,
            constant: problem.objective.constant,
        }
    }

    fn unpack(&self, x: &[f64]) -> (Vec<f64>, Vec<CMatrix>) {
        let scalars = x[..self.problem.scalars.len()].to_vec();
        let blocks = self
            .problem
            .blocks
            .iter()
            .zip(&self.offsets)
            .map(|(&size, &base)| derealify(&unpack_svec(&x[base..base + svec_len(2 * size)], 2 * size)))
            .collect();
        (scalars, blocks)
    }
}

/// `[[Re C, −Im C], [Im C, Re C]]`.
fn realify(c: &CMatrix) -> DMatrix<f64> {
    let n = c.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |r, col| {
        let z = c[(r % n, col % n)];
        match (r < n, col < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

fn derealify(z: &DMatrix<f64>) -> CMatrix {
    let n = z.nrows() / 2;
    CMatrix::from_fn(n, n, |r, c| {
        let re = 0.5 * (z[(r, c)] + z[(r + n, c + n)]);
        let im = 0.5 * (z[(r + n, c)] - z[(r, c + n)]);
        C64::new(re, im)
    })
}

fn unpack_svec(v: &[f64], dim: usize) -> DMatrix<f64> {
    let mut z = DMatrix::zeros(dim, dim);
    for c in 0..dim {
        for r in 0..=c {
            let val = v[svec_index(r, c)];
            if r == c {
                z[(r, r)] = val;
            } else {
                z[(r, c)] = val / std::f64::consts::SQRT_2;
                z[(c, r)] = z[(r, c)];
            }
        }
    }
    z
}

fn acceptable(residual: f64, primal: f64, dual: f64) -> bool {
    residual <= 1e-6 && (primal - dual).abs() <= 1e-6 * (1.0 + primal.abs())
}

/// Solves `problem` to tolerance `opts.tol`.
///
/// Reduced-accuracy terminations are promoted to [`SolveStatus::Optimal`] only when the
/// recomputed residual and the primal-dual gap are both below `1e-6`.
pub fn solve(problem: &ConicProblem, opts: &SolverOptions) -> Result<ConicSolution> {
    problem.check()?;
    let lowering = Lowering::new(problem);
    let form = lowering.standard_form();
    if let Some(dir) = &opts.dump_dir {
        dump::write(dir, &form)?;
    }

    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .tol_gap_abs(opts.tol)
        .tol_gap_rel(opts.tol)
        .tol_feas(opts.tol)
        .max_iter(opts.max_iter)
        .build()
        .map_err(|e| Error::Numerical(format!("solver settings: {e}")))?;
    let mut solver = DefaultSolver::new(&form.p, &form.q, &form.a, &form.b, &form.cones, settings)
        .map_err(|e| Error::Numerical(format!("solver setup: {e}")))?;
    solver.solve();
    let raw = &solver.solution;
    debug!("clarabel: {:?} after {} iterations in {:.1} ms", raw.status, raw.iterations, raw.solve_time * 1e3);

    let (scalars, blocks) = lowering.unpack(&raw.x);
    let mut sol = ConicSolution {
        status: SolveStatus::NumericalFailure,
        objective: raw.obj_val + form.constant,
        scalars,
        blocks,
        residual: f64::NAN,
        iterations: raw.iterations,
        diagnostic: String::new(),
    };
    sol.residual = problem.max_violation(&sol);

    sol.status = match raw.status {
        SolverStatus::Solved => SolveStatus::Optimal,
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            let cert: f64 = raw.z.iter().map(|v| v * v).sum::<f64>().sqrt();
            sol.diagnostic = format!(
                "primal infeasibility certificate found ({:?}, ‖z‖ = {cert:.3e}, bᵀz = {:.3e})",
                raw.status,
                form.b.iter().zip(&raw.z).map(|(b, z)| b * z).sum::<f64>()
            );
            SolveStatus::Infeasible
        }
        SolverStatus::AlmostSolved | SolverStatus::MaxIterations | SolverStatus::InsufficientProgress
            if acceptable(sol.residual, raw.obj_val, raw.obj_val_dual) =>
        {
            debug!("accepting {:?} with residual {:.3e}", raw.status, sol.residual);
            SolveStatus::Optimal
        }
        other => {
            sol.diagnostic = format!(
                "solver stopped with {other:?} after {} iterations (residual {:.3e}, gap {:.3e})",
                raw.iterations,
                sol.residual,
                (raw.obj_val - raw.obj_val_dual).abs()
            );
            SolveStatus::NumericalFailure
        }
    };
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn min_trace_with_unit_lower_bound() {
        let mut p = ConicProblem::new();
        let w = p.psd(2);
        let id = CMatrix::identity(2, 2);
        p.minimize(AffineExpr::new().plus_trace(w, id.clone()));
        p.constrain(AffineExpr::new().plus_trace(w, id), Relation::Ge, 1.0);
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert!(sol.is_optimal());
        assert_relative_eq!(sol.objective, 1.0, epsilon = 1e-7);
        assert!(sol.residual <= 1e-7);
    }

    #[test]
    fn single_user_sinr_program() {
        let mut p = ConicProblem::new();
        let w = p.psd(2);
        let id = CMatrix::identity(2, 2);
        p.minimize(AffineExpr::new().plus_trace(w, id.clone()));
        p.constrain(AffineExpr::new().plus_trace(w, id), Relation::Ge, 8.0 * 1.0);
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert_relative_eq!(sol.objective, 8.0, epsilon = 1e-6);
    }

    #[test]
    fn infeasible_toy_is_reported() {
        let mut p = ConicProblem::new();
        let w = p.psd(2);
        p.constrain(AffineExpr::new().plus_trace(w, CMatrix::identity(2, 2)), Relation::Le, -1.0);
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
        assert!(!sol.diagnostic.is_empty());
        assert!(matches!(sol.into_result(), Err(Error::Infeasible(_))));
    }

    #[test]
    fn complex_off_diagonal_coupling() {
        // max Re tr(C W) with tr(W) = 1 is the top eigenvalue of C; pick C with an
        // imaginary off-diagonal entry so the svec packing of Y is exercised.
        let cm = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 2.0), c(0.0, -2.0), c(1.0, 0.0)]);
        let mut p = ConicProblem::new();
        let w = p.psd(2);
        p.minimize(AffineExpr::new().plus_trace(w, -cm.clone()));
        p.constrain(AffineExpr::new().plus_trace(w, CMatrix::identity(2, 2)), Relation::Eq, 1.0);
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert_relative_eq!(sol.objective, -3.0, epsilon = 1e-6);
        let got = crate::model::trace_product(&cm, sol.block(w));
        assert_relative_eq!(got, 3.0, epsilon = 1e-6);
        let top = extract_rank_one(sol.block(w), 1e-6);
        assert!(top.ok);
    }

    #[test]
    fn three_by_three_packing_matches_direct_evaluation() {
        // Nonzero entries spread across the upper triangle of the 6x6 embedding.
        let cm = CMatrix::from_fn(3, 3, |r, col| {
            if r == col {
                c(1.0 + r as f64, 0.0)
            } else if r < col {
                c(0.3 * (r + col) as f64, 0.2 * col as f64)
            } else {
                c(0.3 * (r + col) as f64, -0.2 * r as f64)
            }
        });
        let mut p = ConicProblem::new();
        let w = p.psd(3);
        p.minimize(AffineExpr::new().plus_trace(w, CMatrix::identity(3, 3)));
        p.constrain(AffineExpr::new().plus_trace(w, cm.clone()), Relation::Ge, 2.0);
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        let lhs = crate::model::trace_product(&cm, sol.block(w));
        assert_relative_eq!(lhs, 2.0, epsilon = 1e-6);
        let top = hermitian_eigenvalues(&cm).last().copied().unwrap();
        assert_relative_eq!(sol.objective, 2.0 / top, epsilon = 1e-6);
    }

    #[test]
    fn quadratic_and_cone_terms() {
        // min (x − 3)² + y  s.t. ‖(x, 4)‖ ≤ y   → optimum at x where 2(x−3) + x/√(x²+16) = 0.
        let mut p = ConicProblem::new();
        let x = p.free();
        let y = p.free();
        p.minimize_square(x, 1.0);
        p.minimize(AffineExpr::new().plus(x, -6.0).plus(y, 1.0).plus_constant(9.0));
        p.second_order_cone(AffineExpr::var(y), vec![AffineExpr::var(x), AffineExpr::constant(4.0)]);
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        let xv = sol.value(x);
        assert!((2.0 * (xv - 3.0) + xv / (xv * xv + 16.0).sqrt()).abs() < 1e-4);
        assert_relative_eq!(sol.value(y), (xv * xv + 16.0).sqrt(), epsilon = 1e-6);
    }

    #[test]
    fn nonneg_scalars_are_bounded() {
        let mut p = ConicProblem::new();
        let t = p.nonneg();
        p.minimize(AffineExpr::var(t));
        p.constrain(AffineExpr::var(t), Relation::Ge, -5.0);
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert!(sol.value(t).abs() < 1e-7);
    }

    #[test]
    fn undeclared_block_is_rejected() {
        let mut p = ConicProblem::new();
        p.psd(2);
        p.minimize(AffineExpr::new().plus_trace(PsdBlock(3), CMatrix::identity(2, 2)));
        assert!(solve(&p, &SolverOptions::default()).is_err());
    }

    #[test]
    fn realify_round_trip() {
        let w = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.5, -1.0), c(0.5, 1.0), c(3.0, 0.0)]);
        assert!((derealify(&realify(&w)) - &w).norm() < 1e-15);
    }
}
