//! The conic modelling layer on its own: a small Hermitian SDP with a second-order cone.
//!
//! `cargo run --release --example conic_modelling`

use cmbf::conic::{solve, AffineExpr, ConicProblem, Relation, SolverOptions};
use cmbf::model::{CMatrix, C64};

fn main() -> cmbf::Result<()> {
    // minimize tr(W) + t  s.t.  Re tr(C W) ≥ 1,  ‖(x − 1, x + 2)‖ ≤ t,  W ⪰ 0 (2 × 2 Hermitian).
    let c = CMatrix::from_row_slice(2, 2, &[C64::new(2.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0), C64::new(1.0, 0.0)]);
    let mut p = ConicProblem::new();
    let w = p.psd(2);
    let x = p.free();
    let t = p.nonneg();
    p.minimize(AffineExpr::new().plus_trace(w, CMatrix::identity(2, 2)).plus(t, 1.0));
    p.constrain(AffineExpr::new().plus_trace(w, c), Relation::Ge, 1.0);
    p.second_order_cone(
        AffineExpr::var(t),
        vec![AffineExpr::var(x).plus_constant(-1.0), AffineExpr::var(x).plus_constant(2.0)],
    );
    let sol = solve(&p, &SolverOptions::default())?.into_result()?;
    println!("objective {:.6} after {} iterations", sol.objective, sol.iterations);
    println!("x = {:.6}, t = {:.6} (expected -0.5 and {:.6})", sol.value(x), sol.value(t), 4.5f64.sqrt());
    println!("W =\n{:.4}", sol.block(w));
    println!("max constraint violation {:.1e}", p.max_violation(&sol));
    Ok(())
}
