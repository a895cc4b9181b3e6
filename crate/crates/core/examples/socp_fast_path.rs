//! Rank-one channels: the second-order-cone path against the semidefinite relaxation.
//!
//! `cargo run --release --example socp_fast_path`

use std::time::Instant;

use cmbf::central::{solve_saa, solve_socp_fastpath};
use cmbf::conic::SolverOptions;
use cmbf::cvar::CvarParams;
use cmbf::model::{outer, CMatrix, CVector, SystemModel, C64};
use cmbf::scenario::{sample_states, ScenarioConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> cmbf::Result<()> {
    let (cells, users, antennas) = (2, 2, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut draw = |gain: f64| -> CMatrix {
        let h = CVector::from_fn(antennas, |_, _| {
            C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
        });
        outer(&h) * C64::new(gain, 0.0)
    };
    let channels = (0..cells)
        .map(|j| (0..cells).map(|i| (0..users).map(|_| draw(if i == j { 1.0 } else { 0.25 })).collect()).collect())
        .collect();
    let model = SystemModel::new(antennas, channels, vec![vec![1.0; users]; cells], vec![vec![1.0; users]; cells])?;
    let cfg = ScenarioConfig {
        cells,
        res_mean: 1.0,
        ..ScenarioConfig::default()
    };
    let db = sample_states(&cfg, &mut ChaCha8Rng::seed_from_u64(5), 50)?;
    let params = CvarParams::new(0.9)?;
    let opts = SolverOptions::default();

    let t = Instant::now();
    let sdp = solve_saa(&model, &db, params, &opts)?;
    let sdp_time = t.elapsed();
    let t = Instant::now();
    let socp = solve_socp_fastpath(&model, &db, params, &opts)?;
    let socp_time = t.elapsed();
    println!("SDP  objective {:.8} in {sdp_time:.2?}, worst λ2/λ1 {:.1e}", sdp.objective, sdp.solution.extraction_ratio().unwrap_or(f64::NAN));
    println!("SOCP objective {:.8} in {socp_time:.2?}", socp.objective);
    println!("relative gap {:.1e}", (sdp.objective - socp.objective).abs() / socp.objective);
    Ok(())
}
