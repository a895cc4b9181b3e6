//! Gaussian randomization with power rescaling recovers beamformers from full-rank covariances.
//!
//! `cargo run --release --example rank_one_extraction`

use cmbf::central::solve_min_power;
use cmbf::conic::{extract_rank_one, randomize_and_scale, SolverOptions, RANK_ONE_TOL};
use cmbf::model::{CMatrix, C64, QOS_TOL};
use cmbf::scenario::{make_channels, ScenarioConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> cmbf::Result<()> {
    let cfg = ScenarioConfig {
        cells: 2,
        users: 2,
        antennas: 4,
        ..ScenarioConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let model = make_channels(&cfg, &mut rng)?;
    let optimal = solve_min_power(&model, &SolverOptions::default())?;
    println!("relaxation optimum: {:.4} W", optimal.total_power());
    for w in optimal.covariances() {
        println!("  rank-one test passes: {}", extract_rank_one(w, RANK_ONE_TOL).ok);
    }

    // Blur the optimum into full-rank covariances, then recover beamformers.
    let blurred: Vec<CMatrix> = optimal
        .covariances()
        .iter()
        .map(|w| w + CMatrix::identity(w.nrows(), w.ncols()) * C64::new(0.1 * w.trace().re, 0.0))
        .collect();
    for trials in [1, 10, 100] {
        let sol = randomize_and_scale(&model, &blurred, trials, &mut rng)?;
        let qos = model.check_qos(&sol, QOS_TOL)?;
        println!(
            "{trials:>4} trials: {:.4} W ({:.2}× optimum), QoS met: {}",
            sol.total_power(),
            sol.total_power() / optimal.total_power(),
            qos.all_pass()
        );
    }
    Ok(())
}
