//! Centralized sample-average solve against the minimum-power and No-RES baselines.
//!
//! `cargo run --release --example centralized_oracle`

use cmbf::central::{solve_min_power, solve_no_res_baseline, solve_saa};
use cmbf::cli::evaluate_costs;
use cmbf::conic::SolverOptions;
use cmbf::cvar::CvarParams;
use cmbf::model::QOS_TOL;
use cmbf::scenario::{make_channels, sample_states, ScenarioConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> cmbf::Result<()> {
    let cfg = ScenarioConfig {
        cells: 3,
        users: 2,
        antennas: 4,
        samples: 200,
        ..ScenarioConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let model = make_channels(&cfg, &mut rng)?;
    let db = sample_states(&cfg, &mut rng, cfg.samples)?;
    let opts = SolverOptions::default();

    let min_power = solve_min_power(&model, &opts)?;
    println!("minimum sum power {:.3} W", min_power.total_power());

    for theta in [0.0, 0.9] {
        let sol = solve_saa(&model, &db, CvarParams::new(theta)?, &opts)?;
        let qos = model.check_qos(&sol.solution, QOS_TOL)?;
        let costs = evaluate_costs(sol.solution.powers(), &db);
        println!(
            "θ = {theta}: objective {:.4}, powers {:.3?}, mean cost {:.4}, QoS met: {}, rank-one: {}",
            sol.objective,
            sol.solution.powers(),
            costs.iter().sum::<f64>() / costs.len() as f64,
            qos.all_pass(),
            sol.solution.beamformers().is_some()
        );
    }
    let baseline = solve_no_res_baseline(&model, &db, &opts)?;
    println!(
        "No-RES mean cost {:.4}",
        baseline.costs.iter().sum::<f64>() / baseline.costs.len() as f64
    );
    Ok(())
}
