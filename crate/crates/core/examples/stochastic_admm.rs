//! Distributed stochastic ADMM against the centralized oracle on a small network.
//!
//! `cargo run --release --example stochastic_admm`

use cmbf::central::solve_saa;
use cmbf::conic::SolverOptions;
use cmbf::cvar::CvarParams;
use cmbf::model::QOS_TOL;
use cmbf::sadmm::{run, AdmmParams, StepSchedule};
use cmbf::scenario::{make_channels, sample_states, ScenarioConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> cmbf::Result<()> {
    let cfg = ScenarioConfig {
        cells: 3,
        users: 1,
        antennas: 3,
        samples: 100,
        ..ScenarioConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let model = make_channels(&cfg, &mut rng)?;
    let db = sample_states(&cfg, &mut rng, cfg.samples)?;
    let cvar = CvarParams::new(0.9)?;
    let oracle = solve_saa(&model, &db, cvar, &SolverOptions::default())?;

    let params = AdmmParams {
        schedule: StepSchedule::InvSqrt(0.1),
        max_iters: 800,
        ..AdmmParams::new(cvar)
    };
    let out = run(&model, &db, &params, &mut rng)?;
    for r in out.trace.records.iter().filter(|r| r.iter % 100 == 0) {
        println!(
            "round {:>4}: running average {:.4} (oracle {:.4}), residual {:.2e}",
            r.iter, r.avg_objective, oracle.objective, r.residual
        );
    }
    println!("oracle powers {:.3?}", oracle.solution.powers());
    println!("ADMM powers   {:.3?} (reported round {}, converged {})", out.solution.powers(), out.reported_iteration, out.converged);
    println!("QoS met: {}", model.check_qos(&out.solution, QOS_TOL)?.all_pass());
    out.trace.write_csv(std::io::sink())?;
    Ok(())
}
