//! Empirical VaR/CVaR of a cost sample and the variational form minimized over η.
//!
//! `cargo run --release --example cvar_risk`

use cmbf::cvar::{empirical_cvar, empirical_f, empirical_var, subgradient, subgradient_bound, CvarParams};
use cmbf::model::{transaction_cost, BsState};
use cmbf::scenario::{sample_states, ScenarioConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> cmbf::Result<()> {
    let cfg = ScenarioConfig {
        cells: 1,
        ..ScenarioConfig::default()
    };
    let db = sample_states(&cfg, &mut ChaCha8Rng::seed_from_u64(2), 10_000)?;
    let states: Vec<BsState> = db.column(0);
    let power = 12.0;
    let costs: Vec<f64> = states.iter().map(|s| transaction_cost(power, s)).collect();
    println!("BS drawing {power} W against Weibull renewables (mean {} W):", cfg.res_mean);
    println!("{:>6} {:>10} {:>10} {:>14}", "θ", "VaR", "CVaR", "F(P, VaR)");
    for theta in [0.0, 0.5, 0.9, 0.99] {
        let params = CvarParams::new(theta)?;
        let var = empirical_var(&costs, theta)?;
        let cvar = empirical_cvar(&costs, theta)?;
        let f = empirical_f(power, var, &states, params);
        println!("{theta:>6} {var:>10.4} {cvar:>10.4} {f:>14.4}");
    }
    let params = CvarParams::new(0.9)?;
    let (dp, deta) = subgradient(power, 0.0, &states[0], params);
    println!(
        "\nsubgradient at η = 0 on the first sample: ({dp:.3}, {deta:.3}); squared norm bound {:.3}",
        subgradient_bound(db.a_max(), params)
    );
    Ok(())
}
