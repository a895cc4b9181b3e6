//! Draws a channel instance and a renewable/price archive, then writes the archive as CSV.
//!
//! `cargo run --release --example scenario_generation`

use cmbf::model::hermitian_eigenvalues;
use cmbf::scenario::{make_channels, sample_states, write_database, ScenarioConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> cmbf::Result<()> {
    let cfg = ScenarioConfig {
        samples: 5,
        ..ScenarioConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let model = make_channels(&cfg, &mut rng)?;
    println!(
        "{} BSs × {} users, {} antennas, SINR target {}, noise {} W",
        model.cells(),
        model.users(),
        model.antennas(),
        model.target(0, 0),
        model.noise(0, 0)
    );
    let eig = hermitian_eigenvalues(model.channel(0, 0, 0));
    println!("eigenvalues of R_0,0,0: {:.3?}", eig);
    println!("largest eigenvalue of a cross-cell channel: {:.3}", hermitian_eigenvalues(model.channel(1, 0, 0)).last().unwrap());

    let db = sample_states(&cfg, &mut rng, cfg.samples)?;
    println!("\narchive ({} samples, largest buy price {:.3}):", db.len(), db.a_max());
    write_database(&db, std::io::stdout().lock())?;
    Ok(())
}
