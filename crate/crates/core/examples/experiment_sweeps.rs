//! Config-driven experiments: RES and confidence-level sweeps written as CSV tables.
//!
//! `cargo run --release --example experiment_sweeps [out-dir]`

use cmbf::cli::{run_res_sweep, run_theta_cdf, ExperimentConfig};

fn main() -> cmbf::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().join("cmbf-sweeps").display().to_string());
    let cfg = ExperimentConfig::parse(&format!(
        r#"
[scenario]
cells = 2
users = 2
antennas = 4
samples = 200

[run]
seed = 8
out = "{out}"
eval_samples = 5000
"#
    ))?;
    let res = run_res_sweep(&cfg, &[0.0, 2.0, 4.0])?;
    print!("{res}");
    let no_res = res.rows.last().expect("baseline row").stats.average;
    for row in &res.rows[..res.rows.len() - 1] {
        println!("saving vs No-RES at mean {:?}: {:.1}%", row.value, 100.0 * (no_res - row.stats.average) / no_res);
    }
    print!("{}", run_theta_cdf(&cfg, &[0.0, 0.5, 0.9])?);
    println!("tables and raw cost samples written to {out}");
    Ok(())
}
