//! Relabelling the BSs relabels every result.

use cmbf::central::solve_saa;
use cmbf::conic::SolverOptions;
use cmbf::cvar::CvarParams;
use cmbf::sadmm::{self, AdmmParams, StepSchedule};
use cmbf::scenario::{make_channels, sample_states, ScenarioConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn permuting_bss_permutes_oracle_and_admm_iterates() {
    let cfg = ScenarioConfig {
        cells: 3,
        users: 1,
        antennas: 3,
        samples: 30,
        ..ScenarioConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let model = make_channels(&cfg, &mut rng).unwrap();
    let db = sample_states(&ScenarioConfig { shared_prices: false, ..cfg.clone() }, &mut rng, cfg.samples).unwrap();
    let perm = [2, 0, 1];
    let pmodel = model.permuted(&perm).unwrap();
    let pdb = db.permuted(&perm).unwrap();

    let cvar = CvarParams::new(0.9).unwrap();
    let opts = SolverOptions::default();
    let base = solve_saa(&model, &db, cvar, &opts).unwrap();
    let moved = solve_saa(&pmodel, &pdb, cvar, &opts).unwrap();
    assert!(close(base.objective, moved.objective, 1e-7));
    for (c, &old) in perm.iter().enumerate() {
        assert!(close(moved.solution.power(c), base.solution.power(old), 1e-5));
    }

    let params = AdmmParams {
        schedule: StepSchedule::Constant(0.1),
        max_iters: 40,
        parallel: false,
        ..AdmmParams::new(cvar)
    };
    let a = sadmm::run(&model, &db, &params, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
    let b = sadmm::run(&pmodel, &pdb, &params, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
    assert_eq!(a.trace.len(), b.trace.len());
    for (ra, rb) in a.trace.records.iter().zip(&b.trace.records) {
        assert_eq!(ra.sample_index, rb.sample_index);
        assert!(close(ra.inst_objective, rb.inst_objective, 1e-6), "{ra:?} vs {rb:?}");
        assert!(close(ra.residual, rb.residual, 1e-4), "{ra:?} vs {rb:?}");
    }
    for (c, &old) in perm.iter().enumerate() {
        assert!(close(b.agents[c].power, a.agents[old].power, 1e-6));
        assert!(close(b.agents[c].eta, a.agents[old].eta, 1e-9));
    }
}
