//! Selection/summation matrices of the consensus constraints and the closed-form public update.
//!
//! `cargo run --release --example consensus_layout`

use cmbf::sadmm::ConsensusLayout;

fn main() -> cmbf::Result<()> {
    let layout = ConsensusLayout::new(3, 1)?;
    println!("q_i has {} entries, q̄ has {}", layout.local_len(), layout.public_len());
    for i in 0..layout.cells() {
        println!("B_{i} =\n{}", layout.matrix(i));
    }
    // Each BS reports its interference vector; disagreements are averaged out.
    let q = vec![vec![2.0, 1.0, 0.5], vec![1.5, 0.7, 0.8], vec![1.0, 0.4, 0.9]];
    let lambda = vec![vec![0.0; 3]; 3];
    let qbar = layout.public_update(&q, &lambda, 1.0)?;
    println!("q̄ = {qbar:.4?}");
    println!("consensus residual Σ‖B_i q̄ − q_i‖ = {:.4}", layout.residual(&qbar, &q));
    Ok(())
}
