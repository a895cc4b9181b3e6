//! Index bookkeeping for the private interference vectors `q_i` and the public copy `q̄`.
//!
//! `q_i ∈ R^{IK}` holds `Q_i1..Q_iK` followed by `q_ijk` for `j ≠ i`, ordered by `j`
//! then `k`. `q̄ ∈ R^{I(I−1)K}` holds `q̄_ijk` ordered by source `i`, receiver `j ≠ i`,
//! then user `k`. The mapping `q_i = B_i q̄` sums the public slots `q̄_jik` (all
//! interference reaching UE `(i, k)`) into `Q_ik` and selects `q̄_ijk` for `q_ijk`.
//!
//! Every public slot is selected once and summed once, so `Σ_i B_iᵀ B_i` is block
//! diagonal over receiver groups `(j, k)` with blocks `I + 𝟙𝟙ᵀ` of side `I − 1`, whose
//! inverse is `I − 𝟙𝟙ᵀ / I`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConsensusLayout {
    cells: usize,
    users: usize,
}

impl ConsensusLayout {
    /// Fails for a single BS, where consensus is vacuous.
    pub fn new(cells: usize, users: usize) -> Result<Self> {
        if cells < 2 {
            return Err(Error::Input(format!(
                "consensus needs at least 2 BSs, got {cells}; solve single-cell problems centrally"
            )));
        }
        if users == 0 {
            return Err(Error::Input("consensus needs at least one user per BS".into()));
        }
        Ok(Self { cells, users })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn users(&self) -> usize {
        self.users
    }

    /// Length of each `q_i`.
    pub fn local_len(&self) -> usize {
        self.cells * self.users
    }

    /// Length of `q̄`.
    pub fn public_len(&self) -> usize {
        self.cells * (self.cells - 1) * self.users
    }

    /// Position of `other` among the BSs different from `me`.
    fn rank(me: usize, other: usize) -> usize {
        debug_assert_ne!(me, other);
        if other < me {
            other
        } else {
            other - 1
        }
    }

    /// Slot of `Q_ik` in `q_i`.
    pub fn total_slot(&self, k: usize) -> usize {
        k
    }

    /// Slot of `q_ijk` in `q_i`.
    pub fn cross_slot(&self, i: usize, j: usize, k: usize) -> usize {
        self.users + Self::rank(i, j) * self.users + k
    }

    /// Slot of `q̄_ijk` (interference from BS `i` at UE `(j, k)`) in `q̄`.
    pub fn public_slot(&self, i: usize, j: usize, k: usize) -> usize {
        (i * (self.cells - 1) + Self::rank(i, j)) * self.users + k
    }

    /// `(j, k)` for each cross slot of `q_i`, in slot order.
    pub fn cross_targets(&self, i: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.cells)
            .filter(move |&j| j != i)
            .flat_map(move |j| (0..self.users).map(move |k| (j, k)))
    }

    /// `B_i q̄`.
    pub fn apply(&self, i: usize, qbar: &[f64]) -> Vec<f64> {
        debug_assert_eq!(qbar.len(), self.public_len());
        let mut out = vec![0.0; self.local_len()];
        for k in 0..self.users {
            out[self.total_slot(k)] = (0..self.cells)
                .filter(|&j| j != i)
                .map(|j| qbar[self.public_slot(j, i, k)])
                .sum();
        }
        for (j, k) in self.cross_targets(i) {
            out[self.cross_slot(i, j, k)] = qbar[self.public_slot(i, j, k)];
        }
        out
    }

    /// Accumulates `B_iᵀ v` into `acc`.
    pub fn add_transpose(&self, i: usize, v: &[f64], acc: &mut [f64]) {
        debug_assert_eq!(v.len(), self.local_len());
        for k in 0..self.users {
            for j in (0..self.cells).filter(|&j| j != i) {
                acc[self.public_slot(j, i, k)] += v[self.total_slot(k)];
            }
        }
        for (j, k) in self.cross_targets(i) {
            acc[self.public_slot(i, j, k)] += v[self.cross_slot(i, j, k)];
        }
    }

    /// Materialized `B_i`.
    pub fn matrix(&self, i: usize) -> DMatrix<f64> {
        let mut b = DMatrix::zeros(self.local_len(), self.public_len());
        for k in 0..self.users {
            for j in (0..self.cells).filter(|&j| j != i) {
                b[(self.total_slot(k), self.public_slot(j, i, k))] = 1.0;
            }
        }
        for (j, k) in self.cross_targets(i) {
            b[(self.cross_slot(i, j, k), self.public_slot(i, j, k))] = 1.0;
        }
        b
    }

    /// Minimizer of `Σ_i −λ_iᵀ B_i q̄ + (ρ/2) ‖B_i q̄ − q_i‖²`.
    ///
    /// Solves `(Σ B_iᵀB_i) q̄ = Σ B_iᵀ (q_i + λ_i/ρ)` group by group with the closed-form
    /// inverse `I − 𝟙𝟙ᵀ/I`.
    pub fn public_update(&self, q: &[Vec<f64>], lambda: &[Vec<f64>], rho: f64) -> Result<Vec<f64>> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::Input(format!("penalty ρ = {rho} must be positive")));
        }
        if q.len() != self.cells || lambda.len() != self.cells {
            return Err(Error::Input("one (q_i, λ_i) pair per BS is required".into()));
        }
        let mut rhs = vec![0.0; self.public_len()];
        for i in 0..self.cells {
            let v: Vec<f64> = q[i].iter().zip(&lambda[i]).map(|(q, l)| q + l / rho).collect();
            self.add_transpose(i, &v, &mut rhs);
        }
        let mut qbar = rhs.clone();
        let scale = 1.0 / self.cells as f64;
        for j in 0..self.cells {
            for k in 0..self.users {
                let group: Vec<usize> = (0..self.cells)
                    .filter(|&i| i != j)
                    .map(|i| self.public_slot(i, j, k))
                    .collect();
                let total: f64 = group.iter().map(|&s| rhs[s]).sum();
                for s in group {
                    qbar[s] = rhs[s] - total * scale;
                }
            }
        }
        Ok(qbar)
    }

    /// `Σ_i ‖B_i q̄ − q_i‖₂`.
    pub fn residual(&self, qbar: &[f64], q: &[Vec<f64>]) -> f64 {
        (0..self.cells)
            .map(|i| {
                self.apply(i, qbar)
                    .iter()
                    .zip(&q[i])
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .sum()
    }
}
