//! Physical-layer problem instance and the deterministic quantities derived from it.
//!
//! Downlink of `I` cells, each base station (BS) with `Nt` antennas serving `K`
//! single-antenna users. User `(i, k)` is served by BS `i`; the long-term SINR is
//! evaluated in lifted form from the transmit covariances `W_ik = w_ik w_ik^H`:
//!
//! ```text
//!                        tr(R_iik W_ik)
//! SINR_ik = ---------------------------------------------------------
//!           Σ_{l≠k} tr(R_iik W_il) + Σ_{j≠i} Σ_l tr(R_jik W_jl) + σ²_ik
//! ```
//!
//! where `R_jik` is the channel covariance from BS `j` to user `(i, k)`.

use log::warn;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Asymmetry above which construction logs a warning before symmetrizing.
pub const HERMITIAN_WARN_TOL: f64 = 1e-8;
/// Eigenvalue slack for PSD checks.
pub const PSD_TOL: f64 = 1e-9;
/// Default relative slack when checking SINR targets.
pub const QOS_TOL: f64 = 1e-6;

/// `Re tr(A B)` for square complex matrices, in `O(n²)`.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for m in 0..n {
        for l in 0..n {
            let x = a[(m, l)];
            let y = b[(l, m)];
            acc += x.re * y.re - x.im * y.im;
        }
    }
    acc
}

pub fn real_trace(a: &CMatrix) -> f64 {
    a.diagonal().iter().map(|z| z.re).sum()
}

/// Largest absolute entry of `A - A^H`.
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for r in 0..n {
        for c in 0..n {
            worst = worst.max((a[(r, c)] - a[(c, r)].conj()).norm());
        }
    }
    worst
}

/// `(A + A^H) / 2`.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Ascending real eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = a.clone().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Outer product `v v^H`.
pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

/// Immutable multicell downlink instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    cells: usize,
    users: usize,
    antennas: usize,
    /// Flattened `R[j][i][k]`, see [`SystemModel::channel`].
    channels: Vec<CMatrix>,
    /// Linear SINR targets, flattened `[i][k]`.
    targets: Vec<f64>,
    /// Noise variances (W), flattened `[i][k]`.
    noise: Vec<f64>,
}

impl SystemModel {
    /// Builds an instance from `channels[j][i][k]`, `targets[i][k]` and `noise[i][k]`.
    ///
    /// Channel matrices are symmetrized on the way in; a warning is logged when the
    /// input asymmetry exceeds [`HERMITIAN_WARN_TOL`].
    pub fn new(
        antennas: usize,
        channels: Vec<Vec<Vec<CMatrix>>>,
        targets: Vec<Vec<f64>>,
        noise: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let cells = channels.len();
        if cells == 0 {
            return Err(Error::Instance("at least one cell is required".into()));
        }
        if antennas == 0 {
            return Err(Error::Instance("at least one antenna is required".into()));
        }
        let users = targets.first().map_or(0, Vec::len);
        if users == 0 {
            return Err(Error::Instance("at least one user per cell is required".into()));
        }
        if targets.len() != cells || noise.len() != cells {
            return Err(Error::Instance(format!(
                "expected {cells} rows of targets and noise, got {} and {}",
                targets.len(),
                noise.len()
            )));
        }

        let mut flat = Vec::with_capacity(cells * cells * users);
        for (j, from_bs) in channels.into_iter().enumerate() {
            if from_bs.len() != cells {
                return Err(Error::Instance(format!(
                    "BS {j}: expected channels towards {cells} cells, got {}",
                    from_bs.len()
                )));
            }
            for (i, to_cell) in from_bs.into_iter().enumerate() {
                if to_cell.len() != users {
                    return Err(Error::Instance(format!(
                        "R[{j}][{i}]: expected {users} users, got {}",
                        to_cell.len()
                    )));
                }
                for (k, r) in to_cell.into_iter().enumerate() {
                    flat.push(Self::admit_covariance(r, antennas, (j, i, k))?);
                }
            }
        }

        let mut flat_targets = Vec::with_capacity(cells * users);
        let mut flat_noise = Vec::with_capacity(cells * users);
        for i in 0..cells {
            if targets[i].len() != users || noise[i].len() != users {
                return Err(Error::Instance(format!("cell {i}: expected {users} users")));
            }
            for k in 0..users {
                let (g, s) = (targets[i][k], noise[i][k]);
                if !(g > 0.0 && g.is_finite()) {
                    return Err(Error::Instance(format!("SINR target ({i},{k}) = {g} must be > 0")));
                }
                if !(s > 0.0 && s.is_finite()) {
                    return Err(Error::Instance(format!("noise variance ({i},{k}) = {s} must be > 0")));
                }
                flat_targets.push(g);
                flat_noise.push(s);
            }
        }

        Ok(Self {
            cells,
            users,
            antennas,
            channels: flat,
            targets: flat_targets,
            noise: flat_noise,
        })
    }

    fn admit_covariance(r: CMatrix, antennas: usize, at: (usize, usize, usize)) -> Result<CMatrix> {
        let (j, i, k) = at;
        if r.nrows() != antennas || r.ncols() != antennas {
            return Err(Error::Instance(format!(
                "R[{j}][{i}][{k}] is {}x{}, expected {antennas}x{antennas}",
                r.nrows(),
                r.ncols()
            )));
        }
        let defect = hermitian_defect(&r);
        if defect > HERMITIAN_WARN_TOL {
            warn!("R[{j}][{i}][{k}] asymmetry {defect:.3e}; symmetrizing");
        }
        let r = hermitian_part(&r);
        let min_eig = hermitian_eigenvalues(&r)[0];
        if min_eig < -PSD_TOL {
            return Err(Error::Instance(format!(
                "R[{j}][{i}][{k}] is not PSD (min eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(r)
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    /// Number of `(cell, user)` pairs.
    pub fn num_links(&self) -> usize {
        self.cells * self.users
    }

    /// Flat index of user `(i, k)`.
    pub fn link(&self, i: usize, k: usize) -> usize {
        i * self.users + k
    }

    /// Covariance of the channel from BS `j` to user `(i, k)`.
    pub fn channel(&self, j: usize, i: usize, k: usize) -> &CMatrix {
        &self.channels[(j * self.cells + i) * self.users + k]
    }

    pub fn target(&self, i: usize, k: usize) -> f64 {
        self.targets[self.link(i, k)]
    }

    pub fn noise(&self, i: usize, k: usize) -> f64 {
        self.noise[self.link(i, k)]
    }

    /// Copy of the instance with every SINR target replaced by `gamma`.
    pub fn with_target(&self, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Instance(format!("SINR target {gamma} must be > 0")));
        }
        let mut out = self.clone();
        out.targets.iter_mut().for_each(|g| *g = gamma);
        Ok(out)
    }

    /// Copy of the instance with the cells relabelled: new cell `c` is old cell `perm[c]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.cells {
            return Err(Error::Input("permutation length differs from cell count".into()));
        }
        let mut seen = vec![false; self.cells];
        for &p in perm {
            if p >= self.cells || std::mem::replace(&mut seen[p], true) {
                return Err(Error::Input("not a permutation".into()));
            }
        }
        let mut channels = Vec::with_capacity(self.channels.len());
        for j in 0..self.cells {
            for i in 0..self.cells {
                for k in 0..self.users {
                    channels.push(self.channel(perm[j], perm[i], k).clone());
                }
            }
        }
        let mut targets = Vec::with_capacity(self.targets.len());
        let mut noise = Vec::with_capacity(self.noise.len());
        for &old in perm {
            for k in 0..self.users {
                targets.push(self.target(old, k));
                noise.push(self.noise(old, k));
            }
        }
        Ok(Self {
            channels,
            targets,
            noise,
            ..self.clone()
        })
    }

    fn check_solution(&self, sol: &BeamformingSolution) -> Result<()> {
        if sol.cells() != self.cells || sol.users() != self.users {
            return Err(Error::Instance(format!(
                "solution is {}x{} (cells x users), model is {}x{}",
                sol.cells(),
                sol.users(),
                self.cells,
                self.users
            )));
        }
        if sol.covariances.iter().any(|w| w.nrows() != self.antennas) {
            return Err(Error::Instance("solution block size differs from antenna count".into()));
        }
        Ok(())
    }

    /// Long-term SINR of user `(i, k)` under `sol`.
    pub fn sinr(&self, sol: &BeamformingSolution, i: usize, k: usize) -> Result<f64> {
        self.check_solution(sol)?;
        if i >= self.cells || k >= self.users {
            return Err(Error::Instance(format!("user ({i},{k}) out of range")));
        }
        Ok(self.sinr_unchecked(&sol.covariances, i, k))
    }

    pub(crate) fn sinr_unchecked(&self, blocks: &[CMatrix], i: usize, k: usize) -> f64 {
        let own = self.channel(i, i, k);
        let signal = trace_product(own, &blocks[self.link(i, k)]);
        let mut interference = self.noise(i, k);
        for j in 0..self.cells {
            let r = self.channel(j, i, k);
            for l in 0..self.users {
                if j == i && l == k {
                    continue;
                }
                interference += trace_product(r, &blocks[self.link(j, l)]);
            }
        }
        signal / interference
    }

    /// Per-user QoS verdicts: user `(i, k)` passes iff `SINR_ik ≥ γ_ik (1 − tol)`.
    pub fn check_qos(&self, sol: &BeamformingSolution, tol: f64) -> Result<QosReport> {
        self.check_solution(sol)?;
        let mut sinr = Vec::with_capacity(self.num_links());
        let mut pass = Vec::with_capacity(self.num_links());
        for i in 0..self.cells {
            for k in 0..self.users {
                let s = self.sinr_unchecked(&sol.covariances, i, k);
                pass.push(s >= self.target(i, k) * (1.0 - tol));
                sinr.push(s);
            }
        }
        Ok(QosReport {
            users: self.users,
            sinr,
            pass,
        })
    }
}

/// Outcome of [`SystemModel::check_qos`].
#[derive(Debug, Clone, PartialEq)]
pub struct QosReport {
    users: usize,
    sinr: Vec<f64>,
    pass: Vec<bool>,
}

impl QosReport {
    pub fn passes(&self, i: usize, k: usize) -> bool {
        self.pass[i * self.users + k]
    }

    pub fn sinr(&self, i: usize, k: usize) -> f64 {
        self.sinr[i * self.users + k]
    }

    pub fn all_pass(&self) -> bool {
        self.pass.iter().all(|&p| p)
    }

    /// Users `(i, k)` below target.
    pub fn failures(&self) -> Vec<(usize, usize)> {
        self.pass
            .iter()
            .enumerate()
            .filter(|(_, &p)| !p)
            .map(|(n, _)| (n / self.users, n % self.users))
            .collect()
    }
}

/// Transmit covariances and derived per-BS quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingSolution {
    cells: usize,
    users: usize,
    covariances: Vec<CMatrix>,
    beamformers: Option<Vec<CVector>>,
    power: Vec<f64>,
    eta: Vec<f64>,
    /// Largest `λ2/λ1` over the blocks when `beamformers` came from extraction.
    extraction_ratio: Option<f64>,
}

impl BeamformingSolution {
    /// Wraps covariance blocks (flattened `[i][k]`); powers are recomputed from traces.
    pub fn from_covariances(cells: usize, users: usize, covariances: Vec<CMatrix>, eta: Vec<f64>) -> Result<Self> {
        if covariances.len() != cells * users {
            return Err(Error::Instance(format!(
                "expected {} covariance blocks, got {}",
                cells * users,
                covariances.len()
            )));
        }
        if eta.len() != cells {
            return Err(Error::Instance(format!("expected {cells} thresholds, got {}", eta.len())));
        }
        let power = (0..cells)
            .map(|i| covariances[i * users..(i + 1) * users].iter().map(real_trace).sum())
            .collect();
        Ok(Self {
            cells,
            users,
            covariances,
            beamformers: None,
            power,
            eta,
            extraction_ratio: None,
        })
    }

    /// Builds the rank-one solution `W_ik = w_ik w_ik^H`.
    pub fn from_beamformers(cells: usize, users: usize, beamformers: Vec<CVector>, eta: Vec<f64>) -> Result<Self> {
        let covariances = beamformers.iter().map(outer).collect();
        let mut sol = Self::from_covariances(cells, users, covariances, eta)?;
        sol.beamformers = Some(beamformers);
        sol.extraction_ratio = Some(0.0);
        Ok(sol)
    }

    /// Attaches extracted beamformers along with the worst eigenvalue ratio observed.
    pub fn with_beamformers(mut self, beamformers: Vec<CVector>, ratio: f64) -> Self {
        debug_assert_eq!(beamformers.len(), self.covariances.len());
        self.beamformers = Some(beamformers);
        self.extraction_ratio = Some(ratio);
        self
    }

    pub fn with_eta(mut self, eta: Vec<f64>) -> Self {
        debug_assert_eq!(eta.len(), self.cells);
        self.eta = eta;
        self
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn covariance(&self, i: usize, k: usize) -> &CMatrix {
        &self.covariances[i * self.users + k]
    }

    pub fn covariances(&self) -> &[CMatrix] {
        &self.covariances
    }

    pub fn beamformer(&self, i: usize, k: usize) -> Option<&CVector> {
        self.beamformers.as_ref().map(|b| &b[i * self.users + k])
    }

    pub fn beamformers(&self) -> Option<&[CVector]> {
        self.beamformers.as_deref()
    }

    pub fn extraction_ratio(&self) -> Option<f64> {
        self.extraction_ratio
    }

    /// Transmit power `P_i = Σ_k tr(W_ik)`.
    pub fn power(&self, i: usize) -> f64 {
        self.power[i]
    }

    pub fn powers(&self) -> &[f64] {
        &self.power
    }

    pub fn total_power(&self) -> f64 {
        self.power.iter().sum()
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }
}

/// Prices and harvested energy seen by one BS in one random state.
///
/// Invariant: `a ≥ b ≥ 0`, `e ≥ 0`, all finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsState {
    a: f64,
    b: f64,
    e: f64,
}

impl BsState {
    pub fn new(buy: f64, sell: f64, harvested: f64) -> Result<Self> {
        if !(buy.is_finite() && sell.is_finite() && harvested.is_finite()) {
            return Err(Error::Input("non-finite price or energy".into()));
        }
        if sell < 0.0 {
            return Err(Error::Input(format!("sell price {sell} is negative")));
        }
        if buy < sell {
            return Err(Error::Input(format!(
                "buy price {buy} below sell price {sell}: pricing rule requires a >= b"
            )));
        }
        if harvested < 0.0 {
            return Err(Error::Input(format!("harvested energy {harvested} is negative")));
        }
        Ok(Self {
            a: buy,
            b: sell,
            e: harvested,
        })
    }

    /// Buy price `a`.
    pub fn buy(&self) -> f64 {
        self.a
    }

    /// Sell price `b`.
    pub fn sell(&self) -> f64 {
        self.b
    }

    /// Harvested energy `e`.
    pub fn harvested(&self) -> f64 {
        self.e
    }

    /// Same prices with the harvested energy replaced.
    pub fn with_harvested(self, harvested: f64) -> Result<Self> {
        Self::new(self.a, self.b, harvested)
    }
}

/// Net energy transaction cost `a [P − e]^+ − b [e − P]^+`.
pub fn transaction_cost(power: f64, s: &BsState) -> f64 {
    let gap = power - s.e;
    if gap >= 0.0 {
        s.a * gap
    } else {
        s.b * gap
    }
}

/// The same cost written as `α |P − e| + β (P − e)` with `α = (a−b)/2`, `β = (a+b)/2`.
pub fn transaction_cost_symmetric(power: f64, s: &BsState) -> f64 {
    let alpha = 0.5 * (s.a - s.b);
    let beta = 0.5 * (s.a + s.b);
    let gap = power - s.e;
    alpha * gap.abs() + beta * gap
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn scalar_model(cells: usize, gain: f64) -> SystemModel {
        let one = CMatrix::from_element(1, 1, c(gain));
        let channels = vec![vec![vec![one; 1]; cells]; cells];
        SystemModel::new(1, channels, vec![vec![1.0]; cells], vec![vec![1.0]; cells]).unwrap()
    }

    #[test]
    fn sinr_single_user_no_interference() {
        let channels = vec![vec![vec![CMatrix::identity(2, 2)]]];
        let model = SystemModel::new(2, channels, vec![vec![8.0]], vec![vec![1.0]]).unwrap();
        let w = CMatrix::from_diagonal(&CVector::from_vec(vec![c(3.0), c(0.0)]));
        let sol = BeamformingSolution::from_covariances(1, 1, vec![w], vec![0.0]).unwrap();
        assert_relative_eq!(model.sinr(&sol, 0, 0).unwrap(), 3.0, epsilon = 1e-15);
    }

    #[test]
    fn sinr_two_cells_scalar() {
        let model = scalar_model(2, 1.0);
        let blocks = vec![CMatrix::from_element(1, 1, c(4.0)), CMatrix::from_element(1, 1, c(2.0))];
        let sol = BeamformingSolution::from_covariances(2, 1, blocks, vec![0.0; 2]).unwrap();
        assert_relative_eq!(model.sinr(&sol, 0, 0).unwrap(), 4.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(model.sinr(&sol, 1, 0).unwrap(), 2.0 / 5.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_beamformers_give_zero_sinr_and_fail_qos() {
        let model = scalar_model(3, 0.7);
        let blocks = vec![CMatrix::zeros(1, 1); 3];
        let sol = BeamformingSolution::from_covariances(3, 1, blocks, vec![0.0; 3]).unwrap();
        for i in 0..3 {
            assert_eq!(model.sinr(&sol, i, 0).unwrap(), 0.0);
        }
        let report = model.check_qos(&sol, QOS_TOL).unwrap();
        assert!(!report.all_pass());
        assert_eq!(report.failures().len(), 3);
    }

    #[test]
    fn qos_boundary_and_miss() {
        let channels = vec![vec![vec![CMatrix::identity(1, 1)]]];
        let model = SystemModel::new(1, channels, vec![vec![8.0]], vec![vec![1.0]]).unwrap();
        let exact = BeamformingSolution::from_covariances(1, 1, vec![CMatrix::from_element(1, 1, c(8.0))], vec![0.0])
            .unwrap();
        assert!(model.check_qos(&exact, 1e-6).unwrap().passes(0, 0));
        let short = BeamformingSolution::from_covariances(1, 1, vec![CMatrix::from_element(1, 1, c(7.9))], vec![0.0])
            .unwrap();
        assert!(!model.check_qos(&short, 1e-6).unwrap().passes(0, 0));
    }

    #[test]
    fn dimension_mismatch_is_an_instance_error() {
        let model = scalar_model(2, 1.0);
        let sol = BeamformingSolution::from_covariances(1, 1, vec![CMatrix::zeros(1, 1)], vec![0.0]).unwrap();
        assert!(matches!(model.sinr(&sol, 0, 0), Err(Error::Instance(_))));
    }

    #[test]
    fn rejects_non_psd_and_bad_targets() {
        let bad = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0), c(-1.0)]));
        assert!(SystemModel::new(2, vec![vec![vec![bad]]], vec![vec![1.0]], vec![vec![1.0]]).is_err());
        let id = CMatrix::identity(2, 2);
        assert!(SystemModel::new(2, vec![vec![vec![id.clone()]]], vec![vec![0.0]], vec![vec![1.0]]).is_err());
        assert!(SystemModel::new(2, vec![vec![vec![id]]], vec![vec![1.0]], vec![vec![0.0]]).is_err());
    }

    #[test]
    fn symmetrizes_slightly_asymmetric_input() {
        let mut r = CMatrix::identity(2, 2);
        r[(0, 1)] = C64::new(0.5, 1e-7);
        r[(1, 0)] = C64::new(0.5, 0.0);
        let model = SystemModel::new(2, vec![vec![vec![r]]], vec![vec![1.0]], vec![vec![1.0]]).unwrap();
        assert!(hermitian_defect(model.channel(0, 0, 0)) < 1e-15);
    }

    #[test]
    fn power_is_trace_sum() {
        let blocks = vec![CMatrix::identity(2, 2).scale(1.5), CMatrix::identity(2, 2)];
        let sol = BeamformingSolution::from_covariances(1, 2, blocks, vec![0.0]).unwrap();
        assert_relative_eq!(sol.power(0), 5.0);
    }

    #[test]
    fn cost_examples() {
        let s = BsState::new(1.0, 0.9, 3.0).unwrap();
        assert_relative_eq!(transaction_cost(5.0, &s), 2.0, epsilon = 1e-15);
        let s = BsState::new(1.0, 0.9, 6.0).unwrap();
        assert_relative_eq!(transaction_cost(3.0, &s), -2.7, epsilon = 1e-15);
        let s = BsState::new(1.3, 0.2, 4.25).unwrap();
        assert_eq!(transaction_cost(4.25, &s), 0.0);
    }

    #[test]
    fn pricing_rule_enforced() {
        assert!(matches!(BsState::new(0.8, 0.9, 1.0), Err(Error::Input(_))));
        assert!(BsState::new(1.0, 0.9, -1.0).is_err());
        assert!(BsState::new(1.0, -0.1, 1.0).is_err());
    }

    #[test]
    fn phase_rotation_leaves_covariance_unchanged() {
        let v = CVector::from_vec(vec![C64::new(0.3, -1.2), C64::new(2.0, 0.4), C64::new(-0.7, 0.1)]);
        let base = outer(&v);
        for phi in [0.1, 1.0, 2.5, -3.0] {
            let rotated = outer(&v.scale(1.0).map(|z| z * C64::from_polar(1.0, phi)));
            assert!((&rotated - &base).norm() < 1e-12);
        }
    }

    fn state() -> impl Strategy<Value = BsState> {
        (0.0..2.0f64, 0.0..1.0f64, 0.0..20.0f64)
            .prop_map(|(a, frac, e)| BsState::new(a, a * frac, e).unwrap())
    }

    proptest! {
        #[test]
        fn cost_forms_agree(p in 0.0..40.0f64, s in state()) {
            let gap = (transaction_cost(p, &s) - transaction_cost_symmetric(p, &s)).abs();
            prop_assert!(gap <= 1e-12 * (1.0 + p.abs() + s.harvested()));
        }

        #[test]
        fn cost_is_convex(p1 in 0.0..40.0f64, p2 in 0.0..40.0f64, t in 0.0..=1.0f64, s in state()) {
            let mid = transaction_cost(t * p1 + (1.0 - t) * p2, &s);
            let chord = t * transaction_cost(p1, &s) + (1.0 - t) * transaction_cost(p2, &s);
            prop_assert!(mid <= chord + 1e-12);
        }

        #[test]
        fn cost_is_nondecreasing(p in 0.0..40.0f64, dp in 0.0..10.0f64, s in state()) {
            prop_assert!(transaction_cost(p + dp, &s) >= transaction_cost(p, &s) - 1e-12);
        }

        #[test]
        fn sinr_phase_invariant(re in -2.0..2.0f64, im in -2.0..2.0f64, phi in 0.0..6.3f64) {
            let model = scalar_model(2, 0.5);
            let w0 = CVector::from_vec(vec![C64::new(re, im)]);
            let w1 = CVector::from_vec(vec![C64::new(1.0, 0.5)]);
            let base = BeamformingSolution::from_beamformers(2, 1, vec![w0.clone(), w1.clone()], vec![0.0; 2]).unwrap();
            let rot = w0.map(|z| z * C64::from_polar(1.0, phi));
            let turned = BeamformingSolution::from_beamformers(2, 1, vec![rot, w1], vec![0.0; 2]).unwrap();
            for i in 0..2 {
                let a = model.sinr(&base, i, 0).unwrap();
                let b = model.sinr(&turned, i, 0).unwrap();
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
                prop_assert!((base.power(i) - turned.power(i)).abs() <= 1e-12 * (1.0 + base.power(i)));
            }
        }
    }
}
