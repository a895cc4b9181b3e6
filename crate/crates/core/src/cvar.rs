//! Value-at-risk and conditional value-at-risk of the transaction cost.
//!
//! The CVaR of a cost `f̂` at confidence `θ` has the variational form
//!
//! ```text
//! CVaR_θ = min_η F(η),   F(η) = η + E[(f̂ − η)^+] / (1 − θ)
//! ```
//!
//! whose single-sample integrand `f(P, η, s) = η + (f̂(P, s) − η)^+ / (1 − θ)` drives
//! the stochastic updates. Its subgradient follows the case split of the hinge and
//! of the buy/sell kink of `f̂`, taking the `≥` branch at ties.

use crate::error::{Error, Result};
use crate::model::{transaction_cost, BsState};

/// Confidence level `θ ∈ [0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvarParams {
    theta: f64,
}

impl CvarParams {
    pub fn new(theta: f64) -> Result<Self> {
        check_theta(theta)?;
        Ok(Self { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `1 / (1 − θ)`.
    pub fn tail_weight(&self) -> f64 {
        1.0 / (1.0 - self.theta)
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..1.0).contains(&theta) {
        return Err(Error::Input(format!("confidence level {theta} outside [0, 1)")));
    }
    Ok(())
}

fn sorted(costs: &[f64]) -> Result<Vec<f64>> {
    if costs.is_empty() {
        return Err(Error::Input("empty cost sample".into()));
    }
    if costs.iter().any(|c| !c.is_finite()) {
        return Err(Error::Input("non-finite cost sample".into()));
    }
    let mut v = costs.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Smallest sample `v` whose empirical CDF `#{c ≤ v} / n` reaches `θ`.
pub fn empirical_var(costs: &[f64], theta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::Input(format!("confidence level {theta} outside [0, 1]")));
    }
    let v = sorted(costs)?;
    let n = v.len();
    // Index of the first sample at which the count of samples ≤ value reaches θ n.
    // Ties are resolved by walking to the last duplicate of each value.
    let mut idx = 0;
    while idx < n {
        let mut last = idx;
        while last + 1 < n && v[last + 1] == v[idx] {
            last += 1;
        }
        if (last + 1) as f64 >= theta * n as f64 {
            return Ok(v[idx]);
        }
        idx = last + 1;
    }
    Ok(v[n - 1])
}

/// `min_η { η + Σ_s (c_s − η)^+ / ((1 − θ) n) }`, minimized exactly over the sample points.
///
/// The objective is convex and piecewise linear with breakpoints at the samples, so
/// its minimum is attained at one of them. Suffix sums make the sweep `O(n log n)`.
pub fn empirical_cvar(costs: &[f64], theta: f64) -> Result<f64> {
    if theta == 1.0 {
        return Err(Error::Input("CVaR undefined at confidence level 1".into()));
    }
    check_theta(theta)?;
    let v = sorted(costs)?;
    let n = v.len();
    let scale = 1.0 / ((1.0 - theta) * n as f64);

    let mut suffix = vec![0.0; n + 1];
    for idx in (0..n).rev() {
        suffix[idx] = suffix[idx + 1] + v[idx];
    }
    let mut best = f64::INFINITY;
    for (idx, &eta) in v.iter().enumerate() {
        // Samples strictly above `eta` start after the last duplicate of `eta`; the
        // duplicates contribute zero either way.
        let above = n - idx;
        let excess = suffix[idx] - above as f64 * eta;
        best = best.min(eta + scale * excess);
    }
    Ok(best)
}

/// Single-sample integrand `η + (f̂(P, s) − η)^+ / (1 − θ)`.
pub fn f_value(power: f64, eta: f64, s: &BsState, params: CvarParams) -> f64 {
    let excess = transaction_cost(power, s) - eta;
    eta + params.tail_weight() * excess.max(0.0)
}

/// Partial derivatives `(∂f/∂P, ∂f/∂η)` of the single-sample integrand.
pub fn subgradient(power: f64, eta: f64, s: &BsState, params: CvarParams) -> (f64, f64) {
    let w = params.tail_weight();
    if transaction_cost(power, s) >= eta {
        let price = if power >= s.harvested() { s.buy() } else { s.sell() };
        (price * w, -params.theta() * w)
    } else {
        (0.0, 1.0)
    }
}

/// Upper bound on `(∂f/∂P)² + (∂f/∂η)²` over every state with buy price at most `a_max`.
pub fn subgradient_bound(a_max: f64, params: CvarParams) -> f64 {
    let theta = params.theta();
    (a_max * a_max + theta.max(1.0 - theta).powi(2)) * params.tail_weight().powi(2)
}

/// Empirical mean of `f_value` over a set of states for one BS.
pub fn empirical_f(power: f64, eta: f64, states: &[BsState], params: CvarParams) -> f64 {
    states.iter().map(|s| f_value(power, eta, s, params)).sum::<f64>() / states.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn one_to_ten() -> Vec<f64> {
        (1..=10).map(f64::from).collect()
    }

    fn p(theta: f64) -> CvarParams {
        CvarParams::new(theta).unwrap()
    }

    #[test]
    fn var_examples() {
        assert_eq!(empirical_var(&one_to_ten(), 0.9).unwrap(), 9.0);
        assert_eq!(empirical_var(&one_to_ten(), 0.0).unwrap(), 1.0);
        assert_eq!(empirical_var(&[2.5; 7], 0.37).unwrap(), 2.5);
        assert!(empirical_var(&[], 0.5).is_err());
    }

    #[test]
    fn cvar_examples() {
        let c = one_to_ten();
        assert_relative_eq!(empirical_cvar(&c, 0.0).unwrap(), 5.5, epsilon = 1e-12);
        assert_relative_eq!(empirical_cvar(&c, 0.9).unwrap(), 10.0, epsilon = 1e-12);
        // θ = 1 − 1/n isolates the maximum.
        let shuffled = [3.0, -1.0, 7.5, 2.0];
        assert_relative_eq!(empirical_cvar(&shuffled, 0.75).unwrap(), 7.5, epsilon = 1e-12);
        assert!(empirical_cvar(&c, 1.0).is_err());
        assert!(empirical_cvar(&[], 0.5).is_err());
    }

    #[test]
    fn f_value_examples() {
        let s = BsState::new(1.0, 0.9, 0.0).unwrap();
        // f̂ = P when e = 0.
        assert_relative_eq!(f_value(2.0, 2.0, &s, p(0.9)), 2.0);
        assert_relative_eq!(f_value(2.0, 1.0, &s, p(0.9)), 11.0, epsilon = 1e-12);
        assert_relative_eq!(f_value(2.0, 3.0, &s, p(0.9)), 3.0);
        assert_relative_eq!(f_value(2.0, 3.0, &s, p(0.0)), 3.0);
    }

    #[test]
    fn subgradient_examples() {
        let s = BsState::new(1.0, 0.9, 1.0).unwrap();
        let (dp, de) = subgradient(3.0, 0.5, &s, p(0.9));
        assert_relative_eq!(dp, 10.0, epsilon = 1e-12);
        assert_relative_eq!(de, -9.0, epsilon = 1e-12);
        assert_eq!(subgradient(3.0, 10.0, &s, p(0.9)), (0.0, 1.0));
        // Surplus branch uses the sell price.
        let (dp, _) = subgradient(0.5, -5.0, &s, p(0.5));
        assert_relative_eq!(dp, 1.8, epsilon = 1e-12);
    }

    #[test]
    fn subgradient_at_theta_zero() {
        let s = BsState::new(1.2, 0.6, 2.0).unwrap();
        for (power, eta) in [(3.0, 0.0), (1.0, -5.0), (1.0, 5.0), (2.0, 0.0)] {
            let (dp, de) = subgradient(power, eta, &s, p(0.0));
            assert!([1.2, 0.6, 0.0].contains(&dp));
            assert!(de == 0.0 || de == 1.0);
        }
    }

    #[test]
    fn ties_take_the_upper_branch() {
        let s = BsState::new(1.0, 0.9, 2.0).unwrap();
        // P = e and f̂ = η = 0.
        let (dp, de) = subgradient(2.0, 0.0, &s, p(0.5));
        assert_relative_eq!(dp, 2.0);
        assert_relative_eq!(de, -1.0);
    }

    #[test]
    fn theta_validation() {
        assert!(CvarParams::new(1.0).is_err());
        assert!(CvarParams::new(-0.1).is_err());
        assert!(CvarParams::new(0.0).is_ok());
    }

    proptest! {
        #[test]
        fn cvar_nondecreasing_in_theta(costs in prop::collection::vec(-50.0..50.0f64, 1..60),
                                       t1 in 0.0..0.99f64, t2 in 0.0..0.99f64) {
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let a = empirical_cvar(&costs, lo).unwrap();
            let b = empirical_cvar(&costs, hi).unwrap();
            prop_assert!(a <= b + 1e-9);
        }

        #[test]
        fn cvar_bounds(costs in prop::collection::vec(-50.0..50.0f64, 1..60), theta in 0.0..0.99f64) {
            let c = empirical_cvar(&costs, theta).unwrap();
            let mean = costs.iter().sum::<f64>() / costs.len() as f64;
            let max = costs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(c >= mean - 1e-9 && c <= max + 1e-9);
            prop_assert!(c >= empirical_var(&costs, theta).unwrap() - 1e-9);
        }

        #[test]
        fn subgradient_respects_bound(power in 0.0..30.0f64, eta in -30.0..30.0f64, a in 0.0..2.0f64,
                                      frac in 0.0..1.0f64, e in 0.0..20.0f64, theta in 0.5..0.99f64) {
            let s = BsState::new(a, a * frac, e).unwrap();
            let params = p(theta);
            let (dp, de) = subgradient(power, eta, &s, params);
            prop_assert!(dp * dp + de * de <= subgradient_bound(a, params) * (1.0 + 1e-12));
        }
    }
}
