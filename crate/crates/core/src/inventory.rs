//! Periodic-review inventory control with binomial demand.
//!
//! Stock level `s ∈ {0..C}`, order `a ∈ {0..C−s}`, demand `ξ ~ Binomial(C, p)`
//! with no lead time and lost sales: `s′ = max(s + a − ξ, 0)`. The one-step
//! reward is the negated expected cost
//! `−E[b a + h s′ + l max(ξ − s − a, 0)]`.

use crate::error::{MdpError, Result};
use crate::mdp::Mdp;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct InventoryParams<T> {
    pub capacity: usize,
    /// Per-customer demand probability.
    pub p: T,
    /// Unit ordering cost.
    pub b: T,
    /// Unit holding cost.
    pub h: T,
    /// Unit shortage cost.
    pub l: T,
    pub beta: T,
}

impl<T: Scalar> Default for InventoryParams<T> {
    fn default() -> Self {
        Self {
            capacity: 4,
            p: T::lit(0.6),
            b: T::lit(1.0),
            h: T::lit(0.7),
            l: T::lit(2.9),
            beta: T::lit(10.0),
        }
    }
}

impl<T: Scalar> InventoryParams<T> {
    pub fn with_capacity(capacity: usize) -> Self {
        Self {
            capacity,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = |x: T| x >= T::zero() && x.is_finite();
        if self.capacity == 0 {
            return Err(MdpError::InvalidModel("capacity must be at least 1".into()));
        }
        if !(self.p >= T::zero() && self.p <= T::one()) {
            return Err(MdpError::InvalidModel(format!(
                "demand probability {} outside [0,1]",
                self.p
            )));
        }
        if !(nonneg(self.b) && nonneg(self.h) && nonneg(self.l) && nonneg(self.beta)) {
            return Err(MdpError::InvalidModel(
                "costs and beta must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// `C(n,k) p^k (1−p)^{n−k}`, with the binomial coefficient built by
/// incremental multiplication.
pub fn binomial_pmf<T: Scalar>(n: usize, p: T, k: usize) -> T {
    assert!(k <= n, "binomial_pmf: k = {k} exceeds n = {n}");
    let k_small = k.min(n - k);
    let mut coeff = T::one();
    for j in 0..k_small {
        coeff = coeff * T::lit((n - j) as f64) / T::lit((j + 1) as f64);
    }
    coeff * p.powi(k as i32) * (T::one() - p).powi((n - k) as i32)
}

pub fn build_inventory_mdp<T: Scalar>(params: &InventoryParams<T>) -> Result<Mdp<T>> {
    params.validate()?;
    let cap = params.capacity;
    let demand: Vec<T> = (0..=cap).map(|k| binomial_pmf(cap, params.p, k)).collect();

    let mut transitions = Vec::with_capacity(cap + 1);
    let mut rewards = Vec::with_capacity(cap + 1);
    for stock in 0..=cap {
        let mut rows = Vec::with_capacity(cap + 1 - stock);
        let mut rs = Vec::with_capacity(cap + 1 - stock);
        for order in 0..=(cap - stock) {
            let level = stock + order;
            let mut row = vec![T::zero(); cap + 1];
            let mut held = T::zero();
            let mut short = T::zero();
            for (xi, &q) in demand.iter().enumerate() {
                let next = level.saturating_sub(xi);
                row[next] += q;
                held += q * T::lit(next as f64);
                short += q * T::lit(xi.saturating_sub(level) as f64);
            }
            // rounding in the summed pmf can overshoot 1 by an ulp
            for q in row.iter_mut() {
                *q = q.min(T::one());
            }
            let cost = params.b * T::lit(order as f64) + params.h * held + params.l * short;
            rows.push(row);
            rs.push(-cost);
        }
        transitions.push(rows);
        rewards.push(rs);
    }
    Mdp::new(transitions, rewards, params.beta)
}
