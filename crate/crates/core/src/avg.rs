//! Exact average-cost policy iteration built on the `e eᵀ`-augmented Poisson
//! equation `(I − P^d + e eᵀ) g = c^d`.
//!
//! The solution `g` is a performance potential whose component sum `eᵀ g`
//! equals the long-run average cost `π^d c^d`. Improvement uses the
//! advantage-style margin `ζ(i,a) = g(i) − Σ_j p(j|i,a) g(j) + eᵀ g − c(i,a)`:
//! a positive margin means action `a` at state `i` lowers the average cost.

use std::collections::HashSet;

use crate::error::{MdpError, Result};
use crate::linalg::LuFactors;
use crate::mdp::{Mdp, Policy};
use crate::scalar::Scalar;

/// Absolute improvement threshold on margins, scaled by the cost magnitude.
pub const IMPROVEMENT_TOL: f64 = 1e-12;

/// Per state-action cost `c(i, a)` with the same shape as the model's reward table.
#[derive(Debug, Clone, PartialEq)]
pub struct CostTable<T>(Vec<Vec<T>>);

impl<T: Scalar> CostTable<T> {
    pub fn new(costs: Vec<Vec<T>>) -> Self {
        Self(costs)
    }

    /// Builds `c(i,a) = f(i, a, r(i,a))` over the model's action sets.
    pub fn from_fn(mdp: &Mdp<T>, mut f: impl FnMut(usize, usize, T) -> T) -> Self {
        Self(
            (0..mdp.state_count())
                .map(|i| {
                    (0..mdp.action_count(i))
                        .map(|a| f(i, a, mdp.reward(i, a)))
                        .collect()
                })
                .collect(),
        )
    }

    #[inline]
    pub fn get(&self, state: usize, action: usize) -> T {
        self.0[state][action]
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.0
    }

    pub fn under(&self, policy: &Policy) -> Vec<T> {
        policy
            .actions()
            .iter()
            .enumerate()
            .map(|(i, &a)| self.0[i][a])
            .collect()
    }

    fn magnitude(&self) -> T {
        self.0
            .iter()
            .flatten()
            .fold(T::zero(), |m, c| m.max(c.abs()))
    }

    fn check_shape(&self, mdp: &Mdp<T>) -> Result<()> {
        let ok = self.0.len() == mdp.state_count()
            && self
                .0
                .iter()
                .enumerate()
                .all(|(i, row)| row.len() == mdp.action_count(i));
        if ok {
            Ok(())
        } else {
            Err(MdpError::InvalidModel(
                "cost table shape does not match the model".into(),
            ))
        }
    }
}

/// Performance potentials of a policy under a cost table.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialVector<T> {
    pub values: Vec<T>,
    /// `eᵀ g`, equal to the long-run average cost.
    pub average_cost: T,
    pub policy: Policy,
}

/// Solves `(I − P^d + e eᵀ) g = c^d`.
pub fn potentials<T: Scalar>(
    mdp: &Mdp<T>,
    policy: &Policy,
    cost: &CostTable<T>,
) -> Result<PotentialVector<T>> {
    mdp.check_policy(policy)?;
    cost.check_shape(mdp)?;
    let lu = mdp.factor_fundamental(policy)?;
    Ok(potentials_from_factors(policy, cost, &lu))
}

pub(crate) fn potentials_from_factors<T: Scalar>(
    policy: &Policy,
    cost: &CostTable<T>,
    lu: &LuFactors<T>,
) -> PotentialVector<T> {
    let values = lu.solve(&cost.under(policy));
    let average_cost = values.iter().copied().sum();
    PotentialVector {
        values,
        average_cost,
        policy: policy.clone(),
    }
}

/// `ζ(i,a)` for one state-action pair given potentials of the incumbent policy.
#[inline]
pub fn margin<T: Scalar>(
    mdp: &Mdp<T>,
    cost: &CostTable<T>,
    g: &PotentialVector<T>,
    state: usize,
    action: usize,
) -> T {
    let expected: T = mdp
        .transition_row(state, action)
        .iter()
        .zip(&g.values)
        .map(|(p, v)| *p * *v)
        .sum();
    g.values[state] - expected + g.average_cost - cost.get(state, action)
}

/// Output of [`policy_iteration`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult<T> {
    pub policy: Policy,
    pub average_cost: T,
    pub potentials: PotentialVector<T>,
    /// Number of policy evaluations performed.
    pub iterations: usize,
    /// Average cost of every evaluated policy, in order.
    pub cost_trace: Vec<T>,
}

/// Minimizes the long-run average cost by policy iteration.
///
/// Starts from `initial`, or from the smallest action index in every state.
/// An action replaces the incumbent only when its margin beats zero by more
/// than the improvement threshold; among near-best actions the smallest index
/// wins. Terminates when no state improves.
pub fn policy_iteration<T: Scalar>(
    mdp: &Mdp<T>,
    cost: &CostTable<T>,
    initial: Option<&Policy>,
) -> Result<SolverResult<T>> {
    cost.check_shape(mdp)?;
    let mut policy = match initial {
        Some(p) => {
            mdp.check_policy(p)?;
            p.clone()
        }
        None => Policy::first(mdp),
    };
    let tol = T::tol(IMPROVEMENT_TOL) * cost.magnitude().max(T::one());
    let mut seen = HashSet::new();
    let mut cost_trace = Vec::new();
    loop {
        let g = potentials(mdp, &policy, cost)?;
        cost_trace.push(g.average_cost);
        seen.insert(policy.clone());

        let mut next = policy.actions().to_vec();
        let mut changed = false;
        for (i, slot) in next.iter_mut().enumerate() {
            let margins: Vec<T> = (0..mdp.action_count(i))
                .map(|a| margin(mdp, cost, &g, i, a))
                .collect();
            let best = margins.iter().copied().fold(T::neg_infinity(), T::max);
            if best > tol {
                let chosen = margins
                    .iter()
                    .position(|m| *m >= best - tol)
                    .expect("best margin is attained");
                if chosen != *slot {
                    *slot = chosen;
                    changed = true;
                }
            }
        }
        if !changed {
            return Ok(SolverResult {
                iterations: cost_trace.len(),
                average_cost: g.average_cost,
                policy,
                potentials: g,
                cost_trace,
            });
        }
        policy = Policy::new(next);
        if seen.contains(&policy) {
            return Err(MdpError::CycleDetected {
                iterations: cost_trace.len(),
            });
        }
    }
}
