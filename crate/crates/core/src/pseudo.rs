//! The auxiliary pseudo mean-variance problem `M(y)`.
//!
//! For a fixed pseudo mean `y`, minimizing `β σ̃^d(y) − μ^d` over policies is a
//! standard average-cost MDP with cost `β (r − y)² − r`. Its optimal value
//! relates to the real objective of its optimizer through
//! `η̃*(y) = η^{d̃*} + β (y − μ^{d̃*})²`.

use crate::avg::{policy_iteration, CostTable};
use crate::error::{MdpError, Result};
use crate::mdp::{evaluate_policy_with, EvaluatedPolicy, Mdp, ObjectiveMode, Policy};
use crate::scalar::Scalar;

/// Relative tolerance on the pseudo/real objective identity.
pub const IDENTITY_TOL: f64 = 1e-7;

/// `c_y(i,a) = β (r(i,a) − y)² − r(i,a)`.
pub fn pseudo_cost<T: Scalar>(mdp: &Mdp<T>, y: T) -> CostTable<T> {
    pseudo_cost_with(mdp, y, ObjectiveMode::MeanVariance)
}

/// Auxiliary cost for either objective mode; variance-only mode uses `(r − y)²`.
pub fn pseudo_cost_with<T: Scalar>(mdp: &Mdp<T>, y: T, mode: ObjectiveMode) -> CostTable<T> {
    let w = mode.weights(mdp.beta());
    CostTable::from_fn(mdp, |_, _, r| {
        let dev = r - y;
        w.variance * dev * dev - w.mean * r
    })
}

/// Optimal policy of `M(y)` together with its real steady-state evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliarySolution<T> {
    pub y: T,
    /// `η̃*(y)`.
    pub pseudo_objective: T,
    /// `d̃*(y)` evaluated under the real objective.
    pub evaluated: EvaluatedPolicy<T>,
    pub inner_iterations: usize,
}

impl<T: Scalar> AuxiliarySolution<T> {
    pub fn policy(&self) -> &Policy {
        &self.evaluated.policy
    }

    pub fn mean(&self) -> T {
        self.evaluated.mean
    }

    pub fn variance(&self) -> T {
        self.evaluated.variance
    }

    pub fn objective(&self) -> T {
        self.evaluated.objective
    }
}

/// Solves `M(y)` for the mean-variance objective.
pub fn solve_auxiliary<T: Scalar>(
    mdp: &Mdp<T>,
    y: T,
    warm_start: Option<&Policy>,
) -> Result<AuxiliarySolution<T>> {
    solve_auxiliary_with(mdp, y, ObjectiveMode::MeanVariance, warm_start)
}

pub fn solve_auxiliary_with<T: Scalar>(
    mdp: &Mdp<T>,
    y: T,
    mode: ObjectiveMode,
    warm_start: Option<&Policy>,
) -> Result<AuxiliarySolution<T>> {
    let cost = pseudo_cost_with(mdp, y, mode);
    let solved = policy_iteration(mdp, &cost, warm_start)?;
    let evaluated = evaluate_policy_with(mdp, &solved.policy, mode)?;

    let w = mode.weights(mdp.beta());
    let dev = y - evaluated.mean;
    let distortion = w.variance * dev * dev;
    let pseudo = solved.average_cost;
    let gap = (pseudo - evaluated.objective - distortion).abs();
    if gap > T::tol(IDENTITY_TOL) * pseudo.abs().max(T::one()) {
        return Err(MdpError::IdentityViolation {
            pseudo: pseudo.to_f64_lossy(),
            real: evaluated.objective.to_f64_lossy(),
            distortion: distortion.to_f64_lossy(),
        });
    }
    Ok(AuxiliarySolution {
        y,
        pseudo_objective: pseudo,
        evaluated,
        inner_iterations: solved.iterations,
    })
}
