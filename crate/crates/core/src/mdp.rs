//! Finite MDP model and exact steady-state evaluation of deterministic policies.
//!
//! Every quantity here is a closed-form function of the stationary
//! distribution `π` of the chain induced by a policy: the long-run mean
//! `μ = π r`, the long-run variance `σ = π (r − μ)²`, and the pseudo variance
//! `σ̃(y) = π (r − y)² = σ + (y − μ)²` taken around an arbitrary pseudo mean `y`.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::error::{MdpError, Result};
use crate::linalg::{DenseMatrix, LuFactors};
use crate::scalar::Scalar;

/// Finite MDP with per-state action sets, a transition kernel, a reward table
/// and the mean-variance tradeoff weight `beta`.
///
/// Actions are dense indices `0..action_count(i)` at every state `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mdp<T> {
    transitions: Vec<Vec<Vec<T>>>,
    rewards: Vec<Vec<T>>,
    beta: T,
}

impl<T: Scalar> Mdp<T> {
    /// Builds a model from `transitions[i][a][j] = p(j | i, a)` and
    /// `rewards[i][a] = r(i, a)`.
    pub fn new(transitions: Vec<Vec<Vec<T>>>, rewards: Vec<Vec<T>>, beta: T) -> Result<Self> {
        let s = transitions.len();
        if s == 0 {
            return Err(MdpError::InvalidModel(
                "model needs at least one state".into(),
            ));
        }
        if rewards.len() != s {
            return Err(MdpError::InvalidModel(format!(
                "reward table has {} states, transition kernel has {s}",
                rewards.len()
            )));
        }
        if !beta.is_finite() || beta < T::zero() {
            return Err(MdpError::InvalidModel(format!(
                "beta must be finite and nonnegative, got {beta}"
            )));
        }
        let row_tol = T::tol(1e-12);
        for (i, (rows, rs)) in transitions.iter().zip(&rewards).enumerate() {
            if rows.is_empty() {
                return Err(MdpError::InvalidModel(format!("state {i} has no actions")));
            }
            if rows.len() != rs.len() {
                return Err(MdpError::InvalidModel(format!(
                    "state {i}: {} transition rows but {} rewards",
                    rows.len(),
                    rs.len()
                )));
            }
            for (a, row) in rows.iter().enumerate() {
                if row.len() != s {
                    return Err(MdpError::InvalidModel(format!(
                        "p(.|{i},{a}) has length {}, expected {s}",
                        row.len()
                    )));
                }
                if let Some(p) = row.iter().find(|p| !(**p >= T::zero() && **p <= T::one())) {
                    return Err(MdpError::InvalidModel(format!(
                        "p(.|{i},{a}) contains {p} outside [0,1]"
                    )));
                }
                let total: T = row.iter().copied().sum();
                if (total - T::one()).abs() > row_tol {
                    return Err(MdpError::InvalidModel(format!(
                        "p(.|{i},{a}) sums to {total}"
                    )));
                }
                if !rs[a].is_finite() {
                    return Err(MdpError::InvalidModel(format!("r({i},{a}) is not finite")));
                }
            }
        }
        Ok(Self {
            transitions,
            rewards,
            beta,
        })
    }

    pub fn state_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn action_count(&self, state: usize) -> usize {
        self.transitions[state].len()
    }

    /// Largest per-state action count.
    pub fn max_action_count(&self) -> usize {
        self.transitions.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn action_counts(&self) -> Vec<usize> {
        self.transitions.iter().map(Vec::len).collect()
    }

    pub fn transition_row(&self, state: usize, action: usize) -> &[T] {
        &self.transitions[state][action]
    }

    #[inline]
    pub fn prob(&self, from: usize, action: usize, to: usize) -> T {
        self.transitions[from][action][to]
    }

    #[inline]
    pub fn reward(&self, state: usize, action: usize) -> T {
        self.rewards[state][action]
    }

    pub fn transitions(&self) -> &[Vec<Vec<T>>] {
        &self.transitions
    }

    pub fn rewards(&self) -> &[Vec<T>] {
        &self.rewards
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    /// Same model with a different tradeoff weight.
    pub fn with_beta(&self, beta: T) -> Result<Self> {
        if !beta.is_finite() || beta < T::zero() {
            return Err(MdpError::InvalidModel(format!(
                "beta must be finite and nonnegative, got {beta}"
            )));
        }
        Ok(Self {
            beta,
            ..self.clone()
        })
    }

    pub fn reward_bounds(&self) -> RewardBounds<T> {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for r in self.rewards.iter().flatten() {
            lo = lo.min(*r);
            hi = hi.max(*r);
        }
        RewardBounds { min: lo, max: hi }
    }

    /// Number of deterministic policies, `Π_i |A(i)|`, as a float so that it
    /// cannot overflow.
    pub fn policy_space_size(&self) -> f64 {
        self.transitions.iter().map(|a| a.len() as f64).product()
    }

    /// Iterates over every deterministic policy in mixed-radix order, the
    /// last state varying fastest.
    pub fn policies(&self) -> PolicyIter {
        PolicyIter {
            radices: self.action_counts(),
            next: Some(vec![0; self.state_count()]),
        }
    }

    pub fn check_policy(&self, policy: &Policy) -> Result<()> {
        if policy.len() != self.state_count() {
            return Err(MdpError::InvalidPolicy(format!(
                "policy has {} entries, model has {} states",
                policy.len(),
                self.state_count()
            )));
        }
        for (i, &a) in policy.actions().iter().enumerate() {
            if a >= self.action_count(i) {
                return Err(MdpError::InvalidPolicy(format!(
                    "action {a} at state {i} outside 0..{}",
                    self.action_count(i)
                )));
            }
        }
        Ok(())
    }

    /// `P^d` for a policy.
    pub fn transition_matrix(&self, policy: &Policy) -> DenseMatrix<T> {
        let d = policy.actions();
        DenseMatrix::from_fn(self.state_count(), |i, j| self.transitions[i][d[i]][j])
    }

    /// `r^d` for a policy.
    pub fn policy_rewards(&self, policy: &Policy) -> Vec<T> {
        policy
            .actions()
            .iter()
            .enumerate()
            .map(|(i, &a)| self.rewards[i][a])
            .collect()
    }

    /// `I − P^d + e eᵀ`, the matrix behind both the stationary distribution and
    /// the performance potentials.
    /// LU factors of [`Mdp::fundamental_system`]. A singular system caused by
    /// several closed classes is reported as [`MdpError::Multichain`].
    pub fn factor_fundamental(&self, policy: &Policy) -> Result<LuFactors<T>> {
        LuFactors::factor(self.fundamental_system(policy)).map_err(|e| {
            match closed_class_count(self, policy) {
                1 => e,
                classes => MdpError::Multichain { classes },
            }
        })
    }

    pub fn fundamental_system(&self, policy: &Policy) -> DenseMatrix<T> {
        let d = policy.actions();
        DenseMatrix::from_fn(self.state_count(), |i, j| {
            let id = if i == j { T::one() } else { T::zero() };
            id - self.transitions[i][d[i]][j] + T::one()
        })
    }
}

/// `[r_min, r_max]` over every state-action pair. Every long-run mean lies in it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardBounds<T> {
    pub min: T,
    pub max: T,
}

/// Stationary deterministic policy: one action index per state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Policy(Vec<usize>);

impl Policy {
    pub fn new(actions: Vec<usize>) -> Self {
        Self(actions)
    }

    /// Smallest action index in every state.
    pub fn first<T: Scalar>(mdp: &Mdp<T>) -> Self {
        Self(vec![0; mdp.state_count()])
    }

    pub fn actions(&self) -> &[usize] {
        &self.0
    }

    pub fn action(&self, state: usize) -> usize {
        self.0[state]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

impl std::fmt::Display for Policy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for (k, a) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "]")
    }
}

/// Mixed-radix enumeration of the deterministic policy space.
#[derive(Debug, Clone)]
pub struct PolicyIter {
    radices: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl Iterator for PolicyIter {
    type Item = Policy;

    fn next(&mut self) -> Option<Policy> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut k = succ.len();
        loop {
            if k == 0 {
                break;
            }
            k -= 1;
            succ[k] += 1;
            if succ[k] < self.radices[k] {
                self.next = Some(succ);
                break;
            }
            succ[k] = 0;
        }
        Some(Policy(current))
    }
}

/// Which combined metric is minimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ObjectiveMode {
    /// `β σ − μ`.
    #[default]
    MeanVariance,
    /// `σ` alone.
    VarianceOnly,
}

impl ObjectiveMode {
    /// Coefficients `(w_var, w_mean)` so that the objective is `w_var σ − w_mean μ`.
    pub fn weights<T: Scalar>(self, beta: T) -> Weights<T> {
        match self {
            ObjectiveMode::MeanVariance => Weights {
                variance: beta,
                mean: T::one(),
            },
            ObjectiveMode::VarianceOnly => Weights {
                variance: T::one(),
                mean: T::zero(),
            },
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ObjectiveMode::MeanVariance => "mean-variance",
            ObjectiveMode::VarianceOnly => "variance",
        }
    }
}

/// Linear weights on (variance, mean) defining the minimized objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights<T> {
    pub variance: T,
    pub mean: T,
}

impl<T: Scalar> Weights<T> {
    pub fn combine(&self, mean: T, variance: T) -> T {
        self.variance * variance - self.mean * mean
    }
}

/// A policy with its stationary distribution and steady-state moments.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluatedPolicy<T> {
    pub policy: Policy,
    pub stationary: Vec<T>,
    pub mean: T,
    pub variance: T,
    /// Objective under the mode used for evaluation (`β σ − μ` by default).
    pub objective: T,
}

impl<T: Scalar> EvaluatedPolicy<T> {
    /// `β σ − μ` regardless of the mode this was evaluated under.
    pub fn mean_variance(&self, beta: T) -> T {
        beta * self.variance - self.mean
    }
}

/// Solves `π (I − P + e eᵀ) = eᵀ` for the stationary distribution of `P^d`.
///
/// Components in `[-1e-9, 0)` are clamped to zero and the vector is
/// renormalized; anything more negative, or a balance residual above `1e-9`,
/// is reported as a singular system.
pub fn stationary_distribution<T: Scalar>(mdp: &Mdp<T>, policy: &Policy) -> Result<Vec<T>> {
    mdp.check_policy(policy)?;
    let system = mdp.fundamental_system(policy).transpose();
    let lu = LuFactors::factor(system).map_err(|e| match closed_class_count(mdp, policy) {
        1 => e,
        classes => MdpError::Multichain { classes },
    })?;
    stationary_from_factors(mdp, policy, &lu)
}

pub(crate) fn stationary_from_factors<T: Scalar>(
    mdp: &Mdp<T>,
    policy: &Policy,
    transposed_lu: &LuFactors<T>,
) -> Result<Vec<T>> {
    let n = mdp.state_count();
    let mut pi = transposed_lu.solve(&vec![T::one(); n]);
    let clamp = T::tol(1e-9);
    for (i, p) in pi.iter_mut().enumerate() {
        if !p.is_finite() || *p < -clamp {
            return Err(MdpError::SingularSystem(format!(
                "stationary component {i} is {p} under policy {policy}"
            )));
        }
        if *p < T::zero() {
            *p = T::zero();
        }
    }
    let total: T = pi.iter().copied().sum();
    for p in pi.iter_mut() {
        *p /= total;
    }
    let residual = balance_residual(mdp, policy, &pi);
    if residual > T::tol(1e-9) {
        return Err(MdpError::SingularSystem(format!(
            "stationary balance residual {residual} under policy {policy}"
        )));
    }
    Ok(pi)
}

/// `‖π P^d − π‖_∞`.
pub fn balance_residual<T: Scalar>(mdp: &Mdp<T>, policy: &Policy, pi: &[T]) -> T {
    let n = mdp.state_count();
    let d = policy.actions();
    (0..n)
        .map(|j| {
            let inflow: T = (0..n).map(|i| pi[i] * mdp.transitions[i][d[i]][j]).sum();
            (inflow - pi[j]).abs()
        })
        .fold(T::zero(), T::max)
}

/// `μ = π r`.
pub fn long_run_mean<T: Scalar>(pi: &[T], rewards: &[T]) -> T {
    pi.iter().zip(rewards).map(|(p, r)| *p * *r).sum()
}

/// `σ = π (r − μ)²`.
pub fn long_run_variance<T: Scalar>(pi: &[T], rewards: &[T], mean: T) -> T {
    pseudo_variance(pi, rewards, mean)
}

/// `σ̃(y) = π (r − y)²`.
pub fn pseudo_variance<T: Scalar>(pi: &[T], rewards: &[T], y: T) -> T {
    pi.iter()
        .zip(rewards)
        .map(|(p, r)| {
            let dev = *r - y;
            *p * dev * dev
        })
        .sum()
}

/// `Δ(y) = (y − μ)²`, the gap between pseudo and real variance.
pub fn variance_distortion<T: Scalar>(mean: T, y: T) -> T {
    let dev = y - mean;
    dev * dev
}

/// Evaluates `d` under the mean-variance objective `β σ − μ`.
pub fn evaluate_policy<T: Scalar>(mdp: &Mdp<T>, policy: &Policy) -> Result<EvaluatedPolicy<T>> {
    evaluate_policy_with(mdp, policy, ObjectiveMode::MeanVariance)
}

/// Evaluates `d`, populating `objective` according to `mode`.
///
/// Debug builds additionally verify that the chain has a single closed
/// recurrent class.
pub fn evaluate_policy_with<T: Scalar>(
    mdp: &Mdp<T>,
    policy: &Policy,
    mode: ObjectiveMode,
) -> Result<EvaluatedPolicy<T>> {
    if cfg!(debug_assertions) {
        mdp.check_policy(policy)?;
        let classes = closed_class_count(mdp, policy);
        if classes != 1 {
            return Err(MdpError::Multichain { classes });
        }
    }
    let pi = stationary_distribution(mdp, policy)?;
    Ok(evaluate_with_distribution(mdp, policy, pi, mode))
}

pub(crate) fn evaluate_with_distribution<T: Scalar>(
    mdp: &Mdp<T>,
    policy: &Policy,
    pi: Vec<T>,
    mode: ObjectiveMode,
) -> EvaluatedPolicy<T> {
    let r = mdp.policy_rewards(policy);
    let mean = long_run_mean(&pi, &r);
    let variance = long_run_variance(&pi, &r, mean).max(T::zero());
    let objective = mode.weights(mdp.beta()).combine(mean, variance);
    EvaluatedPolicy {
        policy: policy.clone(),
        stationary: pi,
        mean,
        variance,
        objective,
    }
}

/// Number of closed communicating classes of `P^d` (strongly connected
/// components of the support graph with no outgoing edge). A unichain policy
/// has exactly one.
pub fn closed_class_count<T: Scalar>(mdp: &Mdp<T>, policy: &Policy) -> usize {
    let n = mdp.state_count();
    let mut graph = DiGraph::<(), ()>::with_capacity(n, n * n);
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for (i, &a) in policy.actions().iter().enumerate() {
        for (j, p) in mdp.transitions[i][a].iter().enumerate() {
            if *p > T::zero() {
                graph.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    let sccs = tarjan_scc(&graph);
    let mut component = vec![0usize; n];
    for (c, members) in sccs.iter().enumerate() {
        for v in members {
            component[v.index()] = c;
        }
    }
    sccs.iter()
        .enumerate()
        .filter(|(c, members)| {
            members.iter().all(|v| {
                let i = v.index();
                let a = policy.action(i);
                mdp.transitions[i][a]
                    .iter()
                    .enumerate()
                    .all(|(j, p)| *p == T::zero() || component[j] == *c)
            })
        })
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(p: [[f64; 2]; 2], r: [f64; 2], beta: f64) -> Mdp<f64> {
        Mdp::new(
            vec![vec![p[0].to_vec()], vec![p[1].to_vec()]],
            vec![vec![r[0]], vec![r[1]]],
            beta,
        )
        .unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn stationary_examples() {
        let d = Policy::new(vec![0, 0]);
        let pi =
            stationary_distribution(&chain([[0.5, 0.5], [0.5, 0.5]], [0.0, 0.0], 1.0), &d).unwrap();
        assert!(close(pi[0], 0.5, 1e-12) && close(pi[1], 0.5, 1e-12));
        let pi =
            stationary_distribution(&chain([[0.0, 1.0], [1.0, 0.0]], [0.0, 0.0], 1.0), &d).unwrap();
        assert!(close(pi[0], 0.5, 1e-12) && close(pi[1], 0.5, 1e-12));
        let pi =
            stationary_distribution(&chain([[0.9, 0.1], [0.5, 0.5]], [0.0, 0.0], 1.0), &d).unwrap();
        assert!(close(pi[0], 5.0 / 6.0, 1e-12) && close(pi[1], 1.0 / 6.0, 1e-12));
    }

    #[test]
    fn moment_examples() {
        assert_eq!(long_run_mean(&[0.5, 0.5], &[1.0, 3.0]), 2.0);
        assert_eq!(long_run_mean(&[1.0], &[7.0]), 7.0);
        assert!(close(
            long_run_mean(&[5.0 / 6.0, 1.0 / 6.0], &[0.0, 6.0]),
            1.0,
            1e-14
        ));

        assert_eq!(long_run_variance(&[0.5, 0.5], &[1.0, 3.0], 2.0), 1.0);
        assert_eq!(long_run_variance(&[1.0], &[7.0], 7.0), 0.0);
        assert!(close(
            long_run_variance(&[5.0 / 6.0, 1.0 / 6.0], &[0.0, 6.0], 1.0),
            5.0,
            1e-13
        ));

        assert_eq!(pseudo_variance(&[0.5, 0.5], &[1.0, 3.0], 2.0), 1.0);
        assert_eq!(pseudo_variance(&[0.5, 0.5], &[1.0, 3.0], 0.0), 5.0);
        assert_eq!(pseudo_variance(&[1.0], &[7.0], 3.0), 16.0);

        assert_eq!(variance_distortion(2.0, 2.0), 0.0);
        assert_eq!(variance_distortion(2.0, 0.0), 4.0);
        assert_eq!(variance_distortion(-3.891, -3.891), 0.0);
    }

    #[test]
    fn evaluate_examples() {
        let one = Mdp::new(vec![vec![vec![1.0]]], vec![vec![5.0]], 10.0).unwrap();
        let ev = evaluate_policy(&one, &Policy::first(&one)).unwrap();
        assert_eq!((ev.mean, ev.variance, ev.objective), (5.0, 0.0, -5.0));

        let two = chain([[0.5, 0.5], [0.5, 0.5]], [1.0, 3.0], 1.0);
        let ev = evaluate_policy(&two, &Policy::first(&two)).unwrap();
        assert!(close(ev.objective, -1.0, 1e-12));
        assert_eq!(ev.objective, two.beta() * ev.variance - ev.mean);
    }

    #[test]
    fn model_validation() {
        assert!(Mdp::<f64>::new(vec![], vec![], 1.0).is_err());
        assert!(Mdp::new(
            vec![vec![vec![0.5, 0.6], vec![1.0, 0.0]]],
            vec![vec![0.0, 0.0]],
            1.0
        )
        .is_err());
        assert!(Mdp::new(vec![vec![vec![1.0]]], vec![vec![0.0]], -1.0).is_err());
        assert!(Mdp::new(vec![vec![]], vec![vec![]], 1.0).is_err());
        assert!(Mdp::new(
            vec![vec![vec![1.5, -0.5]], vec![vec![0.0, 1.0]]],
            vec![vec![0.0], vec![0.0]],
            1.0
        )
        .is_err());
    }

    #[test]
    fn multichain_policy_is_rejected() {
        let m = chain([[1.0, 0.0], [0.0, 1.0]], [0.0, 1.0], 1.0);
        let d = Policy::first(&m);
        assert_eq!(closed_class_count(&m, &d), 2);
        assert!(stationary_distribution(&m, &d).is_err());
        assert!(evaluate_policy(&m, &d).is_err());
    }

    #[test]
    fn transient_states_are_allowed() {
        // state 1 is transient and drains into absorbing state 0
        let m = chain([[1.0, 0.0], [0.7, 0.3]], [2.0, -4.0], 1.0);
        let d = Policy::first(&m);
        assert_eq!(closed_class_count(&m, &d), 1);
        let ev = evaluate_policy(&m, &d).unwrap();
        assert!(close(ev.stationary[0], 1.0, 1e-12));
        assert!(close(ev.mean, 2.0, 1e-12));
    }

    #[test]
    fn policy_enumeration_covers_space() {
        let m = Mdp::new(
            vec![
                vec![vec![1.0, 0.0, 0.0]; 3],
                vec![vec![0.0, 1.0, 0.0]],
                vec![vec![0.0, 0.0, 1.0]; 2],
            ],
            vec![vec![0.0; 3], vec![0.0], vec![0.0; 2]],
            1.0,
        )
        .unwrap();
        let all: Vec<_> = m.policies().collect();
        assert_eq!(all.len(), 6);
        assert_eq!(m.policy_space_size(), 6.0);
        assert_eq!(all[0].actions(), &[0, 0, 0]);
        assert_eq!(all[5].actions(), &[2, 0, 1]);
        let mut dedup = all.clone();
        dedup.dedup();
        assert_eq!(dedup.len(), 6);
    }
}
