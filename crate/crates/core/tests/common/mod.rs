#![allow(dead_code)]

use mvmdp::{Mdp, Policy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random unichain model: every row puts positive mass on state 0, so every
/// closed class contains it. Half of the rows are dense, half sparse.
pub fn random_unichain(
    rng: &mut impl Rng,
    states: usize,
    max_actions: usize,
    beta: f64,
) -> Mdp<f64> {
    let mut transitions = Vec::with_capacity(states);
    let mut rewards = Vec::with_capacity(states);
    for _ in 0..states {
        let actions = rng.gen_range(1..=max_actions);
        let mut rows = Vec::with_capacity(actions);
        let mut rs = Vec::with_capacity(actions);
        for _ in 0..actions {
            let sparse = rng.gen_bool(0.5);
            let mut row: Vec<f64> = (0..states)
                .map(|j| {
                    if j == 0 {
                        rng.gen_range(0.05..1.0)
                    } else if sparse && rng.gen_bool(0.6) {
                        0.0
                    } else {
                        rng.gen_range(0.0..1.0)
                    }
                })
                .collect();
            let total: f64 = row.iter().sum();
            row.iter_mut().for_each(|p| *p /= total);
            // put the rounding residue on state 0
            let residue = 1.0 - row.iter().sum::<f64>();
            row[0] += residue;
            rows.push(row);
            rs.push(rng.gen_range(-1.0..1.0));
        }
        transitions.push(rows);
        rewards.push(rs);
    }
    Mdp::new(transitions, rewards, beta).expect("generated model is valid")
}

pub fn random_policy(rng: &mut impl Rng, mdp: &Mdp<f64>) -> Policy {
    Policy::new(
        (0..mdp.state_count())
            .map(|i| rng.gen_range(0..mdp.action_count(i)))
            .collect(),
    )
}

/// Straight two-pass moments of the reward multiset weighted by `pi`.
pub fn two_pass_moments(pi: &[f64], rewards: &[f64]) -> (f64, f64) {
    let mut mean = 0.0;
    for (p, r) in pi.iter().zip(rewards) {
        mean += p * r;
    }
    let mut var = 0.0;
    for (p, r) in pi.iter().zip(rewards) {
        var += p * (r - mean) * (r - mean);
    }
    (mean, var)
}

/// Stationary distribution by power iteration on the lazy chain `(I + P)/2`;
/// independent of the linear-solve route.
pub fn power_stationary(mdp: &Mdp<f64>, policy: &Policy) -> Vec<f64> {
    let n = mdp.state_count();
    let mut pi = vec![1.0 / n as f64; n];
    for _ in 0..200_000 {
        let mut next = vec![0.0; n];
        for i in 0..n {
            let row = mdp.transition_row(i, policy.action(i));
            for j in 0..n {
                next[j] += 0.5 * pi[i] * row[j];
            }
            next[i] += 0.5 * pi[i];
        }
        let delta = next
            .iter()
            .zip(&pi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        pi = next;
        if delta < 1e-15 {
            break;
        }
    }
    pi
}

/// Real objective `w_var σ − w_mean μ` of every policy, by enumeration.
pub fn enumerate_objectives(
    mdp: &Mdp<f64>,
    mode: mvmdp::ObjectiveMode,
) -> Vec<mvmdp::EvaluatedPolicy<f64>> {
    mdp.policies()
        .map(|d| mvmdp::mdp::evaluate_policy_with(mdp, &d, mode).expect("unichain"))
        .collect()
}

pub fn min_objective(evs: &[mvmdp::EvaluatedPolicy<f64>]) -> f64 {
    evs.iter()
        .map(|e| e.objective)
        .fold(f64::INFINITY, f64::min)
}
