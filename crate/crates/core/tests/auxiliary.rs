mod common;

use common::*;
use mvmdp::avg::{margin, potentials};
use mvmdp::inventory::{build_inventory_mdp, InventoryParams};
use mvmdp::mdp::evaluate_policy;
use mvmdp::pseudo::{pseudo_cost, solve_auxiliary, solve_auxiliary_with};
use mvmdp::sensitivity::{critical_interval, enumerate_segments, test_coefficients};
use mvmdp::ObjectiveMode;
use rand::Rng;

fn brute_pseudo(m: &mvmdp::Mdp<f64>, y: f64, mode: ObjectiveMode) -> f64 {
    let w = mode.weights(m.beta());
    enumerate_objectives(m, mode)
        .iter()
        .map(|e| e.objective + w.variance * (y - e.mean).powi(2))
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn inventory_midpoint_matches_enumeration() {
    let m = build_inventory_mdp::<f64>(&InventoryParams::default()).unwrap();
    let b = m.reward_bounds();
    let y = (b.min + b.max) / 2.0;
    let aux = solve_auxiliary(&m, y, None).unwrap();
    let oracle = brute_pseudo(&m, y, ObjectiveMode::MeanVariance);
    assert!(
        (aux.pseudo_objective - oracle).abs() < 1e-9,
        "{} vs {oracle}",
        aux.pseudo_objective
    );
}

#[test]
fn inventory_fixed_point_of_the_optimum() {
    let m = build_inventory_mdp::<f64>(&InventoryParams::default()).unwrap();
    let global = mvmdp::global::solve_global(&m, &Default::default()).unwrap();
    let aux = solve_auxiliary(&m, global.y_star, None).unwrap();
    assert!((aux.pseudo_objective - 4.5).abs() < 1e-3);
    assert!((aux.mean() - global.y_star).abs() < 1e-9);
    assert!((aux.mean() - (-3.891)).abs() < 1e-3);
}

#[test]
fn auxiliary_optimum_lower_bounds_every_policy() {
    let mut rng = rng(21);
    for _ in 0..60 {
        let beta = [0.0, 0.1, 1.0, 10.0][rng.gen_range(0..4)];
        let s = rng.gen_range(1..=4);
        let m = random_unichain(&mut rng, s, 3, beta);
        let b = m.reward_bounds();
        for mode in [ObjectiveMode::MeanVariance, ObjectiveMode::VarianceOnly] {
            let y = rng.gen_range(b.min..=b.max);
            let aux = solve_auxiliary_with(&m, y, mode, None).unwrap();
            let w = mode.weights(beta);
            for ev in enumerate_objectives(&m, mode) {
                let shifted = ev.objective + w.variance * (y - ev.mean).powi(2);
                assert!(aux.pseudo_objective <= shifted + 1e-9);
            }
            assert!((aux.pseudo_objective - brute_pseudo(&m, y, mode)).abs() < 1e-9);
            let ident = aux.objective() + w.variance * (y - aux.mean()).powi(2);
            assert!((aux.pseudo_objective - ident).abs() < 1e-9);
        }
    }
}

#[test]
fn three_state_zero_pseudo_mean() {
    let mut rng = rng(22);
    for _ in 0..20 {
        let m = random_unichain(&mut rng, 3, 3, 1.0);
        let aux = solve_auxiliary(&m, 0.0, None).unwrap();
        let oracle = brute_pseudo(&m, 0.0, ObjectiveMode::MeanVariance);
        assert!((aux.pseudo_objective - oracle).abs() < 1e-10);
    }
}

#[test]
fn zero_beta_reduces_to_mean_maximization() {
    let mut rng = rng(23);
    let m = random_unichain(&mut rng, 4, 3, 0.0);
    let best_mean = enumerate_objectives(&m, ObjectiveMode::MeanVariance)
        .iter()
        .map(|e| e.mean)
        .fold(f64::NEG_INFINITY, f64::max);
    let aux = solve_auxiliary(&m, 0.3, None).unwrap();
    assert!((aux.pseudo_objective + best_mean).abs() < 1e-12);
}

#[test]
fn bilevel_minimum_equals_direct_minimum() {
    let mut rng = rng(24);
    for _ in 0..40 {
        let beta = [0.1, 1.0, 10.0][rng.gen_range(0..3)];
        let m = random_unichain(&mut rng, 4, 3, beta);
        let direct = min_objective(&enumerate_objectives(&m, ObjectiveMode::MeanVariance));
        // the curve minimum is attained at some segment policy's own mean
        let segs = enumerate_segments(&m).unwrap();
        let mut bilevel = f64::INFINITY;
        for s in &segs {
            let y = s.mean.clamp(s.lo, s.hi);
            bilevel = bilevel.min(s.value_at(y));
            let aux = solve_auxiliary(&m, y, None).unwrap();
            bilevel = bilevel.min(aux.pseudo_objective);
        }
        assert!((bilevel - direct).abs() < 1e-8, "{bilevel} vs {direct}");
    }
}

#[test]
fn test_coefficient_signs_agree_with_improvement_margins() {
    let mut rng = rng(25);
    for _ in 0..50 {
        let beta = rng.gen_range(0.0..5.0);
        let m = random_unichain(&mut rng, 3, 3, beta);
        let d = random_policy(&mut rng, &m);
        let tc = test_coefficients(&m, &d).unwrap();
        let b = m.reward_bounds();
        for _ in 0..5 {
            let y = rng.gen_range(b.min..=b.max);
            let cost = pseudo_cost(&m, y);
            let g = potentials(&m, &d, &cost).unwrap();
            for i in 0..m.state_count() {
                for a in 0..m.action_count(i) {
                    let direct = margin(&m, &cost, &g, i, a);
                    assert!((tc.combined(i, a, y) - direct).abs() < 1e-9);
                }
            }
        }
    }
}

#[test]
fn critical_interval_is_a_certificate() {
    let m = build_inventory_mdp::<f64>(&InventoryParams::default()).unwrap();
    let aux = solve_auxiliary(&m, 0.0, None).unwrap();
    let iv = critical_interval(&m, aux.policy()).unwrap();
    let b = m.reward_bounds();
    assert!(iv.contains(0.0));
    let lo = iv.lo.max(b.min - 1.0);
    let hi = iv.hi.min(b.max + 1.0);
    let fixed = evaluate_policy(&m, aux.policy()).unwrap();
    for k in 0..100 {
        let y = lo + (hi - lo) * (k as f64 + 0.5) / 100.0;
        let at = solve_auxiliary(&m, y, None).unwrap();
        let own = fixed.objective + 10.0 * (y - fixed.mean).powi(2);
        assert!((at.pseudo_objective - own).abs() < 1e-8, "y = {y}");
    }

    let mut rng = rng(26);
    for _ in 0..30 {
        let m = random_unichain(&mut rng, 4, 3, 2.0);
        let b = m.reward_bounds();
        let y0 = rng.gen_range(b.min..=b.max);
        let aux = solve_auxiliary(&m, y0, None).unwrap();
        let iv = critical_interval(&m, aux.policy()).unwrap();
        assert!(iv.lo <= y0 + 1e-9 && y0 <= iv.hi + 1e-9);
        let lo = iv.lo.max(b.min - 2.0);
        let hi = iv.hi.min(b.max + 2.0);
        for _ in 0..100 {
            let y = rng.gen_range(lo..=hi);
            let at = solve_auxiliary(&m, y, None).unwrap();
            let own = aux.objective() + 2.0 * (y - aux.mean()).powi(2);
            assert!((at.pseudo_objective - own).abs() < 1e-8);
        }
    }
}
