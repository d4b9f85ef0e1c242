//! Parametric analysis of the auxiliary problem in the pseudo mean `y`.
//!
//! The auxiliary cost splits as `c + y c′ + β y²` with `c = β r² − r` and
//! `c′ = −2β r`. For a policy `d`, the test coefficients `ζ` and `ζ′` are the
//! improvement margins of `c` and `c′` computed from the potentials of `d`;
//! `d` is optimal for `M(y)` exactly when `ζ + y ζ′ ≤ 0` everywhere, which
//! pins down a closed interval of `y`. Chaining those intervals from `r_min`
//! upward decomposes `η̃*(y)` into quadratic pieces
//! `η^{d_k} + β (y − μ^{d_k})²`.

use crate::avg::{margin, potentials_from_factors, CostTable, PotentialVector};
use crate::error::{MdpError, Result};
use crate::interval::Interval;
use crate::mdp::{Mdp, ObjectiveMode, Policy};
use crate::pseudo::solve_auxiliary_with;
use crate::scalar::Scalar;

/// Step taken past a breakpoint before solving the next auxiliary problem.
pub const STEP_EPS: f64 = 1e-9;
/// Ratios with `|ζ′|` below this impose no bound.
pub const RATIO_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TestCoefficients<T> {
    pub policy: Policy,
    /// `ζ(i,a)`, indexed like the reward table.
    pub zeta: Vec<Vec<T>>,
    /// `ζ′(i,a)`.
    pub zeta_prime: Vec<Vec<T>>,
    /// Potentials for the cost `β r² − r`.
    pub potentials: PotentialVector<T>,
    /// Potentials for the cost `−2β r`.
    pub potentials_prime: PotentialVector<T>,
}

impl<T: Scalar> TestCoefficients<T> {
    /// `ζ(i,a) + y ζ′(i,a)`, the improvement margin of `M(y)` at `(i, a)`.
    pub fn combined(&self, state: usize, action: usize, y: T) -> T {
        self.zeta[state][action] + y * self.zeta_prime[state][action]
    }
}

pub fn test_coefficients<T: Scalar>(mdp: &Mdp<T>, policy: &Policy) -> Result<TestCoefficients<T>> {
    test_coefficients_with(mdp, policy, ObjectiveMode::MeanVariance)
}

pub fn test_coefficients_with<T: Scalar>(
    mdp: &Mdp<T>,
    policy: &Policy,
    mode: ObjectiveMode,
) -> Result<TestCoefficients<T>> {
    mdp.check_policy(policy)?;
    let w = mode.weights(mdp.beta());
    let two = T::lit(2.0);
    let base = CostTable::from_fn(mdp, |_, _, r| w.variance * r * r - w.mean * r);
    let slope = CostTable::from_fn(mdp, |_, _, r| -two * w.variance * r);

    let lu = mdp.factor_fundamental(policy)?;
    let g = potentials_from_factors(policy, &base, &lu);
    let g_prime = potentials_from_factors(policy, &slope, &lu);

    let table = |cost: &CostTable<T>, pv: &PotentialVector<T>| -> Vec<Vec<T>> {
        (0..mdp.state_count())
            .map(|i| {
                (0..mdp.action_count(i))
                    .map(|a| margin(mdp, cost, pv, i, a))
                    .collect()
            })
            .collect()
    };
    Ok(TestCoefficients {
        policy: policy.clone(),
        zeta: table(&base, &g),
        zeta_prime: table(&slope, &g_prime),
        potentials: g,
        potentials_prime: g_prime,
    })
}

/// The closed set of `y` for which `policy` is optimal in `M(y)`; endpoints
/// may be infinite.
pub fn critical_interval<T: Scalar>(mdp: &Mdp<T>, policy: &Policy) -> Result<Interval<T>> {
    critical_interval_with(mdp, policy, ObjectiveMode::MeanVariance)
}

pub fn critical_interval_with<T: Scalar>(
    mdp: &Mdp<T>,
    policy: &Policy,
    mode: ObjectiveMode,
) -> Result<Interval<T>> {
    let tc = test_coefficients_with(mdp, policy, mode)?;
    interval_from_coefficients(&tc)
}

pub fn interval_from_coefficients<T: Scalar>(tc: &TestCoefficients<T>) -> Result<Interval<T>> {
    let ratio_eps = T::tol(RATIO_EPS);
    let scale = tc
        .zeta
        .iter()
        .flatten()
        .fold(T::one(), |m, z| m.max(z.abs()));
    let mut lo = T::neg_infinity();
    let mut hi = T::infinity();
    let mut infeasible = false;
    for (zs, zps) in tc.zeta.iter().zip(&tc.zeta_prime) {
        for (&z, &zp) in zs.iter().zip(zps) {
            if zp < -ratio_eps {
                lo = lo.max(-z / zp);
            } else if zp > ratio_eps {
                hi = hi.min(-z / zp);
            } else if z > T::tol(1e-9) * scale {
                infeasible = true;
            }
        }
    }
    let slack = T::tol(1e-9) * T::one().max(lo.abs().min(hi.abs()));
    if infeasible || lo > hi + slack {
        return Err(MdpError::InconsistentCertificate {
            lo: lo.to_f64_lossy(),
            hi: hi.to_f64_lossy(),
        });
    }
    if lo > hi {
        let mid = (lo + hi) / T::lit(2.0);
        return Ok(Interval::point(mid));
    }
    Ok(Interval::new(lo, hi))
}

/// One quadratic piece of `η̃*(y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSegment<T> {
    pub lo: T,
    pub hi: T,
    pub policy: Policy,
    /// Real objective of the piece's policy.
    pub objective: T,
    pub mean: T,
    pub variance: T,
    /// Coefficient of `(y − μ)²` (β, or 1 in variance-only mode).
    pub curvature: T,
}

impl<T: Scalar> CurveSegment<T> {
    /// `η^{d_k} + w (y − μ^{d_k})²`.
    pub fn value_at(&self, y: T) -> T {
        let dev = y - self.mean;
        self.objective + self.curvature * dev * dev
    }

    /// Derivative of the piece's quadratic at `y`.
    pub fn slope_at(&self, y: T) -> T {
        T::lit(2.0) * self.curvature * (y - self.mean)
    }
}

/// Evaluates the piecewise curve at `y`, using the first segment whose
/// interval contains it; `None` outside the covered range.
pub fn curve_value<T: Scalar>(segments: &[CurveSegment<T>], y: T) -> Option<T> {
    segments
        .iter()
        .find(|s| s.lo <= y && y <= s.hi)
        .map(|s| s.value_at(y))
}

pub fn enumerate_segments<T: Scalar>(mdp: &Mdp<T>) -> Result<Vec<CurveSegment<T>>> {
    enumerate_segments_with(mdp, ObjectiveMode::MeanVariance)
}

/// Walks `[r_min, r_max]` from the left, alternating auxiliary solves and
/// critical-interval computations. Segments are contiguous and clipped to the
/// reward range.
pub fn enumerate_segments_with<T: Scalar>(
    mdp: &Mdp<T>,
    mode: ObjectiveMode,
) -> Result<Vec<CurveSegment<T>>> {
    let bounds = mdp.reward_bounds();
    let limit = mdp.policy_space_size();
    let curvature = mode.weights(mdp.beta()).variance;
    let base_step = T::tol(STEP_EPS) * T::one().max(bounds.min.abs().max(bounds.max.abs()));

    let mut segments: Vec<CurveSegment<T>> = Vec::new();
    let mut start = bounds.min;
    let mut y = bounds.min;
    let mut step = base_step;
    let mut warm: Option<Policy> = None;
    loop {
        let aux = solve_auxiliary_with(mdp, y, mode, warm.as_ref())?;
        let interval = critical_interval_with(mdp, aux.policy(), mode)?;
        let hi = interval.hi.min(bounds.max);
        let same_as_last = segments.last().is_some_and(|s| &s.policy == aux.policy());
        if same_as_last || hi < y {
            // the probe did not leave the previous piece; move further right
            step *= T::lit(10.0);
            if start + step > bounds.max {
                if let Some(last) = segments.last_mut() {
                    last.hi = bounds.max;
                }
                break;
            }
            y = start + step;
            continue;
        }
        segments.push(CurveSegment {
            lo: start,
            hi: hi.max(start),
            policy: aux.policy().clone(),
            objective: aux.objective(),
            mean: aux.mean(),
            variance: aux.variance(),
            curvature,
        });
        if segments.len() as f64 > limit {
            return Err(MdpError::SegmentLimitExceeded {
                limit: limit as usize,
            });
        }
        if hi >= bounds.max {
            break;
        }
        start = hi.max(start);
        step = base_step;
        y = (start + step).min(bounds.max);
        warm = Some(aux.evaluated.policy);
    }
    Ok(segments)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedPointKind {
    LocalOptimum,
    NonOptimum,
}

impl FixedPointKind {
    pub fn name(self) -> &'static str {
        match self {
            FixedPointKind::LocalOptimum => "local-optimum",
            FixedPointKind::NonOptimum => "non-optimum-fixed-point",
        }
    }
}

/// Solution of `y = μ^{d̃*(y)}` found on the piecewise curve.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint<T> {
    pub y: T,
    pub kind: FixedPointKind,
    /// `η̃*(y)`, equal to the real objective of the segment's policy.
    pub objective: T,
    pub segment: usize,
}

/// Finds every segment whose own mean lies in its interval and classifies
/// the resulting fixed point. Interior points are local minima; a point on a
/// breakpoint is a local minimum only when the neighbouring piece's one-sided
/// derivative does not point downhill into it.
pub fn classify_fixed_points<T: Scalar>(segments: &[CurveSegment<T>]) -> Vec<FixedPoint<T>> {
    let mut points: Vec<FixedPoint<T>> = Vec::new();
    for (k, seg) in segments.iter().enumerate() {
        let y = seg.mean;
        let tol = T::tol(1e-9) * T::one().max(y.abs());
        if y < seg.lo - tol || y > seg.hi + tol {
            continue;
        }
        let slope_tol = T::tol(1e-9) * T::one().max(seg.curvature);
        let at_left = (y - seg.lo).abs() <= tol;
        let at_right = (seg.hi - y).abs() <= tol;
        let left_ok = !at_left || k == 0 || segments[k - 1].slope_at(y) <= slope_tol;
        let right_ok =
            !at_right || k + 1 == segments.len() || segments[k + 1].slope_at(y) >= -slope_tol;
        let kind = if left_ok && right_ok {
            FixedPointKind::LocalOptimum
        } else {
            FixedPointKind::NonOptimum
        };
        let candidate = FixedPoint {
            y,
            kind,
            objective: seg.objective,
            segment: k,
        };
        match points.last_mut() {
            Some(prev) if (prev.y - y).abs() <= tol => {
                if kind == FixedPointKind::LocalOptimum {
                    prev.kind = kind;
                }
            }
            _ => points.push(candidate),
        }
    }
    points
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Mdp<f64> {
        Mdp::new(
            vec![
                vec![vec![0.2, 0.5, 0.3], vec![0.9, 0.1, 0.0]],
                vec![vec![0.5, 0.25, 0.25], vec![0.1, 0.1, 0.8]],
                vec![vec![0.3, 0.3, 0.4], vec![0.0, 0.6, 0.4]],
            ],
            vec![vec![1.0, -0.4], vec![0.5, -1.0], vec![0.8, 0.2]],
            1.5,
        )
        .unwrap()
    }

    #[test]
    fn basic_columns_vanish() {
        let m = small();
        for d in m.policies() {
            let tc = test_coefficients(&m, &d).unwrap();
            for i in 0..3 {
                assert!(tc.zeta[i][d.action(i)].abs() < 1e-12);
                assert!(tc.zeta_prime[i][d.action(i)].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_beta_has_no_parametric_dependence() {
        let m = small().with_beta(0.0).unwrap();
        let aux = crate::pseudo::solve_auxiliary(&m, 0.0, None).unwrap();
        let tc = test_coefficients(&m, aux.policy()).unwrap();
        assert!(tc.zeta_prime.iter().flatten().all(|z| *z == 0.0));
        assert_eq!(
            critical_interval(&m, aux.policy()).unwrap(),
            Interval::unbounded()
        );
        let segs = enumerate_segments(&m).unwrap();
        assert_eq!(segs.len(), 1);
        let fps = classify_fixed_points(&segs);
        assert_eq!(fps.len(), 1);
        assert_eq!(fps[0].kind, FixedPointKind::LocalOptimum);
    }

    #[test]
    fn suboptimal_everywhere_is_inconsistent() {
        // with beta = 0 action 1 earns more at every y
        let m = Mdp::new(vec![vec![vec![1.0], vec![1.0]]], vec![vec![0.0, 1.0]], 0.0).unwrap();
        let err = critical_interval(&m, &Policy::new(vec![0])).unwrap_err();
        assert!(matches!(err, MdpError::InconsistentCertificate { .. }));
    }

    #[test]
    fn segments_are_contiguous_and_cover_range() {
        let m = small();
        let segs = enumerate_segments(&m).unwrap();
        let b = m.reward_bounds();
        assert_eq!(segs.first().unwrap().lo, b.min);
        assert_eq!(segs.last().unwrap().hi, b.max);
        for w in segs.windows(2) {
            assert_eq!(w[0].hi, w[1].lo);
            let y = w[0].hi;
            assert!((w[0].value_at(y) - w[1].value_at(y)).abs() < 1e-8);
        }
    }

    #[test]
    fn interior_and_breakpoint_classification() {
        let seg = |lo: f64, hi: f64, mean: f64, obj: f64| CurveSegment {
            lo,
            hi,
            policy: Policy::new(vec![0]),
            objective: obj,
            mean,
            variance: 0.0,
            curvature: 1.0,
        };
        // piece 0 has its vertex inside, piece 1 has its vertex on the shared breakpoint
        // with piece 0 still descending into it from the left
        let segs = vec![seg(0.0, 1.0, 0.5, 1.0), seg(1.0, 2.0, 1.0, 1.25)];
        let fps = classify_fixed_points(&segs);
        assert_eq!(fps.len(), 2);
        assert_eq!(fps[0].kind, FixedPointKind::LocalOptimum);
        // left piece slope at y = 1 is 2 * (1 - 0.5) = 1 > 0: not a minimum
        assert_eq!(fps[1].kind, FixedPointKind::NonOptimum);
    }
}
