//! Global mean-variance search over the pseudo-mean axis.
//!
//! The domain `[r_min, r_max]` of candidate pseudo means is shrunk by solving
//! `M(y)` at the midpoint of its topmost remaining piece and removing
//! `[y − |y − μ|, y + |y − μ|]`, where `μ` is the real mean of the auxiliary
//! optimizer: every policy whose mean falls in that window has a real
//! objective no better than the optimizer's. The plus variant also removes the
//! half-line `(−∞, μ − β σ]`. The best real objective seen when the domain
//! runs out is the global optimum.

use std::collections::HashSet;

use crate::error::{MdpError, Result};
use crate::interval::{Interval, IntervalSet};
use crate::mdp::{evaluate_policy_with, EvaluatedPolicy, Mdp, ObjectiveMode, Policy};
use crate::pseudo::{solve_auxiliary_with, AuxiliarySolution};
use crate::scalar::Scalar;

/// Minimum half-width of a dominance cut.
pub const CUT_EPS: f64 = 1e-9;
/// Strict-improvement margin for the best-so-far policy.
pub const BEST_TOL: f64 = 1e-12;
/// Convergence tolerance of the local fixed-point iteration.
pub const FIXED_POINT_TOL: f64 = 1e-10;
/// Upper cap on the default auxiliary-solve budget.
pub const MAX_AUX_SOLVES_CAP: usize = 1_000_000;
/// Default cap on the number of policies the brute-force oracle enumerates.
pub const BRUTE_FORCE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Algorithm {
    #[default]
    Global,
    GlobalPlus,
    Local,
    BruteForce,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Global => "global",
            Algorithm::GlobalPlus => "global-plus",
            Algorithm::Local => "local",
            Algorithm::BruteForce => "brute",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions<T> {
    pub algorithm: Algorithm,
    pub mode: ObjectiveMode,
    /// Auxiliary-solve budget; `None` means `min(2|D| + 1, MAX_AUX_SOLVES_CAP)`.
    pub max_aux_solves: Option<usize>,
    pub cut_eps: T,
    /// Starting pseudo mean of the local iteration; defaults to `r_min`.
    pub y0: Option<T>,
    pub brute_force_cap: usize,
}

impl<T: Scalar> Default for SolveOptions<T> {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Global,
            mode: ObjectiveMode::MeanVariance,
            max_aux_solves: None,
            cut_eps: T::lit(CUT_EPS),
            y0: None,
            brute_force_cap: BRUTE_FORCE_CAP,
        }
    }
}

impl<T: Scalar> SolveOptions<T> {
    pub fn with_algorithm(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            ..Self::default()
        }
    }

    pub fn mode(mut self, mode: ObjectiveMode) -> Self {
        self.mode = mode;
        self
    }

    fn aux_solve_limit(&self, mdp: &Mdp<T>) -> usize {
        self.max_aux_solves
            .unwrap_or_else(|| default_aux_solve_limit(mdp))
    }
}

/// `min(2|D| + 1, MAX_AUX_SOLVES_CAP)`.
pub fn default_aux_solve_limit<T: Scalar>(mdp: &Mdp<T>) -> usize {
    let bound = 2.0 * mdp.policy_space_size() + 1.0;
    if bound >= MAX_AUX_SOLVES_CAP as f64 {
        MAX_AUX_SOLVES_CAP
    } else {
        bound as usize
    }
}

/// One auxiliary solve of the outer search.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord<T> {
    pub y: T,
    pub policy: Policy,
    pub mean: T,
    pub variance: T,
    pub objective: T,
    pub pseudo_objective: T,
    /// Pieces removed from the domain in this iteration (clipped to `[r_min, r_max]`).
    pub removed: Vec<Interval<T>>,
    pub best_objective: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// The pseudo-mean domain was exhausted.
    DomainExhausted,
    /// `|y_{l+1} − y_l|` fell below the fixed-point tolerance.
    FixedPoint,
    /// The local iteration returned the previous policy again.
    PolicyRepeated,
    /// The local iteration revisited an earlier, non-adjacent policy.
    Cycle,
    /// Exhaustive enumeration finished.
    Enumerated,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::DomainExhausted => "domain-exhausted",
            Termination::FixedPoint => "fixed-point",
            Termination::PolicyRepeated => "policy-repeated",
            Termination::Cycle => "cycle",
            Termination::Enumerated => "enumerated",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport<T> {
    pub algorithm: Algorithm,
    pub mode: ObjectiveMode,
    pub policy: Policy,
    /// `η*` under the selected mode.
    pub objective: T,
    pub mean: T,
    pub variance: T,
    /// Pseudo mean at the optimum, equal to `mean`.
    pub y_star: T,
    pub aux_solves: usize,
    pub trace: Vec<IterationRecord<T>>,
    pub termination: Termination,
}

impl<T: Scalar> SolveReport<T> {
    fn from_best(
        algorithm: Algorithm,
        mode: ObjectiveMode,
        best: EvaluatedPolicy<T>,
        trace: Vec<IterationRecord<T>>,
        termination: Termination,
    ) -> Self {
        Self {
            algorithm,
            mode,
            objective: best.objective,
            mean: best.mean,
            variance: best.variance,
            y_star: best.mean,
            aux_solves: trace.len(),
            policy: best.policy,
            trace,
            termination,
        }
    }
}

/// `[y − |y − μ|, y + |y − μ|]`, widened to `[y − ε, y + ε]` when narrower.
pub fn distortion_cut<T: Scalar>(y: T, mu_opt: T, cut_eps: T) -> Interval<T> {
    let radius = (y - mu_opt).abs().max(cut_eps);
    Interval::new(y - radius, y + radius)
}

/// `(−∞, μ − β σ]`.
pub fn tradeoff_cut<T: Scalar>(mu_opt: T, sigma_opt: T, beta: T) -> Interval<T> {
    Interval {
        lo: T::neg_infinity(),
        hi: mu_opt - beta * sigma_opt,
    }
}

/// Whether `candidate` lies in a region dominated by `reference` for the
/// objective `β σ − μ`: either its mean is at most `μ_ref − β σ_ref`, or it sits
/// on or beyond the line of slope `1/β` through the reference in the
/// (mean, variance) plane. The second region does not exist when `β = 0`.
pub fn is_dominated_by_tradeoff<T: Scalar>(
    candidate: &EvaluatedPolicy<T>,
    reference: &EvaluatedPolicy<T>,
    beta: T,
) -> bool {
    let threshold = reference.mean - beta * reference.variance;
    let rule_one = candidate.mean <= threshold;
    let rule_two = beta > T::zero()
        && candidate.mean >= threshold
        && candidate.variance >= reference.variance + (candidate.mean - reference.mean) / beta;
    rule_one || rule_two
}

/// Dispatches on `opts.algorithm`.
pub fn solve<T: Scalar>(mdp: &Mdp<T>, opts: &SolveOptions<T>) -> Result<SolveReport<T>> {
    match opts.algorithm {
        Algorithm::Global | Algorithm::GlobalPlus => solve_global(mdp, opts),
        Algorithm::Local => {
            let y0 = opts.y0.unwrap_or_else(|| mdp.reward_bounds().min);
            solve_local(mdp, y0, opts)
        }
        Algorithm::BruteForce => brute_force(mdp, opts.mode, opts.brute_force_cap),
    }
}

/// Interval-shrinking global search. `opts.algorithm == GlobalPlus` enables
/// the half-line cut; it is skipped in variance-only mode.
pub fn solve_global<T: Scalar>(mdp: &Mdp<T>, opts: &SolveOptions<T>) -> Result<SolveReport<T>> {
    let plus = opts.algorithm == Algorithm::GlobalPlus && opts.mode == ObjectiveMode::MeanVariance;
    let limit = opts.aux_solve_limit(mdp);
    let bounds = mdp.reward_bounds();
    let domain_bounds = Interval::new(bounds.min, bounds.max);
    let best_tol = T::tol(BEST_TOL);

    let mut domain = IntervalSet::from_interval(domain_bounds);
    let mut best: Option<EvaluatedPolicy<T>> = None;
    let mut warm: Option<Policy> = None;
    let mut trace = Vec::new();

    while !domain.is_empty() {
        if trace.len() >= limit {
            return Err(MdpError::MaxIterationsExceeded { limit });
        }
        let y = domain.first_interval_midpoint()?;
        let aux = solve_auxiliary_with(mdp, y, opts.mode, warm.as_ref())?;

        let mut removed = Vec::with_capacity(2);
        if let Some(cut) = distortion_cut(y, aux.mean(), opts.cut_eps).clip(domain_bounds) {
            domain = domain.subtract(cut);
            removed.push(cut);
        }
        if plus {
            let half_line = tradeoff_cut(aux.mean(), aux.variance(), mdp.beta());
            if let Some(cut) = half_line.clip(domain_bounds) {
                domain = domain.subtract(cut);
                removed.push(cut);
            }
        }

        let improves = best
            .as_ref()
            .is_none_or(|b| aux.objective() < b.objective - best_tol);
        if improves {
            best = Some(aux.evaluated.clone());
        }
        let best_objective = best.as_ref().map_or(aux.objective(), |b| b.objective);
        warm = Some(aux.policy().clone());
        trace.push(record(&aux, removed, best_objective));
    }

    let best = best.expect("domain starts nonempty, so at least one auxiliary solve ran");
    Ok(SolveReport::from_best(
        opts.algorithm,
        opts.mode,
        best,
        trace,
        Termination::DomainExhausted,
    ))
}

fn record<T: Scalar>(
    aux: &AuxiliarySolution<T>,
    removed: Vec<Interval<T>>,
    best: T,
) -> IterationRecord<T> {
    IterationRecord {
        y: aux.y,
        policy: aux.policy().clone(),
        mean: aux.mean(),
        variance: aux.variance(),
        objective: aux.objective(),
        pseudo_objective: aux.pseudo_objective,
        removed,
        best_objective: best,
    }
}

/// Fixed-point iteration `y_{l+1} = μ^{d̃*(y_l)}` from `y0`.
///
/// Stops when consecutive pseudo means agree within [`FIXED_POINT_TOL`], when
/// the auxiliary optimizer repeats, or when it revisits an older policy. The
/// result is a fixed point of `y = μ^{d̃*(y)}`, which need not be global.
pub fn solve_local<T: Scalar>(
    mdp: &Mdp<T>,
    y0: T,
    opts: &SolveOptions<T>,
) -> Result<SolveReport<T>> {
    let limit = opts.aux_solve_limit(mdp);
    let tol = T::tol(FIXED_POINT_TOL);
    let mut y = y0;
    let mut warm: Option<Policy> = None;
    let mut seen: HashSet<Policy> = HashSet::new();
    let mut trace: Vec<IterationRecord<T>> = Vec::new();
    let mut best_objective = T::infinity();

    loop {
        if trace.len() >= limit {
            return Err(MdpError::MaxIterationsExceeded { limit });
        }
        let aux = solve_auxiliary_with(mdp, y, opts.mode, warm.as_ref())?;
        best_objective = best_objective.min(aux.objective());
        let next_y = aux.mean();
        let repeated = warm.as_ref() == Some(aux.policy());
        let revisited = !repeated && seen.contains(aux.policy());
        seen.insert(aux.policy().clone());
        trace.push(record(&aux, Vec::new(), best_objective));

        let termination = if (next_y - y).abs() <= tol {
            Some(Termination::FixedPoint)
        } else if repeated {
            Some(Termination::PolicyRepeated)
        } else if revisited {
            Some(Termination::Cycle)
        } else {
            None
        };
        if let Some(termination) = termination {
            return Ok(SolveReport::from_best(
                Algorithm::Local,
                opts.mode,
                aux.evaluated,
                trace,
                termination,
            ));
        }
        warm = Some(aux.evaluated.policy);
        y = next_y;
    }
}

/// Runs [`solve_local`] from every starting point in `y0s`.
pub fn local_sweep<T: Scalar>(
    mdp: &Mdp<T>,
    y0s: &[T],
    opts: &SolveOptions<T>,
) -> Result<Vec<SolveReport<T>>> {
    y0s.iter().map(|&y0| solve_local(mdp, y0, opts)).collect()
}

/// `n` evenly spaced points covering `[r_min, r_max]` (both ends included).
pub fn uniform_grid<T: Scalar>(lo: T, hi: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![(lo + hi) / T::lit(2.0)],
        _ => {
            let step = (hi - lo) / T::lit((n - 1) as f64);
            (0..n)
                .map(|k| {
                    if k + 1 == n {
                        hi
                    } else {
                        lo + step * T::lit(k as f64)
                    }
                })
                .collect()
        }
    }
}

/// Exhaustive enumeration of every deterministic policy.
pub fn brute_force<T: Scalar>(
    mdp: &Mdp<T>,
    mode: ObjectiveMode,
    cap: usize,
) -> Result<SolveReport<T>> {
    let size = mdp.policy_space_size();
    if size > cap as f64 {
        return Err(MdpError::PolicySpaceTooLarge { size, cap });
    }
    let tol = T::tol(BEST_TOL);
    let mut best: Option<EvaluatedPolicy<T>> = None;
    for policy in mdp.policies() {
        let ev = evaluate_policy_with(mdp, &policy, mode)?;
        if best
            .as_ref()
            .is_none_or(|b| ev.objective < b.objective - tol)
        {
            best = Some(ev);
        }
    }
    let best = best.expect("policy space is nonempty");
    Ok(SolveReport::from_best(
        Algorithm::BruteForce,
        mode,
        best,
        Vec::new(),
        Termination::Enumerated,
    ))
}

/// Optimal point for one tradeoff weight.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierPoint<T> {
    pub beta: T,
    pub mean: T,
    pub variance: T,
    pub objective: T,
    pub policy: Policy,
}

/// Solves the mean-variance problem for every weight in `betas`.
pub fn pareto_frontier<T: Scalar>(
    mdp: &Mdp<T>,
    betas: &[T],
    opts: &SolveOptions<T>,
) -> Result<Vec<FrontierPoint<T>>> {
    if betas.is_empty() {
        return Err(MdpError::InvalidModel("beta grid is empty".into()));
    }
    let opts = SolveOptions {
        mode: ObjectiveMode::MeanVariance,
        ..opts.clone()
    };
    betas
        .iter()
        .map(|&beta| {
            let m = mdp.with_beta(beta)?;
            let report = solve(&m, &opts)?;
            Ok(FrontierPoint {
                beta,
                mean: report.mean,
                variance: report.variance,
                objective: report.objective,
                policy: report.policy,
            })
        })
        .collect()
}

/// Whether mean and variance are both non-increasing as `beta` grows
/// (points are compared in ascending `beta` order).
pub fn frontier_is_monotone<T: Scalar>(points: &[FrontierPoint<T>], tol: T) -> bool {
    let mut sorted: Vec<_> = points.iter().collect();
    sorted.sort_by(|a, b| a.beta.partial_cmp(&b.beta).expect("beta is not NaN"));
    sorted
        .windows(2)
        .all(|w| w[1].variance <= w[0].variance + tol && w[1].mean <= w[0].mean + tol)
}
