//! JSON documents read and written by the command-line tool.

use mvmdp::global::{IterationRecord, SolveReport};
use mvmdp::{Mdp, Policy};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;
use crate::numfmt::round_sig;

/// Row-sum slack accepted on load. Rows inside it are renormalized.
pub const ROW_SUM_TOL: f64 = 1e-9;
const EXACT_ROW_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ActionSpec {
    Count(usize),
    Labels(Vec<Value>),
}

impl ActionSpec {
    pub fn count(&self) -> usize {
        match self {
            ActionSpec::Count(n) => *n,
            ActionSpec::Labels(l) => l.len(),
        }
    }

    fn label(&self, action: usize) -> Value {
        match self {
            ActionSpec::Count(_) => Value::from(action),
            ActionSpec::Labels(l) => l[action].clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MdpDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub states: usize,
    pub actions_per_state: Vec<ActionSpec>,
    pub transitions: Vec<Vec<Vec<f64>>>,
    pub rewards: Vec<Vec<f64>>,
    #[serde(default = "default_beta")]
    pub beta: f64,
}

fn default_beta() -> f64 {
    1.0
}

impl MdpDocument {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text)
            .map_err(|e| CliError::Input(format!("malformed MDP document: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }

    pub fn from_mdp(mdp: &Mdp<f64>, name: Option<String>) -> Self {
        Self {
            name,
            states: mdp.state_count(),
            actions_per_state: mdp
                .action_counts()
                .into_iter()
                .map(ActionSpec::Count)
                .collect(),
            transitions: mdp.transitions().to_vec(),
            rewards: mdp.rewards().to_vec(),
            beta: mdp.beta(),
        }
    }

    /// Checks shapes and row sums, then builds the model. `beta` overrides the
    /// document's own weight.
    pub fn to_mdp(&self, beta: Option<f64>) -> Result<Mdp<f64>, CliError> {
        let bad = |msg: String| Err(CliError::Input(msg));
        if self.states == 0 {
            return bad("`states` must be positive".into());
        }
        if self.actions_per_state.len() != self.states {
            return bad(format!(
                "`actions_per_state` has {} entries, expected {}",
                self.actions_per_state.len(),
                self.states
            ));
        }
        if self.transitions.len() != self.states || self.rewards.len() != self.states {
            return bad("`transitions` and `rewards` need one entry per state".into());
        }
        let mut transitions = self.transitions.clone();
        for (s, spec) in self.actions_per_state.iter().enumerate() {
            let n = spec.count();
            if n == 0 {
                return bad(format!("state {s} has no actions"));
            }
            if transitions[s].len() != n || self.rewards[s].len() != n {
                return bad(format!(
                    "state {s}: expected {n} actions in `transitions` and `rewards`"
                ));
            }
            for (a, row) in transitions[s].iter_mut().enumerate() {
                if row.len() != self.states {
                    return bad(format!(
                        "transition row ({s},{a}) has {} entries, expected {}",
                        row.len(),
                        self.states
                    ));
                }
                if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                    return bad(format!(
                        "transition row ({s},{a}) has a negative or non-finite entry"
                    ));
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > ROW_SUM_TOL {
                    return bad(format!("transition row ({s},{a}) sums to {sum}"));
                }
                if (sum - 1.0).abs() > EXACT_ROW_TOL {
                    row.iter_mut().for_each(|p| *p /= sum);
                }
            }
        }
        Mdp::new(transitions, self.rewards.clone(), beta.unwrap_or(self.beta))
            .map_err(|e| CliError::Input(format!("invalid MDP: {e}")))
    }

    /// Maps action indices to the labels given in the document.
    pub fn policy_labels(&self, policy: &Policy) -> Vec<Value> {
        policy
            .actions()
            .iter()
            .zip(&self.actions_per_state)
            .map(|(&a, spec)| spec.label(a))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationDocument {
    pub y: f64,
    pub policy: Vec<usize>,
    pub mean: f64,
    pub variance: f64,
    pub objective: f64,
    pub pseudo_objective: f64,
    pub removed: Vec<[f64; 2]>,
    pub best_objective: f64,
}

impl From<&IterationRecord<f64>> for IterationDocument {
    fn from(r: &IterationRecord<f64>) -> Self {
        Self {
            y: round_sig(r.y),
            policy: r.policy.actions().to_vec(),
            mean: round_sig(r.mean),
            variance: round_sig(r.variance),
            objective: round_sig(r.objective),
            pseudo_objective: round_sig(r.pseudo_objective),
            removed: r
                .removed
                .iter()
                .map(|i| [round_sig(i.lo), round_sig(i.hi)])
                .collect(),
            best_objective: round_sig(r.best_objective),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub objective_mode: String,
    pub algorithm: String,
    pub eta_star: f64,
    pub mu_star: f64,
    pub sigma_star: f64,
    pub y_star: f64,
    pub policy: Vec<Value>,
    pub aux_solves: usize,
    pub termination: String,
    pub iterations: Vec<IterationDocument>,
    pub wall_time_ms: f64,
}

impl ReportDocument {
    pub fn new(report: &SolveReport<f64>, doc: &MdpDocument, wall_time_ms: f64) -> Self {
        Self {
            name: doc.name.clone(),
            objective_mode: report.mode.name().to_string(),
            algorithm: report.algorithm.name().to_string(),
            eta_star: round_sig(report.objective),
            mu_star: round_sig(report.mean),
            sigma_star: round_sig(report.variance),
            y_star: round_sig(report.y_star),
            policy: doc.policy_labels(&report.policy),
            aux_solves: report.aux_solves,
            termination: report.termination.name().to_string(),
            iterations: report.trace.iter().map(IterationDocument::from).collect(),
            wall_time_ms: round_sig(wall_time_ms),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed report: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}
