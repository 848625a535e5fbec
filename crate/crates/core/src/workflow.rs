//! Typed forward-chaining composition of analysis profiles.
//!
//! Search runs breadth-first over the set of data kinds available so far,
//! expanding profiles in id order. The first plan that produces the goal kind
//! is therefore the shortest, and among those the one with the
//! lexicographically smallest sequence of profile ids.

use std::collections::{BTreeMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::catalogue::LayerId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DataKind {
    RasterCoverage,
    VectorFeatures,
    Table,
    Scalar,
}

impl DataKind {
    pub const ALL: [DataKind; 4] = [
        DataKind::RasterCoverage,
        DataKind::VectorFeatures,
        DataKind::Table,
        DataKind::Scalar,
    ];

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

impl std::str::FromStr for DataKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DataKind::ALL
            .into_iter()
            .find(|k| format!("{k:?}").eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown data kind `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IoSlot {
    pub name: String,
    pub data_kind: DataKind,
}

impl IoSlot {
    pub fn new(name: &str, data_kind: DataKind) -> Self {
        IoSlot {
            name: name.to_string(),
            data_kind,
        }
    }
}

/// A registered analysis service with typed inputs and outputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AnalysisProfile {
    pub profile_id: String,
    pub service_name: String,
    pub service_url: String,
    pub inputs: Vec<IoSlot>,
    pub outputs: Vec<IoSlot>,
    pub rule_description: String,
    #[serde(default)]
    pub constraints: Vec<String>,
    #[serde(default)]
    pub bound_layer_id: Option<LayerId>,
}

impl AnalysisProfile {
    /// A profile with generated slot names (`in0`, `out0`, ...).
    pub fn simple(id: &str, inputs: &[DataKind], outputs: &[DataKind]) -> Self {
        let slots = |prefix: &str, kinds: &[DataKind]| {
            kinds
                .iter()
                .enumerate()
                .map(|(i, k)| IoSlot::new(&format!("{prefix}{i}"), *k))
                .collect()
        };
        AnalysisProfile {
            profile_id: id.to_string(),
            service_name: id.to_string(),
            service_url: String::new(),
            inputs: slots("in", inputs),
            outputs: slots("out", outputs),
            rule_description: String::new(),
            constraints: Vec::new(),
            bound_layer_id: None,
        }
    }

    fn input_mask(&self) -> u8 {
        self.inputs.iter().fold(0, |m, s| m | s.data_kind.bit())
    }

    fn output_mask(&self) -> u8 {
        self.outputs.iter().fold(0, |m, s| m | s.data_kind.bit())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AvailableLayer {
    pub layer_id: LayerId,
    pub data_kind: DataKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "camelCase")]
pub enum Binding {
    #[serde(rename_all = "camelCase")]
    Layer { layer_id: LayerId },
    #[serde(rename_all = "camelCase")]
    Step { step: usize, output: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PlanStep {
    pub profile_id: String,
    pub input_bindings: BTreeMap<String, Binding>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WorkflowPlan {
    pub steps: Vec<PlanStep>,
    pub goal_kind: DataKind,
}

impl WorkflowPlan {
    pub fn profile_ids(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.profile_id.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WorkflowError {
    #[error("no plan produces {0:?}")]
    NoPlan(DataKind),
    #[error("invalid profile `{id}`: {reason}")]
    InvalidProfile { id: String, reason: String },
}

fn check_profiles(profiles: &[AnalysisProfile]) -> Result<(), WorkflowError> {
    let mut seen = HashSet::new();
    for p in profiles {
        let invalid = |reason: &str| WorkflowError::InvalidProfile {
            id: p.profile_id.clone(),
            reason: reason.to_string(),
        };
        if p.inputs.is_empty() || p.outputs.is_empty() {
            return Err(invalid("inputs and outputs must be non-empty"));
        }
        if !seen.insert(p.profile_id.as_str()) {
            return Err(invalid("duplicate profile id"));
        }
        let mut names = HashSet::new();
        if !p.inputs.iter().all(|s| names.insert(s.name.as_str())) {
            return Err(invalid("duplicate input name"));
        }
        let mut names = HashSet::new();
        if !p.outputs.iter().all(|s| names.insert(s.name.as_str())) {
            return Err(invalid("duplicate output name"));
        }
    }
    Ok(())
}

/// Shortest plan turning the available layers into `goal`; see the module
/// documentation for the tie-break.
pub fn compose(
    layers: &[AvailableLayer],
    profiles: &[AnalysisProfile],
    goal: DataKind,
) -> Result<WorkflowPlan, WorkflowError> {
    check_profiles(profiles)?;
    let mut order: Vec<&AnalysisProfile> = profiles.iter().collect();
    order.sort_by(|a, b| a.profile_id.cmp(&b.profile_id));

    let start = layers.iter().fold(0u8, |m, l| m | l.data_kind.bit());
    if start & goal.bit() != 0 {
        return Ok(WorkflowPlan {
            steps: Vec::new(),
            goal_kind: goal,
        });
    }

    let mut visited = HashSet::from([start]);
    let mut queue: VecDeque<(u8, Vec<usize>)> = VecDeque::from([(start, Vec::new())]);
    while let Some((state, path)) = queue.pop_front() {
        for (idx, profile) in order.iter().enumerate() {
            let inputs = profile.input_mask();
            if inputs & state != inputs {
                continue;
            }
            let next = state | profile.output_mask();
            if profile.output_mask() & goal.bit() != 0 {
                let mut chosen = path.clone();
                chosen.push(idx);
                let steps: Vec<&AnalysisProfile> = chosen.iter().map(|&i| order[i]).collect();
                return Ok(bind(layers, &steps, goal));
            }
            if visited.insert(next) {
                let mut extended = path.clone();
                extended.push(idx);
                queue.push_back((next, extended));
            }
        }
    }
    Err(WorkflowError::NoPlan(goal))
}

/// Binds each input to the first layer of its kind (by layer id), or else to
/// the earliest step output of that kind.
fn bind(layers: &[AvailableLayer], steps: &[&AnalysisProfile], goal: DataKind) -> WorkflowPlan {
    let mut sorted_layers = layers.to_vec();
    sorted_layers.sort_by_key(|l| l.layer_id);
    let mut planned = Vec::with_capacity(steps.len());
    for (i, profile) in steps.iter().enumerate() {
        let mut bindings = BTreeMap::new();
        for input in &profile.inputs {
            let from_layer = sorted_layers
                .iter()
                .find(|l| l.data_kind == input.data_kind)
                .map(|l| Binding::Layer { layer_id: l.layer_id });
            let source = from_layer.or_else(|| {
                steps[..i].iter().enumerate().find_map(|(j, earlier)| {
                    earlier
                        .outputs
                        .iter()
                        .find(|o| o.data_kind == input.data_kind)
                        .map(|o| Binding::Step {
                            step: j,
                            output: o.name.clone(),
                        })
                })
            });
            if let Some(source) = source {
                bindings.insert(input.name.clone(), source);
            }
        }
        planned.push(PlanStep {
            profile_id: profile.profile_id.clone(),
            input_bindings: bindings,
        });
    }
    WorkflowPlan {
        steps: planned,
        goal_kind: goal,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlanValidation {
    pub valid: bool,
    pub violations: Vec<String>,
}

/// Re-checks every plan invariant without reference to [`compose`].
pub fn validate_plan(plan: &WorkflowPlan, layers: &[AvailableLayer], profiles: &[AnalysisProfile]) -> PlanValidation {
    let mut violations = Vec::new();
    let lookup = |id: &str| profiles.iter().find(|p| p.profile_id == id);

    for (i, step) in plan.steps.iter().enumerate() {
        let Some(profile) = lookup(&step.profile_id) else {
            violations.push(format!("step {i}: unknown profile `{}`", step.profile_id));
            continue;
        };
        for name in step.input_bindings.keys() {
            if !profile.inputs.iter().any(|s| &s.name == name) {
                violations.push(format!("step {i}: binding for unknown input `{name}`"));
            }
        }
        for input in &profile.inputs {
            let Some(binding) = step.input_bindings.get(&input.name) else {
                violations.push(format!("step {i}: unbound input `{}`", input.name));
                continue;
            };
            let kind = match binding {
                Binding::Layer { layer_id } => match layers.iter().find(|l| l.layer_id == *layer_id) {
                    Some(l) => Some(l.data_kind),
                    None => {
                        violations.push(format!("step {i}: unknown layer {layer_id}"));
                        None
                    }
                },
                Binding::Step { step, output } => {
                    if *step >= i {
                        violations.push(format!("step {i}: forward reference to step {step}"));
                        None
                    } else {
                        let source = lookup(&plan.steps[*step].profile_id);
                        match source.and_then(|p| p.outputs.iter().find(|o| &o.name == output)) {
                            Some(o) => Some(o.data_kind),
                            None => {
                                violations.push(format!("step {i}: step {step} has no output `{output}`"));
                                None
                            }
                        }
                    }
                }
            };
            if let Some(kind) = kind {
                if kind != input.data_kind {
                    violations.push(format!(
                        "step {i}: input `{}` expects {:?} but is bound to {kind:?}",
                        input.name, input.data_kind
                    ));
                }
            }
        }
    }

    let goal_met = match plan.steps.last() {
        None => layers.iter().any(|l| l.data_kind == plan.goal_kind),
        Some(last) => lookup(&last.profile_id).is_some_and(|p| p.outputs.iter().any(|o| o.data_kind == plan.goal_kind)),
    };
    if !goal_met {
        violations.push(format!("goal unmet: plan does not produce {:?}", plan.goal_kind));
    }
    PlanValidation {
        valid: violations.is_empty(),
        violations,
    }
}
