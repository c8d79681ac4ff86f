//! Slot weighting, task completion rate, hallucination accounting, and the
//! aggregate report tables.
//!
//! Slots are grouped by (normalized) target component. A group of `n` slots
//! at tech tier `c` carries total weight `c * (1 + 0.5 * (n - 1))`, split
//! evenly across members: extending an existing component costs less per
//! constraint than opening a new one, and no pile of trivial constraints can
//! dominate the score.

mod report;

pub use report::{render_csv, render_markdown, ReportTables};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{OracleSlot, Task};

#[derive(Debug, Error)]
pub enum ScoringError {
    #[error("task has no oracle slots")]
    EmptySlots,
    #[error("verdict set does not partition the task's slots: {0}")]
    VerdictMismatch(String),
    #[error("empty result list")]
    EmptyResults,
}

/// Per-slot weights for one task, with group totals for inspection.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlotWeightTable {
    /// slot_id -> weight.
    pub weights: BTreeMap<String, f64>,
    /// normalized target_component -> total group weight.
    pub group_totals: BTreeMap<String, f64>,
    /// Non-fatal oddities, e.g. a group mixing tech tiers.
    pub warnings: Vec<String>,
}

impl SlotWeightTable {
    pub fn total(&self) -> f64 {
        self.weights.values().sum()
    }
}

/// Grouping key: hand-authored corpora vary in casing and spacing.
pub fn normalize_component(raw: &str) -> String {
    raw.trim().to_lowercase()
}

/// Weight every oracle slot of a task. The anti-hallucination slot is not an
/// oracle slot and never enters the table.
pub fn slot_weights(task: &Task) -> Result<SlotWeightTable, ScoringError> {
    slot_weights_for_slots(&task.slots)
}

/// Same as [`slot_weights`], on a bare slot list.
pub fn slot_weights_for_slots(slots: &[OracleSlot]) -> Result<SlotWeightTable, ScoringError> {
    if slots.is_empty() {
        return Err(ScoringError::EmptySlots);
    }
    let mut groups: BTreeMap<String, Vec<&OracleSlot>> = BTreeMap::new();
    for slot in slots {
        groups
            .entry(normalize_component(&slot.target_component))
            .or_default()
            .push(slot);
    }
    let mut weights = BTreeMap::new();
    let mut group_totals = BTreeMap::new();
    let mut warnings = Vec::new();
    for (component, members) in &groups {
        let tiers: BTreeSet<u8> = members.iter().map(|s| s.tech_complexity).collect();
        if tiers.len() > 1 {
            warnings.push(format!(
                "group {component:?} mixes tech tiers {tiers:?}; using the max"
            ));
        }
        // A group containing complex logic costs at least that logic.
        let tier = *tiers.iter().max().expect("non-empty group") as f64;
        let n = members.len() as f64;
        let group_total = tier * (1.0 + 0.5 * (n - 1.0));
        let per_slot = group_total / n;
        group_totals.insert(component.clone(), group_total);
        for slot in members {
            weights.insert(slot.slot_id.clone(), per_slot);
        }
    }
    Ok(SlotWeightTable {
        weights,
        group_totals,
        warnings,
    })
}

/// The evaluator's verdict over a task's oracle slots, plus the outcome of
/// the anti-hallucination probe.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SlotVerdictSet {
    pub pass: BTreeSet<String>,
    pub fail: BTreeSet<String>,
    /// Set by the anti-hallucination episode; never affects TCR.
    pub hallucination_triggered: bool,
}

impl SlotVerdictSet {
    pub fn all_pass(task: &Task) -> Self {
        SlotVerdictSet {
            pass: task.slot_ids(),
            fail: BTreeSet::new(),
            hallucination_triggered: false,
        }
    }
}

/// Task completion rate: the weight fraction of oracle slots verified as
/// satisfied. The verdict set must partition exactly the task's slots.
pub fn compute_tcr(task: &Task, verdicts: &SlotVerdictSet) -> Result<f64, ScoringError> {
    let slot_ids = task.slot_ids();
    if let Some(overlap) = verdicts.pass.intersection(&verdicts.fail).next() {
        return Err(ScoringError::VerdictMismatch(format!(
            "slot {overlap:?} is both passed and failed"
        )));
    }
    let covered: BTreeSet<String> = verdicts.pass.union(&verdicts.fail).cloned().collect();
    if covered != slot_ids {
        let missing: Vec<&String> = slot_ids.difference(&covered).collect();
        let extra: Vec<&String> = covered.difference(&slot_ids).collect();
        return Err(ScoringError::VerdictMismatch(format!(
            "missing {missing:?}, extraneous {extra:?}"
        )));
    }
    if verdicts.pass.contains(&task.anti_slot.slot_id)
        || verdicts.fail.contains(&task.anti_slot.slot_id)
    {
        return Err(ScoringError::VerdictMismatch(format!(
            "anti-hallucination slot {:?} must not appear in the verdict sets",
            task.anti_slot.slot_id
        )));
    }
    let table = slot_weights(task)?;
    let total: f64 = table.weights.values().sum();
    let passed: f64 = verdicts.pass.iter().map(|id| table.weights[id]).sum();
    Ok(passed / total)
}

/// Hallucination rate: the fraction of tasks whose anti-hallucination probe
/// triggered.
pub fn compute_hr(flags: &[bool]) -> Result<f64, ScoringError> {
    if flags.is_empty() {
        return Err(ScoringError::EmptyResults);
    }
    Ok(flags.iter().filter(|f| **f).count() as f64 / flags.len() as f64)
}

#[cfg(test)]
mod tests;
