//! Task and slot data model, corpus ingestion, complexity scoring, difficulty
//! clustering, and persona expansion.
//!
//! A corpus file is a JSON array of seed documents. Each seed carries a golden
//! instruction, its oracle slots, one anti-hallucination slot, and (after
//! `mutate`) the persona variants nested under `mutations`. Loading a corpus
//! materializes one [`Task`] per seed and per persona variant, assigns a
//! difficulty level (explicit or derived by clustering the complexity scores),
//! and attaches the turn budgets for that level.

mod cluster;

pub use cluster::{brute_force_reference, DifficultyClustering};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::scoring;

/// How a slot is checked against the rendered website.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssertionType {
    Presence,
    Style,
    Behavior,
    Content,
}

/// An atomic, independently verifiable constraint on the generated website.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSlot {
    pub slot_id: String,
    /// Grouping key: slots sharing a component share implementation effort.
    pub target_component: String,
    pub expected_result: String,
    pub assertion_type: AssertionType,
    /// Step-wise complexity tier: 1 static, 2 interactive, 3 complex logic.
    pub tech_complexity: u8,
}

/// Per-task probe for unrequested or redundant UI elements. Excluded from all
/// weight sums; used solely for hallucination accounting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AntiHallucinationSlot {
    pub slot_id: String,
    pub description: String,
}

/// The simulated-user persona a task was mutated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Persona {
    #[serde(rename = "GOLDEN")]
    Golden,
    #[serde(rename = "P-MIN")]
    Minimalist,
    #[serde(rename = "P-RAM")]
    Rambling,
    #[serde(rename = "P-INT")]
    Intuitive,
    #[serde(rename = "P-CON")]
    Conflicting,
}

impl Persona {
    /// The four mutating personas, in canonical order.
    pub const MUTATORS: [Persona; 4] = [
        Persona::Minimalist,
        Persona::Rambling,
        Persona::Intuitive,
        Persona::Conflicting,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Persona::Golden => "GOLDEN",
            Persona::Minimalist => "P-MIN",
            Persona::Rambling => "P-RAM",
            Persona::Intuitive => "P-INT",
            Persona::Conflicting => "P-CON",
        }
    }
}

impl fmt::Display for Persona {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Persona {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "GOLDEN" => Ok(Persona::Golden),
            "P-MIN" => Ok(Persona::Minimalist),
            "P-RAM" => Ok(Persona::Rambling),
            "P-INT" => Ok(Persona::Intuitive),
            "P-CON" => Ok(Persona::Conflicting),
            other => Err(CorpusError::UnknownPersona(other.to_string())),
        }
    }
}

/// Task difficulty level, derived from the complexity-score clustering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Difficulty {
    Easy,
    Middle,
    Hard,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Middle, Difficulty::Hard];

    pub fn as_str(&self) -> &'static str {
        match self {
            Difficulty::Easy => "Easy",
            Difficulty::Middle => "Middle",
            Difficulty::Hard => "Hard",
        }
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Turn budgets enforced on a trajectory: a global turn limit and a bound on
/// consecutive verification failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets {
    pub t_total: u32,
    pub t_error: u32,
}

/// Budgets scale with difficulty: ascending budgets rank-matched to ascending
/// difficulty.
pub fn budgets_for(level: Difficulty) -> Budgets {
    match level {
        Difficulty::Easy => Budgets {
            t_total: 15,
            t_error: 6,
        },
        Difficulty::Middle => Budgets {
            t_total: 20,
            t_error: 8,
        },
        Difficulty::Hard => Budgets {
            t_total: 25,
            t_error: 10,
        },
    }
}

/// One benchmark case: a seed's golden instruction paired with a persona and
/// the instruction that persona's mutation operator produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub task_id: String,
    pub seed_id: String,
    pub golden_instruction: String,
    pub persona: Persona,
    pub mutated_instruction: String,
    /// Hex SHA-256 of the golden instruction, for mutation provenance.
    pub golden_checksum: String,
    pub slots: Vec<OracleSlot>,
    pub anti_slot: AntiHallucinationSlot,
    pub difficulty: Difficulty,
    pub budgets: Budgets,
}

impl Task {
    /// The instruction handed to the agent (the mutated one; for GOLDEN tasks
    /// it equals the golden instruction).
    pub fn instruction(&self) -> &str {
        &self.mutated_instruction
    }

    pub fn slot_ids(&self) -> BTreeSet<String> {
        self.slots.iter().map(|s| s.slot_id.clone()).collect()
    }
}

/// Checksum used for mutation provenance records.
pub fn instruction_checksum(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn task_id_for(seed_id: &str, persona: Persona) -> String {
    format!("{seed_id}::{persona}")
}

/// A stored persona mutation of a seed's golden instruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutationRecord {
    pub instruction: String,
    pub golden_checksum: String,
}

/// One seed document as stored in a corpus file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedDoc {
    pub seed_id: String,
    pub golden_instruction: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub difficulty: Option<Difficulty>,
    pub slots: Vec<OracleSlot>,
    pub anti_slot: AntiHallucinationSlot,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub mutations: BTreeMap<Persona, MutationRecord>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus file not found: {0}")]
    Missing(String),
    #[error("failed to read corpus: {0}")]
    Io(#[from] std::io::Error),
    #[error("corpus is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("duplicate seed_id {0}")]
    DuplicateSeed(String),
    #[error("duplicate task_id {0}")]
    DuplicateTask(String),
    #[error("schema violations:\n{}", .0.join("\n"))]
    Invalid(Vec<String>),
    #[error("unknown persona {0:?}")]
    UnknownPersona(String),
    #[error("seed {seed_id}: mutation for {persona} has golden_checksum {found}, expected {expected}")]
    ChecksumMismatch {
        seed_id: String,
        persona: Persona,
        found: String,
        expected: String,
    },
    #[error("difficulty must be set on all seeds or on none; {0} of {1} seeds carry it")]
    MixedDifficulty(usize, usize),
    #[error("cannot cluster: need at least {k} distinct scores, found {distinct}")]
    TooFewDistinctScores { k: usize, distinct: usize },
    #[error("clustering requires k = 3 for difficulty levels, got {0}")]
    UnsupportedK(usize),
    #[error("scores contain a non-finite value for {0}")]
    NonFiniteScore(String),
    #[error("scoring failed: {0}")]
    Scoring(#[from] scoring::ScoringError),
}

/// Parse a corpus file into its raw seed documents without materializing
/// tasks. Used by mutation tooling, which runs before difficulty assignment.
pub fn load_seed_docs(path: &Path) -> Result<Vec<SeedDoc>, CorpusError> {
    if !path.exists() {
        return Err(CorpusError::Missing(path.display().to_string()));
    }
    let text = std::fs::read_to_string(path)?;
    let seeds: Vec<SeedDoc> = serde_json::from_str(&text)?;
    let mut seen = BTreeSet::new();
    for seed in &seeds {
        if !seen.insert(seed.seed_id.clone()) {
            return Err(CorpusError::DuplicateSeed(seed.seed_id.clone()));
        }
    }
    Ok(seeds)
}

/// Serialize seed documents in the canonical corpus form (pretty JSON with a
/// trailing newline). `serialize(load(x))` is byte-identical to this form.
pub fn canonical_corpus_json(seeds: &[SeedDoc]) -> String {
    let mut out = serde_json::to_string_pretty(seeds).expect("corpus serializes");
    out.push('\n');
    out
}

pub fn save_seed_docs(path: &Path, seeds: &[SeedDoc]) -> Result<(), CorpusError> {
    std::fs::write(path, canonical_corpus_json(seeds))?;
    Ok(())
}

/// Load a corpus file and materialize every task it describes: one GOLDEN
/// task per seed plus one task per stored persona mutation. Tasks are
/// validated and returned in stable `task_id` order.
///
/// Difficulty comes from explicit `difficulty` fields when every seed has
/// one; otherwise it is derived by clustering the seed complexity scores
/// (which requires at least three distinct scores).
pub fn load_corpus(path: &Path) -> Result<Vec<Task>, CorpusError> {
    let seeds = load_seed_docs(path)?;
    materialize_tasks(&seeds, DEFAULT_CLUSTER_SEED)
}

/// Deterministic default seed for difficulty clustering during corpus load.
pub const DEFAULT_CLUSTER_SEED: u64 = 17;

/// Build validated tasks from parsed seed documents.
pub fn materialize_tasks(seeds: &[SeedDoc], cluster_seed: u64) -> Result<Vec<Task>, CorpusError> {
    let explicit = seeds.iter().filter(|s| s.difficulty.is_some()).count();
    let difficulty_by_seed: BTreeMap<String, Difficulty> = if explicit == seeds.len() {
        seeds
            .iter()
            .map(|s| (s.seed_id.clone(), s.difficulty.unwrap()))
            .collect()
    } else if explicit == 0 {
        let scores = seed_scores(seeds)?;
        let clustering = cluster_difficulty(&scores, 3, cluster_seed)?;
        clustering.assignment
    } else {
        return Err(CorpusError::MixedDifficulty(explicit, seeds.len()));
    };

    let mut tasks = Vec::new();
    let mut task_ids = BTreeSet::new();
    for seed in seeds {
        let difficulty = difficulty_by_seed[&seed.seed_id];
        let checksum = instruction_checksum(&seed.golden_instruction);
        let mut push = |persona: Persona, instruction: String| -> Result<(), CorpusError> {
            let task_id = task_id_for(&seed.seed_id, persona);
            if !task_ids.insert(task_id.clone()) {
                return Err(CorpusError::DuplicateTask(task_id));
            }
            tasks.push(Task {
                task_id,
                seed_id: seed.seed_id.clone(),
                golden_instruction: seed.golden_instruction.clone(),
                persona,
                mutated_instruction: instruction,
                golden_checksum: checksum.clone(),
                slots: seed.slots.clone(),
                anti_slot: seed.anti_slot.clone(),
                difficulty,
                budgets: budgets_for(difficulty),
            });
            Ok(())
        };
        push(Persona::Golden, seed.golden_instruction.clone())?;
        for (&persona, record) in &seed.mutations {
            if record.golden_checksum != checksum {
                return Err(CorpusError::ChecksumMismatch {
                    seed_id: seed.seed_id.clone(),
                    persona,
                    found: record.golden_checksum.clone(),
                    expected: checksum,
                });
            }
            push(persona, record.instruction.clone())?;
        }
    }

    let mut violations = Vec::new();
    for task in &tasks {
        violations.extend(validate_task(task));
    }
    if !violations.is_empty() {
        return Err(CorpusError::Invalid(violations));
    }
    tasks.sort_by(|a, b| a.task_id.cmp(&b.task_id));
    Ok(tasks)
}

/// Check every task and slot invariant. Returns one description per
/// violation; an empty list means the task is well-formed.
pub fn validate_task(task: &Task) -> Vec<String> {
    let mut violations = Vec::new();
    let id = &task.task_id;
    let n = task.slots.len();
    if n < 7 {
        violations.push(format!("task {id}: slot count {n} < 7"));
    }
    if n > 12 {
        violations.push(format!("task {id}: slot count {n} > 12"));
    }
    let mut seen = BTreeSet::new();
    for slot in &task.slots {
        if !seen.insert(slot.slot_id.clone()) {
            violations.push(format!(
                "task {id}: duplicate slot_id {:?}",
                slot.slot_id
            ));
        }
        if slot.target_component.trim().is_empty() {
            violations.push(format!(
                "task {id} slot {}: target_component is empty",
                slot.slot_id
            ));
        }
        if !(1..=3).contains(&slot.tech_complexity) {
            violations.push(format!(
                "task {id} slot {}: tech_complexity {} not in {{1,2,3}}",
                slot.slot_id, slot.tech_complexity
            ));
        }
    }
    if task.anti_slot.slot_id.trim().is_empty() {
        violations.push(format!("task {id}: anti_slot.slot_id is empty"));
    }
    if seen.contains(&task.anti_slot.slot_id) {
        violations.push(format!(
            "task {id}: anti_slot.slot_id {:?} collides with an oracle slot",
            task.anti_slot.slot_id
        ));
    }
    if task.persona == Persona::Golden && task.mutated_instruction != task.golden_instruction {
        violations.push(format!(
            "task {id}: GOLDEN task must carry the golden instruction unchanged"
        ));
    }
    if task.golden_instruction.trim().is_empty() {
        violations.push(format!("task {id}: golden_instruction is empty"));
    }
    violations
}

/// Total complexity score of a task: the sum of its slot weights. The
/// anti-hallucination slot never contributes.
pub fn task_complexity(task: &Task) -> Result<f64, CorpusError> {
    let table = scoring::slot_weights(task)?;
    Ok(table.total())
}

/// Complexity score per seed, computed on the GOLDEN form of each seed.
pub fn seed_scores(seeds: &[SeedDoc]) -> Result<BTreeMap<String, f64>, CorpusError> {
    let mut scores = BTreeMap::new();
    for seed in seeds {
        let total = scoring::slot_weights_for_slots(&seed.slots)?.total();
        scores.insert(seed.seed_id.clone(), total);
    }
    Ok(scores)
}

/// Cluster 1-D complexity scores into `k = 3` difficulty levels with seeded,
/// reproducible k-means. Ascending cluster centers map to Easy < Middle <
/// Hard; a score equidistant to two centers goes to the lower one.
pub fn cluster_difficulty(
    scores: &BTreeMap<String, f64>,
    k: usize,
    seed: u64,
) -> Result<DifficultyClustering, CorpusError> {
    cluster::cluster_difficulty(scores, k, seed)
}

/// Result of expanding golden seeds through the persona operators.
#[derive(Debug)]
pub struct Expansion {
    pub tasks: Vec<Task>,
    /// (seed_id, persona, error description) per failed mutation. Remaining
    /// seeds are still processed.
    pub failures: Vec<(String, Persona, String)>,
}

/// Expand golden tasks through all four persona operators: each seed yields
/// exactly one task per mutating persona. Slots, difficulty, and budgets are
/// copied unchanged; only the instruction is rewritten.
pub fn expand_personas<M, E>(seeds: &[Task], mut mutate: M) -> Expansion
where
    M: FnMut(&Task, Persona) -> Result<String, E>,
    E: fmt::Display,
{
    let mut tasks = Vec::new();
    let mut failures = Vec::new();
    for seed in seeds {
        if seed.persona != Persona::Golden {
            failures.push((
                seed.seed_id.clone(),
                seed.persona,
                "expansion input must be a GOLDEN task".to_string(),
            ));
            continue;
        }
        for persona in Persona::MUTATORS {
            match mutate(seed, persona) {
                Ok(instruction) => tasks.push(Task {
                    task_id: task_id_for(&seed.seed_id, persona),
                    persona,
                    mutated_instruction: instruction,
                    ..seed.clone()
                }),
                Err(err) => failures.push((seed.seed_id.clone(), persona, err.to_string())),
            }
        }
    }
    Expansion { tasks, failures }
}

/// One row of the corpus difficulty summary table.
#[derive(Debug, Clone, Serialize)]
pub struct DifficultyRow {
    pub level: String,
    pub n_seed: usize,
    pub n_task: usize,
    pub percentage: f64,
    pub avg_slots: f64,
    pub score_min: f64,
    pub score_max: f64,
    pub center: f64,
}

/// Summarize a clustered corpus in the difficulty-table layout
/// (# Seed, # Task, Percentage, Avg. # Slots, Score Range, Cluster Center).
/// `# Task` counts the four persona variants each seed expands into.
pub fn difficulty_table(
    seeds: &[SeedDoc],
    clustering: &DifficultyClustering,
) -> Vec<DifficultyRow> {
    let total_tasks: usize = seeds.len() * Persona::MUTATORS.len();
    let mut rows = Vec::new();
    for (idx, level) in Difficulty::ALL.iter().enumerate() {
        let members: Vec<&SeedDoc> = seeds
            .iter()
            .filter(|s| clustering.assignment.get(&s.seed_id) == Some(level))
            .collect();
        if members.is_empty() {
            continue;
        }
        let scores: Vec<f64> = members
            .iter()
            .map(|s| clustering.score[&s.seed_id])
            .collect();
        let n_seed = members.len();
        let n_task = n_seed * Persona::MUTATORS.len();
        rows.push(DifficultyRow {
            level: level.to_string(),
            n_seed,
            n_task,
            percentage: 100.0 * n_task as f64 / total_tasks as f64,
            avg_slots: members.iter().map(|s| s.slots.len() as f64).sum::<f64>() / n_seed as f64,
            score_min: scores.iter().cloned().fold(f64::INFINITY, f64::min),
            score_max: scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            center: clustering.centers[idx],
        });
    }
    let all_scores: Vec<f64> = clustering.score.values().cloned().collect();
    if !all_scores.is_empty() {
        rows.push(DifficultyRow {
            level: "All".to_string(),
            n_seed: seeds.len(),
            n_task: total_tasks,
            percentage: 100.0,
            avg_slots: seeds.iter().map(|s| s.slots.len() as f64).sum::<f64>() / seeds.len() as f64,
            score_min: all_scores.iter().cloned().fold(f64::INFINITY, f64::min),
            score_max: all_scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            center: all_scores.iter().sum::<f64>() / all_scores.len() as f64,
        });
    }
    rows
}

#[cfg(test)]
mod tests;
