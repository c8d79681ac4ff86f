//! Persona-specific instruction mutation and the simulated user that answers
//! clarification questions in persona style without leaking unasked
//! requirements.
//!
//! Four personas cover the classic requirement-defect classes: the
//! minimalist strips everything but the core request (incompleteness), the
//! rambler buries requirements in noise (low signal-to-noise), the intuitive
//! user swaps technical terms for metaphors (ambiguity), and the conflicting
//! user injects frontend paradoxes (contradiction).

mod containment;

pub use containment::{
    canonical_clause, content_tokens, first_interrogative, noise_ratio, retrieve_snippet,
    segment_clauses, ContainmentSnippet,
};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{instruction_checksum, Persona};
use crate::modelio::{ChatMessage, ChatRequest, ModelClient, ModelError};

pub const USER_AGENT_TEMPLATE: &str = include_str!("../../prompts/user_agent_system.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectClass {
    Incompleteness,
    LowSignalToNoise,
    Ambiguity,
    Contradiction,
}

/// Everything that defines one mutating persona: its mutation operator
/// directive and its conversational response rules.
#[derive(Debug, Clone)]
pub struct PersonaSpec {
    pub persona: Persona,
    pub defect_class: DefectClass,
    pub mutation_directive: &'static str,
    pub response_rules: &'static str,
}

static SPECS: [PersonaSpec; 4] = [
    PersonaSpec {
        persona: Persona::Minimalist,
        defect_class: DefectClass::Incompleteness,
        mutation_directive: include_str!("../../prompts/mutation_min.txt"),
        response_rules: include_str!("../../prompts/persona_rules_min.txt"),
    },
    PersonaSpec {
        persona: Persona::Rambling,
        defect_class: DefectClass::LowSignalToNoise,
        mutation_directive: include_str!("../../prompts/mutation_ram.txt"),
        response_rules: include_str!("../../prompts/persona_rules_ram.txt"),
    },
    PersonaSpec {
        persona: Persona::Intuitive,
        defect_class: DefectClass::Ambiguity,
        mutation_directive: include_str!("../../prompts/mutation_int.txt"),
        response_rules: include_str!("../../prompts/persona_rules_int.txt"),
    },
    PersonaSpec {
        persona: Persona::Conflicting,
        defect_class: DefectClass::Contradiction,
        mutation_directive: include_str!("../../prompts/mutation_con.txt"),
        response_rules: include_str!("../../prompts/persona_rules_con.txt"),
    },
];

impl PersonaSpec {
    /// Spec for a mutating persona; GOLDEN has no mutation operator.
    pub fn for_persona(persona: Persona) -> Result<&'static PersonaSpec, PersonaError> {
        SPECS
            .iter()
            .find(|s| s.persona == persona)
            .ok_or(PersonaError::NotAMutator(persona))
    }

    pub fn all() -> &'static [PersonaSpec; 4] {
        &SPECS
    }
}

#[derive(Debug, Error)]
pub enum PersonaError {
    #[error("{0} has no mutation operator")]
    NotAMutator(Persona),
    #[error("golden instruction is empty")]
    EmptyGolden,
    #[error("model produced empty output")]
    EmptyOutput,
    #[error("model call failed: {0}")]
    Model(#[from] ModelError),
    #[error("containment breach: withheld clause {0:?} reached the user prompt")]
    ContainmentBreach(String),
}

/// A persona mutation of a golden instruction, with provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutationOutcome {
    pub persona: Persona,
    pub text: String,
    /// Hex SHA-256 of the golden instruction the mutation was derived from.
    pub golden_checksum: String,
}

/// Apply a persona's metamorphic operator to a golden instruction. The model
/// does the rewriting; the outcome records the persona and a checksum of the
/// source for provenance.
pub fn mutate_instruction(
    golden: &str,
    spec: &PersonaSpec,
    model: &dyn ModelClient,
) -> Result<MutationOutcome, PersonaError> {
    if golden.trim().is_empty() {
        return Err(PersonaError::EmptyGolden);
    }
    let prompt = format!(
        "{}\n\nOriginal request:\n{}\n",
        spec.mutation_directive.trim(),
        golden.trim()
    );
    let request = ChatRequest::new(
        model.model_tag().to_string(),
        vec![ChatMessage::user(prompt)],
    );
    let response = model.chat(&request)?;
    let text = response.text.trim().to_string();
    if text.is_empty() {
        return Err(PersonaError::EmptyOutput);
    }
    Ok(MutationOutcome {
        persona: spec.persona,
        text,
        golden_checksum: instruction_checksum(golden),
    })
}

/// One answered clarification exchange.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DialogueTurn {
    pub question: String,
    pub reply: String,
}

/// Dialogue state owned by one trajectory's simulated user.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DialogueHistory {
    pub turns: Vec<DialogueTurn>,
    /// Conflict topics the conflicting persona has already defended once.
    defended: BTreeSet<String>,
}

impl DialogueHistory {
    pub fn push(&mut self, question: impl Into<String>, reply: impl Into<String>) {
        self.turns.push(DialogueTurn {
            question: question.into(),
            reply: reply.into(),
        });
    }
}

const CONFLICT_MARKERS: &[&str] = &[
    "contradict",
    "conflict",
    "inconsistent",
    "impossible",
    "paradox",
    "mutually exclusive",
    "doesn't make sense",
    "does not make sense",
    "at the same time",
    "can't both",
    "cannot both",
];

/// Whether a clarify question calls out a contradiction in the instructions.
pub fn question_flags_conflict(question: &str) -> bool {
    let lower = question.to_lowercase();
    CONFLICT_MARKERS.iter().any(|m| lower.contains(m))
}

fn conflict_key(question: &str) -> String {
    let tokens: Vec<String> = content_tokens(question).into_iter().collect();
    tokens.join(" ")
}

/// Assemble the stage-two prompt from a containment snippet. Only matched
/// facts are embedded; an internal assertion refuses to build a prompt that
/// contains any withheld clause.
pub fn build_user_prompt(
    snippet: &ContainmentSnippet,
    spec: &PersonaSpec,
    extra_rules: &str,
) -> Result<String, PersonaError> {
    let ground_truth = if snippet.matched_facts.is_empty() {
        match &snippet.refusal {
            Some(note) => format!("[no matching requirement] {note}"),
            None => "[the requirements say nothing about this topic]".to_string(),
        }
    } else {
        snippet
            .matched_facts
            .iter()
            .map(|f| format!("- {f}"))
            .collect::<Vec<String>>()
            .join("\n")
    };
    let mut rules = spec.response_rules.trim().to_string();
    if !extra_rules.is_empty() {
        rules.push_str("\n\n");
        rules.push_str(extra_rules);
    }
    let prompt = USER_AGENT_TEMPLATE
        .replace("{ground_truth}", &ground_truth)
        .replace("{persona_rules}", &rules);

    let canonical_prompt = canonical_clause(&prompt);
    for withheld in &snippet.withheld_topics {
        let canon = canonical_clause(withheld);
        // Very short clauses could collide with template text by accident;
        // the containment check targets substantive requirement clauses.
        if canon.len() >= 8 && canonical_prompt.contains(&canon) {
            return Err(PersonaError::ContainmentBreach(withheld.clone()));
        }
    }
    Ok(prompt)
}

/// Stage two: persona-conditioned response generation. The model sees only
/// the matched facts, the persona rules, and the dialogue so far; its reply
/// is returned verbatim.
pub fn persona_respond(
    snippet: &ContainmentSnippet,
    spec: &PersonaSpec,
    history: &mut DialogueHistory,
    model: &dyn ModelClient,
) -> Result<String, PersonaError> {
    let mut extra_rules = String::new();
    if spec.persona == Persona::Conflicting && question_flags_conflict(&snippet.question) {
        let key = conflict_key(&snippet.question);
        if history.defended.insert(key) {
            extra_rules.push_str(
                "The developer has just identified a contradiction for the first time: defend your original stance briefly, then yield the accurate requirement.",
            );
        } else {
            extra_rules.push_str(
                "You already defended this contradiction earlier: yield the accurate requirement immediately without defending again.",
            );
        }
    }
    let system = build_user_prompt(snippet, spec, &extra_rules)?;

    let mut messages = vec![ChatMessage::system(system)];
    for turn in &history.turns {
        messages.push(ChatMessage::user(turn.question.clone()));
        messages.push(ChatMessage::assistant(turn.reply.clone()));
    }
    messages.push(ChatMessage::user(snippet.question.clone()));

    let request = ChatRequest::new(model.model_tag().to_string(), messages);
    let response = model.chat(&request)?;
    let reply = response.text;
    if reply.trim().is_empty() {
        return Err(PersonaError::EmptyOutput);
    }
    if spec.persona == Persona::Rambling {
        let ratio = noise_ratio(&reply, &snippet.matched_facts);
        if ratio < 0.7 {
            log::warn!(
                "rambling reply carries only {:.0}% noise (target >= 70%)",
                ratio * 100.0
            );
        }
    }
    Ok(reply)
}

/// Answer one clarify action end to end: extract the first question, run
/// containment, generate the persona reply, and record the turn. Extra
/// questions in the same payload are dropped with a note.
pub fn answer_clarify(
    raw_question: &str,
    golden: &str,
    spec: &PersonaSpec,
    history: &mut DialogueHistory,
    model: &dyn ModelClient,
) -> Result<String, PersonaError> {
    let (question, dropped) = first_interrogative(raw_question);
    let snippet = retrieve_snippet(&question, golden);
    let mut reply = persona_respond(&snippet, spec, history, model)?;
    if dropped {
        reply.push_str("\n(One question at a time, please. I answered the first one.)");
    }
    history.push(question, reply.clone());
    Ok(reply)
}

/// Deterministic answer used for GOLDEN baseline runs: the matched facts
/// verbatim, with no persona styling and no model call.
pub fn golden_answer(raw_question: &str, golden: &str, history: &mut DialogueHistory) -> String {
    let (question, dropped) = first_interrogative(raw_question);
    let snippet = retrieve_snippet(&question, golden);
    let mut reply = if snippet.matched_facts.is_empty() {
        snippet
            .refusal
            .clone()
            .unwrap_or_else(|| "The requirements do not cover that; use your judgment.".to_string())
    } else {
        snippet.matched_facts.join(". ")
    };
    if dropped {
        reply.push_str("\n(One question at a time, please. I answered the first one.)");
    }
    history.push(question, reply.clone());
    reply
}

#[cfg(test)]
mod tests;
