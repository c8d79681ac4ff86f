//! Stage one of the simulated user: deterministic retrieval and containment.
//!
//! The golden instruction is segmented into requirement clauses. Only the
//! clauses whose content tokens overlap the question are released; every
//! other clause is listed as withheld and must never reach the stage-two
//! prompt. Keeping this stage out of the LLM makes the no-leakage guarantee
//! assertable.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

/// The facts a question unlocked, and everything it did not.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContainmentSnippet {
    pub question: String,
    /// Clauses of the golden instruction addressed by the question, verbatim.
    pub matched_facts: Vec<String>,
    /// Clauses the question did not ask about. Never enter any prompt.
    pub withheld_topics: Vec<String>,
    /// Set when the question solicits everything at once instead of naming
    /// a topic.
    pub refusal: Option<String>,
}

const STOPWORDS: &[&str] = &[
    "a", "an", "the", "is", "are", "was", "were", "be", "been", "being", "am", "do", "does",
    "did", "doing", "have", "has", "had", "what", "which", "who", "whom", "whose", "this",
    "that", "these", "those", "i", "you", "he", "she", "it", "we", "they", "me", "him", "her",
    "them", "my", "your", "his", "its", "our", "their", "of", "to", "in", "on", "for", "with",
    "at", "by", "from", "up", "down", "out", "about", "into", "over", "under", "after",
    "before", "and", "or", "but", "nor", "not", "no", "yes", "if", "then", "else", "when",
    "where", "why", "how", "so", "than", "too", "very", "can", "cannot", "will", "would",
    "could", "should", "shall", "may", "might", "must", "just", "also", "there", "here",
    "please", "tell", "show", "give", "let", "want", "like", "need", "make", "use", "using",
    "get", "as", "any", "some", "such", "only", "own", "same", "other", "each", "per", "via",
    "ok", "okay", "well", "really", "thanks", "thank",
];

const BROAD_WORDS: &[&str] = &[
    "everything", "anything", "all", "whole", "entire", "complete", "full", "detail",
    "details", "rest", "requirements", "specification", "specifications", "spec", "more",
];

fn stem(token: &str) -> String {
    if token.len() > 3 && token.ends_with('s') && !token.ends_with("ss") {
        token[..token.len() - 1].to_string()
    } else {
        token.to_string()
    }
}

fn raw_tokens(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(stem)
        .collect()
}

/// Lowercased, stemmed tokens with stopwords removed.
pub fn content_tokens(text: &str) -> BTreeSet<String> {
    raw_tokens(text)
        .into_iter()
        .filter(|t| !STOPWORDS.contains(&t.as_str()))
        .collect()
}

/// Split a golden instruction into requirement clauses: sentence boundaries
/// first, then coordinating conjunctions inside each sentence. Oracle slots
/// are sentence-scale, so this granularity tracks them.
pub fn segment_clauses(golden: &str) -> Vec<String> {
    let mut sentences = Vec::new();
    let mut current = String::new();
    for ch in golden.chars() {
        current.push(ch);
        if matches!(ch, '.' | '!' | '?') {
            sentences.push(std::mem::take(&mut current));
        }
    }
    if !current.trim().is_empty() {
        sentences.push(current);
    }

    let separators = ["; ", ", and ", ", but ", ", while ", " and ", " but ", " while "];
    let mut clauses = Vec::new();
    for sentence in sentences {
        let mut parts = vec![sentence];
        for sep in separators {
            parts = parts
                .into_iter()
                .flat_map(|p| {
                    p.split(sep)
                        .map(str::to_string)
                        .collect::<Vec<String>>()
                })
                .collect();
        }
        for part in parts {
            let clause = part.trim_matches(|c: char| c.is_whitespace() || matches!(c, '.' | '!' | '?' | ',' | ';'));
            if !clause.is_empty() && !content_tokens(clause).is_empty() {
                clauses.push(clause.to_string());
            }
        }
    }
    clauses
}

/// Canonical clause form used for the prompt-hygiene containment check:
/// lowercase with collapsed whitespace.
pub fn canonical_clause(clause: &str) -> String {
    clause
        .to_lowercase()
        .split_whitespace()
        .collect::<Vec<&str>>()
        .join(" ")
}

/// Match the question against the golden instruction's clauses. Only clauses
/// sharing an explicit content token with the question are released; broad
/// solicitations ("tell me everything") that name no topic are refused.
pub fn retrieve_snippet(question: &str, golden: &str) -> ContainmentSnippet {
    let clauses = segment_clauses(golden);
    let question_tokens = content_tokens(question);
    let specific: BTreeSet<String> = question_tokens
        .iter()
        .filter(|t| !BROAD_WORDS.contains(&t.as_str()))
        .cloned()
        .collect();
    let is_broad = question_tokens.iter().any(|t| BROAD_WORDS.contains(&t.as_str()));

    let mut matched_facts = Vec::new();
    let mut withheld_topics = Vec::new();
    for clause in clauses {
        let clause_tokens = content_tokens(&clause);
        if !specific.is_empty() && !clause_tokens.is_disjoint(&specific) {
            matched_facts.push(clause);
        } else {
            withheld_topics.push(clause);
        }
    }

    let refusal = if matched_facts.is_empty() && is_broad {
        Some(
            "The question solicits the whole requirement at once; ask about one topic at a time."
                .to_string(),
        )
    } else {
        None
    };

    ContainmentSnippet {
        question: question.to_string(),
        matched_facts,
        withheld_topics,
        refusal,
    }
}

/// Extract the first interrogative sentence of a clarify payload. Returns
/// the question and whether further questions were dropped.
pub fn first_interrogative(raw: &str) -> (String, bool) {
    let mut questions = Vec::new();
    let mut current = String::new();
    for ch in raw.chars() {
        current.push(ch);
        if matches!(ch, '?' | '.' | '!') {
            if current.trim_end().ends_with('?') {
                questions.push(current.trim().to_string());
            }
            current.clear();
        }
    }
    if current.trim_end().ends_with('?') {
        questions.push(current.trim().to_string());
    }
    match questions.len() {
        0 => (raw.trim().to_string(), false),
        1 => (questions.remove(0), false),
        _ => (questions.remove(0), true),
    }
}

/// Token share of a reply that is not drawn from the released facts. The
/// rambling persona targets at least 0.7.
pub fn noise_ratio(reply: &str, matched_facts: &[String]) -> f64 {
    let fact_tokens: BTreeSet<String> = matched_facts
        .iter()
        .flat_map(|f| raw_tokens(f))
        .collect();
    let reply_tokens = raw_tokens(reply);
    if reply_tokens.is_empty() {
        return 0.0;
    }
    let noise = reply_tokens
        .iter()
        .filter(|t| !fact_tokens.contains(*t))
        .count();
    noise as f64 / reply_tokens.len() as f64
}
