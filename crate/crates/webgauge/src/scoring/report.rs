//! Aggregate report tables over evaluation results, rendered as Markdown and
//! CSV with the column order fixed:
//! (Easy, Middle, Hard, P-MIN, P-RAM, P-INT, P-CON, TCR, Hallu. Rate).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{Difficulty, Persona};
use crate::judge::EvaluationResult;

/// One completion-rate row per model tag. Cells are mean TCR over the tasks
/// in that group; `None` renders as absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TcrRow {
    pub model: String,
    pub easy: Option<f64>,
    pub middle: Option<f64>,
    pub hard: Option<f64>,
    pub p_min: Option<f64>,
    pub p_ram: Option<f64>,
    pub p_int: Option<f64>,
    pub p_con: Option<f64>,
    pub overall: Option<f64>,
    pub hallucination_rate: Option<f64>,
}

/// One behavioral row per model tag (Avg. LoC, HR, # Clarify, SR, VBR).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorRow {
    pub model: String,
    pub avg_loc: f64,
    pub hallucination_rate: f64,
    pub avg_clarify: f64,
    pub submit_rate: f64,
    /// Visual bug rate: share of aesthetic verdicts flagging a rendering
    /// defect, over the tasks that were aesthetically scored.
    pub visual_bug_rate: Option<f64>,
}

/// Interaction and verification analytics per model tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionRow {
    pub model: String,
    pub avg_steps: f64,
    pub mean_vci: Option<f64>,
    pub mean_ias: Option<f64>,
    /// Clarification hit rate over all judged clarify questions.
    pub chr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportTables {
    pub tcr: Vec<TcrRow>,
    pub behavior: Vec<BehaviorRow>,
    pub interaction: Vec<InteractionRow>,
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Fold evaluation results into per-model report rows: mean TCR per
/// difficulty, per persona, and overall, plus the overall hallucination rate
/// and the behavioral aggregates. Rows are emitted in model-tag order.
pub fn aggregate_report(results: &[EvaluationResult]) -> ReportTables {
    let mut by_model: BTreeMap<&str, Vec<&EvaluationResult>> = BTreeMap::new();
    for result in results {
        by_model.entry(&result.model_tag).or_default().push(result);
    }

    let mut tcr = Vec::new();
    let mut behavior = Vec::new();
    let mut interaction = Vec::new();
    for (model, group) in &by_model {
        let tcr_of = |pred: &dyn Fn(&EvaluationResult) -> bool| -> Option<f64> {
            mean(
                &group
                    .iter()
                    .filter(|r| pred(r))
                    .map(|r| r.tcr)
                    .collect::<Vec<f64>>(),
            )
        };
        let flags: Vec<f64> = group
            .iter()
            .map(|r| r.verdicts.hallucination_triggered as u8 as f64)
            .collect();
        tcr.push(TcrRow {
            model: model.to_string(),
            easy: tcr_of(&|r| r.difficulty == Difficulty::Easy),
            middle: tcr_of(&|r| r.difficulty == Difficulty::Middle),
            hard: tcr_of(&|r| r.difficulty == Difficulty::Hard),
            p_min: tcr_of(&|r| r.persona == Persona::Minimalist),
            p_ram: tcr_of(&|r| r.persona == Persona::Rambling),
            p_int: tcr_of(&|r| r.persona == Persona::Intuitive),
            p_con: tcr_of(&|r| r.persona == Persona::Conflicting),
            overall: tcr_of(&|_| true),
            hallucination_rate: mean(&flags),
        });

        let scored: Vec<&&EvaluationResult> =
            group.iter().filter(|r| r.aesthetics.is_some()).collect();
        behavior.push(BehaviorRow {
            model: model.to_string(),
            avg_loc: mean(&group.iter().map(|r| r.behavior.avg_loc).collect::<Vec<f64>>())
                .unwrap_or(0.0),
            hallucination_rate: mean(&flags).unwrap_or(0.0),
            avg_clarify: mean(
                &group
                    .iter()
                    .map(|r| r.behavior.n_clarify as f64)
                    .collect::<Vec<f64>>(),
            )
            .unwrap_or(0.0),
            submit_rate: mean(
                &group
                    .iter()
                    .map(|r| r.behavior.proactive_submit as u8 as f64)
                    .collect::<Vec<f64>>(),
            )
            .unwrap_or(0.0),
            visual_bug_rate: mean(
                &scored
                    .iter()
                    .map(|r| r.aesthetics.as_ref().unwrap().has_visual_bug as u8 as f64)
                    .collect::<Vec<f64>>(),
            ),
        });

        let chr_hits: u32 = group.iter().filter_map(|r| r.behavior.chr_hits).sum();
        let chr_total: u32 = group
            .iter()
            .filter(|r| r.behavior.chr_hits.is_some())
            .map(|r| r.behavior.chr_total)
            .sum();
        interaction.push(InteractionRow {
            model: model.to_string(),
            avg_steps: mean(
                &group
                    .iter()
                    .map(|r| r.behavior.steps as f64)
                    .collect::<Vec<f64>>(),
            )
            .unwrap_or(0.0),
            mean_vci: mean(&group.iter().filter_map(|r| r.behavior.vci).collect::<Vec<f64>>()),
            mean_ias: mean(&group.iter().filter_map(|r| r.behavior.ias).collect::<Vec<f64>>()),
            chr: if chr_total > 0 {
                Some(chr_hits as f64 / chr_total as f64)
            } else {
                None
            },
        });
    }
    ReportTables {
        tcr,
        behavior,
        interaction,
    }
}

/// Percent with two decimals, the completion-rate cell format ("38.78").
fn pct2(value: Option<f64>) -> String {
    value.map_or("-".to_string(), |v| format!("{:.2}", v * 100.0))
}

/// Percent with one decimal and a sign, the rate cell format ("62.4%").
fn pct1(value: Option<f64>) -> String {
    value.map_or("-".to_string(), |v| format!("{:.1}%", v * 100.0))
}

fn num(value: Option<f64>, decimals: usize) -> String {
    value.map_or("-".to_string(), |v| format!("{v:.decimals$}"))
}

pub fn render_markdown(tables: &ReportTables) -> String {
    let mut out = String::new();
    out.push_str("## Task completion\n\n");
    out.push_str(
        "| Model | Easy | Middle | Hard | P-MIN | P-RAM | P-INT | P-CON | TCR | Hallu. Rate |\n",
    );
    out.push_str("|---|---|---|---|---|---|---|---|---|---|\n");
    for row in &tables.tcr {
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |\n",
            row.model,
            pct2(row.easy),
            pct2(row.middle),
            pct2(row.hard),
            pct2(row.p_min),
            pct2(row.p_ram),
            pct2(row.p_int),
            pct2(row.p_con),
            pct2(row.overall),
            pct1(row.hallucination_rate),
        ));
    }
    out.push_str("\n## Generation behavior\n\n");
    out.push_str("| Model | Avg. LoC | HR (%) | # Clarify | SR (%) | VBR (%) |\n");
    out.push_str("|---|---|---|---|---|---|\n");
    for row in &tables.behavior {
        out.push_str(&format!(
            "| {} | {:.1} | {} | {:.2} | {:.1} | {} |\n",
            row.model,
            row.avg_loc,
            pct1(Some(row.hallucination_rate)),
            row.avg_clarify,
            row.submit_rate * 100.0,
            pct1(row.visual_bug_rate),
        ));
    }
    out.push_str("\n## Interaction\n\n");
    out.push_str("| Model | Avg. Steps | VCI | IAS | CHR (%) |\n");
    out.push_str("|---|---|---|---|---|\n");
    for row in &tables.interaction {
        out.push_str(&format!(
            "| {} | {:.2} | {} | {} | {} |\n",
            row.model,
            row.avg_steps,
            num(row.mean_vci, 2),
            num(row.mean_ias, 2),
            pct1(row.chr),
        ));
    }
    out
}

/// CSV forms of the completion and behavior tables, in the same column
/// order as the Markdown rendering. Absent cells are empty.
pub fn render_csv(tables: &ReportTables) -> (String, String) {
    let blank = |v: String| if v == "-" { String::new() } else { v };
    let mut tcr = String::from("Model,Easy,Middle,Hard,P-MIN,P-RAM,P-INT,P-CON,TCR,Hallu. Rate\n");
    for row in &tables.tcr {
        tcr.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            row.model,
            blank(pct2(row.easy)),
            blank(pct2(row.middle)),
            blank(pct2(row.hard)),
            blank(pct2(row.p_min)),
            blank(pct2(row.p_ram)),
            blank(pct2(row.p_int)),
            blank(pct2(row.p_con)),
            blank(pct2(row.overall)),
            blank(pct1(row.hallucination_rate)),
        ));
    }
    let mut behavior = String::from("Model,Avg. LoC,HR (%),# Clarify,SR (%),VBR (%)\n");
    for row in &tables.behavior {
        behavior.push_str(&format!(
            "{},{:.1},{},{:.2},{:.1},{}\n",
            row.model,
            row.avg_loc,
            blank(pct1(Some(row.hallucination_rate))),
            row.avg_clarify,
            row.submit_rate * 100.0,
            blank(pct1(row.visual_bug_rate)),
        ));
    }
    (tcr, behavior)
}
