//! Phase one: the two fundamental conditions a subject must meet before it
//! is classified and scored.
//!
//! A subject answers a yes/no checklist. Four items probe correspondence
//! between the virtual and physical entity, two probe the connection between
//! them. Anything short of all-yes is refused and labelled as either a
//! digital model or a digital shadow.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::MaturityModel;

pub const ISOMORPHISM: &str = "correspondence.isomorphism";
pub const REPLICATE: &str = "correspondence.replicate";
pub const SCOPE_SCALE_DECLARED: &str = "correspondence.scope_scale_declared";
pub const COMPLETENESS: &str = "correspondence.completeness";
pub const CONTINUITY_P2V: &str = "connection.continuity_p2v";
pub const INFLUENCE_V2P: &str = "connection.influence_v2p";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateCondition {
    Correspondence,
    BidirectionalConnection,
}

impl fmt::Display for GateCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateCondition::Correspondence => "Correspondence",
            GateCondition::BidirectionalConnection => "Bidirectional connection",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateItemDef {
    pub id: String,
    pub condition: GateCondition,
    pub prompt: String,
}

impl GateItemDef {
    fn new(id: &str, condition: GateCondition, prompt: &str) -> Self {
        Self {
            id: id.to_owned(),
            condition,
            prompt: prompt.to_owned(),
        }
    }
}

/// The six-item checklist of the built-in model.
pub fn builtin_gate_items() -> Vec<GateItemDef> {
    use GateCondition::*;
    vec![
        GateItemDef::new(
            ISOMORPHISM,
            Correspondence,
            "Does the virtual model preserve the structure of relationships of the physical \
             entity (parthood of components, causality of processes)?",
        ),
        GateItemDef::new(
            REPLICATE,
            Correspondence,
            "Is the physical entity abstracted into a digital model that captures and \
             reproduces its desired information?",
        ),
        GateItemDef::new(
            SCOPE_SCALE_DECLARED,
            Correspondence,
            "Are the scope (information layers and functions) and the scale (extent of the \
             system, from component to whole) of the replica declared?",
        ),
        GateItemDef::new(
            COMPLETENESS,
            Correspondence,
            "Within the declared scope and scale, does the replica capture all applicable \
             information and relationships without omission?",
        ),
        GateItemDef::new(
            CONTINUITY_P2V,
            BidirectionalConnection,
            "Is the virtual entity continuously updated from the physical entity?",
        ),
        GateItemDef::new(
            INFLUENCE_V2P,
            BidirectionalConnection,
            "Does the virtual entity influence the physical entity, at any level of autonomy \
             from semi-autonomous to fully autonomous?",
        ),
    ]
}

/// Yes/no answers keyed by gate item id, with optional free-text notes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateChecklist {
    pub answers: BTreeMap<String, bool>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub notes: BTreeMap<String, String>,
}

impl GateChecklist {
    pub fn from_answers<'a>(answers: impl IntoIterator<Item = (&'a str, bool)>) -> Self {
        Self {
            answers: answers
                .into_iter()
                .map(|(k, v)| (k.to_owned(), v))
                .collect(),
            notes: BTreeMap::new(),
        }
    }

    /// Every item of `model` answered `true`.
    pub fn all_yes(model: &MaturityModel) -> Self {
        Self::from_answers(model.gate_items.iter().map(|g| (g.id.as_str(), true)))
    }

    pub fn with_note(mut self, item: &str, note: &str) -> Self {
        self.notes.insert(item.to_owned(), note.to_owned());
        self
    }
}

/// Ordered from weakest to strongest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Taxonomy {
    DigitalModel,
    DigitalShadow,
    DigitalTwinCandidate,
}

impl Taxonomy {
    pub fn label(self) -> &'static str {
        match self {
            Taxonomy::DigitalModel => "Digital Model",
            Taxonomy::DigitalShadow => "Digital Shadow",
            Taxonomy::DigitalTwinCandidate => "Digital Twin Candidate",
        }
    }
}

impl fmt::Display for Taxonomy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Taxonomy::DigitalModel => "DigitalModel",
            Taxonomy::DigitalShadow => "DigitalShadow",
            Taxonomy::DigitalTwinCandidate => "DigitalTwinCandidate",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateVerdict {
    pub passed: bool,
    pub taxonomy: Taxonomy,
    pub failed_items: Vec<String>,
}

impl GateVerdict {
    fn check_consistent(&self) -> Result<()> {
        if self.passed != self.failed_items.is_empty() {
            return Err(Error::Consistency(format!(
                "verdict passed={} but {} failed item(s)",
                self.passed,
                self.failed_items.len()
            )));
        }
        if self.passed != (self.taxonomy == Taxonomy::DigitalTwinCandidate) {
            return Err(Error::Consistency(format!(
                "verdict passed={} with taxonomy {}",
                self.passed, self.taxonomy
            )));
        }
        Ok(())
    }
}

/// Classify a subject from its checklist answers.
///
/// Decision order: no continuous physical-to-virtual update makes a digital
/// model; a replica that fails any correspondence item is also a digital
/// model; a corresponding, continuously updated replica without influence
/// back on the physical side is a digital shadow. Items are matched by id,
/// so custom models that omit the continuity item treat every connection
/// failure as a shadow.
pub fn evaluate_gates(checklist: &GateChecklist, model: &MaturityModel) -> Result<GateVerdict> {
    for id in checklist.answers.keys() {
        if !model.gate_items.iter().any(|g| &g.id == id) {
            return Err(Error::domain(format!(
                "answer for unknown gate item `{id}`"
            )));
        }
    }

    let mut failed_items = Vec::new();
    let mut correspondence_failed = false;
    let mut continuity_failed = false;
    let mut connection_failed = false;
    for item in &model.gate_items {
        let answer = *checklist
            .answers
            .get(&item.id)
            .ok_or_else(|| Error::IncompleteChecklist(item.id.clone()))?;
        if answer {
            continue;
        }
        failed_items.push(item.id.clone());
        match item.condition {
            GateCondition::Correspondence => correspondence_failed = true,
            GateCondition::BidirectionalConnection => {
                connection_failed = true;
                if item.id == CONTINUITY_P2V {
                    continuity_failed = true;
                }
            }
        }
    }

    let taxonomy = if continuity_failed || correspondence_failed {
        Taxonomy::DigitalModel
    } else if connection_failed {
        Taxonomy::DigitalShadow
    } else {
        Taxonomy::DigitalTwinCandidate
    };

    Ok(GateVerdict {
        passed: failed_items.is_empty(),
        taxonomy,
        failed_items,
    })
}

/// Plain-text summary of a verdict. Failed items are listed in checklist
/// order together with the condition they belong to.
pub fn gate_report(
    verdict: &GateVerdict,
    checklist: &GateChecklist,
    model: &MaturityModel,
) -> Result<String> {
    verdict.check_consistent()?;

    let mut out = String::new();
    if verdict.passed {
        let _ = writeln!(out, "PASSED: both fundamental conditions hold");
    } else {
        let _ = writeln!(out, "REFUSED: classified as {}", verdict.taxonomy.label());
    }
    let _ = writeln!(out, "taxonomy: {}", verdict.taxonomy);
    let _ = writeln!(out, "failed items: {}", verdict.failed_items.len());

    for item in &model.gate_items {
        if !verdict.failed_items.contains(&item.id) {
            continue;
        }
        let _ = write!(out, "  - {} [{}]", item.id, item.condition);
        if let Some(note) = checklist.notes.get(&item.id) {
            let _ = write!(out, " ({note})");
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::builtin_paper_model;

    fn answers(bits: u8) -> GateChecklist {
        let ids = [
            ISOMORPHISM,
            REPLICATE,
            SCOPE_SCALE_DECLARED,
            COMPLETENESS,
            CONTINUITY_P2V,
            INFLUENCE_V2P,
        ];
        GateChecklist::from_answers(
            ids.iter()
                .enumerate()
                .map(|(i, id)| (*id, bits & (1 << i) != 0)),
        )
    }

    #[test]
    fn six_items_in_order() {
        let ids: Vec<_> = builtin_gate_items().into_iter().map(|g| g.id).collect();
        assert_eq!(
            ids,
            [
                ISOMORPHISM,
                REPLICATE,
                SCOPE_SCALE_DECLARED,
                COMPLETENESS,
                CONTINUITY_P2V,
                INFLUENCE_V2P
            ]
        );
    }

    #[test]
    fn living_heart_is_a_digital_model() {
        let model = builtin_paper_model();
        let v = evaluate_gates(&answers(0b001111), &model).unwrap();
        assert!(!v.passed);
        assert_eq!(v.taxonomy, Taxonomy::DigitalModel);
        assert_eq!(v.failed_items, [CONTINUITY_P2V, INFLUENCE_V2P]);
    }

    #[test]
    fn monitoring_only_is_a_shadow() {
        let model = builtin_paper_model();
        let v = evaluate_gates(&answers(0b011111), &model).unwrap();
        assert_eq!(v.taxonomy, Taxonomy::DigitalShadow);
        assert_eq!(v.failed_items, [INFLUENCE_V2P]);
    }

    #[test]
    fn full_connection_without_correspondence_is_a_model() {
        let model = builtin_paper_model();
        let v = evaluate_gates(&answers(0b110111), &model).unwrap();
        assert_eq!(v.taxonomy, Taxonomy::DigitalModel);
        assert_eq!(v.failed_items, [COMPLETENESS]);
    }

    #[test]
    fn all_yes_passes() {
        let model = builtin_paper_model();
        let v = evaluate_gates(&GateChecklist::all_yes(&model), &model).unwrap();
        assert!(v.passed);
        assert_eq!(v.taxonomy, Taxonomy::DigitalTwinCandidate);
        assert!(v.failed_items.is_empty());
    }

    #[test]
    fn missing_answer_is_named() {
        let model = builtin_paper_model();
        let mut c = GateChecklist::all_yes(&model);
        c.answers.remove(INFLUENCE_V2P);
        match evaluate_gates(&c, &model) {
            Err(Error::IncompleteChecklist(id)) => assert_eq!(id, INFLUENCE_V2P),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_answer_is_rejected() {
        let model = builtin_paper_model();
        let mut c = GateChecklist::all_yes(&model);
        c.answers.insert("connection.telepathy".into(), true);
        assert!(matches!(evaluate_gates(&c, &model), Err(Error::Domain(_))));
    }

    #[test]
    fn report_lists_failures_in_checklist_order() {
        let model = builtin_paper_model();
        let c = answers(0b001111).with_note(CONTINUITY_P2V, "no continuous update found");
        let v = evaluate_gates(&c, &model).unwrap();
        let text = gate_report(&v, &c, &model).unwrap();
        assert!(text.starts_with("REFUSED: classified as Digital Model"));
        let cont = text.find(CONTINUITY_P2V).unwrap();
        let infl = text.find(INFLUENCE_V2P).unwrap();
        assert!(cont < infl);
        assert!(text.contains("[Bidirectional connection] (no continuous update found)"));

        let pass = GateChecklist::all_yes(&model);
        let v = evaluate_gates(&pass, &model).unwrap();
        let text = gate_report(&v, &pass, &model).unwrap();
        assert!(text.contains("PASSED"));
        assert!(text.contains("failed items: 0"));
    }

    #[test]
    fn inconsistent_verdict_is_a_defect() {
        let model = builtin_paper_model();
        let bogus = GateVerdict {
            passed: false,
            taxonomy: Taxonomy::DigitalShadow,
            failed_items: vec![],
        };
        let err = gate_report(&bogus, &GateChecklist::all_yes(&model), &model).unwrap_err();
        assert!(matches!(err, Error::Consistency(_)));
    }
}
