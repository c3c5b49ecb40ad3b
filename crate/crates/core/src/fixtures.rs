//! Reference cases shipped with the engine.
//!
//! Four scored cases (two everyday applications, two published systems),
//! three gate-only cases that are refused at phase one, and an eleven-row
//! classification corpus of published systems.

use std::collections::BTreeMap;

use chrono::{DateTime, TimeZone, Utc};

use crate::gatekeeper::{
    GateChecklist, COMPLETENESS, CONTINUITY_P2V, INFLUENCE_V2P, ISOMORPHISM, REPLICATE,
    SCOPE_SCALE_DECLARED,
};
use crate::schema::{builtin_paper_model, MaturityModel};
use crate::scorer::{Assessment, Subject};

pub const FIXTURE_NAMES: [&str; 7] = [
    "google-map",
    "tesla",
    "lu2020",
    "liu2021",
    "living-heart",
    "emma-twin",
    "monitoring-shadow",
];

/// Fixtures that pass the gate and carry weight scores.
pub const SCORED_FIXTURES: [&str; 4] = ["google-map", "tesla", "lu2020", "liu2021"];

fn at(y: i32, mo: u32, d: u32) -> DateTime<Utc> {
    Utc.with_ymd_and_hms(y, mo, d, 0, 0, 0).unwrap()
}

fn map<V: Copy>(pairs: [(&str, V); 4]) -> BTreeMap<String, V> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn build(
    model: &MaturityModel,
    name: &str,
    description: &str,
    gate: GateChecklist,
    levels: [u32; 4],
    weights: [i64; 4],
    timestamp: DateTime<Utc>,
) -> Assessment {
    Assessment {
        id: None,
        subject: Subject {
            name: name.to_owned(),
            description: Some(description.to_owned()),
        },
        model_ref: model.model_ref(),
        gate_answers: gate.answers,
        gate_notes: gate.notes,
        levels: map([
            ("Cap", levels[0]),
            ("Cor", levels[1]),
            ("Com", levels[2]),
            ("Lc", levels[3]),
        ]),
        weight_scores: map([
            ("Cap", weights[0]),
            ("Cor", weights[1]),
            ("Com", weights[2]),
            ("Lc", weights[3]),
        ]),
        rater: Some("reference".to_owned()),
        timestamp,
    }
}

fn checklist(correspondence: bool, continuity: bool, influence: bool) -> GateChecklist {
    GateChecklist::from_answers([
        (ISOMORPHISM, correspondence),
        (REPLICATE, correspondence),
        (SCOPE_SCALE_DECLARED, correspondence),
        (COMPLETENESS, correspondence),
        (CONTINUITY_P2V, continuity),
        (INFLUENCE_V2P, influence),
    ])
}

/// Placeholder levels and weights for cases that never reach scoring.
const UNSCORED_LEVELS: [u32; 4] = [1, 1, 1, 1];
const UNSCORED_WEIGHTS: [i64; 4] = [3, 3, 3, 3];

pub fn fixture(name: &str) -> Option<Assessment> {
    let model = builtin_paper_model();
    let m = &model;
    let a = match name {
        "google-map" => build(
            m,
            "Google Map",
            "Navigation app: live traffic in, routing guidance out (semi-autonomous).",
            checklist(true, true, true),
            [3, 1, 2, 3],
            [5, 3, 2, 1],
            at(2023, 6, 1),
        ),
        // Weight scores chosen to agree with the published normalized
        // weights (4/14, 3/14, 4/14, 3/14) and overall 0.69.
        "tesla" => build(
            m,
            "Tesla vehicle",
            "Engine and mechanical systems; sensor data in, over-the-air fixes out.",
            checklist(true, true, true),
            [3, 2, 2, 2],
            [4, 3, 4, 3],
            at(2023, 6, 2),
        ),
        "lu2020" => build(
            m,
            "lu2020",
            "Asset management of HVAC centrifugal pumps.",
            checklist(true, true, true),
            [2, 1, 2, 1],
            [5, 2, 4, 4],
            at(2023, 7, 1),
        ),
        "liu2021" => build(
            m,
            "liu2021",
            "Hollow glass processing line.",
            checklist(true, true, true),
            [3, 2, 2, 2],
            [4, 2, 3, 1],
            at(2023, 7, 2),
        ),
        "living-heart" => {
            let gate = checklist(true, false, false)
                .with_note(CONTINUITY_P2V, "no continuous update from the patient")
                .with_note(INFLUENCE_V2P, "no virtual-to-physical influence");
            build(
                m,
                "Living Heart",
                "Finite-element multi-physics heart simulation.",
                gate,
                UNSCORED_LEVELS,
                UNSCORED_WEIGHTS,
                at(2023, 5, 1),
            )
        }
        "emma-twin" => {
            let gate = checklist(true, false, false)
                .with_note(
                    COMPLETENESS,
                    "assumed true; coverage of the whole body unverified",
                )
                .with_note(
                    CONTINUITY_P2V,
                    "no connection once the virtual body is built",
                )
                .with_note(
                    INFLUENCE_V2P,
                    "no connection once the virtual body is built",
                );
            build(
                m,
                "Emma Twin",
                "Virtual human body built from one person's medical data.",
                gate,
                UNSCORED_LEVELS,
                UNSCORED_WEIGHTS,
                at(2023, 5, 2),
            )
        }
        "monitoring-shadow" => build(
            m,
            "Monitoring dashboard",
            "Continuously updated replica that only observes its physical counterpart.",
            checklist(true, true, false),
            UNSCORED_LEVELS,
            UNSCORED_WEIGHTS,
            at(2023, 5, 3),
        ),
        _ => return None,
    };
    Some(a)
}

/// One row of the published-systems classification corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusCase {
    pub year: i32,
    pub key: &'static str,
    pub domain: &'static str,
    pub levels: [u32; 4],
}

pub const SCIENTIFIC_CORPUS: [CorpusCase; 11] = [
    CorpusCase {
        year: 2018,
        key: "tao2018",
        domain: "Maintenance",
        levels: [3, 1, 1, 1],
    },
    CorpusCase {
        year: 2019,
        key: "liu2019a",
        domain: "Health",
        levels: [4, 1, 1, 1],
    },
    CorpusCase {
        year: 2019,
        key: "liu2019b",
        domain: "Manufacturing",
        levels: [2, 2, 1, 1],
    },
    CorpusCase {
        year: 2020,
        key: "ivanov2020",
        domain: "Logistics",
        levels: [2, 2, 1, 1],
    },
    CorpusCase {
        year: 2020,
        key: "lu2020",
        domain: "Management",
        levels: [2, 1, 2, 1],
    },
    CorpusCase {
        year: 2020,
        key: "luo2020",
        domain: "Maintenance",
        levels: [3, 1, 2, 1],
    },
    CorpusCase {
        year: 2020,
        key: "dembski2020",
        domain: "Smart City",
        levels: [3, 2, 2, 1],
    },
    CorpusCase {
        year: 2021,
        key: "aheleroff2021",
        domain: "Maintenance",
        levels: [3, 1, 2, 1],
    },
    CorpusCase {
        year: 2021,
        key: "liu2021",
        domain: "Manufacturing",
        levels: [3, 2, 2, 2],
    },
    CorpusCase {
        year: 2019,
        key: "alves2019",
        domain: "Agriculture",
        levels: [3, 1, 2, 2],
    },
    CorpusCase {
        year: 2021,
        key: "zhang2021",
        domain: "Management",
        levels: [3, 2, 2, 1],
    },
];

/// The corpus as assessments against the built-in model. Weight scores are
/// not published for most rows, so every dimension gets the midpoint score
/// except the two rows that also appear as scored fixtures.
pub fn scientific_corpus() -> Vec<Assessment> {
    let model = builtin_paper_model();
    SCIENTIFIC_CORPUS
        .iter()
        .map(|case| {
            let weights = match case.key {
                "lu2020" => [5, 2, 4, 4],
                "liu2021" => [4, 2, 3, 1],
                _ => [3, 3, 3, 3],
            };
            build(
                &model,
                case.key,
                case.domain,
                checklist(true, true, true),
                case.levels,
                weights,
                at(case.year, 1, 1),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scorer::validate_assessment;

    #[test]
    fn every_fixture_is_valid() {
        let model = builtin_paper_model();
        for name in FIXTURE_NAMES {
            let a = fixture(name).unwrap();
            validate_assessment(&a, &model).unwrap();
        }
        assert!(fixture("nope").is_none());
    }

    #[test]
    fn corpus_overlaps_scored_fixtures() {
        let corpus = scientific_corpus();
        for name in ["lu2020", "liu2021"] {
            let row = corpus.iter().find(|a| a.subject.name == name).unwrap();
            let f = fixture(name).unwrap();
            assert_eq!(row.levels, f.levels);
            assert_eq!(row.weight_scores, f.weight_scores);
        }
    }
}
