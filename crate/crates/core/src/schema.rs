//! Maturity model definitions: dimensions, their ordered levels, the gate
//! checklist and the weight scale.
//!
//! Models are plain data. [`builtin_paper_model`] returns the four-axis
//! model (Capability, Cooperability, Comprehensiveness, Lifecycle); other
//! models load from JSON with [`load_model`].

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gatekeeper::{builtin_gate_items, GateItemDef};

pub const BUILTIN_MODEL_ID: &str = "dt-maturity-4d";
pub const BUILTIN_MODEL_VERSION: &str = "1.0.0";

/// Model file major version understood by this engine.
pub const SUPPORTED_MAJOR_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelDef {
    pub index: u32,
    pub code: String,
    pub name: String,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionDef {
    pub key: String,
    pub name: String,
    pub levels: Vec<LevelDef>,
}

impl DimensionDef {
    pub fn level_count(&self) -> u32 {
        self.levels.len() as u32
    }

    pub fn level(&self, index: u32) -> Option<&LevelDef> {
        self.levels.iter().find(|l| l.index == index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightScale {
    pub min: i64,
    pub max: i64,
}

impl WeightScale {
    pub fn contains(&self, score: i64) -> bool {
        (self.min..=self.max).contains(&score)
    }

    pub fn values(&self) -> impl Iterator<Item = i64> {
        self.min..=self.max
    }
}

impl Default for WeightScale {
    fn default() -> Self {
        Self { min: 1, max: 5 }
    }
}

/// Importance label for a score on the default 1..5 scale.
pub fn importance_label(score: i64) -> Option<&'static str> {
    match score {
        1 => Some("Low"),
        2 => Some("Medium-Low"),
        3 => Some("Medium"),
        4 => Some("Medium-High"),
        5 => Some("High"),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModelRef {
    pub id: String,
    pub version: String,
}

impl fmt::Display for ModelRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.id, self.version)
    }
}

impl std::str::FromStr for ModelRef {
    type Err = Error;

    /// Parses `id@version`.
    fn from_str(s: &str) -> Result<Self> {
        match s.rsplit_once('@') {
            Some((id, version)) if !id.is_empty() && !version.is_empty() => Ok(Self {
                id: id.to_owned(),
                version: version.to_owned(),
            }),
            _ => Err(Error::Domain(format!("expected `id@version`, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaturityModel {
    pub id: String,
    pub version: String,
    #[serde(default)]
    pub weight_scale: WeightScale,
    pub gate_items: Vec<GateItemDef>,
    pub dimensions: Vec<DimensionDef>,
}

impl MaturityModel {
    pub fn model_ref(&self) -> ModelRef {
        ModelRef {
            id: self.id.clone(),
            version: self.version.clone(),
        }
    }

    pub fn dimension(&self, key: &str) -> Option<&DimensionDef> {
        self.dimensions.iter().find(|d| d.key == key)
    }

    pub fn dimension_keys(&self) -> impl Iterator<Item = &str> {
        self.dimensions.iter().map(|d| d.key.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: String,
    pub path: String,
    pub message: String,
}

impl Violation {
    fn new(rule: &str, path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            rule: rule.to_owned(),
            path: path.into(),
            message: message.into(),
        }
    }
}

fn level(index: u32, code: &str, name: &str, description: &str) -> LevelDef {
    LevelDef {
        index,
        code: code.to_owned(),
        name: name.to_owned(),
        description: description.to_owned(),
    }
}

fn dimension(key: &str, name: &str, levels: Vec<LevelDef>) -> DimensionDef {
    DimensionDef {
        key: key.to_owned(),
        name: name.to_owned(),
        levels,
    }
}

/// The built-in four-dimensional digital twin maturity model.
pub fn builtin_paper_model() -> MaturityModel {
    MaturityModel {
        id: BUILTIN_MODEL_ID.to_owned(),
        version: BUILTIN_MODEL_VERSION.to_owned(),
        weight_scale: WeightScale::default(),
        gate_items: builtin_gate_items(),
        dimensions: vec![
            dimension(
                "Cap",
                "Capability",
                vec![
                    level(1, "Cap1", "Synchronous analytic",
                        "Processes live data or exercises live control only."),
                    level(2, "Cap2", "Historical and descriptive analytic",
                        "Analyses past states, e.g. root causes of earlier failures."),
                    level(3, "Cap3", "Futuristic and predictive analytic",
                        "Forecasts future states, typically with learned models."),
                    level(4, "Cap4", "Explainable analytic",
                        "Exposes the reasoning behind its analyses, forecasts and decisions."),
                ],
            ),
            dimension(
                "Cor",
                "Cooperability",
                vec![
                    level(1, "Cor1", "One-to-One",
                        "Represents one object with no links to other twins."),
                    level(2, "Cor2", "One-to-many in the same environment",
                        "Represents several related objects or processes in one operational context."),
                    level(3, "Cor3", "One-to-many in multiple domains",
                        "Represents the same kind of object across several contexts or domains."),
                ],
            ),
            dimension(
                "Com",
                "Comprehensiveness",
                vec![
                    level(1, "Com1", "Single aspect",
                        "Covers one isolated aspect of the entity."),
                    level(2, "Com2", "Multiple aspects",
                        "Covers several aspects and the interactions between them."),
                    level(3, "Com3", "Abstraction",
                        "Holistic aggregate view that can drill into any aspect on demand."),
                ],
            ),
            dimension(
                "Lc",
                "Lifecycle",
                vec![
                    level(1, "Lc1", "Single phase",
                        "Covers one of beginning, middle or end of life; not reusable elsewhere."),
                    level(2, "Lc2", "Multiple phases",
                        "Covers more than one lifecycle phase and can be reused across them."),
                    level(3, "Lc3", "Entire lifecycle",
                        "Covers beginning, middle and end of life and switches between them."),
                ],
            ),
        ],
    }
}

fn major_version(version: &str) -> Option<u64> {
    version.split('.').next()?.trim().parse().ok()
}

/// Check every model invariant. Never fails; an empty list means valid.
pub fn validate_model(model: &MaturityModel) -> Vec<Violation> {
    let mut out = Vec::new();

    if model.id.trim().is_empty() {
        out.push(Violation::new("empty-id", "id", "model id is empty"));
    }
    match major_version(&model.version) {
        Some(SUPPORTED_MAJOR_VERSION) => {}
        _ => out.push(Violation::new(
            "unsupported-version",
            "version",
            format!(
                "version {:?} is not a {}.x model",
                model.version, SUPPORTED_MAJOR_VERSION
            ),
        )),
    }

    if model.weight_scale.min < 1 {
        out.push(Violation::new(
            "weight-scale-lower-bound",
            "weight_scale.min",
            format!("lower bound {} must be at least 1", model.weight_scale.min),
        ));
    }
    if model.weight_scale.max < model.weight_scale.min {
        out.push(Violation::new(
            "weight-scale-order",
            "weight_scale",
            "max is below min",
        ));
    }

    if model.dimensions.len() < 2 {
        out.push(Violation::new(
            "min-dimensions",
            "dimensions",
            format!(
                "{} dimension(s); at least 2 required",
                model.dimensions.len()
            ),
        ));
    }

    let mut keys = HashSet::new();
    let mut codes = HashSet::new();
    for (d, dim) in model.dimensions.iter().enumerate() {
        let path = format!("dimensions[{d}]");
        if !keys.insert(dim.key.as_str()) {
            out.push(Violation::new(
                "duplicate-dimension-key",
                format!("{path}.key"),
                format!("duplicate dimension key {:?}", dim.key),
            ));
        }
        if dim.levels.len() < 2 {
            out.push(Violation::new(
                "min-levels",
                format!("{path}.levels"),
                format!(
                    "dimension {:?} has {} level(s); at least 2 required",
                    dim.key,
                    dim.levels.len()
                ),
            ));
        }

        let mut indices: Vec<u32> = dim.levels.iter().map(|l| l.index).collect();
        let listed = indices.clone();
        indices.sort_unstable();
        let expected: Vec<u32> = (1..=dim.levels.len() as u32).collect();
        if indices != expected {
            out.push(Violation::new(
                "non-contiguous-level-indices",
                format!("{path}.levels"),
                format!(
                    "non-contiguous level indices {listed:?} in dimension {:?}",
                    dim.key
                ),
            ));
        } else if listed != expected {
            out.push(Violation::new(
                "level-order",
                format!("{path}.levels"),
                format!("levels of {:?} are not listed in index order", dim.key),
            ));
        }

        for (l, lvl) in dim.levels.iter().enumerate() {
            if !codes.insert(lvl.code.as_str()) {
                out.push(Violation::new(
                    "duplicate-level-code",
                    format!("{path}.levels[{l}].code"),
                    format!("duplicate level code {:?}", lvl.code),
                ));
            }
        }
    }

    let mut gate_ids = HashSet::new();
    for (g, item) in model.gate_items.iter().enumerate() {
        if !gate_ids.insert(item.id.as_str()) {
            out.push(Violation::new(
                "duplicate-gate-item",
                format!("gate_items[{g}].id"),
                format!("duplicate gate item {:?}", item.id),
            ));
        }
    }

    out
}

/// Parse and validate a JSON model document.
pub fn load_model(document: &str) -> Result<MaturityModel> {
    let model: MaturityModel = serde_json::from_str(document)?;
    let violations = validate_model(&model);
    if violations.is_empty() {
        Ok(model)
    } else {
        Err(Error::Validation(violations))
    }
}

pub fn serialize_model(model: &MaturityModel) -> String {
    serde_json::to_string_pretty(model).expect("model serialization is infallible")
}
