//! Level normalization, capped weight normalization and the overall
//! maturity score.
//!
//! Per dimension the maturity is `n / N` (chosen level over level count).
//! Stakeholder weight scores are normalized to sum to one, with no
//! dimension allowed above the cap (one half by default); the excess is
//! handed back to the other dimensions in proportion to their scores. The
//! overall score is the weighted sum of the per-dimension maturities.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use chrono::{DateTime, Utc};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, int, ratio, Rational};
use crate::gatekeeper::{evaluate_gates, GateChecklist};
use crate::schema::{MaturityModel, ModelRef};

pub fn default_cap() -> Rational {
    ratio(1, 2)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subject {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

impl Subject {
    pub fn named(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            description: None,
        }
    }
}

/// One subject rated against one model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assessment {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub subject: Subject,
    pub model_ref: ModelRef,
    pub gate_answers: BTreeMap<String, bool>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub gate_notes: BTreeMap<String, String>,
    pub levels: BTreeMap<String, u32>,
    pub weight_scores: BTreeMap<String, i64>,
    #[serde(default)]
    pub rater: Option<String>,
    pub timestamp: DateTime<Utc>,
}

impl Assessment {
    pub fn checklist(&self) -> GateChecklist {
        GateChecklist {
            answers: self.gate_answers.clone(),
            notes: self.gate_notes.clone(),
        }
    }

    /// Human-facing label: the stored id when present, the subject name otherwise.
    pub fn label(&self) -> &str {
        self.id.as_deref().unwrap_or(&self.subject.name)
    }
}

/// Check the assessment against the invariants of `model`.
pub fn validate_assessment(a: &Assessment, model: &MaturityModel) -> Result<()> {
    if a.model_ref != model.model_ref() {
        return Err(Error::domain(format!(
            "assessment references {} but was given {}",
            a.model_ref,
            model.model_ref()
        )));
    }
    for key in a.levels.keys().chain(a.weight_scores.keys()) {
        if model.dimension(key).is_none() {
            return Err(Error::domain(format!("unknown dimension `{key}`")));
        }
    }
    for dim in &model.dimensions {
        let n = *a
            .levels
            .get(&dim.key)
            .ok_or_else(|| Error::domain(format!("no level chosen for `{}`", dim.key)))?;
        if n < 1 || n > dim.level_count() {
            return Err(Error::domain(format!(
                "level {n} out of range 1..={} for `{}`",
                dim.level_count(),
                dim.key
            )));
        }
        let w = *a
            .weight_scores
            .get(&dim.key)
            .ok_or_else(|| Error::domain(format!("no weight score for `{}`", dim.key)))?;
        if !model.weight_scale.contains(w) {
            return Err(Error::domain(format!(
                "weight score {w} outside {}..={} for `{}`",
                model.weight_scale.min, model.weight_scale.max, dim.key
            )));
        }
    }
    Ok(())
}

/// `n / N` for a 1-based level `n` out of `N`.
pub fn dimension_maturity(level: u32, level_count: u32) -> Result<Rational> {
    if level_count < 2 {
        return Err(Error::domain(format!("level count {level_count} below 2")));
    }
    if level < 1 || level > level_count {
        return Err(Error::domain(format!(
            "level {level} out of range 1..={level_count}"
        )));
    }
    Ok(ratio(level as i128, level_count as i128))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightVector {
    #[serde(with = "exact::wire_map")]
    pub weights: BTreeMap<String, Rational>,
    #[serde(with = "exact::wire")]
    pub cap: Rational,
    pub cap_applied: bool,
}

/// Normalize integer weight scores. See [`normalize_rational_weights`].
pub fn normalize_weights(scores: &BTreeMap<String, i64>, cap: Rational) -> Result<WeightVector> {
    let raw = scores
        .iter()
        .map(|(k, &w)| (k.clone(), int(w as i128)))
        .collect();
    normalize_rational_weights(&raw, cap)
}

/// Normalize positive scores so they sum to one, capping any dimension at
/// `cap` and spreading what it gives up over the uncapped dimensions in
/// proportion to their scores.
///
/// With the default cap of one half a single pass settles: only one raw
/// share can exceed one half, and once it is pinned the others share the
/// remaining half. Smaller caps may pin several dimensions; the loop below
/// repeats until no free share exceeds the cap.
pub fn normalize_rational_weights(
    scores: &BTreeMap<String, Rational>,
    cap: Rational,
) -> Result<WeightVector> {
    if scores.len() < 2 {
        return Err(Error::domain(format!(
            "{} weighted dimension(s); at least 2 required",
            scores.len()
        )));
    }
    if let Some((k, w)) = scores.iter().find(|(_, w)| **w <= Rational::zero()) {
        return Err(Error::domain(format!(
            "weight score {} for `{k}` is not positive",
            exact::to_fraction_string(w)
        )));
    }
    if cap <= Rational::zero() || cap > Rational::one() {
        return Err(Error::domain("cap must lie in (0, 1]"));
    }
    if cap * int(scores.len() as i128) < Rational::one() {
        return Err(Error::domain(format!(
            "cap {} cannot be met by {} dimensions",
            exact::to_fraction_string(&cap),
            scores.len()
        )));
    }

    let mut pinned: Vec<&String> = Vec::new();
    let share = |pinned: &[&String]| -> Rational {
        let remaining = Rational::one() - cap * int(pinned.len() as i128);
        let free_total: Rational = scores
            .iter()
            .filter(|(k, _)| !pinned.contains(k))
            .map(|(_, w)| *w)
            .sum();
        remaining / free_total
    };

    loop {
        let per_unit = share(&pinned);
        let over: Vec<&String> = scores
            .iter()
            .filter(|(k, w)| !pinned.contains(k) && **w * per_unit > cap)
            .map(|(k, _)| k)
            .collect();
        if over.is_empty() {
            break;
        }
        pinned.extend(over);
    }

    let per_unit = share(&pinned);
    let weights: BTreeMap<String, Rational> = scores
        .iter()
        .map(|(k, w)| {
            let v = if pinned.contains(&k) {
                cap
            } else {
                *w * per_unit
            };
            (k.clone(), v)
        })
        .collect();

    let total: Rational = weights.values().sum();
    if total != Rational::one() {
        return Err(Error::Consistency(format!(
            "normalized weights sum to {}",
            exact::to_fraction_string(&total)
        )));
    }

    Ok(WeightVector {
        weights,
        cap,
        cap_applied: !pinned.is_empty(),
    })
}

/// Mean of several raters' weight scores, per dimension, as exact rationals.
pub fn aggregate_weight_scores(
    ratings: &[BTreeMap<String, i64>],
) -> Result<BTreeMap<String, Rational>> {
    let first = ratings
        .first()
        .ok_or_else(|| Error::domain("no ratings to aggregate"))?;
    let mut sums: BTreeMap<String, Rational> = first
        .keys()
        .map(|k| (k.clone(), Rational::zero()))
        .collect();
    for rating in ratings {
        if rating.len() != sums.len() || rating.keys().any(|k| !sums.contains_key(k)) {
            return Err(Error::domain("raters scored different dimension sets"));
        }
        for (k, w) in rating {
            *sums.get_mut(k).expect("checked above") += int(*w as i128);
        }
    }
    let n = int(ratings.len() as i128);
    Ok(sums.into_iter().map(|(k, s)| (k, s / n)).collect())
}

/// Weighted sum of maturities. Both maps must carry the same keys.
pub fn overall_score(
    maturities: &BTreeMap<String, Rational>,
    weights: &WeightVector,
) -> Result<Rational> {
    if maturities.len() != weights.weights.len()
        || maturities.keys().any(|k| !weights.weights.contains_key(k))
    {
        return Err(Error::domain(format!(
            "dimension keys differ: maturities {:?} vs weights {:?}",
            maturities.keys().collect::<Vec<_>>(),
            weights.weights.keys().collect::<Vec<_>>()
        )));
    }
    Ok(maturities
        .iter()
        .map(|(k, m)| *m * weights.weights[k])
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RoundingPolicy {
    #[default]
    Exact,
    Display2dp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionScore {
    pub key: String,
    pub level: u32,
    pub level_code: String,
    pub level_count: u32,
    #[serde(with = "exact::wire")]
    pub maturity: Rational,
    pub weight_score: i64,
    #[serde(with = "exact::wire")]
    pub normalized_weight: Rational,
}

/// Result of scoring one assessment. Dimensions follow model order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub subject: String,
    pub model_ref: ModelRef,
    pub dimensions: Vec<DimensionScore>,
    #[serde(with = "exact::wire")]
    pub overall: Rational,
    #[serde(with = "exact::wire")]
    pub cap: Rational,
    pub cap_applied: bool,
    pub rounding_policy: RoundingPolicy,
}

impl ScoreReport {
    pub fn dimension(&self, key: &str) -> Option<&DimensionScore> {
        self.dimensions.iter().find(|d| d.key == key)
    }

    pub fn render_value(&self, value: &Rational) -> String {
        match self.rounding_policy {
            RoundingPolicy::Exact => format!(
                "{} ({})",
                exact::to_fraction_string(value),
                exact::exact_decimal(value)
            ),
            RoundingPolicy::Display2dp => exact::display_2dp(value),
        }
    }

    /// Plain-text table for terminals.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "subject: {}", self.subject);
        let _ = writeln!(out, "model:   {}", self.model_ref);
        let _ = writeln!(
            out,
            "{:<6} {:<6} {:<28} {:>6} {:<28}",
            "dim", "level", "maturity", "weight", "normalized weight"
        );
        for d in &self.dimensions {
            let _ = writeln!(
                out,
                "{:<6} {:<6} {:<28} {:>6} {:<28}",
                d.key,
                d.level_code,
                self.render_value(&d.maturity),
                d.weight_score,
                self.render_value(&d.normalized_weight)
            );
        }
        if self.cap_applied {
            let _ = writeln!(
                out,
                "cap {} applied to normalized weights",
                exact::to_fraction_string(&self.cap)
            );
        }
        let _ = writeln!(out, "L_DT: {}", self.render_value(&self.overall));
        out
    }
}

/// Score with the default cap.
pub fn score_assessment(
    a: &Assessment,
    model: &MaturityModel,
    policy: RoundingPolicy,
) -> Result<ScoreReport> {
    score_assessment_with_cap(a, model, policy, default_cap())
}

/// Gate, classify and score one assessment. Subjects refused at the gate
/// are not scored.
pub fn score_assessment_with_cap(
    a: &Assessment,
    model: &MaturityModel,
    policy: RoundingPolicy,
    cap: Rational,
) -> Result<ScoreReport> {
    validate_assessment(a, model)?;
    let verdict = evaluate_gates(&a.checklist(), model)?;
    if !verdict.passed {
        return Err(Error::GateRefusal(Box::new(verdict)));
    }

    let weights = normalize_weights(&a.weight_scores, cap)?;
    let mut maturities = BTreeMap::new();
    let mut dimensions = Vec::with_capacity(model.dimensions.len());
    for dim in &model.dimensions {
        let level = a.levels[&dim.key];
        let maturity = dimension_maturity(level, dim.level_count())?;
        maturities.insert(dim.key.clone(), maturity);
        dimensions.push(DimensionScore {
            key: dim.key.clone(),
            level,
            level_code: dim
                .level(level)
                .map(|l| l.code.clone())
                .unwrap_or_else(|| format!("{}{level}", dim.key)),
            level_count: dim.level_count(),
            maturity,
            weight_score: a.weight_scores[&dim.key],
            normalized_weight: weights.weights[&dim.key],
        });
    }
    let overall = overall_score(&maturities, &weights)?;

    Ok(ScoreReport {
        subject: a.subject.name.clone(),
        model_ref: model.model_ref(),
        dimensions,
        overall,
        cap,
        cap_applied: weights.cap_applied,
        rounding_policy: policy,
    })
}
