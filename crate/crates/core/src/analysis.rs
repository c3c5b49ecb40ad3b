//! Interpreting scores: weight-vs-maturity quadrants, side-by-side
//! comparison of several subjects, and what-if recomputation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::batch::{map_ordered, Execution};
use crate::error::{Error, Result};
use crate::exact::{self, ratio, Rational};
use crate::schema::{MaturityModel, ModelRef};
use crate::scorer::{score_assessment, Assessment, RoundingPolicy, ScoreReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuadrantLabel {
    /// High weight, low maturity.
    DevelopmentFocus,
    /// Low weight, high maturity.
    ReallocationCandidate,
    #[serde(rename = "Aligned-Strong")]
    AlignedStrong,
    #[serde(rename = "Aligned-Low")]
    AlignedLow,
}

impl QuadrantLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            QuadrantLabel::DevelopmentFocus => "DevelopmentFocus",
            QuadrantLabel::ReallocationCandidate => "ReallocationCandidate",
            QuadrantLabel::AlignedStrong => "Aligned-Strong",
            QuadrantLabel::AlignedLow => "Aligned-Low",
        }
    }

    /// Values on a boundary count as high.
    pub fn classify(weight: &Rational, maturity: &Rational, bounds: &QuadrantBoundaries) -> Self {
        let high_weight = *weight >= bounds.weight;
        let high_maturity = *maturity >= bounds.maturity;
        match (high_weight, high_maturity) {
            (true, false) => QuadrantLabel::DevelopmentFocus,
            (false, true) => QuadrantLabel::ReallocationCandidate,
            (true, true) => QuadrantLabel::AlignedStrong,
            (false, false) => QuadrantLabel::AlignedLow,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadrantBoundaries {
    #[serde(with = "exact::wire")]
    pub weight: Rational,
    #[serde(with = "exact::wire")]
    pub maturity: Rational,
}

impl QuadrantBoundaries {
    /// Equal share `1/k` for weights, one half for maturity.
    pub fn equal_share(dimensions: usize) -> Self {
        Self {
            weight: ratio(1, dimensions.max(1) as i128),
            maturity: ratio(1, 2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionQuadrant {
    pub key: String,
    #[serde(with = "exact::wire")]
    pub normalized_weight: Rational,
    #[serde(with = "exact::wire")]
    pub maturity: Rational,
    pub label: QuadrantLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadrantReport {
    pub boundaries: QuadrantBoundaries,
    pub dimensions: Vec<DimensionQuadrant>,
}

impl QuadrantReport {
    pub fn label(&self, key: &str) -> Option<QuadrantLabel> {
        self.dimensions
            .iter()
            .find(|d| d.key == key)
            .map(|d| d.label)
    }
}

pub fn gap_quadrants(report: &ScoreReport, bounds: Option<QuadrantBoundaries>) -> QuadrantReport {
    let bounds = bounds.unwrap_or_else(|| QuadrantBoundaries::equal_share(report.dimensions.len()));
    QuadrantReport {
        boundaries: bounds,
        dimensions: report
            .dimensions
            .iter()
            .map(|d| DimensionQuadrant {
                key: d.key.clone(),
                normalized_weight: d.normalized_weight,
                maturity: d.maturity,
                label: QuadrantLabel::classify(&d.normalized_weight, &d.maturity, &bounds),
            })
            .collect(),
    }
}

/// One point of the radar / quadrant series. Field names double as the
/// CSV header.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeriesRow {
    pub subject: String,
    pub dimension: String,
    pub maturity: String,
    pub normalized_weight: String,
    pub quadrant: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankEntry {
    /// 1-based; tied subjects share the rank of the first of them.
    pub rank: usize,
    pub subject: String,
    #[serde(with = "exact::wire")]
    pub overall: Rational,
    pub tied: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubjectScore {
    pub subject: String,
    pub report: ScoreReport,
    pub quadrants: QuadrantReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub model_ref: ModelRef,
    pub subjects: Vec<SubjectScore>,
    pub ranking: Vec<RankEntry>,
}

impl ComparisonReport {
    pub fn series(&self) -> Vec<SeriesRow> {
        self.subjects
            .iter()
            .flat_map(|s| {
                s.quadrants.dimensions.iter().map(move |d| SeriesRow {
                    subject: s.subject.clone(),
                    dimension: d.key.clone(),
                    maturity: exact::exact_decimal(&d.maturity),
                    normalized_weight: exact::exact_decimal(&d.normalized_weight),
                    quadrant: d.label.as_str().to_owned(),
                })
            })
            .collect()
    }

    pub fn ranked_subjects(&self) -> Vec<&str> {
        self.ranking.iter().map(|r| r.subject.as_str()).collect()
    }
}

/// Compare already-scored subjects of one model. Ranking is by overall
/// score, highest first; equal scores are flagged as ties and ordered by
/// assessment timestamp.
pub fn compare(portfolio: &[(Assessment, ScoreReport)]) -> Result<ComparisonReport> {
    let first = portfolio
        .first()
        .ok_or_else(|| Error::domain("nothing to compare"))?;
    let model_ref = first.1.model_ref.clone();
    for (a, r) in portfolio {
        if a.model_ref != model_ref || r.model_ref != model_ref {
            return Err(Error::ModelMismatch(format!(
                "{} uses {}, expected {}",
                a.label(),
                a.model_ref,
                model_ref
            )));
        }
    }

    let mut order: Vec<usize> = (0..portfolio.len()).collect();
    order.sort_by(|&i, &j| {
        let (ai, ri) = &portfolio[i];
        let (aj, rj) = &portfolio[j];
        rj.overall
            .cmp(&ri.overall)
            .then(ai.timestamp.cmp(&aj.timestamp))
            .then(ai.label().cmp(aj.label()))
    });

    let mut ranking = Vec::with_capacity(order.len());
    for (pos, &i) in order.iter().enumerate() {
        let overall = portfolio[i].1.overall;
        let rank = match ranking.last() {
            Some(RankEntry {
                rank,
                overall: prev,
                ..
            }) if *prev == overall => *rank,
            _ => pos + 1,
        };
        let tied = portfolio
            .iter()
            .enumerate()
            .any(|(j, (_, r))| j != i && r.overall == overall);
        ranking.push(RankEntry {
            rank,
            subject: portfolio[i].0.label().to_owned(),
            overall,
            tied,
        });
    }

    let subjects = portfolio
        .iter()
        .map(|(a, r)| SubjectScore {
            subject: a.label().to_owned(),
            report: r.clone(),
            quadrants: gap_quadrants(r, None),
        })
        .collect();

    Ok(ComparisonReport {
        model_ref,
        subjects,
        ranking,
    })
}

/// Partial replacement of levels and weight scores.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Overrides {
    #[serde(default)]
    pub levels: BTreeMap<String, u32>,
    #[serde(default)]
    pub weight_scores: BTreeMap<String, i64>,
}

impl Overrides {
    pub fn is_empty(&self) -> bool {
        self.levels.is_empty() && self.weight_scores.is_empty()
    }

    pub fn apply(&self, base: &Assessment) -> Result<Assessment> {
        let mut merged = base.clone();
        for (k, v) in &self.levels {
            let slot = merged
                .levels
                .get_mut(k)
                .ok_or_else(|| Error::domain(format!("override for unknown dimension `{k}`")))?;
            *slot = *v;
        }
        for (k, v) in &self.weight_scores {
            let slot = merged
                .weight_scores
                .get_mut(k)
                .ok_or_else(|| Error::domain(format!("override for unknown dimension `{k}`")))?;
            *slot = *v;
        }
        Ok(merged)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhatIfDelta {
    pub base: Assessment,
    pub overrides: Overrides,
    #[serde(with = "exact::wire")]
    pub base_overall: Rational,
    pub result: ScoreReport,
    #[serde(rename = "delta_L", with = "exact::wire")]
    pub delta: Rational,
}

/// Rescore `base` with `overrides` merged in. `base` itself is untouched.
pub fn what_if(
    base: &Assessment,
    overrides: &Overrides,
    model: &MaturityModel,
) -> Result<WhatIfDelta> {
    let before = score_assessment(base, model, RoundingPolicy::Exact)?;
    let merged = overrides.apply(base)?;
    let result = score_assessment(&merged, model, RoundingPolicy::Exact)?;
    Ok(WhatIfDelta {
        base: base.clone(),
        overrides: overrides.clone(),
        base_overall: before.overall,
        delta: result.overall - before.overall,
        result,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRow {
    pub weight_score: i64,
    #[serde(with = "exact::wire")]
    pub overall: Rational,
}

/// Overall score for each weight score on the scale, varying one dimension.
pub fn sensitivity_sweep(
    base: &Assessment,
    dimension: &str,
    model: &MaturityModel,
    exec: Execution,
) -> Result<Vec<SweepRow>> {
    if model.dimension(dimension).is_none() {
        return Err(Error::domain(format!("unknown dimension `{dimension}`")));
    }
    score_assessment(base, model, RoundingPolicy::Exact)?;
    let scale: Vec<i64> = model.weight_scale.values().collect();
    map_ordered(&scale, exec, |&w| {
        let mut a = base.clone();
        a.weight_scores.insert(dimension.to_owned(), w);
        let r = score_assessment(&a, model, RoundingPolicy::Exact)?;
        Ok(SweepRow {
            weight_score: w,
            overall: r.overall,
        })
    })
    .into_iter()
    .collect()
}
