//! Data-parallel evaluation over many independent inputs.
//!
//! With the `parallel` feature (default) [`Execution::Parallel`] runs on the
//! rayon pool. Without it every call runs sequentially, so results never
//! depend on the feature; only wall-clock time does.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::exact::{int, Rational};
use crate::gatekeeper::GateChecklist;
use crate::schema::MaturityModel;
use crate::scorer::{
    dimension_maturity, normalize_weights, overall_score, score_assessment, Assessment,
    RoundingPolicy, ScoreReport, WeightVector,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Order-preserving map.
pub fn map_ordered<T, R, F>(items: &[T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

pub fn score_batch(
    assessments: &[Assessment],
    model: &MaturityModel,
    policy: RoundingPolicy,
    exec: Execution,
) -> Vec<Result<ScoreReport>> {
    map_ordered(assessments, exec, |a| score_assessment(a, model, policy))
}

/// Every weight-score vector on the model's scale, in odometer order with
/// the last dimension varying fastest.
pub fn weight_grid(model: &MaturityModel) -> Vec<Vec<i64>> {
    let scale: Vec<i64> = model.weight_scale.values().collect();
    let k = model.dimensions.len();
    let mut out = vec![Vec::with_capacity(k)];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                scale.iter().map(move |w| {
                    let mut next = prefix.clone();
                    next.push(*w);
                    next
                })
            })
            .collect();
    }
    out
}

/// Every level vector of the model, in odometer order.
pub fn level_grid(model: &MaturityModel) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for dim in &model.dimensions {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (1..=dim.level_count()).map(move |n| {
                    let mut next = prefix.clone();
                    next.push(n);
                    next
                })
            })
            .collect();
    }
    out
}

pub fn normalize_grid(
    model: &MaturityModel,
    cap: Rational,
    exec: Execution,
) -> Vec<Result<WeightVector>> {
    let grid = weight_grid(model);
    map_ordered(&grid, exec, |scores| {
        let named = model
            .dimension_keys()
            .zip(scores)
            .map(|(k, w)| (k.to_owned(), *w))
            .collect();
        normalize_weights(&named, cap)
    })
}

/// Range of the overall score over the full level x weight space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Landscape {
    pub evaluated: usize,
    #[serde(with = "crate::exact::wire")]
    pub min: Rational,
    #[serde(with = "crate::exact::wire")]
    pub max: Rational,
    #[serde(with = "crate::exact::wire")]
    pub mean: Rational,
}

/// Score every combination of levels and weight scores. Gate answers are
/// irrelevant here; all combinations are treated as passing subjects.
pub fn score_landscape(model: &MaturityModel, cap: Rational, exec: Execution) -> Result<Landscape> {
    let weights: Vec<WeightVector> = normalize_grid(model, cap, exec)
        .into_iter()
        .collect::<Result<_>>()?;
    let levels = level_grid(model);
    let maturities: Vec<_> = levels
        .iter()
        .map(|lv| {
            model
                .dimensions
                .iter()
                .zip(lv)
                .map(|(d, n)| Ok((d.key.clone(), dimension_maturity(*n, d.level_count())?)))
                .collect::<Result<std::collections::BTreeMap<_, _>>>()
        })
        .collect::<Result<_>>()?;

    let per_weight: Vec<Result<(Rational, Rational, Rational)>> =
        map_ordered(&weights, exec, |w| {
            let mut lo = int(1);
            let mut hi = int(0);
            let mut sum = int(0);
            for m in &maturities {
                let l = overall_score(m, w)?;
                lo = lo.min(l);
                hi = hi.max(l);
                sum += l;
            }
            Ok((lo, hi, sum))
        });

    let mut min = int(1);
    let mut max = int(0);
    let mut sum = int(0);
    for row in per_weight {
        let (lo, hi, s) = row?;
        min = min.min(lo);
        max = max.max(hi);
        sum += s;
    }
    let evaluated = weights.len() * maturities.len();
    Ok(Landscape {
        evaluated,
        min,
        max,
        mean: sum / int(evaluated as i128),
    })
}

/// Checklist with every item answered, useful for enumerating answer patterns.
pub fn checklist_from_bits(model: &MaturityModel, bits: u64) -> GateChecklist {
    GateChecklist::from_answers(
        model
            .gate_items
            .iter()
            .enumerate()
            .map(|(i, g)| (g.id.as_str(), bits & (1 << i) != 0)),
    )
}
