//! Flag parsing helpers and the interactive prompt sequence for `assess`.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use twinmat_core::gatekeeper::{evaluate_gates, GateChecklist, GateVerdict};
use twinmat_core::schema::{importance_label, MaturityModel};

use crate::Failure;

/// `Cap=3,Cor=1` into a map.
pub fn key_values<T: std::str::FromStr>(
    flag: &str,
    text: &str,
) -> Result<BTreeMap<String, T>, Failure> {
    let mut out = BTreeMap::new();
    for pair in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("{flag}: expected KEY=VALUE, got `{pair}`")))?;
        let v = v
            .trim()
            .parse()
            .map_err(|_| Failure::usage(format!("{flag}: bad value in `{pair}`")))?;
        if out.insert(k.trim().to_owned(), v).is_some() {
            return Err(Failure::usage(format!("{flag}: `{k}` given twice")));
        }
    }
    Ok(out)
}

fn parse_bool(text: &str) -> Option<bool> {
    match text.trim().to_ascii_lowercase().as_str() {
        "y" | "yes" | "true" | "1" => Some(true),
        "n" | "no" | "false" | "0" => Some(false),
        _ => None,
    }
}

/// `yes`, `no`, or a list of `ITEM=yes|no`. Items may be given by full id
/// or by the part after the dot.
pub fn gate_answers(model: &MaturityModel, text: &str) -> Result<GateChecklist, Failure> {
    if let Some(all) = parse_bool(text) {
        return Ok(GateChecklist::from_answers(
            model.gate_items.iter().map(|g| (g.id.as_str(), all)),
        ));
    }
    let mut answers = BTreeMap::new();
    for pair in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("--gate: expected ITEM=yes|no, got `{pair}`")))?;
        let item = model
            .gate_items
            .iter()
            .find(|g| g.id == k || g.id.rsplit('.').next() == Some(k))
            .ok_or_else(|| Failure::usage(format!("--gate: unknown item `{k}`")))?;
        let v = parse_bool(v)
            .ok_or_else(|| Failure::usage(format!("--gate: bad answer in `{pair}`")))?;
        answers.insert(item.id.clone(), v);
    }
    Ok(GateChecklist {
        answers,
        notes: BTreeMap::new(),
    })
}

pub struct Answers {
    pub subject: String,
    pub checklist: GateChecklist,
    pub verdict: GateVerdict,
    pub levels: BTreeMap<String, u32>,
    pub weight_scores: BTreeMap<String, i64>,
}

struct Prompter<'a> {
    input: &'a mut dyn BufRead,
    out: &'a mut dyn Write,
    asked: bool,
}

impl Prompter<'_> {
    fn ask(&mut self, prompt: &str) -> Result<String, Failure> {
        self.asked = true;
        write!(self.out, "{prompt} ")?;
        self.out.flush()?;
        let mut line = String::new();
        if self.input.read_line(&mut line)? == 0 {
            return Err(Failure::usage(
                "input ended before the assessment was complete",
            ));
        }
        Ok(line.trim().to_owned())
    }

    fn ask_until<T>(
        &mut self,
        prompt: &str,
        parse: impl Fn(&str) -> Option<T>,
    ) -> Result<T, Failure> {
        loop {
            let line = self.ask(prompt)?;
            if let Some(v) = parse(&line) {
                return Ok(v);
            }
            writeln!(self.out, "  not understood, try again")?;
        }
    }
}

/// Walk gate, levels and weights in that order, skipping anything already
/// given on the command line. Stops after the gate when the subject is
/// refused.
pub fn interview(
    model: &MaturityModel,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
    subject: Option<String>,
    checklist: Option<GateChecklist>,
    mut levels: BTreeMap<String, u32>,
    mut weight_scores: BTreeMap<String, i64>,
) -> Result<Answers, Failure> {
    let mut p = Prompter {
        input,
        out,
        asked: false,
    };

    let subject = match subject {
        Some(s) => s,
        None => p.ask_until("Subject name:", |s| (!s.is_empty()).then(|| s.to_owned()))?,
    };

    let checklist = match checklist {
        Some(c) => c,
        None => {
            writeln!(p.out, "\nFundamental conditions (y/n)")?;
            let mut answers = BTreeMap::new();
            for item in &model.gate_items {
                let v =
                    p.ask_until(&format!("[{}] {}", item.condition, item.prompt), parse_bool)?;
                answers.insert(item.id.clone(), v);
            }
            GateChecklist {
                answers,
                notes: BTreeMap::new(),
            }
        }
    };
    let verdict = evaluate_gates(&checklist, model)?;
    if !verdict.passed {
        if p.asked {
            writeln!(p.out)?;
        }
        return Ok(Answers {
            subject,
            checklist,
            verdict,
            levels,
            weight_scores,
        });
    }

    for dim in &model.dimensions {
        if levels.contains_key(&dim.key) {
            continue;
        }
        writeln!(p.out, "\n{} ({})", dim.name, dim.key)?;
        for l in &dim.levels {
            writeln!(
                p.out,
                "  {}. {} {}: {}",
                l.index, l.code, l.name, l.description
            )?;
        }
        let n = dim.level_count();
        let v = p.ask_until(&format!("Level 1-{n}:"), |s| {
            s.parse::<u32>().ok().filter(|v| (1..=n).contains(v))
        })?;
        levels.insert(dim.key.clone(), v);
    }

    let scale = &model.weight_scale;
    let mut legend_shown = false;
    for dim in &model.dimensions {
        if weight_scores.contains_key(&dim.key) {
            continue;
        }
        if !legend_shown {
            writeln!(p.out, "\nImportance of each dimension")?;
            for w in scale.values() {
                match importance_label(w) {
                    Some(label) if scale.min == 1 && scale.max == 5 => {
                        writeln!(p.out, "  {w} {label}")?
                    }
                    _ => writeln!(p.out, "  {w}")?,
                }
            }
            legend_shown = true;
        }
        let v = p.ask_until(
            &format!("Weight for {} ({}-{}):", dim.key, scale.min, scale.max),
            |s| s.parse::<i64>().ok().filter(|v| scale.contains(*v)),
        )?;
        weight_scores.insert(dim.key.clone(), v);
    }

    if p.asked {
        writeln!(p.out)?;
    }
    Ok(Answers {
        subject,
        checklist,
        verdict,
        levels,
        weight_scores,
    })
}
