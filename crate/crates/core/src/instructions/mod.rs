//! Template-based instructions for cutting tasks and the matching parser.

mod lexicon;
mod spec;
mod templates;

use rand::Rng;

pub use spec::{ratio_side, resolve_defaults, CutSpec, Direction};
pub use templates::{InstructionTemplate, Part, Pools, StateKind, TemplateSet, MIN_TEMPLATES_PER_STATE};

use crate::error::{Error, Result};
use crate::planner::{CutState, CutStyle, ObjectKind};
use templates::{normalize, StatePhrase};

/// Style as it is written at the start of an instruction.
pub fn style_phrase(style: CutStyle) -> &'static str {
    match style {
        CutStyle::Normal => "Normal Cut",
        CutStyle::Bias => "Bias cut",
        CutStyle::Guillotine => "Guillotine cut",
        CutStyle::Saw => "Saw cut",
    }
}

fn state_kind(state: &CutState) -> StateKind {
    match state {
        CutState::Ratio { .. } => StateKind::Ratio,
        CutState::Middle => StateKind::Middle,
        CutState::Split { .. } => StateKind::Split,
    }
}

fn state_phrases(pools: &Pools, state: &CutState) -> Vec<String> {
    let mut out = Vec::new();
    match *state {
        CutState::Ratio { r, .. } => {
            for phrase in &pools.ratio {
                out.extend(lexicon::ratio_forms(r).iter().map(|v| phrase.replace("{value}", v)));
            }
            if r == 0.5 {
                out.extend(pools.ratio_half.iter().cloned());
            }
        }
        CutState::Middle => out.extend(pools.middle.iter().cloned()),
        CutState::Split { k } => {
            for phrase in &pools.split_count {
                out.extend(lexicon::count_forms(k).iter().map(|c| phrase.replace("{count}", c)));
            }
            // A boundary ordinal n reads back as max(3, n + 1) pieces.
            if k >= 3 {
                if let Some(word) = lexicon::ordinal(k - 1) {
                    out.extend(pools.split_boundary.iter().map(|p| p.replace("{ordinal}", word)));
                }
            }
        }
    }
    out
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(first) => first.to_uppercase().collect::<String>() + c.as_str(),
        None => String::new(),
    }
}

/// Every instruction the bundled templates can produce for `spec`, in a fixed order.
pub fn enumerate_instructions(spec: &CutSpec) -> Result<Vec<String>> {
    enumerate_with(TemplateSet::builtin(), spec)
}

pub fn enumerate_with(set: &TemplateSet, spec: &CutSpec) -> Result<Vec<String>> {
    let resolved = resolve_defaults(spec)?;
    let (style, state) = (resolved.style.unwrap(), resolved.state.unwrap());
    state.validate()?;
    if !ObjectKind::FOODS.contains(&spec.object) {
        return Err(Error::Coverage(format!("object '{}' has no vocabulary", spec.object.name())));
    }
    if let CutState::Ratio { side, .. } = state {
        if side != ratio_side(spec.direction) {
            return Err(Error::Coverage(format!(
                "a ratio measured from the {side:?} side cannot be phrased with direction {:?}",
                spec.direction
            )));
        }
    }
    let states = state_phrases(&set.pools, &state);
    let directions: Vec<String> = match spec.direction {
        Some(d) => set.pools.direction(d).to_vec(),
        None => vec![String::new()],
    };
    let mut out = Vec::new();
    for t in &set.templates {
        if !t.has(&Part::Style) && style != CutStyle::Normal {
            continue;
        }
        if !t.serves(state_kind(&state)) || t.has(&Part::Direction) != spec.direction.is_some() {
            continue;
        }
        let state_options: Vec<&str> = if t.has(&Part::State) {
            states.iter().map(String::as_str).collect()
        } else {
            vec![""]
        };
        for s in &state_options {
            for d in &directions {
                let mut text = String::new();
                for part in &t.parts {
                    match part {
                        Part::Text(x) => text.push_str(x),
                        Part::Style => text.push_str(style_phrase(style)),
                        Part::Object => text.push_str(spec.object.name()),
                        Part::State => text.push_str(s),
                        Part::Direction => text.push_str(d),
                    }
                }
                out.push(capitalize(&text));
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Coverage(resolved.to_string()));
    }
    Ok(out)
}

/// One instruction for `spec`, drawn uniformly over templates and lexical variants.
pub fn generate_instruction<R: Rng + ?Sized>(spec: &CutSpec, rng: &mut R) -> Result<String> {
    let all = enumerate_instructions(spec)?;
    Ok(all[rng.gen_range(0..all.len())].clone())
}

fn decode_state(set: &TemplateSet, text: &str, direction: Option<Direction>) -> Option<CutState> {
    for (re, kind) in &set.decoders {
        let Some(caps) = re.captures(text) else { continue };
        let n = caps.name("n").map(|m| m.as_str());
        let state = match kind {
            StatePhrase::Ratio => CutState::Ratio {
                r: lexicon::parse_ratio(n?)?,
                side: ratio_side(direction),
            },
            StatePhrase::Half => CutState::Ratio {
                r: 0.5,
                side: ratio_side(direction),
            },
            StatePhrase::Middle => CutState::Middle,
            StatePhrase::Count => CutState::Split {
                k: lexicon::parse_count(n?)?,
            },
            StatePhrase::Boundary => CutState::Split {
                k: (lexicon::parse_ordinal(n?)? + 1).max(3),
            },
        };
        if state.validate().is_ok() {
            return Some(state);
        }
    }
    None
}

/// Reads an instruction back into a specification without applying defaults.
pub fn parse_raw(text: &str) -> Result<CutSpec> {
    parse_raw_with(TemplateSet::builtin(), text)
}

pub fn parse_raw_with(set: &TemplateSet, text: &str) -> Result<CutSpec> {
    let norm = normalize(text);
    for t in &set.templates {
        let Some(caps) = t.regex.captures(&norm) else { continue };
        let object = ObjectKind::from_name(&caps["object"])?;
        let style = caps
            .name("style")
            .map(|m| CutStyle::from_name(m.as_str().trim_end_matches(" cut")))
            .transpose()?;
        let direction = caps.name("direction").and_then(|m| {
            Direction::ALL
                .into_iter()
                .find(|d| set.pools.direction(*d).iter().any(|p| normalize(p) == m.as_str()))
        });
        let state = match caps.name("state") {
            Some(m) => match decode_state(set, m.as_str(), direction) {
                Some(s) => Some(s),
                None => continue,
            },
            None => None,
        };
        return Ok(CutSpec {
            object,
            style,
            state,
            direction,
        });
    }
    Err(unparsed_span(set, text))
}

/// Parses an instruction and fills in the default style or state.
pub fn parse_instruction(text: &str) -> Result<CutSpec> {
    resolve_defaults(&parse_raw(text)?)
}

/// Points at the first word outside the vocabulary, or the whole text if every word is known.
fn unparsed_span(set: &TemplateSet, text: &str) -> Error {
    let vocab = set.vocabulary();
    let mut offset = 0;
    for word in text.split_whitespace() {
        let word_start = offset + text[offset..].find(word).unwrap_or(0);
        offset = word_start + word.len();
        let core = word.trim_start_matches(|c: char| !c.is_alphanumeric());
        let start = word_start + (word.len() - core.len());
        let core = core.trim_end_matches(|c: char| !c.is_alphanumeric() && c != '%');
        let bare = core.to_lowercase();
        let numeric = bare.trim_end_matches('%').parse::<f64>().is_ok();
        if !bare.is_empty() && !numeric && !vocab.contains(&bare) {
            return Error::Parse {
                start,
                end: start + core.len(),
                token: core.to_string(),
            };
        }
    }
    Error::Parse {
        start: 0,
        end: text.len(),
        token: text.to_string(),
    }
}
