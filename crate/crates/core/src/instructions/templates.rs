use std::collections::BTreeMap;

use regex::Regex;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::instructions::lexicon;
use crate::instructions::spec::Direction;

/// Minimum number of templates that must serve each state kind.
pub const MIN_TEMPLATES_PER_STATE: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    Ratio,
    Middle,
    Split,
}

impl StateKind {
    pub const ALL: [StateKind; 3] = [StateKind::Ratio, StateKind::Middle, StateKind::Split];
}

#[derive(Debug, Deserialize)]
struct RawTemplate {
    pattern: String,
    #[serde(default)]
    states: Option<Vec<StateKind>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDirections {
    left: Vec<String>,
    right: Vec<String>,
    top: Vec<String>,
    length: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPools {
    ratio: Vec<String>,
    ratio_half: Vec<String>,
    middle: Vec<String>,
    split_count: Vec<String>,
    split_boundary: Vec<String>,
    direction: RawDirections,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    template: Vec<RawTemplate>,
    pools: RawPools,
}

/// Piece of a template pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Part {
    Text(String),
    Style,
    Object,
    State,
    Direction,
}

#[derive(Clone, Debug)]
pub struct InstructionTemplate {
    pub pattern: String,
    pub parts: Vec<Part>,
    /// State kinds this template serves; only meaningful when it has a state slot.
    pub states: Vec<StateKind>,
    pub(crate) regex: Regex,
}

impl InstructionTemplate {
    pub fn has(&self, part: &Part) -> bool {
        self.parts.contains(part)
    }

    pub fn serves(&self, kind: StateKind) -> bool {
        if self.has(&Part::State) {
            self.states.contains(&kind)
        } else {
            kind == StateKind::Middle
        }
    }
}

/// Phrase pools substituted into templates.
#[derive(Clone, Debug)]
pub struct Pools {
    pub ratio: Vec<String>,
    pub ratio_half: Vec<String>,
    pub middle: Vec<String>,
    pub split_count: Vec<String>,
    pub split_boundary: Vec<String>,
    pub direction: BTreeMap<&'static str, Vec<String>>,
}

impl Pools {
    pub fn direction(&self, d: Direction) -> &[String] {
        &self.direction[d.name()]
    }
}

/// A validated set of templates and the pools they draw from.
#[derive(Clone, Debug)]
pub struct TemplateSet {
    pub templates: Vec<InstructionTemplate>,
    pub pools: Pools,
    pub(crate) decoders: Vec<(Regex, StatePhrase)>,
}

/// How a matched state phrase turns into a cut state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum StatePhrase {
    Ratio,
    Half,
    Middle,
    Count,
    Boundary,
}

pub(crate) fn normalize(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

fn split_pattern(pattern: &str) -> Result<Vec<Part>> {
    let mut parts = Vec::new();
    let mut rest = pattern;
    while let Some(open) = rest.find('{') {
        if open > 0 {
            parts.push(Part::Text(rest[..open].to_string()));
        }
        let close = rest[open..]
            .find('}')
            .ok_or_else(|| Error::Config(format!("unclosed placeholder in template '{pattern}'")))?
            + open;
        let part = match &rest[open + 1..close] {
            "style" => Part::Style,
            "object" => Part::Object,
            "state" => Part::State,
            "direction" => Part::Direction,
            other => return Err(Error::Config(format!("unknown placeholder {{{other}}} in '{pattern}'"))),
        };
        if parts.contains(&part) {
            return Err(Error::Config(format!("repeated placeholder in '{pattern}'")));
        }
        parts.push(part);
        rest = &rest[close + 1..];
    }
    if !rest.is_empty() {
        parts.push(Part::Text(rest.to_string()));
    }
    Ok(parts)
}

fn alternation(phrases: impl IntoIterator<Item = String>) -> String {
    let mut all: Vec<String> = phrases.into_iter().collect();
    // Longer alternatives first so a prefix never shadows its extension.
    all.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
    format!("(?:{})", all.join("|"))
}

/// Expands `{value}`, `{count}` and `{ordinal}` inside a pool phrase into regex.
fn phrase_regex(phrase: &str) -> String {
    regex::escape(&normalize(phrase))
        .replace(r"\{value\}", &lexicon::ratio_regex())
        .replace(r"\{count\}", &lexicon::count_regex())
        .replace(r"\{ordinal\}", &lexicon::ordinal_regex())
}

const STYLE_REGEX: &str = "(?:normal|bias|guillotine|saw) cut";

impl TemplateSet {
    pub fn builtin() -> &'static TemplateSet {
        static SET: std::sync::OnceLock<TemplateSet> = std::sync::OnceLock::new();
        SET.get_or_init(|| {
            TemplateSet::from_toml(include_str!("templates.toml")).expect("bundled templates are valid")
        })
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawFile = toml::from_str(text).map_err(|e| Error::Config(format!("template file: {e}")))?;
        let p = raw.pools;
        let mut direction = BTreeMap::new();
        direction.insert("left", p.direction.left);
        direction.insert("right", p.direction.right);
        direction.insert("top", p.direction.top);
        direction.insert("length", p.direction.length);
        let pools = Pools {
            ratio: p.ratio,
            ratio_half: p.ratio_half,
            middle: p.middle,
            split_count: p.split_count,
            split_boundary: p.split_boundary,
            direction,
        };
        for (name, pool) in [
            ("ratio", &pools.ratio),
            ("middle", &pools.middle),
            ("split_count", &pools.split_count),
        ] {
            if pool.is_empty() {
                return Err(Error::Config(format!("pool '{name}' is empty")));
            }
        }
        for (name, pool) in &pools.direction {
            if pool.is_empty() {
                return Err(Error::Config(format!("direction pool '{name}' is empty")));
            }
        }
        for (name, pool, slot) in [
            ("ratio", &pools.ratio, Some("{value}")),
            ("ratio_half", &pools.ratio_half, None),
            ("split_count", &pools.split_count, Some("{count}")),
            ("split_boundary", &pools.split_boundary, Some("{ordinal}")),
        ] {
            for phrase in pool {
                if slot.is_some_and(|s| !phrase.contains(s)) {
                    return Err(Error::Config(format!("phrase '{phrase}' in pool '{name}' lacks {}", slot.unwrap())));
                }
            }
        }

        let state_regex = alternation(
            pools
                .ratio
                .iter()
                .chain(&pools.ratio_half)
                .chain(&pools.middle)
                .chain(&pools.split_count)
                .chain(&pools.split_boundary)
                .map(|s| phrase_regex(s)),
        );
        let direction_regex = alternation(pools.direction.values().flatten().map(|s| regex::escape(&normalize(s))));
        let object_regex = alternation(
            crate::planner::ObjectKind::FOODS
                .iter()
                .map(|k| k.name().to_string()),
        );

        let mut templates = Vec::new();
        for t in raw.template {
            let parts = split_pattern(&t.pattern)?;
            if !parts.contains(&Part::Object) {
                return Err(Error::Config(format!("template '{}' names no object", t.pattern)));
            }
            if !parts.contains(&Part::Style) && !parts.contains(&Part::State) {
                return Err(Error::Config(format!(
                    "template '{}' has neither a style nor a state slot",
                    t.pattern
                )));
            }
            let mut re = String::from("^");
            for part in &parts {
                match part {
                    Part::Text(s) => {
                        let s = s.to_lowercase();
                        re.push_str(&regex::escape(s.trim_end_matches('.')).replace(' ', r"\s+"));
                    }
                    Part::Style => re.push_str(&format!("(?P<style>{STYLE_REGEX})")),
                    Part::Object => re.push_str(&format!("(?P<object>{object_regex})")),
                    Part::State => re.push_str(&format!("(?P<state>{state_regex})")),
                    Part::Direction => re.push_str(&format!("(?P<direction>{direction_regex})")),
                }
            }
            re.push_str(r"\.?$");
            let regex = Regex::new(&re).map_err(|e| Error::Config(format!("template '{}': {e}", t.pattern)))?;
            templates.push(InstructionTemplate {
                pattern: t.pattern,
                parts,
                states: t.states.unwrap_or_else(|| StateKind::ALL.to_vec()),
                regex,
            });
        }

        for kind in StateKind::ALL {
            let n = templates.iter().filter(|t| t.has(&Part::State) && t.serves(kind)).count();
            if n < MIN_TEMPLATES_PER_STATE {
                return Err(Error::Config(format!(
                    "state {kind:?} has {n} templates, at least {MIN_TEMPLATES_PER_STATE} are required"
                )));
            }
        }
        let mut decoders = Vec::new();
        for (pool, kind) in [
            (&pools.ratio, StatePhrase::Ratio),
            (&pools.ratio_half, StatePhrase::Half),
            (&pools.middle, StatePhrase::Middle),
            (&pools.split_count, StatePhrase::Count),
            (&pools.split_boundary, StatePhrase::Boundary),
        ] {
            for phrase in pool {
                let body = regex::escape(&normalize(phrase))
                    .replace(r"\{value\}", &format!("(?P<n>{})", lexicon::ratio_regex()))
                    .replace(r"\{count\}", &format!("(?P<n>{})", lexicon::count_regex()))
                    .replace(r"\{ordinal\}", &format!("(?P<n>{})", lexicon::ordinal_regex()));
                let re = Regex::new(&format!("^{body}$")).map_err(|e| Error::Config(format!("phrase '{phrase}': {e}")))?;
                decoders.push((re, kind));
            }
        }
        Ok(Self {
            templates,
            pools,
            decoders,
        })
    }

    /// Lowercase words appearing anywhere in templates or pools.
    pub(crate) fn vocabulary(&self) -> std::collections::HashSet<String> {
        let mut words: std::collections::HashSet<String> = lexicon::vocabulary().collect();
        let mut add = |s: &str| {
            for w in s.split(|c: char| !c.is_alphanumeric() && c != '_') {
                if !w.is_empty() && !w.starts_with('{') {
                    words.insert(w.to_lowercase());
                }
            }
        };
        for t in &self.templates {
            for part in &t.parts {
                if let Part::Text(s) = part {
                    add(s);
                }
            }
        }
        let p = &self.pools;
        for s in p
            .ratio
            .iter()
            .chain(&p.ratio_half)
            .chain(&p.middle)
            .chain(&p.split_count)
            .chain(&p.split_boundary)
            .chain(p.direction.values().flatten())
        {
            add(&s.replace("{value}", "").replace("{count}", "").replace("{ordinal}", ""));
        }
        for k in crate::planner::ObjectKind::FOODS {
            words.insert(k.name().to_string());
        }
        for w in ["normal", "bias", "guillotine", "saw", "cut"] {
            words.insert(w.to_string());
        }
        words
    }
}
