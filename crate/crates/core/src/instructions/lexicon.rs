//! Spelled-out forms for ratios, piece counts and boundary ordinals.

const UNITS: [&str; 10] = ["one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten"];
const ORDINALS: [&str; 9] = [
    "first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth",
];

fn plural(n: usize, unit: &str) -> String {
    if n == 1 {
        format!("one {unit}")
    } else {
        format!("{} {unit}s", UNITS[n - 1])
    }
}

/// Every word form with its exact value, longest phrases first.
fn ratio_words() -> Vec<(String, f64)> {
    let mut out = Vec::new();
    for n in 1..10 {
        out.push((plural(n, "tenth"), n as f64 / 10.0));
    }
    for n in 1..4 {
        out.push((plural(n, "quarter"), n as f64 / 4.0));
    }
    out.push(("half".to_string(), 0.5));
    out.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.0.cmp(&b.0)));
    out
}

/// All renderings of `r` that read back as exactly `r`.
pub fn ratio_forms(r: f64) -> Vec<String> {
    let mut out = vec![format!("{r}")];
    let pct = (r * 100.0).round();
    if pct / 100.0 == r {
        out.push(format!("{pct}%"));
    }
    out.extend(ratio_words().into_iter().filter(|(_, v)| *v == r).map(|(w, _)| w));
    out
}

/// Regex alternation matching any ratio rendering.
pub fn ratio_regex() -> String {
    let words: Vec<String> = ratio_words().into_iter().map(|(w, _)| regex::escape(&w)).collect();
    format!(r"(?:[0-9]+%|[0-9]*\.[0-9]+|{})", words.join("|"))
}

pub fn parse_ratio(text: &str) -> Option<f64> {
    if let Some(p) = text.strip_suffix('%') {
        return p.parse::<u32>().ok().map(|p| p as f64 / 100.0);
    }
    if let Some((_, v)) = ratio_words().into_iter().find(|(w, _)| w == text) {
        return Some(v);
    }
    text.parse().ok()
}

pub fn count_forms(k: u32) -> Vec<String> {
    let mut out = vec![k.to_string()];
    if (1..=10).contains(&k) {
        out.push(UNITS[k as usize - 1].to_string());
    }
    out
}

pub fn count_regex() -> String {
    format!(r"(?:[0-9]+|{})", UNITS.join("|"))
}

pub fn parse_count(text: &str) -> Option<u32> {
    UNITS
        .iter()
        .position(|w| *w == text)
        .map(|i| i as u32 + 1)
        .or_else(|| text.parse().ok())
}

pub fn ordinal(n: u32) -> Option<&'static str> {
    ORDINALS.get((n as usize).checked_sub(1)?).copied()
}

pub fn ordinal_regex() -> String {
    format!("(?:{})", ORDINALS.join("|"))
}

pub fn parse_ordinal(text: &str) -> Option<u32> {
    ORDINALS.iter().position(|w| *w == text).map(|i| i as u32 + 1)
}

/// Words this lexicon can produce, for error reporting.
pub fn vocabulary() -> impl Iterator<Item = String> {
    ratio_words()
        .into_iter()
        .flat_map(|(w, _)| w.split(' ').map(str::to_string).collect::<Vec<_>>())
        .chain(UNITS.iter().map(|s| s.to_string()))
        .chain(ORDINALS.iter().map(|s| s.to_string()))
}
