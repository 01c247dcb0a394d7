use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planner::object::ObjectKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutStyle {
    Normal,
    Bias,
    Guillotine,
    Saw,
}

impl CutStyle {
    pub const ALL: [CutStyle; 4] = [CutStyle::Normal, CutStyle::Bias, CutStyle::Guillotine, CutStyle::Saw];

    pub fn name(self) -> &'static str {
        match self {
            CutStyle::Normal => "normal",
            CutStyle::Bias => "bias",
            CutStyle::Guillotine => "guillotine",
            CutStyle::Saw => "saw",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|st| st.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Format(format!("unknown cut style '{s}'")))
    }
}

impl fmt::Display for CutStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Datum a ratio is measured from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// Where the object should end up divided.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CutState {
    /// One cut at fraction `r` of the length, measured from `side`.
    Ratio { r: f64, side: Side },
    Middle,
    /// `k` equal pieces.
    Split { k: u32 },
}

impl CutState {
    pub fn validate(&self) -> Result<()> {
        match *self {
            CutState::Ratio { r, .. } if !(r > 0.0 && r < 1.0) => {
                Err(Error::Planning(format!("ratio must lie strictly inside (0, 1), got {r}")))
            }
            CutState::Split { k } if k < 2 => Err(Error::Planning(format!("split needs k >= 2, got {k}"))),
            _ => Ok(()),
        }
    }

    /// Number of segments a successful cut produces.
    pub fn expected_segments(&self) -> usize {
        match *self {
            CutState::Split { k } => k as usize,
            _ => 2,
        }
    }

    /// The thirteen dataset states: nine ratios, the midpoint and three splits.
    pub fn dataset_states() -> Vec<CutState> {
        let mut out: Vec<CutState> = (1..=9)
            .map(|i| CutState::Ratio {
                r: i as f64 / 10.0,
                side: Side::Left,
            })
            .collect();
        out.push(CutState::Middle);
        out.extend((3..=5).map(|k| CutState::Split { k }));
        out
    }

    /// Inverse of [`CutState::label`]; a bare `ratio{r}` is measured from the left.
    pub fn from_label(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let bad = || Error::Format(format!("unknown cut state '{s}'"));
        let state = if s == "middle" {
            CutState::Middle
        } else if let Some(k) = s.strip_prefix("split") {
            CutState::Split { k: k.parse().map_err(|_| bad())? }
        } else if let Some(rest) = s.strip_prefix("ratio") {
            let (r, side) = match rest.rsplit_once('-') {
                Some((r, "left")) => (r, Side::Left),
                Some((r, "right")) => (r, Side::Right),
                Some(_) => return Err(bad()),
                None => (rest, Side::Left),
            };
            CutState::Ratio { r: r.parse().map_err(|_| bad())?, side }
        } else {
            return Err(bad());
        };
        state.validate()?;
        Ok(state)
    }

    pub fn label(&self) -> String {
        match self {
            CutState::Ratio { r, side: Side::Left } => format!("ratio{r}-left"),
            CutState::Ratio { r, side: Side::Right } => format!("ratio{r}-right"),
            CutState::Middle => "middle".into(),
            CutState::Split { k } => format!("split{k}"),
        }
    }
}

/// One cutting task: style, target state, object and approach parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CutTask {
    pub style: CutStyle,
    pub state: CutState,
    pub object: ObjectKind,
    /// Knife start height above the object top (m).
    pub height: f64,
    /// Approach speed (m/s).
    pub speed: f64,
    /// Saw oscillation frequency (Hz); ignored by other styles.
    pub saw_frequency: f64,
}

impl Default for CutTask {
    fn default() -> Self {
        Self::new(CutStyle::Normal, CutState::Middle, ObjectKind::Block)
    }
}

impl CutTask {
    pub fn new(style: CutStyle, state: CutState, object: ObjectKind) -> Self {
        Self {
            style,
            state,
            object,
            height: 0.02,
            speed: 0.5,
            saw_frequency: 4.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.state.validate()?;
        if !(self.height > 0.0) || !(self.speed > 0.0) {
            return Err(Error::Planning(format!(
                "height and speed must be positive, got {} and {}",
                self.height, self.speed
            )));
        }
        if self.style == CutStyle::Saw && !(self.saw_frequency > 0.0) {
            return Err(Error::Planning("saw frequency must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_parse_back() {
        for state in CutState::dataset_states() {
            assert_eq!(CutState::from_label(&state.label()).unwrap(), state);
        }
        let right = CutState::Ratio { r: 0.3, side: Side::Right };
        assert_eq!(CutState::from_label(&right.label()).unwrap(), right);
        assert_eq!(CutState::from_label("ratio0.25").unwrap(), CutState::Ratio { r: 0.25, side: Side::Left });
        assert!(CutState::from_label("split1").is_err());
        assert!(CutState::from_label("ratio0.3-up").is_err());
        assert!(CutState::from_label("quarter").is_err());
    }

    #[test]
    fn thirteen_dataset_states() {
        let states = CutState::dataset_states();
        assert_eq!(states.len(), 13);
        assert!(states.iter().all(|s| s.validate().is_ok()));
    }

    #[test]
    fn invalid_states() {
        assert!(CutState::Ratio { r: 1.0, side: Side::Left }.validate().is_err());
        assert!(CutState::Ratio { r: 0.0, side: Side::Right }.validate().is_err());
        assert!(CutState::Split { k: 1 }.validate().is_err());
    }

    #[test]
    fn style_names_round_trip() {
        for s in CutStyle::ALL {
            assert_eq!(CutStyle::from_name(s.name()).unwrap(), s);
        }
        assert!(CutStyle::from_name("chop").is_err());
    }
}
