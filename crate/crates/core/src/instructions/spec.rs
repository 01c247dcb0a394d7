use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planner::{CutState, CutStyle, ObjectKind, Side};

/// Reference direction named in an instruction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Left,
    Right,
    Top,
    Length,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::Left, Direction::Right, Direction::Top, Direction::Length];

    pub fn name(self) -> &'static str {
        match self {
            Direction::Left => "left",
            Direction::Right => "right",
            Direction::Top => "top",
            Direction::Length => "length",
        }
    }
}

/// The datum a ratio is measured from, given the instruction's direction.
pub fn ratio_side(direction: Option<Direction>) -> Side {
    match direction {
        Some(Direction::Right) => Side::Right,
        _ => Side::Left,
    }
}

/// What an instruction asks for. Style and state may be missing before defaults apply.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutSpec {
    pub object: ObjectKind,
    pub style: Option<CutStyle>,
    pub state: Option<CutState>,
    pub direction: Option<Direction>,
}

impl CutSpec {
    pub fn new(object: ObjectKind, style: CutStyle, state: CutState, direction: Option<Direction>) -> Self {
        Self {
            object,
            style: Some(style),
            state: Some(state),
            direction,
        }
    }

    pub fn is_resolved(&self) -> bool {
        self.style.is_some() && self.state.is_some()
    }
}

impl fmt::Display for CutSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} / {} / {} / {}",
            self.object.name(),
            self.style.map_or("-", CutStyle::name),
            self.state.map_or_else(|| "-".to_string(), |s| s.label()),
            self.direction.map_or("-", Direction::name)
        )
    }
}

/// Fills a missing style with Normal and a missing state with Middle.
pub fn resolve_defaults(spec: &CutSpec) -> Result<CutSpec> {
    if spec.style.is_none() && spec.state.is_none() {
        return Err(Error::Underspecified);
    }
    Ok(CutSpec {
        style: Some(spec.style.unwrap_or(CutStyle::Normal)),
        state: Some(spec.state.unwrap_or(CutState::Middle)),
        ..*spec
    })
}
