use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// The closed set of accent classes, in class-index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Eng,
    Ara,
    Man,
}

pub const NUM_CLASSES: usize = 3;

impl Label {
    pub const ALL: [Label; NUM_CLASSES] = [Label::Eng, Label::Ara, Label::Man];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Label> {
        Self::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Eng => "ENG",
            Label::Ara => "ARA",
            Label::Man => "MAN",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "ENG" => Ok(Label::Eng),
            "ARA" => Ok(Label::Ara),
            "MAN" => Ok(Label::Man),
            other => Err(Error::UnknownLabel {
                line: 0,
                label: other.to_string(),
            }),
        }
    }
}
