//! String identifiers for model elements.

use std::borrow::Borrow;
use std::fmt;

use serde::Serialize;

use crate::model::StageKind;

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }
    };
}

string_id!(
    /// Identifies a thimac within one model.
    ThimacId
);
string_id!(
    /// Identifies a flow or trigger arc within one model.
    ArcId
);
string_id!(EventId);
string_id!(SubdiagramId);
string_id!(ChronologyId);
string_id!(TraceId);

/// A stage inside a thimac's machine. A machine holds at most one stage of
/// each kind, so the pair is canonical.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct StageRef {
    pub thimac: ThimacId,
    pub kind: StageKind,
}

impl StageRef {
    pub fn new(thimac: impl Into<ThimacId>, kind: StageKind) -> Self {
        Self {
            thimac: thimac.into(),
            kind,
        }
    }
}

impl fmt::Display for StageRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.thimac, self.kind)
    }
}

/// True for identifiers the DSL can spell without quoting.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}
