//! Action kinds, action spaces, and action tokens.
//!
//! An action is a kind tag plus a payload (`(nav, "n")`, `(utt, "I don't
//! know")`). Each kind declares a payload schema: either an explicit finite
//! enumeration or a decidable predicate over values (an anchored regular
//! expression, any string, or any value). Only enumerated schemas support
//! sampling; predicate schemas may describe infinite payload sets.
//!
//! Payloads are opaque to this module: membership is decided purely by the
//! declared schema, never by interpreting payload content.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rand::Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::player::PlayerId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ActionError {
    #[error("malformed candidate action: {0}")]
    MalformedCandidate(String),
    #[error("invalid payload pattern {pattern:?}: {reason}")]
    InvalidPattern { pattern: String, reason: String },
    #[error("duplicate action kind {0:?} in space")]
    DuplicateKind(String),
}

/// Admissible payloads for one action kind.
///
/// Membership is a pure function of the payload value: repeated calls on
/// identical input always agree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum PayloadSchema {
    /// Explicit finite enumeration. The only schema form that supports
    /// sampling.
    #[serde(rename = "enum")]
    Enumerated { values: Vec<Value> },
    /// Strings fully matching an anchored regular expression. Grammars
    /// described this way may admit infinitely many payloads.
    Pattern { regex: String },
    /// Any JSON string (an unrestricted utterance grammar).
    AnyString,
    /// Any JSON value.
    Any,
}

fn compiled(pattern: &str) -> Result<Regex, ActionError> {
    static CACHE: OnceLock<Mutex<HashMap<String, Regex>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut cache = cache.lock().expect("pattern cache poisoned");
    if let Some(re) = cache.get(pattern) {
        return Ok(re.clone());
    }
    let re = Regex::new(&format!("^(?:{pattern})$")).map_err(|e| ActionError::InvalidPattern {
        pattern: pattern.to_string(),
        reason: e.to_string(),
    })?;
    cache.insert(pattern.to_string(), re.clone());
    Ok(re)
}

impl PayloadSchema {
    pub fn enumerated(values: impl IntoIterator<Item = Value>) -> Self {
        PayloadSchema::Enumerated {
            values: values.into_iter().collect(),
        }
    }

    /// Enumeration of string payloads.
    pub fn strings(values: impl IntoIterator<Item = &'static str>) -> Self {
        PayloadSchema::enumerated(values.into_iter().map(Value::from))
    }

    /// Anchored pattern schema; the regex is validated eagerly.
    pub fn pattern(regex: impl Into<String>) -> Result<Self, ActionError> {
        let regex = regex.into();
        compiled(&regex)?;
        Ok(PayloadSchema::Pattern { regex })
    }

    /// Validates the schema itself (pattern syntax).
    pub fn validate(&self) -> Result<(), ActionError> {
        match self {
            PayloadSchema::Pattern { regex } => compiled(regex).map(|_| ()),
            _ => Ok(()),
        }
    }

    /// Decidable membership test; pure and deterministic.
    pub fn admits(&self, payload: &Value) -> bool {
        match self {
            PayloadSchema::Enumerated { values } => values.contains(payload),
            PayloadSchema::Pattern { regex } => match payload.as_str() {
                Some(s) => compiled(regex).map(|re| re.is_match(s)).unwrap_or(false),
                None => false,
            },
            PayloadSchema::AnyString => payload.is_string(),
            PayloadSchema::Any => true,
        }
    }

    /// The enumerated payload set, when finite by declaration.
    pub fn enumerate(&self) -> Option<&[Value]> {
        match self {
            PayloadSchema::Enumerated { values } => Some(values),
            _ => None,
        }
    }

    /// Uniform sample from an enumerated schema; `None` otherwise.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Option<Value> {
        let values = self.enumerate()?;
        if values.is_empty() {
            return None;
        }
        Some(values[rng.random_range(0..values.len())].clone())
    }
}

/// An action kind: symbolic tag plus payload schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionKind {
    pub name: String,
    pub payloads: PayloadSchema,
}

impl ActionKind {
    pub fn new(name: impl Into<String>, payloads: PayloadSchema) -> Self {
        ActionKind {
            name: name.into(),
            payloads,
        }
    }
}

/// A concrete action: kind tag plus payload value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub kind: String,
    pub payload: Value,
}

impl Action {
    pub fn new(kind: impl Into<String>, payload: impl Into<Value>) -> Self {
        Action {
            kind: kind.into(),
            payload: payload.into(),
        }
    }
}

/// A player's space of available actions.
///
/// A space may be empty (an inert Nature, for instance). Membership is
/// decidable for every candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSpace {
    pub owner: PlayerId,
    kinds: Vec<ActionKind>,
}

impl ActionSpace {
    pub fn new(
        owner: impl Into<PlayerId>,
        kinds: impl IntoIterator<Item = ActionKind>,
    ) -> Result<Self, ActionError> {
        let kinds: Vec<ActionKind> = kinds.into_iter().collect();
        for (i, k) in kinds.iter().enumerate() {
            if kinds[..i].iter().any(|j| j.name == k.name) {
                return Err(ActionError::DuplicateKind(k.name.clone()));
            }
            k.payloads.validate()?;
        }
        Ok(ActionSpace {
            owner: owner.into(),
            kinds,
        })
    }

    pub fn empty(owner: impl Into<PlayerId>) -> Self {
        ActionSpace {
            owner: owner.into(),
            kinds: Vec::new(),
        }
    }

    pub fn kinds(&self) -> &[ActionKind] {
        &self.kinds
    }

    pub fn kind(&self, name: &str) -> Option<&ActionKind> {
        self.kinds.iter().find(|k| k.name == name)
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    /// Membership test: true iff the candidate's kind is declared in this
    /// space and its payload satisfies that kind's schema.
    ///
    /// Pure and deterministic. A candidate with an empty kind tag is
    /// malformed and reported as an error rather than a plain `false`.
    pub fn admits(&self, candidate: &Action) -> Result<bool, ActionError> {
        if candidate.kind.is_empty() {
            return Err(ActionError::MalformedCandidate("empty kind tag".into()));
        }
        Ok(match self.kind(&candidate.kind) {
            Some(k) => k.payloads.admits(&candidate.payload),
            None => false,
        })
    }

    /// Uniform sample over the space's enumerable kinds: picks a kind with
    /// at least one enumerable payload, then a payload. `None` when nothing
    /// is enumerable.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Option<Action> {
        let enumerable: Vec<&ActionKind> = self
            .kinds
            .iter()
            .filter(|k| k.payloads.enumerate().is_some_and(|v| !v.is_empty()))
            .collect();
        if enumerable.is_empty() {
            return None;
        }
        let kind = enumerable[rng.random_range(0..enumerable.len())];
        let payload = kind.payloads.sample(rng)?;
        Some(Action::new(kind.name.clone(), payload))
    }
}

/// One occurrence of an action within a transcript: the action itself, the
/// player who produced it, and its position in the global sequence.
///
/// Sequence numbers within one transcript are strictly increasing, gapless,
/// and start at 1; they give tokens a total order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionToken {
    pub seq: u64,
    pub action: Action,
    pub originator: PlayerId,
}

impl ActionToken {
    pub fn new(seq: u64, action: Action, originator: impl Into<PlayerId>) -> Self {
        debug_assert!(seq >= 1, "sequence numbers start at 1");
        ActionToken {
            seq,
            action,
            originator: originator.into(),
        }
    }

    /// Canonical byte encoding of the token itself (kind, payload,
    /// originator, seq) — transcript annotations such as observer sets or
    /// running verdicts are not part of a token.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("token serialization cannot fail")
    }
}

impl Eq for ActionToken {}

impl PartialOrd for ActionToken {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ActionToken {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.seq
            .cmp(&other.seq)
            .then_with(|| self.originator.cmp(&other.originator))
            .then_with(|| self.canonical_json().cmp(&other.canonical_json()))
    }
}
