//! Transcripts: the totally ordered record of a run.
//!
//! A transcript is serialized as UTF-8 NDJSON with a fixed line layout so
//! that determinism is byte-testable:
//!
//! - line 1: `{"game": <description digest>, "seed": N, "max_steps": N}`
//! - one line per token:
//!   `{"seq": N, "player": S, "kind": S, "payload": ..., "observers": [S], "verdict": S}`
//! - final line: `{"final_verdict": S}`
//!
//! Key order is fixed as listed, observer lists are sorted, and payload
//! object keys are emitted in sorted order.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::action::{Action, ActionToken};
use crate::player::PlayerId;

use super::Verdict;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranscriptError {
    #[error("transcript is empty")]
    Empty,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("transcript has no final verdict line")]
    MissingFinalVerdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptHeader {
    pub game: String,
    pub seed: u64,
    pub max_steps: u32,
}

/// One recorded token: the action token itself, the observer set frozen at
/// emission time, and the running verdict after this token.
#[derive(Debug, Clone, PartialEq)]
pub struct TranscriptEntry {
    pub token: ActionToken,
    pub observers: BTreeSet<PlayerId>,
    pub verdict: Verdict,
}

/// An immutable, replayable record of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub header: TranscriptHeader,
    pub entries: Vec<TranscriptEntry>,
    pub final_verdict: Verdict,
}

// Serde mirrors with the pinned field order.
#[derive(Serialize, Deserialize)]
struct TokenLine {
    seq: u64,
    player: String,
    kind: String,
    payload: Value,
    observers: Vec<String>,
    verdict: String,
}

#[derive(Serialize, Deserialize)]
struct FinalLine {
    final_verdict: String,
}

impl Transcript {
    pub fn tokens(&self) -> impl Iterator<Item = &ActionToken> {
        self.entries.iter().map(|e| &e.token)
    }

    pub fn token_vec(&self) -> Vec<ActionToken> {
        self.tokens().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Tokens originated by the given player, in order.
    pub fn tokens_by(&self, player: &PlayerId) -> Vec<&ActionToken> {
        self.tokens().filter(|t| &t.originator == player).collect()
    }

    /// Serializes the Nature subsequence of tokens (tokens only, without
    /// transcript annotations) for byte-level comparison.
    pub fn token_subsequence_bytes(&self, player: &PlayerId) -> Vec<u8> {
        let mut out = Vec::new();
        for token in self.tokens_by(player) {
            out.extend_from_slice(token.canonical_json().as_bytes());
            out.push(b'\n');
        }
        out
    }

    pub fn to_ndjson(&self) -> String {
        let mut out = String::new();
        out.push_str(&serde_json::to_string(&self.header).expect("header serialization"));
        out.push('\n');
        for entry in &self.entries {
            let line = TokenLine {
                seq: entry.token.seq,
                player: entry.token.originator.as_str().to_string(),
                kind: entry.token.action.kind.clone(),
                payload: entry.token.action.payload.clone(),
                observers: entry.observers.iter().map(|p| p.as_str().to_string()).collect(),
                verdict: entry.verdict.as_str().to_string(),
            };
            out.push_str(&serde_json::to_string(&line).expect("token serialization"));
            out.push('\n');
        }
        let last = FinalLine {
            final_verdict: self.final_verdict.as_str().to_string(),
        };
        out.push_str(&serde_json::to_string(&last).expect("final serialization"));
        out.push('\n');
        out
    }

    pub fn parse(text: &str) -> Result<Self, TranscriptError> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| !l.trim().is_empty())
            .collect();
        if lines.is_empty() {
            return Err(TranscriptError::Empty);
        }
        let (line_no, header_line) = lines[0];
        let header: TranscriptHeader =
            serde_json::from_str(header_line).map_err(|e| TranscriptError::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
        let (_, last_line) = *lines.last().ok_or(TranscriptError::Empty)?;
        let final_line: FinalLine =
            serde_json::from_str(last_line).map_err(|_| TranscriptError::MissingFinalVerdict)?;
        let mut entries = Vec::new();
        for &(line_no, line) in &lines[1..lines.len() - 1] {
            let token: TokenLine =
                serde_json::from_str(line).map_err(|e| TranscriptError::Parse {
                    line: line_no,
                    message: e.to_string(),
                })?;
            entries.push(TranscriptEntry {
                token: ActionToken::new(
                    token.seq,
                    Action::new(token.kind, token.payload),
                    PlayerId::new(token.player),
                ),
                observers: token.observers.into_iter().map(PlayerId::new).collect(),
                verdict: Verdict::new(token.verdict),
            });
        }
        Ok(Transcript {
            header,
            entries,
            final_verdict: Verdict::new(final_line.final_verdict),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn sample() -> Transcript {
        Transcript {
            header: TranscriptHeader {
                game: "abc123".into(),
                seed: 7,
                max_steps: 10,
            },
            entries: vec![
                TranscriptEntry {
                    token: ActionToken::new(1, Action::new("inform", json!(["n", "e"])), "N"),
                    observers: BTreeSet::from([PlayerId::new("N"), PlayerId::new("p1")]),
                    verdict: Verdict::new("undecided"),
                },
                TranscriptEntry {
                    token: ActionToken::new(2, Action::new("nav", "e"), "p1"),
                    observers: BTreeSet::from([PlayerId::new("N"), PlayerId::new("p1")]),
                    verdict: Verdict::new("undecided"),
                },
            ],
            final_verdict: Verdict::new("failure"),
        }
    }

    #[test]
    fn ndjson_roundtrip() {
        let t = sample();
        let text = t.to_ndjson();
        let parsed = Transcript::parse(&text).unwrap();
        assert_eq!(parsed, t);
        // serialization is stable
        assert_eq!(parsed.to_ndjson(), text);
    }

    #[test]
    fn line_layout_is_pinned() {
        let text = sample().to_ndjson();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], r#"{"game":"abc123","seed":7,"max_steps":10}"#);
        assert!(lines[1].starts_with(r#"{"seq":1,"player":"N","kind":"inform","payload":["#));
        assert_eq!(lines[3], r#"{"final_verdict":"failure"}"#);
    }

    #[test]
    fn parse_reports_line_numbers() {
        let mut text = sample().to_ndjson();
        text = text.replace(r#"{"seq":2"#, r#"{"seq":"two""#);
        let err = Transcript::parse(&text).unwrap_err();
        assert!(matches!(err, TranscriptError::Parse { line: 3, .. }));
    }

    #[test]
    fn missing_final_line_detected() {
        let t = sample();
        let text = t.to_ndjson();
        let without_final = text.rsplit_once('\n').map(|(head, _)| head).unwrap();
        let without_final = without_final.rsplit_once('\n').map(|(head, _)| head).unwrap();
        assert!(Transcript::parse(without_final).is_err());
    }

    #[test]
    fn nature_subsequence_ignores_annotations() {
        let mut a = sample();
        let mut b = sample();
        a.entries[0].verdict = Verdict::new("undecided");
        b.entries[0].verdict = Verdict::new("open");
        let n = PlayerId::new("N");
        assert_eq!(a.token_subsequence_bytes(&n), b.token_subsequence_bytes(&n));
    }
}
