//! Post-hoc transcript auditing.
//!
//! [`replay_verify`] re-checks a transcript against a game spec without
//! needing the original policies: sequence gaplessness, turn eligibility of
//! every originator, observer-set agreement with the observability rule,
//! action-space membership, Nature-response recomputation, and verdict
//! recomputation. [`verify_with_rerun`] additionally re-executes the run
//! with the given policies and compares the regenerated transcript byte for
//! byte, which catches mutations that are structurally silent (for example
//! an edited utterance payload in a free-chat setting).

use serde::Serialize;

use crate::action::{Action, ActionToken};

use super::run::{run_game, RunOptions, Scheduling};
use super::transcript::Transcript;
use super::{GameError, GameSpec, PolicyMap, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    /// Header digest does not match the spec.
    Header,
    /// Sequence numbers are not gapless from 1.
    SeqOrder,
    /// Token originated by a player outside the roster.
    UnknownPlayer,
    /// Originator was not eligible under the turn rule.
    TurnEligibility,
    /// Action outside the originator's action space.
    SpaceMembership,
    /// Recorded observer set differs from the observability rule.
    ObserverMismatch,
    /// Recorded running verdict differs from recomputation.
    VerdictMismatch,
    /// Nature token differs from the recomputed environment response (or a
    /// response is missing or unexpected).
    NatureMismatch,
    /// Token recorded after the first positive/negative verdict.
    TokenAfterDecisive,
    /// Recorded final verdict differs from recomputation.
    FinalVerdict,
    /// Environment rejected a recorded action during replay.
    Environment,
    /// Re-executed run diverges from the recorded transcript.
    Divergence,
}

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    /// Sequence number of the offending token, when applicable.
    pub seq: Option<u64>,
    pub kind: ViolationKind,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplayReport {
    pub tokens_checked: usize,
    pub violations: Vec<Violation>,
}

impl ReplayReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

struct Auditor<'a> {
    spec: &'a GameSpec,
    violations: Vec<Violation>,
}

impl<'a> Auditor<'a> {
    fn violation(&mut self, seq: Option<u64>, kind: ViolationKind, detail: impl Into<String>) {
        self.violations.push(Violation {
            seq,
            kind,
            detail: detail.into(),
        });
    }

    fn expected_nature(
        &mut self,
        env_state: &serde_json::Value,
        observed: &[ActionToken],
    ) -> Option<Action> {
        match self.spec.nature().respond(env_state, observed) {
            Ok(response) => response,
            Err(e) => {
                self.violation(None, ViolationKind::NatureMismatch, e.to_string());
                None
            }
        }
    }
}

/// Structural audit of a transcript against a spec.
pub fn replay_verify(spec: &GameSpec, transcript: &Transcript) -> ReplayReport {
    let mut auditor = Auditor {
        spec,
        violations: Vec::new(),
    };

    if transcript.header.game != spec.digest() {
        auditor.violation(
            None,
            ViolationKind::Header,
            format!(
                "header digest {} does not match spec digest {}",
                transcript.header.game,
                spec.digest()
            ),
        );
    }

    let nature_id = spec.roster().nature().clone();
    let mut env_state = spec.environment().initial_state().clone();
    let mut history: Vec<ActionToken> = Vec::new();
    let mut nature_observed: Vec<ActionToken> = Vec::new();
    let mut expected_nature = auditor.expected_nature(&env_state, &nature_observed);
    let mut decisive: Option<Verdict> = None;
    let mut steps: u32 = 0;

    for (i, entry) in transcript.entries.iter().enumerate() {
        let seq = entry.token.seq;
        let expected_seq = i as u64 + 1;
        if seq != expected_seq {
            auditor.violation(
                Some(seq),
                ViolationKind::SeqOrder,
                format!("expected seq {expected_seq}, found {seq}"),
            );
        }
        if decisive.is_some() {
            auditor.violation(
                Some(seq),
                ViolationKind::TokenAfterDecisive,
                "token recorded after a positive/negative verdict",
            );
        }
        let originator = &entry.token.originator;
        if !spec.roster().contains(originator) {
            auditor.violation(
                Some(seq),
                ViolationKind::UnknownPlayer,
                format!("unknown player {originator}"),
            );
            history.push(entry.token.clone());
            continue;
        }

        if originator == &nature_id {
            match expected_nature.take() {
                Some(expected) if expected == entry.token.action => {}
                Some(expected) => auditor.violation(
                    Some(seq),
                    ViolationKind::NatureMismatch,
                    format!(
                        "recomputed Nature response {} differs from recorded {}",
                        serde_json::to_string(&expected).unwrap_or_default(),
                        serde_json::to_string(&entry.token.action).unwrap_or_default()
                    ),
                ),
                None => auditor.violation(
                    Some(seq),
                    ViolationKind::NatureMismatch,
                    "Nature token recorded where no response was due",
                ),
            }
        } else {
            if let Some(expected) = expected_nature.take() {
                auditor.violation(
                    Some(seq),
                    ViolationKind::NatureMismatch,
                    format!(
                        "missing Nature response {} before this token",
                        serde_json::to_string(&expected).unwrap_or_default()
                    ),
                );
            }
            let eligible = spec.eligible_players(&history);
            if !eligible.contains(originator) {
                auditor.violation(
                    Some(seq),
                    ViolationKind::TurnEligibility,
                    format!("{originator} was not eligible to act"),
                );
            }
            steps += 1;
        }

        match spec.space(originator) {
            Some(space) => match space.admits(&entry.token.action) {
                Ok(true) => {}
                Ok(false) => auditor.violation(
                    Some(seq),
                    ViolationKind::SpaceMembership,
                    format!(
                        "action {} is outside {originator}'s space",
                        serde_json::to_string(&entry.token.action).unwrap_or_default()
                    ),
                ),
                Err(e) => {
                    auditor.violation(Some(seq), ViolationKind::SpaceMembership, e.to_string())
                }
            },
            None => auditor.violation(
                Some(seq),
                ViolationKind::SpaceMembership,
                format!("no action space declared for {originator}"),
            ),
        }

        match spec.observers_of(originator, &entry.token.action.kind) {
            Ok(expected) => {
                if expected != entry.observers {
                    auditor.violation(
                        Some(seq),
                        ViolationKind::ObserverMismatch,
                        format!(
                            "recorded observers {:?} differ from rule {:?}",
                            entry.observers, expected
                        ),
                    );
                }
                if expected.contains(&nature_id) {
                    nature_observed.push(entry.token.clone());
                }
            }
            Err(e) => auditor.violation(Some(seq), ViolationKind::ObserverMismatch, e.to_string()),
        }

        history.push(entry.token.clone());
        match spec.evaluate_history(&history) {
            Ok(verdict) => {
                if verdict != entry.verdict {
                    auditor.violation(
                        Some(seq),
                        ViolationKind::VerdictMismatch,
                        format!(
                            "recomputed verdict {verdict} differs from recorded {}",
                            entry.verdict
                        ),
                    );
                }
                if spec.evaluation().codomain().is_decisive(&verdict) {
                    decisive = Some(verdict);
                }
            }
            Err(e) => {
                auditor.violation(Some(seq), ViolationKind::VerdictMismatch, e.to_string())
            }
        }

        // Environment reaction and the next expected Nature response.
        if originator != &nature_id {
            if spec.environment().accepts_action(&entry.token.action) {
                match spec.environment().step(&env_state, &entry.token.action) {
                    Ok((next, _reward)) => env_state = next,
                    Err(e) => {
                        auditor.violation(Some(seq), ViolationKind::Environment, e.to_string())
                    }
                }
            }
            if decisive.is_none() {
                expected_nature = auditor.expected_nature(&env_state, &nature_observed);
            }
        }
    }

    // Final verdict recomputation: a decisive run ends on its decisive
    // verdict; a run that used up the step cap ends on the timeout verdict;
    // a run that stopped early without a decisive verdict must have been
    // forfeited.
    let recomputed_final = match &decisive {
        Some(v) => v.clone(),
        None if steps >= transcript.header.max_steps => spec.timeout_verdict().clone(),
        None => spec.forfeit_verdict().clone(),
    };
    if recomputed_final != transcript.final_verdict {
        auditor.violation(
            None,
            ViolationKind::FinalVerdict,
            format!(
                "recomputed final verdict {recomputed_final} differs from recorded {}",
                transcript.final_verdict
            ),
        );
    }

    ReplayReport {
        tokens_checked: transcript.entries.len(),
        violations: auditor.violations,
    }
}

/// Structural audit plus deterministic re-execution.
///
/// Reruns the game with the transcript's recorded seed and step cap and
/// compares the regenerated NDJSON byte for byte. Any difference — however
/// small — is reported as a divergence at the first differing line.
pub fn verify_with_rerun(
    spec: &GameSpec,
    policies: &mut PolicyMap,
    scheduling: Scheduling,
    transcript: &Transcript,
) -> ReplayReport {
    let mut report = replay_verify(spec, transcript);
    let options = RunOptions {
        max_steps: transcript.header.max_steps,
        scheduling,
    };
    match run_game(spec, policies, options, transcript.header.seed) {
        Ok(rerun) => {
            let original = transcript.to_ndjson();
            let regenerated = rerun.to_ndjson();
            if original != regenerated {
                let line = original
                    .lines()
                    .zip(regenerated.lines())
                    .position(|(a, b)| a != b)
                    .map(|i| i + 1)
                    .unwrap_or_else(|| original.lines().count().min(regenerated.lines().count()) + 1);
                report.violations.push(Violation {
                    seq: None,
                    kind: ViolationKind::Divergence,
                    detail: format!("re-executed transcript differs at line {line}"),
                });
            }
        }
        Err(e) => report.violations.push(Violation {
            seq: None,
            kind: ViolationKind::Divergence,
            detail: format!("re-execution failed: {e}"),
        }),
    }
    report
}

impl From<GameError> for Violation {
    fn from(e: GameError) -> Self {
        Violation {
            seq: None,
            kind: ViolationKind::Divergence,
            detail: e.to_string(),
        }
    }
}
