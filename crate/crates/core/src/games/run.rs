//! The orchestrator: runs a game to a verdict.
//!
//! One run is strictly sequential. Each scheduling step picks one eligible
//! regular player, invokes its policy with exactly the tokens it observes,
//! validates the returned action against the player's space, appends the
//! token, lets the environment react, and gives Nature the chance to
//! respond immediately after the triggering token. The evaluation rule is
//! recomputed after every appended token and the run stops at the first
//! positive or negative verdict, or at the step cap.
//!
//! Runs are fully deterministic: identical (spec, policies, limits, seed)
//! produce byte-identical transcripts.

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::action::{Action, ActionToken};
use crate::player::PlayerId;

use super::transcript::{Transcript, TranscriptEntry, TranscriptHeader};
use super::{GameError, GameSpec, PolicyMap, PolicyView, Verdict};

/// How to pick among several simultaneously eligible players.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheduling {
    /// Seeded uniform choice among the eligible set.
    #[default]
    SeededUniform,
    /// Deterministic rotation through the regular players.
    RoundRobin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub max_steps: u32,
    pub scheduling: Scheduling,
}

impl RunOptions {
    pub fn new(max_steps: u32) -> Self {
        RunOptions {
            max_steps,
            scheduling: Scheduling::default(),
        }
    }

    pub fn with_scheduling(mut self, scheduling: Scheduling) -> Self {
        self.scheduling = scheduling;
        self
    }
}

struct Runner<'a> {
    spec: &'a GameSpec,
    entries: Vec<TranscriptEntry>,
    history: Vec<ActionToken>,
    env_state: serde_json::Value,
    rng: ChaCha8Rng,
    last_scheduled: Option<PlayerId>,
}

impl<'a> Runner<'a> {
    fn new(spec: &'a GameSpec, seed: u64) -> Self {
        Runner {
            spec,
            entries: Vec::new(),
            history: Vec::new(),
            env_state: spec.environment().initial_state().clone(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            last_scheduled: None,
        }
    }

    fn observed_by(&self, player: &PlayerId) -> Vec<ActionToken> {
        self.entries
            .iter()
            .filter(|e| e.observers.contains(player))
            .map(|e| e.token.clone())
            .collect()
    }

    /// Appends a token, delivers it to its observers, and returns the
    /// recomputed running verdict.
    fn append(&mut self, action: Action, originator: PlayerId) -> Result<Verdict, GameError> {
        let seq = self.history.len() as u64 + 1;
        let observers = self.spec.observers_of(&originator, &action.kind)?;
        let token = ActionToken::new(seq, action, originator);
        self.history.push(token.clone());
        let verdict = self.spec.evaluate_history(&self.history)?;
        self.entries.push(TranscriptEntry {
            token,
            observers,
            verdict: verdict.clone(),
        });
        Ok(verdict)
    }

    /// Gives Nature the chance to respond to the current state and its
    /// observed history. Returns the running verdict if a token was
    /// emitted.
    fn nature_turn(&mut self) -> Result<Option<Verdict>, GameError> {
        let nature = self.spec.roster().nature().clone();
        let observed = self.observed_by(&nature);
        let response = self.spec.nature().respond(&self.env_state, &observed)?;
        let Some(action) = response else {
            return Ok(None);
        };
        let space = self
            .spec
            .space(&nature)
            .ok_or_else(|| GameError::MissingSpace(nature.clone()))?;
        if !space.admits(&action)? {
            return Err(GameError::NatureOutOfSpace { kind: action.kind });
        }
        Ok(Some(self.append(action, nature)?))
    }

    fn schedule(&mut self, eligible: &BTreeSet<PlayerId>, scheduling: Scheduling) -> PlayerId {
        debug_assert!(!eligible.is_empty());
        match scheduling {
            Scheduling::SeededUniform => {
                if eligible.len() == 1 {
                    eligible.first().unwrap().clone()
                } else {
                    let index = self.rng.random_range(0..eligible.len());
                    eligible.iter().nth(index).unwrap().clone()
                }
            }
            Scheduling::RoundRobin => {
                let order: Vec<&PlayerId> = self.spec.roster().regulars().collect();
                let start = match &self.last_scheduled {
                    Some(last) => order.iter().position(|p| *p == last).map(|i| i + 1).unwrap_or(0),
                    None => 0,
                };
                for offset in 0..order.len() {
                    let candidate = order[(start + offset) % order.len()];
                    if eligible.contains(candidate) {
                        return candidate.clone();
                    }
                }
                eligible.first().unwrap().clone()
            }
        }
    }

    fn partial(&self, header: TranscriptHeader) -> Transcript {
        let final_verdict = self
            .entries
            .last()
            .map(|e| e.verdict.clone())
            .unwrap_or_else(|| self.spec.timeout_verdict().clone());
        Transcript {
            header,
            entries: self.entries.clone(),
            final_verdict,
        }
    }
}

/// Runs a game under the given policy bindings.
///
/// Policy errors abort the run; an out-of-space action forfeits it (the
/// invalid token is not recorded and the configured forfeit verdict is
/// final); an empty eligible set is a deadlock.
pub fn run_game(
    spec: &GameSpec,
    policies: &mut PolicyMap,
    options: RunOptions,
    seed: u64,
) -> Result<Transcript, GameError> {
    if options.max_steps == 0 {
        return Err(GameError::ZeroStepLimit);
    }
    for player in spec.roster().regulars() {
        if !policies.contains_key(player) {
            return Err(GameError::MissingPolicy(player.clone()));
        }
    }
    let header = TranscriptHeader {
        game: spec.digest(),
        seed,
        max_steps: options.max_steps,
    };

    let mut runner = Runner::new(spec, seed);
    let regulars: BTreeSet<PlayerId> = spec.roster().regulars().cloned().collect();

    // Nature may open the game by reporting on the initial state.
    let mut last_verdict = match runner.nature_turn()? {
        Some(v) => v,
        None => spec.evaluate_history(&runner.history)?,
    };

    let mut steps: u32 = 0;
    let final_verdict = loop {
        if spec.evaluation().codomain().is_decisive(&last_verdict) {
            break last_verdict;
        }
        if steps == options.max_steps {
            break spec.timeout_verdict().clone();
        }

        let eligible: BTreeSet<PlayerId> = spec
            .eligible_players(&runner.history)
            .intersection(&regulars)
            .cloned()
            .collect();
        if eligible.is_empty() {
            return Err(GameError::Deadlock {
                step: steps,
                partial: Box::new(runner.partial(header)),
            });
        }
        let player = runner.schedule(&eligible, options.scheduling);
        runner.last_scheduled = Some(player.clone());

        let space = spec
            .space(&player)
            .ok_or_else(|| GameError::MissingSpace(player.clone()))?;
        let observed = runner.observed_by(&player);
        let view = PolicyView {
            player: &player,
            space,
            observed: &observed,
        };
        let policy = policies.get_mut(&player).expect("checked above");
        let action = match policy.act(view) {
            Ok(action) => action,
            Err(e) => {
                return Err(GameError::AbortedRun {
                    player,
                    message: e.0,
                    partial: Box::new(runner.partial(header)),
                })
            }
        };

        // Out-of-space (or malformed) actions forfeit rather than crash.
        if !space.admits(&action).unwrap_or(false) {
            break spec.forfeit_verdict().clone();
        }

        last_verdict = runner.append(action.clone(), player)?;
        steps += 1;
        if spec.evaluation().codomain().is_decisive(&last_verdict) {
            break last_verdict;
        }

        // Environment reaction, then Nature's response to it.
        if spec.environment().accepts_action(&action) {
            let (next_state, _reward) = spec.environment().step(&runner.env_state, &action)?;
            runner.env_state = next_state;
        }
        if let Some(v) = runner.nature_turn()? {
            last_verdict = v;
        }
    };

    Ok(Transcript {
        header,
        entries: runner.entries,
        final_verdict,
    })
}
