//! Interaction games and their orchestration.
//!
//! A game is a tuple of players (including Nature), per-player action
//! spaces, an observability rule (who sees which actions), a turn-taking
//! rule (who may act next, and who may start), an evaluation rule mapping
//! token sequences to verdicts, and a prose game description. Nature is
//! wired to an environment and relays its responses; it never consults the
//! evaluation rule.
//!
//! When the verdict set contains at least one positive and one negative
//! verdict the structure is a *game*; otherwise it is a *setting*.
//!
//! [`run_game`] executes a game deterministically and produces a
//! [`Transcript`]; [`replay_verify`] re-audits a transcript against the
//! spec after the fact.

mod replay;
mod run;
mod transcript;

pub use replay::{replay_verify, verify_with_rerun, ReplayReport, Violation, ViolationKind};
pub use run::{run_game, RunOptions, Scheduling};
pub use transcript::{Transcript, TranscriptEntry, TranscriptError, TranscriptHeader};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::action::{Action, ActionSpace, ActionToken};
use crate::player::{PlayerId, Roster};
use crate::worlds::EnvironmentSpec;

#[derive(Debug, Error)]
pub enum GameError {
    #[error("player {0} has no declared action space")]
    MissingSpace(PlayerId),
    #[error("rule references unknown player {0}")]
    UnknownPlayer(PlayerId),
    #[error("observability rule has no entry for ({player}, {kind})")]
    ObservabilityIncomplete { player: PlayerId, kind: String },
    #[error(
        "observability entry for ({player}, {kind}) omits {missing} but the rule is not declared deviant"
    )]
    ObservabilityNotDeviant {
        player: PlayerId,
        kind: String,
        missing: PlayerId,
    },
    #[error("turn rule start set is empty")]
    EmptyStartSet,
    #[error("verdict set must not be empty")]
    EmptyVerdictSet,
    #[error("verdict {0} is not in the declared verdict set")]
    VerdictOutsideCodomain(Verdict),
    #[error("no regular player is eligible after step {step}: deadlock")]
    Deadlock { step: u32, partial: Box<Transcript> },
    #[error("policy for {player} failed: {message}")]
    AbortedRun {
        player: PlayerId,
        message: String,
        partial: Box<Transcript>,
    },
    #[error("no policy bound for regular player {0}")]
    MissingPolicy(PlayerId),
    #[error("Nature produced an action outside its space: {kind}")]
    NatureOutOfSpace { kind: String },
    #[error("environment failure: {0}")]
    Environment(#[from] crate::worlds::WorldError),
    #[error("action error: {0}")]
    Action(#[from] crate::action::ActionError),
    #[error("max_steps must be at least 1")]
    ZeroStepLimit,
}

// ---------------------------------------------------------------------------
// Verdicts and evaluation
// ---------------------------------------------------------------------------

/// A verdict label from a game's declared verdict set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Verdict(String);

impl Verdict {
    pub fn new(label: impl Into<String>) -> Self {
        Verdict(label.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Verdict {
    fn from(s: &str) -> Self {
        Verdict::new(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Positive,
    Negative,
    Neutral,
}

/// The declared, finite verdict codomain with per-verdict polarity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VerdictSet {
    entries: BTreeMap<Verdict, Polarity>,
}

impl VerdictSet {
    pub fn new(entries: impl IntoIterator<Item = (Verdict, Polarity)>) -> Self {
        VerdictSet {
            entries: entries.into_iter().collect(),
        }
    }

    /// The common success / failure / undecided codomain.
    pub fn standard() -> Self {
        VerdictSet::new([
            (Verdict::new("success"), Polarity::Positive),
            (Verdict::new("failure"), Polarity::Negative),
            (Verdict::new("undecided"), Polarity::Neutral),
        ])
    }

    /// A single neutral verdict (a setting's codomain).
    pub fn single_neutral(label: &str) -> Self {
        VerdictSet::new([(Verdict::new(label), Polarity::Neutral)])
    }

    pub fn contains(&self, v: &Verdict) -> bool {
        self.entries.contains_key(v)
    }

    pub fn polarity(&self, v: &Verdict) -> Option<Polarity> {
        self.entries.get(v).copied()
    }

    pub fn is_decisive(&self, v: &Verdict) -> bool {
        matches!(
            self.entries.get(v),
            Some(Polarity::Positive) | Some(Polarity::Negative)
        )
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Verdict, Polarity)> {
        self.entries.iter().map(|(v, p)| (v, *p))
    }

    fn first_with(&self, polarity: Polarity) -> Option<&Verdict> {
        self.entries.iter().find(|(_, p)| **p == polarity).map(|(v, _)| v)
    }

    /// A verdict set qualifies a structure as a game iff it has at least
    /// one positive and at least one negative verdict.
    pub fn supports_game(&self) -> bool {
        self.entries.values().any(|p| *p == Polarity::Positive)
            && self.entries.values().any(|p| *p == Polarity::Negative)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

type EvalFn = Arc<dyn Fn(&[ActionToken]) -> Verdict + Send + Sync>;

/// The evaluation rule: a named pure function from token sequences into the
/// declared verdict set.
///
/// Evaluators may replay the (deterministic) environment to recover state
/// that the tokens imply.
#[derive(Clone)]
pub struct EvaluationRule {
    name: String,
    codomain: VerdictSet,
    eval: EvalFn,
}

impl EvaluationRule {
    pub fn new(
        name: impl Into<String>,
        codomain: VerdictSet,
        eval: impl Fn(&[ActionToken]) -> Verdict + Send + Sync + 'static,
    ) -> Self {
        EvaluationRule {
            name: name.into(),
            codomain,
            eval: Arc::new(eval),
        }
    }

    /// Constant evaluation into a single neutral verdict.
    pub fn constant(label: &str) -> Self {
        let verdict = Verdict::new(label);
        let v = verdict.clone();
        EvaluationRule::new(
            format!("constant-{label}"),
            VerdictSet::single_neutral(label),
            move |_| v.clone(),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn codomain(&self) -> &VerdictSet {
        &self.codomain
    }

    /// Evaluates a history. An evaluator producing a verdict outside the
    /// declared set is an internal error and aborts the run.
    pub fn evaluate(&self, history: &[ActionToken]) -> Result<Verdict, GameError> {
        let verdict = (self.eval)(history);
        if !self.codomain.contains(&verdict) {
            return Err(GameError::VerdictOutsideCodomain(verdict));
        }
        Ok(verdict)
    }

    /// The same rule with verdict labels renamed. Polarities and stopping
    /// behaviour are unchanged; labels missing from the mapping keep their
    /// names.
    pub fn relabeled(&self, mapping: &BTreeMap<Verdict, Verdict>) -> EvaluationRule {
        let rename = {
            let mapping = mapping.clone();
            move |v: Verdict| mapping.get(&v).cloned().unwrap_or(v)
        };
        let codomain = VerdictSet::new(
            self.codomain
                .entries()
                .map(|(v, p)| (rename.clone()(v.clone()), p)),
        );
        let inner = Arc::clone(&self.eval);
        EvaluationRule {
            name: format!("{}-relabeled", self.name),
            codomain,
            eval: Arc::new(move |history| rename.clone()(inner(history))),
        }
    }
}

impl fmt::Debug for EvaluationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EvaluationRule")
            .field("name", &self.name)
            .field("codomain", &self.codomain)
            .finish_non_exhaustive()
    }
}

/// Whether a spec describes a game (positive and negative outcomes exist)
/// or merely a setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivityClass {
    Game,
    Setting,
}

impl fmt::Display for ActivityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActivityClass::Game => f.write_str("game"),
            ActivityClass::Setting => f.write_str("setting"),
        }
    }
}

// ---------------------------------------------------------------------------
// Observability
// ---------------------------------------------------------------------------

/// The observability rule: which players observe an action of a given kind
/// by a given originator.
///
/// In the normal case every entry contains the originator and Nature; a
/// rule violating that must be declared deviant explicitly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ObservabilityRule {
    /// Every action is observed by all players.
    Broadcast,
    /// Explicit per (originator, kind) observer sets.
    Explicit {
        entries: BTreeMap<PlayerId, BTreeMap<String, BTreeSet<PlayerId>>>,
        #[serde(default)]
        deviant: bool,
    },
}

impl ObservabilityRule {
    /// Observer set for an action of `kind` by `originator`.
    ///
    /// With an explicit rule a missing entry is a configuration error; spec
    /// validation guarantees totality, so a validated game never hits it at
    /// runtime.
    pub fn observers_of(
        &self,
        roster: &Roster,
        originator: &PlayerId,
        kind: &str,
    ) -> Result<BTreeSet<PlayerId>, GameError> {
        match self {
            ObservabilityRule::Broadcast => Ok(roster.ids().cloned().collect()),
            ObservabilityRule::Explicit { entries, .. } => entries
                .get(originator)
                .and_then(|kinds| kinds.get(kind))
                .cloned()
                .ok_or_else(|| GameError::ObservabilityIncomplete {
                    player: originator.clone(),
                    kind: kind.to_string(),
                }),
        }
    }

    fn validate(
        &self,
        roster: &Roster,
        spaces: &BTreeMap<PlayerId, ActionSpace>,
    ) -> Result<(), GameError> {
        let ObservabilityRule::Explicit { entries, deviant } = self else {
            return Ok(());
        };
        for (player, kinds) in entries {
            if !roster.contains(player) {
                return Err(GameError::UnknownPlayer(player.clone()));
            }
            for observers in kinds.values() {
                for obs in observers {
                    if !roster.contains(obs) {
                        return Err(GameError::UnknownPlayer(obs.clone()));
                    }
                }
            }
        }
        // totality over every (player, kind in that player's space)
        for (player, space) in spaces {
            for kind in space.kinds() {
                let observers = entries
                    .get(player)
                    .and_then(|kinds| kinds.get(&kind.name))
                    .ok_or_else(|| GameError::ObservabilityIncomplete {
                        player: player.clone(),
                        kind: kind.name.clone(),
                    })?;
                if !deviant {
                    for required in [player, roster.nature()] {
                        if !observers.contains(required) {
                            return Err(GameError::ObservabilityNotDeviant {
                                player: player.clone(),
                                kind: kind.name.clone(),
                                missing: required.clone(),
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Turn taking
// ---------------------------------------------------------------------------

/// The turn-taking rule: who may start, and who may act next given who did
/// what last.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum TurnRule {
    /// Any regular player may act at any time.
    FreeInitiative,
    /// After a regular player's action, every other regular player may act.
    /// Nature's interleaved responses do not disturb the rotation: the rule
    /// tracks the most recent regular originator.
    StrictAlternation { start: BTreeSet<PlayerId> },
    /// Explicit next-player mapping on (last originator, last kind), with a
    /// fallback set for unmapped pairs. An empty result set is permitted
    /// and is treated as a deadlock by the orchestrator.
    Explicit {
        start: BTreeSet<PlayerId>,
        next: BTreeMap<PlayerId, BTreeMap<String, BTreeSet<PlayerId>>>,
        #[serde(default)]
        otherwise: BTreeSet<PlayerId>,
    },
}

impl TurnRule {
    /// Who may act on an empty history.
    pub fn start_set(&self, roster: &Roster) -> BTreeSet<PlayerId> {
        match self {
            TurnRule::FreeInitiative => roster.regulars().cloned().collect(),
            TurnRule::StrictAlternation { start } | TurnRule::Explicit { start, .. } => {
                start.clone()
            }
        }
    }

    /// The set of players eligible to act after the given history prefix.
    /// Empty history yields the start set; otherwise eligibility is driven
    /// by the last token. May return the empty set (deadlock).
    pub fn eligible(&self, roster: &Roster, history: &[ActionToken]) -> BTreeSet<PlayerId> {
        let Some(last) = history.last() else {
            return self.start_set(roster);
        };
        match self {
            TurnRule::FreeInitiative => roster.regulars().cloned().collect(),
            TurnRule::StrictAlternation { start } => {
                let last_regular = history
                    .iter()
                    .rev()
                    .find(|t| roster.is_regular(&t.originator))
                    .map(|t| &t.originator);
                match last_regular {
                    Some(player) => roster.regulars().filter(|p| *p != player).cloned().collect(),
                    None => start.clone(),
                }
            }
            TurnRule::Explicit { next, otherwise, .. } => next
                .get(&last.originator)
                .and_then(|kinds| kinds.get(&last.action.kind))
                .cloned()
                .unwrap_or_else(|| otherwise.clone()),
        }
    }

    fn validate(&self, roster: &Roster) -> Result<(), GameError> {
        match self {
            TurnRule::FreeInitiative => Ok(()),
            TurnRule::StrictAlternation { start } => {
                if start.is_empty() {
                    return Err(GameError::EmptyStartSet);
                }
                for p in start {
                    if !roster.contains(p) {
                        return Err(GameError::UnknownPlayer(p.clone()));
                    }
                }
                Ok(())
            }
            TurnRule::Explicit { start, next, otherwise } => {
                if start.is_empty() {
                    return Err(GameError::EmptyStartSet);
                }
                let mentioned = start
                    .iter()
                    .chain(next.keys())
                    .chain(next.values().flat_map(|k| k.values().flatten()))
                    .chain(otherwise.iter());
                for p in mentioned {
                    if !roster.contains(p) {
                        return Err(GameError::UnknownPlayer(p.clone()));
                    }
                }
                Ok(())
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Nature
// ---------------------------------------------------------------------------

type NatureFn =
    Arc<dyn Fn(&Value, &[ActionToken]) -> Result<Option<Action>, GameError> + Send + Sync>;

/// Nature's response policy.
///
/// By construction it reads only the current environment state and the
/// tokens Nature has observed — never the evaluation rule or any verdict —
/// so Nature stays disinterested in the outcome.
#[derive(Clone)]
pub struct NaturePolicy {
    name: String,
    func: NatureFn,
}

impl NaturePolicy {
    pub fn new(
        name: impl Into<String>,
        func: impl Fn(&Value, &[ActionToken]) -> Result<Option<Action>, GameError>
            + Send
            + Sync
            + 'static,
    ) -> Self {
        NaturePolicy {
            name: name.into(),
            func: Arc::new(func),
        }
    }

    /// Nature that never acts.
    pub fn inert() -> Self {
        NaturePolicy::new("inert", |_, _| Ok(None))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn respond(
        &self,
        env_state: &Value,
        observed: &[ActionToken],
    ) -> Result<Option<Action>, GameError> {
        (self.func)(env_state, observed)
    }
}

impl fmt::Debug for NaturePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NaturePolicy").field("name", &self.name).finish_non_exhaustive()
    }
}

// ---------------------------------------------------------------------------
// Policies (regular players)
// ---------------------------------------------------------------------------

/// What a policy sees when asked to act: its own id, its action space, and
/// exactly the tokens it is entitled to observe.
pub struct PolicyView<'a> {
    pub player: &'a PlayerId,
    pub space: &'a ActionSpace,
    pub observed: &'a [ActionToken],
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{0}")]
pub struct PolicyError(pub String);

impl PolicyError {
    pub fn new(message: impl Into<String>) -> Self {
        PolicyError(message.into())
    }
}

/// A regular player's decision procedure. Policies must be deterministic
/// functions of their construction parameters and the observed history for
/// runs to be reproducible.
pub trait Policy: Send {
    fn act(&mut self, view: PolicyView<'_>) -> Result<Action, PolicyError>;
}

impl<F> Policy for F
where
    F: FnMut(PolicyView<'_>) -> Result<Action, PolicyError> + Send,
{
    fn act(&mut self, view: PolicyView<'_>) -> Result<Action, PolicyError> {
        self(view)
    }
}

/// Policy bindings for a run, keyed by player id.
pub type PolicyMap = BTreeMap<PlayerId, Box<dyn Policy>>;

// ---------------------------------------------------------------------------
// GameSpec
// ---------------------------------------------------------------------------

/// Unvalidated game definition; [`GameDef::build`] checks every invariant
/// and produces a [`GameSpec`].
pub struct GameDef {
    pub name: String,
    pub description: String,
    pub roster: Roster,
    pub spaces: BTreeMap<PlayerId, ActionSpace>,
    pub observability: ObservabilityRule,
    pub turn: TurnRule,
    pub evaluation: EvaluationRule,
    pub nature: NaturePolicy,
    pub environment: EnvironmentSpec,
    /// Verdict recorded when the step cap is reached. Defaults to a
    /// negative verdict for games and a neutral one for settings.
    pub timeout_verdict: Option<Verdict>,
    /// Verdict recorded when a policy emits an out-of-space action.
    /// Defaults like `timeout_verdict`.
    pub forfeit_verdict: Option<Verdict>,
}

impl GameDef {
    pub fn build(self) -> Result<GameSpec, GameError> {
        let GameDef {
            name,
            description,
            roster,
            spaces,
            observability,
            turn,
            evaluation,
            nature,
            environment,
            timeout_verdict,
            forfeit_verdict,
        } = self;

        for id in roster.ids() {
            if !spaces.contains_key(id) {
                return Err(GameError::MissingSpace(id.clone()));
            }
        }
        for id in spaces.keys() {
            if !roster.contains(id) {
                return Err(GameError::UnknownPlayer(id.clone()));
            }
        }
        observability.validate(&roster, &spaces)?;
        turn.validate(&roster)?;
        let codomain = evaluation.codomain();
        if codomain.is_empty() {
            return Err(GameError::EmptyVerdictSet);
        }

        let default_end = |preferred: &str, polarity: Polarity| -> Verdict {
            let preferred = Verdict::new(preferred);
            if codomain.polarity(&preferred) == Some(polarity) {
                return preferred;
            }
            codomain
                .first_with(polarity)
                .or_else(|| codomain.first_with(Polarity::Neutral))
                .or_else(|| codomain.entries().next().map(|(v, _)| v))
                .expect("non-empty codomain")
                .clone()
        };
        let timeout = match timeout_verdict {
            Some(v) => {
                if !codomain.contains(&v) {
                    return Err(GameError::VerdictOutsideCodomain(v));
                }
                v
            }
            None if codomain.supports_game() => default_end("failure", Polarity::Negative),
            None => default_end("undecided", Polarity::Neutral),
        };
        let forfeit = match forfeit_verdict {
            Some(v) => {
                if !codomain.contains(&v) {
                    return Err(GameError::VerdictOutsideCodomain(v));
                }
                v
            }
            None => timeout.clone(),
        };

        Ok(GameSpec {
            name,
            description,
            roster,
            spaces,
            observability,
            turn,
            evaluation,
            nature,
            environment,
            timeout_verdict: timeout,
            forfeit_verdict: forfeit,
        })
    }
}

/// A validated interaction game (or setting).
#[derive(Debug, Clone)]
pub struct GameSpec {
    name: String,
    description: String,
    roster: Roster,
    spaces: BTreeMap<PlayerId, ActionSpace>,
    observability: ObservabilityRule,
    turn: TurnRule,
    evaluation: EvaluationRule,
    nature: NaturePolicy,
    environment: EnvironmentSpec,
    timeout_verdict: Verdict,
    forfeit_verdict: Verdict,
}

impl GameSpec {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn roster(&self) -> &Roster {
        &self.roster
    }

    pub fn space(&self, player: &PlayerId) -> Option<&ActionSpace> {
        self.spaces.get(player)
    }

    pub fn spaces(&self) -> &BTreeMap<PlayerId, ActionSpace> {
        &self.spaces
    }

    pub fn observability(&self) -> &ObservabilityRule {
        &self.observability
    }

    pub fn turn(&self) -> &TurnRule {
        &self.turn
    }

    pub fn evaluation(&self) -> &EvaluationRule {
        &self.evaluation
    }

    pub fn nature(&self) -> &NaturePolicy {
        &self.nature
    }

    pub fn environment(&self) -> &EnvironmentSpec {
        &self.environment
    }

    pub fn timeout_verdict(&self) -> &Verdict {
        &self.timeout_verdict
    }

    pub fn forfeit_verdict(&self) -> &Verdict {
        &self.forfeit_verdict
    }

    /// Rebuilds the spec with a different evaluation rule (end verdicts are
    /// re-derived from the new codomain). Everything else — players,
    /// spaces, observability, turn rule, Nature, environment, description —
    /// is untouched.
    pub fn with_evaluation(&self, evaluation: EvaluationRule) -> Result<GameSpec, GameError> {
        GameDef {
            name: self.name.clone(),
            description: self.description.clone(),
            roster: self.roster.clone(),
            spaces: self.spaces.clone(),
            observability: self.observability.clone(),
            turn: self.turn.clone(),
            evaluation,
            nature: self.nature.clone(),
            environment: self.environment.clone(),
            timeout_verdict: None,
            forfeit_verdict: None,
        }
        .build()
    }

    /// Game iff the verdict set has at least one positive and one negative
    /// verdict; setting otherwise.
    pub fn classify(&self) -> ActivityClass {
        if self.evaluation.codomain().supports_game() {
            ActivityClass::Game
        } else {
            ActivityClass::Setting
        }
    }

    /// Digest of the game description, written into transcript headers.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.description.as_bytes());
        let out = hasher.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn observers_of(
        &self,
        originator: &PlayerId,
        kind: &str,
    ) -> Result<BTreeSet<PlayerId>, GameError> {
        self.observability.observers_of(&self.roster, originator, kind)
    }

    pub fn eligible_players(&self, history: &[ActionToken]) -> BTreeSet<PlayerId> {
        self.turn.eligible(&self.roster, history)
    }

    pub fn evaluate_history(&self, history: &[ActionToken]) -> Result<Verdict, GameError> {
        self.evaluation.evaluate(history)
    }
}
