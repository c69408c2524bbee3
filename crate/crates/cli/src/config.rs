//! Configuration documents.
//!
//! Every file the CLI consumes (other than raw NDJSON datasets and
//! transcripts) is a single JSON document with a `"type"` tag:
//! `task`, `environment`, `game`, `run`, `capabilities`, or `rubric`.
//! Parsing reports syntax errors with line/column positions and semantic
//! errors with the JSON path of the offending field; resolution enforces
//! every spec invariant before anything runs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use ludus_core::action::{Action, ActionKind, ActionSpace};
use ludus_core::diagnostics::CapabilitySet;
use ludus_core::games::{
    EvaluationRule, GameDef, GameSpec, NaturePolicy, ObservabilityRule, Policy, PolicyMap,
    Scheduling, TurnRule, Verdict,
};
use ludus_core::player::{Player, PlayerId, Roster};
use ludus_core::record::RecordSchema;
use ludus_core::refgames::{
    self, grid_qa_oracle, gridworld_goal_eval, gridworld_informer, load_builtin, qa_eval,
    BfsNavPolicy, CannedChatPolicy, QaAskerPolicy, QaOracleAnswerPolicy, RandomActionPolicy,
    ScriptPolicy,
};
use ludus_core::tasks::{echo_oracle, Oracle, TaskSpec};
use ludus_core::worlds::{gridworld_env, DesiderataRubric, EnvironmentSpec, GridworldState};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

impl ConfigError {
    fn invalid(path: impl Into<String>, message: impl ToString) -> Self {
        ConfigError::Invalid {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

// ---------------------------------------------------------------------------
// Document types
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Document {
    Task(TaskConfig),
    Environment(EnvironmentConfig),
    Game(Box<GameConfig>),
    Run(RunConfig),
    Capabilities(CapabilitySet),
    Rubric(RubricConfig),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Task(_) => "task",
            Document::Environment(_) => "environment",
            Document::Game(_) => "game",
            Document::Run(_) => "run",
            Document::Capabilities(_) => "capabilities",
            Document::Rubric(_) => "rubric",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub input: RecordSchema,
    pub output: RecordSchema,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "world", rename_all = "kebab-case")]
pub enum EnvironmentConfig {
    /// Gridworld from a text map (`.` free, `#` wall, `S` start, `G` goal;
    /// line 0 is the northernmost row).
    Gridworld { map: String },
    /// Inert environment holding a fixed state.
    Static { state: Value },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum EvaluationConfig {
    /// Constant neutral verdict (a setting).
    Constant { verdict: String },
    /// Success when the gridworld agent stands on the goal at the end of a
    /// complete step. Requires a gridworld environment.
    GridworldGoal,
    /// Success when the last answer matches the grid QA oracle on the
    /// scene. Requires a static gridworld-scene environment.
    QaOracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum NatureConfig {
    Inert,
    GridworldInformer,
}

/// Inline game definition or a reference to a built-in with overrides.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overrides: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub players: Option<Vec<Player>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spaces: Option<BTreeMap<String, Vec<ActionKind>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observability: Option<ObservabilityRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub turn: Option<TurnRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluation: Option<EvaluationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub environment: Option<EnvironmentConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nature: Option<NatureConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timeout_verdict: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forfeit_verdict: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GameRef {
    /// Built-in game by name.
    Builtin(String),
    /// Inline game document.
    Inline(Box<GameConfig>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum PolicyConfig {
    /// Fixed action sequence.
    Script {
        actions: Vec<Action>,
        #[serde(default)]
        cycle: bool,
    },
    /// Comma-separated nav moves, e.g. `"e,e,n"`.
    NavScript {
        moves: String,
        #[serde(default)]
        cycle: bool,
    },
    /// Follows a BFS shortest path on the game's gridworld.
    GridBfs,
    /// Cycles through canned utterances.
    CannedChat { utterances: Vec<String> },
    /// Seeded uniform sampling from the player's enumerable actions.
    Random {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// Asks one fixed question from the QA grammar.
    QaAsker { question: String },
    /// Answers with the grid QA oracle.
    QaOracleAnswerer,
    /// Answers with the opposite of the oracle.
    QaContrarianAnswerer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub game: GameRef,
    /// Per-player policy bindings. May be omitted when `game` names a
    /// built-in, which then runs under its bundled demo policies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policies: Option<BTreeMap<String, PolicyConfig>>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_steps")]
    pub max_steps: u32,
    #[serde(default)]
    pub scheduling: Scheduling,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(default = "default_runs")]
    pub runs: u32,
}

fn default_max_steps() -> u32 {
    100
}

fn default_runs() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RubricConfig {
    pub criteria: DesiderataRubric,
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

/// Parses a configuration document, reporting syntax errors with line and
/// column positions and semantic errors with the JSON path of the field.
pub fn parse_config(text: &str) -> Result<Document, Vec<ConfigError>> {
    let value: Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => {
            return Err(vec![ConfigError::Syntax {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            }])
        }
    };
    let deserializer = value.clone();
    match serde_path_to_error::deserialize::<_, Document>(deserializer) {
        Ok(doc) => Ok(doc),
        Err(e) => {
            let path = e.path().to_string();
            let path = if path == "." { "$".to_string() } else { path };
            Err(vec![ConfigError::invalid(path, e.inner())])
        }
    }
}

// ---------------------------------------------------------------------------
// Resolution
// ---------------------------------------------------------------------------

impl TaskConfig {
    pub fn resolve(&self) -> Result<TaskSpec, Vec<ConfigError>> {
        let oracle = match self.oracle.as_deref() {
            None => None,
            Some(name) => Some(resolve_oracle(name).map_err(|e| vec![e])?),
        };
        TaskSpec::new(
            self.name.clone(),
            self.description.clone(),
            self.input.clone(),
            self.output.clone(),
            oracle,
        )
        .map_err(|e| vec![ConfigError::invalid("input/output", e)])
    }
}

fn resolve_oracle(name: &str) -> Result<Oracle, ConfigError> {
    match name {
        "echo" => Ok(echo_oracle()),
        "grid-qa" => Ok(grid_qa_oracle()),
        other => Err(ConfigError::invalid(
            "oracle",
            format!("unknown oracle {other:?} (available: echo, grid-qa)"),
        )),
    }
}

impl EnvironmentConfig {
    pub fn resolve(&self) -> Result<EnvironmentSpec, ConfigError> {
        match self {
            EnvironmentConfig::Gridworld { map } => {
                let grid = GridworldState::from_text_map(map)
                    .map_err(|e| ConfigError::invalid("environment.map", e))?;
                Ok(gridworld_env(grid))
            }
            EnvironmentConfig::Static { state } => Ok(EnvironmentSpec::inert(
                "static",
                "fixed state, no transitions",
                state.clone(),
            )),
        }
    }

    fn gridworld_state(&self) -> Result<GridworldState, ConfigError> {
        let (value, path) = match self {
            EnvironmentConfig::Gridworld { map } => {
                return GridworldState::from_text_map(map)
                    .map_err(|e| ConfigError::invalid("environment.map", e))
            }
            EnvironmentConfig::Static { state } => (state, "environment.state"),
        };
        GridworldState::from_value(value).map_err(|e| ConfigError::invalid(path, e))
    }
}

impl GameConfig {
    pub fn resolve(&self) -> Result<GameSpec, Vec<ConfigError>> {
        if let Some(name) = &self.builtin {
            let overrides = self.overrides.clone().unwrap_or_else(|| Value::Object(Default::default()));
            return load_builtin(name, &overrides)
                .map_err(|e| vec![ConfigError::invalid("builtin", e)]);
        }

        let mut errors = Vec::new();
        let mut require = |field: &'static str, present: bool| {
            if !present {
                errors.push(ConfigError::invalid(field, "required field missing"));
            }
        };
        require("name", self.name.is_some());
        require("players", self.players.is_some());
        require("spaces", self.spaces.is_some());
        require("turn", self.turn.is_some());
        require("evaluation", self.evaluation.is_some());
        if !errors.is_empty() {
            return Err(errors);
        }

        let roster = Roster::new(self.players.clone().unwrap())
            .map_err(|e| vec![ConfigError::invalid("players", e)])?;

        let mut spaces = BTreeMap::new();
        for (id, kinds) in self.spaces.as_ref().unwrap() {
            let player = PlayerId::new(id.clone());
            if !roster.contains(&player) {
                errors.push(ConfigError::invalid(
                    format!("spaces.{id}"),
                    "space declared for a player not in the roster",
                ));
                continue;
            }
            match ActionSpace::new(player.clone(), kinds.clone()) {
                Ok(space) => {
                    spaces.insert(player, space);
                }
                Err(e) => errors.push(ConfigError::invalid(format!("spaces.{id}"), e)),
            }
        }
        // players without a declared space get an empty one
        for id in roster.ids() {
            spaces
                .entry(id.clone())
                .or_insert_with(|| ActionSpace::empty(id.clone()));
        }
        if !errors.is_empty() {
            return Err(errors);
        }

        let environment_config = self
            .environment
            .clone()
            .unwrap_or(EnvironmentConfig::Static { state: Value::Null });
        let environment = environment_config.resolve().map_err(|e| vec![e])?;

        let evaluation = match self.evaluation.as_ref().unwrap() {
            EvaluationConfig::Constant { verdict } => EvaluationRule::constant(verdict),
            EvaluationConfig::GridworldGoal => {
                let grid = environment_config.gridworld_state().map_err(|e| vec![e])?;
                gridworld_goal_eval(grid)
            }
            EvaluationConfig::QaOracle => {
                let scene = environment_config.gridworld_state().map_err(|e| vec![e])?;
                qa_eval(scene.agent, scene.goal)
            }
        };

        let nature = match self.nature.as_ref().unwrap_or(&NatureConfig::Inert) {
            NatureConfig::Inert => NaturePolicy::inert(),
            NatureConfig::GridworldInformer => gridworld_informer(),
        };

        GameDef {
            name: self.name.clone().unwrap(),
            description: self.description.clone().unwrap_or_default(),
            roster,
            spaces,
            observability: self.observability.clone().unwrap_or(ObservabilityRule::Broadcast),
            turn: self.turn.clone().unwrap(),
            evaluation,
            nature,
            environment,
            timeout_verdict: self.timeout_verdict.clone().map(Verdict::new),
            forfeit_verdict: self.forfeit_verdict.clone().map(Verdict::new),
        }
        .build()
        .map_err(|e| vec![ConfigError::invalid("game", e)])
    }
}

impl GameRef {
    pub fn resolve(&self) -> Result<GameSpec, Vec<ConfigError>> {
        match self {
            GameRef::Builtin(name) => load_builtin(name, &Value::Object(Default::default()))
                .map_err(|e| vec![ConfigError::invalid("game", e)]),
            GameRef::Inline(config) => config.resolve(),
        }
    }

    fn builtin_name(&self) -> Option<&str> {
        match self {
            GameRef::Builtin(name) => Some(name),
            GameRef::Inline(config) => config.builtin.as_deref(),
        }
    }

    fn overrides(&self) -> Value {
        match self {
            GameRef::Builtin(_) => Value::Object(Default::default()),
            GameRef::Inline(config) => config
                .overrides
                .clone()
                .unwrap_or_else(|| Value::Object(Default::default())),
        }
    }
}

/// A run ready to execute. Policies are produced fresh per run by
/// [`ResolvedRun::policies`] so parallel runs never share mutable state.
#[derive(Debug)]
pub struct ResolvedRun {
    pub spec: GameSpec,
    pub bindings: Option<BTreeMap<String, PolicyConfig>>,
    pub builtin: Option<String>,
    pub builtin_overrides: Value,
    pub seed: u64,
    pub max_steps: u32,
    pub scheduling: Scheduling,
    pub out: Option<String>,
    pub runs: u32,
}

impl RunConfig {
    pub fn resolve(&self) -> Result<ResolvedRun, Vec<ConfigError>> {
        let spec = self.game.resolve()?;
        let resolved = ResolvedRun {
            spec,
            bindings: self.policies.clone(),
            builtin: self.game.builtin_name().map(|s| s.to_string()),
            builtin_overrides: self.game.overrides(),
            seed: self.seed,
            max_steps: self.max_steps,
            scheduling: self.scheduling,
            out: self.out.clone(),
            runs: self.runs.max(1),
        };
        // fail early if the bindings cannot be materialised
        resolved.policies().map_err(|e| vec![e])?;
        Ok(resolved)
    }
}

impl ResolvedRun {
    /// Materialises one fresh policy set.
    pub fn policies(&self) -> Result<PolicyMap, ConfigError> {
        match &self.bindings {
            Some(bindings) => {
                let mut map: PolicyMap = BTreeMap::new();
                for (id, config) in bindings {
                    let player = PlayerId::new(id.clone());
                    if !self.spec.roster().is_regular(&player) {
                        return Err(ConfigError::invalid(
                            format!("policies.{id}"),
                            "policy bound to a player that is not a regular player of the game",
                        ));
                    }
                    map.insert(player, self.resolve_policy(id, config)?);
                }
                for player in self.spec.roster().regulars() {
                    if !map.contains_key(player) {
                        return Err(ConfigError::invalid(
                            "policies",
                            format!("no policy bound for regular player {player}"),
                        ));
                    }
                }
                Ok(map)
            }
            None => match &self.builtin {
                Some(name) => Ok(refgames::load_bundle(name, &self.builtin_overrides)
                    .map_err(|e| ConfigError::invalid("game", e))?
                    .demo_policies),
                None => Err(ConfigError::invalid(
                    "policies",
                    "inline games require explicit policy bindings",
                )),
            },
        }
    }

    fn resolve_policy(
        &self,
        id: &str,
        config: &PolicyConfig,
    ) -> Result<Box<dyn Policy>, ConfigError> {
        let path = || format!("policies.{id}");
        let grid = || -> Result<GridworldState, ConfigError> {
            GridworldState::from_value(self.spec.environment().initial_state())
                .map_err(|e| ConfigError::invalid(path(), format!("game has no gridworld state: {e}")))
        };
        Ok(match config {
            PolicyConfig::Script { actions, cycle } => {
                if *cycle {
                    Box::new(ScriptPolicy::cycling(actions.clone()))
                } else {
                    Box::new(ScriptPolicy::new(actions.clone()))
                }
            }
            PolicyConfig::NavScript { moves, cycle } => {
                let actions: Vec<Action> =
                    moves.split(',').map(|d| Action::new("nav", d.trim())).collect();
                if *cycle {
                    Box::new(ScriptPolicy::cycling(actions))
                } else {
                    Box::new(ScriptPolicy::new(actions))
                }
            }
            PolicyConfig::GridBfs => Box::new(BfsNavPolicy::new(&grid()?)),
            PolicyConfig::CannedChat { utterances } => {
                Box::new(CannedChatPolicy::new(utterances.clone()))
            }
            PolicyConfig::Random { seed } => {
                let seed = seed.unwrap_or_else(|| self.seed ^ stable_hash(id));
                Box::new(RandomActionPolicy::new(seed))
            }
            PolicyConfig::QaAsker { question } => Box::new(QaAskerPolicy::new(question.clone())),
            PolicyConfig::QaOracleAnswerer => {
                let scene = grid()?;
                Box::new(QaOracleAnswerPolicy::new(scene.agent, scene.goal))
            }
            PolicyConfig::QaContrarianAnswerer => {
                let scene = grid()?;
                Box::new(QaOracleAnswerPolicy::contrarian(scene.agent, scene.goal))
            }
        })
    }
}

fn stable_hash(s: &str) -> u64 {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(s.as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("digest is long enough"))
}

// ---------------------------------------------------------------------------
// Built-in configs (canonical inline forms)
// ---------------------------------------------------------------------------

/// The inline (fully expanded) configuration of a built-in game. Parsing
/// and resolving this document reconstructs the built-in exactly.
pub fn builtin_game_config(name: &str) -> Option<GameConfig> {
    let spec = load_builtin(name, &Value::Object(Default::default())).ok()?;
    let (evaluation, environment, nature) = match name {
        "gridworld-nav" => {
            let grid = GridworldState::from_value(spec.environment().initial_state()).ok()?;
            (
                EvaluationConfig::GridworldGoal,
                EnvironmentConfig::Gridworld {
                    map: grid.to_text_map(),
                },
                NatureConfig::GridworldInformer,
            )
        }
        "free-chat" => (
            EvaluationConfig::Constant {
                verdict: "undecided".into(),
            },
            EnvironmentConfig::Static { state: Value::Null },
            NatureConfig::Inert,
        ),
        "qa-game" => (
            EvaluationConfig::QaOracle,
            EnvironmentConfig::Static {
                state: spec.environment().initial_state().clone(),
            },
            NatureConfig::Inert,
        ),
        _ => return None,
    };
    Some(GameConfig {
        builtin: None,
        overrides: None,
        name: Some(spec.name().to_string()),
        description: Some(spec.description().to_string()),
        players: Some(spec.roster().players().to_vec()),
        spaces: Some(
            spec.spaces()
                .iter()
                .map(|(id, space)| (id.as_str().to_string(), space.kinds().to_vec()))
                .collect(),
        ),
        observability: Some(spec.observability().clone()),
        turn: Some(spec.turn().clone()),
        evaluation: Some(evaluation),
        environment: Some(environment),
        nature: Some(nature),
        timeout_verdict: None,
        forfeit_verdict: None,
    })
}

/// Capability sets referenced by `compare`: the named set plus, when the
/// document is a task set, the inventory it declares.
pub fn capability_set_from(doc: &Document, path: &str) -> Result<CapabilitySet, ConfigError> {
    match doc {
        Document::Capabilities(set) => Ok(set.clone()),
        other => Err(ConfigError::invalid(
            path,
            format!("expected a capabilities document, found {}", other.kind()),
        )),
    }
}
