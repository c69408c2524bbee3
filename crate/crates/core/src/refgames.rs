//! Built-in, fully configured games and settings.
//!
//! Three instantiations ship with the library:
//!
//! - `gridworld-nav`: one regular player navigating a grid, with Nature
//!   informing on the available navigation options after every move. A
//!   game: success on reaching the goal, failure at the step cap.
//! - `free-chat`: two regular players exchanging unrestricted utterances
//!   under free initiative, an inert Nature, and a constant `undecided`
//!   evaluation. A setting, not a game.
//! - `qa-game`: an asker and an answerer alternating over an oracle-backed
//!   question-answering task about a fixed grid scene. Success iff the
//!   answer matches the oracle, failure on mismatch.
//!
//! Each built-in comes with demo policies so it can be run to a verdict out
//! of the box.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::action::{Action, ActionKind, ActionSpace, PayloadSchema};
use crate::games::{
    EvaluationRule, GameDef, GameError, GameSpec, NaturePolicy, ObservabilityRule, Policy,
    PolicyError, PolicyMap, PolicyView, TurnRule, Verdict, VerdictSet,
};
use crate::player::{Player, PlayerId, Roster};
use crate::record::{FieldSchema, ModalField, ModalRecord, RecordSchema};
use crate::tasks::{Oracle, TaskError, TaskSpec};
use crate::worlds::{
    gridworld_env, nav_kind, Cell, Direction, EnvironmentSpec, GridworldState, WorldError,
    ALL_DIRECTIONS,
};

#[derive(Debug, Error)]
pub enum BuiltinError {
    #[error("unknown built-in {0:?}")]
    NotFound(String),
    #[error("invalid overrides: {0}")]
    Overrides(String),
    #[error("construction failed: {0}")]
    Construction(#[from] GameError),
    #[error("world error: {0}")]
    World(#[from] WorldError),
    #[error("task error: {0}")]
    Task(#[from] TaskError),
}

pub const BUILTIN_NAMES: [&str; 3] = ["gridworld-nav", "free-chat", "qa-game"];

/// Loads a built-in by name. `overrides` is a (possibly empty) JSON object
/// setting that built-in's configuration fields; unknown fields and
/// invariant-violating values are construction errors.
pub fn load_builtin(name: &str, overrides: &Value) -> Result<GameSpec, BuiltinError> {
    Ok(load_bundle(name, overrides)?.spec)
}

/// A built-in together with its demo policies and default step cap.
pub struct Builtin {
    pub spec: GameSpec,
    pub demo_policies: PolicyMap,
    pub default_max_steps: u32,
}

/// Loads a built-in plus its bundled demo policies.
pub fn load_bundle(name: &str, overrides: &Value) -> Result<Builtin, BuiltinError> {
    fn config<T: serde::de::DeserializeOwned>(overrides: &Value) -> Result<T, BuiltinError> {
        serde_json::from_value(overrides.clone()).map_err(|e| BuiltinError::Overrides(e.to_string()))
    }
    match name {
        "gridworld-nav" => gridworld_nav(&config(overrides)?),
        "free-chat" => free_chat(&config(overrides)?),
        "qa-game" => qa_game(&config(overrides)?),
        other => Err(BuiltinError::NotFound(other.to_string())),
    }
}

// ---------------------------------------------------------------------------
// gridworld-nav
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridworldNavConfig {
    /// Text map (overrides the geometric fields when present).
    pub map: Option<String>,
    pub width: u32,
    pub height: u32,
    pub start: (u32, u32),
    pub goal: (u32, u32),
    pub walls: Vec<(u32, u32)>,
    pub player: String,
    pub nature: String,
}

impl Default for GridworldNavConfig {
    fn default() -> Self {
        GridworldNavConfig {
            map: None,
            width: 4,
            height: 4,
            start: (0, 0),
            goal: (3, 3),
            walls: Vec::new(),
            player: "p1".into(),
            nature: "N".into(),
        }
    }
}

impl GridworldNavConfig {
    pub fn grid(&self) -> Result<GridworldState, WorldError> {
        match &self.map {
            Some(map) => GridworldState::from_text_map(map),
            None => GridworldState::new(
                self.width,
                self.height,
                self.start,
                self.goal,
                self.walls.iter().map(|&(c, r)| Cell::new(c, r)),
            ),
        }
    }
}

/// Canonical payload for an inform action: the available directions in
/// fixed n, s, e, w order.
pub fn options_payload(options: &BTreeSet<Direction>) -> Value {
    Value::Array(options.iter().map(|d| Value::from(d.as_str())).collect())
}

/// The inform kind enumerates all sixteen direction subsets.
pub fn inform_kind() -> ActionKind {
    let mut subsets = Vec::new();
    for mask in 0u8..16 {
        let set: BTreeSet<Direction> = ALL_DIRECTIONS
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, d)| *d)
            .collect();
        subsets.push(options_payload(&set));
    }
    ActionKind::new("inform", PayloadSchema::enumerated(subsets))
}

/// Nature policy that reports the currently available navigation options.
pub fn gridworld_informer() -> NaturePolicy {
    NaturePolicy::new("gridworld-informer", |state, _observed| {
        let grid = GridworldState::from_value(state)?;
        Ok(Some(Action::new("inform", options_payload(&grid.options()))))
    })
}

/// Evaluation that replays the navigation tokens through the grid: success
/// once the agent stands on the goal and Nature has confirmed the step
/// (otherwise a post-goal inform would trail a decisive verdict).
pub fn gridworld_goal_eval(initial: GridworldState) -> EvaluationRule {
    EvaluationRule::new("gridworld-goal", VerdictSet::standard(), move |history| {
        let mut grid = initial.clone();
        for token in history {
            if token.action.kind == "nav" {
                if let Some(dir) = token.action.payload.as_str().and_then(Direction::parse) {
                    grid = grid.apply_nav(dir).0;
                }
            }
        }
        let step_complete = history.last().is_some_and(|t| t.action.kind == "inform");
        if grid.agent == grid.goal && step_complete {
            Verdict::new("success")
        } else {
            Verdict::new("undecided")
        }
    })
}

fn gridworld_nav(config: &GridworldNavConfig) -> Result<Builtin, BuiltinError> {
    let grid = config.grid()?;
    let p1 = PlayerId::new(config.player.clone());
    let nature = PlayerId::new(config.nature.clone());
    let roster = Roster::new(vec![
        Player::regular(config.player.clone()),
        Player::nature(config.nature.clone()),
    ])
    .map_err(|e| BuiltinError::Overrides(e.to_string()))?;

    let mut spaces = BTreeMap::new();
    spaces.insert(p1.clone(), ActionSpace::new(p1.clone(), [nav_kind()]).map_err(GameError::from)?);
    spaces.insert(
        nature.clone(),
        ActionSpace::new(nature.clone(), [inform_kind()]).map_err(GameError::from)?,
    );

    let turn = TurnRule::Explicit {
        start: BTreeSet::from([p1.clone()]),
        next: BTreeMap::from([
            (
                p1.clone(),
                BTreeMap::from([("nav".to_string(), BTreeSet::from([p1.clone()]))]),
            ),
            (
                nature.clone(),
                BTreeMap::from([("inform".to_string(), BTreeSet::from([p1.clone()]))]),
            ),
        ]),
        otherwise: BTreeSet::new(),
    };

    let default_max_steps = (grid.width * grid.height).max(1);
    let spec = GameDef {
        name: "gridworld-nav".into(),
        description: format!(
            "Single-agent navigation on a {}x{} grid from {:?} to {:?}. The agent issues nav \
             actions; after each one, Nature reports the navigation options available from the \
             resulting cell. Reaching the goal succeeds; exhausting the step cap fails.",
            grid.width, grid.height, grid.agent, grid.goal
        ),
        roster,
        spaces,
        observability: ObservabilityRule::Broadcast,
        turn,
        evaluation: gridworld_goal_eval(grid.clone()),
        nature: gridworld_informer(),
        environment: gridworld_env(grid.clone()),
        timeout_verdict: None,
        forfeit_verdict: None,
    }
    .build()?;

    let mut demo_policies: PolicyMap = BTreeMap::new();
    demo_policies.insert(p1, Box::new(BfsNavPolicy::new(&grid)));
    Ok(Builtin {
        spec,
        demo_policies,
        default_max_steps,
    })
}

// ---------------------------------------------------------------------------
// free-chat
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FreeChatConfig {
    pub players: Vec<String>,
    pub nature: String,
    pub utterances: Vec<String>,
}

impl Default for FreeChatConfig {
    fn default() -> Self {
        FreeChatConfig {
            players: vec!["p1".into(), "p2".into()],
            nature: "N".into(),
            utterances: vec![
                "hello".into(),
                "how are you?".into(),
                "I don't know".into(),
                "tell me more".into(),
                "goodbye".into(),
            ],
        }
    }
}

fn free_chat(config: &FreeChatConfig) -> Result<Builtin, BuiltinError> {
    let mut players: Vec<Player> =
        config.players.iter().map(|p| Player::regular(p.clone())).collect();
    players.push(Player::nature(config.nature.clone()));
    let roster = Roster::new(players).map_err(|e| BuiltinError::Overrides(e.to_string()))?;

    let mut spaces = BTreeMap::new();
    for p in roster.regulars() {
        spaces.insert(
            p.clone(),
            ActionSpace::new(p.clone(), [ActionKind::new("utt", PayloadSchema::AnyString)])
                .map_err(GameError::from)?,
        );
    }
    // Nature is inert in free chat: its action space is empty.
    spaces.insert(roster.nature().clone(), ActionSpace::empty(roster.nature().clone()));

    let spec = GameDef {
        name: "free-chat".into(),
        description: "Unconstrained chat between regular players: any player may utter any \
                      string at any time, all actions are observed by all, Nature never \
                      intervenes, and no outcome is ever reached."
            .into(),
        roster: roster.clone(),
        spaces,
        observability: ObservabilityRule::Broadcast,
        turn: TurnRule::FreeInitiative,
        evaluation: EvaluationRule::constant("undecided"),
        nature: NaturePolicy::inert(),
        environment: EnvironmentSpec::inert("none", "no world backs this setting", Value::Null),
        timeout_verdict: None,
        forfeit_verdict: None,
    }
    .build()?;

    let mut demo_policies: PolicyMap = BTreeMap::new();
    for (i, p) in roster.regulars().enumerate() {
        let mut utterances = config.utterances.clone();
        let shift = i % utterances.len().max(1);
        utterances.rotate_left(shift);
        demo_policies.insert(p.clone(), Box::new(CannedChatPolicy::new(utterances)));
    }
    Ok(Builtin {
        spec,
        demo_policies,
        default_max_steps: 20,
    })
}

// ---------------------------------------------------------------------------
// qa-game
// ---------------------------------------------------------------------------

/// Anchored grammar for the grid question-answering game.
pub const QA_QUESTION_PATTERN: &str = r"is the goal (north|south|east|west) of the agent\?";

/// Input/output schemas plus coordinate-comparison oracle for grid
/// question answering. Inputs carry the agent and goal cells (non-language)
/// and a question drawn from the grammar; the output is a yes/no answer.
pub fn grid_qa_task() -> TaskSpec {
    let input = RecordSchema::new()
        .with("agent", FieldSchema::other(PayloadSchema::Any))
        .with("goal", FieldSchema::other(PayloadSchema::Any))
        .with(
            "q",
            FieldSchema::language(
                PayloadSchema::pattern(QA_QUESTION_PATTERN).expect("static pattern"),
            ),
        );
    let output =
        RecordSchema::new().with("a", FieldSchema::language(PayloadSchema::strings(["yes", "no"])));
    TaskSpec::new(
        "grid-qa",
        "Answer yes/no questions about the relative position of the goal and the agent on a \
         grid, of the form \"is the goal <direction> of the agent?\".",
        input,
        output,
        Some(grid_qa_oracle()),
    )
    .expect("static task is well-formed")
}

fn parse_qa_cell(value: Option<&Value>, name: &str) -> Result<Cell, TaskError> {
    let err = || TaskError::OracleFailure(format!("field {name} is not a [col, row] pair"));
    let arr = value.and_then(Value::as_array).ok_or_else(err)?;
    if arr.len() != 2 {
        return Err(err());
    }
    let col = arr[0].as_u64().ok_or_else(err)?;
    let row = arr[1].as_u64().ok_or_else(err)?;
    Ok(Cell::new(col as u32, row as u32))
}

fn question_direction(q: &str) -> Option<Direction> {
    for (needle, dir) in [
        ("north", Direction::North),
        ("south", Direction::South),
        ("east", Direction::East),
        ("west", Direction::West),
    ] {
        if q == format!("is the goal {needle} of the agent?") {
            return Some(dir);
        }
    }
    None
}

/// The coordinate-comparison oracle: "north" means strictly greater row,
/// "east" strictly greater column, and so on.
pub fn grid_qa_oracle() -> Oracle {
    Oracle::new("grid-qa", |x: &ModalRecord| {
        let agent = parse_qa_cell(x.value("agent"), "agent")?;
        let goal = parse_qa_cell(x.value("goal"), "goal")?;
        let q = x
            .value("q")
            .and_then(Value::as_str)
            .ok_or_else(|| TaskError::OracleFailure("question is not a string".into()))?;
        let dir = question_direction(q)
            .ok_or_else(|| TaskError::OracleFailure(format!("question outside grammar: {q:?}")))?;
        let yes = match dir {
            Direction::North => goal.row > agent.row,
            Direction::South => goal.row < agent.row,
            Direction::East => goal.col > agent.col,
            Direction::West => goal.col < agent.col,
        };
        Ok(ModalRecord::new().with("a", ModalField::language(if yes { "yes" } else { "no" })))
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QaGameConfig {
    pub agent: (u32, u32),
    pub goal: (u32, u32),
    pub width: u32,
    pub height: u32,
    pub asker: String,
    pub answerer: String,
    pub nature: String,
    /// Question the demo asker poses.
    pub question: String,
}

impl Default for QaGameConfig {
    fn default() -> Self {
        QaGameConfig {
            agent: (0, 0),
            goal: (3, 3),
            width: 4,
            height: 4,
            asker: "asker".into(),
            answerer: "answerer".into(),
            nature: "N".into(),
            question: "is the goal north of the agent?".into(),
        }
    }
}

/// QA evaluation: undecided until an answer follows a question; then
/// success iff the answer matches the oracle on (scene, question).
pub fn qa_eval(scene_agent: Cell, scene_goal: Cell) -> EvaluationRule {
    let oracle = grid_qa_oracle();
    EvaluationRule::new("qa-oracle", VerdictSet::standard(), move |history| {
        let mut last_question: Option<String> = None;
        let mut outcome = Verdict::new("undecided");
        for token in history {
            match token.action.kind.as_str() {
                "ask" => {
                    last_question =
                        token.action.payload.as_str().map(|s| s.to_string());
                }
                "answer" => {
                    let (Some(q), Some(answer)) =
                        (last_question.take(), token.action.payload.as_str())
                    else {
                        continue;
                    };
                    let x = ModalRecord::new()
                        .with("agent", ModalField::other(json!([scene_agent.col, scene_agent.row])))
                        .with("goal", ModalField::other(json!([scene_goal.col, scene_goal.row])))
                        .with("q", ModalField::language(q));
                    outcome = match oracle.apply(&x) {
                        Ok(expected) => {
                            if expected.value("a").and_then(Value::as_str) == Some(answer) {
                                Verdict::new("success")
                            } else {
                                Verdict::new("failure")
                            }
                        }
                        Err(_) => Verdict::new("failure"),
                    };
                }
                _ => {}
            }
        }
        outcome
    })
}

fn qa_game(config: &QaGameConfig) -> Result<Builtin, BuiltinError> {
    let scene = GridworldState::new(config.width, config.height, config.agent, config.goal, [])?;
    let asker = PlayerId::new(config.asker.clone());
    let answerer = PlayerId::new(config.answerer.clone());
    let roster = Roster::new(vec![
        Player::regular(config.asker.clone()),
        Player::regular(config.answerer.clone()),
        Player::nature(config.nature.clone()),
    ])
    .map_err(|e| BuiltinError::Overrides(e.to_string()))?;

    let ask_kind = ActionKind::new(
        "ask",
        PayloadSchema::pattern(QA_QUESTION_PATTERN).expect("static pattern"),
    );
    let answer_kind = ActionKind::new("answer", PayloadSchema::strings(["yes", "no"]));

    let mut spaces = BTreeMap::new();
    spaces.insert(
        asker.clone(),
        ActionSpace::new(asker.clone(), [ask_kind]).map_err(GameError::from)?,
    );
    spaces.insert(
        answerer.clone(),
        ActionSpace::new(answerer.clone(), [answer_kind]).map_err(GameError::from)?,
    );
    spaces.insert(roster.nature().clone(), ActionSpace::empty(roster.nature().clone()));

    let spec = GameDef {
        name: "qa-game".into(),
        description: format!(
            "Question answering about a fixed {}x{} grid scene with the agent at {:?} and the \
             goal at {:?}. The asker poses questions from the grid grammar, the answerer replies \
             yes or no; the answer is scored against the coordinate-comparison oracle.",
            config.width, config.height, config.agent, config.goal
        ),
        roster,
        spaces,
        observability: ObservabilityRule::Broadcast,
        turn: TurnRule::StrictAlternation {
            start: BTreeSet::from([asker.clone()]),
        },
        evaluation: qa_eval(scene.agent, scene.goal),
        nature: NaturePolicy::inert(),
        environment: EnvironmentSpec::inert(
            "qa-scene",
            "static grid scene the questions refer to",
            scene.to_value(),
        ),
        timeout_verdict: None,
        forfeit_verdict: None,
    }
    .build()?;

    let mut demo_policies: PolicyMap = BTreeMap::new();
    demo_policies.insert(asker, Box::new(QaAskerPolicy::new(config.question.clone())));
    demo_policies.insert(
        answerer,
        Box::new(QaOracleAnswerPolicy::new(scene.agent, scene.goal)),
    );
    Ok(Builtin {
        spec,
        demo_policies,
        default_max_steps: 4,
    })
}

// ---------------------------------------------------------------------------
// Demo policies
// ---------------------------------------------------------------------------

fn own_token_count(view: &PolicyView<'_>) -> usize {
    view.observed.iter().filter(|t| &t.originator == view.player).count()
}

/// Replays a fixed action sequence. The script position is recovered from
/// the player's own tokens in its observed history, so the policy itself is
/// stateless and replays exactly.
pub struct ScriptPolicy {
    actions: Vec<Action>,
    cycle: bool,
}

impl ScriptPolicy {
    pub fn new(actions: Vec<Action>) -> Self {
        ScriptPolicy { actions, cycle: false }
    }

    pub fn cycling(actions: Vec<Action>) -> Self {
        ScriptPolicy { actions, cycle: true }
    }

    /// Convenience: a nav script from direction letters.
    pub fn nav(moves: &str) -> Self {
        ScriptPolicy::new(
            moves
                .split(',')
                .map(|d| Action::new("nav", d.trim()))
                .collect(),
        )
    }
}

impl Policy for ScriptPolicy {
    fn act(&mut self, view: PolicyView<'_>) -> Result<Action, PolicyError> {
        if self.actions.is_empty() {
            return Err(PolicyError::new("empty script"));
        }
        let index = own_token_count(&view);
        if index >= self.actions.len() && !self.cycle {
            return Err(PolicyError::new(format!("script exhausted after {index} actions")));
        }
        Ok(self.actions[index % self.actions.len()].clone())
    }
}

/// Shortest-path BFS over a known grid; emits the path one nav at a time.
pub struct BfsNavPolicy {
    path: Vec<Direction>,
}

impl BfsNavPolicy {
    pub fn new(grid: &GridworldState) -> Self {
        BfsNavPolicy {
            path: bfs_path(grid).unwrap_or_default(),
        }
    }

    pub fn path_len(&self) -> usize {
        self.path.len()
    }
}

impl Policy for BfsNavPolicy {
    fn act(&mut self, view: PolicyView<'_>) -> Result<Action, PolicyError> {
        let index = own_token_count(&view);
        match self.path.get(index) {
            Some(dir) => Ok(Action::new("nav", dir.as_str())),
            None => Err(PolicyError::new("path exhausted before the goal was reached")),
        }
    }
}

/// Shortest path from the agent to the goal, as a direction sequence.
pub fn bfs_path(grid: &GridworldState) -> Option<Vec<Direction>> {
    if grid.agent == grid.goal {
        return Some(Vec::new());
    }
    let mut parents: BTreeMap<Cell, (Cell, Direction)> = BTreeMap::new();
    let mut queue = VecDeque::from([grid.agent]);
    let mut seen = BTreeSet::from([grid.agent]);
    while let Some(cell) = queue.pop_front() {
        for dir in ALL_DIRECTIONS {
            let Some(next) = grid.neighbour(cell, dir) else { continue };
            if !grid.is_free(next) || !seen.insert(next) {
                continue;
            }
            parents.insert(next, (cell, dir));
            if next == grid.goal {
                let mut path = Vec::new();
                let mut cursor = next;
                while cursor != grid.agent {
                    let (prev, dir) = parents[&cursor];
                    path.push(dir);
                    cursor = prev;
                }
                path.reverse();
                return Some(path);
            }
            queue.push_back(next);
        }
    }
    None
}

/// Cycles through a list of canned utterances.
pub struct CannedChatPolicy {
    utterances: Vec<String>,
}

impl CannedChatPolicy {
    pub fn new(utterances: Vec<String>) -> Self {
        CannedChatPolicy { utterances }
    }
}

impl Policy for CannedChatPolicy {
    fn act(&mut self, view: PolicyView<'_>) -> Result<Action, PolicyError> {
        if self.utterances.is_empty() {
            return Err(PolicyError::new("no utterances configured"));
        }
        let index = own_token_count(&view) % self.utterances.len();
        Ok(Action::new("utt", self.utterances[index].clone()))
    }
}

/// Uniform random choice from the player's enumerable action kinds, as a
/// deterministic function of the seed and the player's own token count.
pub struct RandomActionPolicy {
    seed: u64,
}

impl RandomActionPolicy {
    pub fn new(seed: u64) -> Self {
        RandomActionPolicy { seed }
    }
}

impl Policy for RandomActionPolicy {
    fn act(&mut self, view: PolicyView<'_>) -> Result<Action, PolicyError> {
        use rand::SeedableRng;
        let count = own_token_count(&view) as u64;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(
            self.seed ^ count.wrapping_mul(0x9E37_79B9_7F4A_7C15),
        );
        view.space
            .sample(&mut rng)
            .ok_or_else(|| PolicyError::new("space has no enumerable action kind"))
    }
}

/// Asks one fixed question from the QA grammar.
pub struct QaAskerPolicy {
    question: String,
}

impl QaAskerPolicy {
    pub fn new(question: String) -> Self {
        QaAskerPolicy { question }
    }
}

impl Policy for QaAskerPolicy {
    fn act(&mut self, _view: PolicyView<'_>) -> Result<Action, PolicyError> {
        Ok(Action::new("ask", self.question.clone()))
    }
}

/// Answers the most recent observed question with the oracle's answer.
pub struct QaOracleAnswerPolicy {
    agent: Cell,
    goal: Cell,
    invert: bool,
}

impl QaOracleAnswerPolicy {
    pub fn new(agent: Cell, goal: Cell) -> Self {
        QaOracleAnswerPolicy {
            agent,
            goal,
            invert: false,
        }
    }

    /// Always answers wrongly; useful for exercising the failure verdict.
    pub fn contrarian(agent: Cell, goal: Cell) -> Self {
        QaOracleAnswerPolicy {
            agent,
            goal,
            invert: true,
        }
    }
}

impl Policy for QaOracleAnswerPolicy {
    fn act(&mut self, view: PolicyView<'_>) -> Result<Action, PolicyError> {
        let question = view
            .observed
            .iter()
            .rev()
            .find(|t| t.action.kind == "ask")
            .and_then(|t| t.action.payload.as_str())
            .ok_or_else(|| PolicyError::new("no question observed yet"))?;
        let x = ModalRecord::new()
            .with("agent", ModalField::other(json!([self.agent.col, self.agent.row])))
            .with("goal", ModalField::other(json!([self.goal.col, self.goal.row])))
            .with("q", ModalField::language(question));
        let answer = grid_qa_oracle()
            .apply(&x)
            .map_err(|e| PolicyError::new(e.to_string()))?;
        let mut text = answer
            .value("a")
            .and_then(Value::as_str)
            .unwrap_or("no")
            .to_string();
        if self.invert {
            text = if text == "yes" { "no".into() } else { "yes".into() };
        }
        Ok(Action::new("answer", text))
    }
}
