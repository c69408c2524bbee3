//! Micro-world environments.
//!
//! An environment is a state-transition function: it maps an action, taken
//! in a state, to a successor state and a reward, in accordance with a
//! prose world description. Environments here are deterministic; a
//! stochastic world must thread an explicit seed through its state.
//!
//! The module ships a reference gridworld (bounded grid with walls, a
//! single agent, and a goal cell) and an eight-criterion richness rubric
//! for recording human judgments about an environment's scope.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::action::{Action, ActionKind, PayloadSchema};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorldError {
    #[error("cell ({0}, {1}) is out of bounds")]
    OutOfBounds(u32, u32),
    #[error("grid dimensions must be at least 1x1")]
    EmptyGrid,
    #[error("{0} cell lies inside a wall")]
    CellInWall(&'static str),
    #[error("start and goal may coincide only on a 1x1 grid")]
    StartEqualsGoal,
    #[error("goal is unreachable from the start cell")]
    UnreachableGoal,
    #[error("action {kind:?} is outside the environment's action schema")]
    ActionOutsideSchema { kind: String },
    #[error("state does not match the environment's state schema: {0}")]
    StateSchema(String),
    #[error("environment produced a non-finite reward")]
    NonFiniteReward,
    #[error("map line {line}: {reason}")]
    MapParse { line: usize, reason: String },
    #[error("rubric is missing criterion {0}")]
    MissingCriterion(String),
    #[error("rubric has unexpected key {0:?} (expected C1..C8)")]
    UnknownCriterion(String),
}

type StepFn = Arc<dyn Fn(&Value, &Action) -> Result<(Value, f64), WorldError> + Send + Sync>;
type StateCheckFn = Arc<dyn Fn(&Value) -> Result<(), WorldError> + Send + Sync>;

/// An environment: accepted actions, an initial state, and a pure,
/// deterministic step function producing `(state', reward)`.
///
/// Environments are immutable specifications and may be shared freely
/// between concurrent simulations.
#[derive(Clone)]
pub struct EnvironmentSpec {
    name: String,
    description: String,
    initial_state: Value,
    accepts: Vec<ActionKind>,
    step_fn: StepFn,
    state_check: StateCheckFn,
}

impl fmt::Debug for EnvironmentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EnvironmentSpec")
            .field("name", &self.name)
            .field("initial_state", &self.initial_state)
            .field("accepts", &self.accepts)
            .finish_non_exhaustive()
    }
}

impl EnvironmentSpec {
    pub fn new(
        name: impl Into<String>,
        description: impl Into<String>,
        initial_state: Value,
        accepts: Vec<ActionKind>,
        state_check: StateCheckFn,
        step_fn: StepFn,
    ) -> Self {
        EnvironmentSpec {
            name: name.into(),
            description: description.into(),
            initial_state,
            accepts,
            step_fn,
            state_check,
        }
    }

    /// An environment that accepts no actions and never changes: a passive
    /// backdrop for games whose actions are not world-directed.
    pub fn inert(name: impl Into<String>, description: impl Into<String>, state: Value) -> Self {
        EnvironmentSpec {
            name: name.into(),
            description: description.into(),
            initial_state: state,
            accepts: Vec::new(),
            step_fn: Arc::new(|state, _| Ok((state.clone(), 0.0))),
            state_check: Arc::new(|_| Ok(())),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn initial_state(&self) -> &Value {
        &self.initial_state
    }

    pub fn accepted_kinds(&self) -> &[ActionKind] {
        &self.accepts
    }

    /// True iff the action is within this environment's action schema.
    pub fn accepts_action(&self, action: &Action) -> bool {
        self.accepts
            .iter()
            .any(|k| k.name == action.kind && k.payloads.admits(&action.payload))
    }

    /// One transition. Errors when the state fails the state schema or the
    /// action is outside the action schema; an in-schema but ineffective
    /// action (for instance a move into a wall) is not an error.
    pub fn step(&self, state: &Value, action: &Action) -> Result<(Value, f64), WorldError> {
        (self.state_check)(state)?;
        if !self.accepts_action(action) {
            return Err(WorldError::ActionOutsideSchema {
                kind: action.kind.clone(),
            });
        }
        let (next, reward) = (self.step_fn)(state, action)?;
        if !reward.is_finite() {
            return Err(WorldError::NonFiniteReward);
        }
        Ok((next, reward))
    }
}

// ---------------------------------------------------------------------------
// Gridworld
// ---------------------------------------------------------------------------

/// Cardinal direction on the grid. North increases the row index; `(0, 0)`
/// is the south-west corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    North,
    South,
    East,
    West,
}

pub const ALL_DIRECTIONS: [Direction; 4] = [
    Direction::North,
    Direction::South,
    Direction::East,
    Direction::West,
];

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::North => "n",
            Direction::South => "s",
            Direction::East => "e",
            Direction::West => "w",
        }
    }

    pub fn parse(s: &str) -> Option<Direction> {
        match s {
            "n" => Some(Direction::North),
            "s" => Some(Direction::South),
            "e" => Some(Direction::East),
            "w" => Some(Direction::West),
            _ => None,
        }
    }

    /// Column/row deltas as signed offsets.
    pub fn delta(&self) -> (i64, i64) {
        match self {
            Direction::North => (0, 1),
            Direction::South => (0, -1),
            Direction::East => (1, 0),
            Direction::West => (-1, 0),
        }
    }
}

/// Grid cell, addressed as (column, row), 0-indexed from the south-west.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub col: u32,
    pub row: u32,
}

impl Cell {
    pub fn new(col: u32, row: u32) -> Self {
        Cell { col, row }
    }
}

impl From<(u32, u32)> for Cell {
    fn from((col, row): (u32, u32)) -> Self {
        Cell { col, row }
    }
}

/// State of the reference gridworld: dimensions, agent cell, goal cell, and
/// wall cells.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridworldState {
    pub width: u32,
    pub height: u32,
    pub agent: Cell,
    pub goal: Cell,
    pub walls: BTreeSet<Cell>,
}

impl GridworldState {
    /// Validated construction: cells in bounds, agent and goal outside
    /// walls, start distinct from goal (except on a 1x1 grid), and the goal
    /// reachable from the start by search.
    pub fn new(
        width: u32,
        height: u32,
        agent: impl Into<Cell>,
        goal: impl Into<Cell>,
        walls: impl IntoIterator<Item = Cell>,
    ) -> Result<Self, WorldError> {
        if width == 0 || height == 0 {
            return Err(WorldError::EmptyGrid);
        }
        let agent = agent.into();
        let goal = goal.into();
        let walls: BTreeSet<Cell> = walls.into_iter().collect();
        for cell in walls.iter().chain([&agent, &goal]) {
            if cell.col >= width || cell.row >= height {
                return Err(WorldError::OutOfBounds(cell.col, cell.row));
            }
        }
        if walls.contains(&agent) {
            return Err(WorldError::CellInWall("agent"));
        }
        if walls.contains(&goal) {
            return Err(WorldError::CellInWall("goal"));
        }
        if agent == goal && (width, height) != (1, 1) {
            return Err(WorldError::StartEqualsGoal);
        }
        let state = GridworldState {
            width,
            height,
            agent,
            goal,
            walls,
        };
        if !state.reachable(state.agent, state.goal) {
            return Err(WorldError::UnreachableGoal);
        }
        Ok(state)
    }

    pub fn in_bounds(&self, cell: Cell) -> bool {
        cell.col < self.width && cell.row < self.height
    }

    pub fn is_free(&self, cell: Cell) -> bool {
        self.in_bounds(cell) && !self.walls.contains(&cell)
    }

    /// The neighbouring cell in a direction, if it stays on the grid.
    pub fn neighbour(&self, cell: Cell, dir: Direction) -> Option<Cell> {
        let (dc, dr) = dir.delta();
        let col = cell.col as i64 + dc;
        let row = cell.row as i64 + dr;
        if col < 0 || row < 0 || col >= self.width as i64 || row >= self.height as i64 {
            return None;
        }
        Some(Cell::new(col as u32, row as u32))
    }

    /// Exactly the directions whose target cell is on the grid and not a
    /// wall.
    pub fn options(&self) -> BTreeSet<Direction> {
        ALL_DIRECTIONS
            .iter()
            .copied()
            .filter(|d| self.neighbour(self.agent, *d).is_some_and(|c| self.is_free(c)))
            .collect()
    }

    /// Applies a navigation move. A valid move shifts the agent one cell
    /// and yields reward 1.0 exactly when it enters the goal cell; a move
    /// off the grid or into a wall leaves the state unchanged with reward
    /// 0.0.
    pub fn apply_nav(&self, dir: Direction) -> (GridworldState, f64) {
        match self.neighbour(self.agent, dir) {
            Some(target) if self.is_free(target) => {
                let mut next = self.clone();
                next.agent = target;
                let reward = if target == self.goal { 1.0 } else { 0.0 };
                (next, reward)
            }
            _ => (self.clone(), 0.0),
        }
    }

    fn reachable(&self, from: Cell, to: Cell) -> bool {
        if from == to {
            return true;
        }
        let mut seen = BTreeSet::from([from]);
        let mut queue = VecDeque::from([from]);
        while let Some(cell) = queue.pop_front() {
            for dir in ALL_DIRECTIONS {
                if let Some(next) = self.neighbour(cell, dir) {
                    if self.is_free(next) && seen.insert(next) {
                        if next == to {
                            return true;
                        }
                        queue.push_back(next);
                    }
                }
            }
        }
        false
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("gridworld state serialization cannot fail")
    }

    pub fn from_value(value: &Value) -> Result<Self, WorldError> {
        serde_json::from_value(value.clone())
            .map_err(|e| WorldError::StateSchema(e.to_string()))
    }

    /// Parses a text map: one row per line, `.` free, `#` wall, `S` start,
    /// `G` goal. Line 0 of the text is the northernmost row.
    pub fn from_text_map(text: &str) -> Result<Self, WorldError> {
        let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        if lines.is_empty() {
            return Err(WorldError::EmptyGrid);
        }
        let height = lines.len() as u32;
        let width = lines[0].chars().count() as u32;
        let mut start = None;
        let mut goal = None;
        let mut walls = Vec::new();
        for (i, line) in lines.iter().enumerate() {
            if line.chars().count() as u32 != width {
                return Err(WorldError::MapParse {
                    line: i + 1,
                    reason: "uneven row length".into(),
                });
            }
            // file row 0 is the northernmost row, i.e. the highest row index
            let row = height - 1 - i as u32;
            for (col, ch) in line.chars().enumerate() {
                let cell = Cell::new(col as u32, row);
                match ch {
                    '.' => {}
                    '#' => walls.push(cell),
                    'S' => {
                        if start.replace(cell).is_some() {
                            return Err(WorldError::MapParse {
                                line: i + 1,
                                reason: "more than one start cell".into(),
                            });
                        }
                    }
                    'G' => {
                        if goal.replace(cell).is_some() {
                            return Err(WorldError::MapParse {
                                line: i + 1,
                                reason: "more than one goal cell".into(),
                            });
                        }
                    }
                    other => {
                        return Err(WorldError::MapParse {
                            line: i + 1,
                            reason: format!("unexpected character {other:?}"),
                        })
                    }
                }
            }
        }
        let start = start.ok_or(WorldError::MapParse {
            line: 0,
            reason: "no start cell".into(),
        })?;
        let goal = goal.ok_or(WorldError::MapParse {
            line: 0,
            reason: "no goal cell".into(),
        })?;
        GridworldState::new(width, height, start, goal, walls)
    }

    /// Renders the text-map form (line 0 northernmost).
    pub fn to_text_map(&self) -> String {
        let mut out = String::new();
        for i in 0..self.height {
            let row = self.height - 1 - i;
            for col in 0..self.width {
                let cell = Cell::new(col, row);
                let ch = if cell == self.agent {
                    'S'
                } else if cell == self.goal {
                    'G'
                } else if self.walls.contains(&cell) {
                    '#'
                } else {
                    '.'
                };
                out.push(ch);
            }
            if i + 1 < self.height {
                out.push('\n');
            }
        }
        out
    }
}

/// The action kind a gridworld accepts: `nav` with payload in {n, s, e, w}.
pub fn nav_kind() -> ActionKind {
    ActionKind::new("nav", PayloadSchema::strings(["n", "s", "e", "w"]))
}

/// Builds the gridworld environment around a validated initial state.
pub fn gridworld_env(initial: GridworldState) -> EnvironmentSpec {
    EnvironmentSpec::new(
        "gridworld",
        format!(
            "A bounded {}x{} grid with walls. A single agent moves one cell at a time in the \
             four cardinal directions; moves off the grid or into walls leave it in place. \
             Entering the goal cell yields reward 1.0, every other transition 0.0.",
            initial.width, initial.height
        ),
        initial.to_value(),
        vec![nav_kind()],
        Arc::new(|state| GridworldState::from_value(state).map(|_| ())),
        Arc::new(|state, action| {
            let grid = GridworldState::from_value(state)?;
            let dir = action
                .payload
                .as_str()
                .and_then(Direction::parse)
                .ok_or_else(|| WorldError::ActionOutsideSchema {
                    kind: action.kind.clone(),
                })?;
            let (next, reward) = grid.apply_nav(dir);
            Ok((next.to_value(), reward))
        }),
    )
}

// ---------------------------------------------------------------------------
// Environment-richness rubric
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RubricAnswer {
    Yes,
    Partial,
    No,
}

impl RubricAnswer {
    pub fn weight(&self) -> f64 {
        match self {
            RubricAnswer::Yes => 1.0,
            RubricAnswer::Partial => 0.5,
            RubricAnswer::No => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionEntry {
    pub answer: RubricAnswer,
    #[serde(default)]
    pub note: String,
}

pub const RUBRIC_KEYS: [&str; 8] = ["C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8"];

/// Eight-criterion environment rubric, keyed C1..C8.
///
/// The entries record human judgments; the tool only aggregates them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, CriterionEntry>", into = "BTreeMap<String, CriterionEntry>")]
pub struct DesiderataRubric {
    entries: BTreeMap<String, CriterionEntry>,
}

impl DesiderataRubric {
    pub fn new(entries: BTreeMap<String, CriterionEntry>) -> Result<Self, WorldError> {
        for key in entries.keys() {
            if !RUBRIC_KEYS.contains(&key.as_str()) {
                return Err(WorldError::UnknownCriterion(key.clone()));
            }
        }
        for key in RUBRIC_KEYS {
            if !entries.contains_key(key) {
                return Err(WorldError::MissingCriterion(key.to_string()));
            }
        }
        Ok(DesiderataRubric { entries })
    }

    /// Rubric with the same answer on all eight criteria.
    pub fn uniform(answer: RubricAnswer) -> Self {
        DesiderataRubric {
            entries: RUBRIC_KEYS
                .iter()
                .map(|k| {
                    (
                        k.to_string(),
                        CriterionEntry {
                            answer,
                            note: String::new(),
                        },
                    )
                })
                .collect(),
        }
    }

    pub fn entries(&self) -> &BTreeMap<String, CriterionEntry> {
        &self.entries
    }

    /// Coverage score: yes counts 1, partial 0.5, no 0, averaged over the
    /// eight criteria. Notes are carried over verbatim.
    pub fn report(&self) -> RubricReport {
        let score = self.entries.values().map(|e| e.answer.weight()).sum::<f64>()
            / RUBRIC_KEYS.len() as f64;
        RubricReport {
            score,
            entries: self.entries.clone(),
        }
    }
}

impl TryFrom<BTreeMap<String, CriterionEntry>> for DesiderataRubric {
    type Error = WorldError;

    fn try_from(entries: BTreeMap<String, CriterionEntry>) -> Result<Self, Self::Error> {
        DesiderataRubric::new(entries)
    }
}

impl From<DesiderataRubric> for BTreeMap<String, CriterionEntry> {
    fn from(r: DesiderataRubric) -> Self {
        r.entries
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RubricReport {
    pub score: f64,
    pub entries: BTreeMap<String, CriterionEntry>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    /// Independent adjacency oracle: neighbours of a cell on a w x h grid,
    /// ignoring walls, computed directly from coordinates.
    fn adjacent(w: u32, h: u32, c: Cell) -> Vec<(Direction, Cell)> {
        let mut out = Vec::new();
        if c.row + 1 < h {
            out.push((Direction::North, Cell::new(c.col, c.row + 1)));
        }
        if c.row > 0 {
            out.push((Direction::South, Cell::new(c.col, c.row - 1)));
        }
        if c.col + 1 < w {
            out.push((Direction::East, Cell::new(c.col + 1, c.row)));
        }
        if c.col > 0 {
            out.push((Direction::West, Cell::new(c.col - 1, c.row)));
        }
        out
    }

    fn open_4x4() -> GridworldState {
        GridworldState::new(4, 4, (0, 0), (3, 3), []).unwrap()
    }

    #[test]
    fn nav_north_moves_one_cell() {
        let env = gridworld_env(open_4x4());
        let (next, reward) = env.step(env.initial_state(), &Action::new("nav", "n")).unwrap();
        let state = GridworldState::from_value(&next).unwrap();
        // expected target from the adjacency oracle
        let oracle = adjacent(4, 4, Cell::new(0, 0))
            .into_iter()
            .find(|(d, _)| *d == Direction::North)
            .unwrap()
            .1;
        assert_eq!(state.agent, oracle);
        assert_eq!(reward, 0.0);
    }

    #[test]
    fn entering_goal_yields_reward_one() {
        let mut grid = open_4x4();
        grid.agent = Cell::new(3, 2);
        let env = gridworld_env(grid.clone());
        let (next, reward) = env.step(&grid.to_value(), &Action::new("nav", "n")).unwrap();
        let state = GridworldState::from_value(&next).unwrap();
        assert_eq!(state.agent, Cell::new(3, 3));
        assert_eq!(reward, 1.0);
    }

    #[test]
    fn off_grid_move_clamps() {
        let env = gridworld_env(open_4x4());
        let (next, reward) = env.step(env.initial_state(), &Action::new("nav", "w")).unwrap();
        let state = GridworldState::from_value(&next).unwrap();
        assert_eq!(state.agent, Cell::new(0, 0));
        assert_eq!(reward, 0.0);
    }

    #[test]
    fn out_of_schema_action_is_an_error() {
        let env = gridworld_env(open_4x4());
        assert!(matches!(
            env.step(env.initial_state(), &Action::new("nav", "up")),
            Err(WorldError::ActionOutsideSchema { .. })
        ));
        assert!(matches!(
            env.step(env.initial_state(), &Action::new("utt", "hello")),
            Err(WorldError::ActionOutsideSchema { .. })
        ));
    }

    #[test]
    fn construction_rejects_bad_geometry() {
        assert!(matches!(
            GridworldState::new(4, 4, (0, 0), (4, 3), []),
            Err(WorldError::OutOfBounds(4, 3))
        ));
        assert!(matches!(
            GridworldState::new(4, 4, (0, 0), (3, 3), [Cell::new(3, 3)]),
            Err(WorldError::CellInWall("goal"))
        ));
        assert!(matches!(
            GridworldState::new(3, 3, (1, 1), (1, 1), []),
            Err(WorldError::StartEqualsGoal)
        ));
    }

    #[test]
    fn full_wall_row_makes_goal_unreachable() {
        // 3x3 with the middle row fully walled. Reachability is checked
        // here against an independent BFS over explicit cell lists.
        let walls = [Cell::new(0, 1), Cell::new(1, 1), Cell::new(2, 1)];
        assert!(matches!(
            GridworldState::new(3, 3, (0, 0), (2, 2), walls),
            Err(WorldError::UnreachableGoal)
        ));
        // same shape with a gap is fine
        let walls = [Cell::new(0, 1), Cell::new(1, 1)];
        assert!(GridworldState::new(3, 3, (0, 0), (2, 2), walls).is_ok());
    }

    #[test]
    fn one_by_one_grid_is_a_valid_degenerate_world() {
        let grid = GridworldState::new(1, 1, (0, 0), (0, 0), []).unwrap();
        assert!(grid.options().is_empty());
    }

    #[test]
    fn corner_options_match_brute_force() {
        let grid = open_4x4();
        assert_eq!(
            grid.options(),
            BTreeSet::from([Direction::North, Direction::East])
        );
        let mut mid = grid.clone();
        mid.agent = Cell::new(1, 1);
        let expected: BTreeSet<Direction> =
            adjacent(4, 4, Cell::new(1, 1)).into_iter().map(|(d, _)| d).collect();
        assert_eq!(mid.options(), expected);
        assert_eq!(mid.options().len(), 4);
    }

    #[test]
    fn options_agree_with_step_effect_exhaustively() {
        // For every agent position on grids up to 6x6 (with a wall pattern),
        // options() is exactly the set of directions whose nav changes the
        // agent cell.
        for (w, h) in [(1u32, 1u32), (2, 3), (4, 4), (6, 6)] {
            let walls: Vec<Cell> = if w >= 4 && h >= 4 {
                vec![Cell::new(1, 1), Cell::new(2, 2)]
            } else {
                vec![]
            };
            let goal = Cell::new(w - 1, h - 1);
            for col in 0..w {
                for row in 0..h {
                    let agent = Cell::new(col, row);
                    if walls.contains(&agent) {
                        continue;
                    }
                    if agent == goal && (w, h) != (1, 1) {
                        continue;
                    }
                    let grid = match GridworldState::new(w, h, agent, goal, walls.clone()) {
                        Ok(g) => g,
                        Err(WorldError::UnreachableGoal) => continue,
                        Err(e) => panic!("unexpected construction error: {e}"),
                    };
                    let moved: BTreeSet<Direction> = ALL_DIRECTIONS
                        .iter()
                        .copied()
                        .filter(|d| grid.apply_nav(*d).0.agent != grid.agent)
                        .collect();
                    assert_eq!(grid.options(), moved, "at {agent:?} on {w}x{h}");
                }
            }
        }
    }

    #[test]
    fn text_map_roundtrip_and_orientation() {
        // Row 0 of the file is the northernmost row, so G sits at the top.
        let map = "...G\n.##.\n....\nS...";
        let grid = GridworldState::from_text_map(map).unwrap();
        assert_eq!(grid.width, 4);
        assert_eq!(grid.height, 4);
        assert_eq!(grid.agent, Cell::new(0, 0));
        assert_eq!(grid.goal, Cell::new(3, 3));
        assert!(grid.walls.contains(&Cell::new(1, 2)));
        assert!(grid.walls.contains(&Cell::new(2, 2)));
        assert_eq!(grid.to_text_map(), map);
    }

    #[test]
    fn text_map_errors_carry_line_numbers() {
        let err = GridworldState::from_text_map("S.G\n..").unwrap_err();
        assert!(matches!(err, WorldError::MapParse { line: 2, .. }));
        let err = GridworldState::from_text_map("S.x\n..G").unwrap_err();
        assert!(matches!(err, WorldError::MapParse { line: 1, .. }));
    }

    #[test]
    fn step_is_deterministic() {
        let env = gridworld_env(open_4x4());
        let a = Action::new("nav", "e");
        let first = env.step(env.initial_state(), &a).unwrap();
        for _ in 0..100 {
            assert_eq!(env.step(env.initial_state(), &a).unwrap(), first);
        }
    }

    #[test]
    fn inert_environment_never_changes() {
        let env = EnvironmentSpec::inert("static", "nothing happens", json!({"n": 1}));
        assert!(!env.accepts_action(&Action::new("utt", "hi")));
        assert!(matches!(
            env.step(env.initial_state(), &Action::new("utt", "hi")),
            Err(WorldError::ActionOutsideSchema { .. })
        ));
    }

    #[test]
    fn rubric_scores() {
        assert_eq!(DesiderataRubric::uniform(RubricAnswer::Yes).report().score, 1.0);
        assert_eq!(DesiderataRubric::uniform(RubricAnswer::No).report().score, 0.0);

        let mut entries = BTreeMap::new();
        for (i, key) in RUBRIC_KEYS.iter().enumerate() {
            entries.insert(
                key.to_string(),
                CriterionEntry {
                    answer: if i < 4 { RubricAnswer::Yes } else { RubricAnswer::Partial },
                    note: format!("note {i}"),
                },
            );
        }
        let rubric = DesiderataRubric::new(entries).unwrap();
        let report = rubric.report();
        assert_eq!(report.score, 0.75);
        assert_eq!(report.entries["C5"].note, "note 4");
    }

    #[test]
    fn rubric_requires_all_eight_criteria() {
        let mut entries = BTreeMap::new();
        entries.insert(
            "C1".to_string(),
            CriterionEntry {
                answer: RubricAnswer::Yes,
                note: String::new(),
            },
        );
        assert!(matches!(
            DesiderataRubric::new(entries),
            Err(WorldError::MissingCriterion(_))
        ));
        let mut entries: BTreeMap<String, CriterionEntry> =
            DesiderataRubric::uniform(RubricAnswer::Yes).entries().clone();
        entries.insert(
            "C9".to_string(),
            CriterionEntry {
                answer: RubricAnswer::Yes,
                note: String::new(),
            },
        );
        assert!(matches!(
            DesiderataRubric::new(entries),
            Err(WorldError::UnknownCriterion(_))
        ));
    }
}
