//! Core library for simulating language tasks, micro-world environments,
//! and turn-based interaction games.
//!
//! The crate is organised around three formal objects and the tooling that
//! makes them runnable and auditable:
//!
//! - [`tasks`]: single-step mappings from an input space to an output space
//!   where at least one side carries natural language, together with
//!   extensional datasets, verification, and predictor evaluation.
//! - [`worlds`]: environments that map `(state, action)` to
//!   `(state', reward)`, including a reference gridworld and an
//!   eight-criterion environment-richness rubric.
//! - [`games`]: multi-player interaction games built from players (including
//!   the disinterested player Nature), per-player action spaces, an
//!   observability rule, a turn-taking rule, and an evaluation rule — plus
//!   the orchestrator that runs them deterministically, records transcripts,
//!   and re-verifies transcripts after the fact.
//!
//! [`refgames`] ships fully configured built-in games, and [`diagnostics`]
//! provides dataset bias probes (deprivation tests against majority
//! baselines) and capability-set bookkeeping.
//!
//! All simulation is deterministic: identical specs, policies, limits, and
//! seeds produce byte-identical transcripts.

pub mod action;
pub mod diagnostics;
pub mod games;
pub mod player;
pub mod record;
pub mod refgames;
pub mod tasks;
pub mod worlds;

pub use action::{Action, ActionError, ActionKind, ActionSpace, ActionToken, PayloadSchema};
pub use player::{Player, PlayerId, PlayerRole, Roster, RosterError};
pub use record::{
    FieldSchema, Modality, ModalField, ModalRecord, ModalityProfile, RecordError, RecordSchema,
};
