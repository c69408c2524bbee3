//! Players and game rosters.
//!
//! A game is played by a set of regular players plus exactly one
//! privileged, disinterested player called Nature. Nature relays
//! environment responses and has no strategic interest in the outcome.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Opaque player identifier, unique within a game.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlayerId(String);

impl PlayerId {
    pub fn new(id: impl Into<String>) -> Self {
        PlayerId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for PlayerId {
    fn from(s: &str) -> Self {
        PlayerId::new(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlayerRole {
    Regular,
    Nature,
}

/// A player declaration: identifier plus role.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Player {
    pub id: PlayerId,
    pub role: PlayerRole,
}

impl Player {
    pub fn regular(id: impl Into<String>) -> Self {
        Player {
            id: PlayerId::new(id),
            role: PlayerRole::Regular,
        }
    }

    pub fn nature(id: impl Into<String>) -> Self {
        Player {
            id: PlayerId::new(id),
            role: PlayerRole::Nature,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RosterError {
    #[error("roster declares no Nature player")]
    MissingNature,
    #[error("roster declares more than one Nature player: {0} and {1}")]
    MultipleNature(PlayerId, PlayerId),
    #[error("duplicate player id {0}")]
    DuplicatePlayer(PlayerId),
}

/// Validated set of players: unique ids, exactly one Nature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Player>", into = "Vec<Player>")]
pub struct Roster {
    players: Vec<Player>,
    nature: PlayerId,
}

impl Roster {
    pub fn new(players: Vec<Player>) -> Result<Self, RosterError> {
        let mut nature: Option<PlayerId> = None;
        for (i, p) in players.iter().enumerate() {
            if players[..i].iter().any(|q| q.id == p.id) {
                return Err(RosterError::DuplicatePlayer(p.id.clone()));
            }
            if p.role == PlayerRole::Nature {
                match &nature {
                    Some(first) => {
                        return Err(RosterError::MultipleNature(first.clone(), p.id.clone()))
                    }
                    None => nature = Some(p.id.clone()),
                }
            }
        }
        let nature = nature.ok_or(RosterError::MissingNature)?;
        Ok(Roster { players, nature })
    }

    pub fn players(&self) -> &[Player] {
        &self.players
    }

    pub fn nature(&self) -> &PlayerId {
        &self.nature
    }

    /// Regular player ids in declaration order.
    pub fn regulars(&self) -> impl Iterator<Item = &PlayerId> {
        self.players
            .iter()
            .filter(|p| p.role == PlayerRole::Regular)
            .map(|p| &p.id)
    }

    pub fn contains(&self, id: &PlayerId) -> bool {
        self.players.iter().any(|p| &p.id == id)
    }

    pub fn is_regular(&self, id: &PlayerId) -> bool {
        self.players
            .iter()
            .any(|p| &p.id == id && p.role == PlayerRole::Regular)
    }

    /// All player ids in declaration order.
    pub fn ids(&self) -> impl Iterator<Item = &PlayerId> {
        self.players.iter().map(|p| &p.id)
    }
}

impl TryFrom<Vec<Player>> for Roster {
    type Error = RosterError;

    fn try_from(players: Vec<Player>) -> Result<Self, Self::Error> {
        Roster::new(players)
    }
}

impl From<Roster> for Vec<Player> {
    fn from(r: Roster) -> Self {
        r.players
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roster_requires_exactly_one_nature() {
        let err = Roster::new(vec![Player::regular("p1")]).unwrap_err();
        assert_eq!(err, RosterError::MissingNature);

        let err = Roster::new(vec![Player::nature("N"), Player::nature("M")]).unwrap_err();
        assert!(matches!(err, RosterError::MultipleNature(_, _)));

        let roster = Roster::new(vec![Player::regular("p1"), Player::nature("N")]).unwrap();
        assert_eq!(roster.nature().as_str(), "N");
    }

    #[test]
    fn roster_rejects_duplicate_ids() {
        let err = Roster::new(vec![
            Player::regular("p1"),
            Player::regular("p1"),
            Player::nature("N"),
        ])
        .unwrap_err();
        assert_eq!(err, RosterError::DuplicatePlayer(PlayerId::new("p1")));
    }

    #[test]
    fn regulars_excludes_nature() {
        let roster = Roster::new(vec![
            Player::regular("p1"),
            Player::regular("p2"),
            Player::nature("N"),
        ])
        .unwrap();
        let regs: Vec<_> = roster.regulars().map(|p| p.as_str()).collect();
        assert_eq!(regs, vec!["p1", "p2"]);
    }
}
