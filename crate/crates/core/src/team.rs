//! Candidate ensembles: team identity and streaming enumeration.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Pools up to this size print teams as concatenated digits ("139").
pub const DIGIT_KEY_MAX_MODELS: usize = 10;

/// A candidate ensemble: strictly increasing model ids plus a canonical key.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EnsembleTeam {
    members: Vec<usize>,
    key: String,
}

impl EnsembleTeam {
    /// Builds a team over a pool of `pool_size` models. Member order does not
    /// matter; duplicates and out-of-range ids are rejected.
    pub fn new(mut members: Vec<usize>, pool_size: usize) -> Result<Self> {
        members.sort_unstable();
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidTeam(format!(
                "duplicate member in {members:?}"
            )));
        }
        if let Some(&id) = members.iter().find(|&&id| id >= pool_size) {
            return Err(Error::UnknownModel {
                id,
                models: pool_size,
            });
        }
        if members.len() < 2 {
            return Err(Error::InvalidTeam(format!(
                "a team needs 2 or more members, got {members:?}"
            )));
        }
        let key = team_key(&members, pool_size);
        Ok(Self { members, key })
    }

    /// Parses a key in the form [`EnsembleTeam::key`] prints it.
    pub fn parse(key: &str, pool_size: usize) -> Result<Self> {
        let bad = || Error::InvalidTeam(format!("cannot parse team {key:?}"));
        let members = if pool_size <= DIGIT_KEY_MAX_MODELS && !key.contains('-') {
            key.chars()
                .map(|ch| ch.to_digit(10).map(|d| d as usize).ok_or_else(bad))
                .collect::<Result<Vec<_>>>()?
        } else {
            key.split('-')
                .map(|s| s.trim().parse::<usize>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?
        };
        Self::new(members, pool_size)
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn key(&self) -> &str {
        &self.key
    }

    pub fn contains(&self, id: usize) -> bool {
        self.members.binary_search(&id).is_ok()
    }
}

impl fmt::Display for EnsembleTeam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key)
    }
}

impl Serialize for EnsembleTeam {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.key)
    }
}

fn team_key(members: &[usize], pool_size: usize) -> String {
    if pool_size <= DIGIT_KEY_MAX_MODELS {
        members
            .iter()
            .map(|d| char::from(b'0' + *d as u8))
            .collect()
    } else {
        members
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join("-")
    }
}

/// Number of teams [`enumerate_teams`] yields for the same bounds.
pub fn team_count(pool_size: usize, min_size: usize, max_size: usize) -> u128 {
    (min_size..=max_size.min(pool_size))
        .map(|s| binomial(pool_size as u128, s as u128))
        .sum()
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Streams every subset of `0..pool_size` with size in `[min_size, max_size]`,
/// ordered by size and then lexicographically.
pub fn enumerate_teams(pool_size: usize, min_size: usize, max_size: usize) -> Result<TeamIter> {
    if !(2 <= min_size && min_size <= max_size && max_size <= pool_size) {
        return Err(Error::SizeBounds {
            min: min_size,
            max: max_size,
            models: pool_size,
        });
    }
    Ok(TeamIter {
        pool_size,
        max_size,
        current: (0..min_size).collect(),
        done: false,
    })
}

#[derive(Debug, Clone)]
pub struct TeamIter {
    pool_size: usize,
    max_size: usize,
    current: Vec<usize>,
    done: bool,
}

impl TeamIter {
    fn advance(&mut self) {
        let (n, k) = (self.pool_size, self.current.len());
        // rightmost position that can still move
        match (0..k).rev().find(|&i| self.current[i] < n - k + i) {
            Some(i) => {
                self.current[i] += 1;
                for t in i + 1..k {
                    self.current[t] = self.current[t - 1] + 1;
                }
            }
            None if k < self.max_size => self.current = (0..k + 1).collect(),
            None => self.done = true,
        }
    }
}

impl Iterator for TeamIter {
    type Item = EnsembleTeam;

    fn next(&mut self) -> Option<EnsembleTeam> {
        if self.done {
            return None;
        }
        let members = self.current.clone();
        self.advance();
        let key = team_key(&members, self.pool_size);
        Some(EnsembleTeam { members, key })
    }
}
