//! Brute-force ground truth for small games.
//!
//! Nothing here goes through the greedy machinery, the induced weights or the
//! polytope membership test of [`crate::polymatroid`]: strategies are found by
//! scanning every count vector and testing each subset sum directly, and costs
//! are read straight off the tables.

use crate::error::{Error, Result};
use crate::game::{GameInstance, Profile};
use crate::polymatroid::Ideal;

/// Environment variable overriding both enumeration caps.
pub const MAX_ENUM_ENV: &str = "POLYNASH_MAX_ENUM";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleCaps {
    pub per_player: u64,
    pub profiles: u64,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps {
            per_player: 1_000_000,
            profiles: 10_000_000,
        }
    }
}

impl OracleCaps {
    /// Defaults, with both caps replaced by `POLYNASH_MAX_ENUM` when it parses.
    pub fn from_env() -> Self {
        match std::env::var(MAX_ENUM_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
        {
            Some(cap) => OracleCaps {
                per_player: cap,
                profiles: cap,
            },
            None => OracleCaps::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub player: usize,
    pub current_cost: u64,
    pub best_cost: u64,
    pub witness: Ideal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub is_pne: bool,
    pub violations: Vec<Violation>,
}

fn fits(rank: &[u64], x: &[u64]) -> bool {
    (1..rank.len()).all(|s| {
        let used: u64 = x
            .iter()
            .enumerate()
            .filter(|(r, _)| s & (1 << r) != 0)
            .map(|(_, &v)| v)
            .sum();
        used <= rank[s]
    })
}

/// Every strategy of player `i` in lexicographic order.
pub fn strategies(g: &GameInstance, i: usize, cap: u64) -> Result<Vec<Ideal>> {
    let player = g.player(i);
    let rank = player.rank.values();
    let m = g.m();
    let d = player.demand;
    let mut out = Vec::new();
    let mut x = vec![0u64; m];
    // Odometer over [0, d]^m, last coordinate fastest.
    loop {
        if x.iter().sum::<u64>() == d && fits(rank, &x) {
            if out.len() as u64 >= cap {
                return Err(Error::EnumerationTooLarge { cap });
            }
            out.push(Ideal(x.clone()));
        }
        let mut r = m;
        loop {
            if r == 0 {
                return Ok(out);
            }
            r -= 1;
            if x[r] < d {
                x[r] += 1;
                break;
            }
            x[r] = 0;
        }
    }
}

fn cost_against(g: &GameInstance, i: usize, opponents: &[u64], y: &Ideal) -> Result<u64> {
    let tables = &g.player(i).costs;
    let mut total: u64 = 0;
    for (r, &own) in y.0.iter().enumerate() {
        let load = opponents[r] + own;
        let c = *tables[r]
            .values()
            .get(load as usize)
            .ok_or(Error::TableOverflow {
                index: load,
                len: tables[r].len(),
            })?;
        total = c
            .checked_mul(own)
            .and_then(|v| total.checked_add(v))
            .ok_or(Error::Overflow)?;
    }
    Ok(total)
}

fn opponents(g: &GameInstance, p: &Profile, i: usize) -> Vec<u64> {
    let mut a = vec![0u64; g.m()];
    for (j, x) in p.strategies.iter().enumerate() {
        if j != i {
            for (r, &v) in x.0.iter().enumerate() {
                a[r] += v;
            }
        }
    }
    a
}

/// Cheapest strategy of player `i` against the others in `p`; the first in
/// lexicographic order among ties.
pub fn brute_force_best_response(
    g: &GameInstance,
    p: &Profile,
    i: usize,
    caps: &OracleCaps,
) -> Result<(Ideal, u64)> {
    let a = opponents(g, p, i);
    let mut best: Option<(Ideal, u64)> = None;
    for y in strategies(g, i, caps.per_player)? {
        let c = cost_against(g, i, &a, &y)?;
        if best.as_ref().is_none_or(|(_, bc)| c < *bc) {
            best = Some((y, c));
        }
    }
    best.ok_or_else(|| Error::InvalidProfile {
        player: i,
        reason: "strategy space is empty".into(),
    })
}

fn check_shape(g: &GameInstance, p: &Profile) -> Result<()> {
    if p.strategies.len() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            found: p.strategies.len(),
        });
    }
    for (i, x) in p.strategies.iter().enumerate() {
        let player = g.player(i);
        if x.0.len() != g.m()
            || x.0.iter().sum::<u64>() != player.demand
            || !fits(player.rank.values(), &x.0)
        {
            return Err(Error::InvalidProfile {
                player: i,
                reason: format!("{:?} is not a strategy", x.0),
            });
        }
    }
    Ok(())
}

/// Compares every player's cost with their brute-force optimum.
pub fn verify_pne(g: &GameInstance, p: &Profile, caps: &OracleCaps) -> Result<VerificationReport> {
    check_shape(g, p)?;
    let mut violations = Vec::new();
    for i in 0..g.n() {
        let a = opponents(g, p, i);
        let current_cost = cost_against(g, i, &a, &p.strategies[i])?;
        let (witness, best_cost) = brute_force_best_response(g, p, i, caps)?;
        if best_cost < current_cost {
            violations.push(Violation {
                player: i,
                current_cost,
                best_cost,
                witness,
            });
        }
    }
    Ok(VerificationReport {
        is_pne: violations.is_empty(),
        violations,
    })
}

/// Every pure Nash equilibrium, in lexicographic order of the profile.
pub fn exhaustive_pne_search(g: &GameInstance, caps: &OracleCaps) -> Result<Vec<Profile>> {
    let spaces = (0..g.n())
        .map(|i| strategies(g, i, caps.per_player))
        .collect::<Result<Vec<_>>>()?;
    let count = spaces
        .iter()
        .try_fold(1u64, |acc, s| acc.checked_mul(s.len() as u64))
        .unwrap_or(u64::MAX);
    if count > caps.profiles {
        return Err(Error::EnumerationTooLarge { cap: caps.profiles });
    }
    let mut out = Vec::new();
    if spaces.iter().any(|s| s.is_empty()) {
        return Ok(out);
    }
    let mut pick = vec![0usize; g.n()];
    loop {
        let profile = Profile::new(
            pick.iter()
                .zip(&spaces)
                .map(|(&k, s)| s[k].clone())
                .collect(),
        );
        if is_equilibrium(g, &profile, &spaces)? {
            out.push(profile);
        }
        let mut i = g.n();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            pick[i] += 1;
            if pick[i] < spaces[i].len() {
                break;
            }
            pick[i] = 0;
        }
    }
}

fn is_equilibrium(g: &GameInstance, p: &Profile, spaces: &[Vec<Ideal>]) -> Result<bool> {
    for (i, space) in spaces.iter().enumerate() {
        let a = opponents(g, p, i);
        let current = cost_against(g, i, &a, &p.strategies[i])?;
        for y in space {
            if cost_against(g, i, &a, y)? < current {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
