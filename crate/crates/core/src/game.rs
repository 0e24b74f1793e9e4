//! Game instances, cost tables and the weights they induce on chain elements.

use std::fmt;

use crate::error::{Error, Result};
use crate::polymatroid::{Element, Ideal, RankFunction};

/// Quadruple `(a, b, x, y)` with `a <= b`, `1 <= x <= y` for which
/// `c(a+x)x - c(a+x-1)(x-1) > c(b+y)y - c(b+y-1)(y-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SscWitness {
    pub a: u64,
    pub b: u64,
    pub x: u64,
    pub y: u64,
}

impl fmt::Display for SscWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(a={}, b={}, x={}, y={})",
            self.a, self.b, self.x, self.y
        )
    }
}

/// Nondecreasing cost function `c(0..=len-1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostTable(Vec<u64>);

impl CostTable {
    pub fn new(values: Vec<u64>) -> Result<Self> {
        if let Some(i) = values.windows(2).position(|w| w[0] > w[1]) {
            return Err(Error::CostDecrease {
                index: i + 1,
                before: values[i],
                after: values[i + 1],
            });
        }
        Ok(CostTable(values))
    }

    pub fn from_fn(len: usize, f: impl FnMut(u64) -> u64) -> Result<Self> {
        CostTable::new((0..len as u64).map(f).collect())
    }

    pub fn values(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn at(&self, load: u64) -> Result<u64> {
        self.0
            .get(load as usize)
            .copied()
            .ok_or(Error::TableOverflow {
                index: load,
                len: self.0.len(),
            })
    }

    /// Nondecreasing first differences over the whole table.
    pub fn is_convex(&self) -> bool {
        self.0
            .windows(3)
            .all(|w| w[1] as i128 - w[0] as i128 <= w[2] as i128 - w[1] as i128)
    }

    // c(a+x)x - c(a+x-1)(x-1); nonnegative because the table is nondecreasing.
    fn marginal(&self, a: u64, x: u64) -> i128 {
        let k = (a + x) as usize;
        self.0[k] as i128 * x as i128 - self.0[k - 1] as i128 * (x as i128 - 1)
    }

    /// First violated strong semi-convexity quadruple with all loads within
    /// `horizon` and, when `u` is given, `y <= u`.
    ///
    /// The marginal `M(a, x)` must be monotone in both arguments over the
    /// triangle `a + x <= horizon`; the triangle is closed under moving `x` up
    /// before `a`, so unit steps in each coordinate suffice.
    pub fn ssc_violation(&self, horizon: u64, u: Option<u64>) -> Result<Option<SscWitness>> {
        let needed = horizon as usize + 1;
        if self.0.len() < needed {
            return Err(Error::TableTooShort {
                needed,
                len: self.0.len(),
            });
        }
        let x_max = u.unwrap_or(horizon).min(horizon);
        for x in 1..=x_max {
            for a in 0..=(horizon - x) {
                let here = self.marginal(a, x);
                if a + x < horizon && here > self.marginal(a + 1, x) {
                    return Ok(Some(SscWitness {
                        a,
                        b: a + 1,
                        x,
                        y: x,
                    }));
                }
                if x < x_max && a + x < horizon && here > self.marginal(a, x + 1) {
                    return Ok(Some(SscWitness {
                        a,
                        b: a,
                        x,
                        y: x + 1,
                    }));
                }
            }
        }
        Ok(None)
    }
}

/// Strong semi-convexity over all loads up to `horizon`.
pub fn check_ssc(c: &CostTable, horizon: u64) -> Result<bool> {
    Ok(c.ssc_violation(horizon, None)?.is_none())
}

/// `u`-truncated strong semi-convexity over the whole table.
pub fn check_truncated_ssc(c: &CostTable, u: u64) -> Result<bool> {
    if c.is_empty() {
        return Err(Error::TableTooShort { needed: 1, len: 0 });
    }
    Ok(c.ssc_violation(c.len() as u64 - 1, Some(u))?.is_none())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Player {
    pub demand: u64,
    pub rank: RankFunction,
    pub costs: Vec<CostTable>,
}

impl Player {
    pub fn new(demand: u64, rank: RankFunction, costs: Vec<CostTable>) -> Self {
        Player {
            demand,
            rank,
            costs,
        }
    }

    /// Chain length of resource `r` restricted to what the demand can use.
    pub fn usable_chain(&self, r: usize) -> u64 {
        self.rank.singleton(r).min(self.demand)
    }
}

/// A validated congestion game on integral polymatroids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameInstance {
    resources: Vec<String>,
    players: Vec<Player>,
    total_demand: u64,
}

impl GameInstance {
    /// Validates feasibility of every demand and the cost assumptions eagerly.
    pub fn new(resources: Vec<String>, players: Vec<Player>) -> Result<Self> {
        let m = resources.len();
        let total_demand = players
            .iter()
            .try_fold(0u64, |acc, p| acc.checked_add(p.demand))
            .ok_or(Error::Overflow)?;
        for (i, p) in players.iter().enumerate() {
            if p.rank.resources() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: p.rank.resources(),
                });
            }
            if let Some(&violation) = p.rank.validate().violations.first() {
                return Err(Error::InvalidRank {
                    player: i,
                    violation,
                });
            }
            if p.demand > p.rank.total() {
                return Err(Error::InfeasibleDemand {
                    player: i,
                    demand: p.demand,
                    capacity: p.rank.total(),
                });
            }
            if p.costs.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: p.costs.len(),
                });
            }
            for (r, c) in p.costs.iter().enumerate() {
                let needed = total_demand as usize + 1;
                if c.len() < needed {
                    return Err(Error::TableTooShort {
                        needed,
                        len: c.len(),
                    });
                }
                let u = p.rank.singleton(r);
                if let Some(witness) = c.ssc_violation(total_demand, Some(u))? {
                    return Err(Error::CostNotSemiConvex {
                        player: i,
                        resource: r,
                        u,
                        witness,
                    });
                }
            }
        }
        Ok(GameInstance {
            resources,
            players,
            total_demand,
        })
    }

    pub fn resources(&self) -> &[String] {
        &self.resources
    }

    pub fn players(&self) -> &[Player] {
        &self.players
    }

    pub fn player(&self, i: usize) -> &Player {
        &self.players[i]
    }

    pub fn n(&self) -> usize {
        self.players.len()
    }

    pub fn m(&self) -> usize {
        self.resources.len()
    }

    pub fn total_demand(&self) -> u64 {
        self.total_demand
    }

    pub fn max_demand(&self) -> u64 {
        self.players.iter().map(|p| p.demand).max().unwrap_or(0)
    }

    /// Same game with different demands; cost tables are kept as they are.
    pub fn with_demands(&self, demands: &[u64]) -> Result<GameInstance> {
        if demands.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: demands.len(),
            });
        }
        let players = self
            .players
            .iter()
            .zip(demands)
            .map(|(p, &d)| Player::new(d, p.rank.clone(), p.costs.clone()))
            .collect();
        GameInstance::new(self.resources.clone(), players)
    }

    /// Checks dimensions and polymatroid membership of every strategy. With
    /// `exact_demand` each strategy must also carry its player's full demand.
    pub fn check_profile(&self, p: &Profile, exact_demand: bool) -> Result<()> {
        if p.strategies.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: p.strategies.len(),
            });
        }
        for (i, (x, player)) in p.strategies.iter().zip(&self.players).enumerate() {
            if x.0.len() != self.m() {
                return Err(Error::InvalidProfile {
                    player: i,
                    reason: format!("strategy has {} entries, expected {}", x.0.len(), self.m()),
                });
            }
            if x.size() > player.demand || (exact_demand && x.size() != player.demand) {
                return Err(Error::InvalidProfile {
                    player: i,
                    reason: format!("strategy sums to {}, demand is {}", x.size(), player.demand),
                });
            }
            if !player.rank.member_polytope(&x.0)? {
                return Err(Error::InvalidProfile {
                    player: i,
                    reason: "strategy violates the rank constraints".into(),
                });
            }
        }
        Ok(())
    }

    /// `π_i(x) = Σ_r c_{i,r}(x_r) x_{i,r}`.
    pub fn private_cost(&self, p: &Profile, i: usize) -> Result<u64> {
        let loads = p.loads(self.m());
        let player = &self.players[i];
        let mut total = 0u64;
        for (r, &own) in p.strategies[i].0.iter().enumerate() {
            if own == 0 {
                continue;
            }
            let term = player.costs[r]
                .at(loads[r])?
                .checked_mul(own)
                .ok_or(Error::Overflow)?;
            total = total.checked_add(term).ok_or(Error::Overflow)?;
        }
        Ok(total)
    }

    /// Weights `w(r_t) = t c(a_r + t) - (t-1) c(a_r + t - 1)` for player `i`
    /// facing opponent loads `a`. Chains are cut at the player's demand.
    pub fn induced_weights(&self, i: usize, a: &[u64]) -> Result<WeightedGround> {
        if a.len() != self.m() {
            return Err(Error::DimensionMismatch {
                expected: self.m(),
                found: a.len(),
            });
        }
        let player = &self.players[i];
        let mut weights = Vec::with_capacity(self.m());
        for (r, &load) in a.iter().enumerate() {
            let c = &player.costs[r];
            let len = player.usable_chain(r);
            let mut chain = Vec::with_capacity(len as usize);
            for t in 1..=len {
                let hi = c.at(load + t)?.checked_mul(t).ok_or(Error::Overflow)?;
                let lo = c
                    .at(load + t - 1)?
                    .checked_mul(t - 1)
                    .ok_or(Error::Overflow)?;
                chain.push(hi.checked_sub(lo).ok_or(Error::Overflow)?);
            }
            weights.push(chain);
        }
        WeightedGround::new(weights)
    }
}

/// One count vector per player.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Profile {
    pub strategies: Vec<Ideal>,
}

impl Profile {
    pub fn new(strategies: Vec<Ideal>) -> Self {
        Profile { strategies }
    }

    pub fn empty(n: usize, m: usize) -> Self {
        Profile {
            strategies: vec![Ideal::empty(m); n],
        }
    }

    pub fn loads(&self, m: usize) -> Vec<u64> {
        let mut loads = vec![0u64; m];
        for x in &self.strategies {
            for (l, &c) in loads.iter_mut().zip(&x.0) {
                *l += c;
            }
        }
        loads
    }

    /// Loads of everyone except player `i`.
    pub fn opponent_loads(&self, m: usize, i: usize) -> Vec<u64> {
        let mut loads = self.loads(m);
        for (l, &c) in loads.iter_mut().zip(&self.strategies[i].0) {
            *l -= c;
        }
        loads
    }
}

/// Admissible weights on chain elements; `weights[r][t-1]` is `w(r_t)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedGround {
    weights: Vec<Vec<u64>>,
}

impl WeightedGround {
    /// Rejects weights that decrease along a chain.
    pub fn new(weights: Vec<Vec<u64>>) -> Result<Self> {
        for (r, chain) in weights.iter().enumerate() {
            if let Some(t) = chain.windows(2).position(|w| w[0] > w[1]) {
                return Err(Error::NotAdmissible {
                    resource: r,
                    position: t as u64 + 1,
                });
            }
        }
        Ok(WeightedGround { weights })
    }

    pub fn resources(&self) -> usize {
        self.weights.len()
    }

    pub fn chain(&self, r: usize) -> &[u64] {
        &self.weights[r]
    }

    pub fn chain_len(&self, r: usize) -> u64 {
        self.weights[r].len() as u64
    }

    pub fn weight(&self, e: Element) -> Option<u64> {
        if e.position == 0 {
            return None;
        }
        self.weights
            .get(e.resource)
            .and_then(|c| c.get(e.position as usize - 1))
            .copied()
    }

    /// Total weight of an ideal.
    pub fn ideal_weight(&self, x: &Ideal) -> Result<u64> {
        if x.0.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                found: x.0.len(),
            });
        }
        let mut total = 0u64;
        for (r, &c) in x.0.iter().enumerate() {
            let chain = &self.weights[r];
            if c as usize > chain.len() {
                return Err(Error::MissingWeights {
                    resource: r,
                    have: chain.len(),
                    need: c,
                });
            }
            for &w in &chain[..c as usize] {
                total = total.checked_add(w).ok_or(Error::Overflow)?;
            }
        }
        Ok(total)
    }

    /// Fails unless every chain carries weights for positions up to
    /// `min(f({r}), d)`.
    pub(crate) fn require_cover(&self, f: &RankFunction, d: u64) -> Result<()> {
        if self.weights.len() != f.resources() {
            return Err(Error::DimensionMismatch {
                expected: f.resources(),
                found: self.weights.len(),
            });
        }
        for (r, chain) in self.weights.iter().enumerate() {
            let need = f.singleton(r).min(d);
            if (chain.len() as u64) < need {
                return Err(Error::MissingWeights {
                    resource: r,
                    have: chain.len(),
                    need,
                });
            }
        }
        Ok(())
    }
}
