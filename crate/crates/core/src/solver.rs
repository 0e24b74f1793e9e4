//! Pure Nash equilibria by incremental demand insertion.
//!
//! Demands start at zero and grow one unit at a time. Each new unit is placed
//! by extending the inserting player's best response by a single element;
//! players disturbed by the extra load then react with single-unit moves until
//! nobody can improve. Throughout the inner loop the loads differ from the
//! previous equilibrium on exactly one resource (the overloaded one), and the
//! sorted vector of per-unit marginal costs decreases lexicographically with
//! every move.

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::best_response::{
    extend_best_response, is_best_response, local_improvement, ordered_greedy, repair_best_response,
};
use crate::error::{Error, Result};
use crate::game::{GameInstance, Profile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlayerSelection {
    /// Lowest-index player with remaining demand.
    #[default]
    MinIndex,
    /// Cycle through players, skipping those already at full demand.
    RoundRobin,
    SeededRandom {
        seed: u64,
    },
}

/// Runtime checks of the invariants the algorithm relies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DebugChecks {
    /// Strict lexicographic decrease of the sorted marginal vector and the
    /// single-overloaded-resource shape of the loads after every move.
    pub potential: bool,
    /// Every improving player uses the overloaded resource.
    pub overload_users: bool,
    /// Optimality preconditions of the demand-increase and repair steps.
    pub preconditions: bool,
}

impl DebugChecks {
    pub fn all() -> Self {
        DebugChecks {
            potential: true,
            overload_users: true,
            preconditions: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolverPolicy {
    pub selection: PlayerSelection,
    pub debug: DebugChecks,
}

impl SolverPolicy {
    pub fn with_debug(mut self) -> Self {
        self.debug = DebugChecks::all();
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    DemandIncrease,
    GreedyExtend,
    ImprovementMove,
    EquilibriumReached,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::DemandIncrease => "demand_increase",
            EventKind::GreedyExtend => "greedy_extend",
            EventKind::ImprovementMove => "improvement_move",
            EventKind::EquilibriumReached => "equilibrium_reached",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "demand_increase" => EventKind::DemandIncrease,
            "greedy_extend" => EventKind::GreedyExtend,
            "improvement_move" => EventKind::ImprovementMove,
            "equilibrium_reached" => EventKind::EquilibriumReached,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub kind: EventKind,
    /// For-loop iteration, starting at 1.
    pub outer: u64,
    /// Number of improvement moves so far in this outer iteration.
    pub inner: u64,
    pub player: Option<usize>,
    /// Unit identity `j` of player `i`, 1-based in insertion order.
    pub unit: Option<u64>,
    pub from: Option<usize>,
    pub to: Option<usize>,
    /// Marginal costs of all inserted units, non-increasing.
    pub marginals: Vec<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
    /// Improvement moves performed in each outer iteration.
    pub inner_counts: Vec<u64>,
}

impl Trace {
    pub fn total_moves(&self) -> u64 {
        self.inner_counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub profile: Profile,
    pub trace: Trace,
}

/// Marginal cost of one demand unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnitMarginal {
    pub player: usize,
    pub resource: usize,
    pub value: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarginalVector {
    pub entries: Vec<UnitMarginal>,
    pub overloaded: Option<usize>,
    pub sorted: Vec<u64>,
}

/// Per-unit marginal costs of a profile.
///
/// A unit of player `i` on resource `r` is worth
/// `c(x_r) x_{i,r} - c(x_r - 1)(x_{i,r} - 1)` when `r` is the overloaded
/// resource and `c(x_r + 1) x_{i,r} - c(x_r)(x_{i,r} - 1)` otherwise. All
/// units of a player on one resource share the value.
pub fn marginal_vector(
    g: &GameInstance,
    p: &Profile,
    overloaded: Option<usize>,
) -> Result<MarginalVector> {
    let loads = p.loads(g.m());
    let mut entries = Vec::new();
    for (i, x) in p.strategies.iter().enumerate() {
        let costs = &g.player(i).costs;
        for (r, &own) in x.0.iter().enumerate() {
            if own == 0 {
                continue;
            }
            let load = if Some(r) == overloaded {
                loads[r]
            } else {
                loads[r] + 1
            };
            let c = &costs[r];
            let hi = c.at(load)?.checked_mul(own).ok_or(Error::Overflow)?;
            let lo = c
                .at(load - 1)?
                .checked_mul(own - 1)
                .ok_or(Error::Overflow)?;
            let value = hi.checked_sub(lo).ok_or(Error::Overflow)?;
            entries.extend((0..own).map(|_| UnitMarginal {
                player: i,
                resource: r,
                value,
            }));
        }
    }
    let mut sorted: Vec<u64> = entries.iter().map(|e| e.value).collect();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    Ok(MarginalVector {
        entries,
        overloaded,
        sorted,
    })
}

/// `n^(δ+1) m^δ δ^(δ+1)` with `δ` the largest demand; zero when all demands are.
pub fn iteration_bound(g: &GameInstance) -> BigUint {
    let delta = g.max_demand();
    if delta == 0 {
        return BigUint::from(0u32);
    }
    let d = delta as u32;
    BigUint::from(g.n()).pow(d + 1) * BigUint::from(g.m()).pow(d) * BigUint::from(delta).pow(d + 1)
}

/// `Σ_i (m d_i)^{d_i}`, the cap on improvement moves within one outer iteration.
pub fn inner_iteration_bound(g: &GameInstance) -> BigUint {
    g.players()
        .iter()
        .map(|p| BigUint::from(g.m() as u64 * p.demand).pow(p.demand as u32))
        .sum()
}

/// Players whose current strategy is not a best response.
///
/// With `check_users` every such player must hold at least one unit on the
/// overloaded resource; otherwise an invariant error describing the state is
/// returned.
pub fn improving_players(
    g: &GameInstance,
    p: &Profile,
    overloaded: Option<usize>,
    check_users: bool,
) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for i in 0..g.n() {
        if is_best_response(g, p, i)? {
            continue;
        }
        if check_users && overloaded.is_none_or(|r| p.strategies[i].0[r] == 0) {
            return Err(Error::Invariant(format!(
                "player {i} can improve without using the overloaded resource {overloaded:?}; \
                 strategies {:?}, loads {:?}",
                p.strategies.iter().map(|x| &x.0).collect::<Vec<_>>(),
                p.loads(g.m())
            )));
        }
        out.push(i);
    }
    Ok(out)
}

/// Snapshot handed to the observer after every outer iteration.
pub struct Checkpoint<'a> {
    pub outer: u64,
    pub demands: &'a [u64],
    pub profile: &'a Profile,
}

pub fn compute_pne(g: &GameInstance, policy: &SolverPolicy) -> Result<Solution> {
    compute_pne_observed(g, policy, |_| {})
}

/// [`compute_pne`] with a callback after each outer iteration, when the
/// profile is an equilibrium of the game at the current partial demands.
pub fn compute_pne_observed(
    g: &GameInstance,
    policy: &SolverPolicy,
    mut observer: impl FnMut(Checkpoint<'_>),
) -> Result<Solution> {
    let (n, m) = (g.n(), g.m());
    let debug = policy.debug;
    let mut demands = vec![0u64; n];
    let mut profile = Profile::empty(n, m);
    // units[i][j-1] is the resource holding unit j of player i.
    let mut units: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut trace = Trace::default();
    let per_outer = inner_iteration_bound(g);
    let mut chooser = Chooser::new(policy.selection);

    for k in 1..=g.total_demand() {
        let i = chooser.pick(g, &demands)?;
        demands[i] += 1;
        let unit = demands[i];
        let rank = &g.player(i).rank;

        trace.events.push(TraceEvent {
            kind: EventKind::DemandIncrease,
            outer: k,
            inner: 0,
            player: Some(i),
            unit: Some(unit),
            from: None,
            to: None,
            marginals: marginal_vector(g, &profile, None)?.sorted,
        });

        let base_loads = profile.loads(m);
        let a = profile.opponent_loads(m, i);
        let w = g.induced_weights(i, &a)?;
        let x = &profile.strategies[i];
        if debug.preconditions {
            if let Some(step) = local_improvement(rank, x, &w)? {
                return Err(Error::Invariant(format!(
                    "player {i} was not optimal before its demand increase ({} -> {})",
                    step.remove, step.add
                )));
            }
        }
        let y = extend_best_response(rank, &w, x)?;
        let r0 = (0..m).find(|&r| y.0[r] != x.0[r]).ok_or_else(|| {
            Error::Invariant("demand increase left the strategy unchanged".into())
        })?;
        if debug.preconditions && local_improvement(rank, &y, &w)?.is_some() {
            return Err(Error::Invariant(format!(
                "extension of player {i} onto resource {r0} is not a best response"
            )));
        }
        profile.strategies[i] = y;
        units[i].push(r0);

        let mut overloaded = r0;
        let mut current = marginal_vector(g, &profile, Some(r0))?.sorted;
        trace.events.push(TraceEvent {
            kind: EventKind::GreedyExtend,
            outer: k,
            inner: 0,
            player: Some(i),
            unit: Some(unit),
            from: None,
            to: Some(r0),
            marginals: current.clone(),
        });

        let mut inner = 0u64;
        loop {
            let improving = improving_players(g, &profile, Some(overloaded), debug.overload_users)?;
            let Some(&j) = improving.first() else { break };
            inner += 1;
            if BigUint::from(inner) > per_outer {
                return Err(Error::Invariant(format!(
                    "outer iteration {k} exceeded {per_outer} improvement moves"
                )));
            }

            let a = profile.opponent_loads(m, j);
            if a[overloaded] == 0 {
                return Err(Error::Invariant(format!(
                    "player {j} improves but no opponent occupies overloaded resource {overloaded}"
                )));
            }
            let mut before = a.clone();
            before[overloaded] -= 1;
            let rank = &g.player(j).rank;
            let w_old = g.induced_weights(j, &before)?;
            let w_new = g.induced_weights(j, &a)?;
            let x = &profile.strategies[j];
            let repair =
                repair_best_response(rank, x, overloaded, &w_old, &w_new, debug.preconditions)?;
            let step = repair.swap.ok_or_else(|| {
                Error::Invariant(format!(
                    "player {j} can improve but has no improving exchange"
                ))
            })?;
            let optimum = ordered_greedy(rank, x.size(), &w_new)?;
            if w_new.ideal_weight(&repair.ideal)? != w_new.ideal_weight(&optimum)? {
                return Err(Error::Invariant(format!(
                    "player {j} has no best response one unit away from {:?}",
                    x.0
                )));
            }

            let (from, to) = (step.remove.resource, step.add.resource);
            let slot = units[j]
                .iter()
                .rposition(|&r| r == from)
                .ok_or_else(|| Error::Invariant(format!("player {j} has no unit on {from}")))?;
            units[j][slot] = to;
            profile.strategies[j] = repair.ideal;

            if debug.potential {
                let loads = profile.loads(m);
                let shape_ok = (0..m).all(|r| loads[r] == base_loads[r] + u64::from(r == to));
                if !shape_ok {
                    return Err(Error::Invariant(format!(
                        "loads {loads:?} are not the previous equilibrium {base_loads:?} plus one unit on {to}"
                    )));
                }
            }
            let next = marginal_vector(g, &profile, Some(to))?.sorted;
            if debug.potential && next >= current {
                return Err(Error::Invariant(format!(
                    "marginal vector did not decrease: {current:?} -> {next:?}"
                )));
            }
            trace.events.push(TraceEvent {
                kind: EventKind::ImprovementMove,
                outer: k,
                inner,
                player: Some(j),
                unit: Some(slot as u64 + 1),
                from: Some(from),
                to: Some(to),
                marginals: next.clone(),
            });
            current = next;
            overloaded = to;
        }

        trace.inner_counts.push(inner);
        trace.events.push(TraceEvent {
            kind: EventKind::EquilibriumReached,
            outer: k,
            inner,
            player: None,
            unit: None,
            from: None,
            to: None,
            marginals: current,
        });
        observer(Checkpoint {
            outer: k,
            demands: &demands,
            profile: &profile,
        });
    }

    let total = BigUint::from(trace.total_moves());
    if total > iteration_bound(g) {
        return Err(Error::Invariant(format!(
            "{total} improvement moves exceed the bound {}",
            iteration_bound(g)
        )));
    }
    Ok(Solution { profile, trace })
}

struct Chooser {
    selection: PlayerSelection,
    next: usize,
    rng: Option<ChaCha8Rng>,
}

impl Chooser {
    fn new(selection: PlayerSelection) -> Self {
        let rng = match selection {
            PlayerSelection::SeededRandom { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        Chooser {
            selection,
            next: 0,
            rng,
        }
    }

    fn pick(&mut self, g: &GameInstance, demands: &[u64]) -> Result<usize> {
        let open = |i: usize| demands[i] < g.player(i).demand;
        let n = g.n();
        let choice = match self.selection {
            PlayerSelection::MinIndex => (0..n).find(|&i| open(i)),
            PlayerSelection::RoundRobin => {
                let found = (0..n).map(|s| (self.next + s) % n).find(|&i| open(i));
                if let Some(i) = found {
                    self.next = (i + 1) % n;
                }
                found
            }
            PlayerSelection::SeededRandom { .. } => {
                let eligible: Vec<usize> = (0..n).filter(|&i| open(i)).collect();
                let rng = self.rng.as_mut().expect("seeded selection carries an rng");
                (!eligible.is_empty()).then(|| eligible[rng.gen_range(0..eligible.len())])
            }
        };
        choice.ok_or_else(|| Error::Invariant("no player with remaining demand".into()))
    }
}
