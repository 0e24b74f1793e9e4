//! Minimum-weight ideals of a truncated polymatroid under admissible weights.
//!
//! A best response of a player is exactly a minimum-weight ideal of size
//! `d_i` under the weights induced by the opponents' loads, so everything here
//! works on a rank function plus a [`WeightedGround`]. Ties are broken towards
//! the lowest resource index.

use crate::error::{Error, Result};
use crate::game::{GameInstance, Profile, WeightedGround};
use crate::polymatroid::{Element, Ideal, RankFunction};

/// Exchange `F -> F - remove + add` that lowers the weight by `improvement`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwapStep {
    pub remove: Element,
    pub add: Element,
    pub improvement: u64,
}

impl SwapStep {
    pub fn apply(&self, x: &Ideal) -> Ideal {
        let mut y = x.clone();
        y.0[self.remove.resource] -= 1;
        y.0[self.add.resource] += 1;
        y
    }
}

/// Minimal elements of `E \ F` whose addition stays inside `P_f`.
pub fn feasible_additions(f: &RankFunction, x: &Ideal) -> Result<Vec<Element>> {
    let mut out = Vec::new();
    for r in 0..f.resources() {
        if x.0[r] >= f.singleton(r) {
            continue;
        }
        if f.member_polytope(&x.with_added(r).0)? {
            out.push(Element::new(r, x.0[r] + 1));
        }
    }
    Ok(out)
}

fn check_ideal(f: &RankFunction, x: &Ideal) -> Result<()> {
    if x.0.len() != f.resources() {
        return Err(Error::DimensionMismatch {
            expected: f.resources(),
            found: x.0.len(),
        });
    }
    Ok(())
}

fn cheapest_addition(f: &RankFunction, x: &Ideal, w: &WeightedGround) -> Result<Option<Element>> {
    let mut best: Option<(u64, Element)> = None;
    for e in feasible_additions(f, x)? {
        let we = w.weight(e).ok_or(Error::MissingWeights {
            resource: e.resource,
            have: w.chain_len(e.resource) as usize,
            need: e.position,
        })?;
        if best.is_none_or(|(bw, _)| we < bw) {
            best = Some((we, e));
        }
    }
    Ok(best.map(|(_, e)| e))
}

/// Elements picked by the ordered greedy algorithm, in order. The first `k`
/// of them form a minimum-weight ideal of size `k`.
pub fn ordered_greedy_steps(f: &RankFunction, d: u64, w: &WeightedGround) -> Result<Vec<Element>> {
    if d > f.total() {
        return Err(Error::InfeasibleTruncation {
            demand: d,
            capacity: f.total(),
        });
    }
    w.require_cover(f, d)?;
    let mut x = Ideal::empty(f.resources());
    let mut picked = Vec::with_capacity(d as usize);
    for _ in 0..d {
        let e = cheapest_addition(f, &x, w)?.ok_or_else(|| {
            Error::Invariant(format!(
                "no feasible addition at size {} below f(R)",
                x.size()
            ))
        })?;
        x.0[e.resource] += 1;
        picked.push(e);
    }
    Ok(picked)
}

/// Minimum-weight ideal with exactly `d` elements.
pub fn ordered_greedy(f: &RankFunction, d: u64, w: &WeightedGround) -> Result<Ideal> {
    let mut x = Ideal::empty(f.resources());
    for e in ordered_greedy_steps(f, d, w)? {
        x.0[e.resource] += 1;
    }
    Ok(x)
}

/// Grows a minimum-weight ideal of size `d` into one of size `d + 1` by adding
/// the cheapest feasible element.
pub fn extend_best_response(f: &RankFunction, w: &WeightedGround, x: &Ideal) -> Result<Ideal> {
    check_ideal(f, x)?;
    let target = x.size() + 1;
    if target > f.total() {
        return Err(Error::InfeasibleTruncation {
            demand: target,
            capacity: f.total(),
        });
    }
    w.require_cover(f, target)?;
    let e = cheapest_addition(f, x, w)?
        .ok_or_else(|| Error::Invariant("ideal below f(R) has no feasible addition".into()))?;
    Ok(x.with_added(e.resource))
}

/// Best single exchange `F - e + g` with `w(e) > w(g)`, or `None` when `F` is
/// already of minimum weight among ideals of its size.
///
/// Among improving exchanges the largest improvement wins, then the lowest
/// removal resource, then the lowest addition resource.
pub fn local_improvement(
    f: &RankFunction,
    x: &Ideal,
    w: &WeightedGround,
) -> Result<Option<SwapStep>> {
    check_ideal(f, x)?;
    w.require_cover(f, x.size())?;
    let m = f.resources();
    let mut best: Option<SwapStep> = None;
    for e in x.tops() {
        let we = w.weight(e).ok_or(Error::MissingWeights {
            resource: e.resource,
            have: w.chain_len(e.resource) as usize,
            need: e.position,
        })?;
        for r in 0..m {
            if r == e.resource {
                continue;
            }
            let g = Element::new(r, x.0[r] + 1);
            // Elements past the weighted prefix cannot appear in an ideal of this size.
            let Some(wg) = w.weight(g) else { continue };
            if g.position > f.singleton(r) || wg >= we {
                continue;
            }
            let improvement = we - wg;
            if best.is_some_and(|b| b.improvement >= improvement) {
                continue;
            }
            let mut y = x.clone();
            y.0[e.resource] -= 1;
            y.0[r] += 1;
            if f.member_polytope(&y.0)? {
                best = Some(SwapStep {
                    remove: e,
                    add: g,
                    improvement,
                });
            }
        }
    }
    Ok(best)
}

/// Outcome of [`repair_best_response`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Repair {
    pub ideal: Ideal,
    pub swap: Option<SwapStep>,
}

/// Checks that `new` arises from `old` by raising weights on the chain of
/// `shifted` only, with `old(t) <= new(t) <= old(t + 1)` wherever defined.
/// The index shift `new(t) = old(t + 1)` is the extreme case; a load increase
/// of one unit on a resource with strongly semi-convex cost lands in between.
fn check_shift(old: &WeightedGround, new: &WeightedGround, shifted: usize) -> Result<()> {
    if old.resources() != new.resources() {
        return Err(Error::Contract(
            "weight vectors cover different resources".into(),
        ));
    }
    for r in 0..old.resources() {
        let (o, n) = (old.chain(r), new.chain(r));
        if r != shifted {
            let k = o.len().min(n.len());
            if o[..k] != n[..k] {
                return Err(Error::Contract(format!(
                    "weights changed on resource {r}, only {shifted} may shift"
                )));
            }
            continue;
        }
        for (t, &nt) in n.iter().enumerate() {
            if o.get(t).is_some_and(|&ot| nt < ot) || o.get(t + 1).is_some_and(|&on| nt > on) {
                return Err(Error::Contract(format!(
                    "weight of element ({r}, {}) leaves the shift window",
                    t + 1
                )));
            }
        }
    }
    Ok(())
}

/// Restores optimality after the weights on one chain shift upwards.
///
/// `x` must be of minimum weight under `old`. The returned ideal is `x` itself
/// when it stays optimal under `new`, and otherwise `x` with one unit moved
/// along the exchange of largest improvement. With `check` set the
/// precondition and the optimality of the result are verified and reported
/// as contract errors.
pub fn repair_best_response(
    f: &RankFunction,
    x: &Ideal,
    shifted: usize,
    old: &WeightedGround,
    new: &WeightedGround,
    check: bool,
) -> Result<Repair> {
    check_ideal(f, x)?;
    if shifted >= f.resources() {
        return Err(Error::DimensionMismatch {
            expected: f.resources(),
            found: shifted + 1,
        });
    }
    check_shift(old, new, shifted)?;
    if check {
        if let Some(step) = local_improvement(f, x, old)? {
            return Err(Error::Contract(format!(
                "input ideal is not optimal before the shift ({} -> {} improves by {})",
                step.remove, step.add, step.improvement
            )));
        }
    }
    let Some(step) = local_improvement(f, x, new)? else {
        return Ok(Repair {
            ideal: x.clone(),
            swap: None,
        });
    };
    let y = step.apply(x);
    if check {
        if step.remove.resource != shifted {
            return Err(Error::Contract(format!(
                "best exchange removes from resource {} instead of the shifted {shifted}",
                step.remove.resource
            )));
        }
        if let Some(again) = local_improvement(f, &y, new)? {
            return Err(Error::Contract(format!(
                "single exchange did not restore optimality ({} -> {} still improves)",
                again.remove, again.add
            )));
        }
    }
    Ok(Repair {
        ideal: y,
        swap: Some(step),
    })
}

/// Whether player `i`'s strategy is a best response to the others, at the
/// demand the strategy currently carries.
pub fn is_best_response(g: &GameInstance, p: &Profile, i: usize) -> Result<bool> {
    let x = &p.strategies[i];
    let a = p.opponent_loads(g.m(), i);
    let w = g.induced_weights(i, &a)?;
    let rank = &g.player(i).rank;
    let optimum = ordered_greedy(rank, x.size(), &w)?;
    Ok(w.ideal_weight(x)? == w.ideal_weight(&optimum)?)
}
