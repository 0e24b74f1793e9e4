//! JSON documents for instances and profiles, and line-delimited traces.
//!
//! Output is deterministic: keys appear in a fixed order, resources follow the
//! instance's resource order, and every document ends with a single LF.
//!
//! An instance looks like
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "resources": ["a", "b"],
//!   "players": [
//!     {"demand": 1, "rank": [0, 1, 1, 1], "costs": {"a": [0, 1, 2], "b": [0, 1, 2]}}
//!   ]
//! }
//! ```
//!
//! A dense `rank` array is indexed by bitmask, bit `j` standing for the `j`-th
//! listed resource. A sparse `rank` object maps comma-separated resource names
//! to values; every singleton must be listed, the empty set is 0, and any other
//! omitted set `U` takes `min(Σ_{r∈U} f({r}), f(V) for listed V ⊇ U)`.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::game::{CostTable, GameInstance, Player, Profile};
use crate::polymatroid::{Ideal, RankFunction, Subset, MAX_RESOURCES};
use crate::solver::{EventKind, Trace, TraceEvent};

pub const FORMAT_VERSION: u64 = 1;

fn doc_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Document {
        path: path.into(),
        message: message.into(),
    }
}

fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| doc_err(path, "expected an object"))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| doc_err(path, "expected an array"))
}

fn uint(v: &Value, path: &str) -> Result<u64> {
    v.as_u64()
        .ok_or_else(|| doc_err(path, "expected a non-negative integer"))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| doc_err(path, format!("missing field \"{key}\"")))
}

fn only_keys(obj: &Map<String, Value>, allowed: &[&str], path: &str) -> Result<()> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(doc_err(path, format!("unknown field \"{k}\""))),
        None => Ok(()),
    }
}

fn check_version(obj: &Map<String, Value>) -> Result<()> {
    let v = uint(field(obj, "format_version", "$")?, "$.format_version")?;
    if v != FORMAT_VERSION {
        return Err(doc_err(
            "$.format_version",
            format!("unsupported version {v}, expected {FORMAT_VERSION}"),
        ));
    }
    Ok(())
}

fn resource_index(names: &[String], name: &str, path: &str) -> Result<usize> {
    names
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| doc_err(path, format!("unknown resource \"{name}\"")))
}

/// Reads a map from resource names to values, every resource at most once.
fn per_resource<'a>(names: &[String], v: &'a Value, path: &str) -> Result<Vec<Option<&'a Value>>> {
    let mut out = vec![None; names.len()];
    for (k, val) in object(v, path)? {
        out[resource_index(names, k, path)?] = Some(val);
    }
    Ok(out)
}

fn parse_subset_key(names: &[String], key: &str, path: &str) -> Result<Subset> {
    let mut s: Subset = 0;
    if key.trim().is_empty() {
        return Ok(0);
    }
    for part in key.split(',') {
        let bit = 1 << resource_index(names, part.trim(), path)?;
        if s & bit != 0 {
            return Err(doc_err(
                path,
                format!("resource \"{}\" repeated in key \"{key}\"", part.trim()),
            ));
        }
        s |= bit;
    }
    Ok(s)
}

fn parse_rank(names: &[String], v: &Value, path: &str) -> Result<RankFunction> {
    let m = names.len();
    let size = 1usize << m;
    if let Some(items) = v.as_array() {
        if items.len() != size {
            return Err(doc_err(
                path,
                format!(
                    "dense rank needs 2^{m} = {size} entries, found {}",
                    items.len()
                ),
            ));
        }
        let values = items
            .iter()
            .enumerate()
            .map(|(k, x)| uint(x, &format!("{path}[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        return RankFunction::new(m, values);
    }
    let mut given: Vec<Option<u64>> = vec![None; size];
    for (key, x) in object(v, path)? {
        let kpath = format!("{path}[\"{key}\"]");
        let s = parse_subset_key(names, key, &kpath)? as usize;
        if given[s].is_some() {
            return Err(doc_err(kpath, "subset listed twice"));
        }
        given[s] = Some(uint(x, &kpath)?);
    }
    let singles = (0..m)
        .map(|r| {
            given[1 << r].ok_or_else(|| {
                doc_err(
                    path,
                    format!("sparse rank must list singleton \"{}\"", names[r]),
                )
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let values = (0..size)
        .map(|u| match given[u] {
            Some(x) => x,
            None if u == 0 => 0,
            None => {
                let additive: u64 = (0..m)
                    .filter(|r| u & (1 << r) != 0)
                    .map(|r| singles[r])
                    .sum();
                (u..size)
                    .filter(|&s| s & u == u)
                    .filter_map(|s| given[s])
                    .fold(additive, u64::min)
            }
        })
        .collect();
    RankFunction::new(m, values)
}

fn parse_player(names: &[String], i: usize, v: &Value) -> Result<Player> {
    let path = format!("$.players[{i}]");
    let obj = object(v, &path)?;
    only_keys(obj, &["demand", "rank", "costs"], &path)?;
    let demand = uint(field(obj, "demand", &path)?, &format!("{path}.demand"))?;
    let rank = parse_rank(names, field(obj, "rank", &path)?, &format!("{path}.rank"))?;
    let cpath = format!("{path}.costs");
    let tables = per_resource(names, field(obj, "costs", &path)?, &cpath)?;
    let mut costs = Vec::with_capacity(names.len());
    for (r, t) in tables.into_iter().enumerate() {
        let tpath = format!("{cpath}.{}", names[r]);
        let t =
            t.ok_or_else(|| doc_err(&cpath, format!("missing cost table for \"{}\"", names[r])))?;
        let values = array(t, &tpath)?
            .iter()
            .enumerate()
            .map(|(k, x)| uint(x, &format!("{tpath}[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        let table = CostTable::new(values).map_err(|e| match e {
            Error::CostDecrease { index, .. } => Error::CostNotMonotone {
                player: i,
                resource: r,
                index,
            },
            other => other,
        })?;
        costs.push(table);
    }
    Ok(Player::new(demand, rank, costs))
}

/// Parses and fully validates an instance document.
pub fn parse_instance(text: &str) -> Result<GameInstance> {
    let doc = parse_json(text)?;
    let obj = object(&doc, "$")?;
    only_keys(obj, &["format_version", "resources", "players"], "$")?;
    check_version(obj)?;
    let names = array(field(obj, "resources", "$")?, "$.resources")?
        .iter()
        .enumerate()
        .map(|(k, v)| {
            v.as_str()
                .map(str::to_owned)
                .ok_or_else(|| doc_err(format!("$.resources[{k}]"), "expected a string"))
        })
        .collect::<Result<Vec<_>>>()?;
    if names.len() > MAX_RESOURCES {
        return Err(Error::TooManyResources(names.len()));
    }
    for (k, name) in names.iter().enumerate() {
        if name.is_empty() || name.contains(',') || name != name.trim() {
            return Err(doc_err(
                format!("$.resources[{k}]"),
                "names must be non-empty, without commas or surrounding spaces",
            ));
        }
        if names[..k].contains(name) {
            return Err(doc_err(
                format!("$.resources[{k}]"),
                format!("duplicate resource \"{name}\""),
            ));
        }
    }
    let players = array(field(obj, "players", "$")?, "$.players")?
        .iter()
        .enumerate()
        .map(|(i, v)| parse_player(&names, i, v))
        .collect::<Result<Vec<_>>>()?;
    GameInstance::new(names, players)
}

fn finish(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Canonical instance document with dense rank arrays.
pub fn write_instance(g: &GameInstance) -> String {
    let names = g.resources();
    let players: Vec<Value> = g
        .players()
        .iter()
        .map(|p| {
            let costs: Map<String, Value> = names
                .iter()
                .zip(&p.costs)
                .map(|(n, c)| (n.clone(), json!(c.values())))
                .collect();
            json!({"demand": p.demand, "rank": p.rank.values(), "costs": costs})
        })
        .collect();
    finish(&json!({
        "format_version": FORMAT_VERSION,
        "resources": names,
        "players": players,
    }))
}

fn counts_map(names: &[String], counts: &[u64]) -> Map<String, Value> {
    names
        .iter()
        .zip(counts)
        .map(|(n, &c)| (n.clone(), json!(c)))
        .collect()
}

/// Profile document with each player's strategy and private cost, and the
/// resource loads.
pub fn write_profile(g: &GameInstance, p: &Profile) -> Result<String> {
    let names = g.resources();
    let players = p
        .strategies
        .iter()
        .enumerate()
        .map(|(i, x)| {
            Ok(json!({
                "strategy": counts_map(names, &x.0),
                "cost": g.private_cost(p, i)?,
            }))
        })
        .collect::<Result<Vec<Value>>>()?;
    Ok(finish(&json!({
        "format_version": FORMAT_VERSION,
        "players": players,
        "loads": counts_map(names, &p.loads(g.m())),
    })))
}

/// Reads the strategies of a profile document; resources left out of a
/// strategy count as 0. Costs and loads in the document are ignored.
pub fn parse_profile(g: &GameInstance, text: &str) -> Result<Profile> {
    let doc = parse_json(text)?;
    let obj = object(&doc, "$")?;
    only_keys(obj, &["format_version", "players", "loads"], "$")?;
    check_version(obj)?;
    let items = array(field(obj, "players", "$")?, "$.players")?;
    if items.len() != g.n() {
        return Err(doc_err(
            "$.players",
            format!(
                "instance has {} players, profile has {}",
                g.n(),
                items.len()
            ),
        ));
    }
    let strategies = items
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let path = format!("$.players[{i}]");
            let pobj = object(v, &path)?;
            only_keys(pobj, &["strategy", "cost"], &path)?;
            let spath = format!("{path}.strategy");
            let counts = per_resource(g.resources(), field(pobj, "strategy", &path)?, &spath)?
                .into_iter()
                .enumerate()
                .map(|(r, c)| {
                    c.map_or(Ok(0), |c| uint(c, &format!("{spath}.{}", g.resources()[r])))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Ideal(counts))
        })
        .collect::<Result<Vec<_>>>()?;
    let p = Profile::new(strategies);
    g.check_profile(&p, true)?;
    Ok(p)
}

/// One JSON header line followed by one line per event.
pub fn write_trace(g: &GameInstance, t: &Trace) -> String {
    let names = g.resources();
    let name = |r: Option<usize>| r.map(|r| names[r].clone());
    let mut out = serde_json::to_string(&json!({
        "format_version": FORMAT_VERSION,
        "record": "trace_header",
        "resources": names,
        "events": t.events.len(),
    }))
    .expect("JSON values always serialize");
    out.push('\n');
    for e in &t.events {
        let line = json!({
            "event": e.kind.as_str(),
            "outer": e.outer,
            "inner": e.inner,
            "player": e.player,
            "unit": e.unit,
            "from": name(e.from),
            "to": name(e.to),
            "marginals": e.marginals,
        });
        out.push_str(&serde_json::to_string(&line).expect("JSON values always serialize"));
        out.push('\n');
    }
    out
}

fn opt_uint(obj: &Map<String, Value>, key: &str, path: &str) -> Result<Option<u64>> {
    match field(obj, key, path)? {
        Value::Null => Ok(None),
        v => uint(v, &format!("{path}.{key}")).map(Some),
    }
}

fn opt_resource(
    names: &[String],
    obj: &Map<String, Value>,
    key: &str,
    path: &str,
) -> Result<Option<usize>> {
    match field(obj, key, path)? {
        Value::Null => Ok(None),
        Value::String(s) => resource_index(names, s, &format!("{path}.{key}")).map(Some),
        _ => Err(doc_err(
            format!("{path}.{key}"),
            "expected a resource name or null",
        )),
    }
}

fn line_json(line: &str, lineno: usize) -> Result<Value> {
    serde_json::from_str(line).map_err(|e| Error::Syntax {
        line: lineno,
        column: e.column(),
        message: e.to_string(),
    })
}

/// Parses a trace written by [`write_trace`]. The per-iteration move counts
/// are rebuilt from the `equilibrium_reached` records.
pub fn parse_trace(g: &GameInstance, text: &str) -> Result<Trace> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines
        .next()
        .ok_or_else(|| doc_err("line 1", "missing trace header"))?;
    let header = line_json(first, 1)?;
    let hobj = object(&header, "line 1")?;
    check_version(hobj)?;
    if hobj.get("record").and_then(Value::as_str) != Some("trace_header") {
        return Err(doc_err("line 1", "first record must be the trace header"));
    }
    let names: Vec<String> = array(field(hobj, "resources", "line 1")?, "line 1.resources")?
        .iter()
        .map(|v| v.as_str().map(str::to_owned))
        .collect::<Option<_>>()
        .ok_or_else(|| doc_err("line 1.resources", "expected resource names"))?;
    if names != g.resources() {
        return Err(doc_err(
            "line 1.resources",
            "resources differ from the instance",
        ));
    }
    let mut trace = Trace::default();
    for (k, line) in lines {
        let path = format!("line {}", k + 1);
        let v = line_json(line, k + 1)?;
        let obj = object(&v, &path)?;
        let kind_str = field(obj, "event", &path)?
            .as_str()
            .ok_or_else(|| doc_err(&path, "event must be a string"))?;
        let kind = EventKind::parse(kind_str)
            .ok_or_else(|| doc_err(&path, format!("unknown event \"{kind_str}\"")))?;
        let marginals = array(field(obj, "marginals", &path)?, &path)?
            .iter()
            .map(|x| uint(x, &format!("{path}.marginals")))
            .collect::<Result<Vec<_>>>()?;
        let event = TraceEvent {
            kind,
            outer: uint(field(obj, "outer", &path)?, &path)?,
            inner: uint(field(obj, "inner", &path)?, &path)?,
            player: opt_uint(obj, "player", &path)?.map(|p| p as usize),
            unit: opt_uint(obj, "unit", &path)?,
            from: opt_resource(&names, obj, "from", &path)?,
            to: opt_resource(&names, obj, "to", &path)?,
            marginals,
        };
        if kind == EventKind::EquilibriumReached {
            trace.inner_counts.push(event.inner);
        }
        trace.events.push(event);
    }
    Ok(trace)
}

/// Per-unit marginal costs recomputed from the profile, in non-increasing
/// order.
fn replay_marginals(g: &GameInstance, p: &Profile, hot: Option<usize>) -> Result<Vec<u64>> {
    let loads = p.loads(g.m());
    let mut out = Vec::new();
    for (i, x) in p.strategies.iter().enumerate() {
        for (r, &k) in x.0.iter().enumerate().filter(|(_, &k)| k > 0) {
            let c = g.player(i).costs[r].values();
            let top = (loads[r] + u64::from(hot != Some(r))) as usize;
            let (hi, lo) = match (c.get(top), c.get(top - 1)) {
                (Some(&hi), Some(&lo)) => (hi, lo),
                _ => {
                    return Err(Error::TableOverflow {
                        index: top as u64,
                        len: c.len(),
                    })
                }
            };
            let v = hi
                .checked_mul(k)
                .zip(lo.checked_mul(k - 1))
                .and_then(|(a, b)| a.checked_sub(b))
                .ok_or(Error::Overflow)?;
            out.extend(std::iter::repeat_n(v, k as usize));
        }
    }
    out.sort_unstable_by(|a, b| b.cmp(a));
    Ok(out)
}

/// Replays a trace against its instance, independently of the solver.
///
/// Checks the event grammar, that every move relocates a unit its player
/// actually holds, that the recorded marginal vectors match the replayed
/// profiles, and that each improvement move strictly decreases the sorted
/// marginal vector relative to the preceding record of the same outer
/// iteration. Returns the final profile, or a [`Error::Document`] naming the
/// first offending event.
pub fn replay_trace(g: &GameInstance, t: &Trace) -> Result<Profile> {
    let m = g.m();
    let mut profile = Profile::empty(g.n(), m);
    let mut units: Vec<Vec<usize>> = vec![Vec::new(); g.n()];
    let mut hot: Option<usize> = None;
    let mut prev: Option<&TraceEvent> = None;
    let mut outer = 0u64;
    for (k, e) in t.events.iter().enumerate() {
        let at = format!("event {}", k + 1);
        let bad = |msg: String| Err(doc_err(&at, msg));
        let expected = match prev.map(|p| p.kind) {
            None | Some(EventKind::EquilibriumReached) => &[EventKind::DemandIncrease][..],
            Some(EventKind::DemandIncrease) => &[EventKind::GreedyExtend],
            Some(_) => &[EventKind::ImprovementMove, EventKind::EquilibriumReached],
        };
        if !expected.contains(&e.kind) {
            return bad(format!("unexpected {} event", e.kind.as_str()));
        }
        if e.kind == EventKind::DemandIncrease {
            outer += 1;
            hot = None;
        }
        if e.outer != outer {
            return bad(format!(
                "outer index {} where {outer} was expected",
                e.outer
            ));
        }
        let player = |p: Option<usize>| match p {
            Some(i) if i < g.n() => Ok(i),
            _ => Err(doc_err(&at, "missing or out-of-range player")),
        };
        let unit = |u: Option<u64>| u.ok_or_else(|| doc_err(&at, "missing unit"));
        let to = |r: Option<usize>| r.ok_or_else(|| doc_err(&at, "missing target resource"));
        match e.kind {
            EventKind::DemandIncrease => {
                let i = player(e.player)?;
                if unit(e.unit)? != units[i].len() as u64 + 1
                    || units[i].len() as u64 >= g.player(i).demand
                {
                    return bad(format!("player {i} cannot receive unit {:?}", e.unit));
                }
            }
            EventKind::GreedyExtend => {
                let i = player(e.player)?;
                if e.player != prev.and_then(|p| p.player) || e.unit != prev.and_then(|p| p.unit) {
                    return bad("extension does not match the demand increase".into());
                }
                let r = to(e.to)?;
                units[i].push(r);
                profile.strategies[i].0[r] += 1;
                hot = Some(r);
            }
            EventKind::ImprovementMove => {
                let i = player(e.player)?;
                let (r_to, r_from) = (
                    to(e.to)?,
                    e.from.ok_or_else(|| doc_err(&at, "missing source"))?,
                );
                let slot = unit(e.unit)?.checked_sub(1).map(|s| s as usize);
                if slot.and_then(|s| units[i].get(s)) != Some(&r_from) {
                    return bad(format!(
                        "player {i} holds no unit {:?} on resource {r_from}",
                        e.unit
                    ));
                }
                if e.inner != prev.map_or(0, |p| p.inner) + 1 {
                    return bad(format!("inner index {} breaks the move count", e.inner));
                }
                units[i][slot.expect("checked above")] = r_to;
                profile.strategies[i].0[r_from] -= 1;
                profile.strategies[i].0[r_to] += 1;
                hot = Some(r_to);
            }
            EventKind::EquilibriumReached => {
                if e.inner != prev.map_or(0, |p| p.inner) {
                    return bad("move count differs from the last move".into());
                }
            }
        }
        let recomputed = replay_marginals(g, &profile, hot)?;
        if recomputed != e.marginals {
            return bad(format!(
                "recorded marginals {:?} differ from replayed {recomputed:?}",
                e.marginals
            ));
        }
        if e.kind == EventKind::ImprovementMove {
            let before = &prev
                .expect("a move always follows another record")
                .marginals;
            if e.marginals >= *before {
                return bad(format!(
                    "marginal vector {:?} is not lexicographically below {before:?}",
                    e.marginals
                ));
            }
        }
        prev = Some(e);
    }
    if prev.is_some_and(|p| p.kind != EventKind::EquilibriumReached) {
        return Err(doc_err(
            "end of trace",
            "trace stops inside an outer iteration",
        ));
    }
    g.check_profile(&profile, true)?;
    Ok(profile)
}
