//! Instance families: singleton integer-splittable games, matroid congestion
//! games and seeded random polymatroid games.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{check_truncated_ssc, CostTable, GameInstance, Player};
use crate::polymatroid::{RankFunction, Subset};

/// Attempts per random rank function or cost table before giving up.
pub const RETRY_BUDGET: usize = 1000;

/// Default resource names `r0, r1, ...`.
pub fn resource_names(m: usize) -> Vec<String> {
    (0..m).map(|r| format!("r{r}")).collect()
}

/// `f(U) = d` if `U` meets `allowed`, else 0.
pub fn singleton_rank(m: usize, allowed: Subset, demand: u64) -> Result<RankFunction> {
    let f = RankFunction::from_fn(m, |u| if u & allowed != 0 { demand } else { 0 })?;
    debug_assert!(f.validate().is_ok());
    Ok(f)
}

/// Singleton integer-splittable game: player `i` splits its demand freely over
/// the resources in `allowed[i]`.
pub fn gen_singleton(
    resources: Vec<String>,
    allowed: &[Subset],
    demands: &[u64],
    costs: Vec<Vec<CostTable>>,
) -> Result<GameInstance> {
    let m = resources.len();
    if allowed.len() != demands.len() || costs.len() != demands.len() {
        return Err(Error::DimensionMismatch {
            expected: demands.len(),
            found: allowed.len().min(costs.len()),
        });
    }
    let mut players = Vec::with_capacity(demands.len());
    for ((&set, &d), c) in allowed.iter().zip(demands).zip(costs) {
        if set == 0 || set >> m != 0 {
            return Err(Error::Contract(format!(
                "allowed resource set {set:#b} must be a non-empty subset of {m} resources"
            )));
        }
        players.push(Player::new(d, singleton_rank(m, set, d)?, c));
    }
    GameInstance::new(resources, players)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatroidShape {
    Uniform {
        rank: u64,
    },
    /// Blocks must partition the resources; `caps[b]` bounds block `b`.
    Partition {
        blocks: Vec<Subset>,
        caps: Vec<u64>,
    },
    /// Resource `j` is edge `edges[j]` of a multigraph on `vertices` nodes.
    Graphic {
        vertices: usize,
        edges: Vec<(usize, usize)>,
    },
}

/// Disjoint-set forest with union by size and path halving.
struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the sets of `a` and `b`; false if they were already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }
}

impl MatroidShape {
    /// Rank table of the matroid over `m` resources.
    pub fn rank_function(&self, m: usize) -> Result<RankFunction> {
        let f = match self {
            MatroidShape::Uniform { rank } => {
                RankFunction::from_fn(m, |u| (u.count_ones() as u64).min(*rank))?
            }
            MatroidShape::Partition { blocks, caps } => {
                if blocks.len() != caps.len() {
                    return Err(Error::Contract("one cap per block required".into()));
                }
                let mut seen: Subset = 0;
                for &b in blocks {
                    if b & seen != 0 {
                        return Err(Error::Contract("partition blocks overlap".into()));
                    }
                    seen |= b;
                }
                if seen != ((1u64 << m) - 1) as Subset {
                    return Err(Error::Contract(
                        "partition blocks must cover every resource".into(),
                    ));
                }
                RankFunction::from_fn(m, |u| {
                    blocks
                        .iter()
                        .zip(caps)
                        .map(|(&b, &cap)| ((u & b).count_ones() as u64).min(cap))
                        .sum()
                })?
            }
            MatroidShape::Graphic { vertices, edges } => {
                if edges.len() != m {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        found: edges.len(),
                    });
                }
                if edges.iter().any(|&(a, b)| a >= *vertices || b >= *vertices) {
                    return Err(Error::Contract("edge endpoint out of range".into()));
                }
                // Rank = number of merges performed by the edges in U.
                RankFunction::from_fn(m, |u| {
                    let mut uf = UnionFind::new(*vertices);
                    edges
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| u & (1 << j) != 0)
                        .filter(|(_, &(a, b))| uf.union(a, b))
                        .count() as u64
                })?
            }
        };
        if let Some(&v) = f.validate().violations.first() {
            return Err(Error::Contract(format!(
                "matroid rank table is invalid: {v}"
            )));
        }
        if let Some(u) = (0..(1u32 << m)).find(|&u| f.value(u) > u.count_ones() as u64) {
            return Err(Error::Contract(format!(
                "matroid rank exceeds cardinality at {u:#b}"
            )));
        }
        Ok(f)
    }
}

/// Matroid congestion game: each player picks a basis of its own matroid, so
/// the demand is `f^(i)(R)`.
pub fn gen_matroid_game(
    resources: Vec<String>,
    shapes: &[MatroidShape],
    costs: Vec<Vec<CostTable>>,
) -> Result<GameInstance> {
    let m = resources.len();
    if shapes.len() != costs.len() {
        return Err(Error::DimensionMismatch {
            expected: shapes.len(),
            found: costs.len(),
        });
    }
    let players = shapes
        .iter()
        .zip(costs)
        .map(|(shape, c)| {
            let f = shape.rank_function(m)?;
            Ok(Player::new(f.total(), f, c))
        })
        .collect::<Result<Vec<_>>>()?;
    GameInstance::new(resources, players)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CostFamily {
    #[default]
    ConvexNondecreasing,
    /// Nondecreasing and strongly semi-convex up to each chain length, not
    /// necessarily convex.
    TruncatedSsc,
}

/// Convex nondecreasing table of length `len` with values at most `max_value`.
pub fn random_convex_table(rng: &mut impl Rng, len: usize, max_value: u64) -> CostTable {
    let steps = len.saturating_sub(1) as u64;
    let base = rng.gen_range(0..=max_value.min(10));
    let room = max_value - base;
    let max_step = room.checked_div(steps).unwrap_or(0);
    let mut diffs: Vec<u64> = (0..steps).map(|_| rng.gen_range(0..=max_step)).collect();
    diffs.sort_unstable();
    let mut values = Vec::with_capacity(len);
    let mut acc = base;
    if len > 0 {
        values.push(acc);
    }
    for d in diffs {
        acc += d;
        values.push(acc);
    }
    CostTable::new(values).expect("prefix sums of nonnegative steps")
}

/// Nondecreasing table passing `u`-truncated strong semi-convexity, obtained
/// by lowering single entries of a scaled convex table as long as the check
/// keeps passing.
pub fn random_ssc_table(
    rng: &mut impl Rng,
    len: usize,
    u: u64,
    max_value: u64,
) -> Result<CostTable> {
    let mut values = random_convex_table(rng, len, max_value / 4)
        .values()
        .iter()
        .map(|v| v * 4)
        .collect::<Vec<_>>();
    if len < 2 {
        return CostTable::new(values);
    }
    for _ in 0..len * 4 {
        let k = rng.gen_range(1..len);
        if values[k] == 0 {
            continue;
        }
        values[k] -= 1;
        let keep = CostTable::new(values.clone())
            .map(|c| check_truncated_ssc(&c, u))
            .is_ok_and(|ok| ok.unwrap_or(false));
        if !keep {
            values[k] += 1;
        }
    }
    let table = CostTable::new(values)?;
    if !check_truncated_ssc(&table, u)? {
        return Err(Error::GenerationExhausted { attempts: len * 4 });
    }
    Ok(table)
}

/// Random polymatroid rank function: a concave function of a random weighted
/// cardinality, then random ±1 edits kept only when the table stays valid.
///
/// `f({r}) >= 1` for at least one resource and `f(R) <= max_total`.
pub fn random_rank(rng: &mut impl Rng, m: usize, max_total: u64) -> Result<RankFunction> {
    if max_total == 0 || m == 0 {
        return RankFunction::new(m, vec![0; 1 << m]);
    }
    for _ in 0..RETRY_BUDGET {
        let weights: Vec<u64> = (0..m).map(|_| rng.gen_range(0..=2)).collect();
        let span: u64 = weights.iter().sum();
        if span == 0 {
            continue;
        }
        // Concave profile: nonincreasing increments, first one positive.
        let mut incs: Vec<u64> = (0..span).map(|_| rng.gen_range(0..=2)).collect();
        incs.sort_unstable_by(|a, b| b.cmp(a));
        incs[0] = incs[0].max(1);
        let mut phi = vec![0u64];
        for inc in incs {
            let last = *phi.last().unwrap();
            phi.push((last + inc).min(max_total));
        }
        let mut values: Vec<u64> = (0..(1u32 << m))
            .map(|u| {
                let s: u64 = (0..m)
                    .filter(|r| u & (1 << r) != 0)
                    .map(|r| weights[r])
                    .sum();
                phi[s as usize]
            })
            .collect();
        for _ in 0..(4 << m) {
            let u = rng.gen_range(1..(1usize << m));
            let up = rng.gen_bool(0.5);
            if !up && values[u] == 0 {
                continue;
            }
            let old = values[u];
            values[u] = if up { old + 1 } else { old - 1 };
            let full = values[(1 << m) - 1];
            let ok = full <= max_total
                && full >= 1
                && RankFunction::new(m, values.clone())?.validate().is_ok();
            if !ok {
                values[u] = old;
            }
        }
        let f = RankFunction::new(m, values)?;
        if f.validate().is_ok() && f.total() >= 1 {
            return Ok(f);
        }
    }
    Err(Error::GenerationExhausted {
        attempts: RETRY_BUDGET,
    })
}

/// Seeded random polymatroid game with `n` players, `m` resources, demands in
/// `[1, min(max_demand, f(R))]` and cost values at most 100.
pub fn gen_random(
    seed: u64,
    n: usize,
    m: usize,
    max_demand: u64,
    family: CostFamily,
) -> Result<GameInstance> {
    const MAX_COST: u64 = 100;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ranks = Vec::with_capacity(n);
    let mut demands = Vec::with_capacity(n);
    for _ in 0..n {
        let f = random_rank(&mut rng, m, (2 * max_demand).max(1))?;
        let hi = max_demand.min(f.total()).max(1);
        demands.push(rng.gen_range(1..=hi));
        ranks.push(f);
    }
    let len = demands.iter().sum::<u64>() as usize + 1;
    let mut players = Vec::with_capacity(n);
    for (f, d) in ranks.into_iter().zip(demands) {
        let costs = (0..m)
            .map(|r| match family {
                CostFamily::ConvexNondecreasing => Ok(random_convex_table(&mut rng, len, MAX_COST)),
                CostFamily::TruncatedSsc => {
                    random_ssc_table(&mut rng, len, f.singleton(r), MAX_COST)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        players.push(Player::new(d, f, costs));
    }
    GameInstance::new(resource_names(m), players)
}

/// Random singleton game: every player gets a random non-empty resource set.
pub fn gen_random_singleton(
    seed: u64,
    n: usize,
    m: usize,
    max_demand: u64,
) -> Result<GameInstance> {
    if m == 0 {
        return Err(Error::Contract(
            "singleton games need at least one resource".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let allowed: Vec<Subset> = (0..n).map(|_| rng.gen_range(1..(1u32 << m))).collect();
    let demands: Vec<u64> = (0..n)
        .map(|_| rng.gen_range(1..=max_demand.max(1)))
        .collect();
    let len = demands.iter().sum::<u64>() as usize + 1;
    let costs = (0..n)
        .map(|_| {
            (0..m)
                .map(|_| random_convex_table(&mut rng, len, 100))
                .collect()
        })
        .collect();
    gen_singleton(resource_names(m), &allowed, &demands, costs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatroidKind {
    Uniform,
    Partition,
    Graphic,
}

/// Random matroid congestion game with nondecreasing (not necessarily
/// convex) costs.
pub fn gen_random_matroid(
    seed: u64,
    n: usize,
    m: usize,
    kind: MatroidKind,
) -> Result<GameInstance> {
    if m == 0 {
        return Err(Error::Contract(
            "matroid games need at least one resource".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shapes: Vec<MatroidShape> = (0..n)
        .map(|_| match kind {
            MatroidKind::Uniform => MatroidShape::Uniform {
                rank: rng.gen_range(1..=m as u64),
            },
            MatroidKind::Partition => {
                let k = rng.gen_range(1..=m);
                let mut order: Vec<usize> = (0..m).collect();
                order.shuffle(&mut rng);
                let mut blocks = vec![0 as Subset; k];
                for (pos, &r) in order.iter().enumerate() {
                    let b = if pos < k { pos } else { rng.gen_range(0..k) };
                    blocks[b] |= 1 << r;
                }
                let caps = blocks
                    .iter()
                    .map(|b| rng.gen_range(1..=b.count_ones() as u64))
                    .collect();
                MatroidShape::Partition { blocks, caps }
            }
            MatroidKind::Graphic => {
                let vertices = rng.gen_range(2..=m + 1);
                let edges = (0..m)
                    .map(|_| (rng.gen_range(0..vertices), rng.gen_range(0..vertices)))
                    .collect();
                MatroidShape::Graphic { vertices, edges }
            }
        })
        .collect();
    let ranks = shapes
        .iter()
        .map(|s| s.rank_function(m))
        .collect::<Result<Vec<_>>>()?;
    let len = ranks.iter().map(|f| f.total()).sum::<u64>() as usize + 1;
    let costs = (0..n)
        .map(|_| {
            (0..m)
                .map(|_| {
                    let mut v: Vec<u64> = (0..len).map(|_| rng.gen_range(0..=100)).collect();
                    v.sort_unstable();
                    CostTable::new(v)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    gen_matroid_game(resource_names(m), &shapes, costs)
}
