//! Integral polymatroid rank functions stored as explicit subset tables.
//!
//! Subsets of the resource set are `u32` bitmasks: bit `j` stands for resource
//! `j`. Points of a polymatroid are count vectors, which double as ideals of the
//! chain poset obtained by replacing each resource `r` with a chain of
//! `f({r})` ordered copies.

use std::fmt;

use crate::error::{Error, Result};

/// Largest supported resource count; tables hold `2^m` entries.
pub const MAX_RESOURCES: usize = 20;

pub type Subset = u32;

pub(crate) fn fmt_subset(s: Subset, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(f, "{{")?;
    let mut first = true;
    for j in 0..32 {
        if s & (1 << j) != 0 {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{j}")?;
            first = false;
        }
    }
    write!(f, "}}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankProperty {
    Normalized,
    Monotone,
    Submodular,
}

/// A violated rank-function inequality together with the subsets witnessing it.
///
/// For monotonicity `u ⊂ v` with `f(u) > f(v)`. For submodularity
/// `f(u) + f(v) < f(u ∪ v) + f(u ∩ v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankViolation {
    pub property: RankProperty,
    pub u: Subset,
    pub v: Subset,
}

impl fmt::Display for RankViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.property {
            RankProperty::Normalized => "normalization",
            RankProperty::Monotone => "monotonicity",
            RankProperty::Submodular => "submodularity",
        };
        write!(f, "{name} at U=")?;
        fmt_subset(self.u, f)?;
        write!(f, ", V=")?;
        fmt_subset(self.v, f)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RankReport {
    pub violations: Vec<RankViolation>,
}

impl RankReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Set function `f: 2^R -> N` as a dense table indexed by bitmask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankFunction {
    m: usize,
    values: Vec<u64>,
}

impl RankFunction {
    /// Wraps a table without checking the rank-function axioms; see [`validate`](Self::validate).
    pub fn new(m: usize, values: Vec<u64>) -> Result<Self> {
        if m > MAX_RESOURCES {
            return Err(Error::TooManyResources(m));
        }
        let expected = 1usize << m;
        if values.len() != expected {
            return Err(Error::MalformedRank {
                m,
                expected,
                found: values.len(),
            });
        }
        Ok(RankFunction { m, values })
    }

    /// Builds a table from a closure over bitmasks.
    pub fn from_fn(m: usize, f: impl FnMut(Subset) -> u64) -> Result<Self> {
        if m > MAX_RESOURCES {
            return Err(Error::TooManyResources(m));
        }
        let values = (0..(1u32 << m)).map(f).collect();
        RankFunction::new(m, values)
    }

    /// Like [`new`](Self::new) but rejects tables that are not polymatroid rank functions.
    pub fn checked(m: usize, values: Vec<u64>) -> Result<Self> {
        let f = RankFunction::new(m, values)?;
        if let Some(&violation) = f.validate().violations.first() {
            return Err(Error::InvalidRank {
                player: 0,
                violation,
            });
        }
        Ok(f)
    }

    pub fn resources(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn full(&self) -> Subset {
        ((1u64 << self.m) - 1) as Subset
    }

    pub fn value(&self, s: Subset) -> u64 {
        self.values[s as usize]
    }

    /// `f(R)`, the largest feasible demand.
    pub fn total(&self) -> u64 {
        self.values[self.full() as usize]
    }

    /// `u_r = f({r})`, the chain length of resource `r`.
    pub fn singleton(&self, r: usize) -> u64 {
        self.values[1usize << r]
    }

    /// Checks normalization, monotonicity and submodularity.
    ///
    /// Both families are checked through their local forms, which are
    /// equivalent to the global ones: `f(U) <= f(U + j)` and
    /// `f(U + a) + f(U + b) >= f(U + a + b) + f(U)`. Every reported pair is a
    /// genuine witness of the global inequality. Subsets are scanned in
    /// increasing bitmask order.
    pub fn validate(&self) -> RankReport {
        let mut violations = Vec::new();
        if self.values[0] != 0 {
            violations.push(RankViolation {
                property: RankProperty::Normalized,
                u: 0,
                v: 0,
            });
        }
        let n = 1u32 << self.m;
        for u in 0..n {
            for j in 0..self.m {
                let bit = 1u32 << j;
                if u & bit == 0 && self.value(u) > self.value(u | bit) {
                    violations.push(RankViolation {
                        property: RankProperty::Monotone,
                        u,
                        v: u | bit,
                    });
                }
            }
        }
        for u in 0..n {
            for a in 0..self.m {
                let ba = 1u32 << a;
                if u & ba != 0 {
                    continue;
                }
                for b in (a + 1)..self.m {
                    let bb = 1u32 << b;
                    if u & bb != 0 {
                        continue;
                    }
                    let lhs = self.value(u | ba) + self.value(u | bb);
                    let rhs = self.value(u | ba | bb) + self.value(u);
                    if lhs < rhs {
                        violations.push(RankViolation {
                            property: RankProperty::Submodular,
                            u: u | ba,
                            v: u | bb,
                        });
                    }
                }
            }
        }
        RankReport { violations }
    }

    fn check_dim(&self, x: &[u64]) -> Result<()> {
        if x.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// `x ∈ P_f`: every subset sum stays within its rank.
    pub fn member_polytope(&self, x: &[u64]) -> Result<bool> {
        self.check_dim(x)?;
        let n = 1usize << self.m;
        let mut sums = vec![0u64; n];
        for s in 1..n {
            let low = s.trailing_zeros() as usize;
            sums[s] = sums[s & (s - 1)] + x[low];
            if sums[s] > self.values[s] {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `x ∈ B_f(d)`.
    pub fn member_base(&self, d: u64, x: &[u64]) -> Result<bool> {
        if d > self.total() {
            return Err(Error::InfeasibleTruncation {
                demand: d,
                capacity: self.total(),
            });
        }
        self.check_dim(x)?;
        if x.iter().sum::<u64>() != d {
            return Ok(false);
        }
        self.member_polytope(x)
    }

    /// Rank in the matroid on the chain elements:
    /// `r(U) = min_T |U \ ∪_{r∈T} K_r| + f(T)`.
    pub fn matroid_rank(&self, elements: &[Element]) -> Result<u64> {
        let mut counts = vec![0u64; self.m];
        let mut seen = std::collections::BTreeSet::new();
        for &e in elements {
            if e.resource >= self.m || e.position == 0 || e.position > self.singleton(e.resource) {
                return Err(Error::InvalidElement {
                    resource: e.resource,
                    position: e.position,
                });
            }
            if seen.insert(e) {
                counts[e.resource] += 1;
            }
        }
        let size: u64 = counts.iter().sum();
        let n = 1usize << self.m;
        let mut covered = vec![0u64; n];
        let mut best = size;
        for t in 1..n {
            let low = t.trailing_zeros() as usize;
            covered[t] = covered[t & (t - 1)] + counts[low];
            best = best.min(size - covered[t] + self.values[t]);
        }
        Ok(best)
    }

    /// All points of `B_f(d)` in lexicographic order, failing once more than
    /// `cap` have been found.
    pub fn enumerate_base(&self, d: u64, cap: u64) -> Result<Vec<Ideal>> {
        if d > self.total() {
            return Err(Error::InfeasibleTruncation {
                demand: d,
                capacity: self.total(),
            });
        }
        let mut out = Vec::new();
        let mut x = vec![0u64; self.m];
        self.enumerate_rec(0, d, &mut x, cap, &mut out)?;
        Ok(out)
    }

    fn enumerate_rec(
        &self,
        r: usize,
        remaining: u64,
        x: &mut Vec<u64>,
        cap: u64,
        out: &mut Vec<Ideal>,
    ) -> Result<()> {
        if r == self.m {
            if remaining == 0 {
                if out.len() as u64 >= cap {
                    return Err(Error::EnumerationTooLarge { cap });
                }
                out.push(Ideal(x.clone()));
            }
            return Ok(());
        }
        let hi = remaining.min(self.singleton(r));
        for v in 0..=hi {
            x[r] = v;
            // Zero-padded prefixes that leave P_f cannot be completed.
            if self.member_polytope(x)? {
                self.enumerate_rec(r + 1, remaining - v, x, cap, out)?;
            } else {
                break;
            }
        }
        x[r] = 0;
        Ok(())
    }
}

/// Chain element `r_t`: the `position`-th copy (1-based) of `resource`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Element {
    pub resource: usize,
    pub position: u64,
}

impl Element {
    pub fn new(resource: usize, position: u64) -> Self {
        Element { resource, position }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}_{}", self.resource, self.position)
    }
}

/// The chain poset `E`: resource `r` contributes `f({r})` totally ordered elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainPoset {
    lengths: Vec<u64>,
}

impl ChainPoset {
    pub fn of(f: &RankFunction) -> Self {
        ChainPoset {
            lengths: (0..f.resources()).map(|r| f.singleton(r)).collect(),
        }
    }

    pub fn chain_len(&self, r: usize) -> u64 {
        self.lengths[r]
    }

    pub fn contains(&self, e: Element) -> bool {
        e.resource < self.lengths.len() && e.position >= 1 && e.position <= self.lengths[e.resource]
    }

    pub fn comparable(&self, a: Element, b: Element) -> bool {
        a.resource == b.resource
    }

    /// Every element of `E`, chain by chain.
    pub fn elements(&self) -> Vec<Element> {
        self.lengths
            .iter()
            .enumerate()
            .flat_map(|(r, &len)| (1..=len).map(move |t| Element::new(r, t)))
            .collect()
    }
}

/// An ideal of the chain poset, stored as per-chain prefix lengths.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ideal(pub Vec<u64>);

impl Ideal {
    pub fn empty(m: usize) -> Self {
        Ideal(vec![0; m])
    }

    pub fn counts(&self) -> &[u64] {
        &self.0
    }

    pub fn size(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn hamming(&self, other: &Ideal) -> u64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.abs_diff(*b))
            .sum()
    }

    /// `F + e` for the first element beyond the prefix on `r`.
    pub fn with_added(&self, r: usize) -> Ideal {
        let mut next = self.clone();
        next.0[r] += 1;
        next
    }

    /// Maximal elements `F^+`.
    pub fn tops(&self) -> impl Iterator<Item = Element> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(r, &c)| Element::new(r, c))
    }

    /// Elements of the ideal, chain by chain.
    pub fn elements(&self) -> Vec<Element> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(r, &c)| (1..=c).map(move |t| Element::new(r, t)))
            .collect()
    }
}
