//! Brute-force helpers shared by the integration tests. They use only the raw
//! rank table and cost tables, never the library's own enumeration or greedy.

#![allow(dead_code)]

use polynash::game::CostTable;
use polynash::RankFunction;

/// Every `x` in `Z^m_{>=0}` with `Σ x = d` and `Σ_{r∈U} x_r <= f(U)` for all `U`.
pub fn brute_bases(f: &RankFunction, d: u64) -> Vec<Vec<u64>> {
    let m = f.resources();
    let rank = f.values();
    let mut out = Vec::new();
    let mut x = vec![0u64; m];
    loop {
        if x.iter().sum::<u64>() == d {
            let fits = (0..rank.len()).all(|u| {
                (0..m)
                    .filter(|r| u & (1 << r) != 0)
                    .map(|r| x[r])
                    .sum::<u64>()
                    <= rank[u]
            });
            if fits {
                out.push(x.clone());
            }
        }
        let mut r = m;
        loop {
            if r == 0 {
                return out;
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

/// Sum of the first `x_r` chain weights on each resource.
pub fn chain_weight(chains: &[Vec<u64>], x: &[u64]) -> u64 {
    chains
        .iter()
        .zip(x)
        .map(|(w, &k)| w[..k as usize].iter().sum::<u64>())
        .sum()
}

/// `Σ_r y_r c_r(a_r + y_r)`.
pub fn direct_cost(costs: &[CostTable], a: &[u64], y: &[u64]) -> u64 {
    (0..y.len())
        .map(|r| y[r] * costs[r].values()[(a[r] + y[r]) as usize])
        .sum()
}

pub fn hamming(x: &[u64], y: &[u64]) -> u64 {
    x.iter().zip(y).map(|(&a, &b)| a.abs_diff(b)).sum()
}

/// Brute-force strong semi-convexity: `M(a,x) <= M(b,y)` for all
/// `1 <= x <= y <= u`, `0 <= a <= b`, `b + y <= horizon`, where
/// `M(a,x) = c(a+x) x - c(a+x-1)(x-1)`.
pub fn brute_ssc(c: &[u64], horizon: u64, u: u64) -> bool {
    let m = |a: u64, x: u64| {
        let k = (a + x) as usize;
        c[k] as i128 * x as i128 - c[k - 1] as i128 * (x as i128 - 1)
    };
    let top = u.min(horizon);
    (1..=top).all(|x| {
        (x..=top).all(|y| {
            (0..=horizon - y).all(|b| (0..=b).all(|a| a + x > horizon || m(a, x) <= m(b, y)))
        })
    })
}

pub fn brute_convex(c: &[u64]) -> bool {
    c.windows(3).all(|w| w[2] + w[0] >= 2 * w[1])
}
