//! Reference implementations used only by tests.
//!
//! Nothing here shares traversal code with the engine: linear extensions and
//! spanning trees are enumerated by plain backtracking or exhaustive subset
//! search, and tree counts come from the matrix-tree theorem.

pub mod fixture;
pub mod instances;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

/// All linear extensions of the order on `1..=n` generated by `pairs`
/// (`(a, b)` meaning `a` comes before `b`), by repeatedly choosing a
/// currently minimal element. Sorted lexicographically.
pub fn brute_lin_ext(n: usize, pairs: &[(u32, u32)]) -> Vec<Vec<u32>> {
    assert!(n <= 16, "brute_lin_ext is for small posets only");
    let mut preds = vec![0u32; n + 1];
    for &(a, b) in pairs {
        preds[b as usize] |= 1 << a;
    }
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn go(n: usize, preds: &[u32], placed: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for x in 1..=n as u32 {
            if placed & (1 << x) == 0 && preds[x as usize] & !placed == 0 {
                cur.push(x);
                go(n, preds, placed | (1 << x), cur, out);
                cur.pop();
            }
        }
    }
    go(n, &preds, 0, &mut cur, &mut out);
    out
}

/// Number of linear extensions by dynamic programming over down-sets.
pub fn count_lin_ext(n: usize, pairs: &[(u32, u32)]) -> u64 {
    assert!(n <= 24, "count_lin_ext uses 2^n memory");
    let mut preds = vec![0u32; n];
    for &(a, b) in pairs {
        preds[b as usize - 1] |= 1 << (a - 1);
    }
    let mut ways = vec![0u64; 1 << n];
    ways[0] = 1;
    for s in 0..(1usize << n) {
        let w = ways[s];
        if w == 0 {
            continue;
        }
        for x in 0..n {
            if s & (1 << x) == 0 && preds[x] as usize & !s == 0 {
                ways[s | (1 << x)] += w;
            }
        }
    }
    ways[(1 << n) - 1]
}

/// Edges normalised to `(min, max)` and sorted; edge `i` of the result has
/// id `i + 1`.
pub fn numbered_edges(edges: &[(u32, u32)]) -> Vec<(u32, u32)> {
    let mut e: Vec<_> = edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    e.sort_unstable();
    e
}

/// Every spanning tree of the graph on `1..=n`, as sorted lists of edge ids
/// in the numbering of [`numbered_edges`], found by testing every
/// `(n-1)`-subset of edges for acyclicity. Sorted lexicographically.
pub fn brute_spantrees(n: usize, edges: &[(u32, u32)]) -> Vec<Vec<u32>> {
    let e = numbered_edges(edges);
    let k = n - 1;
    let mut out = Vec::new();
    let mut pick = Vec::with_capacity(k);
    fn acyclic(n: usize, e: &[(u32, u32)], pick: &[usize]) -> bool {
        let mut comp: Vec<usize> = (0..=n).collect();
        for &i in pick {
            let (a, b) = e[i];
            let (ca, cb) = (comp[a as usize], comp[b as usize]);
            if ca == cb {
                return false;
            }
            for c in comp.iter_mut() {
                if *c == cb {
                    *c = ca;
                }
            }
        }
        true
    }
    fn go(n: usize, e: &[(u32, u32)], k: usize, from: usize, pick: &mut Vec<usize>, out: &mut Vec<Vec<u32>>) {
        if pick.len() == k {
            if acyclic(n, e, pick) {
                out.push(pick.iter().map(|&i| i as u32 + 1).collect());
            }
            return;
        }
        for i in from..e.len() {
            pick.push(i);
            go(n, e, k, i + 1, pick, out);
            pick.pop();
        }
    }
    go(n, &e, k, 0, &mut pick, &mut out);
    out
}

/// Number of spanning trees: determinant of the Laplacian with the last row
/// and column removed, by fraction-free (Bareiss) elimination.
pub fn kirchhoff_count(n: usize, edges: &[(u32, u32)]) -> BigInt {
    if n <= 1 {
        return BigInt::one();
    }
    let m = n - 1;
    let mut a = vec![vec![BigInt::zero(); m]; m];
    for &(u, v) in edges {
        let (u, v) = (u as usize - 1, v as usize - 1);
        for (x, y) in [(u, v), (v, u)] {
            if x < m {
                a[x][x] += 1;
                if y < m {
                    a[x][y] -= 1;
                }
            }
        }
    }
    let mut sign = 1;
    let mut prev = BigInt::one();
    for k in 0..m {
        if a[k][k].is_zero() {
            match (k + 1..m).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..m {
            for j in k + 1..m {
                let t = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = t / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    prev * sign
}

/// One parsed output line: `" l1 l2 ... d=<depth>"`, optionally followed by
/// `" *unexplored"`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputLine {
    pub labels: Vec<u32>,
    pub depth: u64,
    pub unexplored: bool,
}

/// Parses the node lines of a run's output, skipping anything else.
pub fn parse_output(text: &str) -> Vec<OutputLine> {
    text.lines()
        .filter_map(|l| {
            let mut labels = Vec::new();
            let mut depth = None;
            let mut unexplored = false;
            for tok in l.split_whitespace() {
                if let Some(d) = tok.strip_prefix("d=") {
                    depth = Some(d.parse().ok()?);
                } else if tok == "*unexplored" {
                    unexplored = true;
                } else {
                    labels.push(tok.parse().ok()?);
                }
            }
            Some(OutputLine {
                labels,
                depth: depth?,
                unexplored,
            })
        })
        .collect()
}

/// Multiset of node label lists.
pub fn multiset<I: IntoIterator<Item = Vec<u32>>>(nodes: I) -> BTreeMap<Vec<u32>, usize> {
    let mut m = BTreeMap::new();
    for v in nodes {
        *m.entry(v).or_insert(0) += 1;
    }
    m
}
