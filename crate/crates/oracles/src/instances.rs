//! Instance families and their input text.

use std::collections::BTreeSet;

pub type Instance = (usize, Vec<(u32, u32)>);

/// `n m` followed by one pair per line, the format both applications read.
pub fn to_text(inst: &Instance) -> String {
    let (n, pairs) = inst;
    let mut s = format!("{n} {}\n", pairs.len());
    for (a, b) in pairs {
        s += &format!("{a} {b}\n");
    }
    s
}

pub fn antichain(n: usize) -> Instance {
    (n, Vec::new())
}

pub fn chain(n: usize) -> Instance {
    (n, (1..n as u32).map(|i| (i, i + 1)).collect())
}

/// The 2 x k grid whose linear extensions are standard Young tableaux of
/// shape (k, k): column `i` is `(2i-1, 2i)`.
pub fn tableaux(k: usize) -> Instance {
    let mut p = Vec::new();
    for i in 1..=k as u32 {
        p.push((2 * i - 1, 2 * i));
        if i < k as u32 {
            p.push((2 * i - 1, 2 * i + 1));
            p.push((2 * i, 2 * i + 2));
        }
    }
    (2 * k, p)
}

/// Perfect-matching poset on 2k elements: `2i-1 < 2i` and the odd elements
/// form a chain. It has (2k-1)!! linear extensions.
pub fn matching(k: usize) -> Instance {
    let mut p = Vec::new();
    for i in 1..=k as u32 {
        p.push((2 * i - 1, 2 * i));
        if i < k as u32 {
            p.push((2 * i - 1, 2 * i + 1));
        }
    }
    (2 * k, p)
}

pub fn complete_graph(n: usize) -> Instance {
    let n32 = n as u32;
    (n, (1..=n32).flat_map(|i| (i + 1..=n32).map(move |j| (i, j))).collect())
}

pub fn cycle_graph(n: usize) -> Instance {
    let n32 = n as u32;
    let mut e: Vec<_> = (1..n32).map(|i| (i, i + 1)).collect();
    e.push((1, n32));
    (n, e)
}

pub fn complete_bipartite(a: usize, b: usize) -> Instance {
    let (a32, b32) = (a as u32, b as u32);
    (
        a + b,
        (1..=a32)
            .flat_map(|i| (a32 + 1..=a32 + b32).map(move |j| (i, j)))
            .collect(),
    )
}

pub fn petersen() -> Instance {
    let mut e = Vec::new();
    for i in 0..5u32 {
        e.push((i + 1, (i + 1) % 5 + 1));
        e.push((i + 1, i + 6));
        e.push((i + 6, (i + 2) % 5 + 6));
    }
    (10, e)
}

fn connected(n: usize, e: &[(u32, u32)]) -> bool {
    let mut seen = vec![false; n + 1];
    let mut stack = vec![1usize];
    seen[1] = true;
    while let Some(v) = stack.pop() {
        for &(a, b) in e {
            for (x, y) in [(a, b), (b, a)] {
                if x as usize == v && !seen[y as usize] {
                    seen[y as usize] = true;
                    stack.push(y as usize);
                }
            }
        }
    }
    seen[1..].iter().all(|&s| s)
}

/// Every connected labelled graph on exactly `n` vertices.
pub fn connected_graphs(n: usize) -> Vec<Instance> {
    let (_, all) = complete_graph(n);
    let mut out = Vec::new();
    for mask in 0u64..(1 << all.len()) {
        let e: Vec<_> = all
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &p)| p)
            .collect();
        if connected(n, &e) {
            out.push((n, e));
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n as u32);
            out.push(q);
        }
    }
    out
}

/// One representative of each isomorphism class of connected graphs on
/// exactly `n` vertices.
pub fn connected_graphs_up_to_iso(n: usize) -> Vec<Instance> {
    let perms = permutations(n);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (n, e) in connected_graphs(n) {
        let canon = perms
            .iter()
            .map(|p| {
                let mut f: Vec<_> = e
                    .iter()
                    .map(|&(a, b)| {
                        let (x, y) = (p[a as usize - 1], p[b as usize - 1]);
                        (x.min(y), x.max(y))
                    })
                    .collect();
                f.sort_unstable();
                f
            })
            .min()
            .expect("at least one permutation");
        if seen.insert(canon) {
            out.push((n, e));
        }
    }
    out
}
