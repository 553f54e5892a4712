//! Explicit rooted trees as an application, for exercising the framework on
//! search trees of known shape.
//!
//! Input: the node count `N`, then for each node `0..N` in order a line
//! `k c1 .. ck` listing its children in slot order. Node 0 is the root.

use mts::app::{AppError, Application};
use mts::engine::SearchProblem;
use mts::node::NodeRecord;
use mts::options::{AppArgs, OptionSpec};
use mts::output::Output;

/// The 25-node example tree; its preorder numbering equals the labels.
pub const EXAMPLE_TREE: &str = "25
4 1 7 18 22
5 2 3 4 5 6
0
0
0
0
0
6 8 9 10 11 15 16
0
0
0
2 12 13
0
1 14
0
0
1 17
0
3 19 20 21
0
0
0
2 23 24
0
0
";

/// Options: `-stopat L` requests a clean stop right after node `L` is
/// printed, `-emergencyat L` an emergency stop, and `-block` prints every
/// node as a two-line output block.
pub const FIXTURE_OPTIONS: &[OptionSpec] = &[
    OptionSpec::value("-stopat"),
    OptionSpec::value("-emergencyat"),
    OptionSpec::flag("-block"),
];

#[derive(Debug, Clone)]
pub struct FixtureTree {
    children: Vec<Vec<u32>>,
    parent: Vec<Option<(u32, usize)>>,
    stop_at: Option<u32>,
    emergency_at: Option<u32>,
    block: bool,
}

impl FixtureTree {
    pub fn parse(input: &str) -> Result<Self, AppError> {
        let mut toks = input.split_whitespace().map(|t| {
            t.parse::<u32>()
                .map_err(|_| AppError::Parse(format!("bad token {t:?}")))
        });
        let mut next = || toks.next().unwrap_or(Err(AppError::Parse("unexpected end".into())));
        if input.trim().is_empty() {
            return Err(AppError::NoInput);
        }
        let n = next()? as usize;
        let mut children = Vec::with_capacity(n);
        let mut parent = vec![None; n];
        for v in 0..n {
            let k = next()?;
            let mut cs = Vec::new();
            for slot in 1..=k as usize {
                let c = next()?;
                if c == 0 || c as usize >= n || parent[c as usize].is_some() {
                    return Err(AppError::Invalid(format!("bad child {c} of {v}")));
                }
                parent[c as usize] = Some((v as u32, slot));
                cs.push(c);
            }
            children.push(cs);
        }
        if let Some(v) = (1..n).find(|&v| parent[v].is_none()) {
            return Err(AppError::Invalid(format!("node {v} has no parent")));
        }
        Ok(FixtureTree {
            children,
            parent,
            stop_at: None,
            emergency_at: None,
            block: false,
        })
    }

    pub fn len(&self) -> usize {
        self.children.len()
    }

    pub fn is_empty(&self) -> bool {
        self.children.is_empty()
    }

    /// Labels in preorder, root first, by an explicit stack.
    pub fn preorder(&self) -> Vec<u32> {
        let mut out = Vec::new();
        let mut stack = vec![0u32];
        while let Some(v) = stack.pop() {
            out.push(v);
            stack.extend(self.children[v as usize].iter().rev());
        }
        out
    }

    /// Depth of every node.
    pub fn depths(&self) -> Vec<u64> {
        let mut d = vec![0; self.len()];
        for v in self.preorder() {
            if let Some((p, _)) = self.parent[v as usize] {
                d[v as usize] = d[p as usize] + 1;
            }
        }
        d
    }
}

/// Input text for a random tree with `n` nodes; node `i > 0` hangs below a
/// node chosen by `pick(i)` among `0..i`.
pub fn random_tree_text(n: usize, mut pick: impl FnMut(usize) -> usize) -> String {
    let mut children = vec![Vec::new(); n];
    for i in 1..n {
        children[pick(i) % i].push(i);
    }
    let mut s = format!("{n}\n");
    for cs in children {
        s += &cs.len().to_string();
        for c in cs {
            s += &format!(" {c}");
        }
        s.push('\n');
    }
    s
}

impl SearchProblem for FixtureTree {
    type Node = u32;

    fn max_degree(&self) -> usize {
        self.children.iter().map(Vec::len).max().unwrap_or(0)
    }

    fn root(&self) -> u32 {
        0
    }

    fn adjacent(&self, v: &u32, j: usize) -> Option<u32> {
        self.children[*v as usize].get(j - 1).copied()
    }

    fn parent(&self, v: &u32) -> Option<(u32, usize)> {
        self.parent[*v as usize]
    }
}

impl Application for FixtureTree {
    const NAME: &'static str = "fixture";
    const OPTIONS: &'static [OptionSpec] = FIXTURE_OPTIONS;

    fn init(input: &str, args: &AppArgs) -> Result<Self, AppError> {
        let mut t = FixtureTree::parse(input)?;
        let label = |name: &str| -> Result<Option<u32>, AppError> {
            args.value(name)
                .map(|v| v.parse().map_err(|_| AppError::Invalid(format!("{name} {v}"))))
                .transpose()
        };
        t.stop_at = label("-stopat")?;
        t.emergency_at = label("-emergencyat")?;
        t.block = args.flag("-block");
        Ok(t)
    }

    fn encode(&self, v: &u32) -> NodeRecord {
        NodeRecord::from_longs(vec![*v as i64])
    }

    fn decode(&self, r: &NodeRecord) -> Result<u32, AppError> {
        match r.vlong.as_slice() {
            [x] if *x >= 0 && (*x as usize) < self.len() => Ok(*x as u32),
            other => Err(AppError::Decode(format!("{other:?}"))),
        }
    }

    fn put_output(&self, v: &u32, depth: u64, unexplored: bool, out: &mut Output<'_>) {
        let mark = if unexplored && !out.is_parallel() {
            " *unexplored"
        } else {
            ""
        };
        if self.block {
            out.begin_block().expect("blocks are not nested");
            out.write_bytes(format!(" {v} d={depth}{mark}\n").as_bytes());
            out.write_bytes(format!("# end {v}\n").as_bytes());
            out.end_block();
        } else {
            out.write_bytes(format!(" {v} d={depth}{mark}\n").as_bytes());
        }
        if self.stop_at == Some(*v) {
            out.clean_stop();
        }
        if self.emergency_at == Some(*v) {
            out.emergency_stop(format!("requested at node {v}"));
        }
    }

    fn summary(&self, total: u64) -> Option<String> {
        Some(format!("number of nodes={total}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_tree_shape() {
        let t = FixtureTree::parse(EXAMPLE_TREE).unwrap();
        assert_eq!(t.len(), 25);
        assert_eq!(t.max_degree(), 6);
        assert_eq!(t.preorder(), (0..25).collect::<Vec<_>>());
        assert_eq!(t.depths()[14], 4);
    }

    #[test]
    fn rejects_non_trees() {
        assert!(FixtureTree::parse("2\n0\n0\n").is_err());
        assert!(FixtureTree::parse("2\n1 1\n1 1\n").is_err());
        assert_eq!(FixtureTree::parse("").unwrap_err(), AppError::NoInput);
    }

    #[test]
    fn random_trees_parse() {
        let text = random_tree_text(30, |i| i * 7 + 3);
        let t = FixtureTree::parse(&text).unwrap();
        assert_eq!(t.preorder().len(), 30);
    }
}
