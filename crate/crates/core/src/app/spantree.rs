//! Spanning trees of a connected simple graph.
//!
//! Edges are numbered `1..=m` in lexicographic order of their endpoints, and
//! a tree is the sorted list of its `n - 1` edge numbers. Two trees are
//! neighbours when they differ by a single edge exchange. Using edge numbers
//! as weights, the root is the unique minimum spanning tree and the parent
//! of any other tree is obtained by the first improving exchange.

use std::collections::VecDeque;

use crate::app::{decode_labels, read_pairs, write_labels, AppError, Application, CommonOptions, COMMON_OPTIONS};
use crate::engine::{PruneMode, SearchProblem};
use crate::node::NodeRecord;
use crate::options::{AppArgs, OptionSpec};
use crate::output::Output;

/// Edge number, 1-based.
pub type EdgeId = u32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UGraph {
    n: usize,
    // edges[k - 1] is edge k, with u < w
    edges: Vec<(u32, u32)>,
}

impl UGraph {
    pub fn parse(input: &str) -> Result<Self, AppError> {
        let (n, pairs) = read_pairs(input)?;
        let n = usize::try_from(n).map_err(|_| AppError::Invalid(format!("bad vertex count {n}")))?;
        let mut edges = Vec::with_capacity(pairs.len());
        for (a, b) in pairs {
            if a < 1 || b < 1 || a as usize > n || b as usize > n {
                return Err(AppError::Invalid(format!(
                    "edge ({a}, {b}) has an endpoint outside 1..={n}"
                )));
            }
            edges.push((a as u32, b as u32));
        }
        UGraph::new(n, edges)
    }

    /// Normalizes, sorts and validates an edge list.
    pub fn new(n: usize, edges: Vec<(u32, u32)>) -> Result<Self, AppError> {
        if n == 0 {
            return Err(AppError::Invalid("graph needs at least one vertex".into()));
        }
        let mut edges: Vec<(u32, u32)> = edges
            .into_iter()
            .map(|(a, b)| if a < b { (a, b) } else { (b, a) })
            .collect();
        for &(a, b) in &edges {
            if a == b {
                return Err(AppError::Invalid(format!("loop at vertex {a}")));
            }
            if a < 1 || b as usize > n {
                return Err(AppError::Invalid(format!(
                    "edge ({a}, {b}) has an endpoint outside 1..={n}"
                )));
            }
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(AppError::Invalid(format!("duplicate edge ({}, {})", w[0].0, w[0].1)));
        }
        let g = UGraph { n, edges };
        let mut dsu = Dsu::new(n);
        let joined = g
            .edges
            .iter()
            .filter(|&&(a, b)| dsu.union(a as usize, b as usize))
            .count();
        if joined + 1 != n {
            return Err(AppError::Invalid(format!(
                "graph is disconnected ({} components)",
                n - joined
            )));
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Endpoints of edge `e`.
    pub fn edge(&self, e: EdgeId) -> (u32, u32) {
        self.edges[e as usize - 1]
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Upper bound on the number of exchange neighbours of a tree.
    pub fn max_degree(&self) -> usize {
        (self.m() + 1 - self.n) * (self.n - 1)
    }
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..=n).collect())
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra] = rb;
        true
    }
}

/// The minimum spanning tree under edge-number weights.
pub fn st_root(g: &UGraph) -> Vec<EdgeId> {
    let mut dsu = Dsu::new(g.n);
    (1..=g.m() as EdgeId)
        .filter(|&e| {
            let (a, b) = g.edge(e);
            dsu.union(a as usize, b as usize)
        })
        .collect()
}

/// A spanning tree rooted at vertex 1, for path queries.
struct RootedTree {
    // per vertex: parent vertex and the edge to it (0 for the root)
    up: Vec<(u32, EdgeId)>,
    depth: Vec<u32>,
}

impl RootedTree {
    fn new(g: &UGraph, tree: &[EdgeId]) -> Self {
        let mut adj = vec![Vec::new(); g.n + 1];
        for &e in tree {
            let (a, b) = g.edge(e);
            adj[a as usize].push((b, e));
            adj[b as usize].push((a, e));
        }
        let mut up = vec![(0, 0); g.n + 1];
        let mut depth = vec![u32::MAX; g.n + 1];
        depth[1] = 0;
        let mut queue = VecDeque::from([1u32]);
        while let Some(x) = queue.pop_front() {
            for &(y, e) in &adj[x as usize] {
                if depth[y as usize] == u32::MAX {
                    depth[y as usize] = depth[x as usize] + 1;
                    up[y as usize] = (x, e);
                    queue.push_back(y);
                }
            }
        }
        RootedTree { up, depth }
    }

    /// Edges on the tree path between `a` and `b`.
    fn path(&self, mut a: u32, mut b: u32) -> impl Iterator<Item = EdgeId> {
        let mut edges = Vec::new();
        while a != b {
            let (da, db) = (self.depth[a as usize], self.depth[b as usize]);
            if da >= db {
                let (p, e) = self.up[a as usize];
                edges.push(e);
                a = p;
            } else {
                let (p, e) = self.up[b as usize];
                edges.push(e);
                b = p;
            }
        }
        edges.into_iter()
    }
}

fn non_tree_edges(g: &UGraph, tree: &[EdgeId]) -> Vec<EdgeId> {
    let mut out = Vec::with_capacity(g.m() + 1 - g.n);
    let mut it = tree.iter().peekable();
    for e in 1..=g.m() as EdgeId {
        if it.peek() == Some(&&e) {
            it.next();
        } else {
            out.push(e);
        }
    }
    out
}

/// `e` together with the tree path between its endpoints, sorted.
/// Panics if `e` is a tree edge.
pub fn fundamental_cycle(g: &UGraph, tree: &[EdgeId], e: EdgeId) -> Vec<EdgeId> {
    assert!(tree.binary_search(&e).is_err(), "edge {e} is already in the tree");
    let (a, b) = g.edge(e);
    let mut cycle: Vec<EdgeId> = RootedTree::new(g, tree).path(a, b).collect();
    cycle.push(e);
    cycle.sort_unstable();
    cycle
}

fn exchange(tree: &[EdgeId], add: EdgeId, remove: EdgeId) -> Vec<EdgeId> {
    let mut t: Vec<EdgeId> = tree.iter().copied().filter(|&x| x != remove).collect();
    let pos = t.binary_search(&add).unwrap_err();
    t.insert(pos, add);
    t
}

/// Slot index of the exchange "add `add`, remove `remove`" from `tree`.
fn slot(g: &UGraph, tree: &[EdgeId], add: EdgeId, remove: EdgeId) -> usize {
    let a = non_tree_edges(g, tree)
        .binary_search(&add)
        .expect("added edge is not a non-tree edge");
    let b = tree.binary_search(&remove).expect("removed edge is not a tree edge");
    a * (g.n - 1) + b + 1
}

/// Parent of `tree`: exchange the smallest non-tree edge whose cycle holds
/// a larger tree edge against the largest edge of that cycle. Panics on the
/// root.
pub fn st_f(g: &UGraph, tree: &[EdgeId]) -> (Vec<EdgeId>, usize) {
    try_parent(g, tree).expect("the minimum spanning tree has no parent")
}

fn try_parent(g: &UGraph, tree: &[EdgeId]) -> Option<(Vec<EdgeId>, usize)> {
    let rooted = RootedTree::new(g, tree);
    for e in non_tree_edges(g, tree) {
        let (a, b) = g.edge(e);
        let gmax = rooted.path(a, b).max().expect("non-tree edge closes a cycle");
        if gmax > e {
            let parent = exchange(tree, e, gmax);
            let j = slot(g, &parent, gmax, e);
            return Some((parent, j));
        }
    }
    None
}

/// Exchange neighbour number `j`: slot `j` names the pair (a-th non-tree
/// edge, b-th tree edge); it is a neighbour when the tree edge lies on the
/// non-tree edge's cycle.
pub fn st_adj(g: &UGraph, tree: &[EdgeId], j: usize) -> Option<Vec<EdgeId>> {
    let k = g.n - 1;
    let (a, b) = ((j - 1) / k, (j - 1) % k);
    let e = *non_tree_edges(g, tree).get(a)?;
    let out = tree[b];
    let (x, y) = g.edge(e);
    RootedTree::new(g, tree)
        .path(x, y)
        .any(|p| p == out)
        .then(|| exchange(tree, e, out))
}

#[derive(Debug, Clone)]
pub struct SpanTrees {
    graph: UGraph,
    root: Vec<EdgeId>,
    opts: CommonOptions,
}

impl SpanTrees {
    pub fn new(graph: UGraph, opts: CommonOptions) -> Self {
        let root = st_root(&graph);
        SpanTrees { graph, root, opts }
    }

    pub fn graph(&self) -> &UGraph {
        &self.graph
    }
}

impl SearchProblem for SpanTrees {
    type Node = Vec<EdgeId>;

    fn max_degree(&self) -> usize {
        self.graph.max_degree()
    }

    fn root(&self) -> Vec<EdgeId> {
        self.root.clone()
    }

    fn adjacent(&self, v: &Vec<EdgeId>, j: usize) -> Option<Vec<EdgeId>> {
        st_adj(&self.graph, v, j)
    }

    fn parent(&self, v: &Vec<EdgeId>) -> Option<(Vec<EdgeId>, usize)> {
        try_parent(&self.graph, v)
    }

    // Adding e and dropping g is a forward step exactly when, in the new
    // tree, g is the first non-tree edge with an improving exchange and e
    // is the largest edge on its cycle.
    fn forward(&self, v: &Vec<EdgeId>, j: usize) -> Option<Vec<EdgeId>> {
        let g = &self.graph;
        let k = g.n - 1;
        let (a, b) = ((j - 1) / k, (j - 1) % k);
        let nontree = non_tree_edges(g, v);
        let e = *nontree.get(a)?;
        let out = v[b];
        if out >= e {
            return None;
        }
        let rooted = RootedTree::new(g, v);
        let (x, y) = g.edge(e);
        if !rooted.path(x, y).any(|p| p == out) {
            return None;
        }
        let w = exchange(v, e, out);
        match try_parent(g, &w) {
            Some((u, _)) if u == *v => Some(w),
            _ => None,
        }
    }
}

impl Application for SpanTrees {
    const NAME: &'static str = "spantree";
    const OPTIONS: &'static [OptionSpec] = COMMON_OPTIONS;

    fn init(input: &str, args: &AppArgs) -> Result<Self, AppError> {
        let opts = CommonOptions::from_args(args)?;
        Ok(SpanTrees::new(UGraph::parse(input)?, opts))
    }

    fn encode(&self, v: &Vec<EdgeId>) -> NodeRecord {
        NodeRecord::from_longs(v.iter().map(|&x| x as i64).collect())
    }

    fn decode(&self, record: &NodeRecord) -> Result<Vec<EdgeId>, AppError> {
        let t = decode_labels(record, self.graph.n - 1, self.graph.m())?;
        if t.windows(2).any(|w| w[0] >= w[1]) {
            return Err(AppError::Decode("edge list is not strictly increasing".into()));
        }
        let mut dsu = Dsu::new(self.graph.n);
        for &e in &t {
            let (a, b) = self.graph.edge(e);
            if !dsu.union(a as usize, b as usize) {
                return Err(AppError::Decode(format!("edge {e} closes a cycle")));
            }
        }
        Ok(t)
    }

    fn put_output(&self, v: &Vec<EdgeId>, depth: u64, unexplored: bool, out: &mut Output<'_>) {
        if !self.opts.countonly {
            write_labels(v.iter().copied(), depth, unexplored, out);
        }
    }

    fn prune(&self) -> PruneMode {
        self.opts.prune
    }

    fn summary(&self, total: u64) -> Option<String> {
        Some(format!("number of spanning trees={total}"))
    }
}
