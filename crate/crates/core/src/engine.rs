//! Sequential search kernels: plain reverse search and budgeted reverse search.
//!
//! A problem is described by an adjacency oracle `adjacent(v, j)` for
//! `j = 1..=max_degree()` and a local search function `parent(v)` mapping
//! every non-root node to `(u, j)` with `adjacent(u, j) == v`. Neither
//! kernel stores visited nodes; backtracking goes through `parent`.

use std::fmt;
use std::num::NonZeroU64;

use thiserror::Error;

/// An enumeration problem explored by reverse search.
pub trait SearchProblem {
    type Node: Clone + PartialEq + fmt::Debug;

    /// Upper bound on the number of neighbours of any node.
    fn max_degree(&self) -> usize;

    /// The target node the local search converges to.
    fn root(&self) -> Self::Node;

    /// The `j`-th neighbour of `v` (`1 <= j <= max_degree()`), if any.
    fn adjacent(&self, v: &Self::Node, j: usize) -> Option<Self::Node>;

    /// Local search step: `Some((u, j))` with `adjacent(u, j) == v`, or
    /// `None` when `v` is the root.
    fn parent(&self, v: &Self::Node) -> Option<(Self::Node, usize)>;

    /// The child of `v` reached through slot `j`, if that neighbour is a
    /// child in the search tree. Applications may override this with a
    /// cheaper test, as long as the result agrees with the default.
    fn forward(&self, v: &Self::Node, j: usize) -> Option<Self::Node> {
        let w = self.adjacent(v, j)?;
        match self.parent(&w) {
            Some((u, _)) if u == *v => Some(w),
            _ => None,
        }
    }
}

impl<P: SearchProblem + ?Sized> SearchProblem for &P {
    type Node = P::Node;

    fn max_degree(&self) -> usize {
        (**self).max_degree()
    }
    fn root(&self) -> Self::Node {
        (**self).root()
    }
    fn adjacent(&self, v: &Self::Node, j: usize) -> Option<Self::Node> {
        (**self).adjacent(v, j)
    }
    fn parent(&self, v: &Self::Node) -> Option<(Self::Node, usize)> {
        (**self).parent(v)
    }
    fn forward(&self, v: &Self::Node, j: usize) -> Option<Self::Node> {
        (**self).forward(v, j)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BudgetError {
    #[error("max_depth must be positive")]
    ZeroDepth,
    #[error("max_nodes must be positive")]
    ZeroNodes,
}

/// Per-job limits. `None` means unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Budget {
    max_depth: Option<NonZeroU64>,
    max_nodes: Option<NonZeroU64>,
}

impl Budget {
    pub const UNLIMITED: Budget = Budget {
        max_depth: None,
        max_nodes: None,
    };

    pub fn new(max_depth: Option<u64>, max_nodes: Option<u64>) -> Result<Self, BudgetError> {
        let max_depth = match max_depth {
            Some(d) => Some(NonZeroU64::new(d).ok_or(BudgetError::ZeroDepth)?),
            None => None,
        };
        let max_nodes = match max_nodes {
            Some(n) => Some(NonZeroU64::new(n).ok_or(BudgetError::ZeroNodes)?),
            None => None,
        };
        Ok(Budget { max_depth, max_nodes })
    }

    pub fn max_depth(&self) -> Option<u64> {
        self.max_depth.map(NonZeroU64::get)
    }

    pub fn max_nodes(&self) -> Option<u64> {
        self.max_nodes.map(NonZeroU64::get)
    }

    pub fn is_unlimited(&self) -> bool {
        self.max_depth.is_none() && self.max_nodes.is_none()
    }

    /// Whether a node reached by the `count`-th forward step at local depth
    /// `depth` must be flagged instead of descended.
    pub fn is_exhausted(&self, count: u64, depth: u64) -> bool {
        self.max_nodes.is_some_and(|n| count >= n.get()) || self.max_depth.is_some_and(|d| depth >= d.get())
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::UNLIMITED
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: Option<u64>| v.map_or_else(|| "inf".to_string(), |v| v.to_string());
        write!(
            f,
            "(max_depth={}, max_nodes={})",
            show(self.max_depth()),
            show(self.max_nodes())
        )
    }
}

/// Which budget-exhausted nodes may be returned as unexplored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PruneMode {
    /// Every budget-exhausted node is returned.
    #[default]
    Off,
    /// Leaves are output as ordinary nodes instead of being returned.
    Leaves,
    /// Single-child chains are followed; only a node with two or more
    /// children is returned.
    Paths,
}

impl PruneMode {
    /// Maps the `-prune` option value: 0 prunes leaves, 1 prunes paths.
    pub fn from_level(level: i64) -> Option<Self> {
        match level {
            0 => Some(PruneMode::Leaves),
            1 => Some(PruneMode::Paths),
            _ => None,
        }
    }

    fn allows(self, class: ChildClass) -> bool {
        match self {
            PruneMode::Off => true,
            PruneMode::Leaves => class != ChildClass::Zero,
            PruneMode::Paths => class == ChildClass::TwoOrMore,
        }
    }
}

/// Number of children of a node, saturating at two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ChildClass {
    Zero,
    One,
    TwoOrMore,
}

/// What the emit sink wants the traversal to do next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    /// Treat the budget as exhausted from now on, so the rest of the subtree
    /// is handed back as unexplored nodes.
    Exhaust,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TraversalResult {
    /// Forward steps taken (nodes output, start excluded).
    pub count: u64,
    pub unexplored_emitted: u64,
}

/// Classifies how many children `v` has, stopping after the second.
pub fn child_count_class<P: SearchProblem>(problem: &P, v: &P::Node) -> ChildClass {
    let mut found = 0;
    for j in 1..=problem.max_degree() {
        if problem.forward(v, j).is_some() {
            found += 1;
            if found == 2 {
                return ChildClass::TwoOrMore;
            }
        }
    }
    if found == 1 {
        ChildClass::One
    } else {
        ChildClass::Zero
    }
}

/// Full reverse search of the subtree rooted at `start`.
///
/// Every proper descendant of `start` is passed to `emit` with its depth
/// relative to `start`, in depth-first order. `start` itself is not emitted.
pub fn reverse_search<P, E>(
    problem: &P,
    start: &P::Node,
    mut emit: impl FnMut(&P::Node, u64) -> Result<(), E>,
) -> Result<TraversalResult, E>
where
    P: SearchProblem,
{
    let delta = problem.max_degree();
    let mut v = start.clone();
    let mut j = 0;
    let mut depth = 0u64;
    let mut count = 0u64;
    loop {
        while j < delta {
            j += 1;
            if let Some(w) = problem.forward(&v, j) {
                v = w;
                j = 0;
                depth += 1;
                count += 1;
                emit(&v, depth)?;
            }
        }
        if depth > 0 {
            let (u, back) = backtrack(problem, &v);
            v = u;
            j = back;
            depth -= 1;
        }
        if depth == 0 && j == delta {
            break;
        }
    }
    Ok(TraversalResult {
        count,
        unexplored_emitted: 0,
    })
}

/// Budgeted reverse search from `start`.
///
/// Each node reached by a forward step is emitted once as
/// `emit(node, local_depth, unexplored)`. Once `budget` is exhausted, the
/// current node and every remaining sibling met while backtracking to
/// `start` are emitted with `unexplored = true` and not descended.
pub fn budgeted_search<P, E>(
    problem: &P,
    start: &P::Node,
    budget: Budget,
    prune: PruneMode,
    mut emit: impl FnMut(&P::Node, u64, bool) -> Result<Flow, E>,
) -> Result<TraversalResult, E>
where
    P: SearchProblem,
{
    let delta = problem.max_degree();
    let mut v = start.clone();
    let mut j = 0;
    let mut depth = 0u64;
    let mut count = 0u64;
    let mut unexplored_emitted = 0u64;
    let mut forced = false;
    loop {
        let mut unexplored = false;
        while j < delta && !unexplored {
            j += 1;
            if let Some(w) = problem.forward(&v, j) {
                check_forward_step(problem, &v, j, &w);
                v = w;
                j = 0;
                count += 1;
                depth += 1;
                if forced || budget.is_exhausted(count, depth) {
                    if prune == PruneMode::Off {
                        unexplored = true;
                    } else {
                        let class = child_count_class(problem, &v);
                        unexplored = prune.allows(class);
                        if class == ChildClass::Zero {
                            // nothing below a leaf; skip probing it again
                            j = delta;
                        }
                    }
                }
                if unexplored {
                    unexplored_emitted += 1;
                }
                if emit(&v, depth, unexplored)? == Flow::Exhaust {
                    forced = true;
                }
            }
        }
        if depth > 0 {
            let (u, back) = backtrack(problem, &v);
            v = u;
            j = back;
            depth -= 1;
        }
        if depth == 0 && j == delta {
            break;
        }
    }
    Ok(TraversalResult {
        count,
        unexplored_emitted,
    })
}

fn backtrack<P: SearchProblem>(problem: &P, v: &P::Node) -> (P::Node, usize) {
    problem
        .parent(v)
        .expect("local search returned no parent for a non-start node")
}

#[inline]
fn check_forward_step<P: SearchProblem>(problem: &P, v: &P::Node, j: usize, w: &P::Node) {
    if cfg!(debug_assertions) {
        let back = problem.parent(w);
        debug_assert!(
            matches!(&back, Some((u, i)) if u == v && *i == j),
            "local search disagrees with forward step: f({w:?}) = {back:?}, expected ({v:?}, {j})"
        );
        debug_assert_eq!(problem.adjacent(v, j).as_ref(), Some(w));
    }
}
