//! Linear extensions (topological sorts) of a partial order.
//!
//! Nodes are permutations of `1..=n` that respect every precedence pair.
//! Neighbours differ by swapping two adjacent, unrelated elements; the
//! parent of a permutation undoes its leftmost descent, so the identity is
//! the root.

use crate::app::{decode_labels, read_pairs, write_labels, AppError, Application, CommonOptions, COMMON_OPTIONS};
use crate::engine::{PruneMode, SearchProblem};
use crate::node::NodeRecord;
use crate::options::{AppArgs, OptionSpec};
use crate::output::Output;

/// Largest supported element count.
pub const MAX_ELEMENTS: usize = 100;

/// A DAG on `1..=n` whose edges all go from a smaller to a larger label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poset {
    n: usize,
    edges: Vec<(u32, u32)>,
    // row-major (n + 1) x (n + 1), 1-indexed
    prec: Vec<bool>,
}

impl Poset {
    /// Parses `n m` followed by `m` pairs `i j` meaning `i` precedes `j`.
    pub fn parse(input: &str) -> Result<Self, AppError> {
        let (n, pairs) = read_pairs(input)?;
        if n as usize > MAX_ELEMENTS {
            return Err(AppError::Invalid(format!(
                "at most {MAX_ELEMENTS} elements are supported, got {n}"
            )));
        }
        let edges = pairs
            .into_iter()
            .map(|(i, j)| {
                if i < 1 || j > n || i >= j {
                    Err(AppError::Invalid(format!(
                        "pair ({i}, {j}) must satisfy 1 <= i < j <= {n}"
                    )))
                } else {
                    Ok((i as u32, j as u32))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Poset::new(n as usize, edges)
    }

    pub fn new(n: usize, edges: Vec<(u32, u32)>) -> Result<Self, AppError> {
        if n == 0 || n > MAX_ELEMENTS {
            return Err(AppError::Invalid(format!("element count {n} out of range")));
        }
        let mut prec = vec![false; (n + 1) * (n + 1)];
        for &(i, j) in &edges {
            if i < 1 || j as usize > n || i >= j {
                return Err(AppError::Invalid(format!(
                    "pair ({i}, {j}) must satisfy 1 <= i < j <= {n}"
                )));
            }
            prec[i as usize * (n + 1) + j as usize] = true;
        }
        Ok(Poset { n, edges, prec })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Whether the input lists `i` before `j` directly.
    pub fn precedes(&self, i: u32, j: u32) -> bool {
        self.prec[i as usize * (self.n + 1) + j as usize]
    }

    fn related(&self, a: u32, b: u32) -> bool {
        self.precedes(a, b) || self.precedes(b, a)
    }
}

/// The identity permutation.
pub fn ts_root(p: &Poset) -> Vec<u32> {
    (1..=p.n as u32).collect()
}

/// Swaps positions `j` and `j + 1` (1-based) unless the two elements are
/// related.
pub fn ts_adj(p: &Poset, v: &[u32], j: usize) -> Option<Vec<u32>> {
    let (a, b) = (v[j - 1], v[j]);
    if p.related(a, b) {
        return None;
    }
    let mut w = v.to_vec();
    w.swap(j - 1, j);
    Some(w)
}

/// Undoes the leftmost descent. Panics on the identity, which has no parent.
pub fn ts_f(v: &[u32]) -> (Vec<u32>, usize) {
    let p = leftmost_descent(v).expect("the identity permutation has no parent");
    let mut u = v.to_vec();
    u.swap(p, p + 1);
    (u, p + 1)
}

fn leftmost_descent(v: &[u32]) -> Option<usize> {
    v.windows(2).position(|w| w[0] > w[1])
}

/// Linear extension enumeration as an application.
#[derive(Debug, Clone)]
pub struct TopSorts {
    poset: Poset,
    opts: CommonOptions,
}

impl TopSorts {
    pub fn new(poset: Poset, opts: CommonOptions) -> Self {
        TopSorts { poset, opts }
    }

    pub fn poset(&self) -> &Poset {
        &self.poset
    }
}

impl SearchProblem for TopSorts {
    type Node = Vec<u32>;

    fn max_degree(&self) -> usize {
        self.poset.n - 1
    }

    fn root(&self) -> Vec<u32> {
        ts_root(&self.poset)
    }

    fn adjacent(&self, v: &Vec<u32>, j: usize) -> Option<Vec<u32>> {
        ts_adj(&self.poset, v, j)
    }

    fn parent(&self, v: &Vec<u32>) -> Option<(Vec<u32>, usize)> {
        leftmost_descent(v).map(|_| ts_f(v))
    }

    // Swapping positions j, j+1 yields a child exactly when it creates a
    // descent at j and nothing to its left descends.
    fn forward(&self, v: &Vec<u32>, j: usize) -> Option<Vec<u32>> {
        let p = j - 1;
        let (a, b) = (v[p], v[p + 1]);
        if a > b || self.poset.related(a, b) {
            return None;
        }
        if p > 0 && (v[p - 1] > b || v[..p].windows(2).any(|w| w[0] > w[1])) {
            return None;
        }
        let mut w = v.clone();
        w.swap(p, p + 1);
        Some(w)
    }
}

impl Application for TopSorts {
    const NAME: &'static str = "topsort";
    const OPTIONS: &'static [OptionSpec] = COMMON_OPTIONS;

    fn init(input: &str, args: &AppArgs) -> Result<Self, AppError> {
        let opts = CommonOptions::from_args(args)?;
        Ok(TopSorts::new(Poset::parse(input)?, opts))
    }

    fn encode(&self, v: &Vec<u32>) -> NodeRecord {
        NodeRecord::from_longs(v.iter().map(|&x| x as i64).collect())
    }

    fn decode(&self, record: &NodeRecord) -> Result<Vec<u32>, AppError> {
        decode_labels(record, self.poset.n, self.poset.n)
    }

    fn put_output(&self, v: &Vec<u32>, depth: u64, unexplored: bool, out: &mut Output<'_>) {
        if !self.opts.countonly {
            write_labels(v.iter().copied(), depth, unexplored, out);
        }
    }

    fn prune(&self) -> PruneMode {
        self.opts.prune
    }

    fn summary(&self, total: u64) -> Option<String> {
        Some(format!("number of permutations={total}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poset(n: usize, edges: &[(u32, u32)]) -> Poset {
        Poset::new(n, edges.to_vec()).unwrap()
    }

    #[test]
    fn parse_examples() {
        let p = Poset::parse("3 1  1 2").unwrap();
        assert_eq!((p.n(), p.m()), (3, 1));
        assert!(p.precedes(1, 2) && !p.precedes(2, 1));
        assert_eq!(Poset::parse(""), Err(AppError::NoInput));
        assert_eq!(Poset::parse("").unwrap_err().to_string(), "no input found");
        let err = Poset::parse("3 1  2 1").unwrap_err();
        assert!(err.to_string().contains("(2, 1)"), "{err}");
        assert!(Poset::parse("3 1  1 4").is_err());
        assert!(Poset::parse("101 0").is_err());
        assert!(Poset::parse("100 0").is_ok());
    }

    #[test]
    fn root_is_identity() {
        assert_eq!(ts_root(&poset(3, &[])), vec![1, 2, 3]);
        assert_eq!(ts_root(&poset(1, &[])), vec![1]);
    }

    #[test]
    fn adjacency_examples() {
        let free = poset(3, &[]);
        assert_eq!(ts_adj(&free, &[1, 2, 3], 1), Some(vec![2, 1, 3]));
        let p = poset(3, &[(1, 2)]);
        assert_eq!(ts_adj(&p, &[1, 2, 3], 1), None);
        assert_eq!(ts_adj(&p, &[1, 3, 2], 2), Some(vec![1, 2, 3]));
        assert_eq!(ts_adj(&p, &[1, 3, 2], 1), Some(vec![3, 1, 2]));
    }

    #[test]
    fn parent_examples() {
        assert_eq!(ts_f(&[2, 1, 3]), (vec![1, 2, 3], 1));
        assert_eq!(ts_f(&[1, 3, 2]), (vec![1, 2, 3], 2));
        assert_eq!(ts_f(&[3, 1, 2]), (vec![1, 3, 2], 1));
        let ts = TopSorts::new(poset(3, &[]), CommonOptions::default());
        assert_eq!(ts.parent(&vec![1, 2, 3]), None);
    }

    #[test]
    #[should_panic(expected = "no parent")]
    fn parent_of_identity_panics() {
        ts_f(&[1, 2, 3]);
    }

    #[test]
    fn record_round_trip_and_validation() {
        let ts = TopSorts::new(poset(3, &[]), CommonOptions::default());
        let r = ts.encode(&vec![3, 1, 2]);
        assert_eq!(r.vlong, vec![3, 1, 2]);
        assert_eq!(ts.decode(&r).unwrap(), vec![3, 1, 2]);
        assert!(ts.decode(&NodeRecord::from_longs(vec![1, 2])).is_err());
        assert!(ts.decode(&NodeRecord::from_longs(vec![1, 2, 4])).is_err());
    }

    fn arb_extension() -> impl Strategy<Value = (Poset, Vec<u32>)> {
        (2usize..8)
            .prop_flat_map(|n| {
                let pairs: Vec<(u32, u32)> = (1..=n as u32)
                    .flat_map(|i| (i + 1..=n as u32).map(move |j| (i, j)))
                    .collect();
                let k = pairs.len();
                (
                    Just(n),
                    Just(pairs),
                    proptest::collection::vec(any::<bool>(), k),
                    any::<u64>(),
                )
            })
            .prop_map(|(n, pairs, keep, seed)| {
                let edges: Vec<_> = pairs
                    .into_iter()
                    .zip(keep)
                    .filter(|(_, k)| *k)
                    .map(|(e, _)| e)
                    .collect();
                let p = Poset::new(n, edges).unwrap();
                // random walk of adjacent swaps from the identity
                let mut v = ts_root(&p);
                let mut s = seed;
                for _ in 0..40 {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    let j = 1 + (s >> 33) as usize % (n - 1);
                    if let Some(w) = ts_adj(&p, &v, j) {
                        v = w;
                    }
                }
                (p, v)
            })
    }

    proptest! {
        #[test]
        fn parent_chain_reaches_identity((p, v) in arb_extension()) {
            let ts = TopSorts::new(p.clone(), CommonOptions::default());
            let n = p.n();
            let mut cur = v;
            let mut steps = 0;
            while let Some((u, j)) = ts.parent(&cur) {
                prop_assert_eq!(ts.adjacent(&u, j), Some(cur.clone()));
                cur = u;
                steps += 1;
                prop_assert!(steps <= n * (n - 1) / 2);
            }
            prop_assert_eq!(cur, ts_root(&p));
        }

        #[test]
        fn fast_forward_agrees_with_definition((p, v) in arb_extension()) {
            let ts = TopSorts::new(p.clone(), CommonOptions::default());
            for j in 1..p.n() {
                let slow = ts.adjacent(&v, j).filter(|w| ts.parent(w).map(|(u, _)| u) == Some(v.clone()));
                prop_assert_eq!(ts.forward(&v, j), slow);
            }
        }
    }
}
