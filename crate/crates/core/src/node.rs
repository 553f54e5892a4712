//! The generic tree node shipped between master and workers.

/// Application-agnostic node of the search tree.
///
/// Applications pack whatever they need into the four payload arrays; the
/// framework only looks at `depth` and `unexplored`. Array sizes are the
/// vector lengths, so an absent array simply has length zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NodeRecord {
    pub vlong: Vec<i64>,
    pub vint: Vec<i32>,
    pub vchar: Vec<u8>,
    pub vfloat: Vec<f32>,
    /// Absolute depth in the global search tree.
    pub depth: u64,
    /// The subtree below this node has not been explored yet.
    pub unexplored: bool,
}

impl NodeRecord {
    /// A record carrying only integer words, which is all the bundled
    /// applications need.
    pub fn from_longs(vlong: Vec<i64>) -> Self {
        NodeRecord {
            vlong,
            ..Default::default()
        }
    }

    pub fn with_depth(mut self, depth: u64) -> Self {
        self.depth = depth;
        self
    }

    pub fn with_unexplored(mut self, unexplored: bool) -> Self {
        self.unexplored = unexplored;
        self
    }

    /// True when the payloads match, ignoring depth and the unexplored flag.
    pub fn same_payload(&self, other: &NodeRecord) -> bool {
        self.vlong == other.vlong
            && self.vint == other.vint
            && self.vchar == other.vchar
            && self.vfloat.len() == other.vfloat.len()
            && self
                .vfloat
                .iter()
                .zip(&other.vfloat)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}
