//! Index arithmetic on the complete binary tree over `n = 2^d` leaves and the
//! diagonal slicing of a subtree into disjoint pools.

use crate::error::{Error, Result};
use crate::ledger::Pool;

/// `log2(n)` when `n` is a power of two and at least 2.
pub fn tree_depth(n: usize) -> Result<u32> {
    if n >= 2 && n.is_power_of_two() {
        Ok(n.trailing_zeros())
    } else {
        Err(Error::NotPowerOfTwo(n))
    }
}

/// A node of the complete binary tree, identified by its depth and the
/// inclusive 1-based range of leaves below it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SubtreeRef {
    depth: u32,
    leaf_lo: usize,
    leaf_hi: usize,
}

impl SubtreeRef {
    pub fn root(n: usize) -> Result<Self> {
        tree_depth(n)?;
        Ok(Self {
            depth: 0,
            leaf_lo: 1,
            leaf_hi: n,
        })
    }

    /// Node at `depth` whose leftmost leaf is `leaf_lo`, in a tree of `n` leaves.
    pub fn new(n: usize, depth: u32, leaf_lo: usize) -> Result<Self> {
        let d = tree_depth(n)?;
        if depth > d {
            return Err(Error::param(format!("depth {depth} exceeds tree depth {d}")));
        }
        let size = 1usize << (d - depth);
        if leaf_lo == 0 || !(leaf_lo - 1).is_multiple_of(size) || leaf_lo + size - 1 > n {
            return Err(Error::param(format!(
                "leaf {leaf_lo} does not start a depth-{depth} subtree"
            )));
        }
        Ok(Self {
            depth,
            leaf_lo,
            leaf_hi: leaf_lo + size - 1,
        })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn leaf_lo(&self) -> usize {
        self.leaf_lo
    }

    pub fn leaf_hi(&self) -> usize {
        self.leaf_hi
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_hi - self.leaf_lo + 1
    }

    pub fn is_leaf(&self) -> bool {
        self.leaf_lo == self.leaf_hi
    }

    pub fn pool(&self) -> Pool {
        Pool::from_sorted((self.leaf_lo as u32..=self.leaf_hi as u32).collect())
    }
}

/// Disjoint pools covering a subtree, one per tree level: the left child,
/// the left child of the right child, and so on, down to the two rightmost
/// leaves tested individually.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagonalLayout {
    origin: SubtreeRef,
    nodes: Vec<SubtreeRef>,
}

impl DiagonalLayout {
    pub fn origin(&self) -> SubtreeRef {
        self.origin
    }

    /// Tree nodes whose leaf sets form the pools, largest first.
    pub fn nodes(&self) -> &[SubtreeRef] {
        &self.nodes
    }

    pub fn pools(&self) -> Vec<Pool> {
        self.nodes.iter().map(SubtreeRef::pool).collect()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

pub fn diagonal_layout(origin: SubtreeRef) -> Result<DiagonalLayout> {
    let m = origin.leaf_count();
    if m < 2 {
        return Err(Error::param(
            "a single leaf is tested individually, not sliced",
        ));
    }
    let levels = m.trailing_zeros();
    let mut nodes = Vec::with_capacity(levels as usize + 1);
    let mut lo = origin.leaf_lo;
    let mut half = m / 2;
    let mut depth = origin.depth + 1;
    while half >= 1 {
        nodes.push(SubtreeRef {
            depth,
            leaf_lo: lo,
            leaf_hi: lo + half - 1,
        });
        lo += half;
        half /= 2;
        depth += 1;
    }
    // The last remaining leaf is the right sibling of the final singleton.
    nodes.push(SubtreeRef {
        depth: depth - 1,
        leaf_lo: lo,
        leaf_hi: lo,
    });
    debug_assert_eq!(lo, origin.leaf_hi);
    Ok(DiagonalLayout { origin, nodes })
}

/// Subtrees to slice in the next stage: every positive pool with more than
/// one member. Positive singletons are resolved and produce nothing.
pub fn children_layouts(layout: &DiagonalLayout, outcomes: &[bool]) -> Result<Vec<SubtreeRef>> {
    if outcomes.len() != layout.len() {
        return Err(Error::Protocol(format!(
            "layout has {} pools but {} outcomes",
            layout.len(),
            outcomes.len()
        )));
    }
    Ok(layout
        .nodes
        .iter()
        .zip(outcomes)
        .filter(|(node, &positive)| positive && !node.is_leaf())
        .map(|(node, _)| *node)
        .collect())
}
