//! Nearly-complete binary tree sampler.
//!
//! Outcomes are the leaves of a binary tree in which every internal node has
//! two children and caches the rate sum and leaf count of its subtree.
//! Extraction walks from the root to a leaf, so both extraction and update
//! cost O(log N).
//!
//! Nodes live in one array with implicit heap indexing: the children of slot
//! `i` are `2i + 1` and `2i + 2`. With `N` leaves the array holds `2N - 1`
//! nodes and the leaves occupy the last `N` slots, which is exactly the
//! nearly-complete shape (every leaf on the last two levels, deepest leaves
//! packed to the left). The last leaf is always slot `2N - 2`. Adding a leaf
//! splits the first leaf slot `N - 1`; deleting one moves the last leaf into
//! the hole and promotes its sibling into their parent.

use std::collections::BinaryHeap;

use slotmap::SlotMap;

use crate::error::{ensure_invariant, InvariantViolation, Result, SamplerError};
use crate::sampler::{close, validate_rate, ExtractStats, OutcomeHandle, RandomSource, Sampler, Selected};
use crate::scalar::Real;

#[derive(Debug, Clone)]
struct Leaf<P> {
    handle: OutcomeHandle,
    payload: P,
}

#[derive(Debug, Clone)]
struct TreeNode<P, R> {
    /// Own rate for a leaf, subtree sum for an internal node.
    rate: R,
    /// Number of leaves in the subtree.
    weight: usize,
    /// Present exactly for leaves.
    leaf: Option<Leaf<P>>,
    /// Set while the node sits in the touched list.
    queued: bool,
}

impl<P, R: Real> TreeNode<P, R> {
    fn leaf(handle: OutcomeHandle, payload: P, rate: R) -> Self {
        Self {
            rate,
            weight: 1,
            leaf: Some(Leaf { handle, payload }),
            queued: false,
        }
    }

    fn internal() -> Self {
        Self {
            rate: R::zero(),
            weight: 0,
            leaf: None,
            queued: false,
        }
    }
}

#[inline]
fn left_of(slot: usize) -> usize {
    2 * slot + 1
}

#[inline]
fn parent_of(slot: usize) -> usize {
    (slot - 1) / 2
}

#[inline]
fn depth_of(slot: usize) -> usize {
    (usize::BITS - 1 - (slot + 1).leading_zeros()) as usize
}

/// Binary-tree sampler with O(log N) extraction and update.
#[derive(Debug, Clone)]
pub struct SamplerTree<P, R = f64> {
    nodes: Vec<TreeNode<P, R>>,
    handles: SlotMap<OutcomeHandle, usize>,
    /// Nodes pending recomputation, deepest (highest slot) first.
    touched: BinaryHeap<usize>,
    positive: usize,
    processed: u64,
}

impl<P, R: Real> Default for SamplerTree<P, R> {
    fn default() -> Self {
        Self::new()
    }
}

impl<P, R: Real> SamplerTree<P, R> {
    pub fn new() -> Self {
        Self {
            nodes: Vec::new(),
            handles: SlotMap::with_key(),
            touched: BinaryHeap::new(),
            positive: 0,
            processed: 0,
        }
    }

    /// Builds a tree over `items` in linear time.
    ///
    /// The returned handles follow the input order.
    pub fn build<I>(items: I) -> Result<(Self, Vec<OutcomeHandle>)>
    where
        I: IntoIterator<Item = (P, R)>,
    {
        let items: Vec<(P, R)> = items.into_iter().collect();
        for (_, rate) in &items {
            validate_rate(*rate)?;
        }
        let n = items.len();
        let mut tree = Self::new();
        if n == 0 {
            return Ok((tree, Vec::new()));
        }
        tree.nodes.reserve_exact(2 * n - 1);
        tree.nodes.extend((0..n - 1).map(|_| TreeNode::internal()));
        let mut handles = Vec::with_capacity(n);
        for (i, (payload, rate)) in items.into_iter().enumerate() {
            let slot = n - 1 + i;
            let handle = tree.handles.insert(slot);
            tree.nodes.push(TreeNode::leaf(handle, payload, rate));
            if rate > R::zero() {
                tree.positive += 1;
            }
            handles.push(handle);
        }
        // Children always sit at higher slots, so a reverse sweep is a
        // post-order pass.
        for slot in (0..n - 1).rev() {
            tree.recompute(slot);
        }
        Ok((tree, handles))
    }

    /// Number of leaves, including zero-rate ones.
    pub fn leaf_count(&self) -> usize {
        self.handles.len()
    }

    /// Total number of nodes, `2N - 1` for `N > 0`.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Depth of the deepest leaf; `None` for an empty tree.
    pub fn depth(&self) -> Option<usize> {
        self.nodes.len().checked_sub(1).map(depth_of)
    }

    /// Depth of the leaf behind `handle` (the root has depth 0).
    pub fn leaf_depth(&self, handle: OutcomeHandle) -> Result<usize> {
        self.slot(handle).map(depth_of)
    }

    /// The leaf whose removal keeps the tree nearly complete.
    pub fn last_leaf(&self) -> Option<OutcomeHandle> {
        self.nodes
            .last()
            .map(|node| node.leaf.as_ref().expect("last slot is a leaf").handle)
    }

    /// Cumulative count of nodes processed from the touched list.
    pub fn processed_nodes(&self) -> u64 {
        self.processed
    }

    /// Read-only view of the root, for structural inspection.
    pub fn root(&self) -> Option<NodeRef<'_, P, R>> {
        self.node(0)
    }

    /// Read-only view of the node at a heap slot.
    pub fn node(&self, slot: usize) -> Option<NodeRef<'_, P, R>> {
        (slot < self.nodes.len()).then_some(NodeRef { tree: self, slot })
    }

    /// Sets several leaf rates and then refreshes every affected ancestor
    /// once. Either all changes apply or none do.
    pub fn update_leaves<I>(&mut self, changes: I) -> Result<()>
    where
        I: IntoIterator<Item = (OutcomeHandle, R)>,
    {
        let changes: Vec<(usize, R)> = changes
            .into_iter()
            .map(|(handle, rate)| Ok((self.slot(handle)?, validate_rate(rate)?)))
            .collect::<Result<_>>()?;
        for (slot, rate) in changes {
            self.set_leaf_rate(slot, rate);
            self.touch(slot);
        }
        self.flush();
        Ok(())
    }

    /// Appends a leaf, splitting the first leaf slot so the shape stays
    /// nearly complete.
    pub fn add_leaf(&mut self, payload: P, rate: R) -> Result<OutcomeHandle> {
        let rate = validate_rate(rate)?;
        let n = self.leaf_count();
        let handle = self.handles.insert(0);
        if n == 0 {
            self.nodes.push(TreeNode::leaf(handle, payload, rate));
        } else {
            let split = n - 1;
            let moved = std::mem::replace(&mut self.nodes[split], TreeNode::internal());
            let moved_handle = moved.leaf.as_ref().expect("first leaf slot").handle;
            self.nodes.push(moved);
            self.handles[moved_handle] = 2 * n - 1;
            self.nodes.push(TreeNode::leaf(handle, payload, rate));
            self.handles[handle] = 2 * n;
            self.touch(2 * n);
        }
        if rate > R::zero() {
            self.positive += 1;
        }
        self.flush();
        Ok(handle)
    }

    /// Removes a leaf by moving the last leaf into its place and promoting
    /// the last leaf's sibling over their parent.
    pub fn delete_leaf(&mut self, handle: OutcomeHandle) -> Result<P> {
        let target = self.slot(handle)?;
        self.handles.remove(handle);
        let n = self.leaf_count() + 1;
        if self.nodes[target].rate > R::zero() {
            self.positive -= 1;
        }
        if n == 1 {
            let node = self.nodes.pop().expect("single leaf");
            return Ok(node.leaf.expect("root is a leaf").payload);
        }
        let last = 2 * n - 2;
        let sibling = 2 * n - 3;
        let parent = n - 2;
        let removed = self.nodes[target].leaf.take().expect("target is a leaf");
        if target == last {
            self.move_leaf(sibling, parent);
        } else if target == sibling {
            self.move_leaf(last, parent);
        } else {
            self.move_leaf(last, target);
            self.move_leaf(sibling, parent);
            self.touch(target);
        }
        self.nodes.truncate(2 * n - 3);
        self.touch(parent);
        self.flush();
        Ok(removed.payload)
    }

    fn slot(&self, handle: OutcomeHandle) -> Result<usize> {
        self.handles
            .get(handle)
            .copied()
            .ok_or(SamplerError::StaleHandle)
    }

    fn set_leaf_rate(&mut self, slot: usize, rate: R) {
        let old = self.nodes[slot].rate;
        if old > R::zero() && rate <= R::zero() {
            self.positive -= 1;
        } else if old <= R::zero() && rate > R::zero() {
            self.positive += 1;
        }
        self.nodes[slot].rate = rate;
    }

    fn move_leaf(&mut self, from: usize, to: usize) {
        let leaf = self.nodes[from].leaf.take().expect("moving a leaf");
        self.handles[leaf.handle] = to;
        let rate = self.nodes[from].rate;
        self.nodes[to] = TreeNode {
            rate,
            weight: 1,
            leaf: Some(leaf),
            queued: false,
        };
    }

    fn is_internal(&self, slot: usize) -> bool {
        left_of(slot) < self.nodes.len()
    }

    fn recompute(&mut self, slot: usize) {
        let l = left_of(slot);
        let (left, right) = (&self.nodes[l], &self.nodes[l + 1]);
        let (rate, weight) = (left.rate + right.rate, left.weight + right.weight);
        let node = &mut self.nodes[slot];
        node.rate = rate;
        node.weight = weight;
    }

    fn touch(&mut self, slot: usize) {
        let node = &mut self.nodes[slot];
        if !node.queued {
            node.queued = true;
            self.touched.push(slot);
        }
    }

    /// Drains the touched list. Popping the highest slot first guarantees
    /// every node is recomputed after all of its touched descendants, so
    /// each node is processed once.
    fn flush(&mut self) {
        while let Some(slot) = self.touched.pop() {
            self.nodes[slot].queued = false;
            self.processed += 1;
            if self.is_internal(slot) {
                self.recompute(slot);
            }
            if slot > 0 {
                self.touch(parent_of(slot));
            }
        }
    }

    fn leaf_at(&self, slot: usize) -> &Leaf<P> {
        self.nodes[slot].leaf.as_ref().expect("slot holds a leaf")
    }
}

impl<P, R: Real> Sampler<P, R> for SamplerTree<P, R> {
    fn add(&mut self, payload: P, rate: R) -> Result<OutcomeHandle> {
        self.add_leaf(payload, rate)
    }

    fn update(&mut self, handle: OutcomeHandle, rate: R) -> Result<()> {
        self.update_leaves(std::iter::once((handle, rate)))
    }

    fn delete(&mut self, handle: OutcomeHandle) -> Result<P> {
        self.delete_leaf(handle)
    }

    fn extract_with_stats<G: RandomSource + ?Sized>(
        &self,
        rng: &mut G,
    ) -> Result<(Selected<'_, P>, ExtractStats)> {
        let total = self.total_rate();
        if total.is_nan() || total <= R::zero() {
            return Err(SamplerError::EmptyStructure);
        }
        let mut draw = rng.next_below(total);
        let mut slot = 0;
        let mut visits = 1;
        let len = self.nodes.len();
        while left_of(slot) < len {
            let l = left_of(slot);
            let left = self.nodes[l].rate;
            let right = self.nodes[l + 1].rate;
            // Ties go left. Zero-rate subtrees are never entered.
            if left > R::zero() && (draw <= left || right <= R::zero()) {
                slot = l;
            } else {
                draw = draw - left;
                slot = l + 1;
            }
            visits += 1;
        }
        let leaf = self.leaf_at(slot);
        let stats = ExtractStats {
            attempts: 1,
            node_visits: visits,
            ..ExtractStats::default()
        };
        Ok(((leaf.handle, &leaf.payload), stats))
    }

    fn total_rate(&self) -> R {
        self.nodes.first().map_or(R::zero(), |root| root.rate)
    }

    fn len(&self) -> usize {
        self.positive
    }

    fn rate(&self, handle: OutcomeHandle) -> Result<R> {
        self.slot(handle).map(|slot| self.nodes[slot].rate)
    }

    fn payload(&self, handle: OutcomeHandle) -> Result<&P> {
        self.slot(handle).map(|slot| &self.leaf_at(slot).payload)
    }

    fn check_invariants(&self) -> std::result::Result<(), InvariantViolation> {
        let n = self.leaf_count();
        let len = self.nodes.len();
        ensure_invariant!(
            len == if n == 0 { 0 } else { 2 * n - 1 },
            "{len} nodes for {n} leaves"
        );
        ensure_invariant!(self.touched.is_empty(), "touched list not drained");
        let mut positive = 0;
        for (slot, node) in self.nodes.iter().enumerate() {
            ensure_invariant!(!node.queued, "slot {slot} still queued");
            match &node.leaf {
                Some(leaf) => {
                    ensure_invariant!(slot + 1 >= n, "leaf at internal slot {slot}");
                    ensure_invariant!(node.weight == 1, "leaf {slot} has weight {}", node.weight);
                    ensure_invariant!(
                        node.rate.is_finite() && node.rate >= R::zero(),
                        "leaf {slot} has rate {}",
                        node.rate
                    );
                    ensure_invariant!(
                        self.handles.get(leaf.handle) == Some(&slot),
                        "handle of leaf {slot} points elsewhere"
                    );
                    if node.rate > R::zero() {
                        positive += 1;
                    }
                }
                None => {
                    ensure_invariant!(self.is_internal(slot), "childless internal node {slot}");
                    let (left, right) = (&self.nodes[left_of(slot)], &self.nodes[left_of(slot) + 1]);
                    ensure_invariant!(
                        node.weight == left.weight + right.weight,
                        "weight mismatch at {slot}"
                    );
                    ensure_invariant!(
                        close(node.rate, left.rate + right.rate, 1e-9),
                        "rate mismatch at {slot}: {} vs {}",
                        node.rate,
                        left.rate + right.rate
                    );
                }
            }
        }
        ensure_invariant!(positive == self.positive, "positive count {} vs {positive}", self.positive);
        if let Some(root) = self.nodes.first() {
            ensure_invariant!(root.weight == n, "root weight {} for {n} leaves", root.weight);
        }
        // Left-to-right leaf depths must be d..d followed by d-1..d-1.
        let depths = self.leaf_depths_in_order();
        ensure_invariant!(
            depths.windows(2).all(|w| w[0] >= w[1]),
            "deepest leaves are not packed to the left"
        );
        if let (Some(first), Some(last)) = (depths.first(), depths.last()) {
            ensure_invariant!(first - last <= 1, "leaf depths span {last}..={first}");
        }
        Ok(())
    }
}

impl<P, R: Real> SamplerTree<P, R> {
    fn leaf_depths_in_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.leaf_count());
        if self.nodes.is_empty() {
            return out;
        }
        let mut stack = vec![(0usize, 0usize)];
        while let Some((slot, depth)) = stack.pop() {
            if self.is_internal(slot) {
                stack.push((left_of(slot) + 1, depth + 1));
                stack.push((left_of(slot), depth + 1));
            } else {
                out.push(depth);
            }
        }
        out
    }
}

/// Borrowed view of one tree node.
#[derive(Debug)]
pub struct NodeRef<'a, P, R> {
    tree: &'a SamplerTree<P, R>,
    slot: usize,
}

impl<P, R> Clone for NodeRef<'_, P, R> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<P, R> Copy for NodeRef<'_, P, R> {}

impl<'a, P, R: Real> NodeRef<'a, P, R> {
    pub fn slot(&self) -> usize {
        self.slot
    }

    pub fn rate(&self) -> R {
        self.tree.nodes[self.slot].rate
    }

    pub fn weight(&self) -> usize {
        self.tree.nodes[self.slot].weight
    }

    pub fn is_leaf(&self) -> bool {
        self.tree.nodes[self.slot].leaf.is_some()
    }

    pub fn payload(&self) -> Option<&'a P> {
        self.tree.nodes[self.slot].leaf.as_ref().map(|l| &l.payload)
    }

    pub fn handle(&self) -> Option<OutcomeHandle> {
        self.tree.nodes[self.slot].leaf.as_ref().map(|l| l.handle)
    }

    pub fn left(&self) -> Option<Self> {
        self.tree.node(left_of(self.slot))
    }

    pub fn right(&self) -> Option<Self> {
        self.tree.node(left_of(self.slot) + 1)
    }

    pub fn parent(&self) -> Option<Self> {
        (self.slot > 0).then(|| NodeRef {
            tree: self.tree,
            slot: parent_of(self.slot),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Replays fixed unit draws.
    struct Fixed(Vec<f64>);

    impl RandomSource for Fixed {
        fn next_unit(&mut self) -> f64 {
            self.0.remove(0)
        }
        fn next_index(&mut self, bound: usize) -> usize {
            (self.next_unit() * bound as f64) as usize
        }
    }

    fn tree_of(rates: &[f64]) -> (SamplerTree<usize>, Vec<OutcomeHandle>) {
        SamplerTree::build(rates.iter().copied().enumerate()).unwrap()
    }

    #[test]
    fn build_single_leaf_is_root() {
        let (tree, handles) = tree_of(&[7.0]);
        assert_eq!(tree.total_rate(), 7.0);
        assert_eq!(tree.node_count(), 1);
        assert!(tree.root().unwrap().is_leaf());
        assert_eq!(tree.last_leaf(), Some(handles[0]));
        assert_eq!(tree.depth(), Some(0));
        tree.check_invariants().unwrap();
    }

    #[test]
    fn build_empty_then_extract_fails() {
        let (tree, handles) = tree_of(&[]);
        assert!(handles.is_empty());
        assert_eq!(tree.total_rate(), 0.0);
        assert_eq!(
            tree.extract(&mut Fixed(vec![0.5])).unwrap_err(),
            SamplerError::EmptyStructure
        );
    }

    #[test]
    fn build_rejects_bad_rate() {
        let err = SamplerTree::<u8>::build([(0, 1.0), (1, -2.0)]).unwrap_err();
        assert_eq!(err, SamplerError::InvalidRate(-2.0));
    }

    #[test]
    fn extract_hand_traces() {
        let (tree, _) = tree_of(&[1.0, 3.0]);
        // 0.5 * 4 = 2.0 > 1.0 goes right.
        assert_eq!(*tree.extract(&mut Fixed(vec![0.5])).unwrap().1, 1);
        // 0.225 * 4 = 0.9 <= 1.0 goes left.
        assert_eq!(*tree.extract(&mut Fixed(vec![0.225])).unwrap().1, 0);
        // Exactly on the boundary goes left.
        assert_eq!(*tree.extract(&mut Fixed(vec![0.25])).unwrap().1, 0);
    }

    #[test]
    fn zero_rate_leaves_are_unreachable_at_the_edges() {
        let (tree, _) = tree_of(&[0.0, 2.0, 0.0]);
        for u in [0.0, 0.5, 1.0 - f64::EPSILON / 2.0] {
            assert_eq!(*tree.extract(&mut Fixed(vec![u])).unwrap().1, 1);
        }
    }

    #[test]
    fn update_recomputes_ancestors_only() {
        let (mut tree, handles) = tree_of(&[1.0, 2.0, 3.0, 4.0]);
        let before = tree.processed_nodes();
        tree.update(handles[2], 5.0).unwrap();
        assert_eq!(tree.total_rate(), 12.0);
        let depth = tree.leaf_depth(handles[2]).unwrap() as u64;
        assert_eq!(tree.processed_nodes() - before, depth + 1);
        tree.check_invariants().unwrap();
    }

    #[test]
    fn batch_update_shares_ancestors() {
        let (mut tree, handles) = tree_of(&[1.0, 2.0, 3.0, 4.0]);
        let before = tree.processed_nodes();
        tree.update_leaves(handles.iter().map(|&h| (h, 2.0))).unwrap();
        assert_eq!(tree.total_rate(), 8.0);
        // Four leaves, two internal nodes, one root.
        assert_eq!(tree.processed_nodes() - before, 7);
    }

    #[test]
    fn batch_update_is_atomic() {
        let (mut tree, handles) = tree_of(&[1.0, 2.0]);
        let err = tree
            .update_leaves([(handles[0], 5.0), (handles[1], f64::NAN)])
            .unwrap_err();
        assert!(matches!(err, SamplerError::InvalidRate(_)));
        assert_eq!(tree.rate(handles[0]).unwrap(), 1.0);
        assert_eq!(tree.total_rate(), 3.0);
    }

    #[test]
    fn add_to_empty_becomes_root() {
        let mut tree = SamplerTree::<&str>::new();
        let h = tree.add_leaf("a", 2.0).unwrap();
        assert_eq!(tree.root().unwrap().handle(), Some(h));
        assert_eq!(tree.total_rate(), 2.0);
    }

    #[test]
    fn fifth_leaf_deepens_two_leaves() {
        let (mut tree, _) = tree_of(&[1.0, 2.0, 3.0, 4.0]);
        tree.add_leaf(4, 5.0).unwrap();
        assert_eq!(tree.node_count(), 9);
        let deep = tree
            .leaf_depths_in_order()
            .into_iter()
            .filter(|&d| d == 3)
            .count();
        assert_eq!(deep, 2);
        assert_eq!(tree.total_rate(), 15.0);
        tree.check_invariants().unwrap();
    }

    #[test]
    fn delete_only_leaf() {
        let (mut tree, handles) = tree_of(&[3.0]);
        assert_eq!(tree.delete_leaf(handles[0]).unwrap(), 0);
        assert_eq!(tree.node_count(), 0);
        assert_eq!(tree.delete_leaf(handles[0]), Err(SamplerError::StaleHandle));
        assert_eq!(
            tree.extract(&mut Fixed(vec![0.1])).unwrap_err(),
            SamplerError::EmptyStructure
        );
    }

    #[test]
    fn delete_last_leaf_promotes_sibling() {
        let (mut tree, handles) = tree_of(&[1.0, 2.0, 3.0]);
        let last = tree.last_leaf().unwrap();
        let sibling = tree.node(tree.node_count() - 2).unwrap().handle().unwrap();
        let sibling_payload = *tree.payload(sibling).unwrap();
        tree.delete_leaf(last).unwrap();
        assert_eq!(tree.leaf_count(), 2);
        assert_eq!(tree.payload(sibling).unwrap(), &sibling_payload);
        assert_eq!(tree.leaf_depth(sibling).unwrap(), 1);
        tree.check_invariants().unwrap();
        for &h in &handles {
            if h != last {
                assert!(tree.rate(h).is_ok());
            }
        }
    }

    #[test]
    fn delete_each_position_of_five() {
        for victim in 0..5 {
            let (mut tree, handles) = tree_of(&[1.0, 2.0, 3.0, 4.0, 5.0]);
            tree.delete_leaf(handles[victim]).unwrap();
            tree.check_invariants().unwrap();
            assert_eq!(tree.node_count(), 7);
            assert_eq!(tree.total_rate(), 15.0 - (victim + 1) as f64);
            for (i, &h) in handles.iter().enumerate() {
                if i != victim {
                    assert_eq!(*tree.payload(h).unwrap(), i);
                    assert_eq!(tree.rate(h).unwrap(), (i + 1) as f64);
                }
            }
        }
    }

    #[test]
    fn zero_rate_leaves_are_kept_but_not_counted() {
        let (mut tree, handles) = tree_of(&[1.0, 2.0]);
        tree.update(handles[0], 0.0).unwrap();
        assert_eq!(tree.leaf_count(), 2);
        assert_eq!(tree.len(), 1);
        tree.update(handles[0], 0.5).unwrap();
        assert_eq!(tree.len(), 2);
    }

    #[test]
    fn f32_tree() {
        let (tree, _) =
            SamplerTree::<u8, f32>::build([(0, 1.0f32), (1, 2.0), (2, 3.0)]).unwrap();
        assert_eq!(tree.total_rate(), 6.0f32);
        tree.check_invariants().unwrap();
    }
}
