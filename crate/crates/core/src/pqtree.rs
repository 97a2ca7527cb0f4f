//! PQ-trees and PQF-trees over edge identities.
//!
//! A PQF-tree compactly encodes a set of edge orderings (its frontiers):
//! children of a P-node may be permuted freely, children of a Q-node may only
//! be reversed, and children of an F-node are fixed. PQ-trees are built by
//! successive consecutive-ones reductions (one per vertex); F-nodes appear
//! when [`force`] pins a subtree to the end of every frontier.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::hypergraph::{is_subset, EdgeId, Hypergraph, HypergraphError, Vertex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeKind {
    P,
    Q,
    F,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PqfNode {
    Leaf(EdgeId),
    Inner {
        kind: NodeKind,
        children: Vec<PqfNode>,
    },
}

/// A PQF-tree in normal form: P- and F-nodes have at least two children,
/// Q-nodes at least three, and no F-node has an F-node child.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PqfTree {
    root: PqfNode,
}

/// A PQF-subtree: the node reached by following `path` (child indices) from
/// the root, restricted to the children `range.0..=range.1`. For leaves and
/// P-nodes the range always spans every child.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubtreeRef {
    pub path: Vec<usize>,
    pub range: (usize, usize),
}

pub type Frontier = Vec<EdgeId>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PqError {
    #[error("no consistent ordering exists")]
    Reject,
    #[error("leaf {0} occurs more than once")]
    DuplicateLeaf(EdgeId),
    #[error("edge set is empty")]
    EmptyEdgeSet,
    #[error("no leaf contains the vertex set")]
    EmptyCover,
    #[error("tree is not consistent for the hypergraph")]
    Inconsistent,
    #[error("invalid subtree reference")]
    BadSubtree,
    #[error("traces do not form an inclusion chain")]
    TraceNotChain,
    #[error("frontier set too large to enumerate ({0} lists)")]
    TooLarge(u128),
    #[error("malformed tree text: {0}")]
    Syntax(String),
    #[error(transparent)]
    Hypergraph(#[from] HypergraphError),
}

impl PqfNode {
    pub fn leaf(id: usize) -> Self {
        PqfNode::Leaf(EdgeId(id))
    }

    pub fn inner(kind: NodeKind, children: Vec<PqfNode>) -> Self {
        PqfNode::Inner { kind, children }
    }

    pub fn children(&self) -> &[PqfNode] {
        match self {
            PqfNode::Leaf(_) => &[],
            PqfNode::Inner { children, .. } => children,
        }
    }

    fn collect_leaves(&self, out: &mut Vec<EdgeId>) {
        match self {
            PqfNode::Leaf(e) => out.push(*e),
            PqfNode::Inner { children, .. } => children.iter().for_each(|c| c.collect_leaves(out)),
        }
    }

    pub fn leaves(&self) -> Vec<EdgeId> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn min_leaf(&self) -> EdgeId {
        match self {
            PqfNode::Leaf(e) => *e,
            PqfNode::Inner { children, .. } => children
                .iter()
                .map(PqfNode::min_leaf)
                .min()
                .expect("inner nodes have children"),
        }
    }

    /// Leftmost frontier reading.
    fn read(&self, out: &mut Vec<EdgeId>) {
        self.collect_leaves(out)
    }
}

/// Restores the structural invariants without changing the frontier set:
/// one-child nodes are spliced out, two-child Q-nodes become P-nodes, and
/// F-children of F-nodes are flattened into their parent.
fn normalize(node: PqfNode) -> PqfNode {
    match node {
        PqfNode::Leaf(_) => node,
        PqfNode::Inner { kind, children } => {
            let mut flat = Vec::with_capacity(children.len());
            for c in children.into_iter().map(normalize) {
                match c {
                    PqfNode::Inner {
                        kind: NodeKind::F,
                        children: grand,
                    } if kind == NodeKind::F => flat.extend(grand),
                    other => flat.push(other),
                }
            }
            match (kind, flat.len()) {
                (_, 1) => flat.pop().expect("one child"),
                (NodeKind::Q, 2) => PqfNode::Inner {
                    kind: NodeKind::P,
                    children: flat,
                },
                _ => PqfNode::Inner {
                    kind,
                    children: flat,
                },
            }
        }
    }
}

/// Orders P-node children by smallest leaf id, recursively.
fn canonical_p_order(node: &mut PqfNode) {
    if let PqfNode::Inner { kind, children } = node {
        children.iter_mut().for_each(canonical_p_order);
        if *kind == NodeKind::P {
            children.sort_by_key(PqfNode::min_leaf);
        }
    }
}

fn group(kind: NodeKind, mut nodes: Vec<PqfNode>) -> Option<PqfNode> {
    match nodes.len() {
        0 => None,
        1 => nodes.pop(),
        _ => Some(PqfNode::Inner {
            kind,
            children: nodes,
        }),
    }
}

impl PqfTree {
    /// Wraps a node, normalizing it. Fails if a leaf repeats or an inner node
    /// has no children.
    pub fn new(root: PqfNode) -> Result<Self, PqError> {
        fn check(node: &PqfNode, seen: &mut HashSet<EdgeId>) -> Result<(), PqError> {
            match node {
                PqfNode::Leaf(e) if !seen.insert(*e) => Err(PqError::DuplicateLeaf(*e)),
                PqfNode::Leaf(_) => Ok(()),
                PqfNode::Inner { children, .. } if children.is_empty() => {
                    Err(PqError::Syntax("inner node without children".into()))
                }
                PqfNode::Inner { children, .. } => children.iter().try_for_each(|c| check(c, seen)),
            }
        }
        check(&root, &mut HashSet::new())?;
        Ok(Self {
            root: normalize(root),
        })
    }

    pub fn root(&self) -> &PqfNode {
        &self.root
    }

    pub fn leaves(&self) -> Vec<EdgeId> {
        self.root.leaves()
    }

    pub fn has_f_nodes(&self) -> bool {
        fn any_f(n: &PqfNode) -> bool {
            match n {
                PqfNode::Leaf(_) => false,
                PqfNode::Inner { kind, children } => {
                    *kind == NodeKind::F || children.iter().any(any_f)
                }
            }
        }
        any_f(&self.root)
    }

    /// Checks the arity and normal-form invariants.
    pub fn is_normal(&self) -> bool {
        fn ok(n: &PqfNode, parent: Option<NodeKind>) -> bool {
            match n {
                PqfNode::Leaf(_) => true,
                PqfNode::Inner { kind, children } => {
                    let min = if *kind == NodeKind::Q { 3 } else { 2 };
                    let nested_f = *kind == NodeKind::F && parent == Some(NodeKind::F);
                    children.len() >= min
                        && !nested_f
                        && children.iter().all(|c| ok(c, Some(*kind)))
                }
            }
        }
        ok(&self.root, None)
    }

    /// The leftmost frontier (children read in stored order).
    pub fn first_frontier(&self) -> Frontier {
        let mut out = Vec::new();
        self.root.read(&mut out);
        out
    }

    /// The node reached by following child indices from the root.
    pub fn node_at(&self, path: &[usize]) -> Option<&PqfNode> {
        let mut node = &self.root;
        for &i in path {
            node = node.children().get(i)?;
        }
        Some(node)
    }

    /// Materializes a subtree reference as a standalone tree. A Q-range of two
    /// children becomes a P-node (both orders), matching its frontier set.
    pub fn subtree(&self, s: &SubtreeRef) -> Result<PqfTree, PqError> {
        let node = self.node_at(&s.path).ok_or(PqError::BadSubtree)?;
        check_range(node, s.range)?;
        let standalone = match node {
            PqfNode::Inner { kind, children } if s.range != (0, children.len() - 1) => {
                PqfNode::Inner {
                    kind: *kind,
                    children: children[s.range.0..=s.range.1].to_vec(),
                }
            }
            other => other.clone(),
        };
        Ok(PqfTree {
            root: normalize(standalone),
        })
    }

    /// Leaves of a subtree reference, in stored order.
    pub fn subtree_leaves(&self, s: &SubtreeRef) -> Result<Vec<EdgeId>, PqError> {
        let node = self.node_at(&s.path).ok_or(PqError::BadSubtree)?;
        check_range(node, s.range)?;
        Ok(match node {
            PqfNode::Leaf(e) => vec![*e],
            PqfNode::Inner { children, .. } => children[s.range.0..=s.range.1]
                .iter()
                .flat_map(PqfNode::leaves)
                .collect(),
        })
    }

    /// Number of frontiers, saturating.
    pub fn frontier_count(&self) -> u128 {
        fn count(n: &PqfNode) -> u128 {
            match n {
                PqfNode::Leaf(_) => 1,
                PqfNode::Inner { kind, children } => {
                    let prod = children
                        .iter()
                        .map(count)
                        .fold(1u128, |a, b| a.saturating_mul(b));
                    let k = children.len() as u128;
                    match kind {
                        NodeKind::F => prod,
                        NodeKind::Q => prod.saturating_mul(2),
                        NodeKind::P => (1..=k).fold(prod, |a, b| a.saturating_mul(b)),
                    }
                }
            }
        }
        count(&self.root)
    }
}

fn check_range(node: &PqfNode, range: (usize, usize)) -> Result<(), PqError> {
    match node {
        PqfNode::Leaf(_) if range == (0, 0) => Ok(()),
        PqfNode::Inner {
            kind: NodeKind::P,
            children,
        } if range == (0, children.len() - 1) => Ok(()),
        PqfNode::Inner {
            kind: NodeKind::Q | NodeKind::F,
            children,
        } if range.0 < range.1 && range.1 < children.len() => Ok(()),
        _ => Err(PqError::BadSubtree),
    }
}

impl SubtreeRef {
    /// The whole tree.
    pub fn whole(t: &PqfTree) -> Self {
        let k = t.root.children().len();
        Self {
            path: Vec::new(),
            range: (0, k.saturating_sub(1)),
        }
    }
}

pub const FRONTIER_LIMIT: u128 = 100_000;

/// All frontiers of `t`, as a set. Test oracle; refuses more than
/// [`FRONTIER_LIMIT`] lists.
pub fn enumerate_frontiers(t: &PqfTree) -> Result<BTreeSet<Frontier>, PqError> {
    let n = t.frontier_count();
    if n > FRONTIER_LIMIT {
        return Err(PqError::TooLarge(n));
    }
    Ok(frontiers(&t.root).into_iter().collect())
}

fn frontiers(node: &PqfNode) -> Vec<Frontier> {
    match node {
        PqfNode::Leaf(e) => vec![vec![*e]],
        PqfNode::Inner { kind, children } => {
            let parts: Vec<Vec<Frontier>> = children.iter().map(frontiers).collect();
            let orders: Vec<Vec<usize>> = match kind {
                NodeKind::F => vec![(0..parts.len()).collect()],
                NodeKind::Q => {
                    vec![(0..parts.len()).collect(), (0..parts.len()).rev().collect()]
                }
                NodeKind::P => permutations(parts.len()),
            };
            let mut out = Vec::new();
            for order in orders {
                let mut acc: Vec<Frontier> = vec![Vec::new()];
                for &i in &order {
                    acc = acc
                        .iter()
                        .flat_map(|prefix| {
                            parts[i].iter().map(move |tail| {
                                let mut l = prefix.clone();
                                l.extend_from_slice(tail);
                                l
                            })
                        })
                        .collect();
                }
                out.extend(acc);
            }
            out
        }
    }
}

pub(crate) fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn go(rest: &mut Vec<usize>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(cur.clone());
            return;
        }
        for i in 0..rest.len() {
            let x = rest.remove(i);
            cur.push(x);
            go(rest, cur, out);
            cur.pop();
            rest.insert(i, x);
        }
    }
    let mut out = Vec::new();
    go(&mut (0..k).collect(), &mut Vec::new(), &mut out);
    out
}

// ---------------------------------------------------------------------------
// Construction by consecutive-ones reductions.

enum Reduced {
    Empty(PqfNode),
    Full(PqfNode),
    /// A partial node flattened into a Q-sequence: empty parts first, full
    /// parts last; every element is entirely empty or entirely full.
    Partial(Vec<PqfNode>),
    /// The pertinent root (deepest node holding every target leaf), rebuilt.
    Done(PqfNode),
}

struct Reducer<'a> {
    target: &'a HashSet<EdgeId>,
}

impl Reducer<'_> {
    /// Returns the rebuilt node and the number of target leaves below it.
    fn visit(&self, node: PqfNode) -> Result<(Reduced, usize), PqError> {
        let (kind, children) = match node {
            PqfNode::Leaf(e) => {
                return Ok(if self.target.contains(&e) {
                    (Reduced::Full(node), 1)
                } else {
                    (Reduced::Empty(node), 0)
                });
            }
            PqfNode::Inner { kind, children } => (kind, children),
        };
        let mut results = Vec::with_capacity(children.len());
        let mut count = 0;
        let mut done_at = None;
        for c in children {
            let (r, n) = self.visit(c)?;
            if matches!(r, Reduced::Done(_)) {
                done_at = Some(results.len());
            }
            count += n;
            results.push(r);
        }
        if let Some(i) = done_at {
            // Everything else is empty; rebuild unchanged around the done child.
            let children = results
                .into_iter()
                .enumerate()
                .map(|(j, r)| match r {
                    Reduced::Done(n) | Reduced::Empty(n) => n,
                    _ => unreachable!("sibling {j} of pertinent root {i} holds target leaves"),
                })
                .collect();
            return Ok((Reduced::Done(PqfNode::Inner { kind, children }), count));
        }
        let all_full = results.iter().all(|r| matches!(r, Reduced::Full(_)));
        let all_empty = results.iter().all(|r| matches!(r, Reduced::Empty(_)));
        let rebuild = |results: Vec<Reduced>| PqfNode::Inner {
            kind,
            children: results
                .into_iter()
                .map(|r| match r {
                    Reduced::Empty(n) | Reduced::Full(n) => n,
                    _ => unreachable!(),
                })
                .collect(),
        };
        if all_empty {
            return Ok((Reduced::Empty(rebuild(results)), 0));
        }
        let is_root = count == self.target.len();
        if all_full {
            let node = rebuild(results);
            return Ok((
                if is_root {
                    Reduced::Done(node)
                } else {
                    Reduced::Full(node)
                },
                count,
            ));
        }
        let out = match (kind, is_root) {
            (NodeKind::P, false) => Reduced::Partial(partial_p(results)?),
            (NodeKind::Q, false) => Reduced::Partial(partial_q(results)?),
            (NodeKind::P, true) => Reduced::Done(root_p(results)?),
            (NodeKind::Q, true) => Reduced::Done(root_q(results)?),
            (NodeKind::F, _) => unreachable!("PQ construction never creates F-nodes"),
        };
        Ok((out, count))
    }
}

fn split(results: Vec<Reduced>) -> (Vec<PqfNode>, Vec<PqfNode>, Vec<Vec<PqfNode>>) {
    let (mut empty, mut full, mut partial) = (Vec::new(), Vec::new(), Vec::new());
    for r in results {
        match r {
            Reduced::Empty(n) => empty.push(n),
            Reduced::Full(n) => full.push(n),
            Reduced::Partial(s) => partial.push(s),
            Reduced::Done(_) => unreachable!(),
        }
    }
    (empty, full, partial)
}

fn partial_p(results: Vec<Reduced>) -> Result<Vec<PqfNode>, PqError> {
    let (empty, full, mut partial) = split(results);
    if partial.len() > 1 {
        return Err(PqError::Reject);
    }
    let mut seq: Vec<PqfNode> = group(NodeKind::P, empty).into_iter().collect();
    if let Some(p) = partial.pop() {
        seq.extend(p);
    }
    seq.extend(group(NodeKind::P, full));
    Ok(seq)
}

fn partial_q(results: Vec<Reduced>) -> Result<Vec<PqfNode>, PqError> {
    // Pattern: empty* partial? full*, read in either direction.
    fn matches(rs: &[Reduced]) -> bool {
        let mut i = 0;
        while i < rs.len() && matches!(rs[i], Reduced::Empty(_)) {
            i += 1;
        }
        if i < rs.len() && matches!(rs[i], Reduced::Partial(_)) {
            i += 1;
        }
        rs[i..].iter().all(|r| matches!(r, Reduced::Full(_)))
    }
    let mut results = results;
    if !matches(&results) {
        results.reverse();
        if !matches(&results) {
            return Err(PqError::Reject);
        }
    }
    let mut seq = Vec::new();
    for r in results {
        match r {
            Reduced::Empty(n) | Reduced::Full(n) => seq.push(n),
            Reduced::Partial(s) => seq.extend(s),
            Reduced::Done(_) => unreachable!(),
        }
    }
    Ok(seq)
}

fn root_p(results: Vec<Reduced>) -> Result<PqfNode, PqError> {
    let (mut empty, full, mut partial) = split(results);
    let full_group = group(NodeKind::P, full);
    let block = match partial.len() {
        0 => full_group.expect("pertinent root has target leaves"),
        1 => {
            let mut seq = partial.pop().expect("one partial");
            seq.extend(full_group);
            PqfNode::Inner {
                kind: NodeKind::Q,
                children: seq,
            }
        }
        2 => {
            let right = partial.pop().expect("two partials");
            let mut seq = partial.pop().expect("two partials");
            seq.extend(full_group);
            seq.extend(right.into_iter().rev());
            PqfNode::Inner {
                kind: NodeKind::Q,
                children: seq,
            }
        }
        _ => return Err(PqError::Reject),
    };
    if empty.is_empty() {
        Ok(block)
    } else {
        empty.push(block);
        Ok(PqfNode::Inner {
            kind: NodeKind::P,
            children: empty,
        })
    }
}

fn root_q(results: Vec<Reduced>) -> Result<PqfNode, PqError> {
    let touched: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, r)| !matches!(r, Reduced::Empty(_)))
        .map(|(i, _)| i)
        .collect();
    let (lo, hi) = (touched[0], *touched.last().expect("non-empty"));
    for (i, r) in results.iter().enumerate().take(hi + 1).skip(lo) {
        let ok = match r {
            Reduced::Full(_) => true,
            Reduced::Partial(_) => i == lo || i == hi,
            _ => false,
        };
        if !ok {
            return Err(PqError::Reject);
        }
    }
    let mut children = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Reduced::Empty(n) | Reduced::Full(n) => children.push(n),
            Reduced::Partial(s) if i == lo => children.extend(s),
            Reduced::Partial(s) => children.extend(s.into_iter().rev()),
            Reduced::Done(_) => unreachable!(),
        }
    }
    Ok(PqfNode::Inner {
        kind: NodeKind::Q,
        children,
    })
}

/// Restricts `root` to the orderings in which `target` is consecutive.
fn reduce(root: PqfNode, target: &HashSet<EdgeId>) -> Result<PqfNode, PqError> {
    let reducer = Reducer { target };
    match reducer.visit(root)? {
        (Reduced::Done(n), _) => Ok(n),
        _ => unreachable!("target leaves are all present"),
    }
}

/// Builds a PQ-tree whose frontiers are exactly the join paths of the
/// sub-hypergraph formed by the edges `a`. Rejects when there is none.
pub fn build_pq_tree(h: &Hypergraph, a: &[EdgeId]) -> Result<PqfTree, PqError> {
    let ids: BTreeSet<EdgeId> = a.iter().copied().collect();
    if ids.is_empty() {
        return Err(PqError::EmptyEdgeSet);
    }
    let sub = h.restrict(&ids.iter().copied().collect::<Vec<_>>())?;
    let mut root = if ids.len() == 1 {
        PqfNode::Leaf(*ids.iter().next().expect("one edge"))
    } else {
        PqfNode::Inner {
            kind: NodeKind::P,
            children: ids.iter().map(|&e| PqfNode::Leaf(e)).collect(),
        }
    };
    for (_, holders) in sub.incidence() {
        if holders.len() < 2 || holders.len() == ids.len() {
            continue;
        }
        let target: HashSet<EdgeId> = holders.into_iter().collect();
        root = normalize(reduce(root, &target)?);
    }
    canonical_p_order(&mut root);
    Ok(PqfTree { root })
}

// ---------------------------------------------------------------------------
// PQF-subtree location, Force and inclusion-order restriction.

/// Finds the PQF-subtree whose leaves are exactly the edges (among the
/// tree's leaves) containing all of `vset`. Narrows one vertex at a time
/// inside the previous subtree: descend to the deepest node covering the
/// holders, then take the child range between the outermost holders.
pub fn locate_subtree(t: &PqfTree, h: &Hypergraph, vset: &[Vertex]) -> Result<SubtreeRef, PqError> {
    locate_within(t, h, vset, SubtreeRef::whole(t))
}

fn locate_within(
    t: &PqfTree,
    h: &Hypergraph,
    vset: &[Vertex],
    start: SubtreeRef,
) -> Result<SubtreeRef, PqError> {
    let mut vs: Vec<Vertex> = vset.to_vec();
    vs.sort_unstable();
    vs.dedup();
    let holds = |e: EdgeId, v: Vertex| -> Result<bool, PqError> {
        Ok(h.edge(e)?.binary_search(&v).is_ok())
    };
    let mut cur = start;
    let wanted: BTreeSet<EdgeId> = {
        let mut w = BTreeSet::new();
        for e in t.subtree_leaves(&cur)? {
            if is_subset(&vs, h.edge(e)?) {
                w.insert(e);
            }
        }
        w
    };
    if wanted.is_empty() {
        return Err(PqError::EmptyCover);
    }
    for &v in &vs {
        // Descend from the current subtree root towards the holders of v.
        let mut path = cur.path.clone();
        let mut range = cur.range;
        loop {
            let node = t.node_at(&path).ok_or(PqError::BadSubtree)?;
            let kids = node.children();
            if kids.is_empty() {
                break;
            }
            let mut hit = Vec::new();
            for (i, kid) in kids.iter().enumerate().take(range.1 + 1).skip(range.0) {
                let mut any = false;
                for e in kid.leaves() {
                    any |= holds(e, v)?;
                }
                if any {
                    hit.push(i);
                }
            }
            match hit.as_slice() {
                [] => return Err(PqError::EmptyCover),
                [only] => {
                    path.push(*only);
                    range = (
                        0,
                        t.node_at(&path)
                            .expect("child")
                            .children()
                            .len()
                            .saturating_sub(1),
                    );
                }
                _ => {
                    let (i, j) = (hit[0], *hit.last().expect("non-empty"));
                    range = match node {
                        PqfNode::Inner {
                            kind: NodeKind::P, ..
                        } => {
                            if (i, j) != (0, kids.len() - 1) || range != (0, kids.len() - 1) {
                                return Err(PqError::Inconsistent);
                            }
                            range
                        }
                        _ => (i, j),
                    };
                    break;
                }
            }
        }
        cur = SubtreeRef { path, range };
    }
    let got: BTreeSet<EdgeId> = t.subtree_leaves(&cur)?.into_iter().collect();
    if got != wanted {
        return Err(PqError::Inconsistent);
    }
    Ok(cur)
}

/// Restricts the frontiers of `t` to those ending with a frontier of `s`:
/// `{ l1 l2 in F(t) | l2 in F(s) }`. Rejects when that set is empty.
pub fn force(t: &PqfTree, s: &SubtreeRef) -> Result<PqfTree, PqError> {
    let node = t.node_at(&s.path).ok_or(PqError::BadSubtree)?;
    check_range(node, s.range)?;
    let root = force_node(t.root.clone(), &s.path, s.range)?;
    Ok(PqfTree {
        root: normalize(root),
    })
}

fn force_node(node: PqfNode, path: &[usize], range: (usize, usize)) -> Result<PqfNode, PqError> {
    let (kind, mut children) = match node {
        leaf @ PqfNode::Leaf(_) => return Ok(leaf),
        PqfNode::Inner { kind, children } => (kind, children),
    };
    let k = children.len();
    match path.split_first() {
        None => {
            let (i, j) = range;
            if (i, j) == (0, k - 1) {
                return Ok(PqfNode::Inner { kind, children });
            }
            match kind {
                NodeKind::F if j == k - 1 => Ok(PqfNode::Inner { kind, children }),
                NodeKind::Q if j == k - 1 => Ok(PqfNode::Inner {
                    kind: NodeKind::F,
                    children,
                }),
                NodeKind::Q if i == 0 => {
                    children.reverse();
                    Ok(PqfNode::Inner {
                        kind: NodeKind::F,
                        children,
                    })
                }
                NodeKind::P => Err(PqError::BadSubtree),
                _ => Err(PqError::Reject),
            }
        }
        Some((&c, rest)) => {
            let forced = force_node(children[c].clone(), rest, range)?;
            match kind {
                NodeKind::F if c == k - 1 => {
                    children[c] = forced;
                    Ok(PqfNode::Inner { kind, children })
                }
                NodeKind::Q if c == k - 1 => {
                    children[c] = forced;
                    Ok(PqfNode::Inner {
                        kind: NodeKind::F,
                        children,
                    })
                }
                NodeKind::Q if c == 0 => {
                    children[c] = forced;
                    children.reverse();
                    Ok(PqfNode::Inner {
                        kind: NodeKind::F,
                        children,
                    })
                }
                NodeKind::P => {
                    children.remove(c);
                    let others = group(NodeKind::P, children).expect("P-nodes have siblings");
                    Ok(PqfNode::Inner {
                        kind: NodeKind::F,
                        children: vec![others, forced],
                    })
                }
                _ => Err(PqError::Reject),
            }
        }
    }
}

/// Restricts `t` to the frontiers in which the leaves meeting `vset` appear
/// in inclusion-nondecreasing order of their traces `e ∩ vset`. The traces
/// must form an inclusion chain.
pub fn restrict_inclusion_order(
    t: &PqfTree,
    h: &Hypergraph,
    vset: &[Vertex],
) -> Result<PqfTree, PqError> {
    let mut vs = vset.to_vec();
    vs.sort_unstable();
    vs.dedup();
    let mut traces: Vec<Vec<Vertex>> = Vec::new();
    for e in t.leaves() {
        let tr = crate::hypergraph::intersect(h.edge(e)?, &vs);
        if !tr.is_empty() {
            traces.push(tr);
        }
    }
    if traces.is_empty() {
        return Ok(t.clone());
    }
    traces.sort_by_key(Vec::len);
    if traces.windows(2).any(|w| !is_subset(&w[0], &w[1])) {
        return Err(PqError::TraceNotChain);
    }
    let smallest = &traces[0];
    let largest = traces.last().expect("non-empty");
    let outer = locate_subtree(t, h, smallest)?;
    let sub = t.subtree(&outer)?;
    let inner = locate_subtree(&sub, h, largest)?;
    let forced = force(&sub, &inner)?;
    if forced == sub {
        return Ok(t.clone());
    }
    Ok(PqfTree {
        root: normalize(splice(t, &outer, forced)?),
    })
}

/// Replaces the PQF-subtree `at` of `t` by `replacement`, a forced copy of it.
/// When `at` is a child range of a Q-node, the replacement fixes the reading
/// direction of that range, so the Q-node becomes an F-node oriented to match.
fn splice(t: &PqfTree, at: &SubtreeRef, replacement: PqfTree) -> Result<PqfNode, PqError> {
    fn rebuild(
        node: &PqfNode,
        path: &[usize],
        f: &mut dyn FnMut(&PqfNode) -> Result<PqfNode, PqError>,
    ) -> Result<PqfNode, PqError> {
        match path.split_first() {
            None => f(node),
            Some((&c, rest)) => match node {
                PqfNode::Inner { kind, children } => {
                    let mut children = children.clone();
                    children[c] = rebuild(&children[c], rest, f)?;
                    Ok(PqfNode::Inner {
                        kind: *kind,
                        children,
                    })
                }
                PqfNode::Leaf(_) => Err(PqError::BadSubtree),
            },
        }
    }
    let range = at.range;
    let mut replacement = Some(replacement.root);
    rebuild(&t.root, &at.path, &mut |node| {
        let new = replacement.take().expect("called once");
        let (kind, children) = match node {
            PqfNode::Inner { kind, children } if range != (0, children.len() - 1) => {
                (*kind, children)
            }
            _ => return Ok(new),
        };
        let first_new = new.leaves()[0];
        let forward = children[range.0].leaves().contains(&first_new);
        let new_parts = match new {
            PqfNode::Inner {
                kind: NodeKind::F,
                children,
            } => children,
            _ => return Err(PqError::Inconsistent),
        };
        let prefix = &children[..range.0];
        let suffix = &children[range.1 + 1..];
        let out: Vec<PqfNode> = if forward {
            prefix
                .iter()
                .cloned()
                .chain(new_parts)
                .chain(suffix.iter().cloned())
                .collect()
        } else if kind == NodeKind::Q {
            // Read the Q-node backwards so the forced range keeps its order.
            suffix
                .iter()
                .rev()
                .cloned()
                .chain(new_parts)
                .chain(prefix.iter().rev().cloned())
                .collect()
        } else {
            return Err(PqError::Inconsistent);
        };
        Ok(PqfNode::Inner {
            kind: NodeKind::F,
            children: out,
        })
    })
}

// ---------------------------------------------------------------------------
// Debug text form: `(P 0 (Q 1 2 3))`.

impl fmt::Display for PqfNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PqfNode::Leaf(e) => write!(f, "{}", e.0),
            PqfNode::Inner { kind, children } => {
                write!(f, "({kind:?}")?;
                for c in children {
                    write!(f, " {c}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for PqfTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

impl FromStr for PqfTree {
    type Err = PqError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let spaced = s.replace('(', " ( ").replace(')', " ) ");
        let tokens: Vec<&str> = spaced.split_whitespace().collect();
        let mut pos = 0;
        let node = parse_node(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(PqError::Syntax(format!("trailing input at token {pos}")));
        }
        PqfTree::new(node)
    }
}

fn parse_node(tokens: &[&str], pos: &mut usize) -> Result<PqfNode, PqError> {
    let tok = *tokens
        .get(*pos)
        .ok_or_else(|| PqError::Syntax("unexpected end".into()))?;
    *pos += 1;
    if tok != "(" {
        return tok
            .parse()
            .map(|n| PqfNode::Leaf(EdgeId(n)))
            .map_err(|_| PqError::Syntax(format!("bad leaf {tok:?}")));
    }
    let kind = match tokens.get(*pos).copied() {
        Some("P") => NodeKind::P,
        Some("Q") => NodeKind::Q,
        Some("F") => NodeKind::F,
        other => return Err(PqError::Syntax(format!("bad node kind {other:?}"))),
    };
    *pos += 1;
    let mut children = Vec::new();
    loop {
        match tokens.get(*pos).copied() {
            Some(")") => {
                *pos += 1;
                break;
            }
            Some(_) => children.push(parse_node(tokens, pos)?),
            None => return Err(PqError::Syntax("unclosed node".into())),
        }
    }
    Ok(PqfNode::Inner { kind, children })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::check_join_path_order;

    fn hg(edges: &[&[Vertex]]) -> Hypergraph {
        Hypergraph::new(edges.iter().map(|e| e.iter().copied())).unwrap()
    }

    fn tree(s: &str) -> PqfTree {
        s.parse().unwrap()
    }

    fn set(lists: &[&[usize]]) -> BTreeSet<Frontier> {
        lists
            .iter()
            .map(|l| l.iter().map(|&i| EdgeId(i)).collect())
            .collect()
    }

    fn all_ids(h: &Hypergraph) -> Vec<EdgeId> {
        h.edge_ids().collect()
    }

    fn brute_join_paths(h: &Hypergraph) -> BTreeSet<Frontier> {
        let ids = all_ids(h);
        permutations(ids.len())
            .into_iter()
            .map(|p| p.into_iter().map(|i| ids[i]).collect::<Vec<_>>())
            .filter(|o| check_join_path_order(h, o).unwrap())
            .collect()
    }

    #[test]
    fn text_round_trip_and_normalization() {
        assert_eq!(tree("(P 0 (Q 1 2 3))").to_string(), "(P 0 (Q 1 2 3))");
        assert_eq!(tree("(F 0 (F 1 2))").to_string(), "(F 0 1 2)");
        assert_eq!(tree("(Q 0 1)").to_string(), "(P 0 1)");
        assert_eq!(tree("(P (F 4))").to_string(), "4");
        assert!(matches!(
            "(P 0 0)".parse::<PqfTree>(),
            Err(PqError::DuplicateLeaf(_))
        ));
        assert!("(X 0 1)".parse::<PqfTree>().is_err());
        assert!("(P 0 1".parse::<PqfTree>().is_err());
    }

    #[test]
    fn frontier_definitions() {
        assert_eq!(enumerate_frontiers(&tree("7")).unwrap(), set(&[&[7]]));
        assert_eq!(
            enumerate_frontiers(&tree("(F 0 1)")).unwrap(),
            set(&[&[0, 1]])
        );
        assert_eq!(
            enumerate_frontiers(&tree("(Q 0 1 2)")).unwrap(),
            set(&[&[0, 1, 2], &[2, 1, 0]])
        );
        assert_eq!(enumerate_frontiers(&tree("(P 0 1 2)")).unwrap().len(), 6);
        let big = PqfTree::new(PqfNode::inner(
            NodeKind::P,
            (0..12).map(PqfNode::leaf).collect(),
        ));
        assert!(matches!(
            enumerate_frontiers(&big.unwrap()),
            Err(PqError::TooLarge(_))
        ));
    }

    #[test]
    fn build_examples() {
        let chain = hg(&[&[0, 1], &[1, 2], &[2, 3]]);
        let t = build_pq_tree(&chain, &all_ids(&chain)).unwrap();
        assert_eq!(
            enumerate_frontiers(&t).unwrap(),
            set(&[&[0, 1, 2], &[2, 1, 0]])
        );
        assert_eq!(enumerate_frontiers(&t).unwrap(), brute_join_paths(&chain));

        let disjoint = hg(&[&[0], &[1], &[2]]);
        let t = build_pq_tree(&disjoint, &all_ids(&disjoint)).unwrap();
        assert_eq!(t.to_string(), "(P 0 1 2)");

        let triangle = hg(&[&[0, 1], &[1, 2], &[0, 2]]);
        assert_eq!(
            build_pq_tree(&triangle, &all_ids(&triangle)),
            Err(PqError::Reject)
        );
        assert!(brute_join_paths(&triangle).is_empty());
    }

    #[test]
    fn build_on_edge_subset() {
        let h = hg(&[&[0, 1], &[1, 2], &[2, 3], &[3, 0]]);
        let t = build_pq_tree(&h, &[EdgeId(0), EdgeId(1), EdgeId(2)]).unwrap();
        assert_eq!(
            enumerate_frontiers(&t).unwrap(),
            set(&[&[0, 1, 2], &[2, 1, 0]])
        );
    }

    #[test]
    fn locate_examples() {
        // b (vertex 1) lies in e1 and e2 of the chain.
        let chain = hg(&[&[0, 1], &[1, 2], &[2, 3]]);
        let t = tree("(Q 0 1 2)");
        let s = locate_subtree(&t, &chain, &[1]).unwrap();
        assert_eq!(
            s,
            SubtreeRef {
                path: vec![],
                range: (0, 1)
            }
        );
        assert_eq!(t.subtree_leaves(&s).unwrap(), vec![EdgeId(0), EdgeId(1)]);

        let s = locate_subtree(&t, &chain, &[3]).unwrap();
        assert_eq!(
            s,
            SubtreeRef {
                path: vec![2],
                range: (0, 0)
            }
        );

        let star = hg(&[&[0, 1], &[0, 2], &[0, 3]]);
        let t = tree("(P 0 1 2)");
        assert_eq!(
            locate_subtree(&t, &star, &[0]).unwrap(),
            SubtreeRef::whole(&t)
        );
        assert_eq!(locate_subtree(&t, &star, &[1, 2]), Err(PqError::EmptyCover));
    }

    #[test]
    fn force_examples() {
        let t = tree("(F 0 1)");
        let s = SubtreeRef {
            path: vec![1],
            range: (0, 0),
        };
        assert_eq!(force(&t, &s).unwrap(), t);

        let t = tree("(P 0 1)");
        let forced = force(
            &t,
            &SubtreeRef {
                path: vec![1],
                range: (0, 0),
            },
        )
        .unwrap();
        assert_eq!(enumerate_frontiers(&forced).unwrap(), set(&[&[0, 1]]));

        let t = tree("(Q 0 1 2)");
        let forced = force(
            &t,
            &SubtreeRef {
                path: vec![],
                range: (1, 2),
            },
        )
        .unwrap();
        assert_eq!(enumerate_frontiers(&forced).unwrap(), set(&[&[0, 1, 2]]));
        let forced = force(
            &t,
            &SubtreeRef {
                path: vec![],
                range: (0, 1),
            },
        )
        .unwrap();
        assert_eq!(enumerate_frontiers(&forced).unwrap(), set(&[&[2, 1, 0]]));

        let t = tree("(F 0 1 2)");
        assert_eq!(
            force(
                &t,
                &SubtreeRef {
                    path: vec![],
                    range: (0, 1)
                }
            ),
            Err(PqError::Reject)
        );
        let t = tree("(Q 0 1 2 3)");
        assert_eq!(
            force(
                &t,
                &SubtreeRef {
                    path: vec![2],
                    range: (0, 0)
                }
            ),
            Err(PqError::Reject)
        );
        assert_eq!(
            force(
                &t,
                &SubtreeRef {
                    path: vec![],
                    range: (1, 2)
                }
            ),
            Err(PqError::Reject)
        );
    }

    #[test]
    fn restrict_examples() {
        // e1={x}, e2={x,y}, e3={x,y,z}; vset {y,z}.
        let h = hg(&[&[0], &[0, 1], &[0, 1, 2]]);
        let t = tree("(Q 0 1 2)");
        let r = restrict_inclusion_order(&t, &h, &[1, 2]).unwrap();
        assert_eq!(enumerate_frontiers(&r).unwrap(), set(&[&[0, 1, 2]]));

        // All traces equal: nothing changes.
        let star = hg(&[&[0, 1], &[0, 2], &[0, 3]]);
        let t = tree("(P 0 1 2)");
        assert_eq!(restrict_inclusion_order(&t, &star, &[0]).unwrap(), t);
        // No leaf meets the vertex set.
        assert_eq!(restrict_inclusion_order(&t, &star, &[9]).unwrap(), t);
        // Traces {1} and {2} are incomparable.
        assert_eq!(
            restrict_inclusion_order(&t, &star, &[1, 2]),
            Err(PqError::TraceNotChain)
        );
    }

    #[test]
    fn restrict_inside_q_range_fixes_orientation() {
        // Q over a, b, c, d with b,c sharing vertex 10 and c ⊇ b on {10, 11}.
        let h = hg(&[&[0], &[0, 1, 10], &[1, 2, 10, 11], &[2]]);
        let t = build_pq_tree(&h, &all_ids(&h)).unwrap();
        let before = enumerate_frontiers(&t).unwrap();
        let r = restrict_inclusion_order(&t, &h, &[10, 11]).unwrap();
        let expect: BTreeSet<Frontier> = before
            .into_iter()
            .filter(|l| {
                let pb = l.iter().position(|&e| e == EdgeId(1)).unwrap();
                let pc = l.iter().position(|&e| e == EdgeId(2)).unwrap();
                pb < pc
            })
            .collect();
        assert_eq!(enumerate_frontiers(&r).unwrap(), expect);
        assert!(r.is_normal());
    }
}
