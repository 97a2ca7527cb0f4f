//! Hypergraphs with stable edge identities, plus the structural validators
//! used throughout the crate: join trees, disjoint branches decompositions,
//! join-path orders and gamma-cycles.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Vertex identifier. Parsers map variable `i` (1-based) to vertex `i - 1`.
pub type Vertex = usize;

/// Stable identity of a hyperedge. Identities survive edge deletion and
/// sub-hypergraph extraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HypergraphError {
    #[error("edge {0} is empty")]
    EmptyEdge(usize),
    #[error("unknown edge id {0}")]
    UnknownEdge(EdgeId),
    #[error("duplicate edge id {0}")]
    DuplicateId(EdgeId),
    #[error("edge {0} and edge {1} have the same vertex set")]
    DuplicateVertexSet(EdgeId, EdgeId),
    #[error("decomposition nodes do not match the hypergraph's edges")]
    NodeMismatch,
    #[error("decomposition is not a join tree")]
    NotJoinTree,
    #[error("order is not a permutation of the edge set")]
    NotPermutation,
    #[error("instance too large for exhaustive search ({edges} edges, limit {limit})")]
    TooLarge { edges: usize, limit: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct EdgeData {
    id: EdgeId,
    vertices: Arc<[Vertex]>,
    labels: Arc<[usize]>,
}

/// A hypergraph `(V, E)` whose vertex set is the union of its edges.
///
/// Edges are kept sorted by [`EdgeId`]; every edge stores its vertices sorted
/// and deduplicated, so equal vertex sets compare equal. Cloning is cheap.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Hypergraph {
    edges: Vec<EdgeData>,
}

/// One connected component: its vertex set and edge identities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentView {
    pub index: usize,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<EdgeId>,
}

impl Hypergraph {
    /// Builds a hypergraph from edge vertex lists. Edge `i` gets source label
    /// `i`; an edge whose vertex set repeats an earlier one is merged into it
    /// (keeping both labels) and does not get an id of its own. Ids are
    /// assigned densely in first-occurrence order.
    pub fn new<I, E>(edges: I) -> Result<Self, HypergraphError>
    where
        I: IntoIterator<Item = E>,
        E: IntoIterator<Item = Vertex>,
    {
        let mut index: HashMap<Vec<Vertex>, usize> = HashMap::new();
        let mut out: Vec<(Vec<Vertex>, Vec<usize>)> = Vec::new();
        for (label, edge) in edges.into_iter().enumerate() {
            let vertices = canonical(edge);
            if vertices.is_empty() {
                return Err(HypergraphError::EmptyEdge(label));
            }
            match index.get(&vertices) {
                Some(&slot) => out[slot].1.push(label),
                None => {
                    index.insert(vertices.clone(), out.len());
                    out.push((vertices, vec![label]));
                }
            }
        }
        Ok(Self {
            edges: out
                .into_iter()
                .enumerate()
                .map(|(i, (vertices, labels))| EdgeData {
                    id: EdgeId(i),
                    vertices: vertices.into(),
                    labels: labels.into(),
                })
                .collect(),
        })
    }

    /// Builds a hypergraph with caller-chosen edge ids. Unlike [`Hypergraph::new`]
    /// duplicate vertex sets are an error, since two ids cannot share an edge.
    pub fn with_ids<I, E>(edges: I) -> Result<Self, HypergraphError>
    where
        I: IntoIterator<Item = (EdgeId, E)>,
        E: IntoIterator<Item = Vertex>,
    {
        let mut data = Vec::new();
        for (id, edge) in edges {
            let vertices = canonical(edge);
            if vertices.is_empty() {
                return Err(HypergraphError::EmptyEdge(id.0));
            }
            data.push(EdgeData {
                id,
                vertices: vertices.into(),
                labels: Arc::from([id.0]),
            });
        }
        data.sort_by_key(|e| e.id);
        for w in data.windows(2) {
            if w[0].id == w[1].id {
                return Err(HypergraphError::DuplicateId(w[0].id));
            }
        }
        let mut seen: HashMap<&[Vertex], EdgeId> = HashMap::new();
        for e in &data {
            if let Some(&other) = seen.get(&*e.vertices) {
                return Err(HypergraphError::DuplicateVertexSet(other, e.id));
            }
            seen.insert(&e.vertices, e.id);
        }
        Ok(Self { edges: data })
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Edge ids in ascending order.
    pub fn edge_ids(&self) -> impl ExactSizeIterator<Item = EdgeId> + '_ {
        self.edges.iter().map(|e| e.id)
    }

    /// `(id, sorted vertices)` pairs in ascending id order.
    pub fn edges(&self) -> impl ExactSizeIterator<Item = (EdgeId, &[Vertex])> + '_ {
        self.edges.iter().map(|e| (e.id, &*e.vertices))
    }

    pub fn contains_edge(&self, id: EdgeId) -> bool {
        self.slot(id).is_some()
    }

    /// Sorted vertex set of `id`.
    pub fn edge(&self, id: EdgeId) -> Result<&[Vertex], HypergraphError> {
        self.slot(id)
            .map(|i| &*self.edges[i].vertices)
            .ok_or(HypergraphError::UnknownEdge(id))
    }

    /// Source labels (input clause / constraint indices) merged into `id`.
    pub fn labels(&self, id: EdgeId) -> Result<&[usize], HypergraphError> {
        self.slot(id)
            .map(|i| &*self.edges[i].labels)
            .ok_or(HypergraphError::UnknownEdge(id))
    }

    /// Looks up the edge with exactly this (unsorted, possibly repeated) vertex set.
    pub fn find_edge(&self, vertices: &[Vertex]) -> Option<EdgeId> {
        let key = canonical(vertices.iter().copied());
        self.edges
            .iter()
            .find(|e| *e.vertices == *key)
            .map(|e| e.id)
    }

    /// The vertex set: the union of all edges, sorted.
    pub fn vertices(&self) -> Vec<Vertex> {
        let set: BTreeSet<Vertex> = self
            .edges
            .iter()
            .flat_map(|e| e.vertices.iter().copied())
            .collect();
        set.into_iter().collect()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices().len()
    }

    fn slot(&self, id: EdgeId) -> Option<usize> {
        self.edges.binary_search_by_key(&id, |e| e.id).ok()
    }

    /// The sub-hypergraph made of the listed edges (ids preserved).
    pub fn restrict(&self, ids: &[EdgeId]) -> Result<Hypergraph, HypergraphError> {
        let wanted: HashSet<EdgeId> = ids.iter().copied().collect();
        for id in &wanted {
            if !self.contains_edge(*id) {
                return Err(HypergraphError::UnknownEdge(*id));
            }
        }
        Ok(Self {
            edges: self
                .edges
                .iter()
                .filter(|e| wanted.contains(&e.id))
                .cloned()
                .collect(),
        })
    }

    /// `H \ e`: drops the edge; vertices only it covered disappear with it.
    pub fn remove_edge(&self, id: EdgeId) -> Result<Hypergraph, HypergraphError> {
        self.remove_edges(&[id])
    }

    /// Iterated [`Hypergraph::remove_edge`]; the result does not depend on order.
    pub fn remove_edges(&self, ids: &[EdgeId]) -> Result<Hypergraph, HypergraphError> {
        let gone: HashSet<EdgeId> = ids.iter().copied().collect();
        for id in &gone {
            if !self.contains_edge(*id) {
                return Err(HypergraphError::UnknownEdge(*id));
            }
        }
        Ok(Self {
            edges: self
                .edges
                .iter()
                .filter(|e| !gone.contains(&e.id))
                .cloned()
                .collect(),
        })
    }

    /// Connected components, ordered by their smallest edge id. Two edges
    /// share a component iff a chain of pairwise-intersecting edges links them.
    pub fn connected_components(&self) -> Vec<ComponentView> {
        let m = self.edges.len();
        let mut uf = UnionFind::new(m);
        let mut owner: HashMap<Vertex, usize> = HashMap::new();
        for (i, e) in self.edges.iter().enumerate() {
            for &v in e.vertices.iter() {
                match owner.get(&v) {
                    Some(&j) => uf.union(i, j),
                    None => {
                        owner.insert(v, i);
                    }
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        let mut first_of_root: HashMap<usize, usize> = HashMap::new();
        for i in 0..m {
            let r = uf.find(i);
            let key = *first_of_root.entry(r).or_insert(i);
            groups.entry(key).or_default().push(i);
        }
        groups
            .into_values()
            .enumerate()
            .map(|(index, slots)| {
                let vertices: BTreeSet<Vertex> = slots
                    .iter()
                    .flat_map(|&i| self.edges[i].vertices.iter().copied())
                    .collect();
                ComponentView {
                    index,
                    vertices: vertices.into_iter().collect(),
                    edges: slots.iter().map(|&i| self.edges[i].id).collect(),
                }
            })
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components().len() <= 1
    }

    /// Map from vertex to the ids of edges containing it.
    pub fn incidence(&self) -> BTreeMap<Vertex, Vec<EdgeId>> {
        let mut map: BTreeMap<Vertex, Vec<EdgeId>> = BTreeMap::new();
        for e in &self.edges {
            for &v in e.vertices.iter() {
                map.entry(v).or_default().push(e.id);
            }
        }
        map
    }
}

fn canonical<E: IntoIterator<Item = Vertex>>(edge: E) -> Vec<Vertex> {
    let mut v: Vec<Vertex> = edge.into_iter().collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Size of the intersection of two sorted slices.
pub(crate) fn intersection_len(a: &[Vertex], b: &[Vertex]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Intersection of two sorted slices.
pub(crate) fn intersect(a: &[Vertex], b: &[Vertex]) -> Vec<Vertex> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Whether sorted `a` is a subset of sorted `b`.
pub(crate) fn is_subset(a: &[Vertex], b: &[Vertex]) -> bool {
    intersection_len(a, b) == a.len()
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("root {0} is not a node")]
    UnknownRoot(EdgeId),
    #[error("node {0} has more than one parent")]
    MultipleParents(EdgeId),
    #[error("node {0} is listed twice")]
    DuplicateNode(EdgeId),
    #[error("child {0} is not a node")]
    UnknownChild(EdgeId),
    #[error("node {0} is unreachable from the root")]
    Unreachable(EdgeId),
    #[error("root {0} has a parent")]
    RootHasParent(EdgeId),
}

/// A rooted tree whose nodes are edge ids (the bijection λ is the identity on
/// ids). Children lists are kept sorted by id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    root: EdgeId,
    children: BTreeMap<EdgeId, Vec<EdgeId>>,
}

impl Decomposition {
    /// A single-node tree.
    pub fn leaf(root: EdgeId) -> Self {
        Self {
            root,
            children: BTreeMap::from([(root, Vec::new())]),
        }
    }

    /// Builds a tree from `(node, parent)` pairs; the root is the node
    /// without a parent and must be `root`.
    pub fn from_parents<I>(root: EdgeId, parents: I) -> Result<Self, TreeError>
    where
        I: IntoIterator<Item = (EdgeId, Option<EdgeId>)>,
    {
        let mut children: BTreeMap<EdgeId, Vec<EdgeId>> = BTreeMap::new();
        let mut links = Vec::new();
        for (node, parent) in parents {
            if children.insert(node, Vec::new()).is_some() {
                return Err(TreeError::DuplicateNode(node));
            }
            match parent {
                Some(p) => links.push((node, p)),
                None if node == root => {}
                None => return Err(TreeError::Unreachable(node)),
            }
        }
        if !children.contains_key(&root) {
            return Err(TreeError::UnknownRoot(root));
        }
        for (node, parent) in links {
            if node == root {
                return Err(TreeError::RootHasParent(root));
            }
            children
                .get_mut(&parent)
                .ok_or(TreeError::UnknownChild(parent))?
                .push(node);
        }
        Self::from_children(root, children)
    }

    /// Builds a tree from explicit child lists. Every node must appear as a
    /// key; the structure must be a tree reachable from `root`.
    pub fn from_children(
        root: EdgeId,
        mut children: BTreeMap<EdgeId, Vec<EdgeId>>,
    ) -> Result<Self, TreeError> {
        if !children.contains_key(&root) {
            return Err(TreeError::UnknownRoot(root));
        }
        let mut has_parent: HashSet<EdgeId> = HashSet::new();
        for kids in children.values_mut() {
            kids.sort_unstable();
            for &c in kids.iter() {
                if !has_parent.insert(c) {
                    return Err(TreeError::MultipleParents(c));
                }
            }
        }
        for c in &has_parent {
            if !children.contains_key(c) {
                return Err(TreeError::UnknownChild(*c));
            }
        }
        if has_parent.contains(&root) {
            return Err(TreeError::RootHasParent(root));
        }
        let d = Self { root, children };
        let reached = d.preorder().len();
        if reached != d.children.len() {
            let seen: HashSet<EdgeId> = d.preorder().into_iter().collect();
            let missing = d
                .children
                .keys()
                .find(|k| !seen.contains(k))
                .copied()
                .unwrap_or(root);
            return Err(TreeError::Unreachable(missing));
        }
        Ok(d)
    }

    pub fn root(&self) -> EdgeId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.children.len()
    }

    pub fn is_empty(&self) -> bool {
        self.children.is_empty()
    }

    /// Node ids in ascending order.
    pub fn nodes(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.children.keys().copied()
    }

    pub fn children(&self, node: EdgeId) -> &[EdgeId] {
        self.children.get(&node).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn parent_map(&self) -> HashMap<EdgeId, EdgeId> {
        let mut map = HashMap::new();
        for (&p, kids) in &self.children {
            for &c in kids {
                map.insert(c, p);
            }
        }
        map
    }

    /// Nodes in depth-first preorder (children visited in id order).
    pub fn preorder(&self) -> Vec<EdgeId> {
        let mut out = Vec::with_capacity(self.children.len());
        let mut stack = vec![self.root];
        let mut seen = HashSet::new();
        while let Some(n) = stack.pop() {
            if !seen.insert(n) {
                continue;
            }
            out.push(n);
            for &c in self.children(n).iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    /// Entry/exit times of a single preorder traversal: `u` is an ancestor of
    /// `w` (or `w` itself) iff `enter[u] <= enter[w] && exit[w] <= exit[u]`.
    fn intervals(&self) -> HashMap<EdgeId, (usize, usize)> {
        let mut times: HashMap<EdgeId, (usize, usize)> =
            HashMap::with_capacity(self.children.len());
        let mut clock = 0;
        let mut stack = vec![(self.root, false)];
        while let Some((n, done)) = stack.pop() {
            if done {
                if let Some(t) = times.get_mut(&n) {
                    t.1 = clock;
                }
                clock += 1;
                continue;
            }
            times.insert(n, (clock, 0));
            clock += 1;
            stack.push((n, true));
            for &c in self.children(n).iter().rev() {
                stack.push((c, false));
            }
        }
        times
    }

    /// Appends `other` below a deepest leaf of `self`. The result is a disjoint
    /// branches decomposition whenever both inputs are and their edges are
    /// vertex-disjoint.
    pub fn stack(mut self, other: Decomposition) -> Decomposition {
        let order = self.preorder();
        let depth = {
            let mut depth: HashMap<EdgeId, usize> = HashMap::new();
            depth.insert(self.root, 0);
            for &n in &order {
                let d = depth[&n];
                for &c in self.children(n) {
                    depth.insert(c, d + 1);
                }
            }
            depth
        };
        let deepest = order
            .iter()
            .copied()
            .filter(|n| self.children(*n).is_empty())
            .max_by_key(|n| (depth[n], std::cmp::Reverse(*n)))
            .unwrap_or(self.root);
        let Decomposition { root, children } = other;
        self.children.extend(children);
        let kids = self.children.get_mut(&deepest).expect("leaf exists");
        kids.push(root);
        kids.sort_unstable();
        self
    }
}

/// Checks the connectedness condition: for every vertex, the nodes whose edges
/// contain it induce a connected subtree.
pub fn is_join_tree(h: &Hypergraph, d: &Decomposition) -> Result<bool, HypergraphError> {
    if d.len() != h.num_edges() || !d.nodes().eq(h.edge_ids()) {
        return Err(HypergraphError::NodeMismatch);
    }
    let parent = d.parent_map();
    let member: HashMap<EdgeId, &[Vertex]> = h.edges().collect();
    // A node set of a rooted tree is connected iff exactly one of its members
    // has no parent inside the set.
    for (v, holders) in h.incidence() {
        let tops = holders
            .iter()
            .filter(|n| match parent.get(n) {
                Some(p) => member[p].binary_search(&v).is_err(),
                None => true,
            })
            .count();
        if tops != 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks that nodes on different branches (neither an ancestor of the other)
/// carry disjoint edges. `d` must already be a join tree of `h`.
pub fn is_disjoint_branches(h: &Hypergraph, d: &Decomposition) -> Result<bool, HypergraphError> {
    if !is_join_tree(h, d)? {
        return Err(HypergraphError::NotJoinTree);
    }
    let times = d.intervals();
    // Two nodes intersect iff they share a vertex, so it suffices that the
    // holders of each vertex form a chain of ancestors.
    for (_, mut holders) in h.incidence() {
        holders.sort_by_key(|n| times[n].0);
        for w in holders.windows(2) {
            let (a, b) = (times[&w[0]], times[&w[1]]);
            if !(a.0 <= b.0 && b.1 <= a.1) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Whether `order` is a join path: for `e < f < g` in the order, every vertex
/// of `e ∩ g` lies in `f`.
pub fn check_join_path_order(h: &Hypergraph, order: &[EdgeId]) -> Result<bool, HypergraphError> {
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if !sorted.iter().copied().eq(h.edge_ids()) {
        return Err(HypergraphError::NotPermutation);
    }
    let mut positions: HashMap<Vertex, (usize, usize, usize)> = HashMap::new();
    for (pos, id) in order.iter().enumerate() {
        for &v in h.edge(*id)? {
            let entry = positions.entry(v).or_insert((pos, pos, 0));
            entry.1 = pos;
            entry.2 += 1;
        }
    }
    Ok(positions
        .values()
        .all(|&(lo, hi, count)| hi - lo + 1 == count))
}

/// A gamma-cycle `(e1, x1, ..., en, xn)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaCycle {
    pub edges: Vec<EdgeId>,
    pub vertices: Vec<Vertex>,
}

pub const GAMMA_SEARCH_LIMIT: usize = 10;

/// Exhaustive search for a gamma-cycle. Only for small inputs
/// (at most [`GAMMA_SEARCH_LIMIT`] edges).
pub fn find_gamma_cycle(h: &Hypergraph) -> Result<Option<GammaCycle>, HypergraphError> {
    if h.num_edges() > GAMMA_SEARCH_LIMIT {
        return Err(HypergraphError::TooLarge {
            edges: h.num_edges(),
            limit: GAMMA_SEARCH_LIMIT,
        });
    }
    let edges: Vec<(EdgeId, &[Vertex])> = h.edges().collect();
    let mut search = GammaSearch {
        edges: &edges,
        path: Vec::new(),
        links: Vec::new(),
    };
    for start in 0..edges.len() {
        search.path.push(start);
        if search.extend() {
            return Ok(Some(GammaCycle {
                edges: search.path.iter().map(|&i| edges[i].0).collect(),
                vertices: search.links.clone(),
            }));
        }
        search.path.pop();
    }
    Ok(None)
}

struct GammaSearch<'a> {
    edges: &'a [(EdgeId, &'a [Vertex])],
    path: Vec<usize>,
    links: Vec<Vertex>,
}

impl GammaSearch<'_> {
    fn holds(&self, edge: usize, v: Vertex) -> bool {
        self.edges[edge].1.binary_search(&v).is_ok()
    }

    // Invariant: links[i] joins path[i] and path[i + 1] and lies in no other
    // edge of the path.
    fn extend(&mut self) -> bool {
        let last = *self.path.last().expect("non-empty path");
        if self.path.len() >= 3 && self.close() {
            return true;
        }
        for next in 0..self.edges.len() {
            if self.path.contains(&next) {
                continue;
            }
            // Earlier links may not reach the new edge.
            if self.links.iter().any(|&x| self.holds(next, x)) {
                continue;
            }
            let candidates: Vec<Vertex> = intersect(self.edges[last].1, self.edges[next].1);
            for x in candidates {
                if self.links.contains(&x) {
                    continue;
                }
                // The new link may not lie in earlier path edges.
                let earlier = &self.path[..self.path.len() - 1];
                if earlier.iter().any(|&e| self.holds(e, x)) {
                    continue;
                }
                self.path.push(next);
                self.links.push(x);
                if self.extend() {
                    return true;
                }
                self.path.pop();
                self.links.pop();
            }
        }
        false
    }

    // The closing vertex joins the last and first edges; it may lie elsewhere.
    fn close(&mut self) -> bool {
        let first = self.path[0];
        let last = *self.path.last().expect("non-empty path");
        for x in intersect(self.edges[last].1, self.edges[first].1) {
            if !self.links.contains(&x) {
                self.links.push(x);
                return true;
            }
        }
        false
    }
}

/// Alpha-acyclicity by iterated ear removal (GYO reduction): repeatedly drop
/// vertices that occur in a single edge and edges contained in another edge.
pub fn is_alpha_acyclic(h: &Hypergraph) -> bool {
    let mut edges: Vec<BTreeSet<Vertex>> = h
        .edges()
        .map(|(_, vs)| vs.iter().copied().collect())
        .collect();
    loop {
        let mut changed = false;
        let mut count: HashMap<Vertex, usize> = HashMap::new();
        for e in &edges {
            for &v in e {
                *count.entry(v).or_default() += 1;
            }
        }
        for e in edges.iter_mut() {
            let before = e.len();
            e.retain(|v| count[v] > 1);
            changed |= e.len() != before;
        }
        let mut i = 0;
        while i < edges.len() {
            let absorbed = edges[i].is_empty()
                || (0..edges.len()).any(|j| j != i && edges[i].is_subset(&edges[j]));
            if absorbed {
                edges.swap_remove(i);
                changed = true;
            } else {
                i += 1;
            }
        }
        if edges.len() <= 1 {
            return true;
        }
        if !changed {
            return false;
        }
    }
}

pub const BETA_SEARCH_LIMIT: usize = 15;

/// Beta-acyclicity: every subset of edges is alpha-acyclic. Exponential in the
/// number of edges; limited to [`BETA_SEARCH_LIMIT`].
pub fn is_beta_acyclic(h: &Hypergraph) -> Result<bool, HypergraphError> {
    let m = h.num_edges();
    if m > BETA_SEARCH_LIMIT {
        return Err(HypergraphError::TooLarge {
            edges: m,
            limit: BETA_SEARCH_LIMIT,
        });
    }
    let ids: Vec<EdgeId> = h.edge_ids().collect();
    for mask in 1u32..(1 << m) {
        if mask.count_ones() < 3 {
            continue;
        }
        let pick: Vec<EdgeId> = (0..m)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| ids[i])
            .collect();
        if !is_alpha_acyclic(&h.restrict(&pick)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hg(edges: &[&[Vertex]]) -> Hypergraph {
        Hypergraph::new(edges.iter().map(|e| e.iter().copied())).unwrap()
    }

    fn path(order: &[usize]) -> Decomposition {
        let ids: Vec<EdgeId> = order.iter().map(|&i| EdgeId(i)).collect();
        Decomposition::from_parents(
            ids[0],
            ids.iter()
                .enumerate()
                .map(|(k, &id)| (id, k.checked_sub(1).map(|p| ids[p]))),
        )
        .unwrap()
    }

    #[test]
    fn construction_merges_duplicates_and_rejects_empty() {
        let h = hg(&[&[1, 0], &[0, 1], &[2]]);
        assert_eq!(h.num_edges(), 2);
        assert_eq!(h.edge(EdgeId(0)).unwrap(), &[0, 1]);
        assert_eq!(h.labels(EdgeId(0)).unwrap(), &[0, 1]);
        assert_eq!(h.labels(EdgeId(1)).unwrap(), &[2]);
        assert_eq!(
            Hypergraph::new(vec![vec![0usize], vec![]]).unwrap_err(),
            HypergraphError::EmptyEdge(1)
        );
        assert!(matches!(
            Hypergraph::with_ids(vec![(EdgeId(3), vec![0usize]), (EdgeId(5), vec![0])]),
            Err(HypergraphError::DuplicateVertexSet(EdgeId(3), EdgeId(5)))
        ));
    }

    #[test]
    fn components() {
        assert_eq!(hg(&[&[0, 1], &[2, 3]]).connected_components().len(), 2);
        assert_eq!(hg(&[&[0, 1], &[1, 2]]).connected_components().len(), 1);
        let cc = hg(&[&[4, 5], &[0, 1], &[1, 2], &[5, 6]]).connected_components();
        assert_eq!(cc[0].edges, vec![EdgeId(0), EdgeId(3)]);
        assert_eq!(cc[0].vertices, vec![4, 5, 6]);
        assert_eq!(cc[1].edges, vec![EdgeId(1), EdgeId(2)]);
    }

    #[test]
    fn edge_removal() {
        // a=0, b=1, c=2
        let h = hg(&[&[0, 1], &[1, 2]]);
        let r = h.remove_edge(EdgeId(0)).unwrap();
        assert_eq!(r.vertices(), vec![1, 2]);
        assert_eq!(r.edge_ids().collect::<Vec<_>>(), vec![EdgeId(1)]);
        assert!(hg(&[&[0]]).remove_edge(EdgeId(0)).unwrap().is_empty());
        let covered = hg(&[&[0, 1, 2], &[0, 1]]);
        assert_eq!(
            covered.remove_edge(EdgeId(1)).unwrap().vertices(),
            covered.vertices()
        );
        assert_eq!(
            h.remove_edge(EdgeId(9)),
            Err(HypergraphError::UnknownEdge(EdgeId(9)))
        );

        assert_eq!(h.remove_edges(&[]).unwrap(), h);
        assert!(h.remove_edges(&[EdgeId(0), EdgeId(1)]).unwrap().is_empty());
        let chain = hg(&[&[0, 1], &[1, 2], &[2, 3]]);
        assert_eq!(
            chain
                .remove_edges(&[EdgeId(1)])
                .unwrap()
                .connected_components()
                .len(),
            2
        );
    }

    #[test]
    fn join_tree_checks() {
        let chain = hg(&[&[0, 1], &[1, 2], &[2, 3]]);
        assert!(is_join_tree(&chain, &path(&[0, 1, 2])).unwrap());
        assert!(!is_join_tree(&chain, &path(&[0, 2, 1])).unwrap());
        assert!(is_join_tree(&hg(&[&[0, 1]]), &Decomposition::leaf(EdgeId(0))).unwrap());
        assert_eq!(
            is_join_tree(&chain, &path(&[0, 1])),
            Err(HypergraphError::NodeMismatch)
        );
    }

    #[test]
    fn disjoint_branch_checks() {
        let chain = hg(&[&[0, 1], &[1, 2], &[2, 3]]);
        assert!(is_disjoint_branches(&chain, &path(&[0, 1, 2])).unwrap());
        assert!(is_disjoint_branches(&chain, &path(&[2, 1, 0])).unwrap());

        // root {a}, children {a,b} and {b,c}: connected for a but b is shared
        // across branches; as a join tree it already fails for b.
        let h = hg(&[&[0], &[0, 1], &[1, 2]]);
        let star = Decomposition::from_parents(
            EdgeId(0),
            [
                (EdgeId(0), None),
                (EdgeId(1), Some(EdgeId(0))),
                (EdgeId(2), Some(EdgeId(0))),
            ],
        )
        .unwrap();
        let verdict = match is_disjoint_branches(&h, &star) {
            Ok(b) => b,
            Err(HypergraphError::NotJoinTree) => false,
            Err(e) => panic!("{e}"),
        };
        assert!(!verdict);

        // root {a,b}, children {a,c} and {b,d}.
        let h = hg(&[&[0, 1], &[0, 2], &[1, 3]]);
        let star = Decomposition::from_parents(
            EdgeId(0),
            [
                (EdgeId(0), None),
                (EdgeId(1), Some(EdgeId(0))),
                (EdgeId(2), Some(EdgeId(0))),
            ],
        )
        .unwrap();
        assert!(is_disjoint_branches(&h, &star).unwrap());

        // A join tree whose branches share a vertex.
        let h = hg(&[&[0, 1], &[0, 2], &[0, 3]]);
        assert!(is_join_tree(&h, &star).unwrap());
        assert!(!is_disjoint_branches(&h, &star).unwrap());
    }

    #[test]
    fn join_path_orders() {
        let chain = hg(&[&[0, 1], &[1, 2], &[2, 3]]);
        let ids = |v: &[usize]| v.iter().map(|&i| EdgeId(i)).collect::<Vec<_>>();
        assert!(check_join_path_order(&chain, &ids(&[0, 1, 2])).unwrap());
        assert!(!check_join_path_order(&chain, &ids(&[1, 0, 2])).unwrap());
        let disjoint = hg(&[&[0], &[1], &[2]]);
        assert!(check_join_path_order(&disjoint, &ids(&[2, 0, 1])).unwrap());
        assert_eq!(
            check_join_path_order(&chain, &ids(&[0, 0, 2])),
            Err(HypergraphError::NotPermutation)
        );
    }

    #[test]
    fn gamma_cycles() {
        let triangle = hg(&[&[0, 1], &[1, 2], &[0, 2]]);
        let w = find_gamma_cycle(&triangle)
            .unwrap()
            .expect("triangle has a gamma-cycle");
        assert_eq!(w.edges.len(), 3);
        assert!(find_gamma_cycle(&hg(&[&[0, 1], &[1, 2], &[2, 3]]))
            .unwrap()
            .is_none());
        assert!(find_gamma_cycle(&hg(&[&[0, 1]])).unwrap().is_none());
        // {x,y}, {x,y,z}, {x,z}: closing vertex x may lie in the middle edge.
        assert!(find_gamma_cycle(&hg(&[&[0, 1], &[0, 1, 2], &[0, 2]]))
            .unwrap()
            .is_some());
    }

    #[test]
    fn alpha_beta() {
        let triangle = hg(&[&[0, 1], &[1, 2], &[0, 2]]);
        assert!(!is_alpha_acyclic(&triangle));
        assert!(!is_beta_acyclic(&triangle).unwrap());
        let covered = hg(&[&[0, 1, 2], &[0, 1], &[1, 2], &[0, 2]]);
        assert!(is_alpha_acyclic(&covered));
        assert!(!is_beta_acyclic(&covered).unwrap());
        assert!(is_beta_acyclic(&hg(&[&[0, 1], &[1, 2], &[2, 3]])).unwrap());
    }

    #[test]
    fn stacking_keeps_disjoint_branches() {
        let h = hg(&[&[0, 1], &[1, 2], &[5, 6], &[6, 7]]);
        let top = Decomposition::from_parents(
            EdgeId(0),
            [(EdgeId(0), None), (EdgeId(1), Some(EdgeId(0)))],
        )
        .unwrap();
        let bottom = Decomposition::from_parents(
            EdgeId(3),
            [(EdgeId(3), None), (EdgeId(2), Some(EdgeId(3)))],
        )
        .unwrap();
        let d = top.stack(bottom);
        assert!(is_disjoint_branches(&h, &d).unwrap());
        assert_eq!(d.children(EdgeId(1)), &[EdgeId(3)]);
    }

    #[test]
    fn tree_construction_errors() {
        let cyc = BTreeMap::from([
            (EdgeId(0), vec![EdgeId(1)]),
            (EdgeId(1), vec![EdgeId(2)]),
            (EdgeId(2), vec![EdgeId(1)]),
        ]);
        assert!(Decomposition::from_children(EdgeId(0), cyc).is_err());
        let orphan = BTreeMap::from([(EdgeId(0), vec![]), (EdgeId(1), vec![])]);
        assert_eq!(
            Decomposition::from_children(EdgeId(0), orphan),
            Err(TreeError::Unreachable(EdgeId(1)))
        );
    }
}
