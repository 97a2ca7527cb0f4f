//! Disjoint branches decompositions: A-separators and the recursive
//! construction rooted at a chosen edge.
//!
//! The construction removes the root, and for every component of what is
//! left picks the edges covering the root's trace there (the cover set). A
//! separator orders the cover set as a join path such that every component
//! remaining after deleting the cover set sees nondecreasing traces along the
//! path; each such component is then decomposed, rooted at the last path edge
//! that touches it. Any separator will do: when one leads to a decomposition,
//! all of them do.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::hypergraph::{
    check_join_path_order, intersect, is_disjoint_branches, is_join_tree, is_subset, ComponentView,
    Decomposition, EdgeId, Hypergraph, HypergraphError,
};
use crate::pqtree::{build_pq_tree, restrict_inclusion_order, PqError};

/// An ordering of a cover set; see [`validate_separator`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Separator(pub Vec<EdgeId>);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RejectReason {
    /// No remaining edge covers the root's trace on some component.
    EmptyCover,
    /// The cover set has no join path.
    NoJoinPath,
    /// Some component's traces on the cover set are not an inclusion chain.
    TraceNotChain,
    /// The ordering constraints of the components are incompatible.
    EmptyRestriction,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecomposeError {
    #[error("not db-rootable in edge {root}: {reason:?} while rooting edge {failed_at}")]
    Reject {
        root: EdgeId,
        failed_at: EdgeId,
        reason: RejectReason,
    },
    #[error("separator rejected: {0:?}")]
    Separator(RejectReason),
    #[error("component {component} has no disjoint branches decomposition")]
    NotDecomposable {
        component: usize,
        edges: Vec<EdgeId>,
    },
    #[error("empty edge set")]
    Empty,
    #[error(transparent)]
    Hypergraph(#[from] HypergraphError),
    #[error(transparent)]
    Pq(PqError),
}

impl DecomposeError {
    /// For a rejection, whether it happened below the requested root.
    pub fn is_recursive(&self) -> bool {
        matches!(self, DecomposeError::Reject { root, failed_at, .. } if root != failed_at)
    }
}

fn separator_error(e: PqError) -> DecomposeError {
    match e {
        PqError::Reject => DecomposeError::Separator(RejectReason::EmptyRestriction),
        PqError::TraceNotChain => DecomposeError::Separator(RejectReason::TraceNotChain),
        other => DecomposeError::Pq(other),
    }
}

/// Computes an A-separator of `h` for the edge set `a`: builds the PQ-tree of
/// join paths of `a`, narrows it per component of `h \ a`, and reads off the
/// leftmost frontier.
pub fn compute_separator(h: &Hypergraph, a: &[EdgeId]) -> Result<Separator, DecomposeError> {
    if a.is_empty() {
        return Err(DecomposeError::Empty);
    }
    let mut tree = build_pq_tree(h, a).map_err(|e| match e {
        PqError::Reject => DecomposeError::Separator(RejectReason::NoJoinPath),
        other => DecomposeError::Pq(other),
    })?;
    let rest = h.remove_edges(a)?;
    for comp in rest.connected_components() {
        tree = restrict_inclusion_order(&tree, h, &comp.vertices).map_err(separator_error)?;
    }
    Ok(Separator(tree.first_frontier()))
}

/// Checks both separator conditions directly: the order is a join path of
/// `a`, and for every component `C` of `h \ a`, once `a_j` meets `V_C`,
/// every earlier trace is contained in `a_j ∩ V_C`.
pub fn validate_separator(
    h: &Hypergraph,
    a: &[EdgeId],
    p: &Separator,
) -> Result<bool, DecomposeError> {
    let mut want = a.to_vec();
    want.sort_unstable();
    want.dedup();
    let mut got = p.0.clone();
    got.sort_unstable();
    if want != got || got.len() != p.0.len() {
        return Ok(false);
    }
    let sub = h.restrict(a)?;
    if !check_join_path_order(&sub, &p.0)? {
        return Ok(false);
    }
    let rest = h.remove_edges(a)?;
    for comp in rest.connected_components() {
        let traces: Vec<Vec<usize>> =
            p.0.iter()
                .map(|&e| Ok(intersect(h.edge(e)?, &comp.vertices)))
                .collect::<Result<_, HypergraphError>>()?;
        for j in 0..traces.len() {
            if traces[j].is_empty() {
                continue;
            }
            if traces[..j].iter().any(|t| !is_subset(t, &traces[j])) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Chooses the separator for a cover set. The default is [`compute_separator`];
/// tests substitute other valid separators.
pub trait SeparatorStrategy {
    fn separator(&mut self, h: &Hypergraph, a: &[EdgeId]) -> Result<Separator, DecomposeError>;
}

pub struct Canonical;

impl SeparatorStrategy for Canonical {
    fn separator(&mut self, h: &Hypergraph, a: &[EdgeId]) -> Result<Separator, DecomposeError> {
        compute_separator(h, a)
    }
}

/// A disjoint branches decomposition of `h` rooted at `root`, or a rejection
/// if none exists.
///
/// Other connected components of `h` (if any) are decomposed independently
/// and stacked below a deepest leaf, which keeps branches disjoint.
pub fn compute_db(h: &Hypergraph, root: EdgeId) -> Result<Decomposition, DecomposeError> {
    compute_db_with(h, root, &mut Canonical)
}

pub fn compute_db_with(
    h: &Hypergraph,
    root: EdgeId,
    strategy: &mut dyn SeparatorStrategy,
) -> Result<Decomposition, DecomposeError> {
    h.edge(root)?;
    let components = h.connected_components();
    let mut result = None;
    let mut others = Vec::new();
    for comp in &components {
        let g = h.restrict(&comp.edges)?;
        if comp.edges.contains(&root) {
            result = Some(rooted(&g, root, strategy)?);
        } else {
            others.push(first_rootable(&g, comp, strategy)?);
        }
    }
    let mut d = result.expect("root lies in some component");
    for o in others {
        d = d.stack(o);
    }
    debug_assert!(
        is_join_tree(h, &d).unwrap_or(false) && is_disjoint_branches(h, &d).unwrap_or(false),
        "compute_db produced an invalid decomposition"
    );
    Ok(d)
}

fn first_rootable(
    g: &Hypergraph,
    comp: &ComponentView,
    strategy: &mut dyn SeparatorStrategy,
) -> Result<Decomposition, DecomposeError> {
    for &e in &comp.edges {
        match rooted(g, e, strategy) {
            Ok(d) => return Ok(d),
            Err(DecomposeError::Reject { .. }) => continue,
            Err(other) => return Err(other),
        }
    }
    Err(DecomposeError::NotDecomposable {
        component: comp.index,
        edges: comp.edges.clone(),
    })
}

/// The construction on a connected hypergraph, with an explicit work list in
/// place of recursion so deep decompositions do not exhaust the stack.
fn rooted(
    h: &Hypergraph,
    root: EdgeId,
    strategy: &mut dyn SeparatorStrategy,
) -> Result<Decomposition, DecomposeError> {
    let mut parent: BTreeMap<EdgeId, Option<EdgeId>> = BTreeMap::new();
    parent.insert(root, None);
    let mut work = vec![(h.clone(), root)];
    while let Some((g, e)) = work.pop() {
        let reject = |reason| DecomposeError::Reject {
            root,
            failed_at: e,
            reason,
        };
        if g.num_edges() == 1 {
            continue;
        }
        let root_edge = g.edge(e)?.to_vec();
        let rest = g.remove_edge(e)?;
        for comp in rest.connected_components() {
            let part = rest.restrict(&comp.edges)?;
            let trace = intersect(&root_edge, &comp.vertices);
            let cover: Vec<EdgeId> = part
                .edges()
                .filter(|(_, vs)| is_subset(&trace, vs))
                .map(|(id, _)| id)
                .collect();
            if cover.is_empty() {
                return Err(reject(RejectReason::EmptyCover));
            }
            let path = match strategy.separator(&part, &cover) {
                Ok(p) => p.0,
                Err(DecomposeError::Separator(reason)) => return Err(reject(reason)),
                Err(other) => return Err(other),
            };
            let mut up = e;
            for &a in &path {
                parent.insert(a, Some(up));
                up = a;
            }
            let position: HashMap<EdgeId, usize> =
                path.iter().enumerate().map(|(i, &a)| (a, i)).collect();
            let below = part.remove_edges(&cover)?;
            for c in below.connected_components() {
                let mut last = None;
                for &a in &path {
                    if !intersect(part.edge(a)?, &c.vertices).is_empty() {
                        last = Some(a);
                    }
                }
                // The component is connected to the cover set within `part`.
                let anchor = last.expect("component touches the separator");
                debug_assert!(position.contains_key(&anchor));
                let mut ids = c.edges.clone();
                ids.push(anchor);
                work.push((part.restrict(&ids)?, anchor));
            }
        }
    }
    Ok(Decomposition::from_parents(root, parent).expect("construction yields a tree"))
}

/// One decomposition per connected component, each rooted at the first edge
/// (in id order) where the construction succeeds.
pub fn find_decomposition(h: &Hypergraph) -> Result<Vec<Decomposition>, DecomposeError> {
    let mut out = Vec::new();
    for comp in h.connected_components() {
        let g = h.restrict(&comp.edges)?;
        out.push(first_rootable(&g, &comp, &mut Canonical)?);
    }
    Ok(out)
}

/// A single decomposition of the whole hypergraph: per-component
/// decompositions stacked into one tree.
pub fn find_single_decomposition(h: &Hypergraph) -> Result<Decomposition, DecomposeError> {
    let mut parts = find_decomposition(h)?.into_iter();
    let first = parts.next().ok_or(DecomposeError::Empty)?;
    Ok(parts.fold(first, Decomposition::stack))
}
