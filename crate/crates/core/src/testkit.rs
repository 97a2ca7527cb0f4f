//! Instance generators and exhaustive oracles for testing.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::counter::{cnf_to_cspneg, to_disjunctive, CspNegInstance, Relation};
use crate::decomposer::{compute_db, find_decomposition};
use crate::hypergraph::{
    find_gamma_cycle, intersection_len, is_alpha_acyclic, is_beta_acyclic, is_disjoint_branches,
    is_join_tree, Decomposition, EdgeId, GammaCycle, Hypergraph, HypergraphError, Vertex,
    BETA_SEARCH_LIMIT, GAMMA_SEARCH_LIMIT,
};
use crate::pqtree::{build_pq_tree, NodeKind, PqfNode, PqfTree, SubtreeRef};

/// Parameters for [`gen_db_instance`]. The same config always yields the
/// same instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub edges: usize,
    pub max_edge_size: usize,
    /// Maximum number of children per tree node; 1 gives a join path.
    pub branching: usize,
    /// Inclusive range of forbidden tuples per relation, capped at `2^arity`.
    pub tuples: (usize, usize),
    /// Upper bound on the number of variables. Raised to `edges` if smaller.
    pub max_vars: usize,
    /// Inclusive range of fresh variables each non-root edge introduces.
    pub fresh: (usize, usize),
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            edges: 8,
            max_edge_size: 4,
            branching: 3,
            tuples: (0, 3),
            max_vars: 16,
            fresh: (0, 2),
        }
    }
}

/// A random instance together with a witness disjoint branches
/// decomposition rooted at `EdgeId(0)`.
///
/// The tree is grown top-down: each new edge takes a nonempty subset of its
/// parent's still-unclaimed vertices plus some fresh ones, so siblings share
/// nothing and every vertex's holders stay connected. Edge `i` of the witness
/// is relation `i` of [`to_disjunctive`] on the returned instance.
pub fn gen_db_instance(cfg: &GeneratorConfig) -> (CspNegInstance, Decomposition) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let m = cfg.edges.max(1);
    let max_size = cfg.max_edge_size.max(if m > 1 { 2 } else { 1 });
    let max_vars = cfg.max_vars.max(m);
    let branching = cfg.branching.max(1);

    // Every later edge may need one fresh vertex to stay distinct.
    let root_size = rng.random_range(1..=max_size.min(max_vars - (m - 1)));
    let mut used = root_size;
    let mut edges: Vec<Vec<Vertex>> = vec![(0..root_size).collect()];
    let mut parents: Vec<Option<usize>> = vec![None];
    let mut unclaimed: Vec<Vec<Vertex>> = vec![edges[0].clone()];
    let mut kids = vec![0usize];
    let mut seen: HashSet<Vec<Vertex>> = HashSet::from([edges[0].clone()]);

    for k in 1..m {
        let spare = max_vars - used - (m - 1 - k);
        let open: Vec<usize> = (0..edges.len())
            .filter(|&i| !unclaimed[i].is_empty() && kids[i] < branching)
            .collect();
        let p = *open
            .choose(&mut rng)
            .expect("the newest edge is always open");
        let (lo, hi) = (cfg.fresh.0.min(cfg.fresh.1), cfg.fresh.1);
        let mut f = rng.random_range(lo..=hi).min(spare).min(max_size - 1);
        let s = rng.random_range(1..=unclaimed[p].len().min(max_size - f));
        unclaimed[p].shuffle(&mut rng);
        let mut shared: Vec<Vertex> = unclaimed[p][..s].to_vec();
        shared.sort_unstable();
        if f == 0 && seen.contains(&shared) {
            f = 1;
            if shared.len() == max_size {
                shared.pop();
            }
        }
        unclaimed[p].retain(|v| !shared.contains(v));
        kids[p] += 1;
        let mut edge = shared;
        edge.extend(used..used + f);
        used += f;
        edge.sort_unstable();
        seen.insert(edge.clone());
        unclaimed.push(edge.clone());
        edges.push(edge);
        parents.push(Some(p));
        kids.push(0);
    }

    let mut relabel: Vec<Vertex> = (0..used).collect();
    relabel.shuffle(&mut rng);
    let (tmin, tmax) = (cfg.tuples.0.min(cfg.tuples.1), cfg.tuples.1);
    let constraints = edges
        .iter()
        .map(|e| {
            let scope: Vec<Vertex> = e.iter().map(|&v| relabel[v]).collect();
            let cap = if scope.len() >= 20 {
                usize::MAX
            } else {
                1 << scope.len()
            };
            let want = rng.random_range(tmin..=tmax).min(cap);
            let mut tuples: BTreeSet<Vec<bool>> = BTreeSet::new();
            while tuples.len() < want {
                tuples.insert((0..scope.len()).map(|_| rng.random_bool(0.5)).collect());
            }
            Relation::new(scope, tuples.into_iter().collect()).expect("scope is valid")
        })
        .collect();
    let inst = CspNegInstance::new(used, constraints).expect("variables in range");
    let witness = Decomposition::from_parents(
        EdgeId(0),
        parents
            .iter()
            .enumerate()
            .map(|(i, p)| (EdgeId(i), p.map(EdgeId))),
    )
    .expect("parents form a tree");
    let h = instance_hypergraph(&inst);
    assert!(
        h.num_edges() == m
            && is_join_tree(&h, &witness).unwrap_or(false)
            && is_disjoint_branches(&h, &witness).unwrap_or(false),
        "generator witness invalid for {cfg:?}"
    );
    (inst, witness)
}

/// The hypergraph of an instance's disjunctive form.
pub fn instance_hypergraph(inst: &CspNegInstance) -> Hypergraph {
    to_disjunctive(inst).hypergraph().clone()
}

/// Largest edge count [`exhaustive_db_search`] accepts.
pub const EXHAUSTIVE_LIMIT: usize = 6;

/// Searches all rooted labeled trees on the edges of `h` (roots in id order,
/// or only `root`) for a disjoint branches decomposition.
pub fn exhaustive_db_search(
    h: &Hypergraph,
    root: Option<EdgeId>,
) -> Result<Option<Decomposition>, HypergraphError> {
    let m = h.num_edges();
    if m > EXHAUSTIVE_LIMIT {
        return Err(HypergraphError::TooLarge {
            edges: m,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    if let Some(r) = root {
        h.edge(r)?;
    }
    if m == 0 {
        return Ok(None);
    }
    let ids: Vec<EdgeId> = h.edge_ids().collect();
    let sets: Vec<&[Vertex]> = ids
        .iter()
        .map(|&e| h.edge(e).expect("listed edge"))
        .collect();
    let w: Vec<Vec<usize>> = sets
        .iter()
        .map(|a| sets.iter().map(|b| intersection_len(a, b)).collect())
        .collect();
    // A spanning tree is a join tree iff its intersection weight reaches
    // Σ_v (deg(v) - 1), the most any spanning tree can carry.
    let target: usize = sets.iter().map(|e| e.len()).sum::<usize>() - h.num_vertices();
    let trees: Vec<Vec<(usize, usize)>> = labeled_trees(m)
        .into_iter()
        .filter(|t| t.iter().map(|&(a, b)| w[a][b]).sum::<usize>() == target)
        .collect();
    let roots: Vec<usize> = match root {
        Some(r) => vec![ids.iter().position(|&e| e == r).expect("checked above")],
        None => (0..m).collect(),
    };
    for &r in &roots {
        for tree in &trees {
            let parent = orient(m, tree, r);
            let mut anc = vec![0u64; m];
            for (i, a) in anc.iter_mut().enumerate() {
                let mut x = i;
                while let Some(p) = parent[x] {
                    *a |= 1 << p;
                    x = p;
                }
            }
            let comparable = |i: usize, j: usize| anc[i] >> j & 1 == 1 || anc[j] >> i & 1 == 1;
            let ok = (0..m).all(|i| (i + 1..m).all(|j| w[i][j] == 0 || comparable(i, j)));
            if ok {
                let d = Decomposition::from_parents(
                    ids[r],
                    (0..m).map(|i| (ids[i], parent[i].map(|p| ids[p]))),
                )
                .expect("oriented tree");
                debug_assert!(is_join_tree(h, &d)? && is_disjoint_branches(h, &d)?);
                return Ok(Some(d));
            }
        }
    }
    Ok(None)
}

/// All labeled trees on `m` nodes as edge lists, via Prüfer sequences.
fn labeled_trees(m: usize) -> Vec<Vec<(usize, usize)>> {
    match m {
        0 | 1 => return vec![Vec::new()],
        2 => return vec![vec![(0, 1)]],
        _ => {}
    }
    let len = m - 2;
    let total = m.pow(len as u32);
    let mut out = Vec::with_capacity(total);
    for mut code in 0..total {
        let mut seq = Vec::with_capacity(len);
        for _ in 0..len {
            seq.push(code % m);
            code /= m;
        }
        let mut degree = vec![1usize; m];
        for &s in &seq {
            degree[s] += 1;
        }
        let mut edges = Vec::with_capacity(m - 1);
        for &s in &seq {
            let leaf = (0..m).find(|&i| degree[i] == 1).expect("a leaf exists");
            edges.push((leaf, s));
            degree[leaf] -= 1;
            degree[s] -= 1;
        }
        let rest: Vec<usize> = (0..m).filter(|&i| degree[i] == 1).collect();
        edges.push((rest[0], rest[1]));
        out.push(edges);
    }
    out
}

fn orient(m: usize, tree: &[(usize, usize)], root: usize) -> Vec<Option<usize>> {
    let mut adj = vec![Vec::new(); m];
    for &(a, b) in tree {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut parent = vec![None; m];
    let mut seen = vec![false; m];
    seen[root] = true;
    let mut stack = vec![root];
    while let Some(x) = stack.pop() {
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                parent[y] = Some(x);
                stack.push(y);
            }
        }
    }
    parent
}

/// `H_n`: edges `{y_i, x_1, …, x_n}` for each `i`, then the singletons
/// `{x_i}`. Vertex `x_i` is `i - 1` and `y_i` is `n + i - 1`.
pub fn h_n(n: usize) -> Hypergraph {
    let xs: Vec<Vertex> = (0..n).collect();
    let big = (0..n).map(|i| {
        let mut e = xs.clone();
        e.push(n + i);
        e
    });
    let small = (0..n).map(|i| vec![i]);
    Hypergraph::new(big.chain(small).collect::<Vec<_>>()).expect("H_n edges are distinct")
}

/// A random CNF whose hypergraph is `H_n`: one or two clauses per edge.
pub fn h_n_instance(n: usize, seed: u64) -> CspNegInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut clauses = Vec::new();
    for (_, e) in h_n(n).edges() {
        let copies = rng.random_range(1..=2);
        for _ in 0..copies {
            clauses.push(
                e.iter()
                    .map(|&v| {
                        let lit = v as i64 + 1;
                        if rng.random_bool(0.5) {
                            lit
                        } else {
                            -lit
                        }
                    })
                    .collect(),
            );
        }
    }
    cnf_to_cspneg(&clauses, 2 * n).expect("literals in range")
}

/// `m` distinct nonempty random edges over vertices `0..n`.
pub fn random_hypergraph(rng: &mut impl Rng, m: usize, n: usize) -> Hypergraph {
    assert!(n < 64 && m < (1usize << n), "not enough distinct edges");
    let mut masks = BTreeSet::new();
    while masks.len() < m {
        masks.insert(rng.random_range(1u64..(1 << n)));
    }
    Hypergraph::new(masks.into_iter().map(mask_vertices)).expect("nonempty edges")
}

fn mask_vertices(mask: u64) -> Vec<Vertex> {
    (0..64).filter(|b| mask >> b & 1 == 1).collect()
}

/// One representative per isomorphism class of families of at most
/// `max_edges` distinct nonempty edges over at most `n` vertices.
pub fn desk_corpus(max_edges: usize, n: usize) -> Vec<Hypergraph> {
    assert!(n <= 8, "corpus enumeration is for small vertex counts");
    let perms = crate::pqtree::permutations(n);
    let universe = 1usize << n;
    let maps: Vec<Vec<u8>> = perms
        .iter()
        .map(|p| {
            (0..universe)
                .map(|mask| {
                    (0..n)
                        .filter(|&b| mask >> b & 1 == 1)
                        .map(|b| 1u8 << p[b])
                        .sum()
                })
                .collect()
        })
        .collect();
    let mut classes: BTreeSet<Vec<u8>> = BTreeSet::new();
    let mut chosen: Vec<u8> = Vec::new();
    let mut degree = vec![0usize; n];

    fn canonical(family: &[u8], maps: &[Vec<u8>]) -> Vec<u8> {
        let mut best: Option<Vec<u8>> = None;
        for map in maps {
            let mut img: Vec<u8> = family.iter().map(|&m| map[m as usize]).collect();
            img.sort_unstable();
            if best.as_ref().is_none_or(|b| img < *b) {
                best = Some(img);
            }
        }
        best.unwrap_or_default()
    }

    #[allow(clippy::too_many_arguments)]
    fn go(
        next: usize,
        universe: usize,
        max_edges: usize,
        chosen: &mut Vec<u8>,
        degree: &mut [usize],
        maps: &[Vec<u8>],
        classes: &mut BTreeSet<Vec<u8>>,
    ) {
        // Each class has a member whose degrees are nonincreasing in the
        // vertex index; only those are canonicalized.
        if !chosen.is_empty() && degree.windows(2).all(|w| w[0] >= w[1]) {
            classes.insert(canonical(chosen, maps));
        }
        if chosen.len() == max_edges {
            return;
        }
        for mask in next..universe {
            chosen.push(mask as u8);
            for (b, d) in degree.iter_mut().enumerate() {
                *d += mask >> b & 1;
            }
            go(mask + 1, universe, max_edges, chosen, degree, maps, classes);
            for (b, d) in degree.iter_mut().enumerate() {
                *d -= mask >> b & 1;
            }
            chosen.pop();
        }
    }

    go(
        1,
        universe,
        max_edges,
        &mut chosen,
        &mut degree,
        &maps,
        &mut classes,
    );
    classes
        .into_iter()
        .map(|f| {
            Hypergraph::new(f.into_iter().map(|m| mask_vertices(u64::from(m))))
                .expect("distinct nonempty edges")
        })
        .collect()
}

/// A random PQF-tree on leaves `0..leaves`.
pub fn random_pqf_tree(rng: &mut impl Rng, leaves: usize) -> PqfTree {
    fn build(rng: &mut impl Rng, ids: &[usize]) -> PqfNode {
        if ids.len() == 1 {
            return PqfNode::leaf(ids[0]);
        }
        let parts = rng.random_range(2..=ids.len().min(4));
        let mut cuts: Vec<usize> = rand::seq::index::sample(rng, ids.len() - 1, parts - 1)
            .into_iter()
            .map(|c| c + 1)
            .collect();
        cuts.sort_unstable();
        let mut children = Vec::with_capacity(parts);
        let mut start = 0;
        for end in cuts.into_iter().chain([ids.len()]) {
            children.push(build(rng, &ids[start..end]));
            start = end;
        }
        let kind = *[NodeKind::P, NodeKind::Q, NodeKind::F]
            .choose(rng)
            .expect("nonempty");
        PqfNode::inner(kind, children)
    }
    let mut ids: Vec<usize> = (0..leaves).collect();
    ids.shuffle(rng);
    PqfTree::new(build(rng, &ids)).expect("distinct leaves")
}

/// A random valid subtree reference into `t`: a node reached by a random
/// walk, and for Q- and F-nodes a random range of at least two children.
pub fn random_subtree_ref(rng: &mut impl Rng, t: &PqfTree) -> SubtreeRef {
    let mut path = Vec::new();
    let mut node = t.root();
    loop {
        let children = node.children();
        if children.is_empty() {
            return SubtreeRef {
                path,
                range: (0, 0),
            };
        }
        if rng.random_bool(0.4) {
            let k = children.len();
            let range = match node {
                PqfNode::Inner {
                    kind: NodeKind::Q | NodeKind::F,
                    ..
                } => {
                    let i = rng.random_range(0..k - 1);
                    (i, rng.random_range(i + 1..k))
                }
                _ => (0, k - 1),
            };
            return SubtreeRef { path, range };
        }
        let c = rng.random_range(0..children.len());
        path.push(c);
        node = &children[c];
    }
}

/// Acyclicity and decomposability properties of a hypergraph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub alpha: bool,
    /// `None` above [`BETA_SEARCH_LIMIT`] edges.
    pub beta: Option<bool>,
    /// Decomposable from every root.
    pub gamma: bool,
    /// A witness cycle, searched for up to [`GAMMA_SEARCH_LIMIT`] edges.
    pub gamma_cycle: Option<GammaCycle>,
    pub disjoint_branches: bool,
    pub join_path: bool,
}

pub fn classify(h: &Hypergraph) -> Classification {
    let gamma = h.edge_ids().all(|e| compute_db(h, e).is_ok());
    let gamma_cycle = if h.num_edges() <= GAMMA_SEARCH_LIMIT {
        find_gamma_cycle(h).ok().flatten()
    } else {
        None
    };
    Classification {
        alpha: is_alpha_acyclic(h),
        beta: (h.num_edges() <= BETA_SEARCH_LIMIT).then(|| is_beta_acyclic(h).unwrap_or(false)),
        gamma,
        gamma_cycle,
        disjoint_branches: find_decomposition(h).is_ok(),
        join_path: !h.is_empty() && build_pq_tree(h, &h.edge_ids().collect::<Vec<_>>()).is_ok(),
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "alpha={}", self.alpha)?;
        match self.beta {
            Some(b) => writeln!(f, "beta={b}")?,
            None => writeln!(f, "beta=unknown")?,
        }
        writeln!(f, "gamma={}", self.gamma)?;
        if let Some(c) = &self.gamma_cycle {
            let edges: Vec<String> = c.edges.iter().map(|e| e.to_string()).collect();
            writeln!(f, "gamma_cycle_edges={}", edges.join(","))?;
        }
        writeln!(f, "disjoint_branches={}", self.disjoint_branches)?;
        write!(f, "join_path={}", self.join_path)
    }
}
