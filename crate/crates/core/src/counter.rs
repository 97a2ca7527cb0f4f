//! Model counting for Boolean CSPs in negative representation.
//!
//! An instance lists, per constraint, the tuples it forbids. Its models are
//! the assignments violating no constraint, so `#Φ = 2^n - #ψ` where `ψ` is
//! the disjunction of the forbidden-tuple relations. `#ψ` is computed by a
//! dynamic program over a disjoint branches decomposition of ψ's hypergraph.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::decomposer::{find_single_decomposition, DecomposeError};
use crate::hypergraph::{
    intersect, is_disjoint_branches, is_join_tree, is_subset, Decomposition, EdgeId, Hypergraph,
    HypergraphError, Vertex,
};

pub type BigCount = BigUint;

/// Largest instance [`brute_force_count`] will enumerate.
pub const BRUTE_FORCE_LIMIT: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CountError {
    #[error("malformed literal {0}")]
    MalformedLiteral(i64),
    #[error("relation scope is empty")]
    EmptyScope,
    #[error("variable {0} repeated in scope")]
    RepeatedVariable(Vertex),
    #[error("tuple of arity {got} on a scope of size {want}")]
    Arity { got: usize, want: usize },
    #[error("variable {var} out of range for {num_vars} variables")]
    VariableOutOfRange { var: Vertex, num_vars: usize },
    #[error("two relations share the scope {0:?}")]
    DuplicateScope(Vec<Vertex>),
    #[error("precondition violated: {0}")]
    Precondition(&'static str),
    #[error("variable sets overlap")]
    Overlap,
    #[error("decomposition is not a disjoint branches decomposition of the instance")]
    InvalidDecomposition,
    #[error("decomposition node {0:?} matches no constraint scope")]
    ScopeMismatch(Vec<Vertex>),
    #[error("component {component} has no disjoint branches decomposition")]
    NotDecomposable {
        component: usize,
        edges: Vec<EdgeId>,
    },
    #[error("{num_vars} variables exceed the brute-force limit of {limit}")]
    TooLarge { num_vars: usize, limit: usize },
    #[error(transparent)]
    Decompose(DecomposeError),
    #[error(transparent)]
    Hypergraph(#[from] HypergraphError),
}

impl From<DecomposeError> for CountError {
    fn from(e: DecomposeError) -> Self {
        match e {
            DecomposeError::NotDecomposable { component, edges } => {
                CountError::NotDecomposable { component, edges }
            }
            other => CountError::Decompose(other),
        }
    }
}

/// A set of Boolean tuples over a scope. The scope is kept sorted by variable
/// id and the tuples sorted and distinct.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Relation {
    scope: Vec<Vertex>,
    tuples: Vec<Vec<bool>>,
}

impl Relation {
    /// Builds a relation, reordering the scope (and every tuple with it) by
    /// variable id.
    pub fn new(scope: Vec<Vertex>, tuples: Vec<Vec<bool>>) -> Result<Self, CountError> {
        if scope.is_empty() {
            return Err(CountError::EmptyScope);
        }
        let mut perm: Vec<usize> = (0..scope.len()).collect();
        perm.sort_by_key(|&i| scope[i]);
        for w in perm.windows(2) {
            if scope[w[0]] == scope[w[1]] {
                return Err(CountError::RepeatedVariable(scope[w[0]]));
            }
        }
        let mut out = Vec::with_capacity(tuples.len());
        for t in tuples {
            if t.len() != scope.len() {
                return Err(CountError::Arity {
                    got: t.len(),
                    want: scope.len(),
                });
            }
            out.push(perm.iter().map(|&i| t[i]).collect::<Vec<bool>>());
        }
        out.sort();
        out.dedup();
        let scope = perm.iter().map(|&i| scope[i]).collect();
        Ok(Self { scope, tuples: out })
    }

    pub fn scope(&self) -> &[Vertex] {
        &self.scope
    }

    pub fn tuples(&self) -> &[Vec<bool>] {
        &self.tuples
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// Whether `tuple` (aligned with the scope) agrees with `a` where both
    /// are defined.
    fn consistent(&self, tuple: &[bool], a: &PartialAssignment) -> bool {
        self.scope
            .iter()
            .zip(tuple)
            .all(|(v, &b)| a.get(*v).is_none_or(|x| x == b))
    }

    fn union(&mut self, other: &Relation) {
        self.tuples.extend(other.tuples.iter().cloned());
        self.tuples.sort();
        self.tuples.dedup();
    }
}

/// A CSP over variables `0..num_vars` whose constraints list forbidden tuples.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CspNegInstance {
    pub num_vars: usize,
    pub constraints: Vec<Relation>,
    /// Set when the input contains a constraint no assignment can satisfy
    /// outright, such as the empty clause.
    pub unsat: bool,
}

impl CspNegInstance {
    pub fn new(num_vars: usize, constraints: Vec<Relation>) -> Result<Self, CountError> {
        for r in &constraints {
            if let Some(&var) = r.scope.iter().find(|&&v| v >= num_vars) {
                return Err(CountError::VariableOutOfRange { var, num_vars });
            }
        }
        Ok(Self {
            num_vars,
            constraints,
            unsat: false,
        })
    }

    /// Declared variables that occur in no constraint scope.
    pub fn free_vars(&self) -> usize {
        self.num_vars - self.used_vars().len()
    }

    fn used_vars(&self) -> Vec<Vertex> {
        let mut vs: Vec<Vertex> = self
            .constraints
            .iter()
            .flat_map(|r| r.scope.iter().copied())
            .collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }
}

/// A disjunction of relations in positive representation with pairwise
/// distinct scopes. Relation `i` is hyperedge `EdgeId(i)` of the hypergraph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DisjunctiveInstance {
    vars: Vec<Vertex>,
    relations: Vec<Relation>,
    hypergraph: Hypergraph,
}

impl DisjunctiveInstance {
    pub fn new(relations: Vec<Relation>) -> Result<Self, CountError> {
        let mut seen = HashSet::new();
        for r in &relations {
            if !seen.insert(r.scope.clone()) {
                return Err(CountError::DuplicateScope(r.scope.clone()));
            }
        }
        let hypergraph = Hypergraph::new(relations.iter().map(|r| r.scope.iter().copied()))?;
        Ok(Self {
            vars: hypergraph.vertices(),
            relations,
            hypergraph,
        })
    }

    pub fn vars(&self) -> &[Vertex] {
        &self.vars
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn hypergraph(&self) -> &Hypergraph {
        &self.hypergraph
    }

    pub fn relation(&self, e: EdgeId) -> &Relation {
        &self.relations[e.0]
    }
}

/// A partial map from variables to Boolean values.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialAssignment(BTreeMap<Vertex, bool>);

impl PartialAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, v: Vertex) -> Option<bool> {
        self.0.get(&v).copied()
    }

    pub fn set(&mut self, v: Vertex, b: bool) {
        self.0.insert(v, b);
    }

    pub fn domain(&self) -> Vec<Vertex> {
        self.0.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vertex, bool)> + '_ {
        self.0.iter().map(|(&v, &b)| (v, b))
    }

    /// `a ∼ b`: the two agree on their common domain.
    pub fn is_consistent(&self, other: &PartialAssignment) -> bool {
        self.iter()
            .all(|(v, b)| other.get(v).is_none_or(|x| x == b))
    }

    /// `a|_Y`.
    pub fn restrict(&self, ys: &[Vertex]) -> PartialAssignment {
        self.iter().filter(|(v, _)| ys.contains(v)).collect()
    }

    /// `a ⊕ b`, defined only for disjoint domains.
    pub fn disjoint_union(&self, other: &PartialAssignment) -> Option<PartialAssignment> {
        let mut out = self.clone();
        for (v, b) in other.iter() {
            if out.0.insert(v, b).is_some() {
                return None;
            }
        }
        Some(out)
    }
}

impl FromIterator<(Vertex, bool)> for PartialAssignment {
    fn from_iter<I: IntoIterator<Item = (Vertex, bool)>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Translates CNF clauses over variables `1..=n` (signed literals) into
/// negative representation: each clause forbids its unique counter-model.
pub fn cnf_to_cspneg(clauses: &[Vec<i64>], n: usize) -> Result<CspNegInstance, CountError> {
    let mut inst = CspNegInstance {
        num_vars: n,
        ..Default::default()
    };
    for clause in clauses {
        let mut lits: BTreeMap<Vertex, (bool, bool)> = BTreeMap::new();
        for &lit in clause {
            let var = lit.unsigned_abs() as usize;
            if lit == 0 || var > n {
                return Err(CountError::MalformedLiteral(lit));
            }
            let seen = lits.entry(var - 1).or_default();
            if lit > 0 {
                seen.0 = true;
            } else {
                seen.1 = true;
            }
        }
        if lits.is_empty() {
            inst.unsat = true;
            continue;
        }
        let scope: Vec<Vertex> = lits.keys().copied().collect();
        let tautology = lits.values().any(|&(p, q)| p && q);
        let tuples = if tautology {
            Vec::new()
        } else {
            // A positive literal is falsified by 0, a negative one by 1.
            vec![lits.values().map(|&(pos, _)| !pos).collect()]
        };
        inst.constraints.push(Relation::new(scope, tuples)?);
    }
    Ok(inst)
}

/// The disjunction of the instance's forbidden-tuple relations. Constraints
/// with the same variable set merge into one relation; the resulting
/// relations keep the order of first occurrence. The `unsat` flag is not
/// represented.
pub fn to_disjunctive(inst: &CspNegInstance) -> DisjunctiveInstance {
    let mut index: HashMap<&[Vertex], usize> = HashMap::new();
    let mut relations: Vec<Relation> = Vec::new();
    for r in &inst.constraints {
        match index.get(r.scope()) {
            Some(&i) => relations[i].union(r),
            None => {
                index.insert(r.scope(), relations.len());
                relations.push(r.clone());
            }
        }
    }
    DisjunctiveInstance::new(relations).expect("scopes are distinct after merging")
}

fn pow2(k: usize) -> BigUint {
    BigUint::one() << k
}

/// `S_x(r, a)`: the number of assignments of `x` that agree with `a` and
/// extend some tuple of `r`.
pub fn s_relation(
    r: &Relation,
    x: &[Vertex],
    a: &PartialAssignment,
) -> Result<BigCount, CountError> {
    let x = sorted(x);
    if !is_subset(&r.scope, &x) {
        return Err(CountError::Precondition(
            "relation scope not contained in x",
        ));
    }
    let dom = a.domain();
    if !is_subset(&dom, &x) {
        return Err(CountError::Precondition(
            "assignment domain not contained in x",
        ));
    }
    let covered = r.scope.len() + dom.len() - intersect(&r.scope, &dom).len();
    let matching = r.tuples.iter().filter(|t| r.consistent(t, a)).count();
    Ok(BigUint::from(matching) << (x.len() - covered))
}

fn sorted(x: &[Vertex]) -> Vec<Vertex> {
    let mut x = x.to_vec();
    x.sort_unstable();
    x.dedup();
    x
}

/// The number of assignments of `x` agreeing with `a` that satisfy
/// `φ_1 ∨ … ∨ φ_k`, where `φ_i` lives on `X_i` and `parts[i]` carries `X_i`
/// together with `S_{X_i}(φ_i, a|_{X_i})`. The `X_i` must be pairwise
/// disjoint.
pub fn combine_disjoint(
    parts: &[(Vec<Vertex>, BigCount)],
    x: &[Vertex],
    a: &PartialAssignment,
) -> Result<BigCount, CountError> {
    let x = sorted(x);
    let dom = a.domain();
    if !is_subset(&dom, &x) {
        return Err(CountError::Precondition(
            "assignment domain not contained in x",
        ));
    }
    let mut seen = HashSet::new();
    let mut covered = dom.len();
    let mut fused = Vec::with_capacity(parts.len());
    for (xs, s) in parts {
        let xs = sorted(xs);
        if !is_subset(&xs, &x) {
            return Err(CountError::Precondition("part not contained in x"));
        }
        if xs.iter().any(|v| !seen.insert(*v)) {
            return Err(CountError::Overlap);
        }
        let free = xs.len() - intersect(&xs, &dom).len();
        if *s > pow2(free) {
            return Err(CountError::Precondition(
                "subcount exceeds its assignment space",
            ));
        }
        covered += free;
        fused.push((free, s));
    }
    Ok(fuse(x.len() - covered, &fused))
}

/// `2^outside · Σ_i S_i · Π_{j<i} (2^{f_j} - S_j) · Π_{j>i} 2^{f_j}`.
fn fuse(outside: usize, parts: &[(usize, &BigUint)]) -> BigUint {
    let mut suffix = vec![0usize; parts.len() + 1];
    for i in (0..parts.len()).rev() {
        suffix[i] = suffix[i + 1] + parts[i].0;
    }
    let mut total = BigUint::zero();
    let mut prefix = BigUint::one();
    for (i, &(f, s)) in parts.iter().enumerate() {
        if !s.is_zero() && !prefix.is_zero() {
            total += (s * &prefix) << suffix[i + 1];
        }
        prefix *= pow2(f) - s;
    }
    total << outside
}

/// Sorted `(variable, value)` pairs; the memo key for a conditioning
/// assignment.
type Key = Vec<(Vertex, bool)>;

fn restrict_key(key: &[(Vertex, bool)], to: &[Vertex]) -> Key {
    key.iter()
        .filter(|(v, _)| to.binary_search(v).is_ok())
        .copied()
        .collect()
}

struct Node<'a> {
    rel: &'a Relation,
    children: &'a [EdgeId],
    /// `var(R_t) ∩ var(R_c)` per child `c`; by connectedness this equals
    /// `var(R_t) ∩ V_c`.
    interfaces: Vec<Vec<Vertex>>,
}

/// `#ψ`: the number of assignments of ψ's variables satisfying some relation,
/// computed over a disjoint branches decomposition `d` of ψ's hypergraph.
pub fn count_disjunctive(
    psi: &DisjunctiveInstance,
    d: &Decomposition,
) -> Result<BigCount, CountError> {
    let h = psi.hypergraph();
    if !is_join_tree(h, d)? || !is_disjoint_branches(h, d)? {
        return Err(CountError::InvalidDecomposition);
    }
    let (count, width) = count_tree(psi, d);
    Ok(count << (psi.vars.len() - width))
}

/// `S_{V_r}(φ, ∅)` for the subtree rooted at `d.root()`, with `|V_r|`.
fn count_tree(psi: &DisjunctiveInstance, d: &Decomposition) -> (BigUint, usize) {
    let order = d.preorder();
    let nodes: HashMap<EdgeId, Node> = order
        .iter()
        .map(|&t| {
            let rel = psi.relation(t);
            let children = d.children(t);
            let interfaces = children
                .iter()
                .map(|&c| intersect(&rel.scope, &psi.relation(c).scope))
                .collect();
            (
                t,
                Node {
                    rel,
                    children,
                    interfaces,
                },
            )
        })
        .collect();

    // Conditioning keys, top-down: the empty assignment and every restriction
    // of a parent key or parent tuple to the child's interface.
    let mut keys: HashMap<EdgeId, HashSet<Key>> = HashMap::new();
    keys.insert(d.root(), HashSet::from([Key::new()]));
    for &t in &order {
        let node = &nodes[&t];
        let tuple_keys: Vec<Key> = node
            .rel
            .tuples
            .iter()
            .map(|tu| {
                node.rel
                    .scope
                    .iter()
                    .copied()
                    .zip(tu.iter().copied())
                    .collect()
            })
            .collect();
        for (c, iface) in node.children.iter().zip(&node.interfaces) {
            let mut ks = HashSet::from([Key::new()]);
            for k in keys[&t].iter().chain(&tuple_keys) {
                ks.insert(restrict_key(k, iface));
            }
            keys.insert(*c, ks);
        }
    }

    // Values, bottom-up. A child's table is dropped once its parent is done.
    let mut width: HashMap<EdgeId, usize> = HashMap::new();
    let mut memo: HashMap<EdgeId, HashMap<Key, BigUint>> = HashMap::new();
    for &t in order.iter().rev() {
        let node = &nodes[&t];
        let scope = &node.rel.scope;
        let w = scope.len()
            + node
                .children
                .iter()
                .zip(&node.interfaces)
                .map(|(c, i)| width[c] - i.len())
                .sum::<usize>();
        width.insert(t, w);
        let child_memo: Vec<HashMap<Key, BigUint>> = node
            .children
            .iter()
            .map(|c| memo.remove(c).expect("child computed"))
            .collect();

        // Children fused under conditioning `key` (domain within var(R_t)).
        let combine = |key: &[(Vertex, bool)]| -> BigUint {
            let mut covered = key.len();
            let mut parts = Vec::with_capacity(node.children.len());
            for (j, c) in node.children.iter().enumerate() {
                let iface = &node.interfaces[j];
                let k = restrict_key(key, iface);
                let free = width[c] - k.len();
                covered += free;
                parts.push((free, &child_memo[j][&k]));
            }
            fuse(w - covered, &parts)
        };

        let tuple_terms: Vec<(Key, BigUint)> = node
            .rel
            .tuples
            .iter()
            .map(|tu| {
                let k: Key = scope.iter().copied().zip(tu.iter().copied()).collect();
                let v = combine(&k);
                (k, v)
            })
            .collect();

        let mut table = HashMap::with_capacity(keys[&t].len());
        for key in &keys[&t] {
            let mut matching = 0usize;
            let mut overlap = BigUint::zero();
            for (tk, v) in &tuple_terms {
                if key.iter().all(|kv| tk.binary_search(kv).is_ok()) {
                    matching += 1;
                    overlap += v;
                }
            }
            let s_rel = BigUint::from(matching) << (w - scope.len());
            let value = s_rel + combine(key) - overlap;
            table.insert(key.clone(), value);
        }
        memo.insert(t, table);
    }
    let root = memo.remove(&d.root()).expect("root computed");
    (root[&Key::new()].clone(), width[&d.root()])
}

/// `#Φ`, decomposing every connected component of ψ's hypergraph with the
/// default search.
pub fn count_models(inst: &CspNegInstance) -> Result<BigCount, CountError> {
    count_models_with(inst, |g| {
        find_single_decomposition(g).map_err(CountError::from)
    })
}

/// `#Φ` with a caller-supplied decomposer, invoked once per connected
/// component of ψ's hypergraph (edge ids are those of [`to_disjunctive`]).
pub fn count_models_with<F>(inst: &CspNegInstance, mut decompose: F) -> Result<BigCount, CountError>
where
    F: FnMut(&Hypergraph) -> Result<Decomposition, CountError>,
{
    if inst.unsat {
        return Ok(BigUint::zero());
    }
    let psi = to_disjunctive(inst);
    let h = psi.hypergraph();
    let mut total = pow2(inst.free_vars());
    for comp in h.connected_components() {
        let g = h.restrict(&comp.edges)?;
        let d = decompose(&g).map_err(|e| match e {
            CountError::NotDecomposable { .. } => CountError::NotDecomposable {
                component: comp.index,
                edges: comp.edges.clone(),
            },
            other => other,
        })?;
        if !is_join_tree(&g, &d)? || !is_disjoint_branches(&g, &d)? {
            return Err(CountError::InvalidDecomposition);
        }
        let (violating, width) = count_tree(&psi, &d);
        debug_assert_eq!(width, comp.vertices.len());
        total *= pow2(width) - violating;
        if total.is_zero() {
            break;
        }
    }
    Ok(total)
}

/// Re-labels the nodes of `d` (edges of `dh`) with the ids of the edges of
/// `target` having the same vertex sets. Every edge of `target` must appear.
pub fn translate_decomposition(
    target: &Hypergraph,
    dh: &Hypergraph,
    d: &Decomposition,
) -> Result<Decomposition, CountError> {
    let mut map = HashMap::new();
    for node in d.nodes() {
        let vs = dh.edge(node)?;
        let e = target
            .find_edge(vs)
            .ok_or_else(|| CountError::ScopeMismatch(vs.to_vec()))?;
        map.insert(node, e);
    }
    if d.len() != target.num_edges() {
        return Err(CountError::InvalidDecomposition);
    }
    let parents = d.parent_map();
    Decomposition::from_parents(
        map[&d.root()],
        d.nodes()
            .map(|n| (map[&n], parents.get(&n).map(|p| map[p]))),
    )
    .map_err(|_| CountError::InvalidDecomposition)
}

/// `#Φ` using one decomposition `d` of `dh`, whose edges are matched to
/// ψ's relations by vertex set.
pub fn count_models_using(
    inst: &CspNegInstance,
    dh: &Hypergraph,
    d: &Decomposition,
) -> Result<BigCount, CountError> {
    if inst.unsat {
        return Ok(BigUint::zero());
    }
    let psi = to_disjunctive(inst);
    let translated = translate_decomposition(psi.hypergraph(), dh, d)?;
    let violating = count_disjunctive(&psi, &translated)?;
    Ok((pow2(psi.vars.len()) - violating) << inst.free_vars())
}

/// `#Φ` by enumerating all `2^n` assignments.
pub fn brute_force_count(inst: &CspNegInstance) -> Result<BigCount, CountError> {
    let n = inst.num_vars;
    if n > BRUTE_FORCE_LIMIT {
        return Err(CountError::TooLarge {
            num_vars: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    if inst.unsat {
        return Ok(BigUint::zero());
    }
    let forbidden: Vec<(&[Vertex], HashSet<u64>)> = inst
        .constraints
        .iter()
        .map(|r| {
            let codes = r
                .tuples
                .iter()
                .map(|t| {
                    t.iter()
                        .enumerate()
                        .fold(0u64, |acc, (i, &b)| acc | (u64::from(b) << i))
                })
                .collect();
            (r.scope(), codes)
        })
        .collect();
    let mut count = 0u64;
    for assignment in 0u64..(1u64 << n) {
        let ok = forbidden.iter().all(|(scope, codes)| {
            let code = scope
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, &v)| acc | (((assignment >> v) & 1) << i));
            !codes.contains(&code)
        });
        count += u64::from(ok);
    }
    Ok(BigUint::from(count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposer::compute_db;

    fn pa(pairs: &[(Vertex, bool)]) -> PartialAssignment {
        pairs.iter().copied().collect()
    }

    fn rel(scope: &[Vertex], tuples: &[&[u8]]) -> Relation {
        Relation::new(
            scope.to_vec(),
            tuples
                .iter()
                .map(|t| t.iter().map(|&b| b == 1).collect())
                .collect(),
        )
        .unwrap()
    }

    /// Satisfying assignments of ψ over its variables, by enumeration.
    fn enumerate_disjunctive(psi: &DisjunctiveInstance) -> u64 {
        let vars = psi.vars();
        (0u64..1 << vars.len())
            .filter(|bits| {
                let a: PartialAssignment = vars
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| (v, bits >> i & 1 == 1))
                    .collect();
                psi.relations()
                    .iter()
                    .any(|r| r.tuples().iter().any(|t| r.consistent(t, &a)))
            })
            .count() as u64
    }

    #[test]
    fn cnf_translation() {
        let inst = cnf_to_cspneg(&[vec![1, -2]], 2).unwrap();
        assert_eq!(inst.constraints, vec![rel(&[0, 1], &[&[0, 1]])]);

        let taut = cnf_to_cspneg(&[vec![1, -1]], 1).unwrap();
        assert_eq!(taut.constraints, vec![rel(&[0], &[])]);

        assert!(cnf_to_cspneg(&[vec![]], 1).unwrap().unsat);
        assert_eq!(
            cnf_to_cspneg(&[vec![3]], 2),
            Err(CountError::MalformedLiteral(3))
        );
        assert_eq!(
            cnf_to_cspneg(&[vec![0]], 2),
            Err(CountError::MalformedLiteral(0))
        );

        let dup = cnf_to_cspneg(&[vec![2, 2, -1]], 2).unwrap();
        assert_eq!(dup.constraints, vec![rel(&[0, 1], &[&[1, 0]])]);
    }

    #[test]
    fn relation_scope_is_normalized() {
        let r = Relation::new(vec![5, 2], vec![vec![true, false], vec![true, false]]).unwrap();
        assert_eq!(r.scope(), &[2, 5]);
        assert_eq!(r.tuples(), &[vec![false, true]]);
        assert!(Relation::new(vec![1, 1], vec![]).is_err());
        assert!(Relation::new(vec![], vec![]).is_err());
        assert!(Relation::new(vec![1], vec![vec![true, true]]).is_err());
    }

    #[test]
    fn disjunctive_transform() {
        let inst = cnf_to_cspneg(&[vec![1, 2], vec![2, 3]], 3).unwrap();
        let psi = to_disjunctive(&inst);
        assert_eq!(
            psi.relations(),
            &[rel(&[0, 1], &[&[0, 0]]), rel(&[1, 2], &[&[0, 0]])]
        );

        let merged = to_disjunctive(&cnf_to_cspneg(&[vec![1, 2], vec![-1, 2]], 2).unwrap());
        assert_eq!(merged.relations(), &[rel(&[0, 1], &[&[0, 0], &[1, 0]])]);

        let taut = to_disjunctive(&cnf_to_cspneg(&[vec![1, -1]], 1).unwrap());
        assert!(taut.relations()[0].is_empty());

        // Subset scopes stay distinct hyperedges.
        let nested = to_disjunctive(&cnf_to_cspneg(&[vec![1, 2], vec![1]], 2).unwrap());
        assert_eq!(nested.hypergraph().num_edges(), 2);
    }

    #[test]
    fn s_relation_examples() {
        let r = rel(&[0, 1], &[&[0, 0]]);
        let x = [0, 1, 2];
        assert_eq!(s_relation(&r, &x, &pa(&[])).unwrap(), BigUint::from(2u8));
        assert_eq!(
            s_relation(&r, &x, &pa(&[(2, true)])).unwrap(),
            BigUint::from(1u8)
        );
        assert_eq!(
            s_relation(&r, &x, &pa(&[(0, true)])).unwrap(),
            BigUint::zero()
        );
        assert!(s_relation(&r, &[0], &pa(&[])).is_err());
    }

    #[test]
    fn combine_examples() {
        let one = BigUint::one();
        let parts = [(vec![0], one.clone()), (vec![1], one.clone())];
        assert_eq!(
            combine_disjoint(&parts, &[0, 1], &pa(&[])).unwrap(),
            BigUint::from(3u8)
        );
        assert_eq!(
            combine_disjoint(&parts[..1], &[0, 1], &pa(&[])).unwrap(),
            BigUint::from(2u8)
        );
        let zeros = [(vec![0], BigUint::zero()), (vec![1], BigUint::zero())];
        assert_eq!(
            combine_disjoint(&zeros, &[0, 1, 2], &pa(&[])).unwrap(),
            BigUint::zero()
        );
        let overlap = [(vec![0, 1], one.clone()), (vec![1], one)];
        assert_eq!(
            combine_disjoint(&overlap, &[0, 1], &pa(&[])),
            Err(CountError::Overlap)
        );
    }

    #[test]
    fn count_disjunctive_examples() {
        let inst = cnf_to_cspneg(&[vec![1, 2], vec![2, 3]], 3).unwrap();
        let psi = to_disjunctive(&inst);
        let d = compute_db(psi.hypergraph(), EdgeId(0)).unwrap();
        assert_eq!(count_disjunctive(&psi, &d).unwrap(), BigUint::from(3u8));

        let empty = DisjunctiveInstance::new(vec![rel(&[0, 1], &[]), rel(&[1, 2], &[])]).unwrap();
        let d = compute_db(empty.hypergraph(), EdgeId(1)).unwrap();
        assert_eq!(count_disjunctive(&empty, &d).unwrap(), BigUint::zero());

        let single =
            DisjunctiveInstance::new(vec![rel(&[0, 1, 2], &[&[0, 1, 0], &[1, 1, 1]])]).unwrap();
        let d = Decomposition::leaf(EdgeId(0));
        assert_eq!(count_disjunctive(&single, &d).unwrap(), BigUint::from(2u8));
    }

    #[test]
    fn count_disjunctive_matches_enumeration_on_a_star() {
        // Root {0,1,2} with branches {0,3}, {1,4} and {2,5,6}, {6}.
        let psi = DisjunctiveInstance::new(vec![
            rel(&[0, 1, 2], &[&[0, 0, 0], &[1, 0, 1], &[1, 1, 0]]),
            rel(&[0, 3], &[&[1, 1], &[0, 0]]),
            rel(&[1, 4], &[&[1, 0]]),
            rel(&[2, 5, 6], &[&[1, 1, 0], &[0, 1, 1]]),
            rel(&[6], &[&[1]]),
        ])
        .unwrap();
        let want = BigUint::from(enumerate_disjunctive(&psi));
        for e in psi.hypergraph().edge_ids() {
            let d = compute_db(psi.hypergraph(), e).unwrap();
            assert_eq!(count_disjunctive(&psi, &d).unwrap(), want, "root {e}");
        }
    }

    #[test]
    fn invalid_decomposition_is_rejected() {
        let psi = DisjunctiveInstance::new(vec![
            rel(&[0, 1], &[]),
            rel(&[1, 2], &[]),
            rel(&[2, 3], &[]),
        ])
        .unwrap();
        let bad = Decomposition::from_parents(
            EdgeId(0),
            [
                (EdgeId(0), None),
                (EdgeId(2), Some(EdgeId(0))),
                (EdgeId(1), Some(EdgeId(2))),
            ],
        )
        .unwrap();
        assert_eq!(
            count_disjunctive(&psi, &bad),
            Err(CountError::InvalidDecomposition)
        );
    }

    #[test]
    fn count_models_examples() {
        let empty = CspNegInstance::new(3, vec![]).unwrap();
        assert_eq!(count_models(&empty).unwrap(), BigUint::from(8u8));

        let inst = cnf_to_cspneg(&[vec![1, 2], vec![2, 3]], 3).unwrap();
        assert_eq!(count_models(&inst).unwrap(), BigUint::from(5u8));
        assert_eq!(brute_force_count(&inst).unwrap(), BigUint::from(5u8));

        let unsat = cnf_to_cspneg(&[vec![1], vec![]], 2).unwrap();
        assert_eq!(count_models(&unsat).unwrap(), BigUint::zero());

        // Two components and a free variable.
        let split = cnf_to_cspneg(&[vec![1, 2], vec![-4]], 5).unwrap();
        assert_eq!(
            count_models(&split).unwrap(),
            brute_force_count(&split).unwrap()
        );

        let triangle = cnf_to_cspneg(&[vec![1, 2], vec![2, 3], vec![1, 3]], 3).unwrap();
        assert!(matches!(
            count_models(&triangle),
            Err(CountError::NotDecomposable { component: 0, .. })
        ));
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(
            brute_force_count(&CspNegInstance::new(2, vec![]).unwrap()).unwrap(),
            4u8.into()
        );
        let one = CspNegInstance::new(2, vec![rel(&[0, 1], &[&[1, 0]])]).unwrap();
        assert_eq!(brute_force_count(&one).unwrap(), 3u8.into());
        let big = CspNegInstance::new(25, vec![]).unwrap();
        assert!(matches!(
            brute_force_count(&big),
            Err(CountError::TooLarge { .. })
        ));
    }

    #[test]
    fn supplied_decomposition_is_matched_by_scope() {
        let inst = cnf_to_cspneg(&[vec![1, 2], vec![2, 3], vec![3, -4]], 5).unwrap();
        // Same scopes, listed in a different order.
        let dh = Hypergraph::new([vec![2, 3], vec![1, 2], vec![0, 1]]).unwrap();
        let d = compute_db(&dh, EdgeId(0)).unwrap();
        assert_eq!(
            count_models_using(&inst, &dh, &d).unwrap(),
            brute_force_count(&inst).unwrap()
        );

        let other = Hypergraph::new([vec![0, 2]]).unwrap();
        assert!(matches!(
            count_models_using(&inst, &other, &Decomposition::leaf(EdgeId(0))),
            Err(CountError::ScopeMismatch(_))
        ));
    }
}
