//! Finite preorders whose nodes carry an exact limit-model count (IL).
//!
//! A [`LabeledPreorder`] stores the reflexive-transitive closure of its
//! generating pairs as one up-set bitset per node, so `leq` queries are
//! constant time and products/quotients work on whole rows at once.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use fixedbitset::FixedBitSet;
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use thiserror::Error;

/// Separator used when product node identifiers are joined.
pub const PRODUCT_SEPARATOR: char = '|';
const ESCAPE: char = '\\';

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PosetError {
    #[error("a preorder needs at least one node")]
    Empty,
    #[error("duplicate node identifier `{0}`")]
    DuplicateNode(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("no IL value for node `{0}`")]
    MissingIl(String),
    #[error("IL value for node `{0}` given more than once")]
    DuplicateIl(String),
    #[error("IL value {value} for node `{node}` is negative")]
    NegativeIl { node: String, value: BigInt },
    #[error("relation is not antisymmetric: `{0}` and `{1}` dominate each other")]
    NotAntisymmetric(String, String),
    #[error("canonical structure has no least element")]
    NoLeastElement,
    #[error("least element `{0}` of a canonical structure has non-zero IL")]
    NonZeroBottom(String),
}

/// A finite preorder with an IL count on every node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledPreorder {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    /// `up[i]` holds every `j` with `i <= j`.
    up: Vec<FixedBitSet>,
    il: Vec<BigUint>,
    canonical: bool,
}

impl LabeledPreorder {
    /// Builds the reflexive-transitive closure of `pairs` over `nodes`.
    ///
    /// Every node needs exactly one IL entry; negative entries are rejected.
    pub fn new<N, P, L>(nodes: N, pairs: P, il: L) -> Result<Self, PosetError>
    where
        N: IntoIterator,
        N::Item: Into<String>,
        P: IntoIterator<Item = (String, String)>,
        L: IntoIterator<Item = (String, BigInt)>,
    {
        let ids: Vec<String> = nodes.into_iter().map(Into::into).collect();
        let index = index_ids(&ids)?;

        let mut values: Vec<Option<BigUint>> = vec![None; ids.len()];
        for (node, value) in il {
            let i = *index.get(&node).ok_or_else(|| PosetError::UnknownNode(node.clone()))?;
            if value.is_negative() {
                return Err(PosetError::NegativeIl { node, value });
            }
            if values[i].is_some() {
                return Err(PosetError::DuplicateIl(node));
            }
            values[i] = value.to_biguint();
        }
        let il = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| PosetError::MissingIl(ids[i].clone())))
            .collect::<Result<Vec<_>, _>>()?;

        let mut generators = Vec::new();
        for (x, y) in pairs {
            let xi = *index.get(&x).ok_or(PosetError::UnknownNode(x))?;
            let yi = *index.get(&y).ok_or(PosetError::UnknownNode(y))?;
            generators.push((xi, yi));
        }
        let up = closure(ids.len(), &generators);
        Ok(LabeledPreorder { ids, index, up, il, canonical: false })
    }

    /// Index-based constructor for callers that already hold validated data.
    pub(crate) fn from_generators(
        ids: Vec<String>,
        generators: &[(usize, usize)],
        il: Vec<BigUint>,
    ) -> Result<Self, PosetError> {
        let index = index_ids(&ids)?;
        debug_assert_eq!(ids.len(), il.len());
        let up = closure(ids.len(), generators);
        Ok(LabeledPreorder { ids, index, up, il, canonical: false })
    }

    /// Flags the structure as canonical after checking the extra invariants:
    /// antisymmetry and a unique least element with IL 0.
    pub(crate) fn into_canonical(mut self) -> Result<Self, PosetError> {
        self.check_antisymmetric()?;
        let bottom = self.least().ok_or(PosetError::NoLeastElement)?;
        if !self.il[bottom].is_zero() {
            return Err(PosetError::NonZeroBottom(self.ids[bottom].clone()));
        }
        self.canonical = true;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    /// Always false for a constructed value; present for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn il(&self, i: usize) -> &BigUint {
        &self.il[i]
    }

    pub fn il_values(&self) -> &[BigUint] {
        &self.il
    }

    pub fn il_of(&self, id: &str) -> Option<&BigUint> {
        self.index_of(id).map(|i| &self.il[i])
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.up[i].contains(j)
    }

    pub fn leq_ids(&self, x: &str, y: &str) -> Option<bool> {
        Some(self.leq(self.index_of(x)?, self.index_of(y)?))
    }

    /// Indices `j` with `i <= j`, including `i` itself.
    pub fn up_set(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.up[i].ones()
    }

    /// Number of nodes strictly below `i` (the in-degree of the strict relation).
    pub fn below_count(&self, i: usize) -> usize {
        (0..self.len()).filter(|&j| j != i && self.leq(j, i)).count()
    }

    /// Number of nodes strictly above `i` (the out-degree of the strict relation).
    pub fn above_count(&self, i: usize) -> usize {
        self.up[i].count_ones(..) - 1
    }

    /// Every related pair `x <= y` with `x != y`, as identifiers, in node order.
    pub fn relation_pairs(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for i in 0..self.len() {
            for j in self.up[i].ones().filter(|&j| j != i) {
                out.push((self.ids[i].clone(), self.ids[j].clone()));
            }
        }
        out
    }

    pub fn is_antisymmetric(&self) -> bool {
        self.check_antisymmetric().is_ok()
    }

    fn check_antisymmetric(&self) -> Result<(), PosetError> {
        for i in 0..self.len() {
            for j in self.up[i].ones() {
                if j > i && self.leq(j, i) {
                    return Err(PosetError::NotAntisymmetric(self.ids[i].clone(), self.ids[j].clone()));
                }
            }
        }
        Ok(())
    }

    /// The unique node below every other node, if there is one.
    pub fn least(&self) -> Option<usize> {
        let n = self.len();
        let mut found = None;
        for i in 0..n {
            if self.up[i].count_ones(..) == n {
                if found.is_some() {
                    return None;
                }
                found = Some(i);
            }
        }
        found
    }

    /// The unique node above every other node, if there is one.
    pub fn greatest(&self) -> Option<usize> {
        let n = self.len();
        let mut found = None;
        for i in 0..n {
            if (0..n).all(|j| self.leq(j, i)) {
                if found.is_some() {
                    return None;
                }
                found = Some(i);
            }
        }
        found
    }

    pub fn il_total(&self) -> BigUint {
        self.il.iter().sum()
    }

    /// Collapses every mutual-domination class to a single node.
    ///
    /// A class keeps the smallest identifier among its members and the sum of
    /// their IL values. Classes appear in order of their first member.
    pub fn quotient_rk(&self) -> LabeledPreorder {
        let n = self.len();
        let mut class_of = vec![usize::MAX; n];
        let mut members: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            if class_of[i] != usize::MAX {
                continue;
            }
            let c = members.len();
            let class: Vec<usize> = self.up[i].ones().filter(|&j| self.leq(j, i)).collect();
            for &j in &class {
                class_of[j] = c;
            }
            members.push(class);
        }

        let ids: Vec<String> = members
            .iter()
            .map(|m| m.iter().map(|&j| &self.ids[j]).min().cloned().unwrap_or_default())
            .collect();
        let il: Vec<BigUint> = members.iter().map(|m| m.iter().map(|&j| &self.il[j]).sum()).collect();

        let classes = members.len();
        let mut up = vec![FixedBitSet::with_capacity(classes); classes];
        for (c, m) in members.iter().enumerate() {
            for j in self.up[m[0]].ones() {
                up[c].insert(class_of[j]);
            }
        }
        let index = ids.iter().cloned().enumerate().map(|(i, id)| (id, i)).collect();
        LabeledPreorder { ids, index, up, il, canonical: self.canonical }
    }

    /// Covering pairs `(x, y)`: `x < y` with nothing strictly between.
    /// Sorted lexicographically by identifier.
    pub fn hasse_edges(&self) -> Result<Vec<(String, String)>, PosetError> {
        let mut edges: Vec<(String, String)> = self
            .cover_indices()?
            .into_iter()
            .map(|(i, j)| (self.ids[i].clone(), self.ids[j].clone()))
            .collect();
        edges.sort();
        Ok(edges)
    }

    /// Covering pairs by node index, grouped by lower node in node order.
    pub fn cover_indices(&self) -> Result<Vec<(usize, usize)>, PosetError> {
        self.check_antisymmetric()?;
        let n = self.len();
        let mut out = Vec::new();
        for i in 0..n {
            let mut strict = self.up[i].clone();
            strict.set(i, false);
            let mut covers = strict.clone();
            for z in strict.ones() {
                let mut above_z = self.up[z].clone();
                above_z.set(z, false);
                covers.difference_with(&above_z);
            }
            out.extend(covers.ones().map(|j| (i, j)));
        }
        Ok(out)
    }

    /// Length of the longest chain ending at each node (minimal nodes have 0).
    pub fn heights(&self) -> Result<Vec<usize>, PosetError> {
        let covers = self.cover_indices()?;
        let n = self.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| self.below_count(i));
        let mut height = vec![0usize; n];
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, j) in covers {
            succ[i].push(j);
        }
        for i in order {
            for &j in &succ[i] {
                height[j] = height[j].max(height[i] + 1);
            }
        }
        Ok(height)
    }
}

fn index_ids(ids: &[String]) -> Result<HashMap<String, usize>, PosetError> {
    if ids.is_empty() {
        return Err(PosetError::Empty);
    }
    let mut index = HashMap::with_capacity(ids.len());
    for (i, id) in ids.iter().enumerate() {
        if index.insert(id.clone(), i).is_some() {
            return Err(PosetError::DuplicateNode(id.clone()));
        }
    }
    Ok(index)
}

/// Up-sets of the reflexive-transitive closure of `generators`.
fn closure(n: usize, generators: &[(usize, usize)]) -> Vec<FixedBitSet> {
    let mut graph: DiGraph<(), ()> = DiGraph::with_capacity(n, generators.len());
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for &(x, y) in generators {
        graph.add_edge(nodes[x], nodes[y], ());
    }

    // Tarjan emits components sinks-first, so successors are always finished.
    let mut up = vec![FixedBitSet::with_capacity(n); n];
    for component in tarjan_scc(&graph) {
        let mut reach = FixedBitSet::with_capacity(n);
        for v in &component {
            reach.insert(v.index());
        }
        for v in &component {
            for w in graph.neighbors(*v) {
                if !reach.contains(w.index()) {
                    reach.union_with(&up[w.index()]);
                }
            }
        }
        for v in &component {
            up[v.index()] = reach.clone();
        }
    }
    up
}

fn escape_id(id: &str) -> String {
    let mut out = String::with_capacity(id.len());
    for c in id.chars() {
        if c == ESCAPE || c == PRODUCT_SEPARATOR {
            out.push(ESCAPE);
        }
        out.push(c);
    }
    out
}

/// Joins two identifiers with [`PRODUCT_SEPARATOR`], escaping both sides.
pub fn product_id(x: &str, y: &str) -> String {
    format!("{}{}{}", escape_id(x), PRODUCT_SEPARATOR, escape_id(y))
}

/// Componentwise (Pareto) order on `p × q` with IL `(a+1)(b+1) - 1`.
///
/// Node `(x, y)` sits at index `x * |q| + y`.
pub fn pareto_product(p: &LabeledPreorder, q: &LabeledPreorder) -> LabeledPreorder {
    let (np, nq) = (p.len(), q.len());
    let n = np * nq;
    let mut ids = Vec::with_capacity(n);
    let mut il = Vec::with_capacity(n);
    let mut up = Vec::with_capacity(n);
    for x in 0..np {
        for y in 0..nq {
            ids.push(product_id(&p.ids[x], &q.ids[y]));
            il.push((&p.il[x] + 1u32) * (&q.il[y] + 1u32) - BigUint::one());
            let mut row = FixedBitSet::with_capacity(n);
            for x2 in p.up[x].ones() {
                for y2 in q.up[y].ones() {
                    row.insert(x2 * nq + y2);
                }
            }
            up.push(row);
        }
    }
    let index = ids.iter().cloned().enumerate().map(|(i, id)| (id, i)).collect();
    LabeledPreorder { ids, index, up, il, canonical: false }
}

/// An IL-preserving order isomorphism, keyed by source identifier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsoWitness {
    pub mapping: BTreeMap<String, String>,
}

impl IsoWitness {
    /// Re-checks the witness from scratch: bijectivity, `leq` in both
    /// directions for every pair, and pointwise IL equality.
    pub fn verify(&self, p: &LabeledPreorder, q: &LabeledPreorder) -> bool {
        if p.len() != q.len() || self.mapping.len() != p.len() {
            return false;
        }
        let mut image = Vec::with_capacity(p.len());
        let mut hit = vec![false; q.len()];
        for i in 0..p.len() {
            let Some(target) = self.mapping.get(&p.ids[i]) else { return false };
            let Some(j) = q.index_of(target) else { return false };
            if hit[j] || p.il[i] != q.il[j] {
                return false;
            }
            hit[j] = true;
            image.push(j);
        }
        (0..p.len()).all(|a| (0..p.len()).all(|b| p.leq(a, b) == q.leq(image[a], image[b])))
    }
}

type NodeSignature<'a> = (&'a BigUint, usize, usize);

fn signatures(p: &LabeledPreorder) -> Vec<NodeSignature<'_>> {
    (0..p.len()).map(|i| (&p.il[i], p.below_count(i), p.above_count(i))).collect()
}

/// Searches for an IL-preserving order isomorphism from `p` onto `q`.
///
/// Backtracking over source nodes in a linear-extension order; candidate
/// targets are tried by (il, in-degree, out-degree, identifier) so the first
/// witness found is deterministic.
pub fn are_isomorphic(p: &LabeledPreorder, q: &LabeledPreorder) -> Option<IsoWitness> {
    if p.len() != q.len() {
        return None;
    }
    let sig_p = signatures(p);
    let sig_q = signatures(q);
    let mut sorted_p = sig_p.clone();
    let mut sorted_q = sig_q.clone();
    sorted_p.sort();
    sorted_q.sort();
    if sorted_p != sorted_q {
        return None;
    }

    let mut sources: Vec<usize> = (0..p.len()).collect();
    sources.sort_by(|&a, &b| sig_p[a].1.cmp(&sig_p[b].1).then_with(|| p.ids[a].cmp(&p.ids[b])));
    let mut targets: Vec<usize> = (0..q.len()).collect();
    targets.sort_by(|&a, &b| sig_q[a].cmp(&sig_q[b]).then_with(|| q.ids[a].cmp(&q.ids[b])));

    let mut search = Search {
        p,
        q,
        sig_p: &sig_p,
        sig_q: &sig_q,
        sources: &sources,
        targets: &targets,
        image: vec![usize::MAX; p.len()],
        used: vec![false; q.len()],
    };
    if !search.extend(0) {
        return None;
    }
    let mapping = (0..p.len()).map(|i| (p.ids[i].clone(), q.ids[search.image[i]].clone())).collect();
    Some(IsoWitness { mapping })
}

struct Search<'a> {
    p: &'a LabeledPreorder,
    q: &'a LabeledPreorder,
    sig_p: &'a [NodeSignature<'a>],
    sig_q: &'a [NodeSignature<'a>],
    sources: &'a [usize],
    targets: &'a [usize],
    image: Vec<usize>,
    used: Vec<bool>,
}

impl Search<'_> {
    fn extend(&mut self, depth: usize) -> bool {
        let Some(&x) = self.sources.get(depth) else { return true };
        for &y in self.targets {
            if self.used[y] || self.sig_p[x].cmp(&self.sig_q[y]) != Ordering::Equal {
                continue;
            }
            if !self.consistent(depth, x, y) {
                continue;
            }
            self.image[x] = y;
            self.used[y] = true;
            if self.extend(depth + 1) {
                return true;
            }
            self.used[y] = false;
            self.image[x] = usize::MAX;
        }
        false
    }

    fn consistent(&self, depth: usize, x: usize, y: usize) -> bool {
        self.sources[..depth].iter().all(|&u| {
            let v = self.image[u];
            self.p.leq(u, x) == self.q.leq(v, y) && self.p.leq(x, u) == self.q.leq(y, v)
        })
    }
}
