//! Brute-force enumeration of model descriptors.
//!
//! Each countable model of a signature `(k, s)` is described by one
//! realization pattern per component. Enumerating all of them and
//! classifying each as prime or limit gives counts that are computed
//! without any of the closed forms in [`crate::catalog`].

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use thiserror::Error;

use crate::catalog::{coords, CatalogError, NodeCoord, TheorySignature};

pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1_000_000;

/// Descriptors handed to one worker at a time during [`tally`].
const CHUNK: u64 = 1 << 14;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("signature {signature} has {required} models, over the enumeration budget of {budget}")]
    BudgetExceeded { signature: TheorySignature, required: BigUint, budget: u64 },
    #[error("oracle disagrees with closed forms at {} node(s), first at {}", .0.len(), .0[0])]
    Mismatch(Vec<Discrepancy>),
}

/// Realizations of the single type of a three-model component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum T1Pattern {
    Absent,
    LeastRealization,
    OpenInterval,
}

impl T1Pattern {
    pub const ALL: [T1Pattern; 3] = [T1Pattern::Absent, T1Pattern::LeastRealization, T1Pattern::OpenInterval];

    fn digit(self) -> usize {
        self as usize
    }
}

/// Realizations of the single type of a six-model component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum T2Pattern {
    Absent,
    Singleton,
    ClosedClosed,
    OpenClosed,
    ClosedOpen,
    OpenOpen,
}

impl T2Pattern {
    pub const ALL: [T2Pattern; 6] = [
        T2Pattern::Absent,
        T2Pattern::Singleton,
        T2Pattern::ClosedClosed,
        T2Pattern::OpenClosed,
        T2Pattern::ClosedOpen,
        T2Pattern::OpenOpen,
    ];

    fn digit(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Prime,
    Limit,
}

/// One countable model, as a pattern per component.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModelDescriptor {
    pub t1_patterns: Vec<T1Pattern>,
    pub t2_patterns: Vec<T2Pattern>,
}

impl ModelDescriptor {
    pub fn signature(&self) -> TheorySignature {
        TheorySignature::new(self.t1_patterns.len() as u32, self.t2_patterns.len() as u32)
    }

    /// Splits into the restriction to the first `k1` three-model and first
    /// `s1` six-model components, and the restriction to the rest.
    pub fn split(&self, k1: usize, s1: usize) -> (ModelDescriptor, ModelDescriptor) {
        let (a1, a2) = self.t1_patterns.split_at(k1);
        let (b1, b2) = self.t2_patterns.split_at(s1);
        (
            ModelDescriptor { t1_patterns: a1.to_vec(), t2_patterns: b1.to_vec() },
            ModelDescriptor { t1_patterns: a2.to_vec(), t2_patterns: b2.to_vec() },
        )
    }

    /// Advances to the next descriptor in mixed-radix order; false on wrap.
    fn advance(&mut self) -> bool {
        for p in self.t2_patterns.iter_mut().rev() {
            let d = p.digit();
            if d + 1 < T2Pattern::ALL.len() {
                *p = T2Pattern::ALL[d + 1];
                return true;
            }
            *p = T2Pattern::Absent;
        }
        for p in self.t1_patterns.iter_mut().rev() {
            let d = p.digit();
            if d + 1 < T1Pattern::ALL.len() {
                *p = T1Pattern::ALL[d + 1];
                return true;
            }
            *p = T1Pattern::Absent;
        }
        false
    }
}

/// The `index`-th descriptor of `sig` in mixed-radix order.
pub fn descriptor_at(sig: TheorySignature, mut index: u64) -> ModelDescriptor {
    let mut t2 = vec![T2Pattern::Absent; sig.s as usize];
    for p in t2.iter_mut().rev() {
        *p = T2Pattern::ALL[(index % 6) as usize];
        index /= 6;
    }
    let mut t1 = vec![T1Pattern::Absent; sig.k as usize];
    for p in t1.iter_mut().rev() {
        *p = T1Pattern::ALL[(index % 3) as usize];
        index /= 3;
    }
    ModelDescriptor { t1_patterns: t1, t2_patterns: t2 }
}

fn check_budget(sig: TheorySignature, budget: u64) -> Result<u64, OracleError> {
    let required = sig.model_count();
    match required.to_u64() {
        Some(n) if n <= budget => Ok(n),
        _ => Err(OracleError::BudgetExceeded { signature: sig, required, budget }),
    }
}

/// Every descriptor of `sig` exactly once, `t1` digits (base 3) before
/// `t2` digits (base 6), last digit fastest.
pub fn enumerate_models(sig: TheorySignature, budget: u64) -> Result<ModelIter, OracleError> {
    check_budget(sig, budget)?;
    Ok(ModelIter { next: Some(descriptor_at(sig, 0)) })
}

pub struct ModelIter {
    next: Option<ModelDescriptor>,
}

impl Iterator for ModelIter {
    type Item = ModelDescriptor;

    fn next(&mut self) -> Option<ModelDescriptor> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        if succ.advance() {
            self.next = Some(succ);
        }
        Some(current)
    }
}

/// A model is limit iff some component realizes its type without the
/// endpoint(s) an almost prime model would have.
pub fn classify(d: &ModelDescriptor) -> ModelKind {
    let prime = d.t1_patterns.iter().all(|p| matches!(p, T1Pattern::Absent | T1Pattern::LeastRealization))
        && d.t2_patterns
            .iter()
            .all(|p| matches!(p, T2Pattern::Absent | T2Pattern::Singleton | T2Pattern::ClosedClosed));
    if prime {
        ModelKind::Prime
    } else {
        ModelKind::Limit
    }
}

fn t1_level(p: T1Pattern) -> u8 {
    match p {
        T1Pattern::Absent => 0,
        T1Pattern::LeastRealization | T1Pattern::OpenInterval => 1,
    }
}

fn t2_level(p: T2Pattern) -> u8 {
    match p {
        T2Pattern::Absent => 0,
        T2Pattern::Singleton => 1,
        _ => 2,
    }
}

/// The lattice vertex whose type the model realizes.
pub fn node_of(d: &ModelDescriptor) -> NodeCoord {
    NodeCoord::from_digits_unchecked(
        d.t1_patterns.iter().map(|&p| t1_level(p)).collect(),
        d.t2_patterns.iter().map(|&p| t2_level(p)).collect(),
    )
}

fn node_index(d: &ModelDescriptor) -> usize {
    let mut idx = 0usize;
    for &p in &d.t1_patterns {
        idx = idx * 2 + t1_level(p) as usize;
    }
    for &p in &d.t2_patterns {
        idx = idx * 3 + t2_level(p) as usize;
    }
    idx
}

/// Exact model counts with a per-node limit-model table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountReport {
    pub signature: TheorySignature,
    pub total: BigUint,
    pub prime_count: BigUint,
    pub limit_count: BigUint,
    pub per_node: BTreeMap<NodeCoord, BigUint>,
}

impl CountReport {
    /// Counts read off the canonical lattice: one prime model per node and
    /// `2^t·4^m − 1` limit models over it.
    pub fn closed_form(sig: TheorySignature) -> CountReport {
        let per_node: BTreeMap<NodeCoord, BigUint> = coords(sig)
            .map(|c| {
                let il = c.il();
                (c, il)
            })
            .collect();
        let prime_count = BigUint::from(per_node.len());
        let limit_count: BigUint = per_node.values().sum();
        CountReport { signature: sig, total: &prime_count + &limit_count, prime_count, limit_count, per_node }
    }

    pub fn check_consistent(&self) -> Result<(), CatalogError> {
        let fail = |msg: String| Err(CatalogError::InconsistentReport(msg));
        if self.total != &self.prime_count + &self.limit_count {
            return fail(format!(
                "total {} != prime {} + limit {}",
                self.total, self.prime_count, self.limit_count
            ));
        }
        let per_node_sum: BigUint = self.per_node.values().sum();
        if per_node_sum != self.limit_count {
            return fail(format!("per-node limits sum to {per_node_sum}, not {}", self.limit_count));
        }
        if BigUint::from(self.per_node.len()) != self.prime_count {
            return fail(format!("{} nodes but {} prime models", self.per_node.len(), self.prime_count));
        }
        if let Some(c) = self.per_node.keys().find(|c| c.signature() != self.signature) {
            return fail(format!("node {c} does not belong to signature {}", self.signature));
        }
        Ok(())
    }
}

/// A node where enumeration and closed form disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Discrepancy {
    pub node: NodeCoord,
    pub enumerated: BigUint,
    pub expected: BigUint,
}

impl fmt::Display for Discrepancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (enumerated {}, expected {})", self.node, self.enumerated, self.expected)
    }
}

#[derive(Clone)]
struct Tally {
    prime: u64,
    limit: u64,
    prime_per_node: Vec<u64>,
    limit_per_node: Vec<u64>,
}

impl Tally {
    fn new(nodes: usize) -> Self {
        Tally { prime: 0, limit: 0, prime_per_node: vec![0; nodes], limit_per_node: vec![0; nodes] }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.prime += other.prime;
        self.limit += other.limit;
        for (x, y) in self.prime_per_node.iter_mut().zip(other.prime_per_node) {
            *x += y;
        }
        for (x, y) in self.limit_per_node.iter_mut().zip(other.limit_per_node) {
            *x += y;
        }
        self
    }
}

fn tally_range(sig: TheorySignature, nodes: usize, start: u64, len: u64) -> Tally {
    let mut tally = Tally::new(nodes);
    let mut d = descriptor_at(sig, start);
    for _ in 0..len {
        let node = node_index(&d);
        match classify(&d) {
            ModelKind::Prime => {
                tally.prime += 1;
                tally.prime_per_node[node] += 1;
            }
            ModelKind::Limit => {
                tally.limit += 1;
                tally.limit_per_node[node] += 1;
            }
        }
        d.advance();
    }
    tally
}

/// Enumerates and classifies every descriptor, without comparing against
/// closed forms. Index ranges are tallied in parallel and merged by
/// addition, so the result does not depend on the partitioning.
pub fn tally(sig: TheorySignature, budget: u64) -> Result<(CountReport, Vec<u64>), OracleError> {
    let total = check_budget(sig, budget)?;
    let nodes: Vec<NodeCoord> = coords(sig).collect();
    let chunks = total.div_ceil(CHUNK);
    let merged = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            tally_range(sig, nodes.len(), start, CHUNK.min(total - start))
        })
        .reduce(|| Tally::new(nodes.len()), Tally::merge);

    let per_node =
        nodes.into_iter().zip(&merged.limit_per_node).map(|(c, &n)| (c, BigUint::from(n))).collect();
    let report = CountReport {
        signature: sig,
        total: BigUint::from(total),
        prime_count: BigUint::from(merged.prime),
        limit_count: BigUint::from(merged.limit),
        per_node,
    };
    Ok((report, merged.prime_per_node))
}

/// Nodes where the enumerated tallies differ from the closed forms,
/// including any node without exactly one prime model over it.
pub fn discrepancies(report: &CountReport, prime_per_node: &[u64]) -> Vec<Discrepancy> {
    let mut out = Vec::new();
    for (i, (node, enumerated)) in report.per_node.iter().enumerate() {
        let expected = node.il();
        if *enumerated != expected {
            out.push(Discrepancy { node: node.clone(), enumerated: enumerated.clone(), expected });
        } else if prime_per_node.get(i) != Some(&1) {
            out.push(Discrepancy {
                node: node.clone(),
                enumerated: BigUint::from(prime_per_node.get(i).copied().unwrap_or(0)),
                expected: BigUint::from(1u32),
            });
        }
    }
    if out.is_empty() {
        let sig = report.signature;
        let closed_limit = sig.model_count() - sig.node_count();
        if report.prime_count != sig.node_count() || report.limit_count != closed_limit {
            out.push(Discrepancy {
                node: NodeCoord::zero(sig),
                enumerated: report.limit_count.clone(),
                expected: closed_limit,
            });
        }
    }
    out
}

/// Full enumeration, checked node by node against the closed forms.
pub fn oracle_counts(sig: TheorySignature, budget: u64) -> Result<CountReport, OracleError> {
    let (report, primes) = tally(sig, budget)?;
    let found = discrepancies(&report, &primes);
    if !found.is_empty() {
        return Err(OracleError::Mismatch(found));
    }
    Ok(report)
}
