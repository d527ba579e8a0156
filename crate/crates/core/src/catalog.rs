//! Canonical lattices `Q_k × L_{s,3}` for theories built from `k` copies of
//! the three-model atom and `s` copies of the six-model atom, together with
//! the closed-form limit-model counts attached to them.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Pow, Zero};
use thiserror::Error;

use crate::oracle::CountReport;
use crate::poset::{are_isomorphic, LabeledPreorder};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("a model count must be positive")]
    ZeroCount,
    #[error("count report is inconsistent: {0}")]
    InconsistentReport(String),
    #[error("coordinate digit {digit} out of range for radix {radix}")]
    DigitOutOfRange { digit: u8, radix: u8 },
    #[error("malformed node coordinate `{0}`")]
    MalformedCoord(String),
}

/// Number of three-model components `k` and six-model components `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TheorySignature {
    pub k: u32,
    pub s: u32,
}

impl TheorySignature {
    pub const fn new(k: u32, s: u32) -> Self {
        TheorySignature { k, s }
    }

    /// `2^k · 3^s`, the number of almost prime models (lattice nodes).
    pub fn node_count(&self) -> BigUint {
        pow(2, self.k) * pow(3, self.s)
    }

    /// `3^k · 6^s`, the number of countable models.
    pub fn model_count(&self) -> BigUint {
        pow(3, self.k) * pow(6, self.s)
    }

    /// Disjoint union of theories adds signatures.
    pub fn join(&self, other: &TheorySignature) -> TheorySignature {
        TheorySignature::new(self.k + other.k, self.s + other.s)
    }
}

impl fmt::Display for TheorySignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.k, self.s)
    }
}

fn pow(base: u32, exp: u32) -> BigUint {
    Pow::pow(BigUint::from(base), exp)
}

/// One vertex of `Q_k × L_{s,3}`: `a` has digits in {0,1}, `b` in {0,1,2}.
///
/// For the six-model axes, 0 means the type is omitted, 1 means a unique
/// realization and 2 means infinitely many realizations with both endpoints.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeCoord {
    a: Vec<u8>,
    b: Vec<u8>,
}

impl NodeCoord {
    pub fn new(a: Vec<u8>, b: Vec<u8>) -> Result<Self, CatalogError> {
        if let Some(&digit) = a.iter().find(|&&d| d > 1) {
            return Err(CatalogError::DigitOutOfRange { digit, radix: 2 });
        }
        if let Some(&digit) = b.iter().find(|&&d| d > 2) {
            return Err(CatalogError::DigitOutOfRange { digit, radix: 3 });
        }
        Ok(NodeCoord { a, b })
    }

    pub(crate) fn from_digits_unchecked(a: Vec<u8>, b: Vec<u8>) -> Self {
        NodeCoord { a, b }
    }

    pub fn zero(sig: TheorySignature) -> Self {
        NodeCoord { a: vec![0; sig.k as usize], b: vec![0; sig.s as usize] }
    }

    pub fn a(&self) -> &[u8] {
        &self.a
    }

    pub fn b(&self) -> &[u8] {
        &self.b
    }

    pub fn signature(&self) -> TheorySignature {
        TheorySignature::new(self.a.len() as u32, self.b.len() as u32)
    }

    /// Three-model axes that are realized.
    pub fn t(&self) -> u32 {
        self.a.iter().filter(|&&d| d == 1).count() as u32
    }

    /// Six-model axes at the top level (interval realizations).
    pub fn m(&self) -> u32 {
        self.b.iter().filter(|&&d| d == 2).count() as u32
    }

    /// Six-model axes with a unique realization.
    pub fn r(&self) -> u32 {
        self.b.iter().filter(|&&d| d == 1).count() as u32
    }

    pub fn leq(&self, other: &NodeCoord) -> bool {
        self.a.len() == other.a.len()
            && self.b.len() == other.b.len()
            && self.a.iter().zip(&other.a).all(|(x, y)| x <= y)
            && self.b.iter().zip(&other.b).all(|(x, y)| x <= y)
    }

    /// Limit models over this node's type: `2^t · 4^m − 1`.
    pub fn il(&self) -> BigUint {
        il_closed_form(self.t(), self.m())
    }

    /// Canonical identifier: the `a` digits, a dot, then the `b` digits.
    pub fn id(&self) -> String {
        let mut out = String::with_capacity(self.a.len() + self.b.len() + 1);
        out.extend(self.a.iter().map(|d| char::from(b'0' + d)));
        out.push('.');
        out.extend(self.b.iter().map(|d| char::from(b'0' + d)));
        out
    }

    pub fn parse_id(id: &str) -> Result<Self, CatalogError> {
        let malformed = || CatalogError::MalformedCoord(id.to_string());
        let (a, b) = id.split_once('.').ok_or_else(malformed)?;
        let digits = |s: &str| -> Result<Vec<u8>, CatalogError> {
            s.bytes().map(|c| if c.is_ascii_digit() { Ok(c - b'0') } else { Err(malformed()) }).collect()
        };
        NodeCoord::new(digits(a)?, digits(b)?)
    }

    /// Position in the mixed-radix enumeration order of [`coords`].
    pub fn index(&self) -> usize {
        let mut idx = 0usize;
        for &d in &self.a {
            idx = idx * 2 + d as usize;
        }
        for &d in &self.b {
            idx = idx * 3 + d as usize;
        }
        idx
    }

    /// Concatenation along the coordinate convention (three-model axes first).
    pub fn concat(&self, other: &NodeCoord) -> NodeCoord {
        NodeCoord {
            a: self.a.iter().chain(&other.a).copied().collect(),
            b: self.b.iter().chain(&other.b).copied().collect(),
        }
    }
}

impl fmt::Display for NodeCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// Every coordinate of `sig` in mixed-radix lexicographic order
/// (`a` digits base 2, then `b` digits base 3, last digit fastest).
pub fn coords(sig: TheorySignature) -> Coords {
    Coords { next: Some(NodeCoord::zero(sig)) }
}

pub struct Coords {
    next: Option<NodeCoord>,
}

impl Iterator for Coords {
    type Item = NodeCoord;

    fn next(&mut self) -> Option<NodeCoord> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut carried = true;
        for d in succ.b.iter_mut().rev() {
            if *d < 2 {
                *d += 1;
                carried = false;
                break;
            }
            *d = 0;
        }
        if carried {
            for d in succ.a.iter_mut().rev() {
                if *d < 1 {
                    *d += 1;
                    carried = false;
                    break;
                }
                *d = 0;
            }
        }
        if !carried {
            self.next = Some(succ);
        }
        Some(current)
    }
}

/// Covering pairs of `Q_k × L_{s,3}` by coordinate index: raise one digit by one.
pub fn cover_pairs(sig: TheorySignature) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for c in coords(sig) {
        let from = c.index();
        let mut up = c.clone();
        for i in 0..up.a.len() {
            if up.a[i] == 0 {
                up.a[i] = 1;
                out.push((from, up.index()));
                up.a[i] = 0;
            }
        }
        for j in 0..up.b.len() {
            if up.b[j] < 2 {
                up.b[j] += 1;
                out.push((from, up.index()));
                up.b[j] -= 1;
            }
        }
    }
    out
}

/// `2^t · 4^m − 1`.
pub fn il_closed_form(t: u32, m: u32) -> BigUint {
    (BigUint::one() << (t as u64 + 2 * m as u64)) - BigUint::one()
}

/// Exact binomial coefficient by the multiplicative formula.
pub fn binomial(n: u32, k: u32) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// The labeled lattice `Q_k × L_{s,3}` with its IL distribution.
pub fn build_theory(sig: TheorySignature) -> LabeledPreorder {
    let nodes: Vec<NodeCoord> = coords(sig).collect();
    let ids = nodes.iter().map(NodeCoord::id).collect();
    let il = nodes.iter().map(NodeCoord::il).collect();
    LabeledPreorder::from_generators(ids, &cover_pairs(sig), il)
        .and_then(LabeledPreorder::into_canonical)
        .expect("canonical lattice is a valid partial order with zero bottom")
}

/// Two-element chain with IL 0 and 1.
pub fn build_t1() -> LabeledPreorder {
    build_theory(TheorySignature::new(1, 0))
}

/// Three-element chain with IL 0, 0, 3.
pub fn build_t2() -> LabeledPreorder {
    build_theory(TheorySignature::new(0, 1))
}

/// Nodes with `t` realized three-model axes and `m` interval-level
/// six-model axes, and the limit models over each of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitTerm {
    pub t: u32,
    pub m: u32,
    /// `2^{s−m} · C(k,t) · C(s,m)`.
    pub multiplicity: BigUint,
    /// `2^t · 4^m − 1`.
    pub per_type: BigUint,
    power_of_two: BigUint,
    choose_k: BigUint,
    choose_s: BigUint,
}

impl LimitTerm {
    pub fn value(&self) -> BigUint {
        &self.multiplicity * &self.per_type
    }

    /// Factors as conventionally printed: `(2^t−1)·C(k,t)` when `s = 0`,
    /// `2^{s−m}·(4^m−1)·C(s,m)` when `k = 0`, all four otherwise.
    pub fn factors(&self, sig: TheorySignature) -> Vec<BigUint> {
        if sig.s == 0 {
            vec![self.per_type.clone(), self.choose_k.clone()]
        } else if sig.k == 0 {
            vec![self.power_of_two.clone(), self.per_type.clone(), self.choose_s.clone()]
        } else {
            vec![
                self.power_of_two.clone(),
                self.per_type.clone(),
                self.choose_k.clone(),
                self.choose_s.clone(),
            ]
        }
    }
}

/// Both sides of `3^k·6^s = 2^k·3^s + ΣΣ 2^{s−m}(2^t·4^m−1)C(k,t)C(s,m)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionReport {
    pub signature: TheorySignature,
    pub total: BigUint,
    pub prime_count: BigUint,
    /// Ordered by `m`, then `t`; includes the zero term at `t = m = 0`.
    pub limit_terms: Vec<LimitTerm>,
    pub limit_total: BigUint,
    pub balanced: bool,
}

impl DecompositionReport {
    /// Terms that contribute limit models (`t + m > 0`).
    pub fn nonzero_terms(&self) -> impl Iterator<Item = &LimitTerm> {
        self.limit_terms.iter().filter(|term| !term.per_type.is_zero())
    }

    /// `total = prime + limit_total`, e.g. `27 = 8 + 19`.
    pub fn summary(&self) -> String {
        format!("{} = {} + {}", self.total, self.prime_count, self.limit_total)
    }

    /// `total = prime + term + term ...` with each term written as its
    /// product of factors, e.g. `27 = 8 + 1·3 + 3·3 + 7·1`.
    pub fn expanded(&self) -> String {
        let mut out = format!("{} = {}", self.total, self.prime_count);
        let mut any = false;
        for term in self.nonzero_terms() {
            let factors: Vec<String> = term.factors(self.signature).iter().map(ToString::to_string).collect();
            out.push_str(" + ");
            out.push_str(&factors.join("·"));
            any = true;
        }
        if !any {
            out.push_str(" + 0");
        }
        out
    }

    /// Like [`expanded`](Self::expanded) but with each term multiplied out.
    pub fn term_values(&self) -> String {
        let mut out = format!("{} = {}", self.total, self.prime_count);
        let mut any = false;
        for term in self.nonzero_terms() {
            out.push_str(&format!(" + {}", term.value()));
            any = true;
        }
        if !any {
            out.push_str(" + 0");
        }
        out
    }
}

/// Evaluates both sides of the decomposition formula exactly.
pub fn decomposition_report(sig: TheorySignature) -> DecompositionReport {
    let total = sig.model_count();
    let prime_count = sig.node_count();
    let mut limit_terms = Vec::new();
    for m in 0..=sig.s {
        let choose_s = binomial(sig.s, m);
        let power_of_two = pow(2, sig.s - m);
        for t in 0..=sig.k {
            let choose_k = binomial(sig.k, t);
            limit_terms.push(LimitTerm {
                t,
                m,
                multiplicity: &power_of_two * &choose_k * &choose_s,
                per_type: il_closed_form(t, m),
                power_of_two: power_of_two.clone(),
                choose_k,
                choose_s: choose_s.clone(),
            });
        }
    }
    let limit_total: BigUint = limit_terms.iter().map(LimitTerm::value).sum();
    let balanced = total == &prime_count + &limit_total
        && total == pow(3, sig.k) * pow(6, sig.s)
        && prime_count == pow(2, sig.k) * pow(3, sig.s);
    DecompositionReport { signature: sig, total, prime_count, limit_terms, limit_total, balanced }
}

/// `3^k·6^s − 2^k·3^s`, checked against the summed decomposition terms.
pub fn total_limit_count(sig: TheorySignature) -> BigUint {
    let direct = sig.model_count() - sig.node_count();
    let report = decomposition_report(sig);
    assert_eq!(direct, report.limit_total, "limit count disagrees with decomposition terms for {sig}");
    direct
}

/// The signature `(k, s)` with `3^k · 6^s = n`, if any.
///
/// Writing `n = 2^s · 3^e · rest`, a signature exists iff `rest = 1` and
/// `e ≥ s`, and then `k = e − s`.
pub fn validate_count(n: &BigUint) -> Result<Option<TheorySignature>, CatalogError> {
    if n.is_zero() {
        return Err(CatalogError::ZeroCount);
    }
    let s = n.trailing_zeros().unwrap_or(0);
    let mut rest = n >> s;
    let three = BigUint::from(3u32);
    let mut e = 0u64;
    loop {
        let (q, r) = rest.div_rem(&three);
        if !r.is_zero() {
            break;
        }
        rest = q;
        e += 1;
    }
    if !rest.is_one() || e < s {
        return Ok(None);
    }
    match (u32::try_from(e - s), u32::try_from(s)) {
        (Ok(k), Ok(s)) => Ok(Some(TheorySignature::new(k, s))),
        _ => Ok(None),
    }
}

/// Decomposes `n` as `2^k · 3^s`; `None` if it has any other prime factor.
fn split_node_count(n: usize) -> Option<TheorySignature> {
    if n == 0 {
        return None;
    }
    let mut rest = n;
    let mut s = 0;
    while rest.is_multiple_of(3) {
        rest /= 3;
        s += 1;
    }
    rest.is_power_of_two().then(|| TheorySignature::new(rest.trailing_zeros(), s))
}

/// Finds the canonical signature whose lattice is IL-isomorphic to `p`
/// after collapsing mutual-domination classes.
pub fn identify(p: &LabeledPreorder) -> Option<TheorySignature> {
    let q = p.quotient_rk();
    let sig = split_node_count(q.len())?;
    let total: BigUint = q.il_total();
    if total != sig.model_count() - sig.node_count() {
        return None;
    }
    let canonical = build_theory(sig);
    are_isomorphic(&q, &canonical).map(|_| sig)
}

/// Counts for the disjoint union of two theories: primes multiply, totals
/// multiply, and a model is limit as soon as one restriction is.
pub fn compose_counts(r1: &CountReport, r2: &CountReport) -> Result<CountReport, CatalogError> {
    r1.check_consistent()?;
    r2.check_consistent()?;
    let prime_count = &r1.prime_count * &r2.prime_count;
    let limit_count = &r1.limit_count * &r2.prime_count
        + &r1.prime_count * &r2.limit_count
        + &r1.limit_count * &r2.limit_count;
    let total = &r1.total * &r2.total;
    assert_eq!(total, &prime_count + &limit_count, "composition law violated");

    let mut per_node = std::collections::BTreeMap::new();
    for (c1, l1) in &r1.per_node {
        for (c2, l2) in &r2.per_node {
            let value = (l1 + 1u32) * (l2 + 1u32) - BigUint::one();
            per_node.insert(c1.concat(c2), value);
        }
    }
    Ok(CountReport { signature: r1.signature.join(&r2.signature), total, prime_count, limit_count, per_node })
}
