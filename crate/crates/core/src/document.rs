//! JSON documents for labeled preorders.
//!
//! IL values are decimal strings so that arbitrarily large counts survive
//! any JSON number handling. Only order generators are stored; the closure
//! is recomputed on load.

use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{coords, cover_pairs, NodeCoord, TheorySignature};
use crate::poset::{LabeledPreorder, PosetError};

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("IL value `{value}` for node `{node}` is not a decimal integer")]
    BadIl { node: String, value: String },
    #[error(transparent)]
    Poset(#[from] PosetError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeEntry {
    pub id: String,
    pub il: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocumentMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<[u32; 2]>,
    #[serde(default)]
    pub canonical: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreorderDocument {
    pub nodes: Vec<NodeEntry>,
    pub order: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<DocumentMeta>,
}

impl PreorderDocument {
    /// Serializes `p` with its Hasse covers as generators, or every strict
    /// pair when `p` is not antisymmetric.
    pub fn from_preorder(p: &LabeledPreorder, signature: Option<TheorySignature>) -> Self {
        let nodes =
            (0..p.len()).map(|i| NodeEntry { id: p.id(i).to_string(), il: p.il(i).to_string() }).collect();
        let pairs = p.hasse_edges().unwrap_or_else(|_| p.relation_pairs());
        let order = pairs.into_iter().map(|(x, y)| [x, y]).collect();
        let meta = (p.is_canonical() || signature.is_some())
            .then(|| DocumentMeta { signature: signature.map(|s| [s.k, s.s]), canonical: p.is_canonical() });
        PreorderDocument { nodes, order, meta }
    }

    /// The document for `Q_k × L_{s,3}`, produced straight from coordinates
    /// without materializing the order relation.
    pub fn canonical(sig: TheorySignature) -> Self {
        let all: Vec<NodeCoord> = coords(sig).collect();
        let ids: Vec<String> = all.iter().map(NodeCoord::id).collect();
        let nodes = all
            .iter()
            .zip(&ids)
            .map(|(c, id)| NodeEntry { id: id.clone(), il: c.il().to_string() })
            .collect();
        let mut order: Vec<[String; 2]> =
            cover_pairs(sig).into_iter().map(|(x, y)| [ids[x].clone(), ids[y].clone()]).collect();
        order.sort();
        PreorderDocument {
            nodes,
            order,
            meta: Some(DocumentMeta { signature: Some([sig.k, sig.s]), canonical: true }),
        }
    }

    pub fn signature(&self) -> Option<TheorySignature> {
        let [k, s] = self.meta.as_ref()?.signature?;
        Some(TheorySignature::new(k, s))
    }

    /// Rebuilds the preorder; a document flagged canonical must also pass the
    /// canonical checks (partial order, least element with IL 0).
    pub fn to_preorder(&self) -> Result<LabeledPreorder, DocumentError> {
        let mut il = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let value = BigInt::from_str(node.il.trim())
                .map_err(|_| DocumentError::BadIl { node: node.id.clone(), value: node.il.clone() })?;
            il.push((node.id.clone(), value));
        }
        let p = LabeledPreorder::new(
            self.nodes.iter().map(|n| n.id.clone()),
            self.order.iter().map(|[x, y]| (x.clone(), y.clone())),
            il,
        )?;
        if self.meta.as_ref().is_some_and(|m| m.canonical) {
            Ok(p.into_canonical()?)
        } else {
            Ok(p)
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, DocumentError> {
        Ok(serde_json::from_str(text)?)
    }
}
