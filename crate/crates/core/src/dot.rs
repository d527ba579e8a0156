//! Graphviz output for Hasse diagrams.

use std::fmt::Write;

use crate::poset::{LabeledPreorder, PosetError};

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out
}

fn quote(s: &str) -> String {
    format!("\"{}\"", escape(s))
}

/// Renders the covering relation of `p` bottom-to-top.
///
/// Nodes appear in node order, edges in identifier order, and nodes of equal
/// height share a `rank=same` group, so equal inputs give identical bytes.
pub fn render_dot(p: &LabeledPreorder) -> Result<String, PosetError> {
    let edges = p.hasse_edges()?;
    let heights = p.heights()?;

    let mut out = String::new();
    out.push_str("digraph rk {\n");
    out.push_str("    rankdir=BT;\n");
    out.push_str("    node [shape=circle];\n");
    for i in 0..p.len() {
        // DOT turns the two-character sequence `\n` inside a label into a line break.
        let label = format!("{}\\nIL={}", escape(p.id(i)), p.il(i));
        writeln!(out, "    {} [label=\"{}\"];", quote(p.id(i)), label).unwrap();
    }
    for (x, y) in &edges {
        writeln!(out, "    {} -> {};", quote(x), quote(y)).unwrap();
    }
    let max_height = heights.iter().copied().max().unwrap_or(0);
    for h in 0..=max_height {
        let members: Vec<String> =
            (0..p.len()).filter(|&i| heights[i] == h).map(|i| quote(p.id(i))).collect();
        writeln!(out, "    {{ rank=same; {}; }}", members.join("; ")).unwrap();
    }
    out.push_str("}\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build_theory, TheorySignature};

    #[test]
    fn chain_output() {
        let dot = render_dot(&build_theory(TheorySignature::new(1, 0))).unwrap();
        assert_eq!(
            dot,
            "digraph rk {\n    rankdir=BT;\n    node [shape=circle];\n    \
             \"0.\" [label=\"0.\\nIL=0\"];\n    \"1.\" [label=\"1.\\nIL=1\"];\n    \
             \"0.\" -> \"1.\";\n    { rank=same; \"0.\"; }\n    { rank=same; \"1.\"; }\n}\n"
        );
    }

    #[test]
    fn quoting() {
        assert_eq!(quote("a\"b"), "\"a\\\"b\"");
        assert_eq!(quote("a\\b"), "\"a\\\\b\"");
    }

    #[test]
    fn grid_ranks() {
        let dot = render_dot(&build_theory(TheorySignature::new(0, 2))).unwrap();
        assert_eq!(dot.matches("->").count(), 12);
        assert_eq!(dot.matches("rank=same").count(), 5);
    }
}
