//! Graphviz DOT rendering of finished rollouts. Node labels are
//! `goal / response`; the focus is drawn with a double border.

use std::collections::HashMap;
use std::fmt::Write;

use anyhow::{ensure, Result};
use questgraph::graph::{Payload, QuestGraph};
use questgraph::qdp::{QdpMachine, QdpResponse};

pub fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\n")
}

fn node_line(out: &mut String, id: usize, label: &str, focus: bool) {
    let mark = if focus { ", peripheries=2, style=bold" } else { "" };
    writeln!(out, "  n{id} [label=\"{}\"{mark}];", escape(label)).unwrap();
}

/// Tree rollout: arrows run parent to child, labelled by `edge_label` from the
/// kind of action that created the child (`input`, `subquest`, `retrieve`,
/// or `prebuilt` for nodes that existed before the run).
pub fn qdp_dot<G: Payload, R: QdpResponse>(
    machine: &QdpMachine<G, R>,
    node_label: impl Fn(&G, &R) -> String,
    edge_label: impl Fn(&str, &G) -> String,
) -> Result<String> {
    ensure!(!machine.trace().is_empty(), "cannot render an empty trace");
    let created: HashMap<usize, &'static str> = machine
        .trace()
        .iter()
        .filter_map(|ev| ev.created.map(|id| (id, ev.action.kind())))
        .collect();
    let g = machine.graph();
    let mut out = String::from("digraph rollout {\n  node [shape=box];\n");
    for n in g.nodes() {
        node_line(&mut out, n.id, &node_label(&n.goal, &n.response), n.id == machine.focus());
    }
    for n in g.nodes() {
        if let Some(p) = machine.parent(n.id) {
            let kind = created.get(&n.id).copied().unwrap_or("prebuilt");
            let label = edge_label(kind, &n.goal);
            writeln!(out, "  n{p} -> n{} [label=\"{}\"];", n.id, escape(&label)).unwrap();
        }
    }
    out.push_str("}\n");
    Ok(out)
}

/// Unrestricted graph: edges are drawn without arrowheads.
pub fn graph_dot<G: Payload, R: Payload>(
    graph: &QuestGraph<G, R>,
    steps: usize,
    node_label: impl Fn(&G, &R) -> String,
) -> Result<String> {
    ensure!(steps > 0, "cannot render an empty trace");
    let mut out = String::from("digraph questgraph {\n  node [shape=box];\n  edge [dir=none];\n");
    for n in graph.nodes() {
        node_line(&mut out, n.id, &node_label(&n.goal, &n.response), n.id == graph.focus());
    }
    for (a, b) in graph.edges() {
        writeln!(out, "  n{a} -> n{b};").unwrap();
    }
    out.push_str("}\n");
    Ok(out)
}

/// Cheap structural check: one `digraph` block, balanced braces and quotes,
/// and every statement line terminated by `;`.
pub fn looks_like_dot(text: &str) -> bool {
    let t = text.trim();
    if !t.starts_with("digraph ") || !t.ends_with('}') {
        return false;
    }
    let mut depth = 0i32;
    let mut in_str = false;
    let mut prev = ' ';
    for c in t.chars() {
        match c {
            '"' if prev != '\\' => in_str = !in_str,
            '{' if !in_str => depth += 1,
            '}' if !in_str => depth -= 1,
            _ => {}
        }
        if depth < 0 {
            return false;
        }
        prev = if prev == '\\' && c == '\\' { ' ' } else { c };
    }
    let body = t.lines().skip(1).take_while(|l| l.trim() != "}");
    depth == 0 && !in_str && body.into_iter().all(|l| l.trim().ends_with(';'))
}

#[cfg(test)]
mod tests {
    use super::*;
    use questgraph::qdp::{FqdpConfig, QdpAction, QdpMode, Resolve};

    #[derive(Clone, Debug, PartialEq, Eq, Hash)]
    enum R {
        E,
        Pi,
        V(&'static str),
    }

    impl QdpResponse for R {
        fn empty() -> Self {
            R::E
        }
        fn parent_mark() -> Self {
            R::Pi
        }
    }

    #[test]
    fn retrieve_edges_are_labelled() {
        let mut m = QdpMachine::new(QdpMode::Fqdp, FqdpConfig::new(3, 4), "root");
        let mut res = |_: Resolve<'_, &'static str>| R::V("x");
        m.apply(QdpAction::DiscoverSubquest { goal: "sub \"q\"" }, &mut res).unwrap();
        m.apply(QdpAction::CompleteQuest { response: R::V("done") }, &mut res).unwrap();
        let dot = qdp_dot(&m, |g, r| format!("{g} / {r:?}"), |k, _| k.to_string()).unwrap();
        assert!(dot.contains("n0 -> n1 [label=\"subquest\"]"), "{dot}");
        assert!(dot.contains("\\\"q\\\""));
        assert!(looks_like_dot(&dot), "{dot}");
    }

    #[test]
    fn empty_trace_is_an_error() {
        let m: QdpMachine<&str, R> = QdpMachine::new(QdpMode::Fqdp, FqdpConfig::new(3, 4), "root");
        assert!(qdp_dot(&m, |g, _| g.to_string(), |k, _| k.to_string()).is_err());
        let g: QuestGraph<u8, u8> = QuestGraph::singleton(0, 0);
        assert!(graph_dot(&g, 0, |a, b| format!("{a}{b}")).is_err());
    }

    #[test]
    fn validator_rejects_broken_text() {
        assert!(!looks_like_dot("digraph g {\n  a -> b\n}"));
        assert!(!looks_like_dot("graph g {\n}"));
        assert!(looks_like_dot("digraph g {\n  a -> b;\n}"));
    }
}
