//! Computation graphs: an arbitrary DAG is totalized into a maximal
//! computation graph (MCG) and then bounded (BMCG) by replacing wide fan-in
//! with balanced trees of proxy nodes.

use std::collections::BTreeSet;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CgError {
    #[error("graph has no nodes")]
    Empty,
    #[error("edge ({0}, {1}) references a missing node")]
    Dangling(usize, usize),
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("cycle closed by edge ({from}, {to})")]
    Cycle { from: usize, to: usize },
    #[error("in-degree bound must be at least 2, got {0}")]
    BoundTooSmall(usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Edges run from dependency to dependent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dag {
    labels: Vec<String>,
    edges: Vec<(usize, usize)>,
    succ: Vec<Vec<usize>>,
}

impl Dag {
    pub fn new(labels: Vec<String>, edges: Vec<(usize, usize)>) -> Result<Self, CgError> {
        let n = labels.len();
        if n == 0 {
            return Err(CgError::Empty);
        }
        let mut succ = vec![Vec::new(); n];
        let mut seen = BTreeSet::new();
        let mut kept = Vec::new();
        for &(u, v) in &edges {
            if u >= n || v >= n {
                return Err(CgError::Dangling(u, v));
            }
            if u == v {
                return Err(CgError::SelfLoop(u));
            }
            if seen.insert((u, v)) {
                succ[u].push(v);
                kept.push((u, v));
            }
        }
        let dag = Dag {
            labels,
            edges: kept,
            succ,
        };
        dag.topological_order()?;
        Ok(dag)
    }

    /// `n` nodes labelled by index, one edge per consecutive pair.
    pub fn chain(n: usize) -> Result<Self, CgError> {
        let labels = (0..n).map(|i| i.to_string()).collect();
        Dag::new(labels, (1..n).map(|i| (i - 1, i)).collect())
    }

    /// One `source target` pair per line; `#` starts a comment. Labels are
    /// numbered in order of first appearance; a lone label declares a node.
    pub fn parse_edge_list(text: &str) -> Result<Self, CgError> {
        let mut labels: Vec<String> = Vec::new();
        let mut edges = Vec::new();
        let id = |s: &str, labels: &mut Vec<String>| match labels.iter().position(|l| l == s) {
            Some(i) => i,
            None => {
                labels.push(s.to_string());
                labels.len() - 1
            }
        };
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                [] => {}
                [a] => {
                    id(a, &mut labels);
                }
                [a, b] => {
                    let u = id(a, &mut labels);
                    let v = id(b, &mut labels);
                    edges.push((u, v));
                }
                _ => {
                    return Err(CgError::Parse {
                        line: k + 1,
                        msg: format!("expected `source target`, got {line:?}"),
                    })
                }
            }
        }
        Dag::new(labels, edges)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    /// Nodes nothing depends on.
    pub fn terminals(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.succ[v].is_empty()).collect()
    }

    fn topological_order(&self) -> Result<Vec<usize>, CgError> {
        let n = self.len();
        let mut indeg = vec![0usize; n];
        for &(_, v) in &self.edges {
            indeg[v] += 1;
        }
        let mut ready: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).rev().collect();
        let mut out = Vec::with_capacity(n);
        while let Some(u) = ready.pop() {
            out.push(u);
            for &v in &self.succ[u] {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    ready.push(v);
                }
            }
        }
        if out.len() < n {
            // Every leftover node has a leftover predecessor; walking back must repeat.
            let mut pred = vec![None; n];
            for &(u, v) in &self.edges {
                if indeg[u] > 0 && indeg[v] > 0 {
                    pred[v] = Some(u);
                }
            }
            let mut on_walk = vec![false; n];
            let mut v = (0..n).find(|&v| indeg[v] > 0).expect("a node is left over");
            loop {
                on_walk[v] = true;
                let u = pred[v].expect("left-over node has a left-over predecessor");
                if on_walk[u] {
                    return Err(CgError::Cycle { from: u, to: v });
                }
                v = u;
            }
        }
        Ok(out)
    }
}

/// Totally ordered computation graph: position `i` depends on every `j < i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mcg {
    /// Labels in execution order.
    pub labels: Vec<String>,
    /// DAG node at each position; `None` for the added terminal.
    pub origin: Vec<Option<usize>>,
    pub added_terminal: bool,
}

impl Mcg {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// MCG over `n` unnamed positions, the benchmark's standard workload.
    pub fn complete(n: usize) -> Self {
        Mcg {
            labels: (0..n).map(|i| i.to_string()).collect(),
            origin: (0..n).map(Some).collect(),
            added_terminal: false,
        }
    }

    pub fn edge_count(&self) -> usize {
        let n = self.len();
        n * n.saturating_sub(1) / 2
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> {
        let n = self.len();
        (0..n).flat_map(move |i| (0..i).map(move |j| (j, i)))
    }

    pub fn in_degree(&self, pos: usize) -> usize {
        pos
    }

    pub fn position_of(&self, dag_node: usize) -> Option<usize> {
        self.origin.iter().position(|&o| o == Some(dag_node))
    }
}

/// Orders the DAG by longest distance to the (unified) terminal, farthest
/// first, ties by ascending node id, then adds every missing forward edge.
pub fn mcg_from_dag(dag: &Dag) -> Mcg {
    let n = dag.len();
    let terminals = dag.terminals();
    let added_terminal = terminals.len() > 1;
    let topo = dag.topological_order().expect("Dag is acyclic by construction");
    // Distance to the terminal: revisits keep the maximum.
    let mut order = vec![0usize; n];
    for &u in topo.iter().rev() {
        order[u] = dag.successors(u).iter().map(|&v| order[v] + 1).max().unwrap_or(0);
        if added_terminal && dag.successors(u).is_empty() {
            order[u] = 1;
        }
    }
    let mut ids: Vec<usize> = (0..n).collect();
    ids.sort_by(|&a, &b| order[b].cmp(&order[a]).then(a.cmp(&b)));
    let mut labels: Vec<String> = ids.iter().map(|&v| dag.labels()[v].clone()).collect();
    let mut origin: Vec<Option<usize>> = ids.into_iter().map(Some).collect();
    if added_terminal {
        labels.push("terminal".to_string());
        origin.push(None);
    }
    Mcg {
        labels,
        origin,
        added_terminal,
    }
}

/// Proxies needed for a node of in-degree `d` under bound `c`.
pub fn proxy_count(d: usize, c: usize) -> Result<usize, CgError> {
    if c < 2 {
        return Err(CgError::BoundTooSmall(c));
    }
    Ok(if d >= 2 { (d - 2) / (c - 1) } else { 0 })
}

/// `(closed form, brute sum)` of proxies added to an `n`-node MCG.
pub fn total_proxy_count(n: usize, c: usize) -> Result<(u128, u128), CgError> {
    if c < 2 {
        return Err(CgError::BoundTooSmall(c));
    }
    let brute = (0..n).map(|d| proxy_count(d, c).map(|k| k as u128)).sum::<Result<u128, _>>()?;
    let (n, c) = (n as u128, c as u128);
    let k = if n >= 3 { (n - 3) / (c - 1) } else { 0 };
    let closed = if n >= 3 {
        k * (n - 2) - (c - 1) * k * (k + 1) / 2
    } else {
        0
    };
    Ok((closed, brute))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BmcgKind {
    /// MCG node at this execution position.
    Original(usize),
    /// Proxy in the fan-in tree of the MCG node at this position.
    Proxy(usize),
    /// The MCG's added terminal, at this position.
    Terminal(usize),
}

/// Bounded MCG. Node indices are a topological order: each proxy tree is
/// emitted immediately before its owner.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bmcg {
    pub kinds: Vec<BmcgKind>,
    /// In-neighbours of each node.
    pub inputs: Vec<Vec<usize>>,
    pub bound: usize,
}

impl Bmcg {
    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.inputs.iter().map(Vec::len).sum()
    }

    pub fn proxy_total(&self) -> usize {
        self.kinds.iter().filter(|k| matches!(k, BmcgKind::Proxy(_))).count()
    }

    pub fn max_in_degree(&self) -> usize {
        self.inputs.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Index of the node carrying the MCG node at `pos`.
    pub fn node_of(&self, pos: usize) -> Option<usize> {
        self.kinds.iter().position(|k| match k {
            BmcgKind::Original(p) | BmcgKind::Terminal(p) => *p == pos,
            BmcgKind::Proxy(_) => false,
        })
    }

    /// MCG positions reachable backwards from `v` through proxies only.
    pub fn contracted_inputs(&self, v: usize) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let mut stack = self.inputs[v].clone();
        while let Some(u) = stack.pop() {
            match self.kinds[u] {
                BmcgKind::Proxy(_) => stack.extend(self.inputs[u].iter().copied()),
                BmcgKind::Original(p) | BmcgKind::Terminal(p) => {
                    out.insert(p);
                }
            }
        }
        out
    }
}

/// Replaces each in-degree above `c` with a balanced fan-in tree. Sources are
/// merged first-in first-out, `c` at a time, with one final partial merge that
/// leaves exactly `c` inputs, so the proxy count is minimal.
pub fn bmcg_from_mcg(mcg: &Mcg, c: usize) -> Result<Bmcg, CgError> {
    if c < 2 {
        return Err(CgError::BoundTooSmall(c));
    }
    let mut kinds = Vec::new();
    let mut inputs: Vec<Vec<usize>> = Vec::new();
    let mut node_at = Vec::with_capacity(mcg.len());
    for pos in 0..mcg.len() {
        let mut queue: std::collections::VecDeque<usize> = node_at.iter().copied().collect();
        while queue.len() > c {
            let m = c.min(queue.len() - c + 1);
            let group: Vec<usize> = queue.drain(..m).collect();
            kinds.push(BmcgKind::Proxy(pos));
            inputs.push(group);
            queue.push_back(kinds.len() - 1);
        }
        kinds.push(match mcg.origin[pos] {
            Some(_) => BmcgKind::Original(pos),
            None => BmcgKind::Terminal(pos),
        });
        inputs.push(queue.into_iter().collect());
        node_at.push(kinds.len() - 1);
    }
    Ok(Bmcg {
        kinds,
        inputs,
        bound: c,
    })
}

/// Empty iff in-degrees respect `c`, contraction recovers the MCG, and the
/// node and edge counts match the proxy formula.
pub fn validate_bmcg(bmcg: &Bmcg, mcg: &Mcg, c: usize) -> Vec<String> {
    let mut out = Vec::new();
    for (v, ins) in bmcg.inputs.iter().enumerate() {
        if ins.len() > c {
            out.push(format!("node {v} has in-degree {} > {c}", ins.len()));
        }
        if ins.iter().any(|&u| u >= v) {
            out.push(format!("node {v} has an input that is not earlier in the order"));
        }
    }
    for pos in 0..mcg.len() {
        match bmcg.node_of(pos) {
            None => out.push(format!("MCG node {pos} is missing")),
            Some(v) => {
                let want: BTreeSet<usize> = (0..pos).collect();
                if bmcg.contracted_inputs(v) != want {
                    out.push(format!("contraction of MCG node {pos} does not recover its dependencies"));
                }
            }
        }
    }
    match total_proxy_count(mcg.len(), c) {
        Ok((closed, _)) => {
            let n = mcg.len() as u128;
            if bmcg.len() as u128 != n + closed {
                out.push(format!("{} nodes, expected {}", bmcg.len(), n + closed));
            }
            let edges = mcg.edge_count() as u128 + closed;
            if bmcg.edge_count() as u128 != edges {
                out.push(format!("{} edges, expected {edges}", bmcg.edge_count()));
            }
        }
        Err(e) => out.push(e.to_string()),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diamond() -> Dag {
        let labels = ["a", "b", "c", "d"].map(String::from).to_vec();
        Dag::new(labels, vec![(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap()
    }

    #[test]
    fn chain_mcg_has_six_edges() {
        let m = mcg_from_dag(&Dag::chain(4).unwrap());
        assert_eq!(m.edge_count(), 6);
        assert!(!m.added_terminal);
        assert_eq!(m.labels, vec!["0", "1", "2", "3"]);
    }

    #[test]
    fn single_node_mcg() {
        let m = mcg_from_dag(&Dag::chain(1).unwrap());
        assert_eq!(m.len(), 1);
        assert_eq!(m.edge_count(), 0);
    }

    #[test]
    fn diamond_preserves_edges() {
        let d = diamond();
        let m = mcg_from_dag(&d);
        assert_eq!(m.len(), 4);
        assert!(!m.added_terminal);
        for &(u, v) in d.edges() {
            assert!(m.position_of(u) < m.position_of(v));
        }
        assert_eq!(m.labels, vec!["a", "b", "c", "d"]);
    }

    #[test]
    fn multiple_terminals_get_unified() {
        let labels = ["a", "b", "c"].map(String::from).to_vec();
        let d = Dag::new(labels, vec![(0, 1), (0, 2)]).unwrap();
        let m = mcg_from_dag(&d);
        assert!(m.added_terminal);
        assert_eq!(m.len(), 4);
        assert_eq!(m.origin.last(), Some(&None));
    }

    #[test]
    fn revisits_take_the_maximum_order() {
        // a → d directly and through b → c → d: a must precede c.
        let labels = ["a", "b", "c", "d"].map(String::from).to_vec();
        let d = Dag::new(labels, vec![(0, 3), (0, 1), (1, 2), (2, 3)]).unwrap();
        let m = mcg_from_dag(&d);
        assert_eq!(m.labels, vec!["a", "b", "c", "d"]);
    }

    #[test]
    fn cycles_and_bad_edges_are_rejected() {
        let labels = ["a", "b"].map(String::from).to_vec();
        assert!(matches!(Dag::new(labels.clone(), vec![(0, 1), (1, 0)]), Err(CgError::Cycle { .. })));
        assert_eq!(Dag::new(labels.clone(), vec![(0, 0)]), Err(CgError::SelfLoop(0)));
        assert_eq!(Dag::new(labels, vec![(0, 5)]), Err(CgError::Dangling(0, 5)));
        assert_eq!(Dag::new(vec![], vec![]), Err(CgError::Empty));
    }

    #[test]
    fn edge_list_parsing() {
        let d = Dag::parse_edge_list("# diamond\na b\na c\nb d # tail\nc d\n\nlonely\n").unwrap();
        assert_eq!(d.len(), 5);
        assert_eq!(d.edges().len(), 4);
        assert!(matches!(Dag::parse_edge_list("a b c"), Err(CgError::Parse { line: 1, .. })));
    }

    #[test]
    fn proxy_count_table() {
        assert_eq!(proxy_count(3, 2), Ok(1));
        assert_eq!(proxy_count(10, 3), Ok(4));
        assert_eq!(proxy_count(11, 4), Ok(3));
        for c in 2..6 {
            assert_eq!(proxy_count(1, c), Ok(0));
        }
        assert_eq!(proxy_count(5, 1), Err(CgError::BoundTooSmall(1)));
    }

    #[test]
    fn degree_five_node_uses_three_proxies() {
        let b = bmcg_from_mcg(&Mcg::complete(6), 2).unwrap();
        let owned = b.kinds.iter().filter(|k| **k == BmcgKind::Proxy(5)).count();
        assert_eq!(owned, 3);
    }

    #[test]
    fn total_proxies_small_cases() {
        assert_eq!(total_proxy_count(5, 2), Ok((3, 3)));
        assert_eq!(total_proxy_count(3, 2), Ok((0, 0)));
        let (closed, brute) = total_proxy_count(100, 4).unwrap();
        assert_eq!(closed, brute);
        let b = bmcg_from_mcg(&Mcg::complete(5), 2).unwrap();
        assert_eq!(b.proxy_total(), 3);
    }

    #[test]
    fn bmcg_validates_and_counts() {
        for n in 1..40 {
            for c in 2..6 {
                let m = Mcg::complete(n);
                let b = bmcg_from_mcg(&m, c).unwrap();
                assert!(validate_bmcg(&b, &m, c).is_empty(), "n={n} c={c}");
                assert_eq!(b.max_in_degree(), c.min(n.saturating_sub(1)));
            }
        }
        let m = Mcg::complete(50);
        let b = bmcg_from_mcg(&m, 3).unwrap();
        assert_eq!(b.len() as u128, 50 + total_proxy_count(50, 3).unwrap().0);
    }

    #[test]
    fn low_degree_mcg_is_unchanged() {
        let m = Mcg::complete(3);
        let b = bmcg_from_mcg(&m, 2).unwrap();
        assert_eq!(b.len(), 3);
        assert_eq!(b.proxy_total(), 0);
    }

    #[test]
    fn planted_wide_node_is_reported() {
        let m = Mcg::complete(5);
        let mut b = bmcg_from_mcg(&m, 4).unwrap();
        assert!(validate_bmcg(&b, &m, 4).is_empty());
        let mut b2 = bmcg_from_mcg(&m, 3).unwrap();
        let last = b2.len() - 1;
        b2.inputs[last].push(0);
        let issues = validate_bmcg(&b2, &m, 3);
        assert!(issues.iter().any(|s| s.contains("in-degree")));
        b.inputs[4] = vec![0, 1, 2];
        assert!(!validate_bmcg(&b, &m, 4).is_empty());
    }
}
