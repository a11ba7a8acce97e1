#![allow(dead_code)]

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use questgraph::automata::{CnfGrammar, Move, TuringMachine};
use questgraph::graph::{replay, run, AgentAction, CreationOrder, EdgePtr, LocalContext, NoRule, QuestGraph};
use questgraph::qdp::{FqdpConfig, QdpAction, QdpMachine, QdpMode, QdpResponse, Resolve};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const SENTINEL: char = '#';
pub const BLANK: char = '_';

/// Every word over `alphabet` of length at most `max_len`, shortest first.
pub fn words(alphabet: &[char], max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut frontier = vec![String::new()];
    for _ in 0..max_len {
        let next: Vec<String> = frontier
            .iter()
            .flat_map(|w| alphabet.iter().map(move |a| format!("{w}{a}")))
            .collect();
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Random machine with at most four working states plus `acc` and tape
/// symbols `_ a b`. Cell 0 holds a sentinel that is only ever stepped off to
/// the right, so the head cannot fall off the left edge.
pub fn random_tm(rng: &mut StdRng) -> TuringMachine {
    let working = rng.gen_range(1..=4);
    let names: Vec<String> = (0..working).map(|i| format!("q{i}")).collect();
    let targets: Vec<&str> = names.iter().map(String::as_str).chain(["acc"]).collect();
    let symbols = [BLANK, 'a', 'b'];
    let mut rules = Vec::new();
    for s in &names {
        let t = targets[rng.gen_range(0..targets.len())];
        rules.push((s.as_str(), SENTINEL, t, SENTINEL, Move::R));
        for &x in &symbols {
            if rng.gen_bool(0.85) {
                let t = targets[rng.gen_range(0..targets.len())];
                let w = symbols[rng.gen_range(0..symbols.len())];
                let m = if rng.gen_bool(0.5) { Move::L } else { Move::R };
                rules.push((s.as_str(), x, t, w, m));
            }
        }
    }
    TuringMachine::from_rules("q0", &["acc"], BLANK, &[SENTINEL, 'a', 'b'], &rules)
}

pub fn random_tm_input(rng: &mut StdRng) -> String {
    let len = rng.gen_range(0..=5);
    let body: String = (0..len).map(|_| if rng.gen_bool(0.5) { 'a' } else { 'b' }).collect();
    format!("{SENTINEL}{body}")
}

/// Random CNF grammar over `{a, b}` with two to four nonterminals.
pub fn random_cnf(rng: &mut StdRng) -> CnfGrammar {
    let pool = ["S", "A", "B", "C"];
    let nts = &pool[..rng.gen_range(2..=4)];
    let pick = |rng: &mut StdRng| nts[rng.gen_range(0..nts.len())];
    let binary: Vec<(&str, &str, &str)> = (0..rng.gen_range(2..=6))
        .map(|_| (pick(rng), pick(rng), pick(rng)))
        .collect();
    let mut unary: Vec<(&str, char)> = vec![(pick(rng), 'a'), (pick(rng), 'b')];
    for _ in 0..rng.gen_range(0..=2) {
        unary.push((pick(rng), if rng.gen_bool(0.5) { 'a' } else { 'b' }));
    }
    // S → ε is only legal when S never appears on a right-hand side.
    let s_on_right = binary.iter().any(|&(_, b, c)| b == "S" || c == "S");
    CnfGrammar::new("S", &binary, &unary, !s_on_right && rng.gen_bool(0.5))
}

/// Stateless but arbitrary agent: the action is a pure function of the
/// context digest and a seed.
pub fn hashed_agent(seed: u64) -> impl Fn(&LocalContext<u32, u8>) -> Result<AgentAction<u32, u8>, NoRule> {
    move |ctx| {
        let mut h = DefaultHasher::new();
        (seed, ctx.digest()).hash(&mut h);
        let mut rng = StdRng::seed_from_u64(h.finish());
        let k = ctx.neighbors.len();
        let ptr = |rng: &mut StdRng| match rng.gen_range(0..=k) {
            0 => EdgePtr::SelfLoop,
            i => EdgePtr::Neighbor(i - 1),
        };
        Ok(match rng.gen_range(0..20) {
            0 => AgentAction::Stop,
            1..=9 => {
                let mut attach = vec![EdgePtr::SelfLoop];
                for i in 0..k {
                    if rng.gen_bool(0.3) {
                        attach.push(EdgePtr::Neighbor(i));
                    }
                }
                AgentAction::Discover {
                    goal: rng.gen(),
                    response: rng.gen(),
                    attach,
                }
            }
            _ => AgentAction::RespondMove {
                response: rng.gen(),
                to: ptr(&mut rng),
            },
        })
    }
}

/// Runs a hashed agent twice and replays its trace; checks determinism,
/// replay fidelity and that goals never change once written.
pub fn fuzz_kernel(seed: u64, capacity: usize, budget: usize) -> Result<(), String> {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = rng.gen_range(1..=4);
    let nodes: Vec<(u32, u8)> = (0..n).map(|_| (rng.gen(), 0)).collect();
    let edges: Vec<(usize, usize)> = (1..n).map(|i| (rng.gen_range(0..i), i)).collect();
    let g0 = QuestGraph::new(nodes, &edges, 0).map_err(|e| e.to_string())?;
    let agent = hashed_agent(seed);
    let a = run(g0.clone(), &agent, capacity, budget);
    let b = run(g0.clone(), &agent, capacity, budget);
    if a.trace != b.trace || a.graph.nodes() != b.graph.nodes() {
        return Err(format!("seed {seed}: two runs diverged"));
    }
    let r = replay(g0.clone(), &a.trace, capacity, &CreationOrder).map_err(|e| e.to_string())?;
    if r.nodes() != a.graph.nodes() || r.focus() != a.graph.focus() || r.edge_count() != a.graph.edge_count() {
        return Err(format!("seed {seed}: replay differs from the run"));
    }
    // Goal immutability, checked step by step along the replay.
    let mut g = g0;
    let mut goals: Vec<u32> = g.nodes().iter().map(|n| n.goal).collect();
    for ev in &a.trace {
        let ctx = g.observe(capacity, &CreationOrder);
        if ctx.neighbors.len() > capacity {
            return Err(format!("seed {seed}: context exceeds capacity"));
        }
        g.apply(&ev.action, &ctx).map_err(|e| e.to_string())?;
        if g.nodes()[..goals.len()].iter().map(|n| n.goal).ne(goals.iter().copied()) {
            return Err(format!("seed {seed}: a goal changed at step {}", ev.step));
        }
        goals = g.nodes().iter().map(|n| n.goal).collect();
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FuzzResp {
    Empty,
    Pi,
    Val(u8),
}

impl QdpResponse for FuzzResp {
    fn empty() -> Self {
        FuzzResp::Empty
    }
    fn parent_mark() -> Self {
        FuzzResp::Pi
    }
}

/// Applies random legal actions and checks after every step that the graph is
/// a tree whose edges are exactly the parent links, the child limit holds, π
/// marks exactly the strict ancestors of the focus, and moves down and up
/// form a balanced bracket prefix matching the focus depth.
pub fn fuzz_qdp(seed: u64, mode: QdpMode, steps: usize) -> Result<usize, String> {
    let mut rng = StdRng::seed_from_u64(seed);
    let limit = rng.gen_range(1..=3);
    let config = FqdpConfig::new(limit, limit + 1);
    let mut m: QdpMachine<u32, FuzzResp> = QdpMachine::new(mode, config, 0);
    let mut resolve = |_: Resolve<'_, u32>| FuzzResp::Val(7);
    let mut open = 0usize;
    let mut applied = 0;
    for _ in 0..steps {
        let ctx = m.context();
        let mut candidates = vec![
            QdpAction::DiscoverInput { goal: rng.gen(), response: Some(FuzzResp::Val(rng.gen())) },
            QdpAction::DiscoverInput { goal: rng.gen(), response: None },
            QdpAction::DiscoverSubquest { goal: rng.gen() },
            QdpAction::CompleteQuest { response: FuzzResp::Val(rng.gen()) },
            QdpAction::Retrieve { goal: 1 },
            QdpAction::Stop,
        ];
        for i in 0..ctx.children.len() {
            candidates.push(QdpAction::Pursue { child: i });
        }
        let legal: Vec<_> = candidates.into_iter().filter(|a| m.legal(a).is_ok()).collect();
        if legal.is_empty() {
            break;
        }
        let action = legal[rng.gen_range(0..legal.len())].clone();
        let at_root = m.focus() == m.root();
        let down = matches!(action, QdpAction::Pursue { .. })
            || (mode == QdpMode::Fqdp && matches!(action, QdpAction::DiscoverSubquest { .. }));
        let up = matches!(action, QdpAction::CompleteQuest { .. }) && !at_root;
        let stop = action == QdpAction::Stop;
        m.apply(action, &mut resolve).map_err(|e| format!("seed {seed}: legal action refused: {e}"))?;
        applied += 1;
        if down {
            open += 1;
        }
        if up {
            open = open.checked_sub(1).ok_or(format!("seed {seed}: unmatched return"))?;
        }
        check_tree(&m, open, limit).map_err(|e| format!("seed {seed}: {e}"))?;
        if stop {
            break;
        }
    }
    Ok(applied)
}

fn check_tree(m: &QdpMachine<u32, FuzzResp>, open: usize, limit: usize) -> Result<(), String> {
    let g = m.graph();
    if g.edge_count() != g.len() - 1 {
        return Err(format!("{} edges on {} nodes", g.edge_count(), g.len()));
    }
    for id in 0..g.len() {
        if m.children(id).len() > limit {
            return Err(format!("node {id} exceeds the child limit"));
        }
        if let Some(p) = m.parent(id) {
            if !g.has_edge(id, p) || !m.children(p).contains(&id) {
                return Err(format!("parent link {p} -> {id} missing"));
            }
        } else if id != m.root() {
            return Err(format!("node {id} has no parent"));
        }
    }
    if m.depth(m.focus()) != open {
        return Err(format!("depth {} but {open} open brackets", m.depth(m.focus())));
    }
    let path = m.root_path();
    let marked: Vec<usize> = (0..g.len()).filter(|&i| m.response(i) == &FuzzResp::Pi).collect();
    let mut ancestors = path[1..].to_vec();
    ancestors.sort_unstable();
    if marked != ancestors {
        return Err(format!("π on {marked:?}, ancestors {ancestors:?}"));
    }
    Ok(())
}
