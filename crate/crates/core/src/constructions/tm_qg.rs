//! A Turing machine on a linear Quest Graph with context capacity 2.
//!
//! Each node is a tape cell whose response holds (state, symbol, direction).
//! Directions point inward toward the head, so the node holding the current
//! state is always the neighbor whose direction is opposite to the focus.

use std::collections::BTreeMap;

use crate::automata::{tm_run, Move, TmOutcome, TmStatus, TuringMachine};
use crate::graph::{AgentAction, CreationOrder, EdgePtr, LocalContext, NoRule, QuestGraph, StepOutcome};

pub const CAPACITY: usize = 2;

/// Message carried by the agent's halt when δ is undefined, i.e. the machine rejects.
pub const UNDEFINED_TRANSITION: &str = "transition undefined";

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TmCell {
    Cell {
        state: Option<String>,
        symbol: char,
        dir: Move,
    },
    /// ε_d: a freshly discovered tape end pointing inward along `d`.
    Boundary(Move),
}

impl TmCell {
    pub fn dir(&self) -> Move {
        match self {
            TmCell::Cell { dir, .. } | TmCell::Boundary(dir) => *dir,
        }
    }

    pub fn state(&self) -> Option<&str> {
        match self {
            TmCell::Cell { state, .. } => state.as_deref(),
            TmCell::Boundary(_) => None,
        }
    }

    pub fn symbol(&self, blank: char) -> char {
        match self {
            TmCell::Cell { symbol, .. } => *symbol,
            TmCell::Boundary(_) => blank,
        }
    }
}

pub type TapeGraph = QuestGraph<(), TmCell>;

/// Lays `tape` on a chain with the head on cell `head`. The start state is
/// planted on the left neighbor; when the head is on cell 0 a blank planted
/// cell is prepended. Returns the graph and the tape position of each node.
pub fn build_tm_tape_graph_at(tm: &TuringMachine, tape: &[char], head: usize) -> (TapeGraph, Vec<i64>) {
    let mut cells: Vec<char> = tape.to_vec();
    if cells.is_empty() {
        cells.push(tm.blank);
    }
    assert!(head < cells.len(), "head must lie on the tape");
    let mut positions: Vec<i64> = (0..cells.len() as i64).collect();
    let mut head_idx = head;
    if head == 0 {
        cells.insert(0, tm.blank);
        positions.insert(0, -1);
        head_idx = 1;
    }
    let nodes = cells
        .iter()
        .enumerate()
        .map(|(i, &symbol)| {
            let dir = if i < head_idx { Move::R } else { Move::L };
            let state = (i + 1 == head_idx).then(|| tm.start.clone());
            ((), TmCell::Cell { state, symbol, dir })
        })
        .collect::<Vec<_>>();
    let edges: Vec<_> = (1..nodes.len()).map(|i| (i - 1, i)).collect();
    let graph = QuestGraph::new(nodes, &edges, head_idx).expect("chain is a valid graph");
    (graph, positions)
}

/// Initial graph for running `tm` on `input` with the head on cell 0.
pub fn build_tm_tape_graph(tm: &TuringMachine, input: &str) -> TapeGraph {
    let tape: Vec<char> = input.chars().collect();
    build_tm_tape_graph_at(tm, &tape, 0).0
}

/// The stateless capacity-2 agent: extend the tape at an end, stop on an
/// accepting state, otherwise apply δ, write and move.
pub fn tm_questgraph_agent(
    tm: &TuringMachine,
) -> impl Fn(&LocalContext<(), TmCell>) -> Result<AgentAction<(), TmCell>, NoRule> + '_ {
    move |ctx| {
        let nb = &ctx.neighbors;
        if nb.len() == 1 {
            let boundary = TmCell::Boundary(nb[0].response.dir().opposite());
            return Ok(AgentAction::Discover {
                goal: (),
                response: boundary,
                attach: vec![EdgePtr::SelfLoop],
            });
        }
        if nb.len() != 2 {
            return Err(NoRule(format!("focus has {} neighbors", nb.len())));
        }
        let fd = ctx.focus.response.dir();
        let by_dir = |d: Move| nb.iter().position(|n| n.response.dir() == d);
        let (Some(left), Some(right)) = (by_dir(Move::R), by_dir(Move::L)) else {
            return Err(NoRule("neighbors share a direction".into()));
        };
        let prev = if fd == Move::R { right } else { left };
        let Some(state) = nb[prev].response.state() else {
            return Err(NoRule("previous node carries no state".into()));
        };
        if tm.is_accepting(state) {
            return Ok(AgentAction::Stop);
        }
        let symbol = ctx.focus.response.symbol(tm.blank);
        let Some((next, write, dir)) = tm.step(state, symbol) else {
            return Err(NoRule(UNDEFINED_TRANSITION.into()));
        };
        let to = if *dir == Move::L { left } else { right };
        Ok(AgentAction::RespondMove {
            response: TmCell::Cell {
                state: Some(next.clone()),
                symbol: *write,
                dir: *dir,
            },
            to: EdgePtr::Neighbor(to),
        })
    }
}

#[derive(Clone, Debug)]
pub struct TmConformance {
    pub status: TmStatus,
    /// Non-blank cells keyed by tape position.
    pub tape: BTreeMap<i64, char>,
    /// TM transitions simulated.
    pub steps: usize,
    /// Agent actions applied, stop included.
    pub actions: usize,
    /// Head position after each transition, starting with the initial one.
    pub heads: Vec<i64>,
    pub oracle: TmOutcome,
    pub agrees: bool,
    /// Direction-pattern or degree violations, and unexpected agent halts.
    pub violations: Vec<String>,
    pub graph: TapeGraph,
}

/// Runs the agent and compares halting status and final tape against `tm_run`.
/// `budget` bounds TM transitions, as for the oracle.
pub fn simulate_tm_on_questgraph(tm: &TuringMachine, input: &str, budget: usize) -> TmConformance {
    let tape: Vec<char> = input.chars().collect();
    let (mut graph, mut pos) = build_tm_tape_graph_at(tm, &tape, 0);
    let agent = tm_questgraph_agent(tm);
    let mut violations = Vec::new();
    let mut heads = vec![pos[graph.focus()]];
    let mut steps = 0;
    let mut actions = 0;
    let status = loop {
        check_invariants(&graph, &pos, &mut violations);
        let ctx = graph.observe(CAPACITY, &CreationOrder);
        let action = match agent(&ctx) {
            Ok(a) => a,
            Err(NoRule(msg)) if msg == UNDEFINED_TRANSITION => break TmStatus::Rejected,
            Err(NoRule(msg)) => {
                violations.push(format!("agent halted: {msg}"));
                break TmStatus::Rejected;
            }
        };
        if matches!(action, AgentAction::RespondMove { .. }) && steps == budget {
            break TmStatus::BudgetExhausted;
        }
        let focus_pos = pos[graph.focus()];
        match graph.apply(&action, &ctx) {
            Ok(StepOutcome::Stopped) => {
                actions += 1;
                break TmStatus::Accepted;
            }
            Ok(StepOutcome::Continue { created }) => {
                actions += 1;
                if let Some(id) = created {
                    let side = match &action {
                        AgentAction::Discover {
                            response: TmCell::Boundary(Move::L),
                            ..
                        } => 1,
                        _ => -1,
                    };
                    pos.push(focus_pos + side);
                    debug_assert_eq!(pos.len(), id + 1);
                } else {
                    steps += 1;
                    heads.push(pos[graph.focus()]);
                }
            }
            Err(e) => {
                violations.push(format!("illegal action: {e}"));
                break TmStatus::Rejected;
            }
        }
    };
    let mut cells = BTreeMap::new();
    for node in graph.nodes() {
        let c = node.response.symbol(tm.blank);
        if c != tm.blank {
            cells.insert(pos[node.id], c);
        }
    }
    let oracle = tm_run(tm, input, budget);
    let agrees = violations.is_empty()
        && oracle.status == status
        && (status == TmStatus::BudgetExhausted || oracle.non_blank(tm.blank) == cells);
    TmConformance {
        status,
        tape: cells,
        steps,
        actions,
        heads,
        oracle,
        agrees,
        violations,
        graph,
    }
}

fn check_invariants(graph: &TapeGraph, pos: &[i64], out: &mut Vec<String>) {
    let f = graph.focus();
    for &n in graph.neighbors(f).iter().chain([f].iter()) {
        if graph.degree(n) > 2 {
            out.push(format!("node {n} has degree {}", graph.degree(n)));
        }
    }
    let nb = graph.neighbors(f);
    if nb.len() == 2 {
        let (l, r) = if pos[nb[0]] < pos[nb[1]] { (nb[0], nb[1]) } else { (nb[1], nb[0]) };
        let pattern = [
            graph.node(l).response.dir(),
            graph.node(f).response.dir(),
            graph.node(r).response.dir(),
        ];
        if pattern[0] != Move::R || pattern[2] != Move::L {
            out.push(format!("direction pattern {pattern:?} at focus {f}"));
        }
    }
}
