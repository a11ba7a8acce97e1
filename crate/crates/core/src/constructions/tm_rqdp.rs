//! Turing machine on a capacity-4 RQDP.
//!
//! References are tape positions. Cells left of the head live in the goals of
//! write nodes on the root path; cells right of the head live in the reference
//! graph. A rightward move is a write node plus a new quest node one reference
//! further; a leftward move completes the focus and the parent quest spawns a
//! replica carrying the restored cell.

use std::collections::BTreeMap;

use crate::automata::{tm_run, Move, TmOutcome, TmStatus, TuringMachine};
use crate::graph::NoRule;
use crate::qdp::{FqdpConfig, QdpAction, QdpContext, QdpHalt, QdpMode, QdpResponse};
use crate::reference::{ReferenceGraph, RqdpMachine};

pub const CAPACITY: usize = 4;
/// A quest node holds a fetch, a write and a replica.
pub const CHILD_LIMIT: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TmNodeKind {
    Quest,
    Replica,
    Fetch,
    Write,
}

/// Goal tuple `(type, s, t)`; `None` is ε.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TmGoal {
    pub kind: TmNodeKind,
    pub state: Option<String>,
    pub symbol: Option<char>,
}

impl TmGoal {
    fn new(kind: TmNodeKind, state: Option<&str>, symbol: Option<char>) -> Self {
        TmGoal {
            kind,
            state: state.map(str::to_string),
            symbol,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TmResp {
    Empty,
    Pi,
    /// `(s', t')`: the next state and the symbol now in the cell.
    Cell { state: Option<String>, symbol: char },
    /// Termination sweep; each write node substitutes its own cell symbol.
    Halt { accept: bool, state: String, symbol: char },
}

impl TmResp {
    pub fn symbol(&self) -> Option<char> {
        match self {
            TmResp::Cell { symbol, .. } | TmResp::Halt { symbol, .. } => Some(*symbol),
            _ => None,
        }
    }
}

impl QdpResponse for TmResp {
    fn empty() -> Self {
        TmResp::Empty
    }
    fn parent_mark() -> Self {
        TmResp::Pi
    }
}

pub type TmRqdp = RqdpMachine<usize, TmGoal, TmResp>;

/// Quest nodes advance one cell; every other node keeps its parent's reference.
pub fn tm_tau(xi: &usize, goal: &TmGoal) -> usize {
    match goal.kind {
        TmNodeKind::Quest => xi + 1,
        _ => *xi,
    }
}

pub fn config() -> FqdpConfig {
    FqdpConfig::new(CHILD_LIMIT, CAPACITY)
}

type Step = Result<QdpAction<TmGoal, TmResp>, NoRule>;

/// Setup agent: the rightward cycle with the retrieve replaced by an input node.
pub fn rqdp_tm_initializer_agent(ctx: &QdpContext<TmGoal, TmResp>) -> Step {
    use TmNodeKind::*;
    let last = ctx.last_child();
    match (ctx.focus.goal.kind, last) {
        (Quest, None) => Ok(QdpAction::DiscoverInput {
            goal: TmGoal::new(Fetch, None, None),
            response: None,
        }),
        (Quest, Some(f)) if f.goal.kind == Fetch => match f.response.symbol() {
            Some(t) => Ok(QdpAction::DiscoverSubquest {
                goal: TmGoal::new(Write, None, Some(t)),
            }),
            None => Err(NoRule("input exhausted".into())),
        },
        (Write, None) => Ok(QdpAction::DiscoverSubquest {
            goal: TmGoal::new(Quest, None, None),
        }),
        (k, _) => Err(NoRule(format!("initializer has no rule at {k:?}"))),
    }
}

/// Writes `input` along references `0..n` and leaves the focus on the
/// rightmost quest node.
pub fn rqdp_tm_initializer(input: &str) -> TmRqdp {
    let chars: Vec<char> = input.chars().collect();
    let mut m = RqdpMachine::new(
        QdpMode::Fqdp,
        config(),
        TmGoal::new(TmNodeKind::Quest, None, None),
        0,
        tm_tau,
    );
    let actions = if chars.is_empty() { 0 } else { 3 * chars.len() - 2 };
    let mut next = chars.iter().copied();
    let mut input = |_: &TmGoal| TmResp::Cell {
        state: None,
        symbol: next.next().expect("initializer reads each symbol once"),
    };
    for _ in 0..actions {
        let ctx = m.qdp().context();
        let action = rqdp_tm_initializer_agent(&ctx).expect("initializer covers its own cycle");
        m.apply(action, &mut input).expect("initializer actions are legal");
    }
    m
}

/// Main agent. References never reach it; it sees only the local context.
pub fn rqdp_tm_agent(tm: &TuringMachine) -> impl Fn(&QdpContext<TmGoal, TmResp>) -> Step + '_ {
    move |ctx| tm_step(tm, ctx)
}

fn tm_step(tm: &TuringMachine, ctx: &QdpContext<TmGoal, TmResp>) -> Step {
    use TmNodeKind::*;
    let goal = &ctx.focus.goal;
    if ctx.is_root() && matches!(ctx.focus.response, TmResp::Cell { .. } | TmResp::Halt { .. }) {
        return Ok(QdpAction::Stop);
    }
    let complete = |response| Ok(QdpAction::CompleteQuest { response });
    let state = goal.state.as_deref().unwrap_or_default();
    match (goal.kind, ctx.last_child()) {
        (Quest, None) => Ok(QdpAction::Retrieve {
            goal: TmGoal::new(Fetch, goal.state.as_deref(), None),
        }),
        (Quest, Some(f)) if f.goal.kind == Fetch => {
            let t = f.response.symbol().unwrap_or(tm.blank);
            Ok(transition(tm, state, t))
        }
        (Replica, None) => {
            let t = goal.symbol.unwrap_or(tm.blank);
            Ok(transition(tm, state, t))
        }
        (Quest | Replica, Some(w)) if w.goal.kind == Write => match &w.response {
            TmResp::Cell { state: s, .. } => Ok(QdpAction::DiscoverSubquest {
                goal: TmGoal::new(Replica, s.as_deref(), w.goal.symbol),
            }),
            h @ TmResp::Halt { .. } => complete(h.clone()),
            r => Err(NoRule(format!("write child holds {r:?}"))),
        },
        (Quest | Replica, Some(r)) if r.goal.kind == Replica => complete(r.response.clone()),
        (Write, None) => Ok(QdpAction::DiscoverSubquest {
            goal: TmGoal::new(Quest, goal.state.as_deref(), None),
        }),
        (Write, Some(q)) => match &q.response {
            c @ TmResp::Cell { .. } => complete(c.clone()),
            TmResp::Halt { accept, state, .. } => complete(TmResp::Halt {
                accept: *accept,
                state: state.clone(),
                symbol: goal.symbol.unwrap_or(tm.blank),
            }),
            r => Err(NoRule(format!("quest child holds {r:?}"))),
        },
        (k, last) => Err(NoRule(format!("no rule for {k:?} with last child {last:?}"))),
    }
}

fn transition(tm: &TuringMachine, state: &str, t: char) -> QdpAction<TmGoal, TmResp> {
    let halt = |accept| QdpAction::CompleteQuest {
        response: TmResp::Halt {
            accept,
            state: state.to_string(),
            symbol: t,
        },
    };
    if tm.is_accepting(state) {
        return halt(true);
    }
    match tm.step(state, t) {
        None => halt(false),
        Some((s2, t2, Move::R)) => QdpAction::DiscoverSubquest {
            goal: TmGoal::new(TmNodeKind::Write, Some(s2), Some(*t2)),
        },
        Some((s2, t2, Move::L)) => QdpAction::CompleteQuest {
            response: TmResp::Cell {
                state: Some(s2.clone()),
                symbol: *t2,
            },
        },
    }
}

/// `(state, head)` when the focus is a replica or a quest whose latest child
/// is a fetch: the configurations at which the next transition is computed.
fn invariant_state(m: &TmRqdp) -> Option<(String, usize)> {
    let q = m.qdp();
    let f = q.focus();
    let goal = q.goal(f);
    let at = match goal.kind {
        TmNodeKind::Replica => q.children(f).is_empty(),
        TmNodeKind::Quest => q
            .children(f)
            .last()
            .is_some_and(|&c| q.goal(c).kind == TmNodeKind::Fetch),
        _ => false,
    };
    at.then(|| (goal.state.clone().unwrap_or_default(), *m.focus_ref()))
}

#[derive(Clone, Debug)]
pub struct RqdpTmSimulation {
    pub status: TmStatus,
    pub reason: QdpHalt,
    pub oracle: TmOutcome,
    pub agrees: bool,
    /// Non-blank cells read off the final reference graph.
    pub tape: BTreeMap<i64, char>,
    /// TM transitions simulated.
    pub steps: usize,
    /// Focus reference at each invariant state.
    pub heads: Vec<usize>,
    pub max_focus_degree: usize,
    pub violations: Vec<String>,
    /// Written reference entries when the halting configuration was reached.
    pub halt_refgraph: Option<BTreeMap<usize, TmResp>>,
    pub halt_focus: Option<TmGoal>,
    pub init: TmRqdp,
    pub machine: TmRqdp,
}

fn written(rg: &ReferenceGraph<usize, TmResp>) -> BTreeMap<usize, TmResp> {
    rg.written().map(|(k, v)| (*k, v.clone())).collect()
}

/// Runs initializer and main agent, checking the head at every invariant state
/// against `tm_run`. `budget` bounds TM transitions, as for the oracle.
pub fn simulate_tm_on_rqdp(tm: &TuringMachine, input: &str, budget: usize) -> RqdpTmSimulation {
    let oracle = tm_run(tm, input, budget);
    let init = rqdp_tm_initializer(input);
    let mut m = RqdpMachine::with_refgraph(
        QdpMode::Fqdp,
        config(),
        TmGoal::new(TmNodeKind::Quest, Some(&tm.start), None),
        0,
        tm_tau,
        init.refgraph().clone(),
    );
    let agent = rqdp_tm_agent(tm);
    let mut violations = Vec::new();
    let mut heads = Vec::new();
    let mut halt_refgraph = None;
    let mut halt_focus = None;
    let mut max_focus_degree = 0;
    // Each node is created and completed once, and a transition creates at most three.
    let action_cap = 16 * (budget + input.len()) + 64;
    let mut no_input = |_: &TmGoal| TmResp::Empty;
    let mut reason = QdpHalt::BudgetExhausted;
    let mut out_of_budget = false;
    for _ in 0..action_cap {
        let f = m.qdp().focus();
        max_focus_degree = max_focus_degree.max(m.qdp().graph().degree(f));
        if let Some((state, head)) = invariant_state(&m) {
            let k = heads.len();
            if oracle.heads.get(k).is_some_and(|&h| h != head) {
                violations.push(format!("transition {k}: head {head}, oracle {}", oracle.heads[k]));
            }
            heads.push(head);
            let t = match m.qdp().goal(f).kind {
                TmNodeKind::Replica => m.qdp().goal(f).symbol,
                _ => m.qdp().children(f).last().and_then(|&c| m.qdp().response(c).symbol()),
            };
            let halts = tm.is_accepting(&state) || tm.step(&state, t.unwrap_or(tm.blank)).is_none();
            if halts && halt_refgraph.is_none() {
                halt_refgraph = Some(written(m.refgraph()));
                halt_focus = Some(m.qdp().goal(f).clone());
            }
            if !halts && k == budget {
                out_of_budget = true;
                break;
            }
        }
        let ctx = m.qdp().context();
        let action = match agent(&ctx) {
            Ok(a) => a,
            Err(e) => {
                reason = QdpHalt::NoRule(e.0);
                break;
            }
        };
        if let Err(v) = m.apply(action, &mut no_input) {
            reason = QdpHalt::Violation(v);
            break;
        }
        if m.qdp().is_stopped() {
            reason = QdpHalt::Stopped;
            break;
        }
    }
    let status = match (&reason, m.qdp().response(m.qdp().root())) {
        _ if out_of_budget => TmStatus::BudgetExhausted,
        (QdpHalt::Stopped, TmResp::Halt { accept: true, .. }) => TmStatus::Accepted,
        (QdpHalt::Stopped, _) => TmStatus::Rejected,
        (QdpHalt::BudgetExhausted, _) => TmStatus::BudgetExhausted,
        (other, _) => {
            violations.push(format!("rollout ended with {other:?}"));
            TmStatus::Rejected
        }
    };
    let tape: BTreeMap<i64, char> = m
        .refgraph()
        .written()
        .filter_map(|(k, r)| r.symbol().filter(|&c| c != tm.blank).map(|c| (*k as i64, c)))
        .collect();
    if max_focus_degree > CAPACITY {
        violations.push(format!("focus degree reached {max_focus_degree}"));
    }
    let steps = heads.len().saturating_sub(1);
    let agrees = violations.is_empty()
        && status == oracle.status
        && (status == TmStatus::BudgetExhausted || oracle.non_blank(tm.blank) == tape);
    RqdpTmSimulation {
        status,
        reason,
        oracle,
        agrees,
        tape,
        steps,
        heads,
        max_focus_degree,
        violations,
        halt_refgraph,
        halt_focus,
        init,
        machine: m,
    }
}
