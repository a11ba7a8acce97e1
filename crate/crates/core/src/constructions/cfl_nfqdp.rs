//! CFL acceptance on a capacity-3 NFQDP.
//!
//! The input is pre-built into a chain of binary parse trees, one per
//! bracketing. The agent walks every tree depth first, filling production
//! nodes with the nonterminals that derive their span, then sweeps booleans
//! back along the chain of quest nodes.

use std::collections::BTreeSet;

use crate::automata::{cyk_member, CnfGrammar};
use crate::graph::{NoRule, NodeId};
use crate::qdp::{
    nfqdp_run, prebuild, FqdpConfig, QdpAction, QdpContext, QdpHalt, QdpMachine, QdpResponse,
    QdpRunResult, TreeDescription,
};

pub const CAPACITY: usize = 3;
/// A quest node holds its parse root and the next quest node.
pub const CHILD_LIMIT: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CflGoal {
    /// Leaf holding one input symbol.
    I,
    /// Root of one parse tree; links to the next quest node.
    Q,
    /// Production node.
    P,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CflResp {
    Empty,
    Pi,
    Terminal(char),
    Nonterminals(BTreeSet<String>),
    Bool(bool),
}

impl QdpResponse for CflResp {
    fn empty() -> Self {
        CflResp::Empty
    }
    fn parent_mark() -> Self {
        CflResp::Pi
    }
}

/// Pre-built parse graph with the bookkeeping tests need.
#[derive(Clone, Debug)]
pub struct ParseGraph {
    pub machine: QdpMachine<CflGoal, CflResp>,
    /// Quest nodes in chain order.
    pub roots: Vec<NodeId>,
    /// Half-open input span of each production node.
    pub spans: Vec<Option<(usize, usize)>>,
}

pub fn config() -> FqdpConfig {
    FqdpConfig::new(CHILD_LIMIT, CAPACITY)
}

/// Binary bracketing of `[lo, hi)`; leaves are single positions.
#[derive(Clone, Debug)]
enum Shape {
    Leaf(usize),
    Split(Box<Shape>, Box<Shape>),
}

fn shapes(lo: usize, hi: usize) -> Vec<Shape> {
    if hi - lo == 1 {
        return vec![Shape::Leaf(lo)];
    }
    let mut out = Vec::new();
    for mid in lo + 1..hi {
        for l in shapes(lo, mid) {
            for r in shapes(mid, hi) {
                out.push(Shape::Split(Box::new(l.clone()), Box::new(r)));
            }
        }
    }
    out
}

struct Builder<'a> {
    input: &'a [char],
    nodes: Vec<(CflGoal, CflResp)>,
    links: Vec<(usize, usize)>,
    spans: Vec<Option<(usize, usize)>>,
}

impl Builder<'_> {
    fn push(&mut self, goal: CflGoal, resp: CflResp, span: Option<(usize, usize)>) -> usize {
        self.nodes.push((goal, resp));
        self.spans.push(span);
        self.nodes.len() - 1
    }

    /// Pre-order emission keeps left children at lower ids than right ones.
    fn emit(&mut self, shape: &Shape) -> ((usize, usize), usize) {
        match shape {
            Shape::Leaf(i) => {
                let p = self.push(CflGoal::P, CflResp::Empty, Some((*i, i + 1)));
                let leaf = self.push(CflGoal::I, CflResp::Terminal(self.input[*i]), None);
                self.links.push((p, leaf));
                ((*i, i + 1), p)
            }
            Shape::Split(l, r) => {
                let p = self.push(CflGoal::P, CflResp::Empty, None);
                let ((lo, _), lp) = self.emit(l);
                let ((_, hi), rp) = self.emit(r);
                self.links.push((p, lp));
                self.links.push((p, rp));
                self.spans[p] = Some((lo, hi));
                ((lo, hi), p)
            }
        }
    }
}

/// One parse tree per bracketing, linked at their quest roots. Empty input
/// yields a single quest node.
pub fn build_parse_graph(input: &str) -> ParseGraph {
    let chars: Vec<char> = input.chars().collect();
    let mut b = Builder {
        input: &chars,
        nodes: Vec::new(),
        links: Vec::new(),
        spans: Vec::new(),
    };
    let mut roots = Vec::new();
    if chars.is_empty() {
        roots.push(b.push(CflGoal::Q, CflResp::Empty, None));
    } else {
        for shape in shapes(0, chars.len()) {
            let q = b.push(CflGoal::Q, CflResp::Empty, None);
            if let Some(&prev) = roots.last() {
                b.links.push((prev, q));
            }
            roots.push(q);
            let (_, p) = b.emit(&shape);
            b.links.push((q, p));
        }
    }
    let desc = TreeDescription {
        nodes: b.nodes,
        links: b.links,
        focus: 0,
    };
    let machine = prebuild(desc, config()).expect("parse graph is a tree");
    ParseGraph {
        machine,
        roots,
        spans: b.spans,
    }
}

/// Closed-form node count: `Catalan(n - 1)` trees of `3n` nodes each.
pub fn parse_graph_size(n: usize) -> usize {
    if n == 0 {
        1
    } else {
        catalan(n - 1) * 3 * n
    }
}

pub fn catalan(n: usize) -> usize {
    (0..n).fold(1usize, |c, k| c * 2 * (2 * k + 1) / (k + 2))
}

pub fn nfqdp_cfl_agent(
    grammar: &CnfGrammar,
) -> impl Fn(&QdpContext<CflGoal, CflResp>) -> Result<QdpAction<CflGoal, CflResp>, NoRule> + '_ {
    move |ctx| cfl_step(grammar, ctx)
}

fn cfl_step(
    grammar: &CnfGrammar,
    ctx: &QdpContext<CflGoal, CflResp>,
) -> Result<QdpAction<CflGoal, CflResp>, NoRule> {
    use CflResp::*;
    if ctx.is_root() && matches!(ctx.focus.response, Bool(_)) {
        return Ok(QdpAction::Stop);
    }
    if let Some(i) = ctx.children.iter().position(|c| c.response.is_empty()) {
        return Ok(QdpAction::Pursue { child: i });
    }
    let complete = |response| Ok(QdpAction::CompleteQuest { response });
    match ctx.focus.goal {
        CflGoal::Q => {
            let mut accept = ctx.children.is_empty() && grammar.allows_empty;
            for c in &ctx.children {
                accept |= match (&c.goal, &c.response) {
                    (CflGoal::P, Nonterminals(set)) => set.contains(&grammar.start),
                    (CflGoal::Q, Bool(b)) => *b,
                    (g, r) => return Err(NoRule(format!("quest child {g:?} holds {r:?}"))),
                };
            }
            complete(Bool(accept))
        }
        CflGoal::P => match ctx.children.as_slice() {
            [leaf] => match leaf.response {
                Terminal(a) => complete(Nonterminals(grammar.producers_of(a))),
                ref r => Err(NoRule(format!("leaf holds {r:?}"))),
            },
            [l, r] => match (&l.response, &r.response) {
                (Nonterminals(a), Nonterminals(b)) => complete(Nonterminals(grammar.combine(a, b))),
                other => Err(NoRule(format!("production children hold {other:?}"))),
            },
            _ => Err(NoRule("production node must have one or two children".into())),
        },
        CflGoal::I => Err(NoRule("focus is an input leaf".into())),
    }
}

#[derive(Clone, Debug)]
pub struct CflSimulation {
    pub accepted: bool,
    pub oracle: bool,
    pub agrees: bool,
    pub roots: Vec<NodeId>,
    pub spans: Vec<Option<(usize, usize)>>,
    pub run: QdpRunResult<CflGoal, CflResp>,
}

/// Action count of a complete traversal: every non-head node is entered once
/// and completed once, the head completes, then stops.
pub fn traversal_actions(n: usize) -> usize {
    if n == 0 {
        return 2;
    }
    let trees = catalan(n - 1);
    trees * 4 * n
}

/// Runs the agent on the parse graph for `input`; acceptance is the final
/// boolean at the chain head, compared with `cyk_member`.
pub fn simulate_cfl_on_nfqdp(grammar: &CnfGrammar, input: &str, budget: usize) -> CflSimulation {
    let pg = build_parse_graph(input);
    let agent = nfqdp_cfl_agent(grammar);
    let mut no_input = |_: &CflGoal| CflResp::Empty;
    let run = nfqdp_run(pg.machine, &agent, &mut no_input, budget);
    let accepted = run.reason == QdpHalt::Stopped && *run.root_response() == CflResp::Bool(true);
    let chars: Vec<char> = input.chars().collect();
    let oracle = cyk_member(grammar, &chars).member;
    CflSimulation {
        accepted,
        oracle,
        agrees: accepted == oracle && run.reason == QdpHalt::Stopped,
        roots: pg.roots,
        spans: pg.spans,
        run,
    }
}
