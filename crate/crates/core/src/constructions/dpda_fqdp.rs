//! DPDA ⇄ FQDP.
//!
//! Forward direction: a capacity-4 FQDP agent whose quest nodes carry the
//! (stack top, state) pair; a push is a sub-quest, a pop completes the quest,
//! and replicas continue a stack level after a pop so no node needs more than
//! three children.
//!
//! Backward direction: the reachable local contexts of any FQDP agent are
//! interned into DPDA states, with parent contexts pushed on the stack.

use std::collections::HashMap;
use std::fmt::Debug;
use std::hash::Hash;

use thiserror::Error;

use crate::automata::{dpda_run, Acceptance, Dpda, DpdaRule, DpdaStatus, StackOp};
use crate::graph::{ContextNode, NoRule, Payload};
use crate::qdp::{
    qdp_drive, FqdpConfig, QdpAction, QdpAgent, QdpContext, QdpHalt, QdpMachine, QdpMode,
    QdpResponse, QdpRunResult, Resolve,
};

pub const CAPACITY: usize = 4;
pub const CHILD_LIMIT: usize = 3;

/// Goal tuple `(type, Z, s)`; `z = None` marks a level whose stack is empty.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DpdaGoal {
    Quest { z: Option<char>, s: String },
    Replica { z: Option<char>, s: String },
    /// `peek` inputs only test for the end of input and consume nothing.
    Input { peek: bool },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DpdaResp {
    Empty,
    Pi,
    Symbol(char),
    /// A peek found input remaining.
    Pending,
    /// Input is exhausted.
    End,
    State(String),
    /// φ: the input was accepted and the rollout is winding down.
    Accept,
    Reject,
}

impl QdpResponse for DpdaResp {
    fn empty() -> Self {
        DpdaResp::Empty
    }
    fn parent_mark() -> Self {
        DpdaResp::Pi
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DpdaConstructionError {
    #[error("machine is not deterministic: {0:?}")]
    Invalid(Vec<String>),
    #[error("machine pushes its initial stack symbol, which the level encoding reserves")]
    PushesBottom,
}

pub fn root_goal(dpda: &Dpda) -> DpdaGoal {
    DpdaGoal::Quest {
        z: Some(dpda.initial_stack),
        s: dpda.start.clone(),
    }
}

fn level(goal: &DpdaGoal) -> Option<(Option<char>, &str)> {
    match goal {
        DpdaGoal::Quest { z, s } | DpdaGoal::Replica { z, s } => Some((*z, s.as_str())),
        DpdaGoal::Input { .. } => None,
    }
}

pub type DpdaContext = QdpContext<DpdaGoal, DpdaResp>;
pub type DpdaStep = Result<QdpAction<DpdaGoal, DpdaResp>, NoRule>;

/// The agent. Acceptance under `EmptyStack` reads "nothing above the bottom"
/// from the level's stack symbol, so the bottom symbol must never be pushed.
pub fn fqdp_dpda_agent(dpda: &Dpda) -> Result<impl Fn(&DpdaContext) -> DpdaStep + '_, DpdaConstructionError> {
    let issues = crate::automata::validate_dpda(dpda);
    if !issues.is_empty() {
        return Err(DpdaConstructionError::Invalid(issues));
    }
    if dpda.pushes_bottom() {
        return Err(DpdaConstructionError::PushesBottom);
    }
    Ok(move |ctx: &QdpContext<DpdaGoal, DpdaResp>| dpda_step(dpda, ctx))
}

fn dpda_step(
    dpda: &Dpda,
    ctx: &QdpContext<DpdaGoal, DpdaResp>,
) -> Result<QdpAction<DpdaGoal, DpdaResp>, NoRule> {
    use DpdaResp::*;
    let Some((z, s)) = level(&ctx.focus.goal) else {
        return Err(NoRule("focus is an input node".into()));
    };
    if ctx.is_root() && matches!(ctx.focus.response, Accept | Reject) {
        return Ok(QdpAction::Stop);
    }
    let complete = |r: DpdaResp| Ok(QdpAction::CompleteQuest { response: r });
    let Some(last) = ctx.last_child() else {
        let peek = z.is_none_or(|z| dpda.has_epsilon(s, z));
        return Ok(QdpAction::DiscoverInput {
            goal: DpdaGoal::Input { peek },
            response: None,
        });
    };
    match (&last.goal, &last.response) {
        (_, Accept) => complete(Accept),
        (_, Reject) => complete(Reject),
        (DpdaGoal::Input { .. }, r) => {
            let accepts = match dpda.acceptance {
                Acceptance::FinalState => dpda.accepting.contains(s),
                Acceptance::EmptyStack => z.is_none_or(|z| z == dpda.initial_stack),
            };
            let Some(top) = z else {
                return complete(if *r == End && accepts { Accept } else { Reject });
            };
            let rule = match r {
                Symbol(a) => dpda.transition(s, Some(*a), top),
                Pending => dpda.transition(s, None, top),
                End if accepts => return complete(Accept),
                End => dpda.transition(s, None, top),
                other => return Err(NoRule(format!("input node holds {other:?}"))),
            };
            let Some(rule) = rule else {
                return complete(Reject);
            };
            Ok(apply_rule(rule, top == dpda.initial_stack))
        }
        (DpdaGoal::Quest { .. }, State(s2)) => Ok(QdpAction::DiscoverSubquest {
            goal: DpdaGoal::Replica { z, s: s2.clone() },
        }),
        (DpdaGoal::Replica { .. }, State(s2)) => complete(State(s2.clone())),
        (g, r) => Err(NoRule(format!("last child {g:?} holds {r:?}"))),
    }
}

fn apply_rule(rule: &DpdaRule, at_bottom: bool) -> QdpAction<DpdaGoal, DpdaResp> {
    let s = rule.to.clone();
    match rule.op {
        StackOp::Push(c) => QdpAction::DiscoverSubquest {
            goal: DpdaGoal::Quest { z: Some(c), s },
        },
        StackOp::Pop if at_bottom => QdpAction::DiscoverSubquest {
            goal: DpdaGoal::Replica { z: None, s },
        },
        StackOp::Pop => QdpAction::CompleteQuest {
            response: DpdaResp::State(s),
        },
        StackOp::Keep => QdpAction::DiscoverSubquest {
            goal: DpdaGoal::Replica {
                z: Some(rule.top),
                s,
            },
        },
    }
}

/// Input tape read through input nodes: reads consume, peeks only test for the end.
pub fn input_provider(input: &str) -> impl FnMut(&DpdaGoal) -> DpdaResp {
    let chars: Vec<char> = input.chars().collect();
    let mut pos = 0;
    move |goal| {
        let peek = matches!(goal, DpdaGoal::Input { peek: true });
        match chars.get(pos) {
            None => DpdaResp::End,
            Some(_) if peek => DpdaResp::Pending,
            Some(&c) => {
                pos += 1;
                DpdaResp::Symbol(c)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct DpdaSimulation {
    pub status: DpdaStatus,
    pub oracle: DpdaStatus,
    pub agrees: bool,
    /// Largest focus degree seen during the rollout.
    pub max_focus_degree: usize,
    /// Input-node responses in creation order.
    pub inputs: Vec<DpdaResp>,
    pub run: QdpRunResult<DpdaGoal, DpdaResp>,
}

/// Runs the agent on `input` and compares acceptance with `dpda_run`.
/// `budget` bounds DPDA transitions; the rollout gets a proportional action budget.
pub fn simulate_dpda_on_fqdp(
    dpda: &Dpda,
    input: &str,
    budget: usize,
) -> Result<DpdaSimulation, DpdaConstructionError> {
    let agent = fqdp_dpda_agent(dpda)?;
    let machine = QdpMachine::new(
        QdpMode::Fqdp,
        FqdpConfig::new(CHILD_LIMIT, CAPACITY),
        root_goal(dpda),
    );
    let mut max_degree = 0;
    let mut provider = input_provider(input);
    let mut resolve = |r: Resolve<'_, DpdaGoal>| match r {
        Resolve::Input(g) => provider(g),
        Resolve::Retrieve(_) => DpdaResp::Empty,
    };
    let action_budget = 8 * budget + 4 * input.chars().count() + 16;
    let run = drive_tracking_degree(machine, &agent, &mut resolve, action_budget, &mut max_degree);
    let status = match (&run.reason, run.root_response()) {
        (QdpHalt::Stopped, DpdaResp::Accept) => DpdaStatus::Accepted,
        (QdpHalt::BudgetExhausted, _) => DpdaStatus::BudgetExhausted,
        _ => DpdaStatus::Rejected,
    };
    let oracle = dpda_run(dpda, input, budget).status;
    let inputs = run
        .machine
        .graph()
        .nodes()
        .iter()
        .filter(|n| matches!(n.goal, DpdaGoal::Input { .. }))
        .map(|n| n.response.clone())
        .collect();
    Ok(DpdaSimulation {
        status,
        oracle,
        agrees: status == oracle,
        max_focus_degree: max_degree,
        inputs,
        run,
    })
}

fn drive_tracking_degree<G: Payload, R: QdpResponse>(
    mut machine: QdpMachine<G, R>,
    agent: &impl QdpAgent<G, R>,
    resolve: &mut dyn FnMut(Resolve<'_, G>) -> R,
    budget: usize,
    max_degree: &mut usize,
) -> QdpRunResult<G, R> {
    for used in 0..budget {
        *max_degree = (*max_degree).max(machine.graph().degree(machine.focus()));
        let out = qdp_drive(machine, agent, resolve, 1);
        if out.reason != QdpHalt::BudgetExhausted || used + 1 == budget {
            *max_degree = (*max_degree).max(out.machine.graph().degree(out.machine.focus()));
            return out;
        }
        machine = out.machine;
    }
    qdp_drive(machine, agent, resolve, 0)
}

/// Result of interning an FQDP agent's contexts as DPDA states.
#[derive(Clone, Debug)]
pub struct InternedDpda<G, R> {
    pub dpda: Dpda,
    /// `contexts[k]` is DPDA state `c{k}`.
    pub contexts: Vec<QdpContext<G, R>>,
    /// Set when exploration hit the state budget; the machine is then partial.
    pub diagnostic: Option<String>,
}

const BOTTOM: char = '⊥';

fn stack_symbol(k: usize) -> char {
    char::from_u32(0xE000 + k as u32).expect("context index fits the private-use plane")
}

/// Builds a DPDA whose states are the reachable local contexts of `agent`.
///
/// Input nodes discovered without a response consume one input symbol, whose
/// response is `symbol(a)`; every other action is an ε-move. A sub-quest pushes
/// the parent's context, completing a quest pops it. States whose context
/// satisfies `accept` are accepting.
pub fn dpda_from_fqdp<G, R, A>(
    agent: &A,
    config: FqdpConfig,
    root_goal: G,
    alphabet: &[char],
    symbol: impl Fn(char) -> R,
    accept: impl Fn(&QdpContext<G, R>) -> bool,
    state_budget: usize,
) -> InternedDpda<G, R>
where
    G: Payload,
    R: QdpResponse,
    A: Fn(&QdpContext<G, R>) -> Result<QdpAction<G, R>, NoRule>,
{
    let root: QdpContext<G, R> = QdpMachine::<G, R>::new(QdpMode::Fqdp, config, root_goal).context();
    let mut interner = Interner::default();
    interner.id(root);
    let mut stack_syms: Vec<usize> = Vec::new();
    let mut rules: Vec<DpdaRule> = Vec::new();
    let mut diagnostic = None;
    let name = |k: usize| format!("c{k}");
    // Each pass regenerates every rule; new contexts or stack symbols force another pass.
    loop {
        let (states_before, syms_before) = (interner.items.len(), stack_syms.len());
        rules.clear();
        let mut k = 0;
        while k < interner.items.len() {
            if interner.items.len() > state_budget {
                break;
            }
            let ctx = interner.items[k].clone();
            let action = match agent(&ctx) {
                Ok(a) if legal_in_context(&ctx, &a, config) => a,
                _ => {
                    k += 1;
                    continue;
                }
            };
            let tops: Vec<char> = std::iter::once(BOTTOM)
                .chain(stack_syms.iter().map(|&p| stack_symbol(p)))
                .collect();
            let mut emit = |input: Option<char>, to: usize, top: char, op: StackOp| {
                rules.push(DpdaRule {
                    from: name(k),
                    input,
                    top,
                    to: name(to),
                    op,
                })
            };
            match action {
                QdpAction::DiscoverInput { goal, response: None } => {
                    for &a in alphabet {
                        let to = interner.id(with_child(&ctx, goal.clone(), symbol(a), config));
                        tops.iter().for_each(|&t| emit(Some(a), to, t, StackOp::Keep));
                    }
                }
                QdpAction::DiscoverInput { goal, response: Some(r) } => {
                    let to = interner.id(with_child(&ctx, goal, r, config));
                    tops.iter().for_each(|&t| emit(None, to, t, StackOp::Keep));
                }
                QdpAction::DiscoverSubquest { goal } => {
                    let mut parent = with_child(&ctx, goal.clone(), R::empty(), config);
                    parent.focus.response = R::parent_mark();
                    let child = QdpContext {
                        focus: ContextNode { goal, response: R::empty() },
                        parent: Some(parent.focus.clone()),
                        children: Vec::new(),
                        child_count: 0,
                    };
                    let p = interner.id(parent);
                    let to = interner.id(child);
                    if !stack_syms.contains(&p) {
                        stack_syms.push(p);
                    }
                    tops.iter().for_each(|&t| emit(None, to, t, StackOp::Push(stack_symbol(p))));
                }
                QdpAction::CompleteQuest { response } => match ctx.parent.clone() {
                    None => {
                        let mut done = ctx.clone();
                        done.focus.response = response;
                        let to = interner.id(done);
                        tops.iter().for_each(|&t| emit(None, to, t, StackOp::Keep));
                    }
                    Some(parent_node) => {
                        for p in stack_syms.clone() {
                            let mut back = interner.items[p].clone();
                            if back.focus != parent_node {
                                continue;
                            }
                            back.focus.response = R::empty();
                            if back.child_count == back.children.len() {
                                if let Some(last) = back.children.last_mut() {
                                    last.response = response.clone();
                                }
                            }
                            let to = interner.id(back);
                            emit(None, to, stack_symbol(p), StackOp::Pop);
                        }
                    }
                },
                _ => {}
            }
            k += 1;
        }
        if interner.items.len() > state_budget {
            diagnostic = Some(format!("exploration stopped after {state_budget} contexts"));
            break;
        }
        if interner.items.len() == states_before && stack_syms.len() == syms_before {
            break;
        }
    }
    let states: Vec<String> = (0..interner.items.len()).map(name).collect();
    let accepting: Vec<&str> = interner
        .items
        .iter()
        .enumerate()
        .filter(|(_, c)| accept(c))
        .map(|(k, _)| states[k].as_str())
        .collect();
    let mut dpda = Dpda::from_rules(&states[0], BOTTOM, &accepting, Acceptance::FinalState, alphabet, &[]);
    dpda.states.extend(states.iter().cloned());
    for r in &rules {
        dpda.stack_alphabet.insert(r.top);
        if let StackOp::Push(c) = r.op {
            dpda.stack_alphabet.insert(c);
        }
    }
    dpda.rules = rules;
    InternedDpda {
        dpda,
        contexts: interner.items,
        diagnostic,
    }
}

fn legal_in_context<G, R>(ctx: &QdpContext<G, R>, action: &QdpAction<G, R>, config: FqdpConfig) -> bool {
    match action {
        QdpAction::DiscoverInput { .. } | QdpAction::DiscoverSubquest { .. } => ctx.child_count < config.child_limit,
        QdpAction::Pursue { .. } | QdpAction::Retrieve { .. } => false,
        QdpAction::Stop | QdpAction::CompleteQuest { .. } => true,
    }
}

fn with_child<G: Clone, R: Clone>(ctx: &QdpContext<G, R>, goal: G, response: R, config: FqdpConfig) -> QdpContext<G, R> {
    let mut next = ctx.clone();
    let room = config.capacity - usize::from(ctx.parent.is_some());
    if next.children.len() < room {
        next.children.push(ContextNode { goal, response });
    }
    next.child_count += 1;
    next
}

struct Interner<K> {
    items: Vec<K>,
    index: HashMap<K, usize>,
}

impl<K> Default for Interner<K> {
    fn default() -> Self {
        Interner {
            items: Vec::new(),
            index: HashMap::new(),
        }
    }
}

impl<K: Clone + Eq + Hash> Interner<K> {
    fn id(&mut self, k: K) -> usize {
        if let Some(&i) = self.index.get(&k) {
            return i;
        }
        let i = self.items.len();
        self.items.push(k.clone());
        self.index.insert(k, i);
        i
    }
}

/// Acceptance of a generic FQDP agent under the same convention as
/// `dpda_from_fqdp`: accept once the input is consumed in an accepting context.
pub fn fqdp_accepts<G, R, A>(
    agent: &A,
    config: FqdpConfig,
    root_goal: G,
    symbol: impl Fn(char) -> R,
    accept: impl Fn(&QdpContext<G, R>) -> bool,
    input: &str,
    budget: usize,
) -> DpdaStatus
where
    G: Payload,
    R: QdpResponse,
    A: Fn(&QdpContext<G, R>) -> Result<QdpAction<G, R>, NoRule>,
{
    let chars: Vec<char> = input.chars().collect();
    let mut pos = 0;
    let mut machine = QdpMachine::new(QdpMode::Fqdp, config, root_goal);
    for _ in 0..budget {
        let ctx = machine.context();
        if pos == chars.len() && accept(&ctx) {
            return DpdaStatus::Accepted;
        }
        let Ok(action) = agent(&ctx) else {
            return DpdaStatus::Rejected;
        };
        let consumes = matches!(action, QdpAction::DiscoverInput { response: None, .. });
        if consumes && pos == chars.len() {
            return DpdaStatus::Rejected;
        }
        if matches!(action, QdpAction::Stop) {
            return DpdaStatus::Rejected;
        }
        let next = chars.get(pos).copied();
        let mut resolve = |_: Resolve<'_, G>| symbol(next.unwrap());
        if machine.apply(action, &mut resolve).is_err() {
            return DpdaStatus::Rejected;
        }
        if consumes {
            pos += 1;
        }
    }
    DpdaStatus::BudgetExhausted
}
