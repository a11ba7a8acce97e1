//! Finite Quest Decision Processes: tree-shaped, depth-first rollouts over the
//! kernel graph, with the nondeterministic variant that decouples creating a
//! sub-quest from pursuing it.

use std::fmt::Debug;

use thiserror::Error;

use crate::graph::{ContextNode, NodeId, Payload, QuestGraph};

/// Responses usable by the QDP engines: they reserve an empty value ε and a
/// parent mark π.
pub trait QdpResponse: Payload {
    fn empty() -> Self;
    fn parent_mark() -> Self;

    fn is_empty(&self) -> bool {
        *self == Self::empty()
    }
    fn is_parent_mark(&self) -> bool {
        *self == Self::parent_mark()
    }
    fn is_complete(&self) -> bool {
        !self.is_empty() && !self.is_parent_mark()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QdpMode {
    Fqdp,
    Nfqdp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FqdpConfig {
    pub child_limit: usize,
    pub capacity: usize,
}

impl FqdpConfig {
    pub fn new(child_limit: usize, capacity: usize) -> Self {
        assert!(child_limit >= 1, "child_limit must be positive");
        assert!(capacity >= 1, "capacity must be positive");
        FqdpConfig {
            child_limit,
            capacity,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum QdpAction<G, R> {
    /// Creates a leaf child holding external information; `None` asks the
    /// environment's input provider.
    DiscoverInput { goal: G, response: Option<R> },
    /// FQDP: marks the focus π and moves into the new child.
    /// NFQDP: creates the child without moving.
    DiscoverSubquest { goal: G },
    /// NFQDP only: marks the focus π and moves into the i-th visible child.
    Pursue { child: usize },
    /// Writes the response and returns to the parent, clearing its π.
    /// At the root the focus stays put.
    CompleteQuest { response: R },
    /// Reference-augmented engines only: creates a child whose response is
    /// looked up by the environment.
    Retrieve { goal: G },
    Stop,
}

impl<G, R> QdpAction<G, R> {
    pub fn kind(&self) -> &'static str {
        match self {
            QdpAction::DiscoverInput { .. } => "input",
            QdpAction::DiscoverSubquest { .. } => "subquest",
            QdpAction::Pursue { .. } => "pursue",
            QdpAction::CompleteQuest { .. } => "complete",
            QdpAction::Retrieve { .. } => "retrieve",
            QdpAction::Stop => "stop",
        }
    }
}

/// Agent view: the focus, its parent and the first visible children in creation order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QdpContext<G, R> {
    pub focus: ContextNode<G, R>,
    pub parent: Option<ContextNode<G, R>>,
    pub children: Vec<ContextNode<G, R>>,
    /// True number of children, which never exceeds the child limit.
    pub child_count: usize,
}

impl<G, R> QdpContext<G, R> {
    pub fn is_root(&self) -> bool {
        self.parent.is_none()
    }

    pub fn last_child(&self) -> Option<&ContextNode<G, R>> {
        self.children.last()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QdpViolation {
    #[error("focus already has the maximum of {0} children")]
    ChildLimit(usize),
    #[error("stop is only allowed at the root")]
    StopOffRoot,
    #[error("stop requires a completed root")]
    RootIncomplete,
    #[error("pursue is not an FQDP action")]
    PursueInFqdp,
    #[error("child pointer {0} is outside the context")]
    ChildOutOfContext(usize),
    #[error("child {0} is not incomplete")]
    ChildNotPending(usize),
    #[error("complete requires every child to be complete")]
    IncompleteChildren,
    #[error("retrieve is not available on this engine")]
    RetrieveDisabled,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("tree description has no nodes")]
    Empty,
    #[error("node {0} has more than one parent")]
    MultipleParents(usize),
    #[error("tree description contains a cycle through node {0}")]
    Cycle(usize),
    #[error("tree description is not connected: node {0} is unreachable from the root")]
    Disconnected(usize),
    #[error("link ({0}, {1}) references a missing node")]
    Dangling(usize, usize),
    #[error("focus {0} is out of range")]
    FocusOutOfRange(usize),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QdpCounts {
    pub discover_input: usize,
    pub discover_subquest: usize,
    pub pursue: usize,
    pub complete: usize,
    pub retrieve: usize,
    pub stop: usize,
}

impl QdpCounts {
    pub fn total(&self) -> usize {
        self.discover_input
            + self.discover_subquest
            + self.pursue
            + self.complete
            + self.retrieve
            + self.stop
    }
}

/// Asks the environment for a response the agent did not supply.
pub enum Resolve<'a, G> {
    Input(&'a G),
    Retrieve(&'a G),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QdpEvent<G, R> {
    pub step: usize,
    pub focus: NodeId,
    pub action: QdpAction<G, R>,
    /// Response filled in by the environment, if any.
    pub resolved: Option<R>,
    pub created: Option<NodeId>,
}

/// A QDP rollout: the kernel graph plus the derived tree view.
#[derive(Clone, Debug)]
pub struct QdpMachine<G, R> {
    graph: QuestGraph<G, R>,
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    root: NodeId,
    mode: QdpMode,
    config: FqdpConfig,
    allow_retrieve: bool,
    counts: QdpCounts,
    trace: Vec<QdpEvent<G, R>>,
    stopped: bool,
}

impl<G: Payload, R: QdpResponse> QdpMachine<G, R> {
    /// Fresh rollout whose single root holds `goal` with an empty response.
    pub fn new(mode: QdpMode, config: FqdpConfig, goal: G) -> Self {
        Self::from_parts(
            mode,
            config,
            QuestGraph::singleton(goal, R::empty()),
            vec![None],
            vec![Vec::new()],
            0,
        )
    }

    fn from_parts(
        mode: QdpMode,
        config: FqdpConfig,
        graph: QuestGraph<G, R>,
        parent: Vec<Option<NodeId>>,
        children: Vec<Vec<NodeId>>,
        root: NodeId,
    ) -> Self {
        QdpMachine {
            graph,
            parent,
            children,
            root,
            mode,
            config,
            allow_retrieve: false,
            counts: QdpCounts::default(),
            trace: Vec::new(),
            stopped: false,
        }
    }

    pub(crate) fn enable_retrieve(&mut self) {
        self.allow_retrieve = true;
    }

    pub fn graph(&self) -> &QuestGraph<G, R> {
        &self.graph
    }

    pub fn mode(&self) -> QdpMode {
        self.mode
    }

    pub fn config(&self) -> FqdpConfig {
        self.config
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn focus(&self) -> NodeId {
        self.graph.focus()
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.parent[id]
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.children[id]
    }

    pub fn response(&self, id: NodeId) -> &R {
        &self.graph.node(id).response
    }

    pub fn goal(&self, id: NodeId) -> &G {
        &self.graph.node(id).goal
    }

    pub fn counts(&self) -> QdpCounts {
        self.counts
    }

    pub fn trace(&self) -> &[QdpEvent<G, R>] {
        &self.trace
    }

    pub fn is_stopped(&self) -> bool {
        self.stopped
    }

    /// Nodes from the focus up to the root, focus first.
    pub fn root_path(&self) -> Vec<NodeId> {
        let mut path = vec![self.focus()];
        while let Some(p) = self.parent[*path.last().unwrap()] {
            path.push(p);
        }
        path
    }

    pub fn depth(&self, mut id: NodeId) -> usize {
        let mut d = 0;
        while let Some(p) = self.parent[id] {
            id = p;
            d += 1;
        }
        d
    }

    pub fn context(&self) -> QdpContext<G, R> {
        let f = self.focus();
        let snap = |id: NodeId| {
            let n = self.graph.node(id);
            ContextNode {
                goal: n.goal.clone(),
                response: n.response.clone(),
            }
        };
        let parent = self.parent[f].map(snap);
        let room = self.config.capacity - usize::from(parent.is_some());
        QdpContext {
            focus: snap(f),
            parent,
            children: self.children[f].iter().take(room).map(|&c| snap(c)).collect(),
            child_count: self.children[f].len(),
        }
    }

    fn visible_children(&self) -> usize {
        let f = self.focus();
        let room = self.config.capacity - usize::from(self.parent[f].is_some());
        self.children[f].len().min(room)
    }

    /// Checks the structural rules for `action` against the current state.
    pub fn legal(&self, action: &QdpAction<G, R>) -> Result<(), QdpViolation> {
        let f = self.focus();
        let at_limit = self.children[f].len() >= self.config.child_limit;
        match action {
            QdpAction::DiscoverInput { .. } | QdpAction::DiscoverSubquest { .. } if at_limit => {
                Err(QdpViolation::ChildLimit(self.config.child_limit))
            }
            QdpAction::Retrieve { .. } if !self.allow_retrieve => Err(QdpViolation::RetrieveDisabled),
            QdpAction::Retrieve { .. } if at_limit => {
                Err(QdpViolation::ChildLimit(self.config.child_limit))
            }
            QdpAction::Pursue { .. } if self.mode == QdpMode::Fqdp => Err(QdpViolation::PursueInFqdp),
            QdpAction::Pursue { child } => {
                if *child >= self.visible_children() {
                    return Err(QdpViolation::ChildOutOfContext(*child));
                }
                if !self.response(self.children[f][*child]).is_empty() {
                    return Err(QdpViolation::ChildNotPending(*child));
                }
                Ok(())
            }
            QdpAction::CompleteQuest { .. } if self.mode == QdpMode::Nfqdp => {
                if self.children[f].iter().all(|&c| self.response(c).is_complete()) {
                    Ok(())
                } else {
                    Err(QdpViolation::IncompleteChildren)
                }
            }
            QdpAction::Stop if self.parent[f].is_some() => Err(QdpViolation::StopOffRoot),
            QdpAction::Stop if self.mode == QdpMode::Nfqdp && !self.response(f).is_complete() => {
                Err(QdpViolation::RootIncomplete)
            }
            _ => Ok(()),
        }
    }

    /// Applies a legal action. Responses the agent left open are obtained from `resolve`.
    pub fn apply(
        &mut self,
        action: QdpAction<G, R>,
        resolve: &mut dyn FnMut(Resolve<'_, G>) -> R,
    ) -> Result<Option<NodeId>, QdpViolation> {
        self.legal(&action)?;
        let f = self.focus();
        let step = self.trace.len();
        let mut resolved = None;
        let created = match &action {
            QdpAction::DiscoverInput { goal, response } => {
                let r = match response {
                    Some(r) => r.clone(),
                    None => {
                        let r = resolve(Resolve::Input(goal));
                        resolved = Some(r.clone());
                        r
                    }
                };
                self.counts.discover_input += 1;
                Some(self.spawn(goal.clone(), r))
            }
            QdpAction::Retrieve { goal } => {
                let r = resolve(Resolve::Retrieve(goal));
                resolved = Some(r.clone());
                self.counts.retrieve += 1;
                Some(self.spawn(goal.clone(), r))
            }
            QdpAction::DiscoverSubquest { goal } => {
                self.counts.discover_subquest += 1;
                let c = self.spawn(goal.clone(), R::empty());
                if self.mode == QdpMode::Fqdp {
                    self.graph.write_response(f, R::parent_mark());
                    self.graph.set_focus(c);
                }
                Some(c)
            }
            QdpAction::Pursue { child } => {
                self.counts.pursue += 1;
                let c = self.children[f][*child];
                self.graph.tick();
                self.graph.write_response(f, R::parent_mark());
                self.graph.set_focus(c);
                None
            }
            QdpAction::CompleteQuest { response } => {
                self.counts.complete += 1;
                self.graph.tick();
                self.graph.write_response(f, response.clone());
                if let Some(p) = self.parent[f] {
                    if self.response(p).is_parent_mark() {
                        self.graph.write_response(p, R::empty());
                    }
                    self.graph.set_focus(p);
                }
                None
            }
            QdpAction::Stop => {
                self.counts.stop += 1;
                self.stopped = true;
                None
            }
        };
        if self.visible_children() < self.children[self.focus()].len() {
            self.graph.note_truncation();
        }
        self.trace.push(QdpEvent {
            step,
            focus: f,
            action,
            resolved,
            created,
        });
        Ok(created)
    }

    fn spawn(&mut self, goal: G, response: R) -> NodeId {
        let f = self.focus();
        self.graph.tick();
        let c = self.graph.push_node(goal, response);
        self.graph.add_edge(f, c);
        self.parent.push(Some(f));
        self.children.push(Vec::new());
        self.children[f].push(c);
        c
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QdpHalt {
    Stopped,
    BudgetExhausted,
    NoRule(String),
    Violation(QdpViolation),
}

#[derive(Clone, Debug)]
pub struct QdpRunResult<G, R> {
    pub reason: QdpHalt,
    pub machine: QdpMachine<G, R>,
}

impl<G: Payload, R: QdpResponse> QdpRunResult<G, R> {
    pub fn steps(&self) -> usize {
        self.machine.trace().len()
    }

    pub fn root_response(&self) -> &R {
        self.machine.response(self.machine.root())
    }
}

pub trait QdpAgent<G, R> {
    fn act(&self, context: &QdpContext<G, R>) -> Result<QdpAction<G, R>, crate::graph::NoRule>;
}

impl<G, R, F> QdpAgent<G, R> for F
where
    F: Fn(&QdpContext<G, R>) -> Result<QdpAction<G, R>, crate::graph::NoRule>,
{
    fn act(&self, context: &QdpContext<G, R>) -> Result<QdpAction<G, R>, crate::graph::NoRule> {
        self(context)
    }
}

/// Drives `machine` with `agent` until it stops, errs, or `budget` actions were applied.
pub fn qdp_drive<G: Payload, R: QdpResponse>(
    mut machine: QdpMachine<G, R>,
    agent: &impl QdpAgent<G, R>,
    resolve: &mut dyn FnMut(Resolve<'_, G>) -> R,
    budget: usize,
) -> QdpRunResult<G, R> {
    let mut reason = QdpHalt::BudgetExhausted;
    for _ in 0..budget {
        let ctx = machine.context();
        let action = match agent.act(&ctx) {
            Ok(a) => a,
            Err(e) => {
                reason = QdpHalt::NoRule(e.0);
                break;
            }
        };
        if let Err(v) = machine.apply(action, resolve) {
            reason = QdpHalt::Violation(v);
            break;
        }
        if machine.is_stopped() {
            reason = QdpHalt::Stopped;
            break;
        }
    }
    QdpRunResult { reason, machine }
}

/// Deterministic depth-first rollout from a single root.
pub fn fqdp_run<G: Payload, R: QdpResponse>(
    root_goal: G,
    agent: &impl QdpAgent<G, R>,
    config: FqdpConfig,
    input: &mut dyn FnMut(&G) -> R,
    budget: usize,
) -> QdpRunResult<G, R> {
    let machine = QdpMachine::new(QdpMode::Fqdp, config, root_goal);
    qdp_drive(machine, agent, &mut plain_resolver(input), budget)
}

/// NFQDP rollout over a pre-built (or single-node) tree.
pub fn nfqdp_run<G: Payload, R: QdpResponse>(
    machine: QdpMachine<G, R>,
    agent: &impl QdpAgent<G, R>,
    input: &mut dyn FnMut(&G) -> R,
    budget: usize,
) -> QdpRunResult<G, R> {
    qdp_drive(machine, agent, &mut plain_resolver(input), budget)
}

fn plain_resolver<'a, G, R: QdpResponse>(
    input: &'a mut dyn FnMut(&G) -> R,
) -> impl FnMut(Resolve<'_, G>) -> R + 'a {
    move |req| match req {
        Resolve::Input(g) => input(g),
        Resolve::Retrieve(_) => R::empty(),
    }
}

/// Re-applies a recorded trace to a fresh machine, feeding back resolved responses.
pub fn qdp_replay<G: Payload, R: QdpResponse>(
    mut machine: QdpMachine<G, R>,
    trace: &[QdpEvent<G, R>],
) -> Result<QdpMachine<G, R>, QdpViolation> {
    for ev in trace {
        let recorded = ev.resolved.clone();
        let mut resolve = |_: Resolve<'_, G>| recorded.clone().unwrap_or_else(R::empty);
        machine.apply(ev.action.clone(), &mut resolve)?;
    }
    Ok(machine)
}

/// Tree description: nodes in creation order plus `(parent, child)` links.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeDescription<G, R> {
    pub nodes: Vec<(G, R)>,
    pub links: Vec<(usize, usize)>,
    pub focus: usize,
}

/// Instantiates a pre-built tree for an NFQDP rollout.
pub fn prebuild<G: Payload, R: QdpResponse>(
    desc: TreeDescription<G, R>,
    config: FqdpConfig,
) -> Result<QdpMachine<G, R>, TreeError> {
    let n = desc.nodes.len();
    if n == 0 {
        return Err(TreeError::Empty);
    }
    if desc.focus >= n {
        return Err(TreeError::FocusOutOfRange(desc.focus));
    }
    let mut parent = vec![None; n];
    let mut children = vec![Vec::new(); n];
    for &(p, c) in &desc.links {
        if p >= n || c >= n {
            return Err(TreeError::Dangling(p, c));
        }
        if p == c {
            return Err(TreeError::Cycle(p));
        }
        if parent[c].is_some() {
            return Err(TreeError::MultipleParents(c));
        }
        parent[c] = Some(p);
        children[p].push(c);
    }
    for ch in &mut children {
        ch.sort_unstable();
    }
    for start in 0..n {
        let mut seen = 0;
        let mut cur = start;
        while let Some(p) = parent[cur] {
            cur = p;
            seen += 1;
            if seen > n {
                return Err(TreeError::Cycle(start));
            }
        }
    }
    let roots: Vec<_> = (0..n).filter(|&i| parent[i].is_none()).collect();
    if roots.len() > 1 {
        return Err(TreeError::Disconnected(roots[1]));
    }
    let root = roots[0];
    let mut graph = QuestGraph::new(desc.nodes, &desc.links, desc.focus)
        .expect("validated tree description is a valid graph");
    graph.set_focus(desc.focus);
    Ok(QdpMachine::from_parts(
        QdpMode::Nfqdp,
        config,
        graph,
        parent,
        children,
        root,
    ))
}

/// Agent for the exhaustive executor: every action it is willing to take.
pub trait BranchingAgent<G, R> {
    fn options(&self, context: &QdpContext<G, R>) -> Vec<QdpAction<G, R>>;
}

impl<G, R, F> BranchingAgent<G, R> for F
where
    F: Fn(&QdpContext<G, R>) -> Vec<QdpAction<G, R>>,
{
    fn options(&self, context: &QdpContext<G, R>) -> Vec<QdpAction<G, R>> {
        self(context)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Exploration {
    pub accepted: bool,
    pub branches: usize,
    pub stopped_runs: usize,
}

/// Backtracks over every legal option the agent offers, deciding whether some
/// rollout stops in a state satisfying `accept`. Depth is bounded by `budget`.
pub fn nfqdp_explore<G: Payload, R: QdpResponse>(
    machine: QdpMachine<G, R>,
    agent: &impl BranchingAgent<G, R>,
    accept: &dyn Fn(&QdpMachine<G, R>) -> bool,
    budget: usize,
) -> Exploration {
    let mut result = Exploration::default();
    let mut stack = vec![(machine, 0usize)];
    let mut none = |_: Resolve<'_, G>| R::empty();
    while let Some((m, depth)) = stack.pop() {
        if m.is_stopped() {
            result.stopped_runs += 1;
            if accept(&m) {
                result.accepted = true;
                return result;
            }
            continue;
        }
        if depth == budget {
            continue;
        }
        let opts = agent.options(&m.context());
        for a in opts.into_iter().rev() {
            if m.legal(&a).is_err() {
                continue;
            }
            let mut next = m.clone();
            if next.apply(a, &mut none).is_ok() {
                result.branches += 1;
                stack.push((next, depth + 1));
            }
        }
    }
    result
}
