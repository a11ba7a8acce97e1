//! The Quest Graph kernel: an undirected graph of `(goal, response)` nodes
//! with a focus pointer, observed through a bounded local context.

use std::collections::hash_map::DefaultHasher;
use std::fmt::Debug;
use std::hash::{Hash, Hasher};

use thiserror::Error;

/// Dense node identifier; ids are assigned in creation order.
pub type NodeId = usize;

/// Goals and responses are opaque values from construction-declared alphabets.
pub trait Payload: Clone + Eq + Hash + Debug {}
impl<T: Clone + Eq + Hash + Debug> Payload for T {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuestNode<G, R> {
    pub id: NodeId,
    pub goal: G,
    pub response: R,
    pub created_at: u64,
    pub updated_at: u64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("a quest graph needs at least one node")]
    Empty,
    #[error("seed edge ({0}, {1}) references a missing node")]
    DanglingEdge(usize, usize),
    #[error("seed edge ({0}, {0}) is a self-loop")]
    SelfEdge(usize),
    #[error("focus index {0} is out of range")]
    FocusOutOfRange(usize),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ActionError {
    #[error("edge pointer {0} does not name a context member")]
    PointerOutOfContext(usize),
    #[error("discover must attach the new node to at least one context member")]
    NoAttachTarget,
    #[error("discover attaches {got} pointers but the context allows at most {max}")]
    TooManyAttachments { got: usize, max: usize },
    #[error("context was observed at focus {observed} but the graph focus is {actual}")]
    StaleContext { observed: NodeId, actual: NodeId },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuestGraph<G, R> {
    nodes: Vec<QuestNode<G, R>>,
    // kept sorted ascending, which is also creation order
    adjacency: Vec<Vec<NodeId>>,
    edge_count: usize,
    focus: NodeId,
    clock: u64,
    truncations: u64,
}

impl<G: Payload, R: Payload> QuestGraph<G, R> {
    /// Builds a graph from seed nodes (ids follow seed order) and index-pair edges.
    pub fn new(
        seed_nodes: Vec<(G, R)>,
        seed_edges: &[(usize, usize)],
        focus_index: usize,
    ) -> Result<Self, GraphError> {
        if seed_nodes.is_empty() {
            return Err(GraphError::Empty);
        }
        if focus_index >= seed_nodes.len() {
            return Err(GraphError::FocusOutOfRange(focus_index));
        }
        let n = seed_nodes.len();
        let nodes = seed_nodes
            .into_iter()
            .enumerate()
            .map(|(id, (goal, response))| QuestNode {
                id,
                goal,
                response,
                created_at: 0,
                updated_at: 0,
            })
            .collect();
        let mut graph = QuestGraph {
            nodes,
            adjacency: vec![Vec::new(); n],
            edge_count: 0,
            focus: focus_index,
            clock: 0,
            truncations: 0,
        };
        for &(a, b) in seed_edges {
            if a >= n || b >= n {
                return Err(GraphError::DanglingEdge(a, b));
            }
            if a == b {
                return Err(GraphError::SelfEdge(a));
            }
            graph.add_edge(a, b);
        }
        Ok(graph)
    }

    /// Single-node graph focused on that node.
    pub fn singleton(goal: G, response: R) -> Self {
        Self::new(vec![(goal, response)], &[], 0).expect("singleton graph is valid")
    }

    pub fn focus(&self) -> NodeId {
        self.focus
    }

    pub fn node(&self, id: NodeId) -> &QuestNode<G, R> {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[QuestNode<G, R>] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn neighbors(&self, id: NodeId) -> &[NodeId] {
        &self.adjacency[id]
    }

    pub fn degree(&self, id: NodeId) -> usize {
        self.adjacency[id].len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Edges as `(low, high)` pairs in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, ns)| ns.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    /// Number of observations that hid at least one neighbor.
    pub fn truncations(&self) -> u64 {
        self.truncations
    }

    /// Observes the focus and up to `capacity` neighbors picked by `selector`.
    pub fn observe<S: NeighborSelector<G, R> + ?Sized>(
        &mut self,
        capacity: usize,
        selector: &S,
    ) -> LocalContext<G, R> {
        let mut picked = selector.select(self, self.focus, capacity);
        if picked.len() > capacity {
            picked.truncate(capacity);
        }
        if picked.len() < self.degree(self.focus) {
            self.truncations += 1;
        }
        let snapshot = |id: NodeId| {
            let n = &self.nodes[id];
            ContextNode {
                goal: n.goal.clone(),
                response: n.response.clone(),
            }
        };
        LocalContext {
            focus: snapshot(self.focus),
            neighbors: picked.iter().map(|&id| snapshot(id)).collect(),
            focus_id: self.focus,
            neighbor_ids: picked,
        }
    }

    /// Applies one agent action against a context previously observed on this graph.
    pub fn apply(
        &mut self,
        action: &AgentAction<G, R>,
        context: &LocalContext<G, R>,
    ) -> Result<StepOutcome, ActionError> {
        if context.focus_id != self.focus {
            return Err(ActionError::StaleContext {
                observed: context.focus_id,
                actual: self.focus,
            });
        }
        match action {
            AgentAction::Discover {
                goal,
                response,
                attach,
            } => {
                if attach.is_empty() {
                    return Err(ActionError::NoAttachTarget);
                }
                let max = context.neighbors.len() + 1;
                if attach.len() > max {
                    return Err(ActionError::TooManyAttachments {
                        got: attach.len(),
                        max,
                    });
                }
                let targets = attach
                    .iter()
                    .map(|p| context.resolve(*p))
                    .collect::<Result<Vec<_>, _>>()?;
                self.tick();
                let id = self.push_node(goal.clone(), response.clone());
                for t in targets {
                    self.add_edge(id, t);
                }
                Ok(StepOutcome::Continue { created: Some(id) })
            }
            AgentAction::RespondMove { response, to } => {
                let target = context.resolve(*to)?;
                self.tick();
                self.write_response(self.focus, response.clone());
                self.focus = target;
                Ok(StepOutcome::Continue { created: None })
            }
            AgentAction::Stop => Ok(StepOutcome::Stopped),
        }
    }

    pub(crate) fn tick(&mut self) {
        self.clock += 1;
    }

    pub(crate) fn push_node(&mut self, goal: G, response: R) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(QuestNode {
            id,
            goal,
            response,
            created_at: self.clock,
            updated_at: self.clock,
        });
        self.adjacency.push(Vec::new());
        id
    }

    pub(crate) fn add_edge(&mut self, a: NodeId, b: NodeId) {
        debug_assert_ne!(a, b);
        if let Err(pos) = self.adjacency[a].binary_search(&b) {
            self.adjacency[a].insert(pos, b);
            let pos_b = self.adjacency[b].binary_search(&a).unwrap_err();
            self.adjacency[b].insert(pos_b, a);
            self.edge_count += 1;
        }
    }

    pub(crate) fn write_response(&mut self, id: NodeId, response: R) {
        let node = &mut self.nodes[id];
        node.response = response;
        node.updated_at = self.clock;
    }

    pub(crate) fn set_focus(&mut self, id: NodeId) {
        self.focus = id;
    }

    pub(crate) fn note_truncation(&mut self) {
        self.truncations += 1;
    }
}

/// Picks which neighbors of the focus enter the local context, in order.
pub trait NeighborSelector<G, R> {
    fn select(&self, graph: &QuestGraph<G, R>, focus: NodeId, capacity: usize) -> Vec<NodeId>;
}

impl<G, R, F> NeighborSelector<G, R> for F
where
    F: Fn(&QuestGraph<G, R>, NodeId, usize) -> Vec<NodeId>,
{
    fn select(&self, graph: &QuestGraph<G, R>, focus: NodeId, capacity: usize) -> Vec<NodeId> {
        self(graph, focus, capacity)
    }
}

/// Ascending creation time, truncated at capacity.
#[derive(Clone, Copy, Debug, Default)]
pub struct CreationOrder;

impl<G, R> NeighborSelector<G, R> for CreationOrder {
    fn select(&self, graph: &QuestGraph<G, R>, focus: NodeId, capacity: usize) -> Vec<NodeId> {
        graph.adjacency[focus].iter().copied().take(capacity).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ContextNode<G, R> {
    pub goal: G,
    pub response: R,
}

/// What the agent sees: the focus and an ordered list of neighbors.
///
/// Node ids are kept private so agents stay stateless with respect to the
/// unbounded identity space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalContext<G, R> {
    pub focus: ContextNode<G, R>,
    pub neighbors: Vec<ContextNode<G, R>>,
    focus_id: NodeId,
    neighbor_ids: Vec<NodeId>,
}

impl<G: Hash, R: Hash> LocalContext<G, R> {
    pub fn digest(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.focus.hash(&mut h);
        self.neighbors.hash(&mut h);
        h.finish()
    }
}

impl<G, R> LocalContext<G, R> {
    fn resolve(&self, ptr: EdgePtr) -> Result<NodeId, ActionError> {
        match ptr {
            EdgePtr::SelfLoop => Ok(self.focus_id),
            EdgePtr::Neighbor(i) => self
                .neighbor_ids
                .get(i)
                .copied()
                .ok_or(ActionError::PointerOutOfContext(i)),
        }
    }

    pub(crate) fn focus_id(&self) -> NodeId {
        self.focus_id
    }
}

/// Points at the focus itself or at the i-th neighbor of the context.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgePtr {
    SelfLoop,
    Neighbor(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AgentAction<G, R> {
    Discover {
        goal: G,
        response: R,
        attach: Vec<EdgePtr>,
    },
    RespondMove {
        response: R,
        to: EdgePtr,
    },
    Stop,
}

impl<G, R> AgentAction<G, R> {
    pub fn kind(&self) -> &'static str {
        match self {
            AgentAction::Discover { .. } => "discover",
            AgentAction::RespondMove { .. } => "respond",
            AgentAction::Stop => "stop",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Continue { created: Option<NodeId> },
    Stopped,
}

/// Returned by an agent whose rule table has no entry for the context.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("no agent rule matches: {0}")]
pub struct NoRule(pub String);

pub trait Agent<G, R> {
    fn act(&self, context: &LocalContext<G, R>) -> Result<AgentAction<G, R>, NoRule>;
}

impl<G, R, F> Agent<G, R> for F
where
    F: Fn(&LocalContext<G, R>) -> Result<AgentAction<G, R>, NoRule>,
{
    fn act(&self, context: &LocalContext<G, R>) -> Result<AgentAction<G, R>, NoRule> {
        self(context)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HaltReason {
    Stopped,
    BudgetExhausted,
    IllegalAction(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent<A> {
    pub step: usize,
    pub focus: NodeId,
    pub context_digest: u64,
    pub action: A,
    pub created: Option<NodeId>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ActionCounts {
    pub discover: usize,
    pub respond_move: usize,
    pub stop: usize,
}

#[derive(Clone, Debug)]
pub struct RunResult<G, R> {
    pub reason: HaltReason,
    pub graph: QuestGraph<G, R>,
    pub trace: Vec<TraceEvent<AgentAction<G, R>>>,
    pub counts: ActionCounts,
}

impl<G, R> RunResult<G, R> {
    pub fn steps(&self) -> usize {
        self.trace.len()
    }
}

/// Runs observe → agent → apply until the agent stops or the budget runs out.
pub fn run<G: Payload, R: Payload>(
    graph: QuestGraph<G, R>,
    agent: &impl Agent<G, R>,
    capacity: usize,
    budget: usize,
) -> RunResult<G, R> {
    run_with_selector(graph, agent, capacity, budget, &CreationOrder)
}

pub fn run_with_selector<G: Payload, R: Payload, S: NeighborSelector<G, R> + ?Sized>(
    mut graph: QuestGraph<G, R>,
    agent: &impl Agent<G, R>,
    capacity: usize,
    budget: usize,
    selector: &S,
) -> RunResult<G, R> {
    let mut trace = Vec::new();
    let mut counts = ActionCounts::default();
    let mut reason = HaltReason::BudgetExhausted;
    for step in 0..budget {
        let ctx = graph.observe(capacity, selector);
        let action = match agent.act(&ctx) {
            Ok(a) => a,
            Err(e) => {
                reason = HaltReason::IllegalAction(e.to_string());
                break;
            }
        };
        let outcome = match graph.apply(&action, &ctx) {
            Ok(o) => o,
            Err(e) => {
                reason = HaltReason::IllegalAction(e.to_string());
                break;
            }
        };
        match &action {
            AgentAction::Discover { .. } => counts.discover += 1,
            AgentAction::RespondMove { .. } => counts.respond_move += 1,
            AgentAction::Stop => counts.stop += 1,
        }
        let created = match outcome {
            StepOutcome::Continue { created } => created,
            StepOutcome::Stopped => None,
        };
        trace.push(TraceEvent {
            step,
            focus: ctx.focus_id(),
            context_digest: ctx.digest(),
            action,
            created,
        });
        if outcome == StepOutcome::Stopped {
            reason = HaltReason::Stopped;
            break;
        }
    }
    RunResult {
        reason,
        graph,
        trace,
        counts,
    }
}

/// Re-applies a recorded action sequence to the initial graph.
pub fn replay<G: Payload, R: Payload, S: NeighborSelector<G, R> + ?Sized>(
    mut graph: QuestGraph<G, R>,
    trace: &[TraceEvent<AgentAction<G, R>>],
    capacity: usize,
    selector: &S,
) -> Result<QuestGraph<G, R>, ActionError> {
    for ev in trace {
        let ctx = graph.observe(capacity, selector);
        if graph.apply(&ev.action, &ctx)? == StepOutcome::Stopped {
            break;
        }
    }
    Ok(graph)
}
