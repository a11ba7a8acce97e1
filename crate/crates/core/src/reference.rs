//! Reference-augmented QDP: every node carries a reference computed by τ from
//! its parent's reference and its own goal, and a reference graph caches the
//! latest written response per reference for the retrieve action.

use std::collections::BTreeMap;
use std::fmt::Debug;

use thiserror::Error;

use crate::graph::{NodeId, Payload};
use crate::qdp::{
    FqdpConfig, QdpAction, QdpAgent, QdpHalt, QdpMachine, QdpMode, QdpResponse, QdpViolation,
    Resolve,
};

/// Deterministic reference generator `(parent reference, goal) ↦ reference`.
pub type TauFn<T, G> = fn(&T, &G) -> T;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefEntry<R> {
    pub response: R,
    pub updated_at: u64,
    /// False until the first explicit write; unwritten entries retrieve as ε.
    pub written: bool,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("write at time {time} does not follow the last write at {last}")]
pub struct NonMonotonicTime {
    pub time: u64,
    pub last: u64,
}

/// Latest response per reference, ordered by reference.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReferenceGraph<T: Ord, R> {
    entries: BTreeMap<T, RefEntry<R>>,
    head: Option<T>,
    last_time: u64,
}

impl<T: Ord + Clone + Debug, R: QdpResponse> Default for ReferenceGraph<T, R> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Ord + Clone + Debug, R: QdpResponse> ReferenceGraph<T, R> {
    pub fn new() -> Self {
        ReferenceGraph {
            entries: BTreeMap::new(),
            head: None,
            last_time: 0,
        }
    }

    /// Inserts an unwritten ε entry if the reference is new.
    pub fn ensure(&mut self, r: &T) {
        self.entries.entry(r.clone()).or_insert_with(|| RefEntry {
            response: R::empty(),
            updated_at: 0,
            written: false,
        });
    }

    pub fn record_response(&mut self, r: &T, response: R, time: u64) -> Result<(), NonMonotonicTime> {
        if time <= self.last_time && self.last_time != 0 {
            return Err(NonMonotonicTime {
                time,
                last: self.last_time,
            });
        }
        self.last_time = time;
        self.entries.insert(
            r.clone(),
            RefEntry {
                response,
                updated_at: time,
                written: true,
            },
        );
        Ok(())
    }

    /// Latest written response, or ε when the reference was never written.
    pub fn retrieve(&self, r: &T) -> R {
        match self.entries.get(r) {
            Some(e) if e.written => e.response.clone(),
            _ => R::empty(),
        }
    }

    pub fn entry(&self, r: &T) -> Option<&RefEntry<R>> {
        self.entries.get(r)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&T, &RefEntry<R>)> {
        self.entries.iter()
    }

    pub fn written(&self) -> impl Iterator<Item = (&T, &R)> {
        self.entries
            .iter()
            .filter(|(_, e)| e.written)
            .map(|(k, e)| (k, &e.response))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn head(&self) -> Option<&T> {
        self.head.as_ref()
    }

    /// Timestamp of the latest write, 0 before any write.
    pub fn last_time(&self) -> u64 {
        self.last_time
    }

    pub(crate) fn set_head(&mut self, r: T) {
        self.head = Some(r);
    }
}

/// Applies τ and makes sure the reference exists in the graph.
pub fn assign_reference<T: Ord + Clone + Debug, G, R: QdpResponse>(
    parent_ref: &T,
    goal: &G,
    tau: TauFn<T, G>,
    refgraph: &mut ReferenceGraph<T, R>,
) -> T {
    let r = tau(parent_ref, goal);
    refgraph.ensure(&r);
    r
}

/// A QDP rollout paired with per-node references and the reference graph.
#[derive(Clone, Debug)]
pub struct RqdpMachine<T: Ord, G, R> {
    qdp: QdpMachine<G, R>,
    refs: Vec<T>,
    refgraph: ReferenceGraph<T, R>,
    tau: TauFn<T, G>,
    weighted_retrieve_cost: f64,
    /// Added to the kernel clock so writes stay monotone across handoffs.
    epoch: u64,
}

impl<T: Ord + Clone + Debug, G: Payload, R: QdpResponse> RqdpMachine<T, G, R> {
    pub fn new(mode: QdpMode, config: FqdpConfig, root_goal: G, root_ref: T, tau: TauFn<T, G>) -> Self {
        Self::with_refgraph(mode, config, root_goal, root_ref, tau, ReferenceGraph::new())
    }

    /// Fresh rollout that continues from an existing reference graph, as when
    /// a setup agent hands over to the main agent.
    pub fn with_refgraph(
        mode: QdpMode,
        config: FqdpConfig,
        root_goal: G,
        root_ref: T,
        tau: TauFn<T, G>,
        mut refgraph: ReferenceGraph<T, R>,
    ) -> Self {
        let mut qdp = QdpMachine::new(mode, config, root_goal);
        qdp.enable_retrieve();
        let epoch = refgraph.last_time();
        refgraph.ensure(&root_ref);
        refgraph.set_head(root_ref.clone());
        RqdpMachine {
            qdp,
            refs: vec![root_ref],
            refgraph,
            tau,
            weighted_retrieve_cost: 0.0,
            epoch,
        }
    }

    pub fn qdp(&self) -> &QdpMachine<G, R> {
        &self.qdp
    }

    pub fn refgraph(&self) -> &ReferenceGraph<T, R> {
        &self.refgraph
    }

    pub fn into_refgraph(self) -> ReferenceGraph<T, R> {
        self.refgraph
    }

    pub fn reference(&self, id: NodeId) -> &T {
        &self.refs[id]
    }

    pub fn focus_ref(&self) -> &T {
        &self.refs[self.qdp.focus()]
    }

    /// Sum over retrieves of log₂ of the number of active references.
    pub fn weighted_retrieve_cost(&self) -> f64 {
        self.weighted_retrieve_cost
    }

    pub fn apply(
        &mut self,
        action: QdpAction<G, R>,
        input: &mut dyn FnMut(&G) -> R,
    ) -> Result<Option<NodeId>, QdpViolation> {
        self.qdp.legal(&action)?;
        let focus = self.qdp.focus();
        let parent_ref = self.refs[focus].clone();
        let new_ref = match &action {
            QdpAction::DiscoverInput { goal, .. }
            | QdpAction::DiscoverSubquest { goal }
            | QdpAction::Retrieve { goal } => Some(assign_reference(
                &parent_ref,
                goal,
                self.tau,
                &mut self.refgraph,
            )),
            _ => None,
        };
        if matches!(action, QdpAction::Retrieve { .. }) {
            self.weighted_retrieve_cost += (self.refgraph.len().max(2) as f64).log2();
        }
        let refgraph = &self.refgraph;
        let lookup = new_ref.clone();
        let mut resolve = |req: Resolve<'_, G>| match req {
            Resolve::Input(g) => input(g),
            Resolve::Retrieve(_) => refgraph.retrieve(lookup.as_ref().unwrap()),
        };
        let write = match &action {
            QdpAction::DiscoverInput { response: Some(r), .. } => Some(r.clone()),
            QdpAction::CompleteQuest { response } => Some(response.clone()),
            _ => None,
        };
        let is_input = matches!(action, QdpAction::DiscoverInput { .. });
        let created = self.qdp.apply(action, &mut resolve)?;
        let time = self.epoch + self.qdp.graph().clock();
        if let Some(c) = created {
            self.refs.push(new_ref.clone().unwrap());
            debug_assert_eq!(self.refs.len(), c + 1);
        }
        let (target, value) = if is_input {
            let c = created.unwrap();
            (self.refs[c].clone(), self.qdp.response(c).clone())
        } else {
            (parent_ref, write.unwrap_or_else(R::empty))
        };
        if value.is_complete() {
            self.refgraph
                .record_response(&target, value, time)
                .expect("kernel clock is monotone");
        }
        self.refgraph.set_head(self.refs[self.qdp.focus()].clone());
        Ok(created)
    }
}

#[derive(Clone, Debug)]
pub struct RqdpRunResult<T: Ord, G, R> {
    pub reason: QdpHalt,
    pub machine: RqdpMachine<T, G, R>,
}

/// Drives an RQDP machine; returns the machine with its final reference graph.
pub fn rqdp_run<T: Ord + Clone + Debug, G: Payload, R: QdpResponse>(
    mut machine: RqdpMachine<T, G, R>,
    agent: &impl QdpAgent<G, R>,
    input: &mut dyn FnMut(&G) -> R,
    budget: usize,
) -> RqdpRunResult<T, G, R> {
    let mut reason = QdpHalt::BudgetExhausted;
    for _ in 0..budget {
        let ctx = machine.qdp.context();
        let action = match agent.act(&ctx) {
            Ok(a) => a,
            Err(e) => {
                reason = QdpHalt::NoRule(e.0);
                break;
            }
        };
        if let Err(v) = machine.apply(action, input) {
            reason = QdpHalt::Violation(v);
            break;
        }
        if machine.qdp.is_stopped() {
            reason = QdpHalt::Stopped;
            break;
        }
    }
    RqdpRunResult { reason, machine }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NoRule;
    use crate::qdp::QdpContext;

    #[derive(Clone, Debug, PartialEq, Eq, Hash)]
    enum Val {
        Empty,
        Pi,
        N(u64),
    }

    impl QdpResponse for Val {
        fn empty() -> Self {
            Val::Empty
        }
        fn parent_mark() -> Self {
            Val::Pi
        }
    }

    fn tm_tau(xi: &u64, goal: &char) -> u64 {
        if *goal == 'q' {
            xi + 1
        } else {
            *xi
        }
    }

    #[test]
    fn assign_reference_tm_tau() {
        let mut g: ReferenceGraph<u64, Val> = ReferenceGraph::new();
        assert_eq!(assign_reference(&5, &'q', tm_tau, &mut g), 6);
        assert_eq!(assign_reference(&5, &'f', tm_tau, &mut g), 5);
        assert_eq!(assign_reference(&0, &'q', tm_tau, &mut g), 1);
        assert_eq!(g.len(), 3);
        assert_eq!(g.retrieve(&6), Val::Empty);
    }

    #[test]
    fn record_response_last_write_wins() {
        let mut g: ReferenceGraph<u64, Val> = ReferenceGraph::new();
        g.record_response(&3, Val::N(1), 1).unwrap();
        g.record_response(&3, Val::N(2), 2).unwrap();
        assert_eq!(g.retrieve(&3), Val::N(2));
        g.record_response(&9, Val::N(5), 3).unwrap();
        assert_eq!(g.retrieve(&9), Val::N(5));
        assert!(g.record_response(&9, Val::N(6), 3).is_err());
        assert_eq!(g.retrieve(&4), Val::Empty);
    }

    fn fib_tau(_: &u32, goal: &u32) -> u32 {
        *goal
    }

    fn fib_agent(c: &QdpContext<u32, Val>) -> Result<QdpAction<u32, Val>, NoRule> {
        let k = c.focus.goal;
        if c.is_root() && c.focus.response != Val::Empty {
            return Ok(QdpAction::Stop);
        }
        if k <= 2 {
            return Ok(QdpAction::CompleteQuest { response: Val::N(1) });
        }
        let val = |i: usize| match c.children.get(i).map(|n| &n.response) {
            Some(Val::N(v)) => Some(*v),
            _ => None,
        };
        Ok(match c.child_count {
            0 => QdpAction::DiscoverSubquest { goal: k - 1 },
            1 => QdpAction::Retrieve { goal: k - 2 },
            2 => match val(1) {
                Some(b) => QdpAction::CompleteQuest { response: Val::N(val(0).unwrap() + b) },
                None => QdpAction::DiscoverSubquest { goal: k - 2 },
            },
            _ => QdpAction::CompleteQuest { response: Val::N(val(0).unwrap() + val(2).unwrap()) },
        })
    }

    #[test]
    fn fibonacci_rollout_reuses_cached_values() {
        let m = RqdpMachine::new(QdpMode::Fqdp, FqdpConfig::new(3, 4), 5u32, 5u32, fib_tau);
        let out = rqdp_run(m, &fib_agent, &mut |_| Val::Empty, 200);
        assert_eq!(out.reason, QdpHalt::Stopped);
        let m = &out.machine;
        assert_eq!(*m.qdp().response(0), Val::N(5));
        let find = |goal: u32| {
            (0..m.qdp().graph().len())
                .find(|&i| *m.qdp().goal(i) == goal && !m.qdp().children(i).is_empty())
                .unwrap()
        };
        assert_eq!(*m.qdp().response(find(4)), Val::N(3));
        assert_eq!(*m.qdp().response(find(3)), Val::N(2));
        let retrieved_f3 = m
            .qdp()
            .trace()
            .iter()
            .find(|e| matches!(e.action, QdpAction::Retrieve { goal: 3 }))
            .unwrap();
        assert_eq!(retrieved_f3.resolved, Some(Val::N(2)));
        assert_eq!(m.refgraph().retrieve(&5), Val::N(5));
    }

    #[test]
    fn retrieve_unwritten_reference_gives_empty() {
        let agent = |c: &QdpContext<u32, Val>| -> Result<_, NoRule> {
            Ok(if c.child_count == 0 {
                QdpAction::Retrieve { goal: 9 }
            } else {
                QdpAction::Stop
            })
        };
        let m = RqdpMachine::new(QdpMode::Fqdp, FqdpConfig::new(1, 2), 0u32, 0u32, fib_tau);
        let out = rqdp_run(m, &agent, &mut |_| Val::Empty, 10);
        assert_eq!(out.machine.qdp().response(1), &Val::Empty);
        assert_eq!(out.machine.refgraph().len(), 2);
    }
}
