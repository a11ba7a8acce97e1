use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;

/// Deterministic finite-state machine with a total transition function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fsm<S: Ord, A: Ord> {
    pub states: BTreeSet<S>,
    pub alphabet: BTreeSet<A>,
    pub delta: BTreeMap<(S, A), S>,
    pub start: S,
    pub accepting: BTreeSet<S>,
}

impl<S: Ord + Clone + Debug, A: Ord + Clone + Debug> Fsm<S, A> {
    /// `(state, symbol)` pairs for which no transition is defined.
    pub fn missing_transitions(&self) -> Vec<(S, A)> {
        let mut out = Vec::new();
        for s in &self.states {
            for a in &self.alphabet {
                if !self.delta.contains_key(&(s.clone(), a.clone())) {
                    out.push((s.clone(), a.clone()));
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FsmOutcome<S> {
    pub accepted: bool,
    pub states: Vec<S>,
    /// Set when the run stopped on a symbol outside the alphabet or a missing transition.
    pub error: Option<String>,
}

pub fn fsm_run<S, A>(fsm: &Fsm<S, A>, input: &[A]) -> FsmOutcome<S>
where
    S: Ord + Clone + Debug,
    A: Ord + Clone + Debug,
{
    let mut state = fsm.start.clone();
    let mut states = vec![state.clone()];
    for a in input {
        if !fsm.alphabet.contains(a) {
            return FsmOutcome {
                accepted: false,
                states,
                error: Some(format!("symbol {a:?} is not in the alphabet")),
            };
        }
        match fsm.delta.get(&(state.clone(), a.clone())) {
            Some(next) => state = next.clone(),
            None => {
                return FsmOutcome {
                    accepted: false,
                    states,
                    error: Some(format!("no transition from {state:?} on {a:?}")),
                }
            }
        }
        states.push(state.clone());
    }
    FsmOutcome {
        accepted: fsm.accepting.contains(&state),
        states,
        error: None,
    }
}
