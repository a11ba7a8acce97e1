//! Finite-context language models and finite-state machines simulate each other.
//!
//! FSM → LM: a context of two tokens `(state, symbol)` predicts the next state.
//! LM → FSM: each length-C window is a state; consuming a symbol appends it and
//! the generated token in one transition.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Debug;

use thiserror::Error;

use crate::automata::{lm_run, Fsm, LmError, LmTable};

pub const CONTEXT: usize = 2;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FsmToken<S, A> {
    State(S),
    Symbol(A),
    /// Sink for transitions the FSM leaves undefined; absent for total machines.
    Dead,
}

/// Vocabulary `S ∪ Σ` (plus a dead token when δ is partial), `δ_lm(s, a) = δ_fsm(s, a)`.
/// Contexts the schedule never produces idle on their last state.
pub fn lm_from_fsm<S, A>(fsm: &Fsm<S, A>) -> LmTable<FsmToken<S, A>>
where
    S: Ord + Clone + Debug,
    A: Ord + Clone + Debug,
{
    use FsmToken::*;
    let partial = !fsm.missing_transitions().is_empty();
    let mut vocabulary: BTreeSet<FsmToken<S, A>> = fsm.states.iter().cloned().map(State).collect();
    vocabulary.extend(fsm.alphabet.iter().cloned().map(Symbol));
    if partial {
        vocabulary.insert(Dead);
    }
    let mut delta = BTreeMap::new();
    for x in &vocabulary {
        for y in &vocabulary {
            let next = match (x, y) {
                (State(s), Symbol(a)) => fsm
                    .delta
                    .get(&(s.clone(), a.clone()))
                    .cloned()
                    .map_or(Dead, State),
                (Dead, _) | (_, Dead) => Dead,
                (_, State(s)) => State(s.clone()),
                (Symbol(_), Symbol(_)) => State(fsm.start.clone()),
            };
            delta.insert(vec![x.clone(), y.clone()], next);
        }
    }
    LmTable {
        vocabulary,
        context_length: CONTEXT,
        delta,
        accepting: fsm.accepting.iter().cloned().map(State).collect(),
    }
}

pub fn lm_initial_context<S: Ord + Clone, A: Ord + Clone>(fsm: &Fsm<S, A>) -> Vec<FsmToken<S, A>> {
    vec![FsmToken::State(fsm.start.clone()); CONTEXT]
}

/// Feeds one symbol per step and accepts iff the last generated token is accepting.
pub fn lm_accepts<T: Ord + Clone + Debug>(
    lm: &LmTable<T>,
    initial_context: &[T],
    input: &[T],
) -> Result<bool, LmError> {
    let schedule: Vec<(usize, T)> = input.iter().cloned().enumerate().collect();
    let seq = lm_run(lm, initial_context, &schedule, input.len())?;
    Ok(seq.last().is_some_and(|t| lm.accepting.contains(t)))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LmFsmError {
    #[error("more than {budget} reachable contexts")]
    Overflow { budget: usize },
    #[error(transparent)]
    Lm(#[from] LmError),
}

/// States are the length-C windows reachable from `initial_context` under
/// `inputs`; a generation step is folded into the consuming transition.
pub fn fsm_from_lm<T: Ord + Clone + Debug>(
    lm: &LmTable<T>,
    initial_context: &[T],
    inputs: &[T],
    budget: usize,
) -> Result<Fsm<Vec<T>, T>, LmFsmError> {
    let c = lm.context_length;
    if initial_context.len() != c {
        return Err(LmError::ContextLength {
            got: initial_context.len(),
            expected: c,
        }
        .into());
    }
    let start = initial_context.to_vec();
    let mut states = BTreeSet::from([start.clone()]);
    let mut delta = BTreeMap::new();
    let mut queue = VecDeque::from([start.clone()]);
    while let Some(w) = queue.pop_front() {
        for a in inputs {
            let mut seq = w.clone();
            seq.push(a.clone());
            let g = lm.next(&seq[seq.len() - c..])?;
            seq.push(g);
            let next = seq[seq.len() - c..].to_vec();
            if states.insert(next.clone()) {
                if states.len() > budget {
                    return Err(LmFsmError::Overflow { budget });
                }
                queue.push_back(next.clone());
            }
            delta.insert((w.clone(), a.clone()), next);
        }
    }
    let accepting = states
        .iter()
        .filter(|w| w.last().is_some_and(|t| lm.accepting.contains(t)))
        .cloned()
        .collect();
    Ok(Fsm {
        states,
        alphabet: inputs.iter().cloned().collect(),
        delta,
        start,
        accepting,
    })
}

/// Symbol tokens of an FSM-derived LM, in alphabet order.
pub fn symbol_tokens<S: Ord, A: Ord + Clone>(fsm: &Fsm<S, A>) -> Vec<FsmToken<S, A>> {
    fsm.alphabet.iter().cloned().map(FsmToken::Symbol).collect()
}
