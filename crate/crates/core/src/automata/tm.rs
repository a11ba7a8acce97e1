use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Move {
    L,
    R,
}

impl Move {
    pub fn opposite(self) -> Move {
        match self {
            Move::L => Move::R,
            Move::R => Move::L,
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Move::L => "L",
            Move::R => "R",
        })
    }
}

/// Deterministic single-tape machine over a one-way infinite tape.
///
/// `delta` may be partial; a missing entry halts the machine in rejection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TuringMachine {
    pub states: BTreeSet<String>,
    pub tape_alphabet: BTreeSet<char>,
    pub input_alphabet: BTreeSet<char>,
    pub blank: char,
    pub start: String,
    pub accepting: BTreeSet<String>,
    pub delta: BTreeMap<(String, char), (String, char, Move)>,
}

impl TuringMachine {
    /// Builds a machine from a rule list; state and symbol sets are inferred.
    pub fn from_rules(
        start: &str,
        accepting: &[&str],
        blank: char,
        input_alphabet: &[char],
        rules: &[(&str, char, &str, char, Move)],
    ) -> Self {
        let mut states: BTreeSet<String> = BTreeSet::new();
        let mut tape: BTreeSet<char> = input_alphabet.iter().copied().collect();
        tape.insert(blank);
        states.insert(start.to_string());
        states.extend(accepting.iter().map(|s| s.to_string()));
        let mut delta = BTreeMap::new();
        for &(s, a, t, b, m) in rules {
            states.insert(s.to_string());
            states.insert(t.to_string());
            tape.insert(a);
            tape.insert(b);
            delta.insert((s.to_string(), a), (t.to_string(), b, m));
        }
        TuringMachine {
            states,
            tape_alphabet: tape,
            input_alphabet: input_alphabet.iter().copied().collect(),
            blank,
            start: start.to_string(),
            accepting: accepting.iter().map(|s| s.to_string()).collect(),
            delta,
        }
    }

    pub fn step(&self, state: &str, symbol: char) -> Option<&(String, char, Move)> {
        self.delta.get(&(state.to_string(), symbol))
    }

    pub fn is_accepting(&self, state: &str) -> bool {
        self.accepting.contains(state)
    }

    /// Structural diagnostics; empty when the machine is well formed.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.input_alphabet.is_subset(&self.tape_alphabet) {
            out.push("input alphabet is not a subset of the tape alphabet".into());
        }
        if self.input_alphabet.contains(&self.blank) {
            out.push(format!("blank {:?} is an input symbol", self.blank));
        }
        if !self.tape_alphabet.contains(&self.blank) {
            out.push(format!("blank {:?} is not a tape symbol", self.blank));
        }
        if !self.states.contains(&self.start) {
            out.push(format!("start state {} is undeclared", self.start));
        }
        for s in &self.accepting {
            if !self.states.contains(s) {
                out.push(format!("accepting state {s} is undeclared"));
            }
        }
        for ((s, a), (t, b, _)) in &self.delta {
            if !self.states.contains(s) || !self.states.contains(t) {
                out.push(format!("rule ({s}, {a}) names an undeclared state"));
            }
            if !self.tape_alphabet.contains(a) || !self.tape_alphabet.contains(b) {
                out.push(format!("rule ({s}, {a}) names an undeclared symbol"));
            }
            if self.accepting.contains(s) {
                out.push(format!("rule ({s}, {a}) leaves an accepting state"));
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TmStatus {
    Accepted,
    Rejected,
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TmOutcome {
    pub status: TmStatus,
    pub state: String,
    /// Cells 0.. up to the furthest visited or written cell.
    pub tape: Vec<char>,
    pub head: usize,
    pub steps: usize,
    pub moves: Vec<Move>,
    /// Head position before each step, then the final position.
    pub heads: Vec<usize>,
}

impl TmOutcome {
    /// Tape contents with trailing blanks removed.
    pub fn tape_string(&self, blank: char) -> String {
        let s: String = self.tape.iter().collect();
        s.trim_end_matches(blank).to_string()
    }

    /// Non-blank cells keyed by position.
    pub fn non_blank(&self, blank: char) -> BTreeMap<i64, char> {
        self.tape
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != blank)
            .map(|(i, &c)| (i as i64, c))
            .collect()
    }
}

/// Direct simulation. The head starts on cell 0; moving left of cell 0 rejects.
pub fn tm_run(tm: &TuringMachine, input: &str, budget: usize) -> TmOutcome {
    let mut tape: Vec<char> = input.chars().collect();
    if tape.is_empty() {
        tape.push(tm.blank);
    }
    let mut head = 0usize;
    let mut state = tm.start.clone();
    let mut moves = Vec::new();
    let mut heads = vec![0];
    let mut steps = 0;
    let status = loop {
        if tm.is_accepting(&state) {
            break TmStatus::Accepted;
        }
        if steps == budget {
            break TmStatus::BudgetExhausted;
        }
        let Some((next, write, dir)) = tm.step(&state, tape[head]) else {
            break TmStatus::Rejected;
        };
        tape[head] = *write;
        state = next.clone();
        steps += 1;
        moves.push(*dir);
        match dir {
            Move::L if head == 0 => break TmStatus::Rejected,
            Move::L => head -= 1,
            Move::R => {
                head += 1;
                if head == tape.len() {
                    tape.push(tm.blank);
                }
            }
        }
        heads.push(head);
    };
    TmOutcome {
        status,
        state,
        tape,
        head,
        steps,
        moves,
        heads,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::fixtures;

    #[test]
    fn tm_run_unary_increment() {
        let tm = fixtures::unary_increment();
        let out = tm_run(&tm, "111", 100);
        assert_eq!(out.status, TmStatus::Accepted);
        assert_eq!(out.tape_string('_'), "1111");
    }

    #[test]
    fn tm_run_budget_zero() {
        let tm = fixtures::unary_increment();
        let out = tm_run(&tm, "111", 0);
        assert_eq!(out.status, TmStatus::BudgetExhausted);
        assert_eq!(out.steps, 0);
        assert_eq!(out.head, 0);
    }

    #[test]
    fn tm_run_anbn_marker() {
        let tm = fixtures::anbn_marker_tm();
        assert_eq!(tm_run(&tm, "aabb", 500).status, TmStatus::Accepted);
        assert_eq!(tm_run(&tm, "aab", 500).status, TmStatus::Rejected);
        assert_eq!(tm_run(&tm, "", 500).status, TmStatus::Accepted);
        assert_eq!(tm_run(&tm, "ba", 500).status, TmStatus::Rejected);
    }

    #[test]
    fn tm_run_falls_off_left_edge() {
        let tm = TuringMachine::from_rules("q", &["h"], '_', &['1'], &[("q", '1', "q", '1', Move::L)]);
        let out = tm_run(&tm, "1", 10);
        assert_eq!(out.status, TmStatus::Rejected);
        assert_eq!(out.steps, 1);
    }

    #[test]
    fn fixtures_validate() {
        assert!(fixtures::unary_increment().validate().is_empty());
        assert!(fixtures::anbn_marker_tm().validate().is_empty());
        assert!(fixtures::scripted_rrlrrlll_tm().validate().is_empty());
    }
}
