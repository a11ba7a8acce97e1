use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StackOp {
    /// Push one symbol above the current top.
    Push(char),
    Pop,
    /// Leave the stack unchanged.
    Keep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Acceptance {
    FinalState,
    /// Nothing remains above the initial stack symbol.
    EmptyStack,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DpdaRule {
    pub from: String,
    /// `None` is an ε-move.
    pub input: Option<char>,
    pub top: char,
    pub to: String,
    pub op: StackOp,
}

/// Rules are kept as a list so that nondeterministic inputs can be diagnosed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dpda {
    pub states: BTreeSet<String>,
    pub input_alphabet: BTreeSet<char>,
    pub stack_alphabet: BTreeSet<char>,
    pub rules: Vec<DpdaRule>,
    pub start: String,
    pub initial_stack: char,
    pub accepting: BTreeSet<String>,
    pub acceptance: Acceptance,
}

impl Dpda {
    /// Builds a machine from `(from, input, top, to, op)` rules; sets are inferred.
    pub fn from_rules(
        start: &str,
        initial_stack: char,
        accepting: &[&str],
        acceptance: Acceptance,
        input_alphabet: &[char],
        rules: &[(&str, Option<char>, char, &str, StackOp)],
    ) -> Self {
        let mut states = BTreeSet::from([start.to_string()]);
        states.extend(accepting.iter().map(|s| s.to_string()));
        let mut stack = BTreeSet::from([initial_stack]);
        let mut list = Vec::new();
        for &(from, input, top, to, op) in rules {
            states.insert(from.to_string());
            states.insert(to.to_string());
            stack.insert(top);
            if let StackOp::Push(c) = op {
                stack.insert(c);
            }
            list.push(DpdaRule {
                from: from.to_string(),
                input,
                top,
                to: to.to_string(),
                op,
            });
        }
        Dpda {
            states,
            input_alphabet: input_alphabet.iter().copied().collect(),
            stack_alphabet: stack,
            rules: list,
            start: start.to_string(),
            initial_stack,
            accepting: accepting.iter().map(|s| s.to_string()).collect(),
            acceptance,
        }
    }

    pub fn transition(&self, state: &str, input: Option<char>, top: char) -> Option<&DpdaRule> {
        self.rules
            .iter()
            .find(|r| r.from == state && r.input == input && r.top == top)
    }

    pub fn has_epsilon(&self, state: &str, top: char) -> bool {
        self.transition(state, None, top).is_some()
    }

    /// Acceptance of a configuration whose input is fully consumed.
    pub fn accepts_config(&self, state: &str, stack: &[char]) -> bool {
        match self.acceptance {
            Acceptance::FinalState => self.accepting.contains(state),
            Acceptance::EmptyStack => stack.len() <= 1,
        }
    }

    /// Whether any rule pushes the initial stack symbol above the bottom.
    pub fn pushes_bottom(&self) -> bool {
        self.rules
            .iter()
            .any(|r| r.op == StackOp::Push(self.initial_stack))
    }
}

/// Lists every determinism or declaration violation; empty iff the machine is a valid DPDA.
pub fn validate_dpda(dpda: &Dpda) -> Vec<String> {
    let mut out = Vec::new();
    let mut seen: BTreeMap<(&str, Option<char>, char), usize> = BTreeMap::new();
    for r in &dpda.rules {
        *seen.entry((r.from.as_str(), r.input, r.top)).or_default() += 1;
        if !dpda.states.contains(&r.from) || !dpda.states.contains(&r.to) {
            out.push(format!("rule from {} names an undeclared state", r.from));
        }
        if !dpda.stack_alphabet.contains(&r.top) {
            out.push(format!("rule from {} reads undeclared stack symbol {:?}", r.from, r.top));
        }
        if let Some(a) = r.input {
            if !dpda.input_alphabet.contains(&a) {
                out.push(format!("rule from {} reads undeclared input {a:?}", r.from));
            }
        }
    }
    for (&(s, a, z), &n) in &seen {
        if n > 1 {
            let sym = a.map_or("ε".to_string(), |c| c.to_string());
            out.push(format!("({s}, {sym}, {z}) has {n} transitions"));
        }
        if a.is_none() {
            for &(s2, a2, z2) in seen.keys() {
                if let Some(c) = a2.filter(|_| s2 == s && z2 == z) {
                    out.push(format!("({s}, {c}, {z}) conflicts with the ε-transition on ({s}, {z})"));
                }
            }
        }
    }
    if !dpda.states.contains(&dpda.start) {
        out.push(format!("start state {} is undeclared", dpda.start));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DpdaStatus {
    Accepted,
    Rejected,
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DpdaConfig {
    pub state: String,
    /// Number of input symbols consumed.
    pub pos: usize,
    /// Bottom first.
    pub stack: Vec<char>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DpdaOutcome {
    pub status: DpdaStatus,
    pub trace: Vec<DpdaConfig>,
    pub steps: usize,
}

/// Deterministic run. An ε-move is preferred whenever one is defined, also after
/// the input is exhausted; acceptance is checked on each configuration with the
/// input fully consumed.
pub fn dpda_run(dpda: &Dpda, input: &str, budget: usize) -> DpdaOutcome {
    let input: Vec<char> = input.chars().collect();
    let mut cfg = DpdaConfig {
        state: dpda.start.clone(),
        pos: 0,
        stack: vec![dpda.initial_stack],
    };
    let mut trace = vec![cfg.clone()];
    let mut steps = 0;
    let status = loop {
        if cfg.pos == input.len() && dpda.accepts_config(&cfg.state, &cfg.stack) {
            break DpdaStatus::Accepted;
        }
        let Some(&top) = cfg.stack.last() else {
            break DpdaStatus::Rejected;
        };
        let rule = dpda.transition(&cfg.state, None, top).or_else(|| {
            input
                .get(cfg.pos)
                .and_then(|&a| dpda.transition(&cfg.state, Some(a), top))
        });
        let Some(rule) = rule else {
            break DpdaStatus::Rejected;
        };
        if steps == budget {
            break DpdaStatus::BudgetExhausted;
        }
        steps += 1;
        if rule.input.is_some() {
            cfg.pos += 1;
        }
        cfg.state = rule.to.clone();
        match rule.op {
            StackOp::Push(c) => cfg.stack.push(c),
            StackOp::Pop => {
                cfg.stack.pop();
            }
            StackOp::Keep => {}
        }
        trace.push(cfg.clone());
    };
    DpdaOutcome {
        status,
        trace,
        steps,
    }
}
