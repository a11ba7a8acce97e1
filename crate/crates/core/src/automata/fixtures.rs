//! Hand-authored machines used by tests, examples and the CLI.

use std::collections::{BTreeMap, BTreeSet};

use super::cfg::CnfGrammar;
use super::dpda::{Acceptance, Dpda, StackOp};
use super::fsm::Fsm;
use super::tm::{Move, TuringMachine};

use Move::{L, R};
use StackOp::{Keep, Pop, Push};

/// Appends one `1` to a unary numeral.
pub fn unary_increment() -> TuringMachine {
    TuringMachine::from_rules(
        "q0",
        &["qa"],
        '_',
        &['1'],
        &[("q0", '1', "q0", '1', R), ("q0", '_', "qa", '1', R)],
    )
}

/// Decides `a^n b^n` by marking matched pairs with `X` and `Y`.
pub fn anbn_marker_tm() -> TuringMachine {
    TuringMachine::from_rules(
        "q0",
        &["qa"],
        '_',
        &['a', 'b'],
        &[
            ("q0", 'a', "q1", 'X', R),
            ("q0", 'Y', "q3", 'Y', R),
            ("q0", '_', "qa", '_', R),
            ("q1", 'a', "q1", 'a', R),
            ("q1", 'Y', "q1", 'Y', R),
            ("q1", 'b', "q2", 'Y', L),
            ("q2", 'a', "q2", 'a', L),
            ("q2", 'Y', "q2", 'Y', L),
            ("q2", 'X', "q0", 'X', R),
            ("q3", 'Y', "q3", 'Y', R),
            ("q3", '_', "qa", '_', R),
        ],
    )
}

/// Eight-step machine with move pattern `RRLRRLLL` over input `t0 t2 t4 t8`.
///
/// Symbol `t_i` is written as the i-th character of `0123456789AB`.
pub fn scripted_rrlrrlll_tm() -> TuringMachine {
    TuringMachine::from_rules(
        "s0",
        &["s8"],
        '_',
        &['0', '2', '4', '8'],
        &[
            ("s0", '0', "s1", '1', R),
            ("s1", '2', "s2", '3', R),
            ("s2", '4', "s3", '5', L),
            ("s3", '3', "s4", '6', R),
            ("s4", '5', "s5", '7', R),
            ("s5", '8', "s6", '9', L),
            ("s6", '7', "s7", 'A', L),
            ("s7", '6', "s8", 'B', L),
        ],
    )
}

pub const SCRIPTED_INPUT: &str = "0248";

pub fn tm_fixtures() -> Vec<(&'static str, TuringMachine, Vec<&'static str>)> {
    vec![
        ("unary_increment", unary_increment(), vec!["", "1", "111", "11111"]),
        (
            "anbn_marker",
            anbn_marker_tm(),
            vec!["", "ab", "aabb", "aab", "ba", "abab", "aaabbb"],
        ),
        ("scripted_rrlrrlll", scripted_rrlrrlll_tm(), vec![SCRIPTED_INPUT]),
    ]
}

/// `a^n b^n` for n ≥ 0, accepting by final state.
pub fn anbn_dpda() -> Dpda {
    Dpda::from_rules(
        "q0",
        'Z',
        &["q0", "q3"],
        Acceptance::FinalState,
        &['a', 'b'],
        &[
            ("q0", Some('a'), 'Z', "q1", Push('A')),
            ("q1", Some('a'), 'A', "q1", Push('A')),
            ("q1", Some('b'), 'A', "q2", Pop),
            ("q2", Some('b'), 'A', "q2", Pop),
            ("q2", None, 'Z', "q3", Keep),
        ],
    )
}

/// Balanced brackets with `a` opening and `b` closing.
pub fn balanced_dpda() -> Dpda {
    Dpda::from_rules(
        "p",
        'Z',
        &["p"],
        Acceptance::FinalState,
        &['a', 'b'],
        &[
            ("p", Some('a'), 'Z', "r", Push('a')),
            ("r", Some('a'), 'a', "r", Push('a')),
            ("r", Some('b'), 'a', "r", Pop),
            ("r", None, 'Z', "p", Keep),
        ],
    )
}

/// Balanced brackets without ε-moves, accepting when only the bottom symbol
/// remains. Its rollout on `aababb` has exactly seven input nodes.
pub fn dyck_dpda() -> Dpda {
    Dpda::from_rules(
        "s0",
        'Z',
        &[],
        Acceptance::EmptyStack,
        &['a', 'b'],
        &[
            ("s0", Some('a'), 'Z', "s0", Push('a')),
            ("s0", Some('a'), 'a', "s0", Push('a')),
            ("s0", Some('b'), 'a', "s1", Pop),
            ("s1", Some('a'), 'a', "s0", Push('a')),
            ("s1", Some('b'), 'a', "s1", Pop),
            ("s1", Some('a'), 'Z', "s0", Push('a')),
        ],
    )
}

/// `a^n b^{2n}` for n ≥ 0.
pub fn anb2n_dpda() -> Dpda {
    Dpda::from_rules(
        "q0",
        'Z',
        &["q0", "qf"],
        Acceptance::FinalState,
        &['a', 'b'],
        &[
            ("q0", Some('a'), 'Z', "q1", Push('A')),
            ("q1", Some('a'), 'A', "q1", Push('A')),
            ("q1", Some('b'), 'A', "q2", Keep),
            ("q2", Some('b'), 'A', "q3", Pop),
            ("q3", Some('b'), 'A', "q2", Keep),
            ("q3", None, 'Z', "qf", Keep),
        ],
    )
}

/// `w c reverse(w)` for `w ∈ {a, b}*`; the bottom symbol is popped on success.
pub fn wcwr_dpda() -> Dpda {
    Dpda::from_rules(
        "push",
        'Z',
        &["done"],
        Acceptance::FinalState,
        &['a', 'b', 'c'],
        &[
            ("push", Some('a'), 'Z', "push", Push('a')),
            ("push", Some('b'), 'Z', "push", Push('b')),
            ("push", Some('a'), 'a', "push", Push('a')),
            ("push", Some('b'), 'a', "push", Push('b')),
            ("push", Some('a'), 'b', "push", Push('a')),
            ("push", Some('b'), 'b', "push", Push('b')),
            ("push", Some('c'), 'Z', "pop", Keep),
            ("push", Some('c'), 'a', "pop", Keep),
            ("push", Some('c'), 'b', "pop", Keep),
            ("pop", Some('a'), 'a', "pop", Pop),
            ("pop", Some('b'), 'b', "pop", Pop),
            ("pop", None, 'Z', "done", Pop),
        ],
    )
}

pub fn dpda_fixtures() -> Vec<(&'static str, Dpda)> {
    vec![
        ("anbn", anbn_dpda()),
        ("balanced", balanced_dpda()),
        ("dyck", dyck_dpda()),
        ("anb2n", anb2n_dpda()),
        ("wcwr", wcwr_dpda()),
    ]
}

fn fsm(
    alphabet: &[char],
    start: &str,
    accepting: &[&str],
    rules: &[(&str, char, &str)],
) -> Fsm<String, char> {
    let mut states = BTreeSet::from([start.to_string()]);
    let mut delta = BTreeMap::new();
    for &(s, a, t) in rules {
        states.insert(s.to_string());
        states.insert(t.to_string());
        delta.insert((s.to_string(), a), t.to_string());
    }
    Fsm {
        states,
        alphabet: alphabet.iter().copied().collect(),
        delta,
        start: start.to_string(),
        accepting: accepting.iter().map(|s| s.to_string()).collect(),
    }
}

/// Even number of `1`s.
pub fn parity_fsm() -> Fsm<String, char> {
    fsm(
        &['0', '1'],
        "even",
        &["even"],
        &[
            ("even", '0', "even"),
            ("even", '1', "odd"),
            ("odd", '0', "odd"),
            ("odd", '1', "even"),
        ],
    )
}

/// Binary numerals divisible by three.
pub fn div3_fsm() -> Fsm<String, char> {
    fsm(
        &['0', '1'],
        "r0",
        &["r0"],
        &[
            ("r0", '0', "r0"),
            ("r0", '1', "r1"),
            ("r1", '0', "r2"),
            ("r1", '1', "r0"),
            ("r2", '0', "r1"),
            ("r2", '1', "r2"),
        ],
    )
}

/// Strings ending in `ab`.
pub fn ends_ab_fsm() -> Fsm<String, char> {
    fsm(
        &['a', 'b'],
        "n",
        &["ab"],
        &[
            ("n", 'a', "a"),
            ("n", 'b', "n"),
            ("a", 'a', "a"),
            ("a", 'b', "ab"),
            ("ab", 'a', "a"),
            ("ab", 'b', "n"),
        ],
    )
}

/// Strings without `aa`.
pub fn no_aa_fsm() -> Fsm<String, char> {
    fsm(
        &['a', 'b'],
        "ok",
        &["ok", "a"],
        &[
            ("ok", 'a', "a"),
            ("ok", 'b', "ok"),
            ("a", 'a', "dead"),
            ("a", 'b', "ok"),
            ("dead", 'a', "dead"),
            ("dead", 'b', "dead"),
        ],
    )
}

/// Number of `c`s is a multiple of three, over `{a, b, c}`.
pub fn c_mod3_fsm() -> Fsm<String, char> {
    let mut rules = Vec::new();
    let names = ["m0", "m1", "m2"];
    for (i, s) in names.iter().enumerate() {
        rules.push((*s, 'a', *s));
        rules.push((*s, 'b', *s));
        rules.push((*s, 'c', names[(i + 1) % 3]));
    }
    fsm(&['a', 'b', 'c'], "m0", &["m0"], &rules)
}

pub fn fsm_fixtures() -> Vec<Fsm<String, char>> {
    vec![parity_fsm(), div3_fsm(), ends_ab_fsm(), no_aa_fsm(), c_mod3_fsm()]
}

/// `S → CB | AB`, `P → CB | AB`, `C → AP`, `A → a`, `B → b`.
pub fn anbn_grammar() -> CnfGrammar {
    CnfGrammar::new(
        "S",
        &[
            ("S", "C", "B"),
            ("S", "A", "B"),
            ("P", "C", "B"),
            ("P", "A", "B"),
            ("C", "A", "P"),
        ],
        &[("A", 'a'), ("B", 'b')],
        false,
    )
}
