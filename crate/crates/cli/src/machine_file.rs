//! JSON machine definitions. Every file carries a `kind` tag; the remaining
//! fields mirror the library's machine types. Symbols are one-character strings.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use anyhow::{bail, Context, Result};
use questgraph::automata::{
    validate_dpda, Acceptance, CnfGrammar, Dpda, Fsm, LmTable, Move, StackOp, TuringMachine,
};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MachineFile {
    Tm(TmDef),
    Dpda(DpdaDef),
    Fsm(FsmDef),
    CnfGrammar(GrammarDef),
    Lm(LmDef),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dir {
    L,
    R,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TmRuleDef {
    pub from: String,
    pub read: char,
    pub to: String,
    pub write: char,
    #[serde(rename = "move")]
    pub dir: Dir,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TmDef {
    /// The `kind` tag; read here so unknown fields can be rejected with positions.
    #[serde(default, rename = "kind", skip_serializing)]
    pub tag: Option<String>,
    pub start: String,
    pub accepting: Vec<String>,
    pub blank: char,
    pub input_alphabet: Vec<char>,
    pub rules: Vec<TmRuleDef>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StackOpDef {
    Push(char),
    Pop,
    Keep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcceptanceDef {
    FinalState,
    EmptyStack,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DpdaRuleDef {
    pub from: String,
    /// Absent or null for an ε-move.
    #[serde(default)]
    pub input: Option<char>,
    pub top: char,
    pub to: String,
    pub op: StackOpDef,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DpdaDef {
    /// The `kind` tag; read here so unknown fields can be rejected with positions.
    #[serde(default, rename = "kind", skip_serializing)]
    pub tag: Option<String>,
    pub start: String,
    pub initial_stack: char,
    pub accepting: Vec<String>,
    pub acceptance: AcceptanceDef,
    pub input_alphabet: Vec<char>,
    pub rules: Vec<DpdaRuleDef>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FsmTransitionDef {
    pub from: String,
    pub symbol: char,
    pub to: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FsmDef {
    /// The `kind` tag; read here so unknown fields can be rejected with positions.
    #[serde(default, rename = "kind", skip_serializing)]
    pub tag: Option<String>,
    pub states: Vec<String>,
    pub alphabet: Vec<char>,
    pub start: String,
    pub accepting: Vec<String>,
    pub transitions: Vec<FsmTransitionDef>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrammarDef {
    /// The `kind` tag; read here so unknown fields can be rejected with positions.
    #[serde(default, rename = "kind", skip_serializing)]
    pub tag: Option<String>,
    pub start: String,
    /// `[A, B, C]` for `A → B C`.
    pub binary: Vec<[String; 3]>,
    /// `[A, "a"]` for `A → a`.
    pub unary: Vec<(String, char)>,
    #[serde(default)]
    pub allows_empty: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LmEntryDef {
    pub context: Vec<String>,
    pub next: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LmDef {
    /// The `kind` tag; read here so unknown fields can be rejected with positions.
    #[serde(default, rename = "kind", skip_serializing)]
    pub tag: Option<String>,
    pub context_length: usize,
    pub vocabulary: Vec<String>,
    pub initial_context: Vec<String>,
    pub accepting: Vec<String>,
    pub table: Vec<LmEntryDef>,
}

/// A validated machine.
#[derive(Clone, Debug, PartialEq)]
pub enum Machine {
    Tm(TuringMachine),
    Dpda(Dpda),
    Fsm(Fsm<String, char>),
    Grammar(CnfGrammar),
    Lm {
        table: LmTable<String>,
        initial_context: Vec<String>,
    },
}

impl Machine {
    pub fn kind(&self) -> &'static str {
        match self {
            Machine::Tm(_) => "tm",
            Machine::Dpda(_) => "dpda",
            Machine::Fsm(_) => "fsm",
            Machine::Grammar(_) => "cnf_grammar",
            Machine::Lm { .. } => "lm",
        }
    }
}

fn problems(kind: &str, list: Vec<String>) -> Result<()> {
    if list.is_empty() {
        Ok(())
    } else {
        bail!("invalid {kind}: {}", list.join("; "))
    }
}

impl MachineFile {
    pub fn parse(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Kind {
            kind: String,
        }
        let Kind { kind } = serde_json::from_str(text).context("malformed machine file")?;
        let ctx = || format!("malformed {kind} machine file");
        Ok(match kind.as_str() {
            "tm" => MachineFile::Tm(serde_json::from_str(text).with_context(ctx)?),
            "dpda" => MachineFile::Dpda(serde_json::from_str(text).with_context(ctx)?),
            "fsm" => MachineFile::Fsm(serde_json::from_str(text).with_context(ctx)?),
            "cnf_grammar" => MachineFile::CnfGrammar(serde_json::from_str(text).with_context(ctx)?),
            "lm" => MachineFile::Lm(serde_json::from_str(text).with_context(ctx)?),
            other => bail!("unknown machine kind {other:?}; expected tm, dpda, fsm, cnf_grammar or lm"),
        })
    }

    pub fn load(path: &Path) -> Result<Machine> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        Self::parse(&text)?
            .into_machine()
            .with_context(|| format!("in {}", path.display()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("machine files always serialize")
    }

    pub fn into_machine(self) -> Result<Machine> {
        match self {
            MachineFile::Tm(d) => {
                let rules: Vec<_> = d
                    .rules
                    .iter()
                    .map(|r| {
                        let m = match r.dir {
                            Dir::L => Move::L,
                            Dir::R => Move::R,
                        };
                        (r.from.as_str(), r.read, r.to.as_str(), r.write, m)
                    })
                    .collect();
                let mut seen = BTreeSet::new();
                for (i, r) in d.rules.iter().enumerate() {
                    if !seen.insert((&r.from, r.read)) {
                        bail!("rules[{i}]: second rule for ({}, {:?})", r.from, r.read);
                    }
                }
                let accepting: Vec<&str> = d.accepting.iter().map(String::as_str).collect();
                let tm = TuringMachine::from_rules(&d.start, &accepting, d.blank, &d.input_alphabet, &rules);
                problems("tm", tm.validate())?;
                Ok(Machine::Tm(tm))
            }
            MachineFile::Dpda(d) => {
                let rules: Vec<_> = d
                    .rules
                    .iter()
                    .map(|r| {
                        let op = match r.op {
                            StackOpDef::Push(c) => StackOp::Push(c),
                            StackOpDef::Pop => StackOp::Pop,
                            StackOpDef::Keep => StackOp::Keep,
                        };
                        (r.from.as_str(), r.input, r.top, r.to.as_str(), op)
                    })
                    .collect();
                let acceptance = match d.acceptance {
                    AcceptanceDef::FinalState => Acceptance::FinalState,
                    AcceptanceDef::EmptyStack => Acceptance::EmptyStack,
                };
                let accepting: Vec<&str> = d.accepting.iter().map(String::as_str).collect();
                let dpda = Dpda::from_rules(&d.start, d.initial_stack, &accepting, acceptance, &d.input_alphabet, &rules);
                problems("dpda", validate_dpda(&dpda))?;
                Ok(Machine::Dpda(dpda))
            }
            MachineFile::Fsm(d) => {
                let states: BTreeSet<String> = d.states.iter().cloned().collect();
                let alphabet: BTreeSet<char> = d.alphabet.iter().copied().collect();
                let mut list = Vec::new();
                if !states.contains(&d.start) {
                    list.push(format!("start: {} is not a state", d.start));
                }
                for s in d.accepting.iter().filter(|s| !states.contains(*s)) {
                    list.push(format!("accepting: {s} is not a state"));
                }
                let mut delta = BTreeMap::new();
                for (i, t) in d.transitions.iter().enumerate() {
                    if !states.contains(&t.from) || !states.contains(&t.to) {
                        list.push(format!("transitions[{i}]: undeclared state"));
                    }
                    if !alphabet.contains(&t.symbol) {
                        list.push(format!("transitions[{i}]: symbol {:?} is not in the alphabet", t.symbol));
                    }
                    if delta.insert((t.from.clone(), t.symbol), t.to.clone()).is_some() {
                        list.push(format!("transitions[{i}]: second transition for ({}, {:?})", t.from, t.symbol));
                    }
                }
                problems("fsm", list)?;
                Ok(Machine::Fsm(Fsm {
                    states,
                    alphabet,
                    delta,
                    start: d.start,
                    accepting: d.accepting.into_iter().collect(),
                }))
            }
            MachineFile::CnfGrammar(d) => {
                let binary: Vec<(&str, &str, &str)> = d
                    .binary
                    .iter()
                    .map(|[a, b, c]| (a.as_str(), b.as_str(), c.as_str()))
                    .collect();
                let unary: Vec<(&str, char)> = d.unary.iter().map(|(a, t)| (a.as_str(), *t)).collect();
                let g = CnfGrammar::new(&d.start, &binary, &unary, d.allows_empty);
                problems("cnf_grammar", g.validate())?;
                Ok(Machine::Grammar(g))
            }
            MachineFile::Lm(d) => {
                let vocabulary: BTreeSet<String> = d.vocabulary.iter().cloned().collect();
                let mut list = Vec::new();
                if d.context_length == 0 {
                    list.push("context_length: must be positive".to_string());
                }
                if d.initial_context.len() != d.context_length {
                    list.push(format!(
                        "initial_context: {} tokens, expected {}",
                        d.initial_context.len(),
                        d.context_length
                    ));
                }
                let unknown = |t: &String| !vocabulary.contains(t);
                if let Some(t) = d.initial_context.iter().chain(&d.accepting).find(|t| unknown(t)) {
                    list.push(format!("token {t:?} is not in the vocabulary"));
                }
                let mut delta = BTreeMap::new();
                for (i, e) in d.table.iter().enumerate() {
                    if e.context.len() != d.context_length {
                        list.push(format!("table[{i}].context: wrong length"));
                    }
                    if let Some(t) = e.context.iter().chain([&e.next]).find(|t| unknown(t)) {
                        list.push(format!("table[{i}]: token {t:?} is not in the vocabulary"));
                    }
                    if delta.insert(e.context.clone(), e.next.clone()).is_some() {
                        list.push(format!("table[{i}]: duplicate context"));
                    }
                }
                problems("lm", list)?;
                Ok(Machine::Lm {
                    table: LmTable {
                        vocabulary,
                        context_length: d.context_length,
                        delta,
                        accepting: d.accepting.into_iter().collect(),
                    },
                    initial_context: d.initial_context,
                })
            }
        }
    }

    pub fn from_machine(m: &Machine) -> Self {
        match m {
            Machine::Tm(tm) => MachineFile::Tm(TmDef {
                tag: None,
                start: tm.start.clone(),
                accepting: tm.accepting.iter().cloned().collect(),
                blank: tm.blank,
                input_alphabet: tm.input_alphabet.iter().copied().collect(),
                rules: tm
                    .delta
                    .iter()
                    .map(|((s, a), (t, b, m))| TmRuleDef {
                        from: s.clone(),
                        read: *a,
                        to: t.clone(),
                        write: *b,
                        dir: match m {
                            Move::L => Dir::L,
                            Move::R => Dir::R,
                        },
                    })
                    .collect(),
            }),
            Machine::Dpda(d) => MachineFile::Dpda(DpdaDef {
                tag: None,
                start: d.start.clone(),
                initial_stack: d.initial_stack,
                accepting: d.accepting.iter().cloned().collect(),
                acceptance: match d.acceptance {
                    Acceptance::FinalState => AcceptanceDef::FinalState,
                    Acceptance::EmptyStack => AcceptanceDef::EmptyStack,
                },
                input_alphabet: d.input_alphabet.iter().copied().collect(),
                rules: d
                    .rules
                    .iter()
                    .map(|r| DpdaRuleDef {
                        from: r.from.clone(),
                        input: r.input,
                        top: r.top,
                        to: r.to.clone(),
                        op: match r.op {
                            StackOp::Push(c) => StackOpDef::Push(c),
                            StackOp::Pop => StackOpDef::Pop,
                            StackOp::Keep => StackOpDef::Keep,
                        },
                    })
                    .collect(),
            }),
            Machine::Fsm(f) => MachineFile::Fsm(FsmDef {
                tag: None,
                states: f.states.iter().cloned().collect(),
                alphabet: f.alphabet.iter().copied().collect(),
                start: f.start.clone(),
                accepting: f.accepting.iter().cloned().collect(),
                transitions: f
                    .delta
                    .iter()
                    .map(|((s, a), t)| FsmTransitionDef {
                        from: s.clone(),
                        symbol: *a,
                        to: t.clone(),
                    })
                    .collect(),
            }),
            Machine::Grammar(g) => MachineFile::CnfGrammar(GrammarDef {
                tag: None,
                start: g.start.clone(),
                binary: g
                    .binary
                    .iter()
                    .map(|(a, b, c)| [a.clone(), b.clone(), c.clone()])
                    .collect(),
                unary: g.unary.clone(),
                allows_empty: g.allows_empty,
            }),
            Machine::Lm {
                table,
                initial_context,
            } => MachineFile::Lm(LmDef {
                tag: None,
                context_length: table.context_length,
                vocabulary: table.vocabulary.iter().cloned().collect(),
                initial_context: initial_context.clone(),
                accepting: table.accepting.iter().cloned().collect(),
                table: table
                    .delta
                    .iter()
                    .map(|(c, n)| LmEntryDef {
                        context: c.clone(),
                        next: n.clone(),
                    })
                    .collect(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use questgraph::automata::fixtures;

    fn round_trip(m: Machine) {
        let text = MachineFile::from_machine(&m).to_json();
        let back = MachineFile::parse(&text).unwrap().into_machine().unwrap();
        assert_eq!(back, m, "{text}");
    }

    #[test]
    fn fixtures_round_trip() {
        for (_, tm, _) in fixtures::tm_fixtures() {
            round_trip(Machine::Tm(tm));
        }
        for (_, d) in fixtures::dpda_fixtures() {
            round_trip(Machine::Dpda(d));
        }
        for f in fixtures::fsm_fixtures() {
            round_trip(Machine::Fsm(f));
        }
        round_trip(Machine::Grammar(fixtures::anbn_grammar()));
    }

    #[test]
    fn parse_errors_carry_location() {
        let err = MachineFile::parse("{\n  \"kind\": \"tm\",\n  \"start\": 3\n}").unwrap_err();
        assert!(format!("{err:#}").contains("line 3"), "{err:#}");
        let err = MachineFile::parse(r#"{"kind": "pda"}"#).unwrap_err();
        assert!(format!("{err:#}").contains("unknown machine kind"), "{err:#}");
    }

    #[test]
    fn validation_names_the_field() {
        let text = r#"{"kind": "fsm", "states": ["s"], "alphabet": ["a"], "start": "t",
                       "accepting": [], "transitions": [{"from": "s", "symbol": "b", "to": "s"}]}"#;
        let err = MachineFile::parse(text).unwrap().into_machine().unwrap_err().to_string();
        assert!(err.contains("start: t") && err.contains("transitions[0]"), "{err}");
    }
}
