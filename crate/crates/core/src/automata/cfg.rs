use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Grammar in Chomsky normal form: `A → B C`, `A → a`, and optionally `S → ε`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfGrammar {
    pub nonterminals: BTreeSet<String>,
    pub terminals: BTreeSet<char>,
    pub start: String,
    pub binary: Vec<(String, String, String)>,
    pub unary: Vec<(String, char)>,
    pub allows_empty: bool,
}

impl CnfGrammar {
    pub fn new(
        start: &str,
        binary: &[(&str, &str, &str)],
        unary: &[(&str, char)],
        allows_empty: bool,
    ) -> Self {
        let mut nonterminals = BTreeSet::from([start.to_string()]);
        let mut terminals = BTreeSet::new();
        for (a, b, c) in binary {
            nonterminals.extend([a, b, c].map(|s| s.to_string()));
        }
        for (a, t) in unary {
            nonterminals.insert(a.to_string());
            terminals.insert(*t);
        }
        CnfGrammar {
            nonterminals,
            terminals,
            start: start.to_string(),
            binary: binary
                .iter()
                .map(|(a, b, c)| (a.to_string(), b.to_string(), c.to_string()))
                .collect(),
            unary: unary.iter().map(|(a, t)| (a.to_string(), *t)).collect(),
            allows_empty,
        }
    }

    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.nonterminals.contains(&self.start) {
            out.push(format!("start symbol {} is undeclared", self.start));
        }
        for (a, b, c) in &self.binary {
            for s in [a, b, c] {
                if !self.nonterminals.contains(s) {
                    out.push(format!("rule {a} → {b} {c} names undeclared {s}"));
                }
            }
            if self.allows_empty && (b == &self.start || c == &self.start) {
                out.push(format!("start symbol appears on the right of {a} → {b} {c}"));
            }
        }
        for (a, t) in &self.unary {
            if !self.nonterminals.contains(a) {
                out.push(format!("rule {a} → {t} names undeclared {a}"));
            }
            if !self.terminals.contains(t) {
                out.push(format!("rule {a} → {t} names undeclared terminal"));
            }
        }
        out
    }

    /// Nonterminals `A` with `A → a`.
    pub fn producers_of(&self, a: char) -> BTreeSet<String> {
        self.unary
            .iter()
            .filter(|(_, t)| *t == a)
            .map(|(n, _)| n.clone())
            .collect()
    }

    /// Nonterminals `A` with `A → B C` for some `B ∈ left`, `C ∈ right`.
    pub fn combine(&self, left: &BTreeSet<String>, right: &BTreeSet<String>) -> BTreeSet<String> {
        self.binary
            .iter()
            .filter(|(_, b, c)| left.contains(b) && right.contains(c))
            .map(|(a, _, _)| a.clone())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CykResult {
    pub member: bool,
    /// Number of distinct parse trees rooted at the start symbol.
    pub derivation_count: BigUint,
}

/// `table[i][l - 1]` holds the nonterminals deriving `input[i .. i + l]`.
pub fn cyk_table(grammar: &CnfGrammar, input: &[char]) -> Vec<Vec<BTreeSet<String>>> {
    counts_table(grammar, input)
        .into_iter()
        .map(|row| row.into_iter().map(|m| m.into_keys().collect()).collect())
        .collect()
}

fn counts_table(grammar: &CnfGrammar, input: &[char]) -> Vec<Vec<BTreeMap<String, BigUint>>> {
    let n = input.len();
    let mut table: Vec<Vec<BTreeMap<String, BigUint>>> = (0..n)
        .map(|i| vec![BTreeMap::new(); n - i])
        .collect();
    for (i, &a) in input.iter().enumerate() {
        for (nt, t) in &grammar.unary {
            if *t == a {
                *table[i][0].entry(nt.clone()).or_insert_with(BigUint::zero) += 1u32;
            }
        }
    }
    for len in 2..=n {
        for i in 0..=n - len {
            let mut cell: BTreeMap<String, BigUint> = BTreeMap::new();
            for split in 1..len {
                let left = &table[i][split - 1];
                let right = &table[i + split][len - split - 1];
                if left.is_empty() || right.is_empty() {
                    continue;
                }
                for (a, b, c) in &grammar.binary {
                    if let (Some(x), Some(y)) = (left.get(b), right.get(c)) {
                        *cell.entry(a.clone()).or_insert_with(BigUint::zero) += x * y;
                    }
                }
            }
            table[i][len - 1] = cell;
        }
    }
    table
}

pub fn cyk_member(grammar: &CnfGrammar, input: &[char]) -> CykResult {
    if input.is_empty() {
        let member = grammar.allows_empty;
        return CykResult {
            member,
            derivation_count: if member { BigUint::one() } else { BigUint::zero() },
        };
    }
    let table = counts_table(grammar, input);
    let count = table[0][input.len() - 1]
        .get(&grammar.start)
        .cloned()
        .unwrap_or_else(BigUint::zero);
    CykResult {
        member: !count.is_zero(),
        derivation_count: count,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::fixtures;

    fn chars(s: &str) -> Vec<char> {
        s.chars().collect()
    }

    /// Counts leftmost derivations by exhaustive rewriting; every nonterminal
    /// yields at least one terminal, so forms longer than the input are pruned.
    fn leftmost_derivations(g: &CnfGrammar, input: &[char]) -> u64 {
        fn go(g: &CnfGrammar, form: Vec<Result<char, String>>, input: &[char]) -> u64 {
            if form.len() > input.len() {
                return 0;
            }
            let Some(idx) = form.iter().position(|s| s.is_err()) else {
                let word: Vec<char> = form.iter().map(|s| *s.as_ref().unwrap()).collect();
                return u64::from(word == input);
            };
            if form[..idx].iter().zip(input).any(|(s, c)| s.as_ref().ok() != Some(c)) {
                return 0;
            }
            let nt = form[idx].clone().unwrap_err();
            let mut total = 0;
            for (a, t) in &g.unary {
                if *a == nt {
                    let mut f = form.clone();
                    f[idx] = Ok(*t);
                    total += go(g, f, input);
                }
            }
            for (a, b, c) in &g.binary {
                if *a == nt {
                    let mut f = form.clone();
                    f.splice(idx..=idx, [Err(b.clone()), Err(c.clone())]);
                    total += go(g, f, input);
                }
            }
            total
        }
        if input.is_empty() {
            return u64::from(g.allows_empty);
        }
        go(g, vec![Err(g.start.clone())], input)
    }

    #[test]
    fn cyk_member_anbn() {
        let g = fixtures::anbn_grammar();
        assert!(cyk_member(&g, &chars("aabb")).member);
        assert!(cyk_member(&g, &chars("ab")).member);
        assert!(!cyk_member(&g, &chars("ba")).member);
    }

    #[test]
    fn cyk_empty_input() {
        let mut g = fixtures::anbn_grammar();
        assert_eq!(cyk_member(&g, &[]).derivation_count, BigUint::zero());
        g.allows_empty = true;
        assert_eq!(cyk_member(&g, &[]).derivation_count, BigUint::one());
    }

    #[test]
    fn cyk_counts_match_enumeration() {
        let ambiguous = CnfGrammar::new("S", &[("S", "S", "S")], &[("S", 'a')], false);
        for n in 1..=7 {
            let w = vec!['a'; n];
            let got = cyk_member(&ambiguous, &w).derivation_count;
            assert_eq!(got, BigUint::from(leftmost_derivations(&ambiguous, &w)));
        }
        let g = fixtures::anbn_grammar();
        for w in ["aabb", "ab", "aaabbb", "abab", "b"] {
            let w = chars(w);
            assert_eq!(
                cyk_member(&g, &w).derivation_count,
                BigUint::from(leftmost_derivations(&g, &w))
            );
        }
    }

    #[test]
    fn anbn_grammar_validates() {
        assert!(fixtures::anbn_grammar().validate().is_empty());
    }
}
