use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;

use thiserror::Error;

/// Finite-context language model: a lookup table from the last `context_length`
/// tokens to the next token.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LmTable<T: Ord> {
    pub vocabulary: BTreeSet<T>,
    pub context_length: usize,
    pub delta: BTreeMap<Vec<T>, T>,
    /// Tokens whose presence at the end of the window signals acceptance.
    pub accepting: BTreeSet<T>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LmError {
    #[error("initial context has {got} tokens, expected {expected}")]
    ContextLength { got: usize, expected: usize },
    #[error("token {0} is not in the vocabulary")]
    UnknownToken(String),
    #[error("no table entry for context {0}")]
    MissingEntry(String),
}

impl<T: Ord + Clone + Debug> LmTable<T> {
    pub fn next(&self, window: &[T]) -> Result<T, LmError> {
        self.delta
            .get(window)
            .cloned()
            .ok_or_else(|| LmError::MissingEntry(format!("{window:?}")))
    }

    /// Number of length-C contexts without a table entry.
    pub fn missing_entries(&self) -> usize {
        let total = self.vocabulary.len().pow(self.context_length as u32);
        total - self.delta.keys().filter(|k| k.len() == self.context_length).count()
    }
}

/// Runs `steps` generation steps. At step `k` any scheduled token for `k` is
/// appended first; then one generated token is appended. Returns the whole
/// token sequence, initial context included.
pub fn lm_run<T: Ord + Clone + Debug>(
    lm: &LmTable<T>,
    initial_context: &[T],
    schedule: &[(usize, T)],
    steps: usize,
) -> Result<Vec<T>, LmError> {
    let c = lm.context_length;
    if initial_context.len() != c {
        return Err(LmError::ContextLength {
            got: initial_context.len(),
            expected: c,
        });
    }
    for t in initial_context.iter().chain(schedule.iter().map(|(_, t)| t)) {
        if !lm.vocabulary.contains(t) {
            return Err(LmError::UnknownToken(format!("{t:?}")));
        }
    }
    let mut seq = initial_context.to_vec();
    for k in 0..steps {
        for (_, t) in schedule.iter().filter(|(s, _)| *s == k) {
            seq.push(t.clone());
        }
        let next = lm.next(&seq[seq.len() - c..])?;
        seq.push(next);
    }
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant() -> LmTable<char> {
        let vocab = BTreeSet::from(['x', 'y']);
        let mut delta = BTreeMap::new();
        for a in ['x', 'y'] {
            for b in ['x', 'y'] {
                delta.insert(vec![a, b], 'x');
            }
        }
        LmTable {
            vocabulary: vocab,
            context_length: 2,
            delta,
            accepting: BTreeSet::new(),
        }
    }

    #[test]
    fn lm_run_constant_stream() {
        let seq = lm_run(&constant(), &['y', 'y'], &[], 4).unwrap();
        assert_eq!(seq, vec!['y', 'y', 'x', 'x', 'x', 'x']);
    }

    #[test]
    fn lm_run_single_input_token() {
        let seq = lm_run(&constant(), &['x', 'x'], &[(0, 'y')], 1).unwrap();
        assert_eq!(seq, vec!['x', 'x', 'y', 'x']);
    }

    #[test]
    fn lm_run_rejects_unknown_and_bad_context() {
        assert!(matches!(
            lm_run(&constant(), &['x', 'x'], &[(0, 'z')], 1),
            Err(LmError::UnknownToken(_))
        ));
        assert!(matches!(
            lm_run(&constant(), &['x'], &[], 1),
            Err(LmError::ContextLength { .. })
        ));
        assert_eq!(constant().missing_entries(), 0);
    }
}
