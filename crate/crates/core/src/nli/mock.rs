use std::collections::HashSet;
use std::sync::atomic::{AtomicUsize, Ordering};

use super::{validate_pairs, EntailmentBackend, EntailmentTriple, NliError, PremiseBudget};
use crate::text::tokens;

/// Deterministic lexical stand-in for an NLI model.
///
/// With `o` the fraction of distinct hypothesis tokens that also occur in the
/// premise, the triple is `(o, 1 - o, 0)`. When exactly one side contains the
/// token "not", it is `(0, 1 - o, o)` instead.
#[derive(Debug)]
pub struct MockBackend {
    batch_size: usize,
    budget: Option<PremiseBudget>,
    pairs_scored: AtomicUsize,
    batches: AtomicUsize,
}

impl Default for MockBackend {
    fn default() -> Self {
        MockBackend::new(8)
    }
}

impl MockBackend {
    pub fn new(batch_size: usize) -> Self {
        MockBackend {
            batch_size: batch_size.max(1),
            budget: None,
            pairs_scored: AtomicUsize::new(0),
            batches: AtomicUsize::new(0),
        }
    }

    pub fn with_budget(mut self, budget: PremiseBudget) -> Self {
        self.budget = Some(budget);
        self
    }

    /// Number of pairs evaluated so far.
    pub fn pairs_scored(&self) -> usize {
        self.pairs_scored.load(Ordering::Relaxed)
    }

    /// Number of internal batches processed so far.
    pub fn batches(&self) -> usize {
        self.batches.load(Ordering::Relaxed)
    }

    pub fn triple(premise: &str, hypothesis: &str) -> EntailmentTriple {
        let p: HashSet<String> = tokens(premise).into_iter().collect();
        let h: HashSet<String> = tokens(hypothesis).into_iter().collect();
        let overlap = if h.is_empty() {
            0.0
        } else {
            h.iter().filter(|t| p.contains(*t)).count() as f64 / h.len() as f64
        };
        let negated = p.contains("not") != h.contains("not");
        let (e, n, c) = if negated {
            (0.0, 1.0 - overlap, overlap)
        } else {
            (overlap, 1.0 - overlap, 0.0)
        };
        EntailmentTriple::new(e, n, c).expect("mock triple is a distribution")
    }
}

impl EntailmentBackend for MockBackend {
    fn entail_batch(&self, pairs: &[(&str, &str)]) -> Result<Vec<EntailmentTriple>, NliError> {
        validate_pairs(pairs, self.budget)?;
        let mut out = Vec::with_capacity(pairs.len());
        for chunk in pairs.chunks(self.batch_size) {
            self.batches.fetch_add(1, Ordering::Relaxed);
            out.extend(chunk.iter().map(|(p, h)| MockBackend::triple(p, h)));
        }
        self.pairs_scored.fetch_add(pairs.len(), Ordering::Relaxed);
        Ok(out)
    }

    fn budget(&self) -> Option<PremiseBudget> {
        self.budget
    }

    fn describe(&self) -> String {
        match self.budget {
            Some(b) => format!("mock(budget={})", b.max_units()),
            None => "mock".to_string(),
        }
    }
}
