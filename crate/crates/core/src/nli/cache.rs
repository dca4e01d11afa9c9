use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rayon::prelude::*;

use super::{EntailmentBackend, EntailmentTriple, NliError, PremiseBudget};

/// Memoizes triples on `(premise, hypothesis)` for the lifetime of the value.
///
/// Misses within one call are deduplicated and sent to the inner backend as a
/// single batch. Safe for concurrent use.
pub struct Memoized<B> {
    inner: B,
    memo: Mutex<HashMap<(String, String), EntailmentTriple>>,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl<B: EntailmentBackend> Memoized<B> {
    pub fn new(inner: B) -> Self {
        Memoized {
            inner,
            memo: Mutex::new(HashMap::new()),
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
        }
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::Relaxed)
    }
}

impl<B: EntailmentBackend> EntailmentBackend for Memoized<B> {
    fn entail_batch(&self, pairs: &[(&str, &str)]) -> Result<Vec<EntailmentTriple>, NliError> {
        let mut out: Vec<Option<EntailmentTriple>> = vec![None; pairs.len()];
        // first index of each distinct missing pair
        let mut pending: Vec<usize> = Vec::new();
        let mut seen: HashMap<(&str, &str), usize> = HashMap::new();
        {
            let memo = self.memo.lock().expect("memo lock poisoned");
            for (i, &(p, h)) in pairs.iter().enumerate() {
                if let Some(t) = memo.get(&(p.to_string(), h.to_string())) {
                    out[i] = Some(*t);
                } else if let std::collections::hash_map::Entry::Vacant(e) = seen.entry((p, h)) {
                    e.insert(pending.len());
                    pending.push(i);
                }
            }
        }
        self.hits
            .fetch_add(pairs.len() - seen.len(), Ordering::Relaxed);
        self.misses.fetch_add(seen.len(), Ordering::Relaxed);
        if !pending.is_empty() {
            let request: Vec<(&str, &str)> = pending.iter().map(|&i| pairs[i]).collect();
            let fresh = self
                .inner
                .entail_batch(&request)
                .map_err(|e| remap_index(e, &pending))?;
            let mut memo = self.memo.lock().expect("memo lock poisoned");
            for (&i, t) in pending.iter().zip(&fresh) {
                memo.insert((pairs[i].0.to_string(), pairs[i].1.to_string()), *t);
            }
            for (i, slot) in out.iter_mut().enumerate() {
                if slot.is_none() {
                    *slot = Some(fresh[seen[&pairs[i]]]);
                }
            }
        }
        Ok(out.into_iter().map(|t| t.expect("filled")).collect())
    }

    fn budget(&self) -> Option<PremiseBudget> {
        self.inner.budget()
    }

    fn describe(&self) -> String {
        self.inner.describe()
    }
}

fn remap_index(err: NliError, pending: &[usize]) -> NliError {
    let index_of = |i: usize| pending.get(i).copied().unwrap_or(i);
    match err {
        NliError::OversizedPremise {
            index,
            units,
            max_units,
        } => NliError::OversizedPremise {
            index: index_of(index),
            units,
            max_units,
        },
        NliError::EmptyInput { index } => NliError::EmptyInput {
            index: index_of(index),
        },
        NliError::InvalidTriple { index, message } => NliError::InvalidTriple {
            index: index_of(index),
            message,
        },
        NliError::Backend { index, message } => NliError::Backend {
            index: index.map(index_of),
            message,
        },
    }
}

/// Splits requests into fixed-size batches, optionally dispatched in parallel.
/// Output order always matches input order.
pub struct Batched<B> {
    inner: B,
    batch_size: usize,
    parallel: bool,
}

impl<B: EntailmentBackend> Batched<B> {
    pub fn new(inner: B, batch_size: usize) -> Self {
        Batched {
            inner,
            batch_size: batch_size.max(1),
            parallel: false,
        }
    }

    pub fn parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }
}

impl<B: EntailmentBackend> EntailmentBackend for Batched<B> {
    fn entail_batch(&self, pairs: &[(&str, &str)]) -> Result<Vec<EntailmentTriple>, NliError> {
        let run = |(k, chunk): (usize, &[(&str, &str)])| {
            self.inner
                .entail_batch(chunk)
                .map_err(|e| e.offset(k * self.batch_size))
        };
        let parts: Vec<Result<Vec<EntailmentTriple>, NliError>> = if self.parallel {
            pairs
                .par_chunks(self.batch_size)
                .enumerate()
                .map(run)
                .collect()
        } else {
            pairs.chunks(self.batch_size).enumerate().map(run).collect()
        };
        let mut out = Vec::with_capacity(pairs.len());
        for part in parts {
            out.extend(part?);
        }
        Ok(out)
    }

    fn budget(&self) -> Option<PremiseBudget> {
        self.inner.budget()
    }

    fn describe(&self) -> String {
        self.inner.describe()
    }
}
