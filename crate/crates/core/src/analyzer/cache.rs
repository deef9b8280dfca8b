use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::Error;
use crate::funcspace::VectorFunction;
use crate::par::{map_ordered, Execution};

use super::map::MapUnderTest;
use super::witness::Witness;

type Key = Vec<u64>;

fn key_of(f: &VectorFunction) -> Key {
    f.values()
        .iter()
        .flat_map(|v| v.entries().iter().flat_map(|z| [z.re.to_bits(), z.im.to_bits()]))
        .collect()
}

#[derive(Default)]
struct State {
    entries: HashMap<Key, (VectorFunction, VectorFunction)>,
    first_error: Option<(Key, VectorFunction, String)>,
}

/// Memoising wrapper that remembers every input the analysis evaluated, so
/// that each one can be replayed once at the end to catch impure maps.
pub struct CachedMap {
    inner: MapUnderTest,
    state: Arc<Mutex<State>>,
}

impl CachedMap {
    pub fn new(inner: MapUnderTest) -> Self {
        Self {
            inner,
            state: Arc::default(),
        }
    }

    /// A [`MapUnderTest`] view whose evaluations go through the cache.
    pub fn as_map(&self) -> MapUnderTest {
        let inner = self.inner.clone();
        let state = self.state.clone();
        MapUnderTest::new(
            inner.domain().clone(),
            inner.codomain().clone(),
            inner.model().clone(),
            move |f| {
                let key = key_of(f);
                if let Some((_, out)) = state.lock().expect("cache lock").entries.get(&key) {
                    return Ok(out.clone());
                }
                match inner.eval(f) {
                    Ok(out) => {
                        let mut st = state.lock().expect("cache lock");
                        let entry = st.entries.entry(key).or_insert_with(|| (f.clone(), out));
                        Ok(entry.1.clone())
                    }
                    Err(e) => {
                        let msg = e.to_string();
                        let mut st = state.lock().expect("cache lock");
                        let replace = st.first_error.as_ref().is_none_or(|(k, _, _)| key < *k);
                        if replace {
                            st.first_error = Some((key, f.clone(), msg));
                        }
                        Err(e)
                    }
                }
            },
        )
    }

    pub fn len(&self) -> usize {
        self.state.lock().expect("cache lock").entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The failing input with the smallest key, if any evaluation failed.
    pub fn first_error(&self) -> Option<(VectorFunction, String)> {
        self.state
            .lock()
            .expect("cache lock")
            .first_error
            .as_ref()
            .map(|(_, f, m)| (f.clone(), m.clone()))
    }

    /// Re-evaluates every recorded input with the underlying map and returns
    /// a witness for the first (by input key) whose output changed.
    pub fn replay(&self, mode: Execution) -> Option<Witness> {
        let mut recorded: Vec<(Key, VectorFunction, VectorFunction)> = self
            .state
            .lock()
            .expect("cache lock")
            .entries
            .iter()
            .map(|(k, (i, o))| (k.clone(), i.clone(), o.clone()))
            .collect();
        recorded.sort_by(|a, b| a.0.cmp(&b.0));
        let outcomes = map_ordered(&recorded, mode, |(_, input, first)| match self.inner.eval(input) {
            Ok(second) if second == *first => None,
            Ok(second) => Some(Witness::Purity {
                input: input.clone(),
                first: first.clone(),
                second,
            }),
            Err(e) => Some(Witness::Evaluation {
                input: Some(input.clone()),
                message: replay_message(&e),
            }),
        });
        outcomes.into_iter().flatten().next()
    }
}

fn replay_message(e: &Error) -> String {
    format!("replay failed: {e}")
}
