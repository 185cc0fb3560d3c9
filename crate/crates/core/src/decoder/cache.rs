use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::base_model::TranslationContext;
use crate::datastore::RetrievalSet;

type CacheKey = (Vec<u32>, Vec<u32>);

/// Memoizes retrievals by (source, last `window` prefix tokens), the inputs
/// that fully determine a windowed model's key.
#[derive(Debug, Default)]
pub struct RetrievalCache {
    map: Mutex<HashMap<CacheKey, Arc<RetrievalSet>>>,
}

impl RetrievalCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub(crate) fn get_or_insert<E>(
        &self,
        ctx: TranslationContext<'_>,
        window: usize,
        fetch: impl FnOnce() -> Result<RetrievalSet, E>,
    ) -> Result<Arc<RetrievalSet>, E> {
        let start = ctx.prefix.len().saturating_sub(window);
        let key = (ctx.source.to_vec(), ctx.prefix[start..].to_vec());
        if let Some(hit) = self.map.lock().expect("cache lock").get(&key) {
            return Ok(hit.clone());
        }
        let value = Arc::new(fetch()?);
        self.map
            .lock()
            .expect("cache lock")
            .entry(key)
            .or_insert(value.clone());
        Ok(value)
    }
}
