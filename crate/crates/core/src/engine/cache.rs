use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};
use std::time::Duration;

#[cfg(not(target_arch = "wasm32"))]
use std::time::Instant;
// std's clock panics on wasm32-unknown-unknown
#[cfg(target_arch = "wasm32")]
use web_time::Instant;

use crate::engine::kernel::Kernel;
use crate::engine::signature::Signature;
use crate::error::Result;

/// Compiled kernels by signature. Entries are never evicted.
#[derive(Default)]
pub(crate) struct KernelCache {
    map: RwLock<HashMap<Signature, Arc<Kernel>>>,
    pub hits: AtomicU64,
    pub misses: AtomicU64,
    pub constructions: AtomicU64,
    pub construction_nanos: AtomicU64,
}

impl KernelCache {
    /// Returns the cached kernel or builds, records and returns a new one.
    /// Concurrent misses on one signature construct it once.
    pub fn get_or_construct(
        &self,
        sig: &Signature,
        build: impl FnOnce() -> Result<Kernel>,
    ) -> Result<Arc<Kernel>> {
        if let Some(k) = self.map.read().expect("cache lock").get(sig) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(k.clone());
        }
        let mut map = self.map.write().expect("cache lock");
        if let Some(k) = map.get(sig) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(k.clone());
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let start = Instant::now();
        let kernel = Arc::new(build()?);
        self.construction_nanos
            .fetch_add(start.elapsed().as_nanos() as u64, Ordering::Relaxed);
        self.constructions.fetch_add(1, Ordering::Relaxed);
        map.insert(sig.clone(), kernel.clone());
        Ok(kernel)
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock").len()
    }

    pub fn construction_time(&self) -> Duration {
        Duration::from_nanos(self.construction_nanos.load(Ordering::Relaxed))
    }

    pub fn signatures(&self) -> Vec<Signature> {
        let mut v: Vec<_> = self
            .map
            .read()
            .expect("cache lock")
            .keys()
            .cloned()
            .collect();
        v.sort();
        v
    }
}
