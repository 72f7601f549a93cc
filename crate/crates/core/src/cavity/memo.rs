use std::cell::RefCell;
use std::sync::atomic::{AtomicUsize, Ordering};

use dashmap::DashMap;
use rustc_hash::{FxBuildHasher, FxHashMap};

use super::Lanes;

pub(crate) trait MemoStore {
    fn get(&self, key: &[i32]) -> Option<Lanes>;
    fn insert(&self, key: &[i32], value: Lanes);
    fn len(&self) -> usize;
}

/// Single-worker table.
pub(crate) struct LocalMemo {
    map: RefCell<FxHashMap<Box<[i32]>, Lanes>>,
    cap: usize,
}

impl LocalMemo {
    pub fn new(cap: usize) -> Self {
        Self {
            map: RefCell::new(FxHashMap::default()),
            cap,
        }
    }
}

impl MemoStore for LocalMemo {
    fn get(&self, key: &[i32]) -> Option<Lanes> {
        self.map.borrow().get(key).copied()
    }

    fn insert(&self, key: &[i32], value: Lanes) {
        let mut map = self.map.borrow_mut();
        if map.len() < self.cap {
            map.insert(key.into(), value);
        }
    }

    fn len(&self) -> usize {
        self.map.borrow().len()
    }
}

/// Table shared by all workers of one query.
pub(crate) struct SharedMemo {
    map: DashMap<Box<[i32]>, Lanes, FxBuildHasher>,
    len: AtomicUsize,
    cap: usize,
}

impl SharedMemo {
    pub fn new(cap: usize) -> Self {
        Self {
            map: DashMap::with_hasher(FxBuildHasher),
            len: AtomicUsize::new(0),
            cap,
        }
    }
}

impl MemoStore for SharedMemo {
    fn get(&self, key: &[i32]) -> Option<Lanes> {
        self.map.get(key).map(|v| *v)
    }

    fn insert(&self, key: &[i32], value: Lanes) {
        if self.len.load(Ordering::Relaxed) >= self.cap {
            return;
        }
        if self.map.insert(key.into(), value).is_none() {
            self.len.fetch_add(1, Ordering::Relaxed);
        }
    }

    fn len(&self) -> usize {
        self.len.load(Ordering::Relaxed)
    }
}

/// No table at all.
pub(crate) struct NoMemo;

impl MemoStore for NoMemo {
    fn get(&self, _: &[i32]) -> Option<Lanes> {
        None
    }

    fn insert(&self, _: &[i32], _: Lanes) {}

    fn len(&self) -> usize {
        0
    }
}
