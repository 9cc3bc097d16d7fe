use std::sync::Arc;
use std::time::SystemTime;

use indexmap::IndexMap;
use lumenlift_core::ImageF32;

/// An uploaded image plus the reduced copy used for previews.
#[derive(Debug)]
pub struct SessionImage {
    pub id: String,
    pub image: ImageF32,
    pub preview: ImageF32,
    pub created_at: SystemTime,
}

impl SessionImage {
    pub fn new(image: ImageF32, preview_max_dim: usize) -> Self {
        let preview = image.area_downsample(preview_max_dim);
        Self {
            id: uuid::Uuid::new_v4().simple().to_string(),
            image,
            preview,
            created_at: SystemTime::now(),
        }
    }
}

/// Least-recently-used session map. Insertion order doubles as recency order:
/// the front entry is evicted first.
#[derive(Debug)]
pub struct SessionStore {
    capacity: usize,
    entries: IndexMap<String, Arc<SessionImage>>,
}

impl SessionStore {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity: capacity.max(1),
            entries: IndexMap::new(),
        }
    }

    /// Inserts a session, evicting the least recently used ones beyond capacity.
    /// Returns the evicted ids.
    pub fn insert(&mut self, session: SessionImage) -> Vec<String> {
        self.entries.insert(session.id.clone(), Arc::new(session));
        let mut evicted = Vec::new();
        while self.entries.len() > self.capacity {
            if let Some((id, _)) = self.entries.shift_remove_index(0) {
                evicted.push(id);
            }
        }
        evicted
    }

    /// Looks a session up and marks it as most recently used.
    pub fn get(&mut self, id: &str) -> Option<Arc<SessionImage>> {
        let index = self.entries.get_index_of(id)?;
        let last = self.entries.len() - 1;
        self.entries.move_index(index, last);
        self.entries.get_index(last).map(|(_, s)| Arc::clone(s))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
