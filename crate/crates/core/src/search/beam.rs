use std::cmp::Ordering;
use std::collections::HashMap;

/// A scored candidate. `key` identifies it and breaks ties; `group` is the
/// part that counts towards the diversity floor.
#[derive(Clone, Debug)]
pub struct Entry<T> {
    pub score: f64,
    pub len: usize,
    pub key: String,
    pub group: String,
    pub item: T,
}

impl<T> Entry<T> {
    /// Higher score first, then shorter, then lexicographically smaller key.
    pub fn rank_cmp(&self, other: &Entry<T>) -> Ordering {
        other
            .score
            .total_cmp(&self.score)
            .then(self.len.cmp(&other.len))
            .then_with(|| self.key.cmp(&other.key))
    }

    fn beats(&self, other: &Entry<T>) -> bool {
        self.rank_cmp(other) == Ordering::Less
    }
}

/// Bounded top-k container. With a nonzero `floor`, a replacement never drops
/// the number of distinct groups below `min(floor, current)`.
#[derive(Clone, Debug)]
pub struct Beam<T> {
    capacity: usize,
    floor: usize,
    entries: Vec<Entry<T>>,
}

impl<T> Beam<T> {
    pub fn new(capacity: usize) -> Self {
        Self::with_floor(capacity, 0)
    }

    pub fn with_floor(capacity: usize, floor: usize) -> Self {
        Beam {
            capacity: capacity.max(1),
            floor,
            entries: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn entries(&self) -> &[Entry<T>] {
        &self.entries
    }

    pub fn contains_key(&self, key: &str) -> bool {
        self.entries.iter().any(|e| e.key == key)
    }

    pub fn min_score(&self) -> Option<f64> {
        self.worst_index(|_| true).map(|i| self.entries[i].score)
    }

    pub fn distinct_groups(&self) -> usize {
        let mut groups: Vec<&str> = self.entries.iter().map(|e| e.group.as_str()).collect();
        groups.sort_unstable();
        groups.dedup();
        groups.len()
    }

    fn worst_index(&self, keep: impl Fn(&Entry<T>) -> bool) -> Option<usize> {
        let mut worst: Option<usize> = None;
        for (i, e) in self.entries.iter().enumerate() {
            if keep(e) && worst.is_none_or(|w| self.entries[w].beats(e)) {
                worst = Some(i);
            }
        }
        worst
    }

    /// Insert under capacity, otherwise replace the weakest entry the
    /// candidate beats. Returns whether the candidate was kept.
    pub fn add_if_required(&mut self, cand: Entry<T>) -> bool {
        if self.contains_key(&cand.key) {
            return false;
        }
        if self.entries.len() < self.capacity {
            self.entries.push(cand);
            return true;
        }
        let Some(worst) = self.worst_index(|_| true) else {
            return false;
        };
        if !cand.beats(&self.entries[worst]) {
            return false;
        }
        if self.floor == 0 {
            self.entries[worst] = cand;
            return true;
        }
        let mut sizes: HashMap<&str, usize> = HashMap::new();
        for e in &self.entries {
            *sizes.entry(e.group.as_str()).or_default() += 1;
        }
        let before = sizes.len();
        let fresh = !sizes.contains_key(cand.group.as_str());
        let lost = sizes[self.entries[worst].group.as_str()] == 1 && self.entries[worst].group != cand.group;
        let after = before + fresh as usize - lost as usize;
        if after >= self.floor.min(before) {
            self.entries[worst] = cand;
            return true;
        }
        // evict from a group that can spare an entry instead
        let crowded: Vec<String> = sizes
            .iter()
            .filter(|(_, &n)| n > 1)
            .map(|(g, _)| g.to_string())
            .collect();
        match self.worst_index(|e| crowded.contains(&e.group)) {
            Some(i) if cand.beats(&self.entries[i]) => {
                self.entries[i] = cand;
                true
            }
            _ => false,
        }
    }

    /// Entries best first.
    pub fn into_sorted(mut self) -> Vec<Entry<T>> {
        self.entries.sort_by(|a, b| a.rank_cmp(b));
        self.entries
    }

    pub fn sorted(&self) -> Vec<&Entry<T>> {
        let mut v: Vec<&Entry<T>> = self.entries.iter().collect();
        v.sort_by(|a, b| a.rank_cmp(b));
        v
    }
}
