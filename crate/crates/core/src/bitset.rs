//! Fixed-capacity bitset over dense vertex ids.
//!
//! All set/counting primitives in this crate reduce to word-level kernels on
//! `VertexSet`, so the representation is kept plain: a `Vec<u64>` plus the
//! capacity it was created with.

const WORD_BITS: usize = 64;

/// Set of vertices out of a fixed universe `0..n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    n: usize,
    words: Vec<u64>,
}

#[inline]
fn word_count(n: usize) -> usize {
    n.div_ceil(WORD_BITS)
}

impl VertexSet {
    /// Empty set over the universe `0..n`.
    pub fn new(n: usize) -> Self {
        VertexSet { n, words: vec![0; word_count(n)] }
    }

    /// Full set `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        let mut s = Self::new(n);
        for w in s.words.iter_mut() {
            *w = !0;
        }
        s.trim_tail();
        s
    }

    pub fn from_iter<I: IntoIterator<Item = u32>>(n: usize, iter: I) -> Self {
        let mut s = Self::new(n);
        for v in iter {
            s.insert(v);
        }
        s
    }

    fn trim_tail(&mut self) {
        let tail = self.n % WORD_BITS;
        if tail != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
    }

    /// Capacity of the universe (not the number of members).
    #[inline]
    pub fn capacity(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    #[inline]
    pub fn contains(&self, v: u32) -> bool {
        let v = v as usize;
        v < self.n && self.words[v / WORD_BITS] >> (v % WORD_BITS) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, v: u32) {
        let v = v as usize;
        assert!(v < self.n, "vertex {v} out of range 0..{}", self.n);
        self.words[v / WORD_BITS] |= 1u64 << (v % WORD_BITS);
    }

    #[inline]
    pub fn remove(&mut self, v: u32) {
        let v = v as usize;
        if v < self.n {
            self.words[v / WORD_BITS] &= !(1u64 << (v % WORD_BITS));
        }
    }

    pub fn clear(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
    }

    pub fn union_with(&mut self, other: &VertexSet) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &VertexSet) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn difference_with(&mut self, other: &VertexSet) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        let mut s = self.clone();
        s.union_with(other);
        s
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        let mut s = self.clone();
        s.intersect_with(other);
        s
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        let mut s = self.clone();
        s.difference_with(other);
        s
    }

    pub fn intersection_len(&self, other: &VertexSet) -> usize {
        debug_assert_eq!(self.n, other.n);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// Smallest member, if any.
    pub fn first(&self) -> Option<u32> {
        for (i, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some((i * WORD_BITS) as u32 + w.trailing_zeros());
            }
        }
        None
    }

    /// Members with id in `lo..hi`.
    pub fn count_range(&self, lo: u32, hi: u32) -> usize {
        let mut masked = self.clone();
        masked.mask_range(lo, hi);
        masked.len()
    }

    fn mask_range(&mut self, lo: u32, hi: u32) {
        let (lo, hi) = (lo as usize, (hi as usize).min(self.n));
        for (i, w) in self.words.iter_mut().enumerate() {
            let start = i * WORD_BITS;
            let end = start + WORD_BITS;
            if end <= lo || start >= hi {
                *w = 0;
                continue;
            }
            if lo > start {
                *w &= !0u64 << (lo - start);
            }
            if hi < end {
                *w &= (1u64 << (hi - start)) - 1;
            }
        }
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter { set: self, word_idx: 0, current: self.words.first().copied().unwrap_or(0) }
    }

    pub fn to_sorted_vec(&self) -> Vec<u32> {
        self.iter().collect()
    }
}

pub struct Iter<'a> {
    set: &'a VertexSet,
    word_idx: usize,
    current: u64,
}

impl Iterator for Iter<'_> {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        while self.current == 0 {
            self.word_idx += 1;
            if self.word_idx >= self.set.words.len() {
                return None;
            }
            self.current = self.set.words[self.word_idx];
        }
        let bit = self.current.trailing_zeros();
        self.current &= self.current - 1;
        Some((self.word_idx * WORD_BITS) as u32 + bit)
    }
}

impl std::fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl<'a> IntoIterator for &'a VertexSet {
    type Item = u32;
    type IntoIter = Iter<'a>;
    fn into_iter(self) -> Iter<'a> {
        self.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_remove_contains() {
        let mut s = VertexSet::new(130);
        s.insert(0);
        s.insert(64);
        s.insert(129);
        assert!(s.contains(0) && s.contains(64) && s.contains(129));
        assert_eq!(s.len(), 3);
        s.remove(64);
        assert!(!s.contains(64));
        assert_eq!(s.to_sorted_vec(), vec![0, 129]);
    }

    #[test]
    fn full_set_trims_tail() {
        let s = VertexSet::full(70);
        assert_eq!(s.len(), 70);
        assert_eq!(s.first(), Some(0));
    }

    #[test]
    fn set_algebra() {
        let a = VertexSet::from_iter(10, [1, 3, 5, 7]);
        let b = VertexSet::from_iter(10, [3, 4, 5]);
        assert_eq!(a.intersection(&b).to_sorted_vec(), vec![3, 5]);
        assert_eq!(a.union(&b).len(), 5);
        assert_eq!(a.difference(&b).to_sorted_vec(), vec![1, 7]);
        assert_eq!(a.intersection_len(&b), 2);
        assert!(!a.is_disjoint(&b));
        assert!(a.intersection(&b).is_subset(&a));
    }

    #[test]
    fn range_count() {
        let s = VertexSet::from_iter(200, [0, 5, 63, 64, 65, 150, 199]);
        assert_eq!(s.count_range(1, 64), 2);
        assert_eq!(s.count_range(64, 200), 4);
        assert_eq!(s.count_range(0, 200), 7);
        assert_eq!(s.count_range(66, 150), 0);
    }
}
