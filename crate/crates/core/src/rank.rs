//! Fenwick tree over a bitmap, answering "position of the k-th set bit" in
//! logarithmic time. Used to pick the r-th valid frame without scanning the
//! whole data store.

#[derive(Debug, Clone)]
pub(crate) struct RankIndex {
    tree: Vec<u32>,
    top: usize,
}

impl RankIndex {
    pub(crate) fn new(len: usize) -> Self {
        let top = if len == 0 {
            0
        } else {
            1 << (usize::BITS - 1 - len.leading_zeros())
        };
        Self {
            tree: vec![0; len + 1],
            top,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.tree.len() - 1
    }

    pub(crate) fn set(&mut self, pos: usize) {
        self.update(pos, true);
    }

    pub(crate) fn clear(&mut self, pos: usize) {
        self.update(pos, false);
    }

    fn update(&mut self, pos: usize, add: bool) {
        let mut i = pos + 1;
        while i < self.tree.len() {
            if add {
                self.tree[i] += 1;
            } else {
                self.tree[i] -= 1;
            }
            i += i & i.wrapping_neg();
        }
    }

    /// Number of set bits.
    pub(crate) fn count(&self) -> usize {
        let mut i = self.len();
        let mut total = 0usize;
        while i > 0 {
            total += self.tree[i] as usize;
            i &= i - 1;
        }
        total
    }

    /// Position of the `k`-th set bit (0-based), or `None` if fewer than
    /// `k + 1` bits are set.
    pub(crate) fn select(&self, k: usize) -> Option<usize> {
        let mut remaining = k as u64 + 1;
        let mut pos = 0usize;
        let mut step = self.top;
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && u64::from(self.tree[next]) < remaining {
                pos = next;
                remaining -= u64::from(self.tree[next]);
            }
            step >>= 1;
        }
        (pos < self.len()).then_some(pos)
    }
}
