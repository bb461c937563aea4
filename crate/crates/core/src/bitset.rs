/// Fixed-size set of DP states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct StateSet {
    words: Vec<u64>,
    len: usize,
}

impl StateSet {
    pub fn new(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i >> 6] |= 1 << (i & 63);
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i >> 6] >> (i & 63) & 1 == 1
    }

    /// Set bits in `[start, end)`, ascending.
    pub fn ones_in(&self, start: usize, end: usize) -> impl Iterator<Item = usize> + '_ {
        let end = end.min(self.len);
        let first = start >> 6;
        let last = end.div_ceil(64);
        (first..last).flat_map(move |wi| {
            let mut w = self.words[wi];
            std::iter::from_fn(move || {
                while w != 0 {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    let i = (wi << 6) + b;
                    if i >= start && i < end {
                        return Some(i);
                    }
                }
                None
            })
        })
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.ones_in(0, self.len)
    }
}
