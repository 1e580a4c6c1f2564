/// Fixed-length bitset backed by 64-bit words.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct BitSet {
    words: Vec<u64>,
    len: usize,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    /// Wraps raw words. Bits at or beyond `len` must be zero.
    pub fn from_words(words: Vec<u64>, len: usize) -> Option<Self> {
        if words.len() != len.div_ceil(64) {
            return None;
        }
        let tail = len % 64;
        if tail != 0 && words.last().is_some_and(|w| w >> tail != 0) {
            return None;
        }
        Some(Self { words, len })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, pos: usize) -> bool {
        debug_assert!(pos < self.len);
        self.words[pos >> 6] & (1u64 << (pos & 63)) != 0
    }

    #[inline]
    pub fn set(&mut self, pos: usize) {
        debug_assert!(pos < self.len);
        self.words[pos >> 6] |= 1u64 << (pos & 63);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Set positions in `[lo, hi)`, ascending.
    pub fn ones_in(&self, lo: usize, hi: usize) -> Ones<'_> {
        let hi = hi.min(self.len);
        let lo = lo.min(hi);
        let word = lo >> 6;
        let current = if lo < hi {
            self.words[word] & (!0u64 << (lo & 63))
        } else {
            0
        };
        Ones {
            words: &self.words,
            word,
            current,
            hi,
        }
    }

    pub fn ones(&self) -> Ones<'_> {
        self.ones_in(0, self.len)
    }
}

pub struct Ones<'a> {
    words: &'a [u64],
    word: usize,
    current: u64,
    hi: usize,
}

impl Iterator for Ones<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let pos = (self.word << 6) + self.current.trailing_zeros() as usize;
                if pos >= self.hi {
                    self.current = 0;
                    self.word = self.words.len();
                    return None;
                }
                self.current &= self.current - 1;
                return Some(pos);
            }
            self.word += 1;
            if self.word >= self.words.len() || (self.word << 6) >= self.hi {
                return None;
            }
            self.current = self.words[self.word];
        }
    }
}
