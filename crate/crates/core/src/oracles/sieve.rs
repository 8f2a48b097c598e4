//! Sieve of Eratosthenes, plain and segmented.

use std::sync::OnceLock;

/// Default segment size in bytes; one byte per odd number, sized to sit in L2.
pub const DEFAULT_BLOCK: usize = 1 << 18;

/// All primes `<= limit`.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    let mut i = 2;
    while i * i <= n {
        if !composite[i] {
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
        i += 1;
    }
    for (k, &c) in composite.iter().enumerate().skip(2) {
        if !c {
            out.push(k as u64);
        }
    }
    out
}

/// Primes below 10^6, shared by trial division.
pub fn small_primes() -> &'static [u64] {
    static TABLE: OnceLock<Vec<u64>> = OnceLock::new();
    TABLE.get_or_init(|| primes_up_to(1_000_000))
}

/// Ascending primes up to `limit`, produced one odd-only segment at a time.
pub struct SegmentedSieve {
    limit: u64,
    block: usize,
    base_primes: Vec<u64>,
    /// next odd number not yet sieved
    low: u64,
    marks: Vec<bool>,
    buffer: Vec<u64>,
    pos: usize,
    emitted_two: bool,
}

impl SegmentedSieve {
    pub fn new(limit: u64) -> Self {
        Self::with_block(limit, DEFAULT_BLOCK)
    }

    pub fn with_block(limit: u64, block: usize) -> Self {
        let root = limit.isqrt();
        let base_primes = primes_up_to(root).into_iter().filter(|&p| p > 2).collect();
        SegmentedSieve {
            limit,
            block: block.max(64),
            base_primes,
            low: 3,
            marks: Vec::new(),
            buffer: Vec::new(),
            pos: 0,
            emitted_two: false,
        }
    }

    fn fill(&mut self) -> bool {
        self.buffer.clear();
        self.pos = 0;
        while self.buffer.is_empty() {
            if self.low > self.limit {
                return false;
            }
            // marks[i] covers the odd number low + 2i
            let span = (((self.limit - self.low) / 2 + 1) as usize).min(self.block);
            let high = self.low + 2 * span as u64; // exclusive
            self.marks.clear();
            self.marks.resize(span, false);
            for &p in &self.base_primes {
                let sq = p * p;
                if sq >= high {
                    break;
                }
                let mut start = if sq >= self.low {
                    sq
                } else {
                    let r = self.low.div_ceil(p) * p;
                    if r % 2 == 0 {
                        r + p
                    } else {
                        r
                    }
                };
                while start < high {
                    self.marks[((start - self.low) / 2) as usize] = true;
                    start += 2 * p;
                }
            }
            for (i, &m) in self.marks.iter().enumerate() {
                if !m {
                    self.buffer.push(self.low + 2 * i as u64);
                }
            }
            self.low = high;
        }
        true
    }
}

impl Iterator for SegmentedSieve {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if !self.emitted_two {
            self.emitted_two = true;
            if self.limit >= 2 {
                return Some(2);
            }
            return None;
        }
        if self.pos == self.buffer.len() && !self.fill() {
            return None;
        }
        let p = self.buffer[self.pos];
        self.pos += 1;
        Some(p)
    }
}
