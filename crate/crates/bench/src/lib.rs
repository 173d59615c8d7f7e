//! Benchmark-only crate; instance generators live here so the benches stay
//! small.

use mtf_core::words::{Letter, Word};

pub struct SplitMix {
    state: u64,
}

impl SplitMix {
    pub fn new(seed: u64) -> Self {
        SplitMix { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n.max(1) as u64) as usize
    }
}

/// Deterministic batch of reduced words for folding benchmarks.
pub fn word_batch(seed: u64, count: usize, rank: u32, max_len: usize) -> Vec<Vec<Word>> {
    let mut rng = SplitMix::new(seed);
    (0..count)
        .map(|_| {
            let gens = 1 + rng.below(4);
            (0..gens)
                .map(|_| {
                    let len = 1 + rng.below(max_len);
                    let mut letters: Vec<Letter> = Vec::with_capacity(len);
                    while letters.len() < len {
                        let l = Letter::new(
                            rng.below(rank as usize) as u32 + 1,
                            if rng.next_u64().is_multiple_of(2) {
                                1
                            } else {
                                -1
                            },
                        );
                        if letters.last().is_some_and(|p| *p == l.inverse()) {
                            continue;
                        }
                        letters.push(l);
                    }
                    Word::reduce(letters)
                })
                .collect()
        })
        .collect()
}
