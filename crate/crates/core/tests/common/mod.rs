#![allow(dead_code)] // compiled separately into each test binary

//! Shared helpers for the integration suites: a deterministic RNG, random
//! word generators, and a fast path tracer for folded graphs.

use mtf_core::stallings::StallingsGraph;
use mtf_core::words::{Letter, Word};

pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng { state: seed }
    }

    pub fn next(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next() % n.max(1) as u64) as usize
    }

    pub fn word(&mut self, rank: u32, len: usize) -> Word {
        Word::reduce((0..len).map(|_| {
            Letter::new(
                self.below(rank as usize) as u32 + 1,
                if self.next().is_multiple_of(2) { 1 } else { -1 },
            )
        }))
    }

    /// Reduced word of exactly the requested length (no mid-word cancellation).
    pub fn reduced_word(&mut self, rank: u32, len: usize) -> Word {
        let mut letters: Vec<Letter> = Vec::with_capacity(len);
        while letters.len() < len {
            let l = Letter::new(
                self.below(rank as usize) as u32 + 1,
                if self.next().is_multiple_of(2) { 1 } else { -1 },
            );
            if letters.last().is_some_and(|p| *p == l.inverse()) {
                continue;
            }
            letters.push(l);
        }
        Word::reduce(letters)
    }
}

/// Dense traversal table for repeated membership queries on a folded graph.
pub struct Tracer {
    rank: usize,
    /// step[v * 2R + 2(l-1) + dir] = next vertex, usize::MAX if absent
    step: Vec<usize>,
    pub base: usize,
}

impl Tracer {
    pub fn new(g: &StallingsGraph) -> Self {
        assert!(g.is_folded());
        let rank = g.ambient_rank() as usize;
        let mut step = vec![usize::MAX; g.vertex_count().max(1) * 2 * rank];
        for e in g.edges() {
            step[e.src * 2 * rank + 2 * (e.label as usize - 1)] = e.dst;
            step[e.dst * 2 * rank + 2 * (e.label as usize - 1) + 1] = e.src;
        }
        Tracer {
            rank,
            step,
            base: g.basepoint().expect("pointed"),
        }
    }

    pub fn trace(&self, from: usize, w: &Word) -> Option<usize> {
        let mut cur = from;
        for l in w.letters() {
            let dir = usize::from(l.sign() < 0);
            cur = match self.step[cur * 2 * self.rank + 2 * (l.index() as usize - 1) + dir] {
                usize::MAX => return None,
                v => v,
            };
        }
        Some(cur)
    }

    pub fn member(&self, w: &Word) -> bool {
        self.trace(self.base, w) == Some(self.base)
    }
}

/// All reduced words of length 1..=max_len over the given rank.
pub fn all_reduced_words(rank: u32, max_len: usize) -> Vec<Word> {
    let mut out = Vec::new();
    let mut frontier: Vec<Vec<Letter>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for cur in &frontier {
            for idx in 1..=rank {
                for sign in [1i8, -1] {
                    let l = Letter::new(idx, sign);
                    if cur.last().is_some_and(|p| *p == l.inverse()) {
                        continue;
                    }
                    let mut w = cur.clone();
                    w.push(l);
                    next.push(w);
                }
            }
        }
        out.extend(next.iter().map(|v| Word::reduce(v.iter().copied())));
        frontier = next;
    }
    out
}

/// Prints the acceptance verdict line for a criterion, preserving panics.
pub fn criterion<F: FnOnce() + std::panic::UnwindSafe>(number: u32, name: &str, body: F) {
    let start = std::time::Instant::now();
    let result = std::panic::catch_unwind(body);
    let elapsed = start.elapsed();
    match result {
        Ok(()) => println!("ACCEPTANCE {number:2} ({name}): PASS  [{elapsed:.2?}]"),
        Err(e) => {
            println!("ACCEPTANCE {number:2} ({name}): FAIL  [{elapsed:.2?}]");
            std::panic::resume_unwind(e);
        }
    }
}
