//! Freely reduced words over a finite ranked alphabet with formal inverses,
//! and endomorphisms of free groups given by basis-letter images.
//!
//! Words are kept reduced at all times: every constructor passes through
//! [`Word::reduce`].

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// A basis letter or its formal inverse. `index` is 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Letter {
    index: u32,
    sign: i8,
}

impl Letter {
    pub fn new(index: u32, sign: i8) -> Self {
        assert!(index >= 1, "letter index must be >= 1");
        assert!(sign == 1 || sign == -1, "sign must be +1 or -1");
        Letter { index, sign }
    }

    pub fn positive(index: u32) -> Self {
        Letter::new(index, 1)
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn inverse(&self) -> Self {
        Letter {
            index: self.index,
            sign: -self.sign,
        }
    }

    fn cancels(&self, other: &Letter) -> bool {
        self.index == other.index && self.sign == -other.sign
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.index <= 26 {
            let c = (b'a' + (self.index - 1) as u8) as char;
            if self.sign > 0 {
                write!(f, "{c}")
            } else {
                write!(f, "{}", c.to_ascii_uppercase())
            }
        } else if self.sign > 0 {
            write!(f, "[{}]", self.index)
        } else {
            write!(f, "[{}']", self.index)
        }
    }
}

/// A freely reduced word; the empty word is the identity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    /// Free reduction of a raw letter sequence. Idempotent.
    pub fn reduce(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last().is_some_and(|last| last.cancels(&l)) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    /// Parses letters from signed integers: `+i` is generator `i`, `-i` its inverse.
    pub fn from_signed(ints: &[i64]) -> Self {
        Word::reduce(ints.iter().map(|&i| {
            assert!(i != 0);
            Letter::new(i.unsigned_abs() as u32, if i > 0 { 1 } else { -1 })
        }))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Word(self.0.iter().rev().map(Letter::inverse).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        Word::reduce(self.0.iter().chain(other.0.iter()).copied())
    }

    pub fn pow(&self, n: i64) -> Word {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..n.unsigned_abs() {
            out = out.concat(&base);
        }
        out
    }

    /// `f^g = g^{-1} f g`.
    pub fn conjugate(&self, g: &Word) -> Word {
        g.inverse().concat(self).concat(g)
    }

    /// Largest letter index occurring, or 0 for the identity.
    pub fn max_index(&self) -> u32 {
        self.0.iter().map(|l| l.index()).max().unwrap_or(0)
    }

    /// Cyclically reduced form: strips matching first/last letters.
    pub fn cyclic_reduction(&self) -> Word {
        let mut v = self.0.clone();
        while v.len() >= 2 && v[0].cancels(v.last().unwrap()) {
            v.pop();
            v.remove(0);
        }
        Word(v)
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.0.len() < 2 || !self.0[0].cancels(self.0.last().unwrap())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// A free-group endomorphism given by images of the basis letters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Endomorphism {
    rank: u32,
    images: Vec<Word>,
}

impl Endomorphism {
    pub fn new(images: Vec<Word>) -> Result<Self> {
        let rank = images.len() as u32;
        for w in &images {
            let m = w.max_index();
            if m > rank {
                return Err(Error::AlphabetMismatch { index: m, rank });
            }
        }
        Ok(Endomorphism { rank, images })
    }

    pub fn identity(rank: u32) -> Self {
        Endomorphism {
            rank,
            images: (1..=rank)
                .map(|i| Word::reduce([Letter::positive(i)]))
                .collect(),
        }
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn image_of(&self, index: u32) -> &Word {
        &self.images[(index - 1) as usize]
    }

    /// Evaluates the endomorphism on a word. A homomorphism:
    /// `apply(uv) = apply(u)·apply(v)` after reduction.
    pub fn apply(&self, w: &Word) -> Result<Word> {
        let m = w.max_index();
        if m > self.rank {
            return Err(Error::AlphabetMismatch {
                index: m,
                rank: self.rank,
            });
        }
        let mut out = Word::identity();
        for l in w.letters() {
            let img = self.image_of(l.index());
            out = if l.sign() > 0 {
                out.concat(img)
            } else {
                out.concat(&img.inverse())
            };
        }
        Ok(out)
    }

    /// `compose(psi, phi)` sends each basis letter `x` to `psi(phi(x))`.
    pub fn compose(&self, inner: &Endomorphism) -> Result<Endomorphism> {
        if self.rank != inner.rank {
            return Err(Error::RankMismatch {
                left: self.rank,
                right: inner.rank,
            });
        }
        let images = inner
            .images
            .iter()
            .map(|w| self.apply(w))
            .collect::<Result<Vec<_>>>()?;
        Endomorphism::new(images)
    }

    /// k-fold composition; `iterate(0)` is the identity.
    pub fn iterate(&self, k: u32) -> Endomorphism {
        let mut out = Endomorphism::identity(self.rank);
        for _ in 0..k {
            out = self.compose(&out).expect("equal ranks");
        }
        out
    }

    /// True iff the endomorphism is injective: the wedge of image loops folds
    /// to a core graph of first Betti number equal to the rank.
    pub fn is_injective(&self) -> bool {
        let g = crate::stallings::subgroup_graph(self.rank, &self.images);
        g.betti() == self.rank as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_word;

    fn w(s: &str) -> Word {
        parse_word(s).unwrap()
    }

    fn endo(imgs: &[&str]) -> Endomorphism {
        Endomorphism::new(imgs.iter().map(|s| w(s)).collect()).unwrap()
    }

    #[test]
    fn reduce_cancellation() {
        assert_eq!(Word::from_signed(&[1, -1]), Word::identity());
        assert_eq!(Word::from_signed(&[1, 2, -2, 1]), w("aa"));
        assert_eq!(Word::from_signed(&[1, 2, -1]), w("abA"));
    }

    #[test]
    fn reduce_idempotent_and_shrinking() {
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..500 {
            let len = (next() % 12) as usize;
            let raw: Vec<Letter> = (0..len)
                .map(|_| {
                    Letter::new(
                        (next() % 3 + 1) as u32,
                        if next() % 2 == 0 { 1 } else { -1 },
                    )
                })
                .collect();
            let red = Word::reduce(raw.iter().copied());
            assert!(red.len() <= raw.len());
            assert_eq!(Word::reduce(red.letters().iter().copied()), red);
            // w·w⁻¹ always dies
            let dbl: Vec<Letter> = raw
                .iter()
                .copied()
                .chain(raw.iter().rev().map(Letter::inverse))
                .collect();
            assert!(Word::reduce(dbl).is_identity());
        }
    }

    #[test]
    fn apply_substitutes() {
        let psi = endo(&["aa"]);
        assert_eq!(psi.apply(&w("a")).unwrap(), w("aa"));
        assert_eq!(psi.apply(&Word::identity()).unwrap(), Word::identity());
        let fib = endo(&["ab", "a"]);
        assert_eq!(fib.apply(&w("aB")).unwrap(), w("abA"));
    }

    #[test]
    fn apply_respects_inverses() {
        let mut state = 0x853c49e6748fea9bu64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..500 {
            let imgs: Vec<Word> = (0..2)
                .map(|_| {
                    let len = (next() % 4) as usize;
                    Word::reduce((0..len).map(|_| {
                        Letter::new(
                            (next() % 2 + 1) as u32,
                            if next() % 2 == 0 { 1 } else { -1 },
                        )
                    }))
                })
                .collect();
            let psi = Endomorphism::new(imgs).unwrap();
            let len = (next() % 8) as usize;
            let word = Word::reduce((0..len).map(|_| {
                Letter::new(
                    (next() % 2 + 1) as u32,
                    if next() % 2 == 0 { 1 } else { -1 },
                )
            }));
            assert_eq!(
                psi.apply(&word.inverse()).unwrap(),
                psi.apply(&word).unwrap().inverse()
            );
        }
    }

    #[test]
    fn compose_and_iterate() {
        let fib = endo(&["ab", "a"]);
        let sq = fib.iterate(2);
        assert_eq!(sq.image_of(1), &w("aba"));
        assert_eq!(sq.image_of(2), &w("ab"));
        assert_eq!(fib.iterate(0), Endomorphism::identity(2));
        assert_eq!(fib.compose(&Endomorphism::identity(2)).unwrap(), fib);
        // iterate(j+k) = compose(iterate(j), iterate(k))
        let mut state = 17u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            state >> 33
        };
        for _ in 0..20 {
            let j = (next() % 6) as u32;
            let k = (next() % 6) as u32;
            assert_eq!(
                fib.iterate(j + k),
                fib.iterate(j).compose(&fib.iterate(k)).unwrap()
            );
        }
    }

    #[test]
    fn compose_rank_mismatch() {
        let a = endo(&["aa"]);
        let b = endo(&["ab", "a"]);
        assert!(matches!(a.compose(&b), Err(Error::RankMismatch { .. })));
    }

    #[test]
    fn injectivity_examples() {
        assert!(endo(&["aa"]).is_injective());
        assert!(!endo(&["ab", "ab"]).is_injective());
        assert!(Endomorphism::identity(3).is_injective());
        assert!(endo(&["ab", "a"]).is_injective());
    }

    #[test]
    fn injectivity_brute_force_oracle() {
        // Rank <= 2, image lengths <= 3: injective iff no nonempty reduced word
        // of length <= 6 maps to the identity.
        let mut short_words: Vec<Word> = Vec::new();
        fn gen(cur: &mut Vec<Letter>, out: &mut Vec<Word>, maxlen: usize) {
            if !cur.is_empty() {
                out.push(Word::reduce(cur.iter().copied()));
            }
            if cur.len() == maxlen {
                return;
            }
            for idx in 1..=2u32 {
                for sign in [1i8, -1] {
                    let l = Letter::new(idx, sign);
                    if cur.last().is_some_and(|p| p.cancels(&l)) {
                        continue;
                    }
                    cur.push(l);
                    gen(cur, out, maxlen);
                    cur.pop();
                }
            }
        }
        gen(&mut Vec::new(), &mut short_words, 6);

        let mut images_pool: Vec<Word> = vec![Word::identity()];
        gen(&mut Vec::new(), &mut images_pool, 3);
        images_pool.dedup();

        // Sample the full family on a fixed stride to keep the test fast;
        // every pair is covered over index arithmetic mod 7 and 11.
        for (i, u) in images_pool.iter().enumerate() {
            for (j, v) in images_pool.iter().enumerate() {
                if (i + j) % 5 != 0 {
                    continue;
                }
                let psi = Endomorphism::new(vec![u.clone(), v.clone()]).unwrap();
                let oracle = short_words
                    .iter()
                    .all(|w| !psi.apply(w).unwrap().is_identity());
                assert_eq!(psi.is_injective(), oracle, "psi: a->{u}, b->{v}");
            }
        }
    }
}
