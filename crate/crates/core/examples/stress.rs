//! One-off randomized stress battery (not part of the test suite).

use mtf_core::mapping_torus::{self, normalize, MTLetter, MappingTorus, Presentation};
use mtf_core::one_relator;
use mtf_core::stallings::{self, subgroup_graph, ExpressContext};
use mtf_core::text::parse_word;
use mtf_core::words::{Endomorphism, Letter, Word};

struct Rng(u64);
impl Rng {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }
    fn below(&mut self, n: usize) -> usize {
        (self.next() % n.max(1) as u64) as usize
    }
    fn word(&mut self, rank: u32, len: usize) -> Word {
        Word::reduce((0..len).map(|_| {
            Letter::new(
                self.below(rank as usize) as u32 + 1,
                if self.next().is_multiple_of(2) { 1 } else { -1 },
            )
        }))
    }
    fn reduced(&mut self, rank: u32, len: usize) -> Word {
        let mut l: Vec<Letter> = vec![];
        while l.len() < len {
            let x = Letter::new(
                self.below(rank as usize) as u32 + 1,
                if self.next().is_multiple_of(2) { 1 } else { -1 },
            );
            if l.last().is_some_and(|p| *p == x.inverse()) {
                continue;
            }
            l.push(x);
        }
        Word::reduce(l)
    }
}

fn oracle_trivial(raw: &[MTLetter], psi: &Endomorphism) -> bool {
    let mut word: Vec<MTLetter> = raw.to_vec();
    loop {
        let mut changed = false;
        let mut out: Vec<MTLetter> = Vec::with_capacity(word.len());
        for l in &word {
            let cancels = match (out.last(), l) {
                (Some(MTLetter::Stable(s)), MTLetter::Stable(t)) => s + t == 0,
                (Some(MTLetter::Basis(a)), MTLetter::Basis(b)) => *b == a.inverse(),
                _ => false,
            };
            if cancels {
                out.pop();
                changed = true;
            } else {
                out.push(*l);
            }
        }
        word = out;
        let mut rewritten: Option<Vec<MTLetter>> = None;
        for i in 0..word.len().saturating_sub(1) {
            match (word[i], word[i + 1]) {
                (MTLetter::Basis(f), MTLetter::Stable(1)) => {
                    let mut next: Vec<MTLetter> = word[..i].to_vec();
                    next.push(MTLetter::Stable(1));
                    next.extend(
                        psi.apply(&Word::reduce([f]))
                            .unwrap()
                            .letters()
                            .iter()
                            .map(|&l| MTLetter::Basis(l)),
                    );
                    next.extend(word[i + 2..].iter().copied());
                    rewritten = Some(next);
                    break;
                }
                (MTLetter::Stable(-1), MTLetter::Basis(f)) => {
                    let mut next: Vec<MTLetter> = word[..i].to_vec();
                    next.extend(
                        psi.apply(&Word::reduce([f]))
                            .unwrap()
                            .letters()
                            .iter()
                            .map(|&l| MTLetter::Basis(l)),
                    );
                    next.push(MTLetter::Stable(-1));
                    next.extend(word[i + 2..].iter().copied());
                    rewritten = Some(next);
                    break;
                }
                _ => {}
            }
        }
        if let Some(next) = rewritten {
            word = next;
            changed = true;
        }
        if !changed {
            break;
        }
    }
    word.is_empty()
}

fn main() {
    let mut rng = Rng(2024);

    // 1. express: heavy random validation at rank 3
    let mut express_cases = 0u64;
    for _ in 0..300 {
        let ng = 1 + rng.below(3);
        let gens: Vec<Word> = (0..ng)
            .map(|_| {
                let l = 1 + rng.below(6);
                rng.reduced(3, l)
            })
            .collect();
        let ctx = ExpressContext::new(3, &gens);
        let graph = subgroup_graph(3, &gens);
        for _ in 0..40 {
            // random product of generators
            let n = rng.below(8);
            let mut w = Word::identity();
            for _ in 0..n {
                let g = &gens[rng.below(gens.len())];
                w = if rng.next().is_multiple_of(2) {
                    w.concat(g)
                } else {
                    w.concat(&g.inverse())
                };
            }
            let expr = ctx.express(&w).expect("member");
            let mut back = Word::identity();
            for (g, s) in expr {
                back = if s > 0 {
                    back.concat(&gens[g])
                } else {
                    back.concat(&gens[g].inverse())
                };
            }
            assert_eq!(back, w);
            // random word: express-agreement with membership
            let plen = rng.below(10);
            let probe = rng.word(3, plen);
            assert_eq!(
                ctx.express(&probe).is_some(),
                stallings::membership(&graph, &probe)
            );
            express_cases += 2;
        }
    }
    println!("express: {express_cases} checks OK");

    // 2. normalize vs rewriting oracle, non-surjective and surjective psi
    let psis = [
        vec!["aa", "ab"],   // injective, not surjective
        vec!["ab", "a"],    // automorphism
        vec!["b", "a"],     // swap
        vec!["aba", "bab"], // injective? checked below
        vec!["aa"],         // rank 1
    ];
    let mut norm_cases = 0u64;
    for imgs in &psis {
        let psi = Endomorphism::new(imgs.iter().map(|s| parse_word(s).unwrap()).collect()).unwrap();
        if !psi.is_injective() {
            println!("  (skipping non-injective {imgs:?})");
            continue;
        }
        let rank = psi.rank();
        let m = MappingTorus::new(psi.clone()).unwrap();
        for _ in 0..2000 {
            let len = 1 + rng.below(14);
            let raw: Vec<MTLetter> = (0..len)
                .map(|_| match rng.below(3) {
                    0 => MTLetter::Stable(if rng.next().is_multiple_of(2) { 1 } else { -1 }),
                    _ => MTLetter::Basis(Letter::new(
                        rng.below(rank as usize) as u32 + 1,
                        if rng.next().is_multiple_of(2) { 1 } else { -1 },
                    )),
                })
                .collect();
            let e = normalize(&raw, &m).unwrap();
            // canonicity: a = 0, b = 0, or w not in im(psi)
            if e.a > 0 && e.b > 0 {
                let im = subgroup_graph(rank, psi.images());
                assert!(
                    !stallings::membership(&im, &e.w),
                    "canonical w must avoid im(psi)"
                );
            }
            let mut check = raw.clone();
            check.extend(e.expand_inverse());
            assert!(
                oracle_trivial(&check, &psi),
                "normalize changed the element: {raw:?}"
            );
            norm_cases += 1;
        }
    }
    println!("normalize vs oracle: {norm_cases} checks OK");

    // 3. pirank vs exhaustive second oracle on ALL cyclically reduced words |w| <= 6
    let mut tested = 0u64;
    let mut seen = std::collections::BTreeSet::new();
    let mut frontier: Vec<Vec<Letter>> = vec![vec![]];
    for _ in 0..6 {
        let mut next = vec![];
        for cur in &frontier {
            for idx in 1..=2u32 {
                for sign in [1i8, -1] {
                    let l = Letter::new(idx, sign);
                    if cur.last().is_some_and(|p| *p == l.inverse()) {
                        continue;
                    }
                    let mut v = cur.clone();
                    v.push(l);
                    next.push(v);
                }
            }
        }
        for v in &next {
            let w = Word::reduce(v.iter().copied());
            if w.is_identity() || !w.is_cyclically_reduced() {
                continue;
            }
            // dedup up to rotation+inversion (pi is invariant under both)
            let canon = {
                let mut best: Option<Vec<Letter>> = None;
                for base in [w.clone(), w.inverse()] {
                    let ls = base.letters().to_vec();
                    for r in 0..ls.len() {
                        let rot: Vec<Letter> = ls[r..].iter().chain(&ls[..r]).copied().collect();
                        if best.as_ref().is_none_or(|b| rot < *b) {
                            best = Some(rot);
                        }
                    }
                }
                best.unwrap()
            };
            if !seen.insert(canon) {
                continue;
            }
            let main = one_relator::primitivity_rank(&w, 2).unwrap().value;
            let oracle = one_relator::exhaustive_min_rank_oracle(&w, 2, w.len());
            assert_eq!(main, oracle, "pi mismatch on {w}");
            tested += 1;
        }
        frontier = next;
    }
    println!("pirank vs oracle: {tested} cyclic classes (all |w| <= 6) OK");

    // 4. conjugate_into vs bounded brute force
    let mut conj_checks = 0u64;
    let conjugators: Vec<Word> = {
        let mut v = vec![Word::identity()];
        let mut frontier: Vec<Vec<Letter>> = vec![vec![]];
        for _ in 0..5 {
            let mut next = vec![];
            for cur in &frontier {
                for idx in 1..=2u32 {
                    for sign in [1i8, -1] {
                        let l = Letter::new(idx, sign);
                        if cur.last().is_some_and(|p| *p == l.inverse()) {
                            continue;
                        }
                        let mut vv = cur.clone();
                        vv.push(l);
                        next.push(vv);
                    }
                }
            }
            v.extend(next.iter().map(|x| Word::reduce(x.iter().copied())));
            frontier = next;
        }
        v
    };
    for _ in 0..300 {
        let nh = 1 + rng.below(2);
        let h: Vec<Word> = (0..nh)
            .map(|_| {
                let l = 1 + rng.below(4);
                rng.reduced(2, l)
            })
            .collect();
        let nk = 1 + rng.below(2);
        let k: Vec<Word> = (0..nk)
            .map(|_| {
                let l = 1 + rng.below(4);
                rng.reduced(2, l)
            })
            .collect();
        let kg = subgroup_graph(2, &k);
        let exact = stallings::conjugate_into(2, &h, &k);
        let brute = conjugators.iter().find(|c| {
            h.iter()
                .all(|g| stallings::membership(&kg, &g.conjugate(c)))
        });
        if let Some(f) = &exact {
            assert!(
                h.iter()
                    .all(|g| stallings::membership(&kg, &g.conjugate(f))),
                "exact witness invalid"
            );
        }
        if brute.is_some() {
            assert!(
                exact.is_some(),
                "brute found a conjugator but conjugate_into missed: H={h:?} K={k:?}"
            );
        }
        conj_checks += 1;
    }
    println!("conjugate_into vs brute: {conj_checks} instances OK");

    // 5. presentation validity on random subgroups of several tori
    let mut pres_checks = 0u64;
    for imgs in [vec!["aa"], vec!["ab", "a"], vec!["b", "a"], vec!["a", "b"]] {
        let psi = Endomorphism::new(imgs.iter().map(|s| parse_word(s).unwrap()).collect()).unwrap();
        let rank = psi.rank();
        let m = MappingTorus::new(psi).unwrap();
        for _ in 0..60 {
            let ng = 1 + rng.below(3);
            let gens: Vec<_> = (0..ng)
                .map(|_| {
                    let len = 1 + rng.below(6);
                    let raw: Vec<MTLetter> = (0..len)
                        .map(|_| match rng.below(3) {
                            0 => {
                                MTLetter::Stable(if rng.next().is_multiple_of(2) { 1 } else { -1 })
                            }
                            _ => MTLetter::Basis(Letter::new(
                                rng.below(rank as usize) as u32 + 1,
                                if rng.next().is_multiple_of(2) { 1 } else { -1 },
                            )),
                        })
                        .collect();
                    normalize(&raw, &m).unwrap()
                })
                .collect();
            match mapping_torus::subgroup_presentation(&gens, &m, 6).unwrap() {
                Presentation::Free { .. } => {}
                Presentation::MappingTorus(p) => {
                    let mp = MappingTorus::new(p.psi_prime.clone()).unwrap();
                    for rel in &p.relations {
                        let x = &p.z_basis[rel.x];
                        let mut raw = vec![MTLetter::Stable(-1)];
                        raw.extend(x.letters().iter().map(|&l| MTLetter::Basis(l)));
                        raw.push(MTLetter::Stable(1));
                        raw.extend(
                            rel.rhs_word
                                .inverse()
                                .letters()
                                .iter()
                                .map(|&l| MTLetter::Basis(l)),
                        );
                        assert!(
                            normalize(&raw, &mp).unwrap().is_identity(),
                            "relation failed"
                        );
                    }
                    assert_eq!(p.relative_rank, p.z_basis.len() - p.x_basis.len());
                    assert_eq!(p.chi, -(p.relative_rank as i64));
                }
            }
            pres_checks += 1;
        }
    }
    println!("presentation validity: {pres_checks} random subgroups OK");
}
