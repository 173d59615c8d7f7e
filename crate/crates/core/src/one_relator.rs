//! Primitivity testing by Whitehead peak reduction, the primitivity rank
//! π(w) = min{rk(H) | w ∈ H ≤ F, w not primitive in H}, and the resulting
//! classification of one-relator groups.
//!
//! π(w) is computed by enumerating quotients of the cycle graph Γ(⟨w⟩):
//! every set partition of its vertices is folded into a candidate overgroup,
//! deduplicated up to based isomorphism, and tested for a non-primitive
//! containment of w.

use crate::error::{Error, Result};
use crate::stallings::{
    canonical_key, fold, graph_from_words, membership, pointed_core, read_in_basis, subgroup_graph,
    StallingsGraph,
};
use crate::words::{Endomorphism, Letter, Word};
use serde::{Deserialize, Serialize};

/// Default bound on |w| for the partition enumeration.
pub const DEFAULT_MAX_LEN: u32 = 16;
/// Default bound on the number of partitions examined.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Whitehead automorphisms of the second kind for the given rank:
/// (multiplier a, subset A ∋ a with a⁻¹ ∉ A), acting by
/// g ↦ g·a, a⁻¹·g, or a⁻¹·g·a according to which of g, g⁻¹ lie in A.
fn whitehead_autos(rank: u32) -> Vec<Endomorphism> {
    let mut letters = Vec::new();
    for i in 1..=rank {
        letters.push(Letter::new(i, 1));
        letters.push(Letter::new(i, -1));
    }
    let mut out = Vec::new();
    for &a in &letters {
        let others: Vec<Letter> = letters
            .iter()
            .copied()
            .filter(|l| l.index() != a.index())
            .collect();
        for mask in 0u32..(1 << others.len()) {
            let in_set = |l: &Letter| -> bool {
                if *l == a {
                    return true;
                }
                if l.index() == a.index() {
                    return false; // a⁻¹ is never in A
                }
                others
                    .iter()
                    .position(|o| o == l)
                    .is_some_and(|p| mask >> p & 1 == 1)
            };
            let images: Vec<Word> = (1..=rank)
                .map(|i| {
                    let g = Letter::new(i, 1);
                    if i == a.index() {
                        return Word::reduce([g]);
                    }
                    let gp = in_set(&g);
                    let gm = in_set(&g.inverse());
                    let mut letters = Vec::new();
                    if gm {
                        letters.push(a.inverse());
                    }
                    letters.push(g);
                    if gp {
                        letters.push(a);
                    }
                    Word::reduce(letters)
                })
                .collect();
            out.push(Endomorphism::new(images).expect("valid automorphism"));
        }
    }
    out
}

/// True iff `w` is part of a free basis of F_rank. Greedy peak reduction:
/// while some Whitehead automorphism strictly shortens the cyclic length,
/// apply the first best one; primitive iff the terminal length is 1. At
/// rank <= 3 a terminal length above 1 is re-checked by an exhaustive
/// bounded search of depth 3 before declaring the word non-primitive.
pub fn is_primitive(w: &Word, rank: u32) -> bool {
    if rank == 0 {
        return false;
    }
    let autos = whitehead_autos(rank);
    let mut cur = w.cyclic_reduction();
    loop {
        if cur.len() <= 1 {
            return cur.len() == 1;
        }
        let mut best: Option<(usize, Word)> = None;
        for phi in &autos {
            let img = phi
                .apply(&cur)
                .expect("letters within rank")
                .cyclic_reduction();
            if img.len() < cur.len() && best.as_ref().is_none_or(|(l, _)| img.len() < *l) {
                best = Some((img.len(), img));
            }
        }
        match best {
            Some((_, img)) => cur = img,
            None => break,
        }
    }
    if rank <= 3 {
        // belt-and-braces fallback: bounded exhaustive search
        let mut frontier = vec![cur.clone()];
        for _ in 0..3 {
            let mut next = Vec::new();
            for word in &frontier {
                for phi in &autos {
                    let img = phi.apply(word).expect("in range").cyclic_reduction();
                    if img.len() == 1 {
                        return true;
                    }
                    if img.len() <= word.len() {
                        next.push(img);
                    }
                }
            }
            next.sort();
            next.dedup();
            frontier = next;
        }
    }
    false
}

/// One minimal-rank witness: a subgroup basis and w's expression in it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub basis: Vec<Word>,
    pub expression: Word,
}

/// π(w) with its witnesses; `value = None` encodes π(w) = ∞.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PrimRankResult {
    pub value: Option<usize>,
    pub witnesses: Vec<Witness>,
}

pub struct PiRankOptions {
    pub max_len: u32,
    pub budget: u64,
}

impl Default for PiRankOptions {
    fn default() -> Self {
        PiRankOptions {
            max_len: DEFAULT_MAX_LEN,
            budget: DEFAULT_BUDGET,
        }
    }
}

/// Computes π(w) over F_ambient_rank by quotient enumeration.
pub fn primitivity_rank(w: &Word, ambient_rank: u32) -> Result<PrimRankResult> {
    primitivity_rank_with(w, ambient_rank, &PiRankOptions::default())
}

pub fn primitivity_rank_with(
    w: &Word,
    ambient_rank: u32,
    opts: &PiRankOptions,
) -> Result<PrimRankResult> {
    let w = w.cyclic_reduction();
    if w.is_identity() {
        return Err(Error::EmptyWord);
    }
    if w.len() as u32 > opts.max_len {
        return Err(Error::CapExceeded(format!(
            "|w| = {} exceeds the partition-enumeration bound {} (raise --max-len)",
            w.len(),
            opts.max_len,
        )));
    }
    let cycle = subgroup_graph(ambient_rank, std::slice::from_ref(&w));
    let n = cycle.vertex_count();
    let mut seen = std::collections::BTreeSet::new();
    let mut best_rank: Option<usize> = None;
    let mut witnesses: Vec<Witness> = Vec::new();
    let mut budget = opts.budget;
    let mut assignment = vec![0usize; n];
    enumerate_partitions(
        &mut assignment,
        1,
        &mut budget,
        &mut |blocks: &[usize]| {
            let candidate = quotient_fold(&cycle, blocks)?;
            if !seen.insert(canonical_key(&candidate)?) {
                return Ok(());
            }
            // the candidate must still contain w
            assert!(membership(&candidate, &w), "every quotient contains w");
            let rank = candidate.betti();
            if rank == 0 {
                return Ok(()); // w would be trivial; impossible for reduced w
            }
            if best_rank.is_some_and(|b| rank > b) {
                return Ok(());
            }
            let expr = read_in_basis(&candidate, &w).expect("w closes up");
            let expr_word = Word::reduce(expr.iter().map(|&(k, s)| Letter::new(k as u32 + 1, s)));
            if is_primitive(&expr_word, rank as u32) {
                return Ok(());
            }
            let witness = Witness {
                basis: crate::stallings::basis(&candidate)?,
                expression: expr_word,
            };
            match best_rank {
                Some(b) if b == rank => witnesses.push(witness),
                Some(b) if rank < b => {
                    best_rank = Some(rank);
                    witnesses = vec![witness];
                }
                None => {
                    best_rank = Some(rank);
                    witnesses = vec![witness];
                }
                _ => {}
            }
            Ok(())
        },
    )?;
    witnesses.sort_by(|a, b| (&a.basis, &a.expression).cmp(&(&b.basis, &b.expression)));
    witnesses.dedup();
    Ok(PrimRankResult {
        value: best_rank,
        witnesses,
    })
}

/// Enumerates set partitions as restricted growth strings, calling back with
/// the block assignment.
fn enumerate_partitions(
    assignment: &mut Vec<usize>,
    pos: usize,
    budget: &mut u64,
    f: &mut impl FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    if pos == assignment.len() {
        if *budget == 0 {
            return Err(Error::CapExceeded(
                "partition enumeration budget exhausted (raise --budget)".into(),
            ));
        }
        *budget -= 1;
        return f(assignment);
    }
    let max_used = assignment[..pos].iter().copied().max().unwrap_or(0);
    for block in 0..=max_used + 1 {
        assignment[pos] = block;
        enumerate_partitions(assignment, pos + 1, budget, f)?;
    }
    assignment[pos] = 0;
    Ok(())
}

/// Quotient of a pointed graph by a vertex partition, folded, pointed-cored.
fn quotient_fold(g: &StallingsGraph, blocks: &[usize]) -> Result<StallingsGraph> {
    let b = g.basepoint().expect("pointed cycle");
    let count = blocks.iter().copied().max().unwrap_or(0) + 1;
    let edges = g
        .edges()
        .iter()
        .map(|e| crate::stallings::Edge {
            src: blocks[e.src],
            dst: blocks[e.dst],
            label: e.label,
        })
        .collect();
    let q = StallingsGraph::new(count, edges, Some(blocks[b]), g.ambient_rank())?;
    let (folded, _) = fold(&q);
    pointed_core(&folded)
}

/// Verdict: locally quasi-convex hyperbolic iff π(w) ≠ 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OneRelatorClass {
    LqcHyperbolic,
    NotLqc,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: OneRelatorClass,
    pub pi: PrimRankResult,
}

pub fn classify_one_relator(w: &Word, ambient_rank: u32) -> Result<Classification> {
    classify_one_relator_with(w, ambient_rank, &PiRankOptions::default())
}

pub fn classify_one_relator_with(
    w: &Word,
    ambient_rank: u32,
    opts: &PiRankOptions,
) -> Result<Classification> {
    let pi = primitivity_rank_with(w, ambient_rank, opts)?;
    let verdict = if pi.value == Some(2) {
        OneRelatorClass::NotLqc
    } else {
        OneRelatorClass::LqcHyperbolic
    };
    Ok(Classification { verdict, pi })
}

/// Second oracle for tiny instances: enumerates every folded pointed core
/// graph with at most `max_edges` edges containing `w`, by extending the
/// already-folded vertex quotients of the w-cycle with extra edges, and
/// returns the least rank of a non-primitive containment. Exponential;
/// |w| <= 6 territory.
///
/// Completeness: if J is folded and contains w, the image of w's traced path
/// is a subgraph of J, hence folded, and equals the parallel-edge-collapsed
/// quotient of the cycle by the partition the trace induces; J is that base
/// plus extra edges, each attachable one at a time.
pub fn exhaustive_min_rank_oracle(w: &Word, ambient_rank: u32, max_edges: usize) -> Option<usize> {
    let w = w.cyclic_reduction();
    let cycle = graph_from_words(ambient_rank, std::slice::from_ref(&w), true);
    let n = cycle.vertex_count();
    let mut best: Option<usize> = None;
    let mut assignment = vec![0usize; n];
    let mut budget = u64::MAX;
    let mut visited: std::collections::BTreeSet<(usize, Vec<crate::stallings::Edge>)> =
        std::collections::BTreeSet::new();
    let mut consider = |g: &StallingsGraph, best: &mut Option<usize>| {
        if !g.is_pointed_core() || !membership(g, &w) {
            return;
        }
        let rank = g.betti();
        if rank == 0 || best.is_some_and(|b| rank >= b) {
            return;
        }
        let expr = read_in_basis(g, &w).expect("w closes up");
        let expr_word = Word::reduce(expr.iter().map(|&(k, s)| Letter::new(k as u32 + 1, s)));
        if !is_primitive(&expr_word, rank as u32) {
            *best = Some(rank);
        }
    };
    enumerate_partitions(
        &mut assignment,
        1,
        &mut budget,
        &mut |blocks: &[usize]| {
            let count = blocks.iter().copied().max().unwrap_or(0) + 1;
            let mut edges: Vec<crate::stallings::Edge> = cycle
                .edges()
                .iter()
                .map(|e| crate::stallings::Edge {
                    src: blocks[e.src],
                    dst: blocks[e.dst],
                    label: e.label,
                })
                .collect();
            edges.sort();
            edges.dedup();
            let q = StallingsGraph::new(count, edges, Some(blocks[0]), ambient_rank).unwrap();
            // unfolded quotients re-appear under the coarser partition their
            // fold induces, so only folded ones seed the search
            if !q.is_folded() || q.edges().len() > max_edges {
                return Ok(());
            }
            extend_with_edges(
                &q,
                max_edges,
                ambient_rank,
                &mut visited,
                &mut consider,
                &mut best,
            );
            Ok(())
        },
    )
    .expect("unbounded budget");
    best
}

/// Depth-first closure under single-edge extensions (possibly to one fresh
/// vertex) that keep the graph folded.
fn extend_with_edges(
    g: &StallingsGraph,
    max_edges: usize,
    rank: u32,
    visited: &mut std::collections::BTreeSet<(usize, Vec<crate::stallings::Edge>)>,
    consider: &mut impl FnMut(&StallingsGraph, &mut Option<usize>),
    best: &mut Option<usize>,
) {
    let mut key_edges = g.edges().to_vec();
    key_edges.sort();
    if !visited.insert((g.vertex_count(), key_edges)) {
        return;
    }
    consider(g, best);
    if g.edges().len() >= max_edges {
        return;
    }
    let fresh = g.vertex_count();
    for src in 0..=fresh {
        for dst in 0..=fresh {
            if src == fresh && dst == fresh {
                continue; // both endpoints fresh: unreachable from the base
            }
            for label in 1..=rank {
                let mut edges = g.edges().to_vec();
                edges.push(crate::stallings::Edge { src, dst, label });
                let count = g.vertex_count().max(src.max(dst) + 1);
                let q = StallingsGraph::new(count, edges, g.basepoint(), rank).unwrap();
                if !q.is_folded() {
                    continue;
                }
                extend_with_edges(&q, max_edges, rank, visited, consider, best);
            }
        }
    }
}
