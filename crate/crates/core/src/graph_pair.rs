//! ψ-invariant graph pairs and the tightening procedure: fold
//! classification, fold-and-add-a-loop, θₙ minimality checking, and the
//! descent loop that drives relative rank down to a certified minimum.
//!
//! A pair (Z, X) is a pointed labeled graph Z with a connected based
//! subgraph X. It is *tight* when Z is folded, and ψ-invariant when
//! Z# = ⟨X#, ψ(X#)⟩ as subgroups of the ambient free group.

use crate::error::{Error, Result};
use crate::stallings::{
    basis, fold, membership, pointed_core, subgroup_graph, Edge, StallingsGraph,
};
use crate::words::{Endomorphism, Letter, Word};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, VecDeque};

/// A graph pair (Z, X): X is carried as the subsets of Z's vertices and
/// edges that belong to it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphPair {
    z: StallingsGraph,
    x_vertices: BTreeSet<usize>,
    x_edges: BTreeSet<usize>,
}

/// How a Z-fold acts on the subgraph X.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FoldKind {
    /// Both edges lie in X: the fold restricts to a fold of X.
    Subgraph,
    /// X-edges are untouched but two distinct X-vertices are identified.
    Exceptional,
    /// X maps homeomorphically.
    Plain,
}

/// One step of a tightening run, for traces.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceStep {
    pub kind: String,
    pub edges: (usize, usize),
    pub rr: usize,
}

/// One θₙ-descent round of `minimize`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DescentRound {
    pub failed_level: u32,
    pub rr_before: usize,
    pub rr_after: usize,
}

/// Trace of a tightening or minimization run.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    pub descents: Vec<DescentRound>,
}

/// A basis of the complement C with Z# = X# ∗ C.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ComplementFactor {
    pub basis_words: Vec<Word>,
}

impl GraphPair {
    pub fn new(
        z: StallingsGraph,
        x_vertices: BTreeSet<usize>,
        x_edges: BTreeSet<usize>,
    ) -> Result<Self> {
        let b = z.basepoint().ok_or(Error::MissingBasepoint)?;
        if !x_vertices.contains(&b) {
            return Err(Error::Parse("basepoint must lie in X".into()));
        }
        for &e in &x_edges {
            let edge = *z
                .edges()
                .get(e)
                .ok_or_else(|| Error::Parse(format!("X edge {e} out of range")))?;
            if !x_vertices.contains(&edge.src) || !x_vertices.contains(&edge.dst) {
                return Err(Error::Parse("X edge endpoints must lie in X".into()));
            }
        }
        let pair = GraphPair {
            z,
            x_vertices,
            x_edges,
        };
        if !pair.x_is_connected() {
            return Err(Error::Disconnected);
        }
        if !pair.z.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(pair)
    }

    /// Pair with Z = X: the whole graph marked as the subgraph.
    pub fn diagonal(z: StallingsGraph) -> Result<Self> {
        let vs = (0..z.vertex_count()).collect();
        let es = (0..z.edges().len()).collect();
        GraphPair::new(z, vs, es)
    }

    /// Initial pair for gens ⊆ 𝔽 and an endomorphism: X = Γ(⟨gens⟩),
    /// Z = X ∨ ⋁ Γ(ψ(g)); ψ-invariant for ⟨gens, t⟩ by construction.
    pub fn invariant_from_generators(
        ambient_rank: u32,
        gens: &[Word],
        psi: &Endomorphism,
    ) -> Result<Self> {
        let x = subgroup_graph(ambient_rank, gens);
        let images = gens
            .iter()
            .map(|g| psi.apply(g))
            .collect::<Result<Vec<_>>>()?;
        let graphs: Vec<StallingsGraph> = images
            .iter()
            .map(|w| subgroup_graph(ambient_rank, std::slice::from_ref(w)))
            .collect();
        wedge_pair(&x, &graphs)
    }

    pub fn z(&self) -> &StallingsGraph {
        &self.z
    }

    pub fn x_vertices(&self) -> &BTreeSet<usize> {
        &self.x_vertices
    }

    pub fn x_edges(&self) -> &BTreeSet<usize> {
        &self.x_edges
    }

    /// X as a standalone pointed graph; vertex i is the i-th X-vertex in order.
    pub fn x_graph(&self) -> StallingsGraph {
        let verts: Vec<usize> = self.x_vertices.iter().copied().collect();
        let index = |v: usize| verts.binary_search(&v).expect("X vertex");
        let edges = self
            .x_edges
            .iter()
            .map(|&e| {
                let edge = self.z.edges()[e];
                Edge {
                    src: index(edge.src),
                    dst: index(edge.dst),
                    label: edge.label,
                }
            })
            .collect();
        StallingsGraph::new(
            verts.len(),
            edges,
            Some(index(self.z.basepoint().unwrap())),
            self.z.ambient_rank(),
        )
        .expect("X is a valid graph")
    }

    fn x_is_connected(&self) -> bool {
        self.x_graph().is_connected()
    }

    pub fn is_tight(&self) -> bool {
        self.z.is_folded()
    }

    fn x_betti(&self) -> usize {
        self.x_edges.len() + 1 - self.x_vertices.len()
    }

    /// rr(Z, X) = rk(π₁ Z) − rk(π₁ X) = −χ(Z, X) for finite pairs.
    pub fn relative_rank(&self) -> usize {
        self.z.betti() - self.x_betti()
    }

    /// First foldable pair of X-edges (by edge index), if any.
    fn x_clash(&self) -> Option<(usize, usize)> {
        first_clash(&self.z, |e| self.x_edges.contains(&e))
    }

    /// First foldable pair of Z-edges (by edge index), if any.
    fn z_clash(&self) -> Option<(usize, usize)> {
        first_clash(&self.z, |_| true)
    }

    /// Stallings basis of X#, read inside X.
    pub fn x_basis(&self) -> Result<Vec<Word>> {
        basis(&self.x_graph())
    }

    /// Wedges Γ(⟨delta⟩) onto the basepoint, leaving X untouched. For
    /// delta ∈ Z# this keeps the pair invariant for the same subgroup while
    /// making the Z-map non-injective.
    pub fn wedge_redundant_loop(&self, delta: &Word) -> GraphPair {
        wedge_onto(
            self,
            &subgroup_graph(self.z().ambient_rank(), std::slice::from_ref(delta)),
        )
    }

    /// Stallings basis of Z#.
    pub fn z_basis(&self) -> Result<Vec<Word>> {
        basis(&self.z)
    }
}

/// Lowest-indexed foldable pair among edges passing `filter`.
fn first_clash(g: &StallingsGraph, filter: impl Fn(usize) -> bool) -> Option<(usize, usize)> {
    let edges = g.edges();
    for j in 0..edges.len() {
        if !filter(j) {
            continue;
        }
        for i in 0..j {
            if !filter(i) {
                continue;
            }
            let (a, b) = (edges[i], edges[j]);
            if a.label == b.label && (a.src == b.src || a.dst == b.dst) {
                return Some((i, j));
            }
        }
    }
    None
}

/// Wedge of a based graph with a list of based graphs, X = the first graph.
/// All basepoints identified; the companion graphs contribute no X-cells.
fn wedge_pair(x: &StallingsGraph, rest: &[StallingsGraph]) -> Result<GraphPair> {
    let rank = x.ambient_rank();
    let xb = x.basepoint().ok_or(Error::MissingBasepoint)?;
    let mut edges: Vec<Edge> = x.edges().to_vec();
    let mut count = x.vertex_count();
    let x_vertices: BTreeSet<usize> = (0..count).collect();
    let x_edges: BTreeSet<usize> = (0..edges.len()).collect();
    for g in rest {
        let gb = g.basepoint().ok_or(Error::MissingBasepoint)?;
        let map = |v: usize| -> usize {
            if v == gb {
                xb
            } else if v < gb {
                count + v
            } else {
                count + v - 1
            }
        };
        for e in g.edges() {
            edges.push(Edge {
                src: map(e.src),
                dst: map(e.dst),
                label: e.label,
            });
        }
        count += g.vertex_count() - 1;
    }
    let z = StallingsGraph::new(count, edges, Some(xb), rank)?;
    GraphPair::new(z, x_vertices, x_edges)
}

/// Whether Z# = ⟨X#, ψ(X#)⟩: each Z-basis word lies in the folded graph of
/// X-basis ∪ ψ(X-basis), and each X-basis word and its ψ-image lie in Z#.
pub fn is_invariant(p: &GraphPair, psi: &Endomorphism) -> Result<bool> {
    let rank = p.z().ambient_rank();
    let (zf, _) = fold(p.z());
    let x_words = basis(&fold(&p.x_graph()).0)?;
    let z_words = basis(&zf)?;
    let mut span = x_words.clone();
    for w in &x_words {
        span.push(psi.apply(w)?);
    }
    let span_graph = subgroup_graph(rank, &span);
    if !z_words.iter().all(|w| membership(&span_graph, w)) {
        return Ok(false);
    }
    for w in &x_words {
        if !membership(&zf, w) || !membership(&zf, &psi.apply(w)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Classifies what a fold of the given edge pair does to X.
pub fn classify_fold(p: &GraphPair, fold_pair: (usize, usize)) -> Result<FoldKind> {
    let (i, j) = fold_pair;
    let edges = p.z().edges();
    let (a, b) = (edges[i], edges[j]);
    if i == j || a.label != b.label || (a.src != b.src && a.dst != b.dst) {
        return Err(Error::NotFoldable(i, j));
    }
    if p.x_edges.contains(&i) && p.x_edges.contains(&j) {
        return Ok(FoldKind::Subgraph);
    }
    // the pair of endpoints the fold identifies
    let (u, v) = if a.src == b.src {
        (a.dst, b.dst)
    } else {
        (a.src, b.src)
    };
    if u != v && p.x_vertices.contains(&u) && p.x_vertices.contains(&v) {
        Ok(FoldKind::Exceptional)
    } else {
        Ok(FoldKind::Plain)
    }
}

/// Applies one elementary fold of the edge pair to the pair, mapping the
/// X-data forward. Returns the new pair and the identified vertex pair of Z
/// (pre-fold ids), if the fold merged two distinct vertices.
fn elementary_fold(p: &GraphPair, i: usize, j: usize) -> (GraphPair, Option<(usize, usize)>) {
    let edges = p.z().edges();
    let (a, b) = (edges[i], edges[j]);
    debug_assert!(a.label == b.label && (a.src == b.src || a.dst == b.dst));
    let (u, v) = if a.src == b.src {
        (a.dst, b.dst)
    } else {
        (a.src, b.src)
    };
    let merged = (u != v).then_some((u.min(v), u.max(v)));
    let n = p.z().vertex_count();
    // vertex map: drop max(u,v) (when distinct), renumber above it
    let vmap: Vec<usize> = (0..n)
        .map(|w| {
            if let Some((keep, drop)) = merged {
                let w2 = if w == drop { keep } else { w };
                if w2 > drop {
                    w2 - 1
                } else {
                    w2
                }
            } else {
                w
            }
        })
        .collect();
    let mut new_edges: Vec<Edge> = Vec::with_capacity(edges.len() - 1);
    let mut x_edges = BTreeSet::new();
    let j_in_x = p.x_edges.contains(&j);
    for (k, e) in edges.iter().enumerate() {
        if k == j {
            continue;
        }
        let idx = new_edges.len();
        new_edges.push(Edge {
            src: vmap[e.src],
            dst: vmap[e.dst],
            label: e.label,
        });
        if p.x_edges.contains(&k) || (k == i && j_in_x) {
            x_edges.insert(idx);
        }
    }
    let x_vertices: BTreeSet<usize> = p.x_vertices.iter().map(|&w| vmap[w]).collect();
    let new_count = if merged.is_some() { n - 1 } else { n };
    let z = StallingsGraph::new(
        new_count,
        new_edges,
        Some(vmap[p.z().basepoint().unwrap()]),
        p.z().ambient_rank(),
    )
    .expect("fold yields a valid graph");
    (
        GraphPair {
            z,
            x_vertices,
            x_edges,
        },
        merged,
    )
}

/// The element δ of an exceptional fold that identifies X-vertices p and q:
/// spanning-tree geodesics α, β in X from the basepoint, read in the rose.
fn exceptional_delta(p: &GraphPair, u: usize, v: usize) -> Word {
    let xg = p.x_graph();
    let verts: Vec<usize> = p.x_vertices.iter().copied().collect();
    let index = |w: usize| verts.binary_search(&w).expect("X vertex");
    let to = x_tree_word(&xg, index(u));
    let back = x_tree_word(&xg, index(v));
    to.concat(&back.inverse())
}

fn x_tree_word(xg: &StallingsGraph, target: usize) -> Word {
    // BFS geodesic words from the basepoint
    let b = xg.basepoint().unwrap();
    let mut word: Vec<Option<Word>> = vec![None; xg.vertex_count()];
    word[b] = Some(Word::identity());
    let mut queue = VecDeque::from([b]);
    while let Some(v) = queue.pop_front() {
        if v == target {
            break;
        }
        for e in xg.edges() {
            for (from, to_v, sign) in [(e.src, e.dst, 1i8), (e.dst, e.src, -1i8)] {
                if from == v && word[to_v].is_none() {
                    word[to_v] = Some(
                        word[v]
                            .as_ref()
                            .unwrap()
                            .concat(&Word::reduce([Letter::new(e.label, sign)])),
                    );
                    queue.push_back(to_v);
                }
            }
        }
    }
    word[target].clone().expect("X connected")
}

/// One step of "folding and adding a loop if necessary": performs one Z-fold
/// (never a subgraph fold; the caller folds X first) and, when the fold is
/// exceptional with ψ(δ) ∉ Z₁#, wedges Γ(ψ(δ)) onto the basepoint.
pub fn fold_add_loop(p: &GraphPair, psi: &Endomorphism) -> Result<(GraphPair, TraceStep)> {
    if p.is_tight() {
        return Err(Error::NotFoldable(0, 0));
    }
    if p.x_clash().is_some() {
        return Err(Error::SubgraphFoldAvailable);
    }
    let (i, j) = p.z_clash().expect("not tight");
    let kind = classify_fold(p, (i, j))?;
    let delta = match kind {
        FoldKind::Exceptional => {
            let edges = p.z().edges();
            let (a, b) = (edges[i], edges[j]);
            let (u, v) = if a.src == b.src {
                (a.dst, b.dst)
            } else {
                (a.src, b.src)
            };
            Some(exceptional_delta(p, u, v))
        }
        _ => None,
    };
    let (folded_pair, _) = elementary_fold(p, i, j);
    let mut result = folded_pair;
    let mut kind_name = match kind {
        FoldKind::Subgraph => unreachable!("excluded by precondition"),
        FoldKind::Exceptional => "exceptional_fold",
        FoldKind::Plain => "plain_fold",
    }
    .to_string();
    if let Some(delta) = delta {
        let psi_delta = psi.apply(&delta)?;
        let (z1_folded, _) = fold(result.z());
        if !psi_delta.is_identity() && !membership(&z1_folded, &psi_delta) {
            let loop_graph = subgroup_graph(p.z().ambient_rank(), &[psi_delta]);
            let x_graph_snapshot = result.clone();
            result = wedge_onto(&x_graph_snapshot, &loop_graph);
            kind_name = "exceptional_fold_loop_added".into();
        }
    }
    let rr = result.relative_rank();
    Ok((
        result,
        TraceStep {
            kind: kind_name,
            edges: (i, j),
            rr,
        },
    ))
}

/// Wedges a based graph onto the basepoint of the pair; new cells are not
/// in X.
fn wedge_onto(p: &GraphPair, g: &StallingsGraph) -> GraphPair {
    let base = p.z().basepoint().unwrap();
    let gb = g.basepoint().unwrap();
    let mut edges = p.z().edges().to_vec();
    let n = p.z().vertex_count();
    let map = |v: usize| -> usize {
        if v == gb {
            base
        } else if v < gb {
            n + v
        } else {
            n + v - 1
        }
    };
    for e in g.edges() {
        edges.push(Edge {
            src: map(e.src),
            dst: map(e.dst),
            label: e.label,
        });
    }
    let z = StallingsGraph::new(
        n + g.vertex_count() - 1,
        edges,
        Some(base),
        p.z().ambient_rank(),
    )
    .expect("wedge is valid");
    GraphPair {
        z,
        x_vertices: p.x_vertices.clone(),
        x_edges: p.x_edges.clone(),
    }
}

/// The tightening procedure: subgraph folds while X is not tight, then
/// fold-and-add-a-loop steps, until the pair is tight. Terminates; rr is
/// non-increasing along the run.
pub fn tighten(p: &GraphPair, psi: &Endomorphism) -> Result<(GraphPair, Trace)> {
    let mut cur = p.clone();
    let mut trace = Trace::default();
    let mut rr_prev = cur.relative_rank();
    while !cur.is_tight() {
        let step = if let Some((i, j)) = cur.x_clash() {
            let (next, _) = elementary_fold(&cur, i, j);
            cur = next;
            TraceStep {
                kind: "subgraph_fold".into(),
                edges: (i, j),
                rr: cur.relative_rank(),
            }
        } else {
            let (next, step) = fold_add_loop(&cur, psi)?;
            cur = next;
            step
        };
        debug_assert!(step.rr <= rr_prev, "rr must never increase");
        rr_prev = step.rr;
        trace.steps.push(step);
    }
    Ok((cur, trace))
}

/// Extends a spanning tree of X to a spanning tree of Z; the loops of
/// non-tree edges outside X form a basis of a complement C with
/// Z# = X# ∗ C. Requires a tight pair.
pub fn complement_factor(p: &GraphPair) -> Result<ComplementFactor> {
    Ok(ComplementFactor {
        basis_words: pair_bases(p)?.c_basis,
    })
}

/// Basis data of a tight pair read off one spanning tree of Z extending a
/// spanning tree of X.
pub struct PairBases {
    pub z_basis: Vec<Word>,
    pub x_basis: Vec<Word>,
    pub c_basis: Vec<Word>,
    /// For each Z-basis word, whether its defining edge lies in X.
    pub z_in_x: Vec<bool>,
    non_tree_ordinal: Vec<Option<usize>>,
}

pub fn pair_bases(p: &GraphPair) -> Result<PairBases> {
    if !p.is_tight() {
        return Err(Error::NotTight);
    }
    let z = p.z();
    let b = z.basepoint().unwrap();
    // BFS over X-edges first, then the rest: yields T_X ⊆ T_Z
    let mut parent: Vec<Option<(usize, i8)>> = vec![None; z.vertex_count()];
    let mut seen = vec![false; z.vertex_count()];
    seen[b] = true;
    for pass in 0..2 {
        let allowed = |e: usize| -> bool {
            if pass == 0 {
                p.x_edges.contains(&e)
            } else {
                true
            }
        };
        let mut queue: VecDeque<usize> = (0..z.vertex_count()).filter(|&v| seen[v]).collect();
        while let Some(v) = queue.pop_front() {
            for (k, e) in z.edges().iter().enumerate() {
                if !allowed(k) {
                    continue;
                }
                for (from, to, sign) in [(e.src, e.dst, 1i8), (e.dst, e.src, -1i8)] {
                    if from == v && !seen[to] {
                        seen[to] = true;
                        parent[to] = Some((k, sign));
                        queue.push_back(to);
                    }
                }
            }
        }
    }
    let tree: BTreeSet<usize> = parent.iter().flatten().map(|&(e, _)| e).collect();
    let word_to = |mut v: usize| -> Word {
        let mut letters = Vec::new();
        while v != b {
            let (e, dir) = parent[v].expect("connected");
            letters.push(Letter::new(z.edges()[e].label, dir));
            v = if dir > 0 {
                z.edges()[e].src
            } else {
                z.edges()[e].dst
            };
        }
        letters.reverse();
        Word::reduce(letters)
    };
    let mut z_basis = Vec::new();
    let mut x_basis = Vec::new();
    let mut c_basis = Vec::new();
    let mut z_in_x = Vec::new();
    let mut ordinal = vec![None; z.edges().len()];
    for (k, e) in z.edges().iter().enumerate() {
        if tree.contains(&k) {
            continue;
        }
        let w = word_to(e.src)
            .concat(&Word::reduce([Letter::positive(e.label)]))
            .concat(&word_to(e.dst).inverse());
        ordinal[k] = Some(z_basis.len());
        z_basis.push(w.clone());
        let in_x = p.x_edges.contains(&k);
        z_in_x.push(in_x);
        if in_x {
            x_basis.push(w);
        } else {
            c_basis.push(w);
        }
    }
    debug_assert_eq!(z_basis.len(), z.betti());
    debug_assert_eq!(x_basis.len(), p.x_betti());
    Ok(PairBases {
        z_basis,
        x_basis,
        c_basis,
        z_in_x,
        non_tree_ordinal: ordinal,
    })
}

impl PairBases {
    /// Reads a word of Z# off as a sequence of (z-basis ordinal, sign).
    pub fn read(&self, p: &GraphPair, w: &Word) -> Option<Vec<(usize, i8)>> {
        let z = p.z();
        let b = z.basepoint()?;
        let mut cur = b;
        let mut out: Vec<(usize, i8)> = Vec::new();
        for l in w.letters() {
            let mut found = None;
            for (k, e) in z.edges().iter().enumerate() {
                if e.label != l.index() {
                    continue;
                }
                if l.sign() > 0 && e.src == cur {
                    found = Some((k, 1i8, e.dst));
                    break;
                }
                if l.sign() < 0 && e.dst == cur {
                    found = Some((k, -1i8, e.src));
                    break;
                }
            }
            let (k, dir, next) = found?;
            if let Some(ord) = self.non_tree_ordinal[k] {
                if out.last() == Some(&(ord, -dir)) {
                    out.pop();
                } else {
                    out.push((ord, dir));
                }
            }
            cur = next;
        }
        (cur == b).then_some(out)
    }
}

/// θₙ injectivity: folds X ∨ Γ(ψ⁰C) ∨ … ∨ Γ(ψⁿC) and compares the first
/// Betti number with the rank of the free product.
pub fn check_theta(
    p: &GraphPair,
    c: &ComplementFactor,
    psi: &Endomorphism,
    n: u32,
) -> Result<bool> {
    if !p.is_tight() {
        return Err(Error::NotTight);
    }
    if c.basis_words.is_empty() {
        return Ok(true);
    }
    let (wedge, expected) = theta_wedge(p, c, psi, n)?;
    let (folded, _) = fold(&wedge.z);
    Ok(folded.betti() == expected)
}

/// The wedge pair (X ∨ ⋁_{i≤n} Γ(ψⁱC), X ∨ ⋁_{i≤n−1} Γ(ψⁱC)) used both by
/// `check_theta` (Z only) and by the descent step of `minimize`.
fn theta_wedge(
    p: &GraphPair,
    c: &ComplementFactor,
    psi: &Endomorphism,
    n: u32,
) -> Result<(GraphPair, usize)> {
    let rank = p.z().ambient_rank();
    let x = fold(&p.x_graph()).0;
    let x = pointed_core(&x)?;
    let mut graphs = Vec::new();
    let mut expected = x.betti();
    let mut level_words = c.basis_words.clone();
    for _ in 0..=n {
        let g = subgroup_graph(rank, &level_words);
        expected += g.betti();
        graphs.push(g);
        level_words = level_words
            .iter()
            .map(|w| psi.apply(w))
            .collect::<Result<Vec<_>>>()?;
    }
    let mut pair = wedge_pair(&x, &graphs)?;
    // X' = everything except the top level: mark levels 0..n-1 into X
    if n > 0 {
        let top_edges = graphs.last().unwrap().edges().len();
        let total_edges = pair.z.edges().len();
        let top_verts = graphs.last().unwrap().vertex_count() - 1;
        let total_verts = pair.z.vertex_count();
        let x_edges: BTreeSet<usize> = (0..total_edges - top_edges).collect();
        let x_vertices: BTreeSet<usize> = (0..total_verts - top_verts).collect();
        pair = GraphPair::new(pair.z, x_vertices, x_edges)?;
    }
    Ok((pair, expected))
}

/// Result of a `minimize` run: a tight pair passing θₙ for all n ≤ n_cap.
pub struct Minimized {
    pub pair: GraphPair,
    pub complement: ComplementFactor,
    pub certificate_level: u32,
    pub trace: Trace,
}

/// Tighten; scan θₙ for n ≤ n_cap; on a failure at level n, replace the pair
/// by the θ-wedge pair (whose Z-map is non-injective) and re-tighten — the
/// relative rank strictly drops each round — until every level passes.
pub fn minimize(p: &GraphPair, psi: &Endomorphism, n_cap: u32) -> Result<Minimized> {
    let mut trace = Trace::default();
    let (mut cur, t) = tighten(p, psi)?;
    trace.steps.extend(t.steps);
    loop {
        let c = complement_factor(&cur)?;
        let mut failed: Option<u32> = None;
        for n in 0..=n_cap {
            if !check_theta(&cur, &c, psi, n)? {
                failed = Some(n);
                break;
            }
        }
        let Some(n) = failed else {
            return Ok(Minimized {
                pair: cur,
                complement: c,
                certificate_level: n_cap,
                trace,
            });
        };
        let rr_before = cur.relative_rank();
        let (wedge, _) = theta_wedge(&cur, &c, psi, n)?;
        let (next, t) = tighten(&wedge, psi)?;
        trace.steps.extend(t.steps);
        let rr_after = next.relative_rank();
        debug_assert!(rr_after < rr_before, "descent must strictly drop rr");
        trace.descents.push(DescentRound {
            failed_level: n,
            rr_before,
            rr_after,
        });
        cur = next;
    }
}

/// Builds the Z-graph of a pair as a fresh folded copy for membership tests.
pub fn folded_z(p: &GraphPair) -> StallingsGraph {
    fold(p.z()).0
}
