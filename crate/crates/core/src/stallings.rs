//! The Stallings-graph engine: folding, cores, subgroup graphs, membership,
//! bases, pullbacks and double cosets, factorisation, and induced free factor
//! systems.
//!
//! A [`StallingsGraph`] is a directed graph with edges labeled by basis
//! letters of an ambient rose. Each label appears as a single directed edge;
//! traversal against the direction reads the inverse letter. A graph is
//! *folded* when no two distinct edges share (source, label) or
//! (target, label); folded pointed core graphs are in bijection with
//! subgroups of the ambient free group.

use crate::error::{Error, Result};
use crate::words::{Letter, Word};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// One labeled edge. `label` is a 1-based basis letter index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub label: u32,
}

/// A basepointed edge-labeled graph over an ambient rose of a given rank.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StallingsGraph {
    vertex_count: usize,
    edges: Vec<Edge>,
    basepoint: Option<usize>,
    ambient_rank: u32,
}

impl StallingsGraph {
    pub fn new(
        vertex_count: usize,
        edges: Vec<Edge>,
        basepoint: Option<usize>,
        ambient_rank: u32,
    ) -> Result<Self> {
        for e in &edges {
            if e.src >= vertex_count || e.dst >= vertex_count {
                return Err(Error::Parse(format!(
                    "edge endpoint out of range: {} -{}-> {}",
                    e.src, e.label, e.dst
                )));
            }
            if e.label == 0 || e.label > ambient_rank {
                return Err(Error::AlphabetMismatch {
                    index: e.label,
                    rank: ambient_rank,
                });
            }
        }
        if let Some(b) = basepoint {
            if b >= vertex_count {
                return Err(Error::Parse(format!("basepoint {b} out of range")));
            }
        }
        Ok(StallingsGraph {
            vertex_count,
            edges,
            basepoint,
            ambient_rank,
        })
    }

    pub fn single_vertex(pointed: bool, ambient_rank: u32) -> Self {
        StallingsGraph {
            vertex_count: 1,
            edges: Vec::new(),
            basepoint: if pointed { Some(0) } else { None },
            ambient_rank,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn basepoint(&self) -> Option<usize> {
        self.basepoint
    }

    pub fn ambient_rank(&self) -> u32 {
        self.ambient_rank
    }

    pub fn set_basepoint(&mut self, b: Option<usize>) {
        if let Some(v) = b {
            assert!(v < self.vertex_count);
        }
        self.basepoint = b;
    }

    /// Number of connected components (isolated vertices count).
    pub fn component_ids(&self) -> Vec<usize> {
        let mut uf = UnionFind::new(self.vertex_count);
        for e in &self.edges {
            uf.union(e.src, e.dst);
        }
        let mut ids = vec![usize::MAX; self.vertex_count];
        let mut next = 0;
        for v in 0..self.vertex_count {
            let r = uf.find(v);
            if ids[r] == usize::MAX {
                ids[r] = next;
                next += 1;
            }
            ids[v] = ids[r];
        }
        ids
    }

    pub fn component_count(&self) -> usize {
        self.component_ids()
            .iter()
            .copied()
            .max()
            .map_or(0, |m| m + 1)
    }

    pub fn is_connected(&self) -> bool {
        self.vertex_count <= 1 || self.component_count() == 1
    }

    /// Total first Betti number: E - V + (number of components).
    pub fn betti(&self) -> usize {
        (self.edges.len() + self.component_count()).saturating_sub(self.vertex_count)
    }

    /// Edge-end degree of a vertex; a loop contributes 2.
    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .map(|e| (e.src == v) as usize + (e.dst == v) as usize)
            .sum()
    }

    pub fn is_folded(&self) -> bool {
        let mut out = BTreeSet::new();
        let mut inc = BTreeSet::new();
        for e in &self.edges {
            if !out.insert((e.src, e.label)) || !inc.insert((e.dst, e.label)) {
                return false;
            }
        }
        true
    }

    /// Directed-slot lookup for a folded graph: `(vertex, letter)` keys for
    /// outgoing (positive) and incoming (negative traversal) edges.
    fn slots(&self) -> Result<Slots> {
        let mut out = BTreeMap::new();
        let mut inc = BTreeMap::new();
        for (i, e) in self.edges.iter().enumerate() {
            if out.insert((e.src, e.label), i).is_some()
                || inc.insert((e.dst, e.label), i).is_some()
            {
                return Err(Error::NotFolded);
            }
        }
        Ok(Slots { out, inc })
    }

    /// Follows a reduced word from `start` through a folded graph.
    /// Returns the end vertex, or `None` if some step is missing.
    pub fn trace_from(&self, start: usize, w: &Word) -> Option<usize> {
        let slots = self.slots().ok()?;
        let mut cur = start;
        for l in w.letters() {
            cur = slots.step(self, cur, *l)?.0;
        }
        Some(cur)
    }

    /// Every vertex and edge lies on an immersed cycle.
    pub fn is_core(&self) -> bool {
        let c = core(self);
        c.vertex_count == self.vertex_count && c.edges.len() == self.edges.len()
    }

    /// Every edge lies on an immersed loop at the basepoint.
    pub fn is_pointed_core(&self) -> bool {
        if self.basepoint.is_none() {
            return false;
        }
        let c = pointed_core(self).expect("basepoint present");
        c.vertex_count == self.vertex_count && c.edges.len() == self.edges.len()
    }
}

struct Slots {
    out: BTreeMap<(usize, u32), usize>,
    inc: BTreeMap<(usize, u32), usize>,
}

impl Slots {
    /// One traversal step: returns (next vertex, edge index, direction).
    fn step(&self, g: &StallingsGraph, v: usize, l: Letter) -> Option<(usize, usize, i8)> {
        if l.sign() > 0 {
            let &e = self.out.get(&(v, l.index()))?;
            Some((g.edges[e].dst, e, 1))
        } else {
            let &e = self.inc.get(&(v, l.index()))?;
            Some((g.edges[e].src, e, -1))
        }
    }
}

#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, mut v: usize) -> usize {
        let mut root = v;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[v] != v {
            let p = self.parent[v];
            self.parent[v] = root;
            v = p;
        }
        root
    }

    /// Merges the classes, keeping the smaller representative.
    pub fn union(&mut self, a: usize, b: usize) -> usize {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return ra;
        }
        let (keep, drop) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[drop] = keep;
        keep
    }
}

/// A label- and incidence-preserving graph map.
#[derive(Clone, Debug)]
pub struct GraphMorphism {
    pub domain: StallingsGraph,
    pub codomain: StallingsGraph,
    pub vertex_map: Vec<usize>,
    pub edge_map: Vec<usize>,
}

impl GraphMorphism {
    /// Locally injective: no two distinct edge-ends at a vertex map to the
    /// same directed edge-end.
    pub fn is_immersion(&self) -> bool {
        let mut seen = BTreeSet::new();
        for (i, e) in self.domain.edges().iter().enumerate() {
            let img = self.edge_map[i];
            if !seen.insert((e.src, img, true)) || !seen.insert((e.dst, img, false)) {
                return false;
            }
        }
        true
    }
}

/// Wedge of subdivided loops at one basepoint, one loop per word.
pub fn graph_from_words(ambient_rank: u32, words: &[Word], pointed: bool) -> StallingsGraph {
    let mut edges = Vec::new();
    let mut vertex_count = 1usize; // vertex 0 is the wedge point
    for w in words {
        let n = w.len();
        if n == 0 {
            continue;
        }
        // chain of n-1 interior vertices closing back at the wedge point
        let mut prev = 0usize;
        for (i, l) in w.letters().iter().enumerate() {
            let next = if i + 1 == n {
                0
            } else {
                vertex_count += 1;
                vertex_count - 1
            };
            if l.sign() > 0 {
                edges.push(Edge {
                    src: prev,
                    dst: next,
                    label: l.index(),
                });
            } else {
                edges.push(Edge {
                    src: next,
                    dst: prev,
                    label: l.index(),
                });
            }
            prev = next;
        }
    }
    StallingsGraph {
        vertex_count,
        edges,
        basepoint: if pointed { Some(0) } else { None },
        ambient_rank,
    }
}

/// Fully folds a graph: union-find over vertices driven by a worklist of
/// label-clashing edge pairs. Returns the folded graph and the quotient
/// morphism. The result is independent of fold order up to based
/// label-isomorphism.
pub fn fold(g: &StallingsGraph) -> (StallingsGraph, GraphMorphism) {
    let mut uf = UnionFind::new(g.vertex_count);
    let mut edge_uf = UnionFind::new(g.edges.len());
    let mut alive: Vec<bool> = vec![true; g.edges.len()];

    // incident edge ids per vertex class, merged along with the classes
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); g.vertex_count];
    for (i, e) in g.edges.iter().enumerate() {
        incident[e.src].push(i);
        if e.dst != e.src {
            incident[e.dst].push(i);
        }
    }
    let mut queue: VecDeque<usize> = (0..g.vertex_count).collect();
    while let Some(v) = queue.pop_front() {
        let mut c = uf.find(v);
        if c != v {
            continue; // processed under its class representative
        }
        // rescan this class until no clash involves it
        'rescan: loop {
            let mut out: BTreeMap<u32, usize> = BTreeMap::new();
            let mut inc: BTreeMap<u32, usize> = BTreeMap::new();
            for idx in 0..incident[c].len() {
                let i = incident[c][idx];
                if !alive[i] {
                    continue;
                }
                let s = uf.find(g.edges[i].src);
                let d = uf.find(g.edges[i].dst);
                let l = g.edges[i].label;
                let clash = if s == c {
                    match out.get(&l) {
                        Some(&j) if j != i => Some((j, i, true)),
                        _ => {
                            out.insert(l, i);
                            None
                        }
                    }
                } else {
                    None
                };
                let clash = clash.or(if d == c {
                    match inc.get(&l) {
                        Some(&j) if j != i => Some((j, i, false)),
                        _ => {
                            inc.insert(l, i);
                            None
                        }
                    }
                } else {
                    None
                });
                if let Some((keep, drop, source_type)) = clash {
                    let (a, b) = if source_type {
                        (g.edges[keep].dst, g.edges[drop].dst)
                    } else {
                        (g.edges[keep].src, g.edges[drop].src)
                    };
                    let ra = uf.find(a);
                    let rb = uf.find(b);
                    edge_uf.union(keep, drop);
                    alive[drop] = false;
                    if ra != rb {
                        let merged = uf.union(ra, rb);
                        let loser = if merged == ra { rb } else { ra };
                        let moved = std::mem::take(&mut incident[loser]);
                        incident[merged].extend(moved);
                        queue.push_back(merged);
                        // the current class may have been absorbed
                        c = uf.find(c);
                    }
                    continue 'rescan;
                }
            }
            break;
        }
    }

    // Renumber vertex classes by first occurrence.
    let mut vmap = vec![usize::MAX; g.vertex_count];
    let mut new_count = 0usize;
    for v in 0..g.vertex_count {
        let r = uf.find(v);
        if vmap[r] == usize::MAX {
            vmap[r] = new_count;
            new_count += 1;
        }
        vmap[v] = vmap[r];
    }

    let mut new_edges = Vec::new();
    let mut edge_index = vec![usize::MAX; g.edges.len()];
    for i in 0..g.edges.len() {
        if alive[i] {
            edge_index[i] = new_edges.len();
            new_edges.push(Edge {
                src: vmap[uf.find(g.edges[i].src)],
                dst: vmap[uf.find(g.edges[i].dst)],
                label: g.edges[i].label,
            });
        }
    }
    let edge_map: Vec<usize> = (0..g.edges.len())
        .map(|i| edge_index[edge_uf.find(i)])
        .collect();

    let folded = StallingsGraph {
        vertex_count: new_count.max(if g.vertex_count == 0 { 0 } else { 1 }),
        edges: new_edges,
        basepoint: g.basepoint.map(|b| vmap[b]),
        ambient_rank: g.ambient_rank,
    };
    let morphism = GraphMorphism {
        domain: g.clone(),
        codomain: folded.clone(),
        vertex_map: vmap,
        edge_map,
    };
    (folded, morphism)
}

/// Folds after a pseudorandom relabeling of vertices and edges; used to check
/// that fold results do not depend on fold order.
pub fn fold_shuffled(g: &StallingsGraph, seed: u64) -> StallingsGraph {
    let mut rng = SplitMix::new(seed);
    let vperm = rng.permutation(g.vertex_count);
    let eperm = rng.permutation(g.edges.len());
    let mut edges = vec![
        Edge {
            src: 0,
            dst: 0,
            label: 1
        };
        g.edges.len()
    ];
    for (i, e) in g.edges.iter().enumerate() {
        edges[eperm[i]] = Edge {
            src: vperm[e.src],
            dst: vperm[e.dst],
            label: e.label,
        };
    }
    let shuffled = StallingsGraph {
        vertex_count: g.vertex_count,
        edges,
        basepoint: g.basepoint.map(|b| vperm[b]),
        ambient_rank: g.ambient_rank,
    };
    fold(&shuffled).0
}

/// Deterministic small PRNG for shuffles; not exposed.
pub(crate) struct SplitMix {
    state: u64,
}

impl SplitMix {
    pub(crate) fn new(seed: u64) -> Self {
        SplitMix { state: seed }
    }

    pub(crate) fn next(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub(crate) fn below(&mut self, n: usize) -> usize {
        (self.next() % n.max(1) as u64) as usize
    }

    fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            p.swap(i, self.below(i + 1));
        }
        p
    }
}

/// Maximal subgraph in which every vertex and edge lies on an immersed cycle:
/// iteratively prunes valence-<=1 vertices.
pub fn core(g: &StallingsGraph) -> StallingsGraph {
    let keep_vertex = prune(g, None);
    rebuild(g, &keep_vertex, None)
}

/// Maximal subgraph in which every edge lies on an immersed loop at the
/// basepoint; the basepoint is retained even if isolated.
pub fn pointed_core(g: &StallingsGraph) -> Result<StallingsGraph> {
    let b = g.basepoint.ok_or(Error::MissingBasepoint)?;
    // restrict to the component of the basepoint first
    let comp = g.component_ids();
    let mut keep: Vec<bool> = (0..g.vertex_count).map(|v| comp[v] == comp[b]).collect();
    let kept_edges: Vec<bool> = g.edges.iter().map(|e| keep[e.src]).collect();
    let restricted = StallingsGraph {
        vertex_count: g.vertex_count,
        edges: g
            .edges
            .iter()
            .zip(&kept_edges)
            .filter_map(|(e, &k)| k.then_some(*e))
            .collect(),
        basepoint: Some(b),
        ambient_rank: g.ambient_rank,
    };
    let mut keep_vertex = prune(&restricted, Some(b));
    for v in 0..g.vertex_count {
        if comp[v] != comp[b] {
            keep_vertex[v] = false;
        }
    }
    keep[b] = true;
    Ok(rebuild(&restricted, &keep_vertex, Some(b)))
}

/// Iterated deletion of valence-<=1 vertices, sparing `spare`.
fn prune(g: &StallingsGraph, spare: Option<usize>) -> Vec<bool> {
    let mut keep = vec![true; g.vertex_count];
    let mut degree = vec![0usize; g.vertex_count];
    for e in &g.edges {
        degree[e.src] += 1;
        degree[e.dst] += 1;
    }
    let mut queue: VecDeque<usize> = (0..g.vertex_count)
        .filter(|&v| degree[v] <= 1 && Some(v) != spare)
        .collect();
    let mut edge_alive = vec![true; g.edges.len()];
    while let Some(v) = queue.pop_front() {
        if !keep[v] || degree[v] > 1 || Some(v) == spare {
            continue;
        }
        keep[v] = false;
        for (i, e) in g.edges.iter().enumerate() {
            if edge_alive[i] && (e.src == v || e.dst == v) {
                edge_alive[i] = false;
                for u in [e.src, e.dst] {
                    degree[u] -= 1;
                    if keep[u] && degree[u] <= 1 && Some(u) != spare {
                        queue.push_back(u);
                    }
                }
            }
        }
    }
    keep
}

fn rebuild(g: &StallingsGraph, keep_vertex: &[bool], basepoint: Option<usize>) -> StallingsGraph {
    let mut vmap = vec![usize::MAX; g.vertex_count];
    let mut count = 0;
    for v in 0..g.vertex_count {
        if keep_vertex[v] {
            vmap[v] = count;
            count += 1;
        }
    }
    let edges = g
        .edges
        .iter()
        .filter(|e| keep_vertex[e.src] && keep_vertex[e.dst])
        .map(|e| Edge {
            src: vmap[e.src],
            dst: vmap[e.dst],
            label: e.label,
        })
        .collect();
    StallingsGraph {
        vertex_count: count,
        edges,
        basepoint: basepoint.map(|b| vmap[b]),
        ambient_rank: g.ambient_rank,
    }
}

/// The pointed core folded graph of the subgroup generated by `words`.
pub fn subgroup_graph(ambient_rank: u32, words: &[Word]) -> StallingsGraph {
    let wedge = graph_from_words(ambient_rank, words, true);
    let (folded, _) = fold(&wedge);
    pointed_core(&folded).expect("wedge is pointed")
}

/// True iff `w` labels a closed path at the basepoint. Requires a folded
/// pointed graph.
pub fn membership(h_graph: &StallingsGraph, w: &Word) -> bool {
    let b = h_graph.basepoint.expect("membership needs a pointed graph");
    h_graph.trace_from(b, w) == Some(b)
}

/// BFS spanning tree from `root`: `parent[v] = (edge, dir)` crossing into v.
fn spanning_tree(g: &StallingsGraph, root: usize) -> Vec<Option<(usize, i8)>> {
    let mut parent: Vec<Option<(usize, i8)>> = vec![None; g.vertex_count];
    let mut seen = vec![false; g.vertex_count];
    seen[root] = true;
    let mut adj: Vec<Vec<(usize, i8, usize)>> = vec![Vec::new(); g.vertex_count];
    for (i, e) in g.edges.iter().enumerate() {
        adj[e.src].push((i, 1, e.dst));
        adj[e.dst].push((i, -1, e.src));
    }
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for &(e, dir, u) in &adj[v] {
            if !seen[u] {
                seen[u] = true;
                parent[u] = Some((e, dir));
                queue.push_back(u);
            }
        }
    }
    parent
}

fn tree_word(
    g: &StallingsGraph,
    parent: &[Option<(usize, i8)>],
    mut v: usize,
    root: usize,
) -> Word {
    let mut letters = Vec::new();
    while v != root {
        let (e, dir) = parent[v].expect("connected");
        letters.push(Letter::new(g.edges[e].label, dir));
        v = if dir > 0 {
            g.edges[e].src
        } else {
            g.edges[e].dst
        };
    }
    letters.reverse();
    Word::reduce(letters)
}

fn tree_edge_set(parent: &[Option<(usize, i8)>]) -> BTreeSet<usize> {
    parent.iter().flatten().map(|&(e, _)| e).collect()
}

/// A free basis of the subgroup represented by a folded pointed core graph:
/// one word per non-tree edge.
pub fn basis(h_graph: &StallingsGraph) -> Result<Vec<Word>> {
    let b = h_graph.basepoint.ok_or(Error::MissingBasepoint)?;
    if !h_graph.is_connected() {
        return Err(Error::Disconnected);
    }
    let parent = spanning_tree(h_graph, b);
    let tree = tree_edge_set(&parent);
    let mut out = Vec::new();
    for (i, e) in h_graph.edges.iter().enumerate() {
        if tree.contains(&i) {
            continue;
        }
        let to = tree_word(h_graph, &parent, e.src, b);
        let back = tree_word(h_graph, &parent, e.dst, b).inverse();
        out.push(
            to.concat(&Word::reduce([Letter::positive(e.label)]))
                .concat(&back),
        );
    }
    debug_assert_eq!(out.len(), h_graph.betti());
    Ok(out)
}

/// Reads a closed basepoint path off as a product of spanning-tree basis
/// elements: returns the sequence of (non-tree-edge ordinal, sign) crossings.
/// Requires a folded pointed graph with `w` in its subgroup.
pub fn read_in_basis(h_graph: &StallingsGraph, w: &Word) -> Option<Vec<(usize, i8)>> {
    let b = h_graph.basepoint?;
    let slots = h_graph.slots().ok()?;
    let parent = spanning_tree(h_graph, b);
    let tree = tree_edge_set(&parent);
    // ordinal of each non-tree edge in basis() order
    let mut ordinal = BTreeMap::new();
    for (i, _) in h_graph.edges.iter().enumerate() {
        if !tree.contains(&i) {
            let n = ordinal.len();
            ordinal.insert(i, n);
        }
    }
    let mut cur = b;
    let mut out: Vec<(usize, i8)> = Vec::new();
    for l in w.letters() {
        let (next, e, dir) = slots.step(h_graph, cur, *l)?;
        if let Some(&k) = ordinal.get(&e) {
            if out.last() == Some(&(k, -dir)) {
                out.pop();
            } else {
                out.push((k, dir));
            }
        }
        cur = next;
    }
    (cur == b).then_some(out)
}

/// Canonical key of a folded pointed connected graph under based
/// label-isomorphism: BFS renumbering by (label, direction) slot order.
pub fn canonical_key(g: &StallingsGraph) -> Result<(usize, Vec<Edge>)> {
    let b = g.basepoint.ok_or(Error::MissingBasepoint)?;
    let slots = g.slots()?;
    let mut number = vec![usize::MAX; g.vertex_count];
    number[b] = 0;
    let mut order = vec![b];
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        for l in 1..=g.ambient_rank {
            for sign in [1i8, -1] {
                if let Some((u, _, _)) = slots.step(g, v, Letter::new(l, sign)) {
                    if number[u] == usize::MAX {
                        number[u] = order.len();
                        order.push(u);
                    }
                }
            }
        }
    }
    if order.len() != g.vertex_count {
        return Err(Error::Disconnected);
    }
    let mut edges: Vec<Edge> = g
        .edges
        .iter()
        .map(|e| Edge {
            src: number[e.src],
            dst: number[e.dst],
            label: e.label,
        })
        .collect();
    edges.sort();
    Ok((g.vertex_count, edges))
}

pub fn is_isomorphic_based(a: &StallingsGraph, b: &StallingsGraph) -> bool {
    match (canonical_key(a), canonical_key(b)) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

/// One core component of a pullback together with its double-coset data.
#[derive(Clone, Debug)]
pub struct CosetComponent {
    /// Vertices of the product graph in this core component.
    pub vertices: Vec<usize>,
    pub betti: usize,
    /// Representative g of the double coset H·g·K, when both inputs pointed.
    pub rep: Option<Word>,
    /// Whether this component contains the pair of basepoints.
    pub based: bool,
}

/// Pullback of two folded graphs over the common rose.
#[derive(Clone, Debug)]
pub struct Pullback {
    pub graph: StallingsGraph,
    /// Product vertex -> (vertex in g1, vertex in g2).
    pub vertex_pairs: Vec<(usize, usize)>,
    /// Product edge -> (edge in g1, edge in g2).
    pub edge_pairs: Vec<(usize, usize)>,
    /// Core components, one per double coset with nontrivial intersection.
    pub core_components: Vec<CosetComponent>,
    /// Projections onto the two factors.
    pub proj1: GraphMorphism,
    pub proj2: GraphMorphism,
}

/// Pullback per the double-coset correspondence: vertex set = pairs of
/// vertices joined by matched-label edges (plus the basepoint pair); core
/// components biject with double cosets H·g·K having H^g ∩ K ≠ 1, and the
/// based component represents H ∩ K.
pub fn pullback(g1: &StallingsGraph, g2: &StallingsGraph) -> Result<Pullback> {
    if g1.ambient_rank != g2.ambient_rank {
        return Err(Error::RankMismatch {
            left: g1.ambient_rank,
            right: g2.ambient_rank,
        });
    }
    if !g1.is_folded() || !g2.is_folded() {
        return Err(Error::NotFolded);
    }
    let mut vertex_id: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut vertex_pairs: Vec<(usize, usize)> = Vec::new();
    let mut intern = |p: (usize, usize), pairs: &mut Vec<(usize, usize)>| -> usize {
        *vertex_id.entry(p).or_insert_with(|| {
            pairs.push(p);
            pairs.len() - 1
        })
    };
    let basepair = match (g1.basepoint, g2.basepoint) {
        (Some(a), Some(b)) => Some((a, b)),
        _ => None,
    };
    let mut edges = Vec::new();
    let mut edge_pairs = Vec::new();
    for (i, e1) in g1.edges.iter().enumerate() {
        for (j, e2) in g2.edges.iter().enumerate() {
            if e1.label != e2.label {
                continue;
            }
            let s = intern((e1.src, e2.src), &mut vertex_pairs);
            let d = intern((e1.dst, e2.dst), &mut vertex_pairs);
            edges.push(Edge {
                src: s,
                dst: d,
                label: e1.label,
            });
            edge_pairs.push((i, j));
        }
    }
    if let Some(bp) = basepair {
        intern(bp, &mut vertex_pairs);
    }
    let basepoint = basepair.map(|bp| vertex_id[&bp]);
    let graph = StallingsGraph {
        vertex_count: vertex_pairs.len(),
        edges,
        basepoint,
        ambient_rank: g1.ambient_rank,
    };

    // Core components: components of the pruned product with Betti >= 1.
    let keep = prune(&graph, None);
    let comp = graph.component_ids();
    let mut comp_vertices: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..graph.vertex_count {
        if keep[v] {
            comp_vertices.entry(comp[v]).or_default().push(v);
        }
    }
    let mut comp_edges: BTreeMap<usize, usize> = BTreeMap::new();
    for e in &graph.edges {
        if keep[e.src] && keep[e.dst] {
            *comp_edges.entry(comp[e.src]).or_default() += 1;
        }
    }

    let tree1 = g1.basepoint.map(|b| spanning_tree(g1, b));
    let tree2 = g2.basepoint.map(|b| spanning_tree(g2, b));

    let mut core_components = Vec::new();
    for (&c, verts) in &comp_vertices {
        let e = comp_edges.get(&c).copied().unwrap_or(0);
        if e < verts.len() {
            continue; // tree component, trivial intersection
        }
        let betti = e + 1 - verts.len();
        let based = basepoint.is_some_and(|b| comp[b] == c && keep[b]);
        let x = *verts.iter().min().expect("nonempty");
        let rep = match (&tree1, &tree2) {
            (Some(t1), Some(t2)) => {
                let (p1, p2) = vertex_pairs[x];
                let a = tree_word(g1, t1, p1, g1.basepoint.unwrap());
                let bw = tree_word(g2, t2, p2, g2.basepoint.unwrap());
                Some(a.concat(&bw.inverse()))
            }
            _ => None,
        };
        core_components.push(CosetComponent {
            vertices: verts.clone(),
            betti,
            rep,
            based,
        });
    }

    let proj1 = GraphMorphism {
        domain: graph.clone(),
        codomain: g1.clone(),
        vertex_map: vertex_pairs.iter().map(|&(a, _)| a).collect(),
        edge_map: edge_pairs.iter().map(|&(a, _)| a).collect(),
    };
    let proj2 = GraphMorphism {
        domain: graph.clone(),
        codomain: g2.clone(),
        vertex_map: vertex_pairs.iter().map(|&(_, b)| b).collect(),
        edge_map: edge_pairs.iter().map(|&(_, b)| b).collect(),
    };
    Ok(Pullback {
        graph,
        vertex_pairs,
        edge_pairs,
        core_components,
        proj1,
        proj2,
    })
}

/// Pointed core of the based pullback component: the graph of H ∩ K.
pub fn intersection(g1: &StallingsGraph, g2: &StallingsGraph) -> Result<StallingsGraph> {
    let pb = pullback(g1, g2)?;
    if pb.graph.basepoint().is_none() {
        return Err(Error::MissingBasepoint);
    }
    pointed_core(&pb.graph)
}

/// The unique label- and basepoint-preserving morphism Γ(H) -> Γ(K) when
/// H <= K; `None` otherwise. Both graphs folded and pointed; the domain a
/// pointed core.
pub fn factorise(h_graph: &StallingsGraph, k_graph: &StallingsGraph) -> Option<GraphMorphism> {
    let hb = h_graph.basepoint?;
    let kb = k_graph.basepoint?;
    morphism_from(h_graph, k_graph, hb, kb)
}

/// Propagates a vertex assignment across a connected domain; the codomain
/// being folded makes images forced. Fails on a missing or clashing slot.
fn morphism_from(
    dom: &StallingsGraph,
    cod: &StallingsGraph,
    dv: usize,
    cv: usize,
) -> Option<GraphMorphism> {
    let slots = cod.slots().ok()?;
    let mut vmap = vec![usize::MAX; dom.vertex_count];
    let mut emap = vec![usize::MAX; dom.edges.len()];
    vmap[dv] = cv;
    let mut adj: Vec<Vec<(usize, i8, usize)>> = vec![Vec::new(); dom.vertex_count];
    for (i, e) in dom.edges.iter().enumerate() {
        adj[e.src].push((i, 1, e.dst));
        adj[e.dst].push((i, -1, e.src));
    }
    let mut queue = VecDeque::from([dv]);
    while let Some(v) = queue.pop_front() {
        for &(i, dir, u) in &adj[v] {
            let l = Letter::new(dom.edges[i].label, dir);
            let (cu, ce, _) = slots.step(cod, vmap[v], l)?;
            if emap[i] != usize::MAX && emap[i] != ce {
                return None;
            }
            emap[i] = ce;
            if vmap[u] == usize::MAX {
                vmap[u] = cu;
                queue.push_back(u);
            } else if vmap[u] != cu {
                return None;
            }
        }
    }
    if vmap.contains(&usize::MAX) {
        return None; // disconnected domain
    }
    Some(GraphMorphism {
        domain: dom.clone(),
        codomain: cod.clone(),
        vertex_map: vmap,
        edge_map: emap,
    })
}

/// If some H^f = f⁻¹Hf <= K, returns such an f; `None` otherwise.
/// The trivial subgroup conjugates in via f = 1.
pub fn conjugate_into(ambient_rank: u32, h_gens: &[Word], k_gens: &[Word]) -> Option<Word> {
    let h_graph = subgroup_graph(ambient_rank, h_gens);
    if h_graph.betti() == 0 {
        return Some(Word::identity());
    }
    let k_graph = subgroup_graph(ambient_rank, k_gens);
    let h_core = core(&h_graph);
    let k_core = core(&k_graph);
    if k_core.vertex_count == 0 {
        return None;
    }
    // Anchor at the minimal core vertex of Γ(H); its position inside the
    // pointed graph is recovered by tracing the empty assignment below.
    let h_core_in_h = embed_core_vertex(&h_graph);
    let parent_h = spanning_tree(&h_graph, h_graph.basepoint.unwrap());
    let parent_k = spanning_tree(&k_graph, k_graph.basepoint.unwrap());
    let u = tree_word(
        &h_graph,
        &parent_h,
        h_core_in_h.1,
        h_graph.basepoint.unwrap(),
    );
    for cv in 0..k_core.vertex_count {
        if morphism_from(&h_core, &k_core, h_core_in_h.0, cv).is_some() {
            // locate cv inside Γ(K)
            let kv = locate_core_vertex(&k_graph, &k_core, cv);
            let s = tree_word(&k_graph, &parent_k, kv, k_graph.basepoint.unwrap());
            let f = u.concat(&s.inverse());
            debug_assert!(h_gens
                .iter()
                .all(|g| membership(&k_graph, &g.conjugate(&f))));
            return Some(f);
        }
    }
    None
}

/// (vertex id in core(g), corresponding vertex id in g) for the minimal
/// core vertex.
fn embed_core_vertex(g: &StallingsGraph) -> (usize, usize) {
    let keep = prune(g, None);
    let v_in_g = (0..g.vertex_count)
        .find(|&v| keep[v])
        .expect("nontrivial core");
    let rank_in_core = (0..v_in_g).filter(|&v| keep[v]).count();
    (rank_in_core, v_in_g)
}

fn locate_core_vertex(g: &StallingsGraph, _core: &StallingsGraph, cv: usize) -> usize {
    let keep = prune(g, None);
    (0..g.vertex_count)
        .filter(|&v| keep[v])
        .nth(cv)
        .expect("core vertex exists in parent graph")
}

/// One induced factor `A^g ∩ H` with its double-coset representative.
#[derive(Clone, Debug)]
pub struct InducedFactor {
    pub factor_index: usize,
    pub basis: Vec<Word>,
    pub rep: Word,
}

/// Intersects a free factor system given by disjoint letter subsets of the
/// ambient basis with the subgroup H: one entry per core component of each
/// pullback Γ(A_α) ×_R Γ(H).
pub fn induced_free_factor_system(
    ambient_rank: u32,
    h_gens: &[Word],
    factors: &[Vec<u32>],
) -> Result<Vec<InducedFactor>> {
    let mut seen = BTreeSet::new();
    for f in factors {
        for &l in f {
            if l == 0 || l > ambient_rank {
                return Err(Error::AlphabetMismatch {
                    index: l,
                    rank: ambient_rank,
                });
            }
            if !seen.insert(l) {
                return Err(Error::OverlappingFactors);
            }
        }
    }
    let h_graph = subgroup_graph(ambient_rank, h_gens);
    let mut out = Vec::new();
    for (fi, letters) in factors.iter().enumerate() {
        let rose = StallingsGraph {
            vertex_count: 1,
            edges: letters
                .iter()
                .map(|&l| Edge {
                    src: 0,
                    dst: 0,
                    label: l,
                })
                .collect(),
            basepoint: Some(0),
            ambient_rank,
        };
        let pb = pullback(&rose, &h_graph)?;
        for comp in &pb.core_components {
            let rep = comp.rep.clone().expect("both pointed");
            // π₁ of the component pointed at its minimal vertex, conjugated
            // back to the basepoint by the connecting H-side path.
            let x = *comp.vertices.iter().min().expect("nonempty");
            let sub = component_graph(&pb.graph, &comp.vertices, x);
            let local = basis(&pointed_core(&sub)?)?;
            let (_, p2) = pb.vertex_pairs[x];
            let parent_h = spanning_tree(&h_graph, h_graph.basepoint.unwrap());
            let b_word = tree_word(&h_graph, &parent_h, p2, h_graph.basepoint.unwrap());
            let conj: Vec<Word> = local
                .iter()
                .map(|w| b_word.concat(w).concat(&b_word.inverse()))
                .collect();
            out.push(InducedFactor {
                factor_index: fi,
                basis: conj,
                rep,
            });
        }
    }
    Ok(out)
}

/// Restriction of `g` to the given vertices, pointed at `base`.
fn component_graph(g: &StallingsGraph, vertices: &[usize], base: usize) -> StallingsGraph {
    let set: BTreeSet<usize> = vertices.iter().copied().collect();
    let mut vmap = BTreeMap::new();
    for (i, &v) in vertices.iter().enumerate() {
        vmap.insert(v, i);
    }
    StallingsGraph {
        vertex_count: vertices.len(),
        edges: g
            .edges
            .iter()
            .filter(|e| set.contains(&e.src) && set.contains(&e.dst))
            .map(|e| Edge {
                src: vmap[&e.src],
                dst: vmap[&e.dst],
                label: e.label,
            })
            .collect(),
        basepoint: Some(vmap[&base]),
        ambient_rank: g.ambient_rank,
    }
}

/// rr(A) = max{rk(A) - 1, 0} for A = ⟨gens⟩.
pub fn reduced_rank(ambient_rank: u32, gens: &[Word]) -> usize {
    subgroup_graph(ambient_rank, gens).betti().saturating_sub(1)
}

// ---------------------------------------------------------------------------
// Constructive membership: expressing a word as a product of given generators
// by folding the generator wedge while recording fold events, then lifting
// the traced path back through the fold sequence.
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
struct FoldEvent {
    kept: usize,
    dropped: usize,
    /// Endpoint vertices merged by this fold (original ids), if any.
    vmerge: Option<(usize, usize)>,
    /// true: edges shared their source class; false: their target class.
    source_type: bool,
}

/// Tracked folding of the wedge of generator loops. Supports membership with
/// an explicit expression of the word as a product of the generators.
pub struct ExpressContext {
    gens: Vec<Word>,
    vertex_count: usize,
    edges: Vec<Edge>,
    /// Non-tree marker (generator index, loop-forward crossing direction):
    /// crossing the edge along the loop emits (i, +1).
    symbol: Vec<Option<(usize, i8)>>,
    events: Vec<FoldEvent>,
    base: usize,
    alive: Vec<bool>,
}

impl ExpressContext {
    pub fn new(ambient_rank: u32, gens: &[Word]) -> Self {
        let wedge = graph_from_words(ambient_rank, gens, true);
        let mut symbol = vec![None; wedge.edges.len()];
        // last edge of each nonempty loop carries the generator symbol; the
        // stored edge points backwards when the final letter is an inverse
        let mut pos = 0usize;
        for (i, g) in gens.iter().enumerate() {
            if g.is_empty() {
                continue;
            }
            pos += g.len();
            symbol[pos - 1] = Some((i, g.letters().last().unwrap().sign()));
        }
        let mut ctx = ExpressContext {
            gens: gens.to_vec(),
            vertex_count: wedge.vertex_count,
            edges: wedge.edges.clone(),
            symbol,
            events: Vec::new(),
            base: 0,
            alive: vec![true; wedge.edges.len()],
        };
        ctx.fold_all();
        ctx
    }

    fn fold_all(&mut self) {
        let mut uf = UnionFind::new(self.vertex_count);
        loop {
            let mut clash: Option<FoldEvent> = None;
            let mut out: BTreeMap<(usize, u32), usize> = BTreeMap::new();
            let mut inc: BTreeMap<(usize, u32), usize> = BTreeMap::new();
            for i in 0..self.edges.len() {
                if !self.alive[i] {
                    continue;
                }
                let s = uf.find(self.edges[i].src);
                let d = uf.find(self.edges[i].dst);
                let l = self.edges[i].label;
                if let Some(&j) = out.get(&(s, l)) {
                    let (a, b) = (self.edges[j].dst, self.edges[i].dst);
                    clash = Some(FoldEvent {
                        kept: j,
                        dropped: i,
                        vmerge: (uf.find(a) != uf.find(b)).then_some((a, b)),
                        source_type: true,
                    });
                    break;
                }
                out.insert((s, l), i);
                if let Some(&j) = inc.get(&(d, l)) {
                    let (a, b) = (self.edges[j].src, self.edges[i].src);
                    clash = Some(FoldEvent {
                        kept: j,
                        dropped: i,
                        vmerge: (uf.find(a) != uf.find(b)).then_some((a, b)),
                        source_type: false,
                    });
                    break;
                }
                inc.insert((d, l), i);
            }
            match clash {
                None => break,
                Some(ev) => {
                    if let Some((a, b)) = ev.vmerge {
                        uf.union(a, b);
                    }
                    self.alive[ev.dropped] = false;
                    self.events.push(ev);
                }
            }
        }
    }

    fn uf_at(&self, event_count: usize) -> UnionFind {
        let mut uf = UnionFind::new(self.vertex_count);
        for ev in &self.events[..event_count] {
            if let Some((a, b)) = ev.vmerge {
                uf.union(a, b);
            }
        }
        uf
    }

    fn ends(&self, e: usize, dir: i8) -> (usize, usize) {
        let edge = self.edges[e];
        if dir > 0 {
            (edge.src, edge.dst)
        } else {
            (edge.dst, edge.src)
        }
    }

    pub fn member(&self, w: &Word) -> bool {
        self.trace_final(w).is_some()
    }

    fn trace_final(&self, w: &Word) -> Option<Vec<(usize, i8)>> {
        let mut uf = self.uf_at(self.events.len());
        let mut out: BTreeMap<(usize, u32), usize> = BTreeMap::new();
        let mut inc: BTreeMap<(usize, u32), usize> = BTreeMap::new();
        for i in 0..self.edges.len() {
            if self.alive[i] {
                out.insert((uf.find(self.edges[i].src), self.edges[i].label), i);
                inc.insert((uf.find(self.edges[i].dst), self.edges[i].label), i);
            }
        }
        let mut cur = uf.find(self.base);
        let mut path = Vec::new();
        for l in w.letters() {
            let (e, dir) = if l.sign() > 0 {
                (*out.get(&(cur, l.index()))?, 1i8)
            } else {
                (*inc.get(&(cur, l.index()))?, -1i8)
            };
            path.push((e, dir));
            let (_, t) = self.ends(e, dir);
            cur = uf.find(t);
        }
        (cur == uf.find(self.base)).then_some(path)
    }

    /// Expresses `w` as a product of the generators: a sequence of
    /// (generator index, ±1), or `None` if `w` is not in the subgroup.
    pub fn express(&self, w: &Word) -> Option<Vec<(usize, i8)>> {
        let mut path = self.trace_final(w)?;
        // undo fold events in reverse, repairing the path with detours
        for k in (0..self.events.len()).rev() {
            let ev = self.events[k];
            let Some((p, q)) = ev.vmerge else { continue };
            let mut uf = self.uf_at(k);
            let pc = uf.find(p);
            let qc = uf.find(q);
            // detour endpoints in state k: classes of the two merged vertices
            let (det_from, detour): (usize, [(usize, i8); 2]) = if ev.source_type {
                // kept: a->b1, dropped: a->b2; detour b1 -> a -> b2
                (
                    uf.find(self.edges[ev.kept].dst),
                    [(ev.kept, -1), (ev.dropped, 1)],
                )
            } else {
                // kept: s1->c, dropped: s2->c; detour s1 -> c -> s2
                (
                    uf.find(self.edges[ev.kept].src),
                    [(ev.kept, 1), (ev.dropped, -1)],
                )
            };
            let base_class = uf.find(self.base);
            let mut repaired: Vec<(usize, i8)> = Vec::new();
            let mut cur = base_class;
            let push_detour = |repaired: &mut Vec<(usize, i8)>, cur: &mut usize, to: usize| {
                debug_assert!((*cur == pc && to == qc) || (*cur == qc && to == pc));
                if *cur == det_from {
                    repaired.extend_from_slice(&detour);
                } else {
                    repaired.push((detour[1].0, -detour[1].1));
                    repaired.push((detour[0].0, -detour[0].1));
                }
                *cur = to;
            };
            for &(e, dir) in &path {
                let (s, t) = self.ends(e, dir);
                let (sc, tc) = (uf.find(s), uf.find(t));
                if sc != cur {
                    push_detour(&mut repaired, &mut cur, sc);
                }
                repaired.push((e, dir));
                cur = tc;
            }
            if cur != base_class {
                push_detour(&mut repaired, &mut cur, base_class);
            }
            path = repaired;
        }
        // read symbols off the original wedge path
        let mut expr: Vec<(usize, i8)> = Vec::new();
        for (e, dir) in path {
            if let Some((g, fw)) = self.symbol[e] {
                let sign = dir * fw;
                if expr.last() == Some(&(g, -sign)) {
                    expr.pop();
                } else {
                    expr.push((g, sign));
                }
            }
        }
        // the expression must evaluate back to w
        let mut check = Word::identity();
        for &(g, s) in &expr {
            check = if s > 0 {
                check.concat(&self.gens[g])
            } else {
                check.concat(&self.gens[g].inverse())
            };
        }
        assert_eq!(&check, w, "expression must re-evaluate to the input");
        Some(expr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_word;

    fn w(s: &str) -> Word {
        parse_word(s).unwrap()
    }

    fn ws(list: &[&str]) -> Vec<Word> {
        list.iter().map(|s| w(s)).collect()
    }

    #[test]
    fn wedge_shapes() {
        let g = graph_from_words(2, &ws(&["a"]), true);
        assert_eq!((g.vertex_count(), g.edges().len()), (1, 1));
        let g = graph_from_words(2, &ws(&["ab"]), true);
        assert_eq!((g.vertex_count(), g.edges().len()), (2, 2));
        let g = graph_from_words(2, &[], true);
        assert_eq!((g.vertex_count(), g.edges().len()), (1, 0));
    }

    #[test]
    fn fold_basic() {
        // wedge of two a-loops -> one a-loop
        let g = graph_from_words(1, &ws(&["a", "a"]), true);
        let (f, m) = fold(&g);
        assert_eq!((f.vertex_count(), f.edges().len()), (1, 1));
        assert_eq!(m.edge_map[0], m.edge_map[1]);
        // <a^2, a^3> = <a>
        let g = graph_from_words(1, &ws(&["aa", "aaa"]), true);
        let (f, _) = fold(&g);
        let f = pointed_core(&f).unwrap();
        assert_eq!((f.vertex_count(), f.edges().len()), (1, 1));
        // already folded: identity morphism
        let g = subgroup_graph(2, &ws(&["ab"]));
        let (f, m) = fold(&g);
        assert_eq!(f, g);
        assert!(m.vertex_map.iter().enumerate().all(|(i, &v)| i == v));
    }

    #[test]
    fn fold_confluent_on_small_cases() {
        for (i, gens) in [
            vec!["aa", "aaa"],
            vec!["ab", "ba", "aabb"],
            vec!["abA", "b"],
            vec!["abc", "cb", "ac"],
        ]
        .iter()
        .enumerate()
        {
            let rank = 3;
            let g = graph_from_words(rank, &ws(gens), true);
            let (f, _) = fold(&g);
            for seed in 0..5u64 {
                let alt = fold_shuffled(&g, seed.wrapping_add(i as u64 * 97));
                assert!(is_isomorphic_based(&f, &alt));
            }
        }
    }

    #[test]
    fn core_prunes_hanging_trees() {
        // a-loop with a hanging edge
        let g = StallingsGraph::new(
            2,
            vec![
                Edge {
                    src: 0,
                    dst: 0,
                    label: 1,
                },
                Edge {
                    src: 0,
                    dst: 1,
                    label: 2,
                },
            ],
            Some(1),
            2,
        )
        .unwrap();
        let c = core(&g);
        assert_eq!((c.vertex_count(), c.edges().len()), (1, 1));
        // a finite tree has empty core, basepoint-only pointed core
        let t = StallingsGraph::new(
            3,
            vec![
                Edge {
                    src: 0,
                    dst: 1,
                    label: 1,
                },
                Edge {
                    src: 1,
                    dst: 2,
                    label: 2,
                },
            ],
            Some(0),
            2,
        )
        .unwrap();
        assert_eq!(core(&t).vertex_count(), 0);
        let pc = pointed_core(&t).unwrap();
        assert_eq!((pc.vertex_count(), pc.edges().len()), (1, 0));
    }

    #[test]
    fn pointed_core_keeps_stem() {
        // Γ(<bab⁻¹>): b-edge to an a-loop; pointed core = whole graph,
        // unpointed core = a-loop only.
        let g = subgroup_graph(2, &ws(&["baB"]));
        assert_eq!((g.vertex_count(), g.edges().len()), (2, 2));
        assert!(g.is_pointed_core());
        let c = core(&g);
        assert_eq!((c.vertex_count(), c.edges().len()), (1, 1));
    }

    #[test]
    fn subgroup_graph_shapes() {
        let g = subgroup_graph(2, &ws(&["aa"]));
        assert_eq!((g.vertex_count(), g.edges().len()), (2, 2));
        let g = subgroup_graph(2, &ws(&["a", "b"]));
        assert_eq!((g.vertex_count(), g.edges().len()), (1, 2));
        let g = subgroup_graph(2, &ws(&["abA"]));
        assert_eq!((g.vertex_count(), g.edges().len()), (2, 2));
    }

    #[test]
    fn membership_examples() {
        let a2 = subgroup_graph(2, &ws(&["aa"]));
        assert!(!membership(&a2, &w("a")));
        assert!(membership(&a2, &w("aaaa")));
        let ab = subgroup_graph(2, &ws(&["ab"]));
        assert!(membership(&ab, &w("abab")));
        assert!(!membership(&ab, &w("ba")));
    }

    #[test]
    fn membership_brute_force_oracle() {
        // all products of <= 4 factors from S ∪ S⁻¹ are members
        let cases: Vec<Vec<&str>> = vec![vec!["aa", "b"], vec!["ab", "ba"], vec!["abA"]];
        for gens in cases {
            let gens = ws(&gens);
            let graph = subgroup_graph(2, &gens);
            let mut pool: Vec<Word> = vec![Word::identity()];
            for _ in 0..4 {
                let mut next = Vec::new();
                for p in &pool {
                    for g in &gens {
                        next.push(p.concat(g));
                        next.push(p.concat(&g.inverse()));
                    }
                }
                pool.extend(next);
                pool.sort();
                pool.dedup();
            }
            for p in &pool {
                assert!(membership(&graph, p), "missing member {p}");
            }
        }
    }

    #[test]
    fn basis_examples() {
        let g = subgroup_graph(2, &ws(&["a"]));
        assert_eq!(basis(&g).unwrap(), ws(&["a"]));
        let g = subgroup_graph(2, &ws(&["aa", "b"]));
        let mut b = basis(&g).unwrap();
        b.sort();
        let mut expect = ws(&["aa", "b"]);
        expect.sort();
        assert_eq!(b, expect);
        let rose = subgroup_graph(2, &ws(&["a", "b"]));
        assert_eq!(basis(&rose).unwrap(), ws(&["a", "b"]));
    }

    #[test]
    fn basis_round_trip() {
        for gens in [vec!["aab", "ba"], vec!["abab", "bb", "aBa"], vec!["baB"]] {
            let g = subgroup_graph(2, &ws(&gens));
            let b = basis(&g).unwrap();
            let g2 = subgroup_graph(2, &b);
            assert!(is_isomorphic_based(&g, &g2));
        }
    }

    #[test]
    fn pullback_examples() {
        // <a> ∩ <a²> = <a²>
        let g1 = subgroup_graph(2, &ws(&["a"]));
        let g2 = subgroup_graph(2, &ws(&["aa"]));
        let i = intersection(&g1, &g2).unwrap();
        assert!(is_isomorphic_based(&i, &subgroup_graph(2, &ws(&["aa"]))));
        // <a> ∩ <b> trivial, no core components
        let gb = subgroup_graph(2, &ws(&["b"]));
        let pb = pullback(&g1, &gb).unwrap();
        assert!(pb.core_components.is_empty());
        assert_eq!(intersection(&g1, &gb).unwrap().betti(), 0);
    }

    #[test]
    fn pullback_intersection_oracle() {
        // <a²,b> ∩ <a³,b>: agree with brute-force enumeration, length <= 8
        let g1 = subgroup_graph(2, &ws(&["aa", "b"]));
        let g2 = subgroup_graph(2, &ws(&["aaa", "b"]));
        let i = intersection(&g1, &g2).unwrap();
        let mut count = 0usize;
        let mut stack: Vec<Vec<Letter>> = vec![Vec::new()];
        while let Some(cur) = stack.pop() {
            if !cur.is_empty() {
                let word = Word::reduce(cur.iter().copied());
                let joint = membership(&g1, &word) && membership(&g2, &word);
                assert_eq!(membership(&i, &word), joint, "word {word}");
                if joint {
                    count += 1;
                }
            }
            if cur.len() < 8 {
                for idx in 1..=2u32 {
                    for sign in [1i8, -1] {
                        let l = Letter::new(idx, sign);
                        if cur.last().is_some_and(|p| *p == l.inverse()) {
                            continue;
                        }
                        let mut nxt = cur.clone();
                        nxt.push(l);
                        stack.push(nxt);
                    }
                }
            }
        }
        assert!(count > 0, "oracle found common elements");
    }

    #[test]
    fn factorise_examples() {
        let a2 = subgroup_graph(2, &ws(&["aa"]));
        let a = subgroup_graph(2, &ws(&["a"]));
        assert!(factorise(&a2, &a).is_some());
        assert!(factorise(&a, &a2).is_none());
        let ab = subgroup_graph(2, &ws(&["ab"]));
        let rose = subgroup_graph(2, &ws(&["a", "b"]));
        assert!(factorise(&ab, &rose).is_some());
    }

    #[test]
    fn conjugate_into_examples() {
        // H = <bab⁻¹>, K = <a>: f = b (f⁻¹Hf <= K)
        let f = conjugate_into(2, &ws(&["baB"]), &ws(&["a"])).unwrap();
        assert_eq!(f, w("b"));
        assert_eq!(
            conjugate_into(2, &ws(&["a"]), &ws(&["a"])).unwrap(),
            Word::identity()
        );
        // H = <ab>, K = <ba>: (ab)^a = ba
        let f = conjugate_into(2, &ws(&["ab"]), &ws(&["ba"])).unwrap();
        assert_eq!(w("ab").conjugate(&f), w("ba"));
        // trivial H succeeds with identity
        assert_eq!(
            conjugate_into(2, &[], &ws(&["a"])).unwrap(),
            Word::identity()
        );
        // failure case
        assert!(conjugate_into(2, &ws(&["a"]), &ws(&["bb"])).is_none());
    }

    #[test]
    fn induced_ffs_examples() {
        // H = <a², b>, factors = {<a>} -> {<a²>}
        let out = induced_free_factor_system(2, &ws(&["aa", "b"]), &[vec![1]]).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].basis, ws(&["aa"]));
        // H = <b>, factors = {<a>} -> empty
        let out = induced_free_factor_system(2, &ws(&["b"]), &[vec![1]]).unwrap();
        assert!(out.is_empty());
        // H = F2, factors = {<a>} -> {<a>}
        let out = induced_free_factor_system(2, &ws(&["a", "b"]), &[vec![1]]).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].basis, ws(&["a"]));
        // overlap rejected
        assert!(induced_free_factor_system(2, &ws(&["a"]), &[vec![1], vec![1]]).is_err());
    }

    #[test]
    fn ffs_self_pullback_is_diagonal() {
        // a free factor pulled back against itself has one core component
        for letters in [vec![1u32], vec![1, 2]] {
            let rose = StallingsGraph::new(
                1,
                letters
                    .iter()
                    .map(|&l| Edge {
                        src: 0,
                        dst: 0,
                        label: l,
                    })
                    .collect(),
                Some(0),
                3,
            )
            .unwrap();
            let pb = pullback(&rose, &rose).unwrap();
            assert_eq!(pb.core_components.len(), 1);
            assert!(pb.core_components[0].based);
        }
    }

    #[test]
    fn reduced_rank_examples() {
        assert_eq!(reduced_rank(2, &[]), 0);
        assert_eq!(reduced_rank(2, &ws(&["a"])), 0);
        assert_eq!(reduced_rank(2, &ws(&["a", "b", "aBa"])), 1);
    }

    #[test]
    fn express_round_trip() {
        let gens = ws(&["aa", "bab"]);
        let ctx = ExpressContext::new(2, &gens);
        let mut rng = SplitMix::new(42);
        for _ in 0..200 {
            let n = rng.below(6);
            let mut word = Word::identity();
            for _ in 0..n {
                let g = &gens[rng.below(gens.len())];
                word = if rng.next().is_multiple_of(2) {
                    word.concat(g)
                } else {
                    word.concat(&g.inverse())
                };
            }
            let expr = ctx.express(&word).expect("member");
            let mut back = Word::identity();
            for (g, s) in expr {
                back = if s > 0 {
                    back.concat(&gens[g])
                } else {
                    back.concat(&gens[g].inverse())
                };
            }
            assert_eq!(back, word);
        }
        assert!(ctx.express(&w("a")).is_none());
        assert!(ctx.express(&w("b")).is_none());
        assert_eq!(ctx.express(&Word::identity()), Some(vec![]));
    }

    #[test]
    fn express_agrees_with_membership() {
        let cases = [vec!["ab", "ba"], vec!["aa", "b"], vec!["abA", "bb"]];
        let mut rng = SplitMix::new(7);
        for gens in cases {
            let gens = ws(&gens);
            let ctx = ExpressContext::new(2, &gens);
            let graph = subgroup_graph(2, &gens);
            for _ in 0..300 {
                let len = rng.below(9);
                let word = Word::reduce((0..len).map(|_| {
                    Letter::new(
                        rng.below(2) as u32 + 1,
                        if rng.next().is_multiple_of(2) { 1 } else { -1 },
                    )
                }));
                assert_eq!(ctx.express(&word).is_some(), membership(&graph, &word));
            }
        }
    }
}
