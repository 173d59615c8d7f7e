//! Text formats: word literals, endomorphism tables, graph and pair files,
//! mapping-torus words with the stable letter, and DOT export.
//!
//! Word literals use `a`..`z` with uppercase for inverses; `1` or the empty
//! string is the identity. Mapping-torus words additionally use `t` and `T`
//! for the stable letter and its inverse, which restricts basis letters to
//! `a`..`s` in that context.

use crate::error::{Error, Result};
use crate::graph_pair::GraphPair;
use crate::mapping_torus::MTLetter;
use crate::stallings::{Edge, StallingsGraph};
use crate::words::{Endomorphism, Letter, Word};
use std::collections::BTreeSet;
use std::fmt::Write as _;

pub fn parse_word(s: &str) -> Result<Word> {
    let s = s.trim();
    if s.is_empty() || s == "1" {
        return Ok(Word::identity());
    }
    let mut letters = Vec::new();
    for c in s.chars() {
        if c.is_whitespace() || c == '·' || c == '.' {
            continue;
        }
        if c.is_ascii_lowercase() {
            letters.push(Letter::new((c as u8 - b'a') as u32 + 1, 1));
        } else if c.is_ascii_uppercase() {
            letters.push(Letter::new((c as u8 - b'A') as u32 + 1, -1));
        } else {
            return Err(Error::Parse(format!("bad letter {c:?} in word {s:?}")));
        }
    }
    Ok(Word::reduce(letters))
}

pub fn render_word(w: &Word) -> String {
    w.to_string()
}

/// Mapping-torus word: basis letters plus `t`/`T` for the stable letter.
pub fn parse_mt_word(s: &str) -> Result<Vec<MTLetter>> {
    let s = s.trim();
    if s.is_empty() || s == "1" {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for c in s.chars() {
        if c.is_whitespace() || c == '·' || c == '.' {
            continue;
        }
        match c {
            't' => out.push(MTLetter::Stable(1)),
            'T' => out.push(MTLetter::Stable(-1)),
            c if c.is_ascii_lowercase() => {
                out.push(MTLetter::Basis(Letter::new((c as u8 - b'a') as u32 + 1, 1)))
            }
            c if c.is_ascii_uppercase() => out.push(MTLetter::Basis(Letter::new(
                (c as u8 - b'A') as u32 + 1,
                -1,
            ))),
            _ => return Err(Error::Parse(format!("bad letter {c:?} in word {s:?}"))),
        }
    }
    Ok(out)
}

pub fn render_mt_word(letters: &[MTLetter]) -> String {
    if letters.is_empty() {
        return "1".into();
    }
    let mut s = String::new();
    for l in letters {
        match l {
            MTLetter::Stable(1) => s.push('t'),
            MTLetter::Stable(_) => s.push('T'),
            MTLetter::Basis(b) => {
                let _ = write!(s, "{b}");
            }
        }
    }
    s
}

/// One line per generator: `a -> ab`. Whitespace-insensitive; rank = number
/// of lines; lines must cover a, b, c, ... in order.
pub fn parse_endomorphism(s: &str) -> Result<Endomorphism> {
    let mut images = Vec::new();
    for (i, line) in s
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
    {
        let (lhs, rhs) = line
            .split_once("->")
            .ok_or_else(|| Error::Parse(format!("expected `x -> image`: {line:?}")))?;
        let lhs_word = parse_word(lhs)?;
        let expect = Word::reduce([Letter::positive(i as u32 + 1)]);
        if lhs_word != expect {
            return Err(Error::Parse(format!(
                "generator lines must be in order; expected {expect}, got {lhs_word}"
            )));
        }
        images.push(parse_word(rhs)?);
    }
    Endomorphism::new(images)
}

pub fn render_endomorphism(psi: &Endomorphism) -> String {
    let mut s = String::new();
    for (i, img) in psi.images().iter().enumerate() {
        let gen = Word::reduce([Letter::positive(i as u32 + 1)]);
        let _ = writeln!(s, "{gen} -> {img}");
    }
    s
}

/// Inline subgroup literal `name:word,word,...`; the name is decorative.
pub fn parse_subgroup_literal(s: &str) -> Result<(String, Vec<Word>)> {
    let (name, words) = s.split_once(':').unwrap_or(("H", s));
    let gens = words
        .split(',')
        .map(str::trim)
        .filter(|w| !w.is_empty())
        .map(parse_word)
        .collect::<Result<Vec<_>>>()?;
    Ok((name.trim().to_string(), gens))
}

/// Header `vertices N basepoint K rank R` then one `u -x-> v` line per edge;
/// `basepoint -` means no basepoint.
pub fn parse_graph(s: &str) -> Result<StallingsGraph> {
    let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty graph".into()))?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() != 6
        || tokens[0] != "vertices"
        || tokens[2] != "basepoint"
        || tokens[4] != "rank"
    {
        return Err(Error::Parse(format!(
            "expected `vertices N basepoint K rank R`, got {header:?}"
        )));
    }
    let vertex_count: usize = tokens[1]
        .parse()
        .map_err(|_| Error::Parse(format!("bad vertex count {:?}", tokens[1])))?;
    let basepoint = if tokens[3] == "-" || tokens[3] == "none" {
        None
    } else {
        Some(
            tokens[3]
                .parse()
                .map_err(|_| Error::Parse(format!("bad basepoint {:?}", tokens[3])))?,
        )
    };
    let rank: u32 = tokens[5]
        .parse()
        .map_err(|_| Error::Parse(format!("bad rank {:?}", tokens[5])))?;
    let mut edges = Vec::new();
    for line in lines {
        if line.starts_with("X:") {
            return Err(Error::Parse("unexpected X line in a graph file".into()));
        }
        edges.push(parse_edge_line(line)?);
    }
    StallingsGraph::new(vertex_count, edges, basepoint, rank)
}

fn parse_edge_line(line: &str) -> Result<Edge> {
    // format: `u -x-> v`
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != 3 || !parts[1].starts_with('-') || !parts[1].ends_with("->") {
        return Err(Error::Parse(format!("expected `u -x-> v`, got {line:?}")));
    }
    let src: usize = parts[0]
        .parse()
        .map_err(|_| Error::Parse(format!("bad vertex {:?}", parts[0])))?;
    let dst: usize = parts[2]
        .parse()
        .map_err(|_| Error::Parse(format!("bad vertex {:?}", parts[2])))?;
    let mid = &parts[1][1..parts[1].len() - 2];
    let label_word = parse_word(mid)?;
    if label_word.len() != 1 || label_word.letters()[0].sign() != 1 {
        return Err(Error::Parse(format!(
            "edge label must be a single letter: {line:?}"
        )));
    }
    Ok(Edge {
        src,
        dst,
        label: label_word.letters()[0].index(),
    })
}

pub fn render_graph(g: &StallingsGraph) -> String {
    let mut s = String::new();
    let bp = match g.basepoint() {
        Some(b) => b.to_string(),
        None => "-".into(),
    };
    let _ = writeln!(
        s,
        "vertices {} basepoint {} rank {}",
        g.vertex_count(),
        bp,
        g.ambient_rank()
    );
    for e in g.edges() {
        let l = Letter::positive(e.label);
        let _ = writeln!(s, "{} -{}-> {}", e.src, l, e.dst);
    }
    s
}

/// Graph format plus a line `X: e0 e3 ...` listing X-edge indices
/// (X-vertices are implied: edge endpoints plus the basepoint).
pub fn parse_pair(s: &str) -> Result<GraphPair> {
    let mut graph_lines = Vec::new();
    let mut x_line = None;
    for line in s.lines().map(str::trim).filter(|l| !l.is_empty()) {
        if let Some(rest) = line.strip_prefix("X:") {
            x_line = Some(rest.trim().to_string());
        } else {
            graph_lines.push(line);
        }
    }
    let g = parse_graph(&graph_lines.join("\n"))?;
    let x_line = x_line.ok_or_else(|| Error::Parse("missing X: line".into()))?;
    let mut x_edges = BTreeSet::new();
    for tok in x_line.split_whitespace() {
        let idx: usize = tok
            .strip_prefix('e')
            .unwrap_or(tok)
            .parse()
            .map_err(|_| Error::Parse(format!("bad X edge {tok:?}")))?;
        if idx >= g.edges().len() {
            return Err(Error::Parse(format!("X edge e{idx} out of range")));
        }
        x_edges.insert(idx);
    }
    let mut x_vertices: BTreeSet<usize> = BTreeSet::new();
    x_vertices.insert(g.basepoint().ok_or(Error::MissingBasepoint)?);
    for &e in &x_edges {
        x_vertices.insert(g.edges()[e].src);
        x_vertices.insert(g.edges()[e].dst);
    }
    GraphPair::new(g, x_vertices, x_edges)
}

pub fn render_pair(p: &GraphPair) -> String {
    let mut s = render_graph(p.z());
    let _ = write!(s, "X:");
    for e in p.x_edges() {
        let _ = write!(s, " e{e}");
    }
    s.push('\n');
    s
}

/// DOT export; for pairs, X-edges carry a bold style.
pub fn export_dot(g: &StallingsGraph, x_edges: Option<&BTreeSet<usize>>) -> String {
    let mut s = String::from("digraph stallings {\n");
    for v in 0..g.vertex_count() {
        if g.basepoint() == Some(v) {
            let _ = writeln!(s, "  v{v} [shape=doublecircle];");
        } else {
            let _ = writeln!(s, "  v{v} [shape=circle];");
        }
    }
    for (i, e) in g.edges().iter().enumerate() {
        let l = Letter::positive(e.label);
        let style = match x_edges {
            Some(set) if set.contains(&i) => ", style=bold, color=blue",
            _ => "",
        };
        let _ = writeln!(s, "  v{} -> v{} [label=\"{}\"{}];", e.src, e.dst, l, style);
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_round_trip() {
        for s in ["a", "abA", "1", "aBCb"] {
            let w = parse_word(s).unwrap();
            assert_eq!(parse_word(&render_word(&w)).unwrap(), w);
        }
        assert_eq!(parse_word("abA").unwrap().to_string(), "abA");
        assert_eq!(parse_word("").unwrap(), Word::identity());
        assert!(parse_word("a9").is_err());
    }

    #[test]
    fn endo_round_trip() {
        let psi = parse_endomorphism("a -> ab\nb -> a").unwrap();
        assert_eq!(psi.rank(), 2);
        assert_eq!(psi.image_of(1), &parse_word("ab").unwrap());
        let again = parse_endomorphism(&render_endomorphism(&psi)).unwrap();
        assert_eq!(psi, again);
        assert!(parse_endomorphism("b -> a").is_err());
    }

    #[test]
    fn graph_round_trip() {
        let g = crate::stallings::subgroup_graph(2, &[parse_word("abA").unwrap()]);
        let text = render_graph(&g);
        let back = parse_graph(&text).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn pair_round_trip() {
        let text = "vertices 2 basepoint 0 rank 2\n0 -a-> 1\n1 -b-> 0\n0 -a-> 0\nX: e0 e1\n";
        let p = parse_pair(text).unwrap();
        assert_eq!(p.x_edges().len(), 2);
        let back = parse_pair(&render_pair(&p)).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn dot_shapes() {
        let g = crate::stallings::subgroup_graph(1, &[parse_word("a").unwrap()]);
        let dot = export_dot(&g, None);
        assert!(dot.contains("digraph"));
        assert!(dot.contains("v0 -> v0 [label=\"a\"]"));
        let empty = StallingsGraph::new(0, vec![], None, 1).unwrap();
        let dot = export_dot(&empty, None);
        assert_eq!(dot, "digraph stallings {\n}\n");
    }

    #[test]
    fn mt_word_round_trip() {
        let raw = parse_mt_word("atTAb").unwrap();
        assert_eq!(render_mt_word(&raw), "atTAb");
        assert_eq!(parse_mt_word("1").unwrap(), vec![]);
    }
}
