//! `mtf`: command-line front end for the mapping-torus toolkit.
//!
//! Outputs JSON on stdout (stable key order, deterministic for identical
//! inputs and caps) or human-readable text with `--pretty`. Exit codes:
//! 0 success, 1 input parse error, 2 precondition violation, 3 cap exceeded.

use clap::{Parser, Subcommand};
use mtf_core::error::Error as CoreError;
use mtf_core::graph_pair::{self, GraphPair};
use mtf_core::mapping_torus::{
    self, normalize, subgroup_presentation, FactorSpec, GradedLetter, GradedWord, MTElement,
    MappingTorus, Presentation, ScanOutcome,
};
use mtf_core::one_relator::{self, OneRelatorClass, PiRankOptions};
use mtf_core::stallings::{self, StallingsGraph};
use mtf_core::text;
use mtf_core::words::{Endomorphism, Word};
use serde_json::{json, Value};
use std::collections::BTreeSet;
use std::path::Path;

#[derive(Parser)]
#[command(
    name = "mtf",
    version,
    about = "Stallings graphs, graph pairs, and mapping tori of free groups"
)]
struct Cli {
    /// Human-readable output instead of JSON
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fold a graph (from a file or a subgroup literal)
    Fold {
        #[arg(long)]
        graph: Option<String>,
        /// Inline subgroup literal `name:w1,w2,...` to fold the wedge of
        #[arg(long)]
        subgroup: Option<String>,
        #[arg(long, default_value_t = 2)]
        rank: u32,
        /// Write DOT to this path
        #[arg(long)]
        dot: Option<String>,
    },
    /// Core or pointed core of a graph
    Core {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        pointed: bool,
        #[arg(long)]
        dot: Option<String>,
    },
    /// Free basis of a subgroup
    Basis {
        #[arg(long)]
        subgroup: String,
        #[arg(long, default_value_t = 2)]
        rank: u32,
    },
    /// Membership of a word in a subgroup
    Member {
        #[arg(long)]
        subgroup: String,
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 2)]
        rank: u32,
    },
    /// Pullback intersection and double cosets of two subgroups
    Intersect {
        #[arg(long)]
        g1: String,
        #[arg(long)]
        g2: String,
        #[arg(long, default_value_t = 2)]
        rank: u32,
        #[arg(long)]
        dot: Option<String>,
    },
    /// Find f with H^f <= K, if any
    ConjInto {
        #[arg(long)]
        h: String,
        #[arg(long)]
        k: String,
        #[arg(long, default_value_t = 2)]
        rank: u32,
    },
    /// Induced free factor system of H from disjoint letter subsets
    Ffs {
        #[arg(long)]
        h: String,
        /// Semicolon-separated letter subsets, e.g. `a;b,c`
        #[arg(long)]
        factors: String,
        #[arg(long, default_value_t = 2)]
        rank: u32,
    },
    /// Tighten a graph pair under an endomorphism
    Tighten {
        #[arg(long)]
        pair: String,
        #[arg(long)]
        psi: String,
        #[arg(long)]
        trace: Option<String>,
        #[arg(long)]
        dot: Option<String>,
    },
    /// Minimize a graph pair: tighten plus theta-descent to a certified level
    Minimize {
        #[arg(long)]
        pair: String,
        #[arg(long)]
        psi: String,
        #[arg(long, default_value_t = 10)]
        n_cap: u32,
        #[arg(long)]
        trace: Option<String>,
    },
    /// Finite presentation of a subgroup of M(psi)
    Present {
        #[arg(long)]
        psi: String,
        /// Comma-separated mapping-torus words, e.g. `a,t`
        #[arg(long)]
        gens: String,
        #[arg(long, default_value_t = 10)]
        n_cap: u32,
    },
    /// Euler characteristic of a subgroup of M(psi)
    Euler {
        #[arg(long)]
        psi: String,
        #[arg(long)]
        gens: String,
        #[arg(long, default_value_t = 10)]
        n_cap: u32,
    },
    /// Canonical form t^a w t^-b of a mapping-torus word
    Normalize {
        #[arg(long)]
        psi: String,
        #[arg(long)]
        word: String,
    },
    /// Detect a sub-mapping-torus certificate for <H, t^k f>
    Submt {
        #[arg(long)]
        psi: String,
        /// Comma-separated generators of H <= F
        #[arg(long)]
        h_gens: String,
        #[arg(long, default_value_t = 8)]
        k_max: u32,
    },
    /// HNN decomposition over the graded alphabet
    Hnn {
        #[arg(long)]
        a_rank: u32,
        #[arg(long)]
        c_rank: u32,
        /// Semicolon-separated graded words, one per A-generator, tokens
        /// `a1`, `c0_1`, inverses with a trailing apostrophe
        #[arg(long)]
        images: String,
        #[arg(long, default_value_t = 16)]
        m_cap: u32,
    },
    /// Peripheral sub-mapping tori from a user decomposition
    Peripherals {
        #[arg(long)]
        psi: String,
        /// Semicolon-separated letter subsets, e.g. `a;b`
        #[arg(long)]
        factors: String,
        /// Semicolon-separated conjugators, one per factor (default all 1)
        #[arg(long)]
        conjugators: Option<String>,
        /// Semicolon-separated f_i elements (default all 1)
        #[arg(long)]
        f_list: Option<String>,
    },
    /// Bounded scan for an invariant proper free factor
    IrrScan {
        #[arg(long)]
        psi: String,
        #[arg(long, default_value_t = 6)]
        len_cap: u32,
        #[arg(long, default_value_t = 6)]
        m_max: u32,
    },
    /// Primitivity rank pi(w) with witnesses
    Pirank {
        word: String,
        #[arg(long, default_value_t = 2)]
        rank: u32,
        #[arg(long, default_value_t = 16)]
        max_len: u32,
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
    },
    /// One-relator classification by pi(w) != 2
    Classify {
        word: String,
        #[arg(long, default_value_t = 2)]
        rank: u32,
        #[arg(long, default_value_t = 16)]
        max_len: u32,
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        let code = match &e {
            CoreError::Parse(_) => 1,
            CoreError::CapExceeded(_) => 3,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: 1,
            message: e.to_string(),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(&cli.command, cli.pretty) {
        Ok(output) => {
            println!("{output}");
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            std::process::exit(f.code);
        }
    }
}

/// Reads an argument either from a file (when the value names one) or
/// inline, with `;` standing for newlines.
fn file_or_inline(spec: &str) -> Result<String, Failure> {
    if Path::new(spec).is_file() {
        Ok(std::fs::read_to_string(spec)?)
    } else {
        Ok(spec.replace(';', "\n"))
    }
}

fn parse_psi(spec: &str) -> Result<Endomorphism, Failure> {
    Ok(text::parse_endomorphism(&file_or_inline(spec)?)?)
}

fn parse_graph_arg(spec: &str) -> Result<StallingsGraph, Failure> {
    Ok(text::parse_graph(&file_or_inline(spec)?)?)
}

fn parse_pair_arg(spec: &str) -> Result<GraphPair, Failure> {
    Ok(text::parse_pair(&file_or_inline(spec)?)?)
}

fn subgroup_arg(spec: &str, rank: u32) -> Result<(String, Vec<Word>, StallingsGraph), Failure> {
    let (name, gens) = text::parse_subgroup_literal(spec)?;
    for g in &gens {
        if g.max_index() > rank {
            return Err(CoreError::AlphabetMismatch {
                index: g.max_index(),
                rank,
            }
            .into());
        }
    }
    let graph = stallings::subgroup_graph(rank, &gens);
    Ok((name, gens, graph))
}

fn words_arg(spec: &str) -> Result<Vec<Word>, Failure> {
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| text::parse_word(s).map_err(Failure::from))
        .collect()
}

fn mt_words_arg(spec: &str, m: &MappingTorus) -> Result<Vec<MTElement>, Failure> {
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let raw = text::parse_mt_word(s)?;
            normalize(&raw, m)
        })
        .map(|r| r.map_err(Failure::from))
        .collect()
}

fn graph_json(g: &StallingsGraph) -> Value {
    json!({
        "vertices": g.vertex_count(),
        "basepoint": g.basepoint(),
        "rank": g.ambient_rank(),
        "edges": g.edges().iter().map(|e| {
            json!([e.src, text::render_word(&Word::reduce([mtf_core::words::Letter::positive(e.label)])), e.dst])
        }).collect::<Vec<_>>(),
        "text": text::render_graph(g),
    })
}

fn write_dot(
    path: &Option<String>,
    g: &StallingsGraph,
    x: Option<&BTreeSet<usize>>,
) -> Result<(), Failure> {
    if let Some(path) = path {
        std::fs::write(path, text::export_dot(g, x))?;
    }
    Ok(())
}

fn render_words(words: &[Word]) -> Vec<String> {
    words.iter().map(text::render_word).collect()
}

fn graded_token(l: &GradedLetter, sign: i8) -> String {
    let base = match l {
        GradedLetter::A(i) => format!("a{i}"),
        GradedLetter::C { grade, index } => format!("c{grade}_{index}"),
    };
    if sign < 0 {
        format!("{base}'")
    } else {
        base
    }
}

fn graded_word_string(w: &GradedWord) -> String {
    if w.is_empty() {
        return "1".into();
    }
    w.iter()
        .map(|(l, s)| graded_token(l, *s))
        .collect::<Vec<_>>()
        .join(".")
}

fn parse_graded_word(s: &str) -> Result<GradedWord, Failure> {
    let s = s.trim();
    if s.is_empty() || s == "1" {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for tok in s.split(['.', ' ']).map(str::trim).filter(|t| !t.is_empty()) {
        let (body, sign) = match tok.strip_suffix('\'') {
            Some(b) => (b, -1i8),
            None => (tok, 1i8),
        };
        let bad = || Failure {
            code: 1,
            message: format!("bad graded token {tok:?}; expected a<k> or c<i>_<j>"),
        };
        let letter = if let Some(rest) = body.strip_prefix('a') {
            GradedLetter::A(rest.parse().map_err(|_| bad())?)
        } else if let Some(rest) = body.strip_prefix('c') {
            let (grade, index) = rest.split_once('_').ok_or_else(bad)?;
            GradedLetter::C {
                grade: grade.parse().map_err(|_| bad())?,
                index: index.parse().map_err(|_| bad())?,
            }
        } else {
            return Err(bad());
        };
        out.push((letter, sign));
    }
    Ok(out)
}

fn letter_subsets(spec: &str) -> Result<Vec<Vec<u32>>, Failure> {
    spec.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|part| {
            part.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|tok| {
                    let w = text::parse_word(tok)?;
                    if w.len() != 1 || w.letters()[0].sign() != 1 {
                        return Err(CoreError::Parse(format!(
                            "factor entries must be single letters, got {tok:?}"
                        )));
                    }
                    Ok(w.letters()[0].index())
                })
                .collect::<Result<Vec<u32>, CoreError>>()
                .map_err(Failure::from)
        })
        .collect()
}

fn presentation_json(p: &mapping_torus::MappingTorusPresentation) -> Value {
    json!({
        "kind": "mapping_torus",
        "generators": render_words(&p.z_basis),
        "stable": "t",
        "x_basis": render_words(&p.x_basis),
        "relations": p.relations.iter().map(|r| {
            let x = text::render_word(&p.z_basis[r.x]);
            json!({
                "lhs": format!("T{}t", if x == "1" { String::new() } else { x.clone() }),
                "x": x,
                "rhs": text::render_word(&r.rhs_word),
                "rhs_in_basis": r.rhs.iter().map(|&(i, s)| json!([i + 1, s])).collect::<Vec<_>>(),
            })
        }).collect::<Vec<_>>(),
        "psi_prime": p.psi_prime.images().iter().map(text::render_word).collect::<Vec<_>>(),
        "power_m": p.power_m,
        "stable_h": text::render_word(&p.stable_h),
        "relative_rank": p.relative_rank,
        "chi": p.chi,
        "certificate_level": p.certificate_level,
    })
}

fn presentation_pretty(p: &mapping_torus::MappingTorusPresentation) -> String {
    let gens = render_words(&p.z_basis).join(", ");
    let rels = p
        .relations
        .iter()
        .map(|r| {
            format!(
                "t^-1 {} t = {}",
                text::render_word(&p.z_basis[r.x]),
                text::render_word(&r.rhs_word)
            )
        })
        .collect::<Vec<_>>()
        .join(", ");
    format!(
        "<{gens}, t | {rels}>\nchi = {}, rr = {}, certificate level = {}",
        p.chi, p.relative_rank, p.certificate_level,
    )
}

fn run(cmd: &Command, pretty: bool) -> Result<String, Failure> {
    let value: Value = match cmd {
        Command::Fold {
            graph,
            subgroup,
            rank,
            dot,
        } => {
            let g = match (graph, subgroup) {
                (Some(spec), None) => parse_graph_arg(spec)?,
                (None, Some(spec)) => {
                    let (_, gens) = text::parse_subgroup_literal(spec)?;
                    stallings::graph_from_words(*rank, &gens, true)
                }
                _ => {
                    return Err(Failure {
                        code: 1,
                        message: "fold needs exactly one of --graph or --subgroup".into(),
                    })
                }
            };
            let (folded, _) = stallings::fold(&g);
            write_dot(dot, &folded, None)?;
            if pretty {
                return Ok(text::render_graph(&folded));
            }
            json!({ "graph": graph_json(&folded) })
        }
        Command::Core {
            graph,
            pointed,
            dot,
        } => {
            let g = parse_graph_arg(graph)?;
            let c = if *pointed {
                stallings::pointed_core(&g)?
            } else {
                stallings::core(&g)
            };
            write_dot(dot, &c, None)?;
            if pretty {
                return Ok(text::render_graph(&c));
            }
            json!({ "graph": graph_json(&c) })
        }
        Command::Basis { subgroup, rank } => {
            let (name, _, graph) = subgroup_arg(subgroup, *rank)?;
            let basis = stallings::basis(&graph)?;
            if pretty {
                return Ok(format!(
                    "{name} has free basis {{{}}}",
                    render_words(&basis).join(", ")
                ));
            }
            json!({ "name": name, "rank": basis.len(), "basis": render_words(&basis) })
        }
        Command::Member {
            subgroup,
            word,
            rank,
        } => {
            let (_, _, graph) = subgroup_arg(subgroup, *rank)?;
            let w = text::parse_word(word)?;
            let member = stallings::membership(&graph, &w);
            if pretty {
                return Ok(format!("{member}"));
            }
            json!({ "member": member })
        }
        Command::Intersect { g1, g2, rank, dot } => {
            let (_, _, ga) = subgroup_arg(g1, *rank)?;
            let (_, _, gb) = subgroup_arg(g2, *rank)?;
            let pb = stallings::pullback(&ga, &gb)?;
            let inter = stallings::intersection(&ga, &gb)?;
            write_dot(dot, &inter, None)?;
            let basis = stallings::basis(&inter)?;
            if pretty {
                return Ok(format!(
                    "intersection basis {{{}}}; {} double coset(s) with nontrivial intersection",
                    render_words(&basis).join(", "),
                    pb.core_components.len(),
                ));
            }
            json!({
                "intersection_basis": render_words(&basis),
                "components": pb.core_components.iter().map(|c| json!({
                    "betti": c.betti,
                    "rep": c.rep.as_ref().map(text::render_word),
                    "based": c.based,
                })).collect::<Vec<_>>(),
            })
        }
        Command::ConjInto { h, k, rank } => {
            let (_, h_gens, _) = subgroup_arg(h, *rank)?;
            let (_, k_gens, _) = subgroup_arg(k, *rank)?;
            let found = stallings::conjugate_into(*rank, &h_gens, &k_gens);
            if pretty {
                return Ok(match &found {
                    Some(f) => format!("H^f <= K with f = {}", text::render_word(f)),
                    None => "no conjugate of H lies in K".into(),
                });
            }
            json!({
                "found": found.is_some(),
                "conjugator": found.as_ref().map(text::render_word),
            })
        }
        Command::Ffs { h, factors, rank } => {
            let (_, h_gens, _) = subgroup_arg(h, *rank)?;
            let subsets = letter_subsets(factors)?;
            let out = stallings::induced_free_factor_system(*rank, &h_gens, &subsets)?;
            if pretty {
                return Ok(out
                    .iter()
                    .map(|f| {
                        format!(
                            "factor {}: <{}> at coset rep {}",
                            f.factor_index + 1,
                            render_words(&f.basis).join(", "),
                            text::render_word(&f.rep),
                        )
                    })
                    .collect::<Vec<_>>()
                    .join("\n"));
            }
            json!({
                "factors": out.iter().map(|f| json!({
                    "factor_index": f.factor_index,
                    "basis": render_words(&f.basis),
                    "rep": text::render_word(&f.rep),
                })).collect::<Vec<_>>(),
            })
        }
        Command::Tighten {
            pair,
            psi,
            trace,
            dot,
        } => {
            let p = parse_pair_arg(pair)?;
            let psi = parse_psi(psi)?;
            let (tight, tr) = graph_pair::tighten(&p, &psi)?;
            if let Some(path) = trace {
                std::fs::write(path, serde_json::to_string_pretty(&tr).unwrap())?;
            }
            write_dot(dot, tight.z(), Some(tight.x_edges()))?;
            if pretty {
                return Ok(text::render_pair(&tight));
            }
            json!({
                "pair": text::render_pair(&tight),
                "graph": graph_json(tight.z()),
                "x_edges": tight.x_edges().iter().collect::<Vec<_>>(),
                "steps": tr.steps.len(),
                "relative_rank": tight.relative_rank(),
            })
        }
        Command::Minimize {
            pair,
            psi,
            n_cap,
            trace,
        } => {
            let p = parse_pair_arg(pair)?;
            let psi = parse_psi(psi)?;
            let min = graph_pair::minimize(&p, &psi, *n_cap)?;
            if let Some(path) = trace {
                std::fs::write(path, serde_json::to_string_pretty(&min.trace).unwrap())?;
            }
            if pretty {
                return Ok(format!(
                    "{}relative rank {}, certified to level {}",
                    text::render_pair(&min.pair),
                    min.pair.relative_rank(),
                    min.certificate_level,
                ));
            }
            json!({
                "pair": text::render_pair(&min.pair),
                "complement_basis": render_words(&min.complement.basis_words),
                "relative_rank": min.pair.relative_rank(),
                "certificate_level": min.certificate_level,
                "descents": min.trace.descents.iter().map(|d| json!({
                    "failed_level": d.failed_level,
                    "rr_before": d.rr_before,
                    "rr_after": d.rr_after,
                })).collect::<Vec<_>>(),
            })
        }
        Command::Present { psi, gens, n_cap } => {
            let m = MappingTorus::new(parse_psi(psi)?)?;
            let gens = mt_words_arg(gens, &m)?;
            match subgroup_presentation(&gens, &m, *n_cap)? {
                Presentation::Free { basis } => {
                    let rendered: Vec<String> = basis.iter().map(|e| e.to_string()).collect();
                    if pretty {
                        return Ok(format!(
                            "free of rank {}: {{{}}}",
                            rendered.len(),
                            rendered.join(", ")
                        ));
                    }
                    json!({
                        "kind": "free",
                        "basis": rendered,
                        "rank": basis.len(),
                        "chi": 1 - basis.len() as i64,
                    })
                }
                Presentation::MappingTorus(p) => {
                    if pretty {
                        return Ok(presentation_pretty(&p));
                    }
                    presentation_json(&p)
                }
            }
        }
        Command::Euler { psi, gens, n_cap } => {
            let m = MappingTorus::new(parse_psi(psi)?)?;
            let gens = mt_words_arg(gens, &m)?;
            let chi = mapping_torus::euler_characteristic(&gens, &m, *n_cap)?;
            if pretty {
                return Ok(format!("chi = {chi}"));
            }
            json!({ "chi": chi })
        }
        Command::Normalize { psi, word } => {
            let m = MappingTorus::new(parse_psi(psi)?)?;
            let raw = text::parse_mt_word(word)?;
            let e = normalize(&raw, &m)?;
            if pretty {
                return Ok(e.to_string());
            }
            json!({
                "a": e.a,
                "w": text::render_word(&e.w),
                "b": e.b,
                "canonical": e.to_string(),
            })
        }
        Command::Submt { psi, h_gens, k_max } => {
            let m = MappingTorus::new(parse_psi(psi)?)?;
            let gens = words_arg(h_gens)?;
            match mapping_torus::detect_sub_mapping_torus(&gens, &m, *k_max)? {
                Some(cert) => {
                    let element = cert.element(&m)?;
                    if pretty {
                        return Ok(format!(
                            "sub-mapping torus <H, {element}> with k = {}, f = {}",
                            cert.k,
                            text::render_word(&cert.f),
                        ));
                    }
                    json!({
                        "found": true,
                        "k": cert.k,
                        "f": text::render_word(&cert.f),
                        "h_basis": render_words(&cert.h_basis),
                        "phi_images": render_words(&cert.phi_images),
                        "element": element.to_string(),
                        "chi": 0,
                    })
                }
                None => {
                    if pretty {
                        return Ok(format!("not found for k <= {k_max}"));
                    }
                    json!({ "found": false, "k_max": k_max })
                }
            }
        }
        Command::Hnn {
            a_rank,
            c_rank,
            images,
            m_cap,
        } => {
            let images: Vec<GradedWord> = images
                .split(';')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(parse_graded_word)
                .collect::<Result<_, _>>()?;
            let d = mapping_torus::hnn_decomposition(*a_rank, *c_rank, &images, *m_cap)?;
            if pretty {
                return Ok(format!(
                    "m = {}\nF = <{}>\nL = <{}>\nU = <{}>",
                    d.m,
                    d.f_basis
                        .iter()
                        .map(|l| graded_token(l, 1))
                        .collect::<Vec<_>>()
                        .join(", "),
                    d.l_basis
                        .iter()
                        .map(|l| graded_token(l, 1))
                        .collect::<Vec<_>>()
                        .join(", "),
                    d.u_basis
                        .iter()
                        .map(graded_word_string)
                        .collect::<Vec<_>>()
                        .join(", "),
                ));
            }
            json!({
                "m": d.m,
                "f_basis": d.f_basis.iter().map(|l| graded_token(l, 1)).collect::<Vec<_>>(),
                "l_basis": d.l_basis.iter().map(|l| graded_token(l, 1)).collect::<Vec<_>>(),
                "u_basis": d.u_basis.iter().map(graded_word_string).collect::<Vec<_>>(),
                "phi": d.l_basis.iter().zip(&d.phi_images).map(|(l, img)| json!({
                    "from": graded_token(l, 1),
                    "to": graded_word_string(img),
                })).collect::<Vec<_>>(),
            })
        }
        Command::Peripherals {
            psi,
            factors,
            conjugators,
            f_list,
        } => {
            let m = MappingTorus::new(parse_psi(psi)?)?;
            let subsets = letter_subsets(factors)?;
            let n = subsets.len();
            let parse_list = |spec: &Option<String>| -> Result<Vec<Word>, Failure> {
                match spec {
                    None => Ok(vec![Word::identity(); n]),
                    Some(s) => s
                        .split(';')
                        .map(str::trim)
                        .map(|t| text::parse_word(t).map_err(Failure::from))
                        .collect(),
                }
            };
            let conjs = parse_list(conjugators)?;
            let fs = parse_list(f_list)?;
            if conjs.len() != n || fs.len() != n {
                return Err(Failure {
                    code: 1,
                    message: "need one conjugator and one f per factor".into(),
                });
            }
            let specs: Vec<FactorSpec> = subsets
                .into_iter()
                .zip(conjs)
                .map(|(letters, conjugator)| FactorSpec {
                    letters,
                    conjugator,
                })
                .collect();
            let orbits = mapping_torus::peripheral_candidates(&m, &specs, &fs)?;
            if pretty {
                return Ok(orbits
                    .iter()
                    .map(|o| {
                        format!(
                            "orbit {:?} (l = {}): h = {}, H = <{}>",
                            o.orbit.iter().map(|i| i + 1).collect::<Vec<_>>(),
                            o.ell,
                            o.h,
                            o.h_i_gens
                                .iter()
                                .map(|e| e.to_string())
                                .collect::<Vec<_>>()
                                .join(", "),
                        )
                    })
                    .collect::<Vec<_>>()
                    .join("\n"));
            }
            json!({
                "orbits": orbits.iter().map(|o| json!({
                    "orbit": o.orbit.iter().map(|i| i + 1).collect::<Vec<_>>(),
                    "ell": o.ell,
                    "h": o.h.to_string(),
                    "h_i_gens": o.h_i_gens.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
                    "certificate": {
                        "k": o.certificate.k,
                        "f": text::render_word(&o.certificate.f),
                        "h_basis": render_words(&o.certificate.h_basis),
                    },
                })).collect::<Vec<_>>(),
            })
        }
        Command::IrrScan {
            psi,
            len_cap,
            m_max,
        } => {
            let m = MappingTorus::new(parse_psi(psi)?)?;
            match mapping_torus::invariant_free_factor_scan(&m, *len_cap, *m_max)? {
                ScanOutcome::Witness(wit) => {
                    if pretty {
                        return Ok(format!(
                            "witness: psi^{}(<{}>) conjugates into itself via {}",
                            wit.m,
                            render_words(&wit.factor).join(", "),
                            text::render_word(&wit.conjugator),
                        ));
                    }
                    json!({
                        "found": true,
                        "factor": render_words(&wit.factor),
                        "m": wit.m,
                        "conjugator": text::render_word(&wit.conjugator),
                    })
                }
                ScanOutcome::NoneFoundWithinCaps {
                    word_len_cap,
                    m_max,
                    verdict,
                } => {
                    if pretty {
                        return Ok(verdict);
                    }
                    json!({
                        "found": false,
                        "word_len_cap": word_len_cap,
                        "m_max": m_max,
                        "verdict": verdict,
                    })
                }
            }
        }
        Command::Pirank {
            word,
            rank,
            max_len,
            budget,
        }
        | Command::Classify {
            word,
            rank,
            max_len,
            budget,
        } => {
            let w = text::parse_word(word)?;
            let opts = PiRankOptions {
                max_len: *max_len,
                budget: *budget,
            };
            let c = one_relator::classify_one_relator_with(&w, *rank, &opts)?;
            let verdict = match c.verdict {
                OneRelatorClass::LqcHyperbolic => "lqc_hyperbolic",
                OneRelatorClass::NotLqc => "not_lqc",
            };
            if pretty {
                let pi = match c.pi.value {
                    Some(v) => v.to_string(),
                    None => "inf".into(),
                };
                return Ok(format!("pi({word}) = {pi}; verdict: {verdict}"));
            }
            json!({
                "pi": match c.pi.value { Some(v) => json!(v), None => json!("inf") },
                "witnesses": c.pi.witnesses.iter().map(|wit| json!({
                    "basis": render_words(&wit.basis),
                    "expression": text::render_word(&wit.expression),
                })).collect::<Vec<_>>(),
                "verdict": verdict,
            })
        }
    };
    Ok(serde_json::to_string_pretty(&value).unwrap())
}
