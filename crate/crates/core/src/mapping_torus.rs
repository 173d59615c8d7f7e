//! The mapping torus M(ψ) = ⟨𝔽, t | t⁻¹ft = ψ(f)⟩ of an injective
//! endomorphism: element normal forms t^a·w·t^{−b}, finite presentations of
//! finitely generated subgroups, Euler characteristics, sub-mapping-torus
//! certificates, the HNN decomposition over a graded alphabet, peripheral
//! orbits, and a bounded invariant-free-factor scan.

use crate::error::{Error, Result};
use crate::graph_pair::{self, GraphPair};
use crate::one_relator;
use crate::stallings::{self, membership, subgroup_graph, ExpressContext};
use crate::words::{Endomorphism, Letter, Word};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

/// A letter of a mapping-torus word: a basis letter or the stable letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MTLetter {
    /// `Stable(1)` is t, `Stable(-1)` is t⁻¹.
    Stable(i8),
    Basis(Letter),
}

/// Canonical form t^a · w · t^{−b}: a = 0, or b = 0, or w ∉ ψ(𝔽).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MTElement {
    pub a: u32,
    pub w: Word,
    pub b: u32,
}

impl MTElement {
    pub fn identity() -> Self {
        MTElement {
            a: 0,
            w: Word::identity(),
            b: 0,
        }
    }

    pub fn from_word(w: Word) -> Self {
        MTElement { a: 0, w, b: 0 }
    }

    pub fn is_identity(&self) -> bool {
        self.a == 0 && self.b == 0 && self.w.is_identity()
    }

    /// Image under the homomorphism onto ℤ killing 𝔽.
    pub fn t_exponent(&self) -> i64 {
        self.a as i64 - self.b as i64
    }

    /// Raw letter sequence t^a · w · t^{−b}.
    pub fn expand(&self) -> Vec<MTLetter> {
        let mut out = Vec::new();
        out.extend(std::iter::repeat_n(MTLetter::Stable(1), self.a as usize));
        out.extend(self.w.letters().iter().map(|&l| MTLetter::Basis(l)));
        out.extend(std::iter::repeat_n(MTLetter::Stable(-1), self.b as usize));
        out
    }

    pub fn expand_inverse(&self) -> Vec<MTLetter> {
        let mut out = Vec::new();
        out.extend(std::iter::repeat_n(MTLetter::Stable(1), self.b as usize));
        out.extend(
            self.w
                .inverse()
                .letters()
                .iter()
                .map(|&l| MTLetter::Basis(l)),
        );
        out.extend(std::iter::repeat_n(MTLetter::Stable(-1), self.a as usize));
        out
    }
}

impl std::fmt::Display for MTElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", crate::text::render_mt_word(&self.expand()))
    }
}

/// M(ψ) for an injective ψ. Folded image graphs of ψ^k are cached per power.
pub struct MappingTorus {
    psi: Endomorphism,
    image_cache: Mutex<BTreeMap<u32, Arc<ExpressContext>>>,
    power_cache: Mutex<BTreeMap<u32, Arc<Endomorphism>>>,
}

impl Clone for MappingTorus {
    fn clone(&self) -> Self {
        MappingTorus::new(self.psi.clone()).expect("already validated")
    }
}

impl MappingTorus {
    pub fn new(psi: Endomorphism) -> Result<Self> {
        if !psi.is_injective() {
            return Err(Error::NotInjective);
        }
        Ok(MappingTorus {
            psi,
            image_cache: Mutex::new(BTreeMap::new()),
            power_cache: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn psi(&self) -> &Endomorphism {
        &self.psi
    }

    pub fn rank(&self) -> u32 {
        self.psi.rank()
    }

    fn power(&self, k: u32) -> Arc<Endomorphism> {
        let mut cache = self.power_cache.lock().unwrap();
        cache
            .entry(k)
            .or_insert_with(|| Arc::new(self.psi.iterate(k)))
            .clone()
    }

    /// Constructive membership structure for im(ψ^k) = ⟨ψ^k(x₁), …⟩.
    fn image_context(&self, k: u32) -> Arc<ExpressContext> {
        let mut cache = self.image_cache.lock().unwrap();
        cache
            .entry(k)
            .or_insert_with(|| {
                let gens: Vec<Word> = self.power(k).images().to_vec();
                Arc::new(ExpressContext::new(self.rank(), &gens))
            })
            .clone()
    }

    /// If w = ψ(u), returns u; injectivity makes it unique.
    fn psi_preimage(&self, w: &Word) -> Option<Word> {
        let ctx = self.image_context(1);
        let expr = ctx.express(w)?;
        Some(Word::reduce(
            expr.iter().map(|&(i, s)| Letter::new(i as u32 + 1, s)),
        ))
    }
}

/// Rewrites an arbitrary word over 𝔽 ∪ {t^{±1}} into canonical form using
/// f·t = t·ψ(f) and t⁻¹·f = ψ(f)·t⁻¹, then shortens t·ψ(u)·t⁻¹ = u while
/// possible.
pub fn normalize(raw: &[MTLetter], m: &MappingTorus) -> Result<MTElement> {
    let mut a: u32 = 0;
    let mut b: u32 = 0;
    let mut w = Word::identity();
    for l in raw {
        match *l {
            MTLetter::Basis(x) => {
                if x.index() > m.rank() {
                    return Err(Error::AlphabetMismatch {
                        index: x.index(),
                        rank: m.rank(),
                    });
                }
                let letter = Word::reduce([x]);
                if b == 0 {
                    w = w.concat(&letter);
                } else {
                    w = w.concat(&m.power(b).apply(&letter)?);
                }
            }
            MTLetter::Stable(s) if s > 0 => {
                if b > 0 {
                    b -= 1;
                } else {
                    w = m.psi.apply(&w)?;
                    a += 1;
                }
            }
            MTLetter::Stable(_) => {
                b += 1;
            }
        }
    }
    while a > 0 && b > 0 {
        match m.psi_preimage(&w) {
            Some(u) => {
                w = u;
                a -= 1;
                b -= 1;
            }
            None => break,
        }
    }
    Ok(MTElement { a, w, b })
}

/// Equality of canonical forms is componentwise.
pub fn equal(e1: &MTElement, e2: &MTElement, _m: &MappingTorus) -> bool {
    e1 == e2
}

pub fn mt_mul(e1: &MTElement, e2: &MTElement, m: &MappingTorus) -> Result<MTElement> {
    let mut raw = e1.expand();
    raw.extend(e2.expand());
    normalize(&raw, m)
}

pub fn mt_inverse(e: &MTElement, m: &MappingTorus) -> Result<MTElement> {
    normalize(&e.expand_inverse(), m)
}

pub fn mt_pow(e: &MTElement, k: i64, m: &MappingTorus) -> Result<MTElement> {
    let base = if k < 0 { mt_inverse(e, m)? } else { e.clone() };
    let mut out = MTElement::identity();
    for _ in 0..k.unsigned_abs() {
        out = mt_mul(&out, &base, m)?;
    }
    Ok(out)
}

/// `e^{t^n}` = t^{-n} e t^n.
fn mt_conj_t(e: &MTElement, n: u32, m: &MappingTorus) -> Result<MTElement> {
    let mut raw: Vec<MTLetter> = std::iter::repeat_n(MTLetter::Stable(-1), n as usize).collect();
    raw.extend(e.expand());
    raw.extend(std::iter::repeat_n(MTLetter::Stable(1), n as usize));
    normalize(&raw, m)
}

/// One relation t⁻¹·x·t = ψ'(x) of a mapping-torus presentation, with the
/// right-hand side expressed in the Z-basis.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Relation {
    /// Index of x in `z_basis`.
    pub x: usize,
    /// ψ'(x) as a signed product of `z_basis` entries.
    pub rhs: Vec<(usize, i8)>,
    /// ψ'(x) as a word in the ambient free group.
    pub rhs_word: Word,
}

/// ⟨z_basis, t | t⁻¹xt = ψ'(x) ∀x ∈ x_basis⟩ together with the data of the
/// reduction that produced it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MappingTorusPresentation {
    pub z_basis: Vec<Word>,
    pub x_basis: Vec<Word>,
    pub relations: Vec<Relation>,
    /// The replacement monomorphism ψ' = γ_h ∘ ψ^m the presentation is over.
    pub psi_prime: Endomorphism,
    /// t-exponent of the new stable letter inside M(ψ).
    pub power_m: u32,
    /// 𝔽-part h₀ of the generator h₀·t^{−m} whose inverse became the stable
    /// letter; ψ'(f) = h₀·ψ^m(f)·h₀⁻¹.
    pub stable_h: Word,
    pub relative_rank: usize,
    pub chi: i64,
    pub certificate_level: u32,
}

/// Output of `subgroup_presentation`.
#[derive(Clone, Debug)]
pub enum Presentation {
    /// The subgroup is free with the given basis (possibly empty).
    Free {
        basis: Vec<MTElement>,
    },
    MappingTorus(Box<MappingTorusPresentation>),
}

/// Computes a finite presentation of ⟨gens⟩ ≤ M(ψ): free subgroups get a
/// basis; subgroups with nonzero t-image get the mapping-torus presentation
/// over a replacement monomorphism, minimized to the given certificate
/// level.
pub fn subgroup_presentation(
    gens: &[MTElement],
    m: &MappingTorus,
    n_cap: u32,
) -> Result<Presentation> {
    let mut gens: Vec<MTElement> = gens
        .iter()
        .map(|e| normalize(&e.expand(), m))
        .collect::<Result<Vec<_>>>()?;
    gens.retain(|e| !e.is_identity());
    if gens.is_empty() {
        return Ok(Presentation::Free { basis: vec![] });
    }

    // Shape the generating set: all elements of the form f·t^{−j}, j ≥ 0,
    // then run the euclidean reduction on t-exponents.
    let designated: usize = loop {
        reshape(&mut gens, m)?;
        let exps: Vec<u32> = gens.iter().map(|e| e.b).collect();
        let nonzero: Vec<u32> = exps.iter().copied().filter(|&j| j > 0).collect();
        if nonzero.is_empty() {
            // H ≤ 𝔽 after conjugation: free, Stallings basis
            let words: Vec<Word> = gens.iter().map(|e| e.w.clone()).collect();
            let graph = subgroup_graph(m.rank(), &words);
            let basis = stallings::basis(&graph)?;
            return Ok(Presentation::Free {
                basis: basis.into_iter().map(MTElement::from_word).collect(),
            });
        }
        let j0 = *nonzero.iter().min().unwrap();
        let idx = exps.iter().position(|&j| j == j0).unwrap();
        if exps.iter().all(|&j| j % j0 == 0) {
            break idx;
        }
        let g0 = gens[idx].clone();
        for (i, e) in gens.iter_mut().enumerate() {
            if i == idx || e.b % j0 == 0 {
                continue;
            }
            let q = (e.b / j0) as i64;
            *e = mt_mul(&mt_pow(&g0, -q, m)?, e, m)?;
        }
        gens.retain(|e| !e.is_identity());
        if gens.is_empty() {
            return Ok(Presentation::Free { basis: vec![] });
        }
    };

    // Reduce every other generator to t-exponent 0, then push into 𝔽.
    let power_m = gens[designated].b;
    let g0 = gens[designated].clone();
    for (i, e) in gens.iter_mut().enumerate() {
        if i == designated {
            continue;
        }
        let q = (e.b / power_m) as i64;
        *e = mt_mul(&mt_pow(&g0, -q, m)?, e, m)?;
    }
    reshape(&mut gens, m)?;
    let designated = gens
        .iter()
        .position(|e| e.b == power_m)
        .expect("designated generator survives reshaping");
    let h0 = gens[designated].w.clone();
    debug_assert_eq!(gens[designated].a, 0);
    let x_words: Vec<Word> = gens
        .iter()
        .enumerate()
        .filter(|&(i, e)| i != designated && !e.w.is_identity())
        .map(|(_, e)| {
            debug_assert_eq!(e.t_exponent(), 0);
            e.w.clone()
        })
        .collect();

    // New stable letter t' = (h₀ t^{−m})⁻¹ = t^m h₀⁻¹; ψ'(f) = h₀ ψ^m(f) h₀⁻¹.
    let psi_m = m.power(power_m);
    let psi_prime = Endomorphism::new(
        (1..=m.rank())
            .map(|i| {
                let x = Word::reduce([Letter::positive(i)]);
                Ok(h0.concat(&psi_m.apply(&x)?).concat(&h0.inverse()))
            })
            .collect::<Result<Vec<_>>>()?,
    )?;
    assert!(
        psi_prime.is_injective(),
        "conjugate of an injective power stays injective"
    );

    if x_words.is_empty() {
        // H = ⟨t'⟩ is infinite cyclic
        return Ok(Presentation::Free {
            basis: vec![mt_inverse(&gens[designated], m)?],
        });
    }

    let pair = GraphPair::invariant_from_generators(m.rank(), &x_words, &psi_prime)?;
    let minimized = graph_pair::minimize(&pair, &psi_prime, n_cap)?;
    Ok(Presentation::MappingTorus(Box::new(
        presentation_from_pair(&minimized.pair, &psi_prime, power_m, h0, n_cap)?,
    )))
}

/// Shapes generators so every one reads f·t^{−j} with j ≥ 0: invert
/// positive-exponent generators, then conjugate all by a common t-power if
/// some t-prefix remains. Conjugation replaces H by the isomorphic H^{t^N}.
fn reshape(gens: &mut [MTElement], m: &MappingTorus) -> Result<()> {
    loop {
        let mut changed = false;
        for e in gens.iter_mut() {
            if e.t_exponent() > 0 {
                *e = mt_inverse(e, m)?;
                changed = true;
            }
        }
        let n_max = gens.iter().map(|e| e.a).max().unwrap_or(0);
        if n_max > 0 {
            for e in gens.iter_mut() {
                *e = mt_conj_t(e, n_max, m)?;
            }
            changed = true;
        }
        if !changed {
            debug_assert!(gens.iter().all(|e| e.a == 0 && e.t_exponent() <= 0));
            return Ok(());
        }
    }
}

fn presentation_from_pair(
    pair: &GraphPair,
    psi_prime: &Endomorphism,
    power_m: u32,
    stable_h: Word,
    certificate_level: u32,
) -> Result<MappingTorusPresentation> {
    let bases = graph_pair::pair_bases(pair)?;
    let mut relations = Vec::new();
    for (zi, in_x) in bases.z_in_x.iter().enumerate() {
        if !in_x {
            continue;
        }
        let x = &bases.z_basis[zi];
        let rhs_word = psi_prime.apply(x)?;
        let rhs = bases
            .read(pair, &rhs_word)
            .expect("psi'(X#) lies in Z# by invariance");
        relations.push(Relation {
            x: zi,
            rhs,
            rhs_word,
        });
    }
    let rr = pair.relative_rank();
    Ok(MappingTorusPresentation {
        z_basis: bases.z_basis,
        x_basis: bases.x_basis,
        relations,
        psi_prime: psi_prime.clone(),
        power_m,
        stable_h,
        relative_rank: rr,
        chi: -(rr as i64),
        certificate_level,
    })
}

/// χ(H) for H = ⟨gens⟩: 1 − rank for free subgroups, −rr of the minimized
/// pair otherwise.
pub fn euler_characteristic(gens: &[MTElement], m: &MappingTorus, n_cap: u32) -> Result<i64> {
    match subgroup_presentation(gens, m, n_cap)? {
        Presentation::Free { basis } => Ok(1 - basis.len() as i64),
        Presentation::MappingTorus(p) => Ok(p.chi),
    }
}

/// Witness that ⟨H, t^k·f⁻¹⟩ is a sub-mapping torus: ψ^k(H) ≤ H^f = f⁻¹Hf.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubMTCertificate {
    pub h_basis: Vec<Word>,
    pub k: u32,
    pub f: Word,
    /// φ = γ_f ∘ ψ^k restricted to H, on the basis: the torus ⟨H, t^k f⁻¹⟩
    /// is M(φ) and has χ = 0.
    pub phi_images: Vec<Word>,
}

impl SubMTCertificate {
    /// The group element t^k·f⁻¹ whose conjugation realizes φ on H.
    pub fn element(&self, m: &MappingTorus) -> Result<MTElement> {
        let mut raw: Vec<MTLetter> =
            std::iter::repeat_n(MTLetter::Stable(1), self.k as usize).collect();
        raw.extend(
            self.f
                .inverse()
                .letters()
                .iter()
                .map(|&l| MTLetter::Basis(l)),
        );
        normalize(&raw, m)
    }

    /// Re-checks ψ^k(h) ∈ f⁻¹⟨h_basis⟩f for every basis element.
    pub fn verify(&self, m: &MappingTorus) -> Result<bool> {
        let graph = subgroup_graph(m.rank(), &self.h_basis);
        let psi_k = m.power(self.k);
        for h in &self.h_basis {
            let image = psi_k.apply(h)?;
            let pulled = self.f.concat(&image).concat(&self.f.inverse());
            if !membership(&graph, &pulled) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Searches k = 1..k_max for ψ^k(H) conjugate into H; returns the first
/// certificate found.
pub fn detect_sub_mapping_torus(
    h_gens: &[Word],
    m: &MappingTorus,
    k_max: u32,
) -> Result<Option<SubMTCertificate>> {
    let graph = subgroup_graph(m.rank(), h_gens);
    if graph.betti() == 0 {
        return Err(Error::EmptyWord);
    }
    let h_basis = stallings::basis(&graph)?;
    for k in 1..=k_max {
        let psi_k = m.power(k);
        let image_gens: Vec<Word> = h_basis
            .iter()
            .map(|h| psi_k.apply(h))
            .collect::<Result<Vec<_>>>()?;
        if let Some(g) = stallings::conjugate_into(m.rank(), &image_gens, h_gens) {
            let f = g.inverse();
            let phi_images: Vec<Word> = h_basis
                .iter()
                .map(|h| Ok(f.concat(&psi_k.apply(h)?).concat(&f.inverse())))
                .collect::<Result<Vec<_>>>()?;
            let cert = SubMTCertificate {
                h_basis,
                k,
                f,
                phi_images,
            };
            debug_assert!(cert.verify(m)?);
            return Ok(Some(cert));
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// HNN decomposition over a graded alphabet
// ---------------------------------------------------------------------------

/// Letter of the graded alphabet: a generator of A, or c_{grade, index} with
/// the built-in rule ψ(c_{i,j}) = c_{i+1,j}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GradedLetter {
    A(u32),
    C { grade: u32, index: u32 },
}

pub type GradedWord = Vec<(GradedLetter, i8)>;

/// The decomposition M(ψ) ≅ F∗_φ with F = A∗C₀∗…∗C_m,
/// L = A∗C₀∗…∗C_{m−1}, U = ψ(A)∗C₁∗…∗C_m and φ = ψ|L.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HnnDecomposition {
    pub m: u32,
    pub f_basis: Vec<GradedLetter>,
    pub l_basis: Vec<GradedLetter>,
    /// Basis of U: the ψ-images of A's generators followed by the C-letters
    /// of grades 1..=m.
    pub u_basis: Vec<GradedWord>,
    /// φ on the basis of L, in order of `l_basis`.
    pub phi_images: Vec<GradedWord>,
}

/// Computes the least m with ψ(A) ≤ A∗C₀∗…∗C_m (membership over the graded
/// alphabet is support containment) and assembles the decomposition.
pub fn hnn_decomposition(
    a_rank: u32,
    c_rank: u32,
    psi_a_images: &[GradedWord],
    m_cap: u32,
) -> Result<HnnDecomposition> {
    if psi_a_images.len() != a_rank as usize {
        return Err(Error::RankMismatch {
            left: a_rank,
            right: psi_a_images.len() as u32,
        });
    }
    let mut m = 0u32;
    for img in psi_a_images {
        for &(l, _) in img {
            match l {
                GradedLetter::A(i) => {
                    if i == 0 || i > a_rank {
                        return Err(Error::AlphabetMismatch {
                            index: i,
                            rank: a_rank,
                        });
                    }
                }
                GradedLetter::C { grade, index } => {
                    if index == 0 || index > c_rank {
                        return Err(Error::AlphabetMismatch {
                            index,
                            rank: c_rank,
                        });
                    }
                    if grade > m_cap {
                        return Err(Error::CapExceeded(format!(
                            "no m <= {m_cap} satisfies psi(A) <= A*C_0*...*C_m (image uses grade {grade})"
                        )));
                    }
                    m = m.max(grade);
                }
            }
        }
    }
    let a_letters: Vec<GradedLetter> = (1..=a_rank).map(GradedLetter::A).collect();
    let c_letters = |grades: std::ops::RangeInclusive<u32>| -> Vec<GradedLetter> {
        let mut out = Vec::new();
        for g in grades {
            for j in 1..=c_rank {
                out.push(GradedLetter::C { grade: g, index: j });
            }
        }
        out
    };
    let mut f_basis = a_letters.clone();
    if c_rank > 0 {
        f_basis.extend(c_letters(0..=m));
    }
    let mut l_basis = a_letters.clone();
    if c_rank > 0 && m > 0 {
        l_basis.extend(c_letters(0..=m - 1));
    }
    let mut u_basis: Vec<GradedWord> = psi_a_images.to_vec();
    if c_rank > 0 {
        u_basis.extend(c_letters(1..=m).into_iter().map(|l| vec![(l, 1)]));
    }
    let phi_images: Vec<GradedWord> = l_basis
        .iter()
        .map(|&l| match l {
            GradedLetter::A(i) => psi_a_images[(i - 1) as usize].clone(),
            GradedLetter::C { grade, index } => {
                vec![(
                    GradedLetter::C {
                        grade: grade + 1,
                        index,
                    },
                    1,
                )]
            }
        })
        .collect();
    Ok(HnnDecomposition {
        m,
        f_basis,
        l_basis,
        u_basis,
        phi_images,
    })
}

// ---------------------------------------------------------------------------
// Peripheral sub-mapping tori
// ---------------------------------------------------------------------------

/// One user-supplied free factor: a subset of basis letters conjugated by
/// `conjugator`, so A = ⟨letters⟩^{conjugator}.
#[derive(Clone, Debug)]
pub struct FactorSpec {
    pub letters: Vec<u32>,
    pub conjugator: Word,
}

impl FactorSpec {
    pub fn generators(&self) -> Vec<Word> {
        self.letters
            .iter()
            .map(|&l| Word::reduce([Letter::positive(l)]).conjugate(&self.conjugator))
            .collect()
    }
}

/// One σ-periodic orbit with its element h_i = t·f_i · t·f_{σ(i)} ⋯ and the
/// sub-mapping-torus certificate for H_i = ⟨A_i, h_i⟩.
#[derive(Clone, Debug)]
pub struct PeripheralOrbit {
    /// Indices of the orbit, starting at its minimal periodic index.
    pub orbit: Vec<usize>,
    pub ell: u32,
    pub h: MTElement,
    /// Generators of H_i: a basis of A_i together with h.
    pub h_i_gens: Vec<MTElement>,
    pub certificate: SubMTCertificate,
}

/// Verifies ψ(A_i)^{f_i} ≤ A_{σ(i)} (inferring σ), then emits one entry per
/// σ-periodic orbit with h_i by the product formula.
pub fn peripheral_candidates(
    m: &MappingTorus,
    factors: &[FactorSpec],
    f_list: &[Word],
) -> Result<Vec<PeripheralOrbit>> {
    if factors.len() != f_list.len() {
        return Err(Error::InvalidDecomposition(
            "need one conjugating element per factor".into(),
        ));
    }
    let mut seen = std::collections::BTreeSet::new();
    for spec in factors {
        for &l in &spec.letters {
            if !seen.insert(l) {
                return Err(Error::OverlappingFactors);
            }
        }
    }
    let n = factors.len();
    let gens: Vec<Vec<Word>> = factors.iter().map(FactorSpec::generators).collect();
    let graphs: Vec<_> = gens.iter().map(|g| subgroup_graph(m.rank(), g)).collect();
    // infer sigma: psi(A_i)^{f_i} <= A_{sigma(i)}
    let mut sigma = vec![usize::MAX; n];
    for i in 0..n {
        let images: Vec<Word> = gens[i]
            .iter()
            .map(|g| Ok(m.psi.apply(g)?.conjugate(&f_list[i])))
            .collect::<Result<Vec<_>>>()?;
        sigma[i] = (0..n)
            .find(|&j| images.iter().all(|w| membership(&graphs[j], w)))
            .ok_or_else(|| {
                Error::InvalidDecomposition(format!(
                    "psi(A_{})^{{f_{}}} is not contained in any A_j",
                    i + 1,
                    i + 1
                ))
            })?;
    }
    // periodic indices and orbits
    let mut out = Vec::new();
    let mut in_orbit = vec![false; n];
    for start in 0..n {
        if in_orbit[start] {
            continue;
        }
        // follow sigma until a repeat; start is periodic iff it recurs
        let mut seen_at = BTreeMap::new();
        let mut cur = start;
        let mut step = 0usize;
        while !seen_at.contains_key(&cur) {
            seen_at.insert(cur, step);
            cur = sigma[cur];
            step += 1;
        }
        if cur != start {
            continue; // start leads into a cycle elsewhere
        }
        let ell = step as u32;
        let mut orbit = Vec::new();
        let mut idx = start;
        for _ in 0..ell {
            orbit.push(idx);
            in_orbit[idx] = true;
            idx = sigma[idx];
        }
        // h_i = t f_i t f_sigma(i) ... t f_sigma^{l-1}(i)
        let mut raw: Vec<MTLetter> = Vec::new();
        for &r in &orbit {
            raw.push(MTLetter::Stable(1));
            raw.extend(f_list[r].letters().iter().map(|&l| MTLetter::Basis(l)));
        }
        let h = normalize(&raw, m)?;
        debug_assert_eq!(h.a, ell);
        debug_assert_eq!(h.b, 0);
        let f_hat = h.w.clone();
        let basis = stallings::basis(&graphs[start])?;
        let psi_l = m.power(ell);
        let cert_f = f_hat.inverse();
        let phi_images: Vec<Word> = basis
            .iter()
            .map(|x| Ok(cert_f.concat(&psi_l.apply(x)?).concat(&cert_f.inverse())))
            .collect::<Result<Vec<_>>>()?;
        let certificate = SubMTCertificate {
            h_basis: basis.clone(),
            k: ell,
            f: cert_f,
            phi_images,
        };
        if !certificate.verify(m)? {
            return Err(Error::InvalidDecomposition(format!(
                "orbit at A_{} does not satisfy psi^l-invariance",
                start + 1
            )));
        }
        let mut h_i_gens: Vec<MTElement> = basis.into_iter().map(MTElement::from_word).collect();
        h_i_gens.push(h.clone());
        out.push(PeripheralOrbit {
            orbit,
            ell,
            h,
            h_i_gens,
            certificate,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Bounded invariant-free-factor scan
// ---------------------------------------------------------------------------

/// A found witness: a proper free factor F with ψ^m(F) conjugate into F.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanWitness {
    pub factor: Vec<Word>,
    pub m: u32,
    pub conjugator: Word,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum ScanOutcome {
    Witness(ScanWitness),
    /// No witness found; the verdict is explicitly bounded.
    NoneFoundWithinCaps {
        word_len_cap: u32,
        m_max: u32,
        verdict: String,
    },
}

/// Bounded semi-decision of full irreducibility. Candidates: nonempty proper
/// subsets of the fixed basis, and cyclic factors ⟨u⟩ over primitive words
/// of bounded length. Never claims an unconditional verdict.
pub fn invariant_free_factor_scan(
    m: &MappingTorus,
    word_len_cap: u32,
    m_max: u32,
) -> Result<ScanOutcome> {
    let rank = m.rank();
    let mut candidates: Vec<Vec<Word>> = Vec::new();
    // (a) nonempty proper subsets of the basis, smallest first
    let mut subsets: Vec<Vec<u32>> = (1u64..(1 << rank) - 1)
        .map(|mask| (1..=rank).filter(|i| mask >> (i - 1) & 1 == 1).collect())
        .collect();
    subsets.sort_by_key(|s: &Vec<u32>| (s.len(), s.clone()));
    for s in subsets {
        candidates.push(
            s.iter()
                .map(|&i| Word::reduce([Letter::positive(i)]))
                .collect(),
        );
    }
    // (b) cyclic factors over primitive words, deduplicated up to rotation
    // and inversion
    let mut cyclic: Vec<Word> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    let mut pool: Vec<Word> = vec![Word::identity()];
    for _ in 0..word_len_cap {
        let mut next = Vec::new();
        for p in &pool {
            for idx in 1..=rank {
                for sign in [1i8, -1] {
                    let l = Letter::new(idx, sign);
                    let q = p.concat(&Word::reduce([l]));
                    if q.len() == p.len() + 1 {
                        next.push(q);
                    }
                }
            }
        }
        for q in &next {
            if q.len() >= 2
                && q.is_cyclically_reduced()
                && seen.insert(cyclic_canonical(q))
                && one_relator::is_primitive(q, rank)
            {
                cyclic.push(q.clone());
            }
        }
        pool = next;
    }
    cyclic.sort_by_key(|w| (w.len(), w.clone()));
    for u in cyclic {
        candidates.push(vec![u]);
    }

    for cand in &candidates {
        for power in 1..=m_max {
            let psi_m = m.power(power);
            let images: Vec<Word> = cand
                .iter()
                .map(|g| psi_m.apply(g))
                .collect::<Result<Vec<_>>>()?;
            if let Some(c) = stallings::conjugate_into(rank, &images, cand) {
                return Ok(ScanOutcome::Witness(ScanWitness {
                    factor: cand.clone(),
                    m: power,
                    conjugator: c,
                }));
            }
        }
    }
    Ok(ScanOutcome::NoneFoundWithinCaps {
        word_len_cap,
        m_max,
        verdict: format!(
            "no invariant proper free factor found within caps (word_len_cap={word_len_cap}, \
             m_max={m_max}), over the candidate family of basis subsets and primitive cyclic \
             words; this is not an unconditional irreducibility claim"
        ),
    })
}

/// Canonical representative of ⟨u⟩ under rotation and inversion.
fn cyclic_canonical(u: &Word) -> Word {
    let mut best: Option<Word> = None;
    for w in [u.clone(), u.inverse()] {
        let letters = w.letters().to_vec();
        let n = letters.len();
        for r in 0..n {
            let rotated: Vec<Letter> = letters[r..]
                .iter()
                .chain(letters[..r].iter())
                .copied()
                .collect();
            let cand = Word::reduce(rotated);
            if best.as_ref().is_none_or(|b| cand < *b) {
                best = Some(cand);
            }
        }
    }
    best.unwrap_or_else(Word::identity)
}
