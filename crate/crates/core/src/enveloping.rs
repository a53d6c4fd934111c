//! The enveloping algebra `𝔘(g_ℂ)` in PBW normal form, its star map, the
//! adjoint action of group elements, and the monoid `𝒮 = G₀ ⋉ 𝔘(g_ℂ)`.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::color_lie::ColorLieAlgebra;
use crate::error::{Error, Result};
use crate::grading::{alpha, Character, Degree};
use crate::hc_rep::{GroupElement, HcPair};
use crate::linalg::{RMat, C64, ONE, ZERO};

/// Default bound on word length during normalization.
pub const DEFAULT_LEVEL_CAP: usize = 6;
/// Coefficients below this magnitude are dropped from normal forms.
pub const PRUNE: f64 = 1e-14;

/// A sorted word in the canonical basis order; letter `i` may repeat only
/// when `x_i` is even-like.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PbwMonomial(Vec<usize>);

impl PbwMonomial {
    pub fn one() -> Self {
        PbwMonomial(Vec::new())
    }

    pub fn word(&self) -> &[usize] {
        &self.0
    }

    pub fn level(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self, l: &ColorLieAlgebra) -> Degree {
        self.0
            .iter()
            .fold(Degree::zero(l.rank()), |acc, &i| acc * l.degree(i))
    }

    /// Validates that `word` is a PBW monomial of `l`.
    pub fn new(l: &ColorLieAlgebra, word: Vec<usize>) -> Result<Self> {
        for w in word.windows(2) {
            if w[0] > w[1] || (w[0] == w[1] && l.degree(w[0]).is_odd_like()) {
                return Err(Error::Invalid(format!("word {word:?} is not a PBW monomial")));
            }
        }
        if word.iter().any(|&i| i >= l.dim()) {
            return Err(Error::Invalid(format!("word {word:?} has letters out of range")));
        }
        Ok(PbwMonomial(word))
    }
}

impl fmt::Debug for PbwMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// All PBW monomials of level at most `max_level`, ordered by level and
/// then lexicographically.
pub fn pbw_monomials(l: &ColorLieAlgebra, max_level: usize) -> Vec<PbwMonomial> {
    let mut out = vec![PbwMonomial::one()];
    let mut frontier = vec![Vec::<usize>::new()];
    for _ in 0..max_level {
        let mut next = Vec::new();
        for w in &frontier {
            let start = w.last().copied().unwrap_or(0);
            for i in start..l.dim() {
                if w.last() == Some(&i) && l.degree(i).is_odd_like() {
                    continue;
                }
                let mut nw = w.clone();
                nw.push(i);
                next.push(nw);
            }
        }
        out.extend(next.iter().cloned().map(PbwMonomial));
        frontier = next;
    }
    out
}

/// A finite linear combination of PBW monomials.
#[derive(Clone, Default, PartialEq, Serialize)]
pub struct EnvElement {
    terms: BTreeMap<PbwMonomial, C64>,
}

impl EnvElement {
    pub fn zero() -> Self {
        EnvElement::default()
    }

    pub fn one() -> Self {
        EnvElement::from_monomial(PbwMonomial::one(), ONE)
    }

    pub fn from_monomial(m: PbwMonomial, c: C64) -> Self {
        let mut e = EnvElement::zero();
        if c != ZERO {
            e.terms.insert(m, c);
        }
        e
    }

    /// The generator `x_i`.
    pub fn generator(i: usize) -> Self {
        EnvElement::from_monomial(PbwMonomial(vec![i]), ONE)
    }

    /// `Σ_i x[i] x_i` for real coordinates.
    pub fn from_coords(x: &[f64]) -> Self {
        let mut e = EnvElement::zero();
        for (i, &c) in x.iter().enumerate() {
            if c != 0.0 {
                e.terms.insert(PbwMonomial(vec![i]), C64::new(c, 0.0));
            }
        }
        e
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PbwMonomial, &C64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &PbwMonomial) -> C64 {
        self.terms.get(m).copied().unwrap_or(ZERO)
    }

    pub fn max_level(&self) -> usize {
        self.terms.keys().map(PbwMonomial::level).max().unwrap_or(0)
    }

    /// The common degree of all monomials, `None` when mixed. The zero
    /// element reports degree 0.
    pub fn degree(&self, l: &ColorLieAlgebra) -> Option<Degree> {
        let mut degs = self.terms.keys().map(|m| m.degree(l));
        match degs.next() {
            None => Some(Degree::zero(l.rank())),
            Some(d) => degs.all(|e| e == d).then_some(d),
        }
    }

    pub fn add_term(&mut self, m: PbwMonomial, c: C64) {
        match self.terms.entry(m) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == ZERO {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                if c != ZERO {
                    v.insert(c);
                }
            }
        }
    }

    pub fn add(&self, other: &EnvElement) -> EnvElement {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), *c);
        }
        out
    }

    pub fn scale(&self, s: C64) -> EnvElement {
        if s == ZERO {
            return EnvElement::zero();
        }
        EnvElement {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect(),
        }
    }

    pub fn sub(&self, other: &EnvElement) -> EnvElement {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// `max |c₁ − c₂| / max(1, max |c|)` over the union of monomials.
    pub fn distance(&self, other: &EnvElement) -> f64 {
        let mut diff = 0.0f64;
        let mut scale = 1.0f64;
        for (m, c) in &self.terms {
            diff = diff.max((c - other.coefficient(m)).norm());
            scale = scale.max(c.norm());
        }
        for (m, c) in &other.terms {
            diff = diff.max((c - self.coefficient(m)).norm());
            scale = scale.max(c.norm());
        }
        diff / scale
    }

    fn prune(mut self) -> Self {
        self.terms.retain(|_, c| c.norm() >= PRUNE);
        self
    }
}

impl fmt::Debug for EnvElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

/// Which out-of-order position is rewritten first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RewriteStrategy {
    Leftmost,
    Rightmost,
}

/// Normal-form context for one algebra: level cap, rewrite strategy and the
/// α-twist used by the star map.
#[derive(Clone, Debug)]
pub struct Enveloping<'a> {
    pub algebra: &'a ColorLieAlgebra,
    pub level_cap: usize,
    pub strategy: RewriteStrategy,
    pub twist: Character,
}

impl<'a> Enveloping<'a> {
    pub fn new(algebra: &'a ColorLieAlgebra) -> Self {
        Enveloping {
            algebra,
            level_cap: DEFAULT_LEVEL_CAP,
            strategy: RewriteStrategy::Leftmost,
            twist: Character::trivial(algebra.rank()),
        }
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.level_cap = cap;
        self
    }

    pub fn with_strategy(mut self, s: RewriteStrategy) -> Self {
        self.strategy = s;
        self
    }

    pub fn with_twist(mut self, chi: Character) -> Self {
        self.twist = chi;
        self
    }

    fn violation(&self, w: &[usize]) -> Option<usize> {
        let bad = |k: usize| {
            w[k] > w[k + 1] || (w[k] == w[k + 1] && self.algebra.degree(w[k]).is_odd_like())
        };
        let n = w.len().saturating_sub(1);
        match self.strategy {
            RewriteStrategy::Leftmost => (0..n).find(|&k| bad(k)),
            RewriteStrategy::Rightmost => (0..n).rev().find(|&k| bad(k)),
        }
    }

    /// Rewrites an arbitrary word into PBW normal form using
    /// `x_j x_i → β(|x_j|,|x_i|) x_i x_j + [x_j, x_i]` for `j > i` and
    /// `x_i x_i → ½[x_i, x_i]` for odd-like `x_i`.
    pub fn normal_form(&self, word: &[usize]) -> Result<EnvElement> {
        self.normalize_terms(std::iter::once((word.to_vec(), ONE)))
    }

    fn normalize_terms(&self, input: impl IntoIterator<Item = (Vec<usize>, C64)>) -> Result<EnvElement> {
        let l = self.algebra;
        let mut work: BTreeMap<Vec<usize>, C64> = BTreeMap::new();
        let push = |work: &mut BTreeMap<Vec<usize>, C64>, w: Vec<usize>, c: C64| {
            let e = work.entry(w).or_insert(ZERO);
            *e += c;
        };
        for (w, c) in input {
            if w.len() > self.level_cap {
                return Err(Error::LevelCap {
                    len: w.len(),
                    cap: self.level_cap,
                });
            }
            if let Some(&bad) = w.iter().find(|&&i| i >= l.dim()) {
                return Err(Error::Invalid(format!("letter {bad} out of range for dimension {}", l.dim())));
            }
            push(&mut work, w, c);
        }
        let mut out = EnvElement::zero();
        while let Some((w, c)) = work.pop_last() {
            if c == ZERO {
                continue;
            }
            let Some(k) = self.violation(&w) else {
                out.add_term(PbwMonomial(w), c);
                continue;
            };
            let (j, i) = (w[k], w[k + 1]);
            if j == i {
                for &(m, s) in l.bracket_basis(i, i) {
                    let mut nw = Vec::with_capacity(w.len() - 1);
                    nw.extend_from_slice(&w[..k]);
                    nw.push(m);
                    nw.extend_from_slice(&w[k + 2..]);
                    push(&mut work, nw, c * (0.5 * s));
                }
                continue;
            }
            let mut swapped = w.clone();
            swapped.swap(k, k + 1);
            let b = l.degree(j).commutation(l.degree(i)).to_f64();
            push(&mut work, swapped, c * b);
            for &(m, s) in l.bracket_basis(j, i) {
                let mut nw = Vec::with_capacity(w.len() - 1);
                nw.extend_from_slice(&w[..k]);
                nw.push(m);
                nw.extend_from_slice(&w[k + 2..]);
                push(&mut work, nw, c * s);
            }
        }
        Ok(out.prune())
    }

    pub fn mul(&self, d1: &EnvElement, d2: &EnvElement) -> Result<EnvElement> {
        let mut input = Vec::with_capacity(d1.len() * d2.len());
        for (m1, c1) in d1.terms() {
            for (m2, c2) in d2.terms() {
                let mut w = m1.0.clone();
                w.extend_from_slice(&m2.0);
                input.push((w, c1 * c2));
            }
        }
        self.normalize_terms(input)
    }

    /// Normal form of a linear combination of arbitrary words.
    pub fn from_words(&self, words: &[(Vec<usize>, C64)]) -> Result<EnvElement> {
        self.normalize_terms(words.iter().cloned())
    }

    /// `x* = −conj(α'(a)) x` on generators, extended as a conjugate-linear
    /// anti-automorphism.
    pub fn star(&self, d: &EnvElement) -> Result<EnvElement> {
        let l = self.algebra;
        let mut input = Vec::with_capacity(d.len());
        for (m, c) in d.terms() {
            let mut coeff = c.conj();
            for &i in &m.0 {
                coeff *= -alpha(l.degree(i), Some(&self.twist)).conj().to_c64();
            }
            let mut w = m.0.clone();
            w.reverse();
            input.push((w, coeff));
        }
        self.normalize_terms(input)
    }

    /// Applies the algebra automorphism `a` letterwise and renormalizes.
    pub fn ad(&self, a: &RMat, d: &EnvElement) -> Result<EnvElement> {
        let l = self.algebra;
        let images: Vec<EnvElement> = (0..l.dim())
            .map(|i| EnvElement::from_coords(a.column(i).as_slice()))
            .collect();
        let mut out = EnvElement::zero();
        for (m, c) in d.terms() {
            let mut acc = EnvElement::from_monomial(PbwMonomial::one(), *c);
            for &i in &m.0 {
                acc = self.mul(&acc, &images[i])?;
            }
            out = out.add(&acc);
        }
        Ok(out.prune())
    }
}

/// An element `(g, D)` of `𝒮`.
#[derive(Clone, Debug, PartialEq)]
pub struct MonoidElement {
    pub group: GroupElement,
    pub env: EnvElement,
}

impl MonoidElement {
    pub fn new(group: GroupElement, env: EnvElement) -> Self {
        MonoidElement { group, env }
    }

    pub fn from_group(g: GroupElement) -> Self {
        MonoidElement::new(g, EnvElement::one())
    }

    pub fn from_env(d: EnvElement) -> Self {
        MonoidElement::new(GroupElement::identity(), d)
    }

    /// The degree of the `D` component (`None` when mixed).
    pub fn degree(&self, l: &ColorLieAlgebra) -> Option<Degree> {
        self.env.degree(l)
    }

    /// Distance between two monoid elements with formally equal group parts;
    /// infinite when the group words differ.
    pub fn distance(&self, other: &MonoidElement) -> f64 {
        if self.group != other.group {
            return f64::INFINITY;
        }
        self.env.distance(&other.env)
    }
}

/// The monoid `𝒮 = G₀ ⋉ 𝔘(g_ℂ)` for a pair.
#[derive(Clone, Debug)]
pub struct Monoid<'a> {
    pub pair: &'a HcPair,
    pub env: Enveloping<'a>,
}

impl<'a> Monoid<'a> {
    pub fn new(pair: &'a HcPair) -> Self {
        Monoid {
            pair,
            env: Enveloping::new(&pair.algebra),
        }
    }

    pub fn with_env(pair: &'a HcPair, env: Enveloping<'a>) -> Self {
        Monoid { pair, env }
    }

    pub fn one(&self) -> MonoidElement {
        MonoidElement::from_group(GroupElement::identity())
    }

    /// `Ad(g)(D)`.
    pub fn env_ad(&self, g: &GroupElement, d: &EnvElement) -> Result<EnvElement> {
        if g.is_identity() {
            return Ok(d.clone());
        }
        let a = self.pair.ad(g)?;
        self.env.ad(&a, d)
    }

    /// `(g₁, D₁)(g₂, D₂) = (g₁g₂, Ad(g₂⁻¹)(D₁) D₂)`.
    pub fn mul(&self, s1: &MonoidElement, s2: &MonoidElement) -> Result<MonoidElement> {
        let moved = self.env_ad(&s2.group.inverse(), &s1.env)?;
        Ok(MonoidElement::new(
            s1.group.mul(&s2.group),
            self.env.mul(&moved, &s2.env)?,
        ))
    }

    /// `(g, D)* = (g⁻¹, Ad(g)(D*))`.
    pub fn star(&self, s: &MonoidElement) -> Result<MonoidElement> {
        let ds = self.env.star(&s.env)?;
        Ok(MonoidElement::new(s.group.inverse(), self.env_ad(&s.group, &ds)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::color_lie::glv;
    use crate::graded_linear::GradedSpace;
    use crate::linalg::I;

    fn two_odd_commuting() -> ColorLieAlgebra {
        let e = Degree::unit(1, 1);
        ColorLieAlgebra::abelian(1, vec![("x1".into(), e), ("x2".into(), e)]).unwrap()
    }

    #[test]
    fn sorted_word_is_fixed() {
        let (l, _) = glv(&GradedSpace::new(1, vec![1, 1]).unwrap()).unwrap();
        let u = Enveloping::new(&l);
        let nf = u.normal_form(&[0, 1, 2]).unwrap();
        assert_eq!(nf, EnvElement::from_monomial(PbwMonomial(vec![0, 1, 2]), ONE));
    }

    #[test]
    fn odd_swap_sign() {
        let l = two_odd_commuting();
        let u = Enveloping::new(&l);
        let nf = u.normal_form(&[1, 0]).unwrap();
        assert_eq!(nf, EnvElement::from_monomial(PbwMonomial(vec![0, 1]), -ONE));
        assert!(u.normal_form(&[0, 0]).unwrap().is_zero());
    }

    #[test]
    fn gl11_rewrite_includes_bracket() {
        let (l, _) = glv(&GradedSpace::new(1, vec![1, 1]).unwrap()).unwrap();
        let u = Enveloping::new(&l);
        let e12 = l.index_of("E12").unwrap();
        let e21 = l.index_of("E21").unwrap();
        // E21 E12 = −E12 E21 + [E21, E12] = −E12 E21 + E11 + E22
        let nf = u.normal_form(&[e21, e12]).unwrap();
        assert_eq!(nf.coefficient(&PbwMonomial(vec![e12, e21])), -ONE);
        assert_eq!(nf.coefficient(&PbwMonomial(vec![0])), ONE);
        assert_eq!(nf.coefficient(&PbwMonomial(vec![1])), ONE);
        assert_eq!(nf.len(), 3);
    }

    #[test]
    fn star_on_generators() {
        let (l, _) = glv(&GradedSpace::new(1, vec![1, 1]).unwrap()).unwrap();
        let u = Enveloping::new(&l);
        assert_eq!(u.star(&EnvElement::generator(0)).unwrap(), EnvElement::generator(0).scale(-ONE));
        assert_eq!(u.star(&EnvElement::generator(2)).unwrap(), EnvElement::generator(2).scale(I));
    }

    #[test]
    fn level_cap_enforced() {
        let l = two_odd_commuting();
        let u = Enveloping::new(&l).with_cap(2);
        assert!(matches!(u.normal_form(&[0, 1, 0]), Err(Error::LevelCap { len: 3, cap: 2 })));
    }

    #[test]
    fn minus_identity_on_odd_sector_cancels_on_pairs() {
        let l = two_odd_commuting();
        let u = Enveloping::new(&l);
        let a = -RMat::identity(2, 2);
        let d = u.normal_form(&[0, 1]).unwrap();
        assert_eq!(u.ad(&a, &d).unwrap(), d);
    }

    #[test]
    fn monomial_enumeration_skips_odd_squares() {
        let l = two_odd_commuting();
        let ms = pbw_monomials(&l, 3);
        let words: Vec<Vec<usize>> = ms.iter().map(|m| m.word().to_vec()).collect();
        assert_eq!(words, vec![vec![], vec![0], vec![1], vec![0, 1]]);
    }
}
