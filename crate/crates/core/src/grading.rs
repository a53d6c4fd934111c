//! Exact sign arithmetic on the grading group `Γ = Z₂ⁿ`.
//!
//! A [`Degree`] is an `n`-bit vector composed by XOR. The coordinate `a₁`
//! is stored in the most significant of the `n` bits, so the lexicographic
//! order on `Γ` coincides with the numeric order of the packed code and the
//! code doubles as the position of the degree in the canonical ordering
//! `γ₀ = 0 ≺ γ₁ ≺ … ≺ γ_{2ⁿ-1}`.
//!
//! Signs and phases are enumerated values; nothing in this module touches
//! floating point except the conversions to `Complex64`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::Report;

/// Largest supported rank of `Γ`.
pub const MAX_RANK: u8 = 16;
/// Largest rank for which the exhaustive pair checks are run.
pub const MAX_EXHAUSTIVE_RANK: u8 = 8;

/// An element of `Γ = Z₂ⁿ`. Serializes as its coordinate array.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "Vec<u8>", try_from = "Vec<u8>")]
pub struct Degree {
    rank: u8,
    code: u16,
}

impl Degree {
    pub fn zero(rank: u8) -> Self {
        assert!((1..=MAX_RANK).contains(&rank), "rank {rank} out of range");
        Degree { rank, code: 0 }
    }

    /// The basis vector `e_j` (1-based, as in `a = Σ aⱼ eⱼ`).
    pub fn unit(rank: u8, j: u8) -> Self {
        assert!(j >= 1 && j <= rank, "e_{j} does not exist at rank {rank}");
        Degree { rank, code: 1 << (rank - j) }
    }

    /// Builds a degree from its coordinates `(a₁, …, aₙ)`, each 0 or 1.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let rank = bits.len();
        if rank == 0 || rank > MAX_RANK as usize {
            return Err(Error::InvalidRank(rank));
        }
        let mut code = 0u16;
        for (pos, &b) in bits.iter().enumerate() {
            if b > 1 {
                return Err(Error::Invalid(format!(
                    "degree coordinate {} is {b}, expected 0 or 1",
                    pos + 1
                )));
            }
            code = (code << 1) | b as u16;
        }
        Ok(Degree { rank: rank as u8, code })
    }

    /// Builds a degree from its position in the canonical (lexicographic) order.
    pub fn from_index(rank: u8, index: usize) -> Self {
        assert!((1..=MAX_RANK).contains(&rank));
        assert!(index < 1usize << rank, "index {index} out of range for rank {rank}");
        Degree { rank, code: index as u16 }
    }

    pub fn rank(self) -> u8 {
        self.rank
    }

    /// Position in the canonical order; `0` for the zero degree.
    pub fn index(self) -> usize {
        self.code as usize
    }

    pub fn bits(self) -> Vec<u8> {
        (1..=self.rank).map(|j| self.bit(j)).collect()
    }

    /// Coordinate `a_j`, 1-based.
    pub fn bit(self, j: u8) -> u8 {
        ((self.code >> (self.rank - j)) & 1) as u8
    }

    pub fn is_zero(self) -> bool {
        self.code == 0
    }

    /// All `2ⁿ` degrees of the given rank in canonical order.
    pub fn all(rank: u8) -> impl Iterator<Item = Degree> {
        assert!((1..=MAX_RANK).contains(&rank));
        (0..(1u32 << rank)).map(move |c| Degree { rank, code: c as u16 })
    }

    /// Group composition (written multiplicatively in the literature).
    pub fn compose(self, other: Degree) -> Degree {
        assert_eq!(self.rank, other.rank, "degree rank mismatch");
        Degree {
            rank: self.rank,
            code: self.code ^ other.code,
        }
    }

    /// `b₊(a, b) = Σ aⱼbⱼ mod 2`.
    pub fn pairing(self, other: Degree) -> u8 {
        assert_eq!(self.rank, other.rank, "degree rank mismatch");
        ((self.code & other.code).count_ones() & 1) as u8
    }

    /// The commutation factor `β(a, b) = (-1)^{b₊(a,b)}`.
    pub fn commutation(self, other: Degree) -> Sign {
        Sign::from_parity(self.pairing(other))
    }

    pub fn ucount(self) -> u32 {
        self.code.count_ones()
    }

    pub fn parity(self) -> Parity {
        if self.pairing(self) == 0 {
            Parity::EvenLike
        } else {
            Parity::OddLike
        }
    }

    pub fn is_odd_like(self) -> bool {
        self.parity() == Parity::OddLike
    }

    /// `α(a) = i^{u(a)}`, optionally twisted by a character.
    pub fn phase(self, twist: &Character) -> Phase {
        Phase::i_pow(self.ucount()) * twist.eval(self)
    }
}

impl From<Degree> for Vec<u8> {
    fn from(a: Degree) -> Vec<u8> {
        a.bits()
    }
}

impl TryFrom<Vec<u8>> for Degree {
    type Error = Error;
    fn try_from(bits: Vec<u8>) -> Result<Degree> {
        Degree::from_bits(&bits)
    }
}

impl Mul for Degree {
    type Output = Degree;
    fn mul(self, rhs: Degree) -> Degree {
        self.compose(rhs)
    }
}

impl fmt::Debug for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Degree{self}")
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for j in 1..=self.rank {
            if j > 1 {
                write!(f, ",")?;
            }
            write!(f, "{}", self.bit(j))?;
        }
        write!(f, ")")
    }
}

/// Parity sector of a degree: `Γ₀̄` (even-like) or `Γ₁̄` (odd-like).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    EvenLike,
    OddLike,
}

/// A value in `{+1, -1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_parity(bit: u8) -> Sign {
        if bit & 1 == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.value() as f64
    }

    pub fn to_c64(self) -> Complex64 {
        Complex64::new(self.to_f64(), 0.0)
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// A fourth root of unity `iᵏ`, stored as `k mod 4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn i_pow(k: u32) -> Phase {
        Phase((k % 4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn conj(self) -> Phase {
        Phase((4 - self.0) % 4)
    }

    pub fn to_c64(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    pub fn is_real(self) -> bool {
        self.0 % 2 == 0
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

impl Mul<Sign> for Phase {
    type Output = Phase;
    fn mul(self, rhs: Sign) -> Phase {
        match rhs {
            Sign::Plus => self,
            Sign::Minus => self * Phase::MINUS_ONE,
        }
    }
}

impl From<Sign> for Phase {
    fn from(s: Sign) -> Phase {
        Phase::ONE * s
    }
}

/// A group homomorphism `χ : Γ → {±1}`.
///
/// Every such homomorphism is `a ↦ (-1)^{Σ mⱼaⱼ}` for a unique mask `m`,
/// which is what is stored.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Character {
    rank: u8,
    mask: u16,
}

impl Character {
    pub fn trivial(rank: u8) -> Self {
        Character { rank, mask: 0 }
    }

    /// `χ(a) = (-1)^{b₊(m, a)}` for the mask degree `m`.
    pub fn from_mask(mask: Degree) -> Self {
        Character {
            rank: mask.rank,
            mask: mask.code,
        }
    }

    /// Builds a character from its full value table, rejecting tables that
    /// are not multiplicative.
    pub fn from_table(rank: u8, values: &[(Degree, Sign)]) -> Result<Self> {
        let mut table = vec![None; 1usize << rank];
        for &(a, s) in values {
            if a.rank != rank {
                return Err(Error::RankMismatch(a.rank, rank));
            }
            table[a.index()] = Some(s);
        }
        if table.iter().any(Option::is_none) {
            return Err(Error::Invalid("character table must list every degree".into()));
        }
        let mut mask = 0u16;
        for j in 1..=rank {
            if table[Degree::unit(rank, j).index()] == Some(Sign::Minus) {
                mask |= 1 << (rank - j);
            }
        }
        let chi = Character { rank, mask };
        for a in Degree::all(rank) {
            if table[a.index()] != Some(chi.eval(a)) {
                return Err(Error::Invalid(format!(
                    "character table is not multiplicative at {a}"
                )));
            }
        }
        Ok(chi)
    }

    pub fn rank(&self) -> u8 {
        self.rank
    }

    pub fn mask(&self) -> Degree {
        Degree {
            rank: self.rank,
            code: self.mask,
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.mask == 0
    }

    pub fn eval(&self, a: Degree) -> Sign {
        assert_eq!(self.rank, a.rank, "character rank mismatch");
        Sign::from_parity(((self.mask & a.code).count_ones() & 1) as u8)
    }

    /// Pointwise product `χψ`.
    pub fn product(&self, other: &Character) -> Character {
        assert_eq!(self.rank, other.rank);
        Character {
            rank: self.rank,
            mask: self.mask ^ other.mask,
        }
    }

    /// All `2ⁿ` characters of `Γ`.
    pub fn all(rank: u8) -> impl Iterator<Item = Character> {
        Degree::all(rank).map(Character::from_mask)
    }
}

impl fmt::Debug for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Character(mask={})", self.mask())
    }
}

fn same_rank(a: Degree, b: Degree) -> Result<()> {
    if a.rank != b.rank {
        Err(Error::RankMismatch(a.rank, b.rank))
    } else {
        Ok(())
    }
}

/// `b₊(a, b)` as an element of `Z₂`.
pub fn bform(a: Degree, b: Degree) -> Result<u8> {
    same_rank(a, b)?;
    Ok(a.pairing(b))
}

pub fn beta(a: Degree, b: Degree) -> Result<Sign> {
    same_rank(a, b)?;
    Ok(a.commutation(b))
}

pub fn ucount(a: Degree) -> u32 {
    a.ucount()
}

/// `α(a) = i^{u(a)}`, times `χ(a)` when a twist is supplied.
pub fn alpha(a: Degree, twist: Option<&Character>) -> Phase {
    let base = Phase::i_pow(a.ucount());
    match twist {
        Some(chi) => base * chi.eval(a),
        None => base,
    }
}

pub fn parity(a: Degree) -> Parity {
    a.parity()
}

pub fn lex_compare(a: Degree, b: Degree) -> Result<Ordering> {
    same_rank(a, b)?;
    Ok(a.code.cmp(&b.code))
}

/// The lifting-obstruction cocycle `δ(a, b) = (-1)^{Σ_{i,j} aᵢbⱼ} = (-1)^{u(a)u(b)}`.
pub fn delta(a: Degree, b: Degree) -> Sign {
    assert_eq!(a.rank, b.rank);
    Sign::from_parity(((a.ucount() * b.ucount()) & 1) as u8)
}

/// `η(a) = (-1)^{Σ_{i<j} aᵢaⱼ}`.
pub fn eta(a: Degree) -> Sign {
    let u = a.ucount();
    Sign::from_parity(((u * u.saturating_sub(1) / 2) & 1) as u8)
}

/// Outcome of an exhaustive identity check over all pairs of degrees.
#[derive(Clone, Debug, Serialize)]
pub struct PairCheck {
    pub identity: String,
    pub rank: u8,
    pub pairs_checked: usize,
    pub violations: Vec<(Degree, Degree)>,
}

impl PairCheck {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_report(&self, operation: &str) -> Report {
        let mut r = Report::new(operation);
        r.check_exact(
            &format!("{} (rank {}, {} pairs)", self.identity, self.rank, self.pairs_checked),
            self.violations.len(),
        );
        for (a, b) in self.violations.iter().take(8) {
            r.note(format!("violation at ({a}, {b})"));
        }
        r
    }
}

fn exhaustive(rank: u8, identity: &str, holds: impl Fn(Degree, Degree) -> bool) -> Result<PairCheck> {
    if rank == 0 || rank > MAX_EXHAUSTIVE_RANK {
        return Err(Error::InvalidRank(rank as usize));
    }
    let mut violations = Vec::new();
    let mut pairs = 0;
    for b in Degree::all(rank) {
        for c in Degree::all(rank) {
            pairs += 1;
            if !holds(b, c) {
                violations.push((b, c));
            }
        }
    }
    Ok(PairCheck {
        identity: identity.to_string(),
        rank,
        pairs_checked: pairs,
        violations,
    })
}

/// Checks `α(bc) = β(b,c)α(b)α(c)` on all `4ⁿ` pairs.
pub fn verify_alpha_cocycle(rank: u8, twist: Option<&Character>) -> Result<PairCheck> {
    if let Some(chi) = twist {
        if chi.rank != rank {
            return Err(Error::RankMismatch(chi.rank, rank));
        }
    }
    exhaustive(rank, "alpha(bc) = beta(b,c) alpha(b) alpha(c)", |b, c| {
        alpha(b * c, twist) == alpha(b, twist) * alpha(c, twist) * b.commutation(c)
    })
}

/// Checks `β(a,b)·δ(a,b)⁻¹ = η(a)η(b)η(ab)⁻¹` on all `4ⁿ` pairs.
pub fn verify_lifting_relation(rank: u8) -> Result<PairCheck> {
    exhaustive(rank, "beta(a,b)/delta(a,b) = eta(a) eta(b) / eta(ab)", |a, b| {
        a.commutation(b) * delta(a, b) == eta(a) * eta(b) * eta(a * b)
    })
}
