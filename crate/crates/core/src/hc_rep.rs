//! Harish-Chandra pairs and their finite-dimensional (pre-)representations.
//!
//! `G₀` is modeled by formal words in two kinds of generators: one-parameter
//! elements `exp(t x)` for basis elements `x ∈ g₀`, and an explicit list of
//! extra component representatives carrying their own `Ad` and `π` data.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::color_lie::{check_perfectness, decompose_odd, ColorLieAlgebra, DecompositionStrategy};
use crate::enveloping::{EnvElement, MonoidElement};
use crate::error::{Error, Result};
use crate::graded_linear::{
    dagger_adjoint, off_degree_residual, star_adjoint, tensor_map, tensor_space, GammaInnerSpace,
    GradedSpace, HomogeneousMap,
};
use crate::grading::{Character, Degree};
use crate::linalg::{self, eye, rel_residual, CMat, CVec, RMat, C64, ONE};
use crate::report::Report;

/// Tolerance for validating `Ad` data of extra generators.
pub const AD_TOL: f64 = 1e-9;
/// Parameters of the sampled one-parameter subgroups in the (R5) check.
pub const R5_TIMES: [f64; 2] = [0.3, 1.0];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum GroupGen {
    /// Extra component representative number `index` (or its inverse).
    Extra { index: usize, inverse: bool },
    /// `exp(t x_basis)` for a basis element of `g₀`.
    Exp { basis: usize, t: f64 },
}

impl GroupGen {
    fn inverse(&self) -> GroupGen {
        match *self {
            GroupGen::Extra { index, inverse } => GroupGen::Extra {
                index,
                inverse: !inverse,
            },
            GroupGen::Exp { basis, t } => GroupGen::Exp { basis, t: -t },
        }
    }
}

/// A freely reduced word in the generators of `G₀`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct GroupElement(Vec<GroupGen>);

impl GroupElement {
    pub fn identity() -> Self {
        GroupElement(Vec::new())
    }

    pub fn extra(index: usize) -> Self {
        GroupElement(vec![GroupGen::Extra {
            index,
            inverse: false,
        }])
    }

    pub fn exp(basis: usize, t: f64) -> Self {
        GroupElement::identity().mul(&GroupElement(vec![GroupGen::Exp { basis, t }]))
    }

    pub fn from_factors(factors: Vec<GroupGen>) -> Self {
        GroupElement::identity().mul(&GroupElement(factors))
    }

    pub fn factors(&self) -> &[GroupGen] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        let mut out = self.0.clone();
        for f in &other.0 {
            match (out.last_mut(), f) {
                (Some(GroupGen::Exp { basis: b1, t: t1 }), GroupGen::Exp { basis: b2, t: t2 }) if b1 == b2 => {
                    *t1 += t2;
                    if *t1 == 0.0 {
                        out.pop();
                    }
                }
                (
                    Some(GroupGen::Extra { index: i1, inverse: v1 }),
                    GroupGen::Extra { index: i2, inverse: v2 },
                ) if i1 == i2 && v1 != v2 => {
                    out.pop();
                }
                (_, GroupGen::Exp { t, .. }) if *t == 0.0 => {}
                _ => out.push(f.clone()),
            }
        }
        GroupElement(out)
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement(self.0.iter().rev().map(GroupGen::inverse).collect())
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (k, g) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            match g {
                GroupGen::Extra { index, inverse } => {
                    write!(f, "g{index}{}", if *inverse { "^-1" } else { "" })?
                }
                GroupGen::Exp { basis, t } => write!(f, "exp({t} x{basis})")?,
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct ExtraGenerator {
    pub label: String,
    pub ad: RMat,
    ad_inv: RMat,
}

impl ExtraGenerator {
    pub fn new(label: impl Into<String>, ad: RMat) -> Result<Self> {
        let label = label.into();
        let ad_inv = ad.clone().try_inverse().ok_or_else(|| Error::Axiom {
            axiom: "Ad invertibility",
            detail: format!("Ad of extra generator '{label}' is singular"),
        })?;
        Ok(ExtraGenerator { label, ad, ad_inv })
    }
}

/// A color Lie algebra together with representatives of the non-identity
/// components of `G₀` and their adjoint actions.
#[derive(Clone, Debug)]
pub struct HcPair {
    pub algebra: ColorLieAlgebra,
    pub extras: Vec<ExtraGenerator>,
}

impl HcPair {
    /// Validates that every extra `Ad` matrix is a degree-preserving bracket
    /// automorphism.
    pub fn new(algebra: ColorLieAlgebra, extras: Vec<ExtraGenerator>) -> Result<Self> {
        for e in &extras {
            let (grade, br) = algebra.automorphism_residual(&e.ad);
            if grade > AD_TOL {
                return Err(Error::Axiom {
                    axiom: "Ad preserves the grading",
                    detail: format!("extra generator '{}': off-sector mass {grade:e}", e.label),
                });
            }
            if br > AD_TOL {
                return Err(Error::Axiom {
                    axiom: "Ad is a bracket automorphism",
                    detail: format!("extra generator '{}': residual {br:e}", e.label),
                });
            }
        }
        Ok(HcPair { algebra, extras })
    }

    /// The pair with only the identity component.
    pub fn connected(algebra: ColorLieAlgebra) -> Self {
        HcPair {
            algebra,
            extras: Vec::new(),
        }
    }

    fn check_exp_basis(&self, basis: usize) -> Result<()> {
        if basis >= self.algebra.dim() || !self.algebra.degree(basis).is_zero() {
            return Err(Error::Group {
                what: "exponential (basis element must lie in g_0)",
                generator: format!("exp(x{basis})"),
            });
        }
        Ok(())
    }

    /// `Ad(g)` as a real matrix on the algebra.
    pub fn ad(&self, g: &GroupElement) -> Result<RMat> {
        let n = self.algebra.dim();
        let mut m = RMat::identity(n, n);
        for f in g.factors() {
            let a = match f {
                GroupGen::Extra { index, inverse } => {
                    let e = self.extras.get(*index).ok_or_else(|| Error::Group {
                        what: "Ad",
                        generator: format!("g{index}"),
                    })?;
                    if *inverse {
                        e.ad_inv.clone()
                    } else {
                        e.ad.clone()
                    }
                }
                GroupGen::Exp { basis, t } => {
                    self.check_exp_basis(*basis)?;
                    linalg::expm_real(&(self.algebra.ad_matrix(*basis) * *t))
                }
            };
            m *= a;
        }
        Ok(m)
    }
}

/// Shared access to representation data for complete and partial reps.
pub trait RepData: Sync {
    fn pair(&self) -> &HcPair;
    fn space(&self) -> &GammaInnerSpace;
    fn pi_extra(&self) -> &[CMat];
    /// `ρ(x_i)`, or an error when the sector of `x_i` is not supplied.
    fn rho_matrix(&self, i: usize) -> Result<&CMat>;
}

/// A unitary representation `(π, ρ, ℋ)` of a pair.
#[derive(Clone, Debug)]
pub struct UnitaryRep {
    pub pair: HcPair,
    pub space: GammaInnerSpace,
    pub rho: Vec<HomogeneousMap>,
    /// `π` of each extra generator.
    pub pi: Vec<CMat>,
}

/// Representation data on `g₀` and the odd-like sectors only.
#[derive(Clone, Debug)]
pub struct PartialRep {
    pub pair: HcPair,
    pub space: GammaInnerSpace,
    pub rho: Vec<Option<HomogeneousMap>>,
    pub pi: Vec<CMat>,
}

fn check_shapes(pair: &HcPair, space: &GammaInnerSpace, pi: &[CMat]) -> Result<()> {
    if pair.algebra.rank() != space.rank() {
        return Err(Error::RankMismatch(pair.algebra.rank(), space.rank()));
    }
    if pi.len() != pair.extras.len() {
        return Err(Error::Shape(format!(
            "{} pi matrices for {} extra generators",
            pi.len(),
            pair.extras.len()
        )));
    }
    let n = space.space.total_dim();
    for (k, p) in pi.iter().enumerate() {
        if p.shape() != (n, n) {
            return Err(Error::Shape(format!("pi of extra generator {k} is {:?}, space has dimension {n}", p.shape())));
        }
    }
    Ok(())
}

fn homogeneous_rho(pair: &HcPair, space: &GradedSpace, i: usize, m: CMat) -> Result<HomogeneousMap> {
    HomogeneousMap::from_matrix(space, space, pair.algebra.degree(i), m, 1e-12).map_err(|e| match e {
        Error::NotHomogeneous { residual, .. } => Error::Check {
            operation: "representation data".into(),
            detail: format!(
                "rho({}) is not homogeneous of degree {} (off-block residual {residual:e})",
                pair.algebra.label(i),
                pair.algebra.degree(i)
            ),
        },
        other => other,
    })
}

impl UnitaryRep {
    /// Assembles a representation; only shapes and homogeneity are checked
    /// here, the axioms by [`check_unitary_rep`].
    pub fn new(pair: HcPair, space: GammaInnerSpace, rho: Vec<CMat>, pi: Vec<CMat>) -> Result<Self> {
        check_shapes(&pair, &space, &pi)?;
        if rho.len() != pair.algebra.dim() {
            return Err(Error::Shape(format!(
                "{} rho matrices for an algebra of dimension {}",
                rho.len(),
                pair.algebra.dim()
            )));
        }
        let rho = rho
            .into_iter()
            .enumerate()
            .map(|(i, m)| homogeneous_rho(&pair, &space.space, i, m))
            .collect::<Result<Vec<_>>>()?;
        Ok(UnitaryRep { pair, space, rho, pi })
    }

    pub fn dim(&self) -> usize {
        self.space.space.total_dim()
    }

    pub fn algebra(&self) -> &ColorLieAlgebra {
        &self.pair.algebra
    }

    /// Drops `ρ` on the nonzero even-like sectors.
    pub fn restrict(&self) -> PartialRep {
        let l = &self.pair.algebra;
        PartialRep {
            pair: self.pair.clone(),
            space: self.space.clone(),
            rho: self
                .rho
                .iter()
                .enumerate()
                .map(|(i, m)| supplied_sector(l.degree(i)).then(|| m.clone()))
                .collect(),
            pi: self.pi.clone(),
        }
    }

    /// The representation transported along an invertible degree-preserving
    /// `S`: `ρ' = S ρ S⁻¹`, `π' = S π S⁻¹`, Gram `S^{-H} G S⁻¹`, so that `S`
    /// is an isometric intertwiner.
    pub fn transport(&self, s: &CMat) -> Result<UnitaryRep> {
        let sp = &self.space.space;
        let residual = off_degree_residual(sp, sp, Degree::zero(sp.rank()), s);
        if residual > 1e-12 {
            return Err(Error::NotHomogeneous {
                degree: Degree::zero(sp.rank()),
                residual,
            });
        }
        let sinv = s
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Invalid("transport matrix is singular".into()))?;
        let g = sinv.adjoint() * self.space.ordinary_gram() * &sinv;
        let grams = Degree::all(sp.rank())
            .map(|a| {
                let r = sp.range(a);
                g.view((r.start, r.start), (r.len(), r.len())).into_owned()
            })
            .collect();
        let space = GammaInnerSpace::new(sp.clone(), grams, self.space.twist())?;
        let rho = self.rho.iter().map(|m| s * &m.matrix * &sinv).collect();
        let pi = self.pi.iter().map(|m| s * m * &sinv).collect();
        UnitaryRep::new(self.pair.clone(), space, rho, pi)
    }

    /// Compression to a `ρ`- and `π`-invariant graded subspace spanned by
    /// the columns of `q`, which must be homogeneous and orthonormal for
    /// the ordinary inner product. The result has unit Grams.
    pub fn compress(&self, q: &CMat, degrees: &[Degree], tol: f64) -> Result<UnitaryRep> {
        let rank = self.space.rank();
        let mut order: Vec<usize> = (0..q.ncols()).collect();
        order.sort_by_key(|&j| degrees[j]);
        let qs = CMat::from_fn(q.nrows(), q.ncols(), |r, c| q[(r, order[c])]);
        let mut dims = vec![0; 1usize << rank];
        for &j in &order {
            dims[degrees[j].index()] += 1;
        }
        let sub = GradedSpace::new(rank, dims)?;
        let g = self.space.ordinary_gram();
        let proj = qs.adjoint() * &g;
        let compress = |m: &CMat| -> Result<CMat> {
            let image = m * &qs;
            let inside = &qs * (&proj * &image);
            let escape = rel_residual(&image, &inside);
            if escape > tol {
                return Err(Error::Invalid(format!(
                    "subspace is not invariant (escape residual {escape:e})"
                )));
            }
            Ok(&proj * image)
        };
        let rho = self.rho.iter().map(|m| compress(&m.matrix)).collect::<Result<Vec<_>>>()?;
        let pi = self.pi.iter().map(compress).collect::<Result<Vec<_>>>()?;
        let space = GammaInnerSpace::new(
            sub.clone(),
            sub.dims().iter().map(|&d| eye(d)).collect(),
            self.space.twist(),
        )?;
        UnitaryRep::new(self.pair.clone(), space, rho, pi)
    }

    pub fn direct_sum(&self, other: &UnitaryRep) -> Result<UnitaryRep> {
        let space = self.space.direct_sum(&other.space)?;
        let (left, right) = self.space.space.sum_embeddings(&other.space.space);
        let n = space.space.total_dim();
        let embed = |a: &CMat, b: &CMat| {
            let mut m = CMat::zeros(n, n);
            for (i, &li) in left.iter().enumerate() {
                for (j, &lj) in left.iter().enumerate() {
                    m[(li, lj)] = a[(i, j)];
                }
            }
            for (i, &ri) in right.iter().enumerate() {
                for (j, &rj) in right.iter().enumerate() {
                    m[(ri, rj)] = b[(i, j)];
                }
            }
            m
        };
        let rho = self
            .rho
            .iter()
            .zip(&other.rho)
            .map(|(a, b)| embed(&a.matrix, &b.matrix))
            .collect();
        let pi = self.pi.iter().zip(&other.pi).map(|(a, b)| embed(a, b)).collect();
        UnitaryRep::new(self.pair.clone(), space, rho, pi)
    }

    /// Tensor product with the Koszul rule
    /// `ρ(x)(v⊗w) = ρ₁(x)v⊗w + β(|x|,|v|) v⊗ρ₂(x)w`, `π = π₁⊗π₂`.
    pub fn tensor(&self, other: &UnitaryRep) -> Result<UnitaryRep> {
        let (space, _) = crate::graded_linear::tensor_inner(&self.space, &other.space)?;
        let id1 = HomogeneousMap::identity(&self.space.space);
        let id2 = HomogeneousMap::identity(&other.space.space);
        let mut rho = Vec::with_capacity(self.rho.len());
        for (a, b) in self.rho.iter().zip(&other.rho) {
            let m = tensor_map(a, &id2)?.matrix + tensor_map(&id1, b)?.matrix;
            rho.push(m);
        }
        let mut pi = Vec::with_capacity(self.pi.len());
        let tp = tensor_space(&self.space.space, &other.space.space)?;
        for (a, b) in self.pi.iter().zip(&other.pi) {
            let fa = HomogeneousMap::from_matrix(&tp.left, &tp.left, Degree::zero(self.space.rank()), a.clone(), 1e-12)?;
            let fb = HomogeneousMap::from_matrix(&tp.right, &tp.right, Degree::zero(self.space.rank()), b.clone(), 1e-12)?;
            pi.push(tensor_map(&fa, &fb)?.matrix);
        }
        UnitaryRep::new(self.pair.clone(), space, rho, pi)
    }
}

/// Sectors a pre-representation supplies: `g₀` and the odd-like ones.
pub fn supplied_sector(a: Degree) -> bool {
    a.is_zero() || a.is_odd_like()
}

impl PartialRep {
    /// `rho[i]` must be `Some` exactly when it is supplied; missing entries in
    /// supplied sectors are reported by [`check_pre_rep`].
    pub fn new(pair: HcPair, space: GammaInnerSpace, rho: Vec<Option<CMat>>, pi: Vec<CMat>) -> Result<Self> {
        check_shapes(&pair, &space, &pi)?;
        if rho.len() != pair.algebra.dim() {
            return Err(Error::Shape(format!(
                "{} rho entries for an algebra of dimension {}",
                rho.len(),
                pair.algebra.dim()
            )));
        }
        let rho = rho
            .into_iter()
            .enumerate()
            .map(|(i, m)| m.map(|m| homogeneous_rho(&pair, &space.space, i, m)).transpose())
            .collect::<Result<Vec<_>>>()?;
        Ok(PartialRep { pair, space, rho, pi })
    }
}

impl RepData for UnitaryRep {
    fn pair(&self) -> &HcPair {
        &self.pair
    }
    fn space(&self) -> &GammaInnerSpace {
        &self.space
    }
    fn pi_extra(&self) -> &[CMat] {
        &self.pi
    }
    fn rho_matrix(&self, i: usize) -> Result<&CMat> {
        Ok(&self.rho[i].matrix)
    }
}

impl RepData for PartialRep {
    fn pair(&self) -> &HcPair {
        &self.pair
    }
    fn space(&self) -> &GammaInnerSpace {
        &self.space
    }
    fn pi_extra(&self) -> &[CMat] {
        &self.pi
    }
    fn rho_matrix(&self, i: usize) -> Result<&CMat> {
        self.rho[i]
            .as_ref()
            .map(|m| &m.matrix)
            .ok_or_else(|| Error::UndefinedSector {
                label: self.pair.algebra.label(i).to_string(),
                degree: self.pair.algebra.degree(i),
            })
    }
}

/// `ρ` on a word, as the product of the letter matrices.
pub fn rho_word<R: RepData + ?Sized>(r: &R, word: &[usize]) -> Result<CMat> {
    let n = r.space().space.total_dim();
    let mut m = eye(n);
    for &i in word {
        m *= r.rho_matrix(i)?;
    }
    Ok(m)
}

/// The multiplicative extension of `ρ` to `𝔘(g_ℂ)`.
pub fn rho_env<R: RepData + ?Sized>(r: &R, d: &EnvElement) -> Result<CMat> {
    let n = r.space().space.total_dim();
    let mut out = CMat::zeros(n, n);
    for (m, c) in d.terms() {
        out += rho_word(r, m.word())? * *c;
    }
    Ok(out)
}

/// `π(g)`, with `π(exp t x) = exp(t ρ(x))` on the identity component.
pub fn pi_matrix<R: RepData + ?Sized>(r: &R, g: &GroupElement) -> Result<CMat> {
    let n = r.space().space.total_dim();
    let mut m = eye(n);
    for f in g.factors() {
        let p = match f {
            GroupGen::Extra { index, inverse } => {
                let p = r.pi_extra().get(*index).ok_or_else(|| Error::Group {
                    what: "pi",
                    generator: format!("g{index}"),
                })?;
                if *inverse {
                    p.clone().try_inverse().ok_or_else(|| Error::Group {
                        what: "inverse of pi",
                        generator: format!("g{index}"),
                    })?
                } else {
                    p.clone()
                }
            }
            GroupGen::Exp { basis, t } => {
                r.pair().check_exp_basis(*basis)?;
                linalg::expm(&(r.rho_matrix(*basis)? * C64::new(*t, 0.0)))
            }
        };
        m *= p;
    }
    Ok(m)
}

/// `ρ̃(g, D) = π(g) ρ(D)`.
pub fn rho_tilde<R: RepData + ?Sized>(r: &R, s: &MonoidElement) -> Result<CMat> {
    Ok(pi_matrix(r, &s.group)? * rho_env(r, &s.env)?)
}

/// `φ_{v,w}(g, D) = (π(g) ρ(D) v, w)`.
pub fn matrix_coefficient<R: RepData + ?Sized>(r: &R, v: &CVec, w: &CVec, s: &MonoidElement) -> Result<C64> {
    let image = rho_tilde(r, s)? * v;
    Ok(r.space().inner(&image, w))
}

/// `ρ(Σ_k a_k x_k) = Σ_k a_k ρ(x_k)` over the basis elements with nonzero
/// coefficient.
fn rho_of_coords<R: RepData + ?Sized>(r: &R, a: &[f64]) -> Result<CMat> {
    let n = r.space().space.total_dim();
    let mut out = CMat::zeros(n, n);
    for (k, &c) in a.iter().enumerate() {
        if c.abs() > 1e-15 {
            out += r.rho_matrix(k)? * C64::new(c, 0.0);
        }
    }
    Ok(out)
}

struct Worst {
    residual: f64,
    detail: Option<String>,
}

impl Worst {
    fn new() -> Self {
        Worst {
            residual: 0.0,
            detail: None,
        }
    }
    fn see(&mut self, residual: f64, detail: impl FnOnce() -> String) {
        if residual > self.residual || residual.is_nan() {
            self.residual = residual;
            self.detail = Some(detail());
        }
    }
    fn record(self, r: &mut Report, name: &str, tol: f64) {
        r.check_with(name, self.residual, tol, self.detail);
    }
}

/// Runs the representation checks on the basis indices accepted by `keep`.
fn check_rep_axioms<R: RepData + ?Sized>(r: &R, tol: f64, keep: &dyn Fn(usize) -> bool, mut report: Report, labels: [&str; 5]) -> Report {
    let pair = r.pair();
    let l = &pair.algebra;
    let h = r.space();
    let sp = &h.space;
    let g = h.ordinary_gram();
    let n = l.dim();
    let idx: Vec<usize> = (0..n).filter(|&i| keep(i)).collect();

    // (R1): unitarity and grading of π on the extra generators
    let mut unit = Worst::new();
    let mut grade = Worst::new();
    for (k, p) in r.pi_extra().iter().enumerate() {
        unit.see(rel_residual(&(p.adjoint() * &g * p), &g), || format!("extra generator {k}"));
        grade.see(off_degree_residual(sp, sp, Degree::zero(sp.rank()), p), || {
            format!("extra generator {k}")
        });
    }
    unit.record(&mut report, &format!("{}: pi(g) unitary", labels[0]), tol);
    grade.record(&mut report, &format!("{}: pi(g) preserves the grading", labels[0]), tol);

    // representation property on pairs whose bracket stays in the kept sectors
    let mut rep = Worst::new();
    let mut missing = Vec::new();
    for &i in &idx {
        if r.rho_matrix(i).is_err() {
            missing.push(l.label(i).to_string());
        }
    }
    if !report.require(
        format!("{}: rho supplied on every required basis element", labels[1]),
        missing.is_empty(),
        (!missing.is_empty()).then(|| format!("missing: {}", missing.join(", "))),
    ) {
        return report;
    }
    let pairs: Vec<(usize, usize)> = idx
        .iter()
        .flat_map(|&i| idx.iter().map(move |&j| (i, j)))
        .filter(|&(i, j)| l.bracket_basis(i, j).iter().all(|&(k, _)| keep(k)))
        .collect();
    let results: Vec<(f64, usize, usize)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let ri = r.rho_matrix(i).unwrap();
            let rj = r.rho_matrix(j).unwrap();
            let b = l.degree(i).commutation(l.degree(j)).to_c64();
            let lhs = ri * rj - rj * ri * b;
            let mut rhs = CMat::zeros(lhs.nrows(), lhs.ncols());
            for &(k, c) in l.bracket_basis(i, j) {
                rhs += r.rho_matrix(k).unwrap() * C64::new(c, 0.0);
            }
            (rel_residual(&lhs, &rhs), i, j)
        })
        .collect();
    for (res, i, j) in results {
        rep.see(res, || format!("pair ({}, {})", l.label(i), l.label(j)));
    }
    rep.record(&mut report, &format!("{}: rho([x,y]) = rho(x)rho(y) - beta rho(y)rho(x)", labels[1]), tol);

    // skew-adjointness for the ordinary adjoint on g_0 and for † everywhere
    let mut skew0 = Worst::new();
    let mut skew = Worst::new();
    for &i in &idx {
        let m = &r.rho_matrix(i).unwrap();
        let hm = HomogeneousMap {
            source: sp.clone(),
            target: sp.clone(),
            degree: l.degree(i),
            matrix: (*m).clone(),
        };
        if l.degree(i).is_zero() {
            let s = star_adjoint(h, &hm).map(|s| rel_residual(&s.matrix, &-(*m).clone()));
            skew0.see(s.unwrap_or(f64::INFINITY), || format!("x = {}", l.label(i)));
        }
        let d = dagger_adjoint(h, &hm).map(|d| rel_residual(&d.matrix, &-(*m).clone()));
        skew.see(d.unwrap_or(f64::INFINITY), || format!("x = {}", l.label(i)));
    }
    skew0.record(&mut report, &format!("{}: rho(x)* = -rho(x) on g_0, so pi(exp tx) = exp(t rho(x)) is unitary", labels[2]), tol);
    skew.record(&mut report, &format!("{}: rho(x)^dagger = -rho(x)", labels[3]), tol);

    // equivariance under extra generators and sampled one-parameter subgroups
    let mut equi = Worst::new();
    let mut samples: Vec<GroupElement> = (0..pair.extras.len()).map(GroupElement::extra).collect();
    for x0 in l.sector(Degree::zero(l.rank())) {
        for t in R5_TIMES {
            samples.push(GroupElement::exp(x0, t));
        }
    }
    for gsample in &samples {
        let (pi, ad) = match (pi_matrix(r, gsample), pair.ad(gsample)) {
            (Ok(p), Ok(a)) => (p, a),
            _ => {
                equi.see(f64::INFINITY, || format!("g = {gsample}: pi or Ad unavailable"));
                continue;
            }
        };
        let pinv = match pi.clone().try_inverse() {
            Some(p) => p,
            None => {
                equi.see(f64::INFINITY, || format!("g = {gsample}: pi singular"));
                continue;
            }
        };
        for &i in &idx {
            let lhs = &pi * r.rho_matrix(i).unwrap() * &pinv;
            let col: Vec<f64> = ad.column(i).iter().copied().collect();
            match rho_of_coords(r, &col) {
                Ok(rhs) => equi.see(rel_residual(&lhs, &rhs), || format!("g = {gsample}, x = {}", l.label(i))),
                Err(_) => equi.see(f64::INFINITY, || format!("g = {gsample}, x = {}: Ad(g)x leaves the supplied sectors", l.label(i))),
            }
        }
    }
    equi.record(&mut report, &format!("{}: pi(g) rho(x) pi(g)^-1 = rho(Ad(g)x)", labels[4]), tol);
    report
}

/// Checks (R1)–(R5) in their finite-dimensional form, using the phase of
/// the representation space (twisted when the space carries a twist).
pub fn check_unitary_rep(r: &UnitaryRep, tol: f64) -> Report {
    let mut report = Report::new("check_unitary_rep");
    report.note("(R3): pi on the identity component is exp(t rho(x)), x in g_0; holds by construction");
    if !r.space.twist().is_trivial() {
        report.note(format!("phases twisted by {:?}", r.space.twist()));
    }
    check_rep_axioms(r, tol, &|_| true, report, ["(R1)", "(R2)", "(R3)", "(R4)", "(R5)"])
}

/// Checks (PR1)–(PR6) on `g₀` and the odd-like sectors.
pub fn check_pre_rep(p: &PartialRep, tol: f64) -> Report {
    let mut report = Report::new("check_pre_rep");
    report.note("(PR2): B = H in finite dimensions; domain conditions are vacuous");
    report.note("(PR4): essential skew-adjointness reduces to rho(x)* = -rho(x) on g_0");
    let l = &p.pair.algebra;
    let keep = |i: usize| supplied_sector(l.degree(i));
    let extra: Vec<String> = (0..l.dim())
        .filter(|&i| !keep(i) && p.rho[i].is_some())
        .map(|i| l.label(i).to_string())
        .collect();
    if !extra.is_empty() {
        report.note(format!(
            "rho supplied on even-like sectors is ignored by this check: {}",
            extra.join(", ")
        ));
    }
    check_rep_axioms(p, tol, &keep, report, ["(PR1)", "(PR3)", "(PR4)", "(PR5)", "(PR6)"])
}

/// Per-element record of the extension.
#[derive(Clone, Debug, Serialize)]
pub struct ExtensionRecord {
    pub label: String,
    pub sector: Degree,
    pub terms: [usize; 2],
    pub dependence_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Extension {
    pub records: Vec<ExtensionRecord>,
    pub report: Report,
}

/// `Σ c (ρ(y)ρ(z) − β(b,c) ρ(z)ρ(y))` for a bracket decomposition.
fn extension_formula(p: &PartialRep, terms: &[(f64, usize, usize)]) -> Result<CMat> {
    let l = &p.pair.algebra;
    let n = p.space.space.total_dim();
    let mut out = CMat::zeros(n, n);
    for &(c, y, z) in terms {
        let ry = p.rho_matrix(y)?;
        let rz = p.rho_matrix(z)?;
        let b = l.degree(y).commutation(l.degree(z)).to_c64();
        out += (ry * rz - rz * ry * b) * C64::new(c, 0.0);
    }
    Ok(out)
}

/// Extends a pre-representation to the nonzero even-like sectors by the
/// bracket formula, verifying decomposition independence and the result.
pub fn stability_extend(p: &PartialRep, tol: f64) -> Result<(UnitaryRep, Extension)> {
    let l = &p.pair.algebra;
    let perf = check_perfectness(l);
    if let Some(bad) = perf.first_failure() {
        return Err(Error::NotPerfect {
            sector: bad.sector,
            rank: bad.rank,
            dim: bad.dim,
        });
    }
    let pre = check_pre_rep(p, tol);
    if let Some(bad) = pre.failures().next() {
        return Err(Error::Check {
            operation: "stability_extend".into(),
            detail: format!(
                "input is not a pre-representation: {} (residual {:e}{})",
                bad.name,
                bad.residual,
                bad.detail.as_ref().map(|d| format!(", {d}")).unwrap_or_default()
            ),
        });
    }
    let targets: Vec<usize> = (0..l.dim()).filter(|&i| !supplied_sector(l.degree(i))).collect();
    let extended: Vec<Result<(usize, CMat, ExtensionRecord)>> = targets
        .par_iter()
        .map(|&i| {
            let x = l.basis_vector(i);
            let d1 = decompose_odd(l, &x, DecompositionStrategy::MinNorm, 1e-9)?;
            let d2 = decompose_odd(l, &x, DecompositionStrategy::ReversedPivot, 1e-9)?;
            let m1 = extension_formula(p, &d1.terms)?;
            let m2 = extension_formula(p, &d2.terms)?;
            let dep = rel_residual(&m1, &m2);
            if dep > tol {
                return Err(Error::DecompositionDependence {
                    sector: l.degree(i),
                    residual: dep,
                    tol,
                });
            }
            Ok((
                i,
                m1,
                ExtensionRecord {
                    label: l.label(i).to_string(),
                    sector: l.degree(i),
                    terms: [d1.terms.len(), d2.terms.len()],
                    dependence_residual: dep,
                },
            ))
        })
        .collect();
    let n = p.space.space.total_dim();
    let mut rho: Vec<CMat> = (0..l.dim())
        .map(|i| p.rho_matrix(i).cloned().unwrap_or_else(|_| CMat::zeros(n, n)))
        .collect();
    let mut records = Vec::new();
    let mut report = Report::new("stability_extend");
    report.absorb("perfectness", perf.report);
    for item in extended {
        let (i, m, rec) = item?;
        rho[i] = m;
        report.check(
            format!("decomposition independence for {}", rec.label),
            rec.dependence_residual,
            tol,
        );
        records.push(rec);
    }
    if targets.is_empty() {
        report.note("no nonzero even-like sectors: extension is the identity operation");
    }
    let rep = UnitaryRep::new(p.pair.clone(), p.space.clone(), rho, p.pi.clone())?;
    let full = check_unitary_rep(&rep, tol);
    let failed = full.failures().next().cloned();
    report.absorb("extended representation", full);
    if let Some(bad) = failed {
        return Err(Error::Check {
            operation: "stability_extend".into(),
            detail: format!("extension fails {} (residual {:e})", bad.name, bad.residual),
        });
    }
    Ok((rep, Extension { records, report }))
}

/// The α-twist: `ρ'(x) = χ(|x|) ρ(x)` on the same ordinary Grams, with the
/// space's phase twisted by `χ`.
pub fn twist_rep(r: &UnitaryRep, chi: &Character) -> UnitaryRep {
    let rho = r
        .rho
        .iter()
        .map(|m| m.scale(chi.eval(m.degree).to_c64()))
        .collect();
    UnitaryRep {
        pair: r.pair.clone(),
        space: r.space.twisted(chi),
        rho,
        pi: r.pi.clone(),
    }
}

/// Checks that `t` is a grading-preserving intertwiner from `r1` to `r2`.
pub fn check_intertwiner(t: &CMat, r1: &UnitaryRep, r2: &UnitaryRep, tol: f64) -> Report {
    let mut rep = Report::new("check_intertwiner");
    let (s1, s2) = (&r1.space.space, &r2.space.space);
    if t.shape() != (s2.total_dim(), s1.total_dim()) {
        rep.require("shape", false, Some(format!("{:?}", t.shape())));
        return rep;
    }
    rep.check("grading preserved", off_degree_residual(s1, s2, Degree::zero(s1.rank()), t), tol);
    let mut w = Worst::new();
    for (i, (a, b)) in r1.rho.iter().zip(&r2.rho).enumerate() {
        w.see(rel_residual(&(t * &a.matrix), &(&b.matrix * t)), || {
            format!("x = {}", r1.pair.algebra.label(i))
        });
    }
    w.record(&mut rep, "T rho1(x) = rho2(x) T", tol);
    let mut w = Worst::new();
    for (k, (a, b)) in r1.pi.iter().zip(&r2.pi).enumerate() {
        w.see(rel_residual(&(t * a), &(b * t)), || format!("extra generator {k}"));
    }
    w.record(&mut rep, "T pi1(g) = pi2(g) T", tol);
    rep
}

/// The 1-dimensional trivial representation on `ℂ` in degree 0.
pub fn trivial_rep(pair: &HcPair) -> Result<UnitaryRep> {
    let rank = pair.algebra.rank();
    let space = GammaInnerSpace::standard(GradedSpace::trivial(rank));
    let rho = vec![CMat::zeros(1, 1); pair.algebra.dim()];
    let pi = vec![CMat::from_element(1, 1, ONE); pair.extras.len()];
    UnitaryRep::new(pair.clone(), space, rho, pi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::color_lie::glv_compact;
    use crate::linalg::{c, I, ZERO};

    fn clifford_pair() -> HcPair {
        let z = Degree::zero(1);
        let e = Degree::unit(1, 1);
        // [y, y] = c
        let alg = ColorLieAlgebra::new(1, vec![("c".into(), z), ("y".into(), e)], &[(1, 1, 0, 1.0)]).unwrap();
        HcPair::connected(alg)
    }

    fn clifford_rep(a: C64, b: C64) -> UnitaryRep {
        let pair = clifford_pair();
        let space = GammaInnerSpace::standard(GradedSpace::new(1, vec![1, 1]).unwrap());
        let ry = CMat::from_row_slice(2, 2, &[ZERO, a, b, ZERO]);
        let rc = &ry * &ry * c(2.0, 0.0);
        UnitaryRep::new(pair, space, vec![rc, ry], vec![]).unwrap()
    }

    #[test]
    fn group_words_reduce() {
        let g = GroupElement::extra(0).mul(&GroupElement::exp(1, 0.5));
        assert!(g.mul(&g.inverse()).is_identity());
        let e = GroupElement::exp(2, 0.25).mul(&GroupElement::exp(2, -0.25));
        assert!(e.is_identity());
    }

    #[test]
    fn trivial_rep_passes() {
        let r = trivial_rep(&clifford_pair()).unwrap();
        // ρ ≡ 0 violates nothing but the bracket [y,y] = c maps to 0 = 0
        assert!(check_unitary_rep(&r, 1e-12).passed);
    }

    #[test]
    fn clifford_constraint() {
        // (R4) at the odd degree: i·ρ(y)^H = −ρ(y) forces b = −i conj(a)
        let a = c(0.6, -0.8);
        let ok = clifford_rep(a, -I * a.conj());
        let rep = check_unitary_rep(&ok, 1e-12);
        assert!(rep.passed, "{rep}");
        let bad = clifford_rep(a, I * a.conj());
        let rep = check_unitary_rep(&bad, 1e-12);
        assert!(!rep.passed);
        assert!(rep.failures().any(|f| f.name.starts_with("(R4)")));
    }

    #[test]
    fn sign_mutation_caught() {
        let v = GradedSpace::new(1, vec![1, 1]).unwrap();
        let (alg, mats) = glv_compact(&v).unwrap();
        let pair = HcPair::connected(alg);
        let mut rho = mats.clone();
        let r = UnitaryRep::new(pair.clone(), GammaInnerSpace::standard(v.clone()), rho.clone(), vec![]).unwrap();
        assert!(check_unitary_rep(&r, 1e-12).passed);
        rho[3][(1, 0)] = -rho[3][(1, 0)];
        let bad = UnitaryRep::new(pair, GammaInnerSpace::standard(v), rho, vec![]).unwrap();
        let rep = check_unitary_rep(&bad, 1e-12);
        assert!(!rep.passed);
        assert!(rep.failures().all(|f| f.detail.is_some()));
    }

    #[test]
    fn twist_twice_restores() {
        let r = clifford_rep(ONE, -I);
        let chi = Character::from_mask(Degree::unit(1, 1));
        let back = twist_rep(&twist_rep(&r, &chi), &chi);
        for (a, b) in r.rho.iter().zip(&back.rho) {
            assert_eq!(a.matrix, b.matrix);
        }
        assert!(back.space.twist().is_trivial());
    }
}
