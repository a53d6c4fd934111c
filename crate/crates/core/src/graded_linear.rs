//! Γ-graded complex vector spaces, homogeneous maps, the braiding, and
//! Γ-inner product spaces with their two adjoints.
//!
//! Conventions: a vector lives in the canonical basis of its space (degree
//! components in lex order, then component index). The ordinary inner
//! product is `(v, w) = w^H G v`, linear in the first argument, and the
//! Γ-form on degree `a` is `⟨v, w⟩ = conj(α(a)) (v, w)`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grading::{alpha, Character, Degree};
use crate::linalg::{self, eye, frob, rel_residual, CMat, CVec, C64, ZERO};
use crate::report::Report;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GradedSpace {
    rank: u8,
    dims: Vec<usize>,
    offsets: Vec<usize>,
}

impl GradedSpace {
    /// `dims[a.index()]` is the dimension of the degree-`a` component.
    pub fn new(rank: u8, dims: Vec<usize>) -> Result<Self> {
        if rank == 0 || rank > crate::grading::MAX_RANK {
            return Err(Error::InvalidRank(rank as usize));
        }
        if dims.len() != 1usize << rank {
            return Err(Error::Shape(format!(
                "graded space of rank {rank} needs {} component dimensions, got {}",
                1usize << rank,
                dims.len()
            )));
        }
        let mut offsets = Vec::with_capacity(dims.len() + 1);
        let mut acc = 0;
        for &d in &dims {
            offsets.push(acc);
            acc += d;
        }
        offsets.push(acc);
        Ok(GradedSpace {
            rank,
            dims,
            offsets,
        })
    }

    pub fn from_components(rank: u8, comps: &[(Degree, usize)]) -> Result<Self> {
        let mut dims = vec![0; 1usize << rank];
        for &(a, d) in comps {
            if a.rank() != rank {
                return Err(Error::RankMismatch(a.rank(), rank));
            }
            dims[a.index()] += d;
        }
        Self::new(rank, dims)
    }

    /// The unit object: `ℂ` in degree 0.
    pub fn trivial(rank: u8) -> Self {
        Self::from_components(rank, &[(Degree::zero(rank), 1)]).unwrap()
    }

    pub fn rank(&self) -> u8 {
        self.rank
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, a: Degree) -> usize {
        self.dims[a.index()]
    }

    pub fn total_dim(&self) -> usize {
        self.offsets[self.dims.len()]
    }

    pub fn offset(&self, a: Degree) -> usize {
        self.offsets[a.index()]
    }

    pub fn range(&self, a: Degree) -> std::ops::Range<usize> {
        self.offsets[a.index()]..self.offsets[a.index() + 1]
    }

    /// Degree of the `k`-th canonical basis vector.
    pub fn degree_of(&self, k: usize) -> Degree {
        assert!(k < self.total_dim());
        let idx = self.offsets.partition_point(|&o| o <= k) - 1;
        Degree::from_index(self.rank, idx)
    }

    pub fn basis_degrees(&self) -> Vec<Degree> {
        (0..self.total_dim()).map(|k| self.degree_of(k)).collect()
    }

    /// Degrees with a nonzero component.
    pub fn support(&self) -> impl Iterator<Item = Degree> + '_ {
        Degree::all(self.rank).filter(move |a| self.dim(*a) > 0)
    }

    pub fn project(&self, v: &CVec, a: Degree) -> CVec {
        let mut out = CVec::zeros(v.len());
        for k in self.range(a) {
            out[k] = v[k];
        }
        out
    }

    /// The degree of `v` when it is homogeneous up to `tol` relative to its
    /// norm; `None` for mixed vectors. The zero vector reports degree 0.
    pub fn homogeneous_degree(&self, v: &CVec, tol: f64) -> Option<Degree> {
        let total = v.norm();
        if total == 0.0 {
            return Some(Degree::zero(self.rank));
        }
        let mut found = None;
        for a in self.support() {
            let part: f64 = self.range(a).map(|k| v[k].norm_sqr()).sum::<f64>().sqrt();
            if part > tol * total {
                if found.is_some() {
                    return None;
                }
                found = Some(a);
            }
        }
        found
    }

    pub fn direct_sum(&self, other: &GradedSpace) -> Result<GradedSpace> {
        same_rank(self.rank, other.rank)?;
        GradedSpace::new(
            self.rank,
            self.dims.iter().zip(&other.dims).map(|(a, b)| a + b).collect(),
        )
    }

    /// Embedding of the canonical basis of `self` into `self ⊕ other`
    /// (first summand) and of `other` (second summand), as index maps.
    pub fn sum_embeddings(&self, other: &GradedSpace) -> (Vec<usize>, Vec<usize>) {
        let sum = self.direct_sum(other).unwrap();
        let mut left = vec![0; self.total_dim()];
        let mut right = vec![0; other.total_dim()];
        for a in Degree::all(self.rank) {
            let base = sum.offset(a);
            for (i, k) in self.range(a).enumerate() {
                left[k] = base + i;
            }
            for (i, k) in other.range(a).enumerate() {
                right[k] = base + self.dim(a) + i;
            }
        }
        (left, right)
    }
}

fn same_rank(a: u8, b: u8) -> Result<()> {
    if a != b {
        Err(Error::RankMismatch(a, b))
    } else {
        Ok(())
    }
}

/// `V ⊗ W` together with the basis pair behind each tensor basis vector.
#[derive(Clone, Debug)]
pub struct TensorProduct {
    pub left: GradedSpace,
    pub right: GradedSpace,
    pub space: GradedSpace,
    /// `pairs[k] = (i, j)`: basis vector `k` is `v_i ⊗ w_j`.
    pub pairs: Vec<(usize, usize)>,
    index: Vec<usize>,
}

impl TensorProduct {
    pub fn index_of(&self, i: usize, j: usize) -> usize {
        self.index[i * self.right.total_dim() + j]
    }
}

/// Basis order: total degree, then the left degree `b`, then left index,
/// then right index.
pub fn tensor_space(v: &GradedSpace, w: &GradedSpace) -> Result<TensorProduct> {
    same_rank(v.rank, w.rank)?;
    let rank = v.rank;
    let mut dims = vec![0; 1usize << rank];
    let mut pairs = Vec::with_capacity(v.total_dim() * w.total_dim());
    for a in Degree::all(rank) {
        for b in Degree::all(rank) {
            let c = a * b;
            dims[a.index()] += v.dim(b) * w.dim(c);
            for i in v.range(b) {
                for j in w.range(c) {
                    pairs.push((i, j));
                }
            }
        }
    }
    let mut index = vec![0; pairs.len()];
    for (k, &(i, j)) in pairs.iter().enumerate() {
        index[i * w.total_dim() + j] = k;
    }
    Ok(TensorProduct {
        left: v.clone(),
        right: w.clone(),
        space: GradedSpace::new(rank, dims)?,
        pairs,
        index,
    })
}

/// A linear map `V → W` homogeneous of a fixed degree: component `b` goes
/// into component `|T|·b`. The full matrix is stored in canonical bases.
#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousMap {
    pub source: GradedSpace,
    pub target: GradedSpace,
    pub degree: Degree,
    pub matrix: CMat,
}

/// Frobenius norm of the entries of `m` that a degree-`t` map must leave zero,
/// relative to `max(1, ‖m‖)`.
pub fn off_degree_residual(source: &GradedSpace, target: &GradedSpace, t: Degree, m: &CMat) -> f64 {
    let src = source.basis_degrees();
    let tgt = target.basis_degrees();
    let mut off = 0.0;
    for (r, dr) in tgt.iter().enumerate() {
        for (c, dc) in src.iter().enumerate() {
            if *dr != t * *dc {
                off += m[(r, c)].norm_sqr();
            }
        }
    }
    off.sqrt() / frob(m).max(1.0)
}

impl HomogeneousMap {
    pub fn zero(source: &GradedSpace, target: &GradedSpace, degree: Degree) -> Self {
        HomogeneousMap {
            source: source.clone(),
            target: target.clone(),
            degree,
            matrix: CMat::zeros(target.total_dim(), source.total_dim()),
        }
    }

    pub fn identity(space: &GradedSpace) -> Self {
        HomogeneousMap {
            source: space.clone(),
            target: space.clone(),
            degree: Degree::zero(space.rank),
            matrix: eye(space.total_dim()),
        }
    }

    /// Accepts `matrix` when its off-degree entries are below `tol`; those
    /// entries are then cleared.
    pub fn from_matrix(
        source: &GradedSpace,
        target: &GradedSpace,
        degree: Degree,
        matrix: CMat,
        tol: f64,
    ) -> Result<Self> {
        same_rank(source.rank, target.rank)?;
        same_rank(source.rank, degree.rank())?;
        if matrix.shape() != (target.total_dim(), source.total_dim()) {
            return Err(Error::Shape(format!(
                "map matrix is {:?}, spaces need {:?}",
                matrix.shape(),
                (target.total_dim(), source.total_dim())
            )));
        }
        let residual = off_degree_residual(source, target, degree, &matrix);
        if residual > tol {
            return Err(Error::NotHomogeneous { degree, residual });
        }
        let mut out = HomogeneousMap::zero(source, target, degree);
        for b in source.support() {
            let rows = target.range(degree * b);
            let cols = source.range(b);
            for r in rows.clone() {
                for c in cols.clone() {
                    out.matrix[(r, c)] = matrix[(r, c)];
                }
            }
        }
        Ok(out)
    }

    /// Builds the map from per-source-degree blocks `(b, T_b)` with `T_b`
    /// of shape `dim W_{|T|b} × dim V_b`. Missing blocks are zero.
    pub fn from_blocks(
        source: &GradedSpace,
        target: &GradedSpace,
        degree: Degree,
        blocks: &[(Degree, CMat)],
    ) -> Result<Self> {
        let mut out = HomogeneousMap::zero(source, target, degree);
        for (b, blk) in blocks {
            let rows = target.range(degree * *b);
            let cols = source.range(*b);
            if blk.shape() != (rows.len(), cols.len()) {
                return Err(Error::Shape(format!(
                    "block at source degree {b} is {:?}, expected {:?}",
                    blk.shape(),
                    (rows.len(), cols.len())
                )));
            }
            out.matrix
                .view_mut((rows.start, cols.start), (rows.len(), cols.len()))
                .copy_from(blk);
        }
        Ok(out)
    }

    pub fn block(&self, b: Degree) -> CMat {
        let rows = self.target.range(self.degree * b);
        let cols = self.source.range(b);
        self.matrix
            .view((rows.start, cols.start), (rows.len(), cols.len()))
            .into_owned()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &HomogeneousMap) -> Result<HomogeneousMap> {
        if other.target != self.source {
            return Err(Error::Shape("composition of maps with mismatched spaces".into()));
        }
        Ok(HomogeneousMap {
            source: other.source.clone(),
            target: self.target.clone(),
            degree: self.degree * other.degree,
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn scale(&self, s: C64) -> HomogeneousMap {
        HomogeneousMap {
            matrix: &self.matrix * s,
            ..self.clone()
        }
    }

    pub fn apply(&self, v: &CVec) -> CVec {
        &self.matrix * v
    }
}

/// A non-homogeneous map stored as the sum of its homogeneous parts.
#[derive(Clone, Debug)]
pub struct GradedMap {
    pub parts: BTreeMap<Degree, HomogeneousMap>,
}

impl GradedMap {
    /// Splits an arbitrary matrix `V → W` into its homogeneous parts,
    /// dropping parts that are exactly zero.
    pub fn decompose(source: &GradedSpace, target: &GradedSpace, matrix: &CMat) -> Result<Self> {
        same_rank(source.rank, target.rank)?;
        let mut parts = BTreeMap::new();
        for t in Degree::all(source.rank) {
            let mut part = HomogeneousMap::zero(source, target, t);
            let mut any = false;
            for b in source.support() {
                for r in target.range(t * b) {
                    for c in source.range(b) {
                        part.matrix[(r, c)] = matrix[(r, c)];
                        any |= matrix[(r, c)] != ZERO;
                    }
                }
            }
            if any {
                parts.insert(t, part);
            }
        }
        Ok(GradedMap { parts })
    }

    pub fn to_matrix(&self, source: &GradedSpace, target: &GradedSpace) -> CMat {
        let mut m = CMat::zeros(target.total_dim(), source.total_dim());
        for p in self.parts.values() {
            m += &p.matrix;
        }
        m
    }

    /// `†` applied to every homogeneous part.
    pub fn dagger(&self, h: &GammaInnerSpace) -> Result<GradedMap> {
        let mut parts = BTreeMap::new();
        for (t, p) in &self.parts {
            parts.insert(*t, dagger_adjoint(h, p)?);
        }
        Ok(GradedMap { parts })
    }
}

/// The braiding `𝕊_{V,W}(v ⊗ w) = β(|v|,|w|) w ⊗ v`.
pub fn symmetry(v: &GradedSpace, w: &GradedSpace) -> Result<HomogeneousMap> {
    let vw = tensor_space(v, w)?;
    let wv = tensor_space(w, v)?;
    let mut m = CMat::zeros(wv.space.total_dim(), vw.space.total_dim());
    for (k, &(i, j)) in vw.pairs.iter().enumerate() {
        let s = v.degree_of(i).commutation(w.degree_of(j)).to_c64();
        m[(wv.index_of(j, i), k)] = s;
    }
    Ok(HomogeneousMap {
        source: vw.space,
        target: wv.space,
        degree: Degree::zero(v.rank),
        matrix: m,
    })
}

/// Koszul tensor of maps: `(f ⊗ g)(v ⊗ w) = β(|g|,|v|) f v ⊗ g w`.
pub fn tensor_map(f: &HomogeneousMap, g: &HomogeneousMap) -> Result<HomogeneousMap> {
    let src = tensor_space(&f.source, &g.source)?;
    let tgt = tensor_space(&f.target, &g.target)?;
    let mut m = CMat::zeros(tgt.space.total_dim(), src.space.total_dim());
    for (k, &(i, j)) in src.pairs.iter().enumerate() {
        let s = g.degree.commutation(f.source.degree_of(i)).to_f64();
        for p in 0..f.target.total_dim() {
            let fp = f.matrix[(p, i)];
            if fp == ZERO {
                continue;
            }
            for q in 0..g.target.total_dim() {
                let gq = g.matrix[(q, j)];
                if gq != ZERO {
                    m[(tgt.index_of(p, q), k)] += fp * gq * s;
                }
            }
        }
    }
    Ok(HomogeneousMap {
        source: src.space,
        target: tgt.space,
        degree: f.degree * g.degree,
        matrix: m,
    })
}

/// A graded space with per-degree ordinary Gram matrices. The Γ-form is
/// derived through the phase `α'(a) = χ(a) α(a)` where `χ` is the twist
/// (trivial unless the space came out of a twist).
#[derive(Clone, Debug)]
pub struct GammaInnerSpace {
    pub space: GradedSpace,
    grams: Vec<CMat>,
    twist: Character,
}

const GRAM_TOL: f64 = 1e-12;

impl GammaInnerSpace {
    /// `grams[a.index()]` is the ordinary Gram of component `a`; each must be
    /// Hermitian and positive definite.
    pub fn new(space: GradedSpace, grams: Vec<CMat>, twist: Character) -> Result<Self> {
        same_rank(space.rank, twist.rank())?;
        if grams.len() != space.dims.len() {
            return Err(Error::Shape(format!(
                "expected {} gram blocks, got {}",
                space.dims.len(),
                grams.len()
            )));
        }
        for a in Degree::all(space.rank) {
            let g = &grams[a.index()];
            let d = space.dim(a);
            if g.shape() != (d, d) {
                return Err(Error::Shape(format!(
                    "gram block at {a} is {:?}, component has dimension {d}",
                    g.shape()
                )));
            }
            if d == 0 {
                continue;
            }
            let herm = linalg::hermitian_defect(g);
            if herm > GRAM_TOL {
                return Err(Error::InnerProduct {
                    condition: "hermiticity of the ordinary gram",
                    degree: a,
                    residual: herm,
                });
            }
            let min = linalg::min_eigenvalue(g);
            if min <= 0.0 {
                return Err(Error::InnerProduct {
                    condition: "positivity (iii)",
                    degree: a,
                    residual: -min,
                });
            }
        }
        let grams = grams
            .into_iter()
            .map(|g| (&g + g.adjoint()) * C64::new(0.5, 0.0))
            .collect();
        Ok(GammaInnerSpace {
            space,
            grams,
            twist,
        })
    }

    /// Identity grams, trivial twist.
    pub fn standard(space: GradedSpace) -> Self {
        let grams = space.dims.iter().map(|&d| eye(d)).collect();
        let twist = Character::trivial(space.rank);
        GammaInnerSpace {
            space,
            grams,
            twist,
        }
    }

    /// Builds the space from the matrices `F_a` of the Γ-form,
    /// `⟨v, w⟩ = w^H F_a v` on degree `a`, after checking conditions (ii)
    /// and (iii) of the definition.
    pub fn from_gamma_form(space: GradedSpace, forms: Vec<CMat>, twist: Character) -> Result<Self> {
        let probe = GammaInnerSpace {
            space: space.clone(),
            grams: forms.clone(),
            twist,
        };
        let report = check_gamma_form(&probe.space, &forms, &twist, GRAM_TOL);
        if let Some(bad) = report.failures().next() {
            return Err(Error::Check {
                operation: "Gamma-inner form".into(),
                detail: format!("{} (residual {:e})", bad.name, bad.residual),
            });
        }
        let grams = Degree::all(space.rank)
            .map(|a| &forms[a.index()] * probe.phase(a))
            .collect();
        GammaInnerSpace::new(space, grams, twist)
    }

    pub fn rank(&self) -> u8 {
        self.space.rank
    }

    pub fn twist(&self) -> Character {
        self.twist
    }

    /// Same ordinary grams, phases twisted by `chi` on top of the current twist.
    pub fn twisted(&self, chi: &Character) -> GammaInnerSpace {
        GammaInnerSpace {
            twist: self.twist.product(chi),
            ..self.clone()
        }
    }

    /// `α'(a)` as a complex number.
    pub fn phase(&self, a: Degree) -> C64 {
        alpha(a, Some(&self.twist)).to_c64()
    }

    pub fn gram(&self, a: Degree) -> &CMat {
        &self.grams[a.index()]
    }

    pub fn grams(&self) -> &[CMat] {
        &self.grams
    }

    /// The block-diagonal ordinary Gram on the whole space.
    pub fn ordinary_gram(&self) -> CMat {
        let n = self.space.total_dim();
        let mut g = CMat::zeros(n, n);
        for a in self.space.support() {
            let r = self.space.range(a);
            g.view_mut((r.start, r.start), (r.len(), r.len()))
                .copy_from(&self.grams[a.index()]);
        }
        g
    }

    /// Matrix of the Γ-form on component `a`: `conj(α'(a)) G_a`.
    pub fn gamma_form(&self, a: Degree) -> CMat {
        &self.grams[a.index()] * self.phase(a).conj()
    }

    /// `(v, w) = w^H G v`.
    pub fn inner(&self, v: &CVec, w: &CVec) -> C64 {
        let mut s = ZERO;
        for a in self.space.support() {
            let r = self.space.range(a);
            let va = v.rows(r.start, r.len());
            let wa = w.rows(r.start, r.len());
            s += (wa.adjoint() * &self.grams[a.index()] * va)[(0, 0)];
        }
        s
    }

    /// `⟨v, w⟩`, summed over degree components (components of distinct
    /// degree are orthogonal).
    pub fn gamma_inner(&self, v: &CVec, w: &CVec) -> C64 {
        let mut s = ZERO;
        for a in self.space.support() {
            let r = self.space.range(a);
            let va = v.rows(r.start, r.len());
            let wa = w.rows(r.start, r.len());
            s += (wa.adjoint() * &self.grams[a.index()] * va)[(0, 0)] * self.phase(a).conj();
        }
        s
    }

    /// Conditions (i)–(iii) for the derived Γ-form.
    pub fn check(&self, tol: f64) -> Report {
        let forms: Vec<CMat> = Degree::all(self.space.rank).map(|a| self.gamma_form(a)).collect();
        check_gamma_form(&self.space, &forms, &self.twist, tol)
    }

    pub fn direct_sum(&self, other: &GammaInnerSpace) -> Result<GammaInnerSpace> {
        if self.twist != other.twist {
            return Err(Error::Invalid("direct sum of spaces with different twists".into()));
        }
        let space = self.space.direct_sum(&other.space)?;
        let grams = Degree::all(self.space.rank)
            .map(|a| block_diag(&self.grams[a.index()], &other.grams[a.index()]))
            .collect();
        GammaInnerSpace::new(space, grams, self.twist)
    }

    /// Orthonormal basis (w.r.t. `(·,·)`) of each component, as the columns
    /// of a block-diagonal matrix `B` with `B^H G B = I`.
    pub fn orthonormal_frame(&self) -> CMat {
        let n = self.space.total_dim();
        let mut b = CMat::zeros(n, n);
        for a in self.space.support() {
            let r = self.space.range(a);
            let (vals, vecs) = linalg::hermitian_eigen(&self.grams[a.index()]);
            let mut blk = vecs.clone();
            for (j, lam) in vals.iter().enumerate() {
                let s = C64::new(1.0 / lam.sqrt(), 0.0);
                for i in 0..blk.nrows() {
                    blk[(i, j)] = vecs[(i, j)] * s;
                }
            }
            b.view_mut((r.start, r.start), (r.len(), r.len())).copy_from(&blk);
        }
        b
    }
}

pub fn block_diag(a: &CMat, b: &CMat) -> CMat {
    let mut m = CMat::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    m.view_mut((0, 0), a.shape()).copy_from(a);
    m.view_mut((a.nrows(), a.ncols()), b.shape()).copy_from(b);
    m
}

/// Validates a Γ-form given by its per-degree matrices `F_a`
/// (`⟨v, w⟩ = w^H F_a v`). Condition (i) holds structurally.
/// (ii) `⟨w, v⟩ = β(a,a) conj⟨v, w⟩` is `F_a = β(a,a) F_a^H`;
/// (iii) `α'(a)⟨v, v⟩ ≥ 0` is positivity of the Hermitian `α'(a) F_a`.
pub fn check_gamma_form(space: &GradedSpace, forms: &[CMat], twist: &Character, tol: f64) -> Report {
    let mut r = Report::new("gamma inner product conditions");
    r.require(
        "(i) components of distinct degree are orthogonal",
        true,
        Some("holds by block structure".into()),
    );
    let mut sym = 0.0f64;
    let mut herm = 0.0f64;
    let mut min_eig = f64::INFINITY;
    let mut shape_ok = forms.len() == space.dims.len();
    if shape_ok {
        for a in space.support() {
            let f = &forms[a.index()];
            if f.shape() != (space.dim(a), space.dim(a)) {
                shape_ok = false;
                break;
            }
            let bb = a.commutation(a).to_c64();
            sym = sym.max(rel_residual(f, &(f.adjoint() * bb)));
            let g = f * alpha(a, Some(twist)).to_c64();
            herm = herm.max(linalg::hermitian_defect(&g));
            min_eig = min_eig.min(linalg::min_eigenvalue(&g));
        }
    }
    if !r.require("form blocks match the component dimensions", shape_ok, None) {
        return r;
    }
    r.check("(ii) <w,v> = beta(a,a) conj<v,w>", sym, tol);
    r.check("(iii) alpha(a)<v,v> is real", herm, tol);
    if min_eig.is_finite() {
        r.check_with(
            "(iii) alpha(a)<v,v> > 0 (negated min eigenvalue)",
            -min_eig,
            0.0,
            Some(format!("min eigenvalue {min_eig:e}")),
        );
    }
    r
}

/// The induced Γ-inner product on `H ⊗ K`:
/// `⟨v⊗w, v'⊗w'⟩ = β(|w|,|v'|) ⟨v,v'⟩ ⟨w,w'⟩`.
pub fn tensor_inner(h: &GammaInnerSpace, k: &GammaInnerSpace) -> Result<(GammaInnerSpace, TensorProduct)> {
    if h.twist != k.twist {
        return Err(Error::Invalid("tensor product of spaces with different twists".into()));
    }
    let tp = tensor_space(&h.space, &k.space)?;
    let rank = h.rank();
    let fh: Vec<CMat> = Degree::all(rank).map(|a| h.gamma_form(a)).collect();
    let fk: Vec<CMat> = Degree::all(rank).map(|a| k.gamma_form(a)).collect();
    let mut forms = Vec::with_capacity(1usize << rank);
    for a in Degree::all(rank) {
        let range = tp.space.range(a);
        let mut f = CMat::zeros(range.len(), range.len());
        // entry (l, m) is ⟨e_m, e_l⟩ for e_m = v_i ⊗ w_j, e_l = v_p ⊗ w_q
        for (mi, m) in range.clone().enumerate() {
            let (i, j) = tp.pairs[m];
            let (bi, cj) = (h.space.degree_of(i), k.space.degree_of(j));
            for (li, l) in range.clone().enumerate() {
                let (p, q) = tp.pairs[l];
                if h.space.degree_of(p) != bi || k.space.degree_of(q) != cj {
                    continue;
                }
                let hp = fh[bi.index()][(p - h.space.offset(bi), i - h.space.offset(bi))];
                let kq = fk[cj.index()][(q - k.space.offset(cj), j - k.space.offset(cj))];
                let s = cj.commutation(bi).to_f64();
                f[(li, mi)] = hp * kq * s;
            }
        }
        forms.push(f);
    }
    let space = GammaInnerSpace::from_gamma_form(tp.space.clone(), forms, h.twist)?;
    Ok((space, tp))
}

/// The ordinary adjoint: `(T v, w) = (v, T* w)`, i.e. `T* = G⁻¹ T^H G`.
pub fn star_adjoint(h: &GammaInnerSpace, t: &HomogeneousMap) -> Result<HomogeneousMap> {
    if t.source != h.space || t.target != h.space {
        return Err(Error::Shape("adjoint of a map not acting on the space".into()));
    }
    let g = h.ordinary_gram();
    let ginv = linalg::hpd_inverse(&g)
        .ok_or_else(|| Error::Invalid("ordinary gram is not positive definite".into()))?;
    Ok(HomogeneousMap {
        matrix: ginv * t.matrix.adjoint() * g,
        ..t.clone()
    })
}

/// `T† = α'(|T|) T*`, characterized by `⟨v, T w⟩ = β(|T|,|v|) ⟨T† v, w⟩`.
pub fn dagger_adjoint(h: &GammaInnerSpace, t: &HomogeneousMap) -> Result<HomogeneousMap> {
    let s = star_adjoint(h, t)?;
    Ok(s.scale(h.phase(t.degree)))
}
