//! Color Lie algebras over `Γ = Z₂ⁿ` with real structure constants.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graded_linear::GradedSpace;
use crate::grading::{alpha, Degree};
use crate::linalg::{self, CMat, RMat, RVec, C64, I, ONE, ZERO};
use crate::report::Report;

/// Relative threshold for numerical ranks of bracket spans.
pub const RANK_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BasisElement {
    pub label: String,
    pub degree: Degree,
}

/// A finite-dimensional color Lie algebra. The basis is kept sorted by
/// (lex degree, label), so every sector `g_a` is a contiguous index range.
#[derive(Clone, Debug)]
pub struct ColorLieAlgebra {
    rank: u8,
    basis: Vec<BasisElement>,
    /// `table[i * dim + j]` lists `(k, c_ij^k)` with nonzero coefficients.
    table: Vec<Vec<(usize, f64)>>,
}

impl ColorLieAlgebra {
    /// Builds an algebra from basis elements and structure triples
    /// `(i, j, k, c)` meaning `[x_i, x_j] ∋ c x_k`, with indices referring to
    /// the order of `basis` as given. Every nonzero bracket must be listed
    /// explicitly, including both orders of a pair. Repeated triples add up.
    /// No axiom is checked here; see [`check_axioms`].
    pub fn new(rank: u8, basis: Vec<(String, Degree)>, triples: &[(usize, usize, usize, f64)]) -> Result<Self> {
        let n = basis.len();
        let mut seen = std::collections::HashSet::new();
        for (label, deg) in &basis {
            if deg.rank() != rank {
                return Err(Error::RankMismatch(deg.rank(), rank));
            }
            if !seen.insert(label.clone()) {
                return Err(Error::Invalid(format!("duplicate basis label '{label}'")));
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| (basis[a].1, &basis[a].0).cmp(&(basis[b].1, &basis[b].0)));
        let mut new_index = vec![0; n];
        for (pos, &old) in order.iter().enumerate() {
            new_index[old] = pos;
        }
        let mut acc: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n * n];
        for &(i, j, k, c) in triples {
            if i >= n || j >= n || k >= n {
                return Err(Error::Invalid(format!(
                    "structure triple ({i}, {j}, {k}) out of range for dimension {n}"
                )));
            }
            if !c.is_finite() {
                return Err(Error::Invalid(format!("structure constant for ({i}, {j}, {k}) is not finite")));
            }
            *acc[new_index[i] * n + new_index[j]].entry(new_index[k]).or_insert(0.0) += c;
        }
        let table = acc
            .into_iter()
            .map(|m| m.into_iter().filter(|&(_, c)| c != 0.0).collect())
            .collect();
        let basis = order
            .iter()
            .map(|&i| BasisElement {
                label: basis[i].0.clone(),
                degree: basis[i].1,
            })
            .collect();
        Ok(ColorLieAlgebra { rank, basis, table })
    }

    /// The zero-dimensional algebra.
    pub fn zero(rank: u8) -> Self {
        ColorLieAlgebra {
            rank,
            basis: Vec::new(),
            table: Vec::new(),
        }
    }

    /// Abelian algebra on the given basis.
    pub fn abelian(rank: u8, basis: Vec<(String, Degree)>) -> Result<Self> {
        Self::new(rank, basis, &[])
    }

    pub fn rank(&self) -> u8 {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BasisElement] {
        &self.basis
    }

    pub fn degree(&self, i: usize) -> Degree {
        self.basis[i].degree
    }

    pub fn label(&self, i: usize) -> &str {
        &self.basis[i].label
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.basis.iter().position(|b| b.label == label)
    }

    /// Index range of the sector `g_a`.
    pub fn sector(&self, a: Degree) -> std::ops::Range<usize> {
        let start = self.basis.partition_point(|b| b.degree < a);
        let end = self.basis.partition_point(|b| b.degree <= a);
        start..end
    }

    /// Dimensions of all sectors, as a graded space.
    pub fn graded_space(&self) -> GradedSpace {
        let dims = Degree::all(self.rank).map(|a| self.sector(a).len()).collect();
        GradedSpace::new(self.rank, dims).unwrap()
    }

    /// `[x_i, x_j]` as sparse `(k, c)` pairs.
    pub fn bracket_basis(&self, i: usize, j: usize) -> &[(usize, f64)] {
        &self.table[i * self.dim() + j]
    }

    pub fn bracket(&self, x: &RVec, y: &RVec) -> RVec {
        let n = self.dim();
        let mut out = RVec::zeros(n);
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if y[j] == 0.0 {
                    continue;
                }
                for &(k, c) in self.bracket_basis(i, j) {
                    out[k] += x[i] * y[j] * c;
                }
            }
        }
        out
    }

    pub fn basis_vector(&self, i: usize) -> RVec {
        let mut v = RVec::zeros(self.dim());
        v[i] = 1.0;
        v
    }

    /// All nonzero structure constants as `(i, j, k, c)` in canonical indices.
    pub fn structure_triples(&self) -> Vec<(usize, usize, usize, f64)> {
        let n = self.dim();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for &(k, c) in self.bracket_basis(i, j) {
                    out.push((i, j, k, c));
                }
            }
        }
        out
    }

    /// Matrix of `ad x_i`: column `j` holds the coordinates of `[x_i, x_j]`.
    pub fn ad_matrix(&self, i: usize) -> RMat {
        let n = self.dim();
        let mut m = RMat::zeros(n, n);
        for j in 0..n {
            for &(k, c) in self.bracket_basis(i, j) {
                m[(k, j)] += c;
            }
        }
        m
    }

    pub fn ad_of(&self, x: &RVec) -> RMat {
        let mut m = RMat::zeros(self.dim(), self.dim());
        for i in 0..self.dim() {
            if x[i] != 0.0 {
                m += self.ad_matrix(i) * x[i];
            }
        }
        m
    }

    fn basis_pairs(&self) -> Vec<(String, Degree)> {
        self.basis.iter().map(|b| (b.label.clone(), b.degree)).collect()
    }

    /// The same algebra in the basis `y_j = Σ_i P_ij x_i`. `P` must be
    /// invertible and map each sector into itself.
    pub fn change_basis(&self, p: &RMat) -> Result<ColorLieAlgebra> {
        let n = self.dim();
        if p.shape() != (n, n) {
            return Err(Error::Shape(format!("basis change must be {n}x{n}")));
        }
        let grade = grading_residual(self, p);
        if grade > 0.0 {
            return Err(Error::Invalid(format!(
                "basis change mixes degrees (off-sector mass {grade:e})"
            )));
        }
        let pinv = p
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Invalid("basis change is singular".into()))?;
        let mut triples = Vec::new();
        for a in 0..n {
            for b in 0..n {
                let br = self.bracket(&p.column(a).into_owned(), &p.column(b).into_owned());
                let coords = &pinv * br;
                for k in 0..n {
                    if coords[k].abs() > 1e-14 {
                        triples.push((a, b, k, coords[k]));
                    }
                }
            }
        }
        ColorLieAlgebra::new(self.rank, self.basis_pairs(), &triples)
    }

    /// Residuals of `A` as an automorphism: the off-sector mass and
    /// `max_ij ‖A[x_i,x_j] − [Ax_i,Ax_j]‖ / max(1, ‖A‖²)`.
    pub fn automorphism_residual(&self, a: &RMat) -> (f64, f64) {
        let n = self.dim();
        if a.shape() != (n, n) {
            return (f64::INFINITY, f64::INFINITY);
        }
        let grade = grading_residual(self, a);
        let scale = a.norm().powi(2).max(1.0);
        let cols: Vec<RVec> = (0..n).map(|j| a.column(j).into_owned()).collect();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let lhs = a * self.bracket(&self.basis_vector(i), &self.basis_vector(j));
                let rhs = self.bracket(&cols[i], &cols[j]);
                worst = worst.max((lhs - rhs).norm() / scale);
            }
        }
        (grade, worst)
    }

    /// Direct product of two algebras; labels of `other` get `suffix`.
    pub fn direct_product(&self, other: &ColorLieAlgebra, suffix: &str) -> Result<ColorLieAlgebra> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch(self.rank, other.rank));
        }
        let mut basis = self.basis_pairs();
        basis.extend(other.basis.iter().map(|b| (format!("{}{suffix}", b.label), b.degree)));
        let off = self.dim();
        let mut triples = self.structure_triples();
        triples.extend(
            other
                .structure_triples()
                .into_iter()
                .map(|(i, j, k, c)| (i + off, j + off, k + off, c)),
        );
        ColorLieAlgebra::new(self.rank, basis, &triples)
    }
}

/// Frobenius mass of the entries of `m` that connect different sectors.
fn grading_residual(l: &ColorLieAlgebra, m: &RMat) -> f64 {
    let mut off = 0.0;
    for r in 0..l.dim() {
        for c in 0..l.dim() {
            if l.degree(r) != l.degree(c) {
                off += m[(r, c)] * m[(r, c)];
            }
        }
    }
    off.sqrt()
}

/// `[S, T] = ST − β(|S|,|T|) TS` on homogeneous matrices.
pub fn glv_bracket(s: &CMat, ds: Degree, t: &CMat, dt: Degree) -> CMat {
    s * t - t * s * ds.commutation(dt).to_c64()
}

fn unit_label(prefix: &str, p: usize, q: Option<usize>, width: usize) -> String {
    match (q, width) {
        (Some(q), 1) => format!("{prefix}{}{}", p + 1, q + 1),
        (Some(q), w) => format!("{prefix}{:0w$}_{:0w$}", p + 1, q + 1),
        (None, w) => format!("{prefix}{:0w$}", p + 1),
    }
}

fn label_width(d: usize) -> usize {
    d.to_string().len()
}

/// `gl(V)` on the matrix units `E_pq` (complex-valued structure constants
/// happen to be integers, so the algebra is real). Returns the algebra and
/// the defining matrix of each basis element in canonical order.
pub fn glv(v: &GradedSpace) -> Result<(ColorLieAlgebra, Vec<CMat>)> {
    let d = v.total_dim();
    if d == 0 {
        return Err(Error::Invalid("gl(V) needs dim V >= 1".into()));
    }
    let degs = v.basis_degrees();
    let w = label_width(d);
    let mut basis = Vec::with_capacity(d * d);
    let mut mats = Vec::with_capacity(d * d);
    for p in 0..d {
        for q in 0..d {
            basis.push((unit_label("E", p, Some(q), w), degs[p] * degs[q]));
            let mut m = CMat::zeros(d, d);
            m[(p, q)] = ONE;
            mats.push(m);
        }
    }
    let coords = |m: &CMat| -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        for p in 0..d {
            for q in 0..d {
                if m[(p, q)] != ZERO {
                    out.push((p * d + q, m[(p, q)].re));
                }
            }
        }
        out
    };
    matrix_algebra(v.rank(), basis, mats, coords)
}

/// Builds an algebra from homogeneous matrices closed under the color
/// bracket, given a coordinate map back onto the basis.
fn matrix_algebra(
    rank: u8,
    basis: Vec<(String, Degree)>,
    mats: Vec<CMat>,
    coords: impl Fn(&CMat) -> Vec<(usize, f64)>,
) -> Result<(ColorLieAlgebra, Vec<CMat>)> {
    let n = basis.len();
    let mut triples = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let br = glv_bracket(&mats[i], basis[i].1, &mats[j], basis[j].1);
            for (k, c) in coords(&br) {
                triples.push((i, j, k, c));
            }
        }
    }
    let alg = ColorLieAlgebra::new(rank, basis.clone(), &triples)?;
    // reorder the matrices to the canonical basis order
    let canon = alg
        .basis()
        .iter()
        .map(|b| {
            let old = basis.iter().position(|(l, _)| *l == b.label).unwrap();
            mats[old].clone()
        })
        .collect();
    Ok((alg, canon))
}

/// The real form of `gl(V)` on which the defining representation satisfies
/// `ρ(x)† = −ρ(x)` for the unit Gram: for `p < q` with `φ = α(|E_pq|)`,
/// `A_pq = E_pq − φ E_qp` and `B_pq = i E_pq + i φ E_qp`; and `C_p = i E_pp`.
/// Returns the algebra and the defining matrices in canonical order.
pub fn glv_compact(v: &GradedSpace) -> Result<(ColorLieAlgebra, Vec<CMat>)> {
    let d = v.total_dim();
    if d == 0 {
        return Err(Error::Invalid("gl(V) needs dim V >= 1".into()));
    }
    let degs = v.basis_degrees();
    let w = label_width(d);
    let mut basis = Vec::new();
    let mut mats = Vec::new();
    let mut slot = BTreeMap::new();
    for p in 0..d {
        let mut m = CMat::zeros(d, d);
        m[(p, p)] = I;
        slot.insert(('C', p, p), basis.len());
        basis.push((unit_label("C", p, None, w), Degree::zero(v.rank())));
        mats.push(m);
    }
    for p in 0..d {
        for q in p + 1..d {
            let a = degs[p] * degs[q];
            let ph = alpha(a, None).to_c64();
            let mut am = CMat::zeros(d, d);
            am[(p, q)] = ONE;
            am[(q, p)] = -ph;
            let mut bm = CMat::zeros(d, d);
            bm[(p, q)] = I;
            bm[(q, p)] = I * ph;
            slot.insert(('A', p, q), basis.len());
            basis.push((unit_label("A", p, Some(q), w), a));
            mats.push(am);
            slot.insert(('B', p, q), basis.len());
            basis.push((unit_label("B", p, Some(q), w), a));
            mats.push(bm);
        }
    }
    let coords = |m: &CMat| -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        for p in 0..d {
            if m[(p, p)].im != 0.0 {
                out.push((slot[&('C', p, p)], m[(p, p)].im));
            }
            for q in p + 1..d {
                if m[(p, q)].re != 0.0 {
                    out.push((slot[&('A', p, q)], m[(p, q)].re));
                }
                if m[(p, q)].im != 0.0 {
                    out.push((slot[&('B', p, q)], m[(p, q)].im));
                }
            }
        }
        out
    };
    matrix_algebra(v.rank(), basis, mats, coords)
}

/// Coordinates of a matrix in the [`glv_compact`] basis of `alg` (looked up
/// by label), for matrices that lie in the real form.
pub fn glv_compact_coords(alg: &ColorLieAlgebra, m: &CMat) -> RVec {
    let d = m.nrows();
    let w = label_width(d);
    let mut x = RVec::zeros(alg.dim());
    for p in 0..d {
        if let Some(i) = alg.index_of(&unit_label("C", p, None, w)) {
            x[i] = m[(p, p)].im;
        }
        for q in p + 1..d {
            if let Some(i) = alg.index_of(&unit_label("A", p, Some(q), w)) {
                x[i] = m[(p, q)].re;
            }
            if let Some(i) = alg.index_of(&unit_label("B", p, Some(q), w)) {
                x[i] = m[(p, q)].im;
            }
        }
    }
    x
}

/// Verifies the axioms on all basis pairs and triples:
/// (i) `[g_a, g_b] ⊂ g_{ab}`, (ii) `[x,y] = −β(a,b)[y,x]`,
/// (iii) `[x,[y,z]] = [[x,y],z] + β(a,b)[y,[x,z]]` for `x ∈ g_a`, `y ∈ g_b`.
pub fn check_axioms(l: &ColorLieAlgebra, tol: f64) -> Report {
    let mut r = Report::new("check_axioms");
    let n = l.dim();
    let cmax = l
        .table
        .iter()
        .flatten()
        .map(|&(_, c)| c.abs())
        .fold(0.0f64, f64::max);

    let mut worst_grade = (0.0f64, None);
    let mut worst_anti = (0.0f64, None);
    for i in 0..n {
        for j in 0..n {
            for &(k, c) in l.bracket_basis(i, j) {
                if l.degree(k) != l.degree(i) * l.degree(j) && c.abs() > worst_grade.0 {
                    worst_grade = (c.abs(), Some((i, j, k)));
                }
            }
            let b = l.degree(i).commutation(l.degree(j)).to_f64();
            let mut sum: BTreeMap<usize, f64> = BTreeMap::new();
            for &(k, c) in l.bracket_basis(i, j) {
                *sum.entry(k).or_default() += c;
            }
            for &(k, c) in l.bracket_basis(j, i) {
                *sum.entry(k).or_default() += b * c;
            }
            for (k, v) in sum {
                if v.abs() > worst_anti.0 {
                    worst_anti = (v.abs(), Some((i, j, k)));
                }
            }
        }
    }
    let scale = cmax.max(1.0);
    let fmt3 = |t: Option<(usize, usize, usize)>, what: &str| {
        t.map(|(i, j, k)| {
            format!(
                "worst {what} ({}, {}, {})",
                l.label(i),
                l.label(j),
                l.label(k)
            )
        })
    };
    r.check_with(
        "(i) grading: [g_a, g_b] in g_ab",
        worst_grade.0 / scale,
        tol,
        fmt3(worst_grade.1, "structure triple"),
    );
    r.check_with(
        "(ii) beta-antisymmetry",
        worst_anti.0 / scale,
        tol,
        fmt3(worst_anti.1, "triple"),
    );

    let worst_jacobi = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut worst = (0.0f64, None);
            for j in 0..n {
                let b = l.degree(i).commutation(l.degree(j)).to_f64();
                for k in 0..n {
                    let d = jacobi_defect(l, i, j, k, b);
                    if d > worst.0 {
                        worst = (d, Some((i, j, k)));
                    }
                }
            }
            worst
        })
        .reduce(|| (0.0, None), |a, b| if b.0 > a.0 { b } else { a });
    r.check_with(
        "(iii) beta-Jacobi [x,[y,z]] = [[x,y],z] + beta(a,b)[y,[x,z]]",
        worst_jacobi.0 / (scale * scale),
        tol,
        worst_jacobi.1.map(|(i, j, k)| {
            format!(
                "worst triple x={}, y={}, z={}",
                l.label(i),
                l.label(j),
                l.label(k)
            )
        }),
    );
    r
}

/// Max-norm of `[x_i,[x_j,x_k]] − [[x_i,x_j],x_k] − b [x_j,[x_i,x_k]]`.
fn jacobi_defect(l: &ColorLieAlgebra, i: usize, j: usize, k: usize, b: f64) -> f64 {
    let n = l.dim();
    let mut acc = vec![0.0; n];
    for &(m, c) in l.bracket_basis(j, k) {
        for &(t, c2) in l.bracket_basis(i, m) {
            acc[t] += c * c2;
        }
    }
    for &(m, c) in l.bracket_basis(i, j) {
        for &(t, c2) in l.bracket_basis(m, k) {
            acc[t] -= c * c2;
        }
    }
    for &(m, c) in l.bracket_basis(i, k) {
        for &(t, c2) in l.bracket_basis(j, m) {
            acc[t] -= b * c * c2;
        }
    }
    acc.iter().fold(0.0f64, |w, v| w.max(v.abs()))
}

#[derive(Clone, Debug, Serialize)]
pub struct SectorRank {
    pub sector: Degree,
    pub rank: usize,
    pub dim: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Perfectness {
    pub sectors: Vec<SectorRank>,
    pub report: Report,
}

impl Perfectness {
    pub fn passed(&self) -> bool {
        self.report.passed
    }

    pub fn first_failure(&self) -> Option<&SectorRank> {
        self.sectors.iter().find(|s| s.rank < s.dim)
    }
}

/// Ordered sector pairs `(b, c)` of odd-like degrees with `b < c`, `bc = a`.
fn odd_pairs(rank: u8, a: Degree) -> Vec<(Degree, Degree)> {
    Degree::all(rank)
        .filter(|b| b.is_odd_like())
        .map(|b| (b, b * a))
        .filter(|&(b, c)| c.is_odd_like() && b < c)
        .collect()
}

/// Spanning set of `Σ [g_b, g_c]` for sector `a`: the index pairs and the
/// matrix whose columns are the brackets restricted to the rows of `g_a`.
fn bracket_span(l: &ColorLieAlgebra, a: Degree) -> (Vec<(usize, usize)>, RMat) {
    let rows = l.sector(a);
    let mut pairs = Vec::new();
    for (b, c) in odd_pairs(l.rank, a) {
        for i in l.sector(b) {
            for j in l.sector(c) {
                pairs.push((i, j));
            }
        }
    }
    let mut m = RMat::zeros(rows.len(), pairs.len());
    for (col, &(i, j)) in pairs.iter().enumerate() {
        for &(k, c) in l.bracket_basis(i, j) {
            if rows.contains(&k) {
                m[(k - rows.start, col)] += c;
            }
        }
    }
    (pairs, m)
}

/// For every even-like `a ≠ 0`, compares the rank of the odd-odd bracket
/// span with `dim g_a`.
pub fn check_perfectness(l: &ColorLieAlgebra) -> Perfectness {
    let mut report = Report::new("check_perfectness");
    let mut sectors = Vec::new();
    for a in Degree::all(l.rank).filter(|a| !a.is_zero() && !a.is_odd_like()) {
        let dim = l.sector(a).len();
        let rank = if dim == 0 {
            0
        } else {
            linalg::numerical_rank(&bracket_span(l, a).1, RANK_TOL)
        };
        report.check_with(
            format!("sector {a} saturated (dim - rank)"),
            (dim - rank) as f64,
            0.0,
            Some(format!("rank {rank}, dim {dim}")),
        );
        sectors.push(SectorRank { sector: a, rank, dim });
    }
    if sectors.iter().all(|s| s.dim == 0) {
        report.note("no nonzero even-like sectors: passes vacuously");
    }
    Perfectness { sectors, report }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BracketDecomposition {
    pub sector: Degree,
    /// `(coefficient, left, right)`: the target is `Σ c [x_left, x_right]`.
    pub terms: Vec<(f64, usize, usize)>,
    pub residual: f64,
}

impl BracketDecomposition {
    pub fn evaluate(&self, l: &ColorLieAlgebra) -> RVec {
        let mut out = RVec::zeros(l.dim());
        for &(c, i, j) in &self.terms {
            for &(k, s) in l.bracket_basis(i, j) {
                out[k] += c * s;
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecompositionStrategy {
    /// Minimum-norm least squares over the whole spanning set.
    MinNorm,
    /// Greedy column selection scanning the spanning set from its end,
    /// then a solve on the selected columns only.
    ReversedPivot,
}

/// Writes `x ∈ g_a` (`a` even-like, nonzero) as a sum of brackets of
/// odd-like basis elements.
pub fn decompose_odd(
    l: &ColorLieAlgebra,
    x: &RVec,
    strategy: DecompositionStrategy,
    tol: f64,
) -> Result<BracketDecomposition> {
    if x.len() != l.dim() {
        return Err(Error::Shape(format!("vector of length {} for algebra of dimension {}", x.len(), l.dim())));
    }
    let support: Vec<Degree> = {
        let mut s: Vec<Degree> = (0..l.dim()).filter(|&i| x[i] != 0.0).map(|i| l.degree(i)).collect();
        s.dedup();
        s
    };
    let sector = match support.as_slice() {
        [] => {
            return Ok(BracketDecomposition {
                sector: Degree::zero(l.rank),
                terms: Vec::new(),
                residual: 0.0,
            })
        }
        [a] => *a,
        _ => return Err(Error::Invalid("decompose_odd needs a homogeneous element".into())),
    };
    if sector.is_zero() || sector.is_odd_like() {
        return Err(Error::Invalid(format!(
            "decompose_odd needs a nonzero even-like sector, got {sector}"
        )));
    }
    let rows = l.sector(sector);
    let (pairs, m) = bracket_span(l, sector);
    let rank = linalg::numerical_rank(&m, RANK_TOL);
    if rank < rows.len() {
        return Err(Error::NotPerfect {
            sector,
            rank,
            dim: rows.len(),
        });
    }
    let target = RVec::from_iterator(rows.len(), rows.clone().map(|i| x[i]));
    let coeffs = match strategy {
        DecompositionStrategy::MinNorm => linalg::lstsq_min_norm(&m, &target, RANK_TOL),
        DecompositionStrategy::ReversedPivot => reversed_pivot_solve(&m, &target),
    };
    let terms: Vec<(f64, usize, usize)> = coeffs
        .iter()
        .zip(&pairs)
        .filter(|(c, _)| c.abs() > 1e-15)
        .map(|(&c, &(i, j))| (c, i, j))
        .collect();
    let mut dec = BracketDecomposition {
        sector,
        terms,
        residual: 0.0,
    };
    let back = dec.evaluate(l);
    dec.residual = (&back - x).norm() / x.norm().max(1.0);
    if dec.residual > tol {
        return Err(Error::Decomposition {
            sector,
            residual: dec.residual,
            tol,
        });
    }
    Ok(dec)
}

fn reversed_pivot_solve(m: &RMat, target: &RVec) -> RVec {
    let rows = m.nrows();
    let scale = m.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut chosen: Vec<usize> = Vec::new();
    let mut q: Vec<RVec> = Vec::new();
    for col in (0..m.ncols()).rev() {
        if chosen.len() == rows {
            break;
        }
        let mut v = m.column(col).into_owned();
        for _ in 0..2 {
            for b in &q {
                let p = b.dot(&v);
                v -= b * p;
            }
        }
        let nv = v.norm();
        if nv > 1e-7 * scale {
            q.push(v / nv);
            chosen.push(col);
        }
    }
    let sub = RMat::from_fn(rows, chosen.len(), |r, c| m[(r, chosen[c])]);
    let y = linalg::lstsq_min_norm(&sub, target, 1e-14);
    let mut out = RVec::zeros(m.ncols());
    for (c, &col) in chosen.iter().enumerate() {
        out[col] = y[c];
    }
    out
}

/// Complex matrix `A` acting on coordinates; a convenience for callers that
/// mix real algebra data with complex representation matrices.
pub fn complexify(m: &RMat) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rel_residual;

    fn d(bits: &[u8]) -> Degree {
        Degree::from_bits(bits).unwrap()
    }

    fn so3() -> ColorLieAlgebra {
        let z = Degree::zero(1);
        let basis = vec![("e1".into(), z), ("e2".into(), z), ("e3".into(), z)];
        let mut t = Vec::new();
        for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            t.push((i, j, k, 1.0));
            t.push((j, i, k, -1.0));
        }
        ColorLieAlgebra::new(1, basis, &t).unwrap()
    }

    #[test]
    fn gl11_structure() {
        let (l, mats) = glv(&GradedSpace::new(1, vec![1, 1]).unwrap()).unwrap();
        assert_eq!(l.dim(), 4);
        let labels: Vec<&str> = l.basis().iter().map(|b| b.label.as_str()).collect();
        assert_eq!(labels, vec!["E11", "E22", "E12", "E21"]);
        // [E12, E21] = E11 + E22 for two odd units
        let i = l.index_of("E12").unwrap();
        let j = l.index_of("E21").unwrap();
        let mut got: Vec<(usize, f64)> = l.bracket_basis(i, j).to_vec();
        got.sort_by_key(|p| p.0);
        assert_eq!(got, vec![(0, 1.0), (1, 1.0)]);
        assert!(check_axioms(&l, 1e-12).passed);
        for i in 0..4 {
            for j in 0..4 {
                let m = glv_bracket(&mats[i], l.degree(i), &mats[j], l.degree(j));
                let mut via = CMat::zeros(2, 2);
                for &(k, c) in l.bracket_basis(i, j) {
                    via += &mats[k] * C64::new(c, 0.0);
                }
                assert!(rel_residual(&m, &via) < 1e-15);
            }
        }
    }

    #[test]
    fn glv_n2_sixteen_units() {
        let v = GradedSpace::new(2, vec![1, 1, 1, 1]).unwrap();
        let (l, mats) = glv(&v).unwrap();
        assert_eq!(l.dim(), 16);
        // S = E_{0,2} of degree e1 (degree 0 row, degree (1,0) col); T = E_{2,0}
        let s = l.index_of("E13").unwrap();
        let t = l.index_of("E31").unwrap();
        assert_eq!(l.degree(s), d(&[1, 0]));
        let br = glv_bracket(&mats[s], l.degree(s), &mats[t], l.degree(t));
        assert_eq!(br, &mats[s] * &mats[t] + &mats[t] * &mats[s]);
        assert!(check_axioms(&l, 1e-12).passed);
    }

    #[test]
    fn compact_form_is_an_algebra() {
        let v = GradedSpace::new(2, vec![1, 1, 0, 1]).unwrap();
        let (l, mats) = glv_compact(&v).unwrap();
        assert_eq!(l.dim(), 9);
        assert!(check_axioms(&l, 1e-12).passed);
        for i in 0..l.dim() {
            let x = glv_compact_coords(&l, &mats[i]);
            assert_eq!(x, l.basis_vector(i));
        }
    }

    #[test]
    fn sign_mutation_is_pinpointed() {
        let (l, _) = glv(&GradedSpace::new(1, vec![1, 1]).unwrap()).unwrap();
        let mut t = l.structure_triples();
        t[0].3 = -t[0].3;
        let basis = l.basis().iter().map(|b| (b.label.clone(), b.degree)).collect();
        let bad = ColorLieAlgebra::new(1, basis, &t).unwrap();
        let r = check_axioms(&bad, 1e-12);
        assert!(!r.passed);
        assert!(r.failures().any(|c| c.detail.is_some()));
    }

    #[test]
    fn zero_algebra_passes() {
        assert!(check_axioms(&ColorLieAlgebra::zero(2), 1e-12).passed);
        assert!(check_perfectness(&ColorLieAlgebra::zero(2)).passed());
    }

    #[test]
    fn literal_jacobi_sign_fails_on_so3() {
        // the cyclic form with β(a,b)β(a,c)[y,[z,x]] is not an identity
        let l = so3();
        let (x, y, z) = (l.basis_vector(0), l.basis_vector(0), l.basis_vector(1));
        let lhs = l.bracket(&x, &l.bracket(&y, &z));
        let literal = l.bracket(&l.bracket(&x, &y), &z) + l.bracket(&y, &l.bracket(&z, &x));
        assert!((lhs.clone() - literal).norm() > 0.5);
        let correct = l.bracket(&l.bracket(&x, &y), &z) + l.bracket(&y, &l.bracket(&x, &z));
        assert!((lhs - correct).norm() < 1e-15);
        assert!(check_axioms(&l, 1e-12).passed);
    }

    #[test]
    fn counterexample_not_perfect() {
        let l = ColorLieAlgebra::abelian(2, vec![("w".into(), d(&[1, 1]))]).unwrap();
        let p = check_perfectness(&l);
        assert!(!p.passed());
        let f = p.first_failure().unwrap();
        assert_eq!((f.sector, f.rank, f.dim), (d(&[1, 1]), 0, 1));
        let err = decompose_odd(&l, &l.basis_vector(0), DecompositionStrategy::MinNorm, 1e-9).unwrap_err();
        assert!(matches!(err, Error::NotPerfect { .. }));
    }

    #[test]
    fn decompositions_reproduce_target() {
        let v = GradedSpace::new(2, vec![1, 1, 1, 1]).unwrap();
        let (l, _) = glv(&v).unwrap();
        let p = check_perfectness(&l);
        assert!(p.passed(), "{}", p.report);
        let a = d(&[1, 1]);
        let mut x = RVec::zeros(l.dim());
        for (n, i) in l.sector(a).enumerate() {
            x[i] = 0.3 + n as f64;
        }
        for s in [DecompositionStrategy::MinNorm, DecompositionStrategy::ReversedPivot] {
            let dec = decompose_odd(&l, &x, s, 1e-9).unwrap();
            assert!((dec.evaluate(&l) - &x).norm() < 1e-9);
        }
        let empty = decompose_odd(&l, &RVec::zeros(l.dim()), DecompositionStrategy::MinNorm, 1e-9).unwrap();
        assert!(empty.terms.is_empty());
    }

    #[test]
    fn change_basis_preserves_axioms() {
        let (l, _) = glv_compact(&GradedSpace::new(1, vec![1, 1]).unwrap()).unwrap();
        let mut p = RMat::identity(l.dim(), l.dim());
        let r = l.sector(Degree::zero(1));
        p[(r.start, r.start + 1)] = 0.7;
        let l2 = l.change_basis(&p).unwrap();
        assert!(check_axioms(&l2, 1e-12).passed);
        let (g, b) = l.automorphism_residual(&RMat::identity(l.dim(), l.dim()));
        assert_eq!((g, b), (0.0, 0.0));
    }
}
