//! Named examples and seeded random generators of graded spaces, algebras
//! and representations. Random representations are built from hand-checked
//! seed representations by degree-preserving conjugation, sums and tensor
//! products, so they satisfy the axioms by construction.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::color_lie::{check_perfectness, glv_compact, glv_compact_coords, ColorLieAlgebra};
use crate::error::{Error, Result};
use crate::gns::graded_cyclic_span;
use crate::graded_linear::{GammaInnerSpace, GradedSpace, HomogeneousMap};
use crate::grading::{Character, Degree};
use crate::hc_rep::{trivial_rep, ExtraGenerator, HcPair, PartialRep, UnitaryRep};
use crate::linalg::{self, c, eye, CMat, CVec, RMat, I, ONE, ZERO};

/// Deterministic generator for a seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The pair with `g = ℝw`, `w` of degree `(1,1)`, and trivial `G₀`.
pub fn counterexample_pair() -> HcPair {
    let alg = ColorLieAlgebra::abelian(2, vec![("w".into(), Degree::from_index(2, 3))]).unwrap();
    HcPair::connected(alg)
}

/// The pre-representation of the counterexample on `ℂ` in degree 0: nothing
/// is supplied, so every condition holds vacuously.
pub fn counterexample_prerep() -> PartialRep {
    let space = GammaInnerSpace::standard(GradedSpace::trivial(2));
    PartialRep::new(counterexample_pair(), space, vec![None], vec![]).unwrap()
}

/// `n = 1`, basis `c` (even) and `y` (odd) with `[y, y] = c`.
pub fn clifford_pair() -> HcPair {
    let alg = ColorLieAlgebra::new(
        1,
        vec![("c".into(), Degree::zero(1)), ("y".into(), Degree::unit(1, 1))],
        &[(1, 1, 0, 1.0)],
    )
    .unwrap();
    HcPair::connected(alg)
}

/// The Clifford representation on a `(1|1)` space with
/// `ρ(y) = [[0, 1], [−i, 0]]`, `ρ(c) = 2ρ(y)² = −2i`, and cyclic vector `e₀`.
pub fn clifford_rep() -> (UnitaryRep, CVec) {
    let space = GammaInnerSpace::standard(GradedSpace::new(1, vec![1, 1]).unwrap());
    let ry = CMat::from_row_slice(2, 2, &[ZERO, ONE, -I, ZERO]);
    let rc = &ry * &ry * c(2.0, 0.0);
    let rep = UnitaryRep::new(clifford_pair(), space, vec![rc, ry], vec![]).unwrap();
    (rep, CVec::from_column_slice(&[ONE, ZERO]))
}

/// `Ad` of conjugation by a degree-preserving unitary `w` on the compact
/// form of `gl(V)`.
pub fn conjugation_ad(alg: &ColorLieAlgebra, mats: &[CMat], w: &CMat) -> RMat {
    let n = alg.dim();
    let mut ad = RMat::zeros(n, n);
    for (j, m) in mats.iter().enumerate() {
        ad.set_column(j, &glv_compact_coords(alg, &(w * m * w.adjoint())));
    }
    ad
}

/// The compact form of `gl(V)` with one extra component representative per
/// matrix in `extras` (degree-preserving unitaries), and its defining
/// representation on `V` with unit Grams.
pub fn glv_defining(v: &GradedSpace, extras: &[CMat]) -> Result<UnitaryRep> {
    let (alg, mats) = glv_compact(v)?;
    let gens = extras
        .iter()
        .enumerate()
        .map(|(k, w)| ExtraGenerator::new(format!("w{k}"), conjugation_ad(&alg, &mats, w)))
        .collect::<Result<Vec<_>>>()?;
    let pair = HcPair::new(alg, gens)?;
    UnitaryRep::new(pair, GammaInnerSpace::standard(v.clone()), mats, extras.to_vec())
}

/// Random graded space of the given rank with per-degree dimensions drawn
/// from `0..=max_per_degree` and total dimension in `1..=max_total`.
pub fn random_graded_space<R: Rng + ?Sized>(rng: &mut R, rank: u8, max_per_degree: usize, max_total: usize) -> GradedSpace {
    loop {
        let dims: Vec<usize> = (0..1usize << rank).map(|_| rng.gen_range(0..=max_per_degree)).collect();
        let total: usize = dims.iter().sum();
        if total >= 1 && total <= max_total {
            return GradedSpace::new(rank, dims).unwrap();
        }
    }
}

/// Random character of the given rank.
pub fn random_character<R: Rng + ?Sized>(rng: &mut R, rank: u8) -> Character {
    Character::from_mask(Degree::from_index(rank, rng.gen_range(0..1usize << rank)))
}

/// Random Hermitian positive-definite matrix with eigenvalues in `[0.5, 2]`.
pub fn random_hpd<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let u = linalg::random_unitary(rng, n);
    let d = CMat::from_diagonal(&CVec::from_fn(n, |_, _| c(rng.gen_range(0.5..2.0), 0.0)));
    let m = &u * d * u.adjoint();
    (&m + m.adjoint()) * c(0.5, 0.0)
}

/// Random `Γ`-inner product space: random positive-definite ordinary Grams
/// per degree and a random twist when `twisted`.
pub fn random_gamma_space<R: Rng + ?Sized>(rng: &mut R, space: GradedSpace, twisted: bool) -> GammaInnerSpace {
    let rank = space.rank();
    let grams = space.dims().iter().map(|&d| random_hpd(rng, d)).collect();
    let twist = if twisted { random_character(rng, rank) } else { Character::trivial(rank) };
    GammaInnerSpace::new(space, grams, twist).unwrap()
}

/// Random homogeneous map of degree `deg`.
pub fn random_homogeneous<R: Rng + ?Sized>(rng: &mut R, src: &GradedSpace, tgt: &GradedSpace, deg: Degree) -> HomogeneousMap {
    let m = linalg::random_complex(rng, tgt.total_dim(), src.total_dim());
    let mut h = HomogeneousMap::zero(src, tgt, deg);
    for b in src.support() {
        let rs = src.range(b);
        let rt = tgt.range(deg * b);
        for i in rt.clone() {
            for j in rs.clone() {
                h.matrix[(i, j)] = m[(i, j)];
            }
        }
    }
    h
}

/// Random degree-preserving unitary (block diagonal).
pub fn random_graded_unitary<R: Rng + ?Sized>(rng: &mut R, space: &GradedSpace) -> CMat {
    let n = space.total_dim();
    let mut u = CMat::zeros(n, n);
    for a in space.support() {
        let r = space.range(a);
        let b = linalg::random_unitary(rng, r.len());
        u.view_mut((r.start, r.start), (r.len(), r.len())).copy_from(&b);
    }
    u
}

/// Random invertible degree-preserving matrix: a graded unitary times a
/// positive diagonal with entries in `[0.5, 2]`.
pub fn random_graded_transport<R: Rng + ?Sized>(rng: &mut R, space: &GradedSpace) -> CMat {
    let u = random_graded_unitary(rng, space);
    let n = space.total_dim();
    let d = CMat::from_diagonal(&CVec::from_fn(n, |_, _| c(rng.gen_range(0.5..2.0), 0.0)));
    u * d
}

/// Random color algebra of dimension at most `max_dim`, in a random basis
/// obtained by a degree-preserving change of basis. Mixes compact
/// `gl(V)` forms, color Heisenberg algebras and products with abelian
/// factors.
pub fn random_color_algebra<R: Rng + ?Sized>(rng: &mut R, max_dim: usize) -> ColorLieAlgebra {
    let rank = rng.gen_range(1..=3u8);
    let base = match rng.gen_range(0..3) {
        0 => {
            let v = random_graded_space(rng, rank, 1, 2);
            glv_compact(&v).unwrap().0
        }
        _ => color_heisenberg(rng, rank, max_dim),
    };
    let alg = if base.dim() < max_dim && rng.gen_bool(0.3) {
        let deg = Degree::from_index(rank, rng.gen_range(0..1usize << rank));
        let ab = ColorLieAlgebra::abelian(rank, vec![("z".into(), deg)]).unwrap();
        base.direct_product(&ab, "'").unwrap()
    } else {
        base
    };
    random_basis_change(rng, &alg)
}

fn color_heisenberg<R: Rng + ?Sized>(rng: &mut R, rank: u8, max_dim: usize) -> ColorLieAlgebra {
    loop {
        let m = rng.gen_range(1..=3usize.min(max_dim));
        let degs: Vec<Degree> = (0..m)
            .map(|_| Degree::from_index(rank, rng.gen_range(0..1usize << rank)))
            .collect();
        let mut basis: Vec<(String, Degree)> = degs.iter().enumerate().map(|(i, &d)| (format!("x{i}"), d)).collect();
        let mut centre: Vec<(Degree, usize)> = Vec::new();
        let mut triples = Vec::new();
        let mut too_big = false;
        for i in 0..m {
            for j in i..m {
                let (a, b) = (degs[i], degs[j]);
                let sb = a.commutation(b).to_f64();
                if i == j && sb > 0.0 {
                    continue;
                }
                if !rng.gen_bool(0.7) {
                    continue;
                }
                let target = a * b;
                let k = match centre.iter().find(|(d, _)| *d == target) {
                    Some(&(_, k)) => k,
                    None => {
                        if basis.len() == max_dim {
                            too_big = true;
                            break;
                        }
                        basis.push((format!("z{}", centre.len()), target));
                        centre.push((target, basis.len() - 1));
                        basis.len() - 1
                    }
                };
                let cval = rng.gen_range(0.5..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                triples.push((i, j, k, cval));
                if i != j {
                    // [x_j, x_i] = −β(b, a)[x_i, x_j]
                    triples.push((j, i, k, -sb * cval));
                }
            }
            if too_big {
                break;
            }
        }
        if !too_big && basis.len() <= max_dim {
            return ColorLieAlgebra::new(rank, basis, &triples).unwrap();
        }
    }
}

/// Change to a random basis `y_j = Σ P_ij x_i` with `P` block diagonal per
/// degree and well conditioned.
pub fn random_basis_change<R: Rng + ?Sized>(rng: &mut R, l: &ColorLieAlgebra) -> ColorLieAlgebra {
    let n = l.dim();
    let mut p = RMat::zeros(n, n);
    for a in Degree::all(l.rank()) {
        let r = l.sector(a);
        if r.is_empty() {
            continue;
        }
        loop {
            let b = RMat::from_fn(r.len(), r.len(), |i, j| {
                let off: f64 = rng.gen_range(-0.5..0.5);
                if i == j { 1.0 + off } else { off }
            });
            let sv = linalg::singular_values(&b);
            if sv.last().copied().unwrap_or(0.0) > 0.3 {
                p.view_mut((r.start, r.start), (r.len(), r.len())).copy_from(&b);
                break;
            }
        }
    }
    l.change_basis(&p).unwrap()
}

/// A graded space whose compact `gl(V)` is perfect, with `rank = 2` and
/// total dimension at most `max_total` (at least 4).
pub fn random_perfect_space<R: Rng + ?Sized>(rng: &mut R, max_total: usize) -> GradedSpace {
    loop {
        let v = random_graded_space(rng, 2, 2, max_total);
        let (alg, _) = glv_compact(&v).unwrap();
        if check_perfectness(&alg).passed() {
            return v;
        }
    }
}

fn random_extras<R: Rng + ?Sized>(rng: &mut R, v: &GradedSpace) -> Vec<CMat> {
    if rng.gen_bool(0.5) {
        vec![random_graded_unitary(rng, v)]
    } else {
        Vec::new()
    }
}

/// A valid representation of a perfect `n = 2` pair of dimension at most
/// `max_dim`: the defining representation of compact `gl(V)` (or its sum
/// with a conjugated copy), transported to random Grams.
pub fn random_perfect_rep<R: Rng + ?Sized>(rng: &mut R, max_dim: usize) -> UnitaryRep {
    let doubled = max_dim >= 8 && rng.gen_bool(0.3);
    let v = random_perfect_space(rng, if doubled { max_dim / 2 } else { max_dim });
    let extras = random_extras(rng, &v);
    let base = glv_defining(&v, &extras).unwrap();
    let rep = if doubled {
        let other = base.transport(&random_graded_transport(rng, &v)).unwrap();
        base.direct_sum(&other).unwrap()
    } else {
        base
    };
    let s = random_graded_transport(rng, &rep.space.space);
    rep.transport(&s).unwrap()
}

/// Kinds of cyclic representations produced by [`random_cyclic_rep`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CyclicKind {
    Defining,
    DefiningPlusTrivial,
    TensorSquare,
}

/// A valid representation with a degree-0 cyclic vector, `rank ≤ 2`, of
/// dimension at most `max_dim` (at least 4).
pub fn random_cyclic_rep<R: Rng + ?Sized>(rng: &mut R, max_dim: usize) -> (UnitaryRep, CVec, CyclicKind) {
    let kinds = [CyclicKind::Defining, CyclicKind::DefiningPlusTrivial, CyclicKind::TensorSquare];
    let kind = *kinds.choose(rng).unwrap();
    loop {
        let rank = rng.gen_range(1..=2u8);
        let (per_degree, cap) = match kind {
            CyclicKind::Defining => (3, max_dim.min(8)),
            CyclicKind::DefiningPlusTrivial => (3, (max_dim - 1).min(7)),
            CyclicKind::TensorSquare => (2, 3),
        };
        let v = random_graded_space(rng, rank, per_degree, cap);
        if v.total_dim() < (cap + 1) / 2 {
            continue;
        }
        if v.dim(Degree::zero(rank)) == 0 {
            continue;
        }
        let extras = random_extras(rng, &v);
        let base = glv_defining(&v, &extras).unwrap();
        let x = random_degree_zero(rng, &v);
        let (rep, v0) = match kind {
            CyclicKind::Defining => (base, x),
            CyclicKind::DefiningPlusTrivial => {
                let t = trivial_rep(&base.pair).unwrap();
                let sum = base.direct_sum(&t).unwrap();
                let (left, right) = base.space.space.sum_embeddings(&t.space.space);
                let mut v0 = CVec::zeros(sum.dim());
                for (i, &k) in left.iter().enumerate() {
                    v0[k] = x[i];
                }
                v0[right[0]] = c(rng.gen_range(0.5..1.5), 0.0);
                (sum, v0)
            }
            CyclicKind::TensorSquare => {
                let sq = base.tensor(&base).unwrap();
                let y = random_degree_zero(rng, &v);
                let tp = crate::graded_linear::tensor_space(&v, &v).unwrap();
                let mut v0 = CVec::zeros(sq.dim());
                for i in 0..v.total_dim() {
                    for j in 0..v.total_dim() {
                        v0[tp.index_of(i, j)] = x[i] * y[j];
                    }
                }
                let (q, degs) = graded_cyclic_span(&sq, &v0, 1e-9).unwrap();
                if q.ncols() > max_dim {
                    continue;
                }
                let sub = sq.compress(&q, &degs, 1e-9).unwrap();
                // coordinates of v0 in the compressed basis, which is sorted by degree
                let mut order: Vec<usize> = (0..q.ncols()).collect();
                order.sort_by_key(|&j| degs[j]);
                let g = sq.space.ordinary_gram();
                let coords = q.adjoint() * &g * &v0;
                let v0c = CVec::from_fn(q.ncols(), |k, _| coords[order[k]]);
                (sub, v0c)
            }
        };
        let s = random_graded_transport(rng, &rep.space.space);
        let moved = rep.transport(&s).unwrap();
        return (moved, &s * v0, kind);
    }
}

fn random_degree_zero<R: Rng + ?Sized>(rng: &mut R, v: &GradedSpace) -> CVec {
    let mut x = CVec::zeros(v.total_dim());
    for k in v.range(Degree::zero(v.rank())) {
        x[k] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    if x.norm() < 0.1 {
        x[v.offset(Degree::zero(v.rank()))] = ONE;
    }
    x
}

/// A random representation for the `random-rep` generator: the Clifford
/// representation, or a compact `gl(V)` defining representation, conjugated
/// by random degree-preserving unitaries.
pub fn random_rep(seed: u64) -> (UnitaryRep, CVec) {
    let mut r = rng(seed);
    let (rep, v0) = if r.gen_bool(0.25) {
        clifford_rep()
    } else {
        let rank = r.gen_range(1..=2u8);
        let v = loop {
            let v = random_graded_space(&mut r, rank, 2, 4);
            if v.dim(Degree::zero(rank)) > 0 {
                break v;
            }
        };
        let extras = random_extras(&mut r, &v);
        let rep = glv_defining(&v, &extras).unwrap();
        let x = random_degree_zero(&mut r, &v);
        (rep, x)
    };
    let u = random_graded_unitary(&mut r, &rep.space.space);
    let moved = rep.transport(&u).unwrap();
    (moved, &u * v0)
}

/// Random coordinates supported on the sector `deg`.
pub fn random_coords<R: Rng + ?Sized>(rng: &mut R, l: &ColorLieAlgebra, deg: Degree) -> Result<Vec<f64>> {
    let r = l.sector(deg);
    if r.is_empty() {
        return Err(Error::Invalid(format!("sector {deg} is empty")));
    }
    let mut x = vec![0.0; l.dim()];
    for i in r {
        x[i] = rng.gen_range(-1.0..1.0);
    }
    Ok(x)
}

/// Unit Grams for every degree of `space`.
pub fn unit_grams(space: &GradedSpace) -> Vec<CMat> {
    space.dims().iter().map(|&d| eye(d)).collect()
}
