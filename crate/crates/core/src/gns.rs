//! Positive-definite functions on `𝒮`, reproducing-kernel reconstruction of
//! cyclic representations, cyclicity and unitary-equivalence certificates.
//!
//! Samples are monoid elements `(g, m)` with `g` from a finite list of group
//! samples and `m` a PBW monomial. The reconstructed space is spanned by
//! classes of `ψ_s`, with `(ψ_t, ψ_s) = ψ(s* t)`.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::Serialize;

use crate::enveloping::{pbw_monomials, EnvElement, Enveloping, Monoid, MonoidElement, PbwMonomial};
use crate::error::{Error, Result};
use crate::graded_linear::{GammaInnerSpace, GradedSpace};
use crate::grading::{Character, Degree};
use crate::hc_rep::{
    check_intertwiner, check_unitary_rep, matrix_coefficient, pi_matrix, GroupElement, HcPair,
    UnitaryRep,
};
use crate::linalg::{self, eye, rel_residual, rel_residual_vec, CMat, CVec, C64, ONE, ZERO};
use crate::report::Report;

/// Parameters of the exponential group samples.
pub const EXP_SAMPLE_TIMES: [f64; 2] = [0.5, 1.0];

/// An evaluatable function on `𝒮`, linear in the `𝔘(g_ℂ)` component.
pub trait PdFunction: Sync {
    fn pair(&self) -> &HcPair;

    /// The twist of the phase used by the star map.
    fn twist(&self) -> Character {
        Character::trivial(self.pair().algebra.rank())
    }

    fn eval(&self, s: &MonoidElement) -> Result<C64>;

    /// `G_ij = ψ(left_i* right_j)`. The default forms the products in the
    /// monoid and evaluates them.
    fn gram(&self, monoid: &Monoid, left: &[MonoidElement], right: &[MonoidElement]) -> Result<CMat> {
        let stars = left.iter().map(|t| monoid.star(t)).collect::<Result<Vec<_>>>()?;
        let entries: Vec<Result<C64>> = (0..left.len() * right.len())
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / right.len(), k % right.len());
                self.eval(&monoid.mul(&stars[i], &right[j])?)
            })
            .collect();
        let mut g = CMat::zeros(left.len(), right.len());
        for (k, e) in entries.into_iter().enumerate() {
            g[(k / right.len(), k % right.len())] = e?;
        }
        Ok(g)
    }

    /// `ψ(s* s)` for each element.
    fn gram_diag(&self, monoid: &Monoid, elems: &[MonoidElement]) -> Result<Vec<C64>> {
        elems
            .par_iter()
            .map(|s| Ok(self.gram(monoid, std::slice::from_ref(s), std::slice::from_ref(s))?[(0, 0)]))
            .collect()
    }
}

/// `φ_{v,w}(g, D) = (π(g) ρ(D) v, w)` for a representation.
///
/// Gram entries use `ψ(t* s) = (ρ̃(s) v, ρ̃(t) w)`, the *-representation
/// identity, which avoids normalizing long products; [`RepFunction::via_monoid`]
/// disables this shortcut.
#[derive(Clone, Debug)]
pub struct RepFunction {
    pub rep: UnitaryRep,
    pub v: CVec,
    pub w: CVec,
    pub via_monoid: bool,
}

impl RepFunction {
    /// `φ_{v,v}`.
    pub fn diagonal(rep: UnitaryRep, v: CVec) -> Self {
        RepFunction {
            rep,
            w: v.clone(),
            v,
            via_monoid: false,
        }
    }

    pub fn new(rep: UnitaryRep, v: CVec, w: CVec) -> Self {
        RepFunction {
            rep,
            v,
            w,
            via_monoid: false,
        }
    }

    /// `ρ̃(s) x` for each element, caching `π(g)` per group word.
    pub fn images(&self, elems: &[MonoidElement], x: &CVec) -> Result<CMat> {
        let cache: Mutex<HashMap<String, CMat>> = Mutex::new(HashMap::new());
        let cols: Vec<Result<CVec>> = elems
            .par_iter()
            .map(|s| {
                let key = s.group.to_string();
                let cached = cache.lock().unwrap().get(&key).cloned();
                let pi = match cached {
                    Some(p) => p,
                    None => {
                        let p = pi_matrix(&self.rep, &s.group)?;
                        cache.lock().unwrap().insert(key, p.clone());
                        p
                    }
                };
                Ok(pi * env_apply(&self.rep, &s.env, x)?)
            })
            .collect();
        let mut m = CMat::zeros(x.len(), elems.len());
        for (j, c) in cols.into_iter().enumerate() {
            m.set_column(j, &c?);
        }
        Ok(m)
    }
}

/// `ρ(D) x`, applying letters right to left.
pub fn env_apply(rep: &UnitaryRep, d: &EnvElement, x: &CVec) -> Result<CVec> {
    let mut out = CVec::zeros(x.len());
    for (m, c) in d.terms() {
        let mut y = x.clone();
        for &i in m.word().iter().rev() {
            y = &rep.rho[i].matrix * y;
        }
        out += y * *c;
    }
    Ok(out)
}

impl PdFunction for RepFunction {
    fn pair(&self) -> &HcPair {
        &self.rep.pair
    }

    fn twist(&self) -> Character {
        self.rep.space.twist()
    }

    fn eval(&self, s: &MonoidElement) -> Result<C64> {
        matrix_coefficient(&self.rep, &self.v, &self.w, s)
    }

    fn gram(&self, monoid: &Monoid, left: &[MonoidElement], right: &[MonoidElement]) -> Result<CMat> {
        if self.via_monoid {
            let stars = left.iter().map(|t| monoid.star(t)).collect::<Result<Vec<_>>>()?;
            let mut g = CMat::zeros(left.len(), right.len());
            for (i, st) in stars.iter().enumerate() {
                for (j, s) in right.iter().enumerate() {
                    g[(i, j)] = self.eval(&monoid.mul(st, s)?)?;
                }
            }
            return Ok(g);
        }
        let wl = self.images(left, &self.w)?;
        let yr = self.images(right, &self.v)?;
        Ok(wl.adjoint() * self.rep.space.ordinary_gram() * yr)
    }

    fn gram_diag(&self, monoid: &Monoid, elems: &[MonoidElement]) -> Result<Vec<C64>> {
        if self.via_monoid || self.v != self.w {
            return elems
                .iter()
                .map(|s| Ok(self.gram(monoid, std::slice::from_ref(s), std::slice::from_ref(s))?[(0, 0)]))
                .collect();
        }
        let y = self.images(elems, &self.v)?;
        let g = self.rep.space.ordinary_gram();
        Ok((0..elems.len())
            .map(|j| {
                let c = y.column(j);
                (c.adjoint() * &g * c)[(0, 0)]
            })
            .collect())
    }
}

/// `λ ψ`.
pub struct ScaledFunction<'a> {
    pub inner: &'a dyn PdFunction,
    pub lambda: f64,
}

impl PdFunction for ScaledFunction<'_> {
    fn pair(&self) -> &HcPair {
        self.inner.pair()
    }
    fn twist(&self) -> Character {
        self.inner.twist()
    }
    fn eval(&self, s: &MonoidElement) -> Result<C64> {
        Ok(self.inner.eval(s)? * self.lambda)
    }
    fn gram(&self, monoid: &Monoid, left: &[MonoidElement], right: &[MonoidElement]) -> Result<CMat> {
        Ok(self.inner.gram(monoid, left, right)? * C64::new(self.lambda, 0.0))
    }
    fn gram_diag(&self, monoid: &Monoid, elems: &[MonoidElement]) -> Result<Vec<C64>> {
        Ok(self
            .inner
            .gram_diag(monoid, elems)?
            .into_iter()
            .map(|z| z * self.lambda)
            .collect())
    }
}

/// Key of a table entry: a group word and a PBW monomial.
pub fn table_key(g: &GroupElement, m: &PbwMonomial) -> String {
    format!("{g}|{:?}", m.word())
}

/// A function given by its values on `(g, m)` for PBW monomials `m`,
/// extended linearly in the monomial.
#[derive(Clone, Debug)]
pub struct TableFunction {
    pub pair: HcPair,
    pub twist: Character,
    pub entries: HashMap<String, C64>,
}

impl PdFunction for TableFunction {
    fn pair(&self) -> &HcPair {
        &self.pair
    }
    fn twist(&self) -> Character {
        self.twist
    }
    fn eval(&self, s: &MonoidElement) -> Result<C64> {
        let mut acc = ZERO;
        for (m, c) in s.env.terms() {
            let key = table_key(&s.group, m);
            let v = self.entries.get(&key).ok_or(Error::TableMiss(key))?;
            acc += c * v;
        }
        Ok(acc)
    }
}

/// Evaluates `inner` through the monoid (never a shortcut) and records
/// every `(g, m)` value it needed; used to tabulate a function.
pub struct Recording<'a> {
    pub inner: &'a dyn PdFunction,
    pub seen: Mutex<HashMap<String, (GroupElement, PbwMonomial, C64)>>,
}

impl<'a> Recording<'a> {
    pub fn new(inner: &'a dyn PdFunction) -> Self {
        Recording {
            inner,
            seen: Mutex::new(HashMap::new()),
        }
    }

    /// The recorded values, sorted by key.
    pub fn entries(&self) -> Vec<(GroupElement, PbwMonomial, C64)> {
        let seen = self.seen.lock().unwrap();
        let mut keys: Vec<&String> = seen.keys().collect();
        keys.sort();
        keys.into_iter().map(|k| seen[k].clone()).collect()
    }

    pub fn into_table(self) -> TableFunction {
        TableFunction {
            pair: self.inner.pair().clone(),
            twist: self.inner.twist(),
            entries: self
                .seen
                .into_inner()
                .unwrap()
                .into_iter()
                .map(|(k, (_, _, v))| (k, v))
                .collect(),
        }
    }
}

impl PdFunction for Recording<'_> {
    fn pair(&self) -> &HcPair {
        self.inner.pair()
    }
    fn twist(&self) -> Character {
        self.inner.twist()
    }
    fn eval(&self, s: &MonoidElement) -> Result<C64> {
        let mut acc = ZERO;
        for (m, c) in s.env.terms() {
            let single = MonoidElement::new(s.group.clone(), EnvElement::from_monomial(m.clone(), ONE));
            let v = self.inner.eval(&single)?;
            self.seen
                .lock()
                .unwrap()
                .insert(table_key(&s.group, m), (s.group.clone(), m.clone(), v));
            acc += c * v;
        }
        Ok(acc)
    }
}

/// The default group samples: identity, the extra generators, and
/// `exp(t x)` for basis elements `x ∈ g₀` and `t ∈ {0.5, 1.0}`.
pub fn default_group_samples(pair: &HcPair) -> Vec<GroupElement> {
    let l = &pair.algebra;
    let mut out = vec![GroupElement::identity()];
    out.extend((0..pair.extras.len()).map(GroupElement::extra));
    for x in l.sector(Degree::zero(l.rank())) {
        for t in EXP_SAMPLE_TIMES {
            out.push(GroupElement::exp(x, t));
        }
    }
    out
}

/// Finite truncation of `𝒮`: group samples × PBW monomials up to a level.
#[derive(Clone, Debug)]
pub struct SampleSet {
    pub elements: Vec<MonoidElement>,
    pub degrees: Vec<Degree>,
    pub level: usize,
}

impl SampleSet {
    /// Ordered by level, then group sample, then monomial; the first element
    /// is `1_𝒮`.
    pub fn generate(pair: &HcPair, groups: &[GroupElement], level: usize) -> Self {
        let l = &pair.algebra;
        let monos = pbw_monomials(l, level);
        let mut by_level: Vec<Vec<&PbwMonomial>> = vec![Vec::new(); level + 1];
        for m in &monos {
            by_level[m.level()].push(m);
        }
        let mut elements = Vec::new();
        let mut degrees = Vec::new();
        let mut groups: Vec<GroupElement> = groups.to_vec();
        if !groups.first().is_some_and(GroupElement::is_identity) {
            groups.retain(|g| !g.is_identity());
            groups.insert(0, GroupElement::identity());
        }
        for ms in &by_level {
            for g in &groups {
                for m in ms {
                    elements.push(MonoidElement::new(
                        g.clone(),
                        EnvElement::from_monomial((*m).clone(), ONE),
                    ));
                    degrees.push(m.degree(l));
                }
            }
        }
        SampleSet {
            elements,
            degrees,
            level,
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

fn monoid_for<'a>(psi: &'a dyn PdFunction, cap: usize) -> Monoid<'a> {
    let pair = psi.pair();
    Monoid::with_env(pair, Enveloping::new(&pair.algebra).with_cap(cap).with_twist(psi.twist()))
}

/// Support and positivity of `ψ` on a sample set.
pub fn check_positive_definite(psi: &dyn PdFunction, samples: &SampleSet, tol: f64) -> Report {
    let mut r = Report::new("check_positive_definite");
    r.note("verified on sample set");
    if samples.is_empty() {
        r.require("sample set nonempty", false, None);
        return r;
    }
    let monoid = monoid_for(psi, 4 * samples.level + 4);
    let mut support = 0.0f64;
    let mut support_at = None;
    for (s, d) in samples.elements.iter().zip(&samples.degrees) {
        if d.is_zero() {
            continue;
        }
        match psi.eval(s) {
            Ok(v) if v.norm() > support => {
                support = v.norm();
                support_at = Some(format!("g = {}, degree {d}", s.group));
            }
            Ok(_) => {}
            Err(e) => {
                r.require("(i) evaluation", false, Some(e.to_string()));
                return r;
            }
        }
    }
    r.check_with("(i) |psi(s)| vanishes off S_0", support, tol, support_at);
    let g = match psi.gram(&monoid, &samples.elements, &samples.elements) {
        Ok(g) => g,
        Err(e) => {
            r.require("(ii) Gram assembly", false, Some(e.to_string()));
            return r;
        }
    };
    let norm = linalg::frob(&g).max(1.0);
    r.check("(ii) Gram Hermitian", linalg::hermitian_defect(&g), tol);
    let min = linalg::min_eigenvalue(&g);
    r.check_with(
        "(ii) Gram min eigenvalue >= -tol ||G|| (negated, relative)",
        (-min / norm).max(0.0),
        tol,
        Some(format!("min eigenvalue {min:e}, ||G|| {norm:e}, {} samples", samples.len())),
    );
    r
}

#[derive(Clone, Debug)]
pub struct GnsOptions {
    pub level_cap: usize,
    /// Relative threshold for the rank of the sample Gram and the retained
    /// eigenvalues.
    pub tol: f64,
    /// Tolerance for the translation-escape and validation checks.
    pub check_tol: f64,
    pub group_samples: Option<Vec<GroupElement>>,
    /// Reverses the candidate order before pivoting (the reconstruction is
    /// unique up to equivalence, so this is a consistency probe).
    pub reverse_order: bool,
}

impl Default for GnsOptions {
    fn default() -> Self {
        GnsOptions {
            level_cap: crate::enveloping::DEFAULT_LEVEL_CAP,
            tol: 1e-9,
            check_tol: 1e-6,
            group_samples: None,
            reverse_order: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GramSpectrum {
    pub retained: Vec<f64>,
    /// Largest residual diagonal left after pivoting (mass of the discarded
    /// directions).
    pub discarded: f64,
}

#[derive(Clone, Debug)]
pub struct GnsResult {
    pub rep: UnitaryRep,
    pub cyclic: CVec,
    pub spectrum: GramSpectrum,
    pub level_used: usize,
    pub ranks: Vec<usize>,
    pub report: Report,
}

struct Pivoting {
    pivots: Vec<usize>,
    discarded: f64,
}

/// Pivoted Cholesky of the Gram `ψ(s_i* s_j)` over `cands`, stopping when
/// every residual diagonal is below `tol · max diag`.
fn pivoted_cholesky(psi: &dyn PdFunction, monoid: &Monoid, cands: &[MonoidElement], tol: f64) -> Result<Pivoting> {
    let m = cands.len();
    let diag: Vec<f64> = psi.gram_diag(monoid, cands)?.iter().map(|z| z.re).collect();
    let top = diag.iter().copied().fold(0.0f64, f64::max);
    let mut res = diag;
    let mut cols: Vec<CVec> = Vec::new();
    let mut pivots = Vec::new();
    let thresh = tol * top;
    loop {
        let (p, &best) = match res
            .iter()
            .enumerate()
            .filter(|(i, _)| !pivots.contains(i))
            .max_by(|a, b| a.1.total_cmp(b.1))
        {
            Some(x) => x,
            None => break,
        };
        if best <= thresh || top == 0.0 {
            break;
        }
        let k = psi.gram(monoid, cands, std::slice::from_ref(&cands[p]))?;
        let mut col: CVec = k.column(0).into_owned();
        for prev in &cols {
            let s = prev[p].conj();
            col -= prev * s;
        }
        let scale = C64::new(1.0 / best.sqrt(), 0.0);
        col *= scale;
        for i in 0..m {
            res[i] -= col[i].norm_sqr();
        }
        res[p] = 0.0;
        cols.push(col);
        pivots.push(p);
        if pivots.len() == m {
            break;
        }
    }
    let discarded = res
        .iter()
        .enumerate()
        .filter(|(i, _)| !pivots.contains(i))
        .map(|(_, &r)| r)
        .fold(0.0f64, f64::max);
    Ok(Pivoting { pivots, discarded })
}

/// Reproducing-kernel reconstruction of a cyclic representation from `ψ`.
pub fn gns_construct(psi: &dyn PdFunction, opts: &GnsOptions) -> Result<GnsResult> {
    let pair = psi.pair();
    let l = &pair.algebra;
    let rank = l.rank();
    let monoid = monoid_for(psi, 2 * opts.level_cap + 4);
    let groups = opts
        .group_samples
        .clone()
        .unwrap_or_else(|| default_group_samples(pair));

    let mut ranks = Vec::new();
    let mut previous: Option<(SampleSet, Pivoting)> = None;
    let mut stable = None;
    for level in 0..=opts.level_cap {
        let mut set = SampleSet::generate(pair, &groups, level);
        if opts.reverse_order {
            set.elements.reverse();
            set.degrees.reverse();
        }
        let piv = pivoted_cholesky(psi, &monoid, &set.elements, opts.tol)?;
        ranks.push(piv.pivots.len());
        if let Some((pset, ppiv)) = previous.take() {
            if ppiv.pivots.len() == piv.pivots.len() {
                stable = Some((level - 1, pset, ppiv));
                break;
            }
        }
        previous = Some((set, piv));
    }
    let Some((level_used, set, piv)) = stable else {
        return Err(Error::NoStabilization {
            cap: opts.level_cap,
            ranks,
        });
    };

    let mut report = Report::new("gns_construct");
    report.note(format!("Gram ranks by level: {ranks:?}; stabilized at level {level_used}"));

    // pivots grouped by degree
    let mut pivots: Vec<usize> = piv.pivots.clone();
    pivots.sort_by_key(|&i| (set.degrees[i], i));
    let pel: Vec<MonoidElement> = pivots.iter().map(|&i| set.elements[i].clone()).collect();
    let pdeg: Vec<Degree> = pivots.iter().map(|&i| set.degrees[i]).collect();
    let kp = psi.gram(&monoid, &pel, &pel)?;
    let knorm = linalg::frob(&kp).max(1.0);
    let mut cross = 0.0f64;
    for i in 0..pel.len() {
        for j in 0..pel.len() {
            if pdeg[i] != pdeg[j] {
                cross = cross.max(kp[(i, j)].norm());
            }
        }
    }
    report.check("Gram vanishes between distinct degrees", cross / knorm, opts.check_tol);
    report.check("pivot Gram Hermitian", linalg::hermitian_defect(&kp), opts.check_tol);

    let mut dims = vec![0usize; 1 << rank];
    for d in &pdeg {
        dims[d.index()] += 1;
    }
    let space = GradedSpace::new(rank, dims)?;
    let r = pel.len();
    let mut c = CMat::zeros(r, r);
    let mut retained = Vec::new();
    for a in space.support() {
        let rg = space.range(a);
        let blk = kp.view((rg.start, rg.start), (rg.len(), rg.len())).into_owned();
        let (vals, vecs) = linalg::hermitian_eigen(&blk);
        for (j, &lam) in vals.iter().enumerate() {
            if lam <= opts.tol * knorm {
                return Err(Error::NotPositiveDefinite(format!(
                    "pivot Gram eigenvalue {lam:e} at degree {a} below {:e}",
                    opts.tol * knorm
                )));
            }
            retained.push(lam);
            let s = C64::new(1.0 / lam.sqrt(), 0.0);
            for i in 0..rg.len() {
                c[(rg.start + i, rg.start + j)] = vecs[(i, j)] * s;
            }
        }
    }
    retained.sort_by(|a, b| b.total_cmp(a));

    // right translation by (1, x_i) and (g_k, 1)
    let mut translators: Vec<MonoidElement> = (0..l.dim())
        .map(|i| MonoidElement::from_env(EnvElement::generator(i)))
        .collect();
    translators.extend((0..pair.extras.len()).map(|k| MonoidElement::from_group(GroupElement::extra(k))));
    let ops: Vec<Result<(CMat, f64)>> = translators
        .par_iter()
        .map(|t| {
            let moved = pel.iter().map(|p| monoid.mul(t, p)).collect::<Result<Vec<_>>>()?;
            let gr = psi.gram(&monoid, &pel, &moved)?;
            let grr = psi.gram(&monoid, &moved, &moved)?;
            let m = c.adjoint() * gr * &c;
            let norms = c.adjoint() * grr * &c;
            let mut escape = 0.0f64;
            for k in 0..r {
                let inside: f64 = (0..r).map(|j| m[(j, k)].norm_sqr()).sum();
                let total = norms[(k, k)].re;
                escape = escape.max((total - inside).abs() / total.abs().max(1.0));
            }
            Ok((m, escape))
        })
        .collect();
    let mut mats = Vec::with_capacity(ops.len());
    let mut escape = 0.0f64;
    for o in ops {
        let (m, e) = o?;
        escape = escape.max(e);
        mats.push(m);
    }
    if escape > opts.check_tol {
        return Err(Error::TranslationEscape {
            residual: escape,
            tol: opts.check_tol,
        });
    }
    report.check("right translation stays in the stabilized span", escape, opts.check_tol);
    let pi = mats.split_off(l.dim());
    let grams = space.dims().iter().map(|&d| eye(d)).collect();
    let hspace = GammaInnerSpace::new(space.clone(), grams, psi.twist())?;
    // clear the numerically zero off-degree entries
    let rho = mats
        .into_iter()
        .enumerate()
        .map(|(i, m)| {
            crate::graded_linear::HomogeneousMap::from_matrix(&space, &space, l.degree(i), m, opts.check_tol)
                .map(|h| h.matrix)
        })
        .collect::<Result<Vec<_>>>()?;
    let rep = UnitaryRep::new(pair.clone(), hspace, rho, pi)?;

    let one = [monoid.one()];
    let g1 = psi.gram(&monoid, &pel, &one)?;
    let cyclic: CVec = c.adjoint() * g1.column(0);
    let psi1 = psi.eval(&monoid.one())?.re;
    report.check(
        "cyclic vector norm^2 equals psi(1)",
        (cyclic.norm_squared() - psi1).abs() / psi1.abs().max(1.0),
        opts.check_tol,
    );
    let deg = rep.space.space.homogeneous_degree(&cyclic, 1e-9);
    report.require(
        "cyclic vector has degree 0",
        deg.is_some_and(|d| d.is_zero()),
        None,
    );
    report.absorb("reconstructed representation", check_unitary_rep(&rep, opts.check_tol));
    report.absorb("cyclicity", check_cyclic(&rep, &cyclic, opts.tol));
    Ok(GnsResult {
        rep,
        cyclic,
        spectrum: GramSpectrum {
            retained,
            discarded: piv.discarded,
        },
        level_used,
        ranks,
        report,
    })
}

/// Generators used to grow cyclic spans: `ρ(x)` for basis `x`, and `π` of
/// the extra generators and exponential samples.
fn span_generators(r: &UnitaryRep) -> Result<Vec<CMat>> {
    let mut gens: Vec<CMat> = r.rho.iter().map(|m| m.matrix.clone()).collect();
    for g in default_group_samples(&r.pair).iter().skip(1) {
        gens.push(pi_matrix(r, g)?);
    }
    Ok(gens)
}

/// Orthonormal basis (for the ordinary inner product) of the smallest
/// invariant subspace containing `v`.
pub fn cyclic_span(r: &UnitaryRep, v: &CVec, tol: f64) -> Result<CMat> {
    let gens = span_generators(r)?;
    let g = r.space.ordinary_gram();
    let n = r.dim();
    let (mut basis, _) = linalg::gram_schmidt(&CMat::from_columns(&[v.clone()]), &g, tol);
    if basis.ncols() == 0 {
        return Ok(CMat::zeros(n, 0));
    }
    let scale = (v.adjoint() * &g * v)[(0, 0)].re.sqrt();
    let mut frontier = basis.clone();
    while frontier.ncols() > 0 && basis.ncols() < n {
        let mut cand = Vec::new();
        for m in &gens {
            let img = m * &frontier;
            cand.extend(img.column_iter().map(|c| c.into_owned()));
        }
        let mut added = Vec::new();
        for w in cand {
            let mut w = w;
            for _ in 0..2 {
                let coef = basis.adjoint() * &g * &w;
                w -= &basis * coef;
            }
            let nw = (w.adjoint() * &g * &w)[(0, 0)].re.max(0.0).sqrt();
            if nw > tol * scale.max(1e-300) && nw > 0.0 {
                let q = w / C64::new(nw, 0.0);
                basis = CMat::from_columns(&basis.column_iter().map(|c| c.into_owned()).chain([q.clone()]).collect::<Vec<_>>());
                added.push(q);
                if basis.ncols() == n {
                    break;
                }
            }
        }
        frontier = if added.is_empty() { CMat::zeros(n, 0) } else { CMat::from_columns(&added) };
    }
    Ok(basis)
}

/// Homogeneous orthonormal basis of the cyclic span of a homogeneous `v`,
/// with the degree of each column.
pub fn graded_cyclic_span(r: &UnitaryRep, v: &CVec, tol: f64) -> Result<(CMat, Vec<Degree>)> {
    let sp = &r.space.space;
    if sp.homogeneous_degree(v, 1e-12).is_none() {
        return Err(Error::Invalid("graded cyclic span needs a homogeneous vector".into()));
    }
    let basis = cyclic_span(r, v, tol)?;
    // split every basis vector into degree components and re-orthonormalize
    let g = r.space.ordinary_gram();
    let mut cols = Vec::new();
    let mut degs = Vec::new();
    for a in sp.support() {
        let parts: Vec<CVec> = basis.column_iter().map(|c| sp.project(&c.into_owned(), a)).collect();
        if parts.is_empty() {
            continue;
        }
        let (q, _) = linalg::gram_schmidt(&CMat::from_columns(&parts), &g, 1e-8);
        for c in q.column_iter() {
            cols.push(c.into_owned());
            degs.push(a);
        }
    }
    if cols.len() != basis.ncols() {
        return Err(Error::Invalid(format!(
            "cyclic span of dimension {} is not graded ({} homogeneous directions)",
            basis.ncols(),
            cols.len()
        )));
    }
    let m = if cols.is_empty() { CMat::zeros(sp.total_dim(), 0) } else { CMat::from_columns(&cols) };
    Ok((m, degs))
}

/// Whether `ρ̃(𝒮) v` spans the whole space.
pub fn check_cyclic(r: &UnitaryRep, v: &CVec, tol: f64) -> Report {
    let mut rep = Report::new("check_cyclic");
    match cyclic_span(r, v, tol) {
        Ok(b) => {
            rep.check_with(
                "span of rho~(S)v equals the space (dim - span)",
                (r.dim() - b.ncols()) as f64,
                0.0,
                Some(format!("span {} of {}", b.ncols(), r.dim())),
            );
        }
        Err(e) => {
            rep.require("cyclic span", false, Some(e.to_string()));
        }
    }
    rep
}

#[derive(Clone, Debug)]
pub struct Equivalence {
    pub intertwiner: CMat,
    pub level: usize,
    pub samples: usize,
    pub report: Report,
}

/// Greedy column selection: indices of columns that each raise the rank,
/// by modified Gram-Schmidt with a threshold relative to the largest column.
fn spanning_columns(m: &CMat, rel: f64) -> Vec<usize> {
    let top = m.column_iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    let mut q: Vec<CVec> = Vec::new();
    let mut keep = Vec::new();
    for (j, col) in m.column_iter().enumerate() {
        let mut w = col.into_owned();
        for _ in 0..2 {
            for b in &q {
                let c = b.dotc(&w);
                w -= b * c;
            }
        }
        let n = w.norm();
        if n > rel * top && top > 0.0 {
            q.push(w / C64::new(n, 0.0));
            keep.push(j);
            if q.len() == m.nrows() {
                break;
            }
        }
    }
    keep
}

/// Builds `T: ρ̃₁(s)v₁ ↦ ρ̃₂(s)v₂` and certifies it as a grading-preserving
/// isometric intertwiner with `T v₁ = v₂`.
pub fn unitary_equivalence(
    r1: &UnitaryRep,
    v1: &CVec,
    r2: &UnitaryRep,
    v2: &CVec,
    tol: f64,
    level_cap: usize,
) -> Result<Equivalence> {
    let f1 = RepFunction::diagonal(r1.clone(), v1.clone());
    let f2 = RepFunction::diagonal(r2.clone(), v2.clone());
    let groups = default_group_samples(&r1.pair);
    let mut prev = None;
    let mut found = None;
    for level in 0..=level_cap {
        let set = SampleSet::generate(&r1.pair, &groups, level);
        let a1 = f1.images(&set.elements, v1)?;
        let a2 = f2.images(&set.elements, v2)?;
        let k1 = linalg::numerical_rank_c(&a1, 1e-10);
        let k2 = linalg::numerical_rank_c(&a2, 1e-10);
        if let Some((p1, p2)) = prev {
            if p1 == k1 && p2 == k2 {
                found = Some((level, set, a1, a2));
                break;
            }
        }
        prev = Some((k1, k2));
    }
    let Some((level, set, a1, a2)) = found else {
        return Err(Error::NoStabilization {
            cap: level_cap,
            ranks: Vec::new(),
        });
    };
    let h1 = r1.space.ordinary_gram();
    let h2 = r2.space.ordinary_gram();
    // coefficients ψ(s* p) against a spanning subset p of both sample spans
    let stacked = CMat::from_fn(a1.nrows() + a2.nrows(), a1.ncols(), |i, j| {
        if i < a1.nrows() {
            a1[(i, j)]
        } else {
            a2[(i - a1.nrows(), j)]
        }
    });
    let piv = spanning_columns(&stacked, 1e-10);
    let p1 = a1.select_columns(&piv);
    let p2 = a2.select_columns(&piv);
    let g1 = a1.adjoint() * &h1 * &p1;
    let g2 = a2.adjoint() * &h2 * &p2;
    let coeff = rel_residual(&g1, &g2);
    if coeff > tol {
        return Err(Error::CoefficientsDisagree { residual: coeff, tol });
    }
    let mut report = Report::new("unitary_equivalence");
    report.check("matrix coefficients agree on the sample set", coeff, tol);
    let t = &a2 * linalg::pinv_c(&a1, 1e-10);
    let wd = rel_residual(&(&t * &a1), &a2);
    if wd > tol {
        return Err(Error::Equivalence {
            what: "well-defined on the sample span",
            residual: wd,
            tol,
        });
    }
    report.check("T well-defined: T A1 = A2", wd, tol);
    let iso = rel_residual(&(t.adjoint() * &h2 * &t), &h1);
    report.check("T isometric: T^H G2 T = G1", iso, tol);
    report.absorb("intertwining", check_intertwiner(&t, r1, r2, tol));
    report.check("T v1 = v2", rel_residual_vec(&(&t * v1), v2), tol);
    if let Some(bad) = report.failures().next() {
        let what: &'static str = match bad.name.as_str() {
            n if n.starts_with("T isometric") => "isometry",
            n if n.starts_with("T v1") => "cyclic vector",
            _ => "intertwining",
        };
        return Err(Error::Equivalence {
            what,
            residual: bad.residual,
            tol,
        });
    }
    Ok(Equivalence {
        intertwiner: t,
        level,
        samples: set.len(),
        report,
    })
}

#[derive(Clone, Debug)]
pub struct Roundtrip {
    pub gns: GnsResult,
    pub equivalence: Equivalence,
    pub cyclic_dim: usize,
    pub report: Report,
}

/// `ψ = φ_{v₀,v₀}`, positivity, reconstruction, and equivalence with the
/// original.
pub fn gns_roundtrip(r: &UnitaryRep, v0: &CVec, opts: &GnsOptions) -> Result<Roundtrip> {
    let mut report = Report::new("gns_roundtrip");
    let valid = check_unitary_rep(r, opts.check_tol);
    if !valid.passed {
        return Err(Error::Check {
            operation: "gns_roundtrip".into(),
            detail: format!("input representation fails its checks:\n{valid}"),
        });
    }
    report.absorb("input representation", valid);
    let deg = r.space.space.homogeneous_degree(v0, 1e-12);
    if !deg.is_some_and(|d| d.is_zero()) {
        return Err(Error::Invalid("gns_roundtrip needs a cyclic vector of degree 0".into()));
    }
    let span = cyclic_span(r, v0, opts.tol)?.ncols();
    if span < r.dim() {
        return Err(Error::NotCyclic {
            span,
            total: r.dim(),
        });
    }
    let psi = RepFunction::diagonal(r.clone(), v0.clone());
    let gns = gns_construct(&psi, opts)?;
    let groups = opts
        .group_samples
        .clone()
        .unwrap_or_else(|| default_group_samples(&r.pair));
    let pd_set = SampleSet::generate(&r.pair, &groups, gns.level_used.min(2));
    report.absorb("positive definiteness", check_positive_definite(&psi, &pd_set, 1e-8));
    report.absorb("reconstruction", gns.report.clone());
    report.check_with(
        "reconstruction dimension equals cyclic span",
        (gns.rep.dim() as f64 - span as f64).abs(),
        0.0,
        Some(format!("reconstructed {}, cyclic span {span}", gns.rep.dim())),
    );
    let eq = unitary_equivalence(r, v0, &gns.rep, &gns.cyclic, opts.check_tol, opts.level_cap + 1)?;
    report.absorb("equivalence", eq.report.clone());
    Ok(Roundtrip {
        gns,
        equivalence: eq,
        cyclic_dim: span,
        report,
    })
}

/// Matrix coefficients `ψ(s)` of a reconstruction against the original on a
/// sample set; the maximum absolute difference.
pub fn coefficient_gap(psi: &dyn PdFunction, rec: &GnsResult, samples: &SampleSet) -> Result<f64> {
    let mut gap = 0.0f64;
    for s in &samples.elements {
        let a = psi.eval(s)?;
        let b = matrix_coefficient(&rec.rep, &rec.cyclic, &rec.cyclic, s)?;
        gap = gap.max((a - b).norm());
    }
    Ok(gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{clifford_rep, random_cyclic_rep, rng};
    use crate::hc_rep::trivial_rep;

    #[test]
    fn clifford_roundtrip() {
        let (r, v0) = clifford_rep();
        let rt = gns_roundtrip(&r, &v0, &GnsOptions::default()).unwrap();
        assert!(rt.report.passed, "{}", rt.report);
        assert_eq!(rt.gns.rep.dim(), 2);
        assert_eq!(rt.cyclic_dim, 2);
    }

    #[test]
    fn trivial_stabilizes_at_zero() {
        let (r, _) = clifford_rep();
        let t = trivial_rep(&r.pair).unwrap();
        let psi = RepFunction::diagonal(t, CVec::from_element(1, ONE));
        let g = gns_construct(&psi, &GnsOptions::default()).unwrap();
        assert_eq!(g.level_used, 0);
        assert_eq!(g.rep.dim(), 1);
        assert!(g.report.passed);
    }

    #[test]
    fn zero_function_is_positive() {
        let (r, _) = clifford_rep();
        let psi = RepFunction::diagonal(r.clone(), CVec::zeros(2));
        let set = SampleSet::generate(&r.pair, &default_group_samples(&r.pair), 2);
        assert!(check_positive_definite(&psi, &set, 1e-10).passed);
    }

    #[test]
    fn off_diagonal_coefficient_not_positive() {
        let (r, _) = clifford_rep();
        let v = CVec::from_column_slice(&[ONE, ZERO]);
        let w = CVec::from_column_slice(&[ZERO, ONE]);
        let psi = RepFunction::new(r.clone(), v, w);
        let set = SampleSet::generate(&r.pair, &default_group_samples(&r.pair), 1);
        assert!(!check_positive_definite(&psi, &set, 1e-10).passed);
    }

    #[test]
    fn shortcut_matches_monoid_path() {
        let mut g = rng(5);
        let (r, v0, _) = random_cyclic_rep(&mut g, 6);
        let fast = RepFunction::diagonal(r.clone(), v0.clone());
        let slow = RepFunction {
            via_monoid: true,
            ..fast.clone()
        };
        let set = SampleSet::generate(&r.pair, &default_group_samples(&r.pair), 2);
        // a spread of elements across levels and group samples
        let picked: Vec<MonoidElement> = set.elements.iter().step_by(set.len() / 24 + 1).cloned().collect();
        let monoid = monoid_for(&fast, 8);
        let a = fast.gram(&monoid, &picked, &picked).unwrap();
        let b = slow.gram(&monoid, &picked, &picked).unwrap();
        assert!(rel_residual(&a, &b) < 1e-10);
    }

    #[test]
    fn scaling_scales_cyclic_vector() {
        let (r, v0) = clifford_rep();
        let psi = RepFunction::diagonal(r, v0);
        let scaled = ScaledFunction {
            inner: &psi,
            lambda: 4.0,
        };
        let opts = GnsOptions::default();
        let a = gns_construct(&psi, &opts).unwrap();
        let b = gns_construct(&scaled, &opts).unwrap();
        assert_eq!(a.rep.dim(), b.rep.dim());
        for (x, y) in a.rep.rho.iter().zip(&b.rep.rho) {
            assert!(rel_residual(&x.matrix, &y.matrix) < 1e-9);
        }
        assert!(rel_residual_vec(&(&a.cyclic * C64::new(2.0, 0.0)), &b.cyclic) < 1e-9);
    }

    #[test]
    fn table_reproduces_reconstruction() {
        let (r, v0) = clifford_rep();
        let psi = RepFunction {
            via_monoid: true,
            ..RepFunction::diagonal(r, v0)
        };
        let rec = Recording::new(&psi);
        let opts = GnsOptions::default();
        let a = gns_construct(&rec, &opts).unwrap();
        let table = rec.into_table();
        let b = gns_construct(&table, &opts).unwrap();
        let eq = unitary_equivalence(&a.rep, &a.cyclic, &b.rep, &b.cyclic, 1e-8, 4).unwrap();
        assert!(eq.report.passed);
    }

    #[test]
    fn reordered_samples_equivalent() {
        let mut g = rng(9);
        let (r, v0, _) = random_cyclic_rep(&mut g, 8);
        let psi = RepFunction::diagonal(r, v0);
        let a = gns_construct(&psi, &GnsOptions::default()).unwrap();
        let b = gns_construct(
            &psi,
            &GnsOptions {
                reverse_order: true,
                ..GnsOptions::default()
            },
        )
        .unwrap();
        assert!(unitary_equivalence(&a.rep, &a.cyclic, &b.rep, &b.cyclic, 1e-6, 6).is_ok());
    }

    #[test]
    fn disagreeing_coefficients_rejected() {
        let (r, v0) = clifford_rep();
        let v2 = &v0 * C64::new(1.5, 0.0);
        let e = unitary_equivalence(&r, &v0, &r, &v2, 1e-8, 4).unwrap_err();
        assert!(matches!(e, Error::CoefficientsDisagree { .. }));
    }

    #[test]
    fn cyclicity_examples() {
        let (r, v0) = clifford_rep();
        assert!(check_cyclic(&r, &v0, 1e-9).passed);
        assert!(!check_cyclic(&r, &CVec::zeros(2), 1e-9).passed);
    }
}
