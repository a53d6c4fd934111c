//! JSON documents: one per object kind, each carrying `schema` and `rank`.
//! Complex numbers are `[re, im]` pairs, matrices are lists of rows.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use colorgns::color_lie::ColorLieAlgebra;
use colorgns::gns::{table_key, TableFunction};
use colorgns::graded_linear::{GammaInnerSpace, GradedSpace};
use colorgns::grading::{Character, Degree, MAX_RANK};
use colorgns::hc_rep::{ExtraGenerator, GroupElement, GroupGen, HcPair, PartialRep, UnitaryRep};
use colorgns::enveloping::PbwMonomial;
use colorgns::linalg::{CMat, CVec, RMat, C64};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

pub const ALGEBRA_SCHEMA: &str = "colorgns/algebra/v1";
pub const REP_SCHEMA: &str = "colorgns/representation/v1";
pub const TABLE_SCHEMA: &str = "colorgns/table/v1";
pub const REPORT_SCHEMA: &str = "colorgns/report/v1";

pub type Complex = [f64; 2];
pub type ComplexMatrix = Vec<Vec<Complex>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraDoc {
    pub schema: String,
    pub rank: u8,
    pub basis: Vec<BasisDoc>,
    /// Sparse structure constants: `[left, right] ∋ coeff · result`.
    pub brackets: Vec<BracketDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisDoc {
    pub label: String,
    pub degree: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketDoc {
    pub left: String,
    pub right: String,
    pub result: String,
    pub coeff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtraDoc {
    pub label: String,
    /// `Ad(g)` on the algebra basis, rows of a real matrix.
    pub ad: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDoc {
    pub degree: Vec<u8>,
    pub dim: usize,
    /// Ordinary Gram of the component; the identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<ComplexMatrix>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDoc {
    /// Character mask `χ(a) = (-1)^{Σ mⱼaⱼ}` twisting `α`.
    pub twist: Vec<u8>,
    pub components: Vec<ComponentDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhoDoc {
    pub label: String,
    /// `null` for sectors a pre-representation leaves unsupplied.
    pub matrix: Option<ComplexMatrix>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepDoc {
    pub schema: String,
    pub rank: u8,
    pub algebra: AlgebraDoc,
    #[serde(default)]
    pub extras: Vec<ExtraDoc>,
    pub space: SpaceDoc,
    pub rho: Vec<RhoDoc>,
    /// `π` of each extra generator, in the order of `extras`.
    #[serde(default)]
    pub pi: Vec<ComplexMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cyclic_vector: Option<Vec<Complex>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FactorDoc {
    Extra { index: usize, inverse: bool },
    Exp { basis: String, t: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryDoc {
    pub group: Vec<FactorDoc>,
    pub monomial: Vec<String>,
    pub value: Complex,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableDoc {
    pub schema: String,
    pub rank: u8,
    pub algebra: AlgebraDoc,
    #[serde(default)]
    pub extras: Vec<ExtraDoc>,
    pub twist: Vec<u8>,
    pub entries: Vec<EntryDoc>,
}

#[derive(Clone, Debug)]
pub enum Document {
    Algebra(AlgebraDoc),
    Rep(Box<RepDoc>),
    Table(Box<TableDoc>),
}

impl Document {
    pub fn algebra(&self) -> &AlgebraDoc {
        match self {
            Document::Algebra(a) => a,
            Document::Rep(r) => &r.algebra,
            Document::Table(t) => &t.algebra,
        }
    }
}

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

fn core_input(context: &str) -> impl Fn(colorgns::Error) -> CliError + '_ {
    move |e| input(format!("{context}: {e}"))
}

pub fn parse_document(text: &str) -> Result<Document, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| input(format!("parse error: {e}")))?;
    let schema = value
        .get("schema")
        .and_then(Value::as_str)
        .ok_or_else(|| input("schema violation: missing string field \"schema\""))?
        .to_string();
    let violation = |e: serde_json::Error| input(format!("schema violation ({schema}): {e}"));
    let doc = match schema.as_str() {
        ALGEBRA_SCHEMA => Document::Algebra(serde_json::from_value(value.clone()).map_err(violation)?),
        REP_SCHEMA => Document::Rep(Box::new(serde_json::from_value(value.clone()).map_err(violation)?)),
        TABLE_SCHEMA => Document::Table(Box::new(serde_json::from_value(value.clone()).map_err(violation)?)),
        other => return Err(input(format!("schema violation: unknown schema \"{other}\""))),
    };
    validate_ranks(&doc)?;
    Ok(doc)
}

pub fn read_document(path: &Path) -> Result<Document, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    parse_document(&text).map_err(|e| match e {
        CliError::Input(m) => input(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, doc: &T) -> Result<(), CliError> {
    std::fs::write(path, to_json(doc)).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn check_rank(rank: u8, field: &str) -> Result<(), CliError> {
    if rank == 0 || rank > MAX_RANK {
        return Err(input(format!("schema violation: {field} is {rank}, expected 1..={MAX_RANK}")));
    }
    Ok(())
}

fn check_degree(bits: &[u8], rank: u8, field: &str) -> Result<(), CliError> {
    if bits.len() != rank as usize {
        return Err(input(format!(
            "parse error: {field} has {} entries, rank is {rank}",
            bits.len()
        )));
    }
    if let Some(b) = bits.iter().find(|&&b| b > 1) {
        return Err(input(format!("parse error: {field} contains {b}, expected 0 or 1")));
    }
    Ok(())
}

fn validate_algebra_fields(a: &AlgebraDoc, rank: u8, field: &str) -> Result<(), CliError> {
    if a.schema != ALGEBRA_SCHEMA {
        return Err(input(format!("schema violation: {field}.schema is \"{}\"", a.schema)));
    }
    if a.rank != rank {
        return Err(input(format!("schema violation: {field}.rank is {}, document rank is {rank}", a.rank)));
    }
    for (i, b) in a.basis.iter().enumerate() {
        check_degree(&b.degree, rank, &format!("{field}.basis[{i}].degree"))?;
    }
    Ok(())
}

fn validate_ranks(doc: &Document) -> Result<(), CliError> {
    match doc {
        Document::Algebra(a) => {
            check_rank(a.rank, "rank")?;
            validate_algebra_fields(a, a.rank, "algebra")
        }
        Document::Rep(r) => {
            check_rank(r.rank, "rank")?;
            validate_algebra_fields(&r.algebra, r.rank, "algebra")?;
            check_degree(&r.space.twist, r.rank, "space.twist")?;
            for (i, c) in r.space.components.iter().enumerate() {
                check_degree(&c.degree, r.rank, &format!("space.components[{i}].degree"))?;
            }
            Ok(())
        }
        Document::Table(t) => {
            check_rank(t.rank, "rank")?;
            validate_algebra_fields(&t.algebra, t.rank, "algebra")?;
            check_degree(&t.twist, t.rank, "twist")
        }
    }
}

fn degree(bits: &[u8]) -> Degree {
    Degree::from_bits(bits).expect("degree validated")
}

fn complex(z: Complex) -> C64 {
    C64::new(z[0], z[1])
}

fn pair_of(z: C64) -> Complex {
    [z.re, z.im]
}

pub fn cmat_from(rows: &ComplexMatrix, shape: (usize, usize), field: &str) -> Result<CMat, CliError> {
    if rows.len() != shape.0 || rows.iter().any(|r| r.len() != shape.1) {
        return Err(input(format!("schema violation: {field} must be {}x{}", shape.0, shape.1)));
    }
    Ok(CMat::from_fn(shape.0, shape.1, |i, j| complex(rows[i][j])))
}

pub fn cmat_doc(m: &CMat) -> ComplexMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| pair_of(m[(i, j)])).collect())
        .collect()
}

pub fn cvec_from(v: &[Complex], n: usize, field: &str) -> Result<CVec, CliError> {
    if v.len() != n {
        return Err(input(format!("schema violation: {field} has {} entries, space has dimension {n}", v.len())));
    }
    Ok(CVec::from_iterator(n, v.iter().map(|&z| complex(z))))
}

pub fn cvec_doc(v: &CVec) -> Vec<Complex> {
    v.iter().map(|&z| pair_of(z)).collect()
}

/// Builds the algebra without checking its axioms.
pub fn algebra_from(doc: &AlgebraDoc) -> Result<ColorLieAlgebra, CliError> {
    let mut index = HashMap::new();
    for (i, b) in doc.basis.iter().enumerate() {
        if index.insert(b.label.as_str(), i).is_some() {
            return Err(input(format!("schema violation: duplicate basis label '{}'", b.label)));
        }
    }
    let find = |label: &str, k: usize, field: &str| {
        index
            .get(label)
            .copied()
            .ok_or_else(|| input(format!("schema violation: brackets[{k}].{field} names unknown label '{label}'")))
    };
    let mut triples = Vec::with_capacity(doc.brackets.len());
    for (k, b) in doc.brackets.iter().enumerate() {
        triples.push((find(&b.left, k, "left")?, find(&b.right, k, "right")?, find(&b.result, k, "result")?, b.coeff));
    }
    let basis = doc.basis.iter().map(|b| (b.label.clone(), degree(&b.degree))).collect();
    ColorLieAlgebra::new(doc.rank, basis, &triples).map_err(core_input("algebra"))
}

pub fn algebra_doc(l: &ColorLieAlgebra) -> AlgebraDoc {
    AlgebraDoc {
        schema: ALGEBRA_SCHEMA.into(),
        rank: l.rank(),
        basis: l
            .basis()
            .iter()
            .map(|b| BasisDoc {
                label: b.label.clone(),
                degree: b.degree.bits(),
            })
            .collect(),
        brackets: l
            .structure_triples()
            .into_iter()
            .map(|(i, j, k, c)| BracketDoc {
                left: l.label(i).into(),
                right: l.label(j).into(),
                result: l.label(k).into(),
                coeff: c,
            })
            .collect(),
    }
}

/// `extras[k].ad` is indexed by the document's basis order, which the
/// algebra may have sorted by degree.
pub fn pair_from(l: ColorLieAlgebra, doc: &AlgebraDoc, extras: &[ExtraDoc]) -> Result<HcPair, CliError> {
    let n = l.dim();
    let pos: Vec<usize> = doc
        .basis
        .iter()
        .map(|b| l.index_of(&b.label).expect("labels come from the document"))
        .collect();
    let mut gens = Vec::with_capacity(extras.len());
    for (k, e) in extras.iter().enumerate() {
        if e.ad.len() != n || e.ad.iter().any(|r| r.len() != n) {
            return Err(input(format!("schema violation: extras[{k}].ad must be {n}x{n}")));
        }
        let mut ad = RMat::zeros(n, n);
        for (i, row) in e.ad.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                ad[(pos[i], pos[j])] = x;
            }
        }
        gens.push(ExtraGenerator::new(e.label.clone(), ad).map_err(core_input("extras"))?);
    }
    HcPair::new(l, gens).map_err(core_input("extras"))
}

pub fn extras_doc(pair: &HcPair) -> Vec<ExtraDoc> {
    pair.extras
        .iter()
        .map(|e| ExtraDoc {
            label: e.label.clone(),
            ad: (0..e.ad.nrows()).map(|i| e.ad.row(i).iter().copied().collect()).collect(),
        })
        .collect()
}

fn space_from(doc: &SpaceDoc, rank: u8) -> Result<GammaInnerSpace, CliError> {
    let mut dims = vec![0usize; 1 << rank];
    let mut grams: Vec<Option<CMat>> = vec![None; 1 << rank];
    let mut seen = vec![false; 1 << rank];
    for (i, c) in doc.components.iter().enumerate() {
        let a = degree(&c.degree);
        if std::mem::replace(&mut seen[a.index()], true) {
            return Err(input(format!("schema violation: space.components[{i}] repeats degree {a}")));
        }
        dims[a.index()] = c.dim;
        if let Some(g) = &c.gram {
            grams[a.index()] = Some(cmat_from(g, (c.dim, c.dim), &format!("space.components[{i}].gram"))?);
        }
    }
    let space = GradedSpace::new(rank, dims.clone()).map_err(core_input("space"))?;
    let grams = grams
        .into_iter()
        .zip(&dims)
        .map(|(g, &d)| g.unwrap_or_else(|| CMat::identity(d, d)))
        .collect();
    let twist = Character::from_mask(degree(&doc.twist));
    GammaInnerSpace::new(space, grams, twist).map_err(core_input("space"))
}

fn space_doc(h: &GammaInnerSpace) -> SpaceDoc {
    let sp = &h.space;
    SpaceDoc {
        twist: h.twist().mask().bits(),
        components: sp
            .support()
            .map(|a| {
                let g = h.gram(a);
                ComponentDoc {
                    degree: a.bits(),
                    dim: sp.dim(a),
                    gram: (g != &CMat::identity(g.nrows(), g.ncols())).then(|| cmat_doc(g)),
                }
            })
            .collect(),
    }
}

/// Shared parts of a representation document.
pub struct RepParts {
    pub pair: HcPair,
    pub space: GammaInnerSpace,
    pub rho: Vec<Option<CMat>>,
    pub pi: Vec<CMat>,
    pub cyclic: Option<CVec>,
}

pub fn rep_parts(doc: &RepDoc) -> Result<RepParts, CliError> {
    let l = algebra_from(&doc.algebra)?;
    let space = space_from(&doc.space, doc.rank)?;
    let n = space.space.total_dim();
    let mut by_label: BTreeMap<&str, Option<CMat>> = BTreeMap::new();
    for (k, r) in doc.rho.iter().enumerate() {
        let field = format!("rho[{k}] ('{}')", r.label);
        let m = r.matrix.as_ref().map(|m| cmat_from(m, (n, n), &field)).transpose()?;
        if by_label.insert(r.label.as_str(), m).is_some() {
            return Err(input(format!("schema violation: {field} repeats a label")));
        }
    }
    let mut rho = Vec::with_capacity(l.dim());
    for b in l.basis() {
        match by_label.remove(b.label.as_str()) {
            Some(m) => rho.push(m),
            None => return Err(input(format!("schema violation: rho has no entry for basis element '{}'", b.label))),
        }
    }
    if let Some(extra) = by_label.keys().next() {
        return Err(input(format!("schema violation: rho entry '{extra}' is not a basis label")));
    }
    let pi = doc
        .pi
        .iter()
        .enumerate()
        .map(|(k, m)| cmat_from(m, (n, n), &format!("pi[{k}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let cyclic = doc
        .cyclic_vector
        .as_ref()
        .map(|v| cvec_from(v, n, "cyclic_vector"))
        .transpose()?;
    let pair = pair_from(l, &doc.algebra, &doc.extras)?;
    Ok(RepParts {
        pair,
        space,
        rho,
        pi,
        cyclic,
    })
}

pub fn unitary_rep_from(doc: &RepDoc) -> Result<(UnitaryRep, Option<CVec>), CliError> {
    let p = rep_parts(doc)?;
    let mut rho = Vec::with_capacity(p.rho.len());
    for (i, m) in p.rho.into_iter().enumerate() {
        rho.push(m.ok_or_else(|| {
            input(format!(
                "schema violation: rho('{}') is null; a complete representation supplies every sector",
                p.pair.algebra.label(i)
            ))
        })?);
    }
    let r = UnitaryRep::new(p.pair, p.space, rho, p.pi).map_err(core_input("representation"))?;
    Ok((r, p.cyclic))
}

pub fn partial_rep_from(doc: &RepDoc) -> Result<PartialRep, CliError> {
    let p = rep_parts(doc)?;
    PartialRep::new(p.pair, p.space, p.rho, p.pi).map_err(core_input("pre-representation"))
}

fn rep_doc_from(pair: &HcPair, space: &GammaInnerSpace, rho: Vec<Option<CMat>>, pi: &[CMat]) -> RepDoc {
    let l = &pair.algebra;
    RepDoc {
        schema: REP_SCHEMA.into(),
        rank: l.rank(),
        algebra: algebra_doc(l),
        extras: extras_doc(pair),
        space: space_doc(space),
        rho: rho
            .into_iter()
            .enumerate()
            .map(|(i, m)| RhoDoc {
                label: l.label(i).into(),
                matrix: m.as_ref().map(cmat_doc),
            })
            .collect(),
        pi: pi.iter().map(cmat_doc).collect(),
        cyclic_vector: None,
    }
}

pub fn rep_doc(r: &UnitaryRep, cyclic: Option<&CVec>) -> RepDoc {
    let rho = r.rho.iter().map(|m| Some(m.matrix.clone())).collect();
    let mut doc = rep_doc_from(&r.pair, &r.space, rho, &r.pi);
    doc.cyclic_vector = cyclic.map(cvec_doc);
    doc
}

pub fn partial_rep_doc(p: &PartialRep) -> RepDoc {
    let rho = p.rho.iter().map(|m| m.as_ref().map(|m| m.matrix.clone())).collect();
    rep_doc_from(&p.pair, &p.space, rho, &p.pi)
}

pub fn table_from(doc: &TableDoc) -> Result<TableFunction, CliError> {
    let l = algebra_from(&doc.algebra)?;
    let pair = pair_from(l, &doc.algebra, &doc.extras)?;
    let l = &pair.algebra;
    let label = |s: &str, field: &str| {
        l.index_of(s)
            .ok_or_else(|| input(format!("schema violation: {field} names unknown label '{s}'")))
    };
    let mut entries = HashMap::with_capacity(doc.entries.len());
    for (k, e) in doc.entries.iter().enumerate() {
        let mut factors = Vec::with_capacity(e.group.len());
        for (f, g) in e.group.iter().enumerate() {
            factors.push(match g {
                FactorDoc::Extra { index, inverse } => {
                    if *index >= pair.extras.len() {
                        return Err(input(format!("schema violation: entries[{k}].group[{f}] names extra {index}")));
                    }
                    GroupGen::Extra {
                        index: *index,
                        inverse: *inverse,
                    }
                }
                FactorDoc::Exp { basis, t } => GroupGen::Exp {
                    basis: label(basis, &format!("entries[{k}].group[{f}].basis"))?,
                    t: *t,
                },
            });
        }
        let word = e
            .monomial
            .iter()
            .map(|s| label(s, &format!("entries[{k}].monomial")))
            .collect::<Result<Vec<_>, _>>()?;
        let m = PbwMonomial::new(l, word).map_err(core_input(&format!("entries[{k}].monomial")))?;
        entries.insert(table_key(&GroupElement::from_factors(factors), &m), complex(e.value));
    }
    Ok(TableFunction {
        pair: pair.clone(),
        twist: Character::from_mask(degree(&doc.twist)),
        entries,
    })
}

/// Serializes a table whose entries were recorded from monoid evaluations,
/// keyed by the group words and monomials that produced them.
pub fn table_doc(pair: &HcPair, twist: &Character, entries: &[(GroupElement, PbwMonomial, C64)]) -> TableDoc {
    let l = &pair.algebra;
    let mut out: Vec<EntryDoc> = entries
        .iter()
        .map(|(g, m, v)| EntryDoc {
            group: g
                .factors()
                .iter()
                .map(|f| match *f {
                    GroupGen::Extra { index, inverse } => FactorDoc::Extra { index, inverse },
                    GroupGen::Exp { basis, t } => FactorDoc::Exp {
                        basis: l.label(basis).into(),
                        t,
                    },
                })
                .collect(),
            monomial: m.word().iter().map(|&i| l.label(i).to_string()).collect(),
            value: pair_of(*v),
        })
        .collect();
    out.sort_by(|a, b| {
        serde_json::to_string(&(&a.group, &a.monomial))
            .unwrap()
            .cmp(&serde_json::to_string(&(&b.group, &b.monomial)).unwrap())
    });
    TableDoc {
        schema: TABLE_SCHEMA.into(),
        rank: l.rank(),
        algebra: algebra_doc(l),
        extras: extras_doc(pair),
        twist: twist.mask().bits(),
        entries: out,
    }
}
