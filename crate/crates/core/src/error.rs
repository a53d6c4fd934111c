use thiserror::Error;

use crate::grading::Degree;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(u8, u8),

    #[error("invalid rank {0}")]
    InvalidRank(usize),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("dimension mismatch: {0}")]
    Shape(String),

    #[error("map is not homogeneous of degree {degree}: off-block residual {residual:e}")]
    NotHomogeneous { degree: Degree, residual: f64 },

    #[error("Gamma-inner form fails {condition} at degree {degree}: residual {residual:e}")]
    InnerProduct {
        condition: &'static str,
        degree: Degree,
        residual: f64,
    },

    #[error("axiom {axiom} fails: {detail}")]
    Axiom { axiom: &'static str, detail: String },

    #[error(
        "perfectness fails at sector {sector}: rank {rank} < dim {dim}; \
         extension requires g_a = sum of [g_b, g_c] over odd-like b, c with bc = a \
         for every even-like a != 0"
    )]
    NotPerfect { sector: Degree, rank: usize, dim: usize },

    #[error("bracket decomposition residual {residual:e} exceeds {tol:e} in sector {sector}")]
    Decomposition { sector: Degree, residual: f64, tol: f64 },

    #[error(
        "extension depends on the bracket decomposition in sector {sector}: \
         residual {residual:e} > {tol:e}; the partial data is not a pre-representation"
    )]
    DecompositionDependence { sector: Degree, residual: f64, tol: f64 },

    #[error("word of length {len} exceeds the level cap {cap}")]
    LevelCap { len: usize, cap: usize },

    #[error("rho is undefined on basis element {label} of degree {degree}")]
    UndefinedSector { label: String, degree: Degree },

    #[error("{what} is not defined for group generator {generator}")]
    Group { what: &'static str, generator: String },

    #[error("Gram rank did not stabilize by level cap {cap} (ranks by level {ranks:?})")]
    NoStabilization { cap: usize, ranks: Vec<usize> },

    #[error("function is not positive definite on the sample set: {0}")]
    NotPositiveDefinite(String),

    #[error("right translation escapes the stabilized span: residual {residual:e} > {tol:e}")]
    TranslationEscape { residual: f64, tol: f64 },

    #[error("matrix coefficients disagree on the sample set: residual {residual:e} > {tol:e}")]
    CoefficientsDisagree { residual: f64, tol: f64 },

    #[error("intertwiner check '{what}' failed: residual {residual:e} > {tol:e}")]
    Equivalence {
        what: &'static str,
        residual: f64,
        tol: f64,
    },

    #[error("vector is not cyclic: span dimension {span} < {total}")]
    NotCyclic { span: usize, total: usize },

    #[error("value table has no entry for {0}")]
    TableMiss(String),

    #[error("{operation} rejected its input: {detail}")]
    Check { operation: String, detail: String },
}
