//! Boolean, first-order and elementary doctrines over finite bases.

pub mod algebra;
pub mod category;
pub mod constructions;
pub mod equality;
pub mod finite;
pub mod fragment;
pub mod morphism;
pub mod report;

use thiserror::Error;

pub use algebra::{BAHom, Elem, FiniteBooleanAlgebra, SubAlgebra};
pub use category::{FiniteProductCategory, MorId, Morphism, ObjId, ProductDiagram};
pub use equality::{find_fibered_equalities, verify_elementary, EqualityFamily};
pub use finite::{verify_boolean_doctrine, verify_first_order, FiniteDoctrine};
pub use fragment::{colimit, stratify, verify_one_step, verify_qa_stratified, verify_qff, Marking, StratifiedSequence};
pub use morphism::{verify_morphism, BaseFunctor, DoctrineMorphism, Level};
pub use report::{Report, Violation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DoctrineError {
    #[error("malformed category: {0}")]
    MalformedCategory(String),
    #[error("malformed doctrine: {0}")]
    Malformed(String),
    #[error("not a filter: {0}")]
    NotAFilter(String),
    #[error("required product is missing")]
    MissingProduct,
    #[error("construction not well defined: {0}")]
    NotWellDefined(String),
}
