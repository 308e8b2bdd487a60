//! Finite structures, interpretation in finite doctrines, entailment oracles and
//! bounded experiments on the syntactic doctrine of a theory.

mod certify;
mod completion;
mod enumerate;
mod family;
mod layer;
mod modulo;
mod oracle;
mod semantics;
mod structure;

use thiserror::Error;

use crate::doctrine::DoctrineError;

pub use certify::{close_by_identity, propositional_proof};
pub use completion::{
    completion_leq, completion_leq_with, is_universal, universal_consequences, universal_theory, CompletionConfig,
    CompletionVerdict, Consequence,
};
pub use enumerate::{atoms_over, bound_names, distinct_qf, formula_of_table, formulas_up_to, qf_formulas, truth_table};
pub use family::{morphism_from_family, sentence, FamilyCheck};
pub use layer::{one_step_layer, Generator, LayerBounds, OneStepLayer};
pub use modulo::{
    candidate_predicates, equivalent, is_quantifier_free_modulo, qa_depth_modulo, DepthBounds, DepthInterval,
    QfMembership, CANDIDATE_CAP,
};
pub use oracle::{
    check_certificate, lt_leq, small_model_bound, BoundedOracle, EntailmentOracle, FirstDecisive, TruthTableOracle,
    Verdict,
};
pub use semantics::{
    interpret, interpret_formula, naturality_of_interpretation, sequent_valid, structure_doctrine, ContextObjects,
    InterpretationFamily,
};
pub use structure::{
    bounded_axioms, countermodel_search, countermodel_search_with, eval_formula, eval_in_structure, eval_term,
    falsifying_assignment, satisfies_all, sequent_holds_at, sequent_holds_in, structures_of_size, symbols_of,
    tuple_at, tuple_count, tuple_index, Countermodel, FiniteStructure, SearchOutcome, DEFAULT_STRUCTURE_CAP,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SemanticsError {
    #[error("symbol `{0}` is not interpreted")]
    Uninterpreted(String),
    #[error("`{name}` has arity {expected}, applied to {got} arguments")]
    Arity { name: String, expected: usize, got: usize },
    #[error("table for `{0}` has the wrong length")]
    TableShape(String),
    #[error("value {value} lies outside a carrier of size {size}")]
    OutOfCarrier { value: usize, size: usize },
    #[error("variable `{0}` is unassigned")]
    Unassigned(String),
    #[error("assignment has {got} values for a context of length {expected}")]
    AssignmentLength { expected: usize, got: usize },
    #[error("equality used but no equality predicate is provided")]
    MissingEquality,
    #[error("function symbols are not supported here")]
    NotRelational,
    #[error("no object interprets contexts of length {0}")]
    MissingContext(usize),
    #[error("family value for `{0}` lies outside its fiber")]
    FamilyRange(String),
    #[error("fiber over contexts of length {0} is too large")]
    TooLarge(usize),
    #[error("formulas live in different contexts")]
    ContextMismatch,
    #[error("oracle `{0}` is not complete on quantifier-free queries")]
    IncompleteOracle(String),
    #[error("substitution failed: {0}")]
    Substitution(String),
    #[error(transparent)]
    Doctrine(#[from] DoctrineError),
}
