//! Text formats and subcommands of the `doctrina` command.

pub mod commands;
pub mod document;
pub mod sexp;

pub use commands::{run, Outcome};
pub use document::{parse, Document, MarkingDoc};
pub use sexp::{ParseError, Pos, Sexp};
