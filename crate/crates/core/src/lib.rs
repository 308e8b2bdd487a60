//! Finite first-order Boolean doctrines and the syntax that presents them.

pub mod calculus;
pub mod doctrine;
pub mod formula;
pub mod lang;
pub mod prefix;
pub mod syntactic;
pub mod theory;
