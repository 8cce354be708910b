//! Stochastic activity network templates.
//!
//! Define a parametric SAN model once ([`template::SanTemplate`]), bind its
//! parameters with an [`terms::Assignment`], and obtain an ordinary SAN
//! ([`san::ConcreteSan`]) that can be validated, simulated and exported.

pub mod arclabel;
pub mod cli;
pub mod concretize;
pub mod diag;
pub mod formats;
pub mod lex;
pub mod san;
pub mod sim;
pub mod template;
pub mod terms;
