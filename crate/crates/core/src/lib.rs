//! Lasso contractions and structured decompositions over finite copresheaf
//! instances (graphs, reflexive graphs, edge-colored graphs, Petri nets).

pub mod cli;
pub mod colimits;
pub mod contraction;
pub mod cset;
pub mod decomposition;
pub mod dot;
pub mod fixtures;
pub mod io;
pub mod lasso;
pub mod random;
pub mod schema;
pub mod universe;
