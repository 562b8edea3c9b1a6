// Diagnostics travel by value through the front end; boxing them buys nothing.
#![allow(clippy::result_large_err)]

pub mod diagnostics;
pub mod refinement;
pub mod solver;
pub mod source;
pub mod syntax;
pub mod typeck;
pub mod protocol;
pub mod specs;
pub mod typing;
pub mod vcgen;
pub mod checker;
pub mod cli;
pub mod lsp;
pub mod corpus;
