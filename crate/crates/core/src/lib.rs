//! Bratteli diagrams and Vershik dynamics, quotients of path spaces by a pair
//! of embeddings, fibred extensions by iterated function systems, and the
//! computable pieces of their K-theory.

pub mod catalog;
pub mod diagram;
pub mod dimgroup;
pub mod dps;
pub mod embedding;
pub mod error;
pub mod finmodel;
pub mod geometry;
pub mod ifs;
pub mod io;
pub mod kreport;
pub mod linalg;
pub mod pathspace;
pub mod vershik;

pub use error::{Error, Result};
