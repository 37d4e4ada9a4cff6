//! Exact tools for the sumset covering bound `|B| >= n + C(t+1, 2)` when
//! `S + S ⊆ A + B` and `|A| <= n - t`.
//!
//! The pipeline runs end to end on concrete data: normalise the basis, fix a
//! representation of every target, build and contract the representation
//! graph, colour it in `Q^n / 2Z^n`, fold into `F_2^n` and run the coset
//! lemma. Independent oracles (exhaustive lemma enumeration, exact minimum
//! `|B|` search) cross-check the result.

pub mod certificate;
pub mod cli;
pub mod error;
pub mod f2lemma;
pub mod linalg;
pub mod model;
pub mod search;
mod unionfind;

pub use error::{Error, Result};
