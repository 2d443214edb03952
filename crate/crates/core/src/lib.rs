//! Enumerative and integrative complexity of inflectional morphology.
//!
//! The crate turns UniMorph-style lexicons into paradigms, fits a
//! tree-factored generative model over paradigm slots, measures held-out
//! cross-entropy (integrative complexity) against paradigm size
//! (enumerative complexity), and tests the trade-off between the two with
//! a Pareto-area permutation test.
//!
//! Modules, bottom-up:
//!
//! - [`corpus`]: lexicon parsing, paradigms, pair encoding and data splits.
//! - [`strmodel`]: conditional string models `q(m_i | m_j)` with support
//!   over all strings, plus an import path for externally computed scores.
//! - [`structure`]: pairwise weight matrix and maximum spanning
//!   arborescence over slots.
//! - [`complexity`]: e-complexity, i-complexity and synthetic systems with
//!   known entropy.
//! - [`platbaseline`]: the average-conditional-entropy baseline over
//!   declension-class plats.
//! - [`stats`]: Pareto step curves, areas and the permutation test.
//!
//! Data-parallel loops go through [`par`]; building without the default
//! `parallel` feature gives a purely sequential crate with identical
//! results.

pub mod complexity;
pub mod corpus;
pub mod error;
pub mod fixtures;
pub mod par;
pub mod platbaseline;
pub mod stats;
pub mod strmodel;
pub mod structure;

pub use error::{Error, Result};
