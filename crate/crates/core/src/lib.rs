//! Computational toolkit for the Fabrykowski-Gupta group `G = ⟨a, t⟩`, acting on
//! the ternary rooted tree with `t = ⟨a, 1, t⟩`.
//!
//! * [`tree_group`]: normal words, wreath recursion, word problem, canonical keys.
//! * [`metric_enum`]: weighted metric, ball enumeration, growth series, persistence.
//! * [`seqcomb`]: index/exponent sequence combinatorics and the `I_n` membership tests.
//! * [`bounds`]: numeric evaluators for the growth-bound machinery.
//! * [`torsion`]: element orders and infinite-order certificates.
//! * [`checks`]: lemma suites producing JSON reports.

pub mod bounds;
pub mod checks;
pub mod error;
pub mod metric_enum;
pub mod seqcomb;
pub mod torsion;
pub mod tree_group;

pub use error::{Error, Result};
pub use tree_group::{ElementKey, Letter, NormalWord, Rot, Syllable, Vertex, WreathDecomp};
