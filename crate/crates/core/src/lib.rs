//! Hybrid type-logical grammar engine.
//!
//! The decision core is a proof-net calculus: lexical entries and the goal
//! formula unfold into a proof structure, axiom linkings are enumerated as
//! vertex contractions, and a structure is accepted when its abstract proof
//! structure rewrites to a lambda graph. Successful parses sequentialise
//! back into natural-deduction proofs; a sequent calculus with cut
//! elimination serves as an independent oracle for the whole pipeline.

pub mod aps;
pub mod formula;
pub mod json;
pub mod latex;
pub mod lexicon;
pub mod nd;
pub mod net;
pub mod prover;
pub mod sequent;
pub mod term;

pub use formula::{Formula, FormulaError, Polarity};
pub use lexicon::{LexEntry, LexOptions, Lexicon, LexiconError};
pub use term::{ProsType, Term, TermCmp, TermContext, TermError};

pub mod demo;
