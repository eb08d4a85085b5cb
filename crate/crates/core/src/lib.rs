//! Desk-scale toolkit for finding and fixing logical errors in source code.
//!
//! The pipeline: lex a program losslessly (`tokenizer`), score each token
//! with a language-model backend (`ngram`, `remote`, `mlm`), flag tokens and
//! lines whose log-probability falls below a mean-minus-k-sigma threshold
//! (`localizer`), then re-fill the flagged positions autoregressively
//! (`repairer`). The `injector` module runs the reverse direction — planting
//! logical errors into correct programs to build evaluation datasets — and
//! `evaluator` measures both directions.

pub mod corpus;
pub mod error;
pub mod evaluator;
pub mod injector;
pub mod localizer;
pub mod mini;
pub mod mlm;
pub mod ngram;
pub mod profile;
pub mod remote;
pub mod repairer;
pub mod scorer;
pub mod tokenizer;
pub mod vocab;

pub use error::{CoreError, Result};
