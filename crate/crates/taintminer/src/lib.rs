//! Lexical taint-flow mining and vulnerability classification for
//! SmartThings Groovy apps.
//!
//! The library takes raw `.groovy` sources through a fixed pipeline:
//! normalize each file into one-statement-per-line form, tokenize it into a
//! bag of words with abstracted literals, mine tainted flows from user
//! inputs to message-sending sinks, turn bags and flow counts into feature
//! vectors, and train small native classifiers on labeled corpora. A mutant
//! generator produces labeled synthetic corpora for end-to-end checks.
//!
//! The `examples/` directory is the front door: each example is a runnable
//! walkthrough of one stage (`preprocess`, `bag_of_words`, `mine_flows`,
//! `sensitivity`, `vectorize`, `train_and_evaluate`, `mutate_corpus`,
//! `full_pipeline`). The `taintminer` binary wraps the same code in
//! subcommands for shell use.

pub mod cli;
pub mod flowsminer;
pub mod lexer;
pub mod ml;
pub mod mutgen;
pub mod oracle;
pub mod preprocessor;
pub mod taintmodel;
pub mod vectorizer;
