//! Harm anticipation with ethical matrices: scenario configs, behavior
//! variants, vignettes, model and crowd completions, harm coding and the
//! statistics run over the coded corpus.

pub mod analysis;
pub mod clock;
pub mod completion;
pub mod crowd;
pub mod error;
pub mod generate;
pub mod harvest;
pub mod matrix;
pub mod project;
pub mod prompt;
pub mod provider;
pub mod report;
pub mod scenario;
pub mod taxonomy;
pub mod vignette;

pub use error::{Error, Result};

/// Lowercase ASCII alphanumerics; anything else becomes a single `-`.
pub fn slug(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        if ch.is_ascii_alphanumeric() {
            out.push(ch.to_ascii_lowercase());
        } else if !out.ends_with('-') {
            out.push('-');
        }
    }
    out.trim_matches('-').to_string()
}
