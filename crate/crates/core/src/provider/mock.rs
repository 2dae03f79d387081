use std::collections::VecDeque;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::{CompletionProvider, CompletionRequest, ProviderError};
use crate::prompt::STAKEHOLDER_CUE;

const CONSEQUENCES: &[&str] = &[
    "lose money that was needed for rent",
    "lose trust in the people who are supposed to protect them",
    "feel singled out and anxious about what happens next",
    "miss an opportunity that may not come again",
    "have to spend hours appealing a decision they had no part in",
    "face questions from colleagues about something that never happened",
    "be blamed for a mistake made by the system",
    "end up with a worse service than everyone else",
    "stop speaking up because they fear being flagged again",
    "see their reputation damaged in front of their peers",
    "be exposed to abuse that should have been caught",
    "have personal information reviewed by strangers",
];

const AMPLIFIERS: &[&str] = &[
    "",
    ", and the effect grows each time it happens",
    ", which makes it harder to recover later",
    ", and nobody explains why",
    ", while the people responsible never notice",
];

const DRAFT_STAKEHOLDERS: &[&str] = &[
    "the decision subject",
    "the organization deploying the system",
    "the operators who act on the system's output",
    "the AI system developers",
    "the family/friends of the decision subject",
    "regulators",
    "society",
];

/// Deterministic, offline provider for tests and dry runs.
///
/// Scripted responses are consumed first, in order. After that each call
/// derives its texts from a hash of (seed, prompt, ordinal), so the output
/// for a cell does not depend on call order or parallelism.
#[derive(Debug)]
pub struct MockProvider {
    name: String,
    script: Mutex<VecDeque<Result<Vec<String>, ProviderError>>>,
    calls: AtomicUsize,
    fail_from_call: Option<(usize, ProviderError)>,
}

impl Default for MockProvider {
    fn default() -> Self {
        Self::new()
    }
}

impl MockProvider {
    pub fn new() -> Self {
        Self { name: "mock".into(), script: Mutex::new(VecDeque::new()), calls: AtomicUsize::new(0), fail_from_call: None }
    }

    /// Queues one canned response (all texts for one call).
    pub fn with_response<S: Into<String>>(self, texts: impl IntoIterator<Item = S>) -> Self {
        self.script.lock().unwrap().push_back(Ok(texts.into_iter().map(Into::into).collect()));
        self
    }

    pub fn with_error(self, error: ProviderError) -> Self {
        self.script.lock().unwrap().push_back(Err(error));
        self
    }

    /// Every call numbered `n` or later (zero-based) fails with `error`.
    pub fn failing_from(mut self, n: usize, error: ProviderError) -> Self {
        self.fail_from_call = Some((n, error));
        self
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    fn rng_for(seed: u64, prompt: &str, ordinal: u32) -> ChaCha8Rng {
        let mut h = Sha256::new();
        h.update(seed.to_le_bytes());
        h.update(prompt.as_bytes());
        h.update(ordinal.to_le_bytes());
        let digest: [u8; 32] = h.finalize().into();
        ChaCha8Rng::from_seed(digest)
    }

    fn harm_text(seed: u64, prompt: &str, ordinal: u32) -> String {
        let mut rng = Self::rng_for(seed, prompt, ordinal);
        let c = CONSEQUENCES.choose(&mut rng).expect("non-empty");
        let a = AMPLIFIERS.choose(&mut rng).expect("non-empty");
        format!("they could {c}{a}.")
    }

    fn stakeholder_text(seed: u64, prompt: &str) -> String {
        let mut rng = Self::rng_for(seed, prompt, 0);
        let mut names: Vec<&str> = DRAFT_STAKEHOLDERS.to_vec();
        names.shuffle(&mut rng);
        names.truncate(4);
        names.join("\n")
    }
}

impl CompletionProvider for MockProvider {
    fn name(&self) -> &str {
        &self.name
    }

    fn complete(&self, request: &CompletionRequest<'_>) -> Result<Vec<String>, ProviderError> {
        let call = self.calls.fetch_add(1, Ordering::SeqCst);
        if let Some((n, err)) = &self.fail_from_call {
            if call >= *n {
                return Err(err.clone());
            }
        }
        if let Some(scripted) = self.script.lock().unwrap().pop_front() {
            return scripted;
        }
        if request.prompt.trim_end().ends_with(STAKEHOLDER_CUE) {
            return Ok(vec![Self::stakeholder_text(request.seed, request.prompt)]);
        }
        Ok((0..request.params.n_completions)
            .map(|i| Self::harm_text(request.seed, request.prompt, i))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::provider::ModelParams;

    #[test]
    fn scripted_then_generated() {
        let mock = MockProvider::new().with_response(["a", "b", "c"]);
        let params = ModelParams::default();
        let req = CompletionRequest { prompt: "p", params: &params, seed: 7 };
        assert_eq!(mock.complete(&req).unwrap(), vec!["a", "b", "c"]);
        let generated = mock.complete(&req).unwrap();
        assert_eq!(generated.len(), 3);
        assert_eq!(generated, mock.complete(&req).unwrap(), "deterministic");
        assert_eq!(mock.calls(), 3);
        let other_seed = CompletionRequest { seed: 8, ..req };
        assert_ne!(generated, mock.complete(&other_seed).unwrap());
    }

    #[test]
    fn failing_from_counts_calls() {
        let mock = MockProvider::new().failing_from(1, ProviderError::Transport("down".into()));
        let params = ModelParams::default();
        let req = CompletionRequest { prompt: "p", params: &params, seed: 0 };
        assert!(mock.complete(&req).is_ok());
        assert!(mock.complete(&req).is_err());
    }
}
