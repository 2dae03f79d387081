use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CrowdResponse, CrowdState, CrowdTask};

const HARMS: &[&str] = &[
    "I would feel embarrassed in front of my coworkers",
    "I could lose income I depend on",
    "I would not trust the system or the people using it",
    "it could hurt my reputation",
    "I would have to spend time fighting the decision",
    "people like me would be treated unfairly again",
    "I might miss out on something I deserved",
    "it could cause stress for my whole family",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulateOptions {
    pub seed: u64,
    /// Share of responses that fail a check: round(fraction × tasks),
    /// alternating between a speed failure and an attention failure.
    pub flag_fraction: f64,
}

/// Scripted responses for `tasks`, for dry runs and fixtures. Each judge
/// slot maps to one synthetic worker (or its already bound worker).
pub fn simulate_responses(state: &CrowdState, tasks: &[CrowdTask], options: &SimulateOptions) -> Vec<CrowdResponse> {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let n_flag = ((options.flag_fraction.clamp(0.0, 1.0) * tasks.len() as f64).round() as usize).min(tasks.len());
    let mut idx: Vec<usize> = (0..tasks.len()).collect();
    idx.shuffle(&mut rng);
    let mut flagged = vec![None; tasks.len()];
    for (j, &i) in idx.iter().take(n_flag).enumerate() {
        flagged[i] = Some(j % 2 == 0);
    }
    tasks
        .iter()
        .zip(flagged)
        .map(|(t, flag)| {
            let worker = state
                .judges
                .iter()
                .find(|j| j.slot == t.judge_slot)
                .and_then(|j| j.worker_id.clone())
                .unwrap_or_else(|| format!("sim-{:04}", t.judge_slot));
            let completions = t
                .cells
                .iter()
                .map(|_| HARMS.choose(&mut rng).expect("non-empty").to_string())
                .collect();
            let normal = (rng.gen_range(300..3000) as f64) / 10.0;
            let (duration_seconds, attention_answer) = match flag {
                Some(true) => (3.0, "blue"),
                Some(false) => (normal, "green"),
                None => (normal, "Blue"),
            };
            CrowdResponse {
                task_id: t.task_id.clone(),
                judge_id: worker,
                completions,
                attention_answer: attention_answer.to_string(),
                duration_seconds,
                demographics: [("q5".to_string(), "25-39".to_string())].into_iter().collect(),
            }
        })
        .collect()
}
