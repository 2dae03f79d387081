use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{CrowdSettings, CrowdTask, JudgeSlot};
use crate::error::{Error, Result};
use crate::matrix::EthicalMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlanOptions {
    pub settings: CrowdSettings,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentPlan {
    pub tasks: Vec<CrowdTask>,
    pub judges: Vec<JudgeSlot>,
    /// ceil(tasks / cap): no plan can use fewer judges.
    pub min_judges: usize,
}

/// Splits `judgments_per_vignette` random passes over the matrix into tasks
/// of distinct vignettes, then hands tasks to judge slots first-fit so that
/// no slot exceeds the cap or sees a vignette twice.
pub fn plan_assignments(matrix: &EthicalMatrix, options: &PlanOptions) -> Result<AssignmentPlan> {
    let CrowdSettings { judgments_per_vignette: k, vignettes_per_task: size, max_tasks_per_judge: cap } =
        options.settings;
    if k == 0 || size == 0 || cap == 0 {
        return Err(Error::Infeasible("judgments, task size and judge cap must all be positive".into()));
    }
    let n = matrix.n_cells();
    if n < size {
        return Err(Error::Infeasible(format!("{n} vignettes cannot fill a task of {size} distinct vignettes")));
    }
    if matrix.cells.iter().any(|c| c.vignette.is_none()) {
        return Err(Error::Precondition("vignettes not rendered yet (run `vignettes render`)".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut order: Vec<usize> = Vec::with_capacity(n * k);
    for _ in 0..k {
        let mut pass: Vec<usize> = (0..n).collect();
        pass.shuffle(&mut rng);
        order.extend(pass);
    }
    let mut chunks: Vec<Vec<usize>> = order.chunks(size).map(<[usize]>::to_vec).collect();
    repair_duplicates(&mut chunks)?;

    let tasks_cells = chunks;
    let mut slots: Vec<(JudgeSlot, BTreeSet<usize>)> = Vec::new();
    let mut tasks = Vec::with_capacity(tasks_cells.len());
    for (i, cells) in tasks_cells.iter().enumerate() {
        let slot = first_fit(&mut slots, cells, cap);
        tasks.push(CrowdTask {
            task_id: task_id(0, i + 1),
            scenario_id: matrix.scenario_id.clone(),
            round: 0,
            judge_slot: slot,
            cells: cells.iter().map(|&c| matrix.cell_ref(c)).collect(),
        });
    }
    let min_judges = tasks.len().div_ceil(cap as usize);
    Ok(AssignmentPlan { tasks, judges: slots.into_iter().map(|(j, _)| j).collect(), min_judges })
}

pub(super) fn task_id(round: u32, n: usize) -> String {
    format!("r{round}-t{n:04}")
}

/// Picks the first slot with spare capacity that has not seen any of
/// `cells`, opening a new slot when none qualifies.
pub(super) fn first_fit(slots: &mut Vec<(JudgeSlot, BTreeSet<usize>)>, cells: &[usize], cap: u32) -> u32 {
    let found = slots
        .iter()
        .position(|(j, seen)| !j.rejected && j.capacity_remaining > 0 && cells.iter().all(|c| !seen.contains(c)));
    let i = found.unwrap_or_else(|| {
        let slot = slots.iter().map(|(j, _)| j.slot + 1).max().unwrap_or(1);
        slots.push((
            JudgeSlot { slot, worker_id: None, tasks_assigned: 0, capacity_remaining: cap, rejected: false },
            BTreeSet::new(),
        ));
        slots.len() - 1
    });
    let (j, seen) = &mut slots[i];
    j.tasks_assigned += 1;
    j.capacity_remaining -= 1;
    seen.extend(cells.iter().copied());
    j.slot
}

/// Chunks that straddle two passes can repeat a vignette. Swap the repeat
/// with an element of another chunk where neither swap creates a new repeat.
fn repair_duplicates(chunks: &mut [Vec<usize>]) -> Result<()> {
    for i in 0..chunks.len() {
        while let Some(p) = duplicate_position(&chunks[i]) {
            let x = chunks[i][p];
            let mut swapped = false;
            'search: for j in 0..chunks.len() {
                if j == i || chunks[j].contains(&x) {
                    continue;
                }
                for q in 0..chunks[j].len() {
                    let y = chunks[j][q];
                    if !chunks[i].contains(&y) {
                        chunks[i][p] = y;
                        chunks[j][q] = x;
                        swapped = true;
                        break 'search;
                    }
                }
            }
            if !swapped {
                return Err(Error::Infeasible("cannot arrange tasks of distinct vignettes".into()));
            }
        }
    }
    Ok(())
}

fn duplicate_position(chunk: &[usize]) -> Option<usize> {
    (1..chunk.len()).find(|&p| chunk[..p].contains(&chunk[p]))
}
