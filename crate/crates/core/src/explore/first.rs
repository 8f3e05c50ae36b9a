use rand::seq::SliceRandom;
use rand::Rng;

use super::{ExplorationTrace, StepRecord, Termination, Thresholds};
use crate::marked::MarkedTree;

/// Runs the first process from a uniformly chosen mark.
pub fn explore_one<R: Rng + ?Sized>(mt: &MarkedTree, thresholds: Option<Thresholds>, rng: &mut R) -> ExplorationTrace {
    let x = rng.random_range(0..mt.mark_count());
    explore_one_from(mt, x, thresholds, rng)
}

/// Round `r + 1` explores the vertices of round `r` in ascending id. For
/// each, its tree neighbours (children, then parent) that were unrevealed
/// when its exploration began are taken in turn, one step each, and each
/// step reveals the whole mark class of that neighbour. `thresholds: None`
/// runs until nothing is left.
pub fn explore_one_from<R: Rng + ?Sized>(
    mt: &MarkedTree,
    start_mark: usize,
    thresholds: Option<Thresholds>,
    rng: &mut R,
) -> ExplorationTrace {
    let tree = mt.tree();
    let index = tree.index();
    let classes = mt.classes();
    let mut revealed = vec![false; tree.vertex_count()];
    let start = classes[start_mark].clone();
    for &v in &start {
        revealed[v as usize] = true;
    }
    let mut seeds = start.clone();
    seeds.shuffle(rng);
    let mut trace = ExplorationTrace {
        start_mark: start_mark as u32,
        rounds: vec![start],
        completed_rounds: 0,
        steps: Vec::new(),
        seeds,
        explored: Vec::new(),
        revealed: Vec::new(),
        dead: Vec::new(),
        termination: Termination::Exhausted,
    };
    'rounds: loop {
        let current = trace.rounds[trace.completed_rounds].clone();
        let mut next = Vec::new();
        for &v in &current {
            let fresh: Vec<usize> = tree.neighbors(&index, v as usize).filter(|&z| !revealed[z]).collect();
            for z in fresh {
                let new: Vec<u32> = classes[mt.mark(z)].iter().copied().filter(|&u| !revealed[u as usize]).collect();
                for &u in &new {
                    revealed[u as usize] = true;
                }
                let mut step_seeds: Vec<u32> = new.iter().copied().filter(|&u| u as usize != z).collect();
                step_seeds.shuffle(rng);
                trace.seeds.extend_from_slice(&step_seeds);
                next.extend_from_slice(&new);
                trace.steps.push(StepRecord {
                    step: trace.steps.len() + 1,
                    round: trace.completed_rounds + 1,
                    explored: v,
                    target: z as u32,
                    revealed: new,
                    seeds: step_seeds,
                    dead: Vec::new(),
                });
                if Thresholds::steps_exceeded(thresholds, trace.steps.len()) {
                    trace.termination = Termination::StepLimit;
                    next.sort_unstable();
                    trace.rounds.push(next);
                    break 'rounds;
                }
            }
            trace.explored.push(v);
        }
        trace.completed_rounds += 1;
        next.sort_unstable();
        let empty = next.is_empty();
        trace.rounds.push(next);
        if empty {
            trace.termination = Termination::Exhausted;
            break;
        }
        if Thresholds::rounds_exceeded(thresholds, trace.completed_rounds) {
            trace.termination = Termination::RoundLimit;
            break;
        }
    }
    trace.revealed = (0..revealed.len() as u32).filter(|&v| revealed[v as usize]).collect();
    trace
}
