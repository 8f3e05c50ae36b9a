use std::collections::{HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use super::{EventLog, ExplorationTrace, StepRecord, Termination, Thresholds};
use crate::error::{Error, Result};
use crate::marked::MarkedTree;
use crate::tree::{RootedPlaneTree, TreeIndex, NO_PARENT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProcessTwoConfig {
    /// `None` runs each stage until it stops on its own.
    pub thresholds: Option<Thresholds>,
    /// A revealed class dies when one of its other vertices is within this
    /// tree distance of the revealed or dead vertices, the far vertex, or
    /// another vertex of the class.
    pub death_radius: f64,
    /// Deaths a single worm may face before the run counts as a disaster.
    pub disaster_threshold: u32,
}

impl ProcessTwoConfig {
    /// `n^(3/4)` steps, `ln^2 n` rounds, death radius `ln^3 n`, disaster at 16.
    pub fn for_n(n: usize) -> Self {
        Self {
            thresholds: Some(Thresholds::process_two(n)),
            death_radius: (n.max(1) as f64).ln().powi(3),
            disaster_threshold: 16,
        }
    }

    pub fn with_death_radius(mut self, radius: f64) -> Self {
        self.death_radius = radius;
        self
    }
}

/// A chain of revealed vertices starting at a seed, each next vertex being
/// the nearest live ancestor (towards the far vertex) of the previous one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WormState {
    pub seed: u32,
    pub body: Vec<u32>,
    /// Dead vertices on the path from the seed to the nearest live ancestor
    /// of the head.
    pub deaths_faced: u32,
    pub head: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DisasterEvent {
    pub stage: u8,
    pub step: usize,
    pub worm: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProcessTwoRun {
    pub v1: u32,
    pub v2: u32,
    /// The vertex farthest from `{v1, v2}`; ancestors point towards it.
    pub target: u32,
    pub stage1: ExplorationTrace,
    pub stage2: ExplorationTrace,
    pub worms1: Vec<WormState>,
    pub worms2: Vec<WormState>,
    pub events: EventLog,
}

impl ProcessTwoRun {
    pub fn collided(&self) -> bool {
        self.events.collision_step.is_some()
    }

    pub fn disaster(&self) -> bool {
        !self.events.disasters.is_empty()
    }
}

// distances towards the far vertex and the next vertex on the way
struct Toward {
    next: Vec<u32>,
    dist: Vec<u32>,
}

fn toward(tree: &RootedPlaneTree, index: &TreeIndex, target: usize) -> Toward {
    let count = tree.vertex_count();
    let mut next = vec![NO_PARENT; count];
    let mut dist = vec![u32::MAX; count];
    dist[target] = 0;
    let mut queue = VecDeque::from([target]);
    while let Some(v) = queue.pop_front() {
        for w in tree.neighbors(index, v) {
            if dist[w] == u32::MAX {
                dist[w] = dist[v] + 1;
                next[w] = v as u32;
                queue.push_back(w);
            }
        }
    }
    Toward { next, dist }
}

struct Stage<'a> {
    mt: &'a MarkedTree,
    index: &'a TreeIndex,
    classes: &'a [Vec<u32>],
    toward: &'a Toward,
    config: ProcessTwoConfig,
    radius: u32,
    radius_covers_tree: bool,
    stage: u8,
}

struct StageOutcome {
    trace: ExplorationTrace,
    worms: Vec<WormState>,
    disasters: Vec<DisasterEvent>,
    collision: Option<usize>,
}

struct StageState {
    in_r: Vec<bool>,
    dead: Vec<bool>,
    near: Vec<u32>,
    worms: Vec<WormState>,
    worm_of_head: HashMap<u32, usize>,
    waiting: HashMap<u32, Vec<usize>>,
    flagged: Vec<bool>,
}

impl Stage<'_> {
    fn nearest_alive(&self, st: &StageState, v: u32) -> Option<u32> {
        let mut x = self.toward.next[v as usize];
        while x != NO_PARENT && st.dead[x as usize] {
            x = self.toward.next[x as usize];
        }
        (x != NO_PARENT).then_some(x)
    }

    fn deaths_faced(&self, worm: &WormState, target: Option<u32>) -> u32 {
        let after_seed = self.toward.dist[worm.seed as usize];
        let body = worm.body.len() as u32 - 1;
        match target {
            Some(a) => after_seed - self.toward.dist[a as usize] - 1 - body,
            None => after_seed - body,
        }
    }

    // point the worm at its current nearest live ancestor
    fn retarget(&self, st: &mut StageState, w: usize) {
        let target = self.nearest_alive(st, st.worms[w].head);
        st.worms[w].deaths_faced = self.deaths_faced(&st.worms[w], target);
        if let Some(a) = target {
            st.waiting.entry(a).or_default().push(w);
        }
    }

    fn new_worm(&self, st: &mut StageState, seed: u32) -> usize {
        let w = st.worms.len();
        st.worms.push(WormState { seed, body: vec![seed], deaths_faced: 0, head: seed });
        st.flagged.push(false);
        st.worm_of_head.insert(seed, w);
        self.retarget(st, w);
        w
    }

    fn relax_near(&self, st: &mut StageState, sources: &[u32]) {
        if self.radius_covers_tree {
            return;
        }
        let tree = self.mt.tree();
        let mut queue = VecDeque::new();
        for &s in sources {
            if st.near[s as usize] > 0 {
                st.near[s as usize] = 0;
                queue.push_back(s as usize);
            }
        }
        while let Some(v) = queue.pop_front() {
            let d = st.near[v];
            if d >= self.radius {
                continue;
            }
            for w in tree.neighbors(self.index, v) {
                if st.near[w] > d + 1 {
                    st.near[w] = d + 1;
                    queue.push_back(w);
                }
            }
        }
    }

    fn death_rule(&self, st: &StageState, others: &[u32]) -> bool {
        if others.is_empty() {
            return false;
        }
        if self.radius_covers_tree {
            // the far vertex itself is within reach of everything
            return true;
        }
        others.iter().any(|&u| st.near[u as usize] <= self.radius)
            || others.iter().enumerate().any(|(i, &u)| {
                others[i + 1..].iter().any(|&u2| self.index.distance(u as usize, u2 as usize) <= self.radius)
            })
    }

    fn run<R: Rng + ?Sized>(&self, start: u32, target: u32, touch: Option<&[bool]>, rng: &mut R) -> StageOutcome {
        let count = self.mt.tree().vertex_count();
        let mut st = StageState {
            in_r: vec![false; count],
            dead: vec![false; count],
            near: vec![u32::MAX; count],
            worms: Vec::new(),
            worm_of_head: HashMap::new(),
            waiting: HashMap::new(),
            flagged: Vec::new(),
        };
        let start_class = &self.classes[self.mt.mark(start as usize)];
        let initial_dead: Vec<u32> = start_class.iter().copied().filter(|&u| u != start).collect();
        st.in_r[start as usize] = true;
        for &u in &initial_dead {
            st.dead[u as usize] = true;
        }
        let mut sources = initial_dead.clone();
        sources.extend([start, target]);
        self.relax_near(&mut st, &sources);
        self.new_worm(&mut st, start);

        let mut trace = ExplorationTrace {
            start_mark: self.mt.mark(start as usize) as u32,
            rounds: vec![vec![start]],
            completed_rounds: 0,
            steps: Vec::new(),
            seeds: vec![start],
            explored: Vec::new(),
            revealed: Vec::new(),
            dead: Vec::new(),
            termination: Termination::Exhausted,
        };
        let mut disasters = Vec::new();
        let mut collision = None;
        if touch.is_some_and(|t| t[start as usize]) {
            collision = Some(0);
            trace.termination = Termination::Collision;
        }

        'rounds: while collision.is_none() {
            let current = trace.rounds[trace.completed_rounds].clone();
            let mut next: Vec<u32> = Vec::new();
            for &v in &current {
                let step = trace.steps.len() + 1;
                let Some(up) = self.nearest_alive(&st, v) else {
                    trace.termination = Termination::NoAncestor;
                    break 'rounds;
                };
                if st.in_r[up as usize] {
                    trace.termination = Termination::SelfHit;
                    break 'rounds;
                }
                let class = &self.classes[self.mt.mark(up as usize)];
                if touch.is_some_and(|t| class.iter().any(|&u| t[u as usize])) {
                    collision = Some(step);
                    trace.termination = Termination::Collision;
                    break 'rounds;
                }
                let others: Vec<u32> = class.iter().copied().filter(|&u| u != up).collect();
                let died = self.death_rule(&st, &others);
                let (revealed, dead_now, mut seeds) = if died {
                    (vec![up], others, Vec::new())
                } else {
                    (class.clone(), Vec::new(), others)
                };
                for &u in &revealed {
                    st.in_r[u as usize] = true;
                }
                for &u in &dead_now {
                    st.dead[u as usize] = true;
                }
                self.relax_near(&mut st, &revealed);
                self.relax_near(&mut st, &dead_now);

                // the explored vertex's worm advances to `up`
                let w = st.worm_of_head.remove(&v).expect("every active vertex heads a worm");
                if let Some(list) = st.waiting.get_mut(&up) {
                    list.retain(|&x| x != w);
                }
                st.worms[w].body.push(up);
                st.worms[w].head = up;
                st.worm_of_head.insert(up, w);
                self.retarget(&mut st, w);
                let mut touched = vec![w];
                // worms waiting on a vertex that just died move further up
                for &u in &dead_now {
                    for x in st.waiting.remove(&u).unwrap_or_default() {
                        self.retarget(&mut st, x);
                        touched.push(x);
                    }
                }
                seeds.shuffle(rng);
                for &s in &seeds {
                    self.new_worm(&mut st, s);
                }
                for x in touched {
                    if !st.flagged[x] && st.worms[x].deaths_faced >= self.config.disaster_threshold {
                        st.flagged[x] = true;
                        disasters.push(DisasterEvent { stage: self.stage, step, worm: x });
                    }
                }

                trace.seeds.extend_from_slice(&seeds);
                next.extend_from_slice(&revealed);
                trace.steps.push(StepRecord {
                    step,
                    round: trace.completed_rounds + 1,
                    explored: v,
                    target: up,
                    revealed,
                    seeds,
                    dead: dead_now,
                });
                trace.explored.push(v);
                if Thresholds::steps_exceeded(self.config.thresholds, step) {
                    trace.termination = Termination::StepLimit;
                    next.sort_unstable();
                    trace.rounds.push(next);
                    break 'rounds;
                }
            }
            trace.completed_rounds += 1;
            next.sort_unstable();
            let empty = next.is_empty();
            trace.rounds.push(next);
            if empty {
                trace.termination = Termination::Exhausted;
                break;
            }
            if Thresholds::rounds_exceeded(self.config.thresholds, trace.completed_rounds) {
                trace.termination = Termination::RoundLimit;
                break;
            }
        }
        trace.revealed = (0..count as u32).filter(|&v| st.in_r[v as usize]).collect();
        trace.dead = (0..count as u32).filter(|&v| st.dead[v as usize]).collect();
        StageOutcome { trace, worms: st.worms, disasters, collision }
    }
}

/// Two-stage worm exploration. Stage 1 starts at the smallest vertex of
/// mark 0, stage 2 at the smallest vertex of mark 1; the far vertex is the
/// one maximising the tree distance to both starts (smallest id on ties).
/// Stage 2 stops with a collision as soon as it would reveal a vertex
/// within distance one of everything stage 1 revealed or killed.
pub fn explore_two<R: Rng + ?Sized>(mt: &MarkedTree, config: ProcessTwoConfig, rng: &mut R) -> Result<ProcessTwoRun> {
    if mt.mark_count() < 2 {
        return Err(Error::MarkingMismatch(format!("need marks 0 and 1, have {} class(es)", mt.mark_count())));
    }
    if !(config.death_radius >= 0.0) {
        return Err(Error::InvalidParameter(format!("death radius {}", config.death_radius)));
    }
    let tree = mt.tree();
    let index = tree.index();
    let classes = mt.classes();
    let (v1, v2) = (classes[0][0], classes[1][0]);
    let from_starts = tree.multi_source_distances(&index, &[v1 as usize, v2 as usize], u32::MAX);
    let target = (0..from_starts.len()).max_by_key(|&v| (from_starts[v], std::cmp::Reverse(v))).unwrap();
    let toward = toward(tree, &index, target);
    let radius = config.death_radius.floor().min(f64::from(u32::MAX - 1)) as u32;
    let mut stage = Stage {
        mt,
        index: &index,
        classes: &classes,
        toward: &toward,
        config,
        radius,
        radius_covers_tree: radius as usize >= tree.diameter(),
        stage: 1,
    };
    let first = stage.run(v1, target as u32, None, rng);

    let mut touch = vec![false; tree.vertex_count()];
    for &v in first.trace.revealed.iter().chain(&first.trace.dead) {
        touch[v as usize] = true;
        for w in tree.neighbors(&index, v as usize) {
            touch[w] = true;
        }
    }
    stage.stage = 2;
    let second = stage.run(v2, target as u32, Some(&touch), rng);

    let mut disasters = first.disasters;
    disasters.extend(second.disasters);
    Ok(ProcessTwoRun {
        v1,
        v2,
        target: target as u32,
        events: EventLog {
            bad_pairs: Vec::new(),
            disasters,
            collision_step: second.collision,
            termination: vec![first.trace.termination, second.trace.termination],
        },
        stage1: first.trace,
        stage2: second.trace,
        worms1: first.worms,
        worms2: second.worms,
    })
}

/// The growth tree of one stage: each explored vertex is joined to the
/// vertices it revealed (its whole target class, or only the target when
/// the class died).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingTree {
    pub root: u32,
    /// `levels[r]` = vertices at tree distance `r` from the root.
    pub levels: Vec<Vec<u32>>,
}

impl CouplingTree {
    pub fn from_trace(trace: &ExplorationTrace) -> Self {
        let root = trace.rounds[0][0];
        let mut level: HashMap<u32, usize> = HashMap::from([(root, 0)]);
        let mut levels = vec![vec![root]];
        for s in &trace.steps {
            let l = level[&s.explored] + 1;
            if levels.len() <= l {
                levels.push(Vec::new());
            }
            for &u in &s.revealed {
                level.insert(u, l);
                levels[l].push(u);
            }
        }
        for l in &mut levels {
            l.sort_unstable();
        }
        Self { root, levels }
    }
}

/// Level sizes `Z_0, Z_1, ...` of the coupling tree over the completed rounds.
pub fn coupling_tree_levels(trace: &ExplorationTrace) -> Vec<usize> {
    let t = CouplingTree::from_trace(trace);
    (0..=trace.completed_rounds).map(|r| t.levels.get(r).map_or(0, Vec::len)).collect()
}
