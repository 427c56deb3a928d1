//! Two-level map equation minimization by greedy node moving with module
//! aggregation, restarted from several seeded node orders.
//!
//! Each restart alternates a fine pass (leaf nodes move between the current
//! modules) with coarse passes (modules are collapsed into super-nodes that
//! move in turn) until the codelength stops improving. Moves only ever join
//! a node to a neighboring module or split it into an empty one, so
//! disconnected components never share a module.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::mapeq::{map_equation, plogp};
use super::Partition;
use crate::graph::WeightedGraph;

const MIN_MOVE_IMPROVEMENT: f64 = 1e-12;
const MIN_TRIAL_IMPROVEMENT: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InfomapOptions {
    /// Independent restarts; the lowest codelength wins.
    pub restarts: usize,
    /// Cap on node-moving sweeps per level.
    pub max_sweeps: usize,
    /// Cap on fine/coarse alternations per restart.
    pub max_rounds: usize,
}

impl Default for InfomapOptions {
    fn default() -> Self {
        InfomapOptions {
            restarts: 8,
            max_sweeps: 200,
            max_rounds: 20,
        }
    }
}

/// One aggregation level: nodes carry visit rate, their own exit flow, and
/// neighbor flows `w / 2W` to other nodes of the level.
#[derive(Clone, Debug)]
struct Level {
    flow: Vec<f64>,
    exit: Vec<f64>,
    adj: Vec<Vec<(usize, f64)>>,
}

impl Level {
    fn leaves(graph: &WeightedGraph) -> Level {
        let two_w = 2.0 * graph.total_weight();
        let adj: Vec<Vec<(usize, f64)>> = graph
            .adjacency()
            .into_iter()
            .map(|row| row.into_iter().map(|(v, w)| (v, w / two_w)).collect())
            .collect();
        let flow: Vec<f64> = adj.iter().map(|row| row.iter().map(|(_, f)| f).sum()).collect();
        Level {
            exit: flow.clone(),
            flow,
            adj,
        }
    }

    fn len(&self) -> usize {
        self.flow.len()
    }

    /// Collapse modules into super-nodes. Returns the new level and the map
    /// from module id to super-node index.
    fn aggregate(&self, module: &[usize], module_exit: &[f64]) -> (Level, Vec<usize>) {
        let mut relabel = vec![usize::MAX; self.len()];
        let mut count = 0;
        for &m in module {
            if relabel[m] == usize::MAX {
                relabel[m] = count;
                count += 1;
            }
        }
        let mut flow = vec![0.0; count];
        let mut exit = vec![0.0; count];
        let mut links: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); count];
        for v in 0..self.len() {
            let a = relabel[module[v]];
            flow[a] += self.flow[v];
            exit[a] = module_exit[module[v]];
            for &(u, f) in &self.adj[v] {
                let b = relabel[module[u]];
                if a != b {
                    *links[a].entry(b).or_insert(0.0) += f;
                }
            }
        }
        let adj = links.into_iter().map(|m| m.into_iter().collect()).collect();
        (Level { flow, exit, adj }, relabel)
    }
}

/// Running totals of the codelength terms that depend on the modules.
struct Modules {
    flow: Vec<f64>,
    exit: Vec<f64>,
    size: Vec<usize>,
    sum_exit: f64,
    sum_plogp_exit: f64,
    sum_plogp_exit_flow: f64,
}

impl Modules {
    fn new(level: &Level, module: &[usize]) -> Modules {
        let n = level.len();
        let mut flow = vec![0.0; n];
        let mut exit = vec![0.0; n];
        let mut size = vec![0; n];
        for v in 0..n {
            let m = module[v];
            flow[m] += level.flow[v];
            exit[m] += level.exit[v];
            size[m] += 1;
            for &(u, f) in &level.adj[v] {
                if module[u] == m {
                    exit[m] -= f;
                }
            }
        }
        for e in exit.iter_mut() {
            *e = e.max(0.0);
        }
        let mut m = Modules {
            flow,
            exit,
            size,
            sum_exit: 0.0,
            sum_plogp_exit: 0.0,
            sum_plogp_exit_flow: 0.0,
        };
        m.recompute_totals();
        m
    }

    fn recompute_totals(&mut self) {
        self.sum_exit = self.exit.iter().sum();
        self.sum_plogp_exit = self.exit.iter().map(|&q| plogp(q)).sum();
        self.sum_plogp_exit_flow = self
            .exit
            .iter()
            .zip(&self.flow)
            .map(|(&q, &p)| plogp(q + p))
            .sum();
    }

    /// Codelength up to the constant node-entropy term.
    fn objective(&self) -> f64 {
        plogp(self.sum_exit) - 2.0 * self.sum_plogp_exit + self.sum_plogp_exit_flow
    }

    /// Codelength change for moving a node (flow `p`, own exit `x`) from
    /// module `a` to module `b`, given its link flow into each.
    fn delta(&self, a: usize, b: usize, p: f64, x: f64, to_a: f64, to_b: f64) -> f64 {
        let (old_ea, old_eb) = (self.exit[a], self.exit[b]);
        let new_ea = if self.size[a] == 1 { 0.0 } else { (old_ea - x + 2.0 * to_a).max(0.0) };
        let new_fa = if self.size[a] == 1 { 0.0 } else { self.flow[a] - p };
        let new_eb = (old_eb + x - 2.0 * to_b).max(0.0);
        let new_fb = self.flow[b] + p;
        let sum_exit = self.sum_exit - old_ea - old_eb + new_ea + new_eb;
        let d_plogp_exit = plogp(new_ea) + plogp(new_eb) - plogp(old_ea) - plogp(old_eb);
        let d_plogp_exit_flow = plogp(new_ea + new_fa) + plogp(new_eb + new_fb)
            - plogp(old_ea + self.flow[a])
            - plogp(old_eb + self.flow[b]);
        plogp(sum_exit) - plogp(self.sum_exit) - 2.0 * d_plogp_exit + d_plogp_exit_flow
    }

    fn apply(&mut self, a: usize, b: usize, p: f64, x: f64, to_a: f64, to_b: f64) {
        let new_ea = if self.size[a] == 1 { 0.0 } else { (self.exit[a] - x + 2.0 * to_a).max(0.0) };
        let new_fa = if self.size[a] == 1 { 0.0 } else { self.flow[a] - p };
        let new_eb = (self.exit[b] + x - 2.0 * to_b).max(0.0);
        let new_fb = self.flow[b] + p;
        for (m, e, f) in [(a, new_ea, new_fa), (b, new_eb, new_fb)] {
            self.sum_exit += e - self.exit[m];
            self.sum_plogp_exit += plogp(e) - plogp(self.exit[m]);
            self.sum_plogp_exit_flow += plogp(e + f) - plogp(self.exit[m] + self.flow[m]);
            self.exit[m] = e;
            self.flow[m] = f;
        }
        self.size[a] -= 1;
        self.size[b] += 1;
    }
}

/// Greedy node moving on one level from an initial module assignment.
/// Returns the final assignment, its module exits, and the number of moves.
fn move_nodes(
    level: &Level,
    mut module: Vec<usize>,
    rng: &mut ChaCha8Rng,
    max_sweeps: usize,
) -> (Vec<usize>, Vec<f64>, usize) {
    let n = level.len();
    let mut mods = Modules::new(level, &module);
    let mut empty: Vec<usize> = (0..n).filter(|&m| mods.size[m] == 0).rev().collect();
    let mut link_to = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    let mut total_moves = 0;

    for _ in 0..max_sweeps {
        order.shuffle(rng);
        let before = mods.objective();
        let mut moved = 0;
        for &v in &order {
            if level.adj[v].is_empty() {
                continue;
            }
            let a = module[v];
            for &(u, f) in &level.adj[v] {
                let m = module[u];
                if link_to[m] == 0.0 {
                    touched.push(m);
                }
                link_to[m] += f;
            }
            let (p, x) = (level.flow[v], level.exit[v]);
            let to_a = link_to[a];
            let mut best = (0.0, a);
            for &b in &touched {
                if b == a {
                    continue;
                }
                let d = mods.delta(a, b, p, x, to_a, link_to[b]);
                if d < best.0 {
                    best = (d, b);
                }
            }
            if mods.size[a] > 1 {
                if let Some(&b) = empty.last() {
                    let d = mods.delta(a, b, p, x, to_a, 0.0);
                    if d < best.0 {
                        best = (d, b);
                    }
                }
            }
            let (d, b) = best;
            if b != a && d < -MIN_MOVE_IMPROVEMENT {
                let to_b = link_to[b];
                if mods.size[b] == 0 {
                    empty.pop();
                }
                mods.apply(a, b, p, x, to_a, to_b);
                if mods.size[a] == 0 {
                    empty.push(a);
                }
                module[v] = b;
                moved += 1;
            }
            for &m in &touched {
                link_to[m] = 0.0;
            }
            touched.clear();
        }
        total_moves += moved;
        // Incremental totals drift slightly; resync once per sweep.
        mods.recompute_totals();
        if moved == 0 || before - mods.objective() < MIN_MOVE_IMPROVEMENT {
            break;
        }
    }
    (module, mods.exit, total_moves)
}

fn run_trial(graph: &WeightedGraph, leaves: &Level, rng: &mut ChaCha8Rng, opts: &InfomapOptions) -> (Partition, f64) {
    let n = leaves.len();
    let mut best = Partition::singletons(n);
    let mut best_len = codelength(graph, &best);
    for _ in 0..opts.max_rounds {
        // Fine pass: leaves move between the current best modules.
        let init = best.assignment().to_vec();
        let (module, exits, _) = move_nodes(leaves, init, rng, opts.max_sweeps);
        let (mut level, relabel) = leaves.aggregate(&module, &exits);
        let mut leaf_node: Vec<usize> = module.iter().map(|&m| relabel[m]).collect();
        // Coarse passes: collapse modules and keep moving until stuck.
        loop {
            let start: Vec<usize> = (0..level.len()).collect();
            let (module, exits, moves) = move_nodes(&level, start, rng, opts.max_sweeps);
            if moves == 0 {
                break;
            }
            let (next, relabel) = level.aggregate(&module, &exits);
            for node in leaf_node.iter_mut() {
                *node = relabel[module[*node]];
            }
            if next.len() == level.len() {
                break;
            }
            level = next;
        }
        let candidate = Partition::from_labels(&leaf_node);
        let len = codelength(graph, &candidate);
        if len < best_len - MIN_TRIAL_IMPROVEMENT {
            best = candidate;
            best_len = len;
        } else {
            break;
        }
    }
    (best, best_len)
}

fn codelength(graph: &WeightedGraph, p: &Partition) -> f64 {
    map_equation(graph, p).map(|s| s.codelength).unwrap_or(0.0)
}

/// Partition minimizing the two-level map equation, deterministic in `seed`.
/// Graphs without edge weight come back as singletons.
pub fn infomap_partition(graph: &WeightedGraph, seed: u64) -> Partition {
    infomap_with(graph, seed, &InfomapOptions::default())
}

pub fn infomap_with(graph: &WeightedGraph, seed: u64, opts: &InfomapOptions) -> Partition {
    let n = graph.node_count();
    if graph.total_weight() <= 0.0 {
        return Partition::singletons(n);
    }
    let leaves = Level::leaves(graph);
    let singles = Partition::singletons(n);
    let components = graph.components();
    let (mut best, mut best_len) = (singles.clone(), codelength(graph, &singles));
    let comp_len = codelength(graph, &components);
    if comp_len < best_len - MIN_TRIAL_IMPROVEMENT {
        best = components;
        best_len = comp_len;
    }
    for restart in 0..opts.restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(restart as u64);
        let (p, len) = run_trial(graph, &leaves, &mut rng, opts);
        if len < best_len - MIN_TRIAL_IMPROVEMENT {
            best = p;
            best_len = len;
        }
    }
    best
}
