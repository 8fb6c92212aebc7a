//! Per-player search trees and the self-play training loop.
//!
//! Every player owns a private tree keyed by its own interaction history:
//! each edge is one observation token, so a node is exactly one
//! information state of that player. A node where the owner is to move
//! holds one exponential weight per candidate move, stored in log domain.
//! Moves are drawn from the EXP3 mixture
//!
//! ```text
//! p_m = (1 - gamma(n)) * rew_m / sum_l rew_l + gamma(n) / k
//! ```
//!
//! and after the episode each chosen move's weight is multiplied by
//! `exp(f(d) * r / p)`, where `r` is the terminal reward, `p` the
//! probability the move was drawn with, and `f(d)` a depth scale that
//! trusts deep, nearly-terminal decisions more than moves near the root.
//! In log domain the update is a plain addition, so arbitrarily long runs
//! cannot overflow.
//!
//! A simulation walks each player down its tree as observations arrive;
//! the first unknown edge flips the player into uniform random play, and
//! at the episode's end that single missing node is added — one node per
//! player per simulation, exactly where play actually went.

use rand::Rng;
use rustc_hash::FxHashMap;

use crate::bandit::{mixture_into, sample_index};
use crate::game::{Game, GameOutcome, ObservationToken, PlayerId};
use crate::players::Agent;
use crate::rng::{derive_rng, STREAM_TRAIN};

pub type NodeId = u32;

/// The root of every tree.
pub const ROOT: NodeId = 0;

const NO_PARENT: u32 = u32::MAX;
const NO_EDGE: u32 = u32::MAX;
const NO_ARMS: u32 = u32::MAX;

/// Tuning knobs of the search: the exploration schedule
/// `gamma(n) = n^-gamma_exponent` over the global simulation counter, and
/// the depth scale `f(d) = depth_base^(d - depth_offset)` applied to
/// backpropagated rewards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchParams {
    pub gamma_exponent: f64,
    pub depth_base: f64,
    pub depth_offset: f64,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            gamma_exponent: 0.3,
            depth_base: 1.7,
            depth_offset: 9.0,
        }
    }
}

impl SearchParams {
    /// Exploration mix for simulation `n` (1-based).
    pub fn gamma(&self, n: u64) -> f64 {
        debug_assert!(n >= 1);
        (n as f64).powf(-self.gamma_exponent)
    }

    /// Reward scale for a decision at depth `d`.
    pub fn depth_scale(&self, depth: u16) -> f64 {
        self.depth_base.powf(depth as f64 - self.depth_offset)
    }
}

#[derive(Debug, Clone, Copy)]
struct NodeMeta {
    parent: u32,
    edge: u32,
    first_arm: u32,
    k: u16,
    depth: u16,
}

/// One player's search tree over its own move/observation histories.
///
/// Node ids are dense and assigned in creation order, so the root is 0 and
/// parents always precede children. Arm data (log-weights and visit
/// counts) lives in flat side arrays to keep nodes small; nodes created at
/// non-decision points carry no arms until a later simulation first has to
/// move there.
pub struct PlayerTree {
    owner: PlayerId,
    nodes: Vec<NodeMeta>,
    log_weights: Vec<f64>,
    visits: Vec<u32>,
    children: FxHashMap<u64, NodeId>,
    simulations_done: u64,
}

impl PlayerTree {
    /// A fresh tree holding only the root.
    pub fn new(owner: PlayerId) -> PlayerTree {
        PlayerTree {
            owner,
            nodes: vec![NodeMeta {
                parent: NO_PARENT,
                edge: NO_EDGE,
                first_arm: NO_ARMS,
                k: 0,
                depth: 0,
            }],
            log_weights: Vec::new(),
            visits: Vec::new(),
            children: FxHashMap::default(),
            simulations_done: 0,
        }
    }

    pub fn owner(&self) -> PlayerId {
        self.owner
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn simulations_done(&self) -> u64 {
        self.simulations_done
    }

    pub(crate) fn bump_simulations(&mut self) {
        self.simulations_done += 1;
    }

    pub(crate) fn set_simulations(&mut self, n: u64) {
        self.simulations_done = n;
    }

    pub fn node_parent(&self, id: NodeId) -> Option<NodeId> {
        let p = self.nodes[id as usize].parent;
        (p != NO_PARENT).then_some(p)
    }

    /// The observation token on the edge into `id` (none for the root).
    pub fn node_edge(&self, id: NodeId) -> Option<ObservationToken> {
        let e = self.nodes[id as usize].edge;
        (e != NO_EDGE).then_some(ObservationToken(e))
    }

    /// Edges from the root; the root has depth 0.
    pub fn node_depth(&self, id: NodeId) -> u16 {
        self.nodes[id as usize].depth
    }

    /// Number of moves at `id` (zero until the owner first moves there).
    pub fn arm_count(&self, id: NodeId) -> usize {
        self.nodes[id as usize].k as usize
    }

    /// The node's log-domain move weights and per-move visit counts.
    /// Both slices are empty for nodes without arms.
    pub fn node_arms(&self, id: NodeId) -> (&[f64], &[u32]) {
        let meta = &self.nodes[id as usize];
        if meta.first_arm == NO_ARMS {
            return (&[], &[]);
        }
        let lo = meta.first_arm as usize;
        let hi = lo + meta.k as usize;
        (&self.log_weights[lo..hi], &self.visits[lo..hi])
    }

    pub fn child(&self, id: NodeId, token: ObservationToken) -> Option<NodeId> {
        self.children.get(&child_key(id, token)).copied()
    }

    /// Appends a child of `parent` along `token`, with `k` arms at weight
    /// one (log zero). `k` may be zero when the owner has no decision at
    /// the new history point.
    pub fn add_child(&mut self, parent: NodeId, token: ObservationToken, k: u16) -> NodeId {
        debug_assert!((parent as usize) < self.nodes.len());
        debug_assert!(self.child(parent, token).is_none(), "duplicate edge");
        let id = u32::try_from(self.nodes.len()).expect("tree outgrew u32 node ids");
        let first_arm = if k == 0 {
            NO_ARMS
        } else {
            self.push_arms(k)
        };
        self.nodes.push(NodeMeta {
            parent,
            edge: token.0,
            first_arm,
            k,
            depth: self.nodes[parent as usize].depth + 1,
        });
        self.children.insert(child_key(parent, token), id);
        id
    }

    fn push_arms(&mut self, k: u16) -> u32 {
        let first = u32::try_from(self.log_weights.len()).expect("arm storage outgrew u32");
        self.log_weights.extend(std::iter::repeat(0.0).take(k as usize));
        self.visits.extend(std::iter::repeat(0).take(k as usize));
        first
    }

    /// Allocates `k` arms at `id` if it has none yet. The arm count of a
    /// node is fixed by the game at that history, so a second call must
    /// agree with the first.
    pub fn ensure_arms(&mut self, id: NodeId, k: usize) {
        let k = u16::try_from(k).expect("move count outgrew u16");
        let meta = self.nodes[id as usize];
        if meta.first_arm == NO_ARMS {
            let first = self.push_arms(k);
            let meta = &mut self.nodes[id as usize];
            meta.first_arm = first;
            meta.k = k;
        } else {
            debug_assert_eq!(meta.k, k, "move count changed for one information state");
        }
    }

    /// Writes the EXP3 mixture over the node's moves into `out`.
    pub fn move_distribution_into(&self, id: NodeId, gamma: f64, out: &mut Vec<f64>) {
        let (weights, _) = self.node_arms(id);
        debug_assert!(!weights.is_empty(), "node has no arms");
        mixture_into(weights, gamma, out);
    }

    /// Draws a move at `id` for simulation `n`, returning the move and the
    /// exact probability it was drawn with.
    pub fn select_move(
        &self,
        id: NodeId,
        params: &SearchParams,
        n: u64,
        rng: &mut impl Rng,
    ) -> (usize, f64) {
        let mut probs = Vec::new();
        self.move_distribution_into(id, params.gamma(n), &mut probs);
        let mv = sample_index(&probs, rng);
        (mv, probs[mv])
    }

    /// Adds `delta` to the chosen move's log-weight and bumps its visit
    /// count. Touches nothing else.
    pub fn apply_update(&mut self, id: NodeId, mv: usize, delta: f64) {
        let meta = &self.nodes[id as usize];
        debug_assert!(meta.first_arm != NO_ARMS && mv < meta.k as usize);
        let slot = meta.first_arm as usize + mv;
        let next = self.log_weights[slot] + delta;
        debug_assert!(next.is_finite(), "log-weight became non-finite");
        self.log_weights[slot] = next;
        self.visits[slot] += 1;
    }

    pub(crate) fn restore_arms(&mut self, id: NodeId, log_weights: &[f64], visits: &[u32]) {
        debug_assert_eq!(log_weights.len(), visits.len());
        self.ensure_arms(id, log_weights.len());
        let meta = &self.nodes[id as usize];
        let lo = meta.first_arm as usize;
        let hi = lo + meta.k as usize;
        self.log_weights[lo..hi].copy_from_slice(log_weights);
        self.visits[lo..hi].copy_from_slice(visits);
    }
}

fn child_key(id: NodeId, token: ObservationToken) -> u64 {
    (id as u64) << 32 | token.0 as u64
}

/// A seat at the simulation table: either a learning tree or a fixed
/// opponent agent (used by the one-sided robustness experiments).
pub enum Seat<'a> {
    Learner(&'a mut PlayerTree),
    Fixed(&'a mut dyn Agent),
}

#[derive(Clone, Copy)]
struct TraceStep {
    node: NodeId,
    mv: u16,
    prob: f64,
    depth: u16,
}

#[derive(Clone, Copy)]
struct Pending {
    parent: NodeId,
    edge: ObservationToken,
    k: u16,
    chosen: Option<(u16, f64)>,
}

#[derive(Clone, Copy)]
enum Mode {
    Tree(NodeId),
    Out,
}

/// Reusable per-simulation buffers.
#[derive(Default)]
pub struct SimulationScratch {
    obs: crate::game::StepObservations,
    probs: Vec<f64>,
    traces: [Vec<TraceStep>; 2],
}

/// Runs one full simulation: in-tree players select moves by the EXP3
/// mixture and follow child edges as their observations arrive; a missing
/// edge switches the player to uniform random play for the rest of the
/// episode. At the end each learner adds at most the one node it first
/// stepped out on, then feeds the terminal reward back along its path.
///
/// `n` is the 1-based global simulation counter shared by all seats.
/// Returns the terminal rewards.
pub fn run_simulation<G: Game>(
    game: &G,
    seats: &mut [Seat<'_>; 2],
    n: u64,
    params: &SearchParams,
    rng: &mut impl Rng,
) -> [f64; 2] {
    let mut scratch = SimulationScratch::default();
    simulate_with(game, seats, n, params, rng, &mut scratch)
}

pub(crate) fn simulate_with<G: Game>(
    game: &G,
    seats: &mut [Seat<'_>; 2],
    n: u64,
    params: &SearchParams,
    rng: &mut impl Rng,
    scratch: &mut SimulationScratch,
) -> [f64; 2] {
    assert!(n >= 1, "simulation counter is 1-based");
    let gamma = params.gamma(n);
    let mut state = game.initial_state();
    let mut mode = [Mode::Tree(ROOT), Mode::Tree(ROOT)];
    let mut pending: [Option<Pending>; 2] = [None, None];
    // True while a player's history still sits exactly on its pending
    // (first-out-of-tree) node; a decision made there must be recorded so
    // the new node starts with the move that was actually tried.
    let mut at_frontier = [false, false];
    for trace in &mut scratch.traces {
        trace.clear();
    }
    for seat in seats.iter_mut() {
        if let Seat::Fixed(agent) = seat {
            agent.begin_episode();
        }
    }

    let mut terminal = game.is_terminal(&state);
    let mut steps = 0;
    while !terminal {
        debug_assert!(steps < game.max_steps(), "episode exceeded step bound");
        let active = game.active_player(&state);
        let ai = active.index();
        let k = game.move_count(&state);

        let mv = match &mut seats[ai] {
            Seat::Learner(tree) => match mode[ai] {
                Mode::Tree(node) => {
                    tree.ensure_arms(node, k);
                    tree.move_distribution_into(node, gamma, &mut scratch.probs);
                    let mv = sample_index(&scratch.probs, rng);
                    scratch.traces[ai].push(TraceStep {
                        node,
                        mv: mv as u16,
                        prob: scratch.probs[mv],
                        depth: tree.node_depth(node),
                    });
                    mv
                }
                Mode::Out => {
                    let mv = rng.gen_range(0..k);
                    if at_frontier[ai] {
                        let pend = pending[ai].as_mut().expect("frontier without pending");
                        pend.k = k as u16;
                        pend.chosen = Some((mv as u16, 1.0 / k as f64));
                        at_frontier[ai] = false;
                    }
                    mv
                }
            },
            Seat::Fixed(agent) => agent.choose_move(k, rng),
        };

        terminal = game.step(&mut state, mv, &mut scratch.obs);

        for player in [active, active.opponent()] {
            let pi = player.index();
            for &token in scratch.obs.for_player(player) {
                match &mut seats[pi] {
                    Seat::Learner(tree) => match mode[pi] {
                        Mode::Tree(node) => {
                            if let Some(child) = tree.child(node, token) {
                                mode[pi] = Mode::Tree(child);
                            } else {
                                pending[pi] = Some(Pending {
                                    parent: node,
                                    edge: token,
                                    k: 0,
                                    chosen: None,
                                });
                                mode[pi] = Mode::Out;
                                at_frontier[pi] = true;
                            }
                        }
                        Mode::Out => at_frontier[pi] = false,
                    },
                    Seat::Fixed(agent) => agent.observe(token),
                }
            }
        }
        steps += 1;
    }

    let rewards = game.rewards(&state);
    for (i, seat) in seats.iter_mut().enumerate() {
        match seat {
            Seat::Learner(tree) => {
                if let Some(pend) = pending[i].take() {
                    let id = tree.add_child(pend.parent, pend.edge, pend.k);
                    if let Some((mv, prob)) = pend.chosen {
                        scratch.traces[i].push(TraceStep {
                            node: id,
                            mv,
                            prob,
                            depth: tree.node_depth(id),
                        });
                    }
                }
                backpropagate(tree, &scratch.traces[i], rewards[i], params);
                tree.bump_simulations();
            }
            Seat::Fixed(agent) => agent.end_episode(rewards[i]),
        }
    }
    rewards
}

/// Walks the trace from the deepest node to the root, adding
/// `f(depth) * reward / prob` to each chosen move's log-weight.
fn backpropagate(tree: &mut PlayerTree, trace: &[TraceStep], reward: f64, params: &SearchParams) {
    for step in trace.iter().rev() {
        let delta = params.depth_scale(step.depth) * reward / step.prob;
        tree.apply_update(step.node, step.mv as usize, delta);
    }
}

/// Everything a training run produces: the two trees and the outcome of
/// every simulation, in order.
pub struct TrainResult {
    pub trees: [PlayerTree; 2],
    pub outcomes: Vec<GameOutcome>,
}

/// Trains both players from scratch for `budget` simulations.
///
/// `checkpoints` lists simulation counts at which `on_checkpoint` is
/// handed the current trees (to snapshot policies mid-run). The whole run
/// is a deterministic function of `(game, budget, params, seed)`.
pub fn train<G: Game>(
    game: &G,
    budget: u64,
    params: &SearchParams,
    seed: u64,
    checkpoints: &[u64],
    mut on_checkpoint: impl FnMut(u64, &PlayerTree, &PlayerTree),
) -> TrainResult {
    let mut rng = derive_rng(seed, STREAM_TRAIN, 0);
    let mut tree1 = PlayerTree::new(PlayerId::P1);
    let mut tree2 = PlayerTree::new(PlayerId::P2);
    let mut outcomes = Vec::with_capacity(budget.min(1 << 28) as usize);
    let mut scratch = SimulationScratch::default();

    let mut marks: Vec<u64> = checkpoints.to_vec();
    marks.sort_unstable();
    marks.dedup();
    let mut next_mark = 0;

    for n in 1..=budget {
        let mut seats = [Seat::Learner(&mut tree1), Seat::Learner(&mut tree2)];
        let rewards = simulate_with(game, &mut seats, n, params, &mut rng, &mut scratch);
        outcomes.push(GameOutcome::from_rewards(rewards));
        while next_mark < marks.len() && marks[next_mark] == n {
            on_checkpoint(n, &tree1, &tree2);
            next_mark += 1;
        }
    }
    TrainResult {
        trees: [tree1, tree2],
        outcomes,
    }
}
