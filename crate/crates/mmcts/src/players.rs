//! Agents that can sit at a referee table: uniform random play, belief
//! sampling backed by the exact classic solution, and frozen search
//! policies (see [`crate::policy`]).

use std::sync::Arc;

use rand::{Rng, RngCore};

use crate::game::{Game, GameOutcome, ObservationToken, PlayerId};
use crate::phantom::{Board, MinimaxTable, PhantomObservation, BOARD_CELLS};
use crate::policy::FrozenPolicy;
use crate::rng::{derive_rng, STREAM_ROBUSTNESS};
use crate::search::{simulate_with, NodeId, PlayerTree, SearchParams, Seat, SimulationScratch, ROOT};

/// The player contract the episode driver expects.
///
/// An agent is a deterministic function of its construction parameters and
/// the (seed, observation history) pair: all randomness flows through the
/// `rng` handed to [`choose_move`](Agent::choose_move). Move indices refer
/// to the game's current candidate enumeration.
pub trait Agent {
    /// Resets per-episode state.
    fn begin_episode(&mut self);

    /// Picks a move index in `0..move_count`.
    fn choose_move(&mut self, move_count: usize, rng: &mut dyn RngCore) -> usize;

    /// Receives one observation addressed to this agent.
    fn observe(&mut self, token: ObservationToken);

    /// Sees the terminal reward for the finished episode.
    fn end_episode(&mut self, reward: f64);
}

/// Uniform draw over `0..move_count`.
pub fn random_choose<R: Rng + ?Sized>(move_count: usize, rng: &mut R) -> usize {
    debug_assert!(move_count >= 1);
    rng.gen_range(0..move_count)
}

/// Plays every move uniformly at random; ignores all observations.
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomAgent;

impl RandomAgent {
    pub fn new() -> RandomAgent {
        RandomAgent
    }
}

impl Agent for RandomAgent {
    fn begin_episode(&mut self) {}

    fn choose_move(&mut self, move_count: usize, rng: &mut dyn RngCore) -> usize {
        random_choose(move_count, rng)
    }

    fn observe(&mut self, _token: ObservationToken) {}

    fn end_episode(&mut self, _reward: f64) {}
}

/// Everything a phantom player actually knows mid-game: its own accepted
/// marks, the squares its proposals bounced off (known opponent marks),
/// and how many turns the opponent has completed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BeliefState {
    seat: PlayerId,
    own_marks: u16,
    known_opponent_marks: u16,
    opponent_move_count: u32,
}

impl BeliefState {
    pub fn new(seat: PlayerId) -> BeliefState {
        BeliefState {
            seat,
            own_marks: 0,
            known_opponent_marks: 0,
            opponent_move_count: 0,
        }
    }

    pub fn seat(&self) -> PlayerId {
        self.seat
    }

    pub fn own_accepted_count(&self) -> u32 {
        self.own_marks.count_ones()
    }

    pub fn opponent_move_count(&self) -> u32 {
        self.opponent_move_count
    }

    pub fn own_marks(&self) -> impl Iterator<Item = usize> + '_ {
        mask_squares(self.own_marks)
    }

    pub fn known_opponent_marks(&self) -> impl Iterator<Item = usize> + '_ {
        mask_squares(self.known_opponent_marks)
    }

    /// Squares this player may still propose: not its own and not known to
    /// be the opponent's. Matches the referee's candidate enumeration.
    pub fn candidate_squares(&self) -> impl Iterator<Item = usize> + '_ {
        mask_squares(!(self.own_marks | self.known_opponent_marks) & 0x1FF)
    }

    /// Folds one referee observation into the belief.
    pub fn apply(&mut self, obs: PhantomObservation) {
        match obs {
            PhantomObservation::Accepted(sq) => self.own_marks |= 1 << sq,
            PhantomObservation::Rejected(sq) => self.known_opponent_marks |= 1 << sq,
            PhantomObservation::OpponentTurnEnded => self.opponent_move_count += 1,
            PhantomObservation::GameEnd(_) => {}
        }
    }

    /// All full boards consistent with this belief: the opponent's
    /// unaccounted marks go on any combination of the squares this player
    /// knows nothing about. The list has exactly `C(free, unaccounted)`
    /// entries, or is empty when the belief is contradictory (which
    /// signals a referee/agent desync).
    pub fn enumerate_consistent_boards(&self) -> Vec<Board> {
        let known = self.known_opponent_marks.count_ones();
        if known > self.opponent_move_count || self.own_marks & self.known_opponent_marks != 0 {
            return Vec::new();
        }
        let unaccounted = self.opponent_move_count - known;
        let free = !(self.own_marks | self.known_opponent_marks) & 0x1FF;
        if unaccounted > free.count_ones() {
            return Vec::new();
        }

        let (own_as_x, seat_is_x) = (self.own_marks, self.seat == PlayerId::P1);
        let mut boards = Vec::new();
        for subset in subsets_of_size(free, unaccounted) {
            let opp = self.known_opponent_marks | subset;
            let (x, o) = if seat_is_x {
                (own_as_x, opp)
            } else {
                (opp, own_as_x)
            };
            boards.push(Board::from_masks(x, o));
        }
        boards
    }
}

fn mask_squares(mask: u16) -> impl Iterator<Item = usize> {
    (0..BOARD_CELLS).filter(move |sq| mask & (1 << sq) != 0)
}

/// All subsets of `mask` with exactly `size` bits, in increasing mask
/// order (Gosper's hack over the compacted bit positions).
fn subsets_of_size(mask: u16, size: u32) -> impl Iterator<Item = u16> {
    let positions: Vec<u16> = (0..16).filter(|b| mask & (1 << b) != 0).collect();
    let n = positions.len() as u32;
    let end: u32 = 1 << n;
    (0..end).filter_map(move |compact| {
        if compact.count_ones() != size {
            return None;
        }
        let mut subset = 0u16;
        for (i, &pos) in positions.iter().enumerate() {
            if compact & (1 << i) != 0 {
                subset |= 1 << pos;
            }
        }
        Some(subset)
    })
}

/// Picks a square by belief sampling: enumerate every board consistent
/// with `belief`, look up the optimal moves on each one that is still in
/// play, and draw a square proportionally to how often it appears.
///
/// Boards on which the game would already be over are skipped: play
/// continuing is itself an observation, and the classic solution has no
/// moves to offer on them. The true board is always among the survivors.
pub fn belief_sampler_choose(
    belief: &BeliefState,
    table: &MinimaxTable,
    rng: &mut (impl Rng + ?Sized),
) -> usize {
    let boards = belief.enumerate_consistent_boards();
    assert!(!boards.is_empty(), "contradictory belief state");

    let mut tally = [0u32; BOARD_CELLS];
    let mut total = 0u32;
    for board in &boards {
        if board.is_terminal() {
            continue;
        }
        let moves = table
            .optimal_moves(board, belief.seat())
            .expect("consistent boards are reachable and non-terminal");
        for sq in moves {
            tally[sq] += 1;
            total += 1;
        }
    }
    assert!(total > 0, "no live board consistent with the belief");

    let mut draw = rng.gen_range(0..total);
    for (sq, &count) in tally.iter().enumerate() {
        if draw < count {
            return sq;
        }
        draw -= count;
    }
    unreachable!()
}

/// The belief-sampling player: tracks a [`BeliefState`] from its
/// observations and proposes [`belief_sampler_choose`] squares. Strong
/// against weak opposition, but it never plays deliberately "illegal"
/// probing moves, and two belief samplers facing each other score like two
/// random players.
pub struct BeliefSamplerAgent {
    belief: BeliefState,
    table: Arc<MinimaxTable>,
}

impl BeliefSamplerAgent {
    pub fn new(seat: PlayerId, table: Arc<MinimaxTable>) -> BeliefSamplerAgent {
        BeliefSamplerAgent {
            belief: BeliefState::new(seat),
            table,
        }
    }
}

impl Agent for BeliefSamplerAgent {
    fn begin_episode(&mut self) {
        self.belief = BeliefState::new(self.belief.seat());
    }

    fn choose_move(&mut self, move_count: usize, rng: &mut dyn RngCore) -> usize {
        let square = belief_sampler_choose(&self.belief, &self.table, rng);
        let index = self
            .belief
            .candidate_squares()
            .position(|sq| sq == square)
            .expect("sampled square must be a candidate");
        debug_assert!(index < move_count);
        index
    }

    fn observe(&mut self, token: ObservationToken) {
        let obs = PhantomObservation::from_token(token)
            .expect("belief sampler plays phantom tic-tac-toe only");
        self.belief.apply(obs);
    }

    fn end_episode(&mut self, _reward: f64) {}
}

/// Plays a frozen search policy: walks the stored tree along its own
/// observations and samples the per-node distribution, falling back to
/// uniform play wherever the game leaves the tree.
#[derive(Clone)]
pub struct FrozenPolicyAgent {
    policy: FrozenPolicy,
    node: Option<NodeId>,
}

impl FrozenPolicyAgent {
    pub fn new(policy: FrozenPolicy) -> FrozenPolicyAgent {
        FrozenPolicyAgent {
            policy,
            node: Some(ROOT),
        }
    }
}

impl Agent for FrozenPolicyAgent {
    fn begin_episode(&mut self) {
        self.node = Some(ROOT);
    }

    fn choose_move(&mut self, move_count: usize, rng: &mut dyn RngCore) -> usize {
        self.policy.choose(self.node, move_count, rng)
    }

    fn observe(&mut self, token: ObservationToken) {
        self.node = self.node.and_then(|id| self.policy.child(id, token));
    }

    fn end_episode(&mut self, _reward: f64) {}
}

/// Probes a fixed strategy with a one-sided search: the opponent seat
/// starts as a random player and keeps learning (its tree is the only one
/// updated), while `fixed` never changes. Returns the outcome of every
/// simulation plus the final learner tree.
///
/// A strategy close to an equilibrium holds its score against this
/// exploiter for a long time; an exploitable one gets driven well below
/// its nominal value.
pub fn evolving_exploiter<G: Game>(
    game: &G,
    fixed: &mut dyn Agent,
    fixed_seat: PlayerId,
    budget: u64,
    params: &SearchParams,
    seed: u64,
) -> (Vec<GameOutcome>, PlayerTree) {
    let mut learner = PlayerTree::new(fixed_seat.opponent());
    let mut outcomes = Vec::with_capacity(budget.min(1 << 28) as usize);
    let mut rng = derive_rng(seed, STREAM_ROBUSTNESS, 0);
    let mut scratch = SimulationScratch::default();

    for n in 1..=budget {
        let rewards = {
            let mut seats = if fixed_seat == PlayerId::P1 {
                [Seat::Fixed(&mut *fixed), Seat::Learner(&mut learner)]
            } else {
                [Seat::Learner(&mut learner), Seat::Fixed(&mut *fixed)]
            };
            simulate_with(game, &mut seats, n, params, &mut rng, &mut scratch)
        };
        outcomes.push(GameOutcome::from_rewards(rewards));
    }
    (outcomes, learner)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_rng;

    #[test]
    fn random_choose_single_move_is_zero() {
        let mut rng = derive_rng(1, 0, 0);
        assert_eq!(random_choose(1, &mut rng), 0);
    }

    #[test]
    fn random_choose_is_uniform() {
        let mut rng = derive_rng(2, 0, 0);
        let draws = 1_000_000;
        let mut counts = [0u32; 9];
        for _ in 0..draws {
            counts[random_choose(9, &mut rng)] += 1;
        }
        for c in counts {
            let freq = c as f64 / draws as f64;
            assert!((freq - 1.0 / 9.0).abs() < 0.002, "frequency {freq}");
        }
    }

    #[test]
    fn first_decision_of_player_two_sees_nine_boards() {
        let mut belief = BeliefState::new(PlayerId::P2);
        belief.apply(PhantomObservation::OpponentTurnEnded);
        let boards = belief.enumerate_consistent_boards();
        assert_eq!(boards.len(), 9);
        for board in &boards {
            assert_eq!(board.x_count(), 1);
            assert_eq!(board.o_count(), 0);
        }
    }

    #[test]
    fn one_own_mark_against_one_hidden_move_gives_eight_boards() {
        let mut belief = BeliefState::new(PlayerId::P1);
        belief.apply(PhantomObservation::Accepted(0));
        belief.apply(PhantomObservation::OpponentTurnEnded);
        let boards = belief.enumerate_consistent_boards();
        assert_eq!(boards.len(), 8);
        for board in &boards {
            assert_eq!(board.cell(0), crate::phantom::Cell::X);
        }
    }

    #[test]
    fn rejection_pins_a_known_opponent_mark() {
        // Own mark on 0, rejected at 4, opponent has moved twice:
        // C(7, 1) = 7 boards, every one with the opponent on 4.
        let mut belief = BeliefState::new(PlayerId::P1);
        belief.apply(PhantomObservation::Accepted(0));
        belief.apply(PhantomObservation::OpponentTurnEnded);
        belief.apply(PhantomObservation::Rejected(4));
        belief.apply(PhantomObservation::OpponentTurnEnded);
        let boards = belief.enumerate_consistent_boards();
        assert_eq!(boards.len(), 7);
        for board in &boards {
            assert_eq!(board.cell(4), crate::phantom::Cell::O);
            assert_eq!(board.o_count(), 2);
        }
    }

    #[test]
    fn contradictory_belief_enumerates_nothing() {
        let mut belief = BeliefState::new(PlayerId::P1);
        belief.apply(PhantomObservation::Rejected(4));
        // A known opponent mark without any completed opponent turn.
        assert!(belief.enumerate_consistent_boards().is_empty());
    }

    #[test]
    fn forced_winning_square_is_chosen_with_probability_one() {
        // P1 holds 0 and 1 and knows both opponent marks (3 and 4): the
        // single consistent board has one optimal move, square 2.
        let table = Arc::new(MinimaxTable::new());
        let mut belief = BeliefState::new(PlayerId::P1);
        belief.apply(PhantomObservation::Accepted(0));
        belief.apply(PhantomObservation::OpponentTurnEnded);
        belief.apply(PhantomObservation::Rejected(3));
        belief.apply(PhantomObservation::Accepted(1));
        belief.apply(PhantomObservation::OpponentTurnEnded);
        belief.apply(PhantomObservation::Rejected(4));
        assert_eq!(belief.enumerate_consistent_boards().len(), 1);

        let mut rng = derive_rng(3, 0, 0);
        for _ in 0..50 {
            assert_eq!(belief_sampler_choose(&belief, &table, &mut rng), 2);
        }
    }

    #[test]
    fn opening_choice_respects_board_symmetry() {
        // As Player 1 with no information, the sampled distribution must be
        // invariant under the symmetry group: corners {0,2,6,8} equal,
        // edges {1,3,5,7} equal.
        let table = Arc::new(MinimaxTable::new());
        let belief = BeliefState::new(PlayerId::P1);
        let mut rng = derive_rng(4, 0, 0);
        let draws = 100_000;
        let mut counts = [0u32; BOARD_CELLS];
        for _ in 0..draws {
            counts[belief_sampler_choose(&belief, &table, &mut rng)] += 1;
        }
        let freq = |sq: usize| counts[sq] as f64 / draws as f64;
        for group in [[0usize, 2, 6, 8], [1usize, 3, 5, 7]] {
            let mean: f64 = group.iter().map(|&sq| freq(sq)).sum::<f64>() / 4.0;
            for &sq in &group {
                assert!(
                    (freq(sq) - mean).abs() < 0.01,
                    "square {sq} frequency {} vs group mean {mean}",
                    freq(sq)
                );
            }
        }
    }

    #[test]
    fn exploiter_with_zero_budget_returns_an_empty_series() {
        use crate::phantom::PhantomTicTacToe;

        let game = PhantomTicTacToe;
        let mut fixed = RandomAgent::new();
        let (outcomes, learner) = evolving_exploiter(
            &game,
            &mut fixed,
            PlayerId::P1,
            0,
            &SearchParams::default(),
            1,
        );
        assert!(outcomes.is_empty());
        assert_eq!(learner.node_count(), 1);
        assert_eq!(learner.owner(), PlayerId::P2);
    }

    #[test]
    fn exploiter_never_mutates_the_fixed_policy() {
        use crate::phantom::PhantomTicTacToe;
        use crate::policy::{tree_to_bytes, FreezeMode};
        use crate::search::train;

        let game = PhantomTicTacToe;
        let trained = train(&game, 2000, &SearchParams::default(), 17, &[], |_, _, _| {});
        let [p1_tree, _] = trained.trees;
        let shared = Arc::new(p1_tree);
        let before = tree_to_bytes(&shared);

        let policy = FrozenPolicy::freeze(Arc::clone(&shared), FreezeMode::Weights);
        let mut fixed = FrozenPolicyAgent::new(policy);
        evolving_exploiter(
            &game,
            &mut fixed,
            PlayerId::P1,
            5000,
            &SearchParams::default(),
            2,
        );
        assert_eq!(tree_to_bytes(&shared), before);
    }

    #[test]
    fn exploiter_learns_to_beat_a_fixed_random_first_player() {
        use crate::phantom::PhantomTicTacToe;

        // Random play gives the first player a +0.31 win-rate edge; an
        // exploiter in the second seat must pull that edge down.
        let game = PhantomTicTacToe;
        let mut fixed = RandomAgent::new();
        let budget = 200_000;
        let (outcomes, _) = evolving_exploiter(
            &game,
            &mut fixed,
            PlayerId::P1,
            budget,
            &SearchParams::default(),
            3,
        );
        let window = &outcomes[outcomes.len() - 50_000..];
        let diff = window
            .iter()
            .map(|o| match o {
                GameOutcome::P1Win => 1.0,
                GameOutcome::P2Win => -1.0,
                GameOutcome::Draw => 0.0,
            })
            .sum::<f64>()
            / window.len() as f64;
        assert!(
            diff < 0.1,
            "exploiter failed to dent the random player: final window diff {diff}"
        );
    }

    #[test]
    fn belief_sampler_never_proposes_known_occupied_squares() {
        use crate::game::{play_episode, Game};
        use crate::phantom::PhantomTicTacToe;

        let table = Arc::new(MinimaxTable::new());
        let game = PhantomTicTacToe;
        for episode in 0..500 {
            let mut rng = derive_rng(5, 6, episode);
            let mut sampler = BeliefSamplerAgent::new(PlayerId::P1, Arc::clone(&table));
            let mut random = RandomAgent::new();
            // Rejections only happen on squares the sampler cannot know
            // about, so it is rejected at most once per opponent mark.
            let record = play_episode(&game, &mut sampler, &mut random, &mut rng);
            let rejections = record.histories[0]
                .iter()
                .filter(|item| {
                    matches!(
                        item,
                        crate::game::HistoryItem::Observation(t)
                            if matches!(
                                PhantomObservation::from_token(*t),
                                Some(PhantomObservation::Rejected(_))
                            )
                    )
                })
                .count();
            assert!(rejections <= 4);
        }
    }
}
