//! Referee abstraction for partially observable two-player zero-sum games.
//!
//! A game implements [`Game`]: the referee holds the true state, validates
//! moves and emits per-player [`ObservationToken`]s after every step. A
//! player sees nothing but its own moves and the tokens addressed to it,
//! so the concatenation of the two is exactly its information state — and
//! exactly the key material for the per-player search trees.

use rand::Rng;

use crate::players::Agent;

pub const PLAYER_COUNT: usize = 2;

/// One of the two seats. Player 1 moves first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlayerId(u8);

impl PlayerId {
    pub const P1: PlayerId = PlayerId(0);
    pub const P2: PlayerId = PlayerId(1);

    /// Builds from a 0-based index (`0` = Player 1).
    pub fn new(index: usize) -> PlayerId {
        assert!(index < PLAYER_COUNT, "player index {index} out of range");
        PlayerId(index as u8)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn opponent(self) -> PlayerId {
        PlayerId(1 - self.0)
    }

    pub fn both() -> [PlayerId; PLAYER_COUNT] {
        [PlayerId::P1, PlayerId::P2]
    }
}

/// An opaque observation symbol from a game-defined finite alphabet.
///
/// The integer encoding is chosen by each game and stable across runs, so
/// tokens can key tree edges and be serialized directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObservationToken(pub u32);

/// Reusable buffer for the observations one step emits, in emission order
/// per addressee.
#[derive(Debug, Clone, Default)]
pub struct StepObservations {
    per_player: [Vec<ObservationToken>; PLAYER_COUNT],
}

impl StepObservations {
    pub fn clear(&mut self) {
        for list in &mut self.per_player {
            list.clear();
        }
    }

    pub fn push(&mut self, to: PlayerId, token: ObservationToken) {
        self.per_player[to.index()].push(token);
    }

    pub fn for_player(&self, player: PlayerId) -> &[ObservationToken] {
        &self.per_player[player.index()]
    }
}

/// The referee contract a game must provide.
///
/// Moves are indices into the active player's current candidate list, in a
/// canonical order the game defines; the indices are dense in
/// `0..move_count` so they can serve directly as bandit arms. Rewards sum
/// to zero and every episode terminates within [`max_steps`](Game::max_steps).
pub trait Game {
    type State: Clone;

    fn initial_state(&self) -> Self::State;

    /// Upper bound on the number of steps in any episode.
    fn max_steps(&self) -> usize;

    fn is_terminal(&self, state: &Self::State) -> bool;

    fn active_player(&self, state: &Self::State) -> PlayerId;

    /// Number of candidate moves for the active player.
    fn move_count(&self, state: &Self::State) -> usize;

    /// Applies the active player's move, pushing each emitted observation
    /// into `out` (which the callee clears first). Returns `true` when the
    /// game has ended. The active player always receives at least one
    /// observation describing its move's result.
    fn step(&self, state: &mut Self::State, mv: usize, out: &mut StepObservations) -> bool;

    /// Per-player terminal rewards; zero-sum.
    fn rewards(&self, state: &Self::State) -> [f64; PLAYER_COUNT];
}

/// Who won an episode, from the seat labels' point of view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GameOutcome {
    P1Win,
    P2Win,
    Draw,
}

impl GameOutcome {
    pub fn from_rewards(rewards: [f64; PLAYER_COUNT]) -> GameOutcome {
        if rewards[0] > 0.0 {
            GameOutcome::P1Win
        } else if rewards[0] < 0.0 {
            GameOutcome::P2Win
        } else {
            GameOutcome::Draw
        }
    }
}

/// One entry of a player's interaction history: an own move index or an
/// observation received from the referee.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HistoryItem {
    Move(u32),
    Observation(ObservationToken),
}

/// Everything one episode produced: terminal rewards plus each player's
/// full interaction history in delivery order.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub rewards: [f64; PLAYER_COUNT],
    pub histories: [Vec<HistoryItem>; PLAYER_COUNT],
}

/// Drives one episode of `game` with the given agents.
///
/// Observations are delivered in emission order, active player first and
/// the opponent second. Fails fast if an agent returns an out-of-range
/// move or the game exceeds its declared step bound.
pub fn play_episode<G: Game>(
    game: &G,
    p1: &mut dyn Agent,
    p2: &mut dyn Agent,
    rng: &mut impl Rng,
) -> EpisodeRecord {
    let mut state = game.initial_state();
    let mut obs = StepObservations::default();
    let mut histories: [Vec<HistoryItem>; PLAYER_COUNT] = [Vec::new(), Vec::new()];
    let mut agents: [&mut dyn Agent; PLAYER_COUNT] = [p1, p2];

    for agent in agents.iter_mut() {
        agent.begin_episode();
    }

    let mut steps = 0;
    let mut terminal = game.is_terminal(&state);
    while !terminal {
        assert!(
            steps < game.max_steps(),
            "episode exceeded the declared bound of {} steps",
            game.max_steps()
        );
        let active = game.active_player(&state);
        let k = game.move_count(&state);
        let mv = agents[active.index()].choose_move(k, rng);
        assert!(mv < k, "agent for {active:?} returned move {mv} of {k}");

        terminal = game.step(&mut state, mv, &mut obs);
        histories[active.index()].push(HistoryItem::Move(mv as u32));
        for player in [active, active.opponent()] {
            for &token in obs.for_player(player) {
                agents[player.index()].observe(token);
                histories[player.index()].push(HistoryItem::Observation(token));
            }
        }
        steps += 1;
    }

    let rewards = game.rewards(&state);
    debug_assert!(
        rewards.iter().sum::<f64>().abs() < 1e-12,
        "rewards must be zero-sum"
    );
    for (i, agent) in agents.iter_mut().enumerate() {
        agent.end_episode(rewards[i]);
    }
    EpisodeRecord { rewards, histories }
}
