//! Multiple Monte-Carlo tree search (MMCTS) for partially observable
//! zero-sum games, with an EXP3 adversarial bandit as the selection policy.
//!
//! Each player grows a private tree over their own move/observation
//! histories and updates move weights with exponentially weighted,
//! importance-corrected rewards. In the long run the players' empirical
//! strategies approach a Nash equilibrium of the game; in the short run the
//! trees stay sharply asymmetric, concentrating simulations on the lines
//! that matter. The bundled game is phantom tic-tac-toe, a referee-mediated
//! variant of tic-tac-toe in which players cannot see each other's marks.
//!
//! The crate is organised around a small set of modules:
//!
//! - [`bandit`]: the EXP3 algorithm and a matrix-game self-play driver,
//! - [`game`]: the referee abstraction and episode driver,
//! - [`phantom`]: the phantom tic-tac-toe referee and a full-information
//!   minimax oracle for classic tic-tac-toe,
//! - [`search`]: the per-player trees and the training loop,
//! - [`policy`]: frozen policies and the on-disk tree format,
//! - [`players`]: agents (random, belief sampler, frozen policy, exploiter),
//! - [`harness`]: match evaluation, round-robin tables and CSV emission.

pub mod bandit;
pub mod game;
pub mod phantom;
pub mod players;
pub mod policy;
pub mod rng;
pub mod search;

pub use bandit::{Exp3Error, Exp3State, MatrixGame};
pub use game::{Game, GameOutcome, ObservationToken, PlayerId};
pub use phantom::{Board, MinimaxTable, Outcome, PhantomTicTacToe};
pub use players::{Agent, BeliefSamplerAgent, BeliefState, FrozenPolicyAgent, RandomAgent};
pub use policy::{FreezeMode, FrozenPolicy};
pub use search::{PlayerTree, SearchParams};
