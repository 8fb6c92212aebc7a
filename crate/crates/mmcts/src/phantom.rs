//! Phantom tic-tac-toe: a referee-mediated tic-tac-toe variant in which
//! players cannot see each other's marks.
//!
//! Proposing a square the opponent already holds is rejected — the mover
//! learns the square is taken and must pick again; the opponent is told
//! nothing. An accepted placement ends the turn; the opponent only learns
//! that the turn ended, never where the mark went. Rejections are never
//! wasted: each one reveals an opponent mark for the rest of the game.
//!
//! The module also provides [`ClassicTicTacToe`], the full-information
//! wrapper used in tests, and [`MinimaxTable`], an exact solution of
//! classic tic-tac-toe over all reachable boards, which the belief-sampling
//! player consults.

use thiserror::Error;

use crate::game::{Game, ObservationToken, PlayerId, StepObservations, PLAYER_COUNT};

pub const BOARD_CELLS: usize = 9;
const FULL_MASK: u16 = 0x1FF;

/// The eight winning lines, as square bitmasks.
const LINE_MASKS: [u16; 8] = [
    0b000_000_111, // rows
    0b000_111_000,
    0b111_000_000,
    0b001_001_001, // columns
    0b010_010_010,
    0b100_100_100,
    0b100_010_001, // diagonals
    0b001_010_100,
];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PhantomError {
    #[error("board is not reachable in classic play")]
    UnreachableBoard,
    #[error("board is terminal")]
    TerminalBoard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Empty,
    X,
    O,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    XWins,
    OWins,
    Draw,
}

impl Outcome {
    /// Rewards as seen from the two seats (Player 1 plays X).
    pub fn rewards(self) -> [f64; PLAYER_COUNT] {
        match self {
            Outcome::XWins => [1.0, -1.0],
            Outcome::OWins => [-1.0, 1.0],
            Outcome::Draw => [0.0, 0.0],
        }
    }
}

/// Player 1 marks X, player 2 marks O.
pub fn mark_of(player: PlayerId) -> Cell {
    if player == PlayerId::P1 {
        Cell::X
    } else {
        Cell::O
    }
}

/// A tic-tac-toe board; squares are numbered 0..8 row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Board {
    x_mask: u16,
    o_mask: u16,
}

impl Board {
    pub fn empty() -> Board {
        Board {
            x_mask: 0,
            o_mask: 0,
        }
    }

    /// Builds from explicit X and O square sets; the sets must be disjoint.
    pub fn from_marks(x_squares: &[usize], o_squares: &[usize]) -> Board {
        let mut board = Board::empty();
        for &sq in x_squares {
            board = board.with_mark(sq, Cell::X);
        }
        for &sq in o_squares {
            board = board.with_mark(sq, Cell::O);
        }
        board
    }

    pub(crate) fn from_masks(x_mask: u16, o_mask: u16) -> Board {
        debug_assert_eq!(x_mask & o_mask, 0);
        Board { x_mask, o_mask }
    }

    pub fn cell(&self, square: usize) -> Cell {
        assert!(square < BOARD_CELLS);
        let bit = 1u16 << square;
        if self.x_mask & bit != 0 {
            Cell::X
        } else if self.o_mask & bit != 0 {
            Cell::O
        } else {
            Cell::Empty
        }
    }

    /// Returns a copy with `cell` placed on `square` (which must be empty).
    pub fn with_mark(&self, square: usize, cell: Cell) -> Board {
        assert!(square < BOARD_CELLS);
        assert_eq!(self.cell(square), Cell::Empty, "square {square} occupied");
        let bit = 1u16 << square;
        let mut next = *self;
        match cell {
            Cell::X => next.x_mask |= bit,
            Cell::O => next.o_mask |= bit,
            Cell::Empty => unreachable!(),
        }
        next
    }

    pub fn x_count(&self) -> u32 {
        self.x_mask.count_ones()
    }

    pub fn o_count(&self) -> u32 {
        self.o_mask.count_ones()
    }

    pub fn is_full(&self) -> bool {
        self.x_mask | self.o_mask == FULL_MASK
    }

    pub fn winner(&self) -> Option<Cell> {
        if has_line(self.x_mask) {
            Some(Cell::X)
        } else if has_line(self.o_mask) {
            Some(Cell::O)
        } else {
            None
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.winner().is_some() || self.is_full()
    }

    pub fn empty_squares(&self) -> impl Iterator<Item = usize> + '_ {
        let occupied = self.x_mask | self.o_mask;
        (0..BOARD_CELLS).filter(move |sq| occupied & (1 << sq) == 0)
    }

    /// Base-3 encoding (empty = 0, X = 1, O = 2 per square), the key used
    /// by [`MinimaxTable`].
    pub fn encode(&self) -> usize {
        let mut code = 0;
        for sq in (0..BOARD_CELLS).rev() {
            code = code * 3
                + match self.cell(sq) {
                    Cell::Empty => 0,
                    Cell::X => 1,
                    Cell::O => 2,
                };
        }
        code
    }

    /// Inverse of [`encode`](Self::encode).
    pub fn decode(mut code: usize) -> Board {
        let mut board = Board::empty();
        for sq in 0..BOARD_CELLS {
            match code % 3 {
                1 => board = board.with_mark(sq, Cell::X),
                2 => board = board.with_mark(sq, Cell::O),
                _ => {}
            }
            code /= 3;
        }
        board
    }
}

impl std::fmt::Display for Board {
    /// Three `X|O|.` lines, squares 0..8 row-major.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for row in 0..3 {
            if row > 0 {
                writeln!(f)?;
            }
            for col in 0..3 {
                if col > 0 {
                    write!(f, "|")?;
                }
                let c = match self.cell(row * 3 + col) {
                    Cell::Empty => '.',
                    Cell::X => 'X',
                    Cell::O => 'O',
                };
                write!(f, "{c}")?;
            }
        }
        Ok(())
    }
}

fn has_line(mask: u16) -> bool {
    LINE_MASKS.iter().any(|&line| mask & line == line)
}

/// Returns the square index of the `n`-th set bit of `mask`.
fn nth_set_bit(mut mask: u16, mut n: usize) -> usize {
    loop {
        debug_assert!(mask != 0, "bit index out of range");
        if n == 0 {
            return mask.trailing_zeros() as usize;
        }
        mask &= mask - 1;
        n -= 1;
    }
}

/// What the phantom referee tells a player.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhantomObservation {
    /// Your proposal landed on `square`; your turn is over.
    Accepted(u8),
    /// `square` is occupied by your opponent; propose another square.
    Rejected(u8),
    /// The opponent completed a turn.
    OpponentTurnEnded,
    /// The game is over.
    GameEnd(Outcome),
}

impl PhantomObservation {
    pub fn token(self) -> ObservationToken {
        let code = match self {
            PhantomObservation::Accepted(sq) => sq as u32,
            PhantomObservation::Rejected(sq) => 9 + sq as u32,
            PhantomObservation::OpponentTurnEnded => 18,
            PhantomObservation::GameEnd(Outcome::XWins) => 19,
            PhantomObservation::GameEnd(Outcome::OWins) => 20,
            PhantomObservation::GameEnd(Outcome::Draw) => 21,
        };
        ObservationToken(code)
    }

    pub fn from_token(token: ObservationToken) -> Option<PhantomObservation> {
        match token.0 {
            sq @ 0..=8 => Some(PhantomObservation::Accepted(sq as u8)),
            sq @ 9..=17 => Some(PhantomObservation::Rejected((sq - 9) as u8)),
            18 => Some(PhantomObservation::OpponentTurnEnded),
            19 => Some(PhantomObservation::GameEnd(Outcome::XWins)),
            20 => Some(PhantomObservation::GameEnd(Outcome::OWins)),
            21 => Some(PhantomObservation::GameEnd(Outcome::Draw)),
            _ => None,
        }
    }
}

/// Referee state for one phantom game.
///
/// Each player's candidate set holds the squares it may still propose:
/// everything except its own marks and squares it has been rejected on.
/// Candidates are enumerated in ascending square order, so move index `m`
/// means the `m`-th smallest candidate square.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhantomState {
    x_mask: u16,
    o_mask: u16,
    candidates: [u16; PLAYER_COUNT],
    to_move: PlayerId,
    outcome: Option<Outcome>,
}

impl PhantomState {
    pub fn board(&self) -> Board {
        Board::from_masks(self.x_mask, self.o_mask)
    }

    pub fn to_move(&self) -> PlayerId {
        self.to_move
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.outcome
    }

    /// The squares `player` may still propose, ascending.
    pub fn candidate_squares(&self, player: PlayerId) -> Vec<usize> {
        let mask = self.candidates[player.index()];
        (0..BOARD_CELLS).filter(|sq| mask & (1 << sq) != 0).collect()
    }

    /// Maps a square to the current move index that proposes it, if the
    /// square is still a candidate for `player`.
    pub fn move_index_of_square(&self, player: PlayerId, square: usize) -> Option<usize> {
        assert!(square < BOARD_CELLS);
        let mask = self.candidates[player.index()];
        let bit = 1u16 << square;
        if mask & bit == 0 {
            return None;
        }
        Some((mask & (bit - 1)).count_ones() as usize)
    }
}

/// The phantom tic-tac-toe referee.
#[derive(Debug, Clone, Copy, Default)]
pub struct PhantomTicTacToe;

impl Game for PhantomTicTacToe {
    type State = PhantomState;

    fn initial_state(&self) -> PhantomState {
        PhantomState {
            x_mask: 0,
            o_mask: 0,
            candidates: [FULL_MASK; PLAYER_COUNT],
            to_move: PlayerId::P1,
            outcome: None,
        }
    }

    fn max_steps(&self) -> usize {
        // At most 9 accepted placements plus 4 rejections per player.
        17
    }

    fn is_terminal(&self, state: &PhantomState) -> bool {
        state.outcome.is_some()
    }

    fn active_player(&self, state: &PhantomState) -> PlayerId {
        state.to_move
    }

    fn move_count(&self, state: &PhantomState) -> usize {
        state.candidates[state.to_move.index()].count_ones() as usize
    }

    fn step(&self, state: &mut PhantomState, mv: usize, out: &mut StepObservations) -> bool {
        out.clear();
        debug_assert!(state.outcome.is_none(), "step on a finished game");
        let mover = state.to_move;
        let opponent = mover.opponent();
        let candidates = state.candidates[mover.index()];
        debug_assert!(mv < candidates.count_ones() as usize, "move out of range");
        let square = nth_set_bit(candidates, mv);
        let bit = 1u16 << square;

        let (own_mask, opp_mask) = if mover == PlayerId::P1 {
            (&mut state.x_mask, state.o_mask)
        } else {
            (&mut state.o_mask, state.x_mask)
        };

        if opp_mask & bit != 0 {
            // Occupied by the opponent: the proposal bounces, only the
            // mover learns why, and the same player proposes again.
            state.candidates[mover.index()] &= !bit;
            out.push(mover, PhantomObservation::Rejected(square as u8).token());
            return false;
        }

        *own_mask |= bit;
        state.candidates[mover.index()] &= !bit;
        out.push(mover, PhantomObservation::Accepted(square as u8).token());
        out.push(opponent, PhantomObservation::OpponentTurnEnded.token());

        let outcome = if has_line(*own_mask) {
            Some(if mover == PlayerId::P1 {
                Outcome::XWins
            } else {
                Outcome::OWins
            })
        } else if state.x_mask | state.o_mask == FULL_MASK {
            Some(Outcome::Draw)
        } else {
            None
        };

        match outcome {
            Some(result) => {
                state.outcome = Some(result);
                let end = PhantomObservation::GameEnd(result).token();
                out.push(mover, end);
                out.push(opponent, end);
                true
            }
            None => {
                state.to_move = opponent;
                false
            }
        }
    }

    fn rewards(&self, state: &PhantomState) -> [f64; PLAYER_COUNT] {
        match state.outcome {
            Some(outcome) => outcome.rewards(),
            None => [0.0, 0.0],
        }
    }
}

/// Full-information tic-tac-toe behind the same referee interface.
///
/// Both players observe every placement; move indices enumerate the empty
/// squares in ascending order. Token alphabet: `square` for the mover's own
/// accepted placement, `9 + square` for an opponent placement, `18 + outcome`
/// for the end of the game.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClassicTicTacToe;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicState {
    board: Board,
    to_move: PlayerId,
    outcome: Option<Outcome>,
}

impl ClassicState {
    pub fn board(&self) -> Board {
        self.board
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.outcome
    }
}

impl Game for ClassicTicTacToe {
    type State = ClassicState;

    fn initial_state(&self) -> ClassicState {
        ClassicState {
            board: Board::empty(),
            to_move: PlayerId::P1,
            outcome: None,
        }
    }

    fn max_steps(&self) -> usize {
        BOARD_CELLS
    }

    fn is_terminal(&self, state: &ClassicState) -> bool {
        state.outcome.is_some()
    }

    fn active_player(&self, state: &ClassicState) -> PlayerId {
        state.to_move
    }

    fn move_count(&self, state: &ClassicState) -> usize {
        state.board.empty_squares().count()
    }

    fn step(&self, state: &mut ClassicState, mv: usize, out: &mut StepObservations) -> bool {
        out.clear();
        debug_assert!(state.outcome.is_none());
        let mover = state.to_move;
        let square = state
            .board
            .empty_squares()
            .nth(mv)
            .expect("move out of range");
        state.board = state.board.with_mark(square, mark_of(mover));
        out.push(mover, ObservationToken(square as u32));
        out.push(mover.opponent(), ObservationToken(9 + square as u32));

        let outcome = match state.board.winner() {
            Some(Cell::X) => Some(Outcome::XWins),
            Some(Cell::O) => Some(Outcome::OWins),
            _ if state.board.is_full() => Some(Outcome::Draw),
            _ => None,
        };
        match outcome {
            Some(result) => {
                state.outcome = Some(result);
                let end = ObservationToken(
                    18 + match result {
                        Outcome::XWins => 0,
                        Outcome::OWins => 1,
                        Outcome::Draw => 2,
                    },
                );
                out.push(mover, end);
                out.push(mover.opponent(), end);
                true
            }
            None => {
                state.to_move = mover.opponent();
                false
            }
        }
    }

    fn rewards(&self, state: &ClassicState) -> [f64; PLAYER_COUNT] {
        match state.outcome {
            Some(outcome) => outcome.rewards(),
            None => [0.0, 0.0],
        }
    }
}

const UNREACHED: i8 = i8::MIN;

/// Exact minimax solution of classic tic-tac-toe, memoized over the base-3
/// encoding of every board reachable through legal play.
///
/// Values are from X's perspective: `+1` X wins, `0` draw, `-1` O wins
/// under optimal play by both sides. Built once; reads are lock-free and
/// safe to share across threads.
pub struct MinimaxTable {
    values: Vec<i8>,
}

impl MinimaxTable {
    pub fn new() -> MinimaxTable {
        let mut table = MinimaxTable {
            values: vec![UNREACHED; 3usize.pow(BOARD_CELLS as u32)],
        };
        table.solve(Board::empty());
        table
    }

    fn solve(&mut self, board: Board) -> i8 {
        let code = board.encode();
        if self.values[code] != UNREACHED {
            return self.values[code];
        }
        let value = match board.winner() {
            Some(Cell::X) => 1,
            Some(Cell::O) => -1,
            Some(Cell::Empty) => unreachable!(),
            None if board.is_full() => 0,
            None => {
                let x_to_move = board.x_count() == board.o_count();
                let mark = if x_to_move { Cell::X } else { Cell::O };
                let mut best = if x_to_move { -2 } else { 2 };
                for sq in 0..BOARD_CELLS {
                    if board.cell(sq) == Cell::Empty {
                        let child = self.solve(board.with_mark(sq, mark));
                        if x_to_move {
                            best = best.max(child);
                        } else {
                            best = best.min(child);
                        }
                    }
                }
                best
            }
        };
        self.values[code] = value;
        value
    }

    /// Number of boards reachable through legal play (5478).
    pub fn reachable_count(&self) -> usize {
        self.values.iter().filter(|&&v| v != UNREACHED).count()
    }

    fn checked_lookup(&self, board: &Board, mover: PlayerId) -> Result<i8, PhantomError> {
        let implied_mover = if board.x_count() == board.o_count() {
            PlayerId::P1
        } else {
            PlayerId::P2
        };
        if mover != implied_mover {
            return Err(PhantomError::UnreachableBoard);
        }
        match self.values[board.encode()] {
            UNREACHED => Err(PhantomError::UnreachableBoard),
            v => Ok(v),
        }
    }

    /// Game-theoretic value of `board` with `mover` to play, from X's
    /// perspective.
    pub fn value(&self, board: &Board, mover: PlayerId) -> Result<i8, PhantomError> {
        self.checked_lookup(board, mover)
    }

    /// All empty squares whose resulting position is worth the mover's best
    /// achievable value, in ascending order.
    pub fn optimal_moves(&self, board: &Board, mover: PlayerId) -> Result<Vec<usize>, PhantomError> {
        self.checked_lookup(board, mover)?;
        if board.is_terminal() {
            return Err(PhantomError::TerminalBoard);
        }
        let mark = mark_of(mover);
        let maximizing = mover == PlayerId::P1;
        let mut best = if maximizing { -2i8 } else { 2i8 };
        let mut moves = Vec::new();
        for sq in board.empty_squares() {
            let child = self.values[board.with_mark(sq, mark).encode()];
            debug_assert_ne!(child, UNREACHED);
            let better = if maximizing { child > best } else { child < best };
            if better {
                best = child;
                moves.clear();
            }
            if child == best {
                moves.push(sq);
            }
        }
        Ok(moves)
    }
}

impl Default for MinimaxTable {
    fn default() -> Self {
        MinimaxTable::new()
    }
}
