//! The EXP3 adversarial bandit and a zero-sum matrix-game self-play driver.
//!
//! EXP3 keeps one cumulative reward estimate per arm. Each realized reward
//! is divided by the probability with which its arm was drawn, which makes
//! the estimate unbiased no matter how the rewards were generated. Arms are
//! then drawn from an exponentially weighted mixture with a uniform floor:
//!
//! ```text
//! p_i = (1 - gamma) * exp(eta * G_i) / sum_j exp(eta * G_j) + gamma / k
//! ```
//!
//! When two EXP3 players repeatedly play a zero-sum matrix game against
//! each other, each observing only its own realized payoff, the empirical
//! frequencies of their choices converge to a Nash equilibrium of the game.
//! [`self_play_matrix`] runs exactly that loop.

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum Exp3Error {
    #[error("arm count must be at least 1")]
    NoArms,
    #[error("exploration rate {0} outside [0, 1]")]
    InvalidExploration(f64),
    #[error("learning rate {0} outside (0, 1/k] for k = {1}")]
    InvalidLearningRate(f64, usize),
    #[error("arm index {index} out of range for {arms} arms")]
    ArmOutOfRange { index: usize, arms: usize },
    #[error("sampling probability {0} must be in (0, 1]")]
    InvalidProbability(f64),
    #[error("cumulative reward estimate became non-finite")]
    NonFiniteReward,
    #[error("round count must be at least 1")]
    ZeroRounds,
    #[error("payoff matrix must be rectangular and non-empty with finite entries")]
    InvalidMatrix,
}

/// Computes `(1 - gamma) * softmax(log_scores) + gamma / k` into `out`.
///
/// The softmax subtracts the maximum log-score before exponentiating, so
/// any finite scores are safe from overflow. Shared by [`Exp3State`] and
/// the tree-search selection rule, which differ only in how the log-scores
/// are produced.
pub(crate) fn mixture_into(log_scores: &[f64], gamma: f64, out: &mut Vec<f64>) {
    debug_assert!(!log_scores.is_empty());
    let k = log_scores.len();
    out.clear();
    let max = log_scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for &s in log_scores {
        let w = (s - max).exp();
        sum += w;
        out.push(w);
    }
    let floor = gamma / k as f64;
    for p in out.iter_mut() {
        *p = (1.0 - gamma) * (*p / sum) + floor;
    }
}

/// Draws an index from a probability vector by cumulative inversion.
///
/// Ties and rounding residue resolve toward the last index, so the result
/// is a deterministic function of the RNG stream and the vector.
pub(crate) fn sample_index(probs: &[f64], rng: &mut (impl Rng + ?Sized)) -> usize {
    debug_assert!(!probs.is_empty());
    let r: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if r < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Per-decision EXP3 state: cumulative importance-weighted reward estimates
/// plus the current exploration rate `gamma` and learning rate `eta`.
///
/// The estimates are stored directly; exponentiation happens only inside
/// the max-subtracted softmax of [`distribution`](Self::distribution), so
/// the state never overflows no matter how large the estimates grow.
#[derive(Debug, Clone, PartialEq)]
pub struct Exp3State {
    cum_reward: Vec<f64>,
    exploration: f64,
    learning_rate: f64,
}

impl Exp3State {
    /// Creates a `k`-armed state with all reward estimates at zero.
    ///
    /// Requires `gamma` in `[0, 1]` and `eta` in `(0, 1/k]`.
    pub fn new(arm_count: usize, exploration: f64, learning_rate: f64) -> Result<Self, Exp3Error> {
        if arm_count == 0 {
            return Err(Exp3Error::NoArms);
        }
        let mut state = Exp3State {
            cum_reward: vec![0.0; arm_count],
            exploration: 0.0,
            learning_rate: 1.0 / arm_count as f64,
        };
        state.set_rates(exploration, learning_rate)?;
        Ok(state)
    }

    pub fn arm_count(&self) -> usize {
        self.cum_reward.len()
    }

    /// The cumulative reward estimates, one per arm.
    pub fn cumulative_rewards(&self) -> &[f64] {
        &self.cum_reward
    }

    pub fn exploration(&self) -> f64 {
        self.exploration
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    /// Replaces `gamma` and `eta`, validating the same bounds as [`new`](Self::new).
    pub fn set_rates(&mut self, exploration: f64, learning_rate: f64) -> Result<(), Exp3Error> {
        if !(0.0..=1.0).contains(&exploration) {
            return Err(Exp3Error::InvalidExploration(exploration));
        }
        let cap = 1.0 / self.arm_count() as f64;
        if !(learning_rate > 0.0 && learning_rate <= cap) {
            return Err(Exp3Error::InvalidLearningRate(
                learning_rate,
                self.arm_count(),
            ));
        }
        self.exploration = exploration;
        self.learning_rate = learning_rate;
        Ok(())
    }

    /// The current arm distribution
    /// `(1 - gamma) * softmax(eta * G) + gamma / k`.
    ///
    /// Sums to one within 1e-12 and is bounded below by `gamma / k`.
    pub fn distribution(&self) -> Vec<f64> {
        let scores: Vec<f64> = self
            .cum_reward
            .iter()
            .map(|g| self.learning_rate * g)
            .collect();
        let mut out = Vec::with_capacity(scores.len());
        mixture_into(&scores, self.exploration, &mut out);
        out
    }

    /// Draws an arm from [`distribution`](Self::distribution).
    pub fn sample(&self, rng: &mut impl Rng) -> usize {
        sample_index(&self.distribution(), rng)
    }

    /// Draws an arm and also returns the exact probability it was drawn
    /// with, as needed for the importance-weighted update.
    pub fn sample_with_prob(&self, rng: &mut impl Rng) -> (usize, f64) {
        let probs = self.distribution();
        let arm = sample_index(&probs, rng);
        (arm, probs[arm])
    }

    /// Adds `reward / prob` to the chosen arm's estimate, where `prob` is
    /// the probability the arm was drawn with.
    pub fn update(&mut self, arm: usize, reward: f64, prob: f64) -> Result<(), Exp3Error> {
        if arm >= self.arm_count() {
            return Err(Exp3Error::ArmOutOfRange {
                index: arm,
                arms: self.arm_count(),
            });
        }
        if !(prob > 0.0 && prob <= 1.0) {
            return Err(Exp3Error::InvalidProbability(prob));
        }
        let next = self.cum_reward[arm] + reward / prob;
        if !next.is_finite() {
            return Err(Exp3Error::NonFiniteReward);
        }
        self.cum_reward[arm] = next;
        Ok(())
    }
}

/// A zero-sum matrix game: entry `(i, j)` is the row player's payoff when
/// the row player picks `i` and the column player picks `j`; the column
/// player earns the negation.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixGame {
    rows: usize,
    cols: usize,
    payoff: Vec<f64>,
}

impl MatrixGame {
    /// Builds a game from payoff rows. All rows must have the same nonzero
    /// length and every entry must be finite.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, Exp3Error> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if m == 0 || n == 0 {
            return Err(Exp3Error::InvalidMatrix);
        }
        let mut payoff = Vec::with_capacity(m * n);
        for row in &rows {
            if row.len() != n || row.iter().any(|x| !x.is_finite()) {
                return Err(Exp3Error::InvalidMatrix);
            }
            payoff.extend_from_slice(row);
        }
        Ok(MatrixGame {
            rows: m,
            cols: n,
            payoff,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn payoff(&self, i: usize, j: usize) -> f64 {
        self.payoff[i * self.cols + j]
    }

    /// The canonical 2x2 matching-pennies game.
    pub fn matching_pennies() -> Self {
        MatrixGame::new(vec![vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap()
    }

    /// Rock-paper-scissors with payoffs in `{-1, 0, 1}`.
    pub fn rock_paper_scissors() -> Self {
        MatrixGame::new(vec![
            vec![0.0, -1.0, 1.0],
            vec![1.0, 0.0, -1.0],
            vec![-1.0, 1.0, 0.0],
        ])
        .unwrap()
    }
}

/// Default exploration schedule `gamma(t) = t^-0.3`.
pub fn default_gamma(t: u64) -> f64 {
    (t as f64).powf(-0.3)
}

/// Default learning-rate schedule `eta(t) = min(1/k, t^-0.5)` for a
/// `k`-armed player.
pub fn default_eta(arm_count: usize) -> impl Fn(u64) -> f64 {
    let cap = 1.0 / arm_count as f64;
    move |t: u64| cap.min((t as f64).powf(-0.5))
}

/// Result of a matrix-game self-play run: each player's empirical choice
/// frequencies and the running mean of the row player's payoff.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfPlayReport {
    pub rounds: u64,
    pub row_frequencies: Vec<f64>,
    pub col_frequencies: Vec<f64>,
    pub average_payoff: f64,
}

/// Runs `rounds` of EXP3-vs-EXP3 self-play on `game`.
///
/// Both players re-read their schedules every round and observe only their
/// own realized payoff. With schedules decreasing to zero, the
/// exploitability of the returned frequency pair shrinks as `rounds` grows.
pub fn self_play_matrix(
    game: &MatrixGame,
    rounds: u64,
    gamma: impl Fn(u64) -> f64,
    eta: impl Fn(u64) -> f64,
    rng: &mut impl Rng,
) -> Result<SelfPlayReport, Exp3Error> {
    self_play_matrix_traced(game, rounds, gamma, eta, rng, 0, |_| {})
}

/// As [`self_play_matrix`], additionally invoking `observer` with the
/// running report every `stride` rounds (`stride == 0` disables tracing).
pub fn self_play_matrix_traced(
    game: &MatrixGame,
    rounds: u64,
    gamma: impl Fn(u64) -> f64,
    eta: impl Fn(u64) -> f64,
    rng: &mut impl Rng,
    stride: u64,
    mut observer: impl FnMut(&SelfPlayReport),
) -> Result<SelfPlayReport, Exp3Error> {
    if rounds == 0 {
        return Err(Exp3Error::ZeroRounds);
    }
    let mut row = Exp3State::new(game.rows(), 1.0, 1.0 / game.rows() as f64)?;
    let mut col = Exp3State::new(game.cols(), 1.0, 1.0 / game.cols() as f64)?;
    let mut row_counts = vec![0u64; game.rows()];
    let mut col_counts = vec![0u64; game.cols()];
    let mut payoff_sum = 0.0;

    for t in 1..=rounds {
        let g = gamma(t);
        row.set_rates(g, eta(t).min(1.0 / game.rows() as f64))?;
        col.set_rates(g, eta(t).min(1.0 / game.cols() as f64))?;

        let (i, p_i) = row.sample_with_prob(rng);
        let (j, p_j) = col.sample_with_prob(rng);
        let r = game.payoff(i, j);
        row.update(i, r, p_i)?;
        col.update(j, -r, p_j)?;
        row_counts[i] += 1;
        col_counts[j] += 1;
        payoff_sum += r;

        if stride > 0 && t % stride == 0 {
            observer(&report(t, &row_counts, &col_counts, payoff_sum));
        }
    }
    Ok(report(rounds, &row_counts, &col_counts, payoff_sum))
}

fn report(t: u64, row_counts: &[u64], col_counts: &[u64], payoff_sum: f64) -> SelfPlayReport {
    let freq = |counts: &[u64]| counts.iter().map(|&c| c as f64 / t as f64).collect();
    SelfPlayReport {
        rounds: t,
        row_frequencies: freq(row_counts),
        col_frequencies: freq(col_counts),
        average_payoff: payoff_sum / t as f64,
    }
}

/// The larger of the two players' best-response gains against the mixed
/// strategy pair `(row_mix, col_mix)`: zero exactly at a Nash equilibrium.
pub fn exploitability(game: &MatrixGame, row_mix: &[f64], col_mix: &[f64]) -> f64 {
    assert_eq!(row_mix.len(), game.rows());
    assert_eq!(col_mix.len(), game.cols());
    let mut value = 0.0;
    for i in 0..game.rows() {
        for j in 0..game.cols() {
            value += row_mix[i] * col_mix[j] * game.payoff(i, j);
        }
    }
    // Row deviates to the best pure row; column to the best pure column.
    let best_row = (0..game.rows())
        .map(|i| {
            (0..game.cols())
                .map(|j| col_mix[j] * game.payoff(i, j))
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let best_col = (0..game.cols())
        .map(|j| {
            (0..game.rows())
                .map(|i| row_mix[i] * game.payoff(i, j))
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min);
    (best_row - value).max(value - best_col)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Solves a 2x2 zero-sum game [[a, b], [c, d]] with a unique fully
    /// mixed equilibrium by the indifference equations. Independent of the
    /// EXP3 implementation; used as the oracle for self-play convergence.
    fn solve_2x2(a: f64, b: f64, c: f64, d: f64) -> ((f64, f64), (f64, f64), f64) {
        let denom = a - b - c + d;
        assert!(denom.abs() > 1e-9, "degenerate game");
        let x0 = (d - c) / denom;
        let y0 = (d - b) / denom;
        let v = (a * d - b * c) / denom;
        assert!((0.0..=1.0).contains(&x0) && (0.0..=1.0).contains(&y0));
        ((x0, 1.0 - x0), (y0, 1.0 - y0), v)
    }

    #[test]
    fn oracle_agrees_with_hand_solution() {
        // [[2, -1], [-1, 1]]: row mixes (0.4, 0.6), value 0.2.
        let ((x0, x1), (y0, y1), v) = solve_2x2(2.0, -1.0, -1.0, 1.0);
        assert!((x0 - 0.4).abs() < 1e-12);
        assert!((x1 - 0.6).abs() < 1e-12);
        assert!((y0 - 0.4).abs() < 1e-12);
        assert!((y1 - 0.6).abs() < 1e-12);
        assert!((v - 0.2).abs() < 1e-12);
    }

    #[test]
    fn distribution_is_uniform_for_equal_rewards() {
        let state = Exp3State::new(3, 0.1, 0.1).unwrap();
        for p in state.distribution() {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn distribution_matches_softmax_without_exploration() {
        // eta * G = (0, ln 3) with gamma = 0 gives softmax (0.25, 0.75).
        let mut state = Exp3State::new(2, 0.0, 0.5).unwrap();
        state.update(1, 3f64.ln(), 0.5).unwrap(); // G_1 = 2 ln 3
        let p = state.distribution();
        assert!((p[0] - 0.25).abs() < 1e-12);
        assert!((p[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn distribution_mixes_uniform_floor() {
        // eta * G = (0, ln 3) again, gamma = 0.5: 0.5*(0.25, 0.75) + 0.25.
        let mut state = Exp3State::new(2, 0.5, 0.5).unwrap();
        state.update(1, 3f64.ln(), 0.5).unwrap();
        let p = state.distribution();
        assert!((p[0] - 0.375).abs() < 1e-12);
        assert!((p[1] - 0.625).abs() < 1e-12);
    }

    #[test]
    fn distribution_survives_huge_rewards() {
        let mut state = Exp3State::new(2, 0.0, 0.5).unwrap();
        state.update(0, 1.0e6, 1.0e-3).unwrap();
        let p = state.distribution();
        assert!(p.iter().all(|x| x.is_finite()));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p[0] > 0.999);
    }

    #[test]
    fn construction_rejects_bad_parameters() {
        assert_eq!(Exp3State::new(0, 0.1, 0.1).unwrap_err(), Exp3Error::NoArms);
        assert!(matches!(
            Exp3State::new(2, -0.1, 0.1),
            Err(Exp3Error::InvalidExploration(_))
        ));
        assert!(matches!(
            Exp3State::new(2, 1.1, 0.1),
            Err(Exp3Error::InvalidExploration(_))
        ));
        assert!(matches!(
            Exp3State::new(2, 0.1, 0.0),
            Err(Exp3Error::InvalidLearningRate(..))
        ));
        assert!(matches!(
            Exp3State::new(2, 0.1, 0.6),
            Err(Exp3Error::InvalidLearningRate(..))
        ));
    }

    #[test]
    fn sample_single_arm_is_zero() {
        let state = Exp3State::new(1, 0.3, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            assert_eq!(state.sample(&mut rng), 0);
        }
    }

    #[test]
    fn sample_frequencies_match_distribution() {
        let draws = 1_000_000;
        let mut rng = ChaCha8Rng::seed_from_u64(11);

        let uniform = Exp3State::new(2, 0.0, 0.5).unwrap();
        let zeros = (0..draws).filter(|_| uniform.sample(&mut rng) == 0).count();
        assert!((zeros as f64 / draws as f64 - 0.5).abs() < 0.002);

        let mut skewed = Exp3State::new(2, 0.0, 0.5).unwrap();
        skewed.update(1, 3f64.ln(), 0.5).unwrap();
        let ones = (0..draws).filter(|_| skewed.sample(&mut rng) == 1).count();
        assert!((ones as f64 / draws as f64 - 0.75).abs() < 0.002);
    }

    #[test]
    fn update_adds_importance_weighted_reward() {
        let mut state = Exp3State::new(2, 0.1, 0.1).unwrap();
        state.update(1, 1.0, 0.5).unwrap();
        assert_eq!(state.cumulative_rewards(), &[0.0, 2.0]);

        state.update(0, 0.0, 0.7).unwrap();
        assert_eq!(state.cumulative_rewards(), &[0.0, 2.0]);

        let mut state = Exp3State::new(2, 0.1, 0.1).unwrap();
        state.update(0, 5.0, 1.0).unwrap();
        state.update(0, -1.0, 0.25).unwrap();
        assert_eq!(state.cumulative_rewards(), &[1.0, 0.0]);
    }

    #[test]
    fn update_rejects_bad_inputs() {
        let mut state = Exp3State::new(2, 0.1, 0.1).unwrap();
        assert!(matches!(
            state.update(0, 1.0, 0.0),
            Err(Exp3Error::InvalidProbability(_))
        ));
        assert!(matches!(
            state.update(0, 1.0, -0.5),
            Err(Exp3Error::InvalidProbability(_))
        ));
        assert!(matches!(
            state.update(5, 1.0, 0.5),
            Err(Exp3Error::ArmOutOfRange { .. })
        ));
        assert!(matches!(
            state.update(0, f64::INFINITY, 0.5),
            Err(Exp3Error::NonFiniteReward)
        ));
    }

    #[test]
    fn self_play_rejects_zero_rounds() {
        let game = MatrixGame::matching_pennies();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let err = self_play_matrix(&game, 0, default_gamma, default_eta(2), &mut rng);
        assert_eq!(err.unwrap_err(), Exp3Error::ZeroRounds);
    }

    #[test]
    fn self_play_matching_pennies_converges_to_uniform() {
        let game = MatrixGame::matching_pennies();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let report =
            self_play_matrix(&game, 1_000_000, default_gamma, default_eta(2), &mut rng).unwrap();
        for f in report
            .row_frequencies
            .iter()
            .chain(report.col_frequencies.iter())
        {
            assert!((f - 0.5).abs() < 0.05, "frequency {f} not near 0.5");
        }
        assert!(report.average_payoff.abs() < 0.05);
    }

    #[test]
    fn self_play_rock_paper_scissors_converges_to_uniform() {
        let game = MatrixGame::rock_paper_scissors();
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let report =
            self_play_matrix(&game, 1_000_000, default_gamma, default_eta(3), &mut rng).unwrap();
        for f in report
            .row_frequencies
            .iter()
            .chain(report.col_frequencies.iter())
        {
            assert!((f - 1.0 / 3.0).abs() < 0.05, "frequency {f} not near 1/3");
        }
    }

    #[test]
    fn self_play_matches_analytic_2x2_solution() {
        let game = MatrixGame::new(vec![vec![2.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        let ((x0, x1), (y0, y1), v) = solve_2x2(2.0, -1.0, -1.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let report =
            self_play_matrix(&game, 1_000_000, default_gamma, default_eta(2), &mut rng).unwrap();
        assert!((report.row_frequencies[0] - x0).abs() < 0.05);
        assert!((report.row_frequencies[1] - x1).abs() < 0.05);
        assert!((report.col_frequencies[0] - y0).abs() < 0.05);
        assert!((report.col_frequencies[1] - y1).abs() < 0.05);
        assert!((report.average_payoff - v).abs() < 0.05);
    }

    #[test]
    fn self_play_empirical_pair_has_low_exploitability() {
        // A few 2x2 games with unique mixed equilibria, checked against the
        // analytic solution through the exploitability gap.
        let cases = [
            [1.0, -1.0, -1.0, 1.0],
            [2.0, -1.0, -1.0, 1.0],
            [3.0, -2.0, -1.0, 2.0],
            [0.5, -0.25, -1.0, 0.75],
        ];
        for (n, [a, b, c, d]) in cases.into_iter().enumerate() {
            let game = MatrixGame::new(vec![vec![a, b], vec![c, d]]).unwrap();
            let _ = solve_2x2(a, b, c, d); // asserts the mixed equilibrium exists
            let mut rng = ChaCha8Rng::seed_from_u64(100 + n as u64);
            let report =
                self_play_matrix(&game, 1_000_000, default_gamma, default_eta(2), &mut rng)
                    .unwrap();
            let gap = exploitability(&game, &report.row_frequencies, &report.col_frequencies);
            assert!(gap < 0.05, "game {n}: exploitability {gap}");
        }
    }

    #[test]
    fn self_play_trace_reports_at_stride() {
        let game = MatrixGame::matching_pennies();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut seen = Vec::new();
        let report = self_play_matrix_traced(
            &game,
            1000,
            default_gamma,
            default_eta(2),
            &mut rng,
            250,
            |r| seen.push(r.rounds),
        )
        .unwrap();
        assert_eq!(seen, vec![250, 500, 750, 1000]);
        assert_eq!(report.rounds, 1000);
    }

    proptest! {
        #[test]
        fn distribution_is_normalized_with_floor(
            rewards in proptest::collection::vec(-1000.0f64..1000.0, 1..10),
            gamma in 0.0f64..=1.0,
        ) {
            let k = rewards.len();
            let mut state = Exp3State::new(k, gamma, 1.0 / k as f64).unwrap();
            for (arm, r) in rewards.iter().enumerate() {
                state.update(arm, *r, 1.0).unwrap();
            }
            let p = state.distribution();
            let sum: f64 = p.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            for x in &p {
                prop_assert!(*x >= gamma / k as f64 - 1e-12);
            }
        }

        #[test]
        fn distribution_is_shift_invariant(
            rewards in proptest::collection::vec(-100.0f64..100.0, 1..8),
            shift in -100.0f64..100.0,
            gamma in 0.0f64..=1.0,
        ) {
            let k = rewards.len();
            let eta = 1.0 / k as f64;
            let mut a = Exp3State::new(k, gamma, eta).unwrap();
            let mut b = Exp3State::new(k, gamma, eta).unwrap();
            for (arm, r) in rewards.iter().enumerate() {
                a.update(arm, *r, 1.0).unwrap();
                b.update(arm, *r + shift, 1.0).unwrap();
            }
            let pa = a.distribution();
            let pb = b.distribution();
            for (x, y) in pa.iter().zip(pb.iter()) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }

        #[test]
        fn update_step_is_bounded_by_k_over_gamma(
            k in 1usize..10,
            gamma in 0.01f64..=1.0,
            reward in -1.0f64..=1.0,
        ) {
            let mut state = Exp3State::new(k, gamma, 1.0 / k as f64).unwrap();
            let floor = gamma / k as f64;
            let before = state.cumulative_rewards()[0];
            state.update(0, reward, floor).unwrap();
            let delta = (state.cumulative_rewards()[0] - before).abs();
            prop_assert!(delta <= k as f64 / gamma + 1e-9);
        }
    }
}
