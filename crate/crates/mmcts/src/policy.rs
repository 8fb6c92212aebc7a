//! Frozen policies and the on-disk tree format.
//!
//! A trained [`PlayerTree`] can be written to a compact little-endian
//! binary file and reloaded anywhere a policy is needed. Freezing does not
//! copy the tree: a [`FrozenPolicy`] wraps it read-only behind an [`Arc`]
//! and turns per-node weights into a move distribution on demand, either
//! from the exponential weights themselves or from visit counts.
//!
//! File layout (all integers little-endian):
//!
//! ```text
//! magic "MMCT" | version u16 | owner u8 | simulations u64 | node count u64
//! then per node, in id order (parents before children):
//!   node id u64 | parent id u64 (root: u64::MAX) | incoming edge token u32
//!   | k u16 | k * (log-weight f64, visit count u64)
//! ```

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::bandit::{mixture_into, sample_index};
use crate::game::{ObservationToken, PlayerId};
use crate::search::{NodeId, PlayerTree, ROOT};

pub const MAGIC: [u8; 4] = *b"MMCT";
pub const FORMAT_VERSION: u16 = 1;

const ROOT_PARENT_SENTINEL: u64 = u64::MAX;
const ROOT_EDGE_SENTINEL: u32 = u32::MAX;

#[derive(Debug, Error)]
pub enum PolicyFileError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a policy file (bad magic)")]
    BadMagic,
    #[error("unsupported policy format version {0}")]
    UnsupportedVersion(u16),
    #[error("corrupt policy file: {0}")]
    Corrupt(&'static str),
}

/// Writes `tree` in the binary format above.
pub fn write_tree(tree: &PlayerTree, writer: &mut impl Write) -> io::Result<()> {
    writer.write_all(&MAGIC)?;
    writer.write_all(&FORMAT_VERSION.to_le_bytes())?;
    writer.write_all(&[tree.owner().index() as u8])?;
    writer.write_all(&tree.simulations_done().to_le_bytes())?;
    writer.write_all(&(tree.node_count() as u64).to_le_bytes())?;

    for id in 0..tree.node_count() as NodeId {
        writer.write_all(&(id as u64).to_le_bytes())?;
        let parent = tree
            .node_parent(id)
            .map_or(ROOT_PARENT_SENTINEL, |p| p as u64);
        writer.write_all(&parent.to_le_bytes())?;
        let edge = tree.node_edge(id).map_or(ROOT_EDGE_SENTINEL, |e| e.0);
        writer.write_all(&edge.to_le_bytes())?;
        let (weights, visits) = tree.node_arms(id);
        writer.write_all(&(weights.len() as u16).to_le_bytes())?;
        for (w, v) in weights.iter().zip(visits.iter()) {
            writer.write_all(&w.to_le_bytes())?;
            writer.write_all(&(*v as u64).to_le_bytes())?;
        }
    }
    Ok(())
}

/// Serializes `tree` to a byte vector; handy for snapshot comparisons.
pub fn tree_to_bytes(tree: &PlayerTree) -> Vec<u8> {
    let mut buf = Vec::new();
    write_tree(tree, &mut buf).expect("writing to memory cannot fail");
    buf
}

/// Writes `tree` to `path` (atomically enough for our purposes: create or
/// truncate, then stream).
pub fn save_tree(tree: &PlayerTree, path: &Path) -> io::Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    write_tree(tree, &mut writer)?;
    writer.flush()
}

struct Parser<R> {
    reader: R,
}

impl<R: Read> Parser<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N], PolicyFileError> {
        let mut buf = [0u8; N];
        self.reader.read_exact(&mut buf)?;
        Ok(buf)
    }

    fn u16(&mut self) -> Result<u16, PolicyFileError> {
        Ok(u16::from_le_bytes(self.bytes()?))
    }

    fn u32(&mut self) -> Result<u32, PolicyFileError> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn u64(&mut self) -> Result<u64, PolicyFileError> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn f64(&mut self) -> Result<f64, PolicyFileError> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
}

/// Reads a tree written by [`write_tree`].
pub fn read_tree(reader: &mut impl Read) -> Result<PlayerTree, PolicyFileError> {
    let mut p = Parser { reader };
    if p.bytes::<4>()? != MAGIC {
        return Err(PolicyFileError::BadMagic);
    }
    let version = p.u16()?;
    if version != FORMAT_VERSION {
        return Err(PolicyFileError::UnsupportedVersion(version));
    }
    let owner = p.bytes::<1>()?[0];
    if owner as usize >= crate::game::PLAYER_COUNT {
        return Err(PolicyFileError::Corrupt("owner out of range"));
    }
    let simulations = p.u64()?;
    let node_count = p.u64()?;
    if node_count == 0 || node_count > u32::MAX as u64 {
        return Err(PolicyFileError::Corrupt("node count out of range"));
    }

    let mut tree = PlayerTree::new(PlayerId::new(owner as usize));
    let mut weights = Vec::new();
    let mut visits = Vec::new();
    for expected in 0..node_count {
        let id = p.u64()?;
        if id != expected {
            return Err(PolicyFileError::Corrupt("node ids must be sequential"));
        }
        let parent = p.u64()?;
        let edge = p.u32()?;
        let k = p.u16()? as usize;
        weights.clear();
        visits.clear();
        for _ in 0..k {
            weights.push(p.f64()?);
            let v = p.u64()?;
            if v > u32::MAX as u64 {
                return Err(PolicyFileError::Corrupt("visit count out of range"));
            }
            visits.push(v as u32);
        }

        if expected == 0 {
            if parent != ROOT_PARENT_SENTINEL {
                return Err(PolicyFileError::Corrupt("first node must be the root"));
            }
        } else {
            if parent >= expected {
                return Err(PolicyFileError::Corrupt("parent must precede child"));
            }
            let node = tree.add_child(parent as NodeId, ObservationToken(edge), 0);
            debug_assert_eq!(node as u64, expected);
        }
        if k > 0 {
            tree.restore_arms(expected as NodeId, &weights, &visits);
        }
    }
    tree.set_simulations(simulations);
    Ok(tree)
}

/// Loads a tree from `path`.
pub fn load_tree(path: &Path) -> Result<PlayerTree, PolicyFileError> {
    read_tree(&mut BufReader::new(File::open(path)?))
}

/// How a trained tree turns into a playable distribution per node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreezeMode {
    /// Normalize the exponential move weights (no exploration term).
    Weights,
    /// Normalize the per-move visit counts.
    Empirical,
}

impl FromStr for FreezeMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "weights" => Ok(FreezeMode::Weights),
            "empirical" => Ok(FreezeMode::Empirical),
            other => Err(format!("unknown freeze mode `{other}`")),
        }
    }
}

/// An immutable policy view over a trained tree.
///
/// Cloning is cheap (the tree is shared), and a frozen policy can be read
/// from any number of threads at once.
#[derive(Clone)]
pub struct FrozenPolicy {
    tree: Arc<PlayerTree>,
    mode: FreezeMode,
}

impl FrozenPolicy {
    pub fn freeze(tree: Arc<PlayerTree>, mode: FreezeMode) -> FrozenPolicy {
        FrozenPolicy { tree, mode }
    }

    /// Loads a tree from `path` and freezes it.
    pub fn load(path: &Path, mode: FreezeMode) -> Result<FrozenPolicy, PolicyFileError> {
        Ok(FrozenPolicy::freeze(Arc::new(load_tree(path)?), mode))
    }

    pub fn owner(&self) -> PlayerId {
        self.tree.owner()
    }

    pub fn mode(&self) -> FreezeMode {
        self.mode
    }

    pub fn node_count(&self) -> usize {
        self.tree.node_count()
    }

    pub fn root(&self) -> NodeId {
        ROOT
    }

    pub fn child(&self, node: NodeId, token: ObservationToken) -> Option<NodeId> {
        self.tree.child(node, token)
    }

    /// The move distribution stored at `node`: normalized weights or visit
    /// frequencies per the freeze mode, uniform where nothing was learned.
    /// Empty exactly when the node has no arms.
    pub fn distribution_at(&self, node: NodeId) -> Vec<f64> {
        let (weights, visits) = self.tree.node_arms(node);
        match self.mode {
            FreezeMode::Weights => {
                let mut out = Vec::with_capacity(weights.len());
                if !weights.is_empty() {
                    mixture_into(weights, 0.0, &mut out);
                }
                out
            }
            FreezeMode::Empirical => {
                let total: u64 = visits.iter().map(|&v| v as u64).sum();
                if total == 0 {
                    vec![1.0 / visits.len() as f64; visits.len()]
                } else {
                    visits.iter().map(|&v| v as f64 / total as f64).collect()
                }
            }
        }
    }

    /// Samples a move for a play-time state: the stored distribution when
    /// the walk is still on a node with matching arms, uniform otherwise
    /// (off-tree, or a node the owner never moved from).
    pub fn choose(&self, node: Option<NodeId>, move_count: usize, rng: &mut (impl Rng + ?Sized)) -> usize {
        if let Some(id) = node {
            let dist = self.distribution_at(id);
            if dist.len() == move_count {
                return sample_index(&dist, rng);
            }
        }
        rng.gen_range(0..move_count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phantom::PhantomTicTacToe;
    use crate::rng::derive_rng;
    use crate::search::{train, SearchParams};

    #[test]
    fn empirical_freeze_normalizes_visit_counts() {
        let mut tree = PlayerTree::new(PlayerId::P1);
        tree.ensure_arms(ROOT, 2);
        for _ in 0..10 {
            tree.apply_update(ROOT, 0, 0.0);
        }
        for _ in 0..30 {
            tree.apply_update(ROOT, 1, 0.0);
        }
        let policy = FrozenPolicy::freeze(Arc::new(tree), FreezeMode::Empirical);
        let dist = policy.distribution_at(ROOT);
        assert!((dist[0] - 0.25).abs() < 1e-12);
        assert!((dist[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn weights_freeze_of_equal_weights_is_uniform() {
        let mut tree = PlayerTree::new(PlayerId::P1);
        tree.ensure_arms(ROOT, 4);
        let policy = FrozenPolicy::freeze(Arc::new(tree), FreezeMode::Weights);
        for p in policy.distribution_at(ROOT) {
            assert!((p - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn root_only_tree_plays_uniformly_in_both_modes() {
        for mode in [FreezeMode::Weights, FreezeMode::Empirical] {
            let policy = FrozenPolicy::freeze(Arc::new(PlayerTree::new(PlayerId::P2)), mode);
            assert!(policy.distribution_at(ROOT).is_empty());
            let mut rng = derive_rng(1, 9, 0);
            let draws = 100_000;
            let mut counts = [0u32; 5];
            for _ in 0..draws {
                counts[policy.choose(Some(ROOT), 5, &mut rng)] += 1;
            }
            for c in counts {
                assert!((c as f64 / draws as f64 - 0.2).abs() < 0.01);
            }
        }
    }

    #[test]
    fn stored_distribution_sampling_matches_frequencies() {
        let mut tree = PlayerTree::new(PlayerId::P1);
        tree.ensure_arms(ROOT, 2);
        for _ in 0..10 {
            tree.apply_update(ROOT, 0, 0.0);
        }
        for _ in 0..30 {
            tree.apply_update(ROOT, 1, 0.0);
        }
        let policy = FrozenPolicy::freeze(Arc::new(tree), FreezeMode::Empirical);
        let mut rng = derive_rng(2, 9, 0);
        let draws = 1_000_000;
        let ones = (0..draws)
            .filter(|_| policy.choose(Some(ROOT), 2, &mut rng) == 1)
            .count();
        assert!((ones as f64 / draws as f64 - 0.75).abs() < 0.002);
    }

    #[test]
    fn off_tree_choice_is_uniform() {
        let policy = FrozenPolicy::freeze(Arc::new(PlayerTree::new(PlayerId::P1)), FreezeMode::Weights);
        let mut rng = derive_rng(3, 9, 0);
        let draws = 100_000;
        let mut counts = [0u32; 5];
        for _ in 0..draws {
            counts[policy.choose(None, 5, &mut rng)] += 1;
        }
        for c in counts {
            assert!((c as f64 / draws as f64 - 0.2).abs() < 0.01);
        }
    }

    #[test]
    fn file_round_trip_preserves_the_tree_bit_for_bit() {
        let game = PhantomTicTacToe;
        let result = train(&game, 5000, &SearchParams::default(), 21, &[], |_, _, _| {});
        let dir = tempfile::tempdir().unwrap();
        for tree in &result.trees {
            let path = dir.path().join(format!("p{}.mmct", tree.owner().index()));
            save_tree(tree, &path).unwrap();
            let loaded = load_tree(&path).unwrap();
            assert_eq!(tree_to_bytes(&loaded), tree_to_bytes(tree));
            assert_eq!(loaded.owner(), tree.owner());
            assert_eq!(loaded.simulations_done(), tree.simulations_done());
        }
    }

    #[test]
    fn identical_seeds_serialize_to_identical_bytes() {
        let game = PhantomTicTacToe;
        let a = train(&game, 3000, &SearchParams::default(), 5, &[], |_, _, _| {});
        let b = train(&game, 3000, &SearchParams::default(), 5, &[], |_, _, _| {});
        assert_eq!(tree_to_bytes(&a.trees[0]), tree_to_bytes(&b.trees[0]));
        assert_eq!(tree_to_bytes(&a.trees[1]), tree_to_bytes(&b.trees[1]));
    }

    #[test]
    fn reader_rejects_malformed_files() {
        let err = read_tree(&mut &b"NOPE"[..]).unwrap_err();
        assert!(matches!(err, PolicyFileError::BadMagic | PolicyFileError::Io(_)));

        let mut bad_version = Vec::new();
        bad_version.extend_from_slice(&MAGIC);
        bad_version.extend_from_slice(&99u16.to_le_bytes());
        let err = read_tree(&mut bad_version.as_slice()).unwrap_err();
        assert!(matches!(err, PolicyFileError::UnsupportedVersion(99)));

        let tree = PlayerTree::new(PlayerId::P1);
        let bytes = tree_to_bytes(&tree);
        let err = read_tree(&mut &bytes[..bytes.len() - 3]).unwrap_err();
        assert!(matches!(err, PolicyFileError::Io(_)));
    }
}
