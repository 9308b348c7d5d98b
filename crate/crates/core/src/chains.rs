//! Chains, successors and chain trees.
//!
//! A chain of order `k` is the set of all order-`k` tiles containing a fixed
//! tile, its *core*. We store chains by `(order, core)`; if the core has order
//! `k + b` (and both of its depths are at most `k`) the chain has `b + 1`
//! tiles, one per shape, and `b` bonds between consecutive tiles.

use std::collections::HashSet;

use rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::config::AvailabilityConfig;
use crate::error::{Error, Result};
use crate::tile::Tile;
use crate::tileability::TileabilityTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Chain {
    order: u32,
    core: Tile,
}

impl Chain {
    pub fn new(order: u32, core: Tile) -> Result<Self> {
        if core.order() < order || core.i > order || core.j > order {
            return Err(Error::NotAChain(
                format!("order {order}"),
                core.to_string(),
                "core is not the intersection of order-k tiles".into(),
            ));
        }
        Ok(Chain { order, core })
    }

    /// The order-0 chain holding only the unit square.
    pub fn unit() -> Self {
        Chain { order: 0, core: Tile::UNIT }
    }

    /// The chain `[s, t]`: all tiles of their order containing `s ∩ t`.
    pub fn from_ends(s: &Tile, t: &Tile) -> Result<Self> {
        if s.order() != t.order() {
            return Err(Error::NotAChain(s.to_string(), t.to_string(), "orders differ".into()));
        }
        let core = s
            .intersection(t)
            .ok_or_else(|| Error::NotAChain(s.to_string(), t.to_string(), "interiors are disjoint".into()))?;
        Chain::new(s.order(), core)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn core(&self) -> Tile {
        self.core
    }

    pub fn bonds(&self) -> u32 {
        self.core.order() - self.order
    }

    pub fn len(&self) -> usize {
        self.bonds() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Shape range `i` of the tiles, most horizontal first.
    fn first_i(&self) -> u32 {
        self.order - self.core.j
    }

    /// The `m`-th tile counted from the horizontal end.
    pub fn tile(&self, m: u32) -> Tile {
        let i = self.first_i() + m;
        let j = self.order - i;
        Tile { i, j, a: self.core.a >> (self.core.i - i), b: self.core.b >> (self.core.j - j) }
    }

    pub fn tiles(&self) -> Vec<Tile> {
        (0..=self.bonds()).map(|m| self.tile(m)).collect()
    }

    /// Most horizontal tile.
    pub fn start(&self) -> Tile {
        self.tile(0)
    }

    /// Most vertical tile.
    pub fn end(&self) -> Tile {
        self.tile(self.bonds())
    }

    pub fn contains(&self, tile: &Tile) -> bool {
        tile.order() == self.order && tile.contains(&self.core)
    }

    /// Bonds as `(u, v, u ∩ v)` with `u` the more horizontal tile.
    pub fn bond_tiles(&self) -> impl Iterator<Item = (Tile, Tile, Tile)> + '_ {
        (0..self.bonds()).map(move |m| {
            let u = self.tile(m);
            let v = self.tile(m + 1);
            let w = Tile { i: v.i, j: u.j, a: v.a, b: u.b };
            (u, v, w)
        })
    }

    pub fn is_disjoint(&self, other: &Chain) -> bool {
        self.order != other.order || !self.tiles().iter().any(|t| other.contains(t))
    }

    /// Disjoint, and no tile of one is adjacent to a tile of the other.
    pub fn is_separate(&self, other: &Chain) -> bool {
        if !self.is_disjoint(other) {
            return false;
        }
        let theirs = other.tiles();
        !self.tiles().iter().any(|s| theirs.iter().any(|t| s.adjacent(t)))
    }
}

/// A successor of a chain: for each bond, whether it is split, plus which
/// horizontal child of the start tile and which vertical child of the end tile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Successor {
    pub parent: Chain,
    /// Bit `m` set means bond `m` (between tiles `m` and `m+1`) is split.
    pub splits: u64,
    pub start_child: u8,
    pub end_child: u8,
}

impl Successor {
    pub fn split_count(&self) -> u32 {
        self.splits.count_ones()
    }

    pub fn is_simple(&self) -> bool {
        self.splits == 0
    }

    fn is_split(&self, bond: u32) -> bool {
        self.splits >> bond & 1 == 1
    }

    fn start_tile(&self) -> Tile {
        self.parent.start().horizontal_children()[self.start_child as usize]
    }

    fn end_tile(&self) -> Tile {
        self.parent.end().vertical_children()[self.end_child as usize]
    }

    /// The order-`(k+1)` tiles, listed from most horizontal to most vertical.
    ///
    /// An unsplit bond `(u, v)` contributes `u ∩ v`; a split one contributes
    /// the other vertical child of `u` and the other horizontal child of `v`.
    pub fn tiles(&self) -> Vec<Tile> {
        let mut out = vec![self.start_tile()];
        for (m, (_, _, w)) in self.parent.bond_tiles().enumerate() {
            if self.is_split(m as u32) {
                out.push(Tile { a: w.a ^ 1, ..w });
                out.push(Tile { b: w.b ^ 1, ..w });
            } else {
                out.push(w);
            }
        }
        out.push(self.end_tile());
        out
    }

    /// The unique expression as pairwise separate chains, one more than the
    /// number of splits.
    pub fn decompose(&self) -> Vec<Chain> {
        let mut chains = Vec::with_capacity(self.split_count() as usize + 1);
        let mut first = self.start_tile();
        for (m, (_, _, w)) in self.parent.bond_tiles().enumerate() {
            if self.is_split(m as u32) {
                let last = Tile { a: w.a ^ 1, ..w };
                chains.push(Chain::from_ends(&first, &last).expect("split piece is a chain"));
                first = Tile { b: w.b ^ 1, ..w };
            }
        }
        chains.push(Chain::from_ends(&first, &self.end_tile()).expect("final piece is a chain"));
        chains
    }
}

/// All `4·2^b` successors of a chain with `b` bonds.
pub fn enumerate_successors(chain: &Chain) -> impl Iterator<Item = Successor> + '_ {
    let bonds = chain.bonds();
    assert!(bonds < 64, "chain with {bonds} bonds");
    (0..4u8).flat_map(move |ends| {
        (0..1u64 << bonds).map(move |splits| Successor {
            parent: *chain,
            splits,
            start_child: ends >> 1,
            end_child: ends & 1,
        })
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub chain: Chain,
    pub level: u32,
    pub children: Vec<usize>,
}

/// A rooted tree of chains; node 0 is the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainTree {
    depth: u32,
    nodes: Vec<Node>,
}

/// Leaf statistics: `leaves` chains holding `tiles` tiles (with multiplicity)
/// and `bonds = tiles - leaves` bonds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct TreeStats {
    pub leaves: u64,
    pub tiles: u64,
    pub bonds: u64,
}

#[derive(Serialize, Deserialize)]
struct ChainJson {
    order: u32,
    core: Tile,
}

#[derive(Serialize, Deserialize)]
struct NodeJson {
    chain: ChainJson,
    #[serde(default)]
    children: Vec<NodeJson>,
}

#[derive(Serialize, Deserialize)]
struct TreeJson {
    depth: u32,
    root: NodeJson,
}

impl ChainTree {
    /// The depth-0 tree: just the unit-square chain.
    pub fn root_only() -> Self {
        ChainTree { depth: 0, nodes: vec![Node { chain: Chain::unit(), level: 0, children: vec![] }] }
    }

    /// Builds a tree from raw parts. Structure is not validated beyond
    /// indices; use [`verify_chain_tree`] for the chain-tree conditions.
    pub fn from_nodes(depth: u32, nodes: Vec<Node>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Parse("chain tree without a root".into()));
        }
        let mut seen = vec![false; nodes.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for &c in &nodes[x].children {
                if c >= nodes.len() || seen[c] {
                    return Err(Error::Parse(format!("bad child index {c}")));
                }
                seen[c] = true;
                stack.push(c);
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Parse("unreachable nodes".into()));
        }
        Ok(ChainTree { depth, nodes })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.children.is_empty())
    }

    pub fn stats(&self) -> TreeStats {
        let (leaves, tiles) = self.leaves().fold((0u64, 0u64), |(c, t), n| (c + 1, t + n.chain.len() as u64));
        TreeStats { leaves, tiles, bonds: tiles - leaves }
    }

    /// Attach `chains` as children of node `parent`.
    fn push_children(&mut self, parent: usize, chains: &[Chain]) {
        let level = self.nodes[parent].level + 1;
        for chain in chains {
            let id = self.nodes.len();
            self.nodes.push(Node { chain: *chain, level, children: vec![] });
            self.nodes[parent].children.push(id);
        }
    }

    fn leaf_ids(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&x| self.nodes[x].children.is_empty()).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        fn node(tree: &ChainTree, x: usize) -> NodeJson {
            let n = &tree.nodes[x];
            NodeJson {
                chain: ChainJson { order: n.chain.order, core: n.chain.core },
                children: n.children.iter().map(|&c| node(tree, c)).collect(),
            }
        }
        Ok(serde_json::to_string(&TreeJson { depth: self.depth, root: node(self, 0) })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        fn walk(doc: &NodeJson, level: u32, nodes: &mut Vec<Node>) -> Result<usize> {
            let id = nodes.len();
            let chain = Chain::new(doc.chain.order, doc.chain.core)?;
            nodes.push(Node { chain, level, children: vec![] });
            for c in &doc.children {
                let cid = walk(c, level + 1, nodes)?;
                nodes[id].children.push(cid);
            }
            Ok(id)
        }
        let doc: TreeJson = serde_json::from_str(text)?;
        let mut nodes = Vec::new();
        walk(&doc.root, 0, &mut nodes)?;
        ChainTree::from_nodes(doc.depth, nodes)
    }
}

/// Largest depth for which [`enumerate_chain_trees`] will run (1280 trees).
pub const MAX_ENUMERATION_DEPTH: u32 = 3;

/// Every chain tree of the given depth, by extending each leaf with every successor.
pub fn enumerate_chain_trees(depth: u32) -> Result<Vec<ChainTree>> {
    if depth > MAX_ENUMERATION_DEPTH {
        return Err(Error::OracleScale(format!(
            "chain-tree enumeration is limited to depth {MAX_ENUMERATION_DEPTH}, got {depth}"
        )));
    }
    let mut trees = vec![ChainTree::root_only()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for tree in &trees {
            let leaves = tree.leaf_ids();
            let options: Vec<Vec<Vec<Chain>>> = leaves
                .iter()
                .map(|&x| enumerate_successors(&tree.nodes[x].chain).map(|s| s.decompose()).collect())
                .collect();
            let mut choice = vec![0usize; leaves.len()];
            loop {
                let mut grown = tree.clone();
                grown.depth += 1;
                for (slot, &leaf) in leaves.iter().enumerate() {
                    grown.push_children(leaf, &options[slot][choice[slot]]);
                }
                next.push(grown);
                // mixed-radix increment
                let mut pos = 0;
                while pos < choice.len() {
                    choice[pos] += 1;
                    if choice[pos] < options[pos].len() {
                        break;
                    }
                    choice[pos] = 0;
                    pos += 1;
                }
                if pos == choice.len() {
                    break;
                }
            }
        }
        trees = next;
    }
    Ok(trees)
}

/// A chain tree with a uniformly random successor at every leaf of every level.
pub fn random_chain_tree<R: RngCore>(depth: u32, rng: &mut R) -> ChainTree {
    let mut tree = ChainTree::root_only();
    for _ in 0..depth {
        for leaf in tree.leaf_ids() {
            let chain = tree.nodes[leaf].chain;
            let bonds = chain.bonds();
            let draw = rng.next_u64();
            let succ = Successor {
                parent: chain,
                splits: if bonds == 0 { 0 } else { draw & (u64::MAX >> (64 - bonds)) },
                start_child: (rng.next_u32() & 1) as u8,
                end_child: (rng.next_u32() & 1) as u8,
            };
            tree.push_children(leaf, &succ.decompose());
        }
        tree.depth += 1;
    }
    tree
}

/// The successor the principal construction picks for a blocked chain:
/// split exactly at bonds whose intersection tile is tileable, and take the
/// lower-index blocked child at each end.
pub fn principal_successor(chain: &Chain, table: &TileabilityTable) -> Successor {
    let pick = |pair: [Tile; 2]| -> u8 {
        if table.is_blocked(&pair[0]) {
            0
        } else {
            1
        }
    };
    let mut splits = 0u64;
    for (m, (_, _, w)) in chain.bond_tiles().enumerate() {
        if table.is_tileable(&w) {
            splits |= 1 << m;
        }
    }
    Successor {
        parent: *chain,
        splits,
        start_child: pick(chain.start().horizontal_children()),
        end_child: pick(chain.end().vertical_children()),
    }
}

/// A principal chain tree for `cfg`, or `None` when the unit square is tileable.
pub fn build_principal_chain_tree(cfg: &AvailabilityConfig) -> Option<ChainTree> {
    let table = TileabilityTable::compute(cfg);
    principal_chain_tree_with(&table)
}

pub fn principal_chain_tree_with(table: &TileabilityTable) -> Option<ChainTree> {
    if table.is_tileable(&Tile::UNIT) {
        return None;
    }
    let mut tree = ChainTree::root_only();
    let mut frontier = vec![0usize];
    for _ in 0..table.order() {
        let mut next = Vec::new();
        for x in frontier {
            let chain = tree.nodes[x].chain;
            let children = principal_successor(&chain, table).decompose();
            let first = tree.nodes.len();
            tree.push_children(x, &children);
            next.extend(first..tree.nodes.len());
        }
        tree.depth += 1;
        frontier = next;
    }
    Some(tree)
}

/// Outcome of checking the chain-tree conditions.
///
/// `(I)` root is the unit-square chain; `(II)` children of every non-leaf are
/// pairwise separate chains forming a successor; `(III)` every tile is
/// blocked; `(IV)` no split at a bond whose intersection is blocked. The last
/// two need a configuration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub root: bool,
    pub successors: bool,
    pub blocked: Option<bool>,
    pub necessary_splits: Option<bool>,
    /// Chains at distinct vertices share no tile.
    pub disjoint: bool,
    pub violations: Vec<String>,
}

impl VerifyReport {
    /// All applicable conditions hold; with a configuration this includes disjointness.
    pub fn passed(&self) -> bool {
        let principal = self.blocked.is_some();
        self.root
            && self.successors
            && self.blocked.unwrap_or(true)
            && self.necessary_splits.unwrap_or(true)
            && (!principal || self.disjoint)
    }
}

fn check_successor_set(parent: &Chain, children: &[Chain]) -> Option<String> {
    for c in children {
        if c.order != parent.order + 1 {
            return Some(format!("child chain of order {} under order {}", c.order, parent.order));
        }
    }
    for (x, c) in children.iter().enumerate() {
        for d in &children[x + 1..] {
            if !c.is_separate(d) {
                return Some(format!("children {} and {} are not separate", c.core, d.core));
            }
        }
    }
    let union: Vec<Tile> = children.iter().flat_map(|c| c.tiles()).collect();
    let parents = parent.tiles();
    for p in &parents {
        let (h, v) = p.children();
        let hs = union.iter().filter(|t| h.contains(t)).count();
        let vs = union.iter().filter(|t| v.contains(t)).count();
        if hs != 1 || vs != 1 {
            return Some(format!("tile {p} has {hs} horizontal and {vs} vertical children in the successor"));
        }
    }
    for t in &union {
        let is_child = parents.iter().any(|p| {
            let (h, v) = p.children();
            h.contains(t) || v.contains(t)
        });
        if !is_child {
            return Some(format!("tile {t} is not a child of any tile of the parent chain"));
        }
    }
    None
}

pub fn verify_chain_tree(tree: &ChainTree, cfg: Option<&AvailabilityConfig>) -> VerifyReport {
    let mut violations = Vec::new();
    let root = tree.root().chain == Chain::unit();
    if !root {
        violations.push(format!("(I) root chain has core {}", tree.root().chain.core));
    }

    let mut successors = true;
    for node in tree.nodes() {
        if node.chain.order != node.level {
            successors = false;
            violations.push(format!("(II) order-{} chain at level {}", node.chain.order, node.level));
        }
        if node.level < tree.depth() {
            let children: Vec<Chain> = node.children.iter().map(|&c| tree.nodes()[c].chain).collect();
            if children.is_empty() {
                successors = false;
                violations.push(format!("(II) leaf at level {} above depth", node.level));
            } else if let Some(msg) = check_successor_set(&node.chain, &children) {
                successors = false;
                violations.push(format!("(II) {msg}"));
            }
        } else if !node.children.is_empty() {
            successors = false;
            violations.push(format!("(II) node at level {} has children", node.level));
        }
    }

    let mut by_level: Vec<HashSet<Tile>> = vec![HashSet::new(); tree.depth() as usize + 1];
    let mut disjoint = true;
    for node in tree.nodes() {
        let Some(seen) = by_level.get_mut(node.level as usize) else { continue };
        for t in node.chain.tiles() {
            if !seen.insert(t) {
                disjoint = false;
                if cfg.is_some() {
                    violations.push(format!("tile {t} appears in two chains"));
                }
            }
        }
    }

    let (blocked, necessary_splits) = match cfg {
        None => (None, None),
        Some(cfg) => {
            let table = TileabilityTable::compute(cfg);
            let mut blocked = tree.depth() == cfg.order();
            if !blocked {
                violations.push(format!(
                    "(III) tree depth {} differs from configuration order {}",
                    tree.depth(),
                    cfg.order()
                ));
            }
            let mut necessary = true;
            if blocked {
                for node in tree.nodes() {
                    for t in node.chain.tiles() {
                        if table.is_tileable(&t) {
                            blocked = false;
                            violations.push(format!("(III) tile {t} is tileable"));
                        }
                    }
                    if node.children.is_empty() {
                        continue;
                    }
                    for (_, _, w) in node.chain.bond_tiles() {
                        let kept = node.children.iter().any(|&c| tree.nodes()[c].chain.contains(&w));
                        if table.is_blocked(&w) && !kept {
                            necessary = false;
                            violations.push(format!("(IV) split at blocked intersection {w}"));
                        }
                    }
                }
            }
            (Some(blocked), Some(necessary))
        }
    };

    VerifyReport { root, successors, blocked, necessary_splits, disjoint, violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tile::enumerate_tiles;
    use crate::tileability::unit_square_tileable;

    fn t(i: u32, j: u32, a: u64, b: u64) -> Tile {
        Tile::new(i, j, a, b).unwrap()
    }

    fn binomial(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, x| acc * (n - x) / (x + 1))
    }

    #[test]
    fn chain_from_ends_examples() {
        let s = t(1, 2, 1, 3);
        let single = Chain::from_ends(&s, &s).unwrap();
        assert_eq!(single.bonds(), 0);
        assert_eq!(single.tiles(), vec![s]);

        let chain = Chain::from_ends(&t(0, 2, 0, 1), &t(2, 0, 1, 0)).unwrap();
        assert_eq!(chain.tiles(), vec![t(0, 2, 0, 1), t(1, 1, 0, 0), t(2, 0, 1, 0)]);
        // the same chain built by enumerating all order-2 tiles over the core
        let core = chain.core();
        let brute: Vec<Tile> = enumerate_tiles(2).filter(|x| x.contains(&core)).collect();
        assert_eq!(brute, chain.tiles());

        assert!(Chain::from_ends(&t(0, 1, 0, 0), &t(0, 1, 0, 1)).is_err());
        assert!(Chain::from_ends(&t(0, 1, 0, 0), &t(0, 2, 0, 0)).is_err());
    }

    #[test]
    fn order_three_chain_over_order_five_tile() {
        for w in enumerate_tiles(5).filter(|w| w.i <= 3 && w.j <= 3) {
            let tiles: Vec<Tile> = enumerate_tiles(3).filter(|x| x.contains(&w)).collect();
            assert_eq!(tiles.len(), 3);
            let chain = Chain::new(3, w).unwrap();
            assert_eq!(chain.bonds(), 2);
            assert_eq!(chain.tiles(), tiles);
            for pair in tiles.windows(2) {
                assert!(pair[0].adjacent(&pair[1]));
            }
        }
    }

    #[test]
    fn successor_counts() {
        let simple = enumerate_successors(&Chain::unit()).collect::<Vec<_>>();
        assert_eq!(simple.len(), 4);
        assert!(simple.iter().all(Successor::is_simple));
        for b in 0..=5u32 {
            // a b-bond chain of order b: core of order 2b with shape (b, b)
            let chain = Chain::new(b, Tile { i: b, j: b, a: 0, b: 0 }).unwrap();
            assert_eq!(chain.bonds(), b);
            let all: Vec<Successor> = enumerate_successors(&chain).collect();
            assert_eq!(all.len(), 4 << b);
            for r in 0..=b {
                let count = all.iter().filter(|s| s.split_count() == r).count() as u64;
                assert_eq!(count, 4 * binomial(u64::from(b), u64::from(r)));
            }
        }
    }

    #[test]
    fn successors_are_valid_and_decompose() {
        for b in 0..=4u32 {
            for k in b..=b + 1 {
                let chain = Chain::new(k, Tile { i: b, j: k, a: 0, b: 1 }).unwrap();
                assert_eq!(chain.bonds(), b);
                let parents = chain.tiles();
                for succ in enumerate_successors(&chain) {
                    let tiles = succ.tiles();
                    // exactly one horizontal and one vertical child of each parent tile
                    for p in &parents {
                        let (h, v) = p.children();
                        assert_eq!(tiles.iter().filter(|x| h.contains(x)).count(), 1);
                        assert_eq!(tiles.iter().filter(|x| v.contains(x)).count(), 1);
                    }
                    let pieces = succ.decompose();
                    assert_eq!(pieces.len() as u32, succ.split_count() + 1);
                    let bonds: u32 = pieces.iter().map(Chain::bonds).sum();
                    assert_eq!(bonds, chain.bonds() + 1);
                    let mut union: Vec<Tile> = pieces.iter().flat_map(Chain::tiles).collect();
                    union.sort();
                    let mut expected = tiles.clone();
                    expected.sort();
                    assert_eq!(union, expected);
                    for (x, c) in pieces.iter().enumerate() {
                        for d in &pieces[x + 1..] {
                            assert!(c.is_separate(d));
                        }
                    }
                    if succ.is_simple() {
                        let s2 = succ.tiles()[0];
                        let t2 = *succ.tiles().last().unwrap();
                        assert_eq!(pieces, vec![Chain::from_ends(&s2, &t2).unwrap()]);
                    }
                }
            }
        }
    }

    #[test]
    fn split_between_square_and_vertical_tile() {
        // {s, u, t} = bottom quarter strip, bottom-left square, left quarter strip
        let chain = Chain::from_ends(&t(0, 2, 0, 0), &t(2, 0, 0, 0)).unwrap();
        assert_eq!(chain.tiles(), vec![t(0, 2, 0, 0), t(1, 1, 0, 0), t(2, 0, 0, 0)]);
        let succ = Successor { parent: chain, splits: 0b10, start_child: 0, end_child: 0 };
        let pieces = succ.decompose();
        assert_eq!(pieces.len(), 2);
        let left = Chain::from_ends(&t(0, 2, 0, 0), &t(1, 1, 0, 0)).unwrap();
        let right = Chain::from_ends(&t(2, 0, 0, 0), &t(2, 0, 0, 0)).unwrap();
        let simple_left: Vec<Vec<Chain>> =
            enumerate_successors(&left).filter(Successor::is_simple).map(|s| s.decompose()).collect();
        let simple_right: Vec<Vec<Chain>> =
            enumerate_successors(&right).filter(Successor::is_simple).map(|s| s.decompose()).collect();
        assert!(simple_left.contains(&vec![pieces[0]]));
        assert!(simple_right.contains(&vec![pieces[1]]));
    }

    #[test]
    fn split_everywhere() {
        for b in 1..=5u32 {
            let chain = Chain::new(b, Tile { i: b, j: b, a: 1, b: 0 }).unwrap();
            let succ = Successor { parent: chain, splits: (1 << b) - 1, start_child: 1, end_child: 0 };
            let pieces = succ.decompose();
            assert_eq!(pieces.len() as u32, b + 1);
            assert!(pieces.iter().all(|c| c.bonds() == 1));
            assert_eq!(pieces.iter().map(Chain::bonds).sum::<u32>(), b + 1);
        }
    }

    #[test]
    fn chain_tree_counts() {
        let counts: Vec<usize> = (0..=3).map(|n| enumerate_chain_trees(n).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 4, 32, 1280]);
        let two = enumerate_chain_trees(2).unwrap();
        assert_eq!(two.iter().filter(|t| t.stats().leaves == 1).count(), 16);
        assert_eq!(two.iter().filter(|t| t.stats().leaves == 2).count(), 16);
        assert!(matches!(enumerate_chain_trees(4), Err(Error::OracleScale(_))));
        for tree in enumerate_chain_trees(3).unwrap() {
            let report = verify_chain_tree(&tree, None);
            assert!(report.root && report.successors, "{:?}", report.violations);
        }
        let mut distinct: Vec<String> =
            enumerate_chain_trees(2).unwrap().iter().map(|t| t.to_json().unwrap()).collect();
        distinct.sort();
        distinct.dedup();
        assert_eq!(distinct.len(), 32);
    }

    #[test]
    fn principal_tree_examples() {
        assert!(build_principal_chain_tree(&AvailabilityConfig::all_available(3).unwrap()).is_none());

        // both verticals and the bottom horizontal unavailable
        let cfg = AvailabilityConfig::from_available_tiles(1, &[t(0, 1, 0, 1)]).unwrap();
        let tree = build_principal_chain_tree(&cfg).unwrap();
        assert_eq!(tree.depth(), 1);
        let report = verify_chain_tree(&tree, Some(&cfg));
        assert!(report.passed(), "{:?}", report.violations);
        let leaf: Vec<Chain> = tree.leaves().map(|n| n.chain).collect();
        assert_eq!(leaf, vec![Chain::from_ends(&t(0, 1, 0, 0), &t(1, 0, 0, 0)).unwrap()]);
    }

    #[test]
    fn principal_tree_prefers_the_three_tile_chain() {
        // bottom half and left half blocked; bottom-left quarter blocked too
        let blockers = [t(0, 2, 0, 0), t(1, 1, 0, 0), t(2, 0, 0, 0)];
        let cfg = AvailabilityConfig::all_available(2).unwrap().with_tiles(&blockers, false).unwrap();
        let tree = build_principal_chain_tree(&cfg).unwrap();
        let leaves: Vec<Chain> = tree.leaves().map(|n| n.chain).collect();
        assert_eq!(leaves, vec![Chain::from_ends(&blockers[0], &blockers[2]).unwrap()]);
        assert!(verify_chain_tree(&tree, Some(&cfg)).passed());

        // with the bottom-left quarter tileable the split is forced: four tiles in two chains
        let blockers = [t(0, 2, 0, 0), t(1, 1, 1, 0), t(1, 1, 0, 1), t(2, 0, 0, 0)];
        let cfg = AvailabilityConfig::all_available(2).unwrap().with_tiles(&blockers, false).unwrap();
        let tree = build_principal_chain_tree(&cfg).unwrap();
        assert_eq!(tree.stats(), TreeStats { leaves: 2, tiles: 4, bonds: 2 });
        assert!(verify_chain_tree(&tree, Some(&cfg)).passed());
    }

    #[test]
    fn verify_reports_bad_successor() {
        let mut nodes = vec![
            Node { chain: Chain::unit(), level: 0, children: vec![1] },
            // a single order-1 tile is not a successor of the unit square
            Node { chain: Chain::new(1, t(0, 1, 0, 0)).unwrap(), level: 1, children: vec![] },
        ];
        let tree = ChainTree::from_nodes(1, nodes.clone()).unwrap();
        let report = verify_chain_tree(&tree, None);
        assert!(report.root);
        assert!(!report.successors);
        assert!(!report.passed());

        nodes[0].chain = Chain::new(0, t(0, 0, 0, 0)).unwrap();
        nodes[1].chain = Chain::new(1, t(1, 1, 0, 0)).unwrap();
        let tree = ChainTree::from_nodes(1, nodes).unwrap();
        assert!(verify_chain_tree(&tree, None).passed());
    }

    #[test]
    fn json_round_trip() {
        for tree in enumerate_chain_trees(2).unwrap() {
            let json = tree.to_json().unwrap();
            let back = ChainTree::from_json(&json).unwrap();
            assert_eq!(back.to_json().unwrap(), json);
            assert_eq!(back.stats(), tree.stats());
        }
    }

    #[test]
    fn blocked_chains_have_blocked_parents() {
        // if a successor is entirely blocked, so is the parent chain
        for seed in 0..200u64 {
            let n = 2 + (seed % 6) as u32;
            let cfg = AvailabilityConfig::from_fn(n, |tile| {
                let x = (tile.index() + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15 ^ seed);
                (x >> 40) % 10 < 8
            })
            .unwrap();
            let table = TileabilityTable::compute(&cfg);
            for k in 0..n {
                for core in enumerate_tiles(k + 2).filter(|c| c.i <= k && c.j <= k).take(40) {
                    let chain = Chain::new(k, core).unwrap();
                    for succ in enumerate_successors(&chain) {
                        if succ.tiles().iter().all(|x| table.is_blocked(x)) {
                            assert!(chain.tiles().iter().all(|x| table.is_blocked(x)));
                        }
                    }
                }
            }
            if let Some(tree) = principal_chain_tree_with(&table) {
                assert!(!unit_square_tileable(&cfg));
                let leaf_tiles: Vec<Tile> = tree.leaves().flat_map(|l| l.chain.tiles()).collect();
                let witness = AvailabilityConfig::all_available(n).unwrap().with_tiles(&leaf_tiles, false).unwrap();
                assert!(!unit_square_tileable(&witness));
            }
        }
    }
}
