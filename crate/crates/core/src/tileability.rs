//! Deciding tileability of dyadic tiles under an availability configuration.
//!
//! A tile of order `k < n` is tileable iff both of its horizontal children or
//! both of its vertical children are tileable; an order-`n` tile is tileable
//! iff it is available. [`TileabilityTable`] evaluates this bottom-up for every
//! tile of every order in `O(n·2^n)` bit operations, mostly 64 at a time.

use crate::config::AvailabilityConfig;
use crate::error::{Error, Result};
use crate::tile::{enumerate_tiles, tile_count, Tile};

/// Tileable/blocked status of every tile of order `0..=n`.
#[derive(Clone, Debug)]
pub struct TileabilityTable {
    order: u32,
    levels: Vec<Vec<u64>>,
}

impl TileabilityTable {
    pub fn compute(cfg: &AvailabilityConfig) -> Self {
        let n = cfg.order();
        let mut levels = vec![Vec::new(); n as usize + 1];
        levels[n as usize] = cfg.words().to_vec();
        for m in (0..n).rev() {
            levels[m as usize] = level_step(&levels[m as usize + 1], m);
        }
        TileabilityTable { order: n, levels }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Panics if the tile's order exceeds the configuration order.
    pub fn is_tileable(&self, tile: &Tile) -> bool {
        let level = &self.levels[tile.order() as usize];
        let k = tile.index();
        level[(k / 64) as usize] >> (k % 64) & 1 == 1
    }

    pub fn is_blocked(&self, tile: &Tile) -> bool {
        !self.is_tileable(tile)
    }
}

/// Keep the low `s` bits of every `2s`-bit group of `x` and pack them into the low 32 bits.
#[inline]
fn compress_halves(mut x: u64, s: u32) -> u64 {
    const MASKS: [u64; 6] = [
        0x5555_5555_5555_5555,
        0x3333_3333_3333_3333,
        0x0f0f_0f0f_0f0f_0f0f,
        0x00ff_00ff_00ff_00ff,
        0x0000_ffff_0000_ffff,
        0x0000_0000_ffff_ffff,
    ];
    let mut t = s.trailing_zeros() as usize;
    x &= MASKS[t];
    while t < 5 {
        x = (x | (x >> (1 << t))) & MASKS[t + 1];
        t += 1;
    }
    x
}

/// Pairwise AND of `2s`-bit groups (low half with high half), packed.
#[inline]
fn and_halves(x: u64, s: u32) -> u64 {
    compress_halves(x & (x >> s), s)
}

/// Level `m` from level `m + 1`.
fn level_step(next: &[u64], m: u32) -> Vec<u64> {
    let len = tile_count(m);
    let mut out = vec![0u64; len.div_ceil(64) as usize];
    if m < 6 {
        let get = |k: u64| next[(k / 64) as usize] >> (k % 64) & 1 == 1;
        for (k, tile) in enumerate_tiles(m).enumerate() {
            let ([h0, h1], [v0, v1]) = tile.children();
            let ok = (get(h0.index()) && get(h1.index())) || (get(v0.index()) && get(v1.index()));
            if ok {
                out[k / 64] |= 1 << (k % 64);
            }
        }
        return out;
    }
    let block_words = 1usize << (m - 6);
    for i in 0..=m as usize {
        let j = m - i as u32;
        let dst = &mut out[i * block_words..(i + 1) * block_words];
        // horizontal children: consecutive bit pairs of the same shape block
        let h_src = &next[i * 2 * block_words..(i + 1) * 2 * block_words];
        for (w, d) in dst.iter_mut().enumerate() {
            *d = and_halves(h_src[2 * w], 1) | (and_halves(h_src[2 * w + 1], 1) << 32);
        }
        // vertical children: halves of 2^(j+1)-bit chunks of the next shape block
        let v_src = &next[(i + 1) * 2 * block_words..(i + 2) * 2 * block_words];
        if j >= 6 {
            let sw = 1usize << (j - 6);
            for a in 0..(block_words / sw) {
                for t in 0..sw {
                    dst[a * sw + t] |= v_src[2 * a * sw + t] & v_src[(2 * a + 1) * sw + t];
                }
            }
        } else {
            let s = 1u32 << j;
            for (w, d) in dst.iter_mut().enumerate() {
                *d |= and_halves(v_src[2 * w], s) | (and_halves(v_src[2 * w + 1], s) << 32);
            }
        }
    }
    out
}

/// Whether the unit square can be tiled by available tiles.
pub fn unit_square_tileable(cfg: &AvailabilityConfig) -> bool {
    let mut level = cfg.words().to_vec();
    for m in (0..cfg.order()).rev() {
        level = level_step(&level, m);
    }
    level[0] & 1 == 1
}

/// Whether `tile` can be tiled by available order-`n` tiles.
pub fn is_tileable(tile: &Tile, cfg: &AvailabilityConfig) -> Result<bool> {
    if tile.order() > cfg.order() {
        return Err(Error::OrderMismatch(format!(
            "tile {tile} has order above the configuration order {}",
            cfg.order()
        )));
    }
    Ok(unit_square_tileable(&cfg.restrict(tile)?))
}

/// A set of order-`n` tiles with disjoint interiors whose union is `target`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tiling {
    target: Tile,
    order: u32,
    tiles: Vec<Tile>,
}

impl Tiling {
    /// Validates and builds a tiling. Validation is quadratic in the tile count.
    pub fn new(target: Tile, order: u32, mut tiles: Vec<Tile>) -> Result<Self> {
        tiles.sort();
        let tiling = Tiling { target, order, tiles };
        tiling.validate()?;
        Ok(tiling)
    }

    pub fn target(&self) -> Tile {
        self.target
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    /// Checks order, containment, pairwise interior-disjointness and total area.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidTile(msg));
        if self.order < self.target.order() {
            return bad(format!("order {} below target {}", self.order, self.target));
        }
        for t in &self.tiles {
            if t.order() != self.order {
                return bad(format!("tile {t} is not of order {}", self.order));
            }
            if !self.target.contains(t) {
                return bad(format!("tile {t} lies outside {}", self.target));
            }
        }
        for (x, s) in self.tiles.iter().enumerate() {
            for t in &self.tiles[x + 1..] {
                if s.interiors_intersect(t) {
                    return bad(format!("tiles {s} and {t} overlap"));
                }
            }
        }
        let expected = 1u64 << (self.order - self.target.order());
        if self.tiles.len() as u64 != expected {
            return bad(format!("{} tiles, area needs {expected}", self.tiles.len()));
        }
        Ok(())
    }
}

/// A tiling of `tile` by available tiles, if one exists. When both splits
/// work, the horizontal split is taken.
pub fn extract_tiling(tile: &Tile, cfg: &AvailabilityConfig) -> Result<Option<Tiling>> {
    if tile.order() > cfg.order() {
        return Err(Error::OrderMismatch(format!(
            "tile {tile} has order above the configuration order {}",
            cfg.order()
        )));
    }
    let table = TileabilityTable::compute(cfg);
    if table.is_blocked(tile) {
        return Ok(None);
    }
    let mut tiles = Vec::new();
    let mut stack = vec![*tile];
    while let Some(t) = stack.pop() {
        if t.order() == cfg.order() {
            tiles.push(t);
            continue;
        }
        let (h, v) = t.children();
        if h.iter().all(|c| table.is_tileable(c)) {
            stack.extend(h);
        } else {
            stack.extend(v);
        }
    }
    tiles.sort();
    Ok(Some(Tiling { target: *tile, order: cfg.order(), tiles }))
}

/// A `2^-n x 2^-n` grid square, by column `x` and row `y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub x: u64,
    pub y: u64,
}

impl Cell {
    /// The `n + 1` order-`n` tiles containing this cell, most horizontal first.
    pub fn covering_tiles(&self, n: u32) -> impl Iterator<Item = Tile> + '_ {
        (0..=n).map(move |i| Tile { i, j: n - i, a: self.x >> (n - i), b: self.y >> i })
    }
}

fn all_cells(n: u32) -> impl Iterator<Item = Cell> {
    (0..1u64 << n).flat_map(move |x| (0..1u64 << n).map(move |y| Cell { x, y }))
}

/// Cells not contained in any available tile.
pub fn uncovered_cells(cfg: &AvailabilityConfig) -> Vec<Cell> {
    let n = cfg.order();
    all_cells(n).filter(|c| c.covering_tiles(n).all(|t| !cfg.is_available(&t))).collect()
}

/// Cells where every available covering tile has no available friend.
pub fn bad_cells(cfg: &AvailabilityConfig) -> Result<Vec<Cell>> {
    let n = cfg.order();
    if n == 0 {
        return Err(Error::NoFriends);
    }
    let has_available_friend = |t: &Tile| -> bool {
        let (i, j) = t.shape();
        (i >= 1 && cfg.is_available(&Tile { a: t.a ^ 1, ..*t }))
            || (j >= 1 && cfg.is_available(&Tile { b: t.b ^ 1, ..*t }))
    };
    Ok(all_cells(n)
        .filter(|c| c.covering_tiles(n).all(|t| !cfg.is_available(&t) || !has_available_friend(&t)))
        .collect())
}
