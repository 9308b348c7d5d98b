//! Availability configurations: one bit per order-`n` tile, indexed by [`Tile::index`].
//!
//! Text form is two lines: the order in decimal, then the bit vector as
//! lowercase hex. Bytes run in index order; within a byte, bit `k mod 8` of byte
//! `k / 8` is tile `k`. Padding bits in the last byte are zero.
//!
//! The JSON form is `{"order": n, "available": ["i,j,a,b", ...]}`. A bare array
//! of tile strings is also accepted on input when it is non-empty.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tile::{check_order, enumerate_tiles, tile_count, Tile};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AvailabilityConfig {
    order: u32,
    words: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct ConfigJson {
    order: u32,
    available: Vec<Tile>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ConfigJsonInput {
    Object(ConfigJson),
    List(Vec<Tile>),
}

fn word_count(bits: u64) -> usize {
    bits.div_ceil(64) as usize
}

impl AvailabilityConfig {
    /// Builds a configuration from already-packed words. Bits past the end are cleared.
    pub fn from_words(order: u32, mut words: Vec<u64>) -> Result<Self> {
        check_order(order)?;
        let len = tile_count(order);
        if words.len() != word_count(len) {
            return Err(Error::Config(format!("order {order} needs {} words, got {}", word_count(len), words.len())));
        }
        let tail = len % 64;
        if tail != 0 {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
        Ok(AvailabilityConfig { order, words })
    }

    pub fn from_fn(order: u32, mut available: impl FnMut(&Tile) -> bool) -> Result<Self> {
        check_order(order)?;
        let mut words = vec![0u64; word_count(tile_count(order))];
        for (k, tile) in enumerate_tiles(order).enumerate() {
            if available(&tile) {
                words[k / 64] |= 1 << (k % 64);
            }
        }
        Ok(AvailabilityConfig { order, words })
    }

    pub fn all_available(order: u32) -> Result<Self> {
        check_order(order)?;
        Self::from_words(order, vec![u64::MAX; word_count(tile_count(order))])
    }

    pub fn none_available(order: u32) -> Result<Self> {
        check_order(order)?;
        Self::from_words(order, vec![0; word_count(tile_count(order))])
    }

    pub fn from_available_tiles<'a>(order: u32, tiles: impl IntoIterator<Item = &'a Tile>) -> Result<Self> {
        Self::none_available(order)?.with_tiles(tiles, true)
    }

    /// A copy with the given tiles forced to `available`.
    pub fn with_tiles<'a>(&self, tiles: impl IntoIterator<Item = &'a Tile>, available: bool) -> Result<Self> {
        let mut words = self.words.clone();
        for tile in tiles {
            if tile.order() != self.order {
                return Err(Error::OrderMismatch(format!("tile {tile} in an order-{} configuration", self.order)));
            }
            let k = tile.index() as usize;
            if available {
                words[k / 64] |= 1 << (k % 64);
            } else {
                words[k / 64] &= !(1 << (k % 64));
            }
        }
        Ok(AvailabilityConfig { order: self.order, words })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Number of tiles (bits), `(n+1)·2^n`.
    pub fn len(&self) -> u64 {
        tile_count(self.order)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, index: u64) -> bool {
        self.words[(index / 64) as usize] >> (index % 64) & 1 == 1
    }

    /// Whether an order-`n` tile is available. Panics on tiles of another order.
    pub fn is_available(&self, tile: &Tile) -> bool {
        assert_eq!(tile.order(), self.order, "tile {tile} has the wrong order");
        self.get(tile.index())
    }

    pub fn count_available(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    pub fn available_tiles(&self) -> Vec<Tile> {
        enumerate_tiles(self.order).filter(|t| self.get(t.index())).collect()
    }

    /// The image configuration under a tile permutation `perm`:
    /// `perm(t)` is available in the result iff `t` is available here.
    pub fn permuted(&self, perm: impl Fn(&Tile) -> Tile) -> Result<Self> {
        let mut words = vec![0u64; self.words.len()];
        for tile in enumerate_tiles(self.order) {
            if self.get(tile.index()) {
                let k = perm(&tile).index() as usize;
                words[k / 64] |= 1 << (k % 64);
            }
        }
        Self::from_words(self.order, words)
    }

    /// The configuration seen inside `tile`, rescaled to the unit square.
    ///
    /// Tiles of order `n` inside a tile of order `k` correspond affinely to
    /// order-`(n-k)` tiles of the unit square, so tileability of `tile` here
    /// equals tileability of the unit square in the result.
    pub fn restrict(&self, tile: &Tile) -> Result<Self> {
        if tile.order() > self.order {
            return Err(Error::OrderMismatch(format!(
                "tile {tile} has order above the configuration order {}",
                self.order
            )));
        }
        if *tile == Tile::UNIT {
            return Ok(self.clone());
        }
        let m = self.order - tile.order();
        Self::from_fn(m, |sub| {
            let outer = Tile {
                i: tile.i + sub.i,
                j: tile.j + sub.j,
                a: (tile.a << sub.i) | sub.a,
                b: (tile.b << sub.j) | sub.b,
            };
            self.get(outer.index())
        })
    }

    pub fn to_text(&self) -> String {
        let nbytes = self.len().div_ceil(8) as usize;
        let bytes: Vec<u8> = self.words.iter().flat_map(|w| w.to_le_bytes()).take(nbytes).collect();
        format!("{}\n{}\n", self.order, hex::encode(bytes))
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let order: u32 = lines
            .next()
            .ok_or_else(|| Error::Config("missing order line".into()))?
            .parse()
            .map_err(|e| Error::Config(format!("bad order: {e}")))?;
        check_order(order)?;
        let digits: String = lines.collect();
        let bytes = hex::decode(&digits).map_err(|e| Error::Config(format!("bad hex: {e}")))?;
        let len = tile_count(order);
        if bytes.len() as u64 != len.div_ceil(8) {
            return Err(Error::Config(format!(
                "order {order} needs {} hex bytes, got {}",
                len.div_ceil(8),
                bytes.len()
            )));
        }
        if !len.is_multiple_of(8) && bytes[bytes.len() - 1] >> (len % 8) != 0 {
            return Err(Error::Config("nonzero padding bits".into()));
        }
        let mut words = vec![0u64; word_count(len)];
        for (k, byte) in bytes.iter().enumerate() {
            words[k / 8] |= u64::from(*byte) << (8 * (k % 8));
        }
        Self::from_words(order, words)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = ConfigJson { order: self.order, available: self.available_tiles() };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        match serde_json::from_str::<ConfigJsonInput>(text)? {
            ConfigJsonInput::Object(doc) => Self::from_available_tiles(doc.order, &doc.available),
            ConfigJsonInput::List(tiles) => {
                let first = tiles
                    .first()
                    .ok_or_else(|| Error::Config("empty tile list does not determine the order".into()))?;
                Self::from_available_tiles(first.order(), &tiles)
            }
        }
    }

    /// Parses either serialization, choosing JSON when the text starts with `[` or `{`.
    pub fn parse(text: &str) -> Result<Self> {
        match text.trim_start().chars().next() {
            Some('[') | Some('{') => Self::from_json(text),
            _ => Self::from_text(text),
        }
    }
}
