//! Dyadic tile geometry.
//!
//! A tile `(i, j, a, b)` is the closed rectangle
//! `[a/2^i, (a+1)/2^i] x [b/2^j, (b+1)/2^j]` inside the unit square. Its order
//! is `i + j` and its shape is the pair `(i, j)`. Small `i` means a wide, flat
//! ("horizontal") tile; small `j` a tall, thin ("vertical") one.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest order supported by default. Positions and tile indices stay well
/// inside 64 bits; memory for `(n+1)·2^n` availability bits is the practical
/// limit long before that.
pub const MAX_ORDER: u32 = 30;

/// Hard ceiling for the `DYADIC_MAX_ORDER` override: `(n+1)·2^n` must fit in a `u64`.
const ABSOLUTE_MAX_ORDER: u32 = 58;

/// The effective order limit: `DYADIC_MAX_ORDER` if set and valid, else [`MAX_ORDER`].
pub fn max_order() -> u32 {
    static LIMIT: OnceLock<u32> = OnceLock::new();
    *LIMIT.get_or_init(|| {
        std::env::var("DYADIC_MAX_ORDER")
            .ok()
            .and_then(|v| v.trim().parse::<u32>().ok())
            .map(|v| v.min(ABSOLUTE_MAX_ORDER))
            .unwrap_or(MAX_ORDER)
    })
}

pub(crate) fn check_order(order: u32) -> Result<()> {
    let max = max_order();
    if order > max {
        return Err(Error::OrderTooLarge { order, max });
    }
    Ok(())
}

/// Number of order-`n` tiles, `(n+1)·2^n`.
pub fn tile_count(n: u32) -> u64 {
    (u64::from(n) + 1) << n
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tile {
    pub i: u32,
    pub j: u32,
    pub a: u64,
    pub b: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            _ => Err(Error::Parse(format!("unknown axis {s:?}"))),
        }
    }
}

impl Tile {
    pub const UNIT: Tile = Tile { i: 0, j: 0, a: 0, b: 0 };

    pub fn new(i: u32, j: u32, a: u64, b: u64) -> Result<Self> {
        if i > 62 || j > 62 || a >> i != 0 || b >> j != 0 {
            return Err(Error::InvalidTile(format!("{i},{j},{a},{b}")));
        }
        Ok(Tile { i, j, a, b })
    }

    pub fn order(&self) -> u32 {
        self.i + self.j
    }

    pub fn shape(&self) -> (u32, u32) {
        (self.i, self.j)
    }

    /// Canonical index among tiles of the same order: shape-major, then `a`, then `b`.
    pub fn index(&self) -> u64 {
        (u64::from(self.i) << self.order()) | (self.a << self.j) | self.b
    }

    pub fn from_index(order: u32, value: u64) -> Result<Self> {
        if value >= tile_count(order) {
            return Err(Error::OutOfRange(format!("tile index {value} for order {order}")));
        }
        let i = (value >> order) as u32;
        let j = order - i;
        let rest = value & ((1u64 << order) - 1);
        Ok(Tile { i, j, a: rest >> j, b: rest & ((1u64 << j) - 1) })
    }

    /// Horizontal children (split by a horizontal cut: bottom, top), then
    /// vertical children (left, right).
    pub fn children(&self) -> ([Tile; 2], [Tile; 2]) {
        let Tile { i, j, a, b } = *self;
        (
            [Tile { i, j: j + 1, a, b: 2 * b }, Tile { i, j: j + 1, a, b: 2 * b + 1 }],
            [Tile { i: i + 1, j, a: 2 * a, b }, Tile { i: i + 1, j, a: 2 * a + 1, b }],
        )
    }

    pub fn horizontal_children(&self) -> [Tile; 2] {
        self.children().0
    }

    pub fn vertical_children(&self) -> [Tile; 2] {
        self.children().1
    }

    /// The tile having `self` as a vertical child.
    pub fn horizontal_parent(&self) -> Option<Tile> {
        (self.i >= 1).then(|| Tile { i: self.i - 1, j: self.j, a: self.a >> 1, b: self.b })
    }

    /// The tile having `self` as a horizontal child.
    pub fn vertical_parent(&self) -> Option<Tile> {
        (self.j >= 1).then(|| Tile { i: self.i, j: self.j - 1, a: self.a, b: self.b >> 1 })
    }

    pub fn parents(&self) -> (Option<Tile>, Option<Tile>) {
        (self.horizontal_parent(), self.vertical_parent())
    }

    /// Same-order tiles whose union with `self` is a tile of one lower order.
    pub fn friends(&self) -> Result<Vec<Tile>> {
        if self.order() == 0 {
            return Err(Error::NoFriends);
        }
        let mut out = Vec::with_capacity(2);
        if self.i >= 1 {
            out.push(Tile { a: self.a ^ 1, ..*self });
        }
        if self.j >= 1 {
            out.push(Tile { b: self.b ^ 1, ..*self });
        }
        Ok(out)
    }

    /// Whether `self ⊇ other` as closed sets.
    pub fn contains(&self, other: &Tile) -> bool {
        self.i <= other.i
            && self.j <= other.j
            && other.a >> (other.i - self.i) == self.a
            && other.b >> (other.j - self.j) == self.b
    }

    /// Whether the open rectangles overlap. Dyadic intervals are either nested
    /// or have disjoint interiors, so this is nesting on both axes.
    pub fn interiors_intersect(&self, other: &Tile) -> bool {
        nested(self.i, self.a, other.i, other.a) && nested(self.j, self.b, other.j, other.b)
    }

    /// The closed intersection when the interiors overlap; it is always a dyadic tile.
    pub fn intersection(&self, other: &Tile) -> Option<Tile> {
        if !self.interiors_intersect(other) {
            return None;
        }
        let (i, a) = if self.i >= other.i { (self.i, self.a) } else { (other.i, other.a) };
        let (j, b) = if self.j >= other.j { (self.j, self.b) } else { (other.j, other.b) };
        Some(Tile { i, j, a, b })
    }

    /// Same order, overlapping interiors, and the intersection has order one higher.
    pub fn adjacent(&self, other: &Tile) -> bool {
        self.order() == other.order() && self.i.abs_diff(other.i) == 1 && self.interiors_intersect(other)
    }

    /// Apply the map that flips the `k`-th binary digit (1-based) of the given
    /// coordinate. Tiles that do not constrain that digit are fixed.
    pub fn digit_flip(&self, axis: Axis, k: u32) -> Result<Tile> {
        if k < 1 {
            return Err(Error::DigitPosition(k));
        }
        let mut t = *self;
        match axis {
            Axis::X if k <= t.i => t.a ^= 1 << (t.i - k),
            Axis::Y if k <= t.j => t.b ^= 1 << (t.j - k),
            _ => {}
        }
        Ok(t)
    }
}

fn nested(d1: u32, p1: u64, d2: u32, p2: u64) -> bool {
    if d1 <= d2 {
        p2 >> (d2 - d1) == p1
    } else {
        p1 >> (d1 - d2) == p2
    }
}

/// All order-`n` tiles in ascending index order.
pub fn enumerate_tiles(n: u32) -> impl Iterator<Item = Tile> {
    (0..=n).flat_map(move |i| {
        let j = n - i;
        (0..1u64 << i).flat_map(move |a| (0..1u64 << j).map(move |b| Tile { i, j, a, b }))
    })
}

impl fmt::Display for Tile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.i, self.j, self.a, self.b)
    }
}

impl FromStr for Tile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || Error::Parse(format!("tile {s:?}: expected \"i,j,a,b\""));
        if parts.len() != 4 {
            return Err(bad());
        }
        let i = parts[0].parse().map_err(|_| bad())?;
        let j = parts[1].parse().map_err(|_| bad())?;
        let a = parts[2].parse().map_err(|_| bad())?;
        let b = parts[3].parse().map_err(|_| bad())?;
        Tile::new(i, j, a, b)
    }
}

impl Serialize for Tile {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Tile {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
