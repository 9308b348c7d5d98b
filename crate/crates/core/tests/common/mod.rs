//! Brute-force oracles shared by the integration tests. They use only the tile
//! geometry, never the tileability table.
#![allow(dead_code)]

use dyadic_core::{enumerate_tiles, AvailabilityConfig, Tile};
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Cells of the `2^n × 2^n` grid covered by `t`, as a bitmask (n ≤ 3).
pub fn cell_mask(t: &Tile, n: u32) -> u64 {
    assert!(n <= 3);
    let side = 1u64 << n;
    let (w, h) = (side >> t.i, side >> t.j);
    let (x0, y0) = (t.a * w, t.b * h);
    let mut mask = 0u64;
    for y in y0..y0 + h {
        for x in x0..x0 + w {
            mask |= 1 << (y * side + x);
        }
    }
    mask
}

fn search(target: u64, covered: u64, pieces: &[u64], count_all: bool) -> u64 {
    if covered == target {
        return 1;
    }
    let first = (target & !covered).trailing_zeros();
    let mut total = 0;
    for &p in pieces {
        if p >> first & 1 == 1 && p & covered == 0 {
            total += search(target, covered | p, pieces, count_all);
            if total > 0 && !count_all {
                return total;
            }
        }
    }
    total
}

/// Exhaustive search for a set of available order-`n` tiles tiling `target`.
pub fn brute_tileable(target: &Tile, cfg: &AvailabilityConfig) -> bool {
    let n = cfg.order();
    let goal = cell_mask(target, n);
    let pieces: Vec<u64> = cfg.available_tiles().iter().map(|t| cell_mask(t, n)).filter(|m| m & !goal == 0).collect();
    search(goal, 0, &pieces, false) > 0
}

/// Number of tilings of the unit square by order-`n` tiles, by exhaustive search.
pub fn brute_count_tilings(n: u32) -> u64 {
    let pieces: Vec<u64> = enumerate_tiles(n).map(|t| cell_mask(&t, n)).collect();
    let goal = if n == 3 { u64::MAX } else { (1u64 << (1 << (2 * n))) - 1 };
    search(goal, 0, &pieces, true)
}

pub fn all_configs(n: u32) -> impl Iterator<Item = AvailabilityConfig> {
    let len = dyadic_core::tile::tile_count(n);
    assert!(len <= 16);
    (0..1u64 << len).map(move |m| AvailabilityConfig::from_words(n, vec![m]).unwrap())
}

/// `P(unit square tileable)` at `p`, summed exactly over all configurations.
pub fn brute_tiling_probability(n: u32, p: &BigRational) -> BigRational {
    let q = BigRational::one() - p;
    let len = dyadic_core::tile::tile_count(n) as usize;
    all_configs(n)
        .filter(|c| brute_tileable(&Tile::UNIT, c))
        .map(|c| {
            let m = c.count_available() as usize;
            num_traits::pow(p.clone(), m) * num_traits::pow(q.clone(), len - m)
        })
        .fold(BigRational::zero(), |a, b| a + b)
}

/// 21 rational points spread over (0, 1).
pub fn sample_points() -> Vec<BigRational> {
    (1..=21).map(|k| BigRational::new((2 * k - 1).into(), 42.into())).collect()
}
