//! Sparsity patterns of the 1D operators over (level, cell) blocks:
//! "nested" pairs share support (one dyadic interval contains the other),
//! "touch" pairs additionally include supports meeting at a single point,
//! which carry interface-flux coupling.

use super::Bc1d;
use crate::sparse_space::{block1d_count, cells_at_level};

/// Support interval of a 1D block in units of the finest half-open grid.
fn support(level: usize, cell: usize) -> (usize, usize, usize) {
    // Returns (start, end, denominator) with the interval [start/denom, end/denom].
    let support_level = level.saturating_sub(1);
    let denom = 1usize << support_level;
    (cell, cell + 1, denom)
}

fn nested(a: (usize, usize, usize), b: (usize, usize, usize)) -> bool {
    // Scale both to the finer denominator and test containment.
    let denom = a.2.max(b.2);
    let (a0, a1) = (a.0 * (denom / a.2), a.1 * (denom / a.2));
    let (b0, b1) = (b.0 * (denom / b.2), b.1 * (denom / b.2));
    (a0 <= b0 && b1 <= a1) || (b0 <= a0 && a1 <= b1)
}

fn adjacent(a: (usize, usize, usize), b: (usize, usize, usize), periodic: bool) -> bool {
    let denom = a.2.max(b.2);
    let (a0, a1) = (a.0 * (denom / a.2), a.1 * (denom / a.2));
    let (b0, b1) = (b.0 * (denom / b.2), b.1 * (denom / b.2));
    if a1 == b0 || b1 == a0 {
        return true;
    }
    if periodic {
        // Supports meeting across the wrap point 0 == 1.
        (a0 == 0 && b1 == denom) || (b0 == 0 && a1 == denom)
    } else {
        false
    }
}

/// List of 1D blocks as (level, cell) in index order.
pub fn block1d_list(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(block1d_count(n));
    for l in 0..=n {
        for j in 0..cells_at_level(l) {
            out.push((l, j));
        }
    }
    out
}

/// A symmetric pair relation over 1D blocks with dense pair lookup.
pub struct Pattern1d {
    pub nblk: usize,
    /// (test block, trial block) pairs, sorted.
    pub pairs: Vec<(u16, u16)>,
    index: Vec<i32>,
    /// partners[b] = sorted blocks paired with b.
    pub partners: Vec<Vec<u16>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Nested,
    Touch,
}

impl Pattern1d {
    pub fn build(n: usize, relation: Relation, bc: Bc1d) -> Self {
        let blocks = block1d_list(n);
        let nblk = blocks.len();
        let periodic = bc == Bc1d::Periodic;
        let mut pairs = Vec::new();
        let mut partners = vec![Vec::new(); nblk];
        for (bi, &(la, ja)) in blocks.iter().enumerate() {
            let sa = support(la, ja);
            for (bj, &(lb, jb)) in blocks.iter().enumerate() {
                let sb = support(lb, jb);
                let keep = match relation {
                    Relation::Nested => nested(sa, sb),
                    Relation::Touch => nested(sa, sb) || adjacent(sa, sb, periodic),
                };
                if keep {
                    pairs.push((bi as u16, bj as u16));
                    partners[bi].push(bj as u16);
                }
            }
        }
        let mut index = vec![-1i32; nblk * nblk];
        for (pi, &(a, b)) in pairs.iter().enumerate() {
            index[a as usize * nblk + b as usize] = pi as i32;
        }
        Pattern1d {
            nblk,
            pairs,
            index,
            partners,
        }
    }

    #[inline]
    pub fn pair_index(&self, test_blk: u16, trial_blk: u16) -> Option<usize> {
        let v = self.index[test_blk as usize * self.nblk + trial_blk as usize];
        if v >= 0 {
            Some(v as usize)
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_list_matches_index_helper() {
        for n in 0..=6 {
            let list = block1d_list(n);
            assert_eq!(list.len(), block1d_count(n));
            for (idx, &(l, j)) in list.iter().enumerate() {
                assert_eq!(crate::sparse_space::block1d_index(l, j), idx);
            }
        }
    }

    #[test]
    fn nested_pattern_is_symmetric_and_contains_diagonal() {
        let p = Pattern1d::build(4, Relation::Nested, Bc1d::Periodic);
        for b in 0..p.nblk {
            assert!(p.pair_index(b as u16, b as u16).is_some());
        }
        for &(a, b) in &p.pairs {
            assert!(p.pair_index(b, a).is_some());
        }
    }

    #[test]
    fn touch_includes_periodic_wrap_neighbors() {
        let n = 3;
        let p_per = Pattern1d::build(n, Relation::Touch, Bc1d::Periodic);
        let p_zero = Pattern1d::build(n, Relation::Touch, Bc1d::ZeroExterior);
        // Finest-level first and last blocks touch only across the wrap.
        let first = crate::sparse_space::block1d_index(n, 0) as u16;
        let last = crate::sparse_space::block1d_index(n, cells_at_level(n) - 1) as u16;
        assert!(p_per.pair_index(first, last).is_some());
        assert!(p_zero.pair_index(first, last).is_none());
    }

    #[test]
    fn level_zero_and_one_share_support() {
        let p = Pattern1d::build(3, Relation::Nested, Bc1d::ZeroExterior);
        let b0 = crate::sparse_space::block1d_index(0, 0) as u16;
        let b1 = crate::sparse_space::block1d_index(1, 0) as u16;
        assert!(p.pair_index(b0, b1).is_some());
        assert!(p.pair_index(b1, b0).is_some());
    }
}
