//! The sparse approximation space: index sets, degrees of freedom, and
//! coefficient containers for functions expanded in tensor-product
//! multiwavelets with |l|_1 <= N.

use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;

use crate::basis1d::{build_basis_table, Basis1dTable, Side};
use crate::error::{Error, Result};

/// Hierarchical level vector l identifying an increment space W_l.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<u8>);

impl MultiIndex {
    pub fn l1(&self) -> usize {
        self.0.iter().map(|&v| v as usize).sum()
    }

    pub fn linf(&self) -> usize {
        self.0.iter().map(|&v| v as usize).max().unwrap_or(0)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// Identifier of a single basis function: level, translation, polynomial
/// index per dimension (0-based, 0..=k).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasisId {
    pub level: Vec<u8>,
    pub cell: Vec<u32>,
    pub poly: Vec<u8>,
}

/// All level vectors with |l|_1 <= n in d dimensions, lexicographically
/// sorted; exactly C(n+d, d) entries.
pub fn enumerate_levels(n: usize, d: usize) -> Vec<MultiIndex> {
    assert!(d >= 1);
    let mut out = Vec::new();
    let mut current = vec![0u8; d];
    fn rec(out: &mut Vec<MultiIndex>, current: &mut Vec<u8>, pos: usize, remaining: usize) {
        if pos == current.len() - 1 {
            for v in 0..=remaining {
                current[pos] = v as u8;
                out.push(MultiIndex(current.clone()));
            }
            current[pos] = 0;
            return;
        }
        for v in 0..=remaining {
            current[pos] = v as u8;
            rec(out, current, pos + 1, remaining - v);
        }
        current[pos] = 0;
    }
    rec(&mut out, &mut current, 0, n);
    out.sort();
    out
}

/// Number of cells in the 1D increment block at level l: 2^{max(l-1,0)}.
pub fn cells_at_level(l: usize) -> usize {
    if l <= 1 {
        1
    } else {
        1usize << (l - 1)
    }
}

/// dim W_l^k: (k+1) modes per cell in the level-l increment block.
fn block_width(l: usize, k: usize) -> u64 {
    (cells_at_level(l) as u64) * (k as u64 + 1)
}

/// Total degrees of freedom of the sparse space with |l|_1 <= n.
pub fn dof_count(n: usize, k: usize, d: usize) -> u64 {
    enumerate_levels(n, d)
        .iter()
        .map(|mi| {
            mi.0.iter()
                .map(|&l| block_width(l as usize, k))
                .product::<u64>()
        })
        .sum()
}

/// Axis-aligned box domain with affine map to the reference cube [0,1]^d.
#[derive(Debug, Clone)]
pub struct Domain {
    pub lo: Vec<f64>,
    pub width: Vec<f64>,
}

impl Domain {
    pub fn unit(d: usize) -> Self {
        Domain {
            lo: vec![0.0; d],
            width: vec![1.0; d],
        }
    }

    pub fn new(bounds: &[(f64, f64)]) -> Self {
        Domain {
            lo: bounds.iter().map(|b| b.0).collect(),
            width: bounds.iter().map(|b| b.1 - b.0).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.width.iter().product()
    }

    /// Physical coordinates from reference coordinates.
    pub fn physical(&self, xref: &[f64], out: &mut [f64]) {
        for m in 0..self.dim() {
            out[m] = self.lo[m] + self.width[m] * xref[m];
        }
    }

    /// Reference coordinates from physical; None if outside the box.
    pub fn reference(&self, x: &[f64]) -> Option<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        for m in 0..self.dim() {
            let r = (x[m] - self.lo[m]) / self.width[m];
            if !(-1e-12..=1.0 + 1e-12).contains(&r) {
                return None;
            }
            out[m] = r.clamp(0.0, 1.0);
        }
        Some(out)
    }
}

/// A level-cell pair in one dimension, the unit of coefficient blocking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Block1d {
    pub level: u8,
    pub cell: u32,
}

/// Index of a 1D block within the per-dimension enumeration
/// (level-major, cells in order); the level-0 block is index 0.
pub fn block1d_index(level: usize, cell: usize) -> usize {
    let base = if level == 0 { 0 } else { 1usize << (level - 1) };
    base + cell
}

/// Number of 1D blocks with level <= n.
pub fn block1d_count(n: usize) -> usize {
    1usize << n
}

/// A d-dimensional coefficient block: one level vector plus one cell vector,
/// holding a dense (k+1)^d sub-tensor of coefficients.
#[derive(Debug, Clone)]
pub struct Block {
    pub level: Vec<u8>,
    pub cell: Vec<u32>,
}

fn pack_key(level: &[u8], cell: &[u32]) -> u64 {
    let mut key = 0u64;
    for m in 0..level.len() {
        debug_assert!(level[m] < 16 && cell[m] < (1 << 12));
        key |= (((level[m] as u64) << 12) | cell[m] as u64) << (16 * m);
    }
    key
}

/// Shared immutable layout of the sparse approximation space.
#[derive(Debug)]
pub struct SparseSpace {
    n: usize,
    k: usize,
    d: usize,
    domain: Domain,
    basis: Arc<Basis1dTable>,
    blocks: Vec<Block>,
    lookup: HashMap<u64, u32>,
    levels: Vec<MultiIndex>,
}

impl SparseSpace {
    pub fn new(n: usize, k: usize, domain: Domain) -> Result<Arc<Self>> {
        let basis = Arc::new(build_basis_table(k)?);
        Self::with_basis(n, k, domain, basis)
    }

    pub fn with_basis(
        n: usize,
        k: usize,
        domain: Domain,
        basis: Arc<Basis1dTable>,
    ) -> Result<Arc<Self>> {
        if n >= 12 {
            return Err(Error::IndexOutOfRange(format!(
                "mesh level N={n} exceeds supported maximum 11"
            )));
        }
        let d = domain.dim();
        let levels = enumerate_levels(n, d);
        let mut blocks = Vec::new();
        let mut lookup = HashMap::new();
        for mi in &levels {
            let counts: Vec<usize> = mi.0.iter().map(|&l| cells_at_level(l as usize)).collect();
            let mut cell = vec![0u32; d];
            loop {
                lookup.insert(pack_key(&mi.0, &cell), blocks.len() as u32);
                blocks.push(Block {
                    level: mi.0.clone(),
                    cell: cell.clone(),
                });
                // Row-major odometer over cells.
                let mut m = d;
                loop {
                    if m == 0 {
                        break;
                    }
                    m -= 1;
                    cell[m] += 1;
                    if (cell[m] as usize) < counts[m] {
                        break;
                    }
                    cell[m] = 0;
                    if m == 0 {
                        break;
                    }
                }
                if cell.iter().all(|&c| c == 0) {
                    break;
                }
            }
        }
        Ok(Arc::new(SparseSpace {
            n,
            k,
            d,
            domain,
            basis,
            blocks,
            lookup,
            levels,
        }))
    }

    pub fn max_level(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn basis(&self) -> &Arc<Basis1dTable> {
        &self.basis
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn levels(&self) -> &[MultiIndex] {
        &self.levels
    }

    /// Coefficients per block, (k+1)^d.
    pub fn block_len(&self) -> usize {
        (self.k + 1).pow(self.d as u32)
    }

    pub fn block_index(&self, level: &[u8], cell: &[u32]) -> Option<usize> {
        self.lookup.get(&pack_key(level, cell)).map(|&i| i as usize)
    }

    pub fn dof(&self) -> usize {
        self.blocks.len() * self.block_len()
    }

    /// Flat coefficient index of a basis function.
    pub fn coeff_index(&self, id: &BasisId) -> Option<usize> {
        let b = self.block_index(&id.level, &id.cell)?;
        let kp = self.k + 1;
        let mut p = 0usize;
        for m in 0..self.d {
            p = p * kp + id.poly[m] as usize;
        }
        Some(b * self.block_len() + p)
    }

    /// Enumerate every BasisId in storage order.
    pub fn basis_ids(&self) -> Vec<BasisId> {
        let kp = self.k + 1;
        let mut out = Vec::with_capacity(self.dof());
        for blk in &self.blocks {
            let mut poly = vec![0u8; self.d];
            loop {
                out.push(BasisId {
                    level: blk.level.clone(),
                    cell: blk.cell.clone(),
                    poly: poly.clone(),
                });
                let mut m = self.d;
                loop {
                    if m == 0 {
                        break;
                    }
                    m -= 1;
                    poly[m] += 1;
                    if (poly[m] as usize) < kp {
                        break;
                    }
                    poly[m] = 0;
                    if m == 0 {
                        break;
                    }
                }
                if poly.iter().all(|&p| p == 0) {
                    break;
                }
            }
        }
        out
    }
}

/// A function in the sparse space: coefficients against the orthonormal
/// tensor multiwavelet basis on the reference cube.
#[derive(Debug, Clone)]
pub struct SparseGridFunction {
    space: Arc<SparseSpace>,
    coeffs: Vec<f64>,
}

impl SparseGridFunction {
    pub fn zeros(space: Arc<SparseSpace>) -> Self {
        let n = space.dof();
        SparseGridFunction {
            space,
            coeffs: vec![0.0; n],
        }
    }

    pub fn space(&self) -> &Arc<SparseSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn set(&mut self, id: &BasisId, value: f64) -> Result<()> {
        let idx = self
            .space
            .coeff_index(id)
            .ok_or_else(|| Error::IndexOutOfRange(format!("{id:?}")))?;
        self.coeffs[idx] = value;
        Ok(())
    }

    pub fn get(&self, id: &BasisId) -> Option<f64> {
        self.space.coeff_index(id).map(|i| self.coeffs[i])
    }

    pub fn scale(&mut self, a: f64) {
        for c in &mut self.coeffs {
            *c *= a;
        }
    }

    pub fn axpy(&mut self, a: f64, other: &Self) {
        debug_assert_eq!(self.coeffs.len(), other.coeffs.len());
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += a * y;
        }
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b)
            .sum()
    }

    /// L2 inner product on the physical domain (Parseval).
    pub fn inner_l2(&self, other: &Self) -> f64 {
        self.dot(other) * self.space.domain.volume()
    }

    /// Physical L2 norm by Parseval's identity.
    pub fn norm_l2(&self) -> f64 {
        self.inner_l2(self).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Point value at physical coordinates (right limits at breakpoints).
    pub fn eval_point(&self, x: &[f64]) -> Result<f64> {
        let xref = self
            .space
            .domain
            .reference(x)
            .ok_or_else(|| Error::PointOutsideDomain(x.to_vec()))?;
        Ok(self.eval_reference(&xref))
    }

    /// Point value at reference coordinates with explicit one-sided limits
    /// per dimension (for interface traces).
    pub fn eval_reference_sides(&self, xref: &[f64], sides: &[Side]) -> f64 {
        let sp = &self.space;
        let kp = sp.k + 1;
        let basis = &sp.basis;
        let mut total = 0.0;
        let mut vals = vec![0.0f64; sp.d * kp];
        let mut cell = vec![0u32; sp.d];
        for mi in &sp.levels {
            for m in 0..sp.d {
                let l = mi.0[m] as usize;
                let cells = cells_at_level(l);
                let scaled = xref[m] * cells as f64;
                let mut j = (scaled as usize).min(cells - 1);
                if sides[m] == Side::Left && scaled.fract() == 0.0 && scaled > 0.0 {
                    j = (scaled as usize - 1).min(cells - 1);
                }
                cell[m] = j as u32;
                for i in 0..kp {
                    vals[m * kp + i] = basis
                        .eval_1d_side(l, j, i, xref[m], sides[m])
                        .expect("index in range");
                }
            }
            let Some(b) = sp.block_index(&mi.0, &cell) else {
                continue;
            };
            let block = &self.coeffs[b * sp.block_len()..(b + 1) * sp.block_len()];
            let mut poly = vec![0usize; sp.d];
            for (flat, &c) in block.iter().enumerate() {
                if c != 0.0 {
                    let mut rem = flat;
                    for m in (0..sp.d).rev() {
                        poly[m] = rem % kp;
                        rem /= kp;
                    }
                    let mut prod = c;
                    for m in 0..sp.d {
                        prod *= vals[m * kp + poly[m]];
                    }
                    total += prod;
                }
            }
        }
        total
    }

    /// Point value at reference coordinates in [0,1]^d.
    pub fn eval_reference(&self, xref: &[f64]) -> f64 {
        let sp = &self.space;
        let kp = sp.k + 1;
        let basis = &sp.basis;
        let mut total = 0.0;
        let mut vals = vec![0.0f64; sp.d * kp];
        let mut cell = vec![0u32; sp.d];
        for mi in &sp.levels {
            // Locate the containing cell and tabulate 1D values per dim.
            for m in 0..sp.d {
                let l = mi.0[m] as usize;
                let cells = cells_at_level(l);
                let j = ((xref[m] * cells as f64) as usize).min(cells - 1);
                cell[m] = j as u32;
                for i in 0..kp {
                    let side = if xref[m] >= 1.0 { Side::Left } else { Side::Right };
                    vals[m * kp + i] = basis
                        .eval_1d_side(l, j, i, xref[m], side)
                        .expect("index in range");
                }
            }
            let Some(b) = sp.block_index(&mi.0, &cell) else {
                continue;
            };
            let block = &self.coeffs[b * sp.block_len()..(b + 1) * sp.block_len()];
            // Accumulate sum over the dense poly sub-tensor.
            let mut poly = vec![0usize; sp.d];
            for (flat, &c) in block.iter().enumerate() {
                if c != 0.0 {
                    let mut rem = flat;
                    for m in (0..sp.d).rev() {
                        poly[m] = rem % kp;
                        rem /= kp;
                    }
                    let mut prod = c;
                    for m in 0..sp.d {
                        prod *= vals[m * kp + poly[m]];
                    }
                    total += prod;
                }
            }
        }
        total
    }

    /// Reflect the function about the midpoint of dimension `dim`
    /// (x_dim -> lo + hi - x_dim). Exact in the basis.
    pub fn reflect_dim(&self, dim: usize) -> Self {
        let sp = &self.space;
        let kp = sp.k + 1;
        let (ml, mr) = sp.basis.wavelet_filters();
        // Wavelet reflection mixing matrix: R[i][i'] = <w_i(1-x), w_i'(x)>.
        let mut rw = vec![vec![0.0; kp]; kp];
        for i in 0..kp {
            for i2 in 0..kp {
                let mut s = 0.0;
                for q in 0..kp {
                    let parity = if q % 2 == 0 { 1.0 } else { -1.0 };
                    // w_i(1-x): left coeffs become parity-flipped right ones.
                    s += parity * mr[i][q] * ml[i2][q] + parity * ml[i][q] * mr[i2][q];
                }
                rw[i][i2] = s;
            }
        }
        let mut out = SparseGridFunction::zeros(Arc::clone(sp));
        let blen = sp.block_len();
        // Strides of the poly sub-tensor (row-major).
        let stride: Vec<usize> = (0..sp.d)
            .map(|m| kp.pow((sp.d - 1 - m) as u32))
            .collect();
        let mut level = vec![0u8; sp.d];
        let mut cell = vec![0u32; sp.d];
        for (bi, blk) in sp.blocks.iter().enumerate() {
            level.copy_from_slice(&blk.level);
            cell.copy_from_slice(&blk.cell);
            let l = blk.level[dim] as usize;
            let cells = cells_at_level(l);
            cell[dim] = (cells - 1 - blk.cell[dim] as usize) as u32;
            let ti = sp.block_index(&level, &cell).expect("mirrored block");
            let src = &self.coeffs[bi * blen..(bi + 1) * blen];
            let dst = &mut out.coeffs[ti * blen..(ti + 1) * blen];
            // Apply the per-level mixing matrix along `dim`.
            for flat in 0..blen {
                let i_dim = (flat / stride[dim]) % kp;
                let base = flat - i_dim * stride[dim];
                let mut acc = 0.0;
                for i2 in 0..kp {
                    let w = if l == 0 {
                        if i2 == i_dim {
                            if i_dim % 2 == 0 {
                                1.0
                            } else {
                                -1.0
                            }
                        } else {
                            0.0
                        }
                    } else {
                        rw[i_dim][i2]
                    };
                    if w != 0.0 {
                        acc += w * src[base + i2 * stride[dim]];
                    }
                }
                dst[flat] = acc;
            }
        }
        out
    }

    /// Write point samples on a uniform m x m grid to `w` for plotting.
    ///
    /// Header lines give dimension, N, k and time; each row then lists the
    /// d physical coordinates followed by the value. For d > 2 the grid
    /// spans dimensions `cut_dims` with the remaining coordinates fixed.
    pub fn write_snapshot(
        &self,
        w: &mut dyn Write,
        m: usize,
        time: f64,
        cut_dims: (usize, usize),
        fixed: &[f64],
    ) -> Result<()> {
        let sp = &self.space;
        writeln!(w, "dimension {}", sp.d)?;
        writeln!(w, "N {}", sp.n)?;
        writeln!(w, "k {}", sp.k)?;
        writeln!(w, "time {:.16e}", time)?;
        let (da, db) = cut_dims;
        let mut x = fixed.to_vec();
        debug_assert_eq!(x.len(), sp.d);
        for ia in 0..m {
            let fa = ia as f64 / (m - 1) as f64;
            x[da] = sp.domain.lo[da] + sp.domain.width[da] * fa;
            for ib in 0..m {
                let fb = ib as f64 / (m - 1) as f64;
                x[db] = sp.domain.lo[db] + sp.domain.width[db] * fb;
                let v = self.eval_point(&x)?;
                for xm in &x {
                    write!(w, "{:.16e} ", xm)?;
                }
                writeln!(w, "{:.16e}", v)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn binom(n: usize, r: usize) -> usize {
        let mut v = 1usize;
        for i in 0..r {
            v = v * (n - i) / (i + 1);
        }
        v
    }

    #[test]
    fn level_enumeration_counts() {
        let l = enumerate_levels(3, 2);
        assert_eq!(l.len(), 10);
        let l = enumerate_levels(0, 4);
        assert_eq!(l, vec![MultiIndex(vec![0, 0, 0, 0])]);
        let l = enumerate_levels(2, 3);
        assert_eq!(l.len(), 10);
        assert!(l.contains(&MultiIndex(vec![1, 1, 0])));
        // Sorted lexicographically.
        let mut sorted = l.clone();
        sorted.sort();
        assert_eq!(l, sorted);
        for n in 0..=6 {
            for d in 1..=4 {
                assert_eq!(enumerate_levels(n, d).len(), binom(n + d, d));
            }
        }
    }

    #[test]
    fn dof_counts_match_reported_tables() {
        assert_eq!(dof_count(3, 1, 2), 80);
        assert_eq!(dof_count(4, 2, 3), 2808);
        assert_eq!(dof_count(7, 3, 4), 1036288);
        for k in 1..=3 {
            for d in 1..=4 {
                assert_eq!(dof_count(0, k, d), ((k + 1) as u64).pow(d as u32));
            }
        }
    }

    #[test]
    fn one_dimensional_sparse_equals_full() {
        for n in 0..=6 {
            for k in 1..=3 {
                assert_eq!(dof_count(n, k, 1), (1u64 << n) * (k as u64 + 1));
            }
        }
    }

    #[test]
    fn dof_equals_enumeration_length() {
        for n in 0..=6 {
            for k in 1..=3 {
                for d in 1..=4 {
                    let space = SparseSpace::new(n, k, Domain::unit(d)).unwrap();
                    assert_eq!(space.dof() as u64, dof_count(n, k, d));
                    if space.dof() < 100_000 {
                        assert_eq!(space.basis_ids().len() as u64, dof_count(n, k, d));
                    }
                }
            }
        }
    }

    #[test]
    fn constant_function_evaluates_everywhere() {
        let space = SparseSpace::new(3, 1, Domain::unit(2)).unwrap();
        let mut u = SparseGridFunction::zeros(Arc::clone(&space));
        u.set(
            &BasisId {
                level: vec![0, 0],
                cell: vec![0, 0],
                poly: vec![0, 0],
            },
            2.5,
        )
        .unwrap();
        for &p in &[[0.1, 0.9], [0.5, 0.5], [0.999, 0.001]] {
            assert_relative_eq!(u.eval_point(&p).unwrap(), 2.5, epsilon = 1e-13);
        }
    }

    #[test]
    fn eval_matches_naive_sum_of_products() {
        let space = SparseSpace::new(4, 2, Domain::unit(2)).unwrap();
        let ids = space.basis_ids();
        let mut rng = StdRng::seed_from_u64(42);
        let mut u = SparseGridFunction::zeros(Arc::clone(&space));
        let chosen: Vec<usize> = (0..10).map(|_| rng.random_range(0..ids.len())).collect();
        for &c in &chosen {
            u.set(&ids[c], rng.random_range(-1.0..1.0)).unwrap();
        }
        let basis = space.basis();
        for _ in 0..25 {
            let x = [rng.random::<f64>(), rng.random::<f64>()];
            let direct = u.eval_point(&x).unwrap();
            let mut oracle = 0.0;
            for id in &ids {
                let c = u.get(id).unwrap();
                if c != 0.0 {
                    let mut prod = c;
                    for m in 0..2 {
                        prod *= basis
                            .eval_1d(id.level[m] as usize, id.cell[m] as usize, id.poly[m] as usize, x[m])
                            .unwrap();
                    }
                    oracle += prod;
                }
            }
            assert_abs_diff_eq!(direct, oracle, epsilon = 1e-13);
        }
    }

    #[test]
    fn point_outside_domain_is_error() {
        let space = SparseSpace::new(2, 1, Domain::new(&[(0.0, 2.0)])).unwrap();
        let u = SparseGridFunction::zeros(space);
        assert!(u.eval_point(&[2.5]).is_err());
        assert!(u.eval_point(&[1.5]).is_ok());
    }

    #[test]
    fn parseval_norm_simple_cases() {
        let space = SparseSpace::new(3, 2, Domain::unit(2)).unwrap();
        let u = SparseGridFunction::zeros(Arc::clone(&space));
        assert_eq!(u.norm_l2(), 0.0);
        let mut u = SparseGridFunction::zeros(Arc::clone(&space));
        u.set(
            &BasisId {
                level: vec![0, 0],
                cell: vec![0, 0],
                poly: vec![1, 0],
            },
            1.0,
        )
        .unwrap();
        assert_relative_eq!(u.norm_l2(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn reflection_mirrors_point_values_and_is_isometric() {
        let space = SparseSpace::new(4, 2, Domain::new(&[(0.0, 1.0), (-2.0, 2.0)])).unwrap();
        let ids = space.basis_ids();
        let mut rng = StdRng::seed_from_u64(7);
        let mut u = SparseGridFunction::zeros(Arc::clone(&space));
        for id in ids.iter().step_by(3) {
            u.set(id, rng.random_range(-1.0..1.0)).unwrap();
        }
        let r = u.reflect_dim(1);
        assert_relative_eq!(r.norm_l2(), u.norm_l2(), epsilon = 1e-12);
        for _ in 0..20 {
            let x = [rng.random::<f64>(), rng.random_range(-2.0..2.0)];
            let mirrored = [x[0], -x[1]];
            // Avoid breakpoints where one-sided limits differ.
            let a = r.eval_point(&x).unwrap();
            let b = u.eval_point(&mirrored).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }
}
