//! The assembled transport operator: tensor-product terms over cached
//! hierarchical interaction lists.
//!
//! Each separable velocity term contributes one "flux-direction" operator
//! (weighted stiffness minus central flux) tensored with weighted mass
//! matrices, plus a jump dissipation term. Interaction lists enumerate the
//! block pairs whose supports overlap (or touch in the flux dimension) in
//! every dimension; terms sharing a pattern signature share one list.

use rayon::prelude::*;
use std::sync::Arc;

use super::pattern::{Pattern1d, Relation};
use super::tables::{
    assemble_dissipation, assemble_flux_dir, assemble_mass, CellTables, FactorSamples, Mat1d,
};
use super::{Bc1d, BoundarySpec, Factor1d, FluxSpec, TimeFactor, VelocityField};
use crate::error::{Error, Result};
use crate::function1d::Function1d;
use crate::sparse_space::{block1d_index, SparseGridFunction, SparseSpace};

const MAX_BLOCK: usize = 256;

#[derive(Clone)]
enum Lambda {
    /// coef * g(t)
    Timed { scale: f64, g: TimeFactor },
    /// -|coef * g(t)| / 2 (upwind dissipation)
    AbsHalfNeg { scale: f64, g: TimeFactor },
    /// -alpha_dim(t) / 2 (global Lax-Friedrichs dissipation)
    LfAlpha { dim: usize },
}

/// Recipe for one assembled 1D matrix so it can be rebuilt when a factor
/// changes (electric-field coupling re-assembles per stage).
struct MatSlot {
    component: usize,
    dim: usize,
    kind: MatKind,
    mat: Mat1d,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MatKind {
    Mass,
    MassAbs,
    FluxDir,
    DissipationAbs,
    DissipationUnit,
}

struct Term {
    lambda: Lambda,
    /// Per dimension: index into `mats`, or usize::MAX for identity.
    mats: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum PatKind {
    Ident,
    Nested,
    Touch,
}

struct PairEntry {
    src: u32,
    dst: u32,
    pair_idx: [u32; 4],
}

struct Pass {
    sig: Vec<PatKind>,
    terms: Vec<Term>,
    entries: Vec<PairEntry>,
    /// Ranges of `entries` sharing one destination block.
    rows: Vec<(u32, u32)>,
}

/// Semi-discrete right-hand side R(u) for one (space, field, flux, bc).
pub struct TransportOperator {
    space: Arc<SparseSpace>,
    field: VelocityField,
    flux: FluxSpec,
    bc: BoundarySpec,
    tables: CellTables,
    nested: Arc<Pattern1d>,
    touch: Vec<Arc<Pattern1d>>,
    mats: Vec<MatSlot>,
    passes: Vec<Pass>,
}

impl TransportOperator {
    pub fn new(
        space: Arc<SparseSpace>,
        field: VelocityField,
        flux: FluxSpec,
        bc: BoundarySpec,
    ) -> Result<Self> {
        let d = space.dim();
        if field.dim() != d || bc.0.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "field dim {} / bc dim {} vs space dim {d}",
                field.dim(),
                bc.0.len()
            )));
        }
        if flux == FluxSpec::Upwind {
            for (m, comp) in field.components.iter().enumerate() {
                if comp.len() > 1 {
                    return Err(Error::UnsupportedFlux(format!(
                        "upwind flux needs a single separable term per component; \
                         component {m} has {}",
                        comp.len()
                    )));
                }
            }
        }
        if space.block_len() > MAX_BLOCK {
            return Err(Error::DimensionMismatch(format!(
                "coefficient block size {} exceeds operator limit {MAX_BLOCK}",
                space.block_len()
            )));
        }
        let n = space.max_level();
        let tables = CellTables::build(space.basis(), n);
        let nested = Arc::new(Pattern1d::build(n, Relation::Nested, Bc1d::ZeroExterior));
        let touch: Vec<Arc<Pattern1d>> = (0..d)
            .map(|m| Arc::new(Pattern1d::build(n, Relation::Touch, bc.0[m])))
            .collect();

        let mut op = TransportOperator {
            space,
            field,
            flux,
            bc,
            tables,
            nested,
            touch,
            mats: Vec::new(),
            passes: Vec::new(),
        };
        op.build_terms()?;
        op.build_pair_lists();
        Ok(op)
    }

    pub fn space(&self) -> &Arc<SparseSpace> {
        &self.space
    }

    pub fn field(&self) -> &VelocityField {
        &self.field
    }

    fn add_mat(&mut self, component: usize, dim: usize, kind: MatKind) -> usize {
        let factor = &self.field.components[component]
            .first()
            .map(|t| t.factors[dim].clone())
            .unwrap_or(Factor1d::One);
        let mat = self.assemble(kind, dim, factor);
        self.mats.push(MatSlot {
            component,
            dim,
            kind,
            mat,
        });
        self.mats.len() - 1
    }

    fn add_mat_for_term(
        &mut self,
        component: usize,
        term: usize,
        dim: usize,
        kind: MatKind,
    ) -> usize {
        let factor = self.field.components[component][term].factors[dim].clone();
        let mat = self.assemble(kind, dim, &factor);
        self.mats.push(MatSlot {
            component,
            dim,
            kind,
            mat,
        });
        self.mats.len() - 1
    }

    fn assemble(&self, kind: MatKind, dim: usize, factor: &Factor1d) -> Mat1d {
        match kind {
            MatKind::Mass => {
                let s = FactorSamples::sample(factor, &self.tables, false);
                assemble_mass(&self.tables, &self.nested, &s)
            }
            MatKind::MassAbs => {
                let s = FactorSamples::sample(factor, &self.tables, true);
                assemble_mass(&self.tables, &self.nested, &s)
            }
            MatKind::FluxDir => {
                let s = FactorSamples::sample(factor, &self.tables, false);
                assemble_flux_dir(&self.tables, &self.touch[dim], &s, self.bc.0[dim])
            }
            MatKind::DissipationAbs => {
                let s = FactorSamples::sample(factor, &self.tables, true);
                assemble_dissipation(&self.tables, &self.touch[dim], &s, self.bc.0[dim])
            }
            MatKind::DissipationUnit => {
                let s = FactorSamples::sample(&Factor1d::One, &self.tables, false);
                assemble_dissipation(&self.tables, &self.touch[dim], &s, self.bc.0[dim])
            }
        }
    }

    fn build_terms(&mut self) -> Result<()> {
        let d = self.space.dim();
        let mut staged: Vec<(Vec<PatKind>, Term)> = Vec::new();
        for m in 0..d {
            for r in 0..self.field.components[m].len() {
                let term = self.field.components[m][r].clone();
                if term.coef == 0.0 {
                    continue;
                }
                // Advection + central flux part.
                let mut sig = vec![PatKind::Ident; d];
                let mut mats = vec![usize::MAX; d];
                sig[m] = PatKind::Touch;
                mats[m] = self.add_mat_for_term(m, r, m, MatKind::FluxDir);
                for dim in 0..d {
                    if dim != m && !term.factors[dim].is_one() {
                        sig[dim] = PatKind::Nested;
                        mats[dim] = self.add_mat_for_term(m, r, dim, MatKind::Mass);
                    }
                }
                staged.push((
                    sig,
                    Term {
                        lambda: Lambda::Timed {
                            scale: term.coef,
                            g: term.time.clone(),
                        },
                        mats,
                    },
                ));
                // Upwind dissipation: -1/2 |a.n| [u][v] with |a| factored.
                if self.flux == FluxSpec::Upwind {
                    let mut sig = vec![PatKind::Ident; d];
                    let mut mats = vec![usize::MAX; d];
                    sig[m] = PatKind::Touch;
                    mats[m] = self.add_mat_for_term(m, r, m, MatKind::DissipationAbs);
                    for dim in 0..d {
                        if dim != m && !term.factors[dim].is_one() {
                            sig[dim] = PatKind::Nested;
                            mats[dim] = self.add_mat_for_term(m, r, dim, MatKind::MassAbs);
                        }
                    }
                    staged.push((
                        sig,
                        Term {
                            lambda: Lambda::AbsHalfNeg {
                                scale: term.coef,
                                g: term.time.clone(),
                            },
                            mats,
                        },
                    ));
                }
            }
            // Global Lax-Friedrichs dissipation: one per dimension.
            if self.flux == FluxSpec::GlobalLaxFriedrichs
                && !self.field.components[m].is_empty()
            {
                let mut sig = vec![PatKind::Ident; d];
                let mut mats = vec![usize::MAX; d];
                sig[m] = PatKind::Touch;
                mats[m] = self.add_mat(m, m, MatKind::DissipationUnit);
                staged.push((
                    sig,
                    Term {
                        lambda: Lambda::LfAlpha { dim: m },
                        mats,
                    },
                ));
            }
        }
        // Group terms by pattern signature.
        let mut passes: Vec<Pass> = Vec::new();
        for (sig, term) in staged {
            if let Some(p) = passes.iter_mut().find(|p| p.sig == sig) {
                p.terms.push(term);
            } else {
                passes.push(Pass {
                    sig,
                    terms: vec![term],
                    entries: Vec::new(),
                    rows: Vec::new(),
                });
            }
        }
        self.passes = passes;
        Ok(())
    }

    fn build_pair_lists(&mut self) {
        let space = Arc::clone(&self.space);
        let d = space.dim();
        let n = space.max_level();
        let list1d = super::pattern::block1d_list(n);
        for pass in &mut self.passes {
            let mut entries: Vec<PairEntry> = Vec::new();
            for (src_idx, blk) in space.blocks().iter().enumerate() {
                let self_ids: Vec<u16> = (0..d)
                    .map(|m| block1d_index(blk.level[m] as usize, blk.cell[m] as usize) as u16)
                    .collect();
                // Candidate partner blocks per dimension.
                let lists: Vec<&[u16]> = (0..d)
                    .map(|m| match pass.sig[m] {
                        PatKind::Ident => std::slice::from_ref(&self_ids[m]),
                        PatKind::Nested => self.nested.partners[self_ids[m] as usize].as_slice(),
                        PatKind::Touch => self.touch[m].partners[self_ids[m] as usize].as_slice(),
                    })
                    .collect();
                let mut pick = vec![0usize; d];
                let mut level = vec![0u8; d];
                let mut cell = vec![0u32; d];
                'outer: loop {
                    let mut lvl_sum = 0usize;
                    for m in 0..d {
                        lvl_sum += list1d[lists[m][pick[m]] as usize].0;
                    }
                    if lvl_sum <= n {
                        for m in 0..d {
                            let (l, j) = list1d[lists[m][pick[m]] as usize];
                            level[m] = l as u8;
                            cell[m] = j as u32;
                        }
                        if let Some(dst_idx) = space.block_index(&level, &cell) {
                            let mut pair_idx = [0u32; 4];
                            for m in 0..d {
                                pair_idx[m] = match pass.sig[m] {
                                    PatKind::Ident => 0,
                                    PatKind::Nested => self
                                        .nested
                                        .pair_index(lists[m][pick[m]], self_ids[m])
                                        .expect("partner pair present")
                                        as u32,
                                    PatKind::Touch => self.touch[m]
                                        .pair_index(lists[m][pick[m]], self_ids[m])
                                        .expect("partner pair present")
                                        as u32,
                                };
                            }
                            entries.push(PairEntry {
                                src: src_idx as u32,
                                dst: dst_idx as u32,
                                pair_idx,
                            });
                        }
                    }
                    // Odometer.
                    let mut m = d;
                    loop {
                        if m == 0 {
                            break 'outer;
                        }
                        m -= 1;
                        pick[m] += 1;
                        if pick[m] < lists[m].len() {
                            break;
                        }
                        pick[m] = 0;
                        if m == 0 {
                            break 'outer;
                        }
                    }
                }
            }
            entries.sort_by_key(|e| (e.dst, e.src));
            let mut rows = Vec::new();
            let mut start = 0usize;
            while start < entries.len() {
                let mut end = start + 1;
                while end < entries.len() && entries[end].dst == entries[start].dst {
                    end += 1;
                }
                rows.push((start as u32, end as u32));
                start = end;
            }
            pass.entries = entries;
            pass.rows = rows;
        }
    }

    /// Replace the 1D factor of (component, dim) in place and re-assemble the
    /// matrices built from it. Patterns and pair lists are untouched.
    pub fn set_dg_factor(&mut self, component: usize, dim: usize, f: &Function1d) -> Result<()> {
        if self.field.components[component].len() != 1 {
            return Err(Error::UnsupportedFlux(
                "dynamic factors need single-term components".into(),
            ));
        }
        self.field.components[component][0].factors[dim] = Factor1d::Dg(f.clone());
        let factor = Factor1d::Dg(f.clone());
        for slot in &mut self.mats {
            if slot.component == component && slot.dim == dim {
                slot.mat = match slot.kind {
                    MatKind::Mass => {
                        let s = FactorSamples::sample(&factor, &self.tables, false);
                        assemble_mass(&self.tables, &self.nested, &s)
                    }
                    MatKind::MassAbs => {
                        let s = FactorSamples::sample(&factor, &self.tables, true);
                        assemble_mass(&self.tables, &self.nested, &s)
                    }
                    MatKind::FluxDir => {
                        let s = FactorSamples::sample(&factor, &self.tables, false);
                        assemble_flux_dir(&self.tables, &self.touch[dim], &s, self.bc.0[dim])
                    }
                    MatKind::DissipationAbs => {
                        let s = FactorSamples::sample(&factor, &self.tables, true);
                        assemble_dissipation(&self.tables, &self.touch[dim], &s, self.bc.0[dim])
                    }
                    MatKind::DissipationUnit => continue,
                };
            }
        }
        Ok(())
    }

    /// Apply R to `u` at time `t`.
    pub fn apply(&self, u: &SparseGridFunction, t: f64) -> SparseGridFunction {
        let space = &self.space;
        let d = space.dim();
        let kp = space.degree() + 1;
        let blen = space.block_len();
        debug_assert!(blen <= MAX_BLOCK);
        let alpha = if self
            .passes
            .iter()
            .any(|p| p.terms.iter().any(|t| matches!(t.lambda, Lambda::LfAlpha { .. })))
        {
            super::compute_alpha(&self.field, t, space.max_level(), space.degree())
        } else {
            vec![0.0; d]
        };
        let mut out = SparseGridFunction::zeros(Arc::clone(space));
        let src_data = u.coeffs();
        for pass in &self.passes {
            // Evaluate term scalings once.
            let lambdas: Vec<f64> = pass
                .terms
                .iter()
                .map(|term| match &term.lambda {
                    Lambda::Timed { scale, g } => scale * g.eval(t),
                    Lambda::AbsHalfNeg { scale, g } => -0.5 * (scale * g.eval(t)).abs(),
                    Lambda::LfAlpha { dim } => -0.5 * alpha[*dim],
                })
                .collect();
            let out_ptr = SendPtr(out.coeffs_mut().as_mut_ptr());
            pass.rows.par_iter().for_each(|&(start, end)| {
                let _ = &out_ptr;
                let mut acc = [0.0f64; MAX_BLOCK];
                let mut buf_a = [0.0f64; MAX_BLOCK];
                let mut buf_b = [0.0f64; MAX_BLOCK];
                let dst = pass.entries[start as usize].dst as usize;
                for e in &pass.entries[start as usize..end as usize] {
                    let src = &src_data[e.src as usize * blen..(e.src as usize + 1) * blen];
                    for (term, &lambda) in pass.terms.iter().zip(&lambdas) {
                        if lambda == 0.0 {
                            continue;
                        }
                        buf_a[..blen].copy_from_slice(src);
                        let mut cur = &mut buf_a;
                        let mut nxt = &mut buf_b;
                        for m in 0..d {
                            if term.mats[m] == usize::MAX {
                                continue;
                            }
                            let mat = &self.mats[term.mats[m]].mat;
                            let small = mat.block(e.pair_idx[m] as usize);
                            contract_dim(d, kp, m, small, &cur[..blen], &mut nxt[..blen]);
                            std::mem::swap(&mut cur, &mut nxt);
                        }
                        for i in 0..blen {
                            acc[i] += lambda * cur[i];
                        }
                    }
                }
                // Rows have unique destinations within a pass.
                unsafe {
                    let dst_slice =
                        std::slice::from_raw_parts_mut(out_ptr.0.add(dst * blen), blen);
                    for i in 0..blen {
                        dst_slice[i] += acc[i];
                    }
                }
            });
        }
        out
    }

    /// Number of interaction-list entries (diagnostic).
    pub fn pair_entries(&self) -> usize {
        self.passes.iter().map(|p| p.entries.len()).sum()
    }
}

#[derive(Clone, Copy)]
struct SendPtr(*mut f64);
// Rows within a pass write disjoint destination blocks.
unsafe impl Send for SendPtr {}
unsafe impl Sync for SendPtr {}

/// out[.., c, ..] = sum_b mat[c*kp+b] * input[.., b, ..] along dimension m.
#[inline]
fn contract_dim(d: usize, kp: usize, m: usize, mat: &[f64], input: &[f64], out: &mut [f64]) {
    let stride = kp.pow((d - 1 - m) as u32);
    let outer = kp.pow(m as u32);
    for o in 0..outer {
        let obase = o * kp * stride;
        for s in 0..stride {
            let base = obase + s;
            for c in 0..kp {
                let mut acc = 0.0;
                let mrow = &mat[c * kp..(c + 1) * kp];
                for (b, &mv) in mrow.iter().enumerate() {
                    acc += mv * input[base + b * stride];
                }
                out[base + c * stride] = acc;
            }
        }
    }
}
