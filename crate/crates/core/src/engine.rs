//! Homological algebra over GF(2): ranks, homology, Gaussian cancellation,
//! and a streaming weight-layer reduction that never materializes the full
//! cube.
//!
//! Cancellation only ever removes differential entries between generators of
//! equal quantum grading (and, for the page-preserving variant, equal annular
//! weight), so every reduction is a filtered chain homotopy equivalence: it
//! preserves homology, filtration levels, and spectral-sequence pages.

use crate::diagram::LinkDiagram;
use crate::error::{Error, Result};
use crate::khovanov::{
    self, apply_edge, compress_label, crossing_points, edge_map, expand_label, free_circles,
    gradings, Complex, CubeVertex, Flavor, GenInfo, Reduction,
};
use crate::par;
use serde::Serialize;
use std::collections::BTreeMap;

// ---------------------------------------------------------------------------
// Dense GF(2) elimination

fn dense(bits: &[u32], words: usize) -> Vec<u64> {
    let mut v = vec![0u64; words];
    for &b in bits {
        v[(b >> 6) as usize] ^= 1u64 << (b & 63);
    }
    v
}

fn lowest_set(v: &[u64]) -> Option<usize> {
    v.iter()
        .enumerate()
        .find(|(_, w)| **w != 0)
        .map(|(i, w)| (i << 6) + w.trailing_zeros() as usize)
}

fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

fn set_bits(words: &[u64]) -> Vec<usize> {
    let mut out = Vec::new();
    for (i, &w) in words.iter().enumerate() {
        let mut w = w;
        while w != 0 {
            out.push((i << 6) + w.trailing_zeros() as usize);
            w &= w - 1;
        }
    }
    out
}

/// Incremental column echelonization with optional combination tracking.
struct Elim {
    words: usize,
    cwords: usize,
    /// Pivot index owned by each row, `u32::MAX` when none.
    pivot_of_row: Vec<u32>,
    pivot_cols: Vec<Vec<u64>>,
    pivot_combos: Vec<Vec<u64>>,
    track: bool,
    n_fed: usize,
    rank: usize,
    /// Combinations of fed columns that reduced to zero (kernel basis).
    kernel: Vec<Vec<u64>>,
}

impl Elim {
    fn new(rows: usize, n_cols_hint: usize, track: bool) -> Self {
        Elim {
            words: rows.div_ceil(64),
            cwords: n_cols_hint.div_ceil(64),
            pivot_of_row: vec![u32::MAX; rows],
            pivot_cols: Vec::new(),
            pivot_combos: Vec::new(),
            track,
            n_fed: 0,
            rank: 0,
            kernel: Vec::new(),
        }
    }

    /// Feeds one column; returns true when it was independent.
    fn feed(&mut self, col: &[u32]) -> bool {
        let mut v = dense(col, self.words);
        let mut combo = if self.track {
            let mut c = vec![0u64; self.cwords];
            c[self.n_fed >> 6] ^= 1u64 << (self.n_fed & 63);
            c
        } else {
            Vec::new()
        };
        self.n_fed += 1;
        loop {
            let Some(lead) = lowest_set(&v) else {
                if self.track {
                    self.kernel.push(combo);
                }
                return false;
            };
            let p = self.pivot_of_row[lead];
            if p == u32::MAX {
                self.pivot_of_row[lead] = self.pivot_cols.len() as u32;
                self.pivot_cols.push(v);
                if self.track {
                    self.pivot_combos.push(combo);
                }
                self.rank += 1;
                return true;
            }
            xor_into(&mut v, &self.pivot_cols[p as usize]);
            if self.track {
                xor_into(&mut combo, &self.pivot_combos[p as usize]);
            }
        }
    }

    /// Reduces a right-hand side; `Some(column combination)` when solvable.
    fn solve(&self, rhs: &[u32]) -> Option<Vec<usize>> {
        debug_assert!(self.track);
        let mut v = dense(rhs, self.words);
        let mut combo = vec![0u64; self.cwords];
        while let Some(lead) = lowest_set(&v) {
            let p = self.pivot_of_row[lead];
            if p == u32::MAX {
                return None;
            }
            xor_into(&mut v, &self.pivot_cols[p as usize]);
            xor_into(&mut combo, &self.pivot_combos[p as usize]);
        }
        Some(set_bits(&combo))
    }
}

// ---------------------------------------------------------------------------
// Sparse matrices

/// A sparse GF(2) matrix stored column-major: `cols[j]` lists the rows with a
/// nonzero entry, sorted ascending.
#[derive(Debug, Clone)]
pub struct SparseBitMatrix {
    pub rows: usize,
    pub cols: Vec<Vec<u32>>,
}

impl SparseBitMatrix {
    pub fn new(rows: usize, cols: Vec<Vec<u32>>) -> Self {
        SparseBitMatrix { rows, cols }
    }

    pub fn rank(&self) -> usize {
        let mut e = Elim::new(self.rows, self.cols.len(), false);
        for col in &self.cols {
            e.feed(col);
        }
        e.rank
    }

    /// Solves `M x = rhs`; returns the indices of the columns to sum.
    pub fn solve(&self, rhs: &[u32]) -> Option<Vec<usize>> {
        let mut e = Elim::new(self.rows, self.cols.len(), true);
        for col in &self.cols {
            e.feed(col);
        }
        e.solve(rhs)
    }

    /// Basis of the kernel, each vector given by the column indices it sums.
    pub fn kernel_basis(&self) -> Vec<Vec<usize>> {
        let mut e = Elim::new(self.rows, self.cols.len(), true);
        for col in &self.cols {
            e.feed(col);
        }
        e.kernel.iter().map(|c| set_bits(c)).collect()
    }
}

/// Rank over GF(2).
pub fn rank_f2(m: &SparseBitMatrix) -> usize {
    m.rank()
}

// ---------------------------------------------------------------------------
// Gaussian cancellation

/// Eligibility of a differential entry as a cancellation pivot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Pivot {
    /// Equal quantum grading (plain homotopy reduction).
    QEqual,
    /// Equal quantum grading and equal annular weight (additionally preserves
    /// the pages of the annular filtration).
    QAEqual,
}

fn sorted_insert(v: &mut Vec<u32>, x: u32) {
    if let Err(pos) = v.binary_search(&x) {
        v.insert(pos, x);
    }
}

fn sorted_remove(v: &mut Vec<u32>, x: u32) {
    if let Ok(pos) = v.binary_search(&x) {
        v.remove(pos);
    }
}

fn symm_diff(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

struct Work<'a> {
    gens: &'a [GenInfo],
    cols: Vec<Vec<u32>>,
    rows: Vec<Vec<u32>>,
    alive: Vec<bool>,
    pivot: Pivot,
    /// A chain being transported through the reduction: when the target of a
    /// cancelled pair appears in it, the chain is rerouted through the
    /// source's column; sources cancelled away simply drop out at the end.
    tracked: Option<Vec<u32>>,
}

impl<'a> Work<'a> {
    fn new(gens: &'a [GenInfo], cols: Vec<Vec<u32>>, alive: Vec<bool>, pivot: Pivot) -> Self {
        let mut rows: Vec<Vec<u32>> = vec![Vec::new(); gens.len()];
        for (g, col) in cols.iter().enumerate() {
            for &t in col {
                rows[t as usize].push(g as u32);
            }
        }
        Work {
            gens,
            cols,
            rows,
            alive,
            pivot,
            tracked: None,
        }
    }

    fn eligible(&self, x: u32, y: u32) -> bool {
        let (gx, gy) = (&self.gens[x as usize], &self.gens[y as usize]);
        gx.q == gy.q && (self.pivot == Pivot::QEqual || gx.a == gy.a)
    }

    /// Runs cancellation to exhaustion, smallest source id first.
    fn run(&mut self) {
        let mut wl: std::collections::BTreeSet<u32> = (0..self.gens.len() as u32)
            .filter(|&g| self.alive[g as usize] && !self.cols[g as usize].is_empty())
            .collect();
        while let Some(&x) = wl.iter().next() {
            wl.remove(&x);
            if !self.alive[x as usize] {
                continue;
            }
            let Some(y) = self.cols[x as usize]
                .iter()
                .copied()
                .find(|&y| self.alive[y as usize] && self.eligible(x, y))
            else {
                continue;
            };
            self.cancel(x, y, &mut wl);
        }
    }

    fn cancel(&mut self, x: u32, y: u32, wl: &mut std::collections::BTreeSet<u32>) {
        let dx_full = std::mem::take(&mut self.cols[x as usize]);
        let into_y: Vec<u32> = self.rows[y as usize]
            .iter()
            .copied()
            .filter(|&s| s != x)
            .collect();
        self.alive[x as usize] = false;
        self.alive[y as usize] = false;

        // Reroute every other source hitting y through the cancelled pair:
        // d'(u) = d(u) + d(x); the y terms cancel over GF(2).
        for &u in &into_y {
            let old = std::mem::take(&mut self.cols[u as usize]);
            let new = symm_diff(&old, &dx_full);
            for &t in &old {
                if new.binary_search(&t).is_err() {
                    sorted_remove(&mut self.rows[t as usize], u);
                }
            }
            for &t in &new {
                if old.binary_search(&t).is_err() {
                    sorted_insert(&mut self.rows[t as usize], u);
                }
            }
            self.cols[u as usize] = new;
            wl.insert(u);
        }
        if let Some(tr) = self.tracked.as_mut() {
            if tr.binary_search(&y).is_ok() {
                *tr = symm_diff(tr, &dx_full);
            }
        }
        // Unhook x entirely: its outgoing entries, and entries into it.
        for &t in &dx_full {
            sorted_remove(&mut self.rows[t as usize], x);
        }
        for s in std::mem::take(&mut self.rows[x as usize]) {
            sorted_remove(&mut self.cols[s as usize], x);
        }
        // Unhook y's outgoing entries. Entries into y are gone already: the
        // reroute removed the others, and x's own was removed just above.
        for t in std::mem::take(&mut self.cols[y as usize]) {
            sorted_remove(&mut self.rows[t as usize], y);
        }
        self.rows[y as usize].clear();
    }
}

/// Cancels eligible pivots to exhaustion over a shared id space.
///
/// When `q_blocks` is set the id space is partitioned by quantum grading and
/// the blocks run independently (valid when every differential entry
/// preserves q, as the graded flavor does). Blocks never interact, so the
/// result is identical to the sequential pass whatever the thread count.
pub(crate) fn cancel_run(
    gens: &[GenInfo],
    cols: Vec<Vec<u32>>,
    alive: Vec<bool>,
    pivot: Pivot,
    q_blocks: bool,
    tracked: Option<Vec<u32>>,
) -> (Vec<bool>, Vec<Vec<u32>>, Option<Vec<u32>>) {
    if !q_blocks {
        let mut w = Work::new(gens, cols, alive, pivot);
        w.tracked = tracked;
        w.run();
        return (w.alive, w.cols, w.tracked);
    }
    debug_assert!(cols
        .iter()
        .enumerate()
        .all(|(g, col)| col.iter().all(|&t| gens[g].q == gens[t as usize].q)));
    let mut blocks: BTreeMap<i16, Vec<u32>> = BTreeMap::new();
    for (g, a) in alive.iter().enumerate() {
        if *a {
            blocks.entry(gens[g].q).or_default().push(g as u32);
        }
    }
    let tracked_q = tracked
        .as_ref()
        .and_then(|tr| tr.first().map(|&g| gens[g as usize].q));
    debug_assert!(tracked
        .iter()
        .flatten()
        .all(|&g| Some(gens[g as usize].q) == tracked_q));
    let block_list: Vec<(i16, Vec<u32>)> = blocks.into_iter().collect();
    let results = par::map_vec(block_list, |(q, ids)| {
        let local_gens: Vec<GenInfo> = ids.iter().map(|&g| gens[g as usize]).collect();
        let mut index = std::collections::HashMap::with_capacity(ids.len());
        for (li, &g) in ids.iter().enumerate() {
            index.insert(g, li as u32);
        }
        let local_cols: Vec<Vec<u32>> = ids
            .iter()
            .map(|&g| cols[g as usize].iter().map(|t| index[t]).collect())
            .collect();
        let mut w = Work::new(&local_gens, local_cols, vec![true; ids.len()], pivot);
        if Some(q) == tracked_q {
            w.tracked = tracked.as_ref().map(|tr| {
                let mut t: Vec<u32> = tr.iter().map(|g| index[g]).collect();
                t.sort_unstable();
                t
            });
        }
        w.run();
        (ids, w.alive, w.cols, w.tracked)
    });
    let mut out_alive = vec![false; gens.len()];
    let mut out_cols: Vec<Vec<u32>> = vec![Vec::new(); gens.len()];
    let mut out_tracked = tracked.map(|_| Vec::new());
    for (ids, alive_l, cols_l, tracked_l) in results {
        for (li, &g) in ids.iter().enumerate() {
            out_alive[g as usize] = alive_l[li];
            let mut col: Vec<u32> = cols_l[li].iter().map(|&t| ids[t as usize]).collect();
            col.sort_unstable();
            out_cols[g as usize] = col;
        }
        if let (Some(out), Some(tr)) = (out_tracked.as_mut(), tracked_l) {
            out.extend(tr.iter().map(|&li| ids[li as usize]));
            out.sort_unstable();
        }
    }
    (out_alive, out_cols, out_tracked)
}

// ---------------------------------------------------------------------------
// Materialized reduction

fn rebuild(c: &Complex, alive: &[bool], cols: &[Vec<u32>]) -> Complex {
    let mut new_id = vec![u32::MAX; c.len()];
    let mut gens = Vec::new();
    for (g, &a) in alive.iter().enumerate() {
        if a {
            new_id[g] = gens.len() as u32;
            gens.push(c.gens[g]);
        }
    }
    let new_cols: Vec<Vec<u32>> = (0..c.len())
        .filter(|&g| alive[g])
        .map(|g| {
            let mut col: Vec<u32> = cols[g]
                .iter()
                .filter(|&&t| alive[t as usize])
                .map(|&t| new_id[t as usize])
                .collect();
            col.sort_unstable();
            col
        })
        .collect();
    Complex {
        flavor: c.flavor,
        reduction: c.reduction,
        strands: c.strands,
        n: c.n,
        n_neg: c.n_neg,
        self_linking: c.self_linking,
        oriented_state: c.oriented_state,
        gens,
        cols: new_cols,
        lookup: None,
    }
}

fn reduce_materialized(c: &Complex, pivot: Pivot) -> Complex {
    let q_blocks = c.flavor == Flavor::KhovanovF2;
    let (alive, cols, _) = cancel_run(
        &c.gens,
        c.cols.clone(),
        vec![true; c.len()],
        pivot,
        q_blocks,
        None,
    );
    rebuild(c, &alive, &cols)
}

/// Homotopy reduction that cancels only differential entries preserving both
/// the quantum grading and the annular weight, scanning lowest generator ids
/// (lowest homological layer) first. The output is filtered chain homotopy
/// equivalent to the input: homology and the spectral-sequence pages of both
/// filtrations all agree.
pub fn scan_reduce(c: &Complex) -> Complex {
    reduce_materialized(c, Pivot::QAEqual)
}

// ---------------------------------------------------------------------------
// Homology and boundaries

/// Bigraded dimensions of the homology over GF(2). For the filtered flavor
/// this is the homology of the associated graded differential (the page the
/// quantum spectral sequence starts from).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomologyTable {
    pub dims: BTreeMap<(i16, i16), usize>,
    pub total_rank: usize,
    pub flavor: Flavor,
    pub reduction: Reduction,
}

impl HomologyTable {
    pub fn dim(&self, i: i16, q: i16) -> usize {
        self.dims.get(&(i, q)).copied().unwrap_or(0)
    }

    /// Coefficients of the graded Euler characteristic: for each quantum
    /// grading, the alternating sum over homological degrees.
    pub fn euler_by_q(&self) -> BTreeMap<i16, i64> {
        let mut out: BTreeMap<i16, i64> = BTreeMap::new();
        for (&(i, q), &d) in &self.dims {
            *out.entry(q).or_insert(0) += if i % 2 == 0 { d as i64 } else { -(d as i64) };
        }
        out.retain(|_, v| *v != 0);
        out
    }
}

pub fn homology(c: &Complex) -> HomologyTable {
    let mut blocks: BTreeMap<(i16, i16), Vec<u32>> = BTreeMap::new();
    for (g, info) in c.gens.iter().enumerate() {
        blocks.entry((info.i, info.q)).or_default().push(g as u32);
    }
    let keys: Vec<(i16, i16)> = blocks.keys().copied().collect();
    // Rank of the graded differential out of each block.
    let ranks: Vec<usize> = par::map_vec(keys.clone(), |(i, q)| {
        let src = &blocks[&(i, q)];
        let Some(tgt) = blocks.get(&(i + 1, q)) else {
            return 0;
        };
        let mut row_of = std::collections::HashMap::with_capacity(tgt.len());
        for (r, &t) in tgt.iter().enumerate() {
            row_of.insert(t, r as u32);
        }
        let cols: Vec<Vec<u32>> = src
            .iter()
            .map(|&g| {
                let mut col: Vec<u32> = c.cols[g as usize]
                    .iter()
                    .filter_map(|t| row_of.get(t).copied())
                    .collect();
                col.sort_unstable();
                col
            })
            .collect();
        SparseBitMatrix::new(tgt.len(), cols).rank()
    });
    let rank_out: BTreeMap<(i16, i16), usize> = keys.iter().copied().zip(ranks).collect();
    let mut dims = BTreeMap::new();
    let mut total = 0usize;
    for (&(i, q), ids) in &blocks {
        let out = rank_out.get(&(i, q)).copied().unwrap_or(0);
        let inn = rank_out.get(&(i - 1, q)).copied().unwrap_or(0);
        let dim = ids.len() - out - inn;
        if dim > 0 {
            dims.insert((i, q), dim);
            total += dim;
        }
    }
    HomologyTable {
        dims,
        total_rank: total,
        flavor: c.flavor,
        reduction: c.reduction,
    }
}

#[derive(Debug, Clone)]
pub struct BoundaryCheck {
    pub bounds: bool,
    /// Generator ids of a preimage chain when `bounds`.
    pub witness: Option<Vec<u32>>,
}

/// Decides whether a cycle is a boundary, with an explicit preimage witness.
/// The chain must be homogeneous in homological degree.
pub fn is_boundary(c: &Complex, chain: &[u32]) -> Result<BoundaryCheck> {
    if chain.is_empty() {
        return Ok(BoundaryCheck {
            bounds: true,
            witness: Some(Vec::new()),
        });
    }
    let i0 = c.gens[chain[0] as usize].i;
    if chain.iter().any(|&g| c.gens[g as usize].i != i0) {
        return Err(Error::Parse(
            "boundary check needs a chain of homogeneous homological degree".into(),
        ));
    }
    let tgt: Vec<u32> = (0..c.len() as u32)
        .filter(|&g| c.gens[g as usize].i == i0)
        .collect();
    let src: Vec<u32> = (0..c.len() as u32)
        .filter(|&g| c.gens[g as usize].i == i0 - 1)
        .collect();
    let mut row_of = std::collections::HashMap::with_capacity(tgt.len());
    for (r, &t) in tgt.iter().enumerate() {
        row_of.insert(t, r as u32);
    }
    let cols: Vec<Vec<u32>> = src
        .iter()
        .map(|&g| {
            let mut col: Vec<u32> = c.cols[g as usize].iter().map(|t| row_of[t]).collect();
            col.sort_unstable();
            col
        })
        .collect();
    let rhs: Vec<u32> = chain.iter().map(|g| row_of[g]).collect();
    let m = SparseBitMatrix::new(tgt.len(), cols);
    match m.solve(&rhs) {
        Some(combo) => Ok(BoundaryCheck {
            bounds: true,
            witness: Some(combo.into_iter().map(|ci| src[ci]).collect()),
        }),
        None => Ok(BoundaryCheck {
            bounds: false,
            witness: None,
        }),
    }
}

// ---------------------------------------------------------------------------
// Streaming reduction

/// Result of a streaming build-and-reduce pass.
#[derive(Debug)]
pub struct Streamed {
    pub complex: Complex,
    /// The transported distinguished cycle, as ids into `complex`, when
    /// requested. For the graded flavor the output differential vanishes, so
    /// the cycle's class is nonzero iff this is nonempty.
    pub tracked: Option<Vec<u32>>,
    /// Total generators materialized across all layers.
    pub materialized: u64,
}

struct Layer {
    states: Vec<u32>,
    verts: Vec<CubeVertex>,
    /// First generator id of each state.
    offsets: Vec<u32>,
    gens: Vec<GenInfo>,
    alive: Vec<bool>,
}

/// States of weight `w` on `n` bits, ascending.
fn gosper(n: usize, w: usize) -> Vec<u32> {
    if w == 0 {
        return vec![0];
    }
    let mut out = Vec::new();
    let mut v: u64 = (1u64 << w) - 1;
    let max: u64 = 1u64 << n;
    while v < max {
        out.push(v as u32);
        let c = v & v.wrapping_neg();
        let r = v + c;
        v = (((r ^ v) >> 2) / c) | r;
    }
    out
}

/// Builds the complex of a diagram layer by layer, cancelling each interface
/// as soon as it appears. Homotopy equivalent to building everything first
/// and reducing afterwards, but only ever holds two weight layers.
pub(crate) fn stream_reduce(
    d: &LinkDiagram,
    flavor: Flavor,
    reduction: Reduction,
    pivot: Pivot,
    track_psi: bool,
    budget: u64,
) -> Result<Streamed> {
    let crossings = d.crossings();
    let n = crossings.len();
    if n > 31 {
        return Err(Error::CrossingCap { n, cap: 31 });
    }
    let n_pos = crossings.iter().filter(|c| c.sign > 0).count();
    let n_neg = n - n_pos;
    let pts = crossing_points(d);
    let oriented = d.oriented_state() as u32;
    let q_blocks = flavor == Flavor::KhovanovF2;

    let build_layer = |w: usize, materialized: &mut u64| -> Result<Layer> {
        let states = gosper(n, w);
        let verts = par::map_vec(states.clone(), |s| CubeVertex {
            state: s,
            res: d.resolve(s as u64),
        });
        let mut offsets = Vec::with_capacity(states.len());
        let mut count = 0u64;
        for v in &verts {
            offsets.push(count as u32);
            let free = free_circles(v, reduction);
            if free > 31 {
                return Err(Error::Budget {
                    count: u64::MAX,
                    budget,
                    env: khovanov::BUDGET_ENV,
                });
            }
            count += 1u64 << free;
        }
        *materialized += count;
        if *materialized > budget {
            return Err(Error::Budget {
                count: *materialized,
                budget,
                env: khovanov::BUDGET_ENV,
            });
        }
        let mut gens = Vec::with_capacity(count as usize);
        for v in &verts {
            let free = free_circles(v, reduction);
            for mask in 0..1u32 << free {
                let full = expand_label(v, reduction, mask);
                let (gi, gq, ga) = gradings(
                    v.state,
                    full,
                    v.res.n_circles,
                    v.res.essential,
                    n_pos,
                    n_neg,
                    reduction,
                );
                gens.push(GenInfo {
                    state: v.state,
                    mask,
                    i: gi,
                    q: gq,
                    a: ga,
                });
            }
        }
        let alive = vec![true; gens.len()];
        Ok(Layer {
            states,
            verts,
            offsets,
            gens,
            alive,
        })
    };

    let mut materialized = 0u64;
    let mut out_gens: Vec<GenInfo> = Vec::new();
    let mut out_cols: Vec<Vec<u32>> = Vec::new();
    // Columns of already-final generators, still expressed in the local ids
    // of the layer currently being cancelled; resolved one iteration later.
    let mut pending: Vec<(usize, Vec<u32>)> = Vec::new();
    let mut prev: Option<Layer> = None;
    let mut tracked: Option<Vec<u32>> = None;
    let mut tracked_final: Option<Vec<u32>> = None;

    for w in 0..=n {
        let cur = build_layer(w, &mut materialized)?;
        if track_psi && w == n_neg {
            let si = cur
                .states
                .binary_search(&oriented)
                .expect("oriented state sits in its weight layer");
            tracked = Some(vec![cur.offsets[si]]);
        }
        let mut cur_alive = cur.alive.clone();

        if let Some(pl) = prev.take() {
            // Differential from the surviving generators of layer w-1 into
            // layer w, built state by state.
            let p_len = pl.gens.len();
            let state_ids: Vec<usize> = (0..pl.states.len()).collect();
            let cols_by_state: Vec<Vec<(u32, Vec<u32>)>> = par::map_vec(state_ids, |si| {
                let u = &pl.verts[si];
                let s = pl.states[si];
                let lo = pl.offsets[si] as usize;
                let hi = pl
                    .offsets
                    .get(si + 1)
                    .map(|&o| o as usize)
                    .unwrap_or(pl.gens.len());
                if (lo..hi).all(|g| !pl.alive[g]) {
                    return Vec::new();
                }
                let edges: Vec<(khovanov::EdgeMap, usize)> = (0..n)
                    .filter(|&j| s >> j & 1 == 0)
                    .map(|j| {
                        let t = s | 1 << j;
                        let ti = cur
                            .states
                            .binary_search(&t)
                            .expect("one-higher state sits in the next layer");
                        (edge_map(u, &cur.verts[ti], &pts[j]), ti)
                    })
                    .collect();
                let mut out = Vec::new();
                let mut terms = Vec::new();
                for g in lo..hi {
                    if !pl.alive[g] {
                        continue;
                    }
                    let full = expand_label(u, reduction, pl.gens[g].mask);
                    let mut col = Vec::new();
                    for (em, ti) in &edges {
                        terms.clear();
                        apply_edge(em, full, flavor, &mut terms);
                        for &tf in &terms {
                            col.push(
                                cur.offsets[*ti] + compress_label(&cur.verts[*ti], reduction, tf),
                            );
                        }
                    }
                    col.sort_unstable();
                    debug_assert!(col.windows(2).all(|p| p[0] != p[1]));
                    out.push((g as u32, col));
                }
                out
            });

            // Unified id space: layer w-1 locals first, then layer w locals.
            let total = p_len + cur.gens.len();
            let mut gens_all = Vec::with_capacity(total);
            gens_all.extend_from_slice(&pl.gens);
            gens_all.extend_from_slice(&cur.gens);
            let mut cols_all: Vec<Vec<u32>> = vec![Vec::new(); total];
            for per_state in cols_by_state {
                for (g, col) in per_state {
                    cols_all[g as usize] = col.into_iter().map(|t| t + p_len as u32).collect();
                }
            }
            let mut alive_all = Vec::with_capacity(total);
            alive_all.extend_from_slice(&pl.alive);
            alive_all.resize(total, true);

            // The transported chain sits on whichever side of the interface
            // matches its layer.
            let tracked_in = tracked.take().map(|tr| {
                if w == n_neg + 1 {
                    tr // source side: layer w-1 locals already
                } else {
                    tr.into_iter().map(|g| g + p_len as u32).collect()
                }
            });
            let (alive2, cols2, tracked2) =
                cancel_run(&gens_all, cols_all, alive_all, pivot, q_blocks, tracked_in);
            cur_alive = alive2[p_len..].to_vec();

            // Layer w-1 membership is now settled: assign final ids.
            let mut final_of = vec![u32::MAX; p_len];
            for (g, item) in pl.gens.iter().enumerate() {
                if alive2[g] {
                    final_of[g] = out_gens.len() as u32;
                    out_gens.push(*item);
                    out_cols.push(Vec::new());
                }
            }
            // Columns of layer w-2 finals referenced layer w-1 locals; the
            // interface only killed generators, never rerouted these columns.
            for (fid, col) in pending.drain(..) {
                let mut resolved: Vec<u32> = col
                    .into_iter()
                    .filter(|&t| final_of[t as usize] != u32::MAX)
                    .map(|t| final_of[t as usize])
                    .collect();
                resolved.sort_unstable();
                out_cols[fid] = resolved;
            }
            for g in 0..p_len {
                if alive2[g] {
                    let col: Vec<u32> = cols2[g].iter().map(|&t| t - p_len as u32).collect();
                    pending.push((final_of[g] as usize, col));
                }
            }
            match tracked2 {
                None => {}
                Some(tr) if w == n_neg + 1 => {
                    // Source side: cancelled sources drop out, survivors take
                    // their final ids.
                    let mut ids: Vec<u32> = tr
                        .into_iter()
                        .filter(|&g| final_of[g as usize] != u32::MAX)
                        .map(|g| final_of[g as usize])
                        .collect();
                    ids.sort_unstable();
                    tracked_final = Some(ids);
                }
                Some(tr) => {
                    // Target side (w == n_neg): back to layer-w locals.
                    debug_assert!(tr.iter().all(|&g| g >= p_len as u32));
                    tracked = Some(tr.into_iter().map(|g| g - p_len as u32).collect());
                }
            }
        }

        prev = Some(Layer {
            alive: cur_alive,
            ..cur
        });
    }

    // Epilogue: the top layer has no further interface.
    if let Some(pl) = prev {
        let mut final_of = vec![u32::MAX; pl.gens.len()];
        for (g, item) in pl.gens.iter().enumerate() {
            if pl.alive[g] {
                final_of[g] = out_gens.len() as u32;
                out_gens.push(*item);
                out_cols.push(Vec::new());
            }
        }
        for (fid, col) in pending.drain(..) {
            let mut resolved: Vec<u32> = col
                .into_iter()
                .filter(|&t| final_of[t as usize] != u32::MAX)
                .map(|t| final_of[t as usize])
                .collect();
            resolved.sort_unstable();
            out_cols[fid] = resolved;
        }
        if tracked_final.is_none() {
            if let Some(tr) = tracked {
                // The distinguished layer was the top one; all survivors of
                // it are final.
                let mut ids: Vec<u32> = tr
                    .into_iter()
                    .filter(|&g| final_of[g as usize] != u32::MAX)
                    .map(|g| final_of[g as usize])
                    .collect();
                ids.sort_unstable();
                tracked_final = Some(ids);
            }
        }
    }

    Ok(Streamed {
        complex: Complex {
            flavor,
            reduction,
            strands: d.strands(),
            n,
            n_neg,
            self_linking: d.writhe() - d.strands() as i64,
            oriented_state: oriented,
            gens: out_gens,
            cols: out_cols,
            lookup: None,
        },
        tracked: if track_psi { tracked_final } else { None },
        materialized,
    })
}

/// Streaming build of the homotopy-reduced complex of a diagram. For the
/// graded flavor the output differential is zero (the complex is its own
/// homology); for the filtered flavor a strictly filtration-raising
/// differential remains.
pub fn reduced_complex(
    d: &LinkDiagram,
    flavor: Flavor,
    reduction: Reduction,
    track_psi: bool,
) -> Result<Streamed> {
    stream_reduce(
        d,
        flavor,
        reduction,
        Pivot::QEqual,
        track_psi,
        khovanov::generator_budget(),
    )
}

// ---------------------------------------------------------------------------
// Filtration levels

/// Quantum filtration levels of the homology classes of a filtered complex:
/// one `(homological degree, level)` entry per class, sorted. The level of a
/// class is the largest q such that the class is represented by a cycle in
/// the subcomplex spanned by generators of quantum grading >= q.
pub fn filtered_levels(c: &Complex) -> Vec<(i16, i16)> {
    let r = reduce_materialized(c, Pivot::QEqual);
    let mut by_degree: BTreeMap<i16, Vec<u32>> = BTreeMap::new();
    for (g, info) in r.gens.iter().enumerate() {
        by_degree.entry(info.i).or_default().push(g as u32);
    }
    let mut out = Vec::new();
    for (&deg, ids) in &by_degree {
        let rows = ids.len();
        let words = rows.div_ceil(64);
        let mut row_of = std::collections::HashMap::with_capacity(rows);
        for (ri, &g) in ids.iter().enumerate() {
            row_of.insert(g, ri as u32);
        }
        // Boundary space: image of the full differential from one degree
        // below, as dense vectors over this degree's generators.
        let mut b_elim = Elim::new(rows, 0, false);
        let mut b_cols: Vec<Vec<u64>> = Vec::new();
        if let Some(below) = by_degree.get(&(deg - 1)) {
            for &g in below {
                let col: Vec<u32> = r.cols[g as usize]
                    .iter()
                    .filter_map(|t| row_of.get(t).copied())
                    .collect();
                if b_elim.feed(&col) {
                    b_cols.push(dense(&col, words));
                }
            }
        }
        let dim_b = b_elim.rank;

        // Cycles at each filtration threshold, highest q first. The
        // differential of a filtered complex maps each subcomplex into
        // itself, so the restricted kernel is well defined.
        let mut thresholds: Vec<i16> = ids.iter().map(|&g| r.gens[g as usize].q).collect();
        thresholds.sort_unstable();
        thresholds.dedup();
        thresholds.reverse();
        let mut prev_rho = 0usize;
        for &q0 in &thresholds {
            let sub: Vec<u32> = ids
                .iter()
                .copied()
                .filter(|&g| r.gens[g as usize].q >= q0)
                .collect();
            let mut elim = Elim::new(r.len(), sub.len(), true);
            for &g in &sub {
                elim.feed(&r.cols[g as usize]);
            }
            let z_basis: Vec<Vec<u64>> = elim
                .kernel
                .iter()
                .map(|combo| {
                    let mut v = vec![0u64; words];
                    for ci in set_bits(combo) {
                        let ri = row_of[&sub[ci]];
                        v[(ri >> 6) as usize] ^= 1u64 << (ri & 63);
                    }
                    v
                })
                .collect();
            let dim_z = z_basis.len();
            // dim(Z ∩ B) = dim Z + dim B − dim(Z + B).
            let mut joint = Elim::new(rows, dim_z + dim_b, false);
            for v in z_basis.iter().chain(b_cols.iter()) {
                let bits: Vec<u32> = set_bits(v).into_iter().map(|x| x as u32).collect();
                joint.feed(&bits);
            }
            let dim_zb = dim_z + dim_b - joint.rank;
            // Classes representable at this threshold or above.
            let rho = dim_z - dim_zb;
            for _ in prev_rho..rho {
                out.push((deg, q0));
            }
            prev_rho = rho;
        }
    }
    out.sort_unstable();
    out
}
