//! Cube of resolutions and its chain complexes over GF(2).
//!
//! Circles of a resolution are labeled by bits (1 = the plus label), packed
//! into masks over the "free" circles: in the reduced theory the marked
//! circle is pinned to the minus label and excluded from the mask. Gradings
//! follow the usual normalization for a diagram with `n_pos`/`n_neg`
//! crossings, with the reduced theory shifted up by one quantum grading so
//! that the distinguished cycle of a closed braid sits at the self-linking
//! number plus one.

use crate::diagram::{Crossing, LinkDiagram, Resolution, Smoothing};
use crate::error::{Error, Result};
use crate::par;
use serde::{Deserialize, Serialize};

/// Frobenius-layer flavor: the graded differential or Turner's filtered
/// deformation of it (both over GF(2)).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flavor {
    KhovanovF2,
    BarNatanF2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reduction {
    Unreduced,
    Reduced,
}

/// Hard cap on full-cube materialization.
pub const FULL_CUBE_CAP: usize = 20;

/// Environment variable overriding the generator budget.
pub const BUDGET_ENV: &str = "KHTIGHT_MAX_GENERATORS";
const DEFAULT_BUDGET: u64 = 1 << 27;

pub fn generator_budget() -> u64 {
    std::env::var(BUDGET_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_BUDGET)
}

/// One vertex of the cube: a fully resolved state with its traced circles.
#[derive(Debug, Clone)]
pub struct CubeVertex {
    pub state: u32,
    pub res: Resolution,
}

impl CubeVertex {
    pub fn n_circles(&self) -> usize {
        self.res.n_circles
    }
}

/// The full cube of resolutions (all `2^n` vertices, no labels yet).
#[derive(Debug, Clone)]
pub struct Cube {
    pub diagram: LinkDiagram,
    pub crossings: Vec<Crossing>,
    pub n_pos: usize,
    pub n_neg: usize,
    /// Indexed by state.
    pub vertices: Vec<CubeVertex>,
}

pub fn build_cube(d: &LinkDiagram) -> Result<Cube> {
    let crossings = d.crossings();
    let n = crossings.len();
    if n > FULL_CUBE_CAP {
        return Err(Error::CrossingCap {
            n,
            cap: FULL_CUBE_CAP,
        });
    }
    let states: Vec<u32> = (0..1u64 << n).map(|s| s as u32).collect();
    let vertices = par::map_vec(states, |s| CubeVertex {
        state: s,
        res: d.resolve(s as u64),
    });
    Ok(Cube {
        diagram: d.clone(),
        n_pos: crossings.iter().filter(|c| c.sign > 0).count(),
        n_neg: crossings.iter().filter(|c| c.sign < 0).count(),
        crossings,
        vertices,
    })
}

/// One chain generator: a state plus a label mask over its free circles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenInfo {
    pub state: u32,
    pub mask: u32,
    pub i: i16,
    pub q: i16,
    pub a: i16,
}

/// A chain complex over GF(2) with cube provenance per generator.
///
/// `cols[g]` lists the targets of the differential on generator `g`, sorted.
/// Generator ids ascend with homological layer, so the differential is
/// strictly id-increasing.
#[derive(Debug, Clone)]
pub struct Complex {
    pub flavor: Flavor,
    pub reduction: Reduction,
    pub strands: usize,
    pub n: usize,
    pub n_neg: usize,
    pub self_linking: i64,
    pub oriented_state: u32,
    pub gens: Vec<GenInfo>,
    pub cols: Vec<Vec<u32>>,
    /// For full cube builds only: generator id lookup by state.
    pub(crate) lookup: Option<Lookup>,
}

#[derive(Debug, Clone)]
pub(crate) struct Lookup {
    /// First generator id of each state, in generator-id order (states
    /// sorted by weight, then value).
    pub offsets: Vec<u32>,
    /// Rank of each state in that order (indexed by state value).
    pub rank_of: Vec<u32>,
}

impl Complex {
    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn total_differential_entries(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }
}

/// Gradings of a labeled state.
pub(crate) fn gradings(
    state: u32,
    full_label: u32,
    n_circles: usize,
    essential: u32,
    n_pos: usize,
    n_neg: usize,
    reduction: Reduction,
) -> (i16, i16, i16) {
    let w = state.count_ones() as i64;
    let plus = full_label.count_ones() as i64;
    let i = w - n_neg as i64;
    let mut q = 2 * plus - n_circles as i64 + w + n_pos as i64 - 2 * n_neg as i64;
    if reduction == Reduction::Reduced {
        q += 1;
    }
    let a = 2 * (full_label & essential).count_ones() as i64 - essential.count_ones() as i64;
    (i as i16, q as i16, a as i16)
}

/// Free-circle count of a vertex under the given reduction.
pub(crate) fn free_circles(v: &CubeVertex, reduction: Reduction) -> usize {
    v.res.n_circles - (reduction == Reduction::Reduced) as usize
}

/// Expands a free-circle mask to a full label over all circles.
pub(crate) fn expand_label(v: &CubeVertex, reduction: Reduction, mask: u32) -> u32 {
    match reduction {
        Reduction::Unreduced => mask,
        Reduction::Reduced => {
            let m = v.res.marked;
            let low = mask & ((1u32 << m) - 1);
            low | (mask & !((1u32 << m) - 1)) << 1
        }
    }
}

/// Compresses a full label (which must leave the marked circle unset in the
/// reduced theory) back to a free-circle mask.
pub(crate) fn compress_label(v: &CubeVertex, reduction: Reduction, full: u32) -> u32 {
    match reduction {
        Reduction::Unreduced => full,
        Reduction::Reduced => {
            let m = v.res.marked;
            debug_assert_eq!(full >> m & 1, 0, "marked circle must carry the minus label");
            let low = full & ((1u32 << m) - 1);
            low | (full >> 1) & !((1u32 << m) - 1)
        }
    }
}

/// How circles transform along a cube edge.
#[derive(Debug, Clone)]
pub(crate) enum EdgeKind {
    Merge { a: u8, b: u8, c: u8 },
    Split { a: u8, c1: u8, c2: u8 },
}

#[derive(Debug, Clone)]
pub(crate) struct EdgeMap {
    pub kind: EdgeKind,
    /// Image circle in the target vertex for each untouched source circle
    /// (`u8::MAX` at the circles involved in the merge/split).
    pub spect: Vec<u8>,
}

/// Level points at a crossing needed to identify the circles it touches.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CrossingPoints {
    pub bl: u32,
    pub br: u32,
    pub tl: u32,
    pub sign: i8,
}

pub(crate) fn crossing_points(d: &LinkDiagram) -> Vec<CrossingPoints> {
    let b = d.strands();
    d.crossings()
        .iter()
        .map(|c| {
            let pt = |s: usize, t: usize| (t * b + (s - 1)) as u32;
            CrossingPoints {
                bl: pt(c.pos, c.letter),
                br: pt(c.pos + 1, c.letter),
                tl: pt(c.pos, c.letter + 1),
                sign: c.sign,
            }
        })
        .collect()
}

/// The edge from vertex `u` (bit `j` clear) to `v = u | 1 << j`.
pub(crate) fn edge_map(u: &CubeVertex, v: &CubeVertex, pts: &CrossingPoints) -> EdgeMap {
    let sm_u = LinkDiagram::crossing_smoothing(pts.sign, false);
    let (pa, pb) = match sm_u {
        Smoothing::Parallel => (pts.bl, pts.br),
        Smoothing::CapCup => (pts.bl, pts.tl),
    };
    let a = u.res.circle_of[pa as usize];
    let b = u.res.circle_of[pb as usize];
    let spect: Vec<u8> = (0..u.res.n_circles as u8)
        .map(|x| {
            if x == a || x == b {
                u8::MAX
            } else {
                v.res.circle_of[u.res.reps[x as usize] as usize]
            }
        })
        .collect();
    if a != b {
        let c = v.res.circle_of[pts.bl as usize];
        EdgeMap {
            kind: EdgeKind::Merge { a, b, c },
            spect,
        }
    } else {
        let sm_v = LinkDiagram::crossing_smoothing(pts.sign, true);
        let (qa, qb) = match sm_v {
            Smoothing::Parallel => (pts.bl, pts.br),
            Smoothing::CapCup => (pts.bl, pts.tl),
        };
        let c1 = v.res.circle_of[qa as usize];
        let c2 = v.res.circle_of[qb as usize];
        debug_assert_ne!(c1, c2, "planar reconnection of one circle splits it");
        EdgeMap {
            kind: EdgeKind::Split { a, c1, c2 },
            spect,
        }
    }
}

/// Applies the edge to a full source label; pushes resulting full target
/// labels into `out`.
pub(crate) fn apply_edge(em: &EdgeMap, full: u32, flavor: Flavor, out: &mut Vec<u32>) {
    let mut base = 0u32;
    for (x, &vx) in em.spect.iter().enumerate() {
        if vx != u8::MAX && full >> x & 1 == 1 {
            base |= 1 << vx;
        }
    }
    match em.kind {
        EdgeKind::Merge { a, b, c } => {
            let la = full >> a & 1 == 1;
            let lb = full >> b & 1 == 1;
            match (la, lb) {
                (true, true) => out.push(base | 1 << c),
                (true, false) | (false, true) => out.push(base),
                (false, false) => {
                    if flavor == Flavor::BarNatanF2 {
                        out.push(base);
                    }
                }
            }
        }
        EdgeKind::Split { a, c1, c2 } => {
            if full >> a & 1 == 1 {
                out.push(base | 1 << c1);
                out.push(base | 1 << c2);
                if flavor == Flavor::BarNatanF2 {
                    out.push(base | 1 << c1 | 1 << c2);
                }
            } else {
                out.push(base);
            }
        }
    }
}

pub fn build_complex(cube: &Cube, flavor: Flavor, reduction: Reduction) -> Result<Complex> {
    build_complex_budgeted(cube, flavor, reduction, generator_budget())
}

pub fn build_complex_budgeted(
    cube: &Cube,
    flavor: Flavor,
    reduction: Reduction,
    budget: u64,
) -> Result<Complex> {
    let n = cube.crossings.len();
    let mut states: Vec<u32> = (0..1u32 << n).collect();
    states.sort_by_key(|&s| (s.count_ones(), s));

    let mut offsets = Vec::with_capacity(states.len());
    let mut total = 0u64;
    for &s in &states {
        offsets.push(total as u32);
        let free = free_circles(&cube.vertices[s as usize], reduction);
        if free > 31 {
            // Label masks are 32-bit; a state this wide always exceeds any
            // realistic budget anyway.
            return Err(Error::Budget {
                count: u64::MAX,
                budget,
                env: BUDGET_ENV,
            });
        }
        total += 1u64 << free;
        if total > budget {
            return Err(Error::Budget {
                count: total,
                budget,
                env: BUDGET_ENV,
            });
        }
    }
    let mut rank_of = vec![0u32; 1 << n];
    for (r, &s) in states.iter().enumerate() {
        rank_of[s as usize] = r as u32;
    }

    let pts = crossing_points(&cube.diagram);
    let per_state: Vec<(Vec<GenInfo>, Vec<Vec<u32>>)> = par::map_vec(states.clone(), |s| {
        let u = &cube.vertices[s as usize];
        let free = free_circles(u, reduction);
        let mut gens = Vec::with_capacity(1 << free);
        let mut cols = Vec::with_capacity(1 << free);
        let edges: Vec<(usize, EdgeMap, u32)> = (0..n)
            .filter(|&j| s >> j & 1 == 0)
            .map(|j| {
                let t = s | 1 << j;
                let v = &cube.vertices[t as usize];
                (j, edge_map(u, v, &pts[j]), t)
            })
            .collect();
        let mut terms = Vec::new();
        for mask in 0..1u32 << free {
            let full = expand_label(u, reduction, mask);
            let (gi, gq, ga) = gradings(
                s,
                full,
                u.res.n_circles,
                u.res.essential,
                cube.n_pos,
                cube.n_neg,
                reduction,
            );
            gens.push(GenInfo {
                state: s,
                mask,
                i: gi,
                q: gq,
                a: ga,
            });
            let mut col = Vec::new();
            for (_, em, t) in &edges {
                let v = &cube.vertices[*t as usize];
                terms.clear();
                apply_edge(em, full, flavor, &mut terms);
                for &tf in &terms {
                    col.push(
                        offsets[rank_of[*t as usize] as usize] + compress_label(v, reduction, tf),
                    );
                }
            }
            col.sort_unstable();
            debug_assert!(col.windows(2).all(|w| w[0] != w[1]));
            cols.push(col);
        }
        (gens, cols)
    });

    let mut gens = Vec::with_capacity(total as usize);
    let mut cols = Vec::with_capacity(total as usize);
    for (g, c) in per_state {
        gens.extend(g);
        cols.extend(c);
    }
    let complex = Complex {
        flavor,
        reduction,
        strands: cube.diagram.strands(),
        n,
        n_neg: cube.n_neg,
        self_linking: cube.diagram.writhe() - cube.diagram.strands() as i64,
        oriented_state: cube.diagram.oriented_state() as u32,
        gens,
        cols,
        lookup: Some(Lookup { offsets, rank_of }),
    };
    #[cfg(debug_assertions)]
    if complex.len() <= 1 << 14 {
        assert_d_squared_zero(&complex);
    }
    Ok(complex)
}

#[cfg(debug_assertions)]
fn assert_d_squared_zero(c: &Complex) {
    for g in 0..c.len() {
        let mut second: Vec<u32> = c.cols[g]
            .iter()
            .flat_map(|&t| c.cols[t as usize].iter().copied())
            .collect();
        second.sort_unstable();
        let mut it = second.chunks_exact(2);
        for pair in &mut it {
            assert_eq!(pair[0], pair[1], "d^2 != 0 at generator {g}");
        }
        assert!(it.remainder().is_empty(), "d^2 != 0 at generator {g}");
    }
}

impl Complex {
    /// Generator id of (state, free-circle mask); full builds only.
    pub(crate) fn gen_id(&self, state: u32, mask: u32) -> Option<u32> {
        let lk = self.lookup.as_ref()?;
        let rank = lk.rank_of[state as usize] as usize;
        Some(lk.offsets[rank] + mask)
    }
}

/// The distinguished cycle: the all-minus label on the orientation-compatible
/// resolution. A single generator in either reduction.
pub fn psi_chain(c: &Complex) -> Result<Vec<u32>> {
    c.gen_id(c.oriented_state, 0)
        .map(|id| vec![id])
        .ok_or_else(|| Error::Parse("generator lookup requires a full cube build".into()))
}

/// The cycles of the filtered flavor supported on the oriented resolution:
/// alternating labelings of the nested track circles, expanded into sums of
/// generators. In the reduced theory only the labeling with the minus label
/// on the marked circle survives; it comes first in the unreduced pair here.
pub fn canonical_generators(c: &Complex) -> Result<Vec<Vec<u32>>> {
    let b = c.strands;
    let pattern = |parity: u32| -> u32 {
        // Circles of the oriented resolution are the tracks, id = strand - 1.
        (0..b as u32)
            .filter(|cid| cid % 2 == parity)
            .fold(0u32, |m, cid| m | 1 << cid)
    };
    let compress = |full: u32| -> u32 {
        match c.reduction {
            Reduction::Unreduced => full,
            // Marked circle of the oriented resolution is circle 0.
            Reduction::Reduced => full >> 1,
        }
    };
    let expand_chain = |plus_set: u32| -> Result<Vec<u32>> {
        let mut ids = Vec::new();
        let mut sub = plus_set;
        loop {
            let id = c.gen_id(c.oriented_state, compress(sub)).ok_or_else(|| {
                Error::Parse("generator lookup requires a full cube build".into())
            })?;
            ids.push(id);
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & plus_set;
        }
        ids.sort_unstable();
        Ok(ids)
    };
    match c.reduction {
        Reduction::Reduced => Ok(vec![expand_chain(pattern(1))?]),
        Reduction::Unreduced => Ok(vec![expand_chain(pattern(1))?, expand_chain(pattern(0))?]),
    }
}

/// Annular weight of a generator: essential circles count +1 with the plus
/// label and -1 with the minus label.
pub fn skein_level(c: &Complex, g: u32) -> i16 {
    c.gens[g as usize].a
}

/// Plain-text dump of a complex: one `g` line per generator with its
/// gradings, one `d` line per generator with a nonzero differential.
pub fn dump(c: &Complex) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    for (id, g) in c.gens.iter().enumerate() {
        writeln!(out, "g {id} i={} q={} a={}", g.i, g.q, g.a).unwrap();
    }
    for (id, col) in c.cols.iter().enumerate() {
        if col.is_empty() {
            continue;
        }
        let targets: Vec<String> = col.iter().map(|t| t.to_string()).collect();
        writeln!(out, "d {id} -> {}", targets.join(",")).unwrap();
    }
    out
}
