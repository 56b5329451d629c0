//! Finitely generated bi-filtered chain complexes over GF(2).
//!
//! Each generator carries a bigrading (A, I): the I-filtration is ascending
//! (… ⊂ C_{i+1} ⊂ C_i ⊂ …, the differential never decreases I) and the
//! A-filtration is descending (… ⊂ C_{a−1} ⊂ C_a ⊂ …). The module computes
//! spectral-sequence page tables for either filtration, the induced levels
//! of the other grading on every page (minimum over cycle representatives,
//! in each filtration's own sense), and a cancellation reduction that
//! eliminates differential entries between generators of equal bidegree
//! while preserving homology and every page of both spectral sequences.

use crate::error::{Error, Result};
use crate::khovanov;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// A named generator with its (A, I) bigrading.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiGen {
    pub name: String,
    pub a: i32,
    pub i: i32,
}

/// A based bi-filtered complex: `cols[g]` lists the targets of the
/// differential on generator `g` (a set, sorted ascending).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiFilteredComplex {
    pub gens: Vec<BiGen>,
    pub cols: Vec<Vec<usize>>,
}

impl BiFilteredComplex {
    /// Validates the two structural invariants: no differential entry may
    /// decrease I, and the differential must square to zero.
    pub fn new(gens: Vec<BiGen>, mut cols: Vec<Vec<usize>>) -> Result<Self> {
        if cols.len() != gens.len() {
            return Err(Error::Filtration(
                "differential and generator counts differ".into(),
            ));
        }
        for col in &mut cols {
            col.sort_unstable();
            if col.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Filtration("repeated differential target".into()));
            }
            if col.iter().any(|&t| t >= gens.len()) {
                return Err(Error::Filtration("differential target out of range".into()));
            }
        }
        for (g, col) in cols.iter().enumerate() {
            for &t in col {
                if gens[t].i < gens[g].i {
                    return Err(Error::Filtration(format!(
                        "arrow {} -> {} decreases the I-filtration",
                        gens[g].name, gens[t].name
                    )));
                }
            }
        }
        for (g, col) in cols.iter().enumerate() {
            let mut square = BTreeSet::new();
            for &t in col {
                for &u in &cols[t] {
                    if !square.remove(&u) {
                        square.insert(u);
                    }
                }
            }
            if let Some(&u) = square.iter().next() {
                return Err(Error::Filtration(format!(
                    "d\u{b2} \u{2260} 0: {} reaches {} twice-odd",
                    gens[g].name, gens[u].name
                )));
            }
        }
        Ok(BiFilteredComplex { gens, cols })
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }
}

/// Parses the plain-text complex dump: one `g <name> i=<int> q=<int> a=<int>`
/// line per generator (`q` optional and ignored here), one
/// `d <name> -> <name>,<name>,...` line per generator with nonzero
/// differential. `#` starts a comment.
pub fn parse_bifiltered(text: &str) -> Result<BiFilteredComplex> {
    let mut gens: Vec<BiGen> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut arrows: Vec<(String, Vec<String>)> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: &str| Error::Parse(format!("line {}: {msg}", ln + 1));
        if let Some(rest) = line.strip_prefix("g ") {
            let mut parts = rest.split_whitespace();
            let name = parts.next().ok_or_else(|| bad("missing generator name"))?;
            let (mut a, mut i) = (None, None);
            for field in parts {
                let (key, val) = field
                    .split_once('=')
                    .ok_or_else(|| bad("malformed grading field"))?;
                let val: i32 = val
                    .parse()
                    .map_err(|_| bad("grading value is not an integer"))?;
                match key {
                    "a" => a = Some(val),
                    "i" => i = Some(val),
                    "q" => {}
                    _ => return Err(bad("unknown grading field")),
                }
            }
            let (a, i) = match (a, i) {
                (Some(a), Some(i)) => (a, i),
                _ => return Err(bad("generator needs both a= and i= gradings")),
            };
            if index.insert(name.to_string(), gens.len()).is_some() {
                return Err(bad("duplicate generator name"));
            }
            gens.push(BiGen {
                name: name.to_string(),
                a,
                i,
            });
        } else if let Some(rest) = line.strip_prefix("d ") {
            let (from, to) = rest
                .split_once("->")
                .ok_or_else(|| bad("differential line needs '->'"))?;
            let targets = to
                .split(',')
                .map(|t| t.trim().to_string())
                .filter(|t| !t.is_empty())
                .collect();
            arrows.push((from.trim().to_string(), targets));
        } else {
            return Err(bad("unrecognized record"));
        }
    }
    let mut cols = vec![Vec::new(); gens.len()];
    let mut seen = BTreeSet::new();
    for (from, targets) in arrows {
        let &g = index
            .get(&from)
            .ok_or_else(|| Error::Parse(format!("unknown generator {from}")))?;
        if !seen.insert(g) {
            return Err(Error::Parse(format!(
                "duplicate differential line for {from}"
            )));
        }
        for t in targets {
            let &u = index
                .get(&t)
                .ok_or_else(|| Error::Parse(format!("unknown generator {t}")))?;
            cols[g].push(u);
        }
    }
    BiFilteredComplex::new(gens, cols)
}

/// Imports a cube complex with (A, I) = (skein grading, homological grading);
/// generators are named by their numeric ids, matching the text dump.
pub fn from_khovanov(c: &khovanov::Complex) -> BiFilteredComplex {
    let gens = c
        .gens
        .iter()
        .enumerate()
        .map(|(id, g)| BiGen {
            name: id.to_string(),
            a: g.a as i32,
            i: g.i as i32,
        })
        .collect();
    let cols = c
        .cols
        .iter()
        .map(|col| col.iter().map(|&t| t as usize).collect())
        .collect();
    BiFilteredComplex::new(gens, cols).expect("cube complexes are bi-filtered")
}

/// Cancels differential entries between generators of equal bidegree until
/// none remain, rerouting zig-zag arrows: cancelling g -> h adds an arrow
/// x -> y for every x -> h and g -> y. The result has the homology of the
/// input, with the same spectral-sequence pages for both filtrations, and
/// its bidegree-preserving differential component is zero.
pub fn cancel_reduce(c: &BiFilteredComplex) -> BiFilteredComplex {
    let n = c.len();
    let mut cols: Vec<BTreeSet<usize>> =
        c.cols.iter().map(|v| v.iter().copied().collect()).collect();
    let mut rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (g, col) in cols.iter().enumerate() {
        for &t in col {
            rows[t].insert(g);
        }
    }
    let mut alive = vec![true; n];
    loop {
        let mut pivot = None;
        'scan: for g in 0..n {
            if !alive[g] {
                continue;
            }
            for &h in &cols[g] {
                // Rerouting can transiently produce self-entries x -> x;
                // they are not cancelling pairs (and a diagonal-only
                // square-zero block is necessarily zero, so none survive).
                if h != g && c.gens[g].a == c.gens[h].a && c.gens[g].i == c.gens[h].i {
                    pivot = Some((g, h));
                    break 'scan;
                }
            }
        }
        let Some((g, h)) = pivot else { break };
        let sources: Vec<usize> = rows[h].iter().copied().filter(|&x| x != g).collect();
        let targets: Vec<usize> = cols[g].iter().copied().filter(|&y| y != h).collect();
        for &x in &sources {
            for &y in &targets {
                if cols[x].remove(&y) {
                    rows[y].remove(&x);
                } else {
                    cols[x].insert(y);
                    rows[y].insert(x);
                }
            }
        }
        for dead in [g, h] {
            alive[dead] = false;
            for t in std::mem::take(&mut cols[dead]) {
                rows[t].remove(&dead);
            }
            for s in std::mem::take(&mut rows[dead]) {
                cols[s].remove(&dead);
            }
        }
    }
    let keep: Vec<usize> = (0..n).filter(|&g| alive[g]).collect();
    let renumber: BTreeMap<usize, usize> = keep
        .iter()
        .enumerate()
        .map(|(new, &old)| (old, new))
        .collect();
    let gens = keep.iter().map(|&g| c.gens[g].clone()).collect();
    let cols = keep
        .iter()
        .map(|&g| cols[g].iter().map(|t| renumber[t]).collect())
        .collect();
    BiFilteredComplex { gens, cols }
}

/// Which filtration drives the spectral sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Filtration {
    /// Ascending homological-style filtration; pages inherit A-levels.
    I,
    /// Descending skein-style filtration; pages inherit I-levels.
    A,
}

/// One page of a spectral sequence: dimensions per filtration level, the
/// rank of the page differential (total and per source level), and the
/// other grading's induced levels of the surviving classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageTable {
    pub r: usize,
    pub dims: BTreeMap<i32, usize>,
    pub d_rank: usize,
    pub d_ranks: BTreeMap<i32, usize>,
    pub induced_levels: Vec<(i32, usize)>,
}

impl PageTable {
    pub fn total_dim(&self) -> usize {
        self.dims.values().sum()
    }
}

/// Pages E^0..E^{r_max} of one filtration, plus the homology of the total
/// complex with the other grading's induced levels for contrast.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PagesReport {
    pub filtration: Filtration,
    pub pages: Vec<PageTable>,
    pub total_rank: usize,
    pub total_levels: Vec<(i32, usize)>,
}

// ---- dense GF(2) vectors and subspace helpers -----------------------------

#[derive(Clone, PartialEq, Eq)]
struct Bv(Vec<u64>);

impl Bv {
    fn zero(n: usize) -> Bv {
        Bv(vec![0; n.div_ceil(64)])
    }

    fn get(&self, k: usize) -> bool {
        self.0[k / 64] >> (k % 64) & 1 == 1
    }

    fn set(&mut self, k: usize) {
        self.0[k / 64] |= 1 << (k % 64);
    }

    fn xor(&mut self, o: &Bv) {
        for (w, v) in self.0.iter_mut().zip(&o.0) {
            *w ^= v;
        }
    }

    fn first_set(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(k, w)| k * 64 + w.trailing_zeros() as usize)
    }
}

/// A subspace kept as an echelon basis indexed by leading coordinate.
#[derive(Default)]
struct Span {
    rows: BTreeMap<usize, Bv>,
}

impl Span {
    fn insert(&mut self, mut v: Bv) -> bool {
        while let Some(p) = v.first_set() {
            match self.rows.get(&p) {
                Some(row) => v.xor(row),
                None => {
                    self.rows.insert(p, v);
                    return true;
                }
            }
        }
        false
    }

    fn of(vs: &[Bv]) -> Span {
        let mut s = Span::default();
        for v in vs {
            s.insert(v.clone());
        }
        s
    }

    fn dim(&self) -> usize {
        self.rows.len()
    }
}

/// Kernel of a linear map given by the images of `domain` basis vectors:
/// returns combination vectors (bit k set = k-th domain vector used).
fn kernel(images: &[Bv], domain: usize) -> Vec<Bv> {
    let mut pivots: BTreeMap<usize, (Bv, Bv)> = BTreeMap::new();
    let mut out = Vec::new();
    for (k, image) in images.iter().enumerate() {
        let mut im = image.clone();
        let mut combo = Bv::zero(domain);
        combo.set(k);
        loop {
            match im.first_set() {
                None => {
                    out.push(combo);
                    break;
                }
                Some(p) => match pivots.get(&p) {
                    Some((pi, pc)) => {
                        im.xor(pi);
                        combo.xor(pc);
                    }
                    None => {
                        pivots.insert(p, (im, combo));
                        break;
                    }
                },
            }
        }
    }
    out
}

/// Basis of the intersection of span(`rows`) with the coordinate subspace
/// spanned by the allowed positions: eliminate each disallowed coordinate,
/// dropping one pivot row per coordinate present.
fn intersect_coords(rows: &[Bv], allowed: &Bv, n: usize) -> Vec<Bv> {
    let mut work: Vec<Bv> = rows.to_vec();
    for c in 0..n {
        if allowed.get(c) {
            continue;
        }
        let Some(idx) = work.iter().position(|r| r.get(c)) else {
            continue;
        };
        let pivot = work.swap_remove(idx);
        for r in &mut work {
            if r.get(c) {
                r.xor(&pivot);
            }
        }
    }
    work
}

struct PageEngine {
    n: usize,
    /// Internal filtration degree: the differential never decreases it.
    deg: Vec<i32>,
    /// The other grading, with its own filtration sense.
    other: Vec<i32>,
    other_descending: bool,
    d_of: Vec<Bv>,
}

impl PageEngine {
    /// Basis of Z_r^p = {x in F^p : dx in F^{p+r}} (F^p = degrees >= p).
    fn z_basis(&self, r: i32, p: i32) -> Vec<Bv> {
        let domain: Vec<usize> = (0..self.n).filter(|&k| self.deg[k] >= p).collect();
        let images: Vec<Bv> = domain
            .iter()
            .map(|&k| {
                let mut im = self.d_of[k].clone();
                for t in 0..self.n {
                    if self.deg[t] >= p + r && im.get(t) {
                        im.xor(&unit(self.n, t));
                    }
                }
                im
            })
            .collect();
        kernel(&images, domain.len())
            .into_iter()
            .map(|combo| {
                let mut v = Bv::zero(self.n);
                for (slot, &k) in domain.iter().enumerate() {
                    if combo.get(slot) {
                        v.set(k);
                    }
                }
                v
            })
            .collect()
    }

    fn apply_d(&self, v: &Bv) -> Bv {
        let mut out = Bv::zero(self.n);
        for k in 0..self.n {
            if v.get(k) {
                out.xor(&self.d_of[k]);
            }
        }
        out
    }

    /// Induced levels of the other grading on the subquotient Z / B:
    /// dimension jumps along the other filtration's coordinate chain.
    fn induced_levels(&self, z: &[Bv], b: &[Bv], acc: &mut BTreeMap<i32, usize>) {
        let b_dim = Span::of(b).dim();
        let top = Span::of(&[z, b].concat()).dim() - b_dim;
        if top == 0 {
            return;
        }
        let mut values: Vec<i32> = {
            let set: BTreeSet<i32> = (0..self.n).map(|k| self.other[k]).collect();
            set.into_iter().collect()
        };
        if !self.other_descending {
            values.reverse();
        }
        let mut prev = 0usize;
        for &level in &values {
            let mut allowed = Bv::zero(self.n);
            for k in 0..self.n {
                let inside = if self.other_descending {
                    self.other[k] <= level
                } else {
                    self.other[k] >= level
                };
                if inside {
                    allowed.set(k);
                }
            }
            let cut = intersect_coords(z, &allowed, self.n);
            let here = Span::of(&[cut.as_slice(), b].concat()).dim() - b_dim;
            if here > prev {
                *acc.entry(level).or_default() += here - prev;
                prev = here;
            }
            if prev == top {
                break;
            }
        }
    }
}

fn unit(n: usize, k: usize) -> Bv {
    let mut v = Bv::zero(n);
    v.set(k);
    v
}

/// Spectral-sequence pages E^0..E^{r_max} for the chosen filtration, with
/// the other grading's induced levels per page, page-differential ranks,
/// and the total homology of the complex for contrast. Levels in the report
/// are in the original grading (I or A) of the chosen filtration.
pub fn pages(c: &BiFilteredComplex, which: Filtration, r_max: usize) -> PagesReport {
    let n = c.len();
    let (deg, other, other_descending): (Vec<i32>, Vec<i32>, bool) = match which {
        Filtration::I => (
            c.gens.iter().map(|g| g.i).collect(),
            c.gens.iter().map(|g| g.a).collect(),
            true,
        ),
        Filtration::A => (
            c.gens.iter().map(|g| -g.a).collect(),
            c.gens.iter().map(|g| g.i).collect(),
            false,
        ),
    };
    let d_of: Vec<Bv> = c
        .cols
        .iter()
        .map(|col| {
            let mut v = Bv::zero(n);
            for &t in col {
                v.set(t);
            }
            v
        })
        .collect();
    let eng = PageEngine {
        n,
        deg: deg.clone(),
        other,
        other_descending,
        d_of,
    };
    let to_report_level = |p: i32| match which {
        Filtration::I => p,
        Filtration::A => -p,
    };

    let levels: Vec<i32> = {
        let set: BTreeSet<i32> = deg.iter().copied().collect();
        set.into_iter().collect()
    };
    // dims[r] keyed by internal degree; computed one page past r_max so the
    // top page's differential rank is still available.
    let mut dims: Vec<BTreeMap<i32, usize>> = Vec::new();
    let mut induced: Vec<BTreeMap<i32, usize>> = Vec::new();
    for r in 0..=(r_max + 1) {
        let mut page_dims = BTreeMap::new();
        let mut page_induced = BTreeMap::new();
        for &p in &levels {
            let z = eng.z_basis(r as i32, p);
            let b: Vec<Bv> = if r == 0 {
                (0..n).filter(|&k| deg[k] > p).map(|k| unit(n, k)).collect()
            } else {
                let mut rows = eng.z_basis(r as i32 - 1, p + 1);
                for v in eng.z_basis(r as i32 - 1, p - r as i32 + 1) {
                    rows.push(eng.apply_d(&v));
                }
                rows
            };
            // (Z + D)/D rather than Z/D: identical when D ⊆ Z (always true
            // for a genuinely bi-filtered differential) and well-defined
            // even on input that is monotone only in the other filtration.
            let b_dim = Span::of(&b).dim();
            let dim = Span::of(&[z.as_slice(), &b].concat()).dim() - b_dim;
            if dim > 0 {
                page_dims.insert(p, dim);
            }
            if r <= r_max && dim > 0 {
                eng.induced_levels(&z, &b, &mut page_induced);
            }
        }
        dims.push(page_dims);
        induced.push(page_induced);
    }

    let mut pages_out = Vec::new();
    for r in 0..=r_max {
        let mut d_ranks: BTreeMap<i32, usize> = BTreeMap::new();
        for &p in &levels {
            let here = dims[r].get(&p).copied().unwrap_or(0);
            let next = dims[r + 1].get(&p).copied().unwrap_or(0);
            let rank = if r == 0 {
                (here - next) / 2
            } else {
                let incoming = d_ranks.get(&(p - r as i32)).copied().unwrap_or(0);
                here - next - incoming
            };
            if rank > 0 {
                d_ranks.insert(p, rank);
            }
        }
        pages_out.push(PageTable {
            r,
            dims: dims[r]
                .iter()
                .map(|(&p, &d)| (to_report_level(p), d))
                .collect(),
            d_rank: d_ranks.values().sum(),
            d_ranks: d_ranks
                .into_iter()
                .map(|(p, rank)| (to_report_level(p), rank))
                .collect(),
            induced_levels: induced[r].iter().map(|(&l, &c)| (l, c)).collect(),
        });
    }

    // Homology of the total complex, with the same induced-level report.
    let z_total = kernel(&eng.d_of, n)
        .into_iter()
        .map(|combo| {
            let mut v = Bv::zero(n);
            for k in 0..n {
                if combo.get(k) {
                    v.set(k);
                }
            }
            v
        })
        .collect::<Vec<_>>();
    let b_total: Vec<Bv> = (0..n).map(|k| eng.d_of[k].clone()).collect();
    let total_rank = Span::of(&z_total).dim() - Span::of(&b_total).dim();
    let mut total_levels = BTreeMap::new();
    eng.induced_levels(&z_total, &b_total, &mut total_levels);

    PagesReport {
        filtration: which,
        pages: pages_out,
        total_rank,
        total_levels: total_levels.into_iter().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::braid::BraidWord;
    use crate::diagram::closure_diagram;
    use crate::engine;
    use crate::khovanov::{build_complex, build_cube, Flavor, Reduction};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    const TOY: &str = include_str!("../tests/data/toy.bfc");

    fn toy() -> BiFilteredComplex {
        parse_bifiltered(TOY).unwrap()
    }

    #[test]
    fn toy_file_parses_to_three_generators() {
        let c = toy();
        assert_eq!(c.len(), 3);
        assert_eq!(c.gens[0].name, "x");
        assert_eq!((c.gens[1].a, c.gens[1].i), (-2, 1));
        assert_eq!((c.gens[2].a, c.gens[2].i), (-1, 2));
        assert_eq!(c.cols, vec![vec![1, 2], vec![], vec![]]);
        assert!(parse_bifiltered("").unwrap().is_empty());
    }

    #[test]
    fn parser_rejects_malformed_complexes() {
        // d squares to a nonzero map.
        let bad_square = "g a i=0 a=0\ng b i=1 a=0\ng c i=2 a=0\nd a -> b\nd b -> c\n";
        assert!(parse_bifiltered(bad_square).is_err());
        // An arrow that decreases I.
        let bad_i = "g a i=1 a=0\ng b i=0 a=0\nd a -> b\n";
        assert!(parse_bifiltered(bad_i).is_err());
        // Unknown target name.
        assert!(parse_bifiltered("g a i=0 a=0\nd a -> ghost\n").is_err());
        // Missing gradings.
        assert!(parse_bifiltered("g a i=0\n").is_err());
    }

    #[test]
    fn toy_pages_for_the_ascending_filtration() {
        let report = pages(&toy(), Filtration::I, 3);
        let by_level = |r: usize| &report.pages[r].dims;
        // E^0 and E^1: one class per I-level; the level-preserving
        // differential is trivial.
        for r in 0..=1 {
            assert_eq!(
                by_level(r),
                &BTreeMap::from([(0, 1), (1, 1), (2, 1)]),
                "page {r}"
            );
        }
        assert_eq!(report.pages[0].d_rank, 0);
        // d^1 maps [x] (level 0) onto [y] (level 1).
        assert_eq!(report.pages[1].d_rank, 1);
        assert_eq!(report.pages[1].d_ranks, BTreeMap::from([(0, 1)]));
        // E^2: only [z] survives, and its inherited level is A = -1.
        assert_eq!(by_level(2), &BTreeMap::from([(2, 1)]));
        assert_eq!(report.pages[2].induced_levels, vec![(-1, 1)]);
        assert_eq!(report.pages[2].d_rank, 0);
        // The page sequence has collapsed.
        assert_eq!(by_level(3), by_level(2));
        // Homology of the total complex: rank 1, but at level A = -2 — the
        // collapsed page and the homology differ as A-filtered spaces.
        assert_eq!(report.total_rank, 1);
        assert_eq!(report.total_levels, vec![(-2, 1)]);
    }

    #[test]
    fn toy_pages_for_the_descending_filtration() {
        let report = pages(&toy(), Filtration::A, 2);
        assert_eq!(
            report.pages[1].dims,
            BTreeMap::from([(-2, 1), (-1, 1), (0, 1)])
        );
        // d^1 maps [x] (level 0) onto [z] (level -1); [y] survives with
        // inherited level I = 1.
        assert_eq!(report.pages[1].d_ranks, BTreeMap::from([(0, 1)]));
        assert_eq!(report.pages[2].dims, BTreeMap::from([(-2, 1)]));
        assert_eq!(report.pages[2].induced_levels, vec![(1, 1)]);
        assert_eq!(report.total_rank, 1);
        // The homology class admits z as a representative, so its inherited
        // ascending level is I = 2 — again differing from the E^2 page.
        assert_eq!(report.total_levels, vec![(2, 1)]);
    }

    #[test]
    fn toy_complex_is_already_reduced() {
        let c = toy();
        assert_eq!(cancel_reduce(&c), c);
    }

    #[test]
    fn acyclic_same_bidegree_pair_dies_at_the_first_page() {
        let text = "g a i=0 a=0\ng b i=0 a=0\nd a -> b\n";
        let c = parse_bifiltered(text).unwrap();
        let report = pages(&c, Filtration::I, 3);
        assert_eq!(report.pages[0].dims, BTreeMap::from([(0, 2)]));
        assert_eq!(report.pages[0].d_rank, 1);
        for r in 1..=3 {
            assert!(report.pages[r].dims.is_empty(), "page {r}");
        }
        assert_eq!(report.total_rank, 0);
        // cancel_reduce removes the pair outright.
        assert!(cancel_reduce(&c).is_empty());
    }

    #[test]
    fn cancellation_reroutes_zigzag_arrows() {
        // u and v share a bidegree; w -> v and u -> x are the zig-zag legs,
        // so cancelling (u, v) must create w -> x.
        let text = "\
g u i=0 a=0
g v i=0 a=0
g w i=0 a=1
g x i=1 a=-1
d u -> v,x
d w -> v
";
        let c = parse_bifiltered(text).unwrap();
        let reduced = cancel_reduce(&c);
        assert_eq!(reduced.len(), 2);
        let names: Vec<&str> = reduced.gens.iter().map(|g| g.name.as_str()).collect();
        assert_eq!(names, vec!["w", "x"]);
        assert_eq!(reduced.cols, vec![vec![1], vec![]]);
        // No surviving arrow preserves the bidegree.
        for (g, col) in reduced.cols.iter().enumerate() {
            for &t in col {
                let (a, b) = (&reduced.gens[g], &reduced.gens[t]);
                assert!((a.a, a.i) != (b.a, b.i));
            }
        }
        // Total homology is preserved (both complexes are acyclic).
        assert_eq!(pages(&c, Filtration::I, 0).total_rank, 0);
        assert_eq!(pages(&reduced, Filtration::I, 0).total_rank, 0);
    }

    #[test]
    fn imported_cube_complexes_page_to_their_homology() {
        for word in ["1", "1,1,1", "1,-2,1,-2", "-1,-1,-1"] {
            let w: BraidWord = word.parse().unwrap();
            let cube = build_cube(&closure_diagram(&w)).unwrap();
            let kc = build_complex(&cube, Flavor::KhovanovF2, Reduction::Unreduced).unwrap();
            let oracle = engine::homology(&kc);
            let mut by_i: BTreeMap<i32, usize> = BTreeMap::new();
            for (&(i, _q), &d) in &oracle.dims {
                *by_i.entry(i as i32).or_default() += d;
            }
            let c = from_khovanov(&kc);
            // Every cube arrow raises I by exactly one, so nothing cancels
            // in bidegree and the sequence collapses at E^2 = homology.
            assert_eq!(cancel_reduce(&c), c, "{word}");
            let report = pages(&c, Filtration::I, 4);
            assert_eq!(report.pages[2].dims, by_i, "{word}");
            assert_eq!(report.pages[4].dims, by_i, "{word}");
            assert_eq!(report.total_rank, oracle.total_rank, "{word}");
        }
    }

    /// Arrow g -> h is admissible in a genuinely bi-filtered complex: it
    /// must not decrease I and must not increase A.
    fn admissible(gens: &[BiGen], g: usize, h: usize) -> bool {
        gens[h].i >= gens[g].i && gens[h].a <= gens[g].a
    }

    /// Random bi-filtered complexes with d² = 0 by construction: a partial
    /// matching of generators oriented along both filtrations gives a
    /// square-zero differential, then random bi-filtered transvections
    /// x -> x + y conjugate it into something unstructured.
    fn random_complex(rng: &mut ChaCha8Rng) -> BiFilteredComplex {
        let n = rng.gen_range(1..=30usize);
        let gens: Vec<BiGen> = (0..n)
            .map(|k| BiGen {
                name: format!("g{k}"),
                a: rng.gen_range(-3..=3),
                i: rng.gen_range(0..=4),
            })
            .collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut cols: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for pair in order.chunks(2) {
            if pair.len() < 2 || rng.gen_bool(0.3) {
                continue;
            }
            let (mut g, mut h) = (pair[0], pair[1]);
            if !admissible(&gens, g, h) {
                std::mem::swap(&mut g, &mut h);
            }
            if admissible(&gens, g, h) {
                cols[g].insert(h);
            }
        }
        for _ in 0..rng.gen_range(0..=2 * n) {
            let x = rng.gen_range(0..n);
            let y = rng.gen_range(0..n);
            if x == y || !admissible(&gens, x, y) {
                continue;
            }
            // Conjugate d by the transvection T: x -> x + y (T is its own
            // inverse over GF(2)): new_d(v) = T(d(T(v))).
            let mut new_cols: Vec<BTreeSet<usize>> = Vec::with_capacity(n);
            for v in 0..n {
                let mut chain = cols[v].clone();
                if v == x {
                    for &t in &cols[y] {
                        if !chain.remove(&t) {
                            chain.insert(t);
                        }
                    }
                }
                if chain.contains(&x) && !chain.remove(&y) {
                    chain.insert(y);
                }
                new_cols.push(chain);
            }
            cols = new_cols;
        }
        BiFilteredComplex::new(
            gens,
            cols.into_iter().map(|s| s.into_iter().collect()).collect(),
        )
        .expect("construction preserves the filtration invariants")
    }

    #[test]
    fn cancellation_preserves_every_page_on_random_complexes() {
        // Fixed seed for reproducibility.
        let mut rng = ChaCha8Rng::seed_from_u64(0xB1F1);
        for trial in 0..200 {
            let c = random_complex(&mut rng);
            let reduced = cancel_reduce(&c);
            // The reduction's output must itself be a valid complex.
            BiFilteredComplex::new(reduced.gens.clone(), reduced.cols.clone())
                .unwrap_or_else(|e| panic!("trial {trial}: invalid reduction: {e}"));
            for which in [Filtration::I, Filtration::A] {
                let before = pages(&c, which, 5);
                let after = pages(&reduced, which, 5);
                // E^0 merely counts generators per level, and the reduction
                // removes cancelling pairs by design; every page from E^1 on
                // is an invariant of the bi-filtered homotopy type.
                for r in 1..=5 {
                    assert_eq!(
                        before.pages[r].dims, after.pages[r].dims,
                        "trial {trial} page {r} {which:?}"
                    );
                    assert_eq!(
                        before.pages[r].d_ranks, after.pages[r].d_ranks,
                        "trial {trial} page {r} {which:?}"
                    );
                }
                assert_eq!(before.total_rank, after.total_rank, "trial {trial}");
                // Page dimensions never grow with r.
                for r in 0..5 {
                    for (level, dim) in &before.pages[r + 1].dims {
                        assert!(
                            dim <= before.pages[r].dims.get(level).unwrap_or(&0),
                            "trial {trial} level {level}"
                        );
                    }
                }
            }
        }
    }
}
