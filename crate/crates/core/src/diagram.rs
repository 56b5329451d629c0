//! Closure diagrams of braid words in the annulus.
//!
//! A diagram is the braid word drawn in an annular band: `strands` concentric
//! tracks, one letter per angular sector, plus the closure arcs identifying
//! the top of each track with its bottom. Level points `(s, t)` for strand
//! `s` and level `t in 0..=L` discretize the tracks; every resolution of the
//! crossings is traced through these points, which gives circle membership,
//! the winding number around the braid axis, and the marked circle (the one
//! through strand 1's closure arc) in one pass.
//!
//! Letters may carry a forced cap-cup smoothing. Such letters are no longer
//! crossings; they model partially resolved diagrams.

use crate::braid::BraidWord;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Smoothing {
    /// Both strands pass straight through (the orientation-preserving smoothing).
    Parallel,
    /// The strands turn around: a cap below, a cup above.
    CapCup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Letter {
    /// Generator index: the letter acts on tracks `pos` and `pos + 1`.
    pub pos: usize,
    pub sign: i8,
    /// `Some` when the letter has been resolved into a fixed smoothing.
    pub forced: Option<Smoothing>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkDiagram {
    strands: usize,
    letters: Vec<Letter>,
}

/// A crossing that is still a crossing (no forced smoothing).
#[derive(Debug, Clone, Copy)]
pub struct Crossing {
    /// Index into the letter list.
    pub letter: usize,
    pub pos: usize,
    pub sign: i8,
}

/// One fully smoothed state of the diagram.
#[derive(Debug, Clone)]
pub struct Resolution {
    pub n_circles: usize,
    /// Circle id of each level point, ids ordered by least point.
    pub circle_of: Vec<u8>,
    /// Bit `c` set iff circle `c` has nonzero winding around the axis.
    pub essential: u32,
    /// Circle through strand 1's closure arc.
    pub marked: u8,
    /// Least level point on each circle.
    pub reps: Vec<u32>,
}

/// Checkerboard faces of the underlying (partially resolved) diagram.
#[derive(Debug, Clone)]
pub struct Faces {
    pub n_faces: usize,
    /// Face id per cell; cell `(gap, sector)` has index `gap * sectors + sector`.
    pub face_of_cell: Vec<u32>,
    /// Gap parity of each face (true = odd gap). Well defined: smoothings only
    /// ever merge gaps of equal parity.
    pub odd_gap: Vec<bool>,
    pub sectors: usize,
}

/// The four local faces around a crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrossingFaces {
    pub n: u32,
    pub s: u32,
    pub w: u32,
    pub e: u32,
}

pub fn closure_diagram(w: &BraidWord) -> LinkDiagram {
    LinkDiagram {
        strands: w.strands(),
        letters: w
            .letters()
            .iter()
            .map(|&l| Letter {
                pos: l.unsigned_abs() as usize,
                sign: l.signum() as i8,
                forced: None,
            })
            .collect(),
    }
}

impl LinkDiagram {
    pub fn strands(&self) -> usize {
        self.strands
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn levels(&self) -> usize {
        self.letters.len() + 1
    }

    fn point(&self, s: usize, t: usize) -> usize {
        t * self.strands + (s - 1)
    }

    pub fn n_points(&self) -> usize {
        self.strands * self.levels()
    }

    /// Letters that are still crossings, in word order. Resolution state bits
    /// index this list.
    pub fn crossings(&self) -> Vec<Crossing> {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, l)| l.forced.is_none())
            .map(|(letter, l)| Crossing {
                letter,
                pos: l.pos,
                sign: l.sign,
            })
            .collect()
    }

    pub fn n_crossings(&self) -> usize {
        self.letters.iter().filter(|l| l.forced.is_none()).count()
    }

    pub fn n_pos(&self) -> usize {
        self.letters
            .iter()
            .filter(|l| l.forced.is_none() && l.sign > 0)
            .count()
    }

    pub fn n_neg(&self) -> usize {
        self.letters
            .iter()
            .filter(|l| l.forced.is_none() && l.sign < 0)
            .count()
    }

    pub fn writhe(&self) -> i64 {
        self.n_pos() as i64 - self.n_neg() as i64
    }

    /// Resolves letter `idx` into the cap-cup smoothing.
    pub fn with_capped(&self, idx: usize) -> LinkDiagram {
        let mut d = self.clone();
        d.letters[idx].forced = Some(Smoothing::CapCup);
        d
    }

    /// Removes letter `idx` (equivalently: resolves it into the parallel
    /// smoothing, which is isotopic to deleting the letter).
    pub fn with_deleted(&self, idx: usize) -> LinkDiagram {
        let mut d = self.clone();
        d.letters.remove(idx);
        d
    }

    /// Smoothing of crossing `j` (index into `crossings()`) selected by state
    /// bit `bit`: bit 0 picks the smoothing compatible with the checkerboard
    /// cube convention (parallel at positive crossings, cap-cup at negative).
    pub fn crossing_smoothing(sign: i8, bit: bool) -> Smoothing {
        match (sign > 0, bit) {
            (true, false) | (false, true) => Smoothing::Parallel,
            (true, true) | (false, false) => Smoothing::CapCup,
        }
    }

    /// The state selecting the orientation-compatible smoothing everywhere.
    pub fn oriented_state(&self) -> u64 {
        let mut state = 0u64;
        for (j, c) in self.crossings().iter().enumerate() {
            if c.sign < 0 {
                state |= 1 << j;
            }
        }
        state
    }

    /// Traces the circles of the resolution selected by `state` (one bit per
    /// crossing, see `crossings()`).
    pub fn resolve(&self, state: u64) -> Resolution {
        let n_points = self.n_points();
        const NONE: (u32, u8, i8) = (u32::MAX, 0, 0);
        let mut links = vec![[NONE; 2]; n_points];
        let mut fill = vec![0u8; n_points];
        let connect = |links: &mut Vec<[(u32, u8, i8); 2]>,
                       fill: &mut Vec<u8>,
                       p: usize,
                       q: usize,
                       wind: i8| {
            let sp = fill[p];
            fill[p] += 1;
            let sq = fill[q];
            fill[q] += 1;
            links[p][sp as usize] = (q as u32, sq, wind);
            links[q][sq as usize] = (p as u32, sp, -wind);
        };

        let mut bit = 0usize;
        for (t, l) in self.letters.iter().enumerate() {
            let sm = match l.forced {
                Some(sm) => sm,
                None => {
                    let b = state >> bit & 1 == 1;
                    bit += 1;
                    Self::crossing_smoothing(l.sign, b)
                }
            };
            let k = l.pos;
            match sm {
                Smoothing::Parallel => {
                    connect(
                        &mut links,
                        &mut fill,
                        self.point(k, t),
                        self.point(k, t + 1),
                        0,
                    );
                    connect(
                        &mut links,
                        &mut fill,
                        self.point(k + 1, t),
                        self.point(k + 1, t + 1),
                        0,
                    );
                }
                Smoothing::CapCup => {
                    connect(
                        &mut links,
                        &mut fill,
                        self.point(k, t),
                        self.point(k + 1, t),
                        0,
                    );
                    connect(
                        &mut links,
                        &mut fill,
                        self.point(k, t + 1),
                        self.point(k + 1, t + 1),
                        0,
                    );
                }
            }
            for s in 1..=self.strands {
                if s != k && s != k + 1 {
                    connect(
                        &mut links,
                        &mut fill,
                        self.point(s, t),
                        self.point(s, t + 1),
                        0,
                    );
                }
            }
        }
        let top = self.letters.len();
        for s in 1..=self.strands {
            // Traversing top-to-bottom passes the closure arc positively.
            connect(
                &mut links,
                &mut fill,
                self.point(s, top),
                self.point(s, 0),
                1,
            );
        }
        debug_assert!(fill.iter().all(|&f| f == 2));

        let mut circle_of = vec![u8::MAX; n_points];
        let mut reps = Vec::new();
        let mut essential = 0u32;
        for p0 in 0..n_points {
            if circle_of[p0] != u8::MAX {
                continue;
            }
            let cid = reps.len() as u8;
            reps.push(p0 as u32);
            let mut wind = 0i32;
            let (mut cur, mut slot) = (p0, 0usize);
            loop {
                circle_of[cur] = cid;
                let (to, to_slot, w) = links[cur][slot];
                wind += w as i32;
                cur = to as usize;
                slot = 1 - to_slot as usize;
                if cur == p0 && slot == 0 {
                    break;
                }
            }
            debug_assert!(wind.abs() <= 1, "embedded circles wind at most once");
            if wind != 0 {
                essential |= 1 << cid;
            }
        }
        Resolution {
            n_circles: reps.len(),
            marked: circle_of[0],
            circle_of,
            essential,
            reps,
        }
    }

    /// Number of components of the underlying link (crossings pass through,
    /// forced smoothings are followed).
    pub fn components(&self) -> usize {
        let n_points = self.n_points();
        const NONE: (u32, u8, i8) = (u32::MAX, 0, 0);
        let mut links = vec![[NONE; 2]; n_points];
        let mut fill = vec![0u8; n_points];
        let connect =
            |links: &mut Vec<[(u32, u8, i8); 2]>, fill: &mut Vec<u8>, p: usize, q: usize| {
                let sp = fill[p];
                fill[p] += 1;
                let sq = fill[q];
                fill[q] += 1;
                links[p][sp as usize] = (q as u32, sq, 0);
                links[q][sq as usize] = (p as u32, sp, 0);
            };
        for (t, l) in self.letters.iter().enumerate() {
            let k = l.pos;
            match l.forced {
                None => {
                    // Strands cross: track k continues on track k+1 and back.
                    connect(
                        &mut links,
                        &mut fill,
                        self.point(k, t),
                        self.point(k + 1, t + 1),
                    );
                    connect(
                        &mut links,
                        &mut fill,
                        self.point(k + 1, t),
                        self.point(k, t + 1),
                    );
                }
                Some(Smoothing::Parallel) => {
                    connect(
                        &mut links,
                        &mut fill,
                        self.point(k, t),
                        self.point(k, t + 1),
                    );
                    connect(
                        &mut links,
                        &mut fill,
                        self.point(k + 1, t),
                        self.point(k + 1, t + 1),
                    );
                }
                Some(Smoothing::CapCup) => {
                    connect(
                        &mut links,
                        &mut fill,
                        self.point(k, t),
                        self.point(k + 1, t),
                    );
                    connect(
                        &mut links,
                        &mut fill,
                        self.point(k, t + 1),
                        self.point(k + 1, t + 1),
                    );
                }
            }
            for s in 1..=self.strands {
                if s != k && s != k + 1 {
                    connect(
                        &mut links,
                        &mut fill,
                        self.point(s, t),
                        self.point(s, t + 1),
                    );
                }
            }
        }
        let top = self.letters.len();
        for s in 1..=self.strands {
            connect(&mut links, &mut fill, self.point(s, top), self.point(s, 0));
        }
        debug_assert!(fill.iter().all(|&f| f == 2));

        let mut seen = vec![false; n_points];
        let mut n = 0;
        for p0 in 0..n_points {
            if seen[p0] {
                continue;
            }
            n += 1;
            let (mut cur, mut slot) = (p0, 0usize);
            loop {
                seen[cur] = true;
                let (to, to_slot, _) = links[cur][slot];
                cur = to as usize;
                slot = 1 - to_slot as usize;
                if cur == p0 && slot == 0 {
                    break;
                }
            }
        }
        n
    }

    /// True when the diagram's underlying curve system is connected, i.e.
    /// every gap between adjacent tracks is pinched by some letter.
    pub fn connected(&self) -> bool {
        (1..self.strands).all(|g| self.letters.iter().any(|l| l.pos == g))
    }

    /// Checkerboard faces by union-find over annular cells.
    pub fn faces(&self) -> Faces {
        let b = self.strands;
        let sectors = self.letters.len().max(1);
        let n_cells = (b + 1) * sectors;
        let cell = |g: usize, t: usize| g * sectors + t;
        let mut uf = UnionFind::new(n_cells);
        for (t, l) in self.letters.iter().enumerate() {
            let prev = (t + sectors - 1) % sectors;
            for g in 0..=b {
                if g != l.pos {
                    uf.union(cell(g, prev), cell(g, t));
                }
            }
            if l.forced == Some(Smoothing::CapCup) {
                uf.union(cell(l.pos - 1, prev), cell(l.pos + 1, prev));
            }
        }
        let mut ids = vec![u32::MAX; n_cells];
        let mut odd_gap = Vec::new();
        let mut n_faces = 0u32;
        let mut face_of_cell = vec![0u32; n_cells];
        for g in 0..=b {
            for t in 0..sectors {
                let c = cell(g, t);
                let root = uf.find(c);
                if ids[root] == u32::MAX {
                    ids[root] = n_faces;
                    odd_gap.push(g % 2 == 1);
                    n_faces += 1;
                }
                face_of_cell[c] = ids[root];
                debug_assert_eq!(odd_gap[ids[root] as usize], g % 2 == 1);
            }
        }
        Faces {
            n_faces: n_faces as usize,
            face_of_cell,
            odd_gap,
            sectors,
        }
    }

    /// Local faces around the crossing at letter index `idx`.
    pub fn crossing_faces(&self, faces: &Faces, idx: usize) -> CrossingFaces {
        let l = &self.letters[idx];
        debug_assert!(l.forced.is_none());
        let sectors = faces.sectors;
        let cell = |g: usize, t: usize| g * sectors + t;
        let t = idx % sectors;
        let prev = (idx + sectors - 1) % sectors;
        CrossingFaces {
            n: faces.face_of_cell[cell(l.pos, t)],
            s: faces.face_of_cell[cell(l.pos, prev)],
            w: faces.face_of_cell[cell(l.pos - 1, prev)],
            e: faces.face_of_cell[cell(l.pos + 1, prev)],
        }
    }

    /// (V, E, F) of the projection on the sphere. Valid when every component
    /// of the underlying curve passes through a crossing.
    pub fn euler(&self) -> (usize, usize, usize) {
        let v = self.n_crossings();
        (v, 2 * v, self.faces().n_faces)
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }
}
