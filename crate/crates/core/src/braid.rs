//! Braid words and the bookkeeping of their closures.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// A word in the Artin generators of the braid group on `strands` strands.
///
/// Letter `k > 0` is the positive generator swapping strands `k` and `k+1`;
/// `-k` is its inverse. Strands are numbered `1..=strands`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BraidWord {
    strands: usize,
    letters: Vec<i32>,
}

impl BraidWord {
    pub fn new(letters: Vec<i32>, strands: usize) -> Result<Self> {
        if strands == 0 {
            return Err(Error::BadWord("strand count must be positive".into()));
        }
        for &l in &letters {
            if l == 0 {
                return Err(Error::BadWord("letter 0 is not a generator".into()));
            }
            let k = l.unsigned_abs() as usize;
            if k + 1 > strands {
                return Err(Error::BadWord(format!(
                    "letter {l} needs at least {} strands, got {strands}",
                    k + 1
                )));
            }
        }
        Ok(BraidWord { strands, letters })
    }

    /// Parses a comma/whitespace-separated word; `strands` defaults to the
    /// smallest index that supports every letter.
    pub fn parse(text: &str, strands: Option<usize>) -> Result<Self> {
        let mut letters = Vec::new();
        for tok in text.split(|c: char| c == ',' || c.is_whitespace()) {
            if tok.is_empty() {
                continue;
            }
            let l: i32 = tok
                .parse()
                .map_err(|_| Error::BadWord(format!("bad letter {tok:?}")))?;
            letters.push(l);
        }
        let min = letters
            .iter()
            .map(|l| l.unsigned_abs() as usize + 1)
            .max()
            .unwrap_or(1);
        Self::new(letters, strands.unwrap_or(min))
    }

    pub fn strands(&self) -> usize {
        self.strands
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn writhe(&self) -> i64 {
        self.letters.iter().map(|&l| l.signum() as i64).sum()
    }

    pub fn n_pos(&self) -> usize {
        self.letters.iter().filter(|&&l| l > 0).count()
    }

    pub fn n_neg(&self) -> usize {
        self.letters.iter().filter(|&&l| l < 0).count()
    }

    /// Self-linking number of the closure as a transverse link: writhe minus
    /// the strand count.
    pub fn self_linking(&self) -> i64 {
        self.writhe() - self.strands as i64
    }

    /// Mirror word: every crossing sign reversed.
    pub fn mirror(&self) -> BraidWord {
        BraidWord {
            strands: self.strands,
            letters: self.letters.iter().map(|&l| -l).collect(),
        }
    }

    /// The permutation of strand start points to end points: strand entering
    /// at position `s` (0-based) leaves at `permutation()[s]`.
    pub fn permutation(&self) -> Vec<usize> {
        let mut p: Vec<usize> = (0..self.strands).collect();
        for &l in &self.letters {
            let k = l.unsigned_abs() as usize - 1;
            p.swap(k, k + 1);
        }
        // p[pos] = which start ends up at pos; invert so start -> end.
        let mut inv = vec![0; self.strands];
        for (pos, &start) in p.iter().enumerate() {
            inv[start] = pos;
        }
        inv
    }

    /// Number of components of the closure.
    pub fn components(&self) -> usize {
        let p = self.permutation();
        let mut seen = vec![false; self.strands];
        let mut n = 0;
        for s in 0..self.strands {
            if seen[s] {
                continue;
            }
            n += 1;
            let mut t = s;
            while !seen[t] {
                seen[t] = true;
                t = p[t];
            }
        }
        n
    }

    pub fn is_knot(&self) -> bool {
        self.components() == 1
    }

    /// The resolution that smooths every crossing compatibly with the braid
    /// orientation: state bit 0 at positive letters, 1 at negative ones. Its
    /// circles are the `strands` nested tracks, all linking the braid axis;
    /// the innermost one (strand 1) carries the marked point.
    pub fn oriented_resolution(&self) -> OrientedResolution {
        OrientedResolution {
            state: self.letters.iter().map(|&l| l < 0).collect(),
            circles: (1..=self.strands)
                .map(|s| OrientedCircle {
                    strand: s,
                    axis_linking: true,
                    marked: s == 1,
                })
                .collect(),
        }
    }
}

impl FromStr for BraidWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BraidWord::parse(s, None)
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}",
            self.letters
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(",")
        )
    }
}

/// The orientation-compatible resolution of a braid closure diagram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientedResolution {
    /// One bit per letter: 0 at positive crossings, 1 at negative ones.
    pub state: Vec<bool>,
    /// The nested circles, innermost first.
    pub circles: Vec<OrientedCircle>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientedCircle {
    pub strand: usize,
    pub axis_linking: bool,
    pub marked: bool,
}
