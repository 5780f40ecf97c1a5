use std::fmt::Write as _;

use crate::error::{Error, Result};

/// A spin configuration on a `width x height` torus, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IsingLattice {
    width: usize,
    height: usize,
    spins: Vec<i8>,
}

impl IsingLattice {
    pub fn new(width: usize, height: usize, spins: Vec<i8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Domain(
                "lattice dimensions must be at least 1".into(),
            ));
        }
        if spins.len() != width * height {
            return Err(Error::Domain(format!(
                "expected {} spins for a {width}x{height} lattice, got {}",
                width * height,
                spins.len()
            )));
        }
        if let Some(bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::Domain(format!("spin value {bad} is not +1 or -1")));
        }
        Ok(IsingLattice {
            width,
            height,
            spins,
        })
    }

    pub fn filled(width: usize, height: usize, spin: i8) -> Self {
        assert!(spin == 1 || spin == -1);
        assert!(width > 0 && height > 0);
        IsingLattice {
            width,
            height,
            spins: vec![spin; width * height],
        }
    }

    /// Decodes bit `i` of `bits` as site `i` (1 is +1).
    pub fn from_bits(width: usize, height: usize, bits: u64) -> Self {
        let spins = (0..width * height)
            .map(|i| if bits >> i & 1 == 1 { 1 } else { -1 })
            .collect();
        IsingLattice {
            width,
            height,
            spins,
        }
    }

    pub fn to_bits(&self) -> u64 {
        debug_assert!(self.spins.len() <= 64);
        self.spins
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 1)
            .fold(0u64, |acc, (i, _)| acc | 1 << i)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub(crate) fn spins_mut(&mut self) -> &mut [i8] {
        &mut self.spins
    }

    pub fn get(&self, x: usize, y: usize) -> i8 {
        self.spins[y * self.width + x]
    }

    pub fn magnetization(&self) -> i64 {
        self.spins.iter().map(|&s| s as i64).sum()
    }

    pub fn flipped(&self) -> Self {
        IsingLattice {
            spins: self.spins.iter().map(|s| -s).collect(),
            ..*self
        }
    }

    /// Text form: `width height` on the first line, then one line per row of
    /// space-separated `1` / `-1`.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.spins.len() * 3 + 16);
        writeln!(out, "{} {}", self.width, self.height).unwrap();
        for row in self.spins.chunks(self.width) {
            let line: Vec<&str> = row
                .iter()
                .map(|&s| if s > 0 { "1" } else { "-1" })
                .collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Parses the text form. Line breaks inside the spin block are not significant.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let mut dim = |name: &str| -> Result<usize> {
            tokens
                .next()
                .ok_or_else(|| Error::Parse(format!("missing {name}")))?
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("bad {name}: {e}")))
        };
        let width = dim("width")?;
        let height = dim("height")?;
        let spins = tokens
            .map(|t| match t {
                "1" | "+1" => Ok(1),
                "-1" => Ok(-1),
                other => Err(Error::Parse(format!("bad spin token {other:?}"))),
            })
            .collect::<Result<Vec<i8>>>()?;
        IsingLattice::new(width, height, spins).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Toroidal square-lattice topology. Each undirected edge appears once;
/// self-loops and duplicate edges that wraparound produces on 1- or 2-wide
/// lattices are dropped.
#[derive(Clone, Debug)]
pub struct Torus {
    width: usize,
    height: usize,
    edges: Vec<(u32, u32)>,
    neighbors: Vec<[u32; 4]>,
    degree: Vec<u8>,
}

impl Torus {
    pub fn new(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "torus dimensions must be positive");
        let n = width * height;
        let mut edges = Vec::with_capacity(2 * n);
        let mut neighbors = vec![[0u32; 4]; n];
        let mut degree = vec![0u8; n];
        for y in 0..height {
            for x in 0..width {
                let i = y * width + x;
                let right = y * width + (x + 1) % width;
                let down = ((y + 1) % height) * width + x;
                for j in [right, down] {
                    if i == j {
                        continue;
                    }
                    let e = (i.min(j) as u32, i.max(j) as u32);
                    if edges.contains(&e) {
                        continue;
                    }
                    edges.push(e);
                    for (a, b) in [(i, j), (j, i)] {
                        neighbors[a][degree[a] as usize] = b as u32;
                        degree[a] += 1;
                    }
                }
            }
        }
        Torus {
            width,
            height,
            edges,
            neighbors,
            degree,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn sites(&self) -> usize {
        self.width * self.height
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn neighbors(&self, site: usize) -> &[u32] {
        &self.neighbors[site][..self.degree[site] as usize]
    }

    pub(crate) fn check(&self, lattice: &IsingLattice) {
        assert!(
            lattice.width == self.width && lattice.height == self.height,
            "lattice is {}x{}, torus is {}x{}",
            lattice.width,
            lattice.height,
            self.width,
            self.height
        );
    }

    /// Sum of `y_i` over the neighbors of `site`.
    #[inline]
    pub fn neighbor_sum(&self, spins: &[i8], site: usize) -> i32 {
        self.neighbors(site)
            .iter()
            .map(|&j| spins[j as usize] as i32)
            .sum()
    }

    /// Sum over undirected edges of `y_i y_j`.
    pub fn edge_agreement(&self, spins: &[i8]) -> i64 {
        self.edges
            .iter()
            .map(|&(i, j)| (spins[i as usize] * spins[j as usize]) as i64)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    /// Independent edge enumeration: unordered pairs of distinct sites at
    /// toroidal Manhattan distance one.
    fn brute_force_edges(w: usize, h: usize) -> HashSet<(usize, usize)> {
        let mut out = HashSet::new();
        for a in 0..w * h {
            for b in a + 1..w * h {
                let (ax, ay) = (a % w, a / w);
                let (bx, by) = (b % w, b / w);
                let dx = (ax + w - bx) % w;
                let dy = (ay + h - by) % h;
                let horizontal = ay == by && (dx == 1 || dx == w - 1);
                let vertical = ax == bx && (dy == 1 || dy == h - 1);
                if horizontal || vertical {
                    out.insert((a, b));
                }
            }
        }
        out
    }

    #[test]
    fn edge_counts_match_enumeration() {
        for w in 1..=6 {
            for h in 1..=6 {
                let t = Torus::new(w, h);
                let got: HashSet<(usize, usize)> = t
                    .edges()
                    .iter()
                    .map(|&(a, b)| (a as usize, b as usize))
                    .collect();
                assert_eq!(got.len(), t.edges().len(), "duplicate edge on {w}x{h}");
                assert_eq!(got, brute_force_edges(w, h), "{w}x{h}");
                if w >= 3 && h >= 3 {
                    assert_eq!(t.edges().len(), 2 * w * h);
                }
            }
        }
        assert_eq!(Torus::new(3, 3).edges().len(), 18);
        assert!(Torus::new(1, 1).edges().is_empty());
    }

    #[test]
    fn neighbor_lists_agree_with_edges() {
        let t = Torus::new(2, 5);
        for i in 0..t.sites() {
            for &j in t.neighbors(i) {
                let e = (i.min(j as usize) as u32, i.max(j as usize) as u32);
                assert!(t.edges().contains(&e));
            }
        }
        let total: usize = (0..t.sites()).map(|i| t.neighbors(i).len()).sum();
        assert_eq!(total, 2 * t.edges().len());
    }

    #[test]
    fn text_format() {
        let l = IsingLattice::new(3, 2, vec![1, -1, 1, -1, -1, 1]).unwrap();
        assert_eq!(l.to_text(), "3 2\n1 -1 1\n-1 -1 1\n");
        assert_eq!(IsingLattice::from_text("3 2 +1 -1 1\n-1 -1 1").unwrap(), l);
        assert!(IsingLattice::from_text("3 2\n1 -1 1\n").is_err());
        assert!(IsingLattice::from_text("2 1\n1 0\n").is_err());
        assert!(IsingLattice::from_text("x 1\n1\n").is_err());
    }

    #[test]
    fn rejects_invalid_lattices() {
        assert!(IsingLattice::new(0, 3, vec![]).is_err());
        assert!(IsingLattice::new(2, 2, vec![1, 1, 1]).is_err());
        assert!(IsingLattice::new(2, 1, vec![1, 2]).is_err());
    }

    proptest! {
        #[test]
        fn text_round_trip(w in 1usize..7, h in 1usize..7, bits in any::<u64>()) {
            let l = IsingLattice::from_bits(w, h, bits);
            prop_assert_eq!(IsingLattice::from_text(&l.to_text()).unwrap(), l.clone());
            prop_assert_eq!(IsingLattice::from_bits(w, h, l.to_bits()), l);
        }
    }
}
