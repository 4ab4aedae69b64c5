//! Dyadic cube addressing on the unit-cell lattice of a base cube `[0, 2^K)^d`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimension and base exponent of a grid: the base cube has side `2^k` unit cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub d: usize,
    #[serde(rename = "K")]
    pub k: u32,
}

/// Largest number of unit cells a grid may hold.
pub const MAX_CELLS: u64 = 1 << 30;

impl Shape {
    pub fn new(d: usize, k: u32) -> Result<Self> {
        let bits = (d as u64).checked_mul(k as u64);
        match bits {
            Some(b) if d >= 1 && b <= MAX_CELLS.trailing_zeros() as u64 => Ok(Shape { d, k }),
            _ => Err(Error::UnsupportedShape { d, k }),
        }
    }

    pub fn side(&self) -> u32 {
        1 << self.k
    }

    pub fn cells(&self) -> usize {
        1usize << (self.d as u32 * self.k)
    }

    /// Number of dyadic cubes of the given level along one axis.
    pub fn cubes_per_axis(&self, level: u32) -> u32 {
        1 << (self.k - level)
    }

    pub fn cubes_at_level(&self, level: u32) -> usize {
        1usize << (self.d as u32 * (self.k - level))
    }

    pub fn total_cubes(&self) -> usize {
        (0..=self.k).map(|l| self.cubes_at_level(l)).sum()
    }

    /// Row-major index of a cell; the last axis varies fastest.
    pub fn index(&self, coords: &[u32]) -> usize {
        row_major(coords, self.side())
    }

    pub fn coords(&self, index: usize) -> Vec<u32> {
        decode(index, self.d, self.side())
    }

    /// Row-major offset between neighbours along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        1usize << (self.k as usize * (self.d - 1 - axis))
    }

    pub fn base_cube(&self) -> CubeId {
        CubeId::new(self.k, vec![0; self.d])
    }

    /// Index of `cube` among the cubes of its level (row-major over cube coordinates).
    pub fn cube_index(&self, cube: &CubeId) -> usize {
        let scaled: Vec<u32> = cube.corner.iter().map(|c| c >> cube.level).collect();
        row_major(&scaled, self.cubes_per_axis(cube.level))
    }

    pub fn cube_at(&self, level: u32, index: usize) -> CubeId {
        let corner = decode(index, self.d, self.cubes_per_axis(level))
            .into_iter()
            .map(|c| c << level)
            .collect();
        CubeId { level, corner }
    }

    pub fn contains_cube(&self, cube: &CubeId) -> bool {
        cube.corner.len() == self.d
            && cube.level <= self.k
            && cube.is_aligned()
            && cube
                .corner
                .iter()
                .all(|&c| (c as u64) + cube.side() as u64 <= self.side() as u64)
    }

    pub fn check_cube(&self, cube: &CubeId) -> Result<()> {
        if self.contains_cube(cube) {
            Ok(())
        } else {
            Err(Error::InvalidCube(cube.to_string()))
        }
    }

    /// All dyadic cubes of the base cube, ordered by level and then row-major.
    pub fn all_cubes(&self) -> impl Iterator<Item = CubeId> + '_ {
        (0..=self.k).flat_map(move |l| (0..self.cubes_at_level(l)).map(move |i| self.cube_at(l, i)))
    }

    /// Row-major cell indices covered by `cube`.
    pub fn cube_cells(&self, cube: &CubeId) -> Vec<usize> {
        let s = cube.side();
        let local = decode_all(self.d, s);
        local
            .map(|offset| {
                let coords: Vec<u32> = offset
                    .iter()
                    .zip(&cube.corner)
                    .map(|(o, c)| o + c)
                    .collect();
                self.index(&coords)
            })
            .collect()
    }

    /// Mapping from each cube index at `level` to its parent's index at `level + 1`.
    pub fn parent_map(&self, level: u32) -> Vec<usize> {
        let n = self.cubes_per_axis(level);
        let parent_n = n / 2;
        (0..self.cubes_at_level(level))
            .map(|i| {
                let c: Vec<u32> = decode(i, self.d, n).into_iter().map(|x| x >> 1).collect();
                row_major(&c, parent_n)
            })
            .collect()
    }
}

fn row_major(coords: &[u32], n: u32) -> usize {
    coords
        .iter()
        .fold(0usize, |acc, &c| acc * n as usize + c as usize)
}

fn decode(mut index: usize, d: usize, n: u32) -> Vec<u32> {
    let mut out = vec![0u32; d];
    for slot in out.iter_mut().rev() {
        *slot = (index % n as usize) as u32;
        index /= n as usize;
    }
    out
}

fn decode_all(d: usize, n: u32) -> impl Iterator<Item = Vec<u32>> {
    let total = (n as usize).pow(d as u32);
    (0..total).map(move |i| decode(i, d, n))
}

/// A dyadic cube `[corner, corner + 2^level)^d` in unit-cell coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CubeId {
    pub level: u32,
    pub corner: Vec<u32>,
}

impl CubeId {
    pub fn new(level: u32, corner: Vec<u32>) -> Self {
        CubeId { level, corner }
    }

    /// The unit cell at `coords`.
    pub fn cell(coords: &[u32]) -> Self {
        CubeId::new(0, coords.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.corner.len()
    }

    pub fn side(&self) -> u32 {
        1 << self.level
    }

    /// Number of unit cells, i.e. the Lebesgue measure `|Q|`.
    pub fn volume(&self) -> u64 {
        1u64 << (self.level as u64 * self.dim() as u64)
    }

    /// Number of unit faces on `∂Q`, i.e. `2d · side^(d-1)`.
    pub fn boundary_area(&self) -> u64 {
        2 * self.dim() as u64 * (1u64 << (self.level as u64 * (self.dim() as u64 - 1)))
    }

    pub fn is_aligned(&self) -> bool {
        self.corner.iter().all(|c| c % self.side() == 0)
    }

    /// The unique dyadic cube one level up; fails on the base cube of `shape`.
    pub fn parent(&self, shape: &Shape) -> Result<CubeId> {
        shape.check_cube(self)?;
        if self.level >= shape.k {
            return Err(Error::LevelOverflow { level: self.level });
        }
        Ok(self.parent_unchecked())
    }

    pub(crate) fn parent_unchecked(&self) -> CubeId {
        let level = self.level + 1;
        let mask = !((1u32 << level) - 1);
        CubeId {
            level,
            corner: self.corner.iter().map(|c| c & mask).collect(),
        }
    }

    /// The `2^d` subcubes one level down, in row-major order of their corners.
    pub fn children(&self) -> Result<Vec<CubeId>> {
        if self.level == 0 {
            return Err(Error::NoChildren);
        }
        let level = self.level - 1;
        let half = 1u32 << level;
        Ok(decode_all(self.dim(), 2)
            .map(|bits| CubeId {
                level,
                corner: self
                    .corner
                    .iter()
                    .zip(bits)
                    .map(|(c, b)| c + b * half)
                    .collect(),
            })
            .collect())
    }

    pub fn contains(&self, other: &CubeId) -> bool {
        other.level <= self.level
            && self
                .corner
                .iter()
                .zip(&other.corner)
                .all(|(&a, &b)| b >= a && b + other.side() <= a + self.side())
    }

    pub fn contains_cell(&self, coords: &[u32]) -> bool {
        self.corner
            .iter()
            .zip(coords)
            .all(|(&a, &x)| x >= a && x < a + self.side())
    }

    /// Cubes strictly above `self` up to and including the base cube of `shape`.
    pub fn strict_ancestors(&self, shape: &Shape) -> Vec<CubeId> {
        let mut out = Vec::new();
        let mut cur = self.clone();
        while cur.level < shape.k {
            cur = cur.parent_unchecked();
            out.push(cur.clone());
        }
        out
    }
}

impl fmt::Display for CubeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.side();
        let parts: Vec<String> = self
            .corner
            .iter()
            .map(|c| format!("[{},{})", c, c + s))
            .collect();
        write!(f, "{}", parts.join("x"))
    }
}

/// Every cube containing `cell` (coordinates) for family ALL, by increasing level.
pub fn full_chain(shape: &Shape, cell: &[u32]) -> Vec<CubeId> {
    let mut out = vec![CubeId::cell(cell)];
    out.extend(CubeId::cell(cell).strict_ancestors(shape));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(d: usize, k: u32) -> Shape {
        Shape::new(d, k).unwrap()
    }

    #[test]
    fn parent_examples() {
        let s1 = shape(1, 3);
        let q = CubeId::new(0, vec![2]);
        assert_eq!(q.parent(&s1).unwrap(), CubeId::new(1, vec![2]));
        let s2 = shape(2, 3);
        assert_eq!(
            CubeId::new(0, vec![0, 0]).parent(&s2).unwrap(),
            CubeId::new(1, vec![0, 0])
        );
        assert_eq!(
            CubeId::new(3, vec![0]).parent(&s1),
            Err(Error::LevelOverflow { level: 3 })
        );
    }

    #[test]
    fn children_examples() {
        assert_eq!(
            CubeId::new(1, vec![0]).children().unwrap(),
            vec![CubeId::new(0, vec![0]), CubeId::new(0, vec![1])]
        );
        let kids = CubeId::new(1, vec![0, 0]).children().unwrap();
        assert_eq!(kids.len(), 4);
        assert!(kids.iter().all(|c| c.level == 0));
        assert_eq!(CubeId::new(0, vec![3]).children(), Err(Error::NoChildren));

        let s = shape(2, 3);
        for q in s.all_cubes().filter(|q| q.level < 3) {
            assert!(q.parent(&s).unwrap().children().unwrap().contains(&q));
        }
    }

    #[test]
    fn chain_for_cell_five() {
        let s = shape(1, 3);
        let chain = full_chain(&s, &[5]);
        let got: Vec<String> = chain.iter().map(|c| c.to_string()).collect();
        assert_eq!(got, ["[5,6)", "[4,6)", "[4,8)", "[0,8)"]);
        let chain0: Vec<String> = full_chain(&s, &[0]).iter().map(|c| c.to_string()).collect();
        assert_eq!(chain0, ["[0,1)", "[0,2)", "[0,4)", "[0,8)"]);
    }

    #[test]
    fn cube_indexing_round_trips() {
        let s = shape(2, 3);
        for level in 0..=3 {
            for i in 0..s.cubes_at_level(level) {
                let q = s.cube_at(level, i);
                assert!(s.contains_cube(&q));
                assert_eq!(s.cube_index(&q), i);
            }
        }
        assert_eq!(s.total_cubes(), 64 + 16 + 4 + 1);
        let pm = s.parent_map(0);
        for (i, &p) in pm.iter().enumerate() {
            let q = s.cube_at(0, i);
            assert_eq!(s.cube_at(1, p), q.parent(&s).unwrap());
        }
    }

    #[test]
    fn cube_cells_cover_the_cube() {
        let s = shape(2, 2);
        let q = CubeId::new(1, vec![2, 0]);
        let cells = s.cube_cells(&q);
        assert_eq!(cells.len(), 4);
        for c in cells {
            assert!(q.contains_cell(&s.coords(c)));
        }
        assert!(!s.contains_cube(&CubeId::new(1, vec![1, 0])));
        assert!(!s.contains_cube(&CubeId::new(2, vec![4, 0])));
    }

    #[test]
    fn geometry_counts() {
        let q = CubeId::new(2, vec![0, 0, 0]);
        assert_eq!(q.volume(), 64);
        assert_eq!(q.boundary_area(), 6 * 16);
        assert_eq!(CubeId::new(3, vec![0]).boundary_area(), 2);
    }
}
