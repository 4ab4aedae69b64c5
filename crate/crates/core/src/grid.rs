//! Piecewise-constant functions and cell sets on the unit cells of a base cube.

use std::collections::BTreeSet;

use bitvec::prelude::*;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cube::{CubeId, Shape};
use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::maxop::AverageTree;

/// A function that is constant on each unit cell of `[0, 2^K)^d`, with exact values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr")]
pub struct GridFunction {
    shape: Shape,
    values: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    d: usize,
    #[serde(rename = "K")]
    k: u32,
    #[serde(with = "exact::as_string_vec")]
    values: Vec<Rational>,
}

impl TryFrom<GridRepr> for GridFunction {
    type Error = Error;
    fn try_from(r: GridRepr) -> Result<Self> {
        GridFunction::new(Shape::new(r.d, r.k)?, r.values)
    }
}

impl From<GridFunction> for GridRepr {
    fn from(g: GridFunction) -> Self {
        GridRepr {
            d: g.shape.d,
            k: g.shape.k,
            values: g.values,
        }
    }
}

impl GridFunction {
    pub fn new(shape: Shape, values: Vec<Rational>) -> Result<Self> {
        if values.len() != shape.cells() {
            return Err(Error::LengthMismatch {
                expected: shape.cells(),
                found: values.len(),
            });
        }
        Ok(GridFunction { shape, values })
    }

    pub fn constant(shape: Shape, c: Rational) -> Self {
        GridFunction {
            shape,
            values: vec![c; shape.cells()],
        }
    }

    pub fn zeros(shape: Shape) -> Self {
        Self::constant(shape, Rational::zero())
    }

    pub fn from_fn(shape: Shape, mut f: impl FnMut(&[u32]) -> Rational) -> Self {
        let values = (0..shape.cells()).map(|i| f(&shape.coords(i))).collect();
        GridFunction { shape, values }
    }

    pub fn from_integers(shape: Shape, values: &[i64]) -> Result<Self> {
        Self::new(shape, values.iter().map(|&v| exact::int(v)).collect())
    }

    /// `1_E` for a cell set `E`.
    pub fn indicator(set: &CellSet) -> Self {
        let one = exact::int(1);
        let values = set
            .bits
            .iter()
            .map(|b| if *b { one.clone() } else { Rational::zero() })
            .collect();
        GridFunction {
            shape: set.shape,
            values,
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn d(&self) -> usize {
        self.shape.d
    }

    pub fn k(&self) -> u32 {
        self.shape.k
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Rational> {
        self.values
    }

    pub fn get(&self, coords: &[u32]) -> &Rational {
        &self.values[self.shape.index(coords)]
    }

    pub fn map(&self, f: impl Fn(&Rational) -> Rational) -> Self {
        GridFunction {
            shape: self.shape,
            values: self.values.iter().map(f).collect(),
        }
    }

    pub fn zip_with(
        &self,
        other: &GridFunction,
        f: impl Fn(&Rational, &Rational) -> Rational,
    ) -> Result<Self> {
        self.check_same_shape(other.shape)?;
        Ok(GridFunction {
            shape: self.shape,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        self.map(|v| v * c)
    }

    pub fn add_constant(&self, c: &Rational) -> Self {
        self.map(|v| v + c)
    }

    pub fn abs(&self) -> Self {
        self.map(|v| v.abs())
    }

    /// Cellwise `self <= other`.
    pub fn le(&self, other: &GridFunction) -> bool {
        self.shape == other.shape && self.values.iter().zip(&other.values).all(|(a, b)| a <= b)
    }

    pub fn max_value(&self) -> &Rational {
        self.values.iter().max().expect("grid has at least one cell")
    }

    pub fn min_value(&self) -> &Rational {
        self.values.iter().min().expect("grid has at least one cell")
    }

    /// Integral over the base cube (unit cells have measure 1).
    pub fn integral(&self) -> Rational {
        self.values.iter().sum()
    }

    /// The function on `cube`, re-indexed as a grid of its own with base exponent `cube.level`.
    pub fn restrict(&self, cube: &CubeId) -> Result<GridFunction> {
        self.shape.check_cube(cube)?;
        let sub = Shape::new(self.shape.d, cube.level)?;
        let values = self
            .shape
            .cube_cells(cube)
            .into_iter()
            .map(|i| self.values[i].clone())
            .collect();
        Ok(GridFunction { shape: sub, values })
    }

    pub(crate) fn check_same_shape(&self, other: Shape) -> Result<()> {
        check_shapes(self.shape, other)
    }
}

pub(crate) fn check_shapes(expected: Shape, found: Shape) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::ShapeMismatch {
            expected_d: expected.d,
            expected_k: expected.k,
            found_d: found.d,
            found_k: found.k,
        })
    }
}

/// Pointwise clamp to `[-n, n]`.
pub fn truncate(f: &GridFunction, n: &Rational) -> Result<GridFunction> {
    if n.is_negative() {
        return Err(Error::NegativeTruncation(exact::format(n)));
    }
    let lo = -n.clone();
    Ok(f.map(|v| v.clone().clamp(lo.clone(), n.clone())))
}

/// `{f > lambda}`.
pub fn superlevel_set(f: &GridFunction, lambda: &Rational) -> CellSet {
    CellSet {
        shape: f.shape,
        bits: f.values.iter().map(|v| v > lambda).collect(),
    }
}

/// Sorted distinct cell values, together with every cube average when `tree` is given.
pub fn breakpoints(f: &GridFunction, tree: Option<&AverageTree>) -> Vec<Rational> {
    let mut set: BTreeSet<Rational> = f.values.iter().cloned().collect();
    if let Some(tree) = tree {
        for level in 0..=tree.shape().k {
            set.extend(tree.averages(level).iter().cloned());
        }
    }
    set.into_iter().collect()
}

/// A union of unit cells, stored as a bitset in row-major cell order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CellSet {
    shape: Shape,
    bits: BitVec,
}

#[derive(Serialize, Deserialize)]
struct CellSetRepr {
    d: usize,
    #[serde(rename = "K")]
    k: u32,
    cells: Vec<usize>,
}

impl Serialize for CellSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CellSetRepr {
            d: self.shape.d,
            k: self.shape.k,
            cells: self.iter().collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CellSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = CellSetRepr::deserialize(d)?;
        let shape = Shape::new(r.d, r.k).map_err(D::Error::custom)?;
        CellSet::from_cells(shape, r.cells).map_err(D::Error::custom)
    }
}

impl CellSet {
    pub fn empty(shape: Shape) -> Self {
        CellSet {
            shape,
            bits: bitvec![0; shape.cells()],
        }
    }

    pub fn full(shape: Shape) -> Self {
        CellSet {
            shape,
            bits: bitvec![1; shape.cells()],
        }
    }

    pub fn from_cells(shape: Shape, cells: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut set = Self::empty(shape);
        for c in cells {
            if c >= shape.cells() {
                return Err(Error::LengthMismatch {
                    expected: shape.cells(),
                    found: c + 1,
                });
            }
            set.bits.set(c, true);
        }
        Ok(set)
    }

    pub fn from_fn(shape: Shape, f: impl FnMut(usize) -> bool) -> Self {
        CellSet {
            shape,
            bits: (0..shape.cells()).map(f).collect(),
        }
    }

    pub fn from_cube(shape: Shape, cube: &CubeId) -> Result<Self> {
        shape.check_cube(cube)?;
        Self::from_cells(shape, shape.cube_cells(cube))
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn contains(&self, cell: usize) -> bool {
        self.bits[cell]
    }

    pub fn insert(&mut self, cell: usize) {
        self.bits.set(cell, true);
    }

    pub fn remove(&mut self, cell: usize) {
        self.bits.set(cell, false);
    }

    pub fn toggle(&mut self, cell: usize) {
        let v = self.bits[cell];
        self.bits.set(cell, !v);
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.not_any()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter_ones()
    }

    pub fn union(&self, other: &CellSet) -> Result<CellSet> {
        check_shapes(self.shape, other.shape)?;
        Ok(CellSet {
            shape: self.shape,
            bits: self.bits.clone() | other.bits.clone(),
        })
    }

    pub fn intersection(&self, other: &CellSet) -> Result<CellSet> {
        check_shapes(self.shape, other.shape)?;
        Ok(CellSet {
            shape: self.shape,
            bits: self.bits.clone() & other.bits.clone(),
        })
    }

    pub fn is_subset(&self, other: &CellSet) -> bool {
        self.shape == other.shape && self.iter().all(|c| other.contains(c))
    }

    /// `|E ∩ Q|`.
    pub fn count_in(&self, cube: &CubeId) -> u64 {
        self.shape
            .cube_cells(cube)
            .into_iter()
            .filter(|&c| self.bits[c])
            .count() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio};

    fn example_g() -> GridFunction {
        GridFunction::from_integers(Shape::new(1, 3).unwrap(), &[1, 1, 1, 0, 0, 1, 1, 1]).unwrap()
    }

    #[test]
    fn truncate_examples() {
        let s = Shape::new(2, 1).unwrap();
        let f = GridFunction::constant(s, int(5));
        assert_eq!(truncate(&f, &int(3)).unwrap(), GridFunction::constant(s, int(3)));
        let f = GridFunction::constant(s, int(-5));
        assert_eq!(truncate(&f, &int(3)).unwrap(), GridFunction::constant(s, int(-3)));
        let g = example_g();
        assert_eq!(truncate(&g, &int(1)).unwrap(), g);
        assert!(matches!(
            truncate(&g, &int(-1)),
            Err(Error::NegativeTruncation(_))
        ));
    }

    #[test]
    fn superlevel_examples() {
        let g = example_g();
        let set = superlevel_set(&g, &ratio(1, 2));
        assert_eq!(set.iter().collect::<Vec<_>>(), vec![0, 1, 2, 5, 6, 7]);
        assert!(superlevel_set(&g, &int(1)).is_empty());
        assert_eq!(superlevel_set(&g, &int(-1)).len(), 8);
    }

    #[test]
    fn breakpoints_with_averages() {
        let g = example_g();
        let tree = AverageTree::build(&g);
        let bps = breakpoints(&g, Some(&tree));
        assert_eq!(bps, vec![int(0), ratio(1, 2), ratio(3, 4), int(1)]);
        let c = GridFunction::constant(Shape::new(1, 2).unwrap(), ratio(2, 3));
        assert_eq!(breakpoints(&c, None), vec![ratio(2, 3)]);
        let s = g.shape();
        assert!(bps.len() <= s.cells() + s.total_cubes());
    }

    #[test]
    fn restrict_reindexes() {
        let g = example_g();
        let sub = g.restrict(&CubeId::new(2, vec![4])).unwrap();
        assert_eq!(sub.k(), 2);
        assert_eq!(sub.values(), &[int(0), int(1), int(1), int(1)]);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let a = GridFunction::zeros(Shape::new(1, 2).unwrap());
        let b = GridFunction::zeros(Shape::new(1, 3).unwrap());
        assert!(matches!(a.add(&b), Err(Error::ShapeMismatch { .. })));
        assert!(GridFunction::new(Shape::new(2, 3).unwrap(), vec![int(0); 63]).is_err());
    }
}
