//! Cube averages and dyadic maximal transforms.
//!
//! [`AverageTree`] holds the exact sum over every dyadic cube of the base cube and is
//! built bottom-up in `O(N)`. [`maximal_transform`] sweeps it top-down carrying the
//! running maximum of admissible ancestor averages. [`brute_force_maximal`] is the
//! reference: it enumerates every admissible cube and averages its cells directly.

use bitvec::prelude::*;
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::cube::{full_chain, CubeId, Shape};
use crate::domain::{self, CountTree, Domain};
use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::grid::{check_shapes, CellSet, GridFunction};

/// Exact sums and averages over every dyadic cube, indexed by level then row-major.
#[derive(Debug, Clone)]
pub struct AverageTree {
    shape: Shape,
    sums: Vec<Vec<Rational>>,
    averages: Vec<Vec<Rational>>,
}

impl AverageTree {
    pub fn build(f: &GridFunction) -> Self {
        let shape = f.shape();
        let mut sums: Vec<Vec<Rational>> = Vec::with_capacity(shape.k as usize + 1);
        sums.push(f.values().to_vec());
        for level in 0..shape.k {
            let pm = shape.parent_map(level);
            let mut up = vec![Rational::default(); shape.cubes_at_level(level + 1)];
            for (i, &p) in pm.iter().enumerate() {
                up[p] += &sums[level as usize][i];
            }
            sums.push(up);
        }
        let averages = sums
            .iter()
            .enumerate()
            .map(|(level, row)| {
                let vol = Rational::from_integer(BigInt::from(1u64) << (shape.d * level));
                row.iter().map(|s| s / &vol).collect()
            })
            .collect();
        AverageTree {
            shape,
            sums,
            averages,
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn sum(&self, cube: &CubeId) -> &Rational {
        &self.sums[cube.level as usize][self.shape.cube_index(cube)]
    }

    /// `f_Q`.
    pub fn average(&self, cube: &CubeId) -> &Rational {
        &self.averages[cube.level as usize][self.shape.cube_index(cube)]
    }

    pub fn averages(&self, level: u32) -> &[Rational] {
        &self.averages[level as usize]
    }
}

/// Which dyadic cubes of the base cube a maximal operator may average over.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Selector {
    /// Every dyadic subcube of the base cube.
    All,
    /// Cubes whose closure lies in the open set `int(cl ∪domain)`.
    ClosureIn { domain: Domain },
    /// Cubes whose interior lies in `int(cl ∪domain)`, i.e. cubes inside the union.
    InteriorIn { domain: Domain },
    Explicit { cubes: Vec<CubeId> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeFamily {
    pub selector: Selector,
    /// Whether the transform also majorizes `f` itself.
    pub include_pointwise: bool,
}

impl CubeFamily {
    pub fn all() -> Self {
        CubeFamily {
            selector: Selector::All,
            include_pointwise: true,
        }
    }

    pub fn explicit(cubes: Vec<CubeId>) -> Self {
        CubeFamily {
            selector: Selector::Explicit { cubes },
            include_pointwise: true,
        }
    }

    pub fn closure_in(domain: Domain) -> Self {
        CubeFamily {
            selector: Selector::ClosureIn { domain },
            include_pointwise: true,
        }
    }

    pub fn interior_in(domain: Domain) -> Self {
        CubeFamily {
            selector: Selector::InteriorIn { domain },
            include_pointwise: true,
        }
    }

    pub fn with_pointwise(mut self, include: bool) -> Self {
        self.include_pointwise = include;
        self
    }

    /// Direct membership test, evaluated from the definition of each selector.
    pub fn admits(&self, shape: Shape, cube: &CubeId) -> bool {
        if !shape.contains_cube(cube) {
            return false;
        }
        match &self.selector {
            Selector::All => true,
            Selector::Explicit { cubes } => cubes.contains(cube),
            Selector::InteriorIn { domain } => {
                let cover = domain.coverage();
                shape.cube_cells(cube).into_iter().all(|c| cover.contains(c))
            }
            Selector::ClosureIn { domain } => closure_admissible(shape, &domain.coverage(), cube),
        }
    }

    /// Admissibility bitmaps for every level of `shape`.
    pub fn resolve(&self, shape: Shape) -> Result<FamilyMask> {
        let mut levels: Vec<BitVec> = (0..=shape.k)
            .map(|l| bitvec![0; shape.cubes_at_level(l)])
            .collect();
        match &self.selector {
            Selector::All => levels.iter_mut().for_each(|b| b.fill(true)),
            Selector::Explicit { cubes } => {
                for q in cubes {
                    shape.check_cube(q)?;
                    levels[q.level as usize].set(shape.cube_index(q), true);
                }
            }
            Selector::InteriorIn { domain } => {
                check_shapes(shape, domain.shape())?;
                let counts = CountTree::new(&domain.coverage());
                for (l, bits) in levels.iter_mut().enumerate() {
                    for i in 0..bits.len() {
                        let q = shape.cube_at(l as u32, i);
                        bits.set(i, counts.covers(&q));
                    }
                }
            }
            Selector::ClosureIn { domain } => {
                check_shapes(shape, domain.shape())?;
                let cover = domain.coverage();
                for (l, bits) in levels.iter_mut().enumerate() {
                    for i in 0..bits.len() {
                        let q = shape.cube_at(l as u32, i);
                        bits.set(i, closure_admissible(shape, &cover, &q));
                    }
                }
            }
        }
        Ok(FamilyMask {
            shape,
            levels,
            include_pointwise: self.include_pointwise,
        })
    }
}

/// `cl Q ⊂ int(cl U)`: the cube keeps one cell of clearance from the base boundary and
/// every cell touching its closure lies in `U`.
fn closure_admissible(shape: Shape, cover: &CellSet, cube: &CubeId) -> bool {
    let s = cube.side();
    let side = shape.side();
    if cube.corner.iter().any(|&c| c == 0 || c + s >= side) {
        return false;
    }
    let span = (s + 2) as usize;
    let total = span.pow(shape.d as u32);
    (0..total).all(|mut i| {
        let mut coords = vec![0u32; shape.d];
        for axis in (0..shape.d).rev() {
            coords[axis] = cube.corner[axis] - 1 + (i % span) as u32;
            i /= span;
        }
        cover.contains(shape.index(&coords))
    })
}

/// A [`CubeFamily`] evaluated on a concrete grid shape.
#[derive(Debug, Clone)]
pub struct FamilyMask {
    shape: Shape,
    levels: Vec<BitVec>,
    include_pointwise: bool,
}

impl FamilyMask {
    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn include_pointwise(&self) -> bool {
        self.include_pointwise
    }

    pub fn admits(&self, cube: &CubeId) -> bool {
        self.shape.contains_cube(cube)
            && self.levels[cube.level as usize][self.shape.cube_index(cube)]
    }

    pub(crate) fn admits_at(&self, level: u32, index: usize) -> bool {
        self.levels[level as usize][index]
    }

    /// Admissible cubes ordered by level, then row-major.
    pub fn cubes(&self) -> Vec<CubeId> {
        let mut out = Vec::new();
        for (l, bits) in self.levels.iter().enumerate() {
            for i in bits.iter_ones() {
                out.push(self.shape.cube_at(l as u32, i));
            }
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.levels.iter().all(|b| b.not_any())
    }

    pub fn check_saturated(&self) -> Result<()> {
        match domain::saturation_witness(self.shape, &self.cubes()) {
            None => Ok(()),
            Some(p) => Err(Error::UnsaturatedFamily(p.to_string())),
        }
    }
}

/// All cubes of `family` that contain `cell`, by increasing level.
pub fn ancestor_chain(shape: Shape, cell: &[u32], family: &CubeFamily) -> Vec<CubeId> {
    full_chain(&shape, cell)
        .into_iter()
        .filter(|q| family.admits(shape, q))
        .collect()
}

fn keep_max(slot: &mut Option<Rational>, candidate: &Rational) {
    match slot {
        Some(v) if *v >= *candidate => {}
        _ => *slot = Some(candidate.clone()),
    }
}

/// `M f(x) = max{ f(x), f_Q : x ∈ Q ∈ family }` (the pointwise term only when enabled).
pub fn maximal_transform(f: &GridFunction, family: &CubeFamily) -> Result<GridFunction> {
    let mask = family.resolve(f.shape())?;
    let tree = AverageTree::build(f);
    maximal_transform_with(f, &tree, &mask)
}

pub fn maximal_transform_with(
    f: &GridFunction,
    tree: &AverageTree,
    mask: &FamilyMask,
) -> Result<GridFunction> {
    let shape = f.shape();
    check_shapes(shape, mask.shape)?;
    check_shapes(shape, tree.shape)?;
    let k = shape.k;
    let mut running: Vec<Option<Rational>> = tree.averages[k as usize]
        .iter()
        .enumerate()
        .map(|(i, a)| mask.admits_at(k, i).then(|| a.clone()))
        .collect();
    for level in (0..k).rev() {
        let pm = shape.parent_map(level);
        let avgs = &tree.averages[level as usize];
        running = pm
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let mut slot = running[p].clone();
                if mask.admits_at(level, i) {
                    keep_max(&mut slot, &avgs[i]);
                }
                slot
            })
            .collect();
    }
    finish(f, running, mask.include_pointwise)
}

fn finish(
    f: &GridFunction,
    mut running: Vec<Option<Rational>>,
    include_pointwise: bool,
) -> Result<GridFunction> {
    if include_pointwise {
        for (slot, v) in running.iter_mut().zip(f.values()) {
            keep_max(slot, v);
        }
    }
    let values = running
        .into_iter()
        .enumerate()
        .map(|(cell, v)| v.ok_or(Error::UndefinedValue { cell }))
        .collect::<Result<Vec<_>>>()?;
    GridFunction::new(f.shape(), values)
}

/// Reference transform: every admissible cube is enumerated and averaged cell by cell.
pub fn brute_force_maximal(f: &GridFunction, family: &CubeFamily) -> Result<GridFunction> {
    let shape = f.shape();
    let mut best: Vec<Option<Rational>> = vec![None; shape.cells()];
    for q in shape.all_cubes() {
        if !family.admits(shape, &q) {
            continue;
        }
        let cells = shape.cube_cells(&q);
        let total: Rational = cells.iter().map(|&c| &f.values()[c]).sum();
        let avg = total / Rational::from_integer(BigInt::from(cells.len()));
        for c in cells {
            keep_max(&mut best[c], &avg);
        }
    }
    finish(f, best, family.include_pointwise)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio};

    fn s1(k: u32) -> Shape {
        Shape::new(1, k).unwrap()
    }

    fn example(values: &[i64]) -> GridFunction {
        GridFunction::from_integers(s1(3), values).unwrap()
    }

    #[test]
    fn tree_examples() {
        let g = example(&[1, 1, 1, 0, 0, 1, 1, 1]);
        let t = AverageTree::build(&g);
        assert_eq!(t.average(&CubeId::new(2, vec![4])), &ratio(3, 4));
        assert_eq!(t.average(&CubeId::new(3, vec![0])), &ratio(3, 4));
        assert_eq!(t.sum(&CubeId::new(3, vec![0])), &int(6));
        let c = GridFunction::constant(Shape::new(2, 2).unwrap(), ratio(5, 7));
        let tc = AverageTree::build(&c);
        for l in 0..=2 {
            assert!(tc.averages(l).iter().all(|a| *a == ratio(5, 7)));
        }
    }

    #[test]
    fn maximal_on_golden_functions() {
        let g = example(&[1, 1, 1, 0, 0, 1, 1, 1]);
        let mg = maximal_transform(&g, &CubeFamily::all()).unwrap();
        assert_eq!(mg.values()[2], int(1));
        assert_eq!(mg.values()[4], ratio(3, 4));
        assert_eq!(mg.values()[5], int(1));
        let h = example(&[0, 0, 1, 0, 0, 1, 0, 0]);
        let mh = maximal_transform(&h, &CubeFamily::all()).unwrap();
        assert_eq!(mh.values()[4], ratio(1, 2));
        assert_eq!(brute_force_maximal(&g, &CubeFamily::all()).unwrap(), mg);
        assert_eq!(brute_force_maximal(&h, &CubeFamily::all()).unwrap(), mh);
    }

    #[test]
    fn single_cell_indicator_far_cell() {
        let f = GridFunction::from_integers(s1(2), &[1, 0, 0, 0]).unwrap();
        let m = brute_force_maximal(&f, &CubeFamily::all()).unwrap();
        assert_eq!(m.values()[3], ratio(1, 4));
        assert_eq!(maximal_transform(&f, &CubeFamily::all()).unwrap(), m);
        let z = GridFunction::zeros(s1(3));
        assert_eq!(brute_force_maximal(&z, &CubeFamily::all()).unwrap(), z);
    }

    #[test]
    fn empty_family_without_pointwise_is_an_error() {
        let f = GridFunction::zeros(s1(2));
        let fam = CubeFamily::explicit(vec![CubeId::new(1, vec![0])]).with_pointwise(false);
        assert_eq!(
            maximal_transform(&f, &fam),
            Err(Error::UndefinedValue { cell: 2 })
        );
        assert_eq!(
            brute_force_maximal(&f, &fam),
            Err(Error::UndefinedValue { cell: 2 })
        );
    }

    #[test]
    fn chain_respects_family() {
        let s = s1(3);
        assert_eq!(ancestor_chain(s, &[5], &CubeFamily::all()).len(), 4);
        let fam = CubeFamily::explicit(vec![CubeId::new(1, vec![4]), CubeId::new(0, vec![5])]);
        assert_eq!(
            ancestor_chain(s, &[5], &fam),
            vec![CubeId::new(0, vec![5]), CubeId::new(1, vec![4])]
        );
    }

    #[test]
    fn closure_family_keeps_clearance() {
        let s = s1(3);
        let fam = CubeFamily::closure_in(Domain::full(s));
        let mask = fam.resolve(s).unwrap();
        let got: Vec<String> = mask.cubes().iter().map(|q| q.to_string()).collect();
        assert_eq!(
            got,
            ["[1,2)", "[2,3)", "[3,4)", "[4,5)", "[5,6)", "[6,7)", "[2,4)", "[4,6)"]
        );
        for q in s.all_cubes() {
            assert_eq!(mask.admits(&q), fam.admits(s, &q));
        }
    }

    #[test]
    fn interior_family_matches_union() {
        let s = Shape::new(2, 2).unwrap();
        let dom = Domain::new(s, vec![CubeId::new(1, vec![0, 0]), CubeId::new(0, vec![2, 2])])
            .unwrap();
        let fam = CubeFamily::interior_in(dom);
        let mask = fam.resolve(s).unwrap();
        assert_eq!(mask.cubes().len(), 6);
        assert!(mask.check_saturated().is_ok());
        for q in s.all_cubes() {
            assert_eq!(mask.admits(&q), fam.admits(s, &q));
        }
    }
}
