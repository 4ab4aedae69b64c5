//! Domains given as finite unions of dyadic cubes, and the upward-closure property
//! that cube families must satisfy before level-set decompositions are taken.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::cube::{CubeId, Shape};
use crate::error::{Error, Result};
use crate::grid::CellSet;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Domain {
    shape: Shape,
    cubes: Vec<CubeId>,
}

impl Domain {
    /// Validates every cube against `shape`; duplicates are dropped, order is canonical.
    pub fn new(shape: Shape, cubes: Vec<CubeId>) -> Result<Self> {
        for q in &cubes {
            shape.check_cube(q)?;
        }
        let cubes: BTreeSet<CubeId> = cubes.into_iter().collect();
        Ok(Domain {
            shape,
            cubes: cubes.into_iter().collect(),
        })
    }

    /// Like [`Domain::new`] but rejects lists that are not saturated.
    pub fn saturated(shape: Shape, cubes: Vec<CubeId>) -> Result<Self> {
        let dom = Self::new(shape, cubes)?;
        dom.check_saturated()?;
        Ok(dom)
    }

    /// The whole base cube.
    pub fn full(shape: Shape) -> Self {
        Domain {
            shape,
            cubes: vec![shape.base_cube()],
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn cubes(&self) -> &[CubeId] {
        &self.cubes
    }

    pub fn coverage(&self) -> CellSet {
        coverage(self.shape, &self.cubes)
    }

    pub fn check_saturated(&self) -> Result<()> {
        match saturation_witness(self.shape, &self.cubes) {
            None => Ok(()),
            Some(p) => Err(Error::UnsaturatedFamily(p.to_string())),
        }
    }

    pub fn is_saturated(&self) -> bool {
        saturation_witness(self.shape, &self.cubes).is_none()
    }
}

pub(crate) fn coverage(shape: Shape, cubes: &[CubeId]) -> CellSet {
    let mut set = CellSet::empty(shape);
    for q in cubes {
        for c in shape.cube_cells(q) {
            set.insert(c);
        }
    }
    set
}

/// Per-level counts of member cells, so `P ⊂ U` is an O(1) lookup.
pub(crate) struct CountTree {
    shape: Shape,
    levels: Vec<Vec<u64>>,
}

impl CountTree {
    pub(crate) fn new(set: &CellSet) -> Self {
        let shape = set.shape();
        let mut levels = Vec::with_capacity(shape.k as usize + 1);
        levels.push(
            (0..shape.cells())
                .map(|c| set.contains(c) as u64)
                .collect::<Vec<_>>(),
        );
        for level in 0..shape.k {
            let pm = shape.parent_map(level);
            let mut up = vec![0u64; shape.cubes_at_level(level + 1)];
            for (i, &p) in pm.iter().enumerate() {
                up[p] += levels[level as usize][i];
            }
            levels.push(up);
        }
        CountTree { shape, levels }
    }

    pub(crate) fn count(&self, cube: &CubeId) -> u64 {
        self.levels[cube.level as usize][self.shape.cube_index(cube)]
    }

    pub(crate) fn covers(&self, cube: &CubeId) -> bool {
        self.count(cube) == cube.volume()
    }
}

/// A dyadic cube `P ⊂ ∪cubes` that contains a member but is not itself a member,
/// or `None` when the list is saturated.
pub fn saturation_witness(shape: Shape, cubes: &[CubeId]) -> Option<CubeId> {
    let members: HashSet<&CubeId> = cubes.iter().collect();
    let counts = CountTree::new(&coverage(shape, cubes));
    for q in cubes {
        for p in q.strict_ancestors(&shape) {
            if !counts.covers(&p) {
                break;
            }
            if !members.contains(&p) {
                return Some(p);
            }
        }
    }
    None
}

/// Smallest saturated list containing `cubes`. The union is unchanged.
pub fn saturate(shape: Shape, cubes: &[CubeId]) -> Vec<CubeId> {
    let counts = CountTree::new(&coverage(shape, cubes));
    let mut out: BTreeSet<CubeId> = cubes.iter().cloned().collect();
    for q in cubes {
        for p in q.strict_ancestors(&shape) {
            if !counts.covers(&p) {
                break;
            }
            out.insert(p);
        }
    }
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_domain_is_saturated() {
        let s = Shape::new(2, 2).unwrap();
        let d = Domain::full(s);
        assert!(d.is_saturated());
        assert_eq!(d.coverage().len(), 16);
    }

    #[test]
    fn detects_missing_parent() {
        let s = Shape::new(1, 3).unwrap();
        let cubes = vec![CubeId::new(0, vec![0]), CubeId::new(0, vec![1])];
        assert_eq!(
            saturation_witness(s, &cubes),
            Some(CubeId::new(1, vec![0]))
        );
        assert!(Domain::saturated(s, cubes.clone()).is_err());
        let fixed = saturate(s, &cubes);
        assert_eq!(fixed.len(), 3);
        assert!(Domain::saturated(s, fixed).is_ok());
    }

    #[test]
    fn non_nested_cubes_need_no_closure() {
        let s = Shape::new(1, 3).unwrap();
        // [1,2) and [4,6): no covered dyadic cube contains either strictly.
        let cubes = vec![CubeId::new(0, vec![1]), CubeId::new(1, vec![4])];
        assert!(saturation_witness(s, &cubes).is_none());
    }

    #[test]
    fn rejects_misaligned_cube() {
        let s = Shape::new(1, 3).unwrap();
        assert!(Domain::new(s, vec![CubeId::new(1, vec![1])]).is_err());
    }
}
