//! Face geometry of cell sets and exact variation of grid functions.
//!
//! A unit face is identified by the axis it is normal to and the cell coordinates of its
//! "upper" side: the face `(axis, p)` separates cell `p - e_axis` from cell `p`, where
//! `p[axis]` runs over `0..=side` and either neighbour may lie outside the base cube.
//! For unions of cells the measure-theoretic boundary is the set of faces with exactly
//! one member neighbour, and the measure-theoretic closure at a face means at least one
//! neighbour is a member.

use std::collections::HashMap;

use bitvec::prelude::*;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cube::{CubeId, Shape};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::grid::{check_shapes, CellSet, GridFunction};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Face {
    pub axis: usize,
    pub pos: Vec<u32>,
}

impl Face {
    /// Cell on the low side of the face, if inside the base cube.
    pub fn lower(&self, shape: &Shape) -> Option<usize> {
        if self.pos[self.axis] == 0 {
            return None;
        }
        let mut c = self.pos.clone();
        c[self.axis] -= 1;
        Some(shape.index(&c))
    }

    pub fn upper(&self, shape: &Shape) -> Option<usize> {
        (self.pos[self.axis] < shape.side()).then(|| shape.index(&self.pos))
    }
}

/// A set of unit faces of the closed base cube; each geometric face appears once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceSet {
    shape: Shape,
    bits: BitVec,
}

impl FaceSet {
    pub fn empty(shape: Shape) -> Self {
        FaceSet {
            shape,
            bits: bitvec![0; face_count(&shape)],
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn insert(&mut self, face: &Face) {
        let i = face_index(&self.shape, face.axis, &face.pos);
        self.bits.set(i, true);
    }

    pub fn contains(&self, face: &Face) -> bool {
        self.bits[face_index(&self.shape, face.axis, &face.pos)]
    }

    /// Total `H^{d-1}` measure: every face has area 1.
    pub fn len(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.not_any()
    }

    pub fn iter(&self) -> impl Iterator<Item = Face> + '_ {
        self.bits.iter_ones().map(|i| face_at(&self.shape, i))
    }

    pub fn filter(&self, keep: impl Fn(&Face) -> bool) -> FaceSet {
        let mut out = FaceSet::empty(self.shape);
        for f in self.iter().filter(|f| keep(f)) {
            out.insert(&f);
        }
        out
    }
}

fn faces_per_axis(shape: &Shape) -> usize {
    let side = shape.side() as usize;
    (side + 1) * side.pow(shape.d as u32 - 1)
}

fn face_count(shape: &Shape) -> usize {
    shape.d * faces_per_axis(shape)
}

fn face_index(shape: &Shape, axis: usize, pos: &[u32]) -> usize {
    let side = shape.side() as usize;
    let local = pos.iter().enumerate().fold(0usize, |acc, (a, &p)| {
        let n = if a == axis { side + 1 } else { side };
        acc * n + p as usize
    });
    axis * faces_per_axis(shape) + local
}

fn face_at(shape: &Shape, index: usize) -> Face {
    let side = shape.side() as usize;
    let per = faces_per_axis(shape);
    let axis = index / per;
    let mut rest = index % per;
    let mut pos = vec![0u32; shape.d];
    for a in (0..shape.d).rev() {
        let n = if a == axis { side + 1 } else { side };
        pos[a] = (rest % n) as u32;
        rest /= n;
    }
    Face { axis, pos }
}

/// Visits every unit face of the closed base cube once, passing its two neighbours.
fn for_each_face(shape: &Shape, mut visit: impl FnMut(usize, &[u32], Option<usize>, Option<usize>)) {
    let side = shape.side();
    let mut pos = vec![0u32; shape.d];
    for cell in 0..shape.cells() {
        let coords = shape.coords(cell);
        for axis in 0..shape.d {
            let lower = (coords[axis] > 0).then(|| cell - shape.stride(axis));
            visit(axis, &coords, lower, Some(cell));
            if coords[axis] + 1 == side {
                pos.copy_from_slice(&coords);
                pos[axis] = side;
                visit(axis, &pos, Some(cell), None);
            }
        }
    }
}

/// Region over which faces are counted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum VariationMode {
    /// Faces interior to `int(cl ∪domain)`: both neighbours lie in the union.
    Interior { domain: Domain },
    /// Faces interior to `∪{int Q}` over the listed cubes: both neighbours lie in one cube.
    CubeInteriors { cubes: Vec<CubeId> },
    /// The function is extended by zero outside the base cube; every face counts.
    ZeroExtension,
}

impl VariationMode {
    /// Interior of the whole base cube.
    pub fn interior(shape: Shape) -> Self {
        VariationMode::Interior {
            domain: Domain::full(shape),
        }
    }

    fn resolve(&self, shape: Shape) -> Result<FaceFilter> {
        Ok(match self {
            VariationMode::ZeroExtension => FaceFilter::All,
            VariationMode::Interior { domain } => {
                check_shapes(shape, domain.shape())?;
                FaceFilter::Union(domain.coverage())
            }
            VariationMode::CubeInteriors { cubes } => {
                let mut sorted: Vec<&CubeId> = cubes.iter().collect();
                for q in &sorted {
                    shape.check_cube(q)?;
                }
                sorted.sort_by_key(|q| std::cmp::Reverse(q.level));
                let mut label = vec![None; shape.cells()];
                for (id, q) in sorted.iter().enumerate() {
                    for c in shape.cube_cells(q) {
                        if label[c].is_none() {
                            label[c] = Some(id);
                        }
                    }
                }
                FaceFilter::Label(label)
            }
        })
    }
}

enum FaceFilter {
    All,
    Union(CellSet),
    Label(Vec<Option<usize>>),
}

impl FaceFilter {
    fn counts(&self, lower: Option<usize>, upper: Option<usize>) -> bool {
        match self {
            FaceFilter::All => true,
            FaceFilter::Union(set) => match (lower, upper) {
                (Some(a), Some(b)) => set.contains(a) && set.contains(b),
                _ => false,
            },
            FaceFilter::Label(label) => match (lower, upper) {
                (Some(a), Some(b)) => label[a].is_some() && label[a] == label[b],
                _ => false,
            },
        }
    }
}

fn member(set: &CellSet, cell: Option<usize>) -> bool {
    cell.is_some_and(|c| set.contains(c))
}

/// `∂*E`: faces with exactly one neighbour in `E`; cells outside the base cube are not in `E`.
pub fn mt_boundary(set: &CellSet) -> FaceSet {
    let shape = set.shape();
    let mut out = FaceSet::empty(shape);
    for_each_face(&shape, |axis, pos, lo, up| {
        if member(set, lo) != member(set, up) {
            out.bits.set(face_index(&shape, axis, pos), true);
        }
    });
    out
}

/// `H^{d-1}(∂*E ∩ region)` for the region selected by `mode`.
pub fn perimeter(set: &CellSet, mode: &VariationMode) -> Result<Rational> {
    let shape = set.shape();
    let filter = mode.resolve(shape)?;
    let mut count = 0i64;
    for_each_face(&shape, |_, _, lo, up| {
        if member(set, lo) != member(set, up) && filter.counts(lo, up) {
            count += 1;
        }
    });
    Ok(exact::int(count))
}

/// Sum over counted faces of the absolute jump; outside cells read as 0.
pub fn variation(f: &GridFunction, mode: &VariationMode) -> Result<Rational> {
    let shape = f.shape();
    let filter = mode.resolve(shape)?;
    let zero = Rational::zero();
    let vals = f.values();
    let mut total = Rational::zero();
    for_each_face(&shape, |_, _, lo, up| {
        if filter.counts(lo, up) {
            let a = lo.map_or(&zero, |c| &vals[c]);
            let b = up.map_or(&zero, |c| &vals[c]);
            if a != b {
                total += (a - b).abs();
            }
        }
    });
    Ok(total)
}

/// Coarea side of the variation: `Σ_i (λ_{i+1} - λ_i) · Per({f > λ_i})` over the sorted
/// cell values (and 0 in zero-extension mode, where outside cells take the value 0).
pub fn coarea(f: &GridFunction, mode: &VariationMode) -> Result<Rational> {
    let shape = f.shape();
    let filter = mode.resolve(shape)?;
    let zero_ext = matches!(mode, VariationMode::ZeroExtension);
    let mut levels: Vec<Rational> = f.values().to_vec();
    if zero_ext {
        levels.push(Rational::zero());
    }
    levels.sort();
    levels.dedup();
    let rank: HashMap<&Rational, usize> = levels.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let cell_rank: Vec<usize> = f.values().iter().map(|v| rank[v]).collect();
    let outside_rank = zero_ext.then(|| rank[&Rational::zero()]);

    // Only faces whose two sides differ contribute; per face collect the rank range.
    let mut per_level = vec![0i64; levels.len()];
    for (i, _) in levels.iter().enumerate().take(levels.len().saturating_sub(1)) {
        let mut count = 0i64;
        for_each_face(&shape, |_, _, lo, up| {
            if !filter.counts(lo, up) {
                return;
            }
            let above = |c: Option<usize>| match c {
                Some(c) => cell_rank[c] > i,
                None => outside_rank.is_some_and(|r| r > i),
            };
            if above(lo) != above(up) {
                count += 1;
            }
        });
        per_level[i] = count;
    }
    let mut total = Rational::zero();
    for i in 0..levels.len().saturating_sub(1) {
        if per_level[i] != 0 {
            total += (&levels[i + 1] - &levels[i]) * exact::int(per_level[i]);
        }
    }
    Ok(total)
}

/// Outcome of a face-level inclusion check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InclusionCheck {
    pub holds: bool,
    pub witness: Option<Face>,
}

/// Checks `∂*(A∪B) ⊂ (∂*A \ cl*B) ∪ (∂*B \ cl*A) ∪ (∂*A ∩ ∂*B)` face by face.
pub fn union_boundary_decomposition_check(a: &CellSet, b: &CellSet) -> Result<InclusionCheck> {
    check_shapes(a.shape(), b.shape())?;
    let shape = a.shape();
    let union = a.union(b)?;
    let ba = mt_boundary(a);
    let bb = mt_boundary(b);
    for face in mt_boundary(&union).iter() {
        let (lo, up) = (face.lower(&shape), face.upper(&shape));
        let closure_a = member(a, lo) || member(a, up);
        let closure_b = member(b, lo) || member(b, up);
        let in_a = ba.contains(&face);
        let in_b = bb.contains(&face);
        let covered = (in_a && !closure_b) || (in_b && !closure_a) || (in_a && in_b);
        if !covered {
            return Ok(InclusionCheck {
                holds: false,
                witness: Some(face),
            });
        }
    }
    Ok(InclusionCheck {
        holds: true,
        witness: None,
    })
}

/// Faces of `∂*E` with both neighbours inside `cube`, i.e. `H^{d-1}(∂*E ∩ int Q)`.
pub fn boundary_inside(set: &CellSet, cube: &CubeId) -> u64 {
    let shape = set.shape();
    let mut count = 0;
    for_each_face(&shape, |_, _, lo, up| {
        if let (Some(a), Some(b)) = (lo, up) {
            if set.contains(a) != set.contains(b)
                && cube.contains_cell(&shape.coords(a))
                && cube.contains_cell(&shape.coords(b))
            {
                count += 1;
            }
        }
    });
    count
}

/// Faces of `∂Q` whose inner neighbour is not in `E`, i.e. `H^{d-1}(∂Q \ cl*(E∩Q))`.
pub fn cube_boundary_outside_closure(set: &CellSet, cube: &CubeId) -> u64 {
    let shape = set.shape();
    let mut count = 0;
    for_each_face(&shape, |axis, pos, lo, up| {
        let on_low_side = pos[axis] == cube.corner[axis];
        let on_high_side = pos[axis] == cube.corner[axis] + cube.side();
        let spans = pos
            .iter()
            .enumerate()
            .all(|(a, &p)| a == axis || (p >= cube.corner[a] && p < cube.corner[a] + cube.side()));
        if !spans {
            return;
        }
        let inner = if on_low_side {
            up
        } else if on_high_side {
            lo
        } else {
            return;
        };
        if !member(set, inner) {
            count += 1;
        }
    });
    count
}

fn check_cube_in(set: &CellSet, cube: &CubeId) -> Result<()> {
    set.shape().check_cube(cube)
}

/// `|E∩Q|^{d-1} / H^{d-1}(∂*E ∩ int Q)^d`, defined when `|E∩Q| ≤ |Q|/2`.
pub fn isoperimetric_ratio(set: &CellSet, cube: &CubeId) -> Result<Rational> {
    check_cube_in(set, cube)?;
    let inside = set.count_in(cube);
    if 2 * inside > cube.volume() {
        return Err(Error::PreconditionViolated(format!(
            "|E∩Q| = {inside} exceeds |Q|/2 for Q = {cube}"
        )));
    }
    if inside == 0 {
        return Ok(Rational::zero());
    }
    let boundary = boundary_inside(set, cube);
    if boundary == 0 {
        return Err(Error::DegenerateDenominator);
    }
    let d = set.shape().d;
    let num = num_traits::pow(exact::int(inside as i64), d - 1);
    let den = num_traits::pow(exact::int(boundary as i64), d);
    Ok(num / den)
}

/// Both sides of the cube-boundary estimate for `E` in `Q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VaravReport {
    /// `H^{d-1}(∂Q \ cl*E)`.
    pub outside_closure: u64,
    /// `H^{d-1}(∂*E ∩ int Q)`.
    pub boundary_inside: u64,
    /// `λ = |E∩Q| / |Q|`.
    #[serde(with = "exact::as_string")]
    pub density: Rational,
    /// `outside^d · λ^{d-1} / inside^d`, the exact d-th power of the reported ratio.
    #[serde(with = "exact::as_string")]
    pub power_ratio: Rational,
    /// `outside · λ^{(d-1)/d} / inside` in floating point, for reports only.
    pub ratio: f64,
}

pub fn varav_ratio(set: &CellSet, cube: &CubeId) -> Result<VaravReport> {
    check_cube_in(set, cube)?;
    let inside = set.count_in(cube);
    if inside == 0 {
        return Err(Error::PreconditionViolated(format!(
            "E does not meet Q = {cube}"
        )));
    }
    let d = set.shape().d;
    let density = exact::int(inside as i64) / exact::int(cube.volume() as i64);
    let outside = cube_boundary_outside_closure(set, cube);
    let boundary = boundary_inside(set, cube);
    let (power_ratio, ratio) = if boundary == 0 {
        if outside != 0 {
            return Err(Error::DegenerateDenominator);
        }
        (Rational::zero(), 0.0)
    } else {
        let p = num_traits::pow(exact::int(outside as i64), d)
            * num_traits::pow(density.clone(), d - 1)
            / num_traits::pow(exact::int(boundary as i64), d);
        let lam = exact::to_f64(&density);
        let r = outside as f64 * lam.powf((d as f64 - 1.0) / d as f64) / boundary as f64;
        (p, r)
    };
    Ok(VaravReport {
        outside_closure: outside,
        boundary_inside: boundary,
        density,
        power_ratio,
        ratio,
    })
}
