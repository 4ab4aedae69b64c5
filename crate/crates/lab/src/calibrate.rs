//! Small-case constants by exhaustive enumeration. These serve as regression ceilings
//! for the randomized suites; they are not claims about the continuum constants.

use dyvar_core::decomp::low_density_budget;
use dyvar_core::exact;
use dyvar_core::variation::{isoperimetric_ratio, varav_ratio};
use dyvar_core::{CellSet, CubeFamily, GridFunction, Rational, Shape, VariationMode};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::experiments::variation_pair;
use crate::Result;

/// Largest exponent for which all `2^N` subsets of the base cube are enumerated.
const MAX_ENUMERATED_CELLS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CalibrationTable {
    pub d: usize,
    #[serde(rename = "K_max")]
    pub k_max: u32,
    /// `max |E∩Q|^{d-1} / H(∂*E ∩ int Q)^d` over `|E∩Q| ≤ |Q|/2`.
    #[serde(with = "exact::as_string")]
    pub c_iso: Rational,
    /// `max outside^d λ^{d-1} / inside^d` over nonempty `E∩Q`.
    #[serde(with = "exact::as_string")]
    pub c_va: Rational,
    /// Largest low-density budget ratio over indicators at `budget_k`.
    #[serde(with = "exact::as_string")]
    pub c_budget: Rational,
    /// Smallest `K` at which the low-density budget can be nonzero.
    #[serde(rename = "budget_K")]
    pub budget_k: u32,
    /// Largest `var M 1_E / var 1_E` with zero extension.
    #[serde(with = "exact::as_string")]
    pub theorem_zero_extension: Rational,
    /// Largest `var M 1_E / var 1_E` inside the base cube.
    #[serde(with = "exact::as_string")]
    pub theorem_interior: Rational,
}

/// Test ceilings derived from a [`CalibrationTable`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ceilings {
    pub c_iso: Rational,
    pub c_va: Rational,
    pub c_budget: Rational,
    pub theorem_zero_extension: Rational,
    pub theorem_interior: Rational,
}

/// Main-theorem ceilings are this multiple of the calibrated maximum.
pub const THEOREM_MARGIN: i64 = 4;

impl CalibrationTable {
    pub fn ceilings(&self) -> Ceilings {
        let margin = exact::int(THEOREM_MARGIN);
        Ceilings {
            c_iso: self.c_iso.clone(),
            c_va: self.c_va.clone(),
            c_budget: self.c_budget.clone(),
            theorem_zero_extension: &margin * &self.theorem_zero_extension,
            theorem_interior: &margin * &self.theorem_interior,
        }
    }
}

/// The enumeration bound used by default: `K ≤ 3` on the line, `K ≤ 2` in the plane and
/// `K ≤ 1` above.
pub fn default_k_max(d: usize) -> u32 {
    match d {
        1 => 3,
        2 => 2,
        _ => 1,
    }
}

/// `1 + ⌊(d+2)/d⌋`: the smallest `K` at which some function has a nonzero low-density
/// budget. Every proper subcube then has `2^{-d-2}|Q| ≤ 1`, so only the base cube can be
/// sparse.
pub fn budget_k(d: usize) -> u32 {
    1 + ((d + 2) / d) as u32
}

pub fn oracle_calibrate(d: usize, k_max: u32) -> Result<CalibrationTable> {
    let mut c_iso = Rational::default();
    let mut c_va = Rational::default();
    let mut zero_ext = Rational::default();
    let mut interior = Rational::default();
    for k in 0..=k_max {
        let shape = Shape::new(d, k)?;
        if shape.cells() > MAX_ENUMERATED_CELLS {
            return Err(crate::Error::Usage(format!(
                "exhaustive enumeration needs 2^(dK) <= {MAX_ENUMERATED_CELLS}, got d={d} K={k}"
            )));
        }
        let (iso, va) = set_constants(shape)?;
        c_iso = c_iso.max(iso);
        c_va = c_va.max(va);
        let (z, i) = theorem_constants(shape)?;
        zero_ext = zero_ext.max(z);
        interior = interior.max(i);
    }
    let pk = budget_k(d);
    Ok(CalibrationTable {
        d,
        k_max,
        c_iso,
        c_va,
        c_budget: budget_constant(Shape::new(d, pk)?)?,
        budget_k: pk,
        theorem_zero_extension: zero_ext,
        theorem_interior: interior,
    })
}

fn subset(shape: Shape, mask: u64) -> CellSet {
    CellSet::from_fn(shape, |c| mask >> c & 1 == 1)
}

fn max_of(values: impl ParallelIterator<Item = Result<Rational>>) -> Result<Rational> {
    values.try_reduce(Rational::default, |a, b| Ok(a.max(b)))
}

/// Maxima of the isoperimetric and cube-boundary ratios over every `E ⊂ Q = base`.
fn set_constants(shape: Shape) -> Result<(Rational, Rational)> {
    let q = shape.base_cube();
    let n = shape.cells();
    let iso = max_of((1u64..1 << n).into_par_iter().map(|m| {
        let e = subset(shape, m);
        if 2 * e.len() as u64 > q.volume() {
            return Ok(Rational::default());
        }
        Ok(isoperimetric_ratio(&e, &q)?)
    }))?;
    let va = max_of((1u64..1 << n).into_par_iter().map(|m| {
        Ok(varav_ratio(&subset(shape, m), &q)?.power_ratio)
    }))?;
    Ok((iso, va))
}

/// Largest `var M 1_E / var 1_E` in both modes over every nonempty proper `E`.
fn theorem_constants(shape: Shape) -> Result<(Rational, Rational)> {
    let mask = CubeFamily::all().resolve(shape)?;
    let interior = VariationMode::interior(shape);
    let n = shape.cells();
    let pairs: Vec<(Rational, Rational)> = (1u64..1 << n)
        .into_par_iter()
        .map(|m| {
            let f = GridFunction::indicator(&subset(shape, m));
            let ratio = |mode: &VariationMode| -> Result<Rational> {
                let (a, b) = variation_pair(&f, &mask, mode)?;
                Ok(if b == Rational::default() {
                    Rational::default()
                } else {
                    a / b
                })
            };
            Ok((ratio(&VariationMode::ZeroExtension)?, ratio(&interior)?))
        })
        .collect::<Result<_>>()?;
    Ok(pairs.into_iter().fold(
        (Rational::default(), Rational::default()),
        |(z, i), (a, b)| (z.max(a), i.max(b)),
    ))
}

/// Largest budget ratio over indicators at the given shape. Only `E` with fewer than
/// `2^{-d-2}|base|` cells can have a nonzero budget there, so the others are skipped.
fn budget_constant(shape: Shape) -> Result<Rational> {
    let cap = (shape.cells() >> (shape.d + 2)).saturating_sub(1);
    max_of(sets_up_to(shape.cells(), cap).into_par_iter().map(|e| {
        let f = GridFunction::indicator(&CellSet::from_cells(shape, e)?);
        Ok(low_density_budget(&f, &CubeFamily::all(), None)?
            .ratio
            .unwrap_or_default())
    }))
}

/// Every subset of `0..n` with at most `cap` elements, in lexicographic order.
fn sets_up_to(n: usize, cap: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..cap {
        let mut next = Vec::new();
        for s in &frontier {
            let start = s.last().map_or(0, |&l: &usize| l + 1);
            for c in start..n {
                let mut t = s.clone();
                t.push(c);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use dyvar_core::exact::{int, ratio};

    #[test]
    fn small_sets_are_enumerated() {
        assert_eq!(sets_up_to(4, 2).len(), 1 + 4 + 6);
        assert_eq!(sets_up_to(5, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn budget_level_is_the_first_nontrivial_one() {
        assert_eq!(budget_k(1), 4);
        assert_eq!(budget_k(2), 3);
        assert_eq!(budget_k(3), 2);
    }

    #[test]
    fn line_table() {
        let t = oracle_calibrate(1, 3).unwrap();
        assert_eq!(t.c_iso, int(1));
        assert!(t.c_va > Rational::default());
        assert_eq!(t.c_budget, ratio(1, 8));
        assert!(t.theorem_zero_extension >= ratio(5, 8));
        assert_eq!(t, oracle_calibrate(1, 3).unwrap());
    }

    #[test]
    fn skipped_indicators_have_zero_budget_on_the_line() {
        let shape = Shape::new(1, budget_k(1)).unwrap();
        let mut best = Rational::default();
        for m in 1u64..1 << shape.cells() {
            let f = GridFunction::indicator(&subset(shape, m));
            let r = low_density_budget(&f, &CubeFamily::all(), None).unwrap();
            if m.count_ones() > 1 {
                assert_eq!(r.low_density_budget, Rational::default(), "mask {m:b}");
            }
            if let Some(x) = r.ratio {
                best = best.max(x);
            }
        }
        assert_eq!(best, budget_constant(shape).unwrap());
    }

    #[test]
    fn half_cube_witness_bounds_iso_from_below() {
        let shape = Shape::new(2, 2).unwrap();
        let (iso, _) = set_constants(shape).unwrap();
        assert!(iso >= ratio(1, 2));
    }
}
