//! Level-set cube families and the exact λ-integrals built on them.
//!
//! Every integrand in this module is a step function of `λ` that only jumps at cell
//! values and cube averages, so each integral is an exact finite sum over the sorted
//! breakpoints. Superlevel sets are strict (`f > λ`), hence each integrand is constant on
//! the half-open intervals `[λ_i, λ_{i+1})` and is evaluated at the left endpoint.

use std::collections::BTreeMap;

use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::cube::{CubeId, Shape};
use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::grid::{superlevel_set, CellSet, GridFunction};
use crate::maxop::{maximal_transform_with, AverageTree, CubeFamily, FamilyMask};
use crate::variation::{variation, VariationMode};

/// The maximal admissible cubes with average above `lambda`; pairwise disjoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelFamily {
    #[serde(with = "exact::as_string")]
    pub lambda: Rational,
    pub cubes: Vec<CubeId>,
}

impl LevelFamily {
    pub fn cells(&self, shape: Shape) -> CellSet {
        let mut set = CellSet::empty(shape);
        for q in &self.cubes {
            for c in shape.cube_cells(q) {
                set.insert(c);
            }
        }
        set
    }
}

/// Top-down traversal: a cube is emitted when it qualifies and no admissible ancestor
/// did; the subtree below an emitted cube is skipped.
fn traverse_maximal(
    shape: Shape,
    mask: &FamilyMask,
    mut qualifies: impl FnMut(u32, usize) -> bool,
) -> Vec<(u32, usize)> {
    let k = shape.k;
    let mut out = Vec::new();
    let mut covered: Vec<bool> = vec![false; 1];
    for level in (0..=k).rev() {
        let n = shape.cubes_at_level(level);
        let above = if level == k {
            vec![false; n]
        } else {
            shape
                .parent_map(level)
                .into_iter()
                .map(|p| covered[p])
                .collect()
        };
        covered = above;
        for (i, slot) in covered.iter_mut().enumerate() {
            if !*slot && mask.admits_at(level, i) && qualifies(level, i) {
                out.push((level, i));
                *slot = true;
            }
        }
    }
    out
}

pub fn maximal_cubes(
    tree: &AverageTree,
    family: &CubeFamily,
    lambda: &Rational,
) -> Result<LevelFamily> {
    let shape = tree.shape();
    let mask = family.resolve(shape)?;
    mask.check_saturated()?;
    Ok(maximal_cubes_with(tree, &mask, lambda))
}

pub fn maximal_cubes_with(tree: &AverageTree, mask: &FamilyMask, lambda: &Rational) -> LevelFamily {
    let shape = tree.shape();
    let hits = traverse_maximal(shape, mask, |l, i| &tree.averages(l)[i] > lambda);
    LevelFamily {
        lambda: lambda.clone(),
        cubes: hits.into_iter().map(|(l, i)| shape.cube_at(l, i)).collect(),
    }
}

/// Outcome of a cellwise set identity; `witness` is a cell where the sides differ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetIdentityCheck {
    pub holds: bool,
    pub witness: Option<usize>,
}

/// Checks `{M f > λ} = ∪Q_λ ∪ {f > λ}` (the last term only with pointwise majorization).
pub fn levelset_decomposition_check(
    f: &GridFunction,
    family: &CubeFamily,
    lambda: &Rational,
) -> Result<SetIdentityCheck> {
    let shape = f.shape();
    let mask = family.resolve(shape)?;
    let tree = AverageTree::build(f);
    let mf = maximal_transform_with(f, &tree, &mask)?;
    Ok(decomposition_at(f, &mf, &tree, &mask, lambda))
}

fn decomposition_at(
    f: &GridFunction,
    mf: &GridFunction,
    tree: &AverageTree,
    mask: &FamilyMask,
    lambda: &Rational,
) -> SetIdentityCheck {
    let shape = f.shape();
    let lhs = superlevel_set(mf, lambda);
    let mut rhs = maximal_cubes_with(tree, mask, lambda).cells(shape);
    if mask.include_pointwise() {
        for c in superlevel_set(f, lambda).iter() {
            rhs.insert(c);
        }
    }
    let witness = (0..shape.cells()).find(|&c| lhs.contains(c) != rhs.contains(c));
    SetIdentityCheck {
        holds: witness.is_none(),
        witness,
    }
}

/// Runs [`levelset_decomposition_check`] on one λ from every breakpoint interval,
/// including the unbounded ones on either side.
pub fn levelset_decomposition_sweep(
    f: &GridFunction,
    family: &CubeFamily,
) -> Result<(SetIdentityCheck, Option<Rational>)> {
    let shape = f.shape();
    let mask = family.resolve(shape)?;
    let tree = AverageTree::build(f);
    let mf = maximal_transform_with(f, &tree, &mask)?;
    let bps = crate::grid::breakpoints(f, Some(&tree));
    let below = &bps[0] - exact::int(1);
    for lambda in std::iter::once(below).chain(bps) {
        let check = decomposition_at(f, &mf, &tree, &mask, &lambda);
        if !check.holds {
            return Ok((check, Some(lambda)));
        }
    }
    Ok((
        SetIdentityCheck {
            holds: true,
            witness: None,
        },
        None,
    ))
}

/// `inf{λ : |{f>λ} ∩ Q| < r|Q|}`, attained at a cell value of `Q`.
pub fn r_median(f: &GridFunction, cube: &CubeId, r: &Rational) -> Result<Rational> {
    f.shape().check_cube(cube)?;
    if *r <= Rational::zero() || *r > exact::int(1) {
        return Err(Error::PreconditionViolated(format!(
            "r = {} must lie in (0, 1]",
            exact::format(r)
        )));
    }
    let mut vals: Vec<&Rational> = f
        .shape()
        .cube_cells(cube)
        .into_iter()
        .map(|c| &f.values()[c])
        .collect();
    vals.sort_unstable_by(|a, b| b.cmp(a));
    // At most `allowed` cells may lie strictly above the median.
    let quota = (r * exact::int(vals.len() as i64)).ceil();
    let allowed = quota.to_integer().to_usize().expect("quota fits") - 1;
    Ok(vals[allowed].clone())
}

/// `min{ max{ r-median of f on Q, max{f_P : P ∈ family, Q ⊊ P} }, f_Q }`; the ancestor
/// term is dropped when no admissible strict supercube exists.
pub fn m_functional(
    f: &GridFunction,
    tree: &AverageTree,
    family: &CubeFamily,
    cube: &CubeId,
    r: &Rational,
) -> Result<Rational> {
    let mask = family.resolve(f.shape())?;
    m_functional_with(f, tree, &mask, cube, r)
}

pub fn m_functional_with(
    f: &GridFunction,
    tree: &AverageTree,
    mask: &FamilyMask,
    cube: &CubeId,
    r: &Rational,
) -> Result<Rational> {
    let shape = f.shape();
    if !mask.admits(cube) {
        return Err(Error::NotAdmissible(cube.to_string()));
    }
    let median = r_median(f, cube, r)?;
    let ancestor_max = cube
        .strict_ancestors(&shape)
        .into_iter()
        .filter(|p| mask.admits(p))
        .map(|p| tree.average(&p).clone())
        .max();
    let inner = match ancestor_max {
        Some(a) if a > median => a,
        _ => median,
    };
    Ok(inner.min(tree.average(cube).clone()))
}

/// Exact breakpoint index: every cell value and cube average mapped to its rank among
/// the sorted breakpoints, so `v > λ_i` becomes `rank(v) > i`.
struct Ranked {
    levels: Vec<Rational>,
    cell_rank: Vec<usize>,
    cube_rank: Vec<Vec<usize>>,
}

impl Ranked {
    fn new(f: &GridFunction, tree: &AverageTree, extra: &[Rational]) -> Self {
        let mut levels = crate::grid::breakpoints(f, Some(tree));
        levels.extend(extra.iter().cloned());
        levels.sort();
        levels.dedup();
        let rank = |v: &Rational| levels.binary_search(v).expect("value is a breakpoint");
        let cell_rank = f.values().iter().map(rank).collect();
        let cube_rank = (0..=f.k())
            .map(|l| tree.averages(l).iter().map(rank).collect())
            .collect();
        Ranked {
            levels,
            cell_rank,
            cube_rank,
        }
    }

    fn intervals(&self) -> impl Iterator<Item = (usize, Rational)> + '_ {
        self.levels
            .windows(2)
            .enumerate()
            .map(|(i, w)| (i, &w[1] - &w[0]))
    }

    /// Cells of `cube` strictly above `λ_i`.
    fn count_above(&self, shape: Shape, cube: &CubeId, i: usize) -> u64 {
        shape
            .cube_cells(cube)
            .into_iter()
            .filter(|&c| self.cell_rank[c] > i)
            .count() as u64
    }

    fn maximal_at(&self, shape: Shape, mask: &FamilyMask, i: usize) -> Vec<CubeId> {
        traverse_maximal(shape, mask, |l, idx| self.cube_rank[l as usize][idx] > i)
            .into_iter()
            .map(|(l, idx)| shape.cube_at(l, idx))
            .collect()
    }
}

/// One cube's share of the low-density budget.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeContribution {
    pub cube: CubeId,
    /// Maximal half-open λ-intervals where the cube is in `Q_λ` and sparse.
    pub intervals: Vec<LambdaInterval>,
    /// Measure of those intervals times `H^{d-1}(∂Q)`.
    #[serde(with = "exact::as_string")]
    pub contribution: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LambdaInterval {
    #[serde(with = "exact::as_string")]
    pub from: Rational,
    #[serde(with = "exact::as_string")]
    pub to: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetReport {
    #[serde(with = "exact::as_string")]
    pub threshold: Rational,
    #[serde(with = "exact::as_string")]
    pub low_density_budget: Rational,
    /// Variation over `∪{int Q : Q ∈ family}`.
    #[serde(with = "exact::as_string")]
    pub variation_on_interiors: Rational,
    /// `None` when the variation vanishes.
    #[serde(with = "exact::as_string_opt")]
    pub ratio: Option<Rational>,
    pub contributions: Vec<CubeContribution>,
}

/// Default sparsity threshold `2^{-d-2}`.
pub fn default_threshold(d: usize) -> Rational {
    exact::pow2(-(d as i64) - 2)
}

/// `Σ_Q ∫_{λ : Q ∈ Q_λ, |Q ∩ {f>λ}| < t|Q|} H^{d-1}(∂Q) dλ` by a λ-sweep, with the
/// variation over the union of cube interiors as companion value.
pub fn low_density_budget(
    f: &GridFunction,
    family: &CubeFamily,
    threshold: Option<&Rational>,
) -> Result<BudgetReport> {
    let shape = f.shape();
    let mask = family.resolve(shape)?;
    mask.check_saturated()?;
    let threshold = threshold.cloned().unwrap_or_else(|| default_threshold(shape.d));
    let tree = AverageTree::build(f);
    let ranked = Ranked::new(f, &tree, &[]);

    let mut per_cube: BTreeMap<CubeId, (Rational, Vec<LambdaInterval>)> = BTreeMap::new();
    for (i, len) in ranked.intervals() {
        for q in ranked.maximal_at(shape, &mask, i) {
            let above = exact::int(ranked.count_above(shape, &q, i) as i64);
            if above < &threshold * exact::int(q.volume() as i64) {
                let from = ranked.levels[i].clone();
                let to = ranked.levels[i + 1].clone();
                let entry = per_cube
                    .entry(q)
                    .or_insert_with(|| (Rational::zero(), Vec::new()));
                entry.0 += &len;
                match entry.1.last_mut() {
                    Some(last) if last.to == from => last.to = to,
                    _ => entry.1.push(LambdaInterval { from, to }),
                }
            }
        }
    }
    let contributions: Vec<CubeContribution> = per_cube
        .into_iter()
        .map(|(cube, (measure, intervals))| {
            let contribution = measure * exact::int(cube.boundary_area() as i64);
            CubeContribution {
                cube,
                intervals,
                contribution,
            }
        })
        .collect();
    let budget: Rational = contributions.iter().map(|c| &c.contribution).sum();
    let var = variation(
        f,
        &VariationMode::CubeInteriors {
            cubes: mask.cubes(),
        },
    )?;
    let ratio = (!var.is_zero()).then(|| &budget / &var);
    Ok(BudgetReport {
        threshold,
        low_density_budget: budget,
        variation_on_interiors: var,
        ratio,
        contributions,
    })
}

/// The same budget as `Σ_Q (f_Q − m(Q, family, t)) · H^{d-1}(∂Q)` over cubes with `m < f_Q`.
pub fn low_density_budget_via_m(
    f: &GridFunction,
    family: &CubeFamily,
    threshold: Option<&Rational>,
) -> Result<Rational> {
    let shape = f.shape();
    let mask = family.resolve(shape)?;
    mask.check_saturated()?;
    let threshold = threshold.cloned().unwrap_or_else(|| default_threshold(shape.d));
    let tree = AverageTree::build(f);
    let mut total = Rational::zero();
    for q in mask.cubes() {
        let m = m_functional_with(f, &tree, &mask, &q, &threshold)?;
        let fq = tree.average(&q);
        if m < *fq {
            total += (fq - m) * exact::int(q.boundary_area() as i64);
        }
    }
    Ok(total)
}

/// Both sides of an inequality `lhs ≤ rhs`, evaluated exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InequalityCheck {
    #[serde(with = "exact::as_string")]
    pub lhs: Rational,
    #[serde(with = "exact::as_string")]
    pub rhs: Rational,
    pub holds: bool,
}

impl InequalityCheck {
    fn new(lhs: Rational, rhs: Rational) -> Self {
        let holds = lhs <= rhs;
        InequalityCheck { lhs, rhs, holds }
    }
}

fn sparse_precondition(sub: &GridFunction, lambda0: &Rational, exponent: usize) -> Result<()> {
    let above = sub.values().iter().filter(|v| *v > lambda0).count() as u64;
    let n = sub.shape().cells() as u64;
    if (above << exponent) > n {
        return Err(Error::PreconditionViolated(format!(
            "|{{f > λ0}} ∩ Q0| = {above} exceeds 2^-{exponent} |Q0| with |Q0| = {n}"
        )));
    }
    Ok(())
}

/// `|Q0|(f_{Q0} − λ0) ≤ 2^{d+1} ∫_{λ0}^∞ |{f>λ} ∩ ∪{P ∈ Q_λ : |{f>λ}∩P| ≤ |P|/2}| dλ`,
/// where `Q_λ` are the maximal dyadic subcubes of `Q0` with average above `λ`.
/// Requires `|{f > λ0} ∩ Q0| ≤ 2^{-d-1}|Q0|`.
pub fn sparse_mass_check(
    f: &GridFunction,
    q0: &CubeId,
    lambda0: &Rational,
) -> Result<InequalityCheck> {
    let sub = f.restrict(q0)?;
    let shape = sub.shape();
    let d = shape.d;
    sparse_precondition(&sub, lambda0, d + 1)?;
    let n = exact::int(shape.cells() as i64);
    let lhs = sub.integral() - &n * lambda0;

    let tree = AverageTree::build(&sub);
    let mask = CubeFamily::all().resolve(shape)?;
    let ranked = Ranked::new(&sub, &tree, std::slice::from_ref(lambda0));
    let mut integral = Rational::zero();
    for (i, len) in ranked.intervals() {
        if ranked.levels[i] < *lambda0 {
            continue;
        }
        let mut measure = 0u64;
        for p in ranked.maximal_at(shape, &mask, i) {
            let above = ranked.count_above(shape, &p, i);
            if 2 * above <= p.volume() {
                measure += above;
            }
        }
        if measure > 0 {
            integral += len * exact::int(measure as i64);
        }
    }
    let rhs = exact::pow2(d as i64 + 1) * integral;
    Ok(InequalityCheck::new(lhs, rhs))
}

/// `∫_a^b |P ∩ {f > λ}| dλ` for `a ≤ b`, as `Σ_{x∈P} max(0, min(b, f(x)) − a)`.
fn mass_between(f: &GridFunction, cube: &CubeId, a: &Rational, b: &Rational) -> Rational {
    let mut total = Rational::zero();
    for c in f.shape().cube_cells(cube) {
        let top = (&f.values()[c]).min(b);
        if top > a {
            total += top - a;
        }
    }
    total
}

/// `|Q0|(f_{Q0} − λ0) ≤ 2^{d+2} Σ_{P ⊊ Q0} ∫_{m(P, D(Q0), 1/2)}^{f_P} |P ∩ {f>λ}| dλ`,
/// with `D(Q0)` the dyadic subcubes of `Q0`. Requires `|{f > λ0} ∩ Q0| ≤ 2^{-d-2}|Q0|`.
pub fn sparse_mass_corollary_check(
    f: &GridFunction,
    q0: &CubeId,
    lambda0: &Rational,
) -> Result<InequalityCheck> {
    let sub = f.restrict(q0)?;
    let shape = sub.shape();
    let d = shape.d;
    sparse_precondition(&sub, lambda0, d + 2)?;
    let n = exact::int(shape.cells() as i64);
    let lhs = sub.integral() - &n * lambda0;

    let tree = AverageTree::build(&sub);
    let mask = CubeFamily::all().resolve(shape)?;
    let half = exact::ratio(1, 2);
    let mut sum = Rational::zero();
    for p in shape.all_cubes().filter(|p| p.level < shape.k) {
        let m = m_functional_with(&sub, &tree, &mask, &p, &half)?;
        sum += mass_between(&sub, &p, &m, tree.average(&p));
    }
    let rhs = exact::pow2(d as i64 + 2) * sum;
    Ok(InequalityCheck::new(lhs, rhs))
}
