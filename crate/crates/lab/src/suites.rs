//! Randomized verification suites. Each instance is drawn from its own seed, checked
//! exactly, and on failure turned into a [`Witness`] that [`replay`] can re-run.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use dyvar_core::decomp::{
    levelset_decomposition_sweep, low_density_budget, low_density_budget_via_m,
    sparse_mass_check, sparse_mass_corollary_check,
};
use dyvar_core::domain::saturate;
use dyvar_core::exact;
use dyvar_core::variation::{isoperimetric_ratio, union_boundary_decomposition_check, varav_ratio};
use dyvar_core::{
    brute_force_maximal, coarea, maximal_transform, variation, CellSet, CubeFamily, CubeId,
    GridFunction, Rational, Shape, VariationMode,
};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibrate::{default_k_max, oracle_calibrate, CalibrationTable};
use crate::ensemble::{
    random_cube, random_rational, random_set, random_value, rng_for, staircase, Ensemble,
    EnsembleKind, Params,
};
use crate::experiments::{theorem_ratio_experiment, variation_pair, RatioRecord};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Suite {
    #[serde(rename = "coarea")]
    Coarea,
    #[serde(rename = "oracle")]
    Oracle,
    #[serde(rename = "decomposition")]
    Decomposition,
    #[serde(rename = "lemma-2.2")]
    UnionBoundary,
    #[serde(rename = "lemma-2.3")]
    Isoperimetric,
    #[serde(rename = "lemma-2.4")]
    CubeBoundary,
    #[serde(rename = "prop-3.2")]
    SparseMass,
    #[serde(rename = "cor-3.3")]
    SparseMassCorollary,
    #[serde(rename = "prop-2.5")]
    LowDensityBudget,
    #[serde(rename = "theorem")]
    Theorem,
    #[serde(rename = "pointwise")]
    Pointwise,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Coarea,
        Suite::Oracle,
        Suite::Decomposition,
        Suite::UnionBoundary,
        Suite::Isoperimetric,
        Suite::CubeBoundary,
        Suite::SparseMass,
        Suite::SparseMassCorollary,
        Suite::LowDensityBudget,
        Suite::Theorem,
        Suite::Pointwise,
    ];

    /// Command-line name.
    pub fn name(self) -> &'static str {
        match self {
            Suite::Coarea => "coarea",
            Suite::Oracle => "oracle",
            Suite::Decomposition => "decomposition",
            Suite::UnionBoundary => "lemma-2.2",
            Suite::Isoperimetric => "lemma-2.3",
            Suite::CubeBoundary => "lemma-2.4",
            Suite::SparseMass => "prop-3.2",
            Suite::SparseMassCorollary => "cor-3.3",
            Suite::LowDensityBudget => "prop-2.5",
            Suite::Theorem => "theorem",
            Suite::Pointwise => "pointwise",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown suite {s:?}")))
    }
}

/// A replayable input of one suite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Instance {
    Grid {
        f: GridFunction,
    },
    GridWithFamily {
        f: GridFunction,
        cubes: Vec<CubeId>,
        include_pointwise: bool,
    },
    GridPair {
        f: GridFunction,
        g: GridFunction,
        #[serde(with = "exact::as_string")]
        c: Rational,
    },
    SetPair {
        a: CellSet,
        b: CellSet,
    },
    SetInCube {
        e: CellSet,
        q: CubeId,
    },
    SparseMass {
        f: GridFunction,
        q0: CubeId,
        #[serde(with = "exact::as_string")]
        lambda0: Rational,
    },
}

impl Instance {
    pub fn shape(&self) -> Shape {
        match self {
            Instance::Grid { f }
            | Instance::GridWithFamily { f, .. }
            | Instance::GridPair { f, .. }
            | Instance::SparseMass { f, .. } => f.shape(),
            Instance::SetPair { a, .. } => a.shape(),
            Instance::SetInCube { e, .. } => e.shape(),
        }
    }
}

/// Outcome of checking one instance. Observations are named metrics that feed the
/// suite-level maxima.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass(Vec<(&'static str, Rational)>),
    Fail(String),
    Skip(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub suite: Suite,
    pub seed: u64,
    pub instance: Instance,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub suite: Suite,
    pub d: usize,
    #[serde(rename = "K")]
    pub k: u32,
    pub count: usize,
    pub seed: u64,
    pub checked: usize,
    pub skipped: usize,
    /// Largest value of each observed metric.
    #[serde(with = "metric_map")]
    pub observed_max: BTreeMap<String, Rational>,
    /// Ceiling each metric was compared against, where one applies.
    #[serde(with = "metric_map")]
    pub ceilings: BTreeMap<String, Rational>,
    pub failures: Vec<Witness>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

mod metric_map {
    use std::collections::BTreeMap;

    use dyvar_core::{exact, Rational};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<String, Rational>, s: S) -> Result<S::Ok, S::Error> {
        m.iter()
            .map(|(k, v)| (k.clone(), exact::format(v)))
            .collect::<BTreeMap<_, _>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, Rational>, D::Error> {
        use serde::de::Error as _;
        BTreeMap::<String, String>::deserialize(d)?
            .into_iter()
            .map(|(k, v)| Ok((k, exact::parse(&v).map_err(D::Error::custom)?)))
            .collect()
    }
}

/// Calibration tables at the default enumeration bound, computed once per dimension.
pub fn calibration(d: usize) -> Result<Arc<CalibrationTable>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<CalibrationTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().expect("cache lock").get(&d) {
        return Ok(t.clone());
    }
    let table = Arc::new(oracle_calibrate(d, default_k_max(d))?);
    cache
        .lock()
        .expect("cache lock")
        .entry(d)
        .or_insert(table.clone());
    Ok(table)
}

/// Ceilings applied by `suite` in dimension `d`, keyed by metric.
pub fn suite_ceilings(suite: Suite, d: usize) -> Result<BTreeMap<String, Rational>> {
    let named = |pairs: Vec<(&str, Rational)>| {
        pairs
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect::<BTreeMap<_, _>>()
    };
    Ok(match suite {
        Suite::Isoperimetric => named(vec![("isoperimetric", calibration(d)?.ceilings().c_iso)]),
        Suite::CubeBoundary => named(vec![("cube_boundary", calibration(d)?.ceilings().c_va)]),
        Suite::LowDensityBudget => named(vec![("budget", calibration(d)?.ceilings().c_budget)]),
        Suite::Theorem => {
            let c = calibration(d)?.ceilings();
            named(vec![
                ("zero_extension", c.theorem_zero_extension),
                ("interior", c.theorem_interior),
            ])
        }
        _ => BTreeMap::new(),
    })
}

fn random_params(rng: &mut ChaCha8Rng) -> Params {
    Params {
        max_numerator: rng.gen_range(1..=6),
        max_denominator: rng.gen_range(1..=4),
        nonnegative: rng.gen_bool(0.3),
        density_percent: *[10u8, 30, 60, 100].choose(rng).expect("nonempty"),
    }
}

/// A random grid function drawn from a random ensemble kind.
fn mixed_grid(shape: Shape, rng: &mut ChaCha8Rng) -> GridFunction {
    let params = random_params(rng);
    match rng.gen_range(0..3) {
        0 => random_rational(shape, &params, rng),
        1 => GridFunction::indicator(&random_set(shape, params.density_percent, rng)),
        _ => staircase(shape, &params, rng),
    }
}

fn random_family(shape: Shape, rng: &mut ChaCha8Rng) -> Vec<CubeId> {
    let picks = rng.gen_range(0..=4);
    let chosen: Vec<CubeId> = (0..picks).map(|_| random_cube(shape, shape.k, rng)).collect();
    saturate(shape, &chosen)
}

fn random_set_in_cube(shape: Shape, rng: &mut ChaCha8Rng) -> (CellSet, CubeId) {
    let q = random_cube(shape, 2, rng);
    let density = *[10u8, 25, 50, 75].choose(rng).expect("nonempty");
    (random_set(shape, density, rng), q)
}

fn sparse_mass_instance(shape: Shape, exponent: usize, rng: &mut ChaCha8Rng) -> Instance {
    let mut params = random_params(rng);
    params.density_percent = *[5u8, 10, 25, 60].choose(rng).expect("nonempty");
    let f = random_rational(shape, &params, rng);
    let q0 = {
        let level = rng.gen_range(shape.k.min(1)..=shape.k);
        shape.cube_at(level, rng.gen_range(0..shape.cubes_at_level(level)))
    };
    let cells = shape.cube_cells(&q0);
    let allowed = (cells.len() >> exponent) as u64;
    // Rejection sampling over candidate levels; the maximum on Q0 always qualifies.
    loop {
        let lambda0 = if rng.gen_bool(0.5) {
            f.values()[*cells.choose(rng).expect("cube has cells")].clone()
        } else {
            random_value(&params, rng)
        };
        let above = cells.iter().filter(|&&c| f.values()[c] > lambda0).count() as u64;
        if above <= allowed {
            return Instance::SparseMass { f, q0, lambda0 };
        }
    }
}

/// Draws the instance of `suite` for one instance seed.
pub fn generate(suite: Suite, shape: Shape, seed: u64) -> Instance {
    let mut rng = rng_for(seed);
    let rng = &mut rng;
    match suite {
        Suite::Coarea | Suite::Theorem => Instance::Grid {
            f: mixed_grid(shape, rng),
        },
        Suite::Oracle | Suite::Decomposition | Suite::LowDensityBudget => {
            let f = if suite == Suite::LowDensityBudget && rng.gen_bool(0.5) {
                let mut params = random_params(rng);
                params.density_percent = *[3u8, 8, 15].choose(rng).expect("nonempty");
                random_rational(shape, &params, rng)
            } else {
                mixed_grid(shape, rng)
            };
            Instance::GridWithFamily {
                f,
                cubes: random_family(shape, rng),
                include_pointwise: suite != Suite::Oracle || rng.gen_bool(0.5),
            }
        }
        Suite::Pointwise => Instance::GridPair {
            f: mixed_grid(shape, rng),
            g: mixed_grid(shape, rng),
            c: exact::ratio(rng.gen_range(0..=6), rng.gen_range(1..=3)),
        },
        Suite::UnionBoundary => {
            let da = *[10u8, 40, 70].choose(rng).expect("nonempty");
            let db = *[10u8, 40, 70].choose(rng).expect("nonempty");
            Instance::SetPair {
                a: random_set(shape, da, rng),
                b: random_set(shape, db, rng),
            }
        }
        Suite::Isoperimetric => {
            let (mut e, q) = random_set_in_cube(shape, rng);
            if 2 * e.count_in(&q) > q.volume() {
                for c in shape.cube_cells(&q) {
                    e.toggle(c);
                }
            }
            Instance::SetInCube { e, q }
        }
        Suite::CubeBoundary => {
            let (mut e, q) = random_set_in_cube(shape, rng);
            if e.count_in(&q) == 0 {
                let cells = shape.cube_cells(&q);
                e.insert(*cells.choose(rng).expect("cube has cells"));
            }
            Instance::SetInCube { e, q }
        }
        Suite::SparseMass => sparse_mass_instance(shape, shape.d + 1, rng),
        Suite::SparseMassCorollary => sparse_mass_instance(shape, shape.d + 2, rng),
    }
}

fn mismatch(suite: Suite, instance: &Instance) -> Error {
    Error::Usage(format!("suite {suite} cannot check a {instance:?} instance"))
}

fn modes(shape: Shape) -> [(&'static str, VariationMode); 2] {
    [
        ("interior", VariationMode::interior(shape)),
        ("zero_extension", VariationMode::ZeroExtension),
    ]
}

fn fail(msg: String) -> Result<Verdict> {
    Ok(Verdict::Fail(msg))
}

fn within(metric: &'static str, value: Rational, ceilings: &BTreeMap<String, Rational>) -> Option<String> {
    let ceiling = ceilings.get(metric)?;
    (value > *ceiling).then(|| {
        format!(
            "{metric} = {} exceeds ceiling {}",
            exact::format(&value),
            exact::format(ceiling)
        )
    })
}

/// Checks one instance exactly.
pub fn check(
    suite: Suite,
    instance: &Instance,
    ceilings: &BTreeMap<String, Rational>,
) -> Result<Verdict> {
    let shape = instance.shape();
    match (suite, instance) {
        (Suite::Coarea, Instance::Grid { f }) => {
            for (name, mode) in modes(shape) {
                let v = variation(f, &mode)?;
                let c = coarea(f, &mode)?;
                if v != c {
                    return fail(format!(
                        "{name}: variation {} != coarea {}",
                        exact::format(&v),
                        exact::format(&c)
                    ));
                }
            }
            Ok(Verdict::Pass(Vec::new()))
        }
        (
            Suite::Oracle,
            Instance::GridWithFamily {
                f,
                cubes,
                include_pointwise,
            },
        ) => {
            for fam in [
                CubeFamily::all(),
                CubeFamily::explicit(cubes.clone()),
            ] {
                let fam = fam.with_pointwise(*include_pointwise);
                if maximal_transform(f, &fam) != brute_force_maximal(f, &fam) {
                    return fail(format!("transforms differ for {:?}", fam.selector));
                }
            }
            Ok(Verdict::Pass(Vec::new()))
        }
        (
            Suite::Decomposition,
            Instance::GridWithFamily {
                f,
                cubes,
                include_pointwise,
            },
        ) => {
            for fam in [CubeFamily::all(), CubeFamily::explicit(cubes.clone())] {
                let fam = fam.with_pointwise(*include_pointwise);
                let (chk, lambda) = levelset_decomposition_sweep(f, &fam)?;
                if !chk.holds {
                    return fail(format!(
                        "{:?}: sides differ at cell {:?} for lambda {}",
                        fam.selector,
                        chk.witness,
                        lambda.as_ref().map(exact::format).unwrap_or_default()
                    ));
                }
            }
            Ok(Verdict::Pass(Vec::new()))
        }
        (Suite::UnionBoundary, Instance::SetPair { a, b }) => {
            let chk = union_boundary_decomposition_check(a, b)?;
            if chk.holds {
                Ok(Verdict::Pass(Vec::new()))
            } else {
                fail(format!("face {:?} escapes the decomposition", chk.witness))
            }
        }
        (Suite::Isoperimetric, Instance::SetInCube { e, q }) => {
            let r = isoperimetric_ratio(e, q)?;
            match within("isoperimetric", r.clone(), ceilings) {
                Some(msg) => fail(msg),
                None => Ok(Verdict::Pass(vec![("isoperimetric", r)])),
            }
        }
        (Suite::CubeBoundary, Instance::SetInCube { e, q }) => {
            let r = varav_ratio(e, q)?.power_ratio;
            match within("cube_boundary", r.clone(), ceilings) {
                Some(msg) => fail(msg),
                None => Ok(Verdict::Pass(vec![("cube_boundary", r)])),
            }
        }
        (Suite::SparseMass | Suite::SparseMassCorollary, Instance::SparseMass { f, q0, lambda0 }) => {
            let chk = if suite == Suite::SparseMass {
                sparse_mass_check(f, q0, lambda0)?
            } else {
                sparse_mass_corollary_check(f, q0, lambda0)?
            };
            if !chk.holds {
                return fail(format!(
                    "lhs {} > rhs {}",
                    exact::format(&chk.lhs),
                    exact::format(&chk.rhs)
                ));
            }
            let mut obs = vec![("lhs", chk.lhs.clone())];
            if chk.rhs > Rational::default() {
                obs.push(("lhs_over_rhs", &chk.lhs / &chk.rhs));
            }
            Ok(Verdict::Pass(obs))
        }
        (
            Suite::LowDensityBudget,
            Instance::GridWithFamily {
                f,
                cubes,
                include_pointwise,
            },
        ) => {
            for fam in [CubeFamily::all(), CubeFamily::explicit(cubes.clone())] {
                let fam = fam.with_pointwise(*include_pointwise);
                let sweep = low_density_budget(f, &fam, None)?.low_density_budget;
                let via_m = low_density_budget_via_m(f, &fam, None)?;
                if sweep != via_m {
                    return fail(format!(
                        "{:?}: sweep {} != m-form {}",
                        fam.selector,
                        exact::format(&sweep),
                        exact::format(&via_m)
                    ));
                }
            }
            let report = low_density_budget(f, &CubeFamily::all(), None)?;
            let Some(r) = report.ratio else {
                return Ok(Verdict::Pass(Vec::new()));
            };
            match within("budget", r.clone(), ceilings) {
                Some(msg) => fail(msg),
                None => Ok(Verdict::Pass(vec![("budget", r)])),
            }
        }
        (Suite::Theorem, Instance::Grid { f }) => {
            let mask = CubeFamily::all().resolve(shape)?;
            let mut obs = Vec::new();
            for (name, mode) in modes(shape) {
                let (var_mf, var_f) = variation_pair(f, &mask, &mode)?;
                if var_f == Rational::default() {
                    continue;
                }
                let r = var_mf / var_f;
                if let Some(msg) = within(name, r.clone(), ceilings) {
                    return fail(msg);
                }
                obs.push((name, r));
            }
            if obs.is_empty() {
                return Ok(Verdict::Skip("var-zero".into()));
            }
            Ok(Verdict::Pass(obs))
        }
        (Suite::Pointwise, Instance::GridPair { f, g, c }) => pointwise(f, g, c),
        _ => Err(mismatch(suite, instance)),
    }
}

fn pointwise(f: &GridFunction, g: &GridFunction, c: &Rational) -> Result<Verdict> {
    let all = CubeFamily::all();
    let mf = maximal_transform(f, &all)?;
    let mg = maximal_transform(g, &all)?;
    if !f.le(&mf) {
        return fail("M f >= f fails".into());
    }
    if !maximal_transform(&f.add(g)?, &all)?.le(&mf.add(&mg)?) {
        return fail("M(f+g) <= M f + M g fails".into());
    }
    if maximal_transform(&f.scale(c), &all)? != mf.scale(c) {
        return fail("M(c f) = c M f fails".into());
    }
    for shift in [c.clone(), -c.clone()] {
        if maximal_transform(&f.add_constant(&shift), &all)? != mf.add_constant(&shift) {
            return fail(format!("M(f + {0}) = M f + {0} fails", exact::format(&shift)));
        }
    }
    for (name, mode) in modes(f.shape()) {
        if variation(&f.abs(), &mode)? > variation(f, &mode)? {
            return fail(format!("{name}: var |f| > var f"));
        }
    }
    Ok(Verdict::Pass(Vec::new()))
}

/// Runs `count` instances of `suite` on `[0, 2^K)^d`.
pub fn run_suite(suite: Suite, d: usize, k: u32, count: usize, seed: u64) -> Result<SuiteOutcome> {
    let shape = Shape::new(d, k)?;
    let ceilings = suite_ceilings(suite, d)?;
    let seeds = Ensemble::new(EnsembleKind::RandomRational, d, k, count, seed).instance_seeds();
    let results: Vec<(u64, Instance, Verdict)> = seeds
        .into_par_iter()
        .map(|s| {
            let inst = generate(suite, shape, s);
            let verdict = check(suite, &inst, &ceilings)?;
            Ok((s, inst, verdict))
        })
        .collect::<Result<_>>()?;
    let mut out = SuiteOutcome {
        suite,
        d,
        k,
        count,
        seed,
        checked: 0,
        skipped: 0,
        observed_max: BTreeMap::new(),
        ceilings,
        failures: Vec::new(),
    };
    for (s, instance, verdict) in results {
        match verdict {
            Verdict::Pass(obs) => {
                out.checked += 1;
                for (name, v) in obs {
                    let slot = out.observed_max.entry(name.to_string()).or_insert_with(|| v.clone());
                    if v > *slot {
                        *slot = v;
                    }
                }
            }
            Verdict::Skip(_) => out.skipped += 1,
            Verdict::Fail(detail) => {
                out.checked += 1;
                out.failures.push(Witness {
                    suite,
                    seed: s,
                    instance,
                    detail,
                });
            }
        }
    }
    Ok(out)
}

/// Largest ratio of one ensemble kind in one variation mode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremRow {
    pub kind: EnsembleKind,
    pub mode: String,
    pub records: usize,
    #[serde(with = "exact::as_string_opt")]
    pub max: Option<Rational>,
    #[serde(with = "exact::as_string")]
    pub ceiling: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremSweep {
    pub d: usize,
    #[serde(rename = "K")]
    pub k: u32,
    pub rows: Vec<TheoremRow>,
    pub records: Vec<RatioRecord>,
}

impl TheoremSweep {
    pub fn passed(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.max.as_ref().is_none_or(|m| *m <= r.ceiling))
    }

    pub fn max(&self, mode: &str) -> Option<&Rational> {
        self.rows
            .iter()
            .filter(|r| r.mode == mode)
            .filter_map(|r| r.max.as_ref())
            .max()
    }
}

/// `var M f / var f` over every ensemble kind and both variation modes, family all.
/// For the hill climb `count` is the step budget.
pub fn theorem_sweep(d: usize, k: u32, count: usize, seed: u64) -> Result<TheoremSweep> {
    let shape = Shape::new(d, k)?;
    let ceilings = suite_ceilings(Suite::Theorem, d)?;
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for kind in [
        EnsembleKind::RandomRational,
        EnsembleKind::RandomIndicator,
        EnsembleKind::Staircase,
        EnsembleKind::Hillclimb,
    ] {
        let e = Ensemble::new(kind, d, k, count, seed);
        for (name, mode) in modes(shape) {
            let out = theorem_ratio_experiment(&e, &CubeFamily::all(), &mode)?;
            rows.push(TheoremRow {
                kind,
                mode: name.to_string(),
                records: out.records.len(),
                max: out.max.clone(),
                ceiling: ceilings[name].clone(),
            });
            records.extend(out.records.into_iter().map(|mut r| {
                r.tag = format!("{} {name}", r.tag);
                r
            }));
        }
    }
    Ok(TheoremSweep { d, k, rows, records })
}

/// Re-checks a witness against the current ceilings.
pub fn replay(w: &Witness) -> Result<Verdict> {
    let ceilings = suite_ceilings(w.suite, w.instance.shape().d)?;
    check(w.suite, &w.instance, &ceilings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use dyvar_core::exact::int;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
            let json = serde_json::to_string(&s).unwrap();
            assert_eq!(json, format!("\"{}\"", s.name()));
        }
        assert!("no-such-suite".parse::<Suite>().is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        let shape = Shape::new(2, 2).unwrap();
        for s in Suite::ALL {
            assert_eq!(generate(s, shape, 42), generate(s, shape, 42));
        }
    }

    #[test]
    fn small_runs_pass() {
        for s in Suite::ALL {
            let out = run_suite(s, 1, 3, 20, 9).unwrap();
            assert!(out.passed(), "{s}: {:?}", out.failures.first());
            assert_eq!(out.checked + out.skipped, 20);
        }
    }

    #[test]
    fn a_broken_instance_is_reported_and_replays() {
        let shape = Shape::new(1, 2).unwrap();
        let e = CellSet::from_cells(shape, [0]).unwrap();
        let q = shape.base_cube();
        let mut tight = BTreeMap::new();
        tight.insert("isoperimetric".to_string(), int(0));
        let inst = Instance::SetInCube { e, q };
        assert!(matches!(
            check(Suite::Isoperimetric, &inst, &tight).unwrap(),
            Verdict::Fail(_)
        ));
        let w = Witness {
            suite: Suite::Isoperimetric,
            seed: 0,
            instance: inst,
            detail: String::new(),
        };
        let text = serde_json::to_string(&w).unwrap();
        let back: Witness = serde_json::from_str(&text).unwrap();
        assert_eq!(back, w);
        assert!(matches!(replay(&back).unwrap(), Verdict::Pass(_)));
    }

    #[test]
    fn mismatched_instance_is_a_usage_error() {
        let f = GridFunction::zeros(Shape::new(1, 1).unwrap());
        assert!(check(Suite::SparseMass, &Instance::Grid { f }, &BTreeMap::new()).is_err());
    }
}
