//! Golden reproduction, ratio experiments, the subadditivity gap search and the
//! `L^1` bound of the maximal function on a cube.

use dyvar_core::exact::{self, int, pow2};
use dyvar_core::maxop::FamilyMask;
use dyvar_core::maxop::maximal_transform_with;
use dyvar_core::{
    variation, AverageTree, CellSet, CubeFamily, CubeId, Error as CoreError, GridFunction,
    Rational, Shape, VariationMode,
};
use num_traits::{Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::digest::{grid_digest, text_digest};
use crate::ensemble::{random_value, rng_for, Ensemble, EnsembleKind, Params};
use crate::Result;

/// The six values of the superadditivity example on `[0, 8)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuperadditivityReport {
    #[serde(with = "exact::as_string")]
    pub var_mg: Rational,
    #[serde(with = "exact::as_string")]
    pub var_mh: Rational,
    #[serde(with = "exact::as_string")]
    pub var_m_sum: Rational,
    #[serde(with = "exact::as_string")]
    pub var_g: Rational,
    #[serde(with = "exact::as_string")]
    pub var_h: Rational,
    #[serde(with = "exact::as_string")]
    pub var_mg_plus_var_mh: Rational,
    /// `var M(g+h) > var M g + var M h`.
    pub strictly_superadditive: bool,
}

/// `g = 1_[0,3) + 1_[5,8)` and `h = 1_[2,3) + 1_[5,6)` on `d = 1, K = 3`.
pub fn superadditive_pair() -> (GridFunction, GridFunction) {
    let shape = Shape::new(1, 3).expect("valid shape");
    let g = GridFunction::from_integers(shape, &[1, 1, 1, 0, 0, 1, 1, 1]).expect("8 cells");
    let h = GridFunction::from_integers(shape, &[0, 0, 1, 0, 0, 1, 0, 0]).expect("8 cells");
    (g, h)
}

/// Variation of `M f` with zero extension, `M` over all dyadic subcubes with the
/// pointwise term.
fn var_m_zero_ext(f: &GridFunction) -> Rational {
    let mf = dyvar_core::maximal_transform(f, &CubeFamily::all()).expect("family all is total");
    variation(&mf, &VariationMode::ZeroExtension).expect("zero extension has no domain")
}

pub fn reproduce_superadditive_example() -> SuperadditivityReport {
    let (g, h) = superadditive_pair();
    let sum = g.add(&h).expect("same shape");
    let var_mg = var_m_zero_ext(&g);
    let var_mh = var_m_zero_ext(&h);
    let var_m_sum = var_m_zero_ext(&sum);
    let zero = VariationMode::ZeroExtension;
    let total = &var_mg + &var_mh;
    SuperadditivityReport {
        var_g: variation(&g, &zero).expect("zero extension"),
        var_h: variation(&h, &zero).expect("zero extension"),
        strictly_superadditive: var_m_sum > total,
        var_mg,
        var_mh,
        var_m_sum,
        var_mg_plus_var_mh: total,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatioRecord {
    pub digest: String,
    pub seed: Option<u64>,
    #[serde(with = "exact::as_string")]
    pub var_mf: Rational,
    #[serde(with = "exact::as_string")]
    pub var_f: Rational,
    /// `var_mf / var_f`; `var_f > 0`.
    #[serde(with = "exact::as_string")]
    pub ratio: Rational,
    pub tag: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skipped {
    pub digest: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatioExperiment {
    pub records: Vec<RatioRecord>,
    pub skipped: Vec<Skipped>,
    #[serde(with = "exact::as_string_opt")]
    pub max: Option<Rational>,
}

impl RatioExperiment {
    fn push(&mut self, record: RatioRecord) {
        if self.max.as_ref().is_none_or(|m| record.ratio > *m) {
            self.max = Some(record.ratio.clone());
        }
        self.records.push(record);
    }

    /// The record attaining the maximum.
    pub fn argmax(&self) -> Option<&RatioRecord> {
        self.records.iter().max_by(|a, b| a.ratio.cmp(&b.ratio))
    }
}

/// `(var M f, var f)` under a resolved family.
pub fn variation_pair(
    f: &GridFunction,
    mask: &FamilyMask,
    mode: &VariationMode,
) -> Result<(Rational, Rational)> {
    let tree = AverageTree::build(f);
    let mf = maximal_transform_with(f, &tree, mask)?;
    Ok((variation(&mf, mode)?, variation(f, mode)?))
}

fn ratio_record(
    f: &GridFunction,
    seed: Option<u64>,
    mask: &FamilyMask,
    mode: &VariationMode,
    tag: &str,
) -> Result<std::result::Result<RatioRecord, Skipped>> {
    let (var_mf, var_f) = variation_pair(f, mask, mode)?;
    let digest = grid_digest(f);
    if var_f.is_zero() {
        return Ok(Err(Skipped {
            digest,
            reason: "var-zero".into(),
        }));
    }
    Ok(Ok(RatioRecord {
        digest,
        seed,
        ratio: &var_mf / &var_f,
        var_mf,
        var_f,
        tag: tag.to_string(),
    }))
}

/// Exact `var M f / var f` over an ensemble. Instances with `var f = 0` are skipped.
/// For [`EnsembleKind::Hillclimb`] the ensemble's `count` is a step budget and a record
/// is emitted each time the best ratio of the run increases.
pub fn theorem_ratio_experiment(
    e: &Ensemble,
    family: &CubeFamily,
    mode: &VariationMode,
) -> Result<RatioExperiment> {
    let mask = family.resolve(e.shape()?)?;
    if e.kind == EnsembleKind::Hillclimb {
        return climb_ratio(e, &mask, mode);
    }
    let tag = format!("{:?}", e.kind);
    let mut out = RatioExperiment {
        records: Vec::new(),
        skipped: Vec::new(),
        max: None,
    };
    for (seed, f) in e.instances()? {
        match ratio_record(&f, Some(seed), &mask, mode, &tag)? {
            Ok(r) => out.push(r),
            Err(s) => out.skipped.push(s),
        }
    }
    Ok(out)
}

/// One-cell mutations accepted on strict increase; restarts after `4N` rejections.
fn climb_ratio(e: &Ensemble, mask: &FamilyMask, mode: &VariationMode) -> Result<RatioExperiment> {
    let shape = e.shape()?;
    let mut rng = rng_for(e.seed);
    let patience = 4 * shape.cells().max(4);
    let fresh = |rng: &mut rand_chacha::ChaCha8Rng| {
        crate::ensemble::random_rational(shape, &e.params, rng)
    };
    let eval = |f: &GridFunction| -> Result<Option<Rational>> {
        let (a, b) = variation_pair(f, mask, mode)?;
        Ok((!b.is_zero()).then(|| a / b))
    };
    let mut out = RatioExperiment {
        records: Vec::new(),
        skipped: Vec::new(),
        max: None,
    };
    let mut current = fresh(&mut rng);
    let mut current_ratio = eval(&current)?;
    let mut stale = 0usize;
    for step in 0..e.count {
        let cell = rng.gen_range(0..shape.cells());
        let mut values = current.values().to_vec();
        values[cell] = random_value(&e.params, &mut rng);
        let candidate = GridFunction::new(shape, values)?;
        let r = eval(&candidate)?;
        let improves = match (&r, &current_ratio) {
            (Some(r), Some(c)) => r > c,
            (Some(_), None) => true,
            _ => false,
        };
        if improves {
            current = candidate;
            current_ratio = r;
            stale = 0;
            let ratio = current_ratio.clone().expect("improving ratio exists");
            if out.max.as_ref().is_none_or(|m| ratio > *m) {
                if let Ok(rec) = ratio_record(&current, None, mask, mode, &format!("step {step}"))? {
                    out.push(rec);
                }
            }
        } else {
            stale += 1;
            if stale >= patience {
                current = fresh(&mut rng);
                current_ratio = eval(&current)?;
                stale = 0;
            }
        }
    }
    Ok(out)
}

/// One evaluated pair of the gap search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapRecord {
    pub digest: String,
    /// `(var M(g+h) − var M g) / var h`.
    #[serde(with = "exact::as_string")]
    pub gap: Rational,
    /// `h` is an indicator supported where `g` attains its maximum.
    pub constrained: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapWitness {
    pub g: GridFunction,
    pub h: GridFunction,
    #[serde(with = "exact::as_string")]
    pub gap: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapReport {
    pub records: Vec<GapRecord>,
    /// Pairs dropped because `var h = 0`.
    pub skipped: usize,
    #[serde(with = "exact::as_string_opt")]
    pub sup: Option<Rational>,
    pub witness: Option<GapWitness>,
    /// The superadditive example pair, evaluated the same way.
    pub reference: GapRecord,
}

impl GapReport {
    fn new() -> Result<Self> {
        let (g, h) = superadditive_pair();
        let reference = gap_record(&g, &h)?.expect("reference pair has var h > 0");
        Ok(GapReport {
            records: Vec::new(),
            skipped: 0,
            sup: None,
            witness: None,
            reference,
        })
    }

    fn offer(&mut self, g: &GridFunction, h: &GridFunction) -> Result<Option<Rational>> {
        let Some(rec) = gap_record(g, h)? else {
            self.skipped += 1;
            return Ok(None);
        };
        let gap = rec.gap.clone();
        if self.sup.as_ref().is_none_or(|s| gap > *s) {
            self.sup = Some(gap.clone());
            self.witness = Some(GapWitness {
                g: g.clone(),
                h: h.clone(),
                gap: gap.clone(),
            });
        }
        self.records.push(rec);
        Ok(Some(gap))
    }
}

/// `(var M(g+h) − var M g) / var h` with zero extension; `None` when `var h = 0`.
pub fn gap_ratio(g: &GridFunction, h: &GridFunction) -> Result<Option<Rational>> {
    let zero = VariationMode::ZeroExtension;
    let var_h = variation(h, &zero)?;
    if var_h.is_zero() {
        return Ok(None);
    }
    let all = CubeFamily::all();
    let m_sum = dyvar_core::maximal_transform(&g.add(h)?, &all)?;
    let mg = dyvar_core::maximal_transform(g, &all)?;
    Ok(Some((variation(&m_sum, &zero)? - variation(&mg, &zero)?) / var_h))
}

fn gap_record(g: &GridFunction, h: &GridFunction) -> Result<Option<GapRecord>> {
    Ok(gap_ratio(g, h)?.map(|gap| GapRecord {
        digest: text_digest(&format!(
            "{}{}",
            dyvar_core::io::format_grid_text(g),
            dyvar_core::io::format_grid_text(h)
        )),
        gap,
        constrained: is_constrained(g, h),
    }))
}

/// `h` takes only the values 0 and 1, and `h = 1` only where `g = max g`.
pub fn is_constrained(g: &GridFunction, h: &GridFunction) -> bool {
    if g.shape() != h.shape() {
        return false;
    }
    let top = g.max_value();
    let one = int(1);
    h.values()
        .iter()
        .zip(g.values())
        .all(|(hv, gv)| hv.is_zero() || (*hv == one && gv == top))
}

/// A nonnegative `g` with integer values and a tied maximum, and `h` the indicator of a
/// nonempty subset of its argmax.
pub fn random_constrained_pair(
    shape: Shape,
    params: &Params,
    rng: &mut impl Rng,
) -> (GridFunction, GridFunction) {
    let top = params.max_numerator.max(1);
    let p = f64::from(params.density_percent.min(100)) / 100.0;
    let mut values: Vec<i64> = (0..shape.cells())
        .map(|_| {
            if rng.gen_bool(p) {
                top
            } else {
                rng.gen_range(0..top)
            }
        })
        .collect();
    let forced = rng.gen_range(0..shape.cells());
    values[forced] = top;
    let g = GridFunction::from_integers(shape, &values).expect("length matches");
    let argmax: Vec<usize> = (0..shape.cells()).filter(|&c| values[c] == top).collect();
    let mut members = CellSet::from_fn(shape, |c| values[c] == top && rng.gen_bool(0.5));
    if members.is_empty() {
        members.insert(argmax[rng.gen_range(0..argmax.len())]);
    }
    (g, GridFunction::indicator(&members))
}

/// Evaluates `count` random constrained pairs; never asserts a bound.
pub fn subadditivity_gap_search(e: &Ensemble) -> Result<GapReport> {
    let shape = e.shape()?;
    let mut report = GapReport::new()?;
    for seed in e.instance_seeds() {
        let mut rng = rng_for(seed);
        let (g, h) = random_constrained_pair(shape, &e.params, &mut rng);
        report.offer(&g, &h)?;
    }
    Ok(report)
}

/// Hill climb over constrained pairs: each step changes one value of `g` (then trims `h`
/// to the new argmax) or toggles one argmax cell of `h`. Accepts strict increases and
/// restarts after `4N` rejections.
pub fn search_gap(shape: Shape, steps: usize, seed: u64) -> Result<GapReport> {
    let params = Params {
        max_numerator: 4,
        max_denominator: 1,
        nonnegative: true,
        density_percent: 40,
    };
    let mut rng = rng_for(seed);
    let mut report = GapReport::new()?;
    let patience = 4 * shape.cells().max(4);
    let (mut g, mut h) = random_constrained_pair(shape, &params, &mut rng);
    let mut current = report.offer(&g, &h)?;
    let mut stale = 0usize;
    for _ in 0..steps {
        let (cg, ch) = mutate_pair(&g, &h, &params, &mut rng);
        let Some((cg, ch)) = cg.zip(ch) else {
            stale += 1;
            continue;
        };
        let r = gap_ratio(&cg, &ch)?;
        let improves = match (&r, &current) {
            (Some(r), Some(c)) => r > c,
            (Some(_), None) => true,
            _ => false,
        };
        if improves {
            report.offer(&cg, &ch)?;
            g = cg;
            h = ch;
            current = r;
            stale = 0;
        } else {
            stale += 1;
        }
        if stale >= patience {
            (g, h) = random_constrained_pair(shape, &params, &mut rng);
            current = report.offer(&g, &h)?;
            stale = 0;
        }
    }
    Ok(report)
}

fn mutate_pair(
    g: &GridFunction,
    h: &GridFunction,
    params: &Params,
    rng: &mut impl Rng,
) -> (Option<GridFunction>, Option<GridFunction>) {
    let shape = g.shape();
    let cell = rng.gen_range(0..shape.cells());
    let one = int(1);
    if rng.gen_bool(0.5) {
        let mut gv = g.values().to_vec();
        gv[cell] = int(rng.gen_range(0..=params.max_numerator.max(1)));
        let g2 = GridFunction::new(shape, gv).expect("same length");
        let top = g2.max_value().clone();
        let hv: Vec<Rational> = h
            .values()
            .iter()
            .zip(g2.values())
            .map(|(hv, gv)| if *hv == one && *gv == top { one.clone() } else { Rational::zero() })
            .collect();
        if hv.iter().all(Zero::is_zero) {
            return (None, None);
        }
        let h2 = GridFunction::new(shape, hv).expect("same length");
        (Some(g2), Some(h2))
    } else {
        if g.values()[cell] != *g.max_value() {
            return (None, None);
        }
        let mut hv = h.values().to_vec();
        hv[cell] = if hv[cell].is_zero() { one } else { Rational::zero() };
        if hv.iter().all(Zero::is_zero) {
            return (None, None);
        }
        (Some(g.clone()), Some(GridFunction::new(shape, hv).expect("same length")))
    }
}

/// `∫_Q M_Q f` against `∫_Q f` and `ℓ(Q) var_{int Q} f`, with `M_Q` over the dyadic
/// subcubes of `Q` and `ℓ(Q) = |Q|^{1/d}` the side length.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct L1Report {
    #[serde(with = "exact::as_string")]
    pub integral_mf: Rational,
    #[serde(with = "exact::as_string")]
    pub integral_f: Rational,
    #[serde(with = "exact::as_string")]
    pub variation: Rational,
    #[serde(with = "exact::as_string")]
    pub side: Rational,
    /// `(∫M f − ∫f) / (ℓ(Q) var)`; `None` when `var = 0`.
    #[serde(with = "exact::as_string_opt")]
    pub constant: Option<Rational>,
    /// `var = 0` and `∫M f = ∫f`.
    pub exact_equality: bool,
}

pub fn l1_bound_check(f: &GridFunction, q: &CubeId) -> Result<L1Report> {
    let sub = f.restrict(q)?;
    if sub.values().iter().any(Signed::is_negative) {
        return Err(CoreError::NegativeValues.into());
    }
    let mf = dyvar_core::maximal_transform(&sub, &CubeFamily::all())?;
    let integral_mf = mf.integral();
    let integral_f = sub.integral();
    let var = variation(&sub, &VariationMode::interior(sub.shape()))?;
    let side = pow2(i64::from(q.level));
    let constant = (!var.is_zero()).then(|| (&integral_mf - &integral_f) / (&side * &var));
    Ok(L1Report {
        exact_equality: var.is_zero() && integral_mf == integral_f,
        integral_mf,
        integral_f,
        variation: var,
        side,
        constant,
    })
}

/// Largest `L^1` constant over a nonnegative ensemble, on the base cube.
pub fn l1_constant_survey(e: &Ensemble) -> Result<Option<Rational>> {
    let mut best: Option<Rational> = None;
    for (_, f) in e.instances()? {
        let base = f.shape().base_cube();
        if let Some(c) = l1_bound_check(&f, &base)?.constant {
            if best.as_ref().is_none_or(|b| c > *b) {
                best = Some(c);
            }
        }
    }
    Ok(best)
}
