use dyvar_core::decomp::{
    levelset_decomposition_sweep, low_density_budget, low_density_budget_via_m, maximal_cubes,
    r_median,
};
use dyvar_core::domain::{saturate, saturation_witness};
use dyvar_core::exact::{int, ratio};
use dyvar_core::variation::{mt_boundary, union_boundary_decomposition_check};
use dyvar_core::*;
use num_traits::Signed;
use proptest::prelude::*;

fn shape_strategy() -> impl Strategy<Value = Shape> {
    prop_oneof![
        (0u32..=4).prop_map(|k| Shape::new(1, k).unwrap()),
        (0u32..=3).prop_map(|k| Shape::new(2, k).unwrap()),
        (0u32..=2).prop_map(|k| Shape::new(3, k).unwrap()),
    ]
}

fn value() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| ratio(n, d))
}

fn grid_on(shape: Shape) -> impl Strategy<Value = GridFunction> {
    prop::collection::vec(value(), shape.cells())
        .prop_map(move |v| GridFunction::new(shape, v).unwrap())
}

fn grid() -> impl Strategy<Value = GridFunction> {
    shape_strategy().prop_flat_map(grid_on)
}

fn grid_pair() -> impl Strategy<Value = (GridFunction, GridFunction)> {
    shape_strategy().prop_flat_map(|s| (grid_on(s), grid_on(s)))
}

fn cell_set_pair() -> impl Strategy<Value = (CellSet, CellSet)> {
    shape_strategy().prop_flat_map(|s| {
        let bits = prop::collection::vec(any::<bool>(), s.cells());
        (bits.clone(), bits).prop_map(move |(a, b)| {
            (
                CellSet::from_fn(s, |c| a[c]),
                CellSet::from_fn(s, |c| b[c]),
            )
        })
    })
}

/// A grid function together with a random saturated explicit family on its shape.
fn grid_with_family() -> impl Strategy<Value = (GridFunction, Vec<CubeId>)> {
    shape_strategy().prop_flat_map(|s| {
        let picks = prop::collection::vec(any::<prop::sample::Index>(), 0..6);
        (grid_on(s), picks).prop_map(move |(f, picks)| {
            let all: Vec<CubeId> = s.all_cubes().collect();
            let chosen: Vec<CubeId> = picks.iter().map(|i| i.get(&all).clone()).collect();
            (f, saturate(s, &chosen))
        })
    })
}

fn modes(shape: Shape) -> [VariationMode; 2] {
    [VariationMode::interior(shape), VariationMode::ZeroExtension]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn coarea_equals_variation(f in grid()) {
        for mode in modes(f.shape()) {
            prop_assert_eq!(coarea(&f, &mode).unwrap(), variation(&f, &mode).unwrap());
        }
    }

    #[test]
    fn perimeter_is_variation_of_indicator((a, _) in cell_set_pair()) {
        for mode in modes(a.shape()) {
            prop_assert_eq!(
                perimeter(&a, &mode).unwrap(),
                variation(&GridFunction::indicator(&a), &mode).unwrap()
            );
        }
    }

    #[test]
    fn variation_scaling_and_translation(f in grid(), c in value()) {
        let interior = VariationMode::interior(f.shape());
        prop_assert_eq!(
            variation(&f.add_constant(&c), &interior).unwrap(),
            variation(&f, &interior).unwrap()
        );
        for mode in modes(f.shape()) {
            prop_assert_eq!(
                variation(&f.scale(&c), &mode).unwrap(),
                c.abs() * variation(&f, &mode).unwrap()
            );
            prop_assert!(variation(&f.abs(), &mode).unwrap() <= variation(&f, &mode).unwrap());
        }
    }

    #[test]
    fn variation_triangle((f, g) in grid_pair()) {
        for mode in modes(f.shape()) {
            let lhs = variation(&f.add(&g).unwrap(), &mode).unwrap();
            prop_assert!(lhs <= variation(&f, &mode).unwrap() + variation(&g, &mode).unwrap());
        }
    }

    #[test]
    fn boundary_matches_neighbour_count((a, _) in cell_set_pair()) {
        let shape = a.shape();
        let mut pairs = 0usize;
        for c in a.iter() {
            let x = shape.coords(c);
            for (axis, &xa) in x.iter().enumerate() {
                if xa + 1 < shape.side() && a.contains(c + shape.stride(axis)) {
                    pairs += 1;
                }
            }
        }
        prop_assert_eq!(mt_boundary(&a).len(), 2 * shape.d * a.len() - 2 * pairs);
    }

    #[test]
    fn union_boundary_inclusion((a, b) in cell_set_pair()) {
        let chk = union_boundary_decomposition_check(&a, &b).unwrap();
        prop_assert!(chk.holds, "witness {:?}", chk.witness);
        let u = a.union(&b).unwrap();
        prop_assert!(mt_boundary(&u).len() <= mt_boundary(&a).len() + mt_boundary(&b).len());
    }

    #[test]
    fn oracle_equivalence_all(f in grid(), pointwise in any::<bool>()) {
        let fam = CubeFamily::all().with_pointwise(pointwise);
        prop_assert_eq!(
            maximal_transform(&f, &fam).unwrap(),
            brute_force_maximal(&f, &fam).unwrap()
        );
    }

    #[test]
    fn oracle_equivalence_explicit((f, cubes) in grid_with_family(), pointwise in any::<bool>()) {
        prop_assert!(saturation_witness(f.shape(), &cubes).is_none());
        let fam = CubeFamily::explicit(cubes).with_pointwise(pointwise);
        prop_assert_eq!(maximal_transform(&f, &fam), brute_force_maximal(&f, &fam));
    }

    #[test]
    fn maximal_pointwise_laws((f, g) in grid_pair(), c in (0i64..=5, 1i64..=3)) {
        let fam = CubeFamily::all();
        let c = ratio(c.0, c.1);
        let mf = maximal_transform(&f, &fam).unwrap();
        let mg = maximal_transform(&g, &fam).unwrap();
        prop_assert!(f.le(&mf));
        let msum = maximal_transform(&f.add(&g).unwrap(), &fam).unwrap();
        prop_assert!(msum.le(&mf.add(&mg).unwrap()));
        prop_assert_eq!(maximal_transform(&f.scale(&c), &fam).unwrap(), mf.scale(&c));
        prop_assert_eq!(maximal_transform(&f.add_constant(&c), &fam).unwrap(), mf.add_constant(&c));
        prop_assert!(mf.le(&maximal_transform(&mf, &fam).unwrap()));
        let upper = f.zip_with(&g, |a, b| a.max(b).clone()).unwrap();
        prop_assert!(mf.le(&maximal_transform(&upper, &fam).unwrap()));
    }

    #[test]
    fn superlevel_sets_are_antitone(f in grid(), a in value(), b in value()) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(superlevel_set(&f, &hi).is_subset(&superlevel_set(&f, &lo)));
    }

    #[test]
    fn truncation_is_idempotent_and_bounded(f in grid(), n in (0i64..=6, 1i64..=3)) {
        let n = ratio(n.0, n.1);
        let t = truncate(&f, &n).unwrap();
        prop_assert_eq!(truncate(&t, &n).unwrap(), t.clone());
        prop_assert!(t.values().iter().all(|v| v.abs() <= n));
    }

    #[test]
    fn decomposition_identity((f, cubes) in grid_with_family()) {
        for fam in [CubeFamily::all(), CubeFamily::explicit(cubes.clone())] {
            let (chk, lambda) = levelset_decomposition_sweep(&f, &fam).unwrap();
            prop_assert!(chk.holds, "fails at {:?} cell {:?}", lambda, chk.witness);
        }
    }

    #[test]
    fn level_families_nest(f in grid(), a in value(), b in value()) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let tree = AverageTree::build(&f);
        let low = maximal_cubes(&tree, &CubeFamily::all(), &lo).unwrap();
        let high = maximal_cubes(&tree, &CubeFamily::all(), &hi).unwrap();
        for q in &high.cubes {
            prop_assert!(low.cubes.iter().any(|p| p.contains(q)));
        }
        let cells = low.cells(f.shape());
        let total: u64 = low.cubes.iter().map(CubeId::volume).sum();
        prop_assert_eq!(cells.len() as u64, total);
    }

    #[test]
    fn budget_sweep_matches_m_form((f, cubes) in grid_with_family()) {
        for fam in [CubeFamily::all(), CubeFamily::explicit(cubes.clone())] {
            let report = low_density_budget(&f, &fam, None).unwrap();
            prop_assert_eq!(
                report.low_density_budget,
                low_density_budget_via_m(&f, &fam, None).unwrap()
            );
        }
    }

    #[test]
    fn r_median_is_antitone(f in grid(), r1 in 1i64..=8, r2 in 1i64..=8) {
        let q = f.shape().base_cube();
        let (lo, hi) = (r1.min(r2), r1.max(r2));
        let m_lo = r_median(&f, &q, &ratio(lo, 8)).unwrap();
        let m_hi = r_median(&f, &q, &ratio(hi, 8)).unwrap();
        prop_assert!(m_hi <= m_lo);
        prop_assert!(f.min_value() <= &m_hi && &m_lo <= f.max_value());
    }
}

#[test]
fn negative_truncation_level_is_rejected() {
    let f = GridFunction::zeros(Shape::new(1, 1).unwrap());
    assert!(matches!(
        truncate(&f, &int(-1)),
        Err(Error::NegativeTruncation(_))
    ));
}
