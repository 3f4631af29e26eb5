use banditlab::instance::{Instance, Noise};
use banditlab::linalg::rank;
use banditlab::pe_select::{
    design_value, fw_optimal_design, gems_fc_run, hard_instance, misspecification_levels, rho_star, round_design,
    rounding_budget, DesignProblem, FcMode,
};
use banditlab::seeded;
use proptest::prelude::*;

/// All compositions of `steps` into `k` nonnegative parts.
fn simplex_grid(k: usize, steps: usize, f: &mut impl FnMut(&[f64])) {
    fn rec(k: usize, left: usize, steps: usize, cur: &mut Vec<f64>, f: &mut impl FnMut(&[f64])) {
        if cur.len() + 1 == k {
            cur.push(left as f64 / steps as f64);
            f(cur);
            cur.pop();
            return;
        }
        for i in 0..=left {
            cur.push(i as f64 / steps as f64);
            rec(k, left - i, steps, cur, f);
            cur.pop();
        }
    }
    rec(k, steps, steps, &mut Vec::with_capacity(k), f);
}

fn problem() -> impl Strategy<Value = DesignProblem> {
    (1usize..=3)
        .prop_flat_map(|d| {
            (
                prop::collection::vec(prop::collection::vec(-1.0f64..1.0, d), d.max(2)..=6),
                prop::collection::vec(prop::collection::vec(-1.0f64..1.0, d), 1..6),
            )
        })
        .prop_filter("full rank", |(a, _)| rank(a, 1e-3) == a[0].len())
        .prop_map(|(a, y)| DesignProblem::new(a, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn frank_wolfe_near_grid_optimum(p in problem()) {
        let fw = fw_optimal_design(&p).unwrap();
        prop_assert!((fw.lambda.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let mut grid = f64::INFINITY;
        simplex_grid(p.actions.len(), 12, &mut |l| {
            grid = grid.min(design_value(&p.actions, l, &p.directions));
        });
        prop_assert!(fw.value <= 1.05 * grid + 1e-12, "fw {} grid {}", fw.value, grid);
    }

    #[test]
    fn rounding_spends_exactly_n(p in problem(), extra in 0usize..200, zeta in 0.2f64..2.0) {
        let fw = fw_optimal_design(&p).unwrap();
        let n = rounding_budget(p.dim(), zeta) + extra;
        let alloc = round_design(&p, &fw, n, zeta).unwrap();
        prop_assert_eq!(alloc.total(), n as u64);
        prop_assert_eq!(alloc.pulls().len(), n);
        if alloc.certified {
            prop_assert!(alloc.value <= (1.0 + zeta) * fw.value / n as f64 * (1.0 + 1e-9));
        }
        prop_assert!(round_design(&p, &fw, rounding_budget(p.dim(), zeta) - 1, zeta).is_err());
    }

    #[test]
    fn misspecification_levels_nonincreasing(
        acts in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 3..8),
        theta in prop::collection::vec(-0.5f64..0.5, 3),
    ) {
        prop_assume!(rank(&acts, 1e-3) == 3);
        let acts: Vec<Vec<f64>> = acts.iter().map(|x| x.iter().map(|v| v / 3f64.sqrt()).collect()).collect();
        let inst = Instance::builder(acts, theta).build().unwrap();
        let g = misspecification_levels(&inst);
        prop_assert_eq!(g.len(), 3);
        prop_assert!(g.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        prop_assert!(g[2] < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn noiseless_survivors_nested_and_keep_best(dstar in 2usize..6, eps in 0.05f64..0.5, seed in any::<u64>()) {
        let inst = hard_instance(dstar, eps, Noise::Gaussian { sigma: 0.0 }).unwrap();
        let best = inst.best_target();
        let out = gems_fc_run(&inst, 8, 1e9, 0.05, FcMode::Exact, &mut seeded(seed)).unwrap();
        let mut prev: Vec<usize> = (0..inst.num_targets()).collect();
        for r in &out.rounds {
            prop_assert!(r.survivors.iter().all(|z| prev.contains(z)));
            prop_assert!(r.survivors.contains(&best));
            prev = r.survivors.clone();
        }
        prop_assert_eq!(out.survivors, vec![best]);
    }
}

#[test]
fn rho_star_grows_past_the_true_dimension() {
    for eps in [1e-1, 1e-2] {
        let inst = hard_instance(4, eps, Noise::Gaussian { sigma: 1.0 }).unwrap();
        let small = rho_star(&inst, 4, eps).unwrap();
        let big = rho_star(&inst, 5, eps).unwrap();
        assert!(small < big, "{small} vs {big}");
        assert!(big >= 1.0 / (4.0 * eps * eps) / 1.05);
    }
}

#[test]
fn frank_wolfe_three_by_eight() {
    use rand::Rng as _;
    let mut rng = seeded(31);
    for _ in 0..6 {
        let acts: Vec<Vec<f64>> = (0..8).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let dirs: Vec<Vec<f64>> = (0..5).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let fw = fw_optimal_design(&DesignProblem::new(acts.clone(), dirs.clone())).unwrap();
        let mut grid = f64::INFINITY;
        simplex_grid(8, 12, &mut |l| grid = grid.min(design_value(&acts, l, &dirs)));
        assert!(fw.value <= 1.05 * grid, "fw {} grid {}", fw.value, grid);
    }
}
