use banditlab::instance::Noise;
use banditlab::ms_regret::{
    anytime_run, caption_like, moss_core, mosspp_core, mosspp_run, schedule, Arms, MossppOptions, Pull, Variant,
};
use banditlab::seeded;
use proptest::prelude::*;

fn arms(means: Vec<f64>) -> Arms {
    Arms::new(means, Noise::Bernoulli).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn schedule_covers_horizon(t in 2usize..10_000_000, beta in 0.5f64..0.999) {
        let s = schedule(t, beta, None).unwrap();
        prop_assert_eq!(s.sizes.len(), s.p);
        prop_assert!(s.lengths.iter().sum::<usize>() >= t);
        prop_assert!(s.lengths.iter().all(|&l| l <= t));
        prop_assert!(s.sizes.windows(2).all(|w| w[1] <= w[0]));
        let capped = schedule(t, beta, Some(3)).unwrap();
        prop_assert!(capped.sizes.iter().all(|&k| k <= 3));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mixture_means_match_flattened_law(means in prop::collection::vec(0.0f64..1.0, 2..60), seed in any::<u64>(), t in 64usize..4000) {
        let a = arms(means.clone());
        let tr = mosspp_core(&a, t, MossppOptions::new(0.5, Variant::Vanilla), &mut seeded(seed), &mut |_| true).unwrap();
        for j in 0..tr.bank.len() {
            let law = tr.bank.flatten(j);
            prop_assert!((law.iter().map(|x| x.1).sum::<f64>() - 1.0).abs() < 1e-9);
            let direct: f64 = law.iter().map(|&(k, w)| w * means[k]).sum();
            prop_assert!((tr.bank.mean(j, &|k| means[k]) - direct).abs() < 1e-9);
        }
        let played: usize = tr.iterations.iter().map(|it| it.rounds).sum();
        prop_assert_eq!(played, t);
    }

    #[test]
    fn sink_sees_every_round(means in prop::collection::vec(0.0f64..1.0, 1..30), seed in any::<u64>(), t in 1usize..3000) {
        let recs = mosspp_run(&arms(means.clone()), t, 0.6, Variant::Empirical, &mut seeded(seed)).unwrap();
        prop_assert_eq!(recs.len(), t);
        prop_assert!(recs.iter().all(|r| r.action < means.len()));
    }

    #[test]
    fn forced_equal_selection_coincides(means in prop::collection::vec(0.0f64..1.0, 1..=4), seed in any::<u64>(), t in 2usize..3000) {
        // With at most four arms every iteration keeps all real arms, so the
        // empirical selection rule has nothing to choose.
        let a = arms(means);
        let run = |opts: MossppOptions| {
            let mut out = Vec::new();
            mosspp_core(&a, t, opts, &mut seeded(seed), &mut |p: Pull| {
                out.push((p.arm, p.reward));
                true
            })
            .unwrap();
            out
        };
        let vanilla = run(MossppOptions::new(0.5, Variant::Vanilla));
        let forced = run(MossppOptions { beta: 0.5, empirical_selection: true, reuse_stats: false });
        prop_assert_eq!(vanilla, forced);
    }
}

#[test]
fn anytime_segments_and_overhead() {
    let total = 20_000;
    let mut fixed = 0.0;
    let mut any = 0.0;
    for s in 0..10 {
        let a = caption_like(500, 10, &mut seeded(s)).unwrap();
        let best = a.best();
        let opts = MossppOptions::new(0.5, Variant::Vanilla);
        mosspp_core(&a, total, opts, &mut seeded(100 + s), &mut |p: Pull| {
            fixed += best - a.means[p.arm];
            true
        })
        .unwrap();
        let mut n = 0;
        let segs = anytime_run(
            total,
            &mut seeded(100 + s),
            |h, rng, sink| mosspp_core(&a, h, opts, rng, sink).map(|_| ()),
            &mut |p: Pull| {
                any += best - a.means[p.arm];
                n += 1;
                true
            },
        )
        .unwrap();
        assert_eq!(n, total);
        assert_eq!(segs.iter().sum::<usize>(), total);
        for (i, &l) in segs.iter().enumerate().take(segs.len() - 1) {
            assert_eq!(l, 1 << i);
        }
    }
    assert!(any <= 3.0 * fixed, "anytime {any} vs fixed {fixed}");
}

#[test]
fn moss_prefers_the_best_arm() {
    let a = arms(vec![0.2, 0.8, 0.5]);
    let counts = moss_core(&a, 5000, &mut seeded(1), &mut |_| true).unwrap();
    assert!(counts[1] > 4000, "{counts:?}");
}
