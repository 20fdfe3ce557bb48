use cachecast::caching::Placement;
use cachecast::mathx::MaximizeOptions;
use cachecast::mixed::{
    mixed_rates_mc, optimal_split_closed_form, optimal_split_simplified, split_search_options, MixedEnsemble,
    PowerSplit, SplitBoundary,
};
use cachecast::multicast::avg_rate_quasistatic;
use cachecast::multiplex::symmetric_rate_mc;
use cachecast::{MonteCarlo, RngStream, SystemConfig};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn endpoint_splits_reduce_to_pure_schemes(
        k in 1usize..6, extra in 0usize..4, p in 0.5f64..500.0, s2 in 0.0f64..=1.0, seed in any::<u64>(), shards in 1usize..9
    ) {
        let cfg = SystemConfig::new(k, k + extra, p).with_csit_error(s2);
        let rng = RngStream::new(seed, 0);
        let mc = MonteCarlo::new(97).with_shards(shards);
        let common = mixed_rates_mc(&cfg, &PowerSplit::new(&cfg, p).unwrap(), &rng, &mc).unwrap();
        prop_assert_eq!(common.common, avg_rate_quasistatic(&cfg, &rng, &mc).unwrap());
        prop_assert_eq!(common.private.mean, 0.0);
        let private = mixed_rates_mc(&cfg, &PowerSplit::new(&cfg, 0.0).unwrap(), &rng, &mc).unwrap();
        prop_assert_eq!(private.private, symmetric_rate_mc(&cfg, &rng, &mc).unwrap());
        prop_assert_eq!(private.common.mean, 0.0);
    }

    #[test]
    fn total_adds_up(k in 1usize..6, p in 0.5f64..500.0, frac in 0.0f64..=1.0, m in 0.0f64..0.99, seed in any::<u64>()) {
        let cfg = SystemConfig::new(k, k + 1, p).with_csit_error(0.1).with_cache(m, Placement::Centralized);
        let r = mixed_rates_mc(&cfg, &PowerSplit::from_fraction(&cfg, frac).unwrap(), &RngStream::new(seed, 0), &MonteCarlo::new(50)).unwrap();
        let t = cachecast::caching::transmissions(Placement::Centralized, m, k);
        let kf = k as f64;
        let again = kf / t * r.common.mean + kf / (1.0 - m) * r.private.mean;
        prop_assert!((r.total.mean - again).abs() <= 1e-12 * again.max(1.0));
    }
}

fn fig_config(k: usize, per_user_db: f64) -> SystemConfig {
    let pk = cachecast::db_to_linear(per_user_db);
    SystemConfig::new(k, k, pk * k as f64).with_csit_error(1.0 / pk)
}

#[test]
fn private_share_falls_with_memory_and_mixing_dominates() {
    let cfg = fig_config(16, 20.0);
    let ens = MixedEnsemble::simulate(&cfg, &RngStream::new(42, 0), &MonteCarlo::new(300)).unwrap();
    let ms: Vec<f64> = (1..=50).map(|i| i as f64 * 0.01).collect();
    let opts = split_search_options();
    let opt = ens.optimal_splits(&ms, &opts).unwrap();
    for w in opt.windows(2) {
        assert!(1.0 - w[1].common_fraction() <= 1.0 - w[0].common_fraction());
    }
    for (o, &m) in opt.iter().zip(&ms) {
        let mc = ens.rates(cfg.total_power, m).unwrap().total;
        let uc = ens.rates(0.0, m).unwrap().total;
        let se = o.rates.total.std_err;
        assert!(o.rates.total.mean >= mc.mean.max(uc.mean) - 3.0 * se, "m={m}");
    }
}

#[test]
fn private_share_falls_with_power() {
    let base = SystemConfig::new(8, 10, 1.0)
        .with_csit_error(0.05)
        .with_cache(0.05, Placement::Centralized);
    let opts = split_search_options();
    let mut last = f64::INFINITY;
    for p in [10.0, 30.0, 100.0, 300.0, 1e3, 3e3, 1e4] {
        let cfg = base.with_power(p);
        let ens = MixedEnsemble::simulate(&cfg, &RngStream::new(42, 0), &MonteCarlo::new(400)).unwrap();
        let o = ens.optimal_split(0.05, &opts).unwrap();
        let private = 1.0 - o.common_fraction();
        assert!(private <= last + 1e-9, "P={p}: {private} after {last}");
        last = private;
    }
}

#[test]
fn closed_form_matches_numeric_on_simplified_objective() {
    let opts = MaximizeOptions {
        grid_points: 401,
        ..MaximizeOptions::default()
    };
    let mut interior = 0;
    for p in [200.0, 500.0, 1e3, 3e3, 1e4] {
        for m in [0.0, 0.01, 0.02, 0.05, 0.1] {
            let cfg = SystemConfig::new(100, 100, p)
                .with_csit_error(100.0 / p)
                .with_cache(m, Placement::Centralized);
            let cf = optimal_split_closed_form(&cfg).unwrap();
            let num = optimal_split_simplified(&cfg, &opts).unwrap();
            if cf.boundary == SplitBoundary::Interior {
                interior += 1;
                assert!(
                    (cf.p0 - num.p0).abs() <= 0.02 * p,
                    "P={p} m={m}: {} vs {}",
                    cf.p0,
                    num.p0
                );
            }
        }
    }
    assert!(interior > 0);
}
