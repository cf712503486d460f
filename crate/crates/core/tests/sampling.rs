use macroforge::markets::{clear_sector, match_workers, ration};
use macroforge::sampling::{ArgmaxTree, DynamicWeightedSampler};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn weight() -> impl Strategy<Value = f64> {
    prop_oneof![
        1 => Just(0.0),
        4 => (-30i32..30, 1.0f64..2.0).prop_map(|(e, m)| m * 2f64.powi(e)),
    ]
}

fn naive_argmax(w: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &x) in w.iter().enumerate() {
        if x > 0.0 && best.is_none_or(|b| x > w[b]) {
            best = Some(i);
        }
    }
    best
}

proptest! {
    #[test]
    fn levels_and_total_follow_updates(
        init in prop::collection::vec(weight(), 1..40),
        updates in prop::collection::vec((any::<prop::sample::Index>(), weight()), 0..200),
    ) {
        let mut s = DynamicWeightedSampler::new(&init).unwrap();
        let mut w = init.clone();
        for (idx, x) in updates {
            let i = idx.index(w.len());
            s.update(i, x).unwrap();
            w[i] = x;
        }
        let exact: f64 = w.iter().sum();
        prop_assert!((s.total() - exact).abs() <= 1e-12 * exact.max(f64::MIN_POSITIVE));
        let mut levels = std::collections::BTreeSet::new();
        for (i, &x) in w.iter().enumerate() {
            match s.level_of(i) {
                None => prop_assert_eq!(x, 0.0),
                Some(e) => {
                    prop_assert!(x >= 2f64.powi(e) && x < 2f64.powi(e + 1), "{} at level {}", x, e);
                    levels.insert(e);
                }
            }
        }
        prop_assert_eq!(s.level_exponents(), levels.into_iter().collect::<Vec<_>>());
    }

    #[test]
    fn samples_never_hit_zero_weights(
        init in prop::collection::vec(weight(), 1..30),
        seed in any::<u64>(),
    ) {
        let s = DynamicWeightedSampler::new(&init).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if s.total() == 0.0 {
            prop_assert!(s.sample(&mut rng).is_err());
        } else {
            for _ in 0..200 {
                let i = s.sample(&mut rng).unwrap();
                prop_assert!(init[i] > 0.0);
            }
        }
    }

    #[test]
    fn argmax_tree_agrees_with_a_scan(
        init in prop::collection::vec(weight(), 1..50),
        updates in prop::collection::vec((any::<prop::sample::Index>(), weight()), 0..100),
    ) {
        let mut t = ArgmaxTree::new(&init).unwrap();
        let mut w = init.clone();
        prop_assert_eq!(t.argmax(), naive_argmax(&w));
        for (idx, x) in updates {
            let i = idx.index(w.len());
            t.update(i, x).unwrap();
            w[i] = x;
            prop_assert_eq!(t.argmax(), naive_argmax(&w));
        }
    }

    #[test]
    fn rationing_is_proportional_and_capped(
        gaps in prop::collection::vec(0.0f64..1e3, 0..20),
        capacity in 0.0f64..5e3,
    ) {
        let granted = ration(&gaps, capacity);
        let total: f64 = granted.iter().sum();
        let demand: f64 = gaps.iter().sum();
        prop_assert!(total <= capacity.max(demand.min(capacity)) * (1.0 + 1e-12) + 1e-9);
        for (g, x) in gaps.iter().zip(&granted) {
            prop_assert!(*x <= *g * (1.0 + 1e-12) && *x >= 0.0);
        }
        if demand > capacity && demand > 0.0 {
            prop_assert!((total - capacity).abs() <= 1e-9 * capacity.max(1.0));
        }
    }

    #[test]
    fn matching_respects_vacancy_caps(
        vacancies in prop::collection::vec(0u32..8, 1..12),
        seekers in 0u32..60,
        deterministic in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut left = vacancies.clone();
        let ids: Vec<u32> = (0..seekers).collect();
        let m = match_workers(&mut left, &ids, deterministic, &mut rng);
        let open: u32 = vacancies.iter().sum();
        prop_assert_eq!(m.len() as u32, open.min(seekers));
        let mut per_firm = vec![0u32; vacancies.len()];
        for &(_, f) in &m {
            per_firm[f as usize] += 1;
        }
        for i in 0..vacancies.len() {
            prop_assert_eq!(per_firm[i] + left[i], vacancies[i]);
        }
    }

    #[test]
    fn clearing_conserves_goods_and_money(
        stock in prop::collection::vec(0.0f64..10.0, 1..10),
        price_seed in prop::collection::vec(0.5f64..2.0, 10),
        budgets in prop::collection::vec(0.0f64..5.0, 0..30),
        deterministic in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let prices = &price_seed[..stock.len()];
        let weights: Vec<f64> = stock.iter().zip(prices).map(|(s, p)| s / p).collect();
        let mut inv = stock.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let out = clear_sector(&mut inv, prices, &weights, &budgets, 1.0, deterministic, &mut rng).unwrap();
        let unspent: f64 = out.unspent.iter().map(|u| u.1).sum();
        let budget: f64 = budgets.iter().sum();
        prop_assert!((out.value + unspent - budget).abs() <= 1e-9 * budget.max(1.0));
        let revenue: f64 = out.revenue.iter().sum();
        prop_assert!((revenue - out.value).abs() <= 1e-9 * revenue.max(1.0));
        let value_sold: f64 = stock.iter().zip(&inv).zip(prices).map(|((a, b), p)| (a - b) * p).sum();
        prop_assert!((value_sold - out.value).abs() <= 1e-9 * value_sold.max(1.0));
        prop_assert!(inv.iter().all(|&s| s >= 0.0));
        if unspent > 0.0 {
            prop_assert!(inv.iter().zip(&weights).all(|(&s, &w)| s == 0.0 || w == 0.0));
        }
    }
}
