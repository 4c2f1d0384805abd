use afda_core::curriculum::{
    schedule_beta, schedule_table, scheduled_beta, CurriculumConfig, EpochState, SchedulerKind,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn kind() -> impl Strategy<Value = SchedulerKind> {
    prop::sample::select(SchedulerKind::ALL.to_vec())
}

fn config() -> impl Strategy<Value = CurriculumConfig> {
    (kind(), 0.0f64..=1.0, 0.01f64..=1.0, 1u32..200, 0.1f64..10.0)
        .prop_map(|(k, b, r, e, g)| CurriculumConfig::with_curvature(k, b, r, e, g).unwrap())
}

#[test]
fn linear_reference_values() {
    let cfg = CurriculumConfig::new(SchedulerKind::Linear, 0.006, 0.5, 100).unwrap();
    let table = schedule_table(&cfg, 0);
    assert_eq!(table[0].1, 0.0);
    assert!((table[25].1 - 0.003).abs() <= 1e-12);
    for &(e, b) in &table[50..] {
        assert!((b - 0.006).abs() <= 1e-12, "epoch {e}");
    }
}

#[test]
fn exponential_reference_values() {
    let cfg = CurriculumConfig::new(SchedulerKind::Exponential, 0.006, 0.5, 100).unwrap();
    let t = schedule_table(&cfg, 0);
    let want = 0.006 * ((2.5f64).exp() - 1.0) / ((5.0f64).exp() - 1.0);
    assert!((t[25].1 - want).abs() < 1e-15);
    assert_eq!(t[50].1, 0.006);
}

#[test]
fn random_kind_statistics() {
    let cfg = CurriculumConfig::new(SchedulerKind::Random, 1.0, 0.5, 10).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n = 100_000;
    let mut sum = 0.0;
    for i in 0..n {
        let b = schedule_beta(&cfg, cfg.epoch(i % 10).unwrap(), &mut rng);
        assert!((0.0..=1.0).contains(&b));
        sum += b;
    }
    let mean = sum / n as f64;
    assert!((0.49..=0.51).contains(&mean), "mean {mean}");
}

#[test]
fn random_kind_shares_value_within_epoch() {
    let cfg = CurriculumConfig::new(SchedulerKind::Random, 0.5, 0.5, 20).unwrap();
    let a = schedule_table(&cfg, 7);
    assert_eq!(a, schedule_table(&cfg, 7));
    assert_ne!(a, schedule_table(&cfg, 8));
    let distinct: std::collections::BTreeSet<u64> = a.iter().map(|(_, b)| b.to_bits()).collect();
    assert!(distinct.len() > 10);
}

proptest! {
    #[test]
    fn values_within_bounds(cfg in config(), seed in any::<u64>()) {
        for (_, b) in schedule_table(&cfg, seed) {
            prop_assert!(b >= 0.0 && b <= cfg.beta_opt());
        }
    }

    #[test]
    fn monotone_directions(cfg in config()) {
        let t = schedule_table(&cfg, 0);
        for pair in t.windows(2) {
            let (a, b) = (pair[0].1, pair[1].1);
            match cfg.kind() {
                SchedulerKind::Linear | SchedulerKind::Exponential => prop_assert!(b >= a),
                SchedulerKind::AntiLinear | SchedulerKind::AntiExponential => prop_assert!(b <= a),
                SchedulerKind::Random => {}
            }
        }
    }

    #[test]
    fn pinned_after_curriculum(cfg in config()) {
        for (e, b) in schedule_table(&cfg, 0) {
            if e as f64 >= cfg.curriculum_length() {
                match cfg.kind() {
                    SchedulerKind::Linear | SchedulerKind::Exponential => prop_assert_eq!(b, cfg.beta_opt()),
                    SchedulerKind::AntiLinear | SchedulerKind::AntiExponential => prop_assert_eq!(b, 0.0),
                    SchedulerKind::Random => {}
                }
            }
        }
    }

    #[test]
    fn anti_mirrors_forward(b in 0.0f64..=1.0, r in 0.01f64..=1.0, total in 1u32..150) {
        for (fwd, anti) in [
            (SchedulerKind::Linear, SchedulerKind::AntiLinear),
            (SchedulerKind::Exponential, SchedulerKind::AntiExponential),
        ] {
            let f = schedule_table(&CurriculumConfig::new(fwd, b, r, total).unwrap(), 0);
            let a = schedule_table(&CurriculumConfig::new(anti, b, r, total).unwrap(), 0);
            for ((_, x), (_, y)) in f.iter().zip(&a) {
                prop_assert!((x + y - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn exponential_below_linear_inside_curriculum(b in 0.001f64..=1.0, r in 0.05f64..=1.0, total in 2u32..150) {
        let lin = CurriculumConfig::new(SchedulerKind::Linear, b, r, total).unwrap();
        let exp = CurriculumConfig::new(SchedulerKind::Exponential, b, r, total).unwrap();
        for e in 0..total {
            let t = e as f64 / lin.curriculum_length();
            if t > 0.0 && t < 1.0 {
                let st = EpochState::new(e, total).unwrap();
                prop_assert!(scheduled_beta(&exp, st, 0) < scheduled_beta(&lin, st, 0));
            }
        }
    }
}
