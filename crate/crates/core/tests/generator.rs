use mcs_auction::assign::solve_exact;
use mcs_auction::model::{social_welfare, Instance, Task, User};
use mcs_auction::simgen::{generate, no_reuse_transform, GenParams, SeededRng};

fn load(name: &str) -> Instance {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name);
    Instance::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn rng_reference_sequence() {
    let golden = include_str!("golden/rng_seed0.txt");
    let expected: Vec<u64> = golden.lines().map(|l| l.parse().unwrap()).collect();
    let mut rng = SeededRng::new(0);
    let got: Vec<u64> = (0..expected.len()).map(|_| rng.next_u64()).collect();
    assert_eq!(expected.len(), 4);
    assert_eq!(got, expected);
}

#[test]
fn same_seed_same_bytes() {
    let p = GenParams::default().with_seed(11);
    assert_eq!(generate(&p).unwrap().to_json(), generate(&p).unwrap().to_json());
    assert_ne!(generate(&p).unwrap().to_json(), generate(&p.clone().with_seed(12)).unwrap().to_json());
}

#[test]
fn wide_radius_covers_everything() {
    let p = GenParams { sense_radius_km: 15.0, ..GenParams::default() }.with_items(10);
    for seed in 0..20 {
        let inst = generate(&p.clone().with_seed(seed)).unwrap();
        assert!(inst.users().iter().all(|u| u.capability().len() == 10));
    }
}

#[test]
fn too_many_items_per_task_is_rejected() {
    let p = GenParams { items_per_task: 6, ..GenParams::default() };
    assert!(generate(&p).is_err());
}

/// SplitMix64, kept separate from the generator under test.
struct SplitMix(u64);

impl SplitMix {
    fn unit(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        ((z ^ (z >> 31)) >> 11) as f64 / (1u64 << 53) as f64
    }
}

#[test]
fn coverage_matches_geometric_probability() {
    // Probability that two uniform points in a 10 x 10 square are within 5 km.
    let mut mc = SplitMix(2024);
    let samples = 2_000_000;
    let hits = (0..samples)
        .filter(|_| {
            let (dx, dy) = (10.0 * (mc.unit() - mc.unit()), 10.0 * (mc.unit() - mc.unit()));
            dx * dx + dy * dy <= 25.0
        })
        .count();
    let p = hits as f64 / samples as f64;
    let p_se = (p * (1.0 - p) / samples as f64).sqrt();

    let params = GenParams::default();
    let per_instance: Vec<f64> = (0..1000)
        .map(|seed| {
            let inst = generate(&params.clone().with_seed(seed)).unwrap();
            let sensed: usize = inst.users().iter().map(|u| u.capability().len()).sum();
            sensed as f64 / (inst.num_users() * inst.num_items()) as f64
        })
        .collect();
    let n = per_instance.len() as f64;
    let mean = per_instance.iter().sum::<f64>() / n;
    let var = per_instance.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n + p_se * p_se).sqrt();
    assert!((mean - p).abs() < 4.0 * se, "coverage {mean:.4} vs geometric {p:.4} (se {se:.4})");
}

#[test]
fn transform_splits_shared_items() {
    let overlapping_tasks = load("overlapping_tasks.json");
    let split = no_reuse_transform(&overlapping_tasks);
    assert_eq!(split.num_items(), 15);
    assert_eq!(split.num_users(), 3);
    for (a, b) in overlapping_tasks.users().iter().zip(split.users()) {
        assert_eq!(a.budget(), b.budget());
    }
    let shared = |inst: &Instance| (0..inst.num_items()).filter(|&k| inst.tasks_requiring(k).len() > 1).count();
    assert_eq!(shared(&overlapping_tasks), 3);
    assert_eq!(shared(&split), 0);
}

#[test]
fn transform_leaves_disjoint_requirements_alone() {
    let users = vec![User::new([(0, 0.1), (1, 0.2)], 1.0).unwrap(), User::new([(2, 0.3)], 1.0).unwrap()];
    let tasks = vec![Task::new([0, 1], 1.0).unwrap(), Task::new([2], 0.5).unwrap()];
    let inst = Instance::new(3, users, tasks).unwrap();
    assert_eq!(no_reuse_transform(&inst), inst);
}

#[test]
fn shared_item_loses_welfare_without_reuse() {
    // One sensing at 0.2 serves both tasks; without reuse each task needs its own.
    let inst = load("worked_example.json");
    let welfare = |i: &Instance| social_welfare(i, &solve_exact(i)).unwrap();
    let expected_shared = 0.5 + 0.6 - 0.2;
    let expected_split = 0.5 + 0.6 - 2.0 * 0.2;
    assert!((welfare(&inst) - expected_shared).abs() < 1e-9);
    assert!((welfare(&no_reuse_transform(&inst)) - expected_split).abs() < 1e-9);
}
