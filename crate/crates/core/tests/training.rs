use std::f64::consts::PI;

use polynet::analysis::weight_direction_spacing;
use polynet::train::{train_all, TrainConfig};
use polynet::{train, train_best_of, NetworkSpec};

fn config(epochs: usize, restarts: usize, seed: u64) -> TrainConfig {
    TrainConfig {
        epochs,
        restarts,
        seed,
        ..TrainConfig::default()
    }
}

#[test]
fn quadratic_network_fits_the_circle() {
    let spec = NetworkSpec::single(2, 2, 2.0).unwrap();
    let result = train(&spec, &config(2000, 1, 0)).unwrap();
    assert!(result.final_loss < 1e-6, "final loss {}", result.final_loss);
}

#[test]
fn two_linear_units_settle_orthogonal() {
    let spec = NetworkSpec::single(2, 2, 1.0).unwrap();
    let result = train(&spec, &config(10_000, 1, 0)).unwrap();
    let gaps = weight_direction_spacing(&result.network).unwrap();
    assert_eq!(gaps.len(), 2);
    for g in gaps {
        assert!((g - PI / 2.0).abs() < 0.02, "gap {g}");
    }
}

#[test]
fn loss_history_trends_down() {
    let spec = NetworkSpec::single(2, 3, 1.0).unwrap();
    let result = train(&spec, &config(1000, 1, 2)).unwrap();
    let losses: Vec<f64> = result.loss_history.iter().map(|h| h.1).collect();
    assert_eq!(result.loss_history.last().unwrap().0, 1000);
    assert_eq!(*losses.last().unwrap(), result.final_loss);
    // Window means must not increase by more than noise.
    let means: Vec<f64> = losses.chunks(10).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect();
    for w in means.windows(2) {
        assert!(w[1] <= w[0] * 1.05, "{means:?}");
    }
    assert!(means.last().unwrap() < &(means[0] * 0.5));
}

#[test]
fn training_is_reproducible() {
    let spec = NetworkSpec::new(3, vec![4, 2], vec![1.0, 1.0]).unwrap();
    let a = train(&spec, &config(50, 1, 9)).unwrap();
    let b = train(&spec, &config(50, 1, 9)).unwrap();
    assert_eq!(a, b);
    let c = train(&spec, &config(50, 1, 10)).unwrap();
    assert_ne!(a.network, c.network);
}

#[test]
fn single_restart_equals_plain_training() {
    let spec = NetworkSpec::single(2, 3, 1.0).unwrap();
    let cfg = config(100, 1, 5);
    assert_eq!(train_best_of(&spec, &cfg).unwrap(), train(&spec, &cfg).unwrap());
}

#[test]
fn best_of_picks_the_lowest_final_loss() {
    let spec = NetworkSpec::single(2, 3, 1.0).unwrap();
    let cfg = config(200, 3, 1);
    let (best, losses) = train_all(&spec, &cfg).unwrap();
    let min = losses.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    assert_eq!(best.final_loss, min);
    assert_eq!(best.seed_used, cfg.seed + best.restart_index as u64);
    let alone = train(&spec, &config(200, 1, best.seed_used)).unwrap();
    assert_eq!(alone.network, best.network);
}
