//! Region table to regional predictions, on synthetic data.

use multipolar::analysis::{dispersion_report, predicted_rates, region_means};
use multipolar::dynamics::{init_opinions, run, ConvergenceSettings};
use multipolar::graph::{generate_watts_strogatz, WattsStrogatzParams};
use multipolar::population::{allocate_agents, assign_biases, shuffle_biases, synthesize_regions, Group, SyntheticDataParams};

struct Contrast {
    stddev_clustered: f64,
    stddev_shuffled: f64,
    mean_clustered: f64,
    mean_shuffled: f64,
}

fn contrast(n_agents: usize, seed: u64) -> Contrast {
    let table = synthesize_regions(&SyntheticDataParams {
        n_regions: 250,
        n_municipalities: 25,
        seed,
        ..Default::default()
    })
    .unwrap();
    let alloc = allocate_agents(&table, n_agents).unwrap();
    let clustered = assign_biases(&alloc, &table, 0.05).unwrap();
    let shuffled = shuffle_biases(&clustered, seed ^ 0xABCD);
    assert_eq!(clustered.count(Group::A), shuffled.count(Group::A));
    let g = generate_watts_strogatz(&WattsStrogatzParams::new(n_agents, 8, 0.2, seed)).unwrap();
    let settings = ConvergenceSettings::default();
    let mut out = Vec::new();
    for b in [&clustered, &shuffled] {
        let r = run(init_opinions(n_agents, 2, None).unwrap(), &g, &b.bias_matrix(), &settings).unwrap();
        assert!(r.converged);
        let p = region_means(&r.final_state, &alloc, &table).unwrap();
        out.push((dispersion_report(&predicted_rates(&p)).unwrap().stddev, r.final_state.column_mean(0)));
    }
    Contrast {
        stddev_clustered: out[0].0,
        stddev_shuffled: out[1].0,
        mean_clustered: out[0].1,
        mean_shuffled: out[1].1,
    }
}

#[test]
fn clustering_widens_regional_spread() {
    for seed in 0..4 {
        let c = contrast(5000, seed);
        assert!(c.stddev_clustered > c.stddev_shuffled, "seed {seed}: {} vs {}", c.stddev_clustered, c.stddev_shuffled);
        assert!(c.mean_shuffled >= c.mean_clustered, "seed {seed}");
    }
}

#[test]
fn unanimous_table_gives_identical_runs() {
    let table = synthesize_regions(&SyntheticDataParams {
        n_regions: 30,
        n_municipalities: 3,
        predictor_lo: 1.0,
        predictor_hi: 1.0,
        seed: 1,
        ..Default::default()
    })
    .unwrap();
    let alloc = allocate_agents(&table, 600).unwrap();
    let b = assign_biases(&alloc, &table, 0.05).unwrap();
    assert_eq!(b.count(Group::A), 600);
    assert_eq!(shuffle_biases(&b, 77), b);
}

#[test]
fn predictions_follow_predictor() {
    let table = synthesize_regions(&SyntheticDataParams {
        n_regions: 120,
        n_municipalities: 12,
        noise_scale: 0.0,
        seed: 5,
        ..Default::default()
    })
    .unwrap();
    let n = 6000;
    let alloc = allocate_agents(&table, n).unwrap();
    let b = assign_biases(&alloc, &table, 0.05).unwrap();
    let g = generate_watts_strogatz(&WattsStrogatzParams::new(n, 8, 0.2, 5)).unwrap();
    let r = run(init_opinions(n, 2, None).unwrap(), &g, &b.bias_matrix(), &ConvergenceSettings::default()).unwrap();
    let p = region_means(&r.final_state, &alloc, &table).unwrap();
    let xs: Vec<f64> = table.records().iter().map(|r| r.predictor_rate).collect();
    let ys: Vec<f64> = p.iter().map(|p| p.predicted_rate.unwrap()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / xs.len() as f64, ys.iter().sum::<f64>() / ys.len() as f64);
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let vy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    assert!(cov / (vx * vy).sqrt() > 0.9);
}
