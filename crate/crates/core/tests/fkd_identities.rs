mod common;

use common::{dist, max_abs_diff, random_dataset, rng};
use kdiff::datasets::Dataset;
use kdiff::density::{
    build_transition, density_fkd, density_fkd_streaming, density_naive, fkd_cluster_mean, naive_normalizer,
};
use kdiff::kernels::{kernel_matrix, KernelSpec};
use rand::Rng;

/// Three clusters of the given sizes, each inside a disc of radius 1, with
/// centers 10 apart so every inter-cluster gap exceeds `eps = 1.5`.
fn separated_clusters(sizes: &[usize], seed: u64) -> Dataset {
    let mut r = rng(seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (c, &m) in sizes.iter().enumerate() {
        let cx = 10.0 * c as f64;
        for _ in 0..m {
            let (rad, ang) = (r.random::<f64>().sqrt(), r.random_range(0.0..std::f64::consts::TAU));
            rows.push(vec![cx + rad * ang.cos(), rad * ang.sin()]);
            labels.push(c);
        }
    }
    Dataset::new("separated", rows, Some(labels)).unwrap()
}

#[test]
fn indicator_fkd_has_unit_cluster_means() {
    let eps = 1.5;
    for seed in 0..10 {
        let ds = separated_clusters(&[10, 50, 200], seed);
        for i in 0..ds.len() {
            for j in 0..ds.len() {
                if ds.labels().unwrap()[i] != ds.labels().unwrap()[j] {
                    assert!(dist(ds.row(i), ds.row(j)) > eps);
                }
            }
        }
        let p = build_transition(&kernel_matrix(&ds, &KernelSpec::IndicatorBall { eps }).unwrap()).unwrap();
        let fkd = density_fkd(&p);
        let means = fkd_cluster_mean(&fkd, ds.labels().unwrap()).unwrap();
        assert_eq!(means.len(), 3);
        for (label, mean) in means {
            assert!((mean - 1.0).abs() <= 1e-12, "seed {seed} cluster {label}: {mean}");
        }
    }
}

#[test]
fn indicator_fkd_is_sum_of_inverse_naive_density() {
    for seed in 0..20 {
        let d = 1 + seed as usize % 4;
        let ds = random_dataset(seed, 60 + 7 * seed as usize, d);
        let eps = 0.6 + 0.1 * (seed % 5) as f64;
        let naive = density_naive(&ds, eps).unwrap();
        let c_d = naive_normalizer(ds.len(), eps, d);
        let expected: Vec<f64> = (0..ds.len())
            .map(|x| {
                (0..ds.len())
                    .filter(|&y| dist(ds.row(x), ds.row(y)) <= eps)
                    .map(|y| 1.0 / naive.values[y])
                    .sum::<f64>()
                    / c_d
            })
            .collect();
        let kmat = kernel_matrix(&ds, &KernelSpec::IndicatorBall { eps }).unwrap();
        let fkd = density_fkd(&build_transition(&kmat).unwrap());
        let err = max_abs_diff(&fkd.values, &expected);
        assert!(err <= 1e-10, "seed {seed}: {err:e}");
        assert_eq!(density_fkd_streaming(&kmat).unwrap().values, fkd.values);
    }
}

#[test]
fn densities_ignore_kernel_scale() {
    let ds = random_dataset(3, 150, 2);
    for spec in [
        KernelSpec::IndicatorBall { eps: 0.8 },
        KernelSpec::SymmetricGaussian { eps: 0.8, h: 0.5 },
        KernelSpec::AsymmetricGaussian { k: 6, h: 0.5 },
    ] {
        let kmat = kernel_matrix(&ds, &spec).unwrap();
        let base = density_fkd(&build_transition(&kmat).unwrap());
        for factor in [1e-3, 7.0, 1e4] {
            let scaled = density_fkd(&build_transition(&kmat.scaled(factor)).unwrap());
            assert!(
                max_abs_diff(&scaled.values, &base.values) <= 1e-12,
                "{spec:?} x{factor}"
            );
        }
    }
}

#[test]
fn indicator_fkd_is_invariant_to_rescaling_data_and_radius() {
    let ds = random_dataset(9, 120, 3);
    let eps = 0.9;
    let base =
        density_fkd(&build_transition(&kernel_matrix(&ds, &KernelSpec::IndicatorBall { eps }).unwrap()).unwrap());
    let s = 2.5;
    let rows = ds.rows().map(|r| r.iter().map(|v| v * s).collect()).collect();
    let scaled_ds = Dataset::new("scaled", rows, None).unwrap();
    let scaled = density_fkd(
        &build_transition(&kernel_matrix(&scaled_ds, &KernelSpec::IndicatorBall { eps: eps * s }).unwrap()).unwrap(),
    );
    assert!(max_abs_diff(&scaled.values, &base.values) <= 1e-12);
}
