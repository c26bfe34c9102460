mod common;

use qnn_core::data::{
    self, idx, image, load_vowel_dataset, read_cache, vowel, write_cache, DatasetSpec, Pca, Task,
};

/// Cyclic Jacobi eigenvalue iteration on a dense symmetric matrix.
#[allow(clippy::needless_range_loop)]
fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

/// Correlation matrix of `rows` (covariance of standardized columns).
fn correlation(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len() as f64;
    let d = rows[0].len();
    let mean: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let cov = |i: usize, j: usize| rows.iter().map(|r| (r[i] - mean[i]) * (r[j] - mean[j])).sum::<f64>() / (n - 1.0);
    let sd: Vec<f64> = (0..d).map(|j| cov(j, j).sqrt()).collect();
    (0..d).map(|i| (0..d).map(|j| cov(i, j) / (sd[i] * sd[j])).collect()).collect()
}

fn check_against_oracle(rows: &[Vec<f64>], kept: usize) {
    let pca = Pca::fit(rows, kept).unwrap();
    let oracle = jacobi_eigenvalues(correlation(rows));
    for (a, b) in pca.eigenvalues.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }
    let total: f64 = oracle.iter().sum();
    let want = oracle[..kept].iter().sum::<f64>() / total;
    assert!((pca.explained_variance_ratio() - want).abs() < 1e-8);
}

#[test]
fn pca_eigenvalues_match_jacobi_on_synthetic_data() {
    let mut rng = common::rng(8);
    for d in [3, 6, 10] {
        let rows: Vec<Vec<f64>> = (0..80)
            .map(|_| {
                let base = common::uniform(&mut rng, 2, -1.0, 1.0);
                let noise = common::uniform(&mut rng, d, -0.3, 0.3);
                (0..d).map(|j| base[j % 2] * (j + 1) as f64 + noise[j]).collect()
            })
            .collect();
        for kept in 1..=d {
            check_against_oracle(&rows, kept);
        }
    }
}

const MNIST_FIRST_THREE: usize = 7;
/// 6×6 block means of the first MNIST training image labelled 3, computed by
/// a separate numpy crop/reshape/mean pipeline.
const MNIST_FIRST_THREE_FEATURES: [f64; 16] = [
    0.0,
    0.24575163398692812,
    0.49520697167755995,
    0.12712418300653594,
    0.0,
    0.1957516339869281,
    0.6098039215686275,
    0.20664488017429192,
    0.008714596949891067,
    0.3113289760348584,
    0.6003267973856209,
    0.0,
    0.2710239651416122,
    0.5079520697167755,
    0.32745098039215687,
    0.0,
];

/// Scalar reference: assign each cropped pixel to its block and average.
fn block_means(pixels: &[u8]) -> Vec<f64> {
    let mut sums = [0.0; 16];
    for r in 2..26 {
        for c in 2..26 {
            sums[((r - 2) / 6) * 4 + (c - 2) / 6] += pixels[r * 28 + c] as f64;
        }
    }
    sums.iter().map(|s| s / (36.0 * 255.0)).collect()
}

#[test]
fn mnist_digit_three_matches_reference_pipelines() {
    let Some(root) = common::data_root(Task::Mnist2) else { return };
    let images = idx::parse_images(&std::fs::read(root.join("mnist").join(data::IMAGES_FILE)).unwrap()).unwrap();
    let labels = idx::parse_labels(&std::fs::read(root.join("mnist").join(data::LABELS_FILE)).unwrap()).unwrap();
    assert_eq!(images.len(), 60_000);
    assert_eq!(labels.iter().position(|&l| l == 3), Some(MNIST_FIRST_THREE));
    let got = image::preprocess(images.image(MNIST_FIRST_THREE)).unwrap();
    for ((a, b), c) in got.iter().zip(MNIST_FIRST_THREE_FEATURES).zip(block_means(images.image(MNIST_FIRST_THREE))) {
        assert!((a - b).abs() < 1e-6);
        assert!((a - c).abs() < 1e-12);
    }
}

#[test]
fn image_tasks_load_with_expected_shapes() {
    for task in [Task::Mnist2, Task::Mnist4, Task::Fashion2, Task::Fashion4] {
        let Some(root) = common::data_root(task) else { continue };
        let spec = DatasetSpec::preset(task);
        let d = data::load(&root, &spec).unwrap();
        assert_eq!(d.train.len(), spec.train_count);
        assert_eq!(d.val.len(), spec.val_count);
        for s in d.train.iter().chain(&d.val) {
            assert_eq!(s.features.len(), 16);
            assert!(s.features.iter().all(|x| (0.0..=1.0).contains(x)));
            assert!(s.label < spec.num_classes());
        }
        // every class is represented in training
        for k in 0..spec.num_classes() {
            assert!(d.train.iter().any(|s| s.label == k), "{task} class {k}");
        }
        assert_eq!(d, data::load(&root, &spec).unwrap());
        assert_eq!(read_cache(&write_cache(&d).unwrap()).unwrap(), d);
    }
}

#[test]
fn vowel_pca_matches_jacobi_and_is_fit_on_training_rows() {
    let Some(root) = common::data_root(Task::Vowel4) else { return };
    let text = std::fs::read_to_string(root.join("vowel").join(data::VOWEL_FILE)).unwrap();
    let rows = vowel::parse_table(&text).unwrap();
    assert_eq!(rows.len(), 990);
    let spec = DatasetSpec::preset(Task::Vowel4);
    let (d, pca) = load_vowel_dataset(&rows, &spec).unwrap();
    assert_eq!((d.train.len(), d.val.len()), (100, 260));
    let wanted: Vec<&vowel::VowelRow> = rows.iter().filter(|r| [0, 1, 5, 6].contains(&r.class)).collect();
    assert_eq!(wanted.len(), 360);
    let train_rows: Vec<Vec<f64>> = wanted[..100].iter().map(|r| r.features.clone()).collect();
    check_against_oracle(&train_rows, 10);
    for k in 1..=10 {
        check_against_oracle(&train_rows, k);
    }
    // training projections: zero mean, variance equal to the eigenvalues
    for k in 0..10 {
        let col: Vec<f64> = d.train.iter().map(|s| s.features[k]).collect();
        let mean = col.iter().sum::<f64>() / 100.0;
        let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 99.0;
        assert!(mean.abs() < 1e-10);
        assert!((var - pca.eigenvalues[k]).abs() < 1e-9);
    }
    assert!(d.val.iter().all(|s| s.features.iter().all(|x| x.is_finite())));
}
