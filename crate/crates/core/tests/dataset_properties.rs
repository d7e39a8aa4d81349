mod common;

use adabag::dataset::{bootstrap_resample, label_class, stratified_split, GroupedDataset};
use adabag::io::{read_dataset, write_dataset};
use adabag::rng::{stage_rng, Stage};
use adabag::sparse::SparseBinaryMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every (group, class) cell populated, random cell sizes.
fn random_dataset(rng: &mut ChaCha8Rng, g: usize) -> GroupedDataset {
    let mut y = Vec::new();
    let mut groups = Vec::new();
    for gi in 0..g {
        for class in 0..2 {
            let cell = rng.random_range(4..=23usize);
            for _ in 0..cell {
                y.push(if class == 1 { 1.0 + rng.random::<f64>() } else { -1.0 - rng.random::<f64>() });
                groups.push(gi as u32);
            }
        }
    }
    let n = y.len();
    let p = 6;
    let rows: Vec<Vec<u32>> = (0..n)
        .map(|_| (0..p as u32).filter(|_| rng.random::<f64>() < 0.4).collect())
        .collect();
    GroupedDataset::new(
        SparseBinaryMatrix::from_rows(p, &rows).unwrap(),
        y,
        groups,
        (0..g).map(|i| format!("g{i}")).collect(),
        -1.0,
        1.0,
        (0..p).map(|j| format!("f{j}")).collect(),
        vec![0.5; p],
    )
    .unwrap()
}

/// The three index sets partition the rows, and within every (group, class)
/// cell the 2:1:1 ratio holds up to integer rounding.
#[test]
fn split_partitions_each_cell_in_ratio() {
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    for trial in 0..50 {
        let g = rng.random_range(1..=4usize);
        let ds = random_dataset(&mut rng, g);
        let split = stratified_split(&ds, trial as u64).unwrap();
        let mut seen = vec![0u8; ds.n_rows()];
        for &i in split.core.iter().chain(&split.validation).chain(&split.test) {
            seen[i] += 1;
        }
        assert!(seen.iter().all(|&c| c == 1), "trial {trial}: not a partition");
        for gi in 0..g {
            for class in 0..2u8 {
                let cell = (0..ds.n_rows())
                    .filter(|&i| ds.groups[i] as usize == gi && ds.class_of(i) == class)
                    .count();
                let count = |ids: &[usize]| {
                    ids.iter()
                        .filter(|&&i| ds.groups[i] as usize == gi && ds.class_of(i) == class)
                        .count()
                };
                let (nc, nv, nt) =
                    (count(&split.core), count(&split.validation), count(&split.test));
                assert_eq!(nc + nv + nt, cell);
                assert!(nv == cell / 4 || nv == cell / 4 + 1, "cell {cell}: val {nv}");
                assert!(nt == cell / 4 || nt == cell / 4 + 1, "cell {cell}: test {nt}");
                assert!(nv.abs_diff(nt) <= 1, "cell {cell}: val {nv} test {nt}");
                assert!(nc >= cell / 2, "cell {cell}: core {nc}");
            }
        }
        let cv = split.core_and_validation();
        assert!(cv.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(cv.len(), split.core.len() + split.validation.len());
    }
}

#[test]
fn split_is_deterministic_in_the_seed() {
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    let ds = random_dataset(&mut rng, 3);
    let first = stratified_split(&ds, 99).unwrap();
    let second = stratified_split(&ds, 99).unwrap();
    assert_eq!(first, second);
    let other = stratified_split(&ds, 100).unwrap();
    assert_ne!(first, other, "different seeds shuffled identically");
}

#[test]
fn split_rejects_an_empty_cell() {
    let y = vec![-2.0, -2.0, -2.0, 2.0, 2.0, 2.0];
    let groups = vec![0, 0, 0, 1, 1, 1];
    let x = SparseBinaryMatrix::from_rows(2, &vec![vec![0u32]; 6]).unwrap();
    let ds = GroupedDataset::new(
        x,
        y,
        groups,
        vec!["a".into(), "b".into()],
        -1.0,
        1.0,
        vec!["f0".into(), "f1".into()],
        vec![0.5, 0.5],
    )
    .unwrap();
    let err = stratified_split(&ds, 0).unwrap_err().to_string();
    assert!(err.contains("class"), "unexpected message: {err}");
}

/// The resample preserves the exact per-class counts, draws only core rows,
/// and is uniform within each class: over many replicates the mean
/// multiplicity of every row is 1 within Monte Carlo error.
#[test]
fn bootstrap_is_class_stratified_and_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    let ds = random_dataset(&mut rng, 2);
    let split = stratified_split(&ds, 5).unwrap();
    let class_counts = |ids: &[usize]| {
        let ones = ids.iter().filter(|&&i| ds.class_of(i) == 1).count();
        (ids.len() - ones, ones)
    };
    let (zeros, ones) = class_counts(&split.core);

    let replicates = 10_000usize;
    let mut multiplicity = vec![0u64; ds.n_rows()];
    for rep in 0..replicates {
        let mut rep_rng = stage_rng(17, Stage::Bootstrap, rep as u64);
        let sample = bootstrap_resample(&split.core, |i| ds.class_of(i), &mut rep_rng);
        assert_eq!(sample.len(), split.core.len());
        assert_eq!(class_counts(&sample), (zeros, ones));
        assert!(sample.iter().all(|i| split.core.contains(i)));
        for &i in &sample {
            multiplicity[i] += 1;
        }
    }
    // multiplicity of one row among c draws over its c class rows is
    // Binomial(c, 1/c): mean 1, variance 1 - 1/c < 1
    let three_se = 3.0 / (replicates as f64).sqrt();
    for &i in &split.core {
        let mean = multiplicity[i] as f64 / replicates as f64;
        assert!(
            (mean - 1.0).abs() <= three_se,
            "row {i}: mean multiplicity {mean:.4} drifted past {three_se:.4}"
        );
    }
}

#[test]
fn bootstrap_is_deterministic_per_stream() {
    let mut rng = ChaCha8Rng::seed_from_u64(1004);
    let ds = random_dataset(&mut rng, 2);
    let split = stratified_split(&ds, 5).unwrap();
    let draw = |stage_index: u64| {
        let mut r = stage_rng(33, Stage::Bootstrap, stage_index);
        bootstrap_resample(&split.core, |i| ds.class_of(i), &mut r)
    };
    assert_eq!(draw(0), draw(0));
    assert_ne!(draw(0), draw(1), "replicate streams collided");
}

#[test]
fn labels_keep_the_thresholds_and_reject_the_band() {
    assert_eq!(label_class(-1.0, -1.0, 1.0).unwrap(), 0);
    assert_eq!(label_class(1.0, -1.0, 1.0).unwrap(), 1);
    assert_eq!(label_class(-5.0, -1.0, 1.0).unwrap(), 0);
    assert_eq!(label_class(5.0, -1.0, 1.0).unwrap(), 1);
    for y in [-0.999, 0.0, 0.999] {
        let err = label_class(y, -1.0, 1.0).unwrap_err().to_string();
        assert!(err.contains("band") || err.contains("middle"), "message: {err}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1005);
    let ds = random_dataset(&mut rng, 2);
    for i in 0..ds.n_rows() {
        assert_eq!(ds.class_of(i), label_class(ds.y[i], ds.a, ds.b).unwrap());
    }
    assert_eq!(ds.midpoint(), 0.0);
}

#[test]
fn construction_rejects_inconsistent_inputs() {
    let x = SparseBinaryMatrix::from_rows(2, &[vec![0u32], vec![1u32]]).unwrap();
    let names = || vec!["f0".to_string(), "f1".to_string()];
    let ok = GroupedDataset::new(
        x.clone(),
        vec![-2.0, 2.0],
        vec![0, 0],
        vec!["g".into()],
        -1.0,
        1.0,
        names(),
        vec![0.5, 0.5],
    );
    assert!(ok.is_ok());
    let bad_thresholds = GroupedDataset::new(
        x.clone(),
        vec![-2.0, 2.0],
        vec![0, 0],
        vec!["g".into()],
        1.0,
        -1.0,
        names(),
        vec![0.5, 0.5],
    );
    assert!(bad_thresholds.is_err());
    let bad_y_len = GroupedDataset::new(
        x.clone(),
        vec![-2.0],
        vec![0, 0],
        vec!["g".into()],
        -1.0,
        1.0,
        names(),
        vec![0.5, 0.5],
    );
    assert!(bad_y_len.is_err());
    let banded_y = GroupedDataset::new(
        x.clone(),
        vec![-2.0, 0.0],
        vec![0, 0],
        vec!["g".into()],
        -1.0,
        1.0,
        names(),
        vec![0.5, 0.5],
    );
    assert!(banded_y.is_err());
    let bad_group = GroupedDataset::new(
        x.clone(),
        vec![-2.0, 2.0],
        vec![0, 7],
        vec!["g".into()],
        -1.0,
        1.0,
        names(),
        vec![0.5, 0.5],
    );
    assert!(bad_group.is_err());
    let bad_polarity = GroupedDataset::new(
        x,
        vec![-2.0, 2.0],
        vec![0, 0],
        vec!["g".into()],
        -1.0,
        1.0,
        names(),
        vec![0.5],
    );
    assert!(bad_polarity.is_err());
}

fn datasets_equal(a: &GroupedDataset, b: &GroupedDataset) -> bool {
    a.y == b.y
        && a.groups == b.groups
        && a.group_names == b.group_names
        && a.a == b.a
        && a.b == b.b
        && a.feature_names == b.feature_names
        && a.polarity == b.polarity
        && a.n_cols() == b.n_cols()
        && (0..a.n_rows()).all(|i| a.x.row(i) == b.x.row(i))
}

fn read_dir_files(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn disk_round_trip_preserves_everything() {
    let mut rng = ChaCha8Rng::seed_from_u64(1006);
    let ds = random_dataset(&mut rng, 3);
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("one");
    write_dataset(&first, &ds).unwrap();
    let back = read_dataset(&first, None).unwrap();
    assert!(datasets_equal(&ds, &back));

    let second = tmp.path().join("two");
    write_dataset(&second, &back).unwrap();
    assert_eq!(read_dir_files(&first), read_dir_files(&second), "rewrite changed bytes");
}

#[test]
fn missing_thresholds_need_a_fallback() {
    let mut rng = ChaCha8Rng::seed_from_u64(1007);
    let ds = random_dataset(&mut rng, 1);
    let tmp = tempfile::tempdir().unwrap();
    write_dataset(tmp.path(), &ds).unwrap();
    std::fs::remove_file(tmp.path().join("thresholds.tsv")).unwrap();
    assert!(read_dataset(tmp.path(), None).is_err());
    let back = read_dataset(tmp.path(), Some((-1.0, 1.0))).unwrap();
    assert_eq!((back.a, back.b), (-1.0, 1.0));
    assert!(datasets_equal(&ds, &back));
}
