use super::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scale_up_csv() -> String {
    let mut r = ChaCha8Rng::seed_from_u64(1);
    let mut s: String = (0..20).map(|j| format!("aa{j},")).collect();
    s.push_str("titer,scale\n");
    for i in 0..40 {
        for _ in 0..20 {
            s.push_str(&format!("{},", r.random_range(0.0..10.0)));
        }
        s.push_str(&format!("{},{}\n", r.random::<f64>(), u8::from(i >= 24)));
    }
    s
}

fn schema() -> CsvSchema {
    CsvSchema::new("titer", "scale")
}

#[test]
fn loads_scale_up_shape() {
    let ds = read_csv(scale_up_csv().as_bytes(), &schema(), None).unwrap();
    assert_eq!(ds.n_rows(), 40);
    assert_eq!(ds.n_features(), 20);
    assert_eq!(ds.rows_at(1).len(), 24);
    assert_eq!(ds.rows_at(2).len(), 16);
    assert_eq!(ds.level_labels, vec!["0", "1"]);
    assert_eq!(ds.high_rows(), (24..40).collect::<Vec<_>>());
    let levels = ds.levels().unwrap();
    assert_eq!((levels[0].len(), levels[1].len()), (24, 16));
}

#[test]
fn non_numeric_cell_reports_coordinates() {
    let mut text = String::from("a,b,y,f\n");
    for i in 1..=9 {
        let b = if i == 7 { "oops".to_string() } else { i.to_string() };
        text.push_str(&format!("{i},{b},{i},1\n"));
    }
    match read_csv(text.as_bytes(), &CsvSchema::new("y", "f"), None) {
        Err(Error::NonNumericCell { row, column, value }) => {
            assert_eq!((row, column.as_str(), value.as_str()), (7, "b", "oops"));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn write_then_read_is_identity() {
    let ds = read_csv(scale_up_csv().as_bytes(), &schema(), Some("mem".into())).unwrap();
    let mut buf = Vec::new();
    write_csv(&ds, &mut buf).unwrap();
    let back = read_csv(buf.as_slice(), &schema(), None).unwrap();
    assert_eq!(back, ds);
    assert_eq!(back.content_hash(), ds.content_hash());
}

#[test]
fn file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    std::fs::write(&path, scale_up_csv()).unwrap();
    let ds = load_csv(&path, &schema()).unwrap();
    assert_eq!(ds.provenance.source.as_deref(), Some(path.display().to_string().as_str()));
    let out = dir.path().join("e.csv");
    write_csv(&ds, std::fs::File::create(&out).unwrap()).unwrap();
    assert_eq!(load_csv(&out, &schema()).unwrap(), ds);
}

#[test]
fn categorical_fidelity_uses_declared_order() {
    let text = "x,y,line\n0.1,1,H\n0.2,2,A\n0.3,3,A\n";
    let schema = CsvSchema {
        fidelity_order: Some(vec!["A".into(), "H".into()]),
        ..CsvSchema::new("y", "line")
    };
    let ds = read_csv(text.as_bytes(), &schema, None).unwrap();
    assert_eq!(ds.fidelity, vec![2, 1, 1]);
    let bad = "x,y,line\n0.1,1,Q\n";
    assert!(matches!(read_csv(bad.as_bytes(), &schema, None), Err(Error::UnknownFidelityLabel { row: 1, .. })));
}

#[test]
fn schema_errors() {
    assert!(matches!(read_csv("x,y\n1,2\n".as_bytes(), &CsvSchema::new("y", "f"), None), Err(Error::MissingColumn(c)) if c == "f"));
    assert!(matches!(read_csv("".as_bytes(), &CsvSchema::new("y", "f"), None), Err(Error::EmptyFile)));
    assert!(matches!(read_csv("x,y,f\n".as_bytes(), &CsvSchema::new("y", "f"), None), Err(Error::EmptyFile)));
    let s = CsvSchema {
        features: Some(vec!["x".into(), "z".into()]),
        ..CsvSchema::new("y", "f")
    };
    assert!(matches!(read_csv("x,y,f\n1,2,1\n".as_bytes(), &s, None), Err(Error::MissingColumn(c)) if c == "z"));
}

fn tiny(values: &[f64]) -> Dataset {
    let n = values.len();
    Dataset::new(
        vec!["a".into(), "c".into()],
        DenseMatrix::from_rows(&values.iter().map(|v| [*v, 3.0]).collect::<Vec<_>>()).unwrap(),
        values.iter().map(|v| v * 10.0).collect(),
        vec![1; n],
        vec!["1".into()],
    )
    .unwrap()
}

#[test]
fn normalize_examples() {
    let ds = tiny(&[2.0, 4.0, 6.0]);
    let stats = fit_normalize(&ds, &NormalizationReference::AllRows).unwrap();
    let n = apply_normalize(&ds, &stats).unwrap();
    assert_eq!(n.x.column_values(0), vec![0.0, 0.5, 1.0]);
    assert_eq!(n.x.column_values(1), vec![0.0; 3]);
    assert_eq!(n.y, vec![0.0, 0.5, 1.0]);
    assert_eq!(stats.zero_range_features(), vec![1]);
    let back = stats.inverse(&n).unwrap();
    assert!(back.x.frobenius_distance(&ds.x) < 1e-12);
    assert!(back.y.iter().zip(&ds.y).all(|(a, b)| (a - b).abs() < 1e-12));
}

#[test]
fn train_only_reference() {
    let mut ds = tiny(&[0.0, 1.0, 2.0, 3.0, 4.0]);
    ds.fidelity = vec![1, 1, 2, 2, 2];
    ds.level_labels = vec!["lo".into(), "hi".into()];
    let plan = SplitPlan { seed: 0, n_t: 1, train_high: vec![2], test_high: vec![3, 4], low: vec![0, 1] };
    let stats = fit_normalize(&ds, &NormalizationReference::TrainOnly(plan)).unwrap();
    assert_eq!((stats.feature_min[0], stats.feature_max[0]), (0.0, 2.0));
    let empty = SplitPlan { seed: 0, n_t: 0, train_high: vec![], test_high: vec![], low: vec![] };
    assert!(matches!(fit_normalize(&ds, &NormalizationReference::TrainOnly(empty)), Err(Error::EmptyReference)));
}

fn multi(n_low: usize, n_high: usize) -> Dataset {
    let n = n_low + n_high;
    Dataset::new(
        vec!["x".into()],
        DenseMatrix::column(&(0..n).map(|i| i as f64).collect::<Vec<_>>()).unwrap(),
        vec![0.0; n],
        (0..n).map(|i| if i < n_low { 1 } else { 2 }).collect(),
        vec!["1".into(), "2".into()],
    )
    .unwrap()
}

#[test]
fn fifteen_of_sixteen() {
    let ds = multi(24, 16);
    let plans = make_splits(&ds, 15, 30, 5).unwrap();
    assert_eq!(plans.len(), 30);
    for p in &plans {
        assert_eq!(p.test_high.len(), 1);
        assert_eq!(p.train_high.len(), 15);
        assert_eq!(p.low, (0..24).collect::<Vec<_>>());
        let mut all = [p.train_high.clone(), p.test_high.clone()].concat();
        all.sort_unstable();
        assert_eq!(all, (24..40).collect::<Vec<_>>());
    }
    assert_eq!(plans, make_splits(&ds, 15, 30, 5).unwrap());
    assert_ne!(plans, make_splits(&ds, 15, 30, 6).unwrap());
    assert!(matches!(make_splits(&ds, 16, 1, 5), Err(Error::TrainSizeOutOfRange { n_t: 16, n_high: 16 })));
    assert!(matches!(make_splits(&ds, 0, 1, 5), Err(Error::TrainSizeOutOfRange { .. })));
}

#[test]
fn splits_follow_rows_not_positions() {
    let ds = multi(4, 6);
    // interleave low rows among the high rows, keeping the high rows' relative order
    let perm = [4, 0, 5, 6, 1, 7, 2, 8, 9, 3];
    let shuffled = ds.select_rows(&perm);
    let a = make_splits(&ds, 3, 5, 11).unwrap();
    let b = make_splits(&shuffled, 3, 5, 11).unwrap();
    for (pa, pb) in a.iter().zip(&b) {
        let back = |idx: &[usize]| {
            let mut v: Vec<usize> = idx.iter().map(|i| perm[*i]).collect();
            v.sort_unstable();
            v
        };
        assert_eq!(back(&pb.train_high), pa.train_high);
        assert_eq!(back(&pb.test_high), pa.test_high);
    }
}

#[test]
fn leave_one_out() {
    let ds = tiny(&(0..24).map(f64::from).collect::<Vec<_>>());
    let plans = loo_splits(&ds).unwrap();
    assert_eq!(plans.len(), 24);
    let mut held: Vec<usize> = plans.iter().flat_map(|p| p.test_high.clone()).collect();
    held.sort_unstable();
    assert_eq!(held, (0..24).collect::<Vec<_>>());
    let two = loo_splits(&tiny(&[1.0, 2.0])).unwrap();
    assert_eq!((two[0].train_high.clone(), two[0].test_high.clone()), (vec![1], vec![0]));
    assert_eq!((two[1].train_high.clone(), two[1].test_high.clone()), (vec![0], vec![1]));
    assert!(matches!(loo_splits(&tiny(&[1.0])), Err(Error::TooFewRows { .. })));
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix; returns
/// (eigenvalues, eigenvectors as columns).
fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |j| *j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
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
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

#[test]
fn pca_matches_jacobi_oracle() {
    let mut r = ChaCha8Rng::seed_from_u64(21);
    let (n, d) = (20, 5);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|j| r.random::<f64>() * (j + 1) as f64).collect()).collect();
    let x = DenseMatrix::from_rows(&rows).unwrap();
    let pca = pca_project(&x, d).unwrap();

    let mean: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let c: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().zip(&mean).map(|(v, m)| v - m).collect()).collect();
    let cov: Vec<Vec<f64>> = (0..d)
        .map(|a| (0..d).map(|b| c.iter().map(|r| r[a] * r[b]).sum::<f64>() / (n - 1) as f64).collect())
        .collect();
    let (vals, vecs) = jacobi_eigen(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|a, b| vals[*b].total_cmp(&vals[*a]));
    let total: f64 = vals.iter().sum();
    for (k, &e) in order.iter().enumerate() {
        assert!((pca.explained_ratio[k] - vals[e] / total).abs() < 1e-10);
        let scores: Vec<f64> = c.iter().map(|r| (0..d).map(|j| r[j] * vecs[j][e]).sum()).collect();
        let got = pca.projected.column_values(k);
        let same: f64 = got.iter().zip(&scores).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let flipped: f64 = got.iter().zip(&scores).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max);
        assert!(same.min(flipped) < 1e-8, "component {k}");
    }
    assert!((pca.explained_ratio.iter().sum::<f64>() - 1.0).abs() < 1e-10);
}

#[test]
fn pca_of_collinear_points() {
    let x = DenseMatrix::from_rows(&(0..10).map(|i| [i as f64, 2.0 * i as f64 + 1.0]).collect::<Vec<_>>()).unwrap();
    let pca = pca_project(&x, 1).unwrap();
    assert!(pca.explained_ratio[0] >= 1.0 - 1e-10);
    let lead = pca.components.row(0);
    assert!(lead[1] > 0.0 && lead[1].abs() >= lead[0].abs());
    assert!(matches!(pca_project(&x, 3), Err(Error::ComponentsOutOfRange { k: 3, max: 2 })));
    assert!(matches!(pca_project(&x, 0), Err(Error::ComponentsOutOfRange { .. })));
}

#[test]
fn pca_csv_layout() {
    let x = DenseMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0], [2.0, 2.0]]).unwrap();
    let pca = pca_project(&x, 2).unwrap();
    let mut buf = Vec::new();
    pca.write_csv(&mut buf, &[1.0, 2.0, 3.0], &["a".into(), "a".into(), "b".into()]).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("pc1,pc2,y,fidelity\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn dataset_invariants() {
    let x = DenseMatrix::column(&[1.0, 2.0]).unwrap();
    assert!(matches!(
        Dataset::new(vec!["a".into()], x.clone(), vec![1.0], vec![1, 1], vec!["1".into()]),
        Err(Error::DimensionMismatch { .. })
    ));
    let x2 = DenseMatrix::from_rows(&[[1.0, 2.0]]).unwrap();
    assert!(matches!(
        Dataset::new(vec!["a".into(), "a".into()], x2, vec![1.0], vec![1], vec!["1".into()]),
        Err(Error::DuplicateFeature(_))
    ));
}

proptest! {
    #[test]
    fn normalized_reference_values_span_unit_interval(values in prop::collection::vec(-1e6f64..1e6, 2..40)) {
        let ds = tiny(&values);
        let stats = fit_normalize(&ds, &NormalizationReference::AllRows).unwrap();
        let n = apply_normalize(&ds, &stats).unwrap();
        let col = n.x.column_values(0);
        prop_assert!(col.iter().chain(&n.y).all(|v| (0.0..=1.0).contains(v)));
        if values.iter().any(|v| *v != values[0]) {
            prop_assert!(col.contains(&0.0) && col.contains(&1.0));
            prop_assert!(n.y.contains(&0.0) && n.y.contains(&1.0));
        }
        let back = stats.inverse_target(&n.y);
        for (a, b) in back.iter().zip(&ds.y) {
            prop_assert!((a - b).abs() <= 1e-12 * (stats.target_max - stats.target_min).max(b.abs()).max(1.0));
        }
    }

    #[test]
    fn pca_ratios_are_sorted(seed in 0u64..500, n in 3usize..15, d in 1usize..6) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let x = DenseMatrix::from_row_major(n, d, (0..n * d).map(|_| r.random::<f64>()).collect()).unwrap();
        let k = (n - 1).min(d);
        let pca = pca_project(&x, k).unwrap();
        prop_assert!(pca.explained_ratio.iter().all(|v| *v >= 0.0));
        prop_assert!(pca.explained_ratio.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(pca.explained_ratio.iter().sum::<f64>() <= 1.0 + 1e-10);
    }
}
