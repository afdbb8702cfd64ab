use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use scmgan::data::{ColumnData, ColumnSchema, Table, TableSchema};
use scmgan::transform::{CodecKind, GmmModel, TableCodec, TransformError, STD_MULTIPLIER};

fn normals(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

#[test]
fn unit_gaussian_mixture_moments() {
    let values = normals(5000, 1);
    let gmm = GmmModel::fit(&values, 10, 2).unwrap();
    let mean: f64 = gmm.weights.iter().zip(&gmm.means).map(|(w, m)| w * m).sum();
    let second: f64 = (0..gmm.k())
        .map(|c| gmm.weights[c] * (gmm.stds[c].powi(2) + gmm.means[c].powi(2)))
        .sum();
    let std = (second - mean * mean).sqrt();
    assert!(mean.abs() < 0.05, "mixture mean {mean}");
    assert!((std - 1.0).abs() < 0.05, "mixture std {std}");
}

#[test]
fn separated_modes_are_recovered() {
    let noise = normals(4000, 3);
    let values: Vec<f64> = noise
        .iter()
        .enumerate()
        .map(|(i, e)| if i % 2 == 0 { -5.0 } else { 5.0 } + 0.1 * e)
        .collect();
    let gmm = GmmModel::fit(&values, 10, 4).unwrap();
    for sign in [-1.0, 1.0] {
        let (w, m) = (0..gmm.k())
            .filter(|&c| gmm.means[c].signum() == sign)
            .fold((0.0, 0.0), |(w, m), c| (w + gmm.weights[c], m + gmm.weights[c] * gmm.means[c]));
        assert!((w - 0.5).abs() < 0.02, "mode weight {w}");
        assert!((m / w - 5.0 * sign).abs() < 0.1, "mode mean {}", m / w);
    }
}

#[test]
fn constant_column_is_degenerate() {
    assert!(matches!(GmmModel::fit(&[2.0; 50], 10, 0), Err(TransformError::DegenerateColumn(_))));
}

fn random_table() -> impl Strategy<Value = Table> {
    (5usize..60, 1usize..4, 0usize..3, any::<u64>()).prop_map(|(n, n_cont, n_disc, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut schema = Vec::new();
        let mut columns = Vec::new();
        for c in 0..n_cont {
            schema.push(ColumnSchema::continuous(format!("c{c}")));
            let spread = rng.random_range(0.1..10.0);
            let v: Vec<f64> = (0..n)
                .map(|_| rng.random_range(-3.0..3.0) * spread + if rng.random_bool(0.5) { 20.0 } else { 0.0 })
                .collect();
            columns.push(ColumnData::Continuous(v));
        }
        for c in 0..n_disc {
            let k = rng.random_range(1..5);
            schema.push(ColumnSchema::discrete(format!("d{c}"), (0..k).map(|i| format!("l{i}"))));
            columns.push(ColumnData::Discrete((0..n).map(|_| rng.random_range(0..k)).collect()));
        }
        Table::new(TableSchema::new(schema).unwrap(), columns).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn em_never_decreases(seed in any::<u64>(), n in 20usize..300, k in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0) * rng.random_range(0.5..4.0)).collect();
        let fit = GmmModel::fit_traced(&values, k, seed).unwrap();
        for w in fit.log_likelihood.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-9, "{} -> {}", w[0], w[1]);
        }
        let sum: f64 = fit.model.weights.iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-9);
        prop_assert!(fit.model.stds.iter().all(|&s| s > 0.0));
        for &x in values.iter().take(10) {
            let r: f64 = fit.model.responsibilities(x).iter().sum();
            prop_assert!((r - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn encode_decode_round_trip(table in random_table(), seed in any::<u64>()) {
        let codec = TableCodec::fit(&table, 10, seed).unwrap();
        let encoded = codec.encode(&table, seed ^ 1).unwrap();
        prop_assert_eq!(encoded.data.cols(), codec.width());
        let mut next = 0;
        for c in codec.codecs() {
            prop_assert_eq!(c.offset, next);
            next += c.width;
        }
        prop_assert_eq!(next, codec.width());
        let back = encoded.decode().unwrap();
        for (j, c) in codec.codecs().iter().enumerate() {
            match (&c.kind, table.column(j), back.column(j)) {
                (CodecKind::Continuous { gmm }, ColumnData::Continuous(a), ColumnData::Continuous(b)) => {
                    for r in 0..table.n_rows() {
                        let row = encoded.data.row(r);
                        let scalar = row[c.offset];
                        prop_assert!((-1.0..=1.0).contains(&scalar));
                        let mode = (0..gmm.k()).find(|&m| row[c.offset + 1 + m] == 1.0).unwrap();
                        let raw = (a[r] - gmm.means[mode]) / (STD_MULTIPLIER * gmm.stds[mode]);
                        if raw.abs() < 1.0 {
                            prop_assert!((a[r] - b[r]).abs() <= 1e-6 * a[r].abs().max(1.0));
                        }
                    }
                }
                (CodecKind::Discrete { .. }, ColumnData::Discrete(a), ColumnData::Discrete(b)) => {
                    prop_assert_eq!(a, b);
                    for r in 0..table.n_rows() {
                        let block = &encoded.data.row(r)[c.one_hot_range()];
                        prop_assert_eq!(block.iter().filter(|&&v| v == 1.0).count(), 1);
                        prop_assert_eq!(block.iter().sum::<f64>(), 1.0);
                    }
                }
                _ => prop_assert!(false, "column kind changed"),
            }
        }
    }

    #[test]
    fn encoding_is_deterministic(table in random_table(), seed in any::<u64>()) {
        let codec = TableCodec::fit(&table, 10, seed).unwrap();
        prop_assert_eq!(codec.encode(&table, 9).unwrap().data, codec.encode(&table, 9).unwrap().data);
    }
}
