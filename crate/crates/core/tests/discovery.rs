use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use scmgan::data::{ColumnData, ColumnSchema, Table, TableSchema};
use scmgan::discovery::{
    cpdag_to_dag, discover, orient, pc_skeleton, surrogate_correlation, Cpdag, DiscoveryError, DEFAULT_ALPHA,
    DEFAULT_MAX_COND,
};

fn continuous_table(cols: Vec<Vec<f64>>) -> Table {
    let schema = TableSchema::new((0..cols.len()).map(|i| ColumnSchema::continuous(format!("x{i}"))).collect()).unwrap();
    Table::new(schema, cols.into_iter().map(ColumnData::Continuous).collect()).unwrap()
}

/// Linear-Gaussian SCM over `d` nodes in index order. Each forward pair is an
/// edge with probability 0.4 and weight ±U(0.5, 1.0).
fn random_scm(d: usize, n: usize, seed: u64) -> (Vec<(usize, usize)>, Table) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = vec![vec![0.0; d]; d];
    let mut edges = Vec::new();
    for j in 0..d {
        for i in 0..j {
            if rng.random_bool(0.4) {
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                weights[i][j] = sign * rng.random_range(0.5..1.0);
                edges.push((i, j));
            }
        }
    }
    let mut cols = vec![vec![0.0; n]; d];
    for r in 0..n {
        for j in 0..d {
            let e: f64 = rng.sample(StandardNormal);
            cols[j][r] = e + (0..j).map(|i| weights[i][j] * cols[i][r]).sum::<f64>();
        }
    }
    (edges, continuous_table(cols))
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

#[test]
fn skeleton_hamming_distance_on_random_scms() {
    let runs = 500;
    let mut total = 0usize;
    for seed in 0..runs {
        let (edges, table) = random_scm(5, 5000, seed);
        let skel = pc_skeleton(&surrogate_correlation(&table).unwrap(), DEFAULT_ALPHA, DEFAULT_MAX_COND).unwrap();
        for i in 0..5 {
            for j in i + 1..5 {
                total += usize::from(skel.adjacent(i, j) != edges.contains(&(i, j)));
            }
        }
    }
    let mean = total as f64 / runs as f64;
    assert!(mean <= 1.0, "mean skeleton SHD {mean}");
}

#[test]
fn linear_pair_matches_pearson() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let x: Vec<f64> = (0..2000).map(|_| rng.sample(StandardNormal)).collect();
    let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 0.1 * rng.sample::<f64, _>(StandardNormal)).collect();
    let r = pearson(&x, &y);
    let corr = surrogate_correlation(&continuous_table(vec![x, y])).unwrap();
    assert!(corr.get(0, 1) > 0.95);
    assert!((corr.get(0, 1) - r).abs() < 1e-6, "{} vs {r}", corr.get(0, 1));
    assert_eq!(corr.get(0, 0), 1.0);
}

#[test]
fn independent_uniforms_are_uncorrelated() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cols: Vec<Vec<f64>> = (0..2).map(|_| (0..5000).map(|_| rng.random::<f64>()).collect()).collect();
    let corr = surrogate_correlation(&continuous_table(cols)).unwrap();
    assert!(corr.get(0, 1).abs() < 0.05);
}

#[test]
fn independent_columns_give_empty_skeleton() {
    let empty = (0..20u64)
        .filter(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cols = (0..3).map(|_| (0..5000).map(|_| rng.sample(StandardNormal)).collect()).collect();
            let skel = pc_skeleton(&surrogate_correlation(&continuous_table(cols)).unwrap(), 0.01, 3).unwrap();
            skel.edges().is_empty()
        })
        .count();
    assert!(empty >= 19, "{empty}/20 empty");
}

#[test]
fn mixed_columns_give_valid_correlation() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 3000;
    let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let d: Vec<usize> = x.iter().map(|v| if *v > 0.5 { 2 } else if *v > -0.5 { 1 } else { 0 }).collect();
    let e: Vec<usize> = (0..n).map(|_| rng.random_range(0..2)).collect();
    let schema = TableSchema::new(vec![
        ColumnSchema::continuous("x"),
        ColumnSchema::discrete("d", ["lo", "mid", "hi"]),
        ColumnSchema::discrete("e", ["a", "b"]),
    ])
    .unwrap();
    let t = Table::new(schema, vec![ColumnData::Continuous(x), ColumnData::Discrete(d), ColumnData::Discrete(e)]).unwrap();
    let corr = surrogate_correlation(&t).unwrap();
    for i in 0..3 {
        assert_eq!(corr.get(i, i), 1.0);
        for j in 0..3 {
            assert!((corr.get(i, j) - corr.get(j, i)).abs() <= 1e-12);
            assert!((-1.0..=1.0).contains(&corr.get(i, j)));
        }
    }
    assert!(corr.get(0, 1).abs() > 0.8);
    assert!(corr.get(0, 2).abs() < 0.1);
    assert!(corr.matrix.clone().symmetric_eigen().eigenvalues.min() > -1e-8);
}

#[test]
fn constant_column_is_rejected() {
    let t = continuous_table(vec![(0..50).map(f64::from).collect(), vec![1.0; 50]]);
    assert!(matches!(discover(&t, 0.01, 3), Err(DiscoveryError::DegenerateColumn(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn level_zero_removals_are_monotone_in_alpha(seed in any::<u64>(), hi in 0.02f64..0.5, frac in 0.01f64..1.0) {
        let lo = hi * frac;
        let (_, table) = random_scm(5, 300, seed);
        let corr = surrogate_correlation(&table).unwrap();
        let at_hi = pc_skeleton(&corr, hi, 0).unwrap();
        let at_lo = pc_skeleton(&corr, lo, 0).unwrap();
        for i in 0..5 {
            for j in i + 1..5 {
                if !at_hi.adjacent(i, j) {
                    prop_assert!(!at_lo.adjacent(i, j), "({i},{j}) removed at {hi} but kept at {lo}");
                }
            }
        }
    }

    #[test]
    fn removed_edges_and_colliders_cite_sepsets(seed in any::<u64>()) {
        let (_, table) = random_scm(6, 500, seed);
        let found = discover(&table, 0.05, 3).unwrap();
        for i in 0..6 {
            for j in i + 1..6 {
                prop_assert_eq!(found.skeleton.adjacent(i, j), found.skeleton.sepset(i, j).is_none());
            }
        }
        for &(a, c, b) in &found.cpdag.v_structures {
            prop_assert!(!found.skeleton.sepset(a, b).unwrap().contains(&c));
        }
        let undirected = found.cpdag.undirected_edges();
        for (a, b) in found.cpdag.directed_edges() {
            prop_assert!(!found.cpdag.is_directed(b, a));
            prop_assert!(!undirected.contains(&(a.min(b), a.max(b))));
        }
    }

    #[test]
    fn extension_keeps_directed_edges(seed in any::<u64>(), d in 2usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut directed = Vec::new();
        let mut undirected = Vec::new();
        for j in 0..d {
            for i in 0..j {
                if rng.random_bool(0.5) {
                    if rng.random_bool(0.5) { directed.push((i, j)) } else { undirected.push((i, j)) }
                }
            }
        }
        let names: Vec<String> = (0..d).map(|i| format!("v{i}")).collect();
        let ext = cpdag_to_dag(&Cpdag::from_edges(names, &directed, &undirected));
        prop_assert_eq!(ext.dag.n_edges(), directed.len() + undirected.len());
        for &(a, b) in &undirected {
            prop_assert!(ext.dag.has_edge(a, b) || ext.dag.has_edge(b, a));
        }
        if !ext.fallback {
            for &(a, b) in &directed {
                prop_assert!(ext.dag.has_edge(a, b));
            }
        }
    }

    #[test]
    fn cpdag_of_a_dag_extends_to_an_equivalent_dag(seed in any::<u64>()) {
        let (_, table) = random_scm(5, 2000, seed);
        let found = discover(&table, 0.01, 3).unwrap();
        let skeleton_edges = found.skeleton.edges();
        prop_assert_eq!(found.dag.n_edges(), skeleton_edges.len());
        let again = orient(&found.skeleton);
        prop_assert_eq!(again.directed_edges(), found.cpdag.directed_edges());
    }
}
