//! Acceptance suite: one PASS/FAIL/SKIP line per criterion.
//!
//! Environment:
//! - `SCMGAN_SKIP_GAN=1` skips the two long asia training criteria.
//! - `SCMGAN_ADULT_CSV=path` (with optional `SCMGAN_ADULT_TARGET`) enables the
//!   informative adult run.
//! - `SCMGAN_ACCEPTANCE_STRICT=1` exits non-zero when a gating criterion fails.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use scmgan::bayes_net::asia;
use scmgan::data::{load_csv, split_rows, ColumnData, ColumnSchema, SchemaSource, Table, TableSchema};
use scmgan::discovery::{discover, DEFAULT_MAX_COND};
use scmgan::evaluate::models::{
    accuracy, DecisionTree, LogisticRegression, LOGISTIC_EPOCHS, LOGISTIC_LR, TREE_MAX_DEPTH,
};
use scmgan::evaluate::{cs_score, ks_score, ml_efficacy, similarity};
use scmgan::gan::{
    build_generator, discriminator_step, fit, generator_loss, Discriminator, NoiseSpec, SampleMode, TrainConfig,
};
use scmgan::graph::CausalGraph;
use scmgan::transform::{CodecKind, GmmModel, TableCodec};

// Tolerances pinned from the criteria.
const IDENTITY_LL: f64 = -2.24;
const IDENTITY_TOL: f64 = 0.05;
const GAN_LL_FLOOR: f64 = -2.60;
const GAN_SEEDS_REQUIRED: usize = 3;
const GAN_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
const STRUCTURE_GAIN: f64 = 0.10;
const GRAD_REL_TOL: f64 = 1e-4;
const GRAD_COORDS: usize = 100;
const ROUND_TRIP_TOL: f64 = 1e-6;
const EM_SLACK: f64 = 1e-9;
const MODE_MEAN_TOL: f64 = 0.1;
const DISCOVERY_RATE: f64 = 0.95;
const KS_ANALYTIC: f64 = 0.803;
const KS_TOL: f64 = 0.03;
const EFFICACY_TOL: f64 = 0.02;

#[derive(Clone, Copy, PartialEq)]
enum Outcome {
    Pass,
    Fail,
    Skip,
}

struct Suite {
    results: Vec<(usize, Outcome)>,
}

impl Suite {
    fn record(&mut self, id: usize, title: &str, outcome: Outcome, detail: String, start: Instant) {
        let tag = match outcome {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Skip => "SKIP",
        };
        println!(
            "[{tag}] criterion {id:>2}: {title} | {detail} ({:.1}s)",
            start.elapsed().as_secs_f64()
        );
        self.results.push((id, outcome));
    }
}

fn pass_if(ok: bool) -> Outcome {
    if ok {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn criterion_identity(s: &mut Suite) {
    let t = Instant::now();
    let bn = asia();
    let data = bn.ancestral_sample(10_000, 2024);
    let ll = bn.log_likelihood(&data).unwrap();
    s.record(
        1,
        "identity oracle log-likelihood on asia",
        pass_if((ll.mean - IDENTITY_LL).abs() <= IDENTITY_TOL),
        format!("mean {:.4} (target {IDENTITY_LL} ± {IDENTITY_TOL})", ll.mean),
        t,
    );
}

/// Trains on 10,000 asia rows and returns the floored and strict oracle
/// log-likelihood of 10,000 synthetic rows.
fn asia_run(seed: u64, edgeless: bool) -> (f64, f64, usize) {
    let bn = asia();
    let data = bn.ancestral_sample(10_000, 1000 + seed);
    let graph = if edgeless {
        CausalGraph::empty(bn.graph().names().to_vec()).unwrap()
    } else {
        bn.graph().clone()
    };
    let cfg = TrainConfig {
        seed,
        ..TrainConfig::default()
    };
    let (model, _) = fit(&data, &graph, &cfg).unwrap();
    let synth = model.sample(10_000, 5000 + seed).unwrap();
    let ll = bn.log_likelihood(&synth).unwrap();
    (ll.floored_mean, ll.mean, ll.zero_prob_rows)
}

fn criteria_asia_gan(s: &mut Suite) {
    if std::env::var_os("SCMGAN_SKIP_GAN").is_some() {
        let t = Instant::now();
        s.record(2, "asia true-graph training", Outcome::Skip, "SCMGAN_SKIP_GAN set".into(), t);
        s.record(3, "causal structure benefit", Outcome::Skip, "SCMGAN_SKIP_GAN set".into(), t);
        return;
    }
    let t2 = Instant::now();
    let mut true_ll = Vec::new();
    let mut detail = Vec::new();
    for &seed in &GAN_SEEDS {
        let run = Instant::now();
        let (floored, strict, zeros) = asia_run(seed, false);
        println!(
            "    true graph seed {seed}: oracle_ll {floored:.4} (strict {strict:.4}, {zeros} zero-probability rows, {:.0}s)",
            run.elapsed().as_secs_f64()
        );
        detail.push(format!("{floored:.3}"));
        true_ll.push(floored);
    }
    let passing = true_ll.iter().filter(|&&v| v >= GAN_LL_FLOOR).count();
    s.record(
        2,
        "asia true-graph synthetic oracle log-likelihood",
        pass_if(passing >= GAN_SEEDS_REQUIRED),
        format!(
            "{passing}/5 seeds ≥ {GAN_LL_FLOOR} (need {GAN_SEEDS_REQUIRED}); per seed [{}]",
            detail.join(", ")
        ),
        t2,
    );

    let t3 = Instant::now();
    let mut gains = Vec::new();
    for (i, &seed) in GAN_SEEDS.iter().enumerate() {
        let run = Instant::now();
        let (floored, strict, zeros) = asia_run(seed, true);
        println!(
            "    edgeless seed {seed}: oracle_ll {floored:.4} (strict {strict:.4}, {zeros} zero-probability rows, {:.0}s)",
            run.elapsed().as_secs_f64()
        );
        gains.push(true_ll[i] - floored);
    }
    let mut sorted = gains.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    s.record(
        3,
        "true graph beats edgeless graph (median gain)",
        pass_if(median >= STRUCTURE_GAIN),
        format!(
            "median gain {median:.4} nats (need ≥ {STRUCTURE_GAIN}); gains [{}]",
            gains.iter().map(|g| format!("{g:.3}")).collect::<Vec<_>>().join(", ")
        ),
        t3,
    );
}

fn criterion_gradients(s: &mut Suite) {
    let t = Instant::now();
    let codec = TableCodec::from_kinds(vec![
        (
            "a".into(),
            CodecKind::Continuous {
                gmm: GmmModel {
                    weights: vec![0.3, 0.7],
                    means: vec![-2.0, 1.0],
                    stds: vec![0.4, 0.9],
                },
            },
        ),
        (
            "b".into(),
            CodecKind::Discrete {
                categories: names(&["p", "q", "r"]),
            },
        ),
        (
            "c".into(),
            CodecKind::Discrete {
                categories: names(&["0", "1"]),
            },
        ),
    ])
    .unwrap();
    let graph = CausalGraph::from_edges(names(&["a", "b", "c"]), &[(0, 1), (0, 2), (1, 2)]).unwrap();
    let mut gen = build_generator(&graph, &codec, NoiseSpec::default(), &[12, 12], 0.2, 77).unwrap();
    let mut disc = Discriminator::new(gen.width(), &[24, 24], 78);
    let mut rng = ChaCha8Rng::seed_from_u64(79);
    let noise = gen.sample_noise(8, &mut rng);
    let real = gen.generate(8, 80, SampleMode::Hard).unwrap().data;
    let cache = gen.forward(&noise, SampleMode::Soft).unwrap();
    let fake = cache.output.clone();
    let (_, g_fake) = generator_loss(&disc, &cache.output);
    let g_grads = gen.backward(&cache, &g_fake).unwrap();
    let (_, d_grads, _, _) = discriminator_step(&disc, &real, &fake);
    let d_flat = d_grads.flat();

    let h = 1e-5;
    let rel = |a: f64, n: f64| (a - n).abs() / a.abs().max(n.abs()).max(1e-6);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for i in 0..GRAD_COORDS + 20 {
        if i % 2 == 0 {
            let node = rng.random_range(0..gen.mechanisms.len());
            let flat = g_grads.mechanisms[node].flat();
            let k = rng.random_range(0..flat.len());
            let orig = *gen.mechanisms[node].mlp.param_mut(k);
            let mut eval = |v: f64| {
                *gen.mechanisms[node].mlp.param_mut(k) = v;
                generator_loss(&disc, &gen.forward(&noise, SampleMode::Soft).unwrap().output).0
            };
            let numeric = (eval(orig + h) - eval(orig - h)) / (2.0 * h);
            *gen.mechanisms[node].mlp.param_mut(k) = orig;
            worst = worst.max(rel(flat[k], numeric));
        } else {
            let k = rng.random_range(0..d_flat.len());
            let orig = *disc.mlp.param_mut(k);
            *disc.mlp.param_mut(k) = orig + h;
            let up = discriminator_step(&disc, &real, &fake).0;
            *disc.mlp.param_mut(k) = orig - h;
            let down = discriminator_step(&disc, &real, &fake).0;
            *disc.mlp.param_mut(k) = orig;
            worst = worst.max(rel(d_flat[k], (up - down) / (2.0 * h)));
        }
        count += 1;
    }
    s.record(
        4,
        "analytic vs central-difference gradients",
        pass_if(count >= GRAD_COORDS && worst < GRAD_REL_TOL),
        format!("{count} coordinates, worst relative error {worst:.2e} (need < {GRAD_REL_TOL:.0e})"),
        t,
    );
}

fn random_table(rng: &mut ChaCha8Rng) -> Table {
    let n = rng.random_range(30..200);
    let n_cols = rng.random_range(1..5);
    let mut schema = Vec::new();
    let mut columns = Vec::new();
    for c in 0..n_cols {
        if rng.random_bool(0.5) {
            let modes = rng.random_range(1..4);
            let centers: Vec<f64> = (0..modes).map(|_| rng.random_range(-20.0..20.0)).collect();
            let values = (0..n)
                .map(|_| {
                    let m = centers[rng.random_range(0..modes)];
                    m + rng.sample::<f64, _>(StandardNormal) * rng.random_range(0.1..3.0)
                })
                .collect();
            schema.push(ColumnSchema::continuous(format!("c{c}")));
            columns.push(ColumnData::Continuous(values));
        } else {
            let k = rng.random_range(2..6);
            let cats: Vec<String> = (0..k).map(|i| format!("v{i}")).collect();
            schema.push(ColumnSchema::discrete(format!("c{c}"), cats));
            columns.push(ColumnData::Discrete((0..n).map(|_| rng.random_range(0..k)).collect()));
        }
    }
    Table::new(TableSchema::new(schema).unwrap(), columns).unwrap()
}

fn criterion_round_trip(s: &mut Suite) {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let mut discrete_ok = true;
    let mut checked = 0usize;
    for i in 0..100 {
        let table = random_table(&mut rng);
        let codec = TableCodec::fit(&table, 10, i).unwrap();
        let enc = codec.encode(&table, i + 1).unwrap();
        let back = enc.decode().unwrap();
        for (c, cc) in codec.codecs().iter().enumerate() {
            match (table.column(c), back.column(c)) {
                (ColumnData::Continuous(a), ColumnData::Continuous(b)) => {
                    for r in 0..table.n_rows() {
                        if enc.data.get(r, cc.offset).abs() < 1.0 {
                            worst = worst.max((a[r] - b[r]).abs());
                            checked += 1;
                        }
                    }
                }
                (a, b) => discrete_ok &= a == b,
            }
        }
    }
    s.record(
        5,
        "transform round trip on 100 random tables",
        pass_if(discrete_ok && worst <= ROUND_TRIP_TOL),
        format!("discrete exact: {discrete_ok}; {checked} clamp-free cells, max error {worst:.2e}"),
        t,
    );
}

fn criterion_em(s: &mut Suite) {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_drop: f64 = 0.0;
    for i in 0..50 {
        let n = rng.random_range(50..600);
        let modes = rng.random_range(1..5);
        let centers: Vec<f64> = (0..modes).map(|_| rng.random_range(-10.0..10.0)).collect();
        let values: Vec<f64> = (0..n)
            .map(|_| centers[rng.random_range(0..modes)] + rng.sample::<f64, _>(StandardNormal))
            .collect();
        let trace = GmmModel::fit_traced(&values, 10, i).unwrap().log_likelihood;
        for w in trace.windows(2) {
            worst_drop = worst_drop.max(w[0] - w[1]);
        }
    }
    // Equal mixture at ±5 with std 0.1. Pruning is by weight only, so a mode
    // may be covered by several overlapping components; each mode is judged
    // by its weight-averaged mean and by its heaviest component.
    let values: Vec<f64> = (0..4000)
        .map(|i| if i % 2 == 0 { -5.0 } else { 5.0 } + 0.1 * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let gmm = GmmModel::fit(&values, 10, 3).unwrap();
    let side = |sign: f64| -> (f64, f64, f64) {
        let comps: Vec<(f64, f64)> = gmm
            .means
            .iter()
            .zip(&gmm.weights)
            .filter(|(m, _)| m.signum() == sign)
            .map(|(&m, &w)| (m, w))
            .collect();
        let weight: f64 = comps.iter().map(|c| c.1).sum();
        let mean = comps.iter().map(|c| c.0 * c.1).sum::<f64>() / weight;
        let heaviest = comps.iter().max_by(|a, b| a.1.total_cmp(&b.1)).map_or(f64::NAN, |c| c.0);
        (weight, mean, heaviest)
    };
    let (lo, hi) = (side(-1.0), side(1.0));
    let recovered = [(lo, -5.0), (hi, 5.0)].iter().all(|&((w, mean, heavy), target)| {
        (w - 0.5).abs() < 0.05 && (mean - target).abs() < MODE_MEAN_TOL && (heavy - target).abs() < MODE_MEAN_TOL
    });
    s.record(
        6,
        "EM monotonicity and two-mode recovery",
        pass_if(worst_drop <= EM_SLACK && recovered),
        format!(
            "largest per-iteration decrease {worst_drop:.2e} over 50 datasets; ±5 mixture: k = {}, \
             mode means {:.4}/{:.4}, heaviest components {:.4}/{:.4}, weights {:.3}/{:.3}",
            gmm.k(),
            lo.1,
            hi.1,
            lo.2,
            hi.2,
            lo.0,
            hi.0
        ),
        t,
    );
}

fn linear_gaussian(n: usize, seed: u64, collider: bool) -> Table {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut e = || rng.sample::<f64, _>(StandardNormal);
    let mut cols = (0..3).map(|_| Vec::with_capacity(n)).collect::<Vec<_>>();
    for _ in 0..n {
        let (x, y, z);
        if collider {
            x = e();
            y = e();
            z = 0.8 * x + 0.8 * y + e();
        } else {
            x = e();
            y = 0.8 * x + e();
            z = 0.8 * y + e();
        }
        cols[0].push(x);
        cols[1].push(y);
        cols[2].push(z);
    }
    let schema = TableSchema::new(vec![
        ColumnSchema::continuous("x"),
        ColumnSchema::continuous("y"),
        ColumnSchema::continuous("z"),
    ])
    .unwrap();
    Table::new(schema, cols.into_iter().map(ColumnData::Continuous).collect()).unwrap()
}

fn criterion_discovery(s: &mut Suite) {
    let t = Instant::now();
    let (mut collider_ok, mut chain_ok) = (0, 0);
    for seed in 0..20 {
        let d = discover(&linear_gaussian(5000, seed, true), 0.01, DEFAULT_MAX_COND).unwrap();
        if d.cpdag.directed_edges() == vec![(0, 2), (1, 2)] && d.cpdag.undirected_edges().is_empty() {
            collider_ok += 1;
        }
        let d = discover(&linear_gaussian(5000, 100 + seed, false), 0.01, DEFAULT_MAX_COND).unwrap();
        if d.cpdag.directed_edges().is_empty() && d.cpdag.undirected_edges() == vec![(0, 1), (1, 2)] {
            chain_ok += 1;
        }
    }
    let need = (DISCOVERY_RATE * 20.0).ceil() as usize;
    s.record(
        7,
        "PC recovery of collider and chain",
        pass_if(collider_ok >= need && chain_ok >= need),
        format!("collider {collider_ok}/20, chain {chain_ok}/20 (need {need} each)"),
        t,
    );
}

fn criterion_metrics(s: &mut Suite) {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let col: Vec<f64> = (0..1000).map(|_| rng.sample(StandardNormal)).collect();
    let labels: Vec<usize> = (0..1000).map(|_| rng.random_range(0..4)).collect();
    let ks_self = ks_score(&col, &col).unwrap();
    let cs_self = cs_score(&labels, &labels).unwrap();
    let a: Vec<f64> = (0..10_000).map(|_| rng.sample(StandardNormal)).collect();
    let b: Vec<f64> = (0..10_000).map(|_| 0.5 + rng.sample::<f64, _>(StandardNormal)).collect();
    let ks_shift = ks_score(&a, &b).unwrap();
    s.record(
        8,
        "metric sanity",
        pass_if(ks_self == 1.0 && cs_self == 1.0 && (ks_shift - KS_ANALYTIC).abs() <= KS_TOL),
        format!("ks(self) {ks_self}, cs(self) {cs_self}, ks(N(0,1), N(0.5,1)) {ks_shift:.4} vs {KS_ANALYTIC} ± {KS_TOL}"),
        t,
    );
}

fn efficacy_table(n: usize, seed: u64) -> Table {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x1 = Vec::new();
    let mut x2 = Vec::new();
    let mut g = Vec::new();
    let mut y = Vec::new();
    for _ in 0..n {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.random_range(-2.0..2.0);
        let c = rng.random_range(0..3usize);
        let score = a - 0.5 * b + [0.0, 0.8, -0.8][c] + 0.7 * rng.sample::<f64, _>(StandardNormal);
        x1.push(a);
        x2.push(b);
        g.push(c);
        y.push(if score > 0.4 { 2 } else if score > -0.4 { 1 } else { 0 });
    }
    let schema = TableSchema::new(vec![
        ColumnSchema::continuous("x1"),
        ColumnSchema::continuous("x2"),
        ColumnSchema::discrete("g", ["a", "b", "c"]),
        ColumnSchema::discrete("y", ["lo", "mid", "hi"]),
    ])
    .unwrap();
    Table::new(
        schema,
        vec![
            ColumnData::Continuous(x1),
            ColumnData::Continuous(x2),
            ColumnData::Discrete(g),
            ColumnData::Discrete(y),
        ],
    )
    .unwrap()
}

/// Hand-rolled features: z-scored continuous columns (training statistics)
/// and one-hot of `g`, in schema order.
fn direct_features(train: &Table, t: &Table) -> Vec<f64> {
    let stats = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let sd = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt();
        (m, sd)
    };
    let (m1, s1) = stats(train.column(0).as_continuous().unwrap());
    let (m2, s2) = stats(train.column(1).as_continuous().unwrap());
    let x1 = t.column(0).as_continuous().unwrap();
    let x2 = t.column(1).as_continuous().unwrap();
    let g = t.column(2).as_discrete().unwrap();
    (0..t.n_rows())
        .flat_map(|r| {
            let mut row = vec![(x1[r] - m1) / s1, (x2[r] - m2) / s2, 0.0, 0.0, 0.0];
            row[2 + g[r]] = 1.0;
            row
        })
        .collect()
}

fn criterion_efficacy(s: &mut Suite) {
    let t = Instant::now();
    let real = efficacy_table(4000, 9);
    let (train, test) = split_rows(&real, 0.5, 10).unwrap();
    let report = ml_efficacy(&train, &test, "y").unwrap();

    // Category order of `y` is lo, mid, hi in both halves and in the label union
    // (sorted: hi, lo, mid), so map codes through labels.
    let classes = ["hi", "lo", "mid"];
    let to_class = |tab: &Table| -> Vec<usize> {
        tab.labels(3).unwrap().iter().map(|l| classes.iter().position(|c| c == l).unwrap()).collect()
    };
    let (xtr, xte) = (direct_features(&train, &train), direct_features(&train, &test));
    let (ytr, yte) = (to_class(&train), to_class(&test));
    let tree = DecisionTree::fit_classifier(&xtr, 5, &ytr, 3, TREE_MAX_DEPTH);
    let logit = LogisticRegression::fit(&xtr, 5, &ytr, 3, LOGISTIC_EPOCHS, LOGISTIC_LR);
    let direct = [
        accuracy(&tree.predict_classes(&xte), &yte),
        accuracy(&logit.predict_classes(&xte), &yte),
    ];
    let gaps: Vec<f64> = report.scores.iter().zip(direct).map(|((_, h), d)| (h - d).abs()).collect();
    let worst = gaps.iter().cloned().fold(0.0, f64::max);
    s.record(
        9,
        "efficacy harness self-consistency",
        pass_if(worst <= EFFICACY_TOL),
        format!(
            "harness {:?} vs direct [{:.4}, {:.4}], max gap {worst:.4}",
            report.scores.iter().map(|(m, v)| format!("{m}={v:.4}")).collect::<Vec<_>>(),
            direct[0],
            direct[1]
        ),
        t,
    );
}

fn criterion_adult(s: &mut Suite) {
    let t = Instant::now();
    let Some(path) = std::env::var_os("SCMGAN_ADULT_CSV") else {
        s.record(
            10,
            "adult extended run (informative)",
            Outcome::Skip,
            "set SCMGAN_ADULT_CSV to run".into(),
            t,
        );
        return;
    };
    let real = load_csv(&path, SchemaSource::Infer).unwrap();
    let (train, _) = split_rows(&real, 0.8, 1).unwrap();
    let graph = discover(&train, 0.01, DEFAULT_MAX_COND).unwrap().dag;
    let (model, _) = fit(&train, &graph, &TrainConfig::default()).unwrap();
    let synth = model.sample(train.n_rows(), 2).unwrap();
    let sim = similarity(&train, &synth).unwrap();
    let (cs, ks) = (sim.cs_average.unwrap_or(f64::NAN), sim.ks_average.unwrap_or(f64::NAN));
    let target_note = std::env::var("SCMGAN_ADULT_TARGET")
        .ok()
        .and_then(|t| ml_efficacy(&synth, &real, &t).ok())
        .map(|e| format!(", efficacy {:.4}", e.average))
        .unwrap_or_default();
    s.record(
        10,
        "adult extended run (informative)",
        pass_if(cs >= 0.80 && ks >= 0.70),
        format!("CS {cs:.4} (≥ 0.80), KS {ks:.4} (≥ 0.70){target_note}"),
        t,
    );
}

fn main() {
    let mut suite = Suite { results: Vec::new() };
    criterion_identity(&mut suite);
    criterion_gradients(&mut suite);
    criterion_round_trip(&mut suite);
    criterion_em(&mut suite);
    criterion_discovery(&mut suite);
    criterion_metrics(&mut suite);
    criterion_efficacy(&mut suite);
    criterion_adult(&mut suite);
    criteria_asia_gan(&mut suite);

    suite.results.sort_by_key(|r| r.0);
    let gating: Vec<_> = suite.results.iter().filter(|r| r.0 != 10).collect();
    let passed = gating.iter().filter(|r| r.1 == Outcome::Pass).count();
    let failed = gating.iter().filter(|r| r.1 == Outcome::Fail).count();
    let skipped = gating.iter().filter(|r| r.1 == Outcome::Skip).count();
    println!("acceptance: {passed} passed, {failed} failed, {skipped} skipped (criterion 10 is informative)");
    if failed > 0 && std::env::var_os("SCMGAN_ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
