use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Discriminator, GanError, GeneratorCache, SampleMode, ScmGenerator, TrainConfig};
use crate::nn::{sigmoid, softplus, Adam, Matrix, MlpGrads};
use crate::transform::EncodedMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub d_loss: f64,
    pub g_loss: f64,
    /// Mean discriminator output on real rows.
    pub d_real: f64,
    /// Mean discriminator output on generated rows.
    pub d_fake: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochStats>,
}

impl TrainHistory {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,d_loss,g_loss,d_real,d_fake\n");
        for s in &self.epochs {
            out.push_str(&format!("{},{},{},{},{}\n", s.epoch, s.d_loss, s.g_loss, s.d_real, s.d_fake));
        }
        out
    }
}

/// Discriminator loss `mean softplus(-l_real) + mean softplus(l_fake)`, i.e.
/// the negated GAN value, with its parameter gradients and the mean
/// probabilities assigned to each batch.
pub fn discriminator_step(disc: &Discriminator, real: &Matrix, fake: &Matrix) -> (f64, MlpGrads, f64, f64) {
    let real_cache = disc.mlp.forward(real);
    let fake_cache = disc.mlp.forward(fake);
    let (mr, mf) = (real.rows() as f64, fake.rows() as f64);
    let lr = real_cache.output.as_slice();
    let lf = fake_cache.output.as_slice();
    let loss = lr.iter().map(|&l| softplus(-l)).sum::<f64>() / mr + lf.iter().map(|&l| softplus(l)).sum::<f64>() / mf;
    let d_real = lr.iter().map(|&l| sigmoid(l)).sum::<f64>() / mr;
    let d_fake = lf.iter().map(|&l| sigmoid(l)).sum::<f64>() / mf;

    let g_real = real_cache.output.map(|l| -sigmoid(-l) / mr);
    let g_fake = fake_cache.output.map(|l| sigmoid(l) / mf);
    let (gr, _) = disc.mlp.backward(&real_cache, &g_real, true);
    let (gf, _) = disc.mlp.backward(&fake_cache, &g_fake, true);
    let mut grads = gr.expect("requested");
    let gf = gf.expect("requested");
    for (a, b) in grads.layers.iter_mut().zip(&gf.layers) {
        a.weight.as_mut_slice().iter_mut().zip(b.weight.as_slice()).for_each(|(x, y)| *x += y);
        a.bias.iter_mut().zip(&b.bias).for_each(|(x, y)| *x += y);
    }
    (loss, grads, d_real, d_fake)
}

/// Non-saturating generator loss `mean softplus(-l_fake)` and its gradient
/// with respect to the generated rows. Discriminator parameters are not
/// differentiated.
pub fn generator_loss(disc: &Discriminator, fake: &Matrix) -> (f64, Matrix) {
    let cache = disc.mlp.forward(fake);
    let m = fake.rows() as f64;
    let loss = cache.output.as_slice().iter().map(|&l| softplus(-l)).sum::<f64>() / m;
    let g = cache.output.map(|l| -sigmoid(-l) / m);
    let (_, g_in) = disc.mlp.backward(&cache, &g, false);
    (loss, g_in)
}

/// Adversarial training with a 1:1 update ratio. Each iteration draws a real
/// minibatch and a soft-mode generated batch, updates the discriminator, then
/// updates the generator against the updated discriminator on the same
/// generated batch.
pub fn train(
    gen: &mut ScmGenerator,
    disc: &mut Discriminator,
    real: &EncodedMatrix,
    cfg: &TrainConfig,
) -> Result<TrainHistory, GanError> {
    cfg.validate(real.data.rows())?;
    if real.codec != gen.codec || real.data.cols() != gen.width() || disc.input_width() != gen.width() {
        return Err(GanError::SchemaMismatch(
            "training matrix, generator and discriminator disagree on the encoding".into(),
        ));
    }
    let n = real.data.rows();
    let batch = cfg.batch_size;
    let steps = n / batch;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut d_opt = Adam::new(disc.mlp.param_count(), cfg.lr, cfg.beta1, cfg.beta2, cfg.eps);
    let mut g_opts: Vec<Adam> = gen
        .mechanisms
        .iter()
        .map(|m| Adam::new(m.mlp.param_count(), cfg.lr, cfg.beta1, cfg.beta2, cfg.eps))
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = TrainHistory::default();

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut sums = [0.0; 4];
        for step in 0..steps {
            let real_batch = real.data.select_rows(&order[step * batch..(step + 1) * batch]);
            let noise = gen.sample_noise(batch, &mut rng);
            let cache: GeneratorCache = gen.forward(&noise, SampleMode::Soft)?;

            let (d_loss, d_grads, d_real, d_fake) = discriminator_step(disc, &real_batch, &cache.output);
            d_opt.step(&mut disc.mlp, &d_grads);

            let (g_loss, g_fake) = generator_loss(disc, &cache.output);
            let g_grads = gen.backward(&cache, &g_fake)?;
            for ((mech, opt), grads) in gen.mechanisms.iter_mut().zip(&mut g_opts).zip(&g_grads.mechanisms) {
                opt.step(&mut mech.mlp, grads);
            }

            if !(d_loss.is_finite() && g_loss.is_finite()) {
                return Err(GanError::NonFiniteLoss { epoch, d_loss, g_loss });
            }
            for (s, v) in sums.iter_mut().zip([d_loss, g_loss, d_real, d_fake]) {
                *s += v;
            }
        }
        let k = steps as f64;
        let stats = EpochStats {
            epoch,
            d_loss: sums[0] / k,
            g_loss: sums[1] / k,
            d_real: sums[2] / k,
            d_fake: sums[3] / k,
        };
        log::debug!(
            "epoch {epoch}: d_loss {:.4} g_loss {:.4} D(real) {:.3} D(fake) {:.3}",
            stats.d_loss,
            stats.g_loss,
            stats.d_real,
            stats.d_fake
        );
        history.epochs.push(stats);
    }
    Ok(history)
}
