//! Three-player adversarial training: loss construction on the tape,
//! simultaneous (or alternating) gradient steps, the per-epoch metric loop,
//! and post-hoc adversary training against a frozen encoder.

use crate::autodiff::{NodeId, Tape, Tensor};
use crate::data::LabeledDataset;
use crate::dynamics::Variant;
use crate::error::{Error, Result};
use crate::nn::{Activation, EpochMetrics, MlpModel, MlpSpec, OptKind, Optimizer, ParamNodes, Role};

/// Hyperparameters of one three-player run.
#[derive(Debug, Clone)]
pub struct ArlConfig {
    pub variant: Variant,
    pub alpha: f64,
    pub embedding_dim: usize,
    pub encoder_hidden: Vec<usize>,
    pub predictor_hidden: Vec<usize>,
    pub discriminator_hidden: Vec<usize>,
    pub activation: Activation,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub optimizer: OptKind,
    pub seed: u64,
    /// Update the discriminator before the encoder/predictor instead of
    /// stepping all three from gradients taken at the same point.
    pub alternating: bool,
}

impl Default for ArlConfig {
    fn default() -> Self {
        ArlConfig {
            variant: Variant::Maxent,
            alpha: 0.1,
            embedding_dim: 2,
            encoder_hidden: vec![8],
            predictor_hidden: vec![8],
            discriminator_hidden: vec![8],
            activation: Activation::Relu,
            epochs: 50,
            batch_size: 64,
            learning_rate: 1e-4,
            weight_decay: 0.0,
            optimizer: OptKind::adam_default(),
            seed: 0,
            alternating: false,
        }
    }
}

impl ArlConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0) {
            return Err(Error::Config(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if self.embedding_dim == 0 {
            return Err(Error::Config("embedding_dim must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config(format!(
                "learning_rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }

    /// Builds the three player networks; seeds are derived as
    /// seed, seed+1, seed+2 so players start decorrelated.
    pub fn build_models(
        &self,
        input_dim: usize,
        n_target: usize,
        m_sensitive: usize,
    ) -> Result<ArlModels> {
        self.validate()?;
        let spec = |input, hidden: &Vec<usize>, output, seed| MlpSpec {
            hidden_activation: self.activation,
            ..MlpSpec::new(input, hidden.clone(), output, seed)
        };
        let encoder = MlpModel::new(
            Role::Encoder,
            spec(input_dim, &self.encoder_hidden, self.embedding_dim, self.seed),
        )?;
        let predictor = MlpModel::new(
            Role::Predictor,
            spec(self.embedding_dim, &self.predictor_hidden, n_target, self.seed + 1),
        )?;
        let discriminator = MlpModel::new(
            Role::Discriminator,
            spec(
                self.embedding_dim,
                &self.discriminator_hidden,
                m_sensitive,
                self.seed + 2,
            ),
        )?;
        Ok(ArlModels {
            encoder,
            predictor,
            discriminator,
        })
    }

    pub fn build_optimizers(&self, models: &ArlModels) -> ArlOptimizers {
        let mk = |m: &MlpModel| {
            Optimizer::for_model(self.optimizer, self.learning_rate, self.weight_decay, m)
        };
        ArlOptimizers {
            encoder: mk(&models.encoder),
            predictor: mk(&models.predictor),
            discriminator: mk(&models.discriminator),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ArlModels {
    pub encoder: MlpModel,
    pub predictor: MlpModel,
    pub discriminator: MlpModel,
}

#[derive(Debug, Clone)]
pub struct ArlOptimizers {
    pub encoder: Optimizer,
    pub predictor: Optimizer,
    pub discriminator: Optimizer,
}

/// The three game losses plus the encoder's composite objective, as values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBundle {
    /// Discriminator cross-entropy on the sensitive attribute.
    pub v1: f64,
    /// Predictor cross-entropy on the target attribute.
    pub v2: f64,
    /// KL(discriminator posterior ‖ uniform), in nats.
    pub v3: f64,
    /// v2 − α·v1 (ml) or v2 + α·v3 (maxent).
    pub encoder_total: f64,
}

/// One-hot row per label; the selection mask for cross-entropy.
fn onehot(labels: &[usize], classes: usize) -> Tensor {
    let mut t = Tensor::zeros(labels.len(), classes);
    for (i, &l) in labels.iter().enumerate() {
        t.set(i, l, 1.0);
    }
    t
}

/// Mean cross-entropy of logit rows against integer labels, composed from
/// log-softmax (never softmax-then-log).
pub fn cross_entropy(tape: &mut Tape, logits: NodeId, labels: &[usize]) -> Result<NodeId> {
    let (rows, cols) = tape.value(logits).shape();
    if rows != labels.len() {
        return Err(Error::Invalid(format!(
            "cross_entropy: {} logit rows vs {} labels",
            rows,
            labels.len()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= cols) {
        return Err(Error::Invalid(format!(
            "cross_entropy: label {bad} out of range for {cols} classes"
        )));
    }
    let lsm = tape.log_softmax(logits);
    let mask = tape.leaf(onehot(labels, cols));
    let picked = tape.mul(lsm, mask)?;
    let total = tape.sum(picked);
    Ok(tape.scale(total, -1.0 / rows as f64))
}

/// Mean KL(softmax(logits) ‖ uniform) over rows:
/// ln m + (1/B)·Σᵢⱼ pᵢⱼ·ln pᵢⱼ with p from the stabilized log-softmax.
pub fn kl_to_uniform(tape: &mut Tape, logits: NodeId) -> Result<NodeId> {
    let (rows, cols) = tape.value(logits).shape();
    if cols < 2 {
        return Err(Error::Invalid(format!(
            "kl_to_uniform needs >= 2 classes, got {cols}"
        )));
    }
    let lsm = tape.log_softmax(logits);
    let p = tape.exp(lsm);
    let plogp = tape.mul(p, lsm)?;
    let total = tape.sum(plogp);
    let neg_entropy = tape.scale(total, 1.0 / rows as f64);
    let lnm = tape.leaf(Tensor::scalar((cols as f64).ln()));
    tape.add(neg_entropy, lnm)
}

/// Loss node ids on a shared tape for one forward pass.
pub struct LossNodes {
    pub v1: NodeId,
    pub v2: NodeId,
    pub v3: NodeId,
    pub encoder_total: NodeId,
}

impl LossNodes {
    pub fn values(&self, tape: &Tape) -> LossBundle {
        LossBundle {
            v1: tape.value(self.v1).data[0],
            v2: tape.value(self.v2).data[0],
            v3: tape.value(self.v3).data[0],
            encoder_total: tape.value(self.encoder_total).data[0],
        }
    }
}

/// Registered player parameters on one tape.
pub struct GameNodes {
    pub encoder: ParamNodes,
    pub predictor: ParamNodes,
    pub discriminator: ParamNodes,
}

/// Forward pass of all three players plus loss construction on `tape`.
pub fn compute_losses(
    tape: &mut Tape,
    models: &ArlModels,
    variant: Variant,
    alpha: f64,
    x: &Tensor,
    t: &[usize],
    s: &[usize],
) -> Result<(GameNodes, LossNodes)> {
    let input = tape.leaf(x.clone());
    let enc = models.encoder.register(tape);
    let pred = models.predictor.register(tape);
    let disc = models.discriminator.register(tape);
    let z = models.encoder.forward_on(tape, &enc, input)?;
    let t_logits = models.predictor.forward_on(tape, &pred, z)?;
    let s_logits = models.discriminator.forward_on(tape, &disc, z)?;
    let v1 = cross_entropy(tape, s_logits, s)?;
    let v2 = cross_entropy(tape, t_logits, t)?;
    let v3 = kl_to_uniform(tape, s_logits)?;
    let encoder_total = match variant {
        Variant::Ml => {
            let neg = tape.scale(v1, -alpha);
            tape.add(v2, neg)?
        }
        Variant::Maxent => {
            let scaled = tape.scale(v3, alpha);
            tape.add(v2, scaled)?
        }
    };
    Ok((
        GameNodes {
            encoder: enc,
            predictor: pred,
            discriminator: disc,
        },
        LossNodes {
            v1,
            v2,
            v3,
            encoder_total,
        },
    ))
}

fn require_sensitive(s: &[Option<usize>]) -> Result<Vec<usize>> {
    s.iter()
        .map(|v| v.ok_or_else(|| Error::Invalid("missing sensitive label in training batch".into())))
        .collect()
}

/// Per-player gradients evaluated at the same parameter point.
pub struct PlayerGrads {
    pub encoder: Vec<Tensor>,
    pub predictor: Vec<Tensor>,
    pub discriminator: Vec<Tensor>,
}

/// One tape, three backward sweeps (with accumulator resets in between), so
/// every player's gradient is taken at the identical parameter point.
pub fn player_grads(
    tape: &mut Tape,
    models: &ArlModels,
    nodes: &GameNodes,
    losses: &LossNodes,
) -> Result<PlayerGrads> {
    tape.zero_grads();
    tape.backward(losses.v1)?;
    let discriminator = models.discriminator.collect_grads(tape, &nodes.discriminator);
    tape.zero_grads();
    tape.backward(losses.v2)?;
    let predictor = models.predictor.collect_grads(tape, &nodes.predictor);
    tape.zero_grads();
    tape.backward(losses.encoder_total)?;
    let encoder = models.encoder.collect_grads(tape, &nodes.encoder);
    Ok(PlayerGrads {
        encoder,
        predictor,
        discriminator,
    })
}

/// One minibatch update of all three players. Simultaneous mode collects
/// all gradients before any parameter moves; alternating mode steps the
/// discriminator first and re-evaluates for the encoder/predictor.
pub fn train_step(
    models: &mut ArlModels,
    opts: &mut ArlOptimizers,
    config: &ArlConfig,
    x: &Tensor,
    t: &[usize],
    s: &[usize],
) -> Result<LossBundle> {
    if config.alternating {
        let mut tape = Tape::new();
        let (nodes, losses) = compute_losses(&mut tape, models, config.variant, config.alpha, x, t, s)?;
        let bundle = losses.values(&tape);
        tape.zero_grads();
        tape.backward(losses.v1)?;
        let dg = models.discriminator.collect_grads(&tape, &nodes.discriminator);
        opts.discriminator.step_model(&mut models.discriminator, &dg)?;

        let mut tape = Tape::new();
        let (nodes, losses) = compute_losses(&mut tape, models, config.variant, config.alpha, x, t, s)?;
        tape.zero_grads();
        tape.backward(losses.v2)?;
        let pg = models.predictor.collect_grads(&tape, &nodes.predictor);
        tape.zero_grads();
        tape.backward(losses.encoder_total)?;
        let eg = models.encoder.collect_grads(&tape, &nodes.encoder);
        opts.predictor.step_model(&mut models.predictor, &pg)?;
        opts.encoder.step_model(&mut models.encoder, &eg)?;
        Ok(bundle)
    } else {
        let mut tape = Tape::new();
        let (nodes, losses) = compute_losses(&mut tape, models, config.variant, config.alpha, x, t, s)?;
        let bundle = losses.values(&tape);
        let grads = player_grads(&mut tape, models, &nodes, &losses)?;
        opts.discriminator
            .step_model(&mut models.discriminator, &grads.discriminator)?;
        opts.predictor.step_model(&mut models.predictor, &grads.predictor)?;
        opts.encoder.step_model(&mut models.encoder, &grads.encoder)?;
        Ok(bundle)
    }
}

/// Stable row-wise log-softmax on plain tensors (no tape).
pub fn log_softmax_rows(logits: &Tensor) -> Tensor {
    let mut out = logits.clone();
    for i in 0..out.rows {
        let row = &mut out.data[i * out.cols..(i + 1) * out.cols];
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let log_z = row.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + max;
        row.iter_mut().for_each(|v| *v -= log_z);
    }
    out
}

pub fn softmax_rows(logits: &Tensor) -> Vec<Vec<f64>> {
    let lsm = log_softmax_rows(logits);
    (0..lsm.rows)
        .map(|i| lsm.row(i).iter().map(|v| v.exp()).collect())
        .collect()
}

pub fn argmax_rows(logits: &Tensor) -> Vec<usize> {
    (0..logits.rows)
        .map(|i| {
            logits
                .row(i)
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(j, _)| j)
                .unwrap()
        })
        .collect()
}

/// Forward-only mean cross-entropy in nats.
pub fn ce_from_logits(logits: &Tensor, labels: &[usize]) -> Result<f64> {
    if logits.rows != labels.len() {
        return Err(Error::Invalid(format!(
            "ce_from_logits: {} rows vs {} labels",
            logits.rows,
            labels.len()
        )));
    }
    let lsm = log_softmax_rows(logits);
    let total: f64 = labels.iter().enumerate().map(|(i, &l)| -lsm.get(i, l)).sum();
    Ok(total / labels.len() as f64)
}

/// Forward-only game state on a dataset: the loss bundle plus accuracy and
/// discriminator-entropy metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalStats {
    pub losses: LossBundle,
    pub target_acc: f64,
    pub disc_acc: f64,
    pub disc_entropy_nats: f64,
}

pub fn evaluate(
    models: &ArlModels,
    variant: Variant,
    alpha: f64,
    dataset: &LabeledDataset,
) -> Result<EvalStats> {
    let s = require_sensitive(&dataset.s)?;
    let z = models.encoder.forward(&dataset.features)?;
    let t_logits = models.predictor.forward(&z)?;
    let s_logits = models.discriminator.forward(&z)?;
    let v1 = ce_from_logits(&s_logits, &s)?;
    let v2 = ce_from_logits(&t_logits, &dataset.t)?;
    let probs = softmax_rows(&s_logits);
    let entropy = crate::eval::mean_entropy(&probs)?;
    let m = dataset.m_sensitive as f64;
    let v3 = m.ln() - entropy;
    let encoder_total = match variant {
        Variant::Ml => v2 - alpha * v1,
        Variant::Maxent => v2 + alpha * v3,
    };
    Ok(EvalStats {
        losses: LossBundle {
            v1,
            v2,
            v3,
            encoder_total,
        },
        target_acc: crate::eval::accuracy(&argmax_rows(&t_logits), &dataset.t)?,
        disc_acc: crate::eval::accuracy(&argmax_rows(&s_logits), &s)?,
        disc_entropy_nats: entropy,
    })
}

/// Full training loop. Metrics are evaluated on `train` at the end of every
/// epoch; batch order is reshuffled per epoch from the run seed.
pub fn train_arl(
    config: &ArlConfig,
    train: &LabeledDataset,
) -> Result<(ArlModels, Vec<EpochMetrics>)> {
    config.validate()?;
    train.validate()?;
    let s_all = require_sensitive(&train.s)?;
    let mut models = config.build_models(train.dim(), train.n_target, train.m_sensitive)?;
    let mut opts = config.build_optimizers(&models);
    let mut log = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        for batch in crate::data::batches(train.len(), config.batch_size, config.seed ^ epoch as u64)
        {
            let sub = train.select(&batch, train.split);
            let s: Vec<usize> = batch.iter().map(|&i| s_all[i]).collect();
            train_step(&mut models, &mut opts, config, &sub.features, &sub.t, &s)?;
        }
        let stats = evaluate(&models, config.variant, config.alpha, train)?;
        log.push(EpochMetrics {
            epoch,
            v1: Some(stats.losses.v1),
            v2: stats.losses.v2,
            v3: stats.losses.v3,
            target_acc: stats.target_acc,
            disc_acc: Some(stats.disc_acc),
            disc_entropy_nats: stats.disc_entropy_nats,
        });
    }
    Ok((models, log))
}

/// Post-hoc adversary settings: trained to recover the sensitive attribute
/// from the frozen encoder's embeddings.
#[derive(Debug, Clone)]
pub struct AdversaryConfig {
    /// Empty = logistic regression on the embedding.
    pub hidden_dims: Vec<usize>,
    pub max_epochs: usize,
    /// Epochs without validation cross-entropy improvement before stopping.
    pub patience: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for AdversaryConfig {
    fn default() -> Self {
        AdversaryConfig {
            hidden_dims: vec![],
            max_epochs: 300,
            patience: 20,
            batch_size: 64,
            learning_rate: 1e-3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdversaryOutcome {
    pub model: MlpModel,
    pub epochs_run: usize,
    pub best_val_ce: f64,
    pub stopped_early: bool,
}

/// Trains an adversary on frozen-encoder embeddings with early stopping on
/// validation cross-entropy; returns the best-validation model.
pub fn train_adversary(
    encoder: &MlpModel,
    config: &AdversaryConfig,
    train: &LabeledDataset,
    val: &LabeledDataset,
) -> Result<AdversaryOutcome> {
    if config.max_epochs == 0 {
        return Err(Error::Config("adversary max_epochs must be >= 1".into()));
    }
    let s_train = require_sensitive(&train.s)?;
    let s_val = require_sensitive(&val.s)?;
    let z_train = encoder.forward(&train.features)?;
    let z_val = encoder.forward(&val.features)?;
    let mut model = MlpModel::new(
        Role::Adversary,
        MlpSpec::new(
            z_train.cols,
            config.hidden_dims.clone(),
            train.m_sensitive,
            config.seed,
        ),
    )?;
    let mut opt = Optimizer::for_model(OptKind::adam_default(), config.learning_rate, 0.0, &model);
    let mut best = model.clone();
    let mut best_ce = f64::INFINITY;
    let mut since_best = 0usize;
    let mut epochs_run = 0usize;
    let mut stopped_early = false;
    for epoch in 0..config.max_epochs {
        epochs_run = epoch + 1;
        for batch in crate::data::batches(z_train.rows, config.batch_size, config.seed ^ epoch as u64)
        {
            let mut data = Vec::with_capacity(batch.len() * z_train.cols);
            for &i in &batch {
                data.extend_from_slice(z_train.row(i));
            }
            let x = Tensor::new(batch.len(), z_train.cols, data);
            let s: Vec<usize> = batch.iter().map(|&i| s_train[i]).collect();
            let mut tape = Tape::new();
            let input = tape.leaf(x);
            let nodes = model.register(&mut tape);
            let logits = model.forward_on(&mut tape, &nodes, input)?;
            let loss = cross_entropy(&mut tape, logits, &s)?;
            tape.backward(loss)?;
            let grads = model.collect_grads(&tape, &nodes);
            opt.step_model(&mut model, &grads)?;
        }
        let val_ce = ce_from_logits(&model.forward(&z_val)?, &s_val)?;
        if val_ce < best_ce {
            best_ce = val_ce;
            best = model.clone();
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= config.patience {
                stopped_early = true;
                break;
            }
        }
    }
    Ok(AdversaryOutcome {
        model: best,
        epochs_run,
        best_val_ce: best_ce,
        stopped_early,
    })
}

/// Adversary accuracy (percent) and mean posterior entropy (nats) on a
/// held-out set, through the frozen encoder.
pub fn eval_adversary(
    encoder: &MlpModel,
    adversary: &MlpModel,
    test: &LabeledDataset,
) -> Result<(f64, f64)> {
    let s = require_sensitive(&test.s)?;
    let logits = adversary.forward(&encoder.forward(&test.features)?)?;
    let acc = crate::eval::accuracy(&argmax_rows(&logits), &s)?;
    let entropy = crate::eval::mean_entropy(&softmax_rows(&logits))?;
    Ok((acc, entropy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::finite_difference_grad;
    use crate::data::{gen_mixture, MixtureConfig};
    use approx::assert_relative_eq;

    fn tiny_batch() -> (Tensor, Vec<usize>, Vec<usize>) {
        let x = Tensor::from_rows(&[
            vec![0.2, -0.4],
            vec![1.1, 0.3],
            vec![-0.7, 0.9],
            vec![0.05, -1.2],
        ]);
        (x, vec![0, 1, 0, 1], vec![0, 0, 1, 1])
    }

    fn tiny_config(variant: Variant) -> ArlConfig {
        ArlConfig {
            variant,
            alpha: 0.7,
            embedding_dim: 2,
            encoder_hidden: vec![3],
            predictor_hidden: vec![],
            discriminator_hidden: vec![],
            batch_size: 4,
            ..ArlConfig::default()
        }
    }

    #[test]
    fn cross_entropy_uniform_logits() {
        let mut tape = Tape::new();
        let logits = tape.leaf(Tensor::zeros(5, 3));
        let ce = cross_entropy(&mut tape, logits, &[0, 1, 2, 0, 1]).unwrap();
        assert_relative_eq!(tape.value(ce).data[0], 3.0f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn cross_entropy_confident_correct_is_small() {
        let mut tape = Tape::new();
        let logits = tape.leaf(Tensor::from_rows(&[vec![20.0, 0.0], vec![0.0, 20.0]]));
        let ce = cross_entropy(&mut tape, logits, &[0, 1]).unwrap();
        assert!(tape.value(ce).data[0] < 1e-8);
    }

    #[test]
    fn cross_entropy_label_out_of_range() {
        let mut tape = Tape::new();
        let logits = tape.leaf(Tensor::zeros(1, 2));
        assert!(cross_entropy(&mut tape, logits, &[2]).is_err());
    }

    #[test]
    fn kl_to_uniform_bounds() {
        // Uniform posterior: KL = 0. One-hot-ish posterior: KL → ln m.
        let mut tape = Tape::new();
        let logits = tape.leaf(Tensor::zeros(3, 4));
        let kl = kl_to_uniform(&mut tape, logits).unwrap();
        assert_relative_eq!(tape.value(kl).data[0], 0.0, epsilon = 1e-15);

        let mut tape = Tape::new();
        let logits = tape.leaf(Tensor::from_rows(&[vec![50.0, 0.0, 0.0, 0.0]]));
        let kl = kl_to_uniform(&mut tape, logits).unwrap();
        assert_relative_eq!(tape.value(kl).data[0], 4.0f64.ln(), epsilon = 1e-9);
    }

    #[test]
    fn zero_sum_identity_ml() {
        // encoder_total + α·v1 − v2 = 0 for the zero-sum formulation.
        let (x, t, s) = tiny_batch();
        for seed in 0..10u64 {
            let cfg = ArlConfig {
                seed,
                ..tiny_config(Variant::Ml)
            };
            let models = cfg.build_models(2, 2, 2).unwrap();
            let mut tape = Tape::new();
            let (_, losses) =
                compute_losses(&mut tape, &models, cfg.variant, cfg.alpha, &x, &t, &s).unwrap();
            let b = losses.values(&tape);
            assert!(
                (b.encoder_total + cfg.alpha * b.v1 - b.v2).abs() < 1e-12,
                "seed {seed}: residual {}",
                b.encoder_total + cfg.alpha * b.v1 - b.v2
            );
        }
    }

    #[test]
    fn maxent_total_is_not_zero_sum() {
        let (x, t, s) = tiny_batch();
        let cfg = tiny_config(Variant::Maxent);
        let models = cfg.build_models(2, 2, 2).unwrap();
        let mut tape = Tape::new();
        let (_, losses) =
            compute_losses(&mut tape, &models, cfg.variant, cfg.alpha, &x, &t, &s).unwrap();
        let b = losses.values(&tape);
        assert_relative_eq!(b.encoder_total, b.v2 + cfg.alpha * b.v3, epsilon = 1e-15);
        assert!((b.encoder_total + cfg.alpha * b.v1 - b.v2).abs() > 1e-6);
    }

    /// Flattens one model's parameters, runs f, restores — used to express
    /// each player loss as a function of its own flat parameter vector.
    fn flat_params(model: &MlpModel) -> Vec<f64> {
        model.params().iter().flat_map(|p| p.data.clone()).collect()
    }

    fn set_flat_params(model: &mut MlpModel, flat: &[f64]) {
        let mut off = 0;
        for p in model.params_mut() {
            let n = p.data.len();
            p.data.copy_from_slice(&flat[off..off + n]);
            off += n;
        }
    }

    fn flat_grads(grads: &[Tensor]) -> Vec<f64> {
        grads.iter().flat_map(|g| g.data.clone()).collect()
    }

    #[test]
    fn player_gradients_match_finite_differences() {
        let (x, t, s) = tiny_batch();
        for variant in [Variant::Ml, Variant::Maxent] {
            for seed in 0..5u64 {
                let cfg = ArlConfig {
                    seed,
                    ..tiny_config(variant)
                };
                let models = cfg.build_models(2, 2, 2).unwrap();
                let mut tape = Tape::new();
                let (nodes, losses) =
                    compute_losses(&mut tape, &models, variant, cfg.alpha, &x, &t, &s).unwrap();
                let grads = player_grads(&mut tape, &models, &nodes, &losses).unwrap();

                // Each player's analytic gradient vs central differences of
                // its own scalar loss in its own parameters.
                let cases: [(&MlpModel, &[Tensor], Box<dyn Fn(&ArlModels) -> f64>); 3] = [
                    (
                        &models.discriminator,
                        &grads.discriminator,
                        Box::new(move |m: &ArlModels| {
                            let (x, t, s) = tiny_batch();
                            let mut tp = Tape::new();
                            let (_, l) =
                                compute_losses(&mut tp, m, variant, 0.7, &x, &t, &s).unwrap();
                            tp.value(l.v1).data[0]
                        }),
                    ),
                    (
                        &models.predictor,
                        &grads.predictor,
                        Box::new(move |m: &ArlModels| {
                            let (x, t, s) = tiny_batch();
                            let mut tp = Tape::new();
                            let (_, l) =
                                compute_losses(&mut tp, m, variant, 0.7, &x, &t, &s).unwrap();
                            tp.value(l.v2).data[0]
                        }),
                    ),
                    (
                        &models.encoder,
                        &grads.encoder,
                        Box::new(move |m: &ArlModels| {
                            let (x, t, s) = tiny_batch();
                            let mut tp = Tape::new();
                            let (_, l) =
                                compute_losses(&mut tp, m, variant, 0.7, &x, &t, &s).unwrap();
                            tp.value(l.encoder_total).data[0]
                        }),
                    ),
                ];
                for (player, analytic, loss_of) in cases {
                    let point = flat_params(player);
                    let role = player.role;
                    let fd = finite_difference_grad(
                        |p| {
                            let mut m = models.clone();
                            let target = match role {
                                Role::Encoder => &mut m.encoder,
                                Role::Predictor => &mut m.predictor,
                                Role::Discriminator => &mut m.discriminator,
                                Role::Adversary => unreachable!(),
                            };
                            set_flat_params(target, p);
                            Ok(loss_of(&m))
                        },
                        &point,
                        1e-5,
                    )
                    .unwrap();
                    let ad = flat_grads(analytic);
                    for (i, (a, f)) in ad.iter().zip(&fd).enumerate() {
                        let denom = f.abs().max(1e-6);
                        assert!(
                            (a - f).abs() / denom < 1e-5,
                            "{variant:?} seed {seed} {role} coord {i}: ad={a} fd={f}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn simultaneous_grads_taken_at_same_point() {
        // All three gradient sets from the shared tape must equal gradients
        // recomputed independently at the untouched initial parameters.
        let (x, t, s) = tiny_batch();
        let cfg = tiny_config(Variant::Maxent);
        let models = cfg.build_models(2, 2, 2).unwrap();
        let mut tape = Tape::new();
        let (nodes, losses) =
            compute_losses(&mut tape, &models, cfg.variant, cfg.alpha, &x, &t, &s).unwrap();
        let joint = player_grads(&mut tape, &models, &nodes, &losses).unwrap();

        let solo = |which: usize| -> Vec<Tensor> {
            let mut tp = Tape::new();
            let (n, l) = compute_losses(&mut tp, &models, cfg.variant, cfg.alpha, &x, &t, &s).unwrap();
            match which {
                0 => {
                    tp.backward(l.v1).unwrap();
                    models.discriminator.collect_grads(&tp, &n.discriminator)
                }
                1 => {
                    tp.backward(l.v2).unwrap();
                    models.predictor.collect_grads(&tp, &n.predictor)
                }
                _ => {
                    tp.backward(l.encoder_total).unwrap();
                    models.encoder.collect_grads(&tp, &n.encoder)
                }
            }
        };
        assert_eq!(flat_grads(&joint.discriminator), flat_grads(&solo(0)));
        assert_eq!(flat_grads(&joint.predictor), flat_grads(&solo(1)));
        assert_eq!(flat_grads(&joint.encoder), flat_grads(&solo(2)));
    }

    #[test]
    fn training_reduces_target_loss_on_mixture() {
        let data = gen_mixture(&MixtureConfig {
            samples_per_component: 50,
            ..MixtureConfig::default()
        })
        .unwrap();
        let cfg = ArlConfig {
            epochs: 20,
            learning_rate: 5e-3,
            ..ArlConfig::default()
        };
        let (_, log) = train_arl(&cfg, &data).unwrap();
        assert_eq!(log.len(), 20);
        let first = log.first().unwrap();
        let last = log.last().unwrap();
        assert!(
            last.v2 < first.v2,
            "v2 did not decrease: {} -> {}",
            first.v2,
            last.v2
        );
        assert!(last.target_acc > 70.0, "target_acc {}", last.target_acc);
    }

    #[test]
    fn alternating_mode_runs() {
        let data = gen_mixture(&MixtureConfig {
            samples_per_component: 20,
            ..MixtureConfig::default()
        })
        .unwrap();
        let cfg = ArlConfig {
            epochs: 2,
            alternating: true,
            ..ArlConfig::default()
        };
        let (_, log) = train_arl(&cfg, &data).unwrap();
        assert_eq!(log.len(), 2);
    }

    #[test]
    fn evaluate_entropy_consistent_with_v3() {
        let data = gen_mixture(&MixtureConfig {
            samples_per_component: 25,
            ..MixtureConfig::default()
        })
        .unwrap();
        let cfg = ArlConfig::default();
        let models = cfg.build_models(2, 2, 2).unwrap();
        let stats = evaluate(&models, cfg.variant, cfg.alpha, &data).unwrap();
        assert_relative_eq!(
            stats.losses.v3,
            2.0f64.ln() - stats.disc_entropy_nats,
            epsilon = 1e-12
        );
    }

    #[test]
    fn adversary_trains_and_stops() {
        let full = gen_mixture(&MixtureConfig {
            samples_per_component: 60,
            ..MixtureConfig::default()
        })
        .unwrap();
        let (train, val) = crate::data::split(&full, 0.8, 3).unwrap();
        // Identity-ish encoder: sensitive attribute is recoverable, so the
        // adversary should reach high accuracy quickly.
        let encoder = MlpModel::new(Role::Encoder, MlpSpec::new(2, vec![], 2, 0)).unwrap();
        let cfg = AdversaryConfig {
            max_epochs: 120,
            learning_rate: 5e-2,
            ..AdversaryConfig::default()
        };
        let outcome = train_adversary(&encoder, &cfg, &train, &val).unwrap();
        assert!(outcome.epochs_run <= 120);
        let (acc, entropy) = eval_adversary(&encoder, &outcome.model, &val).unwrap();
        assert!(acc > 85.0, "adversary accuracy {acc}");
        assert!(entropy >= 0.0 && entropy <= 2.0f64.ln() + 1e-9);
    }

    #[test]
    fn missing_sensitive_rejected() {
        let data = gen_mixture(&MixtureConfig {
            samples_per_component: 5,
            ..MixtureConfig::default()
        })
        .unwrap()
        .without_sensitive();
        assert!(train_arl(&ArlConfig::default(), &data).is_err());
    }
}
