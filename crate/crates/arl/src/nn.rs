//! MLP construction, forward evaluation, first-order optimizers and the
//! checkpoint file format for the four player networks.

use std::fmt;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{NodeId, Tape, Tensor};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Sigmoid,
    Identity,
}

impl Activation {
    pub fn apply(self, tape: &mut Tape, x: NodeId) -> NodeId {
        match self {
            Activation::Relu => tape.relu(x),
            Activation::Tanh => tape.tanh(x),
            Activation::Sigmoid => tape.sigmoid(x),
            Activation::Identity => x,
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::Sigmoid => "sigmoid",
            Activation::Identity => "identity",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            "sigmoid" => Ok(Activation::Sigmoid),
            "identity" => Ok(Activation::Identity),
            other => Err(Error::Config(format!("unknown activation '{other}'"))),
        }
    }
}

/// The player a network belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Encoder,
    Predictor,
    Discriminator,
    Adversary,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Role::Encoder => "encoder",
            Role::Predictor => "predictor",
            Role::Discriminator => "discriminator",
            Role::Adversary => "adversary",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Role {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "encoder" => Ok(Role::Encoder),
            "predictor" => Ok(Role::Predictor),
            "discriminator" => Ok(Role::Discriminator),
            "adversary" => Ok(Role::Adversary),
            other => Err(Error::Config(format!("unknown role '{other}'"))),
        }
    }
}

/// Architecture hyperparameters; fully determines the parameter count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub input_dim: usize,
    pub hidden_dims: Vec<usize>,
    pub output_dim: usize,
    pub hidden_activation: Activation,
    pub seed: u64,
}

impl MlpSpec {
    pub fn new(input_dim: usize, hidden_dims: Vec<usize>, output_dim: usize, seed: u64) -> Self {
        MlpSpec {
            input_dim,
            hidden_dims,
            output_dim,
            hidden_activation: Activation::Relu,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dims = self.dims();
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::Config(format!(
                "all layer dims must be >= 1, got {dims:?}"
            )));
        }
        Ok(())
    }

    /// Layer widths including input and output.
    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.input_dim];
        d.extend_from_slice(&self.hidden_dims);
        d.push(self.output_dim);
        d
    }

    pub fn param_count(&self) -> usize {
        let d = self.dims();
        d.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }
}

/// Layered affine+activation network. Parameters live outside any tape and
/// are registered as leaves per forward call.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub role: Role,
    pub spec: MlpSpec,
    /// (weight in×out, bias 1×out) per layer.
    pub layers: Vec<(Tensor, Tensor)>,
}

/// Leaf node ids created when a model is registered on a tape.
#[derive(Debug, Clone)]
pub struct ParamNodes {
    pub layers: Vec<(NodeId, NodeId)>,
}

impl ParamNodes {
    pub fn flat(&self) -> Vec<NodeId> {
        self.layers.iter().flat_map(|&(w, b)| [w, b]).collect()
    }
}

impl MlpModel {
    /// Glorot-uniform weights (±√(6/(fan_in+fan_out))), zero biases,
    /// reproducible from the spec seed.
    pub fn new(role: Role, spec: MlpSpec) -> Result<Self> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let dims = spec.dims();
        let mut layers = Vec::new();
        for w in dims.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let data: Vec<f64> = (0..fan_in * fan_out)
                .map(|_| rng.gen_range(-limit..limit))
                .collect();
            layers.push((
                Tensor::new(fan_in, fan_out, data),
                Tensor::zeros(1, fan_out),
            ));
        }
        Ok(MlpModel { role, spec, layers })
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|(w, b)| w.data.len() + b.data.len())
            .sum()
    }

    pub fn params(&self) -> Vec<&Tensor> {
        self.layers.iter().flat_map(|(w, b)| [w, b]).collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        self.layers
            .iter_mut()
            .flat_map(|(w, b)| [w, b])
            .collect()
    }

    /// Registers parameters as tape leaves.
    pub fn register(&self, tape: &mut Tape) -> ParamNodes {
        let layers = self
            .layers
            .iter()
            .map(|(w, b)| (tape.leaf(w.clone()), tape.leaf(b.clone())))
            .collect();
        ParamNodes { layers }
    }

    /// Forward pass on an already-registered parameter set. Output is raw
    /// logits / embedding; no terminal activation.
    pub fn forward_on(&self, tape: &mut Tape, nodes: &ParamNodes, input: NodeId) -> Result<NodeId> {
        let (_, cols) = tape.value(input).shape();
        if cols != self.spec.input_dim {
            return Err(Error::Shape {
                op: "mlp_forward",
                lhs: tape.value(input).shape_str(),
                rhs: format!("Bx{}", self.spec.input_dim),
            });
        }
        let mut h = input;
        let last = nodes.layers.len() - 1;
        for (i, &(w, b)) in nodes.layers.iter().enumerate() {
            let z = tape.matmul(h, w)?;
            h = tape.add_row(z, b)?;
            if i < last {
                h = self.spec.hidden_activation.apply(tape, h);
            }
        }
        Ok(h)
    }

    /// Convenience forward without gradient bookkeeping.
    pub fn forward(&self, batch: &Tensor) -> Result<Tensor> {
        let mut tape = Tape::new();
        let input = tape.leaf(batch.clone());
        let nodes = self.register(&mut tape);
        let out = self.forward_on(&mut tape, &nodes, input)?;
        Ok(tape.value(out).clone())
    }

    /// Pulls leaf gradients back into parameter-shaped tensors.
    pub fn collect_grads(&self, tape: &Tape, nodes: &ParamNodes) -> Vec<Tensor> {
        nodes
            .layers
            .iter()
            .flat_map(|&(w, b)| [tape.grad(w).clone(), tape.grad(b).clone()])
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptKind {
    SgdMomentum { momentum: f64 },
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl OptKind {
    pub fn adam_default() -> Self {
        OptKind::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// SGD-with-momentum or Adam state over one model's parameter list.
/// Weight decay is decoupled: parameters shrink by `(1 − lr·wd)` before
/// the gradient step.
#[derive(Debug, Clone)]
pub struct Optimizer {
    pub kind: OptKind,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub step_count: u64,
    moment1: Vec<Tensor>,
    moment2: Vec<Tensor>,
}

impl Optimizer {
    pub fn new(kind: OptKind, learning_rate: f64, weight_decay: f64, params: &[&Tensor]) -> Self {
        let zeros: Vec<Tensor> = params
            .iter()
            .map(|p| Tensor::zeros(p.rows, p.cols))
            .collect();
        Optimizer {
            kind,
            learning_rate,
            weight_decay,
            step_count: 0,
            moment1: zeros.clone(),
            moment2: zeros,
        }
    }

    pub fn for_model(kind: OptKind, learning_rate: f64, weight_decay: f64, model: &MlpModel) -> Self {
        Self::new(kind, learning_rate, weight_decay, &model.params())
    }

    pub fn step(&mut self, params: &mut [&mut Tensor], grads: &[Tensor]) -> Result<()> {
        if params.len() != grads.len() {
            return Err(Error::Invalid(format!(
                "optimizer step: {} parameter tensors vs {} gradient tensors",
                params.len(),
                grads.len()
            )));
        }
        for g in grads {
            if g.data.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("gradient in optimizer step".into()));
            }
        }
        self.step_count += 1;
        let lr = self.learning_rate;
        let decay = 1.0 - lr * self.weight_decay;
        match self.kind {
            OptKind::SgdMomentum { momentum } => {
                for ((p, g), buf) in params.iter_mut().zip(grads).zip(&mut self.moment1) {
                    for ((pv, gv), bv) in
                        p.data.iter_mut().zip(&g.data).zip(&mut buf.data)
                    {
                        *pv *= decay;
                        *bv = momentum * *bv + gv;
                        *pv -= lr * *bv;
                    }
                }
            }
            OptKind::Adam { beta1, beta2, eps } => {
                let t = self.step_count as i32;
                let c1 = 1.0 - beta1.powi(t);
                let c2 = 1.0 - beta2.powi(t);
                for (((p, g), m), v) in params
                    .iter_mut()
                    .zip(grads)
                    .zip(&mut self.moment1)
                    .zip(&mut self.moment2)
                {
                    for (((pv, gv), mv), vv) in p
                        .data
                        .iter_mut()
                        .zip(&g.data)
                        .zip(&mut m.data)
                        .zip(&mut v.data)
                    {
                        *pv *= decay;
                        *mv = beta1 * *mv + (1.0 - beta1) * gv;
                        *vv = beta2 * *vv + (1.0 - beta2) * gv * gv;
                        let m_hat = *mv / c1;
                        let v_hat = *vv / c2;
                        *pv -= lr * m_hat / (v_hat.sqrt() + eps);
                    }
                }
            }
        }
        Ok(())
    }

    pub fn step_model(&mut self, model: &mut MlpModel, grads: &[Tensor]) -> Result<()> {
        let mut params = model.params_mut();
        let mut refs: Vec<&mut Tensor> = params.iter_mut().map(|p| &mut **p).collect();
        self.step(&mut refs, grads)
    }
}

const CKPT_HEADER: &str = "ARLCKPT v1";

/// Writes models in the versioned text checkpoint format. Values carry 17
/// significant digits so the round trip is bitwise on one platform.
pub fn write_checkpoint(path: &Path, models: &[&MlpModel]) -> Result<()> {
    let mut out = String::new();
    out.push_str(CKPT_HEADER);
    out.push('\n');
    for model in models {
        out.push_str(&format!("model {}\n", model.role));
        let hidden = if model.spec.hidden_dims.is_empty() {
            "-".to_string()
        } else {
            model
                .spec
                .hidden_dims
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        out.push_str(&format!(
            "spec {} {} {} {} {}\n",
            model.spec.input_dim,
            hidden,
            model.spec.output_dim,
            model.spec.hidden_activation,
            model.spec.seed
        ));
        for (w, b) in &model.layers {
            write_tensor_line(&mut out, w);
            write_tensor_line(&mut out, b);
        }
        out.push_str("end\n");
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

fn write_tensor_line(out: &mut String, t: &Tensor) {
    out.push_str(&format!("tensor {} {}", t.rows, t.cols));
    for v in &t.data {
        out.push_str(&format!(" {v:.16e}"));
    }
    out.push('\n');
}

pub fn read_checkpoint(path: &Path) -> Result<Vec<MlpModel>> {
    let file =
        std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut lines = BufReader::new(file).lines().enumerate();
    let fname = path.display().to_string();
    let parse_err = |line: usize, msg: String| Error::Parse {
        file: fname.clone(),
        line: line + 1,
        msg,
    };

    let (n, header) = lines
        .next()
        .ok_or_else(|| parse_err(0, "empty checkpoint".into()))?;
    let header = header.map_err(|e| Error::io(&fname, e))?;
    if header != CKPT_HEADER {
        return Err(parse_err(n, format!("bad header '{header}'")));
    }

    let mut models = Vec::new();
    let mut current: Option<(Role, Option<MlpSpec>, Vec<Tensor>)> = None;
    for (n, line) in lines {
        let line = line.map_err(|e| Error::io(&fname, e))?;
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("model") => {
                let role: Role = parts
                    .next()
                    .ok_or_else(|| parse_err(n, "missing role".into()))?
                    .parse()?;
                current = Some((role, None, Vec::new()));
            }
            Some("spec") => {
                let fields: Vec<&str> = parts.collect();
                if fields.len() != 5 {
                    return Err(parse_err(n, format!("spec needs 5 fields, got {}", fields.len())));
                }
                let hidden_dims = if fields[1] == "-" {
                    Vec::new()
                } else {
                    fields[1]
                        .split(',')
                        .map(|d| d.parse::<usize>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|e| parse_err(n, e.to_string()))?
                };
                let spec = MlpSpec {
                    input_dim: fields[0].parse().map_err(|e: std::num::ParseIntError| parse_err(n, e.to_string()))?,
                    hidden_dims,
                    output_dim: fields[2].parse().map_err(|e: std::num::ParseIntError| parse_err(n, e.to_string()))?,
                    hidden_activation: fields[3].parse()?,
                    seed: fields[4].parse().map_err(|e: std::num::ParseIntError| parse_err(n, e.to_string()))?,
                };
                match current.as_mut() {
                    Some((_, s @ None, _)) => *s = Some(spec),
                    _ => return Err(parse_err(n, "spec line outside model block".into())),
                }
            }
            Some("tensor") => {
                let rows: usize = parts
                    .next()
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| parse_err(n, "bad tensor rows".into()))?;
                let cols: usize = parts
                    .next()
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| parse_err(n, "bad tensor cols".into()))?;
                let data: Vec<f64> = parts
                    .map(|v| v.parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| parse_err(n, e.to_string()))?;
                if data.len() != rows * cols {
                    return Err(parse_err(
                        n,
                        format!("tensor {}x{} has {} values", rows, cols, data.len()),
                    ));
                }
                match current.as_mut() {
                    Some((_, Some(_), tensors)) => tensors.push(Tensor::new(rows, cols, data)),
                    _ => return Err(parse_err(n, "tensor line outside model block".into())),
                }
            }
            Some("end") => {
                let (role, spec, tensors) = current
                    .take()
                    .ok_or_else(|| parse_err(n, "end without model".into()))?;
                let spec = spec.ok_or_else(|| parse_err(n, "model missing spec".into()))?;
                if tensors.len() != 2 * (spec.hidden_dims.len() + 1) {
                    return Err(parse_err(
                        n,
                        format!("expected {} tensors, got {}", 2 * (spec.hidden_dims.len() + 1), tensors.len()),
                    ));
                }
                let layers = tensors
                    .chunks(2)
                    .map(|c| (c[0].clone(), c[1].clone()))
                    .collect();
                models.push(MlpModel { role, spec, layers });
            }
            Some(other) => return Err(parse_err(n, format!("unknown record '{other}'"))),
            None => {}
        }
    }
    if current.is_some() {
        return Err(Error::Parse {
            file: fname,
            line: 0,
            msg: "unterminated model block".into(),
        });
    }
    Ok(models)
}

/// Writes a metric log as CSV with the documented column set.
pub fn write_metric_csv(path: &Path, rows: &[EpochMetrics]) -> Result<()> {
    let mut out = String::from("epoch,v1,v2,v3,target_acc,disc_acc,disc_entropy_nats\n");
    for r in rows {
        let v1 = r
            .v1
            .map(|v| format!("{v:.17}"))
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{:.17},{:.17},{:.17},{},{:.17}\n",
            r.epoch,
            v1,
            r.v2,
            r.v3,
            r.target_acc,
            r.disc_acc
                .map(|v| format!("{v:.17}"))
                .unwrap_or_default(),
            r.disc_entropy_nats
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

/// One row of the per-epoch metric log.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub v1: Option<f64>,
    pub v2: f64,
    pub v3: f64,
    pub target_acc: f64,
    pub disc_acc: Option<f64>,
    pub disc_entropy_nats: f64,
}
