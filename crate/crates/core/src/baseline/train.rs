use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{
    argmax_rows, cross_entropy, dropout_mask, forward, loss_and_grads, predict_proba, Adam, ForwardOptions, GcnParams,
    NormalizedAdjacency,
};
use crate::error::{Error, Result};
use crate::evalkit::{specimen_scores, ClassScore, NUM_CLASSES};
use crate::homogenize::FeatureBundle;
use crate::kv::KvDoc;
use crate::scalar::Real;

/// Hyper-parameters of [`train`].
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub hidden: usize,
    pub dropout: f64,
    pub seed: u64,
    /// σ of additive Gaussian feature noise (0 = off).
    pub feature_noise: f64,
    /// Probability of dropping each edge per epoch (0 = off).
    pub edge_dropout: f64,
    pub layer_norm: bool,
    pub num_classes: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-2,
            weight_decay: 1e-5,
            epochs: 200,
            hidden: 128,
            dropout: 0.5,
            seed: 0,
            feature_noise: 0.0,
            edge_dropout: 0.0,
            layer_norm: false,
            num_classes: NUM_CLASSES,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Invalid(m.into()));
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be finite and >= 0");
        }
        if !(self.weight_decay >= 0.0) {
            return bad("weight decay must be >= 0");
        }
        if !(0.0..1.0).contains(&self.dropout) || !(0.0..1.0).contains(&self.edge_dropout) {
            return bad("dropout rates must lie in [0, 1)");
        }
        if !(self.feature_noise >= 0.0) {
            return bad("feature noise must be >= 0");
        }
        if self.hidden == 0 || self.num_classes == 0 {
            return bad("hidden width and class count must be positive");
        }
        Ok(())
    }

    pub fn to_kv(&self) -> KvDoc {
        let mut d = KvDoc::new();
        d.push("learning_rate", self.learning_rate)
            .push("weight_decay", self.weight_decay)
            .push("epochs", self.epochs)
            .push("hidden", self.hidden)
            .push("dropout", self.dropout)
            .push("seed", self.seed)
            .push("feature_noise", self.feature_noise)
            .push("edge_dropout", self.edge_dropout)
            .push("layer_norm", self.layer_norm)
            .push("num_classes", self.num_classes);
        d
    }

    /// Reads the keys written by [`TrainConfig::to_kv`]; missing keys keep defaults.
    pub fn from_kv(d: &KvDoc) -> Result<Self> {
        let mut c = Self::default();
        macro_rules! opt {
            ($field:ident) => {
                if d.get(stringify!($field)).is_some() {
                    c.$field = d.parse_value(stringify!($field))?;
                }
            };
        }
        opt!(learning_rate);
        opt!(weight_decay);
        opt!(epochs);
        opt!(hidden);
        opt!(dropout);
        opt!(seed);
        opt!(feature_noise);
        opt!(edge_dropout);
        opt!(layer_norm);
        opt!(num_classes);
        c.validate()?;
        Ok(c)
    }

    fn options(&self) -> ForwardOptions {
        ForwardOptions {
            layer_norm: self.layer_norm,
        }
    }
}

/// One specimen prepared for training or inference.
#[derive(Clone, Debug)]
pub struct GraphData<T> {
    pub specimen_id: String,
    pub stage: String,
    pub x: Array2<T>,
    pub edges: Vec<[u32; 2]>,
    pub adj: NormalizedAdjacency<T>,
    pub labels: Option<Vec<u8>>,
}

impl<T: Real> GraphData<T> {
    pub fn new(
        specimen_id: impl Into<String>,
        stage: impl Into<String>,
        x: Array2<T>,
        edges: Vec<[u32; 2]>,
        labels: Option<Vec<u8>>,
    ) -> Result<Self> {
        let adj = NormalizedAdjacency::new(x.nrows(), &edges)?;
        if let Some(l) = &labels {
            if l.len() != x.nrows() {
                return Err(Error::Shape("label count != node count".into()));
            }
        }
        Ok(Self {
            specimen_id: specimen_id.into(),
            stage: stage.into(),
            x,
            edges,
            adj,
            labels,
        })
    }

    pub fn from_bundle(b: &FeatureBundle) -> Result<Self> {
        Self::new(
            b.meta.specimen_id.clone(),
            b.meta.stage.clone(),
            b.nodes.mapv(|v| T::lit(v as f64)),
            b.edge_index.clone(),
            b.labels.clone(),
        )
    }

    fn require_labels(&self) -> Result<&[u8]> {
        self.labels
            .as_deref()
            .ok_or_else(|| Error::Invalid(format!("specimen {} has no labels", self.specimen_id)))
    }
}

/// Gaussian feature noise plus independent edge dropout.
pub fn augment<T: Real, R: Rng + ?Sized>(
    x: &Array2<T>,
    edges: &[[u32; 2]],
    sigma: f64,
    drop: f64,
    rng: &mut R,
) -> (Array2<T>, Vec<[u32; 2]>) {
    let x2 = if sigma > 0.0 {
        x.mapv(|v| {
            let z: f64 = StandardNormal.sample(rng);
            v + T::lit(sigma * z)
        })
    } else {
        x.clone()
    };
    let e2 = if drop > 0.0 {
        edges.iter().copied().filter(|_| rng.random::<f64>() >= drop).collect()
    } else {
        edges.to_vec()
    };
    (x2, e2)
}

/// Metrics after one epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_top1: f64,
    pub val_class_avg: f64,
}

impl EpochRecord {
    pub fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.epoch, self.train_loss, self.val_loss, self.val_top1, self.val_class_avg
        )
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome<T> {
    /// Parameters of the epoch with the best validation class average.
    pub params: GcnParams<T>,
    pub best_epoch: usize,
    pub history: Vec<EpochRecord>,
}

impl<T> TrainOutcome<T> {
    pub fn history_kv(&self) -> KvDoc {
        let mut d = KvDoc::new();
        d.push("columns", "epoch,train_loss,val_loss,val_top1,val_class_avg");
        d.push("best_epoch", self.best_epoch);
        for r in &self.history {
            d.push("epoch", r.to_line());
        }
        d
    }
}

/// Validation loss, top-1 and class-average (recall) over `graphs`.
pub fn validate<T: Real>(params: &GcnParams<T>, graphs: &[GraphData<T>], opts: ForwardOptions) -> Result<(f64, f64, f64)> {
    if graphs.is_empty() {
        return Ok((f64::NAN, f64::NAN, f64::NAN));
    }
    let (mut loss, mut top1, mut ca, mut ca_n) = (0.0, 0.0, 0.0, 0usize);
    for g in graphs {
        let labels = g.require_labels()?;
        let probs = predict_proba(params, &g.adj, &g.x, opts)?;
        loss += cross_entropy(&probs, labels).as_f64();
        let s = specimen_scores(&argmax_rows(&probs), labels, ClassScore::Recall)?;
        top1 += s.top1;
        if let Some(v) = s.class_avg {
            ca += v;
            ca_n += 1;
        }
    }
    let n = graphs.len() as f64;
    let ca = if ca_n > 0 { ca / ca_n as f64 } else { top1 / n };
    Ok((loss / n, top1 / n, ca))
}

/// Full-batch Adam training, one update per specimen, specimen order
/// reshuffled each epoch. Deterministic for a fixed seed.
pub fn train<T: Real>(train: &[GraphData<T>], val: &[GraphData<T>], cfg: &TrainConfig) -> Result<TrainOutcome<T>> {
    cfg.validate()?;
    let first = train.first().ok_or_else(|| Error::Invalid("no training specimens".into()))?;
    let f = first.x.ncols();
    if let Some(g) = train.iter().chain(val).find(|g| g.x.ncols() != f) {
        return Err(Error::Shape(format!(
            "specimen {} has {} features, expected {f}",
            g.specimen_id,
            g.x.ncols()
        )));
    }
    for g in train.iter().chain(val) {
        let labels = g.require_labels()?;
        if let Some(&c) = labels.iter().find(|&&c| c as usize >= cfg.num_classes) {
            return Err(Error::InvalidClass(c, (cfg.num_classes - 1) as u8));
        }
    }
    let opts = cfg.options();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = GcnParams::glorot(f, cfg.hidden, cfg.num_classes, &mut rng);
    let mut adam = Adam::new(&params);
    let lr = T::lit(cfg.learning_rate);
    let wd = T::lit(cfg.weight_decay);
    let augmenting = cfg.feature_noise > 0.0 || cfg.edge_dropout > 0.0;

    let mut best = params.clone();
    let mut best_score = f64::NEG_INFINITY;
    let mut best_epoch = 0;
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut order: Vec<usize> = (0..train.len()).collect();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for &i in &order {
            let g = &train[i];
            let labels = g.require_labels()?;
            let aug;
            let (x, adj) = if augmenting {
                let (x2, e2) = augment(&g.x, &g.edges, cfg.feature_noise, cfg.edge_dropout, &mut rng);
                aug = (x2, NormalizedAdjacency::new(g.x.nrows(), &e2)?);
                (&aug.0, &aug.1)
            } else {
                (&g.x, &g.adj)
            };
            let mask = (cfg.dropout > 0.0).then(|| dropout_mask(x.nrows(), cfg.hidden, cfg.dropout, &mut rng));
            let (loss, grads) = loss_and_grads(&params, adj, x, labels, wd, opts, mask)?;
            total += loss.as_f64();
            adam.step(&mut params, &grads, lr);
        }
        let (val_loss, val_top1, val_ca) = validate(&params, val, opts)?;
        let score = if val.is_empty() { -total } else { val_ca };
        if score > best_score {
            best_score = score;
            best = params.clone();
            best_epoch = epoch;
        }
        history.push(EpochRecord {
            epoch,
            train_loss: total / train.len() as f64,
            val_loss,
            val_top1,
            val_class_avg: val_ca,
        });
    }
    if cfg.epochs == 0 {
        best = params;
    }
    Ok(TrainOutcome {
        params: best,
        best_epoch,
        history,
    })
}

/// Arg-max predictions for one specimen.
pub fn predict<T: Real>(params: &GcnParams<T>, g: &GraphData<T>, opts: ForwardOptions) -> Result<Vec<u8>> {
    let cache = forward(params, &g.adj, &g.x, opts, None)?;
    Ok(argmax_rows(&cache.probs))
}
