//! Adam training loop with validation-AUC early stopping.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::encoder::{embed_all, EncoderParameters, DEFAULT_HIDDEN};
use crate::energy::Embeddings;
use crate::error::{Error, Result};
use crate::eval::link_auc;
use crate::graph::{compute_all_hop_sets, AttributedGraph, DataSplit, HopNeighborhoods};
use crate::ranking::{
    enumerate_triplets, loss_and_grads, sample_node_anchored, NaiveSampler, Sampler, Triplet,
    WeightedTriplet, DEFAULT_TRIPLET_CAP,
};
use crate::seed::derive_seed;

/// Graphs up to this size train on all anchors per step by default.
pub const FULL_BATCH_LIMIT: usize = 10_000;
/// Anchor batch for larger graphs.
pub const DEFAULT_ANCHOR_BATCH: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// `K`, the hop at which distances are truncated.
    pub max_hop: usize,
    pub l_half: usize,
    pub hidden_sizes: Vec<usize>,
    pub adam: AdamConfig,
    pub max_epochs: usize,
    /// Epochs between validation checks.
    pub eval_every: usize,
    /// Validation checks without improvement before stopping.
    pub patience: usize,
    /// Anchors per optimizer step; `None` picks all nodes up to [`FULL_BATCH_LIMIT`].
    pub anchor_batch: Option<usize>,
    pub sampler: Sampler,
    pub seed: u64,
    pub early_stopping: bool,
    /// Keep training (and recording) at least this many epochs past the best validation
    /// epoch, so the latent-dimension rule sees the overfitting regime.
    pub overfit_epochs: Option<usize>,
    /// Compute hop sets of a directed graph on its symmetrized structure.
    pub hops_undirected: bool,
    /// Refusal threshold for the exhaustive triplet list of the full sampler.
    pub triplet_cap: usize,
    /// Print `epoch<TAB>loss<TAB>val_auc` lines to standard error.
    #[serde(skip)]
    pub progress: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            max_hop: 2,
            l_half: 64,
            hidden_sizes: DEFAULT_HIDDEN.to_vec(),
            adam: AdamConfig::default(),
            max_epochs: 2000,
            eval_every: 5,
            patience: 10,
            anchor_batch: None,
            sampler: Sampler::NodeAnchored,
            seed: 0,
            early_stopping: true,
            overfit_epochs: None,
            hops_undirected: false,
            triplet_cap: DEFAULT_TRIPLET_CAP,
            progress: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let a = &self.adam;
        let problem = if self.max_hop == 0 {
            Some("K must be at least 1")
        } else if self.l_half == 0 {
            Some("embedding dimension must be positive")
        } else if self.hidden_sizes.contains(&0) {
            Some("hidden layer sizes must be positive")
        } else if !(a.learning_rate > 0.0 && a.learning_rate.is_finite()) {
            Some("learning rate must be positive")
        } else if !(0.0..1.0).contains(&a.beta1) || !(0.0..1.0).contains(&a.beta2) || a.eps <= 0.0 {
            Some("Adam betas must lie in [0, 1) and eps must be positive")
        } else if self.eval_every == 0 || self.patience == 0 {
            Some("eval_every and patience must be at least 1")
        } else if self.anchor_batch == Some(0) {
            Some("anchor batch must be at least 1")
        } else {
            None
        };
        match problem {
            Some(p) => Err(Error::Config(p.into())),
            None => Ok(()),
        }
    }

    pub fn resolved_anchor_batch(&self, num_nodes: usize) -> usize {
        match self.anchor_batch {
            Some(b) => b.min(num_nodes.max(1)),
            None if num_nodes <= FULL_BATCH_LIMIT => num_nodes.max(1),
            None => DEFAULT_ANCHOR_BATCH,
        }
    }
}

/// Adam moment estimates, shaped like the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: EncoderParameters,
    pub v: EncoderParameters,
    pub step: u64,
}

impl AdamState {
    pub fn new(params: &EncoderParameters) -> Self {
        Self {
            m: params.zeros_like(),
            v: params.zeros_like(),
            step: 0,
        }
    }
}

/// One bias-corrected Adam update.
pub fn adam_step(
    params: &mut EncoderParameters,
    grads: &EncoderParameters,
    state: &mut AdamState,
    config: &AdamConfig,
) -> Result<()> {
    if !params.same_shape(grads) || !params.same_shape(&state.m) {
        return Err(Error::Shape(
            "parameters, gradients and Adam state differ in shape".into(),
        ));
    }
    state.step += 1;
    let t = state.step as f64;
    let c1 = 1.0 - config.beta1.powf(t);
    let c2 = 1.0 - config.beta2.powf(t);
    let (b1, b2) = (config.beta1, config.beta2);
    for (((p, g), m), v) in params
        .tensors_mut()
        .into_iter()
        .zip(grads.tensors())
        .zip(state.m.tensors_mut())
        .zip(state.v.tensors_mut())
    {
        for i in 0..p.len() {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            p[i] -= config.learning_rate * m_hat / (v_hat.sqrt() + config.eps);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based epoch number.
    pub epoch: usize,
    /// Loss estimate at the parameters entering the epoch, summed over its steps.
    pub loss: f64,
    /// Validation AUC after the epoch, when checked.
    pub val_auc: Option<f64>,
    /// Mean variance over all nodes, per dimension, after the epoch.
    pub mean_variance: Vec<f64>,
    /// Triplet terms evaluated so far, cumulative.
    pub triplets_seen: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace {
    pub records: Vec<EpochRecord>,
    /// Epoch whose parameters were returned (`None`: the initialization).
    pub best_epoch: Option<usize>,
    pub best_val_auc: Option<f64>,
    pub stopped_early: bool,
}

impl TrainingTrace {
    pub fn epochs_run(&self) -> usize {
        self.records.len()
    }

    /// Per-epoch rows of the per-dimension mean variance.
    pub fn variance_rows(&self) -> Vec<Vec<f64>> {
        self.records
            .iter()
            .map(|r| r.mean_variance.clone())
            .collect()
    }
}

/// Per-dimension mean variance rows, one per embedding snapshot.
pub fn record_variance_trace(snapshots: &[Embeddings]) -> Vec<Vec<f64>> {
    snapshots
        .iter()
        .map(Embeddings::mean_variance_per_dim)
        .collect()
}

/// Held-out pairs used for early stopping.
#[derive(Debug, Clone, Copy)]
pub struct Validation<'a> {
    pub edges: &'a [(usize, usize)],
    pub non_edges: &'a [(usize, usize)],
}

impl<'a> Validation<'a> {
    pub fn from_split(split: &'a DataSplit) -> Option<Self> {
        (!split.val_edges.is_empty()).then_some(Self {
            edges: &split.val_edges,
            non_edges: &split.val_non_edges,
        })
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: EncoderParameters,
    pub trace: TrainingTrace,
    /// Embeddings of every node under the returned parameters.
    pub embeddings: Embeddings,
}

/// Hop sets used for training, honouring `hops_undirected`.
pub fn training_hop_sets(
    graph: &AttributedGraph,
    config: &TrainConfig,
) -> Result<Vec<HopNeighborhoods>> {
    if config.hops_undirected && graph.is_directed() {
        compute_all_hop_sets(&graph.symmetrized(), config.max_hop)
    } else {
        compute_all_hop_sets(graph, config.max_hop)
    }
}

/// Trains on the training edges of `split` with its validation pairs.
pub fn train_split(
    graph: &AttributedGraph,
    split: &DataSplit,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    let train_graph = split.train_graph(graph)?;
    train(&train_graph, Validation::from_split(split), config)
}

struct Schedule {
    full: Option<(Vec<Triplet>, Vec<usize>)>,
    naive: Option<NaiveSampler>,
}

/// Trains an encoder on `graph`, whose edges must all be training edges.
pub fn train(
    graph: &AttributedGraph,
    validation: Option<Validation<'_>>,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if config.early_stopping && validation.is_none() {
        return Err(Error::Config(
            "early stopping requires validation edges".into(),
        ));
    }
    let attrs = graph.require_attributes()?;
    let n = graph.num_nodes();
    let mut params = EncoderParameters::init_xavier(
        attrs.ncols(),
        &config.hidden_sizes,
        config.l_half,
        derive_seed(config.seed, "init", 0),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, "sample", 0));
    let hops = training_hop_sets(graph, config)?;

    let schedule = match config.sampler {
        Sampler::Full => {
            let triplets = enumerate_triplets(&hops, config.triplet_cap)?;
            // start[i]..start[i + 1] are anchor i's triplets
            let mut start = vec![0usize; n + 1];
            for t in &triplets {
                start[t.anchor + 1] += 1;
            }
            for i in 0..n {
                start[i + 1] += start[i];
            }
            Schedule {
                full: Some((triplets, start)),
                naive: None,
            }
        }
        Sampler::Naive => Schedule {
            full: None,
            naive: NaiveSampler::new(&hops).ok(),
        },
        Sampler::NodeAnchored => Schedule {
            full: None,
            naive: None,
        },
    };
    let pair_count: Vec<usize> = hops
        .iter()
        .map(|h| {
            let m = h.nonempty_hops().len();
            m * m.saturating_sub(1) / 2
        })
        .collect();

    let batch = config.resolved_anchor_batch(n);
    let mut anchors: Vec<usize> = (0..n).collect();
    let mut adam = AdamState::new(&params);
    let mut trace = TrainingTrace::default();
    let mut best = params.clone();
    let mut best_auc = f64::NEG_INFINITY;
    let mut checks_since_best = 0usize;
    let mut triplets_seen = 0u64;

    for epoch in 1..=config.max_epochs {
        if batch < n {
            anchors.shuffle(&mut rng);
        }
        let mut epoch_loss = 0.0;
        for chunk in anchors.chunks(batch) {
            let terms: Vec<WeightedTriplet> = match config.sampler {
                Sampler::NodeAnchored => chunk
                    .iter()
                    .flat_map(|&i| sample_node_anchored(&hops[i], &mut rng).terms())
                    .collect(),
                Sampler::Full => {
                    let (triplets, start) = schedule.full.as_ref().expect("built above");
                    chunk
                        .iter()
                        .flat_map(|&i| triplets[start[i]..start[i + 1]].iter())
                        .map(|&t| t.into())
                        .collect()
                }
                Sampler::Naive => match &schedule.naive {
                    Some(sampler) => {
                        let b: usize = chunk.iter().map(|&i| pair_count[i]).sum();
                        let mut terms = sampler.sample_batch(&hops, b.max(1), &mut rng);
                        let share = chunk.len() as f64 / n as f64;
                        for t in &mut terms {
                            t.weight *= share;
                        }
                        terms
                    }
                    None => Vec::new(),
                },
            };
            if terms.is_empty() {
                continue;
            }
            triplets_seen += terms.len() as u64;
            let (loss, grads) = loss_and_grads(&params, attrs, &terms)?;
            epoch_loss += loss;
            adam_step(&mut params, &grads, &mut adam, &config.adam)?;
        }
        if !params.all_finite() {
            return Err(Error::NonFinite(format!(
                "parameters became non-finite in epoch {epoch}"
            )));
        }

        let embeddings = embed_all(&params, attrs)?;
        let check = epoch % config.eval_every == 0 || epoch == config.max_epochs;
        let val_auc = match validation {
            Some(v) if check => Some(link_auc(
                &embeddings,
                v.edges,
                v.non_edges,
                graph.is_directed(),
            )?),
            _ => None,
        };
        if config.progress {
            let auc = val_auc.map_or_else(|| "-".to_string(), |a| format!("{a:.6}"));
            eprintln!("{epoch}\t{epoch_loss:.9e}\t{auc}");
        }
        trace.records.push(EpochRecord {
            epoch,
            loss: epoch_loss,
            val_auc,
            mean_variance: embeddings.mean_variance_per_dim(),
            triplets_seen,
        });

        if let Some(auc) = val_auc {
            if auc > best_auc {
                best_auc = auc;
                trace.best_epoch = Some(epoch);
                trace.best_val_auc = Some(auc);
                checks_since_best = 0;
                if config.early_stopping {
                    best.clone_from(&params);
                }
            } else {
                checks_since_best += 1;
            }
        }
        if config.early_stopping && checks_since_best >= config.patience {
            let past_best = epoch - trace.best_epoch.unwrap_or(0);
            if config.overfit_epochs.is_none_or(|w| past_best >= w) {
                trace.stopped_early = epoch < config.max_epochs;
                break;
            }
        }
    }

    let params = if config.early_stopping {
        best
    } else {
        trace.best_epoch = trace.records.last().map(|r| r.epoch);
        params
    };
    let embeddings = embed_all(&params, attrs)?;
    Ok(TrainOutcome {
        params,
        trace,
        embeddings,
    })
}
