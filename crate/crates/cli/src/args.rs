use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use gaussembed::Sampler;

#[derive(Debug, Parser)]
#[command(
    name = "gaussembed",
    version,
    about = "Gaussian node embeddings for attributed graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split a graph, train an encoder and write model, trace and split manifest.
    Train(TrainArgs),
    /// Embed every row of an attribute file with a trained model.
    Embed(EmbedArgs),
    /// Run an evaluation protocol and print a JSON report.
    Eval(EvalArgs),
    /// Generate a synthetic attributed block-model graph.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GraphSource {
    /// Tab-separated edge list.
    #[arg(long)]
    pub graph: PathBuf,
    /// Attribute triplet file.
    #[arg(long, conflicts_with = "one_hot", required_unless_present = "one_hot")]
    pub attrs: Option<PathBuf>,
    /// Use the identity as attribute matrix.
    #[arg(long)]
    pub one_hot: bool,
    #[arg(long, conflicts_with = "undirected")]
    pub directed: bool,
    /// Treat the edge list as undirected (the default).
    #[arg(long)]
    pub undirected: bool,
    /// Node labels, `node<TAB>label` per line.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplerArg {
    NodeAnchored,
    Naive,
    Full,
}

impl From<SamplerArg> for Sampler {
    fn from(s: SamplerArg) -> Self {
        match s {
            SamplerArg::NodeAnchored => Sampler::NodeAnchored,
            SamplerArg::Naive => Sampler::Naive,
            SamplerArg::Full => Sampler::Full,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub source: GraphSource,
    /// Embedding budget L; each node gets L/2 means and L/2 variances.
    #[arg(long, default_value_t = 128)]
    pub dim: usize,
    /// Hop truncation K.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Hidden layer sizes, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "512")]
    pub hidden: Vec<usize>,
    #[arg(long, default_value_t = 2000)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.001)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.05)]
    pub val_frac: f64,
    #[arg(long, default_value_t = 0.10)]
    pub test_frac: f64,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub edge_cover: bool,
    #[arg(long, value_enum, default_value_t = SamplerArg::NodeAnchored)]
    pub sampler: SamplerArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for model.g2gm, trace.json, split.json and report.json.
    #[arg(long)]
    pub out: PathBuf,
    /// Keep training this many epochs past the best validation epoch.
    #[arg(long)]
    pub overfit_epochs: Option<usize>,
    #[arg(long, default_value_t = 5)]
    pub eval_every: usize,
    #[arg(long, default_value_t = 10)]
    pub patience: usize,
    /// Anchors per optimizer step (default: all nodes up to 10000, else 512).
    #[arg(long)]
    pub anchor_batch: Option<usize>,
    /// Train until --epochs without validation-based stopping.
    #[arg(long)]
    pub no_early_stopping: bool,
    /// Compute hop sets of a directed graph on its symmetrized structure.
    #[arg(long)]
    pub hops_undirected: bool,
    /// Suppress per-epoch progress lines on standard error.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EmbedArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Attribute file; omit with --one-hot models to embed the identity rows.
    #[arg(long)]
    pub attrs: Option<PathBuf>,
    /// Number of nodes for one-hot models.
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Protocol {
    Link,
    Classify,
    Inductive,
    Uncertainty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PartArg {
    Val,
    Test,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long)]
    pub split_manifest: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub protocol: Protocol,
    #[arg(long, value_enum, default_value_t = PartArg::Test)]
    pub part: PartArg,
    /// Training trace, required by the uncertainty protocol.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Labeled-node fractions for the classification probe.
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    pub fractions: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    /// Add log-variances to the classification features.
    #[arg(long)]
    pub log_var: bool,
    /// Epoch window of the latent-dimension rule.
    #[arg(long, default_value_t = 200)]
    pub window: usize,
    /// Normalized slope above which a dimension is flagged.
    #[arg(long, default_value_t = 1e-3)]
    pub threshold: f64,
    /// Hop radius of the neighborhood diversity.
    #[arg(long, default_value_t = 3)]
    pub p: usize,
    #[arg(long, default_value_t = 0.1)]
    pub hidden_fraction: f64,
    /// Epoch cap for the retraining done by the inductive protocol.
    #[arg(long, default_value_t = 2000)]
    pub epochs: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write report tables as CSV files with this path prefix.
    #[arg(long)]
    pub csv_prefix: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 300)]
    pub nodes: usize,
    #[arg(long, default_value_t = 3)]
    pub blocks: usize,
    #[arg(long, default_value_t = 0.1)]
    pub p_in: f64,
    #[arg(long, default_value_t = 0.01)]
    pub p_out: f64,
    #[arg(long, default_value_t = 32)]
    pub attr_dim: usize,
    #[arg(long, default_value_t = 0.1)]
    pub attr_noise: f64,
    /// Planted bridge nodes, each wired into every other block.
    #[arg(long, default_value_t = 0)]
    pub bridges: usize,
    /// Links from each bridge node into each foreign block.
    #[arg(long, default_value_t = 3)]
    pub bridge_links: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Files are written as PREFIX.edges, PREFIX.attrs and PREFIX.labels.
    #[arg(long)]
    pub out_prefix: PathBuf,
}
