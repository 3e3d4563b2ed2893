use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use gaussembed::encoder::embed_all;
use gaussembed::eval::{
    detect_latent_dimensions, diversity_variance_report, eval_classification, eval_inductive,
    eval_link_prediction, neighborhood_diversity, pruning_curve, ClassificationConfig,
    InductiveConfig, SplitPart,
};
use gaussembed::graph::{
    attribute_shape, generate_sbm, load_attributes, load_edge_list, load_labels, split_edges,
    write_attributes, write_edge_list, write_labels, SbmConfig,
};
use gaussembed::train::train_split;
use gaussembed::{
    AttributedGraph, Attributes, DataSplit, Error, EvaluationReport, TrainConfig, TrainingTrace,
};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::args::{
    Cli, Command, EmbedArgs, EvalArgs, GraphSource, PartArg, Protocol, SynthArgs, TrainArgs,
};
use crate::checkpoint::{load_model, save_model, ModelMetadata};
use crate::{CliError, CliResult};

pub const MODEL_FILE: &str = "model.g2gm";
pub const TRACE_FILE: &str = "trace.json";
pub const SPLIT_FILE: &str = "split.json";
pub const REPORT_FILE: &str = "report.json";

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Train(a) => cmd_train(&a),
        Command::Embed(a) => cmd_embed(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Synth(a) => cmd_synth(&a),
    }
}

fn io_err(path: &Path, source: std::io::Error) -> CliError {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
    .into()
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write_text(path, &text)
}

fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| {
        Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        }
        .into()
    })
}

/// Loads structure, attributes (or identity) and optional labels.
pub fn load_graph(source: &GraphSource, directed: bool) -> CliResult<AttributedGraph> {
    let hint = match &source.attrs {
        Some(p) => Some(attribute_shape(p)?.0),
        None => None,
    };
    let (graph, stats) = load_edge_list(&source.graph, directed, hint)?;
    if stats.self_loops + stats.duplicates > 0 {
        eprintln!(
            "warning: dropped {} self-loops and {} duplicate edges",
            stats.self_loops, stats.duplicates
        );
    }
    let n = graph.num_nodes();
    let mut graph = match &source.attrs {
        Some(p) => graph.with_attributes(load_attributes(p, n)?)?,
        None => graph.with_one_hot(),
    };
    if let Some(p) = &source.labels {
        graph = graph.with_labels(load_labels(p, n)?)?;
    }
    Ok(graph)
}

fn train_config(a: &TrainArgs) -> CliResult<TrainConfig> {
    if a.dim == 0 || !a.dim.is_multiple_of(2) {
        return Err(CliError::Usage(format!(
            "--dim must be a positive even number (got {}); each node uses dim/2 means and \
             dim/2 variances",
            a.dim
        )));
    }
    Ok(TrainConfig {
        max_hop: a.k,
        l_half: a.dim / 2,
        hidden_sizes: a.hidden.clone(),
        adam: gaussembed::train::AdamConfig {
            learning_rate: a.lr,
            ..Default::default()
        },
        max_epochs: a.epochs,
        eval_every: a.eval_every,
        patience: a.patience,
        anchor_batch: a.anchor_batch,
        sampler: a.sampler.into(),
        seed: a.seed,
        early_stopping: !a.no_early_stopping,
        overfit_epochs: a.overfit_epochs,
        hops_undirected: a.hops_undirected,
        progress: !a.quiet,
        ..TrainConfig::default()
    })
}

pub fn cmd_train(a: &TrainArgs) -> CliResult<()> {
    let config = train_config(a)?;
    config.validate()?;
    let graph = load_graph(&a.source, a.source.directed)?;
    let split = split_edges(
        &graph,
        a.val_frac,
        a.test_frac,
        a.edge_cover,
        gaussembed::seed::derive_seed(a.seed, "split", 0),
    )?;
    let mut config = config;
    if split.val_edges.is_empty() && config.early_stopping {
        eprintln!("warning: no validation edges, early stopping disabled");
        config.early_stopping = false;
    }
    let outcome = train_split(&graph, &split, &config)?;

    fs::create_dir_all(&a.out).map_err(|e| io_err(&a.out, e))?;
    let mut meta = ModelMetadata::new(&outcome.params, config.max_hop, graph.is_directed(), a.seed);
    meta.one_hot = a.source.one_hot;
    meta.hops_undirected = a.hops_undirected;
    save_model(&a.out.join(MODEL_FILE), &outcome.params, &meta)?;
    write_json(&a.out.join(TRACE_FILE), &outcome.trace)?;
    write_json(&a.out.join(SPLIT_FILE), &split)?;

    if !split.test_edges.is_empty() {
        let report = eval_link_prediction(&outcome.params, &graph, &split, SplitPart::Test)?;
        write_json(&a.out.join(REPORT_FILE), &report)?;
        println!("{}", report.to_json());
    }
    Ok(())
}

fn embedding_lines(emb: &gaussembed::Embeddings) -> String {
    let mut out = String::new();
    for i in 0..emb.len() {
        let row = emb.get(i);
        write!(out, "{i}").unwrap();
        for v in row.mu.iter().chain(row.var) {
            write!(out, "\t{v:.16e}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn cmd_embed(a: &EmbedArgs) -> CliResult<()> {
    let (params, meta) = load_model(&a.model)?;
    let attrs = match (&a.attrs, a.nodes) {
        (Some(p), _) => {
            let (n, d) = attribute_shape(p)?;
            if d != params.input_dim() {
                return Err(Error::Shape(format!(
                    "attribute dimension {d} does not match the model input dimension {}",
                    params.input_dim()
                ))
                .into());
            }
            load_attributes(p, n)?
        }
        (None, Some(n)) if meta.one_hot => {
            if n != params.input_dim() {
                return Err(Error::Shape(format!(
                    "{n} one-hot nodes, model input dimension is {}",
                    params.input_dim()
                ))
                .into());
            }
            Attributes::OneHot(n)
        }
        _ => {
            return Err(CliError::Usage(
                "--attrs is required (or --nodes for one-hot models)".into(),
            ))
        }
    };
    let emb = embed_all(&params, &attrs)?;
    write_text(&a.out, &embedding_lines(&emb))
}

fn default_sibling(model: &Path, name: &str) -> PathBuf {
    model.parent().unwrap_or(Path::new(".")).join(name)
}

fn part(p: PartArg) -> SplitPart {
    match p {
        PartArg::Val => SplitPart::Val,
        PartArg::Test => SplitPart::Test,
    }
}

pub fn cmd_eval(a: &EvalArgs) -> CliResult<()> {
    let (params, meta) = load_model(&a.model)?;
    let directed = a.source.directed || (meta.directed && !a.source.undirected);
    let graph = load_graph(&a.source, directed)?;
    let seed = a.seed.unwrap_or(meta.seed);
    let manifest = || -> CliResult<DataSplit> {
        let path = a
            .split_manifest
            .clone()
            .unwrap_or_else(|| default_sibling(&a.model, SPLIT_FILE));
        read_json(&path)
    };

    let report: EvaluationReport = match a.protocol {
        Protocol::Link => eval_link_prediction(&params, &graph, &manifest()?, part(a.part))?,
        Protocol::Classify => {
            let labels = graph.labels().ok_or_else(|| {
                Error::LabelsRequired("the classify protocol needs --labels".into())
            })?;
            let emb = embed_all(&params, graph.attributes().expect("loaded"))?;
            let config = ClassificationConfig {
                train_fractions: a.fractions.clone(),
                n_trials: a.trials,
                seed,
                include_log_var: a.log_var,
                ..Default::default()
            };
            eval_classification(&emb, labels, &config)?
        }
        Protocol::Inductive => {
            let config = InductiveConfig {
                hidden_fraction: a.hidden_fraction,
                val_frac: 0.05,
                train: TrainConfig {
                    max_hop: meta.k,
                    l_half: meta.l_half,
                    hidden_sizes: meta.hidden_sizes.clone(),
                    max_epochs: a.epochs,
                    seed,
                    hops_undirected: meta.hops_undirected,
                    ..TrainConfig::default()
                },
            };
            eval_inductive(&graph, &config)?
        }
        Protocol::Uncertainty => uncertainty_report(a, &params, &graph, &manifest()?)?,
    };

    if let Some(prefix) = &a.csv_prefix {
        for (name, table) in &report.tables {
            let mut path = prefix.clone().into_os_string();
            path.push(format!("{name}.csv"));
            write_text(Path::new(&path), &table.to_csv())?;
        }
    }
    match &a.out {
        Some(p) => write_json(p, &report),
        None => {
            println!("{}", report.to_json());
            Ok(())
        }
    }
}

fn uncertainty_report(
    a: &EvalArgs,
    params: &gaussembed::EncoderParameters,
    graph: &AttributedGraph,
    split: &DataSplit,
) -> CliResult<EvaluationReport> {
    let trace_path = a
        .trace
        .clone()
        .unwrap_or_else(|| default_sibling(&a.model, TRACE_FILE));
    let trace: TrainingTrace = read_json(&trace_path)?;
    let latent = detect_latent_dimensions(&trace, a.window, a.threshold)?;
    let mut report = pruning_curve(params, graph, split, part(a.part))?;
    report.protocol = "uncertainty".into();
    report
        .statistics
        .insert("latent_dimensions".into(), latent.kept.len() as f64);
    report
        .statistics
        .insert("flagged_dimensions".into(), latent.flagged.len() as f64);
    let curve = &report.tables["curve"];
    let pruned_auc = curve.rows[latent.flagged.len().min(curve.rows.len() - 1)][2];
    report
        .metrics
        .insert("auc_flagged_removed".into(), pruned_auc);
    if graph.labels().is_some() {
        let train_graph = split.train_graph(graph)?;
        let diversity = neighborhood_diversity(&train_graph, a.p)?;
        let emb = embed_all(params, graph.attributes().expect("loaded"))?;
        let div = diversity_variance_report(&emb, &diversity)?;
        report.statistics.extend(div.statistics);
        report.tables.extend(div.tables);
    }
    Ok(report)
}

pub fn cmd_synth(a: &SynthArgs) -> CliResult<()> {
    let config = SbmConfig {
        nodes: a.nodes,
        blocks: a.blocks,
        p_in: a.p_in,
        p_out: a.p_out,
        attr_dim: a.attr_dim,
        attr_noise: a.attr_noise,
        bridges: a.bridges,
        bridge_links: a.bridge_links,
        seed: a.seed,
    };
    let graph = generate_sbm(&config)?;
    let with_ext = |ext: &str| {
        let mut p = a.out_prefix.clone().into_os_string();
        p.push(ext);
        PathBuf::from(p)
    };
    if let Some(dir) = with_ext(".edges")
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
    {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    write_edge_list(with_ext(".edges"), &graph)?;
    write_attributes(with_ext(".attrs"), graph.attributes().expect("generated"))?;
    write_labels(with_ext(".labels"), graph.labels().expect("generated"))?;
    Ok(())
}
