use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hybridbn::analytics::{analyze, domain_style};
use hybridbn::averaging::{learn_averaged, AveragedDocument, AveragedGraph, ReplicateRecord};
use hybridbn::data::{
    knn_impute, read_csv, select_transform, apply_transform, write_csv, Column, ColumnOptions, ColumnSpec, CsvOptions,
    ImputationReport, MixedTable, TransformKind, TransformSpec,
};
use hybridbn::graph::{Dag, DotStyle, NodeKind, Nodes, Pdag};
use hybridbn::model::{fit, FitDocument};
use hybridbn::search::{
    apply_whitelist, hill_climb, parse_blacklist, parse_domain_map, parse_whitelist, strategy1_blacklist,
    strategy2_whitelist, ConstraintSet, DomainMap, SearchTrace,
};
use hybridbn::validation::{compare_models, cross_validate, CvModel, CvReport, ModelSummary};
use serde::{Deserialize, Serialize};

use crate::config::{CvMode, RunConfig, Strategy};
use crate::{Cli, Command, ConstraintArgs, DataArgs, SearchArgs, UsageError};

const INCOMPLETE_HINT: &str = "the data contain missing cells; run `hybridbn preprocess` first and use its cleaned.csv";

pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if cli.seed.is_some() {
        cfg.run.seed = cli.seed;
    }
    if let Some(t) = cli.threads {
        cfg.run.threads = t;
    }
    if let Some(o) = &cli.output {
        cfg.run.output = Some(o.clone());
    }
    match &cli.command {
        Command::Preprocess {
            data,
            neighbors,
            no_transform,
        } => {
            apply_data(&mut cfg, data);
            if let Some(k) = neighbors {
                cfg.preprocess.neighbors = *k;
            }
            if *no_transform {
                cfg.preprocess.transform = false;
            }
        }
        Command::Learn {
            data,
            constraints,
            search,
        } => {
            apply_data(&mut cfg, data);
            apply_constraints(&mut cfg, constraints);
            apply_search(&mut cfg, search);
        }
        Command::Average {
            data,
            constraints,
            search,
            replicates,
            strength_threshold,
            direction_threshold,
        } => {
            apply_data(&mut cfg, data);
            apply_constraints(&mut cfg, constraints);
            apply_search(&mut cfg, search);
            if let Some(m) = replicates {
                cfg.averaging.replicates = *m;
            }
            if let Some(t) = strength_threshold {
                cfg.averaging.strength_threshold = *t;
            }
            if let Some(t) = direction_threshold {
                cfg.averaging.direction_threshold = *t;
            }
        }
        Command::Analyze { domains, .. } => {
            if domains.is_some() {
                cfg.constraints.domains = domains.clone();
            }
        }
        Command::Cv {
            data,
            constraints,
            search,
            structure,
            relearn,
            bootstrap,
            folds,
            standardize,
        } => {
            apply_data(&mut cfg, data);
            apply_constraints(&mut cfg, constraints);
            apply_search(&mut cfg, search);
            if structure.is_some() {
                cfg.cv.structure = structure.clone();
                cfg.cv.mode = CvMode::Fixed;
            }
            if *relearn {
                cfg.cv.mode = CvMode::Relearn;
            }
            if *bootstrap {
                cfg.cv.bootstrap = true;
            }
            if let Some(k) = folds {
                cfg.cv.folds = *k;
            }
            if *standardize {
                cfg.cv.standardize = true;
            }
        }
        Command::Compare { .. } => {}
    }
    cfg.resolve()?;
    if cfg.run.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.run.threads)
            .build_global()
            .context("configuring the worker pool")?;
    }
    match cli.command {
        Command::Preprocess { .. } => preprocess(&cfg),
        Command::Learn { .. } => learn(&cfg),
        Command::Average { .. } => average(&cfg),
        Command::Analyze { graph, sources, .. } => analyze_cmd(&cfg, &graph, &sources),
        Command::Cv { .. } => cv(&cfg),
        Command::Compare { runs } => compare(&cfg, &runs),
    }
}

fn apply_data(cfg: &mut RunConfig, a: &DataArgs) {
    if a.data.is_some() {
        cfg.data.path = a.data.clone();
    }
    for d in &a.discrete {
        if !cfg.schema.discrete.contains(d) {
            cfg.schema.discrete.push(d.clone());
        }
    }
}

fn apply_constraints(cfg: &mut RunConfig, a: &ConstraintArgs) {
    let c = &mut cfg.constraints;
    if let Some(s) = a.strategy {
        c.strategy = s.into();
    }
    if a.blacklist.is_some() {
        c.blacklist = a.blacklist.clone();
    }
    if a.whitelist.is_some() {
        c.whitelist = a.whitelist.clone();
    }
    if a.domains.is_some() {
        c.domains = a.domains.clone();
    }
}

fn apply_search(cfg: &mut RunConfig, a: &SearchArgs) {
    let s = &mut cfg.search;
    if let Some(v) = a.score {
        s.score = v;
    }
    if let Some(v) = a.restarts {
        s.restarts = v;
    }
    if let Some(v) = a.perturbation_size {
        s.perturbation_size = v;
    }
    if a.max_parents.is_some() {
        s.max_parents = a.max_parents;
    }
}

fn output_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.run.output.clone().unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn label(cfg: &RunConfig, dir: &Path) -> String {
    cfg.run.label.clone().unwrap_or_else(|| {
        dir.file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "run".into())
    })
}

fn write(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write(dir, name, s)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// DOT comment lines carrying the command, seed and full configuration.
fn provenance(cfg: &RunConfig, command: &str, seed: u64) -> Vec<String> {
    vec![
        format!("hybridbn {command}"),
        format!("seed = {seed}"),
        cfg.to_toml(),
    ]
}

fn load_table(cfg: &RunConfig) -> Result<(MixedTable, Vec<ColumnSpec>)> {
    let path = cfg
        .data
        .path
        .as_ref()
        .ok_or_else(|| UsageError("no data file: set data.path in the config or pass --data".into()))?;
    let text = read_text(path)?;
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .with_context(|| format!("reading the header of {}", path.display()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let specs = cfg.column_specs(&header)?;
    let opts = CsvOptions {
        missing_tokens: cfg.data.missing.clone(),
    };
    let table = read_csv(text.as_bytes(), &specs, &opts).with_context(|| format!("reading {}", path.display()))?;
    Ok((table, specs))
}

fn load_complete(cfg: &RunConfig) -> Result<MixedTable> {
    let (t, _) = load_table(cfg)?;
    if !t.is_complete() {
        return Err(anyhow::Error::new(hybridbn::data::DataError::Incomplete(t.missing_count())).context(INCOMPLETE_HINT));
    }
    Ok(t)
}

fn load_domains(path: &Path) -> Result<DomainMap> {
    parse_domain_map(&read_text(path)?).with_context(|| format!("domain map {}", path.display()))
}

fn build_constraints(cfg: &RunConfig, nodes: &Nodes) -> Result<ConstraintSet> {
    let c = &cfg.constraints;
    let denied = match &c.blacklist {
        Some(p) => parse_blacklist(&read_text(p)?).with_context(|| format!("blacklist {}", p.display()))?,
        None => Vec::new(),
    };
    let mut cs = match c.strategy {
        Strategy::None => {
            let mut cs = ConstraintSet::new();
            for (a, b) in &denied {
                cs.forbid(nodes.index_of(a)?, nodes.index_of(b)?);
            }
            cs
        }
        Strategy::Strategy1 => strategy1_blacklist(nodes, &denied)?,
        Strategy::Strategy2 => {
            let path = c
                .domains
                .as_ref()
                .ok_or_else(|| UsageError("strategy2 needs a domain map (constraints.domains or --domains)".into()))?;
            strategy2_whitelist(nodes, &load_domains(path)?, &denied)?
        }
    };
    if let Some(p) = &c.whitelist {
        let lines = parse_whitelist(&read_text(p)?).with_context(|| format!("whitelist {}", p.display()))?;
        apply_whitelist(&mut cs, nodes, &lines)?;
    }
    cs.initial_dag(nodes)?;
    Ok(cs)
}

#[derive(Serialize)]
struct PreprocessReport<'a> {
    config: &'a RunConfig,
    imputation: ImputationReport,
    transforms: Vec<TransformSpec>,
}

fn preprocess(cfg: &RunConfig) -> Result<()> {
    let (table, specs) = load_table(cfg)?;
    let (mut table, imputation) = if table.is_complete() {
        let per_column = table.columns().iter().map(|c| (c.name.clone(), 0)).collect();
        let report = ImputationReport {
            cells_imputed: 0,
            per_column,
            k: cfg.preprocess.neighbors,
        };
        (table, report)
    } else {
        knn_impute(&table, cfg.preprocess.neighbors)?
    };
    let candidates: Vec<TransformKind> = if cfg.preprocess.transforms.is_empty() {
        TransformKind::ALL.to_vec()
    } else {
        cfg.preprocess.transforms.clone()
    };
    let mut transforms = Vec::new();
    if cfg.preprocess.transform {
        for (c, spec) in specs.iter().enumerate() {
            if spec.kind != NodeKind::Continuous || cfg.preprocess.skip.contains(&spec.name) {
                continue;
            }
            let x = table.continuous(c).expect("continuous").to_vec();
            let opts = ColumnOptions {
                percentage: spec.percentage,
            };
            let chosen = select_transform(&spec.name, &x, &candidates, opts)
                .with_context(|| format!("choosing a transform for `{}`", spec.name))?;
            let y = apply_transform(&chosen.transform, &x)?;
            table.replace_column(c, Column::from_values(spec.name.clone(), y))?;
            transforms.push(chosen);
        }
    }
    let dir = output_dir(cfg)?;
    let mut csv_out = Vec::new();
    write_csv(&table, &mut csv_out, "")?;
    write(&dir, "cleaned.csv", csv_out)?;
    write_json(
        &dir,
        "preprocess.json",
        &PreprocessReport {
            config: cfg,
            imputation,
            transforms,
        },
    )?;
    write(&dir, "resolved_config.toml", cfg.to_toml())?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct LearnDocument {
    config: RunConfig,
    seed: u64,
    factorization: String,
    #[serde(flatten)]
    fit: FitDocument,
    trace: SearchTrace,
}

#[derive(Serialize, Deserialize)]
struct Summary {
    #[serde(flatten)]
    model: ModelSummary,
    source: String,
    seed: u64,
}

fn learn(cfg: &RunConfig) -> Result<()> {
    let table = load_complete(cfg)?;
    let nodes = table.schema();
    let cs = build_constraints(cfg, &nodes)?;
    let (dag, trace) = hill_climb(&table, &cs, &cfg.search)?;
    let fitted = fit(&dag, &table)?;
    let dir = output_dir(cfg)?;
    let doc = LearnDocument {
        config: cfg.clone(),
        seed: cfg.search.seed,
        factorization: dag.factorization().to_string(),
        fit: fitted.to_document(),
        trace,
    };
    write_json(&dir, "learn.json", &doc)?;
    let style = DotStyle {
        comments: provenance(cfg, "learn", cfg.search.seed),
        ..Default::default()
    };
    write(&dir, "dag.dot", dag.to_dot(&style))?;
    write_json(
        &dir,
        "summary.json",
        &Summary {
            model: ModelSummary {
                label: label(cfg, &dir),
                bic: fitted.bic(),
                aic: fitted.aic(),
                posterior_mse: None,
            },
            source: "learn".into(),
            seed: cfg.search.seed,
        },
    )?;
    write(&dir, "resolved_config.toml", cfg.to_toml())?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct OrientedSummary {
    note: String,
    edges: Vec<(String, String)>,
    skipped: Vec<(String, String)>,
    bic: f64,
    aic: f64,
}

#[derive(Serialize, Deserialize)]
struct AverageDocument {
    config: RunConfig,
    seed: u64,
    resampling: String,
    graph: AveragedDocument,
    oriented: OrientedSummary,
    replicates: Vec<ReplicateRecord>,
}

fn average(cfg: &RunConfig) -> Result<()> {
    let table = load_complete(cfg)?;
    let nodes = table.schema();
    let cs = build_constraints(cfg, &nodes)?;
    let (graph, replicates) = learn_averaged(&table, &cs, &cfg.search, &cfg.averaging)?;
    let (oriented, skipped) = graph.orient();
    let fitted = fit(&oriented, &table)?;
    let dir = output_dir(cfg)?;
    let seed = cfg.averaging.seed;
    let doc = AverageDocument {
        config: cfg.clone(),
        seed,
        resampling: "rows drawn uniformly with replacement (not stratified)".into(),
        graph: graph.to_document(),
        oriented: OrientedSummary {
            note: "post-processing: consensus edges oriented strongest first into an acyclic graph".into(),
            edges: oriented.named_edges(),
            skipped,
            bic: fitted.bic(),
            aic: fitted.aic(),
        },
        replicates,
    };
    write_json(&dir, "averaged.json", &doc)?;
    write(&dir, "strengths.csv", graph.strengths_csv())?;
    let mut style = DotStyle {
        comments: provenance(cfg, "average", seed),
        ..Default::default()
    };
    if let Some(p) = &cfg.constraints.domains {
        let ds = domain_style(&load_domains(p)?);
        style.node_fill = ds.node_fill;
        style.comments.extend(ds.comments);
    }
    write(&dir, "averaged.dot", graph.to_dot(style))?;
    write_json(
        &dir,
        "summary.json",
        &Summary {
            model: ModelSummary {
                label: label(cfg, &dir),
                bic: fitted.bic(),
                aic: fitted.aic(),
                posterior_mse: None,
            },
            source: "average (oriented consensus)".into(),
            seed,
        },
    )?;
    write(&dir, "resolved_config.toml", cfg.to_toml())?;
    Ok(())
}

/// A structure artifact from `learn` or `average`.
enum Structure {
    Dag(Dag),
    Averaged(AveragedGraph),
}

impl Structure {
    fn pdag(&self) -> Pdag {
        match self {
            Structure::Dag(d) => d.to_pdag(),
            Structure::Averaged(g) => g.pdag.clone(),
        }
    }

    fn dag(&self) -> Dag {
        match self {
            Structure::Dag(d) => d.clone(),
            Structure::Averaged(g) => g.orient().0,
        }
    }
}

fn load_structure(path: &Path) -> Result<Structure> {
    let text = read_text(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if let Some(graph) = value.get("graph") {
        let doc: AveragedDocument = serde_json::from_value(graph.clone()).with_context(|| format!("averaged graph in {}", path.display()))?;
        return Ok(Structure::Averaged(AveragedGraph::from_document(doc)?));
    }
    #[derive(Deserialize)]
    struct Plain {
        nodes: Vec<hybridbn::graph::Node>,
        edges: Vec<(String, String)>,
    }
    let plain: Plain = serde_json::from_value(value).with_context(|| format!("graph in {}", path.display()))?;
    Ok(Structure::Dag(Dag::from_edges(Nodes::new(plain.nodes)?, &plain.edges)?))
}

#[derive(Serialize)]
struct AnalysisDocument<'a> {
    config: &'a RunConfig,
    graph: String,
    #[serde(flatten)]
    report: hybridbn::analytics::AnalyticsReport,
}

fn analyze_cmd(cfg: &RunConfig, graph: &Path, sources: &[String]) -> Result<()> {
    let structure = load_structure(graph)?;
    let pdag = structure.pdag();
    let domains = cfg.constraints.domains.as_deref().map(load_domains).transpose()?;
    let report = analyze(&pdag, sources, domains.as_ref())?;
    let dir = output_dir(cfg)?;
    let mut md = format!("<!-- graph: {} -->\n", graph.display());
    md.push_str(&report.to_markdown());
    write(&dir, "analysis.md", md)?;
    let mut style = domains.as_ref().map(domain_style).unwrap_or_default();
    style.comments.insert(0, format!("hybridbn analyze {}", graph.display()));
    let dot = match &structure {
        Structure::Averaged(g) => g.to_dot(style),
        Structure::Dag(d) => d.to_dot(&style),
    };
    write(&dir, "analysis.dot", dot)?;
    write_json(
        &dir,
        "analysis.json",
        &AnalysisDocument {
            config: cfg,
            graph: graph.display().to_string(),
            report,
        },
    )?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct CvDocument {
    config: RunConfig,
    seed: u64,
    report: CvReport,
}

fn cv(cfg: &RunConfig) -> Result<()> {
    let table = load_complete(cfg)?;
    let model = match cfg.cv.mode {
        CvMode::Fixed => {
            let path = cfg
                .cv
                .structure
                .as_ref()
                .ok_or_else(|| UsageError("fixed-structure cv needs --structure (or cv.structure); use --relearn otherwise".into()))?;
            let dag = load_structure(path)?.dag();
            if dag.nodes() != &table.schema() {
                bail!(hybridbn::data::DataError::SchemaMismatch);
            }
            CvModel::Fixed(dag)
        }
        CvMode::Relearn => CvModel::Learn {
            constraints: build_constraints(cfg, &table.schema())?,
            search: cfg.search,
            averaging: cfg.cv.bootstrap.then_some(cfg.averaging),
        },
    };
    let report = cross_validate(&table, &model, &cfg.cv.config())?;
    let dir = output_dir(cfg)?;
    let mut text = String::new();
    let width = report.per_node.iter().map(|m| m.node.chars().count()).max().unwrap_or(4).max(4);
    text.push_str(&format!("{:<width$}  {:>12}\n", "Node", "MSE"));
    for m in &report.per_node {
        text.push_str(&format!("{:<width$}  {:>12.6}\n", m.node, m.mse));
    }
    text.push_str(&format!("{:<width$}  {:>12.6}\n", "Posterior MSE", report.posterior_mse, width = width));
    write(&dir, "cv.txt", text)?;
    write_json(
        &dir,
        "cv.json",
        &CvDocument {
            config: cfg.clone(),
            seed: cfg.cv.seed,
            report,
        },
    )?;
    write(&dir, "resolved_config.toml", cfg.to_toml())?;
    Ok(())
}

fn compare(cfg: &RunConfig, runs: &[PathBuf]) -> Result<()> {
    let mut models = Vec::with_capacity(runs.len());
    for run in runs {
        let summary_path = run.join("summary.json");
        let s: Summary = serde_json::from_str(&read_text(&summary_path)?)
            .with_context(|| format!("parsing {}", summary_path.display()))?;
        let mut m = s.model;
        let cv_path = run.join("cv.json");
        if cv_path.exists() {
            let cv: CvDocument =
                serde_json::from_str(&read_text(&cv_path)?).with_context(|| format!("parsing {}", cv_path.display()))?;
            m.posterior_mse = Some(cv.report.posterior_mse);
        }
        models.push(m);
    }
    let table = compare_models(models)?;
    let text = table.render();
    print!("{text}");
    if cfg.run.output.is_some() {
        let dir = output_dir(cfg)?;
        write(&dir, "comparison.txt", &text)?;
        write_json(&dir, "comparison.json", &table)?;
    }
    Ok(())
}
