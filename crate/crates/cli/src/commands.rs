//! Subcommand implementations.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ngramdep::conll::{parse_conll_with, write_conll, DependencyTree, ReadOptions, Sentence};
use ngramdep::counts::{apply_cutoff, merge_tables, read_table, table_to_string, CountTable, TableMeta};
use ngramdep::counts::{SURFACE_CUTOFF, SYNTACTIC_CUTOFF};
use ngramdep::eval::{self, EvalOptions, Rounding};
use ngramdep::paraphrase::{finalize_paraphrase, write_paraphrase, ParaphraseLists};
use ngramdep::parser::storage::{model_from_bytes, model_to_bytes};
use ngramdep::parser::{train, Model, ParserError, Resources, TrainConfig};
use ngramdep::query::{QueryKind, QuerySet};
use ngramdep::scalar::Scalar;
use ngramdep::surface::{scan_lines, CorpusFormat, ScanStats, SurfaceQueries};
use ngramdep::syntactic::{scan_syngram_lines, SyntacticQueries, UnaryMode};
use ngramdep::textio::{open_text, read_to_string};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;
use crate::{AnalyzeArgs, Cli, Command, CorpusKind, CoverageArgs, CoverageKind, EvalArgs, ParseArgs, ScanArgs};
use crate::{TableArgs, TrainArgs, UsageError};

pub const ARC_QUERIES: &str = "arcs.tsv";
pub const TRIPLE_QUERIES: &str = "triples.tsv";
pub const SIBLING_QUERIES: &str = "siblings.tsv";
pub const SYNTACTIC_KEYS: &str = "syntactic-keys.txt";

const QUERY_FILES: [(&str, QueryKind); 3] = [
    (ARC_QUERIES, QueryKind::Arc),
    (TRIPLE_QUERIES, QueryKind::Triple),
    (SIBLING_QUERIES, QueryKind::Sibling),
];

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn set_if<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn apply_tables(cfg: &mut PipelineConfig, t: &TableArgs) {
    let c = &mut cfg.tables;
    let pairs = [
        (&mut c.surface, &t.surface_table),
        (&mut c.surface_paraphrase, &t.surface_paraphrase),
        (&mut c.syntactic, &t.syntactic_table),
        (&mut c.syntactic_words, &t.syntactic_words),
        (&mut c.syntactic_tags, &t.syntactic_tags),
    ];
    for (slot, flag) in pairs {
        if flag.is_some() {
            slot.clone_from(flag);
        }
    }
}

fn split_list(list: &str) -> Vec<String> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::to_owned).collect()
}

/// The configuration file with every flag of `cli` applied on top.
pub fn resolve(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::load(cli.config.as_deref())?;
    set_if(&mut cfg.seed, cli.seed);
    if cli.jobs.is_some() {
        cfg.jobs = cli.jobs;
    }
    cfg.strict |= cli.strict;
    match &cli.command {
        Command::Scan(a) => {
            if a.cutoff.is_some() {
                cfg.scan.cutoff = a.cutoff;
            }
            set_if(&mut cfg.scan.unary_mode, a.unary_mode.clone());
        }
        Command::Train(a) => {
            let t = &mut cfg.train;
            set_if(&mut t.order, a.order);
            set_if(&mut t.training_k, a.training_k);
            set_if(&mut t.iters, a.iters);
            set_if(&mut t.loss_type, a.loss_type.clone());
            set_if(&mut t.scalar, a.scalar.clone());
            set_if(&mut t.punct_tags, a.punct_tags.as_deref().map(split_list));
            if a.multi_root {
                t.single_root = false;
            }
            set_if(&mut cfg.features.groups, a.groups.as_deref().map(split_list));
            apply_tables(&mut cfg, &a.tables);
        }
        Command::Parse(a) => apply_tables(&mut cfg, &a.tables),
        Command::Evaluate(a) => {
            cfg.eval.include_punct |= a.include_punct;
            set_if(&mut cfg.eval.resamples, a.resamples);
            set_if(&mut cfg.eval.alpha, a.alpha);
        }
        Command::Analyze(a) => {
            cfg.eval.include_punct |= a.include_punct;
            set_if(&mut cfg.eval.rounding, a.rounding.clone());
        }
        Command::Coverage(a) => set_if(&mut cfg.eval.rounding, a.rounding.clone()),
        Command::ExtractQueries { .. } | Command::BuildTable { .. } => {}
    }
    Ok(cfg)
}

pub fn execute(cli: Cli) -> Result<()> {
    let cfg = resolve(&cli)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.unwrap_or(0))
        .build()
        .map_err(|e| usage(format!("worker pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::ExtractQueries { out, treebanks } => extract_queries(out, treebanks),
        Command::Scan(a) => scan(a, &cfg),
        Command::BuildTable { out, cutoff, tables } => build_table(out, *cutoff, tables),
        Command::Train(a) => train_cmd(a, &cfg),
        Command::Parse(a) => parse_cmd(a, &cfg),
        Command::Evaluate(a) => evaluate(a, &cfg),
        Command::Analyze(a) => analyze(a, &cfg),
        Command::Coverage(a) => coverage(a, &cfg),
    })
}

fn read_text(path: &Path) -> Result<String> {
    read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_file(path: &Path, data: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, data).with_context(|| format!("writing {}", path.display()))
}

pub fn read_treebank(path: &Path, single_root: bool) -> Result<Vec<Sentence>> {
    let text = read_text(path)?;
    parse_conll_with(&text, ReadOptions { single_root }).with_context(|| path.display().to_string())
}

fn extract_queries(out: &Path, treebanks: &[PathBuf]) -> Result<()> {
    let mut set = QuerySet::new();
    for path in treebanks {
        for s in read_treebank(path, false)? {
            set.add_sentence(&s);
        }
    }
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    for (name, kind) in QUERY_FILES {
        write_file(&out.join(name), set.to_tsv(kind))?;
    }
    let keys: String = set.syntactic_keys().into_iter().map(|k| k + "\n").collect();
    write_file(&out.join(SYNTACTIC_KEYS), keys)?;
    eprintln!(
        "{} arc, {} triple, {} sibling queries",
        set.of_kind(QueryKind::Arc).count(),
        set.of_kind(QueryKind::Triple).count(),
        set.of_kind(QueryKind::Sibling).count()
    );
    Ok(())
}

/// The query set in `dir` and a digest of its files.
pub fn load_queries(dir: &Path) -> Result<(QuerySet, String)> {
    let mut set = QuerySet::new();
    let mut all = String::new();
    for (name, _) in QUERY_FILES {
        let path = dir.join(name);
        let text = read_text(&path)?;
        set.extend_from_tsv(&text)
            .map_err(|(line, e)| anyhow::anyhow!("{}:{line}: {e}", path.display()))?;
        all.push_str(&text);
    }
    Ok((set, hex(all.as_bytes())))
}

fn unary_mode(name: &str) -> Result<UnaryMode> {
    match name {
        "role" => Ok(UnaryMode::RoleRestricted),
        "any" => Ok(UnaryMode::AnyOccurrence),
        _ => Err(usage(format!("unary mode must be \"role\" or \"any\", got {name:?}"))),
    }
}

fn rounding(name: &str) -> Result<Rounding> {
    match name {
        "half-up" => Ok(Rounding::HalfUp),
        "two-stage" => Ok(Rounding::TwoStage),
        _ => Err(usage(format!("rounding must be \"half-up\" or \"two-stage\", got {name:?}"))),
    }
}

/// Sibling path of a table: "web.tsv" becomes "web.<suffix>".
pub fn companion(table: &Path, suffix: &str) -> PathBuf {
    table.with_extension(suffix)
}

fn lists_bytes(lists: &ParaphraseLists) -> Vec<u8> {
    let mut buf = Vec::new();
    write_paraphrase(lists, &mut buf).expect("writing to memory cannot fail");
    buf
}

fn report_stats(path: &Path, stats: &ScanStats) {
    eprintln!("{}: {} records, {} malformed lines skipped", path.display(), stats.records, stats.malformed);
}

fn scan(args: &ScanArgs, cfg: &PipelineConfig) -> Result<()> {
    let (set, query_digest) = load_queries(&args.queries)?;
    let kind = args.kind;
    let mode = unary_mode(&cfg.scan.unary_mode)?;
    let default_cutoff = if kind == CorpusKind::Syntactic { SYNTACTIC_CUTOFF } else { SURFACE_CUTOFF };
    let cutoff = cfg.scan.cutoff.unwrap_or(default_cutoff);
    let (k_mid, k_edge) = (cfg.scan.k_mid, cfg.scan.k_edge);

    let mut meta = TableMeta::new(kind.name(), "");
    meta.extra.insert("queries".into(), query_digest);
    meta.extra.insert("k-mid".into(), k_mid.to_string());
    meta.extra.insert("k-edge".into(), k_edge.to_string());
    if kind == CorpusKind::Syntactic {
        meta.extra.insert("unary-mode".into(), cfg.scan.unary_mode.clone());
    }
    let settings: String = meta.extra.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
    meta.config = hex(format!("source={}\n{settings}", meta.source).as_bytes())[..16].to_owned();
    let strict = cfg.strict;

    match kind {
        CorpusKind::Web1t | CorpusKind::Books => {
            let format = if kind == CorpusKind::Books { CorpusFormat::Books } else { CorpusFormat::Web1T };
            let q = SurfaceQueries::from_query_set(&set);
            let parts = args
                .shards
                .par_iter()
                .map(|p| {
                    let mut acc = q.new_accumulator();
                    let reader = open_text(p).with_context(|| format!("opening {}", p.display()))?;
                    let stats = scan_lines(reader, format, &q, &mut acc, strict).with_context(|| p.display().to_string())?;
                    Ok((acc, stats))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut acc = q.new_accumulator();
            for (p, (part, stats)) in args.shards.iter().zip(parts) {
                report_stats(p, &stats);
                acc.merge(part);
            }
            let table = apply_cutoff(&acc.to_table(&q, meta), cutoff);
            let lists = finalize_paraphrase(&acc.paraphrase(&q), k_mid, k_edge);
            write_file(&args.out, table_to_string(&table))?;
            write_file(&companion(&args.out, "paraphrase.tsv"), lists_bytes(&lists))?;
            eprintln!("{} entries, {} context lists", table.len(), lists.len());
        }
        CorpusKind::Syntactic => {
            let q = SyntacticQueries::from_query_set(&set).with_unary_mode(mode);
            let parts = args
                .shards
                .par_iter()
                .map(|p| {
                    let mut acc = q.new_accumulator();
                    let reader = open_text(p).with_context(|| format!("opening {}", p.display()))?;
                    let stats = scan_syngram_lines(reader, &q, &mut acc, strict).with_context(|| p.display().to_string())?;
                    Ok((acc, stats))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut acc = q.new_accumulator();
            for (p, (part, stats)) in args.shards.iter().zip(parts) {
                report_stats(p, &stats);
                acc.merge(part);
            }
            let table = apply_cutoff(&acc.to_table(meta), cutoff);
            let words = finalize_paraphrase(&acc.words, k_mid, k_edge);
            let tags = finalize_paraphrase(&acc.tags, k_mid, k_edge);
            write_file(&args.out, table_to_string(&table))?;
            write_file(&companion(&args.out, "words.tsv"), lists_bytes(&words))?;
            write_file(&companion(&args.out, "tags.tsv"), lists_bytes(&tags))?;
            eprintln!("{} entries at cutoff {cutoff}", table.len());
        }
    }
    Ok(())
}

fn load_table(path: &Path) -> Result<CountTable> {
    let reader = open_text(path).with_context(|| format!("opening {}", path.display()))?;
    read_table(reader).with_context(|| path.display().to_string())
}

fn build_table(out: &Path, cutoff: Option<u64>, tables: &[PathBuf]) -> Result<()> {
    let mut merged = load_table(&tables[0])?;
    for path in &tables[1..] {
        merged = merge_tables(&merged, &load_table(path)?).with_context(|| path.display().to_string())?;
    }
    if let Some(c) = cutoff {
        merged = apply_cutoff(&merged, c);
    }
    write_file(out, table_to_string(&merged))
}

fn quote(arg: &str) -> String {
    if arg.is_empty() || arg.contains(char::is_whitespace) {
        format!("'{arg}'")
    } else {
        arg.to_owned()
    }
}

/// Provenance text stored in a model: the effective configuration as TOML
/// under comment lines with the regenerating command.
pub fn provenance(cfg: &PipelineConfig, train: &Path, model: &Path) -> String {
    let mut args = cfg.train_args();
    args.extend(["--train".into(), train.display().to_string()]);
    args.extend(["--model".into(), model.display().to_string()]);
    let command: Vec<String> = args.iter().map(|a| quote(a)).collect();
    let t = &cfg.train;
    format!(
        "# command: ngramdep {}\n# parameters: order:{} training-k:{} iters:{} loss-type:{}\n{}",
        command.join(" "),
        t.order,
        t.training_k,
        t.iters,
        t.loss_type,
        cfg.to_toml()
    )
}

/// The command line recorded in a model's provenance.
pub fn recorded_command(provenance: &str) -> Option<Vec<String>> {
    let line = provenance.lines().find_map(|l| l.strip_prefix("# command: "))?;
    Some(line.split_whitespace().map(|s| s.trim_matches('\'').to_owned()).collect())
}

fn train_typed<S: Scalar>(
    sentences: &[Sentence],
    config: &TrainConfig,
    res: &Resources,
    provenance: String,
) -> Result<Vec<u8>> {
    let (mut model, report) = train::<S>(sentences, config, res)?;
    model.provenance = provenance;
    eprintln!(
        "{} sentences, {} features, {} gold trees lifted",
        sentences.len(),
        report.features,
        report.projectivized
    );
    for it in &report.iterations {
        eprintln!("iteration {}: loss {}/{}", it.iteration, it.loss, it.tokens);
    }
    Ok(model_to_bytes(&model))
}

fn train_cmd(args: &TrainArgs, cfg: &PipelineConfig) -> Result<()> {
    let config = cfg.train_config()?;
    cfg.check_table_paths(&config.groups)?;
    let res = cfg.load_resources()?;
    res.check(&config.groups)?;
    let sentences = read_treebank(&args.train, config.single_root)?;
    let prov = provenance(cfg, &args.train, &args.model);
    let bytes = match cfg.train.scalar.as_str() {
        "f32" => train_typed::<f32>(&sentences, &config, &res, prov)?,
        _ => train_typed::<f64>(&sentences, &config, &res, prov)?,
    };
    write_file(&args.model, bytes)
}

/// A model in either precision.
pub enum LoadedModel {
    F64(Model<f64>),
    F32(Model<f32>),
}

impl LoadedModel {
    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        let model = match model_from_bytes::<f64>(&bytes) {
            Ok(m) => LoadedModel::F64(m),
            Err(e) => match model_from_bytes::<f32>(&bytes) {
                Ok(m) => LoadedModel::F32(m),
                Err(_) => return Err(e).with_context(|| path.display().to_string()),
            },
        };
        Ok(model)
    }

    pub fn config(&self) -> &TrainConfig {
        match self {
            LoadedModel::F64(m) => &m.config,
            LoadedModel::F32(m) => &m.config,
        }
    }

    pub fn provenance(&self) -> &str {
        match self {
            LoadedModel::F64(m) => &m.provenance,
            LoadedModel::F32(m) => &m.provenance,
        }
    }

    pub fn parse_all(&self, sentences: &[Sentence], res: &Resources) -> Result<Vec<DependencyTree>, ParserError> {
        fn go<S: Scalar>(m: &Model<S>, s: &[Sentence], res: &Resources) -> Result<Vec<DependencyTree>, ParserError> {
            s.par_iter().map(|x| m.parse(x, res)).collect()
        }
        match self {
            LoadedModel::F64(m) => go(m, sentences, res),
            LoadedModel::F32(m) => go(m, sentences, res),
        }
    }
}

fn parse_cmd(args: &ParseArgs, cfg: &PipelineConfig) -> Result<()> {
    let model = LoadedModel::read(&args.model)?;
    // tables: flags, then the config file, then the paths used in training
    let mut eff = PipelineConfig::from_toml(model.provenance()).unwrap_or_default();
    eff.seed = cfg.seed;
    eff.jobs = cfg.jobs;
    eff.strict = cfg.strict;
    let (t, r) = (&mut eff.tables, &cfg.tables);
    let pairs = [
        (&mut t.surface, &r.surface),
        (&mut t.surface_paraphrase, &r.surface_paraphrase),
        (&mut t.syntactic, &r.syntactic),
        (&mut t.syntactic_words, &r.syntactic_words),
        (&mut t.syntactic_tags, &r.syntactic_tags),
    ];
    for (slot, over) in pairs {
        if over.is_some() {
            slot.clone_from(over);
        }
    }
    let groups = model.config().groups;
    eff.check_table_paths(&groups)?;
    let res = eff.load_resources()?;
    res.check(&groups)?;

    let sentences = read_treebank(&args.input, false)?;
    let trees = model.parse_all(&sentences, &res)?;
    let mut out = String::from("# ngramdep parse\n");
    for line in eff.to_toml().lines() {
        out.push_str(if line.is_empty() { "#" } else { "# " });
        out.push_str(line);
        out.push('\n');
    }
    out.push_str(&write_conll(&sentences, Some(&trees))?);
    write_file(&args.output, out)
}

fn eval_options(cfg: &PipelineConfig) -> EvalOptions {
    EvalOptions {
        exclude_punct: !cfg.eval.include_punct,
        punctuation: cfg.punctuation(),
    }
}

fn predicted_heads(path: &Path) -> Result<Vec<Vec<usize>>> {
    Ok(read_treebank(path, false)?.iter().map(Sentence::gold_heads).collect())
}

fn uas_line(label: &str, r: &eval::EvalReport) -> String {
    format!("{label}UAS {:.2} ({}/{} tokens)", 100.0 * r.uas, r.correct, r.scored_tokens)
}

fn evaluate(args: &EvalArgs, cfg: &PipelineConfig) -> Result<()> {
    let gold = read_treebank(&args.gold, false)?;
    let a = predicted_heads(&args.pred)?;
    let opts = eval_options(cfg);
    let ra = eval::uas(&gold, &a, &opts).context("scoring --pred")?;
    let Some(pred_b) = &args.pred_b else {
        println!("{}", uas_line("", &ra));
        return Ok(());
    };
    let b = predicted_heads(pred_b)?;
    let rb = eval::uas(&gold, &b, &opts).context("scoring --pred-b")?;
    let (resamples, alpha) = (cfg.eval.resamples, cfg.eval.alpha);
    if resamples == 0 {
        bail!(UsageError("resamples must be positive".into()));
    }
    let boot = eval::bootstrap_significance(&gold, &a, &b, resamples, cfg.seed, &opts)?;
    println!("{}", uas_line("A: ", &ra));
    println!("{}", uas_line("B: ", &rb));
    let better = if boot.second_is_better { "B" } else { "A" };
    let verdict = if boot.significant(alpha) { "significant" } else { "not significant" };
    println!(
        "paired bootstrap: p = {:.4} ({resamples} resamples, seed {}), {better} better, {verdict} at alpha {alpha}",
        boot.p_value, cfg.seed
    );
    Ok(())
}

fn analyze(args: &AnalyzeArgs, cfg: &PipelineConfig) -> Result<()> {
    let gold = read_treebank(&args.gold, false)?;
    let base = predicted_heads(&args.pred)?;
    let opts = eval_options(cfg);
    let round = rounding(&cfg.eval.rounding)?;
    if let Some(pred_b) = &args.pred_b {
        let comb = predicted_heads(pred_b)?;
        let mut c = eval::compare_per_pos(&gold, &base, &comb, &opts)?;
        if let Some(n) = args.top {
            c = c.top(n);
        }
        print!("{}", if args.text { c.to_text(round) } else { c.to_tsv(round) });
        return Ok(());
    }
    let per_pos = eval::per_pos_breakdown(&gold, &base, &opts)?;
    let mut rows: Vec<(String, eval::TagStats)> = per_pos.into_iter().collect();
    rows.sort_by(|a, b| b.1.frequency.cmp(&a.1.frequency).then_with(|| a.0.cmp(&b.0)));
    if let Some(n) = args.top.filter(|&n| n < rows.len()) {
        let mut other = eval::TagStats::default();
        for (_, s) in rows.drain(n..) {
            other.frequency += s.frequency;
            other.correct += s.correct;
            other.errors += s.errors;
        }
        rows.push(("Other".into(), other));
    }
    println!("tag\tfreq\tcorrect\terrors\taccuracy");
    for (tag, s) in rows {
        let acc = eval::format_percent(s.correct as i64, s.frequency as u64, round);
        println!("{tag}\t{}\t{}\t{}\t{acc}", s.frequency, s.correct, s.errors);
    }
    Ok(())
}

fn coverage(args: &CoverageArgs, cfg: &PipelineConfig) -> Result<()> {
    let (set, _) = load_queries(&args.queries)?;
    let queries = match args.kind {
        CoverageKind::Surface => eval::surface_coverage_queries(&set),
        CoverageKind::Syntactic => eval::syntactic_coverage_queries(&set),
    };
    let round = rounding(&cfg.eval.rounding)?;
    let mut reports = Vec::new();
    for path in &args.tables {
        reports.push((path.display().to_string(), eval::coverage_report(&queries, &load_table(path)?)));
    }
    if reports.len() > 1 {
        let mut both = reports[0].1.clone();
        for (_, r) in &reports[1..] {
            both = both.intersection(r);
        }
        reports.push(("intersection".into(), both));
    }
    println!("table\ttotal\tmissing\tpercent");
    for (name, r) in &reports {
        println!("{name}\t{}\t{}\t{}", r.total, r.missing.len(), r.percent(round));
    }
    if args.list {
        for (name, r) in &reports {
            for id in &r.missing {
                println!("missing\t{name}\t{id}");
            }
        }
    }
    Ok(())
}
