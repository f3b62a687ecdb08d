use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use editdec::constraint::{ConstraintSet, EditWeights};
use editdec::decoder::{decode_batch, plain_batch, DecoderConfig};
use editdec::extract::{extract_oracle, load_alignment, load_translation_table, table_constraints};
use editdec::metrics::{evaluate, DelMode, EvaluationInput};
use editdec::scorer::train_ngram_lm;
use editdec::scorer::{
    serve_connection, ConnectOptions, CopyBiasedScorer, ExternalScorer, NGramLM, Scorer,
    ScorerServer,
};
use editdec::tokens::detokenize;
use editdec::tune::{random_search, Interval, SearchSpace, TuneError, Validation};
use serde_json::Value;

use crate::config::RunConfig;
use crate::error::{data, decode_failure, scorer, usage, CliResult, Context};
use crate::io::{
    check_aligned, read_constraints, read_lines, read_references, read_sentences, write_file,
    writer,
};
use crate::{
    Cli, Command, DecodeArgs, DecoderArgs, EvaluateArgs, ExtractArgs, ScorerArgs, ServeArgs,
    TrainLmArgs, TuneArgs,
};

/// Global options that are not part of the run configuration file.
struct Globals {
    trace_out: Option<PathBuf>,
    del_mode: DelMode,
    first_ref_only: bool,
}

pub fn run(cli: Cli) -> CliResult<()> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.workers.is_some() {
        cfg.workers = cli.workers;
    }
    if cfg.workers == Some(0) {
        return Err(usage("workers must be at least 1"));
    }
    let globals = Globals {
        trace_out: cli.trace_out,
        del_mode: cli.del_mode.unwrap_or_default(),
        first_ref_only: cli.first_ref_only,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.workers {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| usage(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::TrainLm(a) => train_lm(a),
        Command::Decode(a) => decode(&globals, cfg, a),
        Command::ExtractConstraints(a) => extract(cfg, a),
        Command::Evaluate(a) => evaluate_cmd(&globals, cfg, a),
        Command::Tune(a) => tune(&globals, cfg, a),
        Command::ServeScorer(a) => serve(a),
    })
}

fn train_lm(a: TrainLmArgs) -> CliResult<()> {
    if a.order == 0 {
        return Err(usage("--order must be at least 1"));
    }
    if !(a.k > 0.0 && a.k.is_finite()) {
        return Err(usage("--k must be positive"));
    }
    let mut corpus = Vec::new();
    for p in &a.corpus {
        corpus.extend(read_sentences(p)?);
    }
    let lm = train_ngram_lm(&corpus, a.order, a.k).map_err(data)?;
    log::info!(
        "trained order-{} model over {} sentences, {} types",
        a.order,
        corpus.len(),
        lm.vocab().len()
    );
    write_file(&a.out, &lm.to_json())
}

fn load_lm(path: &Path) -> CliResult<NGramLM> {
    let text = std::fs::read_to_string(path).data_ctx(format!("reading {}", path.display()))?;
    NGramLM::from_json(&text)
        .map_err(|e| scorer(anyhow::Error::new(e).context(format!("loading {}", path.display()))))
}

fn apply_scorer_args(cfg: &mut RunConfig, a: &ScorerArgs) {
    if a.lm.is_some() {
        cfg.lm = a.lm.clone();
        cfg.endpoint = None;
    }
    if a.endpoint.is_some() {
        cfg.endpoint = a.endpoint.clone();
        cfg.lm = None;
    }
    if let Some(mu) = a.copy_weight {
        cfg.copy_weight = mu;
    }
}

/// Copy-biased wrapper around an in-process model or a remote scorer.
fn build_scorer(cfg: &RunConfig) -> CliResult<CopyBiasedScorer<Box<dyn Scorer>>> {
    let base: Box<dyn Scorer> = match (&cfg.lm, &cfg.endpoint) {
        (Some(p), _) => Box::new(load_lm(p)?),
        (None, Some(addr)) => {
            let opts = ConnectOptions {
                pool_size: rayon::current_num_threads(),
                ..ConnectOptions::default()
            };
            Box::new(ExternalScorer::connect(addr.as_str(), opts)?)
        }
        (None, None) => return Err(usage("a scorer is required: pass --lm or --endpoint")),
    };
    CopyBiasedScorer::new(base, cfg.copy_weight).map_err(usage)
}

/// Per-component weight overrides from the config file and flags.
#[derive(Clone, Copy, Default)]
struct WeightOverride {
    insert: Option<f64>,
    delete: Option<f64>,
    subst: Option<f64>,
}

impl WeightOverride {
    fn new(
        base: Option<EditWeights>,
        insert: Option<f64>,
        delete: Option<f64>,
        subst: Option<f64>,
    ) -> Self {
        Self {
            insert: insert.or(base.map(|w| w.lambda_insert)),
            delete: delete.or(base.map(|w| w.lambda_delete)),
            subst: subst.or(base.map(|w| w.lambda_subst)),
        }
    }

    fn apply(&self, w: EditWeights) -> EditWeights {
        EditWeights::new(
            self.insert.unwrap_or(w.lambda_insert),
            self.delete.unwrap_or(w.lambda_delete),
            self.subst.unwrap_or(w.lambda_subst),
        )
    }
}

fn apply_decoder_args(cfg: &mut RunConfig, a: &DecoderArgs) -> WeightOverride {
    let d = &mut cfg.decoder;
    if let Some(v) = a.beam_size {
        d.beam_size = v;
    }
    if a.fanout.is_some() {
        d.fanout = a.fanout;
    }
    if a.alpha.is_some() {
        d.alpha = a.alpha;
    }
    if let Some(v) = a.max_len {
        d.max_len = v;
    }
    if let Some(v) = a.delta {
        d.delta = v;
    }
    d.case_fold |= a.case_fold;
    WeightOverride::new(
        cfg.weights,
        a.lambda_insert,
        a.lambda_delete,
        a.lambda_subst,
    )
}

fn required(p: &Option<PathBuf>, flag: &str) -> CliResult<PathBuf> {
    p.clone()
        .ok_or_else(|| usage(format!("{flag} is required")))
}

fn decode(g: &Globals, mut cfg: RunConfig, a: DecodeArgs) -> CliResult<()> {
    if a.source.is_some() {
        cfg.source = a.source.clone();
    }
    if a.constraints.is_some() {
        cfg.constraints = a.constraints.clone();
    }
    apply_scorer_args(&mut cfg, &a.scorer);
    let weights = apply_decoder_args(&mut cfg, &a.decoder);
    cfg.validate()?;
    let source_path = required(&cfg.source, "--source")?;
    let sources = read_sentences(&source_path)?;
    let sets = match &cfg.constraints {
        Some(p) => {
            let sets = read_constraints(p)?;
            check_aligned("constraint file", p, sets.len(), sources.len())?;
            let sets: Vec<ConstraintSet> = sets
                .into_iter()
                .map(|cs| {
                    let w = weights.apply(cs.weights);
                    cs.with_weights(w)
                })
                .collect();
            for (i, cs) in sets.iter().enumerate() {
                cs.weights
                    .validate()
                    .map_err(|e| usage(format!("constraint line {}: {e}", i + 1)))?;
            }
            Some(sets)
        }
        None => None,
    };
    let model = build_scorer(&cfg)?;
    let dcfg = DecoderConfig {
        trace: g.trace_out.is_some() && sets.is_some(),
        ..cfg.decoder.clone()
    };

    let mut outputs = Vec::with_capacity(sources.len());
    let mut traces = Vec::new();
    match &sets {
        Some(sets) => {
            for (i, r) in decode_batch(&sources, &model, sets, &dcfg)
                .into_iter()
                .enumerate()
            {
                let r = r.map_err(|e| decode_failure(i, e))?;
                if r.truncated {
                    log::warn!("sentence {}: no hypothesis finished within max_len", i + 1);
                }
                outputs.push(detokenize(&r.output));
                traces.push(r.trace);
            }
        }
        None => {
            if g.trace_out.is_some() {
                log::warn!("traces are only recorded for constrained decoding");
            }
            for (i, r) in plain_batch(&sources, &model, &dcfg).into_iter().enumerate() {
                let r = r.map_err(|e| decode_failure(i, e))?;
                outputs.push(detokenize(&r.output));
            }
        }
    }

    let mut out = writer(a.out.as_deref())?;
    for line in &outputs {
        writeln!(out, "{line}").data_ctx("writing outputs")?;
    }
    out.flush().data_ctx("writing outputs")?;

    if let Some(path) = &g.trace_out {
        let mut tw = writer(Some(path))?;
        for (i, steps) in traces.iter().enumerate() {
            for step in steps.iter().flatten() {
                let mut v = serde_json::to_value(step).expect("trace serializes");
                if let Value::Object(m) = &mut v {
                    m.insert("sentence".into(), Value::from(i + 1));
                }
                writeln!(tw, "{v}").data_ctx("writing trace")?;
            }
        }
        tw.flush().data_ctx("writing trace")?;
    }
    Ok(())
}

fn extract(cfg: RunConfig, a: ExtractArgs) -> CliResult<()> {
    let w = WeightOverride::new(
        cfg.weights,
        a.lambda_insert,
        a.lambda_delete,
        a.lambda_subst,
    )
    .apply(EditWeights::default());
    w.validate().map_err(usage)?;
    let sources = read_sentences(&a.source)?;
    let sets: Vec<ConstraintSet> = match (&a.table, &a.reference, &a.alignments) {
        (Some(t), _, _) => {
            let text = std::fs::read_to_string(t).data_ctx(format!("reading {}", t.display()))?;
            let table =
                load_translation_table(&text, a.min_prob).data_ctx(format!("{}", t.display()))?;
            sources
                .iter()
                .map(|s| table_constraints(s, None, &table, w))
                .collect()
        }
        (None, Some(r), Some(al)) => {
            let refs = read_sentences(r)?;
            check_aligned("reference file", r, refs.len(), sources.len())?;
            let links = read_lines(al)?;
            check_aligned("alignment file", al, links.len(), sources.len())?;
            let mut sets = Vec::with_capacity(sources.len());
            for (i, ((s, r), line)) in sources.iter().zip(&refs).zip(&links).enumerate() {
                let at = || format!("{} line {}", al.display(), i + 1);
                let alignment = load_alignment(line).data_ctx(at())?;
                sets.push(extract_oracle(s, r, &alignment, w).data_ctx(at())?);
            }
            sets
        }
        _ => return Err(usage("give --table, or --reference with --alignments")),
    };
    let mut out = writer(a.out.as_deref())?;
    for cs in &sets {
        writeln!(out, "{}", cs.to_json()).data_ctx("writing constraints")?;
    }
    out.flush().data_ctx("writing constraints")
}

fn evaluate_cmd(g: &Globals, cfg: RunConfig, a: EvaluateArgs) -> CliResult<()> {
    let outputs = read_sentences(&a.outputs)?;
    let mut ref_paths = if a.references.is_empty() {
        cfg.references.clone()
    } else {
        a.references.clone()
    };
    if ref_paths.is_empty() {
        return Err(usage("at least one --reference file is required"));
    }
    if g.first_ref_only {
        ref_paths.truncate(1);
    }
    let references = read_references(&ref_paths, outputs.len())?;
    let source_path = a.source.clone().or(cfg.source.clone());
    let sources = match (&source_path, a.skip_sari) {
        (_, true) => None,
        (Some(p), false) => {
            let s = read_sentences(p)?;
            check_aligned("source file", p, s.len(), outputs.len())?;
            Some(s)
        }
        (None, false) => return Err(usage("SARI needs --source (or pass --skip-sari)")),
    };
    let constraints = match a.constraints.clone().or(cfg.constraints.clone()) {
        Some(p) => {
            let c = read_constraints(&p)?;
            check_aligned("constraint file", &p, c.len(), outputs.len())?;
            Some(c)
        }
        None => None,
    };
    let report = evaluate(&EvaluationInput {
        sources: sources.as_deref(),
        outputs: &outputs,
        references: &references,
        constraints: constraints.as_deref(),
        del_mode: g.del_mode,
    })
    .map_err(data)?;
    print!("{}", report.to_table());
    if let Some(p) = &a.json_out {
        write_file(p, &report.to_json())?;
    }
    Ok(())
}

fn tune(g: &Globals, mut cfg: RunConfig, a: TuneArgs) -> CliResult<()> {
    if a.source.is_some() {
        cfg.source = a.source.clone();
    }
    if !a.references.is_empty() {
        cfg.references = a.references.clone();
    }
    if a.constraints.is_some() {
        cfg.constraints = a.constraints.clone();
    }
    apply_scorer_args(&mut cfg, &a.scorer);
    apply_decoder_args(&mut cfg, &a.decoder);
    cfg.validate()?;
    let sources = read_sentences(&required(&cfg.source, "--source")?)?;
    let constraints_path = required(&cfg.constraints, "--constraints")?;
    let constraints = read_constraints(&constraints_path)?;
    check_aligned(
        "constraint file",
        &constraints_path,
        constraints.len(),
        sources.len(),
    )?;
    let mut ref_paths = cfg.references.clone();
    if ref_paths.is_empty() {
        return Err(usage("at least one --reference file is required"));
    }
    if g.first_ref_only {
        ref_paths.truncate(1);
    }
    let references = read_references(&ref_paths, sources.len())?;
    let model = build_scorer(&cfg)?;

    let pick = |fixed: Option<f64>, default: Interval| fixed.map_or(default, Interval::fixed);
    let full = SearchSpace::default();
    let space = SearchSpace {
        lambda_insert: pick(a.fix_insert, full.lambda_insert),
        lambda_delete: pick(a.fix_delete, full.lambda_delete),
        lambda_subst: pick(a.fix_subst, full.lambda_subst),
        delta: pick(a.fix_delta, full.delta),
    };
    let validation = Validation {
        scorer: &model,
        sources: &sources,
        references: &references,
        constraints: &constraints,
        config: cfg.decoder.clone(),
        del_mode: g.del_mode,
    };
    let result = random_search(&space, a.trials, cfg.seed, |w, d| validation.sari(w, d)).map_err(
        |e| match e {
            TuneError::Objective { trial, source } => decode_failure(trial, source),
            other => usage(other),
        },
    )?;
    let b = &result.best;
    println!(
        "best trial {} of {}: SARI {:.4}  insert {:.4}  delete {:.4}  subst {:.4}  delta {:.4}",
        b.index,
        result.trials.len(),
        b.score,
        b.weights.lambda_insert,
        b.weights.lambda_delete,
        b.weights.lambda_subst,
        b.delta
    );
    if let Some(p) = &a.log_out {
        write_file(
            p,
            &serde_json::to_string_pretty(&result).expect("tune result serializes"),
        )?;
    }
    if let Some(p) = &a.best_out {
        let mut best = cfg.clone();
        best.weights = Some(b.weights);
        best.decoder.delta = b.delta;
        write_file(p, &best.to_json())?;
    }
    Ok(())
}

fn serve(a: ServeArgs) -> CliResult<()> {
    let lm = load_lm(&a.lm)?;
    if a.stdio {
        let stdin = std::io::stdin();
        return serve_connection(&lm, stdin.lock(), std::io::stdout().lock()).map_err(scorer);
    }
    let addr = a
        .listen
        .as_deref()
        .expect("clap requires --listen without --stdio");
    let server = ScorerServer::bind(addr, Arc::new(lm)).map_err(scorer)?;
    println!("listening on {}", server.local_addr());
    std::io::stdout().flush().data_ctx("writing to stdout")?;
    server.join();
    Ok(())
}
