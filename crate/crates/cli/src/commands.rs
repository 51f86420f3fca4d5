use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use log::info;
use serde_json::{json, Value};
use topic_grouper::classify::{
    load_labels, micro_accuracy, nb_train, select_df, select_ig, write_accuracy_csv, LabeledCorpus, Reducer,
};
use topic_grouper::eval::{
    error_rate, fit_alpha, perfect_model, perplexity, tg_to_model, unigram_model_n, AlphaSearch,
};
use topic_grouper::explore::{export_dot, export_freemind, topics_table, write_series_csv, Explorer};
use topic_grouper::ingest::{ingest_bow, ingest_text, ingest_transactions, TextOptions};
use topic_grouper::lda::{gibbs_train, FoldInConfig, GibbsConfig};
use topic_grouper::tg::{train_ehac_with, EhacConfig};
use topic_grouper::{generate_synthetic, train_mehac, Corpus, Dendrogram, SyntheticSpec, TopicModel, TrueModel};

use crate::output::{meta, meta_line, write_atomic, write_json, write_or_stdout};
use crate::{
    Algo, ClassifyArgs, Cli, Command, ErrorArgs, ExportArgs, ExportFormat, IngestArgs, InputFormat, ModelSource,
    PerplexityArgs, ReducerKind, SeriesArgs, ServeArgs, SplitArgs, SynthArgs, TopicsArgs, TrainArgs,
};

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Synth(a) => synth(a),
        Command::Split(a) => split(a),
        Command::Train(a) => train(a, cli.memory_budget),
        Command::Topics(a) => topics(a),
        Command::Series(a) => series(a),
        Command::Export(a) => export(a),
        Command::EvalPerplexity(a) => eval_perplexity(a),
        Command::EvalError(a) => eval_error(a),
        Command::Classify(a) => classify(a),
        Command::Serve(a) => serve(a),
    }
}

fn save_corpus(path: &Path, corpus: &Corpus, meta: Value) -> Result<()> {
    write_atomic(path, |w| Ok(corpus.write_json(w, Some(meta))?))
}

fn load_corpus(path: &Path) -> Result<Corpus> {
    Corpus::load(path).with_context(|| format!("loading corpus {}", path.display()))
}

fn load_dendrogram(path: &Path) -> Result<Dendrogram> {
    Dendrogram::load(path).with_context(|| format!("loading dendrogram {}", path.display()))
}

fn write_compact<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |w| Ok(serde_json::to_writer(w, value)?))
}

fn ingest(a: IngestArgs) -> Result<()> {
    let corpus = match a.format {
        InputFormat::Bow => ingest_bow(&a.input, a.vocab.as_deref())?,
        InputFormat::Transactions => ingest_transactions(&a.input, a.quantity_cap)?,
        InputFormat::Text => {
            let opts = TextOptions {
                min_token_length: a.min_token_length,
                alphabetic_only: !a.keep_non_alphabetic,
                porter_stemming: a.stem,
                stopword_file: a.stopwords.clone(),
                min_corpus_freq: a.min_freq,
            };
            ingest_text(&a.input, &opts)?
        }
    };
    info!(
        "{} documents, {} words, {} tokens",
        corpus.num_docs(),
        corpus.vocab_size(),
        corpus.total_tokens()
    );
    save_corpus(&a.out, &corpus, meta(json!({})))
}

#[derive(serde::Serialize)]
struct TruthFile<'a> {
    spec: &'a SyntheticSpec,
    truth: &'a TrueModel,
    meta: Value,
}

#[derive(serde::Deserialize)]
struct TruthFileOwned {
    truth: TrueModel,
}

fn load_truth(path: &Path) -> Result<TrueModel> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let f: TruthFileOwned =
        serde_json::from_str(&text).with_context(|| format!("parsing true model {}", path.display()))?;
    Ok(f.truth)
}

fn synth(a: SynthArgs) -> Result<()> {
    let spec = SyntheticSpec {
        n_topics: a.topics,
        words_per_topic: a.words_per_topic,
        n_docs: a.docs,
        doc_length: a.doc_length,
        beta_tilde: a.beta,
        alpha_m_tilde: a.alpha_m,
        seed: a.seed,
    };
    let (corpus, truth) = generate_synthetic(&spec)?;
    let m = meta(json!({ "synth": a.seed }));
    save_corpus(&a.out, &corpus, m.clone())?;
    let file = TruthFile {
        spec: &spec,
        truth: &truth,
        meta: m,
    };
    if let Err(e) = write_compact(&a.truth, &file) {
        let _ = fs::remove_file(&a.out);
        return Err(e);
    }
    Ok(())
}

fn read_ids(path: &Path) -> Result<HashSet<u64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, l)| {
            l.parse()
                .map_err(|_| anyhow!("{}:{}: bad document id {l:?}", path.display(), i + 1))
        })
        .collect()
}

fn split(a: SplitArgs) -> Result<()> {
    let corpus = load_corpus(&a.input)?;
    let (train, test, seeds) = match &a.test_ids {
        Some(p) => {
            let (tr, te) = corpus.split_by_ids(&read_ids(p)?, a.min_train_freq)?;
            (tr, te, json!({}))
        }
        None => {
            let (tr, te) = corpus.split(a.test_ratio, a.seed, a.min_train_freq)?;
            (tr, te, json!({ "split": a.seed }))
        }
    };
    let m = meta(seeds);
    save_corpus(&a.train, &train, m.clone())?;
    if let Err(e) = save_corpus(&a.test, &test, m) {
        let _ = fs::remove_file(&a.train);
        return Err(e);
    }
    Ok(())
}

fn train(a: TrainArgs, memory_budget: Option<u64>) -> Result<()> {
    let corpus = load_corpus(&a.input)?;
    match a.algo {
        Algo::Ehac | Algo::Mehac => {
            let mut d = if matches!(a.algo, Algo::Ehac) {
                let mut cfg = EhacConfig::default();
                if let Some(b) = memory_budget {
                    cfg.memory_budget = b;
                }
                train_ehac_with(&corpus, &cfg)?
            } else {
                train_mehac(&corpus)?
            };
            d.meta = Some(meta(json!({})));
            write_compact(&a.out, &d)
        }
        Algo::Lda => {
            let n = a.n.ok_or_else(|| anyhow!("--n is required for lda"))?;
            let mut cfg = GibbsConfig::heuristic(n, a.seed);
            if let Some(am) = a.alpha_m {
                cfg.alpha_m = am;
            }
            cfg.beta = a.beta;
            cfg.iterations = a.iterations;
            cfg.burn_in = a.burn_in;
            let mut model = gibbs_train(&corpus, &cfg)?;
            model.meta = Some(meta(json!({ "gibbs": a.seed })));
            write_compact(&a.out, &model)
        }
    }
}

fn topics(a: TopicsArgs) -> Result<()> {
    let e = Explorer::new(load_dendrogram(&a.model)?);
    print!("{}", topics_table(&e, a.n, a.top)?);
    Ok(())
}

fn series(a: SeriesArgs) -> Result<()> {
    let d = load_dendrogram(&a.model)?;
    let m = meta(json!({}));
    write_or_stdout(a.out.as_deref(), |w| {
        writeln!(w, "# {}", meta_line(&m))?;
        Ok(write_series_csv(w, &d)?)
    })
}

fn export(a: ExportArgs) -> Result<()> {
    let d = load_dendrogram(&a.model)?;
    let m = meta_line(&meta(json!({})));
    let text = match a.format {
        ExportFormat::Dot => format!("// {m}\n{}", export_dot(&d, a.max_depth)),
        ExportFormat::Freemind => {
            let body = export_freemind(&d, a.max_depth);
            let (head, rest) = body.split_once('\n').expect("map element on its own line");
            format!("{head}\n<!-- {} -->\n{rest}", m.replace("--", "- -"))
        }
    };
    write_or_stdout(a.out.as_deref(), |w| Ok(w.write_all(text.as_bytes())?))
}

/// Resolves `--model` to an evaluable model, plus the training corpus if one
/// was given and a short name of the model kind.
fn resolve_model(src: &ModelSource, need_truth_n: Option<usize>) -> Result<(TopicModel, Option<Corpus>, String)> {
    let train = src.train.as_deref().map(load_corpus).transpose()?;
    let need_train = || train.as_ref().ok_or_else(|| anyhow!("--train is required for this model"));
    match src.model.as_str() {
        "unigram" => {
            let n = src.n.or(need_truth_n).unwrap_or(1);
            Ok((unigram_model_n(need_train()?, n)?, train.clone(), "unigram".into()))
        }
        "perfect" => {
            let truth_path = src.truth.as_ref().ok_or_else(|| anyhow!("--truth is required for perfect"))?;
            let truth = load_truth(truth_path)?;
            Ok((perfect_model(&truth, need_train()?)?, train.clone(), "perfect".into()))
        }
        path => {
            let path = PathBuf::from(path);
            let value: Value = serde_json::from_str(
                &fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?,
            )
            .with_context(|| format!("parsing {}", path.display()))?;
            if value.get("merges").is_some() {
                let d = load_dendrogram(&path)?;
                let n = src.n.ok_or_else(|| anyhow!("--n is required for a dendrogram"))?;
                let model = tg_to_model(&d, need_train()?, n)?;
                Ok((model, train.clone(), "tg".into()))
            } else {
                let model = TopicModel::load(&path).with_context(|| format!("loading {}", path.display()))?;
                Ok((model, train, "model".into()))
            }
        }
    }
}

fn append_csv_row(path: &Path, header: &str, row: &str, m: &Value) -> Result<()> {
    if path.exists() {
        let mut f = fs::OpenOptions::new().append(true).open(path)?;
        writeln!(f, "{row}")?;
        Ok(())
    } else {
        write_atomic(path, |w| {
            writeln!(w, "# {}", meta_line(m))?;
            writeln!(w, "{header}")?;
            writeln!(w, "{row}")?;
            Ok(())
        })
    }
}

fn eval_perplexity(a: PerplexityArgs) -> Result<()> {
    let (model, train, kind) = resolve_model(&a.source, None)?;
    let test = load_corpus(&a.test)?;
    let model = match (a.alpha, model.alpha) {
        (Some(alpha), _) => model.with_alpha(alpha),
        (None, Some(_)) => model,
        (None, None) if model.n_topics() == 1 => model.with_alpha(1.0),
        (None, None) => {
            let train = train.as_ref().ok_or_else(|| anyhow!("--train is required to fit alpha"))?;
            let search = AlphaSearch {
                seed: a.seed,
                particles: a.particles,
                max_docs: a.alpha_docs,
                ..AlphaSearch::default()
            };
            let (fitted, trace) = fit_alpha(&model, train, &search)?;
            info!("fitted alpha {} after {} evaluations", trace.alpha, trace.evaluations.len());
            fitted
        }
    };
    let report = perplexity(&model, &test, a.particles, a.seed)?;
    let m = meta(json!({ "lrs": a.seed }));
    let out = json!({
        "model": kind,
        "n_topics": model.n_topics(),
        "alpha": model.alpha,
        "perplexity": report.perplexity,
        "total_log_prob": report.total_log_prob,
        "token_count": report.token_count,
        "particles": report.particles,
        "seed": report.seed,
        "per_doc": report.per_doc,
        "meta": m,
    });
    write_json(a.out.as_deref(), &out)?;
    if let Some(p) = &a.csv {
        append_csv_row(
            p,
            "n_topics,perplexity",
            &format!("{},{}", model.n_topics(), report.perplexity),
            &m,
        )?;
    }
    Ok(())
}

fn eval_error(a: ErrorArgs) -> Result<()> {
    let truth_path = a
        .source
        .truth
        .as_ref()
        .ok_or_else(|| anyhow!("--truth is required"))?;
    let truth = load_truth(truth_path)?;
    let (model, _, kind) = resolve_model(&a.source, Some(truth.n_topics()))?;
    let err = error_rate(&model, &truth)?;
    let m = meta(json!({}));
    write_json(
        a.out.as_deref(),
        &json!({ "model": kind, "n_topics": model.n_topics(), "error_rate": err, "meta": m }),
    )?;
    if let Some(p) = &a.csv {
        append_csv_row(p, "n_topics,error_rate", &format!("{},{err}", model.n_topics()), &m)?;
    }
    Ok(())
}

fn classify(a: ClassifyArgs) -> Result<()> {
    let corpus = load_corpus(&a.corpus)?;
    let labels = load_labels(&a.labels)?;
    let labeled = LabeledCorpus::new(corpus, &labels)?;
    let (train, test) = match &a.test_ids {
        Some(p) => labeled.split_by_ids(&read_ids(p)?, a.min_train_freq)?,
        None => labeled.split(a.test_ratio, a.seed, a.min_train_freq)?,
    };
    let v = train.corpus.vocab_size();
    let fold = FoldInConfig {
        chains: a.fold_chains,
        sweeps: a.fold_sweeps,
        discard: a.fold_discard,
        seed: a.seed,
    };
    let dendrogram = if a.reducer == ReducerKind::Tg {
        Some(match &a.model {
            Some(p) => {
                let d = load_dendrogram(p)?;
                if d.vocab.as_slice() != train.corpus.vocab().words() {
                    bail!("dendrogram vocabulary differs from the training split; train it on the same split");
                }
                d
            }
            None => train_mehac(&train.corpus)?,
        })
    } else {
        None
    };
    let mut rows = Vec::with_capacity(a.n_or_k.len());
    for &k in &a.n_or_k {
        let reducer = match a.reducer {
            ReducerKind::Tg => Reducer::tg(&dendrogram.as_ref().unwrap().flat_view(k)?),
            ReducerKind::Lda => {
                let mut cfg = GibbsConfig::heuristic(k, a.seed);
                cfg.iterations = a.lda_iterations;
                cfg.burn_in = a.lda_burn_in;
                Reducer::lda(gibbs_train(&train.corpus, &cfg)?, fold)
            }
            ReducerKind::Ig => Reducer::words(select_ig(&train, k)?, v)?,
            ReducerKind::Df => Reducer::words(select_df(&train, k)?, v)?,
        };
        let model = nb_train(&train, reducer)?;
        let acc = micro_accuracy(&model, &test)?;
        info!("{k} features: accuracy {acc}");
        rows.push((k, acc));
    }
    let m = meta(json!({ "split": a.seed, "gibbs": a.seed, "fold_in": a.seed }));
    write_or_stdout(a.out.as_deref(), |w| {
        writeln!(w, "# {}", meta_line(&m))?;
        Ok(write_accuracy_csv(w, &rows)?)
    })
}

fn serve(a: ServeArgs) -> Result<()> {
    let d = load_dendrogram(&a.model)?;
    crate::serve::run(Explorer::new(d), &a.host, a.port)
}
