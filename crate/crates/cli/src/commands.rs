use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use koslinker::corpus::{
    generate_synthetic, ingest, Corpus, IngestOptions, IngestReport, SyntheticSpec, Tokenizer,
};
use koslinker::kos::{ClassificationSystem, Thesaurus};
use koslinker::links::{build_link_tree, extract_links, LinkTree};
use koslinker::model::{train_with_observer, Hyperparameters, TrainedModel};

use crate::config::{IngestArgs, LinksArgs, SynthesizeArgs, TrainArgs};

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(f))
}

/// Writes through a temporary sibling and renames, so a failed run never
/// leaves a truncated output behind.
pub fn write_atomically(
    path: &Path,
    write: impl FnOnce(&mut BufWriter<File>) -> Result<()>,
) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    let file = File::create(&tmp).with_context(|| format!("cannot create {}", tmp.display()))?;
    let mut out = BufWriter::new(file);
    let result = write(&mut out).and_then(|_| out.flush().map_err(Into::into));
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(e.context(format!("cannot write {}", path.display())));
    }
    drop(out);
    std::fs::rename(&tmp, path).with_context(|| format!("cannot write {}", path.display()))
}

pub fn load_classification(path: &Path, max_level: usize) -> Result<ClassificationSystem> {
    ClassificationSystem::parse_with_max_level(open(path)?, max_level)
        .with_context(|| format!("{}", path.display()))
}

pub fn load_thesaurus(path: &Path) -> Result<Thesaurus> {
    Thesaurus::parse(open(path)?).with_context(|| format!("{}", path.display()))
}

pub fn load_corpus(path: &Path) -> Result<Corpus> {
    Corpus::read_from(open(path)?).with_context(|| format!("{}", path.display()))
}

pub fn load_model(path: &Path) -> Result<TrainedModel> {
    TrainedModel::read_from(open(path)?).with_context(|| format!("{}", path.display()))
}

pub fn ingest_cmd(args: &IngestArgs, out: &mut dyn Write) -> Result<IngestReport> {
    let cs = load_classification(&args.classification, args.max_level)?;
    let th = load_thesaurus(&args.thesaurus)?;
    let tokenizer = match &args.stopwords {
        Some(p) => {
            Tokenizer::read_stopwords(open(p)?).with_context(|| format!("{}", p.display()))?
        }
        None => Tokenizer::new(),
    };
    let options = IngestOptions {
        strict: args.strict,
        min_df: args.min_df,
        max_df_ratio: args.max_df_ratio,
        tokenizer,
        propagate_to_ancestors: args.propagate_labels,
    };
    let corpus = ingest(open(&args.documents)?, &cs, &th, &options)
        .with_context(|| format!("{}", args.documents.display()))?;
    write_atomically(&args.corpus, |w| Ok(corpus.write_to(w)?))?;

    let r = &corpus.report;
    writeln!(out, "classes:               {}", cs.len())?;
    writeln!(out, "descriptors:           {}", th.len())?;
    writeln!(out, "documents read:        {}", r.docs_read)?;
    writeln!(out, "documents admitted:    {}", r.docs_admitted)?;
    writeln!(out, "dropped, no labels:    {}", r.docs_dropped_no_labels)?;
    writeln!(out, "dropped, no tokens:    {}", r.docs_dropped_no_tokens)?;
    writeln!(out, "unknown class codes:   {}", r.unknown_classes)?;
    writeln!(out, "unknown descriptors:   {}", r.unknown_descriptors)?;
    writeln!(out, "pruned word types:     {}", r.pruned_terms)?;
    writeln!(
        out,
        "word tokens:           {} raw, {} encoded, {} dropped",
        r.words.raw, r.words.encoded, r.words.dropped
    )?;
    writeln!(
        out,
        "descriptor tokens:     {} raw, {} encoded, {} dropped",
        r.descriptors.raw, r.descriptors.encoded, r.descriptors.dropped
    )?;
    writeln!(
        out,
        "vocabulary:            {} words, {} descriptors",
        corpus.word_vocab.len(),
        corpus.descriptor_vocab.len()
    )?;
    writeln!(out, "wrote {}", args.corpus.display())?;
    Ok(corpus.report)
}

pub fn train_cmd(args: &TrainArgs, out: &mut dyn Write) -> Result<TrainedModel> {
    let corpus = load_corpus(&args.corpus)?;
    let hyper = Hyperparameters::from(&args.hyper);
    let every = args.report_every;
    let total = hyper.iterations;
    let mut io_err = None;
    let model = train_with_observer(&corpus, &hyper, |sweep, ll| {
        if every > 0 && (sweep % every == 0 || sweep == total) && io_err.is_none() {
            if let Err(e) = writeln!(out, "sweep {sweep:>6}  log-likelihood {ll:.4}") {
                io_err = Some(e);
            }
        }
    })
    .context("training failed")?;
    if let Some(e) = io_err {
        return Err(e.into());
    }
    write_atomically(&args.model, |w| Ok(model.write_to(w)?))?;
    writeln!(
        out,
        "{} topics, {} averaged samples; wrote {}",
        model.num_topics,
        model.samples,
        args.model.display()
    )?;
    Ok(model)
}

pub fn links_cmd(args: &LinksArgs, out: &mut dyn Write) -> Result<LinkTree> {
    let model = load_model(&args.model)?;
    let cs = load_classification(&args.classification, args.max_level)?;
    let th = load_thesaurus(&args.thesaurus)?;
    if args.top_k == 0 {
        bail!("--top-k must be at least 1");
    }
    let links = extract_links(&model, &cs, &th, args.top_k).with_context(|| {
        format!(
            "{} does not fit {}",
            args.model.display(),
            args.classification.display()
        )
    })?;
    let tree = build_link_tree(&cs, &links)?;
    write_atomically(&args.tree, |w| Ok(tree.write_to(w)?))?;
    let low: Vec<&str> = links
        .iter()
        .filter(|l| l.low_support)
        .map(|l| l.code.as_str())
        .collect();
    writeln!(out, "classes:      {}", links.len())?;
    writeln!(out, "low support:  {}", low.len())?;
    if !low.is_empty() {
        writeln!(out, "  {}", low.join(" "))?;
    }
    writeln!(out, "wrote {}", args.tree.display())?;
    Ok(tree)
}

pub fn synthesize_cmd(args: &SynthesizeArgs, out: &mut dyn Write) -> Result<()> {
    let spec = SyntheticSpec {
        num_topics: args.topics,
        word_vocab_size: args.words,
        descriptor_vocab_size: args.descriptors,
        num_docs: args.docs,
        words_per_doc: args.words_per_doc,
        descriptors_per_doc: args.descriptors_per_doc,
        labels_per_doc: args.labels_per_doc,
        concentration: args.concentration,
        seed: args.seed,
        ..SyntheticSpec::default()
    };
    let synthetic = generate_synthetic(&spec)?;
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    synthetic.write_sources(&args.out)?;
    writeln!(
        out,
        "wrote classification.csv, thesaurus.jsonl, documents.jsonl to {}",
        args.out.display()
    )?;
    Ok(())
}
