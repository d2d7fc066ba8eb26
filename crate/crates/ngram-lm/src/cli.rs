//! Command-line interface: preprocessing, counting, training,
//! evaluation, and the experiment grid as subcommands over the library.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use crate::arpa::{load_arpa, save_arpa};
use crate::counts::count_ngrams;
use crate::experiment::{run_grid, size_label, ExperimentGrid};
use crate::model::{build_with_options, kn_discounts, BuildOptions, PerplexityReport};
use crate::numfmt::format_sig;
use crate::prep::{
    corpus_stats, make_subsets, prepare, read_corpus, read_lines_lossy, split_train_test,
    write_corpus, PrepConfig, Sentence,
};
use crate::smoothing::Method;
use crate::vocab::Vocabulary;

#[derive(Parser)]
#[command(
    name = "ngram-lm",
    version,
    about = "Count-based n-gram language models with Kneser-Ney and Witten-Bell smoothing"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clean raw text into one tokenized sentence per line.
    Prep(PrepArgs),
    /// Split a prepared corpus into train and test portions.
    Split(SplitArgs),
    /// Carve disjoint fixed-size training subsets from a corpus.
    Subset(SubsetArgs),
    /// Print sentence and word counts of a prepared corpus.
    Stats(StatsArgs),
    /// Count n-grams and optionally dump them as text.
    Count(CountArgs),
    /// Train a smoothed backoff model and write it as an ARPA file.
    Train(TrainArgs),
    /// Evaluate a model's perplexity on a test corpus.
    Ppl(PplArgs),
    /// Train and evaluate the full size x order x method grid.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct PrepArgs {
    /// Raw input text file.
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Prepared corpus destination.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Drop sentences with fewer tokens than this.
    #[arg(long, default_value_t = 2)]
    min_tokens: usize,
    /// Shuffle seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Extra characters to strip besides Unicode punctuation.
    #[arg(long, value_name = "CHARS")]
    punct_extra: Option<String>,
    /// File with one abbreviation per line (periods after these do not
    /// end sentences); replaces the built-in list.
    #[arg(long, value_name = "FILE")]
    abbrev: Option<PathBuf>,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Training-side destination.
    #[arg(long, value_name = "FILE")]
    train: PathBuf,
    /// Test-side destination.
    #[arg(long, value_name = "FILE")]
    test: PathBuf,
    /// Fraction of sentences moved to the test side.
    #[arg(long, default_value_t = 0.1)]
    test_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SubsetArgs {
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Strictly ascending subset sizes in sentences.
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    /// Output path prefix; each subset lands at PREFIX plus a size
    /// label such as 1K or 10K.
    #[arg(long, value_name = "PFX")]
    out_prefix: String,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
}

#[derive(Args)]
struct CountArgs {
    /// Prepared training corpus.
    #[arg(long, value_name = "FILE")]
    text: PathBuf,
    /// Highest n-gram order to count.
    #[arg(long)]
    order: usize,
    /// Dump all counted n-grams as `w1 .. wk<TAB>count` lines, sorted
    /// by token sequence.
    #[arg(long, value_name = "FILE")]
    write_counts: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Prepared training corpus.
    #[arg(long, value_name = "FILE")]
    text: PathBuf,
    /// Model order.
    #[arg(long)]
    order: usize,
    /// Smoothing method: `kn` or `wb`.
    #[arg(long)]
    smoothing: Method,
    /// Output model path (ARPA format).
    #[arg(long, value_name = "FILE")]
    lm: PathBuf,
    /// Use raw counts instead of continuation counts at lower
    /// Kneser-Ney orders.
    #[arg(long)]
    kn_raw_lower: bool,
    /// Print the estimated discounts, one `D1<TAB>D2<TAB>D3+` line per
    /// order from 2 upward.
    #[arg(long)]
    dump_discounts: bool,
}

#[derive(Args)]
struct PplArgs {
    /// Model file (ARPA format).
    #[arg(long, value_name = "FILE")]
    lm: PathBuf,
    /// Prepared test corpus.
    #[arg(long, value_name = "FILE")]
    test: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Strictly ascending training subset sizes in sentences.
    #[arg(long, value_delimiter = ',', required = true)]
    train_sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [3, 5, 7])]
    orders: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [Method::KneserNey, Method::WittenBell])]
    methods: Vec<Method>,
    /// Prepared training corpus (shuffled by seed, then carved).
    #[arg(long, value_name = "FILE")]
    train: PathBuf,
    /// Shared test corpus.
    #[arg(long, value_name = "FILE")]
    test: PathBuf,
    /// Directory for models and CSV reports.
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum concurrently trained cells (default: one per CPU).
    #[arg(long, value_name = "K")]
    jobs: Option<usize>,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| {
        format!("cannot open {}", path.display())
    })?))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| {
        format!("cannot create {}", path.display())
    })?))
}

fn load_corpus(path: &Path) -> Result<Vec<Sentence>> {
    read_corpus(open(path)?).with_context(|| format!("cannot read corpus {}", path.display()))
}

fn store_corpus(path: &Path, sentences: &[Sentence]) -> Result<()> {
    let mut sink = create(path)?;
    write_corpus(&mut sink, sentences)
        .with_context(|| format!("cannot write corpus {}", path.display()))?;
    sink.flush()?;
    Ok(())
}

/// Parse arguments from the process environment and run. Returns the
/// process exit code; hard usage and I/O failures become `Err`.
pub fn run() -> Result<ExitCode> {
    dispatch(Cli::parse())
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Prep(args) => cmd_prep(args),
        Command::Split(args) => cmd_split(args),
        Command::Subset(args) => cmd_subset(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Count(args) => cmd_count(args),
        Command::Train(args) => cmd_train(args),
        Command::Ppl(args) => cmd_ppl(args),
        Command::Experiment(args) => cmd_experiment(args),
    }
}

fn cmd_prep(args: PrepArgs) -> Result<ExitCode> {
    let mut config = PrepConfig {
        min_tokens: args.min_tokens,
        seed: args.seed,
        ..PrepConfig::default()
    };
    if let Some(extra) = &args.punct_extra {
        config.punct_extra = extra.chars().collect();
    }
    if let Some(path) = &args.abbrev {
        let mut abbreviations = BTreeSet::new();
        for line in open(path)?.lines() {
            let line = line?;
            let form = line.trim().trim_end_matches('.').to_lowercase();
            if !form.is_empty() {
                abbreviations.insert(form);
            }
        }
        config.abbreviations = abbreviations;
    }

    let (lines, replaced) = read_lines_lossy(open(&args.input)?)?;
    if replaced > 0 {
        log::warn!("{replaced} lines contained invalid UTF-8 and were repaired");
    }
    let sentences = prepare(&lines, &config);
    store_corpus(&args.out, &sentences)?;
    let stats = corpus_stats(&sentences);
    log::info!(
        "prepared {} sentences / {} words from {} input lines",
        stats.sentences,
        stats.words,
        lines.len()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_split(args: SplitArgs) -> Result<ExitCode> {
    let sentences = load_corpus(&args.input)?;
    let (train, test) = split_train_test(&sentences, args.test_fraction, args.seed)?;
    store_corpus(&args.train, &train)?;
    store_corpus(&args.test, &test)?;
    log::info!(
        "split {} sentences into {} train / {} test",
        sentences.len(),
        train.len(),
        test.len()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_subset(args: SubsetArgs) -> Result<ExitCode> {
    let sentences = load_corpus(&args.input)?;
    let subsets = make_subsets(&sentences, &args.sizes)?;
    for (subset, &size) in subsets.iter().zip(&args.sizes) {
        let path = PathBuf::from(format!("{}{}", args.out_prefix, size_label(size)));
        store_corpus(&path, subset)?;
        log::info!("wrote {} sentences to {}", subset.len(), path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_stats(args: StatsArgs) -> Result<ExitCode> {
    let stats = corpus_stats(&load_corpus(&args.input)?);
    println!("{}\t{}", stats.sentences, stats.words);
    Ok(ExitCode::SUCCESS)
}

fn cmd_count(args: CountArgs) -> Result<ExitCode> {
    let corpus = load_corpus(&args.text)?;
    let vocab = Vocabulary::from_corpus(&corpus)?;
    let counts = count_ngrams(&corpus, &vocab, args.order)?;
    for k in 1..=counts.order() {
        println!("{k}\t{}\t{}", counts.num_types(k), counts.token_total(k));
    }
    if let Some(path) = &args.write_counts {
        let mut sink = create(path)?;
        counts.dump(&vocab, &mut sink)?;
        sink.flush()?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_train(args: TrainArgs) -> Result<ExitCode> {
    if args.dump_discounts && args.smoothing != Method::KneserNey {
        bail!("--dump-discounts applies to Kneser-Ney training only");
    }
    let corpus = load_corpus(&args.text)?;
    let mut options = BuildOptions::new(args.smoothing);
    options.kn_raw_lower = args.kn_raw_lower;

    let vocab = Vocabulary::from_corpus(&corpus)?;
    let counts = count_ngrams(&corpus, &vocab, args.order)?;
    if args.dump_discounts {
        for (_, d) in kn_discounts(&counts, options.kn_raw_lower)? {
            println!(
                "{}\t{}\t{}",
                format_sig(d.d1, 6),
                format_sig(d.d2, 6),
                format_sig(d.d3_plus, 6)
            );
        }
    }

    let model = build_with_options(&counts, &vocab, &options)?;
    let bytes = save_arpa(&model, &args.lm)?;
    log::info!("wrote {} ({bytes} bytes)", args.lm.display());
    Ok(ExitCode::SUCCESS)
}

fn print_report(report: &PerplexityReport) {
    println!("sentences\t{}", report.sentences);
    println!("words\t{}", report.words);
    println!("oov\t{}", report.oov);
    println!("logprob10\t{}", format_sig(report.logprob10, 6));
    println!("entropy_bits\t{}", format_sig(report.entropy_bits, 6));
    println!("ppl\t{}", format_sig(report.ppl, 6));
}

fn cmd_ppl(args: PplArgs) -> Result<ExitCode> {
    let model =
        load_arpa(&args.lm).with_context(|| format!("cannot load model {}", args.lm.display()))?;
    let test = load_corpus(&args.test)?;
    let report = model.perplexity(&test)?;
    print_report(&report);
    Ok(ExitCode::SUCCESS)
}

fn cmd_experiment(args: ExperimentArgs) -> Result<ExitCode> {
    let grid = ExperimentGrid {
        sizes: args.train_sizes,
        orders: args.orders,
        methods: args.methods,
        seed: args.seed,
        jobs: args.jobs,
    };
    let train = load_corpus(&args.train)?;
    let test = load_corpus(&args.test)?;
    let report = run_grid(&grid, &train, &test, &args.out_dir)?;
    report.write_csv_files(&args.out_dir)?;
    let failed = report.cells.iter().filter(|c| c.outcome.is_err()).count();
    if failed > 0 {
        log::warn!("{failed} of {} grid cells failed", report.cells.len());
        return Ok(ExitCode::from(2));
    }
    log::info!("all {} grid cells succeeded", report.cells.len());
    Ok(ExitCode::SUCCESS)
}
