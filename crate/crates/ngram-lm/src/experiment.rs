//! The training-size × order × method evaluation grid.
//!
//! One call trains a model per grid cell, persists each as an ARPA
//! file named `{size}.{order}.{kn|wb}.lm`, evaluates every model
//! against one shared test set, and renders three CSV reports:
//! `results.csv` (one row per cell), `diffs.csv` (per size/order, the
//! Kneser-Ney minus Witten-Bell perplexity gap), and `oov.csv`
//! (out-of-vocabulary test tokens per cumulative training size).
//!
//! Training subsets are carved disjointly from a seeded shuffle of the
//! training corpus, so a cell's model sees only its own slice. The OOV
//! report instead accumulates vocabulary across subsets in size order —
//! unions of disjoint slices grow monotonically, which is what makes
//! the OOV column weakly decreasing by construction.
//!
//! Failures isolate per cell: a degenerate discount estimate on a tiny
//! subset marks that row as failed and the rest of the grid still runs.
//! Cells are independent and run concurrently up to a configurable
//! bound; report rows are merged in deterministic (size, order, method)
//! order, so a rerun with the same seed is byte-identical.

use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::arpa::{save_arpa, ArpaError};
use crate::counts::oov_count;
use crate::model::{train_model, BuildOptions, PerplexityReport};
use crate::numfmt::format_sig;
use crate::prep::{make_subsets, shuffle_sentences, PrepError, Sentence};
use crate::smoothing::Method;
use crate::vocab::Vocabulary;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("experiment grid needs at least one {0}")]
    EmptyDimension(&'static str),
    #[error("model order must be at least 1, got {0}")]
    BadOrder(usize),
    #[error(transparent)]
    Prep(#[from] PrepError),
    #[error("failed to start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Grid definition: which models to build and how.
#[derive(Debug, Clone)]
pub struct ExperimentGrid {
    /// Training subset sizes in sentences, strictly ascending.
    pub sizes: Vec<usize>,
    pub orders: Vec<usize>,
    pub methods: Vec<Method>,
    /// Seed for the pre-carve shuffle of the training corpus.
    pub seed: u64,
    /// Maximum concurrently running cells; `None` = one per CPU.
    pub jobs: Option<usize>,
}

impl ExperimentGrid {
    pub fn new(sizes: Vec<usize>) -> Self {
        ExperimentGrid {
            sizes,
            orders: vec![3, 5, 7],
            methods: vec![Method::KneserNey, Method::WittenBell],
            seed: 0,
            jobs: None,
        }
    }
}

/// One grid cell's outcome: an evaluation on success, a rendered
/// failure reason otherwise.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub size: usize,
    pub order: usize,
    pub method: Method,
    pub model_path: PathBuf,
    pub outcome: Result<PerplexityReport, String>,
}

/// The assembled grid report.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    /// One entry per cell, sorted by (size, order, method).
    pub cells: Vec<CellResult>,
    /// Out-of-vocabulary test tokens per cumulative training size.
    pub oov_rows: Vec<(usize, u64)>,
}

/// Compact human-readable label for a subset size: `1K`, `10K`, `1M`,
/// falling back to plain digits for irregular sizes. Used in model
/// file names; the CSVs keep the numeric size.
pub fn size_label(size: usize) -> String {
    if size >= 1_000_000 && size.is_multiple_of(1_000_000) {
        format!("{}M", size / 1_000_000)
    } else if size >= 1_000 && size.is_multiple_of(1_000) {
        format!("{}K", size / 1_000)
    } else {
        size.to_string()
    }
}

fn model_file_name(size: usize, order: usize, method: Method) -> String {
    format!("{}.{order}.{method}.lm", size_label(size))
}

fn run_cell(
    subset: &[Sentence],
    test: &[Sentence],
    size: usize,
    order: usize,
    method: Method,
    model_path: PathBuf,
) -> CellResult {
    let outcome = train_model(subset, order, &BuildOptions::new(method))
        .map_err(|e| e.to_string())
        .and_then(|model| {
            save_arpa(&model, &model_path).map_err(|e| match e {
                ArpaError::Io(io) => format!("cannot write {}: {io}", model_path.display()),
                other => other.to_string(),
            })?;
            model.perplexity(test).map_err(|e| e.to_string())
        });
    match &outcome {
        Ok(report) => log::info!(
            "cell {}/{order}/{method}: ppl {:.3}, {} oov",
            size_label(size),
            report.ppl,
            report.oov
        ),
        Err(reason) => log::warn!(
            "cell {}/{order}/{method} failed: {reason}",
            size_label(size)
        ),
    }
    CellResult {
        size,
        order,
        method,
        model_path,
        outcome,
    }
}

/// Train and evaluate the whole grid.
///
/// `train` is shuffled with the grid seed and then carved into
/// disjoint subsets of the requested sizes; every model is evaluated
/// on the same `test` set. Models are written into `out_dir`, which is
/// created if missing. Cell failures are recorded per row, not
/// returned: inspect [`ComparisonReport::all_ok`].
pub fn run_grid(
    grid: &ExperimentGrid,
    train: &[Sentence],
    test: &[Sentence],
    out_dir: &Path,
) -> Result<ComparisonReport, ExperimentError> {
    if grid.sizes.is_empty() {
        return Err(ExperimentError::EmptyDimension("training size"));
    }
    if grid.orders.is_empty() {
        return Err(ExperimentError::EmptyDimension("order"));
    }
    if grid.methods.is_empty() {
        return Err(ExperimentError::EmptyDimension("method"));
    }
    if let Some(&bad) = grid.orders.iter().find(|&&k| k == 0) {
        return Err(ExperimentError::BadOrder(bad));
    }

    let shuffled = shuffle_sentences(train.to_vec(), grid.seed);
    let subsets = make_subsets(&shuffled, &grid.sizes)?;
    std::fs::create_dir_all(out_dir)?;

    let mut orders = grid.orders.clone();
    orders.sort_unstable();
    orders.dedup();
    let mut methods = grid.methods.clone();
    methods.sort_unstable();
    methods.dedup();

    let mut specs = Vec::new();
    for (subset, &size) in subsets.iter().zip(&grid.sizes) {
        for &order in &orders {
            for &method in &methods {
                let path = out_dir.join(model_file_name(size, order, method));
                specs.push((subset.as_slice(), size, order, method, path));
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(grid.jobs.unwrap_or(0))
        .build()?;
    let cells: Vec<CellResult> = pool.install(|| {
        specs
            .into_par_iter()
            .map(|(subset, size, order, method, path)| {
                run_cell(subset, test, size, order, method, path)
            })
            .collect()
    });

    // OOV against the union of all subsets seen so far: disjoint
    // slices accumulate into the nested vocabularies the trend is
    // defined over.
    let mut union_vocab = Vocabulary::new();
    let mut oov_rows = Vec::with_capacity(subsets.len());
    for (subset, &size) in subsets.iter().zip(&grid.sizes) {
        for sentence in subset {
            for token in sentence {
                union_vocab.intern(token);
            }
        }
        let (oov, _total) = oov_count(&union_vocab, test);
        oov_rows.push((size, oov));
    }

    Ok(ComparisonReport { cells, oov_rows })
}

impl ComparisonReport {
    /// `true` when every cell trained and evaluated.
    pub fn all_ok(&self) -> bool {
        self.cells.iter().all(|c| c.outcome.is_ok())
    }

    /// `results.csv`: `size,order,method,ppl,oov,words`, one row per
    /// cell in (size, order, method) order. Failed cells carry `NA` in
    /// the measurement columns.
    pub fn results_csv(&self) -> String {
        let mut out = String::from("size,order,method,ppl,oov,words\n");
        for cell in &self.cells {
            match &cell.outcome {
                Ok(r) => out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    cell.size,
                    cell.order,
                    cell.method,
                    format_sig(r.ppl, 6),
                    r.oov,
                    r.words
                )),
                Err(_) => out.push_str(&format!(
                    "{},{},{},NA,NA,NA\n",
                    cell.size, cell.order, cell.method
                )),
            }
        }
        out
    }

    /// `diffs.csv`: `size,order,ppl_diff_kn_minus_wb`, one row per
    /// (size, order) pair where both methods succeeded. Negative
    /// values mean Kneser-Ney did better.
    pub fn diffs_csv(&self) -> String {
        let mut out = String::from("size,order,ppl_diff_kn_minus_wb\n");
        for pair in self.method_pairs() {
            let (size, order, kn, wb) = pair;
            out.push_str(&format!("{size},{order},{}\n", format_sig(kn - wb, 6)));
        }
        out
    }

    /// The (size, order, ppl_kn, ppl_wb) tuples for which both methods
    /// produced a model.
    pub fn method_pairs(&self) -> Vec<(usize, usize, f64, f64)> {
        let find = |size, order, method| {
            self.cells.iter().find_map(|c| {
                if c.size == size && c.order == order && c.method == method {
                    c.outcome.as_ref().ok().map(|r| r.ppl)
                } else {
                    None
                }
            })
        };
        let mut pairs = Vec::new();
        let mut keys: Vec<(usize, usize)> = self.cells.iter().map(|c| (c.size, c.order)).collect();
        keys.dedup();
        for (size, order) in keys {
            if let (Some(kn), Some(wb)) = (
                find(size, order, Method::KneserNey),
                find(size, order, Method::WittenBell),
            ) {
                pairs.push((size, order, kn, wb));
            }
        }
        pairs
    }

    /// `oov.csv`: `size,oov`, one row per cumulative training size.
    pub fn oov_csv(&self) -> String {
        let mut out = String::from("size,oov\n");
        for &(size, oov) in &self.oov_rows {
            out.push_str(&format!("{size},{oov}\n"));
        }
        out
    }

    /// Write all three CSV files into `dir`, returning total bytes.
    pub fn write_csv_files(&self, dir: &Path) -> io::Result<u64> {
        let mut written = 0u64;
        for (name, body) in [
            ("results.csv", self.results_csv()),
            ("diffs.csv", self.diffs_csv()),
            ("oov.csv", self.oov_csv()),
        ] {
            std::fs::write(dir.join(name), &body)?;
            written += body.len() as u64;
        }
        Ok(written)
    }
}
