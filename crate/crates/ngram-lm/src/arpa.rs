//! ARPA backoff model serialization.
//!
//! The textual layout is the one every mainstream n-gram toolkit reads:
//! a `\data\` header listing entry counts per order, one `\k-grams:`
//! section per order holding `LOGPROB<TAB>w1 .. wk[<TAB>LOGBACKOFF]`
//! lines, and a closing `\end\`. Log values are base 10. Probabilities
//! print with seven significant digits, escalating to the shortest
//! exactly round-tripping form when trimming would perturb the value,
//! so a written model re-reads bit-for-bit. Entries within a section
//! are sorted lexicographically by token sequence, which together with
//! the deterministic float formatting makes serialization
//! byte-reproducible.
//!
//! The reader is stricter than the writer needs: it validates section
//! ordering, per-section entry counts against the header, token arity,
//! numeric fields, and duplicate entries, and reports the offending
//! line number on failure. Fields may be separated by tabs or spaces,
//! which covers the common toolkit variants.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::model::{BackoffModel, ModelError, LOG10_ZERO};
use crate::numfmt::format_sig_exact;
use crate::vocab::{Vocabulary, WordId};

/// Serialization and parse failures. Parse failures carry the
/// 1-based line number of the offending input line.
#[derive(Debug, Error)]
pub enum ArpaError {
    #[error("model has no unigram entries, refusing to write an empty file")]
    EmptyModel,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("model validation failed: {0}")]
    Model(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn parse_err(line: usize, message: impl Into<String>) -> ArpaError {
    ArpaError::Parse {
        line,
        message: message.into(),
    }
}

/// Format one log10 value for the file: seven significant digits when
/// that round-trips, shortest exact form otherwise. The `-99` floor
/// used for non-event placeholders prints as a bare integer.
fn format_log(x: f64) -> String {
    format_sig_exact(x, 7)
}

/// Write `model` in ARPA format, returning the number of bytes written.
pub fn write_arpa<W: Write>(model: &BackoffModel, sink: W) -> Result<u64, ArpaError> {
    if model.num_entries(1) == 0 {
        return Err(ArpaError::EmptyModel);
    }
    let mut out = BufWriter::new(sink);
    let mut written = 0u64;
    let mut emit = |out: &mut BufWriter<W>, line: &str| -> io::Result<()> {
        out.write_all(line.as_bytes())?;
        out.write_all(b"\n")?;
        written += line.len() as u64 + 1;
        Ok(())
    };

    emit(&mut out, "\\data\\")?;
    for k in 1..=model.order() {
        emit(&mut out, &format!("ngram {k}={}", model.num_entries(k)))?;
    }
    let vocab = model.vocab();
    for k in 1..=model.order() {
        emit(&mut out, "")?;
        emit(&mut out, &format!("\\{k}-grams:"))?;
        let mut rows: Vec<(Vec<&str>, String)> = Vec::with_capacity(model.num_entries(k));
        for (gram, log_prob) in model.entries(k) {
            let tokens: Vec<&str> = gram.iter().map(|&w| vocab.word(w)).collect();
            let mut line = format!("{}\t{}", format_log(log_prob), tokens.join(" "));
            if let Some(bow) = model.bow_entry(gram) {
                line.push('\t');
                line.push_str(&format_log(bow));
            }
            rows.push((tokens, line));
        }
        rows.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        for (_, line) in &rows {
            emit(&mut out, line)?;
        }
    }
    emit(&mut out, "")?;
    emit(&mut out, "\\end\\")?;
    out.flush()?;
    Ok(written)
}

/// Write an ARPA file at `path`. Returns the number of bytes written.
pub fn save_arpa(model: &BackoffModel, path: impl AsRef<Path>) -> Result<u64, ArpaError> {
    write_arpa(model, File::create(path)?)
}

/// Read an ARPA model from `path`.
pub fn load_arpa(path: impl AsRef<Path>) -> Result<BackoffModel, ArpaError> {
    read_arpa(BufReader::new(File::open(path)?))
}

struct Lines<R> {
    source: R,
    number: usize,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self) -> Result<Option<(usize, String)>, ArpaError> {
        let mut buf = String::new();
        if self.source.read_line(&mut buf)? == 0 {
            return Ok(None);
        }
        self.number += 1;
        while buf.ends_with('\n') || buf.ends_with('\r') {
            buf.pop();
        }
        Ok(Some((self.number, buf)))
    }

    /// Next line that is not blank.
    fn next_content(&mut self) -> Result<Option<(usize, String)>, ArpaError> {
        while let Some((number, line)) = self.next()? {
            if !line.trim().is_empty() {
                return Ok(Some((number, line)));
            }
        }
        Ok(None)
    }
}

/// Parse an ARPA model from a buffered reader.
///
/// Errors name the first offending line. The accepted dialect is
/// deliberately wider than what [`write_arpa`] produces: blank lines
/// between sections are optional, and entry fields may be separated by
/// any mix of tabs and spaces.
pub fn read_arpa<R: BufRead>(source: R) -> Result<BackoffModel, ArpaError> {
    let mut lines = Lines { source, number: 0 };

    let (number, line) = lines
        .next_content()?
        .ok_or_else(|| parse_err(1, "empty input, expected \\data\\ header"))?;
    if line.trim() != "\\data\\" {
        return Err(parse_err(
            number,
            format!("expected \\data\\ header, found {line:?}"),
        ));
    }

    // header: `ngram K=N` for K = 1..=n in ascending order
    let mut declared: Vec<usize> = Vec::new();
    let first_section;
    loop {
        let (number, line) = lines
            .next_content()?
            .ok_or_else(|| parse_err(lines.number, "unexpected end of file inside header"))?;
        let trimmed = line.trim();
        if let Some(rest) = trimmed.strip_prefix("ngram ") {
            let (order, count) = rest
                .split_once('=')
                .ok_or_else(|| parse_err(number, format!("malformed header line {line:?}")))?;
            let order: usize = order.trim().parse().map_err(|_| {
                parse_err(number, format!("non-numeric order in header line {line:?}"))
            })?;
            let count: usize = count.trim().parse().map_err(|_| {
                parse_err(number, format!("non-numeric count in header line {line:?}"))
            })?;
            if order != declared.len() + 1 {
                return Err(parse_err(
                    number,
                    format!("header orders must ascend from 1, found order {order}"),
                ));
            }
            declared.push(count);
        } else if trimmed.starts_with('\\') {
            first_section = (number, trimmed.to_string());
            break;
        } else {
            return Err(parse_err(
                number,
                format!("expected ngram count or section marker, found {line:?}"),
            ));
        }
    }
    if declared.is_empty() {
        return Err(parse_err(
            first_section.0,
            "header declares no n-gram orders",
        ));
    }
    if declared[0] == 0 {
        return Err(parse_err(first_section.0, "header declares zero unigrams"));
    }

    let max_order = declared.len();
    let mut vocab = Vocabulary::new();
    let mut probs: Vec<HashMap<Box<[WordId]>, f64>> = declared
        .iter()
        .map(|&n| HashMap::with_capacity(n))
        .collect();
    let mut bows: Vec<HashMap<Box<[WordId]>, f64>> = vec![HashMap::new(); max_order - 1];

    let mut marker = Some(first_section);
    for k in 1..=max_order {
        let (number, line) = marker
            .take()
            .ok_or_else(|| parse_err(lines.number, format!("missing \\{k}-grams: section")))?;
        if line != format!("\\{k}-grams:") {
            return Err(parse_err(
                number,
                format!("expected \\{k}-grams: section, found {line:?}"),
            ));
        }
        let mut seen = 0usize;
        loop {
            if seen == declared[k - 1] {
                break;
            }
            let (number, line) = lines.next_content()?.ok_or_else(|| {
                parse_err(
                    lines.number,
                    format!(
                        "unexpected end of file: \\{k}-grams: section has {seen} of {} entries",
                        declared[k - 1]
                    ),
                )
            })?;
            if line.trim().starts_with('\\') {
                return Err(parse_err(
                    number,
                    format!(
                        "\\{k}-grams: section ended after {seen} of {} declared entries",
                        declared[k - 1]
                    ),
                ));
            }
            parse_entry(
                &line, number, k, max_order, &mut vocab, &mut probs, &mut bows,
            )?;
            seen += 1;
        }
        // the next marker decides whether another section follows
        let (number, line) = lines
            .next_content()?
            .ok_or_else(|| parse_err(lines.number, "unexpected end of file, expected \\end\\"))?;
        let trimmed = line.trim().to_string();
        if !trimmed.starts_with('\\') {
            return Err(parse_err(
                number,
                format!(
                    "\\{k}-grams: section holds more than the declared {} entries",
                    declared[k - 1]
                ),
            ));
        }
        marker = Some((number, trimmed));
    }

    let (number, line) = marker.expect("loop leaves a pending marker");
    if line != "\\end\\" {
        return Err(parse_err(
            number,
            format!("expected \\end\\, found {line:?}"),
        ));
    }
    if let Some((number, line)) = lines.next_content()? {
        return Err(parse_err(
            number,
            format!("unexpected content after \\end\\: {line:?}"),
        ));
    }

    Ok(BackoffModel::from_parts(vocab, probs, bows)?)
}

fn parse_entry(
    line: &str,
    number: usize,
    k: usize,
    max_order: usize,
    vocab: &mut Vocabulary,
    probs: &mut [HashMap<Box<[WordId]>, f64>],
    bows: &mut [HashMap<Box<[WordId]>, f64>],
) -> Result<(), ArpaError> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    let has_bow = match fields.len() {
        n if n == k + 1 => false,
        n if n == k + 2 => true,
        _ => {
            return Err(parse_err(
                number,
                format!(
                    "malformed {k}-gram entry: expected {} or {} fields, found {}",
                    k + 1,
                    k + 2,
                    fields.len()
                ),
            ))
        }
    };
    if has_bow && k == max_order {
        return Err(parse_err(
            number,
            format!("{k}-gram entry carries a backoff weight at the highest order"),
        ));
    }
    let log_prob: f64 = fields[0].parse().map_err(|_| {
        parse_err(
            number,
            format!("non-numeric log probability {:?}", fields[0]),
        )
    })?;
    let gram: Box<[WordId]> = if k == 1 {
        Box::new([vocab.intern(fields[1])])
    } else {
        fields[1..=k]
            .iter()
            .map(|token| {
                vocab.id(token).ok_or_else(|| {
                    parse_err(
                        number,
                        format!("token {token:?} does not appear in the unigram section"),
                    )
                })
            })
            .collect::<Result<_, _>>()?
    };
    if probs[k - 1].insert(gram.clone(), log_prob).is_some() {
        return Err(parse_err(
            number,
            format!("duplicate {k}-gram entry {:?}", fields[1..=k].join(" ")),
        ));
    }
    if has_bow {
        let bow: f64 = fields[k + 1].parse().map_err(|_| {
            parse_err(
                number,
                format!("non-numeric backoff weight {:?}", fields[k + 1]),
            )
        })?;
        bows[k - 1].insert(gram, bow);
    }
    Ok(())
}

/// Parse a model from an in-memory string, mostly for tests and tooling.
pub fn read_arpa_str(text: &str) -> Result<BackoffModel, ArpaError> {
    read_arpa(BufReader::new(text.as_bytes()))
}

/// Serialize a model to an in-memory string.
pub fn write_arpa_string(model: &BackoffModel) -> Result<String, ArpaError> {
    let mut buf = Vec::new();
    write_arpa(model, &mut buf)?;
    Ok(String::from_utf8(buf).expect("ARPA output is UTF-8"))
}

/// `true` when a log value is the "no real probability" placeholder
/// written for non-event entries such as the sentence-start token.
pub fn is_log_zero(x: f64) -> bool {
    x <= LOG10_ZERO
}
