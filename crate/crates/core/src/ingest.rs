//! Corpus ingestion: tokenize raw reviews (or read prebuilt feature files),
//! filter the vocabulary by document frequency, binarize to presence
//! indicators, attach polarity scores and rating thresholds, and group the
//! rows by genre.

use std::collections::HashMap;
use std::path::Path;

use rayon::prelude::*;

use crate::dataset::GroupedDataset;
use crate::sparse::SparseBinaryMatrix;
use crate::{Error, Result};

/// Lowercase, split on non-alphanumeric characters and drop tokens shorter
/// than `min_len` characters.
pub fn tokenize(text: &str, min_len: usize) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= min_len && !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Tokens appearing in at least `min_reviews` documents, lexicographic.
pub fn build_vocab(docs: &[Vec<String>], min_reviews: usize) -> Result<Vec<String>> {
    if min_reviews == 0 {
        return Err(Error::config("min_reviews must be at least 1"));
    }
    if docs.is_empty() {
        return Err(Error::config("cannot build a vocabulary from an empty corpus"));
    }
    let mut doc_freq: HashMap<&str, usize> = HashMap::new();
    let mut seen: Vec<&str> = Vec::new();
    for doc in docs {
        seen.clear();
        seen.extend(doc.iter().map(String::as_str));
        seen.sort_unstable();
        seen.dedup();
        for t in &seen {
            *doc_freq.entry(t).or_insert(0) += 1;
        }
    }
    let mut vocab: Vec<String> = doc_freq
        .into_iter()
        .filter(|(_, f)| *f >= min_reviews)
        .map(|(t, _)| t.to_string())
        .collect();
    if vocab.is_empty() {
        return Err(Error::config(format!(
            "no token appears in {min_reviews} or more reviews"
        )));
    }
    vocab.sort_unstable();
    Ok(vocab)
}

/// Presence indicators: x_ij = 1 iff vocabulary token j occurs in document
/// i at least once. Documents without any vocabulary token keep their
/// (empty) row.
pub fn binarize(docs: &[Vec<String>], vocab: &[String]) -> Result<SparseBinaryMatrix> {
    let index: HashMap<&str, u32> = vocab
        .iter()
        .enumerate()
        .map(|(j, t)| (t.as_str(), j as u32))
        .collect();
    let rows: Vec<Vec<u32>> = docs
        .iter()
        .map(|doc| doc.iter().filter_map(|t| index.get(t.as_str()).copied()).collect())
        .collect();
    let empty = rows.iter().filter(|r| r.is_empty()).count();
    if empty > 0 {
        log::info!("{empty} reviews contain no vocabulary token; rows kept empty");
    }
    SparseBinaryMatrix::from_rows(vocab.len(), &rows)
}

#[derive(Debug, Clone)]
pub struct IngestConfig {
    /// Genre priority order; a review in several configured genres joins
    /// the first match.
    pub genres: Vec<String>,
    pub min_reviews: usize,
    pub min_token_len: usize,
    /// Class thresholds: rating <= a is the low class, >= b the high class,
    /// strictly between is dropped.
    pub a: f64,
    pub b: f64,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            genres: vec!["drama".into(), "comedy".into(), "horror".into()],
            min_reviews: 5,
            min_token_len: 2,
            a: 4.0,
            b: 7.0,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct IngestStats {
    pub reviews_seen: usize,
    pub reviews_kept: usize,
    /// Rows dropped because the rating fell strictly between the
    /// thresholds.
    pub dropped_middle: usize,
    /// Reviews matching more than one configured genre.
    pub multi_genre: usize,
    pub empty_rows: usize,
    pub vocab_size: usize,
    /// Vocabulary tokens absent from the polarity file (scored 0).
    pub missing_polarity: usize,
}

struct RawReview {
    rating: f64,
    group: u32,
}

/// Shared metadata handling: validate the rating, resolve the genre list to
/// one configured group, apply the middle-band drop.
fn resolve_review(
    path_for_errors: &str,
    line_no: usize,
    rating_field: &str,
    genres_field: &str,
    config: &IngestConfig,
    genre_lc: &[String],
    stats: &mut IngestStats,
) -> Result<Option<RawReview>> {
    stats.reviews_seen += 1;
    let rating: u32 = rating_field.trim().parse().map_err(|_| {
        Error::parse(path_for_errors, line_no, format!("rating '{rating_field}' is not an integer"))
    })?;
    if !(1..=10).contains(&rating) {
        return Err(Error::parse(
            path_for_errors,
            line_no,
            format!("rating {rating} outside 1..=10"),
        ));
    }
    let mut matches = Vec::new();
    for part in genres_field.split(',') {
        let g = part.trim().to_lowercase();
        if let Some(k) = genre_lc.iter().position(|c| *c == g) {
            if !matches.contains(&k) {
                matches.push(k);
            }
        }
    }
    if matches.is_empty() {
        return Err(Error::parse(
            path_for_errors,
            line_no,
            format!("no genre in '{genres_field}' is among the configured set"),
        ));
    }
    if matches.len() > 1 {
        stats.multi_genre += 1;
    }
    let group = *matches.iter().min().unwrap() as u32;
    let y = rating as f64;
    if y > config.a && y < config.b {
        stats.dropped_middle += 1;
        return Ok(None);
    }
    stats.reviews_kept += 1;
    Ok(Some(RawReview { rating: y, group }))
}

/// Polarity file: `token<TAB>score` lines, optional `token	score` header.
pub fn load_polarity(path: &Path) -> Result<HashMap<String, f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
    let name = path.display().to_string();
    let mut map = HashMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split('\t');
        let token = parts
            .next()
            .ok_or_else(|| Error::parse(&name, idx + 1, "expected token<TAB>score"))?;
        let score = parts
            .next()
            .ok_or_else(|| Error::parse(&name, idx + 1, "expected token<TAB>score"))?;
        if parts.next().is_some() {
            return Err(Error::parse(&name, idx + 1, "too many fields"));
        }
        if idx == 0 && token == "token" && score.parse::<f64>().is_err() {
            continue; // header row
        }
        let score: f64 = score.parse().map_err(|_| {
            Error::parse(&name, idx + 1, format!("score '{score}' is not a number"))
        })?;
        map.insert(token.to_string(), score);
    }
    Ok(map)
}

fn attach_polarity(
    vocab: &[String],
    polarity_file: Option<&Path>,
    stats: &mut IngestStats,
) -> Result<Vec<f64>> {
    let map = match polarity_file {
        Some(p) => load_polarity(p)?,
        None => HashMap::new(),
    };
    let mut out = Vec::with_capacity(vocab.len());
    for t in vocab {
        match map.get(t) {
            Some(&s) => out.push(s),
            None => {
                stats.missing_polarity += 1;
                out.push(0.0);
            }
        }
    }
    if stats.missing_polarity > 0 {
        log::info!(
            "{} of {} vocabulary tokens have no polarity score",
            stats.missing_polarity,
            vocab.len()
        );
    }
    Ok(out)
}

fn check_groups_populated(groups: &[u32], names: &[String]) -> Result<()> {
    let mut counts = vec![0usize; names.len()];
    for &g in groups {
        counts[g as usize] += 1;
    }
    for (g, &c) in counts.iter().enumerate() {
        if c == 0 {
            return Err(Error::config(format!(
                "configured genre '{}' matched no kept reviews",
                names[g]
            )));
        }
    }
    Ok(())
}

/// Ingest a raw corpus directory: `metadata.tsv` with header
/// `file<TAB>rating<TAB>genres` (genres comma-separated) and one text file
/// per review.
pub fn ingest_corpus(
    dir: &Path,
    config: &IngestConfig,
    polarity_file: Option<&Path>,
) -> Result<(GroupedDataset, IngestStats)> {
    if config.genres.is_empty() {
        return Err(Error::config("at least one genre must be configured"));
    }
    let meta_path = dir.join("metadata.tsv");
    let name = meta_path.display().to_string();
    let text = std::fs::read_to_string(&meta_path)
        .map_err(|e| Error::config(format!("cannot read {name}: {e}")))?;
    let genre_lc: Vec<String> = config.genres.iter().map(|g| g.to_lowercase()).collect();
    let mut stats = IngestStats::default();
    let mut files = Vec::new();
    let mut reviews = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        if idx == 0 {
            if line != "file\trating\tgenres" {
                return Err(Error::parse(&name, 1, "expected header file<TAB>rating<TAB>genres"));
            }
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(&name, idx + 1, "expected 3 tab-separated fields"));
        }
        if let Some(raw) =
            resolve_review(&name, idx + 1, fields[1], fields[2], config, &genre_lc, &mut stats)?
        {
            files.push(fields[0].to_string());
            reviews.push(raw);
        }
    }
    if reviews.is_empty() {
        return Err(Error::config("no reviews survive the rating thresholds"));
    }
    let docs: Vec<Vec<String>> = files
        .par_iter()
        .map(|f| -> Result<Vec<String>> {
            let p = dir.join(f);
            let body = std::fs::read_to_string(&p)
                .map_err(|e| Error::config(format!("cannot read {}: {e}", p.display())))?;
            Ok(tokenize(&body, config.min_token_len))
        })
        .collect::<Result<_>>()?;
    let vocab = build_vocab(&docs, config.min_reviews)?;
    let x = binarize(&docs, &vocab)?;
    stats.empty_rows = x.iter_rows().filter(|r| r.is_empty()).count();
    stats.vocab_size = vocab.len();
    let polarity = attach_polarity(&vocab, polarity_file, &mut stats)?;
    let y: Vec<f64> = reviews.iter().map(|r| r.rating).collect();
    let groups: Vec<u32> = reviews.iter().map(|r| r.group).collect();
    check_groups_populated(&groups, &config.genres)?;
    let ds = GroupedDataset::new(
        x,
        y,
        groups,
        config.genres.clone(),
        config.a,
        config.b,
        vocab,
        polarity,
    )?;
    Ok((ds, stats))
}

/// Ingest prebuilt feature files, bypassing tokenization: `vocab.txt` (one
/// token per line, defining the column order) and `reviews.feat` with lines
/// `rating<TAB>genres<TAB>j:c j:c ...` (0-based column indices with counts,
/// collapsed here to presence).
pub fn ingest_prebuilt(
    dir: &Path,
    config: &IngestConfig,
    polarity_file: Option<&Path>,
) -> Result<(GroupedDataset, IngestStats)> {
    if config.genres.is_empty() {
        return Err(Error::config("at least one genre must be configured"));
    }
    let vocab_path = dir.join("vocab.txt");
    let vname = vocab_path.display().to_string();
    let vtext = std::fs::read_to_string(&vocab_path)
        .map_err(|e| Error::config(format!("cannot read {vname}: {e}")))?;
    let mut vocab = Vec::new();
    let mut seen = HashMap::new();
    for (idx, line) in vtext.lines().enumerate() {
        let t = line.trim_end_matches('\r');
        if t.is_empty() {
            continue;
        }
        if seen.insert(t.to_string(), idx).is_some() {
            return Err(Error::parse(&vname, idx + 1, format!("duplicate token '{t}'")));
        }
        vocab.push(t.to_string());
    }
    if vocab.is_empty() {
        return Err(Error::config(format!("{vname} lists no tokens")));
    }
    let feat_path = dir.join("reviews.feat");
    let fname = feat_path.display().to_string();
    let ftext = std::fs::read_to_string(&feat_path)
        .map_err(|e| Error::config(format!("cannot read {fname}: {e}")))?;
    let genre_lc: Vec<String> = config.genres.iter().map(|g| g.to_lowercase()).collect();
    let mut stats = IngestStats::default();
    let mut rows: Vec<Vec<u32>> = Vec::new();
    let mut reviews = Vec::new();
    for (idx, line) in ftext.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                &fname,
                idx + 1,
                "expected rating<TAB>genres<TAB>feature list",
            ));
        }
        let Some(raw) =
            resolve_review(&fname, idx + 1, fields[0], fields[1], config, &genre_lc, &mut stats)?
        else {
            continue;
        };
        let mut cols = Vec::new();
        for item in fields[2].split_whitespace() {
            let (j, c) = item.split_once(':').ok_or_else(|| {
                Error::parse(&fname, idx + 1, format!("feature entry '{item}' is not j:c"))
            })?;
            let j: usize = j.parse().map_err(|_| {
                Error::parse(&fname, idx + 1, format!("feature index '{j}' is not an integer"))
            })?;
            let c: u64 = c.parse().map_err(|_| {
                Error::parse(&fname, idx + 1, format!("count '{c}' is not an integer"))
            })?;
            if j >= vocab.len() {
                return Err(Error::parse(
                    &fname,
                    idx + 1,
                    format!("feature index {j} outside the {}-token vocabulary", vocab.len()),
                ));
            }
            if c > 0 {
                cols.push(j as u32);
            }
        }
        rows.push(cols);
        reviews.push(raw);
    }
    if reviews.is_empty() {
        return Err(Error::config("no reviews survive the rating thresholds"));
    }
    let x = SparseBinaryMatrix::from_rows(vocab.len(), &rows)?;
    stats.empty_rows = x.iter_rows().filter(|r| r.is_empty()).count();
    stats.vocab_size = vocab.len();
    let polarity = attach_polarity(&vocab, polarity_file, &mut stats)?;
    let y: Vec<f64> = reviews.iter().map(|r| r.rating).collect();
    let groups: Vec<u32> = reviews.iter().map(|r| r.group).collect();
    check_groups_populated(&groups, &config.genres)?;
    let ds = GroupedDataset::new(
        x,
        y,
        groups,
        config.genres.clone(),
        config.a,
        config.b,
        vocab,
        polarity,
    )?;
    Ok((ds, stats))
}
