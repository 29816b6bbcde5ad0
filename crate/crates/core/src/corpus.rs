//! Ingestion of the three input corpora: reviews, product descriptions and
//! customer questions.
//!
//! Reviews come as JSON lines or CSV with the header
//! `review_id,product_id,date,heading,rating,text,helpful_votes`.
//! Descriptions are JSON lines `{"product_id", "attributes": [{"name", "value"}]}`
//! and Q&A pairs are JSON lines `{"product_id", "question", "answer"}`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, RecordError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Review {
    pub review_id: String,
    pub product_id: String,
    pub date: NaiveDate,
    pub heading: String,
    pub rating: u8,
    pub text: String,
    pub helpful_votes: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProductDescription {
    pub product_id: String,
    pub description_text: String,
}

/// Customer questions for one product. Only the questions feed similarity;
/// answers are carried along.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QACollection {
    pub product_id: String,
    pub questions: Vec<String>,
    pub answers: Vec<String>,
}

/// One line of the Q&A input file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaPair {
    pub product_id: String,
    pub question: String,
    #[serde(default)]
    pub answer: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CleaningReport {
    pub reviews_in: usize,
    pub reviews_kept: usize,
    /// Reviews whose text was empty after cleaning.
    pub dropped_empty_text: Vec<String>,
    /// Texts (reviews, descriptions, questions) changed by cleaning.
    pub texts_modified: usize,
    /// Records rejected while parsing, summed over all input files.
    pub rejected_records: usize,
    pub vote_cap: Option<f64>,
    pub votes_capped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub reviews: Vec<Review>,
    pub descriptions: BTreeMap<String, ProductDescription>,
    pub qa: BTreeMap<String, QACollection>,
    pub cleaning_report: CleaningReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Csv,
    Jsonl,
}

impl InputFormat {
    /// Guess from the file extension; anything but `.csv` is JSON lines.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => InputFormat::Csv,
            _ => InputFormat::Jsonl,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParseOptions {
    /// Abort when more than this fraction of records is rejected.
    pub max_reject_fraction: f64,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            max_reject_fraction: 0.10,
        }
    }
}

/// Valid records plus the rejected ones with their line numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T> {
    pub records: Vec<T>,
    pub rejected: Vec<RecordError>,
}

impl<T> Parsed<T> {
    fn check(self, path: &Path, opts: &ParseOptions) -> Result<Self> {
        let total = self.records.len() + self.rejected.len();
        if total > 0 {
            let fraction = self.rejected.len() as f64 / total as f64;
            if fraction > opts.max_reject_fraction {
                return Err(Error::TooManyRejected {
                    path: path.to_path_buf(),
                    rejected: self.rejected.len(),
                    total,
                    limit: opts.max_reject_fraction * 100.0,
                    first: self.rejected[0].clone(),
                });
            }
        }
        Ok(self)
    }
}

/// Maps every Unicode whitespace character to a space, drops anything that is
/// not printable ASCII, collapses whitespace runs and trims.
pub fn clean_text(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    for c in raw.chars() {
        if c.is_whitespace() {
            pending_space = true;
        } else if c.is_ascii_graphic() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c);
        }
    }
    out
}

/// Caps every vote count at `floor(3 × mean of the non-zero votes)`.
///
/// Returns the capped reviews and the (unfloored) cap. With no positive votes
/// the cap is 0 and nothing changes.
pub fn cap_votes(reviews: &[Review]) -> Result<(Vec<Review>, f64)> {
    if reviews.is_empty() {
        return Err(Error::InvalidInput("cap_votes on an empty review list".into()));
    }
    let (sum, n) = reviews
        .iter()
        .filter(|r| r.helpful_votes > 0)
        .fold((0u128, 0u64), |(s, n), r| (s + r.helpful_votes as u128, n + 1));
    if n == 0 {
        return Ok((reviews.to_vec(), 0.0));
    }
    let cap = 3.0 * (sum as f64 / n as f64);
    let limit = cap.floor() as u64;
    let capped = reviews
        .iter()
        .map(|r| Review {
            helpful_votes: r.helpful_votes.min(limit),
            ..r.clone()
        })
        .collect();
    Ok((capped, cap))
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

pub fn parse_reviews(path: &Path, format: InputFormat, opts: &ParseOptions) -> Result<Parsed<Review>> {
    let file = open(path)?;
    let parsed = match format {
        InputFormat::Jsonl => read_jsonl_rows(BufReader::new(file), path)?,
        InputFormat::Csv => read_csv_rows(file, path)?,
    };
    let mut out = Parsed {
        records: Vec::new(),
        rejected: Vec::new(),
    };
    for (line, row) in parsed {
        match row.and_then(|fields| review_from_fields(&fields)) {
            Ok(review) => out.records.push(review),
            Err(reason) => out.rejected.push(RecordError { line, reason }),
        }
    }
    out.check(path, opts)
}

type Row = std::result::Result<HashMap<String, String>, String>;

fn read_jsonl_rows<R: BufRead>(reader: R, path: &Path) -> Result<Vec<(usize, Row)>> {
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row = match serde_json::from_str::<serde_json::Value>(&line) {
            Ok(serde_json::Value::Object(map)) => Ok(map
                .into_iter()
                .filter_map(|(k, v)| match v {
                    serde_json::Value::Null => None,
                    serde_json::Value::String(s) => Some((k, s)),
                    other => Some((k, other.to_string())),
                })
                .collect()),
            Ok(_) => Err("record is not a JSON object".to_string()),
            Err(e) => Err(format!("malformed JSON: {e}")),
        };
        rows.push((i + 1, row));
    }
    Ok(rows)
}

fn read_csv_rows<R: Read>(reader: R, path: &Path) -> Result<Vec<(usize, Row)>> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?
        .clone();
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let (line, row) = match record {
            Ok(rec) => {
                let line = rec.position().map_or(i + 2, |p| p.line() as usize);
                let row = if rec.len() != headers.len() {
                    Err(format!("expected {} fields, found {}", headers.len(), rec.len()))
                } else {
                    Ok(headers
                        .iter()
                        .zip(rec.iter())
                        .map(|(h, v)| (h.to_string(), v.to_string()))
                        .collect())
                };
                (line, row)
            }
            Err(e) => {
                let line = e.position().map_or(i + 2, |p| p.line() as usize);
                (line, Err(format!("malformed CSV: {e}")))
            }
        };
        rows.push((line, row));
    }
    Ok(rows)
}

fn review_from_fields(fields: &HashMap<String, String>) -> std::result::Result<Review, String> {
    let get = |name: &str| {
        fields
            .get(name)
            .map(String::as_str)
            .ok_or_else(|| format!("missing field {name:?}"))
    };
    let review_id = get("review_id")?.trim();
    if review_id.is_empty() {
        return Err("empty review_id".into());
    }
    let product_id = get("product_id")?.trim();
    if product_id.is_empty() {
        return Err("empty product_id".into());
    }
    let date_raw = get("date")?.trim();
    let date = NaiveDate::parse_from_str(date_raw, "%Y-%m-%d")
        .map_err(|_| format!("unparseable date {date_raw:?}"))?;
    let rating_raw = get("rating")?.trim();
    let rating: i64 = rating_raw
        .parse()
        .map_err(|_| format!("rating {rating_raw:?} is not an integer"))?;
    if !(1..=5).contains(&rating) {
        return Err(format!("rating out of range: {rating}"));
    }
    let votes_raw = get("helpful_votes")?.trim();
    let votes: i64 = votes_raw
        .parse()
        .map_err(|_| format!("helpful_votes {votes_raw:?} is not an integer"))?;
    if votes < 0 {
        return Err(format!("negative helpful_votes: {votes}"));
    }
    Ok(Review {
        review_id: review_id.to_string(),
        product_id: product_id.to_string(),
        date,
        heading: get("heading")?.to_string(),
        rating: rating as u8,
        text: get("text")?.to_string(),
        helpful_votes: votes as u64,
    })
}

#[derive(Deserialize)]
struct RawDescription {
    product_id: String,
    #[serde(default)]
    attributes: Vec<RawAttribute>,
}

#[derive(Deserialize)]
struct RawAttribute {
    name: String,
    value: String,
}

/// Flattens attribute pairs into `"name: value. name: value."`.
pub fn flatten_attributes<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> String {
    pairs
        .into_iter()
        .map(|(name, value)| format!("{}: {}.", name.trim(), value.trim()))
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_jsonl<T, U, F>(path: &Path, opts: &ParseOptions, mut convert: F) -> Result<Parsed<U>>
where
    T: for<'de> Deserialize<'de>,
    F: FnMut(T) -> std::result::Result<U, String>,
{
    let reader = BufReader::new(open(path)?);
    let mut out = Parsed {
        records: Vec::new(),
        rejected: Vec::new(),
    };
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let result = serde_json::from_str::<T>(&line)
            .map_err(|e| format!("invalid record: {e}"))
            .and_then(&mut convert);
        match result {
            Ok(v) => out.records.push(v),
            Err(reason) => out.rejected.push(RecordError { line: i + 1, reason }),
        }
    }
    out.check(path, opts)
}

pub fn parse_descriptions(path: &Path, opts: &ParseOptions) -> Result<Parsed<ProductDescription>> {
    let mut seen = HashSet::new();
    parse_jsonl(path, opts, |raw: RawDescription| {
        if raw.product_id.trim().is_empty() {
            return Err("empty product_id".into());
        }
        if !seen.insert(raw.product_id.clone()) {
            return Err(format!("second description for product {:?}", raw.product_id));
        }
        Ok(ProductDescription {
            description_text: flatten_attributes(
                raw.attributes.iter().map(|a| (a.name.as_str(), a.value.as_str())),
            ),
            product_id: raw.product_id,
        })
    })
}

pub fn parse_qa(path: &Path, opts: &ParseOptions) -> Result<Parsed<QaPair>> {
    parse_jsonl(path, opts, |pair: QaPair| {
        if pair.product_id.trim().is_empty() {
            Err("empty product_id".into())
        } else {
            Ok(pair)
        }
    })
}

/// Joins reviews with descriptions and questions by product, cleaning every
/// text. Reviews whose text cleans to nothing are dropped and listed in the
/// report. Output reviews are ordered by `review_id`.
pub fn build_corpus(
    reviews: Vec<Review>,
    descriptions: Vec<ProductDescription>,
    qa: Vec<QaPair>,
) -> Result<Corpus> {
    let mut report = CleaningReport {
        reviews_in: reviews.len(),
        ..Default::default()
    };
    let mut clean = |s: &str| {
        let c = clean_text(s);
        if c != s {
            report.texts_modified += 1;
        }
        c
    };

    let mut seen = HashSet::with_capacity(reviews.len());
    let mut kept = Vec::with_capacity(reviews.len());
    let mut dropped = Vec::new();
    for review in reviews {
        if !seen.insert(review.review_id.clone()) {
            return Err(Error::DuplicateReview(review.review_id));
        }
        let text = clean(&review.text);
        if text.is_empty() {
            dropped.push(review.review_id);
            continue;
        }
        kept.push(Review {
            text,
            heading: clean_text(&review.heading),
            ..review
        });
    }
    kept.sort_by(|a, b| a.review_id.cmp(&b.review_id));

    let mut desc_map = BTreeMap::new();
    for d in descriptions {
        let text = clean(&d.description_text);
        if desc_map.contains_key(&d.product_id) {
            return Err(Error::InvalidInput(format!(
                "duplicate description for product {:?}",
                d.product_id
            )));
        }
        desc_map.insert(
            d.product_id.clone(),
            ProductDescription {
                product_id: d.product_id,
                description_text: text,
            },
        );
    }

    let mut qa_map: BTreeMap<String, QACollection> = BTreeMap::new();
    for pair in qa {
        let question = clean(&pair.question);
        let answer = clean(&pair.answer);
        let entry = qa_map
            .entry(pair.product_id.clone())
            .or_insert_with(|| QACollection {
                product_id: pair.product_id.clone(),
                ..Default::default()
            });
        if !question.is_empty() {
            entry.questions.push(question);
        }
        if !answer.is_empty() {
            entry.answers.push(answer);
        }
    }

    for r in &kept {
        desc_map
            .entry(r.product_id.clone())
            .or_insert_with(|| ProductDescription {
                product_id: r.product_id.clone(),
                description_text: String::new(),
            });
        qa_map
            .entry(r.product_id.clone())
            .or_insert_with(|| QACollection {
                product_id: r.product_id.clone(),
                ..Default::default()
            });
    }

    dropped.sort();
    report.reviews_kept = kept.len();
    report.dropped_empty_text = dropped;
    Ok(Corpus {
        reviews: kept,
        descriptions: desc_map,
        qa: qa_map,
        cleaning_report: report,
    })
}

impl Corpus {
    /// Applies [`cap_votes`] in place and records the cap in the report.
    pub fn apply_vote_cap(&mut self) -> Result<f64> {
        let (capped, cap) = cap_votes(&self.reviews)?;
        let changed = self
            .reviews
            .iter()
            .zip(&capped)
            .filter(|(a, b)| a.helpful_votes != b.helpful_votes)
            .count();
        self.reviews = capped;
        self.cleaning_report.vote_cap = Some(cap);
        self.cleaning_report.votes_capped = changed;
        Ok(cap)
    }

    pub fn description(&self, product_id: &str) -> Option<&ProductDescription> {
        self.descriptions.get(product_id)
    }

    pub fn questions(&self, product_id: &str) -> Option<&QACollection> {
        self.qa.get(product_id)
    }

    pub fn review(&self, review_id: &str) -> Option<&Review> {
        self.reviews
            .binary_search_by(|r| r.review_id.as_str().cmp(review_id))
            .ok()
            .map(|i| &self.reviews[i])
    }

    pub fn load(path: &Path) -> Result<Corpus> {
        let reader = BufReader::new(open(path)?);
        Ok(serde_json::from_reader(reader)?)
    }
}

/// Reads, validates and joins the three input files, then caps votes.
pub struct IngestPaths {
    pub reviews: PathBuf,
    pub reviews_format: InputFormat,
    pub descriptions: Option<PathBuf>,
    pub qa: Option<PathBuf>,
}

pub fn ingest(paths: &IngestPaths, opts: &ParseOptions) -> Result<Corpus> {
    let reviews = parse_reviews(&paths.reviews, paths.reviews_format, opts)?;
    let mut rejected = reviews.rejected.len();
    for e in &reviews.rejected {
        log::warn!("{}: {e}", paths.reviews.display());
    }
    let descriptions = match &paths.descriptions {
        Some(p) => {
            let d = parse_descriptions(p, opts)?;
            rejected += d.rejected.len();
            for e in &d.rejected {
                log::warn!("{}: {e}", p.display());
            }
            d.records
        }
        None => Vec::new(),
    };
    let qa = match &paths.qa {
        Some(p) => {
            let q = parse_qa(p, opts)?;
            rejected += q.rejected.len();
            for e in &q.rejected {
                log::warn!("{}: {e}", p.display());
            }
            q.records
        }
        None => Vec::new(),
    };
    let mut corpus = build_corpus(reviews.records, descriptions, qa)?;
    corpus.cleaning_report.rejected_records = rejected;
    if !corpus.reviews.is_empty() {
        corpus.apply_vote_cap()?;
    }
    Ok(corpus)
}
