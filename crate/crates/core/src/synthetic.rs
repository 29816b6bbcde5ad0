//! Synthetic corpora with a known vote-generating function.
//!
//! Each product gets a description and a set of questions drawn from its own
//! slice of a topic vocabulary. Each review mixes general review vocabulary
//! with words from its product's description and questions in random
//! proportions, so `desc_sim` and `qa_sim` vary independently of length.
//! Votes are [`vote_mean`] of the review's seventeen extracted features plus
//! Gaussian noise, rounded and floored at zero.

use std::fs;
use std::io::Write;
use std::path::Path;

use chrono::{Duration, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{build_corpus, flatten_attributes, Corpus, IngestPaths, InputFormat, ProductDescription, QACollection, QaPair, Review};
use crate::dataset::review_features;
use crate::error::{Error, Result};
use crate::text::Lexicons;

const GENERAL: &[&str] = &[
    "the", "a", "it", "is", "was", "and", "but", "very", "really", "good", "great", "nice", "bad", "poor", "love",
    "like", "bought", "buy", "this", "that", "for", "my", "i", "we", "our", "with", "not", "so", "too", "just",
    "product", "item", "price", "money", "value", "worth", "time", "day", "week", "month", "year", "after",
    "before", "use", "used", "using", "works", "work", "working", "happy", "satisfied", "recommend", "friend",
    "family", "gift", "order", "delivery", "box", "package", "seller", "quality", "cheap", "expensive", "overall",
    "experience", "easy", "hard", "simple", "problem", "issue", "fine", "okay", "best", "worst", "better", "worse",
    "nothing", "everything", "something", "again", "still", "also", "only", "well", "much", "many", "some", "all",
    "one", "two", "first", "last", "new", "old", "home", "office", "daily", "every", "need", "needed", "wanted",
    "expected", "looks", "feels", "seems", "pretty", "quite", "totally", "highly", "definitely", "bit", "lot",
    "thing", "things", "way", "people", "review", "stars", "returned", "replacement", "service", "support",
];

const TOPIC: &[&str] = &[
    "battery", "charger", "cable", "screen", "display", "camera", "lens", "speaker", "sound", "bass", "volume",
    "microphone", "bluetooth", "wireless", "signal", "range", "button", "switch", "power", "voltage", "adapter",
    "plug", "port", "storage", "memory", "processor", "speed", "performance", "software", "update", "firmware",
    "warranty", "weight", "size", "dimensions", "material", "plastic", "metal", "aluminium", "steel", "leather",
    "fabric", "cotton", "colour", "finish", "design", "handle", "grip", "strap", "pocket", "zipper", "lid", "seal",
    "filter", "motor", "blade", "fan", "heater", "temperature", "thermostat", "timer", "sensor", "remote",
    "control", "panel", "keyboard", "mouse", "touchpad", "headphones", "earbuds", "case", "cover", "stand",
    "mount", "bracket", "clip", "hinge", "frame", "glass", "mirror", "light", "bulb", "brightness", "resolution",
    "pixel", "zoom", "focus", "stabilization", "tripod", "card", "slot", "drive", "disk", "backup",
    "network", "router", "antenna", "modem", "printer", "ink", "paper", "scanner", "tray", "cartridge",
    "capacity", "charging", "discharge", "cycle", "indicator", "led", "alarm", "clock", "calendar", "app",
    "phone", "tablet", "laptop", "watch", "band", "fitness", "tracker", "heart", "rate", "waterproof", "dust",
    "shock", "resistant", "durable", "portable", "compact", "lightweight", "foldable", "adjustable", "rechargeable",
    "ergonomic", "noise", "cancellation", "latency", "pairing", "connection", "input", "output", "socket",
    "surge", "protection", "fuse", "circuit", "wattage", "efficiency", "energy", "consumption", "standby",
    "installation", "manual", "instructions", "assembly", "screws", "tools", "kit", "accessories", "spare",
];

const ATTRIBUTES: &[&str] = &[
    "Features", "Material", "Power", "Connectivity", "Design", "Dimensions", "Compatibility", "Warranty",
];

const QUESTION_STARTS: &[&str] = &["does the", "how long does the", "is the", "can the", "what is the", "will the"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n_reviews: usize,
    pub reviews_per_product: usize,
    /// Standard deviation of the additive Gaussian vote noise.
    pub noise_sd: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_reviews: 2000,
            reviews_per_product: 20,
            noise_sd: 10.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticProduct {
    pub product_id: String,
    pub attributes: Vec<(String, String)>,
    pub qa: Vec<QaPair>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub products: Vec<SyntheticProduct>,
    pub reviews: Vec<Review>,
    /// Noise-free expected votes, aligned with `reviews`.
    pub expected_votes: Vec<f64>,
}

/// Expected helpful votes given the seventeen features in their fixed order.
/// Dominated by the two similarity features; length, rating and lexical
/// diversity contribute a little.
pub fn vote_mean(f: &[f64]) -> f64 {
    let (length, lex_div, rating, desc, qa) = (f[6], f[12], f[14], f[15], f[16]);
    let s = 4.0 * desc + 4.0 * qa + 0.4 * ((length - 50.0) / 25.0).tanh() + 0.1 * (rating - 3.0) + 0.3 * lex_div;
    (2.0 * (1.2 * s).exp() - 2.0).max(0.0)
}

fn pick<'a, R: Rng>(words: &[&'a str], rng: &mut R) -> &'a str {
    words[rng.gen_range(0..words.len())]
}

fn sentence(words: Vec<&str>, end: char) -> String {
    let mut s = words.join(" ");
    if let Some(first) = s.get(..1) {
        s.replace_range(..1, &first.to_ascii_uppercase());
    }
    s.push(end);
    s
}

fn misspell<R: Rng>(word: &str, rng: &mut R) -> String {
    if word.len() < 4 {
        return word.to_string();
    }
    let i = rng.gen_range(1..word.len() - 1);
    let mut w = word.to_string();
    w.remove(i);
    w
}

fn make_product<R: Rng>(index: usize, rng: &mut R) -> (SyntheticProduct, Vec<&'static str>, Vec<&'static str>) {
    let product_id = format!("P{index:05}");
    let desc_vocab: Vec<&str> = TOPIC.choose_multiple(rng, 25).copied().collect();
    let qa_vocab: Vec<&str> = TOPIC.choose_multiple(rng, 20).copied().collect();
    let n_attr = rng.gen_range(4..=6);
    let attributes = ATTRIBUTES
        .choose_multiple(rng, n_attr)
        .map(|name| {
            let n = rng.gen_range(4..=8);
            let value: Vec<&str> = (0..n).map(|_| pick(&desc_vocab, rng)).collect();
            (name.to_string(), value.join(" "))
        })
        .collect();
    let n_q = rng.gen_range(4..=8);
    let qa = (0..n_q)
        .map(|_| {
            let n = rng.gen_range(3..=6);
            let mut words = vec![pick(QUESTION_STARTS, rng)];
            words.extend((0..n).map(|_| pick(&qa_vocab, rng)));
            let answer: Vec<&str> = ["yes", "it"].into_iter().chain((0..3).map(|_| pick(GENERAL, rng))).collect();
            QaPair {
                product_id: product_id.clone(),
                question: sentence(words, '?'),
                answer: sentence(answer, '.'),
            }
        })
        .collect();
    (
        SyntheticProduct {
            product_id,
            attributes,
            qa,
        },
        desc_vocab,
        qa_vocab,
    )
}

fn review_text<R: Rng>(desc_vocab: &[&str], qa_vocab: &[&str], rng: &mut R) -> String {
    let length = rng.gen_range(15..=110);
    let p_desc: f64 = rng.gen_range(0.0..0.35);
    let p_qa: f64 = rng.gen_range(0.0..0.35);
    let mut words: Vec<String> = Vec::with_capacity(length);
    for _ in 0..length {
        let u: f64 = rng.gen();
        let w = if u < p_desc {
            pick(desc_vocab, rng).to_string()
        } else if u < p_desc + p_qa {
            pick(qa_vocab, rng).to_string()
        } else if rng.gen_bool(0.03) {
            misspell(pick(GENERAL, rng), rng)
        } else {
            pick(GENERAL, rng).to_string()
        };
        words.push(w);
    }
    let mut sentences = Vec::new();
    let mut rest = &words[..];
    while !rest.is_empty() {
        let n = rng.gen_range(5..=14).min(rest.len());
        let (s, r) = rest.split_at(n);
        sentences.push(sentence(s.iter().map(String::as_str).collect(), '.'));
        rest = r;
    }
    sentences.join(" ")
}

/// Generates `config.n_reviews` reviews over `ceil(n / reviews_per_product)`
/// products. Deterministic in `config.seed`.
pub fn generate(config: &SyntheticConfig, lexicons: &Lexicons) -> Result<SyntheticData> {
    if config.n_reviews == 0 || config.reviews_per_product == 0 {
        return Err(Error::InvalidInput("synthetic corpus needs at least one review per product".into()));
    }
    if !(config.noise_sd >= 0.0 && config.noise_sd.is_finite()) {
        return Err(Error::InvalidInput(format!("noise sd {} must be finite and >= 0", config.noise_sd)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n_products = config.n_reviews.div_ceil(config.reviews_per_product);
    let base = NaiveDate::from_ymd_opt(2014, 1, 1).expect("valid date");
    let mut products = Vec::with_capacity(n_products);
    let mut drafts = Vec::with_capacity(config.n_reviews);
    for p in 0..n_products {
        let (product, desc_vocab, qa_vocab) = make_product(p, &mut rng);
        let first = p * config.reviews_per_product;
        let last = ((p + 1) * config.reviews_per_product).min(config.n_reviews);
        for i in first..last {
            let heading: Vec<&str> = (0..3).map(|_| pick(GENERAL, &mut rng)).collect();
            drafts.push(Review {
                review_id: format!("R{i:07}"),
                product_id: product.product_id.clone(),
                date: base + Duration::days(rng.gen_range(0..2000)),
                heading: sentence(heading, '.'),
                rating: *[1u8, 2, 3, 4, 4, 5, 5, 5].choose(&mut rng).expect("non-empty"),
                text: review_text(&desc_vocab, &qa_vocab, &mut rng),
                helpful_votes: 0,
            });
        }
        products.push(product);
    }
    let noise: Vec<f64> = (0..drafts.len())
        .map(|_| {
            let e: f64 = StandardNormal.sample(&mut rng);
            config.noise_sd * e
        })
        .collect();

    let descs: Vec<ProductDescription> = products.iter().map(SyntheticProduct::description).collect();
    let questions: Vec<QACollection> = products.iter().map(SyntheticProduct::questions).collect();
    let per = config.reviews_per_product;
    let expected_votes: Vec<f64> = drafts
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            let p = i / per;
            review_features(r, Some(&descs[p]), Some(&questions[p]), lexicons).map(|f| vote_mean(&f))
        })
        .collect::<Result<_>>()?;
    let reviews = drafts
        .into_iter()
        .zip(expected_votes.iter().zip(&noise))
        .map(|(mut r, (m, e))| {
            r.helpful_votes = (m + e).round().max(0.0) as u64;
            r
        })
        .collect();
    Ok(SyntheticData {
        products,
        reviews,
        expected_votes,
    })
}

impl SyntheticProduct {
    pub fn description(&self) -> ProductDescription {
        ProductDescription {
            product_id: self.product_id.clone(),
            description_text: flatten_attributes(self.attributes.iter().map(|(n, v)| (n.as_str(), v.as_str()))),
        }
    }

    pub fn questions(&self) -> QACollection {
        QACollection {
            product_id: self.product_id.clone(),
            questions: self.qa.iter().map(|q| q.question.clone()).collect(),
            answers: self.qa.iter().map(|q| q.answer.clone()).collect(),
        }
    }
}

impl SyntheticData {
    /// The corpus ingestion would build from these records, votes capped.
    pub fn corpus(&self) -> Result<Corpus> {
        let mut corpus = build_corpus(
            self.reviews.clone(),
            self.products.iter().map(SyntheticProduct::description).collect(),
            self.products.iter().flat_map(|p| p.qa.iter().cloned()).collect(),
        )?;
        corpus.apply_vote_cap()?;
        Ok(corpus)
    }

    /// Writes `reviews.csv`, `descriptions.jsonl` and `qa.jsonl` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<IngestPaths> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let reviews = dir.join("reviews.csv");
        let mut w = csv::Writer::from_path(&reviews).map_err(|source| Error::Csv {
            path: reviews.clone(),
            source,
        })?;
        let csv_err = |source| Error::Csv {
            path: reviews.clone(),
            source,
        };
        w.write_record(["review_id", "product_id", "date", "heading", "rating", "text", "helpful_votes"])
            .map_err(csv_err)?;
        for r in &self.reviews {
            w.write_record([
                r.review_id.clone(),
                r.product_id.clone(),
                r.date.format("%Y-%m-%d").to_string(),
                r.heading.clone(),
                r.rating.to_string(),
                r.text.clone(),
                r.helpful_votes.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io(&reviews, e))?;

        let descriptions = dir.join("descriptions.jsonl");
        let mut out = Vec::new();
        for p in &self.products {
            let attributes: Vec<serde_json::Value> = p
                .attributes
                .iter()
                .map(|(n, v)| serde_json::json!({ "name": n, "value": v }))
                .collect();
            serde_json::to_writer(&mut out, &serde_json::json!({ "product_id": p.product_id, "attributes": attributes }))?;
            out.push(b'\n');
        }
        write_file(&descriptions, &out)?;

        let qa = dir.join("qa.jsonl");
        let mut out = Vec::new();
        for pair in self.products.iter().flat_map(|p| &p.qa) {
            serde_json::to_writer(&mut out, pair)?;
            out.push(b'\n');
        }
        write_file(&qa, &out)?;

        Ok(IngestPaths {
            reviews,
            reviews_format: InputFormat::Csv,
            descriptions: Some(descriptions),
            qa: Some(qa),
        })
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{ingest, ParseOptions};

    fn small() -> SyntheticConfig {
        SyntheticConfig {
            n_reviews: 90,
            reviews_per_product: 20,
            noise_sd: 0.5,
            seed: 3,
        }
    }

    #[test]
    fn deterministic_and_sized() {
        let lx = Lexicons::bundled();
        let a = generate(&small(), &lx).unwrap();
        let b = generate(&small(), &lx).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.reviews.len(), 90);
        assert_eq!(a.products.len(), 5);
        assert!(a.reviews.iter().any(|r| r.helpful_votes > 0));
        let other = generate(&SyntheticConfig { seed: 4, ..small() }, &lx).unwrap();
        assert_ne!(a.reviews, other.reviews);
    }

    #[test]
    fn vote_mean_rises_with_similarity() {
        let mut f = vec![0.0; 17];
        f[6] = 50.0;
        f[14] = 3.0;
        let low = vote_mean(&f);
        f[15] = 0.3;
        f[16] = 0.3;
        assert!(vote_mean(&f) > low + 5.0);
        assert!(low >= 0.0);
    }

    #[test]
    fn written_files_ingest_to_the_same_corpus() {
        let lx = Lexicons::bundled();
        let data = generate(&small(), &lx).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let paths = data.write(dir.path()).unwrap();
        let ingested = ingest(&paths, &ParseOptions::default()).unwrap();
        let direct = data.corpus().unwrap();
        assert_eq!(ingested.reviews, direct.reviews);
        assert_eq!(ingested.descriptions, direct.descriptions);
        assert_eq!(ingested.qa, direct.qa);
    }
}
