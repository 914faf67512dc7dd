//! Corpus ingestion, text normalization and vocabulary construction.
//!
//! Input corpora are pre-segmented: token boundaries come from the input
//! format only. Normalization maps every token character-wise (digits to `0`,
//! ASCII letters to lowercase, Mandarin ideographs kept, everything else
//! removed) and never introduces or removes token boundaries.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::{Error, Result};

/// Character classes kept by [`normalize_text`].
///
/// The default Mandarin range is the CJK Unified Ideographs base block
/// (U+4E00..=U+9FFF). Extension blocks can be switched on for corpora that
/// contain rarer ideographs.
#[derive(Debug, Clone)]
pub struct NormalizationConfig {
    mandarin_ranges: Vec<(char, char)>,
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        NormalizationConfig {
            mandarin_ranges: vec![('\u{4E00}', '\u{9FFF}')],
        }
    }
}

impl NormalizationConfig {
    /// Additionally admit CJK Extension A and the compatibility ideographs.
    pub fn with_extension_blocks() -> Self {
        NormalizationConfig {
            mandarin_ranges: vec![
                ('\u{4E00}', '\u{9FFF}'),
                ('\u{3400}', '\u{4DBF}'),
                ('\u{F900}', '\u{FAFF}'),
                ('\u{20000}', '\u{2A6DF}'),
            ],
        }
    }

    fn is_mandarin(&self, c: char) -> bool {
        self.mandarin_ranges
            .iter()
            .any(|&(lo, hi)| c >= lo && c <= hi)
    }
}

/// Character-wise normalization: numeric characters become `'0'`, ASCII
/// letters are lowercased, Mandarin ideographs pass through, everything else
/// (punctuation, whitespace, emoji, non-Latin scripts) is removed.
///
/// Idempotent: the output alphabet (`0`, lowercase ASCII, ideographs) maps to
/// itself. An empty result is legal.
pub fn normalize_text(raw: &str, rules: &NormalizationConfig) -> String {
    raw.chars()
        .filter_map(|c| {
            if c.is_numeric() {
                Some('0')
            } else if c.is_ascii_alphabetic() {
                Some(c.to_ascii_lowercase())
            } else if rules.is_mandarin(c) {
                Some(c)
            } else {
                None
            }
        })
        .collect()
}

/// One document: the unit of co-occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedText {
    pub source_id: String,
    pub tokens: Vec<String>,
}

/// A sequence of tokenized, normalized documents.
#[derive(Debug, Clone)]
pub struct Corpus {
    texts: Vec<TokenizedText>,
    label: String,
    dropped_texts: usize,
    dropped_tokens: usize,
}

impl Corpus {
    /// Build a corpus from already-normalized texts (mostly for tests).
    pub fn from_texts(label: impl Into<String>, texts: Vec<TokenizedText>) -> Result<Self> {
        if texts.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        Ok(Corpus {
            texts,
            label: label.into(),
            dropped_texts: 0,
            dropped_tokens: 0,
        })
    }

    pub fn texts(&self) -> &[TokenizedText] {
        &self.texts
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Texts dropped at ingestion because every token normalized to empty.
    pub fn dropped_texts(&self) -> usize {
        self.dropped_texts
    }

    /// Individual tokens dropped at ingestion (normalized to empty).
    pub fn dropped_tokens(&self) -> usize {
        self.dropped_tokens
    }

    pub fn token_count(&self) -> usize {
        self.texts.iter().map(|t| t.tokens.len()).sum()
    }
}

/// On-disk corpus formats accepted by [`ingest_corpus`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    /// One text per line, tokens separated by single spaces.
    PretokenizedLines,
    /// One JSON object per line: `{"id": string, "tokens": [string, ...]}`.
    TokenJsonLines,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pretokenized-lines" => Ok(CorpusFormat::PretokenizedLines),
            "token-json-lines" => Ok(CorpusFormat::TokenJsonLines),
            other => Err(Error::invalid(format!(
                "unknown corpus format {other:?} (expected pretokenized-lines or token-json-lines)"
            ))),
        }
    }
}

impl fmt::Display for CorpusFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusFormat::PretokenizedLines => write!(f, "pretokenized-lines"),
            CorpusFormat::TokenJsonLines => write!(f, "token-json-lines"),
        }
    }
}

#[derive(Deserialize)]
struct JsonRecord {
    id: String,
    tokens: Vec<String>,
}

/// Read a corpus file, normalizing every token. Tokens that normalize to
/// empty are dropped; texts whose tokens all normalize to empty are dropped
/// and counted. An input that yields no texts at all is an error.
pub fn ingest_corpus(
    path: impl AsRef<Path>,
    format: CorpusFormat,
    rules: &NormalizationConfig,
) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);

    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "corpus".to_string());

    let mut texts = Vec::new();
    let mut dropped_texts = 0usize;
    let mut dropped_tokens = 0usize;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let (source_id, raw_tokens) = match format {
            CorpusFormat::PretokenizedLines => {
                let toks: Vec<String> = line.split(' ').map(str::to_owned).collect();
                (line_no.to_string(), toks)
            }
            CorpusFormat::TokenJsonLines => {
                let record: JsonRecord = serde_json::from_str(&line)
                    .map_err(|e| Error::parse(path, line_no, format!("malformed record: {e}")))?;
                (record.id, record.tokens)
            }
        };

        let mut tokens = Vec::with_capacity(raw_tokens.len());
        for raw in &raw_tokens {
            let norm = normalize_text(raw, rules);
            if norm.is_empty() {
                dropped_tokens += 1;
            } else {
                tokens.push(norm);
            }
        }
        if tokens.is_empty() {
            dropped_texts += 1;
        } else {
            texts.push(TokenizedText { source_id, tokens });
        }
    }

    if texts.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(Corpus {
        texts,
        label,
        dropped_texts,
        dropped_tokens,
    })
}

/// Write a corpus in token-json-lines format.
pub fn save_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for text in corpus.texts() {
        let record = serde_json::json!({ "id": text.source_id, "tokens": text.tokens });
        out.push_str(&record.to_string());
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Word-to-id map with occurrence counts.
///
/// Ids are dense `0..len()` and assigned in (count descending, word ascending)
/// order, so a vocabulary built from the same corpus is always identical.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, u32>,
    min_count: u64,
}

impl Vocabulary {
    fn from_entries(entries: Vec<(String, u64)>, min_count: u64) -> Self {
        let mut index = HashMap::with_capacity(entries.len());
        let mut words = Vec::with_capacity(entries.len());
        let mut counts = Vec::with_capacity(entries.len());
        for (id, (word, count)) in entries.into_iter().enumerate() {
            index.insert(word.clone(), id as u32);
            words.push(word);
            counts.push(count);
        }
        Vocabulary {
            words,
            counts,
            index,
            min_count,
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn id_of(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Iterate `(id, word, count)` in id order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, &str, u64)> {
        self.words
            .iter()
            .zip(self.counts.iter())
            .enumerate()
            .map(|(id, (w, &c))| (id as u32, w.as_str(), c))
    }
}

/// Count token occurrences over the whole corpus and keep the words whose
/// total count is strictly greater than `min_count`.
pub fn build_vocabulary(corpus: &Corpus, min_count: u64) -> Result<Vocabulary> {
    if corpus.texts().is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut tally: HashMap<&str, u64> = HashMap::new();
    for text in corpus.texts() {
        for token in &text.tokens {
            *tally.entry(token.as_str()).or_insert(0) += 1;
        }
    }
    let mut entries: Vec<(String, u64)> = tally
        .into_iter()
        .filter(|&(_, c)| c > min_count)
        .map(|(w, c)| (w.to_owned(), c))
        .collect();
    if entries.is_empty() {
        return Err(Error::EmptyVocabulary { min_count });
    }
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(Vocabulary::from_entries(entries, min_count))
}

/// Uniform random subset of `round(fraction * len)` words, without
/// replacement. Deterministic for a fixed seed (ChaCha8 keyed by `seed`);
/// surviving words keep their counts and are re-assigned dense ids in the
/// original id order.
pub fn sample_vocabulary(vocab: &Vocabulary, fraction: f64, seed: u64) -> Result<Vocabulary> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::invalid(format!(
            "sample fraction must be in (0, 1], got {fraction}"
        )));
    }
    let total = vocab.len();
    let target = (fraction * total as f64).round() as usize;
    if target < 1 {
        return Err(Error::invalid(format!(
            "sample of {fraction} * {total} words rounds to zero"
        )));
    }

    let mut ids: Vec<u32> = (0..total as u32).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Partial Fisher-Yates: the first `target` slots end up a uniform subset.
    for i in 0..target.min(total - 1) {
        let j = rng.gen_range(i..total);
        ids.swap(i, j);
    }
    let mut picked = ids[..target].to_vec();
    picked.sort_unstable();

    let entries = picked
        .into_iter()
        .map(|id| (vocab.word(id).to_owned(), vocab.count(id)))
        .collect();
    Ok(Vocabulary::from_entries(entries, vocab.min_count()))
}

/// Write a vocabulary as TSV: header `word\tid\tcount`, one row per word in
/// id order.
pub fn save_vocabulary(vocab: &Vocabulary, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = String::from("word\tid\tcount\n");
    for (id, word, count) in vocab.iter() {
        out.push_str(&format!("{word}\t{id}\t{count}\n"));
    }
    file.write_all(out.as_bytes())
        .map_err(|e| Error::io(path, e))
}

/// Read a vocabulary written by [`save_vocabulary`]. Ids must be dense and in
/// row order.
pub fn load_vocabulary(path: impl AsRef<Path>) -> Result<Vocabulary> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "missing header"))?;
    let header = header.map_err(|e| Error::io(path, e))?;
    if header != "word\tid\tcount" {
        return Err(Error::parse(path, 1, "expected header word\\tid\\tcount"));
    }

    let mut entries: Vec<(String, u64)> = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let mut parts = line.split('\t');
        let (word, id, count) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some(w), Some(i), Some(c), None) => (w, i, c),
            _ => return Err(Error::parse(path, line_no, "expected word\\tid\\tcount")),
        };
        let id: usize = id
            .parse()
            .map_err(|_| Error::parse(path, line_no, "id is not an integer"))?;
        if id != entries.len() {
            return Err(Error::parse(
                path,
                line_no,
                format!("non-contiguous id {id}, expected {}", entries.len()),
            ));
        }
        let count: u64 = count
            .parse()
            .map_err(|_| Error::parse(path, line_no, "count is not an integer"))?;
        if word.is_empty() {
            return Err(Error::parse(path, line_no, "empty word"));
        }
        entries.push((word.to_owned(), count));
    }
    if entries.is_empty() {
        return Err(Error::EmptyVocabulary { min_count: 0 });
    }
    let mut seen = HashMap::new();
    for (i, (w, _)) in entries.iter().enumerate() {
        if seen.insert(w.clone(), i).is_some() {
            return Err(Error::parse(path, i + 2, format!("duplicate word {w:?}")));
        }
    }
    Ok(Vocabulary::from_entries(entries, 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn text(tokens: &[&str]) -> TokenizedText {
        TokenizedText {
            source_id: "t".into(),
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn normalize_mixed_script() {
        let rules = NormalizationConfig::default();
        assert_eq!(normalize_text("ABC123中文!", &rules), "abc000中文");
        assert_eq!(normalize_text("中文", &rules), "中文");
        assert_eq!(normalize_text("Covid-19", &rules), "covid00");
        assert_eq!(normalize_text("👍", &rules), "");
        assert_eq!(normalize_text("a b", &rules), "ab");
    }

    #[test]
    fn normalize_fullwidth_digits() {
        let rules = NormalizationConfig::default();
        assert_eq!(normalize_text("１２３", &rules), "000");
    }

    #[test]
    fn extension_blocks_admit_rare_ideographs() {
        let base = NormalizationConfig::default();
        let ext = NormalizationConfig::with_extension_blocks();
        // U+3400 is in CJK Extension A.
        assert_eq!(normalize_text("\u{3400}", &base), "");
        assert_eq!(normalize_text("\u{3400}", &ext), "\u{3400}");
    }

    #[test]
    fn vocabulary_strict_threshold() {
        // 貓 occurs 4 times, 狗 3 times; "more than 3" keeps only 貓.
        let texts = vec![
            text(&["貓", "狗", "貓"]),
            text(&["狗", "貓", "狗"]),
            text(&["貓"]),
        ];
        let corpus = Corpus::from_texts("toy", texts).unwrap();
        let vocab = build_vocabulary(&corpus, 3).unwrap();
        assert_eq!(vocab.len(), 1);
        assert_eq!(vocab.word(0), "貓");
        assert_eq!(vocab.count(0), 4);
    }

    #[test]
    fn vocabulary_min_count_zero_keeps_everything() {
        let corpus = Corpus::from_texts("toy", vec![text(&["a", "b", "a"])]).unwrap();
        let vocab = build_vocabulary(&corpus, 0).unwrap();
        assert_eq!(vocab.len(), 2);
        // Token-level counting: two a's in one text count twice.
        assert_eq!(vocab.count(vocab.id_of("a").unwrap()), 2);
        assert_eq!(vocab.count(vocab.id_of("b").unwrap()), 1);
    }

    #[test]
    fn vocabulary_empty_after_filter() {
        let corpus = Corpus::from_texts("toy", vec![text(&["a"])]).unwrap();
        match build_vocabulary(&corpus, 3) {
            Err(Error::EmptyVocabulary { min_count: 3 }) => {}
            other => panic!("expected empty vocabulary error, got {other:?}"),
        }
    }

    #[test]
    fn sample_full_fraction_is_identity() {
        let corpus =
            Corpus::from_texts("toy", vec![text(&["a", "b", "c", "a", "b", "c"])]).unwrap();
        let vocab = build_vocabulary(&corpus, 0).unwrap();
        let sampled = sample_vocabulary(&vocab, 1.0, 7).unwrap();
        assert_eq!(sampled.len(), vocab.len());
        let mut a: Vec<_> = vocab.words().to_vec();
        let mut b: Vec<_> = sampled.words().to_vec();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    #[test]
    fn sample_exact_size_and_determinism() {
        let texts: Vec<TokenizedText> = (0..100)
            .map(|i| text(&[format!("w{i}").as_str()]))
            .collect();
        let corpus = Corpus::from_texts("toy", texts).unwrap();
        let vocab = build_vocabulary(&corpus, 0).unwrap();
        assert_eq!(vocab.len(), 100);
        let s1 = sample_vocabulary(&vocab, 0.1, 99).unwrap();
        let s2 = sample_vocabulary(&vocab, 0.1, 99).unwrap();
        assert_eq!(s1.len(), 10);
        assert_eq!(s1.words(), s2.words());
        assert_eq!(s1.counts(), s2.counts());
        let s3 = sample_vocabulary(&vocab, 0.1, 100).unwrap();
        assert!(s1.words() != s3.words(), "different seeds should differ");
    }

    #[test]
    fn ingest_pretokenized() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.txt");
        std::fs::write(&path, "我 喜歡 貓\n貓 可愛\n").unwrap();
        let corpus = ingest_corpus(
            &path,
            CorpusFormat::PretokenizedLines,
            &NormalizationConfig::default(),
        )
        .unwrap();
        assert_eq!(corpus.texts().len(), 2);
        assert_eq!(corpus.texts()[0].tokens.len(), 3);
        assert_eq!(corpus.texts()[1].tokens.len(), 2);
    }

    #[test]
    fn ingest_empty_file_is_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.txt");
        std::fs::write(&path, "").unwrap();
        match ingest_corpus(
            &path,
            CorpusFormat::PretokenizedLines,
            &NormalizationConfig::default(),
        ) {
            Err(Error::EmptyCorpus) => {}
            other => panic!("expected empty corpus error, got {other:?}"),
        }
    }

    #[test]
    fn ingest_drops_all_punctuation_text() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.txt");
        std::fs::write(&path, "!!! ???\n中文 abc\n").unwrap();
        let corpus = ingest_corpus(
            &path,
            CorpusFormat::PretokenizedLines,
            &NormalizationConfig::default(),
        )
        .unwrap();
        assert_eq!(corpus.texts().len(), 1);
        assert_eq!(corpus.dropped_texts(), 1);
        assert_eq!(corpus.dropped_tokens(), 2);
    }

    #[test]
    fn ingest_json_lines_and_malformed_record() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        std::fs::write(
            &path,
            "{\"id\":\"p1\",\"tokens\":[\"中文\",\"ABC\"]}\nnot json\n",
        )
        .unwrap();
        match ingest_corpus(
            &path,
            CorpusFormat::TokenJsonLines,
            &NormalizationConfig::default(),
        ) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error naming line 2, got {other:?}"),
        }
        std::fs::write(&path, "{\"id\":\"p1\",\"tokens\":[\"中文\",\"ABC\"]}\n").unwrap();
        let corpus = ingest_corpus(
            &path,
            CorpusFormat::TokenJsonLines,
            &NormalizationConfig::default(),
        )
        .unwrap();
        assert_eq!(corpus.texts()[0].source_id, "p1");
        assert_eq!(corpus.texts()[0].tokens, vec!["中文", "abc"]);
    }

    #[test]
    fn vocabulary_tsv_round_trip() {
        let corpus =
            Corpus::from_texts("toy", vec![text(&["貓", "貓", "狗", "魚", "魚", "魚"])]).unwrap();
        let vocab = build_vocabulary(&corpus, 0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.tsv");
        save_vocabulary(&vocab, &path).unwrap();
        let loaded = load_vocabulary(&path).unwrap();
        assert_eq!(loaded.words(), vocab.words());
        assert_eq!(loaded.counts(), vocab.counts());
    }
}
