//! Bug-summary vectorization: tokenization, vocabulary construction, and
//! smoothed TF-IDF weighting with L2 row normalization.
//!
//! Tokens are the ASCII-alphanumeric runs of the Unicode-lowercased text,
//! at least two characters long, minus the stop list below. `doesn't` thus
//! tokenizes as `doesn` (the orphaned `t` falls to the length rule), and
//! domain terms like `s3a` survive intact. No stemming is applied; terms
//! stay in surface form.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::scalar::{real_count, Real};

#[derive(Debug, Error)]
pub enum TextvecError {
    #[error("empty vocabulary")]
    EmptyVocabulary,
}

/// The fixed English stop list shipped with the tool: the classic 318-word
/// list popularized by scikit-learn's `ENGLISH_STOP_WORDS` (including its
/// historical `fify` typo), frozen here for reproducibility.
pub const STOP_WORDS: &[&str] = &[
    "a",
    "about",
    "above",
    "across",
    "after",
    "afterwards",
    "again",
    "against",
    "all",
    "almost",
    "alone",
    "along",
    "already",
    "also",
    "although",
    "always",
    "am",
    "among",
    "amongst",
    "amoungst",
    "amount",
    "an",
    "and",
    "another",
    "any",
    "anyhow",
    "anyone",
    "anything",
    "anyway",
    "anywhere",
    "are",
    "around",
    "as",
    "at",
    "back",
    "be",
    "became",
    "because",
    "become",
    "becomes",
    "becoming",
    "been",
    "before",
    "beforehand",
    "behind",
    "being",
    "below",
    "beside",
    "besides",
    "between",
    "beyond",
    "bill",
    "both",
    "bottom",
    "but",
    "by",
    "call",
    "can",
    "cannot",
    "cant",
    "co",
    "con",
    "could",
    "couldnt",
    "cry",
    "de",
    "describe",
    "detail",
    "do",
    "done",
    "down",
    "due",
    "during",
    "each",
    "eg",
    "eight",
    "either",
    "eleven",
    "else",
    "elsewhere",
    "empty",
    "enough",
    "etc",
    "even",
    "ever",
    "every",
    "everyone",
    "everything",
    "everywhere",
    "except",
    "few",
    "fifteen",
    "fify",
    "fill",
    "find",
    "fire",
    "first",
    "five",
    "for",
    "former",
    "formerly",
    "forty",
    "found",
    "four",
    "from",
    "front",
    "full",
    "further",
    "get",
    "give",
    "go",
    "had",
    "has",
    "hasnt",
    "have",
    "he",
    "hence",
    "her",
    "here",
    "hereafter",
    "hereby",
    "herein",
    "hereupon",
    "hers",
    "herself",
    "him",
    "himself",
    "his",
    "how",
    "however",
    "hundred",
    "i",
    "ie",
    "if",
    "in",
    "inc",
    "indeed",
    "interest",
    "into",
    "is",
    "it",
    "its",
    "itself",
    "keep",
    "last",
    "latter",
    "latterly",
    "least",
    "less",
    "ltd",
    "made",
    "many",
    "may",
    "me",
    "meanwhile",
    "might",
    "mill",
    "mine",
    "more",
    "moreover",
    "most",
    "mostly",
    "move",
    "much",
    "must",
    "my",
    "myself",
    "name",
    "namely",
    "neither",
    "never",
    "nevertheless",
    "next",
    "nine",
    "no",
    "nobody",
    "none",
    "noone",
    "nor",
    "not",
    "nothing",
    "now",
    "nowhere",
    "of",
    "off",
    "often",
    "on",
    "once",
    "one",
    "only",
    "onto",
    "or",
    "other",
    "others",
    "otherwise",
    "our",
    "ours",
    "ourselves",
    "out",
    "over",
    "own",
    "part",
    "per",
    "perhaps",
    "please",
    "put",
    "rather",
    "re",
    "same",
    "see",
    "seem",
    "seemed",
    "seeming",
    "seems",
    "serious",
    "several",
    "she",
    "should",
    "show",
    "side",
    "since",
    "sincere",
    "six",
    "sixty",
    "so",
    "some",
    "somehow",
    "someone",
    "something",
    "sometime",
    "sometimes",
    "somewhere",
    "still",
    "such",
    "system",
    "take",
    "ten",
    "than",
    "that",
    "the",
    "their",
    "them",
    "themselves",
    "then",
    "thence",
    "there",
    "thereafter",
    "thereby",
    "therefore",
    "therein",
    "thereupon",
    "these",
    "they",
    "thick",
    "thin",
    "third",
    "this",
    "those",
    "though",
    "three",
    "through",
    "throughout",
    "thru",
    "thus",
    "to",
    "together",
    "too",
    "top",
    "toward",
    "towards",
    "twelve",
    "twenty",
    "two",
    "un",
    "under",
    "until",
    "up",
    "upon",
    "us",
    "very",
    "via",
    "was",
    "we",
    "well",
    "were",
    "what",
    "whatever",
    "when",
    "whence",
    "whenever",
    "where",
    "whereafter",
    "whereas",
    "whereby",
    "wherein",
    "whereupon",
    "wherever",
    "whether",
    "which",
    "while",
    "whither",
    "who",
    "whoever",
    "whole",
    "whom",
    "whose",
    "why",
    "will",
    "with",
    "within",
    "without",
    "would",
    "yet",
    "you",
    "your",
    "yours",
    "yourself",
    "yourselves",
];

fn is_stop_word(token: &str) -> bool {
    STOP_WORDS.binary_search(&token).is_ok()
}

/// Splits a summary into tokens.
///
/// Lowercases with full Unicode folding, keeps ASCII-alphanumeric runs,
/// drops fragments shorter than two characters and stop-list terms. Empty
/// or all-separator input yields an empty list.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let flush = |current: &mut String, tokens: &mut Vec<String>| {
        if current.len() >= 2 && !is_stop_word(current) {
            tokens.push(std::mem::take(current));
        } else {
            current.clear();
        }
    };
    for ch in text.chars() {
        for folded in ch.to_lowercase() {
            if folded.is_ascii_alphanumeric() {
                current.push(folded);
            } else {
                flush(&mut current, &mut tokens);
            }
        }
    }
    flush(&mut current, &mut tokens);
    tokens
}

/// The term set of a corpus: lexicographically ordered terms, their column
/// indices, and per-term document frequencies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    df: Vec<usize>,
    n_docs: usize,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term(&self, index: usize) -> &str {
        &self.terms[index]
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    /// Number of documents containing the term at least once.
    pub fn df(&self, index: usize) -> usize {
        self.df[index]
    }

    /// Size of the corpus the vocabulary was built from.
    pub fn n_docs(&self) -> usize {
        self.n_docs
    }
}

/// Collects the sorted term union of a tokenized corpus with document
/// frequencies. Errors when no document contributes a token.
pub fn build_vocabulary(corpus: &[Vec<String>]) -> Result<Vocabulary, TextvecError> {
    let mut df_map: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in corpus {
        let mut seen: Vec<&str> = doc.iter().map(String::as_str).collect();
        seen.sort_unstable();
        seen.dedup();
        for term in seen {
            *df_map.entry(term).or_insert(0) += 1;
        }
    }
    if df_map.is_empty() {
        return Err(TextvecError::EmptyVocabulary);
    }
    let terms: Vec<String> = df_map.keys().map(|t| t.to_string()).collect();
    let df: Vec<usize> = df_map.values().copied().collect();
    let index = terms
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();
    Ok(Vocabulary {
        terms,
        index,
        df,
        n_docs: corpus.len(),
    })
}

/// Sparse document-by-term matrix of TF-IDF weights.
///
/// Weights are `tf * (ln((1 + N) / (1 + df)) + 1)` with raw term counts for
/// `tf`, then each non-empty row is scaled to unit Euclidean norm. Stored
/// entries are strictly positive; absent entries are exactly zero. Empty
/// documents keep their (all-zero) row.
#[derive(Debug, Clone, PartialEq)]
pub struct DocTermMatrix<T> {
    vocabulary: Vocabulary,
    rows: Vec<Vec<(usize, T)>>,
}

impl<T: Real> DocTermMatrix<T> {
    pub fn n_docs(&self) -> usize {
        self.rows.len()
    }

    pub fn n_terms(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    /// Sparse row `i` as `(column, weight)` pairs in column order.
    pub fn row(&self, i: usize) -> &[(usize, T)] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<(usize, T)>] {
        &self.rows
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut dense = vec![vec![T::zero(); self.n_terms()]; self.n_docs()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, w) in row {
                dense[i][j] = w;
            }
        }
        dense
    }

    /// Debug dump as `{"terms": [...], "rows": [[[col, weight], ...], ...]}`
    /// with weights at full precision.
    pub fn to_debug_json(&self) -> String {
        #[derive(Serialize)]
        struct Dump<'a> {
            terms: &'a [String],
            rows: Vec<Vec<(usize, f64)>>,
        }
        let rows = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&(j, w)| (j, w.to_f64().unwrap_or(f64::NAN)))
                    .collect()
            })
            .collect();
        serde_json::to_string_pretty(&Dump {
            terms: self.vocabulary.terms(),
            rows,
        })
        .expect("dump serialization cannot fail")
    }
}

/// Builds the TF-IDF matrix of `corpus` against `vocab`.
///
/// `vocab` must have been built from this corpus or a superset of it;
/// tokens missing from the vocabulary are ignored.
pub fn tfidf_matrix<T: Real>(corpus: &[Vec<String>], vocab: &Vocabulary) -> DocTermMatrix<T> {
    let one = T::one();
    let n: T = real_count(vocab.n_docs());
    let idf: Vec<T> = (0..vocab.len())
        .map(|j| ((one + n) / (one + real_count(vocab.df(j)))).ln() + one)
        .collect();

    let rows = corpus
        .iter()
        .map(|doc| {
            let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
            for token in doc {
                if let Some(j) = vocab.index_of(token) {
                    *counts.entry(j).or_insert(0) += 1;
                }
            }
            let mut row: Vec<(usize, T)> = counts
                .into_iter()
                .map(|(j, tf)| (j, real_count::<T>(tf) * idf[j]))
                .collect();
            let norm = row
                .iter()
                .fold(T::zero(), |acc, &(_, w)| acc + w * w)
                .sqrt();
            if norm > T::zero() {
                for entry in &mut row {
                    entry.1 = entry.1 / norm;
                }
            }
            row
        })
        .collect();

    DocTermMatrix {
        vocabulary: vocab.clone(),
        rows,
    }
}
