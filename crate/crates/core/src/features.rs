//! Parser-free lexical and surface features computed from raw text.
//!
//! Only the features that need no tagger or parser are computed here:
//! type-token ratio and its four variants, average characters and syllables
//! per word, and mean sentence length. Everything else is ingested through
//! the feature CSV.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stable names of the columns produced by [`extract_feature_row`], in order.
pub const FEATURE_NAMES: [&str; 8] = [
    "ttr",
    "corrected_ttr",
    "root_ttr",
    "log_ttr",
    "uber",
    "num_char",
    "num_syll",
    "mean_sentence_length",
];

/// Value reported for the Uber index when every token is distinct.
pub const DEFAULT_UBER_CAP: f64 = 100.0;

const ABBREVIATIONS: &[&str] = &[
    "dr.", "mr.", "mrs.", "ms.", "st.", "jr.", "sr.", "prof.", "mt.", "vs.", "etc.", "e.g.", "i.e.",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedDocument {
    sentences: Vec<Vec<String>>,
    type_count: usize,
}

impl TokenizedDocument {
    pub fn sentences(&self) -> &[Vec<String>] {
        &self.sentences
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.sentences.iter().flatten().map(String::as_str)
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }

    pub fn type_count(&self) -> usize {
        self.type_count
    }

    pub fn sentence_count(&self) -> usize {
        self.sentences.len()
    }
}

/// Splits text into sentences of lowercased word tokens.
///
/// Tokens are whitespace-separated with leading and trailing
/// non-alphanumeric characters removed. A sentence ends after a token whose
/// raw form ends in `.`, `!` or `?` (closing quotes and brackets ignored),
/// unless that token is a known abbreviation such as `Dr.`.
pub fn tokenize(text: &str) -> Result<TokenizedDocument> {
    if text.trim().is_empty() {
        return Err(Error::data("cannot tokenize empty text"));
    }
    let mut sentences = Vec::new();
    let mut current = Vec::new();
    for raw in text.split_whitespace() {
        let word: String = raw
            .trim_matches(|c: char| !c.is_alphanumeric())
            .to_lowercase();
        let closes = ends_sentence(raw);
        if !word.is_empty() {
            current.push(word);
        }
        if closes && !current.is_empty() {
            sentences.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    if sentences.is_empty() {
        return Err(Error::data("text contains no word tokens"));
    }
    let mut types: Vec<&str> = sentences.iter().flatten().map(String::as_str).collect();
    types.sort_unstable();
    types.dedup();
    let type_count = types.len();
    Ok(TokenizedDocument {
        sentences,
        type_count,
    })
}

fn ends_sentence(raw: &str) -> bool {
    let trimmed = raw.trim_end_matches(['"', '\'', ')', ']', '}', '”', '’']);
    if !trimmed.ends_with(['.', '!', '?']) {
        return false;
    }
    let lower = trimmed.to_lowercase();
    !ABBREVIATIONS.contains(&lower.as_str())
}

/// Type-token ratio family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LexicalRichness {
    pub ttr: f64,
    pub corrected_ttr: f64,
    pub root_ttr: f64,
    pub log_ttr: f64,
    pub uber: f64,
}

/// TTR = V/N, RootTTR = V/√N, CorrectedTTR = V/√(2N), LogTTR = ln V / ln N
/// and Uber = (ln N)² / (ln N − ln V).
///
/// When every token is distinct the Uber denominator vanishes and
/// `uber_cap` is reported instead.
pub fn lexical_richness(doc: &TokenizedDocument, uber_cap: f64) -> Result<LexicalRichness> {
    let n = doc.token_count();
    let v = doc.type_count();
    if n < 2 {
        return Err(Error::data(format!(
            "lexical richness needs at least 2 tokens, got {n}"
        )));
    }
    let (nf, vf) = (n as f64, v as f64);
    let uber = if v == n {
        log::warn!("all {n} tokens distinct; Uber index capped at {uber_cap}");
        uber_cap
    } else {
        nf.ln().powi(2) / (nf.ln() - vf.ln())
    };
    Ok(LexicalRichness {
        ttr: vf / nf,
        corrected_ttr: vf / (2.0 * nf).sqrt(),
        root_ttr: vf / nf.sqrt(),
        log_ttr: vf.ln() / nf.ln(),
        uber,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceStats {
    pub avg_chars_per_word: f64,
    pub avg_syllables_per_word: f64,
    pub mean_sentence_length: f64,
}

pub fn surface_stats(doc: &TokenizedDocument) -> Result<SurfaceStats> {
    let n = doc.token_count();
    if n == 0 || doc.sentence_count() == 0 {
        return Err(Error::data("surface statistics need at least one token"));
    }
    let chars: usize = doc.tokens().map(|t| t.chars().count()).sum();
    let syllables: usize = doc.tokens().map(count_syllables).sum();
    Ok(SurfaceStats {
        avg_chars_per_word: chars as f64 / n as f64,
        avg_syllables_per_word: syllables as f64 / n as f64,
        mean_sentence_length: n as f64 / doc.sentence_count() as f64,
    })
}

/// Vowel-group syllable estimate: maximal runs of `[aeiouy]`, minus one for
/// a trailing silent `e` when that leaves at least one, never below one.
pub fn count_syllables(word: &str) -> usize {
    let lower = word.to_lowercase();
    let mut groups = 0;
    let mut in_group = false;
    for c in lower.chars() {
        let vowel = matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y');
        if vowel && !in_group {
            groups += 1;
        }
        in_group = vowel;
    }
    if lower.ends_with('e') && groups > 1 {
        groups -= 1;
    }
    groups.max(1)
}

/// The eight computed features in [`FEATURE_NAMES`] order.
pub fn extract_feature_row(text: &str, uber_cap: f64) -> Result<Vec<(&'static str, f64)>> {
    let doc = tokenize(text)?;
    let lr = lexical_richness(&doc, uber_cap)?;
    let ss = surface_stats(&doc)?;
    let values = [
        lr.ttr,
        lr.corrected_ttr,
        lr.root_ttr,
        lr.log_ttr,
        lr.uber,
        ss.avg_chars_per_word,
        ss.avg_syllables_per_word,
        ss.mean_sentence_length,
    ];
    Ok(FEATURE_NAMES.iter().copied().zip(values).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn two_sentences() {
        let d = tokenize("Hello world. Bye.").unwrap();
        assert_eq!(d.sentence_count(), 2);
        assert_eq!(d.token_count(), 3);
        assert_eq!(d.sentences()[0], vec!["hello", "world"]);
    }

    #[test]
    fn no_punctuation() {
        let d = tokenize("a a b").unwrap();
        assert_eq!(
            (d.sentence_count(), d.token_count(), d.type_count()),
            (1, 3, 2)
        );
    }

    #[test]
    fn abbreviation_does_not_split() {
        let d = tokenize("Dr. Smith left.").unwrap();
        assert_eq!(d.sentence_count(), 1);
        assert_eq!(d.sentences()[0], vec!["dr", "smith", "left"]);
    }

    #[test]
    fn quoted_sentence_end() {
        let d = tokenize("He said \"stop!\" Then left").unwrap();
        assert_eq!(d.sentence_count(), 2);
    }

    #[test]
    fn empty_text() {
        assert!(tokenize("   \n").is_err());
        assert!(tokenize("... !!").is_err());
    }

    #[test]
    fn ttr_of_a_a_b() {
        let d = tokenize("a a b").unwrap();
        let lr = lexical_richness(&d, DEFAULT_UBER_CAP).unwrap();
        assert_abs_diff_eq!(lr.ttr, 2.0 / 3.0, epsilon = 1e-15);
        let expected_uber = 3f64.ln().powi(2) / (3f64.ln() - 2f64.ln());
        assert_abs_diff_eq!(lr.uber, expected_uber, epsilon = 1e-12);
    }

    #[test]
    fn distinct_tokens_cap_uber() {
        let d = tokenize("w x y z").unwrap();
        let lr = lexical_richness(&d, 42.0).unwrap();
        assert_eq!(lr.ttr, 1.0);
        assert_eq!(lr.uber, 42.0);
    }

    #[test]
    fn root_and_corrected_ttr() {
        // V = 4, N = 16
        let d = tokenize("a b c d a b c d a b c d a b c d").unwrap();
        let lr = lexical_richness(&d, DEFAULT_UBER_CAP).unwrap();
        assert_abs_diff_eq!(lr.root_ttr, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(lr.corrected_ttr, 4.0 / 32f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(lr.corrected_ttr, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn single_token_is_too_short() {
        let d = tokenize("word").unwrap();
        assert!(lexical_richness(&d, DEFAULT_UBER_CAP).is_err());
    }

    #[test]
    fn surface_of_to_be() {
        let d = tokenize("to be").unwrap();
        let s = surface_stats(&d).unwrap();
        assert_eq!(s.avg_chars_per_word, 2.0);
        assert_eq!(s.mean_sentence_length, 2.0);
        let one = tokenize("a").unwrap();
        assert_eq!(surface_stats(&one).unwrap().avg_chars_per_word, 1.0);
    }

    #[test]
    fn syllable_heuristic() {
        assert_eq!(count_syllables("strengths"), 1);
        assert_eq!(count_syllables("make"), 1);
        assert_eq!(count_syllables("the"), 1);
        assert_eq!(count_syllables("readability"), 5);
        assert_eq!(count_syllables("rhythm"), 1);
        assert_eq!(count_syllables("hmm"), 1);
    }

    #[test]
    fn feature_row_shape() {
        let row = extract_feature_row("a a b.", DEFAULT_UBER_CAP).unwrap();
        assert_eq!(row.len(), 8);
        let names: Vec<&str> = row.iter().map(|(n, _)| *n).collect();
        assert_eq!(names, FEATURE_NAMES);
        assert_abs_diff_eq!(row[0].1, 2.0 / 3.0, epsilon = 1e-15);
        assert_eq!(
            row,
            extract_feature_row("a a b.", DEFAULT_UBER_CAP).unwrap()
        );
        assert!(extract_feature_row("", DEFAULT_UBER_CAP).is_err());
    }

    fn text_strategy() -> impl Strategy<Value = String> {
        prop::collection::vec("[a-e]{1,6}[.!?]?", 2..40).prop_map(|w| w.join(" "))
    }

    proptest! {
        #[test]
        fn ttr_bounds_and_algebra(text in text_strategy()) {
            let d = tokenize(&text).unwrap();
            let lr = lexical_richness(&d, DEFAULT_UBER_CAP).unwrap();
            let n = d.token_count() as f64;
            prop_assert!(lr.ttr > 0.0 && lr.ttr <= 1.0);
            prop_assert!((lr.root_ttr - lr.ttr * n.sqrt()).abs() < 1e-12);
            prop_assert!((lr.corrected_ttr - lr.root_ttr / 2f64.sqrt()).abs() < 1e-12);
        }

        #[test]
        fn doubling_text(text in text_strategy()) {
            let once = tokenize(&text).unwrap();
            let twice = tokenize(&format!("{text} {text}")).unwrap();
            let s1 = surface_stats(&once).unwrap();
            let s2 = surface_stats(&twice).unwrap();
            prop_assert!((s1.avg_chars_per_word - s2.avg_chars_per_word).abs() < 1e-12);
            let t1 = lexical_richness(&once, DEFAULT_UBER_CAP).unwrap().ttr;
            let t2 = lexical_richness(&twice, DEFAULT_UBER_CAP).unwrap().ttr;
            prop_assert!(t2 <= t1);
        }
    }
}
