//! Outcome text normalization: lowercase, split on anything that is not a
//! letter or digit, drop stop words and tokens made only of digits.
//!
//! Mixed tokens such as `3d` survive; only pure numbers are removed.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::FrameworkCatalog;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TextError {
    #[error("unsupported stop-word language `{0}`")]
    UnsupportedLanguage(String),
}

const STOPWORDS_EN: &str = include_str!("../data/stopwords_en_v1.txt");

/// Version tag of the vendored English list; recorded in run manifests.
pub const STOPWORDS_EN_VERSION: &str = "en-v1";

pub type StopWords = BTreeSet<String>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedDoc {
    pub lo_code: String,
    pub tokens: Vec<String>,
}

/// Parses a stop-word file: one word per line, `#` starts a comment line.
pub fn parse_stopwords(src: &str) -> StopWords {
    src.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

pub fn default_stopwords(language_tag: &str) -> Result<StopWords, TextError> {
    match language_tag {
        "en" => Ok(parse_stopwords(STOPWORDS_EN)),
        other => Err(TextError::UnsupportedLanguage(other.to_string())),
    }
}

pub fn normalize_text(raw: &str, stopwords: &StopWords) -> Vec<String> {
    raw.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .filter(|t| !t.chars().all(char::is_numeric))
        .filter(|t| !stopwords.contains(*t))
        .map(str::to_string)
        .collect()
}

pub fn tokenize_catalog(catalog: &FrameworkCatalog, stopwords: &StopWords) -> Vec<TokenizedDoc> {
    catalog
        .los()
        .iter()
        .map(|lo| TokenizedDoc {
            lo_code: lo.code.clone(),
            tokens: normalize_text(&lo.text, stopwords),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sw(words: &[&str]) -> StopWords {
        words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn drops_numbers_and_stopwords() {
        assert_eq!(
            normalize_text("Build 3 simulations of the water cycle", &sw(&["of", "the"])),
            vec!["build", "simulations", "water", "cycle"]
        );
    }

    #[test]
    fn empty_and_all_stopwords() {
        assert!(normalize_text("", &sw(&["the"])).is_empty());
        assert!(normalize_text("THE The the", &sw(&["the"])).is_empty());
    }

    #[test]
    fn keeps_mixed_alnum_and_splits_hyphens() {
        assert_eq!(
            normalize_text("Create 3D models; self-assess 2024 work.", &StopWords::new()),
            vec!["create", "3d", "models", "self", "assess", "work"]
        );
    }

    #[test]
    fn english_list() {
        let a = default_stopwords("en").unwrap();
        for w in ["the", "and", "of"] {
            assert!(a.contains(w));
        }
        assert!(!a.contains("computer"));
        assert_eq!(a, default_stopwords("en").unwrap());
        assert_eq!(
            default_stopwords("xx"),
            Err(TextError::UnsupportedLanguage("xx".into()))
        );
    }

    #[test]
    fn stopword_file_comments() {
        let s = parse_stopwords("# header\nthe\n\n  And \n#x\n");
        assert_eq!(s, sw(&["and", "the"]));
    }

    proptest! {
        #[test]
        fn idempotent(s in "\\PC{0,60}") {
            let stop = default_stopwords("en").unwrap();
            let once = normalize_text(&s, &stop);
            let twice = normalize_text(&once.join(" "), &stop);
            prop_assert_eq!(&twice, &once);
            for t in &once {
                prop_assert!(!t.is_empty());
                prop_assert!(t.chars().all(char::is_alphanumeric));
                prop_assert!(!t.chars().all(char::is_numeric));
                prop_assert!(!stop.contains(t));
                prop_assert_eq!(&t.to_lowercase(), t);
            }
        }
    }
}
