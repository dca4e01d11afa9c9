//! Coreference backends.
//!
//! A resolver receives the (possibly truncated) sentence list of a document
//! and returns mention clusters in sentence-local character offsets.

use crate::document::{CorefCluster, DocumentError, Mention, Sentence};

pub trait CorefResolver: Send + Sync {
    fn clusters(&self, sentences: &[Sentence]) -> Result<Vec<CorefCluster>, DocumentError>;

    /// Stable description used to key score caches.
    fn describe(&self) -> String;
}

/// Returns no clusters.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoCoref;

impl CorefResolver for NoCoref {
    fn clusters(&self, _sentences: &[Sentence]) -> Result<Vec<CorefCluster>, DocumentError> {
        Ok(Vec::new())
    }

    fn describe(&self) -> String {
        "none".to_string()
    }
}

/// Deterministic heuristic resolver for English.
///
/// Proper-name mentions are runs of capitalized words outside a stop list.
/// A name joins an earlier entity with the same surface, or whose last word
/// it equals ("Vunipola" after "Billy Vunipola"). Third-person singular
/// pronouns attach to the most recent entity with a compatible gender; the
/// first pronoun fixes that entity's gender. Plural and neuter pronouns are
/// left unresolved.
#[derive(Debug, Clone, Copy, Default)]
pub struct RuleCoref;

const STOP: &[&str] = &[
    "the",
    "a",
    "an",
    "this",
    "that",
    "these",
    "those",
    "there",
    "here",
    "it",
    "its",
    "he",
    "she",
    "they",
    "we",
    "i",
    "you",
    "his",
    "her",
    "their",
    "our",
    "my",
    "your",
    "in",
    "on",
    "at",
    "for",
    "but",
    "and",
    "or",
    "if",
    "when",
    "while",
    "after",
    "before",
    "as",
    "by",
    "with",
    "from",
    "of",
    "to",
    "however",
    "meanwhile",
    "also",
    "then",
    "so",
    "yet",
    "what",
    "who",
    "why",
    "how",
    "where",
    "which",
    "some",
    "many",
    "most",
    "all",
    "no",
    "not",
    "one",
    "two",
    "three",
    "monday",
    "tuesday",
    "wednesday",
    "thursday",
    "friday",
    "saturday",
    "sunday",
    "january",
    "february",
    "march",
    "april",
    "may",
    "june",
    "july",
    "august",
    "september",
    "october",
    "november",
    "december",
    "mr",
    "mrs",
    "ms",
    "dr",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Gender {
    Male,
    Female,
}

fn pronoun_gender(word: &str) -> Option<Gender> {
    match word.to_lowercase().as_str() {
        "he" | "him" | "his" | "himself" => Some(Gender::Male),
        "she" | "her" | "hers" | "herself" => Some(Gender::Female),
        _ => None,
    }
}

/// A word token with sentence-local char offsets.
#[derive(Debug)]
struct Word {
    start: usize,
    end: usize,
    text: String,
}

fn words(sentence: &str) -> Vec<Word> {
    let chars: Vec<char> = sentence.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let part = |c: char| c.is_alphanumeric() || c == '\'' || c == '’' || c == '-';
    while i < chars.len() {
        if !chars[i].is_alphanumeric() {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && part(chars[i]) {
            i += 1;
        }
        let mut end = i;
        // trailing apostrophes/hyphens and possessive 's are not part of the name
        while end > start && !chars[end - 1].is_alphanumeric() {
            end -= 1;
        }
        if end - start > 2 {
            let tail: String = chars[end - 2..end].iter().collect();
            if tail == "'s" || tail == "’s" {
                end -= 2;
            }
        }
        out.push(Word {
            start,
            end,
            text: chars[start..end].iter().collect(),
        });
    }
    out
}

fn is_name_word(w: &Word) -> bool {
    let first = w.text.chars().next();
    matches!(first, Some(c) if c.is_uppercase()) && !STOP.contains(&w.text.to_lowercase().as_str())
}

struct Entity {
    name: String,
    last_word: String,
    gender: Option<Gender>,
    mentions: Vec<Mention>,
    last_seen: (usize, usize),
}

impl CorefResolver for RuleCoref {
    fn describe(&self) -> String {
        "rule".to_string()
    }

    fn clusters(&self, sentences: &[Sentence]) -> Result<Vec<CorefCluster>, DocumentError> {
        let mut entities: Vec<Entity> = Vec::new();
        for sentence in sentences {
            let ws = words(&sentence.text);
            let mut i = 0;
            while i < ws.len() {
                if let Some(gender) = pronoun_gender(&ws[i].text) {
                    let pos = (sentence.index, ws[i].start);
                    let target = entities
                        .iter_mut()
                        .filter(|e| e.gender.is_none_or(|g| g == gender))
                        .max_by_key(|e| e.last_seen);
                    if let Some(e) = target {
                        e.gender = Some(gender);
                        e.last_seen = pos;
                        e.mentions.push(Mention {
                            sentence_index: sentence.index,
                            start: ws[i].start,
                            end: ws[i].end,
                            surface: ws[i].text.clone(),
                        });
                    }
                    i += 1;
                    continue;
                }
                if !is_name_word(&ws[i]) {
                    i += 1;
                    continue;
                }
                // extend over adjacent capitalized words separated by one space
                let first = i;
                while i + 1 < ws.len()
                    && is_name_word(&ws[i + 1])
                    && ws[i + 1].start == ws[i].end + 1
                {
                    i += 1;
                }
                let (start, end) = (ws[first].start, ws[i].end);
                let surface: String = sentence
                    .text
                    .chars()
                    .skip(start)
                    .take(end - start)
                    .collect();
                let last_word = ws[i].text.clone();
                i += 1;
                let mention = Mention {
                    sentence_index: sentence.index,
                    start,
                    end,
                    surface: surface.clone(),
                };
                let pos = (sentence.index, start);
                let existing = entities
                    .iter_mut()
                    .find(|e| e.name == surface || (first == i - 1 && e.last_word == surface));
                match existing {
                    Some(e) => {
                        e.mentions.push(mention);
                        e.last_seen = pos;
                    }
                    None => entities.push(Entity {
                        name: surface,
                        last_word,
                        gender: None,
                        mentions: vec![mention],
                        last_seen: pos,
                    }),
                }
            }
        }
        Ok(entities
            .into_iter()
            .filter(|e| e.mentions.len() >= 2)
            .map(|e| CorefCluster {
                mentions: e.mentions,
            })
            .collect())
    }
}
