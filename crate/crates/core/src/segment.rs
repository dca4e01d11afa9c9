//! Sentence segmentation.

use std::collections::HashSet;

use crate::document::{DocumentError, Sentence};

pub trait Segmenter: Send + Sync {
    /// Split `text` into sentences with character offsets into `text`.
    fn segment(&self, text: &str) -> Result<Vec<Sentence>, DocumentError>;
}

const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "mt", "ft", "gen", "col", "lt", "capt",
    "sgt", "cpt", "maj", "gov", "sen", "rep", "rev", "hon", "pres", "supt", "insp", "det", "no",
    "nos", "vol", "vols", "pp", "fig", "figs", "eq", "eqs", "ch", "sec", "art", "dept", "est",
    "approx", "inc", "ltd", "co", "corp", "bros", "assn", "univ", "vs", "etc", "al", "cf", "e.g",
    "i.e", "a.m", "p.m", "u.s", "u.k", "u.n", "u.s.a", "d.c", "ph.d", "jan", "feb", "mar", "apr",
    "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec",
];

/// Terminal punctuation plus an abbreviation list.
///
/// A boundary follows a run of `.`, `!`, `?` or `…` (plus any closing quotes
/// or brackets) when the next character is whitespace or end of text. A lone
/// `.` after a listed abbreviation is not a boundary. A blank line always
/// ends a sentence. Sentences are trimmed of surrounding whitespace.
#[derive(Debug, Clone)]
pub struct RuleSegmenter {
    abbreviations: HashSet<String>,
}

impl Default for RuleSegmenter {
    fn default() -> Self {
        RuleSegmenter {
            abbreviations: ABBREVIATIONS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?' | '…')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '}' | '”' | '’' | '»')
}

fn is_opener(c: char) -> bool {
    matches!(c, '"' | '\'' | '(' | '[' | '{' | '“' | '‘' | '«')
}

impl RuleSegmenter {
    pub fn with_abbreviations<I, S>(extra: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut seg = RuleSegmenter::default();
        seg.abbreviations
            .extend(extra.into_iter().map(|s| s.into().to_lowercase()));
        seg
    }

    /// Is the `.` at char index `dot` closing a known abbreviation?
    fn is_abbreviation(&self, chars: &[char], dot: usize) -> bool {
        let mut start = dot;
        while start > 0 && !chars[start - 1].is_whitespace() {
            start -= 1;
        }
        while start < dot && is_opener(chars[start]) {
            start += 1;
        }
        if start == dot {
            return false;
        }
        let token: String = chars[start..dot].iter().collect::<String>().to_lowercase();
        self.abbreviations.contains(&token)
    }

    /// Char indices where a sentence ends (exclusive).
    fn boundaries(&self, chars: &[char]) -> Vec<usize> {
        let n = chars.len();
        let mut cuts = Vec::new();
        let mut i = 0;
        while i < n {
            let c = chars[i];
            if is_terminal(c) {
                let run_start = i;
                while i < n && is_terminal(chars[i]) {
                    i += 1;
                }
                let single_dot = i - run_start == 1 && chars[run_start] == '.';
                while i < n && is_closer(chars[i]) {
                    i += 1;
                }
                let at_gap = i == n || chars[i].is_whitespace();
                if at_gap && !(single_dot && self.is_abbreviation(chars, run_start)) {
                    cuts.push(i);
                }
                continue;
            }
            if c == '\n' {
                let mut j = i;
                let mut newlines = 0;
                while j < n && chars[j].is_whitespace() {
                    if chars[j] == '\n' {
                        newlines += 1;
                    }
                    j += 1;
                }
                if newlines >= 2 {
                    cuts.push(i);
                }
                i = j;
                continue;
            }
            i += 1;
        }
        cuts.push(n);
        cuts
    }
}

impl Segmenter for RuleSegmenter {
    fn segment(&self, text: &str) -> Result<Vec<Sentence>, DocumentError> {
        if text.trim().is_empty() {
            return Err(DocumentError::EmptyDocument);
        }
        let chars: Vec<char> = text.chars().collect();
        let mut out = Vec::new();
        let mut piece_start = 0;
        for cut in self.boundaries(&chars) {
            if cut <= piece_start {
                continue;
            }
            let mut s = piece_start;
            let mut e = cut;
            while s < e && chars[s].is_whitespace() {
                s += 1;
            }
            while e > s && chars[e - 1].is_whitespace() {
                e -= 1;
            }
            if s < e {
                out.push(Sentence {
                    index: out.len(),
                    start: s,
                    end: e,
                    text: chars[s..e].iter().collect(),
                });
            }
            piece_start = cut;
        }
        Ok(out)
    }
}

/// Segment with the default rule-based segmenter.
pub fn segment(text: &str) -> Result<Vec<Sentence>, DocumentError> {
    RuleSegmenter::default().segment(text)
}
