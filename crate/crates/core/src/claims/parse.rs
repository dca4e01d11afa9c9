use std::collections::HashSet;

use serde_json::Value;

use super::ClaimError;
use crate::document::Claim;
use crate::text::collapse_whitespace;

/// Parse extractor output into claims.
///
/// Accepts a JSON object with a string-array `claims` field. Text around the
/// outermost braces is ignored, and a `claims` array following a
/// single-quoted key (as in the prompt's example output) is recovered. As a
/// last resort every non-empty line ending in sentence punctuation becomes a
/// claim. Claims are whitespace-collapsed and deduplicated, keeping order.
pub fn parse_claims(raw: &str, summary_id: &str) -> Result<Vec<Claim>, ClaimError> {
    let texts = match structured(raw) {
        Some(texts) => texts,
        None => {
            let lines = line_claims(raw);
            if lines.is_empty() {
                return Err(ClaimError::MalformedClaimOutput {
                    summary_id: summary_id.to_string(),
                    excerpt: raw.chars().take(120).collect(),
                });
            }
            lines
        }
    };
    normalize(texts, summary_id)
}

/// Whitespace-collapse, drop empties, deduplicate, and index.
pub fn normalize<I, S>(texts: I, summary_id: &str) -> Result<Vec<Claim>, ClaimError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut seen = HashSet::new();
    let mut claims = Vec::new();
    for t in texts {
        let t = collapse_whitespace(t.as_ref());
        if t.is_empty() || !seen.insert(t.clone()) {
            continue;
        }
        claims.push(Claim::new(summary_id, claims.len(), t));
    }
    if claims.is_empty() {
        return Err(ClaimError::EmptyClaims {
            summary_id: summary_id.to_string(),
        });
    }
    Ok(claims)
}

fn claims_field(v: &Value) -> Option<Vec<String>> {
    v.as_object()?
        .get("claims")?
        .as_array()?
        .iter()
        .map(|c| c.as_str().map(str::to_string))
        .collect()
}

fn structured(raw: &str) -> Option<Vec<String>> {
    if let Ok(v) = serde_json::from_str::<Value>(raw.trim()) {
        if let Some(c) = claims_field(&v) {
            return Some(c);
        }
    }
    if let (Some(open), Some(close)) = (raw.find('{'), raw.rfind('}')) {
        if open < close {
            if let Ok(v) = serde_json::from_str::<Value>(&raw[open..=close]) {
                if let Some(c) = claims_field(&v) {
                    return Some(c);
                }
            }
        }
    }
    array_after_key(raw)
}

/// Find `'claims'` or `"claims"` followed by `:` and parse the JSON array
/// after it, ignoring whatever follows the array.
fn array_after_key(raw: &str) -> Option<Vec<String>> {
    for key in ["\"claims\"", "'claims'"] {
        let mut search = 0;
        while let Some(pos) = raw[search..].find(key) {
            let after = search + pos + key.len();
            search = after;
            let rest = raw[after..].trim_start();
            let Some(rest) = rest.strip_prefix(':') else {
                continue;
            };
            let rest = rest.trim_start();
            if !rest.starts_with('[') {
                continue;
            }
            let mut stream = serde_json::Deserializer::from_str(rest).into_iter::<Vec<String>>();
            if let Some(Ok(claims)) = stream.next() {
                return Some(claims);
            }
        }
    }
    None
}

fn line_claims(raw: &str) -> Vec<String> {
    raw.lines().filter_map(clean_line).collect()
}

fn clean_line(line: &str) -> Option<String> {
    let mut s = line.trim();
    // list markers: "-", "*", "•", "1.", "2)"
    for marker in ["- ", "* ", "• "] {
        if let Some(rest) = s.strip_prefix(marker) {
            s = rest.trim_start();
        }
    }
    let digits = s.chars().take_while(|c| c.is_ascii_digit()).count();
    if digits > 0 {
        let rest = &s[digits..];
        if let Some(r) = rest.strip_prefix(". ").or_else(|| rest.strip_prefix(") ")) {
            s = r.trim_start();
        }
    }
    let s = s
        .trim_start_matches(['[', '{', '"', '\''])
        .trim_end_matches([',', ']', '}'])
        .trim();
    let s = s.trim_matches(['"', '\'']).trim();
    if s.ends_with(['.', '!', '?']) && s.chars().any(char::is_alphanumeric) {
        Some(s.to_string())
    } else {
        None
    }
}
