//! Deterministic text standardization applied before tokenization.
//!
//! Rules run in a fixed order: lowercase, URL removal, emoji removal,
//! leading-"rt" removal, collapsing of repeated punctuation, then
//! re-tokenization with single spaces between words and punctuation.
//! The output of `normalize` is a fixed point of `normalize`.

use chrono::{DateTime, Utc};

/// One raw social-media post prior to any processing.
#[derive(Debug, Clone, PartialEq)]
pub struct RawPost {
    pub text: String,
    pub timestamp: Option<DateTime<Utc>>,
    pub author: Option<String>,
}

/// Emoji blocks removed during normalization: Emoticons, Misc Symbols &
/// Pictographs, Transport & Map Symbols, Supplemental Symbols & Pictographs.
fn is_emoji(c: char) -> bool {
    matches!(c,
        '\u{1F600}'..='\u{1F64F}'
        | '\u{1F300}'..='\u{1F5FF}'
        | '\u{1F680}'..='\u{1F6FF}'
        | '\u{1F900}'..='\u{1F9FF}')
}

/// Variation selectors and the zero-width joiner, stripped when adjacent to
/// an emoji codepoint.
fn is_emoji_joiner(c: char) -> bool {
    matches!(c, '\u{FE0E}' | '\u{FE0F}' | '\u{200D}')
}

fn is_url_token(token: &str) -> bool {
    token.starts_with("www.") || token.contains("://")
}

fn strip_emoji(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    // A joiner/variation selector is deleted when any contiguous run of
    // joiners touching it also touches an emoji codepoint.
    let mut keep = vec![true; chars.len()];
    for (i, &c) in chars.iter().enumerate() {
        if is_emoji(c) {
            keep[i] = false;
        }
    }
    let mut i = 0;
    while i < chars.len() {
        if is_emoji_joiner(chars[i]) {
            let start = i;
            let mut end = i;
            while end + 1 < chars.len() && is_emoji_joiner(chars[end + 1]) {
                end += 1;
            }
            let prev_emoji = start > 0 && is_emoji(chars[start - 1]);
            let next_emoji = end + 1 < chars.len() && is_emoji(chars[end + 1]);
            if prev_emoji || next_emoji {
                for k in start..=end {
                    keep[k] = false;
                }
            }
            i = end + 1;
        } else {
            i += 1;
        }
    }
    chars
        .iter()
        .zip(keep)
        .filter_map(|(&c, k)| k.then_some(c))
        .collect()
}

/// Collapse maximal runs of one identical punctuation character to a single
/// occurrence ("!!!" becomes "!"; "?!" is left for the tokenizer to split).
fn collapse_punct_runs(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut prev: Option<char> = None;
    for c in text.chars() {
        if c.is_ascii_punctuation() && prev == Some(c) {
            continue;
        }
        out.push(c);
        prev = Some(c);
    }
    out
}

/// Split into word and punctuation tokens. Mentions and hashtags keep their
/// sigil attached; every other punctuation character becomes its own token.
fn retokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let chars: Vec<char> = text.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_whitespace() {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
        } else if c.is_ascii_punctuation() {
            let starts_mention = (c == '@' || c == '#')
                && current.is_empty()
                && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
            if starts_mention {
                current.push(c);
            } else {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
                tokens.push(c.to_string());
            }
        } else {
            current.push(c);
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Normalize one post. Returns `None` when nothing survives the pipeline.
pub fn normalize(text: &str) -> Option<String> {
    let lowered = text.to_lowercase();
    let no_urls: Vec<&str> = lowered
        .split_whitespace()
        .filter(|t| !is_url_token(t))
        .collect();
    let no_emoji = strip_emoji(&no_urls.join(" "));
    let collapsed = collapse_punct_runs(&no_emoji);
    let mut tokens = retokenize(&collapsed);
    while tokens.first().map(String::as_str) == Some("rt") {
        tokens.remove(0);
    }
    if tokens.is_empty() {
        None
    } else {
        Some(tokens.join(" "))
    }
}
