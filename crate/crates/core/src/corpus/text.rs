//! Rule-based sentence splitting and tokenization.
//!
//! A boundary is a run of terminal punctuation (`.`, `!`, `?`, optionally
//! followed by closing quotes or brackets), then whitespace, then a sentence
//! start: an uppercase letter or a digit, optionally behind opening quotes or
//! brackets. Periods that end a known abbreviation or a single-letter initial
//! never mark a boundary.

use std::sync::LazyLock;

use regex::Regex;

const TERMINALS: &[char] = &['.', '!', '?'];
const CLOSERS: &[char] = &['"', '\'', '\u{201d}', '\u{2019}', ')', ']', '.', '!', '?'];
const OPENERS: &[char] = &['"', '\'', '\u{201c}', '\u{2018}', '(', '['];

/// Lowercased, period-terminated forms that do not end a sentence.
const ABBREVIATIONS: &[&str] = &[
    "mr.", "mrs.", "ms.", "dr.", "prof.", "sr.", "jr.", "st.", "mt.", "ft.", "gen.", "gov.",
    "sen.", "rep.", "rev.", "col.", "lt.", "sgt.", "capt.", "cmdr.", "adm.", "pres.", "supt.",
    "u.s.", "u.k.", "u.n.", "e.u.", "d.c.", "inc.", "corp.", "ltd.", "co.", "bros.", "vs.",
    "etc.", "e.g.", "i.e.", "approx.", "est.", "dept.", "univ.", "jan.",
    "feb.", "mar.", "apr.", "jun.", "jul.", "aug.", "sep.", "sept.", "oct.", "nov.", "dec.",
    "a.m.", "p.m.",
];

/// Abbreviations that only bind when a number follows ("No. 5").
const NUMERIC_ABBREVIATIONS: &[&str] = &["no.", "nos.", "vol.", "pp."];

static EDGE_PUNCTUATION: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\p{P}+|\p{P}+$").expect("static pattern"));

/// Splits raw text into trimmed sentence strings, preserving order.
pub fn split_sentences(text: &str) -> Vec<String> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut sentences = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;

    while i < chars.len() {
        let (_, c) = chars[i];
        if !TERMINALS.contains(&c) {
            i += 1;
            continue;
        }
        let terminal = i;
        let mut end = i + 1;
        while end < chars.len() && CLOSERS.contains(&chars[end].1) {
            end += 1;
        }
        if end >= chars.len() || !chars[end].1.is_whitespace() {
            i = end;
            continue;
        }
        let mut next = end;
        while next < chars.len() && chars[next].1.is_whitespace() {
            next += 1;
        }
        if next >= chars.len() {
            break;
        }
        let mut probe = next;
        while probe < chars.len() && OPENERS.contains(&chars[probe].1) {
            probe += 1;
        }
        let starts_sentence = chars
            .get(probe)
            .is_some_and(|&(_, ch)| ch.is_uppercase() || ch.is_ascii_digit());
        let before_digit = chars.get(probe).is_some_and(|&(_, ch)| ch.is_ascii_digit());
        let abbreviated =
            c == '.' && ends_with_abbreviation(text, start, chars[terminal].0, before_digit);
        if starts_sentence && !abbreviated {
            let cut = chars[end].0;
            push_trimmed(&mut sentences, &text[start..cut]);
            start = chars[next].0;
        }
        i = next;
    }
    push_trimmed(&mut sentences, &text[start..]);
    sentences
}

fn push_trimmed(out: &mut Vec<String>, piece: &str) {
    let piece = piece.trim();
    if !piece.is_empty() {
        out.push(piece.to_string());
    }
}

/// `period` is the byte offset of a `.` inside `text[start..]`.
fn ends_with_abbreviation(text: &str, start: usize, period: usize, before_digit: bool) -> bool {
    let head = &text[start..period];
    let word_start = head
        .rfind(char::is_whitespace)
        .map(|p| p + head[p..].chars().next().map_or(1, char::len_utf8))
        .unwrap_or(0);
    let word = head[word_start..].trim_start_matches(OPENERS);
    if word.is_empty() {
        return false;
    }
    let mut candidate = word.to_lowercase();
    candidate.push('.');
    if ABBREVIATIONS.contains(&candidate.as_str())
        || (before_digit && NUMERIC_ABBREVIATIONS.contains(&candidate.as_str()))
    {
        return true;
    }
    let mut letters = word.chars();
    // Single-letter initial such as the "J" in "J. Smith".
    if let (Some(first), None) = (letters.next(), letters.next()) {
        if first.is_uppercase() {
            return true;
        }
    }
    // Dotted acronyms like "N.Y" or "a.m" (the final period is the terminal we are looking at).
    word.contains('.')
        && word
            .split('.')
            .all(|seg| !seg.is_empty() && seg.chars().count() <= 2 && seg.chars().all(char::is_alphabetic))
}

/// Whitespace tokenization with edge punctuation stripped and case folded.
///
/// Symbols such as `$` or `%` are not punctuation and stay attached.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|raw| {
            let stripped = EDGE_PUNCTUATION.replace_all(raw, "");
            if stripped.is_empty() {
                None
            } else {
                Some(stripped.to_lowercase())
            }
        })
        .collect()
}

/// Tokens with edge punctuation stripped but original casing kept.
pub(crate) fn surface_words(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|raw| {
            let stripped = EDGE_PUNCTUATION.replace_all(raw, "");
            (!stripped.is_empty()).then(|| stripped.into_owned())
        })
        .collect()
}
