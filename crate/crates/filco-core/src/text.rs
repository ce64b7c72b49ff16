//! Deterministic text substrate: tokenization, answer normalization, and
//! rule-based sentence splitting. Every measure and metric in this crate
//! shares these functions, so changing them changes everything downstream;
//! the splitter in particular is locked by golden tests.

/// Tokens ending with one of these (letters and dots, lowercased) do not end
/// a sentence at their final period.
const ABBREVIATIONS: &[&str] = &[
    "mr.", "mrs.", "ms.", "dr.", "prof.", "sr.", "jr.", "st.", "etc.", "e.g.", "i.e.", "vs.",
    "u.s.", "u.k.", "no.", "vol.", "fig.", "al.",
];

/// Characters that may open a sentence besides an uppercase letter.
const OPENERS: &[char] = &['"', '\'', '(', '[', '\u{201C}', '\u{2018}'];

/// Closing characters absorbed into a sentence after its terminal punctuation.
const CLOSERS: &[char] = &['"', '\'', ')', ']', '\u{201D}', '\u{2019}'];

fn lowered(text: &str) -> impl Iterator<Item = char> + '_ {
    text.chars().flat_map(char::to_lowercase)
}

/// Lowercases, then splits into maximal runs of alphanumeric characters.
/// Punctuation and whitespace are boundaries and never appear in tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in lowered(text) {
        if c.is_alphanumeric() {
            current.push(c);
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Number of tokens `tokenize` would produce, without allocating them.
pub fn token_count(text: &str) -> usize {
    let mut count = 0;
    let mut in_token = false;
    for c in lowered(text) {
        if c.is_alphanumeric() {
            if !in_token {
                count += 1;
                in_token = true;
            }
        } else {
            in_token = false;
        }
    }
    count
}

/// Exact-match normalization: lowercase, strip punctuation, drop the
/// articles "a", "an", "the" as whole tokens, collapse whitespace.
pub fn normalize_answer(text: &str) -> String {
    let tokens = tokenize(text);
    let kept: Vec<&str> = tokens
        .iter()
        .map(String::as_str)
        .filter(|t| !matches!(*t, "a" | "an" | "the"))
        .collect();
    kept.join(" ")
}

/// A sentence located inside a larger text, as byte offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SentenceFragment {
    /// 0-based order within the text.
    pub index: usize,
    /// Byte offset of the first character.
    pub start: usize,
    /// Byte offset one past the last character.
    pub end: usize,
}

/// Splits text into sentences. A boundary is `.`, `!` or `?` (plus any
/// closing quotes/brackets), followed by whitespace and then an uppercase or
/// opening character. A `.` that completes an abbreviation from the stop
/// list is not a boundary. Fragments are trimmed of surrounding whitespace;
/// the bytes between consecutive fragments are always pure whitespace, so
/// fragments plus gaps reconstruct the input.
pub fn split_sentences(text: &str) -> Vec<SentenceFragment> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let len = chars.len();
    let mut fragments = Vec::new();

    let mut start = 0;
    while start < len && chars[start].1.is_whitespace() {
        start += 1;
    }
    if start == len {
        return fragments;
    }

    let mut i = start;
    while i < len {
        let c = chars[i].1;
        if matches!(c, '.' | '!' | '?') && !(c == '.' && is_abbreviation_end(&chars, i)) {
            // absorb closing quotes/brackets into the sentence
            let mut after = i + 1;
            while after < len && CLOSERS.contains(&chars[after].1) {
                after += 1;
            }
            let mut next = after;
            while next < len && chars[next].1.is_whitespace() {
                next += 1;
            }
            let has_gap = next > after;
            if has_gap && next < len && opens_sentence(chars[next].1) {
                fragments.push(SentenceFragment {
                    index: fragments.len(),
                    start: chars[start].0,
                    end: byte_end(&chars, after - 1),
                });
                start = next;
                i = next;
                continue;
            }
        }
        i += 1;
    }

    // trailing fragment, trimmed of whitespace on the right
    let mut last = len;
    while last > start && chars[last - 1].1.is_whitespace() {
        last -= 1;
    }
    if last > start {
        fragments.push(SentenceFragment {
            index: fragments.len(),
            start: chars[start].0,
            end: byte_end(&chars, last - 1),
        });
    }
    fragments
}

fn opens_sentence(c: char) -> bool {
    c.is_uppercase() || OPENERS.contains(&c)
}

fn byte_end(chars: &[(usize, char)], idx: usize) -> usize {
    let (pos, c) = chars[idx];
    pos + c.len_utf8()
}

/// True when the token of letters-and-dots ending at `chars[dot]` (inclusive)
/// is on the abbreviation stop list.
fn is_abbreviation_end(chars: &[(usize, char)], dot: usize) -> bool {
    let mut first = dot;
    while first > 0 {
        let prev = chars[first - 1].1;
        if prev.is_alphabetic() || prev == '.' {
            first -= 1;
        } else {
            break;
        }
    }
    if first == dot {
        // lone dot, no word attached
        return false;
    }
    let token: String = chars[first..=dot]
        .iter()
        .flat_map(|&(_, c)| c.to_lowercase())
        .collect();
    ABBREVIATIONS.contains(&token.as_str())
}
