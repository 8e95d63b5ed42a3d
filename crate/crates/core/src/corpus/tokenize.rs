//! Rule-based tokenizer.
//!
//! Text is lowercased, then scanned left to right:
//!
//! * whitespace separates tokens and is discarded;
//! * every maximal run of numeric characters becomes the token `"0"`;
//! * a maximal run of letters and apostrophes forms a word segment, from which
//!   English clitics are split off (`didn't` → `did n't`, `it's` → `it 's`)
//!   and stray leading/trailing apostrophes become `'` tokens;
//! * any other character is a token of its own.
//!
//! Every emitted token re-tokenizes to itself, so the tokenizer is idempotent
//! under whitespace joining.

/// Contracted suffixes split from the word they attach to.
const CLITICS: [&str; 7] = ["'s", "'re", "'ve", "'ll", "'d", "'m", "n't"];

pub const DIGIT_TOKEN: &str = "0";

/// Tokenizes UTF-8 text.
pub fn tokenize(raw_text: &str) -> Vec<String> {
    let lowered = raw_text.to_lowercase();
    let mut tokens = Vec::new();
    let mut chars = lowered.chars().map(normalize_apostrophe).peekable();
    let mut segment = String::new();
    while let Some(c) = chars.next() {
        if is_word_char(c) {
            segment.push(c);
            while let Some(&n) = chars.peek() {
                if !is_word_char(n) {
                    break;
                }
                segment.push(n);
                chars.next();
            }
            split_segment(&segment, &mut tokens);
            segment.clear();
        } else if c.is_numeric() {
            while chars.peek().is_some_and(|n| n.is_numeric()) {
                chars.next();
            }
            tokens.push(DIGIT_TOKEN.to_string());
        } else if !c.is_whitespace() {
            tokens.push(c.to_string());
        }
    }
    tokens
}

/// Tokenizes raw bytes; invalid UTF-8 sequences are dropped.
pub fn tokenize_bytes(raw: &[u8]) -> Vec<String> {
    tokenize(&decode_lossy(raw))
}

/// Decodes UTF-8, dropping undecodable bytes.
pub fn decode_lossy(raw: &[u8]) -> String {
    match std::str::from_utf8(raw) {
        Ok(s) => s.to_string(),
        Err(_) => {
            let mut out = String::with_capacity(raw.len());
            for chunk in raw.utf8_chunks() {
                out.push_str(chunk.valid());
            }
            out
        }
    }
}

#[inline]
fn normalize_apostrophe(c: char) -> char {
    match c {
        '\u{2019}' | '\u{2018}' => '\'',
        c => c,
    }
}

#[inline]
fn is_word_char(c: char) -> bool {
    c == '\'' || (c.is_alphabetic() && !c.is_numeric())
}

fn split_segment(seg: &str, out: &mut Vec<String>) {
    if seg.is_empty() {
        return;
    }
    if CLITICS.contains(&seg) {
        out.push(seg.to_string());
        return;
    }
    if let Some(rest) = seg.strip_prefix('\'') {
        out.push("'".to_string());
        split_segment(rest, out);
        return;
    }
    if let Some(rest) = seg.strip_suffix('\'') {
        split_segment(rest, out);
        out.push("'".to_string());
        return;
    }
    if let Some(prefix) = seg.strip_suffix("n't") {
        split_segment(prefix, out);
        out.push("n't".to_string());
        return;
    }
    if let Some(pos) = seg.rfind('\'') {
        let (prefix, suffix) = seg.split_at(pos);
        if CLITICS.contains(&suffix) {
            split_segment(prefix, out);
            out.push(suffix.to_string());
            return;
        }
    }
    out.push(seg.to_string());
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use regex::Regex;

    fn toks(s: &str) -> Vec<String> {
        tokenize(s)
    }

    /// Independent oracle for apostrophe-free text: digits, letter runs and
    /// single non-space characters.
    fn regex_oracle(s: &str) -> Vec<String> {
        let re = Regex::new(r"[0-9]+|[a-z]+|[^\sa-z0-9]").unwrap();
        re.find_iter(&s.to_lowercase())
            .map(|m| {
                if m.as_str().chars().all(|c| c.is_ascii_digit()) {
                    "0".to_string()
                } else {
                    m.as_str().to_string()
                }
            })
            .collect()
    }

    #[test]
    fn empty_input() {
        assert!(toks("").is_empty());
        assert!(toks("  \n\t ").is_empty());
    }

    #[test]
    fn lowercases_and_splits_punctuation() {
        assert_eq!(toks("Great movie!"), ["great", "movie", "!"]);
    }

    #[test]
    fn collapses_digit_runs() {
        assert_eq!(toks("rated 7/10"), ["rated", "0", "/", "0"]);
        assert_eq!(regex_oracle("rated 7/10"), toks("rated 7/10"));
        assert_eq!(toks("the 21st century 3.5"), ["the", "0", "st", "century", "0", ".", "0"]);
    }

    #[test]
    fn splits_clitics() {
        assert_eq!(toks("I didn't enjoy it"), ["i", "did", "n't", "enjoy", "it"]);
        assert_eq!(toks("they're here, it's fine"), ["they", "'re", "here", ",", "it", "'s", "fine"]);
        assert_eq!(toks("can't won\u{2019}t"), ["ca", "n't", "wo", "n't"]);
        assert_eq!(toks("'quoted'"), ["'", "quoted", "'"]);
        assert_eq!(toks("rock'n'roll o'neil"), ["rock'n'roll", "o'neil"]);
    }

    #[test]
    fn html_tags_are_ordinary_tokens() {
        assert_eq!(toks("a<br />b"), ["a", "<", "br", "/", ">", "b"]);
    }

    #[test]
    fn drops_invalid_utf8() {
        assert_eq!(tokenize_bytes(b"ok\xff\xfeyes"), ["okyes"]);
        assert_eq!(tokenize_bytes(b"ok \xff yes"), ["ok", "yes"]);
    }

    proptest! {
        #[test]
        fn idempotent_under_whitespace_join(s in "[a-zA-Z0-9 '\u{2019}.,!?/<>()\\-éßÆ\t\n]{0,60}") {
            let once = tokenize(&s);
            let twice = tokenize(&once.join(" "));
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn invariants_hold(s in "\\PC{0,60}") {
            for t in tokenize(&s) {
                prop_assert!(!t.is_empty());
                prop_assert_eq!(t.to_lowercase(), t.clone());
                prop_assert!(!t.chars().any(char::is_whitespace));
                if t.chars().any(|c| c.is_numeric()) {
                    prop_assert_eq!(t.as_str(), "0");
                }
            }
        }

        #[test]
        fn matches_regex_oracle_without_apostrophes(s in "[a-zA-Z0-9 .,!?/<>();:\\-]{0,80}") {
            prop_assert_eq!(tokenize(&s), regex_oracle(&s));
        }
    }
}
