//! Tweet preprocessing: tokenization and normalization.
//!
//! Raw tweets are scanned into typed tokens (words, punctuation, mentions,
//! URLs, phone numbers, timestamps, emoji runs), then normalized: Twitter
//! keywords become the sentinel tokens `USERNAME`, `URL`, `PHONENUMBER`, and
//! `TIMESTAMP`, everything else is lowercased, and emoji runs are split into
//! individual emoji and replaced by their description words.
//!
//! All functions here are pure; an [`EmojiMap`] is read-only after loading.

mod emoji;

pub use emoji::{load_emoji_map, split_emoji_run, EmojiMap};

use serde::{Deserialize, Serialize};

use crate::task::Gold;

pub const USERNAME: &str = "USERNAME";
pub const URL: &str = "URL";
pub const PHONENUMBER: &str = "PHONENUMBER";
pub const TIMESTAMP: &str = "TIMESTAMP";

/// A raw tweet as read from a dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawTweet {
    pub id: String,
    pub text: String,
    /// Affect dimension label as it appears in the data file.
    pub dimension: String,
    pub gold: Option<Gold>,
}

/// Normalized token sequence with its stable tweet id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessedTweet {
    pub id: String,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Word,
    Punct,
    Mention,
    Url,
    Phone,
    Timestamp,
    EmojiRun,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub text: String,
    pub kind: TokenKind,
}

impl Token {
    fn new(text: impl Into<String>, kind: TokenKind) -> Token {
        Token { text: text.into(), kind }
    }
}

/// Punctuation that is peeled off the tail of URLs.
const URL_TRAILERS: &[char] = &['.', ',', '!', '?', ';', ':', '\'', '"', ')', ']', '}', '…'];

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\'' || c == '\u{2019}' || c == '-'
}

fn is_handle_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

struct Scanner {
    chars: Vec<char>,
    pos: usize,
}

impl Scanner {
    fn new(text: &str) -> Scanner {
        Scanner { chars: text.chars().collect(), pos: 0 }
    }

    fn peek(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn slice(&self, from: usize, to: usize) -> String {
        self.chars[from..to].iter().collect()
    }

    fn starts_with_ci(&self, prefix: &str) -> bool {
        prefix
            .chars()
            .enumerate()
            .all(|(k, p)| self.peek(k).is_some_and(|c| c.to_ascii_lowercase() == p))
    }

    /// URL: starts with a scheme, `www.`, or `t.co/`; runs to whitespace with
    /// trailing punctuation peeled back off.
    fn try_url(&mut self) -> Option<Token> {
        let prefixes = ["http://", "https://", "www.", "t.co/"];
        let prefix = prefixes.iter().find(|p| self.starts_with_ci(p))?;
        let start = self.pos;
        let mut end = self.pos;
        while end < self.chars.len() && !self.chars[end].is_whitespace() {
            end += 1;
        }
        while end > start && URL_TRAILERS.contains(&self.chars[end - 1]) {
            end -= 1;
        }
        // require content beyond the bare prefix
        if end - start <= prefix.chars().count() {
            return None;
        }
        let text = self.slice(start, end);
        self.pos = end;
        Some(Token::new(text, TokenKind::Url))
    }

    /// Mention: `@` followed by one or more handle characters.
    fn try_mention(&mut self) -> Option<Token> {
        if self.peek(0) != Some('@') || !self.peek(1).is_some_and(is_handle_char) {
            return None;
        }
        let start = self.pos;
        let mut end = self.pos + 1;
        while end < self.chars.len() && is_handle_char(self.chars[end]) {
            end += 1;
        }
        let text = self.slice(start, end);
        self.pos = end;
        Some(Token::new(text, TokenKind::Mention))
    }

    /// Timestamp: `H:MM` or `HH:MM`, optional `:SS`, optional attached am/pm.
    fn try_timestamp(&mut self) -> Option<Token> {
        let start = self.pos;
        let mut end = self.pos;
        let mut hours = 0;
        while hours < 2 && self.chars.get(end).is_some_and(char::is_ascii_digit) {
            end += 1;
            hours += 1;
        }
        if hours == 0 || self.chars.get(end) != Some(&':') {
            return None;
        }
        end += 1;
        for _ in 0..2 {
            if !self.chars.get(end).is_some_and(char::is_ascii_digit) {
                return None;
            }
            end += 1;
        }
        if self.chars.get(end) == Some(&':')
            && self.chars.get(end + 1).is_some_and(char::is_ascii_digit)
            && self.chars.get(end + 2).is_some_and(char::is_ascii_digit)
        {
            end += 3;
        }
        let meridiem = self
            .chars
            .get(end)
            .zip(self.chars.get(end + 1))
            .map(|(a, b)| format!("{}{}", a.to_ascii_lowercase(), b.to_ascii_lowercase()))
            .filter(|s| s == "am" || s == "pm");
        if meridiem.is_some() {
            end += 2;
        }
        // boundary: the match must not continue into a word or another field
        if self.chars.get(end).is_some_and(|c| c.is_alphanumeric() || *c == ':') {
            return None;
        }
        let text = self.slice(start, end);
        self.pos = end;
        Some(Token::new(text, TokenKind::Timestamp))
    }

    /// Phone number: 7+ digits with optional `-`, space, parentheses, and a
    /// leading `+`. The span is trimmed back to its last digit.
    fn try_phone(&mut self) -> Option<Token> {
        let first = self.peek(0)?;
        if !(first.is_ascii_digit() || first == '+' || first == '(') {
            return None;
        }
        let start = self.pos;
        let mut end = self.pos;
        if first == '+' {
            end += 1;
        }
        while self
            .chars
            .get(end)
            .is_some_and(|&c| c.is_ascii_digit() || matches!(c, '-' | ' ' | '(' | ')'))
        {
            end += 1;
        }
        while end > start && !self.chars[end - 1].is_ascii_digit() {
            end -= 1;
        }
        let digits = self.chars[start..end].iter().filter(|c| c.is_ascii_digit()).count();
        if digits < 7 || self.chars.get(end).is_some_and(|c| c.is_alphanumeric()) {
            return None;
        }
        let text = self.slice(start, end);
        self.pos = end;
        Some(Token::new(text, TokenKind::Phone))
    }

    fn try_emoji_run(&mut self) -> Option<Token> {
        if !self.peek(0).is_some_and(emoji::is_emoji_char) {
            return None;
        }
        let start = self.pos;
        let mut end = self.pos;
        while self.chars.get(end).is_some_and(|&c| {
            emoji::is_emoji_char(c) || (end > start && emoji::is_emoji_component(c))
        }) {
            end += 1;
        }
        let text = self.slice(start, end);
        self.pos = end;
        Some(Token::new(text, TokenKind::EmojiRun))
    }

    /// Word: letters/digits with internal apostrophes and hyphens; an optional
    /// leading `#` keeps hashtags whole. Trailing non-alphanumerics are peeled
    /// off as punctuation.
    fn try_word(&mut self) -> Option<Token> {
        let first = self.peek(0)?;
        let hashtag = first == '#' && self.peek(1).is_some_and(|c| c.is_alphanumeric() || c == '_');
        if !hashtag && !(first.is_alphanumeric() || first == '_') {
            return None;
        }
        let start = self.pos;
        let mut end = self.pos + if hashtag { 1 } else { 0 };
        while self.chars.get(end).is_some_and(|&c| is_word_char(c) && !emoji::is_emoji_char(c)) {
            end += 1;
        }
        let min = start + if hashtag { 2 } else { 1 };
        while end > min && !self.chars[end - 1].is_alphanumeric() {
            end -= 1;
        }
        let text = self.slice(start, end);
        self.pos = end;
        Some(Token::new(text, TokenKind::Word))
    }

    fn next_token(&mut self) -> Option<Token> {
        while self.peek(0).is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
        self.peek(0)?;
        if let Some(t) = self.try_url() {
            return Some(t);
        }
        if let Some(t) = self.try_mention() {
            return Some(t);
        }
        if let Some(t) = self.try_timestamp() {
            return Some(t);
        }
        if let Some(t) = self.try_phone() {
            return Some(t);
        }
        if let Some(t) = self.try_emoji_run() {
            return Some(t);
        }
        if let Some(t) = self.try_word() {
            return Some(t);
        }
        // anything left is a single punctuation/symbol character
        let c = self.chars[self.pos];
        self.pos += 1;
        Some(Token::new(c.to_string(), TokenKind::Punct))
    }
}

/// Split tweet text into typed tokens. Total function: never fails.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut scanner = Scanner::new(text);
    let mut tokens = Vec::new();
    while let Some(t) = scanner.next_token() {
        tokens.push(t);
    }
    tokens
}

fn is_sentinel(s: &str) -> bool {
    matches!(s, USERNAME | URL | PHONENUMBER | TIMESTAMP)
}

/// Normalize a token sequence: sentinel substitution, lowercasing, and emoji
/// description expansion. Tokens that already equal a sentinel pass through so
/// that normalization is idempotent.
pub fn normalize(tokens: &[Token], map: &EmojiMap) -> Vec<String> {
    let mut out = Vec::with_capacity(tokens.len());
    for token in tokens {
        match token.kind {
            TokenKind::Mention => out.push(USERNAME.to_string()),
            TokenKind::Url => out.push(URL.to_string()),
            TokenKind::Phone => out.push(PHONENUMBER.to_string()),
            TokenKind::Timestamp => out.push(TIMESTAMP.to_string()),
            TokenKind::EmojiRun => {
                for unit in split_emoji_run(&token.text) {
                    match map.get(&unit) {
                        Some(desc) => out.extend(desc.split_whitespace().map(str::to_string)),
                        None => out.push(unit),
                    }
                }
            }
            TokenKind::Word | TokenKind::Punct => {
                if is_sentinel(&token.text) {
                    out.push(token.text.clone());
                } else {
                    out.push(token.text.to_lowercase());
                }
            }
        }
    }
    out
}

/// Full preprocessing of one tweet: tokenize then normalize.
pub fn process(id: &str, text: &str, map: &EmojiMap) -> ProcessedTweet {
    ProcessedTweet { id: id.to_string(), tokens: normalize(&tokenize(text), map) }
}

/// Preprocess a whole dataset, preserving order.
pub fn process_all(tweets: &[RawTweet], map: &EmojiMap) -> Vec<ProcessedTweet> {
    tweets.iter().map(|t| process(&t.id, &t.text, map)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(tokens: &[Token]) -> Vec<&str> {
        tokens.iter().map(|t| t.text.as_str()).collect()
    }

    fn sample_map() -> EmojiMap {
        let mut m = EmojiMap::empty();
        m.insert("😂", "face with tears of joy").unwrap();
        m.insert("🔥", "fire").unwrap();
        m
    }

    #[test]
    fn whitespace_split() {
        assert_eq!(texts(&tokenize("hello world")), vec!["hello", "world"]);
    }

    #[test]
    fn mention_url_and_trailing_punct() {
        let toks = tokenize("@alice check https://t.co/abc!");
        assert_eq!(texts(&toks), vec!["@alice", "check", "https://t.co/abc", "!"]);
        assert_eq!(toks[0].kind, TokenKind::Mention);
        assert_eq!(toks[2].kind, TokenKind::Url);
        assert_eq!(toks[3].kind, TokenKind::Punct);
    }

    #[test]
    fn hashtag_keeps_hash_and_splits_bangs() {
        assert_eq!(texts(&tokenize("#joy!!!")), vec!["#joy", "!", "!", "!"]);
    }

    #[test]
    fn contraction_stays_whole() {
        assert_eq!(texts(&tokenize("don't stop")), vec!["don't", "stop"]);
    }

    #[test]
    fn bare_tco_link() {
        let toks = tokenize("see t.co/xYz1");
        assert_eq!(texts(&toks), vec!["see", "t.co/xYz1"]);
        assert_eq!(toks[1].kind, TokenKind::Url);
    }

    #[test]
    fn www_prefix_needs_content() {
        let toks = tokenize("www. www.example.com");
        assert_eq!(texts(&toks), vec!["www", ".", "www.example.com"]);
        assert_eq!(toks[2].kind, TokenKind::Url);
    }

    #[test]
    fn phone_with_separators() {
        let toks = tokenize("call +1 (555) 123-4567 now");
        assert_eq!(texts(&toks), vec!["call", "+1 (555) 123-4567", "now"]);
        assert_eq!(toks[1].kind, TokenKind::Phone);
    }

    #[test]
    fn short_number_is_a_word() {
        let toks = tokenize("room 404");
        assert_eq!(texts(&toks), vec!["room", "404"]);
        assert_eq!(toks[1].kind, TokenKind::Word);
    }

    #[test]
    fn timestamps_with_and_without_meridiem() {
        let toks = tokenize("at 4:30pm or 16:45:10");
        assert_eq!(texts(&toks), vec!["at", "4:30pm", "or", "16:45:10"]);
        assert_eq!(toks[1].kind, TokenKind::Timestamp);
        assert_eq!(toks[3].kind, TokenKind::Timestamp);
    }

    #[test]
    fn emoji_run_attached_to_word() {
        let toks = tokenize("yay😂😂");
        assert_eq!(texts(&toks), vec!["yay", "😂😂"]);
        assert_eq!(toks[1].kind, TokenKind::EmojiRun);
    }

    #[test]
    fn normalize_replaces_keywords() {
        let toks = tokenize("@alice check https://t.co/abc");
        assert_eq!(normalize(&toks, &EmojiMap::empty()), vec!["USERNAME", "check", "URL"]);
    }

    #[test]
    fn normalize_splits_and_substitutes_emoji_run() {
        let toks = tokenize("😂😂");
        let expected: Vec<String> = "face with tears of joy face with tears of joy"
            .split(' ')
            .map(str::to_string)
            .collect();
        assert_eq!(normalize(&toks, &sample_map()), expected);
    }

    #[test]
    fn normalize_lowercases_words() {
        assert_eq!(normalize(&tokenize("HeLLo"), &EmojiMap::empty()), vec!["hello"]);
    }

    #[test]
    fn unknown_emoji_passes_through() {
        let out = normalize(&tokenize("💀"), &sample_map());
        assert_eq!(out, vec!["💀"]);
    }

    #[test]
    fn normalization_is_idempotent() {
        let map = sample_map();
        let cases = [
            "@bob www.x.io 😂🔥 #Happy don't 4:30pm +1 555-123-4567 WOW!!",
            "plain words only",
            "😂😂😂",
        ];
        for text in cases {
            let once = normalize(&tokenize(text), &map);
            let again = normalize(&tokenize(&once.join(" ")), &map);
            assert_eq!(once, again, "not idempotent for {text:?}");
        }
    }

    #[test]
    fn no_pattern_survives_normalization() {
        let map = sample_map();
        let text = "@a_user https://t.co/q 555 123-4567 12:05am www.z.de";
        for tok in normalize(&tokenize(text), &map) {
            if is_sentinel(&tok) {
                continue;
            }
            let rescan = tokenize(&tok);
            for t in rescan {
                assert!(
                    !matches!(
                        t.kind,
                        TokenKind::Mention
                            | TokenKind::Url
                            | TokenKind::Phone
                            | TokenKind::Timestamp
                    ),
                    "token {tok:?} still matches a keyword pattern"
                );
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn arbitrary_text_normalizes_cleanly(text in "\\PC*") {
            let map = sample_map();
            let tokens = normalize(&tokenize(&text), &map);
            for t in &tokens {
                proptest::prop_assert!(!t.is_empty());
                proptest::prop_assert!(!t.chars().any(char::is_whitespace));
            }
            // re-normalizing the output (as plain word tokens) is identity
            let as_words: Vec<Token> =
                tokens.iter().map(|t| Token::new(t.clone(), TokenKind::Word)).collect();
            proptest::prop_assert_eq!(&normalize(&as_words, &map), &tokens);
        }

        #[test]
        fn tokenize_is_deterministic(text in "\\PC*") {
            proptest::prop_assert_eq!(tokenize(&text), tokenize(&text));
        }
    }

    #[test]
    fn output_tokens_have_no_whitespace_and_are_lowercase() {
        let map = sample_map();
        let out = normalize(&tokenize("Check 555 123 4567 OUT 😂 NOW!"), &map);
        for tok in &out {
            assert!(!tok.is_empty());
            assert!(!tok.chars().any(char::is_whitespace));
            if !is_sentinel(tok) {
                assert!(!tok.chars().any(|c| c.is_alphabetic() && c.is_uppercase()));
            }
        }
    }
}
