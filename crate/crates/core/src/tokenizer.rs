//! Lossless source-code lexing.
//!
//! `tokenize` splits a source string into coarse lexical tokens and keeps
//! every byte it saw: inter-token whitespace is stored as "gap" strings, and
//! leading whitespace / line breaks become `Indent` / `Newline` tokens. As a
//! result `detokenize(tokenize(s)) == s` holds byte-for-byte for any input,
//! and a stream edited by same-arity text replacement renders back to the
//! original source with just the replaced texts substituted.
//!
//! The lexer is intentionally forgiving: it never fails. Characters that fit
//! no rule become single-character operator tokens, and unterminated strings
//! or block comments simply run to the end of line / file.

use serde::{Deserialize, Serialize};

use crate::profile::LexProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenKind {
    Ident,
    Keyword,
    Number,
    Operator,
    String,
    Comment,
    Newline,
    Indent,
}

impl TokenKind {
    /// Kinds that carry program content, as opposed to layout or commentary.
    pub fn is_code(self) -> bool {
        !matches!(self, TokenKind::Comment | TokenKind::Newline | TokenKind::Indent)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub kind: TokenKind,
    /// Byte range `[start, end)` into the source this stream was lexed from.
    /// Spans go stale once the stream is edited.
    pub span: (usize, usize),
    /// Zero-based line index: the number of `\n` characters before `span.0`.
    pub line: usize,
}

/// A token sequence plus the whitespace between tokens.
///
/// `gaps` always has exactly `tokens.len() + 1` entries: `gaps[i]` precedes
/// `tokens[i]` and the final entry trails the last token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenStream {
    tokens: Vec<Token>,
    gaps: Vec<String>,
}

impl TokenStream {
    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn token(&self, i: usize) -> &Token {
        &self.tokens[i]
    }

    pub fn texts(&self) -> Vec<String> {
        self.tokens.iter().map(|t| t.text.clone()).collect()
    }

    /// Replace the text of token `i`, keeping kind, span, and line metadata.
    pub fn replace_text(&mut self, i: usize, text: impl Into<String>) {
        self.tokens[i].text = text.into();
    }

    pub fn set_kind(&mut self, i: usize, kind: TokenKind) {
        self.tokens[i].kind = kind;
    }

    /// Insert a new token before index `i` (`i == len` appends). The token
    /// keeps the existing gap on its left and gets a single space on its
    /// right, so surrounding spacing is preserved.
    pub fn insert(&mut self, i: usize, text: impl Into<String>, kind: TokenKind) {
        let line = if i < self.tokens.len() {
            self.tokens[i].line
        } else {
            self.tokens.last().map(|t| t.line).unwrap_or(0)
        };
        self.tokens.insert(
            i,
            Token {
                text: text.into(),
                kind,
                span: (0, 0),
                line,
            },
        );
        self.gaps.insert(i + 1, " ".to_string());
    }

    /// Remove token `i`, merging its surrounding gaps.
    pub fn remove(&mut self, i: usize) -> Token {
        let tok = self.tokens.remove(i);
        let right = self.gaps.remove(i + 1);
        self.gaps[i].push_str(&right);
        tok
    }
}

/// Reassemble the exact source text of a stream.
pub fn detokenize(stream: &TokenStream) -> String {
    let mut out = String::new();
    for (i, tok) in stream.tokens.iter().enumerate() {
        out.push_str(&stream.gaps[i]);
        out.push_str(&tok.text);
    }
    out.push_str(stream.gaps.last().map(String::as_str).unwrap_or(""));
    out
}

/// Lex `source` according to `profile`. Total: never fails.
pub fn tokenize(source: &str, profile: &LexProfile) -> TokenStream {
    Lexer::new(source, profile).run()
}

struct Lexer<'a> {
    source: &'a str,
    profile: &'a LexProfile,
    ops: Vec<&'a str>,
    pos: usize,
    line: usize,
    at_line_start: bool,
    pending_gap: String,
    tokens: Vec<Token>,
    gaps: Vec<String>,
}

impl<'a> Lexer<'a> {
    fn new(source: &'a str, profile: &'a LexProfile) -> Self {
        Lexer {
            source,
            profile,
            ops: profile.operators_longest_first(),
            pos: 0,
            line: 0,
            at_line_start: true,
            pending_gap: String::new(),
            tokens: Vec::new(),
            gaps: Vec::new(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.source[self.pos..]
    }

    fn push(&mut self, end: usize, kind: TokenKind) {
        let text = &self.source[self.pos..end];
        self.gaps.push(std::mem::take(&mut self.pending_gap));
        self.tokens.push(Token {
            text: text.to_string(),
            kind,
            span: (self.pos, end),
            line: self.line,
        });
        self.line += text.matches('\n').count();
        self.at_line_start = kind == TokenKind::Newline;
        self.pos = end;
    }

    fn run(mut self) -> TokenStream {
        let n = self.source.len();
        while self.pos < n {
            let rest = self.rest();
            if rest.starts_with("\r\n") {
                self.push(self.pos + 2, TokenKind::Newline);
                continue;
            }
            if rest.starts_with('\n') {
                self.push(self.pos + 1, TokenKind::Newline);
                continue;
            }
            let c = rest.chars().next().expect("pos < len");
            if c == ' ' || c == '\t' {
                let run_len = rest
                    .char_indices()
                    .find(|&(_, ch)| ch != ' ' && ch != '\t')
                    .map(|(i, _)| i)
                    .unwrap_or(rest.len());
                if self.at_line_start {
                    self.push(self.pos + run_len, TokenKind::Indent);
                } else {
                    self.pending_gap.push_str(&rest[..run_len]);
                    self.pos += run_len;
                }
                continue;
            }
            if c == '\r' {
                // Lone carriage return: treat as inter-token whitespace.
                self.pending_gap.push('\r');
                self.pos += 1;
                continue;
            }
            if self.try_line_comment() || self.try_block_comment() || self.try_string() {
                continue;
            }
            if c.is_ascii_digit() {
                self.scan_number();
                continue;
            }
            if c == '_' || c.is_alphabetic() {
                self.scan_word();
                continue;
            }
            if let Some(op) = self.ops.iter().find(|op| rest.starts_with(**op)) {
                let len = op.len();
                self.push(self.pos + len, TokenKind::Operator);
                continue;
            }
            // Unknown character: emit it alone as an operator token.
            self.push(self.pos + c.len_utf8(), TokenKind::Operator);
        }
        self.gaps.push(self.pending_gap);
        TokenStream {
            tokens: self.tokens,
            gaps: self.gaps,
        }
    }

    fn try_line_comment(&mut self) -> bool {
        let rest = self.rest();
        let marker = self
            .profile
            .line_comments
            .iter()
            .filter(|m| rest.starts_with(m.as_str()))
            .max_by_key(|m| m.len());
        if marker.is_none() {
            return false;
        }
        let end = rest
            .find('\n')
            .map(|i| {
                // Keep a preceding \r with the newline, not the comment.
                if i > 0 && rest.as_bytes()[i - 1] == b'\r' {
                    self.pos + i - 1
                } else {
                    self.pos + i
                }
            })
            .unwrap_or(self.source.len());
        self.push(end, TokenKind::Comment);
        true
    }

    fn try_block_comment(&mut self) -> bool {
        let rest = self.rest();
        let pair = self
            .profile
            .block_comments
            .iter()
            .filter(|(open, _)| rest.starts_with(open.as_str()))
            .max_by_key(|(open, _)| open.len());
        let Some((open, close)) = pair else {
            return false;
        };
        let body_start = open.len();
        let end = match rest[body_start..].find(close.as_str()) {
            Some(i) => self.pos + body_start + i + close.len(),
            None => self.source.len(), // unterminated: swallow the rest
        };
        self.push(end, TokenKind::Comment);
        true
    }

    fn try_string(&mut self) -> bool {
        let rest = self.rest();
        let delim = self
            .profile
            .string_delims
            .iter()
            .filter(|d| rest.starts_with(d.as_str()))
            .max_by_key(|d| d.len());
        let Some(delim) = delim else {
            return false;
        };
        let multiline = delim.len() > 1;
        let mut j = delim.len();
        let end = loop {
            if j >= rest.len() {
                break rest.len(); // unterminated: to end of input
            }
            let tail = &rest[j..];
            if tail.starts_with('\\') {
                let escaped = tail[1..].chars().next().map(char::len_utf8).unwrap_or(0);
                j += 1 + escaped;
                continue;
            }
            if !multiline && tail.starts_with('\n') {
                break j; // unterminated single-line string stops before the newline
            }
            if tail.starts_with(delim.as_str()) {
                break j + delim.len();
            }
            j += tail.chars().next().expect("tail non-empty").len_utf8();
        };
        self.push(self.pos + end, TokenKind::String);
        true
    }

    fn scan_number(&mut self) {
        let rest = self.rest();
        let bytes = rest.as_bytes();
        let mut j = 1;
        while j < bytes.len() {
            let c = bytes[j] as char;
            if c.is_ascii_alphanumeric() || c == '_' {
                j += 1;
                continue;
            }
            // Fraction part: a dot only continues the number before a digit.
            if c == '.' && bytes.get(j + 1).is_some_and(|b| b.is_ascii_digit()) {
                j += 1;
                continue;
            }
            // Exponent sign, e.g. 1e-5.
            if (c == '+' || c == '-')
                && matches!(bytes[j - 1], b'e' | b'E')
                && bytes.get(j + 1).is_some_and(|b| b.is_ascii_digit())
            {
                j += 1;
                continue;
            }
            break;
        }
        self.push(self.pos + j, TokenKind::Number);
    }

    fn scan_word(&mut self) {
        let rest = self.rest();
        let end = rest
            .char_indices()
            .find(|&(i, ch)| i > 0 && ch != '_' && !ch.is_alphanumeric())
            .map(|(i, _)| i)
            .unwrap_or(rest.len());
        let kind = if self.profile.keywords.contains(&rest[..end]) {
            TokenKind::Keyword
        } else {
            TokenKind::Ident
        };
        self.push(self.pos + end, kind);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::load_profile;
    use proptest::prelude::*;

    fn python() -> LexProfile {
        load_profile("python-like").unwrap()
    }

    fn kinds(stream: &TokenStream) -> Vec<TokenKind> {
        stream.tokens().iter().map(|t| t.kind).collect()
    }

    #[test]
    fn empty_input_empty_stream() {
        let s = tokenize("", &python());
        assert!(s.is_empty());
        assert_eq!(detokenize(&s), "");
    }

    #[test]
    fn bit_clear_line() {
        // "n ^= n - 1" -> [n, ^=, n, -, 1]
        let s = tokenize("n ^= n - 1", &python());
        assert_eq!(
            s.texts(),
            vec!["n", "^=", "n", "-", "1"],
        );
        assert_eq!(
            kinds(&s),
            vec![
                TokenKind::Ident,
                TokenKind::Operator,
                TokenKind::Ident,
                TokenKind::Operator,
                TokenKind::Number
            ]
        );
    }

    #[test]
    fn def_line_kinds_and_line_indices() {
        let s = tokenize("def f():\n  pass", &python());
        assert_eq!(s.token(0).kind, TokenKind::Keyword);
        assert_eq!(s.token(0).text, "def");
        // tokens: def f ( ) : \n <indent> pass
        let pass = s.tokens().last().unwrap();
        assert_eq!(pass.text, "pass");
        assert_eq!(pass.line, 1);
        assert_eq!(s.token(6).kind, TokenKind::Indent);
    }

    #[test]
    fn replacement_renders_substituted_source() {
        let mut s = tokenize("n ^= n - 1", &python());
        s.replace_text(1, "&=");
        assert_eq!(detokenize(&s), "n &= n - 1");
        s.replace_text(4, "<mask>");
        assert_eq!(detokenize(&s), "n &= n - <mask>");
    }

    #[test]
    fn unknown_char_becomes_single_operator() {
        let s = tokenize("a $ b", &python());
        assert_eq!(s.token(1).text, "$");
        assert_eq!(s.token(1).kind, TokenKind::Operator);
        assert_eq!(detokenize(&s), "a $ b");
    }

    #[test]
    fn comments_and_strings_round_trip() {
        let src = "x = \"he\\\"llo\"  # trailing note\ny = '''a\nb'''\n";
        let s = tokenize(src, &python());
        assert_eq!(detokenize(&s), src);
        assert!(kinds(&s).contains(&TokenKind::Comment));
        // the triple-quoted string spans a newline but is one token
        let triple = s.tokens().iter().find(|t| t.text.starts_with("'''")).unwrap();
        assert!(triple.text.contains('\n'));
        // token after the triple string sits on the correct line
        let last_newline = s.tokens().last().unwrap();
        assert_eq!(last_newline.kind, TokenKind::Newline);
        assert_eq!(last_newline.line, 2);
    }

    #[test]
    fn block_comment_counts_newlines() {
        let java = load_profile("java-like").unwrap();
        let src = "int a; /* two\nline note */ int b;";
        let s = tokenize(src, &java);
        assert_eq!(detokenize(&s), src);
        let b = s.tokens().iter().find(|t| t.text == "b").unwrap();
        assert_eq!(b.line, 1);
    }

    #[test]
    fn unterminated_string_stops_at_newline() {
        let src = "s = \"oops\nnext = 1\n";
        let s = tokenize(src, &python());
        assert_eq!(detokenize(&s), src);
        let broken = s.tokens().iter().find(|t| t.kind == TokenKind::String).unwrap();
        assert_eq!(broken.text, "\"oops");
    }

    #[test]
    fn numbers_with_exponents_and_dots() {
        let s = tokenize("a = 1.5e-3 + 0xFF + 1..2", &python());
        let nums: Vec<&str> = s
            .tokens()
            .iter()
            .filter(|t| t.kind == TokenKind::Number)
            .map(|t| t.text.as_str())
            .collect();
        assert_eq!(nums, vec!["1.5e-3", "0xFF", "1", "2"]);
    }

    #[test]
    fn insert_and_remove_keep_gap_invariant() {
        let mut s = tokenize("a - 1", &python());
        s.insert(1, "not", TokenKind::Keyword);
        assert_eq!(detokenize(&s), "a not - 1");
        let removed = s.remove(2);
        assert_eq!(removed.text, "-");
        assert_eq!(detokenize(&s), "a not  1");
    }

    #[test]
    fn crlf_is_one_newline_token() {
        let s = tokenize("a\r\nb", &python());
        assert_eq!(s.len(), 3);
        assert_eq!(s.token(1).kind, TokenKind::Newline);
        assert_eq!(s.token(2).line, 1);
        assert_eq!(detokenize(&s), "a\r\nb");
    }

    #[test]
    fn spans_ascending_and_line_indices_match() {
        let src = "def f(xs):\n    # doc\n    t = \"a b\"\n    return t\n";
        let s = tokenize(src, &python());
        let mut prev_end = 0;
        for tok in s.tokens() {
            assert!(tok.span.0 >= prev_end, "overlapping spans");
            assert!(tok.span.1 >= tok.span.0);
            prev_end = tok.span.1;
            let newlines_before = src[..tok.span.0].matches('\n').count();
            assert_eq!(tok.line, newlines_before, "line index of {:?}", tok.text);
            assert_eq!(&src[tok.span.0..tok.span.1], tok.text);
        }
    }

    proptest! {
        #[test]
        fn round_trip_ascii(src in "[ -~\t\n]{0,200}") {
            for profile in ["python-like", "java-like", "mini"] {
                let p = load_profile(profile).unwrap();
                let s = tokenize(&src, &p);
                prop_assert_eq!(detokenize(&s), src.clone());
            }
        }

        #[test]
        fn round_trip_unicode(src in "\\PC{0,80}") {
            let p = python();
            let s = tokenize(&src, &p);
            prop_assert_eq!(detokenize(&s), src);
        }
    }
}
