//! Token-level text comparison used by the certainty metric and the leak guard.

use std::collections::HashSet;
use std::ops::Range;

/// Placeholder that replaces masked spans of a hint.
pub const MASK: &str = "⟨…⟩";

/// A lowercase token with its byte span in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub span: Range<usize>,
}

/// Splits on whitespace and punctuation (anything that is not alphanumeric)
/// and lowercases.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (c.is_alphanumeric(), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                tokens.push(Token {
                    text: text[s..i].to_lowercase(),
                    span: s..i,
                });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        tokens.push(Token {
            text: text[s..].to_lowercase(),
            span: s..text.len(),
        });
    }
    tokens
}

pub fn token_set(text: &str) -> HashSet<String> {
    tokenize(text).into_iter().map(|t| t.text).collect()
}

/// Jaccard similarity of the token sets; two empty sets count as identical.
pub fn jaccard(a: &str, b: &str) -> f64 {
    let (a, b) = (token_set(a), token_set(b));
    let union = a.union(&b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(&b).count() as f64 / union as f64
}

/// Longest run of consecutive tokens shared by both sequences, as
/// `(length, start index in a)`.
pub fn longest_common_run(a: &[Token], b: &[Token]) -> (usize, usize) {
    let mut best = (0, 0);
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            cur[j] = if a[i - 1].text == b[j - 1].text {
                prev[j - 1] + 1
            } else {
                0
            };
            if cur[j] > best.0 {
                best = (cur[j], i - cur[j]);
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    best
}

/// Masks every stretch of the hint that shares more than `max_run`
/// consecutive tokens with the predicted code.
pub fn leak_guard(hint_text: &str, predicted_code: &str, max_run: usize) -> (String, bool) {
    let code_tokens = tokenize(predicted_code);
    let mut text = hint_text.to_string();
    let mut masked = false;
    loop {
        let hint_tokens = tokenize(&text);
        let (len, start) = longest_common_run(&hint_tokens, &code_tokens);
        if len <= max_run {
            return (text, masked);
        }
        let span = hint_tokens[start].span.start..hint_tokens[start + len - 1].span.end;
        text.replace_range(span, MASK);
        masked = true;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(tokens: &[Token]) -> Vec<&str> {
        tokens.iter().map(|t| t.text.as_str()).collect()
    }

    #[test]
    fn tokenizer_splits_on_punctuation_and_lowercases() {
        let t = tokenize("Total=0\nfor x in xs: total+=x");
        assert_eq!(words(&t), ["total", "0", "for", "x", "in", "xs", "total", "x"]);
        assert_eq!(&"Total=0"[t[0].span.clone()], "Total");
        assert!(tokenize("  ,;  ").is_empty());
        assert_eq!(words(&tokenize("snake_case")), ["snake", "case"]);
    }

    #[test]
    fn jaccard_extremes() {
        assert_eq!(jaccard("a b c", "C B A"), 1.0);
        assert_eq!(jaccard("a b", "c d"), 0.0);
        assert_eq!(jaccard("", ""), 1.0);
        assert!((jaccard("a b", "b c") - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn guard_leaves_unrelated_hints_alone() {
        let code = "total=0\nfor x in xs: total+=x";
        assert_eq!(
            leak_guard("use a loop to accumulate", code, 6),
            ("use a loop to accumulate".to_string(), false)
        );
        assert_eq!(leak_guard("", code, 6), (String::new(), false));
    }

    #[test]
    fn guard_masks_quoted_code() {
        let code = "for x in xs: total += x * weight";
        let hint = "Try writing `for x in xs: total += x * weight` next.";
        let (out, masked) = leak_guard(hint, code, 6);
        assert!(masked);
        assert_eq!(out, format!("Try writing `{MASK}` next."));
    }

    #[test]
    fn guard_allows_runs_up_to_the_limit() {
        let code = "a b c d e f g";
        let (out, masked) = leak_guard("a b c d e f", code, 6);
        assert!(!masked);
        assert_eq!(out, "a b c d e f");
    }
}
