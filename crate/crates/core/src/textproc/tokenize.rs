// SPDX-License-Identifier: Apache-2.0

/// A word as it appears in the sentence, with character offsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawToken {
    pub surface: String,
    pub start: usize,
    pub end: usize,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

fn is_joiner(c: char) -> bool {
    matches!(c, '.' | '\'' | '’' | '-' | '#')
}

/// Split a sentence into words. Joiners (`.`, `'`, `-`, `#`, `::`)
/// between word characters stay inside a word, and an empty `()` directly
/// after a word is kept with it, so `Thread.sleep()` and `don't` are single
/// tokens. Everything else outside a word is punctuation and yields nothing.
pub fn tokenize(sentence: &str) -> Vec<RawToken> {
    let chars: Vec<char> = sentence.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if !is_word_char(chars[i]) {
            i += 1;
            continue;
        }
        let start = i;
        i += 1;
        loop {
            if i < chars.len() && is_word_char(chars[i]) {
                i += 1;
            } else if i + 1 < chars.len() && is_joiner(chars[i]) && is_word_char(chars[i + 1]) {
                i += 2;
            } else if i + 2 < chars.len()
                && chars[i] == ':'
                && chars[i + 1] == ':'
                && is_word_char(chars[i + 2])
            {
                i += 3;
            } else {
                break;
            }
        }
        if i + 1 < chars.len() && chars[i] == '(' && chars[i + 1] == ')' {
            i += 2;
        }
        out.push(RawToken {
            surface: chars[start..i].iter().collect(),
            start,
            end: i,
        });
    }
    out
}
