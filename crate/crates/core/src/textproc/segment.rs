// SPDX-License-Identifier: Apache-2.0

//! Sentence segmentation for code-mixed issue text.

const ABBREVIATIONS: &[&str] = &[
    "e.g.", "i.e.", "etc.", "vs.", "mr.", "mrs.", "ms.", "dr.", "prof.", "approx.", "cf.",
    "fig.", "no.", "ver.", "min.", "max.", "resp.", "incl.", "al.", "jr.", "sr.", "st.",
];

/// Split a report into sentences. The title is always sentence 0. Fenced
/// (```) blocks and indented code lines in the body are dropped.
pub fn segment_sentences(title: &str, body: &str) -> Vec<String> {
    let mut out = Vec::new();
    let title = collapse_ws(title);
    if !title.is_empty() {
        out.push(title);
    }
    for paragraph in prose_paragraphs(body) {
        out.extend(split_paragraph(&paragraph));
    }
    out
}

/// Natural-language paragraphs of `body` with code removed. Lines inside a
/// paragraph are joined by a single space.
pub fn prose_paragraphs(body: &str) -> Vec<String> {
    let mut paragraphs = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    let mut in_fence = false;
    let flush = |current: &mut Vec<&str>, paragraphs: &mut Vec<String>| {
        if !current.is_empty() {
            let joined = collapse_ws(&current.join(" "));
            if !joined.is_empty() {
                paragraphs.push(joined);
            }
            current.clear();
        }
    };
    for line in body.lines() {
        let trimmed = line.trim_start();
        if trimmed.starts_with("```") || trimmed.starts_with("~~~") {
            in_fence = !in_fence;
            flush(&mut current, &mut paragraphs);
            continue;
        }
        if in_fence {
            continue;
        }
        if is_indented_code(line) {
            flush(&mut current, &mut paragraphs);
            continue;
        }
        if trimmed.is_empty() {
            flush(&mut current, &mut paragraphs);
            continue;
        }
        current.push(line);
    }
    flush(&mut current, &mut paragraphs);
    paragraphs
}

fn is_indented_code(line: &str) -> bool {
    (line.starts_with("    ") || line.starts_with('\t')) && !line.trim().is_empty()
}

fn collapse_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn split_paragraph(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        if matches!(chars[i], '.' | '!' | '?') {
            // consume a run like "?!" or "..."
            let mut end = i + 1;
            while end < chars.len() && matches!(chars[end], '.' | '!' | '?') {
                end += 1;
            }
            // closing quotes and brackets stay with the sentence
            while end < chars.len() && matches!(chars[end], '"' | '\'' | ')' | ']' | '”' | '’') {
                end += 1;
            }
            if is_boundary(&chars, start, i, end) {
                push_trimmed(&mut out, &chars[start..end]);
                start = end;
            }
            i = end;
        } else {
            i += 1;
        }
    }
    if start < chars.len() {
        push_trimmed(&mut out, &chars[start..]);
    }
    out
}

fn is_boundary(chars: &[char], sentence_start: usize, punct: usize, end: usize) -> bool {
    if end < chars.len() {
        if !chars[end].is_whitespace() {
            return false;
        }
        let next = chars[end..].iter().find(|c| !c.is_whitespace());
        match next {
            Some(c) if c.is_uppercase() || c.is_ascii_digit() || matches!(c, '"' | '(' | '[' | '`' | '“') => {}
            Some(_) => return false,
            None => {}
        }
    }
    if chars[punct] == '.' {
        let word_start = chars[sentence_start..punct]
            .iter()
            .rposition(|c| c.is_whitespace())
            .map(|p| sentence_start + p + 1)
            .unwrap_or(sentence_start);
        let word: String = chars[word_start..=punct].iter().collect::<String>().to_lowercase();
        if ABBREVIATIONS.contains(&word.as_str()) {
            return false;
        }
    }
    true
}

fn push_trimmed(out: &mut Vec<String>, chars: &[char]) {
    let s: String = chars.iter().collect();
    let s = s.trim();
    if !s.is_empty() {
        out.push(s.to_string());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn title_only() {
        assert_eq!(
            segment_sentences("Thread deadlock in stress test!", ""),
            vec!["Thread deadlock in stress test!"]
        );
    }

    #[test]
    fn terminal_punctuation() {
        assert_eq!(
            segment_sentences("", "It hangs. It never returns."),
            vec!["It hangs.", "It never returns."]
        );
    }

    #[test]
    fn fenced_code_is_dropped() {
        let body = "The worker stops.\n```java\nlock.lock(); // Never released.\n```\nThen it hangs.";
        assert_eq!(
            segment_sentences("", body),
            vec!["The worker stops.", "Then it hangs."]
        );
    }

    #[test]
    fn indented_code_is_dropped() {
        let body = "See the trace:\n\n    at Foo.bar(Foo.java:10)\n    at Foo.main\n\nIt fails.";
        assert_eq!(segment_sentences("", body), vec!["See the trace:", "It fails."]);
    }

    #[test]
    fn dotted_identifier_and_abbreviation_do_not_split() {
        let body = "Calling Thread.sleep() blocks, e.g. In tests. Version 1.2 too.";
        assert_eq!(
            segment_sentences("", body),
            vec!["Calling Thread.sleep() blocks, e.g. In tests.", "Version 1.2 too."]
        );
    }

    #[test]
    fn lowercase_continuation_does_not_split() {
        assert_eq!(
            segment_sentences("", "It hangs. sometimes it works."),
            vec!["It hangs. sometimes it works."]
        );
    }

    #[test]
    fn question_and_exclamation() {
        assert_eq!(
            segment_sentences("t", "Does this lock support fairness? Yes!"),
            vec!["t", "Does this lock support fairness?", "Yes!"]
        );
    }

    #[test]
    fn blank_line_splits_paragraphs() {
        assert_eq!(
            segment_sentences("", "first part\n\nsecond part"),
            vec!["first part", "second part"]
        );
    }

    #[test]
    fn whitespace_only_is_empty() {
        assert!(segment_sentences("  ", "\n\t\n").is_empty());
    }
}
