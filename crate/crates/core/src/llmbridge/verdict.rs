// SPDX-License-Identifier: Apache-2.0

//! Constrained yes/no parsing of model replies.

use std::fmt;

use serde::{Deserialize, Serialize};

/// The classification cue that closes every rendered prompt.
pub const CLASSIFICATION_CUE: &str = "[Concurrent bug or not]:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Yes,
    No,
    Unparseable,
}

impl Verdict {
    /// Unparseable replies count as negative.
    pub fn is_positive(self) -> bool {
        self == Verdict::Yes
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Yes => "Yes",
            Verdict::No => "No",
            Verdict::Unparseable => "Unparseable",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Reads the first line of a reply, drops an echoed cue and surrounding
/// punctuation, and looks for a leading `yes` or `no` word.
pub fn parse_verdict(raw: &str) -> Verdict {
    let line = raw.lines().find(|l| !l.trim().is_empty()).unwrap_or("").trim();
    let line = strip_prefix_ci(line, CLASSIFICATION_CUE).unwrap_or(line);
    let rest = line.trim_start_matches(|c: char| !c.is_alphanumeric());
    let word: String = rest.chars().take_while(|c| c.is_alphanumeric()).collect();
    match word.to_lowercase().as_str() {
        "yes" => Verdict::Yes,
        "no" => Verdict::No,
        _ => Verdict::Unparseable,
    }
}

fn strip_prefix_ci<'a>(s: &'a str, prefix: &str) -> Option<&'a str> {
    let head = s.get(..prefix.len())?;
    head.eq_ignore_ascii_case(prefix).then(|| &s[prefix.len()..])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn table() {
        let cases = [
            ("Yes", Verdict::Yes),
            ("yes.", Verdict::Yes),
            ("Yes — this is a concurrency bug", Verdict::Yes),
            ("No, this is a configuration problem.", Verdict::No),
            ("  **NO**", Verdict::No),
            ("[Concurrent bug or not]: Yes", Verdict::Yes),
            ("\n\nno\nyes", Verdict::No),
            ("It might involve threads…", Verdict::Unparseable),
            ("Nope", Verdict::Unparseable),
            ("Yesterday it hung", Verdict::Unparseable),
            ("I think yes", Verdict::Unparseable),
            ("", Verdict::Unparseable),
        ];
        for (raw, want) in cases {
            assert_eq!(parse_verdict(raw), want, "{raw:?}");
        }
        assert!(!Verdict::Unparseable.is_positive());
    }

    proptest! {
        #[test]
        fn total_and_idempotent(raw in "\\PC{0,60}") {
            let v = parse_verdict(&raw);
            prop_assert_eq!(parse_verdict(v.as_str()), v);
        }
    }
}
