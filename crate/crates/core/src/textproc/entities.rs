// SPDX-License-Identifier: Apache-2.0

//! Software entity recognition: method calls, classes, qualified names and
//! exception types mentioned in prose.

use super::tokenize::tokenize;
use super::{Pos, Token};

/// Decides whether a single word is a code identifier.
pub trait EntityRecognizer: Send + Sync {
    fn is_entity(&self, surface: &str) -> bool;

    /// Every identifier in `sentence`, as API tokens with verbatim lemmas.
    fn recognize(&self, sentence: &str) -> Vec<Token> {
        tokenize(sentence)
            .into_iter()
            .filter(|t| self.is_entity(&t.surface))
            .map(|t| Token {
                lemma: t.surface.clone(),
                surface: t.surface,
                pos: Pos::Api,
                span: (t.start, t.end),
            })
            .collect()
    }
}

/// Product and platform names with identifier-like casing.
const BRAND_NAMES: &[&str] = &[
    "GitHub", "GitLab", "JavaScript", "TypeScript", "CoffeeScript", "PostgreSQL", "MySQL",
    "MongoDB", "MariaDB", "SQLite", "iOS", "macOS", "iPhone", "iPad", "iCloud", "YouTube",
    "LinkedIn", "PayPal", "WordPress", "IntelliJ", "PyCharm", "WebStorm", "OpenJDK", "GraalVM",
    "OpenSSL", "DevOps", "PowerShell", "VSCode", "JUnit", "TestNG", "NuGet", "WebSocket",
    "WebSockets", "OAuth", "GraphQL", "RocksDB", "LevelDB", "DynamoDB", "ElasticSearch",
    "OpenShift", "CentOS", "FreeBSD", "OpenBSD", "McAfee", "AirPods", "eBay", "SharePoint",
    "OneDrive", "OneNote", "PowerPoint", "FaceTime", "WhatsApp", "TikTok", "DropBox",
    "BitBucket", "CircleCI", "TeamCity", "NetBeans", "AppVeyor", "SonarQube", "PhpStorm",
];

/// Trailing segments that make a dotted word a file name or product.
const FILE_EXTENSIONS: &[&str] = &[
    "yaml", "yml", "json", "xml", "csv", "tsv", "txt", "log", "md", "js", "mjs", "ts", "py",
    "rb", "go", "rs", "html", "htm", "css", "toml", "ini", "cfg", "conf", "properties", "sh",
    "bat", "exe", "dll", "so", "jar", "war", "zip", "gz", "tar", "pdf", "png", "jpg", "jpeg",
    "gif", "svg", "doc", "docx", "xls", "xlsx", "sql", "db", "lock", "env",
];

/// Final labels of host names.
const TOP_LEVEL_DOMAINS: &[&str] = &["com", "org", "net", "io", "dev", "edu", "gov", "app", "co"];

/// Morphology-only recognizer.
#[derive(Debug, Default, Clone, Copy)]
pub struct HeuristicRecognizer;

impl EntityRecognizer for HeuristicRecognizer {
    fn is_entity(&self, surface: &str) -> bool {
        if surface.ends_with("()") {
            return surface.len() > 2;
        }
        if BRAND_NAMES.contains(&surface) {
            return false;
        }
        is_camel_case(surface) || is_dotted_path(surface) || is_exception_name(surface)
    }
}

fn is_camel_case(s: &str) -> bool {
    if !s.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '$') {
        return false;
    }
    let has_lower = s.chars().any(|c| c.is_lowercase());
    let interior_upper = s.chars().skip(1).any(|c| c.is_uppercase());
    has_lower && interior_upper
}

fn is_dotted_path(s: &str) -> bool {
    let segments: Vec<&str> = s.split(['.', '#']).flat_map(|p| p.split("::")).collect();
    if segments.len() < 2 {
        return false;
    }
    let last = segments[segments.len() - 1];
    if s.contains('.') && !s.contains("::") && !s.contains('#') {
        if FILE_EXTENSIONS.contains(&last.to_ascii_lowercase().as_str()) {
            return false;
        }
        if TOP_LEVEL_DOMAINS.contains(&last) && !TOP_LEVEL_DOMAINS.contains(&segments[0]) {
            return false;
        }
    }
    let well_formed = segments.iter().all(|seg| {
        let mut chars = seg.chars();
        matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
            && chars.all(|c| c.is_alphanumeric() || c == '_' || c == '$')
    });
    well_formed && segments.iter().any(|seg| seg.chars().count() >= 2)
}

fn is_exception_name(s: &str) -> bool {
    ["Exception", "Error"].iter().any(|suffix| {
        s.strip_suffix(suffix)
            .and_then(|prefix| prefix.chars().next())
            .is_some_and(|c| c.is_uppercase())
    })
}

/// Identifiers in `sentence` found by the default recognizer.
pub fn recognize_software_entities(sentence: &str) -> Vec<Token> {
    HeuristicRecognizer.recognize(sentence)
}
