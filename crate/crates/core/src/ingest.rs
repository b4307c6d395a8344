//! Vertical search result ingestion and Arabic text preprocessing.
//!
//! Results from every vertical are flattened into one textual representation
//! and then normalized to a stream of bare Arabic letters separated by single
//! spaces. Stop words are kept.

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Vertical {
    Web,
    Image,
    Video,
    News,
    Wiki,
}

impl Vertical {
    pub const ALL: [Vertical; 5] = [
        Vertical::Web,
        Vertical::Image,
        Vertical::Video,
        Vertical::News,
        Vertical::Wiki,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Vertical::Web => "web",
            Vertical::Image => "image",
            Vertical::Video => "video",
            Vertical::News => "news",
            Vertical::Wiki => "wiki",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.as_str() == s)
    }
}

impl fmt::Display for Vertical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One search result returned by a vertical.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub query_id: String,
    pub vertical: Vertical,
    pub title: String,
    pub link: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snippet: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedDoc {
    pub id: String,
    pub text: String,
}

impl NormalizedDoc {
    /// Documents whose text normalizes away entirely are kept (so ids stay
    /// aligned) and embed to the zero vector.
    pub fn is_empty(&self) -> bool {
        self.text.is_empty()
    }
}

#[derive(Deserialize)]
struct RawDocument {
    id: Option<String>,
    query_id: Option<String>,
    vertical: Option<String>,
    title: Option<String>,
    #[serde(default)]
    link: Option<String>,
    #[serde(default)]
    snippet: Option<String>,
    #[serde(default)]
    description: Option<String>,
}

fn required(value: Option<String>, line: usize, field: &'static str) -> Result<String> {
    match value {
        Some(v) if !v.is_empty() => Ok(v),
        _ => Err(Error::MissingField { line, field }),
    }
}

/// Parses `documents.jsonl`. Blank lines are skipped; line numbers in errors
/// are 1-based and count blank lines.
pub fn parse_documents<R: BufRead>(reader: R) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawDocument = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let id = required(raw.id, line_no, "id")?;
        let query_id = required(raw.query_id, line_no, "query_id")?;
        let vertical_str = required(raw.vertical, line_no, "vertical")?;
        let vertical = Vertical::parse(&vertical_str).ok_or(Error::UnknownVertical {
            line: line_no,
            value: vertical_str,
        })?;
        let title = required(raw.title, line_no, "title")?;
        if !seen.insert(id.clone()) {
            return Err(Error::DuplicateId(id));
        }
        docs.push(Document {
            id,
            query_id,
            vertical,
            title,
            link: raw.link.unwrap_or_default(),
            snippet: raw.snippet,
            description: raw.description,
        });
    }
    Ok(docs)
}

pub fn write_documents<W: Write>(mut writer: W, docs: &[Document]) -> std::io::Result<()> {
    for doc in docs {
        serde_json::to_writer(&mut writer, doc)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Flattens a result into text. The link is metadata only and never enters the
/// text.
pub fn textual_representation(doc: &Document) -> String {
    let extra = match doc.vertical {
        Vertical::Web | Vertical::News | Vertical::Wiki => doc.snippet.as_deref(),
        Vertical::Video => doc.description.as_deref(),
        Vertical::Image => None,
    };
    match extra {
        Some(extra) if !extra.is_empty() => format!("{} {}", doc.title, extra),
        _ => doc.title.clone(),
    }
}

static URL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)(?:https?://|www\.)\S*").expect("valid URL pattern"));

const ARABIC_FIRST: char = '\u{0621}';
const ARABIC_LAST: char = '\u{064A}';
const TATWEEL: char = '\u{0640}';

fn is_diacritic(c: char) -> bool {
    matches!(c, '\u{064B}'..='\u{0652}' | '\u{0670}' | TATWEEL)
}

fn fold_letter(c: char) -> char {
    match c {
        'أ' | 'إ' | 'آ' | 'ٱ' => 'ا',
        'ى' => 'ي',
        'ة' => 'ه',
        other => other,
    }
}

/// Normalizes raw text, in order: URL removal, diacritic and tatweel removal,
/// letter folding, removal of everything outside the Arabic letter block,
/// whitespace collapse.
///
/// Any Unicode whitespace counts as a token separator. Other non-letters
/// (digits, Latin, punctuation) are deleted in place.
pub fn preprocess_text(raw: &str) -> String {
    let without_urls = URL.replace_all(raw, " ");
    let mut out = String::with_capacity(without_urls.len());
    let mut pending_space = false;
    for c in without_urls.chars() {
        if c.is_whitespace() {
            pending_space = true;
            continue;
        }
        if is_diacritic(c) {
            continue;
        }
        let c = fold_letter(c);
        if !(ARABIC_FIRST..=ARABIC_LAST).contains(&c) {
            continue;
        }
        if pending_space && !out.is_empty() {
            out.push(' ');
        }
        pending_space = false;
        out.push(c);
    }
    out
}

pub fn normalize_document(doc: &Document) -> NormalizedDoc {
    NormalizedDoc {
        id: doc.id.clone(),
        text: preprocess_text(&textual_representation(doc)),
    }
}

pub fn normalize_documents(docs: &[Document]) -> Vec<NormalizedDoc> {
    docs.iter().map(normalize_document).collect()
}

pub fn write_normalized<W: Write>(mut writer: W, docs: &[NormalizedDoc]) -> std::io::Result<()> {
    for doc in docs {
        serde_json::to_writer(&mut writer, doc)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads `normalized.jsonl`, re-checking the output invariants.
pub fn parse_normalized<R: BufRead>(reader: R) -> Result<Vec<NormalizedDoc>> {
    let mut docs = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: NormalizedDoc = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if doc.id.is_empty() {
            return Err(Error::MissingField {
                line: line_no,
                field: "id",
            });
        }
        if !is_normalized_text(&doc.text) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("text of {:?} is not normalized", doc.id),
            });
        }
        if !seen.insert(doc.id.clone()) {
            return Err(Error::DuplicateId(doc.id));
        }
        docs.push(doc);
    }
    Ok(docs)
}

/// True when `text` uses only Arabic letters and single interior spaces.
pub fn is_normalized_text(text: &str) -> bool {
    if text.starts_with(' ') || text.ends_with(' ') || text.contains("  ") {
        return false;
    }
    text.chars()
        .all(|c| c == ' ' || ((ARABIC_FIRST..=ARABIC_LAST).contains(&c) && c != TATWEEL))
}
