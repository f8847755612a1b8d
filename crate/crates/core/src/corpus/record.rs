use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::text::{clean_text_with, CleanOptions, TokenSequence};
use crate::error::{Error, Result};

/// One review with the metadata of the business it was written about.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub review_text: String,
    pub rating: u8,
    pub business_name: String,
    pub city: String,
    pub state: String,
    pub tags: Vec<String>,
}

/// JSON keys used to pull each [`RawRecord`] field out of an input line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FieldMapping {
    pub review_text: String,
    pub rating: String,
    pub business_name: String,
    pub city: String,
    pub state: String,
    pub tags: String,
}

impl Default for FieldMapping {
    fn default() -> Self {
        FieldMapping {
            review_text: "text".into(),
            rating: "stars".into(),
            business_name: "name".into(),
            city: "city".into(),
            state: "state".into(),
            tags: "categories".into(),
        }
    }
}

impl FieldMapping {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn field<'a>(obj: &'a serde_json::Map<String, Value>, key: &str) -> Result<&'a Value> {
    match obj.get(key) {
        Some(Value::Null) | None => Err(Error::MissingField(key.to_owned())),
        Some(v) => Ok(v),
    }
}

fn string_field(obj: &serde_json::Map<String, Value>, key: &str) -> Result<String> {
    match field(obj, key)? {
        Value::String(s) => Ok(s.clone()),
        other => Err(Error::Parse {
            line: 0,
            message: format!("field `{key}` must be a string, got {other}"),
        }),
    }
}

impl RawRecord {
    /// Parses one JSON object using `mapping` to locate fields.
    ///
    /// Tags may be a JSON array of strings or a single comma-separated string.
    pub fn from_json(value: &Value, mapping: &FieldMapping) -> Result<Self> {
        let obj = value.as_object().ok_or_else(|| Error::Parse {
            line: 0,
            message: "record is not a JSON object".into(),
        })?;
        let review_text = string_field(obj, &mapping.review_text)?;
        let rating = match field(obj, &mapping.rating)? {
            Value::Number(n) => n
                .as_i64()
                .or_else(|| n.as_f64().map(|f| f.round() as i64))
                .unwrap_or(0),
            Value::String(s) => s.trim().parse::<f64>().map(|f| f.round() as i64).map_err(|_| {
                Error::Parse {
                    line: 0,
                    message: format!("rating `{s}` is not a number"),
                }
            })?,
            other => {
                return Err(Error::Parse {
                    line: 0,
                    message: format!("rating must be numeric, got {other}"),
                })
            }
        };
        if !(1..=5).contains(&rating) {
            return Err(Error::InvalidRating(rating));
        }
        let business_name = string_field(obj, &mapping.business_name)?;
        let city = string_field(obj, &mapping.city)?;
        let state = string_field(obj, &mapping.state)?;
        let tags = match field(obj, &mapping.tags)? {
            Value::Array(items) => items
                .iter()
                .filter_map(|v| v.as_str().map(str::to_owned))
                .collect(),
            Value::String(s) => s
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(str::to_owned)
                .collect(),
            other => {
                return Err(Error::Parse {
                    line: 0,
                    message: format!("tags must be an array or string, got {other}"),
                })
            }
        };
        Ok(RawRecord {
            review_text,
            rating: rating as u8,
            business_name,
            city,
            state,
            tags,
        })
    }

    /// True when any tag matches an entry of `keep` (case-insensitive).
    /// An empty keep-list keeps everything.
    pub fn has_any_tag(&self, keep: &[String]) -> bool {
        keep.is_empty()
            || self
                .tags
                .iter()
                .any(|t| keep.iter().any(|k| k.eq_ignore_ascii_case(t.trim())))
    }
}

/// Reads JSON-lines records. Blank lines are skipped; a malformed line is an
/// error that carries its 1-based line number.
pub fn read_jsonl(path: &Path, mapping: &FieldMapping) -> Result<Vec<RawRecord>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        let record = RawRecord::from_json(&value, mapping).map_err(|e| match e {
            Error::Parse { message, .. } => Error::Parse {
                line: i + 1,
                message,
            },
            Error::MissingField(f) => Error::Parse {
                line: i + 1,
                message: format!("record is missing required field `{f}`"),
            },
            other => other,
        })?;
        out.push(record);
    }
    Ok(out)
}

/// Conditioning information rendered as one cleaned token sequence in the
/// order rating, name, city, state, tags.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Context {
    tokens: TokenSequence,
}

impl Context {
    pub fn from_fields(
        rating: u8,
        name: &str,
        city: &str,
        state: &str,
        tags: &[String],
        opts: CleanOptions,
    ) -> Result<Self> {
        if !(1..=5).contains(&rating) {
            return Err(Error::InvalidRating(rating as i64));
        }
        let mut tokens = vec![rating.to_string()];
        for (label, value) in [("business_name", name), ("city", city), ("state", state)] {
            let cleaned = clean_text_with(value, opts);
            if cleaned.is_empty() {
                return Err(Error::MissingField(label.into()));
            }
            tokens.extend(cleaned.split(' ').map(str::to_owned));
        }
        for tag in tags {
            let cleaned = clean_text_with(tag, opts);
            tokens.extend(cleaned.split_whitespace().map(str::to_owned));
        }
        Ok(Context {
            tokens: TokenSequence::new(tokens),
        })
    }

    /// Parses a serialized context line, e.g. one line of a contexts file.
    pub fn parse(line: &str) -> Self {
        Context {
            tokens: TokenSequence::from_cleaned(line),
        }
    }

    pub fn tokens(&self) -> &TokenSequence {
        &self.tokens
    }

    /// Leading rating token, if it parses as 1..=5.
    pub fn rating(&self) -> Option<u8> {
        self.tokens
            .iter()
            .next()
            .and_then(|t| t.parse::<u8>().ok())
            .filter(|r| (1..=5).contains(r))
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.tokens.fmt(f)
    }
}

pub fn build_context(record: &RawRecord) -> Result<Context> {
    build_context_with(record, CleanOptions::default())
}

pub fn build_context_with(record: &RawRecord, opts: CleanOptions) -> Result<Context> {
    Context::from_fields(
        record.rating,
        &record.business_name,
        &record.city,
        &record.state,
        &record.tags,
        opts,
    )
}
