use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::codec::unescape_value;
use crate::Decision;

/// Why a continuation could not be turned into an `(opinion, decision)` pair.
/// Every variant is retryable.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum ParseFailure {
    #[error("no decision key in completion")]
    NoDecision,
    #[error("opinion text is empty")]
    EmptyOpinion,
    #[error("unknown decision token `{0}`")]
    UnknownDecisionToken(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedCompletion {
    pub opinion: String,
    pub decision: Decision,
}

/// Case-insensitive alias table for decision tokens.
pub fn normalize_decision(token: &str) -> Option<Decision> {
    match token.trim().to_lowercase().as_str() {
        "deny" | "denied" | "reject" => Some(Decision::Deny),
        "approve" | "grant" | "granted" | "affirm" => Some(Decision::Approve),
        _ => None,
    }
}

fn strict_opinion_key() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"'opinion'\s*:\s*'").unwrap())
}

fn loose_opinion_key() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r#"(?i)\bopinion\b['"]?\s*:\s*['"`]?"#).unwrap())
}

fn strict_decision_key() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"'decision'\s*:\s*").unwrap())
}

fn loose_decision_key() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r#"(?i)['"]?\bdecision\b['"]?\s*:\s*"#).unwrap())
}

fn decision_token() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r#"^['"`]?\s*([^\s'"`,}]*)"#).unwrap())
}

/// True when the byte at `idx` is preceded by an odd run of backslashes.
fn is_escaped(text: &str, idx: usize) -> bool {
    text.as_bytes()[..idx]
        .iter()
        .rev()
        .take_while(|&&b| b == b'\\')
        .count()
        % 2
        == 1
}

/// Span of the first match of `re` at or after `from` whose leading quote,
/// if any, is not escaped.
fn first_unescaped(re: &Regex, text: &str, from: usize) -> Option<(usize, usize)> {
    re.find_iter(&text[from..])
        .map(|m| (m.start() + from, m.end() + from))
        .find(|&(start, _)| !(text.as_bytes()[start] == b'\'' && is_escaped(text, start)))
}

/// Extracts the opinion and a normalized decision from model output.
///
/// `raw` may be the bare continuation of an inference stub or the stub
/// followed by its continuation. Properly quoted keys are preferred; when a
/// model drops the quoting, a case-insensitive `decision:` key is accepted and
/// the opinion is everything before it.
pub fn parse_completion(raw: &str) -> Result<ParsedCompletion, ParseFailure> {
    let (opinion_start, strict) = match first_unescaped(strict_opinion_key(), raw, 0) {
        Some((_, end)) => (end, true),
        None => match loose_opinion_key().find(raw) {
            Some(m) => (m.end(), false),
            None => (0, false),
        },
    };

    let (key_start, key_end) = first_unescaped(strict_decision_key(), raw, opinion_start)
        .or_else(|| first_unescaped(loose_decision_key(), raw, opinion_start))
        .ok_or(ParseFailure::NoDecision)?;

    let token = decision_token()
        .captures(&raw[key_end..])
        .and_then(|c| c.get(1))
        .map(|m| m.as_str())
        .unwrap_or("");
    let decision = normalize_decision(token)
        .ok_or_else(|| ParseFailure::UnknownDecisionToken(token.chars().take(40).collect()))?;

    let body = strip_value_tail(&raw[opinion_start..key_start], strict);
    let opinion = unescape_value(body);
    if opinion.trim().is_empty() {
        return Err(ParseFailure::EmptyOpinion);
    }
    Ok(ParsedCompletion { opinion, decision })
}

/// Drops the `',\n ` (or looser) separator between the opinion value and the
/// decision key.
fn strip_value_tail(body: &str, strict: bool) -> &str {
    let mut s = body.trim_end_matches(char::is_whitespace);
    if let Some(rest) = s.strip_suffix(',') {
        s = rest.trim_end_matches(char::is_whitespace);
    }
    let closing: &[char] = if strict { &['\''] } else { &['\'', '"', '`'] };
    if let Some(last) = s.chars().last() {
        if closing.contains(&last) {
            let idx = s.len() - last.len_utf8();
            if !(last == '\'' && is_escaped(s, idx)) {
                s = &s[..idx];
            }
        }
    }
    s
}
