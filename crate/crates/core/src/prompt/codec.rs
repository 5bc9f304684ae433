use super::{PromptError, PromptRecord, SEEKING_KEY};

/// Serialization mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Complete record with opinion and decision.
    Training,
    /// Open stub ending at `'opinion': '`.
    Inference,
}

/// Backslash-escapes `\` and `'`. Newlines and tabs are kept verbatim; any
/// other control character is rejected.
pub fn escape_value(field: &'static str, value: &str) -> Result<String, PromptError> {
    let mut out = String::with_capacity(value.len() + 8);
    for c in value.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\'' => out.push_str("\\'"),
            '\n' | '\t' => out.push(c),
            c if c.is_control() => {
                return Err(PromptError::UnescapableText {
                    field,
                    code: c as u32,
                })
            }
            c => out.push(c),
        }
    }
    Ok(out)
}

/// Inverse of [`escape_value`]. Unknown escapes are kept as written.
pub fn unescape_value(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    let mut chars = value.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.peek() {
                Some('\\') | Some('\'') => {
                    out.push(chars.next().unwrap());
                    continue;
                }
                _ => {}
            }
        }
        out.push(c);
    }
    out
}

pub fn serialize_prompt(record: &PromptRecord, mode: Mode) -> Result<String, PromptError> {
    if record.issue.trim().is_empty() {
        return Err(PromptError::InvalidRecord("issue is empty".into()));
    }
    if record.topic.trim().is_empty() {
        return Err(PromptError::InvalidRecord("topic is empty".into()));
    }

    let mut out = String::from("{\n");
    push_pair(&mut out, "issue", &escape_value("issue", &record.issue)?, true);
    push_pair(&mut out, "topic", &escape_value("topic", &record.topic)?, true);
    if let Some(seeking) = &record.seeking {
        push_pair(&mut out, SEEKING_KEY, &escape_value("seeking", seeking)?, true);
    }

    match mode {
        Mode::Training => {
            let (Some(opinion), Some(decision)) = (&record.opinion, record.decision) else {
                return Err(PromptError::InvalidRecord(
                    "training mode requires opinion and decision".into(),
                ));
            };
            push_pair(&mut out, "opinion", &escape_value("opinion", opinion)?, true);
            push_pair(&mut out, "decision", decision.as_token(), false);
            out.push_str("}\n");
        }
        Mode::Inference => {
            if !record.is_inference() {
                return Err(PromptError::InvalidRecord(
                    "inference stub must not carry opinion or decision".into(),
                ));
            }
            out.push_str(" 'opinion': '");
        }
    }
    Ok(out)
}

fn push_pair(out: &mut String, key: &str, escaped: &str, comma: bool) {
    out.push_str(" '");
    out.push_str(key);
    out.push_str("': '");
    out.push_str(escaped);
    out.push('\'');
    if comma {
        out.push(',');
    }
    out.push('\n');
}
